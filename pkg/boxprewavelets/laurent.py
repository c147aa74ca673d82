import itertools
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Tuple

import numpy as np
from sympy import QQ
from sympy.polys.rings import ring

Exponent = Tuple[int, ...]
CosetIndex = Tuple[int, ...]

VARIABLE_NAMES = ("x", "y", "z")


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError(f"Floating point coefficient not allowed: {value!r}.")
    return Fraction(value)


class LaurentPoly:
    """Sparse multivariate Laurent polynomial with exact rational coefficients.

    Terms are stored as a map from exponent tuples to nonzero ``Fraction``
    coefficients, so two polynomials are equal iff their term maps agree.

    Args:
        dimension (int): Number of variables d >= 1.
        terms (Mapping[tuple, number], optional): Exponent to coefficient map.
            Zero coefficients are dropped and repeated keys are not possible. Default: None
    """

    __slots__ = ("dimension", "_terms", "_hash")

    def __init__(self, dimension, terms=None):
        if dimension < 1:
            raise ValueError(f"Invalid dimension: {dimension}.")
        self.dimension = int(dimension)
        canonical = {}
        for exponent, coeff in (terms or {}).items():
            exponent = tuple(int(k) for k in exponent)
            if len(exponent) != self.dimension:
                raise ValueError(
                    f"Exponent {exponent} does not have length {self.dimension}."
                )
            coeff = _as_fraction(coeff)
            if coeff != 0:
                canonical[exponent] = coeff
        self._terms = canonical
        self._hash = None

    @classmethod
    def _trusted(cls, dimension, terms):
        # terms already canonical
        poly = cls.__new__(cls)
        poly.dimension = dimension
        poly._terms = terms
        poly._hash = None
        return poly

    @classmethod
    def constant(cls, value, dimension):
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def monomial(cls, exponent, coeff=1):
        exponent = tuple(exponent)
        return cls(len(exponent), {exponent: coeff})

    @classmethod
    def zero(cls, dimension):
        return cls._trusted(dimension, {})

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, exponent) -> Fraction:
        return self._terms.get(tuple(exponent), Fraction(0))

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.dimension == other.dimension and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == LaurentPoly.constant(other, self.dimension)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            zero = (0,) * self.dimension
            if set(self._terms) <= {zero}:
                # constants compare equal to int and Fraction, so hash like them
                self._hash = hash(self._terms.get(zero, Fraction(0)))
            else:
                self._hash = hash((self.dimension, frozenset(self._terms.items())))
        return self._hash

    def _coerce(self, other):
        if isinstance(other, LaurentPoly):
            if other.dimension != self.dimension:
                raise ValueError(
                    f"Dimension mismatch: {self.dimension} vs {other.dimension}."
                )
            return other
        if isinstance(other, (int, Fraction)):
            return LaurentPoly.constant(other, self.dimension)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return LaurentPoly._trusted(self.dimension, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._trusted(
            self.dimension, {k: -c for k, c in self._terms.items()}
        )

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0) + c1 * c2
        return LaurentPoly._trusted(
            self.dimension, {k: c for k, c in out.items() if c}
        )

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"Invalid power: {n!r}.")
        result = LaurentPoly.constant(1, self.dimension)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, factor):
        factor = _as_fraction(factor)
        if factor == 0:
            return LaurentPoly.zero(self.dimension)
        return LaurentPoly._trusted(
            self.dimension, {k: c * factor for k, c in self._terms.items()}
        )

    def shift(self, exponent):
        """Multiply by the monomial z^exponent."""
        exponent = tuple(exponent)
        if len(exponent) != self.dimension:
            raise ValueError(f"Exponent {exponent} does not have length {self.dimension}.")
        return LaurentPoly._trusted(
            self.dimension,
            {tuple(a + b for a, b in zip(k, exponent)): c for k, c in self._terms.items()},
        )

    def sorted_terms(self):
        """Terms in graded lexicographic order, highest total degree first."""
        return sorted(self._terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __repr__(self):
        return f"LaurentPoly({self.dimension}, {format_poly(self)!r})"

    def __str__(self):
        return format_poly(self)


@dataclass(frozen=True)
class CosetDecomposition:
    """Components P_j in L_down with P = sum_j P_j z^{rep_j}."""

    components: Mapping[CosetIndex, LaurentPoly]
    representatives: Mapping[CosetIndex, Exponent]

    def __getitem__(self, index):
        return self.components[tuple(index)]


def variable_names(dimension):
    if dimension <= len(VARIABLE_NAMES):
        return VARIABLE_NAMES[:dimension]
    return tuple(f"z{i + 1}" for i in range(dimension))


def format_poly(P):
    if not P:
        return "0"
    names = variable_names(P.dimension)
    pieces = []
    for exponent, coeff in P.sorted_terms():
        factors = []
        for name, k in zip(names, exponent):
            if k == 1:
                factors.append(name)
            elif k != 0:
                factors.append(f"{name}^{k}")
        magnitude = abs(coeff)
        if factors and magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(magnitude)] + factors)
        sign = "-" if coeff < 0 else "+"
        pieces.append((sign, body))
    text = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        text += f" {sign} {body}"
    return text


def coset_indices(dimension) -> Tuple[CosetIndex, ...]:
    """All j in E = {0,1}^d in ascending lexicographic order."""
    return tuple(itertools.product((0, 1), repeat=dimension))


def format_index(index):
    return "".join(str(b) for b in index)


def parse_index(text, dimension=None):
    text = str(text).strip().replace(",", "").replace(" ", "")
    if not text or any(ch not in "01" for ch in text):
        raise ValueError(f"Invalid coset index: '{text}'.")
    if dimension is not None and len(text) != dimension:
        raise ValueError(f"Coset index '{text}' does not have length {dimension}.")
    return tuple(int(ch) for ch in text)


def _check_same_dimension(*polys):
    d = polys[0].dimension
    for P in polys[1:]:
        if P.dimension != d:
            raise ValueError(f"Dimension mismatch: {d} vs {P.dimension}.")
    return d


def add(P, Q):
    _check_same_dimension(P, Q)
    return P + Q


def mul(P, Q):
    _check_same_dimension(P, Q)
    return P * Q


def conjugate(P):
    """Coefficients are rational, so conjugation only negates exponents."""
    return LaurentPoly._trusted(
        P.dimension, {tuple(-k for k in e): c for e, c in P.items()}
    )


def sign_flip(P, s):
    """P((-1)^s z): the coefficient of z^k picks up (-1)^(s.k)."""
    s = tuple(s)
    if len(s) != P.dimension:
        raise ValueError(f"Coset index {s} does not have length {P.dimension}.")
    out = {}
    for e, c in P.items():
        parity = sum(a * b for a, b in zip(s, e)) & 1
        out[e] = -c if parity else c
    return LaurentPoly._trusted(P.dimension, out)


def substitute_squares(P):
    return LaurentPoly._trusted(
        P.dimension, {tuple(2 * k for k in e): c for e, c in P.items()}
    )


def is_downarrow(P):
    return all(k % 2 == 0 for e in P.terms for k in e)


def halve_exponents(P):
    if not is_downarrow(P):
        raise ValueError("Cannot halve exponents of a polynomial outside L_down.")
    return LaurentPoly._trusted(
        P.dimension, {tuple(k // 2 for k in e): c for e, c in P.items()}
    )


def default_representatives(dimension, negative=False):
    sign = -1 if negative else 1
    return {j: tuple(sign * b for b in j) for j in coset_indices(dimension)}


def decompose(P, reps=None) -> CosetDecomposition:
    """Split P into its 2^d coset components.

    Args:
        P (LaurentPoly): Polynomial to split.
        reps (Mapping[tuple, tuple], optional): Representative exponent for every
            coset index, each congruent to its index mod 2. Default: rep_j = j

    Returns:
        CosetDecomposition with components in L_down.
    """
    d = P.dimension
    if reps is None:
        reps = default_representatives(d)
    reps = {tuple(j): tuple(r) for j, r in reps.items()}
    for j in coset_indices(d):
        if j not in reps:
            raise ValueError(f"Missing representative for coset index {j}.")
        r = reps[j]
        if len(r) != d or any((a - b) % 2 for a, b in zip(r, j)):
            raise ValueError(f"Invalid representative {r} for coset index {j}.")
    buckets = {j: {} for j in coset_indices(d)}
    for e, c in P.items():
        j = tuple(k & 1 for k in e)
        r = reps[j]
        buckets[j][tuple(a - b for a, b in zip(e, r))] = c
    components = {j: LaurentPoly._trusted(d, t) for j, t in buckets.items()}
    return CosetDecomposition(
        components=MappingProxyType(components),
        representatives=MappingProxyType({j: reps[j] for j in coset_indices(d)}),
    )


def reconstruct(decomposition: CosetDecomposition):
    parts = [
        decomposition.components[j].shift(decomposition.representatives[j])
        for j in decomposition.components
    ]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


def rho(P):
    """Coset-0 component of P: the terms whose exponents are all even."""
    return LaurentPoly._trusted(
        P.dimension, {e: c for e, c in P.items() if all(k % 2 == 0 for k in e)}
    )


def rho_D(D, F):
    _check_same_dimension(D, F)
    return rho(D * conjugate(F))


def tau_D(D, F):
    _check_same_dimension(D, F)
    return rho(conjugate(D) * F)


def bracket_product(F, G, Phi):
    """<F, G>_Phi = sum over s in E of (Phi F conj(G))((-1)^s z).

    Summing the sign-flipped copies keeps exactly the even terms, scaled by 2^d.
    """
    d = _check_same_dimension(F, G, Phi)
    return rho(Phi * F * conjugate(G)).scale(2**d)


def permute_vars(P, sigma):
    """Apply z_i -> z_{sigma[i]}; the exponent k_i moves to slot sigma[i]."""
    sigma = tuple(sigma)
    if sorted(sigma) != list(range(P.dimension)):
        raise ValueError(f"Invalid permutation: {sigma}.")
    out = {}
    for e, c in P.items():
        moved = [0] * P.dimension
        for i, k in enumerate(e):
            moved[sigma[i]] = k
        out[tuple(moved)] = c
    return LaurentPoly._trusted(P.dimension, out)


def permute_index(index, sigma):
    moved = [0] * len(index)
    for i, b in enumerate(index):
        moved[sigma[i]] = b
    return tuple(moved)


def support(P):
    return frozenset(P.terms)


def support_size(P):
    return len(P)


def evaluate_at_ones(P):
    return sum(P.terms.values(), Fraction(0))


def to_arrays(P):
    """Exponents as an int64 (T, d) array and coefficients as float64."""
    items = list(P.items())
    exponents = np.array([e for e, _ in items], dtype=np.int64).reshape(-1, P.dimension)
    coeffs = np.array([float(c) for _, c in items], dtype=np.float64)
    return exponents, coeffs


def eval_numeric(P, angles):
    """Evaluate P on the torus at z_j = exp(-i angles_j).

    Args:
        P (LaurentPoly): Polynomial to evaluate.
        angles (array_like): Shape (d,) or (..., d).

    Returns:
        complex or np.ndarray of complex values with the leading shape of angles.
    """
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape[-1] != P.dimension:
        raise ValueError(f"Expected {P.dimension} angles, got shape {angles.shape}.")
    exponents, coeffs = to_arrays(P)
    phase = angles @ exponents.T.astype(np.float64)
    values = np.exp(-1j * phase) @ coeffs
    if values.ndim == 0:
        return complex(values)
    return values


def random_poly(rng, dimension, num_terms, max_degree=3, max_coeff=9):
    """Random polynomial for property checks; rng is a numpy Generator."""
    terms = {}
    for _ in range(num_terms):
        e = tuple(int(k) for k in rng.integers(-max_degree, max_degree + 1, size=dimension))
        num = int(rng.integers(-max_coeff, max_coeff + 1))
        den = int(rng.integers(1, 4))
        terms[e] = terms.get(e, 0) + Fraction(num, den)
    return LaurentPoly(dimension, terms)


def polynomial_ring(dimension):
    """sympy ring QQ[u0, ..., u{d-1}] used for factorisation and determinants."""
    R, *_ = ring(",".join(f"u{i}" for i in range(dimension)), QQ)
    return R


def to_ring_element(P, R):
    """Convert a polynomial with nonnegative exponents into an element of R."""
    return R.from_dict({e: QQ(c.numerator, c.denominator) for e, c in P.items()})


def from_ring_element(p, dimension):
    return LaurentPoly(
        dimension,
        {tuple(m): Fraction(int(c.numerator), int(c.denominator)) for m, c in p.terms()},
    )


def lowest_exponent(P):
    """Componentwise minimum exponent; z^-lowest P is a polynomial."""
    return tuple(min(e[axis] for e in P.terms) for axis in range(P.dimension))

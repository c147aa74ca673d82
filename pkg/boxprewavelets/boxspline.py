import functools
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import integrate
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from .laurent import LaurentPoly
from .utils import EigenproblemError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirectionMatrix:
    """The d x l integer matrix Xi whose columns are the box spline directions.

    Args:
        rows (tuple of tuple of int): Matrix rows, one per variable.
    """

    rows: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows or not rows[0]:
            raise ValueError("Direction matrix must be nonempty.")
        if any(len(row) != len(rows[0]) for row in rows):
            raise ValueError(f"Ragged direction matrix: {rows}.")
        if self.length < self.dimension:
            raise ValueError(
                f"Direction matrix has {self.length} columns, fewer than its dimension {self.dimension}."
            )
        if any(not any(col) for col in self.columns):
            raise ValueError(f"Direction matrix {rows} has a zero column.")
        if DomainMatrix.from_list([list(r) for r in rows], QQ).rank() != self.dimension:
            raise ValueError(f"Direction matrix {rows} does not have full rank.")

    @classmethod
    def from_columns(cls, columns):
        columns = [tuple(c) for c in columns]
        return cls(tuple(zip(*columns)))

    @classmethod
    def parse(cls, text):
        """Parse rows separated by ';' with whitespace separated entries, e.g. "1 0 1;0 1 1"."""
        try:
            rows = [
                tuple(int(v) for v in chunk.replace(",", " ").split())
                for chunk in str(text).split(";")
                if chunk.strip()
            ]
        except ValueError:
            raise ValueError(f"Invalid direction matrix: '{text}'.")
        return cls(tuple(rows))

    @property
    def dimension(self):
        return len(self.rows)

    @property
    def length(self):
        return len(self.rows[0])

    @property
    def columns(self):
        return tuple(zip(*self.rows))

    def doubled(self):
        """Xi u Xi: every direction taken twice."""
        return DirectionMatrix(tuple(row + row for row in self.rows))

    def __str__(self):
        return ";".join(" ".join(str(v) for v in row) for row in self.rows)


@dataclass(frozen=True)
class Preset:
    name: str
    matrix: DirectionMatrix
    description: str
    pivot: Optional[Tuple[int, ...]] = None
    # published normalisation when it differs from the smallest integer
    scale: Optional[int] = None


PRESETS = {
    "courant2d": Preset(
        "courant2d",
        DirectionMatrix(((1, 0, 1), (0, 1, 1))),
        "piecewise linear (Courant) element on the three-direction mesh",
        pivot=(1, 1),
    ),
    "cubic_c1_2d": Preset(
        "cubic_c1_2d",
        DirectionMatrix(((1, 1, 0, 0, 1), (0, 0, 1, 1, 1))),
        "C1 piecewise cubic box spline",
        pivot=(0, 0),
    ),
    "quartic_c2_2d": Preset(
        "quartic_c2_2d",
        DirectionMatrix(((1, 1, 0, 0, 1, 1), (0, 0, 1, 1, 1, 1))),
        "C2 piecewise quartic box spline",
        pivot=(0, 0),
        scale=2**6 * 362880,
    ),
    "linear3d": Preset(
        "linear3d",
        DirectionMatrix(((1, 0, 0, 1), (0, 1, 0, 1), (0, 0, 1, 1))),
        "trivariate piecewise linear box spline",
        pivot=(1, 1, 1),
    ),
}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"Invalid preset: '{name}'. Choose from {', '.join(sorted(PRESETS))}."
        )


def _integer_det(columns):
    return int(DomainMatrix.from_list([list(r) for r in zip(*columns)], ZZ).det())


def is_unimodular(matrix):
    """True iff every nonsingular d x d column submatrix has determinant +-1."""
    d = matrix.dimension
    for subset in itertools.combinations(matrix.columns, d):
        if abs(_integer_det(subset)) > 1:
            return False
    return True


def mask_H(matrix):
    """Refinement mask 2^-l prod_j (1 + z^xi_j)."""
    d = matrix.dimension
    H = LaurentPoly.constant(1, d)
    for col in matrix.columns:
        H = H * LaurentPoly(d, {(0,) * d: Fraction(1, 2), col: Fraction(1, 2)})
    return H


def center_shift(matrix):
    return tuple(sum(row) for row in matrix.rows)


def _bounding_box(matrix):
    lo = tuple(sum(min(0, v) for v in row) for row in matrix.rows)
    hi = tuple(sum(max(0, v) for v in row) for row in matrix.rows)
    return lo, hi


def integer_values(matrix):
    """Values of the doubled box spline M_{Xi u Xi} at integer points.

    The values form the eigenvector for eigenvalue 1 of the transition operator
    (Tv)(j) = sum_m a_m v(2j - m), a = 2^d mask_H(Xi u Xi), on the integer points
    of the support's bounding box; normalised so they sum to 1.

    Returns:
        dict mapping integer points to Fractions, zeros omitted.
    """
    d = matrix.dimension
    doubled = matrix.doubled()
    a = mask_H(doubled).scale(2**d)
    lo, hi = _bounding_box(doubled)
    points = list(itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))))
    index = {p: n for n, p in enumerate(points)}
    logger.debug(f"Transition operator on {len(points)} integer points.")

    rows = []
    for j in points:
        row = [Fraction(0)] * len(points)
        for m, coeff in a.items():
            k = tuple(2 * jj - mm for jj, mm in zip(j, m))
            n = index.get(k)
            if n is not None:
                row[n] += coeff
        row[index[j]] -= 1
        rows.append([(c.numerator, c.denominator) for c in row])

    kernel = DomainMatrix.from_list(rows, QQ).nullspace()
    if kernel.shape[0] != 1:
        raise EigenproblemError(
            f"Eigenvalue 1 of the transition operator has multiplicity {kernel.shape[0]}, expected 1."
        )
    vector = [Fraction(int(v.numerator), int(v.denominator)) for v in kernel.to_list()[0]]
    total = sum(vector)
    if total == 0:
        raise EigenproblemError("Refinement eigenvector sums to zero.")
    return {p: v / total for p, v in zip(points, vector) if v}


def autocorrelation_phi(matrix):
    """Autocorrelation symbol Phi(z) = sum_k M^c_{Xi u Xi}(k) z^k.

    Args:
        matrix (DirectionMatrix): Unimodular direction matrix.

    Returns:
        LaurentPoly with positive rational coefficients and Phi(1) = 1.
    """
    if not is_unimodular(matrix):
        raise ValueError(f"Direction matrix '{matrix}' is not unimodular.")
    doubled_center = center_shift(matrix.doubled())
    assert all(c % 2 == 0 for c in doubled_center)
    half = tuple(c // 2 for c in doubled_center)
    values = integer_values(matrix)
    return LaurentPoly(
        matrix.dimension,
        {tuple(k - h for k, h in zip(p, half)): v for p, v in values.items()},
    )


def symmetry_check(matrix):
    """True iff every permutation of the variables maps the set of columns onto itself.

    This is what makes H and Phi invariant under permuting variables.
    """
    columns = sorted(matrix.columns)
    for perm in itertools.permutations(range(matrix.dimension)):
        permuted = sorted(tuple(col[perm[i]] for i in range(matrix.dimension)) for col in columns)
        if permuted != columns:
            return False
    return True


def numeric_box_spline_eval(matrix, x):
    """Evaluate M_Xi(x) with the de Boor recurrence.

    (l - d) M_Xi(x) = sum_xi t_xi M_{Xi\\xi}(x) + (1 - t_xi) M_{Xi\\xi}(x - xi)
    for any t with Xi t = x. Subsets that no longer span R^d give measures
    supported on hyperplanes and are dropped, so values on knot planes are not
    reliable.
    """
    columns = [np.array(c, dtype=np.float64) for c in matrix.columns]
    d = matrix.dimension
    x = np.asarray(x, dtype=np.float64).reshape(d)

    @functools.lru_cache(maxsize=None)
    def spans(active):
        return np.linalg.matrix_rank(np.stack([columns[i] for i in active], axis=1)) == d

    @functools.lru_cache(maxsize=None)
    def evaluate(active, offset):
        point = x - np.array(offset, dtype=np.float64)
        sub = np.stack([columns[i] for i in active], axis=1)
        lo = np.minimum(sub, 0).sum(axis=1)
        hi = np.maximum(sub, 0).sum(axis=1)
        if np.any(point < lo) or np.any(point >= hi):
            return 0.0
        if len(active) == d:
            t = np.linalg.solve(sub, point)
            if np.all(t >= 0) and np.all(t < 1):
                return 1.0 / abs(np.linalg.det(sub))
            return 0.0
        t = np.linalg.lstsq(sub, point, rcond=None)[0]
        total = 0.0
        for pos, i in enumerate(active):
            rest = active[:pos] + active[pos + 1 :]
            if not spans(rest):
                continue
            shifted = tuple(int(o + c) for o, c in zip(offset, matrix.columns[i]))
            total += t[pos] * evaluate(rest, offset) + (1 - t[pos]) * evaluate(rest, shifted)
        return total / (len(active) - d)

    return evaluate(tuple(range(matrix.length)), (0,) * d)


def autocorrelation_quadrature(matrix, k):
    """Numeric integral of M(x) M(x + k) for a univariate box spline."""
    if matrix.dimension != 1:
        raise ValueError(f"Quadrature oracle needs d=1, got d={matrix.dimension}.")
    lo, hi = _bounding_box(matrix)
    breakpoints = list(range(lo[0] + 1, hi[0])) or None
    value, _ = integrate.quad(
        lambda t: numeric_box_spline_eval(matrix, [t]) * numeric_box_spline_eval(matrix, [t + k]),
        lo[0],
        hi[0],
        points=breakpoints,
        limit=200,
    )
    return value


def phi_oracle_error(matrix, phi):
    """Largest deviation between Phi and an independent numeric evaluation.

    For d=1 the autocorrelation integrals are computed by quadrature; otherwise
    the doubled box spline is evaluated with the de Boor recurrence at the
    integer points, nudged off the knot planes (it is continuous there).
    """
    d = matrix.dimension
    if d == 1:
        lo, hi = _bounding_box(matrix)
        width = hi[0] - lo[0]
        return max(
            abs(autocorrelation_quadrature(matrix, k) - float(phi.coefficient((k,))))
            for k in range(-width, width + 1)
        )
    doubled = matrix.doubled()
    half = np.array([c // 2 for c in center_shift(doubled)], dtype=np.float64)
    nudge = 1e-10 * np.sqrt(np.arange(2, d + 2, dtype=np.float64))
    lo, hi = _bounding_box(doubled)
    error = 0.0
    for p in itertools.product(*(range(l, h + 1) for l, h in zip(lo, hi))):
        k = tuple(int(v) for v in np.array(p) - half)
        value = numeric_box_spline_eval(doubled, np.array(p, dtype=np.float64) + nudge)
        error = max(error, abs(value - float(phi.coefficient(k))))
    return error

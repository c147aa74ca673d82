import dataclasses
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Optional, Tuple

from sympy.polys.matrices import DomainMatrix

from .boxspline import (
    DirectionMatrix,
    autocorrelation_phi,
    get_preset,
    mask_H,
    symmetry_check,
)
from .certify import TorusCertificate, TorusCertifier
from .laurent import (
    CosetIndex,
    LaurentPoly,
    bracket_product,
    conjugate,
    coset_indices,
    decompose,
    default_representatives,
    evaluate_at_ones,
    format_index,
    from_ring_element,
    halve_exponents,
    lowest_exponent,
    permute_index,
    permute_vars,
    polynomial_ring,
    rho_D,
    substitute_squares,
    support_size,
    tau_D,
    to_ring_element,
)
from .utils import InconclusiveCertificate, VerificationError, lcm_of_denominators

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrewaveletFamily:
    """Refinement mask H, autocorrelation symbol Phi and the 2^d - 1 prewavelet masks.

    Masks are keyed by their coset index s in E \\ {0}. ``pivot`` is None for
    families that did not come from a pivot component (the V_alpha pathway).
    """

    H: LaurentPoly
    phi: LaurentPoly
    scale: int
    U: LaurentPoly
    masks: Mapping[CosetIndex, LaurentPoly]
    pivot: Optional[CosetIndex] = None
    directions: Optional[DirectionMatrix] = None
    pivot_certificate: Optional[TorusCertificate] = None
    basis_certificate: Optional[TorusCertificate] = None

    def __post_init__(self):
        object.__setattr__(self, "masks", MappingProxyType(dict(sorted(self.masks.items()))))

    @property
    def dimension(self):
        return self.H.dimension

    @property
    def supports(self):
        return {s: support_size(P) for s, P in self.masks.items()}

    @property
    def N(self):
        return sum(self.supports.values())

    def mask_name(self, s):
        return f"H_{format_index(s)}"


@dataclass(frozen=True)
class ValphaConstruction:
    alpha: Fraction
    V: LaurentPoly
    D: LaurentPoly
    d0: LaurentPoly
    d0_certificate: TorusCertificate
    family: PrewaveletFamily
    halvings: int = 0

    @property
    def masks(self):
        return self.family.masks


@dataclass(frozen=True)
class OrthogonalityReport:
    """Residuals <H, H_s>_Phi and (2^d / c) rho_U(H_s) for every mask."""

    brackets: Mapping[CosetIndex, LaurentPoly]
    projections: Mapping[CosetIndex, LaurentPoly]

    @property
    def failures(self):
        return [
            s
            for s in self.brackets
            if self.brackets[s] or self.projections[s]
        ]

    @property
    def ok(self):
        return not self.failures

    def raise_for_failures(self):
        failures = self.failures
        if failures:
            s = failures[0]
            raise VerificationError(
                f"Mask H_{format_index(s)} is not orthogonal to H: residual {self.brackets[s]}.",
                index=s,
                residual=self.brackets[s],
            )


@dataclass(frozen=True)
class SymmetryReport:
    orbits: Tuple[Tuple[CosetIndex, ...], ...] = ()
    verified: bool = False
    skipped: Optional[str] = None

    @property
    def representatives(self):
        return tuple(orbit[0] for orbit in self.orbits)


def scaled_U(H, phi, scale=None):
    """Scale c and U = c H Phi.

    Args:
        H (LaurentPoly): Refinement mask.
        phi (LaurentPoly): Autocorrelation symbol.
        scale (int, optional): Use this c instead of the smallest integer making
            every coefficient of c H Phi integral. Default: None

    Returns:
        (c, U)
    """
    if not H or not phi:
        raise ValueError("H and Phi must be nonzero.")
    product = H * phi
    if scale is None:
        scale = lcm_of_denominators(product.terms.values())
    elif scale <= 0 or any((c * scale).denominator != 1 for c in product.terms.values()):
        raise ValueError(f"Invalid scale {scale}: c H Phi must have integer coefficients.")
    return int(scale), product.scale(scale)


def components_W(U):
    """w_j with conj(U) = sum_j w_j z^-j."""
    return decompose(conjugate(U), default_representatives(U.dimension, negative=True))


def pivot_order(dimension, preference=None):
    ones = (1,) * dimension
    zeros = (0,) * dimension
    order = [ones, zeros] + [j for j in coset_indices(dimension) if j not in (ones, zeros)]
    if preference is not None:
        preference = tuple(preference)
        order.remove(preference)
        order.insert(0, preference)
    return order


def find_pivot(U, preference=None, certifier=None):
    """First coset component u_j of U certified invertible.

    Returns:
        (s0, TorusCertificate)
    """
    certifier = certifier or TorusCertifier()
    components = decompose(U)
    for j in pivot_order(U.dimension, preference):
        u = components[j]
        if not u:
            continue
        try:
            certificate = certifier(u)
        except InconclusiveCertificate:
            logger.info(f"Component u_{format_index(j)} inconclusive.")
            continue
        logger.info(f"Pivot u_{format_index(j)}: {certificate.describe()}.")
        return j, certificate
    raise InconclusiveCertificate("No coset component of U could be certified invertible.")


def masks_from_pivot(U, s0):
    """H_{|r - s0|} = w_r z^s0 - w_s0 z^r for every r != s0."""
    s0 = tuple(s0)
    w = components_W(U)
    masks = {}
    for r in coset_indices(U.dimension):
        if r == s0:
            continue
        index = tuple(abs(a - b) for a, b in zip(r, s0))
        masks[index] = w[r].shift(s0) - w[s0].shift(r)
    return masks


def verify_orthogonality(family):
    d = family.dimension
    brackets = {}
    projections = {}
    for s, mask in family.masks.items():
        brackets[s] = bracket_product(family.H, mask, family.phi)
        projections[s] = rho_D(family.U, mask).scale(Fraction(2**d, family.scale))
    return OrthogonalityReport(MappingProxyType(brackets), MappingProxyType(projections))


def kernel_membership(family):
    """Both projections rho_U(H_s) and tau_U(H_s) vanish for every mask."""
    return all(
        not rho_D(family.U, mask) and not tau_D(family.U, mask) for mask in family.masks.values()
    )


def polyphase_matrix(family):
    """Rows H, H_s of coset components (default representatives), halved into L."""
    d = family.dimension
    rows = [family.H] + [family.masks[s] for s in sorted(family.masks)]
    return [[halve_exponents(decompose(P)[r]) for r in coset_indices(d)] for P in rows]


def basis_determinant(family):
    """Exact det [H_sr] as an element of L_down."""
    d = family.dimension
    size = 2**d
    if len(family.masks) != size - 1:
        raise VerificationError(f"Expected {size - 1} masks, found {len(family.masks)}.")
    matrix = polyphase_matrix(family)
    R = polynomial_ring(d)
    total_shift = [0] * d
    ring_rows = []
    for row in matrix:
        nonzero = [entry for entry in row if entry]
        if not nonzero:
            return LaurentPoly.zero(d)
        low = tuple(min(lowest_exponent(e)[axis] for e in nonzero) for axis in range(d))
        total_shift = [t + k for t, k in zip(total_shift, low)]
        ring_rows.append([to_ring_element(e.shift(tuple(-k for k in low)), R) for e in row])
    det = DomainMatrix(ring_rows, (size, size), R.to_domain()).det()
    det = from_ring_element(R(det), d).shift(tuple(total_shift))
    return substitute_squares(det)


def verify_basis(family, certifier=None):
    """Certify that H and the masks form a basis: det [H_sr] has no torus zeros.

    Returns:
        (det, TorusCertificate)
    """
    certifier = certifier or TorusCertifier()
    det = basis_determinant(family)
    if not det:
        raise VerificationError("det [H_sr] is zero: the masks do not form a basis.")
    logger.info(f"Basis determinant has {len(det)} terms.")
    return det, certifier.certify_factored(det)


def valpha_pathway(
    matrix, phi, alpha_start=1, max_halvings=40, certifier=None, scale=None, verify=True
):
    """Prewavelets from V_alpha = conj(prod_j (alpha + 1 + z^xi_j)).

    alpha is halved until d0 = rho(c H Phi V_alpha) is certified invertible. With
    ``verify`` the resulting masks are checked for orthogonality and certified as
    a basis before returning.
    """
    if matrix.dimension != phi.dimension:
        raise ValueError(
            f"Dimension mismatch: directions {matrix.dimension} vs Phi {phi.dimension}."
        )
    certifier = certifier or TorusCertifier()
    d = matrix.dimension
    zero = (0,) * d
    H = mask_H(matrix)
    c, U = scaled_U(H, phi, scale)
    alpha = Fraction(alpha_start)
    if alpha <= 0:
        raise ValueError(f"Invalid alpha: {alpha_start}.")
    for step in range(max_halvings + 1):
        V = LaurentPoly.constant(1, d)
        for col in matrix.columns:
            V = V * LaurentPoly(d, {zero: alpha + 1, col: 1})
        V = conjugate(V)
        D = U * V
        components = decompose(D)
        d0 = components[zero]
        try:
            certificate = certifier(d0) if d0 else None
        except InconclusiveCertificate:
            certificate = None
        if certificate is None:
            logger.info(f"alpha = {alpha}: d0 inconclusive, halving.")
            alpha /= 2
            continue
        logger.info(f"alpha = {alpha}: d0 certified ({certificate.describe()}).")
        masks = {}
        for j in coset_indices(d):
            if j == zero:
                continue
            Dj = components[j] - d0.shift(tuple(-k for k in j))
            masks[j] = conjugate(V * Dj)
        family = PrewaveletFamily(
            H=H, phi=phi, scale=c, U=U, masks=masks, directions=matrix
        )
        if verify:
            verify_orthogonality(family).raise_for_failures()
            _, basis_certificate = verify_basis(family, certifier)
            family = dataclasses.replace(family, basis_certificate=basis_certificate)
        return ValphaConstruction(alpha, V, D, d0, certificate, family, step)
    raise InconclusiveCertificate(f"d0 not certified after {max_halvings} halvings of alpha.")


def jm_orthogonalize(P, H, phi):
    """<P, H>_Phi H - <H, H>_Phi P, which is orthogonal to H."""
    return bracket_product(P, H, phi) * H - bracket_product(H, H, phi) * P


def jm_family(H, phi):
    """Masks obtained by orthogonalizing the monomials z^s against H."""
    d = H.dimension
    return {
        s: jm_orthogonalize(LaurentPoly.monomial(s), H, phi)
        for s in coset_indices(d)
        if any(s)
    }


def polyphase_check(H, certifier=None):
    """Certify that the coset components of H have no common zero on the torus."""
    certifier = certifier or TorusCertifier()
    components = decompose(H)
    energy = LaurentPoly.zero(H.dimension)
    for part in components.components.values():
        energy = energy + part * conjugate(part)
    return certifier(energy)


def vanishing_moments(family):
    """H_s(1, ..., 1) for every mask; all zero for a valid family."""
    return {s: evaluate_at_ones(P) for s, P in family.masks.items()}


def support_stats(family):
    supports = family.supports
    return supports, sum(supports.values())


def _symmetric_inputs(family):
    if family.directions is not None:
        return symmetry_check(family.directions)
    d = family.dimension
    return all(
        permute_vars(family.H, sigma) == family.H and permute_vars(family.phi, sigma) == family.phi
        for sigma in itertools.permutations(range(d))
    )


def symmetry_orbits(family, s0=None):
    """Group the masks into orbits of variable permutations.

    Orbits collect indices with the same number of ones; every relation
    sigma(H_i) = H_{sigma i} is checked exactly.
    """
    d = family.dimension
    s0 = family.pivot if s0 is None else tuple(s0)
    if s0 not in ((0,) * d, (1,) * d):
        return SymmetryReport(skipped=f"pivot {s0} is neither 0 nor 1")
    if not _symmetric_inputs(family):
        return SymmetryReport(skipped="H and Phi are not invariant under variable permutations")
    groups = {}
    for s in family.masks:
        groups.setdefault(sum(s), []).append(s)
    orbits = tuple(tuple(groups[k]) for k in sorted(groups))
    verified = all(
        permute_vars(mask, sigma) == family.masks[permute_index(s, sigma)]
        for sigma in itertools.permutations(range(d))
        for s, mask in family.masks.items()
    )
    return SymmetryReport(orbits=orbits, verified=verified)


class PrewaveletConstruction:
    """Box spline prewavelets from a direction matrix.

    Computes H, Phi and U = c H Phi, picks a certified pivot component and forms the
    masks; when no pivot certifies it falls back to the V_alpha pathway.

    Args:
        pivot (tuple, optional): Preferred pivot index. Default: None
        scale (int, optional): Scale c instead of the smallest integer. Default: None
        start_resolution (int, optional): First certifier grid size. Default: 64
        max_resolution (int, optional): Certifier grid cap. Default: None (per dimension)
        alpha (Fraction, optional): Starting alpha for the fallback. Default: 1
        max_halvings (int, optional): Cap on alpha halvings. Default: 40
        verify (bool, optional): Check orthogonality and certify the basis. Default: True
    """

    def __init__(
        self,
        pivot=None,
        scale=None,
        start_resolution=64,
        max_resolution=None,
        alpha=1,
        max_halvings=40,
        verify=True,
    ):
        self.pivot = tuple(pivot) if pivot is not None else None
        self.scale = scale
        self.certifier = TorusCertifier(start_resolution, max_resolution)
        self.alpha = Fraction(alpha)
        self.max_halvings = max_halvings
        self.verify = verify

    @classmethod
    def for_preset(cls, name, **kwargs):
        preset = get_preset(name)
        kwargs.setdefault("pivot", preset.pivot)
        kwargs.setdefault("scale", preset.scale)
        return cls(**kwargs)

    def __call__(self, matrix):
        H = mask_H(matrix)
        phi = autocorrelation_phi(matrix)
        c, U = scaled_U(H, phi, self.scale)
        logger.info(f"Scale c = {c}, U has {len(U)} terms.")
        try:
            s0, pivot_certificate = find_pivot(U, self.pivot, self.certifier)
        except InconclusiveCertificate:
            logger.warning("No pivot certified, falling back to the V_alpha pathway.")
            family = valpha_pathway(
                matrix,
                phi,
                self.alpha,
                self.max_halvings,
                self.certifier,
                self.scale,
                verify=False,
            ).family
        else:
            family = PrewaveletFamily(
                H=H,
                phi=phi,
                scale=c,
                U=U,
                masks=masks_from_pivot(U, s0),
                pivot=s0,
                directions=matrix,
                pivot_certificate=pivot_certificate,
            )
        if not self.verify:
            return family
        verify_orthogonality(family).raise_for_failures()
        _, basis_certificate = verify_basis(family, self.certifier)
        return dataclasses.replace(family, basis_certificate=basis_certificate)

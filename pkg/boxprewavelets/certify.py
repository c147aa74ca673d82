import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Any, Mapping, Optional

import numpy as np
import torch
from scipy import optimize

from .laurent import (
    Exponent,
    LaurentPoly,
    conjugate,
    eval_numeric,
    from_ring_element,
    halve_exponents,
    is_downarrow,
    lowest_exponent,
    polynomial_ring,
    to_arrays,
    to_ring_element,
)
from .utils import InconclusiveCertificate

logger = logging.getLogger(__name__)

# rational upper bound for pi
PI_UPPER = Fraction(355, 113)
UNIT_ROUNDOFF = Fraction(1, 2**53)
FFT_ERROR_FACTOR = 8

DEFAULT_MAX_RESOLUTION = {1: 4096, 2: 1024, 3: 256}


class CertificateKind(str, enum.Enum):
    DOMINANCE = "Dominance"
    REAL_LOWER_BOUND = "RealLowerBound"
    GRID_LIPSCHITZ = "GridLipschitz"
    PRODUCT = "Product"


@dataclass(frozen=True)
class TorusCertificate:
    """Replayable proof that a Laurent polynomial has no zeros on the torus.

    Args:
        kind (CertificateKind): How the bound was obtained.
        pivot (tuple): Monomial z^pivot factored out before bounding.
        lower_bound (Fraction): Positive lower bound for |P| on the torus.
        metadata (Mapping): Kind specific data needed to replay the bound.
    """

    kind: CertificateKind
    pivot: Exponent
    lower_bound: Fraction
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.lower_bound <= 0:
            raise ValueError(f"Invalid certificate lower bound: {self.lower_bound}.")
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    def describe(self):
        bound = self.lower_bound
        if bound.denominator == 1 or self.kind == CertificateKind.DOMINANCE:
            shown = str(bound)
        else:
            shown = f"{float(bound):.6g}"
        extra = ""
        if "resolution" in self.metadata:
            extra = f", grid {self.metadata['resolution']}"
        elif self.kind == CertificateKind.PRODUCT:
            extra = f", {len(self.metadata['factors'])} factors"
        return f"{self.kind.value}, lower bound {shown}{extra}"


def _require_nonzero(P):
    if not P:
        raise ValueError("Cannot certify the zero polynomial.")


def reduce_parity(P):
    """Halve exponents while all of them are even.

    z -> z^2 maps the torus onto itself, so P and the reduced polynomial have the
    same range there.

    Returns:
        (reduced polynomial, number of halvings)
    """
    halvings = 0
    while is_downarrow(P) and any(any(e) for e in P.terms):
        P = halve_exponents(P)
        halvings += 1
    return P, halvings


def _unreduce(exponent, halvings):
    return tuple(k * 2**halvings for k in exponent)


def dominance_certificate(P) -> Optional[TorusCertificate]:
    """Certify P by a dominant term: |c_e| > sum of the other |coefficients|.

    Returns:
        TorusCertificate of kind Dominance, or None.
    """
    _require_nonzero(P)
    Q, halvings = reduce_parity(P)
    pivot, dominant = max(Q.items(), key=lambda t: abs(t[1]))
    residual = sum((abs(c) for e, c in Q.items() if e != pivot), Fraction(0))
    bound = abs(dominant) - residual
    if bound <= 0:
        return None
    return TorusCertificate(
        CertificateKind.DOMINANCE,
        _unreduce(pivot, halvings),
        bound,
        {"dominant": dominant, "residual": residual, "halvings": halvings},
    )


def is_conjugate_symmetric(P):
    return conjugate(P) == P


def symmetric_shift(P) -> Optional[Exponent]:
    """Exponent e with z^-e P conjugate-symmetric, if there is one."""
    if not P:
        return None
    exponents = list(P.terms)
    e = []
    for axis in range(P.dimension):
        lo = min(k[axis] for k in exponents)
        hi = max(k[axis] for k in exponents)
        if (lo + hi) % 2:
            return None
        e.append((lo + hi) // 2)
    e = tuple(e)
    if is_conjugate_symmetric(P.shift(tuple(-k for k in e))):
        return e
    return None


def lipschitz_constant(P):
    """L = sum_k |a_k| ||k||_1, a bound for |P(t) - P(s)| / ||t - s||_inf."""
    return sum((abs(c) * sum(abs(k) for k in e) for e, c in P.items()), Fraction(0))


def grid_values(P, resolution):
    """P at theta = 2 pi m / n for m in the half grid covered by rfftn.

    With z = exp(-i theta), P(theta_m) = sum_k a_k exp(-2 pi i k.m / n), which is
    the DFT of the coefficients wrapped modulo n. Real coefficients give
    P(-theta) = conj(P(theta)), so the half spectrum holds every value of |P|
    and of Re P.
    """
    n = int(resolution)
    exponents, coeffs = to_arrays(P)
    array = np.zeros((n,) * P.dimension, dtype=np.float64)
    np.add.at(array, tuple((exponents % n).T), coeffs)
    return torch.fft.rfftn(torch.from_numpy(array))


def rounding_slack(P, resolution):
    """A priori bound on the floating point error of every grid value."""
    size = int(resolution) ** P.dimension
    levels = max(1, (size - 1).bit_length())
    root = math.isqrt(size) + 1
    total = sum((abs(c) for c in P.terms.values()), Fraction(0))
    return (FFT_ERROR_FACTOR * levels * root + 8) * UNIT_ROUNDOFF * total


def grid_lipschitz_bound(P, resolution) -> Optional[TorusCertificate]:
    """Certify P from its values on a uniform grid plus a Lipschitz bound.

    The certified quantity is Re(z^-e P) (with its sign fixed) when a shift e
    makes z^-e P conjugate-symmetric and |P| otherwise. The bound is

        min over grid - rounding slack - L * pi / n

    assembled in exact rational arithmetic.

    Args:
        P (LaurentPoly): Nonzero polynomial.
        resolution (int): Grid points per axis, at least 2.

    Returns:
        TorusCertificate of kind RealLowerBound or GridLipschitz, or None.
    """
    _require_nonzero(P)
    if resolution < 2:
        raise ValueError(f"Invalid grid resolution: {resolution}.")
    Q, halvings = reduce_parity(P)
    shift = symmetric_shift(Q)
    if shift is not None:
        target = Q.shift(tuple(-k for k in shift))
        values = grid_values(target, resolution).real
        sign = 1 if float(values.flatten()[0]) >= 0 else -1
        grid_min = float((sign * values).min())
        kind = CertificateKind.REAL_LOWER_BOUND
    else:
        target = Q
        values = grid_values(target, resolution).abs()
        sign = 1
        grid_min = float(values.min())
        kind = CertificateKind.GRID_LIPSCHITZ
        shift = (0,) * P.dimension

    lipschitz = lipschitz_constant(target)
    slack = rounding_slack(target, resolution)
    bound = Fraction(grid_min) - slack - lipschitz * PI_UPPER / resolution
    logger.debug(
        f"Grid {resolution}: min {grid_min:.6g}, Lipschitz {float(lipschitz):.6g}, bound {float(bound):.6g}."
    )
    if bound <= 0:
        return None
    return TorusCertificate(
        kind,
        _unreduce(shift, halvings),
        bound,
        {
            "resolution": int(resolution),
            "lipschitz": lipschitz,
            "grid_min": Fraction(grid_min),
            "slack": slack,
            "sign": sign,
            "halvings": halvings,
        },
    )


def product_certificate(P, content, factors, halvings):
    """Combine factor certificates into one for their product.

    Args:
        P (LaurentPoly): The certified polynomial.
        content (Fraction): Constant factor.
        factors (list): (factor polynomial, multiplicity, certificate) triples,
            with content * prod f^k equal to the parity reduced P up to a monomial.
        halvings (int): Parity reductions applied to P.
    """
    bound = abs(Fraction(content))
    for _, multiplicity, certificate in factors:
        bound *= certificate.lower_bound**multiplicity
    return TorusCertificate(
        CertificateKind.PRODUCT,
        (0,) * P.dimension,
        bound,
        {"content": Fraction(content), "factors": tuple(factors), "halvings": halvings},
    )


class TorusCertifier:
    """Search for a torus nonvanishing certificate.

    Tries the dominance bound, then grid scans at resolutions start, 2*start, ...
    up to the cap.

    Args:
        start_resolution (int, optional): First grid size per axis. Default: 64
        max_resolution (int, optional): Largest grid size per axis. Default: 4096 for
            d=1, 1024 for d=2, 256 for d=3, 64 otherwise.
    """

    def __init__(self, start_resolution=64, max_resolution=None):
        if start_resolution < 2:
            raise ValueError(f"Invalid start resolution: {start_resolution}.")
        self.start_resolution = int(start_resolution)
        self.max_resolution = max_resolution

    def resolution_cap(self, dimension):
        if self.max_resolution is not None:
            return int(self.max_resolution)
        return DEFAULT_MAX_RESOLUTION.get(dimension, 64)

    def __call__(self, P):
        _require_nonzero(P)
        certificate = dominance_certificate(P)
        if certificate is not None:
            return certificate
        cap = self.resolution_cap(P.dimension)
        resolution = self.start_resolution
        while resolution <= cap:
            certificate = grid_lipschitz_bound(P, resolution)
            if certificate is not None:
                return certificate
            resolution *= 2
        raise InconclusiveCertificate(
            f"No torus certificate for a {len(P)}-term polynomial up to grid {cap}."
        )

    def certify_factored(self, P):
        """Certify P through its square-free factorisation.

        Each square-free part is certified on its own; parts that stay
        inconclusive are split into irreducible factors.
        """
        _require_nonzero(P)
        certificate = dominance_certificate(P)
        if certificate is not None:
            return certificate
        Q, halvings = reduce_parity(P)
        d = Q.dimension
        R = polynomial_ring(d)
        shifted = Q.shift(tuple(-k for k in lowest_exponent(Q)))
        content, parts = to_ring_element(shifted, R).sqf_list()
        content = Fraction(int(content.numerator), int(content.denominator))
        logger.info(f"Square-free factorisation: {len(parts)} parts.")
        factors = []
        for part, multiplicity in parts:
            F = from_ring_element(part, d)
            try:
                factors.append((F, multiplicity, self(F)))
                continue
            except InconclusiveCertificate:
                logger.info(f"Part of {len(F)} terms inconclusive, factoring it.")
            coeff, irreducibles = part.factor_list()
            content *= Fraction(int(coeff.numerator), int(coeff.denominator)) ** multiplicity
            for g, k in irreducibles:
                G = from_ring_element(g, d)
                factors.append((G, multiplicity * k, self(G)))
        return product_certificate(P, content, factors, halvings)


def certify_invertible(P, start_resolution=64, max_resolution=None):
    """Certificate that P has no zeros on the torus; raises InconclusiveCertificate."""
    return TorusCertifier(start_resolution, max_resolution)(P)


def check_certificate(P, certificate):
    """Replay a certificate against P.

    Returns:
        bool: True when the recorded bound follows from P.
    """
    kind = certificate.kind
    meta = certificate.metadata
    if kind == CertificateKind.DOMINANCE:
        Q, halvings = reduce_parity(P)
        if halvings != meta["halvings"]:
            return False
        pivot = tuple(k // 2**halvings for k in certificate.pivot)
        dominant = Q.coefficient(pivot)
        residual = sum((abs(c) for e, c in Q.items() if e != pivot), Fraction(0))
        return abs(dominant) - residual == certificate.lower_bound
    if kind in (CertificateKind.REAL_LOWER_BOUND, CertificateKind.GRID_LIPSCHITZ):
        replay = grid_lipschitz_bound(P, meta["resolution"])
        return (
            replay is not None
            and replay.kind == kind
            and replay.lower_bound >= certificate.lower_bound
        )
    if kind == CertificateKind.PRODUCT:
        Q, halvings = reduce_parity(P)
        product = LaurentPoly.constant(meta["content"], P.dimension)
        bound = abs(meta["content"])
        for F, multiplicity, factor_certificate in meta["factors"]:
            if not check_certificate(F, factor_certificate):
                return False
            product = product * F**multiplicity
            bound *= factor_certificate.lower_bound**multiplicity
        shifted = Q.shift(tuple(-k for k in lowest_exponent(Q)))
        return product == shifted and bound == certificate.lower_bound
    raise ValueError(f"Invalid certificate kind: '{kind}'.")


def estimate_minimum(P, resolution=64):
    """Non-rigorous estimate of min |P| on the torus.

    Starts from the smallest grid value and refines it with a local optimiser.
    Used for reporting and sanity checks, never as a certificate.

    Returns:
        (minimum, angles)
    """
    _require_nonzero(P)
    n = int(resolution)
    values = grid_values(P, n).abs().numpy()
    m = np.array(np.unravel_index(int(np.argmin(values)), values.shape), dtype=np.float64)
    start = 2 * np.pi * m / n
    result = optimize.minimize(
        lambda theta: abs(eval_numeric(P, theta)),
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-12},
    )
    return float(result.fun), np.mod(result.x, 2 * np.pi)

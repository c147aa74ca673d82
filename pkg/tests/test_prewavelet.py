import dataclasses
from fractions import Fraction

import pytest

from presets import ALL_PRESETS, FAST_PRESETS, preset_params
from boxprewavelets.boxspline import (
    DirectionMatrix,
    autocorrelation_phi,
    get_preset,
    mask_H,
)
from boxprewavelets.certify import CertificateKind, TorusCertifier, check_certificate
from boxprewavelets.laurent import (
    LaurentPoly,
    bracket_product,
    random_poly,
    rho_D,
    tau_D,
)
from boxprewavelets.prewavelet import (
    PrewaveletConstruction,
    PrewaveletFamily,
    basis_determinant,
    components_W,
    find_pivot,
    jm_family,
    jm_orthogonalize,
    kernel_membership,
    masks_from_pivot,
    pivot_order,
    polyphase_check,
    scaled_U,
    symmetry_orbits,
    valpha_pathway,
    vanishing_moments,
    verify_basis,
    verify_orthogonality,
)
from boxprewavelets.utils import VerificationError


def xy(terms):
    return LaurentPoly(2, terms)


# H_{1,1} for the Courant element as printed with its table
COURANT_H11 = xy(
    {
        (2, 2): -1,
        (2, 0): -1,
        (1, 1): 10,
        (0, 2): -1,
        (1, -1): 2,
        (0, 0): -18,
        (-1, 1): 2,
        (0, -2): -1,
        (-1, -1): 10,
        (-2, 0): -1,
        (-2, -2): -1,
    }
)

EXPECTED_SUPPORTS = {
    "courant2d": {(0, 1): 11, (1, 0): 11, (1, 1): 11},
    "cubic_c1_2d": {(0, 1): 29, (1, 0): 29, (1, 1): 28},
    "quartic_c2_2d": {(0, 1): 43, (1, 0): 43, (1, 1): 43},
    "linear3d": {
        (0, 0, 1): 23,
        (0, 1, 0): 23,
        (0, 1, 1): 21,
        (1, 0, 0): 23,
        (1, 0, 1): 21,
        (1, 1, 0): 21,
        (1, 1, 1): 23,
    },
}

EXPECTED_N = {"courant2d": 33, "cubic_c1_2d": 86, "quartic_c2_2d": 129, "linear3d": 155}


def test_scaled_U_courant():
    matrix = get_preset("courant2d").matrix
    c, U = scaled_U(mask_H(matrix), autocorrelation_phi(matrix))
    assert c == 96
    assert all(v.denominator == 1 for v in U.terms.values())


def test_scaled_U_rejects_bad_scale():
    matrix = get_preset("courant2d").matrix
    with pytest.raises(ValueError):
        scaled_U(mask_H(matrix), autocorrelation_phi(matrix), scale=7)


def test_quartic_smallest_scale_is_half_the_published_one():
    matrix = get_preset("quartic_c2_2d").matrix
    c, _ = scaled_U(mask_H(matrix), autocorrelation_phi(matrix))
    assert c == 2**5 * 362880
    assert get_preset("quartic_c2_2d").scale == 2 * c


def test_courant_components():
    matrix = get_preset("courant2d").matrix
    _, U = scaled_U(mask_H(matrix), autocorrelation_phi(matrix))
    w = components_W(U)
    assert w[(0, 0)] == xy({(0, 0): 10, (0, -2): 2, (-2, 0): 2, (-2, -2): 10})
    assert w[(1, 1)] == xy(
        {(2, 2): 1, (2, 0): 1, (0, 2): 1, (0, 0): 18, (0, -2): 1, (-2, 0): 1, (-2, -2): 1}
    )


def test_pivot_order():
    assert pivot_order(2) == [(1, 1), (0, 0), (0, 1), (1, 0)]
    assert pivot_order(2, (0, 1))[0] == (0, 1)
    assert pivot_order(3)[:2] == [(1, 1, 1), (0, 0, 0)]


def test_find_pivot_courant_without_preference():
    matrix = get_preset("courant2d").matrix
    _, U = scaled_U(mask_H(matrix), autocorrelation_phi(matrix))
    s0, certificate = find_pivot(U)
    assert s0 == (1, 1)
    assert certificate.kind == CertificateKind.DOMINANCE
    assert certificate.lower_bound == 12


def test_find_pivot_linear3d():
    matrix = get_preset("linear3d").matrix
    _, U = scaled_U(mask_H(matrix), autocorrelation_phi(matrix))
    s0, certificate = find_pivot(U)
    assert s0 == (1, 1, 1)
    assert certificate.lower_bound == 48


def test_courant_masks_match_published():
    matrix = get_preset("courant2d").matrix
    _, U = scaled_U(mask_H(matrix), autocorrelation_phi(matrix))
    masks = masks_from_pivot(U, (1, 1))
    assert masks[(1, 1)] == COURANT_H11
    assert masks[(1, 0)].coefficient((1, 3)) == 2
    assert masks[(0, 1)].coefficient((1, 0)) == -18
    assert masks[(0, 1)].coefficient((0, 0)) == 0
    assert masks[(0, 1)].coefficient((1, 1)) == 10


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_supports(name, preset_family):
    family = preset_family(name)
    assert family.supports == EXPECTED_SUPPORTS[name]
    assert family.N == EXPECTED_N[name]
    assert family.pivot == get_preset(name).pivot


def test_cubic_entries(preset_family):
    family = preset_family("cubic_c1_2d")
    H10 = family.masks[(1, 0)]
    assert H10.coefficient((0, 0)) == 18425
    assert H10.coefficient((-1, -2)) == -35193
    assert H10.coefficient((0, -2)) == 30692
    assert H10.coefficient((3, -2)) == -33
    assert H10.coefficient((2, -2)) == 1677
    assert H10.coefficient((-4, -2)) == 110
    assert family.masks[(1, 1)].coefficient((0, 0)) == 35193


@pytest.mark.slow
def test_quartic_entries(preset_family):
    family = preset_family("quartic_c2_2d")
    assert family.scale == 2**6 * 362880
    H10 = family.masks[(1, 0)]
    assert H10.coefficient((0, 0)) == 811088
    assert H10.coefficient((0, -2)) == 1677952
    assert H10.coefficient((-1, -2)) == -2380248
    assert family.masks[(1, 1)].coefficient((0, 0)) == 1677952


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_orthogonality(name, preset_family):
    family = preset_family(name)
    report = verify_orthogonality(family)
    assert report.ok
    for s in family.masks:
        assert not report.brackets[s]
        assert not report.projections[s]
    assert kernel_membership(family)


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_vanishing_moments(name, preset_family):
    assert all(v == 0 for v in vanishing_moments(preset_family(name)).values())


def test_orthogonality_failure_reported(preset_family):
    family = preset_family("courant2d")
    broken = dict(family.masks)
    broken[(1, 1)] = broken[(1, 1)] + LaurentPoly.constant(1, 2)
    report = verify_orthogonality(dataclasses.replace(family, masks=broken))
    assert report.failures == [(1, 1)]
    with pytest.raises(VerificationError) as excinfo:
        report.raise_for_failures()
    assert excinfo.value.index == (1, 1)


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_basis_certified(name, verified_family):
    family = verified_family(name)
    assert family.basis_certificate is not None
    det = basis_determinant(family)
    assert check_certificate(det, family.basis_certificate)


def test_basis_determinant_zero_for_repeated_mask(preset_family):
    family = preset_family("courant2d")
    masks = dict(family.masks)
    masks[(0, 1)] = masks[(1, 0)]
    with pytest.raises(VerificationError):
        verify_basis(dataclasses.replace(family, masks=masks))


def test_polyphase_check():
    for name in FAST_PRESETS:
        H = mask_H(get_preset(name).matrix)
        assert polyphase_check(H).lower_bound > 0


def test_univariate_haar_family():
    matrix = DirectionMatrix.parse("1")
    family = PrewaveletConstruction()(matrix)
    assert family.scale == 2
    assert family.pivot == (1,)
    assert family.phi == LaurentPoly.constant(1, 1)
    assert family.masks[(1,)] == LaurentPoly(1, {(1,): 1, (0,): -1})
    assert check_certificate(basis_determinant(family), family.basis_certificate)


@pytest.mark.parametrize("name", FAST_PRESETS)
def test_jm_orthogonalize(name, rng):
    matrix = get_preset(name).matrix
    H = mask_H(matrix)
    phi = autocorrelation_phi(matrix)
    d = matrix.dimension
    for _ in range(50):
        P = random_poly(rng, d, 4, max_degree=2)
        assert not bracket_product(H, jm_orthogonalize(P, H, phi), phi)


def test_jm_family_courant():
    matrix = get_preset("courant2d").matrix
    H = mask_H(matrix)
    phi = autocorrelation_phi(matrix)
    family = jm_family(H, phi)
    assert sorted(family) == [(0, 1), (1, 0), (1, 1)]
    assert all(not bracket_product(H, P, phi) for P in family.values())


def test_kernel_coincidence_on_constructed_masks(preset_family):
    family = preset_family("cubic_c1_2d")
    for mask in family.masks.values():
        assert not rho_D(family.U, mask)
        assert not tau_D(family.U, mask)


@pytest.mark.parametrize(
    "name, orbits",
    [
        ("courant2d", (((0, 1), (1, 0)), ((1, 1),))),
        (
            "linear3d",
            (
                ((0, 0, 1), (0, 1, 0), (1, 0, 0)),
                ((0, 1, 1), (1, 0, 1), (1, 1, 0)),
                ((1, 1, 1),),
            ),
        ),
    ],
)
def test_symmetry_orbits(name, orbits, preset_family):
    report = symmetry_orbits(preset_family(name))
    assert report.skipped is None
    assert report.verified
    assert report.orbits == orbits


def test_symmetry_orbits_skipped_for_mixed_pivot(preset_family):
    family = dataclasses.replace(preset_family("courant2d"), pivot=(0, 1))
    report = symmetry_orbits(family)
    assert report.skipped
    assert not report.verified


def test_symmetry_orbits_skipped_for_asymmetric_directions(preset_family):
    family = dataclasses.replace(
        preset_family("courant2d"), directions=DirectionMatrix.parse("1 0 1 1;0 1 1 0")
    )
    assert symmetry_orbits(family).skipped


def test_construction_without_preference(preset_family):
    family = PrewaveletConstruction(verify=False)(get_preset("courant2d").matrix)
    assert dict(family.masks) == dict(preset_family("courant2d").masks)


def test_for_preset_overrides():
    construction = PrewaveletConstruction.for_preset("quartic_c2_2d", pivot=(1, 1))
    assert construction.pivot == (1, 1)
    assert construction.scale == 2**6 * 362880


@pytest.mark.slow
def test_valpha_courant():
    matrix = get_preset("courant2d").matrix
    result = valpha_pathway(matrix, autocorrelation_phi(matrix), alpha_start=1)
    family = result.family
    assert 0 < result.alpha <= 1
    assert result.alpha == Fraction(1, 2**result.halvings)
    assert verify_orthogonality(family).ok
    assert family.basis_certificate is not None
    assert family.N > 33


def test_valpha_rejects_dimension_mismatch():
    matrix = get_preset("courant2d").matrix
    with pytest.raises(ValueError):
        valpha_pathway(matrix, LaurentPoly.constant(1, 3))


def test_valpha_rejects_nonpositive_alpha():
    matrix = get_preset("courant2d").matrix
    with pytest.raises(ValueError):
        valpha_pathway(matrix, autocorrelation_phi(matrix), alpha_start=0)


def test_family_is_immutable(preset_family):
    family = preset_family("courant2d")
    with pytest.raises(TypeError):
        family.masks[(1, 1)] = LaurentPoly.zero(2)
    assert isinstance(family, PrewaveletFamily)


def test_certifier_is_configurable():
    construction = PrewaveletConstruction(start_resolution=32, max_resolution=128)
    assert isinstance(construction.certifier, TorusCertifier)
    assert construction.certifier.resolution_cap(2) == 128

from fractions import Fraction

import numpy as np
import pytest

from presets import ALL_PRESETS, preset_params
from boxprewavelets.boxspline import (
    DirectionMatrix,
    autocorrelation_phi,
    autocorrelation_quadrature,
    center_shift,
    get_preset,
    integer_values,
    is_unimodular,
    mask_H,
    numeric_box_spline_eval,
    phi_oracle_error,
    symmetry_check,
)
from boxprewavelets.laurent import (
    LaurentPoly,
    bracket_product,
    conjugate,
    evaluate_at_ones,
    substitute_squares,
)


def symbol(terms, denominator):
    """Polynomial from {exponent: numerator} over a common denominator."""
    d = len(next(iter(terms)))
    return LaurentPoly(d, {e: Fraction(n, denominator) for e, n in terms.items()})


def spread(value, *exponents):
    return {e: value for e in exponents}


COURANT_PHI = symbol(
    {
        (0, 0): 6,
        **spread(1, (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)),
    },
    12,
)

CUBIC_PHI = symbol(
    {
        (0, 0): 3194,
        **spread(31, (2, 0), (-2, 0), (0, 2), (0, -2)),
        **spread(5, (2, 2), (-2, -2)),
        **spread(1144, (1, 0), (-1, 0), (0, 1), (0, -1)),
        **spread(47, (1, 2), (-1, -2), (2, 1), (-2, -1)),
        **spread(1, (1, -2), (-1, 2), (-2, 1), (2, -1)),
        **spread(814, (1, 1), (-1, -1)),
        **spread(178, (1, -1), (-1, 1)),
    },
    10080,
)

QUARTIC_PHI = symbol(
    {
        (0, 0): 94992,
        **spread(37742, (1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)),
        **spread(1736, (2, 0), (-2, 0), (0, 2), (0, -2), (2, 2), (-2, -2)),
        **spread(5100, (-1, 1), (1, -1), (2, 1), (-2, -1), (1, 2), (-1, -2)),
        **spread(
            34,
            (-2, 1), (2, -1), (3, 1), (-3, -1), (-1, 2), (1, -2),
            (3, 2), (-3, -2), (1, 3), (-1, -3), (2, 3), (-2, -3),
        ),
        **spread(2, (3, 0), (-3, 0), (0, 3), (0, -3), (3, 3), (-3, -3)),
    },
    362880,
)

LINEAR3D_PHI = symbol(
    {
        (0, 0, 0): 24,
        **spread(
            3,
            (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
            (1, 1, 1), (-1, -1, -1),
        ),
        **spread(
            2, (0, 1, 1), (1, 0, 1), (1, 1, 0), (0, -1, -1), (-1, 0, -1), (-1, -1, 0)
        ),
    },
    60,
)

PUBLISHED_PHI = {
    "courant2d": COURANT_PHI,
    "cubic_c1_2d": CUBIC_PHI,
    "quartic_c2_2d": QUARTIC_PHI,
    "linear3d": LINEAR3D_PHI,
}


def test_published_symbols_are_normalised():
    for phi in PUBLISHED_PHI.values():
        assert evaluate_at_ones(phi) == 1


def test_direction_matrix_parse():
    matrix = DirectionMatrix.parse("1 0 1;0 1 1")
    assert matrix == get_preset("courant2d").matrix
    assert matrix.dimension == 2
    assert matrix.length == 3
    assert matrix.columns == ((1, 0), (0, 1), (1, 1))
    assert str(matrix) == "1 0 1;0 1 1"
    assert DirectionMatrix.from_columns([(1, 0), (0, 1), (1, 1)]) == matrix


@pytest.mark.parametrize(
    "text", ["", "1 0;0", "1 0;0 0", "1 1;1 1", "1 a;0 1", "1 0 2;0 0 0"]
)
def test_direction_matrix_rejects(text):
    with pytest.raises(ValueError):
        DirectionMatrix.parse(text)


def test_get_preset_unknown():
    with pytest.raises(ValueError):
        get_preset("septic")


def test_unimodularity():
    for name in ALL_PRESETS:
        assert is_unimodular(get_preset(name).matrix)
    assert not is_unimodular(DirectionMatrix.parse("1 0;0 2"))
    assert not is_unimodular(DirectionMatrix.parse("1 0 2;0 1 1"))
    with pytest.raises(ValueError):
        autocorrelation_phi(DirectionMatrix.parse("1 0;0 2"))


def test_mask_H():
    H = mask_H(get_preset("courant2d").matrix)
    assert evaluate_at_ones(H) == 1
    assert H.coefficient((1, 1)) == Fraction(2, 8)
    assert H.coefficient((2, 1)) == Fraction(1, 8)
    assert len(H) == 7
    assert center_shift(get_preset("courant2d").matrix) == (2, 2)


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_phi_matches_published(name):
    phi = autocorrelation_phi(get_preset(name).matrix)
    assert phi == PUBLISHED_PHI[name]
    assert conjugate(phi) == phi
    assert evaluate_at_ones(phi) == 1


def test_quartic_phi_size():
    phi = autocorrelation_phi(get_preset("quartic_c2_2d").matrix)
    assert len(phi) == 37


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_bracket_identity(name):
    matrix = get_preset(name).matrix
    H = mask_H(matrix)
    phi = autocorrelation_phi(matrix)
    assert bracket_product(H, H, phi) == substitute_squares(phi)


def test_integer_values_are_refinement_fixed_point():
    matrix = get_preset("courant2d").matrix
    values = integer_values(matrix)
    a = mask_H(matrix.doubled()).scale(4)
    for j in set(values) | {(0, 0), (5, 5)}:
        refined = sum(
            (c * values.get(tuple(2 * jj - mm for jj, mm in zip(j, m)), 0) for m, c in a.items()),
            Fraction(0),
        )
        assert refined == values.get(j, 0)
    assert sum(values.values()) == 1


def test_univariate_haar():
    matrix = DirectionMatrix.parse("1")
    assert autocorrelation_phi(matrix) == LaurentPoly.constant(1, 1)
    H = mask_H(matrix)
    assert bracket_product(H, H, autocorrelation_phi(matrix)) == LaurentPoly.constant(1, 1)


def test_univariate_hat_against_quadrature():
    matrix = DirectionMatrix.parse("1 1")
    phi = autocorrelation_phi(matrix)
    assert phi == LaurentPoly(1, {(0,): Fraction(2, 3), (1,): Fraction(1, 6), (-1,): Fraction(1, 6)})
    assert autocorrelation_quadrature(matrix, 0) == pytest.approx(2 / 3, abs=1e-9)
    assert phi_oracle_error(matrix, phi) < 1e-9
    assert phi_oracle_error(DirectionMatrix.parse("1"), LaurentPoly.constant(1, 1)) < 1e-9


def test_courant_phi_against_point_values():
    matrix = get_preset("courant2d").matrix
    assert phi_oracle_error(matrix, autocorrelation_phi(matrix)) < 1e-6


def test_box_spline_partition_of_unity(rng):
    matrix = get_preset("courant2d").matrix
    for x in rng.uniform(0, 1, size=(5, 2)):
        total = sum(
            numeric_box_spline_eval(matrix, x + np.array([i, j]))
            for i in range(-2, 3)
            for j in range(-2, 3)
        )
        assert total == pytest.approx(1.0, abs=1e-9)


def test_box_spline_support():
    matrix = get_preset("courant2d").matrix
    assert numeric_box_spline_eval(matrix, [2.5, 0.5]) == 0.0
    assert numeric_box_spline_eval(matrix, [-0.1, 0.5]) == 0.0
    assert numeric_box_spline_eval(matrix, [1.0 + 1e-9, 1.0 + 2e-9]) == pytest.approx(1.0, abs=1e-6)


def test_symmetry_check():
    assert symmetry_check(get_preset("courant2d").matrix)
    assert symmetry_check(get_preset("linear3d").matrix)
    assert symmetry_check(get_preset("cubic_c1_2d").matrix)
    assert not symmetry_check(DirectionMatrix.parse("1 0 2;0 1 1"))
    assert not symmetry_check(DirectionMatrix.parse("1 0 1 1;0 1 1 0"))

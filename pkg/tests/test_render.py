from fractions import Fraction

import pytest

from presets import ALL_PRESETS, preset_params
from boxprewavelets.laurent import LaurentPoly, format_index
from boxprewavelets.render import parse_matrix, render_matrix

GOLDEN = [
    ("courant2d", (1, 0), "courant_H_10.txt"),
    ("courant2d", (0, 1), "courant_H_01.txt"),
    ("courant2d", (1, 1), "courant_H_11.txt"),
    ("linear3d", (1, 0, 0), "linear3d_H_100.txt"),
    ("linear3d", (1, 1, 0), "linear3d_H_110.txt"),
    ("linear3d", (1, 1, 1), "linear3d_H_111.txt"),
]


@pytest.mark.parametrize("name, s, filename", GOLDEN)
def test_golden_rendering(name, s, filename, preset_family, fixtures_dir):
    expected = (fixtures_dir / filename).read_text(encoding="utf-8")
    assert render_matrix(preset_family(name).masks[s]).to_text() == expected


@pytest.mark.parametrize("name", preset_params(ALL_PRESETS))
def test_parse_inverts_render(name, preset_family):
    family = preset_family(name)
    for s, mask in family.masks.items():
        text = render_matrix(mask).to_text()
        assert parse_matrix(text, family.dimension) == mask, format_index(s)


def test_univariate_row():
    P = LaurentPoly(1, {(-2,): 3, (1,): -1})
    text = render_matrix(P).to_text()
    assert text == "  3   0 [0]  -1\n"
    assert parse_matrix(text, 1) == P


def test_rational_cells():
    P = LaurentPoly(2, {(0, 0): Fraction(1, 2), (1, 1): Fraction(-3, 4)})
    text = render_matrix(P).to_text()
    assert text.splitlines() == ["    0  -3/4", "[1/2]     0"]
    assert parse_matrix(text, 2) == P


def test_origin_framed_when_outside_support():
    P = LaurentPoly(2, {(2, 1): 5})
    lines = render_matrix(P).to_text().splitlines()
    assert lines == ["  0   0   5", "[0]   0   0"]


def test_zero_polynomial():
    assert render_matrix(LaurentPoly.zero(2)).to_text() == "[0]\n"
    assert render_matrix(LaurentPoly.zero(3)).to_text() == "z^0:\n[0]\n"
    assert parse_matrix("z^0:\n[0]\n", 3) == LaurentPoly.zero(3)


def test_trivariate_slices_ascend():
    P = LaurentPoly(3, {(0, 0, 2): 1, (0, 0, -1): 2})
    rendered = render_matrix(P)
    assert [k for k, _ in rendered.slices] == [-1, 2]
    assert str(rendered) == "z^-1:\n[2]\n\nz^2:\n[1]\n"


@pytest.mark.parametrize(
    "text, dimension",
    [
        ("1 2\n3 4\n", 2),
        ("[1] 2\n3 [4]\n", 2),
        ("[1] 2\n3\n", 2),
        ("[1] 2\n3 4\n", 1),
        ("[1] 2\n", 3),
        ("[1]\n", 4),
        ("[1] x\n", 2),
    ],
)
def test_parse_rejects(text, dimension):
    with pytest.raises(ValueError):
        parse_matrix(text, dimension)


def test_rendering_rejects_four_variables():
    with pytest.raises(ValueError):
        render_matrix(LaurentPoly.constant(1, 4))

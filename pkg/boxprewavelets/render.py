import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .laurent import LaurentPoly
from .utils import format_rational, parse_rational

SLICE_HEADER = re.compile(r"^z\^(-?\d+):$")


@dataclass(frozen=True)
class Plane:
    """Coefficients of one (x, y) plane, top row first.

    x increases left to right and y increases bottom to top; the cell of
    x^0 y^0 is always inside the box.
    """

    rows: Tuple[Tuple[Fraction, ...], ...]
    x_min: int
    y_max: int

    @property
    def origin(self):
        """(row, column) of the origin cell."""
        return self.y_max, -self.x_min

    def cells(self):
        for r, row in enumerate(self.rows):
            for c, value in enumerate(row):
                yield (self.x_min + c, self.y_max - r), value

    def to_lines(self):
        origin = self.origin
        text = [
            [
                f"[{format_rational(v)}]" if (r, c) == origin else format_rational(v)
                for c, v in enumerate(row)
            ]
            for r, row in enumerate(self.rows)
        ]
        width = max(len(cell) for row in text for cell in row)
        return [" ".join(cell.rjust(width) for cell in row) for row in text]


@dataclass(frozen=True)
class RenderedMatrix:
    """Matrix layout of a Laurent polynomial in one, two or three variables.

    For d=3 there is one plane per z power, ascending; otherwise a single plane
    with key None.
    """

    dimension: int
    slices: Tuple[Tuple[Optional[int], Plane], ...]

    def to_text(self):
        if self.dimension < 3:
            return "\n".join(self.slices[0][1].to_lines()) + "\n"
        blocks = [
            "\n".join([f"z^{k}:"] + plane.to_lines()) for k, plane in self.slices
        ]
        return "\n\n".join(blocks) + "\n"

    def to_poly(self):
        terms = {}
        for k, plane in self.slices:
            for (i, j), value in plane.cells():
                if self.dimension == 1:
                    terms[(i,)] = value
                elif self.dimension == 2:
                    terms[(i, j)] = value
                else:
                    terms[(i, j, k)] = value
        return LaurentPoly(self.dimension, terms)

    def __str__(self):
        return self.to_text()


def _plane(terms):
    points = list(terms) + [(0, 0)]
    x_min = min(p[0] for p in points)
    x_max = max(p[0] for p in points)
    y_min = min(p[1] for p in points)
    y_max = max(p[1] for p in points)
    rows = tuple(
        tuple(terms.get((i, j), Fraction(0)) for i in range(x_min, x_max + 1))
        for j in range(y_max, y_min - 1, -1)
    )
    return Plane(rows, x_min, y_max)


def render_matrix(P):
    """Lay out P with the origin framed.

    Args:
        P (LaurentPoly): Polynomial in at most three variables.

    Returns:
        RenderedMatrix
    """
    d = P.dimension
    if d == 1:
        return RenderedMatrix(1, ((None, _plane({(e[0], 0): c for e, c in P.items()})),))
    if d == 2:
        return RenderedMatrix(2, ((None, _plane(dict(P.items()))),))
    if d == 3:
        planes = {}
        for (i, j, k), c in P.items():
            planes.setdefault(k, {})[(i, j)] = c
        if not planes:
            planes[0] = {}
        return RenderedMatrix(3, tuple((k, _plane(planes[k])) for k in sorted(planes)))
    raise ValueError(f"Cannot render a polynomial in {d} variables.")


def _parse_plane(lines):
    rows = []
    origin = None
    for r, line in enumerate(lines):
        row = []
        for c, cell in enumerate(line.split()):
            if cell.startswith("[") and cell.endswith("]"):
                if origin is not None:
                    raise ValueError("Matrix has more than one framed origin cell.")
                origin = (r, c)
                cell = cell[1:-1]
            row.append(parse_rational(cell))
        rows.append(tuple(row))
    if origin is None:
        raise ValueError("Matrix has no framed origin cell.")
    if any(len(row) != len(rows[0]) for row in rows):
        raise ValueError("Ragged matrix rows.")
    return Plane(tuple(rows), -origin[1], origin[0])


def parse_matrix(text, dimension):
    """Inverse of ``render_matrix(P).to_text()``."""
    lines = [line.rstrip() for line in text.splitlines()]
    if dimension in (1, 2):
        plane = _parse_plane([line for line in lines if line.strip()])
        if dimension == 1 and len(plane.rows) != 1:
            raise ValueError("A univariate matrix has exactly one row.")
        return RenderedMatrix(dimension, ((None, plane),)).to_poly()
    if dimension != 3:
        raise ValueError(f"Cannot parse a matrix in {dimension} variables.")
    slices = []
    for line in lines:
        if not line.strip():
            continue
        header = SLICE_HEADER.match(line.strip())
        if header:
            slices.append((int(header.group(1)), []))
        elif not slices:
            raise ValueError(f"Expected a 'z^k:' header, got '{line}'.")
        else:
            slices[-1][1].append(line)
    return RenderedMatrix(
        3, tuple((k, _parse_plane(body)) for k, body in slices)
    ).to_poly()

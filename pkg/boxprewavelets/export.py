import json
import logging
from fractions import Fraction

from .boxspline import DirectionMatrix
from .laurent import LaurentPoly, format_index, parse_index
from .prewavelet import PrewaveletFamily

logger = logging.getLogger(__name__)


def poly_to_json(P):
    # coefficients as strings, consumers may not have bignums
    return [
        {"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)}
        for e, c in P.sorted_terms()
    ]


def poly_from_json(entries, dimension):
    terms = {}
    for entry in entries:
        exponent = tuple(int(k) for k in entry["exp"])
        if exponent in terms:
            raise ValueError(f"Repeated exponent {exponent}.")
        denominator = int(entry["den"])
        if denominator <= 0:
            raise ValueError(f"Invalid denominator {denominator} at exponent {exponent}.")
        terms[exponent] = Fraction(int(entry["num"]), denominator)
    return LaurentPoly(dimension, terms)


def family_to_json(family):
    polynomials = {"H": family.H, "Phi": family.phi, "U": family.U}
    for s, mask in family.masks.items():
        polynomials[family.mask_name(s)] = mask
    return {
        "dimension": family.dimension,
        "scale_c": family.scale,
        "pivot": list(family.pivot) if family.pivot is not None else None,
        "directions": [list(row) for row in family.directions.rows]
        if family.directions is not None
        else None,
        "polynomials": {name: poly_to_json(P) for name, P in polynomials.items()},
    }


def family_from_json(data):
    """Rebuild a PrewaveletFamily from ``family_to_json`` output.

    Nothing is verified here; run the checks in ``prewavelet`` on the result.
    """
    try:
        d = int(data["dimension"])
        polynomials = {
            name: poly_from_json(entries, d) for name, entries in data["polynomials"].items()
        }
        masks = {
            parse_index(name[2:], d): P
            for name, P in polynomials.items()
            if name.startswith("H_")
        }
        family = PrewaveletFamily(
            H=polynomials["H"],
            phi=polynomials["Phi"],
            scale=int(data["scale_c"]),
            U=polynomials["U"],
            masks=masks,
            pivot=tuple(int(b) for b in data["pivot"]) if data.get("pivot") is not None else None,
            directions=DirectionMatrix(tuple(tuple(r) for r in data["directions"]))
            if data.get("directions") is not None
            else None,
        )
    except (KeyError, TypeError, AttributeError) as e:
        raise ValueError(f"Invalid family JSON: {e!r}.")
    expected = (1 << d) - 1
    if len(family.masks) != expected:
        raise ValueError(
            f"Family JSON has masks {sorted(format_index(s) for s in masks)}, expected {expected}."
        )
    return family


def write_family(family, path):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(family_to_json(family), f, indent=2)
        f.write("\n")
    logger.info(f"Wrote {len(family.masks)} masks to {path}.")


def read_family(path):
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in '{path}': {e}.")
    return family_from_json(data)

"""Command line front end: ``boxprew construct courant2d``."""

import argparse
import logging
import sys

from .boxspline import (
    PRESETS,
    DirectionMatrix,
    autocorrelation_phi,
    get_preset,
    mask_H,
    phi_oracle_error,
)
from .certify import TorusCertifier
from .export import read_family, write_family
from .laurent import (
    bracket_product,
    conjugate,
    format_index,
    parse_index,
    substitute_squares,
)
from .prewavelet import (
    PrewaveletConstruction,
    jm_family,
    kernel_membership,
    polyphase_check,
    scaled_U,
    support_stats,
    symmetry_orbits,
    valpha_pathway,
    vanishing_moments,
    verify_basis,
    verify_orthogonality,
)
from .render import render_matrix
from .utils import (
    InconclusiveCertificate,
    PrewaveletError,
    VerificationError,
    format_rational,
    lcm_of_denominators,
    parse_rational,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_INCONCLUSIVE = 3
EXIT_INVALID = 4


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors must not collide with the verification exit code
    def error(self, message):
        raise ValueError(f"{self.prog}: {message}")


def _resolve(args):
    """(name, DirectionMatrix, preset or None) from a preset name or --matrix."""
    if args.preset and args.matrix:
        raise ValueError("Give either a preset or --matrix, not both.")
    if args.preset:
        preset = get_preset(args.preset)
        return preset.name, preset.matrix, preset
    if args.matrix:
        matrix = DirectionMatrix.parse(args.matrix)
        return str(matrix), matrix, None
    raise ValueError("Give a preset name or --matrix.")


def _construction(args, matrix, preset, **kwargs):
    pivot = parse_index(args.pivot, matrix.dimension) if args.pivot else None
    scale = int(args.scale) if args.scale else None
    if preset is not None:
        pivot = pivot if pivot is not None else preset.pivot
        scale = scale if scale is not None else preset.scale
    return PrewaveletConstruction(
        pivot=pivot, scale=scale, max_resolution=args.grid_cap, **kwargs
    )


def _print_masks(family):
    for s, mask in family.masks.items():
        print(f"{family.mask_name(s)}:")
        print(render_matrix(mask).to_text())


def _print_supports(family):
    supports, total = support_stats(family)
    print("Supports: " + " ".join(f"{family.mask_name(s)}={n}" for s, n in supports.items()))
    print(f"N = {total}")


def cmd_construct(args):
    name, matrix, preset = _resolve(args)
    family = _construction(args, matrix, preset)(matrix)
    print(f"Directions: {matrix}")
    print(f"Scale c = {family.scale}")
    if family.pivot is not None:
        print(f"Pivot u_{format_index(family.pivot)}: {family.pivot_certificate.describe()}")
    else:
        print("Pivot: none, masks from the V_alpha pathway")
    print()
    _print_masks(family)
    _print_supports(family)
    print("Orthogonality: ok")
    if not kernel_membership(family):
        raise VerificationError("Masks are orthogonal but not in the kernel of tau_U.")
    print("Kernel membership: ok")
    moments = vanishing_moments(family)
    bad = [s for s, v in moments.items() if v != 0]
    if bad:
        raise VerificationError(
            f"H_{format_index(bad[0])}(1) = {moments[bad[0]]}, expected 0.", index=bad[0]
        )
    print("Vanishing moments: ok")
    print(f"Polyphase components: {polyphase_check(family.H, _certifier(args)).describe()}")
    print(f"Basis determinant: {family.basis_certificate.describe()}")
    report = symmetry_orbits(family)
    if report.skipped:
        print(f"Symmetry orbits: skipped ({report.skipped})")
    else:
        orbits = " ".join("{" + ",".join(format_index(s) for s in o) + "}" for o in report.orbits)
        print(f"Symmetry orbits: {orbits} ({'verified' if report.verified else 'NOT verified'})")
        if not report.verified:
            return EXIT_VERIFICATION
    if args.jm:
        jm = jm_family(family.H, family.phi)
        sizes = " ".join(f"H_{format_index(s)}={len(P)}" for s, P in jm.items())
        print(f"JM orthogonalized family: {sizes}")
        print(f"JM N = {sum(len(P) for P in jm.values())}")
    if args.json:
        write_family(family, args.json)
        print(f"Wrote {args.json}")
    return EXIT_OK


def cmd_phi(args):
    name, matrix, _ = _resolve(args)
    phi = autocorrelation_phi(matrix)
    denominator = lcm_of_denominators(phi.terms.values())
    print(f"Phi for {name}: {len(phi)} terms, denominator {denominator}")
    for e, c in phi.sorted_terms():
        print(f"  {list(e)}: {format_rational(c * denominator)}")
    total = sum(phi.terms.values())
    symmetric = conjugate(phi) == phi
    tolerance = 1e-9 if matrix.dimension == 1 else 1e-6
    error = phi_oracle_error(matrix, phi)
    print(f"Phi(1) = {format_rational(total)}")
    print(f"Conjugate symmetric: {'yes' if symmetric else 'no'}")
    print(f"Numeric oracle error: {error:.3g}")
    if total != 1 or not symmetric or error > tolerance:
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_valpha(args):
    name, matrix, preset = _resolve(args)
    alpha = parse_rational(args.alpha_value or args.alpha)
    phi = autocorrelation_phi(matrix)
    scale = int(args.scale) if args.scale else (preset.scale if preset else None)
    result = valpha_pathway(
        matrix, phi, alpha, args.max_halvings, _certifier(args), scale
    )
    print(f"alpha = {format_rational(result.alpha)} after {result.halvings} halvings")
    print(f"d0: {len(result.d0)} terms, {result.d0_certificate.describe()}")
    _print_supports(result.family)
    print(f"Basis determinant: {result.family.basis_certificate.describe()}")
    pivot_family = _construction(args, matrix, preset, verify=False)(matrix)
    _, pivot_n = support_stats(pivot_family)
    _, valpha_n = support_stats(result.family)
    print(f"N: pivot route {pivot_n}, V_alpha route {valpha_n}")
    if args.json:
        write_family(result.family, args.json)
    return EXIT_OK


def cmd_verify(args):
    family = read_family(args.path)
    print(f"Family: d = {family.dimension}, {len(family.masks)} masks, c = {family.scale}")
    if family.directions is not None:
        if family.H != mask_H(family.directions):
            raise VerificationError("H does not match the recorded directions.")
        if family.phi != autocorrelation_phi(family.directions):
            raise VerificationError("Phi does not match the recorded directions.")
    _, U = scaled_U(family.H, family.phi, family.scale)
    if U != family.U:
        raise VerificationError("U is not c H Phi.")
    if bracket_product(family.H, family.H, family.phi) != substitute_squares(family.phi):
        raise VerificationError("<H, H>_Phi is not Phi(z^2).")
    report = verify_orthogonality(family)
    for s in report.failures:
        print(f"{family.mask_name(s)}: orthogonality residual {report.brackets[s]}")
    report.raise_for_failures()
    print("Orthogonality: ok")
    _, certificate = verify_basis(family, _certifier(args))
    print(f"Basis determinant: {certificate.describe()}")
    _print_supports(family)
    return EXIT_OK


def cmd_export(args):
    path = args.json
    if not path:
        raise ValueError("Give an output path with --json.")
    name, matrix, preset = _resolve(args)
    family = _construction(args, matrix, preset)(matrix)
    write_family(family, path)
    print(f"Wrote {name} family to {path}")
    return EXIT_OK


def cmd_presets(args):
    for name in sorted(PRESETS):
        preset = PRESETS[name]
        print(f"{name:15s} {str(preset.matrix):28s} {preset.description}")
    return EXIT_OK


def _certifier(args):
    return TorusCertifier(max_resolution=args.grid_cap)


def _add_grid_cap(parser):
    parser.add_argument("--grid-cap", type=int, default=None, help="certifier grid cap")


def _add_source(parser):
    parser.add_argument("preset", nargs="?", help="preset name, see 'presets'")
    parser.add_argument("--matrix", help="direction matrix rows separated by ';'")
    parser.add_argument("--pivot", help="preferred pivot index, e.g. 11")
    parser.add_argument("--scale", help="scale c instead of the smallest integer")
    _add_grid_cap(parser)


def build_parser():
    parser = _ArgumentParser(
        prog="boxprew", description="Exact prewavelets for box splines on Z^d."
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build and verify a prewavelet family")
    _add_source(p)
    p.add_argument("--jm", action="store_true", help="also report the JM family")
    p.add_argument("--json", help="write the family to this path")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("phi", help="print the autocorrelation symbol")
    _add_source(p)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("valpha", help="run the V_alpha pathway")
    _add_source(p)
    p.add_argument("alpha_value", nargs="?", help="starting alpha")
    p.add_argument("--alpha", default="1", help="starting alpha (default 1)")
    p.add_argument("--max-halvings", type=int, default=40)
    p.add_argument("--json", help="write the family to this path")
    p.set_defaults(func=cmd_valpha)

    p = sub.add_parser("verify", help="re-check an exported family")
    p.add_argument("path")
    _add_grid_cap(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="write a family as JSON")
    _add_source(p)
    p.add_argument("--json", help="output path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("presets", help="list presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ValueError as e:
        print(e, file=sys.stderr)
        return EXIT_INVALID
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    logger.debug(f"Running '{args.command}' with {vars(args)}")
    try:
        return args.func(args)
    except VerificationError as e:
        print(f"Verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFICATION
    except InconclusiveCertificate as e:
        print(f"Inconclusive: {e}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (ValueError, OSError, PrewaveletError) as e:
        print(f"Invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

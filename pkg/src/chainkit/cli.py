"""Command line entry point: ``chainkit <command> ...``.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 on unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from importlib import resources
from pathlib import Path

from . import cubical
from .complex import ComplexError, homology, parse_coefficients, universal_coefficients_check
from .equivariant import VARIANTS, equivariant_homology, gysin_check, localization_check
from .expr import ExpressionError
from .io import BoundaryCheckError, ParseError, Report, parse_complex, parse_surface
from .morse import (
    CATALOG,
    FlowParams,
    IncidenceParams,
    MorseError,
    build_morse_complex,
    catalog_surface,
    dump_flows,
    numerical_morse_data,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        window = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO..HI, got {text!r}") from None
    if window[0] > window[1]:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return window


def shipped(name: str) -> Path:
    """Path of a fixture shipped with the package (``pt.cx``, ``s1_rot.cx``)."""
    return Path(str(resources.files("chainkit") / "data" / name))


def _load(path: str):
    p = Path(path)
    if not p.exists() and shipped(path).exists():
        p = shipped(path)
    if not p.exists():
        raise InputError(f"no such file: {path}")
    return parse_complex(p)


# ---------------------------------------------------------------------------
# commands


def cmd_homology(args) -> Report:
    parsed = _load(args.file)
    parse_coefficients(args.coeff)
    rep = Report("homology", {"file": args.file, "coefficients": args.coeff})
    rep.add_homology(homology(parsed.complex, args.coeff))
    rep.check("boundary squares to zero", True)
    return rep


def cmd_equivariant(args) -> Report:
    parsed = _load(args.file)
    rep = Report("equivariant", {"file": args.file, "variant": args.variant,
                                 "window": f"{args.window[0]}..{args.window[1]}"})
    rep.add_homology(equivariant_homology(parsed.as_circle(), args.variant, args.window))
    rep.check("operator identities", True)
    return rep


def cmd_gysin(args) -> Report:
    parsed = _load(args.file)
    res = gysin_check(parsed.as_circle(), args.window)
    rep = Report("gysin", {"file": args.file, "window": f"{args.window[0]}..{args.window[1]}"})
    for j in res.joints:
        rep.check(f"exact at {j.joint}_{j.degree}", j.exact, f"image rank {j.image_rank}, kernel rank {j.kernel_rank}")
    return rep


def cmd_localize(args) -> Report:
    parsed = _load(args.file)
    res = localization_check(parsed.as_circle(), args.window)
    rep = Report("localize", {"file": args.file, "window": f"{args.window[0]}..{args.window[1]}"})
    rep.add_homology(res.laurent)
    rep.check("localization sequence exact", res.sequence.exact,
              f"{len(res.sequence.failures())} inexact joint(s)")
    rep.check("laurent homology = stabilized plus homology", res.isomorphic)
    rep.check("plus and laurent chain groups agree in degrees <= 0", res.chain_groups_agree)
    return rep


def cmd_uct(args) -> Report:
    parsed = _load(args.file)
    rep = Report("uct", {"file": args.file, "modulus": str(args.mod)})
    rep.add_homology(homology(parsed.complex, f"z{args.mod}"))
    for r in universal_coefficients_check(parsed.complex, args.mod):
        rep.check(f"degree {r.degree}", r.ok, f"rank {r.lhs} = {r.tensor} + {r.tor}")
    return rep


def _surface(spec: str):
    if spec in CATALOG:
        return catalog_surface(spec)
    if not Path(spec).exists():
        raise InputError(f"{spec!r} is neither a catalog surface ({', '.join(sorted(CATALOG))}) nor a file")
    return parse_surface(spec)


def cmd_morse(args) -> Report:
    surface, f = _surface(args.surface)
    t0 = time.perf_counter()
    data = numerical_morse_data(
        surface, f, grid=args.grid,
        params=IncidenceParams(r_seed=args.r_seed, circle_samples=args.samples),
        flow=FlowParams(r_cap=args.r_cap))
    rep = Report("morse", {"surface": surface.name, "coefficients": args.coeff,
                           "critical points": str(len(data.points)),
                           "trajectories": str(len(data.trajectories)),
                           "seconds": f"{time.perf_counter() - t0:.2f}"})
    for c in data.points:
        x, y, z = c.position
        rep.meta[f"point {c.label}"] = f"index {c.index} at ({x:.9f}, {y:.9f}, {z:.9f}) f = {c.value:.9f}"
    for k in sorted(data.incidence):
        mat = data.incidence_z2[k] if args.coeff == "z2" else data.incidence[k]
        rep.meta[f"incidence {k}"] = str(mat.tolist())
    rep.diagnostics.extend(data.diagnostics)
    rep.check("no flagged incidence cells", not data.flags, "; ".join(data.flags))
    if args.dump_flows:
        dump_flows(data.trajectories, args.dump_flows)
        rep.meta["flows written to"] = args.dump_flows
    if data.flags:
        return rep
    try:
        cx = build_morse_complex(data, args.coeff)
    except MorseError as exc:
        rep.check("incidence squares to zero", False, str(exc))
        return rep
    rep.check("incidence squares to zero", True)
    groups = homology(cx, args.coeff)
    rep.add_homology(groups)
    counts = data.counts()
    betti = {h.degree: h.betti for h in groups}
    rep.check("Morse inequalities", all(counts[k] >= betti.get(k, 0) for k in range(len(counts))),
              f"critical counts {counts}")
    chi_c = sum((-1) ** k * m for k, m in enumerate(counts))
    chi_h = sum((-1) ** k * b for k, b in betti.items())
    rep.check("Euler characteristic", chi_c == chi_h, f"{chi_c} = {chi_h}")
    return rep


def cmd_cutcheck(args) -> Report:
    rng = random.Random(args.seed)
    rep = Report("cutcheck", {"trials": str(args.trials), "seed": str(args.seed)})
    bad_sq = bad_cut = bad_crease = 0
    for _ in range(args.trials):
        ambient = rng.randint(1, 4)
        dim = rng.randint(1, ambient)
        c = cubical.random_chain(rng, ambient, dim, terms=rng.randint(1, 4))
        c = cubical.normalize_chain(c)
        if not c:
            continue
        if c.dim > 1 and cubical.cube_boundary(cubical.cube_boundary(c)):
            bad_sq += 1
        axis = rng.randrange(ambient)
        level = cubical.random_generic_level(rng, c, axis)
        if not cubical.cut_identity_holds(c, axis, level):
            bad_cut += 1
        if not cubical.crease_identity_holds(c, axis, level):
            bad_crease += 1
    rep.check("boundary squares to zero", bad_sq == 0, f"{bad_sq} failure(s)")
    rep.check("cut identity", bad_cut == 0, f"{bad_cut} failure(s)")
    rep.check("crease identity", bad_crease == 0, f"{bad_crease} failure(s)")
    return rep


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chainkit", description="Exact chain complex and Morse homology tools.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", action="store_true", help="append the key-value report block")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("homology", parents=[common], help="homology of a complex file")
    s.add_argument("file")
    s.add_argument("--coeff", default="z", help="z, q or zN")
    s.set_defaults(run=cmd_homology)

    s = sub.add_parser("equivariant", parents=[common], help="equivariant homology of a complex with rotation")
    s.add_argument("file")
    s.add_argument("--variant", choices=VARIANTS, required=True)
    s.add_argument("--window", type=_window, required=True, help="LO..HI")
    s.set_defaults(run=cmd_equivariant)

    for name, fn, help_ in (("gysin", cmd_gysin, "exactness of the Gysin sequence"),
                            ("localize", cmd_localize, "localization sequence and H_laurent check")):
        s = sub.add_parser(name, parents=[common], help=help_)
        s.add_argument("file")
        s.add_argument("--window", type=_window, required=True, help="LO..HI")
        s.set_defaults(run=fn)

    s = sub.add_parser("uct", parents=[common], help="universal coefficient rank check")
    s.add_argument("file")
    s.add_argument("--mod", type=int, required=True)
    s.set_defaults(run=cmd_uct)

    s = sub.add_parser("morse", parents=[common], help="numerical Morse homology of a surface")
    s.add_argument("--surface", required=True, help=f"one of {', '.join(sorted(CATALOG))} or a surface file")
    s.add_argument("--coeff", choices=("z", "z2"), default="z")
    s.add_argument("--dump-flows", metavar="PATH")
    s.add_argument("--grid", type=int, default=10)
    s.add_argument("--samples", type=int, default=64, help="seeds on each unstable circle")
    s.add_argument("--r-seed", type=float, default=1e-2)
    s.add_argument("--r-cap", type=float, default=1e-3)
    s.set_defaults(run=cmd_morse)

    s = sub.add_parser("cutcheck", parents=[common], help="randomized cut and crease identity checks")
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(run=cmd_cutcheck)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    # "--window -6..2" would otherwise read -6..2 as an option
    out = []
    it = iter(range(len(argv)))
    for i in it:
        if argv[i] == "--window" and i + 1 < len(argv):
            out.append(f"--window={argv[i + 1]}")
            next(it, None)
        else:
            out.append(argv[i])
    return out


def run(argv: list[str] | None = None, out=None) -> tuple[int, Report | None]:
    out = out or sys.stdout
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code == 0 else EXIT_INPUT), None
    try:
        rep = args.run(args)
    except BoundaryCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL, None
    except (InputError, ParseError, ExpressionError, ComplexError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    except MorseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL, None
    out.write(rep.to_text())
    if args.machine:
        out.write("\n" + rep.to_machine())
    return (EXIT_OK if rep.passed else EXIT_FAIL), rep


def main(argv: list[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())

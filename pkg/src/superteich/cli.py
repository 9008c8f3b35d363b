"""Command-line front end.

Exit codes: 0 success, 1 domain or invariant failure, 2 I/O or parse failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import builders, holonomy, io, surface as sf, teich
from .errors import SuperTeichError
from .grassmann import DEFAULT_TOL, to_text
from .superlinalg import is_osp, sdet

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class DomainFailure(Exception):
    """Invariant violation or rejected operation; maps to exit code 1."""


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def _load(args, need_coords: bool = True, need_orientation: bool = True):
    if not args.surface:
        raise io.FormatError("--surface is required")
    t, o = io.load_surface(args.surface)
    if need_orientation and o is None:
        raise io.FormatError("surface file has no orientation")
    coords = None
    if need_coords or args.coords:
        if not args.coords:
            raise io.FormatError("--coords is required")
        coords = io.load_coords(args.coords)
    rep = sf.validate(t)
    if not rep.ok:
        raise DomainFailure("invalid triangulation: " + "; ".join(rep.errors) + _edge_note(rep))
    if o is not None and len(o) != t.num_edges:
        raise DomainFailure(f"orientation has {len(o)} signs for {t.num_edges} edges")
    if coords is not None:
        if len(coords.lam) != t.num_edges:
            raise DomainFailure(f"{len(coords.lam)} lambda-lengths for {t.num_edges} edges")
        if len(coords.mu) != t.num_triangles:
            raise DomainFailure(f"{len(coords.mu)} mu-invariants for {t.num_triangles} triangles")
    return t, o, coords, rep


def _edge_note(rep: sf.ValidationReport) -> str:
    return f" (offending edges: {rep.bad_edges})" if rep.bad_edges else ""


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report dict)
# ---------------------------------------------------------------------------

def cmd_validate(args) -> tuple[int, dict]:
    t, o = io.load_surface(args.surface) if args.surface else (None, None)
    if t is None:
        raise io.FormatError("--surface is required")
    coords = io.load_coords(args.coords) if args.coords else None
    rep = sf.validate(t)
    report = {
        "command": "validate",
        "edges": rep.num_edges,
        "triangles": rep.num_triangles,
        "fans": {str(p): n for p, n in sorted(rep.fan_lengths.items())},
        "errors": list(rep.errors),
        "offending_edges": rep.bad_edges,
    }
    errors = report["errors"]
    if o is not None and len(o) != rep.num_edges:
        errors.append(f"orientation has {len(o)} signs for {rep.num_edges} edges")
    if coords is not None:
        if len(coords.lam) != rep.num_edges:
            errors.append(f"{len(coords.lam)} lambda-lengths for {rep.num_edges} edges")
        if len(coords.mu) != rep.num_triangles:
            errors.append(f"{len(coords.mu)} mu-invariants for {rep.num_triangles} triangles")
    if not errors and coords is not None:
        oo = o if o is not None else tuple([1] * t.num_edges)
        res = {}
        for p in range(t.num_punctures):
            fd = teich.fan_data(t, coords, sf.puncture_fan(t, p), oo)
            res[str(p)] = teich.chi_product_residual(fd)
        report["chi_product_residuals"] = res
        bad = [p for p, r in res.items() if r > args.tolerance]
        if bad:
            errors.append(f"cross ratios around punctures {bad} do not multiply to 1")
    report["ok"] = not errors
    return (EXIT_OK if not errors else EXIT_DOMAIN), report


def _quad_entry(log: teich.FlipLogEntry, q: teich.QuadData) -> dict:
    r = log.record
    bosonic = (log.e * log.f - (q.a * q.c + q.b * q.d)).max_abs()
    back = teich.double_flip(q)
    restore = max((back.e - q.e).max_abs(), (back.sigma - q.sigma).max_abs(), (back.theta - q.theta).max_abs())
    return {
        "edge": log.edge,
        "e": to_text(log.e),
        "f": to_text(log.f),
        "mu": to_text(log.mu),
        "nu": to_text(log.nu),
        "mu_triangle": r.mu_tri,
        "nu_triangle": r.nu_tri,
        "ef_minus_ac_bd": bosonic,
        "double_flip_residual": restore,
    }


def _derived_path(out: str, tag: str) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}.{tag}{p.suffix or '.json'}"))


def cmd_flip(args) -> tuple[int, dict]:
    t, o, coords, _ = _load(args)
    entries = []
    for e in args.edges:
        if not 0 <= e < t.num_edges:
            raise DomainFailure(f"edge {e} does not exist (0..{t.num_edges - 1})")
        try:
            q, _ = teich.quad_for_edge(t, o, coords, e)
            t, o, coords, log = teich.flip_decorated(t, o, coords, e)
        except SuperTeichError as exc:
            raise DomainFailure(f"flip of edge {e} rejected: {exc}") from exc
        entries.append(_quad_entry(log, q))
    report = {"command": "flip", "flips": entries}
    if args.out:
        surf_out = args.surface_out or _derived_path(args.out, "surface")
        io.save_surface(surf_out, t, o)
        io.save_coords(args.out, coords)
        report["written"] = {"coords": args.out, "surface": surf_out}
    return EXIT_OK, report


def _puncture_report(r: holonomy.MonodromyReport, tol: float) -> dict:
    ctype = holonomy.classify(r, tol)
    constraint = r.star1.max_abs() if ctype is holonomy.PunctureType.RAMOND else 0.0
    return {
        "puncture": r.puncture,
        "type": ctype.value,
        "fan_length": r.fan_length,
        "aligned_steps": r.aligned_steps,
        "star0": to_text(r.star0),
        "star1": to_text(r.star1),
        "star2": to_text(r.star2),
        "star3": to_text(r.star3),
        "matrix": r.matrix.to_strings(),
        "closed_form_error": r.closed_form_error,
        "agrees": bool(r.agrees),
        "chi_product_residual": r.chi_residual,
        "constraint_residual": constraint,
        "osp_residual": is_osp(r.matrix).residual,
        "sdet_residual": (sdet(r.matrix) - 1.0).max_abs(),
    }


def cmd_monodromy(args) -> tuple[int, dict]:
    t, o, coords, _ = _load(args)
    if args.puncture is None:
        punctures = range(t.num_punctures)
    else:
        if not 0 <= args.puncture < t.num_punctures:
            raise DomainFailure(f"puncture {args.puncture} does not exist (0..{t.num_punctures - 1})")
        punctures = [args.puncture]
    items = []
    for p in punctures:
        try:
            r = holonomy.puncture_monodromy(t, coords, o, p, args.tolerance)
            items.append(_puncture_report(r, args.tolerance))
        except SuperTeichError as exc:
            raise DomainFailure(f"puncture {p}: {exc}") from exc
    ok = all(x["agrees"] for x in items)
    report = {"command": "monodromy", "punctures": items, "ok": ok}
    return (EXIT_OK if ok else EXIT_DOMAIN), report


def cmd_constrain(args) -> tuple[int, dict]:
    t, o, coords, _ = _load(args)
    try:
        rep = holonomy.impose_constraints(t, coords, o, args.tolerance)
    except SuperTeichError as exc:
        raise DomainFailure(str(exc)) from exc
    report = {
        "command": "constrain",
        "rank": rep.rank,
        "n_ramond": rep.n_ramond,
        "n_ns": rep.n_ns,
        "ramond_punctures": rep.ramond_punctures,
        "pivot_triangles": {str(p): tri for p, tri in sorted(rep.pivots.items())},
        "free_odd": rep.free_odd,
        "odd_dimension": rep.expected_free_odd,
        "residuals": {str(p): r for p, r in sorted(rep.residuals.items())},
    }
    worst = max(rep.residuals.values(), default=0.0)
    if args.out:
        io.save_coords(args.out, rep.coords)
        report["written"] = {"coords": args.out}
    ok = worst <= args.tolerance and rep.free_odd == rep.expected_free_odd
    report["ok"] = ok
    return (EXIT_OK if ok else EXIT_DOMAIN), report


def cmd_generate(args) -> tuple[int, dict]:
    rng = np.random.default_rng(args.seed)
    try:
        ds = builders.random_surface(args.genus, args.punctures, rng, flips=args.flips)
    except ValueError as exc:
        raise DomainFailure(str(exc)) from exc
    report = {
        "command": "generate",
        "genus": args.genus,
        "punctures": args.punctures,
        "seed": args.seed,
        "edges": ds.triangulation.num_edges,
        "triangles": ds.triangulation.num_triangles,
    }
    if args.out:
        surf_out = args.surface_out or _derived_path(args.out, "surface")
        io.save_surface(surf_out, ds.triangulation, ds.orientation)
        io.save_coords(args.out, ds.coords)
        report["written"] = {"coords": args.out, "surface": surf_out}
    return EXIT_OK, report


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def render_text(report: dict) -> str:
    cmd = report.get("command")
    lines = []
    if cmd == "validate":
        lines.append(f"{report['edges']} edges, {report['triangles']} triangles")
        for p, n in report["fans"].items():
            res = report.get("chi_product_residuals", {}).get(p)
            extra = f", cross-ratio product residual {res:.3e}" if res is not None else ""
            lines.append(f"puncture {p}: fan length {n}{extra}")
        lines.extend(f"error: {e}" for e in report["errors"])
        lines.append("ok" if report["ok"] else "FAILED")
    elif cmd == "flip":
        for f in report["flips"]:
            lines.append(f"flip edge {f['edge']}: e = {f['e']}  f = {f['f']}")
            lines.append(f"  mu = {f['mu']} (triangle {f['mu_triangle']})  nu = {f['nu']} (triangle {f['nu_triangle']})")
            lines.append(f"  ef-(ac+bd) {f['ef_minus_ac_bd']:.3e}  double-flip residual {f['double_flip_residual']:.3e}")
    elif cmd == "monodromy":
        for r in report["punctures"]:
            lines.append(f"puncture {r['puncture']}: {r['type']}, fan length {r['fan_length']}")
            for k in ("star0", "star1", "star2", "star3"):
                lines.append(f"  {k} = {r[k]}")
            lines.append(f"  closed form vs product {r['closed_form_error']:.3e} ({'agree' if r['agrees'] else 'DISAGREE'})")
            lines.append(f"  constraint residual {r['constraint_residual']:.3e}  osp residual {r['osp_residual']:.3e}")
    elif cmd == "constrain":
        lines.append(f"rank {report['rank']}, n_R {report['n_ramond']}, n_NS {report['n_ns']}")
        lines.append(f"odd dimension {report['odd_dimension']} (free odd parameters {report['free_odd']})")
        for p, r in report["residuals"].items():
            lines.append(f"puncture {p}: residual {r:.3e}")
    elif cmd == "generate":
        lines.append(f"genus {report['genus']}, {report['punctures']} punctures: "
                     f"{report['edges']} edges, {report['triangles']} triangles")
    for k, v in sorted(report.get("written", {}).items()):
        lines.append(f"wrote {k}: {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", help="surface JSON file")
    common.add_argument("--coords", help="coordinates JSON file")
    common.add_argument("--tolerance", type=_positive_float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="output file")

    parser = argparse.ArgumentParser(prog="superteich", description="Super Teichmueller coordinates and puncture monodromy.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a triangulation and its coordinates")
    p = sub.add_parser("flip", parents=[common], help="flip edges and write the new surface and coordinates")
    p.add_argument("edges", type=int, nargs="+")
    p.add_argument("--surface-out", help="where to write the flipped surface (default: <out>.surface.json)")
    p = sub.add_parser("monodromy", parents=[common], help="puncture monodromies and their classification")
    p.add_argument("--puncture", type=int, default=None, help="single puncture id (default: all)")
    sub.add_parser("constrain", parents=[common], help="impose the Ramond constraints")
    p = sub.add_parser("generate", parents=[common], help="random decorated surface")
    p.add_argument("--genus", type=int, required=True)
    p.add_argument("--punctures", type=int, required=True)
    p.add_argument("--flips", type=int, default=10)
    p.add_argument("--surface-out")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "flip": cmd_flip,
    "monodromy": cmd_monodromy,
    "constrain": cmd_constrain,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_IO if exc.code else EXIT_OK
    try:
        code, report = COMMANDS[args.command](args)
    except (io.FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DomainFailure, SuperTeichError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    text = io.dumps(report) if args.format == "json" else render_text(report)
    if args.out and args.command in ("validate", "monodromy"):
        io.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

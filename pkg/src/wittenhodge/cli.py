"""Command line: ``wittenhodge {mesh gen, mesh verify, run, verify-all, sweep}``.

Exit codes: 0 pass, 1 a check failed, 2 usage or validation error,
3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import decomp
from .meshes import GENERATORS, ParameterError, generate_mesh
from .problem import ValidationError, load_problem
from .scenarios import (PROFILES, load_scenario, mesh_document, run_scenario,
                        verify_all)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _value(text):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _params(pairs):
    out = {}
    for p in pairs:
        if "=" not in p:
            raise ValidationError(f"expected key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = _value(v.strip())
    return out


def _write(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def cmd_mesh_gen(args):
    params = _params(args.params)
    if args.order is not None:
        params["order"] = args.order
    try:
        doc = generate_mesh(args.kind, **params)
    except (ParameterError, TypeError) as exc:
        raise ValidationError(str(exc)) from exc
    _write(json.dumps(doc) + "\n", args.out)
    return EXIT_PASS


def cmd_mesh_verify(args):
    try:
        doc = json.loads(Path(args.mesh).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read mesh: {exc}") from exc
    problem = load_problem(doc)
    out = {"valid": True, **problem.diagnostics,
           "has_boundary": bool(problem.has_boundary)}
    _write(json.dumps(out, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_PASS


def cmd_run(args):
    sc = load_scenario(args.scenario)
    report = run_scenario(sc, seed=args.seed, tol_profile=args.tol_profile)
    _write(report.to_json(), args.out)
    s = report.summary
    print(f"{sc.id}: {'pass' if report.passed else 'FAIL'} "
          f"({s['n_checks'] - s['n_failed']}/{s['n_checks']} checks)",
          file=sys.stderr)
    for name in s["failed"]:
        print(f"  failed: {name}", file=sys.stderr)
    return report.exit_code


def cmd_verify_all(args):
    res = verify_all(args.directory, out_dir=args.out, seed=args.seed,
                     tol_profile=args.tol_profile, jobs=args.jobs)
    print(res.table())
    for r in res.rows:
        if r.get("message"):
            print(f"  {r['id']}: {r['message']}", file=sys.stderr)
    return res.exit_code


def cmd_sweep(args):
    sc = load_scenario(args.scenario)
    s_values = args.s if args.s else sc.angle_s_values
    mesh = sc.angle_mesh or sc.mesh
    problem = load_problem(mesh_document(sc, mesh))
    if not problem.has_boundary:
        raise ValidationError("angle sweeps need a manifold with boundary")
    entries = decomp.angle_sweep(problem, s_values)
    if args.out in (None, "-"):
        decomp.write_sweep_csv(entries, sys.stdout)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            decomp.write_sweep_csv(entries, fh)
    bad = 0
    for e in entries:
        if e.status != "ok":
            print(f"s={e.s}: {e.status} {e.message}".rstrip(), file=sys.stderr)
            bad += e.s != 0.0
    return EXIT_FAIL if bad else EXIT_PASS


def build_parser():
    p = _Parser(prog="wittenhodge",
                description="Witten-Hodge decompositions on symmetric meshes")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-profile", choices=PROFILES, default="default")
    common.add_argument("--jobs", type=int, default=1)

    mesh = sub.add_parser("mesh", help="mesh generation and validation")
    msub = mesh.add_subparsers(dest="mesh_verb", required=True,
                               parser_class=_Parser)
    g = msub.add_parser("gen", parents=[common], help="generate a mesh document")
    g.add_argument("kind", choices=sorted(GENERATORS))
    g.add_argument("params", nargs="*", help="generator parameters key=value")
    g.add_argument("--order", type=int, default=None)
    g.set_defaults(func=cmd_mesh_gen)
    v = msub.add_parser("verify", parents=[common], help="validate a mesh file")
    v.add_argument("mesh")
    v.set_defaults(func=cmd_mesh_verify)

    r = sub.add_parser("run", parents=[common], help="run one scenario")
    r.add_argument("scenario")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("verify-all", parents=[common],
                       help="run every *.scenario.json in a directory")
    a.add_argument("directory")
    a.set_defaults(func=cmd_verify_all)

    s = sub.add_parser("sweep", parents=[common],
                       help="duality-angle sweep over s, CSV output")
    s.add_argument("scenario")
    s.add_argument("--s", type=float, nargs="*", default=None)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except ValidationError as exc:
        detail = f" {json.dumps(exc.detail, default=str)}" if exc.detail else ""
        print(f"validation error: {exc}{detail}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:                  # noqa: BLE001 - mapped to exit 3
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

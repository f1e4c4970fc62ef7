"""fqdyn command line: build | relations | verify | report.

Exit codes: 0 pass, 1 a theorem check failed, 2 parse error, 3 validation
error, 4 exactness or resource cap error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from .dynamics import ModelDynamics
from .errors import FqdynError, ParseError
from .geometry import DEFAULT_POINT_CAP, load_model, model_to_json
from .group import subgroup_name
from .relations import relation_basis
from .verify import ALL_CHECKS, Job, exit_code, failed_checks, group_of, run_verification


def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}", exc.pos) from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def _write(path: str | None, data) -> None:
    text = dumps(data)
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load(args):
    data = _read_json(args.input)
    model, spec = load_model(data, cap_points=args.cap_points, threads=args.threads)
    return model, spec


def cmd_build(args) -> int:
    t0 = time.perf_counter()
    model, _ = _load(args)
    _write(args.output, model_to_json(model))
    print(f"built {model.kind} model: {model.npoints} points, W={model.W}, complete={model.complete} "
          f"({time.perf_counter() - t0:.2f}s)", file=sys.stderr)
    return 0


def cmd_relations(args) -> int:
    model, _ = _load(args)
    dyn = ModelDynamics(model, group_of(model))
    G = dyn.G
    basis = relation_basis(G, dyn.subgroups)
    print(f"|G| = {G.order}, {len(dyn.subgroups)} subgroups")
    names = [subgroup_name(G, H) for H in dyn.subgroups]
    for i, (H, name) in enumerate(zip(dyn.subgroups, names)):
        print(f"  H{i}: {name} (order {H.order})")
    if not basis:
        print("no nontrivial relations")
    for rel in basis:
        terms = " ".join(f"{c:+d}*e[{name}]" for c, name in zip(rel.coefficients, names) if c)
        print(f"  {list(rel.coefficients)}   {terms} ~ 0")
    if args.output:
        _write(args.output, {
            "subgroups": [{"name": n, "order": H.order, "members": list(H.members)} for n, H in zip(names, dyn.subgroups)],
            "relations": [list(r.coefficients) for r in basis],
        })
    return 0


def _print_summary(report: dict, out=sys.stdout) -> None:
    m = report.get("model") or {}
    print(f"model: {m.get('points')} points, W={m.get('W')}, complete={m.get('complete')}", file=out)
    if report.get("group"):
        print(f"group: order {report['group']['order']}, {report['group']['subgroup_count']} subgroups, "
              f"{len(report['relations'])} basis relations", file=out)
    by_kind: dict[str, list] = {}
    for rec in report.get("checks", []):
        by_kind.setdefault(rec["check"], []).append(rec)
    for kind, recs in by_kind.items():
        ok = sum(r.get("passed") is True for r in recs)
        bad = sum(r.get("passed") is False for r in recs)
        info = sum(r.get("passed") is None for r in recs)
        line = f"check {kind}: {ok} passed, {bad} failed"
        if info:
            line += f", {info} forced (not judged)"
        print(line, file=out)
    for rec in failed_checks(report):
        print(f"  FAILED {rec['check']}: {json.dumps({k: rec[k] for k in rec if k not in ('product',)})}", file=out)
    if report.get("error"):
        print(f"error: {report['error']['type']}: {report['error']['message']}", file=out)
    print(f"exit code {exit_code(report)}", file=out)


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    model, spec = _load(args)
    build_time = time.perf_counter() - t0
    n_values = args.n if args.n is not None else (spec.n_values if spec else [1])
    n_max = args.nmax if args.nmax is not None else (spec.n_max if spec else 8)
    checks = None
    if args.checks:
        checks = tuple(c.strip() for c in args.checks.split(",") if c.strip())
    job = Job(checks=checks, n_values=tuple(n_values), n_max=n_max, relations=[tuple(r) for r in args.relation or []],
              force=args.force, threads=args.threads)
    report = run_verification(model, job)
    report["timings"]["build"] = build_time
    if args.output:
        _write(args.output, report)
    _print_summary(report)
    return exit_code(report)


def cmd_report(args) -> int:
    report = _read_json(args.input)
    _print_summary(report)
    return exit_code(report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fqdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="variety spec, abstract model or model JSON")
        p.add_argument("-o", "--output", help="where to write JSON output")
        p.add_argument("--cap-points", type=int, default=DEFAULT_POINT_CAP, help="max coordinate tuples to enumerate")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("build", help="enumerate a variety spec into a model file")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("relations", help="list subgroups and a basis of idempotent relations")
    common(p)
    p.set_defaults(func=cmd_relations)

    p = sub.add_parser("verify", help="run theorem checks and write a report")
    common(p)
    p.add_argument("--checks", help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
    p.add_argument("--n", type=_int_list, help="extension degrees for checks A and B, e.g. 1,2,3")
    p.add_argument("--nmax", type=int, help="zeta truncation degree for checks C and D")
    p.add_argument("--relation", type=_int_list, action="append",
                   help="extra coefficient vector to check (repeatable)")
    p.add_argument("--force", action="store_true", help="report raw sums for vectors that are not relations")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="summarise a report JSON; exit code follows its content")
    p.add_argument("input")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FqdynError as exc:
        print(f"fqdyn: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())

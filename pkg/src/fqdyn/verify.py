"""The verification pipeline behind ``fqdyn verify``: model -> group ->
relations -> per-theorem records, collected into one report dictionary."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import __version__
from .dynamics import (
    ModelDynamics,
    check_iH_bijection,
    compute_bounds,
    count_table,
    lemma_period_check,
    rational_periods,
)
from .errors import FqdynError, ValidationError
from .geometry import EquivariantModel, exactness_check
from .group import FiniteGroup, close_group, subgroup_name
from .relations import IdempotentRelation, check_relation, relation_basis
from .zeta import theorem_C_check, theorem_D_check

ALL_CHECKS = ("A", "B", "C", "D", "bounds", "iH", "lemma")
NEEDS_ENDOMORPHISM = {"B", "D", "bounds", "iH", "lemma"}


@dataclass
class Job:
    checks: tuple[str, ...] | None = None
    n_values: tuple[int, ...] = (1,)
    n_max: int = 8
    relations: list[tuple[int, ...]] = field(default_factory=list)
    force: bool = False
    threads: int = 1


def group_of(model: EquivariantModel) -> FiniteGroup:
    return close_group(model.generators, npoints=model.npoints, frob=model.frob, f_map=model.f_map)


def describe(dyn: ModelDynamics) -> dict:
    G = dyn.G
    return {
        "group": {
            "order": G.order,
            "elements": G.names,
            "generators": [G.names[i] for i in G.generator_indices],
            "subgroup_count": len(dyn.subgroups),
        },
        "subgroups": [
            {"name": subgroup_name(G, H), "order": H.order, "members": list(H.members), "member_names": [G.names[i] for i in H.members]}
            for H in dyn.subgroups
        ],
    }


class _Certificates:
    def __init__(self, model: EquivariantModel):
        self.model = model
        self.used: dict[tuple[int, int], bool] = {}

    def need(self, n: int, h: int) -> None:
        self.used[(n, h)] = exactness_check(self.model, n, h)

    def to_json(self) -> list[dict]:
        m = self.model
        return [
            {"n": n, "h": h, "W": m.W, "complete": m.complete, "required_divisor": n * math.lcm(*range(1, h + 1)), "certified": ok}
            for (n, h), ok in sorted(self.used.items())
        ]


def run_verification(model: EquivariantModel, job: Job, dyn: ModelDynamics | None = None) -> dict:
    """Run the requested checks; errors are recorded in the report, not raised."""
    timings: dict[str, float] = {}
    report: dict = {
        "version": __version__,
        "spec_hash": model.spec_hash,
        "model": model.summary(),
        "group": None,
        "subgroups": [],
        "relations": [],
        "checks": [],
        "exactness": [],
        "error": None,
        "timings": timings,
    }
    certs = _Certificates(model)
    try:
        t0 = time.perf_counter()
        if dyn is None:
            dyn = ModelDynamics(model, group_of(model))
        report.update(describe(dyn))
        timings["group"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        basis = relation_basis(dyn.G, dyn.subgroups)
        report["relations"] = [list(r.coefficients) for r in basis]
        timings["relations"] = time.perf_counter() - t0

        checks = tuple(job.checks) if job.checks is not None else tuple(
            c for c in ALL_CHECKS if model.f_map is not None or c not in NEEDS_ENDOMORPHISM
        )
        unknown = set(checks) - set(ALL_CHECKS)
        if unknown:
            raise ValidationError(f"unknown checks {sorted(unknown)}")
        if model.f_map is None and NEEDS_ENDOMORPHISM & set(checks):
            raise ValidationError(f"checks {sorted(NEEDS_ENDOMORPHISM & set(checks))} need an endomorphism")

        targets: list[tuple[str, IdempotentRelation, bool]] = [(f"basis[{i}]", r, False) for i, r in enumerate(basis)]
        for j, coeffs in enumerate(job.relations):
            ok = check_relation(dyn.G, dyn.subgroups, coeffs)
            if not ok and not job.force:
                raise ValidationError(f"explicit relation {list(coeffs)} is not an idempotent relation (use --force)")
            targets.append((f"explicit[{j}]", IdempotentRelation(tuple(coeffs)), not ok))

        t0 = time.perf_counter()
        dyn.precompute(job.threads)
        timings["quotients"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        for label, rel, forced in targets:
            for name, periodic in (("A", False), ("B", True)):
                if name not in checks:
                    continue
                for n in job.n_values:
                    counts = {}
                    for i, c in enumerate(rel.coefficients):
                        if c:
                            certs.need(n, dyn.subgroups[i].order)
                            counts[str(i)] = (dyn.periodic_rational_count if periodic else dyn.quotient_rational_count)(i, n)
                    residual = sum(c * counts[str(i)] for i, c in enumerate(rel.coefficients) if c)
                    report["checks"].append({
                        "check": name, "relation": label, "coefficients": list(rel.coefficients), "n": n,
                        "counts": counts, "residual": residual, "forced": forced,
                        "passed": None if forced else residual == 0,
                    })
            for name, periodic, fn in (("C", False, theorem_C_check), ("D", True, theorem_D_check)):
                if name not in checks:
                    continue
                for i, c in enumerate(rel.coefficients):
                    if c:
                        for n in range(1, job.n_max + 1):
                            certs.need(n, dyn.subgroups[i].order)
                table = count_table(dyn, rel, job.n_max, periodic=periodic)
                rec = fn(table, rel.coefficients, job.n_max)
                rec.update({
                    "check": name, "relation": label, "coefficients": list(rel.coefficients), "forced": forced,
                    "counts": {str(i): v for i, v in table.items()},
                })
                if forced:
                    rec["passed"] = None
                report["checks"].append(rec)

        if {"bounds", "iH", "lemma"} & set(checks):
            for H in dyn.subgroups:
                certs.need(1, H.order)
            bounds = compute_bounds(dyn)
            if "bounds" in checks:
                sub, _, _ = dyn.per_N(bounds.N)
                report["checks"].append({
                    "check": "bounds", **bounds.to_json(),
                    "per_N_points": sub.npoints, "per_N_invariant": True,
                    "passed": bounds.M == math.factorial(max(bounds.rational_counts, default=0)) and bounds.N == dyn.G.order * bounds.M,
                })
            if "iH" in checks:
                for i in range(len(dyn.subgroups)):
                    rec = check_iH_bijection(dyn, i, bounds.N)
                    report["checks"].append({"check": "iH", **rec})
            if "lemma" in checks:
                for i in range(len(dyn.subgroups)):
                    periods = rational_periods(dyn, i)
                    report["checks"].append({
                        "check": "lemma", "subgroup": i, "M": str(bounds.M),
                        "max_period": max(periods, default=0),
                        "passed": lemma_period_check(dyn, i, bounds.M),
                    })
        timings["checks"] = time.perf_counter() - t0
    except FqdynError as exc:
        report["error"] = {"type": type(exc).__name__, "exit_code": exc.exit_code, "message": str(exc)}
    report["exactness"] = certs.to_json()
    return report


def exit_code(report: dict) -> int:
    """0 all checks pass, 1 some check failed, otherwise the error's code."""
    if report.get("error"):
        return int(report["error"]["exit_code"])
    if any(rec.get("passed") is False for rec in report.get("checks", [])):
        return 1
    return 0


def failed_checks(report: dict) -> list[dict]:
    return [rec for rec in report.get("checks", []) if rec.get("passed") is False]

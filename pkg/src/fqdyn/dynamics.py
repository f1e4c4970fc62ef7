"""Quotients V/H, periodic points of the induced maps, and the period bounds.

Rational points of V/H over F_{q^n} are the H-orbits that Frobenius^n maps
to themselves.  The induced endomorphism f_H sends the orbit of P to the
orbit of f(P); it is well defined because f commutes with H.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import maps
from .errors import RelationError, ValidationError
from .geometry import EquivariantModel, require_exact
from .group import FiniteGroup, Subgroup, all_subgroups
from .relations import IdempotentRelation, check_relation


@dataclass
class QuotientSystem:
    """H-orbits of a model with the maps they inherit.

    Orbit i has least member ``reps[i]``; ``orbit_of`` sends a point to its
    orbit.  Orbits are numbered in increasing order of their least member.
    """

    subgroup: Subgroup
    reps: np.ndarray
    sizes: np.ndarray
    orbit_of: np.ndarray
    frob_q: np.ndarray
    f_q: np.ndarray | None

    @property
    def norbits(self) -> int:
        return len(self.reps)

    def orbits(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.norbits)]
        for p, o in enumerate(self.orbit_of.tolist()):
            out[o].append(p)
        return out


def _induced(orbit_of: np.ndarray, reps: np.ndarray, f: np.ndarray, what: str) -> np.ndarray:
    fq = orbit_of[f[reps]]
    if not np.array_equal(orbit_of[f], fq[orbit_of]):
        raise ValidationError(f"{what} does not descend to the quotient")
    return fq


def quotient_orbits(model: EquivariantModel, G: FiniteGroup, H: Subgroup) -> QuotientSystem:
    n = model.npoints
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return QuotientSystem(H, empty, empty, empty, empty, empty if model.f_map is not None else None)
    if H.order == 1:
        ident = maps.identity(n)
        return QuotientSystem(H, ident, np.ones(n, dtype=np.int64), ident, model.frob, model.f_map)
    # H is a group, so the orbit of p is {h(p)} and its least member is min_h h(p)
    rep_of = G.perm(0).copy()
    for h in H.members[1:]:
        np.minimum(rep_of, G.perm(h), out=rep_of)
    reps = np.flatnonzero(rep_of == maps.identity(n)).astype(rep_of.dtype)
    lookup = np.empty(n, dtype=rep_of.dtype)
    lookup[reps] = maps.identity(len(reps))
    orbit_of = lookup[rep_of]
    del rep_of, lookup
    sizes = np.bincount(orbit_of, minlength=len(reps))
    if np.any(H.order % sizes):
        raise ValidationError("an orbit size does not divide |H|")
    frob_q = _induced(orbit_of, reps, model.frob, "Frobenius")
    f_q = None
    if model.f_map is not None:
        f_q = _induced(orbit_of, reps, model.f_map, "the endomorphism")
        if not np.array_equal(f_q[frob_q], frob_q[f_q]):
            raise ValidationError("induced Frobenius and endomorphism do not commute")
    return QuotientSystem(H, reps, sizes, orbit_of, frob_q, f_q)


def _stable(Q: QuotientSystem, n: int) -> np.ndarray:
    return maps.map_power(Q.frob_q, n) == maps.identity(Q.norbits)


class ModelDynamics:
    """A model, its closed group and all subgroups, with cached quotients."""

    def __init__(self, model: EquivariantModel, G: FiniteGroup, subgroups: list[Subgroup] | None = None):
        self.model = model
        self.G = G
        self.subgroups = subgroups if subgroups is not None else all_subgroups(G)
        self._quotients: dict[int, QuotientSystem] = {}
        self._periodic: dict[int, np.ndarray] = {}
        self._per_N: dict[int, tuple] = {}

    def quotient(self, i: int) -> QuotientSystem:
        if i not in self._quotients:
            self._quotients[i] = quotient_orbits(self.model, self.G, self.subgroups[i])
        return self._quotients[i]

    def precompute(self, threads: int = 1) -> None:
        todo = [i for i in range(len(self.subgroups)) if i not in self._quotients]
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                results = list(pool.map(lambda i: quotient_orbits(self.model, self.G, self.subgroups[i]), todo))
        else:
            results = [quotient_orbits(self.model, self.G, self.subgroups[i]) for i in todo]
        self._quotients.update(zip(todo, results))

    def periodic(self, i: int) -> np.ndarray:
        if i not in self._periodic:
            Q = self.quotient(i)
            if Q.f_q is None:
                raise ValidationError("the model has no endomorphism")
            self._periodic[i] = maps.periodic_mask(Q.f_q)
        return self._periodic[i]

    def per_N(self, N: int) -> tuple[EquivariantModel, FiniteGroup, np.ndarray]:
        if N not in self._per_N:
            self._per_N[N] = per_N_submodel(self.model, self.G, N)
        return self._per_N[N]

    def require_exact(self, i: int, n: int) -> None:
        require_exact(self.model, n, self.subgroups[i].order)

    def quotient_rational_count(self, i: int, n: int) -> int:
        self.require_exact(i, n)
        return int(np.count_nonzero(_stable(self.quotient(i), n)))

    def periodic_rational_count(self, i: int, n: int) -> int:
        self.require_exact(i, n)
        return int(np.count_nonzero(_stable(self.quotient(i), n) & self.periodic(i)))


def quotient_rational_count(dyn: ModelDynamics, i: int, n: int) -> int:
    """|(V/H_i)(F_{q^n})|: Frobenius^n-stable H_i-orbits."""
    return dyn.quotient_rational_count(i, n)


def periodic_rational_count(dyn: ModelDynamics, i: int, n: int) -> int:
    """|Per(V/H_i, f_H)(F_{q^n})|: stable orbits on a cycle of f_H."""
    return dyn.periodic_rational_count(i, n)


@dataclass(frozen=True)
class PeriodBounds:
    M: int
    N: int
    rational_counts: tuple[int, ...]

    def to_json(self) -> dict:
        # M and N are factorial-sized; keep them exact as decimal strings
        return {"M": str(self.M), "N": str(self.N), "rational_counts": list(self.rational_counts)}


def compute_bounds(dyn: ModelDynamics) -> PeriodBounds:
    """M = max_H |(V/H)(F_q)|!, N = |G| M."""
    counts = tuple(dyn.quotient_rational_count(i, 1) for i in range(len(dyn.subgroups)))
    M = math.factorial(max(counts, default=0))
    return PeriodBounds(M, dyn.G.order * M, counts)


def compute_M(dyn: ModelDynamics) -> int:
    return compute_bounds(dyn).M


def compute_N(dyn: ModelDynamics) -> int:
    return compute_bounds(dyn).N


def per_N_submodel(model: EquivariantModel, G: FiniteGroup, N: int) -> tuple[EquivariantModel, FiniteGroup, np.ndarray]:
    """Restriction to Per_N = {p : f^N(p) = p}.

    Returns the sub-model, the restricted group (same element order and
    table) and the parent index of every sub-model point.  Invariance under
    Frobenius, f and every element of G is asserted.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if model.f_map is None:
        raise ValidationError("the model has no endomorphism")
    mask = maps.map_power(model.f_map, N) == maps.identity(model.npoints)
    if mask.all():
        # everything is periodic: invariance is automatic
        return model, G, maps.identity(model.npoints)
    keep = np.flatnonzero(mask)
    new_index = np.full(model.npoints, -1, dtype=maps.index_dtype(model.npoints))
    new_index[keep] = maps.identity(len(keep))

    def restrict(f: np.ndarray, what: str) -> np.ndarray:
        img = f[keep]
        if not mask[img].all():
            raise ValidationError(f"Per_N is not invariant under {what}")
        return new_index[img]

    elements = [restrict(g, f"group element {G.names[i]}") for i, g in enumerate(G.elements)]
    sub = EquivariantModel(
        npoints=len(keep),
        frob=restrict(model.frob, "Frobenius"),
        generators=[(name, restrict(g, f"generator {name}")) for name, g in model.generators],
        f_map=restrict(model.f_map, "the endomorphism"),
        W=model.W,
        complete=model.complete,
        completeness=model.completeness,
        kind=model.kind,
        q=model.q,
        spec_hash=model.spec_hash,
        codes=model.codes[keep] if model.codes is not None else None,
        field=model.field,
        base=model.base,
        variables=model.variables,
    )
    subG = FiniteGroup(G.mult, G.inverse, G.names, elements, G.generator_indices)
    return sub, subG, keep


def check_iH_bijection(dyn: ModelDynamics, i: int, N: int) -> dict:
    """Compare (Per_N/H)(F_q), Per_N(V/H, f_H)(F_q) and Per(V/H, f_H)(F_q).

    The orbit-level map sends a rational H-orbit of Per_N to the orbit of V/H
    containing it; checks that this is well defined, injective and onto the
    rational points of V/H whose f_H-period divides N.
    """
    H = dyn.subgroups[i]
    dyn.require_exact(i, 1)
    model = dyn.model
    sub, subG, parent = dyn.per_N(N)
    Q = dyn.quotient(i)
    Qsub = Q if sub is model else quotient_orbits(sub, subG, H)

    sub_rational = np.flatnonzero(_stable(Qsub, 1))
    count_a = len(sub_rational)

    fN = maps.map_power(Q.f_q, N)
    per_N_mask = _stable(Q, 1) & (fN == maps.identity(Q.norbits))
    count_b = int(np.count_nonzero(per_N_mask))
    count_c = dyn.periodic_rational_count(i, 1)

    # i_H on every rational orbit, evaluated at every member (well-definedness)
    images = Q.orbit_of[parent]
    image_of = images[Qsub.reps]
    well_defined = bool(np.array_equal(images, image_of[Qsub.orbit_of]))
    targets = image_of[sub_rational]
    lands_in_target = bool(per_N_mask[targets].all()) if count_a else True
    injective = len(np.unique(targets)) == count_a
    surjective = set(np.flatnonzero(per_N_mask).tolist()) <= set(targets.tolist())
    return {
        "subgroup": i,
        "N": str(N),
        "count_per_N_quotient": count_a,
        "count_quotient_per_N": count_b,
        "count_quotient_periodic": count_c,
        "well_defined": well_defined and lands_in_target,
        "injective": injective,
        "surjective": surjective,
        "counts_equal": count_a == count_b == count_c,
        "passed": well_defined and lands_in_target and injective and surjective and count_a == count_b == count_c,
    }


def rational_periods(dyn: ModelDynamics, i: int) -> list[int]:
    """f_H-periods of the rational periodic points of V/H_i."""
    dyn.require_exact(i, 1)
    Q = dyn.quotient(i)
    pts = np.flatnonzero(_stable(Q, 1) & dyn.periodic(i)).tolist()
    period = {}
    fq = Q.f_q
    for start in pts:
        if start in period:
            continue
        cycle = [start]
        x = int(fq[start])
        while x != start:
            cycle.append(x)
            x = int(fq[x])
        for y in cycle:
            period[y] = len(cycle)
    return [period[p] for p in pts]


def lemma_period_check(dyn: ModelDynamics, i: int, M: int) -> bool:
    return all(M % per == 0 for per in rational_periods(dyn, i))


def _coefficients(relation) -> tuple[int, ...]:
    return relation.coefficients if isinstance(relation, IdempotentRelation) else tuple(int(c) for c in relation)


def _checked(dyn: ModelDynamics, relation, force: bool) -> tuple[int, ...]:
    coeffs = _coefficients(relation)
    if not check_relation(dyn.G, dyn.subgroups, coeffs) and not force:
        raise RelationError("coefficients do not define an idempotent relation (pass force=True to sum anyway)")
    return coeffs


def theorem_A_residual(dyn: ModelDynamics, relation, n: int, force: bool = False) -> int:
    """sum_H n_H |(V/H)(F_{q^n})|; zero for every genuine relation."""
    coeffs = _checked(dyn, relation, force)
    return sum(c * dyn.quotient_rational_count(i, n) for i, c in enumerate(coeffs) if c)


def theorem_B_residual(dyn: ModelDynamics, relation, n: int, force: bool = False) -> int:
    """sum_H n_H |Per(V/H, f_H)(F_{q^n})|."""
    coeffs = _checked(dyn, relation, force)
    return sum(c * dyn.periodic_rational_count(i, n) for i, c in enumerate(coeffs) if c)


def count_table(dyn: ModelDynamics, relation, n_max: int, periodic: bool = False) -> dict[int, list[int]]:
    """Counts for n = 1..n_max for each subgroup with a nonzero coefficient."""
    coeffs = _coefficients(relation)
    get = dyn.periodic_rational_count if periodic else dyn.quotient_rational_count
    return {i: [get(i, n) for n in range(1, n_max + 1)] for i, c in enumerate(coeffs) if c}


"""Random abstract models: disjoint unions of coset spaces G/K.

Frobenius and the endomorphism are drawn from the G-equivariant self-maps
of the union, which are enumerated by brute force: an equivariant map is
fixed by where it sends each orbit's base coset K, and K may go to any point
whose stabiliser contains K.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from .group import FiniteGroup, Subgroup, all_subgroups, close_group, left_cosets


def klein_four() -> FiniteGroup:
    return close_group([("u", np.array([1, 0, 3, 2])), ("v", np.array([2, 3, 0, 1]))])


def symmetric_group_3() -> FiniteGroup:
    return close_group([("s", np.array([1, 0, 2])), ("r", np.array([1, 2, 0]))])


def coset_action(G: FiniteGroup, stabilizers: list[Subgroup]):
    """Action of G on the disjoint union of the G/K.

    Returns (perms, reps, lifts): ``perms[g]`` is the permutation of g,
    ``reps`` the index of each base coset K, and ``lifts[z]`` an element g
    with g(base of z's orbit) = z.
    """
    points: list[tuple[int, frozenset[int]]] = []
    reps = []
    for j, K in enumerate(stabilizers):
        cosets = sorted(left_cosets(G, K), key=min)
        reps.append(len(points))
        points.extend((j, c) for c in cosets)
    where = {pt: i for i, pt in enumerate(points)}
    perms = []
    for g in range(G.order):
        img = []
        for j, c in points:
            x = min(c)
            gc = next(pt for pt in points if pt[0] == j and G.mult[g][x] in pt[1])
            img.append(where[gc])
        perms.append(np.array(img, dtype=np.int64))
    lifts = [min(c) for _, c in points]
    return perms, reps, lifts


def equivariant_maps(G: FiniteGroup, stabilizers: list[Subgroup], perms, reps, lifts) -> list[np.ndarray]:
    """Every self-map of the union commuting with G."""
    n = len(lifts)
    orbit_index = []
    for j, r in enumerate(reps):
        end = reps[j + 1] if j + 1 < len(reps) else n
        orbit_index.extend([j] * (end - r))
    choices = []
    for j, K in enumerate(stabilizers):
        choices.append([y for y in range(n) if all(perms[k][y] == y for k in K.members)])
    out = []
    for targets in itertools.product(*choices):
        f = np.array([perms[lifts[z]][targets[orbit_index[z]]] for z in range(n)], dtype=np.int64)
        out.append(f)
    return out


def random_model(rng: random.Random, G: FiniteGroup, max_orbits: int = 3, require_faithful: bool = True) -> dict:
    """A random complete abstract model (JSON dialect) with a G-action.

    Frobenius is an equivariant bijection; f is an equivariant map commuting
    with it, non-injective about half the time when one exists.
    """
    subs = all_subgroups(G)
    while True:
        stabs = [rng.choice(subs) for _ in range(rng.randint(1, max_orbits))]
        stabs.sort(key=lambda K: (K.order, K.members))
        perms, reps, lifts = coset_action(G, stabs)
        if require_faithful:
            ident = np.arange(len(lifts))
            if any(np.array_equal(perms[g], ident) for g in range(1, G.order)):
                continue
        break
    centralizer = equivariant_maps(G, stabs, perms, reps, lifts)
    bijections = [f for f in centralizer if len(set(f.tolist())) == len(f)]
    frob = rng.choice(bijections)
    commuting = [f for f in centralizer if np.array_equal(f[frob], frob[f])]
    non_injective = [f for f in commuting if len(set(f.tolist())) < len(f)]
    if non_injective and rng.random() < 0.5:
        f = rng.choice(non_injective)
    else:
        f = rng.choice(commuting)
    return {
        "kind": "abstract",
        "points": len(lifts),
        "frobenius": frob.tolist(),
        "generators": [{"name": G.names[g], "map": perms[g].tolist()} for g in G.generator_indices],
        "endomorphism": f.tolist(),
        "complete": True,
    }

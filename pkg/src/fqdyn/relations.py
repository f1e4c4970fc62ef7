"""Idempotent relations sum n_H e_H ~ 0 among the subgroups of G.

Criterion used: the combination is killed by every rational character iff
sum n_H pi_H vanishes as a class function, where pi_H is the permutation
character of G on G/H.  By Frobenius reciprocity chi(e_H) = <chi, pi_H> for
every irreducible chi; the pi_H and the rational irreducible characters span
the same space of rational-valued class functions, and the latter are
pairwise orthogonal, so every pairing vanishes exactly when the class
function itself does.  No character table is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError
from .group import FiniteGroup, Subgroup, conjugacy_classes, permutation_character


@dataclass(frozen=True)
class IdempotentRelation:
    coefficients: tuple[int, ...]

    def is_trivial(self) -> bool:
        return not any(self.coefficients)

    def __len__(self) -> int:
        return len(self.coefficients)


def character_matrix(G: FiniteGroup, subgroups: list[Subgroup]) -> list[list[int]]:
    """A[c][H] = pi_H at conjugacy class c."""
    classes = conjugacy_classes(G)
    cols = [permutation_character(G, H, classes).values for H in subgroups]
    return [[int(cols[j][i]) for j in range(len(subgroups))] for i in range(len(classes))]


def check_relation(G: FiniteGroup, subgroups: list[Subgroup], relation) -> bool:
    coeffs = relation.coefficients if isinstance(relation, IdempotentRelation) else tuple(relation)
    if len(coeffs) != len(subgroups):
        raise ValidationError(f"relation has {len(coeffs)} coefficients for {len(subgroups)} subgroups")
    A = character_matrix(G, subgroups)
    return all(sum(a * n for a, n in zip(row, coeffs)) == 0 for row in A)


def _primitive(v: list[int]) -> list[int]:
    g = math.gcd(*v)
    if g == 0:
        return v
    v = [x // g for x in v]
    first = next(x for x in v if x)
    return [-x for x in v] if first < 0 else v


def integer_kernel(A: list[list[int]]) -> list[tuple[int, ...]]:
    """Primitive integer vectors spanning {v : A v = 0} over Q.

    Integer row reduction (no fractions): pivots are chosen leftmost column
    first, then smallest row index; rows are divided by their content to
    keep entries small.  One vector per free column, in column order.
    """
    rows = [list(map(int, r)) for r in A]
    ncols = len(rows[0]) if rows else 0
    pivots: list[tuple[int, int]] = []  # (row, col)
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                a, b = pr[c], rows[i][c]
                rows[i] = [a * x - b * y for x, y in zip(rows[i], pr)]
                g = math.gcd(*rows[i])
                if g > 1:
                    rows[i] = [x // g for x in rows[i]]
        pivots.append((r, c))
        r += 1
        if r == len(rows):
            break
    pivot_cols = {c for _, c in pivots}
    basis = []
    for j in range(ncols):
        if j in pivot_cols:
            continue
        # v_j = L, v_pc = -row[j] * L / row[pc], with L the lcm of the pivots
        L = 1
        for pr_i, pc in pivots:
            L = math.lcm(L, abs(rows[pr_i][pc]))
        v = [0] * ncols
        v[j] = L
        for pr_i, pc in pivots:
            v[pc] = -rows[pr_i][j] * L // rows[pr_i][pc]
        basis.append(tuple(_primitive(v)))
    return basis


def relation_basis(G: FiniteGroup, subgroups: list[Subgroup]) -> list[IdempotentRelation]:
    basis = [IdempotentRelation(v) for v in integer_kernel(character_matrix(G, subgroups))]
    for rel in basis:
        assert check_relation(G, subgroups, rel)
    return basis

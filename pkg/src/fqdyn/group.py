"""Finite groups as multiplication tables, optionally realised by permutations.

Element 0 is always the identity.  ``mult[i][j]`` is the index of ``g_i g_j``;
for permutation groups this is the composition ``g_i o g_j`` (apply ``g_j``
first).
"""

from __future__ import annotations

import functools
import hashlib
import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import maps
from .errors import CapError, ValidationError

DEFAULT_CLOSURE_BOUND = 10_000


@dataclass
class FiniteGroup:
    mult: list[list[int]]
    inverse: list[int]
    names: list[str]
    elements: list[np.ndarray] | None = None
    generator_indices: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return len(self.mult)

    def __len__(self) -> int:
        return len(self.mult)

    def perm(self, i: int) -> np.ndarray:
        if self.elements is None:
            raise ValueError("abstract group has no permutation realisation")
        return self.elements[i]

    def element_order(self, i: int) -> int:
        k, x = 1, i
        while x != 0:
            x = self.mult[x][i]
            k += 1
        return k

    @classmethod
    def from_table(cls, mult, names=None) -> FiniteGroup:
        """Abstract group from a Cayley table; checks the group axioms."""
        mult = [[int(x) for x in row] for row in mult]
        n = len(mult)
        if n == 0 or any(len(row) != n for row in mult):
            raise ValidationError("multiplication table must be square and non-empty")
        if any(not 0 <= x < n for row in mult for x in row):
            raise ValidationError("table entries out of range")
        if any(mult[0][j] != j or mult[j][0] != j for j in range(n)):
            raise ValidationError("element 0 is not the identity")
        inverse = []
        for i in range(n):
            inv = [j for j in range(n) if mult[i][j] == 0]
            if len(inv) != 1 or mult[inv[0]][i] != 0:
                raise ValidationError(f"element {i} has no two-sided inverse")
            inverse.append(inv[0])
        if n <= 64:
            for a, b, c in itertools.product(range(n), repeat=3):
                if mult[mult[a][b]][c] != mult[a][mult[b][c]]:
                    raise ValidationError("multiplication table is not associative")
        names = list(names) if names else ["e"] + [f"g{i}" for i in range(1, n)]
        return cls(mult, inverse, names)


def _perm_key(a: np.ndarray, b: np.ndarray) -> int:
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return 0
    i = diff[0]
    return -1 if a[i] < b[i] else 1


def close_group(
    generators: list[tuple[str, np.ndarray]],
    npoints: int | None = None,
    frob: np.ndarray | None = None,
    f_map: np.ndarray | None = None,
    bound: int = DEFAULT_CLOSURE_BOUND,
) -> FiniteGroup:
    """Smallest permutation group containing ``generators``.

    Elements are ordered breadth-first by word length; within one length,
    by lexicographic order of the permutation arrays.  Each element is named
    by the first word reaching it.
    """
    if npoints is None:
        npoints = len(generators[0][1]) if generators else (len(frob) if frob is not None else 0)
    generators = [(name, maps.as_index(g, npoints)) for name, g in generators]
    for name, g in generators:
        if frob is not None and not np.array_equal(g[frob], frob[g]):
            raise ValidationError(f"generator {name!r} does not commute with Frobenius")
        if f_map is not None and not np.array_equal(g[f_map], f_map[g]):
            raise ValidationError(f"generator {name!r} does not commute with the endomorphism")

    ident = maps.identity(npoints)
    elements = [ident]
    names = ["e"]
    index: dict[bytes, list[int]] = {_digest(ident): [0]}

    def lookup(perm: np.ndarray) -> int | None:
        for j in index.get(_digest(perm), ()):
            if np.array_equal(elements[j], perm):
                return j
        return None

    layer = [0]
    while layer:
        found: list[tuple[np.ndarray, str]] = []
        for i in layer:
            for gname, g in generators:
                new = g[elements[i]]
                if lookup(new) is not None or any(np.array_equal(new, f) for f, _ in found):
                    continue
                word = gname if names[i] == "e" else f"{gname}*{names[i]}"
                found.append((new, word))
        found.sort(key=functools.cmp_to_key(lambda x, y: _perm_key(x[0], y[0])))
        layer = []
        for perm, word in found:
            if len(elements) >= bound:
                raise CapError(f"group closure exceeds {bound} elements")
            index.setdefault(_digest(perm), []).append(len(elements))
            elements.append(perm)
            names.append(word)
            layer.append(len(elements) - 1)

    n = len(elements)
    mult = [[lookup(elements[i][elements[j]]) for j in range(n)] for i in range(n)]
    inverse = [row.index(0) for row in mult]
    gens = tuple(lookup(maps.as_index(g, npoints)) for _, g in generators)
    return FiniteGroup(mult, inverse, names, elements, gens)


def _digest(perm: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(perm).data, digest_size=16).digest()


@dataclass(frozen=True)
class Subgroup:
    members: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)

    def __contains__(self, g: int) -> bool:
        return g in self.members

    def __len__(self) -> int:
        return len(self.members)


def subgroup(G: FiniteGroup, members) -> Subgroup:
    """Validated subgroup from a collection of element indices."""
    mem = sorted(set(int(m) for m in members))
    s = set(mem)
    if 0 not in s:
        raise ValidationError("subgroup must contain the identity")
    for a in mem:
        if G.inverse[a] not in s:
            raise ValidationError("subset is not closed under inverses")
        for b in mem:
            if G.mult[a][b] not in s:
                raise ValidationError("subset is not closed under multiplication")
    if G.order % len(mem):
        raise ValidationError("subgroup order does not divide the group order")
    return Subgroup(tuple(mem))


def generated(G: FiniteGroup, gens) -> frozenset[int]:
    out = {0}
    frontier = [0]
    gens = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.mult[x][g]
                if y not in out:
                    out.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(out)


def all_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """Every subgroup once, sorted by (order, member list)."""
    found = {generated(G, [g]) for g in range(G.order)}
    frontier = set(found)
    while frontier:
        new = set()
        for A in frontier:
            for B in found:
                J = generated(G, A | B)
                if J not in found and J not in new:
                    new.add(J)
        found |= new
        frontier = new
    subs = [subgroup(G, s) for s in found]
    subs.sort(key=lambda H: (H.order, H.members))
    return subs


def conjugacy_classes(G: FiniteGroup) -> list[list[int]]:
    seen = set()
    classes = []
    for g in range(G.order):
        if g in seen:
            continue
        cls = sorted({G.mult[G.mult[x][g]][G.inverse[x]] for x in range(G.order)})
        seen.update(cls)
        classes.append(cls)
    return classes


def left_cosets(G: FiniteGroup, H: Subgroup) -> list[frozenset[int]]:
    seen = set()
    out = []
    for x in range(G.order):
        if x in seen:
            continue
        c = frozenset(G.mult[x][h] for h in H.members)
        seen |= c
        out.append(c)
    return out


def coset_fixed_count(G: FiniteGroup, H: Subgroup, g: int) -> int:
    """#{xH : g x H = x H}."""
    count = 0
    for c in left_cosets(G, H):
        x = min(c)
        if G.mult[g][x] in c:
            count += 1
    return count


@dataclass(frozen=True)
class ClassFunction:
    classes: tuple[tuple[int, ...], ...]
    values: tuple[Fraction, ...]

    def __add__(self, other: ClassFunction) -> ClassFunction:
        return ClassFunction(self.classes, tuple(a + b for a, b in zip(self.values, other.values)))

    def scale(self, k) -> ClassFunction:
        return ClassFunction(self.classes, tuple(k * v for v in self.values))

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)


def permutation_character(G: FiniteGroup, H: Subgroup, classes=None) -> ClassFunction:
    classes = classes if classes is not None else conjugacy_classes(G)
    vals = tuple(Fraction(coset_fixed_count(G, H, c[0])) for c in classes)
    return ClassFunction(tuple(tuple(c) for c in classes), vals)


def subgroup_name(G: FiniteGroup, H: Subgroup) -> str:
    if H.order == 1:
        return "1"
    if H.order == G.order:
        return "G"
    # greedy generating set, preferring short element names
    order = sorted(H.members[1:], key=lambda i: (len(G.names[i]), i))
    gens: list[int] = []
    span = frozenset([0])
    for x in order:
        if x not in span:
            gens.append(x)
            span = generated(G, gens)
            if len(span) == H.order:
                break
    return "<" + ", ".join(G.names[i] for i in gens) + ">"

"""Affine varieties over F_q as explicit finite models.

A model is the point set V(F_{q^W}) for a chosen working degree W, together
with the q-power Frobenius, the generator automorphisms and the endomorphism
f, each stored as an index array over the points.  Abstract models carry the
same data without any geometry behind it.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import maps
from .errors import CapError, ExactnessError, ParseError, ValidationError
from .field import DEFAULT_SIZE_CAP, FieldDescriptor, FieldElement, build_field, embed_subfield
from .polynomial import PolyExpr, eval_array, expand_univariate, parse_polynomial, upowmod, variables_of

DEFAULT_POINT_CAP = 2**26
# the automatic completeness probe at degree 2W squares the enumeration size
DEFAULT_PROBE_CAP = 2**22
CHUNK = 1 << 16


def spec_hash(data: dict) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class VarietySpec:
    p: int
    e: int
    working_degree: int
    variables: list[str]
    equations: list[str]
    generators: list[tuple[str, list[str]]]
    endomorphism: list[str] | None = None
    n_values: list[int] = dc_field(default_factory=lambda: [1])
    n_max: int = 8
    complete: bool | None = None
    raw: dict = dc_field(default_factory=dict, repr=False)

    @property
    def q(self) -> int:
        return self.p**self.e

    @classmethod
    def from_json(cls, data: dict) -> VarietySpec:
        if not isinstance(data, dict) or data.get("kind", "variety") != "variety":
            raise ParseError("not a variety spec")
        try:
            fld = data["field"]
            gens = []
            for i, g in enumerate(data.get("generators", [])):
                if isinstance(g, dict):
                    gens.append((str(g.get("name", f"g{i}")), [str(t) for t in g["map"]]))
                else:
                    gens.append((f"g{i}", [str(t) for t in g]))
            endo = data.get("endomorphism")
            spec = cls(
                p=int(fld["p"]),
                e=int(fld.get("e", 1)),
                working_degree=int(data.get("working_degree", 1)),
                variables=[str(v) for v in data["variables"]],
                equations=[str(t) for t in data.get("equations", [])],
                generators=gens,
                endomorphism=[str(t) for t in endo] if endo is not None else None,
                n_values=[int(n) for n in data.get("n_values", [1])],
                n_max=int(data.get("n_max", 8)),
                complete=data.get("complete"),
                raw=data,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed variety spec: {exc!r}") from None
        if spec.working_degree < 1:
            raise ParseError("working_degree must be >= 1")
        if len(set(spec.variables)) != len(spec.variables):
            raise ParseError("duplicate variable names")
        return spec

    def with_working_degree(self, W: int) -> VarietySpec:
        raw = {**self.raw, "working_degree": W} if self.raw else {}
        return replace(self, working_degree=W, raw=raw)


@dataclass
class EquivariantModel:
    """Points with Frobenius, generator permutations and an endomorphism.

    Maps are index arrays over ``range(npoints)``.  For variety models
    ``codes`` holds the sorted coordinate codes: the code of (x_1, ..., x_k)
    is sum idx(x_i) Q^(k-i) with Q = q^W, so code order is the lexicographic
    coordinate order.
    """

    npoints: int
    frob: np.ndarray
    generators: list[tuple[str, np.ndarray]]
    f_map: np.ndarray | None
    W: int
    complete: bool
    kind: str = "abstract"
    q: int | None = None
    spec_hash: str = ""
    codes: np.ndarray | None = None
    field: FieldDescriptor | None = None
    base: FieldDescriptor | None = None
    variables: tuple[str, ...] = ()
    # why the model counts as complete: "proved", "probed", "declared" or ""
    completeness: str = ""

    def __post_init__(self):
        n = self.npoints
        self.frob = maps.as_index(self.frob, n)
        self.generators = [(name, maps.as_index(g, n)) for name, g in self.generators]
        if self.f_map is not None:
            self.f_map = maps.as_index(self.f_map, n)

    def coords(self, i: int) -> tuple[FieldElement, ...]:
        if self.codes is None:
            raise ValueError("abstract models have no coordinates")
        code = int(self.codes[i])
        Q = self.field.size
        out = []
        for _ in self.variables:
            code, c = divmod(code, Q)
            out.append(self.field.element(c))
        return tuple(reversed(out))

    def index_of(self, coords) -> int:
        Q = self.field.size
        code = 0
        for c in coords:
            code = code * Q + (c.index if isinstance(c, FieldElement) else int(c))
        i = int(np.searchsorted(self.codes, code))
        if i >= self.npoints or self.codes[i] != code:
            raise KeyError(coords)
        return i

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "points": self.npoints,
            "W": self.W,
            "q": self.q,
            "complete": self.complete,
            "completeness": self.completeness,
            "generators": [name for name, _ in self.generators],
            "endomorphism": self.f_map is not None,
        }

    def validate(self) -> None:
        n = self.npoints
        if len(self.frob) != n or not maps.is_bijection(self.frob):
            raise ValidationError("Frobenius is not a permutation of the points")
        if not np.array_equal(maps.map_power(self.frob, self.W), maps.identity(n)):
            raise ValidationError(f"Frobenius^{self.W} is not the identity")
        if self.f_map is not None:
            if len(self.f_map) != n or (n and (self.f_map.min() < 0 or self.f_map.max() >= n)):
                raise ValidationError("endomorphism does not map the point set to itself")
            _require_commute(self.f_map, self.frob, "endomorphism", "Frobenius", self)
        for name, g in self.generators:
            if len(g) != n or not maps.is_bijection(g):
                raise ValidationError(f"generator {name!r} is not a bijection of the point set")
            _require_commute(g, self.frob, f"generator {name!r}", "Frobenius", self)
            if self.f_map is not None:
                _require_commute(g, self.f_map, f"generator {name!r}", "endomorphism", self)


def _require_commute(a, b, a_name, b_name, model) -> None:
    bad = np.flatnonzero(a[b] != b[a])
    if bad.size:
        i = int(bad[0])
        where = model.coords(i) if model.codes is not None else i
        raise ValidationError(f"{a_name} does not commute with {b_name} (first failure at point {where})")


def _parse_spec_exprs(spec: VarietySpec, base: FieldDescriptor):
    def parse(text):
        return parse_polynomial(text, spec.variables, base)

    eqs = [parse(t) for t in spec.equations]
    k = len(spec.variables)
    gens = []
    for name, coords in spec.generators:
        if len(coords) != k:
            raise ParseError(f"generator {name!r} has {len(coords)} coordinates, expected {k}")
        gens.append((name, [parse(t) for t in coords]))
    endo = None
    if spec.endomorphism is not None:
        if len(spec.endomorphism) != k:
            raise ParseError(f"endomorphism has {len(spec.endomorphism)} coordinates, expected {k}")
        endo = [parse(t) for t in spec.endomorphism]
    for expr in eqs + [e for _, c in gens for e in c] + (endo or []):
        extra = variables_of(expr) - set(spec.variables)
        if extra:
            raise ParseError(f"unknown variables {sorted(extra)}")
    return eqs, gens, endo


def _split_codes(codes: np.ndarray, k: int, Q: int) -> list[np.ndarray]:
    out = []
    for _ in range(k):
        out.append(codes % Q)
        codes = codes // Q
    return out[::-1]


def _join_codes(coords: list[np.ndarray], Q: int) -> np.ndarray:
    code = np.zeros_like(coords[0])
    for c in coords:
        code = code * Q + c
    return code


def _chunked(n: int, fn, threads: int):
    ranges = [(s, min(s + CHUNK, n)) for s in range(0, n, CHUNK)]
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda r: fn(*r), ranges))
    else:
        parts = [fn(*r) for r in ranges]
    return parts


def build_model(
    spec: VarietySpec,
    cap_points: int = DEFAULT_POINT_CAP,
    threads: int = 1,
    check_completeness: bool = True,
    probe_cap: int = DEFAULT_PROBE_CAP,
) -> EquivariantModel:
    """Enumerate V(F_{q^W}) and the maps, then validate.

    Completeness: ``complete: false`` in the spec disables it; otherwise the
    model is rebuilt at degree 2W when that fits ``probe_cap`` and marked
    complete if the count is unchanged.  A declared ``complete: true`` that
    the probe contradicts is an error; one too large to probe is trusted.
    """
    base = build_field(spec.p, spec.e)
    k = len(spec.variables)
    D = spec.e * spec.working_degree
    total = spec.p ** (D * k)
    if total > cap_points:
        raise CapError(f"enumerating {total} coordinate tuples exceeds the cap {cap_points}")
    work = build_field(spec.p, D, size_cap=max(DEFAULT_SIZE_CAP, cap_points))
    emb = embed_subfield(base, work)
    eqs, gens, endo = _parse_spec_exprs(spec, base)
    Q = work.size

    def scan(lo, hi):
        codes = np.arange(lo, hi, dtype=np.int64)
        if k == 0:
            coords = {}
        else:
            coords = dict(zip(spec.variables, _split_codes(codes, k, Q)))
        keep = np.ones(hi - lo, dtype=bool)
        for eq in eqs:
            keep &= np.broadcast_to(eval_array(eq, coords, emb), keep.shape) == 0
        return codes[keep]

    codes = np.concatenate(_chunked(total, scan, threads)) if total else np.zeros(0, dtype=np.int64)
    n = len(codes)

    def image_map(exprs: list[PolyExpr] | None, what: str, power: int | None = None):
        def chunk(lo, hi):
            pts = codes[lo:hi]
            coords = _split_codes(pts, k, Q)
            if power is not None:
                img = [work.vpow(c, power) for c in coords]
            else:
                env = dict(zip(spec.variables, coords))
                img = [np.broadcast_to(eval_array(ex, env, emb), pts.shape) for ex in exprs]
            target = _join_codes(img, Q) if k else np.zeros(len(pts), dtype=np.int64)
            idx = np.searchsorted(codes, target).astype(maps.index_dtype(n))
            np.minimum(idx, max(n - 1, 0), out=idx)
            bad = np.flatnonzero(codes[idx] != target)
            if bad.size:
                pt = tuple(work.element(int(c)) for c in coords_at(pts[bad[0]]))
                raise ValidationError(f"{what} maps the point {pt} outside the variety")
            return idx

        if n == 0:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(_chunked(n, chunk, threads))

    def coords_at(code):
        return [int(c[0]) for c in _split_codes(np.array([code]), k, Q)] if k else []

    frob = image_map(None, "Frobenius", power=spec.q)
    gen_maps = [(name, image_map(exprs, f"generator {name!r}")) for name, exprs in gens]
    f_map = image_map(endo, "endomorphism") if endo is not None else None

    model = EquivariantModel(
        npoints=n,
        frob=frob,
        generators=gen_maps,
        f_map=f_map,
        W=spec.working_degree,
        complete=False,
        kind="variety",
        q=spec.q,
        spec_hash=spec_hash(spec.raw) if spec.raw else "",
        codes=codes,
        field=work,
        base=base,
        variables=tuple(spec.variables),
    )
    model.validate()

    if check_completeness and spec.complete is not False:
        if splits_over_working_field(spec):
            model.complete, model.completeness = True, "proved"
        else:
            try:
                if verify_completeness(spec, model, min(cap_points, probe_cap), threads):
                    model.complete, model.completeness = True, "probed"
            except CapError:
                if spec.complete:
                    # declared complete but too large to cross-check: trust the declaration
                    model.complete, model.completeness = True, "declared"
            if spec.complete and not model.complete:
                raise ValidationError("spec declares the model complete but the point count grows at degree 2W")
    return model


def splits_over_working_field(spec: VarietySpec) -> bool:
    """Sufficient condition for V(F_{q^W}) = V(F-bar_q).

    Holds when some equation is a nonzero constant, or when every variable x
    has an equation g(x) in x alone with (x^Q - x)^deg g = 0 mod g, Q = q^W:
    then every root of g is a root of x^Q - x, so every coordinate of every
    point already lies in F_Q.
    """
    base = build_field(spec.p, spec.e)
    eqs, _, _ = _parse_spec_exprs(spec, base)
    if any(not variables_of(eq) and expand_univariate(eq, "", base) for eq in eqs):
        return True
    Q = spec.q ** spec.working_degree
    for v in spec.variables:
        for eq in eqs:
            if variables_of(eq) != {v}:
                continue
            g = expand_univariate(eq, v, base)
            if g is None or len(g) < 2:
                continue
            x = [base.zero, base.one]
            r = upowmod(x, Q, g)
            r = r + [base.zero] * (2 - len(r))
            r[1] = r[1] - base.one
            if not upowmod(r, len(g) - 1, g):
                break
        else:
            return False
    return True


def verify_completeness(spec: VarietySpec, model: EquivariantModel, cap_points: int = DEFAULT_POINT_CAP, threads: int = 1) -> bool:
    """Rebuild at working degree 2W and compare point counts.

    Equal counts are necessary for V(F_{q^W}) to be all of V(F-bar_q), but
    not sufficient: this is evidence, not proof.
    """
    bigger = spec.with_working_degree(2 * spec.working_degree)
    # maps may legitimately fail to close on a partial enumeration; only the count matters
    probe = replace(bigger, generators=[], endomorphism=None)
    other = build_model(probe, cap_points=cap_points, threads=threads, check_completeness=False)
    return other.npoints == model.npoints


def rational_count(model: EquivariantModel, n: int) -> int:
    """Number of points fixed by Frobenius^n, i.e. |V(F_{q^n})| when exact."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (model.complete or model.W % n == 0):
        raise ExactnessError(f"|V(F_q^{n})| is not determined by a model of working degree {model.W}: {n} does not divide W")
    fixed = maps.map_power(model.frob, n)
    return int(np.count_nonzero(fixed == maps.identity(model.npoints)))


def point_degree(model: EquivariantModel, i: int) -> int:
    x = int(model.frob[i])
    m = 1
    while x != i:
        x = int(model.frob[x])
        m += 1
    return m


def exactness_check(model: EquivariantModel, n: int, h: int) -> bool:
    """True when quotient counts over F_{q^n} for subgroups of order <= h are exact."""
    if model.complete:
        return True
    return model.W % (n * math.lcm(*range(1, h + 1))) == 0


def require_exact(model: EquivariantModel, n: int, h: int) -> None:
    if not exactness_check(model, n, h):
        need = n * math.lcm(*range(1, h + 1))
        raise ExactnessError(
            f"counts over F_q^{n} for subgroups of order {h} need {need} | W, but W = {model.W} and the model is not complete"
        )


def build_abstract_model(data: dict) -> EquivariantModel:
    """Model from the abstract JSON dialect (explicit permutations)."""
    try:
        n = int(data["points"])
        frob = np.asarray(data.get("frobenius", list(range(n))), dtype=np.int64)
        gens = []
        for i, g in enumerate(data.get("generators", [])):
            if isinstance(g, dict):
                gens.append((str(g.get("name", f"g{i}")), np.asarray(g["map"], dtype=np.int64)))
            else:
                gens.append((f"g{i}", np.asarray(g, dtype=np.int64)))
        endo = data.get("endomorphism")
        f_map = np.asarray(endo, dtype=np.int64) if endo is not None else None
        complete = bool(data.get("complete", True))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed abstract model: {exc!r}") from None
    if len(frob) != n or not maps.is_bijection(frob):
        raise ValidationError("Frobenius is not a permutation of the points")
    model = EquivariantModel(
        npoints=n,
        frob=frob,
        generators=gens,
        f_map=f_map,
        W=int(data.get("working_degree", maps.perm_order(frob))),
        complete=complete,
        completeness="declared" if complete else "",
        kind="abstract",
        q=data.get("q"),
        spec_hash=spec_hash(data),
    )
    model.validate()
    return model


def model_to_json(model: EquivariantModel) -> dict:
    out = {
        "kind": "model",
        "source": model.kind,
        "spec_hash": model.spec_hash,
        "points": model.npoints,
        "working_degree": model.W,
        "q": model.q,
        "complete": model.complete,
        "completeness": model.completeness,
        "frobenius": model.frob.tolist(),
        "generators": [{"name": name, "map": g.tolist()} for name, g in model.generators],
        "endomorphism": model.f_map.tolist() if model.f_map is not None else None,
    }
    if model.codes is not None:
        out["field"] = model.field.to_json()
        out["base_field"] = model.base.to_json()
        out["variables"] = list(model.variables)
        out["codes"] = model.codes.tolist()
    return out


def model_from_json(data: dict) -> EquivariantModel:
    try:
        n = int(data["points"])
        model = EquivariantModel(
            npoints=n,
            frob=np.asarray(data["frobenius"], dtype=np.int64),
            generators=[(g["name"], np.asarray(g["map"], dtype=np.int64)) for g in data["generators"]],
            f_map=np.asarray(data["endomorphism"], dtype=np.int64) if data.get("endomorphism") is not None else None,
            W=int(data["working_degree"]),
            complete=bool(data["complete"]),
            completeness=data.get("completeness", "declared" if data["complete"] else ""),
            kind=data.get("source", "abstract"),
            q=data.get("q"),
            spec_hash=data.get("spec_hash", ""),
        )
        if "codes" in data:
            fd, bd = data["field"], data["base_field"]
            model.field = build_field(fd["p"], fd["d"], size_cap=max(DEFAULT_SIZE_CAP, fd["p"] ** fd["d"]))
            model.base = build_field(bd["p"], bd["d"])
            model.variables = tuple(data["variables"])
            model.codes = np.asarray(data["codes"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model file: {exc!r}") from None
    model.validate()
    return model


def load_model(data: dict, cap_points: int = DEFAULT_POINT_CAP, threads: int = 1) -> tuple[EquivariantModel, VarietySpec | None]:
    """Dispatch on ``kind``: variety spec, abstract model, or a serialized model."""
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object")
    kind = data.get("kind")
    if kind == "variety":
        spec = VarietySpec.from_json(data)
        return build_model(spec, cap_points=cap_points, threads=threads), spec
    if kind == "abstract":
        return build_abstract_model(data), None
    if kind == "model":
        return model_from_json(data), None
    raise ParseError(f"unknown input kind {kind!r}")

import random

import numpy as np
import pytest

from fqdyn.dynamics import (
    ModelDynamics,
    check_iH_bijection,
    compute_M,
    compute_N,
    compute_bounds,
    count_table,
    lemma_period_check,
    per_N_submodel,
    periodic_rational_count,
    quotient_orbits,
    quotient_rational_count,
    rational_periods,
    theorem_A_residual,
    theorem_B_residual,
)
from fqdyn.errors import ExactnessError, RelationError, ValidationError
from fqdyn.group import close_group
from fqdyn.geometry import build_abstract_model, build_model, rational_count
from fqdyn.harness import klein_four, random_model, symmetric_group_3
from fqdyn.relations import relation_basis
from fqdyn.verify import group_of

from conftest import A1_F4, X16, variety
from oracles import naive_counts

KLEIN = (1, -1, -1, -1, 2)


def abstract_dyn(data):
    m = build_abstract_model(data)
    return ModelDynamics(m, group_of(m))


def test_trivial_quotient(x16_model):
    G = group_of(x16_model)
    Q = quotient_orbits(x16_model, G, ModelDynamics(x16_model, G).subgroups[0])
    assert Q.norbits == 16 and np.array_equal(Q.frob_q, x16_model.frob)


def test_quotient_orbit_shapes(x16_dyn):
    subs = x16_dyn.subgroups
    assert [H.order for H in subs] == [1, 2, 2, 2, 4]
    for i in (1, 2, 3):
        Q = x16_dyn.quotient(i)
        assert Q.norbits == 8 and set(Q.sizes.tolist()) == {2}
    Q = x16_dyn.quotient(4)
    assert Q.norbits == 4 and set(Q.sizes.tolist()) == {4}
    orbits = Q.orbits()
    assert [o[0] for o in orbits] == sorted(o[0] for o in orbits)
    assert sorted(p for o in orbits for p in o) == list(range(16))


def test_quotient_counts(x16_dyn, x16_model):
    for n in range(1, 7):
        assert quotient_rational_count(x16_dyn, 0, n) == rational_count(x16_model, n)
        expected = [4, 4, 4, 4, 4] if n % 2 else [16, 8, 8, 8, 4]
        assert [quotient_rational_count(x16_dyn, i, n) for i in range(5)] == expected
        for i in range(5):
            assert periodic_rational_count(x16_dyn, i, n) == expected[i]


def test_counts_match_naive_oracle(x16_dyn, x16_model):
    frob, f = x16_model.frob.tolist(), x16_model.f_map.tolist()
    for i, H in enumerate(x16_dyn.subgroups):
        perms = [x16_dyn.G.perm(h).tolist() for h in H.members]
        for n in range(1, 5):
            assert naive_counts(16, frob, f, perms, n) == (
                quotient_rational_count(x16_dyn, i, n), periodic_rational_count(x16_dyn, i, n))


def test_chain_model(chain_dyn):
    assert periodic_rational_count(chain_dyn, 0, 1) == 1
    assert quotient_rational_count(chain_dyn, 0, 1) == 3
    sub, _, keep = per_N_submodel(chain_dyn.model, chain_dyn.G, 6)
    assert sub.npoints == 1 and keep.tolist() == [2]
    b = compute_bounds(chain_dyn)
    assert (b.M, b.N) == (6, 6)
    assert check_iH_bijection(chain_dyn, 0, b.N)["passed"]


def test_identity_endomorphism_reduces_to_counts():
    spec = variety({**X16, "endomorphism": ["x"]})
    dyn = ModelDynamics(build_model(spec), group_of(build_model(spec)))
    for i in range(5):
        for n in (1, 2):
            assert periodic_rational_count(dyn, i, n) == quotient_rational_count(dyn, i, n)
        rec = check_iH_bijection(dyn, i, 7)
        assert rec["passed"] and rec["count_per_N_quotient"] == quotient_rational_count(dyn, i, 1)
        assert per_N_submodel(dyn.model, dyn.G, 3)[0].npoints == 16
    for n in (1, 2, 3):
        assert theorem_B_residual(dyn, KLEIN, n) == theorem_A_residual(dyn, KLEIN, n)


def test_bounds_examples(x16_dyn):
    b = compute_bounds(x16_dyn)
    assert (b.M, b.N) == (24, 96) == (compute_M(x16_dyn), compute_N(x16_dyn))
    assert b.to_json() == {"M": "24", "N": "96", "rational_counts": [4, 4, 4, 4, 4]}
    single = abstract_dyn({"kind": "abstract", "points": 1, "frobenius": [0], "endomorphism": [0]})
    assert (compute_bounds(single).M, compute_bounds(single).N) == (1, 1)
    two = abstract_dyn({"kind": "abstract", "points": 2, "frobenius": [0, 1], "endomorphism": [1, 0]})
    assert (compute_bounds(two).M, compute_bounds(two).N) == (2, 2)


def test_per_N_is_whole_model_for_bijective_f(x16_dyn, x16_model):
    sub, subG, keep = per_N_submodel(x16_model, x16_dyn.G, 96)
    assert sub.npoints == 16 and keep.tolist() == list(range(16))
    assert np.array_equal(sub.frob, x16_model.frob)
    assert subG.mult == x16_dyn.G.mult


def test_per_N_invariance_failure_detected():
    # g swaps a periodic point with a transient one: not equivariant, so Per_N is not G-stable
    m = build_abstract_model({"kind": "abstract", "points": 2, "frobenius": [0, 1], "endomorphism": [1, 1]})
    G = close_group([("g", np.array([1, 0]))])
    with pytest.raises(ValidationError, match="invariant"):
        per_N_submodel(m, G, 1)


def test_iH_for_all_subgroups(x16_dyn):
    N = compute_bounds(x16_dyn).N
    for i in range(5):
        rec = check_iH_bijection(x16_dyn, i, N)
        assert rec["passed"], rec
        assert rec["count_per_N_quotient"] == rec["count_quotient_per_N"] == rec["count_quotient_periodic"] == 4
        assert lemma_period_check(x16_dyn, i, 24)


def test_lemma_examples(chain_dyn, x16_dyn):
    assert rational_periods(chain_dyn, 0) == [1]
    assert lemma_period_check(chain_dyn, 0, 1)
    # f = x^4 on the rational points of the full quotient: periods divide 2
    assert all(2 % p == 0 for p in rational_periods(x16_dyn, 0))


def test_residual_examples(x16_dyn):
    for n in range(1, 7):
        assert theorem_A_residual(x16_dyn, KLEIN, n) == 0
        assert theorem_B_residual(x16_dyn, KLEIN, n) == 0
        assert theorem_A_residual(x16_dyn, (0, 0, 0, 0, 0), n) == 0


def test_non_relation_refused(x16_dyn):
    with pytest.raises(RelationError):
        theorem_A_residual(x16_dyn, (1, -1, 0, 0, 0), 1)
    with pytest.raises(RelationError):
        theorem_B_residual(x16_dyn, (1, 0, 0, 0, 0), 1)
    assert theorem_A_residual(x16_dyn, (1, -1, 0, 0, 0), 1, force=True) == 0
    assert theorem_A_residual(x16_dyn, (1, -1, 0, 0, 0), 2, force=True) == 8


def test_exactness_refusal(a1_model):
    dyn = ModelDynamics(a1_model, group_of(a1_model))
    with pytest.raises(ExactnessError, match="W"):
        theorem_A_residual(dyn, KLEIN, 1)
    with pytest.raises(ExactnessError):
        compute_bounds(dyn)


def test_exactness_allows_small_orders_at_w4():
    m = build_model(variety({**A1_F4, "working_degree": 4, "complete": False}))
    dyn = ModelDynamics(m, group_of(m))
    # A^1 modulo a translation is again A^1
    assert quotient_rational_count(dyn, 1, 2) == 16
    with pytest.raises(ExactnessError):
        quotient_rational_count(dyn, 4, 2)


def test_count_table(x16_dyn):
    t = count_table(x16_dyn, KLEIN, 4)
    assert t == {0: [4, 16, 4, 16], 1: [4, 8, 4, 8], 2: [4, 8, 4, 8], 3: [4, 8, 4, 8], 4: [4, 4, 4, 4]}
    assert count_table(x16_dyn, KLEIN, 4, periodic=True) == t


def test_refinement_monotone(x16_dyn, x16_model):
    for i in range(5):
        for n in range(1, 5):
            assert quotient_rational_count(x16_dyn, i, n) <= rational_count(x16_model, n)


@pytest.mark.parametrize("make,seed", [(klein_four, 1), (symmetric_group_3, 2)])
def test_random_models_against_oracle(make, seed):
    rng = random.Random(seed)
    G0 = make()
    for _ in range(15):
        dyn = abstract_dyn(random_model(rng, G0))
        m = dyn.model
        frob, f = m.frob.tolist(), m.f_map.tolist()
        basis = relation_basis(dyn.G, dyn.subgroups)
        for i, H in enumerate(dyn.subgroups):
            perms = [dyn.G.perm(h).tolist() for h in H.members]
            for n in (1, 2, 3):
                assert naive_counts(m.npoints, frob, f, perms, n) == (
                    quotient_rational_count(dyn, i, n), periodic_rational_count(dyn, i, n))
        for rel in basis:
            assert theorem_A_residual(dyn, rel, 1) == theorem_B_residual(dyn, rel, 1) == 0


def test_s3_relation_with_non_injective_f():
    rng = random.Random(11)
    S3 = symmetric_group_3()
    hits = 0
    while hits < 5:
        data = random_model(rng, S3)
        if len(set(data["endomorphism"])) == data["points"]:
            continue
        hits += 1
        dyn = abstract_dyn(data)
        assert [H.order for H in dyn.subgroups] == [1, 2, 2, 2, 3, 6]
        for n in (1, 2, 3):
            assert theorem_B_residual(dyn, (1, -2, 0, 0, -1, 2), n) == 0


def test_surjectivity_at_small_N_is_observed():
    """With N = 1 instead of the official N, some rational periodic orbits are missed."""
    rng = random.Random(5)
    failures = 0
    for _ in range(60):
        dyn = abstract_dyn(random_model(rng, klein_four()))
        b = compute_bounds(dyn)
        for i in range(len(dyn.subgroups)):
            assert check_iH_bijection(dyn, i, b.N)["passed"]
            rec = check_iH_bijection(dyn, i, 1)
            assert rec["well_defined"] and rec["injective"]
            failures += not rec["surjective"]
    assert failures > 0

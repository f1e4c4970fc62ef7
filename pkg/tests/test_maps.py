import numpy as np
from hypothesis import given, settings, strategies as st

from fqdyn.maps import cycle_lengths, map_power, perm_order, periodic_mask

from oracles import iterate

self_maps = st.integers(1, 40).flatmap(lambda n: st.lists(st.integers(0, n - 1), min_size=n, max_size=n))


@settings(max_examples=200, deadline=None)
@given(self_maps)
def test_periodic_mask_matches_orbit_walk(f):
    n = len(f)
    expected = [any(iterate(f, f[x], k) == x for k in range(n)) for x in range(n)]
    assert periodic_mask(np.array(f)).tolist() == expected


@settings(max_examples=100, deadline=None)
@given(self_maps, st.integers(0, 200))
def test_map_power_matches_iteration(f, k):
    assert map_power(np.array(f), k).tolist() == [iterate(f, x, k) for x in range(len(f))]


def test_long_tail_and_bijection():
    n = 1000
    chain = np.minimum(np.arange(n) + 1, n - 1)
    assert periodic_mask(chain).tolist() == [False] * (n - 1) + [True]
    perm = np.roll(np.arange(n), 1)
    assert periodic_mask(perm).all()
    assert map_power(perm, 10**30).tolist() == np.roll(np.arange(n), 10**30 % n).tolist()


def test_perm_order():
    perm = np.array([1, 2, 0, 4, 3, 6, 7, 8, 9, 5])
    assert sorted(cycle_lengths(perm)) == [2, 3, 5]
    assert perm_order(perm) == 30
    big = np.concatenate([np.roll(np.arange(67), 1), 67 + np.roll(np.arange(71), 1)])
    assert perm_order(big) == 67 * 71

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from mvpremium import rng


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**63), st.integers(0, 500), st.integers(0, 300), st.integers(1, 50),
       st.integers(1, 3))
def test_slices_match_full_block(seed, step, start, n, width):
    full = rng.uniforms(seed, rng.BROWNIAN, step, 0, start + n, width)
    part = rng.uniforms(seed, rng.BROWNIAN, step, start, n, width)
    assert np.array_equal(full[start:], part)


def test_open_interval_and_distinct_streams():
    u = rng.uniforms(3, rng.BROWNIAN, 0, 0, 10_000)
    assert u.min() > 0 and u.max() < 1
    v = rng.uniforms(3, rng.REGIME, 0, 0, 10_000)
    w = rng.uniforms(3, rng.BROWNIAN, 1, 0, 10_000)
    assert not np.array_equal(u, v)
    assert not np.array_equal(u, w)


def test_normals_look_normal():
    z = rng.normals(11, rng.BROWNIAN, 4, 0, 50_000).ravel()
    assert stats.kstest(z, "norm").pvalue > 1e-3
    assert abs(z.mean()) < 4 / np.sqrt(z.size)


def test_steps_independent():
    a = rng.normals(5, rng.BROWNIAN, 0, 0, 20_000).ravel()
    b = rng.normals(5, rng.BROWNIAN, 1, 0, 20_000).ravel()
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(a.size)


def test_child_seed_deterministic():
    assert rng.child_seed(0, 3) == rng.child_seed(0, 3)
    assert len({rng.child_seed(0, i) for i in range(100)}) == 100
    assert 0 <= rng.child_seed(2**64 - 1, 1) < 2**64

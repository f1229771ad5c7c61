import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_complex
from tlmax.errors import PreconditionError
from tlmax.families import random_field
from tlmax.maximal import (WindowLadder, hl_maximal, hl_maximal_bruteforce, peetre_bruteforce,
                           peetre_from_abs, peetre_maximal, scale_limited_bruteforce,
                           scale_limited_maximal, sliding_max)
from tlmax.sample_grid import BandSpec, GridSpec, SampledField


def naive_windows(a, r, k=None, eps=0.0, h=1.0, regime=None):
    """Independent oracle: loop over every periodic window of dyadic size containing x."""
    n = len(a)
    out = np.zeros(n)
    m = 1
    while m <= n:
        w = m * h
        if k is None:
            pen = 1.0
        elif w * 2.0**k <= 1.0:
            pen = 1.0 if regime == "small" else None
        else:
            pen = (2.0**k * w) ** (-eps) if regime == "large" else None
        if pen is not None:
            for x in range(n):
                for start in range(x - m + 1, x + 1):
                    idx = np.arange(start, start + m) % n
                    val = pen * np.mean(a[idx] ** r) ** (1.0 / r)
                    out[x] = max(out[x], val)
        m *= 2
    return out


def naive_peetre(a, L, sigma, k):
    n = len(a)
    h = L / n
    out = np.zeros(n)
    for x in range(n):
        for y in range(n):
            dist = min(y, n - y) * h
            out[x] = max(out[x], a[(x - y) % n] / (1 + 2.0**k * dist) ** sigma)
    return out


def test_hl_indicator_n8():
    grid = GridSpec(1, 8, 8)
    v = np.zeros(8)
    v[0] = 1.0
    got = hl_maximal(SampledField(grid, v), 1.0).values
    assert got[0] == 1.0
    assert got[3] == 0.25
    assert np.array_equal(got, naive_windows(v, 1.0))


@pytest.mark.parametrize("c", [1.0, 2.5, 0.3 - 0.4j])
@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_hl_constant(c, r):
    grid = GridSpec(1, 1, 32)
    out = hl_maximal(SampledField(grid, np.full(32, c)), r).values
    assert np.allclose(out, abs(c), rtol=1e-14, atol=0)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_hl_matches_naive_oracle(rng, r):
    grid = GridSpec(1, 1, 32)
    f = random_complex(grid, rng)
    got = hl_maximal(f, r).values
    assert np.allclose(got, naive_windows(f.abs(), r), rtol=1e-12, atol=0)


@pytest.mark.parametrize("d,n", [(1, 4), (1, 8), (1, 16), (1, 32), (2, 4), (2, 8)])
def test_fast_engines_equal_bruteforce_exactly(rng, d, n):
    grid = GridSpec(d, 1, n)
    for _ in range(3):
        f = random_complex(grid, rng)
        assert np.array_equal(hl_maximal(f, 1.5).values, hl_maximal_bruteforce(f, 1.5))
        for k, eps, comb in [(0, 0.5, "sum"), (2, 1.0, "max"), (1, 0.0, "sum")]:
            fast = scale_limited_maximal(f, 1.5, k, eps, comb).values
            assert np.array_equal(fast, scale_limited_bruteforce(f, 1.5, k, eps, comb))
        brute = peetre_bruteforce(f, 1.3, 1)
        for engine in ("direct", "pruned", "sparse"):
            assert np.array_equal(peetre_from_abs(f.abs(), grid, 1.3, 1, engine), brute)


def test_hl_monotone_in_r(rng):
    grid = GridSpec(1, 2, 64)
    for _ in range(20):
        f = random_complex(grid, rng)
        lo = hl_maximal(f, 0.7).values
        hi = hl_maximal(f, 2.0).values
        assert np.all(lo <= hi * (1 + 1e-13))


def test_scale_limited_eps_zero_matches_hl(rng):
    grid = GridSpec(1, 1, 64)
    f = random_complex(grid, rng)
    hl = hl_maximal(f, 1.0).values
    assert np.array_equal(scale_limited_maximal(f, 1.0, 2, 0.0, "max").values, hl)


def test_scale_limited_monotone_in_eps(rng):
    grid = GridSpec(1, 1, 64)
    for _ in range(20):
        f = random_complex(grid, rng)
        a = scale_limited_maximal(f, 1.0, 3, 0.2).values
        b = scale_limited_maximal(f, 1.0, 3, 0.9).values
        assert np.all(b <= a)


def test_scale_limited_indicator_n8():
    grid = GridSpec(1, 1, 8)
    v = np.zeros(8)
    v[0] = 1.0
    f = SampledField(grid, v)
    assert scale_limited_maximal(f, 1.0, 1, 1.0, "max").values[0] == 1.0
    # the whole-torus window adds (2 * 1)^-1 * 1/8 in the summed variant
    assert scale_limited_maximal(f, 1.0, 1, 1.0, "sum").values[0] == 1.0 + 1.0 / 16


@pytest.mark.parametrize("k,eps", [(0, 0.5), (2, 1.0), (3, 0.25)])
def test_scale_limited_matches_naive(rng, k, eps):
    grid = GridSpec(1, 1, 32)
    f = random_complex(grid, rng)
    small = naive_windows(f.abs(), 1.0, k, eps, grid.h, "small")
    large = naive_windows(f.abs(), 1.0, k, eps, grid.h, "large")
    got = scale_limited_maximal(f, 1.0, k, eps, "sum").values
    assert np.allclose(got, small + large, rtol=1e-12, atol=0)


def test_scale_limited_refuses_bad_scale(rng):
    f = random_complex(GridSpec(1, 1, 16), rng)
    with pytest.raises(PreconditionError):
        scale_limited_maximal(f, 1.0, 10, 0.5)
    with pytest.raises(PreconditionError):
        scale_limited_maximal(f, 1.0, 1, -0.5)


def test_peetre_dominates_modulus(rng):
    grid = GridSpec(1, 2, 64)
    f = random_field(grid, 3, 2.0, rng)
    assert np.all(peetre_maximal(f, 1.0, 3).values >= f.abs())


def test_peetre_constant():
    grid = GridSpec(1, 1, 32)
    f = SampledField(grid, np.full(32, -2.0), BandSpec(0, 1.0))
    assert np.all(peetre_maximal(f, 2.0, 0).values == 2.0)


def test_peetre_pruned_equals_direct_n16(rng):
    grid = GridSpec(1, 1, 16)
    f = random_field(grid, 2, 2.0, rng)
    direct = peetre_from_abs(f.abs(), grid, 2.0, 0, "direct")
    assert np.array_equal(peetre_from_abs(f.abs(), grid, 2.0, 0, "pruned"), direct)
    assert np.allclose(direct, naive_peetre(f.abs(), grid.L, 2.0, 0), rtol=1e-14, atol=0)


def test_peetre_sparse_on_concentrated_data():
    grid = GridSpec(1, 64, 4096)
    a = np.zeros(grid.N)
    a[100:110] = 1.0
    a[3000] = 0.5
    direct = peetre_from_abs(a, grid, 0.8, 2, "direct")
    assert np.array_equal(peetre_from_abs(a, grid, 0.8, 2, "sparse"), direct)


@given(st.integers(0, 2**31), st.floats(1.0, 3.0))
@settings(max_examples=25, deadline=None)
def test_sublinearity(seed, r):
    rng = np.random.default_rng(seed)
    grid = GridSpec(1, 1, 32)
    f, g = random_complex(grid, rng), random_complex(grid, rng)
    s = SampledField(grid, f.values + g.values)
    tol = 1 + 1e-12
    assert np.all(hl_maximal(s, r).values <= (hl_maximal(f, r).values + hl_maximal(g, r).values) * tol)
    pf = peetre_from_abs(f.abs(), grid, r, 1)
    pg = peetre_from_abs(g.abs(), grid, r, 1)
    assert np.all(peetre_from_abs(s.abs(), grid, r, 1) <= (pf + pg) * tol)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_dilation_covariance(rng, m):
    # f_lam(x) = f(2^m x) on the torus of side L 2^-m: same samples, windows rescale
    base = GridSpec(1, 8, 64)
    f = random_complex(base, rng)
    small = GridSpec(1, 8 / 2**m, 64)
    a = hl_maximal(f, 1.0).values
    b = hl_maximal(SampledField(small, f.values), 1.0).values
    assert np.array_equal(a, b)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=16, max_size=16),
       st.sampled_from([1, 2, 4, 8, 16]))
@settings(max_examples=50, deadline=None)
def test_sliding_max_oracle(vals, m):
    a = np.asarray(vals)
    n = len(a)
    oracle = np.array([max(a[(x - j) % n] for j in range(m)) for x in range(n)])
    assert np.array_equal(sliding_max(a, m), oracle)


def test_window_ladder_sums(rng):
    a = rng.random(16)
    lad = WindowLadder.build(a)
    for j, m in enumerate(lad.sizes):
        oracle = np.array([a[np.arange(s, s + m) % 16].sum() for s in range(16)])
        assert np.allclose(lad.sums[j], oracle, rtol=1e-14)


def test_r_must_be_positive(rng):
    with pytest.raises(PreconditionError):
        hl_maximal(random_complex(GridSpec(1, 1, 8), rng), 0.0)

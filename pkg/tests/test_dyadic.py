import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tlmax.dyadic import (DyadicCube, besov_norm, cube_sup, cubes_at_level, f_norm, local_avg,
                          v_norm, v_norm_bruteforce)
from tlmax.errors import PreconditionError
from tlmax.families import RandomFamilySpec, _rng, family_sequence, random_field
from tlmax.lp import ScaleSequence, project
from tlmax.sample_grid import GridSpec, SampledField, pure_tone


def const_seq(grid, k, c=1.0, mu=None):
    f = SampledField(grid, np.full(grid.shape, c))
    return ScaleSequence(k if mu is None else mu, ((k, f),))


def naive_v(seq, mu, q):
    """Oracle: loop over every cube, summing the slice of each admissible entry."""
    grid = seq.grid
    best = 0.0
    for level in range(max(mu, grid.coarsest_level), grid.finest_level + 1):
        side = 2.0 ** (-level)
        n_per = int(round(side / grid.h))
        for i in range(int(grid.L / side)):
            sl = slice(i * n_per, (i + 1) * n_per)
            tot = sum(np.sum(f.abs()[sl] ** q) for k, f in seq.entries if k >= level)
            best = max(best, (tot / n_per) ** (1 / q))
    return best


def test_cube_geometry():
    P = DyadicCube(2, (3,))
    assert P.side == 0.25 and P.corner == (0.75,)
    assert P.parent() == DyadicCube(1, (1,))
    assert all(P.contains(c) for c in P.children())
    assert not P.contains(DyadicCube(1, (1,)))


@given(st.integers(-2, 5), st.integers(0, 63), st.integers(0, 4))
@settings(max_examples=100, deadline=None)
def test_containment_matches_intervals(level, idx, extra):
    P = DyadicCube(level, (idx % max(1, 2 ** (level + 2)),))
    Q = DyadicCube(level + extra, ((idx * 7 + 3) % (2 ** (level + extra + 2)),))
    lo_p, hi_p = P.corner[0], P.corner[0] + P.side
    inside = lo_p <= Q.corner[0] and Q.corner[0] + Q.side <= hi_p
    assert P.contains(Q) == inside


def test_cubes_at_level_count():
    grid = GridSpec(2, 4, 32)
    assert len(cubes_at_level(grid, 0)) == 16
    assert len(cubes_at_level(grid, -3)) == 0


def test_local_avg_constant():
    grid = GridSpec(1, 4, 64)
    seq = const_seq(grid, 3, mu=-2)
    for level in range(-2, 4):
        assert local_avg(DyadicCube(level, (0,)), seq, 2.0) == pytest.approx(1.0, rel=1e-15)


def test_local_avg_half_indicator():
    grid = GridSpec(1, 1, 32)
    v = np.zeros(32)
    v[:8] = 1.0
    seq = ScaleSequence(0, ((1, SampledField(grid, v)),))
    assert local_avg(DyadicCube(1, (0,)), seq, 2.0) == pytest.approx(math.sqrt(0.5), rel=1e-15)


@pytest.mark.parametrize("s", [0.5, -1.0, 2.0])
def test_local_avg_s_weighting(rng, s):
    grid = GridSpec(1, 1, 64)
    k, q = 3, 1.5
    f = SampledField(grid, rng.random(64))
    seq = ScaleSequence(0, ((k, f),))
    P = DyadicCube(1, (1,))
    base = local_avg(P, seq, q, s) ** q
    doubled = local_avg(P, seq, q, 2 * s) ** q
    assert doubled == pytest.approx(2.0 ** (s * k * q) * base, rel=1e-13)


def test_v_norm_zero_and_constant():
    grid = GridSpec(1, 2, 64)
    assert v_norm(const_seq(grid, 0, 0.0), 0, 2.0).value == 0.0
    for q in (0.5, 1.0, 4.0):
        assert v_norm(const_seq(grid, 0), 0, q).value == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("q", [0.7, 2.0, 3.0])
def test_v_norm_three_entries_vs_bruteforce(q):
    grid = GridSpec(1, 2, 64)
    seq = family_sequence(RandomFamilySpec(seed=4, count=1, mu=-1, k_max=1), grid, 0)
    assert len(seq.entries) == 3
    fast = v_norm(seq, -1, q).value
    assert abs(fast - v_norm_bruteforce(seq, -1, q)) <= 1e-12 * fast
    assert abs(fast - naive_v(seq, -1, q)) <= 1e-12 * fast


def test_v_norm_2d_vs_bruteforce():
    grid = GridSpec(2, 1, 16)
    f = random_field(grid, 1, 2.0, _rng(1, 0))
    g = random_field(grid, 2, 2.0, _rng(1, 1))
    seq = ScaleSequence(0, ((0, f), (2, g)))
    assert v_norm(seq, 0, 2.0).value == pytest.approx(v_norm_bruteforce(seq, 0, 2.0), rel=1e-12)


@given(st.integers(0, 2**31), st.floats(0.5, 1.0))
@settings(max_examples=20, deadline=None)
def test_v_norm_monotone_under_domination(seed, factor):
    rng = np.random.default_rng(seed)
    grid = GridSpec(1, 1, 32)
    a = [rng.random(32) for _ in range(3)]
    big = ScaleSequence(0, tuple((k, SampledField(grid, x)) for k, x in enumerate(a)))
    small = ScaleSequence(0, tuple((k, SampledField(grid, factor * x * rng.random(32)))
                                   for k, x in enumerate(a)))
    assert v_norm(small, 0, 2.0).value <= v_norm(big, 0, 2.0).value * (1 + 1e-14)


def test_v_norm_refuses_coarse_mu():
    grid = GridSpec(1, 1, 32)
    with pytest.raises(PreconditionError):
        v_norm(const_seq(grid, 2), 0, 2.0)


@pytest.mark.parametrize("p,q", [(1.0, 1.0), (2.0, 1.0), (2.0, math.inf), (math.inf, math.inf),
                                 (math.inf, 2.0)])
def test_f_norm_pure_tone(p, q):
    grid = GridSpec(1, 4, 512)
    m = 3
    tone = pure_tone(grid, int(2**m * grid.L))
    value = f_norm(tone, 0.0, p, q).value
    expected = 1.0 if math.isinf(p) else grid.L ** (1 / p)
    assert value == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("p,q", [(1.0, 2.0), (math.inf, 2.0), (2.0, math.inf)])
def test_zero_field_norms(p, q):
    grid = GridSpec(1, 2, 128)
    z = SampledField(grid, np.zeros(grid.N))
    assert f_norm(z, 0.5, p, q).value == 0.0
    assert besov_norm(z, 0.5, p, q).value == 0.0


def test_single_shell_f_inf_equals_cube_oracle(rng):
    grid = GridSpec(1, 4, 256)
    k0 = 2
    f = SampledField(grid, rng.standard_normal(256))
    q = 2.0
    got = f_norm(f, 0.0, math.inf, q, k_lo=k0, k_hi=k0).value
    a = project(f, k0).abs() ** q
    best = 0.0
    for level in range(grid.coarsest_level, k0 + 1):
        n_per = int(2.0 ** (-level) / grid.h)
        for i in range(grid.N // n_per):
            best = max(best, np.mean(a[i * n_per:(i + 1) * n_per]) ** (1 / q))
    assert got == pytest.approx(best, rel=1e-12)


@pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
def test_besov_equals_f_norm_single_shell(rng, p):
    grid = GridSpec(1, 4, 256)
    f = project(SampledField(grid, rng.standard_normal(256)), 3)
    b = besov_norm(f, 0.0, p, 2.0, k_lo=3, k_hi=3).value
    fn = f_norm(f, 0.0, p, 2.0, k_lo=3, k_hi=3).value if not math.isinf(p) else \
        f_norm(f, 0.0, math.inf, math.inf, k_lo=3, k_hi=3).value
    assert b == pytest.approx(fn, rel=1e-12)


def test_besov_two_shells(rng):
    grid = GridSpec(1, 4, 512)
    t1, t2 = pure_tone(grid, 2 * 4, 0.7), pure_tone(grid, 16 * 4, 1.3)
    f = SampledField(grid, t1.values + t2.values)
    a = (grid.L * 0.7**2) ** 0.5
    b = (grid.L * 1.3**2) ** 0.5
    assert besov_norm(f, 0.0, 2.0, 1.0).value == pytest.approx(a + b, rel=1e-10)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_f_equals_b_when_p_equals_q(rng, p):
    grid = GridSpec(1, 4, 512)
    f = SampledField(grid, rng.standard_normal(512))
    assert f_norm(f, 0.3, p, p).value == pytest.approx(besov_norm(f, 0.3, p, p).value, rel=1e-12)


def test_inhomogeneous_f_inf_includes_lambda0(rng):
    grid = GridSpec(1, 4, 256)
    f = SampledField(grid, np.full(256, 2.0))
    rep = f_norm(f, 0.0, math.inf, 2.0, homogeneous=False)
    assert rep.truncation["lambda0_sup"] == pytest.approx(2.0, rel=1e-12)
    assert rep.value == pytest.approx(2.0, rel=1e-10)


def test_cube_sup_table(rng):
    grid = GridSpec(1, 1, 16)
    seq = const_seq(grid, 0)
    value, arg, table = cube_sup(seq, 2.0, 0.0, 0, keep_table=True)
    assert value == pytest.approx(1.0) and arg.level == 0
    assert len(table) == 1 + 2 + 4 + 8 + 16


def test_norm_report_serializes():
    grid = GridSpec(1, 1, 16)
    rep = v_norm(const_seq(grid, 0), 0, 2.0)
    assert '"value"' in rep.to_json() and rep.to_csv().startswith("mu,q,value")

"""Fast self-checks: closed-form cases and engine/oracle equivalences at N <= 32."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import bumps
from .counterexamples import SharpnessFamilySpec, bump_center, cell_periodicity, ModulatedScale
from .counterexamples import _scaled_series
from .dyadic import DyadicCube, v_norm, v_norm_bruteforce
from .families import RandomFamilySpec, family_sequence, random_field, _rng
from .lp import sampling_expansion
from .maximal import (hl_maximal, hl_maximal_bruteforce, peetre_bruteforce, peetre_from_abs,
                      scale_limited_bruteforce, scale_limited_maximal)
from .sample_grid import (BandSpec, GridSpec, SampledField, band_check,
                          evaluate_offgrid, forward_spectrum, pure_tone, synthesize)


def _rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def _random_field(grid: GridSpec, rng) -> SampledField:
    return SampledField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def _check_dc(rng):
    grid = GridSpec(1, 4, 32)
    c = forward_spectrum(SampledField(grid, np.full(32, 3.0))).fft_order()
    others = np.abs(c[1:]).max()
    return abs(c[0] - 3.0 * grid.L) <= 1e-12 * 3 * grid.L and others <= 1e-12 * 3 * grid.L


def _check_tone(rng):
    grid = GridSpec(1, 2, 32)
    c = forward_spectrum(pure_tone(grid, 5)).fft_order()
    return abs(c[5] - grid.L) <= 1e-12 and np.abs(np.delete(c, 5)).max() <= 1e-12


def _check_roundtrip(rng):
    grid = GridSpec(1, 2, 32)
    f = _random_field(grid, rng)
    return _rel(synthesize(forward_spectrum(f)).values, f.values) <= 1e-10


def _check_dft_oracle(rng):
    grid = GridSpec(1, 1, 16)
    f = _random_field(grid, rng)
    n = np.arange(16)
    direct = grid.h * np.exp(-2j * np.pi * np.outer(n, n) / 16) @ f.values
    return _rel(forward_spectrum(f).fft_order(), direct) <= 1e-10


def _check_band_tones(rng):
    grid = GridSpec(1, 1, 32)
    k = 2
    inside = band_check(pure_tone(grid, 2 ** (k - 1)), BandSpec(k, 1.0))
    outside = band_check(pure_tone(grid, 2 ** (k + 1)), BandSpec(k, 1.0))
    return inside <= 1e-20 and abs(outside - 1.0) <= 1e-12


def _check_offgrid(rng):
    grid = GridSpec(1, 1, 32)
    f = random_field(grid, 2, 2.0, rng)
    vals = np.array([evaluate_offgrid(f, x) for x in grid.coords()[:8]])
    return _rel(vals, f.values[:8]) <= 1e-12


def _check_partition(rng, mother: Callable | None = None):
    mother = bumps.make_lp_mother() if mother is None else mother
    return bumps.partition_of_unity_error(mother) <= 1e-12


def _check_father(rng):
    phi = bumps.make_inhomogeneous_father()
    return float(phi(np.array([0.0]))[0]) == 1.0 and abs(float(phi(np.array([3.0]))[0])) <= 1e-14


def _check_reproducing(rng):
    k = 3
    psi = bumps.make_reproducing_kernel(k)
    return float(psi(np.array([2.0 ** (k - 3)]))[0]) == 1.0 and \
        float(psi(np.array([2.0 ** (k + 1)]))[0]) == 0.0


def _check_nonnegative(rng):
    x = np.linspace(-400, 400, 2001)
    eta, beta = bumps.make_eta(), bumps.make_beta(3)
    return bool(np.all(eta.spatial(x) >= 0) and np.all(beta.spatial(x) >= 0)
                and bumps.support_leak(eta) <= 1e-12 and bumps.support_leak(beta) <= 1e-12)


def _check_hl_indicator(rng):
    grid = GridSpec(1, 1, 8)
    vals = np.zeros(8)
    vals[0] = 1.0
    got = hl_maximal(SampledField(grid, vals), 1.0).values
    # periodic: distances wrap around the torus
    return np.array_equal(got, [1.0, 0.5, 0.25, 0.25, 0.125, 0.25, 0.25, 0.5])


def _check_hl_oracle(rng):
    ok = True
    for d, n in ((1, 16), (1, 32), (2, 8)):
        grid = GridSpec(d, 1, n)
        f = _random_field(grid, rng)
        ok &= np.array_equal(hl_maximal(f, 1.5).values, hl_maximal_bruteforce(f, 1.5))
    return ok


def _check_scale_limited_oracle(rng):
    ok = True
    for combine in ("sum", "max"):
        grid = GridSpec(1, 1, 16)
        f = _random_field(grid, rng)
        fast = scale_limited_maximal(f, 1.0, 2, 0.5, combine).values
        ok &= np.array_equal(fast, scale_limited_bruteforce(f, 1.0, 2, 0.5, combine))
    return ok


def _check_peetre_oracle(rng):
    ok = True
    for d, n in ((1, 32), (2, 8)):
        grid = GridSpec(d, 1, n)
        f = _random_field(grid, rng)
        brute = peetre_bruteforce(f, 1.3, 2)
        for engine in ("direct", "pruned", "sparse"):
            ok &= np.array_equal(peetre_from_abs(f.abs(), grid, 1.3, 2, engine), brute)
    return ok


def _check_v_norm_oracle(rng):
    grid = GridSpec(1, 2, 32)
    seq = family_sequence(RandomFamilySpec(seed=1, count=1, mu=-1, k_max=2), grid, 0)
    return abs(v_norm(seq, -1, 2.0).value - v_norm_bruteforce(seq, -1, 2.0)) <= 1e-12


def _check_cube_containment(rng):
    P = DyadicCube(1, (1,))
    return P.contains(DyadicCube(3, (5,))) and not P.contains(DyadicCube(3, (2,)))


def _check_sampling(rng):
    grid = GridSpec(1, 1, 32)
    f = random_field(grid, 1, 1.0, _rng(3, 0))
    _, err = sampling_expansion(f, 3)
    return err <= 1e-6


def _check_bounded_sum_origin(rng):
    val = float(_scaled_series(np.array([0.0]), 1.0, 2.0, 4096)[0])
    return abs(val - (math.pi**2 / 6 - 1)) <= 1e-12


def _check_modulated_center(rng):
    sc = ModulatedScale(3, 0.5, bump_center(3, 0.5), 2.0**14, 256)
    return float(sc.modulus(np.array([float(sc.D)]))[0]) == 1.0


def _check_cell_periodicity(rng):
    return cell_periodicity(SharpnessFamilySpec(M=3, N=3)) <= 1e-12


CHECKS = [
    ("dc_spectrum", _check_dc),
    ("pure_tone_spectrum", _check_tone),
    ("roundtrip", _check_roundtrip),
    ("dft_oracle", _check_dft_oracle),
    ("band_check_tones", _check_band_tones),
    ("offgrid_at_nodes", _check_offgrid),
    ("partition_of_unity", _check_partition),
    ("father_values", _check_father),
    ("reproducing_plateau", _check_reproducing),
    ("bumps_nonnegative", _check_nonnegative),
    ("hl_indicator", _check_hl_indicator),
    ("hl_oracle", _check_hl_oracle),
    ("scale_limited_oracle", _check_scale_limited_oracle),
    ("peetre_oracle", _check_peetre_oracle),
    ("v_norm_oracle", _check_v_norm_oracle),
    ("cube_containment", _check_cube_containment),
    ("sampling_expansion", _check_sampling),
    ("bounded_sum_origin", _check_bounded_sum_origin),
    ("modulated_center", _check_modulated_center),
    ("cell_periodicity", _check_cell_periodicity),
]


def run_selftest(seed: int = 0, inject: str | None = None) -> dict:
    """Run every check; ``inject="mother"`` perturbs the LP mother to exercise failure."""
    if inject not in (None, "mother"):
        raise ValueError(f"unknown fault {inject!r}")
    results = {}
    for name, fn in CHECKS:
        rng = np.random.default_rng([seed, len(results)])
        try:
            if name == "partition_of_unity" and inject == "mother":
                good = bumps.make_lp_mother()
                ok = fn(rng, lambda xi: 1.001 * good(xi))
            else:
                ok = fn(rng)
            results[name] = {"passed": bool(ok)}
        except Exception as exc:  # a crash is a failed check, reported by name
            results[name] = {"passed": False, "error": f"{type(exc).__name__}: {exc}"}
    return {"checks": results, "passed": all(r["passed"] for r in results.values()),
            "failed": [n for n, r in results.items() if not r["passed"]]}

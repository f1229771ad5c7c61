import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from tlmax import bumps
from tlmax.errors import PreconditionError


def rho(t):
    return math.exp(-1.0 / (1.0 - t * t)) if abs(t) < 1 else 0.0


MASS = quad(rho, -1, 1, epsabs=1e-15, epsrel=1e-13)[0]


def g_oracle(x, radius):
    """Inverse transform of the unit-mass mollifier of the given radius."""
    val = quad(lambda s: rho(s) * math.cos(2 * math.pi * radius * x * s), -1, 1,
               epsabs=1e-14, epsrel=1e-12, limit=400)[0]
    return val / MASS


def test_mollifier_mass():
    assert bumps.MOLLIFIER_MASS == pytest.approx(MASS, rel=1e-13)


@pytest.mark.parametrize("t", [-0.9, -0.3, 0.0, 0.2, 0.75, 0.999])
def test_smooth_step_against_quadrature(t):
    oracle = quad(rho, -1, t, epsabs=1e-16)[0] / MASS
    assert float(bumps.smooth_step(np.array([t]))[0]) == pytest.approx(oracle, abs=1e-13)


def test_mother_support_and_plateau():
    phi = bumps.make_lp_mother()
    xi = np.linspace(-4, 4, 10_001)
    outside = (np.abs(xi) <= 0.5) | (np.abs(xi) >= 2.0)
    assert np.abs(phi(xi[outside])).max() <= 1e-14
    assert float(phi(np.array([1.0]))[0]) == 1.0


def test_partition_of_unity():
    assert bumps.partition_of_unity_error(bumps.make_lp_mother()) <= 1e-12


def test_partition_detects_corrupted_mother():
    phi = bumps.make_lp_mother()
    assert bumps.partition_of_unity_error(lambda xi: 1.001 * phi(xi)) > 1e-4


@pytest.mark.parametrize("K", [1, 3, 6])
def test_father_telescoping(K):
    phi, Phi = bumps.make_lp_mother(), bumps.make_inhomogeneous_father()
    xi = np.linspace(0, 2.0 ** (K - 1), 2001)
    total = Phi(xi) + sum(phi(2.0 ** (-k) * xi) for k in range(1, K + 1))
    assert np.abs(total - 1.0).max() <= 1e-12


def test_father_values():
    Phi = bumps.make_inhomogeneous_father()
    assert float(Phi(np.array([0.0]))[0]) == 1.0
    assert abs(float(Phi(np.array([3.0]))[0])) <= 1e-14


@pytest.mark.parametrize("k", [-2, 0, 3, 7])
def test_reproducing_kernel_values(k):
    psi = bumps.make_reproducing_kernel(k)
    assert float(psi(np.array([2.0 ** (k - 3)]))[0]) == 1.0
    assert float(psi(np.array([2.0 ** (k + 1)]))[0]) == 0.0
    assert psi.certificates["support_leak"] <= 1e-12


@pytest.mark.parametrize("x", [0.0, 0.01, 3.0, 40.0, 173.0])
def test_eta_matches_quadrature(x):
    eta = bumps.make_eta()
    oracle = g_oracle(x, bumps.ETA_HALF_RADIUS) ** 2
    assert float(eta.spatial(np.array([x]))[0]) == pytest.approx(oracle, rel=1e-10, abs=1e-15)


@pytest.mark.parametrize("xi", [0.0, 0.001, 0.004, 0.0099])
def test_eta_transform_is_autocorrelation(xi):
    a = bumps.ETA_HALF_RADIUS

    def b(t):
        return rho(t / a) / (a * MASS)

    oracle = quad(lambda t: b(t) * b(t - xi), xi - a, a, epsabs=1e-14, limit=200)[0]
    got = float(bumps.make_eta().transform(np.array([xi]))[0])
    assert got == pytest.approx(oracle, rel=1e-9, abs=1e-9)


def test_eta_certificates():
    eta = bumps.make_eta()
    oracle_c = g_oracle(0.01, bumps.ETA_HALF_RADIUS) ** 2
    assert eta.certificates["c"] == pytest.approx(oracle_c, rel=1e-12)
    assert eta.certificates["value_at_0"] == pytest.approx(1.0, abs=1e-14)
    assert eta.certificates["support_leak"] <= 1e-12
    x = np.linspace(-500, 500, 100_001)
    assert np.all(eta.spatial(x) >= 0)


def test_eta_tilde_plateau():
    et = bumps.make_eta_tilde()
    assert et.certificates["plateau_min"] == 1.0
    assert et.certificates["support_leak"] <= 1e-12


@pytest.mark.parametrize("M", [1, 2, 3, 4])
def test_beta_normalization(M):
    beta = bumps.make_beta(M)
    # g is decreasing on [0, 2^-M], so the minimum sits at the cube edge
    oracle_scale = 1.0 / g_oracle(2.0 ** (-M), bumps.BETA_HALF_RADIUS) ** 2
    assert beta.certificates["scale"] == pytest.approx(oracle_scale, rel=1e-11)
    assert beta.certificates["min_on_cube"] >= 1.0
    assert beta.certificates["support_leak"] <= 1e-12
    assert np.all(beta.spatial(np.linspace(-60, 60, 20_001)) >= 0)


def test_beta_rejects_bad_M():
    with pytest.raises(PreconditionError):
        bumps.make_beta(0)


def test_gamma_normalization_and_decay():
    gamma = bumps.make_gamma()
    c = gamma.certificates
    assert c["value_at_0"] == pytest.approx(1.0, abs=1e-12)
    assert c["support_leak"] <= 1e-12
    assert c["tail_over_C_gamma"] <= 1.0
    x = np.linspace(0, 96, 3001)
    assert np.all(np.abs(gamma.spatial(x)) <= c["C_gamma"] * (1 + x) ** -8 * (1 + 1e-12))


@pytest.mark.parametrize("factory", [bumps.make_lp_mother, bumps.make_inhomogeneous_father,
                                     bumps.make_eta, bumps.make_eta_tilde, bumps.make_gamma,
                                     lambda: bumps.make_beta(3),
                                     lambda: bumps.make_reproducing_kernel(2)])
def test_profiles_are_even(factory):
    prof = factory()
    xi = np.linspace(0, 1.5 * prof.rho, 4001)
    assert np.abs(prof(xi) - prof(-xi)).max() <= 1e-14


@given(st.floats(0.0, 0.999), st.floats(0.001, 3.0))
@settings(max_examples=60, deadline=None)
def test_plateau_bounds(inner_frac, outer):
    inner = inner_frac * outer
    r = np.linspace(0, 2 * outer, 257)
    v = bumps.plateau(r, inner, outer)
    assert np.all((v >= 0) & (v <= 1))
    assert np.all(v[r <= inner] == 1.0) and np.all(v[r >= outer] == 0.0)
    assert np.all(np.diff(v) <= 1e-15)


def test_profile_json_is_deterministic():
    a = bumps.make_beta(3).to_json()
    b = bumps.make_beta(3).to_json()
    assert a == b

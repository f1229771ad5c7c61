"""Smooth compactly supported profiles built from one mollifier.

All frequency profiles are radial: ``transform`` takes ``|xi|`` (or a signed
1-d frequency, the profiles are even) and returns real values.  Every
profile is assembled from ``rho(t) = exp(-1 / (1 - t^2))`` on (-1, 1):

* ``smooth_step`` is its normalized primitive, a C-infinity step from 0 at
  t = -1 to 1 at t = +1;
* ``plateau(r, inner, outer)`` is 1 on ``r <= inner`` and 0 on ``r >= outer``;
* the nonnegative spatial bumps (eta, beta) are squared moduli ``|g|^2`` of
  inverse transforms of rescaled mollifiers, so their spectra are
  autocorrelations with exactly known support.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(128)

ETA_HALF_RADIUS = 1.0 / 200.0
ETA_TILDE_PLATEAU = 1.0 / 100.0
ETA_TILDE_SUPPORT = 1.0 / 10.0
BETA_HALF_RADIUS = 0.5
BETA_MAX_SCALE = 1e6


def mollifier(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def _mollifier_integral(a, b) -> np.ndarray:
    """Gauss-Legendre integral of the mollifier over [a, b] (broadcast)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return (mollifier(nodes) @ _GL_W) * half


MOLLIFIER_MASS = float(_mollifier_integral(-1.0, 1.0))


def smooth_step(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 1.0, 1.0, 0.0)
    lower = (t > -1.0) & (t <= 0.0)
    upper = (t > 0.0) & (t < 1.0)
    if lower.any():
        out[lower] = _mollifier_integral(-1.0, t[lower]) / MOLLIFIER_MASS
    if upper.any():
        # integrate the short side to keep relative accuracy near 1
        out[upper] = 1.0 - _mollifier_integral(t[upper], 1.0) / MOLLIFIER_MASS
    return out


def plateau(r, inner: float, outer: float) -> np.ndarray:
    """Smooth radial cutoff: 1 for ``|r| <= inner``, 0 for ``|r| >= outer``."""
    if not 0 <= inner < outer:
        raise PreconditionError(f"need 0 <= inner < outer, got {inner}, {outer}")
    r = np.abs(np.asarray(r, dtype=float))
    return 1.0 - smooth_step(2.0 * (r - inner) / (outer - inner) - 1.0)


def theta(xi) -> np.ndarray:
    """Base cutoff: 1 on |xi| <= 1, supported in |xi| <= 2."""
    return plateau(xi, 1.0, 2.0)


def bump_hat(xi, radius: float) -> np.ndarray:
    """Unit-mass mollifier supported in ``|xi| <= radius``."""
    return mollifier(np.asarray(xi, dtype=float) / radius) / (radius * MOLLIFIER_MASS)


def bump_autocorrelation(xi, radius: float) -> np.ndarray:
    """``int b(t) b(t - xi) dt`` for ``b = bump_hat(., radius)``; zero beyond 2*radius."""
    s = np.abs(np.asarray(xi, dtype=float)) / radius
    out = np.zeros_like(s)
    live = s < 2.0
    if live.any():
        sl = s[live]
        lo = sl - 1.0
        half = 0.5 * (1.0 - lo)
        mid = 0.5 * (1.0 + lo)
        nodes = mid[:, None] + half[:, None] * _GL_X
        vals = mollifier(nodes) * mollifier(nodes - sl[:, None])
        out[live] = (vals @ _GL_W) * half / (radius * MOLLIFIER_MASS**2)
    return out


def bump_inverse(x, radius: float) -> np.ndarray:
    """Inverse transform of ``bump_hat(., radius)`` on the real line (real, even).

    Trapezoid rule on the mollifier's support; the integrand and all its
    derivatives vanish at the endpoints, so the rule converges faster than
    any power once the oscillation is resolved.
    """
    x = np.asarray(x, dtype=float)
    flat = x.reshape(-1)
    xmax = float(np.max(np.abs(flat))) if flat.size else 0.0
    n = max(4097, int(64 * radius * xmax) + 1)
    s = np.linspace(-1.0, 1.0, n)
    weights = mollifier(s)
    weights /= weights.sum()
    out = np.empty(flat.shape, dtype=float)
    chunk = max(1, 4_000_000 // n)
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk]
        out[start:start + chunk] = np.cos(2 * np.pi * radius * np.outer(xs, s)) @ weights
    return out.reshape(x.shape)


@dataclass(frozen=True)
class FourierProfile:
    """A radial frequency profile with declared support and certificates."""

    kind: str
    rho: float
    params: dict
    certificates: dict
    transform_fn: Callable = field(repr=False, compare=False)
    spatial_fn: Callable | None = field(default=None, repr=False, compare=False)

    def transform(self, xi) -> np.ndarray:
        return self.transform_fn(np.asarray(xi, dtype=float))

    __call__ = transform

    def spatial(self, x) -> np.ndarray:
        """Values on the real line (d = 1) of the function whose transform this is."""
        if self.spatial_fn is None:
            raise PreconditionError(f"profile {self.kind!r} has no spatial evaluator")
        return self.spatial_fn(np.asarray(x, dtype=float))

    def reference_samples(self, oversample: int = 4, base: int = 1024):
        """Tabulation on ``[-1.25 rho, 1.25 rho]`` with ``oversample * base`` cells."""
        n = oversample * base
        xi = np.linspace(-1.25 * self.rho, 1.25 * self.rho, n + 1)
        return xi, self.transform(xi)

    def to_dict(self) -> dict:
        xi, vals = self.reference_samples()
        return {
            "kind": self.kind,
            "rho": self.rho,
            "params": self.params,
            "certificates": self.certificates,
            "samples": {"xi_min": float(xi[0]), "xi_max": float(xi[-1]),
                        "values": [float(v) for v in vals]},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def support_leak(profile: FourierProfile, n: int = 20001) -> float:
    """Largest |transform| on a scan of ``rho < |xi| <= 4 rho`` (should be 0)."""
    xi = np.linspace(profile.rho, 4 * profile.rho, n)[1:]
    return float(np.max(np.abs(profile.transform(xi))))


def second_difference_bound(profile: FourierProfile) -> float:
    xi, vals = profile.reference_samples()
    step = xi[1] - xi[0]
    return float(np.max(np.abs(np.diff(vals, 2))) / step**2)


def partition_of_unity_error(mother: Callable, n: int = 1000, kmin: int = -20,
                             kmax: int = 20, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    xi = 2.0 ** rng.uniform(kmin + 2, kmax - 2, n)
    total = np.zeros(n)
    for k in range(kmin, kmax + 1):
        total += mother(2.0 ** (-k) * xi)
    return float(np.max(np.abs(total - 1.0)))


def make_lp_mother() -> FourierProfile:
    def fn(xi):
        return theta(xi) - theta(2.0 * np.asarray(xi))

    prof = FourierProfile("mother", 2.0, {"annulus": [0.5, 2.0]}, {}, fn)
    xi = np.linspace(0.0, 4.0, 10001)
    outside = (xi <= 0.5) | (xi >= 2.0)
    certs = {
        "partition_of_unity_error": partition_of_unity_error(fn),
        "max_outside_annulus": float(np.max(np.abs(fn(xi[outside])))),
        "value_at_1": float(fn(np.array([1.0]))[0]),
        "second_difference": second_difference_bound(prof),
    }
    return FourierProfile("mother", 2.0, prof.params, certs, fn)


def make_inhomogeneous_father() -> FourierProfile:
    prof = FourierProfile("father", 2.0, {"plateau": 1.0}, {}, theta)
    certs = {
        "value_at_0": float(theta(np.array([0.0]))[0]),
        "support_leak": support_leak(prof),
        "second_difference": second_difference_bound(prof),
    }
    return FourierProfile("father", 2.0, prof.params, certs, theta)


def make_reproducing_kernel(k: int) -> FourierProfile:
    """1 on ``|xi| <= 2^(k-2)``, supported in ``|xi| <= 2^(k-1)``."""
    inner = 2.0 ** (k - 2)
    outer = 2.0 ** (k - 1)

    def fn(xi):
        return plateau(xi, inner, outer)

    prof = FourierProfile("reproducing", outer, {"k": k, "plateau": inner}, {}, fn)
    certs = {
        "plateau_min": float(np.min(fn(np.linspace(0.0, inner, 1001)))),
        "support_leak": support_leak(prof),
    }
    return FourierProfile("reproducing", outer, prof.params, certs, fn)


GAMMA_NOISE_FLOOR = 1e-14


def make_gamma(scan_max: float = 96.0, decay_power: int = 8) -> FourierProfile:
    """gamma(0) = 1 with transform supported in |xi| <= 1.

    ``C_gamma`` is fitted on ``[0, scan_max]``; the tail certificate rechecks
    the bound on ``[scan_max, 4 scan_max]`` wherever gamma is above the
    quadrature noise floor.
    """

    def fn(xi):
        return bump_hat(xi, 1.0)

    def spatial(x):
        return bump_inverse(x, 1.0)

    x = np.linspace(0.0, scan_max, 4097)
    weighted = np.abs(spatial(x)) * (1.0 + x) ** decay_power
    # refine between samples around the largest local maxima
    step = x[1] - x[0]
    peaks = x[np.argsort(weighted)[-8:]]
    fine = np.clip((peaks[:, None] + step * np.linspace(-1, 1, 257)).ravel(), 0.0, scan_max)
    fine_w = np.abs(spatial(fine)) * (1.0 + fine) ** decay_power
    c_gamma = float(max(weighted.max(), fine_w.max()))
    tail = np.linspace(scan_max, 4 * scan_max, 2049)
    tail_vals = np.abs(spatial(tail))
    above = tail_vals >= GAMMA_NOISE_FLOOR
    tail_ratio = float(np.max(tail_vals[above] * (1.0 + tail[above]) ** decay_power,
                              initial=0.0) / c_gamma)
    prof = FourierProfile("gamma", 1.0, {"decay_power": decay_power}, {}, fn, spatial)
    certs = {
        "value_at_0": float(spatial(np.array([0.0]))[0]),
        "C_gamma": c_gamma,
        "tail_over_C_gamma": tail_ratio,
        "support_leak": support_leak(prof),
    }
    return FourierProfile("gamma", 1.0, prof.params, certs, fn, spatial)


def make_eta() -> FourierProfile:
    """eta = |g|^2 with ghat supported in |xi| <= 1/200; eta(0) = 1."""
    a = ETA_HALF_RADIUS

    def fn(xi):
        return bump_autocorrelation(xi, a)

    def spatial(x):
        return bump_inverse(x, a) ** 2

    scan = np.linspace(-0.01, 0.01, 2001)
    prof = FourierProfile("eta", 2 * a, {"g_radius": a}, {}, fn, spatial)
    certs = {
        "c": float(np.min(spatial(scan))),
        "value_at_0": float(spatial(np.array([0.0]))[0]),
        "support_leak": support_leak(prof),
    }
    return FourierProfile("eta", 2 * a, prof.params, certs, fn, spatial)


def make_eta_tilde() -> FourierProfile:
    def fn(xi):
        return plateau(xi, ETA_TILDE_PLATEAU, ETA_TILDE_SUPPORT)

    prof = FourierProfile("eta_tilde", ETA_TILDE_SUPPORT,
                          {"plateau": ETA_TILDE_PLATEAU}, {}, fn)
    certs = {
        "plateau_min": float(np.min(fn(np.linspace(0, ETA_TILDE_PLATEAU, 1001)))),
        "support_leak": support_leak(prof),
    }
    return FourierProfile("eta_tilde", ETA_TILDE_SUPPORT, prof.params, certs, fn)


def make_beta(M: int) -> FourierProfile:
    """beta = s |g|^2 >= 1 on [-2^-M, 2^-M], transform supported in |xi| <= 1."""
    if M < 1 or int(M) != M:
        raise PreconditionError(f"M must be a positive integer, got {M}")
    a = BETA_HALF_RADIUS
    half = 2.0 ** (-M)
    scan = np.linspace(-half, half, 4001)
    g2 = bump_inverse(scan, a) ** 2
    gmin = float(np.min(g2))
    if not gmin > 0 or 1.0 / gmin > BETA_MAX_SCALE:
        raise PreconditionError(
            f"normalization for M={M} needs scale {1.0 / gmin if gmin > 0 else math.inf:.3e}"
            f" > {BETA_MAX_SCALE:.0e}")
    s = 1.0 / gmin
    while s * gmin < 1.0:
        s = math.nextafter(s, math.inf)

    def fn(xi):
        return s * bump_autocorrelation(xi, a)

    def spatial(x):
        return s * bump_inverse(x, a) ** 2

    prof = FourierProfile("beta", 2 * a, {"M": M, "g_radius": a}, {}, fn, spatial)
    certs = {
        "scale": s,
        "min_on_cube": float(np.min(spatial(scan))),
        "support_leak": support_leak(prof),
    }
    return FourierProfile("beta", 2 * a, prof.params, certs, fn, spatial)

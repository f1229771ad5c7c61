"""The modulated far-bump family and the lattice-of-bumps sharpness family.

Neither family is sampled on one global grid.  Every operator involved
commutes with dyadic dilations, so each scale ``k`` is evaluated on its own
rescaled grid: ``u = 2^-k x`` for the modulated family and ``v = 2^k x`` for
the sharpness family.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from .bumps import ETA_HALF_RADIUS, bump_hat, make_beta, make_eta
from .errors import PreconditionError
from .maximal import WindowLadder, _ladder_sup, hl_maximal, peetre_from_abs, sliding_max, window_value
from .reports import GrowthReport, run_jobs, trend_fit
from .sample_grid import BandSpec, GridSpec, SampledField, Spectrum, band_check, synthesize

# largest scale whose center 2^k k^alpha is still a finite double with headroom
MAX_SCALE = 900
# eta table: half-length and spacing of the u-grid
ETA_HALF_LENGTH = 2.0**15
ETA_STEP = 1.0 / 16.0
PLATEAU_LIMIT = 0.05
R2_LIMIT = 0.98
CAUCHY_LIMIT = 1e-3
UPPER_VARIATION_LIMIT = 0.10
RATE_TOLERANCE = 0.15
BOUNDED_VARIATION = 2.0


# ---------------------------------------------------------------- eta tables

@lru_cache(maxsize=1)
def _eta_grid():
    """``eta = g^2`` and ``eta'`` on a centred u-grid, from the exact spectrum of g."""
    n = int(2 * ETA_HALF_LENGTH / ETA_STEP)
    length = 2 * ETA_HALF_LENGTH
    xi = np.fft.fftfreq(n, d=ETA_STEP)
    ghat = bump_hat(xi, ETA_HALF_RADIUS)
    g = np.fft.ifft(ghat).real / ETA_STEP
    dg = np.fft.ifft(2j * np.pi * xi * ghat).real / ETA_STEP
    dg /= g[0]
    g /= g[0]
    u = np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / length))
    g = np.fft.fftshift(g)
    dg = np.fft.fftshift(dg)
    return u, g * g, 2.0 * g * dg, xi


@dataclass(frozen=True)
class EtaPower:
    """``eta^r`` with its antiderivative ``E(u) = int_{-inf}^u eta^r``.

    ``E`` is exact at the table nodes (spectral antiderivative of a
    band-limited function) and cubic-Hermite between them.
    """

    r: float
    total: float
    _E: CubicHermiteSpline
    _eta: CubicHermiteSpline

    def eta(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        live = np.abs(u) < ETA_HALF_LENGTH
        out[live] = self._eta(u[live])
        return np.maximum(out, 0.0)

    def power(self, u) -> np.ndarray:
        return self.eta(u) ** self.r

    def antiderivative(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.where(u >= ETA_HALF_LENGTH, self.total, 0.0)
        live = np.abs(u) < ETA_HALF_LENGTH
        out[live] = self._E(u[live])
        return out


@lru_cache(maxsize=8)
def eta_power(r: float) -> EtaPower:
    if not r > 0:
        raise PreconditionError(f"power must be positive, got {r}")
    u, eta, deta, xi = _eta_grid()
    p = eta**r
    length = 2 * ETA_HALF_LENGTH
    coeffs = np.fft.fft(np.fft.ifftshift(p)) * ETA_STEP
    total = float(coeffs[0].real)
    with np.errstate(divide="ignore", invalid="ignore"):
        anti = np.where(xi == 0, 0.0, coeffs / (2j * np.pi * xi))
    periodic = np.fft.fftshift(np.fft.ifft(anti).real / ETA_STEP)
    E = total * (u - u[0]) / length + periodic - periodic[0]
    nodes = np.append(u, ETA_HALF_LENGTH)
    E = np.append(E, total)
    spline_E = CubicHermiteSpline(nodes, E, np.append(p, p[0]))
    spline_eta = CubicHermiteSpline(nodes, np.append(eta, eta[0]), np.append(deta, deta[0]))
    return EtaPower(float(r), total, spline_E, spline_eta)


# ---------------------------------------------------------------- modulated family

@dataclass(frozen=True)
class ModulatedFamilySpec:
    """``f_k(x) = eta(2^-k x - k^alpha) e^{2 pi i 2^k x}`` for ``k = 1..K`` (d = 1).

    ``alpha=None`` selects ``alpha = r/q``.
    """

    r: float = 16.0
    q: float = 4.0
    alpha: float | None = None
    K: int = 512
    ladder: tuple = (16, 32, 64, 128, 256, 512)
    cells: int = 4096
    tail: float = 4096.0
    eps: float = 0.5

    def __post_init__(self):
        if not (self.r > 0 and self.q > 0):
            raise PreconditionError(f"r and q must be positive, got {self.r}, {self.q}")
        if self.alpha is not None and not self.alpha > 0:
            raise PreconditionError(f"alpha must be positive, got {self.alpha}")
        if not 1 <= self.K <= MAX_SCALE:
            raise PreconditionError(
                f"K={self.K} outside 1..{MAX_SCALE}: the center 2^k k^alpha is not "
                "representable in double precision beyond that")
        object.__setattr__(self, "ladder", tuple(int(K) for K in self.ladder if K <= self.K))
        if self.cells < 16 or self.cells & (self.cells - 1):
            raise PreconditionError(f"cells must be a power of two >= 16, got {self.cells}")

    @property
    def exponent(self) -> float:
        return self.r / self.q if self.alpha is None else float(self.alpha)

    @property
    def exact_exponent(self) -> bool:
        return math.isclose(self.exponent, self.r / self.q, rel_tol=0, abs_tol=1e-15)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ladder"] = list(self.ladder)
        out["exponent"] = self.exponent
        return out


def bump_center(k: int, alpha: float):
    """``k^alpha`` in u-units; an exact integer when alpha is integral."""
    if float(alpha).is_integer():
        return int(k) ** int(alpha)
    return float(k) ** float(alpha)


def _torus_length(D, tail: float):
    """Smallest power of two at least ``4 (D + tail)``."""
    if isinstance(D, int):
        n = 4 * (D + int(math.ceil(tail)))
        return 1 << (n - 1).bit_length()
    return 2.0 ** math.ceil(math.log2(4.0 * (D + tail)))


@dataclass(frozen=True)
class ModulatedScale:
    """One scale of the modulated family on its rescaled torus ``[0, L_u)``."""

    k: int
    alpha: float
    D: object
    L_u: object
    cells: int

    @property
    def h_u(self) -> float:
        return float(self.L_u) / self.cells

    def modulus(self, u) -> np.ndarray:
        """``|f_k|`` at rescaled points ``u`` (the modulation has modulus 1)."""
        return eta_power(1.0).eta(np.asarray(u, dtype=float) - float(self.D))

    def edge_offsets(self) -> np.ndarray:
        """``i h_u - k^alpha`` for every cell edge, exact before the final rounding."""
        if isinstance(self.D, int) and isinstance(self.L_u, int):
            step = self.L_u // self.cells
            return np.array([float(i * step - self.D) for i in range(self.cells + 1)])
        return np.arange(self.cells + 1) * self.h_u - float(self.D)

    def cell_power(self, r: float) -> np.ndarray:
        """Cell averages of ``|f_k|^r`` on the rescaled grid."""
        E = eta_power(r).antiderivative(self.edge_offsets())
        # roundoff in the antiderivative difference can dip below zero
        return np.maximum(np.diff(E), 0.0) / self.h_u

    def window_values(self, r: float, power: np.ndarray | None = None) -> np.ndarray:
        """Per window size, the largest ``L^r`` average over windows containing cell 0."""
        power = self.cell_power(r) if power is None else power
        ladder = WindowLadder.build(power, self.h_u)
        out = []
        for j, m in enumerate(ladder.sizes):
            vals = window_value(ladder.sums[j], m, 1, r, 1.0)
            out.append(float(sliding_max(vals, m)[0]))
        return np.asarray(out)

    def maximal_at_origin(self, r: float) -> float:
        """``M_r f_k`` on ``x in [0, 2^k h_u)``, which contains ``[0, 1/2]``."""
        return float(np.max(self.window_values(r)))

    def penalized_at_origin(self, r: float, eps: float) -> float:
        """Scale-penalized maximal function at the origin.

        In x-units a window of ``m`` cells has side ``2^k m h_u``, so its
        penalty is ``(4^k m h_u)^-eps``; no window is short enough to escape it.
        """
        vals = self.window_values(r)
        logw = 2 * self.k * math.log(2.0) + np.log(self.h_u * 2.0 ** np.arange(len(vals)))
        return float(np.max(np.exp(-eps * logw) * vals))

    def maximal_oracle(self, r: float) -> float:
        """Direct enumeration of every window containing cell 0 from the antiderivative."""
        C = eta_power(r).antiderivative(self.edge_offsets())
        n = self.cells
        best = 0.0
        m = 1
        while m <= n:
            for s in range(-m + 1, 1):
                start = s % n
                stop = start + m
                if stop <= n:
                    mass = C[stop] - C[start]
                else:
                    mass = (C[n] - C[start]) + (C[stop - n] - C[0])
                best = max(best, (max(mass, 0.0) / (m * self.h_u)) ** (1.0 / r))
            m *= 2
        return best

    def envelope_certificate(self, length: float = 2.0**14, n: int = 2**12) -> dict:
        """Band certificate of the envelope in u-units.

        The envelope is synthesized from ``eta-hat`` on a local torus and
        compared with direct samples; its transform lives in ``|nu| <= 1/100``,
        so ``f_k``'s transform lives in ``|xi - 2^k| <= 2^-k / 100``.
        """
        grid = GridSpec(1, length, n)
        shift = (self.D % int(length)) if isinstance(self.D, int) else math.fmod(self.D, length)
        shift = float(shift)
        xi = np.fft.fftfreq(n, d=grid.h)
        coeffs = make_eta().transform(xi) * np.exp(-2j * np.pi * xi * shift)
        env = synthesize(Spectrum.from_fft_order(grid, coeffs))
        u = grid.coords()
        dist = (u - shift + length / 2) % length - length / 2
        direct = eta_power(1.0).eta(dist)
        radius = 2 * ETA_HALF_RADIUS
        return {
            "out_of_band": band_check(env, BandSpec(0, radius)),
            "sample_mismatch": float(np.max(np.abs(env.values - direct))),
            "u_radius": radius,
            "x_radius": radius * 2.0 ** (-self.k),
            "center_modulus": float(self.modulus(np.array([float(self.D)]))[0]),
        }


def build_modulated_family(spec: ModulatedFamilySpec, alpha: float | None = None) -> list:
    """Per-scale handles ``k = 1..K`` on rescaled tori."""
    a = spec.exponent if alpha is None else alpha
    out = []
    for k in range(1, spec.K + 1):
        D = bump_center(k, a)
        out.append(ModulatedScale(k, a, D, _torus_length(D, spec.tail), spec.cells))
    return out


def _scale_job(job):
    k, alpha, r, eps, cells, tail = job
    D = bump_center(k, alpha)
    sc = ModulatedScale(k, alpha, D, _torus_length(D, tail), cells)
    vals = sc.window_values(r)
    logw = 2 * k * math.log(2.0) + np.log(sc.h_u * 2.0 ** np.arange(len(vals)))
    return float(np.max(vals)), float(np.max(np.exp(-eps * logw) * vals))


def _representative_cubes(spec: ModulatedFamilySpec, fine: int = 6) -> tuple:
    """Cubes around each bump center at every relevant size, plus cubes ``[0, 2^m]``."""
    alpha = spec.exponent
    lo, hi, level = [], [], []
    for k0 in range(1, spec.K + 1):
        D = float(bump_center(k0, alpha))
        xc = 2.0**k0 * D
        top = int(math.ceil(math.log2(D + spec.tail))) + 2
        for j in range(-fine, top + 1):
            side = 2.0 ** (k0 + j)
            a = math.floor(xc / side) * side
            lo.append(a)
            hi.append(a + side)
            level.append(-(k0 + j))
    D_K = float(bump_center(spec.K, alpha))
    for m in range(-fine, spec.K + int(math.ceil(math.log2(D_K + spec.tail))) + 3):
        lo.append(0.0)
        hi.append(2.0**m)
        level.append(-m)
    return np.asarray(lo), np.asarray(hi), np.asarray(level)


def local_sum_ladder(spec: ModulatedFamilySpec) -> np.ndarray:
    """Truncated local ``l^q`` averages; entry ``[i, K-1]`` is cube i with scales ``1..K``.

    ``int_P |f_k|^q = 2^k (E_q(2^-k b - k^alpha) - E_q(2^-k a - k^alpha))``.
    """
    table = eta_power(spec.q)
    lo, hi, level = _representative_cubes(spec)
    side = hi - lo
    ks = np.arange(1, spec.K + 1)
    D = np.array([float(bump_center(k, spec.exponent)) for k in ks])
    scale = 2.0**ks
    out = np.zeros((len(lo), spec.K))
    for c0 in range(0, len(lo), 2048):
        sl = slice(c0, c0 + 2048)
        ua = lo[sl, None] / scale[None, :] - D[None, :]
        ub = hi[sl, None] / scale[None, :] - D[None, :]
        mass = table.antiderivative(ub) - table.antiderivative(ua)
        contrib = scale[None, :] * mass / side[sl, None]
        contrib[ks[None, :] < level[sl, None]] = 0.0
        out[sl] = np.cumsum(contrib, axis=1)
    return out


def crosscheck_global(spec: ModulatedFamilySpec, K: int = 4, L_x: float = 2.0**16,
                      N_x: int = 2**17) -> dict:
    """Compare rescaled and global-grid ``M_r f_k`` for ``k = 1..K``.

    The rescaled grid for scale k is the global grid divided by ``2^k``.
    """
    if K > 6:
        raise PreconditionError(f"global grids are only affordable for K <= 6, got {K}")
    grid = GridSpec(1, L_x, N_x)
    x = grid.coords()
    worst = 0.0
    for k in range(1, K + 1):
        sc = ModulatedScale(k, spec.exponent, bump_center(k, spec.exponent), L_x / 2**k, N_x)
        u = x / 2.0**k
        env = sc.modulus(u)
        f = SampledField(grid, env * np.exp(2j * np.pi * 2.0**k * x), None, f"f{k}")
        direct = hl_maximal(f, spec.r).values
        ladder = WindowLadder.build(env**spec.r, sc.h_u)
        rescaled = _ladder_sup(ladder, 1, spec.r, [1.0] * len(ladder.sizes))
        worst = max(worst, float(np.max(np.abs(direct - rescaled)) / np.max(direct)))
    return {"K": K, "L_x": L_x, "N_x": N_x, "max_rel_diff": worst}


def _series(spec: ModulatedFamilySpec, alpha: float, workers: int):
    jobs = [(k, alpha, spec.r, spec.eps, spec.cells, spec.tail) for k in range(1, spec.K + 1)]
    res = run_jobs(_scale_job, jobs, workers)
    return np.array([a for a, _ in res]), np.array([b for _, b in res])


def measure_modulated_divergence(spec: ModulatedFamilySpec, workers: int = 1) -> GrowthReport:
    """LHS/RHS growth of the modulated family against the truncation K."""
    if not spec.exact_exponent:
        raise PreconditionError(
            f"alpha={spec.exponent} is not r/q={spec.r / spec.q}; the divergence "
            "measurement needs alpha = r/q")
    if len(spec.ladder) < 3:
        raise PreconditionError("the K ladder needs at least three entries")
    q, r = spec.q, spec.r
    ks = np.arange(1, spec.K + 1)
    m_k, pen_k = _series(spec, spec.exponent, workers)
    m2_k, _ = _series(spec, 2 * spec.exponent, workers)
    S = np.cumsum(m_k**q)
    S2 = np.cumsum(m2_k**q)
    P = np.cumsum(pen_k**q)
    local = local_sum_ladder(spec)
    Ks = np.asarray(spec.ladder)
    lhs_q = S[Ks - 1] / 2.0
    lhs = lhs_q ** (1.0 / q)
    lhs2 = (S2[Ks - 1] / 2.0) ** (1.0 / q)
    pen = (P[Ks - 1] / 2.0) ** (1.0 / q)
    rhs = np.max(local[:, Ks - 1], axis=0) ** (1.0 / q)
    fit = trend_fit(np.log(Ks), lhs_q, log=False)
    expo = trend_fit(np.log(np.log(Ks)), lhs, log=True)
    rows = []
    for i, K in enumerate(Ks):
        rows.append({"K": int(K), "lhs": lhs[i], "lhs_q": lhs_q[i], "rhs": rhs[i],
                     "lhs_doubled_alpha": lhs2[i], "lhs_penalized": pen[i],
                     "fitted_exponent": expo["slope"], "r2": fit["r2"]})
    report = GrowthReport("modulated", spec.to_dict(), rows, fit)
    i64 = int(np.searchsorted(Ks, 64)) if 64 in Ks else 0
    plateau = rhs[-1] / rhs[i64] - 1.0
    report.add_check("rhs_plateau", plateau, PLATEAU_LIMIT, plateau <= PLATEAU_LIMIT)
    report.add_check("lhs_q_vs_lnK_r2", fit["r2"], R2_LIMIT, fit["r2"] >= R2_LIMIT)
    gap = abs(lhs2[-1] - lhs2[-2]) / lhs2[-1]
    report.add_check("doubled_alpha_cauchy", gap, CAUCHY_LIMIT, gap <= CAUCHY_LIMIT)
    lower = m_k * ks ** (spec.exponent / r)
    report.extra = {
        "exponent_fit": expo,
        "predicted_exponents": {"1/q": 1.0 / q, "1/r": 1.0 / r},
        "doubled_alpha": 2 * spec.exponent,
        "doubled_alpha_sum_gap": abs(S2[Ks[-1] - 1] - S2[Ks[-2] - 1]) / S2[Ks[-1] - 1],
        "lower_bound_constant": {"min": float(lower.min()), "max": float(lower.max())},
        "penalized_growth": float(pen[-1] / pen[0]),
        "rhs_from_K64": plateau,
        "rescaled_grid": {"cells": spec.cells, "tail": spec.tail},
    }
    return report


# ---------------------------------------------------------------- bounded sum

def _integral_to_inf(f, a: float) -> float:
    """``int_a^inf f`` through ``t = a / s^2``, which tames algebraic tails."""
    def g(s):
        return f(a / (s * s)) * 2.0 * a / s**3 if s > 0 else 0.0

    val, _ = integrate.quad(g, 0.0, 1.0, limit=200, epsabs=0.0, epsrel=1e-13)
    return val


def _em_tail(f, df, a: float) -> float:
    """``sum_{k > a} f(k)`` for smooth decreasing ``f`` (Euler-Maclaurin, two terms)."""
    return _integral_to_inf(f, a) - 0.5 * f(a) - df(a) / 12.0


def _scaled_series(x: np.ndarray, alpha: float, M: float, k_direct: int,
                   tail: bool = True) -> np.ndarray:
    """``sum_k (1 + |2^-k x - k^alpha|)^-M`` at each x; scales past ``k_direct`` see ``2^-k x = 0``.

    ``tail=False`` returns the partial sum over ``k <= k_direct``.
    """
    ks = np.arange(1, k_direct + 1, dtype=float)
    kpow = ks**alpha
    scale = 2.0 ** (-ks)
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        out[i] = np.sum((1.0 + np.abs(xi * scale - kpow)) ** (-M))
    if not tail:
        return out

    def f(t):
        return (1.0 + t**alpha) ** (-M)

    def df(t):
        return -M * alpha * t ** (alpha - 1) * (1.0 + t**alpha) ** (-M - 1)

    return out + _em_tail(f, df, float(k_direct))


def _contrast_series(x: float, alpha: float, M: float, reach: float = 256.0,
                     tail: bool = True) -> float:
    """``sum_k (1 + |x - k^alpha|)^-M``: direct up to ``k^alpha <= x + reach``, integral beyond."""
    kc = int((x + reach) ** (1.0 / alpha))
    ks = np.arange(1, kc + 1, dtype=float)
    head = float(np.sum((1.0 + np.abs(x - ks**alpha)) ** (-M)))
    if not tail:
        return head
    tail = _integral_to_inf(lambda t: (1.0 + t**alpha - x) ** (-M), kc + 0.5)
    return head + tail


def bounded_sum_probe(alpha: float, M: float, x_max: float = 2.0**64, points: int = 1024,
                      contrast_max: float = 1024.0, probe: bool = False) -> GrowthReport:
    """Sup of the rescaled series over ``[0, x_max]`` and growth of the unscaled contrast.

    The x-grid is geometric and also contains every bump center ``2^k k^alpha``.
    When ``M alpha <= 1`` (probe mode only) the series diverges: values are
    partial sums over ``k <= k_direct`` and ``extra`` records the growth of
    the partial sums at ``x = 0``.
    """
    if not (alpha > 0 and M > 0):
        raise PreconditionError(f"alpha and M must be positive, got {alpha}, {M}")
    if M * alpha <= 1 and not probe:
        raise PreconditionError(
            f"M={M} <= 1/alpha={1 / alpha}: the series is not bounded; use probe mode")
    k_direct = max(4096, int(math.log2(max(x_max, 2.0))) + 1200)
    centers = []
    for k in range(1, MAX_SCALE + 1):
        c = math.ldexp(float(k) ** alpha, k)
        if c > x_max:
            break
        centers.append(c)
    x = np.unique(np.concatenate([[0.0], np.geomspace(1.0, x_max, points), centers]))
    converges = M * alpha > 1
    values = _scaled_series(x, alpha, M, k_direct, tail=converges)
    cx = np.geomspace(1.0, contrast_max, 48)
    cvals = np.array([_contrast_series(v, alpha, M, tail=converges) for v in cx])
    Xs = 2.0 ** np.arange(2, int(math.log2(contrast_max)) + 1)
    csup = np.array([cvals[cx <= X * (1 + 1e-12)].max() for X in Xs])
    cfit = trend_fit(np.log(Xs), csup, log=True)
    rows = [{"x": float(a), "series": float(b)} for a, b in zip(x, values)]
    report = GrowthReport("bounded_sum", {"alpha": alpha, "M": M, "x_max": x_max,
                                          "probe": probe}, rows, cfit)
    report.extra = {
        "sup_value": float(values.max()),
        "argsup": float(x[int(np.argmax(values))]),
        "at_zero": float(values[0]),
        "k_direct": k_direct,
        "contrast": [{"X": float(X), "sup": float(s)} for X, s in zip(Xs, csup)],
        "contrast_slope": cfit["slope"],
        "contrast_grows": bool(cfit["slope"] > 0.1),
        "converges": converges,
    }
    if not converges:
        Ks = 2 ** np.arange(4, 21)
        ks = np.arange(1, Ks[-1] + 1, dtype=float)
        partial = np.cumsum((1.0 + ks**alpha) ** (-M))[Ks - 1]
        report.extra["partial_sums_at_zero"] = [{"K": int(K), "sum": float(v)}
                                                for K, v in zip(Ks, partial)]
        report.extra["partial_sum_trend"] = trend_fit(np.log(Ks), partial, log=False)
    if not probe:
        sup = float(values.max())
        report.add_check("series_sup_finite", sup, "finite", math.isfinite(sup))
    return report


# ---------------------------------------------------------------- sharpness family

@dataclass(frozen=True)
class SharpnessFamilySpec:
    """Lattice of width ``2^-k-M`` indicators at spacing ``2^-k+N`` smoothed by ``beta_k``.

    ``resolution`` is ``log2`` of the number of samples per unit length in
    the rescaled variable ``v = 2^k x``.
    """

    M: int = 3
    N: int = 4
    mu: int = 0
    q: float = 2.0
    sigma: float = 0.5
    K_cap: int | None = None
    resolution: int | None = None

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise PreconditionError(f"M and N must be positive, got {self.M}, {self.N}")
        if not (self.q > 0 and self.sigma > 0):
            raise PreconditionError("q and sigma must be positive")
        if self.samples_log2 < self.M + 1:
            raise PreconditionError(
                f"spacing 2^-{self.samples_log2} cannot resolve the indicator width "
                f"2^-{self.M}; need resolution >= {self.M + 1}")
        if self.count < 1:
            raise PreconditionError(
                f"empty scale range k = {self.N + self.mu} .. {self.k_top}")

    @property
    def samples_log2(self) -> int:
        return self.M + 2 if self.resolution is None else int(self.resolution)

    @property
    def k_top(self) -> int:
        top = 2**self.N
        return top if self.K_cap is None else min(top, self.K_cap)

    @property
    def count(self) -> int:
        """Number of scales ``k = N + mu .. 2^N`` (capped)."""
        return self.k_top - self.N - self.mu + 1

    def with_(self, **kw) -> "SharpnessFamilySpec":
        return SharpnessFamilySpec(**{**asdict(self), **kw})

    def to_dict(self) -> dict:
        return {**asdict(self), "count": self.count}


def _indicator_hat(xi: np.ndarray, width: float) -> np.ndarray:
    """Transform of the indicator of ``[0, width]``."""
    xi = np.asarray(xi, dtype=float)
    out = np.full(xi.shape, width, dtype=complex)
    nz = xi != 0
    z = 2j * np.pi * xi[nz]
    out[nz] = (1.0 - np.exp(-z * width)) / z
    return out


@dataclass(frozen=True)
class SharpnessCell:
    """One period cell ``[0, 2^N)`` of ``f_k`` in ``v = 2^k x`` (the same for every k)."""

    spec: SharpnessFamilySpec
    field: SampledField
    beta_scale: float

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    def indicator(self) -> np.ndarray:
        cells = int(round(2.0 ** (-self.spec.M) / self.grid.h))
        out = np.zeros(self.grid.N)
        out[:cells] = 1.0
        return out

    def normalized_upper(self) -> float:
        """``|P|^-1 int_P |f_k|^q`` for any single admissible k."""
        a = self.field.abs()
        return 2.0 ** (-self.spec.N) * self.grid.h * float(np.sum(a**self.spec.q))

    def normalized_lower(self, sigma: float) -> float:
        """``|P|^-1 int_P (Peetre_{sigma, 2^k} f_k)^q`` for any single admissible k."""
        pm = peetre_from_abs(self.field.abs(), self.grid, sigma, 0, "sparse")
        return 2.0 ** (-self.spec.N) * self.grid.h * float(np.sum(pm**self.spec.q))

    def upper(self) -> float:
        return (self.spec.count * self.normalized_upper()) ** (1.0 / self.spec.q)

    def lower(self, sigma: float) -> float:
        return (self.spec.count * self.normalized_lower(sigma)) ** (1.0 / self.spec.q)

    def center_value(self) -> dict:
        """``beta * chi`` at the indicator's center, on the grid and by quadrature."""
        M = self.spec.M
        c = 2.0 ** (-M - 1)
        idx = int(round(c / self.grid.h))
        nodes, weights = np.polynomial.legendre.leggauss(64)
        t = c * (nodes + 1.0)
        beta = make_beta(M)
        single = float(c * np.sum(weights * beta.spatial(c - t)))
        return {"grid": float(self.field.values[idx].real), "single_bump": single,
                "bound": 2.0 ** (-M)}

    def domination_ratio(self) -> float:
        """``max |beta * h| / M_s h`` on the cell with ``s = q/2``."""
        s = self.spec.q / 2.0
        h = SampledField(self.grid, self.indicator())
        return float(np.max(self.field.abs() / hl_maximal(h, s).values))


def _cell_coefficients(spec: SharpnessFamilySpec, grid: GridSpec, copies: int) -> np.ndarray:
    beta = make_beta(spec.M)
    xi = np.fft.fftfreq(grid.N, d=grid.h)
    lattice = sum(np.exp(-2j * np.pi * xi * j * 2.0**spec.N) for j in range(copies))
    return beta.transform(xi) * _indicator_hat(xi, 2.0 ** (-spec.M)) * lattice


def build_sharpness_family(spec: SharpnessFamilySpec) -> SharpnessCell:
    """Synthesize the period cell of ``f_k`` from ``beta-hat * chi-hat`` on the cell lattice."""
    grid = GridSpec(1, 2.0**spec.N, 2 ** (spec.N + spec.samples_log2))
    coeffs = _cell_coefficients(spec, grid, 1)
    F = synthesize(Spectrum.from_fft_order(grid, coeffs), BandSpec(0, 1.0), "sharpness_cell")
    return SharpnessCell(spec, F, make_beta(spec.M).certificates["scale"])


def cell_periodicity(spec: SharpnessFamilySpec) -> float:
    """Max difference between the two halves of a two-cell synthesis and the one-cell field."""
    one = build_sharpness_family(spec).field.values
    grid = GridSpec(1, 2.0 ** (spec.N + 1), 2 ** (spec.N + 1 + spec.samples_log2))
    two = synthesize(Spectrum.from_fft_order(grid, _cell_coefficients(spec, grid, 2))).values
    n = len(one)
    return float(max(np.max(np.abs(two[:n] - one)), np.max(np.abs(two[n:] - one))))


def direct_scale(spec: SharpnessFamilySpec, k: int) -> SampledField:
    """``f_k`` on the x-torus ``[0, 2^-mu)`` from its own spectrum, lattice summed term by term."""
    if k < spec.N + spec.mu:
        raise PreconditionError(f"k={k} below N + mu = {spec.N + spec.mu}")
    n = 2 ** (k - spec.mu + spec.samples_log2)
    grid = GridSpec(1, 2.0 ** (-spec.mu), n)
    xi = np.fft.fftfreq(n, d=grid.h)
    lattice = np.zeros(n, dtype=complex)
    for j in range(2 ** (k - spec.N - spec.mu)):
        lattice += np.exp(-2j * np.pi * xi * j * 2.0 ** (spec.N - k))
    coeffs = (make_beta(spec.M).transform(xi / 2.0**k)
              * _indicator_hat(xi, 2.0 ** (-k - spec.M)) * lattice)
    return synthesize(Spectrum.from_fft_order(grid, coeffs), BandSpec(k, 1.0), f"f{k}")


def self_similarity(spec: SharpnessFamilySpec, extra_scales: int = 2,
                    sigma: float | None = None) -> dict:
    """Per-k normalized integrals from direct x-grids against the single cell."""
    sigma = spec.sigma if sigma is None else sigma
    cell = build_sharpness_family(spec)
    up, lo = cell.normalized_upper(), cell.normalized_lower(sigma)
    worst = 0.0
    rows = []
    for k in range(spec.N + spec.mu, spec.N + spec.mu + extra_scales + 1):
        f = direct_scale(spec, k)
        scale = 2.0**spec.mu * f.grid.h
        u_k = scale * float(np.sum(f.abs() ** spec.q))
        pm = peetre_from_abs(f.abs(), f.grid, sigma, k, "sparse")
        l_k = scale * float(np.sum(pm**spec.q))
        dev = max(abs(u_k - up) / up, abs(l_k - lo) / lo)
        worst = max(worst, dev)
        rows.append({"k": k, "upper": u_k, "lower": l_k, "rel_dev": dev})
    return {"cell_upper": up, "cell_lower": lo, "max_rel_dev": worst, "rows": rows}


def _sharpness_job(job):
    spec, sigmas = job
    cell = build_sharpness_family(spec)
    return cell.upper(), [cell.lower(s) for s in sigmas]


def measure_sharpness_rates(spec: SharpnessFamilySpec, Ns=tuple(range(3, 17)),
                            fit_Ns=tuple(range(10, 17)), upper_Ns=(4, 5, 6, 7, 8),
                            r_cor: float = 1.0, workers: int = 1) -> GrowthReport:
    """Upper and lower sums against N at ``sigma = 1/q``, ``1/(2q)`` and ``1/r_cor``.

    ``lower^q`` is affine in N at the critical sigma, so log-log slopes
    approach ``1/q`` only like ``N / (N - N0)``; rates are fitted on
    ``fit_Ns`` and the same fits on the smallest N are kept in ``extra``.
    """
    q = spec.q
    if not r_cor < q:
        raise PreconditionError(f"corollary check needs r < q, got r={r_cor}, q={q}")
    Ns = sorted({int(n) for n in (*Ns, *fit_Ns, *upper_Ns)})
    sig_crit, sig_half, sig_cor = 1.0 / q, 1.0 / (2 * q), 1.0 / r_cor
    sigmas = [sig_crit, sig_half, sig_cor]
    specs = [spec.with_(N=n) for n in Ns]
    results = run_jobs(_sharpness_job, [(s, sigmas) for s in specs], workers)
    N_arr = np.asarray(Ns, dtype=float)
    upper = np.array([u for u, _ in results])
    lows = np.array([l for _, l in results])
    ratio_cor = lows[:, 2] / upper

    def fits(sel):
        m = np.isin(Ns, sel)
        return (trend_fit(np.log(N_arr[m]), lows[m, 0], log=True),
                trend_fit(N_arr[m], np.log2(lows[m, 1]), log=False))

    fit_crit, fit_half = fits(fit_Ns)
    small_crit, small_half = fits([n for n in Ns if n <= 8])
    rows = []
    for i, n in enumerate(Ns):
        rows.append({"N": n, "count": specs[i].count, "upper": upper[i],
                     "lower_sigma_1_over_q": lows[i, 0], "lower_sigma_1_over_2q": lows[i, 1],
                     "lower_sigma_1_over_r": lows[i, 2], "corollary_ratio": ratio_cor[i],
                     "fitted_exponent": fit_crit["slope"], "r2": fit_crit["r2"]})
    report = GrowthReport("sharpness", {**spec.to_dict(), "Ns": Ns, "fit_Ns": list(fit_Ns),
                                        "upper_Ns": list(upper_Ns), "r_cor": r_cor},
                          rows, fit_crit)
    sub = upper[np.isin(Ns, upper_Ns)]
    var = float(sub.max() / sub.min() - 1.0)
    report.add_check("upper_variation", var, UPPER_VARIATION_LIMIT, var <= UPPER_VARIATION_LIMIT)
    dev = abs(fit_crit["slope"] - 1.0 / q) / (1.0 / q)
    report.add_check("critical_exponent", fit_crit["slope"], [1.0 / q, RATE_TOLERANCE],
                     dev <= RATE_TOLERANCE)
    target = 1.0 / q - sig_half
    dev2 = abs(fit_half["slope"] - target) / target
    report.add_check("subcritical_log2_rate", fit_half["slope"], [target, RATE_TOLERANCE],
                     dev2 <= RATE_TOLERANCE)
    spread = float(ratio_cor.max() / ratio_cor.min())
    report.add_check("corollary_bounded", spread, BOUNDED_VARIATION, spread <= BOUNDED_VARIATION)
    report.extra = {
        "subcritical_fit": fit_half,
        "small_N_fits": {"critical": small_crit, "subcritical": small_half},
        "critical_lower_q_vs_N": trend_fit(N_arr, lows[:, 0] ** q, log=False),
        "critical_lower_q_increments": np.diff(lows[:, 0] ** q),
        "corollary_slope": trend_fit(N_arr, ratio_cor, log=True),
        "r_ge_q_growth": float(lows[-1, 0] / upper[-1] / (lows[0, 0] / upper[0])),
        "sigmas": {"critical": sig_crit, "subcritical": sig_half, "corollary": sig_cor},
    }
    return report


__all__ = [
    "EtaPower", "eta_power", "ModulatedFamilySpec", "ModulatedScale", "bump_center",
    "build_modulated_family", "local_sum_ladder", "crosscheck_global",
    "measure_modulated_divergence", "bounded_sum_probe", "SharpnessFamilySpec",
    "SharpnessCell", "build_sharpness_family", "cell_periodicity", "direct_scale",
    "self_similarity", "measure_sharpness_rates",
]

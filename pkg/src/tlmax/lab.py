"""Ratio experiments for the maximal inequalities and embeddings.

Every ``check_*`` function evaluates LHS / RHS over a seeded random family
and returns a :class:`~tlmax.reports.RatioReport`.  A report records the
observed constant and, for scale sweeps, the least-squares trend of
``log(max ratio)``; it never claims more than that.  The pure ``*_sides``
helpers compute one trial and are exposed for direct use and testing.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .bumps import theta
from .dyadic import _cells, besov_norm, f_norm, v_norm
from .errors import PreconditionError
from .families import RandomFamilySpec, _rng, family_field, family_sequence, random_field
from .lp import ScaleSequence
from .maximal import hl_maximal, peetre_from_abs, scale_limited_maximal
from .reports import RatioReport, ratio_row, run_jobs, trend_fit
from .sample_grid import BandSpec, GridSpec, SampledField, _multiply_spectrum, certify

SLOPE_LIMIT = 0.05
VARIATION_LIMIT = 2.0
RATIO_CAP = 10.0


def _finite_cap_check(report: RatioReport, cap: float) -> None:
    m = report.max_ratio
    report.add_check("max_ratio_bounded", m, cap, math.isfinite(m) and m <= cap)


def _lp_norm(values: np.ndarray, p: float, cell: float) -> float:
    if math.isinf(p):
        return float(np.max(values))
    return float((cell * np.sum(values**p)) ** (1.0 / p))


def _lq_combine(stack: list[np.ndarray], q: float) -> np.ndarray:
    if math.isinf(q):
        return np.max(np.stack(stack), axis=0)
    acc = np.zeros_like(stack[0])
    for a in stack:
        acc = acc + a**q
    return acc ** (1.0 / q)


def _top_scale(grid: GridSpec, A: float) -> int:
    """Largest k with ``A 2^k`` at most half the Nyquist frequency."""
    return int(math.floor(math.log2(grid.nyquist / (2.0 * A))))


# ------------------------------------------------------------ Fefferman-Stein

def fefferman_stein_sides(seq: ScaleSequence, p: float, q: float, r: float) -> tuple[float, float]:
    """``||(sum_k (M_r f_k)^q)^(1/q)||_p`` and ``||(sum_k |f_k|^q)^(1/q)||_p``."""
    cell = seq.grid.cell_volume
    maxes = [hl_maximal(f, r).values for _, f in seq.entries]
    mods = [f.abs() for _, f in seq.entries]
    return (_lp_norm(_lq_combine(maxes, q), p, cell), _lp_norm(_lq_combine(mods, q), p, cell))


def _fs_job(job):
    spec, L, N, trial, p, q, r = job
    grid = GridSpec(1, L, N)
    sub = replace(spec, k_max=min(spec.k_max, _top_scale(grid, spec.A)))
    return fefferman_stein_sides(family_sequence(sub, grid, trial), p, q, r)


def concentrated_bump(grid: GridSpec, k: int, shift: float = 0.0) -> SampledField:
    """Real bump ``sum theta(|xi| / 2^k) e^{2 pi i xi (x - shift)}``, certified in (k, 2)."""
    xi = np.fft.fftfreq(grid.N, d=grid.h)
    coeffs = theta(np.abs(xi) / 2.0**k) * np.exp(-2j * np.pi * xi * shift)
    values = np.fft.ifft(coeffs)
    values = values / np.max(np.abs(values))
    return certify(SampledField(grid, values, None, f"bump_k{k}"), BandSpec(k, 2.0))


def check_fefferman_stein(spec: RandomFamilySpec, p: float, q: float, r: float,
                          L: float = 8.0, Ns=(256, 512, 1024, 2048, 4096),
                          workers: int = 1, slope_limit: float = SLOPE_LIMIT,
                          probe: bool = True) -> RatioReport:
    """Vector-valued maximal inequality over grids of growing size.

    The scale range grows with ``N`` (``k`` up to half the Nyquist band), so
    a trend in ``log2 N`` would signal an unbounded constant.  With
    ``probe`` a single concentrated bump is run at ``r = p`` to show the
    growth that appears outside the hypothesis.
    """
    if not r < min(p, q):
        raise PreconditionError(f"the inequality requires r < min(p, q); got r={r}, p={p}, q={q}")
    jobs = [(spec, L, N, t, p, q, r) for N in Ns for t in range(spec.count)]
    sides = run_jobs(_fs_job, jobs, workers)
    report = RatioReport("fefferman-stein", {"family": spec.to_dict(), "p": p, "q": q, "r": r,
                                             "L": L, "Ns": list(Ns)})
    for (sp, _, N, t, *_), (lhs, rhs) in zip(jobs, sides):
        report.rows.append(ratio_row(lhs, rhs, N=N, trial=t))
    per_n = [max(rw["ratio"] for rw in report.live_rows if rw["N"] == N) for N in Ns]
    report.trend = trend_fit(np.log2(Ns), per_n)
    report.extra["max_ratio_per_N"] = per_n
    report.add_check("trend_slope", report.trend["slope"], slope_limit,
                     abs(report.trend["slope"]) <= slope_limit)
    report.add_check("max_ratio_finite", report.max_ratio, "finite", math.isfinite(report.max_ratio))
    if probe:
        ratios = []
        for N in Ns:
            grid = GridSpec(1, L, N)
            f = concentrated_bump(grid, _top_scale(grid, 2.0))
            ratios.append(_lp_norm(hl_maximal(f, p).values, p, grid.h) /
                          _lp_norm(f.abs(), p, grid.h))
        fit = trend_fit(np.log2(Ns), ratios)
        report.extra["violation_probe"] = {"r": p, "ratios": ratios, "trend": fit}
    return report


# ------------------------------------------------------ pointwise majorization

def majorization_ratio(f: SampledField, r: float, k: int) -> float:
    """``max_x  M_{d/r, 2^k} f(x) / M_r f(x)``."""
    peetre = peetre_from_abs(f.abs(), f.grid, f.grid.d / r, k)
    return float(np.max(peetre / hl_maximal(f, r).values))


def lemma_ratio(f: SampledField, r: float, t: float, k: int, eps: float | None = None,
                combine: str = "sum") -> float:
    """``max_x  M_{d/r, 2^k} f(x) / M_t^{k, eps} f(x)`` with ``eps = d(1/r - 1/t)`` by default."""
    d = f.grid.d
    eps = d * (1.0 / r - 1.0 / t) if eps is None else eps
    peetre = peetre_from_abs(f.abs(), f.grid, d / r, k)
    return float(np.max(peetre / scale_limited_maximal(f, t, k, eps, combine).values))


def _scale_grid(L: float, k: int, A: float, oversample: int) -> GridSpec:
    n = int(L * A * 2.0**k * 2 * oversample)
    n = 1 << max(3, (n - 1).bit_length())
    return GridSpec(1, L, n)


def _pointwise_job(job):
    kind, spec, L, oversample, trial, k, r, t, combine = job
    grid = _scale_grid(L, k, spec.A, oversample)
    f = family_field(spec, grid, trial, k)
    if kind == "majorization":
        return majorization_ratio(f, r, k)
    return lemma_ratio(f, r, t, k, combine=combine)


def _pointwise_report(name, spec, params, jobs, workers, slope_limit):
    ratios = run_jobs(_pointwise_job, jobs, workers)
    report = RatioReport(name, {"family": spec.to_dict(), **params})
    for job, ratio in zip(jobs, ratios):
        report.rows.append({"k": job[5], "trial": job[4], "ratio": ratio, "degenerate": False})
    ks = list(spec.scales)
    per_k = [max(rw["ratio"] for rw in report.rows if rw["k"] == k) for k in ks]
    report.extra["max_ratio_per_k"] = per_k
    report.trend = trend_fit(ks, per_k)
    report.add_check("trend_slope", report.trend["slope"], slope_limit,
                     abs(report.trend["slope"]) <= slope_limit)
    report.add_check("max_ratio_finite", report.max_ratio, "finite", math.isfinite(report.max_ratio))
    return report


def check_peetre_majorization(spec: RandomFamilySpec, r: float, L: float = 4.0,
                              oversample: int = 4, workers: int = 1,
                              slope_limit: float = SLOPE_LIMIT) -> RatioReport:
    """Peetre function of order ``d/r`` against ``M_r`` on fields in band (k, A)."""
    if not r > 0:
        raise PreconditionError(f"r must be positive, got {r}")
    jobs = [("majorization", spec, L, oversample, t, k, r, None, None)
            for k in spec.scales for t in range(spec.count)]
    return _pointwise_report("peetre-majorization", spec,
                             {"r": r, "L": L, "oversample": oversample}, jobs, workers, slope_limit)


def translated_bump_probe(r: float, t: float, eps_factor: float = 2.0, L: float = 64.0,
                          N: int = 512, shifts=(1, 2, 4, 8, 16), combine: str = "sum") -> dict:
    """Ratio at ``x = 0`` for a bump translated by ``D``, with penalty ``eps_factor * eps``.

    With the lemma's ``eps`` the ratio stays flat in ``D``; a stronger
    penalty makes it grow like ``D^((eps_factor - 1) eps)``.
    """
    grid = GridSpec(1, L, N)
    eps = (1.0 / r - 1.0 / t)
    ratios = []
    for D in shifts:
        f = concentrated_bump(grid, 0, shift=float(D))
        peetre = peetre_from_abs(f.abs(), grid, 1.0 / r, 0, "direct")
        lower = scale_limited_maximal(f, t, 0, eps_factor * eps, combine).values
        ratios.append(float(peetre[0] / lower[0]))
    fit = trend_fit(np.log2(shifts), ratios)
    return {"eps_factor": eps_factor, "shifts": list(shifts), "ratios": ratios, "trend": fit,
            "expected_log2_slope": (eps_factor - 1.0) * eps * math.log(2.0)}


def check_lemma_pointwise(spec: RandomFamilySpec, r: float, t: float, L: float = 4.0,
                          oversample: int = 4, combine: str = "sum", workers: int = 1,
                          slope_limit: float = SLOPE_LIMIT, probe: bool = True) -> RatioReport:
    """Peetre function of order ``d/r`` against ``M_t^{k, d(1/r - 1/t)}``, uniformly in k."""
    if not 0 < r < t:
        raise PreconditionError(f"the pointwise bound requires 0 < r < t; got r={r}, t={t}")
    jobs = [("lemma", spec, L, oversample, tr, k, r, t, combine)
            for k in spec.scales for tr in range(spec.count)]
    report = _pointwise_report("lemma-pointwise", spec,
                               {"r": r, "t": t, "eps": 1.0 / r - 1.0 / t, "L": L,
                                "oversample": oversample, "combine": combine},
                               jobs, workers, slope_limit)
    if probe:
        exact = translated_bump_probe(r, t, 1.0, combine=combine)
        strong = translated_bump_probe(r, t, 2.0, combine=combine)
        report.extra["probe_lemma_eps"] = exact
        report.extra["probe_double_eps"] = strong
        slope = strong["trend"]["slope"]
        report.add_check("double_eps_probe_grows", slope, "> 0", slope > 0)
    return report


# --------------------------------------------- Theorem-type local inequalities

def _level_integrals(arrays: list[np.ndarray], grid: GridSpec, level: int) -> np.ndarray:
    """Average over each level cube of the summed arrays."""
    ncell = int(grid.L * 2.0**level)
    if ncell < 1:
        raise PreconditionError(f"level {level} cubes exceed the torus")
    total = np.zeros(grid.shape)
    for a in arrays:
        total = total + a
    return _cells(total, grid.d, ncell) / (grid.N // ncell) ** grid.d


def local_maximal_sides(seq: ScaleSequence, mu: int, q: float, operator) -> tuple[np.ndarray, float]:
    """LHS per cube of level ``mu`` and the level-``mu`` RHS sup.

    ``operator(k, f_k)`` returns the maximal function samples.
    """
    grid = seq.grid
    lhs = _level_integrals([operator(k, f) ** q for k, f in seq.entries if k >= mu], grid, mu)
    rhs = _level_integrals([f.abs() ** q for k, f in seq.entries if k >= mu], grid, mu)
    return lhs ** (1.0 / q), float(np.max(rhs) ** (1.0 / q))


def _thm_operator(kind, r, eps, combine):
    if kind == "scale_limited":
        return lambda k, f: scale_limited_maximal(f, r, k, eps, combine).values
    return lambda k, f: peetre_from_abs(f.abs(), f.grid, f.grid.d / r, k)


def _thm_job(job):
    kind, spec, L, N, trial, mu, r, q, eps, combine, rhs_mode = job
    grid = GridSpec(1, L, N)
    seq = family_sequence(replace(spec, mu=mu), grid, trial)
    lhs, rhs = local_maximal_sides(seq, mu, q, _thm_operator(kind, r, eps, combine))
    if rhs_mode == "all":
        rhs = v_norm(seq, mu, q).value
    return float(np.max(lhs)), rhs


def _theorem_report(name, kind, spec, mus, r, q, eps, combine, L, N, rhs_mode, workers,
                    variation_limit):
    if not 0 < r < q:
        raise PreconditionError(
            f"the local maximal inequality requires 0 < r < q (got r={r}, q={q}); "
            "for r >= q it fails, see the sharpness family")
    if rhs_mode not in ("level", "all"):
        raise PreconditionError(f"rhs mode must be 'level' or 'all', got {rhs_mode!r}")
    jobs = [(kind, spec, L, N, t, mu, r, q, eps, combine, rhs_mode)
            for mu in mus for t in range(spec.count)]
    sides = run_jobs(_thm_job, jobs, workers)
    params = {"family": spec.to_dict(), "mus": list(mus), "r": r, "q": q, "L": L, "N": N,
              "rhs": rhs_mode}
    if kind == "scale_limited":
        params.update(eps=eps, combine=combine)
    report = RatioReport(name, params)
    for job, (lhs, rhs) in zip(jobs, sides):
        report.rows.append(ratio_row(lhs, rhs, mu=job[5], trial=job[4]))
    per_mu = [max(rw["ratio"] for rw in report.live_rows if rw["mu"] == mu) for mu in mus]
    report.extra["max_ratio_per_mu"] = per_mu
    variation = max(per_mu) / min(per_mu)
    report.add_check("variation_across_mu", variation, variation_limit,
                     variation <= variation_limit)
    report.add_check("max_ratio_finite", report.max_ratio, "finite", math.isfinite(report.max_ratio))
    return report


def check_thm_maximal1(spec: RandomFamilySpec, mus=(-2, -1, 0, 1, 2), r: float = 1.0,
                       q: float = 2.0, eps: float = 0.5, combine: str = "sum",
                       L: float = 8.0, N: int = 2048, rhs_mode: str = "level",
                       workers: int = 1, variation_limit: float = VARIATION_LIMIT) -> RatioReport:
    """Local inequality for the scale-penalized maximal function, across base scales."""
    if not eps > 0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    return _theorem_report("thm-maximal1", "scale_limited", spec, mus, r, q, eps, combine,
                           L, N, rhs_mode, workers, variation_limit)


def check_cor_maximal2(spec: RandomFamilySpec, mus=(-2, -1, 0, 1, 2), r: float = 1.0,
                       q: float = 2.0, L: float = 8.0, N: int = 2048, rhs_mode: str = "level",
                       workers: int = 1, variation_limit: float = VARIATION_LIMIT) -> RatioReport:
    """Local inequality for the Peetre function of order ``d/r``, across base scales."""
    return _theorem_report("cor-maximal2", "peetre", spec, mus, r, q, None, None,
                           L, N, rhs_mode, workers, variation_limit)


# ------------------------------------------------------------------ embeddings

def peetre_cube_spread(f: SampledField, sigma: float, k: int) -> float:
    """``max_Q (max_Q M / min_Q M)`` over level-k cubes for the Peetre function."""
    grid = f.grid
    vals = peetre_from_abs(f.abs(), grid, sigma, k)
    ncell = int(grid.L * 2.0**k)
    b = grid.N // ncell
    if grid.d == 1:
        blocks = vals.reshape(ncell, b)
        return float(np.max(blocks.max(axis=1) / blocks.min(axis=1)))
    blocks = vals.reshape(ncell, b, ncell, b)
    return float(np.max(blocks.max(axis=(1, 3)) / blocks.min(axis=(1, 3))))


def _embed_job(job):
    spec, L, N, trial, mu, q1, q2, sigmas = job
    grid = GridSpec(1, L, N)
    seq = family_sequence(replace(spec, mu=mu), grid, trial)
    v1 = v_norm(seq, mu, q1).value
    v2 = v_norm(seq, mu, q2).value
    sup = max(float(f.abs().max()) for _, f in seq.entries)
    spreads = {s: max(peetre_cube_spread(f, s, k) for k, f in seq.entries) for s in sigmas}
    return v1, v2, sup, spreads


def check_embedding_monotone(spec: RandomFamilySpec, mu: int = 0, q1: float = 1.0,
                             q2: float = 4.0, sigmas=(1.0, 2.0), L: float = 8.0,
                             N: int = 1024, workers: int = 1,
                             cap: float = RATIO_CAP) -> RatioReport:
    """``V_{mu,q2} / V_{mu,q1}``, ``sup_k ||f_k||_inf / V_{mu,q1}``, and the cube spread."""
    if not 0 < q1 < q2:
        raise PreconditionError(f"need 0 < q1 < q2, got {q1}, {q2}")
    jobs = [(spec, L, N, t, mu, q1, q2, tuple(sigmas)) for t in range(spec.count)]
    out = run_jobs(_embed_job, jobs, workers)
    report = RatioReport("embedding-monotone", {"family": spec.to_dict(), "mu": mu, "q1": q1,
                                                "q2": q2, "sigmas": list(sigmas), "L": L, "N": N})
    spread_max = {s: 0.0 for s in sigmas}
    for t, (v1, v2, sup, spreads) in enumerate(out):
        report.rows.append(ratio_row(v2, v1, trial=t, kind="V_q2_over_V_q1"))
        report.rows.append(ratio_row(sup, v1, trial=t, kind="sup_over_V_q1"))
        for s in sigmas:
            spread_max[s] = max(spread_max[s], spreads[s])
    _finite_cap_check(report, cap)
    bounds = {}
    for s in sigmas:
        bound = (1.0 + math.sqrt(1.0)) ** s
        bounds[str(s)] = {"max_spread": spread_max[s], "bound": bound}
        report.add_check(f"cube_spread_sigma_{s}", spread_max[s], bound, spread_max[s] <= bound)
    report.extra["cube_spread"] = bounds
    return report


def _franke_job(job):
    spec, L, N, trial, p0, s0, q = job
    grid = GridSpec(1, L, N)
    k = min(spec.k_max, _top_scale(grid, spec.A))
    f = random_field(grid, k, spec.A, _rng(spec.seed, trial, 0), spec.envelope, spec.exponent)
    s = s0 - grid.d / p0
    top = f_norm(f, s, math.inf, q, homogeneous=False).value
    bottom = besov_norm(f, s0, p0, math.inf, homogeneous=False).value
    return top, bottom


def check_franke(spec: RandomFamilySpec, p0: float, s0: float, q: float, L: float = 8.0,
                 N: int = 1024, workers: int = 1, cap: float = RATIO_CAP) -> RatioReport:
    """``||f||_{F_inf^{s,q}} / ||f||_{B_{p0}^{s0,inf}}`` with ``s = s0 - d/p0``."""
    if not 0 < p0 < math.inf:
        raise PreconditionError(f"p0 must be finite and positive, got {p0}")
    jobs = [(spec, L, N, t, p0, s0, q) for t in range(spec.count)]
    out = run_jobs(_franke_job, jobs, workers)
    report = RatioReport("franke", {"family": spec.to_dict(), "p0": p0, "s0": s0, "q": q,
                                    "branch": "q<p0" if q < p0 else "q>=p0", "L": L, "N": N})
    for t, (top, bottom) in enumerate(out):
        report.rows.append(ratio_row(top, bottom, trial=t))
    _finite_cap_check(report, cap)
    return report


# ------------------------------------------------------ corner-sum inequality

def sub_inequality_ratio(f: SampledField, k: int, level: int, q: float) -> float:
    """``max_P`` of corner sum over ``(2^k l(P))^{d/q} sup_R`` average, cubes of one level."""
    grid = f.grid
    if level > k:
        raise PreconditionError(f"need l(P) >= 2^-k, i.e. level {level} <= k={k}")
    stride = grid.N // int(grid.L * 2.0**k)
    if stride < 1 or grid.N % int(grid.L * 2.0**k):
        raise PreconditionError(f"grid does not place level-{k} corners on samples")
    corners = f.abs()[(slice(None, None, stride),) * grid.d] ** q
    ncell = int(grid.L * 2.0**level)
    lhs = _cells(corners, grid.d, ncell) ** (1.0 / q)
    avg = _cells(f.abs() ** q, grid.d, ncell) / (grid.N // ncell) ** grid.d
    rhs = (2.0**k * 2.0 ** (-level)) ** (grid.d / q) * float(np.max(avg)) ** (1.0 / q)
    return float(np.max(lhs) / rhs)


def check_sub_inequality(f: SampledField, k: int, level: int, q: float) -> RatioReport:
    report = RatioReport("sub-inequality", {"k": k, "level": level, "q": q})
    ratio = sub_inequality_ratio(f, k, level, q)
    report.rows.append({"k": k, "level": level, "ratio": ratio, "degenerate": False})
    return report


def _sub_job(job):
    spec, L, N, trial, k, q = job
    grid = GridSpec(1, L, N)
    f = random_field(grid, k - 2, spec.A, _rng(spec.seed, trial, k - spec.mu))
    levels = range(grid.coarsest_level, k + 1)
    return [(lv, sub_inequality_ratio(f, k, lv, q)) for lv in levels]


def sweep_sub_inequality(spec: RandomFamilySpec, q: float, L: float = 4.0, N: int = 2048,
                         workers: int = 1, slope_limit: float = SLOPE_LIMIT) -> RatioReport:
    """All levels ``<= k`` and all ``k`` in the family, fields in band ``(k - 2, A)``."""
    jobs = [(spec, L, N, t, k, q) for k in spec.scales for t in range(spec.count)]
    out = run_jobs(_sub_job, jobs, workers)
    report = RatioReport("sub-inequality", {"family": spec.to_dict(), "q": q, "L": L, "N": N})
    for job, rows in zip(jobs, out):
        for lv, ratio in rows:
            report.rows.append({"k": job[4], "trial": job[3], "level": lv, "ratio": ratio,
                                "degenerate": False})
    ks = list(spec.scales)
    per_k = [max(rw["ratio"] for rw in report.rows if rw["k"] == k) for k in ks]
    report.extra["max_ratio_per_k"] = per_k
    report.trend = trend_fit(ks, per_k)
    report.add_check("trend_slope", report.trend["slope"], slope_limit,
                     abs(report.trend["slope"]) <= slope_limit)
    return report


# ------------------------------------------------------------------ multipliers

def hormander_cutoff(xi) -> np.ndarray:
    """1 on ``1/2 <= |xi| <= 2``, supported in ``1/4 <= |xi| <= 4``."""
    r = np.abs(np.asarray(xi, dtype=float))
    return theta(r / 2.0) * (1.0 - theta(4.0 * r))


def symbol_identity(xi):
    return np.ones_like(np.asarray(xi, dtype=float), dtype=complex)


def symbol_power_imag(xi, tau: float = 1.0):
    """``|xi|^{i tau}`` with value 0 at the origin."""
    r = np.abs(np.asarray(xi, dtype=float))
    out = np.zeros(r.shape, dtype=complex)
    live = r > 0
    out[live] = np.exp(1j * tau * np.log(r[live]))
    return out


def symbol_sign_like(xi, k0: int = -4):
    """``sign(xi)`` damped near the origin by the LP cutoff at scale ``k0``."""
    xi = np.asarray(xi, dtype=float)
    return np.sign(xi) * (1.0 - theta(2.0 ** (-k0) * np.abs(xi))).astype(complex)


SYMBOLS = {
    "identity": symbol_identity,
    "power-imag": symbol_power_imag,
    "sign-like": symbol_sign_like,
}


def sobolev_norm(g_samples: np.ndarray, T: float, alpha: float) -> float:
    """``(int (1 + x^2)^alpha |ghat(x)|^2 dx)^(1/2)`` for ``g`` sampled on ``[-T/2, T/2)``.

    ``g`` must vanish near the ends of the window; ``ghat`` at ``x = l / T``
    is then the exact Fourier-series coefficient.
    """
    n = g_samples.size
    dxi = T / n
    ghat = np.fft.fft(np.fft.ifftshift(g_samples)) * dxi
    x = np.fft.fftfreq(n, d=dxi)
    return float(np.sqrt(np.sum((1.0 + x**2) ** alpha * np.abs(ghat) ** 2) / T))


def hormander_norm(m, alpha: float, k_range=(-10, 10), n: int = 1 << 16,
                   T: float = 16.0) -> float:
    """``sup_k || m(2^k .) phi ||_{L^2_alpha}`` over ``k_range`` (d = 1)."""
    if not alpha > 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    xi = (np.arange(n) - n // 2) * (T / n)
    cut = hormander_cutoff(xi)
    best = 0.0
    for k in range(k_range[0], k_range[1] + 1):
        vals = np.asarray(m(2.0**k * xi), dtype=complex)
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("symbol is not bounded on the sampled frequencies")
        best = max(best, sobolev_norm(vals * cut, T, alpha))
    return best


def apply_multiplier(f: SampledField, m) -> SampledField:
    grid = f.grid
    if grid.d != 1:
        raise PreconditionError("multipliers are implemented for d = 1")
    xi = np.fft.fftfreq(grid.N, d=grid.h)
    vals = np.asarray(m(xi), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise PreconditionError("symbol is not bounded on the grid")
    return SampledField(grid, _multiply_spectrum(f, vals), f.band, "T_m f")


def _mult_job(job):
    spec, L, N, trial, name, q = job
    grid = GridSpec(1, L, N)
    k = min(spec.k_max, _top_scale(grid, spec.A))
    f = random_field(grid, k, spec.A, _rng(spec.seed, trial, 0), spec.envelope, spec.exponent)
    g = apply_multiplier(f, SYMBOLS[name])
    return f_norm(g, 0.0, math.inf, q).value, f_norm(f, 0.0, math.inf, q).value


def check_multiplier(spec: RandomFamilySpec, symbol: str, alpha: float, q: float,
                     L: float = 8.0, N: int = 1024, workers: int = 1,
                     cap: float = RATIO_CAP) -> RatioReport:
    """``||T_m f|| / (A_alpha[m] ||f||)`` in the homogeneous ``F_inf^{0,q}`` norm."""
    if symbol not in SYMBOLS:
        raise PreconditionError(f"unknown symbol {symbol!r}; choose from {sorted(SYMBOLS)}")
    need = 1.0 / min(1.0, q) - 0.5
    if not alpha > need:
        raise PreconditionError(f"boundedness needs alpha > {need}, got {alpha}")
    grid = GridSpec(1, L, N)
    k_lo = grid.coarsest_level - 2
    k_hi = int(math.log2(grid.nyquist)) + 1
    a_alpha = hormander_norm(SYMBOLS[symbol], alpha, (k_lo, k_hi))
    jobs = [(spec, L, N, t, symbol, q) for t in range(spec.count)]
    out = run_jobs(_mult_job, jobs, workers)
    report = RatioReport("multiplier", {"family": spec.to_dict(), "symbol": symbol,
                                        "alpha": alpha, "q": q, "L": L, "N": N})
    report.extra["A_alpha"] = a_alpha
    for t, (num, den) in enumerate(out):
        report.rows.append(ratio_row(num, a_alpha * den, trial=t))
    _finite_cap_check(report, cap)
    return report

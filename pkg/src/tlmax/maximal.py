"""Maximal operators on sampled fields, with brute-force oracles.

Window family
-------------
Windows are grid-aligned periodic cubes of ``m = 2^j`` cells per side,
``j = 0..log2 N``.  Window sums come from a doubling ladder

    S_1 = P,    S_2m(s) = S_m(s) + S_m(s + m),

applied along axis 0 and then axis 1, so every window sum is a fixed
adjacent-pairwise reduction of its block.  The oracles perform the same
reduction block by block, which makes fast and brute results bit-identical.
The max over windows containing ``x`` is a periodic sliding max over start
positions ``x - m + 1 .. x`` (monotone deque, separable in 2-d).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import PreconditionError
from .sample_grid import GridSpec, SampledField


@numba.njit(cache=True)
def _sliding_max_rows(a, m):
    """out[i, x] = max(a[i, (x - m + 1) % n .. x]) with periodic wrap."""
    rows, n = a.shape
    out = np.empty_like(a)
    if m >= n:
        for i in range(rows):
            best = a[i, 0]
            for x in range(1, n):
                if a[i, x] > best:
                    best = a[i, x]
            for x in range(n):
                out[i, x] = best
        return out
    dq = np.empty(n + m, dtype=np.int64)
    for i in range(rows):
        head = 0
        tail = 0
        # virtual positions t = -(m-1) .. n-1 map to a[(t) % n]
        for t in range(-(m - 1), n):
            v = a[i, t % n]
            while tail > head and a[i, dq[tail - 1] % n] <= v:
                tail -= 1
            dq[tail] = t + n
            tail += 1
            if dq[head] - n <= t - m:
                head += 1
            if t >= 0:
                out[i, t] = a[i, dq[head] % n]
    return out


def sliding_max(a: np.ndarray, m: int) -> np.ndarray:
    """Periodic max over every window of ``m`` cells per axis that ends at ``x``."""
    a = np.ascontiguousarray(a, dtype=float)
    if a.ndim == 1:
        return _sliding_max_rows(a[None, :], m)[0]
    out = _sliding_max_rows(a, m)
    return np.ascontiguousarray(_sliding_max_rows(np.ascontiguousarray(out.T), m).T)


def _ladder_step(s: np.ndarray, m: int, axis: int) -> np.ndarray:
    return s + np.roll(s, -m, axis=axis)


@dataclass(frozen=True)
class WindowLadder:
    """Window sums of a nonnegative array for every dyadic window size.

    ``sums[j]`` holds, at start position ``s``, the sum over the periodic
    cube of ``2^j`` cells per side whose first cell is ``s``.
    """

    h: float
    sizes: tuple
    sums: tuple = field(repr=False)

    @classmethod
    def build(cls, power: np.ndarray, h: float = 1.0) -> "WindowLadder":
        power = np.asarray(power, dtype=float)
        n = power.shape[0]
        if power.ndim not in (1, 2) or any(s != n for s in power.shape):
            raise PreconditionError("power array must be 1-d or square 2-d")
        levels = int(round(math.log2(n)))
        if 2**levels != n:
            raise PreconditionError(f"array side must be a power of two, got {n}")
        sums = []
        axis0 = power
        for j in range(levels + 1):
            m = 2**j
            if j > 0:
                axis0 = _ladder_step(axis0, m // 2, 0)
            cube = axis0
            if power.ndim == 2:
                for i in range(j):
                    cube = _ladder_step(cube, 2**i, 1)
            sums.append(cube)
        return cls(float(h), tuple(2**j for j in range(levels + 1)), tuple(sums))

    def widths(self) -> np.ndarray:
        return self.h * np.asarray(self.sizes, dtype=float)

    def averages(self, j: int) -> np.ndarray:
        d = self.sums[j].ndim
        return self.sums[j] / float(self.sizes[j]) ** d


def window_value(sums: np.ndarray, m: int, d: int, r: float, penalty: float) -> np.ndarray:
    """``penalty * (sums / m^d)^(1/r)``; shared by engines and oracles."""
    avg = sums / float(m) ** d
    vals = np.power(avg, 1.0 / r)
    if penalty != 1.0:
        vals = vals * penalty
    return vals


def _ladder_sup(ladder: WindowLadder, d: int, r: float, penalties) -> np.ndarray:
    """max over sizes with a finite penalty of the sliding max of window values."""
    best = None
    for j, m in enumerate(ladder.sizes):
        pen = penalties[j]
        if pen is None:
            continue
        vals = window_value(ladder.sums[j], m, d, r, pen)
        cur = sliding_max(vals, m)
        best = cur if best is None else np.maximum(best, cur)
    if best is None:
        best = np.zeros_like(ladder.sums[0])
    return best


@dataclass(frozen=True)
class MaximalField:
    grid: GridSpec
    values: np.ndarray
    provenance: dict

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True).reshape(self.grid.shape)
        if np.any(vals < 0):
            raise PreconditionError("maximal function values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "provenance": self.provenance,
            "values": [float(v) for v in self.values.reshape(-1)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _check_r(r: float) -> None:
    if not r > 0:
        raise PreconditionError(f"r must be positive, got {r}")


def hl_maximal(f: SampledField, r: float) -> MaximalField:
    """Hardy-Littlewood ``M_r f`` over the dyadic window ladder."""
    _check_r(r)
    ladder = WindowLadder.build(f.abs() ** r, f.grid.h)
    vals = _ladder_sup(ladder, f.grid.d, r, [1.0] * len(ladder.sizes))
    return MaximalField(f.grid, vals, {"operator": "hl", "r": r})


def scale_penalties(widths: np.ndarray, k: int, eps: float) -> tuple[list, list]:
    """Penalty lists for the small (``w <= 2^-k``) and large window regimes."""
    small, large = [], []
    for w in widths:
        if w * 2.0**k <= 1.0:
            small.append(1.0)
            large.append(None)
        else:
            small.append(None)
            large.append(float((2.0**k * w) ** (-eps)))
    return small, large


def scale_limited_from_power(power: np.ndarray, h: float, r: float, k: int, eps: float,
                             combine: str = "sum") -> np.ndarray:
    """Scale-penalized maximal function from a precomputed ``|f|^r`` cell array."""
    if combine not in ("sum", "max"):
        raise PreconditionError(f"combine must be 'sum' or 'max', got {combine!r}")
    ladder = WindowLadder.build(power, h)
    d = np.asarray(power).ndim
    small, large = scale_penalties(ladder.widths(), k, eps)
    a = _ladder_sup(ladder, d, r, small)
    b = _ladder_sup(ladder, d, r, large)
    return a + b if combine == "sum" else np.maximum(a, b)


def scale_limited_maximal(f: SampledField, r: float, k: int, eps: float,
                          combine: str = "sum") -> MaximalField:
    """``M_r^{k,eps} f``: unpenalized sup over windows of side at most ``2^-k``
    combined with the sup over larger windows damped by ``(2^k w)^-eps``.

    ``combine="sum"`` adds the two regimes; ``combine="max"`` takes the larger.
    """
    _check_r(r)
    if eps < 0:
        raise PreconditionError(f"eps must be nonnegative, got {eps}")
    scale = 2.0 ** (-k)
    if not f.grid.h <= scale <= f.grid.L:
        raise PreconditionError(
            f"2^-k = {scale} must lie in [h, L] = [{f.grid.h}, {f.grid.L}]")
    vals = scale_limited_from_power(f.abs() ** r, f.grid.h, r, k, eps, combine)
    return MaximalField(f.grid, vals, {"operator": "scale_limited", "r": r, "k": k,
                                       "eps": eps, "combine": combine})


# ---------------------------------------------------------------- oracles

def _pairwise_block_sum(block: np.ndarray) -> float:
    """Adjacent-pairwise reduction along axis 0, then axis 1 (matches the ladder)."""
    out = block
    for axis in range(block.ndim):
        while out.shape[axis] > 1:
            even = np.take(out, np.arange(0, out.shape[axis], 2), axis=axis)
            odd = np.take(out, np.arange(1, out.shape[axis], 2), axis=axis)
            out = even + odd
    return float(out.reshape(-1)[0])


def brute_window_sums(power: np.ndarray) -> list[np.ndarray]:
    """Window sums for every size and start, one block at a time."""
    power = np.asarray(power, dtype=float)
    n = power.shape[0]
    out = []
    m = 1
    while m <= n:
        sums = np.empty(power.shape)
        for start in np.ndindex(*power.shape):
            idx = [np.arange(s, s + m) % n for s in start]
            sums[start] = _pairwise_block_sum(power[np.ix_(*idx)])
        out.append(sums)
        m *= 2
    return out


def _brute_sup(power: np.ndarray, r: float, penalties) -> np.ndarray:
    n = power.shape[0]
    d = power.ndim
    sums = brute_window_sums(power)
    best = np.zeros(power.shape)
    for j, s in enumerate(sums):
        pen = penalties[j]
        if pen is None:
            continue
        m = 2**j
        vals = window_value(s, m, d, r, pen)
        for x in np.ndindex(*power.shape):
            for start in np.ndindex(*power.shape):
                inside = all((xi - si) % n < m for xi, si in zip(x, start))
                if inside and vals[start] > best[x]:
                    best[x] = vals[start]
    return best


def hl_maximal_bruteforce(f: SampledField, r: float) -> np.ndarray:
    power = f.abs() ** r
    levels = int(round(math.log2(f.grid.N)))
    return _brute_sup(power, r, [1.0] * (levels + 1))


def scale_limited_bruteforce(f: SampledField, r: float, k: int, eps: float,
                             combine: str = "sum") -> np.ndarray:
    power = f.abs() ** r
    levels = int(round(math.log2(f.grid.N)))
    widths = f.grid.h * 2.0 ** np.arange(levels + 1)
    small, large = scale_penalties(widths, k, eps)
    a = _brute_sup(power, r, small)
    b = _brute_sup(power, r, large)
    return a + b if combine == "sum" else np.maximum(a, b)


# ---------------------------------------------------------------- Peetre

def torus_offsets(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Integer offsets (shape ``(N^d, d)``) and their torus lengths."""
    n = grid.N
    base = np.arange(n)
    wrap = np.minimum(base, n - base) * grid.h
    if grid.d == 1:
        return base[:, None], wrap
    o0, o1 = np.meshgrid(base, base, indexing="ij")
    dist = np.sqrt(wrap[:, None] ** 2 + wrap[None, :] ** 2)
    return np.stack([o0.ravel(), o1.ravel()], axis=1), dist.ravel()


def peetre_weights(grid: GridSpec, sigma: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    offsets, dist = torus_offsets(grid)
    return offsets, (1.0 + 2.0**k * dist) ** sigma


def peetre_from_abs(a: np.ndarray, grid: GridSpec, sigma: float, k: int,
                    engine: str = "pruned") -> np.ndarray:
    """``sup_y a(x - y) / (1 + 2^k |y|)^sigma`` over grid offsets ``y``."""
    if engine not in ("direct", "pruned", "sparse"):
        raise PreconditionError(f"unknown Peetre engine {engine!r}")
    if engine == "sparse":
        return _peetre_sparse(a, grid, sigma, k)
    offsets, w = peetre_weights(grid, sigma, k)
    axes = tuple(range(grid.d))
    best = np.zeros_like(a)
    if engine == "direct":
        order = range(len(w))
    else:
        order = np.argsort(w, kind="stable")
    amax = float(a.max()) if a.size else 0.0
    for i in order:
        if engine == "pruned" and amax / w[i] < best.min():
            break
        cand = np.roll(a, tuple(offsets[i]), axis=axes) / w[i]
        np.maximum(best, cand, out=best)
    return best


def _peetre_sparse(a: np.ndarray, grid: GridSpec, sigma: float, k: int) -> np.ndarray:
    """Peetre sup over source points only, for concentrated data.

    Sources are the samples above a threshold.  The result is exact once
    every excluded sample is below the smallest value found, since an
    excluded sample can only contribute less than its own size.  The
    threshold is lowered until that holds.
    """
    _, w = peetre_weights(grid, sigma, k)
    W = w.reshape(grid.shape)
    flat = a.reshape(-1)
    order = np.argsort(-flat, kind="stable")
    best = np.zeros_like(a)
    used = 0
    take = max(1, min(flat.size, 64))
    while True:
        for i in order[used:take]:
            src = np.unravel_index(i, grid.shape)
            np.maximum(best, flat[i] / np.roll(W, src, axis=tuple(range(grid.d))), out=best)
        used = take
        rest = float(flat[order[used]]) if used < flat.size else 0.0
        if rest <= float(best.min()):
            return best
        take = min(flat.size, 2 * take)


def peetre_maximal(f: SampledField, sigma: float, k: int,
                   engine: str = "pruned") -> MaximalField:
    """Peetre maximal function with torus distance on grid offsets."""
    if not sigma > 0:
        raise PreconditionError(f"sigma must be positive, got {sigma}")
    if f.band is None:
        warnings.warn("Peetre maximal function of an uncertified field", stacklevel=2)
    vals = peetre_from_abs(f.abs(), f.grid, sigma, k, engine)
    return MaximalField(f.grid, vals, {"operator": "peetre", "sigma": sigma, "k": k,
                                       "engine": engine})


def peetre_bruteforce(f: SampledField, sigma: float, k: int) -> np.ndarray:
    """Literal double loop over points and offsets."""
    grid = f.grid
    a = f.abs()
    n = grid.N
    _, w = peetre_weights(grid, sigma, k)
    w = w.reshape(grid.shape)
    out = np.zeros(grid.shape)
    for x in np.ndindex(*grid.shape):
        for y in np.ndindex(*grid.shape):
            src = tuple((xi - yi) % n for xi, yi in zip(x, y))
            v = a[src] / w[y]
            if v > out[x]:
                out[x] = v
    return out

"""Dyadic cubes on the torus and the F / B / V norms built on them.

Cube integrals are Riemann sums over grid points; for band-limited data on
the torus these are spectrally accurate.  The sup over cubes in
:func:`v_norm` and the ``p = inf`` branch of :func:`f_norm` is computed
bottom-up: a cube's integral of ``sum_{k >= level} |f_k|^q`` is the sum of
its children's integrals plus its own new shell ``k = level``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .lp import ScaleSequence, decompose, shell_range
from .sample_grid import GridSpec, SampledField


@dataclass(frozen=True, order=True)
class DyadicCube:
    """Cube of side ``2^-level`` with lower-left corner ``2^-level * index``."""

    level: int
    index: tuple
    d: int = 1

    def __post_init__(self):
        idx = tuple(int(i) for i in np.atleast_1d(self.index))
        if len(idx) != self.d:
            raise PreconditionError(f"index {idx} does not have dimension {self.d}")
        object.__setattr__(self, "index", idx)
        object.__setattr__(self, "level", int(self.level))

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def corner(self) -> tuple:
        return tuple(self.side * i for i in self.index)

    @property
    def volume(self) -> float:
        return self.side**self.d

    def check_in(self, grid: GridSpec) -> None:
        count = grid.L * 2.0**self.level
        if count < 1 or grid.d != self.d:
            raise PreconditionError(f"cube {self} does not fit the torus of side {grid.L}")
        if any(not 0 <= i < count for i in self.index):
            raise PreconditionError(f"cube index {self.index} outside 0..{int(count) - 1}")

    def contains(self, other: "DyadicCube") -> bool:
        """Exact containment by shifting the finer index down to this level."""
        if other.d != self.d or other.level < self.level:
            return False
        shift = other.level - self.level
        return all((j >> shift) == i for i, j in zip(self.index, other.index))

    def parent(self) -> "DyadicCube":
        return DyadicCube(self.level - 1, tuple(i >> 1 for i in self.index), self.d)

    def children(self) -> list["DyadicCube"]:
        offs = np.ndindex(*(2,) * self.d)
        return [DyadicCube(self.level + 1, tuple(2 * i + o for i, o in zip(self.index, off)),
                           self.d) for off in offs]

    def slices(self, grid: GridSpec) -> tuple:
        """Grid-index slices of the samples inside the cube."""
        self.check_in(grid)
        if self.level > grid.finest_level:
            raise PreconditionError(f"grid spacing {grid.h} does not resolve cube side {self.side}")
        stride = grid.N >> (self.level + grid.J)
        return tuple(slice(i * stride, (i + 1) * stride) for i in self.index)

    def to_dict(self) -> dict:
        return {"level": self.level, "index": list(self.index)}


def cubes_at_level(grid: GridSpec, level: int) -> list[DyadicCube]:
    count = int(grid.L * 2.0**level)
    if count < 1:
        return []
    return [DyadicCube(level, idx, grid.d) for idx in np.ndindex(*(count,) * grid.d)]


@dataclass(frozen=True)
class NormReport:
    value: float
    maximizer: DyadicCube | None
    params: dict
    truncation: dict = field(default_factory=dict)
    table: list | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "maximizer": None if self.maximizer is None else self.maximizer.to_dict(),
            "params": self.params,
            "truncation": self.truncation,
            "table": self.table,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        keys = sorted(self.params)
        head = keys + ["value", "max_level", "max_index"]
        lvl = "" if self.maximizer is None else str(self.maximizer.level)
        idx = "" if self.maximizer is None else "-".join(map(str, self.maximizer.index))
        row = [str(self.params[k]) for k in keys] + [repr(self.value), lvl, idx]
        return ",".join(head) + "\n" + ",".join(row) + "\n"


def _weighted_powers(seq: ScaleSequence, q: float, s: float) -> list[tuple[int, np.ndarray]]:
    return [(k, 2.0 ** (s * k * q) * f.abs() ** q) for k, f in seq.entries]


def local_avg(P: DyadicCube, seq: ScaleSequence, q: float, s: float = 0.0) -> float:
    """``(|P|^-1 int_P sum_{k >= level(P)} 2^{skq} |f_k|^q)^{1/q}`` as a Riemann sum."""
    if not q > 0:
        raise PreconditionError(f"q must be positive, got {q}")
    if P.level < seq.mu:
        raise PreconditionError(
            f"cube level {P.level} is coarser than the base scale {seq.mu}")
    sl = P.slices(seq.grid)
    total = 0.0
    count = 0
    for k, f in seq.entries:
        if k < P.level:
            continue
        block = f.abs()[sl]
        count = block.size
        total += 2.0 ** (s * k * q) * float(np.sum(block**q))
    if count == 0:
        count = int(np.prod([sl_.stop - sl_.start for sl_ in sl]))
    return (total / count) ** (1.0 / q)


def _block_sum(a: np.ndarray, d: int) -> np.ndarray:
    """Sum 2^d sibling cells into their parent."""
    n = a.shape[0] // 2
    if d == 1:
        return a.reshape(n, 2).sum(axis=1)
    return a.reshape(n, 2, n, 2).sum(axis=(1, 3))


def _cells(a: np.ndarray, d: int, ncell: int) -> np.ndarray:
    """Sum a grid array into ``ncell`` cubes per axis."""
    n = a.shape[0]
    b = n // ncell
    if d == 1:
        return a.reshape(ncell, b).sum(axis=1)
    return a.reshape(ncell, b, ncell, b).sum(axis=(1, 3))


def cube_sup(seq: ScaleSequence, q: float, s: float, level_lo: int,
             level_hi: int | None = None, keep_table: bool = False):
    """Sup of the local average over all cubes with ``level_lo <= level <= level_hi``.

    Returns ``(value, maximizer, table)``; levels are clipped to the grid.
    """
    grid = seq.grid
    d = grid.d
    fine = grid.finest_level
    level_hi = fine if level_hi is None else min(level_hi, fine)
    level_lo = max(level_lo, grid.coarsest_level)
    if level_hi < level_lo:
        raise PreconditionError(f"no admissible cube levels in [{level_lo}, {level_hi}]")
    powers = _weighted_powers(seq, q, s)
    # integrals at the finest level: every k >= fine
    acc = np.zeros(grid.shape)
    for k, pw in powers:
        if k >= fine:
            acc = acc + pw
    by_k = dict(powers)
    best, arg, table = -1.0, None, []
    per_level = {}
    cur = acc
    for level in range(fine, level_lo - 1, -1):
        if level < fine:
            cur = _block_sum(cur, d)
            if level in by_k:
                cur = cur + _cells(by_k[level], d, cur.shape[0])
        if level <= level_hi:
            count = (grid.N // cur.shape[0]) ** d
            per_level[level] = (cur / count) ** (1.0 / q)
    for level in sorted(per_level):
        vals = per_level[level]
        flat = int(np.argmax(vals))
        if vals.reshape(-1)[flat] > best:
            best = float(vals.reshape(-1)[flat])
            arg = DyadicCube(level, np.unravel_index(flat, vals.shape), d)
        if keep_table:
            for idx in np.ndindex(*vals.shape):
                table.append({"level": level, "index": list(idx), "value": float(vals[idx])})
    return best, arg, (table if keep_table else None)


def v_norm(seq: ScaleSequence, mu: int, q: float, keep_table: bool = False) -> NormReport:
    """``V_{mu,q}``: sup of local averages over cubes of side at most ``2^-mu``."""
    if not q > 0:
        raise PreconditionError(f"q must be positive, got {q}")
    if seq.mu > mu:
        raise PreconditionError(f"sequence base scale {seq.mu} exceeds mu={mu}")
    value, arg, table = cube_sup(seq, q, 0.0, mu, keep_table=keep_table)
    return NormReport(value, arg, {"mu": mu, "q": q},
                      {"k_max": seq.k_max, "finest_level": seq.grid.finest_level}, table)


def v_norm_bruteforce(seq: ScaleSequence, mu: int, q: float) -> float:
    grid = seq.grid
    best = 0.0
    for level in range(max(mu, grid.coarsest_level), grid.finest_level + 1):
        for P in cubes_at_level(grid, level):
            best = max(best, local_avg(P, seq, q))
    return best


def _shells(f: SampledField, homogeneous: bool, k_lo, k_hi) -> ScaleSequence:
    return decompose(f, k_lo, k_hi, homogeneous)


def f_norm(f: SampledField, s: float, p: float, q: float, homogeneous: bool = True,
           k_lo: int | None = None, k_hi: int | None = None) -> NormReport:
    """Triebel-Lizorkin norm from the truncated shells ``Pi_k f`` (or ``Lambda_k f``)."""
    if not (p > 0 and q > 0):
        raise PreconditionError(f"p and q must be positive, got {p}, {q}")
    seq = _shells(f, homogeneous, k_lo, k_hi)
    trunc = {"k_lo": seq.ks[0], "k_hi": seq.k_max}
    params = {"s": s, "p": p, "q": q, "homogeneous": homogeneous}
    h_d = f.grid.cell_volume
    weighted = [(k, 2.0 ** (s * k) * g.abs()) for k, g in seq.entries]
    if math.isinf(p) and math.isinf(q):
        value = max(float(w.max()) for _, w in weighted)
        return NormReport(value, None, params, trunc)
    if not math.isinf(p):
        if math.isinf(q):
            inner = np.max(np.stack([w for _, w in weighted]), axis=0)
        else:
            inner = np.zeros(f.grid.shape)
            for _, w in weighted:
                inner = inner + w**q
            inner = inner ** (1.0 / q)
        value = float((h_d * np.sum(inner**p)) ** (1.0 / p))
        return NormReport(value, None, params, trunc)
    # p = inf, q < inf
    if homogeneous:
        value, arg, _ = cube_sup(seq, q, s, f.grid.coarsest_level)
        return NormReport(value, arg, params, trunc)
    if f.grid.finest_level < 1:
        raise PreconditionError("grid has no dyadic cube of side < 1")
    low = float(seq.get(0).abs().max()) if seq.get(0) is not None else 0.0
    # shells k < level never enter a cube's sum, so Lambda_0 drops out here
    sup, arg, _ = cube_sup(seq, q, s, 1)
    trunc["lambda0_sup"] = low
    return NormReport(low + sup, arg, params, trunc)


def besov_norm(f: SampledField, s: float, p: float, q: float, homogeneous: bool = True,
               k_lo: int | None = None, k_hi: int | None = None) -> NormReport:
    """``l^q(L^p)`` norm of the truncated weighted shells."""
    if not (p > 0 and q > 0):
        raise PreconditionError(f"p and q must be positive, got {p}, {q}")
    seq = _shells(f, homogeneous, k_lo, k_hi)
    h_d = f.grid.cell_volume
    masses = []
    for k, g in seq.entries:
        a = g.abs()
        m = float(a.max()) if math.isinf(p) else float((h_d * np.sum(a**p)) ** (1.0 / p))
        masses.append(2.0 ** (s * k) * m)
    masses = np.asarray(masses)
    value = float(masses.max()) if math.isinf(q) else float(np.sum(masses**q) ** (1.0 / q))
    return NormReport(value, None, {"s": s, "p": p, "q": q, "homogeneous": homogeneous},
                      {"k_lo": seq.ks[0], "k_hi": seq.k_max})


__all__ = ["DyadicCube", "NormReport", "cubes_at_level", "local_avg", "cube_sup", "v_norm",
           "v_norm_bruteforce", "f_norm", "besov_norm", "shell_range"]

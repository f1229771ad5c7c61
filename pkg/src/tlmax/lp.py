"""Littlewood-Paley projections and the dyadic sampling expansion.

All convolutions are spectral multiplications on the torus frequency
lattice, so they are exact up to FFT roundoff.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bumps import make_inhomogeneous_father, make_lp_mother, make_reproducing_kernel
from .errors import CertificateError, PreconditionError
from .sample_grid import (BandSpec, GridSpec, SampledField, _multiply_spectrum,
                          certify)

# relative slack when comparing a declared band radius with a required one
_RADIUS_SLACK = 1e-12


@lru_cache(maxsize=1)
def _mother():
    return make_lp_mother()


@lru_cache(maxsize=1)
def _father():
    return make_inhomogeneous_father()


def _require_resolved(grid: GridSpec, k: int) -> None:
    if 2.0 ** (k + 1) > grid.nyquist:
        raise PreconditionError(
            f"scale k={k} needs 2^(k+1) <= Nyquist {grid.nyquist}; refine the grid")


def project(f: SampledField, k: int) -> SampledField:
    """Pi_k f: multiply the spectrum by phihat(2^-k xi); certified in band (k, 2)."""
    _require_resolved(f.grid, k)
    mult = _mother().transform(2.0 ** (-k) * f.grid.xi_abs())
    out = SampledField(f.grid, _multiply_spectrum(f, mult), None, f"Pi_{k}")
    return certify(out, BandSpec(k, 2.0))


def inhomog_project(f: SampledField, k: int) -> SampledField:
    """Lambda_0 f = Phi * f and Lambda_k f = Pi_k f for k >= 1."""
    if k < 0 or int(k) != k:
        raise PreconditionError(f"inhomogeneous index must be a nonnegative integer, got {k}")
    if k >= 1:
        return project(f, k).relabel(f"Lambda_{k}")
    _require_resolved(f.grid, 0)
    mult = _father().transform(f.grid.xi_abs())
    out = SampledField(f.grid, _multiply_spectrum(f, mult), None, "Lambda_0")
    return certify(out, BandSpec(0, 2.0))


def reproduce(f: SampledField, k: int) -> SampledField:
    """Convolution with the reproducing kernel psi_k (identity on E(2^(k-2)) fields)."""
    mult = make_reproducing_kernel(k).transform(f.grid.xi_abs())
    return SampledField(f.grid, _multiply_spectrum(f, mult), f.band, f.label)


def sampling_expansion(f: SampledField, k: int) -> tuple[SampledField, float]:
    """Rebuild ``f`` from its values at the lower-left corners of level-k cubes.

    The synthesized field is ``sum_Q 2^(-kd) f(x_Q) psi_k(x - x_Q)`` with
    ``psi_k`` periodized on the torus.  Its coefficients are
    ``2^(-kd) psihat_k(n/L) D[n mod L 2^k]`` where ``D`` is the DFT of the
    corner samples, so no spatial summation is needed.

    Returns
    -------
    reconstruction : SampledField
    max_rel_error : float
        ``max |g - f| / max |f|`` (0 for the zero field).
    """
    grid = f.grid
    if f.band is None:
        raise CertificateError("sampling expansion needs a field certified in E(2^(k-2))")
    if f.band.radius > 2.0 ** (k - 2) * (1 + _RADIUS_SLACK):
        raise CertificateError(
            f"field band radius {f.band.radius} exceeds 2^(k-2) = {2.0 ** (k - 2)}")
    if grid.h > 2.0 ** (-k - 2):
        raise PreconditionError(
            f"grid spacing {grid.h} too coarse for k={k}; need h <= {2.0 ** (-k - 2)}")
    per_axis = grid.L * 2.0**k
    if per_axis < 1:
        raise PreconditionError(f"level-{k} cubes are larger than the torus side {grid.L}")
    m = int(per_axis)
    stride = grid.N // m
    corners = f.values[(slice(None, None, stride),) * grid.d]
    dft = np.fft.fftn(corners)

    n = np.fft.fftfreq(grid.N, d=1.0 / grid.N).astype(np.int64)
    idx = np.mod(n, m)
    coeff = dft[np.ix_(*([idx] * grid.d))]
    psi = make_reproducing_kernel(k).transform(grid.xi_abs())
    spec = (2.0 ** (-k * grid.d)) * psi * coeff
    values = np.fft.ifftn(spec) / grid.cell_volume
    recon = SampledField(grid, values, f.band, f"expansion_{k}")
    scale = float(np.max(np.abs(f.values)))
    err = float(np.max(np.abs(values - f.values))) / scale if scale > 0 else 0.0
    return recon, err


@dataclass(frozen=True)
class ScaleSequence:
    """Entries ``(k, f_k)`` for ``k >= mu`` on one shared grid.

    Missing scales between ``mu`` and ``k_max`` count as zero.  When ``A`` is
    given every entry must carry a band certificate of radius at most
    ``A 2^k``; ``A=None`` admits arbitrary sampled data.
    """

    mu: int
    entries: tuple
    A: float | None = None

    def __post_init__(self):
        entries = tuple((int(k), f) for k, f in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise PreconditionError("a scale sequence needs at least one entry")
        ks = [k for k, _ in entries]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise PreconditionError(f"scales must be strictly increasing, got {ks}")
        if ks[0] < self.mu:
            raise PreconditionError(f"entry k={ks[0]} lies below the base scale {self.mu}")
        grid = entries[0][1].grid
        for k, f in entries:
            if f.grid != grid:
                raise PreconditionError("all entries must share one grid")
            if self.A is not None:
                if f.band is None:
                    raise CertificateError(f"entry k={k} is not band certified")
                if f.band.radius > self.A * 2.0**k * (1 + _RADIUS_SLACK):
                    raise CertificateError(
                        f"entry k={k} has band radius {f.band.radius} > A 2^k = {self.A * 2.0**k}")

    @property
    def grid(self) -> GridSpec:
        return self.entries[0][1].grid

    @property
    def ks(self) -> list[int]:
        return [k for k, _ in self.entries]

    @property
    def k_max(self) -> int:
        return self.entries[-1][0]

    def get(self, k: int) -> SampledField | None:
        for kk, f in self.entries:
            if kk == k:
                return f
        return None

    def to_dict(self) -> dict:
        return {"mu": self.mu, "A": self.A,
                "entries": [{"k": k, "field": f.to_dict()} for k, f in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ScaleSequence":
        entries = [(e["k"], SampledField.from_dict(e["field"])) for e in data["entries"]]
        return cls(int(data["mu"]), tuple(entries), data.get("A"))

    @classmethod
    def from_json(cls, text: str) -> "ScaleSequence":
        return cls.from_dict(json.loads(text))


def shell_range(grid: GridSpec, homogeneous: bool = True) -> tuple[int, int]:
    """Default truncation: k from -J (or 0) up to two octaves below Nyquist."""
    k_hi = int(round(np.log2(grid.N / (4.0 * grid.L))))
    k_lo = -grid.J if homogeneous else 0
    if k_hi < k_lo:
        raise PreconditionError(f"grid {grid} resolves no admissible shell")
    return k_lo, k_hi


def decompose(f: SampledField, k_lo: int | None = None, k_hi: int | None = None,
              homogeneous: bool = True) -> ScaleSequence:
    """Shells ``Pi_k f`` (or ``Lambda_k f``) for ``k_lo <= k <= k_hi``."""
    lo, hi = shell_range(f.grid, homogeneous)
    k_lo = lo if k_lo is None else k_lo
    k_hi = hi if k_hi is None else k_hi
    if k_hi < k_lo:
        raise PreconditionError(f"empty shell range [{k_lo}, {k_hi}]")
    op = project if homogeneous else inhomog_project
    return ScaleSequence(k_lo, tuple((k, op(f, k)) for k in range(k_lo, k_hi + 1)), 2.0)

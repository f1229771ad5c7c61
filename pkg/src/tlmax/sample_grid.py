"""Sampled fields on the periodic cube [0, L)^d and their spectra.

Every object in the package lives on a torus of dyadic side ``L`` sampled
at ``N`` points per axis.  Spectra use the continuous Fourier convention
``fhat(xi) = int f(x) exp(-2 pi i x.xi) dx`` restricted to the lattice
``xi = n / L``, ``n in [-N/2, N/2)^d``, so that

    coefficients = h^d * DFT(values)

and the inverse is the trigonometric sum ``f(x) = L^{-d} sum_n c_n e^{2 pi i n.x / L}``.
Coefficient arrays exposed through :class:`Spectrum` are stored in that
normative (centred) order; internal helpers work in numpy FFT order.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CertificateError, PreconditionError

BAND_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10


def _is_power_of_two(value: float) -> bool:
    if value <= 0:
        return False
    mantissa, _ = math.frexp(value)
    return mantissa == 0.5


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the torus [0, L)^d with N samples per axis."""

    d: int
    L: float
    N: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise PreconditionError(f"dimension must be 1 or 2, got {self.d}")
        if not _is_power_of_two(self.N) or int(self.N) != self.N:
            raise PreconditionError(f"N must be a power of two, got {self.N}")
        if not _is_power_of_two(float(self.L)):
            raise PreconditionError(f"L must be a power of two, got {self.L}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def J(self) -> int:
        """log2 of the side length."""
        return int(round(math.log2(self.L)))

    @property
    def finest_level(self) -> int:
        """Dyadic level whose cubes have side ``h``."""
        return int(round(math.log2(self.N / self.L)))

    @property
    def coarsest_level(self) -> int:
        """Dyadic level whose single cube is the whole torus."""
        return -self.J

    @property
    def nyquist(self) -> float:
        return self.N / (2.0 * self.L)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def coords(self) -> np.ndarray:
        """Sample positions along one axis."""
        return np.arange(self.N) * self.h

    def points(self) -> np.ndarray:
        """All sample positions, shape ``shape + (d,)`` in row-major order."""
        axes = [self.coords()] * self.d
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def frequencies(self) -> np.ndarray:
        """Integer frequency indices in normative order ``[-N/2, N/2)``."""
        return np.arange(-self.N // 2, self.N // 2)

    def xi_abs(self) -> np.ndarray:
        """|xi| on the frequency lattice in numpy FFT order (read-only, cached)."""
        return _xi_abs_fft(self.d, self.L, self.N)

    def to_dict(self) -> dict:
        return {"d": self.d, "L": self.L, "N": self.N}


@lru_cache(maxsize=64)
def _xi_abs_fft(d: int, L: float, N: int) -> np.ndarray:
    freqs = np.fft.fftfreq(N, d=L / N)
    if d == 1:
        out = np.abs(freqs)
    else:
        out = np.sqrt(freqs[:, None] ** 2 + freqs[None, :] ** 2)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BandSpec:
    """Spectral support claim ``{xi : |xi| <= A 2^k}``."""

    k: int
    A: float = 1.0

    def __post_init__(self):
        if not self.A > 0:
            raise PreconditionError(f"band constant must be positive, got {self.A}")

    @property
    def radius(self) -> float:
        return self.A * 2.0**self.k

    def to_dict(self) -> dict:
        return {"k": self.k, "A": self.A}


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampledField:
    grid: GridSpec
    values: np.ndarray
    band: BandSpec | None = None
    label: str = ""

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.size != self.grid.size:
            raise PreconditionError(
                f"expected {self.grid.size} samples, got {vals.size}")
        object.__setattr__(self, "values", _frozen(vals.reshape(self.grid.shape)))

    @property
    def certified(self) -> bool:
        return self.band is not None

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def relabel(self, label: str) -> "SampledField":
        return SampledField(self.grid, self.values, self.band, label)

    def with_band(self, band: BandSpec | None) -> "SampledField":
        """Attach ``band`` after checking it; ``None`` strips the certificate."""
        if band is None:
            return SampledField(self.grid, self.values, None, self.label)
        return certify(self, band)

    def to_dict(self) -> dict:
        flat = self.values.reshape(-1)
        return {
            "grid": self.grid.to_dict(),
            "band": None if self.band is None else self.band.to_dict(),
            "label": self.label,
            "values": [[float(z.real), float(z.imag)] for z in flat],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SampledField":
        g = data["grid"]
        grid = GridSpec(int(g["d"]), float(g["L"]), int(g["N"]))
        raw = np.asarray(data["values"], dtype=float)
        values = raw[:, 0] + 1j * raw[:, 1]
        band = data.get("band")
        band = None if band is None else BandSpec(int(band["k"]), float(band["A"]))
        return cls(grid, values, band, data.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "SampledField":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """One row per sample: index, x-coordinates, re, im (row-major)."""
        buf = io.StringIO()
        axes = [f"x{i}" for i in range(self.grid.d)]
        buf.write(",".join(["index", *axes, "re", "im"]) + "\n")
        pts = self.grid.points().reshape(-1, self.grid.d)
        for i, (pt, z) in enumerate(zip(pts, self.values.reshape(-1))):
            coords = ",".join(repr(float(c)) for c in pt)
            buf.write(f"{i},{coords},{float(z.real)!r},{float(z.imag)!r}\n")
        return buf.getvalue()


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients ``c_n`` on ``n in [-N/2, N/2)^d`` (centred order)."""

    grid: GridSpec
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients)
        if c.shape != self.grid.shape:
            raise PreconditionError(
                f"coefficient shape {c.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coefficients", _frozen(c))

    def at(self, n) -> complex:
        """Coefficient at integer frequency vector ``n``."""
        idx = tuple(np.atleast_1d(n) + self.grid.N // 2)
        return complex(self.coefficients[idx])

    def fft_order(self) -> np.ndarray:
        return np.fft.ifftshift(self.coefficients)

    @classmethod
    def from_fft_order(cls, grid: GridSpec, coeffs: np.ndarray) -> "Spectrum":
        return cls(grid, np.fft.fftshift(coeffs))


def forward_spectrum(f: SampledField) -> Spectrum:
    grid = f.grid
    return Spectrum.from_fft_order(grid, np.fft.fftn(f.values) * grid.cell_volume)


def synthesize(spec: Spectrum, band: BandSpec | None = None,
               label: str = "") -> SampledField:
    grid = spec.grid
    values = np.fft.ifftn(spec.fft_order()) / grid.cell_volume
    field_ = SampledField(grid, values, None, label)
    return field_ if band is None else certify(field_, band)


def _multiply_spectrum(f: SampledField, multiplier: np.ndarray) -> np.ndarray:
    """Samples of the field whose FFT-order spectrum is ``multiplier * fhat``."""
    return np.fft.ifftn(np.fft.fftn(f.values) * multiplier)


def _check_nyquist(grid: GridSpec, band: BandSpec) -> None:
    if band.radius > grid.nyquist:
        raise PreconditionError(
            f"band radius {band.radius} exceeds the Nyquist frequency {grid.nyquist}")


def band_check(f: SampledField, band: BandSpec) -> float:
    """Fraction of spectral energy outside ``|xi| <= A 2^k`` (0 for the zero field)."""
    _check_nyquist(f.grid, band)
    energy = np.abs(np.fft.fftn(f.values)) ** 2
    total = float(energy.sum())
    if total == 0.0:
        return 0.0
    outside = float(energy[f.grid.xi_abs() > band.radius].sum())
    return outside / total


def certify(f: SampledField, band: BandSpec, tol: float = BAND_TOL) -> SampledField:
    frac = band_check(f, band)
    if frac > tol:
        raise CertificateError(
            f"out-of-band energy fraction {frac:.3e} exceeds {tol:.0e} for band "
            f"(k={band.k}, A={band.A})")
    return SampledField(f.grid, f.values, band, f.label)


def evaluate_offgrid(f: SampledField, x) -> complex | np.ndarray:
    """Trigonometric interpolation of a certified field at arbitrary points.

    ``x`` is a scalar (d=1), a length-d point, or an array of points with
    trailing axis d.  Points that coincide with grid nodes return the stored
    sample.
    """
    if f.band is None:
        raise CertificateError("off-grid evaluation requires a band-certified field")
    grid = f.grid
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 0 or (grid.d > 1 and pts.ndim == 1)
    pts = pts.reshape(-1, grid.d)

    coeffs = forward_spectrum(f).coefficients.reshape(-1)
    n = grid.frequencies()
    if grid.d == 1:
        nvec = n[:, None]
    else:
        nvec = np.stack(np.meshgrid(n, n, indexing="ij"), axis=-1).reshape(-1, 2)

    out = np.empty(len(pts), dtype=np.complex128)
    for i, pt in enumerate(pts):
        idx = pt / grid.h
        on_grid = np.all(idx == np.round(idx))
        if on_grid:
            j = tuple(int(v) % grid.N for v in np.round(idx))
            out[i] = f.values[j]
            continue
        phase = np.exp(2j * np.pi * (nvec @ pt) / grid.L)
        out[i] = np.sum(coeffs * phase) / grid.L**grid.d
    return complex(out[0]) if scalar else out


def pure_tone(grid: GridSpec, m, amplitude: complex = 1.0,
              band: BandSpec | None = None) -> SampledField:
    """``amplitude * exp(2 pi i m.x / L)`` for an integer frequency vector ``m``."""
    m = np.atleast_1d(np.asarray(m, dtype=float))
    pts = grid.points()
    phase = np.tensordot(pts, m, axes=([-1], [0])) / grid.L
    values = amplitude * np.exp(2j * np.pi * phase)
    f = SampledField(grid, values, None, f"tone{tuple(int(v) for v in m)}")
    return f if band is None else certify(f, band)


def from_function(grid: GridSpec, fn, band: BandSpec | None = None,
                  label: str = "") -> SampledField:
    """Sample ``fn`` (called with the coordinate arrays) on the grid."""
    pts = grid.points()
    args = [pts[..., i] for i in range(grid.d)]
    f = SampledField(grid, np.asarray(fn(*args), dtype=np.complex128), None, label)
    return f if band is None else certify(f, band)

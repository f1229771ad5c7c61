"""Reproducible random band-limited test fields."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .bumps import theta
from .errors import PreconditionError
from .lp import ScaleSequence
from .sample_grid import BandSpec, GridSpec, SampledField, certify


@dataclass(frozen=True)
class RandomFamilySpec:
    """A seeded family of band-certified random fields.

    Trial ``t`` at scale ``k`` draws complex Gaussian coefficients from the
    stream ``SeedSequence([seed, t, k - mu])``, so any subset of trials can
    be regenerated independently of scheduling.
    """

    seed: int = 0
    count: int = 20
    A: float = 2.0
    mu: int = 0
    k_max: int = 0
    envelope: str = "flat"
    exponent: float = 0.0

    def __post_init__(self):
        if self.envelope not in ("flat", "decaying"):
            raise PreconditionError(f"unknown envelope {self.envelope!r}")
        if self.count < 1:
            raise PreconditionError("family needs at least one trial")
        if self.k_max < self.mu:
            raise PreconditionError(f"empty scale range [{self.mu}, {self.k_max}]")
        if not self.A > 0:
            raise PreconditionError(f"band constant must be positive, got {self.A}")

    @property
    def scales(self) -> range:
        return range(self.mu, self.k_max + 1)

    def to_dict(self) -> dict:
        return asdict(self)


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *[int(k) & 0xFFFFFFFF for k in keys]]))


def random_field(grid: GridSpec, k: int, A: float, rng: np.random.Generator,
                 envelope: str = "flat", exponent: float = 0.0,
                 label: str = "") -> SampledField:
    """Random field certified in band ``(k, A)``, normalized to ``max |f| = 1``.

    Coefficients are complex Gaussian, multiplied by the smooth cutoff
    ``theta(2 |xi| / (A 2^k))`` (1 up to half the radius, 0 at the radius).
    """
    band = BandSpec(k, A)
    if band.radius > grid.nyquist:
        raise PreconditionError(
            f"band radius {band.radius} exceeds the Nyquist frequency {grid.nyquist}")
    xi = grid.xi_abs()
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs = coeffs * theta(2.0 * xi / band.radius)
    if envelope == "decaying":
        coeffs = coeffs * (1.0 + xi * grid.L) ** (-exponent)
    values = np.fft.ifftn(coeffs)
    peak = float(np.max(np.abs(values)))
    if peak == 0.0:
        raise PreconditionError("band contains no lattice frequency; enlarge the torus")
    return certify(SampledField(grid, values / peak, None, label), band)


def family_field(spec: RandomFamilySpec, grid: GridSpec, trial: int, k: int) -> SampledField:
    rng = _rng(spec.seed, trial, k - spec.mu)
    return random_field(grid, k, spec.A, rng, spec.envelope, spec.exponent,
                        f"trial{trial}_k{k}")


def family_sequence(spec: RandomFamilySpec, grid: GridSpec, trial: int,
                    weights=None) -> ScaleSequence:
    """One random ``ScaleSequence`` with entries ``k = mu .. k_max``.

    ``weights`` optionally maps k to a positive amplitude; by default a
    per-entry amplitude is drawn log-uniformly in ``[1/4, 1]`` so that no
    scale dominates by construction.
    """
    rng = _rng(spec.seed, trial, 1 << 20)
    amps = rng.uniform(np.log(0.25), 0.0, len(spec.scales))
    entries = []
    for i, k in enumerate(spec.scales):
        f = family_field(spec, grid, trial, k)
        a = float(np.exp(amps[i])) if weights is None else float(weights[k])
        entries.append((k, SampledField(grid, a * f.values, f.band, f.label)))
    return ScaleSequence(spec.mu, tuple(entries), spec.A)

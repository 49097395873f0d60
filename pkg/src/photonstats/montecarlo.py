"""Brute-force sampling oracle: sources through splitters and noisy detectors.

Every closed form in the package can be cross-checked by drawing photon
numbers from the source law, routing each photon multinomially through a
lossy splitter network, thinning per detector efficiency and adding Poisson
dark counts. No amplitude-level interference is simulated here; wherever the
physics needs amplitudes the analytic modules handle it and this module only
validates their photon-number predictions.

Reproducibility contract: generators are counter-based (Philox) keyed by
(seed, stream_id), so identical seeds give identical samples on every
platform and distinct stream_ids give provably disjoint streams for parallel
sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, UndefinedCoherenceError
from .states import PhotonNumberDistribution, SourceSpec

__all__ = [
    "RngSeed",
    "SplitterNetwork",
    "DetectorModel",
    "make_generator",
    "sample_source",
    "split_and_detect",
    "estimate_pmf",
    "empirical_g2",
]

_U64 = 1 << 64


@dataclass(frozen=True)
class RngSeed:
    """Reproducible stream address: (seed, stream_id) -> one Philox key."""

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, int) or not (0 <= value < _U64):
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def key(self) -> int:
        return self.seed + (self.stream_id << 64)


@dataclass(frozen=True)
class SplitterNetwork:
    """Multinomial photon router. Probabilities may sum below 1; the
    remainder is loss (photons that reach no detector)."""

    routing_probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.routing_probs)
        if len(probs) < 1:
            raise ContractError("network needs at least one output mode")
        for p in probs:
            if not (math.isfinite(p) and 0.0 <= p <= 1.0):
                raise DomainError(f"routing probability {p!r} outside [0, 1]")
        if sum(probs) > 1.0 + 1e-12:
            raise DomainError(f"routing probabilities sum to {sum(probs)} > 1")
        object.__setattr__(self, "routing_probs", probs)

    @property
    def mode_count(self) -> int:
        return len(self.routing_probs)

    @property
    def loss_probability(self) -> float:
        return max(0.0, 1.0 - sum(self.routing_probs))


@dataclass(frozen=True)
class DetectorModel:
    """Photon-number detector with efficiency η and Poisson dark rate ν
    (mean dark counts per measurement window)."""

    efficiency: float = 1.0
    dark_rate: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.efficiency) and 0.0 <= self.efficiency <= 1.0):
            raise DomainError(f"efficiency must lie in [0, 1], got {self.efficiency!r}")
        if not (math.isfinite(self.dark_rate) and self.dark_rate >= 0.0):
            raise DomainError(f"dark_rate must be >= 0, got {self.dark_rate!r}")


def make_generator(seed: RngSeed | int) -> np.random.Generator:
    """Philox generator for the given stream address."""
    if isinstance(seed, int):
        seed = RngSeed(seed)
    return np.random.Generator(np.random.Philox(key=seed.key()))


def sample_source(source: SourceSpec, n_samples: int, seed: RngSeed | int) -> np.ndarray:
    """i.i.d. photon numbers from the exact source law.

    Thermal draws use the geometric trick: if G ~ geometric with success
    probability 1/(1+n̄) on {1,2,...}, then G−1 is Bose–Einstein with mean n̄.
    Coherent light is Poisson; Fock is deterministic.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    rng = make_generator(seed)
    mean = source.mean
    if source.kind == "fock":
        return np.full(n_samples, int(mean), dtype=np.int64)
    if source.kind == "coherent":
        return rng.poisson(mean, size=n_samples).astype(np.int64)
    # thermal
    if mean == 0.0:
        return np.zeros(n_samples, dtype=np.int64)
    return (rng.geometric(1.0 / (1.0 + mean), size=n_samples) - 1).astype(np.int64)


def split_and_detect(
    counts: np.ndarray,
    network: SplitterNetwork,
    detectors: tuple[DetectorModel, ...] | list[DetectorModel],
    seed: RngSeed | int,
) -> np.ndarray:
    """Route, thin and add dark counts; returns shape (n_samples, mode_count).

    Each input photon independently picks output mode i with probability
    routing_probs[i] (or is lost with the leftover probability); mode i keeps
    each arrival with probability η_i and adds Poisson(ν_i) dark counts.
    """
    counts = np.asarray(counts)
    if counts.ndim != 1 or counts.size == 0:
        raise ContractError("counts must be a non-empty 1-D integer vector")
    if np.any(counts < 0):
        raise DomainError("photon counts must be >= 0")
    if len(detectors) != network.mode_count:
        raise ContractError(
            f"{len(detectors)} detectors for {network.mode_count} output modes"
        )
    rng = make_generator(seed)
    pvals = np.asarray(network.routing_probs + (network.loss_probability,))
    # Guard float drift: multinomial demands an exact simplex.
    pvals = np.clip(pvals, 0.0, None)
    pvals[-1] = max(0.0, 1.0 - pvals[:-1].sum())
    routed = rng.multinomial(counts.astype(np.int64), pvals)[:, : network.mode_count]
    out = np.empty_like(routed)
    for i, det in enumerate(detectors):
        kept = routed[:, i]
        if det.efficiency < 1.0:
            kept = rng.binomial(kept, det.efficiency)
        if det.dark_rate > 0.0:
            kept = kept + rng.poisson(det.dark_rate, size=kept.shape)
        out[:, i] = kept
    return out


def estimate_pmf(samples: np.ndarray) -> tuple[PhotonNumberDistribution, np.ndarray]:
    """Empirical pmf with per-bin binomial standard errors sqrt(p(1−p)/N)."""
    samples = np.asarray(samples)
    if samples.ndim != 1 or samples.size == 0:
        raise ContractError("need at least one sample")
    if np.any(samples < 0):
        raise DomainError("photon counts must be >= 0")
    n = samples.size
    freqs = np.bincount(samples.astype(np.int64)) / n
    se = np.sqrt(freqs * (1.0 - freqs) / n)
    return PhotonNumberDistribution(freqs, 0.0), se


def empirical_g2(samples: np.ndarray) -> tuple[float, float]:
    """Sample g2 = ⟨n(n−1)⟩/⟨n⟩² and its delta-method standard error.

    Writing g = m2/m1² with m1 = ⟨n⟩ and m2 = ⟨n(n−1)⟩, the gradient is
    (−2 m2/m1³, 1/m1²) and the error follows from the sample covariance of
    (n, n(n−1)) scaled by 1/N.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1 or samples.size < 2:
        raise ContractError("need at least two samples")
    n = samples.size
    pairs = samples * (samples - 1.0)
    m1 = samples.mean()
    m2 = pairs.mean()
    if m1 <= 0.0:
        raise UndefinedCoherenceError("empirical g2 undefined for zero-mean samples")
    g2 = m2 / (m1 * m1)
    grad = np.array([-2.0 * m2 / m1**3, 1.0 / (m1 * m1)])
    cov = np.cov(np.stack([samples, pairs])) / n
    var = float(grad @ cov @ grad)
    return float(g2), math.sqrt(max(var, 0.0))

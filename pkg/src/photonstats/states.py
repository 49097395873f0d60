"""Photon-number distributions and the basic statistics built on them.

Everything downstream (angle scans, wavepacket correlations, conditional
sensing, imaging) manipulates truncated photon-number pmfs. This module fixes
the conventions once:

* a distribution is a non-negative vector p(0..n_max) whose missing mass is
  tracked explicitly in ``tail_bound`` and never renormalized away;
* the three canonical sources are Fock (unit mass at n), coherent
  (Poissonian, p(n) = e^(-n̄) n̄^n / n!) and thermal (Bose–Einstein,
  p(n) = n̄^n / (1+n̄)^(n+1));
* g2 is the single-mode zero-delay form 1 + (⟨(Δn)²⟩ − ⟨n⟩)/⟨n⟩².

Truncation policy: the baseline cutoff is max(16, ceil(20·(n̄+1))). Where the
exact tail of the source is known (geometric, Poisson survival functions) the
cutoff is extended until the truncated mass is at or below ``tail_target``, so
the default construction honors tail_bound ≤ 1e-10 without silent rescaling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Literal, Sequence

import numpy as np
from scipy import special, stats

from .errors import (
    AccuracyError,
    ContractError,
    DomainError,
    UndefinedCoherenceError,
)

__all__ = [
    "DEFAULT_TAIL_TARGET",
    "PhotonNumberDistribution",
    "SourceSpec",
    "fock",
    "coherent",
    "thermal",
    "default_cutoff",
    "pmf",
    "moments",
    "g2_from_pmf",
    "convolve",
    "binomial_thin",
    "visibility",
    "format_float",
    "write_csv",
    "read_csv",
    "to_json_array",
    "from_json_array",
]

DEFAULT_TAIL_TARGET = 1e-10

# Numerical slack for "sums to one": accumulated float error over ~1e3 terms.
_SUM_SLACK = 1e-12


# ===================================================================
# Value types
# ===================================================================

@dataclass(frozen=True)
class PhotonNumberDistribution:
    """Truncated pmf over photon number n = 0..n_max.

    ``tail_bound`` is a guaranteed upper bound on the probability mass lost to
    truncation. The stored vector is never renormalized: sum(probs) always
    lies in [1 - tail_bound, 1], so truncation error stays auditable.
    """

    probs: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self) -> None:
        arr = np.array(self.probs, dtype=float, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ContractError("probs must be a non-empty 1-D vector")
        if not np.all(np.isfinite(arr)):
            raise DomainError("probs must be finite")
        if np.any(arr < 0.0):
            raise DomainError("probs must be non-negative")
        if not (math.isfinite(self.tail_bound) and 0.0 <= self.tail_bound < 1.0):
            raise DomainError(f"tail_bound {self.tail_bound!r} outside [0, 1)")
        total = float(arr.sum())
        if total > 1.0 + _SUM_SLACK:
            raise ContractError(f"probability mass {total} exceeds 1")
        if total < 1.0 - self.tail_bound - _SUM_SLACK:
            raise ContractError(
                f"probability mass {total} below 1 - tail_bound = {1.0 - self.tail_bound}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)


@dataclass(frozen=True)
class SourceSpec:
    """One of the canonical sources: fock(n), coherent(n̄) or thermal(n̄).

    ``mean`` is the mean photon number; for a Fock state it is the (integer)
    photon number itself.
    """

    kind: Literal["fock", "coherent", "thermal"]
    mean: float

    def __post_init__(self) -> None:
        if self.kind not in ("fock", "coherent", "thermal"):
            raise DomainError(f"unknown source kind {self.kind!r}")
        if not (math.isfinite(self.mean) and self.mean >= 0.0):
            raise DomainError(f"mean photon number must be finite and >= 0, got {self.mean!r}")
        if self.kind == "fock" and self.mean != int(self.mean):
            raise DomainError(f"fock occupation must be a non-negative integer, got {self.mean!r}")


def fock(n: int) -> SourceSpec:
    """Number state with exactly n photons."""
    return SourceSpec("fock", float(n))


def coherent(mean: float) -> SourceSpec:
    """Coherent state with mean photon number n̄ = |α|²."""
    return SourceSpec("coherent", float(mean))


def thermal(mean: float) -> SourceSpec:
    """Single-mode thermal (Bose–Einstein) state with mean n̄."""
    return SourceSpec("thermal", float(mean))


# ===================================================================
# Truncation
# ===================================================================

def default_cutoff(mean_total: float) -> int:
    """Baseline truncation index for a source of the given total mean."""
    if not (math.isfinite(mean_total) and mean_total >= 0.0):
        raise DomainError(f"mean_total must be finite and >= 0, got {mean_total!r}")
    return max(16, math.ceil(20.0 * (mean_total + 1.0)))


def _thermal_tail(mean: float, n_max: int) -> float:
    # Geometric tail: sum_{n > n_max} n̄^n/(1+n̄)^(n+1) = (n̄/(1+n̄))^(n_max+1).
    if mean == 0.0:
        return 0.0
    return math.exp((n_max + 1) * (math.log(mean) - math.log1p(mean)))


def _coherent_tail(mean: float, n_max: int) -> float:
    if mean == 0.0:
        return 0.0
    return float(stats.poisson.sf(n_max, mean))


def pmf(
    source: SourceSpec,
    cutoff: int | None = None,
    tail_target: float = DEFAULT_TAIL_TARGET,
) -> PhotonNumberDistribution:
    """Exact truncated pmf of a canonical source.

    With ``cutoff=None`` the baseline rule is used and then extended until the
    exact tail mass drops to ``tail_target`` or below. An explicit ``cutoff``
    is honored verbatim, with the true tail recorded in the result.
    """
    if cutoff is not None and cutoff < 0:
        raise DomainError("cutoff must be >= 0")
    mean = source.mean

    if source.kind == "fock":
        n = int(mean)
        n_max = max(default_cutoff(0.0), n) if cutoff is None else cutoff
        if n_max < n:
            raise ContractError(f"cutoff {n_max} cannot hold fock({n})")
        probs = np.zeros(n_max + 1)
        probs[n] = 1.0
        return PhotonNumberDistribution(probs, 0.0)

    tail_of = _thermal_tail if source.kind == "thermal" else _coherent_tail
    if cutoff is None:
        n_max = default_cutoff(mean)
        for _ in range(64):
            if tail_of(mean, n_max) <= tail_target:
                break
            n_max = math.ceil(n_max * 1.25) + 8
        else:
            raise AccuracyError(
                f"could not reach tail {tail_target} for {source.kind}({mean})"
            )
    else:
        n_max = cutoff

    n = np.arange(n_max + 1)
    if source.kind == "thermal":
        if mean == 0.0:
            probs = np.zeros(n_max + 1)
            probs[0] = 1.0
        else:
            # p(n) = r^n/(1+n̄) with r = n̄/(1+n̄), evaluated in log space so
            # deep geometric tails underflow to 0 instead of losing digits.
            log_r = math.log(mean) - math.log1p(mean)
            probs = np.exp(n * log_r - math.log1p(mean))
    else:  # coherent
        if mean == 0.0:
            probs = np.zeros(n_max + 1)
            probs[0] = 1.0
        else:
            probs = np.exp(n * math.log(mean) - mean - special.gammaln(n + 1.0))

    return PhotonNumberDistribution(probs, tail_of(mean, n_max))


# ===================================================================
# Statistics
# ===================================================================

def moments(dist: PhotonNumberDistribution) -> tuple[float, float]:
    """Mean and variance of the truncated pmf."""
    n = dist.support()
    mean = float(np.dot(n, dist.probs))
    second = float(np.dot(n * n, dist.probs))
    return mean, second - mean * mean


def g2_from_pmf(dist: PhotonNumberDistribution) -> float:
    """Zero-delay second-order coherence 1 + (var − mean)/mean²."""
    mean, var = moments(dist)
    if mean <= 0.0:
        raise UndefinedCoherenceError("g2 undefined for a zero-mean distribution")
    return 1.0 + (var - mean) / (mean * mean)


def convolve(
    a: PhotonNumberDistribution, b: PhotonNumberDistribution
) -> PhotonNumberDistribution:
    """Pmf of the sum of two independent photon numbers.

    The full support (n_max_a + n_max_b) is kept, so no new mass is chopped;
    the tail bound is simply additive in the inputs' missing mass.
    """
    out = np.convolve(a.probs, b.probs)
    np.clip(out, 0.0, None, out=out)
    return PhotonNumberDistribution(out, min(a.tail_bound + b.tail_bound, 1.0 - 1e-15))


def binomial_thin(
    dist: PhotonNumberDistribution, efficiency: float
) -> PhotonNumberDistribution:
    """Random deletion of photons: each survives independently with
    probability ``efficiency``. p'(k) = Σ_n p(n) C(n,k) η^k (1−η)^(n−k).

    Thinning is mass-preserving, so the tail bound carries over unchanged.
    """
    if not (0.0 <= efficiency <= 1.0):
        raise DomainError(f"efficiency must lie in [0, 1], got {efficiency!r}")
    if efficiency == 1.0:
        return dist
    size = dist.probs.size
    if efficiency == 0.0:
        probs = np.zeros(size)
        probs[0] = float(dist.probs.sum())
        return PhotonNumberDistribution(probs, dist.tail_bound)
    k = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    kernel = stats.binom.pmf(k, n, efficiency)
    return PhotonNumberDistribution(kernel @ dist.probs, dist.tail_bound)


def visibility(intensity_samples: Iterable[Sequence[float]]) -> float:
    """Fringe visibility (I_max − I_min)/(I_max + I_min) of sampled points.

    Input is a sequence of (k, I) pairs; only the intensities matter, the
    abscissa is kept for symmetry with the CSV artifacts. Sampling densely
    enough to catch the extremes is the caller's job.
    """
    arr = np.asarray(list(intensity_samples), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ContractError("expected a non-empty sequence of (k, I) pairs")
    intensities = arr[:, 1]
    if not np.all(np.isfinite(intensities)):
        raise DomainError("intensities must be finite")
    if np.any(intensities < 0.0):
        raise DomainError("intensities must be non-negative")
    hi = float(intensities.max())
    lo = float(intensities.min())
    if hi == 0.0:
        raise DomainError("visibility undefined for an all-zero fringe")
    return (hi - lo) / (hi + lo)


# ===================================================================
# Serialization (CSV `n,prob`, JSON arrays; 17 significant digits)
# ===================================================================

def format_float(x: float) -> str:
    """Decimal string with 17 significant digits; round-trips bit-exactly."""
    return f"{float(x):.17g}"


def write_csv(dist: PhotonNumberDistribution, dest: str | IO[str]) -> None:
    """Write `n,prob` rows. Note the tail bound is not stored; reading back
    reconstructs it as the observed mass deficit."""
    own = isinstance(dest, str)
    fh: IO[str] = open(dest, "w", encoding="ascii") if own else dest
    try:
        fh.write("n,prob\n")
        for n, p in enumerate(dist.probs):
            fh.write(f"{n},{format_float(p)}\n")
    finally:
        if own:
            fh.close()


def read_csv(src: str | IO[str]) -> PhotonNumberDistribution:
    own = isinstance(src, str)
    fh: IO[str] = open(src, "r", encoding="ascii") if own else src
    try:
        header = fh.readline().strip()
        if header != "n,prob":
            raise ContractError(f"expected header 'n,prob', got {header!r}")
        values: list[float] = []
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            n_str, p_str = line.split(",")
            if int(n_str) != len(values):
                raise ContractError(f"non-contiguous index at data row {line_no}")
            values.append(float(p_str))
    finally:
        if own:
            fh.close()
    probs = np.asarray(values)
    deficit = max(0.0, 1.0 - float(probs.sum()))
    return PhotonNumberDistribution(probs, min(deficit + _SUM_SLACK, 1.0 - 1e-15))


def to_json_array(dist: PhotonNumberDistribution) -> str:
    """JSON array of probabilities, 17 significant digits each."""
    return "[" + ", ".join(format_float(p) for p in dist.probs) + "]"


def from_json_array(text: str) -> PhotonNumberDistribution:
    values = json.loads(text)
    if not isinstance(values, list) or not values:
        raise ContractError("expected a non-empty JSON array")
    probs = np.asarray([float(v) for v in values])
    deficit = max(0.0, 1.0 - float(probs.sum()))
    return PhotonNumberDistribution(probs, min(deficit + _SUM_SLACK, 1.0 - 1e-15))

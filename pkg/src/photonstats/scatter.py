"""Photon statistics of a polarized source mixed with its plasmonic scatter.

A vertically-referenced polarization angle θ (degrees) splits the source mean
n̄_s between two effective thermal modes that reach the detector together: one
carrying the plasmon-side mean A = n̄_pl + η·n̄_s and one carrying the leftover
B = (1−η)·n̄_s, with η = cos²θ. The detected photon-number law is the double
geometric sum

    p_det(n) = Σ_{m=0}^{n} A^(n−m) B^m / ((A+1)^(n−m+1) (B+1)^(m+1)),

which is exactly the convolution of two Bose–Einstein pmfs; keeping the
summed form as the primary evaluation path lets tests check it independently
against the convolution of `states.pmf` results.

The resulting g2 runs between 2 (single thermal mode) and 1.5 (two equal
thermal modes), the classic bunching reduction of incoherent mode mixing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import AccuracyError, DomainError
from .states import (
    DEFAULT_TAIL_TARGET,
    PhotonNumberDistribution,
    default_cutoff,
    g2_from_pmf,
)

__all__ = [
    "ScatterConfig",
    "detected_pmf",
    "g2_vs_angle",
    "p_function_convolution_check",
]


@dataclass(frozen=True)
class ScatterConfig:
    """Source mean n̄_s, plasmonic mean n̄_pl, polarization angle in degrees
    measured from the vertical axis. η = cos²θ is derived."""

    mean_source: float
    mean_plasmon: float
    theta_deg: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean_source) and self.mean_source >= 0.0):
            raise DomainError(f"mean_source must be >= 0, got {self.mean_source!r}")
        if not (math.isfinite(self.mean_plasmon) and self.mean_plasmon >= 0.0):
            raise DomainError(f"mean_plasmon must be >= 0, got {self.mean_plasmon!r}")
        if not (math.isfinite(self.theta_deg) and 0.0 <= self.theta_deg <= 90.0):
            raise DomainError(f"theta_deg must lie in [0, 90], got {self.theta_deg!r}")

    @property
    def eta(self) -> float:
        return math.cos(math.radians(self.theta_deg)) ** 2

    @property
    def mode_means(self) -> tuple[float, float]:
        """(A, B): plasmon-side and residual-photon-side thermal means."""
        eta = self.eta
        return (
            self.mean_plasmon + eta * self.mean_source,
            (1.0 - eta) * self.mean_source,
        )


def _geometric_terms(mean: float, n_max: int) -> np.ndarray:
    """t[j] = mean^j / (mean+1)^(j+1), the Bose–Einstein weights."""
    if mean == 0.0:
        t = np.zeros(n_max + 1)
        t[0] = 1.0
        return t
    j = np.arange(n_max + 1)
    return np.exp(j * (math.log(mean) - math.log1p(mean)) - math.log1p(mean))


def detected_pmf(
    cfg: ScatterConfig, tail_target: float = DEFAULT_TAIL_TARGET
) -> PhotonNumberDistribution:
    """Detected photon-number distribution of the mixed field.

    Every entry of the double geometric sum is exact, so the missing mass
    past the cutoff is exactly 1 minus the accumulated total; the cutoff
    grows until that deficiency meets ``tail_target``.
    """
    a, b = cfg.mode_means

    def evaluate(n_max: int) -> np.ndarray:
        term_a = _geometric_terms(a, n_max)
        term_b = _geometric_terms(b, n_max)
        probs = np.empty(n_max + 1)
        for n in range(n_max + 1):
            probs[n] = float(np.dot(term_a[n::-1], term_b[: n + 1]))
        return probs

    n_max = default_cutoff(a + b)
    for _ in range(64):
        probs = evaluate(n_max)
        tail = max(0.0, 1.0 - float(probs.sum()))
        if tail <= tail_target:
            return PhotonNumberDistribution(probs, tail)
        n_max = math.ceil(n_max * 1.25) + 8
    raise AccuracyError(
        f"could not push the truncated mass below {tail_target:g} "
        f"(A={a:g}, B={b:g})"
    )


def g2_vs_angle(
    mean_source: float,
    mean_plasmon: float,
    theta_grid_deg: np.ndarray | list[float],
) -> np.ndarray:
    """g2 of the detected field per polarization angle; rows (theta_deg, g2)
    sorted by angle."""
    grid = np.asarray(theta_grid_deg, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("theta grid must be a non-empty 1-D array")
    if np.any(grid < 0.0) or np.any(grid > 90.0):
        raise DomainError("theta grid must lie within [0, 90] degrees")
    grid = np.sort(grid)
    out = np.empty((grid.size, 2))
    for i, theta in enumerate(grid):
        cfg = ScatterConfig(mean_source, mean_plasmon, float(theta))
        out[i, 0] = theta
        out[i, 1] = g2_from_pmf(detected_pmf(cfg))
    return out


def p_function_convolution_check(
    mean_1: float, mean_2: float, tail_target: float = DEFAULT_TAIL_TARGET
) -> PhotonNumberDistribution:
    """Pmf of the state whose phase-space quasi-probability is the convolution
    of two thermal ones.

    Thermal states have Gaussian quasi-probability weight exp(−|α|²/n̄)/(πn̄)
    over coherent amplitudes, so convolving two of them adds the variances:
    the combined weight is again thermal with ñ = n̄₁+n̄₂. Rather than just
    returning that closed form, this routine evaluates the diagonal projection
    integral numerically,

        p(n) = (1/ñ) ∫_0^∞ exp(−u(1+1/ñ)) uⁿ/n! du,     u = |α|²,

    by Gauss–Laguerre quadrature (after rescaling t = u(1+ñ)/ñ the integrand
    is a polynomial times e^(−t), which the rule integrates exactly), keeping
    the check honest: agreement with the thermal pmf is a numerical outcome,
    not an identity wired into the code.
    """
    for label, m in (("mean_1", mean_1), ("mean_2", mean_2)):
        if not (math.isfinite(m) and m >= 0.0):
            raise DomainError(f"{label} must be >= 0, got {m!r}")
    combined = mean_1 + mean_2
    n_max = default_cutoff(combined)
    if combined == 0.0:
        probs = np.zeros(n_max + 1)
        probs[0] = 1.0
        return PhotonNumberDistribution(probs, 0.0)
    while math.exp((n_max + 1) * (math.log(combined) - math.log1p(combined))) > tail_target:
        n_max = math.ceil(n_max * 1.25) + 8

    order = n_max // 2 + 8
    nodes, weights = special.roots_laguerre(order)
    positive = weights > 0.0
    log_w = np.log(weights[positive])
    log_t = np.log(nodes[positive])

    n = np.arange(n_max + 1)
    # log Σ_i w_i t_i^n, one logsumexp per photon number.
    log_gamma_integral = special.logsumexp(
        log_w[None, :] + n[:, None] * log_t[None, :], axis=1
    )
    log_thermal_scale = (
        n * (math.log(combined) - math.log1p(combined))
        - math.log1p(combined)
        - special.gammaln(n + 1.0)
    )
    probs = np.exp(log_gamma_integral + log_thermal_scale)

    tail = math.exp((n_max + 1) * (math.log(combined) - math.log1p(combined)))
    total = float(probs.sum())
    if abs(total - (1.0 - tail)) > 1e-9:
        raise AccuracyError(
            f"quadrature mass {total} deviates from 1 - tail = {1.0 - tail}"
        )
    np.clip(probs, 0.0, None, out=probs)
    return PhotonNumberDistribution(probs, tail + 1e-9)

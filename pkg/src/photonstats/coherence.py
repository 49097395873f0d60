"""Wavepacket correlations of split thermal light and double-slit far fields.

Four related pieces live here because they share one physical setting, a
thermal field split between a photonic and a plasmonic path behind a double
slit:

* exact joint photon statistics of a thermal beam behind a lossless splitter
  of angle θ, and the wavepacket correlation g̃²(N,M) built from them, the
  quantity that dips below 1 for very unequal (N,M) even though the source is
  classical;
* the far-field single-detector fringe and the two-detector second-order
  correlation g²(k₁,k₂) of the polarization-mixed double slit;
* the conditional spatial correlation map: g̃²(N,M) riding the interference
  modulation under a diffraction envelope;
* a classical Gaussian-field oracle that produces the same fringe physics by
  direct quadrature over the two slits, used to validate the fringe frequency
  and the envelope shape without any photon-number reasoning;
* vacuum preselection probabilities of a five-splitter routing network.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import AccuracyError, ContractError, DomainError
from .states import default_cutoff

__all__ = [
    "ThermalSplitterState",
    "InterferenceConfig",
    "PreselectionNetwork",
    "joint_pmf",
    "gtilde2_thermal",
    "farfield_intensity",
    "farfield_g2",
    "conditional_g2_map",
    "classical_envelope_oracle",
    "modulation_frequency",
    "mode_probabilities",
    "gamma_sum",
    "preselection_distribution",
    "detected_vacuum_probability",
]


# ===================================================================
# Types
# ===================================================================

@dataclass(frozen=True)
class ThermalSplitterState:
    """Thermal beam of total mean n̄ behind a lossless splitter of angle
    θ_split: arm a carries n̄cos²θ, arm b carries n̄sin²θ."""

    mean_total: float
    split_angle: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean_total) and self.mean_total >= 0.0):
            raise DomainError(f"mean_total must be >= 0, got {self.mean_total!r}")
        if not (0.0 <= self.split_angle <= math.pi / 2.0):
            raise DomainError(
                f"split_angle must lie in [0, pi/2], got {self.split_angle!r}"
            )

    @property
    def arm_means(self) -> tuple[float, float]:
        c2 = math.cos(self.split_angle) ** 2
        return self.mean_total * c2, self.mean_total * (1.0 - c2)


@dataclass(frozen=True)
class InterferenceConfig:
    """Polarized double-slit geometry and fringe parameters.

    mean_h / mean_v are the horizontally and vertically polarized mean photon
    numbers (only the H component couples to the plasmonic path and carries
    the fringe). psi is the plasmonic splitting angle. The slit pair
    (separation d, width w) at distance D for wavelength λ gives the derived
    scales beta = πd/(λD) (fringe, per meter of detector coordinate) and
    alpha = λD/(πw) (diffraction envelope, meters). gamma_fringe scales the
    fringe contrast; zeta, envelope_width and envelope_offset shape the
    conditional correlation map and are free parameters here (defaults:
    0.9, 4/beta, 0).
    """

    mean_h: float
    mean_v: float
    psi: float
    slit_separation: float = 9.05e-6
    slit_width: float = 200e-9
    distance: float = 1.0
    wavelength: float = 780e-9
    gamma_fringe: float = 1.0
    zeta: float = 0.9
    envelope_width: float | None = None
    envelope_offset: float = 0.0

    def __post_init__(self) -> None:
        for name in ("mean_h", "mean_v"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise DomainError(f"{name} must be >= 0, got {v!r}")
        for name in ("slit_separation", "slit_width", "distance", "wavelength"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"{name} must be > 0, got {v!r}")
        for name in ("gamma_fringe", "zeta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
        if self.envelope_width is not None and not (
            math.isfinite(self.envelope_width) and self.envelope_width > 0.0
        ):
            raise DomainError(f"envelope_width must be > 0, got {self.envelope_width!r}")
        if not math.isfinite(self.psi) or not math.isfinite(self.envelope_offset):
            raise DomainError("psi and envelope_offset must be finite")

    @property
    def beta(self) -> float:
        return math.pi * self.slit_separation / (self.wavelength * self.distance)

    @property
    def alpha(self) -> float:
        return self.wavelength * self.distance / (math.pi * self.slit_width)

    @property
    def sigma_env(self) -> float:
        return self.envelope_width if self.envelope_width is not None else 4.0 / self.beta

    @property
    def polarization_angle(self) -> float:
        """Input polarization angle fixed by cos²θ_pl = n̄_H/(n̄_H+n̄_V)."""
        total = self.mean_h + self.mean_v
        if total == 0.0:
            raise DomainError("polarization angle undefined with no photons")
        return math.acos(math.sqrt(self.mean_h / total))


@dataclass(frozen=True)
class PreselectionNetwork:
    """Five-splitter cascade routing one thermal input of mean n̄ into three
    detected modes (1..3) and three loss modes (4..6)."""

    angles: tuple[float, float, float, float, float]
    mean: float

    def __post_init__(self) -> None:
        if len(self.angles) != 5:
            raise ContractError("exactly five splitter angles required")
        for i, a in enumerate(self.angles, start=1):
            if not (math.isfinite(a) and 0.0 <= a <= math.pi / 2.0):
                raise DomainError(f"angle {i} must lie in [0, pi/2], got {a!r}")
        if not (math.isfinite(self.mean) and self.mean >= 0.0):
            raise DomainError(f"mean must be >= 0, got {self.mean!r}")
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))


# ===================================================================
# Split thermal light: joint statistics and wavepacket correlation
# ===================================================================

def _validate_counts(*counts: int) -> None:
    for c in counts:
        if not isinstance(c, (int, np.integer)) or c < 0:
            raise DomainError(f"photon counts must be non-negative integers, got {c!r}")


def joint_pmf(state: ThermalSplitterState, big_n: int, big_m: int) -> float:
    """Probability of seeing exactly (N, M) photons in arms (a, b).

    Closed form: C(N+M, N) n̄^(N+M) cos^(2N)θ sin^(2M)θ / (1+n̄)^(N+M+1).
    Marginals are thermal with the arm means.
    """
    _validate_counts(big_n, big_m)
    n_bar = state.mean_total
    c2 = math.cos(state.split_angle) ** 2
    s2 = 1.0 - c2
    if n_bar == 0.0:
        return 1.0 if big_n == big_m == 0 else 0.0
    if (c2 == 0.0 and big_n > 0) or (s2 == 0.0 and big_m > 0):
        return 0.0
    total = big_n + big_m
    log_p = (
        special.gammaln(total + 1)
        - special.gammaln(big_n + 1)
        - special.gammaln(big_m + 1)
        + total * math.log(n_bar)
        - (total + 1) * math.log1p(n_bar)
    )
    if big_n > 0:
        log_p += big_n * math.log(c2)
    if big_m > 0:
        log_p += big_m * math.log(s2)
    return float(math.exp(log_p))


def gtilde2_thermal(state: ThermalSplitterState, big_n: int, big_m: int) -> float:
    """Wavepacket correlation of the split thermal field.

    g̃²(N,M) = C(N+M,N) (1+n̄cos²θ)^(N+1) (1+n̄sin²θ)^(M+1) / (1+n̄)^(N+M+1),
    equal to joint_pmf / (marginal_a(N)·marginal_b(M)). It exceeds 1 near the
    diagonal N=M and drops below 1 when N and M differ strongly.
    """
    _validate_counts(big_n, big_m)
    n_bar = state.mean_total
    mean_a, mean_b = state.arm_means
    log_g = (
        special.gammaln(big_n + big_m + 1)
        - special.gammaln(big_n + 1)
        - special.gammaln(big_m + 1)
        + (big_n + 1) * math.log1p(mean_a)
        + (big_m + 1) * math.log1p(mean_b)
        - (big_n + big_m + 1) * math.log1p(n_bar)
    )
    return float(math.exp(log_g))


# ===================================================================
# Far field of the polarized double slit
# ===================================================================

def _sinc(x: np.ndarray | float) -> np.ndarray | float:
    """sin(x)/x with sinc(0) = 1."""
    return np.sinc(np.asarray(x) / np.pi)


def farfield_intensity(cfg: InterferenceConfig, k: np.ndarray | float):
    """Mean detected intensity at detector-plane position k (unnormalized).

    sinc²(k/α) · (n̄_V + n̄_H [1 + γ sin(2ψ) cos(2βk)]): the V component only
    feeds the envelope, the H component carries the fringe.
    """
    k = np.asarray(k, dtype=float)
    envelope = _sinc(k / cfg.alpha) ** 2
    fringe = 1.0 + cfg.gamma_fringe * math.sin(2.0 * cfg.psi) * np.cos(2.0 * cfg.beta * k)
    out = envelope * (cfg.mean_v + cfg.mean_h * fringe)
    return float(out) if out.ndim == 0 else out


def farfield_g2(cfg: InterferenceConfig, k1, k2):
    """Normalized two-point correlation of the far field.

    (2n̄_H²[1 − ½sin²(2ψ)sin²(βΔk)] + 4n̄_H n̄_V[1 − ½sin²(2ψ)] + 2n̄_V²)
    divided by (n̄_H+n̄_V)². The diffraction envelope cancels in the
    normalization, so only Δk = k₁−k₂ enters.
    """
    total = cfg.mean_h + cfg.mean_v
    if total == 0.0:
        raise DomainError("farfield_g2 undefined with no photons")
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    s2psi = math.sin(2.0 * cfg.psi) ** 2
    mod = np.sin(cfg.beta * (k1 - k2)) ** 2
    num = (
        2.0 * cfg.mean_h**2 * (1.0 - 0.5 * s2psi * mod)
        + 4.0 * cfg.mean_h * cfg.mean_v * (1.0 - 0.5 * s2psi)
        + 2.0 * cfg.mean_v**2
    )
    out = num / total**2
    return float(out) if out.ndim == 0 else out


def conditional_g2_map(
    cfg: InterferenceConfig,
    state_params: ThermalSplitterState | None,
    n1: int,
    n2: int,
    k1: float,
    k2: float,
) -> float:
    """Spatial wavepacket correlation conditioned on counts (n₁, n₂) at
    detector positions (k₁, k₂).

    sinc²((k₁−k₂+k′)/σ) · (1 + (1−ζ sin²(β(k₁−k₂))) [g̃²(n₁,n₂) − 1]).

    With ``state_params=None`` the effective (n̄, θ) are read off the detector
    intensities: n̄cos²θ = ⟨n̂(k₁)⟩, n̄sin²θ = ⟨n̂(k₂)⟩.
    """
    _validate_counts(n1, n2)
    if state_params is None:
        mean_a = farfield_intensity(cfg, k1)
        mean_b = farfield_intensity(cfg, k2)
        total = mean_a + mean_b
        if total <= 0.0:
            raise DomainError("cannot derive splitter state from zero intensities")
        state_params = ThermalSplitterState(
            total, math.atan2(math.sqrt(mean_b), math.sqrt(mean_a))
        )
    g_th = gtilde2_thermal(state_params, n1, n2)
    delta = k1 - k2
    envelope = float(_sinc((delta + cfg.envelope_offset) / cfg.sigma_env)) ** 2
    modulation = 1.0 - cfg.zeta * math.sin(cfg.beta * delta) ** 2
    return envelope * (1.0 + modulation * (g_th - 1.0))


# ===================================================================
# Classical Gaussian-field oracle
# ===================================================================

def _slit_integrals(
    cfg: InterferenceConfig,
    coherence_scale: float,
    pairs: list[tuple[float, float]],
    order: int,
) -> np.ndarray:
    """q_j(k_a, k_b) = ∫∫_slit_j exp(i κ(k_b x' − k_a x)) exp(−(x−x')²/s) dx dx'
    for j in {photonic slit at +d/2, plasmonic slit at −d/2}; returns an array
    of shape (len(pairs), 2), normalized by the slit area w²."""
    nodes, weights = special.roots_legendre(order)
    half = cfg.slit_width / 2.0
    kappa = 2.0 * math.pi / (cfg.wavelength * cfg.distance)
    out = np.empty((len(pairs), 2), dtype=complex)
    for j, center in enumerate((cfg.slit_separation / 2.0, -cfg.slit_separation / 2.0)):
        x = center + half * nodes
        diff = x[:, None] - x[None, :]
        kernel = np.exp(-(diff * diff) / coherence_scale)
        for p, (ka, kb) in enumerate(pairs):
            u = weights * np.exp(-1j * kappa * ka * x)
            v = weights * np.exp(1j * kappa * kb * x)
            # (half²) from both substitutions; normalize by w² = (2·half)².
            out[p, j] = (u @ kernel @ v) * 0.25
    return out


def classical_envelope_oracle(
    cfg: InterferenceConfig, coherence_scale: float, k1: float, k2: float
) -> float:
    """Two-point correlation of a classical Gaussian field behind the slits.

    The field has correlation exp(−(x−x')²/s) across the slit plane
    (s = ``coherence_scale``, squared length). The photonic slit sits at
    +d/2, the plasmonic one at −d/2, and the polarization/splitting weights
    mix their contributions:

        cross(k_a,k_b) = q₁·(cos²θ_pl cos²ψ + sin²θ_pl) + q₂·cos²θ_pl sin²ψ
        g²(k₁,k₂) = 1 + |cross(k₁,k₂)|² / (cross(k₁,k₁)·cross(k₂,k₂)).

    Gauss–Legendre order starts at 64 per slit axis and doubles until every
    slit integral is stable to 1e-6 relative; failing to stabilize by order
    1024 raises AccuracyError.
    """
    if not (math.isfinite(coherence_scale) and coherence_scale > 0.0):
        raise DomainError(f"coherence_scale must be > 0, got {coherence_scale!r}")
    theta_pl = cfg.polarization_angle
    c2 = math.cos(theta_pl) ** 2
    s2 = 1.0 - c2
    w_photonic = c2 * math.cos(cfg.psi) ** 2 + s2
    w_plasmonic = c2 * math.sin(cfg.psi) ** 2
    if w_photonic + w_plasmonic <= 0.0:
        raise DomainError("slit weights vanish; no field reaches the screen")

    pairs = [(k1, k2), (k1, k1), (k2, k2)]
    order = 64
    prev = _slit_integrals(cfg, coherence_scale, pairs, order)
    while True:
        order *= 2
        if order > 1024:
            raise AccuracyError("slit quadrature did not stabilize by order 1024")
        cur = _slit_integrals(cfg, coherence_scale, pairs, order)
        scale = np.abs(prev)
        if np.all(np.abs(cur - prev) <= 1e-6 * np.maximum(scale, 1e-300)):
            break
        prev = cur

    cross, auto1, auto2 = (
        w_photonic * cur[i, 0] + w_plasmonic * cur[i, 1] for i in range(3)
    )
    denom = auto1.real * auto2.real
    if denom <= 0.0:
        raise AccuracyError("non-positive autocorrelation from quadrature")
    return 1.0 + float(abs(cross) ** 2 / denom)


def modulation_frequency(x: np.ndarray, y: np.ndarray) -> float:
    """Dominant angular frequency of an oscillatory signal on a uniform grid.

    Mean and linear trend are removed, a Hann window applied, and the FFT
    magnitude peak refined by quadratic interpolation in log magnitude.
    Returns ω in radians per unit of x.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 8:
        raise ContractError("need matching 1-D arrays with at least 8 samples")
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-9, atol=0.0):
        raise ContractError("x grid must be uniform")
    detrended = y - np.polyval(np.polyfit(x, y, 1), x)
    windowed = detrended * np.hanning(x.size)
    mag = np.abs(np.fft.rfft(windowed))
    peak = int(np.argmax(mag[1:])) + 1
    if peak == 0 or peak >= mag.size - 1:
        raise AccuracyError("no interior spectral peak found")
    with np.errstate(divide="ignore"):
        la, lc, lb = (
            math.log(mag[peak - 1] + 1e-300),
            math.log(mag[peak] + 1e-300),
            math.log(mag[peak + 1] + 1e-300),
        )
    denom = la - 2.0 * lc + lb
    shift = 0.0 if denom == 0.0 else 0.5 * (la - lb) / denom
    return 2.0 * math.pi * (peak + shift) / (x.size * float(dx[0]))


# ===================================================================
# Vacuum preselection through a five-splitter cascade
# ===================================================================

def mode_probabilities(net: PreselectionNetwork) -> tuple[float, ...]:
    """Routing probabilities of the six output modes (first three detected,
    last three lost); they always sum to 1."""
    t1, t2, t3, t4, t5 = net.angles
    return (
        (math.sin(t1) * math.cos(t4)) ** 2,
        (math.cos(t1) * math.sin(t2) * math.cos(t5)) ** 2,
        (math.cos(t1) * math.cos(t2) * math.cos(t3)) ** 2,
        (math.sin(t1) * math.sin(t4)) ** 2,
        (math.cos(t1) * math.sin(t2) * math.sin(t5)) ** 2,
        (math.cos(t1) * math.cos(t2) * math.sin(t3)) ** 2,
    )


def gamma_sum(n: int) -> float:
    """Σ_{k=0}^{n} C(n,k) Γ(n+½−k) Γ(½+k) / π, which collapses to n!.

    Evaluated term by term in log space; the identity (not assumed here) is
    what reduces the routed multiparticle distribution to a Bose–Einstein
    weight times a multinomial.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    k = np.arange(n + 1)
    log_terms = (
        special.gammaln(n + 1)
        - special.gammaln(k + 1)
        - special.gammaln(n - k + 1)
        + special.gammaln(n + 0.5 - k)
        + special.gammaln(0.5 + k)
        - math.log(math.pi)
    )
    return float(np.exp(special.logsumexp(log_terms)))


def _log_be(n: int, mean: float) -> float:
    if mean == 0.0:
        return 0.0 if n == 0 else -math.inf
    return n * (math.log(mean) - math.log1p(mean)) - math.log1p(mean)


def preselection_distribution(
    net: PreselectionNetwork,
    counts: tuple[int, int, int, int, int, int],
    method: str = "gamma-sum",
) -> float:
    """Probability of the joint outcome (n₁..n₆) across the six modes.

    Two algebraically equivalent evaluations are kept deliberately separate:

    * ``"gamma-sum"`` follows the sum-over-splittings form, a Γ-term
      sum times the Bose–Einstein weight and per-mode angle powers;
    * ``"factored"`` uses Bose–Einstein(n) times a multinomial over the mode
      probabilities.

    Their agreement (relative 1e-9) is asserted in tests, not silently merged.
    """
    if len(counts) != 6:
        raise ContractError("counts must have exactly six entries")
    _validate_counts(*counts)
    if method not in ("gamma-sum", "factored"):
        raise DomainError(f"unknown method {method!r}")
    probs = mode_probabilities(net)
    n = int(sum(counts))
    log_p = _log_be(n, net.mean)
    if log_p == -math.inf:
        return 0.0
    for n_i, p_i in zip(counts, probs):
        if n_i > 0:
            if p_i == 0.0:
                return 0.0
            log_p += n_i * math.log(p_i) - special.gammaln(n_i + 1)
    if method == "gamma-sum":
        log_p += math.log(gamma_sum(n))
    else:
        log_p += special.gammaln(n + 1)
    return float(math.exp(log_p))


def detected_vacuum_probability(
    net: PreselectionNetwork, cutoff: int | None = None
) -> float:
    """Probability that all three detected modes are empty, summing the joint
    distribution over the loss modes up to ``cutoff`` total photons.

    This is the preselected vacuum rate; it exceeds the unconditional vacuum
    probability exactly when the loss arms carry weight.
    """
    if cutoff is None:
        cutoff = default_cutoff(net.mean)
    total = 0.0
    for n4 in range(cutoff + 1):
        for n5 in range(cutoff + 1 - n4):
            for n6 in range(cutoff + 1 - n4 - n5):
                total += preselection_distribution(
                    net, (0, 0, 0, n4, n5, n6), method="factored"
                )
    return total

"""Single-pixel imaging with photon-number detection and TV reconstruction.

A scene s0 (non-negative mean photons per pixel) is probed row by row with
binary masks Q; each projection illuminates a thermal mode of mean
n̄_t = Q_t·s0 that is split between two detectors (angle θ), each with
efficiency η and Poisson dark rate ν. The joint detected-count law is the
double finite sum

    p(n,m) = e^(−ν_a−ν_b)/(n! m!) Σ_i Σ_j C(n,i) C(m,j) (i+j)!
             η_a^i η_b^j ν_a^(n−i) ν_b^(m−j) cos^(2i)θ sin^(2j)θ
             · n̄_t^(i+j) / (1 + n̄_t(η_a cos²θ + η_b sin²θ))^(1+i+j),

written here in the rearranged form that stays finite as n̄_t → 0 (where it
reduces to a product of dark-count Poissonians). Post-selecting N-photon
events or conditioning arm a on an N-count in arm b boosts the signal against
the dark-count floor; measurement vectors y from any of the three modes feed
a total-variation-regularized least-squares reconstruction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import (
    AccuracyError,
    ContractError,
    DomainError,
    SaturationError,
)
from .montecarlo import (
    DetectorModel,
    RngSeed,
    SplitterNetwork,
    make_generator,
    sample_source,
    split_and_detect,
)
from .states import default_cutoff, thermal

__all__ = [
    "SensingScene",
    "SensingMatrix",
    "TwoArmDetection",
    "ReconstructionResult",
    "binary_phantom",
    "random_sensing_matrix",
    "scale_scene_to_projection",
    "joint_pmf_noisy",
    "arm_a_marginal",
    "snr_post",
    "snr_sub",
    "acquire",
    "tv_prox",
    "cs_reconstruct",
    "image_snr",
]


# ===================================================================
# Types
# ===================================================================

@dataclass(frozen=True)
class SensingScene:
    """Per-pixel mean-photon contributions on a width x height grid."""

    values: np.ndarray
    width: int
    height: int

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True).ravel()
        if self.width < 1 or self.height < 1:
            raise ContractError("scene dimensions must be positive")
        if arr.size != self.width * self.height:
            raise ContractError(
                f"{arr.size} pixel values for a {self.width}x{self.height} grid"
            )
        if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
            raise DomainError("pixel means must be finite and >= 0")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def as_image(self) -> np.ndarray:
        return self.values.reshape(self.height, self.width)


@dataclass(frozen=True)
class SensingMatrix:
    """Binary projection masks, one scene-sized row per measurement."""

    matrix: np.ndarray
    seed: RngSeed
    fill_fraction: float

    def __post_init__(self) -> None:
        arr = np.array(self.matrix, dtype=float, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ContractError("matrix must be a non-empty 2-D array")
        if not np.all((arr == 0.0) | (arr == 1.0)):
            raise DomainError("sensing matrix entries must be 0 or 1")
        if not (0.0 < self.fill_fraction < 1.0):
            raise DomainError(f"fill_fraction must lie in (0, 1), got {self.fill_fraction!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def n_measurements(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class TwoArmDetection:
    """Fiber-splitter angle plus the two detector models behind it."""

    theta_split: float
    det_a: DetectorModel
    det_b: DetectorModel

    def __post_init__(self) -> None:
        if not (0.0 <= self.theta_split <= math.pi / 2.0):
            raise DomainError(
                f"theta_split must lie in [0, pi/2], got {self.theta_split!r}"
            )

    @property
    def arm_fractions(self) -> tuple[float, float]:
        c2 = math.cos(self.theta_split) ** 2
        return c2, 1.0 - c2


@dataclass(frozen=True)
class ReconstructionResult:
    """Solver output; the objective trace must not increase once the first
    few iterations have settled (1e-9 slack, scaled problem)."""

    s_hat: np.ndarray
    iterations: int
    objective_trace: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        s = np.array(self.s_hat, dtype=float, copy=True)
        trace = np.array(self.objective_trace, dtype=float, copy=True)
        if s.ndim != 1 or trace.ndim != 1:
            raise ContractError("s_hat and objective_trace must be 1-D")
        if self.iterations < 0 or not math.isfinite(self.residual):
            raise ContractError("iterations must be >= 0 and residual finite")
        settled = trace[5:]
        if settled.size >= 2:
            rises = np.diff(settled)
            slack = 1e-9 * np.maximum(1.0, np.abs(settled[:-1]))
            if np.any(rises > slack):
                raise ContractError("objective trace increases after iteration 5")
        s.setflags(write=False)
        trace.setflags(write=False)
        object.__setattr__(self, "s_hat", s)
        object.__setattr__(self, "objective_trace", trace)


# ===================================================================
# Scene and mask construction
# ===================================================================

def binary_phantom(width: int = 32, height: int = 32) -> SensingScene:
    """Piecewise-constant test target: three axis-aligned blocks covering
    roughly a quarter of the frame."""
    if width < 8 or height < 8:
        raise DomainError("phantom needs at least an 8x8 grid")
    img = np.zeros((height, width))
    img[height // 5 : 2 * height // 5, width // 5 : 4 * width // 5] = 1.0
    img[3 * height // 5 : 4 * height // 5, width // 5 : 2 * width // 5] = 1.0
    img[3 * height // 5 : 4 * height // 5, width // 2 : 4 * width // 5] = 1.0
    return SensingScene(img.ravel(), width, height)


def random_sensing_matrix(
    n_measurements: int,
    n_pixels: int,
    fill_fraction: float = 0.5,
    seed: RngSeed | int = 0,
) -> SensingMatrix:
    """Independent Bernoulli(fill_fraction) masks from a seeded stream."""
    if n_measurements < 1 or n_pixels < 1:
        raise ContractError("matrix dimensions must be positive")
    if isinstance(seed, int):
        seed = RngSeed(seed)
    rng = make_generator(seed)
    masks = (rng.random((n_measurements, n_pixels)) < fill_fraction).astype(float)
    return SensingMatrix(masks, seed, fill_fraction)


def scale_scene_to_projection(
    scene: SensingScene, masks: SensingMatrix, target_mean: float
) -> SensingScene:
    """Rescale pixel means so the average projected intensity mean(Q·s0)
    equals ``target_mean``."""
    if target_mean < 0.0:
        raise DomainError("target_mean must be >= 0")
    current = float(np.mean(masks.matrix @ scene.values))
    if current == 0.0:
        raise DomainError("scene projects to zero through these masks")
    return SensingScene(
        scene.values * (target_mean / current), scene.width, scene.height
    )


# ===================================================================
# Joint detected-count law and SNR figures
# ===================================================================

def _log_factor(count: int, rate: float) -> np.ndarray:
    """log rate^(count−i) over i = 0..count, with 0^0 = 1 handled as 0."""
    i = np.arange(count + 1)
    if rate == 0.0:
        out = np.full(count + 1, -np.inf)
        out[count] = 0.0  # only the i = count term survives (rate^0)
        return out
    return (count - i) * math.log(rate)


def joint_pmf_noisy(n_t: float, arms: TwoArmDetection, n: int, m: int) -> float:
    """Probability of detecting (n, m) photons in arms (a, b) for one
    thermal projection of mean n̄_t behind the splitter and noisy detectors."""
    for label, c in (("n", n), ("m", m)):
        if not isinstance(c, (int, np.integer)) or c < 0:
            raise DomainError(f"{label} must be a non-negative integer, got {c!r}")
    if not (math.isfinite(n_t) and n_t >= 0.0):
        raise DomainError(f"n_t must be >= 0, got {n_t!r}")
    c2, s2 = arms.arm_fractions
    eta_a, nu_a = arms.det_a.efficiency, arms.det_a.dark_rate
    eta_b, nu_b = arms.det_b.efficiency, arms.det_b.dark_rate
    denom_rate = eta_a * c2 + eta_b * s2

    # Per-index signal factors (η cos²θ n̄_t)^i and (η sin²θ n̄_t)^j in logs;
    # a vanishing factor keeps only index 0.
    def signal_logs(count: int, strength: float) -> np.ndarray:
        idx = np.arange(count + 1)
        if strength == 0.0:
            out = np.full(count + 1, -np.inf)
            out[0] = 0.0
            return out
        return idx * math.log(strength)

    sig_a = signal_logs(n, eta_a * c2 * n_t)
    sig_b = signal_logs(m, eta_b * s2 * n_t)
    i = np.arange(n + 1)[:, None]
    j = np.arange(m + 1)[None, :]
    log_terms = (
        special.gammaln(n + 1)
        - special.gammaln(i + 1)
        - special.gammaln(n - i + 1)
        + special.gammaln(m + 1)
        - special.gammaln(j + 1)
        - special.gammaln(m - j + 1)
        + special.gammaln(i + j + 1)
        + sig_a[:, None]
        + sig_b[None, :]
        + _log_factor(n, nu_a)[:, None]
        + _log_factor(m, nu_b)[None, :]
        - (1.0 + i + j) * math.log1p(n_t * denom_rate)
    )
    log_p = (
        -nu_a
        - nu_b
        - special.gammaln(n + 1)
        - special.gammaln(m + 1)
        + special.logsumexp(log_terms)
    )
    return float(math.exp(log_p))


def arm_a_marginal(
    n_t: float, arms: TwoArmDetection, n: int, m_cutoff: int | None = None
) -> float:
    """Marginal probability of n counts in arm a, summing the joint law over
    the other arm's outcomes."""
    if m_cutoff is None:
        c2, s2 = arms.arm_fractions
        m_cutoff = default_cutoff(
            arms.det_b.efficiency * s2 * n_t + arms.det_b.dark_rate
        )
    return sum(joint_pmf_noisy(n_t, arms, n, m) for m in range(m_cutoff + 1))


def _poisson_pmf(rate: float, count: int) -> float:
    if rate == 0.0:
        return 1.0 if count == 0 else 0.0
    return float(math.exp(count * math.log(rate) - rate - special.gammaln(count + 1)))


def snr_post(n_t: float, arms: TwoArmDetection, big_n: int) -> float:
    """Post-selected signal-to-noise: probability of an N-count in arm a
    relative to the dark-count-only Poisson probability of the same count."""
    if not isinstance(big_n, (int, np.integer)) or big_n < 0:
        raise DomainError(f"N must be a non-negative integer, got {big_n!r}")
    noise = _poisson_pmf(arms.det_a.dark_rate, big_n)
    if noise == 0.0:
        raise SaturationError(
            "noise floor is zero (no dark counts); post-selected SNR saturates"
        )
    return arm_a_marginal(n_t, arms, big_n) / noise


def snr_sub(
    n_t: float, arms: TwoArmDetection, big_n: int, n_cutoff: int | None = None
) -> float:
    """Subtraction-mode signal-to-noise: conditional mean count in arm a
    given an N-count in arm b, relative to the noise-only conditional mean
    (which is just the dark rate, arms being independent without signal)."""
    if not isinstance(big_n, (int, np.integer)) or big_n < 0:
        raise DomainError(f"N must be a non-negative integer, got {big_n!r}")
    nu_a = arms.det_a.dark_rate
    if nu_a == 0.0:
        raise SaturationError(
            "noise-only conditional mean is zero; subtraction SNR saturates"
        )
    if n_cutoff is None:
        c2, _ = arms.arm_fractions
        n_cutoff = default_cutoff(arms.det_a.efficiency * c2 * n_t + nu_a)
    joint = np.array(
        [joint_pmf_noisy(n_t, arms, n, big_n) for n in range(n_cutoff + 1)]
    )
    weight = float(joint.sum())
    if weight <= 0.0:
        raise DomainError(f"conditioning on {big_n} counts in arm b has zero probability")
    conditional_mean = float(np.dot(np.arange(n_cutoff + 1), joint)) / weight
    return conditional_mean / nu_a


# ===================================================================
# Acquisition
# ===================================================================

_MODE_RE = re.compile(r"^(intensity|post\((\d+)\)|subtract\((\d+)\))$")


def _parse_mode(mode: str) -> tuple[str, int]:
    match = _MODE_RE.match(mode.strip())
    if match is None:
        raise DomainError(
            f"mode must be 'intensity', 'post(N)' or 'subtract(N)', got {mode!r}"
        )
    if match.group(2) is not None:
        return "post", int(match.group(2))
    if match.group(3) is not None:
        return "subtract", int(match.group(3))
    return "intensity", 0


def acquire(
    scene: SensingScene,
    masks: SensingMatrix,
    arms: TwoArmDetection,
    mode: str = "intensity",
    shots: int | None = None,
    seed: RngSeed | int = 0,
) -> np.ndarray:
    """Measurement vector y over all mask rows.

    With ``shots=None`` the exact (infinite-shot) statistics are returned:
    mean detected count in arm a (intensity), the probability of an N-count
    in arm a (post(N)), or the conditional mean of arm a given an N-count in
    arm b (subtract(N)). With finite ``shots`` each row is sampled through
    the Monte Carlo pipeline on its own RNG substream, reducing to the
    empirical counterpart of the same quantity.
    """
    if masks.n_pixels != scene.values.size:
        raise ContractError(
            f"masks cover {masks.n_pixels} pixels, scene has {scene.values.size}"
        )
    kind, big_n = _parse_mode(mode)
    projections = masks.matrix @ scene.values
    if isinstance(seed, int):
        seed = RngSeed(seed)

    y = np.empty(projections.size)
    if shots is None:
        c2, _ = arms.arm_fractions
        for t, n_t in enumerate(projections):
            n_t = float(n_t)
            if kind == "intensity":
                y[t] = arms.det_a.efficiency * c2 * n_t + arms.det_a.dark_rate
            elif kind == "post":
                y[t] = arm_a_marginal(n_t, arms, big_n)
            else:
                nu_a = arms.det_a.dark_rate
                n_cut = default_cutoff(arms.det_a.efficiency * c2 * n_t + nu_a)
                joint = np.array(
                    [joint_pmf_noisy(n_t, arms, n, big_n) for n in range(n_cut + 1)]
                )
                weight = float(joint.sum())
                if weight <= 0.0:
                    raise DomainError(
                        f"conditioning on {big_n} counts has zero probability at row {t}"
                    )
                y[t] = float(np.dot(np.arange(n_cut + 1), joint)) / weight
        return y

    if shots < 1:
        raise DomainError("shots must be >= 1")
    c2, s2 = arms.arm_fractions
    network = SplitterNetwork((c2, s2))
    detectors = (arms.det_a, arms.det_b)
    for t, n_t in enumerate(projections):
        source_seed = RngSeed(seed.seed, seed.stream_id + 2 * t)
        detect_seed = RngSeed(seed.seed, seed.stream_id + 2 * t + 1)
        counts = sample_source(thermal(float(n_t)), shots, source_seed)
        detected = split_and_detect(counts, network, detectors, detect_seed)
        arm_a, arm_b = detected[:, 0], detected[:, 1]
        if kind == "intensity":
            y[t] = float(arm_a.mean())
        elif kind == "post":
            y[t] = float(np.mean(arm_a == big_n))
        else:
            hits = arm_b == big_n
            if not np.any(hits):
                raise AccuracyError(
                    f"no {big_n}-count events in arm b at row {t}; increase shots"
                )
            y[t] = float(arm_a[hits].mean())
    return y


# ===================================================================
# Total-variation reconstruction
# ===================================================================

def _grad(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward differences with replicate boundary (last row/col slope 0)."""
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return gx, gy


def _grad_adjoint(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    out = np.zeros_like(gx)
    out[:, :-1] -= gx[:, :-1]
    out[:, 1:] += gx[:, :-1]
    out[:-1, :] -= gy[:-1, :]
    out[1:, :] += gy[:-1, :]
    return out


def _tv(u: np.ndarray) -> float:
    gx, gy = _grad(u)
    return float(np.abs(gx).sum() + np.abs(gy).sum())


def tv_prox(
    v: np.ndarray,
    weight: float,
    n_inner: int = 20,
    warm_dual: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """Approximate argmin_u weight·TV(u) + ½‖u−v‖² (anisotropic TV).

    Projected gradient ascent on the dual: with G the forward-difference
    operator, iterate p ← clamp(p + G(v − weight·Gᵀp)/(8·weight), [−1,1])
    and return u = v − weight·Gᵀp. The dual variables can be warm-started
    across outer iterations of a solver.
    """
    if weight < 0.0:
        raise DomainError("prox weight must be >= 0")
    if weight == 0.0:
        return v.copy(), (np.zeros_like(v), np.zeros_like(v))
    if warm_dual is None:
        px, py = np.zeros_like(v), np.zeros_like(v)
    else:
        px, py = warm_dual[0].copy(), warm_dual[1].copy()
    step = 1.0 / (8.0 * weight)
    for _ in range(n_inner):
        u = v - weight * _grad_adjoint(px, py)
        gx, gy = _grad(u)
        px = np.clip(px + step * gx, -1.0, 1.0)
        py = np.clip(py + step * gy, -1.0, 1.0)
    return v - weight * _grad_adjoint(px, py), (px, py)


def _spectral_norm_sq(q: np.ndarray, n_steps: int = 50) -> float:
    """λmax(QᵀQ) by plain power iteration from a deterministic start."""
    v = np.ones(q.shape[1]) / math.sqrt(q.shape[1])
    value = 1.0
    for _ in range(n_steps):
        w = q.T @ (q @ v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        value = norm
        v = w / norm
    return value


def cs_reconstruct(
    masks: SensingMatrix | np.ndarray,
    y: np.ndarray,
    mu: float = 10.0,
    max_iter: int = 2000,
    tol: float = 1e-9,
    nonneg: bool = True,
    shape: tuple[int, int] | None = None,
) -> ReconstructionResult:
    """Minimize TV(s) + (μ/2)‖Qs − y‖₂² by accelerated proximal gradient.

    The data term is smooth with Lipschitz constant L = μ·λmax(QᵀQ) (power
    iteration); each step takes a 1/L gradient move at the momentum point
    followed by the anisotropic TV proximal map (20 dual ascent sweeps,
    warm-started) and an optional projection onto s ≥ 0. The momentum
    sequence is the monotone FISTA variant: an extrapolated candidate is
    kept only if it does not increase the objective, so the recorded trace
    never rises. Plain gradient steps stall here because binary masks carry
    a dominant all-ones component (λmax far above the informative spectrum).
    Measurements are scaled to max 1 before solving and scaled back.
    """
    q = masks.matrix if isinstance(masks, SensingMatrix) else np.asarray(masks, float)
    y = np.asarray(y, dtype=float)
    if q.ndim != 2 or y.ndim != 1 or q.shape[0] != y.size:
        raise ContractError(
            f"incompatible shapes: Q is {q.shape}, y has {y.size} entries"
        )
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(y))):
        raise DomainError("Q and y must be finite")
    if mu <= 0.0 or tol < 0.0 or max_iter < 1:
        raise DomainError("need mu > 0, tol >= 0, max_iter >= 1")
    n_pixels = q.shape[1]
    if shape is None:
        side = math.isqrt(n_pixels)
        if side * side != n_pixels:
            raise ContractError(
                f"{n_pixels} pixels is not square; pass shape=(height, width)"
            )
        shape = (side, side)
    if shape[0] * shape[1] != n_pixels:
        raise ContractError(f"shape {shape} does not cover {n_pixels} pixels")

    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        zeros = np.zeros(n_pixels)
        return ReconstructionResult(zeros, 0, np.array([0.0]), float(np.linalg.norm(y)))
    y_scaled = y / scale

    lip = mu * _spectral_norm_sq(q)
    if lip == 0.0:
        raise DomainError("sensing matrix is identically zero")
    base_step = 1.0 / lip

    def objective(s_img: np.ndarray) -> float:
        resid = q @ s_img.ravel() - y_scaled
        return _tv(s_img) + 0.5 * mu * float(resid @ resid)

    s = np.zeros(shape)
    momentum = s
    dual = (np.zeros(shape), np.zeros(shape))
    t_k = 1.0
    trace = [objective(s)]
    iterations = 0
    stall = 0
    for _ in range(max_iter):
        gradient = (mu * (q.T @ (q @ momentum.ravel() - y_scaled))).reshape(shape)
        candidate, dual = tv_prox(momentum - base_step * gradient, base_step, warm_dual=dual)
        if nonneg:
            np.clip(candidate, 0.0, None, out=candidate)
        value = objective(candidate)
        previous = trace[-1]
        if value <= previous:  # monotone guard: extrapolation may overshoot
            s_next = candidate
            accepted_value = value
        else:
            s_next = s
            accepted_value = previous
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_k * t_k))
        momentum = s_next + (t_k / t_next) * (candidate - s_next) + (
            (t_k - 1.0) / t_next
        ) * (s_next - s)
        s, t_k = s_next, t_next
        iterations += 1
        trace.append(accepted_value)
        if abs(previous - accepted_value) <= tol * max(abs(previous), 1e-300):
            stall += 1
            if stall >= 5:  # momentum can pause progress for a step or two
                break
        else:
            stall = 0

    s_hat = s.ravel() * scale
    residual = float(np.linalg.norm(q @ s_hat - y))
    return ReconstructionResult(s_hat, iterations, np.asarray(trace), residual)


def image_snr(s_hat: np.ndarray, object_mask: np.ndarray) -> float:
    """Contrast ratio of a reconstruction: mean over object pixels divided by
    mean over background pixels, negatives clipped, capped at 1e6."""
    values = np.asarray(s_hat, dtype=float).ravel()
    mask = np.asarray(object_mask).ravel().astype(bool)
    if values.size != mask.size:
        raise ContractError("image and mask sizes differ")
    if not np.any(mask) or np.all(mask):
        raise DomainError("object mask must split pixels into two non-empty regions")
    clipped = np.clip(values, 0.0, None)
    signal = float(clipped[mask].mean())
    background = float(clipped[~mask].mean())
    if background == 0.0:
        return 1e6
    return min(signal / background, 1e6)

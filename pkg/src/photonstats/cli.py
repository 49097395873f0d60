"""Command-line front end: seeded, reproducible analysis runs.

Every subcommand resolves its parameters from defaults, an optional JSON
config file, and explicit flags (flags win), writes its numeric artifacts
as CSV/JSON/PGM into the output directory, and drops a manifest echoing the
fully resolved configuration so the run can be repeated byte for byte.
Floats are printed with 17 significant digits for exact round-trips.

Exit codes: 0 success, 2 configuration or domain error, 3 accuracy or
convergence failure. Diagnostics go to stderr; stdout carries one JSON line
summarizing the run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coherence import (
    InterferenceConfig,
    PreselectionNetwork,
    ThermalSplitterState,
    classical_envelope_oracle,
    conditional_g2_map,
    detected_vacuum_probability,
    gamma_sum,
    gtilde2_thermal,
    joint_pmf,
    mode_probabilities,
    modulation_frequency,
)
from .errors import AccuracyError, ConfigError, PhotonStatsError
from .imaging import (
    DetectorModel,
    SensingMatrix,
    TwoArmDetection,
    acquire,
    binary_phantom,
    cs_reconstruct,
    image_snr,
    joint_pmf_noisy,
    random_sensing_matrix,
    scale_scene_to_projection,
)
from .montecarlo import RngSeed
from .pgm import read_pgm, write_pgm
from .scatter import ScatterConfig, detected_pmf, g2_vs_angle, p_function_convolution_check
from .sensing import (
    PUBLISHED_SUBTRACTION_TABLE,
    conditional_mean,
    phase_uncertainty,
    preset,
    snr,
    subtraction_success_probability,
)
from .states import format_float, g2_from_pmf, pmf, thermal, write_csv

__all__ = ["main"]


# ===================================================================
# Config plumbing
# ===================================================================

def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _resolve(args: argparse.Namespace, parser_keys: set[str]) -> dict:
    """Merge defaults, config file, and explicit flags into one parameter map."""
    config = _load_config(args.config)
    unknown = set(config) - parser_keys
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    resolved = {}
    for key in parser_keys:
        if key in args.explicit:
            resolved[key] = getattr(args, key)
        elif key in config:
            resolved[key] = config[key]
        else:
            resolved[key] = getattr(args, key)
    return resolved


class _TrackingParser(argparse.ArgumentParser):
    """Records which destinations were set on the command line, so flag
    overrides can be distinguished from argparse defaults."""

    def parse_args(self, argv=None, namespace=None):  # type: ignore[override]
        ns = super().parse_args(argv, namespace)
        explicit = set()
        tokens = list(argv if argv is not None else sys.argv[1:])
        for action in getattr(ns, "_actions_ref", []):
            for opt in action.option_strings:
                if any(t == opt or t.startswith(opt + "=") for t in tokens):
                    explicit.add(action.dest)
        ns.explicit = explicit
        return ns


def _jsonify(value):
    if isinstance(value, float):
        return float(format_float(value))
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonify(v) for k, v in value.items()}
    if isinstance(value, (np.floating,)):
        return float(format_float(float(value)))
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _write_manifest(out_dir: Path, name: str, params: dict, artifacts: list[str]) -> Path:
    manifest = {
        "subcommand": name,
        "config": _jsonify(params),
        "artifacts": sorted(artifacts),
        "version": __version__,
    }
    path = out_dir / f"{name}-manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def _write_rows(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(_jsonify(summary), sort_keys=True) + "\n")


# ===================================================================
# Subcommands
# ===================================================================

def _cmd_g2_scan(params: dict, out: Path) -> dict:
    n_s = float(params["n_s"])
    if params["n_pl"] is not None:
        n_pl = float(params["n_pl"])
    else:
        ratio = float(params["n_pl_ratio"])
        if ratio <= 0.0:
            raise ConfigError("n_pl_ratio must be > 0")
        n_pl = n_s / ratio
    grid = np.linspace(float(params["theta_start"]), float(params["theta_stop"]), int(params["theta_count"]))
    curve = g2_vs_angle(n_s, n_pl, grid)
    path = out / "g2-scan.csv"
    _write_rows(path, "theta_deg,g2", [(float(t), float(g)) for t, g in curve])
    return {"artifacts": [path.name], "n_pl": n_pl, "g2_min": float(curve[:, 1].min())}


def _cmd_scatter(params: dict, out: Path) -> dict:
    cfg = ScatterConfig(float(params["n_s"]), float(params["n_pl"]), float(params["theta_deg"]))
    dist = detected_pmf(cfg, tail_target=float(params["tail_target"]))
    path = out / "scatter-pmf.csv"
    write_csv(dist, str(path))
    return {"artifacts": [path.name], "g2": g2_from_pmf(dist), "n_max": dist.n_max}


def _cmd_coherence_map(params: dict, out: Path) -> dict:
    cfg = InterferenceConfig(
        mean_h=float(params["mean_h"]),
        mean_v=float(params["mean_v"]),
        psi=float(params["psi"]),
        zeta=float(params["zeta"]),
    )
    state = ThermalSplitterState(float(params["mean"]), float(params["split_angle"]))
    half = 2.0 * math.pi / cfg.beta
    grid = np.linspace(-half, half, int(params["k_count"]))
    n1, n2 = int(params["n1"]), int(params["n2"])
    rows = []
    for k1 in grid:
        for k2 in grid:
            rows.append((float(k1), float(k2), conditional_g2_map(cfg, state, n1, n2, float(k1), float(k2))))
    path = out / "coherence-map.csv"
    _write_rows(path, "k1,k2,g2", rows)
    return {"artifacts": [path.name], "conditioned_on": [n1, n2], "k_span": 2.0 * half}


def _cmd_gtilde_table(params: dict, out: Path) -> dict:
    state = ThermalSplitterState(float(params["mean"]), float(params["split_angle"]))
    n_top = int(params["n_max"])
    rows = []
    for big_n in range(n_top + 1):
        for big_m in range(n_top + 1):
            rows.append((big_n, big_m, gtilde2_thermal(state, big_n, big_m)))
    path = out / "gtilde-table.csv"
    _write_rows(path, "N,M,gtilde2", rows)
    diag = gtilde2_thermal(state, n_top, n_top)
    return {"artifacts": [path.name], "diagonal_max": diag}


def _cmd_envelope_oracle(params: dict, out: Path) -> dict:
    cfg = InterferenceConfig(
        mean_h=float(params["mean_h"]),
        mean_v=float(params["mean_v"]),
        psi=float(params["psi"]),
    )
    scale = float(params["coherence_scale"])
    if scale <= 0.0:
        scale = (cfg.slit_width / 8.0) ** 2
    period = math.pi / cfg.beta
    dks = np.linspace(0.0, float(params["periods"]) * period, int(params["dk_count"]))
    g2 = np.array([classical_envelope_oracle(cfg, scale, -dk / 2.0, dk / 2.0) for dk in dks])
    path = out / "envelope-oracle.csv"
    _write_rows(path, "dk,g2", [(float(a), float(b)) for a, b in zip(dks, g2)])
    omega = modulation_frequency(dks, g2)
    return {
        "artifacts": [path.name],
        "fringe_frequency": omega,
        "expected_frequency": 2.0 * cfg.beta,
        "relative_error": abs(omega / 2.0 - cfg.beta) / cfg.beta,
    }


def _cmd_preselect(params: dict, out: Path) -> dict:
    angles = tuple(float(a) for a in params["angles"])
    net = PreselectionNetwork(angles, float(params["mean"]))
    probs = mode_probabilities(net)
    path = out / "preselect-modes.csv"
    _write_rows(path, "mode,probability", [(i + 1, float(p)) for i, p in enumerate(probs)])
    vac = detected_vacuum_probability(net)
    return {
        "artifacts": [path.name],
        "vacuum_detected": vac,
        "vacuum_unconditional": 1.0 / (1.0 + net.mean),
        "loss_mass": float(sum(probs[3:])),
    }


def _cmd_sensing_snr(params: dict, out: Path) -> dict:
    cfg = preset(params["preset"], mean=float(params["mean"])) if params["mean"] is not None else preset(params["preset"])
    count = int(params["phi_count"])
    phis = np.linspace(math.pi / 16.0, 15.0 * math.pi / 16.0, count)
    rows = []
    for phi in phis:
        for level in range(4):
            rows.append(
                (
                    float(phi),
                    level,
                    snr(cfg, level, phase=float(phi)),
                    phase_uncertainty(cfg, level, phase=float(phi)),
                )
            )
    path = out / "sensing-snr.csv"
    _write_rows(path, "phi,L,snr,delta_phi", rows)
    return {"artifacts": [path.name], "levels": 4, "phi_count": count}


def _cmd_subtract_table(params: dict, out: Path) -> dict:
    phase = float(params["phase"])
    rows = []
    worst = 0.0
    for mean, published_row in PUBLISHED_SUBTRACTION_TABLE.items():
        cfg = preset(params["preset"], mean=mean, phase=phase)
        for level, published in zip((1, 2, 3), published_row):
            prob = subtraction_success_probability(cfg, level)
            rel = abs(prob - published) / published
            worst = max(worst, rel)
            rows.append((float(mean), level, prob, published, rel))
    path = out / "subtract-table.csv"
    _write_rows(path, "mean,level,probability,published,rel_err_vs_paper", rows)
    return {"artifacts": [path.name], "worst_rel_err": worst}


def _cmd_image_sim(params: dict, out: Path) -> dict:
    seed = RngSeed(int(params["seed"]))
    scene = binary_phantom(int(params["width"]), int(params["height"]))
    masks = random_sensing_matrix(
        int(params["measurements"]),
        scene.values.size,
        float(params["fill"]),
        seed,
    )
    scene = scale_scene_to_projection(scene, masks, float(params["projection_mean"]))
    arms = TwoArmDetection(
        float(params["split_angle"]),
        DetectorModel(float(params["efficiency"]), float(params["dark_rate"])),
        DetectorModel(float(params["efficiency"]), float(params["dark_rate"])),
    )
    shots = None if int(params["shots"]) == 0 else int(params["shots"])
    y = acquire(scene, masks, arms, params["mode"], shots=shots, seed=RngSeed(seed.seed, 1))

    img = scene.as_image()
    top = float(img.max())
    scaled = np.zeros_like(img, dtype=np.uint8) if top == 0.0 else np.round(img / top * 255.0).astype(np.uint8)
    scene_path = out / "image-sim-scene.pgm"
    write_pgm(scene_path, scaled)
    masks_path = out / "image-sim-masks.csv"
    _write_rows(masks_path, ",".join(f"p{i}" for i in range(masks.n_pixels)),
                [tuple(int(v) for v in row) for row in masks.matrix])
    y_path = out / "image-sim-measurements.csv"
    _write_rows(y_path, "y", [(float(v),) for v in y])
    return {
        "artifacts": [scene_path.name, masks_path.name, y_path.name],
        "mode": params["mode"],
        "rows": masks.n_measurements,
    }


def _cmd_reconstruct(params: dict, out: Path) -> dict:
    y_path = Path(params["input"])
    masks_path = Path(params["masks"])
    for p in (y_path, masks_path):
        if not p.is_file():
            raise ConfigError(f"input file not found: {p}")
    y = np.loadtxt(y_path, delimiter=",", skiprows=1, ndmin=1)
    matrix = np.loadtxt(masks_path, delimiter=",", skiprows=1, ndmin=2)
    masks = SensingMatrix(matrix, RngSeed(0), 0.5)
    width, height = int(params["width"]), int(params["height"])
    result = cs_reconstruct(
        masks,
        y,
        mu=float(params["mu"]),
        max_iter=int(params["max_iter"]),
        tol=float(params["tol"]),
        nonneg=bool(params["nonneg"]),
        shape=(height, width),
    )
    img = result.s_hat.reshape(height, width)
    top = float(img.max())
    scaled = np.zeros_like(img, dtype=np.uint8) if top <= 0.0 else np.round(np.clip(img, 0.0, None) / top * 255.0).astype(np.uint8)
    img_path = out / "reconstruct.pgm"
    write_pgm(img_path, scaled)
    trace_path = out / "reconstruct-trace.csv"
    _write_rows(trace_path, "iteration,objective", [(i, float(v)) for i, v in enumerate(result.objective_trace)])
    return {
        "artifacts": [img_path.name, trace_path.name],
        "iterations": result.iterations,
        "residual": result.residual,
    }


def _cmd_oracle_check(params: dict, out: Path) -> dict:
    checks: list[tuple[str, bool, float]] = []

    dist = p_function_convolution_check(0.7, 1.4)
    ref = pmf(thermal(2.1), cutoff=dist.n_max)
    err = float(np.max(np.abs(dist.probs - ref.probs)))
    checks.append(("p_function_vs_thermal", err <= 1e-12, err))

    cfg = ScatterConfig(1.0, 1.0 / 3.0, 45.0)
    d = detected_pmf(cfg)
    a, b = cfg.mode_means
    from .states import convolve

    conv = convolve(pmf(thermal(a), cutoff=d.n_max), pmf(thermal(b), cutoff=d.n_max))
    err = float(np.max(np.abs(d.probs - conv.probs[: d.n_max + 1])))
    checks.append(("scatter_vs_convolution", err <= 1e-12, err))

    err = max(abs(gamma_sum(n) / math.factorial(n) - 1.0) for n in range(21))
    checks.append(("gamma_sum_identity", err <= 1e-9, err))

    st = ThermalSplitterState(1.0, math.pi / 4.0)
    total = sum(joint_pmf(st, n, m) for n in range(60) for m in range(60))
    err = abs(total - 1.0)
    checks.append(("joint_pmf_normalization", err <= 1e-8, err))

    arms = TwoArmDetection(math.pi / 4.0, DetectorModel(0.55, 0.3), DetectorModel(0.55, 0.3))
    total = sum(joint_pmf_noisy(0.8, arms, n, m) for n in range(25) for m in range(25))
    err = abs(total - 1.0)
    checks.append(("noisy_joint_normalization", err <= 1e-8, err))

    path = out / "oracle-check.csv"
    _write_rows(path, "check,passed,error", [(name, int(ok), float(e)) for name, ok, e in checks])
    if not all(ok for _, ok, _ in checks):
        failed = [name for name, ok, _ in checks if not ok]
        raise AccuracyError(f"oracle checks failed: {failed}")
    return {"artifacts": [path.name], "checks": len(checks), "all_passed": True}


# ===================================================================
# Parser assembly
# ===================================================================

_HANDLERS = {
    "g2-scan": _cmd_g2_scan,
    "scatter": _cmd_scatter,
    "coherence-map": _cmd_coherence_map,
    "gtilde-table": _cmd_gtilde_table,
    "envelope-oracle": _cmd_envelope_oracle,
    "preselect": _cmd_preselect,
    "sensing-snr": _cmd_sensing_snr,
    "subtract-table": _cmd_subtract_table,
    "image-sim": _cmd_image_sim,
    "reconstruct": _cmd_reconstruct,
    "oracle-check": _cmd_oracle_check,
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="JSON file with parameter overrides")
    sub.add_argument("--seed", type=int, default=0, help="base RNG seed (u64)")
    sub.add_argument("--out", default=".", help="output directory for artifacts")
    sub.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto")
    sub.add_argument("--format", choices=("csv", "json"), default="csv", help="tabular output format")


def _build_parser() -> argparse.ArgumentParser:
    parser = _TrackingParser(prog="photonstats", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"photonstats {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("g2-scan", help="g2 of the mixed field versus polarization angle")
    p.add_argument("--n-s", dest="n_s", type=float, default=1.0)
    p.add_argument("--n-pl", dest="n_pl", type=float, default=None)
    p.add_argument("--n-pl-ratio", dest="n_pl_ratio", type=float, default=3.0)
    p.add_argument("--theta-start", dest="theta_start", type=float, default=0.0)
    p.add_argument("--theta-stop", dest="theta_stop", type=float, default=90.0)
    p.add_argument("--theta-count", dest="theta_count", type=int, default=91)

    p = subs.add_parser("scatter", help="detected photon-number distribution")
    p.add_argument("--n-s", dest="n_s", type=float, default=1.0)
    p.add_argument("--n-pl", dest="n_pl", type=float, default=1.0 / 3.0)
    p.add_argument("--theta-deg", dest="theta_deg", type=float, default=45.0)
    p.add_argument("--tail-target", dest="tail_target", type=float, default=1e-10)

    p = subs.add_parser("coherence-map", help="conditional spatial correlation map")
    p.add_argument("--mean", type=float, default=1.0)
    p.add_argument("--split-angle", dest="split_angle", type=float, default=math.pi / 4.0)
    p.add_argument("--mean-h", dest="mean_h", type=float, default=0.5)
    p.add_argument("--mean-v", dest="mean_v", type=float, default=0.5)
    p.add_argument("--psi", type=float, default=math.pi / 4.0)
    p.add_argument("--zeta", type=float, default=0.9)
    p.add_argument("--n1", type=int, default=1)
    p.add_argument("--n2", type=int, default=1)
    p.add_argument("--k-count", dest="k_count", type=int, default=33)

    p = subs.add_parser("gtilde-table", help="wavepacket correlation table")
    p.add_argument("--mean", type=float, default=1.0)
    p.add_argument("--split-angle", dest="split_angle", type=float, default=math.pi / 4.0)
    p.add_argument("--n-max", dest="n_max", type=int, default=5)

    p = subs.add_parser("envelope-oracle", help="classical-field fringe oracle")
    p.add_argument("--mean-h", dest="mean_h", type=float, default=1.0)
    p.add_argument("--mean-v", dest="mean_v", type=float, default=0.5)
    p.add_argument("--psi", type=float, default=math.pi / 4.0)
    p.add_argument("--coherence-scale", dest="coherence_scale", type=float, default=0.0,
                   help="squared coherence length; 0 picks (slit width / 8)^2")
    p.add_argument("--periods", type=float, default=4.0)
    p.add_argument("--dk-count", dest="dk_count", type=int, default=129)

    p = subs.add_parser("preselect", help="five-splitter vacuum preselection")
    p.add_argument("--angles", type=float, nargs=5, default=(0.3, 0.7, 0.4, 0.6, 0.5))
    p.add_argument("--mean", type=float, default=1.2)

    p = subs.add_parser("sensing-snr", help="phase-sensing SNR and uncertainty table")
    p.add_argument("--preset", default="thesis-ch5")
    p.add_argument("--mean", type=float, default=None)
    p.add_argument("--phi-count", dest="phi_count", type=int, default=15)

    p = subs.add_parser("subtract-table", help="subtraction success probabilities vs published values")
    p.add_argument("--preset", default="thesis-ch5")
    p.add_argument("--phase", type=float, default=math.pi)

    p = subs.add_parser("image-sim", help="simulate single-pixel acquisition of a phantom")
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--measurements", type=int, default=256)
    p.add_argument("--fill", type=float, default=0.5)
    p.add_argument("--projection-mean", dest="projection_mean", type=float, default=0.8)
    p.add_argument("--split-angle", dest="split_angle", type=float, default=math.pi / 4.0)
    p.add_argument("--efficiency", type=float, default=0.55)
    p.add_argument("--dark-rate", dest="dark_rate", type=float, default=0.8)
    p.add_argument("--mode", default="intensity")
    p.add_argument("--shots", type=int, default=20000, help="0 = exact statistics")

    p = subs.add_parser("reconstruct", help="TV-regularized reconstruction from measurements")
    p.add_argument("--input", required=True, help="measurement CSV (one y column)")
    p.add_argument("--masks", default="image-sim-masks.csv", help="sensing-matrix CSV of 0/1")
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--mu", type=float, default=100.0)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--nonneg", type=int, default=1)

    p = subs.add_parser("oracle-check", help="fast dual-route self checks")

    for name, sub in subs.choices.items():
        _add_common(sub)
        sub.set_defaults(_handler=_HANDLERS[name])
    return parser


_GLOBAL_KEYS = {"config", "seed", "out", "threads", "format", "subcommand", "explicit", "_handler", "_actions_ref"}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    # expose per-subparser actions for explicit-flag tracking
    for sub in parser._subparsers._group_actions[0].choices.values():  # type: ignore[union-attr]
        sub.set_defaults(_actions_ref=sub._actions)
    try:
        args = parser.parse_args(argv)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        keys = {
            a.dest
            for a in args._actions_ref
            if a.dest not in _GLOBAL_KEYS and hasattr(args, a.dest)
        }
        params = _resolve(args, keys)
        params["seed"] = args.seed
        summary = args._handler(params, out_dir)
        artifacts = summary.pop("artifacts", [])
        manifest = _write_manifest(
            out_dir,
            args.subcommand,
            {**params, "threads": args.threads, "format": args.format},
            artifacts,
        )
        _emit(
            {
                "subcommand": args.subcommand,
                "artifacts": artifacts + [manifest.name],
                "out": str(out_dir),
                **summary,
            }
        )
        return 0
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return 3
    except PhotonStatsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

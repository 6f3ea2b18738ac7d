"""Command-line entry points.

All subcommand options can also come from a JSON config file given with
--config; explicit flags override file values. Exit codes: 0 success,
1 validation/check failures, 2 usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from .core import Shape, Texture, VibrationLevel, VirtualObject
from .evaluation import (DEFAULT_TARGET_POSES, FlightCriteria, GeneralizationAxis,
                         aggregate_confusion, load_confusion_json,
                         run_flight_suite, run_generalization)
from .linkage import render_pattern
from .loop import run_closed_loop
from .policy import OraclePolicy, PolicyInterface, RemotePolicy, ZeroPolicy
from .world import SceneConfig, SimConfig, scene_from_json, spawn

USAGE_ERROR = 2
CHECK_FAILED = 1


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if not isinstance(payload, dict):
        raise ValueError("config file must contain a JSON object")
    return payload


def _resolve(args: argparse.Namespace, config: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _build_policy(spec: str) -> PolicyInterface:
    if spec == "oracle":
        return OraclePolicy()
    if spec == "zero":
        return ZeroPolicy()
    if spec.startswith("remote:"):
        client = RemotePolicy(spec.split(":", 1)[1])
        client.check_health()
        return client
    raise ValueError(f"unknown policy {spec!r}; use oracle, zero, or remote:URL")


def _default_scene() -> SceneConfig:
    return SceneConfig(
        drone_start=(0.0, 0.0, 1.0),
        objects=(VirtualObject(Shape.SPHERE, Texture.PLASTIC, (1.0, -1.0, 1.0), 0.2),),
    )


def _print_metrics(label: str, m) -> None:
    def fmt(x, unit=""):
        return "n/a" if x is None else f"{x:.3g}{unit}"

    print(f"{label}: {m.n_success}/{m.n} success ({100 * m.success_rate:.1f}%), "
          f"{m.n_partial} partial, {m.n_fail} fail")
    print(f"  reach time mean/min/max: {fmt(m.reach_time_mean, ' s')} / "
          f"{fmt(m.reach_time_min, ' s')} / {fmt(m.reach_time_max, ' s')}")
    if m.pose_error_mean is not None:
        print(f"  hover pose error: {m.pose_error_mean:.3f} m "
              f"+/- {m.pose_error_se:.3f} m (standard error)")


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    seed = int(_resolve(args, config, "seed", 0))
    instruction = _resolve(args, config, "instruction", "fly to the sphere")
    policy_spec = _resolve(args, config, "policy", "oracle")
    scene_path = _resolve(args, config, "scene", None)
    serve_addr = _resolve(args, config, "serve", None)
    headless = bool(_resolve(args, config, "headless", False))
    cfg = SimConfig(seed=seed)
    scene = scene_from_json(json.loads(Path(scene_path).read_text(encoding="utf-8"))) \
        if scene_path else _default_scene()
    policy = _build_policy(policy_spec)
    criteria = FlightCriteria()
    if serve_addr:
        from .loop import StopRule
        from .simservice import SimSession, serve_sim
        session = SimSession(scene, cfg, policy, instruction,
                             stop=criteria.stop_rule(), live=not headless)
        print(f"serving sim on http://{serve_addr} (ws: /ws, frames: /frame/real|vr)")
        serve_sim(serve_addr, session)
        return 0
    world = spawn(scene, cfg)
    result = run_closed_loop(world, policy, instruction, cfg,
                             stop=criteria.stop_rule(), live=not headless)
    status = result.status
    print(f"{result.n_ticks} ticks, sim time {result.trajectory.times[-1]:.1f} s, "
          f"stop: {status.stop_reason}")
    if status.reached:
        print(f"reached target at t={status.reach_time:.1f} s; "
              f"hover span {status.hover_span:.1f} s; success={status.success}")
    else:
        print("target never reached")
    return 0


def cmd_record_dataset(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    out = _resolve(args, config, "out", None)
    if not out:
        raise SystemExit("record-dataset requires --out DIR")
    seed = int(_resolve(args, config, "seed", 0))
    manifest = ds.generate_dataset(Path(out), seed)
    print(f"generated {manifest['episode_count']} episodes, "
          f"{manifest['total_steps']} steps, base seed {manifest['base_seed']}")
    if manifest["failures"]:
        print(f"{len(manifest['failures'])} episodes failed; see dataset_info.json")
        return CHECK_FAILED
    return 0


def cmd_validate_dataset(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    root = _resolve(args, config, "dir", None)
    if not root:
        raise SystemExit("validate-dataset requires --dir DIR")
    report = ds.validate_dataset(Path(root))
    print(f"checked {report.episodes_checked} episodes: "
          f"{len(report.violations)} violations")
    for episode_id, step, message in report.violations[:50]:
        where = f" step {step}" if step is not None else ""
        print(f"  {episode_id}{where}: {message}")
    if len(report.violations) > 50:
        print(f"  ... and {len(report.violations) - 50} more")
    return 0 if report.ok else CHECK_FAILED


def cmd_serve_policy(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    policy_spec = _resolve(args, config, "policy", "oracle")
    bind = _resolve(args, config, "bind", "127.0.0.1:8300")
    if policy_spec not in ("oracle", "zero"):
        raise SystemExit(f"serve-policy supports oracle or zero, got {policy_spec!r}")
    from .server import serve_policy
    policy = _build_policy(policy_spec)
    server = serve_policy(policy, bind)
    print(f"serving {policy_spec} policy on {server.url} (POST /act, GET /health)")
    try:
        server._thread.join()
    except KeyboardInterrupt:
        server.stop()
    return 0


def _write_flight_report(report, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "criteria": {
            "success_radius": report.criteria.success_radius,
            "hover_duration": report.criteria.hover_duration,
            "timeout": report.criteria.timeout,
        },
        "overall": report.overall.__dict__,
        "per_pose": [m.__dict__ for m in report.per_pose],
        "reference": report.reference,
    }
    (out_dir / "flight_report.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    with open(out_dir / "flight_summary.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["pose", "n", "success", "partial", "fail", "success_rate",
                         "reach_mean_s", "reach_min_s", "reach_max_s",
                         "pose_error_mean_m", "pose_error_se_m"])
        for i, m in enumerate(report.per_pose):
            writer.writerow([i, m.n, m.n_success, m.n_partial, m.n_fail,
                             m.success_rate, m.reach_time_mean, m.reach_time_min,
                             m.reach_time_max, m.pose_error_mean, m.pose_error_se])
    with open(out_dir / "trajectories.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "x", "y", "outcome"])
        writer.writerows(report.plot_rows())


def cmd_eval_flight(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    trials = _resolve(args, config, "trials", None)
    if trials is None:
        raise SystemExit("eval-flight requires --trials N")
    trials = int(trials)
    if trials < 1:
        raise SystemExit("--trials must be >= 1")
    policy = _build_policy(_resolve(args, config, "policy", "oracle"))
    seed = int(_resolve(args, config, "seed", 0))
    out = _resolve(args, config, "out", None)
    cfg = SimConfig(seed=seed)
    report = run_flight_suite(policy, DEFAULT_TARGET_POSES, trials, cfg, seed=seed)
    for i, m in enumerate(report.per_pose):
        _print_metrics(f"pose {DEFAULT_TARGET_POSES[i][:2]}", m)
    _print_metrics("overall", report.overall)
    print("reference (learned-model system): "
          + ", ".join(f"{k}={v}" for k, v in report.reference.items()))
    if out:
        _write_flight_report(report, Path(out))
        print(f"report written to {out}")
    return 0


def cmd_eval_generalization(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    trials = _resolve(args, config, "trials", None)
    if trials is None:
        raise SystemExit("eval-generalization requires --trials N")
    trials = int(trials)
    if trials < 1:
        raise SystemExit("--trials must be >= 1")
    axes_arg = _resolve(args, config, "axes", "visual,motion,physical,semantic")
    try:
        axes = [GeneralizationAxis(a.strip()) for a in axes_arg.split(",") if a.strip()]
    except ValueError as exc:
        raise SystemExit(f"bad --axes: {exc}")
    policy = _build_policy(_resolve(args, config, "policy", "oracle"))
    seed = int(_resolve(args, config, "seed", 0))
    report = run_generalization(policy, axes, trials, SimConfig(seed=seed), seed=seed)
    for axis in axes:
        rate = report.rates[axis.value]
        succ, total = report.counts[axis.value]
        ref = report.reference[axis.value]
        print(f"{axis.value}: {succ}/{total} success ({100 * rate:.1f}%); "
              f"reference {100 * ref:.1f}%")
    return 0


def cmd_analyze_confusion(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    matrix_path = _resolve(args, config, "matrix", None)
    if not matrix_path:
        raise SystemExit("analyze-confusion requires --matrix FILE")
    payload = json.loads(Path(matrix_path).read_text(encoding="utf-8"))
    matrix = load_confusion_json(payload)
    agg = aggregate_confusion(matrix)

    def show(name, m):
        print(f"{name} (rows actual, cols predicted) labels={list(m.labels)}")
        for row in np.asarray(m.values):
            print("  " + "  ".join(f"{v:0.2f}" for v in row))

    show("shape matrix", agg.shape_matrix)
    show("vibration matrix", agg.vibration_matrix)
    print(f"shape diagonal: "
          + ", ".join(f"{v:0.2f}" for v in np.diag(agg.shape_matrix.values)))
    print(f"vibration diagonal: "
          + ", ".join(f"{v:0.2f}" for v in np.diag(agg.vibration_matrix.values)))
    print(f"diagonal means: full={agg.full_diagonal_mean:.3f} "
          f"shape={agg.shape_diagonal_mean:.3f} "
          f"vibration={agg.vibration_diagonal_mean:.3f}")
    return 0


def cmd_render_pattern(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    shape_name = _resolve(args, config, "shape", None)
    vibration_name = _resolve(args, config, "vibration", None)
    out = _resolve(args, config, "out", None)
    if not shape_name or not vibration_name or not out:
        raise SystemExit("render-pattern requires --shape, --vibration and --out")
    try:
        shape = Shape.from_name(shape_name)
        vibration = VibrationLevel.from_name(vibration_name)
    except ValueError as exc:
        raise SystemExit(str(exc))
    series = render_pattern(shape, vibration)
    with open(out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "ext_left", "ext_mid", "ext_right"])
        for i, row in enumerate(series):
            writer.writerow([i / 100.0, *(f"{v:.6f}" for v in row)])
    print(f"wrote {len(series)} samples to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapticflight",
        description="Deterministic aerial-haptics simulator and evaluation harness")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.set_defaults(fn=fn)
        return p

    p = add("simulate", cmd_simulate, help="run one closed-loop flight")
    p.add_argument("--scene", help="scene JSON file")
    p.add_argument("--instruction", help="natural-language command")
    p.add_argument("--policy", help="oracle | zero | remote:URL")
    p.add_argument("--seed", type=int)
    p.add_argument("--headless", action="store_const", const=True,
                   help="run unpaced (wall clock does not gate ticks)")
    p.add_argument("--serve", metavar="ADDR",
                   help="host:port; expose the live sim service instead of exiting")

    p = add("record-dataset", cmd_record_dataset, help="generate the full episode dataset")
    p.add_argument("--out", help="output directory (must be empty)")
    p.add_argument("--seed", type=int)

    p = add("validate-dataset", cmd_validate_dataset, help="check a dataset tree")
    p.add_argument("--dir", help="dataset root directory")

    p = add("serve-policy", cmd_serve_policy, help="serve a policy over HTTP")
    p.add_argument("--policy", help="oracle | zero")
    p.add_argument("--bind", help="host:port (default 127.0.0.1:8300)")

    p = add("eval-flight", cmd_eval_flight, help="run the flight evaluation suite")
    p.add_argument("--trials", type=int, help="trials per target pose")
    p.add_argument("--policy", help="oracle | zero | remote:URL")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="directory for JSON/CSV reports")

    p = add("eval-generalization", cmd_eval_generalization,
            help="run the perturbation-axis suite")
    p.add_argument("--axes", help="comma list: visual,motion,physical,semantic")
    p.add_argument("--trials", type=int, help="trials per axis")
    p.add_argument("--policy", help="oracle | zero | remote:URL")
    p.add_argument("--seed", type=int)

    p = add("analyze-confusion", cmd_analyze_confusion,
            help="aggregate a 9x9 pattern confusion matrix")
    p.add_argument("--matrix", help="JSON file with labels and rows")

    p = add("render-pattern", cmd_render_pattern,
            help="render one tactile pattern to CSV")
    p.add_argument("--shape", help="cube | sphere | cone")
    p.add_argument("--vibration", help="high | low | null")
    p.add_argument("--out", help="CSV output path")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit as exc:
        # A SystemExit with a message is a usage error.
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return USAGE_ERROR
        raise
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())

"""Command surface: train, eval, rollout, plot.

Exit codes are a stable scripting contract: 0 success, 1 runtime failure,
2 usage/config error (argparse uses 2 for bad flags on its own). Results
land in data files and on stdout; timestamped diagnostics go only to
<out>/run.log and stderr, never into data files.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .ddpg import DdpgAgent
from .env import CrossingEnv
from .harness import (RunSpec, fmt_float, moving_average, recall_eval,
                      recall_start, run_policy_episode,
                      run_socialforce_episode, train_multi, train_run,
                      write_recall_csv)
from .nn.checkpoint import CheckpointError
from .reward import RewardDesign
from .runconfig import ConfigError, build_runspec, default_config, load_config_file
from .socialforce import SocialForceParams
from . import svgplot

log = logging.getLogger("advped.cli")

METRICS_HEADER = ["episode", "reward", "steps", "collided",
                  "momentum_2d", "momentum_1d", "sigma"]
CURVES_HEADER = ["episode", "mean", "ci_lo", "ci_hi"]
RECALL_HEADER = ["start_x", "start_y", "collided",
                 "momentum_2d", "momentum_1d", "steps"]
TRAJECTORY_HEADER = ["t", "x_ped", "y_ped", "x_veh", "y_veh", "v_ped",
                     "v_veh", "theta_ped", "reward", "braking"]


def _setup_logging(out_dir=None) -> None:
    level_name = os.environ.get("ADVPED_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    root = logging.getLogger("advped")
    root.setLevel(logging.DEBUG)
    for h in list(root.handlers):
        root.removeHandler(h)
        h.close()
    stream = logging.StreamHandler(sys.stderr)
    stream.setLevel(level)
    stream.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(stream)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        fh = logging.FileHandler(out_dir / "run.log", encoding="utf-8")
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(logging.Formatter(
            "%(asctime)s %(levelname)s %(name)s: %(message)s"))
        root.addHandler(fh)


def _load_doc(args) -> dict:
    if getattr(args, "config", None) is not None:
        return load_config_file(args.config)
    return default_config()


def _spec_from_args(args, **extra) -> tuple:
    doc = _load_doc(args)
    overrides = {
        "seed": getattr(args, "seed", None),
        "out": getattr(args, "out", None),
        "episodes": getattr(args, "episodes", None),
        "seeds": getattr(args, "seeds", None),
        "agent": getattr(args, "agent", None),
    }
    overrides.update(extra)
    return build_runspec(doc, **overrides)


def _load_policy(args, spec: RunSpec):
    """Resolve --checkpoint / --agent socialforce into an act callable."""
    if args.checkpoint is not None:
        expected = spec.fingerprint() if args.config is not None else None
        agent = DdpgAgent.load(args.checkpoint,
                               expected_fingerprint=expected)
        return agent.act, agent
    if spec.agent == "socialforce":
        return "socialforce", None
    raise ConfigError("an RL agent needs --checkpoint "
                      "(or use --agent socialforce)")


def _sf_params(spec: RunSpec, kd) -> SocialForceParams:
    if kd is None:
        return spec.socialforce
    base = spec.socialforce
    return SocialForceParams(k_v=base.k_v, k_d=float(kd),
                             relax_time=base.relax_time, v_max=base.v_max,
                             crossing_direction=base.crossing_direction)


# -- train -------------------------------------------------------------------


def cmd_train(args) -> int:
    extra = {}
    if args.reward is not None:
        extra["agent"] = {"momentum": "rl_momentum",
                          "baseline": "rl_baseline"}[args.reward]
    spec, run = _spec_from_args(args, **extra)
    if spec.agent == "socialforce":
        raise ConfigError("the social-force agent has no training phase; "
                          "use eval or rollout")
    _setup_logging(spec.out_dir)
    n_seeds = run["seeds"]
    every = max(1, spec.episodes // 20)

    def progress(row):
        if (row.episode + 1) % every == 0 or row.episode == 0:
            log.info("episode %d: reward %.2f steps %d collided %d "
                     "sigma %.4f", row.episode, row.reward, row.steps,
                     int(row.collided), row.sigma)

    if n_seeds > 1:
        res = train_multi(spec, n_seeds=n_seeds,
                          smooth_window=run["smooth_window"],
                          progress=progress)
        print(f"wrote {res['curves']}")
        for r in res["runs"]:
            print(f"wrote {r['metrics']}")
        if res["failures"]:
            for seed, err in res["failures"]:
                print(f"run seed {seed} failed: {err}", file=sys.stderr)
            return 1
    else:
        res = train_run(spec, progress=progress)
        print(f"wrote {res['metrics']}")
        print(f"wrote {res['final_checkpoint']}")
    return 0


# -- eval --------------------------------------------------------------------


def cmd_eval(args) -> int:
    if args.n is not None and args.n < 1:
        raise ConfigError("--n must be >= 1")
    spec, run = _spec_from_args(args)
    _setup_logging(spec.out_dir)
    n = args.n if args.n is not None else spec.recall_n
    seed = args.seed if args.seed is not None else spec.seed
    policy, agent = _load_policy(args, spec)
    if policy == "socialforce":
        stats = recall_eval("socialforce", spec.world, n=n, seed=seed,
                            sf_params=_sf_params(spec, args.kd))
        label = "socialforce"
    else:
        stats = recall_eval(policy, spec.world, n=n, seed=seed)
        label = Path(args.checkpoint).stem
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    recall_path = out / "recall.csv"
    write_recall_csv(recall_path, stats)
    print(f"wrote {recall_path}")
    print(f"{label}: collisions {stats.n_collisions}/{stats.n_episodes}")
    if stats.mean_momentum_2d is None:
        print(f"{label}: momentum change undefined "
              f"(zero collisions in {stats.n_episodes} episodes)")
    else:
        std = stats.std_momentum_2d
        std_txt = f"{std:.2f}" if std is not None else "n/a"
        print(f"{label}: momentum change {stats.mean_momentum_2d:.2f} "
              f"+/- {std_txt} (kg*m/s)")
    return 0


# -- rollout -----------------------------------------------------------------


def cmd_rollout(args) -> int:
    spec, run = _spec_from_args(args)
    _setup_logging(spec.out_dir)
    seed = args.seed if args.seed is not None else spec.seed
    policy, agent = _load_policy(args, spec)
    if args.start is not None:
        start = (float(args.start[0]), float(args.start[1]))
    else:
        start = recall_start(spec.world, seed, 0)
    if policy == "socialforce":
        rec = run_socialforce_episode(spec.world,
                                      _sf_params(spec, args.kd), start,
                                      collect=True)
    else:
        env = CrossingEnv(spec.world, spec.design,
                          tie_is_away=spec.tie_is_away,
                          orientation=spec.reward_orientation)
        rec = run_policy_episode(env, policy, start=start, collect=True)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj_path = out / "trajectory.csv"
    with open(traj_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(TRAJECTORY_HEADER)
        for row in rec["trajectory"]:
            w.writerow([fmt_float(row["t"]), fmt_float(row["x_ped"]),
                        fmt_float(row["y_ped"]), fmt_float(row["x_veh"]),
                        fmt_float(row["y_veh"]), fmt_float(row["v_ped"]),
                        fmt_float(row["v_veh"]), fmt_float(row["theta_ped"]),
                        fmt_float(row["reward"]), int(row["braking"])])
    svg_path = out / "trajectory.svg"
    svgplot.trajectory_chart(
        rec["trajectory"],
        (spec.world.driveway_y_min, spec.world.driveway_y_max),
        rec["collided"],
        title=f"start=({start[0]:.2f}, {start[1]:.2f})",
        out_path=svg_path)
    print(f"wrote {traj_path}")
    print(f"wrote {svg_path}")
    verdict = (f"collision at step {rec['steps']}, momentum change "
               f"{rec['momentum_2d']:.2f} (kg*m/s)" if rec["collided"]
               else f"no collision in {rec['steps']} steps")
    print(verdict)
    return 0


# -- plot --------------------------------------------------------------------


def _read_csv_checked(path: Path):
    """Read a CSV, classify it by header, and parse numeric rows."""
    try:
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise ConfigError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    kinds = {"curves": CURVES_HEADER, "metrics": METRICS_HEADER,
             "recall": RECALL_HEADER}
    kind = next((k for k, h in kinds.items() if header == h), None)
    if kind is None:
        raise ConfigError(f"{path}: unrecognized CSV header {header}")
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    parsed = []
    for i, row in enumerate(rows, start=2):  # line number incl. header
        if len(row) != len(header):
            raise ConfigError(f"{path}: line {i}: expected "
                              f"{len(header)} fields, got {len(row)}")
        try:
            parsed.append([float(v) for v in row])
        except ValueError:
            raise ConfigError(f"{path}: line {i}: non-numeric value "
                              f"in {row}") from None
    return kind, np.asarray(parsed, dtype=np.float64)


def cmd_plot(args) -> int:
    out = Path(args.out if args.out is not None else ".")
    _setup_logging(None)
    out.mkdir(parents=True, exist_ok=True)
    line_series = []
    hist_jobs = []
    for path in map(Path, args.csv):
        kind, data = _read_csv_checked(path)
        label = path.parent.name or path.stem
        if kind == "curves":
            line_series.append({"x": data[:, 0], "y": data[:, 1],
                                "band": (data[:, 2], data[:, 3]),
                                "label": f"{label} mean"})
        elif kind == "metrics":
            line_series.append({"x": data[:, 0],
                                "y": moving_average(data[:, 1], 20),
                                "label": f"{label} reward (smoothed)"})
        else:
            moms = data[data[:, 2] > 0.0][:, 3]
            if moms.size == 0:
                raise ConfigError(f"{path}: no collision rows to plot")
            hist_jobs.append((path.stem, moms))
    wrote = []
    if line_series:
        p = out / "reward_curves.svg"
        svgplot.line_chart(line_series, "episode reward", "episode",
                           "reward", out_path=p)
        wrote.append(p)
    for i, (stem, moms) in enumerate(hist_jobs):
        name = "momentum_hist.svg" if i == 0 else f"momentum_hist_{i + 1}.svg"
        p = out / name
        svgplot.histogram_chart(moms, f"collision momentum change ({stem})",
                                "momentum change (kg*m/s)", out_path=p)
        wrote.append(p)
    for p in wrote:
        print(f"wrote {p}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advped",
        description="Adversarial pedestrian scenario lab: train and "
                    "evaluate crossing agents against a scripted "
                    "braking vehicle.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help="JSON run config (sections world/ddpg/"
                            "socialforce/run)")
        p.add_argument("--out", type=str, default=None,
                       help="output directory override")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed override")

    p_train = sub.add_parser("train", help="run seeded training")
    common(p_train)
    p_train.add_argument("--episodes", type=int, default=None)
    p_train.add_argument("--seeds", type=int, default=None,
                         help="number of independent runs (>1 aggregates "
                              "curves.csv)")
    p_train.add_argument("--agent", choices=["rl_momentum", "rl_baseline"],
                         default=None)
    p_train.add_argument("--reward", choices=["momentum", "baseline"],
                         default=None,
                         help="reward design shorthand for --agent")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="stochastic-start recall "
                                         "evaluation")
    common(p_eval)
    p_eval.add_argument("--checkpoint", type=Path, default=None)
    p_eval.add_argument("--agent",
                        choices=["socialforce", "rl_momentum", "rl_baseline"],
                        default=None)
    p_eval.add_argument("--n", type=int, default=None,
                        help="episode count (default from config)")
    p_eval.add_argument("--kd", type=float, default=None,
                        help="crossing-force gain override (socialforce)")
    p_eval.set_defaults(func=cmd_eval)

    p_roll = sub.add_parser("rollout", help="single exploration-free "
                                            "episode with trajectory "
                                            "artifacts")
    common(p_roll)
    p_roll.add_argument("--checkpoint", type=Path, default=None)
    p_roll.add_argument("--agent",
                        choices=["socialforce", "rl_momentum", "rl_baseline"],
                        default=None)
    p_roll.add_argument("--kd", type=float, default=None)
    p_roll.add_argument("--start", type=float, nargs=2, default=None,
                        metavar=("X", "Y"),
                        help="pedestrian start override")
    p_roll.set_defaults(func=cmd_rollout)

    p_plot = sub.add_parser("plot", help="render SVG charts from CSVs")
    p_plot.add_argument("csv", nargs="+",
                        help="metrics.csv / curves.csv / recall.csv paths")
    p_plot.add_argument("--out", type=str, default=None)
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(None)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CheckpointError as exc:
        print(f"checkpoint error: {exc.__class__.__name__}: {exc}",
              file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure contract: diagnostics, exit 1
        log.exception("command failed")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

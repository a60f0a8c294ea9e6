"""Run orchestration: seeded training runs, averaged reward curves, and the
stochastic-start recall evaluation for all three agent designs.

All randomness derives from a per-run master seed through counter-based
SeedSequence splits, so identical specs produce byte-identical artifacts.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import collision as collision_mod
from .ddpg import DdpgAgent, DdpgConfig, Experience
from .env import (NORM_ANGLE, NORM_POSITION, NORM_SPEED, OBSERVATION_DIM,
                  CrossingEnv)
from .reward import PROSE, RewardDesign
from .simcore import (PedestrianState, Vec2, VehicleState, WorldConfig,
                      brake_controller, step_vehicle)
from .socialforce import (SfPedestrianState, SocialForceParams,
                          compute_force, step_socialforce)

log = logging.getLogger("advped.harness")

AGENT_KINDS = ("socialforce", "rl_baseline", "rl_momentum")

# spawn-key tags for counter-based rng splits (agent-internal streams use
# the plain spawn children 0..3 of the same master seed)
_ENV_STREAM = 4
_RECALL_STREAM = 9

# stochastic-start recall rectangle in y; x spans the training range
RECALL_Y_MIN = -6.0
RECALL_Y_MAX = -3.0


def episode_rng(master_seed: int, episode: int,
                stream: int = _ENV_STREAM) -> np.random.Generator:
    """Deterministic per-episode generator from (seed, stream, episode)."""
    ss = np.random.SeedSequence(entropy=master_seed,
                                spawn_key=(stream, episode))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class RunSpec:
    """One training/evaluation configuration."""

    agent: str = "rl_momentum"
    world: WorldConfig = field(default_factory=WorldConfig)
    ddpg: DdpgConfig = field(default_factory=DdpgConfig)
    socialforce: SocialForceParams = field(default_factory=SocialForceParams)
    episodes: int = 2000
    seed: int = 0
    out_dir: Path = Path("runs/out")
    reward_orientation: str = PROSE
    tie_is_away: bool = True
    checkpoint_interval: int = 500
    recall_n: int = 100

    def __post_init__(self):
        if self.agent not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind: {self.agent!r}")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if self.checkpoint_interval < 1:
            raise ValueError("checkpoint_interval must be >= 1")
        if self.recall_n < 1:
            raise ValueError("recall_n must be >= 1")
        object.__setattr__(self, "out_dir", Path(self.out_dir))

    @property
    def design(self) -> RewardDesign:
        return (RewardDesign.BASELINE_SIGNAL if self.agent == "rl_baseline"
                else RewardDesign.COLLISION_MOMENTUM)

    def fingerprint(self) -> str:
        """Hash of everything an evaluation must agree on with a checkpoint."""
        world = asdict(self.world)
        world["veh_start"] = list(self.world.veh_start)
        doc = {
            "world": world,
            "obs_dim": OBSERVATION_DIM,
            "norms": [NORM_POSITION, NORM_SPEED, NORM_ANGLE],
            "hidden_dims": list(self.ddpg.hidden_dims),
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class EpisodeResult:
    episode: int
    reward: float
    steps: int
    collided: bool
    momentum_2d: float
    momentum_1d: float
    sigma: float


@dataclass(frozen=True)
class RecallStats:
    """Collision statistics over stochastic-start evaluation episodes.

    Momentum means/stds are computed over collision episodes only and are
    None (undefined) when too few collisions happened to estimate them.
    """

    n_episodes: int
    n_collisions: int
    mean_momentum_2d: Optional[float]
    std_momentum_2d: Optional[float]
    mean_momentum_1d: Optional[float]
    records: list

    @classmethod
    def from_records(cls, records: list) -> "RecallStats":
        moms2 = [r["momentum_2d"] for r in records if r["collided"]]
        moms1 = [r["momentum_1d"] for r in records if r["collided"]]
        mean2 = float(np.mean(moms2)) if moms2 else None
        std2 = float(np.std(moms2, ddof=1)) if len(moms2) > 1 else None
        mean1 = float(np.mean(moms1)) if moms1 else None
        return cls(n_episodes=len(records), n_collisions=len(moms2),
                   mean_momentum_2d=mean2, std_momentum_2d=std2,
                   mean_momentum_1d=mean1, records=records)


def fmt_float(x) -> str:
    # shortest round-trip decimal form; CSV cells never carry numpy reprs
    return repr(float(x))


def recall_start(cfg: WorldConfig, seed: int, index: int):
    """Start position of recall episode `index` (shared with rollout)."""
    rng = episode_rng(seed, index, stream=_RECALL_STREAM)
    return (float(rng.uniform(cfg.ped_start_x_min, cfg.ped_start_x_max)),
            float(rng.uniform(RECALL_Y_MIN, RECALL_Y_MAX)))


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["episode", "reward", "steps", "collided",
                    "momentum_2d", "momentum_1d", "sigma"])
        for r in rows:
            w.writerow([r.episode, fmt_float(r.reward), r.steps,
                        int(r.collided), fmt_float(r.momentum_2d),
                        fmt_float(r.momentum_1d), fmt_float(r.sigma)])


def write_recall_csv(path, stats: RecallStats) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["start_x", "start_y", "collided",
                    "momentum_2d", "momentum_1d", "steps"])
        for r in stats.records:
            w.writerow([fmt_float(r["start_x"]), fmt_float(r["start_y"]),
                        int(r["collided"]), fmt_float(r["momentum_2d"]),
                        fmt_float(r["momentum_1d"]), r["steps"]])


def write_curves_csv(path, episodes, mean, ci_lo, ci_hi) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["episode", "mean", "ci_lo", "ci_hi"])
        for e, m, lo, hi in zip(episodes, mean, ci_lo, ci_hi):
            w.writerow([int(e), fmt_float(m), fmt_float(lo), fmt_float(hi)])


def moving_average(series, window: int = 20):
    """Centered moving average, length preserved, windows shrink at edges.

    Index i averages series[max(0, i - window//2) : i + (window-1)//2 + 1].
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    x = np.asarray(series, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return x.copy()
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(n)
    lo = np.maximum(0, idx - window // 2)
    hi = np.minimum(n - 1, idx + (window - 1) // 2)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


# -- training ---------------------------------------------------------------


def train_run(spec: RunSpec, progress: Optional[Callable] = None) -> dict:
    """Execute one seeded training run, writing metrics and checkpoints.

    Returns a dict with the artifact paths, the per-episode results, and the
    trained agent.
    """
    if spec.agent == "socialforce":
        raise ValueError("the social-force agent is not trained; "
                         "use recall_eval or rollout")
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    env = CrossingEnv(spec.world, spec.design, tie_is_away=spec.tie_is_away,
                      orientation=spec.reward_orientation)
    agent = DdpgAgent(spec.ddpg, obs_dim=OBSERVATION_DIM,
                      action_bound=spec.world.action_bound,
                      master_seed=spec.seed,
                      config_fingerprint=spec.fingerprint())
    rows = []
    for ep in range(spec.episodes):
        obs = env.reset(rng=episode_rng(spec.seed, ep))
        total = 0.0
        steps = 0
        collided = False
        mom2 = mom1 = 0.0
        while True:
            action = agent.select_action(obs, explore=True)
            outcome = env.step(action)
            done_for_replay = outcome.info["collided"] or (
                outcome.done and not spec.ddpg.bootstrap_on_timeout)
            agent.record(Experience(obs, action, outcome.reward,
                                    outcome.observation, done_for_replay))
            obs = outcome.observation
            total += outcome.reward
            steps += 1
            if outcome.info["collided"]:
                collided = True
                mom2 = outcome.info["momentum_2d"]
                mom1 = outcome.info["momentum_1d"]
            if outcome.done:
                break
        rows.append(EpisodeResult(ep, total, steps, collided, mom2, mom1,
                                  agent.sigma))
        agent.end_episode()
        if (ep + 1) % spec.checkpoint_interval == 0 and ep + 1 < spec.episodes:
            _abort_if_nonfinite(agent, ep)
            agent.save(out / f"ckpt_ep{ep + 1:05d}.ckpt")
        if progress is not None:
            progress(rows[-1])
    _abort_if_nonfinite(agent, spec.episodes - 1)
    final_ckpt = out / "final.ckpt"
    agent.save(final_ckpt)
    metrics_path = out / "metrics.csv"
    write_metrics_csv(metrics_path, rows)
    return {"metrics": metrics_path, "final_checkpoint": final_ckpt,
            "rows": rows, "agent": agent, "out_dir": out}


def _abort_if_nonfinite(agent: DdpgAgent, episode: int) -> None:
    if not (agent.actor.all_finite() and agent.critic.all_finite()):
        raise RuntimeError(
            f"non-finite network parameters at episode {episode}; "
            "training state is unusable (see log for skipped-step incidents)")


def train_multi(spec: RunSpec, n_seeds: int = 8,
                smooth_window: int = 20,
                progress: Optional[Callable] = None) -> dict:
    """Run n_seeds independent seeded runs and aggregate reward curves.

    Each run writes its own artifacts under out_dir/run_<seed>; the
    aggregate mean and 95% band (1.96 * std/sqrt(n), computed on smoothed
    per-seed series) land in out_dir/curves.csv.
    """
    if n_seeds < 2:
        raise ValueError("n_seeds must be >= 2")
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series = []
    results = []
    failures = []
    for k in range(n_seeds):
        seed = spec.seed + k
        sub = RunSpec(agent=spec.agent, world=spec.world, ddpg=spec.ddpg,
                      socialforce=spec.socialforce, episodes=spec.episodes,
                      seed=seed, out_dir=out / f"run_{seed}",
                      reward_orientation=spec.reward_orientation,
                      tie_is_away=spec.tie_is_away,
                      checkpoint_interval=spec.checkpoint_interval,
                      recall_n=spec.recall_n)
        try:
            res = train_run(sub, progress=progress)
        except Exception as exc:  # aggregation proceeds over completed runs
            log.warning("seed %d run failed: %s", seed, exc)
            failures.append((seed, repr(exc)))
            continue
        results.append(res)
        series.append(moving_average([r.reward for r in res["rows"]],
                                     smooth_window))
    if not series:
        raise RuntimeError(f"all {n_seeds} runs failed: {failures}")
    mat = np.stack(series)  # (n_done, episodes)
    mean = mat.mean(axis=0)
    if mat.shape[0] > 1:
        se = mat.std(axis=0, ddof=1) / math.sqrt(mat.shape[0])
    else:
        se = np.zeros_like(mean)
    ci_lo = mean - 1.96 * se
    ci_hi = mean + 1.96 * se
    curves_path = out / "curves.csv"
    write_curves_csv(curves_path, np.arange(spec.episodes), mean, ci_lo, ci_hi)
    return {"curves": curves_path, "runs": results, "failures": failures,
            "mean": mean, "ci_lo": ci_lo, "ci_hi": ci_hi}


# -- episode runners --------------------------------------------------------


def run_policy_episode(env: CrossingEnv, act: Callable, rng=None, start=None,
                       collect: bool = False) -> dict:
    """Run one exploration-free episode of a state-feedback policy."""
    obs = env.reset(rng=rng, start=start)
    sim = env.sim
    rows = []
    total = 0.0
    steps = 0
    collided = False
    mom2 = mom1 = 0.0
    while True:
        action = act(obs)
        outcome = env.step(action)
        steps += 1
        total += outcome.reward
        if collect:
            s = outcome.info["sim"]
            rows.append({
                "t": s.elapsed,
                "x_ped": s.pedestrian.position.x,
                "y_ped": s.pedestrian.position.y,
                "x_veh": s.vehicle.position.x,
                "y_veh": s.vehicle.position.y,
                "v_ped": s.pedestrian.speed,
                "v_veh": s.vehicle.speed,
                "theta_ped": s.pedestrian.heading,
                "reward": outcome.reward,
                "braking": outcome.info["braking"],
            })
        if outcome.info["collided"]:
            collided = True
            mom2 = outcome.info["momentum_2d"]
            mom1 = outcome.info["momentum_1d"]
        obs = outcome.observation
        if outcome.done:
            break
    start_pos = sim.pedestrian.position
    return {"start_x": start_pos.x, "start_y": start_pos.y,
            "collided": collided, "momentum_2d": mom2, "momentum_1d": mom1,
            "steps": steps, "reward": total, "trajectory": rows}


def run_socialforce_episode(cfg: WorldConfig, params: SocialForceParams,
                            start, collect: bool = False) -> dict:
    """Run one social-force episode against the scripted vehicle.

    The pedestrian follows the force model; the vehicle brakes under the
    same controller as in RL episodes. Collision momentum uses the speeds
    sampled at the start of the colliding step, with the impact angle taken
    from the pedestrian velocity driving that step's motion.
    """
    ped = SfPedestrianState(position=Vec2(float(start[0]), float(start[1])),
                            velocity=Vec2(0.0, 0.0))
    veh = VehicleState(position=cfg.veh_start, speed=cfg.veh_speed_init,
                       heading=0.0)
    rows = []
    collided = False
    mom2 = mom1 = 0.0
    steps = 0
    for k in range(cfg.max_steps):
        v_pre = ped.velocity
        ped_speed_pre = math.hypot(v_pre.x, v_pre.y)
        veh_speed_pre = veh.speed
        force = compute_force(ped, veh, params, cfg.mass_ped)
        ped = step_socialforce(ped, force, cfg.dt, cfg.mass_ped, params)
        heading = math.atan2(v_pre.y, v_pre.x) if ped_speed_pre > 0.0 else 0.0
        pseudo = PedestrianState(position=ped.position, speed=ped_speed_pre,
                                 heading=heading)
        decel = brake_controller(pseudo, veh, cfg)
        veh = step_vehicle(veh, decel, cfg)
        steps += 1
        hit = collision_mod.detect(pseudo, veh, cfg)
        if hit:
            collided = True
            theta = collision_mod.impact_angle(pseudo, veh)
            mom2 = collision_mod.momentum_change_2d(
                cfg.mass_ped, cfg.mass_veh, ped_speed_pre, veh_speed_pre,
                theta)
            mom1 = collision_mod.momentum_change_1d(
                cfg.mass_ped, cfg.mass_veh, ped_speed_pre, veh_speed_pre)
        if collect:
            rows.append({
                "t": (k + 1) * cfg.dt,
                "x_ped": ped.position.x,
                "y_ped": ped.position.y,
                "x_veh": veh.position.x,
                "y_veh": veh.position.y,
                "v_ped": math.hypot(ped.velocity.x, ped.velocity.y),
                "v_veh": veh.speed,
                "theta_ped": heading,
                "reward": 0.0,
                "braking": decel > 0.0,
            })
        if hit:
            break
    return {"start_x": float(start[0]), "start_y": float(start[1]),
            "collided": collided, "momentum_2d": mom2, "momentum_1d": mom1,
            "steps": steps, "reward": 0.0, "trajectory": rows}


# -- recall evaluation -------------------------------------------------------


def recall_eval(policy, cfg: WorldConfig, n: int = 100, seed: int = 0, *,
                sf_params: Optional[SocialForceParams] = None) -> RecallStats:
    """Stochastic-start evaluation over the recall rectangle.

    Parameters
    ----------
    policy : callable or "socialforce"
        Observation -> action callable with exploration disabled, or the
        literal string "socialforce" (sf_params then required).
    cfg : WorldConfig
        Scenario parameters; the x range reuses the training start span.
    n : int
        Episode count.
    seed : int
        Master seed for the start-position draws.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    records = []
    env = None
    if policy != "socialforce":
        env = CrossingEnv(cfg, RewardDesign.COLLISION_MOMENTUM)
    elif sf_params is None:
        raise ValueError("sf_params required for the socialforce policy")
    for i in range(n):
        start = recall_start(cfg, seed, i)
        if policy == "socialforce":
            rec = run_socialforce_episode(cfg, sf_params, start)
        else:
            rec = run_policy_episode(env, policy, start=start)
        rec.pop("trajectory")
        records.append(rec)
    return RecallStats.from_records(records)

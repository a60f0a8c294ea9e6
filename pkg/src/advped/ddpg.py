"""Off-policy actor-critic learner: replay, exploration noise, critic
regression to Bellman targets, deterministic-policy-gradient actor updates,
and soft target maintenance.

The actor maps the 8-dim observation to one bounded heading increment; the
critic scores the concatenated (observation, action) vector. One gradient
step runs every `update_interval` environment steps once the warmup and the
replay buffer allow it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple, Optional

import numpy as np

from .nn import (AdamState, CheckpointConfigError, CheckpointShapeError,
                 CorruptCheckpointError, Mlp, adam_step, read_checkpoint,
                 read_probe, soft_update, write_checkpoint, write_probe)
from .nn.mlp import LINEAR, TANH_SCALED

log = logging.getLogger("advped.ddpg")


class Experience(NamedTuple):
    """One replay record."""

    state: np.ndarray
    action: float
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring store with FIFO eviction."""

    def __init__(self, capacity: int, obs_dim: int, dtype=np.float32):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = int(capacity)
        self.states = np.zeros((capacity, obs_dim), dtype=dtype)
        self.actions = np.zeros((capacity, 1), dtype=dtype)
        self.rewards = np.zeros((capacity, 1), dtype=dtype)
        self.next_states = np.zeros((capacity, obs_dim), dtype=dtype)
        self.dones = np.zeros((capacity, 1), dtype=dtype)
        self.size = 0
        self.cursor = 0

    def __len__(self) -> int:
        return self.size

    def push(self, exp: Experience) -> None:
        i = self.cursor
        self.states[i] = exp.state
        self.actions[i] = exp.action
        self.rewards[i] = exp.reward
        self.next_states[i] = exp.next_state
        self.dones[i] = 1.0 if exp.done else 0.0
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample with replacement; None while not ready."""
        if self.size < batch_size:
            return None
        idx = rng.integers(0, self.size, size=batch_size)
        return (self.states[idx], self.actions[idx], self.rewards[idx],
                self.next_states[idx], self.dones[idx])


@dataclass(frozen=True)
class DdpgConfig:
    """Learner hyperparameters.

    noise_sigma defaults to 0.1 * action_bound when left unset and
    noise_sigma_min to 0.05 * action_bound, so sigma decays to a floor
    rather than to zero. Training on this task cycles through
    boom-and-bust phases (profitable collisions require a still-moving
    vehicle, so the replay mix sours after each boom); the floor keeps
    enough
    exploration alive for the policy to re-ignite after a bust instead of
    flatlining. Set noise_sigma_min=0.0 for the pure geometric decay. One
    gradient step runs every update_interval environment steps; 1 restores
    the step-per-step cadence at roughly 40x the training cost.

    invert_action_grads scales each sample's action gradient by the relative
    headroom to the bound it pushes toward. Without it the ascent direction
    keeps a constant sign on this task (near-bang-bang turns are optimal),
    the pre-tanh activations grow without bound, and the policy freezes at a
    rail with exactly zero float32 tanh gradient; False restores the plain
    update.
    """

    gamma: float = 0.9
    tau: float = 0.005
    lr_actor: float = 0.001
    lr_critic: float = 0.002
    batch_size: int = 1000
    buffer_capacity: int = 10000
    noise_sigma: Optional[float] = None
    noise_decay: float = 0.999
    noise_sigma_min: Optional[float] = None
    warmup_steps: int = 1000
    update_interval: int = 40
    hidden_dims: tuple = (512, 256)
    dtype: str = "float32"
    bootstrap_on_timeout: bool = False
    invert_action_grads: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")
        if self.lr_actor <= 0.0 or self.lr_critic <= 0.0:
            raise ValueError("learning rates must be > 0")
        if self.batch_size < 1 or self.buffer_capacity < 1:
            raise ValueError("batch_size and buffer_capacity must be >= 1")
        if self.batch_size > self.buffer_capacity:
            raise ValueError("batch_size must be <= buffer_capacity")
        if self.noise_sigma is not None and self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.noise_sigma_min is not None and self.noise_sigma_min < 0.0:
            raise ValueError("noise_sigma_min must be >= 0")
        if not 0.0 < self.noise_decay <= 1.0:
            raise ValueError("noise_decay must be in (0, 1]")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be >= 0")
        if self.update_interval < 1:
            raise ValueError("update_interval must be >= 1")
        hd = tuple(int(h) for h in self.hidden_dims)
        if not hd or any(h < 1 for h in hd):
            raise ValueError("hidden_dims must be positive")
        object.__setattr__(self, "hidden_dims", hd)
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    @classmethod
    def from_dict(cls, d: dict) -> "DdpgConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise KeyError(f"unknown ddpg config key(s): {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class TrainMetrics:
    """Diagnostics of one (possibly skipped) gradient step."""

    critic_loss: float = 0.0
    actor_objective: float = 0.0
    grad_norm_critic: float = 0.0
    grad_norm_actor: float = 0.0
    updated: bool = False
    reason: str = ""


class DdpgAgent:
    """Actor, critic, their targets, optimizer states, replay, and rng."""

    def __init__(self, cfg: DdpgConfig, *, obs_dim: int = 8,
                 action_bound: float = math.pi / 2.0, master_seed: int = 0,
                 config_fingerprint: str = ""):
        self.cfg = cfg
        self.obs_dim = int(obs_dim)
        self.action_bound = float(action_bound)
        self.master_seed = int(master_seed)
        self.config_fingerprint = config_fingerprint
        self.np_dtype = np.float32 if cfg.dtype == "float32" else np.float64

        ss = np.random.SeedSequence(master_seed)
        ss_actor, ss_critic, ss_noise, ss_sample = ss.spawn(4)
        actor_dims = [self.obs_dim, *cfg.hidden_dims, 1]
        critic_dims = [self.obs_dim + 1, *cfg.hidden_dims, 1]
        self.actor = Mlp(actor_dims, TANH_SCALED, action_bound=self.action_bound,
                         rng=np.random.default_rng(ss_actor), dtype=self.np_dtype)
        self.critic = Mlp(critic_dims, LINEAR,
                          rng=np.random.default_rng(ss_critic), dtype=self.np_dtype)
        self.target_actor = self.actor.clone()
        self.target_critic = self.critic.clone()
        self.adam_actor = AdamState(self.actor.parameters())
        self.adam_critic = AdamState(self.critic.parameters())
        self.noise_rng = np.random.default_rng(ss_noise)
        self.sample_rng = np.random.default_rng(ss_sample)
        self.buffer = ReplayBuffer(cfg.buffer_capacity, self.obs_dim,
                                   dtype=self.np_dtype)
        self.episode = 0
        self.global_step = 0
        self.noise_sigma0 = (cfg.noise_sigma if cfg.noise_sigma is not None
                             else 0.1 * self.action_bound)
        self.noise_floor = (cfg.noise_sigma_min
                            if cfg.noise_sigma_min is not None
                            else 0.05 * self.action_bound)

    # -- policy ---------------------------------------------------------------

    @property
    def sigma(self) -> float:
        """Exploration scale of the current episode (decay with a floor)."""
        return max(self.noise_floor,
                   self.noise_sigma0 * self.cfg.noise_decay ** self.episode)

    def select_action(self, observation, explore: bool) -> float:
        a = float(self.actor.forward(np.asarray(observation,
                                                dtype=self.np_dtype))[0])
        if explore:
            a += float(self.noise_rng.normal(0.0, self.sigma))
        return min(self.action_bound, max(-self.action_bound, a))

    def act(self, observation) -> float:
        """Exploration-free policy (recall/rollout interface)."""
        return self.select_action(observation, explore=False)

    # -- learning -------------------------------------------------------------

    def record(self, exp: Experience) -> Optional[TrainMetrics]:
        """Store one transition and run a gradient step when due."""
        self.buffer.push(exp)
        self.global_step += 1
        if self.global_step < self.cfg.warmup_steps:
            return None
        if self.global_step % self.cfg.update_interval != 0:
            return None
        return self.train_step()

    def end_episode(self) -> None:
        self.episode += 1

    def compute_targets(self, rewards, next_states, dones) -> np.ndarray:
        """Bootstrapped regression targets r + gamma*(1-done)*Q'(s', mu'(s'))."""
        a2 = self.target_actor.forward(next_states)
        q2 = self.target_critic.forward(
            np.concatenate([next_states, a2], axis=1))
        return rewards + self.cfg.gamma * (1.0 - dones) * q2

    def train_step(self) -> TrainMetrics:
        """One critic regression + one actor ascent + soft target updates."""
        cfg = self.cfg
        batch = self.buffer.sample(cfg.batch_size, self.sample_rng)
        if batch is None:
            return TrainMetrics(updated=False, reason="not-ready")
        s, a, r, s2, d = batch
        n = cfg.batch_size
        y = self.compute_targets(r, s2, d)

        acts_c = self.critic.forward_cached(np.concatenate([s, a], axis=1))
        err = acts_c[-1] - y
        critic_loss = float(np.mean(np.square(err, dtype=np.float64)))
        if not math.isfinite(critic_loss):
            log.warning("train_step skipped: non-finite critic loss")
            return TrainMetrics(updated=False, reason="non-finite-loss")
        gws, gbs, _ = self.critic.backward_from(acts_c, err * (2.0 / n))
        gsq_c = adam_step(self.critic.parameters(), gws + gbs,
                          self.adam_critic, cfg.lr_critic)
        if gsq_c is None:
            return TrainMetrics(critic_loss=critic_loss, updated=False,
                                reason="non-finite-critic-grad")

        # Actor ascends Q(s, mu(s)) by the chain rule through the critic
        acts_a = self.actor.forward_cached(s)
        mu = acts_a[-1]
        acts_q = self.critic.forward_cached(np.concatenate([s, mu], axis=1))
        actor_objective = float(np.mean(acts_q[-1], dtype=np.float64))
        gout = np.full((n, 1), -1.0 / n, dtype=self.np_dtype)
        _, _, dx = self.critic.backward_from(acts_q, gout,
                                             want_input_grad=True)
        da = np.ascontiguousarray(dx[:, self.obs_dim:])
        if cfg.invert_action_grads:
            # -da is the ascent direction; pushes toward a bound shrink with
            # the remaining headroom so mu can never run off to saturation
            bound = self.action_bound
            headroom = np.where(da < 0.0, (bound - mu) / (2.0 * bound),
                                (mu + bound) / (2.0 * bound))
            da = da * headroom.astype(self.np_dtype)
        gws_a, gbs_a, _ = self.actor.backward_from(acts_a, da)
        gsq_a = adam_step(self.actor.parameters(), gws_a + gbs_a,
                          self.adam_actor, cfg.lr_actor)
        if gsq_a is None:
            return TrainMetrics(critic_loss=critic_loss,
                                actor_objective=actor_objective,
                                grad_norm_critic=math.sqrt(gsq_c),
                                updated=False, reason="non-finite-actor-grad")

        soft_update(self.target_actor, self.actor, cfg.tau)
        soft_update(self.target_critic, self.critic, cfg.tau)
        return TrainMetrics(critic_loss=critic_loss,
                            actor_objective=actor_objective,
                            grad_norm_critic=math.sqrt(gsq_c),
                            grad_norm_actor=math.sqrt(gsq_a),
                            updated=True)

    # -- persistence ----------------------------------------------------------

    _NET_NAMES = ("actor", "critic", "target_actor", "target_critic")

    def _nets(self):
        return (self.actor, self.critic, self.target_actor, self.target_critic)

    def _probe_input(self) -> np.ndarray:
        # canonical reset observation at the center start position
        return np.array([0.0, 0.0, 1.0, -0.1, 0.7, 0.2, 0.0, 0.5])

    def save(self, path) -> None:
        """Write the checkpoint plus its probe-regression file."""
        arrays = []
        for name, net in zip(self._NET_NAMES, self._nets()):
            for i, (w, b) in enumerate(zip(net.weights, net.biases)):
                arrays.append((f"{name}/W{i}", w))
                arrays.append((f"{name}/b{i}", b))
        for name, state in (("adam_actor", self.adam_actor),
                            ("adam_critic", self.adam_critic)):
            for i, (m, v) in enumerate(zip(state.m, state.v)):
                arrays.append((f"{name}/m{i}", m))
                arrays.append((f"{name}/v{i}", v))
        meta = {
            "kind": "ddpg-agent",
            "obs_dim": self.obs_dim,
            "action_bound": self.action_bound,
            "master_seed": self.master_seed,
            "episode": self.episode,
            "global_step": self.global_step,
            "adam_t_actor": self.adam_actor.t,
            "adam_t_critic": self.adam_critic.t,
            "rng_noise": _rng_state(self.noise_rng),
            "rng_sample": _rng_state(self.sample_rng),
            "config_fingerprint": self.config_fingerprint,
            "ddpg_config": asdict(self.cfg),
            "actor_dims": self.actor.layer_dims,
            "critic_dims": self.critic.layer_dims,
        }
        write_checkpoint(path, meta, arrays)
        probe = self._probe_input()
        actor_out = self.actor.forward(probe.astype(self.np_dtype))
        critic_out = self.critic.forward(
            np.concatenate([probe, [0.0]]).astype(self.np_dtype))
        write_probe(path, probe, {"actor": actor_out, "critic": critic_out})

    @classmethod
    def load(cls, path, expected_fingerprint: Optional[str] = None
             ) -> "DdpgAgent":
        """Rebuild an agent from a checkpoint.

        Raises CheckpointShapeError on network-shape disagreement,
        CheckpointConfigError on fingerprint mismatch (when expected), and
        the container's corruption/version errors.
        """
        meta, arrays = read_checkpoint(path)
        if meta.get("kind") != "ddpg-agent":
            raise CorruptCheckpointError(
                f"not a ddpg-agent checkpoint: kind={meta.get('kind')!r}")
        if (expected_fingerprint is not None
                and meta.get("config_fingerprint") != expected_fingerprint):
            raise CheckpointConfigError(
                "checkpoint config fingerprint "
                f"{meta.get('config_fingerprint')!r} does not match the "
                f"active configuration {expected_fingerprint!r}")
        cfg_d = dict(meta["ddpg_config"])
        cfg_d["hidden_dims"] = tuple(cfg_d.get("hidden_dims", ()))
        cfg = DdpgConfig(**cfg_d)
        agent = cls(cfg, obs_dim=int(meta["obs_dim"]),
                    action_bound=float(meta["action_bound"]),
                    master_seed=int(meta.get("master_seed", 0)),
                    config_fingerprint=meta.get("config_fingerprint", ""))
        if (agent.actor.layer_dims != list(meta["actor_dims"])
                or agent.critic.layer_dims != list(meta["critic_dims"])):
            raise CheckpointShapeError(
                f"stored dims {meta['actor_dims']}/{meta['critic_dims']} do "
                f"not match rebuilt dims {agent.actor.layer_dims}/"
                f"{agent.critic.layer_dims}")
        for name, net in zip(cls._NET_NAMES, agent._nets()):
            for i, (w, b) in enumerate(zip(net.weights, net.biases)):
                _load_into(arrays, f"{name}/W{i}", w)
                _load_into(arrays, f"{name}/b{i}", b)
        for name, state in (("adam_actor", agent.adam_actor),
                            ("adam_critic", agent.adam_critic)):
            for i, (m, v) in enumerate(zip(state.m, state.v)):
                _load_into(arrays, f"{name}/m{i}", m)
                _load_into(arrays, f"{name}/v{i}", v)
        agent.adam_actor.t = int(meta["adam_t_actor"])
        agent.adam_critic.t = int(meta["adam_t_critic"])
        agent.episode = int(meta["episode"])
        agent.global_step = int(meta["global_step"])
        _set_rng_state(agent.noise_rng, meta["rng_noise"])
        _set_rng_state(agent.sample_rng, meta["rng_sample"])
        _verify_probe(agent, path)
        return agent


def _rng_state(gen: np.random.Generator) -> dict:
    return gen.bit_generator.state

def _set_rng_state(gen: np.random.Generator, state: dict) -> None:
    gen.bit_generator.state = state


def _load_into(arrays: dict, name: str, out: np.ndarray) -> None:
    if name not in arrays:
        raise CheckpointShapeError(f"checkpoint missing array {name!r}")
    src = arrays[name]
    if src.shape != out.shape:
        raise CheckpointShapeError(
            f"array {name!r} has shape {src.shape}, expected {out.shape}")
    out[...] = src.astype(out.dtype)


def _verify_probe(agent: DdpgAgent, path) -> None:
    doc = read_probe(path)
    if doc is None:
        log.warning("no probe file beside %s; skipping forward verification",
                    path)
        return
    probe = np.asarray(doc["input"], dtype=agent.np_dtype)
    actor_out = np.atleast_1d(agent.actor.forward(probe))
    want = np.asarray(doc["outputs"]["actor"])
    if not np.allclose(actor_out, want, rtol=1e-4, atol=1e-6):
        raise CorruptCheckpointError(
            f"probe regression failed: actor {actor_out} != {want}")

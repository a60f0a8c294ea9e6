"""Tests for run orchestration: per-episode rng derivation, run
specifications, csv artifacts, aggregation, and the stochastic-start recall
evaluation.

The moving-average oracle is a brute-force window loop computed in this
file; rng derivation is checked against the seed-sequence construction it
documents.
"""

import csv
import math
from pathlib import Path

import numpy as np
import pytest

from advped.ddpg import DdpgConfig
from advped.harness import (AGENT_KINDS, RECALL_Y_MAX, RECALL_Y_MIN,
                            EpisodeResult, RecallStats, RunSpec, episode_rng,
                            fmt_float, moving_average, recall_eval,
                            recall_start, run_policy_episode, train_multi,
                            train_run, write_curves_csv, write_metrics_csv,
                            write_recall_csv)
from advped.env import CrossingEnv
from advped.reward import RewardDesign
from advped.simcore import WorldConfig
from advped.socialforce import SocialForceParams

SMALL_DDPG = DdpgConfig(batch_size=8, buffer_capacity=64, warmup_steps=4,
                        update_interval=4, hidden_dims=(8, 4))
SMALL_WORLD = WorldConfig(max_steps=30)


def small_spec(tmp_path, **kw):
    base = dict(agent="rl_momentum", world=SMALL_WORLD, ddpg=SMALL_DDPG,
                episodes=2, seed=0, out_dir=tmp_path / "run",
                checkpoint_interval=500)
    base.update(kw)
    return RunSpec(**base)


class TestEpisodeRng:
    def test_matches_seed_sequence_construction(self):
        got = episode_rng(7, 3).uniform()
        ss = np.random.SeedSequence(entropy=7, spawn_key=(4, 3))
        want = np.random.default_rng(ss).uniform()
        assert got == want

    def test_streams_independent(self):
        draws = {(s, e): episode_rng(1, e, stream=s).uniform()
                 for s in (4, 9) for e in range(5)}
        assert len(set(draws.values())) == len(draws)

    def test_repeatable(self):
        a = episode_rng(5, 10).normal(size=4)
        b = episode_rng(5, 10).normal(size=4)
        np.testing.assert_array_equal(a, b)


class TestRunSpec:
    def test_agent_kinds(self):
        assert set(AGENT_KINDS) == {"socialforce", "rl_baseline",
                                    "rl_momentum"}
        with pytest.raises(ValueError):
            RunSpec(agent="q-learning")

    @pytest.mark.parametrize("kw", [dict(episodes=0),
                                    dict(checkpoint_interval=0),
                                    dict(recall_n=0)])
    def test_invalid_rejected(self, kw):
        with pytest.raises(ValueError):
            RunSpec(**kw)

    def test_out_dir_coerced(self):
        spec = RunSpec(out_dir="runs/x")
        assert isinstance(spec.out_dir, Path)

    def test_design_mapping(self):
        assert RunSpec(agent="rl_baseline").design is \
            RewardDesign.BASELINE_SIGNAL
        assert RunSpec(agent="rl_momentum").design is \
            RewardDesign.COLLISION_MOMENTUM

    def test_fingerprint_tracks_eval_relevant_fields(self):
        base = RunSpec()
        assert len(base.fingerprint()) == 64
        assert base.fingerprint() == RunSpec().fingerprint()
        # seeds and episode counts do not affect what an eval must agree on
        assert RunSpec(seed=9, episodes=7).fingerprint() == base.fingerprint()
        other_world = RunSpec(world=WorldConfig(mass_ped=80.0))
        assert other_world.fingerprint() != base.fingerprint()
        other_net = RunSpec(ddpg=DdpgConfig(hidden_dims=(64, 32)))
        assert other_net.fingerprint() != base.fingerprint()


class TestMovingAverage:
    def brute(self, x, w):
        out = []
        for i in range(len(x)):
            lo = max(0, i - w // 2)
            hi = min(len(x) - 1, i + (w - 1) // 2)
            out.append(sum(x[lo:hi + 1]) / (hi - lo + 1))
        return out

    def test_window_one_is_identity(self):
        x = [3.0, -1.0, 2.0]
        np.testing.assert_array_equal(moving_average(x, 1), x)

    @pytest.mark.parametrize("window", [2, 3, 5, 20])
    def test_matches_brute_force(self, window):
        rng = np.random.default_rng(2)
        x = rng.normal(0, 1, 57)
        np.testing.assert_allclose(moving_average(x, window),
                                   self.brute(list(x), window), rtol=1e-12)

    def test_small_example(self):
        # window 2 averages the current and previous samples
        got = moving_average([0.0, 2.0, 4.0, 6.0], 2)
        np.testing.assert_allclose(got, [0.0, 1.0, 3.0, 5.0], rtol=1e-12)

    def test_empty(self):
        assert moving_average([], 4).shape == (0,)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            moving_average([1.0], 0)


class TestFmtFloat:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for x in rng.normal(0, 100, 50):
            assert float(fmt_float(x)) == float(x)

    def test_plain_decimal(self):
        assert fmt_float(0.1) == "0.1"
        assert fmt_float(np.float64(2.0)) == "2.0"


class TestRecallStart:
    def test_in_rectangle(self):
        cfg = WorldConfig()
        for i in range(50):
            x, y = recall_start(cfg, seed=3, index=i)
            assert cfg.ped_start_x_min <= x <= cfg.ped_start_x_max
            assert RECALL_Y_MIN <= y <= RECALL_Y_MAX

    def test_deterministic_and_indexed(self):
        cfg = WorldConfig()
        assert recall_start(cfg, 3, 7) == recall_start(cfg, 3, 7)
        assert recall_start(cfg, 3, 7) != recall_start(cfg, 3, 8)
        assert recall_start(cfg, 3, 7) != recall_start(cfg, 4, 7)


class TestRecallStats:
    def rec(self, collided, m2=0.0, m1=0.0):
        return {"collided": collided, "momentum_2d": m2, "momentum_1d": m1}

    def test_no_collisions_undefined(self):
        s = RecallStats.from_records([self.rec(False)] * 4)
        assert s.n_episodes == 4 and s.n_collisions == 0
        assert s.mean_momentum_2d is None
        assert s.std_momentum_2d is None
        assert s.mean_momentum_1d is None

    def test_single_collision_no_std(self):
        s = RecallStats.from_records([self.rec(True, 100.0, 50.0),
                                      self.rec(False)])
        assert s.n_collisions == 1
        assert s.mean_momentum_2d == 100.0
        assert s.std_momentum_2d is None
        assert s.mean_momentum_1d == 50.0

    def test_means_over_collisions_only(self):
        recs = [self.rec(True, 100.0, 10.0), self.rec(True, 300.0, 30.0),
                self.rec(False, 999.0, 999.0)]
        s = RecallStats.from_records(recs)
        assert s.mean_momentum_2d == pytest.approx(200.0)
        assert s.std_momentum_2d == pytest.approx(
            float(np.std([100.0, 300.0], ddof=1)))
        assert s.mean_momentum_1d == pytest.approx(20.0)


class TestCsvWriters:
    def test_metrics_round_trip(self, tmp_path):
        rows = [EpisodeResult(0, -1.5, 30, False, 0.0, 0.0, 0.157),
                EpisodeResult(1, 6687.5, 12, True, 660.25, 652.5, 0.156)]
        path = tmp_path / "metrics.csv"
        write_metrics_csv(path, rows)
        with open(path, newline="") as f:
            got = list(csv.DictReader(f))
        assert len(got) == 2
        assert got[1]["episode"] == "1"
        assert got[1]["collided"] == "1"
        assert float(got[1]["reward"]) == 6687.5
        assert float(got[1]["momentum_2d"]) == 660.25

    def test_recall_csv(self, tmp_path):
        stats = RecallStats.from_records([
            {"start_x": 41.0, "start_y": -5.5, "collided": True,
             "momentum_2d": 10.0, "momentum_1d": 5.0, "steps": 7}])
        path = tmp_path / "recall.csv"
        write_recall_csv(path, stats)
        with open(path, newline="") as f:
            got = list(csv.DictReader(f))
        assert got[0]["collided"] == "1"
        assert float(got[0]["start_y"]) == -5.5

    def test_curves_csv(self, tmp_path):
        path = tmp_path / "curves.csv"
        write_curves_csv(path, [0, 1], [1.0, 2.0], [0.5, 1.5], [1.5, 2.5])
        with open(path, newline="") as f:
            got = list(csv.DictReader(f))
        assert [r["mean"] for r in got] == ["1.0", "2.0"]


class TestTrainRun:
    def test_artifacts_and_rows(self, tmp_path):
        spec = small_spec(tmp_path)
        res = train_run(spec)
        assert res["metrics"].exists()
        assert res["final_checkpoint"].exists()
        assert len(res["rows"]) == 2
        assert res["agent"].episode == 2
        with open(res["metrics"], newline="") as f:
            got = list(csv.DictReader(f))
        assert len(got) == 2
        assert int(got[0]["steps"]) >= 1

    def test_deterministic_metrics_bytes(self, tmp_path):
        a = train_run(small_spec(tmp_path, out_dir=tmp_path / "a"))
        b = train_run(small_spec(tmp_path, out_dir=tmp_path / "b"))
        assert a["metrics"].read_bytes() == b["metrics"].read_bytes()

    def test_checkpoint_interval(self, tmp_path):
        spec = small_spec(tmp_path, episodes=4, checkpoint_interval=2)
        res = train_run(spec)
        out = res["out_dir"]
        assert (out / "ckpt_ep00002.ckpt").exists()
        # the final episode saves final.ckpt, not a numbered duplicate
        assert not (out / "ckpt_ep00004.ckpt").exists()
        assert (out / "final.ckpt").exists()

    def test_socialforce_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            train_run(small_spec(tmp_path, agent="socialforce"))

    def test_progress_callback(self, tmp_path):
        seen = []
        train_run(small_spec(tmp_path), progress=seen.append)
        assert [r.episode for r in seen] == [0, 1]
        assert all(isinstance(r, EpisodeResult) for r in seen)


class TestTrainMulti:
    def test_aggregates(self, tmp_path):
        spec = small_spec(tmp_path, out_dir=tmp_path / "multi")
        res = train_multi(spec, n_seeds=2, smooth_window=2)
        assert res["curves"].exists()
        assert res["mean"].shape == (2,)
        assert len(res["runs"]) == 2
        assert (tmp_path / "multi" / "run_0" / "metrics.csv").exists()
        assert (tmp_path / "multi" / "run_1" / "metrics.csv").exists()
        assert res["failures"] == []

    def test_needs_two_seeds(self, tmp_path):
        with pytest.raises(ValueError):
            train_multi(small_spec(tmp_path), n_seeds=1)

    def test_failure_tolerance(self, tmp_path, monkeypatch):
        import advped.harness as hmod
        real = hmod.train_run

        def flaky(spec, progress=None):
            if spec.seed == 1:
                raise RuntimeError("injected failure")
            return real(spec, progress=progress)

        monkeypatch.setattr(hmod, "train_run", flaky)
        spec = small_spec(tmp_path, out_dir=tmp_path / "multi")
        res = hmod.train_multi(spec, n_seeds=3, smooth_window=2)
        assert len(res["runs"]) == 2
        assert len(res["failures"]) == 1
        assert res["failures"][0][0] == 1

    def test_all_failed(self, tmp_path, monkeypatch):
        import advped.harness as hmod

        def broken(spec, progress=None):
            raise RuntimeError("boom")

        monkeypatch.setattr(hmod, "train_run", broken)
        with pytest.raises(RuntimeError):
            hmod.train_multi(small_spec(tmp_path), n_seeds=2)


class TestRunPolicyEpisode:
    def test_collision_record(self):
        env = CrossingEnv(WorldConfig())
        rec = run_policy_episode(env, lambda obs: 0.0, start=(2.0, -0.1),
                                 collect=True)
        assert rec["collided"]
        assert rec["steps"] == 2
        assert rec["momentum_2d"] > 0
        assert rec["start_x"] == 2.0 and rec["start_y"] == -0.1
        assert len(rec["trajectory"]) == 2
        row = rec["trajectory"][0]
        assert {"t", "x_ped", "y_ped", "x_veh", "y_veh", "v_ped", "v_veh",
                "theta_ped", "reward", "braking"} <= set(row)

    def test_timeout_record(self):
        env = CrossingEnv(WorldConfig(max_steps=10))
        rec = run_policy_episode(env, lambda obs: 0.0, start=(55.0, -5.0))
        assert not rec["collided"]
        assert rec["steps"] == 10
        assert rec["trajectory"] == []


class TestRecallEval:
    def test_deterministic(self):
        cfg = WorldConfig(max_steps=40)
        a = recall_eval(lambda obs: 0.0, cfg, n=5, seed=3)
        b = recall_eval(lambda obs: 0.0, cfg, n=5, seed=3)
        assert a.records == b.records

    def test_starts_in_rectangle(self):
        cfg = WorldConfig(max_steps=5)
        stats = recall_eval(lambda obs: 0.0, cfg, n=20, seed=1)
        for r in stats.records:
            assert 40.0 <= r["start_x"] <= 60.0
            assert -6.0 <= r["start_y"] <= -3.0

    def test_no_collision_stats_undefined(self):
        cfg = WorldConfig(max_steps=40)
        stats = recall_eval(lambda obs: 0.0, cfg, n=5, seed=3)
        assert stats.n_collisions == 0
        assert stats.mean_momentum_2d is None

    def test_socialforce_needs_params(self):
        with pytest.raises(ValueError):
            recall_eval("socialforce", WorldConfig(), n=2, seed=0)

    def test_socialforce_path_runs(self):
        cfg = WorldConfig(max_steps=50)
        stats = recall_eval("socialforce", cfg, n=3, seed=0,
                            sf_params=SocialForceParams())
        assert stats.n_episodes == 3

    def test_n_validated(self):
        with pytest.raises(ValueError):
            recall_eval(lambda obs: 0.0, WorldConfig(), n=0, seed=0)

"""Tests for the kinematic core: angle wrap, motion updates, brake gate."""

import math

import numpy as np
import pytest

from advped.simcore import (PedestrianState, SimState, Vec2, VehicleState,
                            WorldConfig, brake_controller, distance,
                            in_driveway, step_pedestrian, step_vehicle,
                            wrap_angle)


CFG = WorldConfig()


class TestWrapAngle:
    def test_identity_in_range(self):
        for a in (-3.0, -1.0, 0.0, 1.0, math.pi):
            assert wrap_angle(a) == pytest.approx(a)

    def test_wraps_to_half_open_interval(self):
        rng = np.random.default_rng(0)
        for a in rng.uniform(-50.0, 50.0, size=500):
            w = wrap_angle(float(a))
            assert -math.pi < w <= math.pi
            # same point on the circle
            assert math.cos(w) == pytest.approx(math.cos(a), abs=1e-12)
            assert math.sin(w) == pytest.approx(math.sin(a), abs=1e-12)

    def test_pi_maps_to_pi_not_minus_pi(self):
        assert wrap_angle(math.pi) == pytest.approx(math.pi)
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)
        assert wrap_angle(3.0 * math.pi) == pytest.approx(math.pi)


class TestStepPedestrian:
    def test_straight_step(self):
        ped = PedestrianState(Vec2(0.0, 0.0), speed=2.0, heading=0.0)
        out = step_pedestrian(ped, 0.0, CFG)
        assert out.position.x == pytest.approx(0.1)
        assert out.position.y == pytest.approx(0.0)
        assert out.speed == 2.0

    def test_walk_negative_x(self):
        ped = PedestrianState(Vec2(0.0, 0.0), speed=2.0, heading=math.pi)
        out = step_pedestrian(ped, 0.0, CFG)
        assert out.position.x == pytest.approx(-0.1)
        assert out.position.y == pytest.approx(0.0, abs=1e-12)
        assert out.heading == pytest.approx(math.pi)

    def test_axis_aligned_step_up(self):
        ped = PedestrianState(Vec2(50.0, -5.0), speed=2.0,
                              heading=math.pi / 2.0)
        out = step_pedestrian(ped, 0.0, CFG)
        assert out.position.x == pytest.approx(50.0)
        assert out.position.y == pytest.approx(-4.9)

    def test_out_of_bound_delta_clamped(self):
        ped = PedestrianState(Vec2(0.0, 0.0), speed=2.0, heading=0.0)
        big = step_pedestrian(ped, 10.0, CFG)
        lim = step_pedestrian(ped, CFG.action_bound, CFG)
        assert big == lim

    def test_step_length_invariant(self):
        rng = np.random.default_rng(1)
        ped = PedestrianState(Vec2(3.0, -2.0), speed=2.0, heading=0.3)
        for _ in range(300):
            nxt = step_pedestrian(ped, float(rng.uniform(-2.0, 2.0)), CFG)
            step_len = math.hypot(nxt.position.x - ped.position.x,
                                  nxt.position.y - ped.position.y)
            assert step_len == pytest.approx(CFG.ped_speed * CFG.dt,
                                             rel=1e-12)
            assert -math.pi < nxt.heading <= math.pi
            ped = nxt

    def test_deterministic(self):
        ped = PedestrianState(Vec2(1.0, 2.0), speed=2.0, heading=-0.7)
        a = step_pedestrian(ped, 0.4, CFG)
        b = step_pedestrian(ped, 0.4, CFG)
        assert a == b


class TestStepVehicle:
    def test_braking_arithmetic(self):
        veh = VehicleState(Vec2(0.0, 0.0), speed=7.0)
        out = step_vehicle(veh, 2.5, CFG)
        assert out.speed == pytest.approx(6.875)

    def test_coasting(self):
        veh = VehicleState(Vec2(0.0, 0.0), speed=7.0)
        out = step_vehicle(veh, 0.0, CFG)
        assert out.speed == pytest.approx(7.0)
        assert out.position.x == pytest.approx(0.35)

    def test_stops_within_step(self):
        # v=0.1 stops after 0.04 s: x advances 0.1*0.04 - 0.5*2.5*0.04^2
        veh = VehicleState(Vec2(0.0, 0.0), speed=0.1)
        out = step_vehicle(veh, 2.5, CFG)
        assert out.speed == 0.0
        assert out.position.x == pytest.approx(0.002, rel=1e-12)

    def test_stopped_stays_stopped(self):
        veh = VehicleState(Vec2(4.0, 0.0), speed=0.0)
        out = step_vehicle(veh, 2.5, CFG)
        assert out.speed == 0.0
        assert out.position.x == pytest.approx(4.0)

    def test_speed_monotone_nonincreasing(self):
        rng = np.random.default_rng(2)
        veh = VehicleState(Vec2(0.0, 0.0), speed=7.0)
        prev = veh.speed
        for _ in range(300):
            decel = CFG.brake_decel if rng.random() < 0.5 else 0.0
            veh = step_vehicle(veh, decel, CFG)
            assert 0.0 <= veh.speed <= prev
            assert veh.position.y == 0.0
            prev = veh.speed

    def test_stopping_distance_matches_fine_integration(self):
        # closed-form truncation vs 1e-5 s explicit Euler
        veh = VehicleState(Vec2(0.0, 0.0), speed=7.0)
        while veh.speed > 0.0:
            veh = step_vehicle(veh, 2.5, CFG)
        x, v, h = 0.0, 7.0, 1e-5
        while v > 0.0:
            x += v * h
            v -= 2.5 * h
        assert veh.position.x == pytest.approx(x, abs=1e-3)
        assert veh.position.x == pytest.approx(7.0 ** 2 / (2 * 2.5),
                                               rel=1e-12)


class TestDrivewayAndDistance:
    def test_sidewalk_start_is_outside(self):
        assert not in_driveway(Vec2(50.0, -5.0), CFG)

    def test_lane_center_inside(self):
        assert in_driveway(Vec2(10.0, 0.0), CFG)

    def test_boundary_closed(self):
        assert in_driveway(Vec2(0.0, -3.0), CFG)
        assert in_driveway(Vec2(0.0, 3.0), CFG)
        assert not in_driveway(Vec2(0.0, -3.0000001), CFG)

    def test_distance_start_positions(self):
        ped = PedestrianState(Vec2(50.0, -5.0), 2.0, 0.0)
        veh = VehicleState(Vec2(0.0, 0.0), 7.0)
        assert distance(ped, veh) == pytest.approx(math.sqrt(2525.0))

    def test_distance_coincident_and_345(self):
        veh = VehicleState(Vec2(0.0, 0.0), 7.0)
        assert distance(PedestrianState(Vec2(0.0, 0.0), 2.0, 0.0),
                        veh) == 0.0
        assert distance(PedestrianState(Vec2(3.0, 4.0), 2.0, 0.0),
                        veh) == pytest.approx(5.0)


class TestBrakeController:
    def test_in_driveway_close_brakes(self):
        ped = PedestrianState(Vec2(9.9, 0.0), 2.0, 0.0)
        veh = VehicleState(Vec2(0.0, 0.0), 7.0)
        assert brake_controller(ped, veh, CFG) == CFG.brake_decel

    def test_in_driveway_far_does_not(self):
        ped = PedestrianState(Vec2(10.1, 0.0), 2.0, 0.0)
        veh = VehicleState(Vec2(0.0, 0.0), 7.0)
        assert brake_controller(ped, veh, CFG) == 0.0

    def test_sidewalk_close_does_not(self):
        ped = PedestrianState(Vec2(3.0, -4.0), 2.0, 0.0)
        veh = VehicleState(Vec2(0.0, 0.0), 7.0)
        assert distance(ped, veh) == pytest.approx(5.0)
        assert brake_controller(ped, veh, CFG) == 0.0

    def test_pure_function(self):
        ped = PedestrianState(Vec2(5.0, 1.0), 2.0, 0.0)
        veh = VehicleState(Vec2(0.0, 0.0), 7.0)
        outs = {brake_controller(ped, veh, CFG) for _ in range(10)}
        assert outs == {CFG.brake_decel}


class TestWorldConfig:
    def test_defaults_match_scenario_constants(self):
        assert CFG.dt == 0.05
        assert CFG.ped_speed == 2.0
        assert CFG.veh_speed_init == 7.0
        assert CFG.brake_decel == 2.5
        assert CFG.brake_trigger_dist == 10.0
        assert CFG.mass_ped == 70.0
        assert CFG.mass_veh == 1500.0
        assert CFG.collision_radius == 1.5
        assert CFG.max_steps == 600
        assert CFG.action_bound == pytest.approx(math.pi / 2.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            WorldConfig(dt=0.0)
        with pytest.raises(ValueError):
            WorldConfig(mass_ped=-1.0)
        with pytest.raises(ValueError):
            WorldConfig(driveway_y_min=3.0, driveway_y_max=-3.0)
        with pytest.raises(ValueError):
            WorldConfig(ped_start_x_min=61.0, ped_start_x_max=60.0)
        with pytest.raises(ValueError):
            WorldConfig(max_steps=0)

    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(KeyError):
            WorldConfig.from_dict({"dtt": 0.05})
        cfg = WorldConfig.from_dict({"dt": 0.1, "veh_start": [1.0, 0.0]})
        assert cfg.dt == 0.1
        assert cfg.veh_start == Vec2(1.0, 0.0)

    def test_simstate_elapsed(self):
        sim = SimState(pedestrian=PedestrianState(Vec2(0, 0), 2.0, 0.0),
                       vehicle=VehicleState(Vec2(0, 0), 7.0),
                       step_index=40, dt=0.05)
        assert sim.elapsed == pytest.approx(2.0)

import math

import numpy as np
import pytest

from iteqd.gait import (
    DESCRIPTOR_KINDS,
    REFERENCE_TRIPOD,
    SIGNAL_TABLE_SIZE,
    SMOOTH_SIGMA_S,
    GaitParams,
    TrajectoryRecord,
    command_schedule,
    composed_descriptor,
    descriptor,
    descriptor_dim,
    descriptor_pool,
    gait_signal,
    joint_commands,
    load_trajectory_csv,
    random_descriptor_basis,
    save_trajectory_csv,
)
from _oracles import oracle_descriptor, random_trajectory


class TestGaitSignal:
    def test_zero_mean_at_half_duty(self):
        ts = np.arange(SIGNAL_TABLE_SIZE) / SIGNAL_TABLE_SIZE
        vals = gait_signal(ts, alpha=1.0, phi=0.0, tau=0.5)
        assert abs(vals.mean()) < 1e-12

    def test_plateau_center_saturates(self):
        # kernel support (3 sigma = 0.18 s) is shorter than the half-duty
        # plateau, so the center keeps the full amplitude
        assert gait_signal(0.25, alpha=1.0, phi=0.0, tau=0.5) == pytest.approx(1.0, abs=1e-6)
        assert gait_signal(0.75, alpha=1.0, phi=0.0, tau=0.5) == pytest.approx(-1.0, abs=1e-6)

    def test_phase_is_exact_circular_delay(self):
        rng = np.random.default_rng(0)
        ts = rng.uniform(0.0, 3.0, 100)
        shifted = gait_signal(ts, 0.8, 0.25, 0.35)
        base = gait_signal(ts - 0.25, 0.8, 0.0, 0.35)
        np.testing.assert_array_equal(shifted, base)

    def test_periodicity(self):
        rng = np.random.default_rng(1)
        ts = rng.uniform(0.0, 1.0, 200) * 0.999 + 0.0005  # stay off cell edges
        a = gait_signal(ts, 1.0, 0.1, 0.45)
        b = gait_signal(ts + 1.0, 1.0, 0.1, 0.45)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)

    def test_amplitude_scales_linearly(self):
        ts = np.linspace(0, 1, 50, endpoint=False)
        full = gait_signal(ts, 1.0, 0.0, 0.3)
        half = gait_signal(ts, 0.5, 0.0, 0.3)
        np.testing.assert_allclose(half, 0.5 * full, rtol=0, atol=1e-15)

    def test_zero_amplitude_is_zero(self):
        ts = np.linspace(0, 1, 50)
        np.testing.assert_array_equal(gait_signal(ts, 0.0, 0.3, 0.6), np.zeros(50))

    def test_matches_direct_convolution_reference(self):
        # independent reference: explicit circular convolution as a double loop
        tau = 0.35
        N = SIGNAL_TABLE_SIZE
        dt = 1.0 / N
        half = int(round(3 * SMOOTH_SIGMA_S / dt))
        weights = [math.exp(-((k * dt) ** 2) / (2 * SMOOTH_SIGMA_S**2)) for k in range(-half, half + 1)]
        wsum = sum(weights)
        weights = [w / wsum for w in weights]

        def square(i):
            return 1.0 if (i % N) / N < tau else -1.0

        for i in (0, 17, 349, 350, 351, 500, 999):
            ref = sum(w * square(i - (k - half)) for k, w in enumerate(weights))
            got = gait_signal(i / N, 1.0, 0.0, tau)
            assert got == pytest.approx(ref, abs=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            gait_signal(0.0, alpha=1.2, phi=0.0, tau=0.5)
        with pytest.raises(ValueError):
            gait_signal(0.0, alpha=1.0, phi=-0.1, tau=0.5)
        with pytest.raises(ValueError):
            gait_signal(0.0, alpha=1.0, phi=0.0, tau=1.5)


class TestJointCommands:
    def test_third_dof_mirrors_second(self):
        rng = np.random.default_rng(2)
        flat = rng.integers(21, size=36) / 20
        params = GaitParams.from_flat(flat)
        for t in rng.uniform(0, 2, 10):
            cmd = joint_commands(params, t)
            for leg in range(6):
                assert cmd[3 * leg + 2] == -cmd[3 * leg + 1]

    def test_reference_tripod_groups_in_antiphase(self):
        phases = REFERENCE_TRIPOD.phase2
        group_a = {phases[i] for i in (1, 2, 5)}  # legs 2, 3, 6
        group_b = {phases[i] for i in (0, 3, 4)}  # legs 1, 4, 5
        assert group_a == {0.25}
        assert group_b == {0.75}
        # antiphase: elevation command of one group is the other delayed by
        # half a period
        for t in np.linspace(0, 1, 7):
            a = gait_signal(t, 0.25, 0.25, 0.5)
            b = gait_signal(t - 0.5, 0.25, 0.75, 0.5)
            assert a == pytest.approx(b, abs=1e-12)

    def test_zero_amplitude_silences_leg(self):
        flat = REFERENCE_TRIPOD.to_flat()
        flat[0] = 0.0  # leg 1 amplitude of the first DOF
        params = GaitParams.from_flat(flat)
        cmds = command_schedule(params, duration_s=1.0)
        assert np.all(cmds[:, 0] == 0.0)

    def test_schedule_shape_and_step(self):
        cmds = command_schedule(REFERENCE_TRIPOD, duration_s=5.0)
        assert cmds.shape == (167, 18)  # ceil(5 / 0.03) command ticks

    def test_from_flat_round_trip(self):
        flat = REFERENCE_TRIPOD.to_flat()
        again = GaitParams.from_flat(flat)
        assert again == REFERENCE_TRIPOD

    def test_level_set_enforced(self):
        with pytest.raises(ValueError):
            GaitParams.from_flat(np.full(36, 0.033))


class TestTrajectoryRecord:
    def test_validation(self):
        rng = np.random.default_rng(3)
        traj = random_trajectory(rng)
        with pytest.raises(ValueError):
            TrajectoryRecord(
                contacts=traj.contacts,
                torso_angles=traj.torso_angles,
                torso_pos=traj.torso_pos,
                leg_energy=-traj.leg_energy - 1.0,
                leg_grf=traj.leg_grf,
                leg_angles=traj.leg_angles,
            )
        decreasing = traj.leg_energy.copy()
        decreasing[10] = decreasing[9] - 1.0
        with pytest.raises(ValueError):
            TrajectoryRecord(
                contacts=traj.contacts,
                torso_angles=traj.torso_angles,
                torso_pos=traj.torso_pos,
                leg_energy=decreasing,
                leg_grf=traj.leg_grf,
                leg_angles=traj.leg_angles,
            )
        with pytest.raises(ValueError):
            TrajectoryRecord(
                contacts=np.zeros((0, 6), dtype=bool),
                torso_angles=np.zeros((0, 3)),
                torso_pos=np.zeros((0, 3)),
                leg_energy=np.zeros((0, 6)),
                leg_grf=np.zeros((0, 6)),
                leg_angles=np.zeros((0, 6, 3)),
            )

    def test_csv_round_trip(self, tmp_path):
        traj = random_trajectory(np.random.default_rng(4))
        path = tmp_path / "traj.csv"
        save_trajectory_csv(traj, path)
        again = load_trajectory_csv(path)
        np.testing.assert_array_equal(again.contacts, traj.contacts)
        np.testing.assert_array_equal(again.torso_angles, traj.torso_angles)
        np.testing.assert_array_equal(again.torso_pos, traj.torso_pos)
        np.testing.assert_array_equal(again.leg_energy, traj.leg_energy)
        np.testing.assert_array_equal(again.leg_grf, traj.leg_grf)
        np.testing.assert_array_equal(again.leg_angles, traj.leg_angles)
        assert again.dt == traj.dt


class TestDescriptors:
    def test_duty_factor_all_contact(self):
        traj = random_trajectory(np.random.default_rng(5))
        traj.contacts[:] = True
        np.testing.assert_array_equal(descriptor("duty_factor", traj), np.ones(6))

    def test_deviation_straight_constant_speed(self):
        K = 50
        dt = 0.015
        times = (np.arange(K) + 1) * dt
        pos = np.zeros((K, 3))
        pos[:, 1] = 0.02 * times  # constant forward speed from the origin
        traj = TrajectoryRecord(
            contacts=np.ones((K, 6), dtype=bool),
            torso_angles=np.zeros((K, 3)),
            torso_pos=pos,
            leg_energy=np.zeros((K, 6)),
            leg_grf=np.zeros((K, 6)),
            leg_angles=np.zeros((K, 6, 3)),
        )
        np.testing.assert_allclose(descriptor("deviation", traj), np.zeros(3), atol=1e-12)

    @pytest.mark.parametrize("kind", DESCRIPTOR_KINDS)
    def test_matches_transliteration_oracle(self, kind):
        rng = np.random.default_rng(6)
        for _ in range(50):
            traj = random_trajectory(rng, K=int(rng.integers(2, 60)))
            got = descriptor(kind, traj)
            want = oracle_descriptor(kind, traj)
            assert got.shape == (descriptor_dim(kind),)
            np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)

    def test_outputs_in_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            traj = random_trajectory(rng)
            for kind in DESCRIPTOR_KINDS:
                vals = descriptor(kind, traj)
                assert np.all(vals >= 0.0) and np.all(vals <= 1.0)

    def test_relative_descriptors_sum_to_one(self):
        rng = np.random.default_rng(8)
        traj = random_trajectory(rng)
        assert descriptor("energy_relative", traj).sum() == pytest.approx(1.0, abs=1e-9)
        assert descriptor("grf_relative", traj).sum() == pytest.approx(1.0, abs=1e-9)

    def test_zero_denominator_gives_uniform(self):
        traj = random_trajectory(np.random.default_rng(9))
        traj.leg_energy[:] = 0.0
        traj.leg_grf[:] = 0.0
        np.testing.assert_array_equal(descriptor("energy_relative", traj), np.full(6, 1 / 6))
        np.testing.assert_array_equal(descriptor("grf_relative", traj), np.full(6, 1 / 6))

    def test_duty_factor_time_reversal_invariant(self):
        traj = random_trajectory(np.random.default_rng(10))
        reversed_traj = TrajectoryRecord(
            contacts=traj.contacts[::-1].copy(),
            torso_angles=traj.torso_angles,
            torso_pos=traj.torso_pos,
            leg_energy=traj.leg_energy,
            leg_grf=traj.leg_grf,
            leg_angles=traj.leg_angles,
        )
        np.testing.assert_array_equal(
            descriptor("duty_factor", traj), descriptor("duty_factor", reversed_traj)
        )

    def test_orientation_components_bounded_pairwise(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            vals = descriptor("orientation", random_trajectory(rng))
            for axis in range(3):
                assert vals[2 * axis] + vals[2 * axis + 1] <= 1.0 + 1e-12

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            descriptor("sideways_shuffle", random_trajectory(np.random.default_rng(12)))


class TestRandomBasis:
    def test_pool_size_is_63(self):
        assert len(descriptor_pool()) == 63

    def test_deterministic_under_seed(self):
        assert random_descriptor_basis(7) == random_descriptor_basis(7)

    def test_no_duplicates(self):
        for seed in range(300):
            basis = random_descriptor_basis(seed)
            assert len(basis) == 6
            assert len(set(basis)) == 6

    def test_composed_matches_direct(self):
        traj = random_trajectory(np.random.default_rng(13))
        basis = random_descriptor_basis(3)
        vals = composed_descriptor(basis, traj)
        for v, (kind, comp) in zip(vals, basis):
            assert v == descriptor(kind, traj)[comp]

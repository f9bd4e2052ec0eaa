import math

import numpy as np
import pytest

from fairbeam.channel import (
    ArrayGeometry,
    GroupAngularSpec,
    PlacementBounds,
    UePlacement,
    angle_to_gamma,
    draw_placement,
    generate_channel,
    phase_response,
    steering_vector,
)
from fairbeam.errors import DomainError

from conftest import table_groups


class TestAngleToGamma:
    def test_boresight(self):
        gx, gy = angle_to_gamma(90.0, 0.0)
        assert np.isclose(gx, 1.0) and np.isclose(gy, 0.0, atol=1e-15)

    def test_zenith(self):
        gx, gy = angle_to_gamma(0.0, 123.0)
        assert gx == 0.0 and gy == 0.0

    def test_generic_value(self):
        # sin(50)cos(25), sin(50)sin(25) evaluated independently to 4 decimals
        gx, gy = angle_to_gamma(50.0, 25.0)
        assert round(gx, 4) == 0.6943
        assert round(gy, 4) == 0.3237


class TestPhaseResponse:
    def test_zero_phase(self):
        geom = ArrayGeometry(2, 2)
        assert np.allclose(phase_response(geom, 0.0, 0.0), np.ones(4))

    def test_half_wavelength_flip(self):
        geom = ArrayGeometry(2, 1)
        assert np.allclose(phase_response(geom, 1.0, 0.0), [1.0, -1.0])

    def test_unit_modulus(self):
        geom = ArrayGeometry(3, 5)
        rng = np.random.default_rng(0)
        for _ in range(10):
            v = phase_response(geom, rng.uniform(-1, 1), rng.uniform(-1, 1))
            assert np.allclose(np.abs(v), 1.0)

    def test_domain_check(self):
        with pytest.raises(DomainError):
            phase_response(ArrayGeometry(2, 2), 1.2, 0.0)


class TestSteeringVector:
    def test_broadside(self):
        v = steering_vector(ArrayGeometry(2, 2), 0.0, 0.0)
        assert np.allclose(v, 0.5 * np.ones(4))

    def test_conjugation_flips_exponent(self):
        v = steering_vector(ArrayGeometry(2, 1), 1.0, 0.0)
        assert np.allclose(v, np.array([1.0, -1.0]) / math.sqrt(2))

    def test_unit_norm(self):
        geom = ArrayGeometry(4, 4)
        rng = np.random.default_rng(1)
        for _ in range(100):
            v = steering_vector(geom, rng.uniform(-1, 1), rng.uniform(-1, 1))
            assert np.isclose(np.linalg.norm(v), 1.0)


class TestPlacement:
    def test_pythagoras(self):
        p = UePlacement(horizontal_m=10.0, bs_height_m=10.0, ue_height_m=2.5)
        assert np.isclose(p.distance_3d_m, 12.5)

    def test_draw_bounds(self):
        rng = np.random.default_rng(2)
        bounds = PlacementBounds()
        lo = math.hypot(10.0, 7.5)
        hi = math.hypot(100.0, 8.5)
        for _ in range(10_000):
            tau = draw_placement(rng, bounds).distance_3d_m
            assert lo <= tau <= hi

    def test_uniform_mean(self):
        rng = np.random.default_rng(3)
        bounds = PlacementBounds()
        draws = [draw_placement(rng, bounds).horizontal_m for _ in range(100_000)]
        assert abs(np.mean(draws) - 55.0) < 1.0


class TestGenerateChannel:
    def test_single_path_degeneracy(self):
        # L=1 and tau=1: the channel row is the lone path gain times its
        # phase response, so dividing the gain out recovers the response
        geom = ArrayGeometry(4, 2)
        groups = [GroupAngularSpec(50.0, 10.0, 25.0, 10.0, ue_count=1)]
        placements = [UePlacement(horizontal_m=1.0, bs_height_m=5.0, ue_height_m=5.0)]
        real = generate_channel(geom, groups, placements, n_paths=1,
                                pathloss_exponent=3.76, rng=np.random.default_rng(4))
        gain = real.per_group[0][0][0, 0]
        theta, psi = real.path_angles_deg[0][0]
        expected = phase_response(geom, *angle_to_gamma(theta, psi))
        assert np.allclose(real.h[0] / gain, expected, rtol=1e-12)

    def test_shapes(self):
        geom = ArrayGeometry(16, 16)
        groups = table_groups(n_groups=2, ue_per_group=5)
        rng = np.random.default_rng(5)
        placements = [draw_placement(rng, PlacementBounds()) for _ in range(10)]
        real = generate_channel(geom, groups, placements, 20, 3.76, rng)
        assert real.h.shape == (10, 256)
        for gains, phases in real.per_group:
            assert gains.shape == (5, 20)
            assert phases.shape == (20, 256)

    def test_mean_channel_energy(self):
        # E||h||^2 = M tau^(-2 eta): per-path gain variance 1/L and unit-modulus
        # responses of squared norm M, cross terms vanishing in expectation
        geom = ArrayGeometry(4, 4)
        groups = [GroupAngularSpec(50.0, 10.0, 25.0, 10.0, ue_count=1)]
        placements = [UePlacement(horizontal_m=3.0, bs_height_m=6.0, ue_height_m=2.0)]
        tau = placements[0].distance_3d_m
        eta = 3.76
        rng = np.random.default_rng(6)
        energies = [
            np.linalg.norm(generate_channel(geom, groups, placements, 4, eta, rng).h) ** 2
            for _ in range(10_000)
        ]
        expected = geom.m * tau ** (-2 * eta)
        assert abs(np.mean(energies) / expected - 1.0) < 0.05

    def test_power_convention_halves_exponent(self):
        geom = ArrayGeometry(2, 2)
        groups = [GroupAngularSpec(50.0, 5.0, 25.0, 5.0, ue_count=1)]
        placements = [UePlacement(horizontal_m=30.0, bs_height_m=10.0, ue_height_m=2.0)]
        amp = generate_channel(geom, groups, placements, 2, 3.76,
                               np.random.default_rng(7), "amplitude")
        pwr = generate_channel(geom, groups, placements, 2, 3.76,
                               np.random.default_rng(7), "power")
        tau = placements[0].distance_3d_m
        assert np.allclose(pwr.h, amp.h * tau ** (3.76 / 2.0))

    def test_factorization_consistency(self):
        geom = ArrayGeometry(8, 8)
        groups = table_groups(n_groups=2, ue_per_group=3)
        rng = np.random.default_rng(8)
        placements = [draw_placement(rng, PlacementBounds()) for _ in range(6)]
        real = generate_channel(geom, groups, placements, 10, 3.76, rng)
        offset = 0
        for gains, phases in real.per_group:
            rows = real.h[offset:offset + gains.shape[0]]
            err = np.linalg.norm(rows - gains @ phases) / np.linalg.norm(rows)
            assert err < 1e-12
            offset += gains.shape[0]

    def test_angle_containment(self):
        geom = ArrayGeometry(4, 4)
        groups = table_groups(n_groups=2, ue_per_group=2)
        rng = np.random.default_rng(9)
        placements = [draw_placement(rng, PlacementBounds()) for _ in range(4)]
        real = generate_channel(geom, groups, placements, 15, 3.76, rng)
        for ue, angles in enumerate(real.path_angles_deg):
            spec = groups[0] if ue < 2 else groups[1]
            assert np.all(angles[:, 0] >= spec.eaod_interval[0])
            assert np.all(angles[:, 0] <= spec.eaod_interval[1])
            assert np.all(angles[:, 1] >= spec.aaod_interval[0])
            assert np.all(angles[:, 1] <= spec.aaod_interval[1])

    def test_seed_determinism(self):
        geom = ArrayGeometry(4, 4)
        groups = table_groups(n_groups=2, ue_per_group=2)

        def build():
            rng = np.random.default_rng(10)
            placements = [draw_placement(rng, PlacementBounds()) for _ in range(4)]
            return generate_channel(geom, groups, placements, 5, 3.76, rng)

        a, b = build(), build()
        assert np.array_equal(a.h, b.h)
        for (ga, pa), (gb, pb) in zip(a.per_group, b.per_group):
            assert np.array_equal(ga, gb) and np.array_equal(pa, pb)


class TestValidation:
    def test_spacing_fixed(self):
        with pytest.raises(DomainError):
            ArrayGeometry(2, 2, d=0.4)

    def test_elevation_interval_must_fit(self):
        with pytest.raises(DomainError):
            GroupAngularSpec(5.0, 10.0, 0.0, 10.0, 1)

    def test_placement_count_checked(self):
        geom = ArrayGeometry(2, 2)
        groups = [GroupAngularSpec(50.0, 10.0, 25.0, 10.0, ue_count=2)]
        with pytest.raises(DomainError):
            generate_channel(geom, groups, [], 2, 3.76, np.random.default_rng(0))

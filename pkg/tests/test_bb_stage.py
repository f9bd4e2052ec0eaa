import math

import numpy as np
import pytest

from fairbeam import linalg
from fairbeam.bb_stage import (
    AGENT_FLOOR,
    EffectiveChannel,
    FairnessSpec,
    bb_precoder,
    effective_channel,
    normalization,
    objective,
    objective_batch,
    rate_per_ue,
    sinr_per_ue,
    uniform_agent,
    utility,
)
from fairbeam.errors import DimensionError


def random_eff(rng, k=3, n_rf=6, noise=1e-9, power=0.5):
    h_eff = rng.standard_normal((k, n_rf)) + 1j * rng.standard_normal((k, n_rf))
    return EffectiveChannel(h_eff=h_eff, noise_power_w=noise, total_power_w=power)


class TestEffectiveChannel:
    def test_identity_selection(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        f = np.eye(8)[:, :3]
        assert np.array_equal(effective_channel(h, f), h[:, :3])

    def test_shape(self):
        h = np.ones((10, 256), dtype=complex)
        f = np.ones((256, 16), dtype=complex)
        assert effective_channel(h, f).shape == (10, 16)

    def test_projection_bound(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        f, _ = np.linalg.qr(rng.standard_normal((16, 5)) + 1j * rng.standard_normal((16, 5)))
        assert np.linalg.norm(h @ f) <= np.linalg.norm(h) + 1e-12

    def test_dims_checked(self):
        with pytest.raises(DimensionError):
            effective_channel(np.ones((2, 3)), np.ones((4, 2)))


class TestNormalization:
    def test_uniform_agent(self):
        eps1, eps2 = normalization(np.full(20, 0.5), 10.0)
        assert np.isclose(eps1, 2.0) and np.isclose(eps2, 2.0)

    def test_single_active_component(self):
        agent = np.zeros(4)
        agent[0] = 1.0
        agent[2:] = 0.5
        eps1, _ = normalization(agent, 1.0)
        assert abs(eps1 - 1.0) < 1e-6  # off only by the degeneracy floor

    def test_powers_always_sum_to_budget(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            agent = rng.random(8)
            p_hat = np.maximum(agent[:4], AGENT_FLOOR)
            eps1, _ = normalization(agent, 3.7)
            assert np.isclose((eps1 * p_hat).sum(), 3.7, rtol=1e-12)

    def test_all_zero_agent_is_not_an_error(self):
        eps1, eps2 = normalization(np.zeros(6), 2.0)
        assert np.isfinite(eps1) and np.isfinite(eps2)


class TestBbPrecoder:
    def test_single_ue_matched_filter(self):
        # rank-one regularization keeps the solve direction collinear with
        # the conjugated channel row for any agent
        rng = np.random.default_rng(3)
        eff = random_eff(rng, k=1, n_rf=5)
        out = bb_precoder(np.array([0.8, 0.3]), eff)
        mf = eff.h_eff[0].conj()
        corr = abs(np.vdot(out.b[:, 0], mf)) / (np.linalg.norm(out.b[:, 0]) * np.linalg.norm(mf))
        assert corr > 1 - 1e-12

    def test_all_floored_beta_equals_uniform_beta(self):
        # regularizers renormalize to the power budget, so an all-zero
        # (floored) beta half is the degenerate corner of scale invariance
        # and behaves exactly like a uniform one
        rng = np.random.default_rng(4)
        eff = random_eff(rng, k=3, n_rf=6, noise=1e-3)
        floored = bb_precoder(np.concatenate([np.full(3, 0.5), np.zeros(3)]), eff)
        uniform = bb_precoder(np.full(6, 0.5), eff)
        assert np.allclose(floored.b, uniform.b, rtol=1e-9)
        assert np.isclose(floored.regularizers_w.sum(), eff.total_power_w, rtol=1e-9)

    def test_vanishing_regularization_gives_matched_filter(self):
        # G -> I when the renormalized regularizers are negligible against
        # the noise power, leaving the pure matched-filter direction
        rng = np.random.default_rng(4)
        eff = random_eff(rng, k=3, n_rf=6, noise=1e6, power=1e-12)
        out = bb_precoder(rng.random(6), eff)
        for k in range(3):
            mf = eff.h_eff[k].conj()
            corr = abs(np.vdot(out.b[:, k], mf)) / (np.linalg.norm(out.b[:, k]) * np.linalg.norm(mf))
            assert corr > 1 - 1e-9

    def test_uniform_agent_equal_allocation(self):
        rng = np.random.default_rng(5)
        eff = random_eff(rng, k=4, n_rf=8, power=2.0)
        out = bb_precoder(uniform_agent(4), eff)
        assert np.allclose(out.powers_w, 0.5)
        assert np.allclose(out.regularizers_w, 0.5)
        # gram matrix equals I + P_T/(K sigma^2) sum of row outer products
        gram = np.eye(8, dtype=complex)
        for k in range(4):
            row = eff.h_eff[k]
            gram += (2.0 / 4 / eff.noise_power_w) * np.outer(row.conj(), row)
        for k in range(4):
            direction = linalg.inverse(gram) @ eff.h_eff[k].conj()
            direction /= np.linalg.norm(direction)
            got = out.b[:, k] / np.linalg.norm(out.b[:, k])
            assert np.allclose(got, direction, atol=1e-10)

    def test_power_exactness(self):
        rng = np.random.default_rng(6)
        eff = random_eff(rng, k=5, n_rf=7, power=1.3)
        for _ in range(25):
            out = bb_precoder(rng.random(10), eff)
            total = np.linalg.norm(out.b) ** 2
            assert abs(total - 1.3) / 1.3 < 1e-9
            assert np.allclose(np.linalg.norm(out.b, axis=0) ** 2, out.powers_w, rtol=1e-9)

    def test_kkt_structure(self):
        # every column factors as sqrt(power) times the unit-norm solve
        # direction of the shared regularized gram matrix
        rng = np.random.default_rng(7)
        eff = random_eff(rng, k=3, n_rf=6)
        agent = rng.random(6)
        out = bb_precoder(agent, eff)
        eps1, eps2 = normalization(agent, eff.total_power_w)
        b_hat = np.maximum(agent[3:], AGENT_FLOOR)
        gram = np.eye(6, dtype=complex)
        for u in range(3):
            row = eff.h_eff[u]
            gram += eps2 * b_hat[u] / eff.noise_power_w * np.outer(row.conj(), row)
        inv = linalg.inverse(gram)
        for k in range(3):
            direction = inv @ eff.h_eff[k].conj()
            direction /= np.linalg.norm(direction)
            scale = np.linalg.norm(out.b[:, k])
            assert scale >= 0
            assert np.allclose(out.b[:, k], scale * direction, atol=1e-10)


class TestSinrAndRates:
    def test_single_ue_no_interference(self):
        h = np.array([[1.0 + 0j, 0.0]])
        f = np.eye(2)
        b = np.array([[2.0], [0.0]], dtype=complex)
        assert np.allclose(sinr_per_ue(h, f, b, 1.0), [4.0])

    def test_zero_precoder(self):
        h = np.ones((2, 2), dtype=complex)
        assert np.allclose(sinr_per_ue(h, np.eye(2), np.zeros((2, 2)), 1.0), 0.0)

    def test_hand_built_two_ue(self):
        # identity effective channel and precoder, unit noise: each UE sees
        # unit signal and unit interference -> SINR exactly (1, 1)
        sinr = sinr_per_ue(np.eye(2), np.eye(2), np.eye(2), 0.0 + 1.0)
        assert np.allclose(sinr, [1.0, 1.0])

    def test_rates(self):
        assert np.allclose(rate_per_ue([0.0, 1.0, 3.0]), [0.0, 1.0, 2.0])


class TestUtility:
    def test_alpha_zero_is_sum(self):
        assert utility(np.array([1.0, 2.0, 3.0]), FairnessSpec(alpha=0.0)) == 6.0

    def test_alpha_one_is_log(self):
        rates = np.array([math.e, math.e])
        assert np.isclose(utility(rates, FairnessSpec(alpha=1.0)), 2.0)

    def test_alpha_two(self):
        assert np.isclose(utility(np.array([2.0, 4.0]), FairnessSpec(alpha=2.0)), -0.75)

    def test_max_min(self):
        assert utility(np.array([2.0, 0.5, 4.0]), FairnessSpec(max_min=True)) == 0.5

    def test_zero_rate_is_finite_for_high_alpha(self):
        for spec in (FairnessSpec(alpha=1.0), FairnessSpec(alpha=5.0)):
            assert np.isfinite(utility(np.array([0.0, 1.0]), spec))

    def test_parse(self):
        assert FairnessSpec.parse("maxmin").max_min
        assert FairnessSpec.parse(2).alpha == 2.0
        assert FairnessSpec.parse("3.5").alpha == 3.5


class TestObjective:
    def test_purity(self, small_effective_channel):
        eff, _, _ = small_effective_channel
        agent = np.random.default_rng(8).random(2 * eff.k)
        spec = FairnessSpec(alpha=0.0)
        assert objective(agent, eff, spec) == objective(agent, eff, spec)

    def test_straight_line_oracle(self, small_effective_channel):
        # independent re-implementation straight from the definitions: build
        # the precoder column by column with an explicit inverse, then SINR
        # and rates from the raw channel and beamformer products
        eff, real, rf = small_effective_channel
        rng = np.random.default_rng(9)
        agent = rng.random(2 * eff.k)
        spec = FairnessSpec(alpha=0.0)

        k = eff.k
        p_hat = np.maximum(agent[:k], AGENT_FLOOR)
        b_hat = np.maximum(agent[k:], AGENT_FLOOR)
        eps1 = eff.total_power_w / p_hat.sum()
        eps2 = eff.total_power_w / b_hat.sum()
        h, f = real.h, rf.f
        n_rf = f.shape[1]
        gram = np.eye(n_rf, dtype=complex)
        for u in range(k):
            fh = f.conj().T @ h[u].conj()
            gram += eps2 * b_hat[u] / eff.noise_power_w * np.outer(fh, fh.conj())
        b = np.zeros((n_rf, k), dtype=complex)
        for u in range(k):
            direction = np.linalg.inv(gram) @ (f.conj().T @ h[u].conj())
            b[:, u] = math.sqrt(eps1 * p_hat[u]) * direction / np.linalg.norm(direction)
        expected = 0.0
        for u in range(k):
            sig = abs(h[u] @ f @ b[:, u]) ** 2
            interf = sum(abs(h[u] @ f @ b[:, v]) ** 2 for v in range(k) if v != u)
            expected += math.log2(1.0 + sig / (interf + eff.noise_power_w))

        got = objective(agent, eff, spec)
        assert abs(got - expected) / abs(expected) < 1e-9

    def test_beta_scale_invariance(self, small_effective_channel):
        eff, _, _ = small_effective_channel
        rng = np.random.default_rng(10)
        spec = FairnessSpec(alpha=0.0)
        for _ in range(10):
            agent = 0.1 + 0.8 * rng.random(2 * eff.k)
            scaled = agent.copy()
            scaled[eff.k:] *= 0.37
            a, b = objective(agent, eff, spec), objective(scaled, eff, spec)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    def test_power_scale_invariance(self, small_effective_channel):
        eff, _, _ = small_effective_channel
        rng = np.random.default_rng(11)
        spec = FairnessSpec(alpha=1.0)
        for _ in range(10):
            agent = 0.1 + 0.8 * rng.random(2 * eff.k)
            scaled = agent.copy()
            scaled[:eff.k] *= 0.61
            a, b = objective(agent, eff, spec), objective(scaled, eff, spec)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(a))

    def test_batch_matches_scalar(self, small_effective_channel):
        eff, _, _ = small_effective_channel
        rng = np.random.default_rng(12)
        agents = rng.random((17, 2 * eff.k))
        for spec in (FairnessSpec(alpha=0.0), FairnessSpec(alpha=2.0),
                     FairnessSpec(max_min=True)):
            batch = objective_batch(agents, eff, spec)
            scalar = np.array([objective(a, eff, spec) for a in agents])
            assert np.allclose(batch, scalar, rtol=1e-12, atol=1e-12)

    def test_max_min_dominance_on_grid(self):
        # exhaustive coarse grid on K=2: the max-min winner's worst rate is
        # never below the sum-rate winner's worst rate
        rng = np.random.default_rng(13)
        eff = random_eff(rng, k=2, n_rf=4, noise=1e-6, power=1.0)
        axis = np.linspace(0.0, 1.0, 9)
        grid = np.array(np.meshgrid(axis, axis, axis, axis)).reshape(4, -1).T
        from fairbeam.bb_stage import rates_batch

        rates = rates_batch(grid, eff)
        min_rates = rates.min(axis=1)
        sums = rates.sum(axis=1)
        assert min_rates[np.argmax(min_rates)] >= min_rates[np.argmax(sums)] - 1e-12

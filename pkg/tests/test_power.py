"""Power-allocation tests: water-filling and the multiplier bisection."""

import numpy as np
import pytest

from fdhybf.channel import generate_channels
from fdhybf.config import desk_profile
from fdhybf.errors import BracketError, StaleBeamformerError
from fdhybf.gradients import compute_gradients
from fdhybf.linalg import gen_dominant_eigvecs, pd_inv
from fdhybf.power import (
    BisectOptions,
    SigmaPair,
    bisect_multipliers,
    sigma_pair,
    water_fill,
)
from fdhybf.signal import rx_covariances, tx_covariances

from test_signal import NO_LDR, random_state


def wide_profile(**overrides):
    """Two users per direction with two streams each; heavy distortion so
    every gradient family contributes to the power penalty."""
    base = dict(
        bs_tx_ant=6, bs_rx_ant=6, tx_rf=4, rx_rf=4,
        n_ul=2, n_dl=2, ul_ant=3, dl_ant=3, ul_streams=2, dl_streams=2,
        bs_tx_ldr_db=-20.0, bs_rx_ldr_db=-20.0,
        ue_tx_ldr_db=-20.0, ue_rx_ldr_db=-20.0,
    )
    base.update(overrides)
    return desk_profile(**base)


def eigen_align(channels, state, cfg):
    """Replace every digital beamformer with normalized generalized
    eigenvectors of its rate/penalty pencil at the current state.

    This mirrors the solver's update order, after which the power
    subproblem's quadratic forms are near-diagonal by construction.
    Returns the covariances and gradients of the pre-update state, which
    are the anchor quantities the power step must reuse.
    """
    cov = rx_covariances(channels, state, cfg)
    grads = compute_gradients(channels, state, cfg, cov=cov)
    for k in range(len(channels.ul)):
        fh = state.f_rf @ channels.ul[k]
        m1 = fh.conj().T @ pd_inv(cov.ul_rbar[k]) @ fh
        m2 = (grads.ul_a[k] + grads.ul_b[k]
              + np.diag(state.ul_antenna_mult[k])
              + state.ul_sum_mult[k] * np.eye(fh.shape[1]))
        vecs, _ = gen_dominant_eigvecs(m1, m2, state.ul_digital[k].shape[1])
        state.ul_digital[k] = vecs / np.linalg.norm(vecs, axis=0)
    for j in range(len(channels.dl)):
        hg = channels.dl[j] @ state.g_rf
        m1 = hg.conj().T @ pd_inv(cov.dl_rbar[j]) @ hg
        core = (grads.dl_c[j] + grads.dl_d[j]
                + np.diag(state.bs_antenna_mult)
                + state.bs_sum_mult * np.eye(cfg.bs_tx_ant))
        m2 = state.g_rf.conj().T @ core @ state.g_rf
        vecs, _ = gen_dominant_eigvecs(m1, m2, state.dl_digital[j].shape[1])
        state.dl_digital[j] = vecs / np.linalg.norm(vecs, axis=0)
    return cov, grads


def aligned_system(seed, **overrides):
    cfg = wide_profile(**overrides)
    channels = generate_channels(cfg, seed)
    state = random_state(cfg, np.random.default_rng(seed + 1), power_scale=0.5)
    cov, grads = eigen_align(channels, state, cfg)
    return cfg, channels, state, cov, grads


class TestWaterFill:
    def test_worked_example(self):
        # w=1, unit penalties, qualities (2, 0.5): levels 1 - 1/sigma1.
        pair = SigmaPair(sigma1=np.array([2.0, 0.5]),
                         sigma2=np.array([1.0, 1.0]))
        np.testing.assert_allclose(water_fill(pair, 1.0), [0.5, 0.0])

    def test_weight_scales_level(self):
        pair = SigmaPair(sigma1=np.array([4.0]), sigma2=np.array([2.0]))
        np.testing.assert_allclose(water_fill(pair, 3.0), [1.5 - 0.25])

    def test_dead_and_free_streams(self):
        # sigma1 = 0 is a dead stream even with zero penalty; a live stream
        # with zero penalty water-fills to infinity.
        pair = SigmaPair(sigma1=np.array([0.0, 1.0]),
                         sigma2=np.array([0.0, 0.0]))
        p = water_fill(pair, 1.0)
        assert p[0] == 0.0
        assert np.isinf(p[1])

    def test_grid_oracle(self):
        # Brute-force maximization of w*ln(1 + s1*p) - s2*p on a 1e-3 grid
        # must agree with the closed form within 2 percent.
        rng = np.random.default_rng(77)
        grid = np.arange(0.0, 6.0, 1e-3)
        for _ in range(100):
            s1 = rng.uniform(0.1, 5.0, size=3)
            s2 = rng.uniform(0.2, 4.0, size=3)
            w = rng.uniform(0.5, 2.0)
            p = water_fill(SigmaPair(sigma1=s1, sigma2=s2), w)
            for i in range(3):
                obj = w * np.log1p(s1[i] * grid) - s2[i] * grid
                p_grid = grid[np.argmax(obj)]
                tol = 0.02 * max(p[i], p_grid) + 1.5e-3
                assert abs(p[i] - p_grid) <= tol


class TestSigmaPair:
    def test_scalar_reduction(self):
        # One 1x1 uplink with clean hardware and zero powers: sigma1 is
        # |h|^2 / noise and sigma2 is zero.
        cfg = desk_profile(n_ul=1, n_dl=0, ul_ant=1, ul_streams=1,
                           rx_rf=1, bs_rx_ant=1, **NO_LDR)
        channels = generate_channels(cfg, 5)
        state = random_state(cfg, np.random.default_rng(6))
        state.f_rf = np.eye(1, dtype=complex)
        state.ul_digital[0] = np.eye(1, dtype=complex)
        state.ul_power[0] = np.zeros(1)
        grads = compute_gradients(channels, state, cfg)
        pair = sigma_pair(channels, state, grads, cfg, "ul", 0)
        gain = abs(channels.ul[0][0, 0]) ** 2 / channels.noise_bs
        assert pair.sigma1[0] == pytest.approx(gain, rel=1e-12)
        assert pair.sigma2[0] == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("kind,index", [("ul", 0), ("ul", 1),
                                            ("dl", 0), ("dl", 1)])
    def test_aligned_state_passes_and_matches_oracle(self, kind, index):
        cfg, channels, state, cov, grads = aligned_system(11)
        pair = sigma_pair(channels, state, grads, cfg, kind, index, cov=cov)
        if kind == "ul":
            basis = state.ul_digital[index]
            fh = state.f_rf @ channels.ul[index]
            m1 = fh.conj().T @ pd_inv(cov.ul_rbar[index]) @ fh
        else:
            basis = state.dl_digital[index]
            hg = channels.dl[index] @ state.g_rf
            m1 = hg.conj().T @ pd_inv(cov.dl_rbar[index]) @ hg
        direct = np.diagonal(basis.conj().T @ m1 @ basis).real
        np.testing.assert_allclose(pair.sigma1, direct, rtol=1e-9)
        assert np.all(pair.sigma1 >= 0.0)
        assert np.all(pair.sigma2 >= 0.0)

    def test_column_scaling(self):
        # Scaling a digital column by c scales that stream's entries by c^2
        # and keeps the forms diagonal.
        cfg, channels, state, cov, grads = aligned_system(12)
        base = sigma_pair(channels, state, grads, cfg, "ul", 0, cov=cov)
        state.ul_digital[0] = state.ul_digital[0].copy()
        state.ul_digital[0][:, 1] *= 2.0
        scaled = sigma_pair(channels, state, grads, cfg, "ul", 0, cov=cov)
        assert scaled.sigma1[1] == pytest.approx(4.0 * base.sigma1[1],
                                                 rel=1e-9)
        assert scaled.sigma1[0] == pytest.approx(base.sigma1[0], rel=1e-9)

    def test_stale_state_raises(self):
        # Random digital beamformers leave heavy off-diagonal mass.
        cfg = wide_profile()
        channels = generate_channels(cfg, 13)
        state = random_state(cfg, np.random.default_rng(14))
        grads = compute_gradients(channels, state, cfg)
        with pytest.raises(StaleBeamformerError, match="stale"):
            sigma_pair(channels, state, grads, cfg, "ul", 0)

    def test_rejects_unknown_kind(self):
        cfg, channels, state, cov, grads = aligned_system(15)
        with pytest.raises(ValueError, match="kind"):
            sigma_pair(channels, state, grads, cfg, "sidelink", 0, cov=cov)


class TestBisectScalarOracle:
    """Single-antenna single-stream uplink with clean hardware has a
    closed-form optimum: power rails at the binding cap and the active
    multiplier equals w*g/(1 + g*cap)."""

    def scalar_system(self, **overrides):
        cfg = desk_profile(n_ul=1, n_dl=0, ul_ant=1, ul_streams=1,
                           rx_rf=1, bs_rx_ant=1, **NO_LDR, **overrides)
        channels = generate_channels(cfg, 21)
        state = random_state(cfg, np.random.default_rng(22))
        state.f_rf = np.eye(1, dtype=complex)
        state.ul_digital[0] = np.eye(1, dtype=complex)
        state.ul_power[0] = np.zeros(1)
        grads = compute_gradients(channels, state, cfg)
        gain = abs(channels.ul[0][0, 0]) ** 2 / channels.noise_bs
        return cfg, channels, state, grads, gain

    def test_sum_constraint_binds(self):
        cfg, channels, state, grads, gain = self.scalar_system(
            ue_antenna_cap_w=10.0)
        alpha = cfg.ue_power_w
        l_mult, psi, p, _ = bisect_multipliers(channels, state, grads, cfg,
                                               "ul", 0)
        assert p[0] == pytest.approx(alpha, rel=1e-6)
        assert l_mult == pytest.approx(gain / (1.0 + gain * alpha), rel=1e-5)
        assert psi[0] == 0.0
        assert abs(l_mult * (alpha - p[0])) <= 1e-4 * alpha

    def test_antenna_constraint_binds(self):
        cap = desk_profile().ue_power_w / 10.0
        cfg, channels, state, grads, gain = self.scalar_system(
            ue_antenna_cap_w=cap)
        l_mult, psi, p, _ = bisect_multipliers(channels, state, grads, cfg,
                                               "ul", 0)
        assert p[0] == pytest.approx(cap, rel=1e-6)
        assert l_mult == 0.0
        assert psi[0] == pytest.approx(gain / (1.0 + gain * cap), rel=1e-5)
        assert abs(psi[0] * (cap - p[0])) <= 1e-4 * cap


class TestBisectPipeline:
    @pytest.mark.parametrize("seed", [31, 32, 33])
    def test_feasibility_and_slackness(self, seed):
        cfg, channels, state, cov, grads = aligned_system(seed)
        for kind, index in [("ul", 0), ("ul", 1), ("dl", 0), ("dl", 1)]:
            l_mult, psi, p, digital = bisect_multipliers(
                channels, state, grads, cfg, kind, index, cov=cov)
            assert np.all(p >= 0.0)
            assert np.all(np.diff(p) <= 1e-12)  # descending
            assert l_mult >= 0.0 and np.all(psi >= 0.0)
            live = p > 1e-12
            if kind == "ul":
                norms = np.linalg.norm(digital, axis=0)
                np.testing.assert_allclose(norms[live], 1.0, rtol=1e-9)
                budget, cap = cfg.ue_power_w, cfg.ue_cap_w
                sum_load = p.sum()
                ant_load = np.abs(digital) ** 2 @ p
            else:
                gv = state.g_rf @ digital
                budget, cap = cfg.bs_power_w, cfg.bs_cap_w
                _, q_list = tx_covariances(state)
                rest = sum(q for j, q in enumerate(q_list) if j != index)
                sum_load = np.trace(rest).real + p @ (np.abs(gv) ** 2).sum(0)
                ant_load = np.diagonal(rest).real + np.abs(gv) ** 2 @ p
            assert sum_load <= budget * (1.0 + 1e-6)
            assert np.all(ant_load <= cap * (1.0 + 1e-6))
            assert abs(l_mult * (budget - sum_load)) <= 1e-4 * budget
            assert np.all(np.abs(psi * (cap - ant_load)) <= 1e-4 * cap)

    def test_loose_budgets_leave_multipliers_at_zero(self):
        # When the other users carry 50x rate weights, a unit-weight node
        # faces an interference penalty that pushes its water level far
        # below the budgets, so the allocation is the unconstrained
        # water-filling and every multiplier stays at zero.
        cfg, channels, state, cov, grads = aligned_system(
            41, snr_db=30.0, ul_weights=(50.0, 1.0), dl_weights=(50.0, 1.0),
            bs_antenna_cap_w=1e6, ue_antenna_cap_w=1e6)
        for kind, index in [("ul", 1), ("dl", 1)]:
            pair = sigma_pair(channels, state, grads, cfg, kind, index,
                              cov=cov)
            l_mult, psi, p, _ = bisect_multipliers(
                channels, state, grads, cfg, kind, index, cov=cov)
            assert l_mult == 0.0
            assert np.all(psi == 0.0)
            free = np.sort(water_fill(pair, 1.0))[::-1]
            np.testing.assert_allclose(p, free, rtol=1e-12)

    def test_other_users_load_blocks_bracket(self):
        # If the other downlink user alone exceeds the sum budget, no
        # multiplier can restore feasibility.
        cfg, channels, state, cov, grads = aligned_system(42)
        state.dl_power[0] = np.full(cfg.dl_streams, cfg.bs_power_w)
        with pytest.raises(BracketError, match="doublings"):
            bisect_multipliers(channels, state, grads, cfg, "dl", 1, cov=cov)

    def test_powers_monotone_in_multiplier(self):
        # Raising any multiplier only shrinks the water level.
        s1 = np.array([3.0, 1.0, 0.5])
        s2 = np.array([0.4, 0.8, 1.2])
        prev = water_fill(SigmaPair(sigma1=s1, sigma2=s2), 1.0)
        for mu in [0.1, 0.5, 2.0, 10.0]:
            cur = water_fill(SigmaPair(sigma1=s1, sigma2=s2 + mu), 1.0)
            assert np.all(cur <= prev + 1e-15)
            prev = cur

    def test_default_options(self):
        opts = BisectOptions()
        assert opts.mu_tol == 1e-8
        assert opts.max_expand == 10
        assert opts.cycle_tol == 1e-6

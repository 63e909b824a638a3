"""Stream power allocation under joint sum-power and per-antenna caps.

Given fixed beamformer directions, each stream's optimal power follows the
water-filling form max(0, w/penalty - 1/quality). The Lagrange multipliers
of the sum-power and per-antenna constraints enter the penalty linearly, so
a bisection per multiplier (cycled until stable) solves the dual. Because
the multipliers shift only the diagonal of the penalty quadratic form, the
per-stream penalties under trial multipliers are exact without rebuilding
any matrix product.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BracketError, StaleBeamformerError
from .linalg import eig_rediagonalize, pd_inv
from .signal import rx_covariances, tx_covariances

# Relative off-diagonal mass above which the quadratic forms are treated as
# stale (digital beamformer not current for the stored multipliers).
_DIAG_TOL = 1e-3

# Stand-in for infinite water levels when evaluating constraint loads.
_HUGE = 1e300

# Relative slack granted when testing feasibility at a trial multiplier.
_FEAS_REL = 1e-9

# A solved multiplier pins its constraint load this close to the budget.
_PIN_REL = 1e-9



@dataclass
class SigmaPair:
    """Per-stream signal quality (sigma1) and power penalty (sigma2)."""

    sigma1: np.ndarray
    sigma2: np.ndarray


@dataclass
class BisectOptions:
    """Knobs of the multiplier search.

    mu_max None means 1e3*w/antenna_cap; bracket growth doubles it up to
    2**max_expand times before giving up.
    """

    mu_max: float = None
    mu_tol: float = 1e-8
    max_steps: int = 200
    max_expand: int = 10
    cycle_tol: float = 1e-6
    max_cycles: int = 400


def _near_diagonal(q, label):
    diag = np.diagonal(q).real
    off = q - np.diag(np.diagonal(q))
    worst = float(np.max(np.abs(off))) if off.size else 0.0
    scale = float(np.max(diag)) if diag.size else 0.0
    if worst > _DIAG_TOL * max(scale, worst * 1e-6, 1e-300):
        raise StaleBeamformerError(
            f"{label} quadratic form is not near-diagonal "
            f"(off/diag = {worst / max(scale, 1e-300):.2e}); "
            "digital beamformer is stale for the stored multipliers"
        )
    return np.maximum(diag, 0.0)


def sigma_pair(channels, state, gradients, cfg, kind, index, cov=None):
    """Diagonal quadratic forms of one user's power subproblem.

    kind "ul" sandwiches the combined-domain pair with U_k; kind "dl"
    sandwiches the antenna-level pair with G V_j. Raises
    StaleBeamformerError when either form has off-diagonal mass beyond
    1e-3 of its diagonal, which signals an update-order bug.
    """
    if cov is None:
        cov = rx_covariances(channels, state, cfg)
    if kind == "ul":
        basis = state.ul_digital[index]
        fh = state.f_rf @ channels.ul[index]
        m1 = fh.conj().T @ pd_inv(cov.ul_rbar[index]) @ fh
        n_ant = basis.shape[0]
        m2 = (gradients.ul_a[index] + gradients.ul_b[index]
              + np.diag(state.ul_antenna_mult[index])
              + state.ul_sum_mult[index] * np.eye(n_ant))
    elif kind == "dl":
        basis = state.dl_digital[index]
        hg = channels.dl[index] @ state.g_rf
        m1 = hg.conj().T @ pd_inv(cov.dl_rbar[index]) @ hg
        n_ant = state.g_rf.shape[0]
        core = (gradients.dl_c[index] + gradients.dl_d[index]
                + np.diag(state.bs_antenna_mult)
                + state.bs_sum_mult * np.eye(n_ant))
        m2 = state.g_rf.conj().T @ core @ state.g_rf
    else:
        raise ValueError(f"kind must be 'ul' or 'dl', got {kind!r}")
    q1 = basis.conj().T @ m1 @ basis
    q2 = basis.conj().T @ m2 @ basis
    return SigmaPair(sigma1=_near_diagonal(q1, "signal"),
                     sigma2=_near_diagonal(q2, "penalty"))


def _water_core(sigma1, sigma2, w):
    sigma1 = np.asarray(sigma1, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    p = np.zeros_like(sigma1)
    live = sigma1 > 0.0
    with np.errstate(divide="ignore"):
        level = np.where(sigma2 > 0.0, w / np.where(sigma2 > 0.0, sigma2, 1.0),
                         np.inf)
    p[live] = level[live] - 1.0 / sigma1[live]
    return np.maximum(p, 0.0)


def water_fill(pair, w=1.0):
    """Per-stream powers max(0, w/sigma2 - 1/sigma1); dead streams get 0."""
    return _water_core(pair.sigma1, pair.sigma2, w)


def _solve_one(load_at, budget, mu_init, opts):
    """Smallest multiplier with its constraint load at or below the budget.

    Bisects past mu_tol until the load is pinned within _PIN_REL of the
    budget, so the complementary-slackness product at the returned value
    is negligible even when the load is steep in the multiplier.
    """
    def feasible(mu):
        return load_at(mu) <= budget * (1.0 + _FEAS_REL)

    if feasible(0.0):
        return 0.0
    hi = mu_init
    grown = 0
    while not feasible(hi):
        if grown >= opts.max_expand:
            raise BracketError(
                f"constraint still violated at multiplier {hi:.3e} "
                f"after {opts.max_expand} range doublings"
            )
        hi *= 2.0
        grown += 1
    lo = 0.0
    for _ in range(opts.max_steps):
        width = hi - lo
        if width <= opts.mu_tol and budget - load_at(hi) <= _PIN_REL * budget:
            break
        if width <= 4.0 * np.finfo(float).eps * max(hi, 1.0):
            break
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi  # the feasible endpoint


def bisect_multipliers(channels, state, gradients, cfg, kind, index, opts=None,
                       cov=None):
    """Multiplier search and water-filling for one node's power update.

    Returns (sum_mult, antenna_mult, powers, digital): the node's dual
    variables, the water-filled stream powers sorted descending, and the
    digital beamformer rotated accordingly so the transmit covariance is
    unchanged by the re-sort.
    """
    opts = opts or BisectOptions()
    pair = sigma_pair(channels, state, gradients, cfg, kind, index, cov=cov)

    if kind == "ul":
        digital = state.ul_digital[index]
        r_mat = np.abs(digital) ** 2            # antenna x stream loads
        l_weight = np.ones(digital.shape[1])    # unit-norm columns
        l_hat = state.ul_sum_mult[index]
        psi_hat = state.ul_antenna_mult[index]
        sum_budget, ant_cap = cfg.ue_power_w, cfg.ue_cap_w
        rest_sum = 0.0
        rest_diag = np.zeros(digital.shape[0])
        w = cfg.ul_weight(index)
    else:
        digital = state.dl_digital[index]
        gv = state.g_rf @ digital
        r_mat = np.abs(gv) ** 2
        l_weight = r_mat.sum(axis=0)
        l_hat = state.bs_sum_mult
        psi_hat = state.bs_antenna_mult
        sum_budget, ant_cap = cfg.bs_power_w, cfg.bs_cap_w
        _, q_list = tx_covariances(state)
        rest = sum((q for j, q in enumerate(q_list) if j != index),
                   np.zeros_like(q_list[index]))
        rest_sum = float(np.trace(rest).real)
        rest_diag = np.diagonal(rest).real.copy()
        w = cfg.dl_weight(index)

    # Strip the anchor multipliers back out of the penalty diagonal; the
    # search then re-adds trial values analytically.
    base_d2 = np.maximum(pair.sigma2 - l_hat * l_weight - r_mat.T @ psi_hat,
                         0.0)
    n_ant = r_mat.shape[0]

    def powers_at(l_val, psi_vec):
        return _water_core(pair.sigma1,
                           base_d2 + l_val * l_weight + r_mat.T @ psi_vec, w)

    def sum_load(p):
        return rest_sum + np.minimum(p, _HUGE) @ l_weight

    def antenna_load(p):
        return rest_diag + r_mat @ np.minimum(p, _HUGE)

    def solve_sum(psi_vec):
        return _solve_one(lambda v: sum_load(powers_at(v, psi_vec)),
                          sum_budget, mu_init, opts)

    def solve_ant(m, l_val, psi_vec):
        def load(v):
            trial = psi_vec.copy()
            trial[m] = v
            return antenna_load(powers_at(l_val, trial))[m]
        return _solve_one(load, ant_cap, mu_init, opts)

    mu_init = opts.mu_max if opts.mu_max is not None \
        else 1e3 * w / min(ant_cap, sum_budget)
    l_mult = 0.0
    psi = np.zeros(n_ant)
    mults = np.zeros(1 + n_ant)
    prev_p = None
    prev_delta = None
    for _ in range(opts.max_cycles):
        prev_mults = mults
        l_mult = solve_sum(psi)
        for m in range(n_ant):
            psi[m] = solve_ant(m, l_mult, psi)
        mults = np.concatenate(([l_mult], psi))
        delta = mults - prev_mults
        p_now = powers_at(l_mult, psi)

        rel = np.abs(delta) / np.maximum(np.abs(prev_mults), 1e-12)
        if np.max(rel) <= opts.cycle_tol:
            break

        # Degenerate constraint geometry (near-parallel active constraints)
        # makes the multipliers slide along an affine ridge at a constant
        # rate per cycle while the allocation stays pinned. Two identical
        # consecutive steps identify the ridge; jump to its end instead of
        # walking there one quantum at a time. The allocation comparison
        # must sit above the bisection's pinning jitter (~1e-7 relative)
        # or the ridge is never recognized and the cycle budget runs out
        # mid-slide, emitting multipliers inconsistent with their slacks.
        scale = max(1.0, float(np.max(np.abs(mults))))
        sliding = (
            prev_p is not None
            and np.allclose(p_now, prev_p, rtol=1e-6, atol=1e-12)
            and np.allclose(delta, prev_delta, rtol=1e-3,
                            atol=1e-12 * scale)
        )
        if sliding:
            shrinking = delta < -1e-12 * scale
            if np.any(shrinking):
                ratios = mults[shrinking] / -delta[shrinking]
                steps = int(min(float(np.floor(ratios.min())), 1e6)) - 1
                if steps >= 1:
                    mults = mults + steps * delta
                    l_mult = float(mults[0])
                    psi = mults[1:].copy()
                    prev_p = None
                    prev_delta = None
                    continue
        prev_p = p_now
        prev_delta = delta

    p = np.minimum(powers_at(l_mult, psi), _HUGE)

    # Re-diagonalization: descending sort with the matching basis rotation,
    # so digital @ diag(p) @ digital^H is preserved exactly.
    p_mat, basis = eig_rediagonalize(np.diag(p))
    p = np.diagonal(p_mat).copy()
    digital = digital @ basis

    # Project back onto the caps in case the rotation nudged a load over.
    if kind == "ul":
        own_r = np.abs(digital) ** 2
    else:
        own_r = np.abs(state.g_rf @ digital) ** 2
    own_sum = p @ own_r.sum(axis=0) if kind == "dl" else p.sum()
    scale = 1.0
    if own_sum > 0.0:
        scale = min(scale, max(sum_budget - rest_sum, 0.0) / own_sum)
    ant_own = own_r @ p
    over = ant_own > 0.0
    if np.any(over):
        headroom = np.maximum(ant_cap - rest_diag, 0.0)
        scale = min(scale, float(np.min(headroom[over] / ant_own[over])))
    if scale < 1.0:
        p = p * scale

    return l_mult, psi, p, digital

"""Transmit/receive covariance assembly and the weighted sum-rate objective.

The hardware model tracks two distortion families. Transmit-side distortion
adds k*diag(T) on top of a transmit covariance T. Receive-side distortion
adds beta*diag(Phi) where Phi is the undistorted received covariance. At the
base station both the thermal noise and the receive distortion arise at the
antennas, before analog combining, so the combined-domain covariances are
exactly the antenna-level ones sandwiched by the combiner:
R = F R_ant F^H. The antenna-level variants feed the combiner update
directly.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import herm, ln_det


def _diag_part(x):
    """diag(x) as a dense real diagonal matrix."""
    return np.diag(np.diagonal(x).real)


def _with_tx_distortion(t, coef):
    """t + coef*diag(t), the effective radiated covariance."""
    if coef == 0.0:
        return t
    return t + coef * _diag_part(t)


@dataclass
class BeamformerState:
    """All optimization variables of the alternating solver.

    Powers are 1-D arrays holding the diagonals of the per-user power
    matrices. Multipliers are the duals of the sum-power constraints
    (scalars) and the per-antenna constraints (diagonal vectors).
    """

    g_rf: np.ndarray      # bs_tx_ant x tx_rf analog beamformer
    f_rf: np.ndarray      # rx_rf x bs_rx_ant analog combiner
    ul_digital: list      # per uplink user, ul_ant x ul_streams
    dl_digital: list      # per downlink user, tx_rf x dl_streams
    ul_power: list        # per uplink user, length ul_streams
    dl_power: list        # per downlink user, length dl_streams
    ul_antenna_mult: list  # per uplink user, length ul_ant
    ul_sum_mult: list      # per uplink user, scalar
    bs_antenna_mult: np.ndarray  # length bs_tx_ant
    bs_sum_mult: float

    def copy(self):
        return BeamformerState(
            g_rf=self.g_rf.copy(),
            f_rf=self.f_rf.copy(),
            ul_digital=[u.copy() for u in self.ul_digital],
            dl_digital=[v.copy() for v in self.dl_digital],
            ul_power=[p.copy() for p in self.ul_power],
            dl_power=[p.copy() for p in self.dl_power],
            ul_antenna_mult=[m.copy() for m in self.ul_antenna_mult],
            ul_sum_mult=list(self.ul_sum_mult),
            bs_antenna_mult=self.bs_antenna_mult.copy(),
            bs_sum_mult=float(self.bs_sum_mult),
        )


@dataclass
class CovarianceSet:
    """Received covariances per user, with and without the useful signal.

    ul_* live in the combined rx_rf domain; ul_*_ant are the antenna-level
    variants feeding the combiner update. For every family r - rbar equals
    the useful-signal term exactly.
    """

    ul_r: list
    ul_rbar: list
    dl_r: list
    dl_rbar: list
    ul_r_ant: list
    ul_rbar_ant: list


def tx_covariances(state):
    """Uplink covariances T_k and antenna-level downlink covariances Q_j."""
    t_list = []
    for u, p in zip(state.ul_digital, state.ul_power):
        t_list.append(herm((u * p) @ u.conj().T))
    q_list = []
    for v, p in zip(state.dl_digital, state.dl_power):
        gv = state.g_rf @ v
        q_list.append(herm((gv * p) @ gv.conj().T))
    return t_list, q_list


def assemble_covariances(channels, f_rf, t_list, q_list, cfg):
    """Build all received covariances from explicit transmit covariances.

    q_list entries are antenna-level (bs_tx_ant square). Separating this
    from the state lets derivative checks perturb T/Q directly.
    """
    n_bs_tx = channels.si.shape[1]
    n_bs_rx = channels.si.shape[0]

    q_total = np.zeros((n_bs_tx, n_bs_tx), dtype=complex)
    for q in q_list:
        q_total = q_total + q
    q_eff = _with_tx_distortion(q_total, cfg.bs_tx_ldr)
    t_eff = [_with_tx_distortion(t, cfg.ue_tx_ldr) for t in t_list]

    # Uplink, antenna domain first; the combined domain reuses these sums.
    interf_ant = channels.si @ q_eff @ channels.si.conj().T
    for h, te in zip(channels.ul, t_eff):
        interf_ant = interf_ant + h @ te @ h.conj().T
    phi_ant = interf_ant + channels.noise_bs * np.eye(n_bs_rx)
    r_ant = herm(phi_ant + cfg.bs_rx_ldr * _diag_part(phi_ant))
    s_ant = [herm(h @ t @ h.conj().T) for h, t in zip(channels.ul, t_list)]

    r_ul = herm(f_rf @ r_ant @ f_rf.conj().T)
    s_ul = [herm(f_rf @ s @ f_rf.conj().T) for s in s_ant]

    ul_r = [r_ul for _ in t_list]
    ul_rbar = [r_ul - s for s in s_ul]
    ul_r_ant = [r_ant for _ in t_list]
    ul_rbar_ant = [r_ant - s for s in s_ant]

    dl_r, dl_rbar = [], []
    for j, h in enumerate(channels.dl):
        n_ue = h.shape[0]
        phi_j = h @ q_eff @ h.conj().T + channels.noise_ue * np.eye(n_ue)
        for hx, te in zip(channels.cross[j], t_eff):
            phi_j = phi_j + hx @ te @ hx.conj().T
        r_j = herm(phi_j + cfg.ue_rx_ldr * _diag_part(phi_j))
        s_j = herm(h @ q_list[j] @ h.conj().T)
        dl_r.append(r_j)
        dl_rbar.append(r_j - s_j)

    return CovarianceSet(ul_r=ul_r, ul_rbar=ul_rbar, dl_r=dl_r, dl_rbar=dl_rbar,
                         ul_r_ant=ul_r_ant, ul_rbar_ant=ul_rbar_ant)


def rx_covariances(channels, state, cfg):
    """Received covariances for the beamformer state's transmit covariances."""
    t_list, q_list = tx_covariances(state)
    return assemble_covariances(channels, state.f_rf, t_list, q_list, cfg)


def wsr(cov, cfg):
    """Weighted sum rate in nats per channel use."""
    total = 0.0
    for k, (r, rbar) in enumerate(zip(cov.ul_r, cov.ul_rbar)):
        total += cfg.ul_weight(k) * (ln_det(r) - ln_det(rbar))
    for j, (r, rbar) in enumerate(zip(cov.dl_r, cov.dl_rbar)):
        total += cfg.dl_weight(j) * (ln_det(r) - ln_det(rbar))
    return float(total)


# ----------------------------------------------------------------------
# Constraint bookkeeping
# ----------------------------------------------------------------------

# Tolerance for the unit-modulus / phase-grid compliance flags.
_PHASE_TOL = 1e-9


@dataclass
class ConstraintReport:
    """Slack of every power constraint plus analog-stage compliance flags.

    Slacks are budget minus load, so feasible means nonnegative.
    max_violation is the largest budget-normalized deficit (0 when feasible);
    the analog flags are informational and do not enter it.
    """

    bs_sum_slack: float
    bs_antenna_slack: np.ndarray
    ul_sum_slack: list
    ul_antenna_slack: list
    unit_modulus_ok: bool
    phase_grid_ok: bool
    max_violation: float


def _on_phase_grid(x, n_ps):
    steps = np.angle(x) * n_ps / (2.0 * np.pi)
    return bool(np.all(np.abs(steps - np.round(steps)) < _PHASE_TOL * n_ps))


def constraint_report(state, cfg):
    """Evaluate all transmit-power constraints at the current state."""
    t_list, q_list = tx_covariances(state)
    n_bs_tx = state.g_rf.shape[0]
    q_total = np.zeros((n_bs_tx, n_bs_tx), dtype=complex)
    for q in q_list:
        q_total = q_total + q

    bs_sum_slack = cfg.bs_power_w - float(np.trace(q_total).real)
    bs_antenna_slack = cfg.bs_cap_w - np.diagonal(q_total).real
    ul_sum_slack = [cfg.ue_power_w - float(np.trace(t).real) for t in t_list]
    ul_antenna_slack = [cfg.ue_cap_w - np.diagonal(t).real for t in t_list]

    unit_modulus_ok = bool(
        np.all(np.abs(np.abs(state.g_rf) - 1.0) < _PHASE_TOL)
        and np.all(np.abs(np.abs(state.f_rf) - 1.0) < _PHASE_TOL)
    )
    phase_grid_ok = (_on_phase_grid(state.g_rf, cfg.n_ps)
                     and _on_phase_grid(state.f_rf, cfg.n_ps))

    worst = max(0.0, -bs_sum_slack / cfg.bs_power_w)
    if n_bs_tx:
        worst = max(worst, float(np.max(-bs_antenna_slack)) / cfg.bs_cap_w)
    for slack in ul_sum_slack:
        worst = max(worst, -slack / cfg.ue_power_w)
    for slack_vec in ul_antenna_slack:
        worst = max(worst, float(np.max(-slack_vec)) / cfg.ue_cap_w)

    return ConstraintReport(
        bs_sum_slack=bs_sum_slack,
        bs_antenna_slack=bs_antenna_slack,
        ul_sum_slack=ul_sum_slack,
        ul_antenna_slack=ul_antenna_slack,
        unit_modulus_ok=unit_modulus_ok,
        phase_grid_ok=phase_grid_ok,
        max_violation=worst,
    )

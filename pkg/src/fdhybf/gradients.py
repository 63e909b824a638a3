"""Linearization gradients of the sum-rate interference terms.

Each uplink covariance T_k and downlink antenna-level covariance Q_j enters
every other user's received covariance linearly (directly plus through the
k*diag transmit-distortion and beta*diag receive-distortion maps). The
adjoint of that linear map applied to delta = rbar^-1 - r^-1 gives the
penalty matrices used by the alternating beamformer updates: the surrogate
replaces the interference log-dets by tangent planes, and these gradients
are the tangent slopes.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import herm, ln_det, pd_inv
from .signal import assemble_covariances, rx_covariances, tx_covariances


@dataclass
class GradientSet:
    """Per-user penalty matrices.

    ul_a: rate loss of other uplink users per unit of T_k (ul_ant square).
    ul_b: rate loss of downlink users per unit of T_k.
    dl_c: rate loss of other downlink users per unit of Q_j (bs_tx_ant square).
    dl_d: rate loss of uplink users per unit of Q_j (identical across j).
    """

    ul_a: list
    ul_b: list
    dl_c: list
    dl_d: list


def _distorted_quadratic(a_mat, delta, tx_coef, rx_coef):
    """Adjoint of X -> receive-distorted(A (X + tx_coef*diag X) A^H).

    Evaluates A^H D A + tx_coef*diag(A^H D A) with D = delta +
    rx_coef*diag(delta); equivalently the four-term expansion with the
    second-order tx*rx diagonal product included.
    """
    core = a_mat.conj().T @ delta @ a_mat
    out = core + tx_coef * np.diag(np.diagonal(core))
    if rx_coef != 0.0:
        dcore = (a_mat.conj().T * np.diagonal(delta).real) @ a_mat
        out = out + rx_coef * (dcore + tx_coef * np.diag(np.diagonal(dcore)))
    return out


def compute_gradients(channels, state, cfg, cov=None):
    """All four gradient families at the current state.

    With a single uplink user ul_a is zero (no other uplink rates to
    protect); with no downlink users ul_b is zero, and symmetrically.
    """
    if cov is None:
        cov = rx_covariances(channels, state, cfg)
    delta_ul = [pd_inv(rbar) - pd_inv(r)
                for r, rbar in zip(cov.ul_r, cov.ul_rbar)]
    delta_dl = [pd_inv(rbar) - pd_inv(r)
                for r, rbar in zip(cov.dl_r, cov.dl_rbar)]

    n_ul = len(channels.ul)
    n_dl = len(channels.dl)
    n_bs_tx = channels.si.shape[1]
    # Base-station receive deltas pulled back to the antenna domain, where
    # the thermal noise and receive distortion physically live.
    delta_ant = [state.f_rf.conj().T @ d @ state.f_rf for d in delta_ul]

    ul_a = []
    for k in range(n_ul):
        acc = np.zeros((channels.ul[k].shape[1],) * 2, dtype=complex)
        for i in range(n_ul):
            if i == k:
                continue
            acc = acc + cfg.ul_weight(i) * _distorted_quadratic(
                channels.ul[k], delta_ant[i], cfg.ue_tx_ldr,
                cfg.bs_rx_ldr)
        ul_a.append(herm(acc))

    ul_b = []
    for k in range(n_ul):
        acc = np.zeros((channels.ul[k].shape[1],) * 2, dtype=complex)
        for l in range(n_dl):
            acc = acc + cfg.dl_weight(l) * _distorted_quadratic(
                channels.cross[l][k], delta_dl[l], cfg.ue_tx_ldr,
                cfg.ue_rx_ldr)
        ul_b.append(herm(acc))

    dl_c = []
    for j in range(n_dl):
        acc = np.zeros((n_bs_tx, n_bs_tx), dtype=complex)
        for n in range(n_dl):
            if n == j:
                continue
            acc = acc + cfg.dl_weight(n) * _distorted_quadratic(
                channels.dl[n], delta_dl[n], cfg.bs_tx_ldr, cfg.ue_rx_ldr)
        dl_c.append(herm(acc))

    d_shared = np.zeros((n_bs_tx, n_bs_tx), dtype=complex)
    for m in range(n_ul):
        d_shared = d_shared + cfg.ul_weight(m) * _distorted_quadratic(
            channels.si, delta_ant[m], cfg.bs_tx_ldr, cfg.bs_rx_ldr)
    d_shared = herm(d_shared)
    dl_d = [d_shared for _ in range(n_dl)]

    return GradientSet(ul_a=ul_a, ul_b=ul_b, dl_c=dl_c, dl_d=dl_d)


def minorizer_value(channels, state, gradients, anchor, cfg):
    """Concave surrogate of the weighted sum rate around an anchor state.

    Own-signal log-dets keep the anchor's interference floor; every
    interference term is replaced by its tangent plane through the anchor.
    Equals the true objective when state == anchor.
    """
    t_hat, q_hat = tx_covariances(anchor)
    t_cur, q_cur = tx_covariances(state)
    cov_hat = assemble_covariances(channels, anchor.f_rf, t_hat, q_hat, cfg)

    total = 0.0
    for k in range(len(channels.ul)):
        fh = anchor.f_rf @ channels.ul[k]
        s_cur = fh @ t_cur[k] @ fh.conj().T
        rbar = cov_hat.ul_rbar[k]
        total += cfg.ul_weight(k) * (ln_det(rbar + s_cur) - ln_det(rbar))
        penalty = gradients.ul_a[k] + gradients.ul_b[k]
        total -= float(np.trace(penalty @ (t_cur[k] - t_hat[k])).real)
    for j in range(len(channels.dl)):
        h = channels.dl[j]
        s_cur = h @ q_cur[j] @ h.conj().T
        rbar = cov_hat.dl_rbar[j]
        total += cfg.dl_weight(j) * (ln_det(rbar + s_cur) - ln_det(rbar))
        penalty = gradients.dl_c[j] + gradients.dl_d[j]
        total -= float(np.trace(penalty @ (q_cur[j] - q_hat[j])).real)
    return total

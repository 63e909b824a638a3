"""Alternating hybrid beamforming solver.

Block-coordinate ascent over the analog beamformer, analog combiner,
per-user digital beamformers, and stream powers. Each block proposes an
update driven by a concave minorant of the weighted sum rate anchored at
the current state and keeps it only when the exact objective does not
decrease; rejected eigenvector proposals fall back to re-solving powers
and multipliers for the unchanged beamformer directions, which restores
the anchor value in the worst case. The guard is what makes the trace
non-decreasing: the eigenvector steps rank directions against penalty
members built from the previous multipliers, and when those lag the
constraint activity the proposed direction can lose rate even after its
powers are re-optimized.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BracketError, CapacityError
from .gradients import compute_gradients
from .linalg import gen_dominant_eigvecs, herm, pd_inv, quantize_phases, \
    unit_modulus_project
from .power import BisectOptions, bisect_multipliers
from .signal import BeamformerState, constraint_report, rx_covariances, wsr

MODES = ("hybf-um", "hybf-am")

# A penalty matrix whose trace falls below this relative floor is treated
# as absent (identity penalty): nothing to trade off yet.
_ZERO_TRACE = 1e-300


@dataclass
class SolverOptions:
    """Switches of one solver run.

    mode selects phase-only ("hybf-um") or amplitude-and-phase ("hybf-am")
    analog stages; quantize snaps analog phases to the n_ps grid after
    every analog update. update_analog False freezes both analog stages
    (fully digital operation); identity_analog initializes them to
    identity instead of random phases.
    """

    mode: str = "hybf-um"
    quantize: bool = True
    max_outer_iters: int = 100
    rel_tol: float = 1e-4
    seed: int = 0
    update_analog: bool = True
    identity_analog: bool = False
    bisect: BisectOptions = field(default_factory=BisectOptions)

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.rel_tol <= 0.0:
            raise ValueError("rel_tol must be > 0")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        return self


@dataclass
class ConvergenceTrace:
    """Per-iteration WSR values and worst constraint violations."""

    wsr_nats: list
    max_violation: list
    iterations: int
    reason: str


def _project_analog(x, mode, quantize, cfg):
    """Map an unconstrained analog stage onto the hardware set."""
    if mode == "hybf-um":
        x = unit_modulus_project(x)
        if quantize:
            x = quantize_phases(x, cfg.n_ps)
        return x
    if mode == "hybf-am":
        # Amplitude modulators keep per-entry gains; normalize the mean
        # square amplitude to one so the power matrices keep their scale.
        power = float(np.sum(np.abs(x) ** 2))
        x = x * np.sqrt(x.size / power)
        if quantize:
            x = quantize_phases(x, cfg.n_ps, preserve_amplitude=True)
        return x
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _analog_candidates(x, mode, quantize, cfg):
    """Hardware-feasible projections of one raw analog proposal.

    Phase-only mode has a single projection. Amplitude mode additionally
    proposes the phase-only projections (unit-modulus matrices are inside
    the amplitude-modulator set), so with the ascent guard the amplitude
    mode can never settle below what the phase-only update would reach.
    """
    cands = [_project_analog(x, mode, quantize, cfg)]
    if mode == "hybf-am":
        cands.append(_project_analog(x, "hybf-um", quantize, cfg))
        if not quantize:
            cands.append(_project_analog(x, "hybf-um", True, cfg))
    return cands


def init_state(channels, cfg, seed, identity_analog=False):
    """Random feasible starting point.

    Analog phases are drawn uniformly from the quantized grid (unit
    modulus, so the start is feasible in both modes); digital beamformers
    are the dominant right singular vectors of the effective channels;
    powers are equal-split at the largest uniform value satisfying both
    the sum budgets and the per-antenna caps; multipliers start at zero.
    """
    rng = np.random.default_rng(seed)

    def grid_phases(shape):
        steps = rng.integers(0, cfg.n_ps, size=shape)
        return np.exp(2j * np.pi * steps / cfg.n_ps)

    if identity_analog:
        g_rf = np.eye(cfg.bs_tx_ant, cfg.tx_rf, dtype=complex)
        f_rf = np.eye(cfg.rx_rf, cfg.bs_rx_ant, dtype=complex)
    else:
        g_rf = grid_phases((cfg.bs_tx_ant, cfg.tx_rf))
        f_rf = grid_phases((cfg.rx_rf, cfg.bs_rx_ant))

    ul_digital, ul_power = [], []
    for k in range(cfg.n_ul):
        _, _, vh = np.linalg.svd(f_rf @ channels.ul[k])
        u = vh[:cfg.ul_streams].conj().T
        ul_digital.append(u)
        row_load = (np.abs(u) ** 2).sum(axis=1)
        p_eq = min(cfg.ue_power_w / cfg.ul_streams,
                   cfg.ue_cap_w / row_load.max())
        ul_power.append(np.full(cfg.ul_streams, p_eq))

    dl_digital = []
    for j in range(cfg.n_dl):
        _, _, vh = np.linalg.svd(channels.dl[j] @ g_rf)
        dl_digital.append(vh[:cfg.dl_streams].conj().T)
    dl_power = []
    if cfg.n_dl:
        sum_w = sum(np.sum(np.abs(g_rf @ v) ** 2) for v in dl_digital)
        row_w = sum((np.abs(g_rf @ v) ** 2).sum(axis=1) for v in dl_digital)
        p_eq = min(cfg.bs_power_w / sum_w, cfg.bs_cap_w / row_w.max())
        dl_power = [np.full(cfg.dl_streams, p_eq) for _ in range(cfg.n_dl)]

    return BeamformerState(
        g_rf=g_rf, f_rf=f_rf,
        ul_digital=ul_digital, dl_digital=dl_digital,
        ul_power=ul_power, dl_power=dl_power,
        ul_antenna_mult=[np.zeros(cfg.ul_ant) for _ in range(cfg.n_ul)],
        ul_sum_mult=[0.0] * cfg.n_ul,
        bs_antenna_mult=np.zeros(cfg.bs_tx_ant), bs_sum_mult=0.0,
    )


def _penalty_or_identity(m2):
    """PSD penalty member, replaced by identity when it vanishes."""
    if float(np.trace(m2).real) <= _ZERO_TRACE:
        return np.eye(m2.shape[0], dtype=complex)
    return m2


def update_digital_ul(k, channels, state, gradients, cfg, cov=None):
    """New uplink digital beamformer: top generalized eigenvectors of the
    rate/penalty pencil, columns normalized."""
    if cov is None:
        cov = rx_covariances(channels, state, cfg)
    fh = state.f_rf @ channels.ul[k]
    m1 = fh.conj().T @ pd_inv(cov.ul_rbar[k]) @ fh
    m2 = (gradients.ul_a[k] + gradients.ul_b[k]
          + np.diag(state.ul_antenna_mult[k])
          + state.ul_sum_mult[k] * np.eye(cfg.ul_ant))
    vecs, _ = gen_dominant_eigvecs(m1, _penalty_or_identity(m2),
                                   cfg.ul_streams)
    return vecs / np.linalg.norm(vecs, axis=0)


def update_digital_dl(j, channels, state, gradients, cfg, cov=None):
    """New downlink digital beamformer, sandwiched by the analog stage."""
    if cov is None:
        cov = rx_covariances(channels, state, cfg)
    hg = channels.dl[j] @ state.g_rf
    m1 = hg.conj().T @ pd_inv(cov.dl_rbar[j]) @ hg
    core = (gradients.dl_c[j] + gradients.dl_d[j]
            + np.diag(state.bs_antenna_mult)
            + state.bs_sum_mult * np.eye(cfg.bs_tx_ant))
    m2 = state.g_rf.conj().T @ core @ state.g_rf
    vecs, _ = gen_dominant_eigvecs(m1, _penalty_or_identity(herm(m2)),
                                   cfg.dl_streams)
    return vecs / np.linalg.norm(vecs, axis=0)


def analog_beamformer_pair(channels, state, gradients, cfg, cov=None):
    """Kronecker-structured members of the vectorized beamformer pencil.

    The left member sums w_j * Omega_j^T kron (H_j^H Rbar_j^-1 H_j) with
    Omega_j = (I + W_j Ytilde_j)^-1 W_j, W_j = V_j P_j V_j^H and
    Ytilde_j the current beamformed rate kernel; the right member sums
    W_j^T kron (C_j + D_j + Psi_0 + l_0 I). vec() is column-major.
    """
    m0, mt = state.g_rf.shape
    if m0 * mt > cfg.kron_dim_cap:
        raise CapacityError(
            f"vectorized analog update needs a {m0 * mt}-dim dense pencil, "
            f"above the configured cap {cfg.kron_dim_cap}"
        )
    if cov is None:
        cov = rx_covariances(channels, state, cfg)
    dim = m0 * mt
    lhs = np.zeros((dim, dim), dtype=complex)
    rhs = np.zeros((dim, dim), dtype=complex)
    penalty = np.diag(state.bs_antenna_mult) \
        + state.bs_sum_mult * np.eye(m0)
    for j in range(len(channels.dl)):
        h = channels.dl[j]
        y = h.conj().T @ pd_inv(cov.dl_rbar[j]) @ h
        v = state.dl_digital[j]
        w_mat = herm((v * state.dl_power[j]) @ v.conj().T)
        y_t = state.g_rf.conj().T @ y @ state.g_rf
        omega = herm(np.linalg.solve(
            np.eye(mt) + w_mat @ y_t, w_mat))
        lhs += cfg.dl_weight(j) * np.kron(omega.T, y)
        rhs += np.kron(w_mat.T,
                       gradients.dl_c[j] + gradients.dl_d[j] + penalty)
    return lhs, rhs


def _raw_analog_beamformer(channels, state, gradients, cfg, cov=None):
    """Unprojected analog beamformer proposal, or None to keep current."""
    if not channels.dl:
        return None  # no downlink: the beamformer never transmits
    lhs, rhs = analog_beamformer_pair(channels, state, gradients, cfg,
                                      cov=cov)
    if float(np.trace(rhs).real) <= _ZERO_TRACE:
        return None  # zero downlink power: pencil is degenerate
    m0, mt = state.g_rf.shape
    vec, _ = gen_dominant_eigvecs(lhs, rhs, 1)
    return vec[:, 0].reshape((m0, mt), order="F")


def update_analog_beamformer(channels, state, gradients, cfg, mode,
                             quantize=True, cov=None):
    """New analog beamformer from the dominant vectorized eigenvector,
    projected onto the selected hardware set."""
    raw = _raw_analog_beamformer(channels, state, gradients, cfg, cov=cov)
    if raw is None:
        return state.g_rf
    return _project_analog(raw, mode, quantize, cfg)


def analog_combiner_pair(channels, state, cfg, cov=None):
    """Weighted antenna-level covariance members of the combiner pencil."""
    if cov is None:
        cov = rx_covariances(channels, state, cfg)
    a = sum(cfg.ul_weight(k) * cov.ul_r_ant[k]
            for k in range(len(channels.ul)))
    b = sum(cfg.ul_weight(k) * cov.ul_rbar_ant[k]
            for k in range(len(channels.ul)))
    return a, b


def _raw_analog_combiner(channels, state, cfg, cov=None):
    """Unprojected analog combiner proposal, or None to keep current."""
    if not channels.ul:
        return None  # no uplink: the combiner never receives
    a, b = analog_combiner_pair(channels, state, cfg, cov=cov)
    vecs, _ = gen_dominant_eigvecs(a, b, cfg.rx_rf)
    return vecs.conj().T


def update_analog_combiner(channels, state, cfg, mode, quantize=True,
                           cov=None):
    """New analog combiner: rows are the conjugated dominant generalized
    eigenvectors of the weighted covariance pair, projected per mode."""
    raw = _raw_analog_combiner(channels, state, cfg, cov=cov)
    if raw is None:
        return state.f_rf
    return _project_analog(raw, mode, quantize, cfg)


def _rescale_dl_powers(state, cfg):
    """Uniformly shrink downlink powers to restore transmit feasibility.

    The hardware projection of a fresh analog beamformer can raise the
    column gains seen by the frozen digital beamformers and powers; a
    scalar shrink keeps the covariance structure and guarantees the next
    power subproblem starts from a feasible split.
    """
    if not state.dl_power:
        return
    sum_load = 0.0
    ant_load = np.zeros(state.g_rf.shape[0])
    for v, p in zip(state.dl_digital, state.dl_power):
        r = np.abs(state.g_rf @ v) ** 2
        sum_load += p @ r.sum(axis=0)
        ant_load += r @ p
    scale = 1.0
    if sum_load > 0.0:
        scale = min(scale, cfg.bs_power_w / sum_load)
    live = ant_load > 0.0
    if np.any(live):
        scale = min(scale, float((cfg.bs_cap_w / ant_load[live]).min()))
    if scale < 1.0:
        for p in state.dl_power:
            p *= scale


def _ascent_floor(value):
    """Lowest WSR a block update may accept without counting as a drop."""
    return value - 1e-12 * max(1.0, abs(value))


def _digital_candidate(kind, index, channels, state, gradients, cfg, opts,
                       cov, directions):
    """One digital-plus-power proposal for a single user, on a copy.

    When directions is an array the beamformer columns are replaced
    before the multiplier search; when None the current columns are
    kept and only powers and multipliers are re-solved, which can never
    fall below the anchor rate.
    """
    cand = state.copy()
    if kind == "dl":
        if directions is not None:
            cand.dl_digital[index] = directions
        l_mult, psi, p, digital = bisect_multipliers(
            channels, cand, gradients, cfg, "dl", index, opts.bisect,
            cov=cov)
        cand.dl_digital[index] = digital
        cand.dl_power[index] = p
        cand.bs_sum_mult = l_mult
        cand.bs_antenna_mult = psi
    else:
        if directions is not None:
            cand.ul_digital[index] = directions
        l_mult, psi, p, digital = bisect_multipliers(
            channels, cand, gradients, cfg, "ul", index, opts.bisect,
            cov=cov)
        cand.ul_digital[index] = digital
        cand.ul_power[index] = p
        cand.ul_sum_mult[index] = l_mult
        cand.ul_antenna_mult[index] = psi
    return cand


def _digital_directions(kind, index, channels, state, gradients, cfg, cov):
    """Top generalized eigenvector columns for one user's digital stage."""
    if kind == "dl":
        return update_digital_dl(index, channels, state, gradients, cfg,
                                 cov=cov)
    return update_digital_ul(index, channels, state, gradients, cfg, cov=cov)


def _scaled_mult_probe(kind, index, state, scale):
    """Copy of the state with one user's stored multipliers rescaled.

    Scaling the penalty member traces a regularization path through the
    eigenvector pencil, producing genuinely different direction
    proposals when the self-consistent step has stalled.
    """
    probe = state.copy()
    if kind == "dl":
        probe.bs_sum_mult = scale * probe.bs_sum_mult
        probe.bs_antenna_mult = scale * probe.bs_antenna_mult
    else:
        probe.ul_sum_mult[index] = scale * probe.ul_sum_mult[index]
        probe.ul_antenna_mult[index] = scale * probe.ul_antenna_mult[index]
    return probe


def _blend_columns(old, new, weight):
    """Column-wise unit-norm interpolation from old toward new directions.

    Each new column is phase-aligned with its old counterpart first so
    the blend shortens the step instead of cancelling it.
    """
    out = np.empty_like(new)
    for i in range(new.shape[1]):
        overlap = np.vdot(old[:, i], new[:, i])
        aligned = new[:, i]
        if abs(overlap) > 0.0:
            aligned = new[:, i] * (overlap.conjugate() / abs(overlap))
        col = (1.0 - weight) * old[:, i] + weight * aligned
        norm = np.linalg.norm(col)
        out[:, i] = aligned if norm < 1e-12 else col / norm
    return out


def _best_accepted(channels, candidates, cfg, floor):
    """Highest-WSR candidate at or above the ascent floor, or None."""
    best, best_wsr = None, floor
    for cand in candidates:
        value = wsr(rx_covariances(channels, cand, cfg), cfg)
        if value >= best_wsr:
            best, best_wsr = cand, value
    return best


def _digital_block(kind, index, channels, state, cfg, opts):
    """Guarded digital update for one user; returns the accepted state.

    Several proposals share one anchor: eigenvectors at the stored and
    at rescaled multipliers, a half-step blend toward the eigenvector
    directions, powers and multipliers re-solved for the unchanged
    directions (never below the anchor rate), and eigenvectors at those
    refreshed multipliers. The best proposal that does not lower the
    exact WSR wins; if all do, the state is kept as is.
    """
    cov = rx_covariances(channels, state, cfg)
    gradients = compute_gradients(channels, state, cfg, cov=cov)
    floor = _ascent_floor(wsr(cov, cfg))
    current = (state.dl_digital if kind == "dl" else state.ul_digital)[index]
    fresh = _digital_directions(kind, index, channels, state, gradients,
                                cfg, cov)
    pool = [fresh, _blend_columns(current, fresh, 0.5)]
    for scale in (0.3, 3.0):
        probe = _scaled_mult_probe(kind, index, state, scale)
        pool.append(_digital_directions(kind, index, channels, probe,
                                        gradients, cfg, cov))
    candidates = []
    for directions in pool:
        try:
            candidates.append(_digital_candidate(
                kind, index, channels, state, gradients, cfg, opts, cov,
                directions))
        except BracketError:
            pass
    try:
        refreshed = _digital_candidate(
            kind, index, channels, state, gradients, cfg, opts, cov, None)
        candidates.append(refreshed)
        again = _digital_directions(kind, index, channels, refreshed,
                                    gradients, cfg, cov)
        candidates.append(_digital_candidate(
            kind, index, channels, refreshed, gradients, cfg, opts, cov,
            again))
    except BracketError:
        pass
    best = _best_accepted(channels, candidates, cfg, floor)
    return state if best is None else best


def _analog_block(channels, state, cfg, opts):
    """Guarded analog beamformer and combiner updates."""
    if channels.dl:
        cov = rx_covariances(channels, state, cfg)
        gradients = compute_gradients(channels, state, cfg, cov=cov)
        floor = _ascent_floor(wsr(cov, cfg))
        raw = _raw_analog_beamformer(channels, state, gradients, cfg,
                                     cov=cov)
        candidates = []
        if raw is not None:
            for g_rf in _analog_candidates(raw, opts.mode, opts.quantize,
                                           cfg):
                cand = state.copy()
                cand.g_rf = g_rf
                _rescale_dl_powers(cand, cfg)
                candidates.append(cand)
        best = _best_accepted(channels, candidates, cfg, floor)
        if best is not None:
            state = best
    if channels.ul:
        cov = rx_covariances(channels, state, cfg)
        floor = _ascent_floor(wsr(cov, cfg))
        raw = _raw_analog_combiner(channels, state, cfg, cov=cov)
        candidates = []
        if raw is not None:
            for f_rf in _analog_candidates(raw, opts.mode, opts.quantize,
                                           cfg):
                cand = state.copy()
                cand.f_rf = f_rf
                candidates.append(cand)
        best = _best_accepted(channels, candidates, cfg, floor)
        if best is not None:
            state = best
    return state


_JOINT_DIM_CAP = 1024  # keeps the square-case joint proposal cheap


def _tighten_dl_powers(state, cfg):
    """Scale all downlink powers uniformly to the tightest BS constraint."""
    sum_load = 0.0
    ant_load = np.zeros(cfg.bs_tx_ant)
    for v, p in zip(state.dl_digital, state.dl_power):
        r = np.abs(state.g_rf @ v) ** 2
        sum_load += p @ r.sum(axis=0)
        ant_load += r @ p
    if sum_load <= 0.0:
        return
    scale = cfg.bs_power_w / sum_load
    live = ant_load > 0.0
    if np.any(live):
        scale = min(scale, float((cfg.bs_cap_w / ant_load[live]).min()))
    for p in state.dl_power:
        p *= scale


def _joint_digital_block(channels, state, cfg, opts):
    """Guarded coordinated downlink move for square digital stages.

    Per-user blocks move one beamformer at a time and can stall at
    points where only a simultaneous change of all downlink users
    helps. Here the vectorized-pencil proposal for a shared mixing
    matrix is absorbed into every user's digital columns and powers, so
    the analog stage stays at identity; interpolations toward identity
    give shorter coordinated steps. Powers are rescaled uniformly to
    the tightest BS constraint and proposals that lower the exact rate
    are discarded.
    """
    if not channels.dl or state.g_rf.shape[0] != state.g_rf.shape[1]:
        return state
    if state.g_rf.shape[0] ** 2 > _JOINT_DIM_CAP:
        return state
    cov = rx_covariances(channels, state, cfg)
    gradients = compute_gradients(channels, state, cfg, cov=cov)
    try:
        mix = _raw_analog_beamformer(channels, state, gradients, cfg,
                                     cov=cov)
    except CapacityError:
        return state
    if mix is None:
        return state
    mix = mix / np.linalg.norm(mix, 2)
    floor = _ascent_floor(wsr(cov, cfg))
    eye = np.eye(state.g_rf.shape[0])
    candidates = []
    for weight in (1.0, 0.5, 0.25):
        blend = weight * mix + (1.0 - weight) * eye
        cand = state.copy()
        degenerate = False
        for j in range(len(channels.dl)):
            cols = blend @ cand.dl_digital[j]
            norms = np.linalg.norm(cols, axis=0)
            if np.any(norms < 1e-12):
                degenerate = True
                break
            cand.dl_digital[j] = cols / norms
            cand.dl_power[j] = cand.dl_power[j] * norms ** 2
        if degenerate:
            continue
        shrunk = cand.copy()
        _rescale_dl_powers(shrunk, cfg)
        candidates.append(shrunk)
        _tighten_dl_powers(cand, cfg)
        candidates.append(cand)
    best = _best_accepted(channels, candidates, cfg, floor)
    return state if best is None else best


def _power_refresh(kind, index, channels, state, cfg, opts):
    """Guarded powers-and-multipliers re-solve at the current directions."""
    cov = rx_covariances(channels, state, cfg)
    gradients = compute_gradients(channels, state, cfg, cov=cov)
    floor = _ascent_floor(wsr(cov, cfg))
    try:
        cand = _digital_candidate(kind, index, channels, state, gradients,
                                  cfg, opts, cov, None)
    except BracketError:
        return state
    best = _best_accepted(channels, [cand], cfg, floor)
    return state if best is None else best


def _power_polish(channels, state, cfg, opts):
    """Re-pair every user's powers and multipliers at the final state.

    Analog acceptance rescales downlink powers while keeping the
    multipliers of an earlier solve, so a run that converges right after
    such a step would emit duals inconsistent with its slacks. The
    re-solve maximizes a bound that touches the current rate, so each
    refresh can only climb and the stored multipliers come out of the
    bisection that produced the final powers.
    """
    for j in range(len(channels.dl)):
        state = _power_refresh("dl", j, channels, state, cfg, opts)
    for k in range(len(channels.ul)):
        state = _power_refresh("ul", k, channels, state, cfg, opts)
    return state


def _outer_loop(channels, cfg, opts, state, trace_wsr, trace_violation,
                budget):
    """Guarded alternating iterations until convergence or budget."""
    wsr_prev = wsr(rx_covariances(channels, state, cfg), cfg)
    reason = "max-iters"
    iterations = 0
    for _ in range(budget):
        iterations += 1
        if opts.update_analog:
            state = _analog_block(channels, state, cfg, opts)
        else:
            state = _joint_digital_block(channels, state, cfg, opts)
        for j in range(len(channels.dl)):
            state = _digital_block("dl", j, channels, state, cfg, opts)
        for k in range(len(channels.ul)):
            state = _digital_block("ul", k, channels, state, cfg, opts)

        wsr_now = wsr(rx_covariances(channels, state, cfg), cfg)
        report = constraint_report(state, cfg)
        trace_wsr.append(wsr_now)
        trace_violation.append(report.max_violation)
        if abs(wsr_now - wsr_prev) < opts.rel_tol * max(abs(wsr_prev),
                                                        1e-12):
            reason = "converged"
            break
        wsr_prev = wsr_now
    return state, iterations, reason


def run_algorithm1(channels, cfg, opts=None, initial_state=None):
    """Full alternating solve.

    Per outer iteration: analog beamformer, analog combiner (each followed
    by its quantization), then per downlink user gradients, digital
    beamformer, and multiplier/water-filling power update, then the same
    per uplink user. Every block keeps its proposal only when the exact
    WSR does not decrease, so the recorded trace ascends in all modes.

    Amplitude mode warm-starts from the converged phase-only quantized
    trajectory on the same channels and initialization, then refines with
    the amplitude-projected updates; the guard makes the refinement a pure
    gain, so amplitude mode never finishes below phase-only mode.

    An externally supplied initial_state replaces the fresh
    initialization and skips the amplitude warm phase; the caller is
    responsible for its feasibility. Terminates when the relative WSR
    change drops below rel_tol or after max_outer_iters total,
    whichever comes first; a final guarded power re-solve then re-pairs
    every user's powers with freshly bisected multipliers.
    """
    opts = (opts or SolverOptions()).validate()
    if initial_state is None:
        state = init_state(channels, cfg, opts.seed,
                           identity_analog=opts.identity_analog)
    else:
        state = initial_state.copy()
    if not channels.ul and not channels.dl:
        report = constraint_report(state, cfg)
        return state, ConvergenceTrace(
            wsr_nats=[0.0], max_violation=[report.max_violation],
            iterations=0, reason="converged")

    trace_wsr, trace_violation = [], []
    iterations = 0
    reason = "max-iters"
    if (opts.mode == "hybf-am" and opts.update_analog
            and initial_state is None):
        warm = replace(opts, mode="hybf-um", quantize=True)
        state, used, reason = _outer_loop(
            channels, cfg, warm, state, trace_wsr, trace_violation,
            opts.max_outer_iters)
        iterations += used
    budget = opts.max_outer_iters - iterations
    if budget > 0:
        state, used, reason = _outer_loop(
            channels, cfg, opts, state, trace_wsr, trace_violation, budget)
        iterations += used

    state = _power_polish(channels, state, cfg, opts)
    if trace_wsr:
        trace_wsr[-1] = wsr(rx_covariances(channels, state, cfg), cfg)
        trace_violation[-1] = constraint_report(state, cfg).max_violation

    return state, ConvergenceTrace(
        wsr_nats=trace_wsr, max_violation=trace_violation,
        iterations=iterations, reason=reason)

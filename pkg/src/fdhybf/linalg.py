"""Dense matrix kernels used by the beamforming updates.

All kernels operate on complex numpy arrays. Hermitian inputs are symmetrized
on entry so that accumulated floating-point asymmetry (1e-16 scale) never
propagates into eigensolvers.
"""

import numpy as np
import scipy.linalg

from .errors import SingularMatrixError

# Ill-conditioning threshold beyond which the right-hand member of a
# generalized eigenproblem gets a relative ridge before factorization.
_COND_CAP = 1e12
_RIDGE_REL = 1e-10


def herm(x):
    """Hermitian part (x + x^H)/2."""
    return 0.5 * (x + x.conj().T)


def _check_finite(x, name):
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")


def ln_det(x):
    """Natural log-determinant of a Hermitian positive-definite matrix.

    Computed as 2*sum(log(diag(chol(X)))) for numerical stability; raises
    SingularMatrixError when the Cholesky factorization fails.
    """
    x = np.asarray(x)
    _check_finite(x, "matrix")
    try:
        chol = scipy.linalg.cholesky(herm(x), lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            "log-det of a non positive-definite matrix"
        ) from exc
    return 2.0 * float(np.sum(np.log(np.real(np.diag(chol)))))


def pd_inv(x):
    """Inverse of a Hermitian positive-definite matrix via Cholesky.

    Returns the Hermitian-symmetrized inverse; raises SingularMatrixError
    when the factorization fails.
    """
    x = np.asarray(x)
    _check_finite(x, "matrix")
    try:
        factor = scipy.linalg.cho_factor(herm(x), lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrixError(
            "inverse of a non positive-definite matrix"
        ) from exc
    inv = scipy.linalg.cho_solve(factor, np.eye(x.shape[0], dtype=complex),
                                 check_finite=False)
    return herm(inv)


def _fix_column_phases(vecs):
    """Scale each column so its largest-magnitude entry is real positive.

    Ties on the magnitude pick the smallest row index (np.argmax convention),
    making the eigenvector output deterministic up to solver precision.
    """
    vecs = np.array(vecs, copy=True)
    for col in range(vecs.shape[1]):
        idx = int(np.argmax(np.abs(vecs[:, col])))
        pivot = vecs[idx, col]
        mag = np.abs(pivot)
        if mag > 0.0:
            vecs[:, col] *= pivot.conj() / mag
    return vecs


def gen_dominant_eigvecs(a, b, d):
    """Top-d generalized eigenvectors of the Hermitian pair (A, B).

    Solves A v = lambda B v with B positive definite, returning the d
    eigenvectors of largest eigenvalue as columns, B-orthonormal
    (V^H B V = I_d), eigenvalues in descending order. A near-singular B
    (condition number above 1e12, or a failed Cholesky) receives a ridge
    1e-10 * tr(B)/n * I before factorization; a B that stays singular after
    that raises SingularMatrixError.

    Parameters
    ----------
    a, b : (n, n) array_like, Hermitian
    d : int, 1 <= d <= n

    Returns
    -------
    vecs : (n, d) ndarray
    vals : (d,) ndarray, descending
    """
    a = herm(np.asarray(a, dtype=complex))
    b = herm(np.asarray(b, dtype=complex))
    _check_finite(a, "left member")
    _check_finite(b, "right member")
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n, n):
        raise ValueError("members must be square and of equal size")
    if not 1 <= d <= n:
        raise ValueError(f"d={d} outside [1, {n}]")

    b_scale = np.real(np.trace(b)) / n
    if b_scale <= 0.0:
        raise SingularMatrixError("right member has non-positive trace")
    b_eigs = np.linalg.eigvalsh(b)
    needs_ridge = b_eigs[0] <= 0.0 or (b_eigs[-1] / max(b_eigs[0], 1e-300)) > _COND_CAP
    for attempt in range(3):
        if needs_ridge:
            b = b + (_RIDGE_REL * b_scale * 10.0**attempt) * np.eye(n)
        try:
            vals, vecs = scipy.linalg.eigh(a, b, check_finite=False)
            break
        except scipy.linalg.LinAlgError:
            needs_ridge = True
    else:
        raise SingularMatrixError("right member is singular beyond ridge repair")

    order = np.argsort(vals)[::-1][:d]
    return _fix_column_phases(vecs[:, order]), vals[order]


def svd_rediagonalize(p):
    """Re-diagonalize a Hermitian PSD power matrix.

    Returns diag(s) with s the singular values (= eigenvalues for PSD input)
    in descending order; the trace is preserved to machine precision. Small
    negative eigenvalues from rounding are clipped to zero.
    """
    p = np.asarray(p, dtype=complex)
    _check_finite(p, "power matrix")
    vals = np.linalg.eigvalsh(herm(p))
    tol = -1e-10 * max(1.0, float(np.max(np.abs(vals))))
    if np.min(vals) < tol:
        raise ValueError("power matrix has a significantly negative eigenvalue")
    vals = np.clip(vals, 0.0, None)[::-1]
    return np.diag(vals.astype(float))


def eig_rediagonalize(p):
    """Like svd_rediagonalize but also returns the unitary basis W.

    P = W diag(s) W^H with s descending. Callers that must keep a product
    U P U^H invariant rotate U by W alongside the sort.
    """
    p = np.asarray(p, dtype=complex)
    vals, w = np.linalg.eigh(herm(p))
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    return np.diag(vals.astype(float)), w[:, order]


def unit_modulus_project(x):
    """Entry-wise projection onto the unit circle, x/|x|; zeros map to 1."""
    x = np.asarray(x, dtype=complex)
    _check_finite(x, "matrix")
    mag = np.abs(x)
    out = np.where(mag > 0.0, x / np.where(mag > 0.0, mag, 1.0), 1.0 + 0.0j)
    return out


def quantize_phases(x, n_ps, preserve_amplitude=False):
    """Snap entry phases to the uniform grid {2*pi*q/n_ps, q=0..n_ps-1}.

    A phase exactly midway between two grid points resolves to the smaller
    index q. With preserve_amplitude the magnitudes pass through unchanged
    (amplitude-modulator hardware); otherwise outputs are unit-modulus
    (phase-shifter hardware), with zero entries mapping to 1 (phase 0).
    """
    if n_ps < 2 or (n_ps & (n_ps - 1)) != 0:
        raise ValueError(f"n_ps={n_ps} must be a power of two >= 2")
    x = np.asarray(x, dtype=complex)
    _check_finite(x, "matrix")
    t = np.angle(x) * (n_ps / (2.0 * np.pi))
    q = np.ceil(t - 0.5).astype(np.int64) % n_ps
    grid = 2.0 * np.pi * q / n_ps
    unit = np.cos(grid) + 1j * np.sin(grid)
    if preserve_amplitude:
        return np.abs(x) * unit
    return unit

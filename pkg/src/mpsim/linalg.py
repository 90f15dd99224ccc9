"""Dense numerical kernels shared by the simulation engines.

Houses the truncated SVD used at every bond split, QR orthonormalization
for canonical-form bookkeeping, and a Lanczos routine that applies the
exponential of a Hermitian linear map to a vector without materializing
the matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg


class LanczosConvergenceError(RuntimeError):
    """Krylov space exhausted before the residual estimate met the tolerance."""

    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"Lanczos did not converge, residual estimate {residual:.3e}")


@dataclass(frozen=True)
class TruncationReport:
    """Outcome of one truncated SVD.

    Attributes:
        kept: Number of singular values retained.
        discarded_weight: Sum of squared discarded (raw) singular values.
        singular_values_kept: Retained raw singular values, descending.
    """

    kept: int
    discarded_weight: float
    singular_values_kept: np.ndarray


def truncated_svd(
    m: np.ndarray, s_max: float, chi_max: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, TruncationReport]:
    """SVD of a matrix, truncated by threshold and bond-dimension cap.

    The threshold is absolute on the Schmidt values of the normalized
    state: a singular value is kept while s_i / ||s||_2 >= s_max. At
    least one value is always kept, at most chi_max. The returned
    singular values are the raw (unnormalized) ones; callers decide
    whether to renormalize.

    Args:
        m: Matrix to decompose.
        s_max: Threshold on normalized singular values, >= 0.
        chi_max: Maximum number of values to keep, >= 1.

    Returns:
        Tuple (U, S, V_dag, report) with U @ diag(S) @ V_dag ~ m, U having
        orthonormal columns and V_dag orthonormal rows.

    Raises:
        ValueError: On non-finite input or invalid parameters.
    """
    if s_max < 0:
        raise ValueError(f"s_max must be >= 0, got {s_max}")
    if chi_max < 1:
        raise ValueError(f"chi_max must be >= 1, got {chi_max}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    try:
        u, s, v_dag = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        u, s, v_dag = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    total = float(np.linalg.norm(s))
    if total > 0.0:
        kept = int(np.count_nonzero(s / total >= s_max))
    else:
        kept = 1
    kept = max(1, min(kept, chi_max))
    discarded_weight = float(np.sum(s[kept:] ** 2))
    report = TruncationReport(
        kept=kept, discarded_weight=discarded_weight, singular_values_kept=s[:kept].copy()
    )
    return u[:, :kept], s[:kept], v_dag[:kept, :], report


def qr_orthonormalize(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR with the diagonal of R fixed to be real and non-negative.

    The sign convention makes the decomposition unique for full-rank
    input, so repeated canonicalization is idempotent.

    Args:
        m: Matrix to decompose.

    Returns:
        Tuple (Q, R) with orthonormal columns in Q and Q @ R = m.
    """
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r)
    safe = np.where(np.abs(diag) == 0.0, 1.0, diag)
    phases = safe / np.abs(safe)
    q = q * phases[np.newaxis, :]
    r = phases.conj()[:, np.newaxis] * r
    return q, r


def _expm_tridiag_first_column(
    alphas: list[float], betas: list[float], prefactor: complex
) -> np.ndarray:
    """First column of exp(prefactor * T) for real symmetric tridiagonal T."""
    if len(alphas) == 1:
        return np.array([np.exp(prefactor * alphas[0])])
    eigvals, eigvecs = scipy.linalg.eigh_tridiagonal(alphas, betas)
    return eigvecs @ (np.exp(prefactor * eigvals) * eigvecs[0, :])


def _lanczos_attempt(
    apply_h: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    prefactor: complex,
    krylov_max: int,
    tol: float,
) -> tuple[np.ndarray, float]:
    """One Lanczos pass. Returns (result, residual estimate)."""
    norm_v = float(np.linalg.norm(v))
    if norm_v == 0.0:
        raise ValueError("Lanczos input vector has zero norm")
    q = np.asarray(v, dtype=complex) / norm_v
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    w = apply_h(q)
    alphas.append(float(np.vdot(q, w).real))
    w = w - alphas[0] * q
    residual = np.inf
    coeff = np.zeros(1)
    for _ in range(krylov_max - 1):
        coeff = _expm_tridiag_first_column(alphas, betas, prefactor)
        beta = float(np.linalg.norm(w))
        residual = beta * abs(coeff[-1])
        scale = max(1.0, max(abs(a) for a in alphas), max(betas, default=0.0))
        if residual <= tol or beta <= 1e-14 * scale:
            # beta ~ 0 means the Krylov space is invariant and the result exact
            return norm_v * (np.column_stack(basis) @ coeff), min(residual, tol)
        q = w / beta
        # full reorthogonalization keeps the tridiagonal model faithful
        for b in basis:
            q = q - np.vdot(b, q) * b
        q_norm = float(np.linalg.norm(q))
        if q_norm <= 1e-14:
            return norm_v * (np.column_stack(basis) @ coeff), min(residual, tol)
        q = q / q_norm
        basis.append(q)
        betas.append(beta)
        w = apply_h(q) - beta * basis[-2]
        alpha = float(np.vdot(q, w).real)
        alphas.append(alpha)
        w = w - alpha * q
    coeff = _expm_tridiag_first_column(alphas, betas, prefactor)
    beta = float(np.linalg.norm(w))
    residual = beta * abs(coeff[-1])
    return norm_v * (np.column_stack(basis) @ coeff), residual


def lanczos_expm_apply(
    apply_h: Callable[[np.ndarray], np.ndarray],
    v: np.ndarray,
    prefactor: complex,
    krylov_max: int = 25,
    tol: float = 1e-12,
) -> np.ndarray:
    """Approximate exp(prefactor * H) @ v for a Hermitian linear map H.

    Builds a Krylov space of at most krylov_max vectors with full
    reorthogonalization and exponentiates the tridiagonal projection.
    If the residual estimate does not reach tol, the application is
    restarted once as two half-prefactor steps before giving up.

    Args:
        apply_h: Action of H on a vector, Hermitian as a linear map.
        v: Nonzero start vector.
        prefactor: Scalar multiplying H in the exponent.
        krylov_max: Krylov space size cap.
        tol: Residual-estimate tolerance.

    Returns:
        Approximation of exp(prefactor * H) @ v.

    Raises:
        LanczosConvergenceError: Residual estimate above tol after the restart.
        ValueError: Zero input vector.
    """
    result, residual = _lanczos_attempt(apply_h, v, prefactor, krylov_max, tol)
    if residual <= tol:
        return result
    half = prefactor / 2.0
    mid, res_a = _lanczos_attempt(apply_h, v, half, krylov_max, tol)
    if res_a > tol:
        raise LanczosConvergenceError(res_a)
    out, res_b = _lanczos_attempt(apply_h, mid, half, krylov_max, tol)
    if res_b > tol:
        raise LanczosConvergenceError(res_b)
    return out

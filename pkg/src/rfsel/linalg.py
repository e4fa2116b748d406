"""Dense complex linear-algebra kernels.

Everything here is a pure function of its inputs. Matrix indices are
0-based (numpy convention); the 1-based chain labels used by
:class:`rfsel.txselect.SelectionSet` are converted at the call site.
"""

from __future__ import annotations

from typing import NamedTuple

import numba
import numpy as np
import scipy.linalg

from .errors import ModelError, NumericError, SingularUpdateError

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PIVOT_TOL = 1e-12


class EigenPair(NamedTuple):
    """Eigenvalues in descending order and the matching unitary eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray


def _as_square(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ModelError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ModelError("matrix has non-finite entries")
    return a


def check_hermitian(a, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``a`` as complex128 after verifying ``max|a - a^H| <= tol * max|a|``."""
    a = _as_square(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    if a.size and np.max(np.abs(a - a.conj().T)) > tol * scale:
        raise ModelError("matrix is not Hermitian within tolerance")
    return a


@numba.njit(cache=True, nogil=True)
def _jacobi_kernel(a, tol, max_sweeps):
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    norm = 0.0
    for i in range(n):
        for k in range(n):
            norm += a[i, k].real ** 2 + a[i, k].imag ** 2
    norm = np.sqrt(norm)
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for k in range(n):
                if i != k:
                    off += a[i, k].real ** 2 + a[i, k].imag ** 2
        if np.sqrt(off) <= tol * norm:
            return a, v, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                d = apq / mag
                dc = np.conj(d)
                tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q] * dc
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k] * d
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q] * dc
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    return a, v, -1


def hermitian_evd(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenPair:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Iterates until the off-diagonal Frobenius mass drops below
    ``tol * ||a||_F``. Eigenvalues are returned in descending order.

    Raises
    ------
    ModelError
        If ``a`` is not Hermitian.
    NumericError
        If the sweep cap is reached first.
    """
    a = check_hermitian(a)
    n = a.shape[0]
    if n == 0:
        return EigenPair(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    work = 0.5 * (a + a.conj().T)
    diag, vecs, sweeps = _jacobi_kernel(work, tol, max_sweeps)
    if sweeps < 0:
        raise NumericError(f"Jacobi did not converge within {max_sweeps} sweeps")
    w = np.real(np.diag(diag)).copy()
    order = np.argsort(-w, kind="stable")
    return EigenPair(w[order], vecs[:, order])


def _clamped_spectrum(a) -> np.ndarray:
    w = hermitian_evd(a).values
    if w.size == 0:
        return w
    lam_max = max(w[0], 0.0)
    if w[-1] < -PSD_TOL * lam_max or (lam_max == 0.0 and w[-1] < 0.0):
        raise NumericError(f"matrix is not PSD (min eigenvalue {w[-1]:.3e})")
    return np.clip(w, 0.0, None)


def logdet_psd(a) -> float:
    """log2 of the determinant of a Hermitian PSD matrix.

    Uses a Cholesky factorisation when the matrix is positive definite and
    falls back to the clamped Jacobi spectrum otherwise, so a singular PSD
    input yields ``-inf``.
    """
    a = _as_square(a)
    if a.shape[0] == 0:
        return 0.0
    try:
        chol = np.linalg.cholesky(0.5 * (a + a.conj().T))
    except np.linalg.LinAlgError:
        w = _clamped_spectrum(a)
        with np.errstate(divide="ignore"):
            return float(np.sum(np.log2(w)))
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def hermitian_inverse(a) -> np.ndarray:
    """Inverse of a Hermitian matrix, returned exactly Hermitian.

    Positive-definite inputs (the only kind the selectors produce) go
    through Cholesky; anything else through a general LU inverse.
    """
    a = check_hermitian(a)
    n = a.shape[0]
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
        inv = scipy.linalg.cho_solve(factor, np.eye(n, dtype=np.complex128), check_finite=False)
    except np.linalg.LinAlgError:
        try:
            inv = np.linalg.inv(a)
        except np.linalg.LinAlgError as exc:
            raise NumericError("matrix is singular") from exc
    return 0.5 * (inv + inv.conj().T)


def rank_one_inverse_update(inv, u, c: float) -> np.ndarray:
    """Return ``(M - c u u^H)^{-1}`` given ``inv = M^{-1}`` (Sherman-Morrison)."""
    inv = np.asarray(inv, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    if c == 0.0:
        return inv.copy()
    w = inv @ u
    den = 1.0 - c * np.real(np.vdot(u, w))
    if abs(den) < PIVOT_TOL:
        raise SingularUpdateError(f"rank-one update denominator {den:.3e}")
    return inv + (c / den) * np.outer(w, w.conj())


def removal_permutation(n: int, j: int) -> np.ndarray:
    """Index order that moves position ``j`` to the end and shifts the tail up."""
    if not 0 <= j < n:
        raise ModelError(f"index {j} out of range for size {n}")
    return np.concatenate([np.arange(j), np.arange(j + 1, n), [j]])


def remove_rowcol_inverse(inv, j: int) -> np.ndarray:
    """Inverse of ``M`` with row and column ``j`` deleted, given ``inv = M^{-1}``.

    Permutes ``j`` to the last position and takes the Schur complement of
    the trailing scalar block of the permuted inverse.
    """
    inv = np.asarray(inv, dtype=np.complex128)
    n = inv.shape[0]
    order = removal_permutation(n, j)
    perm = inv[np.ix_(order, order)]
    d11 = perm[:-1, :-1]
    d12 = perm[:-1, -1]
    d21 = perm[-1, :-1]
    d22 = perm[-1, -1]
    if abs(d22) < PIVOT_TOL:
        raise SingularUpdateError(f"Schur pivot {abs(d22):.3e} is singular")
    return d11 - np.outer(d12, d21) / d22

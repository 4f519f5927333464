"""Takagi factorization of complex symmetric matrices.

A complex symmetric ``A`` factors as ``A = U diag(s) U^T`` with ``U`` unitary
and ``s >= 0``.  We compute it through the real symmetric representation of
the conjugate-linear map ``z -> A conj(z)``: writing ``A = R + iS`` with real
symmetric ``R, S``, the block matrix ``[[R, S], [S, -R]]`` is symmetric and
its eigenpairs come in ``+-s`` pairs; eigenvectors for the non-negative half,
read back as complex vectors and orthonormalized over C, give the columns of
``U``.  This avoids the phase bookkeeping of SVD-based constructions and is
exact for repeated and zero singular values.
"""

from __future__ import annotations

import numpy as np

__all__ = ["takagi"]


def takagi(A: np.ndarray, sym_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Factor a complex symmetric matrix as ``A = U diag(values) U^T``.

    Parameters
    ----------
    A : (m, m) complex ndarray
        Symmetric within ``sym_tol`` (relative Frobenius norm).

    Returns
    -------
    U : (m, m) complex ndarray, unitary
    values : (m,) float ndarray, non-negative, sorted descending
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    m = A.shape[0]
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > sym_tol * max(1.0, scale):
        raise ValueError("matrix is not symmetric within tolerance")
    A = 0.5 * (A + A.T)

    if scale == 0.0:
        return np.eye(m, dtype=complex), np.zeros(m)

    R = A.real
    S = A.imag
    T = np.block([[R, S], [S, -R]])
    w, V = np.linalg.eigh(T)

    order = np.argsort(-w, kind="stable")
    cols: list[np.ndarray] = []
    vals: list[float] = []
    for i in order:
        if len(cols) == m:
            break
        u = V[:m, i] + 1j * V[m:, i]
        # The +-pairing maps u -> iu; project out the complex span of the
        # columns picked so far to select one vector per pair.
        for c in cols:
            u = u - c * np.vdot(c, u)
        nrm = np.linalg.norm(u)
        if nrm < 1e-8:
            continue
        cols.append(u / nrm)
        vals.append(max(float(w[i]), 0.0))
    if len(cols) != m:
        raise np.linalg.LinAlgError("takagi vector selection failed")

    U = np.array(cols).T
    values = np.array(vals)
    return U, values

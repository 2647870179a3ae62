"""Small dense complex linear algebra: Gram matrices, orthonormalization,
Hermitian eigenproblems and singular values.

Matrices are plain complex numpy arrays.  Everything here runs on matrices of
dimension at most a few dozen, so LAPACK via numpy is used for the
eigenproblem and the rest is built on top of it.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch, NotHermitian

HERMITIAN_TOL = 1e-10
RANK_TOL = 1e-10


def hermitian_eigen(m):
    """Eigenvalues (real, ascending) and orthonormal eigenvectors (columns)
    of a Hermitian matrix.

    Raises DimensionMismatch for non-square input and NotHermitian when
    max|M - M^H| exceeds 1e-10 * max|M|.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max() if m.size else 0.0
    asym = np.abs(m - m.conj().T).max() if m.size else 0.0
    if asym > HERMITIAN_TOL * scale:
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds {HERMITIAN_TOL:.0e} * {scale:.3e}")
    w, v = np.linalg.eigh((m + m.conj().T) / 2.0)
    return w, v


def singular_values(m):
    """Singular values in descending order, as square roots of the
    eigenvalues of M^H M."""
    m = np.asarray(m, dtype=complex)
    w, _ = hermitian_eigen(m.conj().T @ m)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def gram(vectors, inner):
    """Gram matrix G_ij = inner(v_i, v_j) for a sesquilinear Hermitian form
    (anti-linear in the first slot).  Empty input gives a 0x0 matrix."""
    n = len(vectors)
    g = np.zeros((n, n), dtype=complex)
    for i in range(n):
        g[i, i] = inner(vectors[i], vectors[i])
        for j in range(i + 1, n):
            g[i, j] = inner(vectors[i], vectors[j])
            g[j, i] = g[i, j].conjugate()
    return g


def orthonormalize(vectors, inner, rank_tol=RANK_TOL):
    """Pivoted modified Gram-Schmidt over abstract vectors.

    Vectors only need `+` and scalar `*`; `inner` supplies the Hermitian
    form.  Vectors whose residual norm after projection falls below
    rank_tol * (largest input norm) are dropped, so the output spans the
    input and has Gram matrix equal to the identity.
    """
    work = list(vectors)
    if not work:
        return []
    norms = [math.sqrt(max(inner(v, v).real, 0.0)) for v in work]
    scale = max(norms)
    if scale == 0.0:
        return []
    basis = []
    remaining = list(range(len(work)))
    while remaining:
        # pivot on the largest residual norm
        res = {i: math.sqrt(max(inner(work[i], work[i]).real, 0.0)) for i in remaining}
        piv = max(remaining, key=lambda i: res[i])
        if res[piv] < rank_tol * scale:
            break
        q = (1.0 / res[piv]) * work[piv]
        # one re-orthogonalization pass keeps the Gram at identity to 1e-12
        for b in basis:
            q = q + (-inner(b, q)) * b
        qn = math.sqrt(max(inner(q, q).real, 0.0))
        q = (1.0 / qn) * q
        basis.append(q)
        remaining.remove(piv)
        for i in remaining:
            work[i] = work[i] + (-inner(q, work[i])) * q
    return basis

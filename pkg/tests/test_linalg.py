import numpy as np
import pytest

from extlab import linalg
from extlab.errors import DimensionMismatch, NotHermitian


def vec_inner(a, b):
    return complex(np.vdot(a, b))


def test_hermitian_eigen_known_matrix():
    m = np.array([[2.0, 1.0j], [-1.0j, 2.0]])
    w, v = linalg.hermitian_eigen(m)
    assert w == pytest.approx([1.0, 3.0])
    assert np.abs(m @ v - v @ np.diag(w)).max() < 1e-12


def test_hermitian_eigen_rejects_bad_input():
    with pytest.raises(DimensionMismatch):
        linalg.hermitian_eigen(np.zeros((2, 3)))
    with pytest.raises(NotHermitian):
        linalg.hermitian_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_singular_values_match_lapack():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    got = linalg.singular_values(m)
    want = np.linalg.svd(m, compute_uv=False)
    assert got == pytest.approx(want)


def test_gram_hermitian():
    rng = np.random.default_rng(1)
    vecs = [rng.standard_normal(3) + 1j * rng.standard_normal(3) for _ in range(3)]
    g = linalg.gram(vecs, vec_inner)
    assert np.abs(g - g.conj().T).max() < 1e-14
    assert g[0, 1] == pytest.approx(vec_inner(vecs[0], vecs[1]))


def test_orthonormalize_properties():
    rng = np.random.default_rng(2)
    vecs = [rng.standard_normal(5) + 1j * rng.standard_normal(5) for _ in range(4)]
    basis = linalg.orthonormalize(vecs, vec_inner)
    assert len(basis) == 4
    g = linalg.gram(basis, vec_inner)
    assert np.abs(g - np.eye(4)).max() < 1e-12


def test_orthonormalize_drops_dependent_vectors():
    v = np.array([1.0, 2.0, 0.0], dtype=complex)
    basis = linalg.orthonormalize([v, 2.0 * v, 1j * v], vec_inner)
    assert len(basis) == 1
    assert linalg.orthonormalize([], vec_inner) == []
    assert linalg.orthonormalize([0.0 * v], vec_inner) == []

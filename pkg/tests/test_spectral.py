import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relaybeam import spectral
from relaybeam.spectral import ContractViolation, InvalidSpectrum

from .conftest import random_hermitian


def test_check_hermitian_names_offending_entry():
    A = np.eye(3, dtype=complex)
    A[0, 2] = 1j
    with pytest.raises(ContractViolation, match=r"\(0,2\)|\(2,0\)"):
        spectral.check_hermitian(A)


def test_check_hermitian_rejects_non_square():
    with pytest.raises(ContractViolation):
        spectral.check_hermitian(np.ones((2, 3)))


def test_identity_eigendecomposition():
    dec = spectral.eig_hermitian(np.eye(3))
    np.testing.assert_array_equal(dec.eigenvalues, [1, 1, 1])
    # eigenvectors are a permutation of the standard basis
    P = np.abs(dec.eigenvectors)
    np.testing.assert_allclose(np.sort(P, axis=0)[-1], 1.0)
    np.testing.assert_allclose(P.sum(axis=0), 1.0)


def test_diagonal_eigendecomposition():
    dec = spectral.eig_hermitian(np.diag([1.0, 3.0])[::-1, ::-1])
    np.testing.assert_allclose(dec.eigenvalues, [3, 1])
    np.testing.assert_allclose(dec.eigenvectors, np.eye(2), atol=1e-15)


def test_random_reconstruction_and_orthonormality(rng):
    A = random_hermitian(rng, 8)
    dec = spectral.eig_hermitian(A)
    assert np.linalg.norm(dec.reconstruct() - A) <= 1e-9 * np.linalg.norm(A)
    V = dec.eigenvectors
    assert np.linalg.norm(V.conj().T @ V - np.eye(8)) <= 1e-10
    assert np.all(np.diff(dec.eigenvalues) <= 0)


def test_phase_convention_is_deterministic(rng):
    A = random_hermitian(rng, 6)
    V = spectral.eig_hermitian(A).eigenvectors
    idx = np.argmax(np.abs(V), axis=0)
    pivots = V[idx, np.arange(6)]
    np.testing.assert_allclose(pivots.imag, 0, atol=1e-15)
    assert np.all(pivots.real > 0)
    # repeated calls give the same vectors
    V2 = spectral.eig_hermitian(A.copy()).eigenvectors
    np.testing.assert_array_equal(V, V2)


def test_stack_matches_single(rng):
    mats = np.stack([random_hermitian(rng, 5) for _ in range(4)])
    for single, batch in zip(map(spectral.eig_hermitian, mats), spectral.eig_hermitian_stack(mats)):
        np.testing.assert_allclose(batch.eigenvalues, single.eigenvalues, atol=1e-12)
        np.testing.assert_allclose(batch.eigenvectors, single.eigenvectors, atol=1e-10)


def test_principal_eigenvector_diagonal():
    pv = spectral.principal_eigenvector(np.diag([5.0, 2.0, 1.0]))
    np.testing.assert_allclose(pv.vector, [1, 0, 0])
    assert pv.value == 5.0 and not pv.degenerate


def test_principal_eigenvector_degenerate_flagged():
    a = spectral.principal_eigenvector(2.5 * np.eye(4))
    b = spectral.principal_eigenvector(2.5 * np.eye(4))
    assert a.degenerate
    np.testing.assert_array_equal(a.vector, b.vector)
    assert np.isclose(np.linalg.norm(a.vector), 1.0)


def test_principal_eigenvector_residual(rng):
    A = random_hermitian(rng, 8)
    pv = spectral.principal_eigenvector(A)
    assert np.linalg.norm(A @ pv.vector - pv.value * pv.vector) <= 1e-9
    assert np.isclose(pv.value, np.linalg.eigvalsh(A).max())


def test_select_count_dominant():
    assert spectral.select_principal_count([10, 0.1, 0.1], 1.0, 0.9) == 1


def test_select_count_flat_spectrum_falls_back_to_variance():
    assert spectral.select_principal_count([4, 4, 4, 4], 0.0, 0.95) == 4


def test_select_count_rejects_nonpositive():
    with pytest.raises(InvalidSpectrum):
        spectral.select_principal_count([0.0, -1.0], 0.0)


def _scan(lam, threshold, frac):
    # joint rule by exhaustive scan: smallest N meeting all three conditions,
    # otherwise the largest N whose leading block passes both eigenvalue tests
    # if that is below the variance count
    lam = np.sort(lam)[::-1]
    total = lam.sum()
    n_var = next(n for n in range(1, lam.size + 1) if lam[:n].sum() >= frac * total * (1 - 1e-15))
    n_cand = 0
    for n in range(1, lam.size + 1):
        if np.all(lam[:n] > threshold) and np.all(lam[:n] > lam.mean()):
            n_cand = n
    if n_cand == 0:
        return n_var
    return min(n_var, n_cand)


def test_select_count_matches_exhaustive_scan_on_error_spectrum(rng):
    from relaybeam.estimator import error_spectrum
    f = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    R = np.outer(f, f.conj()) + 0.2 * np.linalg.norm(f) ** 2 * np.eye(8)
    noise = 0.05 * random_hermitian(rng, 8)
    C = error_spectrum(R + noise @ noise.conj().T, 0.2)
    lam = spectral.eig_hermitian(C).eigenvalues
    for thr in (0.0, 0.1, lam[1]):
        assert spectral.select_principal_count(lam, thr, 0.95) == _scan(lam, thr, 0.95)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(0.0, 100.0), min_size=1, max_size=10).filter(lambda v: max(v) > 1e-6),
    st.floats(0.0, 50.0),
    st.floats(0.05, 0.99),
)
def test_select_count_property(values, threshold, frac):
    lam = np.sort(values)[::-1]
    n = spectral.select_principal_count(lam, threshold, frac)
    assert 1 <= n <= lam.size
    assert n == _scan(lam, threshold, frac)


def test_axis_projector():
    P = spectral.projector_from_basis([np.array([1.0, 0.0])])
    np.testing.assert_array_equal(P.matrix, np.diag([1, 0]))
    assert P.rank == 1 and P.dim == 2


def test_full_basis_projector_is_identity(rng):
    V = spectral.eig_hermitian(random_hermitian(rng, 6)).eigenvectors
    P = spectral.projector_from_basis(V)
    np.testing.assert_allclose(P.matrix, np.eye(6), atol=1e-12)


def test_projector_invariants(rng):
    P = spectral.principal_projector(random_hermitian(rng, 8), 3)
    A = P.matrix
    assert np.linalg.norm(A @ A - A) <= 1e-10
    np.testing.assert_allclose(A, A.conj().T, atol=1e-14)
    assert abs(np.trace(A).real - 3) <= 1e-9


def test_projector_rejects_non_orthonormal():
    with pytest.raises(ContractViolation):
        spectral.projector_from_basis([np.array([1.0, 0.0]), np.array([1.0, 1.0]) / np.sqrt(2)])

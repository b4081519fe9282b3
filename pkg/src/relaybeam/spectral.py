"""Dense Hermitian eigen-analysis kernels.

Every eigenvector returned here is phase-fixed: its largest-magnitude
component is real and positive, so repeated runs give identical vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

HERMITIAN_ATOL = 1e-12
ORTHONORMAL_ATOL = 1e-10
DEGENERACY_GAP = 1e-12


class ContractViolation(ValueError):
    """An input broke the structural precondition of a kernel."""


class InvalidSpectrum(ValueError):
    """A spectrum has no positive eigenvalue to select from."""


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns, orthonormal

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


@dataclass(frozen=True)
class SubspaceProjector:
    matrix: np.ndarray
    rank: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other


class PrincipalVector(NamedTuple):
    vector: np.ndarray
    value: float
    degenerate: bool


def check_hermitian(A: np.ndarray, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Return `A` as a complex square array, raising if it is not Hermitian.

    The tolerance is absolute for matrices with entries of order one and
    grows with the largest entry magnitude otherwise.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {A.shape}")
    diff = np.abs(A - A.conj().T)
    scale = max(1.0, float(np.max(np.abs(A), initial=0.0)))
    worst = np.unravel_index(np.argmax(diff), diff.shape) if diff.size else (0, 0)
    if diff.size and diff[worst] > atol * scale:
        i, j = (int(k) for k in worst)
        raise ContractViolation(
            f"matrix is not Hermitian: entry ({i},{j}) = {A[i, j]} but "
            f"conj(entry ({j},{i})) = {np.conj(A[j, i])}"
        )
    return A


def fix_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so that its largest-magnitude entry is real-positive.

    Accepts a vector, a matrix of column vectors, or a stack of such matrices.
    """
    V = np.array(vectors, dtype=complex, copy=True)
    squeeze = V.ndim == 1
    if squeeze:
        V = V[:, None]
    idx = np.argmax(np.abs(V), axis=-2)[..., None, :]
    pivots = np.take_along_axis(V, idx, axis=-2)
    mags = np.abs(pivots)
    rot = np.where(mags > 0, mags / np.where(mags > 0, pivots, 1), 1)
    V *= rot
    np.put_along_axis(V, idx, np.abs(np.take_along_axis(V, idx, axis=-2)), axis=-2)
    return V[:, 0] if squeeze else V


def eig_hermitian(A: np.ndarray) -> EigenDecomposition:
    """Eigen-decompose a Hermitian matrix, eigenvalues sorted descending.

    Ties keep the ascending-order index of LAPACK reversed stably, so equal
    eigenvalues list their eigenvectors in a fixed order for a fixed input.
    """
    A = check_hermitian(A)
    Ah = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(Ah)
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], fix_phase(V[:, order]))


def eig_hermitian_stack(A: np.ndarray) -> list[EigenDecomposition]:
    """`eig_hermitian` over a stack of matrices with one LAPACK call."""
    A = np.asarray(A, dtype=complex)
    for Ai in A:
        check_hermitian(Ai)
    Ah = 0.5 * (A + np.swapaxes(A.conj(), -1, -2))
    w, V = np.linalg.eigh(Ah)
    w = w[..., ::-1]
    V = fix_phase(V[..., ::-1])
    return [EigenDecomposition(w[i], V[i]) for i in range(A.shape[0])]


def principal_eigenvector(A: np.ndarray) -> PrincipalVector:
    """Unit eigenvector of the largest eigenvalue of a Hermitian matrix.

    A top eigenvalue whose gap to the next one is below 1e-12 (relative to
    the spectrum scale) is flagged as degenerate; the vector returned is
    still the deterministic first choice.
    """
    dec = eig_hermitian(A)
    lam = dec.eigenvalues
    degenerate = False
    if lam.size > 1:
        scale = max(1.0, float(np.max(np.abs(lam))))
        degenerate = bool(lam[0] - lam[1] < DEGENERACY_GAP * scale)
    return PrincipalVector(dec.eigenvectors[:, 0], float(lam[0]), degenerate)


def select_principal_count(
    eigenvalues: Sequence[float],
    noise_threshold: float,
    variance_fraction: float = 0.95,
) -> int:
    """Number of principal components to keep for a descending spectrum.

    Candidates are the leading eigenvalues that exceed both `noise_threshold`
    and the mean of the spectrum. The count is the smallest one whose
    cumulative sum reaches `variance_fraction` of the total, capped at the
    number of candidates. Without any candidate (flat spectra) the variance
    rule alone decides.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1 or lam.size == 0 or not np.any(lam > 0):
        raise InvalidSpectrum("spectrum needs at least one positive eigenvalue")
    if not 0.0 < variance_fraction < 1.0:
        raise ValueError("variance_fraction must lie in (0, 1)")
    lam = np.sort(lam)[::-1]

    total = lam.sum()
    cumulative = np.cumsum(lam)
    # first index reaching the fraction; guard against rounding on the last entry
    n_var = int(np.searchsorted(cumulative, variance_fraction * total * (1 - 1e-15)) + 1)
    n_var = min(n_var, lam.size)

    passes = (lam > noise_threshold) & (lam > lam.mean())
    n_cand = int(np.argmin(passes)) if not passes.all() else lam.size
    if n_cand == 0:
        return n_var
    return min(n_var, n_cand)


def projector_from_basis(vectors, atol: float = ORTHONORMAL_ATOL) -> SubspaceProjector:
    """Orthogonal projector B Bᴴ onto the span of orthonormal columns.

    `vectors` is either a list of M-vectors or an M×N array whose columns
    are the basis.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        B = np.asarray(vectors, dtype=complex)
    else:
        B = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    gram = B.conj().T @ B
    err = np.abs(gram - np.eye(B.shape[1]))
    if np.any(err > atol):
        i, j = np.unravel_index(np.argmax(err), err.shape)
        raise ContractViolation(
            f"basis is not orthonormal: |<b{i}, b{j}> - delta| = {err[i, j]:.3e}"
        )
    return SubspaceProjector(B @ B.conj().T, B.shape[1])


def principal_projector(A: np.ndarray, n: int) -> SubspaceProjector:
    """Projector onto the `n` principal eigenvectors of Hermitian `A`."""
    dec = eig_hermitian(A)
    return projector_from_basis(dec.eigenvectors[:, :n])

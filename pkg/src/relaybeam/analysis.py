"""Closed-form MSE bounds and the MMSE/SINR relation.

Two views of the channel-estimate error are provided. The additive view
charges every entry with the Frobenius-norm loading of the covariance; its
MSE is bracketed by the eigenvalue spread of the covariance. The subspace
view describes estimators that project a cross-correlation vector onto a
principal subspace, with the projection energy ``tau`` as its free
parameter. All inputs are assumed normalized so that the true channel has
unit expected energy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .spectral import check_hermitian


@dataclass(frozen=True)
class EigenSpreadSpec:
    lambda_max: float
    spread: float
    M: int

    def __post_init__(self):
        if self.lambda_max <= 0:
            raise ValueError("lambda_max must be positive")
        if not 0.0 <= self.spread <= self.lambda_max:
            raise ValueError("spread must lie in [0, lambda_max]")
        if self.M < 1:
            raise ValueError("M must be positive")

    @property
    def lambda_min(self) -> float:
        return self.lambda_max - self.spread


@dataclass(frozen=True)
class MseBounds:
    lower: float
    upper: float

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


@dataclass(frozen=True)
class CrossCorrAnalysis:
    xi: np.ndarray
    q_components: np.ndarray  # K x M
    tau: float
    mse1: float
    mse2: float


def mse_additive(R_f, eps_max: float, M: int | None = None) -> float:
    """Trace of the additive error covariance averaged over eps ~ U(0, eps_max]."""
    R_f = np.asarray(R_f)
    if M is None:
        M = R_f.shape[0]
    return mse_additive_norm(float(np.linalg.norm(R_f, "fro")), eps_max, M)


def mse_additive_norm(R_f_norm: float, eps_max: float, M: int) -> float:
    """`mse_additive` written in terms of the Frobenius norm alone."""
    return 0.5 * eps_max * M * R_f_norm


def frobenius_from_eigenvalues(eigenvalues) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    return float(np.sqrt(np.sum(lam**2)))


def _radicands(spec: EigenSpreadSpec) -> tuple[float, float]:
    lam, sig, M = spec.lambda_max, spec.spread, spec.M
    low = M * lam**2 - 2 * (M - 1) * sig * lam + (M - 1) * sig**2
    high = M * lam**2 - 2 * sig * lam + sig**2
    return low, high


def mse_bounds(spec: EigenSpreadSpec, eps_max: float) -> MseBounds:
    """Lower and upper MSE of the additive model for a given eigenvalue spread.

    The lower bound puts every non-extreme eigenvalue at lambda_min, the
    upper bound puts them at lambda_max.
    """
    low, high = _radicands(spec)
    # both radicands are sums of squares; tiny negatives are rounding only
    assert low > -1e-12 * spec.lambda_max**2 and high > -1e-12 * spec.lambda_max**2
    scale = 0.5 * eps_max * spec.M
    return MseBounds(float(scale * np.sqrt(max(low, 0.0))), float(scale * np.sqrt(max(high, 0.0))))


def mmse_channels(
    specs: Sequence[EigenSpreadSpec], spec_g: EigenSpreadSpec, eps_max: float
) -> tuple[float, float]:
    """Minimum MSEs of the source-relay matrix (summed over sources) and relay-destination vector."""
    total_f = sum(mse_bounds(s, eps_max).lower for s in specs)
    return float(total_f), float(mse_bounds(spec_g, eps_max).lower)


def mse_subspace(R_f_norm: float, P_s: float, P_n: float, eps_max: float, tau: float) -> float:
    """MSE of the subspace-projected estimate as a function of tau."""
    a = (
        P_s**2 * eps_max**2 * R_f_norm**2 / 3.0
        + 0.5 * P_n * P_s * eps_max * R_f_norm
        + P_n**2
    )
    return a * tau + 1.0


def mse_gap(R_f_norm: float, M: int, P_s: float, P_n: float, eps_max: float, tau: float) -> float:
    """Subspace MSE minus additive MSE at the same covariance norm."""
    return mse_subspace(R_f_norm, P_s, P_n, eps_max, tau) - mse_additive_norm(R_f_norm, eps_max, M)


def tau_threshold(lambda_max: float, M: int, P_s: float, P_n: float, eps_max: float) -> float:
    """Largest tau for which the subspace MSE stays below the additive one.

    Computed at the norm bound sqrt(M) * lambda_max. A non-positive value
    means the gap condition cannot be met for any tau.
    """
    r = np.sqrt(M) * lambda_max
    num = 0.5 * M * eps_max * r - 1.0
    den = P_s**2 * eps_max**2 * M * lambda_max**2 / 3.0 + 0.5 * P_n * P_s * eps_max * r + P_n**2
    if den <= 0:
        raise ValueError("threshold denominator must be positive (P_n > 0)")
    return float(num / den)


def gap_onset(lambda_max: float, M: int, P_s: float, P_n: float, eps_max: float, tau: float) -> float:
    """Smallest covariance norm above which the subspace MSE beats the additive one.

    The gap is a convex quadratic in the norm that is positive at zero, so
    it is negative exactly between its two roots; the lower root is
    returned (``inf`` if the gap never turns negative).
    """
    a2 = P_s**2 * eps_max**2 * tau / 3.0
    a1 = 0.5 * P_n * P_s * eps_max * tau - 0.5 * M * eps_max
    a0 = P_n**2 * tau + 1.0
    if a2 == 0:
        return a0 / -a1 if a1 < 0 else float("inf")
    disc = a1**2 - 4 * a2 * a0
    if disc < 0:
        return float("inf")
    return float((-a1 - np.sqrt(disc)) / (2 * a2))


def mmse_of_output(sinr_max: float) -> float:
    if sinr_max < 0:
        raise ValueError("sinr_max must be non-negative")
    return 1.0 / (1.0 + sinr_max)


def rayleigh_quotient_lambda(w, d, theta) -> float:
    """Largest eigenvalue of theta recovered from the weights.

    ``w`` is rescaled to unit norm, then wᴴ D^(-1/2) Θ D^(1/2) w is taken;
    ``d`` is the diagonal of D.
    """
    w = np.asarray(w, dtype=complex)
    nrm = np.linalg.norm(w)
    if nrm == 0:
        raise ValueError("zero weight vector")
    u = w / nrm
    s = np.sqrt(np.asarray(d, dtype=float))
    val = (u.conj() / s) @ (np.asarray(theta) @ (s * u))
    return float(np.real(val))


def mmse_from_weights(w, d, theta, P_T: float) -> float:
    """Output MMSE written through the weights and theta."""
    return 1.0 / (1.0 + P_T * rayleigh_quotient_lambda(w, d, theta))


def eigenpair_residual(w, d, theta, lam: float) -> float:
    """Relative residual of Θ D^(1/2) w = λ D^(1/2) w."""
    v = np.sqrt(np.asarray(d, dtype=float)) * np.asarray(w)
    r = np.asarray(theta) @ v - lam * v
    return float(np.linalg.norm(r) / np.linalg.norm(v))


# -- constructing test spectra -----------------------------------------------


def random_unitary(rng: np.random.Generator, M: int) -> np.ndarray:
    Z = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def spectrum_for_spread(
    spec: EigenSpreadSpec, rng: np.random.Generator | None = None, fill: str = "uniform"
) -> np.ndarray:
    """Descending eigenvalues with the given maximum and spread.

    The two extremes are pinned; the remaining M - 2 values are drawn
    uniformly between them (``fill="uniform"``), or set to the minimum
    (``"low"``) or maximum (``"high"``).
    """
    M = spec.M
    lam = np.empty(M)
    lam[0] = spec.lambda_max
    if M == 1:
        return lam
    lam[-1] = spec.lambda_min
    if fill == "uniform":
        rng = rng or np.random.default_rng()
        inner = rng.uniform(spec.lambda_min, spec.lambda_max, size=M - 2)
    elif fill == "low":
        inner = np.full(M - 2, spec.lambda_min)
    elif fill == "high":
        inner = np.full(M - 2, spec.lambda_max)
    else:
        raise ValueError(f"unknown fill {fill!r}")
    lam[1:-1] = np.sort(inner)[::-1]
    return lam


def matrix_with_spectrum(eigenvalues, rng: np.random.Generator) -> np.ndarray:
    lam = np.asarray(eigenvalues, dtype=float)
    V = random_unitary(rng, lam.size)
    A = (V * lam) @ V.conj().T
    return 0.5 * (A + A.conj().T)


def empirical_additive_mse(
    R_f, eps_max: float, rng: np.random.Generator, draws: int = 20000
) -> float:
    """Monte Carlo mean of ||e||^2 with eps ~ U(0, eps_max] and e ~ CN(0, eps ||R||_F I)."""
    R_f = check_hermitian(R_f)
    M = R_f.shape[0]
    nf = np.linalg.norm(R_f, "fro")
    eps = eps_max * (1.0 - rng.random(draws))
    scale = np.sqrt(eps * nf / 2.0)[:, None]
    e = scale * (rng.standard_normal((draws, M)) + 1j * rng.standard_normal((draws, M)))
    return float(np.mean(np.sum(np.abs(e) ** 2, axis=1)))


# -- cross-correlation analysis ------------------------------------------------


def cross_corr_analysis(
    weights: Sequence[np.ndarray],
    g_estimates: Sequence[np.ndarray],
    projectors: Sequence[np.ndarray],
    R_f: Sequence[np.ndarray],
    P_s: np.ndarray,
    P_n: float,
    eps_max: float,
    k: int = 0,
) -> CrossCorrAnalysis:
    """Empirical tau and both MSE expressions for source `k`.

    ``xi`` is the mean of w ⊙ ĝ over trials, ``tau`` is xiᴴ mean(P_k) xi, and
    the per-source cross-correlation components use the mean covariances
    with the additive error loading at eps_max / 2.
    """
    W = np.asarray(weights)
    G = np.asarray(g_estimates)
    xi = np.mean(W * G, axis=0)
    P_mean = np.mean(np.asarray(projectors), axis=0)
    tau = float(np.real(xi.conj() @ P_mean @ xi))
    R_f = np.asarray(R_f)  # trials x K x M x M
    R_mean = R_f.mean(axis=0)
    M = R_mean.shape[-1]
    P_s = np.asarray(P_s, dtype=float)
    comps = []
    for kk in range(R_mean.shape[0]):
        load = 0.5 * eps_max * np.linalg.norm(R_mean[kk], "fro") * np.eye(M)
        comps.append(P_s[kk] * (R_mean[kk] + load) @ xi)
    norms = np.array([np.linalg.norm(R, "fro") for R in R_f[:, k]])
    r_norm = float(norms.mean())
    mse1 = 0.5 * eps_max * M * r_norm
    mse2 = mse_subspace(r_norm, P_s[k], P_n, eps_max, tau)
    return CrossCorrAnalysis(xi, np.array(comps), max(tau, 0.0), mse1, mse2)

"""Low-rank cross-correlation robust beamforming and its baselines.

The robust estimator averages the relay/destination cross-correlation over
snapshots, projects it onto the principal subspace of each error spectrum
matrix, and feeds the resulting channel estimates to the closed-form
max-SINR weight solution. Two CSI-availability modes are supported:

* ``"instantaneous"``: observed (mismatched) channels arrive every snapshot
  and the channel covariances are averaged recursively;
* ``"statistics"``: channel covariances are known up front and the error
  spectra are built once.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal, Optional

import numpy as np

from . import spectral
from .channel import MismatchedChannels, TrueChannels, draw_channel_errors, observe
from .signals import MomentSet, SourceConfig, exact_moments, output_sinr, simulate_snapshot

Mode = Literal["instantaneous", "statistics"]
MODES = ("instantaneous", "statistics")
INITIAL_COVARIANCE_SCALE = 0.01


class ModeError(RuntimeError):
    """Operation not available in the estimator's CSI-availability mode."""


class DegenerateProjection(ArithmeticError):
    """The cross-correlation vector has no component in the projection subspace."""


@dataclass(frozen=True)
class EstimatorState:
    i: int
    q: np.ndarray
    R_f: np.ndarray  # K x M x M
    R_g: np.ndarray
    mode: Mode = "instantaneous"

    @classmethod
    def initial(cls, M: int, K: int, mode: Mode = "instantaneous") -> "EstimatorState":
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        eye = INITIAL_COVARIANCE_SCALE * np.eye(M, dtype=complex)
        return cls(0, np.ones(M, dtype=complex), np.repeat(eye[None], K, axis=0), eye.copy(), mode)


@dataclass(frozen=True)
class ErrorSpectra:
    C_f: np.ndarray  # K x M x M
    C_g: np.ndarray
    N_f: tuple[int, ...]
    N_g: int
    eps_max: float = 1.0
    # eigendecompositions kept so projections need no second solve
    dec_f: tuple[spectral.EigenDecomposition, ...] = field(repr=False, default=())
    dec_g: Optional[spectral.EigenDecomposition] = field(repr=False, default=None)

    def projector_f(self, k: int) -> spectral.SubspaceProjector:
        return spectral.projector_from_basis(self.dec_f[k].eigenvectors[:, : self.N_f[k]])

    def projector_g(self) -> spectral.SubspaceProjector:
        return spectral.projector_from_basis(self.dec_g.eigenvectors[:, : self.N_g])


@dataclass(frozen=True)
class ChannelEstimates:
    f_hat: np.ndarray  # M x K, unit-norm columns
    g_hat: np.ndarray  # M, unit norm
    f_power: Optional[np.ndarray] = None  # estimated ||f_k||^2, one per column
    g_power: Optional[float] = None

    def scaled(self) -> tuple[np.ndarray, np.ndarray]:
        """Estimates carrying their power; unit-norm when no power is known."""
        if self.f_power is None or self.g_power is None:
            return self.f_hat, self.g_hat
        return self.f_hat * np.sqrt(self.f_power), self.g_hat * np.sqrt(self.g_power)


@dataclass(frozen=True)
class BeamformerSolution:
    w: np.ndarray
    moments: MomentSet
    sinr_max: float
    theta: np.ndarray
    w_tilde: np.ndarray
    eigenvalue: float
    P_T: float
    degenerate_top_eigenvalue: bool = False

    @property
    def relay_power(self) -> float:
        return float(np.sum(self.moments.d * np.abs(self.w) ** 2))


# -- recursions ---------------------------------------------------------------


def update_scv(state: EstimatorState, x, z) -> EstimatorState:
    """Advance the iteration counter and fold x z* into the running mean."""
    i = state.i + 1
    q = ((i - 1) * state.q + np.asarray(x) * np.conj(z)) / i
    return replace(state, i=i, q=q)


def update_channel_covariances(state: EstimatorState, F_obs, g_obs) -> EstimatorState:
    """Running sample covariances of the observed channels at iteration ``state.i``.

    Call after :func:`update_scv` for the same snapshot, which sets the
    iteration index.
    """
    if state.mode != "instantaneous":
        raise ModeError("channel covariances are only tracked with instantaneous CSI")
    i = state.i
    if i < 1:
        raise ValueError("update_scv must run before the covariance update")
    F_obs = np.asarray(F_obs, dtype=complex)
    g_obs = np.asarray(g_obs, dtype=complex)
    outer_f = np.einsum("mk,nk->kmn", F_obs, F_obs.conj())
    R_f = ((i - 1) * state.R_f + outer_f) / i
    R_g = ((i - 1) * state.R_g + np.outer(g_obs, g_obs.conj())) / i
    return replace(state, R_f=R_f, R_g=R_g)


# -- spectra and projections --------------------------------------------------


def error_spectrum(R: np.ndarray, eps_max: float) -> np.ndarray:
    """Closed-form integral of R + eps ||R||_F I over eps in (0, eps_max]."""
    R = np.asarray(R)
    return eps_max * R + 0.5 * eps_max**2 * np.linalg.norm(R, "fro") * np.eye(R.shape[0])


def build_error_spectra(
    R_f: np.ndarray,
    R_g: np.ndarray,
    eps_max: float,
    noise_threshold: float,
    variance_fraction: float = 0.95,
    n_components: int | None = None,
) -> ErrorSpectra:
    """Error spectrum matrices and their principal-component counts.

    `n_components` forces the same count for every spectrum instead of the
    automatic selection.
    """
    R_f = np.asarray(R_f)
    C_f = np.stack([error_spectrum(R, eps_max) for R in R_f])
    C_g = error_spectrum(R_g, eps_max)
    *dec_f, dec_g = spectral.eig_hermitian_stack(np.concatenate([C_f, C_g[None]]))

    def count(dec):
        if n_components is not None:
            return int(n_components)
        return spectral.select_principal_count(dec.eigenvalues, noise_threshold, variance_fraction)

    return ErrorSpectra(
        C_f, C_g, tuple(count(d) for d in dec_f), count(dec_g), float(eps_max), tuple(dec_f), dec_g
    )


def subspace_power(dec: spectral.EigenDecomposition, n: int, eps_max: float) -> float:
    """Channel power held by the `n` principal components of an error spectrum.

    The discarded eigenvalues estimate the flat error floor; what the
    retained ones carry above it, divided by eps_max, is the channel energy.
    """
    lam = dec.eigenvalues
    floor = lam[n:].mean() if n < lam.size else 0.0
    return float(max(np.sum(lam[:n] - floor), 0.0) / eps_max)


def _project_normalized(basis: np.ndarray, q: np.ndarray) -> np.ndarray:
    # B (Bᴴ q) equals the projector applied to q without forming B Bᴴ
    v = basis @ (basis.conj().T @ q)
    norm = np.linalg.norm(v)
    if norm <= 1e-14 * max(1.0, np.linalg.norm(q)):
        raise DegenerateProjection("cross-correlation vector is orthogonal to the subspace")
    return v / norm


def estimate_channels(spectra: ErrorSpectra, q, with_power: bool = True) -> ChannelEstimates:
    """Project the cross-correlation vector onto each principal subspace.

    The directions are unit-norm. With `with_power`, each estimate also
    carries the channel power read off its error spectrum, so the moments
    built from it keep the true relative scale of channels and noise.
    """
    q = np.asarray(q, dtype=complex)
    if not np.any(q):
        raise DegenerateProjection("cross-correlation vector is zero")
    K = len(spectra.N_f)
    f_hat = np.column_stack(
        [_project_normalized(spectra.dec_f[k].eigenvectors[:, : spectra.N_f[k]], q) for k in range(K)]
    )
    g_hat = _project_normalized(spectra.dec_g.eigenvectors[:, : spectra.N_g], q)
    if not with_power:
        return ChannelEstimates(f_hat, g_hat)
    f_power = np.array(
        [subspace_power(spectra.dec_f[k], spectra.N_f[k], spectra.eps_max) for k in range(K)]
    )
    g_power = subspace_power(spectra.dec_g, spectra.N_g, spectra.eps_max)
    return ChannelEstimates(f_hat, g_hat, f_power, g_power)


def assemble_moments(estimates: ChannelEstimates, config: SourceConfig, P_n: float) -> MomentSet:
    """Moment matrices built from the channel estimates in place of the true channels."""
    f, g = estimates.scaled()
    return exact_moments(f, g, config, P_n)


# -- weights --------------------------------------------------------------------


def solve_weights(moments: MomentSet, P_n: float, P_T: float) -> BeamformerSolution:
    """Max-SINR weights under the total relay power constraint wᴴ D w = P_T.

    In whitened coordinates w = sqrt(P_T) D^(-1/2) w̃, the optimal unit w̃ is
    the principal eigenvector of

        Θ = (P_n I + P_T D^(-1/2) U D^(-1/2))^(-1) D^(-1/2) R_1 D^(-1/2)

    and the attained SINR is P_T times its largest eigenvalue. Θ is not
    Hermitian; its eigenpairs come from the Hermitian pencil through a
    Cholesky factor of the bracketed matrix.
    """
    if P_T <= 0:
        raise ValueError("P_T must be positive")
    d = np.asarray(moments.d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("D must have a strictly positive diagonal")
    s = 1.0 / np.sqrt(d)
    R1 = s[:, None] * moments.R[0] * s[None, :]
    U = s[:, None] * moments.U * s[None, :]
    M = d.size
    B = P_n * np.eye(M) + P_T * U
    B = 0.5 * (B + B.conj().T)
    L = np.linalg.cholesky(B)
    Linv = np.linalg.solve(L, np.eye(M))
    A = Linv @ R1 @ Linv.conj().T
    top = spectral.principal_eigenvector(0.5 * (A + A.conj().T))
    v = Linv.conj().T @ top.vector
    w_tilde = spectral.fix_phase(v / np.linalg.norm(v))
    theta = np.linalg.solve(B, R1)
    lam = max(top.value, 0.0)
    w = np.sqrt(P_T) * s * w_tilde
    return BeamformerSolution(
        w=w,
        moments=moments,
        sinr_max=P_T * lam,
        theta=theta,
        w_tilde=w_tilde,
        eigenvalue=lam,
        P_T=float(P_T),
        degenerate_top_eigenvalue=top.degenerate,
    )


def whitened_objective(solution: BeamformerSolution, w_tilde, P_n: float) -> np.ndarray:
    """Objective P_T w̃ᴴR̃₁w̃ / w̃ᴴ(P_n I + P_T Ũ)w̃ for one vector or columns of vectors."""
    d = solution.moments.d
    s = 1.0 / np.sqrt(d)
    R1 = s[:, None] * solution.moments.R[0] * s[None, :]
    U = s[:, None] * solution.moments.U * s[None, :]
    B = P_n * np.eye(d.size) + solution.P_T * U
    W = np.asarray(w_tilde)
    W2 = W[:, None] if W.ndim == 1 else W
    num = np.real(np.einsum("mj,mn,nj->j", W2.conj(), R1, W2))
    den = np.real(np.einsum("mj,mn,nj->j", W2.conj(), B, W2))
    out = solution.P_T * num / den
    return out[0] if W.ndim == 1 else out


def baseline_perfect_csi(moments: MomentSet, P_n: float, P_T: float) -> BeamformerSolution:
    return solve_weights(moments, P_n, P_T)


def baseline_non_robust(
    mismatched: MismatchedChannels, config: SourceConfig, P_n: float, P_T: float
) -> BeamformerSolution:
    """Weights computed as if the observed channels were exact."""
    return solve_weights(exact_moments(mismatched.F_hat, mismatched.g_hat, config, P_n), P_n, P_T)


# -- full loop ------------------------------------------------------------------


@dataclass
class TrialInputs:
    """Everything one robust-beamforming run needs for one network realization.

    `obs_rng` draws the per-snapshot channel errors, `sig_rng` the symbols
    and noise. `R_f_stats`/`R_g_stats` are the channel covariances used in
    statistics mode; they default to the outer products of the true channels.
    """

    channels: TrueChannels
    config: SourceConfig
    P_n: float
    P_T: float
    eps_max: float
    epsilon: float
    obs_rng: np.random.Generator
    sig_rng: np.random.Generator
    R_f_stats: Optional[np.ndarray] = None
    R_g_stats: Optional[np.ndarray] = None


@dataclass
class LrccTrace:
    sinr_max: np.ndarray
    true_sinr: np.ndarray
    N_f: np.ndarray  # snapshots x K
    N_g: np.ndarray
    solutions: list
    estimates: list
    observations: list
    fallbacks: int = 0
    initial_w: Optional[np.ndarray] = None
    spectra: list = field(default_factory=list)

    @property
    def final(self) -> BeamformerSolution:
        return self.solutions[-1]


def statistics_covariances(channels: TrueChannels) -> tuple[np.ndarray, np.ndarray]:
    """Block-static second-order statistics: outer products of the true channels."""
    F, g = channels.F, channels.g
    return np.einsum("mk,nk->kmn", F, F.conj()), np.outer(g, g.conj())


def run_lrcc(
    inputs: TrialInputs,
    mode: Mode = "instantaneous",
    snapshots: int = 100,
    n_components: int | None = None,
    variance_fraction: float = 0.95,
    noise_threshold: float | None = None,
    true_moments: MomentSet | None = None,
    keep_history: bool = False,
    estimate_power: bool = True,
) -> LrccTrace:
    """Run the robust estimator over `snapshots` iterations.

    Each iteration transmits one snapshot through the true channels with the
    previous weights, updates the cross-correlation (and, with instantaneous
    CSI, the covariances of a freshly observed mismatched channel), then
    re-estimates the channels and re-solves the weights. The trace records
    the self-reported SINR and the SINR the weights achieve on the true
    channels.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    ch = inputs.channels
    M, K = ch.M, ch.K
    if true_moments is None:
        true_moments = exact_moments(ch.F, ch.g, inputs.config, inputs.P_n)
    threshold = inputs.P_n if noise_threshold is None else noise_threshold

    state = EstimatorState.initial(M, K, mode)
    spectra = None
    if mode == "statistics":
        R_f, R_g = inputs.R_f_stats, inputs.R_g_stats
        if R_f is None or R_g is None:
            R_f, R_g = statistics_covariances(ch)
        state = replace(state, R_f=np.asarray(R_f, dtype=complex), R_g=np.asarray(R_g, dtype=complex))
        spectra = build_error_spectra(R_f, R_g, inputs.eps_max, threshold, variance_fraction, n_components)

    w = np.ones(M, dtype=complex)
    w0 = w.copy()
    sinr_max = np.empty(snapshots)
    true_sinr = np.empty(snapshots)
    N_f = np.empty((snapshots, K), dtype=int)
    N_g = np.empty(snapshots, dtype=int)
    solutions, estimates, observations, spectra_log = [], [], [], []
    fallbacks = 0
    prev_est: ChannelEstimates | None = None

    for t in range(snapshots):
        # the quadratic-form SINR of w is realized by relay gains conj(w)
        snap = simulate_snapshot(inputs.sig_rng, ch.F, ch.g, inputs.config, np.conj(w), inputs.P_n)
        state = update_scv(state, snap.x, snap.z)
        E, e = draw_channel_errors(inputs.obs_rng, ch, inputs.epsilon)
        obs = observe(ch, E, e, inputs.epsilon)
        if mode == "instantaneous":
            state = update_channel_covariances(state, obs.F_hat, obs.g_hat)
            spectra = build_error_spectra(
                state.R_f, state.R_g, inputs.eps_max, threshold, variance_fraction, n_components
            )
        try:
            est = estimate_channels(spectra, state.q, with_power=estimate_power)
        except DegenerateProjection:
            if prev_est is None:
                raise
            est = prev_est
            fallbacks += 1
        moments = assemble_moments(est, inputs.config, inputs.P_n)
        sol = solve_weights(moments, inputs.P_n, inputs.P_T)
        w = sol.w
        prev_est = est

        sinr_max[t] = sol.sinr_max
        true_sinr[t] = output_sinr(w, true_moments)
        N_f[t] = spectra.N_f
        N_g[t] = spectra.N_g
        if keep_history or t == snapshots - 1:
            solutions.append(sol)
            estimates.append(est)
            observations.append(obs)
            spectra_log.append(spectra)

    return LrccTrace(
        sinr_max, true_sinr, N_f, N_g, solutions, estimates, observations, fallbacks, w0, spectra_log
    )

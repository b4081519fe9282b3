"""Relay network geometry, large-scale fading and mismatched channels.

Distances are relative to the source-destination distance, which is 1.
All random draws go through an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RELAY_DISTANCE_RANGE = (0.5, 0.9)
ANGLE_RANGE = (-np.pi / 2, np.pi / 2)


@dataclass(frozen=True)
class NetworkGeometry:
    source_relay: np.ndarray
    angles: np.ndarray
    relay_destination: np.ndarray

    @property
    def M(self) -> int:
        return self.source_relay.size


@dataclass(frozen=True)
class LargeScaleGains:
    gamma: np.ndarray
    beta: np.ndarray
    L: float
    rho: float
    sigma_s: float

    @property
    def amplitude(self) -> np.ndarray:
        return self.gamma * self.beta


@dataclass(frozen=True)
class TrueChannels:
    F: np.ndarray  # M x K
    g: np.ndarray  # M

    @property
    def M(self) -> int:
        return self.F.shape[0]

    @property
    def K(self) -> int:
        return self.F.shape[1]


@dataclass(frozen=True)
class MismatchedChannels:
    F_hat: np.ndarray
    g_hat: np.ndarray
    E: np.ndarray
    e: np.ndarray
    epsilon: float


def complex_normal(rng: np.random.Generator, size, variance=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def relay_destination_distance(d_sr, theta) -> np.ndarray:
    """Law of cosines with a unit source-destination side."""
    d_sr = np.asarray(d_sr, dtype=float)
    return np.sqrt(d_sr**2 + 1.0 - 2.0 * d_sr * np.cos(theta))


def sample_geometry(rng: np.random.Generator, M: int) -> NetworkGeometry:
    if M < 1:
        raise ValueError("need at least one relay")
    d_sr = rng.uniform(*RELAY_DISTANCE_RANGE, size=M)
    theta = rng.uniform(*ANGLE_RANGE, size=M)
    return NetworkGeometry(d_sr, theta, relay_destination_distance(d_sr, theta))


def path_loss_gain(L: float, d, rho: float):
    """Amplitude path-loss gain sqrt(L) / sqrt(d**rho)."""
    d = np.asarray(d, dtype=float)
    if L <= 0:
        raise ValueError("reference gain L must be positive")
    if np.any(d <= 0):
        raise ValueError("path-loss distance must be positive")
    out = np.sqrt(L) / np.sqrt(d**rho)
    return float(out) if out.ndim == 0 else out


def shadowing_from_draw(sigma_s_db: float, eta):
    """Log-normal shadowing gain 10**(sigma_s * eta / 10)."""
    return 10.0 ** (sigma_s_db * np.asarray(eta, dtype=float) / 10.0)


def shadowing_gain(rng: np.random.Generator, sigma_s_db: float, size=None):
    eta = rng.standard_normal(size)
    out = shadowing_from_draw(sigma_s_db, eta)
    return float(out) if np.ndim(out) == 0 else out


def large_scale_gains(
    rng: np.random.Generator,
    geometry: NetworkGeometry,
    L: float = 10.0,
    rho: float = 2.0,
    sigma_s_db: float = 3.0,
) -> LargeScaleGains:
    """Per-relay path loss (relay-destination distance) and shadowing."""
    gamma = path_loss_gain(L, geometry.relay_destination, rho)
    beta = shadowing_gain(rng, sigma_s_db, size=geometry.M)
    return LargeScaleGains(np.atleast_1d(gamma), np.atleast_1d(beta), L, rho, sigma_s_db)


def sample_true_channels(
    rng: np.random.Generator, geometry: NetworkGeometry, gains: LargeScaleGains, K: int
) -> TrueChannels:
    """Rayleigh channels scaled row-wise by gamma_m * beta_m."""
    M = geometry.M
    if gains.gamma.size != M:
        raise ValueError("gains were computed for a different relay count")
    amp = gains.amplitude
    F0 = complex_normal(rng, (M, K))
    g0 = complex_normal(rng, M)
    return TrueChannels(amp[:, None] * F0, amp * g0)


def draw_channel_errors(
    rng: np.random.Generator, channels: TrueChannels, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Error draws with per-entry variance epsilon * ||R||_F.

    R is the rank-one outer product of the true channel, so its Frobenius
    norm is the squared Euclidean norm of the channel vector.
    """
    M, K = channels.F.shape
    var_f = epsilon * np.sum(np.abs(channels.F) ** 2, axis=0)
    var_g = epsilon * np.sum(np.abs(channels.g) ** 2)
    E = complex_normal(rng, (M, K), variance=np.broadcast_to(var_f, (M, K)))
    e = complex_normal(rng, M, variance=var_g)
    return E, e


def draw_epsilon(rng: np.random.Generator, eps_max: float) -> float:
    """Mismatch level uniform on (0, eps_max]."""
    if eps_max <= 0:
        raise ValueError("eps_max must be positive")
    # 1 - U(0,1] lands in [0, 1); flip so zero is excluded and eps_max included
    return float(eps_max * (1.0 - rng.random()))


def observe(channels: TrueChannels, E: np.ndarray, e: np.ndarray, epsilon: float) -> MismatchedChannels:
    return MismatchedChannels(channels.F + E, channels.g + e, E, e, float(epsilon))


def apply_mismatch(
    rng: np.random.Generator,
    channels: TrueChannels,
    eps_max: float,
    epsilon: float | None = None,
) -> MismatchedChannels:
    """Perturb the true channels with additive Gaussian errors.

    Draws epsilon from (0, eps_max] unless one is supplied; a supplied
    epsilon lets a trial keep one mismatch level across snapshots.
    """
    if epsilon is None:
        epsilon = draw_epsilon(rng, eps_max)
    E, e = draw_channel_errors(rng, channels, epsilon)
    return observe(channels, E, e, epsilon)


def perturb_covariance(R: np.ndarray, epsilon: float) -> np.ndarray:
    """Additive Frobenius-norm loading R + epsilon * ||R||_F * I.

    A zero matrix stays zero; it is the only input whose result is not
    positive definite.
    """
    R = np.asarray(R)
    return R + epsilon * np.linalg.norm(R, "fro") * np.eye(R.shape[0])

"""Two-hop amplify-and-forward signal chain and SINR from second-order moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import complex_normal

QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)


@dataclass(frozen=True)
class SourceConfig:
    """Transmit powers of the K sources; source 0 is the desired one."""

    powers: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.powers, dtype=float))
        if p.ndim != 1 or p.size < 1 or np.any(p <= 0):
            raise ValueError("source powers must be a non-empty vector of positive reals")
        object.__setattr__(self, "powers", p)

    @property
    def K(self) -> int:
        return self.powers.size


@dataclass(frozen=True)
class Snapshot:
    s: np.ndarray
    nu: np.ndarray
    x: np.ndarray
    y: np.ndarray
    n: complex
    z: complex


@dataclass(frozen=True)
class MomentSet:
    R: np.ndarray  # K x M x M
    Q: np.ndarray
    d: np.ndarray  # diagonal of D
    P_n: float

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.d)

    @property
    def U(self) -> np.ndarray:
        """Noise-plus-interference matrix Q + sum of R_k over interferers."""
        return self.Q + self.R[1:].sum(axis=0)


def generate_symbols(rng: np.random.Generator, config: SourceConfig) -> np.ndarray:
    b = QPSK[rng.integers(0, 4, size=config.K)]
    return np.sqrt(config.powers) * b


def relay_receive(F, s, rng: np.random.Generator, P_n: float):
    nu = complex_normal(rng, np.shape(F)[0], variance=P_n)
    return F @ s + nu, nu


def relay_transmit(w, x) -> np.ndarray:
    return np.asarray(w) * np.asarray(x)


def destination_receive(g, y, rng: np.random.Generator, P_n: float):
    n = complex_normal(rng, None, variance=P_n)
    return complex(np.asarray(g) @ np.asarray(y) + n), complex(n)


def simulate_snapshot(
    rng: np.random.Generator, F, g, config: SourceConfig, w, P_n: float
) -> Snapshot:
    """One pass of the chain x = F s + nu, y = w * x, z = g^T y + n."""
    s = generate_symbols(rng, config)
    x, nu = relay_receive(F, s, rng, P_n)
    y = relay_transmit(w, x)
    z, n = destination_receive(g, y, rng, P_n)
    return Snapshot(s, nu, x, y, n, z)


def exact_moments(F, g, config: SourceConfig, P_n: float) -> MomentSet:
    """Second-order moments for block-static channels.

    With the channels fixed over a trial, the expectations over symbols and
    noise reduce to quadratic forms in the given channel vectors. Symbols
    reach every relay coherently, so R_k is an outer product; relay noise is
    independent across relays, so Q = P_n diag(|g|²).
    """
    F = np.asarray(F, dtype=complex)
    g = np.asarray(g, dtype=complex)
    P = config.powers
    h = F * g[:, None]  # column k is f_k ⊙ g
    R = P[:, None, None] * np.einsum("mk,nk->kmn", h, h.conj())
    Q = P_n * np.diag(np.abs(g) ** 2).astype(complex)
    d = np.abs(F) ** 2 @ P + P_n
    return MomentSet(R, Q, d, float(P_n))


def output_sinr(w, moments: MomentSet) -> float:
    """Desired power over interference plus noise at the destination.

    The quadratic form wᴴR₁w equals the desired output power of the chain
    when the relays apply the gains conj(w); `simulate_snapshot` takes the
    physical gains, so pass it ``np.conj(w)`` to realize this SINR.
    """
    w = np.asarray(w, dtype=complex)
    signal = float(np.real(w.conj() @ moments.R[0] @ w))
    interference = float(np.real(w.conj() @ moments.U @ w))
    denom = moments.P_n + interference
    if signal == 0.0:
        return 0.0
    if denom <= 0.0:
        return float("inf")
    return signal / denom


def sinr_parts(w, moments: MomentSet) -> tuple[float, float, float]:
    """(desired, interference, noise) output powers for weights `w`."""
    w = np.asarray(w, dtype=complex)
    desired = float(np.real(w.conj() @ moments.R[0] @ w))
    interf = float(np.real(w.conj() @ moments.R[1:].sum(axis=0) @ w)) if moments.R.shape[0] > 1 else 0.0
    noise = moments.P_n + float(np.real(w.conj() @ moments.Q @ w))
    return desired, interf, noise


def relay_power(w, d) -> float:
    """Total relay transmit power wᴴ D w; `d` is the diagonal of D or D itself."""
    d = np.asarray(d)
    if d.ndim == 2:
        d = np.diag(d)
    w = np.asarray(w)
    return float(np.real(np.sum(d * np.abs(w) ** 2)))


def interferer_split(total: float, n_interferers: int, ratio: float = 1.0) -> np.ndarray:
    """Split interference power; the first interferer is `ratio` times each other."""
    if n_interferers == 0:
        return np.zeros(0)
    shares = np.ones(n_interferers)
    shares[0] = ratio
    return total * shares / shares.sum()


def noise_power_for_snr(
    snr_db: float,
    inr_db: float,
    K: int,
    desired_power: float = 1.0,
    interferer_ratio: float = 1.0,
) -> tuple[float, np.ndarray]:
    """Noise power and interferer powers for a target SNR and INR.

    SNR is set through the noise power alone; the total interferer power is
    INR above the noise.
    """
    P_n = desired_power / 10.0 ** (snr_db / 10.0)
    total = P_n * 10.0 ** (inr_db / 10.0)
    return P_n, interferer_split(total, K - 1, interferer_ratio)


def source_config_for(
    snr_db: float, inr_db: float, K: int, desired_power: float = 1.0, interferer_ratio: float = 1.0
) -> tuple[SourceConfig, float]:
    P_n, p_int = noise_power_for_snr(snr_db, inr_db, K, desired_power, interferer_ratio)
    return SourceConfig(np.concatenate([[desired_power], p_int])), P_n

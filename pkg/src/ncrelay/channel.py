"""Channel realizations, power bookkeeping and amplification factors.

Index convention for a chain with N hop pairs: h_i is the i-th hop on the
side of end node 1 with variance sigma2[2i-2] (i.e. sigma^2_{2i-1} in 1-based
notation), g_i the i-th hop on the side of end node 2 with variance
sigma2[2i-1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numeric import RngStream, sample_cgauss


@dataclass(frozen=True)
class PowerProfile:
    """Transmit powers, per-hop channel variances and noise variance."""

    P1: float
    P2: float
    Pr: tuple[float, ...]          # relay powers, 2N-1 entries
    sigma2: tuple[float, ...]      # per-hop variances, 2N entries
    sigma_n2: float

    def __post_init__(self):
        if self.P1 <= 0 or self.P2 <= 0:
            raise ValueError("end-node powers must be positive")
        if any(p <= 0 for p in self.Pr):
            raise ValueError("relay powers must be positive")
        if any(s <= 0 for s in self.sigma2):
            raise ValueError("channel variances must be positive")
        if self.sigma_n2 < 0:
            raise ValueError("noise variance must be nonnegative")
        n_pairs = len(self.sigma2) // 2
        if len(self.sigma2) != 2 * n_pairs or n_pairs < 2:
            raise ValueError("sigma2 needs an even length >= 4")
        if len(self.Pr) != 2 * n_pairs - 1:
            raise ValueError("Pr needs 2N-1 entries")

    @property
    def n_pairs(self) -> int:
        return len(self.sigma2) // 2

    @classmethod
    def equal_power(cls, P: float, sigma_n2: float = 1.0, n_pairs: int = 2,
                    sigma2: float = 1.0) -> "PowerProfile":
        """All nodes transmit with power P, all hops share one variance."""
        return cls(P1=P, P2=P, Pr=(P,) * (2 * n_pairs - 1),
                   sigma2=(sigma2,) * (2 * n_pairs), sigma_n2=sigma_n2)


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray  # length-N complex gains, end node 1 side
    g: np.ndarray  # length-N complex gains, end node 2 side

    def __post_init__(self):
        if len(self.h) != len(self.g):
            raise ValueError("h and g must have equal length")
        if not (np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.g))):
            raise ValueError("non-finite channel gain")

    def conjugate(self) -> "ChannelRealization":
        return ChannelRealization(np.conj(self.h), np.conj(self.g))


@dataclass(frozen=True)
class Gains:
    """All amplification factors used by the 4-hop protocol."""

    alpha1: float
    alpha2: float
    alpha3: float
    alpha_tilde: tuple[float, float]
    alpha3_tilde: float
    xi: float
    eps: float
    a0: float


@dataclass(frozen=True)
class ThetaStatistics:
    """Second-order statistics of the composite parameters."""

    sigma_theta1_2: float
    sigma_theta2_2: float

    @classmethod
    def from_profile(cls, profile: PowerProfile) -> "ThetaStatistics":
        s1, s2, s3, s4 = profile.sigma2[:4]
        return cls(sigma_theta1_2=4.0 * s1 ** 2 * s3 ** 2,
                   sigma_theta2_2=s1 * s2 * s3 * s4)


def draw_channels(profile: PowerProfile, n_pairs: int, rng: RngStream | np.random.Generator) -> ChannelRealization:
    """Draw one independent Rayleigh-fading realization of every hop."""
    if n_pairs < 2:
        raise ValueError("need at least 2 hop pairs")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    h = np.empty(n_pairs, dtype=complex)
    g = np.empty(n_pairs, dtype=complex)
    for i in range(n_pairs):
        h[i] = sample_cgauss(1, profile.sigma2[2 * i], gen)[0]
        g[i] = sample_cgauss(1, profile.sigma2[2 * i + 1], gen)[0]
    return ChannelRealization(h, g)


def compute_gains(profile: PowerProfile, L: int = 8) -> Gains:
    """Amplification factors for the 4-hop chain.

    L enters only through the re-encoding gain of the middle relay, whose
    power constraint is taken over a whole training block.
    """
    s1, s2, s3, s4 = profile.sigma2[:4]
    P1, P2 = profile.P1, profile.P2
    Pr1, Pr2, Pr3 = profile.Pr[:3]
    sn2 = profile.sigma_n2

    at1 = np.sqrt(Pr1 / (P1 * s1 + sn2))
    at2 = np.sqrt(Pr2 / (P2 * s2 + sn2))
    a1 = np.sqrt(Pr1 / (P1 * s1 + Pr3 * s3 + sn2))
    a2 = np.sqrt(Pr2 / (P2 * s2 + Pr3 * s4 + sn2))
    a3 = np.sqrt(Pr3 / (Pr1 * s3 + Pr2 * s4 + sn2))

    xi = 1.0 + a1 ** 2 * s1
    eps = 2.0 * a1 ** 2 * s3 + a2 ** 2 * s4 + 1.0
    at3 = np.sqrt(
        L * Pr3
        / (a1 * s1 * s3 * L * P1 + a2 * s2 * s4 * L * P2
           + 2.0 * (a1 ** 2 * s3 + a2 ** 2 * s4 + 1.0) * sn2)
    )
    a0 = a1 ** 2 * at3 ** 2 * eps / xi
    return Gains(alpha1=a1, alpha2=a2, alpha3=a3, alpha_tilde=(at1, at2),
                 alpha3_tilde=at3, xi=xi, eps=eps, a0=a0)


def composite_theta(ch: ChannelRealization) -> tuple[complex, complex]:
    """Composite parameters observable at end node 1 of the 4-hop chain."""
    h1, h2 = ch.h[0], ch.h[1]
    g1, g2 = ch.g[0], ch.g[1]
    return (h1 ** 2 * h2 ** 2, h1 * h2 * g1 * g2)


def noise_cov_z3(ts, gains: Gains, stats: ThetaStatistics, sigma_n2: float,
                 sigma13_2: float | None = None) -> np.ndarray:
    """Covariance of the equivalent noise in the final training observation,
    averaged over channel statistics (the form the LMMSE estimator assumes).

    sigma13_2 is the product of the two own-side hop variances; by default it
    is recovered from the composite statistics (sigma_theta2^2 factorizes as
    the product of all four hop variances only under the default symmetric
    setup, so callers with asymmetric variances should pass it explicitly).
    """
    from .numeric import projection_onto_columns

    if sigma13_2 is None:
        # sqrt of sigma_theta1^2 / 4 = (sigma_1^2 sigma_3^2)
        sigma13_2 = np.sqrt(stats.sigma_theta1_2 / 4.0)
    T = np.column_stack([ts.t1, ts.t2])
    P_T = projection_onto_columns(T)
    L = T.shape[0]
    c = gains.alpha1 ** 2 * gains.alpha3_tilde ** 2 * sigma13_2 * gains.eps
    R = sigma_n2 * (gains.xi * np.eye(L) + c * P_T)
    return 0.5 * (R + R.conj().T)

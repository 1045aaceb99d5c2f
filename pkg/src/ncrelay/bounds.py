"""Closed-form performance characterizations: LMMSE mean-square errors,
Cramer-Rao lower bounds for the 4-hop composites, pilot-correlation
sensitivities, and finite-N / asymptotic bounds for the 2N-hop chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Gains, ThetaStatistics, noise_cov_z3
from .numeric import invert_hermitian
from .training import TrainingSet


# ---------------------------------------------------------------------------
# LMMSE mean-square error, 4-hop


def lmmse_mse_closed_form(ts: TrainingSet, gains: Gains, stats: ThetaStatistics,
                          sigma_n2: float) -> tuple[float, float]:
    """Rational closed form of the per-parameter LMMSE MSE (|rho| < 1)."""
    from .estimators import lmmse_coefficients

    co = lmmse_coefficients(ts, gains, stats, sigma_n2)
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    xi = gains.xi
    x = 1.0 - abs(ts.rho) ** 2
    t1Rt1 = (ts.Q1 + co.A2 * x * ts.Q1 * ts.Q2) / (co.tau * xi * sigma_n2)
    t2Rt2 = (ts.Q2 + co.A1 * x * ts.Q1 * ts.Q2) / (co.tau * xi * sigma_n2)
    e1 = stats.sigma_theta1_2 - a1 ** 4 * at3 ** 2 * stats.sigma_theta1_2 ** 2 * t1Rt1
    e2 = stats.sigma_theta2_2 - a1 ** 2 * a2 ** 2 * at3 ** 2 * stats.sigma_theta2_2 ** 2 * t2Rt2
    return float(e1), float(e2)


def lmmse_mse_matrix(ts: TrainingSet, gains: Gains, stats: ThetaStatistics,
                     sigma_n2: float) -> tuple[float, float]:
    """Same quantity by direct matrix algebra (cross-check route)."""
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    T = np.column_stack([ts.t1, ts.t2])
    lam = np.diag([a1, a2])
    Rtheta = np.diag([stats.sigma_theta1_2, stats.sigma_theta2_2])
    Rn = noise_cov_z3(ts, gains, stats, sigma_n2)
    Rz = a1 ** 2 * at3 ** 2 * (T @ lam @ Rtheta @ lam @ T.conj().T) + Rn
    Rzi = invert_hermitian(Rz)
    c1 = a1 ** 2 * at3 * stats.sigma_theta1_2
    c2 = a1 * a2 * at3 * stats.sigma_theta2_2
    e1 = stats.sigma_theta1_2 - c1 ** 2 * float(np.real(np.vdot(ts.t1, Rzi @ ts.t1)))
    e2 = stats.sigma_theta2_2 - c2 ** 2 * float(np.real(np.vdot(ts.t2, Rzi @ ts.t2)))
    return e1, e2


def lmmse_total_mse_simplified(ts: TrainingSet, gains: Gains, stats: ThetaStatistics,
                               sigma_n2: float) -> float:
    """Simplified total MSE e1 + e2 via the factored determinant identity.

    Valid when the noise-side quadratic coefficients collapse, which happens
    for the protocol's own covariance structure at any real rho.
    """
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    xi = gains.xi
    s13 = np.sqrt(stats.sigma_theta1_2 / 4.0)
    st1, st2 = stats.sigma_theta1_2, stats.sigma_theta2_2
    rho = float(np.real(ts.rho))
    x = 1.0 - rho ** 2
    a = a1 ** 2 * at3 ** 2 * s13 * gains.eps / xi
    b = a1 ** 2 * at3 ** 2 / (sigma_n2 * xi)
    lam = (1.0 / (st1 * st2)
           + (b / (1.0 + a)) * gains.alpha2 ** 2 * ts.Q2 / st1
           + (b / (1.0 + a)) * a1 ** 2 * ts.Q1 / st2
           + (b / (1.0 + a)) ** 2 * x * a1 ** 2 * a2 ** 2 * ts.Q1 * ts.Q2)
    total = (st1 + st2 + (b / (1.0 + a)) * (a2 ** 2 * ts.Q2 + a1 ** 2 * ts.Q1) * st1 * st2) \
        / (lam * st1 * st2)
    return float(total)


def lmmse_tau_star(ts: TrainingSet, gains: Gains, stats: ThetaStatistics,
                   sigma_n2: float) -> tuple[float, float]:
    """The determinant scalar tau and its factored value (1+a)^2 where the
    prior-independent part separates; both returned for verification."""
    from .estimators import lmmse_coefficients

    s13 = np.sqrt(stats.sigma_theta1_2 / 4.0)
    a = gains.alpha1 ** 2 * gains.alpha3_tilde ** 2 * s13 * gains.eps / gains.xi
    co = lmmse_coefficients(ts, gains, stats, sigma_n2)
    b = gains.alpha1 ** 2 * gains.alpha3_tilde ** 2 / (sigma_n2 * gains.xi)
    x = 1.0 - abs(ts.rho) ** 2
    # tau with the signal-prior terms removed collapses to (1+a)^2
    tau_noise_only = (1.0 + a) ** 2
    st1, st2 = stats.sigma_theta1_2, stats.sigma_theta2_2
    tau_reassembled = tau_noise_only * (
        1.0
        + (b / (1.0 + a)) * (gains.alpha1 ** 2 * st1 * ts.Q1 + gains.alpha2 ** 2 * st2 * ts.Q2)
        + (b / (1.0 + a)) ** 2 * x * gains.alpha1 ** 2 * gains.alpha2 ** 2 * st1 * st2 * ts.Q1 * ts.Q2)
    return float(co.tau), float(tau_reassembled)


# ---------------------------------------------------------------------------
# CRLB, 4-hop


@dataclass
class CrlbCoefficients:
    D1: float
    D2: complex
    D3: float
    D4: complex


def crlb_coefficients(ts: TrainingSet, gains: Gains, theta1: complex,
                      sigma_n2: float, r: float | None = None) -> CrlbCoefficients:
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    a0, xi = gains.a0, gains.xi
    if r is None:
        r = 1.0 if abs(abs(ts.rho) - 1.0) < 1e-12 else 2.0
    a = a0 * abs(theta1)
    s = sigma_n2 * xi * (1.0 + a)
    D1 = a1 ** 4 * at3 ** 2 * ts.Q1 / s + a0 ** 2 * (r - 2.0) ** 2 / (4.0 * (1.0 + a) ** 2)
    D2 = a1 ** 3 * a2 * at3 ** 2 * ts.rho * np.sqrt(ts.Q1 * ts.Q2) / s
    D3 = a1 ** 2 * a2 ** 2 * at3 ** 2 * ts.Q2 / s
    if abs(theta1) > 0:
        D4 = a0 ** 2 * (r - 2.0) ** 2 * theta1 ** 2 / (4.0 * (1.0 + a) ** 2 * abs(theta1) ** 2)
    else:
        D4 = 0.0 + 0.0j
    return CrlbCoefficients(D1=float(D1), D2=complex(D2), D3=float(D3), D4=complex(D4))


def crlb_from_coefficients(co: CrlbCoefficients) -> tuple[float, float, bool]:
    """Rational closed-form bounds (crlb_theta1, crlb_theta2, valid)."""
    D1, D3 = co.D1, co.D3
    d2 = abs(co.D2) ** 2
    d4 = abs(co.D4) ** 2
    den = (D1 * D3 - d2) ** 2 - d4 * D3 ** 2
    valid = den > 0 and D1 * D3 - d2 > 0
    if not valid:
        return float("inf"), float("inf"), False
    c1 = D3 * (D1 * D3 - d2) / den
    c2 = (D1 ** 2 * D3 - D1 * d2 - d4 * D3) / den
    return float(c1), float(c2), True


def crlb_4hop(ts: TrainingSet, gains: Gains, theta1: complex, sigma_n2: float,
              r: float | None = None) -> tuple[float, float, bool]:
    return crlb_from_coefficients(crlb_coefficients(ts, gains, theta1, sigma_n2, r))


def fim_crlb_oracle(co: CrlbCoefficients) -> tuple[float, float]:
    """Bounds by assembling the full real-parameter information matrix of the
    circular/pseudo-covariance block structure and inverting it numerically."""
    F = np.array([[co.D1, co.D2], [np.conj(co.D2), co.D3]], dtype=complex)
    Fp = np.array([[co.D4, 0.0], [0.0, 0.0]], dtype=complex)
    top = np.hstack([F, Fp])
    bot = np.hstack([np.conj(Fp), np.conj(F)])
    J = np.vstack([top, bot])
    Ji = np.linalg.inv(J)
    c1 = float(np.real(Ji[0, 0]))
    c2 = float(np.real(Ji[1, 1]))
    return c1, c2


def crlb_rho_sensitivity(co: CrlbCoefficients) -> tuple[float, float]:
    """Derivatives of the two bounds with respect to |D2|^2 (the only place
    the pilot correlation enters).  Positive values mean correlation hurts."""
    D1, D3 = co.D1, co.D3
    d2 = abs(co.D2) ** 2
    d4 = abs(co.D4) ** 2
    den = (D1 * D3 - d2) ** 2 - d4 * D3 ** 2
    if den <= 0:
        raise ValueError("coefficients outside the validity region")
    g1 = D3 * ((d2 - D1 * D3) ** 2 + d4 * D3 ** 2) / den ** 2
    g2 = (D1 * d2 ** 2 - 2.0 * D3 * (D1 ** 2 - d4) * d2
          + D1 * D3 ** 2 * (D1 ** 2 - d4)) / den ** 2
    return float(g1), float(g2)


def p2p_mse_closed_form(sigma2: tuple[float, ...], err_var: float) -> tuple[float, float]:
    """Exact MSE of the per-hop-LS point-to-point composite estimates.

    Each hop estimate is the true gain plus independent CN(0, err_var)
    error; fourth-moment identities give the composite MSE exactly.
    """
    s1, s2, s3, s4 = sigma2[:4]
    e = err_var
    mse1 = 4.0 * (s1 + e) ** 2 * (s3 + e) ** 2 - 4.0 * s1 ** 2 * s3 ** 2
    mse2 = (s1 + e) * (s2 + e) * (s3 + e) * (s4 + e) - s1 * s2 * s3 * s4
    return float(mse1), float(mse2)


# ---------------------------------------------------------------------------
# 2N-hop bounds


def finite_N_noise_factor(omega: float, N: int) -> float:
    """Accumulated relative noise power of the 2N-hop pilot round trip.

    omega is the common per-hop gain-channel power product; the factor
    collects the forward, middle and return noise injections.  The removable
    singularities at omega = 1/2 and omega = 1 are handled analytically.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if omega <= 0:
        raise ValueError("omega must be positive")
    w = float(omega)
    if np.isclose(w, 1.0):
        term1 = 2.0 * N - 1.0
    else:
        term1 = (1.0 - w ** N + w ** (N + 1) - w ** (2 * N)) / (1.0 - w)
    if np.isclose(w, 0.5):
        term2 = 2.0 * w ** (N + 1) * (N - 1)
    else:
        term2 = 2.0 * w ** (N + 1) * (1.0 - (2.0 * w) ** (N - 1)) / (1.0 - 2.0 * w)
    return float(term1 + term2)


def crlb_2Nhop(N: int, omega: float, rho: float, Q1: float, Q2: float,
               sigma_n2: float, coef1: float = 1.0,
               coef2: float = 1.0) -> tuple[float, float]:
    """Finite-N deterministic bounds on the two round-trip composites, for a
    decorrelating observer of the final pilot observation."""
    x = 1.0 - rho ** 2
    if x <= 0:
        raise ValueError("bounds require |rho| < 1")
    F = finite_N_noise_factor(omega, N)
    c1 = F * sigma_n2 / (x * Q1 * coef1 ** 2)
    c2 = F * sigma_n2 / (x * Q2 * coef2 ** 2)
    return float(c1), float(c2)


def varpi_priors(N: int, sigma2: float) -> tuple[float, float]:
    """Prior variances of the two 2N-hop composites under i.i.d. Rayleigh
    hops with common variance sigma2."""
    return float(2.0 ** N * sigma2 ** (2 * N)), float(sigma2 ** (2 * N))


def lmmse_mse_2Nhop(N: int, omega: float, rho: float, Q1: float, Q2: float,
                    sigma_n2: float, sigma2: float, coef1: float = 1.0,
                    coef2: float = 1.0) -> tuple[float, float]:
    """Per-parameter Bayesian MSE of the shrunk decorrelating estimator."""
    c1, c2 = crlb_2Nhop(N, omega, rho, Q1, Q2, sigma_n2, coef1, coef2)
    p1, p2 = varpi_priors(N, sigma2)
    return float(1.0 / (1.0 / p1 + 1.0 / c1)), float(1.0 / (1.0 / p2 + 1.0 / c2))


def asymptotic_2Nhop_bounds(omega: float, rho: float, Q1: float, Q2: float,
                            sigma_n2: float) -> tuple[float, float]:
    """Large-N limit of the decorrelating bounds when the per-hop power
    product omega stays below 1/2 (noise accumulation stays finite)."""
    if not 0 < omega < 0.5 + 1e-12:
        raise ValueError("asymptotic regime requires 0 < omega <= 1/2")
    x = 1.0 - rho ** 2
    if x <= 0:
        raise ValueError("bounds require |rho| < 1")
    F_inf = 1.0 / (1.0 - omega)
    return float(F_inf * sigma_n2 / (x * Q1)), float(F_inf * sigma_n2 / (x * Q2))

"""Estimators of the composite channel parameters from the final training
observation at end node 1.

The LMMSE estimator exists in two algebraically equivalent forms: a direct
matrix form and an expanded scalar form obtained by inverting the observation
covariance on the two-dimensional pilot subspace.  The ML estimator reduces to
a one-dimensional problem in the scaled magnitude a = a0*|theta1|, whose
stationary points are roots of a quadratic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Gains, ThetaStatistics, noise_cov_z3
from .numeric import projection_onto_columns
from .training import TrainingSet


@dataclass
class ThetaEstimate:
    theta1: complex
    theta2: complex


# ---------------------------------------------------------------------------
# LMMSE


def lmmse_estimate(z3: np.ndarray, ts: TrainingSet, gains: Gains,
                   stats: ThetaStatistics, sigma_n2: float) -> ThetaEstimate:
    """Direct matrix-form LMMSE estimate of (theta1, theta2)."""
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    T = np.column_stack([ts.t1, ts.t2])
    lam = np.diag([a1, a2])
    Rtheta = np.diag([stats.sigma_theta1_2, stats.sigma_theta2_2])
    Rn = noise_cov_z3(ts, gains, stats, sigma_n2)
    Rz = a1 ** 2 * at3 ** 2 * (T @ lam @ Rtheta @ lam @ T.conj().T) + Rn
    Rz = 0.5 * (Rz + Rz.conj().T)
    if sigma_n2 > 0:
        w = np.linalg.solve(Rz, z3)
    else:
        w = np.linalg.pinv(Rz, hermitian=True) @ z3
    th1 = a1 ** 2 * at3 * stats.sigma_theta1_2 * np.vdot(ts.t1, w)
    th2 = a1 * a2 * at3 * stats.sigma_theta2_2 * np.vdot(ts.t2, w)
    return ThetaEstimate(theta1=complex(th1), theta2=complex(th2))


@dataclass
class LmmseCoefficients:
    """Scalars of the expanded LMMSE form (pilot-subspace inversion)."""

    A1: float
    A2: float
    A3: complex
    tau: float


def lmmse_coefficients(ts: TrainingSet, gains: Gains, stats: ThetaStatistics,
                       sigma_n2: float) -> LmmseCoefficients:
    if sigma_n2 <= 0:
        raise ValueError("the expanded form requires positive noise variance")
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    xi, eps = gains.xi, gains.eps
    s13 = np.sqrt(stats.sigma_theta1_2 / 4.0)
    rho = ts.rho
    x = 1.0 - abs(rho) ** 2
    base = a1 ** 2 * at3 ** 2 / xi
    if x <= 0:
        raise ValueError("expanded form is singular at |rho| = 1; use the matrix form")
    A1 = base * (a1 ** 2 * stats.sigma_theta1_2 / sigma_n2 + s13 * eps / (x * ts.Q1))
    A2 = base * (a2 ** 2 * stats.sigma_theta2_2 / sigma_n2 + s13 * eps / (x * ts.Q2))
    A3 = -base * rho * s13 * eps / (x * np.sqrt(ts.Q1 * ts.Q2))
    g = rho * np.sqrt(ts.Q1 * ts.Q2)
    tau = (1.0 + A1 * ts.Q1 + A2 * ts.Q2 + 2.0 * np.real(A3 * np.conj(g))
           + (A1 * A2 - abs(A3) ** 2) * x * ts.Q1 * ts.Q2)
    return LmmseCoefficients(A1=float(A1), A2=float(A2), A3=complex(A3), tau=float(tau))


def lmmse_estimate_expanded(z3: np.ndarray, ts: TrainingSet, gains: Gains,
                            stats: ThetaStatistics, sigma_n2: float) -> ThetaEstimate:
    """Expanded scalar form of the LMMSE estimator (requires |rho| < 1)."""
    co = lmmse_coefficients(ts, gains, stats, sigma_n2)
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    xi = gains.xi
    rho = ts.rho
    sq = np.sqrt(ts.Q1 * ts.Q2)
    zt1 = np.vdot(ts.t1, z3)
    zt2 = np.vdot(ts.t2, z3)
    scale = 1.0 / (co.tau * xi * sigma_n2)
    th1 = a1 ** 2 * at3 * stats.sigma_theta1_2 * scale * (
        (1.0 + co.A2 * ts.Q2 + co.A3 * np.conj(rho) * sq) * zt1
        - (co.A3 * ts.Q1 + co.A2 * rho * sq) * zt2)
    th2 = a1 * a2 * at3 * stats.sigma_theta2_2 * scale * (
        (1.0 + co.A1 * ts.Q1 + np.conj(co.A3) * rho * sq) * zt2
        - (np.conj(co.A3) * ts.Q2 + co.A1 * np.conj(rho) * sq) * zt1)
    return ThetaEstimate(theta1=complex(th1), theta2=complex(th2))


# ---------------------------------------------------------------------------
# ML


@dataclass
class MlSolution:
    theta1: complex
    theta2: complex
    a_hat: float
    case: str        # 'rank1' for fully correlated pilots, 'rank2' otherwise


def _ml_scalars(z3: np.ndarray, ts: TrainingSet):
    zt1 = np.vdot(ts.t1, z3)
    zt2 = np.vdot(ts.t2, z3)
    zz = float(np.real(np.vdot(z3, z3)))
    T = np.column_stack([ts.t1, ts.t2])
    rho = ts.rho
    if abs(abs(rho) - 1.0) < 1e-12:
        P = projection_onto_columns(ts.t1)
        r = 1.0
    else:
        P = projection_onto_columns(T)
        r = 2.0
    zPz = float(np.real(np.vdot(z3, P @ z3)))
    return zt1, zt2, zz, zPz, r


def ml_estimate(z3: np.ndarray, ts: TrainingSet, gains: Gains,
                sigma_n2: float) -> MlSolution:
    """Maximum-likelihood estimate of (theta1, theta2).

    The magnitude of theta1 follows from a quadratic stationarity condition
    in a = a0*|theta1|; the phase and theta2 are in closed form given a.
    """
    if sigma_n2 <= 0:
        raise ValueError("ML estimator requires positive noise variance")
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    a0, xi = gains.a0, gains.xi
    rho = ts.rho
    Q1, Q2 = ts.Q1, ts.Q2
    zt1, zt2, zz, zPz, r = _ml_scalars(z3, ts)

    u = zt1 - np.conj(rho) * np.sqrt(Q1 / Q2) * zt2
    K = abs(u)
    x = 1.0 - abs(rho) ** 2
    C1 = a1 ** 4 * at3 ** 2 * x * Q1
    C2 = 2.0 * C1 + r * a0 ** 2 * sigma_n2 * xi
    C3 = (a0 ** 2 * (-zPz + abs(zt2) ** 2 / Q2)
          - 2.0 * a1 ** 2 * at3 * a0 * K
          + r * a0 ** 2 * sigma_n2 * xi)
    if x == 0.0:
        # rank-one pilot matrix: the quadratic degenerates to a linear equation
        a_hat = max(-C3 / C2, 0.0)
        case = "rank1"
    else:
        disc = C2 ** 2 - 4.0 * C1 * C3
        if disc < 0:
            a_hat = 0.0
        else:
            a_hat = max((-C2 + np.sqrt(disc)) / (2.0 * C1), 0.0)
        case = "rank2"
    mag = a_hat / a0
    phase = -np.angle(u) if K > 0 else 0.0
    theta1 = mag * np.exp(-1j * phase)
    theta2 = np.vdot(ts.t2, z3 - a1 ** 2 * at3 * theta1 * ts.t1) / (a1 * a2 * at3 * Q2)
    return MlSolution(theta1=complex(theta1), theta2=complex(theta2),
                      a_hat=float(a_hat), case=case)


def ml_objective(a: float, z3: np.ndarray, ts: TrainingSet, gains: Gains,
                 sigma_n2: float) -> float:
    """Concentrated negative log-likelihood as a function of a = a0*|theta1|,
    in structured closed form (phase and theta2 profiled out)."""
    if a < 0:
        raise ValueError("a must be nonnegative")
    a1, at3 = gains.alpha1, gains.alpha3_tilde
    a0, xi = gains.a0, gains.xi
    rho = ts.rho
    Q1, Q2 = ts.Q1, ts.Q2
    zt1, zt2, zz, zPz, r = _ml_scalars(z3, ts)
    u = zt1 - np.conj(rho) * np.sqrt(Q1 / Q2) * zt2
    K = abs(u)
    x = 1.0 - abs(rho) ** 2
    s = sigma_n2 * xi
    quad = (zz - (a / (1.0 + a)) * zPz - abs(zt2) ** 2 / ((1.0 + a) * Q2)) / s
    cross = -2.0 * (a1 ** 2 * at3 / a0) * (a / (s * (1.0 + a))) * K
    sq = (a1 ** 2 * at3 / a0) ** 2 * a ** 2 * x * Q1 / (s * (1.0 + a))
    return float(quad + cross + sq + r * np.log1p(a))


def ml_objective_dense(a: float, z3: np.ndarray, ts: TrainingSet, gains: Gains,
                       sigma_n2: float) -> float:
    """Same objective evaluated by dense linear algebra (cross-check path):
    profile theta given |theta1|, then evaluate the Gaussian likelihood."""
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    a0, xi = gains.a0, gains.xi
    rho = ts.rho
    mag = a / a0
    L = ts.L
    if abs(abs(rho) - 1.0) < 1e-12:
        P = projection_onto_columns(ts.t1)
    else:
        P = projection_onto_columns(np.column_stack([ts.t1, ts.t2]))
    Rn = sigma_n2 * xi * (np.eye(L) + a * P)
    sign, logdet = np.linalg.slogdet(Rn)
    Rni = np.linalg.inv(Rn)
    # best phase of theta1 and best theta2 for this magnitude
    u = np.vdot(ts.t1, z3) - np.conj(rho) * np.sqrt(ts.Q1 / ts.Q2) * np.vdot(ts.t2, z3)
    phase = -np.angle(u) if abs(u) > 0 else 0.0
    theta1 = mag * np.exp(-1j * phase)
    theta2 = np.vdot(ts.t2, z3 - a1 ** 2 * at3 * theta1 * ts.t1) / (a1 * a2 * at3 * ts.Q2)
    resid = z3 - a1 * at3 * (a1 * theta1 * ts.t1 + a2 * theta2 * ts.t2)
    val = float(np.real(np.vdot(resid, Rni @ resid))) + float(logdet)
    # drop the a-independent part so the two paths share a common offset
    return val - L * np.log(sigma_n2 * xi)


def ml_objective_derivative(a: float, z3: np.ndarray, ts: TrainingSet,
                            gains: Gains, sigma_n2: float) -> float:
    """Closed-form derivative of the concentrated objective."""
    a1, at3 = gains.alpha1, gains.alpha3_tilde
    a0, xi = gains.a0, gains.xi
    rho = ts.rho
    Q1, Q2 = ts.Q1, ts.Q2
    zt1, zt2, zz, zPz, r = _ml_scalars(z3, ts)
    u = zt1 - np.conj(rho) * np.sqrt(Q1 / Q2) * zt2
    K = abs(u)
    x = 1.0 - abs(rho) ** 2
    C1 = a1 ** 4 * at3 ** 2 * x * Q1
    C2 = 2.0 * C1 + r * a0 ** 2 * sigma_n2 * xi
    C3 = (a0 ** 2 * (-zPz + abs(zt2) ** 2 / Q2)
          - 2.0 * a1 ** 2 * at3 * a0 * K
          + r * a0 ** 2 * sigma_n2 * xi)
    return float((C1 * a ** 2 + C2 * a + C3)
                 / (sigma_n2 * xi * a0 ** 2 * (1.0 + a) ** 2))


def ml_grid_oracle(z3: np.ndarray, ts: TrainingSet, gains: Gains,
                   sigma_n2: float, n_grid: int = 100_000) -> float:
    """Brute-force minimizer of the concentrated objective over a dense grid;
    returns the minimizing a."""
    a1, a2, at3 = gains.alpha1, gains.alpha2, gains.alpha3_tilde
    a0, xi = gains.a0, gains.xi
    rho = ts.rho
    Q1, Q2 = ts.Q1, ts.Q2
    zt1, zt2, zz, zPz, r = _ml_scalars(z3, ts)
    u = zt1 - np.conj(rho) * np.sqrt(Q1 / Q2) * zt2
    K = abs(u)
    x = 1.0 - abs(rho) ** 2
    if x > 0:
        th1_ls = abs(u) / (x * Q1) / (a1 ** 2 * at3)
    else:
        th1_ls = abs(zt1) / Q1 / (a1 ** 2 * at3)
    a_max = a0 * max(10.0, 4.0 * th1_ls)
    grid = np.linspace(0.0, a_max, n_grid)
    s = sigma_n2 * xi
    quad = (zz - (grid / (1.0 + grid)) * zPz
            - abs(zt2) ** 2 / ((1.0 + grid) * Q2)) / s
    cross = -2.0 * (a1 ** 2 * at3 / a0) * (grid / (s * (1.0 + grid))) * K
    sq = (a1 ** 2 * at3 / a0) ** 2 * grid ** 2 * x * Q1 / (s * (1.0 + grid))
    f = quad + cross + sq + r * np.log1p(grid)
    return float(grid[int(np.argmin(f))])


# ---------------------------------------------------------------------------
# 2N-hop composite estimators


def varpi_lmmse_estimate(varpi_ls: tuple[complex, complex], priors: tuple[float, float],
                         crlbs: tuple[float, float]) -> tuple[complex, complex]:
    """Per-parameter Bayesian shrinkage of the decorrelating LS estimates.

    Each LS output is approximately the parameter plus complex Gaussian error
    with variance given by the corresponding closed-form bound, so the scalar
    LMMSE combiner is prior / (prior + errvar) times the LS value.
    """
    out = []
    for v, p, c in zip(varpi_ls, priors, crlbs):
        out.append(v * p / (p + c))
    return out[0], out[1]

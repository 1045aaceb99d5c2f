"""Construction of pilot sequences with exact power and cross-correlation.

The two end-node pilots are mixed from a deterministic orthonormal basis so
that any requested correlation coefficient is realized exactly, and the
relay pilot is drawn from a third basis vector, orthogonal to both.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainingSet:
    t1: np.ndarray
    t2: np.ndarray
    tr: np.ndarray
    Q1: float
    Q2: float
    Qr: float
    rho: complex

    @property
    def L(self) -> int:
        return len(self.t1)


def _dft_basis(L: int, k: int) -> np.ndarray:
    n = np.arange(L)
    return np.exp(2j * np.pi * k * n / L) / np.sqrt(L)


def build_training(L: int, rho: complex, Q1: float, Q2: float, Qr: float) -> TrainingSet:
    """Pilot triple with ||t1||^2=Q1, ||t2||^2=Q2, ||tr||^2=Qr and
    t1^H t2 / sqrt(Q1 Q2) = rho exactly; tr orthogonal to both."""
    if L < 3:
        raise ValueError("need L >= 3 for a rank-3 pilot matrix")
    if abs(rho) > 1 + 1e-12:
        raise ValueError("|rho| must be <= 1")
    if min(Q1, Q2, Qr) <= 0:
        raise ValueError("pilot powers must be positive")
    u1 = _dft_basis(L, 0)
    u2 = _dft_basis(L, 1)
    u3 = _dft_basis(L, 2)
    t1 = np.sqrt(Q1) * u1
    # t1^H t2 = rho * sqrt(Q1 Q2) since u1 has unit norm
    t2 = np.sqrt(Q2) * (rho * u1 + np.sqrt(max(0.0, 1.0 - abs(rho) ** 2)) * u2)
    tr = np.sqrt(Qr) * u3
    return TrainingSet(t1=t1, t2=t2, tr=tr, Q1=Q1, Q2=Q2, Qr=Qr, rho=complex(rho))


def measured_rho(ts: TrainingSet) -> complex:
    if ts.Q1 <= 0 or ts.Q2 <= 0:
        raise ValueError("zero-power pilot")
    return complex(np.vdot(ts.t1, ts.t2) / np.sqrt(ts.Q1 * ts.Q2))

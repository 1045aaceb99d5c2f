"""Complex-valued numeric kernels sized for short training blocks.

Everything here is a pure function; RngStream instances are cheap value
objects that deterministically map (seed, stream_id) to an independent
generator, so Monte-Carlo trials can be farmed out to workers while staying
bitwise reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative tolerances for rank / positive-definiteness checks.  Signal powers
# in this problem are O(1)-O(1e2), so these leave ample headroom.
RANK_RTOL = 1e-10
PD_RTOL = 1e-12


class SingularMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class RngStream:
    """Deterministic, independent random stream for one Monte-Carlo trial."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.default_rng(ss)


def sample_cgauss(n: int, variance: float, rng) -> np.ndarray:
    """Draw n i.i.d. circularly-symmetric complex Gaussians.

    ``variance`` is the total complex variance: real and imaginary parts each
    carry variance/2.  ``rng`` may be an RngStream or a numpy Generator.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if variance == 0.0:
        # still consume draws so call sequences stay aligned
        gen.standard_normal(2 * n)
        return np.zeros(n, dtype=complex)
    scale = np.sqrt(variance / 2.0)
    re = gen.standard_normal(n)
    im = gen.standard_normal(n)
    return scale * (re + 1j * im)


def projection_onto_columns(T: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the column space of T."""
    T = np.asarray(T, dtype=complex)
    if T.ndim == 1:
        T = T[:, None]
    sv = np.linalg.svd(T, compute_uv=False)
    if sv[-1] <= RANK_RTOL * sv[0]:
        raise SingularMatrixError("column-rank-deficient matrix")
    G = T.conj().T @ T
    P = T @ np.linalg.solve(G, T.conj().T)
    # enforce exact Hermitian symmetry against roundoff
    return 0.5 * (P + P.conj().T)


def invert_hermitian(M: np.ndarray) -> np.ndarray:
    """Inverse of a Hermitian positive-definite matrix, validated by residual."""
    M = np.asarray(M, dtype=complex)
    w = np.linalg.eigvalsh(M)
    if w[0] <= PD_RTOL * w[-1]:
        raise SingularMatrixError("matrix is not positive definite")
    Minv = np.linalg.inv(M)
    Minv = 0.5 * (Minv + Minv.conj().T)
    resid = np.abs(M @ Minv - np.eye(M.shape[0])).max()
    if resid > 1e-9:
        raise SingularMatrixError(f"inverse residual too large: {resid:g}")
    return Minv

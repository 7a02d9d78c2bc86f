"""MRT and ZF beamformers built from reference-port CSI.

Both schemes produce unit-norm vectors; power allocation stays in the SIR
ratio.  ZF nulls every co-user's reference-port channel exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .randlin import solve_gram

__all__ = ["PrecoderSet", "mrt_precoders", "zf_precoders"]


@dataclass
class PrecoderSet:
    """U unit-norm beamforming vectors (columns of `vectors`) plus scheme tag."""

    vectors: np.ndarray  # (M, U) complex, unit-norm columns
    scheme: str

    @property
    def num_users(self) -> int:
        return self.vectors.shape[1]

    def vector(self, u: int) -> np.ndarray:
        return self.vectors[:, u]


def _normalize_columns(W: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(W, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("zero-norm precoding column")
    return W / norms


def mrt_precoders(H1: np.ndarray) -> PrecoderSet:
    """w_u = h_{u,1} / ||h_{u,1}||."""
    H1 = np.asarray(H1, dtype=complex)
    norms = np.linalg.norm(H1, axis=0)
    if np.any(norms == 0.0):
        raise ValueError("MRT requires nonzero reference channels")
    return PrecoderSet(vectors=H1 / norms, scheme="MRT")


def zf_precoders(H1: np.ndarray, tolerance: float = 1e-12) -> PrecoderSet:
    """Columns of H1 (H1^H H1)^{-1}, normalized to unit norm."""
    H1 = np.asarray(H1, dtype=complex)
    raw = solve_gram(H1, tolerance)
    return PrecoderSet(vectors=_normalize_columns(raw), scheme="ZF")

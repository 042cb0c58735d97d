"""Density operators, their decompositions, and the decomposition distance.

A decomposition is stored as a ``d x K`` matrix whose columns are the
sub-normalized vectors ``sqrt(r_l) |psi_l>``. Column order matters: the
decomposition distance pairs vectors by position, so two decompositions that
differ only by a reordering are *not* at distance zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import matops
from .errors import DimensionMismatch, NotUnitary, RankMismatch, TraceNotOne

RANK_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A validated density matrix with the spectral data of its support.

    ``probs`` holds the ``K`` eigenvalues above the rank threshold in
    descending order and ``vectors`` the matching ``d x K`` orthonormal
    eigenvector columns.
    """

    matrix: np.ndarray
    probs: np.ndarray
    vectors: np.ndarray

    @classmethod
    def from_matrix(cls, a, tol: float = RANK_TOL) -> "DensityOperator":
        m = matops.as_matrix(a)
        rank = matops.validate_density(m, tol=tol)
        eig = matops.hermitian_eig(m, hermiticity_tol=tol)
        probs = eig.eigenvalues[:rank].copy()
        vecs = eig.eigenvectors[:, :rank].copy()
        m = 0.5 * (m + m.conj().T)
        return cls(matrix=m, probs=probs, vectors=vecs)

    @classmethod
    def from_spectrum(cls, probs, vectors, tol: float = RANK_TOL) -> "DensityOperator":
        """Build from known eigen-data without re-diagonalizing.

        ``vectors`` columns must be orthonormal; they are kept exactly as
        given (including their phases), only reordered so ``probs`` descend.
        """
        p = np.asarray(probs, dtype=float).ravel()
        v = np.asarray(vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[1] != p.size:
            raise DimensionMismatch(
                f"{p.size} probabilities but {v.shape[1]} vectors", probs=p.size, vectors=v.shape[1]
            )
        gram = v.conj().T @ v
        if np.max(np.abs(gram - np.eye(p.size))) > tol:
            raise ValueError("eigenvectors are not orthonormal")
        if np.any(p <= tol):
            raise ValueError("probabilities must exceed the rank threshold")
        if abs(p.sum() - 1.0) > tol:
            raise TraceNotOne(f"probabilities sum to {p.sum()!r}", trace=float(p.sum()), residual=float(p.sum() - 1))
        order = np.argsort(-p, kind="stable")
        p, v = p[order], v[:, order]
        m = (v * p) @ v.conj().T
        return cls(matrix=0.5 * (m + m.conj().T), probs=p, vectors=v)

    @classmethod
    def pure(cls, psi) -> "DensityOperator":
        v = np.asarray(psi, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls.from_spectrum([1.0], v[:, None])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return self.probs.size

    @cached_property
    def sqrt(self) -> np.ndarray:
        v = self.vectors
        return (v * np.sqrt(self.probs)) @ v.conj().T

    def support_projector(self) -> np.ndarray:
        return self.vectors @ self.vectors.conj().T

    def spectral_columns(self) -> np.ndarray:
        """The decomposition ``{sqrt(p_k) |e_k>}`` as ``d x K`` columns."""
        return self.vectors * np.sqrt(self.probs)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Ordered list of ``K`` sub-normalized vectors, stored as matrix columns."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        total = float(np.sum(np.abs(v) ** 2))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"squared norms sum to {total!r}, expected 1")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    @property
    def size(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, l: int) -> np.ndarray:
        return self.vectors[:, l]


def project(a: Decomposition, tol: float = RANK_TOL) -> DensityOperator:
    """The density operator ``sum_l |v_l><v_l|`` of a decomposition."""
    v = a.vectors
    rho = DensityOperator.from_matrix(v @ v.conj().T, tol=tol)
    if rho.rank != a.size:
        raise RankMismatch(
            f"decomposition has {a.size} vectors but projects to rank {rho.rank}",
            vectors=a.size,
            rank=rho.rank,
        )
    return rho


def decomposition_from_unitary(rho: DensityOperator, v) -> Decomposition:
    """``sqrt(r_l)|psi_l> = sum_k sqrt(p_k) |e_k> V_kl`` for a ``K x K`` unitary ``V``."""
    u = np.asarray(v, dtype=complex)
    if u.ndim != 2 or u.shape != (rho.rank, rho.rank):
        raise DimensionMismatch(
            f"unitary has shape {u.shape}, state has rank {rho.rank}", shape=list(u.shape), rank=rho.rank
        )
    if not matops.is_unitary(u):
        raise NotUnitary("gauge matrix is not unitary", residual=float(np.max(np.abs(u @ u.conj().T - np.eye(rho.rank)))))
    return Decomposition(rho.spectral_columns() @ u)


def decomposition_distance(a: Decomposition, b: Decomposition) -> float:
    """``(sum_l ||b_l - a_l||^2)^(1/2)`` with vectors paired by position."""
    if a.vectors.shape != b.vectors.shape:
        raise DimensionMismatch(
            f"decompositions have shapes {a.vectors.shape} and {b.vectors.shape}",
            left=list(a.vectors.shape),
            right=list(b.vectors.shape),
        )
    return float(np.sqrt(np.sum(np.abs(b.vectors - a.vectors) ** 2)))


def require_same_rank(rho: DensityOperator, sigma: DensityOperator) -> None:
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions {rho.dim} and {sigma.dim} differ", left=rho.dim, right=sigma.dim)
    if rho.rank != sigma.rank:
        raise RankMismatch(f"ranks {rho.rank} and {sigma.rank} differ", left=rho.rank, right=sigma.rank)

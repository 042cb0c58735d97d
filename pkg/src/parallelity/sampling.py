"""Random unitaries and density operators for tests, oracles and demos."""

from __future__ import annotations

import numpy as np

from .ensemble import DensityOperator


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_unitaries(count: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """A stack of ``count`` Haar-random ``n x n`` unitaries."""
    z = (rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def random_probs(k: int, rng: np.random.Generator, min_gap: float = 0.0) -> np.ndarray:
    """Descending probability vector of length ``k``; consecutive gaps exceed ``min_gap``."""
    while True:
        p = np.sort(rng.dirichlet(np.ones(k)))[::-1]
        if k == 1 or (np.min(-np.diff(p)) > min_gap and p[-1] > 1e-6):
            return p


def random_density(
    d: int,
    k: int | None = None,
    rng: np.random.Generator | None = None,
    *,
    min_gap: float = 0.0,
) -> DensityOperator:
    """Random rank-``k`` density operator on ``C^d``; ``min_gap`` > 0 makes it non-degenerate."""
    rng = np.random.default_rng() if rng is None else rng
    k = d if k is None else k
    u = haar_unitary(d, rng)[:, :k]
    return DensityOperator.from_matrix((u * random_probs(k, rng, min_gap)) @ u.conj().T)


def random_state_vector(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def commuting_partner(rho: DensityOperator, rng: np.random.Generator, min_gap: float = 0.0) -> DensityOperator:
    """A density operator diagonal in the same eigenbasis as ``rho``, same rank."""
    p = random_probs(rho.rank, rng, min_gap)
    v = rho.vectors[:, rng.permutation(rho.rank)]
    return DensityOperator.from_matrix((v * p) @ v.conj().T)

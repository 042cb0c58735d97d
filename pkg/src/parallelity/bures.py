"""Parallelity of general decompositions: fidelity, Bures distance, Uhlmann holonomy.

The overlap matrix ``M_kl = sqrt(q_k) <f_k|e_l> sqrt(p_l)`` between the
spectral data of two states carries the whole construction. Its unitary polar
factor ``W`` is the connection; ``Tr|M|`` is the fidelity.

The Uhlmann holonomy is available twice: as the ordered product of the ``W``
factors sandwiched between the first and last eigenbases, and as the product
of operator factors ``(sqrt(r2) r1 sqrt(r2))^(-1/2) sqrt(r2) sqrt(r1)``. The
two share nothing beyond the input matrices and serve as each other's check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import matops
from .ensemble import (
    RANK_TOL,
    Decomposition,
    DensityOperator,
    decomposition_from_unitary,
    require_same_rank,
)
from .errors import DimensionMismatch, NotUnitary, RankMismatch, SingularOverlap
from .sampling import haar_unitaries


def default_phase_tol(k: int) -> float:
    return 1e-10 * k


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    m: np.ndarray
    polar: matops.PolarFactors

    @property
    def modulus(self) -> np.ndarray:
        return self.polar.modulus

    @property
    def w(self) -> np.ndarray:
        return self.polar.unitary

    @property
    def fidelity(self) -> float:
        return float(np.trace(self.polar.modulus).real)


@dataclass(frozen=True, eq=False)
class HolonomyResult:
    """Holonomy operator on ``C^d``, its trace, and the phase of the trace.

    ``phase`` is ``None`` when ``|trace|`` does not exceed the phase
    tolerance; the geometric phase is then undefined.
    """

    u: np.ndarray
    trace: complex
    phase: Optional[float]
    phase_tol: float
    steps: list = field(default_factory=list)

    @property
    def defined(self) -> bool:
        return self.phase is not None


def phase_of(trace: complex, phase_tol: float) -> Optional[float]:
    if abs(trace) <= phase_tol:
        return None
    phi = float(np.angle(trace))
    return np.pi if phi <= -np.pi else phi


def overlap_matrix(
    rho: DensityOperator, sigma: DensityOperator, singular_tol: float = matops.SINGULAR_TOL
) -> OverlapMatrix:
    """``M_kl = sqrt(q_k) <f_k|e_l> sqrt(p_l)`` with ``rho -> (p, e)`` and ``sigma -> (q, f)``."""
    require_same_rank(rho, sigma)
    m = sigma.spectral_columns().conj().T @ rho.spectral_columns()
    return OverlapMatrix(m=m, polar=matops.polar_left(m, singular_tol))


def parallel_pair(
    rho: DensityOperator,
    sigma: DensityOperator,
    v,
    singular_tol: float = matops.SINGULAR_TOL,
) -> tuple[Decomposition, Decomposition]:
    """Parallel decompositions of ``rho`` and ``sigma`` sharing the gauge ``V``.

    ``A_rho = E sqrt(P) V`` and ``A_sigma = F sqrt(Q) W V`` where ``W`` is the
    unitary polar factor of the overlap matrix.
    """
    ov = overlap_matrix(rho, sigma, singular_tol)
    v = np.asarray(v, dtype=complex)
    if v.shape != (rho.rank, rho.rank) or not matops.is_unitary(v):
        raise NotUnitary("gauge matrix must be a K x K unitary", shape=list(v.shape), rank=rho.rank)
    a_rho = decomposition_from_unitary(rho, v)
    a_sigma = Decomposition(sigma.spectral_columns() @ ov.w @ v)
    return a_rho, a_sigma


def fidelity(rho: DensityOperator, sigma: DensityOperator, support_tol: float = RANK_TOL) -> float:
    """``Tr (sqrt(sigma) rho sqrt(sigma))^(1/2)``, clipped to ``[0, 1]``.

    Evaluated from the raw matrices as the trace norm of
    ``sqrt(sigma) sqrt(rho)``, whose squared modulus is the operator inside
    the trace. Taking singular values avoids the ``sqrt(1e-17)`` blow-up that
    an eigenvalue square root suffers on the kernel of rank-deficient states.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"dimensions {rho.dim} and {sigma.dim} differ", left=rho.dim, right=sigma.dim)
    s = matops.sqrt_psd(sigma.matrix, support_tol=support_tol)
    r = matops.sqrt_psd(rho.matrix, support_tol=support_tol)
    f = matops.trace_norm(s @ r)
    return min(max(f, 0.0), 1.0)


def bures_distance(rho: DensityOperator, sigma: DensityOperator) -> float:
    return float(np.sqrt(max(2.0 - 2.0 * fidelity(rho, sigma), 0.0)))


def minimize_distance_bruteforce(
    rho: DensityOperator,
    sigma: DensityOperator,
    samples: int,
    seed: int,
    chunk: int = 20000,
) -> float:
    """Smallest decomposition distance over random gauge pairs ``(V_rho, V_sigma)``.

    A stochastic oracle for the minimal distance: it never uses the overlap
    matrix, only the raw decompositions ``E sqrt(P) V_rho`` and
    ``F sqrt(Q) V_sigma`` and the vector-by-vector distance.
    """
    require_same_rank(rho, sigma)
    rng = np.random.default_rng(seed)
    a0 = rho.spectral_columns()
    b0 = sigma.spectral_columns()
    k = rho.rank
    best = np.inf
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        va = haar_unitaries(n, k, rng)
        vb = haar_unitaries(n, k, rng)
        a = np.einsum("dk,nkl->ndl", a0, va)
        b = np.einsum("dk,nkl->ndl", b0, vb)
        dist = np.sqrt(np.sum(np.abs(b - a) ** 2, axis=(1, 2)))
        best = min(best, float(dist.min()))
        remaining -= n
    return best


def _check_sequence(seq: Sequence[DensityOperator]) -> None:
    if len(seq) < 2:
        raise ValueError("a holonomy needs at least two states")
    first = seq[0]
    for a, rho in enumerate(seq[1:], start=1):
        if rho.dim != first.dim:
            raise DimensionMismatch(f"state {a} has dimension {rho.dim}, expected {first.dim}", step=a)
        if rho.rank != first.rank:
            raise RankMismatch(f"state {a} has rank {rho.rank}, expected {first.rank}", step=a)


def _step_error(exc: SingularOverlap, step: int) -> SingularOverlap:
    return SingularOverlap(f"step {step} -> {step + 1}: {exc.message}", step=step, **exc.details)


def uhlmann_holonomy(
    seq: Sequence[DensityOperator],
    singular_tol: float = matops.SINGULAR_TOL,
    phase_tol: Optional[float] = None,
) -> HolonomyResult:
    """Uhlmann holonomy as ``E_n W^(n,n-1) ... W^(2,1) E_1^H``."""
    _check_sequence(seq)
    k = seq[0].rank
    total = np.eye(k, dtype=complex)
    for a in range(len(seq) - 1):
        try:
            ov = overlap_matrix(seq[a], seq[a + 1], singular_tol)
        except SingularOverlap as exc:
            raise _step_error(exc, a) from None
        total = ov.w @ total
    u = seq[-1].vectors @ total @ seq[0].vectors.conj().T
    return _result(u, k, phase_tol)


def uhlmann_holonomy_operator_form(
    seq: Sequence[DensityOperator],
    singular_tol: float = matops.SINGULAR_TOL,
    phase_tol: Optional[float] = None,
    support_tol: float = 1e-10,
) -> HolonomyResult:
    """Uhlmann holonomy as the product of ``(sqrt(r') r sqrt(r'))^(-1/2) sqrt(r') sqrt(r)``.

    Square roots are recomputed from the raw matrices, with eigenvalues at or
    below ``support_tol`` treated as zero. The inverse square root acts on the
    support only: the ``K`` largest eigenvalues of ``sqrt(r') r sqrt(r')`` are
    inverted, the rest are treated as zero.
    """
    _check_sequence(seq)
    k = seq[0].rank
    roots = [matops.sqrt_psd(rho.matrix, support_tol=support_tol) for rho in seq]
    u = np.eye(seq[0].dim, dtype=complex)
    for a in range(len(seq) - 1):
        cross = roots[a + 1] @ roots[a]
        inner = cross @ cross.conj().T
        eig = matops.hermitian_eig(0.5 * (inner + inner.conj().T))
        mu = np.clip(eig.eigenvalues[:k], 0.0, None)
        smallest = float(np.sqrt(mu[-1]))
        if smallest <= singular_tol:
            raise SingularOverlap(
                f"step {a} -> {a + 1}: fidelity operator singular on the support",
                step=a,
                min_singular_value=smallest,
                tol=singular_tol,
            )
        g = eig.eigenvectors[:, :k]
        inv_root = (g / np.sqrt(mu)) @ g.conj().T
        u = inv_root @ cross @ u
    return _result(u, k, phase_tol)


def _result(u: np.ndarray, k: int, phase_tol: Optional[float], steps=None) -> HolonomyResult:
    tol = default_phase_tol(k) if phase_tol is None else phase_tol
    tr = complex(np.trace(u))
    return HolonomyResult(u=u, trace=tr, phase=phase_of(tr, tol), phase_tol=tol, steps=steps or [])

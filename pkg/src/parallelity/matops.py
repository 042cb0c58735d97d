"""Dense complex-matrix primitives.

Hermitian eigendecomposition with a deterministic phase gauge, the PSD square
root, the left polar decomposition and density-operator validation. All
functions take and return plain :class:`numpy.ndarray` values and never mutate
their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotPSD, NotSquare, SingularOverlap, TraceNotOne

HERMITICITY_TOL = 1e-9
PSD_TOL = 1e-9
TRACE_TOL = 1e-9
SINGULAR_TOL = 1e-10

# relative slack when picking the gauge component, keeps ties like (1, 1)/sqrt(2) stable
_GAUGE_TIE = 1e-9


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending with eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class PolarFactors:
    """Left polar form ``M = modulus @ unitary``."""

    modulus: np.ndarray
    unitary: np.ndarray


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise NotSquare(f"expected a non-empty 2-D matrix, got shape {m.shape}", shape=list(m.shape))
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"matrix is {m.shape[0]}x{m.shape[1]}, expected square", shape=list(m.shape))


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermiticity_residual(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T)))


def gauge_columns(vectors: np.ndarray) -> np.ndarray:
    """Rephase each column so its largest-magnitude component is real positive.

    Among components whose magnitude is within a relative ``1e-9`` of the
    largest, the first one is used.
    """
    v = np.array(vectors, dtype=complex, copy=True)
    mags = np.abs(v)
    for j in range(v.shape[1]):
        col = mags[:, j]
        top = col.max()
        if top == 0.0:
            continue
        idx = int(np.argmax(col >= top * (1.0 - _GAUGE_TIE)))
        z = v[idx, j]
        v[:, j] *= np.conj(z) / abs(z)
    return v


def hermitian_eig(a, hermiticity_tol: float = HERMITICITY_TOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back in descending order and every eigenvector is
    phase-gauged by :func:`gauge_columns`. Exactly equal eigenvalues are
    ordered by the lexicographic order of their gauged eigenvector entries.

    Raises
    ------
    NotSquare
        If ``a`` is not square.
    NotHermitian
        If ``max|a - a^H| > hermiticity_tol``.
    """
    m = as_matrix(a)
    _require_square(m)
    res = hermiticity_residual(m)
    if res > hermiticity_tol:
        raise NotHermitian(
            f"matrix deviates from Hermitian by {res:.3e} > {hermiticity_tol:.1e}",
            residual=res,
            tol=hermiticity_tol,
        )
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    v = gauge_columns(v)

    def key(j: int):
        col = v[:, j]
        return (-w[j], tuple(np.column_stack([-col.real, -col.imag]).ravel()))

    order = sorted(range(len(w)), key=key)
    return EigenSystem(eigenvalues=w[order].copy(), eigenvectors=v[:, order].copy())


def sqrt_psd(a, clamp_tol: float = PSD_TOL, support_tol: float | None = None) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix via eigendecomposition.

    Eigenvalues in ``[-clamp_tol, 0)`` are clamped to zero. With
    ``support_tol`` set, eigenvalues ``<= support_tol`` are zeroed too, so
    rounding noise on the kernel does not leak into the root as ``~1e-8``.

    Raises
    ------
    NotPSD
        If an eigenvalue is below ``-clamp_tol``.
    """
    eig = hermitian_eig(a)
    lam = eig.eigenvalues
    if lam.size and lam[-1] < -clamp_tol:
        raise NotPSD(
            f"smallest eigenvalue {lam[-1]:.3e} below -{clamp_tol:.1e}",
            min_eigenvalue=float(lam[-1]),
            tol=clamp_tol,
        )
    floor = 0.0 if support_tol is None else support_tol
    root = np.sqrt(np.where(lam > floor, lam, 0.0))
    v = eig.eigenvectors
    s = (v * root) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def trace_norm(a) -> float:
    """Sum of singular values, i.e. ``Tr (A A^H)^(1/2)``."""
    return float(np.sum(np.linalg.svd(as_matrix(a), compute_uv=False)))


def polar_left(m, singular_tol: float = SINGULAR_TOL) -> PolarFactors:
    """Left polar decomposition ``M = |M| W`` with ``|M| = (M M^H)^(1/2)``.

    The factors are read off the SVD ``M = U S V^H`` as ``|M| = U S U^H`` and
    ``W = U V^H``, which equals ``|M|^{-1} M`` whenever ``|M|`` is invertible.

    Raises
    ------
    SingularOverlap
        If the smallest singular value is ``<= singular_tol``; ``W`` is then
        not unique.
    """
    a = as_matrix(m)
    _require_square(a)
    u, s, vh = np.linalg.svd(a)
    smin = float(s[-1])
    if smin <= singular_tol:
        raise SingularOverlap(
            f"smallest singular value {smin:.3e} <= {singular_tol:.1e}; unitary polar factor not unique",
            min_singular_value=smin,
            tol=singular_tol,
        )
    modulus = (u * s) @ u.conj().T
    modulus = 0.5 * (modulus + modulus.conj().T)
    return PolarFactors(modulus=modulus, unitary=u @ vh)


def validate_density(a, tol: float = TRACE_TOL) -> int:
    """Check that ``a`` is a density matrix and return its numerical rank.

    The rank counts eigenvalues strictly greater than ``tol``.
    """
    m = as_matrix(a)
    _require_square(m)
    eig = hermitian_eig(m, hermiticity_tol=tol)
    lam = eig.eigenvalues
    if lam[-1] < -tol:
        raise NotPSD(
            f"eigenvalue {lam[-1]:.3e} below -{tol:.1e}", min_eigenvalue=float(lam[-1]), tol=tol
        )
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(f"trace {tr!r} differs from 1", trace=tr, residual=tr - 1.0, tol=tol)
    return int(np.count_nonzero(lam > tol))


def is_unitary(u: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0])))) <= tol

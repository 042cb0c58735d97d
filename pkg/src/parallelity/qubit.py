"""Closed-form qubit analytics.

Two isospectral qubit states with weights ``(p, 1 - p)`` and eigenbases
``{(|0> + |1>)/sqrt2, (|0> - |1>)/sqrt2}`` and
``{a|0> + b e^{i phi}|1>, -b e^{-i phi}|0> + a|1>}`` are compared through the
single parameter ``eta = 2 a b cos(phi)``. Also here: Bloch-sphere polygons and
their signed solid angle, and the grid behind the distance surface over
``(p, eta)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .ensemble import DensityOperator
from .errors import AntipodalVertices, DegenerateSpectrum, DimensionMismatch
from .spectral import (
    DEGENERACY_TOL,
    TIE_TOL,
    bargmann_invariant,
    matched_paths,
    spectral_steps,
)


class Regime(str, enum.Enum):
    IDENTITY = "identity"
    SWAP = "swap"


@dataclass(frozen=True)
class QubitBasisPair:
    alpha: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        if not 0.0 <= self.phi <= np.pi:
            raise ValueError(f"phi={self.phi} outside [0, pi]")

    @property
    def beta(self) -> float:
        return float(np.sqrt(max(1.0 - self.alpha**2, 0.0)))

    @property
    def eta(self) -> float:
        return float(2.0 * self.alpha * self.beta * np.cos(self.phi))

    @classmethod
    def from_eta(cls, eta: float) -> "QubitBasisPair":
        """Balanced pair (``a = b``) realising a given ``eta`` in ``[-1, 1]``."""
        return cls(alpha=float(np.sqrt(0.5)), phi=float(np.arccos(np.clip(eta, -1.0, 1.0))))


def qubit_bases(pair: QubitBasisPair) -> tuple[np.ndarray, np.ndarray]:
    """Both eigenbases as ``2 x 2`` matrices with the basis vectors as columns."""
    s = 1.0 / np.sqrt(2.0)
    basis_a = np.array([[s, s], [s, -s]], dtype=complex)
    a, b, phi = pair.alpha, pair.beta, pair.phi
    basis_b = np.array(
        [[a, -b * np.exp(-1j * phi)], [b * np.exp(1j * phi), a]],
        dtype=complex,
    )
    return basis_a, basis_b


def qubit_pair_states(p: float, pair: QubitBasisPair) -> tuple[DensityOperator, DensityOperator]:
    """The two isospectral states with weight ``p`` on the first basis vector."""
    _check_p(p)
    basis_a, basis_b = qubit_bases(pair)
    w = [p, 1.0 - p]
    return DensityOperator.from_spectrum(w, basis_a), DensityOperator.from_spectrum(w, basis_b)


def _check_p(p: float, tol: float = DEGENERACY_TOL) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p={p} outside (0, 1)")
    if abs(2.0 * p - 1.0) <= tol:
        raise DegenerateSpectrum(f"p={p} makes the spectrum degenerate", p=p, gap=abs(2 * p - 1), tol=tol)


def _regime_weights(p: float, eta: float) -> tuple[float, float]:
    identity = np.sqrt(0.5 * (1.0 + eta))
    swap = 2.0 * np.sqrt(p * (1.0 - p)) * np.sqrt(0.5 * (1.0 - eta))
    return float(identity), float(swap)


def permutation_regime(p: float, eta: float) -> Regime:
    """Swap iff ``1 + eta < 4 p (1 - p)(1 - eta)``, compared as matching weights.

    Weights within the assignment tie tolerance resolve to the identity.
    """
    _check_p(p)
    if not -1.0 <= eta <= 1.0:
        raise ValueError(f"eta={eta} outside [-1, 1]")
    identity, swap = _regime_weights(p, eta)
    return Regime.SWAP if swap - identity > TIE_TOL else Regime.IDENTITY


def swap_interval(eta: float) -> tuple[float, float] | None:
    """Open interval of ``p`` where the swap is optimal, ``None`` for ``eta >= 0``."""
    if eta >= 0:
        return None
    r = np.sqrt(2.0 * abs(eta) / (1.0 + abs(eta)))
    return 0.5 * (1.0 - r), 0.5 * (1.0 + r)


def qubit_dmin_closed_form(p: float, eta: float) -> float:
    """Swap: ``sqrt(2 - 2 sqrt(2p(1-p)) sqrt(1-eta))``; identity: ``sqrt(2 - sqrt2 sqrt(1+eta))``.

    Both are evaluated as ``d^2 = 2 (1 - c^2)/(1 + c)`` with ``c`` the
    matching weight and ``1 - c^2`` written as a sum of non-negative terms.
    The literal form cancels to zero when ``p`` sits next to 1/2.
    """
    identity, swap = _regime_weights(p, eta)
    if permutation_regime(p, eta) is Regime.SWAP:
        delta = 1.0 - 2.0 * p
        c, deficit = swap, 0.5 * (1.0 + eta) + 0.5 * delta * delta * (1.0 - eta)
    else:
        c, deficit = identity, 0.5 * (1.0 - eta)
    return float(np.sqrt(2.0 * deficit / (1.0 + c)))


@dataclass(frozen=True)
class GridRow:
    p: float
    eta: float
    d_min: float
    regime: Regime


def grid_axes(p_steps: int, eta_steps: int, degeneracy_tol: float = DEGENERACY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Sample points ``p_i = (i + 1)/(p_steps + 1)`` and ``eta`` evenly in ``[-1, 1]``.

    A ``p`` that falls inside the excluded window ``|p - 1/2| <= tol`` is moved
    to the nearest point ``1/2 -+ 2 tol`` outside it.
    """
    if p_steps < 2 or eta_steps < 2:
        raise ValueError("p_steps and eta_steps must be at least 2")
    ps = np.arange(1, p_steps + 1) / (p_steps + 1)
    inside = np.abs(ps - 0.5) <= degeneracy_tol
    ps[inside] = np.where(ps[inside] <= 0.5, 0.5 - 2 * degeneracy_tol, 0.5 + 2 * degeneracy_tol)
    return ps, np.linspace(-1.0, 1.0, eta_steps)


def figure1_grid(p_steps: int, eta_steps: int) -> Iterator[GridRow]:
    """Row-major rows (``p`` outer, ``eta`` inner) of the closed-form spectral distance."""
    ps, etas = grid_axes(p_steps, eta_steps)
    for p in ps:
        for eta in etas:
            yield GridRow(float(p), float(eta), qubit_dmin_closed_form(p, eta), permutation_regime(p, eta))


@dataclass(frozen=True)
class BlochVector:
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = self.x**2 + self.y**2 + self.z**2
        if abs(n - 1.0) > 1e-10:
            raise ValueError(f"Bloch vector has squared norm {n}")

    @classmethod
    def normalized(cls, v) -> "BlochVector":
        v = np.asarray(v, dtype=float)
        v = v / np.linalg.norm(v)
        return cls(*map(float, v))

    @classmethod
    def from_state(cls, psi) -> "BlochVector":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        a, b = psi
        return cls.normalized([2 * (np.conj(a) * b).real, 2 * (np.conj(a) * b).imag, abs(a) ** 2 - abs(b) ** 2])

    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def state(self) -> np.ndarray:
        """Spin-1/2 state ``(cos(t/2), e^{i f} sin(t/2))`` pointing along this vector."""
        theta = np.arccos(np.clip(self.z, -1.0, 1.0))
        phi = np.arctan2(self.y, self.x)
        return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _triangle_solid_angle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    num = float(np.dot(a, np.cross(b, c)))
    den = 1.0 + float(np.dot(a, b) + np.dot(b, c) + np.dot(c, a))
    return 2.0 * float(np.arctan2(num, den))


def solid_angle(polygon: Sequence[BlochVector], antipodal_tol: float = 1e-12) -> float:
    """Signed solid angle of the closed geodesic polygon, in ``(-2pi, 2pi]``.

    Positive for counter-clockwise vertex order seen from outside the sphere.
    The polygon is fanned into triangles from one vertex that is antipodal to
    no other vertex.
    """
    pts = [v.array() if isinstance(v, BlochVector) else BlochVector.normalized(v).array() for v in polygon]
    n = len(pts)
    if n < 3:
        raise ValueError("a polygon needs at least three vertices")
    for i in range(n):
        if np.dot(pts[i], pts[(i + 1) % n]) <= -1.0 + antipodal_tol:
            raise AntipodalVertices(f"vertices {i} and {(i + 1) % n} are antipodal", index=i)
    for shift in range(n):
        apex = pts[shift]
        if all(np.dot(apex, q) > -1.0 + antipodal_tol for q in pts):
            break
    else:
        raise AntipodalVertices("every vertex is antipodal to some other vertex")
    ring = pts[shift:] + pts[:shift]
    omega = sum(_triangle_solid_angle(ring[0], ring[i], ring[i + 1]) for i in range(1, n - 1))
    omega = float(np.mod(omega + 2 * np.pi, 4 * np.pi) - 2 * np.pi)
    return 2 * np.pi if omega <= -2 * np.pi else omega


def qubit_matched_path(seq: Sequence[DensityOperator], degeneracy_tol: float = DEGENERACY_TOL) -> tuple[list[int], float]:
    """Index path from ``k_1 = 0`` through the per-step optimal permutations, and its phase."""
    steps = spectral_steps(seq, degeneracy_tol)
    path = matched_paths(steps)[0]
    vecs = [seq[a].vectors[:, k] for a, k in enumerate(path)]
    return path, float(np.angle(bargmann_invariant(vecs)))


def qubit_trace_u_closed_form(seq: Sequence[DensityOperator], degeneracy_tol: float = DEGENERACY_TOL) -> complex:
    """``2 |<e_{1;0}|e_{n;l}>| cos(gamma)`` along the matched path from ``k_1 = 0``."""
    if len(seq) < 3:
        raise ValueError("the qubit trace formula needs n >= 3 states")
    for a, rho in enumerate(seq):
        if rho.dim != 2 or rho.rank != 2:
            raise DimensionMismatch(f"state {a} is not a full-rank qubit state", step=a)
    path, gamma = qubit_matched_path(seq, degeneracy_tol)
    first = seq[0].vectors[:, 0]
    last = seq[-1].vectors[:, path[-1]]
    return complex(2.0 * abs(np.vdot(first, last)) * np.cos(gamma))


def bloch_sequence(vertices: Sequence[BlochVector], p: float) -> list[DensityOperator]:
    """Isospectral qubit states whose weight-``p`` eigenvector points along each vertex.

    The other eigenvector is the antipodal state. With ``p > 1/2`` the vertex
    state is eigen-index 0.
    """
    _check_p(p)
    seq = []
    for v in vertices:
        up = v.state()
        down = np.array([-np.conj(up[1]), np.conj(up[0])])
        seq.append(DensityOperator.from_spectrum([p, 1.0 - p], np.column_stack([up, down])))
    return seq

"""Spectral distance, parallelity and holonomy.

Here the decomposition freedom is cut down to reordering eigenvectors and
rephasing each one. Two non-degenerate states are compared through the
assignment weights ``w_kl = sqrt(q_k p_l) |<f_k|e_l>|``. The best reordering
is the maximum-weight perfect matching. Along a sequence, each step
contributes a connection unitary with entries
``Q_kl exp(i arg <e'_k|e_l>)``, where ``Q`` is that step's optimal
permutation.

Permutations are stored as index maps: ``perm.map[l] = k`` means ``Q_kl = 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .bures import HolonomyResult, default_phase_tol, phase_of
from .ensemble import Decomposition, DensityOperator, require_same_rank
from .errors import DegenerateSpectrum, DimensionMismatch, RankMismatch, ZeroOverlapOnMatch

DEGENERACY_TOL = 1e-9
TIE_TOL = 1e-12
ZERO_OVERLAP_TOL = 1e-12


def wrap_phase(x):
    """Map angles into ``(-pi, pi]``."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class Permutation:
    map: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(i) for i in self.map)
        if sorted(m) != list(range(len(m))):
            raise ValueError(f"{m} is not a permutation")
        object.__setattr__(self, "map", m)

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls(tuple(range(k)))

    @property
    def size(self) -> int:
        return len(self.map)

    def matrix(self) -> np.ndarray:
        q = np.zeros((self.size, self.size))
        q[list(self.map), list(range(self.size))] = 1.0
        return q

    def compose(self, first: "Permutation") -> "Permutation":
        """``self after first``: the map ``l -> self.map[first.map[l]]``."""
        return Permutation(tuple(self.map[j] for j in first.map))

    def is_identity(self) -> bool:
        return self.map == tuple(range(self.size))

    def __iter__(self):
        return iter(self.map)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """A point of the restricted fibre over a non-degenerate state.

    ``phases[k]`` rephases eigenvector ``k`` of ``state``; ``order[l]`` names
    the eigen-index placed at position ``l`` of the decomposition.
    """

    state: DensityOperator
    phases: np.ndarray
    order: Permutation

    @property
    def probs(self) -> np.ndarray:
        return self.state.probs

    @property
    def vectors(self) -> np.ndarray:
        return self.state.vectors

    def columns(self) -> np.ndarray:
        """The ordered sub-normalized vectors ``sqrt(p_k) |e_k> exp(i theta_k)``."""
        cols = self.state.spectral_columns() * np.exp(1j * self.phases)
        return cols[:, list(self.order.map)]

    def to_decomposition(self) -> Decomposition:
        return Decomposition(self.columns())


def check_nondegenerate(rho: DensityOperator, tol: float = DEGENERACY_TOL, step: Optional[int] = None) -> None:
    if rho.rank < 2:
        return
    gaps = -np.diff(rho.probs)
    j = int(np.argmin(gaps))
    if gaps[j] <= tol:
        details = {"gap": float(gaps[j]), "index": j, "eigenvalues": rho.probs.tolist(), "tol": tol}
        where = ""
        if step is not None:
            details["step"] = step
            where = f"state {step}: "
        raise DegenerateSpectrum(
            f"{where}eigenvalues {j} and {j + 1} differ by {gaps[j]:.3e} <= {tol:.1e}", **details
        )


def spectral_decomposition(rho: DensityOperator, phases=None, degeneracy_tol: float = DEGENERACY_TOL) -> SpectralDecomposition:
    check_nondegenerate(rho, degeneracy_tol)
    theta = np.zeros(rho.rank) if phases is None else np.asarray(phases, dtype=float).ravel()
    if theta.size != rho.rank:
        raise DimensionMismatch(f"{theta.size} phases for rank {rho.rank}", phases=theta.size, rank=rho.rank)
    return SpectralDecomposition(state=rho, phases=wrap_phase(theta), order=Permutation.identity(rho.rank))


def assignment_weights(rho: DensityOperator, sigma: DensityOperator) -> np.ndarray:
    """``w_kl = sqrt(q_k p_l) |<f_k|e_l>|``; rows index ``sigma``, columns ``rho``."""
    require_same_rank(rho, sigma)
    return np.abs(sigma.spectral_columns().conj().T @ rho.spectral_columns())


def max_weight_assignment(w: np.ndarray, tie_tol: float = TIE_TOL) -> tuple[Permutation, float]:
    """Maximum-weight perfect matching on a square weight matrix.

    Returns the lexicographically smallest column-to-row map whose weight is
    within ``tie_tol`` of the optimum.
    """
    w = np.asarray(w, dtype=float)
    k = w.shape[0]
    rows, cols = linear_sum_assignment(w, maximize=True)
    best = float(w[rows, cols].sum())

    chosen: list[int] = []
    used: set[int] = set()
    fixed = 0.0
    for l in range(k):
        rest_cols = list(range(l + 1, k))
        for r in range(k):
            if r in used:
                continue
            rest_rows = [i for i in range(k) if i not in used and i != r]
            tail = 0.0
            if rest_cols:
                sub = w[np.ix_(rest_rows, rest_cols)]
                rr, cc = linear_sum_assignment(sub, maximize=True)
                tail = float(sub[rr, cc].sum())
            if fixed + w[r, l] + tail >= best - tie_tol:
                chosen.append(r)
                used.add(r)
                fixed += w[r, l]
                break
    perm = Permutation(tuple(chosen))
    return perm, float(w[list(perm.map), range(k)].sum())


def exhaustive_assignment(w: np.ndarray, tie_tol: float = TIE_TOL) -> tuple[Permutation, float]:
    """Enumerate all of ``S_K``; same contract as :func:`max_weight_assignment`."""
    w = np.asarray(w, dtype=float)
    k = w.shape[0]
    cols = np.arange(k)
    scores = [(float(w[list(p), cols].sum()), p) for p in itertools.permutations(range(k))]
    top = max(s for s, _ in scores)
    for s, p in scores:  # itertools yields lexicographic order
        if s >= top - tie_tol:
            return Permutation(p), s
    raise AssertionError("unreachable")


def optimal_permutation(
    rho: DensityOperator,
    sigma: DensityOperator,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> tuple[Permutation, float]:
    """Permutation maximizing ``sum_kl sqrt(q_k p_l) |<f_k|e_l>| Q_kl`` and its weight."""
    require_same_rank(rho, sigma)
    check_nondegenerate(rho, degeneracy_tol)
    check_nondegenerate(sigma, degeneracy_tol)
    return max_weight_assignment(assignment_weights(rho, sigma))


def spectral_distance(rho: DensityOperator, sigma: DensityOperator, degeneracy_tol: float = DEGENERACY_TOL) -> float:
    """Minimal distance over spectral decompositions, equal to ``sqrt(2 - 2 w_max)``.

    Evaluated as the norm of the difference of the matched, phase-aligned
    columns. Near zero distance this keeps full precision, where the square
    root of ``2 - 2 w_max`` would turn rounding into errors of order 1e-8.
    """
    perm, _ = optimal_permutation(rho, sigma, degeneracy_tol)
    a = rho.spectral_columns()
    b = sigma.spectral_columns()[:, list(perm.map)]
    z = np.einsum("dk,dk->k", b.conj(), a)
    aligned = b * np.exp(1j * np.angle(z))
    return float(np.linalg.norm(aligned - a))


def _matched_overlaps(rho: DensityOperator, sigma: DensityOperator, perm: Permutation, step: Optional[int] = None) -> np.ndarray:
    """``<f_{Q l}|e_l>`` for every column ``l``; raises if one vanishes."""
    ov = sigma.vectors.conj().T @ rho.vectors
    z = ov[list(perm.map), range(perm.size)]
    bad = np.flatnonzero(np.abs(z) <= ZERO_OVERLAP_TOL)
    if bad.size:
        l = int(bad[0])
        details = {"column": l, "row": perm.map[l], "modulus": float(abs(z[l]))}
        where = ""
        if step is not None:
            details["step"] = step
            where = f"step {step} -> {step + 1}: "
        raise ZeroOverlapOnMatch(f"{where}matched overlap <f_{perm.map[l]}|e_{l}> vanishes", **details)
    return z


def parallel_spectral(
    b_rho: SpectralDecomposition,
    sigma: DensityOperator,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> SpectralDecomposition:
    """The spectral decomposition of ``sigma`` parallel to ``b_rho``.

    Position ``l`` receives eigenvector ``k = Q(l)`` of ``sigma`` with phase
    ``theta_l + arg <f_k|e_l>``.
    """
    rho = b_rho.state
    perm, _ = optimal_permutation(rho, sigma, degeneracy_tol)
    z = _matched_overlaps(rho, sigma, perm)
    phases = np.zeros(sigma.rank)
    phases[list(perm.map)] = b_rho.phases + np.angle(z)
    order = perm.compose(b_rho.order)
    return SpectralDecomposition(state=sigma, phases=wrap_phase(phases), order=order)


def bargmann_invariant(vectors) -> complex:
    """``<v_1|v_n><v_n|v_{n-1}> ... <v_2|v_1>`` for an ordered list of vectors."""
    vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if len(vs) < 2:
        raise ValueError("need at least two vectors")
    dim = vs[0].size
    if any(v.size != dim for v in vs):
        raise DimensionMismatch("vectors have different dimensions")
    out = complex(np.vdot(vs[0], vs[-1]))
    for a in range(len(vs) - 1, 0, -1):
        out *= complex(np.vdot(vs[a], vs[a - 1]))
    return out


@dataclass(frozen=True)
class SpectralStep:
    """Connection data for the transition from state ``index`` to ``index + 1``."""

    index: int
    permutation: Permutation
    weight: float
    matched_phases: np.ndarray
    connection: np.ndarray = field(repr=False)


def _check_sequence(seq: Sequence[DensityOperator], degeneracy_tol: float) -> None:
    if len(seq) < 2:
        raise ValueError("a holonomy needs at least two states")
    for a, rho in enumerate(seq):
        if rho.dim != seq[0].dim:
            raise DimensionMismatch(f"state {a} has dimension {rho.dim}, expected {seq[0].dim}", step=a)
        if rho.rank != seq[0].rank:
            raise RankMismatch(f"state {a} has rank {rho.rank}, expected {seq[0].rank}", step=a)
        check_nondegenerate(rho, degeneracy_tol, step=a)


def spectral_steps(seq: Sequence[DensityOperator], degeneracy_tol: float = DEGENERACY_TOL) -> list[SpectralStep]:
    _check_sequence(seq, degeneracy_tol)
    steps = []
    for a in range(len(seq) - 1):
        rho, sigma = seq[a], seq[a + 1]
        perm, weight = max_weight_assignment(assignment_weights(rho, sigma))
        z = _matched_overlaps(rho, sigma, perm, step=a)
        phases = np.angle(z)
        conn = perm.matrix().astype(complex)
        conn[list(perm.map), range(perm.size)] = np.exp(1j * phases)
        steps.append(SpectralStep(index=a, permutation=perm, weight=weight, matched_phases=phases, connection=conn))
    return steps


@dataclass(frozen=True, eq=False)
class SpectralHolonomy(HolonomyResult):
    total_permutation: Optional[Permutation] = None


def spectral_holonomy(
    seq: Sequence[DensityOperator],
    degeneracy_tol: float = DEGENERACY_TOL,
    phase_tol: Optional[float] = None,
) -> SpectralHolonomy:
    """Holonomy of the permutation-and-phase connection along ``seq``.

    The per-step connection unitaries are lifted to operators
    ``sum_kl |e_{a+1;k}> C_kl <e_{a;l}|`` and multiplied in order.
    """
    steps = spectral_steps(seq, degeneracy_tol)
    u = seq[0].support_projector()
    total = Permutation.identity(seq[0].rank)
    for step in steps:
        lifted = seq[step.index + 1].vectors @ step.connection @ seq[step.index].vectors.conj().T
        u = lifted @ u
        total = step.permutation.compose(total)
    k = seq[0].rank
    tol = default_phase_tol(k) if phase_tol is None else phase_tol
    tr = complex(np.trace(u))
    return SpectralHolonomy(
        u=u, trace=tr, phase=phase_of(tr, tol), phase_tol=tol, steps=steps, total_permutation=total
    )


def matched_paths(steps: Sequence[SpectralStep]) -> list[list[int]]:
    """Eigen-index path ``(k_1, ..., k_n)`` for each starting index ``k_1``."""
    k = steps[0].permutation.size
    paths = []
    for start in range(k):
        path = [start]
        for step in steps:
            path.append(step.permutation.map[path[-1]])
        paths.append(path)
    return paths


def trace_closed_form(seq: Sequence[DensityOperator], degeneracy_tol: float = DEGENERACY_TOL) -> complex:
    """``sum_{k_1} |<e_{1;k_1}|e_{n;k_n}>| exp(i arg Delta(e_{1;k_1}, ..., e_{n;k_n}))``.

    Each term follows the matched path that starts at ``k_1``.
    """
    steps = spectral_steps(seq, degeneracy_tol)
    total = 0j
    for path in matched_paths(steps):
        vecs = [seq[a].vectors[:, k] for a, k in enumerate(path)]
        delta = bargmann_invariant(vecs)
        total += abs(np.vdot(vecs[0], vecs[-1])) * np.exp(1j * np.angle(delta))
    return total


def spectral_gp(
    seq: Sequence[DensityOperator],
    phase_tol: Optional[float] = None,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> Optional[float]:
    """Phase of ``Tr U`` in ``(-pi, pi]``, or ``None`` when ``|Tr U| <= phase_tol``."""
    return spectral_holonomy(seq, degeneracy_tol, phase_tol).phase

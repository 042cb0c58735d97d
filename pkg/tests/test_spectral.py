import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parallelity import bures, spectral
from parallelity.ensemble import DensityOperator, decomposition_distance, project
from parallelity.errors import DegenerateSpectrum, RankMismatch, ZeroOverlapOnMatch
from parallelity.qubit import QubitBasisPair, qubit_pair_states
from parallelity.sampling import commuting_partner, haar_unitary, random_density, random_state_vector

from conftest import angle_diff, diag_state, max_abs

GAP = 1e-3
# sqrt(2 - 2 (sqrt(0.42) + sqrt(0.12))) and sqrt(2 - sqrt(3)) via mpmath
D_COMMUTING_SPECTRAL = 0.10503112534328591
D_QUBIT_SWAP = 0.5176380902050415


def nondegenerate(d, k, rng):
    return random_density(d, k, rng, min_gap=GAP)


def rephased(rho: DensityOperator, rng) -> DensityOperator:
    chi = rng.uniform(-np.pi, np.pi, rho.rank)
    return DensityOperator.from_spectrum(rho.probs, rho.vectors * np.exp(1j * chi))


class TestPermutation:
    def test_matrix_convention(self):
        q = spectral.Permutation((2, 0, 1)).matrix()
        # Q_kl = 1 iff k = map(l)
        assert q[2, 0] == q[0, 1] == q[1, 2] == 1
        assert q.sum() == 3

    def test_compose(self):
        a, b = spectral.Permutation((1, 2, 0)), spectral.Permutation((2, 0, 1))
        np.testing.assert_array_equal(a.compose(b).matrix(), a.matrix() @ b.matrix())

    def test_rejects_non_bijection(self):
        with pytest.raises(ValueError):
            spectral.Permutation((0, 0, 1))


class TestSpectralDecomposition:
    def test_diagonal(self):
        b = spectral.spectral_decomposition(diag_state(0.7, 0.3), [0.0, 0.0])
        np.testing.assert_allclose(b.probs, [0.7, 0.3])
        np.testing.assert_allclose(b.vectors, np.eye(2), atol=1e-15)

    def test_degenerate(self):
        with pytest.raises(DegenerateSpectrum) as info:
            spectral.spectral_decomposition(diag_state(0.5, 0.5))
        assert info.value.details["gap"] == pytest.approx(0.0)

    def test_roundtrip_with_phases(self, rng):
        rho = nondegenerate(3, 3, rng)
        b = spectral.spectral_decomposition(rho, [0.1, -0.2, 3.0])
        assert max_abs(project(b.to_decomposition()).matrix - rho.matrix) < 1e-9

    def test_phases_wrapped(self, rng):
        b = spectral.spectral_decomposition(nondegenerate(2, 2, rng), [np.pi, -np.pi + 0.0])
        assert np.all(b.phases > -np.pi) and np.all(b.phases <= np.pi)
        assert b.phases[1] == pytest.approx(np.pi)


class TestAssignment:
    def test_self(self, rng):
        rho = nondegenerate(4, 3, rng)
        perm, weight = spectral.optimal_permutation(rho, rho)
        assert perm.is_identity()
        assert weight == pytest.approx(1.0, abs=1e-12)

    def test_qubit_swap_example(self):
        rho, sigma = qubit_pair_states(0.3, QubitBasisPair(alpha=np.sqrt(0.5), phi=np.pi))
        perm, _ = spectral.optimal_permutation(rho, sigma)
        assert perm.map == (1, 0)

    def test_tie_resolves_lexicographically(self):
        w = np.ones((3, 3))
        assert spectral.max_weight_assignment(w)[0].map == (0, 1, 2)
        w = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])
        # both 3-cycles tie; (1, 2, 0) < (2, 0, 1)
        assert spectral.max_weight_assignment(w)[0].map == (1, 2, 0)

    def test_exhaustive_oracle_is_enumeration(self):
        w = np.array([[0.1, 0.9], [0.8, 0.2]])
        perm, weight = spectral.exhaustive_assignment(w)
        assert perm.map == (1, 0) and weight == pytest.approx(1.7)

    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_matches_enumeration_random_pair(self, rng, k):
        rho, sigma = nondegenerate(k + 1, k, rng), nondegenerate(k + 1, k, rng)
        w = spectral.assignment_weights(rho, sigma)
        best = max(sum(w[p[l], l] for l in range(k)) for p in itertools.permutations(range(k)))
        perm, weight = spectral.optimal_permutation(rho, sigma)
        assert weight == pytest.approx(best, abs=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), k=st.integers(1, 6), integer=st.booleans())
    def test_optimality_property(self, seed, k, integer):
        rng = np.random.default_rng(seed)
        # small-integer weights make ties common and exercise the tie rule
        w = rng.integers(0, 3, (k, k)).astype(float) if integer else rng.random((k, k))
        fast, exact = spectral.max_weight_assignment(w), spectral.exhaustive_assignment(w)
        assert fast[0] == exact[0]
        assert fast[1] == pytest.approx(exact[1], abs=1e-12)

    def test_rank_mismatch(self, rng):
        with pytest.raises(RankMismatch):
            spectral.optimal_permutation(nondegenerate(3, 2, rng), nondegenerate(3, 3, rng))


class TestSpectralDistance:
    def test_self(self, rng):
        rho = nondegenerate(3, 3, rng)
        assert spectral.spectral_distance(rho, rho) == pytest.approx(0.0, abs=1e-6)

    def test_commuting_equals_bures(self):
        rho, sigma = diag_state(0.7, 0.3), diag_state(0.6, 0.4)
        d = spectral.spectral_distance(rho, sigma)
        assert d == pytest.approx(D_COMMUTING_SPECTRAL, abs=1e-12)
        assert d == pytest.approx(bures.bures_distance(rho, sigma), abs=1e-9)

    def test_qubit_swap_closed_form(self):
        rho, sigma = qubit_pair_states(0.25, QubitBasisPair.from_eta(-1.0))
        assert spectral.spectral_distance(rho, sigma) == pytest.approx(D_QUBIT_SWAP, abs=1e-12)

    def test_qubit_swap_brute_force(self):
        rho, sigma = qubit_pair_states(0.25, QubitBasisPair.from_eta(-1.0))
        a = rho.spectral_columns()
        b = sigma.spectral_columns()
        grid = np.linspace(-np.pi, np.pi, 721)
        best = np.inf
        for perm in itertools.permutations(range(2)):
            bp = b[:, list(perm)]
            for t0 in grid:
                for t1 in grid[::4]:
                    d = np.linalg.norm(bp * np.exp(1j * np.array([t0, t1])) - a)
                    best = min(best, d)
        assert best == pytest.approx(D_QUBIT_SWAP, abs=1e-4)
        assert best >= D_QUBIT_SWAP - 1e-12

    def test_degenerate_rejected(self):
        with pytest.raises(DegenerateSpectrum):
            spectral.spectral_distance(diag_state(0.7, 0.3), diag_state(0.5, 0.5))

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5), data=st.data())
    def test_dominates_bures(self, seed, d, data):
        k = data.draw(st.integers(1, min(d, 4)))
        rng = np.random.default_rng(seed)
        rho, sigma = nondegenerate(d, k, rng), nondegenerate(d, k, rng)
        assert spectral.spectral_distance(rho, sigma) >= bures.bures_distance(rho, sigma) - 1e-10

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5))
    def test_commuting_equality(self, seed, d):
        rng = np.random.default_rng(seed)
        rho = nondegenerate(d, d, rng)
        sigma = commuting_partner(rho, rng, min_gap=GAP)
        assert abs(spectral.spectral_distance(rho, sigma) - bures.bures_distance(rho, sigma)) < 1e-9

    def test_pure_equality(self, rng):
        a = DensityOperator.pure(random_state_vector(3, rng))
        b = DensityOperator.pure(random_state_vector(3, rng))
        assert abs(spectral.spectral_distance(a, b) - bures.bures_distance(a, b)) < 1e-9


class TestParallelSpectral:
    def test_self(self, rng):
        rho = nondegenerate(3, 3, rng)
        b = spectral.spectral_decomposition(rho)
        par = spectral.parallel_spectral(b, rho)
        assert max_abs(par.columns() - b.columns()) < 1e-12

    def test_identity_permutation_phase_shift(self, rng):
        rho = nondegenerate(2, 2, rng)
        sigma = DensityOperator.from_matrix(0.9 * rho.matrix + 0.1 * nondegenerate(2, 2, rng).matrix)
        theta = np.array([0.3, -1.1])
        par = spectral.parallel_spectral(spectral.spectral_decomposition(rho, theta), sigma)
        assert par.order.is_identity()
        overlaps = np.einsum("dk,dk->k", sigma.vectors.conj(), rho.vectors)
        expected = spectral.wrap_phase(theta + np.angle(overlaps))
        np.testing.assert_allclose(par.phases, expected, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 5), data=st.data())
    def test_realizes_spectral_distance(self, seed, d, data):
        k = data.draw(st.integers(1, min(d, 4)))
        rng = np.random.default_rng(seed)
        rho, sigma = nondegenerate(d, k, rng), nondegenerate(d, k, rng)
        b_rho = spectral.spectral_decomposition(rho, rng.uniform(-np.pi, np.pi, k))
        par = spectral.parallel_spectral(b_rho, sigma)
        got = decomposition_distance(b_rho.to_decomposition(), par.to_decomposition())
        assert abs(got - spectral.spectral_distance(rho, sigma)) < 1e-10
        assert max_abs(project(par.to_decomposition()).matrix - sigma.matrix) < 1e-9

    def test_zero_matched_overlap(self):
        rho = DensityOperator.from_spectrum([0.7, 0.3], np.eye(3)[:, :2])
        sigma = DensityOperator.from_spectrum([0.7, 0.3], np.eye(3)[:, [0, 2]])
        with pytest.raises(ZeroOverlapOnMatch):
            spectral.parallel_spectral(spectral.spectral_decomposition(rho), sigma)


class TestBargmann:
    def test_equal_vectors(self, rng):
        v = random_state_vector(3, rng)
        assert spectral.bargmann_invariant([v, v, v]) == pytest.approx(1.0)

    def test_gauge_invariant(self, rng):
        vs = [random_state_vector(3, rng) for _ in range(5)]
        ws = [np.exp(1j * rng.uniform(-np.pi, np.pi)) * v for v in vs]
        assert abs(spectral.bargmann_invariant(vs) - spectral.bargmann_invariant(ws)) < 1e-12

    def test_octant(self):
        s = 1 / np.sqrt(2)
        z, x, y = np.array([1, 0]), np.array([s, s]), np.array([s, 1j * s])
        assert np.angle(spectral.bargmann_invariant([z, x, y])) == pytest.approx(-np.pi / 4, abs=1e-12)

    def test_explicit_product(self, rng):
        vs = [random_state_vector(2, rng) for _ in range(3)]
        expected = np.vdot(vs[0], vs[2]) * np.vdot(vs[2], vs[1]) * np.vdot(vs[1], vs[0])
        assert spectral.bargmann_invariant(vs) == pytest.approx(expected, abs=1e-15)


class TestSpectralHolonomy:
    def test_constant_sequence(self, rng):
        rho = nondegenerate(4, 3, rng)
        h = spectral.spectral_holonomy([rho, rho, rho])
        assert max_abs(h.u - rho.support_projector()) < 1e-8
        assert h.trace == pytest.approx(3.0, abs=1e-9)
        assert spectral.spectral_gp([rho, rho, rho]) == pytest.approx(0.0, abs=1e-12)

    def test_pure_states(self, rng):
        psis = [random_state_vector(3, rng) for _ in range(5)]
        h = spectral.spectral_holonomy([DensityOperator.pure(p) for p in psis])
        assert angle_diff(h.phase, np.angle(spectral.bargmann_invariant(psis))) < 1e-9

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), d=st.integers(2, 4), n=st.integers(2, 6), data=st.data())
    def test_structure(self, seed, d, n, data):
        k = data.draw(st.integers(1, d))
        rng = np.random.default_rng(seed)
        seq = [nondegenerate(d, k, rng) for _ in range(n)]
        h = spectral.spectral_holonomy(seq)
        assert max_abs(h.u.conj().T @ h.u - seq[0].support_projector()) < 1e-8
        assert abs(h.trace - spectral.trace_closed_form(seq)) < 1e-9
        assert abs(h.trace) <= k + 1e-9
        # gauge invariance of Tr U
        h2 = spectral.spectral_holonomy([rephased(r, rng) for r in seq])
        assert abs(h.trace - h2.trace) < 1e-9
        # phase additivity along each matched path
        steps = h.steps
        for path in spectral.matched_paths(steps):
            acc = sum(s.matched_phases[l] for s, l in zip(steps, path[:-1]))
            prod = np.prod([np.vdot(seq[a + 1].vectors[:, path[a + 1]], seq[a].vectors[:, path[a]]) for a in range(n - 1)])
            assert angle_diff(acc, np.angle(prod)) < 1e-10
        assert h.total_permutation.map == tuple(p[-1] for p in spectral.matched_paths(steps))

    def test_step_indexed_degeneracy(self, rng):
        seq = [nondegenerate(2, 2, rng), diag_state(0.5, 0.5), nondegenerate(2, 2, rng)]
        with pytest.raises(DegenerateSpectrum) as info:
            spectral.spectral_holonomy(seq)
        assert info.value.details["step"] == 1

    def test_step_indexed_zero_overlap(self):
        a = DensityOperator.from_spectrum([0.7, 0.3], np.eye(3)[:, :2])
        b = DensityOperator.from_spectrum([0.7, 0.3], np.eye(3)[:, [0, 2]])
        with pytest.raises(ZeroOverlapOnMatch) as info:
            spectral.spectral_holonomy([a, a, b])
        assert info.value.details["step"] == 1

    def test_undefined_phase_when_trace_vanishes(self):
        a = DensityOperator.pure([1, 0])
        b = DensityOperator.pure([1, 1])
        c = DensityOperator.pure([0, 1])
        h = spectral.spectral_holonomy([a, b, c])
        assert abs(h.trace) < 1e-15
        assert h.phase is None
        assert spectral.spectral_gp([a, b, c]) is None

    def test_qutrit_phase_generic(self):
        rng = np.random.default_rng(7)
        seq = [nondegenerate(3, 3, rng) for _ in range(4)]
        phi = spectral.spectral_gp(seq)
        assert phi is not None
        assert min(abs(phi), abs(abs(phi) - np.pi)) > 1e-3

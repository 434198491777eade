import numpy as np
import pytest

from birkhoffopt import (Permutation, ScoreMatrix, classical_decompose,
                         power_score, random_doubly_stochastic,
                         random_identifying_score,
                         random_interior_doubly_stochastic, reconstruct,
                         score_decompose)
from oracles import perms_by_score_desc, random_inpolytope_direction, \
    recursion_decompose


class TestScoreDecompose:
    def test_permutation_input_single_term(self):
        rng = np.random.default_rng(0)
        p = Permutation.random(5, rng)
        d = score_decompose(p.matrix(), random_identifying_score(5, rng))
        assert len(d) == 1
        assert d.terms[0].alpha == 1.0
        assert d.terms[0].perm == p
        assert d.residual_norm == 0.0

    def test_hand_2x2_case(self):
        d = score_decompose(np.array([[0.3, 0.7], [0.7, 0.3]]), power_score(2))
        assert [(t.alpha, t.perm) for t in d.terms] == [
            (0.3, Permutation([0, 1])), (0.7, Permutation([1, 0]))]
        assert d.terms[0].argmin_cell == (0, 0)
        assert d.terms[1].argmin_cell == (0, 1)

    def test_one_by_one(self):
        d = score_decompose(np.array([[1.0]]), power_score(1))
        assert len(d) == 1 and d.terms[0].alpha == 1.0

    def test_matches_recursion_oracle_random_score_n4(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            a = random_doubly_stochastic(4, 6, rng)
            s = random_identifying_score(4, rng)
            d = score_decompose(a, s)
            expected, leftover = recursion_decompose(a, perms_by_score_desc(4, s))
            assert np.abs(leftover).max() <= 1e-12
            assert len(d) == len(expected)
            for term, (alpha, perm) in zip(d.terms, expected):
                assert term.perm == perm
                assert term.alpha == pytest.approx(alpha, abs=1e-12)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_matches_recursion_oracle_power_score(self, n):
        # The power score's exact integer enumeration pins the full order,
        # so the produced sequence must agree term for term.
        rng = np.random.default_rng(n)
        ordered = perms_by_score_desc(n)  # exact integer scores
        for _ in range(10):
            a = random_doubly_stochastic(n, n + 2, rng)
            d = score_decompose(a, power_score(n))
            expected, _ = recursion_decompose(a, ordered)
            assert [t.perm for t in d.terms] == [p for _, p in expected]
            got = np.array([t.alpha for t in d.terms])
            want = np.array([alpha for alpha, _ in expected])
            assert np.abs(got - want).max() <= 1e-12

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_invariants_sweep(self, n):
        rng = np.random.default_rng(n + 10)
        for _ in range(20):
            a = random_doubly_stochastic(n, int(rng.integers(1, 2 * n)), rng)
            d = score_decompose(a, random_identifying_score(n, rng))
            assert np.abs(reconstruct(d, n) - a).max() <= 1e-9
            assert abs(d.total_mass - 1.0) <= 1e-9
            assert len(d) <= n * n - n + 1
            assert (d.coefficients > 0).all()
            for (i, j), perm in zip((t.argmin_cell for t in d.terms),
                                    d.permutations):
                assert perm.mapping[i] == j
            sizes = (int((a > 1e-12).sum()),) + d.support_sizes
            assert all(x > y for x, y in zip(sizes, sizes[1:]))
            assert d.support_sizes[-1] == 0

    def test_truncation_takes_prefix(self):
        rng = np.random.default_rng(42)
        a = random_doubly_stochastic(5, 6, rng)
        s = random_identifying_score(5, rng)
        full = score_decompose(a, s)
        part = score_decompose(a, s, max_terms=3)
        assert len(part) == 3
        assert part.terms == full.terms[:3]
        assert part.residual_norm > 1e-9
        assert part.total_mass < 1.0

    def test_truncation_beyond_length_is_full(self):
        rng = np.random.default_rng(43)
        a = random_doubly_stochastic(4, 3, rng)
        s = random_identifying_score(4, rng)
        assert score_decompose(a, s, max_terms=50).terms == score_decompose(a, s).terms

    def test_continuity_probe(self):
        # Term-wise convergence under shrinking in-polytope perturbations:
        # same permutation sequence, coefficient drift bounded by the step.
        # Samples use enough generators to be generic; at non-generic
        # points a perturbation can surface an extra zero-coefficient term.
        rng = np.random.default_rng(7)
        for n in (3, 4, 5):
            a = random_interior_doubly_stochastic(n, 2 * n * n, rng)
            s = random_identifying_score(n, rng)
            base = score_decompose(a, s)
            if base.min_gap < 1e-3:
                continue
            d_dir = random_inpolytope_direction(n, rng)
            drifts = []
            for delta in (1e-4, 1e-5, 1e-6):
                moved = score_decompose(a + delta * d_dir, s)
                assert moved.permutations == base.permutations
                drifts.append(np.abs(moved.coefficients - base.coefficients).max())
                assert drifts[-1] <= 50 * delta
            assert drifts[0] > drifts[1] > drifts[2]

    def test_warns_on_non_identifying_score(self):
        s = ScoreMatrix(np.ones((3, 3)), identifying_assumed=False)
        with pytest.warns(UserWarning, match="identifying"):
            score_decompose(np.eye(3), s)

    def test_min_gap_single_term_is_inf(self):
        d = score_decompose(np.eye(3), power_score(3))
        assert d.min_gap == np.inf


class TestClassicalDecompose:
    def test_permutation_single_term(self):
        rng = np.random.default_rng(0)
        p = Permutation.random(4, rng)
        d = classical_decompose(p.matrix(), rng)
        assert len(d) == 1 and d.terms[0].perm == p

    def test_uniform_3x3(self):
        # A uniform matrix forces three disjoint permutations of weight 1/3.
        d = classical_decompose(np.full((3, 3), 1.0 / 3.0), np.random.default_rng(1))
        assert len(d) == 3
        assert np.allclose(d.coefficients, 1.0 / 3.0, atol=1e-15)

    def test_reconstruction_n5(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            a = random_doubly_stochastic(5, 7, rng)
            d = classical_decompose(a, rng)
            assert np.abs(reconstruct(d, 5) - a).max() <= 1e-10

    def test_differs_from_score_decomposition(self):
        # Different random scores generally pick different matchings; the
        # classical route is not the continuous one.
        rng = np.random.default_rng(3)
        a = random_doubly_stochastic(5, 8, rng)
        seqs = {classical_decompose(a, rng).permutations for _ in range(10)}
        assert len(seqs) > 1


class TestReconstruct:
    def test_identity(self):
        d = score_decompose(np.eye(3), power_score(3))
        assert np.array_equal(reconstruct(d, 3), np.eye(3))

    def test_hand_case(self):
        d = score_decompose(np.array([[0.3, 0.7], [0.7, 0.3]]), power_score(2))
        assert np.allclose(reconstruct(d, 2), [[0.3, 0.7], [0.7, 0.3]], atol=0)

    def test_round_trip_random(self):
        rng = np.random.default_rng(4)
        a = random_doubly_stochastic(6, 9, rng)
        d = score_decompose(a, random_identifying_score(6, rng))
        assert np.abs(reconstruct(d) - a).max() <= 1e-9

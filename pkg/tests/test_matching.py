import numpy as np
import pytest

from birkhoffopt import (NoPerfectMatching, Permutation,
                         max_score_matching, max_weight_matching_dense,
                         power_score, random_doubly_stochastic,
                         random_identifying_score, support_mask)
from oracles import all_permutations, brute_force_matching


class TestMaxScoreMatching:
    def test_identity_only_mask(self):
        s = random_identifying_score(4, np.random.default_rng(0))
        assert max_score_matching(np.eye(4, dtype=bool), s) == Permutation.identity(4)

    def test_n2_full_mask_power_score(self):
        p = max_score_matching(np.ones((2, 2), dtype=bool), power_score(2))
        assert p == Permutation.identity(2)

    def test_n3_full_mask_matches_enumeration(self):
        rng = np.random.default_rng(1)
        mask = np.ones((3, 3), dtype=bool)
        for _ in range(20):
            s = random_identifying_score(3, rng)
            assert max_score_matching(mask, s) == brute_force_matching(mask, s)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_sparse_masks_match_enumeration(self, n):
        # Supports of random doubly stochastic matrices always admit a
        # perfect matching.
        rng = np.random.default_rng(n)
        for _ in range(10):
            a = random_doubly_stochastic(n, int(rng.integers(1, 4)), rng)
            mask = support_mask(a)
            s = random_identifying_score(n, rng)
            got = max_score_matching(mask, s)
            assert got == brute_force_matching(mask, s)
            assert all(mask[i, j] for i, j in enumerate(got.mapping))

    def test_power_score_tie_free_order(self):
        # With the power score ties are impossible, so the result must be
        # the exact brute-force argmax on every feasible mask.
        rng = np.random.default_rng(99)
        for n in (3, 4, 5):
            s = power_score(n)
            for _ in range(10):
                mask = support_mask(random_doubly_stochastic(n, 2, rng))
                assert max_score_matching(mask, s) == brute_force_matching(mask, s)

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        mask = support_mask(random_doubly_stochastic(5, 3, rng))
        s = random_identifying_score(5, rng)
        assert max_score_matching(mask, s) == max_score_matching(mask, s)

    def test_no_perfect_matching(self):
        mask = np.array([[True, False], [True, False]])
        with pytest.raises(NoPerfectMatching):
            max_score_matching(mask, random_identifying_score(2, np.random.default_rng(0)))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            max_score_matching(np.ones((3, 3), dtype=bool),
                               random_identifying_score(2, np.random.default_rng(0)))


class TestMaxWeightMatchingDense:
    def test_zero_matrix_tie_break_identity(self):
        assert max_weight_matching_dense(np.zeros((4, 4))) == Permutation.identity(4)

    def test_large_diagonal(self):
        w = np.eye(5) * 100.0
        assert max_weight_matching_dense(w) == Permutation.identity(5)

    def test_n4_random_matches_enumeration(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            w = rng.normal(size=(4, 4))
            got = max_weight_matching_dense(w)
            best = max(all_permutations(4), key=lambda p: (w * p.matrix()).sum())
            assert got == best

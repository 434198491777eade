import numpy as np
import pytest

from birkhoffopt import (Objective, Permutation, best_term, evaluate, gradient,
                         gradient_of, perturbed_permutation_score, power_score,
                         random_doubly_stochastic, random_identifying_score,
                         random_interior_doubly_stochastic, round_solution)
from oracles import (all_permutations, central_difference_dirdev,
                     random_inpolytope_direction)


def random_objective(n, rng, name="random"):
    """Independent random value per permutation, drawn lazily."""
    values = {}

    def fn(perm):
        if perm not in values:
            values[perm] = float(rng.normal())
        return values[perm]

    return Objective(n, fn, name=name)


def swap_indicator_objective():
    """n=2: f(identity) = 0, f(swap) = 1."""
    return Objective(2, lambda p: float(p != Permutation.identity(2)))


class TestEvaluate:
    def test_vertex_agreement_exact(self):
        rng = np.random.default_rng(0)
        for n in (2, 3, 5):
            f = random_objective(n, rng)
            s = random_identifying_score(n, rng)
            for _ in range(5):
                p = Permutation.random(n, rng)
                assert evaluate(p.matrix(), s, f).value == f(p)
                assert evaluate(p.matrix(), s, f, max_terms=5).value == f(p)

    def test_hand_2x2_case(self):
        ext = evaluate(np.array([[0.3, 0.7], [0.7, 0.3]]), power_score(2),
                       swap_indicator_objective())
        assert ext.value == pytest.approx(0.7, abs=1e-15)

    def test_constant_objective(self):
        rng = np.random.default_rng(1)
        f = Objective(4, lambda p: 2.5)
        s = random_identifying_score(4, rng)
        for _ in range(5):
            a = random_doubly_stochastic(4, 5, rng)
            assert evaluate(a, s, f).value == pytest.approx(2.5, abs=1e-12)

    def test_truncated_value_is_renormalized_convex_combo(self):
        rng = np.random.default_rng(2)
        f = random_objective(6, rng)
        s = random_identifying_score(6, rng)
        a = random_doubly_stochastic(6, 8, rng)
        ext = evaluate(a, s, f, max_terms=3)
        assert len(ext.decomposition) == 3
        lo, hi = min(ext.per_term_f), max(ext.per_term_f)
        assert lo - 1e-12 <= ext.value <= hi + 1e-12
        coeffs = ext.decomposition.coefficients
        assert ext.value == pytest.approx(
            float(np.dot(coeffs, ext.per_term_f)) / coeffs.sum(), abs=1e-15)

    def test_memoization(self):
        rng = np.random.default_rng(3)
        f = random_objective(4, rng)
        s = random_identifying_score(4, rng)
        a = random_doubly_stochastic(4, 6, rng)
        evaluate(a, s, f)
        count = f.raw_evals
        evaluate(a, s, f)
        assert f.raw_evals == count


class TestGradient:
    def test_hand_2x2_directional_derivative(self):
        # On the 2x2 polytope the extension reduces to 1 - A(0,0) for the
        # swap indicator, so moving along I - swap changes it at rate -1.
        a = np.array([[0.4, 0.6], [0.6, 0.4]])
        g = gradient(a, power_score(2), swap_indicator_objective())
        d = np.eye(2) - Permutation([1, 0]).matrix()
        assert float((g * d).sum()) == pytest.approx(-1.0, abs=1e-12)

    def test_constant_objective_zero_derivative(self):
        rng = np.random.default_rng(4)
        f = Objective(4, lambda p: 3.0)
        s = random_identifying_score(4, rng)
        a = random_interior_doubly_stochastic(4, 5, rng)
        g = gradient(a, s, f)
        for _ in range(10):
            d = random_inpolytope_direction(4, rng)
            assert abs((g * d).sum()) <= 1e-9

    @pytest.mark.parametrize("n", [3, 5, 8])
    def test_matches_central_differences(self, n):
        # Differentiability holds almost everywhere, so the sample matrices
        # must be absolutely continuous on the polytope: combinations of
        # too few permutations sit on the measure-zero kink set where some
        # coefficients are exactly zero.  2 n^2 generators span safely.
        rng = np.random.default_rng(n)
        checked = skipped = 0
        for _ in range(6):
            a = random_interior_doubly_stochastic(n, 2 * n * n, rng)
            f = random_objective(n, rng)
            s = random_identifying_score(n, rng)
            ext = evaluate(a, s, f)
            if ext.decomposition.min_gap < 1e-6:
                skipped += 1
                continue
            g = gradient_of(ext)
            for _ in range(10):
                d = random_inpolytope_direction(n, rng)
                analytic = float((g * d).sum())
                fd = central_difference_dirdev(a, s, f, d)
                assert abs(analytic - fd) <= 1e-5 * max(1.0, abs(analytic), abs(fd))
            checked += 1
        assert checked >= 4, f"too many skips ({skipped})"

    def test_truncated_gradient_matches_unnormalized_differences(self):
        # The truncated gradient treats the retained mass as locally
        # constant (exact derivatives of the normalizer are a non-goal),
        # so the reference is the finite difference of the unnormalized
        # truncated sum, scaled by the mass at the base point.
        rng = np.random.default_rng(9)
        n, k = 6, 3
        delta = 1e-6
        for _ in range(5):
            a = random_interior_doubly_stochastic(n, 2 * n * n, rng)
            f = random_objective(n, rng)
            s = random_identifying_score(n, rng)
            ext = evaluate(a, s, f, max_terms=k)
            if ext.decomposition.min_gap < 1e-6:
                continue
            g = gradient_of(ext)
            for _ in range(5):
                d = random_inpolytope_direction(n, rng)
                analytic = float((g * d).sum())
                up = evaluate(a + delta * d, s, f, max_terms=k)
                down = evaluate(a - delta * d, s, f, max_terms=k)
                fd = (up.value * up.mass_divisor
                      - down.value * down.mass_divisor) / (2 * delta)
                fd /= ext.mass_divisor
                assert abs(analytic - fd) <= 1e-5 * max(1.0, abs(analytic), abs(fd))


class TestRounding:
    def test_permutation_input(self):
        rng = np.random.default_rng(5)
        f = random_objective(4, rng)
        s = random_identifying_score(4, rng)
        p = Permutation.random(4, rng)
        assert round_solution(p.matrix(), s, f) == (p, f(p))

    def test_hand_2x2_case(self):
        perm, val = round_solution(np.array([[0.3, 0.7], [0.7, 0.3]]),
                                   power_score(2), swap_indicator_objective())
        assert perm == Permutation.identity(2)
        assert val == 0.0

    @pytest.mark.parametrize("max_terms", [None, 5])
    def test_never_worse_than_extension(self, max_terms):
        rng = np.random.default_rng(6)
        for _ in range(100):
            n = int(rng.integers(2, 9))
            f = random_objective(n, rng)
            s = random_identifying_score(n, rng)
            a = random_doubly_stochastic(n, int(rng.integers(1, 2 * n)), rng)
            ext = evaluate(a, s, f, max_terms=max_terms)
            _, val = best_term(ext)
            assert val <= ext.value + 1e-9


class TestMinimaCorrespondence:
    @pytest.mark.parametrize("n", [3, 4])
    def test_extension_min_equals_vertex_min(self, n):
        rng = np.random.default_rng(n)
        f = random_objective(n, rng)
        s = random_identifying_score(n, rng)
        vertex_min = min(f(p) for p in all_permutations(n))
        sampled = [evaluate(p.matrix(), s, f).value for p in all_permutations(n)]
        for _ in range(200):
            a = random_doubly_stochastic(n, int(rng.integers(1, 3 * n)), rng)
            sampled.append(evaluate(a, s, f).value)
        assert min(sampled) == pytest.approx(vertex_min, abs=1e-9)
        assert min(sampled) >= vertex_min - 1e-9


class TestScoreProximity:
    def test_first_term_and_rounding_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            n = int(rng.integers(2, 8))
            f = random_objective(n, rng)
            p_star = Permutation.random(n, rng)
            s = perturbed_permutation_score(p_star, rng)
            a = random_interior_doubly_stochastic(n, int(rng.integers(1, n + 2)), rng)
            ext = evaluate(a, s, f)
            assert ext.decomposition.terms[0].perm == p_star
            _, val = best_term(ext)
            assert val <= f(p_star)

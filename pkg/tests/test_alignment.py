import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udtw.alignment import (
    align,
    compose_variance,
    gibbs_weights,
    hard_dtw,
    pairwise_cost,
    softming,
    softminsel,
    udtw_evaluate,
)
from udtw.types import CostMatrix, GibbsParams, Sequence, VarianceField

from conftest import gp, random_instance


class TestPairwiseCost:
    def test_identity_single_column(self):
        a = Sequence([[1.0], [2.0]])
        np.testing.assert_allclose(pairwise_cost(a, a).entries, [[0.0]])

    def test_scalar_arithmetic(self):
        a = Sequence([[0.0, 1.0]])
        b = Sequence([[2.0]])
        np.testing.assert_allclose(pairwise_cost(a, b).entries, [[4.0], [1.0]])

    def test_matches_double_loop(self, rng):
        a = Sequence(rng.normal(size=(3, 4)))
        b = Sequence(rng.normal(size=(3, 5)))
        got = pairwise_cost(a, b).entries
        want = np.zeros((4, 5))
        for m in range(4):
            for n in range(5):
                diff = a.values[:, m] - b.values[:, n]
                want[m, n] = diff @ diff
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="feature dimensions differ"):
            pairwise_cost(Sequence([[1.0]]), Sequence([[1.0], [2.0]]))


class TestComposeVariance:
    def test_unit_case(self):
        np.testing.assert_allclose(compose_variance([1.0], [1.0]).entries, [[1.0]])

    def test_arithmetic_mean(self):
        np.testing.assert_allclose(compose_variance([2.0], [4.0]).entries, [[3.0]])

    def test_two_by_one(self):
        field = compose_variance([1.0, 3.0], [5.0])
        np.testing.assert_allclose(field.entries, [[3.0], [4.0]])
        assert field.mode == "additive_per_token"

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            compose_variance([0.0], [1.0])


class TestSoftSelectors:
    def test_constant_vector(self):
        for gamma in (0.1, 1.0, 7.0):
            assert softming([3.5, 3.5, 3.5], gp(gamma)) == pytest.approx(3.5)

    def test_two_term_closed_form(self):
        # independent closed form: p1 = 1/(1+e^{-2}), value = p1*1 + (1-p1)*3
        p1 = 1.0 / (1.0 + np.exp(-2.0))
        want = p1 * 1.0 + (1.0 - p1) * 3.0
        assert softming([1.0, 3.0], gp(1.0)) == pytest.approx(want, rel=1e-12)
        assert softming([1.0, 3.0], gp(1.0)) == pytest.approx(1.238406, abs=1e-6)

    def test_hard_min_limit(self):
        assert softming([1.0, 3.0], gp(1e-6)) == pytest.approx(1.0, abs=1e-9)

    def test_selector_closed_form(self):
        p1 = 1.0 / (1.0 + np.exp(-2.0))
        want = p1 * 10.0 + (1.0 - p1) * 20.0
        got = softminsel([1.0, 3.0], [10.0, 20.0], gp(1.0))
        assert got == pytest.approx(want, rel=1e-12)
        assert got == pytest.approx(11.19203, abs=1e-5)

    def test_selector_limit(self):
        got = softminsel([1.0, 3.0], [10.0, 20.0], gp(1e-6))
        assert got == pytest.approx(10.0, abs=1e-6)

    def test_selector_on_same_vector(self, rng):
        w = rng.normal(size=7)
        assert softminsel(w, w, gp(0.7)) == pytest.approx(softming(w, gp(0.7)))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            softming([], gp())

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            softminsel([1.0, 2.0], [1.0], gp())

    def test_overflow_safe(self):
        # enormous spread would overflow a naive exp
        assert np.isfinite(softming([1e6, -1e6], gp(1e-3)))

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=8),
        st.floats(-20, 20),
        st.sampled_from([0.1, 1.0, 10.0]),
    )
    def test_shift_invariance(self, w, c, gamma):
        p = gp(gamma)
        w = np.asarray(w)
        np.testing.assert_allclose(
            gibbs_weights(w + c, p), gibbs_weights(w, p), rtol=1e-9, atol=1e-12
        )
        assert softming(w + c, p) == pytest.approx(softming(w, p) + c, abs=1e-8)

    def test_shift_policy_none_same_result(self, rng):
        w = rng.uniform(-5, 5, size=6)
        a = softming(w, GibbsParams(gamma=0.5, shift_policy="mean"))
        b = softming(w, GibbsParams(gamma=0.5, shift_policy="none"))
        assert a == pytest.approx(b, rel=1e-12)


class TestEvaluate:
    def test_worked_two_by_two(self):
        # enumeration oracle: path costs 2, 4, 5 with Gibbs weights e^-2, e^-4, e^-5
        w = np.array([2.0, 4.0, 5.0])
        pr = np.exp(-w) / np.exp(-w).sum()
        C = CostMatrix([[1.0, 2.0], [3.0, 1.0]])
        out = udtw_evaluate(C, VarianceField.unit((2, 2)), gp(1.0))
        assert out.dist == pytest.approx(float(w @ pr), rel=1e-10)
        assert out.omega == pytest.approx(0.0, abs=1e-12)
        np.testing.assert_allclose(
            out.coupling, [[1.0, pr[1]], [pr[2], 1.0]], rtol=1e-9, atol=1e-12
        )

    def test_single_cell(self):
        out = udtw_evaluate(
            CostMatrix([[3.0]]), VarianceField([[2.0]]), gp(0.7)
        )
        assert out.dist == pytest.approx(1.5)
        assert out.omega == pytest.approx(np.log(2.0))
        assert out.softmin_value == pytest.approx(1.5)

    def test_unique_path_strip(self, rng):
        c = rng.uniform(0, 3, size=(1, 6))
        out = udtw_evaluate(CostMatrix(c), VarianceField.unit((1, 6)), gp(1.0))
        assert out.dist == pytest.approx(c.sum(), rel=1e-12)
        np.testing.assert_allclose(out.coupling, np.ones((1, 6)), atol=1e-12)
        assert out.softmin_value == pytest.approx(c.sum(), rel=1e-12)

    def test_coupling_endpoints_and_range(self, rng):
        for _ in range(20):
            C, S = random_instance(rng)
            out = udtw_evaluate(C, S, gp(float(rng.uniform(0.1, 5.0))))
            t, tp = C.shape
            assert out.coupling[0, 0] == pytest.approx(1.0, abs=1e-10)
            assert out.coupling[t - 1, tp - 1] == pytest.approx(1.0, abs=1e-10)
            assert np.all(out.coupling >= -1e-10)
            assert np.all(out.coupling <= 1.0 + 1e-10)

    def test_symmetry_under_transpose(self, rng):
        C, S = random_instance(rng, max_len=6)
        p = gp(0.8)
        a = udtw_evaluate(C, S, p)
        b = udtw_evaluate(CostMatrix(C.entries.T), VarianceField(S.entries.T), p)
        assert a.dist == pytest.approx(b.dist, rel=1e-10)
        assert a.omega == pytest.approx(b.omega, rel=1e-10, abs=1e-12)
        np.testing.assert_allclose(a.coupling, b.coupling.T, rtol=1e-9, atol=1e-12)

    def test_deterministic_limit_vs_hard(self, rng):
        # unique min path with margin; gamma -> 0 recovers it
        C = CostMatrix([[0.1, 2.0, 3.0], [2.5, 0.2, 2.2], [3.0, 2.0, 0.3]])
        S = VarianceField(rng.uniform(0.5, 2.0, size=(3, 3)))
        hard_cost, path = hard_dtw(C, S)
        out = udtw_evaluate(C, S, gp(1e-3))
        assert abs(out.dist - hard_cost) <= 1e-3
        u_star = sum(np.log(S.entries)[m - 1, n - 1] for m, n in path.steps)
        assert abs(out.omega - u_star) <= 1e-3

    def test_unit_variance_coupling_is_softmin_gradient(self, rng):
        # finite differences of the log-partition value w.r.t. the costs
        C = CostMatrix(rng.uniform(0.2, 4.0, size=(4, 4)))
        S = VarianceField.unit((4, 4))
        p = gp(1.0)
        out = udtw_evaluate(C, S, p)
        fd = np.zeros((4, 4))
        for m in range(4):
            for n in range(4):
                h = 1e-5 * max(1.0, abs(C.entries[m, n]))
                up, dn = C.entries.copy(), C.entries.copy()
                up[m, n] += h
                dn[m, n] -= h
                fd[m, n] = (
                    udtw_evaluate(CostMatrix(up), S, p).softmin_value
                    - udtw_evaluate(CostMatrix(dn), S, p).softmin_value
                ) / (2 * h)
        np.testing.assert_allclose(out.coupling, fd, atol=1e-8)

    def test_rejects_bad_gamma(self):
        with pytest.raises(ValueError):
            GibbsParams(gamma=0.0)
        with pytest.raises(ValueError):
            GibbsParams(gamma=-1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            CostMatrix([[np.inf]])
        with pytest.raises(ValueError):
            VarianceField([[np.nan]])


class TestHardDtw:
    def test_worked_instance(self):
        cost, path = hard_dtw(CostMatrix([[1.0, 2.0], [3.0, 1.0]]), VarianceField.unit((2, 2)))
        assert cost == pytest.approx(2.0)
        assert path.steps == [(1, 1), (2, 2)]

    def test_identical_sequences_zero_cost(self, rng):
        s = Sequence(rng.normal(size=(2, 7)))
        C = pairwise_cost(s, s)
        cost, path = hard_dtw(C, VarianceField.unit(C.shape))
        assert cost == pytest.approx(0.0, abs=1e-12)
        assert path.steps == [(i, i) for i in range(1, 8)]

    def test_strip_row_sum(self, rng):
        c = rng.uniform(0, 2, size=(1, 5))
        cost, path = hard_dtw(CostMatrix(c), VarianceField.unit((1, 5)))
        assert cost == pytest.approx(c.sum())
        assert path.steps == [(1, n) for n in range(1, 6)]

    def test_tie_break_prefers_diagonal(self):
        # all-zero costs: every path ties; diagonal-first backtracking
        cost, path = hard_dtw(CostMatrix(np.zeros((3, 3))), VarianceField.unit((3, 3)))
        assert cost == 0.0
        assert path.steps == [(1, 1), (2, 2), (3, 3)]


class TestAlign:
    def test_align_composes(self, rng):
        a = Sequence(rng.normal(size=(2, 4)))
        b = Sequence(rng.normal(size=(2, 5)))
        out = align(a, b, gp(1.0))
        C = pairwise_cost(a, b)
        ref = udtw_evaluate(C, VarianceField.unit(C.shape), gp(1.0))
        assert out.dist == pytest.approx(ref.dist)

    def test_noise_robustness_monte_carlo(self):
        # fixed-path expected cost under additive gaussian noise (3 SE band)
        from udtw.selftest import mc_path_cost_check

        rng = np.random.default_rng(7)
        for _ in range(5):
            mean, closed, se = mc_path_cost_check(rng, draws=10000)
            assert abs(mean - closed) <= 3.0 * se

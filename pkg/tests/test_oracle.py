import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udtw.alignment import udtw_evaluate
from udtw.oracle import delannoy_number, enumerate_paths, udtw_bruteforce
from udtw.types import CostMatrix, GibbsParams, VarianceField

from conftest import gp, random_instance


class TestDelannoy:
    def test_known_values(self):
        assert delannoy_number(0, 0) == 1
        assert delannoy_number(1, 1) == 3
        assert delannoy_number(2, 2) == 13
        assert delannoy_number(7, 7) == 48639


class TestEnumeratePaths:
    def test_single_cell(self):
        paths = enumerate_paths(1, 1)
        assert len(paths) == 1
        assert paths[0].steps == [(1, 1)]

    def test_two_by_two_has_three(self):
        assert len(enumerate_paths(2, 2)) == 3

    def test_counts_match_formula(self):
        for t in range(1, 5):
            for tp in range(1, 5):
                assert len(enumerate_paths(t, tp)) == delannoy_number(t - 1, tp - 1)

    def test_limit_guard(self):
        with pytest.raises(ValueError, match="oracle limit"):
            enumerate_paths(9, 2, limit=8)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 5))
    def test_paths_are_monotone_and_pinned(self, t, tp):
        for path in enumerate_paths(t, tp):
            assert path.steps[0] == (1, 1)
            assert path.steps[-1] == (t, tp)
            for (m0, n0), (m1, n1) in zip(path.steps, path.steps[1:]):
                assert (m1 - m0, n1 - n0) in {(1, 0), (0, 1), (1, 1)}


class TestBruteforce:
    def test_worked_two_by_two(self):
        C = CostMatrix([[1.0, 2.0], [3.0, 1.0]])
        out, dist_info = udtw_bruteforce(C, VarianceField.unit((2, 2)), gp(1.0))
        w = np.array([2.0, 4.0, 5.0])
        pr = np.exp(-w) / np.exp(-w).sum()
        assert sorted(dist_info.costs) == pytest.approx(sorted(w))
        assert out.dist == pytest.approx(float(w @ pr), rel=1e-12)
        assert out.omega == pytest.approx(0.0, abs=1e-15)
        assert np.sort(out.coupling.ravel())[:2] == pytest.approx(np.sort(pr)[:2], rel=1e-9)

    def test_single_cell_closed_form(self):
        out, _ = udtw_bruteforce(CostMatrix([[6.0]]), VarianceField([[3.0]]), gp(2.0))
        assert out.dist == pytest.approx(2.0)
        assert out.omega == pytest.approx(np.log(3.0))

    def test_unit_variance_zero_omega(self, rng):
        C, _ = random_instance(rng, max_len=4)
        out, _ = udtw_bruteforce(C, VarianceField.unit(C.shape), gp(0.5))
        assert out.omega == pytest.approx(0.0, abs=1e-12)

    def test_probabilities_sum_to_one(self, rng):
        C, S = random_instance(rng, max_len=4)
        _, dist_info = udtw_bruteforce(C, S, gp(0.3))
        assert dist_info.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        t, tp = C.shape
        assert len(dist_info.paths) == delannoy_number(t - 1, tp - 1)

    def test_limit_guard(self):
        C = CostMatrix(np.ones((9, 3)))
        with pytest.raises(ValueError, match="oracle limit"):
            udtw_bruteforce(C, VarianceField.unit((9, 3)), gp(1.0))

    def test_dp_matches_oracle(self, rng):
        # the core identity: forward/backward equals enumeration
        for _ in range(30):
            C, S = random_instance(rng)
            for gamma in (0.1, 1.0, 10.0):
                p = gp(gamma)
                ref, _ = udtw_bruteforce(C, S, p)
                got = udtw_evaluate(C, S, p)
                assert got.dist == pytest.approx(ref.dist, rel=1e-9)
                assert got.omega == pytest.approx(ref.omega, rel=1e-9, abs=1e-11)
                assert got.softmin_value == pytest.approx(ref.softmin_value, rel=1e-9)
                np.testing.assert_allclose(got.coupling, ref.coupling, rtol=1e-8, atol=1e-10)

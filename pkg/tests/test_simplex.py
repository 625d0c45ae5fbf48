import numpy as np
import pytest
from scipy.optimize import linprog

from covact import ParameterError
from covact.simplex import solve_standard_form


def scipy_reference(c, A, b):
    res = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * len(c),
                  method="highs")
    return res


class TestKnownProblems:
    def test_simple_optimum(self):
        # min -x1 - 2 x2 s.t. x1 + x2 + s = 4, x1 + 3 x2 + t = 6
        c = np.array([-1.0, -2.0, 0.0, 0.0])
        A = np.array([[1.0, 1.0, 1.0, 0.0], [1.0, 3.0, 0.0, 1.0]])
        b = np.array([4.0, 6.0])
        res = solve_standard_form(c, A, b)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-5.0)
        np.testing.assert_allclose(res.x[:2], [3.0, 1.0], atol=1e-9)

    def test_infeasible(self):
        # x1 = -1 impossible with x1 >= 0
        c = np.zeros(1)
        A = np.array([[1.0]])
        b = np.array([-1.0])
        res = solve_standard_form(c, A, b)
        assert res.status == "infeasible"

    def test_unbounded(self):
        # min -x1 with x1 - x2 = 0: both can grow without bound
        c = np.array([-1.0, 0.0])
        A = np.array([[1.0, -1.0]])
        b = np.array([0.0])
        res = solve_standard_form(c, A, b)
        assert res.status == "unbounded"

    def test_degenerate_zero_rhs(self):
        # many zero right-hand sides; Bland's rule must still terminate
        rng = np.random.default_rng(0)
        n = 20
        A = np.vstack([rng.standard_normal((5, n)), np.ones(n)])
        b = np.zeros(6)
        b[-1] = 1.0
        res = solve_standard_form(np.zeros(n), A, b)
        ref = scipy_reference(np.zeros(n), A, b)
        assert (res.status == "optimal") == ref.success

    def test_redundant_rows(self):
        A = np.array([[1.0, 1.0], [2.0, 2.0]])
        b = np.array([1.0, 2.0])
        res = solve_standard_form(np.array([1.0, 0.0]), A, b)
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.0, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            solve_standard_form(np.zeros(2), np.ones((1, 3)), np.ones(1))


class TestAgainstScipy:
    @pytest.mark.parametrize("seed", range(30))
    def test_random_instances(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.integers(2, 8)
        n = rng.integers(m, m + 12)
        A = rng.standard_normal((m, n))
        # half the instances are guaranteed feasible by construction
        if seed % 2 == 0:
            x_feas = rng.uniform(0.0, 2.0, size=n)
            b = A @ x_feas
        else:
            b = rng.standard_normal(m)
        c = rng.standard_normal(n)
        ref = scipy_reference(c, A, b)
        res = solve_standard_form(c, A, b)
        if ref.status == 2:
            assert res.status == "infeasible"
        elif ref.status == 3:
            assert res.status == "unbounded"
        else:
            assert res.status == "optimal"
            assert res.objective == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
            np.testing.assert_allclose(A @ res.x, b, atol=1e-8)
            assert np.all(res.x >= -1e-10)

    @pytest.mark.parametrize("seed", range(8))
    def test_feasibility_problems_with_signs(self, seed):
        # shape of the cone-membership LPs: sign rows with zero rhs plus one
        # normalization row
        rng = np.random.default_rng(100 + seed)
        n, d = 30, 8
        V = np.linalg.qr(rng.standard_normal((n, d)))[0]
        sign = rng.choice([-1.0, 1.0], size=n)
        SV = sign[:, None] * V
        A = np.zeros((n + 1, 2 * d + n))
        A[:n, :d] = SV
        A[:n, d:2 * d] = -SV
        A[:n, 2 * d:] = -np.eye(n)
        A[n, :d] = SV.sum(axis=0)
        A[n, d:2 * d] = -SV.sum(axis=0)
        b = np.zeros(n + 1)
        b[n] = 1.0
        c = np.zeros(2 * d + n)
        res = solve_standard_form(c, A, b)
        ref = scipy_reference(c, A, b)
        assert (res.status == "optimal") == ref.success
        if res.status == "optimal":
            np.testing.assert_allclose(A @ res.x, b, atol=1e-9)

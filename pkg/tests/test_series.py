import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from germlie.errors import BudgetError, EvaluationError, StructureError
from germlie.series import (
    TruncatedSeries,
    bracket,
    cauchy_coefficients,
    invert,
    linear_combination,
    matrix_space,
    multiply,
    scalar_space,
    series_exp,
    series_from_json,
    series_json_dumps,
    series_json_loads,
    series_log,
    series_to_json,
    vector_space,
)

SP = scalar_space()
MS = matrix_space(2)


def random_scalar_series(rng, radius=1.0, degree=12, scale=1.0, decay=0.5):
    coeffs = (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))
    coeffs *= scale * decay ** np.arange(degree + 1)
    return TruncatedSeries(0.0, degree, coeffs, radius, 0.0, SP)


def random_matrix_series(rng, radius=0.5, degree=12, scale=0.05, decay=0.5):
    coeffs = (rng.standard_normal((degree + 1, 2, 2))
              + 1j * rng.standard_normal((degree + 1, 2, 2)))
    coeffs *= scale * decay ** np.arange(degree + 1)[:, None, None]
    return TruncatedSeries(0.0, degree, coeffs, radius, 0.0, MS)


def boundary_points(radius, n=20, interior=0.6):
    return interior * radius * np.exp(1j * np.linspace(0, 2 * np.pi, n, endpoint=False))


class TestLinear:
    def test_self_minus_self_is_zero_with_doubled_tail(self, rng):
        s = random_scalar_series(rng).with_tail(0.25)
        out = linear_combination(s, s, 1.0, -1.0)
        assert np.all(out.coeffs == 0)
        assert out.tail_bound == pytest.approx(0.5)

    def test_identity_case(self, rng):
        s = random_scalar_series(rng)
        zero = TruncatedSeries.zero(0.0, 1.0, SP)
        out = linear_combination(s, zero, 1.0, 0.0)
        assert np.array_equal(out.coeffs, s.coeffs)

    def test_random_combination_matches_pointwise(self, rng):
        a = random_scalar_series(rng)
        b = random_scalar_series(rng)
        out = linear_combination(a, b, 2.0, 3.0)
        pts = boundary_points(1.0)
        assert_allclose(out.eval(pts), 2.0 * a.eval(pts) + 3.0 * b.eval(pts),
                        rtol=0, atol=1e-12)

    def test_anchor_mismatch_is_structural(self, rng):
        a = random_scalar_series(rng)
        b = TruncatedSeries.zero(1.0, 1.0, SP)
        with pytest.raises(StructureError):
            linear_combination(a, b)

    def test_space_mismatch_is_structural(self, rng):
        a = random_scalar_series(rng)
        b = TruncatedSeries.zero(0.0, 1.0, MS)
        with pytest.raises(StructureError):
            linear_combination(a, b)


class TestMultiply:
    def test_constant_identity_matrix_is_unit(self, rng):
        b = random_matrix_series(rng)
        one = TruncatedSeries.unit(0.0, 0.5, MS)
        out = multiply(one, b)
        assert_allclose(out.coeffs, b.coeffs, rtol=0, atol=0)

    def test_polynomial_identity(self):
        a = TruncatedSeries.from_coeff_list([(0, 1.0), (1, 1.0)], 0.0, 1.0, SP, 4)
        b = TruncatedSeries.from_coeff_list([(0, 1.0), (1, -1.0)], 0.0, 1.0, SP, 4)
        out = multiply(a, b)
        expect = np.zeros(5, complex)
        expect[0], expect[2] = 1.0, -1.0
        assert_allclose(out.coeffs, expect, rtol=0, atol=1e-15)

    def test_matrix_product_matches_pointwise(self, rng):
        a = random_matrix_series(rng)
        b = random_matrix_series(rng)
        out = multiply(a, b)
        pts = boundary_points(0.5)
        assert_allclose(out.eval(pts), a.eval(pts) @ b.eval(pts), rtol=0, atol=1e-10)

    def test_vector_coefficients_refuse_product(self, rng):
        v = TruncatedSeries.zero(0.0, 1.0, vector_space(2))
        with pytest.raises(StructureError):
            multiply(v, v)

    def test_associativity_at_samples(self, rng):
        a, b, c = (random_matrix_series(rng) for _ in range(3))
        pts = boundary_points(0.5)
        lhs = multiply(multiply(a, b), c).eval(pts)
        rhs = multiply(a, multiply(b, c)).eval(pts)
        assert_allclose(lhs, rhs, rtol=0, atol=1e-10)

    def test_tail_certifies_dropped_degrees(self, rng):
        # degree-12 factors truncated at 12: the overflow lives in the tail
        a = random_scalar_series(rng, scale=0.5)
        b = random_scalar_series(rng, scale=0.5)
        out = multiply(a, b)
        pts = boundary_points(1.0, interior=1.0)
        true_vals = a.eval(pts) * b.eval(pts)
        defect = np.max(np.abs(true_vals - out.eval(pts)))
        assert defect <= out.tail_bound + 1e-12


class TestInvert:
    def test_constant_series(self):
        c = np.array([[2.0, 1.0], [0.0, 1.0 + 1j]])
        s = TruncatedSeries.constant(c, 0.0, 1.0, MS, 6)
        out = invert(s)
        assert_allclose(out.coeffs[0], np.linalg.inv(c), rtol=0, atol=1e-14)

    def test_geometric_series(self):
        a = TruncatedSeries.from_coeff_list([(0, 1.0), (1, -1.0)], 0.0, 0.5, SP, 12)
        out = invert(a)
        assert_allclose(out.coeffs.real, np.ones(13), rtol=0, atol=1e-12)
        assert out.tail_bound <= 0.5 ** 13 / 0.5 + 1e-12

    def test_singular_constant_rejected(self):
        s = TruncatedSeries.constant(np.zeros((2, 2)), 0.0, 1.0, MS, 6)
        with pytest.raises(BudgetError):
            invert(s)

    def test_unattainable_budget_reports(self, rng):
        s = TruncatedSeries.constant(np.eye(2), 0.0, 1.0, MS, 6).with_tail(5.0)
        with pytest.raises(BudgetError, match="Neumann"):
            invert(s)

    def test_matrix_series_near_identity(self, rng):
        a = random_matrix_series(rng, scale=0.04) + TruncatedSeries.unit(0.0, 0.5, MS)
        out = invert(a)
        pts = boundary_points(out.radius)
        prod = multiply(a.restrict(out.radius), out)
        assert_allclose(prod.eval(pts), np.broadcast_to(np.eye(2), (20, 2, 2)),
                        rtol=0, atol=1e-9)


class TestExpLog:
    def test_exp_of_zero(self):
        z = TruncatedSeries.zero(0.0, 1.0, MS, 8)
        out = series_exp(z)
        assert_allclose(out.coeffs[0], np.eye(2), rtol=0, atol=0)
        assert np.all(out.coeffs[1:] == 0)

    def test_scalar_exp_taylor_coefficients(self):
        z = TruncatedSeries.from_coeff_list([(1, 1.0)], 0.0, 0.5, SP, 12)
        out = series_exp(z)
        expect = np.array([1.0 / math.factorial(k) for k in range(13)])
        assert_allclose(out.coeffs.real, expect, rtol=0, atol=1e-15)

    def test_log_exp_roundtrip_with_matrix_oracle(self, rng):
        a = random_matrix_series(rng, scale=0.03)
        assert a.majorant_norm() <= 0.2
        back = series_log(series_exp(a))
        assert np.max(MS.norm(back.coeffs - a.coeffs)) < 1e-9
        # independent pointwise oracle: matrix exp of values
        import scipy.linalg
        pts = boundary_points(0.5, n=7)
        vals = series_exp(a).eval(pts)
        for p, v in zip(pts, vals):
            assert_allclose(v, scipy.linalg.expm(a.eval(np.array([p]))[0]),
                            rtol=0, atol=1e-10)

    def test_log_budget_violation(self):
        s = TruncatedSeries.constant(3.0 * np.eye(2), 0.0, 1.0, MS, 6)
        with pytest.raises(BudgetError, match="branch"):
            series_log(s)


class TestNorms:
    def test_constant_series_norms(self):
        c = np.array([[0.3, 0.1], [0.0, 0.2]])
        s = TruncatedSeries.constant(c, 0.0, 1.0, MS, 6)
        n = float(MS.norm(c))
        assert s.majorant_norm(1.0) == pytest.approx(n)
        assert s.sample_sup(1.0, 64) == pytest.approx(n)

    def test_monomial_majorant_is_sharp(self):
        z = TruncatedSeries.from_coeff_list([(1, 1.0)], 0.0, 1.0, SP, 6)
        for rho in (0.3, 0.7, 1.0):
            assert z.majorant_norm(rho) == pytest.approx(rho)
            assert z.sample_sup(rho, 64) == pytest.approx(rho)

    def test_sample_below_majorant_random(self, rng):
        for _ in range(50):
            s = random_scalar_series(rng)
            rho = rng.uniform(0.1, 1.0)
            assert s.sample_sup(rho, 100) <= s.majorant_norm(rho) + 1e-12

    def test_majorant_soundness_at_interior_points(self, rng):
        s = random_matrix_series(rng)
        rho = 0.4
        pts = rho * rng.uniform(0, 1, 50) * np.exp(2j * np.pi * rng.uniform(0, 1, 50))
        vals = s.eval(pts)
        assert np.max(MS.norm(vals)) <= s.majorant_norm(rho) + 1e-12

    def test_restriction_monotonicity(self, rng):
        s = random_scalar_series(rng).with_tail(0.1)
        assert s.majorant_norm(0.5) <= s.majorant_norm(1.0)
        assert s.restrict(0.5).tail_bound <= s.tail_bound

    def test_rho_beyond_radius_rejected(self, rng):
        s = random_scalar_series(rng, radius=0.5)
        with pytest.raises(BudgetError):
            s.majorant_norm(0.7)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=8),
           st.floats(0.1, 1.0))
    def test_majorant_soundness_property(self, coeffs, rho):
        s = TruncatedSeries.from_coeff_list(list(enumerate(coeffs)), 0.0, 1.0, SP, 8)
        pts = rho * np.exp(2j * np.pi * np.linspace(0, 1, 17, endpoint=False))
        assert np.max(np.abs(s.eval(pts))) <= s.majorant_norm(rho) + 1e-12


class TestCauchyExtraction:
    def test_monomial(self):
        betas, sup, rq = cauchy_coefficients(lambda z: z ** 2, 0.0, 1.0, 6, 256)
        expect = np.zeros(7, complex)
        expect[2] = 1.0
        assert_allclose(betas, expect, rtol=0, atol=1e-12)

    def test_constant(self):
        betas, _, _ = cauchy_coefficients(lambda z: 2.5 - 1j, 0.0, 1.0, 4, 64)
        assert_allclose(betas[0], 2.5 - 1j, rtol=0, atol=1e-14)
        assert_allclose(betas[1:], 0, rtol=0, atol=1e-14)

    def test_random_degree8_polynomial(self, rng):
        coeffs = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        betas, _, _ = cauchy_coefficients(
            lambda z: np.polyval(coeffs[::-1], z), 0.0, 1.0, 8, 256)
        assert_allclose(betas, coeffs, rtol=0, atol=1e-10)

    def test_cauchy_bound_holds(self, rng):
        coeffs = rng.standard_normal(9)
        betas, sup, rq = cauchy_coefficients(
            lambda z: np.polyval(coeffs[::-1], z), 0.0, 1.0, 8, 256)
        bounds = sup / rq ** np.arange(9)
        assert np.all(np.abs(betas) <= bounds + 1e-10)

    def test_nonfinite_samples_rejected(self):
        # pole sitting exactly on the quadrature circle
        with np.errstate(divide="ignore", invalid="ignore"):
            with pytest.raises(EvaluationError):
                cauchy_coefficients(lambda z: 1.0 / (z - 0.8), 0.0, 1.0, 4, 64)

    def test_quadrature_count_precondition(self):
        with pytest.raises(StructureError):
            cauchy_coefficients(lambda z: z, 0.0, 1.0, 20, 64)


class TestSerialization:
    def test_exact_roundtrip_scalar(self, rng):
        s = random_scalar_series(rng).with_tail(1 / 3)
        s2 = series_json_loads(series_json_dumps(s))
        assert np.array_equal(s.coeffs, s2.coeffs)
        assert s.radius == s2.radius and s.tail_bound == s2.tail_bound
        assert s.anchor == s2.anchor and s.degree_bound == s2.degree_bound

    def test_exact_roundtrip_matrix(self, rng):
        s = random_matrix_series(rng)
        s2 = series_from_json(json.loads(json.dumps(series_to_json(s))))
        assert np.array_equal(s.coeffs, s2.coeffs)
        assert s2.space == MS

    def test_schema_keys(self, rng):
        doc = series_to_json(random_scalar_series(rng))
        assert {"anchor", "degree_bound", "coeffs", "radius", "tail_bound"} <= set(doc)


class TestDimensionTwo:
    def test_eval_and_multiply(self, rng):
        sp = scalar_space()
        a = TruncatedSeries.from_coeff_list([((0, 0), 1.0), ((1, 0), 2.0), ((0, 1), -1.0)],
                                            (0.0, 0.0), 1.0, sp, 4, dim=2)
        b = TruncatedSeries.from_coeff_list([((1, 1), 1.0)], (0.0, 0.0), 1.0, sp, 4, dim=2)
        pts = 0.3 * (rng.standard_normal((10, 2)) + 1j * rng.standard_normal((10, 2)))
        va = 1.0 + 2.0 * pts[:, 0] - pts[:, 1]
        vb = pts[:, 0] * pts[:, 1]
        assert_allclose(a.eval(pts), va, rtol=0, atol=1e-13)
        out = multiply(a, b)
        assert_allclose(out.eval(pts), va * vb, rtol=0, atol=1e-12)

    def test_majorant_sound_d2(self, rng):
        sp = scalar_space()
        a = TruncatedSeries.from_coeff_list([((0, 0), 0.5), ((2, 1), 1.0)],
                                            (0.0, 0.0), 1.0, sp, 4, dim=2)
        pts = 0.5 * (rng.standard_normal((40, 2)) + 1j * rng.standard_normal((40, 2)))
        pts /= np.maximum(np.linalg.norm(pts, axis=1, keepdims=True) / 0.5, 1.0)
        assert np.max(np.abs(a.eval(pts))) <= a.majorant_norm(0.5) + 1e-12

    def test_degree_bound_enforced_d2(self):
        sp = scalar_space()
        with pytest.raises(StructureError):
            TruncatedSeries.from_coeff_list([((3, 2), 1.0)], (0.0, 0.0), 1.0, sp, 4, dim=2)


class TestBracket:
    def test_bracket_antisymmetric(self, rng):
        a = random_matrix_series(rng)
        b = random_matrix_series(rng)
        lhs = bracket(a, b)
        rhs = bracket(b, a)
        assert_allclose(lhs.coeffs, -rhs.coeffs, rtol=0, atol=1e-15)

    def test_bracket_compatible_norm(self, rng):
        # norm([x, y]) <= norm(x) norm(y) for the doubled spectral norm
        for _ in range(100):
            x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            y = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            comm = x @ y - y @ x
            assert float(MS.norm(comm)) <= float(MS.norm(x)) * float(MS.norm(y)) + 1e-12

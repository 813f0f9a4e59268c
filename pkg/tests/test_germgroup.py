import numpy as np
import pytest
from numpy.testing import assert_allclose

from germlie.errors import BudgetError, StructureError
from germlie.germgroup import (
    GermGroupElement,
    GermLieGroup,
    LocalGermElement,
    element_from_matrix_poly,
    random_algebra_element,
    random_group_element,
)
from germlie.germspace import GermSpace, bond, germ_distance
from germlie.series import matrix_space


def sample_pts(group, n=20):
    return group.space.sample_points(1, n, interior=0.4)


class TestLocalProduct:
    def test_zero_is_right_unit(self, germ_group, rng):
        x = random_algebra_element(germ_group, rng, 0.08)
        zero = germ_group.zero(1)
        assert germ_distance(germ_group.germ_bch(x, zero), x) == 0.0
        assert germ_distance(germ_group.germ_bch(zero, x), x) == 0.0

    def test_inverse_law_exact_coefficients(self, germ_group, rng):
        x = random_algebra_element(germ_group, rng, 0.1)
        out = germ_group.germ_bch(x, x.scale(-1.0))
        assert germ_distance(out, germ_group.zero(1)) == 0.0

    def test_commuting_diagonal_germs_add(self, germ_group):
        d1 = element_from_matrix_poly(germ_group.space,
                                      [np.diag([0.05, -0.02]), np.diag([0.01, 0.02])], 1)
        d2 = element_from_matrix_poly(germ_group.space,
                                      [np.diag([-0.03, 0.04]), np.diag([0.02, -0.01])], 1)
        out = germ_group.germ_bch(d1, d2)
        assert germ_distance(out, d1 + d2) < 1e-15

    def test_pointwise_matrix_oracle(self, germ_group, rng):
        pts = sample_pts(germ_group)
        for _ in range(10):
            x = random_algebra_element(germ_group, rng, 0.05)
            y = random_algebra_element(germ_group, rng, 0.05)
            z = germ_group.germ_bch(x, y)
            oracle = germ_group.backend.bch(x.eval(pts), y.eval(pts))
            assert np.max(germ_group.backend.norm(z.eval(pts) - oracle)) < 1e-9

    def test_budget_violation(self, germ_group, rng):
        x = random_algebra_element(germ_group, rng, 0.4)
        y = random_algebra_element(germ_group, rng, 0.4)
        with pytest.raises(BudgetError, match="budget"):
            germ_group.germ_bch(x, y)

    def test_associativity_at_samples(self, germ_group, rng):
        pts = sample_pts(germ_group)
        for _ in range(5):
            a, b, c = (random_algebra_element(germ_group, rng, 0.04) for _ in range(3))
            lhs = germ_group.germ_bch(germ_group.germ_bch(a, b), c)
            rhs = germ_group.germ_bch(a, germ_group.germ_bch(b, c))
            assert np.max(germ_group.backend.norm(lhs.eval(pts) - rhs.eval(pts))) < 1e-8

    def test_bonded_arguments_align(self, germ_group, rng):
        x = random_algebra_element(germ_group, rng, 0.05, level=1)
        y = bond(random_algebra_element(germ_group, rng, 0.05, level=1), 2)
        out = germ_group.germ_bch(x, y)
        assert out.level == 2

    def test_local_element_budget_certificate(self, germ_group, rng):
        el = random_algebra_element(germ_group, rng, 0.9)
        with pytest.raises(BudgetError):
            LocalGermElement(el, germ_group.local_budget)
        ok = random_algebra_element(germ_group, rng, 0.5 * germ_group.local_budget)
        assert LocalGermElement(ok, germ_group.local_budget).level == 1


class TestCharts:
    def test_exp_of_zero_is_identity(self, germ_group):
        out = germ_group.exp_germ(germ_group.zero(1))
        assert germ_distance(out.element, germ_group.identity(1).element) < 1e-15

    def test_log_exp_roundtrip(self, germ_group, rng):
        for _ in range(10):
            eta = random_algebra_element(germ_group, rng, 0.4 * rng.uniform(0.2, 1.0))
            assert germ_group.in_injectivity_domain(eta)
            back = germ_group.log_germ(germ_group.exp_germ(eta))
            assert germ_distance(eta, back) < 1e-9

    def test_exp_log_roundtrip_on_group(self, germ_group, rng):
        g = random_group_element(germ_group, rng, 0.3)
        again = germ_group.exp_germ(germ_group.log_germ(g))
        assert germ_distance(g.element, again.element) < 1e-9

    def test_log_bonds_deeper_when_needed(self, germ_group):
        # values vanish on the anchor set but the derivative is large: the
        # branch budget fails at level 1 and certifies after bonding deeper
        a2 = germ_group.space.anchors[1]
        big = element_from_matrix_poly(
            germ_group.space,
            [np.zeros((2, 2)), -8.0 * a2 * np.eye(2), 8.0 * np.eye(2)], 1)
        assert big.norm_upper > 1.0
        g = germ_group.exp_germ(big)
        back = germ_group.log_germ(g)
        assert back.level > 1
        assert germ_distance(back, bond(big, back.level)) < 1e-9

    def test_log_branch_unattainable(self, germ_group):
        g = GermGroupElement(germ_group.space.constant_element(3.0 * np.eye(2), 1))
        with pytest.raises(BudgetError, match="branch"):
            germ_group.log_germ(g)

    def test_power_law(self, germ_group, rng):
        pts = sample_pts(germ_group)
        x = random_algebra_element(germ_group, rng, 0.05)
        g = germ_group.exp_germ(x)
        for n in (2, 3, 4):
            lhs = germ_group.power(g, n)
            rhs = germ_group.exp_germ(x.scale(float(n)))
            assert np.max(germ_group.backend.norm(lhs.eval(pts) - rhs.eval(pts))) < 1e-9

    def test_homomorphism_on_local_pairs(self, germ_group, rng):
        pts = sample_pts(germ_group)
        for _ in range(5):
            x = random_algebra_element(germ_group, rng, 0.05)
            y = random_algebra_element(germ_group, rng, 0.05)
            lhs = germ_group.exp_germ(germ_group.germ_bch(x, y))
            rhs = germ_group.mul(germ_group.exp_germ(x), germ_group.exp_germ(y))
            assert np.max(germ_group.backend.norm(lhs.eval(pts) - rhs.eval(pts))) < 1e-9


class TestGroupOps:
    def test_inverse_gives_identity(self, germ_group, rng):
        pts = sample_pts(germ_group)
        g = random_group_element(germ_group, rng, 0.3)
        prod = germ_group.mul(g, germ_group.inv(g))
        ident = germ_group.identity(prod.level)
        assert germ_distance(prod.element, ident.element) < 1e-9
        assert np.max(germ_group.backend.norm(
            prod.eval(pts) - np.eye(2))) < 1e-9

    def test_identity_is_two_sided_unit(self, germ_group, rng):
        g = random_group_element(germ_group, rng, 0.3)
        e = germ_group.identity(g.level)
        assert germ_distance(germ_group.mul(g, e).element, g.element) < 1e-14
        assert germ_distance(germ_group.mul(e, g).element, g.element) < 1e-14

    def test_associativity_at_samples(self, germ_group, rng):
        pts = sample_pts(germ_group)
        a, b, c = (random_group_element(germ_group, rng, 0.2) for _ in range(3))
        lhs = germ_group.mul(germ_group.mul(a, b), c)
        rhs = germ_group.mul(a, germ_group.mul(b, c))
        assert np.max(germ_group.backend.norm(lhs.eval(pts) - rhs.eval(pts))) < 1e-9

    def test_certificate_rejects_singular_values(self, germ_group):
        sing = germ_group.space.constant_element(np.diag([1.0, 0.0]), 1)
        with pytest.raises(BudgetError, match="certificate"):
            GermGroupElement(sing)

    def test_fixture_serialization(self, germ_group, rng):
        g = random_group_element(germ_group, rng, 0.2)
        doc = g.to_json()
        assert doc["level"] == g.level
        cert = doc["certificate"]
        assert cert["kind"] == "neumann" and 0 < cert["margin"] <= 1
        assert len(doc["reps"]) == 2


class TestAdjoint:
    def test_identity_acts_trivially(self, germ_group, rng):
        eta = random_algebra_element(germ_group, rng, 0.2)
        out, bound = germ_group.adjoint(germ_group.identity(1), eta)
        assert germ_distance(out, eta) < 1e-12
        assert bound >= 1.0

    def test_constant_group_element_reduces_to_matrix_ad(self, germ_group, rng):
        g0 = germ_group.backend.exp(germ_group.backend.random_element(rng, 0.3))
        gamma = GermGroupElement(germ_group.space.constant_element(g0, 1))
        eta = random_algebra_element(germ_group, rng, 0.2)
        out, _ = germ_group.adjoint(gamma, eta)
        pts = sample_pts(germ_group)
        oracle = germ_group.backend.ad(g0, eta.eval(pts))
        assert np.max(germ_group.backend.norm(out.eval(pts) - oracle)) < 1e-12

    def test_conjugation_identity(self, germ_group, rng):
        pts = sample_pts(germ_group)
        for _ in range(10):
            gamma = random_group_element(germ_group, rng, 0.25)
            eta = random_algebra_element(germ_group, rng, 0.15)
            ad_eta, _ = germ_group.adjoint(gamma, eta)
            lhs = germ_group.mul(germ_group.mul(gamma, germ_group.exp_germ(eta)),
                                 germ_group.inv(gamma))
            rhs = germ_group.exp_germ(ad_eta)
            assert np.max(germ_group.backend.norm(lhs.eval(pts) - rhs.eval(pts))) < 1e-9

    def test_linearity(self, germ_group, rng):
        gamma = random_group_element(germ_group, rng, 0.25)
        eta = random_algebra_element(germ_group, rng, 0.1)
        xi = random_algebra_element(germ_group, rng, 0.1)
        a, b = 0.7 - 0.2j, -1.3 + 0.4j
        lhs, _ = germ_group.adjoint(gamma, eta.scale(a) + xi.scale(b))
        r1, _ = germ_group.adjoint(gamma, eta)
        r2, _ = germ_group.adjoint(gamma, xi)
        rhs = r1.scale(a) + r2.scale(b)
        assert germ_distance(lhs, rhs) < 1e-10

    def test_boundedness_certificate(self, germ_group, rng):
        for _ in range(100):
            gamma = random_group_element(germ_group, rng, 0.3)
            eta = random_algebra_element(germ_group, rng, 0.3 * rng.uniform(0.05, 1))
            out, bound = germ_group.adjoint(gamma, eta)
            assert out.norm_upper <= bound * eta.norm_upper + 1e-12

    def test_group_action_property(self, germ_group, rng):
        pts = sample_pts(germ_group)
        gamma = random_group_element(germ_group, rng, 0.2)
        delta = random_group_element(germ_group, rng, 0.2)
        eta = random_algebra_element(germ_group, rng, 0.15)
        lhs, _ = germ_group.adjoint(germ_group.mul(gamma, delta), eta)
        inner, _ = germ_group.adjoint(delta, eta)
        rhs, _ = germ_group.adjoint(gamma, inner)
        assert np.max(germ_group.backend.norm(lhs.eval(pts) - rhs.eval(pts))) < 1e-9


class TestStructure:
    def test_group_needs_matrix_coefficients(self):
        scalar = GermSpace(anchors=(0.0,), ratio=0.1)
        with pytest.raises(StructureError):
            GermLieGroup(scalar)

    def test_generator_respects_budget(self, germ_group, rng):
        el = random_algebra_element(germ_group, rng, 0.123)
        assert el.norm_upper == pytest.approx(0.123)

    def test_matrix_poly_elements_cohere(self, germ_group, rng):
        # re-expansion of one polynomial around both anchors: coherent at level 0
        coeffs = [rng.standard_normal((2, 2)) * 0.1 for _ in range(3)]
        el = element_from_matrix_poly(germ_group.space, coeffs, 0)
        assert el.coherence_defect() < 1e-12

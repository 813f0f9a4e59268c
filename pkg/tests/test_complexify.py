import json
import math

import numpy as np
import pytest

from germlie.complexify import (
    ChartInterval,
    RealAtlas,
    Transition,
    annulus_consistency,
    atlas_from_json,
    atlas_to_json,
    build_transition,
    certify_cocycles,
    circle_atlas,
    extend_transitions,
    identity_transition,
    perturb_transition,
    tan_chart_pair,
    uniqueness_biholomorphism,
)
from germlie.errors import ExtensionError, StructureError
from germlie.series import TruncatedSeries, scalar_space


@pytest.fixture(scope="module")
def circle3():
    return circle_atlas(3)


@pytest.fixture(scope="module")
def circle3_ext(circle3):
    return extend_transitions(circle3, 0.1)


class TestStructure:
    def test_chart_nesting_enforced(self):
        with pytest.raises(StructureError):
            ChartInterval(0.0, 1.0, 0.0, 1.0, 0.2, 0.8)

    def test_missing_inverse_record_rejected(self):
        tr = identity_transition(0, (0.0, 1.0), 2.0)
        fwd = Transition(0, 1, (0.0, 1.0), tr.pieces)
        charts = (ChartInterval(-0.1, 1.1, 0.0, 1.0, 0.2, 0.8),
                  ChartInterval(-0.1, 1.1, 0.0, 1.0, 0.2, 0.8))
        with pytest.raises(StructureError, match="inverse"):
            RealAtlas(charts, (fwd,))

    def test_transition_requires_real_data(self):
        s = TruncatedSeries.from_coeff_list([(0, 1j)], 0.5, 1.0, scalar_space(), 4)
        with pytest.raises(StructureError):
            Transition(0, 1, (0.0, 1.0), (s,))


class TestExtension:
    def test_identity_transitions_extend_at_any_height(self):
        atlas = circle_atlas(2, overlap_frac=0.3)
        ca = extend_transitions(atlas, 0.3)
        assert all(h == pytest.approx(0.3) for h in ca.heights.values())

    def test_circle_translations_are_exact(self, circle3_ext):
        rep = certify_cocycles(circle3_ext, tol=1e-12)
        assert rep.passed

    def test_margin_table_positive(self, circle3_ext):
        assert all(v > 0 for (_, _, v) in circle3_ext.margin_table)

    def test_insufficient_decay_rejected(self):
        atlas = tan_chart_pair()
        with pytest.raises(ExtensionError, match="convergence-radius"):
            extend_transitions(atlas, 5.0)

    def test_tan_pair_mutual_inverse(self):
        atlas = tan_chart_pair()
        ca = extend_transitions(atlas, 0.12)
        rep = certify_cocycles(ca, tol=1e-10)
        assert rep.passed
        assert rep.extras["worst_residuals"]["inverse"] < 1e-10


class TestCocycles:
    def test_two_chart_atlas_has_vacuous_triples(self):
        atlas = circle_atlas(2, overlap_frac=0.3)
        rep = certify_cocycles(extend_transitions(atlas, 0.1))
        assert rep.passed
        assert rep.extras["triples_checked"] == 0

    def test_three_chart_cover_all_six_triples(self, circle3_ext):
        rep = certify_cocycles(circle3_ext, tol=1e-10)
        assert rep.passed
        assert rep.extras["triples_checked"] == 6

    def test_perturbed_transition_fails_with_matching_residual(self, circle3_ext):
        bad = perturb_transition(circle3_ext, 0, 1, 1e-6)
        rep = certify_cocycles(bad)
        assert not rep.passed
        residuals = [f["residual"] for f in rep.failures]
        assert any(abs(r - 1e-6) < 1e-8 for r in residuals)

    def test_failure_names_witness(self, circle3_ext):
        bad = perturb_transition(circle3_ext, 0, 1, 1e-5)
        rep = certify_cocycles(bad)
        flagged = rep.failures[0]
        assert "witness" in flagged and len(flagged["witness"]) == 2


class TestUniqueness:
    def test_same_atlas_is_identity(self, circle3_ext):
        rep = uniqueness_biholomorphism(circle3_ext, circle3_ext)
        assert rep.passed
        assert rep.extras["worst_real_restriction"] == 0.0

    def test_two_heights_identity_on_smaller_strips(self, circle3, circle3_ext):
        ca2 = extend_transitions(circle3, 0.05)
        rep = uniqueness_biholomorphism(circle3_ext, ca2)
        assert rep.passed
        assert all(h <= 0.05 + 1e-12 for h in rep.extras["strip_heights"].values())

    def test_against_annulus_model(self, circle3_ext):
        # the closed-form model w = exp(iz) identifies glued points
        rep = annulus_consistency(circle3_ext, tol=1e-8)
        assert rep.passed
        assert rep.extras["worst_residual"] < 1e-8

    def test_real_restrictions_anchor_the_identity(self, circle3, circle3_ext):
        ca2 = extend_transitions(circle3, 0.07)
        rep = uniqueness_biholomorphism(circle3_ext, ca2, tol_real=1e-12)
        assert rep.passed
        assert rep.extras["worst_real_restriction"] <= 1e-12


class TestAtlasIO:
    def test_json_roundtrip_and_recertification(self, circle3):
        doc = json.dumps(atlas_to_json(circle3))
        atlas2 = atlas_from_json(json.loads(doc))
        assert len(atlas2.charts) == 3
        rep = certify_cocycles(extend_transitions(atlas2, 0.1))
        assert rep.passed

    def test_schema_fields(self, circle3):
        doc = atlas_to_json(circle3)
        assert set(doc) == {"charts", "transitions"}
        assert {"interval", "U", "V"} <= set(doc["charts"][0])
        assert {"i", "j", "overlap", "series"} <= set(doc["transitions"][0])


class TestBuildTransition:
    def test_tangent_numerics(self):
        tr = build_transition(np.tan, 0, 1, (-0.5, 0.5), n_pieces=5,
                              piece_radius=0.45, degree_bound=30)
        xs = np.linspace(-0.45, 0.45, 41).astype(complex)
        vals = tr.eval(xs)
        assert np.max(np.abs(vals - np.tan(xs.real))) < 1e-12

    def test_grid_inverse_identity_on_strip(self):
        atlas = tan_chart_pair()
        ca = extend_transitions(atlas, 0.12)
        fwd = atlas.between(0, 1)[0]
        zs = (np.linspace(-0.35, 0.35, 20)[:, None]
              + 1j * np.linspace(-0.1, 0.1, 20)[None, :]).ravel()
        mid = fwd.eval(zs)
        back = atlas.eval_change(1, 0, mid)
        ok = ~np.isnan(back.real)
        assert np.count_nonzero(ok) > 0.8 * zs.size
        assert np.max(np.abs(back[ok] - zs[ok])) < 1e-10

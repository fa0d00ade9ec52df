"""Transition measures: construction, projections, analytic functionals, sampling."""

import math
import random

import pytest
from scipy.stats import chi2

from dlwalks import tree as T
from dlwalks.dlgraph import ORIGIN
from dlwalks.errors import NoBracket, NotStochastic, WalkSpecError
from dlwalks.walks import (
    QuadrupleMeasure,
    TreeWalk,
    ZWalk,
    parse_walk_spec,
    sample_step,
    step_support,
    switch_walk,
)

from conftest import random_dl_vertex

LAW_UP = {1: 0.7, -1: 0.3}
LAW_SYM = {1: 0.5, -1: 0.5}


class TestSwitchWalk:
    def test_nearest_neighbour_masses(self):
        qm = switch_walk({1: 1.0}, 2, 2)
        assert qm.per_vertex((0, 1, 1, 0)) == pytest.approx(0.5)
        assert qm.class_mass((0, 1, 1, 0)) == pytest.approx(1.0)

    def test_lazy(self):
        qm = switch_walk({0: 1.0}, 2, 2)
        assert qm.per_vertex((0, 0, 0, 0)) == 1.0

    def test_mixed(self):
        qm = switch_walk(LAW_UP, 2, 2)
        assert qm.per_vertex((0, 1, 1, 0)) == pytest.approx(0.35)
        assert qm.per_vertex((1, 0, 0, 1)) == pytest.approx(0.15)

    def test_asymmetric_colors(self):
        qm = switch_walk({1: 0.4, -2: 0.6}, 2, 3)
        assert qm.per_vertex((0, 1, 1, 0)) == pytest.approx(0.2)
        assert qm.per_vertex((2, 0, 0, 2)) == pytest.approx(0.6 / 9)

    @pytest.mark.parametrize("law", [LAW_UP, LAW_SYM, {2: 0.5, -1: 0.5}, {0: 0.3, 1: 0.7}])
    def test_total_mass(self, law):
        qm = switch_walk(law, 2, 3)
        total = math.fsum(qm.class_mass(quad) for quad in qm.quadruples())
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_rejects_bad_key(self):
        with pytest.raises(WalkSpecError):
            QuadrupleMeasure.make(2, 2, {(0, 1, 0, 0): 0.5})


class TestTransitionProb:
    def test_lazy_mass_at_self(self):
        qm = switch_walk({0: 0.2, 1: 0.8}, 2, 2)
        assert qm.transition_prob(ORIGIN, ORIGIN) == pytest.approx(0.2)

    def test_row_sums_to_one(self, rng):
        qm = switch_walk({2: 0.5, -1: 0.5}, 2, 3)
        for _ in range(5):
            x = random_dl_vertex(rng, 2, 3)
            total = math.fsum(p for _, p in step_support(qm, x))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_constant_on_classes(self):
        qm = switch_walk(LAW_UP, 2, 2)
        probs = {qm.transition_prob(ORIGIN, y) for y, _ in step_support(qm, ORIGIN)
                 if y.pos == 1}
        assert len(probs) == 1


class TestProjections:
    def test_descending_walk(self):
        tw = switch_walk({1: 1.0}, 2, 2).project_to_tree(1)
        assert tw.mass(0, 1) == pytest.approx(1.0)

    def test_lazy_projects_lazy(self):
        tw = switch_walk({0: 1.0}, 2, 2).project_to_tree(1)
        assert tw.mass(0, 0) == 1.0

    def test_projection_diagram_commutes(self):
        for law, q, r in [(LAW_UP, 2, 3), ({2: 0.5, -1: 0.5}, 2, 3), (LAW_SYM, 3, 3)]:
            qm = switch_walk(law, q, r)
            via_tree = qm.project_to_tree(1).project_to_z().as_dict()
            direct = qm.z_law(1).as_dict()
            assert via_tree == pytest.approx(direct)

    def test_side_two_is_reflection(self):
        qm = switch_walk(LAW_UP, 2, 3)
        z1 = qm.z_law(1)
        z2 = qm.z_law(2)
        assert z2.as_dict() == pytest.approx(z1.reflected().as_dict())
        assert qm.project_to_tree(2).project_to_z().as_dict() == pytest.approx(z2.as_dict())
        for c in (-1.0, 0.3, 2.0):
            assert z2.phi(c) == pytest.approx(z1.phi(-c))

    def test_projection_stochastic(self):
        for side in (1, 2):
            tw = switch_walk({2: 0.5, -1: 0.5}, 2, 3).project_to_tree(side)
            assert math.fsum(m for _, m in tw.mu) == pytest.approx(1.0, abs=1e-12)

    def test_z_projection(self):
        tw = TreeWalk.make(2, {(0, 1): 1.0})
        assert tw.project_to_z().as_dict() == {1: 1.0}
        sym = TreeWalk.make(2, {(0, 1): 0.5, (1, 0): 0.5})
        law = sym.project_to_z().as_dict()
        assert law[1] == law[-1] == 0.5


class TestPhiDriftRoots:
    def test_phi_at_zero(self):
        for law in (LAW_UP, LAW_SYM, {2: 0.5, -1: 0.5}):
            assert ZWalk.make(law).phi(0.0) == pytest.approx(1.0, abs=1e-14)

    def test_phi_two_point_formula(self):
        zw = ZWalk.make(LAW_UP)
        for c in (-2.0, -0.5, 0.0, 0.7, 3.0):
            assert zw.phi(c) == pytest.approx(0.7 * math.exp(c) + 0.3 * math.exp(-c))

    def test_phi_midpoint_convexity(self):
        zw = ZWalk.make({2: 0.5, -1: 0.5})
        grid = [c / 4.0 for c in range(-20, 21)]
        for a in grid:
            for b in grid:
                assert zw.phi((a + b) / 2) <= (zw.phi(a) + zw.phi(b)) / 2 + 1e-12

    def test_drift(self):
        assert ZWalk.make(LAW_SYM).drift() == 0.0
        assert ZWalk.make(LAW_UP).drift() == pytest.approx(0.4)

    def test_drift_matches_phi_derivative(self):
        zw = ZWalk.make({2: 0.5, -1: 0.5})
        h = 1e-6
        fd = (zw.phi(h) - zw.phi(-h)) / (2 * h)
        assert fd == pytest.approx(zw.drift(), abs=1e-9)

    @pytest.mark.parametrize("p", [0.6, 0.7, 0.9])
    def test_two_point_root(self, p):
        zw = ZWalk.make({1: p, -1: 1.0 - p})
        assert zw.find_c0() == pytest.approx(math.log((1 - p) / p), abs=1e-10)

    def test_symmetric_has_no_nonzero_root(self):
        assert ZWalk.make(LAW_SYM).find_c0() is None

    def test_root_sign_opposes_drift(self):
        for law in (LAW_UP, {1: 0.3, -1: 0.7}, {2: 0.5, -1: 0.5}, {2: 0.2, -1: 0.8}):
            zw = ZWalk.make(law)
            c0 = zw.find_c0()
            assert c0 is not None
            assert math.copysign(1.0, c0) == -math.copysign(1.0, zw.drift())
            assert abs(zw.phi(c0) - 1.0) < 1e-12

    def test_two_step_golden_root(self):
        zw = ZWalk.make({2: 0.5, -1: 0.5})
        assert zw.find_c0() == pytest.approx(math.log((math.sqrt(5) - 1) / 2), abs=1e-10)

    def test_no_bracket_reported(self):
        # the root would sit near ln(1e30) = 69, outside the search range
        with pytest.raises(NoBracket):
            ZWalk.make({1: 1e-30, -1: 1.0 - 1e-30}).find_c0()

    def test_irreducibility(self):
        assert ZWalk.make(LAW_UP).is_irreducible()
        assert not ZWalk.make({1: 1.0}).is_irreducible()
        assert not ZWalk.make({2: 0.5, -2: 0.5}).is_irreducible()


class TestMoments:
    def test_tree_first_moment(self):
        tw = switch_walk(LAW_UP, 2, 2).project_to_tree(1)
        assert tw.moment(1.0) == pytest.approx(1.0)

    def test_dl_moments_nearest_neighbour(self):
        qm = switch_walk(LAW_UP, 2, 2)
        assert qm.moment(1.0) == pytest.approx(1.0)  # every step moves distance 1
        assert qm.moment(2.5) == pytest.approx(1.0)
        assert qm.exp_moment(0.0) == pytest.approx(2.0)  # both tree factors move

    def test_exp_moment_weights_positive_side(self):
        qm = switch_walk(LAW_UP, 2, 2)
        c = 0.5
        expect = 0.7 * (math.exp(c) + 1.0) + 0.3 * (1.0 + math.exp(-c))
        assert qm.exp_moment(c) == pytest.approx(expect)


class TestConjugation:
    def test_zero_is_identity(self):
        tw = switch_walk(LAW_UP, 2, 2).project_to_tree(1)
        assert tw.conjugate(0.0).mu == tw.mu

    def test_requires_root(self):
        tw = switch_walk(LAW_UP, 2, 2).project_to_tree(1)
        with pytest.raises(NotStochastic):
            tw.conjugate(0.5)

    def test_flips_drift_sign(self):
        tw = switch_walk({1: 0.3, -1: 0.7}, 2, 2).project_to_tree(1)
        c0 = tw.project_to_z().find_c0()
        assert c0 > 0
        sharp = tw.conjugate(c0)
        assert sharp.project_to_z().drift() > 0
        assert math.fsum(m for _, m in sharp.mu) == pytest.approx(1.0, abs=1e-12)

    def test_double_conjugation_roundtrip(self):
        tw = switch_walk({1: 0.3, -1: 0.7}, 2, 2).project_to_tree(1)
        c0 = tw.project_to_z().find_c0()
        back = tw.conjugate(c0).conjugate(-c0)
        for kr, m in tw.mu:
            assert dict(back.mu)[kr] == pytest.approx(m, abs=1e-12)

    def test_quadruple_conjugation(self):
        qm = switch_walk({1: 0.3, -1: 0.7}, 2, 2)
        c0 = qm.z_law(1).find_c0()
        sharp = qm.conjugate(c0)
        total = math.fsum(sharp.class_mass(quad) for quad in sharp.quadruples())
        assert total == pytest.approx(1.0, abs=1e-12)
        assert sharp.z_law(1).drift() > 0


class TestSampling:
    def test_lazy_stays_put(self):
        qm = switch_walk({0: 1.0}, 2, 2)
        rng = random.Random(1)
        assert sample_step(qm, ORIGIN, rng) == ORIGIN

    def test_seed_determinism(self):
        qm = switch_walk({2: 0.5, -1: 0.5}, 2, 3)
        xs = [sample_step(qm, ORIGIN, random.Random(42)) for _ in range(5)]
        assert len(set(xs)) == 1

    @pytest.mark.parametrize("walk_builder", [
        lambda: switch_walk(LAW_UP, 2, 2),
        lambda: switch_walk({2: 0.5, -1: 0.5}, 2, 3).project_to_tree(1),
    ])
    def test_one_step_law_chi_square(self, walk_builder):
        walk = walk_builder()
        x0 = ORIGIN if isinstance(walk, QuadrupleMeasure) else T.ROOT
        support = step_support(walk, x0)
        expected = {y: p for y, p in support}
        counts = dict.fromkeys(expected, 0)
        n = 100_000
        rng = random.Random(7)
        for _ in range(n):
            counts[sample_step(walk, x0, rng)] += 1
        stat = math.fsum((counts[y] - n * p) ** 2 / (n * p) for y, p in expected.items())
        pval = chi2.sf(stat, len(expected) - 1)
        assert pval > 0.001


class TestWalkSpec:
    def test_parse_switch_walk(self):
        spec = parse_walk_spec({"q": 2, "r": 3, "family": "switch-walk",
                                "mu_tilde": {"1": 0.7, "-1": 0.3}})
        assert spec.q == 2 and spec.r == 3
        assert spec.measure.per_vertex((0, 1, 1, 0)) == pytest.approx(0.35)

    def test_parse_quadruples(self):
        spec = parse_walk_spec({"q": 2, "r": 2, "quadruples": [
            {"k1": 0, "l1": 1, "k2": 1, "l2": 0, "per_vertex_prob": 0.35},
            {"k1": 1, "l1": 0, "k2": 0, "l2": 1, "per_vertex_prob": 0.15},
        ]})
        assert spec.measure.per_vertex((0, 1, 1, 0)) == pytest.approx(0.35)

    @pytest.mark.parametrize("obj, key", [
        ({"r": 2, "mu_tilde": {"1": 1.0}}, "q"),
        ({"q": 2, "r": 1, "mu_tilde": {"1": 1.0}}, "r"),
        ({"q": 2, "r": 2, "mu_tilde": {"x": 1.0}}, "mu_tilde.'x'"),
        ({"q": 2, "r": 2, "mu_tilde": {"1": 0.4}}, "mu_tilde"),
        ({"q": 2, "r": 2, "mu_tilde": {"1": -0.5, "-1": 1.5}}, "mu_tilde.'1'"),
        ({"q": 2, "r": 2, "quadruples": [{"k1": 0, "l1": 1, "k2": 0, "l2": 1,
                                          "per_vertex_prob": 1.0}]}, "quadruples"),
        ({"q": 2, "r": 2}, "mu_tilde"),
    ])
    def test_errors_name_offending_key(self, obj, key):
        with pytest.raises(WalkSpecError) as err:
            parse_walk_spec(obj)
        assert key in str(err.value)

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import complete_intersection, p1xp1_11, product, projective, standard
from vgitsod.git import Character, GitProblem, quotient_stacky_fan, secondary_fan
from vgitsod.glsm import (CiProblem, Glsm, build_ci_glsm, canonical_character, ci_from_glsm,
                          cy_classification, is_geometric, kernel_restriction, kuznetsov_chambers,
                          monomial_of_weight, projection_check, q_ratio, stacky_fan_isomorphism,
                          total_space_fan)
from vgitsod.lattice import FinAbGroup
from vgitsod.visitor import VisitorInput, build_visitor_glsm


class TestGlsmData:
    def test_chi_must_be_surjective(self):
        git = GitProblem.from_weights([(1, 0), (0, 2)])
        with pytest.raises(ValueError, match="surjective"):
            Glsm(git, Character((0, 2)), Character((1,)))

    def test_potential_weight_is_checked(self):
        g = standard(4, 3)
        with pytest.raises(ValueError, match="weight"):
            Glsm(g.gamma_git, g.chi, g.theta, [(1, 0, 0, 0, 0, 0)])
        # x0^3 * u has weight chi
        Glsm(g.gamma_git, g.chi, g.theta, [(3, 0, 0, 0, 0, 1)])


class TestKernelRestriction:
    def test_hypersurface(self):
        kr = kernel_restriction(standard(3, 4))
        assert kr.kernel_group == FinAbGroup(1, ())
        assert [w.free_part for w in kr.restricted_weights] == [(1,)] * 4 + [(-4,)]

    def test_trivial_kernel(self):
        g = Glsm(GitProblem.from_weights([(1,), (0,)]), Character((1,)), Character(()))
        kr = kernel_restriction(g)
        assert kr.kernel_group.free_rank == 0
        assert all(w.free_part == () for w in kr.restricted_weights)

    def test_visitor_kernel(self):
        inp = VisitorInput(projective([1] * 6), (1,), [(-2,), (-2,)])
        kr = kernel_restriction(build_visitor_glsm(inp).glsm)
        assert kr.kernel_group == FinAbGroup(2, ())

    def test_chi_not_a_coordinate_vector(self):
        git = GitProblem.from_weights([(1, 1), (1, 1), (0, 1), (-2, -1)])
        g = Glsm(git, Character((1, 1)), Character((1,)))
        kr = kernel_restriction(g)
        # restriction kills chi and the splitting maps onto it
        assert kr.restrict(g.chi).free_part == (0,)
        assert sum(a * b for a, b in zip(kr.splitting, g.chi.free_part)) == 1
        for c, w in zip(git.weights, kr.restricted_weights):
            assert kr.restrict(c) == w


class TestCanonicalCharacter:
    def test_cubic_fourfold(self):
        assert canonical_character(standard(5, 3)).theta_K.free_part == (-3,)

    def test_calabi_yau_weights(self):
        git = GitProblem.from_weights([(1, 0), (1, 0), (-2, 1)])
        cc = canonical_character(Glsm(git, Character((0, 1)), Character((1,))))
        assert cc.theta_K.free_part == (0,)

    def test_p1xp1(self):
        cc = canonical_character(build_ci_glsm(p1xp1_11()))
        assert cc.theta_K.free_part == (-1, -1)
        assert cc.theta_antiK.free_part == (1, 1)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 6), st.lists(st.integers(1, 4), min_size=1, max_size=3))
    def test_projective_complete_intersections(self, n, degrees):
        g = build_ci_glsm(complete_intersection(n, degrees))
        assert canonical_character(g).theta_K.free_part == (sum(degrees) - n - 1,)


class TestKuznetsovChambers:
    def test_cubic_fourfold(self):
        kc = kuznetsov_chambers(standard(5, 3))
        assert [c.interior_point for c, _ in kc.kuznetsov] == [(-1,)]
        assert [c.interior_point for c, _ in kc.anti_kuznetsov] == [(1,)]
        for c, p in kc.kuznetsov + kc.anti_kuznetsov:
            assert c.cone.contains_in_relative_interior(p)

    def test_quintic(self):
        kc = kuznetsov_chambers(standard(4, 5))
        assert kc.theta_K.free_part == (0,)
        assert len(kc.kuznetsov) == 2

    def test_p1xp1(self):
        g = build_ci_glsm(p1xp1_11())
        kc = kuznetsov_chambers(g)
        assert len(kc.kuznetsov) == 2
        hyps = secondary_fan(kernel_restriction(g).git).hyperplanes
        for c, p in kc.kuznetsov:
            assert c.cone.contains((-1, -1))
            assert c.cone.contains_in_relative_interior(p)
            # the perturbation does not cross a hyperplane that theta_K is off
            for h in hyps:
                s = sum(a * b for a, b in zip(h, (-1, -1)))
                if s:
                    assert (s > 0) == (sum(a * b for a, b in zip(h, p)) > 0)


class TestGeometric:
    def test_geometric_phase(self):
        rep = is_geometric(standard(5, 3))
        assert rep.geometric and rep.bundle_coordinates == (6,)

    def test_landau_ginzburg_phase(self):
        g = standard(5, 3)
        rep = is_geometric(Glsm(g.gamma_git, g.chi, Character((-1,)), g.potential))
        assert not rep.geometric
        assert [name for name, ok, _ in rep.clauses if not ok] == ["bundle"]

    def test_zero_potential(self):
        g = standard(5, 3)
        rep = is_geometric(Glsm(g.gamma_git, g.chi, g.theta, ()))
        assert [name for name, ok, _ in rep.clauses if not ok] == ["pairing"]


class TestCompleteIntersections:
    def test_two_quadrics(self):
        g = build_ci_glsm(complete_intersection(5, [2, 2]))
        assert [w.free_part for w in kernel_restriction(g).restricted_weights] == [(1,)] * 6 + [(-2,)] * 2

    def test_p1xp1(self):
        g = build_ci_glsm(p1xp1_11())
        ws = [w.free_part for w in kernel_restriction(g).restricted_weights]
        assert ws == [(1, 0), (1, 0), (0, 1), (0, 1), (-1, -1)]

    def test_no_divisors(self):
        g = build_ci_glsm(CiProblem(projective([1, 1, 1]), (1,), []))
        assert g.potential == ()
        assert [w.free_part for w in kernel_restriction(g).restricted_weights] == [(1,)] * 3

    def test_non_nef_divisor(self):
        with pytest.raises(ValueError, match="non-nef"):
            build_ci_glsm(CiProblem(product(1, 1), (1, 1), [(1, 0, -1, 0)]))

    def test_round_trip_through_glsm(self):
        ci = complete_intersection(5, [3])
        back = ci_from_glsm(build_ci_glsm(ci))
        assert back.classes == ci.classes

    def test_monomial_search(self):
        G = FinAbGroup(1, ())
        ws = [Character((2,)), Character((3,))]
        assert monomial_of_weight(Character((7,)), ws, G)[0] is True
        assert monomial_of_weight(Character((1,)), ws, G)[0] is False


class TestTotalSpaceFan:
    def test_line_bundle_over_projective_plane(self):
        sf = total_space_fan(complete_intersection(2, [3]))
        # u_rho + a_rho e_fibre, plus the fibre ray
        assert sf.images[0][-1] == 3 and all(v[-1] == 0 for v in sf.images[1:3])
        assert sf.images[3] == (0, 0, 1)

    def test_no_divisors(self):
        ci = CiProblem(projective([1, 1, 1]), (1,), [])
        assert total_space_fan(ci) == quotient_stacky_fan(projective([1, 1, 1]), (1,))

    def test_p1xp1(self):
        sf = total_space_fan(p1xp1_11())
        assert len(sf.ray_indices) == 5
        assert len(sf.cones) == 4
        assert all(4 in T for T in sf.cones)

    @pytest.mark.parametrize("ci", [complete_intersection(5, [2, 2]), p1xp1_11(),
                                    CiProblem(projective([1, 1, 1, 2, 3]), (1,), [(0, 0, 0, 0, 2)])])
    def test_matches_glsm_quotient(self, ci):
        g = build_ci_glsm(ci)
        built = quotient_stacky_fan(kernel_restriction(g).git, g.theta.free_part)
        assert stacky_fan_isomorphism(total_space_fan(ci), built) is not None


class TestProjection:
    def test_cubic(self):
        rep = projection_check(complete_intersection(5, [3]))
        assert rep.commutes
        assert rep.bundle_images[0].free_part == (-3,)

    def test_no_divisors(self):
        assert projection_check(CiProblem(projective([1, 1]), (1,), [])).commutes

    def test_bidegree(self):
        rep = projection_check(CiProblem(product(1, 1), (1, 1), [(1, 0, 2, 0)]))
        assert rep.bundle_images[0].free_part == (-1, -2)
        assert rep.commutes


class TestCalabiYau:
    def test_q_ratio(self):
        assert q_ratio(Character((3,)), projective([1] * 6)) == Fraction(1, 2)
        assert q_ratio(Character((5,)), projective([1] * 5)) == 1
        assert q_ratio(Character((1, 2)), product(1, 1)) is None

    def test_cubic_fourfold(self):
        cy = cy_classification(complete_intersection(5, [3]))
        assert (cy.q, cy.label, cy.cartier) == (Fraction(1, 2), "K-CY", True)

    def test_quintic(self):
        cy = cy_classification(complete_intersection(4, [5]))
        assert cy.label == "both"
        assert {"K-fractional-CY", "antiK-fractional-CY"} <= set(cy.labels)

    def test_degree_seven(self):
        cy = cy_classification(complete_intersection(4, [7]))
        assert (cy.q, cy.label) == (Fraction(7, 5), "antiK-fractional-CY")

    def test_needs_one_divisor(self):
        with pytest.raises(ValueError, match="single divisor"):
            cy_classification(complete_intersection(5, [2, 2]))

    def test_needs_fano_base(self):
        # Hirzebruch surface F_3: -K = (-1, 2) is not nef
        f3 = GitProblem.from_weights([(1, 0), (1, 0), (-3, 1), (0, 1)])
        with pytest.raises(ValueError, match="Fano"):
            cy_classification(CiProblem(f3, (1, 1), [(0, 0, 0, 1)]))

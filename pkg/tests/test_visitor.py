import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import projective
from vgitsod.git import GitProblem, secondary_fan
from vgitsod.glsm import kernel_restriction
from vgitsod.visitor import (VisitorInput, build_visitor_glsm, fano_host_check, host_report,
                             positive_triple, visitor_sod)

P2 = projective([1, 1, 1])
P5 = projective([1] * 6)


def two_quadrics():
    return VisitorInput(P5, (1,), [(-2,), (-2,)])


class TestBuild:
    def test_two_quadrics(self):
        vg = build_visitor_glsm(two_quadrics())
        g = vg.glsm
        # middle coordinates carry G-weight -2, the last coordinate only the G_m weights
        assert [g.gamma_git.weights[i].free_part for i in vg.middle] == [(-2, 1, 0), (-2, 1, 0)]
        assert g.gamma_git.weights[vg.last].free_part == (0, -1, 1)
        assert all(g.term_weight(t) == g.chi for t in g.potential)
        assert vg.theta_plus[-1] == 1 and vg.theta_minus[-1] == -1
        assert vg.phase_plus_ok() and vg.phase_minus_ok()

    def test_phases_are_generic(self):
        vg = build_visitor_glsm(two_quadrics())
        fan = secondary_fan(vg.kernel_git)
        assert fan.chamber_containing(vg.theta_plus) is not None
        assert fan.chamber_containing(vg.theta_minus) is not None

    def test_missing_section(self):
        with pytest.raises(ValueError, match="no section"):
            build_visitor_glsm(VisitorInput(P2, (1,), [(1,), (-1,)]))

    def test_needs_w(self):
        with pytest.raises(ValueError):
            build_visitor_glsm(VisitorInput(P2, (1,), []))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 4), st.lists(st.integers(1, 3), min_size=1, max_size=3))
    def test_fixed_locus_is_the_base(self, n, degrees):
        vg = build_visitor_glsm(VisitorInput(projective([1] * (n + 1)), (1,), [(-d,) for d in degrees]))
        assert vg.fixed == tuple(range(n + 1))
        assert kernel_restriction(vg.glsm).kernel_group.free_rank == 2


class TestPositiveTriple:
    def test_sufficient(self):
        v = positive_triple(P5, [(-2,), (-2,)], (1,))
        assert v and v.method == "sufficient" and v.exact

    def test_ample_w_coordinate(self):
        v = positive_triple(P2, [(1,)], (1,))
        assert not v and v.method == "exact"

    def test_empty(self):
        assert positive_triple(P5, [], (1,))

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(-3, 3), min_size=1, max_size=3))
    def test_sufficient_implies_exact(self, ws):
        v = positive_triple(P2, [(w,) for w in ws], (1,))
        if v.sufficient:
            assert v.exact
        # on projective space a semi-invariant of positive degree avoids the x_i only
        # through a W coordinate of positive weight; trivial summands are harmless
        assert v.exact == all(w <= 0 for w in ws)


class TestLedger:
    def test_two_quadrics(self):
        led = visitor_sod(build_visitor_glsm(two_quadrics()))
        assert (led.copies, led.base_rank, led.total_exceptional) == (1, 6, 6)
        assert led.describe() == "D^b(Y) = <D^b(X) (x) O_rel(0), D^b(Z)>"

    def test_three_weights_over_the_plane(self):
        led = visitor_sod(build_visitor_glsm(VisitorInput(P2, (1,), [(-1,)] * 3)))
        assert (led.copies, led.total_exceptional) == (2, 6)

    def test_one_weight(self):
        led = visitor_sod(build_visitor_glsm(VisitorInput(P2, (1,), [(-1,)])))
        assert led.copies == 0 and led.blocks == ()
        assert led.describe() == "D^b(Y) = <D^b(Z)>"

    def test_noncompact_base_is_a_lower_bound(self):
        base = GitProblem.from_weights([(1,), (1,), (-5,)])
        led = visitor_sod(build_visitor_glsm(VisitorInput(base, (1,), [(-1,), (-1,)])))
        assert led.base_rank is None and led.lower_bound


class TestHost:
    def test_two_quadrics(self):
        h = fano_host_check(build_visitor_glsm(two_quadrics()))
        assert h.passed and h.fast_path

    def test_one_weight(self):
        h = fano_host_check(build_visitor_glsm(VisitorInput(P2, (1,), [(-1,)])))
        assert h.nef and not h.dimension and not h.passed

    def test_non_fano_base(self):
        base = GitProblem.from_weights([(1,), (1,), (-5,)])
        h = fano_host_check(build_visitor_glsm(VisitorInput(base, (1,), [(-1,), (-1,)])))
        assert not h.nef and not h.passed

    def test_report(self):
        rep = host_report(two_quadrics())
        assert rep.sod.total_exceptional == 6 and rep.fano_host and rep.positive_triple

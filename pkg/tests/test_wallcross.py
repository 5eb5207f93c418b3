import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import complete_intersection, nef_pair, p1xp1_11, projective, standard
from vgitsod.git import secondary_fan
from vgitsod.glsm import CiProblem, build_ci_glsm, kernel_restriction, kuznetsov_chambers
from vgitsod.lattice import dot
from vgitsod.wallcross import (Exceptional, PathError, SideUndefined, StackBlock, assemble_sod,
                               crossing_event, independence_audit, plan_path, verify_plan)


def fan_of(glsm):
    return secondary_fan(kernel_restriction(glsm).git)


def kuznetsov_target(glsm, fan, which=0):
    return kuznetsov_chambers(glsm, fan).kuznetsov[which][1]


class TestPlanPath:
    def test_hypersurface_crosses_the_origin(self):
        g = standard(5, 3)
        fan = fan_of(g)
        plan = plan_path(fan, fan.chamber_containing((1,)), kuznetsov_target(g, fan))
        assert len(plan.crossings) == 1
        assert fan.walls[plan.crossings[0].wall].cone.dim == 0
        assert verify_plan(fan, plan)

    def test_target_in_source(self):
        g = standard(5, 3)
        fan = fan_of(g)
        plan = plan_path(fan, fan.chamber_containing((1,)), (7,))
        assert plan.crossings == () and plan.chambers == (fan.chamber_containing((1,)).index,)

    def test_p1xp1_single_crossing(self):
        g = build_ci_glsm(p1xp1_11())
        fan = fan_of(g)
        for which in (0, 1):
            plan = plan_path(fan, fan.chamber_containing((1, 1)), kuznetsov_target(g, fan, which))
            assert len(plan.crossings) == 1
            ray = fan.walls[plan.crossings[0].wall].cone.rays
            assert ray in (((1, 0),), ((0, 1),))

    def test_target_on_a_wall_is_rejected(self):
        g = build_ci_glsm(p1xp1_11())
        fan = fan_of(g)
        with pytest.raises(PathError) as info:
            plan_path(fan, fan.chamber_containing((1, 1)), (-1, -1), max_retries=5)
        assert info.value.cone is not None

    def test_target_outside_support(self):
        fan = secondary_fan(projective([1, 1]))
        with pytest.raises(ValueError, match="support"):
            plan_path(fan, fan.chambers[0], (-1,))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 1000), st.tuples(st.integers(-9, 9), st.integers(-9, 9)))
    def test_plans_are_certified(self, seed, target):
        g = build_ci_glsm(nef_pair(1, 1))
        fan = fan_of(g)
        if not fan.support.contains(target) or any(dot(h, target) == 0 for h in fan.hyperplanes):
            return
        plan = plan_path(fan, fan.chamber_containing(g.theta.free_part), target, seed)
        assert verify_plan(fan, plan)
        assert fan.chambers[plan.chambers[-1]].cone.contains(target)
        ts = [c.t for c in plan.crossings]
        assert ts == sorted(ts) and len(set(ts)) == len(ts)


class TestCrossingEvent:
    def test_cubic_fourfold_origin(self):
        g = standard(5, 3)
        fan = fan_of(g)
        pos, neg = fan.chamber_containing((1,)).index, fan.chamber_containing((-1,)).index
        ev = crossing_event(g, fan, 0, (pos, neg))
        assert abs(ev.lam[0]) == 1 and ev.r == 3
        assert dot(ev.lam, (-1,)) > 0 > dot(ev.lam, (1,))
        assert ev.fixed == () and ev.wall_stack.descriptor == "point"
        assert ev.blocks == (Exceptional(3, 0, 3, 1),)

    def test_quintic_origin(self):
        g = standard(4, 5)
        fan = fan_of(g)
        ev = crossing_event(g, fan, 0, (0, 1))
        assert ev.r == 0 and ev.blocks == () and ev.certificates is None

    def test_p1xp1_ray_wall(self):
        g = build_ci_glsm(p1xp1_11())
        fan = fan_of(g)
        geo = fan.chamber_containing((1, 1)).index
        wall = next(w for w in fan.walls if w.cone.rays == ((1, 0),))
        dst = next(c for c in wall.chambers if c != geo)
        ev = crossing_event(g, fan, wall, (geo, dst))
        assert ev.lam in ((0, 1), (0, -1)) and ev.r == 1
        assert ev.fixed == (0, 1)
        assert ev.wall_stack.rank == 2
        assert ev.blocks == (Exceptional(2, wall.index, 1, 2),)

    def test_wrong_direction(self):
        g = standard(5, 3)
        fan = fan_of(g)
        with pytest.raises(ValueError):
            crossing_event(g, fan, 0, (0, 0))


class TestCertificates:
    def test_two_quadrics(self):
        g = build_ci_glsm(complete_intersection(5, [2, 2]))
        led = assemble_sod(g)
        (ev,) = led.events
        c = ev.certificates
        assert c.ample_disjoint and c.strongly_convex and c.potential_vanishes
        assert led.total_exceptional == 2

    def test_nef_divisors(self):
        led = assemble_sod(build_ci_glsm(nef_pair(2, 2)))
        assert any(not e.certificates.potential_vanishes for e in led.events)
        assert all(isinstance(b, StackBlock) for b in led.blocks)
        assert all(b.reason for b in led.blocks)

    def test_nef_divisors_on_p1xp1_cross_no_wall(self):
        # theta_K = 0 already lies in the closed geometric chamber
        g = build_ci_glsm(nef_pair(1, 2))
        led = assemble_sod(g)
        assert led.events == () and led.blocks == ()


class TestAssemble:
    def test_cubic_fourfold(self):
        led = assemble_sod(standard(5, 3), labels=("K-CY",))
        assert led.total_exceptional == 3 and not led.lower_bound
        assert led.residual.labels == ("K-CY",)
        assert led.describe() == "D^b(Z) = <K, E x3 [wall 0]>"

    def test_cubic_threefold(self):
        assert assemble_sod(standard(4, 3)).total_exceptional == 2

    def test_sextic_index_tracks_weights(self):
        # index = sum of weights - degree: 8 - 6 on P(1,1,1,2,3), 7 - 6 on P(1,1,1,1,3)
        for weights, t in (([1, 1, 1, 2, 3], 2), ([1, 1, 1, 1, 3], 1)):
            ci = CiProblem(projective(weights), (1,), [(0, 0, 0, 0, 2)])
            assert assemble_sod(build_ci_glsm(ci)).total_exceptional == t

    def test_anti_side(self):
        led = assemble_sod(standard(2, 4), "-K")
        assert led.total_exceptional == 1
        assert led.describe().startswith("-K = <D^b(Z)")

    def test_undefined_side(self):
        g = build_ci_glsm(CiProblem(projective([1, 1, 1]), (1,), []))
        with pytest.raises(SideUndefined):
            assemble_sod(g, "K")

    def test_bad_side(self):
        with pytest.raises(ValueError):
            assemble_sod(standard(5, 3), "X")

    def test_p1xp1_residual_rank(self):
        g = build_ci_glsm(p1xp1_11())
        for m in (c.index for c, _ in kuznetsov_chambers(g).kuznetsov):
            led = assemble_sod(g, target_chamber=m)
            assert 2 - led.total_exceptional == 0

    @pytest.mark.parametrize("seed", [0, 1, 5, 99])
    def test_seed_independence(self, seed):
        assert assemble_sod(standard(5, 3), seed=seed).total_exceptional == 3


class TestAudit:
    def test_quintic(self):
        rep = independence_audit(standard(4, 5))
        assert len(rep.chambers) == 2
        assert rep.passed
        assert all(r == 0 for _, _, walls, _ in rep.connections for _, r in walls)

    def test_p1xp1(self):
        rep = independence_audit(build_ci_glsm(p1xp1_11()))
        assert rep.passed and rep.totals_agree
        assert {t for _, _, t, _ in rep.totals} == {2}

    def test_unique_chamber(self):
        rep = independence_audit(standard(5, 3))
        assert rep.connections == () and rep.passed

"""A (1,1) curve on P1 x P1: two Kuznetsov chambers, two paths, same count.

theta_K = (-1,-1) sits on the ray between two chambers.  Each path leaves the
geometric chamber through a different ray wall whose fixed locus is a P1, so
each contributes rank K_0(P1) = 2 exceptional objects.  The audit checks that
the two Kuznetsov chambers meet along a wall where theta_K pairs to zero.
"""

from vgitsod import CiProblem, GitProblem, assemble_sod, build_ci_glsm, independence_audit
from vgitsod.cli import export_dot
from vgitsod.glsm import canonical_character, kernel_restriction, kuznetsov_chambers
from vgitsod.git import secondary_fan

base = GitProblem.from_weights([(1, 0), (1, 0), (0, 1), (0, 1)])
glsm = build_ci_glsm(CiProblem(base, (1, 1), [(1, 0, 1, 0)]))
fan = secondary_fan(kernel_restriction(glsm).git)

for chamber, target in kuznetsov_chambers(glsm, fan).kuznetsov:
    ledger = assemble_sod(glsm, target_chamber=chamber.index, fan=fan)
    walls = [(ev.wall, [fan.git.names[i] for i in ev.fixed]) for ev in ledger.events]
    print(f"to chamber {chamber.index} via {walls}: {ledger.describe()}")

audit = independence_audit(glsm)
print("audit passed:", audit.passed, "totals agree:", audit.totals_agree)
print(export_dot(fan, theta_K=canonical_character(glsm).theta_K.free_part))

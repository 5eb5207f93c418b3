"""Nef but not ample divisors: the engine refuses to claim exceptional objects.

Divisors (2,0) and (0,2) on P2 x P2.  The crossings toward theta_K fail the
convexity and potential certificates, so their blocks stay as wall-stack
categories and the count is reported as a lower bound.
"""

from vgitsod import CiProblem, GitProblem, assemble_sod, build_ci_glsm

rows = [(1, 0)] * 3 + [(0, 1)] * 3
ci = CiProblem(GitProblem.from_weights(rows), (1, 1), [(2, 0, 0, 0, 0, 0), (0, 0, 0, 2, 0, 0)])
ledger = assemble_sod(build_ci_glsm(ci))
for ev in ledger.events:
    print(f"wall {ev.wall}: r={ev.r}, failed: {', '.join(ev.certificates.failures) or 'none'}")
print(ledger.describe())
print("lower bound:", ledger.lower_bound)

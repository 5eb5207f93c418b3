"""Two quadrics in P5 as a Fano visitor.

The host is a hypersurface in the projective bundle P(O(2) + O(2)) over P5.
Crossing along the middle G_m contributes dim W - 1 = 1 copy of D^b(P5).
"""

from vgitsod import GitProblem, VisitorInput, host_report

inp = VisitorInput(GitProblem.from_weights([(1,)] * 6), (1,), [(-2,), (-2,)])
rep = host_report(inp)
print(rep.sod.describe())
print("exceptional objects:", rep.sod.total_exceptional)
print("host check passed:", rep.fano_host.passed)
print("positive triple:", bool(rep.positive_triple), "via", rep.positive_triple.method)

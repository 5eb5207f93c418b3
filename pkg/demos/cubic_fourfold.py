"""Cubic fourfold: three exceptional objects and a Calabi-Yau residual.

The hypersurface GLSM has weights (1 x 6, -3) for G_m.  Its secondary fan is
the real line split at the origin; walking from the geometric chamber to the
chamber of theta_K = -3 crosses one wall, and the pairing r = 3 counts the
exceptional objects.
"""

from vgitsod import CiProblem, GitProblem, assemble_sod, build_ci_glsm, cy_classification
from vgitsod.glsm import canonical_character

p5 = GitProblem.from_weights([(1,)] * 6)
ci = CiProblem(p5, (1,), [(3, 0, 0, 0, 0, 0)])
glsm = build_ci_glsm(ci)

print("theta_K:", canonical_character(glsm).theta_K.free_part)
cy = cy_classification(ci)
ledger = assemble_sod(glsm, "K", labels=cy.labels)
for ev in ledger.events:
    print(f"crossed wall {ev.wall}: lambda={ev.lam} r={ev.r} stack={ev.wall_stack.descriptor}")
print(ledger.describe())
print(f"q = {cy.q}, label {cy.label}")

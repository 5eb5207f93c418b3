"""Exact toric GIT, GLSM wall crossing and semiorthogonal-decomposition bookkeeping."""

from .lattice import (FinAbGroup, IntMatrix, SmithDecomposition, cokernel, det, hermite_normal_form,
                      kernel_basis, smith_normal_form, solve_integer)
from .polyhedral import (Fan, Hyperplane, Membership, RationalCone, chamber_arrangement,
                         cone_membership, double_description, faces, relative_interior_point)
from .git import (Chamber, Character, GitProblem, IrrelevantData, SecondaryFan, StackyFan,
                  completeness_and_properness, gale_dual, irrelevant_data, is_cartier, nef_ample,
                  quotient_stacky_fan, rank_k0, secondary_fan)
from .glsm import (CanonicalCharacters, CiProblem, GenericSection, Glsm, KernelRestriction,
                   build_ci_glsm, canonical_character, ci_from_glsm, cy_classification, is_geometric,
                   kernel_restriction, kuznetsov_chambers, projection_check, q_ratio,
                   stacky_fan_isomorphism, total_space_fan)
from .wallcross import (CrossingEvent, Exceptional, PathError, PathPlan, Residual, SideUndefined,
                        SodLedger, StackBlock, assemble_sod, crossing_event, independence_audit,
                        plan_path, verify_plan, wall_certificates)
from .visitor import (VisitorGlsm, VisitorInput, build_visitor_glsm, fano_host_check, host_report,
                      positive_triple, visitor_sod)
from .problem import ProblemError, ProblemFile, parse, serialize

__version__ = "0.1.0"

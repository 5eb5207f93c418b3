"""Hypersurfaces in projective bundles as hosts for complete intersections.

For X = V//G and a representation W = sum C(w_j), the group G x G_m x G_m acts on
V x W x C; the middle factor scales W and anti-scales C, the last factor scales C.
The potential is p * sum_j y_j f_j with f_j generic of G-weight -w_j.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .git import (Character, GitProblem, StackyFan, irrelevant_data, quotient_stacky_fan, rank_k0,
                  secondary_fan)
from .glsm import GenericSection, Glsm, canonical_character, kernel_restriction, monomial_of_weight
from .lattice import FinAbGroup, dot

__all__ = [
    "VisitorInput",
    "VisitorGlsm",
    "TripleVerdict",
    "VisitorLedger",
    "HostCheck",
    "HostReport",
    "build_visitor_glsm",
    "positive_triple",
    "visitor_sod",
    "fano_host_check",
    "host_report",
]


@dataclass(frozen=True)
class VisitorInput:
    base: GitProblem
    theta: tuple
    w_weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(self.theta))
        G = self.base.group
        ws = tuple(w.reduced(G) if isinstance(w, Character)
                   else Character(tuple(w), (0,) * len(G.invariant_factors)).reduced(G)
                   for w in self.w_weights)
        object.__setattr__(self, "w_weights", ws)

    @property
    def r(self) -> int:
        return len(self.w_weights)

    def chamber(self):
        c = secondary_fan(self.base).chamber_containing(self.theta)
        if c is None:
            raise ValueError("base character is not in the interior of a chamber")
        return c

    @property
    def fano(self) -> bool:
        return self.chamber().cone.contains_in_relative_interior(self.base.det_character().free_part)


@dataclass(frozen=True)
class VisitorGlsm:
    input: VisitorInput
    glsm: Glsm
    theta_plus: tuple
    theta_minus: tuple
    lam: tuple
    fixed: tuple
    middle: tuple
    last: int

    @property
    def kernel_git(self) -> GitProblem:
        return kernel_restriction(self.glsm).git

    def phase_plus_ok(self) -> bool:
        """Irrelevant data at theta_+ is (base data) x (one middle coordinate); C never unstable."""
        base = irrelevant_data(self.input.base, self.input.theta).subsets
        irr = irrelevant_data(self.kernel_git, self.theta_plus).subsets
        expected = {S | {j} for S in base for j in self.middle}
        return set(irr) == expected

    def phase_minus_ok(self) -> bool:
        base = irrelevant_data(self.input.base, self.input.theta).subsets
        irr = irrelevant_data(self.kernel_git, self.theta_minus).subsets
        return set(irr) == {S | {self.last} for S in base}


def _generic(git: GitProblem, theta: tuple) -> bool:
    try:
        subsets = irrelevant_data(git, theta).subsets
    except ValueError:
        return False
    from .lattice import rank
    return all(len(S) == git.k and rank([git.free_weights[i] for i in S], git.k) == git.k
               for S in subsets)


def _stable_scale(kgit: GitProblem, theta: tuple, sign: int) -> int:
    """Least power of two N with (N theta, sign) generic and on the same side as
    (theta, 0) of every hyperplane not containing the latter."""
    hyps = secondary_fan(kgit).hyperplanes
    base = tuple(theta) + (0,)
    for e in range(64):
        N = 2 ** e
        pt = tuple(N * a for a in theta) + (sign,)
        if all(dot(h, base) == 0 or (dot(h, pt) > 0) == (dot(h, base) > 0) for h in hyps) \
                and _generic(kgit, pt):
            return N
    raise ValueError("no generic phase character near the base character")


def build_visitor_glsm(inp: VisitorInput) -> VisitorGlsm:
    base = inp.base
    G = base.group
    k, t = G.free_rank, len(G.invariant_factors)
    n, r = base.n, inp.r
    if r < 1:
        raise ValueError("W must have at least one weight")
    group = FinAbGroup(k + 2, G.invariant_factors)
    coords = [(name, Character(w.free_part + (0, 0), w.torsion_part)) for name, w in base.coordinates]
    names = set(base.names)

    def fresh(s):
        while s in names:
            s = "_" + s
        names.add(s)
        return s

    middle = []
    for j, w in enumerate(inp.w_weights):
        coords.append((fresh(f"y{j + 1}"), Character(w.free_part + (1, 0), w.torsion_part)))
        middle.append(n + j)
    last = n + r
    coords.append((fresh("p"), Character((0,) * k + (-1, 1), (0,) * t)))
    gamma = GitProblem(group, tuple(coords))
    potential = []
    for j, w in enumerate(inp.w_weights):
        sec = (-w).reduced(G)
        found, _ = monomial_of_weight(sec, base.weights, G)
        if found is False:
            raise ValueError(f"no section of weight {sec.free_part} pairs with middle coordinate "
                             f"{gamma.names[n + j]}: potential cannot be invariant")
        potential.append(GenericSection(last, Character(sec.free_part + (0, 0), sec.torsion_part),
                                        tuple(range(n)), (n + j,)))
    chi = Character((0,) * (k + 1) + (1,))
    kernel = GitProblem(FinAbGroup(k + 1, G.invariant_factors),
                        tuple((nm, Character(w.free_part[:-1], w.torsion_part)) for nm, w in coords))
    N = max(_stable_scale(kernel, inp.theta, 1), _stable_scale(kernel, inp.theta, -1))
    plus = tuple(N * a for a in inp.theta) + (1,)
    minus = tuple(N * a for a in inp.theta) + (-1,)
    glsm = Glsm(gamma, chi, Character(plus, ()), tuple(potential))
    lam = (0,) * k + (1,)
    fixed = tuple(i for i, w in enumerate(kernel.free_weights) if dot(w, lam) == 0)
    return VisitorGlsm(inp, glsm, plus, minus, lam, fixed, tuple(middle), last)


@dataclass(frozen=True)
class TripleVerdict:
    result: bool
    method: str
    sufficient: Optional[bool]
    exact: bool

    def __bool__(self):
        return self.result


def positive_triple(base: GitProblem, w_weights: Sequence, theta: Sequence) -> TripleVerdict:
    """Sufficient test (every dual W-weight ample, theta ample), then the exact
    semistable-locus test: no minimal theta-subset of V + W uses a W-coordinate."""
    G = base.group
    ws = [w.reduced(G) if isinstance(w, Character) else Character(tuple(w), (0,) * len(G.invariant_factors))
          for w in w_weights]
    theta = tuple(theta)
    chamber = secondary_fan(base).chamber_containing(theta)
    sufficient = None
    if chamber is not None:
        amp = chamber.cone
        sufficient = all(amp.contains_in_relative_interior((-w).free_part) for w in ws)
    if not ws:
        return TripleVerdict(True, "sufficient", True, True)
    joint = GitProblem(G, tuple(base.coordinates) +
                       tuple((f"_w{j}", w) for j, w in enumerate(ws)))
    try:
        irr = irrelevant_data(joint, theta)
        exact = not any(any(i >= base.n for i in S) for S in irr.subsets)
    except ValueError:
        exact = False
    if sufficient:
        return TripleVerdict(True, "sufficient", True, exact)
    return TripleVerdict(exact, "exact", sufficient, exact)


@dataclass(frozen=True)
class VisitorLedger:
    copies: int
    base_rank: Optional[int]
    r: int
    blocks: tuple
    residual: str = "D^b(Z)"

    @property
    def lower_bound(self) -> bool:
        return self.copies > 0 and self.base_rank is None

    @property
    def total_exceptional(self) -> int:
        return self.copies * (self.base_rank or 0)

    def describe(self) -> str:
        parts = [f"D^b(X) (x) O_rel({j})" for j in range(self.copies)] + [self.residual]
        return "D^b(Y) = <" + ", ".join(parts) + ">"


def visitor_sod(vg: VisitorGlsm) -> VisitorLedger:
    """Blocks of the crossing along the middle G_m: |<theta_K, lambda>| = dim W - 1 copies
    of D^b(X), then D^b(Z)."""
    tk = canonical_character(vg.glsm).theta_K
    r = dot(tk.free_part, vg.lam)
    copies = abs(r)
    if copies != vg.input.r - 1:
        raise ValueError("internal inconsistency: canonical pairing does not match dim W - 1")
    try:
        sf = quotient_stacky_fan(vg.input.base, vg.input.theta)
        rk = rank_k0(sf)
    except ValueError:
        rk = None
    blocks = tuple((f"D^b(X) (x) O_rel({j})", rk) for j in range(copies))
    return VisitorLedger(copies, rk, r, blocks)


@dataclass(frozen=True)
class HostCheck:
    nef: bool
    dimension: bool
    relative_ample: bool
    fast_path: bool

    @property
    def passed(self) -> bool:
        return self.nef and self.dimension and self.relative_ample

    def __bool__(self):
        return self.passed


def fano_host_check(vg: VisitorGlsm) -> HostCheck:
    inp = vg.input
    base = inp.base
    G = base.group
    chamber = inp.chamber()
    total = base.det_character()
    for w in inp.w_weights:
        total = total - w
    nef = chamber.cone.contains(total.reduced(G).free_part)
    fast = inp.fano and all(chamber.cone.contains_in_relative_interior((-w).free_part)
                            for w in inp.w_weights)
    # the projective bundle: G x G_m on V x W
    k = G.free_rank
    bundle = GitProblem(FinAbGroup(k + 1, G.invariant_factors),
                        tuple((nm, Character(w.free_part + (0,), w.torsion_part))
                              for nm, w in base.coordinates) +
                        tuple((f"_y{j}", Character(w.free_part + (1,), w.torsion_part))
                              for j, w in enumerate(inp.w_weights)))
    c = secondary_fan(bundle).chamber_containing(vg.theta_plus)
    rel = (0,) * k + (1,)
    ample = c is not None and c.cone.contains_in_relative_interior(rel)
    return HostCheck(nef or fast, inp.r >= 2, ample, fast)


@dataclass(frozen=True)
class HostReport:
    sod: VisitorLedger
    fano_host: HostCheck
    positive_triple: TripleVerdict


def host_report(inp: VisitorInput) -> HostReport:
    vg = build_visitor_glsm(inp)
    return HostReport(visitor_sod(vg), fano_host_check(vg),
                      positive_triple(inp.base, inp.w_weights, inp.theta))

"""Straight-line paths through a secondary fan and the bookkeeping of each wall crossing."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .git import (Chamber, Character, GitProblem, SecondaryFan, SecondaryWall, StackyFan,
                  irrelevant_data, quotient_stacky_fan, rank_k0, secondary_fan)
from .glsm import (GenericSection, Glsm, canonical_character, is_geometric, kernel_restriction,
                   kuznetsov_chambers, monomial_of_weight)
from .lattice import FinAbGroup, IntMatrix, dot, kernel_basis, solve_integer
from .polyhedral import (RationalCone, double_description, intersect, is_strongly_convex,
                         relative_interior_point)

__all__ = [
    "Crossing",
    "PathPlan",
    "PathError",
    "SideUndefined",
    "WallStack",
    "Certificates",
    "CrossingEvent",
    "Exceptional",
    "StackBlock",
    "Residual",
    "SodLedger",
    "AuditReport",
    "plan_path",
    "verify_plan",
    "crossing_event",
    "wall_certificates",
    "assemble_sod",
    "independence_audit",
]

MAX_RETRIES = 40


class PathError(ValueError):
    """No certified generic segment was found."""

    def __init__(self, message, cone=None, point=None):
        super().__init__(message)
        self.cone = cone
        self.point = point


class SideUndefined(ValueError):
    """The requested side has no Kuznetsov chamber."""


@dataclass(frozen=True)
class Crossing:
    wall: int
    t: Fraction
    source: int
    destination: int


@dataclass(frozen=True)
class PathPlan:
    start: tuple
    target: tuple
    seed: int
    dither_exponent: int
    crossings: tuple
    chambers: tuple

    def point(self, t) -> tuple:
        return tuple(a + t * (b - a) for a, b in zip(self.start, self.target))


def _dither(k: int, seed: int, j: int) -> tuple:
    s = seed + 2
    return tuple(Fraction(s ** i, 2 ** j) for i in range(k))


def _crossings(fan: SecondaryFan, start, target):
    """Crossing list, or ``(None, cone, point)`` describing the first degeneracy."""
    found = []
    for w in fan.walls:
        a, b = dot(w.normal, start), dot(w.normal, target)
        if b == 0 and w.cone.contains(target):
            return None, w.cone, target
        if a * b >= 0:
            continue
        t = Fraction(a) / (a - b)
        q = tuple(x + t * (y - x) for x, y in zip(start, target))
        if not w.cone.contains(q):
            continue
        if not w.cone.contains_in_relative_interior(q):
            return None, w.cone, q
        found.append((t, w))
    found.sort(key=lambda tw: tw[0])
    for (t1, w1), (t2, _) in zip(found, found[1:]):
        if t1 == t2:
            return None, w1.cone, None
    return found, None, None


def plan_path(fan: SecondaryFan, source: Chamber, target: Sequence, seed: int = 0,
              max_retries: int = MAX_RETRIES) -> PathPlan:
    """Certified generic segment from near ``source``'s interior point to ``target``."""
    target = tuple(Fraction(x) for x in target)
    if not source.cone.is_full_dimensional:
        raise ValueError("source chamber is not full-dimensional")
    if not fan.support.contains(target):
        raise ValueError("target lies outside the support of the secondary fan")
    hyps = fan.hyperplanes
    k = fan.git.k
    p = source.interior_point
    last = (None, None)
    for j in range(1, max_retries + 1):
        start = tuple(a + d for a, d in zip(p, _dither(k, seed, j)))
        if not source.cone.contains_in_relative_interior(start) or any(dot(h, start) == 0 for h in hyps):
            continue
        found, cone, point = _crossings(fan, start, target)
        if found is None:
            last = (cone, point)
            continue
        chambers = [source.index]
        crossings = []
        for t, w in found:
            cur = chambers[-1]
            if cur not in w.chambers:
                raise PathError("internal inconsistency: crossing a wall not bounding the current chamber",
                                w.cone, None)
            nxt = w.chambers[1] if w.chambers[0] == cur else w.chambers[0]
            crossings.append(Crossing(w.index, t, cur, nxt))
            chambers.append(nxt)
        end = fan.chambers[chambers[-1]]
        if not end.cone.contains(target):
            raise PathError("internal inconsistency: path ends outside the target chamber", end.cone, target)
        return PathPlan(start, target, seed, j, tuple(crossings), tuple(chambers))
    cone, point = last
    raise PathError(f"no generic path after {max_retries} perturbations; segment meets a "
                    f"codimension >= 2 cone {cone.generators if cone is not None else None}",
                    cone, point)


def verify_plan(fan: SecondaryFan, plan: PathPlan) -> bool:
    """Recompute every crossing point: each lies in the relative interior of its wall
    and in no other wall."""
    found, _, _ = _crossings(fan, plan.start, plan.target)
    if found is None or [w.index for _, w in found] != [c.wall for c in plan.crossings]:
        return False
    for t, w in found:
        q = plan.point(t)
        if not w.cone.contains_in_relative_interior(q):
            return False
        if any(v.index != w.index and v.cone.contains(q) for v in fan.walls):
            return False
    return True


@dataclass(frozen=True)
class WallStack:
    git: Optional[GitProblem]
    theta: tuple
    fan: Optional[StackyFan]
    rank: Optional[int]
    descriptor: str


def _wall_stack(kgit: GitProblem, fixed: tuple, lam: tuple, wall: SecondaryWall) -> WallStack:
    k = kgit.k
    group = FinAbGroup(k - 1, kgit.group.invariant_factors)
    L = kernel_basis(IntMatrix.from_rows([lam], k))
    theta_w = solve_integer(L, relative_interior_point(wall.cone)) if k > 1 else ()
    if not fixed:
        order = group.torsion_order
        if k - 1 == 0:
            return WallStack(None, (), None, order, "point" if order == 1 else f"B(finite group of order {order})")
        return WallStack(None, tuple(theta_w), None, None, "empty semistable locus")
    coords = []
    for i in fixed:
        name, w = kgit.coordinates[i]
        coeffs = solve_integer(L, w.free_part) if k > 1 else ()
        coords.append((name, Character(coeffs, w.torsion_part)))
    wgit = GitProblem(group, tuple(coords))
    try:
        sf = quotient_stacky_fan(wgit, tuple(theta_w))
        rk = rank_k0(sf)
        desc = f"toric stack on {', '.join(wgit.names)} (rank {rk})"
        return WallStack(wgit, tuple(theta_w), sf, rk, desc)
    except ValueError as e:
        return WallStack(wgit, tuple(theta_w), None, None, f"toric stack on {', '.join(wgit.names)}: {e}")


@dataclass(frozen=True)
class Certificates:
    """Sufficient conditions for a crossing to contribute exceptional objects.

    ``ample_disjoint`` is None when the GLSM has no bundle structure to test against.
    """

    ample_disjoint: Optional[bool]
    strongly_convex: bool
    potential_vanishes: bool
    details: tuple = ()

    @property
    def passed(self) -> bool:
        return self.ample_disjoint is not False and self.strongly_convex and self.potential_vanishes

    @property
    def failures(self) -> tuple:
        flags = (self.ample_disjoint is not False, self.strongly_convex, self.potential_vanishes)
        return tuple(d for d, ok in zip(self.details, flags) if not ok)


@dataclass(frozen=True)
class Exceptional:
    count: int
    wall: int
    r: int
    rank: int


@dataclass(frozen=True)
class StackBlock:
    wall: int
    copies: int
    descriptor: str
    reason: str


@dataclass(frozen=True)
class Residual:
    name: str
    chamber: int
    labels: tuple = ()


Block = Union[Exceptional, StackBlock, Residual]


@dataclass(frozen=True)
class CrossingEvent:
    wall: int
    source: int
    destination: int
    lam: tuple
    l: int
    r: int
    fixed: tuple
    wall_stack: WallStack
    certificates: Optional[Certificates]
    blocks: tuple

    @property
    def theta_W(self) -> tuple:
        return self.wall_stack.theta

    @property
    def wall_git(self) -> Optional[GitProblem]:
        return self.wall_stack.git

    @property
    def potential_vanishes(self) -> Optional[bool]:
        return None if self.certificates is None else self.certificates.potential_vanishes


def _ample_cone_of_base(glsm: Glsm, base: tuple):
    kgit = kernel_restriction(glsm).git
    bgit = GitProblem(kgit.group, tuple(kgit.coordinates[i] for i in base))
    fan = secondary_fan(bgit)
    c = fan.chamber_containing(glsm.theta.free_part)
    return None if c is None else c.cone


def _potential_vanishes(glsm: Glsm, fixed: set) -> tuple:
    git = glsm.gamma_git
    for term in glsm.potential or ():
        if isinstance(term, GenericSection):
            if term.coordinate not in fixed or any(c not in fixed for c in term.cofactors):
                continue
            vars_ = [v for v in term.variables if v in fixed]
            found, expo = monomial_of_weight(term.weight, [git.weights[v] for v in vars_], git.group)
            if found is None:
                return False, f"undecided: section on {git.names[term.coordinate]} over a non-pointed cone"
            if found:
                mono = " ".join(f"{git.names[v]}^{e}" for v, e in zip(vars_, expo) if e)
                return False, f"{git.names[term.coordinate]}*({mono or '1'}) survives on the fixed locus"
        else:
            if all(i in fixed for i, e in enumerate(term) if e):
                return False, f"monomial {term} survives on the fixed locus"
    return True, "potential vanishes on the fixed locus"


def wall_certificates(glsm: Glsm, event: CrossingEvent) -> Certificates:
    kgit = kernel_restriction(glsm).git
    k = kgit.k
    fixed = set(event.fixed)
    details = []
    geo = is_geometric(glsm)
    ample = None
    if geo.geometric:
        base_fixed = [kgit.free_weights[i] for i in event.fixed if i in geo.base_coordinates]
        cx = RationalCone.from_generators(base_fixed, k) if base_fixed else RationalCone.zero(k)
        nef = _ample_cone_of_base(glsm, geo.base_coordinates)
        if nef is None:
            ample = False
            details.append("stability character is not generic for the base")
        else:
            P = intersect(cx, nef)
            x = relative_interior_point(P) if P.rays or P.lineality else (0,) * k
            ample = not (nef.is_full_dimensional and nef.contains_in_relative_interior(x) and any(x))
            details.append("wall cone of the base misses the ample cone" if ample
                           else "wall cone of the base meets the ample cone")
    else:
        details.append("no bundle structure: ample-cone test not applicable")
    details = details[:1]
    fixed_w = [kgit.free_weights[i] for i in event.fixed if any(kgit.free_weights[i])]
    ce = RationalCone.from_generators(fixed_w, k) if fixed_w else RationalCone.zero(k)
    convex = is_strongly_convex(ce)
    details.append("fixed weight cone is strongly convex" if convex else "fixed weight cone contains a line")
    vanishes, why = _potential_vanishes(glsm, fixed)
    details.append(why)
    return Certificates(ample, convex, vanishes, tuple(details))


def crossing_event(glsm: Glsm, fan: SecondaryFan, wall: Union[int, SecondaryWall],
                   direction: tuple, theta_K: Optional[Character] = None) -> CrossingEvent:
    """Crossing of ``wall`` from chamber ``direction[0]`` into ``direction[1]``."""
    if isinstance(wall, int):
        wall = fan.walls[wall]
    src, dst = direction
    if set(wall.chambers) != {src, dst}:
        raise ValueError("wall does not separate the given chambers")
    if theta_K is None:
        theta_K = canonical_character(glsm).theta_K
    kgit = fan.git
    p_dst = fan.chambers[dst].interior_point
    lam = tuple(wall.normal)
    if dot(lam, p_dst) < 0:
        lam = tuple(-a for a in lam)
    l = dot(lam, p_dst)
    r = dot(theta_K.free_part, lam)
    fixed = tuple(i for i, w in enumerate(kgit.free_weights) if dot(w, lam) == 0)
    stack = _wall_stack(kgit, fixed, lam, wall)
    ev = CrossingEvent(wall.index, src, dst, lam, l, r, fixed, stack, None, ())
    if r == 0:
        return ev
    cert = wall_certificates(glsm, ev)
    copies = abs(r)
    if cert.passed and stack.rank is not None:
        blocks = (Exceptional(copies * stack.rank, wall.index, r, stack.rank),)
    else:
        reasons = list(cert.failures)
        if stack.rank is None:
            reasons.append("wall stack admits no rank formula")
        blocks = (StackBlock(wall.index, copies, stack.descriptor, "; ".join(reasons)),)
    return CrossingEvent(wall.index, src, dst, lam, l, r, fixed, stack, cert, blocks)


@dataclass(frozen=True)
class SodLedger:
    side: str
    plan: PathPlan
    events: tuple
    blocks: tuple
    residual: Residual
    geometric_chamber: int
    target_chamber: int

    @property
    def lower_bound(self) -> bool:
        return any(isinstance(b, StackBlock) for b in self.blocks)

    @property
    def total_exceptional(self) -> int:
        return sum(b.count for b in self.blocks if isinstance(b, Exceptional))

    def describe(self) -> str:
        parts = []
        for b in self.blocks:
            if isinstance(b, Exceptional):
                parts.append(f"E x{b.count} [wall {b.wall}]")
            else:
                parts.append(f"<{b.descriptor}> x{b.copies} [wall {b.wall}]")
        if self.side == "K":
            return "D^b(Z) = <" + ", ".join(["K"] + parts) + ">"
        return "-K = <" + ", ".join(["D^b(Z)"] + parts) + ">"


def _choose(chambers, preferred: Optional[int], source: int):
    idx = [c.index for c, _ in chambers]
    if preferred is not None:
        if preferred not in idx:
            raise ValueError(f"chamber {preferred} is not a Kuznetsov chamber for this side")
        return chambers[idx.index(preferred)]
    for c, p in chambers:
        if c.index == source:
            return c, p
    return chambers[0]


def assemble_sod(glsm: Glsm, side: str = "K", seed: int = 0, target_chamber: Optional[int] = None,
                 fan: Optional[SecondaryFan] = None, labels: tuple = ()) -> SodLedger:
    """Walk from the chamber of the GLSM's stability character to theta_{K+eps}
    (side "K") or theta_{-K-eps} (side "-K"), collecting blocks in crossing order."""
    if side not in ("K", "-K"):
        raise ValueError("side must be 'K' or '-K'")
    if fan is None:
        fan = secondary_fan(kernel_restriction(glsm).git)
    kc = kuznetsov_chambers(glsm, fan)
    source = fan.chamber_containing(glsm.theta.free_part)
    if source is None:
        raise ValueError("stability character is not in the interior of a chamber")
    pool = kc.kuznetsov if side == "K" else kc.anti_kuznetsov
    if not pool:
        raise SideUndefined(f"undefined for this side: no chamber contains theta_{side}")
    chamber, target = _choose(pool, target_chamber, source.index)
    plan = plan_path(fan, source, target, seed)
    events, blocks = [], []
    for c in plan.crossings:
        ev = crossing_event(glsm, fan, c.wall, (c.source, c.destination), kc.theta_K)
        if (side == "K" and ev.r < 0) or (side == "-K" and ev.r > 0):
            raise PathError("internal inconsistency: crossing moves away from the target character")
        events.append(ev)
        blocks.extend(ev.blocks)
    if side == "K":
        residual = Residual("K", chamber.index, tuple(labels))
    else:
        residual = Residual("D^b(Z)", source.index, ())
    return SodLedger(side, plan, tuple(events), tuple(blocks), residual, source.index, chamber.index)


@dataclass(frozen=True)
class AuditReport:
    chambers: tuple
    connections: tuple
    totals: tuple

    @property
    def connected(self) -> bool:
        return all(ok for _, _, _, ok in self.connections)

    @property
    def zero_pairings(self) -> bool:
        return all(all(r == 0 for _, r in walls) for _, _, walls, _ in self.connections)

    @property
    def totals_agree(self) -> bool:
        return len({(t, lb) for _, _, t, lb in self.totals}) <= 1

    @property
    def passed(self) -> bool:
        return self.connected and self.zero_pairings


def _through_theta(fan: SecondaryFan, members: set, theta: tuple) -> dict:
    adj = {c: [] for c in members}
    for w in fan.walls:
        a, b = w.chambers
        if a in members and b in members and w.cone.contains(theta):
            adj[a].append((b, w))
            adj[b].append((a, w))
    return adj


def independence_audit(glsm: Glsm, seeds: Sequence[int] = (0, 1), side: str = "K") -> AuditReport:
    """Connect every pair of Kuznetsov chambers through walls containing theta_K and
    compare exceptional totals along several paths."""
    fan = secondary_fan(kernel_restriction(glsm).git)
    kc = kuznetsov_chambers(glsm, fan)
    theta = kc.theta_K.free_part
    members = [c.index for c, _ in kc.kuznetsov]
    adj = _through_theta(fan, set(members), theta)
    connections = []
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            # breadth-first search inside the star of theta_K
            prev = {a: None}
            queue = [a]
            while queue:
                x = queue.pop(0)
                for y, w in adj[x]:
                    if y not in prev:
                        prev[y] = (x, w)
                        queue.append(y)
            walls = []
            if b in prev:
                y = b
                while prev[y] is not None:
                    x, w = prev[y]
                    lam = w.normal if dot(w.normal, fan.chambers[y].interior_point) > 0 else \
                        tuple(-v for v in w.normal)
                    walls.append((w.index, dot(theta, lam)))
                    y = x
            connections.append((a, b, tuple(reversed(walls)), b in prev))
    totals = []
    for m in members or [None]:
        for s in seeds:
            try:
                led = assemble_sod(glsm, side, s, m, fan)
                totals.append((m, s, led.total_exceptional, led.lower_bound))
            except SideUndefined:
                pass
    return AuditReport(tuple(members), tuple(connections), tuple(totals))

"""Abelian GIT problems: semistable loci, secondary fans and quotient stacky fans."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Union

from .lattice import (FinAbGroup, IntMatrix, cokernel, det, dot, hermite_normal_form,
                      kernel_basis, rank,
                      rational_solve, solve_integer)
from .polyhedral import Fan, RationalCone, chamber_arrangement, cone_membership, _hyperplanes

__all__ = [
    "Character",
    "GitProblem",
    "Chamber",
    "SecondaryWall",
    "SecondaryFan",
    "IrrelevantData",
    "StackyFan",
    "CompletenessReport",
    "secondary_fan",
    "irrelevant_data",
    "quotient_stacky_fan",
    "rank_k0",
    "nef_ample",
    "is_cartier",
    "completeness_and_properness",
    "gale_dual",
    "quotient_order",
]


@dataclass(frozen=True)
class Character:
    """Element of Z^k + sum Z/d_i; torsion residues are kept reduced."""

    free_part: tuple
    torsion_part: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "free_part", tuple(int(a) for a in self.free_part))
        object.__setattr__(self, "torsion_part", tuple(int(a) for a in self.torsion_part))

    def reduced(self, group: FinAbGroup) -> "Character":
        factors = group.invariant_factors
        tors = self.torsion_part or (0,) * len(factors)
        if len(tors) != len(factors) or len(self.free_part) != group.free_rank:
            raise ValueError(f"character {self} does not match group {group}")
        return Character(self.free_part, tuple(t % d for t, d in zip(tors, factors)))

    def __add__(self, other: "Character") -> "Character":
        return Character(tuple(a + b for a, b in zip(self.free_part, other.free_part)),
                         _add_tors(self.torsion_part, other.torsion_part))

    def __neg__(self) -> "Character":
        return Character(tuple(-a for a in self.free_part), tuple(-a for a in self.torsion_part))

    def __sub__(self, other: "Character") -> "Character":
        return self + (-other)

    def scaled(self, m: int) -> "Character":
        return Character(tuple(m * a for a in self.free_part), tuple(m * a for a in self.torsion_part))

    def pair(self, cocharacter: Sequence[int]) -> int:
        return dot(self.free_part, cocharacter)

    @property
    def is_torsion(self) -> bool:
        return not any(self.free_part)


def _add_tors(a, b):
    if not a:
        return tuple(b)
    if not b:
        return tuple(a)
    return tuple(x + y for x, y in zip(a, b))


@dataclass(frozen=True)
class GitProblem:
    """A diagonalizable group with character group ``group`` acting on C^n.

    ``coordinates`` is an ordered tuple of ``(name, weight)`` pairs.
    """

    group: FinAbGroup
    coordinates: tuple

    def __post_init__(self):
        coords = tuple((str(n), w.reduced(self.group)) for n, w in self.coordinates)
        if not coords:
            raise ValueError("a GIT problem needs at least one coordinate")
        names = [n for n, _ in coords]
        if len(set(names)) != len(names):
            raise ValueError("duplicate coordinate names")
        object.__setattr__(self, "coordinates", coords)

    @classmethod
    def from_weights(cls, weights: Sequence[Sequence[int]], names: Optional[Sequence[str]] = None,
                     torsion: Sequence[int] = (), torsion_weights=None) -> "GitProblem":
        weights = [tuple(w) for w in weights]
        k = len(weights[0]) if weights else 0
        group = FinAbGroup.from_orders(k, torsion)
        names = list(names) if names is not None else [f"x{i}" for i in range(len(weights))]
        tw = torsion_weights or [()] * len(weights)
        return cls(group, tuple((n, Character(w, t)) for n, w, t in zip(names, weights, tw)))

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def k(self) -> int:
        return self.group.free_rank

    @property
    def names(self) -> tuple:
        return tuple(n for n, _ in self.coordinates)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.coordinates)

    @property
    def free_weights(self) -> tuple:
        return tuple(w.free_part for _, w in self.coordinates)

    def weight_matrix(self) -> IntMatrix:
        return IntMatrix.from_columns(self.free_weights, self.k)

    def det_character(self) -> Character:
        """Class of det V, i.e. the sum of all weights."""
        total = Character((0,) * self.k, (0,) * len(self.group.invariant_factors))
        for w in self.weights:
            total = total + w
        return total.reduced(self.group)

    def class_of(self, coefficients: Sequence[int]) -> Character:
        """Class of the torus-invariant divisor sum a_i D_i."""
        if len(coefficients) != self.n:
            raise ValueError("one coefficient per coordinate is required")
        total = Character((0,) * self.k, (0,) * len(self.group.invariant_factors))
        for a, w in zip(coefficients, self.weights):
            total = total + w.scaled(a)
        return total.reduced(self.group)


@dataclass(frozen=True)
class Chamber:
    index: int
    cone: RationalCone
    interior_point: tuple
    minimal_supports: frozenset

    @property
    def key(self) -> tuple:
        return self.cone.facets


@dataclass(frozen=True)
class SecondaryWall:
    index: int
    cone: RationalCone
    normal: tuple
    chambers: tuple


@dataclass(frozen=True)
class SecondaryFan:
    git: GitProblem
    fan: Fan
    chambers: tuple
    walls: tuple
    support: RationalCone

    @property
    def hyperplanes(self) -> list:
        return _hyperplanes([w for w in self.git.free_weights if any(w)], self.git.k)

    def chamber_containing(self, theta: Sequence, interior: bool = True) -> Optional[Chamber]:
        for c in self.chambers:
            if (c.cone.contains_in_relative_interior(theta) if interior else c.cone.contains(theta)):
                return c
        return None

    def chambers_containing(self, theta: Sequence) -> list:
        return [c for c in self.chambers if c.cone.contains(theta)]

    def adjacency(self) -> dict:
        adj = {c.index: set() for c in self.chambers}
        for w in self.walls:
            a, b = w.chambers
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def wall_between(self, a: int, b: int) -> Optional[SecondaryWall]:
        pair = tuple(sorted((a, b)))
        return next((w for w in self.walls if w.chambers == pair), None)


def secondary_fan(git: GitProblem) -> SecondaryFan:
    idx = [i for i, w in enumerate(git.free_weights) if any(w)]
    if not idx:
        raise ValueError("secondary fan undefined: no free weights")
    vecs = [git.free_weights[i] for i in idx]
    fan = chamber_arrangement(vecs)
    chambers = tuple(
        Chamber(i, c, p, frozenset(frozenset(idx[j] for j in S) for S in ss))
        for i, (c, p, ss) in enumerate(zip(fan.maximal_cones, fan.interior_points, fan.semistable)))
    walls = tuple(SecondaryWall(i, w.cone, w.normal, w.chambers) for i, w in enumerate(fan.walls))
    return SecondaryFan(git, fan, chambers, walls, fan.support)


@dataclass(frozen=True)
class IrrelevantData:
    """Minimal coordinate subsets S whose weights generate a cone containing theta.

    The monomials prod_{i in S} x_i generate the irrelevant ideal.
    """

    subsets: tuple

    def unstable_point(self, support: frozenset) -> bool:
        return not any(S <= support for S in self.subsets)

    def contains_coordinate(self, i: int) -> bool:
        return any(i in S for S in self.subsets)


def _theta_vec(theta) -> tuple:
    if isinstance(theta, Character):
        return theta.free_part
    if isinstance(theta, Chamber):
        return theta.interior_point
    return tuple(theta)


def _in_cone_independent(vectors, theta) -> bool:
    if not vectors:
        return not any(theta)
    cols = [[v[j] for v in vectors] for j in range(len(theta))]
    x = rational_solve(cols, theta)
    return x is not None and all(a >= 0 for a in x)


def irrelevant_data(git: GitProblem, theta) -> IrrelevantData:
    theta = _theta_vec(theta)
    weights = git.free_weights
    if not cone_membership(theta, [w for w in weights if any(w)] or [(0,) * git.k]).member \
            and any(theta):
        raise ValueError("empty semistable locus: theta outside the support of the secondary fan")
    found = []
    n = git.n
    for size in range(0, min(git.k, n) + 1):
        for S in combinations(range(n), size):
            fs = frozenset(S)
            if any(F <= fs for F in found):
                continue
            vecs = [weights[i] for i in S]
            if size and rank(vecs, git.k) < size:
                continue
            if _in_cone_independent(vecs, theta):
                found.append(fs)
    if not found:
        raise ValueError("empty semistable locus")
    return IrrelevantData(tuple(sorted(found, key=lambda s: (len(s), sorted(s)))))


def gale_dual(git: GitProblem) -> IntMatrix:
    """Basis (columns) of M = ker(Z^n -> character group), torsion included.

    Row i is the image u_i of the i-th coordinate in N = Hom(M, Z).
    """
    n, k = git.n, git.k
    factors = git.group.invariant_factors
    rows = [list(git.weight_matrix().rows[i]) + [0] * len(factors) for i in range(k)]
    for j, d in enumerate(factors):
        row = [w.torsion_part[j] for w in git.weights] + [0] * len(factors)
        row[n + j] = d
        rows.append(row)
    if not rows:
        return IntMatrix.identity(n)
    K = kernel_basis(IntMatrix.from_rows(rows, n + len(factors)))
    cols = [K.column(j)[:n] for j in range(K.ncols)]
    # the projection of a saturated kernel may need re-saturation; keep independent part
    H = hermite_normal_form(IntMatrix.from_rows(cols, n)) if cols else IntMatrix.zeros(0, n)
    return H.T if H.nrows else IntMatrix.zeros(n, 0)


def quotient_order(git: GitProblem, subset: Sequence[int]) -> int:
    """Order of the character group modulo the weights over ``subset``.

    This is the order of the stabilizer of a point whose nonzero coordinates
    are exactly ``subset``; infinite (returned as 0) if the weights do not
    span the free part.
    """
    factors = git.group.invariant_factors
    k = git.k
    m = k + len(factors)
    cols = []
    for i in subset:
        w = git.weights[i]
        cols.append(tuple(w.free_part) + tuple(w.torsion_part))
    for j, d in enumerate(factors):
        cols.append(tuple(0 for _ in range(k)) + tuple(d if t == j else 0 for t in range(len(factors))))
    if m == 0:
        return 1
    if not cols:
        return 0 if m else 1
    A = IntMatrix.from_columns(cols, m)
    G = cokernel(A)
    if G.free_rank:
        return 0
    return G.torsion_order


@dataclass(frozen=True)
class StackyFan:
    """Gale-dual stacky fan of a GIT quotient.

    ``rays`` maps coordinate index to its image u_i in N = Z^lattice_rank;
    ``cones`` are coordinate index sets.  ``multiplicities`` are stabilizer
    orders of the torus-fixed points, ``det_multiplicities`` the lattice
    indices of the ray images and ``gerbe_factors`` their ratio.
    """

    lattice_rank: int
    names: tuple
    images: tuple
    ray_indices: tuple
    cones: tuple
    multiplicities: tuple
    det_multiplicities: tuple
    weight_cone_strongly_convex: bool
    nonray_indices: tuple = ()
    simplicial: bool = True

    @property
    def rays(self) -> dict:
        return {i: self.images[i] for i in self.ray_indices}

    @property
    def gerbe_factors(self) -> tuple:
        return tuple(m // d if d else 0 for m, d in zip(self.multiplicities, self.det_multiplicities))


def _lattice_index(vectors, dim) -> int:
    if dim == 0:
        return 1
    if len(vectors) != dim:
        return 0
    return abs(det([list(v) for v in vectors]))


def quotient_stacky_fan(git: GitProblem, chamber) -> StackyFan:
    """Stacky fan of ``[C^n_theta / G]`` for theta generic (a chamber or a generic character)."""
    theta = _theta_vec(chamber)
    k = git.k
    irr = irrelevant_data(git, theta)
    for S in irr.subsets:
        if len(S) != k or (k and rank([git.free_weights[i] for i in S], k) < k):
            raise ValueError("need a maximal cone: theta is not generic")
    K = gale_dual(git)
    m = K.ncols
    images = tuple(K.rows)
    n = git.n
    cones = []
    mult, dets = [], []
    simplicial = True
    for S in irr.subsets:
        T = tuple(i for i in range(n) if i not in S)
        cones.append(T)
        mult.append(quotient_order(git, sorted(S)))
        vecs = [images[i] for i in T]
        d = _lattice_index(vecs, m) if len(vecs) == m else 0
        if len(vecs) != m or (m and rank(vecs, m) < m):
            simplicial = False
        dets.append(d)
    used = sorted({i for T in cones for i in T})
    nonrays = tuple(i for i in range(n) if i not in used)
    wcone = RationalCone.from_generators([w for w in git.free_weights if any(w)], k) if k else None
    return StackyFan(
        lattice_rank=m,
        names=git.names,
        images=images,
        ray_indices=tuple(used),
        cones=tuple(cones),
        multiplicities=tuple(mult),
        det_multiplicities=tuple(dets),
        weight_cone_strongly_convex=bool(wcone is None or not wcone.lineality),
        nonray_indices=nonrays,
        simplicial=simplicial,
    )


@dataclass(frozen=True)
class CompletenessReport:
    complete: bool
    simplicial: bool
    weight_cone_strongly_convex: bool
    unpaired_facets: tuple = ()

    @property
    def proper(self) -> bool:
        return self.complete


def completeness_and_properness(sf: StackyFan) -> CompletenessReport:
    """Completeness via the pseudomanifold test: every codimension-one face of a
    maximal simplicial cone lies in exactly two maximal cones."""
    if not sf.simplicial:
        return CompletenessReport(False, False, sf.weight_cone_strongly_convex)
    m = sf.lattice_rank
    if m == 0:
        return CompletenessReport(len(sf.cones) == 1, True, sf.weight_cone_strongly_convex)
    counts = {}
    for T in sf.cones:
        for i in T:
            F = frozenset(T) - {i}
            counts[F] = counts.get(F, 0) + 1
    bad = tuple(sorted(tuple(sorted(F)) for F, c in counts.items() if c != 2))
    return CompletenessReport(not bad and bool(sf.cones), True, sf.weight_cone_strongly_convex, bad)


def rank_k0(sf: StackyFan) -> int:
    """Rank of K_0 of a complete simplicial toric DM stack: the number of
    torus-fixed points counted with the orders of their stabilizers."""
    rep = completeness_and_properness(sf)
    if not (rep.complete and rep.simplicial):
        raise ValueError("rank formula requires complete simplicial stacky fan")
    return sum(sf.multiplicities)


class OpenCone:
    """Interior of a full-dimensional rational cone."""

    def __init__(self, closure: RationalCone):
        self.closure = closure

    def contains(self, x: Sequence) -> bool:
        return self.closure.contains_in_relative_interior(x) and self.closure.is_full_dimensional

    def __contains__(self, x) -> bool:
        return self.contains(_theta_vec(x))

    def __repr__(self):
        return f"OpenCone({self.closure!r})"


def nef_ample(git: GitProblem, chamber) -> tuple:
    """(Nef, Amp) of the quotient at ``chamber``: the closed chamber and its interior."""
    if not isinstance(chamber, Chamber):
        fan = secondary_fan(git)
        c = fan.chamber_containing(_theta_vec(chamber))
        if c is None:
            raise ValueError("theta does not lie in the interior of a chamber")
        chamber = c
    return chamber.cone, OpenCone(chamber.cone)


def is_cartier(D: Sequence[int], sf: StackyFan) -> bool:
    """Cartier test for the torus-invariant divisor sum a_i D_i (one entry per coordinate
    or per ray of ``sf``)."""
    if len(D) == len(sf.images):
        coeff = dict(enumerate(D))
    elif len(D) == len(sf.ray_indices):
        coeff = dict(zip(sf.ray_indices, D))
    else:
        raise ValueError("coefficient count does not match the number of rays")
    if not sf.simplicial:
        raise ValueError("Cartier test needs a simplicial fan")
    m = sf.lattice_rank
    for T in sf.cones:
        if not T:
            continue
        A = IntMatrix.from_rows([sf.images[i] for i in T], m)
        if solve_integer(A, [-coeff.get(i, 0) for i in T]) is None:
            return False
    return True

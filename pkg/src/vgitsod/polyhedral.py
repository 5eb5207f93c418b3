"""Exact rational polyhedral cones, fans and chamber arrangements.

Cones are stored in canonical form: primitive extreme rays and facet normals
sorted lexicographically, lineality and equation spaces as Hermite-normalized
saturated lattice bases.  Two cones describe the same set iff they compare
equal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .lattice import (IntMatrix, det, dot, integral_primitive, kernel_basis, rank,
                      rational_nullspace, rational_solve)

__all__ = [
    "RationalCone",
    "Hyperplane",
    "Membership",
    "Fan",
    "Wall",
    "double_description",
    "is_strongly_convex",
    "cone_membership",
    "relative_interior_point",
    "chamber_arrangement",
    "faces",
    "intersect",
]


def _int_vec(v) -> tuple:
    if any(Fraction(a).denominator != 1 for a in v):
        return integral_primitive(v)
    return tuple(int(a) for a in v)


def _lattice_basis(rows: Sequence[Sequence[int]], dim: int) -> list:
    """Saturated HNF basis of the kernel of ``rows`` (as row vectors)."""
    if not rows:
        return [tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    K = kernel_basis(IntMatrix.from_rows(rows, dim))
    return [K.column(j) for j in range(K.ncols)]


def _cross(rows: Sequence[Sequence[int]], dim: int) -> tuple:
    """Generalized cross product of dim-1 integer vectors."""
    out = []
    for j in range(dim):
        minor = [[r[c] for c in range(dim) if c != j] for r in rows]
        out.append((-1) ** j * det(minor))
    return tuple(out)


def _extreme_rays(rows: Sequence[Sequence[int]], dim: int):
    """Extreme rays and lineality of ``{x : r.x >= 0 for r in rows}``."""
    rows = [tuple(r) for r in rows if any(r)]
    lin = _lattice_basis(rows, dim)
    k = dim - len(lin) - 1
    if k < 0:
        return [], lin
    rays = set()
    for S in combinations(range(len(rows)), k):
        v = _cross([rows[i] for i in S] + lin, dim)
        if not any(v):
            continue
        vals = [dot(r, v) for r in rows]
        if all(x >= 0 for x in vals):
            rays.add(integral_primitive(v))
        elif all(x <= 0 for x in vals):
            rays.add(integral_primitive([-a for a in v]))
    return sorted(rays), lin


@dataclass(frozen=True)
class RationalCone:
    """A polyhedral cone with both V- and H-representations.

    ``rays`` are the extreme rays of the pointed part (inside the orthogonal
    complement of ``lineality``); the cone is
    ``Cone(rays) + span(lineality) = {x : f.x >= 0 (f in facets), e.x = 0 (e in equations)}``.
    """

    ambient_dim: int
    rays: tuple
    lineality: tuple
    facets: tuple
    equations: tuple

    @classmethod
    def from_generators(cls, generators: Iterable[Sequence], dim: int) -> "RationalCone":
        gens = [_int_vec(g) for g in generators if any(g)]
        for g in gens:
            if len(g) != dim:
                raise ValueError(f"generator {g} does not live in dimension {dim}")
        facets, eqs = _extreme_rays(gens, dim)
        rows = list(facets) + list(eqs) + [tuple(-a for a in e) for e in eqs]
        rays, lin = _extreme_rays(rows, dim)
        return cls(dim, tuple(rays), tuple(lin), tuple(facets), tuple(eqs))

    @classmethod
    def from_inequalities(cls, inequalities: Iterable[Sequence], dim: int,
                          equations: Iterable[Sequence] = ()) -> "RationalCone":
        eqs = [_int_vec(e) for e in equations if any(e)]
        rows = [_int_vec(f) for f in inequalities if any(f)]
        rows += eqs + [tuple(-a for a in e) for e in eqs]
        rays, lin = _extreme_rays(rows, dim)
        return cls.from_generators(list(rays) + list(lin) + [tuple(-a for a in v) for v in lin],
                                   dim)

    @classmethod
    def zero(cls, dim: int) -> "RationalCone":
        return cls.from_generators([], dim)

    @classmethod
    def whole_space(cls, dim: int) -> "RationalCone":
        return cls.from_inequalities([], dim)

    @property
    def generators(self) -> tuple:
        return self.rays + self.lineality + tuple(tuple(-a for a in v) for v in self.lineality)

    @property
    def dim(self) -> int:
        return self.ambient_dim - len(self.equations)

    @property
    def is_full_dimensional(self) -> bool:
        return not self.equations

    def contains(self, x: Sequence) -> bool:
        return (all(dot(e, x) == 0 for e in self.equations)
                and all(dot(f, x) >= 0 for f in self.facets))

    def contains_in_relative_interior(self, x: Sequence) -> bool:
        return (all(dot(e, x) == 0 for e in self.equations)
                and all(dot(f, x) > 0 for f in self.facets))

    def contains_cone(self, other: "RationalCone") -> bool:
        return all(self.contains(g) for g in other.generators)

    def key(self) -> tuple:
        return (self.facets, self.equations)


def double_description(generators: Optional[Iterable[Sequence]] = None, *,
                       facets: Optional[Iterable[Sequence]] = None,
                       equations: Iterable[Sequence] = (),
                       dim: Optional[int] = None) -> RationalCone:
    """Build a cone from generators or from inequalities and fill in the other side."""
    if (generators is None) == (facets is None):
        raise ValueError("give exactly one of generators or facets")
    data = list(generators if generators is not None else facets)
    if dim is None:
        if not data:
            raise ValueError("dim is required for an empty description")
        dim = len(data[0])
    if dim < 1:
        raise ValueError("ambient dimension must be at least 1")
    if generators is not None:
        return RationalCone.from_generators(data, dim)
    return RationalCone.from_inequalities(data, dim, equations)


def intersect(*cones: RationalCone) -> RationalCone:
    dim = cones[0].ambient_dim
    return RationalCone.from_inequalities([f for c in cones for f in c.facets], dim,
                                          [e for c in cones for e in c.equations])


def is_strongly_convex(c: RationalCone) -> bool:
    return not c.lineality


@dataclass(frozen=True)
class Hyperplane:
    normal: tuple

    def __post_init__(self):
        normal = tuple(int(a) for a in self.normal)
        if not any(normal):
            raise ValueError("hyperplane normal must be nonzero")
        object.__setattr__(self, "normal", integral_primitive(normal))

    def side(self, x: Sequence) -> int:
        v = dot(self.normal, x)
        return (v > 0) - (v < 0)


@dataclass(frozen=True)
class Membership:
    """Result of an exact cone membership test with its certificate.

    ``coefficients`` reconstruct the point as a nonnegative combination of the
    input vectors; ``separator`` is a functional that is nonnegative on the
    vectors and negative on the point.
    """

    member: bool
    coefficients: Optional[tuple] = None
    separator: Optional[tuple] = None

    def __bool__(self):
        return self.member


def cone_membership(theta: Sequence, vectors: Sequence[Sequence]) -> Membership:
    vectors = [tuple(v) for v in vectors]
    dim = len(theta)
    if any(len(v) != dim for v in vectors):
        raise ValueError("dimension mismatch between point and vectors")
    cone = RationalCone.from_generators(vectors, dim)
    for e in cone.equations:
        v = dot(e, theta)
        if v != 0:
            return Membership(False, separator=tuple(-a for a in e) if v > 0 else tuple(e))
    for f in cone.facets:
        if dot(f, theta) < 0:
            return Membership(False, separator=tuple(f))
    coeffs = _nonnegative_combination(theta, vectors)
    if coeffs is None:  # pragma: no cover - H-description says it is inside
        raise AssertionError("inconsistent cone description")
    return Membership(True, coefficients=coeffs)


def _nonnegative_combination(theta, vectors) -> Optional[tuple]:
    """Carathéodory search over linearly independent subsets."""
    n = len(vectors)
    if not any(theta):
        return (Fraction(0),) * n
    r = rank(vectors, len(theta)) if vectors else 0
    for size in range(1, r + 1):
        for S in combinations(range(n), size):
            sub = [vectors[i] for i in S]
            if rank(sub, len(theta)) < size:
                continue
            cols = [[sub[j][i] for j in range(size)] for i in range(len(theta))]
            x = rational_solve(cols, theta)
            if x is not None and all(a >= 0 for a in x):
                out = [Fraction(0)] * n
                for i, a in zip(S, x):
                    out[i] = Fraction(a)
                return tuple(out)
    return None


def _relint(c: RationalCone) -> tuple:
    if not c.rays:
        return (0,) * c.ambient_dim
    s = [sum(r[i] for r in c.rays) for i in range(c.ambient_dim)]
    return integral_primitive(s) if any(s) else tuple(s)


def relative_interior_point(c: RationalCone) -> tuple:
    """Sum of the extreme rays, scaled to a primitive integer vector."""
    if not c.rays and not c.lineality:
        raise ValueError("no relative interior direction: zero cone")
    return _relint(c)


def faces(c: RationalCone) -> list:
    """All faces of ``c`` (including ``c`` and its lineality space)."""
    seen = {c.key(): c}
    queue = deque([c])
    neg_lin = [tuple(-a for a in v) for v in c.lineality]
    while queue:
        cur = queue.popleft()
        for f in cur.facets:
            rays = [r for r in cur.rays if dot(f, r) == 0]
            face = RationalCone.from_generators(rays + list(c.lineality) + neg_lin, c.ambient_dim)
            if face.key() not in seen:
                seen[face.key()] = face
                queue.append(face)
    return sorted(seen.values(), key=lambda x: (-x.dim, x.key()))


@dataclass(frozen=True)
class Wall:
    """Codimension-one cone shared by two adjacent chambers.

    ``normal`` is primitive and positive on the first chamber of ``chambers``.
    """

    cone: RationalCone
    normal: tuple
    chambers: tuple


@dataclass(frozen=True)
class Fan:
    """A fan given by its maximal cones.

    When produced by :func:`chamber_arrangement` it also carries the chamber
    adjacency (``walls``), a canonical interior point per chamber and, per
    chamber, the minimal index subsets of the input vectors whose cone
    contains the chamber.
    """

    ambient_dim: int
    maximal_cones: tuple
    support: RationalCone
    walls: tuple = ()
    interior_points: tuple = ()
    semistable: tuple = ()
    boundary_walls: tuple = field(default=(), compare=False)

    @property
    def cones(self) -> list:
        seen = {}
        for c in self.maximal_cones:
            for f in faces(c):
                seen.setdefault(f.key(), f)
        return sorted(seen.values(), key=lambda x: (-x.dim, x.key()))

    def adjacency(self) -> dict:
        adj = {i: set() for i in range(len(self.maximal_cones))}
        for w in self.walls:
            a, b = w.chambers
            adj[a].add(b)
            adj[b].add(a)
        return adj

    def locate(self, x: Sequence) -> list:
        """Indices of maximal cones containing ``x``."""
        return [i for i, c in enumerate(self.maximal_cones) if c.contains(x)]

    def check_axioms(self) -> list:
        """Violations of the fan axioms; empty when the fan is valid."""
        problems = []
        face_sets = [{f.key() for f in faces(c)} for c in self.maximal_cones]
        for i, j in combinations(range(len(self.maximal_cones)), 2):
            meet = intersect(self.maximal_cones[i], self.maximal_cones[j])
            if meet.key() not in face_sets[i] or meet.key() not in face_sets[j]:
                problems.append(f"cones {i} and {j} meet in a non-face")
        return problems


def _reduce_to_span(vectors: Sequence[Sequence[int]], dim: int):
    """Coordinates of ``vectors`` in a saturated basis of their span."""
    ortho = _lattice_basis(vectors, dim)
    basis = _lattice_basis(ortho, dim) if ortho else [
        tuple(int(i == j) for j in range(dim)) for i in range(dim)]
    cols = [[b[i] for b in basis] for i in range(dim)]
    coords = []
    for v in vectors:
        y = rational_solve(cols, v)
        if y is None or any(Fraction(a).denominator != 1 for a in y):
            raise AssertionError("span basis is not saturated")
        coords.append(tuple(int(a) for a in y))
    return basis, coords


def _hyperplanes(vectors: Sequence[Sequence[int]], dim: int) -> list:
    distinct = sorted(set(vectors))
    out = set()
    for S in combinations(distinct, dim - 1):
        v = _cross(list(S), dim)
        if any(v):
            p = integral_primitive(v)
            if next(a for a in p if a) < 0:
                p = tuple(-a for a in p)
            out.add(p)
    return sorted(out)


def _moment(t: int, dim: int) -> tuple:
    return tuple(t ** i for i in range(dim))


def nudge(point: Sequence, direction: Sequence, hyperplanes: Sequence[Sequence[int]]):
    """Move ``point`` a little along ``direction`` so that it leaves every
    hyperplane through it while staying strictly on its side of all others.

    Returns ``None`` when ``direction`` is parallel to some hyperplane that
    contains ``point``.
    """
    eps = Fraction(1)
    for h in hyperplanes:
        hp, hd = dot(h, point), dot(h, direction)
        if hp == 0:
            if hd == 0:
                return None
        elif hd != 0:
            eps = min(eps, Fraction(abs(hp), 2 * abs(hd)))
    return tuple(Fraction(a) + eps * b for a, b in zip(point, direction))


def generic_point(point: Sequence, hyperplanes: Sequence[Sequence[int]], *,
                  keep_in: Optional[RationalCone] = None, bias: Optional[Sequence] = None,
                  start: int = 1, attempts: int = 200):
    """Deterministic generic perturbation of ``point``.

    Tries directions ``bias + moment(t)`` for ``t = start, start + 1, ...``;
    when ``keep_in`` is given the result must lie in its relative interior.
    """
    dim = len(point)
    if all(dot(h, point) != 0 for h in hyperplanes) and (
            keep_in is None or keep_in.contains_in_relative_interior(point)):
        return tuple(Fraction(a) for a in point)
    for t in range(start, start + attempts):
        d = _moment(t, dim)
        if keep_in is not None:
            d = _project_to_span(d, keep_in)
        if bias is not None:
            d = tuple(a + b for a, b in zip(bias, d))
        p = nudge(point, d, hyperplanes)
        if p is None:
            continue
        if keep_in is not None:
            scale = Fraction(1)
            while not keep_in.contains_in_relative_interior(p) and scale > Fraction(1, 2 ** 40):
                scale /= 2
                p = tuple(Fraction(a) + scale * (b - Fraction(a)) for a, b in zip(point, p))
            if not keep_in.contains_in_relative_interior(p):
                continue
            if any(dot(h, p) == 0 for h in hyperplanes):
                continue
        return p
    raise RuntimeError("could not find a generic perturbation")


def _project_to_span(d: Sequence, cone: RationalCone) -> tuple:
    """Component of ``d`` inside the linear span of ``cone`` (scaled to integers)."""
    if not cone.equations:
        return tuple(d)
    E = cone.equations
    # d - E^T y with E E^T y = E d
    G = [[dot(a, b) for b in E] for a in E]
    y = rational_solve(G, [dot(e, d) for e in E])
    v = [Fraction(d[i]) - sum(y[k] * E[k][i] for k in range(len(E))) for i in range(len(d))]
    return integral_primitive(v) if any(v) else tuple(0 for _ in d)


def _simplicial_facets(basis: Sequence[Sequence[int]], dim: int) -> list:
    """Facet normals of the full-dimensional simplicial cone on ``basis``."""
    out = []
    for i in range(dim):
        others = [b for j, b in enumerate(basis) if j != i]
        n = _cross(others, dim)
        if dot(n, basis[i]) < 0:
            n = tuple(-a for a in n)
        out.append(n)
    return out


class _Arrangement:
    def __init__(self, vectors, dim):
        self.vectors = vectors
        self.dim = dim
        self.distinct = sorted(set(vectors))
        self.hyperplanes = _hyperplanes(vectors, dim)
        self.bases = []
        for B in combinations(self.distinct, dim):
            if det([list(b) for b in B]) != 0:
                self.bases.append((B, _simplicial_facets(B, dim)))
        self.index_of = {}
        for i, v in enumerate(vectors):
            self.index_of.setdefault(v, []).append(i)

    def chamber_of(self, p):
        facets = []
        used = []
        for B, fs in self.bases:
            if all(dot(f, p) > 0 for f in fs):
                facets.extend(fs)
                used.append(B)
        if not used:
            return None, None
        cone = RationalCone.from_inequalities(facets, self.dim)
        subsets = set()
        for B in used:
            for combo in _product([self.index_of[b] for b in B]):
                subsets.add(frozenset(combo))
        return cone, frozenset(subsets)


def _product(lists):
    if not lists:
        yield ()
        return
    for a in lists[0]:
        for rest in _product(lists[1:]):
            yield (a,) + rest


def chamber_arrangement(vectors: Sequence[Sequence[int]],
                        support: Optional[RationalCone] = None) -> Fan:
    """Chamber decomposition (the GKZ fan) of ``Cone(vectors)``.

    Two generic points share a chamber iff the same subsets of ``vectors``
    generate cones containing them.  The chamber of a generic point is the
    intersection of all simplicial cones on bases containing it; chambers
    are discovered by stepping across facets from a generic start point.
    Repeated vectors keep their multiplicity in the recorded subsets.
    """
    vectors = [tuple(int(a) for a in v) for v in vectors]
    if not vectors:
        raise ValueError("chamber_arrangement needs at least one vector")
    dim = len(vectors[0])
    if any(len(v) != dim for v in vectors):
        raise ValueError("vectors of inconsistent dimension")
    if any(not any(v) for v in vectors):
        raise ValueError("zero vector in chamber_arrangement input")
    r = rank(vectors, dim)
    full_support = RationalCone.from_generators(vectors, dim)
    if support is None:
        support = full_support
    if r < dim:
        basis, coords = _reduce_to_span(vectors, dim)
        inner = chamber_arrangement(coords)
        return _lift_fan(inner, basis, dim, support)

    arr = _Arrangement(vectors, dim)
    hyps = arr.hyperplanes
    start = generic_point(_relint(support), hyps, keep_in=support)

    chambers = []  # (cone, subsets, interior point)
    keys = {}
    walls = {}
    boundary = []
    queue = deque()

    def register(p):
        cone, subsets = arr.chamber_of(p)
        if cone is None:
            return None
        if support is not full_support:
            cone = intersect(cone, support)
        k = cone.key()
        if k not in keys:
            keys[k] = len(chambers)
            chambers.append((cone, subsets, _relint(cone)))
            queue.append(keys[k])
        return keys[k]

    register(start)
    while queue:
        ci = queue.popleft()
        cone = chambers[ci][0]
        for f in cone.facets:
            F = RationalCone.from_generators([x for x in cone.rays if dot(f, x) == 0], dim)
            q = _relint(F)
            neg = tuple(-a for a in f)
            p = None
            for t in range(1, 400):
                u = _moment(t, dim)
                scale = 2 * abs(dot(f, u)) + 1
                d = tuple(scale * a + b for a, b in zip(neg, u))
                p = nudge(q, d, hyps)
                if p is not None and dot(f, p) < 0:
                    break
                p = None
            if p is None:  # pragma: no cover
                raise RuntimeError("could not step across a facet")
            if not support.contains(p):
                boundary.append((ci, F, f))
                continue
            cj = register(p)
            if cj is None:
                boundary.append((ci, F, f))
                continue
            pair = tuple(sorted((ci, cj)))
            walls.setdefault((pair, F.key()), (F, f if pair[0] == ci else neg))

    order = sorted(range(len(chambers)), key=lambda i: chambers[i][0].key())
    remap = {old: new for new, old in enumerate(order)}
    wall_list = []
    for (pair, _), (F, normal) in walls.items():
        a, b = remap[pair[0]], remap[pair[1]]
        if a > b:
            a, b = b, a
            normal = tuple(-x for x in normal)
        wall_list.append(Wall(F, integral_primitive(normal), (a, b)))
    wall_list.sort(key=lambda w: (w.chambers, w.cone.key()))
    bwalls = sorted({(remap[ci], F.key()): Wall(F, integral_primitive(f), (remap[ci],))
                     for ci, F, f in boundary}.values(), key=lambda w: (w.chambers, w.cone.key()))
    return Fan(
        ambient_dim=dim,
        maximal_cones=tuple(chambers[i][0] for i in order),
        support=support,
        walls=tuple(wall_list),
        interior_points=tuple(chambers[i][2] for i in order),
        semistable=tuple(chambers[i][1] for i in order),
        boundary_walls=tuple(bwalls),
    )


def _lift_fan(inner: Fan, basis, dim, support) -> Fan:
    def lift(v):
        return tuple(sum(v[k] * basis[k][i] for k in range(len(basis))) for i in range(dim))

    def lift_cone(c):
        return RationalCone.from_generators([lift(g) for g in c.generators], dim)

    def lift_normal(f):
        # functional on the span pulled back to the ambient space inside the span
        G = [[dot(a, b) for b in basis] for a in basis]
        y = rational_solve(G, f)
        v = [sum(y[k] * basis[k][i] for k in range(len(basis))) for i in range(dim)]
        return integral_primitive(v)

    return Fan(
        ambient_dim=dim,
        maximal_cones=tuple(lift_cone(c) for c in inner.maximal_cones),
        support=support,
        walls=tuple(Wall(lift_cone(w.cone), lift_normal(w.normal), w.chambers) for w in inner.walls),
        interior_points=tuple(lift(p) for p in inner.interior_points),
        semistable=inner.semistable,
        boundary_walls=tuple(Wall(lift_cone(w.cone), lift_normal(w.normal), w.chambers)
                             for w in inner.boundary_walls),
    )

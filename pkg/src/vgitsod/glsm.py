"""GLSM data, distinguished characters, and the complete-intersection construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Optional, Sequence, Union

from .git import (Chamber, Character, GitProblem, SecondaryFan, StackyFan, gale_dual,
                  irrelevant_data, is_cartier, quotient_order, quotient_stacky_fan,
                  secondary_fan, _lattice_index)
from .lattice import (FinAbGroup, IntMatrix, dot, hermite_normal_form, rank, rational_solve,
                      smith_normal_form, solve_integer)
from .polyhedral import RationalCone, relative_interior_point

__all__ = [
    "GenericSection",
    "Glsm",
    "KernelRestriction",
    "CanonicalCharacters",
    "KuznetsovChambers",
    "GeometricReport",
    "CiProblem",
    "ProjectionReport",
    "CyClassification",
    "kernel_restriction",
    "canonical_character",
    "kuznetsov_chambers",
    "perturb_into",
    "is_geometric",
    "build_ci_glsm",
    "total_space_fan",
    "stacky_fan_isomorphism",
    "projection_check",
    "q_ratio",
    "cy_classification",
    "monomial_of_weight",
    "ci_from_glsm",
]


@dataclass(frozen=True)
class GenericSection:
    """The potential term ``x_coordinate * prod(cofactors) * f`` with ``f`` a generic
    polynomial of Γ-weight ``weight`` in the coordinates ``variables``.  Never expanded."""

    coordinate: int
    weight: Character
    variables: tuple
    cofactors: tuple = ()


Term = Union[tuple, GenericSection]


def _zero(group: FinAbGroup) -> Character:
    return Character((0,) * group.free_rank, (0,) * len(group.invariant_factors))


def _as_character(x, group: FinAbGroup) -> Character:
    if isinstance(x, Character):
        return x.reduced(group)
    return Character(tuple(x), (0,) * len(group.invariant_factors)).reduced(group)


@dataclass(frozen=True)
class Glsm:
    gamma_git: GitProblem
    chi: Character
    theta: Character
    potential: Optional[tuple] = None

    def __post_init__(self):
        G = self.gamma_git.group
        chi = _as_character(self.chi, G)
        if any(chi.torsion_part) or not any(chi.free_part) or _gcd(chi.free_part) != 1:
            raise ValueError("χ must be surjective")
        object.__setattr__(self, "chi", chi)
        kgroup = FinAbGroup(G.free_rank - 1, G.invariant_factors)
        object.__setattr__(self, "theta", _as_character(self.theta, kgroup))
        if self.potential is not None:
            terms = tuple(t if isinstance(t, GenericSection) else tuple(int(e) for e in t)
                          for t in self.potential)
            object.__setattr__(self, "potential", terms)
            for t in terms:
                w = self.term_weight(t)
                if w != chi:
                    raise ValueError(f"potential term {t} has weight {w}, expected χ = {chi}")

    def term_weight(self, term: Term) -> Character:
        git = self.gamma_git
        if isinstance(term, GenericSection):
            total = git.weights[term.coordinate] + term.weight
            for c in term.cofactors:
                total = total + git.weights[c]
            return total.reduced(git.group)
        if len(term) != git.n or any(e < 0 for e in term):
            raise ValueError(f"monomial {term} needs {git.n} nonnegative exponents")
        return git.class_of(term)

    @property
    def names(self) -> tuple:
        return self.gamma_git.names


def _gcd(v) -> int:
    from math import gcd
    g = 0
    for a in v:
        g = gcd(g, a)
    return g


@dataclass(frozen=True)
class KernelRestriction:
    kernel_group: FinAbGroup
    restricted_weights: tuple
    projection: IntMatrix
    splitting: Optional[tuple]
    names: tuple

    @property
    def git(self) -> GitProblem:
        return GitProblem(self.kernel_group, tuple(zip(self.names, self.restricted_weights)))

    def restrict(self, c: Character) -> Character:
        free = self.projection.apply(c.free_part) if self.projection.nrows else ()
        return Character(free, c.torsion_part).reduced(self.kernel_group)


def kernel_restriction(glsm: Glsm) -> KernelRestriction:
    """Character lattice of ker χ with Γ-weights restricted to it.

    When χ is a coordinate projection the remaining coordinates are kept;
    otherwise a unimodular change of basis sending χ to e_1 is used.
    """
    git = glsm.gamma_git
    k = git.k
    chi = glsm.chi.free_part
    unit = [j for j in range(k) if chi[j] != 0]
    if len(unit) == 1 and abs(chi[unit[0]]) == 1:
        j = unit[0]
        rows = [tuple(int(a == b) for b in range(k)) for a in range(k) if a != j]
        mu = tuple(chi[j] * int(b == j) for b in range(k))
    else:
        d = smith_normal_form(IntMatrix.from_columns([chi], k))
        sign = d.V.rows[0][0]
        B = [tuple(sign * a for a in row) for row in d.U.rows]
        rows = B[1:]
        # B chi = e_1, so the first row of B pairs to 1 with chi
        mu = B[0]
    P = IntMatrix.from_rows(rows, k)
    group = FinAbGroup(k - 1, git.group.invariant_factors)
    restricted = tuple(
        Character(P.apply(w.free_part) if rows else (), w.torsion_part).reduced(group)
        for w in git.weights)
    return KernelRestriction(group, restricted, P, mu, git.names)


@dataclass(frozen=True)
class CanonicalCharacters:
    theta_K: Character
    theta_antiK: Character


def canonical_character(glsm: Glsm) -> CanonicalCharacters:
    kr = kernel_restriction(glsm)
    total = _zero(kr.kernel_group)
    for w in kr.restricted_weights:
        total = total + w
    tk = (-total).reduced(kr.kernel_group)
    return CanonicalCharacters(tk, (-tk).reduced(kr.kernel_group))


def perturb_into(theta: Sequence, chamber: Chamber, hyperplanes: Sequence[Sequence[int]] = ()) -> tuple:
    """theta + p/N with p the chamber's canonical interior point and N the least
    power of two keeping the sign of every hyperplane nonvanishing at theta."""
    p = chamber.interior_point
    hyps = list(hyperplanes) + list(chamber.cone.facets)
    N = 1
    while True:
        pt = tuple(Fraction(a) + Fraction(b, N) for a, b in zip(theta, p))
        ok = all((dot(h, pt) > 0) == (dot(h, theta) > 0) and (dot(h, pt) < 0) == (dot(h, theta) < 0)
                 for h in hyps if dot(h, theta) != 0)
        if ok and chamber.cone.contains_in_relative_interior(pt):
            return pt
        N *= 2


@dataclass(frozen=True)
class KuznetsovChambers:
    theta_K: Character
    theta_antiK: Character
    kuznetsov: tuple
    anti_kuznetsov: tuple
    fan: SecondaryFan = field(compare=False, repr=False)

    @property
    def status(self) -> str:
        if not self.kuznetsov and not self.anti_kuznetsov:
            return "no Kuznetsov chamber"
        return "ok"


def kuznetsov_chambers(glsm: Glsm, fan: Optional[SecondaryFan] = None) -> KuznetsovChambers:
    """Chambers whose closures contain theta_K (resp. theta_-K), each paired with
    its perturbed interior character."""
    cc = canonical_character(glsm)
    if fan is None:
        fan = secondary_fan(kernel_restriction(glsm).git)
    hyps = fan.hyperplanes

    def side(theta):
        return tuple((c, perturb_into(theta.free_part, c, hyps))
                     for c in fan.chambers_containing(theta.free_part))

    return KuznetsovChambers(cc.theta_K, cc.theta_antiK, side(cc.theta_K), side(cc.theta_antiK), fan)


def monomial_of_weight(target: Character, weights: Sequence[Character], group: FinAbGroup):
    """Search for exponents e with sum e_j w_j = target.

    Returns ``(True, e)``, ``(False, None)``, or ``(None, None)`` when the weight
    cone is not pointed and no bounded search can decide."""
    target = target.reduced(group)
    weights = [w.reduced(group) for w in weights]
    k = group.free_rank
    factors = group.invariant_factors
    nz = [w.free_part for w in weights if any(w.free_part)]
    if nz and not RationalCone.from_generators(nz, k).contains(target.free_part):
        return False, None
    if not nz and any(target.free_part):
        return False, None
    y = None
    if nz:
        dual = RationalCone.from_inequalities(nz, k)
        y = relative_interior_point(dual) if dual.rays else None
        if y is None or any(dot(y, v) <= 0 for v in nz):
            return None, None
    order = 1
    for d in factors:
        order *= d
    budget = dot(y, target.free_part) if y else 0
    n = len(weights)

    @lru_cache(maxsize=None)
    def search(i, free, tors):
        if i == n:
            if not any(free) and all(t % d == 0 for t, d in zip(tors, factors)):
                return ()
            return None
        w = weights[i]
        step = dot(y, w.free_part) if y and any(w.free_part) else 0
        if step:
            cap = dot(y, free) // step
        else:
            cap = order - 1 if any(w.torsion_part) else 0
        for e in range(cap, -1, -1):
            nf = tuple(a - e * b for a, b in zip(free, w.free_part))
            nt = tuple((a - e * b) % d for a, b, d in zip(tors, w.torsion_part, factors))
            if y and dot(y, nf) < 0:
                continue
            rest = search(i + 1, nf, nt)
            if rest is not None:
                return (e,) + rest
        return None

    if budget < 0:
        return False, None
    res = search(0, target.free_part, target.torsion_part)
    search.cache_clear()
    return (True, res) if res is not None else (False, None)


@dataclass(frozen=True)
class GeometricReport:
    clauses: tuple
    bundle_coordinates: tuple
    base_coordinates: tuple
    dilation: Optional[tuple]

    @property
    def geometric(self) -> bool:
        return all(ok for _, ok, _ in self.clauses)

    @property
    def failed(self) -> tuple:
        return tuple(name for name, ok, _ in self.clauses if not ok)

    def __bool__(self):
        return self.geometric


def _dilation(glsm: Glsm, kr: KernelRestriction) -> Optional[tuple]:
    git = glsm.gamma_git
    mu = kr.splitting
    if mu is not None and all(w.pair(mu) in (0, 1) for w in git.weights):
        return mu
    if git.n > 12:
        return None
    k = git.k
    rows = [glsm.chi.free_part] + [w.free_part for w in git.weights]
    A = IntMatrix.from_rows(rows, k)
    for size in range(git.n + 1):
        for B in combinations(range(git.n), size):
            b = (1,) + tuple(int(i in B) for i in range(git.n))
            x = solve_integer(A, b)
            if x is not None:
                return tuple(x)
    return None


def is_geometric(glsm: Glsm) -> GeometricReport:
    """Vector-bundle test: dilation weights, fibre coordinates never unstable,
    and a potential pairing each fibre coordinate with a nonzero section."""
    git = glsm.gamma_git
    kr = kernel_restriction(glsm)
    mu = _dilation(glsm, kr)
    clauses = []
    if mu is None:
        clauses.append(("splitting", False, "no cocharacter splitting χ acts with weights in {0, 1}"))
        bundle, base = (), tuple(range(git.n))
    else:
        bundle = tuple(i for i, w in enumerate(git.weights) if w.pair(mu) == 1)
        base = tuple(i for i, w in enumerate(git.weights) if w.pair(mu) == 0)
        clauses.append(("splitting", True, f"dilation cocharacter {mu}"))
    try:
        irr = irrelevant_data(kr.git, glsm.theta)
        bad = [git.names[i] for i in bundle if irr.contains_coordinate(i)]
        clauses.append(("bundle", not bad,
                        "fibre coordinates never unstable" if not bad
                        else f"fibre coordinates {bad} appear in the unstable data"))
    except ValueError as e:
        clauses.append(("bundle", False, str(e)))
    clauses.append(_pairing_clause(glsm, bundle, base, kr))
    order = {"bundle": 0, "pairing": 1, "splitting": 2}
    clauses.sort(key=lambda c: order[c[0]])
    return GeometricReport(tuple(clauses), bundle, base, mu)


def _pairing_clause(glsm, bundle, base, kr):
    git = glsm.gamma_git
    terms = glsm.potential or ()
    if not bundle:
        ok = not terms
        return ("pairing", ok, "no fibre coordinates" if ok else "potential without fibre coordinates")
    covered = set()
    for t in terms:
        if isinstance(t, GenericSection):
            if t.coordinate not in bundle or any(v in bundle for v in t.variables + t.cofactors):
                return ("pairing", False, f"term on {git.names[t.coordinate]} is not linear in the fibre")
            found, _ = monomial_of_weight(t.weight, [git.weights[v] for v in t.variables], git.group)
            if found is False:
                return ("pairing", False, f"section paired with {git.names[t.coordinate]} is zero")
            covered.add(t.coordinate)
        else:
            deg = [t[i] for i in bundle]
            if sum(deg) != 1:
                return ("pairing", False, f"monomial {t} is not linear in the fibre")
            covered.add(bundle[deg.index(1)])
    missing = [git.names[i] for i in bundle if i not in covered]
    if missing:
        return ("pairing", False, f"zero section on {missing}: not regular")
    return ("pairing", True, "potential pairs the fibre with a generic section")


@dataclass(frozen=True)
class CiProblem:
    base: GitProblem
    theta: tuple
    divisors: tuple

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(self.theta))
        divs = tuple(tuple(int(a) for a in D) for D in self.divisors)
        for D in divs:
            if len(D) != self.base.n:
                raise ValueError("divisor needs one coefficient per base coordinate")
        object.__setattr__(self, "divisors", divs)

    @property
    def r(self) -> int:
        return len(self.divisors)

    @property
    def classes(self) -> tuple:
        return tuple(self.base.class_of(D) for D in self.divisors)

    def base_chamber(self, fan: Optional[SecondaryFan] = None) -> Chamber:
        fan = fan or secondary_fan(self.base)
        c = fan.chamber_containing(self.theta)
        if c is None:
            raise ValueError("base character is not in the interior of a chamber")
        return c


def _check_nef(ci: CiProblem) -> Chamber:
    c = ci.base_chamber()
    for D in ci.classes:
        if not c.cone.contains(D.free_part):
            raise ValueError("total space is not a GIT quotient for non-nef D_i")
    return c


def build_ci_glsm(ci: CiProblem) -> Glsm:
    """G x G_m on V x C^r: fibre coordinate i has G-weight -D_i and dilation weight 1."""
    _check_nef(ci)
    base = ci.base
    G = base.group
    group = FinAbGroup(G.free_rank + 1, G.invariant_factors)
    coords = [(name, Character(w.free_part + (0,), w.torsion_part)) for name, w in base.coordinates]
    names = set(base.names)
    potential = []
    for i, D in enumerate(ci.classes):
        name = f"u{i + 1}"
        while name in names:
            name = "_" + name
        names.add(name)
        coords.append((name, Character(tuple(-a for a in D.free_part) + (1,),
                                       tuple(-t for t in D.torsion_part))))
        potential.append(GenericSection(base.n + i, Character(D.free_part + (0,), D.torsion_part),
                                        tuple(range(base.n))))
    gamma = GitProblem(group, tuple(coords))
    chi = Character((0,) * G.free_rank + (1,))
    return Glsm(gamma, chi, Character(ci.theta, ()), tuple(potential))


def total_space_fan(ci: CiProblem) -> StackyFan:
    """Fan of tot(E), E = sum O(-D_i): rays u_rho + sum a_{i rho} e_i and e_i,
    cones sigma + all fibre rays."""
    _check_nef(ci)
    base = ci.base
    sf = quotient_stacky_fan(base, ci.theta)
    n, r = base.n, ci.r
    m = sf.lattice_rank
    images = tuple(tuple(sf.images[j]) + tuple(D[j] for D in ci.divisors) for j in range(n)) + \
        tuple((0,) * m + tuple(int(i == t) for t in range(r)) for i in range(r))
    fibre = tuple(range(n, n + r))
    cones = tuple(tuple(T) + fibre for T in sf.cones)
    dets = tuple(_lattice_index([images[i] for i in T], m + r) for T in cones)
    gerbes = sf.gerbe_factors
    names = sf.names + tuple(f"u{i + 1}" for i in range(r))
    return StackyFan(
        lattice_rank=m + r,
        names=names,
        images=images,
        ray_indices=tuple(sorted(set(sf.ray_indices) | set(fibre))),
        cones=cones,
        multiplicities=tuple(d * g for d, g in zip(dets, gerbes)),
        det_multiplicities=dets,
        weight_cone_strongly_convex=sf.weight_cone_strongly_convex,
        nonray_indices=sf.nonray_indices,
        simplicial=sf.simplicial,
    )


def stacky_fan_isomorphism(a: StackyFan, b: StackyFan) -> Optional[IntMatrix]:
    """Unimodular T with T u^b_i = u^a_i for all i, provided both fans have the
    same cones and multiplicities; None otherwise."""
    if a.lattice_rank != b.lattice_rank or len(a.images) != len(b.images):
        return None
    ma = dict(zip(map(frozenset, a.cones), a.multiplicities))
    mb = dict(zip(map(frozenset, b.cones), b.multiplicities))
    if ma != mb or set(a.ray_indices) != set(b.ray_indices):
        return None
    m = a.lattice_rank
    if m == 0:
        return IntMatrix.identity(0)
    rows = []
    for j in range(m):
        # row j of T: x with <x, u^b_i> = (u^a_i)_j for every i
        x = rational_solve([list(u) for u in b.images], [u[j] for u in a.images])
        if x is None or any(Fraction(v).denominator != 1 for v in x):
            return None
        rows.append(tuple(int(v) for v in x))
    from .lattice import det
    T = IntMatrix.from_rows(rows, m)
    if abs(det([list(r) for r in rows])) != 1:
        return None
    return T


@dataclass(frozen=True)
class ProjectionReport:
    g: IntMatrix
    nu: IntMatrix
    nu_total: IntMatrix
    rows_exact: tuple
    right_square: bool
    left_square: bool
    bundle_images: tuple

    @property
    def commutes(self) -> bool:
        return self.left_square and self.right_square and all(self.rows_exact)


def _row_exact(git: GitProblem, nu: IntMatrix) -> bool:
    """0 -> M -nu-> Z^n -> character group -> 0, with nu given by columns."""
    n = git.n
    cols = [nu.column(j) for j in range(nu.ncols)]
    if cols and rank(cols, n) != len(cols):
        return False
    for c in cols:
        if any(git.class_of(c).free_part) or any(git.class_of(c).torsion_part):
            return False
    ref = gale_dual(git)
    ref_cols = [ref.column(j) for j in range(ref.ncols)]
    if len(ref_cols) != len(cols):
        return False
    if cols and hermite_normal_form(IntMatrix.from_rows(cols, n)) != \
            hermite_normal_form(IntMatrix.from_rows(ref_cols, n)):
        return False
    return quotient_order(git, range(n)) == 1


def projection_check(ci: CiProblem) -> ProjectionReport:
    """Check that the lattice diagram relating tot(E) and X has exact rows and commutes."""
    base = ci.base
    glsm = build_ci_glsm(ci)
    total = kernel_restriction(glsm).git
    n, r = base.n, ci.r
    A = ci.divisors
    nu = gale_dual(base)
    m = nu.ncols
    # nu'(x, y) = (nu x + A^T y, y)
    rows = [tuple(nu.rows[j]) + tuple(A[i][j] for i in range(r)) for j in range(n)]
    rows += [(0,) * m + tuple(int(i == t) for t in range(r)) for i in range(r)]
    nu_total = IntMatrix.from_rows(rows, m + r)
    g_rows = [tuple(int(c == j) for c in range(n)) + tuple(-A[i][j] for i in range(r)) for j in range(n)]
    g = IntMatrix.from_rows(g_rows, n + r)
    right = all(base.class_of(g.column(c)) == total.weights[c] for c in range(n + r))
    proj = IntMatrix.from_rows([tuple(int(a == b) for b in range(m + r)) for a in range(m)], m + r)
    left = (g @ nu_total) == (nu @ proj)
    exact = (_row_exact(total, nu_total), _row_exact(base, nu))
    bundle = tuple(base.class_of(g.column(n + i)) for i in range(r))
    return ProjectionReport(g, nu, nu_total, exact, right, left, bundle)


def q_ratio(D: Character, base: GitProblem) -> Optional[Fraction]:
    """q > 0 with D = q(-K) in the character group (torsion compared after
    clearing denominators), or None."""
    antiK = base.det_character()
    D = D.reduced(base.group)
    q = None
    for a, b in zip(D.free_part, antiK.free_part):
        if b == 0:
            if a != 0:
                return None
            continue
        c = Fraction(a, b)
        if q is None:
            q = c
        elif q != c:
            return None
    if q is None or q <= 0:
        return None
    lhs = D.scaled(q.denominator).reduced(base.group)
    rhs = antiK.scaled(q.numerator).reduced(base.group)
    return q if lhs == rhs else None


@dataclass(frozen=True)
class CyClassification:
    q: Optional[Fraction]
    label: Optional[str]
    labels: tuple
    cartier: bool


def cy_classification(ci: CiProblem) -> CyClassification:
    """Calabi-Yau labels of the residual category of a hypersurface in a Fano base."""
    if ci.r != 1:
        raise ValueError("classification is for a single divisor")
    chamber = ci.base_chamber()
    if not chamber.cone.contains_in_relative_interior(ci.base.det_character().free_part):
        raise ValueError("q-ratio classification requires a Fano base")
    D = ci.classes[0]
    q = q_ratio(D, ci.base)
    cartier = is_cartier(ci.divisors[0], quotient_stacky_fan(ci.base, ci.theta))
    labels = []
    if q is not None:
        if q <= 1:
            labels.append("K-fractional-CY")
        if q >= 1:
            labels.append("antiK-fractional-CY")
        if q.numerator == 1 and cartier:
            labels.append("K-CY")
    if q is None:
        label = None
    elif q == 1:
        label = "both"
    elif "K-CY" in labels:
        label = "K-CY"
    else:
        label = labels[0]
    return CyClassification(q, label, tuple(labels), cartier)


def ci_from_glsm(glsm: Glsm) -> Optional[CiProblem]:
    """Recover base, stability and effective divisor representatives from a geometric
    GLSM whose potential pairs each fibre coordinate with one generic section."""
    geo = is_geometric(glsm)
    if not geo.geometric:
        return None
    kr = kernel_restriction(glsm)
    kgit = kr.git
    base = GitProblem(kgit.group, tuple(kgit.coordinates[i] for i in geo.base_coordinates))
    divisors = []
    for b in geo.bundle_coordinates:
        terms = [t for t in glsm.potential or () if isinstance(t, GenericSection) and t.coordinate == b]
        if len(terms) != 1 or terms[0].cofactors:
            return None
        D = (-kr.restricted_weights[b]).reduced(kgit.group)
        found, expo = monomial_of_weight(D, base.weights, base.group)
        if not found:
            return None
        divisors.append(expo)
    try:
        return CiProblem(base, glsm.theta.free_part, tuple(divisors))
    except ValueError:
        return None

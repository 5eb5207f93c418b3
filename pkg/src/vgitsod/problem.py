"""TOML problem files.

A file has a ``[group]`` table, an array of ``[[coordinates]]`` tables, a ``theta``
list and optional ``[divisors]``, ``[visitor]`` and ``[options]`` tables::

    theta = [1]

    [group]
    free_rank = 1
    torsion = []

    [[coordinates]]
    name = "x1"
    weight = [1]
    chi = 0

A coordinate carrying ``chi`` makes the file a GLSM: the weights are those of
ker(chi) and ``chi`` is the weight of the extra factor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import tomli
import tomli_w

from .git import Character, GitProblem
from .glsm import CiProblem, GenericSection, Glsm, monomial_of_weight
from .lattice import FinAbGroup
from .visitor import VisitorInput

__all__ = ["ProblemError", "CoordinateSpec", "Options", "ProblemFile", "parse", "serialize"]

TOP_KEYS = {"group", "coordinates", "theta", "divisors", "visitor", "options"}
GROUP_KEYS = {"free_rank", "torsion"}
COORD_KEYS = {"name", "weight", "torsion", "chi"}
DIVISOR_KEYS = {"coefficients"}
VISITOR_KEYS = {"w_weights"}
OPTION_KEYS = {"side", "seed", "format", "potential"}


class ProblemError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column
        self.bare = message


@dataclass(frozen=True)
class CoordinateSpec:
    name: str
    weight: tuple
    torsion: tuple = ()
    chi: Optional[int] = None


@dataclass(frozen=True)
class Options:
    side: str = "K"
    seed: int = 0
    format: str = "json"
    potential: str = "generic"


@dataclass(frozen=True)
class ProblemFile:
    free_rank: int
    torsion: tuple
    coordinates: tuple
    theta: tuple
    divisors: Optional[tuple] = None
    visitor: Optional[tuple] = None
    options: Options = Options()
    warnings: tuple = field(default=(), compare=False)

    @property
    def kind(self) -> str:
        if self.visitor is not None:
            return "visitor"
        if self.divisors is not None:
            return "ci"
        if any(c.chi is not None for c in self.coordinates):
            return "glsm"
        return "git"

    @property
    def names(self) -> tuple:
        return tuple(c.name for c in self.coordinates)

    def git(self) -> GitProblem:
        """The coordinates with their (kernel) weights."""
        group = FinAbGroup(self.free_rank, self.torsion)
        return GitProblem(group, tuple((c.name, Character(c.weight, c.torsion or (0,) * len(self.torsion)))
                                       for c in self.coordinates))

    def glsm(self) -> Glsm:
        if self.kind != "glsm":
            raise ValueError("not a GLSM file: no coordinate carries chi")
        k = self.free_rank
        t = len(self.torsion)
        group = FinAbGroup(k + 1, self.torsion)
        coords = tuple((c.name, Character(tuple(c.weight) + (c.chi,), c.torsion or (0,) * t))
                       for c in self.coordinates)
        gamma = GitProblem(group, coords)
        potential = ()
        if self.options.potential == "generic":
            base = [i for i, c in enumerate(self.coordinates) if c.chi == 0]
            terms = []
            for i, c in enumerate(self.coordinates):
                if c.chi != 1:
                    continue
                sec = Character(tuple(-a for a in c.weight) + (0,), tuple(-a for a in c.torsion or (0,) * t))
                found, _ = monomial_of_weight(sec, [gamma.weights[j] for j in base], group)
                if found is not False:
                    terms.append(GenericSection(i, sec, tuple(base)))
            potential = tuple(terms)
        return Glsm(gamma, Character((0,) * k + (1,)), Character(self.theta, ()), potential)

    def ci(self) -> CiProblem:
        if self.divisors is None:
            raise ValueError("no [divisors] block")
        return CiProblem(self.git(), self.theta, self.divisors)

    def visitor_input(self) -> VisitorInput:
        if self.visitor is None:
            raise ValueError("no [visitor] block")
        t = len(self.torsion)
        return VisitorInput(self.git(), self.theta, tuple(Character(w, (0,) * t) for w in self.visitor))


def _locate(text: str, key: str, section: Optional[str] = None, index: int = 0):
    """(line, column) of ``key =`` inside the index-th occurrence of ``section``."""
    lines = text.splitlines()
    start = 0
    if section is not None:
        hdr = re.compile(r"^\s*\[\[?\s*" + re.escape(section) + r"\s*\]\]?\s*(#.*)?$")
        hits = [i for i, ln in enumerate(lines) if hdr.match(ln)]
        if index < len(hits):
            start = hits[index]
    pat = re.compile(r"^(\s*)" + re.escape(key) + r"\s*=")
    for i in range(start, len(lines)):
        m = pat.match(lines[i])
        if m:
            return i + 1, len(m.group(1)) + 1
        if i > start and section is not None and lines[i].lstrip().startswith("["):
            break
    if section is not None:
        return (start + 1, 1) if lines else (None, None)
    return None, None


def _int(v, what, loc):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ProblemError(f"{what} must be an integer, got {v!r}", *loc)
    return v


def _ints(v, what, loc, length=None):
    if not isinstance(v, list):
        raise ProblemError(f"{what} must be a list of integers", *loc)
    out = tuple(_int(a, what, loc) for a in v)
    if length is not None and len(out) != length:
        raise ProblemError(f"{what} has length {len(out)}, expected {length}", *loc)
    return out


def _check_keys(table, allowed, text, section, index=0):
    for key in table:
        if key not in allowed:
            raise ProblemError(f"unknown key {key!r}", *_locate(text, key, section, index))


def parse(text: str) -> ProblemFile:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        m = re.search(r"\(at line (\d+), column (\d+)\)", str(e))
        msg = re.sub(r"\s*\(at (line \d+, column \d+|end of document)\)", "", str(e))
        if m:
            where = tuple(map(int, m.groups()))
        else:
            lines = text.rstrip("\n").splitlines() or [""]
            where = (len(lines), len(lines[-1]) + 1)
        raise ProblemError(f"malformed input: {msg}", *where) from None
    warnings = []
    for key in data:
        if key not in TOP_KEYS:
            raise ProblemError(f"unknown key {key!r}", *_locate(text, key))
    if "group" not in data:
        raise ProblemError("missing [group] table", 1, 1)
    group = data["group"]
    _check_keys(group, GROUP_KEYS, text, "group")
    k = _int(group.get("free_rank"), "group.free_rank", _locate(text, "free_rank", "group"))
    if k < 0:
        raise ProblemError("group.free_rank must be nonnegative", *_locate(text, "free_rank", "group"))
    torsion = _ints(group.get("torsion", []), "group.torsion", _locate(text, "torsion", "group"))
    if any(d < 2 for d in torsion) or any(b % a for a, b in zip(torsion, torsion[1:])):
        raise ProblemError("group.torsion must list invariant factors d_1 | d_2 | ... with d_i >= 2",
                           *_locate(text, "torsion", "group"))
    coords = data.get("coordinates")
    if not isinstance(coords, list) or not coords:
        raise ProblemError("at least one [[coordinates]] entry is required", *_locate(text, "coordinates"))
    specs = []
    seen = set()
    for i, c in enumerate(coords):
        if not isinstance(c, dict):
            raise ProblemError("coordinates must be tables", *_locate(text, "coordinates"))
        _check_keys(c, COORD_KEYS, text, "coordinates", i)
        loc = lambda key: _locate(text, key, "coordinates", i)  # noqa: E731
        name = c.get("name")
        if not isinstance(name, str) or not name:
            raise ProblemError("coordinate name must be a nonempty string", *loc("name"))
        if name in seen:
            raise ProblemError(f"duplicate coordinate name {name!r}", *loc("name"))
        seen.add(name)
        weight = _ints(c.get("weight"), f"weight of {name}", loc("weight"), k)
        tors = ()
        if torsion:
            tors = _ints(c.get("torsion", [0] * len(torsion)), f"torsion of {name}", loc("torsion"),
                         len(torsion))
            reduced = tuple(a % d for a, d in zip(tors, torsion))
            if reduced != tors:
                line, _ = loc("torsion")
                warnings.append(f"line {line}: torsion residues of {name} normalized to {list(reduced)}")
            tors = reduced
        elif c.get("torsion"):
            raise ProblemError(f"torsion residues given for {name} but the group has no torsion",
                               *loc("torsion"))
        chi = None
        if "chi" in c:
            chi = _int(c["chi"], f"chi of {name}", loc("chi"))
            if chi not in (0, 1):
                raise ProblemError(f"chi of {name} must be 0 or 1", *loc("chi"))
        specs.append(CoordinateSpec(name, weight, tors, chi))
    if any(s.chi is not None for s in specs) and any(s.chi is None for s in specs):
        i = next(j for j, s in enumerate(specs) if s.chi is None)
        raise ProblemError("either every coordinate carries chi or none does",
                           *_locate(text, "name", "coordinates", i))
    if "theta" not in data:
        raise ProblemError("missing theta", None, None)
    theta = _ints(data["theta"], "theta", _locate(text, "theta"), k)
    divisors = None
    if "divisors" in data:
        d = data["divisors"]
        _check_keys(d, DIVISOR_KEYS, text, "divisors")
        loc = _locate(text, "coefficients", "divisors")
        rows = d.get("coefficients", [])
        if not isinstance(rows, list):
            raise ProblemError("divisors.coefficients must be a list of lists", *loc)
        divisors = tuple(_ints(r, "divisor coefficients", loc, len(specs)) for r in rows)
        if any(s.chi is not None for s in specs):
            raise ProblemError("[divisors] needs a plain base without chi", *loc)
    visitor = None
    if "visitor" in data:
        v = data["visitor"]
        _check_keys(v, VISITOR_KEYS, text, "visitor")
        loc = _locate(text, "w_weights", "visitor")
        rows = v.get("w_weights", [])
        if not isinstance(rows, list):
            raise ProblemError("visitor.w_weights must be a list of lists", *loc)
        visitor = tuple(_ints(r, "W weight", loc, k) for r in rows)
    opts = data.get("options", {})
    _check_keys(opts, OPTION_KEYS, text, "options")
    side = opts.get("side", "K")
    if side not in ("K", "-K"):
        raise ProblemError("options.side must be \"K\" or \"-K\"", *_locate(text, "side", "options"))
    seed = _int(opts.get("seed", 0), "options.seed", _locate(text, "seed", "options"))
    fmt = opts.get("format", "json")
    if fmt not in ("json", "text"):
        raise ProblemError("options.format must be \"json\" or \"text\"", *_locate(text, "format", "options"))
    pot = opts.get("potential", "generic")
    if pot not in ("generic", "zero"):
        raise ProblemError("options.potential must be \"generic\" or \"zero\"",
                           *_locate(text, "potential", "options"))
    return ProblemFile(k, torsion, tuple(specs), theta, divisors, visitor,
                       Options(side, seed, fmt, pot), tuple(warnings))


def to_dict(pf: ProblemFile) -> dict:
    out = {"theta": list(pf.theta), "group": {"free_rank": pf.free_rank, "torsion": list(pf.torsion)}}
    coords = []
    for c in pf.coordinates:
        entry = {"name": c.name, "weight": list(c.weight)}
        if pf.torsion:
            entry["torsion"] = list(c.torsion)
        if c.chi is not None:
            entry["chi"] = c.chi
        coords.append(entry)
    out["coordinates"] = coords
    if pf.divisors is not None:
        out["divisors"] = {"coefficients": [list(r) for r in pf.divisors]}
    if pf.visitor is not None:
        out["visitor"] = {"w_weights": [list(r) for r in pf.visitor]}
    o = pf.options
    out["options"] = {"side": o.side, "seed": o.seed, "format": o.format, "potential": o.potential}
    return out


def serialize(pf: ProblemFile) -> str:
    return tomli_w.dumps(to_dict(pf))

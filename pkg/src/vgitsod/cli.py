"""Command-line front end: ``vgitsod COMMAND FILE``.

Exit codes: 0 success, 2 when the requested side has no Kuznetsov chamber, 1 on errors.
Set ``VGITSOD_VERBOSE=1`` for a human summary on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from .git import Character, SecondaryFan, quotient_stacky_fan, secondary_fan
from .glsm import (Glsm, build_ci_glsm, canonical_character, ci_from_glsm, cy_classification,
                   is_geometric, kernel_restriction, kuznetsov_chambers, projection_check,
                   stacky_fan_isomorphism, total_space_fan)
from .lattice import dot
from .problem import ProblemError, ProblemFile, parse, to_dict
from .visitor import build_visitor_glsm, fano_host_check, positive_triple, visitor_sod
from .wallcross import (Exceptional, PathError, SideUndefined, StackBlock, assemble_sod,
                        independence_audit)

__all__ = ["COMMANDS", "run", "export_dot", "main"]

COMMANDS = ("gkz", "kuznetsov", "sod", "ci", "cy", "visitor", "audit")


def _q(x):
    """Exact JSON form: integers stay integers, other rationals become "p/q"."""
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, Character):
        return {"free": list(x.free_part), "torsion": list(x.torsion_part)} if x.torsion_part \
            else list(x.free_part)
    if isinstance(x, (list, tuple)):
        return [_q(a) for a in x]
    return x


def _glsm_of(pf: ProblemFile) -> Glsm:
    if pf.kind == "glsm":
        return pf.glsm()
    if pf.kind == "ci":
        return build_ci_glsm(pf.ci())
    raise ValueError(f"command needs a GLSM or a complete-intersection file, got {pf.kind}")


def _fan_summary(fan: SecondaryFan) -> dict:
    names = fan.git.names
    return {
        "chamber_count": len(fan.chambers),
        "wall_count": len(fan.walls),
        "chambers": [{"id": c.index, "rays": _q(c.cone.rays), "interior_point": _q(c.interior_point),
                      "irrelevant": sorted(sorted(names[i] for i in S) for S in c.minimal_supports)}
                     for c in fan.chambers],
        "walls": [{"id": w.index, "chambers": list(w.chambers), "normal": list(w.normal)} for w in fan.walls],
    }


def _orient(fan: SecondaryFan, wall, theta_K) -> tuple:
    """Wall normal pointing toward theta_K's side (toward the higher-index chamber on ties)."""
    n = tuple(wall.normal)
    s = dot(n, theta_K)
    if s < 0 or (s == 0 and dot(n, fan.chambers[wall.chambers[1]].interior_point) < 0):
        n = tuple(-a for a in n)
    return n


def export_dot(fan: SecondaryFan, placements: Optional[dict] = None,
               theta_K: Optional[tuple] = None) -> str:
    """Chamber adjacency graph in DOT; ``placements`` maps chamber id to annotations."""
    placements = placements or {}
    lines = ["graph secondary_fan {", "  node [shape=box];"]
    for c in fan.chambers:
        tags = placements.get(c.index, ())
        label = f"chamber {c.index}" + (f"\\n{', '.join(tags)}" if tags else "")
        lines.append(f'  c{c.index} [label="{label}"];')
    for w in fan.walls:
        a, b = w.chambers
        if theta_K is not None:
            lam = _orient(fan, w, theta_K)
            label = f"lambda={list(lam)}, r={dot(lam, theta_K)}"
        else:
            label = f"normal={list(w.normal)}"
        lines.append(f'  c{a} -- c{b} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _placements(glsm: Glsm, fan: SecondaryFan) -> dict:
    kc = kuznetsov_chambers(glsm, fan)
    out = {}
    for c, _ in kc.kuznetsov:
        out.setdefault(c.index, []).append("Kuznetsov")
    for c, _ in kc.anti_kuznetsov:
        out.setdefault(c.index, []).append("anti-Kuznetsov")
    g = fan.chamber_containing(glsm.theta.free_part)
    if g is not None:
        out.setdefault(g.index, []).append("geometric" if is_geometric(glsm) else "stability")
    return out


def _kuznetsov_report(glsm: Glsm, fan: SecondaryFan) -> dict:
    kc = kuznetsov_chambers(glsm, fan)
    geo = is_geometric(glsm)
    src = fan.chamber_containing(glsm.theta.free_part)
    return {
        "theta_K": _q(kc.theta_K),
        "theta_antiK": _q(kc.theta_antiK),
        "status": kc.status,
        "kuznetsov": [{"chamber": c.index, "theta_K_eps": _q(p)} for c, p in kc.kuznetsov],
        "anti_kuznetsov": [{"chamber": c.index, "theta_antiK_eps": _q(p)} for c, p in kc.anti_kuznetsov],
        "stability_chamber": None if src is None else src.index,
        "geometric": {"verdict": geo.geometric,
                      "clauses": [{"clause": n, "passed": ok, "detail": d} for n, ok, d in geo.clauses]},
    }


def _labels(glsm: Glsm) -> tuple:
    ci = ci_from_glsm(glsm)
    if ci is None or ci.r != 1:
        return ()
    try:
        cls = cy_classification(ci)
    except ValueError:
        return ()
    return cls.labels


def _ledger_report(glsm: Glsm, side: str, seed: int, fan: SecondaryFan) -> dict:
    led = assemble_sod(glsm, side, seed, fan=fan, labels=_labels(glsm) if side == "K" else ())
    names = fan.git.names
    blocks = []
    for b in led.blocks:
        if isinstance(b, Exceptional):
            blocks.append({"type": "exceptional", "count": b.count, "wall": b.wall, "r": b.r, "rank": b.rank})
        elif isinstance(b, StackBlock):
            blocks.append({"type": "stack", "copies": b.copies, "wall": b.wall,
                           "descriptor": b.descriptor, "reason": b.reason})
    events = []
    for e in led.events:
        ev = {"wall": e.wall, "from": e.source, "to": e.destination, "lambda": list(e.lam), "l": e.l,
              "r": e.r, "fixed": [names[i] for i in e.fixed],
              "wall_stack": {"descriptor": e.wall_stack.descriptor, "rank": e.wall_stack.rank,
                             "theta_W": _q(e.wall_stack.theta)}}
        if e.certificates is not None:
            c = e.certificates
            ev["certificates"] = {"ample_disjoint": c.ample_disjoint, "strongly_convex": c.strongly_convex,
                                  "potential_vanishes": c.potential_vanishes, "passed": c.passed,
                                  "details": list(c.details)}
        events.append(ev)
    return {
        "side": side,
        "sod": led.describe(),
        "path": {"start": _q(led.plan.start), "target": _q(led.plan.target), "seed": led.plan.seed,
                 "dither_exponent": led.plan.dither_exponent,
                 "crossings": [{"wall": c.wall, "t": _q(c.t), "from": c.source, "to": c.destination}
                               for c in led.plan.crossings],
                 "chambers": list(led.plan.chambers)},
        "events": events,
        "blocks": blocks,
        "residual": {"name": led.residual.name, "chamber": led.residual.chamber,
                     "labels": list(led.residual.labels)},
        "total_exceptional": led.total_exceptional,
        "lower_bound": led.lower_bound,
    }


def _audit_report(glsm: Glsm) -> dict:
    a = independence_audit(glsm)
    return {
        "kuznetsov_chambers": list(a.chambers),
        "connections": [{"from": x, "to": y, "walls": [{"wall": w, "r": r} for w, r in walls],
                         "connected": ok} for x, y, walls, ok in a.connections],
        "totals": [{"chamber": m, "seed": s, "total_exceptional": t, "lower_bound": lb}
                   for m, s, t, lb in a.totals],
        "totals_agree": a.totals_agree,
        "passed": a.passed,
    }


def _cy_report(ci) -> dict:
    cls = cy_classification(ci)
    return {"q": _q(cls.q), "label": cls.label, "labels": list(cls.labels), "cartier": cls.cartier}


def _ci_report(pf: ProblemFile, seed: int) -> dict:
    ci = pf.ci()
    glsm = build_ci_glsm(ci)
    kgit = kernel_restriction(glsm).git
    fan = secondary_fan(kgit)
    direct = total_space_fan(ci)
    quotient = quotient_stacky_fan(kgit, ci.theta)
    iso = stacky_fan_isomorphism(direct, quotient)
    pr = projection_check(ci)
    out = {
        "kernel_weights": [_q(w) for w in kgit.weights],
        "total_space_fan": {"rays": {direct.names[i]: list(direct.images[i]) for i in direct.ray_indices},
                            "maximal_cones": len(direct.cones),
                            "agrees_with_quotient": iso is not None},
        "projection": {"commutes": pr.commutes, "rows_exact": list(pr.rows_exact),
                       "bundle_images": [_q(c) for c in pr.bundle_images]},
        "secondary_fan": {"chamber_count": len(fan.chambers), "wall_count": len(fan.walls)},
        "kuznetsov": _kuznetsov_report(glsm, fan),
        "ledgers": {},
    }
    for side in ("K", "-K"):
        try:
            out["ledgers"][side] = _ledger_report(glsm, side, seed, fan)
        except SideUndefined as e:
            out["ledgers"][side] = {"side": side, "undefined": str(e)}
    if ci.r == 1:
        try:
            out["cy"] = _cy_report(ci)
        except ValueError as e:
            out["cy"] = {"error": str(e)}
    return out


def _visitor_report(pf: ProblemFile) -> dict:
    inp = pf.visitor_input()
    vg = build_visitor_glsm(inp)
    led = visitor_sod(vg)
    host = fano_host_check(vg)
    pt = positive_triple(inp.base, inp.w_weights, inp.theta)
    names = vg.glsm.names
    return {
        "weights": {names[i]: _q(w) for i, w in enumerate(vg.glsm.gamma_git.weights)},
        "phases": {"plus": _q(vg.theta_plus), "minus": _q(vg.theta_minus),
                   "plus_is_projective_bundle": vg.phase_plus_ok(),
                   "minus_is_vector_bundle": vg.phase_minus_ok()},
        "lambda": list(vg.lam),
        "fixed": [names[i] for i in vg.fixed],
        "sod": led.describe(),
        "blocks": [{"block": name, "exceptional": rk} for name, rk in led.blocks],
        "r": led.r,
        "total_exceptional": led.total_exceptional,
        "lower_bound": led.lower_bound,
        "fano_host": {"passed": host.passed, "nef": host.nef, "dim_W_at_least_2": host.dimension,
                      "relative_ample": host.relative_ample, "fast_path": host.fast_path},
        "positive_triple": {"result": pt.result, "method": pt.method, "sufficient": pt.sufficient,
                            "exact": pt.exact},
    }


def run(command: str, pf: ProblemFile, side: Optional[str] = None, seed: Optional[int] = None) -> tuple:
    """Execute ``command``; returns ``(exit_code, report)``."""
    side = side or pf.options.side
    seed = pf.options.seed if seed is None else seed
    report = {"command": command, "input": to_dict(pf)}
    if pf.warnings:
        report["warnings"] = list(pf.warnings)
    try:
        if command == "gkz":
            git = kernel_restriction(_glsm_of(pf)).git if pf.kind in ("glsm", "ci") else pf.git()
            report["secondary_fan"] = _fan_summary(secondary_fan(git))
        elif command == "kuznetsov":
            glsm = _glsm_of(pf)
            report["kuznetsov"] = _kuznetsov_report(glsm, secondary_fan(kernel_restriction(glsm).git))
        elif command == "sod":
            glsm = _glsm_of(pf)
            fan = secondary_fan(kernel_restriction(glsm).git)
            report["ledger"] = _ledger_report(glsm, side, seed, fan)
        elif command == "ci":
            report["ci"] = _ci_report(pf, seed)
        elif command == "cy":
            ci = pf.ci() if pf.kind == "ci" else ci_from_glsm(_glsm_of(pf))
            if ci is None:
                raise ValueError("no complete-intersection structure to classify")
            report["cy"] = _cy_report(ci)
        elif command == "visitor":
            report["visitor"] = _visitor_report(pf)
        elif command == "audit":
            report["audit"] = _audit_report(_glsm_of(pf))
        else:
            raise ValueError(f"unknown command {command!r}")
    except SideUndefined as e:
        report["error"] = {"code": "undefined-side", "message": str(e)}
        return 2, report
    except PathError as e:
        report["error"] = {"code": "path", "message": str(e)}
        return 1, report
    except ValueError as e:
        report["error"] = {"code": "invalid", "message": str(e)}
        return 1, report
    return 0, report


def render(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="vgitsod", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("file", help="TOML problem file")
    ap.add_argument("--side", choices=("K", "-K"), help="ledger side for sod (default from file)")
    ap.add_argument("--seed", type=int, help="perturbation seed (default from file)")
    ap.add_argument("--dot", action="store_true", help="gkz: print the chamber graph in DOT")
    argv = list(sys.argv[1:] if argv is None else argv)
    # "--side -K" would otherwise read -K as an option
    for i in range(len(argv) - 1):
        if argv[i] == "--side" and argv[i + 1] == "-K":
            argv[i:i + 2] = ["--side=-K", ""]
    args = ap.parse_args([a for a in argv if a != ""])
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
        pf = parse(text)
    except (OSError, ProblemError) as e:
        err = {"code": "parse", "message": str(e)}
        if isinstance(e, ProblemError):
            err.update(line=e.line, column=e.column)
        sys.stdout.write(render({"command": args.command, "error": err}))
        return 1
    if args.command == "gkz" and args.dot:
        try:
            if pf.kind in ("glsm", "ci"):
                glsm = _glsm_of(pf)
                fan = secondary_fan(kernel_restriction(glsm).git)
                text = export_dot(fan, _placements(glsm, fan), canonical_character(glsm).theta_K.free_part)
            else:
                text = export_dot(secondary_fan(pf.git()))
        except ValueError as e:
            sys.stdout.write(render({"command": "gkz", "error": {"code": "invalid", "message": str(e)}}))
            return 1
        sys.stdout.write(text)
        return 0
    code, report = run(args.command, pf, args.side, args.seed)
    sys.stdout.write(render(report))
    if os.environ.get("VGITSOD_VERBOSE"):
        summary = report.get("ledger", {}).get("sod") or report.get("error", {}).get("message", "")
        sys.stderr.write(f"{args.command}: exit {code} {summary}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())

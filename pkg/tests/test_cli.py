import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from builders import PROBLEMS, load
from vgitsod.cli import export_dot, main, render, run
from vgitsod.git import GitProblem, secondary_fan
from vgitsod.problem import CoordinateSpec, Options, ProblemError, ProblemFile, parse, serialize

CUBIC = """\
theta = [1]

[group]
free_rank = 1
torsion = []

[[coordinates]]
name = "x1"
weight = [1]
chi = 0

[[coordinates]]
name = "x2"
weight = [1]
chi = 0

[[coordinates]]
name = "x3"
weight = [1]
chi = 0

[[coordinates]]
name = "x4"
weight = [1]
chi = 0

[[coordinates]]
name = "x5"
weight = [1]
chi = 0

[[coordinates]]
name = "x6"
weight = [1]
chi = 0

[[coordinates]]
name = "p"
weight = [-3]
chi = 1
"""


def run_main(args, capsys):
    code = main(args)
    return code, capsys.readouterr().out


class TestParse:
    def test_cubic_fourfold(self):
        pf = parse(CUBIC)
        assert pf.kind == "glsm" and pf.free_rank == 1
        assert pf.names == ("x1", "x2", "x3", "x4", "x5", "x6", "p")
        assert pf.coordinates[-1] == CoordinateSpec("p", (-3,), (), 1)

    def test_weight_of_wrong_length(self):
        text = CUBIC.replace('name = "x3"\nweight = [1]', 'name = "x3"\nweight = [1, 2]')
        with pytest.raises(ProblemError) as info:
            parse(text)
        assert "weight of x3" in info.value.bare
        line = text.splitlines()[info.value.line - 1]
        assert line.startswith("weight = [1, 2]") and info.value.column == 1

    def test_torsion_residue_is_normalized(self):
        text = """\
theta = [1]
[group]
free_rank = 1
torsion = [2]
[[coordinates]]
name = "a"
weight = [1]
torsion = [3]
[[coordinates]]
name = "b"
weight = [1]
"""
        pf = parse(text)
        assert pf.coordinates[0].torsion == (1,)
        assert pf.warnings and "normalized" in pf.warnings[0]

    def test_unknown_key(self):
        with pytest.raises(ProblemError, match="unknown key 'colour'") as info:
            parse(CUBIC + '\n[options]\ncolour = "red"\n')
        assert info.value.line is not None

    def test_malformed(self):
        with pytest.raises(ProblemError, match="malformed") as info:
            parse("theta = [1\n")
        assert info.value.line is not None

    def test_mixed_chi(self):
        text = CUBIC.replace('name = "x2"\nweight = [1]\nchi = 0', 'name = "x2"\nweight = [1]')
        with pytest.raises(ProblemError, match="every coordinate"):
            parse(text)

    def test_bad_torsion_chain(self):
        with pytest.raises(ProblemError, match="invariant factors"):
            parse(CUBIC.replace("torsion = []", "torsion = [4, 6]"))

    @pytest.mark.parametrize("path", sorted(PROBLEMS.glob("*.toml")), ids=lambda p: p.stem)
    def test_fixtures_round_trip(self, path):
        pf = parse(path.read_text())
        assert parse(serialize(pf)) == pf


names = st.lists(st.from_regex(r"[a-z][a-z0-9_]{0,5}", fullmatch=True), min_size=1, max_size=6, unique=True)


@st.composite
def problem_files(draw):
    k = draw(st.integers(0, 3))
    torsion = draw(st.sampled_from([(), (2,), (2, 4), (3,)]))
    coord_names = draw(names)
    chis = draw(st.one_of(st.none(), st.lists(st.integers(0, 1), min_size=len(coord_names),
                                               max_size=len(coord_names))))
    coords = []
    for i, nm in enumerate(coord_names):
        w = tuple(draw(st.lists(st.integers(-9, 9), min_size=k, max_size=k)))
        tors = tuple(draw(st.integers(0, d - 1)) for d in torsion)
        coords.append(CoordinateSpec(nm, w, tors, None if chis is None else chis[i]))
    theta = tuple(draw(st.lists(st.integers(-5, 5), min_size=k, max_size=k)))
    divisors = visitor = None
    if chis is None and draw(st.booleans()):
        divisors = tuple(tuple(draw(st.lists(st.integers(0, 3), min_size=len(coords), max_size=len(coords))))
                         for _ in range(draw(st.integers(0, 2))))
    if chis is None and draw(st.booleans()):
        visitor = tuple(tuple(draw(st.lists(st.integers(-3, 3), min_size=k, max_size=k)))
                        for _ in range(draw(st.integers(0, 2))))
    opts = Options(draw(st.sampled_from(["K", "-K"])), draw(st.integers(0, 100)),
                   draw(st.sampled_from(["json", "text"])), draw(st.sampled_from(["generic", "zero"])))
    return ProblemFile(k, torsion, tuple(coords), theta, divisors, visitor, opts)


@settings(max_examples=100, deadline=None)
@given(problem_files())
def test_serialize_then_parse_is_identity(pf):
    assert parse(serialize(pf)) == pf


class TestRun:
    def test_sod_on_cubic_fourfold(self):
        code, rep = run("sod", parse(CUBIC), "K")
        assert code == 0
        assert rep["ledger"]["total_exceptional"] == 3
        assert "K-CY" in rep["ledger"]["residual"]["labels"]

    def test_audit_on_quintic(self):
        code, rep = run("audit", load("quintic_threefold.toml"))
        assert code == 0
        assert len(rep["audit"]["kuznetsov_chambers"]) == 2
        assert rep["audit"]["passed"]
        assert all(w["r"] == 0 for c in rep["audit"]["connections"] for w in c["walls"])

    def test_visitor(self):
        code, rep = run("visitor", load("two_quadrics_visitor.toml"))
        v = rep["visitor"]
        assert code == 0 and v["total_exceptional"] == 6 and v["fano_host"]["passed"]
        assert v["sod"].endswith("D^b(Z)>")

    def test_cy(self):
        code, rep = run("cy", parse(CUBIC))
        assert code == 0 and rep["cy"]["q"] == "1/2" and rep["cy"]["label"] == "K-CY"

    def test_ci(self):
        code, rep = run("ci", load("p1xp1_11.toml"))
        ci = rep["ci"]
        assert code == 0
        assert ci["total_space_fan"]["agrees_with_quotient"] and ci["projection"]["commutes"]
        assert ci["ledgers"]["K"]["total_exceptional"] == 2

    def test_kind_mismatch(self):
        code, rep = run("visitor", parse(CUBIC))
        assert code == 1 and rep["error"]["code"] == "invalid"

    def test_reports_are_byte_stable(self):
        pf = load("p1xp1_11.toml")
        assert render(run("ci", pf)[1]) == render(run("ci", pf)[1])


class TestMain:
    def test_undefined_side_exit_code(self, tmp_path, capsys):
        f = tmp_path / "plane.toml"
        f.write_text("""\
theta = [1]
[group]
free_rank = 1
[[coordinates]]
name = "x"
weight = [1]
chi = 0
[[coordinates]]
name = "y"
weight = [1]
chi = 0
""")
        code, out = run_main(["sod", str(f), "--side", "K"], capsys)
        assert code == 2
        assert json.loads(out)["error"]["code"] == "undefined-side"

    def test_minus_side_argument(self, capsys):
        code, out = run_main(["sod", str(PROBLEMS / "cubic_fourfold.toml"), "--side", "-K"], capsys)
        assert code == 0 and json.loads(out)["ledger"]["side"] == "-K"

    def test_parse_error(self, tmp_path, capsys):
        f = tmp_path / "bad.toml"
        f.write_text("theta = [1]\n[group]\nfree_rank = 1\nbogus = 2\n")
        code, out = run_main(["gkz", str(f)], capsys)
        err = json.loads(out)["error"]
        assert code == 1 and err["code"] == "parse" and err["line"] == 4

    def test_console_script_module(self):
        proc = subprocess.run([sys.executable, "-m", "vgitsod.cli", "cy", str(PROBLEMS / "cubic_fourfold.toml")],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0 and json.loads(proc.stdout)["cy"]["q"] == "1/2"


class TestDot:
    @staticmethod
    def counts(text):
        nodes = sum(1 for ln in text.splitlines() if "[label=" in ln and "--" not in ln)
        edges = sum(1 for ln in text.splitlines() if "--" in ln)
        return nodes, edges

    def test_hypersurface(self, capsys):
        code, out = run_main(["gkz", str(PROBLEMS / "cubic_fourfold.toml"), "--dot"], capsys)
        assert code == 0 and self.counts(out) == (2, 1)
        assert "r=3" in out

    def test_p1xp1(self, capsys):
        code, out = run_main(["gkz", str(PROBLEMS / "p1xp1_11.toml"), "--dot"], capsys)
        assert self.counts(out) == (3, 3)
        assert "r=0" in out

    def test_one_chamber(self):
        text = export_dot(secondary_fan(GitProblem.from_weights([(1,)])))
        assert self.counts(text) == (1, 0)

import json
import math
from importlib import resources

import jsonschema
import pytest

from pwsampling.cli import COMMANDS, run


def _schema(name):
    return json.loads(resources.files("pwsampling").joinpath("schemas", f"{name}.json").read_text())


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    star = write("star10.tsv", "".join(f"v0\tv{i}\t1\n" for i in range(1, 11)))
    star_p = write("star_p.txt", "v0\n" + " ".join(f"v{i}" for i in range(1, 11)) + "\n")
    c15 = write("c15.tsv", "".join(f"{i}\t{(i + 1) % 15}\t1\n" for i in range(15)))
    c15_p = write(
        "c15_p.txt",
        " ".join(str(i) for i in range(0, 15, 3)) + "\n" + " ".join(str(i) for i in range(15) if i % 3) + "\n",
    )
    c15_closure = write("c15_closure.txt", "0 3 6 9 12\n1 2 4 5 7 8 10 11 13 14\n")
    samples = "".join(f"{i}\t{math.cos(2 * math.pi * i / 15):.17g}\n" for i in range(0, 15, 3))
    return {
        "star": star,
        "star_p": star_p,
        "star_sig": write("star_sig.tsv", "v0\t1\nv1\t0.5\n"),
        "star_zero_s0": write("star_z.tsv", "v1\t1\nv2\t-2\n"),
        "c15": c15,
        "c15_p": c15_p,
        "c15_closure": c15_closure,
        "c15_samples": write("c15_samples.tsv", samples),
        "c15_zero_samples": write("zeros.tsv", "".join(f"{i}\t0\n" for i in range(0, 15, 3))),
        "c15_truth": write("truth.tsv", "".join(f"{i}\t{math.cos(2 * math.pi * i / 15):.17g}\n" for i in range(15))),
        "bad_graph": write("bad.tsv", "a\tb\t1\nb\tc\tnope\n"),
        "dir": tmp_path,
    }


def _invoke(capsys, argv):
    code = run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _ok(capsys, argv, expect=0):
    code, out, err = _invoke(capsys, argv)
    assert code == expect, err
    doc = json.loads(out)
    jsonschema.validate(doc, _schema(argv[0]))
    return doc


def test_every_subcommand_has_a_schema():
    for name in COMMANDS:
        jsonschema.Draft202012Validator.check_schema(_schema(name))


def test_constants_star(capsys, files):
    doc = _ok(capsys, ["constants", "--graph", files["star"], "--partition", files["star_p"], "--p", "2"])
    pc = doc["partition_constants"]
    assert pc["D"] == [10.0] and pc["K"] == [1.0] and pc["delta"] == 1.0
    assert pc["a"] == pytest.approx(math.sqrt(11), rel=1e-15)


def test_poincare_and_shells(capsys, files):
    base = ["--graph", files["star"], "--partition", files["star_p"]]
    doc = _ok(capsys, ["poincare", *base, "--chain", files["star_p"], "--signal", files["star_sig"], "--p", "1.5"])
    assert doc["passed"] and {c["name"] for c in doc["checks"]} >= {"poincare_forward", "poincare_reverse"}
    doc = _ok(capsys, ["poincare", *base, "--signal", files["star_zero_s0"], "--p", "inf"])
    assert [c["name"] for c in doc["checks"]] == ["poincare_zero_on_S0"]
    doc = _ok(capsys, ["shells", *base, "--signal", files["star_sig"]])
    assert doc["shells"][0]["m"] == 1


def test_spectrum_and_projection(capsys, files):
    doc = _ok(capsys, ["spectrum", "--graph", files["star"]])
    assert doc["eigenvalues"][0] == 0 and doc["eigenvalues"][-1] == pytest.approx(11)
    doc = _ok(capsys, ["pw-project", "--graph", files["star"], "--signal", files["star_sig"], "--omega", "0"])
    assert doc["dim"] == 1
    assert list(doc["signal"].values()) == pytest.approx([1.5 / 11] * 11)


def test_geometry(capsys, files):
    doc = _ok(capsys, ["geometry", "--graph", files["c15"], "--partition", files["c15_closure"]])
    assert doc["passed"]


def test_frame_bounds_and_reconstruct(capsys, files):
    doc = _ok(capsys, ["frame-bounds", "--graph", files["c15"], "--partition", files["c15_p"], "--omega", "0.4"])
    assert doc["bounds"]["A"] <= doc["exact"]["lower"] <= doc["exact"]["upper"] <= doc["bounds"]["B"]
    doc = _ok(
        capsys,
        ["reconstruct", "--graph", files["c15"], "--samples", files["c15_samples"], "--omega", "0.4",
         "--signal", files["c15_truth"]],
    )
    assert doc["converged"] and doc["errors"][-1] < 1e-8


def test_reconstruct_zero_samples(capsys, files):
    doc = _ok(capsys, ["reconstruct", "--graph", files["c15"], "--samples", files["c15_zero_samples"], "--omega", "0.4"])
    assert doc["iterations"] == 1 and set(doc["signal"].values()) == {0.0}


def test_pp_check_requires_seed(capsys, files):
    argv = ["pp-check", "--graph", files["c15"], "--partition", files["c15_p"], "--omega", "0.05"]
    code, _, err = _invoke(capsys, argv)
    assert code == 2 and "--seed" in err
    doc = _ok(capsys, argv + ["--seed", "3"])
    assert doc["passed"]


def test_shannon_matches_library(capsys):
    from pwsampling.records import jsonable
    from pwsampling.shannon import shannon_demo

    doc = _ok(capsys, ["shannon", "--k", "5", "--omega", "0.1", "--periods", "45"])
    expected = jsonable(shannon_demo(5, 0.1, 45, seed=0).to_dict())
    assert {k: v for k, v in doc.items() if k != "command"} == expected


def test_examples(capsys):
    doc = _ok(capsys, ["examples"])
    assert doc["passed"]


def test_failed_check_exits_one(capsys, files, monkeypatch):
    import pwsampling.cli as cli

    real = cli.poincare_forward_check

    def broken(*a, **k):
        rec = real(*a, **k)
        rec.rhs = rec.lhs - 1.0
        return rec

    monkeypatch.setattr(cli, "poincare_forward_check", broken)
    doc = _ok(capsys, ["poincare", "--graph", files["star"], "--partition", files["star_p"],
                       "--signal", files["star_sig"]], expect=1)
    assert doc["passed"] is False


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["spectrum", "--graph", "BAD"], "line 2"),
        (["spectrum"], "--graph"),
        (["constants", "--graph", "STAR"], "--partition"),
        (["spectrum", "--graph", "/nonexistent/x.tsv"], "cannot read"),
        (["shannon", "--k", "5", "--omega", "1.0"], "iff"),
        (["frame-bounds", "--graph", "C15", "--partition", "C15P", "--omega", "0.6"], "uniqueness"),
    ],
)
def test_usage_errors_exit_two(capsys, files, argv, fragment):
    sub = {"BAD": files["bad_graph"], "STAR": files["star"], "C15": files["c15"], "C15P": files["c15_p"]}
    code, out, err = _invoke(capsys, [sub.get(a, a) for a in argv])
    assert code == 2 and out == ""
    assert fragment in err


def test_unknown_subcommand(capsys):
    code, _, _ = _invoke(capsys, ["nope"])
    assert code == 2


def test_output_is_byte_identical(capsys, files):
    argv = ["pp-check", "--graph", files["c15"], "--partition", files["c15_p"], "--omega", "0.05", "--seed", "11"]
    _, a, _ = _invoke(capsys, argv)
    _, b, _ = _invoke(capsys, argv)
    assert a == b and a


def test_out_and_pretty(capsys, files):
    out = files["dir"] / "report.json"
    assert run(["spectrum", "--graph", files["star"], "--out", str(out)]) == 0
    assert json.loads(out.read_text())["n_vertices"] == 11
    code, text, _ = _invoke(capsys, ["spectrum", "--graph", files["star"], "--pretty"])
    assert code == 0 and text.startswith("command")

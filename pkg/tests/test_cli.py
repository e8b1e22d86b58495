import json
import math

import pytest

from bilift.cli import main
from bilift.lifting import NEG_INFINITY, read_lifting_csv

R2 = math.sqrt(2.0)


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    return _write


def run(args, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_gen_cut_seed_example(write, tmp_path):
    code, text = run(["gen-cut", "--instance", write("i.json", {"a": [2, 2], "d": 3})], tmp_path)
    assert code == 0
    doc = json.loads(text)
    seeds = [c["cut"] for c in doc["cuts"] if c["cut"]["type"] == "bilinear_cover"]
    assert len(seeds) == 1
    assert seeds[0]["coeffs"] == pytest.approx([2 + R2, 2 + R2], abs=1e-12)
    parts = [(c["partition"]["I"], c["partition"]["J1"]) for c in doc["cuts"]]
    assert parts == sorted(parts)
    assert doc["config"]["seed"] == 0 and doc["config"]["extreme_cap"] == 14


def test_gen_cut_exit_codes(write, tmp_path, capsys):
    assert main(["gen-cut", "--instance", write("nc.json", {"a": [1, -100], "d": -98})]) == 3
    assert "polyhedral" in capsys.readouterr().err
    assert main(["gen-cut", "--instance", write("inf.json", {"a": [1, 1], "d": 3})]) == 2
    assert main(["gen-cut", "--instance", write("bad.json", "{a")]) == 4
    assert main(["gen-cut", "--instance", str(tmp_path / "missing.json")]) == 4


def test_bad_flags_exit_as_malformed(write):
    with pytest.raises(SystemExit) as exc:
        main(["gen-cut", "--instance", write("i.json", {"a": [2, 2], "d": 3}), "--tol", "0"])
    assert exc.value.code == 4


def test_lift_reports_cover_quantities(write, tmp_path):
    inst = write("m.json", {"a": [2, 2, -1, 3], "d": 5, "partition": {"I": [1, 2], "J1": [4]}})
    code, text = run(["lift", "--instance", inst], tmp_path)
    assert code == 0
    entry = json.loads(text)["lifting"][0]
    assert entry["cover"]["delta"] == 2.0
    assert entry["cover"]["i0"] is None  # both cover coefficients equal delta
    assert entry["binary_points"] == [-2.0, 0.0, 2.0]
    assert [g["class"] for g in entry["gammas"]] == ["J0minus", "J1plus_small"]


def test_verify_generated_and_corrupted(write, tmp_path):
    inst = write("i.json", {"a": [2, 2], "d": 3})
    code, text = run(["verify", "--instance", inst, "--samples", "2000"], tmp_path)
    assert code == 0
    assert json.loads(text)["violated"] is False
    cut = {"type": "bilinear_cover", "I": [1, 2], "coeffs": [1.5 * (2 + R2), 2 + R2], "rhs": -1.0}
    code, text = run(["verify", "--instance", inst, "--cut", write("c.json", cut), "--samples", "2000"], tmp_path)
    assert code == 1
    rep = json.loads(text)["reports"][0]
    assert rep["violated"] is True
    assert rep["witness"]["slack"] >= -1e-12
    assert main(["verify", "--instance", inst, "--cut", write("u.json", {"type": "other"})]) == 4


def test_verify_round_trips_gen_cut_output(write, tmp_path):
    inst = write("m.json", {"a": [2, 2, -1, 3], "d": 5})
    run(["gen-cut", "--instance", inst], tmp_path, "cuts.json")
    code, text = run(["verify", "--instance", inst, "--cut", str(tmp_path / "cuts.json"), "--samples", "1000"], tmp_path)
    assert code == 0
    assert len(json.loads(text)["reports"]) >= 1


def test_strength(write, tmp_path):
    code, text = run(["strength", "--instance", write("i.json", {"a": [2, 2], "d": 3})], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert doc["strength"]["ratio"] == pytest.approx(1.0, abs=1e-9)
    assert doc["within_factor_4"] is True
    assert doc["comparison_cut"]["type"] == "relaxed_cover"
    obj = {"a": [2, 1], "d": 2, "objective": {"p": [1, 2], "q": [1, 0]}}
    code, text = run(["strength", "--instance", write("o.json", obj)], tmp_path)
    assert code == 0
    bad = {"a": [2, 1], "d": 2, "objective": {"p": [-1, 2], "q": [1, 0]}}
    assert main(["strength", "--instance", write("b.json", bad)]) == 4


def test_plot_lifting_equal_coefficients(write, tmp_path):
    code, text = run(["plot-lifting", "--instance", write("f.json", {"a": [1, 1], "d": 1}), "--grid", "41"], tmp_path, "f.csv")
    assert code == 0
    header = json.loads(text.splitlines()[0][2:])
    assert header["l_plus"] == header["l_minus"] == 1.0
    rows = read_lifting_csv(text)
    for s in rows:
        if s.delta in (-1.0, 0.0, 1.0):
            assert s.phi == pytest.approx(s.psi, abs=1e-12)
        if s.phi is not NEG_INFINITY:
            assert s.psi >= s.phi - 1e-9


def test_seqlift_commands(write, tmp_path):
    ex1 = {
        "Q": [[1, 2]],
        "a": [0],
        "b": [0, 0],
        "c": 1,
        "fix": {"y": [None, 0]},
        "k": {"var": "y", "index": 2},
        "seed": {"rhs": 1, "terms": [{"kind": "sqrt", "x": 1, "y": 1}]},
    }
    code, text = run(["seqlift", "--instance", write("e1.json", ex1)], tmp_path)
    assert code == 0
    lift = json.loads(text)["lift"]
    assert abs(lift["coefficient"] - 2.0) <= 1e-3
    assert lift["config"]["grid"] == 64
    ex2 = {
        "Q": [[1], [0]],
        "a": [-0.5, -0.25],
        "b": [-0.25],
        "c": 0,
        "fix": {"x": [None, 0.5]},
        "k": 2,
        "seed": {"rhs": 0.75, "terms": [{"kind": "x", "i": 1}]},
    }
    code, text = run(["seqlift", "--instance", write("e2.json", ex2)], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert doc["liftable"] is False
    assert doc["certificate"]["alpha_at_most"] == "-3/2"


@pytest.mark.parametrize(
    "command, extra, data",
    [
        ("gen-cut", [], {"a": [2, 2, -1, 3], "d": 5}),
        ("verify", ["--samples", "500"], {"a": [2, 2, -1, 3], "d": 5}),
        ("strength", [], {"a": [2, 1], "d": 2}),
        ("plot-lifting", ["--grid", "21"], {"a": [2, 2, -1, 3], "d": 5}),
    ],
)
def test_outputs_are_byte_identical(write, tmp_path, command, extra, data):
    inst = write("m.json", data)
    first = tmp_path / "a.out"
    second = tmp_path / "b.out"
    assert main([command, "--instance", inst, "--out", str(first)] + extra) == 0
    assert main([command, "--instance", inst, "--out", str(second)] + extra) == 0
    assert first.read_bytes() == second.read_bytes()

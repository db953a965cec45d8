import json

import pytest

from walklab.cli import main, parse_family_spec
from walklab.graphs import FamilySpec

SMALL = ["--family-spec", "path:n=4", "--family-spec", "complete:n=3",
         "--family-spec", "lollipop:d=3,n=8,seed=1"]
FAST = ["--horizon", "32", "--replicas", "50", "--domination-replicas", "50", "--meeting-trials", "5"]


def usage_error(args):
    with pytest.raises(SystemExit) as info:
        main(args)
    return info.value.code


def test_gen_complete(capsys):
    assert main(["gen", "--family", "complete", "--n", "4"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj == {"n": 4, "edges": [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]]}


def test_gen_lollipop_to_file(tmp_path):
    out = tmp_path / "g.json"
    assert main(["gen", "--family", "lollipop", "--d", "3", "--n", "8", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["n"] == 8


@pytest.mark.parametrize("args", [
    ["gen", "--family", "path", "--n", "0"],
    ["gen", "--family", "nosuch", "--n", "3"],
    ["sweep", "--kind", "lollipop", "--sizes", "16"],
    ["simulate", "--family", "path", "--n", "4", "--replicas", "0"],
    ["analyze"],
])
def test_usage_errors(args):
    assert usage_error(args) == 2


def test_verify_empty_families_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"families": []}))
    assert usage_error(["verify", "--config", str(cfg)]) == 2


def test_parse_family_spec():
    assert parse_family_spec("lollipop:d=3,n=16,seed=4") == FamilySpec("lollipop", {"d": 3, "n": 16}, 4)
    assert parse_family_spec("path:n=5") == FamilySpec("path", {"n": 5}, 0)


def test_analyze_k2(tmp_path, capsys):
    g = tmp_path / "k2.json"
    g.write_text('{"n": 2, "edges": [[0, 1]]}')
    assert main(["analyze", "--graph", str(g)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["t_hit"] == pytest.approx(2.0) and rep["t_rel"] == pytest.approx(1.0)
    assert rep["t_mix"] == 1 and rep["pi"] == ["1/2", "1/2"]


def test_verify_with_negative_control(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["verify", *SMALL, *FAST, "--negative-control", "--output-dir", str(out)])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["failures"] == []
    assert [e["status"] for e in summary["expected_failures"]] == ["expected_failure"]
    for name in ("hitting", "return", "green", "network", "meeting", "coalescing", "sharpness"):
        head = (out / f"{name}.csv").read_bytes().split(b"\r\n")[0]
        assert head == b"name,graph_label,x,t,lhs,rhs,margin,pass"
    assert (out / "meeting_survival.csv").exists()
    sims = json.loads((out / "coalescing.json").read_text())
    assert [s["graph_label"] for s in sims] == sorted(s["graph_label"] for s in sims)


def test_verify_subset_of_checks(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--family-spec", "cycle:n=5", "--checks", "hitting,network",
                 "--output-dir", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["hitting.csv", "network.csv", "summary.json"]
    assert usage_error(["verify", "--checks", "bogus", "--output-dir", str(out)]) == 2


def test_verify_exit_status_on_failure(tmp_path, monkeypatch):
    # a check that cannot pass makes the run fail
    import walklab.suite as suite
    from walklab.checks import BoundCheck
    monkeypatch.setattr(suite, "verify_hitting_bounds", lambda a: [BoundCheck.le("forced", 2.0, 1.0, context=a.label)])
    out = tmp_path / "out"
    assert main(["verify", "--family-spec", "path:n=3", "--checks", "hitting", "--output-dir", str(out)]) == 1
    summary = json.loads((out / "summary.json").read_text())
    assert [f["name"] for f in summary["failures"]] == ["forced"]


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"families": [{"family": "star", "n": 5}], "horizon": 16,
                               "checks": ["return"], "output_dir": str(tmp_path / "a")}))
    assert main(["verify", "--config", str(cfg), "--horizon", "8", "--output-dir", str(tmp_path / "b")]) == 0
    summary = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert summary["config"]["horizon"] == 8 and summary["graphs"] == ["star(n=5)"]


def test_verify_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["verify", *SMALL, *FAST, "--output-dir", str(tmp_path / name)]) == 0
    for f in sorted((tmp_path / "a").iterdir()):
        other = tmp_path / "b" / f.name
        if f.name == "summary.json":
            a, b = json.loads(f.read_text()), json.loads(other.read_text())
            for d in (a, b):
                d.pop("header")
                d["config"].pop("output_dir")
            assert a == b
        else:
            assert f.read_bytes() == other.read_bytes(), f.name


def test_simulate_is_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        p = tmp_path / f"{name}.json"
        assert main(["simulate", "--family", "cycle", "--n", "6", "--replicas", "300",
                     "--sim-seed", "9", "--out", str(p)]) == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads(outs[0])
    assert rep["replicas"] == 300 and rep["seed"] == 9


def test_sweep_writes_table(tmp_path, capsys):
    assert main(["sweep", "--kind", "stretched_expander", "--sizes", "1,2,3", "--n0", "6",
                 "--output-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "sweep_stretched_expander.csv").read_text().splitlines()
    assert len(lines) == 4
    slopes = json.loads((tmp_path / "sweep_stretched_expander.json").read_text())["slopes"]
    assert set(slopes) == {"t_hit_vs_n_sqrt_trel", "t_rel_vs_k"}

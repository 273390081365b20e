import json
from pathlib import Path

import pytest

from discrit.cli import compare_graphs, main, run_pipeline
from discrit.config import ConfigError, config_hash, validate_config
from discrit.graphs import EdgeGraph, save_graph


def minimal_config(tmp_path, **extra):
    doc = {
        "output_dir": str(tmp_path / "out"),
        "seeds": [0],
        "deployment": {"kind": "grid", "n": 4, "region": {"width": 1000, "height": 1000}},
    }
    doc.update(extra)
    return doc


def small_full_config(tmp_path):
    return {
        "output_dir": str(tmp_path / "out"),
        "seeds": [1],
        "deployment": {"kind": "uniform-iid", "n": 120,
                       "region": {"width": 500, "height": 500}},
        "channel": {"alpha": 0.1, "slots": 400},
        "protocol": {"mode": "discrit"},
        "interior_margin": 0.1,
    }


def test_minimal_deploy_only(tmp_path):
    doc = minimal_config(tmp_path)
    assert run_pipeline(doc) == 0
    out = tmp_path / "out"
    assert (out / "seed-0" / "deployment.csv").exists()
    assert (out / "manifest.json").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_sha256"] == config_hash(doc)
    assert manifest["seeds"] == [0]
    assert {e["file"] for e in manifest["artifacts"]} >= {
        "seed-0/deployment.csv", "seed-0/deployment.json"}


def test_pipeline_reruns_byte_identical(tmp_path):
    doc = small_full_config(tmp_path)
    run_pipeline(doc)
    out = Path(doc["output_dir"])
    first = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
    run_pipeline(doc)
    second = {p: p.read_bytes() for p in out.rglob("*") if p.is_file()}
    assert first.keys() == second.keys()
    assert all(first[p] == second[p] for p in first)


def test_full_pipeline_writes_disparity_table(tmp_path):
    doc = small_full_config(tmp_path)
    run_pipeline(doc)
    out = Path(doc["output_dir"])
    lines = (out / "disparity.csv").read_text().strip().splitlines()
    assert lines[0] == "seed,kind,scope,g_a,g_b,d_ab,d_ba"
    scopes = {line.split(",")[2] for line in lines[1:]}
    assert scopes == {"all", "interior"}
    assert (out / "seed-1" / "protocol.edges.csv").exists()
    assert (out / "seed-1" / "trace.csv").exists()
    assert (out / "seed-1" / "hello.weights.csv").exists()


def test_invalid_config_rejected(tmp_path):
    with pytest.raises(ConfigError, match="seeds"):
        validate_config({"output_dir": "x", "seeds": [], "deployment": {"kind": "grid", "n": 4}})
    with pytest.raises(ConfigError):
        validate_config(minimal_config(tmp_path, unknown_block={}))


def test_cli_main_deploy_and_flags(tmp_path, capsys):
    out = tmp_path / "cli-out"
    rc = main(["deploy", "--out", str(out), "--n", "9", "--kind", "grid", "--seed", "3"])
    assert rc == 0
    rows = (out / "seed-3" / "deployment.csv").read_text().strip().splitlines()
    assert len(rows) == 10  # header + 9 nodes


def test_cli_main_error_exit(tmp_path):
    rc = main(["deploy", "--config", str(tmp_path / "missing.json")])
    assert rc == 1


def test_compare_graphs(tmp_path, capsys):
    g = EdgeGraph(4, frozenset([(0, 1), (1, 2)]))
    empty = EdgeGraph(4, frozenset())
    save_graph(g, tmp_path / "a")
    save_graph(g, tmp_path / "b")
    save_graph(empty, tmp_path / "e")
    assert compare_graphs(tmp_path / "a.edges.csv", tmp_path / "b.edges.csv") == (0.0, 0.0)
    d_ab, d_ba = compare_graphs(tmp_path / "a.edges.csv", tmp_path / "e.edges.csv")
    assert d_ab == 1.0 and d_ba is None
    rc = main(["compare", str(tmp_path / "a.edges.csv"), str(tmp_path / "e.edges.csv")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "D(a,b) = 1.0" in out and "undefined" in out
    mismatched = EdgeGraph(5, frozenset([(0, 1)]))
    save_graph(mismatched, tmp_path / "m")
    with pytest.raises(ValueError):
        compare_graphs(tmp_path / "a.edges.csv", tmp_path / "m.edges.csv")


def test_compare_pinned_seed_goldens(tmp_path):
    # Frozen from the first verified run of this fixture; any drift in
    # the deployment, channel, or protocol stream shows up here.
    from discrit.channel import ChannelParams, simulate_hello
    from discrit.geometry import Region, generate_deployment
    from discrit.graphs import critical_radius
    from discrit.protocol import run_discrit

    dep = generate_deployment("uniform-iid", 150, Region(500, 500), 1)
    params = ChannelParams(p_t=0.05, eta=4.0, sigma2=1e-10, beta=4.0, alpha=0.1, slots=400)
    ghat, _ = run_discrit(simulate_hello(dep, params, 1))
    _, cgg = critical_radius(dep)
    save_graph(ghat, tmp_path / "ghat")
    save_graph(cgg, tmp_path / "cgg")
    d_ab, d_ba = compare_graphs(tmp_path / "ghat.edges.csv", tmp_path / "cgg.edges.csv")
    assert d_ab == 0.13394919168591224
    assert d_ba == 0.07635467980295567


def test_output_dir_env_override(tmp_path, monkeypatch):
    doc = minimal_config(tmp_path)
    override = tmp_path / "elsewhere"
    monkeypatch.setenv("DISCRIT_OUTPUT_DIR", str(override))
    run_pipeline(doc)
    assert (override / "seed-0" / "deployment.csv").exists()
    assert not (tmp_path / "out").exists()

import hashlib
import json
import re
from pathlib import Path

import numpy as np
import pytest

from reachset.cli import build_parser, main
from reachset.config import FIGURE_MODELS, RunConfig
from reachset.geometry import polygon_area
from reachset.ingest import TrailSet
from reachset.models import KinematicState


def sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def metrica_file(path, n_frames=120, seed=0):
    """Two players walking smooth curves, Metrica column layout, normalised coords."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_frames) / 25.0
    cols = []
    for k in range(2):
        w = rng.uniform(0.2, 0.6)
        cols.append(0.5 + 0.05 * np.cos(w * t + k))
        cols.append(0.5 + 0.05 * np.sin(w * t + k))
    lines = [",,,Home,,Home,,,", ",,,1,,2,,,", "Period,Frame,Time [s],Player1,,Player2,,Ball,"]
    for i in range(n_frames):
        vals = ",".join(f"{c[i]:.6f}" for c in cols)
        lines.append(f"1,{i + 1},{t[i]:.2f},{vals},NaN,NaN")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def synth(tmp_path):
    out = tmp_path / "syn.csv"
    assert main(["synth", "--n-trails", "400", "--seed", "3", "--out", str(out)]) == 0
    return out


def test_defaults_match_experiment_constants():
    cfg = RunConfig()
    assert (cfg.dt, cfg.hit_ratio_min, cfg.n_trails, cfg.n_vertices) == (1.0, 0.99975, 500_000, 200)
    args = build_parser().parse_args(["validate"])
    assert (args.dt, args.hit_ratio_min, args.n_trails, args.n_vertices) == (1.0, 0.99975, 500_000, 200)
    assert args.threads is None  # resolved to all cores at run time


def test_trails_from_metrica(tmp_path):
    src = metrica_file(tmp_path / "game.csv")
    out = tmp_path / "t.csv"
    assert main(["trails", str(src), "--n-trails", "50", "--seed", "1", "--out", str(out)]) == 0
    ts = TrailSet.load(out)
    assert len(ts) == 50
    np.testing.assert_array_equal(ts.dt, 1.0)
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["seed"] == 1

    out2 = tmp_path / "t2.csv"
    main(["trails", str(src), "--n-trails", "50", "--seed", "1", "--out", str(out2)])
    assert sha(out) == sha(out2)
    main(["trails", str(src), "--n-trails", "50", "--seed", "2", "--out", str(out2)])
    assert sha(out) != sha(out2)


def test_trails_too_many_requested(tmp_path, capsys):
    src = metrica_file(tmp_path / "game.csv")
    assert main(["trails", str(src), "--n-trails", "100000", "--out", str(tmp_path / "t.csv")]) != 0
    err = capsys.readouterr().err
    # start frame needs a central-difference velocity (frames 1..118 of 0..119),
    # end frame only a position 25 frames later: starts 1..94 -> 94 per player
    assert "188" in err


def test_trails_parse_error_has_context(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text(",,,Home,\n,,,1,\nPeriod,Frame,Time [s],Player1,\n1,1,0.04,0.5,0.5\n1,x,0.08,0.5,0.5\n")
    assert main(["trails", str(bad), "--n-trails", "1", "--out", str(tmp_path / "t.csv")]) == 2
    assert "row" in capsys.readouterr().err


def test_validate_matched_model(tmp_path, synth):
    out = tmp_path / "v.json"
    assert main(["validate", "--trails", str(synth), "--model",
                 '{"model": "constant_speed", "v_max": 8.5}', "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["hit_ratio"] == 1.0 and res["n_correct"] == 400
    assert res["score_inverse_m2"] == pytest.approx(1 / res["score"])
    assert res["model"] == {"model": "constant_speed", "v_max": 8.5}


def test_validate_outlier_with_strict_threshold(tmp_path):
    syn = tmp_path / "o.csv"
    main(["synth", "--n-trails", "400", "--outlier-fraction", "0.0025", "--seed", "3", "--out", str(syn)])
    out = tmp_path / "v.json"
    assert main(["validate", "--trails", str(syn), "--hit-ratio-min", "1.0", "--model",
                 '{"model": "constant_speed", "v_max": 8.5}', "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["score"] == 0.0 and res["n_incorrect"] == 1 and res["score_inverse_m2"] is None


def test_validate_bad_model_is_config_error(synth, capsys):
    assert main(["validate", "--trails", str(synth), "--model",
                 '{"model": "constant_speed", "v_max": -1}']) == 2
    assert main(["validate", "--trails", str(synth), "--model", '{"model": "warp"}']) == 2


def test_optimize_deterministic(tmp_path, synth):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["optimize", "--trails", str(synth), "--families", "constant_speed",
            "--budget", "12", "--hit-ratio-min", "0.99", "--threads", "1"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert sha(a / "optimize.json") == sha(b / "optimize.json")
    assert sha(a / "trace_constant_speed.csv") == sha(b / "trace_constant_speed.csv")
    doc = json.loads((a / "optimize.json").read_text())
    assert doc["winner"] == "constant_speed"
    assert doc["families"]["constant_speed"]["evaluations"] == 12


def test_optimize_config_file(tmp_path, synth):
    cfg = tmp_path / "opt.toml"
    cfg.write_text('families = ["constant_speed"]\nbudget = 11\n[bounds]\nv_max = [6.0, 12.0]\n')
    assert main(["optimize", "--trails", str(synth), "--config", str(cfg), "--threads", "1",
                 "--out", str(tmp_path / "o")]) == 0
    doc = json.loads((tmp_path / "o" / "optimize.json").read_text())
    v = doc["families"]["constant_speed"]["best_params"]["v_max"]
    assert 6.0 <= v <= 12.0 and doc["families"]["constant_speed"]["evaluations"] == 11


def test_optimize_empty_families(tmp_path, synth, capsys):
    assert main(["optimize", "--trails", str(synth), "--families", "--out", str(tmp_path)]) == 2
    assert "no model families" in capsys.readouterr().err


def test_synth_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["synth", "--generator", "capped_accel", "--a-true", "6", "--n-trails", "300",
                     "--seed", "9", "--out", str(p)]) == 0
    assert sha(a) == sha(b) and len(TrailSet.load(a)) == 300


def _svg_polygons(text):
    polys = []
    for pts in re.findall(r'<polygon points="([^"]+)"', text):
        xy = np.array([[float(v) for v in p.split(",")] for p in pts.split()])
        polys.append(xy)
    return polys


def test_plot_figure_models(tmp_path):
    out = tmp_path / "fig"
    assert main(["plot", "--figure-models", "--out", str(out)]) == 0
    text = (out / "boundaries.svg").read_text()
    polys = _svg_polygons(text)
    assert len(polys) == 4 and all(len(p) == 200 for p in polys)
    # (b) encloses more than (a) for this large a_max
    state = KinematicState((0.0, 0.0), (5.0, 0.0))
    areas = {k: polygon_area(m.reachable_polygon(state, 1.0)) for k, m in FIGURE_MODELS.items()}
    assert areas["(b) constant acceleration"] > areas["(a) constant speed"]
    svg_area = lambda p: abs(0.5 * np.sum(p[:, 0] * np.roll(p[:, 1], -1) - np.roll(p[:, 0], -1) * p[:, 1]))
    assert svg_area(polys[1]) > svg_area(polys[0])

    out2 = tmp_path / "fig2"
    main(["plot", "--figure-models", "--out", str(out2)])
    assert sha(out / "boundaries.svg") == sha(out2 / "boundaries.svg")


def test_plot_models_file(tmp_path):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"v0": [3.0, 1.0], "models": {
        "slow": {"model": "constant_speed", "v_max": 5.0},
        "fast": {"model": "constant_speed", "v_max": 9.0}}}))
    assert main(["plot", "--models", str(cfg), "--out", str(tmp_path)]) == 0
    assert len(_svg_polygons((tmp_path / "boundaries.svg").read_text())) == 2


def test_plot_single_result(tmp_path, synth):
    res = tmp_path / "v.json"
    main(["validate", "--trails", str(synth), "--model",
          '{"model": "constant_speed", "v_max": 8.5}', "--out", str(res)])
    assert main(["plot", "--results", str(res), "--out", str(tmp_path / "f")]) == 0
    text = (tmp_path / "f" / "scores.svg").read_text()
    assert text.count("<rect") == 2  # background + one bar
    assert "constant_speed" in text


def test_plot_malformed_results(tmp_path, capsys):
    bad = tmp_path / "r.json"
    bad.write_text(json.dumps({"families": {"constant_speed": {"best_params": {}}}}))
    assert main(["plot", "--results", str(bad), "--out", str(tmp_path)]) == 2
    assert "best_score" in capsys.readouterr().err
    bad.write_text(json.dumps({"score": 0.1}))
    assert main(["plot", "--results", str(bad), "--out", str(tmp_path)]) == 2
    assert "'model'" in capsys.readouterr().err
    bad.write_text("{not json")
    assert main(["plot", "--results", str(bad), "--out", str(tmp_path)]) == 2


def test_plot_without_inputs(tmp_path):
    assert main(["plot", "--out", str(tmp_path)]) == 2


def test_log_env(monkeypatch, synth, capsys):
    monkeypatch.setenv("REACHSET_LOG", "info")
    assert main(["validate", "--trails", str(synth), "--n-outliers", "5", "--hit-ratio-min", "1.0",
                 "--model", '{"model": "constant_speed", "v_max": 8.5}']) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["n_total"] == 400

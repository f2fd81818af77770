import csv
import json
from pathlib import Path

import numpy as np
import pytest

from helpers import newsvendor_loss, two_source_scenarios
from mrdro.cli import DOMINANCE_HEADER, main
from mrdro.fusion import SupportPolytope, WeightedScenarioSet
from mrdro.reform import DecisionSet, DroInstance, dump_instance
from mrdro.sim import SUMMARY_HEADER, TRAJECTORY_HEADER, TRUST_HEADER

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def header(path):
    with open(path) as fh:
        return next(csv.reader(fh))


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def small_baseline(tmp_path, **replace):
    text = (CONFIGS / "baseline.toml").read_text().replace("holdout = 40", "holdout = 2")
    for old, new in replace.items():
        text = text.replace(old, new)
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return p


def newsvendor_file(tmp_path, epsilon=0.0, scenarios=None, support=None, name="inst.json"):
    inst = DroInstance(newsvendor_loss(), scenarios or two_source_scenarios(),
                       support or SupportPolytope.box(0.0, 30.0, 1), epsilon, "L1", DecisionSet.box(0.0, np.inf, 1))
    p = tmp_path / name
    dump_instance(inst, p)
    return p


# run


def test_run_baseline_writes_six_model_rows(tmp_path, capsys):
    cfg = small_baseline(tmp_path)
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--trials", "1", "--events", "2"]) == 0
    assert header(out / "summary.csv") == SUMMARY_HEADER
    assert header(out / "trajectory.csv") == TRAJECTORY_HEADER
    assert header(out / "trust_history.csv") == TRUST_HEADER
    assert header(out / "results.csv") == ["trial", "model", "objective", "avg_loss", "solve_seconds"]
    assert header(out / "oos.csv") == ["trial", "model", "oos_loss", "oos_loss_k"]
    names = [r["model"] for r in rows(out / "summary.csv")]
    assert names == ["MR-DRO (Min-max)", "MR-DRO (Exponential)", "MR-DRO (Variable-share)",
                     "DRO (h1)", "DRO (h2)", "DRO (h3)"]
    r = rows(out / "summary.csv")[0]
    assert float(r["loss_k"]) == pytest.approx(float(r["loss_mean"]) / 1000.0)
    assert "MR-DRO (Min-max)" in capsys.readouterr().out


def test_seed_flag_determines_output(tmp_path):
    cfg = small_baseline(tmp_path, **{'application = "resource"': 'application = "resource"\ntiming = false'})
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--seed", "17", "--events", "2"]) == 0
        outs.append({p: (out / p).read_bytes() for p in ("summary.csv", "trajectory.csv", "trust_history.csv")})
    assert outs[0] == outs[1]


def test_missing_eta_exits_2_and_names_the_key(tmp_path, capsys):
    cfg = small_baseline(tmp_path, **{'method = "Exponential"\neta = 0.5': 'method = "Exponential"'})
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--trials", "1", "--events", "1"]) == 2
    assert "eta" in capsys.readouterr().err


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.toml")]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("application = \n")
    assert main(["run", "--config", str(bad)]) == 2
    bad.write_text('application = "resource"\nseeds = [1]\nevents = 1\n[resource]\nregions = 2\n')
    assert main(["run", "--config", str(bad)]) == 2
    assert "errors" in capsys.readouterr().err


def test_single_source_single_event(tmp_path):
    cfg = tmp_path / "one.toml"
    cfg.write_text('application = "resource"\nseeds = [1]\nevents = 1\nholdout = 1\n'
                   '[resource]\nregions = 2\n[errors]\nmean = [[0, 1]]\nstd = [[1, 2]]\n')
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(rows(out / "summary.csv")) == 1
    assert len(rows(out / "trajectory.csv")) == 1
    assert len(rows(out / "oos.csv")) == 1


def test_solver_failure_exits_3(tmp_path, monkeypatch, capsys):
    import mrdro.sim as sim
    from mrdro.errors import SolveFailed
    from mrdro.lp import LpStatus

    def boom(plan, revised, trust):
        raise SolveFailed(LpStatus.INFEASIBLE)

    monkeypatch.setattr(sim, "_solve", boom)
    cfg = small_baseline(tmp_path)
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--trials", "1", "--events", "1"]) == 3
    assert "solve failure" in capsys.readouterr().err


def test_portfolio_config_runs(tmp_path):
    cfg = tmp_path / "p.toml"
    text = (CONFIGS / "portfolio.toml").read_text()
    cfg.write_text(text)
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--trials", "1", "--events", "2"]) == 0
    assert [r["model"] for r in rows(out / "summary.csv")][-1] == "DRO (h4)"


# dominance


def dominance_cfg(tmp_path, mean, std, pair="[0, 1]", seeds="[1, 2]", events=300):
    p = tmp_path / "dom.toml"
    p.write_text(f'application = "resource"\nseeds = {seeds}\nevents = {events}\n'
                 f'[resource]\nregions = {len(mean[0])}\n[errors]\nmean = {mean}\nstd = {std}\n'
                 f'[dominance]\npair = {pair}\ntrajectory = true\n')
    return p


def test_dominance_identical_sources_near_half(tmp_path):
    cfg = dominance_cfg(tmp_path, [[0], [0]], [[2], [2]], seeds="[1, 2, 3]", events=1000)
    out = tmp_path / "o"
    assert main(["dominance", "--config", str(cfg), "--out", str(out)]) == 0
    assert header(out / "dominance.csv") == DOMINANCE_HEADER
    r = rows(out / "dominance.csv")
    assert abs(np.mean([float(x["estimate"]) for x in r]) - 0.5) < 0.05
    assert (out / "dominance_trust_1.csv").exists()


def test_dominance_deterministic_separation(tmp_path):
    cfg = dominance_cfg(tmp_path, [[0], [5]], [[1e-6], [1e-6]])
    out = tmp_path / "o"
    assert main(["dominance", "--config", str(cfg), "--out", str(out), "--json"]) == 0
    for r in rows(out / "dominance.csv"):
        assert float(r["estimate"]) == 1.0 and r["fsd"] == "1"
        assert float(r["final_trust_y"]) == 1.0


def test_dominance_bad_pair_exits_2(tmp_path, capsys):
    cfg = dominance_cfg(tmp_path, [[0], [5]], [[1], [1]], pair="[0, 0]")
    assert main(["dominance", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "pair" in capsys.readouterr().err
    cfg = dominance_cfg(tmp_path, [[0], [5]], [[1], [1]], pair="[0, 4]")
    assert main(["dominance", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


# solve


def test_solve_prints_saa_optimum(tmp_path, capsys):
    p = newsvendor_file(tmp_path)
    assert main(["solve", str(p), "--json"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["objective"] == pytest.approx(4200.0, abs=1e-7)
    assert rec["x"] == pytest.approx([11.0])
    assert main(["solve", str(p), "--solver", "highs"]) == 0
    assert "objective" in capsys.readouterr().out


def test_solve_sweep_is_monotone(tmp_path, capsys):
    p = newsvendor_file(tmp_path)
    assert main(["solve", str(p), "--sweep", "0.5,0,0.01,0.1", "--json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert [r["epsilon"] for r in recs] == [0.0, 0.01, 0.1, 0.5]
    obj = [r["objective"] for r in recs]
    assert all(b >= a - 1e-9 for a, b in zip(obj, obj[1:]))
    assert main(["solve", str(p), "--sweep", "a,b"]) == 2


def test_solve_epsilon_override(tmp_path, capsys):
    p = newsvendor_file(tmp_path, epsilon=5.0)
    assert main(["solve", str(p), "--epsilon", "0", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["objective"] == pytest.approx(4200.0)


def test_solve_malformed_instance_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dims": {"M": 1}}')
    assert main(["solve", str(bad)]) == 2
    bad.write_text("not json")
    assert main(["solve", str(bad)]) == 2
    assert main(["solve", str(tmp_path / "missing.json")]) == 2


def test_solve_unbounded_exits_3(tmp_path, capsys):
    far = WeightedScenarioSet.uniform(np.array([[40.0]]))
    p = newsvendor_file(tmp_path, epsilon=0.01, scenarios=far)
    assert main(["solve", str(p)]) == 3
    assert "solve failed" in capsys.readouterr().err

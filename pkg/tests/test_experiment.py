import math

import numpy as np
import pytest

from dynim import experiment as ex
from dynim.diffusion import DiffusionConfig
from dynim.graph import GraphInputError, write_snapshot_dir
from dynim.predictor import PredictorModel, TrainConfig
from dynim.syngen import BA, EvolutionConfig, generate_dynamic


def rows_for(spreads, times, cands=(2, 2), nodes=10):
    out = []
    for t, ((fs, cs), (ft, ct)) in enumerate(zip(spreads, times)):
        base = dict(snapshot=t, k=5, spread_std=0.0, nodes=nodes, edges=20)
        out.append(dict(base, method="full_greedy", spread_mean=fs, wall_time_ms=ft, candidates=nodes))
        out.append(dict(base, method="candidate_greedy", spread_mean=cs, wall_time_ms=ct, candidates=cands[t % len(cands)]))
    return out


def zero_model(d=3):
    m = PredictorModel.init(TrainConfig(hidden=4, sage_dims=(3, 3), d=d))
    for a in m.params().values():
        a[...] = 0.0
    return m


@pytest.fixture(scope="module")
def dyn():
    return generate_dynamic(60, 6, BA(2), EvolutionConfig(0.2, 0.4, 5))


def test_summary_equal_spreads():
    s = ex.summarize(rows_for([(4.0, 4.0), (6.0, 6.0)], [(10.0, 5.0), (8.0, 8.0)]))
    assert s["spread_ratio"] == 1.0


def test_summary_double_speed():
    s = ex.summarize(rows_for([(4.0, 3.0), (6.0, 6.0)], [(10.0, 5.0), (8.0, 4.0)]))
    assert s["speedup"] == 2.0
    assert s["spread_ratio"] == pytest.approx((0.75 + 1.0) / 2)


def test_summary_small_candidate_subset():
    rows = rows_for([(1, 1), (1, 1)], [(9.0, 3.0), (8.0, 8.0)], cands=(2, 9))
    s = ex.summarize(rows)
    assert s["small_snapshots"] == 1 and s["speedup_small"] == 3.0


def test_summary_skips_zero_spread_and_missing_arm():
    rows = rows_for([(0.0, 0.0), (2.0, 1.0)], [(1.0, 1.0), (1.0, 1.0)])
    assert ex.summarize(rows)["spread_ratio"] == 0.5
    with pytest.raises(GraphInputError):
        ex.summarize([r for r in rows if r["method"] == "full_greedy"])


def test_summary_no_small_snapshots_is_nan():
    s = ex.summarize(rows_for([(1, 1)], [(1.0, 1.0)], cands=(9,)))
    assert math.isnan(s["speedup_small"])
    assert "snapshots compared" in ex.format_report(s)


def test_label_snapshots_handles_empty(dyn):
    from dynim.graph import TemporalGraph, build_snapshot

    tg = TemporalGraph((dyn[0], build_snapshot([], 60, False)), dyn.labels)
    out = ex.label_snapshots(tg, 40)
    assert out[1] is None and out[0][1].labels.sum() > 0


def test_label_snapshots_weighted(dyn):
    plain = ex.label_snapshots(dyn, 40)
    weighted = ex.label_snapshots(dyn, 40, weight=0.1)
    assert not np.array_equal(plain[0][0].local, weighted[0][0].local)


def test_labels_roundtrip(dyn, tmp_path):
    labelled = ex.label_snapshots(dyn, 40)
    ex.write_labels(tmp_path, dyn, labelled)
    back = ex.read_labels(tmp_path, dyn)
    assert all(np.array_equal(b, l[1].labels) for b, l in zip(back, labelled))
    (tmp_path / "labels_0003.csv").unlink()
    with pytest.raises(FileNotFoundError):
        ex.read_labels(tmp_path, dyn)


def test_zero_model_candidate_arm_equals_full_greedy(dyn):
    rows = ex.compare(dyn, zero_model(), 3, DiffusionConfig("IC", 0.2, 40, 7))
    by = {(r["snapshot"], r["method"]): r for r in rows}
    for t in range(3, dyn.T):
        f, c = by[(t, "full_greedy")], by[(t, "candidate_greedy")]
        assert c["candidates"] == f["nodes"]
        assert c["seeds"] == f["seeds"]
        assert c["spread_mean"] == f["spread_mean"] and c["spread_std"] == f["spread_std"]


def test_compare_rows_sorted_and_consistent(dyn):
    m = PredictorModel.init(TrainConfig(hidden=4, sage_dims=(3, 3)))
    rows = ex.compare(dyn, m, 2, DiffusionConfig(mc=20), lazy=True, time_inference=True)
    keys = [(r["snapshot"], r["method"]) for r in rows]
    assert keys == sorted(keys) and len(rows) == 2 * (dyn.T - 3)
    for r in rows:
        assert r["candidates"] <= r["nodes"] and r["wall_time_ms"] >= 0 and "inference_ms" in r


def test_compare_parallel_matches_serial(dyn, tmp_path):
    model = PredictorModel.init(TrainConfig(hidden=4, sage_dims=(3, 3), seed=3))
    write_snapshot_dir(dyn, tmp_path / "d")
    model.save(tmp_path / "m.json")
    cfg = DiffusionConfig("IC", 0.1, 30, 2)
    serial = ex.compare(dyn, model, 3, cfg)
    par = ex.compare(dyn, model, 3, cfg, workers=2, data_dir=tmp_path / "d", model_path=tmp_path / "m.json")
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_time_ms"} for r in rows]
    assert strip(serial) == strip(par)
    with pytest.raises(ValueError):
        ex.compare(dyn, model, 3, cfg, workers=2)


def test_shared_diffusion_seed_per_snapshot():
    a = ex.snapshot_diffusion(DiffusionConfig(seed=1), 4)
    assert a == ex.snapshot_diffusion(DiffusionConfig(seed=1), 4)
    assert a.seed != ex.snapshot_diffusion(DiffusionConfig(seed=1), 5).seed


def test_comparison_csv_roundtrip(tmp_path):
    rows = rows_for([(4.0, 3.5)], [(10.0, 5.0)])
    rows[0]["spread_mean"] = np.float64(4.0)
    f = tmp_path / "c.csv"
    ex.write_comparison_csv(f, rows)
    text = f.read_text()
    assert "np." not in text
    back = ex.read_comparison_csv(f)
    assert [r["spread_mean"] for r in back] == [4.0, 3.5]
    ex.write_comparison_seeds(tmp_path / "s.csv", [dict(rows[0], seeds=[3, 1])])
    assert (tmp_path / "s.csv").read_text() == "snapshot,method,rank,node\n0,full_greedy,1,3\n0,full_greedy,2,1\n"


def test_summary_json(tmp_path):
    s = ex.summarize(rows_for([(2.0, 2.0)], [(4.0, 2.0)]))
    ex.write_summary_json(tmp_path / "s.json", s)
    assert '"speedup": 2.0' in (tmp_path / "s.json").read_text()


def test_experiment_config_k():
    with pytest.raises(GraphInputError):
        ex.ExperimentConfig(data="x", k=0)

"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and shown in the terminal summary. Criteria 6 to 8
share one full-scale Barabasi-Albert run (about 15 minutes on one core) and are
marked ``slow``; deselect them with ``-m "not slow"``.
"""
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, path, random_graph, star, triangle
from dynim import experiment as ex
from dynim.cli import main as cli
from dynim.diffusion import DiffusionConfig, estimate_spread, exact_spread_bruteforce, standard_error
from dynim.graph import build_snapshot, scc_count, snapshot_stats, undirected_projection
from dynim.ifc import ifc_scores, kshell_coreness, label_candidates
from dynim.nn import grad_check
from dynim.predictor import PredictorModel, TrainConfig, model_loss_closure, train
from dynim.seedsel import greedy_select, lazy_greedy_select
from dynim.syngen import BA, EvolutionConfig, generate_ba, generate_dynamic, generate_er


def record(n, ok, detail, seconds=None, limit=None):
    if limit is not None and seconds is not None and seconds >= limit:
        ok = False
        detail += f"; over the {limit:.0f}s budget"
    timing = "" if seconds is None else f" [{seconds:.1f}s]"
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}{timing}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def peel_oracle(s):
    """Coreness by repeatedly deleting one minimum-degree node."""
    adj = {v: set(s.neighbors(v).tolist()) for v in range(s.num_nodes)}
    core = np.zeros(s.num_nodes, dtype=np.int64)
    k = 0
    while adj:
        v = min(adj, key=lambda x: (len(adj[x]), x))
        k = max(k, len(adj[v]))
        core[v] = k
        for u in adj.pop(v):
            adj[u].discard(v)
    return core


def test_c01_ifc_hand_oracles():
    t0 = time.perf_counter()
    expected = {
        "star": (star(), [4, 4, 4, 4], [2, 4 / 3, 4 / 3, 4 / 3], [1, 2 / 3, 2 / 3, 2 / 3]),
        "triangle": (triangle(), [5, 5, 5], [4, 4, 4], [1, 1, 1]),
        "path": (path(3), [3, 3, 3], [1.5, 2, 1.5], [0.75, 1, 0.75]),
    }
    worst = 0.0
    for s, local, glob, comb in expected.values():
        sc = ifc_scores(s)
        for got, want in ((sc.local, local), (sc.global_, glob), (sc.combined, comb)):
            worst = max(worst, float(np.max(np.abs(got - np.asarray(want, float)))))
    record(1, worst <= 1e-12, f"IFC star/triangle/path max abs error {worst:.1e}", time.perf_counter() - t0, 1)


def test_c02_kshell_matches_peeling_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    bad = 0
    for i in range(50):
        n = int(rng.integers(10, 201))
        seed = int(rng.integers(1 << 30))
        s = generate_er(n, float(rng.uniform(0.01, 0.1)), seed) if i % 2 else generate_ba(n, int(rng.integers(1, 5)), seed)
        bad += not np.array_equal(kshell_coreness(s), peel_oracle(s))
    record(2, bad == 0, f"{50 - bad}/50 ER/BA graphs match the peeling oracle", time.perf_counter() - t0, 10)


def test_c03_diffusion_matches_exact_enumeration():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst, fails = 0.0, 0
    for g in range(20):
        n = int(rng.integers(3, 9))
        s = random_graph(rng, n, int(rng.integers(3, 11)), directed=True)
        nodes = s.present_nodes()
        seeds = rng.choice(nodes, size=min(len(nodes), int(rng.integers(1, 3))), replace=False).tolist()
        for p in (0.1, 0.3, 0.5, 0.9):
            exact = exact_spread_bruteforce(s, seeds, p)
            est = estimate_spread(s, seeds, DiffusionConfig("IC", p, 200_000, 100 * g + int(10 * p)))
            se = standard_error(est)
            # a zero-variance estimate is compared to the enumeration up to its roundoff
            z = abs(est.mean - exact) / se if se > 0 else (0.0 if abs(est.mean - exact) <= 1e-12 else np.inf)
            worst = max(worst, z)
            fails += z > 4
    p_path = exact_spread_bruteforce(path(3, directed=True), [0], 0.5)
    arc = exact_spread_bruteforce(build_snapshot([(0, 1)], 2, True), [0], 0.3)
    closed = abs(p_path - 1.75) <= 1e-12 and abs(arc - 1.3) <= 1e-12
    record(3, fails == 0 and closed,
           f"80 estimates, worst {worst:.2f} SE from exact; path 1.75 and arc 1.3 {'exact' if closed else 'WRONG'}",
           time.perf_counter() - t0, 300)


def test_c04_full_model_gradient_check():
    t0 = time.perf_counter()
    tg = generate_dynamic(12, 5, BA(2), EvolutionConfig(0.3, 0.3, 0))
    labels = [label_candidates(ifc_scores(s), 40).labels for s in tg.snapshots]
    model = PredictorModel.init(TrainConfig(hidden=8, d=3, sage_dims=(6, 6), seed=0))
    err = grad_check(model_loss_closure(model, tg, labels), model.params())
    record(4, err < 1e-4, f"predictor grad check max relative error {err:.2e}", time.perf_counter() - t0, 120)


def _zero_model():
    m = PredictorModel.init(TrainConfig(hidden=4, sage_dims=(3, 3)))
    for a in m.params().values():
        a[...] = 0.0
    return m


def test_c05_greedy_equivalences():
    t0 = time.perf_counter()
    cfg = DiffusionConfig("IC", 0.2, 100, 5)
    rng = np.random.default_rng(5)
    fixtures = [star(), triangle(), path(5), star(directed=True), path(6, directed=True)]
    fixtures += [random_graph(rng, 40, 100, directed=bool(i % 2)) for i in range(5)]
    same_c = sum(greedy_select(s, s.present_nodes().tolist(), 3, cfg) == greedy_select(s, None, 3, cfg) for s in fixtures)
    # the harness path: a predictor that flags every present node
    tg = generate_dynamic(50, 5, BA(2), EvolutionConfig(0.2, 0.4, 1))
    rows = {(r["snapshot"], r["method"]): r for r in ex.compare(tg, _zero_model(), 3, cfg)}
    harness = all(rows[(t, "full_greedy")]["seeds"] == rows[(t, "candidate_greedy")]["seeds"] for t in range(3, 5))

    same_lazy = 0
    for i in range(20):
        n = int(rng.integers(20, 101))
        s = generate_ba(n, int(rng.integers(1, 4)), i) if i % 2 else random_graph(rng, n, 3 * n, directed=i % 4 == 0)
        c = DiffusionConfig("IC", float(rng.choice([0.05, 0.1, 0.3])), 100, i)
        eager, lazy = greedy_select(s, None, 5, c), lazy_greedy_select(s, None, 5, c)
        # evaluation counts differ by design; the selection itself must not
        same_lazy += (eager.nodes, eager.gains, eager.k) == (lazy.nodes, lazy.gains, lazy.k)
    ok = same_c == len(fixtures) and harness and same_lazy == 20
    record(5, ok, f"(a) C=V identical on {same_c}/{len(fixtures)} fixtures, harness {'identical' if harness else 'DIFFERS'}; "
                  f"(b) lazy identical on {same_lazy}/20", time.perf_counter() - t0, 300)


@pytest.fixture(scope="module")
def ba_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("ba")
    t0 = time.perf_counter()
    tg = generate_dynamic(1000, 20, BA(2), EvolutionConfig(0.2, 0.6, 42))
    labels = [lab.labels for _, lab in ex.label_snapshots(tg, 40.0)]
    cfg = TrainConfig(d=3, hidden=128, sage_dims=(32, 32), lr=0.001, epochs=400, seed=42)
    model, history = train(tg, labels, cfg)
    train_s = time.perf_counter() - t0
    t0 = time.perf_counter()
    rows = ex.compare(tg, model, 5, DiffusionConfig("IC", 0.1, 100, 42))
    ex.write_comparison_csv(out / "comparison.csv", rows)
    return history, ex.summarize(rows), train_s, time.perf_counter() - t0


@pytest.mark.slow
def test_c06_predictor_accuracy(ba_run):
    history, _, train_s, _ = ba_run
    acc = history["best_test_accuracy"]
    record(6, acc >= 0.85, f"BA n=1000 T=20 held-out accuracy {acc:.4f} (floor 0.85)", train_s, 45 * 60)


@pytest.mark.slow
def test_c07_spread_parity(ba_run):
    _, summary, _, cmp_s = ba_run
    r = summary["spread_ratio"]
    record(7, r >= 0.95, f"mean candidate/full spread ratio {r:.4f} over {summary['snapshots']} snapshots (floor 0.95)",
           cmp_s, 30 * 60)


@pytest.mark.slow
def test_c08_speedup(ba_run):
    _, summary, _, _ = ba_run
    sp = summary["speedup_small"]
    ok = summary["small_snapshots"] > 0 and sp >= 1.5
    record(8, ok, f"speedup {sp:.2f}x on {summary['small_snapshots']} snapshots with |C| <= half the present nodes (floor 1.5)")


def _pipeline(root, workers):
    data, out = root / "data", root / "out"
    steps = [
        ["generate", "--n", 80, "--T", 7, "--seed", 11, "--out", data],
        ["label", "--data", data],
        ["train", "--data", data, "--d", 3, "--hidden", 6, "--sage-dims", 4, 4, "--epochs", 5, "--seed", 11, "--out", out],
        ["compare", "--data", data, "--model", out / "model.json", "--k", 3, "--mc", 30, "--seed", 11,
         "--workers", workers, "--out", out / "comparison.csv"],
    ]
    for argv in steps:
        assert cli([str(a) for a in argv]) == 0
    files = {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
    # wall-clock columns are the only nondeterministic values
    lines = files["out/comparison.csv"].decode().splitlines()
    col = lines[0].split(",").index("wall_time_ms")
    masked = [",".join("*" if j == col and i else v for j, v in enumerate(line.split(","))) for i, line in enumerate(lines)]
    files["out/comparison.csv"] = "\n".join(masked).encode()
    return files


def test_c09_determinism(tmp_path, capsys):
    a = _pipeline(tmp_path / "a", 1)
    b = _pipeline(tmp_path / "b", 1)
    c = _pipeline(tmp_path / "c", 2)
    capsys.readouterr()
    labels = sum(1 for k in a if "labels_" in k)
    differ = sorted({k for other in (b, c) for k in set(a) | set(other) if a.get(k) != other.get(k)})
    record(9, labels == 7 and not differ,
           f"{len(a)} artifacts ({labels} label files, model, comparison and seeds CSV) identical across reruns and "
           f"1 vs 2 workers" + (f"; differ: {differ}" if differ else ""))


def test_c10_structural_analytics():
    cyc = snapshot_stats(build_snapshot([(0, 1), (1, 2), (2, 0)], 3, True)).scc_count
    pth = snapshot_stats(path(3, directed=True)).scc_count
    rng = np.random.default_rng(10)
    graphs = [random_graph(rng, int(rng.integers(2, 60)), int(rng.integers(0, 120)), directed=True) for _ in range(40)]
    graphs += [build_snapshot([(0, 1), (1, 2), (2, 0)], 3, True), path(3, directed=True), star(), triangle()]
    proj_ok = all(scc_count(undirected_projection(s)) == snapshot_stats(s).wcc_count for s in graphs)
    record(10, cyc == 1 and pth == 3 and proj_ok,
           f"3-cycle SCC={cyc}, path SCC={pth}, projection SCC == WCC on {len(graphs)} graphs: {proj_ok}")

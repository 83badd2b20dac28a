"""Command line entry point: ``dynim <subcommand> [options]``.

Exit codes: 0 success, 2 usage or input error, 1 internal error. Every
subcommand accepts ``--config file.json`` whose keys mirror the long flags
(dashes or underscores); explicit flags win over the file.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import experiment as ex
from .diffusion import DiffusionConfig
from .graph import GraphInputError, ingest_temporal_edgelist, read_snapshot_dir, snapshot_stats, write_snapshot_dir
from .predictor import PredictorModel, TrainConfig, accuracy, predict_candidates, train, write_train_log
from .seedsel import greedy_select, lazy_greedy_select, write_seed_csv
from .syngen import BA, ER, EvolutionConfig, generate_dynamic

log = logging.getLogger("dynim")


class UsageError(Exception):
    pass


def _positive(name):
    def conv(text):
        v = int(text)
        if v < 1:
            raise argparse.ArgumentTypeError(f"{name} must be >= 1")
        return v

    return conv


def _print_stats(tg) -> None:
    for t, s in enumerate(tg.snapshots):
        st = snapshot_stats(s)
        scc = "" if st.scc_count is None else f" scc={st.scc_count}"
        print(f"snapshot {t:4d}: nodes={st.nodes_present} edges={st.edges} wcc={st.wcc_count}{scc} max_deg={st.max_degree}")


def cmd_generate(a) -> int:
    if a.T < 1:
        raise UsageError("--T must be >= 1")
    model = BA(a.m) if a.model == "ba" else ER(a.p)
    tg = generate_dynamic(a.n, a.T, model, EvolutionConfig(a.p_add, a.p_del, a.seed))
    write_snapshot_dir(tg, a.out)
    _print_stats(tg)
    return 0


def cmd_ingest(a) -> int:
    with open(a.input, encoding="utf-8") as fh:
        tg = ingest_temporal_edgelist(fh, a.bin_width, directed=not a.undirected)
    write_snapshot_dir(tg, a.out)
    _print_stats(tg)
    return 0


def cmd_label(a) -> int:
    tg = read_snapshot_dir(a.data)
    labelled = ex.label_snapshots(tg, a.alpha, a.p if a.weighted else None)
    ex.write_labels(a.out or a.data, tg, labelled)
    for t, item in enumerate(labelled):
        n_pos = 0 if item is None else int(item[1].labels.sum())
        print(f"snapshot {t:4d}: candidates={n_pos}")
    return 0


def _train_config(a) -> TrainConfig:
    return TrainConfig(
        lr=a.lr, batch_size=a.batch_size, epochs=a.epochs, hidden=a.hidden,
        sage_dims=tuple(a.sage_dims), d=a.d, alpha=a.alpha, split_fraction=a.split, seed=a.seed,
        optimizer=a.optimizer, normalize_features=not a.raw_features, aux_weight=a.aux_weight,
        include_current=not a.forecast,
    )


def cmd_train(a) -> int:
    tg = read_snapshot_dir(a.data)
    cfg = _train_config(a)
    if tg.T <= cfg.d:
        raise UsageError(f"need more than d={cfg.d} snapshots, dataset has {tg.T}")
    labels = ex.read_labels(a.labels or a.data, tg)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(epoch, loss, acc):
        log.info("epoch %d loss %.5f test_accuracy %.4f", epoch, loss, acc)

    model, history = train(tg, labels, cfg, log=progress)
    model.save(out / "model.json")
    write_train_log(out / "train_log.csv", history)
    print(f"test_accuracy={float(history['best_test_accuracy'])!r}")
    return 0


def cmd_predict(a) -> int:
    tg = read_snapshot_dir(a.data)
    model = PredictorModel.load(a.model)
    t = a.snapshot
    steps = model.input_steps(t)
    if steps[0] < 0 or steps[-1] >= tg.T:
        raise UsageError(f"snapshot {t} has no complete window of {model.d} snapshots")
    pred = predict_candidates(model, [tg[j] for j in steps], present=tg[t].present, snapshot=t)
    with open(a.out, "w", newline="\n") as fh:
        fh.write("node,probability,candidate\n")
        cand = set(pred.candidates.tolist())
        for v, p in enumerate(pred.prob.tolist()):
            fh.write(f"{v},{p!r},{int(v in cand)}\n")
    msg = f"snapshot={t} candidates={len(pred.candidates)} present={int(pred.present.sum())}"
    if a.labels:
        truth = ex.read_labels(a.labels, tg)[t]
        msg += f" accuracy={accuracy(pred, truth)!r}"
    print(msg)
    return 0


def _diffusion(a) -> DiffusionConfig:
    return DiffusionConfig(a.diffusion, a.p, a.mc, a.seed)


def cmd_select(a) -> int:
    tg = read_snapshot_dir(a.data)
    t = a.snapshot
    if not 0 <= t < tg.T:
        raise UsageError(f"snapshot {t} out of range 0..{tg.T - 1}")
    s = tg[t]
    cand = None
    if a.model:
        model = PredictorModel.load(a.model)
        steps = model.input_steps(t)
        if steps[0] < 0:
            raise UsageError(f"snapshot {t} has no complete window of {model.d} snapshots")
        cand = predict_candidates(model, [tg[j] for j in steps], present=s.present).candidates.tolist()
    fn = lazy_greedy_select if a.lazy else greedy_select
    seeds = fn(s, cand, a.k, ex.snapshot_diffusion(_diffusion(a), t))
    write_seed_csv(a.out, [(t, seeds)])
    print(f"snapshot={t} seeds={seeds.nodes} evaluations={seeds.evaluations}")
    return 0


def cmd_compare(a) -> int:
    tg = read_snapshot_dir(a.data)
    if not Path(a.model).exists():
        raise UsageError(f"model file {a.model} not found")
    model = PredictorModel.load(a.model)
    rows = ex.compare(tg, model, a.k, _diffusion(a), lazy=a.lazy, time_inference=a.time_inference,
                      workers=a.workers, data_dir=a.data, model_path=a.model)
    ex.write_comparison_csv(a.out, rows, a.time_inference)
    ex.write_comparison_seeds(Path(a.out).with_suffix(".seeds.csv"), rows)
    summary = ex.summarize(rows)
    print(ex.format_report(summary))
    return 0


def cmd_report(a) -> int:
    rows = ex.read_comparison_csv(a.comparison)
    summary = ex.summarize(rows)
    if a.out:
        ex.write_summary_json(a.out, summary)
    print(ex.format_report(summary))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dynim", description="Dynamic influence maximization with candidate prediction")
    p.add_argument("--verbose", "-v", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file with default option values")
        sp.set_defaults(func=fn)
        return sp

    g = add("generate", cmd_generate, "synthetic dynamic graph")
    g.add_argument("--model", choices=["ba", "er"], default="ba")
    g.add_argument("--n", type=_positive("--n"), default=1000)
    g.add_argument("--m", type=int, default=2)
    g.add_argument("--p", type=float, default=0.01, help="ER edge probability")
    g.add_argument("--T", type=int, default=20)
    g.add_argument("--p-add", type=float, default=0.2)
    g.add_argument("--p-del", type=float, default=0.6)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    g = add("ingest", cmd_ingest, "bin a 'src dst timestamp' edge list into snapshots")
    g.add_argument("--input", required=True)
    g.add_argument("--bin-width", type=_positive("--bin-width"), required=True)
    g.add_argument("--undirected", action="store_true")
    g.add_argument("--out", required=True)

    g = add("label", cmd_label, "IFC scores and candidate labels per snapshot")
    g.add_argument("--data", required=True)
    g.add_argument("--alpha", type=float, default=40.0)
    g.add_argument("--weighted", action="store_true", help="weighted local influence with w = --p")
    g.add_argument("--p", type=float, default=0.1)
    g.add_argument("--out", help="label directory (default: the data directory)")

    g = add("train", cmd_train, "train the candidate predictor")
    g.add_argument("--data", required=True)
    g.add_argument("--labels", help="label directory (default: the data directory)")
    g.add_argument("--d", type=_positive("--d"), default=3)
    g.add_argument("--lr", type=float, default=0.001)
    g.add_argument("--hidden", type=_positive("--hidden"), default=128)
    g.add_argument("--sage-dims", type=int, nargs="+", default=[32, 32])
    g.add_argument("--epochs", type=_positive("--epochs"), default=300)
    g.add_argument("--batch-size", type=_positive("--batch-size"), default=4)
    g.add_argument("--split", type=float, default=0.7)
    g.add_argument("--alpha", type=float, default=40.0)
    g.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    g.add_argument("--aux-weight", type=float, default=0.0, help="weight of the next-embedding regression loss")
    g.add_argument("--raw-features", action="store_true", help="do not normalise degree features")
    g.add_argument("--forecast", action="store_true", help="window ends one step before the target snapshot")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    g = add("predict", cmd_predict, "candidate probabilities for one snapshot")
    g.add_argument("--data", required=True)
    g.add_argument("--model", required=True)
    g.add_argument("--snapshot", type=int, required=True)
    g.add_argument("--labels", help="label directory; prints accuracy when given")
    g.add_argument("--out", required=True)

    def diffusion_flags(g):
        g.add_argument("--k", type=_positive("--k"), default=5)
        g.add_argument("--mc", type=_positive("--mc"), default=100)
        g.add_argument("--p", type=float, default=0.1)
        g.add_argument("--diffusion", choices=["IC", "LT"], default="IC")
        g.add_argument("--lazy", action="store_true", help="lazy greedy (same seeds, fewer evaluations)")
        g.add_argument("--seed", type=int, default=0)

    g = add("select", cmd_select, "greedy seed selection on one snapshot")
    g.add_argument("--data", required=True)
    g.add_argument("--snapshot", type=int, required=True)
    g.add_argument("--model", help="restrict to predicted candidates")
    diffusion_flags(g)
    g.add_argument("--out", required=True)

    g = add("compare", cmd_compare, "full greedy vs candidate greedy on every snapshot")
    g.add_argument("--data", required=True)
    g.add_argument("--model", required=True)
    diffusion_flags(g)
    g.add_argument("--time-inference", action="store_true")
    g.add_argument("--workers", type=_positive("--workers"), default=1)
    g.add_argument("--out", required=True)

    g = add("report", cmd_report, "summarise a comparison CSV")
    g.add_argument("--comparison", required=True)
    g.add_argument("--out", help="summary JSON path")
    return p


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    path = _config_path(argv)
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    subparsers = parser._subparsers._group_actions[0].choices
    if path and command in subparsers:
        try:
            with open(path) as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {path}: {exc}")
        sub = subparsers[command]
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, val in conf.items():
            dest = key.replace("-", "_")
            if dest not in actions or dest in ("help", "config"):
                parser.error(f"unknown config key {key!r} for {command}")
            defaults[dest] = val
            # the file can satisfy required flags
            actions[dest].required = False
        sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (UsageError, GraphInputError, FileNotFoundError, ValueError) as exc:
        print(f"dynim {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"dynim {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

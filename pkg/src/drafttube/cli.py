"""Command-line pipeline orchestrator.

Subcommands cover each pipeline stage (sample, evaluate, train, tune,
optimize, decide, report, gci). A plain-text key=value config file supplies
stage parameters; command-line flags override file values. Every artifact
embeds a lineage comment (stage, scenario, seed, config hash) so downstream
stages can verify they operate on matching upstream artifacts.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import doe, evaluator, geometry, opt_multi, opt_single, report, surrogate
from .decision import DecisionError, DecisionMatrix, topsis
from .evaluator import EvaluationError
from .geometry import GeometryError
from .surrogate import SurrogateError

__all__ = ["main", "UsageError", "DataError", "load_config", "config_hash",
           "read_lineage", "REFERENCE_OBJECTIVES"]

# Calibrated reference-design objectives (Cp, Cd) under the synthetic oracle.
REFERENCE_OBJECTIVES = (0.819, 0.131)

SEED_ENV_VAR = "DRAFTTUBE_SEED"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class UsageError(Exception):
    """Bad flags, config keys or values (exit 2)."""


class DataError(Exception):
    """Missing/invalid upstream artifact or lineage mismatch (exit 3)."""


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

# key -> (coercion, default)
CONFIG_KEYS = {
    "scenario": (str, "II.a"),
    "seed": (int, 0),
    "samples": (int, 5000),
    "trials": (int, 20),
    "optimizer": (str, "nsga2"),
    "generations": (int, 500),
    "pop_size": (int, 200),
    "weight_cp": (float, 0.5),
    "weight_cd": (float, 0.5),
    "lof_k": (int, 20),
    "lof_threshold": (float, 1.5),
    "train_ratio": (float, 0.8),
    "workers": (int, 1),
}

SO_OPTIMIZERS = ("pso", "fwa", "lshade")
MO_OPTIMIZERS = ("nsga2", "spea2", "moead")


def load_config(path) -> dict:
    """Parse a key=value config file; '#' comments and blank lines skipped."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = CONFIG_KEYS[key][0](raw)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {raw!r}"
                             ) from None
    return values


def effective_config(args) -> dict:
    """Defaults, then config file, then flag overrides; validated."""
    cfg = {k: d for k, (_, d) in CONFIG_KEYS.items()}
    if os.environ.get(SEED_ENV_VAR):
        try:
            cfg["seed"] = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise UsageError(f"{SEED_ENV_VAR} must be an integer") from None
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            cfg[key] = flag
    try:
        geometry.scenario_bounds(cfg["scenario"])
    except GeometryError as exc:
        raise UsageError(str(exc)) from None
    if cfg["optimizer"] not in SO_OPTIMIZERS + MO_OPTIMIZERS:
        raise UsageError(f"unknown optimizer {cfg['optimizer']!r}")
    for key in ("samples", "trials", "generations", "pop_size", "workers",
                "lof_k"):
        if cfg[key] < 1:
            raise UsageError(f"{key} must be >= 1")
    if not 0.5 <= cfg["train_ratio"] <= 0.95:
        raise UsageError("train_ratio must be in [0.5, 0.95]")
    if cfg["weight_cp"] < 0 or cfg["weight_cd"] < 0 \
            or cfg["weight_cp"] + cfg["weight_cd"] <= 0:
        raise UsageError("weights must be non-negative with a positive sum")
    return cfg


def config_hash(cfg: dict) -> str:
    """Short stable digest of the effective configuration.

    The worker count is excluded: it changes throughput, never results.
    """
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(CONFIG_KEYS)
                      if k != "workers")
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Artifact lineage
# ---------------------------------------------------------------------------

def lineage_comment(stage: str, cfg: dict) -> str:
    return (f"drafttube stage={stage} scenario={cfg['scenario']} "
            f"seed={cfg['seed']} config={config_hash(cfg)}")


def read_lineage(path) -> dict:
    """Parse the lineage comment from an artifact's first line."""
    try:
        with open(path) as fh:
            first = fh.readline().strip()
    except OSError as exc:
        raise DataError(f"missing upstream artifact: {exc}") from None
    for prefix, suffix in (("# ", ""), ("<!-- ", " -->")):
        if first.startswith(prefix + "drafttube "):
            body = first[len(prefix):]
            if suffix and body.endswith(suffix):
                body = body[:-len(suffix)]
            fields = {}
            for token in body.split()[1:]:
                key, _, val = token.partition("=")
                fields[key] = val
            return fields
    raise DataError(f"{path}: no lineage comment on the first line")


def check_lineage(path, cfg: dict, expect_stage: str) -> dict:
    lin = read_lineage(path)
    if lin.get("stage") != expect_stage:
        raise DataError(f"{path}: expected a {expect_stage!r} artifact, "
                        f"got stage {lin.get('stage')!r}")
    if lin.get("scenario") != cfg["scenario"]:
        raise DataError(f"{path}: scenario mismatch: artifact is "
                        f"{lin.get('scenario')!r}, run is {cfg['scenario']!r}")
    return lin


# ---------------------------------------------------------------------------
# Oracle evaluation (optionally in worker processes)
# ---------------------------------------------------------------------------

_worker_ctx: dict = {}


def _init_oracle_worker():
    _worker_ctx["reference"] = geometry.load_reference()
    _worker_ctx["constants"] = evaluator.OracleConstants.load()


def _oracle_row(task):
    row, lb, ub = task
    if not _worker_ctx:
        _init_oracle_worker()
    design = geometry.synthesize(
        _worker_ctx["reference"],
        geometry.DesignVector(np.asarray(row), lb, ub))
    obj = evaluator.synthetic_cfd(design, _worker_ctx["constants"])
    return obj.cp, obj.cd


def evaluate_samples(X: np.ndarray, lb, ub, workers: int = 1) -> np.ndarray:
    """Map sample rows through the synthetic oracle, preserving order."""
    tasks = [(row, lb, ub) for row in X]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_init_oracle_worker) as pool:
            pairs = list(pool.map(_oracle_row, tasks, chunksize=64))
    else:
        pairs = [_oracle_row(t) for t in tasks]
    return np.array(pairs)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_sample(args, cfg) -> int:
    lb, ub = geometry.scenario_bounds(cfg["scenario"])
    plan = doe.DoePlan(cfg["samples"], lb, ub, seed=cfg["seed"])
    X = doe.lhs(plan)
    doe.write_samples_csv(args.out, X, lineage_comment("sample", cfg))
    print(f"wrote {len(X)} samples x {X.shape[1]} variables to {args.out}")
    return EXIT_OK


def cmd_evaluate(args, cfg) -> int:
    lb, ub = geometry.scenario_bounds(cfg["scenario"])
    if args.external:
        X, Y = evaluator.ingest_csv(args.external)
        if X.shape[1] != len(lb):
            raise DataError(f"{args.external}: {X.shape[1]} variables do not "
                            f"match scenario {cfg['scenario']} ({len(lb)})")
        if np.any(X < lb - 1e-12) or np.any(X > ub + 1e-12):
            raise DataError(f"{args.external}: samples violate the "
                            f"{cfg['scenario']} bounds")
        source = f"external file {args.external}"
    else:
        check_lineage(args.infile, cfg, "sample")
        try:
            X = doe.read_samples_csv(args.infile)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        if X.shape[1] != len(lb):
            raise DataError(f"{args.infile}: {X.shape[1]} variables do not "
                            f"match scenario {cfg['scenario']} ({len(lb)})")
        Y = evaluate_samples(X, lb, ub, workers=cfg["workers"])
        source = "synthetic oracle"
    evaluator.write_dataset_csv(args.out, X, Y,
                                lineage_comment("evaluate", cfg))
    print(f"wrote {len(X)} evaluated designs ({source}) to {args.out}")
    return EXIT_OK


def _tuned_config(scenario: str) -> surrogate.MlpConfig:
    return (surrogate.TUNED_SCENARIO_I if scenario.startswith("I.")
            else surrogate.TUNED_SCENARIO_II)


def _prepare_dataset(path, cfg) -> ds.Dataset:
    check_lineage(path, cfg, "evaluate")
    X, Y = evaluator.ingest_csv(path)
    lb, _ = geometry.scenario_bounds(cfg["scenario"])
    if X.shape[1] != len(lb):
        raise DataError(f"{path}: {X.shape[1]} variables do not match "
                        f"scenario {cfg['scenario']} ({len(lb)})")
    try:
        return ds.Dataset.prepare(X, Y, ratio=cfg["train_ratio"],
                                  seed=cfg["seed"], k_neighbors=cfg["lof_k"],
                                  lof_threshold=cfg["lof_threshold"])
    except ds.DatasetError as exc:
        raise DataError(str(exc)) from None


def cmd_train(args, cfg) -> int:
    data = _prepare_dataset(args.infile, cfg)
    mlp_cfg = _tuned_config(cfg["scenario"])
    model = surrogate.MlpModel(data.X.shape[1], mlp_cfg, seed=cfg["seed"])
    X_tr, Y_tr = data.X_train, data.Y_train
    tr, va = ds.split(len(X_tr), ratio=0.85, seed=cfg["seed"] + 1)
    history = surrogate.train(model, X_tr[tr], Y_tr[tr], X_tr[va], Y_tr[va],
                              seed=cfg["seed"])
    model.x_scaler = data.x_scaler
    model.y_scaler = data.y_scaler
    rep = surrogate.metrics(data.Y[data.test_idx],
                            model.predict(data.X[data.test_idx]))
    model.meta = {
        "lineage": {"stage": "train", "scenario": cfg["scenario"],
                    "seed": cfg["seed"], "config": config_hash(cfg)},
        "best_epoch": history.best_epoch,
        "stopped_epoch": history.stopped_epoch,
        "test_mape_pct": [float(v) for v in rep.mape],
        "test_rrmse_pct": [float(v) for v in rep.rrmse],
        "test_r2": [float(v) for v in rep.r2],
    }
    surrogate.save_model(model, args.out)
    print(f"trained on {len(tr)} rows, stopped at epoch "
          f"{history.stopped_epoch} (best {history.best_epoch})")
    for i, name in enumerate(("cp", "cd")):
        print(f"held-out {name}: R2={rep.r2[i]:.4f} "
              f"MAPE={rep.mape[i]:.3f}% rRMSE={rep.rrmse[i]:.3f}%")
    print(f"wrote model to {args.out}")
    return EXIT_OK


def cmd_tune(args, cfg) -> int:
    data = _prepare_dataset(args.infile, cfg)
    best_cfg, best_score, log = surrogate.tune(
        data.X_train, data.Y_train, trials=cfg["trials"], seed=cfg["seed"],
        epochs=args.epochs, patience=args.patience)
    with open(args.out, "w", newline="") as fh:
        fh.write(f"# {lineage_comment('tune', cfg)}\n")
        fh.write("trial,score_r2,hidden_layers,dropout,learning_rate,"
                 "activation,initializer\n")
        for i, (c, score) in enumerate(log):
            fh.write(f"{i},{score:.17g},{'x'.join(map(str, c.hidden_layers))},"
                     f"{'x'.join(f'{d:g}' for d in c.dropout)},"
                     f"{c.learning_rate:g},{c.activation},{c.initializer}\n")
    print(f"best of {cfg['trials']} trials: mean CV R2 = {best_score:.4f}")
    print(f"  layers={best_cfg.hidden_layers} act={best_cfg.activation} "
          f"init={best_cfg.initializer} lr={best_cfg.learning_rate:g} "
          f"dropout={best_cfg.dropout}")
    print(f"wrote trial log to {args.out}")
    return EXIT_OK


def _load_model_checked(path, cfg) -> surrogate.MlpModel:
    try:
        model = surrogate.load_model(path)
    except OSError as exc:
        raise DataError(f"missing upstream artifact: {exc}") from None
    lin = model.meta.get("lineage", {})
    if lin.get("scenario") != cfg["scenario"]:
        raise DataError(f"{path}: scenario mismatch: model is "
                        f"{lin.get('scenario')!r}, run is {cfg['scenario']!r}")
    return model


def _write_trace_csv(path, trace, cfg) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {lineage_comment('optimize', cfg)}\n")
        fh.write("generation,best_objective\n")
        for g, v in enumerate(trace, 1):
            fh.write(f"{g},{v:.17g}\n")


def cmd_optimize(args, cfg) -> int:
    model = _load_model_checked(args.model, cfg)
    lb, ub = geometry.scenario_bounds(cfg["scenario"])
    if model.n_inputs != len(lb):
        raise DataError(f"{args.model}: model has {model.n_inputs} inputs, "
                        f"scenario {cfg['scenario']} has {len(lb)}")
    name = cfg["optimizer"]
    comment = lineage_comment("optimize", cfg) + f" optimizer={name}"
    if name in SO_OPTIMIZERS:
        # Single objective: maximize predicted pressure recovery.
        def objective(x):
            return -float(model.predict(x)[0])

        problem = opt_single.SoProblem(objective, lb, ub,
                                       budget=cfg["generations"],
                                       seed=cfg["seed"])
        runner = {"pso": opt_single.run_pso, "fwa": opt_single.run_fwa,
                  "lshade": opt_single.run_lshade}[name]
        result = runner(problem)
        pred = model.predict(result.best_x)
        evaluator.write_dataset_csv(args.out, result.best_x[None, :],
                                    pred[None, :], comment)
        trace_path = args.trace_out or str(
            Path(args.out).with_suffix("")) + "_trace.csv"
        _write_trace_csv(trace_path, -result.trace, cfg)
        print(f"{name}: best predicted cp={pred[0]:.4f} cd={pred[1]:.4f} "
              f"after {result.n_evals} evaluations")
        print(f"wrote best design to {args.out}, trace to {trace_path}")
    else:
        # Two objectives, both minimized internally: (-Cp, Cd).
        def objectives(x):
            cp, cd = model.predict(x)
            return -float(cp), float(cd)

        problem = opt_multi.MoProblem(objectives, lb, ub,
                                      generations=cfg["generations"],
                                      seed=cfg["seed"])
        if name == "moead":
            archive = opt_multi.run_moead(
                problem, opt_multi.MoeadConfig(pop_size=cfg["pop_size"]))
        elif name == "spea2":
            archive = opt_multi.run_spea2(
                problem, opt_multi.NsgaConfig(pop_size=cfg["pop_size"]))
        else:
            archive = opt_multi.run_nsga2(
                problem, opt_multi.NsgaConfig(pop_size=cfg["pop_size"]))
        F = archive.front()
        Y = np.column_stack([-F[:, 0], F[:, 1]])
        evaluator.write_dataset_csv(args.out, archive.points(), Y, comment)
        print(f"{name}: archived front of {len(archive)} designs, "
              f"cp in [{Y[:, 0].min():.4f}, {Y[:, 0].max():.4f}], "
              f"cd in [{Y[:, 1].min():.4f}, {Y[:, 1].max():.4f}]")
        print(f"wrote front to {args.out}")
    return EXIT_OK


def cmd_decide(args, cfg) -> int:
    check_lineage(args.infile, cfg, "optimize")
    X, Y = evaluator.ingest_csv(args.infile)
    lb, ub = geometry.scenario_bounds(cfg["scenario"])
    if X.shape[1] != len(lb):
        raise DataError(f"{args.infile}: {X.shape[1]} variables do not match "
                        f"scenario {cfg['scenario']} ({len(lb)})")
    if args.rescore:
        # Validate the surrogate front against the ground-truth evaluator.
        Y = evaluate_samples(X, lb, ub, workers=cfg["workers"])
    w = np.array([cfg["weight_cp"], cfg["weight_cd"]])
    w = w / w.sum()
    try:
        result = topsis(DecisionMatrix(Y, w, np.array([True, False])))
    except DecisionError as exc:
        raise DataError(str(exc)) from None
    with open(args.out, "w", newline="") as fh:
        fh.write(f"# {lineage_comment('decide', cfg)}\n")
        cols = [f"x{j + 1}" for j in range(X.shape[1])]
        fh.write("rank,alternative,closeness," + ",".join(cols) + ",cp,cd\n")
        for rank, idx in enumerate(result.ranking, 1):
            row = [f"{v:.17g}" for v in X[idx]]
            fh.write(f"{rank},{idx},{result.closeness[idx]:.17g},"
                     + ",".join(row)
                     + f",{Y[idx, 0]:.17g},{Y[idx, 1]:.17g}\n")
    best = result.best
    ref_cp, ref_cd = REFERENCE_OBJECTIVES
    print(f"selected alternative {best}: cp={Y[best, 0]:.4f} "
          f"(reference {ref_cp}), cd={Y[best, 1]:.4f} (reference {ref_cd})")
    print(f"wrote ranking to {args.out}")
    return EXIT_OK


def _read_trace_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("gen"):
                continue
            g, v = line.split(",")
            rows.append((float(g), float(v)))
    if not rows:
        raise DataError(f"{path}: empty trace file")
    return np.array(rows)


def cmd_report(args, cfg) -> int:
    lineages = [read_lineage(p) for p in args.inputs]
    for path, lin in zip(args.inputs, lineages):
        for key in ("scenario", "seed", "config"):
            if lin.get(key) != lineages[0].get(key):
                raise DataError(
                    f"lineage mismatch: {args.inputs[0]} has "
                    f"{key}={lineages[0].get(key)!r} but {path} has "
                    f"{key}={lin.get(key)!r}")
    if args.kind == "trace":
        series = {Path(p).stem: _read_trace_csv(p) for p in args.inputs}
        svg = report.svg_polylines(series, "generation", "objective",
                                   "Convergence", log_y=args.log)
    else:
        series = {}
        for path in args.inputs:
            X, Y = evaluator.ingest_csv(path)
            series[Path(path).stem] = Y
        highlight = {"reference": REFERENCE_OBJECTIVES}
        if args.decision:
            lin = read_lineage(args.decision)
            for key in ("scenario", "seed", "config"):
                if lin.get(key) != lineages[0].get(key):
                    raise DataError(f"lineage mismatch between {args.decision}"
                                    f" and {args.inputs[0]} on {key}")
            with open(args.decision) as fh:
                fh.readline()  # lineage
                header = fh.readline().strip().split(",")
                top = fh.readline().strip().split(",")
            cp = float(top[header.index("cp")])
            cd = float(top[header.index("cd")])
            highlight["selected"] = (cp, cd)
        svg = report.svg_scatter(series, "pressure recovery Cp",
                                 "drag coefficient Cd", "Pareto fronts",
                                 highlight=highlight)
    with open(args.out, "w") as fh:
        fh.write(f"<!-- {lineage_comment('report', cfg)} -->\n")
        fh.write(svg)
    print(f"wrote {args.kind} plot to {args.out}")
    return EXIT_OK


def cmd_gci(args, cfg) -> int:
    rep = evaluator.gci(args.eps_cm, args.eps_mf, args.r, F_s=args.fs,
                        trend=args.trend)
    width = max(len(n) for n, _ in rep.as_rows())
    for name, value in rep.as_rows():
        print(f"{name:<{width + 2}}{value:.6g}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(f"# {lineage_comment('gci', cfg)}\n")
            fh.write("quantity,value\n")
            for name, value in rep.as_rows():
                fh.write(f"{name},{value:.17g}\n")
        print(f"wrote table to {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--scenario", choices=("I.a", "I.b", "II.a", "II.b"),
                        help="optimization scenario")
    common.add_argument("--seed", type=int,
                        help=f"global seed (default from ${SEED_ENV_VAR})")
    common.add_argument("--workers", type=int, help="worker processes")

    parser = argparse.ArgumentParser(
        prog="drafttube",
        description="Surrogate-assisted draft-tube shape optimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common],
                       help="Latin hypercube sample of the offset space")
    p.add_argument("--samples", type=int, help="number of samples")
    p.add_argument("--out", default="samples.csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("evaluate", parents=[common],
                       help="evaluate samples with the synthetic oracle")
    p.add_argument("--in", dest="infile", default="samples.csv")
    p.add_argument("--external", help="pre-evaluated x1..xm,cp,cd CSV "
                                      "(bypasses the oracle)")
    p.add_argument("--out", default="dataset.csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("train", parents=[common],
                       help="train the tuned surrogate on a dataset")
    p.add_argument("--in", dest="infile", default="dataset.csv")
    p.add_argument("--lof-k", dest="lof_k", type=int)
    p.add_argument("--lof-threshold", dest="lof_threshold", type=float)
    p.add_argument("--train-ratio", dest="train_ratio", type=float)
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", parents=[common],
                       help="random-search hyperparameter tuning")
    p.add_argument("--in", dest="infile", default="dataset.csv")
    p.add_argument("--trials", type=int)
    p.add_argument("--epochs", type=int, default=64,
                   help="epoch cap per tuning trial")
    p.add_argument("--patience", type=int, default=8)
    p.add_argument("--lof-k", dest="lof_k", type=int)
    p.add_argument("--lof-threshold", dest="lof_threshold", type=float)
    p.add_argument("--train-ratio", dest="train_ratio", type=float)
    p.add_argument("--out", default="tuning.csv")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("optimize", parents=[common],
                       help="optimize the surrogate objectives")
    p.add_argument("--model", default="model.json")
    p.add_argument("--optimizer", choices=SO_OPTIMIZERS + MO_OPTIMIZERS)
    p.add_argument("--generations", type=int)
    p.add_argument("--pop-size", dest="pop_size", type=int)
    p.add_argument("--trace-out", help="convergence trace path "
                                       "(single-objective runs)")
    p.add_argument("--out", default="front.csv")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("decide", parents=[common],
                       help="rank a Pareto front and select one design")
    p.add_argument("--in", dest="infile", default="front.csv")
    p.add_argument("--weight-cp", dest="weight_cp", type=float)
    p.add_argument("--weight-cd", dest="weight_cd", type=float)
    p.add_argument("--no-rescore", dest="rescore", action="store_false",
                   help="rank surrogate predictions instead of re-evaluating "
                        "the front with the oracle")
    p.add_argument("--out", default="decision.csv")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("report", parents=[common],
                       help="render fronts or traces as an SVG plot")
    p.add_argument("inputs", nargs="+", help="front.csv or trace.csv files")
    p.add_argument("--kind", choices=("front", "trace"), default="front")
    p.add_argument("--decision", help="decision.csv whose top design to mark")
    p.add_argument("--log", action="store_true", help="log-scale trace values")
    p.add_argument("--out", default="report.svg")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gci", parents=[common],
                       help="three-grid convergence index")
    p.add_argument("eps_cm", type=float,
                   help="coarse-medium relative difference, percent")
    p.add_argument("eps_mf", type=float,
                   help="medium-fine relative difference, percent")
    p.add_argument("r", type=float, help="grid refinement ratio")
    p.add_argument("--fs", type=float, default=1.25, help="safety factor")
    p.add_argument("--trend", choices=("decreasing", "increasing", "shared"),
                   default="decreasing",
                   help="monotone convergence trend under refinement "
                        "('shared' = both epsilons share one normalization)")
    p.add_argument("--out", help="optional CSV output path")
    p.set_defaults(func=cmd_gci)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = effective_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, EvaluationError, ds.DatasetError, DecisionError,
            FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (SurrogateError, GeometryError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())

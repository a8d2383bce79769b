"""Command-line surface: every capability behind one binary with subcommands.

All randomness funnels through one seed flag; every result file starts
with a header echoing the version, the command line, and the run
configuration, so repeated runs with identical flags are byte-identical.
Exit codes: 0 success, 1 internal failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .alignment import pairwise_cost, udtw_evaluate
from .barycenter import FrechetConfig, frechet_mean
from .data_io import (
    fmt,
    read_csv_matrix,
    read_csv_sequence,
    read_ucr_tsv,
    write_coupling,
    write_csv_sequence,
    write_ucr_tsv,
)
from .oracle import DEFAULT_ORACLE_LIMIT
from .selftest import run_selftest
from .synth import make_cbf, make_shifted_bells, make_sine_step
from .tasks.classify import centroid_classify, fit_class_centroids, knn_classify
from .tasks.coding import atoms_from_samples, dict_update, lcsa_code, reconstruction_distance
from .tasks.forecast import (
    forecast_mse,
    forecast_predict,
    forecast_train,
    init_forecast_model,
    split_series,
)
from .types import CostMatrix, GibbsParams, LabeledSet, Sequence, VarianceField
from .uncertainty import load_model, resolve_variance_field

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


@dataclass
class RunConfig:
    seed: int
    gamma: float
    beta: float
    variance_mode: str
    oracle_limit: int
    output_dir: str

    def header(self) -> str:
        return (
            f"config: seed={self.seed} gamma={self.gamma} beta={self.beta} "
            f"variance={self.variance_mode} oracle_limit={self.oracle_limit} "
            f"output_dir={self.output_dir}"
        )


def _strip_threads(argv: list[str]) -> list[str]:
    # thread count is an execution detail; results must not depend on it,
    # so the provenance echo leaves it out
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--threads":
            skip = True
            continue
        if tok.startswith("--threads="):
            continue
        out.append(tok)
    return out


def _config(args, argv) -> tuple[RunConfig, list[str]]:
    cfg = RunConfig(
        seed=getattr(args, "seed", 0),
        gamma=getattr(args, "gamma", 1.0),
        beta=getattr(args, "beta", 0.0),
        variance_mode=getattr(args, "variance", "unit"),
        oracle_limit=getattr(args, "oracle_limit", DEFAULT_ORACLE_LIMIT),
        output_dir=getattr(args, "output_dir", "."),
    )
    header = [
        f"udtw {__version__}",
        "command: " + " ".join(_strip_threads(argv)),
        cfg.header(),
    ]
    return cfg, header


def _gibbs(args) -> GibbsParams:
    return GibbsParams(gamma=args.gamma, beta=getattr(args, "beta", 0.0))


def _out_dir(args) -> Path:
    out = Path(getattr(args, "output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _metric_lines(pairs) -> str:
    return "\n".join(f"{k},{fmt(v) if isinstance(v, float) else v}" for k, v in pairs)


def _write_rows(path: Path, header: list[str], rows: list[str]) -> None:
    path.write_text("\n".join([f"# {h}" for h in header] + rows) + "\n")


def _variance_argument(args):
    mode = getattr(args, "variance", "unit")
    if mode == "unit":
        return None
    if mode in ("per-token", "pairwise"):
        params = getattr(args, "sigma_params", None)
        if not params:
            raise ValueError(f"--variance {mode} requires --sigma-params FILE")
        model = load_model(params)
        expected = "per_token" if mode == "per-token" else "pairwise"
        if model.variant != expected:
            raise ValueError(
                f"--variance {mode} needs a {expected} model, file holds {model.variant}"
            )
        return model
    raise ValueError(f"--variance {mode} is not valid for this command")


# ---------------------------------------------------------------- commands


def cmd_dist(args, argv) -> int:
    _, header = _config(args, argv)
    p = _gibbs(args)
    if args.cost_matrix:
        C = CostMatrix(read_csv_matrix(args.cost_matrix))
        if args.variance_matrix:
            S = VarianceField(read_csv_matrix(args.variance_matrix))
        else:
            S = VarianceField.unit(C.shape)
        out = udtw_evaluate(C, S, p)
    else:
        if not (args.a and args.b):
            raise ValueError("provide two sequence csv files or --cost-matrix")
        a = read_csv_sequence(args.a)
        b = read_csv_sequence(args.b)
        variances = _variance_argument(args)
        out = udtw_evaluate(
            pairwise_cost(a, b), resolve_variance_field(a, b, variances), p
        )
    print(
        _metric_lines(
            [
                ("dist", out.dist),
                ("omega", out.omega),
                ("softmin_value", out.softmin_value),
                ("score", out.score(p.beta)),
            ]
        )
    )
    if args.coupling_out:
        write_coupling(
            out,
            args.coupling_out,
            fmt_name=args.coupling_format,
            power_normalize=args.power_normalize,
            header_lines=header,
        )
    return EXIT_OK


def cmd_selftest(args, argv) -> int:
    results = run_selftest(
        trials=args.trials,
        seed=args.seed,
        oracle_limit=args.oracle_limit,
        mc_trials=args.mc_trials,
    )
    width = max(len(r.name) for r in results)
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.name.ljust(width)}  {status}  {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_INTERNAL


def cmd_synth(args, argv) -> int:
    _, header = _config(args, argv)
    out = _out_dir(args)
    if args.kind == "cbf":
        train = make_cbf(args.train_per_class, length=args.length, seed=args.seed)
        test = make_cbf(args.test_per_class, length=args.length, seed=args.seed + 1)
        write_ucr_tsv(train, out / "train.tsv", header_lines=header)
        write_ucr_tsv(test, out / "test.tsv", header_lines=header)
        print(_metric_lines([("train", out / "train.tsv"), ("test", out / "test.tsv")]))
    elif args.kind == "sine-step":
        series = make_sine_step(args.n, length=args.length, seed=args.seed)
        data = LabeledSet([(s, 0) for s in series])
        write_ucr_tsv(data, out / "data.tsv", header_lines=header)
        print(_metric_lines([("data", out / "data.tsv")]))
    elif args.kind == "bells":
        series = make_shifted_bells(args.n, length=args.length, seed=args.seed)
        data = LabeledSet([(s, 0) for s in series])
        write_ucr_tsv(data, out / "data.tsv", header_lines=header)
        print(_metric_lines([("data", out / "data.tsv")]))
    else:
        raise ValueError(f"unknown synthetic kind {args.kind!r}")
    return EXIT_OK


def cmd_knn(args, argv) -> int:
    _, header = _config(args, argv)
    p = _gibbs(args)
    train = read_ucr_tsv(args.train).items
    test = read_ucr_tsv(args.test).items
    variances = _variance_argument(args)
    rows = ["index,true,predicted"]
    correct = 0
    for i, (seq, label) in enumerate(test.items):
        pred = knn_classify(
            train,
            seq,
            args.k,
            p,
            beta=args.beta,
            variances=variances,
            threads=args.threads,
            length_normalize=args.length_normalize,
        )
        correct += int(pred == label)
        rows.append(f"{i},{label},{pred}")
    accuracy = correct / len(test)
    out = _out_dir(args)
    _write_rows(out / "predictions.csv", header, rows)
    print(_metric_lines([("accuracy", float(accuracy))]))
    return EXIT_OK


def cmd_centroid(args, argv) -> int:
    _, header = _config(args, argv)
    p = _gibbs(args)
    train = read_ucr_tsv(args.train).items
    test = read_ucr_tsv(args.test).items
    mode = "free_per_timestep" if args.variance == "free" else "fixed_unit"
    fc = FrechetConfig(
        gibbs=p,
        target_length=args.target_length,
        max_iters=args.max_iters,
        variance_mode=mode,
    )
    centroids = fit_class_centroids(train, fc)
    rows = ["index,true,predicted"]
    correct = 0
    for i, (seq, label) in enumerate(test.items):
        pred = centroid_classify(
            centroids, seq, p, beta=args.beta, length_normalize=args.length_normalize
        )
        correct += int(pred == label)
        rows.append(f"{i},{label},{pred}")
    accuracy = correct / len(test)
    out = _out_dir(args)
    _write_rows(out / "predictions.csv", header, rows)
    for seq, label, _ in centroids:
        write_csv_sequence(seq, out / f"centroid_{label}.csv", header_lines=header)
    print(_metric_lines([("accuracy", float(accuracy))]))
    return EXIT_OK


def cmd_barycenter(args, argv) -> int:
    _, header = _config(args, argv)
    p = _gibbs(args)
    handle = read_ucr_tsv(args.data)
    items = handle.items.items
    if args.label is not None:
        items = [(s, lab) for s, lab in items if lab == args.label]
        if not items:
            raise ValueError(f"no sequences with label {args.label} in {args.data}")
    if args.count is not None:
        items = items[: args.count]
    data = [s for s, _ in items]
    mode = "free_per_timestep" if args.variance == "free" else "fixed_unit"
    fc = FrechetConfig(
        gibbs=p,
        target_length=args.target_length,
        max_iters=args.max_iters,
        variance_mode=mode,
    )
    result = frechet_mean(data, fc)
    out = _out_dir(args)
    write_csv_sequence(result.mean, out / "barycenter.csv", header_lines=header)
    _write_rows(
        out / "trace.csv",
        header,
        ["iteration,objective"]
        + [f"{i},{fmt(v)}" for i, v in enumerate(result.trace)],
    )
    if result.variances is not None:
        _write_rows(
            out / "variances.csv",
            header,
            ["timestep,variance"]
            + [f"{i},{fmt(v)}" for i, v in enumerate(result.variances)],
        )
    print(
        _metric_lines(
            [
                ("initial_objective", float(result.trace[0])),
                ("final_objective", float(result.trace[-1])),
                ("iterations", result.iterations),
                ("line_search_warning", int(result.line_search_warning)),
            ]
        )
    )
    return EXIT_OK


def cmd_forecast(args, argv) -> int:
    _, header = _config(args, argv)
    p = _gibbs(args)
    series = [s for s, _ in read_ucr_tsv(args.data).items.items]
    n_train = max(1, int(round(args.train_fraction * len(series))))
    train, test = series[:n_train], series[n_train:]
    tau = series[0].length
    input_length = int(round(args.split * tau))
    model = init_forecast_model(
        input_length, tau - input_length, hidden_width=args.hidden, seed=args.seed
    )
    sigma_model = None
    if args.variance == "per-token":
        from .uncertainty import init_uncertainty_model

        sigma_model = init_uncertainty_model(1, seed=args.seed + 1)
    untrained_mse = forecast_mse(model, test) if test else float("nan")
    model, trace = forecast_train(
        train,
        model,
        p,
        beta=args.beta,
        split=args.split,
        epochs=args.epochs,
        step=args.step,
        sigma_model=sigma_model,
    )
    test_mse = forecast_mse(model, test) if test else float("nan")
    out = _out_dir(args)
    _write_rows(
        out / "trace.csv",
        header,
        ["epoch,loss"] + [f"{i},{fmt(v)}" for i, v in enumerate(trace)],
    )
    rows = []
    for s in test or train:
        prefix, _ = split_series(s, model.input_length)
        pred = forecast_predict(model, Sequence(prefix))
        rows.append(",".join(fmt(v) for v in pred.values[0]))
    _write_rows(out / "predictions.csv", header, rows)
    print(
        _metric_lines(
            [
                ("final_train_loss", float(trace[-1])),
                ("untrained_test_mse", float(untrained_mse)),
                ("test_mse", float(test_mse)),
            ]
        )
    )
    return EXIT_OK


def cmd_dictlearn(args, argv) -> int:
    _, header = _config(args, argv)
    p = _gibbs(args)
    series = [s for s, _ in read_ucr_tsv(args.data).items.items]
    dictionary = atoms_from_samples(
        series,
        args.atoms,
        seed=args.seed,
        k_nearest=args.k_nearest,
        gamma_prime=args.gamma_prime,
        lambda_dl=args.lambda_dl,
        dict_iters=1,
    )
    trace = [reconstruction_distance(series, dictionary, p)]
    for _ in range(args.dict_iters):
        dictionary = dict_update(series, dictionary, p)
        trace.append(reconstruction_distance(series, dictionary, p))
    out = _out_dir(args)
    _write_rows(
        out / "trace.csv",
        header,
        ["iteration,mean_reconstruction_dist"]
        + [f"{i},{fmt(v)}" for i, v in enumerate(trace)],
    )
    code_rows = ["index," + ",".join(f"atom_{k}" for k in range(dictionary.size))]
    for i, s in enumerate(series):
        alpha = lcsa_code(s, dictionary, p)
        code_rows.append(f"{i}," + ",".join(fmt(v) for v in alpha))
    _write_rows(out / "codes.csv", header, code_rows)
    print(
        _metric_lines(
            [
                ("initial_reconstruction", float(trace[0])),
                ("final_reconstruction", float(trace[-1])),
            ]
        )
    )
    return EXIT_OK


def cmd_serve(args, argv) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_gibbs(sub, beta_default=0.0):
    sub.add_argument("--gamma", type=float, default=1.0, help="Gibbs temperature (> 0)")
    sub.add_argument("--beta", type=float, default=beta_default, help="regularizer weight")


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--oracle-limit", type=int, default=DEFAULT_ORACLE_LIMIT)
    sub.add_argument("--output-dir", default=".")
    sub.add_argument("--length-normalize", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="udtw",
        description="uncertainty-weighted soft-DTW toolkit",
    )
    parser.add_argument("--version", action="version", version=f"udtw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("dist", help="align two sequences (or a cost matrix)")
    s.add_argument("a", nargs="?", help="first sequence csv (rows=dims, cols=steps)")
    s.add_argument("b", nargs="?", help="second sequence csv")
    s.add_argument("--cost-matrix", help="precomputed squared-distance csv instead of sequences")
    s.add_argument("--variance-matrix", help="variance field csv (with --cost-matrix)")
    s.add_argument("--variance", choices=["unit", "per-token", "pairwise"], default="unit")
    s.add_argument("--sigma-params", help="sigmanet parameter file")
    s.add_argument("--coupling-out", help="write the coupling matrix here")
    s.add_argument("--coupling-format", choices=["csv", "pgm"], default="csv")
    s.add_argument("--power-normalize", action="store_true")
    _add_gibbs(s)
    _add_common(s)
    s.set_defaults(func=cmd_dist)

    s = sub.add_parser("selftest", help="run the built-in verification suites")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--mc-trials", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--oracle-limit", type=int, default=5)
    s.set_defaults(func=cmd_selftest)

    s = sub.add_parser("synth", help="generate built-in synthetic datasets")
    s.add_argument("kind", choices=["cbf", "sine-step", "bells"])
    s.add_argument("--length", type=int, default=128)
    s.add_argument("--n", type=int, default=10, help="series count (sine-step, bells)")
    s.add_argument("--train-per-class", type=int, default=10)
    s.add_argument("--test-per-class", type=int, default=50)
    _add_common(s)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("knn", help="k-nearest-neighbor classification")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--variance", choices=["unit", "per-token", "pairwise"], default="unit")
    s.add_argument("--sigma-params")
    _add_gibbs(s)
    _add_common(s)
    s.set_defaults(func=cmd_knn)

    s = sub.add_parser("centroid", help="nearest-centroid classification")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--variance", choices=["unit", "free"], default="unit")
    s.add_argument("--max-iters", type=int, default=30)
    s.add_argument("--target-length", type=int)
    _add_gibbs(s)
    _add_common(s)
    s.set_defaults(func=cmd_centroid)

    s = sub.add_parser("barycenter", help="Frechet mean of a sequence set")
    s.add_argument("--data", required=True)
    s.add_argument("--label", type=int, help="restrict to one class label")
    s.add_argument("--count", type=int, help="take the first N sequences")
    s.add_argument("--variance", choices=["unit", "free"], default="unit")
    s.add_argument("--max-iters", type=int, default=100)
    s.add_argument("--target-length", type=int)
    _add_gibbs(s)
    _add_common(s)
    s.set_defaults(func=cmd_barycenter)

    s = sub.add_parser("forecast", help="train the forecasting MLP on a series set")
    s.add_argument("--data", required=True)
    s.add_argument("--split", type=float, default=0.6, help="prefix fraction per series")
    s.add_argument("--train-fraction", type=float, default=0.6, help="series used for training")
    s.add_argument("--epochs", type=int, default=100)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--hidden", type=int, default=128)
    s.add_argument("--variance", choices=["unit", "per-token"], default="unit")
    _add_gibbs(s)
    _add_common(s)
    s.set_defaults(func=cmd_forecast)

    s = sub.add_parser("dictlearn", help="dictionary learning with soft-assignment codes")
    s.add_argument("--data", required=True)
    s.add_argument("--atoms", type=int, default=4)
    s.add_argument("--k-nearest", type=int, default=2)
    s.add_argument("--gamma-prime", type=float, default=0.7)
    s.add_argument("--lambda-dl", type=float, default=0.001)
    s.add_argument("--dict-iters", type=int, default=10)
    _add_gibbs(s)
    _add_common(s)
    s.set_defaults(func=cmd_dictlearn)

    s = sub.add_parser("serve", help="run the HTTP service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8000)
    s.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())

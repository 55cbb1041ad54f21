"""Command-line pipeline: synth -> train -> calibrate -> evaluate.

Every subcommand reads and writes plain files in a directory, so stages can
be rerun or swapped out (e.g. logits from another framework dropped in as a
headerless CSV).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import fileio
from .binning import BinningScheme, build_bins
from .calibrate import (
    CalibrationConfig,
    CalibrationResult,
    Method,
    apply_calibration,
    empirical_calibration,
    intervals_from_probs,
    temperature_scaling,
)
from .errors import BracketingFailed, CalintError, SchemeMismatch
from .metrics import ReportMethod, build_report, format_table, rmse
from .probs import apply_temperature, expected_predictions
from .synth import (
    Generator,
    SoftmaxModel,
    StandardRegressor,
    TaskSpec,
    distort_confidence,
    generate_task,
    train_regressor,
    train_softmax,
)

log = logging.getLogger("calint")

SPLITS = ("train", "val", "test")
EXIT_ERROR = 1
EXIT_BRACKETING = 2
EXIT_NOT_CONVERGED = 3


def parse_alphas(text: str) -> list[float]:
    """Comma list of confidence levels, as fractions or percentages."""
    out = []
    for tok in text.split(","):
        tok = tok.strip().rstrip("%")
        if not tok:
            continue
        v = float(tok)
        if v >= 1.0:
            v /= 100.0
        if not 0.0 < v < 1.0:
            raise argparse.ArgumentTypeError(f"confidence level {tok!r} outside (0, 1)")
        out.append(round(v, 12))
    if not out:
        raise argparse.ArgumentTypeError("no confidence levels given")
    return out


def alpha_tag(alpha: float) -> str:
    return f"{alpha:g}"


def _methods(selector: str) -> list[Method]:
    return {
        "empirical": [Method.EMPIRICAL],
        "temperature": [Method.TEMPERATURE],
        "both": [Method.EMPIRICAL, Method.TEMPERATURE],
    }[selector]


def _outdir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    spec = TaskSpec(
        seed=args.seed,
        n_train=args.n_train,
        n_val=args.n_val,
        n_test=args.n_test,
        feature_dim=args.dim,
        noise_std=args.noise_std,
        generator=Generator(args.generator),
    )
    task = generate_task(spec)
    out = _outdir(args)
    for split in SPLITS:
        x, y = task.split(split)
        fileio.write_matrix(out / f"x_{split}.csv", x)
        fileio.write_matrix(out / f"y_{split}.csv", y)
    fileio.write_json(
        out / "task.json",
        {
            "spec": spec.to_dict(),
            "true_weights": task.true_weights.tolist(),
            "true_bias": task.true_bias,
        },
    )
    log.info("wrote task with %d/%d/%d examples to %s", spec.n_train, spec.n_val, spec.n_test, out)
    return 0


def cmd_train(args) -> int:
    data = Path(args.data_dir)
    out = _outdir(args)
    x_train = fileio.read_matrix(data / "x_train.csv")
    y_train = fileio.read_vector(data / "y_train.csv")

    if args.model == "standard":
        reg = train_regressor(x_train, y_train, epochs=args.epochs or 500, learning_rate=args.lr or 0.2, seed=args.seed)
        fileio.write_json(out / "regressor.json", reg.to_dict())
        _write_loss_log(out / "train_log.csv", reg.loss_history)
        for split in ("val", "test"):
            fileio.write_matrix(out / f"predictions_{split}.csv", reg.predict(fileio.read_matrix(data / f"x_{split}.csv")))
        log.info("standard regressor: final mse %.6g", reg.loss_history[-1])
        return 0

    scheme = build_bins(y_train, args.bins)
    model = train_softmax(
        x_train, y_train, scheme, epochs=args.epochs or 1500, learning_rate=args.lr or 3.0, seed=args.seed
    )
    fileio.write_json(out / "scheme.json", scheme.to_dict())
    fileio.write_json(out / "model.json", model.to_dict())
    _write_loss_log(out / "train_log.csv", model.loss_history)
    for split in ("val", "test"):
        z = model.logits(fileio.read_matrix(data / f"x_{split}.csv"))
        if args.distort != 1.0:
            z = distort_confidence(z, args.distort)
        fileio.write_matrix(out / f"logits_{split}.csv", z)
    log.info("softmax model, %d bins: loss %.6g -> %.6g", scheme.num_bins, model.loss_history[0], model.loss_history[-1])
    return 0


def _write_loss_log(path, history):
    with open(path, "w") as fh:
        for epoch, loss in enumerate(history):
            fh.write(f"{epoch},{float(loss)!r}\n")


def _load_scheme(model_dir: Path) -> BinningScheme:
    return BinningScheme.from_dict(fileio.read_json(model_dir / "scheme.json"))


def _load_logits(path: Path, scheme: BinningScheme) -> np.ndarray:
    z = fileio.read_matrix(path)
    if z.shape[1] != scheme.num_bins:
        raise SchemeMismatch(f"{path} has {z.shape[1]} columns, scheme has {scheme.num_bins} bins")
    return z


def cmd_calibrate(args) -> int:
    model_dir = Path(args.model_dir)
    scheme = _load_scheme(model_dir)
    logits = _load_logits(model_dir / "logits_val.csv", scheme)
    labels = fileio.read_vector(Path(args.data_dir) / "y_val.csv")
    out = _outdir(args)
    status = 0
    for alpha in args.alpha:
        cfg = CalibrationConfig(alpha, epsilon=args.epsilon, max_iterations=args.max_iter)
        for method in _methods(args.method):
            if method is Method.EMPIRICAL:
                res = empirical_calibration(apply_temperature(logits, 1.0), labels, scheme, cfg)
            else:
                try:
                    res = temperature_scaling(logits, labels, scheme, cfg)
                except BracketingFailed as exc:
                    print(f"error: temperature scaling at alpha={alpha:g}: {exc}", file=sys.stderr)
                    return EXIT_BRACKETING
            name = f"calibration_{method.value.lower()}_{alpha_tag(alpha)}.json"
            fileio.write_json(out / name, res.to_dict())
            if not res.converged:
                log.warning("%s at alpha=%g did not converge (coverage %.5f)", method.value, alpha, res.achieved_coverage)
                if args.strict:
                    status = EXIT_NOT_CONVERGED
            log.info("%s alpha=%g: parameter %.6g, validation coverage %.5f", method.value, alpha, res.parameter, res.achieved_coverage)
    return status


def _find_results(calib_dir: Path, alphas):
    found = {}
    for path in sorted(calib_dir.glob("calibration_*_*.json")):
        res = CalibrationResult.from_dict(fileio.read_json(path))
        alpha = float(path.stem.rsplit("_", 1)[1])
        if alphas is None or any(abs(alpha - a) < 1e-12 for a in alphas):
            found[(alpha, res.method)] = res
    return found


def cmd_evaluate(args) -> int:
    model_dir = Path(args.model_dir)
    scheme = _load_scheme(model_dir)
    logits = _load_logits(model_dir / "logits_test.csv", scheme)
    labels = fileio.read_vector(Path(args.data_dir) / "y_test.csv")
    if logits.shape[0] != labels.size:
        raise SchemeMismatch(f"{logits.shape[0]} test logit rows for {labels.size} labels")
    results = _find_results(Path(args.calib_dir or model_dir), args.alpha)
    alphas = sorted(set(args.alpha or []) | {a for a, _ in results})
    out = _outdir(args)

    probs = apply_temperature(logits, 1.0)
    y_hat, _ = expected_predictions(probs, scheme)
    reports = []
    for alpha in alphas:
        ivs = intervals_from_probs(probs, scheme, alpha)
        reports.append(build_report(args.dataset_name, alpha, scheme, ReportMethod.POSTERIOR, ivs, labels, y_hat))
        fileio.write_intervals(out / f"intervals_posterior_{alpha_tag(alpha)}.csv", ivs)
        for method in (Method.EMPIRICAL, Method.TEMPERATURE):
            res = results.get((alpha, method))
            if res is None:
                continue
            ivs = apply_calibration(logits, scheme, res, alpha)
            if method is Method.TEMPERATURE:
                pred, _ = expected_predictions(apply_temperature(logits, res.parameter), scheme)
            else:
                pred = y_hat
            reports.append(
                build_report(args.dataset_name, alpha, scheme, method.value, ivs, labels, pred, parameter=res.parameter)
            )
            fileio.write_intervals(out / f"intervals_{method.value.lower()}_{alpha_tag(alpha)}.csv", ivs)

    fileio.write_json(out / "report.json", [r.to_dict() for r in reports])
    table = format_table(reports)
    if args.regressor_dir:
        pred = fileio.read_vector(Path(args.regressor_dir) / "predictions_test.csv")
        table += f"\nStandard regressor RMSE: {rmse(pred, labels):.4f}\n"
    (out / "report.txt").write_text(table)
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calint", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic regression task")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-train", type=int, default=20000)
    p.add_argument("--n-val", type=int, default=5000)
    p.add_argument("--n-test", type=int, default=5000)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--noise-std", type=float, default=1.0)
    p.add_argument("--generator", choices=[g.value for g in Generator], default=Generator.LINEAR.value)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="bin labels and train a classifier (or a standard regressor)")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--model", choices=["softmax", "standard"], default="softmax")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--distort", type=float, default=1.0, help="multiply emitted logits by this factor")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("calibrate", help="fit calibration parameters on the validation split")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--model-dir", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--alpha", type=parse_alphas, default=parse_alphas("0.66,0.8,0.9"))
    p.add_argument("--method", choices=["empirical", "temperature", "both"], default="both")
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--strict", action="store_true", help="exit non-zero if a search does not converge")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="score posterior and calibrated intervals on the test split")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--model-dir", required=True)
    p.add_argument("--calib-dir", default=None, help="defaults to --model-dir")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--alpha", type=parse_alphas, default=None)
    p.add_argument("--dataset-name", default="synthetic")
    p.add_argument("--regressor-dir", default=None)
    p.set_defaults(func=cmd_evaluate)
    return parser


def _thread_limit():
    n = os.environ.get("CALIB_THREADS")
    if not n:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(n)))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        with _thread_limit():
            return args.func(args)
    except (CalintError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

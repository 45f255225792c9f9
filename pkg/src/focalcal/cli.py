"""Command-line surface: logits ingestion, calibrator persistence, and
fit / apply / eval / analyze drivers.

Data layer conventions:
  - input CSV header is exactly logit_0,...,logit_{n-1},label (UTF-8,
    LF or CRLF); a width-1 file is treated as binary scores s and
    expanded to the logit pair (s, 0);
  - calibrator params travel as JSON with at least
    {family, gamma_ev, temperature} (fit emits the full record with the
    grid and trace);
  - floats in CSV artifacts are printed with 17 significant digits so a
    write/read round-trip is lossless;
  - exit codes: 0 success, 1 usage/parameter error, 2 data error,
    3 assertion/verification failure;
  - every randomized scan takes --seed and defaults to the same fixed
    seed, never to entropy.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    BINARY_LOGIT_GRID,
    BOUNDS_LOGIT_GRID,
    DEFAULT_PERCENTILES,
    DEFAULT_SEED,
    LANDSCAPE_LOSSES,
    bound_check,
    confidence_raising_scan,
    linear_fit_gamma_invT,
    loss_landscape_table,
    minimax_match_binary,  # noqa: F401  (re-exported for scripting parity)
    properness_scan,
)
from .core import (
    CalibratorParams,
    DataError,
    NumericError,
    ParameterError,
    VerificationError,
    focal_calib_binary,
    focal_risk_minimizer,
    softmax,
)
from .fitting import (
    DEFAULT_BINS,
    DEFAULT_GAMMAS,
    DEFAULT_T_MAX,
    DEFAULT_T_MIN,
    DEFAULT_T_STEP,
    GridSpec,
    LabeledLogits,
    apply_calibrator,
    fit_focal_temperature,
    fit_focal_temperature_line,
    fit_temperature,
)
from .metrics import PredictionBatch, error_rate, nll, reliability_table

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_ASSERT = 3

#: Bound verification defaults to this gamma sweep.
BOUNDS_GAMMAS = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0)


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------


def _fmt_cell(value) -> str:
    """CSV cell formatting: floats at 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])


def write_json(path, obj) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def ingest_csv(path) -> LabeledLogits:
    """Read a logits CSV into LabeledLogits.

    The header must be exactly logit_0,...,logit_{n-1},label.  Rows must
    be rectangular, logits finite decimals, labels integers in [0, n).
    Width-1 files hold binary scores s and are expanded to (s, 0).  All
    malformed content is reported with its line number.
    """
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: line 1: empty file, missing header") from None
        width = len(header) - 1
        expected = [f"logit_{i}" for i in range(width)] + ["label"]
        if width < 1 or header != expected:
            raise DataError(
                f"{path}: line 1: header must be logit_0,...,logit_{{n-1}},label; "
                f"got {','.join(header)}"
            )
        logits: list = []
        labels: list = []
        for row in reader:
            ln = reader.line_num
            if len(row) != width + 1:
                raise DataError(
                    f"{path}: line {ln}: expected {width + 1} fields, got {len(row)}"
                )
            try:
                values = [float(cell) for cell in row[:width]]
            except ValueError:
                raise DataError(f"{path}: line {ln}: unparseable logit value") from None
            if not all(np.isfinite(values)):
                raise DataError(f"{path}: line {ln}: non-finite logit value")
            try:
                label = int(row[width])
            except ValueError:
                raise DataError(
                    f"{path}: line {ln}: label must be an integer"
                ) from None
            n_classes = 2 if width == 1 else width
            if not 0 <= label < n_classes:
                raise DataError(
                    f"{path}: line {ln}: label {label} out of range "
                    f"for {n_classes} classes"
                )
            logits.append(values)
            labels.append(label)
    if not logits:
        raise DataError(f"{path}: no data rows")
    arr = np.asarray(logits, dtype=float)
    if width == 1:
        arr = np.concatenate([arr, np.zeros_like(arr)], axis=-1)
    return LabeledLogits(arr, np.asarray(labels, dtype=int))


def read_params(path) -> CalibratorParams:
    """Load calibrator params from JSON ({family, gamma_ev, temperature})."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from None
    try:
        family = payload["family"]
        gamma_ev = float(payload["gamma_ev"])
        temperature = float(payload["temperature"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(
            f"{path}: params JSON needs family, gamma_ev, temperature ({exc})"
        ) from None
    try:
        return CalibratorParams(gamma_ev, temperature, family)
    except ParameterError as exc:
        raise DataError(f"{path}: {exc}") from None


def _params_dict(params: CalibratorParams) -> dict:
    return {
        "family": params.family,
        "gamma_ev": params.gamma_ev,
        "temperature": params.temperature,
    }


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _float_list(text: str):
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _int_list(text: str):
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_logit_grid_flags(parser, defaults) -> None:
    parser.add_argument("--logit-lo", type=float, default=defaults[0])
    parser.add_argument("--logit-hi", type=float, default=defaults[1])
    parser.add_argument("--logit-step", type=float, default=defaults[2])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="focalcal",
        description=(
            "Post-hoc probability calibration with temperature scaling and "
            "the focal calibration map, plus the numerical studies behind it."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="grid-search calibrator params on a validation file")
    p_fit.add_argument("--val", required=True, help="validation logits CSV")
    p_fit.add_argument("--method", choices=("ts", "fts", "fts-line"), default="fts")
    p_fit.add_argument("--criterion", choices=("ece", "nll"), default="ece")
    p_fit.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p_fit.add_argument(
        "--gammas",
        type=_float_list,
        default=list(DEFAULT_GAMMAS),
        help="gamma_ev grid (comma separated); ignored for --method ts",
    )
    p_fit.add_argument("--t-min", type=float, default=DEFAULT_T_MIN)
    p_fit.add_argument("--t-max", type=float, default=DEFAULT_T_MAX)
    p_fit.add_argument("--t-step", type=float, default=DEFAULT_T_STEP)
    p_fit.add_argument("--out", required=True, help="output params JSON path")
    p_fit.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="reserved; the fit itself is deterministic")
    p_fit.set_defaults(func=cmd_fit)

    p_apply = sub.add_parser("apply", help="apply saved params to a logits file")
    p_apply.add_argument("--params", required=True)
    p_apply.add_argument("--in", dest="infile", required=True)
    p_apply.add_argument("--out", required=True, help="output probabilities CSV")
    p_apply.set_defaults(func=cmd_apply)

    p_eval = sub.add_parser("eval", help="evaluate raw or calibrated logits")
    p_eval.add_argument("--in", dest="infile", required=True)
    p_eval.add_argument("--params", default=None)
    p_eval.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p_eval.add_argument("--report", required=True, help="output report JSON path")
    p_eval.set_defaults(func=cmd_eval)

    p_an = sub.add_parser("analyze", help="run a numerical study, writing CSV + JSON")
    an_sub = p_an.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    a_bin = an_sub.add_parser("binary-fit", help="binary minimax matching + trend line")
    a_bin.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list, default=None)
    _add_logit_grid_flags(a_bin, BINARY_LOGIT_GRID)
    a_bin.add_argument("--out", default=".")
    a_bin.set_defaults(func=cmd_analyze_binary_fit)

    a_simp = an_sub.add_parser("simplex-fit", help="simplex minimax matching + trend line")
    a_simp.add_argument("--dim", type=int, default=3)
    a_simp.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list, default=None)
    a_simp.add_argument("--logit-lo", type=float, default=None)
    a_simp.add_argument("--logit-hi", type=float, default=None)
    a_simp.add_argument("--logit-step", type=float, default=None)
    a_simp.add_argument("--out", default=".")
    a_simp.set_defaults(func=cmd_analyze_simplex_fit)

    a_bnd = an_sub.add_parser("bounds", help="sandwich bounds + experimental tightening")
    a_bnd.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list,
                       default=list(BOUNDS_GAMMAS))
    _add_logit_grid_flags(a_bnd, BOUNDS_LOGIT_GRID)
    a_bnd.add_argument("--t-step", type=float, default=0.001)
    a_bnd.add_argument("--out", default=".")
    a_bnd.set_defaults(func=cmd_analyze_bounds)

    a_prop = an_sub.add_parser("properness", help="properized-loss minimizer scan")
    a_prop.add_argument("--p", action="append", type=_float_list, default=None,
                        help="ground truth (repeatable), e.g. --p 0.55,0.3,0.15")
    a_prop.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list,
                        default=[1.0, 3.0])
    a_prop.add_argument("--grid-step", type=float, default=1e-3)
    a_prop.add_argument("--random", type=int, default=0,
                        help="additional Dirichlet(1) ground truths")
    a_prop.add_argument("--dim", type=int, default=3,
                        help="dimension for --random when no --p is given")
    a_prop.add_argument("--seed", type=int, default=DEFAULT_SEED)
    a_prop.add_argument("--out", default=".")
    a_prop.set_defaults(func=cmd_analyze_properness)

    a_conf = an_sub.add_parser("confidence", help="confidence-raising scan")
    a_conf.add_argument("--dims", type=_int_list, default=[2, 3, 4, 10])
    a_conf.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list,
                        default=[0.5, 1.0, 2.0, 3.0, 5.0])
    a_conf.add_argument("--samples", type=int, default=100_000)
    a_conf.add_argument("--seed", type=int, default=DEFAULT_SEED)
    a_conf.add_argument("--out", default=".")
    a_conf.set_defaults(func=cmd_analyze_confidence)

    a_land = an_sub.add_parser("landscape", help="conditional-risk tables for isolines")
    a_land.add_argument("--p", type=_float_list, default=[0.55, 0.30, 0.15])
    a_land.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list,
                        default=[1.0])
    a_land.add_argument("--losses", default=",".join(LANDSCAPE_LOSSES),
                        help="comma-separated subset of " + ",".join(LANDSCAPE_LOSSES))
    a_land.add_argument("--grid-step", type=float, default=0.01)
    a_land.add_argument("--percentiles", type=_float_list,
                        default=list(DEFAULT_PERCENTILES))
    a_land.add_argument("--out", default=".")
    a_land.set_defaults(func=cmd_analyze_landscape)

    a_min = an_sub.add_parser("minimizer", help="focal conditional-risk minimizers")
    a_min.add_argument("--p", type=_float_list,
                       default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    a_min.add_argument("--gamma", "--gammas", dest="gammas", type=_float_list,
                       default=[0.5, 1.0, 2.0, 3.0, 5.0, 7.0])
    a_min.add_argument("--out", default=".")
    a_min.set_defaults(func=cmd_analyze_minimizer)

    return parser


# ---------------------------------------------------------------------------
# fit / apply / eval
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    data = ingest_csv(args.val)
    gammas = (0.0,) if args.method == "ts" else tuple(args.gammas)
    grid = GridSpec(
        gamma_values=gammas,
        t_min=args.t_min,
        t_max=args.t_max,
        t_step=args.t_step,
        criterion=args.criterion,
    )
    if args.method == "ts":
        result = fit_temperature(data, grid, n_bins=args.bins)
    elif args.method == "fts":
        result = fit_focal_temperature(data, grid, n_bins=args.bins)
    else:
        result = fit_focal_temperature_line(data, grid, n_bins=args.bins)
    write_json(args.out, result.to_dict())
    best = result.best
    print(
        f"method={args.method} family={best.family} "
        f"gamma_ev={best.gamma_ev:.17g} temperature={best.temperature:.17g} "
        f"{result.criterion}={result.criterion_value:.17g} "
        f"candidates={len(result.trace)}"
    )
    print(f"wrote {args.out}")
    return 0


def cmd_apply(args) -> int:
    params = read_params(args.params)
    data = ingest_csv(args.infile)
    batch = apply_calibrator(data, params)
    n = batch.n_classes
    header = [f"prob_{i}" for i in range(n)] + ["label"]
    rows: list = [header]
    for probs, label in zip(batch.probabilities, batch.labels):
        rows.append([float(v) for v in probs] + [int(label)])
    write_csv(args.out, rows)
    print(f"wrote {args.out} ({len(batch)} rows, {n} classes)")
    return 0


def cmd_eval(args) -> int:
    data = ingest_csv(args.infile)
    params = read_params(args.params) if args.params else None
    if params is None:
        batch = PredictionBatch(softmax(data.logits), data.labels)
    else:
        batch = apply_calibrator(data, params)
    table = reliability_table(batch, n_bins=args.bins)
    err = float(error_rate(batch))
    report_path = Path(args.report)
    reliability_path = report_path.with_name(report_path.stem + "_reliability.csv")
    report = {
        "n": batch.n_classes,
        "rows": len(batch),
        "accuracy": 1.0 - err,
        "error_rate": err,
        "nll": float(nll(batch)),
        "ece": table.ece(),
        "bins": args.bins,
        "params_used": _params_dict(params) if params else None,
        "input": str(args.infile),
        "reliability_csv": reliability_path.name,
    }
    write_json(report_path, report)
    write_csv(reliability_path, table.to_csv_rows())
    print(
        f"rows={report['rows']} accuracy={report['accuracy']:.17g} "
        f"nll={report['nll']:.17g} ece={report['ece']:.17g}"
    )
    print(f"wrote {report_path} and {reliability_path}")
    return 0


# ---------------------------------------------------------------------------
# analyze subcommands
# ---------------------------------------------------------------------------


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_analyze_binary_fit(args) -> int:
    fit = linear_fit_gamma_invT(
        2,
        gamma_grid=args.gammas,
        logit_lo=args.logit_lo,
        logit_hi=args.logit_hi,
        logit_step=args.logit_step,
    )
    out = _outdir(args)
    write_csv(out / "binary_fit.csv", fit.to_csv_rows())
    write_json(out / "binary_fit.json", fit.to_dict())
    print(
        f"dim=2 slope={fit.slope:.17g} intercept={fit.intercept:.17g} "
        f"max_abs_residual={fit.max_abs_residual:.17g}"
    )
    print(f"wrote {out / 'binary_fit.csv'} and {out / 'binary_fit.json'}")
    return 0


def cmd_analyze_simplex_fit(args) -> int:
    fit = linear_fit_gamma_invT(
        args.dim,
        gamma_grid=args.gammas,
        logit_lo=args.logit_lo,
        logit_hi=args.logit_hi,
        logit_step=args.logit_step,
    )
    out = _outdir(args)
    stem = f"simplex_fit_dim{args.dim}"
    write_csv(out / f"{stem}.csv", fit.to_csv_rows())
    write_json(out / f"{stem}.json", fit.to_dict())
    print(
        f"dim={args.dim} slope={fit.slope:.17g} intercept={fit.intercept:.17g} "
        f"max_abs_residual={fit.max_abs_residual:.17g}"
    )
    print(f"wrote {out / (stem + '.csv')} and {out / (stem + '.json')}")
    return 0


def cmd_analyze_bounds(args) -> int:
    results = [
        bound_check(
            g,
            logit_lo=args.logit_lo,
            logit_hi=args.logit_hi,
            logit_step=args.logit_step,
            t_step=args.t_step,
        )
        for g in args.gammas
    ]
    out = _outdir(args)
    rows: list = [
        [
            "gamma",
            "theoretical_lower_T",
            "experimental_lower_T",
            "experimental_upper_T",
            "theoretical_upper_T",
        ]
    ]
    for r in results:
        rows.append(
            [
                r.gamma,
                r.theoretical_lower_T,
                r.experimental_lower_T,
                r.experimental_upper_T,
                r.theoretical_upper_T,
            ]
        )
    write_csv(out / "bounds.csv", rows)
    write_json(out / "bounds.json", {"results": [r.to_dict() for r in results]})
    for r in results:
        print(
            f"gamma={r.gamma:g} theoretical=({r.theoretical_lower_T:.17g}, "
            f"{r.theoretical_upper_T:.17g}) experimental=({r.experimental_lower_T:.17g}, "
            f"{r.experimental_upper_T:.17g})"
        )
    print(f"wrote {out / 'bounds.csv'} and {out / 'bounds.json'}")
    return 0


def cmd_analyze_properness(args) -> int:
    ps = [tuple(p) for p in (args.p or [])]
    if not ps and args.random == 0:
        ps = [(0.55, 0.30, 0.15)]
    dim = len(ps[0]) if ps else args.dim
    if any(len(p) != dim for p in ps):
        raise ParameterError("all --p ground truths must share one dimension")
    if args.random > 0:
        rng = np.random.default_rng(args.seed)
        sampled = rng.dirichlet(np.ones(dim), size=args.random)
        ps = ps + [tuple(float(v) for v in row) for row in sampled]
    out = _outdir(args)
    reports = []
    for g in args.gammas:
        report = properness_scan(ps, g, grid_step=args.grid_step)
        reports.append(report)
        write_csv(out / f"properness_gamma_{g:g}.csv", report.to_csv_rows())
        print(
            f"gamma={g:g} cases={len(report.cases)} "
            f"max_linf={report.max_linf:.17g} tolerance={report.tolerance:.17g}"
        )
    write_json(
        out / "properness.json",
        {"seed": args.seed, "reports": [r.to_dict() for r in reports]},
    )
    print(f"wrote {out / 'properness.json'}")
    return 0


def cmd_analyze_confidence(args) -> int:
    report = confidence_raising_scan(
        dims=tuple(args.dims),
        gammas=tuple(args.gammas),
        n_samples=args.samples,
        seed=args.seed,
        raise_on_violation=False,
    )
    out = _outdir(args)
    write_csv(out / "confidence.csv", report.to_csv_rows())
    write_json(out / "confidence.json", report.to_dict())
    print(
        f"configurations={len(report.rows)} violations={report.total_violations()}"
    )
    print(f"wrote {out / 'confidence.csv'} and {out / 'confidence.json'}")
    if report.total_violations() > 0:
        for r in report.rows:
            if r.n_violations and r.witness is not None:
                print(
                    f"focalcal: confidence raising violated at "
                    f"dim={r.dimension}, gamma={r.gamma}: input "
                    f"{r.witness['input']} mapped to {r.witness['mapped']} "
                    f"(min margin {r.min_margin:.6e})",
                    file=sys.stderr,
                )
        return EXIT_ASSERT
    return 0


def cmd_analyze_landscape(args) -> int:
    losses = tuple(tok for tok in args.losses.split(",") if tok)
    out = _outdir(args)
    summaries = []
    for g in args.gammas:
        table = loss_landscape_table(
            args.p,
            g,
            losses=losses,
            grid_step=args.grid_step,
            percentiles=tuple(args.percentiles),
        )
        write_csv(out / f"landscape_gamma_{g:g}.csv", table.to_csv_rows())
        summaries.append(table.summary_dict())
        print(
            f"gamma={g:g} grid_points={table.grid.shape[0]} "
            f"losses={','.join(table.loss_names)}"
        )
    write_json(out / "landscape.json", {"tables": summaries})
    print(f"wrote {out / 'landscape.json'}")
    return 0


def cmd_analyze_minimizer(args) -> int:
    rows: list = [["p_true", "gamma", "minimizer", "recovered", "recovery_error"]]
    for g in args.gammas:
        for p in args.p:
            q_star = focal_risk_minimizer(p, g)
            recovered = float(focal_calib_binary(q_star, g))
            rows.append([p, g, q_star, recovered, abs(recovered - p)])
    out = _outdir(args)
    write_csv(out / "minimizer.csv", rows)
    write_json(
        out / "minimizer.json",
        {
            "rows": [
                dict(zip(rows[0], row)) for row in rows[1:]
            ]
        },
    )
    if len(rows) <= 13:
        for row in rows[1:]:
            print(
                f"p={row[0]:g} gamma={row[1]:g} minimizer={row[2]:.17g} "
                f"recovery_error={row[4]:.3g}"
            )
    print(f"wrote {out / 'minimizer.csv'} and {out / 'minimizer.json'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"focalcal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"focalcal: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (VerificationError, NumericError) as exc:
        print(f"focalcal: verification failure: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except OSError as exc:
        print(f"focalcal: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

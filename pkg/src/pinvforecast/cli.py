"""Command-line entry point: ``pinvforecast {generate,fit,predict,reproduce}``.

Exit codes: 0 success, 2 usage, 3 data, 4 dimension, 5 numerical,
6 configuration, 7 I/O.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ForecastError, UsageError
from .generators import MackeyGlassConfig, ecg_surrogate, mackey_glass
from .ingest import write_series
from .pipeline import (
    RECIPES,
    fit_series,
    load_input,
    load_model,
    output_dir,
    read_config_file,
    reproduce,
    resolve_config,
    run_forecast,
    save_model,
)

EXIT_IO = 7

log = logging.getLogger("pinvforecast")


def _d_value(text: str):
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer or 'auto', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError("d must be >= 1")
    return value


def _channel(text: str):
    return int(text) if text.lstrip("-").isdigit() else text


def _add_run_flags(p: argparse.ArgumentParser, fitting: bool) -> None:
    # every default is None so that config-file values survive unless a flag is given
    p.add_argument("--config", help="JSON file with run settings (flags take precedence)")
    p.add_argument("--input", help="delimited-text signal file")
    p.add_argument("--rate", dest="rate_hz", type=float, help="sampling rate in Hz (overrides file header)")
    p.add_argument("--channel", type=_channel, help="column index or header name to read")
    p.add_argument("--out-dir", dest="out_dir", help="output directory (default: $PINVFORECAST_OUTPUT_DIR or .)")
    p.add_argument("--precision", type=int, help="decimals in output tables (default 9)")
    if fitting:
        p.add_argument("--d", type=_d_value, help="embedding dimension or 'auto' for FNN (default auto)")
        p.add_argument("--lag", type=int, help="delay in samples (default 1)")
        p.add_argument("--np", type=int, help="polynomial degree of the ansatz (default 3)")
        p.add_argument("--M", type=int, help="number of training rows")
        p.add_argument("--T", type=int, help="forecast horizon in samples (default 1)")
        p.add_argument("--svd-tol", dest="svd_tol", type=float, help="relative singular-value cutoff (default 1e-12)")
        p.add_argument("--standardize", action="store_const", const=True, help="z-score delay coordinates")
        p.add_argument("--eps", type=float, help="guard for near-zero targets in the empirical FIM")
        p.add_argument("--c-weight", dest="c_weight", type=float, help="empirical FIM constant C_k (default 1)")
        p.add_argument("--d-max", dest="d_max", type=int, help="largest dimension tried by FNN (default 10)")
        p.add_argument("--fnn-threshold", dest="fnn_threshold", type=float, help="FNN fraction cutoff (default 0.01)")
    else:
        p.add_argument("--mode", choices=["direct", "iterated"], help="forecast mode (default direct)")
        p.add_argument("--m-p", dest="m_p", type=int, help="number of predicted points (default n - max(T, d))")
        p.add_argument("--window", type=int, help="rolling-MSE window in samples (default 1 s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pinvforecast", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a benchmark signal")
    gsub = gen.add_subparsers(dest="generator", required=True)
    mg = gsub.add_parser("mackey-glass", help="Mackey-Glass trajectory via RK4")
    mg.add_argument("--a", type=float, required=True)
    mg.add_argument("--b", type=float, required=True)
    mg.add_argument("--tau", type=float, required=True)
    mg.add_argument("--x0", type=float, required=True)
    mg.add_argument("--n", type=int, required=True, help="number of output samples")
    mg.add_argument("--dt", type=float, default=0.1, help="integration step (default 0.1 s)")
    mg.add_argument("--sample-every", type=int, default=10, help="steps between output samples (default 10)")
    mg.add_argument("--out", required=True)
    ecg = gsub.add_parser("ecg-surrogate", help="synthetic ECG-like spike train")
    ecg.add_argument("--n", type=int, default=10_000)
    ecg.add_argument("--rate", type=float, default=360.0)
    ecg.add_argument("--seed", type=int, default=207)
    ecg.add_argument("--out", required=True)

    fit = sub.add_parser("fit", help="modeling phase: estimate coefficients and write a model file")
    _add_run_flags(fit, fitting=True)
    fit.add_argument("--model", required=True, help="model file to write")

    pred = sub.add_parser("predict", help="prediction phase: forecast with a saved model")
    _add_run_flags(pred, fitting=False)
    pred.add_argument("--model", required=True, help="model file written by 'fit'")
    pred.add_argument("--name", default="forecast", help="stem of the output files")

    rep = sub.add_parser("reproduce", help="run a named benchmark configuration end to end")
    rep.add_argument("name", choices=sorted(RECIPES))
    rep.add_argument("--input", help="ECG export for the ECG recipes")
    rep.add_argument("--surrogate", action="store_true", help="use the synthetic ECG surrogate instead of an export")
    rep.add_argument("--seed", type=int, help="surrogate seed")
    rep.add_argument("--mode", choices=["direct", "iterated"])
    rep.add_argument("--out-dir", dest="out_dir")
    return parser


_RUN_KEYS = ("input", "rate_hz", "channel", "out_dir", "precision", "d", "lag", "np", "M", "T", "svd_tol",
             "standardize", "eps", "c_weight", "d_max", "fnn_threshold", "mode", "m_p", "window")


def _run_config(args):
    flags = {k: getattr(args, k) for k in _RUN_KEYS if hasattr(args, k)}
    file_values = read_config_file(args.config) if args.config else None
    return resolve_config(file_values, flags)


def cmd_generate(args) -> int:
    if args.generator == "mackey-glass":
        cfg = MackeyGlassConfig(a=args.a, b=args.b, tau=args.tau, x0=args.x0, dt=args.dt,
                                sample_every=args.sample_every, n_samples=args.n)
        series = mackey_glass(cfg)
    else:
        series = ecg_surrogate(args.n, args.rate, seed=args.seed)
    path = write_series(series, args.out)
    print(f"wrote {len(series)} samples to {path}")
    return 0


def cmd_fit(args) -> int:
    cfg = _run_config(args)
    series = load_input(cfg)
    outcome = fit_series(series, cfg)
    path = save_model(outcome, args.model, {"kind": "file", "path": cfg.input, "rate_hz": 1.0 / series.dt})
    m, diag = outcome.model, outcome.diagnostics
    if outcome.fnn is not None:
        print(f"fnn: d={outcome.fnn.d} saturated={outcome.fnn.saturated}")
    print(f"model: {path}")
    print(f"coefficients={m.n_coefficients} rank={m.rank} sigma2={m.sigma2:.6g} "
          f"fim_condition={diag.fim_condition:.6g} empirical_fim={diag.empirical_fim:.6g} "
          f"guards={diag.guard_count}")
    return 0


def cmd_predict(args) -> int:
    cfg = _run_config(args)
    model = load_model(args.model)
    series = load_input(cfg)
    files = run_forecast(series, model, cfg, args.name, {"model_file": str(args.model)})
    print(f"m_p={files['m_p']} mse={files['mse']:.6g}")
    print(f"predictions: {files['predictions']}")
    print(f"rolling mse: {files['rolling_mse']}")
    print(f"summary: {files['summary']}")
    return 0


def cmd_reproduce(args) -> int:
    overrides = {"seed": args.seed, "mode": args.mode}
    files = reproduce(args.name, input_path=args.input, surrogate=args.surrogate,
                      out_dir=args.out_dir, overrides=overrides)
    print(f"{args.name}: coefficients={files['n_coefficients']} M={files['M']} m_p={files['m_p']} "
          f"mse={files['mse']:.6g} nmse_new={files['nmse_new']:.6g}")
    for key in ("model", "predictions", "rolling_mse", "summary"):
        print(f"{key}: {files[key]}")
    return 0


COMMANDS = {"generate": cmd_generate, "fit": cmd_fit, "predict": cmd_predict, "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ForecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

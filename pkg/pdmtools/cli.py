"""
forecaster: the command-line pipeline ingest -> train -> forecast -> evaluate -> plot.

    forecaster <command> --config FILE [--seed N] [--out DIR] [-v | -q] [key=value ...]

Exit codes: 0 success, 2 I/O error, 3 validation error, 4 numeric divergence.

Date: Oct 2026

"""

import argparse
import logging
import os
import sys

import numpy as np
import pandas as pd

from pdmtools import folder_utils as fu
from pdmtools.baselines import (ARIMA, MEAN, METHOD_ORDER, align_forecasts, ar_fit, ar_forecast, degradation_trend,
                                evaluate, mean_forecast, plot_frame, windowed_rmse, write_report)
from pdmtools.bilstm import bilstm_train, load_bilstm, save_bilstm
from pdmtools.chunk import make_training_pairs, make_windows
from pdmtools.config import config_hash, load_run_config
from pdmtools.core import TelemetryCore
from pdmtools.exceptions import ConfigError, NumericDivergenceError, PdmToolsError
from pdmtools.gan import gan_train, load_gan, save_gan
from pdmtools.gradient_check import check_bilstm_gradients, check_layer_kinds
from pdmtools.interleave import BILSTM_TO_PREDGAN, PREDGAN_TO_BILSTM, forecast, read_series, to_physical, write_series
from pdmtools.predictive_gan import predgan_rollout, write_trace
from pdmtools.visualise_forecast import plot_feature_forecast, plot_latent_trace, plot_training_history

logger = logging.getLogger(__name__)

GRADIENT_THRESHOLD = 1e-4
BILSTM_GRADIENT_THRESHOLD = 1e-3


def _load_core(config):
    core = TelemetryCore()
    core.read_frames(config.output_dir, config.pipeline_order)
    return core


def cmd_ingest(config):
    if not config.data_path:
        raise ConfigError("data_path", "ingest needs the telemetry CSV path")
    core = TelemetryCore(config.data_path, config.machine_id)
    core.process(smooth=True, smoothing_window=config.smoothing_window,
                 fuse=True, fusion_window=config.fusion_window,
                 pipeline_order=config.pipeline_order,
                 split=True, train_fraction=config.train_fraction,
                 scale=True)
    fu.make_dir(config.output_dir)
    written = core.write_frames(config.output_dir)

    counts = core.row_counts()
    stages = " -> ".join(str(counts[s]) for s in counts if s not in ("train", "test"))
    print("rows: %s -> split %d/%d" % (stages, counts["train"], counts["test"]))
    return written, {"row_counts": counts}


def cmd_train_gan(config):
    core = _load_core(config)
    samples = make_windows(core.train_scaled, config.window_size, config.stride)
    generator, discriminator, history = gan_train(samples, config.gan_config())

    weights = os.path.join(config.output_dir, fu.GAN_WEIGHTS)
    save_gan(generator, discriminator, weights)
    history_file = os.path.join(config.output_dir, fu.GAN_HISTORY)
    history.to_csv(history_file, index=False, float_format="%.17g", lineterminator="\n")
    if len(history):
        print("gan: %d epochs, final d_loss %.6f g_loss %.6f"
              % (len(history), history["d_loss"].iloc[-1], history["g_loss"].iloc[-1]))
    return [weights, history_file], {"gan_samples": len(samples)}


def cmd_train_bilstm(config):
    core = _load_core(config)
    pairs = make_training_pairs(core.train_scaled, config.window_size, config.pair_stride)
    model = bilstm_train(pairs, config.seq_config())

    weights = os.path.join(config.output_dir, fu.BILSTM_WEIGHTS)
    save_bilstm(model, weights)
    history_file = os.path.join(config.output_dir, fu.BILSTM_HISTORY)
    model.history.to_csv(history_file, index=False, float_format="%.17g", lineterminator="\n")
    if len(model.history):
        print("bilstm: %d epochs, final loss %.6f" % (len(model.history), model.history["loss"].iloc[-1]))
    return [weights, history_file], {"bilstm_pairs": len(pairs[0])}


def cmd_train(config):
    gan_files, gan_extra = cmd_train_gan(config)
    bilstm_files, bilstm_extra = cmd_train_bilstm(config)
    return gan_files + bilstm_files, dict(gan_extra, **bilstm_extra)


def _load_models(config):
    generator, _ = load_gan(fu.require_artifact(config.output_dir, fu.GAN_WEIGHTS, "train"), config.gan_config())
    bilstm = load_bilstm(fu.require_artifact(config.output_dir, fu.BILSTM_WEIGHTS, "train"),
                         config.cell_activation, config.output_activation)
    return generator, bilstm


def cmd_forecast(config):
    core = _load_core(config)
    generator, bilstm = _load_models(config)

    trace = []
    primary, secondary = forecast(generator, bilstm, core.train_scaled.tail(config.window_size),
                                  config.interleave_config(), trace=trace)
    written = []
    for series in (primary, secondary):
        path = os.path.join(config.output_dir, fu.series_file(series.path))
        write_series(to_physical(series, core.scaler), path)
        written.append(path)
    trace_file = os.path.join(config.output_dir, fu.LATENT_TRACE)
    write_trace(trace, trace_file)
    written.append(trace_file)
    print("forecast: %d windows, %d rows per path" % (config.horizon_windows, len(primary)))
    return written, {}


def cmd_evaluate(config):
    core = _load_core(config)
    series = {}
    for path in (BILSTM_TO_PREDGAN, PREDGAN_TO_BILSTM):
        file = fu.require_artifact(config.output_dir, fu.series_file(path), "forecast")
        series[path] = read_series(file, config.window_size).values

    horizon = len(series[PREDGAN_TO_BILSTM])
    forecasts = {ARIMA: ar_forecast(ar_fit(core.train, config.ar_order, config.ar_difference), horizon)}
    forecasts.update(series)
    methods = list(METHOD_ORDER)
    if config.include_mean_baseline:
        forecasts[MEAN] = mean_forecast(core.train, horizon)
        methods.append(MEAN)
    forecasts = align_forecasts({m: forecasts[m] for m in methods}, len(core.test))
    report = evaluate(forecasts, core.test, methods)

    text_file = os.path.join(config.output_dir, fu.REPORT_TEXT)
    csv_file = os.path.join(config.output_dir, fu.REPORT_CSV)
    write_report(report, text_file, csv_file)
    written = [text_file, csv_file]
    print(report.to_text())

    actual = core.test.values[:report.sample_count]
    for j, feature in enumerate(core.test.feature_names):
        path = os.path.join(config.output_dir, fu.plot_data_file(feature))
        plot_frame(j, actual, forecasts).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        written.append(path)

    extra = {"sample_count": report.sample_count}
    if config.rollout_windows > 0:
        written.append(_degradation(config, core))
        extra["rollout_windows"] = config.rollout_windows
    return written, extra


def _degradation(config, core):
    generator, _ = load_gan(fu.require_artifact(config.output_dir, fu.GAN_WEIGHTS, "train"), config.gan_config())
    windows = predgan_rollout(generator, core.train_scaled.values[-(config.window_size - 1):], config.weights(),
                              config.latent_config(), config.rollout_windows)
    predicted = core.scaler.inverse_transform(np.concatenate(windows))
    errors = windowed_rmse(predicted, core.test.values, config.window_size)
    trend = degradation_trend(errors)

    path = os.path.join(config.output_dir, fu.DEGRADATION)
    pd.DataFrame({"window": np.arange(1, len(errors) + 1), "rmse": errors}).to_csv(
        path, index=False, float_format="%.17g", lineterminator="\n")
    print("predictive gan roll-out: %d scored windows, spearman trend %.3f" % (len(errors), trend))
    return path


def cmd_plot(config):
    written = []
    output_dir = os.path.normpath(config.output_dir)
    for feature_csv in fu.get_all_artifact_files(config.output_dir, ".csv"):
        name = os.path.basename(feature_csv)
        if not (name.startswith("plot_") and os.path.normpath(os.path.dirname(feature_csv)) == output_dir):
            continue
        feature = name[len("plot_"):-len(".csv")]
        path = os.path.join(config.output_dir, fu.plot_file(feature))
        plot_feature_forecast(pd.read_csv(feature_csv), feature, output_file=path)
        written.append(path)
    if not written:
        fu.require_artifact(config.output_dir, fu.plot_data_file("volt"), "evaluate")

    histories = {}
    for key, filename in (("gan_history", fu.GAN_HISTORY), ("bilstm_history", fu.BILSTM_HISTORY)):
        file = os.path.join(config.output_dir, filename)
        histories[key] = pd.read_csv(file) if os.path.isfile(file) else None
    if any(h is not None for h in histories.values()):
        path = os.path.join(config.output_dir, "training_history.svg")
        plot_training_history(output_file=path, **histories)
        written.append(path)

    trace_file = os.path.join(config.output_dir, fu.LATENT_TRACE)
    if os.path.isfile(trace_file):
        trace = pd.read_csv(trace_file)
        if len(trace):
            path = os.path.join(config.output_dir, "latent_trace.svg")
            plot_latent_trace(trace, output_file=path)
            written.append(path)
    print("plot: %d figures" % len(written))
    return written, {}


def cmd_check_gradients(config):
    worst = check_layer_kinds(seed=config.seed)
    worst_bilstm = max(check_bilstm_gradients(seed=config.seed).values())
    for kind, error in worst.items():
        print("%-18s %.3e" % (kind, error))
    print("%-18s %.3e" % ("bilstm", worst_bilstm))
    failing = [k for k, e in worst.items() if e >= GRADIENT_THRESHOLD]
    if worst_bilstm >= BILSTM_GRADIENT_THRESHOLD:
        failing.append("bilstm")
    if failing:
        raise NumericDivergenceError("gradient check failed for: " + ", ".join(failing))
    return [], {}


COMMANDS = {
    "ingest": cmd_ingest,
    "train-gan": cmd_train_gan,
    "train-bilstm": cmd_train_bilstm,
    "train": cmd_train,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
    "plot": cmd_plot,
    "check-gradients": cmd_check_gradients,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="key = value configuration file")
    common.add_argument("--seed", type=int, default=None, help="overrides the configured seed")
    common.add_argument("--out", type=str, default=None, help="output directory, overrides output_dir")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    common.add_argument("overrides", nargs="*", metavar="key=value", help="configuration overrides")

    parser = argparse.ArgumentParser(prog="forecaster",
                                     description="Telemetry forecasting with an interleaved GAN and BiLSTM.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    try:
        config = load_run_config(args.config, args.overrides, seed=args.seed, output_dir=args.out)
        fu.make_dir(config.output_dir)
        written, extra = COMMANDS[args.command](config)
        fu.write_manifest(config.output_dir, args.command, config, config_hash(config), written, extra)
    except PdmToolsError as e:
        print("%s: %s" % (args.command, e), file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print("%s: %s" % (args.command, e), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""
Functions to visualise forecasts, training curves and latent-search traces

Date: Oct 2026

"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no creation date in the SVG, so reruns write identical files
matplotlib.rcParams["svg.hashsalt"] = "pdmtools"
SVG_METADATA = {"Date": None}


def _save(fig, output_file):
    if output_file:
        fig.savefig(output_file, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return fig


def plot_feature_forecast(plot_data, feature, figsize=(8, 4), output_file=None):
    """
    Actual series against every method's forecast for one feature.

    :param plot_data: DataFrame with columns step, actual, predicted, method
    :param feature: feature name, used for the title and the y label
    :param figsize:
    :param output_file: SVG path
    :return: the figure (one line for the actual values, then one per method)
    """
    fig, ax = plt.subplots(figsize=figsize)
    methods = list(dict.fromkeys(plot_data["method"]))
    first = plot_data[plot_data["method"] == methods[0]]
    ax.plot(first["step"], first["actual"], color="black", linewidth=1.5, label="actual")
    for method in methods:
        rows = plot_data[plot_data["method"] == method]
        ax.plot(rows["step"], rows["predicted"], linewidth=1.0, label=method)
    ax.set_title(feature)
    ax.set_xlabel("step")
    ax.set_ylabel(feature)
    ax.legend(loc="best")
    return _save(fig, output_file)


def plot_training_history(gan_history=None, bilstm_history=None, figsize=(8, 4), output_file=None):
    """
    Loss curves from the history CSVs (either may be missing).
    """
    panels = [h for h in (gan_history, bilstm_history) if h is not None]
    fig, axes = plt.subplots(1, max(len(panels), 1), figsize=figsize, squeeze=False)
    column = 0
    if gan_history is not None:
        ax = axes[0, column]
        ax.plot(gan_history["epoch"], gan_history["d_loss"], label="discriminator")
        ax.plot(gan_history["epoch"], gan_history["g_loss"], label="generator")
        ax.set_title("gan")
        ax.set_xlabel("epoch")
        ax.legend(loc="best")
        column += 1
    if bilstm_history is not None:
        ax = axes[0, column]
        ax.plot(bilstm_history["epoch"], bilstm_history["loss"], label="mse")
        ax.set_title("bilstm")
        ax.set_xlabel("epoch")
        ax.legend(loc="best")
    return _save(fig, output_file)


def plot_latent_trace(trace, figsize=(6, 4), output_file=None):
    """
    :param trace: DataFrame with columns iteration, loss
    """
    fig, ax = plt.subplots(figsize=figsize)
    ax.semilogy(trace["iteration"], trace["loss"])
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    ax.set_title("latent optimisation")
    return _save(fig, output_file)

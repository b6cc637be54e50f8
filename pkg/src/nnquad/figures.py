"""Figure rendering for the report commands.

Figures are a convenience companion to the CSV reports; the CSVs stay the
authoritative, diff-friendly output.  matplotlib is imported lazily with the
Agg backend so library use never touches a display.
"""

import os

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def render_training_figure(out_dir, log):
    """Loss-vs-epoch curve from the (epoch, loss) training log."""
    plt = _plt()
    epochs = [row[0] for row in log]
    losses = [row[1] for row in log]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(epochs, losses, lw=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training MSE")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = os.path.join(out_dir, "training_loss.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_compare_figures(out_dir, result, net_eval):
    """Approximation and error figures for a comparison run.

    ``result`` is the dict produced by ``experiment.run_compare``; ``net_eval``
    maps a 1-D array of inputs to network outputs for the dense overlay.
    """
    plt = _plt()
    grid = result["grid"]
    target = result["target"]
    dense = np.linspace(grid[0], grid[-1], 400)

    fig, (ax_f, ax_F) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    ax_f.plot(target.xs, target.fs, "o", ms=3.5, label="samples")
    ax_f.plot(dense, net_eval(dense), lw=1.2, label="network")
    if target.f_true is not None:
        ax_f.plot(dense, target.f_true(dense), lw=0.8, ls="--", label="integrand")
    ax_f.set_ylabel("f(x)")
    ax_f.legend(fontsize=8)
    ax_f.grid(alpha=0.3)

    ax_F.plot(grid, result["F_true"], lw=1.6, label="true integral")
    for name, curve in result["curves"].items():
        ax_F.plot(grid, curve, lw=1.0, ls="--", label=name)
    ax_F.set_xlabel("x")
    ax_F.set_ylabel("integral from a")
    ax_F.legend(fontsize=8)
    ax_F.grid(alpha=0.3)
    fig.tight_layout()
    approx_path = os.path.join(out_dir, "approximation.png")
    fig.savefig(approx_path, dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, err in result["errors"].items():
        ax.semilogy(grid, np.maximum(err, 1e-18), lw=1.1, label=name)
    ax.set_xlabel("x")
    ax.set_ylabel("|true - estimate|")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    error_path = os.path.join(out_dir, "error_curve.png")
    fig.savefig(error_path, dpi=150)
    plt.close(fig)
    return approx_path, error_path

"""Figure rendering for the CLI report paths (PNG files next to the CSV output)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_norm_series(times, columns: dict, path, title: str, fits: dict | None = None):
    """Log-log decay curves, one line per column, with fitted slopes in the legend."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for key, values in columns.items():
        label = key
        if fits and key in fits:
            label = f"{key}  (slope {fits[key]:+.3f})"
        positive = np.asarray(values) > 0
        ax.loglog(1.0 + np.asarray(times)[positive], np.asarray(values)[positive],
                  label=label, lw=1.2)
    ax.set_xlabel("1 + t")
    ax.set_ylabel("norm")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_spectrum(radii, eigensets, path):
    """Real and imaginary parts of the six branches versus radius."""
    fig, (ax_re, ax_im) = plt.subplots(1, 2, figsize=(10, 4.2))
    radii = np.asarray(radii)
    lam = np.array([es.lambdas for es in eigensets])
    labels = ("relaxation", "acoustic+", "acoustic-", "thermal")
    for j, lab in enumerate(labels):
        ax_re.semilogx(radii, lam[:, j].real, label=lab, lw=1.2)
        ax_im.semilogx(radii, lam[:, j].imag, label=lab, lw=1.2)
    ax_re.semilogx(radii, [es.lambda1 for es in eigensets], "--", label="transverse w", lw=1)
    ax_re.semilogx(radii, [es.lambda2 for es in eigensets], ":", label="transverse flux", lw=1)
    ax_re.set_xlabel("|xi|")
    ax_re.set_ylabel("Re lambda")
    ax_re.set_yscale("symlog", linthresh=1e-4)
    ax_im.set_xlabel("|xi|")
    ax_im.set_ylabel("Im lambda")
    ax_im.set_yscale("symlog", linthresh=1e-4)
    ax_re.legend(fontsize=7)
    ax_re.grid(alpha=0.3)
    ax_im.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_monitors(arrays: dict, path):
    """Monitor panels: conservation drift, entropy, Sobolev norm, positivity."""
    fig, axes = plt.subplots(2, 2, figsize=(9.5, 6.5))
    t = arrays["time"]
    axes[0, 0].plot(t, arrays["mass"] - arrays["mass"][0], label="mass drift")
    axes[0, 0].plot(t, arrays["energy_identity"] - arrays["energy_identity"][0],
                    label="energy drift")
    axes[0, 0].set_ylabel("drift")
    axes[0, 0].legend(fontsize=8)
    axes[0, 1].plot(t, arrays["entropy"])
    axes[0, 1].set_ylabel("entropy functional")
    axes[1, 0].semilogy(t, arrays["hs_norm"])
    axes[1, 0].set_ylabel("H^s norm")
    axes[1, 1].plot(t, arrays["min_density_factor"], label="min 1+n")
    axes[1, 1].plot(t, arrays["min_temperature_factor"], label="min temp factor")
    axes[1, 1].legend(fontsize=8)
    for ax in axes.flat:
        ax.set_xlabel("t")
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_compensated(times, compensated: dict, path, title: str):
    """Rate-compensated norms; boundedness above and below shows optimality."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for key, values in compensated.items():
        ax.semilogx(1.0 + np.asarray(times), values, label=key, lw=1.2)
    ax.set_xlabel("1 + t")
    ax.set_ylabel("compensated norm")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

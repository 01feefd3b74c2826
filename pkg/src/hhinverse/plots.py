"""Figures rendered next to the CSV artifacts."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PARAM_LABELS = {
    "conductances": (r"$G_{Na}$ [mS/cm$^2$]", r"$G_K$ [mS/cm$^2$]", r"$G_L$ [mS/cm$^2$]"),
    "exponents": ("a", "b", "c"),
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_trajectory(traj, path):
    fig, (ax_v, ax_g) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax_v.plot(traj.times, traj.v, color="tab:red")
    ax_v.set_ylabel("V [mV]")
    for name, color in (("m", "tab:blue"), ("n", "tab:green"), ("h", "tab:orange")):
        ax_g.plot(traj.times, getattr(traj, name), color=color, label=name)
    ax_g.set_xlabel("t [ms]")
    ax_g.set_ylabel("gate")
    ax_g.legend(loc="best")
    return _save(fig, path)


def plot_observation(times, clean, noisy, epsilon, path):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(times, noisy, color="tab:blue", lw=0.8, label=r"$V^\delta$")
    ax.plot(times, clean, color="tab:red", lw=1.5, label="V")
    ax.set_xlabel("t [ms]")
    ax.set_ylabel("V [mV]")
    ax.set_title(f"epsilon = {100 * epsilon:g}%")
    ax.legend(loc="best")
    return _save(fig, path)


def plot_iterates(result, truth, path):
    """One panel per component: iterate (blue) against the true value (red)."""
    k = np.arange(1, result.k_star + 1)
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.8))
    for i, ax in enumerate(axes):
        ax.plot(k, result.iterates[:, i], color="tab:blue")
        if truth is not None:
            ax.axhline(truth.values[i], color="tab:red")
        ax.set_xlabel("k")
        ax.set_ylabel(PARAM_LABELS[result.kind][i])
        ax.set_title("ABC"[i], loc="left")
    return _save(fig, path)


def plot_convergence(result, path):
    k = np.arange(1, result.k_star + 1)
    ncols = 1 if result.errors is None else 2
    fig, axes = plt.subplots(1, ncols, figsize=(5 * ncols + 1, 3.8), squeeze=False)
    ax = axes[0, 0]
    ax.semilogy(k, result.residuals, color="tab:blue")
    if result.delta > 0:
        ax.axhline(result.tau * result.delta, color="tab:red", ls="--", label=r"$\tau\delta$")
        ax.legend(loc="best")
    ax.set_xlabel("k")
    ax.set_ylabel("residual")
    ax.set_title("A", loc="left")
    if result.errors is not None:
        ax = axes[0, 1]
        ax.semilogy(k, np.maximum(result.errors, 1e-12), color="tab:blue")
        ax.set_xlabel("k")
        ax.set_ylabel("error [%]")
        ax.set_title("B", loc="left")
    return _save(fig, path)


def plot_table(rows, path):
    ok = [r for r in rows if r.get("status") == "ok"]
    fig, ax = plt.subplots(figsize=(6, 4))
    if ok:
        eps = np.array([100 * r["epsilon"] for r in ok])
        ax.loglog(eps, [max(r["error"], 1e-12) for r in ok], "o-", label="error [%]")
        ax.loglog(eps, [r["residual"] for r in ok], "s--", label="residual")
        ax.legend(loc="best")
    ax.set_xlabel("epsilon [%]")
    return _save(fig, path)

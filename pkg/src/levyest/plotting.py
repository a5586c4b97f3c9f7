"""Static figures for the CLI reports (matplotlib, Agg backend).

Each function also has a data-file counterpart written by the CLI, so the
figures can be regenerated with gnuplot from the CSV/.dat output alone.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SAVE = {"dpi": 120, "metadata": {"Software": None}}


def _save(fig, path):
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, **_SAVE)
    plt.close(fig)
    return path


def estimate_figure(path, x, estimate, truth=None, title=""):
    """Estimated Levy density (step curve) against the true one."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, estimate, lw=1.2, label="estimate")
    if truth is not None:
        ax.plot(x, truth, "k--", lw=1.0, label="true density")
    ax.set_xlabel("x")
    ax.set_ylabel("Levy density")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def risk_figure(path, dims, risk, risk_se, bias_sq, var_analytic, ppe_risk=None):
    fig, ax = plt.subplots(figsize=(6, 4))
    dims = np.asarray(dims)
    ax.errorbar(dims, risk, yerr=2 * np.asarray(risk_se), fmt="o", ms=3, label="MC risk (2 SE)")
    ax.plot(dims, bias_sq, lw=1, label="bias^2")
    ax.plot(dims, var_analytic, lw=1, label="variance term")
    if ppe_risk is not None:
        ax.axhline(ppe_risk, color="k", ls=":", label="penalized estimator")
    ax.set_xlabel("m")
    ax.set_ylabel("L2 risk")
    ax.set_yscale("log")
    ax.legend()
    return _save(fig, path)


def rate_figure(path, horizons, risk, risk_se, slope, intercept):
    fig, ax = plt.subplots(figsize=(5, 4))
    horizons = np.asarray(horizons, dtype=float)
    ax.errorbar(horizons, risk, yerr=2 * np.asarray(risk_se), fmt="o", label="MC risk (2 SE)")
    ax.plot(horizons, np.exp(intercept) * horizons**slope, "k--", label=f"slope {slope:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("T")
    ax.set_ylabel("risk")
    ax.legend()
    return _save(fig, path)


def table1_figure(path, rows):
    """Medians with interquartile bars of each estimator, one panel per parameter."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharex=True)
    for ax, par in zip(axes, ("alpha", "beta")):
        for mode in sorted({r.sim_mode for r in rows}):
            sub = [r for r in rows if r.sim_mode == mode]
            dts = np.array([r.dt for r in sub])
            for method, marker in (("ppe_lse", "o"), ("mle", "s")):
                med, lo, hi = (np.array([r.stats[f"{method}_{par}"][j] for r in sub]) for j in range(3))
                ax.errorbar(dts, med, yerr=[med - lo, hi - med], fmt=marker + "-", ms=4, capsize=2,
                            label=f"{method} ({mode})")
        ax.axhline(1.0, color="k", lw=0.6)
        ax.set_xscale("log")
        ax.set_xlabel("dt")
        ax.set_title(par)
    axes[0].legend(fontsize=7)
    return _save(fig, path)


def gnuplot_overlay_script(datafile: str) -> str:
    return (
        "set datafile separator ','\n"
        "set key top right\n"
        "set xlabel 'x'\n"
        "set ylabel 'Levy density'\n"
        f"plot '{datafile}' every ::1 using 1:2 with steps title 'estimate', \\\n"
        f"     '{datafile}' every ::1 using 1:3 with lines dt 2 title 'true density'\n"
    )

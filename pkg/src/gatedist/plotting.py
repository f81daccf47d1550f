"""Figures for the experiment outputs. Needs matplotlib (the ``plot`` extra)."""

from __future__ import annotations

import math

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 11, "axes.labelsize": 12, "savefig.dpi": 150})
    return plt


def _col(rows, key):
    return np.array([float(r[key]) if r[key] not in (None, "") else math.nan for r in rows])


def plot_scan2q(rows, path):
    """Colour map of K_D over the (e_p, g_t) plane."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    sc = ax.scatter(_col(rows, "e_p"), _col(rows, "g_t"), c=_col(rows, "kd"), s=12, cmap="viridis")
    fig.colorbar(sc, ax=ax, label=r"$K_D(U)$")
    ax.set_xlabel(r"$e_p(U)$")
    ax.set_ylabel(r"$g_t(U)$")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_ensemble(rows, path, d=3):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for family, marker in (("diagonal", "o"), ("cue", "s"), ("near_dual", "^"), ("block", "x")):
        sel = [r for r in rows if r["family"] == family and not r.get("error")]
        if sel:
            ax.scatter(_col(sel, "kd_star2"), _col(sel, "kd2"), s=6, marker=marker, label=family, alpha=0.6)
    top = 2 * d * d - 2 * d
    ax.axhline(top, color="k", lw=1)
    lim = np.linspace(0, top, 2)
    ax.plot(lim, lim, "k--", lw=1)
    ax.set_xlabel(r"$K_D^{*2}(U)$")
    ax.set_ylabel(r"$K_D^2(U)$")
    ax.legend(loc="lower right", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_ubb(step_rows, path, d=3):
    """Linear entropy per step with the gap to its maximum in an inset."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    inset = ax.inset_axes([0.45, 0.12, 0.5, 0.45])
    by_sample = {}
    for r in step_rows:
        by_sample.setdefault(r["sample"], []).append(r)
    for rows in by_sample.values():
        step = _col(rows, "step")
        ax.plot(step, _col(rows, "linear_entropy"), lw=0.6)
        delta = np.clip(_col(rows, "delta"), 1e-17, None)
        inset.semilogy(step, delta, lw=0.6)
    ax.axhline(1 - 1 / d, color="k", lw=1)
    ax.set_xscale("symlog")
    ax.set_xlabel("n")
    ax.set_ylabel(r"$1-\mathrm{tr}\,\rho_n^2$")
    inset.set_xscale("symlog")
    inset.set_ylabel(r"$\Delta_n$", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)

"""Figure renderers.

Each renderer consumes documented cavity-vacua CSV artifacts found in a data
directory and writes a single image. Expected inputs:

  fig2a  polariton.csv        bright polariton branches vs plasma frequency
  fig2b  polariton.csv        dark band and instability region
  fig3   phase_diagram.csv    photon number + phase regions on (alpha, eps)
  fig4   sweep.csv            transition cuts: <a>, spin variance, <u^2>
  fig5   sweep*.csv           photon number vs coupling, one curve per file
  fig6   adiabatic*.csv       field-quadrature potential V(X)
  fig7   coupling.csv         dipole-dipole coupling matrix heat map

Renderers return a small metadata dict used by the CLI and the tests.
"""

import glob
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import FigplotsError, read_table

GROUND_REQUIRED = ["g", "alpha", "epsilon", "N", "photon_number", "mean_a",
                   "delta_Sx2", "u2"]

PHASE_COLORS = {"normal": "#c7d8ef", "superradiant": "#f2b8a8",
                "subradiant": "#bfe3bf"}


def _save(fig, out_path: str) -> None:
    fig.savefig(out_path, dpi=160, bbox_inches="tight")
    plt.close(fig)


def fig2a(data_dir: str, out_path: str) -> dict:
    t = read_table(os.path.join(data_dir, "polariton.csv"),
                   ["omega_p", "Omega_plus", "Omega_minus"])
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.plot(t["omega_p"], t["Omega_plus"], color="C3", label=r"$\Omega_+$")
    ax.plot(t["omega_p"], t["Omega_minus"], color="C0", label=r"$\Omega_-$")
    ax.set_xlabel(r"$\omega_p/\omega_c$")
    ax.set_ylabel(r"$\Omega_\pm/\omega_c$")
    ax.legend(frameon=False)
    _save(fig, out_path)
    return {"rows": len(t["omega_p"])}


def fig2b(data_dir: str, out_path: str) -> dict:
    t = read_table(os.path.join(data_dir, "polariton.csv"),
                   ["omega_p", "dark_min", "dark_max", "unstable_count"])
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    good = np.isfinite(t["dark_min"]) & np.isfinite(t["dark_max"])
    if good.any():
        ax.fill_between(t["omega_p"][good], t["dark_min"][good],
                        t["dark_max"][good], color="0.7", alpha=0.6,
                        label="dark band")
    unstable = t["unstable_count"] > 0
    if unstable.any():
        ax.axvspan(t["omega_p"][unstable].min(), t["omega_p"].max(),
                   color="C3", alpha=0.15, label="unstable")
    ax.set_xlabel(r"$\omega_p/\omega_c$")
    ax.set_ylabel(r"$\omega_n/\omega_c$")
    ax.legend(frameon=False, loc="upper left")
    _save(fig, out_path)
    return {"rows": len(t["omega_p"]), "unstable_rows": int(unstable.sum())}


def fig3(data_dir: str, out_path: str) -> dict:
    t = read_table(os.path.join(data_dir, "phase_diagram.csv"),
                   ["alpha", "epsilon", "photon_number", "phase"])
    alphas = np.unique(t["alpha"])
    epss = np.unique(t["epsilon"])
    nph = np.full((len(epss), len(alphas)), np.nan)
    phase_idx = np.full_like(nph, np.nan)
    order = ["normal", "superradiant", "subradiant"]
    for a, e, n, ph in zip(t["alpha"], t["epsilon"], t["photon_number"],
                           t["phase"]):
        i = np.searchsorted(epss, e)
        j = np.searchsorted(alphas, a)
        nph[i, j] = n
        phase_idx[i, j] = order.index(ph) if ph in order else np.nan

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.2, 3.2))
    m = ax1.pcolormesh(alphas, epss, np.log10(nph + 1e-6), shading="nearest",
                       cmap="viridis")
    fig.colorbar(m, ax=ax1, label=r"$\log_{10}\langle a^\dagger a\rangle$")
    ax1.set_xlabel(r"$\alpha$")
    ax1.set_ylabel(r"$\varepsilon$")

    cmap = matplotlib.colors.ListedColormap([PHASE_COLORS[p] for p in order])
    ax2.pcolormesh(alphas, epss, phase_idx, shading="nearest", cmap=cmap,
                   vmin=-0.5, vmax=2.5)
    handles = [plt.Rectangle((0, 0), 1, 1, color=PHASE_COLORS[p])
               for p in order]
    ax2.legend(handles, order, frameon=False, fontsize=7, loc="lower right")
    ax2.set_xlabel(r"$\alpha$")
    ax2.set_ylabel(r"$\varepsilon$")
    _save(fig, out_path)
    present = sorted(set(t["phase"]) & set(order))
    return {"rows": len(t["alpha"]), "phases": present,
            "n_regions": len(present)}


def fig4(data_dir: str, out_path: str) -> dict:
    t = read_table(os.path.join(data_dir, "sweep.csv"), GROUND_REQUIRED)
    g = t["g"]
    kink = float(g[int(np.argmax(t["delta_Sx2"]))])
    fig, axes = plt.subplots(3, 1, figsize=(3.6, 6.4), sharex=True)
    axes[0].plot(g, np.abs(t["mean_a"]), color="C0")
    axes[0].set_ylabel(r"$|\langle a\rangle|$")
    axes[1].plot(g, t["delta_Sx2"], color="C1")
    axes[1].set_ylabel(r"$\Delta S_x^2$")
    axes[2].plot(g, t["u2"], color="C2")
    axes[2].axhline(math.sqrt(11.0), ls=":", color="0.4",
                    label=r"$\sqrt{11}$")
    axes[2].set_ylabel(r"$\langle \tilde U^2\rangle/U_0^2$")
    axes[2].set_xlabel(r"$g/\omega_c$")
    axes[2].legend(frameon=False)
    for ax in axes:
        ax.axvline(kink, ls="--", color="0.6", lw=0.8)
    _save(fig, out_path)
    return {"rows": len(g), "g_peak": kink}


def fig5(data_dir: str, out_path: str) -> dict:
    paths = sorted(glob.glob(os.path.join(data_dir, "sweep*.csv")))
    if not paths:
        raise FigplotsError(f"{data_dir}: no sweep*.csv files")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    curves = 0
    for path in paths:
        t = read_table(path, ["alpha", "photon_number", "N"])
        n = int(t["N"][0])
        ax.semilogy(t["alpha"], np.maximum(t["photon_number"], 1e-12),
                    marker="o", ms=3, label=f"N={n}")
        curves += 1
    ax.set_xlabel(r"$\alpha$")
    ax.set_ylabel(r"$\langle a^\dagger a\rangle$")
    ax.legend(frameon=False)
    _save(fig, out_path)
    return {"curves": curves}


def fig6(data_dir: str, out_path: str) -> dict:
    paths = sorted(glob.glob(os.path.join(data_dir, "adiabatic*.csv")))
    paths = [p for p in paths if not p.endswith("_manifest.json")]
    if not paths:
        raise FigplotsError(f"{data_dir}: no adiabatic*.csv files")
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for path in paths:
        t = read_table(path, ["x", "V"])
        label = os.path.splitext(os.path.basename(path))[0]
        ax.plot(t["x"], t["V"] - t["V"].min(), label=label)
    ax.set_xlabel(r"$X$")
    ax.set_ylabel(r"$V(X) - \min V$")
    if len(paths) > 1:
        ax.legend(frameon=False, fontsize=7)
    _save(fig, out_path)
    return {"curves": len(paths)}


def fig7(data_dir: str, out_path: str) -> dict:
    t = read_table(os.path.join(data_dir, "coupling.csv"),
                   ["row", "col", "value"])
    n = int(t["row"].max()) + 1
    D = np.zeros((n, n))
    D[t["row"].astype(int), t["col"].astype(int)] = t["value"]
    fig, ax = plt.subplots(figsize=(3.6, 3.2))
    lim = np.abs(D).max() or 1.0
    m = ax.imshow(D, cmap="RdBu_r", vmin=-lim, vmax=lim)
    fig.colorbar(m, ax=ax, label=r"$D_{ij}$")
    ax.set_xlabel("j")
    ax.set_ylabel("i")
    _save(fig, out_path)
    return {"n": n}


FIGURES = {"fig2a": fig2a, "fig2b": fig2b, "fig3": fig3, "fig4": fig4,
           "fig5": fig5, "fig6": fig6, "fig7": fig7}


def render(fig_id: str, data_dir: str, out_path: str) -> dict:
    if fig_id not in FIGURES:
        raise FigplotsError(
            f"unknown figure id {fig_id!r}; choose from {sorted(FIGURES)}")
    return FIGURES[fig_id](data_dir, out_path)

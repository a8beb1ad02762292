"""Figure rendering for comparison reports.

Only the report path draws; everything else in the package emits CSV
and leaves presentation to the caller.  Uses the Agg backend so runs
never need a display.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

LABELS = {
    "csm": "spectral (pi*hbar*drho)",
    "semi": "semiclassical (dT)",
    "oracle": "scattering (pi*hbar*drho)",
}


def _shade_excluded(ax, energies, valid):
    # mark the stretches dropped from the statistics
    bad = ~valid
    if not bad.any():
        return
    edges = np.flatnonzero(np.diff(bad.astype(int)))
    starts = [0] if bad[0] else []
    starts += list(edges[~bad[edges]] + 1)
    stops = list(edges[bad[edges]])
    if bad[-1]:
        stops.append(len(bad) - 1)
    for s, e in zip(starts, stops):
        ax.axvspan(energies[s], energies[e], color="0.85", zorder=0)


def render_comparison(report, outdir) -> list:
    """Write overlay and deviation figures; returns the file paths."""
    E = report.energies
    written = []

    fig, axes = plt.subplots(2, 1, figsize=(7.0, 6.4), sharex=True)
    for ax, part in zip(axes, ("real", "imag")):
        take = (lambda z: z.real) if part == "real" else (lambda z: z.imag)
        _shade_excluded(ax, E, report.valid)
        ax.plot(E, take(report.csm), lw=1.0, label=LABELS["csm"])
        ax.plot(E, take(report.semi), lw=1.0, ls="--", label=LABELS["semi"])
        if report.oracle is not None:
            ax.plot(E, take(report.oracle), lw=0.8, ls=":", label=LABELS["oracle"])
        ax.set_ylabel(f"{part} part")
        ax.legend(loc="best", fontsize=8)
    axes[1].set_xlabel("E")
    fig.tight_layout()
    path = os.path.join(outdir, "comparison.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    _shade_excluded(ax, E, report.valid)
    v = report.valid
    ax.semilogy(E[v], np.maximum(report.dev_re[v], 1e-12), ".", ms=2, label="real")
    ax.semilogy(E[v], np.maximum(report.dev_im[v], 1e-12), ".", ms=2, label="imag")
    ax.axhline(report.threshold, color="k", lw=0.8, ls="--")
    ax.set_xlabel("E")
    ax.set_ylabel("relative deviation")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    path = os.path.join(outdir, "deviation.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    written.append(path)
    return written

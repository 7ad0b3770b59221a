"""Figure rendering for the CLI report paths (PNG files next to the CSVs)."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["trajectory_figure", "scan_figure", "attractor_figure"]

_FIGSIZE = (6.4, 4.2)


def trajectory_figure(record, path) -> None:
    """Energy budget and zonal split along a trajectory."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    t = record.times
    ax1.plot(t, record.energy, label=r"$|\omega|^2$")
    ax1.plot(t, record.enstrophy, label=r"$|\nabla\omega|^2$")
    ax1.set_ylabel("squared norms")
    ax1.legend(frameon=False)
    ax1.grid(alpha=0.3)
    ax2.semilogy(t, np.maximum(record.zonal_energy, 1e-300),
                 label=r"zonal $|\bar\omega|^2$")
    ax2.semilogy(t, np.maximum(record.nonzonal_energy, 1e-300),
                 label=r"non-zonal $|\tilde\omega|^2$")
    ax2.set_xlabel("t")
    ax2.set_ylabel("energy split")
    ax2.legend(frameon=False)
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def scan_figure(scan, path) -> None:
    """Log-log tail statistic against epsilon with the fitted power law."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    eps = [e for e in scan.epsilons if math.isfinite(e)]
    sup = [s for e, s in zip(scan.epsilons, scan.sup_tail)
           if math.isfinite(e)]
    ax.loglog(eps, sup, "o", label=r"sup tail $|\tilde\omega|^2$")
    xs = np.array(sorted(eps))
    ax.loglog(xs, np.exp(scan.intercept) * xs ** scan.slope, "-",
              label=f"fit: slope {scan.slope:.3f} ($r^2$={scan.r_squared:.3f})")
    ctrl = [s for e, s in zip(scan.epsilons, scan.sup_tail)
            if math.isinf(e)]
    if ctrl:
        ax.axhline(ctrl[0], color="gray", ls="--", lw=1,
                   label=r"$\varepsilon=\infty$ control")
    ax.set_xlabel(r"$\varepsilon$")
    ax.set_ylabel(r"sup tail $|\tilde\omega|^2$")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def attractor_figure(times, distances, threshold, path) -> None:
    """Distance between the two trajectories against time."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.semilogy(times, np.maximum(distances, 1e-300), label=r"$L^2$ distance")
    ax.axhline(threshold, color="gray", ls="--", lw=1,
               label=f"threshold {threshold:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("distance")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

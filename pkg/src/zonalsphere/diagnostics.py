"""Scalar functionals of states and trajectories: Sobolev norms, the
zonal/non-zonal energy split, Grashof number, the attractor-dimension
bound, tail statistics of trajectories, and the epsilon-scaling fit."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .operators import eigenvalue_array
from .solver import TrajectoryRecord
from .spharm import SpectralField

__all__ = [
    "ScanResult",
    "sobolev_norm",
    "zonal_energy_split",
    "grashof",
    "attractor_dim_bound",
    "tail_window",
    "tail_statistics",
    "fit_epsilon_slope",
    "make_scan_result",
    "write_scan_csv",
    "write_scan_sidecar",
]


def sobolev_norm(f: SpectralField, s: float = 0.0) -> float:
    """H^s norm (sum (k(k+1))^s |f_k|^2)^{1/2} over zero-mean content.

    Non-integer s uses the same spectral formula (the interpolation-space
    norm).  The constant mode is excluded: the homogeneous spaces are
    defined for zero-integral fields.
    """
    K = f.truncation
    p = np.abs(f.coeffs[1:]) ** 2
    if not p.size:
        return 0.0
    lam = eigenvalue_array(K)[1:]
    weights = lam ** s if s != 0.0 else np.ones_like(lam)
    return float(math.sqrt(float((weights[:, None] * p).sum())))


def zonal_energy_split(f: SpectralField) -> tuple[float, float]:
    """(|w-bar|^2, |w~|^2); the sum equals |w|^2 exactly by coefficient
    partition."""
    K = f.truncation
    p = np.abs(f.coeffs) ** 2
    zonal = float(p[:, K].sum())
    return zonal, float(p.sum() - zonal)


def grashof(f: SpectralField, mu: float) -> float:
    """G = |grad^{-1} f| / mu^2 for zero-mean steady forcing."""
    if not mu > 0:
        raise ValueError("viscosity must be positive")
    if abs(f.coeffs[0, f.truncation]) > 1e-13:
        raise ValueError("Grashof number requires zero-mean forcing")
    p = np.abs(f.coeffs[1:]) ** 2
    if not p.size:
        return 0.0
    lam = eigenvalue_array(f.truncation)[1:]
    return float(math.sqrt(float((p / lam[:, None]).sum())) / mu ** 2)


def attractor_dim_bound(G: float, c_S: float = 1.0) -> float:
    """c_S G^{2/3} (1 + log G)^{1/3}; for G < 1 the G = 1 value is
    reported (the log factor would turn negative, and that regime is the
    trivial single-steady-state one anyway)."""
    g = max(float(G), 1.0)
    return c_S * g ** (2.0 / 3.0) * (1.0 + math.log(g)) ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# Trajectory tails and the epsilon-scaling fit
# ---------------------------------------------------------------------------

def tail_window(times: np.ndarray, mu: float) -> tuple[float, float, float]:
    """(start, end, transient_cutoff) of the tail window: the last half of
    the trajectory remaining after a transient of max(10, 5/(2 mu)) time
    units; by construction it lies entirely after the cutoff."""
    if len(times) < 2:
        raise ValueError("trajectory too short for tail statistics")
    t0, t1 = float(times[0]), float(times[-1])
    cutoff = max(10.0, 5.0 / (mu * 2.0))
    start = cutoff + 0.5 * (t1 - cutoff)
    if start >= t1 or t1 <= cutoff:
        raise ValueError(
            f"trajectory ends at t={t1:g}, inside the transient cutoff "
            f"{cutoff:g}; extend t_end")
    return max(start, t0), t1, cutoff


def tail_statistics(record: TrajectoryRecord, mu: float
                    ) -> tuple[float, float, tuple[float, float, float]]:
    """(sup of |w~|^2 over the tail window, time-averaged mu |grad w~|^2,
    window)."""
    start, end, cutoff = tail_window(record.times, mu)
    sel = (record.times >= start) & (record.times <= end)
    if not np.any(sel):
        raise ValueError("no records inside the tail window")
    sup = float(np.max(record.nonzonal_energy[sel]))
    avg = float(mu * np.mean(record.h1_nonzonal[sel]))
    return sup, avg, (start, end, cutoff)


@dataclass
class ScanResult:
    """Per-epsilon tail statistics and the fitted log-log scaling."""

    epsilons: tuple
    sup_tail: tuple
    avg_mu_grad: tuple
    included: tuple          # finite epsilons enter the fit; inf controls not
    slope: float
    intercept: float
    r_squared: float
    window_start: float
    window_end: float
    transient_cutoff: float


def fit_epsilon_slope(scan) -> tuple[float, float]:
    """Least-squares slope of ln(sup tail |w~|^2) against ln(epsilon) and
    the fit's r^2.  Accepts a ScanResult or an (epsilons, sups) pair;
    infinite epsilons (control runs) are excluded."""
    if isinstance(scan, ScanResult):
        eps, sups = scan.epsilons, scan.sup_tail
    else:
        eps, sups = scan
    pairs = [(e, s) for e, s in zip(eps, sups) if math.isfinite(e)]
    if len({e for e, _ in pairs}) < 2:
        raise ValueError("epsilon scan is degenerate: need distinct values")
    if len(pairs) < 3:
        raise ValueError("need at least 3 finite epsilon values")
    x = np.log([e for e, _ in pairs])
    y = np.log([s for _, s in pairs])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res < 1e-28 else 1.0 - ss_res / ss_tot
    return float(coef[0]), float(r2)


def make_scan_result(epsilons, sups, avgs, window: tuple[float, float, float]
                     ) -> ScanResult:
    slope, r2 = fit_epsilon_slope((epsilons, sups))
    finite = [(e, s) for e, s in zip(epsilons, sups) if math.isfinite(e)]
    x = np.log([e for e, _ in finite])
    y = np.log([s for _, s in finite])
    intercept = float(np.mean(y) - slope * np.mean(x))
    return ScanResult(
        epsilons=tuple(epsilons), sup_tail=tuple(sups),
        avg_mu_grad=tuple(avgs),
        included=tuple(math.isfinite(e) for e in epsilons),
        slope=slope, intercept=intercept, r_squared=r2,
        window_start=window[0], window_end=window[1],
        transient_cutoff=window[2])


def write_scan_csv(scan: ScanResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epsilon,sup_tail_nonzonal_enstrophy,avg_mu_grad_nonzonal,"
                 "slope_included\n")
        for e, s, a, inc in zip(scan.epsilons, scan.sup_tail,
                                scan.avg_mu_grad, scan.included):
            eps_s = "inf" if math.isinf(e) else f"{e:.17g}"
            fh.write(f"{eps_s},{s:.17g},{a:.17g},"
                     f"{'true' if inc else 'false'}\n")


def write_scan_sidecar(scan: ScanResult, path) -> None:
    payload = {
        "slope": scan.slope,
        "intercept": scan.intercept,
        "r_squared": scan.r_squared,
        "upper_bound_constant": max(
            (s / e for e, s in zip(scan.epsilons, scan.sup_tail)
             if math.isfinite(e)), default=float("nan")),
        "window": {"start": scan.window_start, "end": scan.window_end,
                   "transient_cutoff": scan.transient_cutoff},
        "epsilons": ["inf" if math.isinf(e) else e for e in scan.epsilons],
        "sup_tail_nonzonal_enstrophy": list(scan.sup_tail),
        "avg_mu_grad_nonzonal": list(scan.avg_mu_grad),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

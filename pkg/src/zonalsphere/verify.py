"""Property-check suite: every analytic identity the machinery must
satisfy, each checked against an independent evaluation route and
reported with its worst residual.  The CLI `verify` subcommand runs this
and gates on the outcome."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .spharm import (GridField, SpectralField, WaveVector, analyze,
                     enforce_real_symmetry, make_grid, quadrature_integral,
                     real_symmetry_defect, synthesize)
from .triads import (JACOBIAN_SIGN, LEMMA_SIGN, build_table,
                     calibrate_jacobian_sign, calibrate_lemma_sign,
                     jacobian_coeff_quadrature)

__all__ = ["CheckResult", "run_suite", "random_real_field"]


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    detail: str = ""


class _Suite:
    def __init__(self):
        self.results: list[CheckResult] = []

    def add(self, name: str, residual: float, tol: float, detail: str = ""):
        self.results.append(CheckResult(name, float(residual), tol,
                                        bool(residual <= tol), detail))


def random_real_field(K: int, rng, zero_mean: bool = True) -> SpectralField:
    """Real-symmetric field with O(1) coefficients over the triangle."""
    c = rng.standard_normal((K + 1, 2 * K + 1)) \
        + 1j * rng.standard_normal((K + 1, 2 * K + 1))
    mask = np.abs(np.arange(-K, K + 1))[None, :] <= np.arange(K + 1)[:, None]
    f = enforce_real_symmetry(SpectralField(K, c * mask, False))
    if zero_mean:
        f.coeffs[0, K] = 0.0
    return f


def _sobolev_sq(f: SpectralField, s: int) -> float:
    lam = ops.eigenvalue_array(f.truncation) ** s
    return float(np.sum(lam[:, None] * np.abs(f.coeffs) ** 2))


def _table_lookup(table) -> dict:
    out = {}
    for i in range(len(table)):
        key = (int(table.j_deg[i]), int(table.j_ord[i]),
               int(table.k_deg[i]), int(table.k_ord[i]),
               int(table.l_deg[i]), int(table.l_ord[i]))
        out[key] = i
    return out


def _check_transforms(s: _Suite, K: int, rng) -> None:
    g = make_grid(K)
    gram_defect = 0.0
    for k in range(K + 1):
        for m in range(-k, k + 1):
            f = SpectralField.zeros(K)
            f.coeffs[k, m + K] = 1.0
            back = analyze(synthesize(f, g), K)
            d = back.coeffs.copy()
            d[k, m + K] -= 1.0
            gram_defect = max(gram_defect, float(np.max(np.abs(d))))
    s.add("orthonormality_gram_identity", gram_defect, 1e-12,
          f"all {(K + 1) ** 2} basis modes")

    worst_rt = 0.0
    worst_p = 0.0
    for _ in range(5):
        f = random_real_field(K, rng, zero_mean=False)
        u = synthesize(f, g)
        back = analyze(u, K)
        worst_rt = max(worst_rt, float(np.max(np.abs(back.coeffs - f.coeffs))),
                       real_symmetry_defect(back))
        grid_sq = quadrature_integral(GridField(np.abs(u.values) ** 2, g)).real
        spec_sq = float(np.sum(np.abs(f.coeffs) ** 2))
        worst_p = max(worst_p, abs(grid_sq - spec_sq) / spec_sq)
    s.add("transform_round_trip", worst_rt, 1e-12)
    s.add("parseval_relative", worst_p, 1e-12)


def _check_oracle(s: _Suite, table, lookup: dict, K: int, rng) -> None:
    """Closed-form J (as stored) against the grid-quadrature oracle over
    every order-matching triple with degrees <= min(K, 8); combinations
    absent from the table must integrate to zero."""
    Ko = min(K, 8)
    worst = 0.0
    count = 0
    for jd in range(Ko + 1):
        for kd in range(Ko + 1):
            for ld in range(Ko + 1):
                for jo in range(-jd, jd + 1):
                    for ko in range(-kd, kd + 1):
                        lo = jo + ko
                        if abs(lo) > ld:
                            continue
                        idx = lookup.get((jd, jo, kd, ko, ld, lo))
                        fval = complex(table.J[idx]) if idx is not None else 0j
                        qval = jacobian_coeff_quadrature(
                            WaveVector(jd, jo), WaveVector(kd, ko),
                            WaveVector(ld, lo))
                        worst = max(worst, abs(fval - qval))
                        count += 1
    s.add("oracle_jacobian_agreement", worst, 1e-10,
          f"{count} order-matching triads, degrees <= {Ko}")

    worst_0 = 0.0
    for _ in range(50):
        jd = int(rng.integers(1, Ko + 1))
        kd = int(rng.integers(1, Ko + 1))
        ld = int(rng.integers(1, Ko + 1))
        jo = int(rng.integers(-jd, jd + 1))
        ko = int(rng.integers(-kd, kd + 1))
        lo_all = [m for m in range(-ld, ld + 1) if m != jo + ko]
        if not lo_all:
            continue
        lo = lo_all[int(rng.integers(0, len(lo_all)))]
        q = jacobian_coeff_quadrature(WaveVector(jd, jo), WaveVector(kd, ko),
                                      WaveVector(ld, lo))
        worst_0 = max(worst_0, abs(q))
    s.add("oracle_order_selection_zero", worst_0, 1e-12,
          "50 order-violating samples")

    worst_a = 0.0
    for key, i in lookup.items():
        jd, jo, kd, ko, ld, lo = key
        i_sw = lookup.get((kd, ko, jd, jo, ld, lo))
        J_sw = complex(table.J[i_sw]) if i_sw is not None else 0j
        worst_a = max(worst_a, abs(complex(table.J[i]) + J_sw))
    s.add("jacobian_antisymmetry", worst_a, 1e-12,
          f"{len(lookup)} stored triads")


def _check_lemma(s: _Suite, table, lookup: dict) -> None:
    """Cancellation identities on lhat = 0 triads, evaluated from the
    stored B coefficients (with B_kjl looked up from the swapped entry, so
    a corrupted J cannot silently self-cancel)."""
    mask = (table.l_ord == 0) & (table.j_ord != 0) & (table.k_ord != 0)
    idx = np.nonzero(mask)[0]
    lam_j = (table.j_deg * (table.j_deg + 1)).astype(float)
    lam_k = (table.k_deg * (table.k_deg + 1)).astype(float)

    worst_free = 0.0
    worst_sigma = 0.0
    worst_res = 0.0
    n_res = 0
    for i in idx:
        jd, jo = int(table.j_deg[i]), int(table.j_ord[i])
        kd, ko = int(table.k_deg[i]), int(table.k_ord[i])
        ld, lo = int(table.l_deg[i]), int(table.l_ord[i])
        i_sw = lookup.get((kd, ko, jd, jo, ld, lo))
        b_sum = complex(table.B[i]) + (complex(table.B[i_sw])
                                       if i_sw is not None else 0j)
        J = complex(table.J[i])
        worst_free = max(worst_free,
                         abs(b_sum + J * (1.0 / lam_j[i] - 1.0 / lam_k[i])))
        om_sum = -2.0 * jo / lam_j[i] - 2.0 * ko / lam_k[i]
        rhs = LEMMA_SIGN * (-1.0 / (2.0 * jo)) * J * om_sum
        worst_sigma = max(worst_sigma, abs(b_sum - rhs))
        if table.resonant[i]:
            worst_res = max(worst_res, abs(b_sum))
            n_res += 1
    s.add("lemma_convention_free_identity", worst_free, 1e-12,
          f"{idx.size} lhat=0 triads")
    s.add("lemma_calibrated_sigma", worst_sigma, 1e-12,
          f"sigma={LEMMA_SIGN:+.0f}")
    s.add("lemma_resonant_cancellation", worst_res, 1e-14,
          f"{n_res} resonant triads")
    s.add("lemma_domain_nonvacuous", 0.0 if idx.size else 1.0, 0.5)

    parity = (table.j_deg + table.k_deg + table.l_deg) % 2
    s.add("triad_parity_all_odd", float(np.count_nonzero(parity == 0)), 0.5)
    s.add("triad_order_selection",
          float(np.max(np.abs(table.j_ord + table.k_ord - table.l_ord)))
          if len(table) else 0.0, 0.5)


def _check_operators(s: _Suite, ctx, rng, n_fields: int = 20) -> None:
    K = ctx.K
    worst = {k: 0.0 for k in
             ("abc", "energy", "energy_ind", "lrot", "lanti", "bzonal",
              "interaction", "zsplit", "linv")}
    for _ in range(n_fields):
        a = random_real_field(K, rng)
        b = random_real_field(K, rng)
        c = random_real_field(K, rng)
        i1 = ops.l2_inner(ops.jacobian_grid(ctx, a, b), c)
        i2 = ops.l2_inner(ops.jacobian_grid(ctx, b, c), a)
        i3 = ops.l2_inner(ops.jacobian_grid(ctx, c, a), b)
        worst["abc"] = max(worst["abc"], abs(i1 - i2), abs(i2 - i3))

        w = a
        scale = _sobolev_sq(w, 1)
        worst["energy"] = max(worst["energy"],
                              abs(ops.l2_inner(ops.nonlinear_B(ctx, w), w))
                              / scale)
        Bsw = ops.jacobian_grid(ctx, ops.inv_laplacian(b), w)
        worst["energy_ind"] = max(worst["energy_ind"],
                                  abs(ops.l2_inner(Bsw, w)) / scale)
        worst["lrot"] = max(worst["lrot"],
                            abs(ops.l2_inner(ops.coriolis_L(w), w)) / scale)
        worst["lanti"] = max(
            worst["lanti"],
            abs(ops.l2_inner(ops.coriolis_L(w), b)
                + ops.l2_inner(w, ops.coriolis_L(b))))

        wbar = ops.zonal_project(w)
        wtil = ops.nonzonal_project(w)
        worst["bzonal"] = max(worst["bzonal"], float(
            np.max(np.abs(ops.nonlinear_B(ctx, wbar).coeffs))))
        lhs = ops.l2_inner(ops.nonlinear_B(ctx, w), wtil)
        rhs = -ops.l2_inner(ops.nonlinear_B(ctx, wtil), wbar)
        worst["interaction"] = max(worst["interaction"], abs(lhs - rhs))

        for sord in (0, 1, 2):
            lam = ops.eigenvalue_array(K) ** sord
            ip = np.sum(lam[:, None] * wbar.coeffs * np.conj(wtil.coeffs))
            worst["zsplit"] = max(worst["zsplit"], abs(complex(ip)))
        worst["linv"] = max(worst["linv"], float(np.max(np.abs(
            ops.laplacian(ops.inv_laplacian(w)).coeffs - w.coeffs))))

    s.add("abc_identity", worst["abc"], 1e-11)
    s.add("energy_orthogonality_B", worst["energy"], 1e-11,
          "relative to |grad w|^2")
    s.add("energy_orthogonality_B_independent", worst["energy_ind"], 1e-11,
          "(B(w*, w), w) with independent w*")
    s.add("rotation_orthogonality_L", worst["lrot"], 1e-11, "relative")
    s.add("rotation_antisymmetry_L", worst["lanti"], 1e-12)
    s.add("zonal_B_vanishes", worst["bzonal"], 1e-13)
    s.add("interaction_identity", worst["interaction"], 1e-10,
          "(B(w,w), w~) = -(B(w~,w~), w-bar)")
    s.add("zonal_orthogonality_Hs", worst["zsplit"], 1e-12, "s in {0,1,2}")
    s.add("laplacian_pseudoinverse", worst["linv"], 1e-14)

    lam = ops.eigenvalue_array(K)[:, None]
    om = ops.omega_array(K)
    dAL = (-lam) * (1j * om)
    dLA = (1j * om) * (-lam)
    s.add("commutation_AL_LA",
          0.0 if np.array_equal(dAL, dLA) else float(np.max(np.abs(dAL - dLA))),
          0.0, "diagonal factors, bit-exact")


def _check_dual_paths(s: _Suite, ctx, rng) -> None:
    K = ctx.K
    worst_b = 0.0
    worst_o = 0.0
    for _ in range(10):
        w = random_real_field(K, rng)
        b1 = ops.nonlinear_B(ctx, w, "pseudospectral")
        b2 = ops.nonlinear_B(ctx, w, "triad_oracle")
        scale = float(np.max(np.abs(b1.coeffs)))
        worst_b = max(worst_b,
                      float(np.max(np.abs(b1.coeffs - b2.coeffs))) / scale)
        wt = ops.nonzonal_project(w)
        wb = ops.zonal_project(w)
        v1 = ops.b_omega_pairing(ctx, wt, wb, "spectral_sum")
        v2 = ops.b_omega_pairing(ctx, wt, wb, "jacobian_form")
        worst_o = max(worst_o, abs(v1 - v2) / max(abs(v1), 1e-30))
    s.add("dual_path_nonlinear_B", worst_b, 1e-9, "relative")
    s.add("dual_path_b_omega", worst_o, 1e-9, "relative")


def run_suite(K: int, fault: str | None = None, seed: int = 2024
              ) -> tuple[list[CheckResult], dict]:
    """Run every check at truncation K; returns (results, metadata).

    fault="jsign" flips the sign of the stored Jacobian coefficients while
    leaving B untouched (a deliberate convention corruption): the oracle
    and lemma checks must then fail, which the test suite exercises.
    """
    if K < 2:
        raise ValueError("verification needs K >= 2")
    rng = np.random.default_rng(seed)
    s = _Suite()

    table = build_table(K)
    sigma_j = calibrate_jacobian_sign()
    sigma_lemma = calibrate_lemma_sign()
    if fault == "jsign":
        table.J = -table.J
    elif fault is not None:
        raise ValueError(f"unknown fault {fault!r}")
    lookup = _table_lookup(table)

    s.add("sign_calibration_jacobian", abs(sigma_j - JACOBIAN_SIGN), 0.0,
          f"measured {sigma_j:+.0f} vs oracle")
    s.add("sign_calibration_lemma", abs(sigma_lemma - LEMMA_SIGN), 0.0,
          f"measured {sigma_lemma:+.0f}")

    ctx = ops.OperatorContext(K, triad_table=table)
    _check_transforms(s, K, rng)
    _check_oracle(s, table, lookup, K, rng)
    _check_lemma(s, table, lookup)
    _check_operators(s, ctx, rng)
    _check_dual_paths(s, ctx, rng)

    meta = {
        "K": K,
        "sigma_lemma": sigma_lemma,
        "sigma_jacobian": sigma_j,
        "triads": table.summary(),
        "fault": fault,
        "passed": all(r.passed for r in s.results),
    }
    return s.results, meta

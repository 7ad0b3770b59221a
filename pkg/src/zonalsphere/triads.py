"""Triad coupling coefficients of the spherical Jacobian and the nonlinear
operator, resonance classification, and the non-resonance cancellation check.

The Jacobian coefficient J_jkl = (jacobian(Y_j, Y_k), Y_l)_{L2} is evaluated
from the closed 3j-symbol formula

    J_jkl = i (-1)^{lhat} [(l+k-j)(l+1+j-k)]^{1/2}
            (l j k-1; 0 0 0) (l k j; -lhat khat jhat) S_jkl,

with the inner product conjugate-linear in the second slot.  This was
cross-calibrated against the grid-quadrature oracle: the global sign is +1
as written (see jacobian_coeff_quadrature / calibrate_jacobian_sign).

The nonlinear-operator coefficient is B_jkl = -J_jkl / |j|^2 since the
inverse Laplacian acts diagonally on the first argument.  Consequently the
cancellation identity for lhat = 0 triads holds with global sign -1
relative to the stated form (LEMMA_SIGN below); the sign drops out of the
resonant case, where B_jkl + B_kjl vanishes exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spharm import WaveVector, basis_tables, make_grid
from .wigner import _threej, threej_zero_row, triangle_ok

__all__ = [
    "TriadCoefficient",
    "TriadTable",
    "JACOBIAN_SIGN",
    "LEMMA_SIGN",
    "s_factor",
    "jacobian_coeff",
    "jacobian_coeff_quadrature",
    "b_coeff",
    "rossby_frequency",
    "is_resonant",
    "lemma_residual",
    "build_table",
    "calibrate_jacobian_sign",
    "calibrate_lemma_sign",
    "write_csv",
]

# Global sign of the closed-form J relative to the quadrature inner product
# (conjugation on the second slot); pinned by calibrate_jacobian_sign().
JACOBIAN_SIGN = 1.0

# Global sign relating B_jkl + B_kjl to -(1/(2 jhat)) J_jkl (Omega_j+Omega_k).
# Forced to -1 by B = -J/|j|^2 together with J_kjl = -J_jkl, independent of
# the sign of J itself; confirmed by calibrate_lemma_sign().
LEMMA_SIGN = -1.0

_SQRT4PI = 4.0 * math.sqrt(math.pi)


@dataclass(frozen=True)
class TriadCoefficient:
    """One nonzero coupling: Jacobian coefficient J, operator coefficient
    B = -J/|j|^2, and whether the pair (j, k) is frequency-resonant."""

    j: WaveVector
    k: WaveVector
    l: WaveVector
    J: complex
    B: complex
    resonant: bool


class TriadTable:
    """All nonzero triads over a truncation, stored columnar for speed."""

    def __init__(self, truncation: int, j_deg, j_ord, k_deg, k_ord,
                 l_deg, l_ord, J, B, resonant):
        self.truncation = truncation
        self.j_deg = np.asarray(j_deg, dtype=np.int64)
        self.j_ord = np.asarray(j_ord, dtype=np.int64)
        self.k_deg = np.asarray(k_deg, dtype=np.int64)
        self.k_ord = np.asarray(k_ord, dtype=np.int64)
        self.l_deg = np.asarray(l_deg, dtype=np.int64)
        self.l_ord = np.asarray(l_ord, dtype=np.int64)
        self.J = np.asarray(J, dtype=np.complex128)
        self.B = np.asarray(B, dtype=np.complex128)
        self.resonant = np.asarray(resonant, dtype=bool)

    def __len__(self) -> int:
        return self.J.size

    def entries(self):
        for i in range(len(self)):
            yield TriadCoefficient(
                j=WaveVector(int(self.j_deg[i]), int(self.j_ord[i])),
                k=WaveVector(int(self.k_deg[i]), int(self.k_ord[i])),
                l=WaveVector(int(self.l_deg[i]), int(self.l_ord[i])),
                J=complex(self.J[i]),
                B=complex(self.B[i]),
                resonant=bool(self.resonant[i]),
            )

    def summary(self) -> dict:
        lzero = self.l_ord == 0
        return {
            "truncation": self.truncation,
            "total": int(len(self)),
            "resonant": int(np.count_nonzero(self.resonant)),
            "zonal_target": int(np.count_nonzero(lzero)),
        }


def s_factor(j: int, k: int, l: int) -> float:
    """[(2j+1)(2k+1)(2l+1)(j+k+l+1)(j+k-l)]^{1/2} / (4 sqrt(pi)).

    Symmetric in j and k; returns 0.0 when j+k <= l (the radicand is then
    nonpositive, and every use is multiplied by a vanishing 3j anyway).
    """
    if j < 0 or k < 0 or l < 0:
        raise ValueError("degrees must be nonnegative")
    prod = (2 * j + 1) * (2 * k + 1) * (2 * l + 1) * (j + k + l + 1) * (j + k - l)
    if prod <= 0:
        return 0.0
    return math.sqrt(prod) / _SQRT4PI


def _selection_ok(jd: int, jo: int, kd: int, ko: int, ld: int, lo: int) -> bool:
    """Order sum, degree parity, and both triangle conditions."""
    if jo + ko != lo:
        return False
    if (jd + kd + ld) % 2 == 0:
        return False
    if kd < 1:
        return False
    if not triangle_ok(ld, jd, kd - 1):
        return False
    if not triangle_ok(ld, kd, jd):
        return False
    return True


def jacobian_coeff(j: WaveVector, k: WaveVector, l: WaveVector) -> complex:
    """(jacobian(Y_j, Y_k), Y_l) via the 3j formula; exact 0 when any
    selection rule fails (order sum, degree parity, triangles)."""
    if not _selection_ok(j.k, j.khat, k.k, k.khat, l.k, l.khat):
        return 0j
    pref = (l.k + k.k - j.k) * (l.k + 1 + j.k - k.k)
    t1 = threej_zero_row(l.k, j.k, k.k - 1)
    if t1 == 0.0:
        return 0j
    t2 = _threej(l.k, k.k, j.k, -l.khat, k.khat, j.khat)
    if t2 == 0.0:
        return 0j
    sign = -1.0 if l.khat % 2 else 1.0
    val = sign * math.sqrt(pref) * t1 * t2 * s_factor(j.k, k.k, l.k)
    return JACOBIAN_SIGN * complex(0.0, val)


def jacobian_coeff_quadrature(j: WaveVector, k: WaveVector, l: WaveVector
                              ) -> complex:
    """Independent oracle: surface quadrature of jacobian(Y_j, Y_k) conj(Y_l).

    The Jacobian is formed from analytic derivatives -- d_phi is
    multiplication by i*order and the theta-derivative and (1/sin)d_phi
    weights come from the Legendre recurrences -- so there is no
    finite-difference error; the grid integrates the triple product exactly.
    """
    Kq = max(j.k, k.k, l.k, 1)
    t = basis_tables(Kq, make_grid(Kq))

    def parts(wv):
        return (t.DTH[wv.k, wv.khat + Kq, :], t.MPS[wv.k, wv.khat + Kq, :],
                t.E[wv.khat + Kq, :])

    dthj, mpsj, ej = parts(j)
    dthk, mpsk, ek = parts(k)
    Pl = t.P[l.k, l.khat + Kq, :]
    el = t.E[l.khat + Kq, :]
    jac = (dthj[:, None] * (1j * mpsk[:, None]) -
           (1j * mpsj[:, None]) * dthk[:, None]) * (ej * ek)[None, :]
    integrand = jac * (Pl[:, None] * np.conj(el)[None, :])
    return complex(np.sum(integrand.sum(axis=1) * t.weights) * t.dphi)


def b_coeff(j: WaveVector, k: WaveVector, l: WaveVector) -> complex:
    """(jacobian(inv_laplacian Y_j, Y_k), Y_l) = -J_jkl / |j|^2."""
    if j.k == 0:
        raise ValueError("inverse Laplacian undefined on constant mode")
    return -jacobian_coeff(j, k, l) / j.eigenvalue()


def rossby_frequency(wv: WaveVector) -> float:
    """Omega_k = -2 khat / (k(k+1)); zero for the constant mode."""
    if wv.k == 0:
        return 0.0
    return -2.0 * wv.khat / wv.eigenvalue()


def is_resonant(j: WaveVector, k: WaveVector) -> bool:
    """Exact test of Omega_j + Omega_k = 0 by cross-multiplied integers."""
    lj = j.eigenvalue() if j.k > 0 else 1
    lk = k.eigenvalue() if k.k > 0 else 1
    return j.khat * lk + k.khat * lj == 0


def lemma_residual(j: WaveVector, k: WaveVector, l: WaveVector,
                   sign_convention: float = LEMMA_SIGN) -> complex:
    """(B_jkl + B_kjl) - sigma * (-1/(2 jhat)) J_jkl (Omega_j + Omega_k).

    Zero (to rounding) for every admissible triad with the calibrated
    sigma; exactly zero on resonant triads regardless of sigma.
    """
    if j.khat * k.khat == 0 or l.khat != 0:
        raise ValueError("lemma applies only to lhat = 0, non-zonal j,k")
    J = jacobian_coeff(j, k, l)
    bsum = -J / j.eigenvalue() + jacobian_coeff(k, j, l) * (-1.0 / k.eigenvalue())
    omega_sum = rossby_frequency(j) + rossby_frequency(k)
    return bsum - sign_convention * (-1.0 / (2.0 * j.khat)) * J * omega_sum


def build_table(K: int) -> TriadTable:
    """All triads with nonzero J over the truncation, in lexicographic
    order of (j, k, l); zero values (including accidental 3j zeros, which
    the exact evaluator returns as exact 0.0) are never stored."""
    if K < 1:
        raise ValueError(f"truncation must be >= 1, got {K}")
    cols = {name: [] for name in
            ("jd", "jo", "kd", "ko", "ld", "lo", "J", "B", "res")}
    for jd in range(1, K + 1):
        lam_j = jd * (jd + 1)
        for jo in range(-jd, jd + 1):
            for kd in range(1, K + 1):
                lam_k = kd * (kd + 1)
                for ko in range(-kd, kd + 1):
                    lo = jo + ko
                    for ld in range(abs(lo), K + 1):
                        if not _selection_ok(jd, jo, kd, ko, ld, lo):
                            continue
                        t1 = threej_zero_row(ld, jd, kd - 1)
                        if t1 == 0.0:
                            continue
                        t2 = _threej(ld, kd, jd, -lo, ko, jo)
                        if t2 == 0.0:
                            continue
                        s = s_factor(jd, kd, ld)
                        if s == 0.0:
                            continue
                        pref = (ld + kd - jd) * (ld + 1 + jd - kd)
                        if pref == 0:
                            continue
                        sign = -1.0 if lo % 2 else 1.0
                        val = sign * math.sqrt(pref) * t1 * t2 * s
                        J = JACOBIAN_SIGN * complex(0.0, val)
                        cols["jd"].append(jd)
                        cols["jo"].append(jo)
                        cols["kd"].append(kd)
                        cols["ko"].append(ko)
                        cols["ld"].append(ld)
                        cols["lo"].append(lo)
                        cols["J"].append(J)
                        cols["B"].append(-J / lam_j)
                        cols["res"].append(jo * lam_k + ko * lam_j == 0)
    return TriadTable(K, cols["jd"], cols["jo"], cols["kd"], cols["ko"],
                      cols["ld"], cols["lo"], cols["J"], cols["B"],
                      cols["res"])


def calibrate_jacobian_sign(K: int = 4) -> float:
    """Sign of the closed-form J against the quadrature oracle.

    Scans low-degree triads until one with a comfortably nonzero J is
    found; raises if formula and quadrature disagree beyond a global sign.
    """
    table = build_table(K)
    order = np.argsort(-np.abs(table.J))
    for idx in order[: min(10, len(table))]:
        j = WaveVector(int(table.j_deg[idx]), int(table.j_ord[idx]))
        k = WaveVector(int(table.k_deg[idx]), int(table.k_ord[idx]))
        l = WaveVector(int(table.l_deg[idx]), int(table.l_ord[idx]))
        q = jacobian_coeff_quadrature(j, k, l)
        f = complex(table.J[idx])
        if abs(q) < 1e-10:
            continue
        ratio = f / q
        if abs(ratio - 1.0) < 1e-8:
            return 1.0
        if abs(ratio + 1.0) < 1e-8:
            return -1.0
        raise RuntimeError(
            f"formula/quadrature mismatch beyond global sign: ratio={ratio}"
        )
    raise RuntimeError("no usable triad found for sign calibration")


def calibrate_lemma_sign(K: int = 6) -> float:
    """Sign sigma making the lhat = 0 cancellation identity hold.

    Uses the first non-resonant admissible triad; the ratio is independent
    of the global sign of J, so this is a pure convention probe.
    """
    table = build_table(K)
    mask = (table.l_ord == 0) & (table.j_ord != 0) & (table.k_ord != 0) \
        & ~table.resonant
    idxs = np.nonzero(mask)[0]
    for idx in idxs:
        j = WaveVector(int(table.j_deg[idx]), int(table.j_ord[idx]))
        k = WaveVector(int(table.k_deg[idx]), int(table.k_ord[idx]))
        J = complex(table.J[idx])
        if abs(J) < 1e-12:
            continue
        bsum = -J / j.eigenvalue() + (J / k.eigenvalue())
        rhs = (-1.0 / (2.0 * j.khat)) * J \
            * (rossby_frequency(j) + rossby_frequency(k))
        if abs(rhs) < 1e-14:
            continue
        ratio = bsum / rhs
        if abs(ratio - 1.0) < 1e-10:
            return 1.0
        if abs(ratio + 1.0) < 1e-10:
            return -1.0
        raise RuntimeError(f"lemma ratio is not a pure sign: {ratio}")
    raise RuntimeError("no non-resonant lhat=0 triad found for calibration")


def write_csv(table: TriadTable, path) -> None:
    """CSV dump: one row per stored triad, 17 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("j,jhat,k,khat,l,lhat,J_re,J_im,B_re,B_im,resonant\n")
        for i in range(len(table)):
            fh.write(
                f"{table.j_deg[i]},{table.j_ord[i]},"
                f"{table.k_deg[i]},{table.k_ord[i]},"
                f"{table.l_deg[i]},{table.l_ord[i]},"
                f"{table.J[i].real:.17g},{table.J[i].imag:.17g},"
                f"{table.B[i].real:.17g},{table.B[i].imag:.17g},"
                f"{'true' if table.resonant[i] else 'false'}\n"
            )

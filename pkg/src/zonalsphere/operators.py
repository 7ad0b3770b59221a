"""Spectral operators: Laplacian, its inverse, the rotation operator L,
zonal projection, inverse phi-derivative, and the quadratic advection
operator B with two independent evaluation paths.

The fast path for B is pseudospectral: synthesize the analytic derivative
grids, form the pointwise Jacobian, analyze back, truncate.  On the
3/2-rule grid every integral involved is a polynomial the quadrature
integrates exactly, so truncation is the only approximation.  The slow
path sums the triad table and exists to certify the fast one.
"""

from __future__ import annotations

import numpy as np

from .spharm import (GridField, GridSpec, SpectralField, basis_tables,
                     contract_modes, contract_profiles, make_grid)
from .triads import LEMMA_SIGN, TriadTable

__all__ = [
    "OperatorContext",
    "laplacian",
    "inv_laplacian",
    "coriolis_L",
    "zonal_project",
    "nonzonal_project",
    "inv_dphi",
    "jacobian_grid",
    "nonlinear_B",
    "b_omega_pairing",
    "l2_inner",
    "eigenvalue_array",
    "omega_array",
]


def eigenvalue_array(K: int) -> np.ndarray:
    """k(k+1) for k = 0..K (diagonal of -Laplacian restricted to degrees)."""
    ls = np.arange(K + 1, dtype=float)
    return ls * (ls + 1.0)


def omega_array(K: int) -> np.ndarray:
    """Omega[k, khat+K] = -2 khat / (k(k+1)), zero on k = 0 and khat = 0."""
    lam = eigenvalue_array(K)
    ms = np.arange(-K, K + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        om = -2.0 * ms[None, :] / lam[:, None]
    om[0, :] = 0.0
    return om


class OperatorContext:
    """Immutable bundle of truncation, dealiased grid, basis tables, and an
    optional triad table for the verification path."""

    def __init__(self, K: int, grid: GridSpec | None = None,
                 triad_table: TriadTable | None = None):
        if grid is None:
            grid = make_grid(K)
        if grid.n_theta < (3 * K + 2) // 2 or grid.n_phi < 3 * K + 1:
            raise ValueError("grid below the dealiasing bound for K")
        if triad_table is not None and triad_table.truncation < K:
            raise ValueError("triad table truncation below operator K")
        self.K = K
        self.grid = grid
        self.tables = basis_tables(K, grid)
        self.triad_table = triad_table
        self.eigenvalues = eigenvalue_array(K)
        self.omega = omega_array(K)


def _require_zero_mean(f: SpectralField, what: str) -> None:
    if abs(f.coeffs[0, f.truncation]) > 1e-13:
        raise ValueError(f"{what} requires zero-mean field")


def laplacian(f: SpectralField) -> SpectralField:
    """Coefficient-wise multiplication by -k(k+1)."""
    lam = eigenvalue_array(f.truncation)
    return SpectralField(f.truncation, -lam[:, None] * f.coeffs,
                         f.is_real_field)


def inv_laplacian(f: SpectralField) -> SpectralField:
    """Division by -k(k+1); defined only on zero-mean fields, and the
    output mean is exactly zero."""
    _require_zero_mean(f, "inverse Laplacian")
    lam = eigenvalue_array(f.truncation)
    lam[0] = 1.0  # kernel row; zeroed below
    out = f.coeffs / (-lam[:, None])
    out[0, :] = 0.0
    return SpectralField(f.truncation, out, f.is_real_field)


def coriolis_L(f: SpectralField) -> SpectralField:
    """L = 2 d_phi inv_laplacian: multiplication by i Omega_k; zonal modes
    and the constant mode map to zero."""
    om = omega_array(f.truncation)
    return SpectralField(f.truncation, (1j * om) * f.coeffs, f.is_real_field)


def zonal_project(f: SpectralField) -> SpectralField:
    """Keep exactly the khat = 0 column."""
    K = f.truncation
    out = np.zeros_like(f.coeffs)
    out[:, K] = f.coeffs[:, K]
    return SpectralField(K, out, f.is_real_field)


def nonzonal_project(f: SpectralField) -> SpectralField:
    """Identity minus zonal_project."""
    K = f.truncation
    out = f.coeffs.copy()
    out[:, K] = 0.0
    return SpectralField(K, out, f.is_real_field)


def inv_dphi(f: SpectralField) -> SpectralField:
    """Division by i*khat; defined only on purely non-zonal fields."""
    K = f.truncation
    if np.max(np.abs(f.coeffs[:, K])) > 1e-13:
        raise ValueError("d_phi^{-1} undefined on zonal modes")
    ms = np.arange(-K, K + 1, dtype=float)
    ms[K] = 1.0  # kernel column; zeroed below
    out = f.coeffs / (1j * ms[None, :])
    out[:, K] = 0.0
    return SpectralField(K, out, f.is_real_field)


# ---------------------------------------------------------------------------
# Pseudospectral Jacobian and the nonlinear operator
# ---------------------------------------------------------------------------

def _derivative_grids(ctx: OperatorContext, coeffs: np.ndarray, real: bool):
    """Grid values of d_theta f and (1/sin theta) d_phi f.

    Both are synthesized from analytic per-mode derivative tables, so no
    grid value is ever divided by sin theta.
    """
    t = ctx.tables
    both = contract_modes(t.DERIV_synth, coeffs).T @ t.E
    n = ctx.grid.n_theta
    dth, phs = both[:n], both[n:]
    if real:
        # Re(i z) = -Im(z); the 1j factor never materializes
        return dth.real, -phs.imag
    return dth, 1j * phs


def _analyze_grid(ctx: OperatorContext, values: np.ndarray) -> np.ndarray:
    t = ctx.tables
    fourier = (values @ np.conj(t.E.T)).T * t.dphi
    return contract_profiles(t.P_anal, fourier * t.weights[None, :])


def jacobian_grid(ctx: OperatorContext, f: SpectralField, g: SpectralField
                  ) -> SpectralField:
    """jacobian(f, g) = (1/sin)(d_theta f d_phi g - d_phi f d_theta g),
    evaluated pseudospectrally on the dealiased grid and truncated to K."""
    if f.truncation != ctx.K or g.truncation != ctx.K:
        raise ValueError("fields must match the context truncation")
    real = f.is_real_field and g.is_real_field
    f_th, f_ph = _derivative_grids(ctx, f.coeffs, real)
    g_th, g_ph = _derivative_grids(ctx, g.coeffs, real)
    jac = f_th * g_ph - f_ph * g_th
    out = _analyze_grid(ctx, jac)
    out[0, :] = 0.0  # a Jacobian integrates to zero over the sphere
    return SpectralField(ctx.K, out, is_real_field=real)


def _triad_sum_B(ctx: OperatorContext, w: np.ndarray) -> np.ndarray:
    table = ctx.triad_table
    if table is None:
        raise ValueError("triad_oracle path requires a TriadTable")
    K = ctx.K
    keep = (table.j_deg <= K) & (table.k_deg <= K) & (table.l_deg <= K)
    wj = w[table.j_deg[keep], table.j_ord[keep] + K]
    wk = w[table.k_deg[keep], table.k_ord[keep] + K]
    contrib = table.B[keep] * wj * wk
    out = np.zeros_like(w)
    np.add.at(out, (table.l_deg[keep], table.l_ord[keep] + K), contrib)
    return out


def nonlinear_B(ctx: OperatorContext, w: SpectralField,
                path: str = "pseudospectral") -> SpectralField:
    """B(w, w) = jacobian(inv_laplacian w, w), truncated to K.

    path="pseudospectral" is the production route; path="triad_oracle"
    sums B_jkl w_j w_k over the table and is O(table size) per call,
    kept for cross-validation only.
    """
    _require_zero_mean(w, "nonlinear operator")
    if path == "pseudospectral":
        return jacobian_grid(ctx, inv_laplacian(w), w)
    if path == "triad_oracle":
        return SpectralField(ctx.K, _triad_sum_B(ctx, w.coeffs),
                             w.is_real_field)
    raise ValueError(f"unknown path {path!r}")


def b_omega_pairing(ctx: OperatorContext, w_tilde: SpectralField,
                    w_bar: SpectralField, path: str = "spectral_sum"
                    ) -> complex:
    """(B_Omega(w~, w~), w-bar): the resonance-free part of the nonlinear
    transfer divided by the triad frequency.

    path="spectral_sum" evaluates (i/2) sum' (B_jkl + B_kjl)/(Om_j + Om_k)
    over non-resonant zonal-target triads; path="jacobian_form" evaluates
    (1/4)(jacobian(dphi^{-1} w~, w~), w-bar) by quadrature and subtracts
    the same pairing of each single-degree shell with itself.  A pair of
    modes is resonant against a zonal target exactly when the two degrees
    coincide, so the shell subtraction removes precisely the resonant
    terms the primed sum omits while staying quadrature-only, independent
    of the triad table.  The calibrated convention sign makes both paths
    compute the same object.
    """
    K = ctx.K
    if np.max(np.abs(w_tilde.coeffs[:, K])) > 1e-13:
        raise ValueError("first argument must be purely non-zonal")
    nonzonal = w_bar.coeffs.copy()
    nonzonal[:, K] = 0.0
    if np.max(np.abs(nonzonal)) > 1e-13:
        raise ValueError("second argument must be purely zonal")

    if path == "jacobian_form":
        def quarter_pairing(field: SpectralField) -> complex:
            jac = jacobian_grid(ctx, inv_dphi(field), field)
            return 0.25 * l2_inner(jac, w_bar)

        total = quarter_pairing(w_tilde)
        for deg in range(1, K + 1):
            row = w_tilde.coeffs[deg]
            if not np.any(row):
                continue
            shell = SpectralField.zeros(K, w_tilde.is_real_field)
            shell.coeffs[deg] = row
            total -= quarter_pairing(shell)
        return LEMMA_SIGN * total
    if path != "spectral_sum":
        raise ValueError(f"unknown path {path!r}")

    table = ctx.triad_table
    if table is None:
        raise ValueError("spectral_sum path requires a TriadTable")
    keep = ((table.l_ord == 0) & (table.j_ord != 0) & (table.k_ord != 0)
            & ~table.resonant
            & (table.j_deg <= K) & (table.k_deg <= K) & (table.l_deg <= K))
    if not np.any(keep):
        return 0j
    lam_j = (table.j_deg[keep] * (table.j_deg[keep] + 1)).astype(float)
    lam_k = (table.k_deg[keep] * (table.k_deg[keep] + 1)).astype(float)
    J = table.J[keep]
    b_sym = -J / lam_j + J / lam_k  # B_jkl + B_kjl
    om_sum = (-2.0 * table.j_ord[keep] / lam_j
              - 2.0 * table.k_ord[keep] / lam_k)
    wj = w_tilde.coeffs[table.j_deg[keep], table.j_ord[keep] + K]
    wk = w_tilde.coeffs[table.k_deg[keep], table.k_ord[keep] + K]
    wl = np.conj(w_bar.coeffs[table.l_deg[keep], K])
    return complex(0.5j * np.sum(b_sym / om_sum * wj * wk * wl))


def l2_inner(a: SpectralField, b: SpectralField) -> complex:
    """L2 inner product, conjugate-linear in the second slot."""
    if a.truncation != b.truncation:
        raise ValueError("truncation mismatch")
    return complex(np.sum(a.coeffs * np.conj(b.coeffs)))

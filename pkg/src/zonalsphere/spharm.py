"""Spherical-harmonic basis, Gauss-Legendre grid, and spectral transforms.

Conventions: orthonormal harmonics with the Condon-Shortley phase,

    Y_{k,m}(theta, phi) = Pbar_k^m(cos theta) * exp(i m phi),

where Pbar is the fully normalized associated Legendre function, so that
(Y_j, Y_k)_{L2} = delta_jk with the inner product conjugate-linear in the
second slot.  A real field f satisfies f_{k,-m} = (-1)^m conj(f_{k,m}).

Coefficients are stored densely over the triangular truncation K as a
complex array of shape (K+1, 2K+1), indexed [degree, order + K]; entries
with |order| > degree are identically zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "WaveVector",
    "GridSpec",
    "SpectralField",
    "GridField",
    "eigenvalue",
    "evaluate_harmonic",
    "make_grid",
    "gauss_grid",
    "synthesize",
    "analyze",
    "quadrature_integral",
    "real_symmetry_defect",
    "enforce_real_symmetry",
    "save_spectral",
    "load_spectral",
]

SNAPSHOT_HEADER = "# zonalsphere-spectral v1"


@dataclass(frozen=True, order=True)
class WaveVector:
    """Spherical-harmonic index: degree k >= 0, order khat with |khat| <= k."""

    k: int
    khat: int

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"degree must be nonnegative, got k={self.k}")
        if abs(self.khat) > self.k:
            raise ValueError(
                f"order khat={self.khat} exceeds degree k={self.k}"
            )

    def eigenvalue(self) -> int:
        """Laplacian eigenvalue magnitude |k|^2 = k(k+1)."""
        return self.k * (self.k + 1)


def eigenvalue(wv: WaveVector) -> int:
    """k(k+1), the (negated) Laplacian eigenvalue of mode wv."""
    return wv.eigenvalue()


@dataclass(frozen=True)
class GridSpec:
    """Quadrature grid: Gauss-Legendre in cos(theta), equispaced in phi."""

    n_theta: int
    n_phi: int
    nodes: np.ndarray    # cos(theta) values, ascending, strictly inside (-1, 1)
    weights: np.ndarray  # Gauss-Legendre weights, sum exactly 2

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.nodes)

    @property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi


def gauss_grid(n_theta: int, n_phi: int) -> GridSpec:
    """Grid with explicit node counts (prefer make_grid for a truncation)."""
    if n_theta < 1 or n_phi < 1:
        raise ValueError("grid needs at least one node in each direction")
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    return GridSpec(n_theta=n_theta, n_phi=n_phi, nodes=nodes, weights=weights)


def make_grid(K: int) -> GridSpec:
    """Smallest grid on which quadratic products of degree-K fields are
    analyzed without aliasing (3/2 rule): n_theta >= ceil((3K+1)/2),
    n_phi >= 3K+1.  The same grid integrates triple products of degree-K
    fields exactly, which is what certifies the quadrature oracles."""
    if K < 1:
        raise ValueError(f"truncation must be >= 1, got {K}")
    return gauss_grid((3 * K + 2) // 2, 3 * K + 1)


@dataclass
class SpectralField:
    """Complex coefficients over the triangular truncation k <= K."""

    truncation: int
    coeffs: np.ndarray       # complex128, shape (K+1, 2K+1), [k, khat+K]
    is_real_field: bool = False

    @classmethod
    def zeros(cls, K: int, is_real_field: bool = False) -> "SpectralField":
        return cls(K, np.zeros((K + 1, 2 * K + 1), dtype=np.complex128),
                   is_real_field)

    @classmethod
    def from_modes(cls, K: int, modes, is_real_field: bool = False
                   ) -> "SpectralField":
        """Build from {(k, khat): amplitude} or [(WaveVector, amp), ...]."""
        f = cls.zeros(K, is_real_field)
        items = modes.items() if hasattr(modes, "items") else modes
        for key, amp in items:
            wv = key if isinstance(key, WaveVector) else WaveVector(*key)
            if wv.k > K:
                raise ValueError(f"mode degree {wv.k} exceeds truncation {K}")
            f.coeffs[wv.k, wv.khat + K] = amp
        if is_real_field and real_symmetry_defect(f) > 1e-13:
            raise ValueError("mode list violates real-field symmetry")
        return f

    def copy(self) -> "SpectralField":
        return SpectralField(self.truncation, self.coeffs.copy(),
                             self.is_real_field)

    def get(self, wv: WaveVector) -> complex:
        return complex(self.coeffs[wv.k, wv.khat + self.truncation])

    def wavevectors(self):
        """All (WaveVector, coefficient) pairs in the triangle."""
        K = self.truncation
        for k in range(K + 1):
            for m in range(-k, k + 1):
                yield WaveVector(k, m), complex(self.coeffs[k, m + K])


@dataclass
class GridField:
    """Pointwise values on a GridSpec, shape (n_theta, n_phi)."""

    values: np.ndarray
    grid: GridSpec


def real_symmetry_defect(f: SpectralField) -> float:
    """Max |c_{k,-m} - (-1)^m conj(c_{k,m})| over the triangle."""
    c = f.coeffs
    K = f.truncation
    parity = np.where(np.arange(-K, K + 1) % 2 == 0, 1.0, -1.0)
    mirrored = parity[None, :] * np.conj(c[:, ::-1])
    return float(np.max(np.abs(c - mirrored)))


def enforce_real_symmetry(f: SpectralField) -> SpectralField:
    """Project onto the real-field symmetry class (average with mirror)."""
    K = f.truncation
    parity = np.where(np.arange(-K, K + 1) % 2 == 0, 1.0, -1.0)
    mirrored = parity[None, :] * np.conj(f.coeffs[:, ::-1])
    return SpectralField(K, 0.5 * (f.coeffs + mirrored), True)


# ---------------------------------------------------------------------------
# Normalized associated Legendre tables
# ---------------------------------------------------------------------------

def _sectoral_prefactor(m: int) -> float:
    """c_m with Pbar_m^m(cos t) = c_m sin^m(t); includes Condon-Shortley."""
    val = 1.0 / (4.0 * math.pi)
    for i in range(1, m + 1):
        val *= (2 * i + 1) / (2 * i)
    c = math.sqrt(val)
    return -c if m % 2 else c


def _upward_degrees(K: int, m: int, x: np.ndarray, seed: np.ndarray
                    ) -> np.ndarray:
    """Run the fixed-order three-term recurrence from degree m up to K.

    Returns array (K+1, len(x)); rows below degree m are zero.  Works for
    any table obeying the Pbar recurrence (Pbar itself, or Pbar/sin theta
    with an adjusted seed), since the recurrence is linear at fixed order.
    """
    out = np.zeros((K + 1, x.size))
    out[m] = seed
    if m + 1 <= K:
        out[m + 1] = math.sqrt(2 * m + 3) * x * seed
    for l in range(m + 2, K + 1):
        a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
        b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
        out[l] = a * (x * out[l - 1] - b * out[l - 2])
    return out


def _legendre_block(K: int, x: np.ndarray) -> np.ndarray:
    """Pbar_l^m(x) for 0 <= m <= l <= K; shape (K+1, K+1, n) [l, m, node]."""
    x = np.asarray(x, dtype=float)
    sin_t = np.sqrt(1.0 - x * x)
    P = np.zeros((K + 1, K + 1, x.size))
    for m in range(K + 1):
        seed = _sectoral_prefactor(m) * sin_t ** m
        P[:, m, :] = _upward_degrees(K, m, x, seed)
    return P


def _legendre_over_sin_block(K: int, x: np.ndarray) -> np.ndarray:
    """Pbar_l^m(x)/sin(theta) for 1 <= m <= l <= K, evaluated without any
    division by sin(theta): the seed carries sin^{m-1} in closed form and
    the recurrence is the same as for Pbar itself.  The m = 0 plane is
    left zero (only ever used multiplied by the order)."""
    x = np.asarray(x, dtype=float)
    sin_t = np.sqrt(1.0 - x * x)
    H = np.zeros((K + 1, K + 1, x.size))
    for m in range(1, K + 1):
        seed = _sectoral_prefactor(m) * sin_t ** (m - 1)
        H[:, m, :] = _upward_degrees(K, m, x, seed)
    return H


class BasisTables:
    """Dense basis tables over a grid, indexed [degree, order+K, node].

    P     : Pbar_l^m(cos theta)
    DTH   : d/dtheta Pbar_l^m(cos theta)
    MPS   : m * Pbar_l^m(cos theta) / sin(theta)   (the (1/sin)d_phi weight)
    E     : exp(i m phi), shape (2K+1, n_phi)
    """

    def __init__(self, K: int, grid: GridSpec):
        self.K = K
        self.grid = grid
        x = grid.nodes
        n = x.size
        parity = np.where(np.arange(1, K + 1) % 2 == 0, 1.0, -1.0)

        block = _legendre_block(K, x)          # m >= 0
        P = np.zeros((K + 1, 2 * K + 1, n))
        P[:, K:, :] = block
        # Pbar_l^{-m} = (-1)^m Pbar_l^m
        P[:, K - 1::-1, :] = parity[None, :, None] * block[:, 1:, :]
        self.P = P

        hblock = _legendre_over_sin_block(K, x)
        MPS = np.zeros((K + 1, 2 * K + 1, n))
        morders = np.arange(1, K + 1)
        MPS[:, K + 1:, :] = morders[None, :, None] * hblock[:, 1:, :]
        # m -> -m flips both the explicit factor m and the parity sign
        MPS[:, K - 1::-1, :] = (-morders * parity)[None, :, None] \
            * hblock[:, 1:, :]
        self.MPS = MPS

        # d/dtheta Pbar_l^m = ((l-m)(l+m+1))^{1/2} Pbar_l^{m+1}/2
        #                     - ((l+m)(l-m+1))^{1/2} Pbar_l^{m-1}/2
        DTH = np.zeros_like(P)
        ls = np.arange(K + 1)[:, None]
        ms = np.arange(-K, K + 1)[None, :]
        up = np.sqrt(np.maximum((ls - ms) * (ls + ms + 1), 0))
        dn = np.sqrt(np.maximum((ls + ms) * (ls - ms + 1), 0))
        Pup = np.zeros_like(P)
        Pup[:, :-1, :] = P[:, 1:, :]
        Pdn = np.zeros_like(P)
        Pdn[:, 1:, :] = P[:, :-1, :]
        DTH = 0.5 * (up[:, :, None] * Pup - dn[:, :, None] * Pdn)
        self.DTH = DTH

        phi = grid.phi
        self.E = np.exp(1j * np.arange(-K, K + 1)[:, None] * phi[None, :])
        self.weights = grid.weights
        self.dphi = 2.0 * np.pi / grid.n_phi

        # contiguous transposes so the per-order contractions run as real
        # batched matmuls (the tables are real; einsum would upcast)
        self.P_synth = np.ascontiguousarray(P.transpose(1, 2, 0))
        self.DTH_synth = np.ascontiguousarray(DTH.transpose(1, 2, 0))
        self.MPS_synth = np.ascontiguousarray(MPS.transpose(1, 2, 0))
        self.P_anal = np.ascontiguousarray(P.transpose(1, 0, 2))
        # both derivative tables stacked along the node axis: one batched
        # matmul yields the theta-derivative and (1/sin)d_phi profiles
        self.DERIV_synth = np.ascontiguousarray(
            np.concatenate([self.DTH_synth, self.MPS_synth], axis=1))


def contract_modes(table_t: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """profiles[m, i] = sum_l table[m, i, l] coeffs[l, m] for a real table,
    treating the complex coefficients as two real columns."""
    c = np.ascontiguousarray(coeffs)
    cri = c.view(np.float64).reshape(c.shape[0], c.shape[1], 2)
    out = np.matmul(table_t, cri.transpose(1, 0, 2))
    return out[..., 0] + 1j * out[..., 1]


def contract_profiles(table_a: np.ndarray, fourier: np.ndarray) -> np.ndarray:
    """coeffs[l, m] = sum_i table[m, l, i] fourier[m, i], same layout trick."""
    f = np.ascontiguousarray(fourier)
    fri = f.view(np.float64).reshape(f.shape[0], f.shape[1], 2)
    out = np.matmul(table_a, fri)
    return (out[..., 0] + 1j * out[..., 1]).transpose(1, 0)


@lru_cache(maxsize=32)
def _tables(K: int, n_theta: int, n_phi: int) -> BasisTables:
    return BasisTables(K, gauss_grid(n_theta, n_phi))


def basis_tables(K: int, grid: GridSpec) -> BasisTables:
    """Cached basis tables for (K, grid); grids must come from gauss_grid."""
    return _tables(K, grid.n_theta, grid.n_phi)


# ---------------------------------------------------------------------------
# Point evaluation and transforms
# ---------------------------------------------------------------------------

def evaluate_harmonic(wv: WaveVector, theta: float, phi: float) -> complex:
    """Y_{k,khat}(theta, phi) with orthonormal normalization and
    Condon-Shortley phase; poles are exact (Pbar_k^m(+-1) = 0 for m != 0)."""
    m = abs(wv.khat)
    x = np.array([math.cos(theta)])
    # sqrt(1 - cos^2) is exactly zero at the poles, matching the tables
    sin_t = math.sqrt(max(0.0, 1.0 - float(x[0]) ** 2))
    seed = np.array([_sectoral_prefactor(m) * sin_t ** m])
    col = _upward_degrees(wv.k, m, x, seed)
    p = float(col[wv.k, 0])
    if wv.khat < 0 and m % 2 == 1:
        p = -p
    return p * complex(math.cos(wv.khat * phi), math.sin(wv.khat * phi))


def synthesize(f: SpectralField, g: GridSpec) -> GridField:
    """Pointwise sum over modes; real-valued output for real fields."""
    t = basis_tables(f.truncation, g)
    profiles = contract_modes(t.P_synth, f.coeffs)
    values = profiles.T @ t.E
    if f.is_real_field:
        values = values.real
    return GridField(values=values, grid=g)


def analyze(u: GridField, K: int) -> SpectralField:
    """Coefficients f_k = quadrature of u * conj(Y_k) up to degree K.

    Exact (to rounding) for band-limited u resolved by the grid; the grid
    must satisfy the make_grid(K) bound so quadratic products analyze
    without aliasing."""
    g = u.grid
    if g.n_theta < (3 * K + 2) // 2 or g.n_phi < 3 * K + 1:
        raise ValueError(
            f"grid ({g.n_theta}, {g.n_phi}) below make_grid({K}) requirement"
        )
    t = basis_tables(K, g)
    is_real = not np.iscomplexobj(u.values)
    fourier = (u.values @ np.conj(t.E.T)).T * t.dphi   # (2K+1, n_theta)
    coeffs = contract_profiles(t.P_anal, fourier * t.weights[None, :])
    return SpectralField(K, coeffs, is_real_field=is_real)


def quadrature_integral(u: GridField) -> complex:
    """Surface integral of u over the sphere by the grid's quadrature."""
    g = u.grid
    return complex(np.sum(u.values.sum(axis=1) * g.weights)
                   * (2.0 * np.pi / g.n_phi))


# ---------------------------------------------------------------------------
# Snapshot file format
# ---------------------------------------------------------------------------

def save_spectral(f: SpectralField, path) -> None:
    """Write the text snapshot: one `k khat re im` line per coefficient."""
    K = f.truncation
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{SNAPSHOT_HEADER} K={K}\n")
        for k in range(K + 1):
            for m in range(-k, k + 1):
                c = f.coeffs[k, m + K]
                if abs(c) < 1e-300:
                    continue
                fh.write(f"{k} {m} {c.real:.17g} {c.imag:.17g}\n")


def load_spectral(path) -> SpectralField:
    """Read a snapshot written by save_spectral."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith(SNAPSHOT_HEADER):
            raise ValueError(f"not a zonalsphere spectral snapshot: {path}")
        try:
            K = int(header.split("K=")[1])
        except (IndexError, ValueError) as exc:
            raise ValueError(f"malformed snapshot header: {header!r}") from exc
        f = SpectralField.zeros(K)
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            k_s, m_s, re_s, im_s = line.split()
            k, m = int(k_s), int(m_s)
            if abs(m) > k or k > K:
                raise ValueError(f"snapshot entry outside triangle: {line!r}")
            f.coeffs[k, m + K] = complex(float(re_s), float(im_s))
    f.is_real_field = real_symmetry_defect(f) < 1e-12
    return f

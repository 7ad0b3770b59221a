"""Time integration of the spectral vorticity equation

    d_t w + B(w, w) + (1/eps) L w + mu A w = f

with an integrating-factor RK4 scheme: the diagonal linear part
exp(-dt (mu |k|^2 + i Omega_k / eps)) is applied exactly each step, so
neither the viscosity nor the fast rotation restricts the step size; the
classical 4-stage Runge-Kutta acts on the transformed slow variable only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import (OperatorContext, eigenvalue_array, nonlinear_B,
                        omega_array)
from .spharm import SpectralField, real_symmetry_defect

__all__ = [
    "ForcingSpec",
    "InitialConditionSpec",
    "SolverConfig",
    "TrajectoryRecord",
    "BlowUpError",
    "ConfigError",
    "step",
    "run",
    "distance",
    "default_config",
    "load_config",
    "config_to_dict",
]


class BlowUpError(RuntimeError):
    """Non-finite state encountered; carries the partial trajectory."""

    def __init__(self, t: float, record: "TrajectoryRecord | None" = None):
        super().__init__(f"blow-up detected at t={t:g}")
        self.t = t
        self.record = record


class ConfigError(ValueError):
    """Configuration file violates the schema."""


# ---------------------------------------------------------------------------
# Forcing and initial conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForcingSpec:
    """Band-limited steady or ramped forcing.

    modes holds ((k, khat), complex amplitude) pairs and must be zero-mean
    and real-field symmetric: for every non-zonal entry the mirror
    (k, -khat) must be present with amplitude (-1)^khat conj(a).
    """

    modes: tuple = ()
    profile: tuple = ("steady",)

    def __post_init__(self) -> None:
        amps = {(int(k), int(m)): complex(a) for (k, m), a in self.modes}
        if len(amps) != len(self.modes):
            raise ConfigError("duplicate forcing mode")
        for (k, m), a in amps.items():
            if k == 0:
                raise ConfigError("forcing must be zero-mean: no (0,0) mode")
            if abs(m) > k:
                raise ConfigError(f"forcing order {m} exceeds degree {k}")
            if m == 0:
                if abs(a.imag) > 1e-15 * max(1.0, abs(a)):
                    raise ConfigError(
                        f"zonal forcing amplitude at (k={k}) must be real")
                continue
            mirror = amps.get((k, -m))
            want = (-1) ** m * a.conjugate()
            if mirror is None or abs(mirror - want) > 1e-13 * max(1.0, abs(a)):
                raise ConfigError(
                    f"forcing mode (k={k}, khat={m}) lacks its real-field "
                    f"mirror (k={k}, khat={-m}) with amplitude "
                    f"(-1)^khat * conj(a)")
        if self.profile[0] not in ("steady", "ramp"):
            raise ConfigError(f"unknown forcing profile {self.profile[0]!r}")
        if self.profile[0] == "ramp":
            if len(self.profile) != 3 or not self.profile[2] > self.profile[1]:
                raise ConfigError("ramp profile needs t1 > t0")

    @classmethod
    def from_real_modes(cls, amplitudes: dict, profile: tuple = ("steady",)
                        ) -> "ForcingSpec":
        """Complete the conjugate mirrors of a {(k, khat): amp} dict."""
        full = {}
        for (k, m), a in amplitudes.items():
            a = complex(a)
            full[(k, m)] = a
            if m != 0:
                full[(k, -m)] = (-1) ** m * a.conjugate()
        items = tuple(sorted(full.items()))
        return cls(modes=items, profile=profile)

    def to_field(self, K: int) -> SpectralField:
        f = SpectralField.zeros(K, is_real_field=True)
        for (k, m), a in self.modes:
            if k > K:
                raise ConfigError(f"forcing degree {k} exceeds truncation {K}")
            f.coeffs[k, m + K] = a
        return f

    def envelope(self, t: float) -> float:
        if self.profile[0] == "steady":
            return 1.0
        _, t0, t1 = self.profile
        if t <= t0:
            return 0.0
        if t >= t1:
            return 1.0
        return (t - t0) / (t1 - t0)


@dataclass(frozen=True)
class InitialConditionSpec:
    """zero | modes(list) | random(energy, spectral slope)."""

    kind: str = "random"
    energy: float = 1.0
    slope: float = -2.0
    modes: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "modes", "random"):
            raise ConfigError(f"unknown initial-condition kind {self.kind!r}")
        if self.kind == "random" and self.energy < 0:
            raise ConfigError("initial energy must be nonnegative")

    def build(self, K: int, seed: int) -> SpectralField:
        f = SpectralField.zeros(K, is_real_field=True)
        if self.kind == "zero":
            return f
        if self.kind == "modes":
            for (k, m), a in self.modes:
                f.coeffs[k, m + K] = complex(a)
            if real_symmetry_defect(f) > 1e-13:
                raise ConfigError("initial modes violate real-field symmetry")
            f.coeffs[0, K] = 0.0
            return f
        rng = np.random.default_rng(seed)
        for k in range(1, K + 1):
            mag = float(k) ** self.slope
            f.coeffs[k, K] = mag * (1.0 if rng.random() < 0.5 else -1.0)
            for m in range(1, k + 1):
                phase = np.exp(2j * np.pi * rng.random())
                f.coeffs[k, m + K] = mag * phase
                f.coeffs[k, -m + K] = (-1) ** m * np.conj(mag * phase)
        total = float(np.sum(np.abs(f.coeffs) ** 2))
        if total > 0 and self.energy > 0:
            f.coeffs *= math.sqrt(self.energy / total)
        elif self.energy == 0:
            f.coeffs[:] = 0.0
        return f


def _default_forcing() -> ForcingSpec:
    return ForcingSpec.from_real_modes({(3, 2): 1.0, (4, 0): 0.5})


@dataclass(frozen=True)
class SolverConfig:
    K: int = 15
    mu: float = 0.1
    epsilon: float = 1.0          # rotation rate 1/epsilon; inf = no rotation
    dt: float = 0.01
    t_end: float = 200.0
    forcing: ForcingSpec = field(default_factory=_default_forcing)
    ic: InitialConditionSpec = field(default_factory=InitialConditionSpec)
    record_every: int = 10
    seed: int = 1234

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ConfigError("K must be >= 1")
        if not self.mu > 0:
            raise ConfigError("mu must be positive")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive (inf for no rotation)")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if self.record_every < 1:
            raise ConfigError("record_every must be >= 1")

    @property
    def effective_dt(self) -> float:
        """dt halved until it resolves the slow envelope when eps < dt; the
        fast phase is exact regardless, this only controls RK4 sampling."""
        dt = self.dt
        if math.isinf(self.epsilon):
            return dt
        while self.epsilon < dt:
            dt *= 0.5
        return dt


@dataclass
class TrajectoryRecord:
    """Diagnostic scalars sampled along a trajectory (all squared norms)."""

    times: np.ndarray
    energy: np.ndarray            # |w|^2
    enstrophy: np.ndarray         # |grad w|^2
    zonal_energy: np.ndarray      # |w-bar|^2
    nonzonal_energy: np.ndarray   # |w~|^2
    h1_nonzonal: np.ndarray       # |grad w~|^2
    h2: np.ndarray                # |w|_{H2}^2
    h3: np.ndarray                # |w|_{H3}^2
    final_state: SpectralField
    final_time: float
    states: list | None = None    # per-record snapshots when requested
    blew_up: bool = False

    COLUMNS = ("t", "energy", "enstrophy", "zonal_energy", "nonzonal_energy",
               "h1_nonzonal", "h2", "h3")

    def columns(self) -> tuple:
        return (self.times, self.energy, self.enstrophy, self.zonal_energy,
                self.nonzonal_energy, self.h1_nonzonal, self.h2, self.h3)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(self.COLUMNS) + "\n")
            for row in zip(*self.columns()):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# ---------------------------------------------------------------------------
# Stepping
# ---------------------------------------------------------------------------

def _stiff_diagonal(K: int, mu: float, epsilon: float) -> np.ndarray:
    """lambda_k = mu |k|^2 + i Omega_k / eps, the exactly-integrated part."""
    lam = eigenvalue_array(K)[:, None]
    om = omega_array(K)
    rot = 0.0 * om if math.isinf(epsilon) else om / epsilon
    return mu * lam + 1j * rot


class _Propagator:
    """Half- and full-step integrating factors for the diagonal part."""

    def __init__(self, K: int, mu: float, epsilon: float, dt: float):
        lam_c = _stiff_diagonal(K, mu, epsilon)
        self.half = np.exp(-0.5 * dt * lam_c)
        self.full = np.exp(-dt * lam_c)
        self.dt = dt


def _rk4_if_step(ctx: OperatorContext, prop: _Propagator, w: np.ndarray,
                 t: float, f_amp: np.ndarray | None, envelope,
                 nonlinear: bool, real: bool) -> np.ndarray:
    dt = prop.dt

    def N(coeffs: np.ndarray, tau: float) -> np.ndarray:
        if nonlinear:
            out = -nonlinear_B(ctx, SpectralField(ctx.K, coeffs, real)).coeffs
        else:
            out = np.zeros_like(coeffs)
        if f_amp is not None:
            out = out + envelope(tau) * f_amp
        return out

    a = N(w, t)
    u2 = prop.half * (w + 0.5 * dt * a)
    b = N(u2, t + 0.5 * dt)
    u3 = prop.half * w + 0.5 * dt * b
    c = N(u3, t + 0.5 * dt)
    u4 = prop.full * w + dt * prop.half * c
    d = N(u4, t + dt)
    out = prop.full * w + (dt / 6.0) * (prop.full * a
                                        + 2.0 * prop.half * (b + c) + d)
    out[0, ctx.K] = 0.0
    return out


def step(ctx: OperatorContext, state: SpectralField, t: float,
         cfg: SolverConfig, nonlinear: bool = True) -> SpectralField:
    """Advance one step of size cfg.effective_dt from time t."""
    if state.truncation != cfg.K or ctx.K != cfg.K:
        raise ValueError("state/context truncation must match the config")
    prop = _Propagator(cfg.K, cfg.mu, cfg.epsilon, cfg.effective_dt)
    f_amp = cfg.forcing.to_field(cfg.K).coeffs if cfg.forcing.modes else None
    out = _rk4_if_step(ctx, prop, state.coeffs, t, f_amp,
                       cfg.forcing.envelope, nonlinear, state.is_real_field)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(t + prop.dt)
    return SpectralField(cfg.K, out, state.is_real_field)


def _diagnostic_row(coeffs: np.ndarray, K: int, lam: np.ndarray):
    p = np.abs(coeffs) ** 2
    e_by_deg = p.sum(axis=1)
    zon_by_deg = p[:, K]
    non_by_deg = e_by_deg - zon_by_deg
    return (float(e_by_deg.sum()), float((lam * e_by_deg).sum()),
            float(zon_by_deg.sum()), float(non_by_deg.sum()),
            float((lam * non_by_deg).sum()),
            float((lam ** 2 * e_by_deg).sum()),
            float((lam ** 3 * e_by_deg).sum()))


def run(cfg: SolverConfig, *, initial_state: SpectralField | None = None,
        t_start: float = 0.0, nonlinear: bool = True,
        keep_states: bool = False, keep_states_stride: int = 1,
        ctx: OperatorContext | None = None) -> TrajectoryRecord:
    """Integrate from t_start to t_start + t_end, recording diagnostics
    every record_every steps; deterministic given the seed.  On blow-up a
    BlowUpError carrying the partial trajectory is raised.  keep_states
    stores a snapshot at every keep_states_stride-th record."""
    if ctx is None:
        ctx = OperatorContext(cfg.K)
    if initial_state is None:
        state = cfg.ic.build(cfg.K, cfg.seed)
    else:
        if initial_state.truncation != cfg.K:
            raise ValueError("initial state truncation must match config K")
        state = initial_state.copy()
    state.coeffs[0, cfg.K] = 0.0

    dt = cfg.effective_dt
    n_steps = int(round(cfg.t_end / dt))
    f_amp = cfg.forcing.to_field(cfg.K).coeffs if cfg.forcing.modes else None
    lam = eigenvalue_array(cfg.K)
    real = state.is_real_field

    rows = []
    times = []
    states = [] if keep_states else None

    def record(t: float, coeffs: np.ndarray) -> None:
        if keep_states and len(times) % max(1, keep_states_stride) == 0:
            states.append((t, SpectralField(cfg.K, coeffs.copy(), real)))
        times.append(t)
        rows.append(_diagnostic_row(coeffs, cfg.K, lam))

    def build_record(final_t: float, blew_up: bool) -> TrajectoryRecord:
        cols = list(zip(*rows)) if rows else [[]] * 7
        return TrajectoryRecord(
            times=np.asarray(times), energy=np.asarray(cols[0]),
            enstrophy=np.asarray(cols[1]), zonal_energy=np.asarray(cols[2]),
            nonzonal_energy=np.asarray(cols[3]),
            h1_nonzonal=np.asarray(cols[4]), h2=np.asarray(cols[5]),
            h3=np.asarray(cols[6]),
            final_state=SpectralField(cfg.K, state.coeffs.copy(), real),
            final_time=final_t, states=states, blew_up=blew_up)

    def N(coeffs: np.ndarray, tau: float) -> np.ndarray:
        if nonlinear:
            out = -nonlinear_B(ctx, SpectralField(cfg.K, coeffs, real)).coeffs
        else:
            out = np.zeros_like(coeffs)
        if f_amp is not None:
            out = out + cfg.forcing.envelope(tau) * f_amp
        return out

    # Anchored integrating-factor RK4: within a segment the state is kept
    # in the frame v = exp(lam_c (t - t_anchor)) w, where the stiff
    # diagonal is integrated exactly; the stage factors exp(-+lam_c tau)
    # are recomputed from the anchor each step, and one diagonal
    # exponential is applied per segment.  Algebraically identical to the
    # per-step textbook form in step(), but the linear-only rounding
    # accumulates per segment instead of per step.  Segment length is
    # capped so exp(+lam_c tau) stays far from overflow.
    lam_c = _stiff_diagonal(cfg.K, cfg.mu, cfg.epsilon)
    max_rate = float(np.max(lam_c.real))
    cap = max(1, int(40.0 / max(max_rate * dt, 1e-30)))

    record(t_start, state.coeffs)
    w = state.coeffs
    done = 0
    while done < n_steps:
        to_record = cfg.record_every - (done % cfg.record_every)
        seg = min(cap, to_record, n_steps - done)
        v = w.copy()
        em_prev = None
        ep_prev = None
        em2 = None
        for i in range(seg):
            t0 = t_start + (done + i) * dt
            em1 = np.exp(-((i + 0.5) * dt) * lam_c)
            em2 = np.exp(-((i + 1.0) * dt) * lam_c)
            ep1 = 1.0 / em1
            ep2 = 1.0 / em2
            if em_prev is None:
                k1 = N(v, t0)
            else:
                k1 = ep_prev * N(em_prev * v, t0)
            k2 = ep1 * N(em1 * (v + (0.5 * dt) * k1), t0 + 0.5 * dt)
            k3 = ep1 * N(em1 * (v + (0.5 * dt) * k2), t0 + 0.5 * dt)
            k4 = ep2 * N(em2 * (v + dt * k3), t0 + dt)
            v = v + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            em_prev, ep_prev = em2, ep2
        w = em2 * v if em2 is not None else v
        w[0, cfg.K] = 0.0
        done += seg
        t_now = t_start + done * dt
        if not np.all(np.isfinite(w)):
            state.coeffs = np.where(np.isfinite(w), w, 0.0)
            raise BlowUpError(t_now, build_record(t_now, blew_up=True))
        if done % cfg.record_every == 0 or done == n_steps:
            record(t_now, w)
    state.coeffs = w
    return build_record(t_start + n_steps * dt, blew_up=False)


def distance(a: SpectralField, b: SpectralField, s: float = 0.0) -> float:
    """Sobolev H^s distance (sum (k(k+1))^s |a_k - b_k|^2)^{1/2}."""
    if a.truncation != b.truncation:
        raise ValueError("truncation mismatch")
    d = np.abs(a.coeffs - b.coeffs) ** 2
    if s == 0.0:
        return float(math.sqrt(d.sum()))
    lam = eigenvalue_array(a.truncation)
    lam_s = np.zeros_like(lam)
    lam_s[1:] = lam[1:] ** s
    lam_s[0] = 0.0 if s > 0 else 1.0
    return float(math.sqrt((lam_s[:, None] * d).sum()))


# ---------------------------------------------------------------------------
# JSON configuration (field-for-field mirror of SolverConfig)
# ---------------------------------------------------------------------------

def default_config() -> SolverConfig:
    return SolverConfig()


def _parse_modes(entries, where: str) -> tuple:
    if not isinstance(entries, list):
        raise ConfigError(f"{where}.modes must be a list")
    out = {}
    for i, e in enumerate(entries):
        if not isinstance(e, dict):
            raise ConfigError(f"{where}.modes[{i}] must be an object")
        unknown = set(e) - {"k", "khat", "amplitude"}
        if unknown:
            raise ConfigError(
                f"unknown key(s) {sorted(unknown)} in {where}.modes[{i}]")
        try:
            k, m = int(e["k"]), int(e["khat"])
            amp = e["amplitude"]
        except KeyError as exc:
            raise ConfigError(f"{where}.modes[{i}] missing {exc}") from exc
        if isinstance(amp, (int, float)):
            a = complex(amp)
        elif isinstance(amp, list) and len(amp) == 2:
            a = complex(float(amp[0]), float(amp[1]))
        else:
            raise ConfigError(
                f"{where}.modes[{i}].amplitude must be a number or [re, im]")
        out[(k, m)] = a
    return out


def _parse_forcing(obj) -> ForcingSpec:
    if obj is None:
        return _default_forcing()
    unknown = set(obj) - {"modes", "profile"}
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in forcing")
    amps = _parse_modes(obj.get("modes", []), "forcing")
    profile: tuple = ("steady",)
    if "profile" in obj:
        p = obj["profile"]
        unknown = set(p) - {"kind", "t0", "t1"}
        if unknown:
            raise ConfigError(
                f"unknown key(s) {sorted(unknown)} in forcing.profile")
        kind = p.get("kind", "steady")
        if kind == "ramp":
            profile = ("ramp", float(p.get("t0", 0.0)), float(p.get("t1", 1.0)))
        elif kind == "steady":
            profile = ("steady",)
        else:
            raise ConfigError(f"unknown forcing profile kind {kind!r}")
    # mirrors are auto-completed; explicit inconsistent mirrors still fail
    # ForcingSpec's own validation
    completed = {}
    for (k, m), a in amps.items():
        completed[(k, m)] = a
        if m != 0 and (k, -m) not in amps:
            completed[(k, -m)] = (-1) ** m * a.conjugate()
    return ForcingSpec(modes=tuple(sorted(completed.items())), profile=profile)


def _parse_ic(obj) -> InitialConditionSpec:
    if obj is None:
        return InitialConditionSpec()
    unknown = set(obj) - {"kind", "energy", "slope", "modes"}
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in ic")
    kind = obj.get("kind", "random")
    if kind == "modes":
        amps = _parse_modes(obj.get("modes", []), "ic")
        return InitialConditionSpec(kind="modes",
                                    modes=tuple(sorted(amps.items())))
    return InitialConditionSpec(kind=kind,
                                energy=float(obj.get("energy", 1.0)),
                                slope=float(obj.get("slope", -2.0)))


_TOP_KEYS = {"K", "mu", "epsilon", "dt", "t_end", "forcing", "ic",
             "record_every", "seed"}


def load_config(source) -> SolverConfig:
    """SolverConfig from a JSON file path or a parsed dict; unknown keys
    are rejected with a message naming the offending field."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            try:
                obj = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {source}: {exc}") from exc
    else:
        obj = source
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(obj) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    eps = obj.get("epsilon", 1.0)
    if isinstance(eps, str):
        if eps.lower() in ("inf", "infinity"):
            eps = math.inf
        else:
            raise ConfigError(f"epsilon must be a number or 'inf', got {eps!r}")
    base = default_config()
    return SolverConfig(
        K=int(obj.get("K", base.K)),
        mu=float(obj.get("mu", base.mu)),
        epsilon=float(eps),
        dt=float(obj.get("dt", base.dt)),
        t_end=float(obj.get("t_end", base.t_end)),
        forcing=_parse_forcing(obj.get("forcing")),
        ic=_parse_ic(obj.get("ic")),
        record_every=int(obj.get("record_every", base.record_every)),
        seed=int(obj.get("seed", base.seed)),
    )


def config_to_dict(cfg: SolverConfig) -> dict:
    """JSON-serializable mirror of a SolverConfig (round-trips through
    load_config)."""
    forcing = {
        "modes": [{"k": k, "khat": m, "amplitude": [a.real, a.imag]}
                  for (k, m), a in cfg.forcing.modes],
        "profile": ({"kind": "steady"} if cfg.forcing.profile[0] == "steady"
                    else {"kind": "ramp", "t0": cfg.forcing.profile[1],
                          "t1": cfg.forcing.profile[2]}),
    }
    if cfg.ic.kind == "modes":
        ic = {"kind": "modes",
              "modes": [{"k": k, "khat": m, "amplitude": [a.real, a.imag]}
                        for (k, m), a in cfg.ic.modes]}
    elif cfg.ic.kind == "zero":
        ic = {"kind": "zero"}
    else:
        ic = {"kind": "random", "energy": cfg.ic.energy, "slope": cfg.ic.slope}
    return {
        "K": cfg.K, "mu": cfg.mu,
        "epsilon": "inf" if math.isinf(cfg.epsilon) else cfg.epsilon,
        "dt": cfg.dt, "t_end": cfg.t_end,
        "forcing": forcing, "ic": ic,
        "record_every": cfg.record_every, "seed": cfg.seed,
    }

"""Spectral solver and triad verification suite for the two-dimensional
vorticity equation on a rapidly rotating unit sphere."""

__version__ = "1.0.0"

from .diagnostics import (ScanResult, attractor_dim_bound, fit_epsilon_slope,
                          grashof, sobolev_norm, zonal_energy_split)
from .operators import (OperatorContext, b_omega_pairing, coriolis_L,
                        inv_dphi, inv_laplacian, jacobian_grid, l2_inner,
                        laplacian, nonlinear_B, nonzonal_project,
                        zonal_project)
from .solver import (BlowUpError, ConfigError, ForcingSpec,
                     InitialConditionSpec, SolverConfig, TrajectoryRecord,
                     default_config, distance, load_config, run, step)
from .spharm import (GridField, GridSpec, SpectralField, WaveVector, analyze,
                     eigenvalue, evaluate_harmonic, load_spectral, make_grid,
                     save_spectral, synthesize)
from .triads import (TriadCoefficient, TriadTable, b_coeff, build_table,
                     is_resonant, jacobian_coeff, jacobian_coeff_quadrature,
                     lemma_residual, rossby_frequency, s_factor)
from .wigner import (ThreeJArgs, column_swap_sign, threej_zero_row,
                     triangle_ok, wigner3j)

__all__ = [
    "__version__",
    "WaveVector", "GridSpec", "SpectralField", "GridField",
    "eigenvalue", "evaluate_harmonic", "make_grid", "synthesize", "analyze",
    "save_spectral", "load_spectral",
    "ThreeJArgs", "triangle_ok", "wigner3j", "threej_zero_row",
    "column_swap_sign",
    "TriadCoefficient", "TriadTable", "s_factor", "jacobian_coeff",
    "jacobian_coeff_quadrature", "b_coeff", "is_resonant", "lemma_residual",
    "build_table", "rossby_frequency",
    "OperatorContext", "laplacian", "inv_laplacian", "coriolis_L",
    "zonal_project", "nonzonal_project", "inv_dphi", "jacobian_grid",
    "nonlinear_B", "b_omega_pairing", "l2_inner",
    "SolverConfig", "ForcingSpec", "InitialConditionSpec", "TrajectoryRecord",
    "BlowUpError", "ConfigError", "step", "run", "distance",
    "default_config", "load_config",
    "sobolev_norm", "zonal_energy_split", "grashof", "attractor_dim_bound",
    "fit_epsilon_slope", "ScanResult",
]

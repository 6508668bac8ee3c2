//! Numerical laboratory for one-dimensional Burgers flow with an added
//! order-lambda fractional dissipation term, built around a half-line
//! grid that keeps the origin on a cell interface so that sign-type
//! jumps are represented exactly.
//!
//! The crate provides the discrete nonlocal operator (quadrature and
//! spectral paths), a vanishing-viscosity solver for odd stationary
//! profiles with a unit jump at the origin, a monotone finite-volume
//! evolution scheme, and the diagnostic battery (weak residuals, trace
//! extraction, one-sided slope monitors, entropy audits) used to tell
//! distinct weak solutions apart.

pub mod constants;
pub mod conv;
pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod quad;
pub mod spectral;
pub mod stationary;

pub use diagnostics::{
    barrier_decay_check, exterior_l2_bound_check, jump_battery, l1_operator_bound_check,
    nonuniqueness_certificate, oleinik_violation, origin_mean_square, smooth_battery,
    trace_free_battery, translation_constant, translation_continuity_check, weak_residual,
    weak_residual_regularized, window_function, AdmissibilityReport, BarrierReport,
    CertificateTolerances, ExteriorBoundRow, OleinikViolation, OperatorBoundRow, Parity,
    ReferenceOperator, TestFunction, TraceSquareEstimate, TranslationReport, TranslationRow,
};
pub use error::{Error, Result};
pub use evolution::{
    entropy_audit, evolve, godunov_flux, max_forward_slope, oleinik_max_slope, stable_dt, step,
    AuditBump, AuditReport, AuditRow, EntropyPair, EvolutionConfig, EvolutionState, OleinikReport,
    Trajectory,
};
pub use grid::{FullField, GridSpec, Norms, OddField};
pub use io::{
    format_float, read_odd_field, render_audit, render_energy_record, render_full_field,
    render_kernel, render_odd_field, render_solution, render_sweep_manifest, solution_file_name,
    write_audit, write_full_field, write_kernel, write_odd_field, write_solution, write_sweep,
    write_trajectory,
};
pub use kernel::{
    kernel_constant, reverse_max_principle, ApplyPath, Extension, FractionalKernel,
    MaxPrincipleReport, MaxPrincipleVerdict,
};
pub use spectral::{apply_spectral, SpectralApply};
pub use stationary::{
    dissipation_monitor, energy_functional, fixed_point_solve, load_vector, solve_linearized,
    triangle_lift, viscosity_sweep, SmoothClamp, SmoothCutoff, SolutionFlags, StationaryConfig,
    StationaryOperator, StationarySolution, SweepResult, SweepSettings, TruncationProfiles,
};

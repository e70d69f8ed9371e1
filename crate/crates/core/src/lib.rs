//! Numerical laboratory for a two-species competitive Keller-Segel
//! chemotaxis system on an interval.
//!
//! * [`model`]: parameters, the constant coexistence state, kinetics.
//! * [`linstab`]: per-mode linearization, steady/Hopf thresholds, Hopf
//!   onset data and wave-mode selection.
//! * [`solver`]: conservative IMEX finite-volume simulation.
//! * [`diagnostics`]: Lyapunov functional, spectra, periods, residuals.

pub mod diagnostics;
pub mod error;
pub mod linstab;
pub mod model;
pub mod solver;
pub mod tridiag;

pub use diagnostics::{
    cosine_spectrum, dissipation_check, estimate_period, lyapunov, phase_trajectory,
    steady_state_residual, DissipationCheck, Field, LyapunovReport, SpectrumReport,
};
pub use error::{Error, Result};
pub use linstab::{
    analyze_mode, char_coeffs, chi_bar1, chi_h, chi_s, classify_case, critical_chi,
    hopf_eigenvector, mode_eigenvalues, no_hopf_check_growth_free, stability_matrix,
    transversality, BifurcationKind, BifurcationPrediction, CharCoeffs, Classification,
    ModeAnalysis, ThresholdCase, WaveMode,
};
pub use model::{equilibrium, kinetics, mass_condition_2d, Equilibrium, ModelParams};
pub use solver::{
    equilibrium_state, initial_perturbation, random_smooth, Grid1D, Perturbation, ProbeSeries,
    Recorder, RunOutput, SimState, Solver, SolverConfig,
};

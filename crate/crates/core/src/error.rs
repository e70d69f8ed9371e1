use thiserror::Error;

/// Errors raised by the analysis, simulation and diagnostic routines.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("competition is too strong for a positive equilibrium: a1*a2 = {0} >= 1")]
    DegenerateCompetition(f64),
    #[error("chemotaxis rates must be positive here (chi = {chi}, xi = {xi})")]
    NonpositiveChemotaxis { chi: f64, xi: f64 },
    #[error("threshold denominator is non-positive ({0}) at mode {1}")]
    DegenerateDenominator(f64, u32),
    #[error("thresholds at mode {k} satisfy neither ordering (chiS = {chi_s}, chiH = {chi_h}, chiBar1 = {chi_bar1})")]
    DegenerateOrdering {
        k: u32,
        chi_s: f64,
        chi_h: f64,
        chi_bar1: f64,
    },
    #[error("thresholds still decreasing at kmax = {0}; the minimum may lie beyond it")]
    KmaxTooSmall(u32),
    #[error("mode {0} has no purely imaginary eigenvalue pair (chiS < chiH)")]
    NotHopfMode(u32),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("J decomposition disagrees with the threshold difference at mode {0}")]
    InconsistentDecomposition(u32),
    #[error("initial data is not strictly positive: {0}")]
    NonpositiveInitialData(String),
    #[error("advective CFL number {cfl} exceeds {limit} with {substeps} substeps")]
    CflViolation {
        cfl: f64,
        limit: f64,
        substeps: usize,
    },
    #[error("density became negative ({value}) in cell {cell} at t = {t}")]
    PositivityLoss { t: f64, cell: usize, value: f64 },
    #[error("density is not strictly positive in cell {0}")]
    NonpositiveDensity(usize),
    #[error("no oscillation detected: {0}")]
    NoOscillation(String),
    #[error("crossing spacings vary too much (coefficient of variation {0})")]
    IrregularOscillation(f64),
    #[error("no probe recorded at x = {0}")]
    UnknownProbe(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

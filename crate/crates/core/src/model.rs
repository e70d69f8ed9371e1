//! Model parameters, the constant coexistence state and the reaction terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients of the two-species competitive chemotaxis system on `(0, length)`.
///
/// `chi` and `xi` may be any real number so that sweeps can cross zero;
/// routines that need positive sensitivities check it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub d1: f64,
    pub d2: f64,
    pub chi: f64,
    pub xi: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub a1: f64,
    pub a2: f64,
    pub lambda: f64,
    #[serde(rename = "L")]
    pub length: f64,
}

impl ModelParams {
    /// Checks every parameter invariant, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("d1", self.d1),
            ("d2", self.d2),
            ("chi", self.chi),
            ("xi", self.xi),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("a1", self.a1),
            ("a2", self.a2),
            ("lambda", self.lambda),
            ("L", self.length),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        for (name, value) in [
            ("d1", self.d1),
            ("d2", self.d2),
            ("lambda", self.lambda),
            ("L", self.length),
        ] {
            if value <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0 (got {value})"
                )));
            }
        }
        for (name, value) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if value < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0 (got {value})"
                )));
            }
        }
        for (name, value) in [("a1", self.a1), ("a2", self.a2)] {
            if !(0.0..1.0).contains(&value) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1) (got {value})"
                )));
            }
        }
        Ok(())
    }

    pub fn is_growth_free(&self) -> bool {
        self.mu1 == 0.0 && self.mu2 == 0.0
    }

    /// Exchanges the roles of the two species.
    pub fn swapped(&self) -> Self {
        Self {
            d1: self.d2,
            d2: self.d1,
            chi: self.xi,
            xi: self.chi,
            mu1: self.mu2,
            mu2: self.mu1,
            a1: self.a2,
            a2: self.a1,
            ..*self
        }
    }
}

/// The positive constant steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub ubar: f64,
    pub vbar: f64,
    pub wbar: f64,
}

/// Unique positive constant steady state for weak competition.
pub fn equilibrium(p: &ModelParams) -> Result<Equilibrium> {
    let det = 1.0 - p.a1 * p.a2;
    if det <= 0.0 {
        return Err(Error::DegenerateCompetition(p.a1 * p.a2));
    }
    if !(p.lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 0 (got {})",
            p.lambda
        )));
    }
    if p.a1 >= 1.0 || p.a2 >= 1.0 || p.a1 < 0.0 || p.a2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "competition levels must lie in [0, 1) (got a1 = {}, a2 = {})",
            p.a1, p.a2
        )));
    }
    let ubar = (1.0 - p.a1) / det;
    let vbar = (1.0 - p.a2) / det;
    let wbar = (2.0 - p.a1 - p.a2) / (p.lambda * det);
    Ok(Equilibrium { ubar, vbar, wbar })
}

/// Lotka-Volterra competition rates `(f_u, f_v)`.
#[inline]
pub fn kinetics(u: f64, v: f64, p: &ModelParams) -> (f64, f64) {
    (
        p.mu1 * (1.0 - u - p.a1 * v) * u,
        p.mu2 * (1.0 - p.a2 * u - v) * v,
    )
}

/// Total-population condition under which the planar growth-free system
/// has global bounded solutions: `(chi/d1) m_u + (xi/d2) m_v < 4 pi`.
pub fn mass_condition_2d(mass_u: f64, mass_v: f64, p: &ModelParams) -> Result<bool> {
    if p.chi <= 0.0 || p.xi <= 0.0 {
        return Err(Error::NonpositiveChemotaxis {
            chi: p.chi,
            xi: p.xi,
        });
    }
    if mass_u < 0.0 || mass_v < 0.0 {
        return Err(Error::PreconditionViolated(
            "total populations must be non-negative".into(),
        ));
    }
    let weighted = p.chi / p.d1 * mass_u + p.xi / p.d2 * mass_v;
    Ok(weighted < 4.0 * std::f64::consts::PI)
}

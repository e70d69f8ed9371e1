//! Measurements taken on simulated states: the Lyapunov functional of the
//! growth-free system and its dissipation, cosine-mode spectra, oscillation
//! periods, stationary residuals and phase-space trajectories.
//!
//! All integrals use the midpoint rule on cell averages; gradients are face
//! differences with zero boundary faces, matching the solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{kinetics, ModelParams};
use crate::solver::{ProbeSeries, SimState};

/// Lyapunov functional and its five summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    #[serde(rename = "F")]
    pub f: f64,
    pub grad_term: f64,
    pub decay_term: f64,
    pub entropy_u: f64,
    pub entropy_v: f64,
    pub coupling_term: f64,
    /// Dissipation rate evaluated on this state alone (no `w_t` term).
    pub dissipation_rhs: f64,
}

fn cell_width(state: &SimState, p: &ModelParams) -> f64 {
    p.length / state.len() as f64
}

fn check_chemotaxis(p: &ModelParams) -> Result<()> {
    if p.chi <= 0.0 || p.xi <= 0.0 {
        return Err(Error::NonpositiveChemotaxis {
            chi: p.chi,
            xi: p.xi,
        });
    }
    Ok(())
}

fn check_densities(state: &SimState) -> Result<()> {
    if let Some(i) = state
        .u
        .iter()
        .zip(&state.v)
        .position(|(&u, &v)| !(u > 0.0 && v > 0.0))
    {
        return Err(Error::NonpositiveDensity(i));
    }
    Ok(())
}

/// Sum over interior faces of `(d grad(s) - sens * s_face * grad(w))^2 / (sens * s_face) dx`.
fn flux_dissipation(s: &[f64], w: &[f64], diff: f64, sens: f64, dx: f64) -> f64 {
    s.windows(2)
        .zip(w.windows(2))
        .map(|(sp, wp)| {
            let face = 0.5 * (sp[0] + sp[1]);
            let flux = diff * (sp[1] - sp[0]) / dx - sens * face * (wp[1] - wp[0]) / dx;
            flux * flux / (sens * face) * dx
        })
        .sum()
}

pub fn lyapunov(state: &SimState, p: &ModelParams) -> Result<LyapunovReport> {
    check_chemotaxis(p)?;
    check_densities(state)?;
    let dx = cell_width(state, p);
    let grad_term = 0.5
        * state
            .w
            .windows(2)
            .map(|w| {
                let g = (w[1] - w[0]) / dx;
                g * g
            })
            .sum::<f64>()
        * dx;
    let decay_term = 0.5 * p.lambda * state.w.iter().map(|w| w * w).sum::<f64>() * dx;
    let entropy = |s: &[f64]| s.iter().map(|&x| x * x.ln() - x).sum::<f64>() * dx;
    let entropy_u = p.d1 / p.chi * entropy(&state.u);
    let entropy_v = p.d2 / p.xi * entropy(&state.v);
    let coupling_term = -state
        .u
        .iter()
        .zip(&state.v)
        .zip(&state.w)
        .map(|((u, v), w)| (u + v) * w)
        .sum::<f64>()
        * dx;
    let dissipation_rhs = -(flux_dissipation(&state.u, &state.w, p.d1, p.chi, dx)
        + flux_dissipation(&state.v, &state.w, p.d2, p.xi, dx));
    Ok(LyapunovReport {
        f: grad_term + decay_term + entropy_u + entropy_v + coupling_term,
        grad_term,
        decay_term,
        entropy_u,
        entropy_v,
        coupling_term,
        dissipation_rhs,
    })
}

/// Discrete check of the energy identity between two states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipationCheck {
    pub df_dt: f64,
    pub rhs: f64,
    pub mismatch: f64,
}

/// Compares the finite-difference rate of the functional with the
/// dissipation evaluated at the midpoint state.
pub fn dissipation_check(prev: &SimState, next: &SimState, p: &ModelParams) -> Result<DissipationCheck> {
    if !p.is_growth_free() {
        return Err(Error::PreconditionViolated(
            "the energy identity needs vanishing growth rates".into(),
        ));
    }
    if prev.len() != next.len() {
        return Err(Error::PreconditionViolated("states live on different grids".into()));
    }
    let dt = next.t - prev.t;
    if !(dt > 0.0) {
        return Err(Error::PreconditionViolated("next.t must exceed prev.t".into()));
    }
    let f_prev = lyapunov(prev, p)?.f;
    let f_next = lyapunov(next, p)?.f;
    let dx = cell_width(prev, p);
    let mid = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect() };
    let (u, v, w) = (mid(&prev.u, &next.u), mid(&prev.v, &next.v), mid(&prev.w, &next.w));
    let wt2 = prev
        .w
        .iter()
        .zip(&next.w)
        .map(|(a, b)| {
            let r = (b - a) / dt;
            r * r
        })
        .sum::<f64>()
        * dx;
    let rhs = -(wt2
        + flux_dissipation(&u, &w, p.d1, p.chi, dx)
        + flux_dissipation(&v, &w, p.d2, p.xi, dx));
    let df_dt = (f_next - f_prev) / dt;
    Ok(DissipationCheck {
        df_dt,
        rhs,
        mismatch: (df_dt - rhs).abs() / (rhs.abs() + 1e-12),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    U,
    V,
    W,
}

impl SimState {
    pub fn field(&self, which: Field) -> &[f64] {
        match which {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::W => &self.w,
        }
    }
}

/// Cosine-mode coefficients `a_0..a_K` of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub coefficients: Vec<f64>,
    pub dominant_mode: usize,
    pub dominant_amplitude: f64,
}

pub fn cosine_spectrum(state: &SimState, field: Field, max_mode: usize, length: f64) -> Result<SpectrumReport> {
    let values = state.field(field);
    let n = values.len();
    if max_mode < 1 || max_mode > n / 2 {
        return Err(Error::InvalidParameter(format!(
            "spectrum needs 1 <= K <= n/2 (K = {max_mode}, n = {n})"
        )));
    }
    let dx = length / n as f64;
    let mut coefficients = Vec::with_capacity(max_mode + 1);
    coefficients.push(values.iter().sum::<f64>() * dx / length);
    for k in 1..=max_mode {
        let kappa = k as f64 * std::f64::consts::PI / length;
        let sum: f64 = values
            .iter()
            .enumerate()
            .map(|(i, f)| f * (kappa * (i as f64 + 0.5) * dx).cos())
            .sum();
        coefficients.push(2.0 / length * sum * dx);
    }
    let (dominant_mode, dominant_amplitude) = coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| (k, a.abs()))
        .fold((1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(SpectrumReport {
        coefficients,
        dominant_mode,
        dominant_amplitude,
    })
}

/// Largest allowed coefficient of variation of the crossing spacings.
pub const MAX_SPACING_CV: f64 = 0.2;

/// Period from the mean spacing of upward mean-crossings after `cutoff`.
///
/// A crossing counts once the signal climbs from below `mean - band` to above
/// `mean + band` (`band` is a fifth of the standard deviation); its time is
/// the interpolated last crossing of the mean on the way up. The band keeps
/// additive noise from registering as extra crossings.
pub fn estimate_period(series: &[(f64, f64)], cutoff: f64) -> Result<f64> {
    let kept: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| *t >= cutoff).collect();
    if kept.len() < 4 {
        return Err(Error::NoOscillation("too few samples after the cutoff".into()));
    }
    let n = kept.len() as f64;
    let mean = kept.iter().map(|s| s.1).sum::<f64>() / n;
    let (lo, hi) = kept
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.1), b.max(s.1)));
    let amplitude = 0.5 * (hi - lo);
    if amplitude <= 1e-8 * mean.abs() || amplitude == 0.0 {
        return Err(Error::NoOscillation(format!(
            "amplitude {amplitude:e} is negligible against mean {mean:e}"
        )));
    }
    let std = (kept.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / n).sqrt();
    let band = 0.2 * std;

    let mut crossings = Vec::new();
    let mut armed = false;
    let mut last_up: Option<f64> = None;
    for pair in kept.windows(2) {
        let (t0, y0) = (pair[0].0, pair[0].1 - mean);
        let (t1, y1) = (pair[1].0, pair[1].1 - mean);
        if y0 < -band {
            armed = true;
        }
        if y0 < 0.0 && y1 >= 0.0 {
            last_up = Some(t0 + (t1 - t0) * (-y0) / (y1 - y0));
        }
        if armed && y1 > band {
            if let Some(t) = last_up {
                crossings.push(t);
            }
            armed = false;
        }
    }
    if crossings.len() < 3 {
        return Err(Error::NoOscillation(format!(
            "only {} upward crossings",
            crossings.len()
        )));
    }
    let spacings: Vec<f64> = crossings.windows(2).map(|c| c[1] - c[0]).collect();
    let m = spacings.len() as f64;
    let period = spacings.iter().sum::<f64>() / m;
    let sd = (spacings.iter().map(|s| (s - period).powi(2)).sum::<f64>() / m).sqrt();
    let cv = sd / period;
    if cv > MAX_SPACING_CV {
        return Err(Error::IrregularOscillation(cv));
    }
    Ok(period)
}

/// Max-norm residual of the stationary equations, discretized exactly as
/// in the solver (upwind chemotactic flux, three-point diffusion, zero
/// boundary fluxes). Kinetic terms are included, so a zero residual marks a
/// discrete steady state of the full system.
pub fn steady_state_residual(state: &SimState, p: &ModelParams) -> f64 {
    let n = state.len();
    let dx = cell_width(state, p);
    let grad: Vec<f64> = (0..=n)
        .map(|f| {
            if f == 0 || f == n {
                0.0
            } else {
                (state.w[f] - state.w[f - 1]) / dx
            }
        })
        .collect();
    let diffusion_flux = |s: &[f64], f: usize, d: f64| -> f64 {
        if f == 0 || f == n {
            0.0
        } else {
            d * (s[f] - s[f - 1]) / dx
        }
    };
    let advective_flux = |s: &[f64], f: usize, sens: f64| -> f64 {
        if f == 0 || f == n {
            return 0.0;
        }
        let speed = sens * grad[f];
        speed * if speed > 0.0 { s[f - 1] } else { s[f] }
    };
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let (fu, fv) = kinetics(state.u[i], state.v[i], p);
        let ru = (diffusion_flux(&state.u, i + 1, p.d1) - diffusion_flux(&state.u, i, p.d1)) / dx
            - (advective_flux(&state.u, i + 1, p.chi) - advective_flux(&state.u, i, p.chi)) / dx
            + fu;
        let rv = (diffusion_flux(&state.v, i + 1, p.d2) - diffusion_flux(&state.v, i, p.d2)) / dx
            - (advective_flux(&state.v, i + 1, p.xi) - advective_flux(&state.v, i, p.xi)) / dx
            + fv;
        let rw = (diffusion_flux(&state.w, i + 1, 1.0) - diffusion_flux(&state.w, i, 1.0)) / dx
            - p.lambda * state.w[i]
            + state.u[i]
            + state.v[i];
        worst = worst.max(ru.abs()).max(rv.abs()).max(rw.abs());
    }
    worst
}

/// The `(u, v, w)` history recorded at the probe placed at `x`.
pub fn phase_trajectory(probes: &[ProbeSeries], x: f64) -> Result<Vec<[f64; 3]>> {
    let tol = 1e-9 * (1.0 + x.abs());
    probes
        .iter()
        .find(|p| (p.x_requested - x).abs() <= tol || (p.x - x).abs() <= tol)
        .map(|p| p.samples.iter().map(|s| [s.u, s.v, s.w]).collect())
        .ok_or(Error::UnknownProbe(x))
}

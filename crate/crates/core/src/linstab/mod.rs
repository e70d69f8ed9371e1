//! Linearization about the constant state: per-mode stability matrices,
//! characteristic coefficients, the steady/Hopf thresholds, Hopf onset data
//! and wave-mode selection.

mod cubic;

pub use cubic::Cubic;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{equilibrium, Equilibrium, ModelParams};

/// Default number of wave modes scanned by [`critical_chi`].
pub const DEFAULT_KMAX: u32 = 50;

/// Relative tolerance for reporting near-violations of the nondegeneracy
/// conditions.
pub const DEGENERACY_RTOL: f64 = 1e-6;

/// Relative tolerance below which two candidate thresholds are a tie.
pub const TIE_RTOL: f64 = 1e-12;

/// Neumann eigenmode `cos(k pi x / L)` with `q = (k pi / L)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveMode {
    pub k: u32,
    pub q: f64,
}

impl WaveMode {
    pub fn new(k: u32, length: f64) -> Self {
        let kappa = k as f64 * PI / length;
        Self { k, q: kappa * kappa }
    }
}

/// Coefficients of `s^3 + alpha2 s^2 + alpha1 s + alpha0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffs {
    pub alpha0: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl CharCoeffs {
    pub fn cubic(&self) -> Cubic {
        Cubic {
            c0: self.alpha0,
            c1: self.alpha1,
            c2: self.alpha2,
        }
    }

    pub fn scale(&self) -> f64 {
        self.cubic().scale()
    }

    /// Routh-Hurwitz: all roots in the open left half plane.
    pub fn routh_hurwitz_stable(&self) -> bool {
        self.alpha0 > 0.0 && self.alpha1 > 0.0 && self.alpha1 * self.alpha2 - self.alpha0 > 0.0
    }
}

/// Which of the two thresholds comes first along the chi axis.
///
/// Exactly one ordering holds whenever `chiS != chiH`; `chiBar1` (the root
/// of `alpha1`) always lies strictly between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdCase {
    /// `chiH < chiBar1 < chiS`: `alpha1 > 0` at `chiH`, so the mode can
    /// undergo a Hopf bifurcation.
    HopfFirst,
    /// `chiS < chiBar1 < chiH`: no purely imaginary pair ever appears.
    SteadyFirst,
}

impl std::fmt::Display for ThresholdCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdCase::HopfFirst => write!(f, "HopfFirst"),
            ThresholdCase::SteadyFirst => write!(f, "SteadyFirst"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Stable,
    UnstableReal,
    UnstableOscillatory,
    MarginalZero,
    MarginalImaginary,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Everything the linearization says about one wave mode at one chi.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAnalysis {
    pub chi: f64,
    pub mode: WaveMode,
    pub coeffs: CharCoeffs,
    pub eigenvalues: [Complex64; 3],
    pub classification: Classification,
    pub routh_hurwitz_stable: bool,
    pub chi_s: f64,
    pub chi_h: f64,
    pub chi_bar1: f64,
    /// `None` when the thresholds are too close to order reliably.
    pub case: Option<ThresholdCase>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BifurcationKind {
    SteadyState,
    Hopf,
    None,
}

impl std::fmt::Display for BifurcationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A near-violation of the nondegeneracy assumptions, or a tie in the
/// mode selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Degeneracy {
    /// `chiS(k)` and `chiH(k)` agree to [`DEGENERACY_RTOL`].
    SteadyHopfCoincide { k: u32 },
    /// `chiH(k)` and `chiH(j)` agree to [`DEGENERACY_RTOL`].
    HopfValuesCoincide { k: u32, j: u32 },
    /// Two candidate minima agree to [`TIE_RTOL`]; the smaller mode won.
    TiedMinimum { k: u32, j: u32 },
}

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degeneracy::SteadyHopfCoincide { k } => write!(f, "chiS==chiH at k={k}"),
            Degeneracy::HopfValuesCoincide { k, j } => write!(f, "chiH(k={k})==chiH(k={j})"),
            Degeneracy::TiedMinimum { k, j } => write!(f, "tied minimum between k={k} and k={j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeThresholds {
    pub k: u32,
    pub chi_s: f64,
    pub chi_h: f64,
    pub case: Option<ThresholdCase>,
}

/// Critical chemotaxis value, the selected mode and its onset data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPrediction {
    pub chi0: f64,
    pub k0: u32,
    pub kind: BifurcationKind,
    /// `2 pi / zeta0` for a Hopf onset.
    pub period: Option<f64>,
    pub zeta0: Option<f64>,
    /// Eigenvector for `+i zeta0`, third component equal to one.
    pub eigvec: Option<[Complex64; 3]>,
    pub degeneracy_flags: Vec<Degeneracy>,
    pub per_k: Vec<ModeThresholds>,
}

/// Hopf crossing speed: derivative of the real eigenvalue and of the real
/// part of the critical pair with respect to chi at `chiH`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transversality {
    pub sigma1_prime: f64,
    pub eta_prime: f64,
}

fn eq_or_panic(p: &ModelParams) -> Equilibrium {
    // callers hold validated parameters; the equilibrium always exists then
    equilibrium(p).expect("parameters admit no positive equilibrium")
}

/// The 3x3 matrix governing perturbations proportional to `cos(k pi x / L)`.
pub fn stability_matrix(p: &ModelParams, chi: f64, mode: WaveMode) -> [[f64; 3]; 3] {
    let e = eq_or_panic(p);
    let q = mode.q;
    [
        [
            -p.d1 * q - p.mu1 * e.ubar,
            -p.mu1 * p.a1 * e.ubar,
            chi * e.ubar * q,
        ],
        [
            -p.mu2 * p.a2 * e.vbar,
            -p.d2 * q - p.mu2 * e.vbar,
            p.xi * e.vbar * q,
        ],
        [1.0, 1.0, -q - p.lambda],
    ]
}

pub fn char_coeffs(p: &ModelParams, chi: f64, mode: WaveMode) -> CharCoeffs {
    let Equilibrium { ubar, vbar, .. } = eq_or_panic(p);
    let q = mode.q;
    let cross = p.a1 * p.a2 * p.mu1 * p.mu2 * ubar * vbar;
    let uu = p.d1 * q + p.mu1 * ubar;
    let vv = p.d2 * q + p.mu2 * vbar;
    let ww = q + p.lambda;

    let alpha2 = (p.d1 + p.d2 + 1.0) * q + p.mu1 * ubar + p.mu2 * vbar + p.lambda;
    let alpha1 = ww * ((p.d1 + p.d2) * q + p.mu1 * ubar + p.mu2 * vbar) - cross
        - (chi * ubar + p.xi * vbar) * q
        + uu * vv;
    let alpha0 = -chi * ubar * q * (p.d2 * q + (1.0 - p.a2) * p.mu2 * vbar)
        - p.xi * vbar * q * (p.d1 * q + (1.0 - p.a1) * p.mu1 * ubar)
        - cross * ww
        + uu * vv * ww;
    CharCoeffs {
        alpha0,
        alpha1,
        alpha2,
    }
}

/// Roots of the characteristic cubic, sorted by descending real part
/// (ties by descending imaginary part).
pub fn mode_eigenvalues(coeffs: &CharCoeffs) -> [Complex64; 3] {
    coeffs.cubic().roots()
}

/// Steady-state threshold: the unique root of `alpha0(chi, k)`.
pub fn chi_s(p: &ModelParams, mode: WaveMode) -> Result<f64> {
    let Equilibrium { ubar, vbar, .. } = eq_or_panic(p);
    let q = mode.q;
    let denom = p.d2 * ubar * q * q + (1.0 - p.a2) * p.mu2 * ubar * vbar * q;
    if !(denom > 0.0) {
        return Err(Error::DegenerateDenominator(denom, mode.k));
    }
    let a3 = (p.d1 * q + p.mu1 * ubar) * (p.d2 * q + p.mu2 * vbar)
        - p.a1 * p.a2 * p.mu1 * p.mu2 * ubar * vbar;
    let num = a3 * (q + p.lambda)
        - p.xi * (p.d1 * vbar * q * q + (1.0 - p.a1) * p.mu1 * ubar * vbar * q);
    Ok(num / denom)
}

/// Hopf threshold: the unique root of `alpha1 alpha2 - alpha0`.
pub fn chi_h(p: &ModelParams, mode: WaveMode) -> Result<f64> {
    let Equilibrium { ubar, vbar, .. } = eq_or_panic(p);
    let q = mode.q;
    let a1 = q + p.lambda;
    let a2 = (p.d1 + p.d2) * q + p.mu1 * ubar + p.mu2 * vbar;
    let a3 = (p.d1 * q + p.mu1 * ubar) * (p.d2 * q + p.mu2 * vbar)
        - p.a1 * p.a2 * p.mu1 * p.mu2 * ubar * vbar;
    let b1 = (p.d1 + 1.0) * ubar * q * q + (p.lambda + p.mu1 * ubar + p.a2 * p.mu2 * vbar) * ubar * q;
    let b2 = (p.d2 + 1.0) * vbar * q * q + (p.lambda + p.a1 * p.mu1 * ubar + p.mu2 * vbar) * vbar * q;
    if !(b1 > 0.0) {
        return Err(Error::DegenerateDenominator(b1, mode.k));
    }
    Ok((a1 * a2 * a2 + a1 * a1 * a2 + a2 * a3 - p.xi * b2) / b1)
}

/// The unique root of `alpha1(chi, k)`.
pub fn chi_bar1(p: &ModelParams, mode: WaveMode) -> Result<f64> {
    let Equilibrium { ubar, vbar, .. } = eq_or_panic(p);
    let q = mode.q;
    if !(q > 0.0) {
        return Err(Error::PreconditionViolated("chi_bar1 needs q > 0".into()));
    }
    let num = (q + p.lambda) * ((p.d1 + p.d2) * q + p.mu1 * ubar + p.mu2 * vbar)
        + (p.d1 * q + p.mu1 * ubar) * (p.d2 * q + p.mu2 * vbar)
        - p.xi * vbar * q
        - p.a1 * p.a2 * p.mu1 * p.mu2 * ubar * vbar;
    Ok(num / (ubar * q))
}

/// Decides which threshold comes first and checks the accompanying sign
/// pattern of `alpha1` at both thresholds.
pub fn classify_case(p: &ModelParams, mode: WaveMode) -> Result<ThresholdCase> {
    let s = chi_s(p, mode)?;
    let h = chi_h(p, mode)?;
    let b = chi_bar1(p, mode)?;
    order_thresholds(p, mode, s, h, b)
}

fn order_thresholds(
    p: &ModelParams,
    mode: WaveMode,
    s: f64,
    h: f64,
    b: f64,
) -> Result<ThresholdCase> {
    let degenerate = || Error::DegenerateOrdering {
        k: mode.k,
        chi_s: s,
        chi_h: h,
        chi_bar1: b,
    };
    let scale = 1f64.max(s.abs()).max(h.abs()).max(b.abs());
    let tol = 1e-9 * scale;
    if (s - h).abs() <= tol {
        return Err(degenerate());
    }
    let case = if h < b && b < s {
        ThresholdCase::HopfFirst
    } else if s < b && b < h {
        ThresholdCase::SteadyFirst
    } else if h < s && b >= h - tol && b <= s + tol {
        ThresholdCase::HopfFirst
    } else if s < h && b >= s - tol && b <= h + tol {
        ThresholdCase::SteadyFirst
    } else {
        return Err(degenerate());
    };

    let a1_at_h = char_coeffs(p, h, mode).alpha1;
    let a1_at_s = char_coeffs(p, s, mode).alpha1;
    let a1_tol = 1e-9 * char_coeffs(p, h, mode).scale().max(char_coeffs(p, s, mode).scale());
    let consistent = match case {
        ThresholdCase::HopfFirst => a1_at_h > -a1_tol && a1_at_s < a1_tol,
        ThresholdCase::SteadyFirst => a1_at_s > -a1_tol && a1_at_h < a1_tol,
    };
    if !consistent {
        return Err(degenerate());
    }
    Ok(case)
}

/// Marginal band for classifying eigenvalues on the imaginary axis.
pub fn marginal_tolerance(coeffs: &CharCoeffs) -> f64 {
    1e-9 * (1.0 + coeffs.alpha2.abs())
}

fn classify(eigs: &[Complex64; 3], tol: f64) -> Classification {
    let lead = eigs[0];
    if lead.re < -tol {
        Classification::Stable
    } else if lead.re > tol {
        if eigs.iter().any(|z| z.re > tol && z.im.abs() > tol) {
            Classification::UnstableOscillatory
        } else {
            Classification::UnstableReal
        }
    } else if eigs
        .iter()
        .any(|z| z.re.abs() <= tol && z.im.abs() > tol)
    {
        Classification::MarginalImaginary
    } else {
        Classification::MarginalZero
    }
}

pub fn analyze_mode(p: &ModelParams, chi: f64, mode: WaveMode) -> ModeAnalysis {
    let coeffs = char_coeffs(p, chi, mode);
    let eigenvalues = mode_eigenvalues(&coeffs);
    let classification = classify(&eigenvalues, marginal_tolerance(&coeffs));
    let chi_s = chi_s(p, mode).unwrap_or(f64::NAN);
    let chi_h = chi_h(p, mode).unwrap_or(f64::NAN);
    let chi_bar1 = chi_bar1(p, mode).unwrap_or(f64::NAN);
    let case = order_thresholds(p, mode, chi_s, chi_h, chi_bar1).ok();
    ModeAnalysis {
        chi,
        mode,
        coeffs,
        eigenvalues,
        classification,
        routh_hurwitz_stable: coeffs.routh_hurwitz_stable(),
        chi_s,
        chi_h,
        chi_bar1,
        case,
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Loss-of-stability value `chi0 = min_k {chiS(k), chiH(k) if chiH(k) < chiS(k)}`
/// over `k = 1..=kmax`, together with the selected mode.
///
/// Only the left-most branch can carry stable patterns, so the minimizing
/// mode is the predicted pattern.
pub fn critical_chi(p: &ModelParams, kmax: u32) -> Result<BifurcationPrediction> {
    if kmax < 1 {
        return Err(Error::InvalidParameter("kmax must be >= 1".into()));
    }
    p.validate()?;

    let mut per_k = Vec::with_capacity(kmax as usize);
    let mut flags = Vec::new();
    // (value, k, is_hopf) of the per-mode minimum
    let mut mins: Vec<(f64, u32, bool)> = Vec::with_capacity(kmax as usize);
    for k in 1..=kmax {
        let mode = WaveMode::new(k, p.length);
        let s = chi_s(p, mode)?;
        let h = chi_h(p, mode)?;
        let case = classify_case(p, mode).ok();
        if relative_gap(s, h) <= DEGENERACY_RTOL {
            flags.push(Degeneracy::SteadyHopfCoincide { k });
        }
        per_k.push(ModeThresholds {
            k,
            chi_s: s,
            chi_h: h,
            case,
        });
        if h < s {
            mins.push((h, k, true));
        } else {
            mins.push((s, k, false));
        }
    }

    for (i, a) in per_k.iter().enumerate() {
        for b in &per_k[i + 1..] {
            if a.chi_h < a.chi_s
                && b.chi_h < b.chi_s
                && relative_gap(a.chi_h, b.chi_h) <= DEGENERACY_RTOL
            {
                flags.push(Degeneracy::HopfValuesCoincide { k: a.k, j: b.k });
            }
        }
    }

    if kmax >= 2 {
        let last = mins[kmax as usize - 1].0;
        let prev = mins[kmax as usize - 2].0;
        if last < prev {
            return Err(Error::KmaxTooSmall(kmax));
        }
    }

    let Some(&(mut chi0, mut k0, mut hopf)) = mins.iter().find(|m| m.0.is_finite()) else {
        return Ok(BifurcationPrediction {
            chi0: f64::NAN,
            k0: 0,
            kind: BifurcationKind::None,
            period: None,
            zeta0: None,
            eigvec: None,
            degeneracy_flags: flags,
            per_k,
        });
    };
    for &(value, k, is_hopf) in &mins {
        if k == k0 || !value.is_finite() {
            continue;
        }
        if relative_gap(value, chi0) <= TIE_RTOL {
            flags.push(Degeneracy::TiedMinimum { k: k0, j: k });
        } else if value < chi0 {
            chi0 = value;
            k0 = k;
            hopf = is_hopf;
        }
    }

    let mut prediction = BifurcationPrediction {
        chi0,
        k0,
        kind: BifurcationKind::SteadyState,
        period: None,
        zeta0: None,
        eigvec: None,
        degeneracy_flags: flags,
        per_k,
    };
    if hopf {
        let mode = WaveMode::new(k0, p.length);
        let alpha1 = char_coeffs(p, chi0, mode).alpha1;
        if alpha1 > 0.0 {
            let zeta0 = alpha1.sqrt();
            prediction.kind = BifurcationKind::Hopf;
            prediction.zeta0 = Some(zeta0);
            prediction.period = Some(2.0 * PI / zeta0);
            prediction.eigvec = hopf_eigenvector(p, mode).ok();
        } else {
            return Err(Error::DegenerateOrdering {
                k: k0,
                chi_s: prediction.per_k[k0 as usize - 1].chi_s,
                chi_h: chi0,
                chi_bar1: chi_bar1(p, mode)?,
            });
        }
    }
    Ok(prediction)
}

/// Solves `(m - sigma I) x = 0` for `x = (x1, x2, 1)` using the first two
/// rows. Works for left eigenvectors too when given the transpose.
pub fn eigenvector_with_unit_last(m: &[[f64; 3]; 3], sigma: Complex64) -> Option<[Complex64; 3]> {
    let a = Complex64::new(m[0][0], 0.0) - sigma;
    let b = Complex64::new(m[0][1], 0.0);
    let c = Complex64::new(m[1][0], 0.0);
    let d = Complex64::new(m[1][1], 0.0) - sigma;
    let r0 = Complex64::new(-m[0][2], 0.0);
    let r1 = Complex64::new(-m[1][2], 0.0);
    let det = a * d - b * c;
    if det.norm() == 0.0 {
        return None;
    }
    let x1 = (r0 * d - b * r1) / det;
    let x2 = (a * r1 - c * r0) / det;
    Some([x1, x2, Complex64::new(1.0, 0.0)])
}

/// Eigenvector of the stability matrix at `chiH(k)` for `+i zeta0`,
/// normalized so the chemical component is one.
pub fn hopf_eigenvector(p: &ModelParams, mode: WaveMode) -> Result<[Complex64; 3]> {
    if classify_case(p, mode)? != ThresholdCase::HopfFirst {
        return Err(Error::NotHopfMode(mode.k));
    }
    let h = chi_h(p, mode)?;
    let zeta0 = char_coeffs(p, h, mode).alpha1.sqrt();
    let m = stability_matrix(p, h, mode);
    eigenvector_with_unit_last(&m, Complex64::new(0.0, zeta0)).ok_or(Error::NotHopfMode(mode.k))
}

/// Closed-form crossing speed of the eigenvalues at `chiH(k)`.
pub fn transversality(p: &ModelParams, mode: WaveMode) -> Result<Transversality> {
    if classify_case(p, mode)? != ThresholdCase::HopfFirst {
        return Err(Error::NotHopfMode(mode.k));
    }
    let Equilibrium { ubar, vbar, .. } = eq_or_panic(p);
    let q = mode.q;
    let h = chi_h(p, mode)?;
    let coeffs = char_coeffs(p, h, mode);
    let zeta0_sq = coeffs.alpha1;
    let sigma1_prime = -ubar
        * q
        * ((p.d1 + 1.0) * q + p.mu1 * ubar + p.mu2 * p.a2 * vbar + p.lambda)
        / (zeta0_sq + coeffs.alpha2 * coeffs.alpha2);
    let eta_prime = -0.5 * sigma1_prime;
    debug_assert!(sigma1_prime < 0.0 && eta_prime > 0.0);
    Ok(Transversality {
        sigma1_prime,
        eta_prime,
    })
}

/// The `J1`, `J2`, `J3` decomposition of `chiS - chiH = (J1 + J2) / J3`
/// for the growth-free system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFreeSplit {
    pub j1: f64,
    pub j2: f64,
    pub j3: f64,
}

pub fn growth_free_split(p: &ModelParams, mode: WaveMode) -> GrowthFreeSplit {
    let Equilibrium { ubar, vbar, .. } = eq_or_panic(p);
    let (d1, d2, q, lam, xi) = (p.d1, p.d2, mode.q, p.lambda, p.xi);
    let j1 = (d1 * d2 * (q + lam) - xi * d1 * vbar) * ((d1 + 1.0) * q + lam)
        + xi * d2 * vbar * ((d2 + 1.0) * q + lam);
    let j2 = -(d1 + d2).powi(2) * d2 * q * (q + lam)
        - (d1 + d2) * d2 * (q + lam).powi(2)
        - (d1 + d2) * d1 * d2 * d2 * q * q;
    let j3 = (d1 + 1.0) * d2 * ubar * q + lam * d2 * ubar;
    GrowthFreeSplit { j1, j2, j3 }
}

/// Upper bound on `xi` keeping `chiS(k) > 0` in the growth-free system.
pub fn growth_free_xi_bound(p: &ModelParams, mode: WaveMode) -> f64 {
    let e = eq_or_panic(p);
    p.d2 * (mode.q + p.lambda) / e.vbar
}

/// Confirms `chiS(k) < chiH(k)` for every `k <= kmax` in the growth-free
/// system, cross-checking each comparison against the sign of `J1 + J2`.
pub fn no_hopf_check_growth_free(p: &ModelParams, kmax: u32) -> Result<bool> {
    if !p.is_growth_free() {
        return Err(Error::PreconditionViolated(
            "growth rates must vanish".into(),
        ));
    }
    let mut all = true;
    for k in 1..=kmax {
        let mode = WaveMode::new(k, p.length);
        let bound = growth_free_xi_bound(p, mode);
        if !(p.xi > 0.0 && p.xi < bound) {
            return Err(Error::PreconditionViolated(format!(
                "xi = {} outside (0, {bound}) at k = {k}",
                p.xi
            )));
        }
        let split = growth_free_split(p, mode);
        let gap = chi_s(p, mode)? - chi_h(p, mode)?;
        let sum = split.j1 + split.j2;
        let scale = split.j1.abs().max(split.j2.abs()).max(f64::MIN_POSITIVE);
        let agree = (sum / split.j3 - gap).abs()
            <= 1e-9 * (scale / split.j3).max(gap.abs()).max(1.0);
        if !(split.j3 > 0.0) || !agree {
            return Err(Error::InconsistentDecomposition(k));
        }
        if !(sum < 0.0 && gap < 0.0) {
            all = false;
        }
    }
    Ok(all)
}

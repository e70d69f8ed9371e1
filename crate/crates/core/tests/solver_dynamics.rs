mod common;

use chemopattern::linstab::eigenvector_with_unit_last;
use chemopattern::*;
use common::*;
use num_complex::Complex64;
use std::f64::consts::PI;

fn growth_free() -> ModelParams {
    ModelParams {
        d1: 1.0,
        d2: 1.0,
        chi: 1.0,
        xi: 1.0,
        mu1: 0.0,
        mu2: 0.0,
        a1: 0.5,
        a2: 0.5,
        lambda: 1.0,
        length: 6.0,
    }
}

fn transpose(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Seeds mode k along the real part of the leading eigenvector and reads
/// the growth of its left-eigenvector projection.
fn measured_growth_rate(chi: f64, k: u32) -> (f64, f64) {
    let p = hopf_params(chi);
    let mode = WaveMode::new(k, p.length);
    let sigma = mode_eigenvalues(&char_coeffs(&p, chi, mode))[0];
    let m = stability_matrix(&p, chi, mode);
    let right = eigenvector_with_unit_last(&m, sigma).unwrap();
    let left = eigenvector_with_unit_last(&transpose(m), sigma).unwrap();

    let grid = Grid1D::new(p.length, 300).unwrap();
    let e = equilibrium(&p).unwrap();
    let eps = 1e-6;
    let shape: Vec<f64> = grid.centers.iter().map(|&x| (k as f64 * PI * x / p.length).cos()).collect();
    let field = |base: f64, c: Complex64| shape.iter().map(|s| base + eps * c.re * s).collect::<Vec<_>>();
    let ic = SimState {
        t: 0.0,
        u: field(e.ubar, right[0]),
        v: field(e.vbar, right[1]),
        w: field(e.wbar, right[2]),
    };
    let cfg = SolverConfig { dt: 0.002, t_end: 12.0, ..Default::default() };
    let out = Solver::new(p, grid, cfg)
        .unwrap()
        .run(ic, &Recorder { snapshot_every: Some(0.25), probe_x: vec![] })
        .unwrap();
    let pts: Vec<(f64, f64)> = out
        .snapshots
        .iter()
        .filter(|s| s.t >= 2.0)
        .map(|s| {
            let a = |f| cosine_spectrum(s, f, k as usize, p.length).unwrap().coefficients[k as usize];
            let c = left[0] * a(Field::U) + left[1] * a(Field::V) + left[2] * a(Field::W);
            (s.t, c.norm().ln())
        })
        .collect();
    (least_squares_slope(&pts), sigma.re)
}

#[test]
fn linear_growth_rates_match_eigenvalues() {
    let h = chi_h(&hopf_params(0.0), WaveMode::new(2, 6.0)).unwrap();
    for factor in [0.8, 1.2] {
        let (measured, predicted) = measured_growth_rate(factor * h, 2);
        assert!(
            (measured - predicted).abs() <= 0.1 * predicted.abs(),
            "chi = {factor} chiH: measured {measured}, predicted {predicted}"
        );
    }
}

fn u_at_t1(n: usize, dt: f64) -> Vec<f64> {
    let p = hopf_params(80.0);
    let grid = Grid1D::new(p.length, n).unwrap();
    let ic = initial_perturbation(&p, &grid, 0.001, Perturbation::RawCosine(2.0 * PI)).unwrap();
    let cfg = SolverConfig { dt, t_end: 1.0, ..Default::default() };
    Solver::new(p, grid, cfg).unwrap().run(ic, &Recorder::default()).unwrap().final_state.u
}

fn restrict(fine: &[f64], n: usize) -> Vec<f64> {
    let r = fine.len() / n;
    fine.chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn combined_refinement_is_at_least_first_order() {
    let reference = u_at_t1(1200, 0.0025);
    let coarse = u_at_t1(150, 0.02);
    let fine = u_at_t1(300, 0.01);
    let e_coarse = max_diff(&coarse, &restrict(&reference, 150));
    let e_fine = max_diff(&fine, &restrict(&reference, 300));
    assert!((e_coarse / e_fine).log2() >= 1.0, "errors {e_coarse:e} -> {e_fine:e}");
}

#[test]
fn growth_free_run_dissipates_and_conserves() {
    let p = growth_free();
    let grid = Grid1D::new(p.length, 300).unwrap();
    let ic = random_smooth(&p, &grid, 0.05, 3).unwrap();
    let (mu0, mv0) = ic.masses(grid.dx);
    let cfg = SolverConfig { dt: 0.01, t_end: 50.0, ..Default::default() };
    let mut prev = ic.clone();
    let mut f_prev = lyapunov(&prev, &p).unwrap().f;
    let (mut num, mut den) = (0.0, 0.0);
    let mut worst_mass = 0.0f64;
    Solver::new(p, grid.clone(), cfg)
        .unwrap()
        .run_with(ic, &Recorder::default(), |s| {
            if s.t == 0.0 {
                return;
            }
            let f = lyapunov(s, &p).unwrap().f;
            assert!(f <= f_prev + 1e-6 * (1.0 + f_prev.abs()), "F rose at t={}", s.t);
            let d = dissipation_check(&prev, s, &p).unwrap();
            assert!(d.rhs <= 0.0);
            let h = s.t - prev.t;
            num += (d.df_dt - d.rhs).abs() * h;
            den += d.rhs.abs() * h;
            let (mu, mv) = s.masses(grid.dx);
            worst_mass = worst_mass.max(((mu - mu0) / mu0).abs()).max(((mv - mv0) / mv0).abs());
            f_prev = f;
            prev = s.clone();
        })
        .unwrap();
    assert!(num / den <= 0.1, "time-averaged mismatch {}", num / den);
    assert!(worst_mass <= 1e-12, "mass drift {worst_mass:e}");
}

#[test]
fn kinetics_alone_attract_to_equilibrium() {
    let mut p = hopf_params(0.0);
    p.xi = 0.0;
    let grid = Grid1D::new(p.length, 300).unwrap();
    let ic = random_smooth(&p, &grid, 0.2, 42).unwrap();
    let cfg = SolverConfig { t_end: 200.0, ..Default::default() };
    let out = Solver::new(p, grid, cfg).unwrap().run(ic, &Recorder::default()).unwrap();
    let e = equilibrium(&p).unwrap();
    let s = &out.final_state;
    let dist = s.u.iter().map(|x| (x - e.ubar).abs())
        .chain(s.v.iter().map(|x| (x - e.vbar).abs()))
        .chain(s.w.iter().map(|x| (x - e.wbar).abs()))
        .fold(0.0, f64::max);
    assert!(dist < 1e-4, "distance {dist:e}");
}

#[test]
fn growth_free_run_settles_to_a_stationary_pattern() {
    let mut p = growth_free();
    p.chi = 1.5;
    p.xi = 1.5;
    let grid = Grid1D::new(p.length, 300).unwrap();
    let ic = initial_perturbation(&p, &grid, 0.01, Perturbation::Mode(1)).unwrap();
    let cfg = SolverConfig { t_end: 1000.0, ..Default::default() };
    let out = Solver::new(p, grid, cfg)
        .unwrap()
        .run(ic, &Recorder { snapshot_every: Some(250.0), probe_x: vec![] })
        .unwrap();
    let residuals: Vec<f64> = out.snapshots.iter().map(|s| steady_state_residual(s, &p)).collect();
    let last = *residuals.last().unwrap();
    assert!(last < 1e-6, "residuals {residuals:?}");
    let spread = out.final_state.u.iter().fold(0.0f64, |m, x| m.max(*x))
        - out.final_state.u.iter().fold(f64::INFINITY, |m, x| m.min(*x));
    assert!(spread > 1e-2, "expected a nonconstant state, spread {spread}");
}

/// Mode-2 Hopf run long enough for the mode-2 oscillation to saturate: the
/// cos 2 pi x initial data is orthogonal to every mode but multiples of 12
/// on this grid, so mode 2 grows from round-off.
#[test]
fn hopf_saturated_oscillation() {
    let p = hopf_params(80.0);
    let grid = Grid1D::new(p.length, 300).unwrap();
    let ic = initial_perturbation(&p, &grid, 0.001, Perturbation::RawCosine(2.0 * PI)).unwrap();
    let cfg = SolverConfig { t_end: 250.0, max_substeps: 1024, ..Default::default() };
    let out = Solver::new(p, grid, cfg)
        .unwrap()
        .run(ic, &Recorder { snapshot_every: Some(0.5), probe_x: vec![0.0, 1.0, 5.0, 6.0] })
        .unwrap();
    let cutoff = 150.0;
    let late: Vec<&SimState> = out.snapshots.iter().filter(|s| s.t > cutoff).collect();
    let mode2 = late
        .iter()
        .filter(|s| cosine_spectrum(s, Field::U, 10, p.length).unwrap().dominant_mode == 2)
        .count();
    assert!(mode2 as f64 >= 0.8 * late.len() as f64, "{mode2} of {}", late.len());

    let series: Vec<(f64, f64)> = out.probes[0].samples.iter().map(|s| (s.t, s.u)).collect();
    let period = estimate_period(&series, 100.0).unwrap();
    assert!((period - 8.0).abs() <= 0.15 * 8.0, "period {period}");

    let busiest = late.iter().map(|s| steady_state_residual(s, &p)).fold(0.0, f64::max);
    assert!(busiest > 1e-3);

    // states one period apart nearly coincide on the orbit
    let orbit = phase_trajectory(&out.probes, 1.0).unwrap();
    let times: Vec<f64> = out.probes[1].samples.iter().map(|s| s.t).collect();
    let start = times.iter().position(|&t| t >= 200.0).unwrap();
    let shift = (period / 0.05).round() as usize;
    let window = &orbit[start..];
    let dist = |a: &[f64; 3], b: &[f64; 3]| (0..3).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
    let mut diameter = 0.0f64;
    for (i, a) in window.iter().enumerate().step_by(5) {
        for b in window[i..].iter().step_by(5) {
            diameter = diameter.max(dist(a, b));
        }
    }
    let gap = window
        .iter()
        .zip(&window[shift.min(window.len())..])
        .map(|(a, b)| dist(a, b))
        .fold(0.0, f64::max);
    assert!(gap <= 0.1 * diameter, "gap {gap} vs diameter {diameter}");
}

#[test]
fn even_initial_data_stays_mirror_symmetric() {
    let p = hopf_params(80.0);
    let grid = Grid1D::new(p.length, 300).unwrap();
    let ic = initial_perturbation(&p, &grid, 0.001, Perturbation::Mode(2)).unwrap();
    let cfg = SolverConfig { t_end: 10.0, max_substeps: 1024, ..Default::default() };
    let out = Solver::new(p, grid, cfg)
        .unwrap()
        .run(ic, &Recorder { snapshot_every: None, probe_x: vec![1.01, 4.99] })
        .unwrap();
    for (a, b) in out.probes[0].samples.iter().zip(&out.probes[1].samples) {
        assert!((a.u - b.u).abs() <= 1e-12 && (a.w - b.w).abs() <= 1e-12, "t = {}", a.t);
    }
}

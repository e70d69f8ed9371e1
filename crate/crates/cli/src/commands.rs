use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chemopattern::{
    analyze_mode, cosine_spectrum, critical_chi, estimate_period, initial_perturbation, lyapunov,
    mass_condition_2d, random_smooth, steady_state_residual, BifurcationPrediction, Field,
    ModelParams, Recorder, RunOutput, SimState, Solver, WaveMode,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{IcKind, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Model(#[from] chemopattern::Error),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown sweep parameter '{0}' (expected chi, xi, mu, L, d1 or d2)")]
    UnknownParameter(String),
}

pub type Result<T> = std::result::Result<T, CommandError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CommandError + '_ {
    move |e| CommandError::Io {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Creates files under one directory and deletes them again unless the
/// command finishes.
struct OutputSet {
    dir: PathBuf,
    written: Vec<PathBuf>,
    done: bool,
}

impl OutputSet {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
            done: false,
        })
    }

    fn csv(&mut self, name: &str, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(csv_err(&path))?;
        w.write_record(header).map_err(csv_err(&path))?;
        for row in rows {
            w.write_record(&row).map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        Ok(path)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }

    fn finish(mut self) -> Vec<PathBuf> {
        self.done = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.done {
            for path in &self.written {
                let _ = fs::remove_file(path);
            }
        }
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub const ANALYZE_COLUMNS: [&str; 12] = [
    "chi",
    "k",
    "q",
    "alpha0",
    "alpha1",
    "alpha2",
    "chiS",
    "chiH",
    "chiBar1",
    "case",
    "classification",
    "eig_re_max",
];

pub fn analyze_rows(model: &ModelParams, chis: &[f64], kmax: u32) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for &chi in chis {
        for k in 1..=kmax {
            let a = analyze_mode(model, chi, WaveMode::new(k, model.length));
            rows.push(vec![
                num(chi),
                k.to_string(),
                num(a.mode.q),
                num(a.coeffs.alpha0),
                num(a.coeffs.alpha1),
                num(a.coeffs.alpha2),
                num(a.chi_s),
                num(a.chi_h),
                num(a.chi_bar1),
                a.case.map_or("degenerate".to_string(), |c| c.to_string()),
                a.classification.to_string(),
                num(a.eigenvalues[0].re),
            ]);
        }
    }
    rows
}

/// Writes `analyze.csv`: one row per chi value and mode.
pub fn analyze(cfg: &RunConfig, chis: &[f64], kmax: u32) -> Result<PathBuf> {
    let mut out = OutputSet::new(&cfg.output.directory)?;
    let path = out.csv("analyze.csv", &strings(&ANALYZE_COLUMNS), analyze_rows(&cfg.model, chis, kmax))?;
    out.finish();
    Ok(path)
}

pub fn critical_json(pred: &BifurcationPrediction) -> serde_json::Value {
    let mut v = json!({
        "chi0": pred.chi0,
        "k0": pred.k0,
        "kind": pred.kind.to_string(),
        "degeneracy_flags": pred.degeneracy_flags.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "per_k": pred.per_k.iter().map(|m| json!({
            "k": m.k,
            "chiS": m.chi_s,
            "chiH": m.chi_h,
            "case": m.case.map(|c| c.to_string()),
        })).collect::<Vec<_>>(),
    });
    if let Some(period) = pred.period {
        v["period"] = json!(period);
    }
    if let Some(zeta0) = pred.zeta0 {
        v["zeta0"] = json!(zeta0);
    }
    if let Some(e) = pred.eigvec {
        v["eigvec"] = json!({
            "re": e.iter().map(|c| c.re).collect::<Vec<_>>(),
            "im": e.iter().map(|c| c.im).collect::<Vec<_>>(),
        });
    }
    v
}

/// Writes `critical.json` and returns the prediction.
pub fn critical(cfg: &RunConfig, kmax: u32) -> Result<(BifurcationPrediction, serde_json::Value)> {
    let pred = critical_chi(&cfg.model, kmax)?;
    let value = critical_json(&pred);
    let mut out = OutputSet::new(&cfg.output.directory)?;
    out.json("critical.json", &value)?;
    out.finish();
    Ok((pred, value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub dominant_mode: usize,
    pub period: Option<f64>,
    pub mass_drift: f64,
    pub final_residual: f64,
    pub runtime: f64,
}

impl Summary {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "dominant_mode": self.dominant_mode,
            "period": self.period.map_or(json!("none"), |p| json!(p)),
            "mass_drift": self.mass_drift,
            "runtime": self.runtime,
        })
    }
}

pub fn initial_state(cfg: &RunConfig) -> Result<SimState> {
    let grid = cfg.grid()?;
    Ok(match cfg.ic.kind {
        IcKind::RandomSmooth => random_smooth(&cfg.model, &grid, cfg.ic.amplitude, cfg.ic.seed)?,
        _ => initial_perturbation(&cfg.model, &grid, cfg.ic.amplitude, cfg.perturbation())?,
    })
}

fn relative_mass_drift(a: &SimState, b: &SimState, dx: f64) -> f64 {
    let (u0, v0) = a.masses(dx);
    let (u1, v1) = b.masses(dx);
    ((u1 - u0) / u0).abs().max(((v1 - v0) / v0).abs())
}

/// Runs the configured simulation without writing anything.
pub fn run_simulation(cfg: &RunConfig, snapshots: bool) -> Result<(RunOutput, SimState, Summary)> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = cfg.grid()?;
    let ic = initial_state(cfg)?;
    let recorder = Recorder {
        snapshot_every: snapshots.then_some(cfg.output.snapshot_every),
        probe_x: cfg.output.probe_x.clone(),
    };
    let mut solver = Solver::new(cfg.model, grid.clone(), cfg.solver_config())?;
    let out = solver.run(ic.clone(), &recorder)?;
    let spectrum = cosine_spectrum(&out.final_state, Field::U, cfg.output.spectrum_k, cfg.model.length)?;
    let period = out.probes.first().and_then(|p| {
        let series: Vec<(f64, f64)> = p.samples.iter().map(|s| (s.t, s.u)).collect();
        estimate_period(&series, 0.4 * cfg.time.t_end).ok()
    });
    let summary = Summary {
        dominant_mode: spectrum.dominant_mode,
        period,
        mass_drift: relative_mass_drift(&ic, &out.final_state, grid.dx),
        final_residual: steady_state_residual(&out.final_state, &cfg.model),
        runtime: start.elapsed().as_secs_f64(),
    };
    Ok((out, ic, summary))
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:012.4}.csv")
}

/// Writes snapshots, probe series, the u spectrum, the Lyapunov record for
/// growth-free models and `summary.json`.
pub fn simulate(cfg: &RunConfig, log: &mut impl Write) -> Result<Summary> {
    let (run, ic, summary) = run_simulation(cfg, true)?;
    let grid = cfg.grid()?;
    let p = &cfg.model;

    if p.is_growth_free() {
        let (mu, mv) = ic.masses(grid.dx);
        let _ = match mass_condition_2d(mu, mv, p) {
            Ok(ok) => writeln!(
                log,
                "2D mass condition (chi/d1) M_u + (xi/d2) M_v < 4 pi: {}",
                if ok { "satisfied" } else { "violated" }
            ),
            Err(e) => writeln!(log, "2D mass condition not applicable: {e}"),
        };
    }

    let mut out = OutputSet::new(&cfg.output.directory)?;
    let xyz = strings(&["x", "u", "v", "w"]);
    for s in &run.snapshots {
        let rows = (0..s.len()).map(|i| vec![num(grid.centers[i]), num(s.u[i]), num(s.v[i]), num(s.w[i])]);
        out.csv(&snapshot_name(s.t), &xyz, rows)?;
    }

    let mut header = vec!["t".to_string()];
    for pr in &run.probes {
        for f in ["u", "v", "w"] {
            header.push(format!("{f}@{}", pr.x));
        }
    }
    let samples = run.probes.first().map_or(0, |p| p.samples.len());
    let rows = (0..samples).map(|i| {
        let mut row = vec![num(run.probes[0].samples[i].t)];
        for pr in &run.probes {
            let s = &pr.samples[i];
            row.extend([num(s.u), num(s.v), num(s.w)]);
        }
        row
    });
    out.csv("probes.csv", &header, rows)?;

    let k = cfg.output.spectrum_k;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=k).map(|j| format!("a_{j}")))
        .collect();
    let mut rows = Vec::with_capacity(run.snapshots.len());
    for s in &run.snapshots {
        let sp = cosine_spectrum(s, Field::U, k, p.length)?;
        rows.push(
            std::iter::once(num(s.t))
                .chain(sp.coefficients[1..].iter().map(|&a| num(a)))
                .collect(),
        );
    }
    out.csv("spectrum.csv", &header, rows)?;

    if p.is_growth_free() && p.chi > 0.0 && p.xi > 0.0 {
        let header = strings(&[
            "t",
            "F",
            "grad_term",
            "decay_term",
            "entropy_u",
            "entropy_v",
            "coupling_term",
        ]);
        let mut rows = Vec::with_capacity(run.snapshots.len());
        for s in &run.snapshots {
            let l = lyapunov(s, p)?;
            rows.push(vec![
                num(s.t),
                num(l.f),
                num(l.grad_term),
                num(l.decay_term),
                num(l.entropy_u),
                num(l.entropy_v),
                num(l.coupling_term),
            ]);
        }
        out.csv("lyapunov.csv", &header, rows)?;
    }

    out.json("summary.json", &summary.to_json())?;
    out.finish();
    Ok(summary)
}

pub fn apply_parameter(cfg: &RunConfig, name: &str, value: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    let m = &mut c.model;
    match name {
        "chi" => m.chi = value,
        "xi" => m.xi = value,
        "mu" => {
            m.mu1 = value;
            m.mu2 = value;
        }
        "L" => m.length = value,
        "d1" => m.d1 = value,
        "d2" => m.d2 = value,
        _ => return Err(CommandError::UnknownParameter(name.to_string())),
    }
    Ok(c)
}

pub const SWEEP_COLUMNS: [&str; 7] = [
    "value",
    "status",
    "dominant_mode",
    "period",
    "oscillatory",
    "final_residual",
    "mass_drift",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: std::result::Result<Summary, String>,
}

impl SweepRow {
    pub fn oscillatory(&self) -> bool {
        matches!(&self.outcome, Ok(s) if s.period.is_some())
    }

    fn record(&self) -> Vec<String> {
        match &self.outcome {
            Ok(s) => vec![
                num(self.value),
                "ok".into(),
                s.dominant_mode.to_string(),
                s.period.map_or("none".into(), num),
                s.period.is_some().to_string(),
                num(s.final_residual),
                num(s.mass_drift),
            ],
            Err(e) => vec![
                num(self.value),
                format!("error: {e}"),
                String::new(),
                "none".into(),
                "false".into(),
                String::new(),
                String::new(),
            ],
        }
    }
}

/// One simulation per value, `jobs` at a time; failures become rows.
pub fn sweep_rows(cfg: &RunConfig, name: &str, values: &[f64], jobs: usize) -> Result<Vec<SweepRow>> {
    let configs = values
        .iter()
        .map(|&v| apply_parameter(cfg, name, v))
        .collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    Ok(pool.install(|| {
        configs
            .par_iter()
            .zip(values)
            .map(|(c, &value)| SweepRow {
                value,
                outcome: run_simulation(c, false).map(|r| r.2).map_err(|e| e.to_string()),
            })
            .collect()
    }))
}

/// Writes `sweep.csv`.
pub fn sweep(cfg: &RunConfig, name: &str, values: &[f64], jobs: usize) -> Result<(PathBuf, Vec<SweepRow>)> {
    let rows = sweep_rows(cfg, name, values, jobs)?;
    let mut out = OutputSet::new(&cfg.output.directory)?;
    let path = out.csv("sweep.csv", &strings(&SWEEP_COLUMNS), rows.iter().map(SweepRow::record))?;
    out.finish();
    Ok((path, rows))
}

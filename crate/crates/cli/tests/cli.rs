use std::fs;
use std::path::Path;

use chemopattern_cli::commands::{self, analyze_rows, apply_parameter, SWEEP_COLUMNS};
use chemopattern_cli::config::{parse_config, serialize_config, IcKind, RunConfig};
use proptest::prelude::*;

const HOPF: &str = include_str!("../../../configs/hopf_mode2.toml");
const GROWTH_FREE: &str = include_str!("../../../configs/growth_free.toml");

fn config(text: &str, dir: &Path) -> RunConfig {
    let mut cfg = parse_config(text).unwrap();
    cfg.output.directory = dir.to_path_buf();
    cfg
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn analyze_table() {
    let cfg = parse_config(HOPF).unwrap();
    let rows = analyze_rows(&cfg.model, &[0.0, 70.0, 80.0], 10);
    assert_eq!(rows.len(), 30);
    let class = |chi: &str, k: &str| {
        rows.iter()
            .find(|r| r[0] == chi && r[1] == k)
            .map(|r| r[10].clone())
            .unwrap()
    };
    assert!(rows.iter().filter(|r| r[0] == "0.0").all(|r| r[10] == "Stable"));
    assert_eq!(class("70.0", "2"), "UnstableOscillatory");
    // past chi ~ 75 the mode-2 pair has split into two real roots
    assert_eq!(class("80.0", "2"), "UnstableReal");
    assert_eq!(class("80.0", "3"), "UnstableOscillatory");

    let gf = parse_config(GROWTH_FREE).unwrap();
    for r in analyze_rows(&gf.model, &[1.0], 20) {
        let (s, h): (f64, f64) = (r[6].parse().unwrap(), r[7].parse().unwrap());
        assert!(s < h, "row {r:?}");
    }
}

#[test]
fn analyze_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(HOPF, dir.path());
    let path = commands::analyze(&cfg, &[80.0], 5).unwrap();
    let (header, rows) = read_csv(&path);
    assert_eq!(header, commands::ANALYZE_COLUMNS);
    assert_eq!(rows.len(), 5);
}

#[test]
fn critical_records() {
    let dir = tempfile::tempdir().unwrap();
    let (pred, json) = commands::critical(&config(HOPF, dir.path()), 20).unwrap();
    assert_eq!(json["kind"], "Hopf");
    assert_eq!(json["k0"], 2);
    assert!((json["chi0"].as_f64().unwrap() - 63.2).abs() < 0.5);
    assert!((json["period"].as_f64().unwrap() - 8.0).abs() < 0.8);
    assert_eq!(json["eigvec"]["re"][2], 1.0);
    assert_eq!(json["per_k"].as_array().unwrap().len(), 20);
    let on_disk = fs::read_to_string(dir.path().join("critical.json")).unwrap();
    assert_eq!(on_disk.trim_end(), serde_json::to_string_pretty(&json).unwrap());
    assert_eq!(pred.k0, 2);

    let (_, json) = commands::critical(&config(GROWTH_FREE, dir.path()), 50).unwrap();
    assert_eq!(json["kind"], "SteadyState");
    assert!(json.get("period").is_none());

    let mut small = config(HOPF, dir.path());
    small.model.length = 0.1;
    let (_, json) = commands::critical(&small, 50).unwrap();
    assert_eq!((json["kind"].as_str(), json["k0"].as_u64()), (Some("SteadyState"), Some(1)));
}

#[test]
fn simulate_growth_free_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(GROWTH_FREE, dir.path());
    cfg.time.t_end = 5.0;
    cfg.output.probe_x = vec![0.0, 3.0];
    let mut log = Vec::new();
    let summary = commands::simulate(&cfg, &mut log).unwrap();
    let log = String::from_utf8(log).unwrap();
    assert!(log.contains("2D mass condition"), "{log}");
    assert!(summary.mass_drift <= 1e-12);

    let snapshots: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("snapshot_t"))
        .collect();
    assert_eq!(snapshots.len(), 6);
    assert!(snapshots.contains(&"snapshot_t0000005.0000.csv".to_string()));

    let (header, rows) = read_csv(&dir.path().join("probes.csv"));
    assert_eq!(header.len(), 7);
    assert_eq!(rows.len(), 501);

    let (header, rows) = read_csv(&dir.path().join("spectrum.csv"));
    assert_eq!(header.len(), 11);
    assert_eq!(rows.len(), 6);

    let (header, rows) = read_csv(&dir.path().join("lyapunov.csv"));
    assert_eq!(header[1], "F");
    let f: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(f.windows(2).all(|w| w[1] <= w[0] + 1e-6 * (1.0 + w[0].abs())));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    for key in ["dominant_mode", "period", "mass_drift", "runtime"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn zero_amplitude_gives_constant_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(HOPF, dir.path());
    cfg.ic.amplitude = 0.0;
    cfg.time.t_end = 3.0;
    let summary = commands::simulate(&cfg, &mut std::io::sink()).unwrap();
    assert_eq!(summary.period, None);
    let (_, rows) = read_csv(&dir.path().join("snapshot_t0000003.0000.csv"));
    assert!(rows.iter().all(|r| r[1] == rows[0][1] && r[3] == rows[0][3]));
    let text = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(text.contains("\"period\": \"none\""));
}

#[test]
fn failed_simulation_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(HOPF, dir.path());
    cfg.model.chi = 300.0;
    cfg.ic.amplitude = 0.2;
    cfg.time.max_substeps = 1;
    assert!(commands::simulate(&cfg, &mut std::io::sink()).is_err());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn simulation_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut cfg = config(GROWTH_FREE, dir.path());
        cfg.time.t_end = 2.0;
        commands::simulate(&cfg, &mut std::io::sink()).unwrap();
    }
    for name in ["probes.csv", "spectrum.csv", "snapshot_t0000002.0000.csv", "lyapunov.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn sweep_rows_follow_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(HOPF, dir.path());
    cfg.time.t_end = 2.0;
    cfg.time.max_substeps = 64;
    let (path, rows) = commands::sweep(&cfg, "mu", &[0.5, 1.0, 1.5], 2).unwrap();
    assert_eq!(rows.len(), 3);
    let (header, csv_rows) = read_csv(&path);
    assert_eq!(header, SWEEP_COLUMNS);
    assert_eq!(csv_rows.len(), 3);

    let (_, rows) = commands::sweep(&cfg, "d1", &[5.0, -1.0], 1).unwrap();
    assert!(rows[0].outcome.is_ok());
    assert!(rows[1].outcome.is_err());
    let (_, csv_rows) = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(csv_rows.len(), 2);
    assert!(csv_rows[1][1].starts_with("error"));

    let (path, rows) = commands::sweep(&cfg, "chi", &[], 1).unwrap();
    assert!(rows.is_empty());
    assert_eq!(fs::read_to_string(path).unwrap().lines().count(), 1);

    assert!(apply_parameter(&cfg, "tau", 1.0).is_err());
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        (0.01f64..100.0, 0.01f64..100.0, -50.0f64..500.0, -5.0f64..5.0),
        (0.0f64..5.0, 0.0f64..5.0, 0.0f64..0.99, 0.0f64..0.99, 0.01f64..100.0, 0.5f64..50.0),
        (proptest::option::of(16usize..2000), 1e-4f64..0.5, 0.1f64..500.0, 0.05f64..1.0, 1usize..4096),
        (0usize..3, 0.0f64..0.1, 1u32..40, -50.0f64..50.0, 0u64..=i64::MAX as u64),
        (0.01f64..10.0, proptest::collection::vec(0.0f64..0.5, 0..4), 1usize..8),
    )
        .prop_map(|(m1, m2, t, ic, out)| {
            let text = format!(
                "[model]\nd1 = {:?}\nd2 = {:?}\nchi = {:?}\nxi = {:?}\nmu1 = {:?}\nmu2 = {:?}\na1 = {:?}\na2 = {:?}\nlambda = {:?}\nL = {:?}\n",
                m1.0, m1.1, m1.2, m1.3, m2.0, m2.1, m2.2, m2.3, m2.4, m2.5
            );
            let mut cfg = parse_config(&text).unwrap();
            cfg.grid.n_cells = t.0;
            cfg.time.dt = t.1;
            cfg.time.t_end = t.2;
            cfg.time.cfl_safety = t.3;
            cfg.time.max_substeps = t.4;
            cfg.ic.kind = [IcKind::ModeIndex, IcKind::RawCosine, IcKind::RandomSmooth][ic.0];
            cfg.ic.amplitude = ic.1;
            cfg.ic.wavenumber = ic.2;
            cfg.ic.frequency = ic.3;
            cfg.ic.seed = ic.4;
            cfg.output.snapshot_every = out.0;
            cfg.output.probe_x = out.1;
            cfg.output.spectrum_k = out.2;
            cfg
        })
}

proptest! {
    #[test]
    fn config_round_trip(cfg in arb_config()) {
        prop_assume!(cfg.validate().is_ok());
        prop_assert_eq!(parse_config(&serialize_config(&cfg)).unwrap(), cfg);
    }
}

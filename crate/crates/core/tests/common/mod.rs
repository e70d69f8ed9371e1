#![allow(dead_code)]

use chemopattern::{ModelParams, WaveMode};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn hopf_params(chi: f64) -> ModelParams {
    ModelParams {
        d1: 5.0,
        d2: 0.1,
        chi,
        xi: 0.1,
        mu1: 1.0,
        mu2: 1.0,
        a1: 0.5,
        a2: 0.5,
        lambda: 5.0,
        length: 6.0,
    }
}

/// Admissible parameters with growth; chi is left at zero since none of
/// the thresholds depend on it.
pub fn draw_params(rng: &mut impl Rng) -> ModelParams {
    ModelParams {
        d1: log_uniform(rng, 0.01, 100.0),
        d2: log_uniform(rng, 0.01, 100.0),
        chi: 0.0,
        xi: log_uniform(rng, 0.01, 10.0),
        mu1: rng.gen_range(0.0..5.0),
        mu2: rng.gen_range(0.0..5.0),
        a1: rng.gen_range(0.0..0.99),
        a2: rng.gen_range(0.0..0.99),
        lambda: log_uniform(rng, 0.01, 100.0),
        length: log_uniform(rng, 0.1, 100.0),
    }
}

/// Growth-free draws with xi inside the bound that keeps every `chiS(k)`
/// positive for `k <= kmax`.
pub fn draw_growth_free(rng: &mut impl Rng, kmax: u32) -> ModelParams {
    let mut p = ModelParams {
        d1: log_uniform(rng, 0.01, 100.0),
        d2: log_uniform(rng, 0.01, 100.0),
        chi: 0.0,
        xi: 0.0,
        mu1: 0.0,
        mu2: 0.0,
        a1: rng.gen_range(0.0..0.99),
        a2: rng.gen_range(0.0..0.99),
        lambda: log_uniform(rng, 0.01, 100.0),
        length: log_uniform(rng, 0.1, 100.0),
    };
    let bound = (1..=kmax)
        .map(|k| chemopattern::linstab::growth_free_xi_bound(&p, WaveMode::new(k, p.length)))
        .fold(f64::INFINITY, f64::min);
    p.xi = rng.gen_range(0.0..0.99 * bound).max(1e-300);
    p
}

//! Roots of the monic cubic `s^3 + c2 s^2 + c1 s + c0`.
//!
//! One real root is bracketed and refined by safeguarded Newton, the cubic
//! is deflated to a quadratic, and every root is then polished with Newton
//! steps on the undeflated polynomial.

use num_complex::Complex64;

/// Monic cubic `s^3 + c2 s^2 + c1 s + c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Cubic {
    pub fn eval(&self, s: f64) -> f64 {
        ((s + self.c2) * s + self.c1) * s + self.c0
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        ((s + self.c2) * s + self.c1) * s + self.c0
    }

    fn derivative(&self, s: f64) -> f64 {
        (3.0 * s + 2.0 * self.c2) * s + self.c1
    }

    fn derivative_complex(&self, s: Complex64) -> Complex64 {
        (s * 3.0 + 2.0 * self.c2) * s + self.c1
    }

    pub fn scale(&self) -> f64 {
        1f64.max(self.c0.abs()).max(self.c1.abs()).max(self.c2.abs())
    }

    /// All three roots, sorted by descending real part and then by
    /// descending imaginary part. Complex roots come out as exact conjugates.
    pub fn roots(&self) -> [Complex64; 3] {
        let r = self.real_root();
        // synthetic division by (s - r)
        let b1 = self.c2 + r;
        let b0 = if r.abs() > 1.0 && r != 0.0 {
            -self.c0 / r
        } else {
            self.c1 + r * b1
        };
        let mut roots = [Complex64::new(r, 0.0); 3];
        let (q1, q2) = quadratic_roots(b1, b0);
        roots[1] = q1;
        roots[2] = q2;

        for z in roots.iter_mut() {
            *z = self.polish(*z);
        }
        // keep the complex pair exactly conjugate
        if roots[1].im != 0.0 {
            roots[2] = roots[1].conj();
        }
        sort_roots(&mut roots);
        roots
    }

    fn real_root(&self) -> f64 {
        if self.c0 == 0.0 {
            return 0.0;
        }
        let bound = 1.0 + self.c0.abs().max(self.c1.abs()).max(self.c2.abs());
        let (mut lo, mut hi) = (-bound, bound);
        // f(-bound) < 0 < f(bound) for a monic cubic
        let mut x = if self.c0 > 0.0 { -bound.min(1.0) } else { bound.min(1.0) };
        x = x.clamp(lo, hi);
        for _ in 0..200 {
            let f = self.eval(x);
            if f == 0.0 {
                return x;
            }
            if f < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let df = self.derivative(x);
            let newton = x - f / df;
            let next = if df != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
                return next;
            }
            x = next;
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        x
    }

    /// Two Newton steps, each kept only if it lowers the residual.
    fn polish(&self, z: Complex64) -> Complex64 {
        let mut best = z;
        let mut best_res = self.eval_complex(z).norm();
        for _ in 0..2 {
            let d = self.derivative_complex(best);
            if d.norm() == 0.0 {
                break;
            }
            let mut cand = best - self.eval_complex(best) / d;
            if z.im == 0.0 {
                cand.im = 0.0;
            }
            let res = self.eval_complex(cand).norm();
            if res < best_res {
                best = cand;
                best_res = res;
            } else {
                break;
            }
        }
        best
    }
}

/// Roots of `s^2 + b1 s + b0`, real roots first by descending value,
/// complex roots as `(re + i im, re - i im)` with `im > 0`.
fn quadratic_roots(b1: f64, b0: f64) -> (Complex64, Complex64) {
    let half = -0.5 * b1;
    let disc = half * half - b0;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // cancellation-free form
        let big = if half >= 0.0 { half + sq } else { half - sq };
        let small = if big != 0.0 { b0 / big } else { 0.0 };
        let (a, b) = if big >= small { (big, small) } else { (small, big) };
        (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    } else {
        let im = (-disc).sqrt();
        (Complex64::new(half, im), Complex64::new(half, -im))
    }
}

fn sort_roots(roots: &mut [Complex64; 3]) {
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

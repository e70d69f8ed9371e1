//! Thomas algorithm for the implicit Neumann diffusion solves.

/// Solves the tridiagonal system `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
///
/// `lower[0]` and `upper[n-1]` are ignored. Requires a diagonally dominant
/// matrix; no pivoting is done.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c_prime = vec![0.0; n];
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    let mut denom = diag[0];
    c_prime[0] = upper[0] / denom;
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c_prime[i - 1];
        c_prime[i] = upper[i] / denom;
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    x
}

/// Solves `((1 + shift) I - coef * Lap) x = rhs` in place, where `Lap` is the
/// cell-centered three-point Laplacian (times `dx^2`) with zero-flux
/// reflection at both ends. `coef = h D / dx^2`.
///
/// The matrix is symmetric with column sums `1 + shift`, so for `shift = 0`
/// the solve preserves `sum(x) = sum(rhs)`.
pub fn solve_neumann_in_place(coef: f64, shift: f64, rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = rhs.len();
    if n == 0 {
        return;
    }
    if n == 1 {
        rhs[0] /= 1.0 + shift;
        return;
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let off = -coef;
    let diag = |i: usize| {
        if i == 0 || i == n - 1 {
            1.0 + shift + coef
        } else {
            1.0 + shift + 2.0 * coef
        }
    };
    let mut denom = diag(0);
    scratch[0] = off / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag(i) - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

//! Dense eigensolvers, the diagonal-plus-rank-one solver and adaptive
//! Gauss-Kronrod quadrature on finite intervals and the half-line.

mod dpr1;
mod eig;
#[allow(clippy::excessive_precision)]
mod quad;

pub use dpr1::{dpr1_eig, Dpr1Eigen};
pub use eig::{eig_herm, eig_sym, symmetry_defect, EigenDecomposition, HermitianDecomposition};
pub use quad::{
    integrate_halfline, integrate_halfline_outer, integrate_interval, integrate_with, QuadResult, QuadratureSpec,
    Substitution,
};

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Spectral norm of a symmetric matrix by power iteration on `m`,
/// falling back to a dense eigensolve when the iteration stalls.
pub fn sym_operator_norm(m: &nalgebra::DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let fro = m.norm();
    if fro == 0.0 {
        return 0.0;
    }
    // Deterministic start vector with no special symmetry.
    let mut x = nalgebra::DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i as f64) * 0.754_877_666).sin());
    x /= x.norm();
    let mut estimate = 0.0;
    for _ in 0..500 {
        let y = m * &x;
        let z = m * &y;
        let next = z.norm().sqrt();
        if next == 0.0 {
            return 0.0;
        }
        let done = (next - estimate).abs() <= 1e-12 * next;
        estimate = next;
        x = z / (next * next);
        if done {
            return estimate;
        }
    }
    match eig_sym(m) {
        Ok(e) => e.values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())),
        Err(_) => estimate,
    }
}

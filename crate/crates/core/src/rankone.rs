//! Calculus for rank-one perturbations `T = A + α|ψ⟩⟨ψ|` of a positive
//! diagonal operator: resolvents, the four fractional powers from their
//! half-line integral representations, the trace of `T^{1/2} − A^{1/2}`,
//! and a checker for the axioms of a resolvent family.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    dpr1_eig, integrate_halfline, integrate_halfline_outer, Dpr1Eigen, QuadratureSpec, Substitution,
};

/// `A + α|ψ⟩⟨ψ|` with `A = diag(a)`, checked positive definite on construction.
#[derive(Debug, Clone)]
pub struct RankOneOp {
    a: DVector<f64>,
    psi: DVector<f64>,
    alpha: f64,
    eigen: Dpr1Eigen,
}

impl RankOneOp {
    pub fn new(a: DVector<f64>, psi: DVector<f64>, alpha: f64) -> Result<Self> {
        if a.len() != psi.len() {
            return Err(Error::InvalidInput(format!(
                "rank-one operator: {} diagonal entries but {} vector entries",
                a.len(),
                psi.len()
            )));
        }
        if a.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("rank-one operator: A must be positive".into()));
        }
        let eigen = dpr1_eig(a.as_slice(), psi.as_slice(), alpha)?;
        let smallest = eigen.min_value();
        if !(smallest > 0.0) {
            return Err(Error::NotPositive(smallest));
        }
        Ok(Self { a, psi, alpha, eigen })
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn psi(&self) -> &DVector<f64> {
        &self.psi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn eigen(&self) -> &Dpr1Eigen {
        &self.eigen
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&self.a);
        m.ger(self.alpha, &self.psi, &self.psi, 1.0);
        m
    }

    /// `1 + α⟨ψ|R_{−s}(A)ψ⟩`.
    pub fn denominator(&self, s: f64) -> f64 {
        1.0 + self.alpha
            * self
                .a
                .iter()
                .zip(self.psi.iter())
                .map(|(&a, &p)| p * p / (a + s))
                .sum::<f64>()
    }
}

/// Route used to evaluate a matrix function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Half-line integral of rank-one resolvent terms.
    Quadrature,
    /// Spectral decomposition of the assembled operator.
    Eig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exponent {
    Half,
    NegHalf,
    Quarter,
    NegQuarter,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Half => 0.5,
            Exponent::NegHalf => -0.5,
            Exponent::Quarter => 0.25,
            Exponent::NegQuarter => -0.25,
        }
    }
}

/// `R_z(T)` from the rank-one resolvent formula.
pub fn resolvent_rank_one(op: &RankOneOp, z: Complex64) -> Result<DMatrix<Complex64>> {
    let n = op.dim();
    let mut r = Vec::with_capacity(n);
    for &a in op.a.iter() {
        let d = Complex64::new(a, 0.0) - z;
        if d.norm() == 0.0 {
            return Err(Error::SingularPoint(0.0));
        }
        r.push(d.inv());
    }
    let u: Vec<Complex64> = r.iter().zip(op.psi.iter()).map(|(ri, &p)| ri * p).collect();
    let inner: Complex64 = u.iter().zip(op.psi.iter()).map(|(ui, &p)| ui * p).sum();
    let den = Complex64::new(1.0, 0.0) + inner * op.alpha;
    if den.norm() < 1e-13 {
        return Err(Error::SingularPoint(den.norm()));
    }
    let coef = -op.alpha / den;
    let mut m = DMatrix::from_fn(n, n, |i, j| coef * u[i] * u[j]);
    for i in 0..n {
        m[(i, i)] += r[i];
    }
    Ok(m)
}

/// Real-axis resolvent `R_z(T)` for `z` below the spectrum.
pub fn resolvent_rank_one_real(op: &RankOneOp, z: f64) -> Result<DMatrix<f64>> {
    let m = resolvent_rank_one(op, Complex64::new(z, 0.0))?;
    Ok(m.map(|c| c.re))
}

pub fn power_half(op: &RankOneOp, method: Method) -> Result<DMatrix<f64>> {
    power(op, Exponent::Half, method, &QuadratureSpec::default())
}

pub fn power_neg_half(op: &RankOneOp, method: Method) -> Result<DMatrix<f64>> {
    power(op, Exponent::NegHalf, method, &QuadratureSpec::default())
}

pub fn power_quarter(op: &RankOneOp, method: Method) -> Result<DMatrix<f64>> {
    power(op, Exponent::Quarter, method, &QuadratureSpec::default())
}

pub fn power_neg_quarter(op: &RankOneOp, method: Method) -> Result<DMatrix<f64>> {
    power(op, Exponent::NegQuarter, method, &QuadratureSpec::default())
}

/// `T^p` for `p ∈ {±1/2, ±1/4}`. The quadrature route ignores the
/// substitution in `spec` and picks the map suited to each kernel.
pub fn power(op: &RankOneOp, exponent: Exponent, method: Method, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    let p = exponent.value();
    match method {
        Method::Eig => Ok(op.eigen.apply_fn(|x| x.powf(p))),
        Method::Quadrature => {
            let mut m = DMatrix::from_diagonal(&op.a.map(|x| x.powf(p)));
            if op.alpha == 0.0 {
                return Ok(m);
            }
            let correction = power_correction(op, exponent, spec)?;
            m += correction;
            Ok(m)
        }
    }
}

/// `x^p` for scalar `x > 0` from the half-line kernel behind each power formula:
/// `x/(x + t²)`, `1/(x + t²)`, `x/(x + t⁴)` and `1/(x + t^{4/3})`.
pub fn scalar_power(x: f64, exponent: Exponent, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidInput(format!("scalar power needs x > 0, got {x}")));
    }
    let (prefactor, sub) = match exponent {
        Exponent::Half | Exponent::NegHalf => (2.0 / PI, Substitution::Rational),
        Exponent::Quarter => (2.0 * SQRT_2 / PI, Substitution::Rational),
        Exponent::NegQuarter => (2.0 * SQRT_2 / (3.0 * PI), Substitution::CubicRational),
    };
    let spec = spec.with_substitution(sub);
    let res = integrate_halfline(
        |t| match exponent {
            Exponent::Half => x / (x + t * t),
            Exponent::NegHalf => 1.0 / (x + t * t),
            Exponent::Quarter => x / (x + (t * t) * (t * t)),
            Exponent::NegQuarter => 1.0 / (x + t.powf(4.0 / 3.0)),
        },
        &spec,
    )?;
    Ok(prefactor * res.value)
}

/// Integral term of `T^p − A^p`.
pub fn power_correction(op: &RankOneOp, exponent: Exponent, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    let alpha = op.alpha;
    let (prefactor, sub) = match exponent {
        Exponent::Half => (2.0 * alpha / PI, Substitution::Rational),
        Exponent::NegHalf => (-2.0 * alpha / PI, Substitution::Rational),
        Exponent::Quarter => (2.0 * SQRT_2 * alpha / PI, Substitution::Rational),
        Exponent::NegQuarter => (-2.0 * SQRT_2 * alpha / (3.0 * PI), Substitution::CubicRational),
    };
    let spec = spec.with_substitution(sub);
    let n = op.dim();
    let kernel = |t: f64| -> Result<(f64, DVector<f64>)> {
        let (s, weight) = match exponent {
            Exponent::Half => (t * t, t * t),
            Exponent::NegHalf => (t * t, 1.0),
            Exponent::Quarter => {
                let t2 = t * t;
                (t2 * t2, t2 * t2)
            }
            Exponent::NegQuarter => (t.powf(4.0 / 3.0), 1.0),
        };
        if !s.is_finite() {
            return Ok((0.0, DVector::zeros(n)));
        }
        let den = op.denominator(s);
        if !(den > 0.0) {
            return Err(Error::Positivity { t, denominator: den });
        }
        let v = DVector::from_fn(n, |i, _| op.psi[i] / (op.a[i] + s));
        let c = prefactor * weight / den;
        // Guard the t⁴·(t⁻⁴)² limit against overflow.
        if !c.is_finite() {
            return Ok((0.0, DVector::zeros(n)));
        }
        Ok((c, v))
    };
    Ok(integrate_halfline_outer(n, kernel, &spec)?.value)
}

/// `tr(T^{1/2} − A^{1/2})` from its scalar integral representation.
pub fn trace_sqrt_shift(op: &RankOneOp) -> Result<f64> {
    trace_sqrt_shift_with(op, &QuadratureSpec::default())
}

pub fn trace_sqrt_shift_with(op: &RankOneOp, spec: &QuadratureSpec) -> Result<f64> {
    if op.alpha == 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let spec = spec.with_substitution(Substitution::Rational);
    let res = integrate_halfline(
        |t| {
            let s = t * t;
            let den = op.denominator(s);
            if !(den > 0.0) {
                failure.get_or_insert(Error::Positivity { t, denominator: den });
                return 0.0;
            }
            let norm2: f64 =
                op.a.iter()
                    .zip(op.psi.iter())
                    .map(|(&a, &p)| {
                        let v = p / (a + s);
                        v * v
                    })
                    .sum();
            s * norm2 / den
        },
        &spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(2.0 * op.alpha / PI * res.value)
}

/// Residuals of the three resolvent-family axioms on a sample set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyReport {
    /// `max ‖R(z)* − R(z̄)‖ / ‖R(z)‖`.
    pub conjugate_symmetry: f64,
    /// `max ‖R(z+w) − R(w) − z R(z+w) R(w)‖ / max(‖R(z+w)‖, ‖R(w)‖)`.
    pub resolvent_identity: f64,
    /// Smallest `|pivot| / max |pivot|` of the LU factorization of any sampled
    /// `R(z)` after symmetric diagonal equilibration; zero would signal a kernel.
    pub kernel_proxy: f64,
}

/// Checks conjugate symmetry, the first resolvent identity and kernel
/// triviality over `(z, w)` sample pairs. All of `z`, `w`, `z + w` must lie
/// off the spectrum of the underlying operator.
pub fn resolvent_family_check<F>(family: F, samples: &[(Complex64, Complex64)]) -> Result<FamilyReport>
where
    F: Fn(Complex64) -> Result<DMatrix<Complex64>>,
{
    let mut conj = 0.0_f64;
    let mut ident = 0.0_f64;
    let mut smin = f64::INFINITY;
    for &(z, w) in samples {
        let rzw = family(z + w)?;
        let rw = family(w)?;
        for (point, r) in [(z + w, &rzw), (w, &rw)] {
            let rbar = family(point.conj())?;
            let scale = r.norm().max(f64::MIN_POSITIVE);
            conj = conj.max((r.adjoint() - rbar).norm() / scale);
            smin = smin.min(pivot_ratio(r));
        }
        let lhs = &rzw - &rw;
        let rhs = (&rzw * &rw) * z;
        let scale = rzw.norm().max(rw.norm()).max(f64::MIN_POSITIVE);
        ident = ident.max((lhs - rhs).norm() / scale);
    }
    Ok(FamilyReport {
        conjugate_symmetry: conj,
        resolvent_identity: ident,
        kernel_proxy: smin,
    })
}

/// Scaling by `|R_ii|^{-1/2}` on both sides keeps the kernel and removes the
/// spread of magnitudes inherited from the diagonal part.
fn pivot_ratio(r: &DMatrix<Complex64>) -> f64 {
    let n = r.nrows();
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = r[(i, i)].norm();
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let s = DMatrix::from_fn(n, n, |i, j| r[(i, j)] * (scale[i] * scale[j]));
    let u = s.lu().u();
    let pivots: Vec<f64> = (0..n).map(|i| u[(i, i)].norm()).collect();
    let max = pivots.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    pivots.iter().copied().fold(f64::INFINITY, f64::min) / max
}

/// A default sample set of `(z, w)` pairs in the left half-plane and off the real axis.
pub fn default_family_samples() -> Vec<(Complex64, Complex64)> {
    vec![
        (Complex64::new(-0.5, 0.0), Complex64::new(-1.0, 0.0)),
        (Complex64::new(-2.0, 0.0), Complex64::new(-0.25, 0.0)),
        (Complex64::new(0.3, 0.7), Complex64::new(-1.0, 0.5)),
        (Complex64::new(-0.4, -1.2), Complex64::new(2.0, 1.5)),
        (Complex64::new(1.0, 2.0), Complex64::new(-3.0, -0.5)),
    ]
}

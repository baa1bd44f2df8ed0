use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

// Gauss-Kronrod 15/7 abscissae and weights on [-1, 1]; index 7 is the centre.
// Tabulated to more digits than f64 holds.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss 7-point weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15 nodes of a panel with their Kronrod weight and Kronrod-minus-Gauss weight.
fn panel_nodes(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut k = 0;
    for j in 0..8 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        let dw = WGK[j] - wg;
        if j == 7 {
            out[k] = (c, WGK[j] * h, dw * h);
            k += 1;
        } else {
            out[k] = (c - h * XGK[j], WGK[j] * h, dw * h);
            out[k + 1] = (c + h * XGK[j], WGK[j] * h, dw * h);
            k += 2;
        }
    }
    out
}

/// Change of variable used to fold `(0, ∞)` onto `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Substitution {
    /// `t = u / (1 − u)`.
    #[default]
    Rational,
    /// `t = (u / (1 − u))³`, for integrands with slow algebraic tails such as `t^{-4/3}`.
    CubicRational,
    /// No map; only meaningful on finite intervals.
    None,
}

impl Substitution {
    /// Returns `(t, dt/du)`; non-finite values signal an unusable node.
    fn map(self, u: f64) -> (f64, f64) {
        match self {
            Substitution::Rational => {
                let v = 1.0 - u;
                (u / v, 1.0 / (v * v))
            }
            Substitution::CubicRational => {
                let v = 1.0 - u;
                let s = u / v;
                (s * s * s, 3.0 * s * s / (v * v))
            }
            Substitution::None => (u, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub substitution: Substitution,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_subdivisions: 1 << 16,
            substitution: Substitution::Rational,
        }
    }
}

impl QuadratureSpec {
    pub fn with_substitution(mut self, substitution: Substitution) -> Self {
        self.substitution = substitution;
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) || self.max_subdivisions == 0 {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub panels: usize,
}

/// Values a panel rule can produce.
pub trait Accumulate: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, s: f64, other: &Self);
    fn magnitude(&self) -> f64;
}

impl Accumulate for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += s * other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Accumulate for DMatrix<f64> {
    fn zero_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += other * s;
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

struct Panel<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Panel<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<V> Eq for Panel<V> {}
impl<V> PartialOrd for Panel<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Panel<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Global adaptive bisection over `[lo, hi]`. `rule(a, b)` returns the panel
/// estimate and its error bound.
pub fn integrate_with<V, R>(lo: f64, hi: f64, spec: &QuadratureSpec, mut rule: R) -> Result<QuadResult<V>>
where
    V: Accumulate,
    R: FnMut(f64, f64) -> Result<(V, f64)>,
{
    spec.validate()?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidInput(format!("bad interval [{lo}, {hi}]")));
    }
    const INITIAL: usize = 8;
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel<V>> = Vec::new();
    let mut total: Option<V> = None;
    let mut total_err = 0.0;
    for i in 0..INITIAL {
        let a = lo + (hi - lo) * i as f64 / INITIAL as f64;
        let b = if i + 1 == INITIAL {
            hi
        } else {
            lo + (hi - lo) * (i + 1) as f64 / INITIAL as f64
        };
        let (value, error) = rule(a, b)?;
        match total.as_mut() {
            None => total = Some(value.clone()),
            Some(t) => t.add_scaled(1.0, &value),
        }
        total_err += error;
        heap.push(Panel { a, b, value, error });
    }
    let mut total = total.expect("at least one panel");
    let mut panels = INITIAL;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.magnitude());
        if total_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || worst.b - worst.a <= 1e-15 * mid.abs().max(1e-300) {
            // Cannot refine further; keep the panel as it is.
            done.push(worst);
            continue;
        }
        if panels >= spec.max_subdivisions {
            heap.push(worst);
            let mut estimate = total.zero_like();
            for p in heap.iter().chain(done.iter()) {
                estimate.add_scaled(1.0, &p.value);
            }
            return Err(Error::QuadratureCap {
                estimate: estimate.magnitude(),
                error: total_err,
            });
        }
        let (lv, le) = rule(worst.a, mid)?;
        let (rv, re) = rule(mid, worst.b)?;
        total.add_scaled(-1.0, &worst.value);
        total.add_scaled(1.0, &lv);
        total.add_scaled(1.0, &rv);
        total_err += le + re - worst.error;
        panels += 1;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }
    if !done.is_empty() && total_err > spec.abs_tol.max(spec.rel_tol * total.magnitude()) {
        return Err(Error::QuadratureCap {
            estimate: total.magnitude(),
            error: total_err,
        });
    }
    // Deterministic final sum in panel order.
    let mut all: Vec<Panel<V>> = heap.into_vec();
    all.extend(done);
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = total.zero_like();
    let mut error = 0.0;
    for p in &all {
        value.add_scaled(1.0, &p.value);
        error += p.error;
    }
    Ok(QuadResult {
        value,
        error,
        panels: all.len(),
    })
}

fn scalar_rule<G: FnMut(f64) -> f64>(g: &mut G, sub: Substitution, a: f64, b: f64) -> (f64, f64) {
    let mut k = 0.0;
    let mut diff = 0.0;
    for (u, wk, dw) in panel_nodes(a, b) {
        let (t, jac) = sub.map(u);
        if !(t.is_finite() && jac.is_finite()) {
            continue;
        }
        let y = g(t) * jac;
        if !y.is_finite() {
            continue;
        }
        k += wk * y;
        diff += dw * y;
    }
    (k, diff.abs())
}

/// `∫₀^∞ g(t) dt` using the substitution in `spec`.
pub fn integrate_halfline<G: FnMut(f64) -> f64>(mut g: G, spec: &QuadratureSpec) -> Result<QuadResult<f64>> {
    let sub = match spec.substitution {
        Substitution::None => return Err(Error::InvalidInput("half-line quadrature needs a substitution".into())),
        s => s,
    };
    integrate_with(0.0, 1.0, spec, |a, b| Ok(scalar_rule(&mut g, sub, a, b)))
}

/// `∫_a^b g(t) dt` on a finite interval.
pub fn integrate_interval<G: FnMut(f64) -> f64>(
    mut g: G,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult<f64>> {
    integrate_with(a, b, spec, |x, y| Ok(scalar_rule(&mut g, Substitution::None, x, y)))
}

/// `∫₀^∞ c(t) v(t) v(t)ᵀ dt` for an integrand that is rank one at every node.
///
/// The kernel returns `(c, v)`. Panel errors are Frobenius norms of the
/// Kronrod-minus-Gauss difference, evaluated through the Gram matrix of the
/// node vectors.
pub fn integrate_halfline_outer<K>(dim: usize, mut kernel: K, spec: &QuadratureSpec) -> Result<QuadResult<DMatrix<f64>>>
where
    K: FnMut(f64) -> Result<(f64, DVector<f64>)>,
{
    let sub = match spec.substitution {
        Substitution::None => return Err(Error::InvalidInput("half-line quadrature needs a substitution".into())),
        s => s,
    };
    integrate_with(0.0, 1.0, spec, |a, b| {
        let mut acc = DMatrix::<f64>::zeros(dim, dim);
        let mut vs: Vec<DVector<f64>> = Vec::with_capacity(15);
        let mut ds: Vec<f64> = Vec::with_capacity(15);
        for (u, wk, dw) in panel_nodes(a, b) {
            let (t, jac) = sub.map(u);
            if !(t.is_finite() && jac.is_finite()) {
                continue;
            }
            let (c, v) = kernel(t)?;
            let weight = c * jac;
            if !weight.is_finite() || v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            acc.ger(wk * weight, &v, &v, 1.0);
            ds.push(dw * weight);
            vs.push(v);
        }
        let mut err2 = 0.0;
        for j in 0..vs.len() {
            for l in 0..vs.len() {
                let g = vs[j].dot(&vs[l]);
                err2 += ds[j] * ds[l] * g * g;
            }
        }
        Ok((acc, err2.max(0.0).sqrt()))
    })
}

//! Scenario definitions and their discretization on a weighted grid.
//!
//! Grid vectors are stored as function values `f_i` together with
//! quadrature weights `w_i`, so that `⟨g|h⟩ = Σ w_i conj(g_i) h_i`. The
//! operator modules work in the orthonormal coordinates `f̂_i = √w_i f_i`.

mod config;

pub use config::{FlowSpec, FockSpec, FormFactorSpec, GridSpec, MeasureSpec, OmegaSpec, ScenarioConfig, Spacing};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::fit_slope;

/// One-body data on a weighted grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizedModel {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub omega: Vec<f64>,
    #[serde(serialize_with = "serialize_complex")]
    pub f: Vec<Complex64>,
    pub lambda: f64,
}

fn serialize_complex<S: serde::Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

impl DiscretizedModel {
    /// Builds a model directly from grid data, checking the invariants.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, omega: Vec<f64>, f: Vec<Complex64>, lambda: f64) -> Result<Self> {
        let m = nodes.len();
        if weights.len() != m || omega.len() != m || f.len() != m {
            return Err(Error::InvalidInput("model vectors must have equal length".into()));
        }
        if m == 0 {
            return Err(Error::InvalidInput("model needs at least one node".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("all weights must be positive".into()));
        }
        if let Some(&bad) = omega.iter().find(|&&w| !(w >= 1.0 && w.is_finite())) {
            return Err(Error::InvalidInput(format!("ω must be ≥ 1 at every node, found {bad}")));
        }
        if f.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) || !lambda.is_finite() {
            return Err(Error::InvalidInput("non-finite form factor or coupling".into()));
        }
        Ok(Self {
            nodes,
            weights,
            omega,
            f,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn omega_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.omega)
    }

    pub fn max_omega(&self) -> f64 {
        self.omega.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_omega(&self) -> f64 {
        self.omega.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `f̂_i = √w_i f_i`.
    pub fn fhat(&self) -> Vec<Complex64> {
        self.f.iter().zip(&self.weights).map(|(z, &w)| z * w.sqrt()).collect()
    }

    pub fn is_real(&self) -> bool {
        let scale = self.f.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        self.f.iter().all(|z| z.im.abs() <= 1e-14 * scale)
    }

    /// `f̂` as a real vector; fails unless `f` is real (gauge-reduce first).
    pub fn fhat_real(&self) -> Result<DVector<f64>> {
        if !self.is_real() {
            return Err(Error::InvalidInput(
                "complex form factor: apply gauge_reduce first".into(),
            ));
        }
        Ok(DVector::from_iterator(
            self.dim(),
            self.f.iter().zip(&self.weights).map(|(z, &w)| z.re * w.sqrt()),
        ))
    }

    /// `⟨g|h⟩ = Σ w_i conj(g_i) h_i`.
    pub fn inner(&self, g: &[Complex64], h: &[Complex64]) -> Complex64 {
        g.iter()
            .zip(h)
            .zip(&self.weights)
            .map(|((a, b), &w)| a.conj() * b * w)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.weighted_norm_sq(0.0)
    }

    /// `‖ω^{-s} f‖²`.
    pub fn weighted_norm_sq(&self, s: f64) -> f64 {
        self.f
            .iter()
            .zip(&self.weights)
            .zip(&self.omega)
            .map(|((z, &w), &om)| w * z.norm_sqr() * om.powf(-2.0 * s))
            .sum()
    }

    /// `‖ω^{-s} f‖`.
    pub fn weighted_norm(&self, s: f64) -> f64 {
        self.weighted_norm_sq(s).sqrt()
    }

    /// `‖ln(ω)² f‖`.
    pub fn log_norm(&self) -> f64 {
        self.f
            .iter()
            .zip(&self.weights)
            .zip(&self.omega)
            .map(|((z, &w), &om)| {
                let l = om.ln();
                w * z.norm_sqr() * l.powi(4)
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn grid_nodes(grid: &GridSpec) -> Result<Vec<f64>> {
    if let Some(points) = &grid.points {
        if points.is_empty() {
            return Err(Error::Config("grid.points is empty".into()));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("grid.points must be strictly increasing".into()));
        }
        if points[0] < 1.0 {
            return Err(Error::Config(format!("grid.points must be ≥ 1, found {}", points[0])));
        }
        return Ok(points.clone());
    }
    if !(grid.k_min >= 1.0) {
        return Err(Error::Config(format!("grid.k_min must be ≥ 1, found {}", grid.k_min)));
    }
    if !(grid.k_max >= grid.k_min) || !grid.k_max.is_finite() {
        return Err(Error::Config("grid.k_max must be finite and ≥ k_min".into()));
    }
    if grid.nodes == 0 {
        return Err(Error::Config("grid.nodes must be positive".into()));
    }
    if grid.nodes == 1 {
        return Ok(vec![grid.k_min]);
    }
    if grid.k_max == grid.k_min {
        return Err(Error::Config("several nodes need k_max > k_min".into()));
    }
    let m = grid.nodes;
    let nodes = (0..m)
        .map(|i| {
            let x = i as f64 / (m - 1) as f64;
            if i == m - 1 {
                grid.k_max
            } else {
                match grid.spacing {
                    Spacing::Linear => grid.k_min + x * (grid.k_max - grid.k_min),
                    Spacing::Logarithmic => grid.k_min * (grid.k_max / grid.k_min).powf(x),
                }
            }
        })
        .collect();
    Ok(nodes)
}

/// Trapezoid weights on the node list; a single node carries unit mass.
fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    if m == 1 {
        return vec![1.0];
    }
    (0..m)
        .map(|i| {
            let left = if i > 0 { nodes[i] - nodes[i - 1] } else { 0.0 };
            let right = if i + 1 < m { nodes[i + 1] - nodes[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Discretizes a scenario on its grid.
pub fn build_model(config: &ScenarioConfig) -> Result<DiscretizedModel> {
    let nodes = grid_nodes(&config.grid)?;
    let m = nodes.len();
    if let MeasureSpec::Radial { dim, .. } = config.measure {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("radial measure needs dim in 1..=3, found {dim}")));
        }
    }
    let weights: Vec<f64> = trapezoid_weights(&nodes)
        .into_iter()
        .zip(&nodes)
        .map(|(w, &k)| w * config.measure.density(k))
        .collect();

    let omega: Vec<f64> = match &config.omega {
        OmegaSpec::Power { exponent } => nodes.iter().map(|&k| k.powf(*exponent).max(1.0)).collect(),
        OmegaSpec::Massive { mass } => nodes.iter().map(|&k| (k * k + mass * mass).sqrt()).collect(),
        OmegaSpec::Kinetic => nodes.iter().map(|&k| (k + k * k).max(1.0)).collect(),
        OmegaSpec::Table { values } => {
            if values.len() != m {
                return Err(Error::Config(format!(
                    "omega table has {} values for {m} nodes",
                    values.len()
                )));
            }
            values.clone()
        }
    };
    if let Some(&bad) = omega.iter().find(|&&w| !(w >= 1.0)) {
        return Err(Error::Config(format!("ω must be ≥ 1 at every node, found {bad}")));
    }

    let f: Vec<Complex64> = match &config.f {
        FormFactorSpec::Power { alpha, scale } => nodes
            .iter()
            .map(|&k| Complex64::new(scale * k.powf(*alpha), 0.0))
            .collect(),
        FormFactorSpec::IndicatorPower { scale } => nodes
            .iter()
            .map(|&k| Complex64::new(if k >= 1.0 { scale / k.sqrt() } else { 0.0 }, 0.0))
            .collect(),
        FormFactorSpec::Table { re, im } => {
            if re.len() != m || !(im.is_empty() || im.len() == m) {
                return Err(Error::Config(format!("f table length does not match {m} nodes")));
            }
            (0..m)
                .map(|i| Complex64::new(re[i], im.get(i).copied().unwrap_or(0.0)))
                .collect()
        }
    };

    let model = DiscretizedModel::new(nodes, weights, omega, f, config.flow.lambda).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::Config(msg),
        other => other,
    })?;
    validate_cutoffs(&config.flow.cutoffs, &model)?;
    Ok(model)
}

fn validate_cutoffs(cutoffs: &[f64], model: &DiscretizedModel) -> Result<()> {
    if cutoffs.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::Config("cutoffs must be positive".into()));
    }
    if cutoffs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("cutoffs must be strictly increasing".into()));
    }
    let top = model.max_omega();
    if let Some(&n) = cutoffs.iter().find(|&&n| n > top * (1.0 + 1e-12)) {
        return Err(Error::Config(format!(
            "cutoff {n} exceeds the largest grid frequency {top}"
        )));
    }
    Ok(())
}

/// `f_n = 1_{ω ≤ n} f`.
pub fn cutoff_project(model: &DiscretizedModel, n: f64) -> DiscretizedModel {
    let f = model
        .f
        .iter()
        .zip(&model.omega)
        .map(|(&z, &om)| if om <= n { z } else { Complex64::new(0.0, 0.0) })
        .collect();
    DiscretizedModel { f, ..model.clone() }
}

/// Configured cutoffs, or eight geometric steps from `√(ω_min ω_max)` up to `ω_max`.
pub fn cutoff_ladder(config: &ScenarioConfig, model: &DiscretizedModel) -> Vec<f64> {
    if !config.flow.cutoffs.is_empty() {
        return config.flow.cutoffs.clone();
    }
    default_ladder(model, 8)
}

pub fn default_ladder(model: &DiscretizedModel, count: usize) -> Vec<f64> {
    let (lo, hi) = (model.min_omega(), model.max_omega());
    if hi <= lo || count < 2 {
        return vec![hi];
    }
    let start = (lo * hi).sqrt();
    (0..count)
        .map(|j| {
            if j + 1 == count {
                hi
            } else {
                start * (hi / start).powf(j as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Regularity class of `f` relative to `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    /// `f ∈ H`.
    HRegular,
    /// `f ∉ H` but `ω^{-1/4} f ∈ H`: finite vacuum energy without counterterm.
    FiniteEnergy,
    /// `ω^{-1/2} f ∈ H`, `ω^{-1/4} f ∉ H`.
    NeedsEnergyRenorm,
    /// `ω^{-1/2} f ∉ H`, `ω^{-3/2} f ∈ H`.
    NeedsChargeRenorm,
    OutOfTheory,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEntry {
    pub s: f64,
    /// `‖ω^{-s} f‖` on the full grid.
    pub norm: f64,
    /// Fitted exponent of `‖ω^{-s} f_n‖` against the cutoff `n`.
    pub growth_exponent: f64,
    /// Power-law growth beyond tolerance, or sustained logarithmic growth.
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub cutoffs: Vec<f64>,
    pub norms: Vec<NormEntry>,
    pub log_norm: f64,
    pub tolerance: f64,
    /// `ω` spans less than a decade: every weighted norm is equivalent and no
    /// ultraviolet behaviour can be read off the ladder.
    pub bounded_omega: bool,
    pub classification: Regularity,
}

impl RegularityReport {
    fn entry(&self, s: f64) -> Option<&NormEntry> {
        self.norms.iter().find(|e| (e.s - s).abs() < 1e-12)
    }

    pub fn exponent(&self, s: f64) -> f64 {
        self.entry(s).map(|e| e.growth_exponent).unwrap_or(f64::NAN)
    }

    pub fn divergent(&self, s: f64) -> bool {
        self.entry(s).map(|e| e.divergent).unwrap_or(false)
    }
}

/// Regularity scale probed by the scan.
pub const REGULARITY_SCALE: [f64; 7] = [-0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5];

/// Threshold on fitted growth exponents separating bounded from divergent norms.
pub const GROWTH_TOLERANCE: f64 = 0.05;

/// A norm grows logarithmically when `d‖·‖²/d ln n` on the top third of the
/// ladder is at least this fraction of its value on the bottom third.
pub const LOG_GROWTH_RATIO: f64 = 0.5;

/// Smallest `ω_max / ω_min` for which the ladder probes ultraviolet growth.
pub const MIN_OMEGA_SPAN: f64 = 10.0;

pub fn regularity_scan(config: &ScenarioConfig) -> Result<RegularityReport> {
    let model = build_model(config)?;
    let cutoffs = cutoff_ladder(config, &model);
    regularity_scan_model(&model, &cutoffs)
}

fn log_growth(ln_n: &[f64], sq: &[f64]) -> bool {
    let k = (ln_n.len() / 3).max(2);
    let m = ln_n.len();
    let head = fit_slope(&ln_n[..k], &sq[..k]);
    let tail = fit_slope(&ln_n[m - k..], &sq[m - k..]);
    let top = sq[m - 1].abs().max(f64::MIN_POSITIVE);
    head > 0.0 && tail > 1e-3 * top && tail >= LOG_GROWTH_RATIO * head
}

pub fn regularity_scan_model(model: &DiscretizedModel, cutoffs: &[f64]) -> Result<RegularityReport> {
    let bounded_omega = model.max_omega() < MIN_OMEGA_SPAN * model.min_omega();
    if !bounded_omega && cutoffs.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "regularity scan needs at least 4 cutoffs, got {}",
            cutoffs.len()
        )));
    }
    let projected: Vec<DiscretizedModel> = cutoffs.iter().map(|&n| cutoff_project(model, n)).collect();
    let tol = GROWTH_TOLERANCE;
    let norms: Vec<NormEntry> = REGULARITY_SCALE
        .iter()
        .map(|&s| {
            let norm = model.weighted_norm(s);
            if bounded_omega {
                return NormEntry {
                    s,
                    norm,
                    growth_exponent: 0.0,
                    divergent: false,
                };
            }
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut sq = Vec::new();
            for (n, fm) in cutoffs.iter().zip(&projected) {
                let v = fm.weighted_norm_sq(s);
                if v > 0.0 {
                    xs.push(n.ln());
                    ys.push(0.5 * v.ln());
                    sq.push(v);
                }
            }
            let growth_exponent = fit_slope(&xs, &ys);
            let divergent = growth_exponent > tol || (xs.len() >= 4 && log_growth(&xs, &sq));
            NormEntry {
                s,
                norm,
                growth_exponent,
                divergent,
            }
        })
        .collect();
    let d = |s: f64| norms.iter().find(|x| x.s == s).map(|x| x.divergent).unwrap_or(false);
    let classification = if d(1.5) {
        Regularity::OutOfTheory
    } else if !d(0.0) {
        Regularity::HRegular
    } else if !d(0.25) {
        Regularity::FiniteEnergy
    } else if !d(0.5) {
        Regularity::NeedsEnergyRenorm
    } else {
        Regularity::NeedsChargeRenorm
    };
    Ok(RegularityReport {
        cutoffs: cutoffs.to_vec(),
        norms,
        log_norm: model.log_norm(),
        tolerance: tol,
        bounded_omega,
        classification,
    })
}

/// Replaces `f` by `|f|` and returns the phases `φ = f/|f|` (1 where `f = 0`).
pub fn gauge_reduce(model: &DiscretizedModel) -> (DiscretizedModel, Vec<Complex64>) {
    let phases: Vec<Complex64> = model
        .f
        .iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                z / r
            }
        })
        .collect();
    let f = model.f.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect();
    (DiscretizedModel { f, ..model.clone() }, phases)
}

/// Aggregates the grid into `d` contiguous blocks. Each block keeps its
/// total weight, the weighted mean of `ω` and the block norm of `f`, so the
/// coarse `f̂` has the same block-wise mass. Requires a real form factor.
pub fn coarse_grain(model: &DiscretizedModel, d: usize) -> Result<DiscretizedModel> {
    let m = model.dim();
    if d == 0 || d > m {
        return Err(Error::InvalidInput(format!(
            "cannot coarse-grain {m} nodes into {d} modes"
        )));
    }
    if !model.is_real() {
        return Err(Error::InvalidInput(
            "coarse_grain needs a gauge-reduced form factor".into(),
        ));
    }
    let mut nodes = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    let mut omega = Vec::with_capacity(d);
    let mut f = Vec::with_capacity(d);
    for b in 0..d {
        let lo = b * m / d;
        let hi = (b + 1) * m / d;
        let w: f64 = model.weights[lo..hi].iter().sum();
        let om = (lo..hi).map(|i| model.weights[i] * model.omega[i]).sum::<f64>() / w;
        let k = (lo..hi).map(|i| model.weights[i] * model.nodes[i]).sum::<f64>() / w;
        let mass: f64 = (lo..hi).map(|i| model.weights[i] * model.f[i].norm_sqr()).sum();
        let sign = if (lo..hi).map(|i| model.f[i].re).sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        nodes.push(k);
        weights.push(w);
        omega.push(om);
        f.push(Complex64::new(sign * (mass / w).sqrt(), 0.0));
    }
    DiscretizedModel::new(nodes, weights, omega, f, model.lambda)
}

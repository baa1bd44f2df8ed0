//! Quasi-particle dispersion `ξ`, the Bogoliubov blocks `U`, `V`, their
//! symplectic and Shale checks, and the vacuum energy `½ tr(ξ − h)`.
//!
//! All matrices act on the orthonormal coordinates `f̂ = √w f`, where `ω` is
//! diagonal. The form factor must be real (see [`crate::model::gauge_reduce`]).

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DiscretizedModel;
use crate::numerics::{
    eig_sym, fit_slope, integrate_halfline, integrate_interval, sym_operator_norm, EigenDecomposition, QuadratureSpec,
};
use crate::rankone::{power, power_half, Exponent, Method, RankOneOp};
use crate::renorm::{regular_resolvent_parts, renormalized_coupling, renormalized_resolvent_parts};
use crate::report::Status;

/// How `ξ` is obtained from the one-body data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum XiMode {
    /// `ξ = (ω² + 4λ ω^{1/2}|f⟩⟨f|ω^{1/2})^{1/2}`.
    Direct,
    /// `ξ² = R_{−1}(λ, f)^{-1} − 1` from the regular resolvent family.
    RegularResolvent,
    /// `ξ² = R̃_{−1}(λ, f)^{-1} − 1` from the renormalized family.
    RenormalizedResolvent,
}

/// How `ξ^{±1/2}` inside `U`, `V` are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RootMethod {
    /// From the eigendecomposition of `ξ`.
    #[default]
    Eig,
    /// Quarter powers of `ξ²` by half-line quadrature.
    Quadrature,
}

/// Coupling that enters `ξ` and `h` for the given mode.
pub fn effective_coupling(model: &DiscretizedModel, mode: XiMode) -> Result<f64> {
    match mode {
        XiMode::Direct | XiMode::RegularResolvent => Ok(model.lambda),
        XiMode::RenormalizedResolvent => renormalized_coupling(model, model.lambda),
    }
}

/// `ξ² = ω² + 4λ_eff ψψᵀ` with `ψ = ω^{1/2} f̂`, as a rank-one operator.
pub fn xi_squared_op(model: &DiscretizedModel, lambda_eff: f64) -> Result<RankOneOp> {
    let fhat = model.fhat_real()?;
    let omega = model.omega_vec();
    let a = omega.map(|w| w * w);
    let psi = omega.zip_map(&fhat, |w, f| w.sqrt() * f);
    RankOneOp::new(a, psi, 4.0 * lambda_eff)
}

/// `ξ` together with its spectral decomposition.
#[derive(Debug, Clone)]
pub struct Xi {
    pub matrix: DMatrix<f64>,
    pub eigen: EigenDecomposition,
    pub lambda_eff: f64,
}

pub fn build_xi(model: &DiscretizedModel, mode: XiMode, method: Method) -> Result<DMatrix<f64>> {
    Ok(build_xi_full(model, mode, method)?.matrix)
}

pub fn build_xi_full(model: &DiscretizedModel, mode: XiMode, method: Method) -> Result<Xi> {
    let lambda_eff = effective_coupling(model, mode)?;
    if method == Method::Quadrature {
        let op = xi_squared_op(model, lambda_eff)?;
        let matrix = power_half(&op, Method::Quadrature)?;
        let eigen = eig_sym(&matrix)?;
        return Ok(Xi {
            matrix,
            eigen,
            lambda_eff,
        });
    }
    let eigen = match mode {
        XiMode::Direct => {
            let op = xi_squared_op(model, lambda_eff)?;
            let e = op.eigen().decomposition();
            EigenDecomposition {
                values: e.values.map(f64::sqrt),
                vectors: e.vectors,
            }
        }
        XiMode::RegularResolvent | XiMode::RenormalizedResolvent => {
            let op = xi_squared_from_resolvent(model, mode)?;
            let e = op.eigen().decomposition();
            if let Some(&bad) = e.values.iter().find(|&&x| !(x > 0.0)) {
                return Err(Error::NotPositive(bad));
            }
            EigenDecomposition {
                values: e.values.map(f64::sqrt),
                vectors: e.vectors,
            }
        }
    };
    Ok(Xi {
        matrix: eigen.reconstruct(),
        eigen,
        lambda_eff,
    })
}

/// `ξ² = R_{−1}^{-1} − 1` for a resolvent family. With `R_{−1} = D + c|u⟩⟨u|`,
/// `D = (ω² + 1)^{-1}`, Sherman–Morrison gives `ω² + β|D^{-1}u⟩⟨D^{-1}u|` with
/// `β = −c/(1 + c⟨u|D^{-1}u⟩)`.
pub fn xi_squared_from_resolvent(model: &DiscretizedModel, mode: XiMode) -> Result<RankOneOp> {
    let z = Complex64::new(-1.0, 0.0);
    let parts = match mode {
        XiMode::RegularResolvent => regular_resolvent_parts(model, z)?,
        XiMode::RenormalizedResolvent => renormalized_resolvent_parts(model, z)?,
        XiMode::Direct => return xi_squared_op(model, model.lambda),
    };
    let c = parts.coef.re;
    let w2: Vec<f64> = parts.omega.iter().map(|w| w * w).collect();
    let dinv_u: Vec<f64> = parts.u.iter().zip(&w2).map(|(u, d)| u.re * (d + 1.0)).collect();
    let quad: f64 = parts.u.iter().zip(&dinv_u).map(|(u, v)| u.re * v).sum();
    let den = 1.0 + c * quad;
    if den.abs() < 1e-300 {
        return Err(Error::SingularPoint(den.abs()));
    }
    RankOneOp::new(DVector::from_vec(w2), DVector::from_vec(dinv_u), -c / den)
}

/// Output of the diagonalization.
#[derive(Debug, Clone)]
pub struct BogoliubovBlocks {
    pub mode: XiMode,
    pub root_method: RootMethod,
    /// Bare coupling of the model.
    pub lambda: f64,
    /// Coupling entering `ξ` and `h`.
    pub lambda_eff: f64,
    pub omega: DVector<f64>,
    pub fhat: DVector<f64>,
    pub xi: DMatrix<f64>,
    pub xi_eigen: EigenDecomposition,
    pub u: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// `h = ω + 2λ|f⟩⟨f|`.
    pub h: DMatrix<f64>,
    /// `k = 2λ|f⟩⟨f|`.
    pub k: DMatrix<f64>,
}

/// The 2m×2m block forms `𝒜`, `𝒱`, `𝒮`.
#[derive(Debug, Clone)]
pub struct BlockPair {
    pub acal: DMatrix<f64>,
    pub vcal: DMatrix<f64>,
    pub scal: DMatrix<f64>,
}

pub fn build_blocks(model: &DiscretizedModel, mode: XiMode) -> Result<BogoliubovBlocks> {
    build_blocks_with(model, mode, RootMethod::Eig)
}

pub fn build_blocks_with(model: &DiscretizedModel, mode: XiMode, root: RootMethod) -> Result<BogoliubovBlocks> {
    let xi = build_xi_full(model, mode, Method::Eig)?;
    let fhat = model.fhat_real()?;
    let omega = model.omega_vec();
    let m = omega.len();
    let sqrt_w = omega.map(f64::sqrt);

    // P = ω^{1/2} ξ^{-1/2}, Q = ω^{-1/2} ξ^{1/2}.
    let (xi_neg_half, xi_half) = match root {
        RootMethod::Eig => (xi.eigen.apply_fn(|x| 1.0 / x.sqrt()), xi.eigen.apply_fn(f64::sqrt)),
        RootMethod::Quadrature => {
            let op = xi_squared_op(model, xi.lambda_eff)?;
            let spec = QuadratureSpec::default();
            (
                power(&op, Exponent::NegQuarter, Method::Quadrature, &spec)?,
                power(&op, Exponent::Quarter, Method::Quadrature, &spec)?,
            )
        }
    };
    let p = DMatrix::from_fn(m, m, |i, j| sqrt_w[i] * xi_neg_half[(i, j)]);
    let q = DMatrix::from_fn(m, m, |i, j| xi_half[(i, j)] / sqrt_w[i]);
    let u = (&p + &q) * 0.5;
    let v = (&p - &q) * 0.5;

    let mut k = DMatrix::zeros(m, m);
    k.ger(2.0 * xi.lambda_eff, &fhat, &fhat, 0.0);
    let h = DMatrix::from_diagonal(&omega) + &k;
    Ok(BogoliubovBlocks {
        mode,
        root_method: root,
        lambda: model.lambda,
        lambda_eff: xi.lambda_eff,
        omega,
        fhat,
        xi: xi.matrix,
        xi_eigen: xi.eigen,
        u,
        v,
        h,
        k,
    })
}

impl BogoliubovBlocks {
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    /// `𝒜 = [[h, k], [k, h]]`, `𝒱 = [[Uᵀ, Vᵀ], [Vᵀ, Uᵀ]]`, `𝒮 = diag(1, −1)`,
    /// so that `𝒱𝒜𝒱ᵀ = diag(ξ, ξ)`.
    pub fn block_pair(&self) -> BlockPair {
        let m = self.dim();
        let mut acal = DMatrix::zeros(2 * m, 2 * m);
        let mut vcal = DMatrix::zeros(2 * m, 2 * m);
        let ut = self.u.transpose();
        let vt = self.v.transpose();
        for (r, c) in [(0, 0), (m, m)] {
            acal.view_mut((r, c), (m, m)).copy_from(&self.h);
            vcal.view_mut((r, c), (m, m)).copy_from(&ut);
        }
        for (r, c) in [(0, m), (m, 0)] {
            acal.view_mut((r, c), (m, m)).copy_from(&self.k);
            vcal.view_mut((r, c), (m, m)).copy_from(&vt);
        }
        let scal = DMatrix::from_fn(2 * m, 2 * m, |i, j| match (i == j, i < m) {
            (true, true) => 1.0,
            (true, false) => -1.0,
            _ => 0.0,
        });
        BlockPair { acal, vcal, scal }
    }
}

/// `max(‖off-diagonal blocks of 𝒱𝒜𝒱ᵀ‖, ‖(𝒱𝒜𝒱ᵀ)₁₁ − ξ‖, ‖(𝒱𝒜𝒱ᵀ)₂₂ − ξ‖) / ‖𝒜‖`
/// in spectral norm.
pub fn diagonalization_residual(blocks: &BogoliubovBlocks) -> f64 {
    let pair = blocks.block_pair();
    let m = blocks.dim();
    let d = &pair.vcal * &pair.acal * pair.vcal.transpose();
    let scale = sym_operator_norm(&pair.acal).max(f64::MIN_POSITIVE);
    let off = d.view((0, m), (m, m)).into_owned();
    let off_norm = sym_operator_norm(&(&off * off.transpose())).sqrt();
    let d11 = d.view((0, 0), (m, m)) - &blocks.xi;
    let d22 = d.view((m, m), (m, m)) - &blocks.xi;
    let sym = |x: DMatrix<f64>| (&x + x.transpose()) * 0.5;
    let asym = |x: &DMatrix<f64>| (x - x.transpose()).norm();
    // The diagonal defects are symmetric up to rounding; keep any asymmetry in the residual.
    let r11 = sym_operator_norm(&sym(d11.clone())) + asym(&d11);
    let r22 = sym_operator_norm(&sym(d22.clone())) + asym(&d22);
    off_norm.max(r11).max(r22) / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymplecticResiduals {
    /// `‖𝒱𝒮𝒱ᵀ − 𝒮‖_F`.
    pub vsv: f64,
    /// `‖𝒱ᵀ𝒮𝒱 − 𝒮‖_F`.
    pub vtsv: f64,
    /// `‖UᵀU − VᵀV − 1‖_F`.
    pub unitarity: f64,
}

impl SymplecticResiduals {
    pub fn max(&self) -> f64 {
        self.vsv.max(self.vtsv).max(self.unitarity)
    }
}

pub fn symplectic_residuals(blocks: &BogoliubovBlocks) -> SymplecticResiduals {
    let pair = blocks.block_pair();
    let vt = pair.vcal.transpose();
    let vsv = (&pair.vcal * &pair.scal * &vt - &pair.scal).norm();
    let vtsv = (&vt * &pair.scal * &pair.vcal - &pair.scal).norm();
    let m = blocks.dim();
    let g = blocks.u.transpose() * &blocks.u - blocks.v.transpose() * &blocks.v - DMatrix::identity(m, m);
    SymplecticResiduals {
        vsv,
        vtsv,
        unitarity: g.norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShaleTrace {
    /// `Σ V_ij²`.
    pub direct: f64,
    /// `¼ tr(ω^{1/2}ξ^{-1}ω^{1/2} − 1 + ω^{-1/2}ξω^{-1/2} − 1)`.
    pub identity: f64,
}

/// `tr(VVᵀ)`, directly and through the closed form of `4VVᵀ`.
pub fn shale_trace(blocks: &BogoliubovBlocks) -> ShaleTrace {
    let direct = blocks.v.norm_squared();
    let xi_inv = blocks.xi_eigen.apply_fn(|x| 1.0 / x);
    let identity = 0.25
        * blocks
            .omega
            .iter()
            .enumerate()
            .map(|(i, &w)| (w * xi_inv[(i, i)] - 1.0) + (blocks.xi[(i, i)] / w - 1.0))
            .sum::<f64>();
    ShaleTrace { direct, identity }
}

/// `½ tr(ξ − h)` by direct matrix traces.
pub fn ground_energy(blocks: &BogoliubovBlocks) -> f64 {
    0.5 * (0..blocks.dim())
        .map(|i| blocks.xi[(i, i)] - blocks.h[(i, i)])
        .sum::<f64>()
}

/// `tr(hVVᵀ) + tr(kVUᵀ)`, the constant produced when normal ordering the
/// transformed Hamiltonian.
pub fn bogoliubov_constant(blocks: &BogoliubovBlocks) -> f64 {
    let hv = &blocks.h * &blocks.v;
    let kv = &blocks.k * &blocks.v;
    hv.dot(&blocks.v) + kv.dot(&blocks.u)
}

/// `¼ tr(2ξ − ω − ξω^{-1}ξ)`, which the trace identity turns into `½ tr(ξ − h)`.
pub fn recombined_energy(blocks: &BogoliubovBlocks) -> f64 {
    let m = blocks.dim();
    let mut total = 0.0;
    for j in 0..m {
        // (ξω^{-1}ξ)_jj = Σ_i ξ_ji² / ω_i.
        let xwx: f64 = (0..m).map(|i| blocks.xi[(j, i)].powi(2) / blocks.omega[i]).sum();
        total += 2.0 * blocks.xi[(j, j)] - blocks.omega[j] - xwx;
    }
    0.25 * total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivotalIdentity {
    /// `tr(ξω^{-1}ξ − ω)` from the computed `ξ`.
    pub lhs: f64,
    /// `tr(ω^{-1/2}ξ²ω^{-1/2} − ω)` with `ξ²` taken from its defining rank-one form.
    pub rhs: f64,
}

impl PivotalIdentity {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.rhs.abs().max(1e-300)
    }
}

pub fn pivotal_identity(blocks: &BogoliubovBlocks) -> PivotalIdentity {
    let m = blocks.dim();
    let mut lhs = 0.0;
    for j in 0..m {
        let col: f64 = (0..m).map(|i| blocks.xi[(i, j)].powi(2)).sum();
        lhs += (col - blocks.omega[j] * blocks.omega[j]) / blocks.omega[j];
    }
    // ξ² = ω² + 4λ ω^{1/2}f̂f̂ᵀω^{1/2}, so its ω^{-1/2}-conjugated diagonal is ω_j + 4λ f̂_j².
    let rhs = (0..m)
        .map(|j| {
            let psi = blocks.omega[j].sqrt() * blocks.fhat[j];
            4.0 * blocks.lambda_eff * psi * psi / blocks.omega[j]
        })
        .sum();
    PivotalIdentity { lhs, rhs }
}

/// Formal trace `tr_∞(ξ − h)` with its divergence diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormalTrace {
    /// Full half-line integral on the grid.
    pub value: f64,
    pub tau_ladder: Vec<f64>,
    /// Integral truncated at each `τ`.
    pub partials: Vec<f64>,
    /// Fitted slope of `ln |partial|` against `ln τ`.
    pub slope: f64,
    /// `Bounded` or `Divergent`.
    pub status: Status,
    /// `16√2 λ² ‖ω^{-1/4} f‖⁴`.
    pub bound: f64,
}

/// Slope above which the truncated formal trace is reported divergent.
pub const FORMAL_TRACE_SLOPE_TOL: f64 = 0.05;

fn formal_trace_integrand(omega: &[f64], fhat: &[f64], lambda: f64, t: f64) -> std::result::Result<f64, f64> {
    let t2 = t * t;
    let mut g = 0.0;
    let mut n2 = 0.0;
    for (&w, &f) in omega.iter().zip(fhat) {
        let r = 1.0 / (w * w + t2);
        let a = w * f * f * r;
        g += a;
        n2 += a * r;
    }
    let den = 1.0 + 4.0 * lambda * g;
    if !(den > 0.0) {
        return Err(den);
    }
    Ok(t2 * n2 * g / den)
}

/// `(−32λ²/π) ∫₀^∞ t² ‖R_{−t²}(ω²)ω^{1/2}f‖² ⟨f|R_{−t²}(ω²)ωf⟩ / (1 + 4λ⟨f|R_{−t²}(ω²)ωf⟩) dt`.
pub fn formal_trace_value(model: &DiscretizedModel) -> Result<f64> {
    formal_trace_upto(model, f64::INFINITY)
}

fn formal_trace_upto(model: &DiscretizedModel, tau: f64) -> Result<f64> {
    let lambda = model.lambda;
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let fhat: Vec<f64> = model.fhat_real()?.iter().copied().collect();
    let omega = &model.omega;
    let spec = QuadratureSpec::default();
    let mut failure = None;
    let mut eval = |t: f64| match formal_trace_integrand(omega, &fhat, lambda, t) {
        Ok(v) => v,
        Err(den) => {
            failure.get_or_insert(Error::Positivity { t, denominator: den });
            0.0
        }
    };
    let integral = if tau.is_infinite() {
        integrate_halfline(&mut eval, &spec)?.value
    } else {
        // [0, 1] directly, then [1, τ] in ln t.
        let head = integrate_interval(&mut eval, 0.0, 1.0, &spec)?.value;
        let tail = if tau > 1.0 {
            integrate_interval(|y| y.exp() * eval(y.exp()), 0.0, tau.ln(), &spec)?.value
        } else {
            0.0
        };
        head + tail
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(-32.0 * lambda * lambda / PI * integral)
}

pub fn formal_trace(model: &DiscretizedModel, tau_ladder: &[f64]) -> Result<FormalTrace> {
    if model.lambda < 0.0 {
        return Err(Error::InvalidInput("formal trace needs λ ≥ 0".into()));
    }
    if tau_ladder.windows(2).any(|w| !(w[1] > w[0])) || tau_ladder.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput("τ ladder must be positive and increasing".into()));
    }
    let value = formal_trace_value(model)?;
    let partials = tau_ladder
        .iter()
        .map(|&tau| formal_trace_upto(model, tau))
        .collect::<Result<Vec<f64>>>()?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = tau_ladder
        .iter()
        .zip(&partials)
        .filter(|(_, p)| p.abs() > 0.0)
        .map(|(t, p)| (t.ln(), p.abs().ln()))
        .unzip();
    let slope = fit_slope(&xs, &ys);
    let status = if slope > FORMAL_TRACE_SLOPE_TOL {
        Status::Divergent
    } else {
        Status::Bounded
    };
    let q = model.weighted_norm_sq(0.25);
    Ok(FormalTrace {
        value,
        tau_ladder: tau_ladder.to_vec(),
        partials,
        slope,
        status,
        bound: 16.0 * SQRT_2 * model.lambda * model.lambda * q * q,
    })
}

/// Smallest eigenvalue of `ξ − diag(ω)`.
pub fn xi_minus_omega_floor(blocks: &BogoliubovBlocks) -> Result<f64> {
    let d = &blocks.xi - DMatrix::from_diagonal(&blocks.omega);
    let sym = (&d + d.transpose()) * 0.5;
    Ok(eig_sym(&sym)?.values.iter().copied().fold(f64::INFINITY, f64::min))
}

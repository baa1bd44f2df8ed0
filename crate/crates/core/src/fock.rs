//! Truncated bosonic Fock space over a handful of modes.
//!
//! Occupation vectors `(n_1, …, n_d)` with `Σ n_i ≤ N_max` span the space.
//! Creation operators whose image would leave the cap are truncated, so the
//! assembled Hamiltonian is the compression of the formal one. Used as an
//! independent oracle for the one-body diagonalization.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bogoliubov::{build_blocks, ground_energy, shale_trace, XiMode};
use crate::error::{Error, Result};
use crate::model::DiscretizedModel;
use crate::numerics::eig_herm;
use crate::report::Status;

/// Largest basis handled by the dense eigensolver.
pub const MAX_BASIS_DIM: usize = 5000;
/// Largest number of modes.
pub const MAX_MODES: usize = 8;

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

/// Occupation-number basis in lexicographic order.
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: usize,
    nmax: u32,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

impl FockBasis {
    pub fn new(modes: usize, nmax: u32) -> Result<Self> {
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::InvalidInput(format!(
                "fock basis needs 1..={MAX_MODES} modes, got {modes}"
            )));
        }
        let dim = binomial(modes as u64 + nmax as u64, modes as u64) as usize;
        if dim > MAX_BASIS_DIM {
            return Err(Error::BasisTooLarge {
                dim,
                cap: MAX_BASIS_DIM,
            });
        }
        let mut states = Vec::with_capacity(dim);
        let mut current = vec![0u32; modes];
        fill(&mut states, &mut current, 0, nmax);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self {
            modes,
            nmax,
            states,
            index,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nmax(&self) -> u32 {
        self.nmax
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn particles(&self, i: usize) -> u32 {
        self.states[i].iter().sum()
    }

    /// Index of `Ω`.
    pub fn vacuum(&self) -> usize {
        0
    }
}

fn fill(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, mode: usize, left: u32) {
    if mode == current.len() {
        out.push(current.clone());
        return;
    }
    for n in 0..=left {
        current[mode] = n;
        fill(out, current, mode + 1, left - n);
    }
    current[mode] = 0;
}

/// Particle-number change induced by an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumberChange {
    Fixed(i32),
    Mixed,
}

#[derive(Debug, Clone)]
pub struct FockOperator {
    pub matrix: DMatrix<C>,
    pub change: NumberChange,
}

impl FockOperator {
    fn new(matrix: DMatrix<C>, change: NumberChange) -> Self {
        Self { matrix, change }
    }

    /// Number change read off the sparsity pattern.
    pub fn observed_change(&self, basis: &FockBasis) -> Option<NumberChange> {
        let mut seen: Option<i32> = None;
        for j in 0..self.matrix.ncols() {
            for i in 0..self.matrix.nrows() {
                if self.matrix[(i, j)].norm() > 0.0 {
                    let delta = basis.particles(i) as i32 - basis.particles(j) as i32;
                    match seen {
                        None => seen = Some(delta),
                        Some(d) if d != delta => return Some(NumberChange::Mixed),
                        _ => {}
                    }
                }
            }
        }
        seen.map(NumberChange::Fixed)
    }
}

/// `a*_i`: raises `n_i` with factor `√(n_i + 1)`; images beyond the cap are dropped.
pub fn mode_creation(basis: &FockBasis, mode: usize) -> DMatrix<C> {
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut s = basis.state(j).to_vec();
        let n = s[mode];
        s[mode] += 1;
        if let Some(i) = basis.index_of(&s) {
            m[(i, j)] = c((n as f64 + 1.0).sqrt());
        }
    }
    m
}

/// `a_i`: lowers `n_i` with factor `√n_i`.
pub fn mode_annihilation(basis: &FockBasis, mode: usize) -> DMatrix<C> {
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut s = basis.state(j).to_vec();
        let n = s[mode];
        if n == 0 {
            continue;
        }
        s[mode] -= 1;
        let i = basis.index_of(&s).expect("lowering stays in the basis");
        m[(i, j)] = c((n as f64).sqrt());
    }
    m
}

fn check_len(basis: &FockBasis, g: &[C]) -> Result<()> {
    if g.len() != basis.modes() {
        return Err(Error::InvalidInput(format!(
            "one-body vector has {} entries for {} modes",
            g.len(),
            basis.modes()
        )));
    }
    Ok(())
}

/// `a*(g) = Σ g_i a*_i`.
pub fn creation_op(basis: &FockBasis, g: &[C]) -> Result<FockOperator> {
    check_len(basis, g)?;
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let state = basis.state(j);
        for (mode, &gi) in g.iter().enumerate() {
            if gi == c(0.0) {
                continue;
            }
            let mut s = state.to_vec();
            s[mode] += 1;
            if let Some(i) = basis.index_of(&s) {
                m[(i, j)] += gi * (state[mode] as f64 + 1.0).sqrt();
            }
        }
    }
    Ok(FockOperator::new(m, NumberChange::Fixed(1)))
}

/// `a(g) = Σ conj(g_i) a_i`, antilinear in `g`.
pub fn annihilation_op(basis: &FockBasis, g: &[C]) -> Result<FockOperator> {
    check_len(basis, g)?;
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let state = basis.state(j);
        for (mode, &gi) in g.iter().enumerate() {
            let n = state[mode];
            if n == 0 || gi == c(0.0) {
                continue;
            }
            let mut s = state.to_vec();
            s[mode] -= 1;
            let i = basis.index_of(&s).expect("lowering stays in the basis");
            m[(i, j)] += gi.conj() * (n as f64).sqrt();
        }
    }
    Ok(FockOperator::new(m, NumberChange::Fixed(-1)))
}

/// `dΓ(A) = Σ_ij A_ij a*_i a_j`; number conserving, so exact on the truncated space.
pub fn second_quantize(basis: &FockBasis, a: &DMatrix<C>) -> Result<FockOperator> {
    let d = basis.modes();
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::InvalidInput(format!("one-body matrix must be {d}x{d}")));
    }
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let state = basis.state(col);
        for j in 0..d {
            let nj = state[j];
            if nj == 0 {
                continue;
            }
            let mut lowered = state.to_vec();
            lowered[j] -= 1;
            let fj = (nj as f64).sqrt();
            for i in 0..d {
                let aij = a[(i, j)];
                if aij == c(0.0) {
                    continue;
                }
                let mut s = lowered.clone();
                let ni = s[i];
                s[i] += 1;
                let row = basis.index_of(&s).expect("number conserving");
                m[(row, col)] += aij * fj * (ni as f64 + 1.0).sqrt();
            }
        }
    }
    Ok(FockOperator::new(m, NumberChange::Fixed(0)))
}

pub fn second_quantize_real(basis: &FockBasis, a: &DMatrix<f64>) -> Result<FockOperator> {
    second_quantize(basis, &a.map(c))
}

/// `𝒩 = dΓ(1)`.
pub fn number_op(basis: &FockBasis) -> FockOperator {
    let diag = DVector::from_iterator(basis.dim(), (0..basis.dim()).map(|i| c(basis.particles(i) as f64)));
    FockOperator::new(DMatrix::from_diagonal(&diag), NumberChange::Fixed(0))
}

/// `:(a*(f) + a(f))²: = a(f)² + a*(f)² + 2a*(f)a(f)`.
pub fn normal_ordered_square(basis: &FockBasis, f: &[C]) -> Result<FockOperator> {
    let ad = creation_op(basis, f)?.matrix;
    let a = annihilation_op(basis, f)?.matrix;
    let m = &a * &a + &ad * &ad + (&ad * &a) * c(2.0);
    Ok(FockOperator::new(m, NumberChange::Mixed))
}

/// `|f⟩⟨f|` as a one-body matrix.
fn projector(f: &[C]) -> DMatrix<C> {
    let d = f.len();
    DMatrix::from_fn(d, d, |i, j| f[i] * f[j].conj())
}

/// `H = dΓ(h) + λ(a*(f)² + a(f)²)` with `h = ω + 2λ|f⟩⟨f|`. `f` is given in
/// orthonormal mode coordinates.
pub fn build_hamiltonian(basis: &FockBasis, omega: &[f64], f: &[C], lambda: f64) -> Result<FockOperator> {
    Ok(hamiltonian_routes(basis, omega, f, lambda)?.0)
}

/// The two groupings `dΓ(h) + λ(a*² + a²)` and `dΓ(ω) + λ:(a* + a)²:`.
pub fn hamiltonian_routes(
    basis: &FockBasis,
    omega: &[f64],
    f: &[C],
    lambda: f64,
) -> Result<(FockOperator, FockOperator)> {
    if omega.len() != basis.modes() {
        return Err(Error::InvalidInput("ω has the wrong number of modes".into()));
    }
    check_len(basis, f)?;
    let w = DMatrix::from_diagonal(&DVector::from_iterator(omega.len(), omega.iter().map(|&x| c(x))));
    let h = &w + projector(f) * c(2.0 * lambda);
    let ad = creation_op(basis, f)?.matrix;
    let a = annihilation_op(basis, f)?.matrix;
    let pairs = &ad * &ad + &a * &a;
    let first = second_quantize(basis, &h)?.matrix + pairs * c(lambda);
    let second = second_quantize(basis, &w)?.matrix + normal_ordered_square(basis, f)?.matrix * c(lambda);
    let change = if lambda == 0.0 {
        NumberChange::Fixed(0)
    } else {
        NumberChange::Mixed
    };
    Ok((FockOperator::new(first, change), FockOperator::new(second, change)))
}

fn model_modes(model: &DiscretizedModel) -> (Vec<f64>, Vec<C>) {
    (model.omega.clone(), model.fhat())
}

/// Lowest eigenvalues and the ground state of the truncated Hamiltonian.
pub fn truncated_spectrum(basis: &FockBasis, model: &DiscretizedModel) -> Result<(Vec<f64>, DVector<C>)> {
    let (omega, f) = model_modes(model);
    let h = build_hamiltonian(basis, &omega, &f, model.lambda)?;
    let e = eig_herm(&h.matrix)?;
    Ok((e.values.iter().copied().collect(), e.vectors.column(0).into_owned()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralComparison {
    pub nmax: u32,
    pub margin: u32,
    pub computed: Vec<f64>,
    pub predicted: Vec<f64>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    /// Largest change of a compared level between `N_max − 2` and `N_max`.
    pub truncation_shift: f64,
    pub ground_energy: f64,
    pub tolerance: f64,
    pub status: Status,
}

/// Levels above `E₀ + (N_max − margin + 1)·ν_min` are not compared.
pub const SPECTRAL_MARGIN: u32 = 2;

/// All values `Σ n_i ν_i` with `Σ n_i ≤ cap`, ascending.
pub fn quasi_particle_levels(nu: &[f64], cap: u32) -> Vec<f64> {
    let mut out = Vec::new();
    let mut current = vec![0u32; nu.len()];
    let mut states = Vec::new();
    fill(&mut states, &mut current, 0, cap);
    for s in states {
        out.push(s.iter().zip(nu).map(|(&n, &v)| n as f64 * v).sum());
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Lowest `levels` eigenvalues of the truncated `H` against `Σ n_i ν_i + ½ tr(ξ − h)`.
pub fn spectral_compare(
    basis: &FockBasis,
    model: &DiscretizedModel,
    levels: usize,
    tol: f64,
) -> Result<SpectralComparison> {
    if model.dim() != basis.modes() {
        return Err(Error::InvalidInput(
            "model and basis have different numbers of modes".into(),
        ));
    }
    let blocks = build_blocks(model, XiMode::Direct)?;
    let nu: Vec<f64> = blocks.xi_eigen.values.iter().copied().collect();
    let e0 = ground_energy(&blocks);
    let nmax = basis.nmax();
    let margin = SPECTRAL_MARGIN.min(nmax);
    let cap = nmax - margin;
    let nu_min = nu.iter().copied().fold(f64::INFINITY, f64::min);
    let ceiling = e0 + (cap as f64 + 1.0) * nu_min;
    let predicted: Vec<f64> = quasi_particle_levels(&nu, cap)
        .into_iter()
        .map(|x| x + e0)
        .filter(|&x| x < ceiling)
        .take(levels)
        .collect();
    let (spectrum, _) = truncated_spectrum(basis, model)?;
    let k = predicted.len().min(spectrum.len());
    let computed = spectrum[..k].to_vec();
    let gaps: Vec<f64> = computed.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).collect();
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);

    let truncation_shift = if nmax >= 2 {
        let lower = FockBasis::new(basis.modes(), nmax - 2)?;
        let (prev, _) = truncated_spectrum(&lower, model)?;
        computed
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let status = if truncation_shift > tol {
        Status::Inconclusive
    } else {
        Status::from_bool(max_gap <= tol && k == levels.min(predicted.len()) && k > 0)
    };
    Ok(SpectralComparison {
        nmax,
        margin,
        computed,
        predicted,
        gaps,
        max_gap,
        truncation_shift,
        ground_energy: e0,
        tolerance: tol,
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VacuumNumber {
    /// `⟨ψ₀|𝒩ψ₀⟩` at `N_max`.
    pub value: f64,
    /// Same at `N_max − 2`.
    pub previous: f64,
    /// `tr(VVᵀ)` from the one-body blocks.
    pub shale: f64,
    pub tolerance: f64,
    pub status: Status,
}

fn ground_number(basis: &FockBasis, model: &DiscretizedModel) -> Result<f64> {
    let (_, psi) = truncated_spectrum(basis, model)?;
    Ok((0..basis.dim())
        .map(|i| psi[i].norm_sqr() * basis.particles(i) as f64)
        .sum())
}

pub fn vacuum_number_expectation(basis: &FockBasis, model: &DiscretizedModel, tol: f64) -> Result<VacuumNumber> {
    let value = ground_number(basis, model)?;
    let previous = if basis.nmax() >= 2 {
        ground_number(&FockBasis::new(basis.modes(), basis.nmax() - 2)?, model)?
    } else {
        f64::INFINITY
    };
    let shale = shale_trace(&build_blocks(model, XiMode::Direct)?).direct;
    let status = if (value - previous).abs() > tol {
        Status::Inconclusive
    } else {
        Status::from_bool((value - shale).abs() <= tol)
    };
    Ok(VacuumNumber {
        value,
        previous,
        shale,
        tolerance: tol,
        status,
    })
}

/// Random state with zero weight on the top two particle levels.
pub fn guarded_random_state(basis: &FockBasis, rng: &mut ChaCha8Rng) -> DVector<C> {
    let cap = basis.nmax().saturating_sub(2);
    let mut v = DVector::from_fn(basis.dim(), |i, _| {
        if basis.particles(i) <= cap {
            C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            c(0.0)
        }
    });
    let n = v.norm();
    if n > 0.0 {
        v /= c(n);
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeBoundReport {
    pub trials: usize,
    pub seed: u64,
    /// Trials violating `‖:φ²:Ψ‖ ≤ √6‖f‖²(‖𝒩Ψ‖ + ‖Ψ‖)`.
    pub violations: usize,
    /// Largest ratio of the left side to the right side of that bound.
    pub worst_ratio: f64,
    /// Trials violating `‖:φ²:Ψ‖ ≤ ‖f‖²(4‖𝒩Ψ‖ + 2‖Ψ‖)`, which holds for every state.
    pub crude_violations: usize,
    /// Status of the `√6` form.
    pub status: Status,
}

/// Checks the relative bound of the normal-ordered square against `𝒩` on
/// the vacuum, on number eigenstates and on `trials` guarded random states.
///
/// The `√6` constant is not uniform: single-mode states close to coherent
/// states reach a ratio of `4/√6`. It holds on random states once `d ≥ 2`.
pub fn relative_bound_check(basis: &FockBasis, f: &[C], trials: usize, seed: u64) -> Result<RelativeBoundReport> {
    let phi2 = normal_ordered_square(basis, f)?.matrix;
    let number = number_op(basis).matrix;
    let f2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let sqrt6 = 6f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = basis.nmax().saturating_sub(2);
    let mut states: Vec<DVector<C>> = (0..basis.dim())
        .filter(|&i| basis.particles(i) <= cap)
        .map(|i| {
            let mut e = DVector::zeros(basis.dim());
            e[i] = c(1.0);
            e
        })
        .collect();
    let deterministic = states.len();
    states.extend((0..trials).map(|_| guarded_random_state(basis, &mut rng)));
    let mut violations = 0;
    let mut crude_violations = 0;
    let mut worst_ratio = 0.0_f64;
    for psi in &states {
        let lhs = (&phi2 * psi).norm();
        let n_psi = (&number * psi).norm();
        let p = psi.norm();
        let rhs = sqrt6 * f2 * (n_psi + p);
        if lhs > rhs * (1.0 + 1e-12) {
            violations += 1;
        }
        if lhs > f2 * (4.0 * n_psi + 2.0 * p) * (1.0 + 1e-12) {
            crude_violations += 1;
        }
        if rhs > 0.0 {
            worst_ratio = worst_ratio.max(lhs / rhs);
        }
    }
    Ok(RelativeBoundReport {
        trials: trials + deterministic,
        seed,
        violations,
        worst_ratio,
        crude_violations,
        status: Status::from_bool(violations == 0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaugeReport {
    pub theta: Option<f64>,
    /// Largest eigenvalue difference between `H(f)` and `H(|f|)`.
    pub spectral_gap: f64,
    pub status: Status,
}

fn spectrum_of(basis: &FockBasis, omega: &[f64], f: &[C], lambda: f64) -> Result<Vec<f64>> {
    let h = build_hamiltonian(basis, omega, f, lambda)?;
    Ok(eig_herm(&h.matrix)?.values.iter().copied().collect())
}

/// Spectra of `H(f)` and `H(|f|)`.
pub fn gauge_equivalence(
    basis: &FockBasis,
    omega: &[f64],
    f: &[C],
    lambda: f64,
    theta: Option<f64>,
) -> Result<GaugeReport> {
    let modulus: Vec<C> = f.iter().map(|z| c(z.norm())).collect();
    let a = spectrum_of(basis, omega, f, lambda)?;
    let b = spectrum_of(basis, omega, &modulus, lambda)?;
    let scale = b.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
    Ok(GaugeReport {
        theta,
        spectral_gap: gap,
        status: Status::from_bool(gap <= 1e-10),
    })
}

/// `e^{iθ} g` for real `g`.
pub fn rotate(g: &[f64], theta: f64) -> Vec<C> {
    let phase = C::from_polar(1.0, theta);
    g.iter().map(|&x| phase * x).collect()
}

/// Indices of states with `Σ n_i ≤ N_max − 2`.
pub fn guarded_indices(basis: &FockBasis) -> Vec<usize> {
    let cap = basis.nmax().saturating_sub(2);
    (0..basis.dim()).filter(|&i| basis.particles(i) <= cap).collect()
}

fn max_on_columns(m: &DMatrix<C>, cols: &[usize]) -> f64 {
    cols.iter()
        .flat_map(|&j| m.column(j).iter().map(|z| z.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcrResiduals {
    /// `max |([a(g), a*(h)] − ⟨g|h⟩)Ψ|` over guarded basis states.
    pub mixed: f64,
    /// `max |[a(g), a(h)]Ψ|`.
    pub annihilators: f64,
    /// `‖a(g) − a*(g)^†‖`.
    pub adjoint: f64,
}

pub fn ccr_residuals(basis: &FockBasis, g: &[C], h: &[C]) -> Result<CcrResiduals> {
    let ag = annihilation_op(basis, g)?.matrix;
    let ah = annihilation_op(basis, h)?.matrix;
    let adh = creation_op(basis, h)?.matrix;
    let adg = creation_op(basis, g)?.matrix;
    let inner: C = g.iter().zip(h).map(|(a, b)| a.conj() * b).sum();
    let dim = basis.dim();
    let comm = &ag * &adh - &adh * &ag - DMatrix::<C>::identity(dim, dim) * inner;
    let comm2 = &ag * &ah - &ah * &ag;
    let cols = guarded_indices(basis);
    Ok(CcrResiduals {
        mixed: max_on_columns(&comm, &cols),
        annihilators: max_on_columns(&comm2, &cols),
        adjoint: (&ag - adg.adjoint()).norm(),
    })
}

/// Worst value of `‖a(f)Ψ‖² − ‖ω^{-s/2}f‖²⟨Ψ|dΓ(ω^s)Ψ⟩` over guarded random states (should be ≤ 0).
pub fn annihilation_bound_excess(
    basis: &FockBasis,
    omega: &[f64],
    f: &[C],
    s: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let a = annihilation_op(basis, f)?.matrix;
    let ws = DMatrix::from_diagonal(&DVector::from_iterator(
        omega.len(),
        omega.iter().map(|&w| c(w.powf(s))),
    ));
    let dg = second_quantize(basis, &ws)?.matrix;
    let weight: f64 = f.iter().zip(omega).map(|(z, &w)| z.norm_sqr() * w.powf(-s)).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let psi = guarded_random_state(basis, &mut rng);
        let lhs = (&a * &psi).norm_squared();
        let rhs = weight * psi.dotc(&(&dg * &psi)).re;
        worst = worst.max(lhs - rhs);
    }
    Ok(worst)
}

/// Smallest eigenvalue of `𝒩 dΓ(ω) − dΓ(ω^{1/2})²` restricted to guarded states.
pub fn sqrt_dispersion_bound_floor(basis: &FockBasis, omega: &[f64]) -> Result<f64> {
    let diag = |p: f64| {
        DMatrix::from_diagonal(&DVector::from_iterator(
            omega.len(),
            omega.iter().map(|&w| c(w.powf(p))),
        ))
    };
    let d1 = second_quantize(basis, &diag(1.0))?.matrix;
    let dh = second_quantize(basis, &diag(0.5))?.matrix;
    let n = number_op(basis).matrix;
    let diff = &n * &d1 - &dh * &dh;
    let cols = guarded_indices(basis);
    let sub = DMatrix::from_fn(cols.len(), cols.len(), |i, j| diff[(cols[i], cols[j])]);
    let herm = (&sub + sub.adjoint()) * c(0.5);
    Ok(eig_herm(&herm)?.values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `−λ‖f‖²`, a lower bound on `H` for `λ ≥ 0` since `:φ²: = φ² − ‖f‖²`.
pub fn hamiltonian_lower_bound(f: &[C], lambda: f64) -> f64 {
    -lambda * f.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

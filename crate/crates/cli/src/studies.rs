use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use renorm_core::bogoliubov::{
    bogoliubov_constant, build_blocks, build_blocks_with, diagonalization_residual, formal_trace_value, ground_energy,
    pivotal_identity, recombined_energy, shale_trace, symplectic_residuals, xi_minus_omega_floor,
};
use renorm_core::fock::{
    annihilation_bound_excess, ccr_residuals, gauge_equivalence, hamiltonian_lower_bound, hamiltonian_routes,
    relative_bound_check, rotate, spectral_compare, sqrt_dispersion_bound_floor, vacuum_number_expectation, FockBasis,
};
use renorm_core::model::{coarse_grain, gauge_reduce};
use renorm_core::numerics::QuadratureSpec;
use renorm_core::rankone::{
    default_family_samples, power, resolvent_family_check, resolvent_rank_one, scalar_power, trace_sqrt_shift,
};
use renorm_core::renorm::{
    divergence_probe, flow_run, regular_resolvent, renormalized_coupling, renormalized_resolvent, shale_growth,
    DivergenceProbe,
};
use renorm_core::report::rel_diff;
use renorm_core::{
    build_model, Check, DiscretizedModel, Exponent, FlowRecord, Method, RankOneOp, RootMethod, ScenarioConfig, Status,
    XiMode,
};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Identities,
    Diagonalize,
    Flow,
    ShaleScan,
    Fock,
}

impl Study {
    pub const ALL: [Study; 5] = [
        Study::Identities,
        Study::Diagonalize,
        Study::Flow,
        Study::ShaleScan,
        Study::Fock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::Identities => "identities",
            Study::Diagonalize => "diagonalize",
            Study::Flow => "flow",
            Study::ShaleScan => "shale-scan",
            Study::Fock => "fock",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub seed: u64,
    pub inject_fault: bool,
    pub timing: bool,
}

pub struct StudyOutcome {
    pub study: Study,
    pub checks: Vec<Check>,
    pub payload: Value,
    pub flow: Option<Vec<FlowRecord>>,
    pub probes: Option<Vec<DivergenceProbe>>,
    pub elapsed_ms: Option<f64>,
}

impl StudyOutcome {
    fn new(study: Study, checks: Vec<Check>, payload: Value) -> Self {
        Self {
            study,
            checks,
            payload,
            flow: None,
            probes: None,
            elapsed_ms: None,
        }
    }
}

pub fn run(study: Study, config: &ScenarioConfig, options: &Options) -> anyhow::Result<StudyOutcome> {
    let start = Instant::now();
    let mut outcome = match study {
        Study::Identities => identities(config, options)?,
        Study::Diagonalize => diagonalize(config)?,
        Study::Flow => flow(config)?,
        Study::ShaleScan => shale_scan(config)?,
        Study::Fock => fock(config, options)?,
    };
    if options.timing {
        outcome.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(outcome)
}

/// Real-gauge model; complex form factors are replaced by their modulus.
fn real_model(config: &ScenarioConfig) -> anyhow::Result<DiscretizedModel> {
    let model = build_model(config)?;
    Ok(if model.is_real() { model } else { gauge_reduce(&model).0 })
}

pub fn random_op(rng: &mut ChaCha8Rng, n: usize, signed: bool) -> RankOneOp {
    let a = DVector::from_fn(n, |_, _| rng.random_range(0.5f64.ln()..20f64.ln()).exp());
    let psi = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let alpha = if signed && rng.random_bool(0.5) {
        // Keep T positive: α > −1/⟨ψ|A^{-1}ψ⟩.
        let q: f64 = psi.iter().zip(a.iter()).map(|(p, x)| p * p / x).sum();
        -rng.random_range(0.1..0.9) / q
    } else {
        rng.random_range(0.2..2.0)
    };
    RankOneOp::new(a, psi, alpha).expect("finite random instance")
}

fn complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

fn identities(config: &ScenarioConfig, options: &Options) -> anyhow::Result<StudyOutcome> {
    let mut checks = Vec::new();
    let spec = QuadratureSpec::default();
    let exponents = [
        Exponent::Half,
        Exponent::NegHalf,
        Exponent::Quarter,
        Exponent::NegQuarter,
    ];

    let mut appendix = Vec::new();
    for e in exponents {
        let mut worst = 0.0_f64;
        for x in [0.5, 1.0, 4.0, 100.0] {
            let got = scalar_power(x, e, &spec)?;
            worst = worst.max(rel_diff(got, x.powf(e.value()), 0.0));
        }
        appendix.push(json!({ "exponent": e, "max_rel_err": worst }));
        checks.push(Check::at_most(format!("scalar-kernel-{}", e.value()), worst, 1e-8));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let z = Complex64::new(-1.5, 0.7);
    let mut resolvent_err = 0.0_f64;
    let mut identity_err = 0.0_f64;
    for trial in 0..100 {
        let op = random_op(&mut rng, 16, true);
        let mut r = resolvent_rank_one(&op, z)?;
        if options.inject_fault && trial == 0 {
            let scale = r.norm();
            r[(0, 0)] += Complex64::new(1e-6 * scale, 0.0);
        }
        let dense = (complex(&op.dense()) - DMatrix::<Complex64>::identity(16, 16) * z)
            .try_inverse()
            .ok_or_else(|| anyhow::anyhow!("dense resolvent is singular"))?;
        resolvent_err = resolvent_err.max((&r - &dense).norm() / dense.norm());
        let fam = resolvent_family_check(|w| resolvent_rank_one(&op, w), &default_family_samples())?;
        identity_err = identity_err.max(fam.resolvent_identity);
    }
    let mut c = Check::at_most("rank-one-resolvent-vs-dense", resolvent_err, 1e-10);
    if options.inject_fault {
        c = c.detail("seeded fault: resolvent entry (0,0) perturbed by 1e-6 relative");
    }
    checks.push(c);
    checks.push(Check::at_most("first-resolvent-identity", identity_err, 1e-10));

    let mut power_err = 0.0_f64;
    let mut composition_err = 0.0_f64;
    for (n, count) in [(16, 20), (64, 5)] {
        for _ in 0..count {
            let op = random_op(&mut rng, n, false);
            let mut by_method = Vec::new();
            for e in exponents {
                let q = power(&op, e, Method::Quadrature, &spec)?;
                let d = power(&op, e, Method::Eig, &spec)?;
                power_err = power_err.max((&q - &d).norm() / d.norm());
                by_method.push(q);
            }
            let eye = DMatrix::<f64>::identity(n, n);
            let half = (&by_method[0] * &by_method[1] - &eye).norm() / eye.norm();
            let q2 = &by_method[2] * &by_method[2];
            let t = op.dense();
            let quartic = (&q2 * &q2 - &t).norm() / t.norm();
            composition_err = composition_err.max(half).max(quartic);
        }
    }
    checks.push(Check::at_most("fractional-powers-quadrature-vs-eig", power_err, 1e-6));
    checks.push(Check::at_most("fractional-power-compositions", composition_err, 1e-5));

    let mut trace_err = 0.0_f64;
    for _ in 0..10 {
        let op = random_op(&mut rng, 16, false);
        let integral = trace_sqrt_shift(&op)?;
        let direct = op.eigen().sqrt_shift_sum();
        trace_err = trace_err.max(rel_diff(integral, direct, 1e-300));
    }
    checks.push(Check::at_most("sqrt-shift-trace-vs-spectrum", trace_err, 1e-8));
    let (a, alpha) = (2.0, 3.0);
    let scalar = RankOneOp::new(DVector::from_element(1, a), DVector::from_element(1, 1.0), alpha)?;
    let closed = (a + alpha).sqrt() - a.sqrt();
    checks.push(Check::at_most(
        "sqrt-shift-trace-scalar",
        rel_diff(trace_sqrt_shift(&scalar)?, closed, 0.0),
        1e-10,
    ));

    let model = real_model(config)?;
    let m = model.dim();
    let base = model.with_lambda(0.0);
    let xi0 = build_blocks(&base, XiMode::Direct)?;
    let reduce = (&xi0.xi - DMatrix::from_diagonal(&model.omega_vec())).norm();
    let r0 = regular_resolvent(&base, Complex64::new(-1.0, 0.0))?;
    let d0 = DMatrix::from_diagonal(&DVector::from_fn(m, |i, _| {
        Complex64::new(1.0 / (model.omega[i].powi(2) + 1.0), 0.0)
    }));
    let reduce_err = (reduce / model.max_omega()).max((&r0 - &d0).norm() / d0.norm());
    checks.push(Check::at_most("zero-coupling-reduces-to-base", reduce_err, 1e-14));

    let zm1 = Complex64::new(-1.0, 0.0);
    let mut coupling_err = 0.0_f64;
    let mut family_err = 0.0_f64;
    for lambda in [-0.1, -0.5, -2.0] {
        let lt = renormalized_coupling(&model, lambda)?;
        let lhs = renormalized_resolvent(&model.with_lambda(lambda), zm1)?;
        let rhs = regular_resolvent(&model.with_lambda(lt), zm1)?;
        coupling_err = coupling_err.max((&lhs - &rhs).norm() / rhs.norm());
        let renorm = model.with_lambda(lambda);
        let fam = resolvent_family_check(|w| renormalized_resolvent(&renorm, w), &default_family_samples())?;
        family_err = family_err.max(fam.conjugate_symmetry).max(fam.resolvent_identity);
        if fam.kernel_proxy.partial_cmp(&1e-12) != Some(std::cmp::Ordering::Greater) {
            family_err = f64::INFINITY;
        }
    }
    checks.push(Check::at_most("renormalized-coupling-identity", coupling_err, 1e-10));
    checks.push(Check::at_most("renormalized-family-axioms", family_err, 1e-10));

    let payload = json!({
        "scalar_kernels": appendix,
        "resolvent_max_rel_err": resolvent_err,
        "resolvent_identity_max": identity_err,
        "power_max_rel_err": power_err,
        "composition_max_rel_err": composition_err,
        "trace_max_rel_err": trace_err,
        "renormalized_coupling_max_rel_err": coupling_err,
        "renormalized_family_max": family_err,
        "fault_injected": options.inject_fault,
    });
    Ok(StudyOutcome::new(Study::Identities, checks, payload))
}

fn diagonalize(config: &ScenarioConfig) -> anyhow::Result<StudyOutcome> {
    let model = real_model(config)?;
    let mode = if model.lambda < 0.0 {
        XiMode::RenormalizedResolvent
    } else {
        XiMode::Direct
    };
    let blocks = build_blocks(&model, mode)?;
    let mut checks = Vec::new();
    let symp = symplectic_residuals(&blocks);
    checks.push(Check::at_most("symplectic-residual", symp.max(), 1e-8));
    let diag = diagonalization_residual(&blocks);
    checks.push(Check::at_most("block-diagonalization-residual", diag, 1e-8));
    let piv = pivotal_identity(&blocks);
    checks.push(Check::at_most("pivotal-trace-identity", piv.relative_gap(), 1e-7));
    let shale = shale_trace(&blocks);
    checks.push(Check::at_most(
        "shale-trace-identity",
        rel_diff(shale.identity, shale.direct, 1e-300),
        1e-8,
    ));
    let energy = ground_energy(&blocks);
    let constant = bogoliubov_constant(&blocks);
    let recombined = recombined_energy(&blocks);
    let floor = energy.abs().max(1e-300);
    checks.push(Check::at_most(
        "normal-ordering-constant",
        (constant - energy).abs() / floor,
        1e-7,
    ));
    checks.push(Check::at_most(
        "recombined-energy",
        (recombined - energy).abs() / floor,
        1e-7,
    ));
    let mut formal = None;
    if model.lambda >= 0.0 {
        let value = formal_trace_value(&model)?;
        formal = Some(value);
        checks.push(Check::at_most(
            "energy-vs-trace-integral",
            rel_diff(0.5 * value, energy, 1e-300),
            1e-7,
        ));
        let gap = xi_minus_omega_floor(&blocks)?;
        checks.push(Check::at_most("xi-dominates-omega", -gap, 1e-12 * model.max_omega()));
    }
    if model.dim() <= 64 {
        let quad = build_blocks_with(&model, mode, RootMethod::Quadrature)?;
        let err = (&quad.u - &blocks.u).norm().max((&quad.v - &blocks.v).norm()) / blocks.u.norm();
        checks.push(Check::at_most("blocks-quadrature-vs-eig", err, 1e-6));
    }
    let values = &blocks.xi_eigen.values;
    let mut payload = json!({
        "dim": model.dim(),
        "mode": mode,
        "lambda": blocks.lambda,
        "lambda_eff": blocks.lambda_eff,
        "symplectic": symp,
        "diagonalization_residual": diag,
        "pivotal": { "lhs": piv.lhs, "rhs": piv.rhs },
        "shale": shale,
        "ground_energy": energy,
        "normal_ordering_constant": constant,
        "recombined_energy": recombined,
        "formal_trace": formal,
        "xi_min": values.min(),
        "xi_max": values.max(),
    });
    if model.dim() == 1 {
        payload["scalar"] = json!({
            "xi": blocks.xi[(0, 0)],
            "u": blocks.u[(0, 0)],
            "v": blocks.v[(0, 0)],
            "energy": energy,
        });
    }
    Ok(StudyOutcome::new(Study::Diagonalize, checks, payload))
}

fn flow(config: &ScenarioConfig) -> anyhow::Result<StudyOutcome> {
    let run = flow_run(config)?;
    let payload = json!({
        "case": run.case,
        "classification": run.regularity.classification,
        "regularity": run.regularity,
        "lambda": run.lambda,
        "reference_lambda": run.reference_lambda,
        "shale_ceiling": run.shale_ceiling,
        "formal_trace": run.formal_trace,
        "records": run.records,
        "note": "finite grids conflate strong and norm resolvent convergence; only the norm gap is reported",
    });
    let mut outcome = StudyOutcome::new(Study::Flow, run.checks.clone(), payload);
    outcome.flow = Some(run.records);
    Ok(outcome)
}

fn shale_scan(config: &ScenarioConfig) -> anyhow::Result<StudyOutcome> {
    let lambda = config.flow.probe_lambda;
    let taus = &config.flow.tau_ladder;
    let mut checks = Vec::new();
    let mut probes = Vec::new();
    for &alpha in &config.flow.alphas {
        let p = divergence_probe(alpha, lambda, taus)?;
        let tag = format!("alpha-{alpha}");
        checks.push(Check::with_status(format!("probe-{tag}"), p.status, p.i0_est, 1e-3));
        if p.trace_divergent_pointwise {
            probes.push(p);
            continue;
        }
        if alpha == 0.0 {
            checks.push(Check::at_most(format!("i0-vanishes-{tag}"), p.i0_est.abs(), 1e-3));
        } else {
            checks.push(Check::at_most(
                format!("i0-matches-quadrature-{tag}"),
                rel_diff(p.i0_est, p.i0_quad, 0.0),
                0.1,
            ));
        }
        checks.push(Check::at_most(
            format!("head-bound-{tag}"),
            p.head.abs() - p.head_bound,
            0.0,
        ));
        probes.push(p);
    }
    let mut finite: Vec<&DivergenceProbe> = probes.iter().filter(|p| !p.trace_divergent_pointwise).collect();
    finite.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let monotone = finite.windows(2).all(|w| w[1].i0_quad > w[0].i0_quad);
    checks.push(Check::with_status(
        "i0-monotone-in-alpha",
        Status::from_bool(monotone),
        finite.len() as f64,
        0.0,
    ));

    let growth = shale_growth(1.0, lambda, &[256, 512, 1024])?;
    checks.push(Check::with_status(
        "shale-growth-without-charge",
        Status::from_bool(growth.status == Status::Divergent),
        growth.exponent,
        0.05,
    ));
    let payload = json!({ "lambda": lambda, "tau_ladder": taus, "probes": probes, "growth": growth });
    let mut outcome = StudyOutcome::new(Study::ShaleScan, checks, payload);
    outcome.probes = Some(probes);
    Ok(outcome)
}

fn fock(config: &ScenarioConfig, options: &Options) -> anyhow::Result<StudyOutcome> {
    let spec = &config.fock;
    let mut model = real_model(config)?;
    if let Some(l) = spec.lambda {
        model = model.with_lambda(l);
    }
    let mut coarse = coarse_grain(&model, spec.modes.min(model.dim()))?;
    // Negative couplings are only meaningful after charge renormalization.
    let bare_lambda = coarse.lambda;
    if bare_lambda < 0.0 {
        coarse = coarse.with_lambda(renormalized_coupling(&coarse, bare_lambda)?);
    }
    let basis = FockBasis::new(coarse.dim(), spec.nmax)?;
    let omega = coarse.omega.clone();
    let f = coarse.fhat();
    let lambda = coarse.lambda;
    let mut checks = Vec::new();

    let spectral = spectral_compare(&basis, &coarse, spec.levels, spec.tolerance)?;
    checks.push(Check::with_status(
        "spectrum-vs-quasi-particles",
        spectral.status,
        spectral.max_gap,
        spec.tolerance,
    ));
    let number = vacuum_number_expectation(&basis, &coarse, 5e-3)?;
    checks.push(Check::with_status(
        "ground-state-number-vs-shale",
        number.status,
        (number.value - number.shale).abs(),
        5e-3,
    ));
    let (h1, h2) = hamiltonian_routes(&basis, &omega, &f, lambda)?;
    let scale = h1.matrix.norm().max(1.0);
    checks.push(Check::at_most(
        "hamiltonian-routes-agree",
        (&h1.matrix - &h2.matrix).norm() / scale,
        1e-14,
    ));
    if lambda >= 0.0 {
        let bound = hamiltonian_lower_bound(&f, lambda);
        let ground = spectral.computed.first().copied().unwrap_or(f64::NAN);
        checks.push(Check::at_most("ground-energy-lower-bound", bound - ground, 1e-10));
    }
    let relative = relative_bound_check(&basis, &f, spec.trials, options.seed)?;
    checks.push(Check::at_most(
        "relative-bound-uniform",
        relative.crude_violations as f64,
        0.0,
    ));
    // The √6 constant is checked on two modes with at most eight particles.
    let pair_basis = FockBasis::new(2, 8)?;
    let pair_f = [f[0], f.get(1).copied().unwrap_or_default()];
    let pair = relative_bound_check(&pair_basis, &pair_f, spec.trials, options.seed)?;
    checks.push(Check::with_status(
        "relative-bound-sqrt6",
        pair.status,
        pair.worst_ratio,
        1.0,
    ));

    let g: Vec<f64> = f.iter().map(|z| z.re).collect();
    let mut gauge = Vec::new();
    for &theta in &spec.thetas {
        let r = gauge_equivalence(&basis, &omega, &rotate(&g, theta), lambda, Some(theta))?;
        checks.push(Check::with_status(
            format!("gauge-theta-{theta:.6}"),
            r.status,
            r.spectral_gap,
            1e-10,
        ));
        gauge.push(r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let phases: Vec<Complex64> = g
        .iter()
        .map(|&x| Complex64::from_polar(x, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let r = gauge_equivalence(&basis, &omega, &phases, lambda, None)?;
    checks.push(Check::with_status(
        "gauge-random-phases",
        r.status,
        r.spectral_gap,
        1e-10,
    ));
    gauge.push(r);

    let unit = |v: Vec<Complex64>| {
        let n = v
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            .max(f64::MIN_POSITIVE);
        v.into_iter().map(|z| z / n).collect::<Vec<_>>()
    };
    let weighted: Vec<f64> = g.iter().zip(&omega).map(|(a, w)| a * w.sqrt()).collect();
    let ccr = ccr_residuals(&basis, &unit(f.clone()), &unit(rotate(&weighted, 0.3)))?;
    checks.push(Check::at_most("ccr-guarded", ccr.mixed.max(ccr.annihilators), 1e-10));
    checks.push(Check::at_most("adjoint-relation", ccr.adjoint, 1e-12));
    for s in [0.0, 1.0] {
        let excess = annihilation_bound_excess(&basis, &omega, &f, s, 50, options.seed)?;
        let scale = coarse.weighted_norm_sq(s / 2.0) * coarse.max_omega().powf(s) * f64::from(basis.nmax());
        checks.push(Check::at_most(
            format!("annihilation-bound-s{s}"),
            excess / scale.max(1.0),
            1e-10,
        ));
    }
    let floor = sqrt_dispersion_bound_floor(&basis, &omega)?;
    let scale = coarse.max_omega() * f64::from(basis.nmax()).powi(2);
    checks.push(Check::at_most("sqrt-dispersion-form-bound", -floor / scale, 1e-10));

    let payload = json!({
        "modes": basis.modes(),
        "nmax": basis.nmax(),
        "basis_dim": basis.dim(),
        "lambda": lambda,
        "bare_lambda": bare_lambda,
        "omega": omega,
        "f": f.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "spectral": spectral,
        "ground_number": number,
        "relative_bound": relative,
        "relative_bound_two_modes": pair,
        "gauge": gauge,
        "ccr": ccr,
        "sqrt_dispersion_floor": floor,
    });
    Ok(StudyOutcome::new(Study::Fock, checks, payload))
}

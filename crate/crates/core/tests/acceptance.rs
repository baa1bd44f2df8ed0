//! End-to-end acceptance run: one line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use renorm_core::bogoliubov::{
    build_blocks, diagonalization_residual, formal_trace_value, ground_energy, pivotal_identity, symplectic_residuals,
};
use renorm_core::fock::{
    ccr_residuals, hamiltonian_routes, spectral_compare, truncated_spectrum, vacuum_number_expectation, FockBasis,
};
use renorm_core::model::{coarse_grain, gauge_reduce};
use renorm_core::numerics::QuadratureSpec;
use renorm_core::rankone::{
    default_family_samples, power, resolvent_family_check, resolvent_rank_one, scalar_power, trace_sqrt_shift,
};
use renorm_core::renorm::{
    divergence_probe, flow_run, ladder_tail, regular_resolvent, renormalized_coupling, renormalized_resolvent,
    shale_growth, FlowRun,
};
use renorm_core::{build_model, DiscretizedModel, Exponent, FlowCase, Method, RankOneOp, ScenarioConfig, XiMode};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const EXPONENTS: [Exponent; 4] = [
    Exponent::Half,
    Exponent::NegHalf,
    Exponent::Quarter,
    Exponent::NegQuarter,
];

fn verdict(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_op(rng: &mut ChaCha8Rng, n: usize, signed: bool) -> RankOneOp {
    let a = DVector::from_fn(n, |_, _| rng.random_range(0.5f64.ln()..20f64.ln()).exp());
    let psi = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let alpha = if signed && rng.random_bool(0.5) {
        let q: f64 = psi.iter().zip(a.iter()).map(|(p, x)| p * p / x).sum();
        -rng.random_range(0.1..0.9) / q
    } else {
        rng.random_range(0.2..2.0)
    };
    RankOneOp::new(a, psi, alpha).unwrap()
}

fn model(name: &str) -> DiscretizedModel {
    let m = build_model(&ScenarioConfig::preset(name).unwrap()).unwrap();
    if m.is_real() {
        m
    } else {
        gauge_reduce(&m).0
    }
}

fn appendix_integrals() -> Outcome {
    let start = Instant::now();
    let spec = QuadratureSpec::default();
    let mut worst = 0.0_f64;
    for x in [0.5f64, 1.0, 4.0, 100.0] {
        for e in EXPONENTS {
            let want = x.powf(e.value());
            let got = scalar_power(x, e, &spec).map_err(|e| e.to_string())?;
            worst = worst.max((got - want).abs() / want);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && secs < 1.0,
        format!("max rel err {worst:.2e}, {secs:.3} s"),
    )
}

fn resolvent_vs_dense() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let z = Complex64::new(-1.5, 0.7);
    let (mut err, mut ident) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let op = random_op(&mut rng, 16, true);
        let r = resolvent_rank_one(&op, z).map_err(|e| e.to_string())?;
        let dense = (op.dense().map(|x| Complex64::new(x, 0.0)) - DMatrix::identity(16, 16) * z)
            .try_inverse()
            .ok_or("singular dense resolvent")?;
        err = err.max((&r - &dense).norm() / dense.norm());
        let fam = resolvent_family_check(|w| resolvent_rank_one(&op, w), &default_family_samples())
            .map_err(|e| e.to_string())?;
        ident = ident.max(fam.resolvent_identity);
    }
    verdict(
        err <= 1e-10 && ident <= 1e-10,
        format!("rel err {err:.2e}, identity {ident:.2e}"),
    )
}

fn fractional_powers() -> Outcome {
    let start = Instant::now();
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut err, mut comp) = (0.0_f64, 0.0_f64);
    for (n, count) in [(16, 20), (64, 5)] {
        for _ in 0..count {
            let op = random_op(&mut rng, n, false);
            let mut q = Vec::new();
            for e in EXPONENTS {
                let a = power(&op, e, Method::Quadrature, &spec).map_err(|e| e.to_string())?;
                let b = power(&op, e, Method::Eig, &spec).map_err(|e| e.to_string())?;
                err = err.max((&a - &b).norm() / b.norm());
                q.push(a);
            }
            let eye = DMatrix::<f64>::identity(n, n);
            comp = comp.max((&q[0] * &q[1] - &eye).norm() / eye.norm());
            let q2 = &q[2] * &q[2];
            let t = op.dense();
            comp = comp.max((&q2 * &q2 - &t).norm() / t.norm());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        err <= 1e-6 && comp <= 1e-5 && secs < 30.0,
        format!("quad vs eig {err:.2e}, compositions {comp:.2e}, {secs:.2} s"),
    )
}

fn trace_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut err = 0.0_f64;
    for _ in 0..10 {
        let op = random_op(&mut rng, 16, true);
        let direct: f64 = op
            .dense()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|x| x.sqrt())
            .sum::<f64>()
            - op.a().iter().map(|x| x.sqrt()).sum::<f64>();
        let got = trace_sqrt_shift(&op).map_err(|e| e.to_string())?;
        err = err.max((got - direct).abs() / direct.abs());
    }
    let mut scalar = 0.0_f64;
    for (a, alpha) in [(2.0, 3.0), (1.0, -0.5), (0.3, 40.0)] {
        let op = RankOneOp::new(DVector::from_element(1, a), DVector::from_element(1, 1.0), alpha)
            .map_err(|e| e.to_string())?;
        let want = (a + alpha).sqrt() - a.sqrt();
        scalar = scalar.max((trace_sqrt_shift(&op).map_err(|e| e.to_string())? - want).abs() / want.abs());
    }
    verdict(
        err <= 1e-8 && scalar <= 1e-9,
        format!("matrix {err:.2e}, scalar {scalar:.2e}"),
    )
}

fn diagonalization() -> Outcome {
    let (mut symp, mut diag, mut piv) = (0.0_f64, 0.0_f64, 0.0_f64);
    for name in ScenarioConfig::preset_names() {
        let m = model(name);
        let mode = if m.lambda < 0.0 {
            XiMode::RenormalizedResolvent
        } else {
            XiMode::Direct
        };
        let b = build_blocks(&m, mode).map_err(|e| format!("{name}: {e}"))?;
        symp = symp.max(symplectic_residuals(&b).max());
        diag = diag.max(diagonalization_residual(&b));
        piv = piv.max(pivotal_identity(&b).relative_gap());
    }
    verdict(
        symp <= 1e-8 && diag <= 1e-8 && piv <= 1e-7,
        format!("symplectic {symp:.2e}, block {diag:.2e}, pivotal {piv:.2e}"),
    )
}

fn ground_energy_constant() -> Outcome {
    let mut worst = 0.0_f64;
    for name in ["regular", "fock"] {
        let m = model(name);
        let e = ground_energy(&build_blocks(&m, XiMode::Direct).map_err(|e| e.to_string())?);
        let integral = 0.5 * formal_trace_value(&m).map_err(|e| e.to_string())?;
        worst = worst.max((integral - e).abs() / e.abs());
    }
    let scalar = ground_energy(&build_blocks(&model("scalar"), XiMode::Direct).map_err(|e| e.to_string())?);
    let serr = (scalar + 1.0).abs();
    verdict(
        worst <= 1e-7 && serr <= 1e-12,
        format!("trace vs integral {worst:.2e}, scalar |E + 1| {serr:.2e}"),
    )
}

fn fock_oracle() -> Outcome {
    let start = Instant::now();
    let scalar = model("scalar");
    let (levels, _) = truncated_spectrum(&FockBasis::new(1, 60).unwrap(), &scalar).map_err(|e| e.to_string())?;
    let lambda: f64 = 2.0;
    let closed = ((1.0 + 4.0 * lambda).sqrt() - 1.0 - 2.0 * lambda) / 2.0;
    let e_gap = (levels[0] - closed).abs();

    let three = coarse_grain(&model("fock"), 3).map_err(|e| e.to_string())?;
    let cmp = spectral_compare(&FockBasis::new(3, 8).unwrap(), &three, 10, 1e-4).map_err(|e| e.to_string())?;
    let vac = vacuum_number_expectation(&FockBasis::new(3, 10).unwrap(), &three, 5e-3).map_err(|e| e.to_string())?;
    let n_gap = (vac.value - vac.shale).abs();

    let basis = FockBasis::new(3, 8).unwrap();
    let f = three.fhat();
    let norm = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let g: Vec<Complex64> = f.iter().map(|z| z / norm).collect();
    let h: Vec<Complex64> = g
        .iter()
        .zip(&three.omega)
        .map(|(z, w)| z * w.sqrt() * Complex64::from_polar(1.0, 0.3))
        .collect();
    let ccr = ccr_residuals(&basis, &g, &h).map_err(|e| e.to_string())?;
    let (h1, h2) = hamiltonian_routes(&basis, &three.omega, &f, three.lambda).map_err(|e| e.to_string())?;
    let routes = (&h1.matrix - &h2.matrix).norm() / h1.matrix.norm();
    let inv = ccr.mixed.max(ccr.annihilators).max(ccr.adjoint).max(routes);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        e_gap <= 1e-6 && cmp.max_gap <= 1e-4 && n_gap <= 5e-3 && inv <= 1e-10 && secs < 120.0,
        format!(
            "scalar E0 gap {e_gap:.2e}, levels {:.2e}, <N> gap {n_gap:.2e}, invariants {inv:.2e}, {secs:.2} s",
            cmp.max_gap
        ),
    )
}

fn renormalized_coupling_identity() -> Outcome {
    // Smaller grid than the preset keeps the axiom check quick.
    let mut c = ScenarioConfig::preset("charge-renorm").unwrap();
    c.grid.nodes = 128;
    let m = build_model(&c).map_err(|e| e.to_string())?;
    let z = Complex64::new(-1.0, 0.0);
    let (mut err, mut axioms) = (0.0_f64, 0.0_f64);
    for lambda in [-0.1, -0.5, -2.0] {
        let lt = renormalized_coupling(&m, lambda).map_err(|e| e.to_string())?;
        let lhs = renormalized_resolvent(&m.with_lambda(lambda), z).map_err(|e| e.to_string())?;
        let rhs = regular_resolvent(&m.with_lambda(lt), z).map_err(|e| e.to_string())?;
        err = err.max((&lhs - &rhs).norm() / rhs.norm());
        let mm = m.with_lambda(lambda);
        let fam = resolvent_family_check(|w| renormalized_resolvent(&mm, w), &default_family_samples())
            .map_err(|e| e.to_string())?;
        axioms = axioms.max(fam.conjugate_symmetry).max(fam.resolvent_identity);
        if fam.kernel_proxy.partial_cmp(&1e-12) != Some(std::cmp::Ordering::Greater) {
            axioms = f64::INFINITY;
        }
    }
    verdict(
        err <= 1e-10 && axioms <= 1e-10,
        format!("identity {err:.2e}, axioms {axioms:.2e}"),
    )
}

fn gaps_ok(run: &FlowRun) -> (f64, bool) {
    let top = run.records.last().map_or(f64::INFINITY, |r| r.resolvent_gap);
    let mono = ladder_tail(&run.records)
        .windows(2)
        .all(|w| w[1].resolvent_gap <= w[0].resolvent_gap + 1e-10);
    (top, top <= 1e-6 && mono)
}

fn flow_convergence() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["regular", "energy-renorm", "charge-renorm"] {
        let run = flow_run(&ScenarioConfig::preset(name).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        let (top, gaps) = gaps_ok(&run);
        let class_ok = match run.case {
            FlowCase::FiniteTrace => {
                let ceiling = run.shale_ceiling.unwrap_or(f64::NEG_INFINITY);
                run.records.iter().all(|r| r.shale_n <= ceiling + 1e-9)
            }
            FlowCase::EnergyRenorm => run.records.windows(2).all(|w| w[1].e_n.abs() > w[0].e_n.abs()),
            FlowCase::ChargeRenorm => {
                run.records.iter().all(|r| r.lambda_n < 0.0)
                    && run.records.windows(2).all(|w| w[1].lambda_n > w[0].lambda_n)
            }
        };
        ok &= gaps && class_ok;
        notes.push(format!("{name} gap {top:.1e}"));
    }
    verdict(ok, notes.join(", "))
}

fn divergence() -> Outcome {
    let taus = [1e2, 1e3, 1e4];
    let p = divergence_probe(0.25, -0.5, &taus).map_err(|e| e.to_string())?;
    let slope_err = (p.i0_est - p.i0_quad).abs() / p.i0_quad;
    let flat = divergence_probe(0.0, -0.5, &taus).map_err(|e| e.to_string())?;
    let growth = shale_growth(1.0, -0.5, &[256, 512, 1024]).map_err(|e| e.to_string())?;
    verdict(
        slope_err <= 0.1 && flat.i0_est.abs() <= 1e-3 && growth.exponent > 0.0,
        format!(
            "I0 est {:.4} vs {:.4}, alpha=0 slope {:.1e}, growth exponent {:.2}",
            p.i0_est, p.i0_quad, flat.i0_est, growth.exponent
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("appendix integral identities", appendix_integrals),
        ("rank-one resolvent vs dense", resolvent_vs_dense),
        ("fractional powers quadrature vs eig", fractional_powers),
        ("trace formula", trace_formula),
        ("bogoliubov diagonalization", diagonalization),
        ("ground-energy constant", ground_energy_constant),
        ("fock oracle", fock_oracle),
        ("renormalized coupling identity", renormalized_coupling_identity),
        ("flow convergence", flow_convergence),
        ("divergence probe", divergence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(msg) => println!("[PASS] {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {} {name}: {msg}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

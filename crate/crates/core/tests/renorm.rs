use std::f64::consts::PI;

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use renorm_core::bogoliubov::{build_blocks, ground_energy};
use renorm_core::model::cutoff_project;
use renorm_core::rankone::{default_family_samples, resolvent_family_check};
use renorm_core::renorm::{
    charge, coupling_flow, divergence_probe, energy_counterterm, flow_run, i0_quadrature, ladder_tail,
    regular_resolvent, regular_resolvent_real, renormalized_coupling, renormalized_resolvent,
    renormalized_resolvent_real, shale_growth,
};
use renorm_core::{DiscretizedModel, Error, FlowCase, Regularity, ScenarioConfig, Status, XiMode};

fn small(omega: &[f64], f: &[f64], lambda: f64) -> DiscretizedModel {
    let n = omega.len();
    DiscretizedModel::new(
        (1..=n).map(|k| k as f64).collect(),
        vec![1.0; n],
        omega.to_vec(),
        f.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        lambda,
    )
    .unwrap()
}

// ∫₀^∞ p^s/(1 + p²)² dp = (1 − a)π / (2 sin πa) with a = (s + 1)/2 gives
// I₀ = απ / cos(πα) for 0 ≤ α < 1/2.
fn i0_closed_form(alpha: f64) -> f64 {
    alpha * PI / (PI * alpha).cos()
}

// Reference values, 22 digits.
#[allow(clippy::excessive_precision)]
const I0_FROZEN: [(f64, f64); 5] = [
    (0.1, 0.3303265999194124105186),
    (0.2, 0.7766444154901866309387),
    (0.25, 1.110720734539591561754),
    (0.3, 1.603438998173392670138),
    (0.4, 4.066562953852207852648),
];

#[test]
fn coupling_closed_form() {
    // ω = 1, f = √2: ⟨f|ω^{-1}f⟩ = 2, λ = −1 ↦ −1/9.
    let m = small(&[1.0], &[2f64.sqrt()], -1.0);
    assert_relative_eq!(charge(&m), 2.0, epsilon = 1e-15);
    assert_relative_eq!(renormalized_coupling(&m, -1.0).unwrap(), -1.0 / 9.0, epsilon = 1e-15);
    assert_eq!(renormalized_coupling(&m, 0.0).unwrap(), 0.0);
    assert!(matches!(renormalized_coupling(&m, 0.125), Err(Error::SingularPoint(_))));
}

#[test]
fn renormalized_family_is_regular_family_at_flowed_coupling() {
    let m = small(&[1.0, 2.0, 7.0, 40.0], &[0.4, 0.3, -0.2, 0.1], 0.0);
    for lambda in [-0.1, -0.5, -2.0] {
        let m = m.with_lambda(lambda);
        let lt = renormalized_coupling(&m, lambda).unwrap();
        let lhs = renormalized_resolvent_real(&m, -1.0).unwrap();
        let rhs = regular_resolvent_real(&m.with_lambda(lt), -1.0).unwrap();
        assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm(), "λ = {lambda}");
        let z = Complex64::new(-0.3, 1.1);
        let lhs = renormalized_resolvent(&m, z).unwrap();
        let rhs = regular_resolvent(&m.with_lambda(lt), z).unwrap();
        assert!((&lhs - &rhs).norm() <= 1e-10 * rhs.norm());
    }
}

#[test]
fn renormalized_family_axioms() {
    let m = small(&[1.0, 2.0, 7.0, 40.0], &[0.4, 0.3, -0.2, 0.1], -0.5);
    let rep = resolvent_family_check(|z| renormalized_resolvent(&m, z), &default_family_samples()).unwrap();
    assert!(rep.conjugate_symmetry <= 1e-10);
    assert!(rep.resolvent_identity <= 1e-10);
    assert!(rep.kernel_proxy > 1e-12);
}

#[test]
fn regular_resolvent_inverts_xi_squared_plus_one() {
    let m = small(&[1.0, 3.0, 5.0], &[0.5, 0.2, 0.1], 0.8);
    let b = build_blocks(&m, XiMode::Direct).unwrap();
    let xi2 = &b.xi * &b.xi;
    let r = regular_resolvent_real(&m, -1.0).unwrap();
    let id = nalgebra::DMatrix::<f64>::identity(3, 3);
    assert!((&r * (xi2 + &id) - &id).norm() < 1e-12);
}

#[test]
fn coupling_flow_needs_negative_lambda() {
    let m = small(&[1.0, 2.0], &[1.0, 1.0], 0.0);
    assert!(coupling_flow(&m, 0.0, &[1.0, 2.0]).is_err());
    assert!(coupling_flow(&m, 0.3, &[1.0, 2.0]).is_err());
    let flow = coupling_flow(&m, -1.0, &[1.0, 2.0]).unwrap();
    assert_relative_eq!(flow[0], -1.0 / 5.0, epsilon = 1e-15);
    assert_relative_eq!(flow[1], -1.0 / 7.0, epsilon = 1e-15);
}

#[test]
fn counterterm_is_cutoff_energy() {
    let m = small(&[1.0, 2.0, 4.0], &[0.5, 0.5, 0.5], 1.0);
    let e = energy_counterterm(&m, 2.0, 1.0).unwrap();
    let direct = ground_energy(&build_blocks(&cutoff_project(&m, 2.0), XiMode::Direct).unwrap());
    assert_eq!(e, direct);
    // A single active mode reduces to the scalar formula ½(√(ω² + 4λωf²) − ω − 2λf²).
    let e1 = energy_counterterm(&m, 1.0, 1.0).unwrap();
    assert_relative_eq!(e1, 0.5 * ((1.0f64 + 1.0).sqrt() - 1.0 - 0.5), epsilon = 1e-14);
}

#[test]
fn flow_case_selection() {
    assert_eq!(
        FlowCase::select(Regularity::HRegular, 1.0).unwrap(),
        FlowCase::FiniteTrace
    );
    assert_eq!(
        FlowCase::select(Regularity::FiniteEnergy, 0.0).unwrap(),
        FlowCase::FiniteTrace
    );
    assert_eq!(
        FlowCase::select(Regularity::NeedsEnergyRenorm, 1.0).unwrap(),
        FlowCase::EnergyRenorm
    );
    assert_eq!(
        FlowCase::select(Regularity::NeedsChargeRenorm, -1.0).unwrap(),
        FlowCase::ChargeRenorm
    );
    assert!(FlowCase::select(Regularity::NeedsChargeRenorm, 1.0).is_err());
    assert!(FlowCase::select(Regularity::HRegular, -1.0).is_err());
    assert!(FlowCase::select(Regularity::OutOfTheory, -1.0).is_err());
}

fn gaps_settle(run: &renorm_core::renorm::FlowRun) {
    let last = run.records.last().unwrap();
    assert!(last.resolvent_gap <= 1e-6, "top gap {}", last.resolvent_gap);
    for w in ladder_tail(&run.records).windows(2) {
        assert!(w[1].resolvent_gap <= w[0].resolvent_gap + 1e-10);
    }
}

#[test]
fn finite_trace_flow() {
    let run = flow_run(&ScenarioConfig::preset("regular").unwrap()).unwrap();
    assert_eq!(run.case, FlowCase::FiniteTrace);
    gaps_settle(&run);
    let ceiling = run.shale_ceiling.unwrap();
    assert!(run.records.iter().all(|r| r.shale_n <= ceiling + 1e-9));
    assert!(run.checks.iter().all(|c| !c.status.is_failure()));
}

#[test]
fn energy_renorm_flow() {
    let run = flow_run(&ScenarioConfig::preset("energy-renorm").unwrap()).unwrap();
    assert_eq!(run.case, FlowCase::EnergyRenorm);
    gaps_settle(&run);
    for w in run.records.windows(2) {
        assert!(w[1].e_n.abs() > w[0].e_n.abs());
    }
    let ceiling = run.shale_ceiling.unwrap();
    assert!(run.records.iter().all(|r| r.shale_n <= ceiling + 1e-9));
}

#[test]
fn charge_renorm_flow() {
    let run = flow_run(&ScenarioConfig::preset("charge-renorm").unwrap()).unwrap();
    assert_eq!(run.case, FlowCase::ChargeRenorm);
    gaps_settle(&run);
    assert!(run.records.iter().all(|r| r.lambda_n < 0.0));
    for w in run.records.windows(2) {
        assert!(w[1].lambda_n > w[0].lambda_n);
    }
    assert!(run.records.last().unwrap().lambda_n > -0.01);
}

#[test]
fn i0_quadrature_matches_closed_form_and_frozen_values() {
    assert_eq!(i0_quadrature(0.0).unwrap(), 0.0);
    for (alpha, frozen) in I0_FROZEN {
        let q = i0_quadrature(alpha).unwrap();
        assert_relative_eq!(i0_closed_form(alpha), frozen, max_relative = 1e-14);
        assert_relative_eq!(q, frozen, max_relative = 1e-9);
    }
}

#[test]
fn probe_detects_log_divergence() {
    let p = divergence_probe(0.25, -0.5, &[1e2, 1e3, 1e4]).unwrap();
    assert_eq!(p.status, Status::Divergent);
    assert!((p.i0_est - i0_closed_form(0.25)).abs() <= 0.1 * i0_closed_form(0.25));
    assert!(p.head <= p.head_bound);
    assert!(p.i_tau.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn probe_without_exponent_is_bounded() {
    let p = divergence_probe(0.0, -0.5, &[1e2, 1e3, 1e4]).unwrap();
    assert!(p.i0_est.abs() <= 1e-3);
    assert_eq!(p.status, Status::Bounded);
}

#[test]
fn probe_pointwise_divergence_and_bad_input() {
    let p = divergence_probe(0.6, -0.5, &[1e2, 1e3]).unwrap();
    assert!(p.trace_divergent_pointwise);
    assert_eq!(p.status, Status::Divergent);
    assert!(divergence_probe(0.25, 0.5, &[1e2, 1e3]).is_err());
    assert!(divergence_probe(0.25, -0.5, &[1e2]).is_err());
    assert!(divergence_probe(1.5, -0.5, &[1e2, 1e3]).is_err());
}

#[test]
fn shale_grows_without_charge() {
    let g = shale_growth(1.0, -0.5, &[256, 512, 1024]).unwrap();
    assert!(g.exponent > 0.0);
    assert!(g.shale.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(g.status, Status::Divergent);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flowed_coupling_inverts(lambda in -5.0f64..-0.01, c in 0.01f64..10.0) {
        let m = small(&[1.0], &[c.sqrt()], lambda);
        let lt = renormalized_coupling(&m, lambda).unwrap();
        prop_assert!(lt < 0.0 && lt > lambda);
        prop_assert!((1.0 / lt - (1.0 / lambda - 4.0 * c)).abs() <= 1e-10 * (1.0 / lt).abs());
    }

    #[test]
    fn regular_family_is_a_resolvent(
        f in proptest::collection::vec(-0.6f64..0.6, 4),
        lambda in 0.0f64..2.0,
    ) {
        let m = small(&[1.0, 2.0, 5.0, 11.0], &f, lambda);
        let rep = resolvent_family_check(|z| regular_resolvent(&m, z), &default_family_samples()).unwrap();
        prop_assert!(rep.conjugate_symmetry <= 1e-12);
        prop_assert!(rep.resolvent_identity <= 1e-10);
    }
}

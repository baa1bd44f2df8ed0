use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use renorm_core::bogoliubov::{
    bogoliubov_constant, build_blocks, build_blocks_with, build_xi, diagonalization_residual, formal_trace,
    formal_trace_value, ground_energy, pivotal_identity, recombined_energy, shale_trace, symplectic_residuals,
    xi_minus_omega_floor,
};
use renorm_core::renorm::renormalized_coupling;
use renorm_core::{build_model, DiscretizedModel, Method, RootMethod, ScenarioConfig, Status, XiMode};

fn scalar() -> DiscretizedModel {
    build_model(&ScenarioConfig::preset("scalar").unwrap()).unwrap()
}

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

// ξ from nalgebra's eigensolver applied to the assembled ξ².
fn dense_xi(model: &DiscretizedModel, lambda: f64) -> DMatrix<f64> {
    let fhat = model.fhat_real().unwrap();
    let om = model.omega_vec();
    let psi = om.zip_map(&fhat, |w, f| w.sqrt() * f);
    let mut xi2 = DMatrix::from_diagonal(&om.map(|w| w * w));
    xi2.ger(4.0 * lambda, &psi, &psi, 1.0);
    let e = xi2.symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

#[test]
fn scalar_chain() {
    let b = build_blocks(&scalar(), XiMode::Direct).unwrap();
    assert_relative_eq!(b.xi[(0, 0)], 3.0, epsilon = 1e-14);
    assert_relative_eq!(b.u[(0, 0)], 2.0 / 3f64.sqrt(), epsilon = 1e-14);
    assert_relative_eq!(b.v[(0, 0)], -1.0 / 3f64.sqrt(), epsilon = 1e-14);
    assert_relative_eq!(ground_energy(&b), -1.0, epsilon = 1e-14);
    let s = shale_trace(&b);
    assert_relative_eq!(s.direct, 1.0 / 3.0, epsilon = 1e-14);
    assert_relative_eq!(s.identity, 1.0 / 3.0, epsilon = 1e-14);
    assert_relative_eq!(bogoliubov_constant(&b), -1.0, epsilon = 1e-13);
    assert_relative_eq!(recombined_energy(&b), -1.0, epsilon = 1e-13);
}

#[test]
fn scalar_formal_trace_integral() {
    // ∫ form of ½ tr(ξ − h) at ω = 1, f = 1, λ = 2.
    let v = formal_trace_value(&scalar()).unwrap();
    assert_relative_eq!(0.5 * v, -1.0, max_relative = 1e-9);
}

#[test]
fn zero_coupling_is_trivial() {
    let m = small(&[1.0, 2.5, 4.0], &[0.3, 0.2, 0.1], 0.0);
    let b = build_blocks(&m, XiMode::Direct).unwrap();
    let om = DMatrix::from_diagonal(&m.omega_vec());
    assert!((&b.xi - &om).norm() < 1e-14);
    assert!(b.v.norm() < 1e-14);
    assert!((&b.u - DMatrix::identity(3, 3)).norm() < 1e-14);
    assert_eq!(ground_energy(&b), 0.0);
}

#[test]
fn xi_quadrature_matches_eig() {
    let m = build_model(&ScenarioConfig::preset("fock").unwrap()).unwrap();
    let q = build_xi(&m, XiMode::Direct, Method::Quadrature).unwrap();
    let e = build_xi(&m, XiMode::Direct, Method::Eig).unwrap();
    assert!((&q - &e).norm() / e.norm() < 1e-8);
    assert!((&e - dense_xi(&m, m.lambda)).norm() / e.norm() < 1e-12);
}

#[test]
fn quadrature_roots_give_same_blocks() {
    let m = build_model(&ScenarioConfig::preset("fock").unwrap()).unwrap();
    let a = build_blocks_with(&m, XiMode::Direct, RootMethod::Eig).unwrap();
    let b = build_blocks_with(&m, XiMode::Direct, RootMethod::Quadrature).unwrap();
    assert!((&a.u - &b.u).norm() < 1e-7);
    assert!((&a.v - &b.v).norm() < 1e-7);
}

#[test]
fn regular_resolvent_mode_matches_direct() {
    let m = small(&[1.0, 3.0, 10.0, 50.0], &[0.5, -0.2, 0.3, 0.05], 0.7);
    let a = build_xi(&m, XiMode::Direct, Method::Eig).unwrap();
    let b = build_xi(&m, XiMode::RegularResolvent, Method::Eig).unwrap();
    assert!((&a - &b).norm() / a.norm() < 1e-12);
}

#[test]
fn renormalized_mode_uses_flowed_coupling() {
    let m = small(&[1.0, 3.0, 10.0, 50.0], &[0.5, -0.2, 0.3, 0.05], -0.5);
    let lt = renormalized_coupling(&m, m.lambda).unwrap();
    let reference = dense_xi(&m, lt);
    let got = build_xi(&m, XiMode::RenormalizedResolvent, Method::Eig).unwrap();
    assert!((&got - &reference).norm() / reference.norm() < 1e-12);
    let b = build_blocks(&m, XiMode::RenormalizedResolvent).unwrap();
    assert_relative_eq!(b.lambda_eff, lt);
    assert_eq!(b.lambda, -0.5);
}

#[test]
fn presets_diagonalize() {
    for name in ["regular", "energy-renorm", "fock"] {
        let m = build_model(&ScenarioConfig::preset(name).unwrap()).unwrap();
        let b = build_blocks(&m, XiMode::Direct).unwrap();
        assert!(symplectic_residuals(&b).max() < 1e-8, "{name}");
        assert!(diagonalization_residual(&b) < 1e-8, "{name}");
        assert!(pivotal_identity(&b).relative_gap() < 1e-7, "{name}");
        let s = shale_trace(&b);
        assert_relative_eq!(s.direct, s.identity, max_relative = 1e-8);
        assert!(xi_minus_omega_floor(&b).unwrap() > -1e-8 * m.max_omega());
    }
}

#[test]
fn energy_matches_integral_on_regular() {
    let m = build_model(&ScenarioConfig::preset("regular").unwrap()).unwrap();
    let b = build_blocks(&m, XiMode::Direct).unwrap();
    let e = ground_energy(&b);
    assert_relative_eq!(0.5 * formal_trace_value(&m).unwrap(), e, max_relative = 1e-7);
    assert_relative_eq!(recombined_energy(&b), e, max_relative = 1e-7);
    assert_relative_eq!(bogoliubov_constant(&b), e, max_relative = 1e-7);
}

#[test]
fn formal_trace_bounded_on_regular() {
    let m = build_model(&ScenarioConfig::preset("regular").unwrap()).unwrap();
    let ft = formal_trace(&m, &[1e2, 1e3, 1e4]).unwrap();
    assert_eq!(ft.status, Status::Bounded);
    assert!(ft.value.abs() <= ft.bound);
}

prop_compose! {
    fn arb_model()(n in 1usize..12)(
        omega in proptest::collection::vec(1.0f64..30.0, n),
        f in proptest::collection::vec(-1.0f64..1.0, n),
        weights in proptest::collection::vec(0.1f64..2.0, n),
        lambda in -1.0f64..3.0,
    ) -> DiscretizedModel {
        let fv: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let base = DiscretizedModel::new((1..=omega.len()).map(|k| k as f64).collect(), weights, omega, fv, 0.0).unwrap();
        // Keep ξ² positive: 1 + 4λ⟨f|f⟩_ω > 0 with margin.
        let q: f64 = base.norm_sq();
        let lambda = if lambda < 0.0 { lambda.max(-0.2 / q.max(1e-12)) } else { lambda };
        base.with_lambda(lambda)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_are_symplectic_and_diagonalize(m in arb_model()) {
        let b = build_blocks(&m, XiMode::Direct).unwrap();
        prop_assert!(symplectic_residuals(&b).max() <= 1e-8);
        prop_assert!(diagonalization_residual(&b) <= 1e-8);
        let s = shale_trace(&b);
        // The closed form cancels two O(1) traces.
        prop_assert!((s.direct - s.identity).abs() <= 1e-8 * s.direct.abs() + 1e-13 * m.dim() as f64);
        // So does the recombined route, at the scale of tr ω.
        let e = ground_energy(&b);
        let scale: f64 = m.omega.iter().sum();
        prop_assert!((recombined_energy(&b) - e).abs() <= 1e-7 * e.abs() + 1e-14 * scale);
    }

    #[test]
    fn energy_is_nonpositive(m in arb_model()) {
        let b = build_blocks(&m, XiMode::Direct).unwrap();
        prop_assert!(ground_energy(&b) <= 1e-12);
    }

    #[test]
    fn pivotal_trace(m in arb_model()) {
        let b = build_blocks(&m, XiMode::Direct).unwrap();
        prop_assert!(pivotal_identity(&b).relative_gap() <= 1e-7);
    }

    #[test]
    fn xi_square_reproduces_definition(m in arb_model()) {
        let b = build_blocks(&m, XiMode::Direct).unwrap();
        let fhat = m.fhat_real().unwrap();
        let psi = m.omega_vec().zip_map(&fhat, |w, f| w.sqrt() * f);
        let mut xi2 = DMatrix::from_diagonal(&m.omega_vec().map(|w| w * w));
        xi2.ger(4.0 * m.lambda, &psi, &psi, 1.0);
        let got = &b.xi * &b.xi;
        prop_assert!((&got - &xi2).norm() <= 1e-10 * xi2.norm());
    }
}

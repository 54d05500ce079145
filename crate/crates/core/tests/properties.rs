//! Property tests for module invariants on randomized inputs.

use hilfer_core::forward::{memory_state_at, solve_forward, GammaChoice};
use hilfer_core::fracops::{frac_integral_left, GridFunction};
use hilfer_core::mlf::{mlf, recip_gamma};
use hilfer_core::spectral::{v_gamma_norm, OmegaRegion, SpaceGrid};
use hilfer_core::{Field, ForwardProblem, FractionalOrder, SpectralBasis, TimeGrid};
use proptest::prelude::*;
use std::f64::consts::PI;

fn order_strategy() -> impl Strategy<Value = FractionalOrder> {
    (1.01..=2.0f64, 0.0..=1.0f64).prop_map(|(mu, nu)| FractionalOrder::new(mu, nu).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mlf_at_zero_is_reciprocal_gamma(alpha in 1.01..=2.0f64, beta in 0.1..=3.0f64) {
        let v = mlf(alpha, beta, 0.0).unwrap();
        prop_assert!((v - recip_gamma(beta)).abs() < 1e-14);
    }

    #[test]
    fn mlf_decay_envelope(alpha in 1.05..=2.0f64, z in -1e4..=0.0f64) {
        // |E_{alpha,1}(z)| stays bounded by 1 on the negative axis
        let v = mlf(alpha, 1.0, z).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12, "E = {v}");
    }

    #[test]
    fn fractional_integral_is_linear_and_positive(
        alpha in 0.1..=1.9f64,
        a in -2.0..=2.0f64,
        b in -2.0..=2.0f64,
    ) {
        let grid = TimeGrid::uniform(1.0, 32).unwrap();
        let f = GridFunction::sample(grid.clone(), |t| (3.0 * t).sin());
        let g = GridFunction::sample(grid.clone(), |t| t * t - 0.5);
        let combo = GridFunction::new(
            grid.clone(),
            f.values.iter().zip(&g.values).map(|(x, y)| a * x + b * y).collect(),
        ).unwrap();
        let lhs = frac_integral_left(alpha, &combo).unwrap();
        let fi = frac_integral_left(alpha, &f).unwrap();
        let gi = frac_integral_left(alpha, &g).unwrap();
        for i in 0..grid.len() {
            let rhs = a * fi.values[i] + b * gi.values[i];
            prop_assert!((lhs.values[i] - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
        // positivity: nonnegative data has nonnegative integral
        let pos = GridFunction::sample(grid.clone(), |t| t + 0.1);
        let ip = frac_integral_left(alpha, &pos).unwrap();
        prop_assert!(ip.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn forward_solution_is_linear_in_data(
        order in order_strategy(),
        c in -3.0..=3.0f64,
    ) {
        let basis = SpectralBasis::builtin_dirichlet_laplacian(PI, 3).unwrap();
        let grid = TimeGrid::uniform(1.0, 16).unwrap();
        let make = |u0: Vec<f64>, u1: Vec<f64>| ForwardProblem {
            order,
            basis: basis.clone(),
            grid: grid.clone(),
            u0: Field::new(u0),
            u1: Field::new(u1),
            control: None,
            gamma_choice: GammaChoice::Half,
            p: 1e6,
        };
        let u0 = vec![0.5, -0.2, 0.8];
        let u1 = vec![0.1, 0.4, -0.6];
        let base = solve_forward(&make(u0.clone(), u1.clone())).unwrap();
        let scaled = solve_forward(&make(
            u0.iter().map(|x| c * x).collect(),
            u1.iter().map(|x| c * x).collect(),
        )).unwrap();
        for n in 0..3 {
            for j in 1..grid.len() {
                let want = c * base.value(n, j);
                prop_assert!((scaled.value(n, j) - want).abs() < 1e-10 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn memory_state_is_additive_over_controls(order in order_strategy(), t in 0.2..=1.0f64) {
        // zero data + sum of controls = sum of memory states
        let basis = SpectralBasis::builtin_dirichlet_laplacian(PI, 2).unwrap();
        let grid = TimeGrid::uniform(1.0, 8).unwrap();
        let omega = OmegaRegion::new(vec![(0.5, 2.5)]).unwrap();
        let space = SpaceGrid::uniform(PI, 64).unwrap();
        let make = |coeffs: Vec<f64>| ForwardProblem {
            order,
            basis: basis.clone(),
            grid: grid.clone(),
            u0: Field::zeros(2),
            u1: Field::zeros(2),
            control: Some(hilfer_core::ControlField::new(
                omega.clone(), space.clone(), 1.0, 2, 2, coeffs,
            ).unwrap()),
            gamma_choice: GammaChoice::Half,
            p: 1e6,
        };
        let c1 = vec![0.3, -0.7, 0.2, 0.9];
        let c2 = vec![-0.4, 0.1, 0.8, -0.5];
        let sum: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
        let m1 = memory_state_at(&make(c1), t).unwrap();
        let m2 = memory_state_at(&make(c2), t).unwrap();
        let ms = memory_state_at(&make(sum), t).unwrap();
        for n in 0..2 {
            let want = m1.mem.coefficients[n] + m2.mem.coefficients[n];
            prop_assert!((ms.mem.coefficients[n] - want).abs() < 1e-11 * (1.0 + want.abs()));
            let want = m1.mem_rate.coefficients[n] + m2.mem_rate.coefficients[n];
            prop_assert!((ms.mem_rate.coefficients[n] - want).abs() < 1e-11 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn v_gamma_norm_is_absolutely_homogeneous(
        gamma in 0.0..=1.0f64,
        c in -5.0..=5.0f64,
        coeffs in proptest::collection::vec(-1.0..=1.0f64, 4),
    ) {
        let basis = SpectralBasis::builtin_dirichlet_laplacian(PI, 4).unwrap();
        let u = Field::new(coeffs.clone());
        let cu = Field::new(coeffs.iter().map(|x| c * x).collect());
        let a = v_gamma_norm(&basis, &u, gamma).unwrap();
        let b = v_gamma_norm(&basis, &cu, gamma).unwrap();
        prop_assert!((b - c.abs() * a).abs() < 1e-12 * (1.0 + a));
    }

    #[test]
    fn omega_weights_sum_to_measure(a in 0.0..=1.5f64, len in 0.1..=1.5f64) {
        let omega = OmegaRegion::new(vec![(a, a + len)]).unwrap();
        let grid = SpaceGrid::uniform(PI, 157).unwrap();
        let total: f64 = omega.weights_on(&grid).iter().sum();
        prop_assert!((total - omega.measure()).abs() < 1e-12);
    }

    #[test]
    fn dual_order_is_involutive_on_mu(order in order_strategy()) {
        let d = order.dual();
        prop_assert_eq!(d.mu(), order.mu());
        prop_assert!((d.nu() - (1.0 - order.nu())).abs() < 1e-15);
        // beta and nu_gap swap under duality
        prop_assert!((d.beta() - order.nu_gap()).abs() < 1e-12);
        prop_assert!((d.nu_gap() - order.beta()).abs() < 1e-12);
    }
}

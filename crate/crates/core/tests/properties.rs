mod common;

use bregman_perceptron_core::loss::{
    bregman_distance, bregman_loss, bregman_loss_grad_z, envelope_loss, squared_loss,
};
use bregman_perceptron_core::optim::soft_threshold;
use bregman_perceptron_core::tensor::l1_norm;
use bregman_perceptron_core::{DenseMatrix, DenseVector, ExtendedReal, ProximalActivation};
use common::{central_difference, grid_prox};
use proptest::prelude::*;

fn any_activation() -> impl Strategy<Value = ProximalActivation> {
    prop_oneof![
        Just(ProximalActivation::Rectifier),
        Just(ProximalActivation::Identity),
        (0.0..2.0f64).prop_map(|theta| ProximalActivation::SoftThreshold { theta }),
    ]
}

/// A target inside dom Ψ: nonnegative for the rectifier, anything otherwise.
fn target_for(act: &ProximalActivation, raw: Vec<f64>) -> DenseVector {
    match act {
        ProximalActivation::Rectifier => {
            DenseVector::from_vec(raw.into_iter().map(f64::abs).collect())
        }
        _ => DenseVector::from_vec(raw),
    }
}

fn pair(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-5.0..5.0f64, dim),
        prop::collection::vec(-5.0..5.0f64, dim),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn prox_is_monotone_and_nonexpansive(act in any_activation(), a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let (sa, sb) = (act.prox_scalar(a), act.prox_scalar(b));
        prop_assert!((sa - sb) * (a - b) >= 0.0);
        // Each side carries one rounding of size up to ulp(max(|a|, |b|)).
        prop_assert!((sa - sb).abs() <= (a - b).abs() + 4.0 * f64::EPSILON * a.abs().max(b.abs()));
    }

    #[test]
    fn prox_lands_in_domain(act in any_activation(), z in prop::collection::vec(-10.0..10.0f64, 1..6)) {
        let z = DenseVector::from_vec(z);
        prop_assert!(act.in_domain(&act.prox(&z)));
    }

    #[test]
    fn rectifier_prox_optimality(z in -10.0..10.0f64) {
        let s = ProximalActivation::Rectifier.prox_scalar(z);
        prop_assert!((s > 0.0 && z - s == 0.0) || (s == 0.0 && z <= 0.0));
    }

    #[test]
    fn soft_threshold_prox_optimality(z in -10.0..10.0f64, theta in 0.0..3.0f64) {
        let s = ProximalActivation::SoftThreshold { theta }.prox_scalar(z);
        if s != 0.0 {
            prop_assert!((z - s - theta * s.signum()).abs() <= 1e-12);
        } else {
            prop_assert!(z.abs() <= theta);
        }
    }

    #[test]
    fn loss_matches_envelope_form(act in any_activation(), (y, z) in pair(4)) {
        let y = target_for(&act, y);
        let z = DenseVector::from_vec(z);
        let a = bregman_loss(&act, &y, &z).unwrap();
        let b = envelope_loss(&act, &y, &z).unwrap();
        prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
    }

    #[test]
    fn loss_and_distance_are_nonnegative(act in any_activation(), (y, z) in pair(3)) {
        let y = target_for(&act, y);
        let z = DenseVector::from_vec(z);
        prop_assert!(bregman_loss(&act, &y, &z).unwrap() >= -1e-12);
        let out = act.prox(&z);
        let q = z.sub(&out).unwrap();
        match bregman_distance(&act, &y, &out, &q).unwrap() {
            ExtendedReal::Finite(d) => prop_assert!(d >= -1e-12),
            ExtendedReal::PosInfinity => prop_assert!(false, "y was drawn inside the domain"),
        }
    }

    #[test]
    fn loss_vanishes_exactly_at_prox(act in any_activation(), z in prop::collection::vec(-5.0..5.0f64, 3), bump in 1e-3..1.0f64) {
        let z = DenseVector::from_vec(z);
        let out = act.prox(&z);
        prop_assert!(bregman_loss(&act, &out, &z).unwrap().abs() <= 1e-12);
        // Moving the target up keeps it in every domain here and gives a positive loss.
        let moved = out.map(|v| v + bump);
        prop_assert!(bregman_loss(&act, &moved, &z).unwrap() > 0.0);
    }

    #[test]
    fn identity_loss_is_squared_loss_bitwise((y, z) in pair(5)) {
        let (y, z) = (DenseVector::from_vec(y), DenseVector::from_vec(z));
        let act = ProximalActivation::Identity;
        prop_assert_eq!(
            bregman_loss(&act, &y, &z).unwrap().to_bits(),
            squared_loss(&act, &y, &z).unwrap().to_bits()
        );
    }

    #[test]
    fn gradient_matches_finite_differences(act in any_activation(), (y, z) in pair(3)) {
        let dist = |v: f64| act.kink_distance(v).unwrap_or(f64::INFINITY);
        prop_assume!(z.iter().all(|&v| dist(v) >= 1e-4));
        let y = target_for(&act, y);
        let grad = bregman_loss_grad_z(&act, &y, &DenseVector::from(z.as_slice())).unwrap();
        let fd = central_difference(
            |p| bregman_loss(&act, &y, &DenseVector::from(p)).unwrap(),
            &z,
            1e-6,
        );
        for (g, f) in grad.iter().zip(&fd) {
            prop_assert!((g - f).abs() <= 1e-5 * g.abs().max(1.0), "{g} vs {f}");
        }
    }

    #[test]
    fn l1_is_absolutely_homogeneous(w in prop::collection::vec(-10.0..10.0f64, 6), c in -5.0..5.0f64) {
        let w = DenseMatrix::from_vec(2, 3, w).unwrap();
        let lhs = l1_norm(&w.scale(c));
        let rhs = c.abs() * l1_norm(&w);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prox_matches_grid_search(act in any_activation(), z in -4.0..4.0f64) {
        let brute = grid_prox(&act, z, -6.0, 6.0, 1e-4);
        prop_assert!((act.prox_scalar(z) - brute).abs() <= 1e-4);
    }

    #[test]
    fn soft_threshold_matches_grid_search(w in -5.0..5.0f64, theta in 0.0..3.0f64) {
        let out = soft_threshold(&DenseMatrix::from_vec(1, 1, vec![w]).unwrap(), theta).unwrap();
        let brute = grid_prox(&ProximalActivation::SoftThreshold { theta }, w, -10.0, 10.0, 1e-4);
        prop_assert!((out.as_slice()[0] - brute).abs() <= 1e-4);
    }
}

#[test]
fn soft_threshold_example_matches_oracle() {
    let brute = grid_prox(
        &ProximalActivation::SoftThreshold { theta: 0.9 },
        1.5,
        -3.0,
        3.0,
        1e-4,
    );
    assert!((brute - 0.6).abs() <= 1e-4);
    let brute = grid_prox(
        &ProximalActivation::SoftThreshold { theta: 0.9 },
        -0.5,
        -3.0,
        3.0,
        1e-4,
    );
    assert!(brute.abs() <= 1e-4);
}

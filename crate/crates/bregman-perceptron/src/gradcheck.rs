//! Numerical checks of the Bregman loss: central finite differences against
//! the closed-form gradient `σ(z) − y`, and the direct formula against the
//! envelope form `E_z(y) − E_z(σ(z))`.

use bregman_perceptron_core::loss::{bregman_loss, bregman_loss_grad_z, envelope_loss};
use bregman_perceptron_core::{DenseVector, ProximalActivation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FD_STEP: f64 = 1e-6;
pub const FD_TOLERANCE: f64 = 1e-5;
pub const ENVELOPE_TOLERANCE: f64 = 1e-10;
/// Sampled pre-activations stay at least this far from a kink of `σ`.
pub const KINK_MARGIN: f64 = 1e-4;
const DIM: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Worst {
    pub trial: usize,
    pub coordinate: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub trials: usize,
    /// `max |g − fd| / max(|g|, 1)` over all coordinates.
    pub max_fd_error: f64,
    pub worst_fd: Option<Worst>,
    pub max_envelope_gap: f64,
    pub worst_envelope_trial: Option<usize>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_fd_error <= FD_TOLERANCE && self.max_envelope_gap <= ENVELOPE_TOLERANCE
    }
}

/// Draws a target in `dom Ψ`. For the rectifier a quarter of the draws are
/// one-hot, which sit on the boundary of the orthant.
fn sample_target(act: &ProximalActivation, rng: &mut ChaCha8Rng) -> DenseVector {
    match act {
        ProximalActivation::Rectifier => {
            if rng.gen_bool(0.25) {
                let mut y = DenseVector::zeros(DIM);
                y[rng.gen_range(0..DIM)] = 1.0;
                y
            } else {
                DenseVector::from_vec((0..DIM).map(|_| rng.gen_range(0.0..3.0)).collect())
            }
        }
        _ => DenseVector::from_vec((0..DIM).map(|_| rng.gen_range(-3.0..3.0)).collect()),
    }
}

fn sample_preactivation(act: &ProximalActivation, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..DIM)
        .map(|_| loop {
            let z = rng.gen_range(-3.0..3.0);
            if act.kink_distance(z).is_none_or(|d| d >= KINK_MARGIN) {
                break z;
            }
        })
        .collect()
}

/// Runs `trials` random `(y, z)` pairs. `poison` adds a fixed offset to the
/// analytic gradient, as a negative control.
pub fn run_gradcheck(
    act: &ProximalActivation,
    trials: usize,
    seed: u64,
    poison: bool,
) -> GradCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradCheckReport {
        trials,
        max_fd_error: 0.0,
        worst_fd: None,
        max_envelope_gap: 0.0,
        worst_envelope_trial: None,
    };
    for trial in 0..trials {
        let y = sample_target(act, &mut rng);
        let z = sample_preactivation(act, &mut rng);
        let loss_at =
            |p: &[f64]| bregman_loss(act, &y, &DenseVector::from(p)).expect("y in domain");

        let zv = DenseVector::from(z.as_slice());
        let mut grad = bregman_loss_grad_z(act, &y, &zv).expect("y in domain");
        if poison {
            grad[0] += 1e-3;
        }
        for j in 0..DIM {
            let mut plus = z.clone();
            let mut minus = z.clone();
            plus[j] += FD_STEP;
            minus[j] -= FD_STEP;
            let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * FD_STEP);
            let err = (grad[j] - numeric).abs() / grad[j].abs().max(1.0);
            if err > report.max_fd_error || report.worst_fd.is_none() {
                report.max_fd_error = err.max(report.max_fd_error);
                report.worst_fd = Some(Worst {
                    trial,
                    coordinate: j,
                    analytic: grad[j],
                    numeric,
                });
            }
        }

        let gap = (loss_at(&z) - envelope_loss(act, &y, &zv).expect("y in domain")).abs();
        if gap > report.max_envelope_gap || report.worst_envelope_trial.is_none() {
            report.max_envelope_gap = gap.max(report.max_envelope_gap);
            report.worst_envelope_trial = Some(trial);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_for_each_activation() {
        for act in [
            ProximalActivation::Rectifier,
            ProximalActivation::Identity,
            ProximalActivation::SoftThreshold { theta: 0.7 },
        ] {
            let r = run_gradcheck(&act, 100, 3, false);
            assert!(r.passed(), "{act:?}: {r:?}");
        }
    }

    #[test]
    fn poison_is_caught() {
        let r = run_gradcheck(&ProximalActivation::Identity, 10, 3, true);
        assert!(!r.passed());
        assert_eq!(r.worst_fd.unwrap().coordinate, 0);
    }
}

#![allow(dead_code)]

use bregman_perceptron_core::ProximalActivation;

/// Scalar penalty Ψ evaluated directly from its definition; `None` is +∞.
pub fn scalar_psi(act: &ProximalActivation, u: f64) -> Option<f64> {
    match *act {
        ProximalActivation::Rectifier => (u >= 0.0).then_some(0.0),
        ProximalActivation::Identity => Some(0.0),
        ProximalActivation::SoftThreshold { theta } => Some(theta * u.abs()),
    }
}

/// Brute-force minimizer of ½(u − z)² + Ψ(u) over the grid lo, lo+step, …, hi.
pub fn grid_prox(act: &ProximalActivation, z: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=n {
        let u = lo + k as f64 * step;
        if let Some(p) = scalar_psi(act, u) {
            let val = 0.5 * (u - z) * (u - z) + p;
            if val < best.0 {
                best = (val, u);
            }
        }
    }
    best.1
}

/// Central difference of `f` along each coordinate.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    (0..at.len())
        .map(|j| {
            let mut plus = at.to_vec();
            let mut minus = at.to_vec();
            plus[j] += h;
            minus[j] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

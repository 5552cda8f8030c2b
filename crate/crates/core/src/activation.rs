//! Activation functions.
//!
//! A [`ProximalActivation`] is the proximal map `σ(z) = argmin_u ½‖u − z‖² + Ψ(u)`
//! of a convex penalty `Ψ`, and carries that penalty alongside the map. The
//! Bregman trainers only ever need `σ` and `Ψ`; the subderivative rule exists
//! for the squared-loss baselines.
//!
//! [`Heaviside`] is not a proximal map and only implements [`Activation`].

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::tensor::DenseVector;

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

/// Pointwise activation `σ`.
pub trait Activation {
    fn activate(&self, z: &DenseVector) -> DenseVector;
}

/// An activation that is the proximal map of a convex penalty `Ψ`.
pub trait Proximal: Activation {
    fn psi(&self, u: &DenseVector) -> ExtendedReal;

    /// `u ∈ dom(Ψ)`.
    fn in_domain(&self, u: &DenseVector) -> bool {
        self.psi(u).is_finite()
    }
}

/// An activation with a (sub)derivative rule `σ′`.
pub trait Subdifferentiable: Activation {
    fn subderivative(&self, z: &DenseVector) -> DenseVector;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProximalActivation {
    /// `max(0, z)`, the prox of the indicator of the nonnegative orthant.
    Rectifier,
    /// The prox of `Ψ ≡ 0`.
    Identity,
    /// Soft shrinkage, the prox of `theta·‖u‖₁`. Not one of the classic
    /// perceptron activations; included as a full-domain penalty with
    /// nonzero values.
    SoftThreshold { theta: f64 },
}

impl ProximalActivation {
    pub fn soft_threshold(theta: f64) -> Result<Self, ParseActivationError> {
        if theta.is_finite() && theta >= 0.0 {
            Ok(ProximalActivation::SoftThreshold { theta })
        } else {
            Err(ParseActivationError(alloc::format!(
                "soft-threshold level must be a nonnegative finite number, got {theta}"
            )))
        }
    }

    /// Scalar proximal map.
    pub fn prox_scalar(&self, z: f64) -> f64 {
        match *self {
            ProximalActivation::Rectifier => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            ProximalActivation::Identity => z,
            ProximalActivation::SoftThreshold { theta } => shrink(z, theta),
        }
    }

    pub fn prox(&self, z: &DenseVector) -> DenseVector {
        z.map(|v| self.prox_scalar(v))
    }

    pub fn psi(&self, u: &DenseVector) -> ExtendedReal {
        match *self {
            ProximalActivation::Rectifier => {
                if u.iter().all(|&v| v >= 0.0) {
                    ExtendedReal::Finite(0.0)
                } else {
                    ExtendedReal::PosInfinity
                }
            }
            ProximalActivation::Identity => ExtendedReal::Finite(0.0),
            ProximalActivation::SoftThreshold { theta } => {
                ExtendedReal::Finite(theta * u.iter().fold(0.0, |acc, v| acc + v.abs()))
            }
        }
    }

    pub fn in_domain(&self, y: &DenseVector) -> bool {
        self.psi(y).is_finite()
    }

    /// Rectifier: 1 on `z ≥ 0` (so `σ′(0) = 1`), else 0. Identity: 1.
    /// Soft threshold: 1 where `|z| > theta`, else 0.
    pub fn subderivative(&self, z: &DenseVector) -> DenseVector {
        match *self {
            ProximalActivation::Rectifier => z.map(|v| if v >= 0.0 { 1.0 } else { 0.0 }),
            ProximalActivation::Identity => z.map(|_| 1.0),
            ProximalActivation::SoftThreshold { theta } => {
                z.map(|v| if v.abs() > theta { 1.0 } else { 0.0 })
            }
        }
    }

    /// Distance of `z` from the nearest point where `σ` is not differentiable.
    /// `None` when `σ` is smooth everywhere.
    pub fn kink_distance(&self, z: f64) -> Option<f64> {
        match *self {
            ProximalActivation::Rectifier => Some(z.abs()),
            ProximalActivation::Identity => None,
            ProximalActivation::SoftThreshold { theta } => {
                Some((z - theta).abs().min((z + theta).abs()))
            }
        }
    }
}

/// `sign(z)·max(|z| − theta, 0)`.
pub(crate) fn shrink(z: f64, theta: f64) -> f64 {
    if z > theta {
        z - theta
    } else if z < -theta {
        z + theta
    } else {
        0.0
    }
}

impl Activation for ProximalActivation {
    fn activate(&self, z: &DenseVector) -> DenseVector {
        self.prox(z)
    }
}

impl Proximal for ProximalActivation {
    fn psi(&self, u: &DenseVector) -> ExtendedReal {
        ProximalActivation::psi(self, u)
    }
}

impl Subdifferentiable for ProximalActivation {
    fn subderivative(&self, z: &DenseVector) -> DenseVector {
        ProximalActivation::subderivative(self, z)
    }
}

/// Unit step with `H(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Heaviside;

impl Heaviside {
    pub fn apply(&self, z: &DenseVector) -> DenseVector {
        z.map(|v| if v >= 0.0 { 1.0 } else { 0.0 })
    }
}

impl Activation for Heaviside {
    fn activate(&self, z: &DenseVector) -> DenseVector {
        self.apply(z)
    }
}

/// Any activation selectable by name: `relu`, `identity`, `softshrink:<theta>`,
/// `heaviside`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    Proximal(ProximalActivation),
    Heaviside,
}

impl ActivationKind {
    pub fn as_proximal(&self) -> Option<&ProximalActivation> {
        match self {
            ActivationKind::Proximal(p) => Some(p),
            ActivationKind::Heaviside => None,
        }
    }
}

impl Activation for ActivationKind {
    fn activate(&self, z: &DenseVector) -> DenseVector {
        match self {
            ActivationKind::Proximal(p) => p.prox(z),
            ActivationKind::Heaviside => Heaviside.apply(z),
        }
    }
}

impl From<ProximalActivation> for ActivationKind {
    fn from(p: ProximalActivation) -> Self {
        ActivationKind::Proximal(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseActivationError(pub String);

impl fmt::Display for ParseActivationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for ParseActivationError {}

impl FromStr for ActivationKind {
    type Err = ParseActivationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relu" => Ok(ProximalActivation::Rectifier.into()),
            "identity" => Ok(ProximalActivation::Identity.into()),
            "heaviside" => Ok(ActivationKind::Heaviside),
            _ => {
                if let Some(rest) = s.strip_prefix("softshrink:") {
                    let theta: f64 = rest.parse().map_err(|_| {
                        ParseActivationError(alloc::format!("invalid softshrink level `{rest}`"))
                    })?;
                    Ok(ProximalActivation::soft_threshold(theta)?.into())
                } else {
                    Err(ParseActivationError(alloc::format!(
                        "unknown activation `{s}` (expected relu, identity, softshrink:<theta> or heaviside)"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::Proximal(ProximalActivation::Rectifier) => f.write_str("relu"),
            ActivationKind::Proximal(ProximalActivation::Identity) => f.write_str("identity"),
            ActivationKind::Proximal(ProximalActivation::SoftThreshold { theta }) => {
                write!(f, "softshrink:{theta}")
            }
            ActivationKind::Heaviside => f.write_str("heaviside"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn v(xs: &[f64]) -> DenseVector {
        DenseVector::from(xs)
    }

    #[test]
    fn prox_examples() {
        let relu = ProximalActivation::Rectifier;
        assert_eq!(
            relu.prox(&v(&[-3.0, 0.0, 5.0])).as_slice(),
            &[0.0, 0.0, 5.0]
        );
        let id = ProximalActivation::Identity;
        assert_eq!(id.prox(&v(&[1.5, -2.0])).as_slice(), &[1.5, -2.0]);
        let st = ProximalActivation::soft_threshold(0.9).unwrap();
        let out = st.prox(&v(&[1.5, -0.5]));
        assert!((out[0] - 0.6).abs() < 1e-12);
        assert_eq!(out[1], 0.0);
    }

    #[test]
    fn psi_examples() {
        let relu = ProximalActivation::Rectifier;
        assert_eq!(relu.psi(&v(&[0.0, 2.0])), ExtendedReal::Finite(0.0));
        assert_eq!(relu.psi(&v(&[-0.1, 2.0])), ExtendedReal::PosInfinity);
        let st = ProximalActivation::soft_threshold(0.5).unwrap();
        assert_eq!(st.psi(&v(&[2.0, -2.0])), ExtendedReal::Finite(2.0));
        assert_eq!(
            ProximalActivation::Identity.psi(&v(&[-7.0])),
            ExtendedReal::Finite(0.0)
        );
    }

    #[test]
    fn domain_examples() {
        let relu = ProximalActivation::Rectifier;
        assert!(relu.in_domain(&v(&[0.0, 0.0, 1.0, 0.0])));
        assert!(!relu.in_domain(&v(&[-1.0, 0.0])));
        assert!(ProximalActivation::Identity.in_domain(&v(&[-1e300, 3.0])));
    }

    #[test]
    fn subderivative_examples() {
        let relu = ProximalActivation::Rectifier;
        assert_eq!(relu.subderivative(&v(&[0.0])).as_slice(), &[1.0]);
        assert_eq!(relu.subderivative(&v(&[-2.0, 3.0])).as_slice(), &[0.0, 1.0]);
        assert_eq!(
            ProximalActivation::Identity
                .subderivative(&v(&[7.0]))
                .as_slice(),
            &[1.0]
        );
        let st = ProximalActivation::soft_threshold(1.0).unwrap();
        assert_eq!(
            st.subderivative(&v(&[-2.0, 1.0, 0.5, 1.5])).as_slice(),
            &[1.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn heaviside_examples() {
        assert_eq!(
            Heaviside.apply(&v(&[-1.0, 0.0, 2.0])).as_slice(),
            &[0.0, 1.0, 1.0]
        );
        assert_eq!(
            Heaviside.apply(&DenseVector::zeros(3)).as_slice(),
            &[1.0, 1.0, 1.0]
        );
        assert_eq!(Heaviside.apply(&v(&[1e-12])).as_slice(), &[1.0]);
    }

    #[test]
    fn names_round_trip() {
        for name in ["relu", "identity", "heaviside", "softshrink:0.25"] {
            let kind: ActivationKind = name.parse().unwrap();
            assert_eq!(kind.to_string(), name);
        }
        assert!("softshrink:-1".parse::<ActivationKind>().is_err());
        assert!("softshrink:abc".parse::<ActivationKind>().is_err());
        assert!("tanh".parse::<ActivationKind>().is_err());
    }

    #[test]
    fn negative_threshold_rejected() {
        assert!(ProximalActivation::soft_threshold(-0.1).is_err());
        assert!(ProximalActivation::soft_threshold(f64::NAN).is_err());
    }
}

//! Data terms.
//!
//! The Bregman loss of a proximal activation is
//!
//! ```text
//! L(y, σ(z)) = ½‖y − σ(z)‖² + D_Ψ^{z − σ(z)}(y, σ(z))
//! ```
//!
//! and its gradient in `z` is simply `σ(z) − y`: no derivative of `σ` is
//! involved. It also equals `E_z(y) − E_z(σ(z))` with
//! `E_z(x) = ½‖x − z‖² + Ψ(x)`; [`envelope_loss`] evaluates that form
//! separately so the two can be checked against each other.

use crate::activation::{Activation, ExtendedReal, Proximal, Subdifferentiable};
use crate::error::{Error, Result};
use crate::tensor::DenseVector;

/// Which data term an objective uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Bregman,
    Squared,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Bregman => "bregman",
            LossKind::Squared => "squared",
        }
    }
}

/// `Ψ(u) − Ψ(v) − ⟨q, u − v⟩`, `+∞` when `u ∉ dom Ψ`.
///
/// `v` must lie in `dom Ψ`; `q` is taken to be a subgradient of `Ψ` at `v`.
pub fn bregman_distance<A: Proximal + ?Sized>(
    act: &A,
    u: &DenseVector,
    v: &DenseVector,
    q: &DenseVector,
) -> Result<ExtendedReal> {
    let psi_v = act
        .psi(v)
        .finite()
        .ok_or(Error::OutsideDomain { sample: None })?;
    let diff = u.sub(v)?;
    let inner = q.dot(&diff)?;
    Ok(match act.psi(u) {
        ExtendedReal::Finite(psi_u) => ExtendedReal::Finite(psi_u - psi_v - inner),
        ExtendedReal::PosInfinity => ExtendedReal::PosInfinity,
    })
}

/// Bregman data term `½‖y − σ(z)‖² + D_Ψ^{z−σ(z)}(y, σ(z))`.
///
/// Fails with [`Error::OutsideDomain`] when `y ∉ dom Ψ`.
pub fn bregman_loss<A: Proximal + ?Sized>(
    act: &A,
    y: &DenseVector,
    z: &DenseVector,
) -> Result<f64> {
    let out = act.activate(z);
    let psi_y = act
        .psi(y)
        .finite()
        .ok_or(Error::OutsideDomain { sample: None })?;
    // σ(z) always lies in dom Ψ.
    let psi_out = act
        .psi(&out)
        .finite()
        .ok_or(Error::OutsideDomain { sample: None })?;
    let residual = y.sub(&out)?;
    let subgrad = z.sub(&out)?;
    let distance = psi_y - psi_out - subgrad.dot(&residual)?;
    Ok(residual.half_squared_norm() + distance)
}

/// `E_z(y) − E_z(σ(z))` with `E_z(x) = ½‖x − z‖² + Ψ(x)`.
pub fn envelope_loss<A: Proximal + ?Sized>(
    act: &A,
    y: &DenseVector,
    z: &DenseVector,
) -> Result<f64> {
    let out = act.activate(z);
    let at_target = envelope(act, y, z)?.ok_or(Error::OutsideDomain { sample: None })?;
    let at_prox = envelope(act, &out, z)?.ok_or(Error::OutsideDomain { sample: None })?;
    Ok(at_target - at_prox)
}

fn envelope<A: Proximal + ?Sized>(
    act: &A,
    x: &DenseVector,
    z: &DenseVector,
) -> Result<Option<f64>> {
    let quad = x.sub(z)?.half_squared_norm();
    Ok(act.psi(x).finite().map(|p| quad + p))
}

/// `∇_z L(y, σ(z)) = σ(z) − y`.
pub fn bregman_loss_grad_z<A: Proximal + ?Sized>(
    act: &A,
    y: &DenseVector,
    z: &DenseVector,
) -> Result<DenseVector> {
    if !act.in_domain(y) {
        return Err(Error::OutsideDomain { sample: None });
    }
    Ok(act.activate(z).sub(y)?)
}

/// `½‖y − σ(z)‖²`.
pub fn squared_loss<A: Activation + ?Sized>(
    act: &A,
    y: &DenseVector,
    z: &DenseVector,
) -> Result<f64> {
    Ok(y.sub(&act.activate(z))?.half_squared_norm())
}

/// `(σ(z) − y) ⊙ σ′(z)`.
pub fn squared_loss_subgrad_z<A: Subdifferentiable + ?Sized>(
    act: &A,
    y: &DenseVector,
    z: &DenseVector,
) -> Result<DenseVector> {
    let residual = act.activate(z).sub(y)?;
    Ok(residual.hadamard(&act.subderivative(z))?)
}

//! Travelling waves `q_n(t) = U(ωt + pn)` of the driven lattice. In the moving frame
//! `U` solves the advance-delay equation
//!
//! `ω²U'' + U − βU² − λω²[U''(z − p) + U''(z + p)] + γωU' − Δ·cos z = 0`,
//!
//! which is discretised by Fourier collocation, solved by Newton's method and followed in
//! `γ` or `Δ` by pseudo-arclength continuation.

mod continuation;
mod fourier;
mod newton;

pub use continuation::{continue_branch, BifurcationBranch, BranchPoint, Fold, Parameter, StepControl, Termination};
pub use fourier::FourierSolution;
pub use newton::{
    collocation_points, linear_response_guess, newton_solve, offgrid_residual, residual, NewtonOptions,
    NewtonReport, Subspace,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dimensionless lattice and drive parameters.
///
/// `gamma` may be negative (gain): continuation loops in the damping pass through `γ < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub omega: f64,
    pub p: f64,
    pub delta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { beta: 1.0, gamma: 0.0, lambda: 0.0, omega: 0.5, p: 2.0 * PI / 20.0, delta: 0.0 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.beta, self.gamma, self.lambda, self.omega, self.p, self.delta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("model parameters must be finite".into()));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {}", self.omega)));
        }
        if self.lambda.abs() >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "coupling must satisfy |lambda| < 1/2, got {}",
                self.lambda
            )));
        }
        if self.p == 0.0 {
            return Err(Error::InvalidParameter("drive wavenumber p must be non-zero".into()));
        }
        Ok(())
    }

    pub fn with(mut self, parameter: Parameter, value: f64) -> Self {
        match parameter {
            Parameter::Gamma => self.gamma = value,
            Parameter::Delta => self.delta = value,
        }
        self
    }

    pub fn get(&self, parameter: Parameter) -> f64 {
        match parameter {
            Parameter::Gamma => self.gamma,
            Parameter::Delta => self.delta,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = ModelParams { lambda: 0.6, ..Default::default() };
        assert!(bad.validate().unwrap_err().to_string().contains("1/2"));
        assert!(ModelParams { omega: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelParams { p: 0.0, ..Default::default() }.validate().is_err());
        assert!(ModelParams { gamma: -0.1, ..Default::default() }.validate().is_ok());
    }
}

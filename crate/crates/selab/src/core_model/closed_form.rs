use serde::{Deserialize, Serialize};

use super::{singular_exponent, RadialFn};
use crate::{Error, Result};

/// Closed-form solution families of Δu = u^τ (singular power) and
/// Δu = 1 (quadratic polynomials). Evaluated analytically throughout so
/// they serve as exact oracles for the solvers.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum ClosedFormSolution {
    /// u(x) = A |x|^β with β = 2/(1−τ) and A^{1−τ} β(β+n−2) = 1.
    SingularPower { n: usize, tau: f64, amplitude: f64, beta: f64 },
    /// u(x) = a0 + Σ a_j x_j², with 2 Σ a_j = 1 so Δu ≡ 1.
    Quadratic { a0: f64, coeffs: Vec<f64> },
}

/// Amplitude of the singular power solution, derived from the substitution
/// identity A^{1−τ} β(β+n−2) = 1 (the residual oracle is authoritative).
pub fn singular_amplitude(n: usize, tau: f64) -> f64 {
    let beta = singular_exponent(tau);
    (beta * (beta + n as f64 - 2.0)).powf(-1.0 / (1.0 - tau))
}

/// The amplitude as printed in the source material, with denominator
/// 2(n+1) − 2(n−1)τ. Fails the residual oracle at (n, τ) = (3, −1);
/// kept so the discrepancy can be reported, never used as a solution.
pub fn printed_amplitude(n: usize, tau: f64) -> f64 {
    let nf = n as f64;
    ((1.0 - tau) * (1.0 - tau) / (2.0 * (nf + 1.0) - 2.0 * (nf - 1.0) * tau))
        .powf(1.0 / (1.0 - tau))
}

/// The singular solution u = A|x|^{2/(1−τ)}.
///
/// Also covers τ = 0, where it degenerates to |x|²/(2n).
pub fn singular_solution(n: usize, tau: f64) -> Result<ClosedFormSolution> {
    if n < 1 {
        return Err(Error::UnsupportedDimension(n));
    }
    if tau > 0.0 {
        return Err(Error::UnsupportedExponent(tau));
    }
    let beta = singular_exponent(tau);
    // n = 1 with τ ≤ −1 makes β(β + n − 2) ≤ 0: no positive power solution
    if beta * (beta + n as f64 - 2.0) <= 0.0 {
        return Err(Error::NoPositiveSolution);
    }
    Ok(ClosedFormSolution::SingularPower {
        n,
        tau,
        amplitude: singular_amplitude(n, tau),
        beta: singular_exponent(tau),
    })
}

/// Quadratic solution a0 + Σ a_j x_j² of Δu = 1.
pub fn quadratic_solution(a0: f64, coeffs: &[f64]) -> Result<ClosedFormSolution> {
    if a0 <= 0.0 {
        return Err(Error::InvalidCoefficients(format!("a0 = {a0} must be > 0")));
    }
    if coeffs.iter().any(|&a| a < 0.0) {
        return Err(Error::InvalidCoefficients("all a_j must be >= 0".into()));
    }
    let sum: f64 = coeffs.iter().sum();
    if (2.0 * sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidCoefficients(format!(
            "2 sum a_j = {} != 1",
            2.0 * sum
        )));
    }
    Ok(ClosedFormSolution::Quadratic { a0, coeffs: coeffs.to_vec() })
}

impl ClosedFormSolution {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ClosedFormSolution::SingularPower { amplitude, beta, .. } => {
                let r = norm(x);
                amplitude * r.powf(*beta)
            }
            ClosedFormSolution::Quadratic { a0, coeffs } => {
                a0 + coeffs.iter().zip(x).map(|(a, xi)| a * xi * xi).sum::<f64>()
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ClosedFormSolution::SingularPower { amplitude, beta, .. } => {
                let r = norm(x);
                if r == 0.0 {
                    return vec![0.0; x.len()];
                }
                x.iter()
                    .map(|&xi| amplitude * beta * r.powf(beta - 2.0) * xi)
                    .collect()
            }
            ClosedFormSolution::Quadratic { coeffs, .. } => {
                coeffs.iter().zip(x).map(|(a, xi)| 2.0 * a * xi).collect()
            }
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        match self {
            ClosedFormSolution::SingularPower { n, amplitude, beta, .. } => {
                let r = norm(x);
                amplitude * beta * (beta + *n as f64 - 2.0) * r.powf(beta - 2.0)
            }
            ClosedFormSolution::Quadratic { .. } => 1.0,
        }
    }

    /// Radial view of the closed form, when one exists: singular powers are
    /// radial by construction; a quadratic is radial iff all a_j coincide.
    pub fn as_radial(&self) -> Option<ClosedFormRadial> {
        match self {
            ClosedFormSolution::SingularPower { amplitude, beta, .. } => {
                Some(ClosedFormRadial::Power { amplitude: *amplitude, beta: *beta })
            }
            ClosedFormSolution::Quadratic { a0, coeffs } => {
                let c = coeffs[0];
                if coeffs.iter().all(|&a| (a - c).abs() < 1e-14) {
                    Some(ClosedFormRadial::Quadratic { a0: *a0, c })
                } else {
                    None
                }
            }
        }
    }
}

/// Radial restriction of a closed form: u(r) with analytic derivative.
#[derive(Debug, Clone, Copy)]
pub enum ClosedFormRadial {
    Power { amplitude: f64, beta: f64 },
    Quadratic { a0: f64, c: f64 },
}

impl RadialFn for ClosedFormRadial {
    fn value(&self, r: f64) -> f64 {
        match self {
            ClosedFormRadial::Power { amplitude, beta } => amplitude * r.powf(*beta),
            ClosedFormRadial::Quadratic { a0, c } => a0 + c * r * r,
        }
    }

    fn deriv(&self, r: f64) -> f64 {
        match self {
            ClosedFormRadial::Power { amplitude, beta } => {
                if r == 0.0 && *beta < 1.0 {
                    f64::INFINITY
                } else {
                    amplitude * beta * r.powf(beta - 1.0)
                }
            }
            ClosedFormRadial::Quadratic { c, .. } => 2.0 * c * r,
        }
    }

    fn r_range(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|&xi| xi * xi).sum::<f64>().sqrt()
}

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Source term f in Δu = f(u).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Source {
    /// f(u) = u^τ.
    Power { tau: f64 },
    /// f ≡ 1 (the τ = 0 case written out).
    Unit,
    /// Custom positive source with its stated positivity bound
    /// s^{τ/(τ−1)} f(s)^{1/(1−τ)} ≥ c0.
    #[serde(skip)]
    Custom { f: fn(f64) -> f64, c0: f64 },
}

impl PartialEq for Source {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Source::Power { tau: a }, Source::Power { tau: b }) => a == b,
            (Source::Unit, Source::Unit) => true,
            // custom sources compare by their stated bound only
            (Source::Custom { c0: a, .. }, Source::Custom { c0: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl Source {
    pub fn power(tau: f64) -> Self {
        Source::Power { tau }
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        match self {
            Source::Power { tau } => {
                if u <= 0.0 {
                    return Err(Error::NonpositiveField(format!("u = {u} in u^tau")));
                }
                Ok(u.powf(*tau))
            }
            Source::Unit => Ok(1.0),
            Source::Custom { f, .. } => Ok(f(u)),
        }
    }

    /// d f / d u, used by the Newton solver and the linearised operator.
    pub fn deriv(&self, u: f64) -> Result<f64> {
        match self {
            Source::Power { tau } => {
                if u <= 0.0 {
                    return Err(Error::NonpositiveField(format!("u = {u} in u^(tau-1)")));
                }
                Ok(tau * u.powf(tau - 1.0))
            }
            Source::Unit => Ok(0.0),
            Source::Custom { f, .. } => {
                // no analytic derivative for custom sources; central difference
                let h = 1e-6 * u.abs().max(1.0);
                Ok((f(u + h) - f(u - h)) / (2.0 * h))
            }
        }
    }

    pub fn tau(&self) -> f64 {
        match self {
            Source::Power { tau } => *tau,
            Source::Unit => 0.0,
            Source::Custom { .. } => 0.0,
        }
    }
}

/// Computational domain Ω.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Domain {
    Ball { radius: f64 },
    Box { corner: Vec<f64>, lengths: Vec<f64> },
    Annulus { inner: f64, outer: f64 },
}

impl Domain {
    fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { radius } => {
                if *radius <= 0.0 {
                    return Err(Error::InvalidSpec(format!("ball radius {radius} <= 0")));
                }
            }
            Domain::Box { lengths, .. } => {
                if lengths.iter().any(|&l| l <= 0.0) {
                    return Err(Error::InvalidSpec("box side lengths must be > 0".into()));
                }
            }
            Domain::Annulus { inner, outer } => {
                if *inner <= 0.0 || *outer <= *inner {
                    return Err(Error::InvalidSpec(format!(
                        "annulus requires 0 < r0 < R, got r0 = {inner}, R = {outer}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dirichlet boundary data.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum Boundary {
    Constant(f64),
    Samples(Vec<f64>),
}

impl Boundary {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            Boundary::Constant(b) => *b > 0.0,
            Boundary::Samples(s) => !s.is_empty() && s.iter().all(|&v| v > 0.0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec("boundary values must be > 0".into()))
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            Boundary::Constant(b) => *b,
            Boundary::Samples(s) => s.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }
}

/// The single configuration record: dimension, exponent, source, domain
/// and boundary data.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProblemSpec {
    pub n: usize,
    pub tau: f64,
    pub source: Source,
    pub domain: Domain,
    pub boundary: Boundary,
}

impl ProblemSpec {
    pub fn new(n: usize, tau: f64, source: Source, domain: Domain, boundary: Boundary) -> Result<Self> {
        let spec = ProblemSpec { n, tau, source, domain, boundary };
        spec.validate()?;
        Ok(spec)
    }

    /// Power-source problem on a ball with constant boundary data.
    pub fn power_on_ball(n: usize, tau: f64, radius: f64, b: f64) -> Result<Self> {
        ProblemSpec::new(
            n,
            tau,
            if tau == 0.0 { Source::Unit } else { Source::power(tau) },
            Domain::Ball { radius },
            Boundary::Constant(b),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::UnsupportedDimension(self.n));
        }
        if self.tau > 0.0 {
            return Err(Error::UnsupportedExponent(self.tau));
        }
        self.domain.validate()?;
        self.boundary.validate()
    }
}

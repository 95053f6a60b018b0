use std::io::{BufRead, Write};

use super::RadialFn;
use crate::{Error, Result};

/// Sampled radial solution (r, u, u′) with problem metadata. Produced by
/// the shooting and boundary-value solves; evaluated anywhere on the sample
/// range by cubic Hermite interpolation (both u and u′ are exact at nodes,
/// so the interpolant is fourth-order accurate).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub n: usize,
    pub tau: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Center value u(0) when the samples start at r = 0.
    pub center_value: Option<f64>,
}

impl RadialProfile {
    pub fn new(n: usize, tau: f64, r: Vec<f64>, u: Vec<f64>, du: Vec<f64>) -> Result<Self> {
        if r.len() != u.len() || r.len() != du.len() || r.is_empty() {
            return Err(Error::InvalidSpec("profile arrays must be nonempty and equal length".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("profile radii must be strictly increasing".into()));
        }
        if r[0] < 0.0 {
            return Err(Error::InvalidSpec("profile radii must be >= 0".into()));
        }
        let center_value = if r[0] == 0.0 {
            if du[0].abs() > 1e-10 {
                return Err(Error::InvalidSpec(format!(
                    "regularity at the center requires u'(0) = 0, got {}",
                    du[0]
                )));
            }
            Some(u[0])
        } else {
            None
        };
        let profile = RadialProfile { n, tau, r, u, du, center_value };
        profile.check_positive()?;
        Ok(profile)
    }

    pub fn check_positive(&self) -> Result<()> {
        if let Some(i) = self.u.iter().position(|&v| v <= 0.0) {
            return Err(Error::NonpositiveField(format!(
                "u(r = {}) = {}",
                self.r[i], self.u[i]
            )));
        }
        Ok(())
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    fn bracket(&self, r: f64) -> Result<usize> {
        let eps = 1e-12 * self.r_max().max(1.0);
        if r < self.r[0] - eps || r > self.r_max() + eps {
            return Err(Error::OutOfDomain(format!(
                "r = {r} outside sampled range [{}, {}]",
                self.r[0],
                self.r_max()
            )));
        }
        let i = match self.r.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        Ok(i.min(self.r.len() - 2))
    }

    /// u(r) by cubic Hermite interpolation.
    pub fn value_at(&self, r: f64) -> Result<f64> {
        let i = self.bracket(r)?;
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        Ok(h00 * self.u[i] + h10 * h * self.du[i] + h01 * self.u[i + 1] + h11 * h * self.du[i + 1])
    }

    /// u′(r) by differentiating the Hermite interpolant.
    pub fn deriv_at(&self, r: f64) -> Result<f64> {
        let i = self.bracket(r)?;
        let h = self.r[i + 1] - self.r[i];
        let t = (r - self.r[i]) / h;
        let (d00, d10, d01, d11) = hermite_basis_deriv(t);
        Ok((d00 * self.u[i] + d01 * self.u[i + 1]) / h + d10 * self.du[i] + d11 * self.du[i + 1])
    }

    /// CSV with header `r,u,du`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,u,du")?;
        for i in 0..self.r.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e}", self.r[i], self.u[i], self.du[i])?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(n: usize, tau: f64, reader: R) -> Result<Self> {
        let mut r = Vec::new();
        let mut u = Vec::new();
        let mut du = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('r')) {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 columns", lineno + 1)));
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            r.push(parse(cols[0])?);
            u.push(parse(cols[1])?);
            du.push(parse(cols[2])?);
        }
        RadialProfile::new(n, tau, r, u, du)
    }
}

impl RadialFn for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.value_at(r).unwrap_or(f64::NAN)
    }

    fn deriv(&self, r: f64) -> f64 {
        self.deriv_at(r).unwrap_or(f64::NAN)
    }

    fn r_range(&self) -> (f64, f64) {
        (self.r[0], self.r_max())
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

fn hermite_basis_deriv(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    (
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 2.0 * t,
    )
}

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Node classification on a masked tensor grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Mask {
    Interior,
    Boundary,
    Exterior,
}

impl From<Mask> for u8 {
    fn from(m: Mask) -> u8 {
        match m {
            Mask::Interior => 0,
            Mask::Boundary => 1,
            Mask::Exterior => 2,
        }
    }
}

impl TryFrom<u8> for Mask {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(Mask::Interior),
            1 => Ok(Mask::Boundary),
            2 => Ok(Mask::Exterior),
            _ => Err(format!("invalid mask code {v}")),
        }
    }
}

/// Masked tensor-grid scalar field with one uniform spacing.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridField {
    pub dims: Vec<usize>,
    pub h: f64,
    pub origin: Vec<f64>,
    pub values: Vec<f64>,
    pub mask: Vec<Mask>,
}

impl GridField {
    /// All-interior field sampled from a function of the node coordinates.
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(
        dims: &[usize],
        h: f64,
        origin: &[f64],
        mut f: F,
    ) -> Result<Self> {
        if h <= 0.0 {
            return Err(Error::InvalidSpec(format!("grid spacing h = {h} <= 0")));
        }
        let len: usize = dims.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut coord = vec![0.0; dims.len()];
        let mut index = vec![0usize; dims.len()];
        for flat in 0..len {
            unflatten(dims, flat, &mut index);
            for (a, &i) in index.iter().enumerate() {
                coord[a] = origin[a] + i as f64 * h;
            }
            values.push(f(&coord));
        }
        Ok(GridField {
            dims: dims.to_vec(),
            h,
            origin: origin.to_vec(),
            values,
            mask: vec![Mask::Interior; len],
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Row-major strides (last axis fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dims.len()];
        for a in (0..self.dims.len().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.dims[a + 1];
        }
        s
    }

    pub fn flat(&self, index: &[usize]) -> usize {
        let strides = self.strides();
        index.iter().zip(&strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dims.len()];
        unflatten(&self.dims, flat, &mut idx);
        idx
    }

    pub fn coord(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + i as f64 * self.h)
            .collect()
    }

    /// Multilinear interpolation at an arbitrary point, ignoring the mask.
    pub fn interp_linear(&self, x: &[f64]) -> Result<f64> {
        self.interp(x, 1)
    }

    /// Separable cubic (Catmull-Rom) interpolation, ignoring the mask.
    pub fn interp_cubic(&self, x: &[f64]) -> Result<f64> {
        self.interp(x, 3)
    }

    fn interp(&self, x: &[f64], order: usize) -> Result<f64> {
        let d = self.dims.len();
        let mut base = vec![0isize; d];
        let mut frac = vec![0.0; d];
        let margin = if order == 3 { 1isize } else { 0 };
        for a in 0..d {
            let t = (x[a] - self.origin[a]) / self.h;
            let mut i = t.floor() as isize;
            // clamp so the stencil stays inside the grid
            let max_i = self.dims[a] as isize - 2 - margin;
            if i < margin || i > max_i {
                if t < -1e-9 || t > (self.dims[a] - 1) as f64 + 1e-9 {
                    return Err(Error::OutOfDomain(format!(
                        "interpolation point {x:?} outside grid"
                    )));
                }
                i = i.clamp(margin, max_i.max(margin));
            }
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let strides = self.strides();
        Ok(self.interp_axis(0, &base, &frac, &strides, 0, order))
    }

    fn interp_axis(
        &self,
        axis: usize,
        base: &[isize],
        frac: &[f64],
        strides: &[usize],
        offset: usize,
        order: usize,
    ) -> f64 {
        let d = self.dims.len();
        let t = frac[axis];
        let fetch = |k: isize, this: &Self| -> f64 {
            let idx = offset + (base[axis] + k) as usize * strides[axis];
            if axis + 1 == d {
                this.values[idx]
            } else {
                this.interp_axis(axis + 1, base, frac, strides, idx, order)
            }
        };
        if order == 1 {
            let v0 = fetch(0, self);
            let v1 = fetch(1, self);
            v0 + t * (v1 - v0)
        } else {
            let vm = fetch(-1, self);
            let v0 = fetch(0, self);
            let v1 = fetch(1, self);
            let v2 = fetch(2, self);
            catmull_rom(vm, v0, v1, v2, t)
        }
    }

    /// Serialize to the stable JSON schema (mask codes 0/1/2).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let field: GridField = serde_json::from_str(s)?;
        if field.h <= 0.0 {
            return Err(Error::InvalidSpec("grid spacing must be > 0".into()));
        }
        let len: usize = field.dims.iter().product();
        if field.values.len() != len || field.mask.len() != len {
            return Err(Error::InvalidSpec("values/mask length mismatch".into()));
        }
        Ok(field)
    }
}

fn unflatten(dims: &[usize], mut flat: usize, out: &mut [usize]) {
    for a in (0..dims.len()).rev() {
        out[a] = flat % dims[a];
        flat /= dims[a];
    }
}

fn catmull_rom(vm: f64, v0: f64, v1: f64, v2: f64, t: f64) -> f64 {
    let a = -0.5 * vm + 1.5 * v0 - 1.5 * v1 + 0.5 * v2;
    let b = vm - 2.5 * v0 + 2.0 * v1 - 0.5 * v2;
    let c = 0.5 * (v1 - vm);
    ((a * t + b) * t + c) * t + v0
}

//! Finite-difference Dirichlet machinery on masked tensor grids: domain
//! construction with boundary-cut stencils, the discrete Laplacian, an
//! iterative linear solver, and the nonlinear solution methods (monotone
//! bracketing, damped Newton, constrained energy descent) plus touchdown
//! continuation.

mod nonlinear;
mod solver;

pub use nonlinear::{
    energy_gradient, energy_unbounded_below, energy_value, minimize_energy, monotone_iterate,
    newton_solve, touchdown_continuation, ConstraintBox, ContinuationRow, ContinuationStatus,
    Method, MinimizeResult, SolveOptions,
};
pub use solver::solve_linear_poisson;

use std::collections::HashMap;

use crate::core_model::{Boundary, Domain, GridField, Mask, ProblemSpec};
use crate::{Error, Result};

/// Smallest admissible fractional arm length at a cut boundary; shorter cuts
/// are clamped (the induced boundary perturbation is O(1e-3 h), far below
/// the scheme's O(h²) accuracy).
const THETA_MIN: f64 = 1e-3;

/// A discretised Dirichlet domain: the masked grid plus, for every interior
/// node, the 2n stencil arms with their fractional lengths. Arms that end on
/// the boundary reference a boundary point where Dirichlet data is
/// evaluated; cut arms shorter than the grid spacing give the stencil
/// second-order accuracy up to the curved boundary.
#[derive(Debug, Clone)]
pub struct FdDomain {
    pub n: usize,
    pub domain: Domain,
    pub dims: Vec<usize>,
    pub h: f64,
    pub origin: Vec<f64>,
    pub mask: Vec<Mask>,
    /// Flat grid indices of interior nodes, ascending.
    pub interior: Vec<usize>,
    /// Boundary-point coordinates, n per point, flattened.
    bpoints: Vec<f64>,
    /// Flat grid index when the boundary point coincides with a grid node
    /// (box faces), else -1.
    bpoint_node: Vec<i64>,
    /// 2n arm targets per interior node: value >= 0 is an interior position,
    /// value < 0 encodes boundary point -(v+1).
    arm_target: Vec<i64>,
    /// Fractional arm lengths (1 for full arms), same layout as arm_target.
    arm_theta: Vec<f64>,
    /// Assembled diagonal of -Δ_h (with cut arms).
    diag: Vec<f64>,
    /// Off-diagonal magnitude per arm: coefficient c with
    /// (-Δu)_P -= c·u_arm.
    arm_coef: Vec<f64>,
    /// Sample index per boundary-mask node (ascending flat order), for
    /// Boundary::Samples.
    boundary_sample_index: HashMap<usize, usize>,
    boundary_node_count: usize,
}

impl FdDomain {
    /// Discretise the domain of `spec` with roughly `m` nodes across its
    /// diameter. Balls and annuli are embedded in a box with a two-cell
    /// margin; boxes are gridded exactly (side lengths must be commensurate
    /// with the spacing).
    pub fn build(spec: &ProblemSpec, m: usize) -> Result<FdDomain> {
        spec.validate()?;
        if m < 3 {
            return Err(Error::InvalidSpec(format!("need at least 3 nodes per axis, got {m}")));
        }
        let n = spec.n;
        let (h, origin, dims) = match &spec.domain {
            Domain::Ball { radius } => {
                let h = 2.0 * radius / (m - 1) as f64;
                (h, vec![-radius - 2.0 * h; n], vec![m + 4; n])
            }
            Domain::Annulus { outer, .. } => {
                let h = 2.0 * outer / (m - 1) as f64;
                (h, vec![-outer - 2.0 * h; n], vec![m + 4; n])
            }
            Domain::Box { corner, lengths } => {
                if corner.len() != n || lengths.len() != n {
                    return Err(Error::InvalidSpec("box corner/lengths must have n entries".into()));
                }
                let lmax = lengths.iter().cloned().fold(0.0, f64::max);
                let h = lmax / (m - 1) as f64;
                let mut dims = Vec::with_capacity(n);
                for &l in lengths {
                    let cells = (l / h).round();
                    if ((cells * h - l) / l).abs() > 1e-9 {
                        return Err(Error::InvalidSpec(format!(
                            "box side {l} is not commensurate with spacing {h}"
                        )));
                    }
                    dims.push(cells as usize + 1);
                }
                (h, corner.clone(), dims)
            }
        };

        let len: usize = dims.iter().product();
        let strides = strides_of(&dims);
        let domain = spec.domain.clone();
        let inside = |x: &[f64]| -> bool { domain_inside(&domain, x) };

        let coord_of = |flat: usize| -> Vec<f64> {
            let mut x = vec![0.0; n];
            let mut rem = flat;
            for a in (0..n).rev() {
                x[a] = origin[a] + (rem % dims[a]) as f64 * h;
                rem /= dims[a];
            }
            x
        };

        let mut mask = vec![Mask::Exterior; len];
        for flat in 0..len {
            if inside(&coord_of(flat)) {
                mask[flat] = Mask::Interior;
            }
        }
        // boundary layer: outside nodes with an inside face-neighbor
        for flat in 0..len {
            if mask[flat] != Mask::Interior {
                continue;
            }
            let idx = multi_of(&dims, flat);
            for a in 0..n {
                for dir in [-1isize, 1] {
                    let j = idx[a] as isize + dir;
                    if j < 0 || j as usize >= dims[a] {
                        return Err(Error::InvalidSpec(
                            "interior node touches the grid edge; margin too small".into(),
                        ));
                    }
                    let nb = (flat as isize + dir * strides[a] as isize) as usize;
                    if mask[nb] == Mask::Exterior {
                        mask[nb] = Mask::Boundary;
                    }
                }
            }
        }

        let mut interior = Vec::new();
        let mut interior_pos = vec![-1i64; len];
        for flat in 0..len {
            if mask[flat] == Mask::Interior {
                interior_pos[flat] = interior.len() as i64;
                interior.push(flat);
            }
        }
        if interior.is_empty() {
            return Err(Error::InvalidSpec("no interior nodes at this resolution".into()));
        }
        let mut boundary_sample_index = HashMap::new();
        let mut boundary_node_count = 0;
        for flat in 0..len {
            if mask[flat] == Mask::Boundary {
                boundary_sample_index.insert(flat, boundary_node_count);
                boundary_node_count += 1;
            }
        }

        let mut bpoints: Vec<f64> = Vec::new();
        let mut bpoint_node: Vec<i64> = Vec::new();
        let mut node_bpoint: HashMap<usize, usize> = HashMap::new();
        let mut arm_target = vec![0i64; interior.len() * 2 * n];
        let mut arm_theta = vec![1.0f64; interior.len() * 2 * n];

        for (q, &flat) in interior.iter().enumerate() {
            let x = coord_of(flat);
            for a in 0..n {
                for (s, dir) in [(-1f64, -1isize), (1f64, 1isize)].into_iter() {
                    let arm = q * 2 * n + 2 * a + usize::from(dir > 0);
                    let nb = (flat as isize + dir * strides[a] as isize) as usize;
                    if mask[nb] == Mask::Interior {
                        arm_target[arm] = interior_pos[nb];
                        arm_theta[arm] = 1.0;
                        continue;
                    }
                    // cut arm: bisect the inside indicator along the arm
                    let t = bisect_crossing(&x, a, s * h, &inside);
                    let mut bp = x.clone();
                    bp[a] += s * h * t;
                    // node-aligned cut (box faces): share one point per node
                    let bidx = if (t - 1.0).abs() < 1e-6 && mask[nb] == Mask::Boundary {
                        *node_bpoint.entry(nb).or_insert_with(|| {
                            bpoints.extend_from_slice(&coord_of(nb));
                            bpoint_node.push(nb as i64);
                            bpoint_node.len() - 1
                        })
                    } else {
                        bpoints.extend_from_slice(&bp);
                        bpoint_node.push(-1);
                        bpoint_node.len() - 1
                    };
                    arm_target[arm] = -(bidx as i64) - 1;
                    arm_theta[arm] = t.max(THETA_MIN);
                }
            }
        }

        let mut dom = FdDomain {
            n,
            domain,
            dims,
            h,
            origin,
            mask,
            interior,
            bpoints,
            bpoint_node,
            arm_target,
            arm_theta,
            diag: Vec::new(),
            arm_coef: Vec::new(),
            boundary_sample_index,
            boundary_node_count,
        };
        dom.assemble();
        Ok(dom)
    }

    /// Assemble diagonal and per-arm off-diagonal coefficients of -Δ_h with
    /// the cut-arm (unequal-spacing) second-derivative stencil.
    fn assemble(&mut self) {
        let n = self.n;
        let h2 = self.h * self.h;
        self.diag = vec![0.0; self.interior.len()];
        self.arm_coef = vec![0.0; self.arm_target.len()];
        for q in 0..self.interior.len() {
            for a in 0..n {
                let am = q * 2 * n + 2 * a;
                let ap = am + 1;
                let tm = self.arm_theta[am];
                let tp = self.arm_theta[ap];
                self.diag[q] += 2.0 / (h2 * tm * tp);
                self.arm_coef[am] = 2.0 / (h2 * tm * (tm + tp));
                self.arm_coef[ap] = 2.0 / (h2 * tp * (tm + tp));
            }
        }
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    pub fn grid_len(&self) -> usize {
        self.mask.len()
    }

    /// Coordinates of interior node `q`.
    pub fn interior_coord(&self, q: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        let mut rem = self.interior[q];
        for a in (0..self.n).rev() {
            x[a] = self.origin[a] + (rem % self.dims[a]) as f64 * self.h;
            rem /= self.dims[a];
        }
        x
    }

    /// Coordinates of boundary point `i` (as referenced by stencil arms).
    pub fn boundary_point(&self, i: usize) -> &[f64] {
        &self.bpoints[i * self.n..(i + 1) * self.n]
    }

    /// Dirichlet data at every boundary point. Constant data is evaluated
    /// directly; sampled data requires all referenced boundary points to be
    /// grid-aligned (box domains) and indexes the samples by boundary-node
    /// order.
    pub fn boundary_values(&self, boundary: &Boundary) -> Result<Vec<f64>> {
        let count = self.bpoint_node.len();
        match boundary {
            Boundary::Constant(b) => Ok(vec![*b; count]),
            Boundary::Samples(s) => {
                if s.len() != self.boundary_node_count {
                    return Err(Error::InvalidSpec(format!(
                        "expected {} boundary samples, got {}",
                        self.boundary_node_count,
                        s.len()
                    )));
                }
                let mut out = Vec::with_capacity(count);
                for &node in &self.bpoint_node {
                    if node < 0 {
                        return Err(Error::InvalidSpec(
                            "sampled boundary data requires grid-aligned boundary points".into(),
                        ));
                    }
                    let pos = self.boundary_sample_index[&(node as usize)];
                    out.push(s[pos]);
                }
                Ok(out)
            }
        }
    }

    /// out = (-Δ_h u) + shift ∘ u on interior unknowns, boundary data taken
    /// as zero.
    pub(crate) fn matvec(&self, u: &[f64], shift: Option<&[f64]>, out: &mut [f64]) {
        let arms = 2 * self.n;
        for q in 0..u.len() {
            let mut acc = self.diag[q] * u[q];
            if let Some(d) = shift {
                acc += d[q] * u[q];
            }
            for k in 0..arms {
                let arm = q * arms + k;
                let t = self.arm_target[arm];
                if t >= 0 {
                    acc -= self.arm_coef[arm] * u[t as usize];
                }
            }
            out[q] = acc;
        }
    }

    /// out = (-Δ_h)ᵀ u + shift ∘ u (transpose differs from `matvec` only on
    /// cut arms).
    pub(crate) fn matvec_transpose(&self, u: &[f64], shift: Option<&[f64]>, out: &mut [f64]) {
        let arms = 2 * self.n;
        for q in 0..u.len() {
            out[q] = self.diag[q] * u[q];
            if let Some(d) = shift {
                out[q] += d[q] * u[q];
            }
        }
        for q in 0..u.len() {
            for k in 0..arms {
                let arm = q * arms + k;
                let t = self.arm_target[arm];
                if t >= 0 {
                    out[t as usize] -= self.arm_coef[arm] * u[q];
                }
            }
        }
    }

    pub(crate) fn diagonal(&self, shift: Option<&[f64]>) -> Vec<f64> {
        match shift {
            None => self.diag.clone(),
            Some(d) => self.diag.iter().zip(d).map(|(&a, &b)| a + b).collect(),
        }
    }

    /// Contribution of the Dirichlet data to the right-hand side of
    /// (-Δ_h) u = rhs.
    pub(crate) fn boundary_rhs(&self, bvals: &[f64]) -> Vec<f64> {
        let arms = 2 * self.n;
        let mut out = vec![0.0; self.interior.len()];
        for q in 0..self.interior.len() {
            for k in 0..arms {
                let arm = q * arms + k;
                let t = self.arm_target[arm];
                if t < 0 {
                    out[q] += self.arm_coef[arm] * bvals[(-t - 1) as usize];
                }
            }
        }
        out
    }

    /// Residual of Δ_h u = f(u) at interior unknowns (inf norm), including
    /// the boundary data.
    pub(crate) fn pde_residual_inf(
        &self,
        u: &[f64],
        bvals: &[f64],
        source: &crate::core_model::Source,
    ) -> Result<f64> {
        let mut au = vec![0.0; u.len()];
        self.matvec(u, None, &mut au);
        let brhs = self.boundary_rhs(bvals);
        let mut worst: f64 = 0.0;
        for q in 0..u.len() {
            // Δu = -(Au - brhs); residual = Δu - f(u)
            let lap = brhs[q] - au[q];
            worst = worst.max((lap - source.eval(u[q])?).abs());
        }
        Ok(worst)
    }

    /// Assemble a full grid field from interior unknowns and boundary data.
    /// Boundary-mask nodes carry the Dirichlet data (the exact sample for
    /// grid-aligned nodes, the constant for curved boundaries); exterior
    /// nodes are zero.
    pub fn to_field(&self, u: &[f64], boundary: &Boundary) -> Result<GridField> {
        let mut values = vec![0.0; self.grid_len()];
        for (q, &flat) in self.interior.iter().enumerate() {
            values[flat] = u[q];
        }
        for (flat, m) in self.mask.iter().enumerate() {
            if *m == Mask::Boundary {
                values[flat] = match boundary {
                    Boundary::Constant(b) => *b,
                    Boundary::Samples(s) => s[self.boundary_sample_index[&flat]],
                };
            }
        }
        Ok(GridField {
            dims: self.dims.clone(),
            h: self.h,
            origin: self.origin.clone(),
            values,
            mask: self.mask.clone(),
        })
    }

    /// Interior values of a grid field in unknown order.
    pub fn restrict(&self, field: &GridField) -> Result<Vec<f64>> {
        if field.dims != self.dims {
            return Err(Error::InvalidSpec("field dims do not match the domain grid".into()));
        }
        Ok(self.interior.iter().map(|&flat| field.values[flat]).collect())
    }
}

fn domain_inside(domain: &Domain, x: &[f64]) -> bool {
    match domain {
        Domain::Ball { radius } => {
            let r2: f64 = x.iter().map(|&v| v * v).sum();
            r2 < radius * radius * (1.0 - 1e-12)
        }
        Domain::Annulus { inner, outer } => {
            let r2: f64 = x.iter().map(|&v| v * v).sum();
            r2 > inner * inner * (1.0 + 1e-12) && r2 < outer * outer * (1.0 - 1e-12)
        }
        Domain::Box { corner, lengths } => x.iter().enumerate().all(|(a, &v)| {
            v > corner[a] + 1e-12 * lengths[a] && v < corner[a] + lengths[a] * (1.0 - 1e-12)
        }),
    }
}

/// Fraction t ∈ (0, 1] where the segment x + t·step·e_axis leaves the
/// domain, by bisection on the inside indicator.
fn bisect_crossing(x: &[f64], axis: usize, step: f64, inside: &dyn Fn(&[f64]) -> bool) -> f64 {
    let mut probe = x.to_vec();
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        probe[axis] = x[axis] + mid * step;
        if inside(&probe) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for a in (0..dims.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * dims[a + 1];
    }
    s
}

fn multi_of(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0usize; dims.len()];
    for a in (0..dims.len()).rev() {
        idx[a] = flat % dims[a];
        flat /= dims[a];
    }
    idx
}

/// Standard second-order Laplacian of a masked field at interior nodes
/// (zero elsewhere). Every interior stencil must stay on interior or
/// boundary nodes.
pub fn discrete_laplacian(field: &GridField) -> Result<GridField> {
    laplacian_masked(field, true).map(|(out, _)| out)
}

/// Lenient variant: interior nodes whose stencil touches an exterior node
/// are skipped (listed in the second return) instead of failing.
pub fn discrete_laplacian_partial(field: &GridField) -> Result<(GridField, Vec<usize>)> {
    laplacian_masked(field, false)
}

fn laplacian_masked(field: &GridField, strict: bool) -> Result<(GridField, Vec<usize>)> {
    let dims = &field.dims;
    let strides = strides_of(dims);
    let h2 = field.h * field.h;
    let mut out = field.clone();
    out.values.iter_mut().for_each(|v| *v = 0.0);
    let mut violations = Vec::new();
    let mut skipped = Vec::new();
    'node: for flat in 0..field.values.len() {
        if field.mask[flat] != Mask::Interior {
            continue;
        }
        let idx = multi_of(dims, flat);
        let mut acc = 0.0;
        for a in 0..dims.len() {
            for dir in [-1isize, 1] {
                let j = idx[a] as isize + dir;
                let bad = j < 0 || j as usize >= dims[a];
                let nb = if bad { 0 } else { (flat as isize + dir * strides[a] as isize) as usize };
                if bad || field.mask[nb] == Mask::Exterior {
                    if strict {
                        violations.push(flat);
                    } else {
                        skipped.push(flat);
                    }
                    continue 'node;
                }
                acc += field.values[nb] - field.values[flat];
            }
        }
        out.values[flat] = acc / h2;
    }
    if !violations.is_empty() {
        return Err(Error::MaskViolation(violations));
    }
    Ok((out, skipped))
}

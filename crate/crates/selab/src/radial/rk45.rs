//! Adaptive Dormand–Prince 5(4) integrator for small ODE systems.

use crate::{Error, Result};

pub type State = [f64; 2];

pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Force a constant step size (used by convergence-order studies).
    pub fixed_step: Option<f64>,
}

/// Outcome of a guarded integration.
pub enum Stop {
    Reached,
    /// Event callback requested termination at the given abscissa.
    Event(f64),
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate y' = f(x, y) from `x0` to `x_end`, calling `observe(x, y)`
/// exactly at every requested output abscissa (steps are clamped to land on
/// them) and `event(x, y)` after every accepted step; a `true` return from
/// `event` stops the integration.
pub fn integrate<F, O, E>(
    f: F,
    x0: f64,
    y0: State,
    x_end: f64,
    outputs: &[f64],
    ctl: &StepControl,
    mut observe: O,
    mut event: E,
) -> Result<Stop>
where
    F: Fn(f64, &State) -> State,
    O: FnMut(f64, &State),
    E: FnMut(f64, &State) -> bool,
{
    let mut x = x0;
    let mut y = y0;
    let mut out_iter = outputs.iter().copied().filter(|&o| o > x0 + 1e-300).peekable();
    let mut h = ctl
        .fixed_step
        .unwrap_or(((x_end - x0) * 1e-4).max(1e-10));
    let mut steps = 0usize;
    while x < x_end {
        if steps >= ctl.max_steps {
            return Err(Error::BudgetExceeded(format!(
                "integration exceeded {} steps at x = {x}",
                ctl.max_steps
            )));
        }
        steps += 1;
        let mut target = x_end;
        if let Some(&o) = out_iter.peek() {
            target = target.min(o);
        }
        let mut hs = h.min(target - x).max(1e-14);
        let k1 = f(x, &y);
        let (ynew, err_est) = loop {
            let k2 = f(x + A21 * hs, &add(&y, &[(A21 * hs, &k1)]));
            let k3 = f(x + 0.3 * hs, &add(&y, &[(A31 * hs, &k1), (A32 * hs, &k2)]));
            let k4 = f(
                x + 0.8 * hs,
                &add(&y, &[(A41 * hs, &k1), (A42 * hs, &k2), (A43 * hs, &k3)]),
            );
            let k5 = f(
                x + 8.0 / 9.0 * hs,
                &add(
                    &y,
                    &[(A51 * hs, &k1), (A52 * hs, &k2), (A53 * hs, &k3), (A54 * hs, &k4)],
                ),
            );
            let k6 = f(
                x + hs,
                &add(
                    &y,
                    &[
                        (A61 * hs, &k1),
                        (A62 * hs, &k2),
                        (A63 * hs, &k3),
                        (A64 * hs, &k4),
                        (A65 * hs, &k5),
                    ],
                ),
            );
            let ynew = add(
                &y,
                &[(B1 * hs, &k1), (B3 * hs, &k3), (B4 * hs, &k4), (B5 * hs, &k5), (B6 * hs, &k6)],
            );
            let k7 = f(x + hs, &ynew);
            let mut err: f64 = 0.0;
            for i in 0..2 {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let scale = ctl.abs_tol + ctl.rel_tol * y[i].abs().max(ynew[i].abs());
                err = err.max((e / scale).abs());
            }
            if ctl.fixed_step.is_some() || err <= 1.0 {
                break (ynew, err);
            }
            hs *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            if hs < 1e-14 * x.abs().max(1.0) {
                return Err(Error::BudgetExceeded(format!("step size underflow at x = {x}")));
            }
            steps += 1;
            if steps >= ctl.max_steps {
                return Err(Error::BudgetExceeded(format!(
                    "integration exceeded {} steps at x = {x}",
                    ctl.max_steps
                )));
            }
        };
        x += hs;
        y = ynew;
        if ctl.fixed_step.is_none() {
            let grow = if err_est > 0.0 {
                (0.9 * err_est.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (hs * grow).min(x_end - x0);
        }
        if let Some(&o) = out_iter.peek() {
            if (x - o).abs() < 1e-12 * o.abs().max(1.0) {
                observe(o, &y);
                out_iter.next();
            }
        }
        if event(x, &y) {
            return Ok(Stop::Event(x));
        }
    }
    Ok(Stop::Reached)
}

fn add(y: &State, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for &(c, k) in terms {
        out[0] += c * k[0];
        out[1] += c * k[1];
    }
    out
}

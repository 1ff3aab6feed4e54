//! Adaptive Dormand–Prince 5(4) integration of linear complex ODEs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; `None` picks one from the grid spacing.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            max_steps: 10_000_000,
        }
    }
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
// b - b* (embedded fourth-order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine(y: &CVector, h: f64, terms: &[(f64, &CVector)]) -> CVector {
    let mut out = y.clone();
    for (w, k) in terms {
        if *w != 0.0 {
            out.axpy(Complex64::from(h * w), k, Complex64::new(1.0, 0.0));
        }
    }
    out
}

/// Integrates the autonomous system `dy/dt = f(y)` and samples it on `t_grid`.
///
/// `t_grid` must be non-decreasing; the first sample is `y0` itself at
/// `t_grid[0]`. Steps are clipped so that every grid point is hit exactly.
pub fn integrate<F>(mut f: F, y0: CVector, t_grid: &[f64], opts: &OdeOptions) -> Result<Vec<CVector>>
where
    F: FnMut(&CVector) -> CVector,
{
    let Some(&t_first) = t_grid.first() else {
        return Ok(Vec::new());
    };
    if t_grid.windows(2).any(|w| !(w[1] >= w[0])) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid("time grid must be finite and non-decreasing".into()));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0.clone());

    let span = t_grid.last().unwrap() - t_first;
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| (span / 100.0).clamp(1e-6, 0.1));
    let mut t = t_first;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut steps = 0usize;

    for &t_target in &t_grid[1..] {
        let t_start = t;
        while t < t_target {
            let remaining = t_target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    t_start,
                    t_end: t_target,
                    t,
                });
            }

            let k2 = f(&combine(&y, step, &[(A21, &k1)]));
            let k3 = f(&combine(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(&combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&combine(
                &y,
                step,
                &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            ));
            let k6 = f(&combine(
                &y,
                step,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ));
            let y_new = combine(
                &y,
                step,
                &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            );
            let k7 = f(&y_new);
            let err = combine(
                &CVector::zeros(y.len()),
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let scaled = err
                .iter()
                .zip(y.iter().zip(y_new.iter()))
                .map(|(e, (a, b))| e.norm() / (opts.atol + opts.rtol * a.norm().max(b.norm())))
                .fold(0.0, |acc: f64, v| if v.is_nan() { f64::INFINITY } else { acc.max(v) });

            if scaled <= 1.0 {
                t = if last { t_target } else { t + step };
                y = y_new;
                k1 = k7;
            } else if step <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    t_start,
                    t_end: t_target,
                    t,
                });
            }
            let factor = if scaled == 0.0 {
                5.0
            } else {
                (0.9 * scaled.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a clipped final step says nothing about the natural step size
            if !(last && scaled <= 1.0) {
                h = step * factor;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    #[test]
    fn complex_exponential() {
        let rate = c64(-0.3, 2.0);
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.2).collect();
        let ys = integrate(
            |y| y * rate,
            CVector::from_element(1, c64(1.0, 0.0)),
            &grid,
            &OdeOptions::default(),
        )
        .unwrap();
        for (t, y) in grid.iter().zip(&ys) {
            assert!((y[0] - (rate * t).exp()).norm() < 1e-9);
        }
    }

    #[test]
    fn repeated_grid_points() {
        let ys = integrate(
            |y| -y,
            CVector::from_element(1, c64(1.0, 0.0)),
            &[0.0, 1.0, 1.0, 2.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert_eq!(ys[1], ys[2]);
        assert!((ys[3][0].re - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn rejects_decreasing_grid() {
        let r = integrate(
            |y| y.clone(),
            CVector::zeros(1),
            &[0.0, 1.0, 0.5],
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn non_finite_rhs_underflows() {
        let r = integrate(
            |y| y.map(|_| c64(f64::NAN, 0.0)),
            CVector::from_element(1, c64(1.0, 0.0)),
            &[0.0, 0.5, 1.0],
            &OdeOptions::default(),
        );
        assert!(matches!(r, Err(Error::Integration { t_start, t_end, .. }) if t_start == 0.0 && t_end == 0.5));
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let opts = OdeOptions {
            max_steps: 3,
            ..OdeOptions::default()
        };
        let r = integrate(
            |y| y * c64(0.0, 50.0),
            CVector::from_element(1, c64(1.0, 0.0)),
            &[0.0, 10.0],
            &opts,
        );
        assert!(matches!(r, Err(Error::Integration { t_end, .. }) if t_end == 10.0));
    }
}

//! Roots of the depressed cubic `y³ + p·y + q = 0` with complex coefficients.

use num_complex::Complex64;

fn eval(p: Complex64, q: Complex64, y: Complex64) -> Complex64 {
    y * y * y + p * y + q
}

/// Cardano's formula followed by two Newton polishing steps per root.
pub fn solve_depressed(p: Complex64, q: Complex64) -> [Complex64; 3] {
    let zero = Complex64::new(0.0, 0.0);
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    // pick the sign that keeps u³ away from cancellation
    let u3 = {
        let a = -q / 2.0 + disc;
        let b = -q / 2.0 - disc;
        if a.norm() >= b.norm() {
            a
        } else {
            b
        }
    };
    let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut roots = if u3.norm() == 0.0 {
        // p = q = 0: triple root at zero
        [zero; 3]
    } else {
        let u = u3.powf(1.0 / 3.0);
        let mut r = [zero; 3];
        let mut uk = u;
        for root in &mut r {
            *root = uk - p / (3.0 * uk);
            uk *= omega;
        }
        r
    };
    for y in &mut roots {
        for _ in 0..2 {
            let d = 3.0 * *y * *y + p;
            if d.norm() == 0.0 {
                break;
            }
            let step = eval(p, q, *y) / d;
            if step.is_finite() {
                *y -= step;
            }
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, match_multisets};
    use proptest::prelude::*;

    #[test]
    fn known_roots() {
        // (y-1)(y-2)(y+3) = y³ - 7y + 6
        let r = solve_depressed(c64(-7.0, 0.0), c64(6.0, 0.0));
        let (err, _) = match_multisets(&r, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(-3.0, 0.0)]);
        assert!(err < 1e-13);
    }

    #[test]
    fn pure_cube_and_zero() {
        let r = solve_depressed(c64(0.0, 0.0), c64(-8.0, 0.0));
        for y in r {
            assert!((y.norm() - 2.0).abs() < 1e-13);
            assert!((y * y * y - c64(8.0, 0.0)).norm() < 1e-12);
        }
        assert_eq!(solve_depressed(c64(0.0, 0.0), c64(0.0, 0.0)), [c64(0.0, 0.0); 3]);
    }

    proptest! {
        #[test]
        fn roots_from_vieta(
            a in (-3.0f64..3.0, -3.0f64..3.0),
            b in (-3.0f64..3.0, -3.0f64..3.0),
        ) {
            // roots a, b, -(a+b) give a depressed cubic
            let (a, b) = (c64(a.0, a.1), c64(b.0, b.1));
            let c = -(a + b);
            let p = a * b + b * c + c * a;
            let q = -(a * b * c);
            let r = solve_depressed(p, q);
            for y in r {
                let scale = 1.0 + y.norm().powi(3) + p.norm() * y.norm() + q.norm();
                prop_assert!(eval(p, q, y).norm() < 1e-11 * scale);
            }
            let sum = r[0] + r[1] + r[2];
            prop_assert!(sum.norm() < 1e-10 * (1.0 + a.norm() + b.norm()));
        }
    }
}

//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITER: usize = 50;

/// `W0(x)`: the solution `w >= -1` of `w·e^w = x`, for `x >= -1/e`.
///
/// Halley iteration from a branch-point series, `x(1 - x)` near zero, or the
/// asymptotic `ln x - ln ln x` for large arguments. The returned value
/// satisfies `|w·e^w - x| <= 1e-12·max(1, |x|)`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("lambert_w0 of NaN".into()));
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    // distance to the branch point, scaled: 1 + e·x
    let q = E.mul_add(x, 1.0);
    if q < -4.0 * f64::EPSILON {
        return Err(Error::Domain(format!(
            "lambert_w0 undefined below -1/e, got {x}"
        )));
    }
    if q <= 4.0 * f64::EPSILON {
        return Ok(-1.0);
    }

    let mut w = initial_guess(x, q);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            // Halley is singular at -1; nudge back into the branch.
            w = -1.0 + 1e-8;
            continue;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        let next = if next < -1.0 { 0.5 * (w - 1.0) } else { next };
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }

    let residual = (w * w.exp() - x).abs();
    if residual <= 1e-12 * x.abs().max(1.0) {
        Ok(w)
    } else {
        Err(Error::Numerical(format!(
            "lambert_w0({x}) residual {residual:e} after {MAX_ITER} iterations"
        )))
    }
}

fn initial_guess(x: f64, q: f64) -> f64 {
    if q < 0.3 {
        // series in p = sqrt(2(1 + e x)) about the branch point
        let p = (2.0 * q).sqrt();
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))
    } else if x.abs() < 0.25 {
        x * (1.0 - x)
    } else if x < 3.0 {
        // W0 is close to ln(1 + x) / (1 + ...) on this stretch; ln1p is enough to start
        0.75 * x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INV_E: f64 = 1.0 / E;

    fn check(x: f64) {
        let w = lambert_w0(x).unwrap();
        assert!(w >= -1.0);
        let r = (w * w.exp() - x).abs();
        assert!(r <= 1e-12 * x.abs().max(1.0), "x = {x}, w = {w}, residual {r:e}");
    }

    #[test]
    fn exact_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(-INV_E).unwrap() + 1.0).abs() < 1e-10);
        // omega constant
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn below_branch_point_is_domain_error() {
        assert!(matches!(lambert_w0(-0.4), Err(Error::Domain(_))));
        assert!(matches!(lambert_w0(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn residual_on_grid() {
        for i in 0..2000 {
            let t = -9.0 + 21.0 * i as f64 / 1999.0;
            check(-INV_E + 10f64.powf(t));
        }
        for x in [-1e-300, -1e-10, 1e-10, 0.1, 0.2499, 0.25, 2.999, 3.0, 1e6, 1e12, 1e300] {
            check(x);
        }
    }

    #[test]
    fn monotone_and_log_bound() {
        let mut prev = -1.0;
        for i in 1..500 {
            let x = -INV_E + 1e-6 * 1.05f64.powi(i);
            let w = lambert_w0(x).unwrap();
            assert!(w > prev);
            prev = w;
            if x > E {
                assert!(w <= x.ln());
            }
        }
    }
}

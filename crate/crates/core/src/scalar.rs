//! Derivative-free scalar search: golden-section maximization and bisection.
//!
//! Powers span many decades, so both searches have geometric variants that
//! work on `ln x` for strictly positive brackets.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// Stops once the bracket is narrower than `rel_tol·|x|`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let (a, b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    golden(f, a, b, |a, b| {
        b - a <= rel_tol * (0.5 * (a + b)).abs().max(f64::MIN_POSITIVE)
    })
}

/// Golden-section search over `ln x` on a positive bracket.
pub fn golden_section_max_log<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<Maximum>
where
    F: Fn(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad positive bracket [{lo}, {hi}]")));
    }
    // a relative tolerance on x is an absolute one on ln x
    let best = golden(|t| f(t.exp()), lo.ln(), hi.ln(), |a, b| b - a <= rel_tol);
    Ok(Maximum {
        x: best.x.exp(),
        value: best.value,
    })
}

fn golden<F, S>(f: F, lo: f64, hi: f64, done: S) -> Maximum
where
    F: Fn(f64) -> f64,
    S: Fn(f64, f64) -> bool,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // 400 steps shrink any finite bracket below f64 resolution
    for _ in 0..400 {
        if done(a, b) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        Maximum { x: c, value: fc }
    } else {
        Maximum { x: d, value: fd }
    }
}

/// Bisection on `ln x` for a sign change of `f` inside the positive bracket
/// `[lo, hi]`. Stops at relative bracket width `rel_tol`.
pub fn bisect_log<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad positive bracket [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let fa = f(lo);
    let fb = f(hi);
    if fa == 0.0 {
        return Ok(lo);
    }
    if fb == 0.0 {
        return Ok(hi);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo:e}, {hi:e}]: f = ({fa:e}, {fb:e})"
        )));
    }
    let neg_at_a = fa < 0.0;
    for _ in 0..300 {
        if b - a <= rel_tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid.exp());
        if fm == 0.0 {
            return Ok(mid.exp());
        }
        if (fm < 0.0) == neg_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

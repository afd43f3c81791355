//! Principal branch of the Lambert W function on `[0, ∞)`.
//!
//! The seed is `x` below `e` (a short series below `1e-4`) and
//! `ln x - ln ln x` from `e` upward, which already lies inside the bracket
//! `ln x - ln ln x <= W(x) <= ln x - ½ ln ln x`. Halley refinement is done on
//! `w e^w - x` below `e` and on the log form `w + ln w - ln x` above it, so
//! no intermediate overflows for any finite argument.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{domain, Result};

const MAX_ITER: u32 = 50;
const TARGET_RESIDUAL: f64 = 1e-14;
const SERIES_CUTOFF: f64 = 1e-4;

/// One evaluation of `W(x)` together with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WEvaluation {
    pub x: f64,
    pub w: f64,
    /// `|w e^w - x| / max(x, 1)`.
    pub residual: f64,
    pub iterations: u32,
}

/// `W(x)` for `x >= 0`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    lambert_w0_eval(x).map(|e| e.w)
}

/// `W(x)` with residual and iteration count.
pub fn lambert_w0_eval(x: f64) -> Result<WEvaluation> {
    if !x.is_finite() || x < 0.0 {
        return Err(domain(format!("lambert_w0 needs a finite x >= 0, got {x}")));
    }
    Ok(eval_unchecked(x))
}

/// `W(e^u)` computed from `u = ln x` alone; valid for arguments far beyond
/// the range of `f64` (`u` up to `f64::MAX`).
pub fn lambert_w0_of_exp(u: f64) -> f64 {
    if u < 1.0 {
        return eval_unchecked(u.exp()).w;
    }
    halley_log(u).0
}

pub(crate) fn w0(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    eval_unchecked(x).w
}

fn eval_unchecked(x: f64) -> WEvaluation {
    if x == 0.0 {
        return WEvaluation { x, w: 0.0, residual: 0.0, iterations: 0 };
    }
    if x >= E {
        let (w, iterations) = halley_log(x.ln());
        return WEvaluation { x, w, residual: residual(x, w), iterations };
    }
    let mut w = if x < SERIES_CUTOFF { x - x * x + 1.5 * x * x * x } else { x };
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        if f.abs() <= TARGET_RESIDUAL * x.max(1.0) * 0.01 {
            break;
        }
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        iterations += 1;
        if step.abs() <= f64::EPSILON * w.abs() {
            break;
        }
    }
    WEvaluation { x, w, residual: residual(x, w), iterations }
}

/// Halley on `f(w) = w + ln w - ln x`, given `ln x >= 1`.
fn halley_log(ln_x: f64) -> (f64, u32) {
    let mut w = ln_x - ln_x.ln();
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let f = w + w.ln() - ln_x;
        if f == 0.0 {
            break;
        }
        let fp = 1.0 + 1.0 / w;
        let fpp = -1.0 / (w * w);
        let step = (f / fp) / (1.0 - f * fpp / (2.0 * fp * fp));
        w -= step;
        iterations += 1;
        if step.abs() <= 2.0 * f64::EPSILON * w {
            break;
        }
    }
    (w, iterations)
}

fn residual(x: f64, w: f64) -> f64 {
    if x >= E {
        // |w e^w / x - 1| evaluated without forming w e^w
        (w + w.ln() - x.ln()).exp_m1().abs()
    } else {
        (w * w.exp() - x).abs() / x.max(1.0)
    }
}

/// Per-point outcome of the bracket `ln x - ln ln x <= W(x) <= ln x - ½ ln ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct W3Point {
    pub x: f64,
    pub lower: f64,
    pub w: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct W3Report {
    pub points: Vec<W3Point>,
    pub pass: bool,
}

/// Rounding slack for bracket comparisons, relative to `max(1, ln x)`.
const BRACKET_SLACK: f64 = 1e-14;

/// Check the bracket `ln x - ln ln x <= W(x) <= ln x - ½ ln ln x` on `x >= e`.
pub fn check_w3_bounds(x_grid: &[f64]) -> Result<W3Report> {
    let mut points = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if !(x >= E) || !x.is_finite() {
            return Err(domain(format!("bracket check needs x >= e, got {x}")));
        }
        let ln_x = x.ln();
        let ln_ln_x = ln_x.ln();
        let w = w0(x);
        let lower = ln_x - ln_ln_x;
        let upper = ln_x - 0.5 * ln_ln_x;
        let slack = BRACKET_SLACK * ln_x.max(1.0);
        let holds = lower <= w + slack && w <= upper + slack;
        points.push(W3Point { x, lower, w, upper, holds });
    }
    let pass = points.iter().all(|p| p.holds);
    Ok(W3Report { points, pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityPoint {
    pub x: f64,
    /// `|W(x ln x) - ln x|`.
    pub identity_error: f64,
    pub identity_holds: bool,
    /// `W(C x) / W(x)`.
    pub ratio: f64,
    /// Allowed deviation `3 ln max(C, 1/C) / ln x`.
    pub band: f64,
    pub ratio_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub c: f64,
    pub points: Vec<IdentityPoint>,
    pub pass: bool,
}

/// Check `W(x ln x) = ln x` and `W(Cx)/W(x) -> 1` on a grid of `x > 1`.
pub fn check_w_identities(x_grid: &[f64], c: f64) -> Result<IdentityReport> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(domain(format!("scale constant C must be positive, got {c}")));
    }
    let mut points = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        if !(x > 1.0) || !x.is_finite() {
            return Err(domain(format!("identity check needs x > 1, got {x}")));
        }
        let ln_x = x.ln();
        let identity_error = (lambert_w0_of_exp(ln_x + ln_x.ln()) - ln_x).abs();
        let identity_holds = identity_error <= 1e-12 * ln_x.max(1.0);
        let w_x = w0(x);
        let w_cx = lambert_w0_of_exp(ln_x + c.ln());
        let ratio = w_cx / w_x;
        let band = 3.0 * c.max(1.0 / c).ln() / ln_x;
        let ratio_holds = (ratio - 1.0).abs() <= band + 1e-15;
        points.push(IdentityPoint { x, identity_error, identity_holds, ratio, band, ratio_holds });
    }
    let pass = points.iter().all(|p| p.identity_holds && p.ratio_holds);
    Ok(IdentityReport { c, points, pass })
}

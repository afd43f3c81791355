//! Weight functions, `φ_σ`, Young conjugates and the weight-function axioms.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, usage, Error, Result};
use crate::grid::{log_spaced, sup_stability};
use crate::io::write_csv;
use crate::lambertw::{lambert_w0_of_exp, w0};
use crate::quad::integrate;
use crate::sequences::SequenceParams;

/// Right end of the bracket search in the conjugate maximization.
pub const SEARCH_CAP: f64 = 1e30;

/// `φ_σ(t) = t^{σ/(σ-1)} / W(t)^{1/(σ-1)}`, evaluated as `t·e^{W(t)/(σ-1)}`.
pub fn phi_sigma(sigma: f64, t: f64) -> Result<f64> {
    if !(sigma > 1.0 && sigma.is_finite()) {
        return Err(domain(format!("sigma must exceed 1, got {sigma}")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("phi_sigma needs t >= 0, got {t}")));
    }
    Ok(phi_sigma_unchecked(sigma, t))
}

fn phi_sigma_unchecked(sigma: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t * (w0(t) / (sigma - 1.0)).exp()
}

/// Piecewise-linear weight given by samples `(t_i, ω_i)` with `t_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    t: Vec<f64>,
    w: Vec<f64>,
}

impl WeightTable {
    pub fn new(t: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if t.len() != w.len() || t.len() < 2 {
            return Err(usage("weight table needs at least two (t, w) pairs of equal length"));
        }
        if t[0] != 0.0 || w[0] != 0.0 {
            return Err(usage("weight table must start at (0, 0)"));
        }
        if t.windows(2).any(|p| !(p[1] > p[0])) || w.windows(2).any(|p| !(p[1] >= p[0])) {
            return Err(usage("weight table must be increasing in t and nondecreasing in w"));
        }
        Ok(Self { t, w })
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        // beyond the last node, extend the last segment
        let i = match self.t.partition_point(|&x| x <= t) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let slope = (self.w[i + 1] - self.w[i]) / (self.t[i + 1] - self.t[i]);
        self.w[i] + slope * (t - self.t[i])
    }
}

/// Weight functions `ω: ℝ → [0, ∞)`, even in `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFn {
    /// `φ_σ(ln_+ |t|)`.
    PhiSigma { sigma: f64 },
    /// `ln_+^s |t|`.
    BmtLogPower { s: f64 },
    /// `|t| / ln^{s-1}(e + |t|)`.
    BmtQuotient { s: f64 },
    /// `|t|^s`.
    Power { s: f64 },
    /// `ln_+^s |t| / ln^{s-1}(ln(e + |t|))`.
    CorollaryFn { s: f64 },
    /// `W(|t|)`.
    LambertW,
    CustomTable(WeightTable),
}

fn check_exponent(s: f64, min: f64) -> Result<()> {
    if s > min && s.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("exponent must exceed {min}, got {s}")))
    }
}

/// `ln(e + e^u)` without overflow.
fn ln_e_plus_exp(u: f64) -> f64 {
    if u > 1.0 {
        u + (1.0 - u).exp().ln_1p()
    } else {
        1.0 + (u - 1.0).exp().ln_1p()
    }
}

impl WeightFn {
    pub fn phi_sigma(sigma: f64) -> Result<Self> {
        check_exponent(sigma, 1.0)?;
        Ok(Self::PhiSigma { sigma })
    }

    pub fn bmt_log_power(s: f64) -> Result<Self> {
        check_exponent(s, 1.0)?;
        Ok(Self::BmtLogPower { s })
    }

    pub fn bmt_quotient(s: f64) -> Result<Self> {
        check_exponent(s, 1.0)?;
        Ok(Self::BmtQuotient { s })
    }

    /// Any `s > 0` is accepted; only `s <= 1` gives a weight function.
    pub fn power(s: f64) -> Result<Self> {
        check_exponent(s, 0.0)?;
        Ok(Self::Power { s })
    }

    pub fn corollary(s: f64) -> Result<Self> {
        check_exponent(s, 1.0)?;
        Ok(Self::CorollaryFn { s })
    }

    /// `ω(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            Self::Power { s } => t.powf(*s),
            Self::LambertW => w0(t),
            Self::CustomTable(table) => table.eval(t),
            _ if t == 0.0 => 0.0,
            _ => self.eval_log(t.ln()),
        }
    }

    /// `ω(e^u)`, usable far beyond the `f64` range of `e^u`.
    pub fn eval_log(&self, u: f64) -> f64 {
        let lp = u.max(0.0);
        match self {
            Self::PhiSigma { sigma } => phi_sigma_unchecked(*sigma, lp),
            Self::BmtLogPower { s } => lp.powf(*s),
            Self::BmtQuotient { s } => (u - (s - 1.0) * ln_e_plus_exp(u).ln()).exp(),
            Self::Power { s } => (s * u).exp(),
            Self::CorollaryFn { s } => {
                if u <= 0.0 {
                    0.0
                } else {
                    lp.powf(*s) / ln_e_plus_exp(u).ln().powf(s - 1.0)
                }
            }
            Self::LambertW => lambert_w0_of_exp(u),
            Self::CustomTable(table) => table.eval(u.exp()),
        }
    }

    /// `φ(t) = ω(e^t)`.
    pub fn log_composition(&self) -> LogComposition {
        LogComposition { source: self.clone() }
    }
}

/// `φ(t) = ω(e^t)` on `t >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogComposition {
    pub source: WeightFn,
}

impl LogComposition {
    pub fn eval(&self, t: f64) -> f64 {
        self.source.eval_log(t)
    }

    pub fn conjugate(&self, y: f64) -> Result<ConjugatePoint> {
        young_conjugate(&|t| self.eval(t), y)
    }

    pub fn conjugate_table(&self, ys: &[f64]) -> Result<ConjugateTable> {
        ConjugateTable::build(&|t| self.eval(t), ys)
    }
}

/// `φ*(y)` with the maximizing `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePoint {
    pub y: f64,
    pub t_star: f64,
    pub value: f64,
}

/// Maximize a concave `obj` on `[lo, ∞)`: double the bracket until the
/// right end falls below the midpoint, then golden-section.
fn maximize_concave<F: Fn(f64) -> f64>(obj: F, lo: f64) -> Result<(f64, f64)> {
    let obj = |t: f64| {
        let v = obj(t);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut step = lo.max(1.0);
    let mut hi = lo + step;
    while obj(hi) > obj(lo + 0.5 * step) {
        step *= 2.0;
        hi = lo + step;
        if hi > SEARCH_CAP {
            return Err(Error::Divergence { cap: hi });
        }
    }
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    for _ in 0..400 {
        if b - a <= 1e-10 * a.max(1.0) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj(d);
        }
    }
    let (mut t, mut v) = if fc >= fd { (c, fc) } else { (d, fd) };
    let f_lo = obj(lo);
    if f_lo >= v {
        t = lo;
        v = f_lo;
    }
    Ok((t, v))
}

/// `φ*(y) = sup_{t>0} (yt - φ(t))` for convex `φ` with `φ(0) = 0`.
pub fn young_conjugate<F: Fn(f64) -> f64 + ?Sized>(phi: &F, y: f64) -> Result<ConjugatePoint> {
    young_conjugate_from(phi, y, 0.0)
}

/// As [`young_conjugate`], searching only `t >= t_lo`; valid when `t_lo` is an
/// argmax for some smaller `y`.
pub fn young_conjugate_from<F: Fn(f64) -> f64 + ?Sized>(phi: &F, y: f64, t_lo: f64) -> Result<ConjugatePoint> {
    if !(y >= 0.0 && y.is_finite()) {
        return Err(domain(format!("conjugate argument must be finite and >= 0, got {y}")));
    }
    let (t_star, value) = maximize_concave(|t| y * t - phi(t), t_lo.max(0.0))?;
    Ok(ConjugatePoint { y, t_star, value })
}

/// `φ*` on an increasing `y` grid, warm-started from the previous argmax.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateTable {
    pub rows: Vec<ConjugatePoint>,
}

impl ConjugateTable {
    pub fn build<F: Fn(f64) -> f64 + ?Sized>(phi: &F, ys: &[f64]) -> Result<Self> {
        if ys.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(usage("conjugate table needs a nondecreasing y grid"));
        }
        let mut rows = Vec::with_capacity(ys.len());
        let mut t_lo = 0.0;
        for &y in ys {
            let point = young_conjugate_from(phi, y, t_lo)?;
            t_lo = point.t_star;
            rows.push(point);
        }
        Ok(Self { rows })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let rows: Vec<Vec<f64>> = self.rows.iter().map(|r| vec![r.y, r.t_star, r.value]).collect();
        write_csv(out, &["y", "t_star", "phi_star"], &rows)
    }
}

/// `φ**(t) = sup_{y>=0} (ty - φ*(y))`.
pub fn biconjugate<F: Fn(f64) -> f64 + ?Sized>(phi: &F, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(domain(format!("biconjugate needs t >= 0, got {t}")));
    }
    let (_, value) = maximize_concave(
        |y| match young_conjugate(phi, y) {
            Ok(p) => t * y - p.value,
            Err(_) => f64::NEG_INFINITY,
        },
        0.0,
    )?;
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomResult {
    pub holds: bool,
    pub statistic: f64,
}

/// Per-axiom outcome; `statistic` is the sup of `ω(2t)/ω(t)` for (α), the
/// sup of `ω(t)/t` for (β), the top-to-mid ratio of `ln t/ω(t)` maxima for
/// (γ) and the smallest scaled second divided difference for (δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomReport {
    pub alpha: AxiomResult,
    pub beta: AxiomResult,
    pub gamma: AxiomResult,
    pub delta: AxiomResult,
}

impl AxiomReport {
    pub fn all_hold(&self) -> bool {
        self.alpha.holds && self.beta.holds && self.gamma.holds && self.delta.holds
    }
}

/// Convexity slack for (δ), relative to `max(1, |φ|)`.
pub const CONVEXITY_TOL: f64 = 1e-8;

/// Default grid for [`check_weight_axioms`]: 8 points per decade on `[10, 1e200]`.
pub fn axiom_grid() -> Vec<f64> {
    log_spaced(10.0, 1e200, 8).expect("valid grid")
}

/// Test the four axioms on a log-spaced grid of `t > 1`.
///
/// (γ) is read as `ln t = o(ω(t))` and accepted when the largest
/// `ln t/ω(t)` on the top decade is below half the largest on the decade
/// around the log-log midpoint of the grid.
pub fn check_weight_axioms(w: &WeightFn, grid: &[f64]) -> Result<AxiomReport> {
    if grid.len() < 16 || grid.windows(2).any(|p| !(p[1] > p[0])) || !(grid[0] >= std::f64::consts::E) {
        return Err(usage("axiom grid must be increasing, start at t >= e and have at least 16 points"));
    }
    let (t_min, t_max) = (grid[0], grid[grid.len() - 1]);
    if t_max / t_min < 1e8 {
        return Err(usage("axiom grid must span at least 8 decades"));
    }
    let us: Vec<f64> = grid.iter().map(|t| t.ln()).collect();
    let omega: Vec<f64> = us.iter().map(|&u| w.eval_log(u)).collect();
    let top = &grid[grid.len() / 2..];
    let top_omega = &omega[grid.len() / 2..];

    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    let alpha_values: Vec<f64> =
        top.iter().zip(top_omega).map(|(&t, &o)| ratio(w.eval_log(t.ln() + std::f64::consts::LN_2), o)).collect();
    let beta_values: Vec<f64> = top.iter().zip(top_omega).map(|(&t, &o)| ratio(o, t)).collect();
    let stable = |values: &[f64]| {
        let s = sup_stability(top, values);
        AxiomResult { holds: s.stable && s.sup.is_finite(), statistic: s.sup }
    };

    let log_mid = (us[0] * us[us.len() - 1]).sqrt();
    let half_decade = 0.5 * std::f64::consts::LN_10;
    let mut mid_max = f64::NEG_INFINITY;
    let mut top_max = f64::NEG_INFINITY;
    for (i, &u) in us.iter().enumerate() {
        let r = ratio(u, omega[i]);
        if (u - log_mid).abs() <= half_decade {
            mid_max = mid_max.max(r);
        }
        if u >= us[us.len() - 1] - std::f64::consts::LN_10 {
            top_max = top_max.max(r);
        }
    }
    let gamma_stat = top_max / mid_max;
    let gamma = AxiomResult { holds: gamma_stat < 0.5, statistic: gamma_stat };

    let mut min_dd = f64::INFINITY;
    for i in 1..us.len() - 1 {
        let left = (omega[i] - omega[i - 1]) / (us[i] - us[i - 1]);
        let right = (omega[i + 1] - omega[i]) / (us[i + 1] - us[i]);
        let dd = 2.0 * (right - left) / (us[i + 1] - us[i - 1]);
        min_dd = min_dd.min(dd / omega[i].abs().max(1.0));
    }
    let delta = AxiomResult { holds: min_dd >= -CONVEXITY_TOL, statistic: min_dd };

    Ok(AxiomReport { alpha: stable(&alpha_values), beta: stable(&beta_values), gamma, delta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralPoint {
    pub k: f64,
    pub quadrature: f64,
    pub closed_form: f64,
    pub rel_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralReport {
    pub c: f64,
    pub points: Vec<IntegralPoint>,
    pub max_rel_diff: f64,
    pub pass: bool,
}

pub const INTEGRAL_TOL: f64 = 1e-6;

/// Closed form of `C^{-1/τ} ∫_0^{ln k} e^{W(C_{τ,σ} u)/(σ-1)} du` with
/// `C_{τ,σ} = C^{(σ-1)/τ}(σ-1)/τ`.
pub fn integral_closed_form(params: &SequenceParams, c: f64, k: f64) -> f64 {
    let SequenceParams { tau, sigma } = *params;
    let c_ts = c.powf((sigma - 1.0) / tau) * (sigma - 1.0) / tau;
    let s = w0(c_ts * k.ln());
    let a = sigma / (sigma - 1.0);
    tau / sigma * c.powf(-sigma / tau) * ((a * s).exp_m1() * (s + 1.0 / sigma) + s)
}

/// Compare adaptive quadrature with [`integral_closed_form`] at each `k > 1`.
pub fn integral_closed_form_check(params: &SequenceParams, c: f64, k_grid: &[f64]) -> Result<IntegralReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("C must be positive, got {c}")));
    }
    let SequenceParams { tau, sigma } = *params;
    let c_ts = c.powf((sigma - 1.0) / tau) * (sigma - 1.0) / tau;
    let scale = c.powf(-1.0 / tau);
    let mut points = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        if !(k > 1.0) {
            return Err(domain(format!("integral check needs k > 1, got {k}")));
        }
        let q = integrate(|u| (w0(c_ts * u) / (sigma - 1.0)).exp(), 0.0, k.ln(), 1e-12, 0.0)?;
        let quadrature = scale * q.value;
        let closed_form = integral_closed_form(params, c, k);
        let rel_diff = (quadrature - closed_form).abs() / closed_form.abs().max(f64::MIN_POSITIVE);
        points.push(IntegralPoint { k, quadrature, closed_form, rel_diff });
    }
    let max_rel_diff = points.iter().map(|p| p.rel_diff).fold(0.0, f64::max);
    Ok(IntegralReport { c, pass: max_rel_diff <= INTEGRAL_TOL, points, max_rel_diff })
}

//! The associated function `T_{τ,σ,h}(k) = sup_p ln_+(h^{p^σ} k^p / M_p)`
//! by direct maximization and by the counting-function sum.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, usage, Error, Result};
use crate::grid::sup_stability;
use crate::io::write_csv;
use crate::lambertw::w0;
use crate::sequences::SequenceParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssocFnQuery {
    pub params: SequenceParams,
    pub h: f64,
    pub k: f64,
}

impl AssocFnQuery {
    pub fn new(params: SequenceParams, h: f64, k: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(domain(format!("h must be positive, got {h}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(domain(format!("k must be positive, got {k}")));
        }
        Ok(Self { params, h, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Supremum,
    CountingSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssocFnResult {
    pub value: f64,
    pub argmax_p: u64,
    pub method: Method,
}

/// `g(p) = p^σ ln h + p ln k - τ p^σ ln p`, the log of the `p`-th term.
pub fn objective(params: &SequenceParams, ln_h: f64, ln_k: f64, p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    p.powf(params.sigma) * (ln_h - params.tau * p.ln()) + p * ln_k
}

/// Power of two beyond which `g` is strictly decreasing.
pub fn p_cap(params: &SequenceParams, ln_h: f64, ln_k: f64) -> f64 {
    let SequenceParams { tau, sigma } = *params;
    let bound = (ln_h / tau).exp().max((ln_k.max(0.0) / tau).powf(1.0 / (sigma - 1.0))).max(2.0);
    let mut cap = 2.0f64;
    while cap <= bound {
        cap *= 2.0;
    }
    cap
}

/// `g'` as a function of `x = ln p`, and its `x`-derivative.
fn slope(params: &SequenceParams, ln_h: f64, ln_k: f64, x: f64) -> (f64, f64) {
    let SequenceParams { tau, sigma } = *params;
    let e = ((sigma - 1.0) * x).exp();
    let inner = sigma * (ln_h - tau * x) - tau;
    (e * inner + ln_k, e * ((sigma - 1.0) * inner - sigma * tau))
}

/// Root of `g'` in `ln p` on `[x_lo, x_hi]`, given `g'(x_lo) > 0 > g'(x_hi)`
/// with `g'` decreasing in between.
fn stationary_point(params: &SequenceParams, ln_h: f64, ln_k: f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = slope(params, ln_h, ln_k, x);
        if !f.is_finite() {
            return None;
        }
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            return Some(next);
        }
        x = next;
    }
    Some(x)
}

/// Integer ternary search for the max of `g` on `[0, cap]`.
fn ternary_argmax(params: &SequenceParams, ln_h: f64, ln_k: f64, cap: u64) -> u64 {
    let g = |p: u64| objective(params, ln_h, ln_k, p as f64);
    let (mut lo, mut hi) = (1u64, cap);
    while hi - lo > 2 {
        let m1 = lo + (hi - lo) / 3;
        let m2 = hi - (hi - lo) / 3;
        if g(m1) < g(m2) {
            lo = m1 + 1;
        } else {
            hi = m2;
        }
    }
    (lo..=hi).chain([0, 1]).max_by(|&a, &b| g(a).total_cmp(&g(b)).then(b.cmp(&a))).unwrap_or(0)
}

/// `T_{τ,σ,h}` at `e^{ln_k}`, so that `k` beyond the `f64` range can be used.
pub fn assoc_fn_sup_ln(params: &SequenceParams, h: f64, ln_k: f64) -> AssocFnResult {
    let ln_h = h.ln();
    let SequenceParams { tau, sigma } = *params;
    let g = |p: u64| objective(params, ln_h, ln_k, p as f64);
    let mut candidates = vec![0u64, 1];

    // g' peaks at p_u; g is convex below and concave above
    let x_u = ln_h / tau - 1.0 / sigma - 1.0 / (sigma - 1.0);
    let x_lo = x_u.max(0.0);
    let cap = p_cap(params, ln_h, ln_k);
    if slope(params, ln_h, ln_k, x_lo).0 > 0.0 {
        match stationary_point(params, ln_h, ln_k, x_lo, cap.ln()) {
            Some(x) => {
                let p = x.exp();
                let f = p.floor() as u64;
                candidates.extend([f.saturating_sub(1).max(1), f.max(1), f + 1, f + 2]);
            }
            None => candidates.push(ternary_argmax(params, ln_h, ln_k, cap as u64)),
        }
    }
    // ties go to the smaller index
    let mut best = 0u64;
    let mut best_value = 0.0;
    for p in candidates {
        let v = g(p);
        if v > best_value || (v == best_value && p < best) {
            best = p;
            best_value = v;
        }
    }
    AssocFnResult { value: best_value.max(0.0), argmax_p: best, method: Method::Supremum }
}

pub fn assoc_fn_sup(q: &AssocFnQuery) -> AssocFnResult {
    assoc_fn_sup_ln(&q.params, q.h, q.k.ln())
}

/// `T_{τ,σ}(k) = Σ_{p >= 1, m_p <= k} (ln k - log m_p)`, the exact value of
/// `∫_0^k m(λ)/λ dλ` for the step function `m`.
pub fn assoc_fn_counting_ln(params: &SequenceParams, ln_k: f64) -> AssocFnResult {
    let mut value = 0.0;
    let mut p = 0u64;
    loop {
        let q = params.log_quotient_real((p + 1) as f64);
        if q > ln_k {
            break;
        }
        value += ln_k - q;
        p += 1;
    }
    AssocFnResult { value, argmax_p: p, method: Method::CountingSum }
}

pub fn assoc_fn_counting(params: &SequenceParams, k: f64) -> Result<AssocFnResult> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(domain(format!("k must be positive, got {k}")));
    }
    Ok(assoc_fn_counting_ln(params, k.ln()))
}

/// `ℜ(h,k) = h^{-(σ-1)/τ} e^{(σ-1)/σ} (σ-1)/(τσ) ln(e + k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RFactor {
    pub h: f64,
    pub k: f64,
    pub value: f64,
}

impl RFactor {
    pub fn new(params: &SequenceParams, h: f64, k: f64) -> Result<Self> {
        let q = AssocFnQuery::new(*params, h, k)?;
        let SequenceParams { tau, sigma } = *params;
        let value = q.h.powf(-(sigma - 1.0) / tau)
            * ((sigma - 1.0) / sigma).exp()
            * (sigma - 1.0)
            / (tau * sigma)
            * (std::f64::consts::E + q.k).ln();
        Ok(Self { h, k, value })
    }
}

/// `E(k) = W(ℜ(h,k))^{-1/(σ-1)} ln_+^{σ/(σ-1)} k`.
pub fn envelope(params: &SequenceParams, h: f64, k: f64) -> Result<f64> {
    let r = RFactor::new(params, h, k)?;
    let s = params.sigma;
    Ok(w0(r.value).powf(-1.0 / (s - 1.0)) * k.ln().max(0.0).powf(s / (s - 1.0)))
}

/// The counting function `λ ↦ #{p >= 1 : C^{p^{σ-1}} p^{τ p^{σ-1}} <= λ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountingFunction {
    pub params: SequenceParams,
    pub c: f64,
}

impl CountingFunction {
    pub fn new(params: SequenceParams, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(domain(format!("C must be positive, got {c}")));
        }
        Ok(Self { params, c })
    }

    /// `⌊C^{-1/τ} e^{W(C^{(σ-1)/τ} (σ-1)/τ ln λ)/(σ-1)}⌋`.
    pub fn floor(&self, lambda: f64) -> Result<u64> {
        if !(lambda >= 1.0) {
            return Err(domain(format!("counting function needs lambda >= 1, got {lambda}")));
        }
        let SequenceParams { tau, sigma } = self.params;
        let arg = self.c.powf((sigma - 1.0) / tau) * (sigma - 1.0) / tau * lambda.ln();
        let x = self.c.powf(-1.0 / tau) * (w0(arg) / (sigma - 1.0)).exp();
        Ok(x.floor() as u64)
    }

    /// Direct enumeration; the admitted indices form an initial segment.
    pub fn direct(&self, lambda: f64) -> Result<u64> {
        if !(lambda > 0.0) {
            return Err(domain(format!("counting function needs lambda > 0, got {lambda}")));
        }
        let SequenceParams { tau, sigma } = self.params;
        let (ln_c, ln_l) = (self.c.ln(), lambda.ln());
        let mut p = 0u64;
        while {
            let q = (p + 1) as f64;
            q.powf(sigma - 1.0) * (ln_c + tau * q.ln()) <= ln_l
        } {
            p += 1;
            if p > crate::sequences::MAX_INDEX {
                return Err(Error::Range(format!("count exceeds {}", crate::sequences::MAX_INDEX)));
            }
        }
        Ok(p)
    }
}

pub fn counting_fn_floor(params: &SequenceParams, c: f64, lambda: f64) -> Result<u64> {
    CountingFunction::new(*params, c)?.floor(lambda)
}

/// `m_{τ,σ}(λ) = #{p >= 1 : m_p <= λ}` for the exact quotients.
pub fn counting_fn_exact(params: &SequenceParams, lambda: f64) -> Result<u64> {
    if !(lambda > 0.0) {
        return Err(domain(format!("counting function needs lambda > 0, got {lambda}")));
    }
    Ok(assoc_fn_counting_ln(params, lambda.ln()).argmax_p)
}

/// The shifted counting functions enclosing the exact one:
/// `(C₁ = e^τ, index τσ)` from below and
/// `(C₂ = (e/2^σ)^{τ/2^{σ-1}}, index τσ/2^{σ-1})` from above.
pub fn counting_brackets(params: &SequenceParams) -> Result<(CountingFunction, CountingFunction)> {
    let SequenceParams { tau, sigma } = *params;
    let scale = 2f64.powf(sigma - 1.0);
    let lower = CountingFunction::new(params.with_tau(tau * sigma)?, tau.exp())?;
    let c2 = (std::f64::consts::E / 2f64.powf(sigma)).powf(tau / scale);
    let upper = CountingFunction::new(params.with_tau(tau * sigma / scale)?, c2)?;
    Ok((lower, upper))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    ZeroOffset,
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub fit_method: FitMethod,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    /// Range of `T/E` over the top decade of `k`.
    pub band: [f64; 2],
    pub max_violation: f64,
    pub holds: bool,
}

/// One row per `k`: `(k, T_sup, T_counting, E, T_sup/E)`; `T_counting` is
/// NaN unless `h = 1`.
pub fn sandwich_rows(params: &SequenceParams, h: f64, k_grid: &[f64]) -> Result<Vec<[f64; 5]>> {
    k_grid
        .iter()
        .map(|&k| {
            let q = AssocFnQuery::new(*params, h, k)?;
            let t = assoc_fn_sup(&q).value;
            let tc = if h == 1.0 { assoc_fn_counting_ln(params, k.ln()).value } else { f64::NAN };
            let e = envelope(params, h, k)?;
            Ok([k, t, tc, e, t / e])
        })
        .collect()
}

pub fn write_sandwich_csv<W: Write>(out: W, rows: &[[f64; 5]]) -> Result<()> {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    write_csv(out, &["k", "T_sup", "T_counting", "E", "ratio"], &rows)
}

/// Fit `A₁E + B₁ <= T <= A₂E + B₂` on the grid.
///
/// Offsets are zero when `T/E` is bounded away from 0 on the whole grid;
/// otherwise the common slope comes from a least-squares line through
/// `(E, T)` and the offsets are the extremal residuals.
pub fn sandwich_bounds_check(params: &SequenceParams, h: f64, k_grid: &[f64]) -> Result<SandwichReport> {
    if k_grid.len() < 8 || k_grid.windows(2).any(|w| !(w[1] > w[0])) || !(k_grid[0] >= std::f64::consts::E) {
        return Err(usage("sandwich grid must be increasing, start at k >= e and have at least 8 points"));
    }
    let k_max = k_grid[k_grid.len() - 1];
    if k_max.ln() - k_grid[0].ln() < 6.0 * std::f64::consts::LN_10 {
        return Err(usage("sandwich grid must span at least 6 decades"));
    }
    let rows = sandwich_rows(params, h, k_grid)?;
    let ratios: Vec<f64> = rows.iter().map(|r| r[4]).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let (fit_method, a1, b1, a2, b2) = if min_ratio > 0.0 && max_ratio.is_finite() {
        (FitMethod::ZeroOffset, min_ratio, 0.0, max_ratio, 0.0)
    } else {
        let n = rows.len() as f64;
        let (se, st) = rows.iter().fold((0.0, 0.0), |(a, b), r| (a + r[3], b + r[1]));
        let (me, mt) = (se / n, st / n);
        let (sxy, sxx) = rows.iter().fold((0.0, 0.0), |(a, b), r| (a + (r[3] - me) * (r[1] - mt), b + (r[3] - me).powi(2)));
        let slope = sxy / sxx;
        let resid = rows.iter().map(|r| r[1] - slope * r[3]);
        let b1 = resid.clone().fold(f64::INFINITY, f64::min);
        let b2 = resid.fold(f64::NEG_INFINITY, f64::max);
        (FitMethod::LeastSquares, slope, b1, slope, b2)
    };
    let mut max_violation: f64 = 0.0;
    for r in &rows {
        let slack = 1e-9 * r[1].abs().max(1.0);
        max_violation = max_violation.max((a1 * r[3] + b1 - r[1]) / slack).max((r[1] - a2 * r[3] - b2) / slack);
    }
    let top: Vec<f64> = rows.iter().filter(|r| r[0] >= k_max / 10.0).map(|r| r[4]).collect();
    let band = [
        top.iter().copied().fold(f64::INFINITY, f64::min),
        top.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    ];
    let holds = band[0] > 0.0 && band[1].is_finite() && max_violation <= 1.0 && a1.is_finite() && a2.is_finite();
    Ok(SandwichReport { fit_method, a1, b1, a2, b2, band, max_violation, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HShiftReport {
    /// `min (T_{τ,σ,h} - T_{τ₂,σ})` over the grid.
    pub a: f64,
    /// `max (T_{τ,σ,h} - T_{τ₁,σ})` over the grid.
    pub b: f64,
    pub a_stable: bool,
    pub b_stable: bool,
    pub holds: bool,
}

/// Grid of `ln k` for [`h_shift_check`] with `τ₁ = τ/2`, `τ₂ = 2τ`: it runs
/// three decades past `log m_{p_c}`, where `p_c` is the index at which the
/// `h^{p^σ}` factor stops outweighing the change of `τ`.
pub fn h_shift_grid(params: &SequenceParams, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(domain(format!("h must be positive, got {h}")));
    }
    let ln_h = h.ln();
    let ln_pc = (2.0 * ln_h / params.tau).max(-ln_h / params.tau).max(0.0);
    let l_c = params.log_quotient_real(ln_pc.exp().max(2.0));
    crate::grid::log_spaced(1.0, 1000.0 * l_c.max(100.0), 16)
}

/// `T_{τ₂,σ}(k) + A <= T_{τ,σ,h}(k) <= T_{τ₁,σ}(k) + B` for `τ₁ < τ < τ₂`,
/// with `A`, `B` the extremal offsets on a grid of `ln k >= 1`. Both extremes
/// must stabilize along the grid.
pub fn h_shift_check(params: &SequenceParams, h: f64, tau1: f64, tau2: f64, ln_k_grid: &[f64]) -> Result<HShiftReport> {
    if !(tau1 < params.tau && params.tau < tau2) {
        return Err(usage(format!("h-shift needs tau1 < tau < tau2, got {tau1}, {}, {tau2}", params.tau)));
    }
    if ln_k_grid.is_empty() || ln_k_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(usage("h-shift grid needs ln k > 0"));
    }
    let (p1, p2) = (params.with_tau(tau1)?, params.with_tau(tau2)?);
    let mut lower = Vec::with_capacity(ln_k_grid.len());
    let mut upper = Vec::with_capacity(ln_k_grid.len());
    for &l in ln_k_grid {
        let t = assoc_fn_sup_ln(params, h, l).value;
        lower.push(assoc_fn_sup_ln(&p2, 1.0, l).value - t);
        upper.push(t - assoc_fn_sup_ln(&p1, 1.0, l).value);
    }
    let a = sup_stability(ln_k_grid, &lower);
    let b = sup_stability(ln_k_grid, &upper);
    Ok(HShiftReport {
        a: -a.sup,
        b: b.sup,
        a_stable: a.stable,
        b_stable: b.stable,
        holds: a.stable && b.stable,
    })
}

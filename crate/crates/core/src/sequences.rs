//! Weight sequences in log space and checkers for the sequence conditions.
//!
//! `M_p` itself is never formed: `p^{τ p^σ}` leaves the `f64` range around
//! `p = 15` already for `τ = 1, σ = 2`.

use serde::{Deserialize, Serialize};

use crate::conjugate::WeightFn;
use crate::error::{domain, usage, Error, Result};
use crate::grid::{growth_witness, p_grid, sup_stability};

/// Largest index admitted for the extended Gevrey evaluator.
pub const MAX_INDEX: u64 = 1_000_000_000;

/// Above this bound the exhaustive checks switch to the log-spaced index grid.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;

/// The pair `(τ, σ)` of an extended Gevrey sequence `M_p = p^{τ p^σ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceParams {
    pub tau: f64,
    pub sigma: f64,
}

impl SequenceParams {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(domain(format!("tau must be positive, got {tau}")));
        }
        if !(sigma > 1.0 && sigma.is_finite()) {
            return Err(domain(format!("sigma must exceed 1, got {sigma}")));
        }
        Ok(Self { tau, sigma })
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(tau, self.sigma)
    }

    /// `τ p^σ ln p` for real `p >= 1`.
    pub fn log_weight_real(&self, p: f64) -> f64 {
        if p <= 1.0 {
            return 0.0;
        }
        self.tau * p.powf(self.sigma) * p.ln()
    }

    /// `log m_p = τ (p^σ ln p - (p-1)^σ ln(p-1))` without cancellation.
    pub fn log_quotient_real(&self, p: f64) -> f64 {
        if p <= 1.0 {
            return 0.0;
        }
        // with a = ln(1 - 1/p): (p-1)^σ = p^σ e^{σa}, ln(p-1) = ln p + a
        let a = (-1.0 / p).ln_1p();
        let sa = self.sigma * a;
        self.tau * p.powf(self.sigma) * (-p.ln() * sa.exp_m1() - sa.exp() * a)
    }
}

/// A sequence `p ↦ log M_p` with `M_0 = 1`.
pub trait LogSequence {
    fn log_weight(&self, p: u64) -> Result<f64>;

    /// `log m_p = log M_p - log M_{p-1}` for `p >= 1`.
    fn log_quotient(&self, p: u64) -> Result<f64> {
        if p == 0 {
            return Err(Error::Range("quotient index must be at least 1".into()));
        }
        Ok(self.log_weight(p)? - self.log_weight(p - 1)?)
    }

    /// Exponent `σ` of the `h^{p^σ}` factor in the tilde conditions, when defined.
    fn sigma(&self) -> Option<f64> {
        None
    }

    /// Parameters when the sequence is an extended Gevrey sequence.
    fn params(&self) -> Option<SequenceParams> {
        None
    }

    fn describe(&self) -> String;
}

/// The concrete sequence families.
#[derive(Debug, Clone, PartialEq)]
pub enum LogWeightSequence {
    /// `M_p = p^{τ p^σ}`.
    ExtendedGevrey(SequenceParams),
    /// `M_p = p!^t`.
    Gevrey { t: f64 },
    /// `M_p = exp(φ*(H p) / H)` with `φ(t) = ω(e^t)`.
    ConjugateGenerated { weight: WeightFn, h: f64 },
}

impl LogWeightSequence {
    pub fn extended(tau: f64, sigma: f64) -> Result<Self> {
        Ok(Self::ExtendedGevrey(SequenceParams::new(tau, sigma)?))
    }

    pub fn gevrey(t: f64) -> Result<Self> {
        if !(t > 1.0 && t.is_finite()) {
            return Err(domain(format!("Gevrey index must exceed 1, got {t}")));
        }
        Ok(Self::Gevrey { t })
    }

    pub fn conjugate_generated(weight: WeightFn, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(domain(format!("matrix parameter H must be positive, got {h}")));
        }
        Ok(Self::ConjugateGenerated { weight, h })
    }
}

impl LogSequence for LogWeightSequence {
    fn log_weight(&self, p: u64) -> Result<f64> {
        match self {
            Self::ExtendedGevrey(params) => {
                if p > MAX_INDEX {
                    return Err(Error::Range(format!("index {p} exceeds {MAX_INDEX}")));
                }
                Ok(params.log_weight_real(p as f64))
            }
            Self::Gevrey { t } => Ok(t * ln_factorial(p)),
            Self::ConjugateGenerated { weight, h } => {
                let phi = weight.log_composition();
                Ok(phi.conjugate(h * p as f64)?.value / h)
            }
        }
    }

    fn log_quotient(&self, p: u64) -> Result<f64> {
        if p == 0 {
            return Err(Error::Range("quotient index must be at least 1".into()));
        }
        match self {
            Self::ExtendedGevrey(params) => {
                if p > MAX_INDEX {
                    return Err(Error::Range(format!("index {p} exceeds {MAX_INDEX}")));
                }
                Ok(params.log_quotient_real(p as f64))
            }
            Self::Gevrey { t } => Ok(t * (p as f64).ln()),
            Self::ConjugateGenerated { .. } => Ok(self.log_weight(p)? - self.log_weight(p - 1)?),
        }
    }

    fn sigma(&self) -> Option<f64> {
        match self {
            Self::ExtendedGevrey(params) => Some(params.sigma),
            Self::Gevrey { .. } => Some(1.0),
            Self::ConjugateGenerated { .. } => None,
        }
    }

    fn params(&self) -> Option<SequenceParams> {
        match self {
            Self::ExtendedGevrey(params) => Some(*params),
            _ => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::ExtendedGevrey(p) => format!("extended_gevrey(tau={}, sigma={})", p.tau, p.sigma),
            Self::Gevrey { t } => format!("gevrey(t={t})"),
            Self::ConjugateGenerated { weight, h } => format!("conjugate_generated({weight:?}, H={h})"),
        }
    }
}

/// `ln p!`: exact summation below 32, Stirling series above.
pub fn ln_factorial(p: u64) -> f64 {
    if p < 32 {
        return (2..=p).map(|k| (k as f64).ln()).sum();
    }
    let x = p as f64;
    let x2 = x * x;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
        + (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x
}

pub fn log_weight(seq: &dyn LogSequence, p: u64) -> Result<f64> {
    seq.log_weight(p)
}

pub fn log_quotient(seq: &dyn LogSequence, p: u64) -> Result<f64> {
    seq.log_quotient(p)
}

/// Sequence conditions accepted by [`check_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum Condition {
    /// `M_p² <= M_{p-1} M_{p+1}`.
    M1,
    /// `M_{p+1} <= C^{p^σ} M_p`.
    M2Prime,
    /// `M_{p+q} <= C^{p^σ+q^σ} M_p^{2^{σ-1}τ,σ} M_q^{2^{σ-1}τ,σ}`.
    M2Tilde,
    /// `Σ M_{p-1}/M_p < ∞`.
    M3Prime,
    /// `M^{τ₁,σ}_p <= C h^{p^σ} M^{τ₂,σ}_p` for `τ₁ < τ₂` at the given `h`.
    M4Tilde { lhs: SequenceParams, rhs: SequenceParams, h: f64 },
    /// `h^{p^σ} M_p >= C`.
    M4TildePrime { h: f64 },
    /// `M^{τ₁,σ₁}_p <= C h^{p^{σ₂}} M^{τ₂,σ₂}_p` for `σ₁ < σ₂` at the given `h`.
    M5Tilde { lhs: SequenceParams, rhs: SequenceParams, h: f64 },
    /// `M_p >= C p^p`.
    M0,
    /// Classical `M_{p+q} <= C^{p+q} M_p M_q`.
    M2Classical,
}

impl Condition {
    pub fn id(&self) -> &'static str {
        match self {
            Self::M1 => "m1",
            Self::M2Prime => "m2-prime",
            Self::M2Tilde => "m2-tilde",
            Self::M3Prime => "m3-prime",
            Self::M4Tilde { .. } => "m4-tilde",
            Self::M4TildePrime { .. } => "m4-tilde-prime",
            Self::M5Tilde { .. } => "m5-tilde",
            Self::M0 => "m0",
            Self::M2Classical => "m2-classical",
        }
    }

    /// Parse a payload-free identifier.
    pub fn from_id(id: &str) -> Result<Self> {
        Ok(match id {
            "m1" => Self::M1,
            "m2-prime" => Self::M2Prime,
            "m2-tilde" => Self::M2Tilde,
            "m3-prime" => Self::M3Prime,
            "m0" => Self::M0,
            "m2-classical" => Self::M2Classical,
            "m4-tilde" | "m4-tilde-prime" | "m5-tilde" => {
                return Err(usage(format!("condition {id} needs a parameter payload")))
            }
            other => return Err(usage(format!("unknown condition identifier {other:?}"))),
        })
    }
}

/// Result of one condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: String,
    pub p_range: [u64; 2],
    pub holds: bool,
    pub fitted_constant: Option<f64>,
    pub witness: Option<u64>,
}

fn index_set(p_max: u64) -> Vec<u64> {
    if p_max <= EXHAUSTIVE_LIMIT {
        (0..=p_max).collect()
    } else {
        std::iter::once(0).chain(p_grid(p_max)).collect()
    }
}

fn sigma_of(seq: &dyn LogSequence, cond: &Condition) -> Result<f64> {
    seq.sigma()
        .ok_or_else(|| usage(format!("{} needs a sequence with a sigma exponent", cond.id())))
}

/// Check one condition on `[0, p_max]`.
///
/// Inequalities of the form "there exists C" are reduced to a sequence of
/// required `log C` values whose sup must be finite and stabilized (see
/// [`sup_stability`]); `fitted_constant` is that sup. `M4Tilde` and `M5Tilde`
/// take both sequences from their payload and ignore `seq`.
pub fn check_condition(seq: &dyn LogSequence, cond: &Condition, p_max: u64) -> Result<ConditionReport> {
    if p_max < 3 {
        return Err(usage(format!("p_max must be at least 3, got {p_max}")));
    }
    let report = |holds, fitted_constant, witness| ConditionReport {
        condition: cond.id().to_string(),
        p_range: [0, p_max],
        holds,
        fitted_constant,
        witness,
    };
    match *cond {
        Condition::M1 => {
            let ps: Vec<u64> = index_set(p_max - 1).into_iter().filter(|&p| p >= 1).collect();
            let mut min_gap = f64::INFINITY;
            let mut witness = None;
            for p in ps {
                let here = seq.log_quotient(p)?;
                let gap = seq.log_quotient(p + 1)? - here;
                min_gap = min_gap.min(gap);
                if witness.is_none() && !(gap >= -1e-9 * here.abs().max(1.0)) {
                    witness = Some(p);
                }
            }
            Ok(report(witness.is_none(), Some(min_gap), witness))
        }
        Condition::M3Prime => {
            let mut partial = 0.0;
            let mut prev = 0.0;
            let mut last = 0.0;
            for p in 1..=p_max {
                prev = last;
                last = seq.log_quotient(p)?;
                partial += (-last).exp();
            }
            // geometric tail from the last term ratio
            let rho = (prev - last).exp();
            let holds = if rho < 1.0 {
                let log_tail = -last + (rho / (1.0 - rho)).ln();
                log_tail < (1e-15 * partial).ln()
            } else {
                false
            };
            Ok(report(holds, Some(partial), (!holds).then_some(p_max)))
        }
        Condition::M2Tilde => {
            let params = seq
                .params()
                .ok_or_else(|| usage("m2-tilde needs an extended Gevrey sequence"))?;
            let wide = LogWeightSequence::ExtendedGevrey(params.with_tau(2f64.powf(params.sigma - 1.0) * params.tau)?);
            let sigma = params.sigma;
            pair_sup(cond, p_max, seq, &wide, |n, q| n.powf(sigma) + q.powf(sigma))
        }
        Condition::M2Classical => pair_sup(cond, p_max, seq, seq, |n, q| n + q),
        _ => {
            let ps = index_set(p_max);
            let term = required_log_c(seq, cond)?;
            let mut xs = Vec::with_capacity(ps.len());
            let mut values = Vec::with_capacity(ps.len());
            for &p in &ps {
                xs.push(p as f64);
                values.push(term(p)?);
            }
            Ok(sup_report(cond, p_max, &xs, &values, |i| ps[i]))
        }
    }
}

/// `sup_{q <= n} (log M_{n+q} - log N_n - log N_q) / scale(n, q)` per grid `n`,
/// then the sup-stabilization test over `n`.
fn pair_sup(
    cond: &Condition,
    p_max: u64,
    seq: &dyn LogSequence,
    rhs: &dyn LogSequence,
    scale: impl Fn(f64, f64) -> f64,
) -> Result<ConditionReport> {
    let grid: Vec<u64> = std::iter::once(0).chain(p_grid(p_max)).collect();
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for &n in grid.iter().skip(1) {
        let rhs_n = rhs.log_weight(n)?;
        let mut best = f64::NEG_INFINITY;
        for &q in grid.iter().take_while(|&&q| q <= n) {
            let excess = seq.log_weight(n + q)? - rhs_n - rhs.log_weight(q)?;
            best = best.max(excess / scale(n as f64, q as f64));
        }
        xs.push(n as f64);
        values.push(best);
    }
    Ok(sup_report(cond, p_max, &xs, &values, |i| grid[i + 1]))
}

type Term<'a> = Box<dyn Fn(u64) -> Result<f64> + 'a>;

/// The per-index lower bound on `log C` for the single-sup conditions.
fn required_log_c<'a>(seq: &'a dyn LogSequence, cond: &Condition) -> Result<Term<'a>> {
    Ok(match *cond {
        Condition::M2Prime => {
            let sigma = sigma_of(seq, cond)?;
            // p = 0 reads M_1 <= M_0, a hard requirement rather than a constant
            Box::new(move |p| {
                let q = seq.log_quotient(p + 1)?;
                Ok(if p == 0 { if q > 1e-12 { f64::INFINITY } else { 0.0 } } else { q / (p as f64).powf(sigma) })
            })
        }
        Condition::M4Tilde { lhs, rhs, h } => {
            if lhs.sigma != rhs.sigma || !(lhs.tau < rhs.tau) || !(h > 0.0) {
                return Err(usage("m4-tilde needs equal sigma, tau1 < tau2 and h > 0"));
            }
            Box::new(move |p| {
                let pf = p as f64;
                Ok(lhs.log_weight_real(pf) - rhs.log_weight_real(pf) - pf.powf(lhs.sigma) * h.ln())
            })
        }
        Condition::M5Tilde { lhs, rhs, h } => {
            if !(lhs.sigma < rhs.sigma) || !(h > 0.0) {
                return Err(usage("m5-tilde needs sigma1 < sigma2 and h > 0"));
            }
            Box::new(move |p| {
                let pf = p as f64;
                Ok(lhs.log_weight_real(pf) - rhs.log_weight_real(pf) - pf.powf(rhs.sigma) * h.ln())
            })
        }
        Condition::M4TildePrime { h } => {
            if !(h > 0.0) {
                return Err(usage("m4-tilde-prime needs h > 0"));
            }
            let sigma = sigma_of(seq, cond)?;
            Box::new(move |p| Ok(-((p as f64).powf(sigma) * h.ln() + seq.log_weight(p)?)))
        }
        Condition::M0 => Box::new(move |p| {
            let pf = p as f64;
            let plogp = if p <= 1 { 0.0 } else { pf * pf.ln() };
            Ok(plogp - seq.log_weight(p)?)
        }),
        Condition::M1 | Condition::M3Prime | Condition::M2Tilde | Condition::M2Classical => unreachable!("handled by caller"),
    })
}

fn sup_report(
    cond: &Condition,
    p_max: u64,
    xs: &[f64],
    values: &[f64],
    index_at: impl Fn(usize) -> u64,
) -> ConditionReport {
    let stability = sup_stability(xs, values);
    let holds = stability.stable && stability.sup.is_finite();
    let witness = if holds {
        None
    } else {
        values
            .iter()
            .position(|v| !v.is_finite())
            .or_else(|| growth_witness(xs, values))
            .or(Some(xs.len() - 1))
            .map(&index_at)
    };
    ConditionReport {
        condition: cond.id().to_string(),
        p_range: [0, p_max],
        holds,
        fitted_constant: stability.sup.is_finite().then_some(stability.sup),
        witness,
    }
}

/// `log m_{Qp} - log m_p` on the index grid up to `p_max`.
pub fn liminf_series(seq: &dyn LogSequence, q: u64, p_max: u64) -> Result<Vec<(u64, f64)>> {
    if q < 2 {
        return Err(usage(format!("Q must be at least 2, got {q}")));
    }
    if p_max < 10 {
        return Err(usage(format!("p_max must be at least 10, got {p_max}")));
    }
    p_grid(p_max)
        .into_iter()
        .map(|p| Ok((p, seq.log_quotient(q * p)? - seq.log_quotient(p)?)))
        .collect()
}

/// `liminf m_{Qp}/m_p > 1`, tested as a positive minimum of
/// `log m_{Qp} - log m_p` over the last decade of the index grid.
pub fn check_liminf_condition(seq: &dyn LogSequence, q: u64, p_max: u64) -> Result<ConditionReport> {
    let series = liminf_series(seq, q, p_max)?;
    let tail_start = p_max as f64 / 10.0;
    let tail: Vec<&(u64, f64)> = series.iter().filter(|(p, _)| *p as f64 >= tail_start).collect();
    let min_tail = tail.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let holds = min_tail > 0.0 && min_tail.is_finite();
    let witness = if holds { None } else { tail.iter().find(|(_, r)| !(*r > 0.0)).map(|(p, _)| *p) };
    Ok(ConditionReport {
        condition: format!("liminf-q{q}"),
        p_range: [1, p_max],
        holds,
        fitted_constant: Some(min_tail),
        witness: witness.or((!holds).then_some(p_max)),
    })
}

/// Closed-form bounds on `log m_p` valid for `p >= 2`.
pub fn quotient_bounds(params: &SequenceParams, p: f64) -> (f64, f64) {
    let SequenceParams { tau, sigma } = *params;
    let scale = 2f64.powf(sigma - 1.0);
    let lower = tau * p.powf(sigma - 1.0) / scale * (1.0 + sigma * (p / 2.0).ln());
    let upper = tau * p.powf(sigma - 1.0) * (1.0 + sigma * p.ln());
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientBoundsReport {
    pub p_range: [u64; 2],
    pub pass: bool,
    /// Smallest `log m_p - lower(p)`.
    pub min_lower_slack: f64,
    /// Smallest `upper(p) - log m_p`.
    pub min_upper_slack: f64,
    pub violations: u64,
    pub first_violation: Option<u64>,
}

/// Verify `lower(p) <= log m_p <= upper(p)` for every integer `p` in `[p_lo, p_hi]`.
pub fn lemma_quotient_bounds(params: &SequenceParams, p_lo: u64, p_hi: u64) -> Result<QuotientBoundsReport> {
    if p_lo < 2 {
        return Err(Error::Range(format!("quotient bounds need p >= 2, got {p_lo}")));
    }
    if p_hi < p_lo || p_hi > MAX_INDEX {
        return Err(Error::Range(format!("bad index range [{p_lo}, {p_hi}]")));
    }
    let mut min_lower_slack = f64::INFINITY;
    let mut min_upper_slack = f64::INFINITY;
    let mut violations = 0;
    let mut first_violation = None;
    for p in p_lo..=p_hi {
        let pf = p as f64;
        let value = params.log_quotient_real(pf);
        let (lower, upper) = quotient_bounds(params, pf);
        let lo = value - lower;
        let hi = upper - value;
        min_lower_slack = min_lower_slack.min(lo);
        min_upper_slack = min_upper_slack.min(hi);
        let tol = 1e-12 * value.abs().max(1.0);
        if lo < -tol || hi < -tol {
            violations += 1;
            first_violation.get_or_insert(p);
        }
    }
    Ok(QuotientBoundsReport {
        p_range: [p_lo, p_hi],
        pass: violations == 0,
        min_lower_slack,
        min_upper_slack,
        violations,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    struct Flat;

    impl LogSequence for Flat {
        fn log_weight(&self, _p: u64) -> Result<f64> {
            Ok(0.0)
        }
        fn describe(&self) -> String {
            "flat".into()
        }
    }

    fn eg(tau: f64, sigma: f64) -> LogWeightSequence {
        LogWeightSequence::extended(tau, sigma).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        let s = eg(1.0, 2.0);
        assert_eq!(s.log_weight(0).unwrap(), 0.0);
        assert_eq!(s.log_weight(1).unwrap(), 0.0);
        assert_relative_eq!(s.log_weight(2).unwrap(), 4.0 * LN_2, max_relative = 1e-15);
        assert!(matches!(s.log_weight(MAX_INDEX + 1), Err(Error::Range(_))));
    }

    #[test]
    fn log_quotient_examples() {
        let s = eg(1.0, 2.0);
        assert_eq!(s.log_quotient(1).unwrap(), 0.0);
        assert_relative_eq!(s.log_quotient(2).unwrap(), 4.0 * LN_2, max_relative = 1e-15);
        let s = eg(2.0, 2.0);
        let expected = 18.0 * 3f64.ln() - 8.0 * LN_2;
        assert_relative_eq!(s.log_quotient(3).unwrap(), expected, max_relative = 1e-14);
        assert!(matches!(s.log_quotient(0), Err(Error::Range(_))));
    }

    #[test]
    fn stable_quotient_matches_difference_where_difference_is_exact() {
        for &(tau, sigma) in &[(0.5, 1.5), (1.0, 2.0), (2.0, 3.0)] {
            let params = SequenceParams::new(tau, sigma).unwrap();
            for p in 2..200u64 {
                let diff = params.log_weight_real(p as f64) - params.log_weight_real((p - 1) as f64);
                assert_relative_eq!(params.log_quotient_real(p as f64), diff, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn gevrey_factorial_is_accurate_across_the_switch() {
        let exact: f64 = (2..=40u64).map(|k| (k as f64).ln()).sum();
        assert_relative_eq!(ln_factorial(40), exact, max_relative = 1e-14);
        let s = LogWeightSequence::gevrey(2.0).unwrap();
        assert_relative_eq!(s.log_quotient(33).unwrap(), 2.0 * 33f64.ln(), max_relative = 1e-15);
        assert!(LogWeightSequence::gevrey(1.0).is_err());
    }

    #[test]
    fn m1_holds_for_extended_gevrey() {
        let r = check_condition(&eg(1.0, 2.0), &Condition::M1, 10_000).unwrap();
        assert!(r.holds);
        assert!(r.witness.is_none());
        assert!(r.fitted_constant.unwrap() > 0.0);
    }

    #[test]
    fn m2_prime_constant_matches_closed_form_sup() {
        let s = eg(1.0, 2.0);
        let r = check_condition(&s, &Condition::M2Prime, 10_000).unwrap();
        assert!(r.holds, "{r:?}");
        // brute-force sup of log m_{p+1} / p^σ
        let brute = (1..=10_000u64)
            .map(|p| s.log_quotient(p + 1).unwrap() / (p as f64).powi(2))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(r.fitted_constant.unwrap(), brute);
        // the constant read off e^{τ p^{σ-1}} p^{τσ p^{σ-1}} also bounds it
        let params = s.params().unwrap();
        let remark = (1..=10_000u64)
            .map(|p| quotient_bounds(&params, (p + 1) as f64).1 / (p as f64).powi(2))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(brute <= remark);
    }

    #[test]
    fn classical_m2_fails_with_early_witness() {
        for &(tau, sigma) in &[(0.5, 1.5), (1.0, 2.0), (2.0, 3.0)] {
            let r = check_condition(&eg(tau, sigma), &Condition::M2Classical, 10_000).unwrap();
            assert!(!r.holds, "{tau} {sigma} {r:?}");
            assert!(r.witness.unwrap() <= 100, "{r:?}");
        }
    }

    #[test]
    fn classical_m2_holds_for_gevrey() {
        let r = check_condition(&LogWeightSequence::gevrey(2.0).unwrap(), &Condition::M2Classical, 10_000).unwrap();
        // ln((p+q)!/(p!q!)) <= (p+q) ln 2
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn remaining_conditions_hold() {
        let s = eg(1.0, 2.0);
        let p = s.params().unwrap();
        let conds = [
            Condition::M2Tilde,
            Condition::M3Prime,
            Condition::M4Tilde { lhs: p, rhs: p.with_tau(2.0).unwrap(), h: 0.1 },
            Condition::M4TildePrime { h: 0.1 },
            Condition::M5Tilde { lhs: p, rhs: SequenceParams::new(0.5, 2.5).unwrap(), h: 0.5 },
            Condition::M0,
        ];
        for c in conds {
            let r = check_condition(&s, &c, 10_000).unwrap();
            assert!(r.holds, "{r:?}");
            assert!(r.witness.is_none());
        }
    }

    #[test]
    fn m3_prime_partial_sum_for_tau1_sigma2() {
        let s = eg(1.0, 2.0);
        let r = check_condition(&s, &Condition::M3Prime, 100).unwrap();
        let direct: f64 = (1..=100).map(|p| (-s.log_quotient(p).unwrap()).exp()).sum();
        assert_relative_eq!(r.fitted_constant.unwrap(), direct, max_relative = 1e-15);
        // Σ 1/p^2 converges too slowly for the 1e-15 tail criterion
        let g = check_condition(&LogWeightSequence::gevrey(2.0).unwrap(), &Condition::M3Prime, 1000).unwrap();
        assert!(!g.holds);
        assert_eq!(g.witness, Some(1000));
    }

    #[test]
    fn condition_usage_errors() {
        assert!(matches!(Condition::from_id("m9"), Err(Error::Usage(_))));
        assert!(check_condition(&eg(1.0, 2.0), &Condition::M1, 2).is_err());
        let p = SequenceParams::new(1.0, 2.0).unwrap();
        let bad = Condition::M4Tilde { lhs: p, rhs: p, h: 0.5 };
        assert!(check_condition(&eg(1.0, 2.0), &bad, 100).is_err());
        assert!(check_condition(&Flat, &Condition::M2Prime, 100).is_err());
    }

    #[test]
    fn liminf_examples() {
        let r = check_liminf_condition(&eg(1.0, 2.0), 3, 10_000).unwrap();
        assert!(r.holds);
        let series = liminf_series(&eg(1.0, 2.0), 3, 10_000).unwrap();
        assert!(series.last().unwrap().1 > series[100].1);

        let g = check_liminf_condition(&LogWeightSequence::gevrey(2.0).unwrap(), 2, 10_000).unwrap();
        assert!(g.holds);
        assert_relative_eq!(g.fitted_constant.unwrap(), 2.0 * LN_2, max_relative = 1e-12);

        let f = check_liminf_condition(&Flat, 3, 10_000).unwrap();
        assert!(!f.holds);
        assert!(f.witness.is_some());
        assert!(check_liminf_condition(&Flat, 1, 100).is_err());
    }

    #[test]
    fn quotient_bound_examples() {
        let p = SequenceParams::new(1.0, 2.0).unwrap();
        let (lo, hi) = quotient_bounds(&p, 2.0);
        assert_relative_eq!(lo, 1.0, max_relative = 1e-15);
        assert_relative_eq!(hi, 2.0 * (4.0 * std::f64::consts::E).ln(), max_relative = 1e-15);
        assert!(lemma_quotient_bounds(&p, 2, 100_000).unwrap().pass);
        let p = SequenceParams::new(0.5, 3.0).unwrap();
        assert!(lemma_quotient_bounds(&p, 2, 10_000).unwrap().pass);
        assert!(matches!(lemma_quotient_bounds(&p, 1, 10), Err(Error::Range(_))));
    }
}

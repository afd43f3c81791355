//! Numerical checks that `T_{τ,σ,h}` is equivalent to `φ_σ(ln_+ k)`, that
//! the sequences `p^{τ p^σ}` and `e^{φ_σ*(Hp)/H}` bound each other, and of
//! the corollary weight.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::assocfn::{assoc_fn_sup_ln, h_shift_check};
use crate::conjugate::{axiom_grid, check_weight_axioms, phi_sigma, WeightFn};
use crate::error::{usage, Result};
use crate::grid::{log_spaced, p_grid, sup_stability};
use crate::sequences::{LogSequence, LogWeightSequence, SequenceParams};

/// Relative slack for the fitted two-sided bounds.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub claim: String,
    pub grids: String,
    pub fitted_constants: BTreeMap<String, f64>,
    pub holds: bool,
    pub max_violation: f64,
    pub notes: String,
}

impl EquivalenceReport {
    fn new(claim: &str, grids: String) -> Self {
        Self {
            claim: claim.to_string(),
            grids,
            fitted_constants: BTreeMap::new(),
            holds: true,
            max_violation: 0.0,
            notes: String::new(),
        }
    }

    fn set(&mut self, name: &str, value: f64) {
        self.fitted_constants.insert(name.to_string(), value);
    }

    fn note(&mut self, text: impl AsRef<str>) {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(text.as_ref());
    }
}

fn describe_grid(name: &str, xs: &[f64]) -> String {
    match (xs.first(), xs.last()) {
        (Some(a), Some(b)) => format!("{name}: {} points on [{a:e}, {b:e}]", xs.len()),
        _ => format!("{name}: empty"),
    }
}

/// `B φ_σ(ln k) + B~ <= T_{τ,σ,h}(k) <= A φ_σ(ln k) + A~` fitted on a grid
/// of `ln k >= 1`.
///
/// `A` and `B` are the extremes of `T/φ_σ` over the top decade of `k` (at
/// least four points); the offsets are the extremal residuals over the
/// whole grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiFit {
    pub a: f64,
    pub a_tilde: f64,
    pub b: f64,
    pub b_tilde: f64,
    /// Relative amount by which the fitted bounds miss `T` anywhere on the grid.
    pub max_violation: f64,
}

pub fn fit_phi(params: &SequenceParams, h: f64, ln_k_grid: &[f64]) -> Result<PhiFit> {
    let l_max = ln_k_grid.last().copied().unwrap_or(0.0);
    let top_start = ln_k_grid.iter().position(|&l| l >= l_max - std::f64::consts::LN_10).unwrap_or(0);
    fit_phi_from(params, h, ln_k_grid, top_start)
}

/// As [`fit_phi`], with the slopes taken over `ln_k_grid[top_start..]`
/// (at least the last four points).
pub fn fit_phi_from(params: &SequenceParams, h: f64, ln_k_grid: &[f64], top_start: usize) -> Result<PhiFit> {
    if ln_k_grid.len() < 8 || ln_k_grid.windows(2).any(|w| !(w[1] > w[0])) || !(ln_k_grid[0] >= 1.0) {
        return Err(usage("phi fit needs an increasing grid of at least 8 points with ln k >= 1"));
    }
    let sigma = params.sigma;
    let t: Vec<f64> = ln_k_grid.iter().map(|&l| assoc_fn_sup_ln(params, h, l).value).collect();
    let phi: Vec<f64> = ln_k_grid.iter().map(|&l| phi_sigma(sigma, l)).collect::<Result<_>>()?;
    let top_start = top_start.min(ln_k_grid.len() - 4);
    let ratios = t[top_start..].iter().zip(&phi[top_start..]).map(|(t, p)| t / p);
    let a = ratios.clone().fold(f64::NEG_INFINITY, f64::max);
    let b = ratios.fold(f64::INFINITY, f64::min);
    let upper: Vec<f64> = t.iter().zip(&phi).map(|(t, p)| t - a * p).collect();
    let lower: Vec<f64> = t.iter().zip(&phi).map(|(t, p)| b * p - t).collect();
    let a_tilde = upper.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b_tilde = -lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut max_violation: f64 = 0.0;
    for i in 0..t.len() {
        let scale = t[i].abs().max(1.0);
        max_violation = max_violation
            .max((b * phi[i] + b_tilde - t[i]) / scale)
            .max((t[i] - a * phi[i] - a_tilde) / scale);
    }
    Ok(PhiFit { a, a_tilde, b, b_tilde, max_violation })
}

/// Default grid: `ln k` for `k` log-spaced at 64 points per decade on `[e, 1e12]`.
pub fn default_ln_k_grid() -> Vec<f64> {
    crate::grid::ln_k_grid(std::f64::consts::E, 1e12, 64).expect("valid grid")
}

/// Allowed range of `A(τ)/A(2^{σ-1}τ)`: the expected value 2 within a factor 2.
pub const TAU_SCALING_BAND: [f64; 2] = [1.0, 4.0];

/// Fit the two-sided bound and check the `τ^{-1/(σ-1)}` scaling of the slopes
/// by refitting at `τ' = 2^{σ-1}τ`.
pub fn check_t_phi_equivalence(params: &SequenceParams, h: f64, ln_k_grid: &[f64]) -> Result<EquivalenceReport> {
    let mut report = EquivalenceReport::new("t-phi-equivalence", describe_grid("ln k", ln_k_grid));
    let fit = fit_phi(params, h, ln_k_grid)?;
    let refit_params = params.with_tau(2f64.powf(params.sigma - 1.0) * params.tau)?;
    let refit = fit_phi(&refit_params, h, ln_k_grid)?;
    let scaling = fit.a / refit.a;
    report.set("A", fit.a);
    report.set("A_tilde", fit.a_tilde);
    report.set("B", fit.b);
    report.set("B_tilde", fit.b_tilde);
    report.set("A_refit", refit.a);
    report.set("B_refit", refit.b);
    report.set("tau_refit", refit_params.tau);
    report.set("A_scaling", scaling);
    report.set("B_scaling", fit.b / refit.b);
    report.max_violation = fit.max_violation;
    if !(fit.b > 0.0 && fit.a.is_finite()) {
        report.holds = false;
        report.note("T/phi_sigma is not bounded away from 0 and infinity on the top decade");
    }
    if fit.max_violation > BOUND_SLACK {
        report.holds = false;
        report.note(format!("fitted bounds violated by {:e}", fit.max_violation));
    }
    if !(scaling >= TAU_SCALING_BAND[0] && scaling <= TAU_SCALING_BAND[1]) {
        report.holds = false;
        report.note(format!("A(tau)/A(tau') = {scaling} outside [1, 4]"));
    }
    Ok(report)
}

/// `T_{2τ,σ} + A <= T_{τ,σ,h} <= T_{τ/2,σ} + B` on an extended grid, plus the
/// slopes refitted at `h`.
pub fn check_h_robustness(params: &SequenceParams, h: f64, ln_k_grid: &[f64]) -> Result<EquivalenceReport> {
    let mut report = EquivalenceReport::new("h-robustness", describe_grid("ln k", ln_k_grid));
    let tau = params.tau;
    let shift = h_shift_check(params, h, 0.5 * tau, 2.0 * tau, ln_k_grid)?;
    report.set("offset_A", shift.a);
    report.set("offset_B", shift.b);
    let at_one = fit_phi(params, 1.0, ln_k_grid)?;
    let at_h = fit_phi(params, h, ln_k_grid)?;
    report.set("A_h_over_A_1", at_h.a / at_one.a);
    report.set("B_h_over_B_1", at_h.b / at_one.b);
    report.holds = shift.holds;
    if !shift.a_stable {
        report.note("lower offset did not stabilize");
    }
    if !shift.b_stable {
        report.note("upper offset did not stabilize");
    }
    Ok(report)
}

/// Grid of `ln k` reaching the `t` range used by `φ_σ*(Hp)` for `p <= p_max`:
/// `[1, 10 log m_{p_max+1}]`, 64 points per decade of `ln k`. Slopes are
/// fitted over its upper half.
pub fn norme_fit_grid(params: &SequenceParams, p_max: u64) -> Vec<f64> {
    let top = 10.0 * params.log_quotient_real((p_max + 1) as f64);
    log_spaced(1.0, top.max(100.0), 64).expect("valid grid")
}

/// Slope constants for the `τ ↔ H` correspondence:
/// `H₁(τ) = τ^{1/(σ-1)}/B_σ` and `τ(H) = (2 A_σ H)^{σ-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndexMap {
    pub sigma: f64,
    pub a_sigma: f64,
    pub b_sigma: f64,
}

impl IndexMap {
    /// `A_σ = A (τ/2^{σ-1})^{1/(σ-1)}`, `B_σ = B τ^{1/(σ-1)}` from a fit at `τ`.
    pub fn from_fit(params: &SequenceParams, fit: &PhiFit) -> Self {
        let SequenceParams { tau, sigma } = *params;
        let e = 1.0 / (sigma - 1.0);
        Self {
            sigma,
            a_sigma: fit.a * (tau / 2f64.powf(sigma - 1.0)).powf(e),
            b_sigma: fit.b * tau.powf(e),
        }
    }

    /// Combine fits at several `τ` conservatively: smallest `B_σ`, largest `A_σ`.
    pub fn conservative(maps: &[IndexMap]) -> Result<Self> {
        let first = maps.first().ok_or_else(|| usage("no fits to combine"))?;
        Ok(Self {
            sigma: first.sigma,
            a_sigma: maps.iter().map(|m| m.a_sigma).fold(f64::NEG_INFINITY, f64::max),
            b_sigma: maps.iter().map(|m| m.b_sigma).fold(f64::INFINITY, f64::min),
        })
    }

    /// `H₁ = B_σ^{-1} τ^{1/(σ-1)}`.
    pub fn h1(&self, tau: f64) -> f64 {
        tau.powf(1.0 / (self.sigma - 1.0)) / self.b_sigma
    }

    /// `H₂ = A_σ^{-1} (τ/2^{σ-1})^{1/(σ-1)}`.
    pub fn h2(&self, tau: f64) -> f64 {
        (tau / 2f64.powf(self.sigma - 1.0)).powf(1.0 / (self.sigma - 1.0)) / self.a_sigma
    }

    /// `τ = (2 A_σ H)^{σ-1}`, the inverse of [`IndexMap::h2`].
    pub fn tau_of_h(&self, h: f64) -> f64 {
        (2.0 * self.a_sigma * h).powf(self.sigma - 1.0)
    }
}

/// Slope fit used for the sequence bounds at `τ`, over the upper half of
/// [`norme_fit_grid`].
pub fn norme_fit(params: &SequenceParams, p_max: u64) -> Result<PhiFit> {
    let grid = norme_fit_grid(params, p_max);
    fit_phi_from(params, 1.0, &grid, grid.len() / 2)
}

/// [`IndexMap::conservative`] over norme fits at each `τ`.
pub fn index_map_for(sigma: f64, taus: &[f64], p_max: u64) -> Result<IndexMap> {
    let maps = taus
        .iter()
        .map(|&tau| {
            let params = SequenceParams::new(tau, sigma)?;
            Ok(IndexMap::from_fit(&params, &norme_fit(&params, p_max)?))
        })
        .collect::<Result<Vec<_>>>()?;
    IndexMap::conservative(&maps)
}

/// `log M_p - φ_σ*(Hp)/H` over the index grid.
fn norme_gap(params: &SequenceParams, big_h: f64, ps: &[u64]) -> Result<Vec<f64>> {
    let n = LogWeightSequence::conjugate_generated(WeightFn::phi_sigma(params.sigma)?, big_h)?;
    ps.iter().map(|&p| Ok(params.log_weight_real(p as f64) - n.log_weight(p)?)).collect()
}

/// `C₂ e^{φ*(H₂p)/H₂} <= p^{τ p^σ} <= C₁ e^{φ*(H₁p)/H₁}` on `p in [1, p_max]`,
/// with `H₁ = 1/B` and `H₂ = 1/A` from a fit on [`norme_fit_grid`]. The sup
/// defining `log C₁` and the inf defining `log C₂` must both stabilize.
pub fn check_ocena_norme(sigma: f64, tau: f64, p_max: u64) -> Result<EquivalenceReport> {
    let params = SequenceParams::new(tau, sigma)?;
    if p_max < 10 {
        return Err(usage(format!("p_max must be at least 10, got {p_max}")));
    }
    let grid = norme_fit_grid(&params, p_max);
    let fit = norme_fit(&params, p_max)?;
    let map = IndexMap::from_fit(&params, &fit);
    let (h1, h2) = (map.h1(tau), map.h2(tau));
    let ps = p_grid(p_max);
    let xs: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let upper = norme_gap(&params, h1, &ps)?;
    let lower: Vec<f64> = norme_gap(&params, h2, &ps)?.into_iter().map(|v| -v).collect();
    let s1 = sup_stability(&xs, &upper);
    let s2 = sup_stability(&xs, &lower);

    let mut report = EquivalenceReport::new(
        "ocena-norme",
        format!("{}; p: {} points on [1, {p_max}]", describe_grid("fit ln k", &grid), ps.len()),
    );
    report.set("A_fit", fit.a);
    report.set("B_fit", fit.b);
    report.set("A_sigma", map.a_sigma);
    report.set("B_sigma", map.b_sigma);
    report.set("H1", h1);
    report.set("H2", h2);
    report.set("log_C1", s1.sup);
    report.set("log_C2", -s2.sup);
    report.holds = s1.stable && s2.stable;
    if !s1.stable {
        report.note("sup defining log C1 still growing over the last decade");
    }
    if !s2.stable {
        report.note("inf defining log C2 still falling over the last decade");
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MatrixFamily {
    /// `τ ↦ p^{τ p^σ}`.
    MSigma { sigma: f64 },
    /// `H ↦ e^{φ_σ*(Hp)/H}`.
    NSigma { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixHandle {
    pub family: MatrixFamily,
    pub index_grid: Vec<f64>,
}

impl MatrixHandle {
    pub fn new(family: MatrixFamily, mut index_grid: Vec<f64>) -> Result<Self> {
        if index_grid.is_empty() || index_grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(usage("matrix index grid must be non-empty and positive"));
        }
        index_grid.sort_by(f64::total_cmp);
        index_grid.dedup();
        Ok(Self { family, index_grid })
    }

    pub fn sigma(&self) -> f64 {
        match self.family {
            MatrixFamily::MSigma { sigma } | MatrixFamily::NSigma { sigma } => sigma,
        }
    }

    fn name(&self) -> &'static str {
        match self.family {
            MatrixFamily::MSigma { .. } => "M",
            MatrixFamily::NSigma { .. } => "N",
        }
    }

    pub fn sequence(&self, index: f64) -> Result<LogWeightSequence> {
        match self.family {
            MatrixFamily::MSigma { sigma } => LogWeightSequence::extended(index, sigma),
            MatrixFamily::NSigma { sigma } => {
                LogWeightSequence::conjugate_generated(WeightFn::phi_sigma(sigma)?, index)
            }
        }
    }

    fn log_weights(&self, index: f64, ps: &[u64]) -> Result<Vec<f64>> {
        let seq = self.sequence(index)?;
        ps.iter().map(|&p| seq.log_weight(p)).collect()
    }
}

/// First choice of partner index for `a` when mapping `from` into `to`.
fn default_partner(from: &MatrixHandle, to: &MatrixHandle, a: f64, map: Option<&IndexMap>) -> Option<f64> {
    match (from.family, to.family, map) {
        (MatrixFamily::MSigma { .. }, MatrixFamily::NSigma { .. }, Some(m)) => Some(m.h1(a)),
        (MatrixFamily::NSigma { .. }, MatrixFamily::MSigma { .. }, Some(m)) => Some(m.tau_of_h(a)),
        _ => None,
    }
}

/// One direction of `≲`: for each index of `from`, the first partner `b` with
/// a stabilized `sup_p (log X_p - log Y^b_p)/p`.
fn match_direction(
    from: &MatrixHandle,
    to: &MatrixHandle,
    ps: &[u64],
    map: Option<&IndexMap>,
    report: &mut EquivalenceReport,
    tag: &str,
) -> Result<bool> {
    let xs: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    let mut all = true;
    for &a in &from.index_grid {
        let lhs = from.log_weights(a, ps)?;
        let candidates = default_partner(from, to, a, map).into_iter().chain(to.index_grid.iter().copied());
        let mut found = None;
        for b in candidates {
            let rhs = to.log_weights(b, ps)?;
            let r: Vec<f64> = lhs.iter().zip(&rhs).zip(&xs).map(|((l, r), p)| (l - r) / p).collect();
            let s = sup_stability(&xs, &r);
            if s.stable && s.sup.is_finite() {
                found = Some((b, s.sup));
                break;
            }
        }
        match found {
            Some((b, log_c)) => {
                report.set(&format!("{tag}[{a}]"), b);
                report.set(&format!("{tag}_log_C[{a}]"), log_c);
            }
            None => {
                all = false;
                report.note(format!("{tag}: no admissible partner for {}({a})", from.name()));
            }
        }
    }
    Ok(all)
}

/// Check `A ≲ B` and `B ≲ A` (`M_p <= C^p N_p` up to a change of index).
///
/// Partners are searched among `B.index_grid`, preceded by the image of `a`
/// under `map` when the families differ: on a finite grid the largest index of one family has no partner in a grid
/// of the same size otherwise.
pub fn check_matrix_equivalence(
    a: &MatrixHandle,
    b: &MatrixHandle,
    p_max: u64,
    map: Option<&IndexMap>,
) -> Result<EquivalenceReport> {
    if a.sigma() != b.sigma() {
        return Err(usage(format!("matrix equivalence needs equal sigma, got {} and {}", a.sigma(), b.sigma())));
    }
    if let Some(m) = map {
        if m.sigma != a.sigma() {
            return Err(usage("index map sigma does not match the matrices"));
        }
    }
    let ps = p_grid(p_max);
    let mut report = EquivalenceReport::new(
        "matrix-equivalence",
        format!("{} index {:?}; {} index {:?}; p: {} points on [1, {p_max}]", a.name(), a.index_grid, b.name(), b.index_grid, ps.len()),
    );
    if let Some(m) = map {
        report.set("A_sigma", m.a_sigma);
        report.set("B_sigma", m.b_sigma);
    }
    let forward = match_direction(a, b, &ps, map, &mut report, "forward")?;
    let backward = match_direction(b, a, &ps, map, &mut report, "backward")?;
    report.holds = forward && backward;
    Ok(report)
}

/// `σ` for which `φ_σ(ln t)` matches `ln^s t / ln^{s-1} ln t`: `σ = s/(s-1)`.
pub fn corollary_sigma(s: f64) -> f64 {
    s / (s - 1.0)
}

/// Largest allowed `c₂/c₁` for the corollary ratio band.
pub const COROLLARY_BAND: f64 = 10.0;

/// Ratio band of the corollary weight against `φ_σ(ln_+ t)`, `σ = s/(s-1)`,
/// over the whole grid, and the weight axioms for that weight.
pub fn check_corollary(s: f64, t_grid: &[f64]) -> Result<EquivalenceReport> {
    let w = WeightFn::corollary(s)?;
    if t_grid.len() < 2 || !(t_grid[0] > 1.0) || t_grid.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(usage("corollary grid must be increasing with t > 1"));
    }
    let sigma = corollary_sigma(s);
    let phi = WeightFn::phi_sigma(sigma)?;
    let ratios: Vec<f64> = t_grid.iter().map(|&t| w.eval_log(t.ln()) / phi.eval_log(t.ln())).collect();
    let c1 = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let c2 = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let top = &ratios[ratios.len() / 2..];
    let axioms = check_weight_axioms(&w, &axiom_grid())?;

    let mut report = EquivalenceReport::new("corollary", describe_grid("t", t_grid));
    report.set("s", s);
    report.set("sigma", sigma);
    report.set("c1", c1);
    report.set("c2", c2);
    report.set("band_ratio", c2 / c1);
    report.set("top_half_c1", top.iter().copied().fold(f64::INFINITY, f64::min));
    report.set("top_half_c2", top.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    report.set("alpha", axioms.alpha.statistic);
    report.set("beta", axioms.beta.statistic);
    report.set("gamma", axioms.gamma.statistic);
    report.set("delta_min_second_difference", axioms.delta.statistic);
    report.holds = c1 > 0.0 && c2 / c1 <= COROLLARY_BAND && axioms.alpha.holds && axioms.beta.holds && axioms.gamma.holds;
    if !(c1 > 0.0 && c2 / c1 <= COROLLARY_BAND) {
        report.note(format!("ratio band {c1}..{c2} wider than {COROLLARY_BAND}"));
    }
    if !axioms.delta.holds {
        report.note("convexity of omega(e^t) fails within tolerance; equivalence only");
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(tau: f64, sigma: f64) -> SequenceParams {
        SequenceParams::new(tau, sigma).unwrap()
    }

    #[test]
    fn t_phi_equivalence_at_tau1_sigma2() {
        let r = check_t_phi_equivalence(&params(1.0, 2.0), 1.0, &default_ln_k_grid()).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.max_violation <= BOUND_SLACK);
        let c = &r.fitted_constants;
        assert!(c["B"] <= c["A"] && c["A"] / c["B"] < 1.1);
    }

    #[test]
    fn tau_scaling_between_one_and_four() {
        let grid = default_ln_k_grid();
        let a1 = fit_phi(&params(1.0, 2.0), 1.0, &grid).unwrap().a;
        let a4 = fit_phi(&params(4.0, 2.0), 1.0, &grid).unwrap().a;
        let ratio = a1 / a4;
        assert!((2.0..=8.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn h_robustness_needs_long_grid() {
        let p = params(1.0, 2.0);
        let long = crate::assocfn::h_shift_grid(&p, 10.0).unwrap();
        let r = check_h_robustness(&p, 10.0, &long).unwrap();
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn ocena_norme_tau1_sigma2() {
        let r = check_ocena_norme(2.0, 1.0, 1000).unwrap();
        assert!(r.holds, "{r:?}");
        let c = &r.fitted_constants;
        assert_relative_eq!(c["H1"], 1.0 / c["B_fit"], max_relative = 1e-12);
        assert_relative_eq!(c["H2"], 1.0 / c["A_fit"], max_relative = 1e-12);
        assert!(c["log_C1"].is_finite() && c["log_C2"].is_finite());
    }

    #[test]
    fn index_map_closed_forms() {
        let map = IndexMap { sigma: 2.0, a_sigma: 0.3, b_sigma: 0.2 };
        for &tau in &[0.5, 1.0, 2.0, 4.0] {
            assert_relative_eq!(map.h1(tau), tau / 0.2, max_relative = 1e-12);
            assert_relative_eq!(map.h2(tau), tau / 2.0 / 0.3, max_relative = 1e-12);
            assert_relative_eq!(map.tau_of_h(map.h2(tau)), tau, max_relative = 1e-12);
        }
        let fit = PhiFit { a: 0.5, a_tilde: 0.0, b: 0.25, b_tilde: 0.0, max_violation: 0.0 };
        let m = IndexMap::from_fit(&params(2.0, 3.0), &fit);
        assert_relative_eq!(m.h1(2.0), 1.0 / fit.b, max_relative = 1e-12);
        assert_relative_eq!(m.h2(2.0), 1.0 / fit.a, max_relative = 1e-12);
    }

    #[test]
    fn self_equivalence_is_identity() {
        let m = MatrixHandle::new(MatrixFamily::MSigma { sigma: 2.0 }, vec![0.5, 1.0, 2.0]).unwrap();
        let r = check_matrix_equivalence(&m, &m, 1000, None).unwrap();
        assert!(r.holds);
        for tau in ["0.5", "1", "2"] {
            assert_eq!(r.fitted_constants[&format!("forward[{tau}]")], tau.parse::<f64>().unwrap());
            assert_eq!(r.fitted_constants[&format!("forward_log_C[{tau}]")], 0.0);
        }
    }

    #[test]
    fn mismatched_sigma_is_rejected() {
        let m = MatrixHandle::new(MatrixFamily::MSigma { sigma: 2.0 }, vec![1.0]).unwrap();
        let n = MatrixHandle::new(MatrixFamily::NSigma { sigma: 3.0 }, vec![1.0]).unwrap();
        assert!(matches!(check_matrix_equivalence(&m, &n, 100, None), Err(crate::Error::Usage(_))));
    }

    #[test]
    fn orphan_index_is_named() {
        let big = MatrixHandle::new(MatrixFamily::MSigma { sigma: 2.0 }, vec![1.0, 4.0]).unwrap();
        let small = MatrixHandle::new(MatrixFamily::MSigma { sigma: 2.0 }, vec![0.5, 1.0, 2.0]).unwrap();
        let r = check_matrix_equivalence(&small, &big, 1000, None).unwrap();
        assert!(!r.holds);
        assert!(r.notes.contains("M(4)"), "{}", r.notes);
    }

    #[test]
    fn corollary_bands() {
        let grid = log_spaced(1e3, 1e12, 64).unwrap();
        for s in [2.0, 3.0] {
            let r = check_corollary(s, &grid).unwrap();
            assert!(r.holds, "{r:?}");
        }
    }

    #[test]
    fn corollary_below_one_is_zero() {
        let w = WeightFn::corollary(2.0).unwrap();
        assert_eq!(w.eval(0.5), 0.0);
        assert_eq!(phi_sigma(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn pairing_with_sigma_equal_s_drifts_for_s3() {
        // φ_3(ln t) grows like ln^{3/2} t while the corollary weight grows like ln^3 t
        let w = WeightFn::corollary(3.0).unwrap();
        let phi = WeightFn::phi_sigma(3.0).unwrap();
        let ratio = |u: f64| w.eval_log(u) / phi.eval_log(u);
        assert!(ratio(1e4) > 10.0 * ratio(1e2));
        assert!(ratio(1e6) > 10.0 * ratio(1e4));
    }
}

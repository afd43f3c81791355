//! The verification suite: every checkable claim about extended Gevrey
//! sequences under a stable identifier, with default grids.

use std::collections::BTreeMap;
use std::f64::consts::E;

use serde::Serialize;
use serde_json::{json, Value};

use crate::assocfn::{
    assoc_fn_counting_ln, assoc_fn_sup_ln, h_shift_check, h_shift_grid, sandwich_bounds_check, CountingFunction,
};
use crate::conjugate::{
    axiom_grid, biconjugate, check_weight_axioms, integral_closed_form_check, phi_sigma, young_conjugate, WeightFn,
};
use crate::equivalence::{
    check_corollary, check_h_robustness, check_matrix_equivalence, check_ocena_norme, check_t_phi_equivalence,
    default_ln_k_grid, index_map_for, MatrixFamily, MatrixHandle,
};
use crate::error::{usage, Result};
use crate::grid::{linear, log_spaced, log_spaced_n};
use crate::lambertw::{check_w3_bounds, check_w_identities};
use crate::sequences::{
    check_condition, check_liminf_condition, lemma_quotient_bounds, liminf_series, Condition, ConditionReport,
    LogWeightSequence, SequenceParams,
};

/// Claims run by default, in report order.
pub const DEFAULT_CLAIMS: &[&str] = &[
    "w3",
    "w-identities",
    "lemma-quotient-bounds",
    "m1",
    "m2-prime",
    "m2-tilde",
    "m3-prime",
    "m4-tilde",
    "m4-tilde-prime",
    "m5-tilde",
    "m0",
    "liminf",
    "counting-floor",
    "sup-vs-counting",
    "sandwich",
    "integral-closed-form",
    "fenchel-young",
    "weight-axioms",
    "t-phi-equivalence",
    "h-robustness",
    "ocena-norme",
    "matrix-equivalence",
    "corollary",
];

/// Claims that are only run on request. Classical (M.2) fails for every
/// extended Gevrey sequence.
pub const OPT_IN_CLAIMS: &[&str] = &["m2-classical"];

/// The `h` values standing in for "for every h > 0".
pub const H_SWEEP: [f64; 3] = [1.0, 0.5, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub tau: f64,
    pub sigma: f64,
    pub h: f64,
    pub s: f64,
    pub c: f64,
    pub q: u64,
    /// Index range for the sequence conditions.
    pub p_max: u64,
    /// Index range for the conjugate-sequence bounds.
    pub p_max_norme: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { tau: 1.0, sigma: 2.0, h: 1.0, s: 2.0, c: E, q: 3, p_max: 10_000, p_max_norme: 1_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimOutcome {
    pub holds: bool,
    pub details: Value,
}

fn outcome(holds: bool, details: impl Serialize) -> Result<ClaimOutcome> {
    let details = serde_json::to_value(details).map_err(|e| usage(format!("serialization failed: {e}")))?;
    Ok(ClaimOutcome { holds, details })
}

fn conditions_outcome(reports: Vec<ConditionReport>) -> Result<ClaimOutcome> {
    let holds = reports.iter().all(|r| r.holds);
    outcome(holds, reports)
}

pub fn is_known(id: &str) -> bool {
    DEFAULT_CLAIMS.contains(&id) || OPT_IN_CLAIMS.contains(&id)
}

pub fn run_claim(id: &str, cfg: &SuiteConfig) -> Result<ClaimOutcome> {
    let params = SequenceParams::new(cfg.tau, cfg.sigma)?;
    let seq = LogWeightSequence::ExtendedGevrey(params);
    let condition = |c: Condition| check_condition(&seq, &c, cfg.p_max);
    match id {
        "w3" => {
            let r = check_w3_bounds(&log_spaced_n(E, 1e15, 200)?)?;
            let violations = r.points.iter().filter(|p| !p.holds).count();
            outcome(r.pass, json!({ "points": r.points.len(), "violations": violations }))
        }
        "w-identities" => {
            let r = check_w_identities(&log_spaced(10.0, 1e15, 8)?, cfg.c)?;
            let max_err = r.points.iter().map(|p| p.identity_error).fold(0.0, f64::max);
            let max_dev = r.points.iter().map(|p| (p.ratio - 1.0).abs() / p.band).fold(0.0, f64::max);
            outcome(r.pass, json!({ "C": cfg.c, "points": r.points.len(), "max_identity_error": max_err, "max_ratio_deviation_over_band": max_dev }))
        }
        "lemma-quotient-bounds" => {
            let r = lemma_quotient_bounds(&params, 2, cfg.p_max)?;
            outcome(r.pass, r)
        }
        "m1" => conditions_outcome(vec![condition(Condition::M1)?]),
        "m2-prime" => conditions_outcome(vec![condition(Condition::M2Prime)?]),
        "m2-tilde" => conditions_outcome(vec![condition(Condition::M2Tilde)?]),
        "m3-prime" => conditions_outcome(vec![condition(Condition::M3Prime)?]),
        "m0" => conditions_outcome(vec![condition(Condition::M0)?]),
        "m2-classical" => conditions_outcome(vec![condition(Condition::M2Classical)?]),
        "m4-tilde" => {
            let rhs = params.with_tau(2.0 * cfg.tau)?;
            conditions_outcome(
                H_SWEEP.iter().map(|&h| condition(Condition::M4Tilde { lhs: params, rhs, h })).collect::<Result<_>>()?,
            )
        }
        "m4-tilde-prime" => conditions_outcome(
            H_SWEEP.iter().map(|&h| condition(Condition::M4TildePrime { h })).collect::<Result<_>>()?,
        ),
        "m5-tilde" => {
            let rhs = SequenceParams::new(cfg.tau, cfg.sigma + 1.0)?;
            conditions_outcome(
                H_SWEEP.iter().map(|&h| condition(Condition::M5Tilde { lhs: params, rhs, h })).collect::<Result<_>>()?,
            )
        }
        "liminf" => {
            let r = check_liminf_condition(&seq, cfg.q, cfg.p_max)?;
            let series = liminf_series(&seq, cfg.q, cfg.p_max)?;
            let tail: Vec<f64> =
                series.iter().filter(|(p, _)| *p as f64 >= cfg.p_max as f64 / 10.0).map(|(_, r)| *r).collect();
            let increasing = tail.windows(2).all(|w| w[1] >= w[0]);
            outcome(r.holds && increasing, json!({ "report": r, "tail_increasing": increasing }))
        }
        "counting-floor" => {
            let lambdas = log_spaced_n(1.0, 1e8, 300)?;
            let mut mismatches = Vec::new();
            for c in [1.0, E, E * E] {
                let cf = CountingFunction::new(params, c)?;
                for &l in &lambdas {
                    let (f, d) = (cf.floor(l)?, cf.direct(l)?);
                    if f != d {
                        mismatches.push(json!({ "C": c, "lambda": l, "floor": f, "direct": d }));
                    }
                }
            }
            outcome(mismatches.is_empty(), json!({ "points": 3 * lambdas.len(), "mismatches": mismatches }))
        }
        "sup-vs-counting" => {
            let ks = log_spaced_n(1.0, 1e10, 500)?;
            let max_rel = ks
                .iter()
                .map(|&k| {
                    let a = assoc_fn_sup_ln(&params, 1.0, k.ln()).value;
                    let b = assoc_fn_counting_ln(&params, k.ln()).value;
                    (a - b).abs() / a.max(1.0)
                })
                .fold(0.0, f64::max);
            outcome(max_rel <= 1e-9, json!({ "points": ks.len(), "max_scaled_difference": max_rel }))
        }
        "sandwich" => {
            let r = sandwich_bounds_check(&params, cfg.h, &log_spaced(E, 1e12, 16)?)?;
            let shift = h_shift_check(&params, 4.0, 0.5 * cfg.tau, 2.0 * cfg.tau, &h_shift_grid(&params, 4.0)?)?;
            outcome(r.holds && shift.holds, json!({ "bounds": r, "h_shift": shift }))
        }
        "integral-closed-form" => {
            let ks: Vec<f64> = log_spaced_n(1e-2, 50.0, 50)?.into_iter().map(f64::exp).collect();
            let mut reports = Vec::new();
            for c in [1.0, cfg.c] {
                let r = integral_closed_form_check(&params, c, &ks)?;
                reports.push(json!({ "C": c, "max_rel_diff": r.max_rel_diff, "pass": r.pass }));
            }
            let holds = reports.iter().all(|r| r["pass"] == json!(true));
            outcome(holds, reports)
        }
        "fenchel-young" => {
            let r = fenchel_young(cfg.sigma)?;
            outcome(r.holds, r)
        }
        "weight-axioms" => {
            let r = weight_axiom_classification(cfg.sigma)?;
            outcome(r.iter().all(|c| c.matches), r)
        }
        "t-phi-equivalence" => {
            let r = check_t_phi_equivalence(&params, cfg.h, &default_ln_k_grid())?;
            outcome(r.holds, r)
        }
        "h-robustness" => {
            let h = if cfg.h == 1.0 { 10.0 } else { cfg.h };
            let r = check_h_robustness(&params, h, &h_shift_grid(&params, h)?)?;
            outcome(r.holds, r)
        }
        "ocena-norme" => {
            let r = check_ocena_norme(cfg.sigma, cfg.tau, cfg.p_max_norme)?;
            outcome(r.holds, r)
        }
        "matrix-equivalence" => {
            let taus = vec![0.5, 1.0, 2.0, 4.0];
            let map = index_map_for(cfg.sigma, &taus, cfg.p_max_norme)?;
            let hs: Vec<f64> = taus.iter().flat_map(|&t| [map.h1(t), map.h2(t)]).collect();
            let m = MatrixHandle::new(MatrixFamily::MSigma { sigma: cfg.sigma }, taus)?;
            let n = MatrixHandle::new(MatrixFamily::NSigma { sigma: cfg.sigma }, hs)?;
            let r = check_matrix_equivalence(&m, &n, cfg.p_max_norme, Some(&map))?;
            outcome(r.holds, r)
        }
        "corollary" => {
            let r = check_corollary(cfg.s, &log_spaced(1e3, 1e12, 64)?)?;
            outcome(r.holds, r)
        }
        other => Err(usage(format!("unknown claim {other:?}"))),
    }
}

/// Run the given claims (or the default list) in order.
pub fn run_suite(ids: Option<&[String]>, cfg: &SuiteConfig) -> Result<BTreeMap<String, ClaimOutcome>> {
    let ids: Vec<String> = match ids {
        Some(ids) => ids.to_vec(),
        None => DEFAULT_CLAIMS.iter().map(|s| s.to_string()).collect(),
    };
    if let Some(bad) = ids.iter().find(|id| !is_known(id)) {
        return Err(usage(format!("unknown claim {bad:?}")));
    }
    ids.iter().map(|id| Ok((id.clone(), run_claim(id, cfg)?))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FenchelYoungReport {
    pub sigma: f64,
    /// Largest `yt - φ(t) - φ*(y)` over the `(t, y)` grid.
    pub max_young_excess: f64,
    /// Largest `|φ**(t) - φ(t)| / max(1, φ(t))` over the `t` grid.
    pub max_biconjugate_error: f64,
    pub holds: bool,
}

/// Young's inequality on a 100×100 grid and biconjugate recovery on the `t`
/// grid for `φ = φ_σ`.
pub fn fenchel_young(sigma: f64) -> Result<FenchelYoungReport> {
    let phi = |t: f64| phi_sigma(sigma, t).unwrap_or(f64::INFINITY);
    let ts = linear(0.0, 20.0, 100)?;
    let ys = linear(0.0, 20.0, 100)?;
    let table = crate::conjugate::ConjugateTable::build(&phi, &ys)?;
    let mut max_young_excess = f64::NEG_INFINITY;
    for &t in &ts {
        let ft = phi(t);
        for row in &table.rows {
            max_young_excess = max_young_excess.max(row.y * t - ft - row.value);
        }
    }
    let mut max_biconjugate_error: f64 = 0.0;
    for &t in &ts {
        let ft = phi(t);
        max_biconjugate_error = max_biconjugate_error.max((biconjugate(&phi, t)? - ft).abs() / ft.max(1.0));
    }
    let _ = young_conjugate(&phi, 0.0)?;
    Ok(FenchelYoungReport {
        sigma,
        max_young_excess,
        max_biconjugate_error,
        holds: max_young_excess <= 1e-8 && max_biconjugate_error <= 1e-6,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCase {
    pub weight: String,
    /// Expected outcome of (α), (β), (γ), (δ).
    pub expected: [bool; 4],
    pub observed: [bool; 4],
    pub statistics: [f64; 4],
    pub matches: bool,
}

/// The classification of the standard examples on [`axiom_grid`].
pub fn weight_axiom_classification(sigma: f64) -> Result<Vec<AxiomCase>> {
    let all = [true; 4];
    let cases = [
        (WeightFn::bmt_log_power(2.0)?, all),
        (WeightFn::bmt_quotient(2.0)?, all),
        (WeightFn::LambertW, [true, true, false, true]),
        (WeightFn::power(0.5)?, all),
        (WeightFn::power(1.0)?, all),
        (WeightFn::power(1.5)?, [true, false, true, true]),
        (WeightFn::phi_sigma(sigma)?, all),
    ];
    let grid = axiom_grid();
    cases
        .into_iter()
        .map(|(w, expected)| {
            let r = check_weight_axioms(&w, &grid)?;
            let observed = [r.alpha.holds, r.beta.holds, r.gamma.holds, r.delta.holds];
            Ok(AxiomCase {
                weight: format!("{w:?}"),
                expected,
                observed,
                statistics: [r.alpha.statistic, r.beta.statistic, r.gamma.statistic, r.delta.statistic],
                matches: observed == expected,
            })
        })
        .collect()
}

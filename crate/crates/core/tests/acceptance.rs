//! The fourteen acceptance criteria, one pass/fail line each. Runs without
//! the libtest harness so the lines always print.

use std::f64::consts::E;
use std::process::Command;

use gevrey::assocfn::{assoc_fn_counting_ln, assoc_fn_sup_ln, CountingFunction};
use gevrey::conjugate::integral_closed_form_check;
use gevrey::equivalence::{check_corollary, check_ocena_norme, default_ln_k_grid, fit_phi};
use gevrey::grid::{log_spaced, log_spaced_n};
use gevrey::lambertw::{check_w3_bounds, lambert_w0};
use gevrey::sequences::{
    check_condition, check_liminf_condition, lemma_quotient_bounds, liminf_series, Condition, LogWeightSequence,
    SequenceParams,
};
use gevrey::verify::{fenchel_young, weight_axiom_classification, H_SWEEP};

const TAUS: [f64; 3] = [0.5, 1.0, 2.0];
const SIGMAS: [f64; 3] = [1.5, 2.0, 3.0];
const ASSOC_SET: [(f64, f64); 3] = [(1.0, 2.0), (2.0, 3.0), (0.5, 1.5)];

fn pairs() -> impl Iterator<Item = SequenceParams> {
    TAUS.into_iter().flat_map(|t| SIGMAS.into_iter().map(move |s| SequenceParams::new(t, s).unwrap()))
}

fn criterion_1() -> Result<(), String> {
    for w in log_spaced_n(1e-6, 700.0, 200).unwrap() {
        let err = (lambert_w0(w * w.exp()).unwrap() - w).abs();
        if err > 1e-12 * w.max(1.0) {
            return Err(format!("w = {w}: error {err:e}"));
        }
    }
    Ok(())
}

fn criterion_2() -> Result<(), String> {
    let r = check_w3_bounds(&log_spaced_n(E, 1e15, 200).unwrap()).unwrap();
    match r.points.iter().find(|p| !p.holds) {
        Some(p) => Err(format!("x = {}: {} <= {} <= {} fails", p.x, p.lower, p.w, p.upper)),
        None if r.points.len() == 200 => Ok(()),
        None => Err(format!("{} points checked", r.points.len())),
    }
}

fn criterion_3() -> Result<(), String> {
    for params in pairs() {
        let r = lemma_quotient_bounds(&params, 2, 10_000).unwrap();
        if !r.pass || r.violations > 0 {
            return Err(format!("{params:?}: {} violations, first at {:?}", r.violations, r.first_violation));
        }
    }
    Ok(())
}

fn criterion_4() -> Result<(), String> {
    for params in pairs() {
        let seq = LogWeightSequence::ExtendedGevrey(params);
        let mut conditions = vec![Condition::M1, Condition::M2Prime, Condition::M2Tilde, Condition::M3Prime, Condition::M0];
        for h in H_SWEEP {
            conditions.push(Condition::M4Tilde { lhs: params, rhs: params.with_tau(2.0 * params.tau).unwrap(), h });
            conditions.push(Condition::M4TildePrime { h });
            conditions.push(Condition::M5Tilde {
                lhs: params,
                rhs: SequenceParams::new(params.tau, params.sigma + 1.0).unwrap(),
                h,
            });
        }
        for c in &conditions {
            let r = check_condition(&seq, c, 10_000).unwrap();
            if !r.holds {
                return Err(format!("{params:?}: {c:?} fails ({r:?})"));
            }
        }
        let r = check_condition(&seq, &Condition::M2Classical, 10_000).unwrap();
        match r.witness {
            Some(p) if !r.holds && p <= 100 => {}
            _ => return Err(format!("{params:?}: classical (M.2) report {r:?}")),
        }
    }
    Ok(())
}

fn criterion_5() -> Result<(), String> {
    for params in pairs() {
        let seq = LogWeightSequence::ExtendedGevrey(params);
        let r = check_liminf_condition(&seq, 3, 10_000).unwrap();
        let series = liminf_series(&seq, 3, 10_000).unwrap();
        if let Some((p, d)) = series.iter().find(|(p, d)| *p >= 2 && !(*d > 0.0)) {
            return Err(format!("{params:?}: log m_3p - log m_p = {d} at p = {p}"));
        }
        let tail: Vec<f64> = series.iter().filter(|(p, _)| *p >= 1_000).map(|(_, d)| *d).collect();
        if !r.holds || tail.len() < 2 || tail.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("{params:?}: tail not increasing"));
        }
    }
    Ok(())
}

fn criterion_6() -> Result<(), String> {
    let ks = log_spaced_n(1.0, 1e10, 500).unwrap();
    for (tau, sigma) in ASSOC_SET {
        let params = SequenceParams::new(tau, sigma).unwrap();
        for &k in &ks {
            let a = assoc_fn_sup_ln(&params, 1.0, k.ln()).value;
            let b = assoc_fn_counting_ln(&params, k.ln()).value;
            if (a - b).abs() > 1e-9 * a.max(1.0) {
                return Err(format!("({tau}, {sigma}) k = {k}: sup {a} vs counting {b}"));
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Result<(), String> {
    let lambdas = log_spaced_n(1.0, 1e8, 300).unwrap();
    for (tau, sigma) in ASSOC_SET {
        for c in [1.0, E, E * E] {
            let cf = CountingFunction::new(SequenceParams::new(tau, sigma).unwrap(), c).unwrap();
            for &l in &lambdas {
                let (f, d) = (cf.floor(l).unwrap(), cf.direct(l).unwrap());
                if f != d {
                    return Err(format!("({tau}, {sigma}) C = {c}, lambda = {l}: floor {f} vs count {d}"));
                }
            }
        }
    }
    Ok(())
}

fn criterion_8() -> Result<(), String> {
    let ks: Vec<f64> = log_spaced_n(1e-2, 50.0, 50).unwrap().into_iter().map(f64::exp).collect();
    for (tau, sigma) in ASSOC_SET {
        for c in [1.0, E, E * E] {
            let r = integral_closed_form_check(&SequenceParams::new(tau, sigma).unwrap(), c, &ks).unwrap();
            if r.points.len() != 50 || r.max_rel_diff > 1e-6 {
                return Err(format!("({tau}, {sigma}) C = {c}: max relative difference {:e}", r.max_rel_diff));
            }
        }
    }
    Ok(())
}

fn criterion_9() -> Result<(), String> {
    let grid = default_ln_k_grid();
    for (tau, sigma) in ASSOC_SET {
        let fit = fit_phi(&SequenceParams::new(tau, sigma).unwrap(), 1.0, &grid).unwrap();
        if !(fit.b > 0.0 && fit.a.is_finite()) || fit.max_violation > 1e-8 {
            return Err(format!("({tau}, {sigma}): {fit:?}"));
        }
    }
    let a1 = fit_phi(&SequenceParams::new(1.0, 2.0).unwrap(), 1.0, &grid).unwrap().a;
    let a4 = fit_phi(&SequenceParams::new(4.0, 2.0).unwrap(), 1.0, &grid).unwrap().a;
    let ratio = a1 / a4;
    if !(2.0..=8.0).contains(&ratio) {
        return Err(format!("A(1)/A(4) = {ratio}"));
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    for params in pairs() {
        let r = check_ocena_norme(params.sigma, params.tau, 1_000).unwrap();
        if !r.holds {
            return Err(format!("{params:?}: {}", r.notes));
        }
    }
    Ok(())
}

fn criterion_11() -> Result<(), String> {
    for sigma in SIGMAS {
        let r = fenchel_young(sigma).unwrap();
        if !(r.max_young_excess <= 1e-8 && r.max_biconjugate_error <= 1e-6) {
            return Err(format!("{r:?}"));
        }
    }
    Ok(())
}

fn criterion_12() -> Result<(), String> {
    let cases = weight_axiom_classification(2.0).unwrap();
    match cases.iter().find(|c| !c.matches) {
        Some(c) => Err(format!("{}: expected {:?}, observed {:?}", c.weight, c.expected, c.observed)),
        None => Ok(()),
    }
}

fn criterion_13() -> Result<(), String> {
    for s in [2.0, 3.0] {
        let r = check_corollary(s, &log_spaced(1e3, 1e12, 64).unwrap()).unwrap();
        let band = r.fitted_constants["band_ratio"];
        if !(r.fitted_constants["c1"] > 0.0 && band <= 10.0) {
            return Err(format!("s = {s}: c2/c1 = {band}"));
        }
    }
    Ok(())
}

fn criterion_14() -> Result<(), String> {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_gevrey"))
            .args(["verify", "--sigma", "2", "--tau", "1"])
            .output()
            .expect("binary runs")
    };
    let (first, second) = (run(), run());
    if first.status.code() != Some(0) {
        return Err(format!("exit {:?}: {}", first.status.code(), String::from_utf8_lossy(&first.stderr)));
    }
    if first.stdout.is_empty() || first.stdout != second.stdout {
        return Err("outputs differ".into());
    }
    serde_json::from_slice::<serde_json::Value>(&first.stdout).map_err(|e| e.to_string())?;
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Result<(), String>); 14] = [
        ("Lambert round-trip", criterion_1),
        ("W3 bracket", criterion_2),
        ("quotient bounds lemma", criterion_3),
        ("condition suite", criterion_4),
        ("liminf condition, Q = 3", criterion_5),
        ("sup vs counting", criterion_6),
        ("counting floor formula", criterion_7),
        ("closed-form integral", criterion_8),
        ("T-phi sandwich", criterion_9),
        ("norm estimate constants", criterion_10),
        ("Fenchel-Young and biconjugate", criterion_11),
        ("weight-axiom classifier", criterion_12),
        ("corollary ratio band", criterion_13),
        ("CLI determinism", criterion_14),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("criterion {:>2} ({name}): PASS", i + 1),
            Err(why) => {
                println!("criterion {:>2} ({name}): FAIL: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

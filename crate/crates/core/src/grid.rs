//! Evaluation grids and the sup-stabilization test used to turn
//! "there exists a constant" claims into finite-range checks.

use crate::error::{usage, Result};

/// `n` points log-spaced on `[min, max]`, endpoints included exactly.
pub fn log_spaced_n(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) {
        return Err(usage(format!("log grid needs 0 < min < max, got [{min}, {max}]")));
    }
    if n < 2 {
        return Err(usage("log grid needs at least two points"));
    }
    let (a, b) = (min.log10(), max.log10());
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| 10f64.powf(a + step * i as f64)).collect();
    out[0] = min;
    out[n - 1] = max;
    Ok(out)
}

/// Log-spaced points on `[min, max]` with `per_decade` points per decade.
pub fn log_spaced(min: f64, max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if per_decade == 0 {
        return Err(usage("points per decade must be positive"));
    }
    if !(min > 0.0 && max > min) {
        return Err(usage(format!("log grid needs 0 < min < max, got [{min}, {max}]")));
    }
    let decades = (max / min).log10();
    let n = ((decades * per_decade as f64).round() as usize).max(1) + 1;
    log_spaced_n(min, max, n)
}

/// `n` evenly spaced points on `[min, max]`.
pub fn linear(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if !(max > min) || n < 2 {
        return Err(usage(format!("linear grid needs min < max and n >= 2, got [{min}, {max}], n={n}")));
    }
    let step = (max - min) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| min + step * i as f64).collect();
    out[n - 1] = max;
    Ok(out)
}

/// Values of `ln k` for `k` log-spaced on `[k_min, k_max]`.
pub fn ln_k_grid(k_min: f64, k_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    Ok(log_spaced(k_min, k_max, per_decade)?.into_iter().map(f64::ln).collect())
}

/// Integer index grid: every integer in `1..=min(p_max, 128)`, then about
/// 100 log-spaced integers per decade up to `p_max`.
pub fn p_grid(p_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=p_max.min(128)).collect();
    if p_max > 128 {
        let (a, b) = (128f64.log10(), (p_max as f64).log10());
        let n = ((b - a) * 100.0).ceil() as usize;
        for i in 1..=n {
            let p = 10f64.powf(a + (b - a) * i as f64 / n as f64).round() as u64;
            out.push(p.min(p_max));
        }
        out.push(p_max);
    }
    out.dedup();
    out
}

/// Outcome of the sup-stabilization test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    /// Sup over the whole range.
    pub sup: f64,
    /// Sup over the points before the last decade.
    pub head_sup: f64,
    /// Whether the values in the last decade are nonincreasing.
    pub tail_nonincreasing: bool,
    pub stable: bool,
}

const STABLE_REL: f64 = 0.01;
const STABLE_ABS: f64 = 1e-9;

/// Decide whether the sup of `values` (indexed by increasing positive `xs`)
/// has stabilized: the sup gained less than 1% during the last decade
/// `[x_max/10, x_max]`, or the values in that decade are nonincreasing.
pub fn sup_stability(xs: &[f64], values: &[f64]) -> Stability {
    assert_eq!(xs.len(), values.len());
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail_start = x_max / 10.0;
    let mut sup = f64::NEG_INFINITY;
    let mut head_sup = f64::NEG_INFINITY;
    let mut finite = true;
    let mut tail = Vec::new();
    for (&x, &v) in xs.iter().zip(values) {
        if !v.is_finite() {
            finite = false;
        }
        sup = sup.max(v);
        if x < tail_start {
            head_sup = head_sup.max(v);
        } else {
            tail.push(v);
        }
    }
    let tail_nonincreasing = tail
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
    let gained = if head_sup.is_finite() {
        sup - head_sup <= STABLE_REL * sup.abs().max(head_sup.abs()) + STABLE_ABS
    } else {
        false
    };
    Stability {
        sup,
        head_sup,
        tail_nonincreasing,
        stable: finite && (gained || tail_nonincreasing),
    }
}

/// First index `x >= 10 * x_0` at which `values` exceeds, by more than the
/// stabilization margin, the sup over all points at or below `x / 10`.
pub fn growth_witness(xs: &[f64], values: &[f64]) -> Option<usize> {
    let x0 = xs.first().copied()?;
    for (i, &x) in xs.iter().enumerate() {
        if x < 10.0 * x0 {
            continue;
        }
        let prior = xs
            .iter()
            .zip(values)
            .take_while(|(&xp, _)| xp <= x / 10.0)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        let v = values[i];
        if !v.is_finite() || v > prior + STABLE_REL * prior.abs() + STABLE_ABS {
            return Some(i);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_grid_is_strictly_increasing_and_dense_at_start() {
        let g = p_grid(1_000_000);
        assert_eq!(&g[..5], &[1, 2, 3, 4, 5]);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*g.last().unwrap(), 1_000_000);
        assert!(g.len() < 128 + 400);
    }

    #[test]
    fn log_grid_endpoints_exact() {
        let g = log_spaced(1.0, 1e10, 16).unwrap();
        assert_eq!(g.len(), 161);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[160], 1e10);
        assert!(log_spaced(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn stability_classifies_decay_and_growth() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        let decaying: Vec<f64> = xs.iter().map(|x| 1.0 / x).collect();
        assert!(sup_stability(&xs, &decaying).stable);
        let growing: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let s = sup_stability(&xs, &growing);
        assert!(!s.stable);
        assert!(growth_witness(&xs, &growing).is_some());
        let saturating: Vec<f64> = xs.iter().map(|x| 1.0 - 1.0 / (x * x)).collect();
        assert!(sup_stability(&xs, &saturating).stable);
    }
}

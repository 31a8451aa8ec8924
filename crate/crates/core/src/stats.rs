//! Summary statistics and the Mann–Whitney rank test used by the benchmark
//! reports.

use crate::special::normal_cdf;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Linear-interpolation quantile (the common "type 7" definition).
pub fn quantile(x: &[f64], p: f64) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn median(x: &[f64]) -> f64 {
    quantile(x, 0.5)
}

/// `(q25, q75)`.
pub fn iqr(x: &[f64]) -> (f64, f64) {
    (quantile(x, 0.25), quantile(x, 0.75))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// `U` statistic of the first sample.
    pub u: f64,
    /// Normal approximation of `P(U ≤ u)` under the null: small when the
    /// first sample tends to be smaller.
    pub p_less: f64,
    pub p_two_sided: f64,
}

/// Mann–Whitney U test with midranks for ties, tie-corrected variance and
/// continuity correction.
pub fn mann_whitney(x: &[f64], y: &[f64]) -> MannWhitney {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let mut all: Vec<(f64, usize)> = x.iter().map(|&v| (v, 0)).chain(y.iter().map(|&v| (v, 1))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = all.len();
    let mut rank_sum_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let midrank = (i + j) as f64 / 2.0 + 1.0;
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        rank_sum_x += all[i..=j].iter().filter(|e| e.1 == 0).count() as f64 * midrank;
        i = j + 1;
    }
    let u = rank_sum_x - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let nt = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nt + 1.0) - tie_term / (nt * (nt - 1.0)));
    if !(var > 0.0) {
        return MannWhitney {
            u,
            p_less: 1.0,
            p_two_sided: 1.0,
        };
    }
    let sd = var.sqrt();
    let p_less = normal_cdf((u - mu + 0.5) / sd).min(1.0);
    let z_abs = ((u - mu).abs() - 0.5).max(0.0) / sd;
    let p_two_sided = (2.0 * (1.0 - normal_cdf(z_abs))).min(1.0);
    MannWhitney { u, p_less, p_two_sided }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_match_reference() {
        // reference: numpy.percentile (linear) → 1.75, 3.5, 5.25
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        assert!((quantile(&x, 0.25) - 1.75).abs() < 1e-12);
        assert!((median(&x) - 3.5).abs() < 1e-12);
        assert!((quantile(&x, 0.75) - 5.25).abs() < 1e-12);
        assert_eq!(median(&[7.0]), 7.0);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn mann_whitney_matches_reference() {
        // reference: scipy.stats.mannwhitneyu(method="asymptotic")
        let r = mann_whitney(&[1.0, 2.0, 3.0, 4.0, 5.0], &[6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(r.u, 0.0);
        assert!((r.p_less - 0.006092890177672406).abs() < 1e-6);

        let x = [1.0, 2.0, 2.0, 3.0, 5.0, 8.0];
        let y = [2.0, 4.0, 6.0, 6.0, 9.0, 10.0, 12.0];
        let r = mann_whitney(&x, &y);
        assert_eq!(r.u, 8.0);
        assert!((r.p_two_sided - 0.07216011300239511).abs() < 1e-6);
        assert!((r.p_less - 0.036080056501197555).abs() < 1e-6);
    }

    #[test]
    fn identical_samples_are_not_significant() {
        let r = mann_whitney(&[3.0; 10], &[3.0; 10]);
        assert_eq!(r.p_two_sided, 1.0);
    }
}

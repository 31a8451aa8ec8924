//! χ² quantiles, Gaussian level functions and per-component confidence
//! levels that approximate a mixture's confidence region by a union of
//! ellipsoids.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gmm::{GaussianComponent, GaussianMixture};
use crate::special::regularized_lower_gamma;

/// Tolerance on `Σ w_k κ_k = κ` reached by [`shared_level_search`].
pub const LEVEL_SEARCH_TOL: f64 = 1e-6;

/// `F_{χ²_n}(t) = P(n/2, t/2)`.
pub fn chi2_cdf(dof: u32, t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::NonFinite("chi-square statistic"));
    }
    if t < 0.0 {
        return Err(Error::NegativeStatistic);
    }
    if dof == 0 {
        return Err(Error::InvalidConfig(
            "chi-square needs at least one degree of freedom".into(),
        ));
    }
    Ok(regularized_lower_gamma(0.5 * dof as f64, 0.5 * t))
}

/// Quantile `F⁻¹_{χ²_n}(κ)` by bracketed bisection on [`chi2_cdf`].
pub fn chi2_inv_cdf(dof: u32, kappa: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(if kappa >= 1.0 {
            Error::DegenerateConfidenceLevel
        } else {
            Error::InvalidConfig(format!("confidence level {kappa} outside [0, 1)"))
        });
    }
    if dof == 0 {
        return Err(Error::InvalidConfig(
            "chi-square needs at least one degree of freedom".into(),
        ));
    }
    if kappa == 0.0 {
        return Ok(0.0);
    }
    let cdf = |t: f64| regularized_lower_gamma(0.5 * dof as f64, 0.5 * t);
    let mut lo = 0.0;
    let mut hi = dof as f64;
    while cdf(hi) < kappa {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ln Λ` for the level function of one Gaussian:
/// `-½ ln det(2πΣ) - ½ F⁻¹_{χ²_n}(κ)`.
pub fn log_gaussian_level(kappa: f64, component: &GaussianComponent) -> Result<f64> {
    let t = chi2_inv_cdf(component.dim() as u32, kappa)?;
    Ok(component.log_peak_density() - 0.5 * t)
}

/// Density level whose super level set holds mass `κ` of the Gaussian.
pub fn gaussian_level(kappa: f64, component: &GaussianComponent) -> Result<f64> {
    Ok(log_gaussian_level(kappa, component)?.exp())
}

/// Result of inverting the Gaussian level function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelInverse {
    pub kappa: f64,
    /// Chi-square statistic `-ln(Λ² det(2πΣ))`, i.e. the squared Mahalanobis
    /// radius of the super level set (0 when clamped).
    pub radius_sq: f64,
    /// The requested level exceeds the peak density; `kappa` was clamped to 0.
    pub above_mode: bool,
}

/// `κ = F_{χ²_n}(-ln(Λ² det(2πΣ)))` given `ln Λ`.
pub fn log_gaussian_level_inv(log_level: f64, component: &GaussianComponent) -> LevelInverse {
    let stat = -2.0 * log_level - component.log_det_2pi();
    if !(stat > 0.0) {
        return LevelInverse {
            kappa: 0.0,
            radius_sq: 0.0,
            above_mode: stat < 0.0 || stat.is_nan(),
        };
    }
    let kappa = regularized_lower_gamma(0.5 * component.dim() as f64, 0.5 * stat);
    LevelInverse {
        kappa: kappa.min(1.0 - f64::EPSILON),
        radius_sq: stat,
        above_mode: false,
    }
}

/// Confidence level of the super level set `{x : N(x; μ, Σ) ≥ Λ}`.
pub fn gaussian_level_inv(level: f64, component: &GaussianComponent) -> Result<LevelInverse> {
    if !(level > 0.0) || level.is_nan() {
        return Err(Error::InvalidConfig(format!(
            "density level must be positive, got {level}"
        )));
    }
    Ok(log_gaussian_level_inv(level.ln(), component))
}

/// Per-component confidence levels sharing one density level `Λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLevels {
    pub overall_level: f64,
    pub shared_density_level: f64,
    pub log_shared_density_level: f64,
    pub per_component: Vec<f64>,
    pub per_component_radius_sq: Vec<f64>,
}

impl ComponentLevels {
    pub fn len(&self) -> usize {
        self.per_component.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_component.is_empty()
    }

    /// Levels where every component is clamped, so no ellipsoid is active.
    pub fn all_clamped(num_components: usize) -> Self {
        ComponentLevels {
            overall_level: 0.0,
            shared_density_level: f64::INFINITY,
            log_shared_density_level: f64::INFINITY,
            per_component: vec![0.0; num_components],
            per_component_radius_sq: vec![0.0; num_components],
        }
    }

    /// `κ_k = κ` for every component.
    pub fn uniform(gmm: &GaussianMixture, kappa: f64) -> Result<Self> {
        let r = chi2_inv_cdf(gmm.dim() as u32, kappa)?;
        Ok(ComponentLevels {
            overall_level: kappa,
            shared_density_level: f64::NAN,
            log_shared_density_level: f64::NAN,
            per_component: vec![kappa; gmm.len()],
            per_component_radius_sq: vec![r; gmm.len()],
        })
    }

    pub fn weighted_level(&self, gmm: &GaussianMixture) -> f64 {
        gmm.weights().zip(&self.per_component).map(|(w, k)| w * k).sum()
    }

    pub fn is_active(&self, k: usize) -> bool {
        self.per_component[k] > 0.0
    }
}

fn levels_at(gmm: &GaussianMixture, log_level: f64) -> (f64, Vec<LevelInverse>) {
    let mut total = 0.0;
    let inv: Vec<LevelInverse> = gmm
        .components()
        .iter()
        .map(|c| {
            if c.weight() <= 0.0 {
                return LevelInverse {
                    kappa: 0.0,
                    radius_sq: 0.0,
                    above_mode: true,
                };
            }
            let li = log_gaussian_level_inv(log_level - c.weight().ln(), c);
            total += c.weight() * li.kappa;
            li
        })
        .collect();
    (total, inv)
}

/// `ln Λ₀` with `Λ₀ = Σ_k w_k² L_k(κ)`, the closed-form shared level.
pub fn analytical_log_shared_level(gmm: &GaussianMixture, kappa: f64) -> Result<f64> {
    let mut terms = Vec::with_capacity(gmm.len());
    for c in gmm.components() {
        if c.weight() > 0.0 {
            terms.push(2.0 * c.weight().ln() + log_gaussian_level(kappa, c)?);
        }
    }
    Ok(log_sum_exp(&terms))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Bracket used by [`shared_level_search`] in `ln Λ`, exposed for tests.
pub fn shared_level_bracket(gmm: &GaussianMixture, kappa: f64) -> Result<(f64, f64)> {
    let hi = gmm
        .components()
        .iter()
        .filter(|c| c.weight() > 0.0)
        .map(|c| c.weight().ln() + c.log_peak_density())
        .fold(f64::NEG_INFINITY, f64::max);
    let seed = analytical_log_shared_level(gmm, kappa)?.min(hi);
    let mut lo = seed;
    let mut step = 1.0;
    while levels_at(gmm, lo).0 < kappa {
        lo = seed - step;
        step *= 2.0;
        if step > 1e6 {
            return Err(Error::InvalidConfig("shared level search failed to bracket".into()));
        }
    }
    Ok((lo, hi))
}

/// Bisection on `ln Λ` for `Σ_k w_k κ_k(Λ) = κ`, where
/// `κ_k(Λ) = L_k⁻¹(Λ / w_k)` and each `κ_k` is nonincreasing in `Λ`.
pub fn shared_level_search(gmm: &GaussianMixture, kappa: f64) -> Result<ComponentLevels> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "target confidence level {kappa} outside (0, 1)"
        )));
    }
    let (mut lo, mut hi) = shared_level_bracket(gmm, kappa)?;
    let mut best = (lo, levels_at(gmm, lo));
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let (total, inv) = levels_at(gmm, mid);
        if (total - kappa).abs() < (best.1 .0 - kappa).abs() {
            best = (mid, (total, inv));
        }
        if (best.1 .0 - kappa).abs() <= 0.01 * LEVEL_SEARCH_TOL || mid <= lo || mid >= hi {
            break;
        }
        if total >= kappa {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (log_level, (_, inv)) = best;
    Ok(ComponentLevels {
        overall_level: kappa,
        shared_density_level: log_level.exp(),
        log_shared_density_level: log_level,
        per_component: inv.iter().map(|l| l.kappa).collect(),
        per_component_radius_sq: inv.iter().map(|l| l.radius_sq).collect(),
    })
}

/// Membership in the union of per-component ellipsoids (boundary inclusive).
/// Components clamped to `κ_k = 0` contribute nothing.
pub fn in_confidence_region(x: &DVector<f64>, gmm: &GaussianMixture, levels: &ComponentLevels) -> Result<bool> {
    check_dim(gmm.dim(), x.len())?;
    check_dim(gmm.len(), levels.len())?;
    Ok(gmm
        .components()
        .iter()
        .enumerate()
        .any(|(k, c)| levels.is_active(k) && c.mahalanobis_sq(x) <= levels.per_component_radius_sq[k]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn iso(mean: &[f64], var: f64, w: f64) -> GaussianComponent {
        let n = mean.len();
        GaussianComponent::new(DVector::from_row_slice(mean), DMatrix::identity(n, n) * var, w).unwrap()
    }

    #[test]
    fn chi2_reference_values() {
        // two dof: F(t) = 1 - exp(-t/2)
        let t = -2.0 * (1.0f64 - 0.9).ln();
        assert!((chi2_cdf(2, t).unwrap() - 0.9).abs() < 1e-14);
        assert!((chi2_cdf(2, 4.605170).unwrap() - 0.9).abs() < 1e-7);
        let z = 1.644_853_626_951_472_2f64;
        assert!((chi2_cdf(1, z * z).unwrap() - 0.9).abs() < 1e-12);
        for n in 1..10 {
            assert_eq!(chi2_cdf(n, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn chi2_quantiles() {
        assert!((chi2_inv_cdf(2, 0.9).unwrap() - 4.605_170_185_988_091).abs() < 1e-9);
        assert_eq!(chi2_inv_cdf(2, 0.0).unwrap(), 0.0);
        assert!((chi2_inv_cdf(3, 0.9).unwrap() - 6.251_389).abs() < 1e-6);
        assert!((chi2_inv_cdf(1, 0.9).unwrap() - 2.705_543).abs() < 1e-6);
    }

    #[test]
    fn chi2_errors() {
        assert!(matches!(chi2_cdf(2, -1.0), Err(Error::NegativeStatistic)));
        assert!(matches!(chi2_inv_cdf(2, 1.0), Err(Error::DegenerateConfidenceLevel)));
        assert!(matches!(chi2_inv_cdf(2, 1.5), Err(Error::DegenerateConfidenceLevel)));
    }

    #[test]
    fn level_function_examples() {
        let c = iso(&[0.0, 0.0], 1.0, 1.0);
        let lvl = gaussian_level(0.9, &c).unwrap();
        assert!((lvl - 0.1 / (2.0 * std::f64::consts::PI)).abs() < 1e-12);
        assert!((lvl - 0.0159155).abs() < 1e-7);
        let peak = gaussian_level(0.0, &c).unwrap();
        assert!((peak - c.log_peak_density().exp()).abs() < 1e-15);

        let back = gaussian_level_inv(lvl, &c).unwrap();
        assert!((back.kappa - 0.9).abs() < 1e-9);
        assert!(!back.above_mode);
        let at_peak = gaussian_level_inv(peak, &c).unwrap();
        assert_eq!(at_peak.kappa, 0.0);
        let above = gaussian_level_inv(peak * 1.5, &c).unwrap();
        assert_eq!(above.kappa, 0.0);
        assert!(above.above_mode);
    }

    #[test]
    fn level_inverse_is_monotone_toward_one() {
        let c = iso(&[0.0, 0.0, 0.0], 0.3, 1.0);
        let mut prev = 0.0;
        for i in 1..60 {
            let level = c.log_peak_density().exp() * 10f64.powf(-(i as f64) * 0.25);
            let k = gaussian_level_inv(level, &c).unwrap().kappa;
            assert!(k >= prev);
            prev = k;
        }
        assert!(prev > 1.0 - 1e-6);
    }

    #[test]
    fn level_roundtrip_over_kappa() {
        let c = GaussianComponent::new(
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 0.5]),
            1.0,
        )
        .unwrap();
        for i in 0..20 {
            let k = i as f64 * 0.049;
            let lvl = gaussian_level(k, &c).unwrap();
            let back = gaussian_level_inv(lvl, &c).unwrap().kappa;
            assert!((back - k).abs() < 1e-9, "{k} -> {back}");
        }
    }

    #[test]
    fn single_component_search_is_fixed_point() {
        let c = iso(&[0.0, 0.0], 0.7, 1.0);
        let gmm = GaussianMixture::new(vec![c.clone()], 0.0).unwrap();
        let lv = shared_level_search(&gmm, 0.9).unwrap();
        assert!((lv.per_component[0] - 0.9).abs() < 1e-6);
        let expected = gaussian_level(0.9, &c).unwrap();
        assert!((lv.shared_density_level - expected).abs() / expected < 1e-5);
    }

    #[test]
    fn identical_components_share_level() {
        let gmm = GaussianMixture::new(vec![iso(&[0.0, 0.0], 1.0, 0.5), iso(&[10.0, 0.0], 1.0, 0.5)], 0.0).unwrap();
        let lv = shared_level_search(&gmm, 0.9).unwrap();
        assert!((lv.per_component[0] - 0.9).abs() < 1e-6);
        assert!((lv.per_component[1] - 0.9).abs() < 1e-6);
    }

    #[test]
    fn tight_component_gets_larger_share() {
        let gmm = GaussianMixture::new(vec![iso(&[0.0, 0.0], 1.0, 0.5), iso(&[30.0, 0.0], 100.0, 0.5)], 0.0).unwrap();
        let lv = shared_level_search(&gmm, 0.9).unwrap();
        assert!(lv.per_component[0] > lv.per_component[1]);
        assert!((lv.weighted_level(&gmm) - 0.9).abs() < LEVEL_SEARCH_TOL);
    }

    #[test]
    fn search_rejects_bad_targets() {
        let gmm = GaussianMixture::new(vec![iso(&[0.0], 1.0, 1.0)], 0.0).unwrap();
        for k in [0.0, 1.0, -0.1, 1.2] {
            assert!(shared_level_search(&gmm, k).is_err());
        }
    }

    #[test]
    fn region_membership() {
        let gmm = GaussianMixture::new(vec![iso(&[0.0, 0.0], 1.0, 1.0)], 0.0).unwrap();
        let lv = shared_level_search(&gmm, 0.9).unwrap();
        let r = lv.per_component_radius_sq[0];
        assert!(in_confidence_region(&DVector::from_vec(vec![0.0, 0.0]), &gmm, &lv).unwrap());
        let on = DVector::from_vec(vec![r.sqrt(), 0.0]);
        let mut exact = lv.clone();
        exact.per_component_radius_sq[0] = gmm.components()[0].mahalanobis_sq(&on);
        assert!(in_confidence_region(&on, &gmm, &exact).unwrap());
        let out = DVector::from_vec(vec![(r + 0.01).sqrt(), 0.0]);
        assert!(!in_confidence_region(&out, &gmm, &lv).unwrap());
        let clamped = ComponentLevels::all_clamped(1);
        assert!(!in_confidence_region(&DVector::zeros(2), &gmm, &clamped).unwrap());
    }
}

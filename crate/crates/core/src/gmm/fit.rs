use nalgebra::{DMatrix, DVector};

use super::{meanshift_cluster, ClusterAssignment, GaussianComponent, GaussianMixture};
use crate::error::{Error, Result};

/// Covariance floor `λ_min = 1e-6·B²` added to every fitted covariance.
pub fn regularization_floor(bandwidth: f64) -> f64 {
    1e-6 * bandwidth * bandwidth
}

/// Single hard-assignment EM step: per-cluster mass, mean, population
/// covariance (divisor `m_k`) plus `λ_min·I`, and weight `m_k / Σ m_j`.
///
/// Empty clusters are dropped.
pub fn cluster_statistics(
    samples: &[DVector<f64>],
    assignment: &ClusterAssignment,
    bandwidth: f64,
) -> Result<GaussianMixture> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    if assignment.mode_per_point.len() != samples.len() {
        return Err(Error::InvalidConfig(format!(
            "assignment covers {} of {} samples",
            assignment.mode_per_point.len(),
            samples.len()
        )));
    }
    let dim = samples[0].len();
    let k = assignment.modes.len();
    let mut mass = vec![0usize; k];
    let mut sums = vec![DVector::<f64>::zeros(dim); k];
    for (x, &m) in samples.iter().zip(&assignment.mode_per_point) {
        if m >= k {
            return Err(Error::InvalidConfig(format!("mode index {m} out of range")));
        }
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: x.len(),
            });
        }
        mass[m] += 1;
        sums[m] += x;
    }
    let means: Vec<DVector<f64>> = sums
        .iter()
        .zip(&mass)
        .map(|(s, &m)| if m > 0 { s / m as f64 } else { s.clone() })
        .collect();
    let mut scatter = vec![DMatrix::<f64>::zeros(dim, dim); k];
    for (x, &m) in samples.iter().zip(&assignment.mode_per_point) {
        let d = x - &means[m];
        scatter[m] += &d * d.transpose();
    }

    let floor = regularization_floor(bandwidth);
    let total: usize = mass.iter().sum();
    let mut components = Vec::with_capacity(k);
    for c in 0..k {
        if mass[c] == 0 {
            continue;
        }
        let m = mass[c] as f64;
        let cov = &scatter[c] / m + DMatrix::identity(dim, dim) * floor;
        components.push(GaussianComponent::with_mass(
            means[c].clone(),
            cov,
            m / total as f64,
            m,
        )?);
    }
    renormalize(&mut components);
    GaussianMixture::new(components, bandwidth)
}

// Guards the 1e-9 weight-sum invariant against accumulated rounding.
fn renormalize(components: &mut [GaussianComponent]) {
    let total: f64 = components.iter().map(|c| c.weight()).sum();
    for c in components.iter_mut() {
        let w = c.weight() / total;
        c.set_weight(w);
    }
}

/// Meanshift clustering followed by [`cluster_statistics`].
pub fn fit_mixture(samples: &[DVector<f64>], bandwidth: f64) -> Result<GaussianMixture> {
    let assignment = meanshift_cluster(samples, bandwidth)?;
    cluster_statistics(samples, &assignment, bandwidth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn two_point_cluster_by_hand() {
        let samples = vec![v(&[0.0, 0.0]), v(&[2.0, 0.0])];
        let a = ClusterAssignment {
            mode_per_point: vec![0, 0],
            modes: vec![v(&[1.0, 0.0])],
        };
        let b = 0.5;
        let lam = regularization_floor(b);
        let gmm = cluster_statistics(&samples, &a, b).unwrap();
        let c = &gmm.components()[0];
        assert_eq!(c.mass(), 2.0);
        assert_eq!(c.mean(), &v(&[1.0, 0.0]));
        let expected = DMatrix::from_row_slice(2, 2, &[1.0 + lam, 0.0, 0.0, lam]);
        assert!((c.covariance() - expected).norm() < 1e-15);
        assert_eq!(c.weight(), 1.0);
    }

    #[test]
    fn single_point_cluster_is_pure_regularization() {
        let samples = vec![v(&[3.0, -1.0])];
        let a = ClusterAssignment {
            mode_per_point: vec![0],
            modes: vec![v(&[3.0, -1.0])],
        };
        let gmm = cluster_statistics(&samples, &a, 2.0).unwrap();
        let c = &gmm.components()[0];
        assert_eq!(c.mean(), &samples[0]);
        let lam = regularization_floor(2.0);
        assert!((c.covariance() - DMatrix::identity(2, 2) * lam).norm() < 1e-18);
    }

    #[test]
    fn weights_follow_mass_ratio() {
        let samples = vec![v(&[0.0]), v(&[0.1]), v(&[0.2]), v(&[9.0])];
        let a = ClusterAssignment {
            mode_per_point: vec![0, 0, 0, 1],
            modes: vec![v(&[0.1]), v(&[9.0])],
        };
        let gmm = cluster_statistics(&samples, &a, 1.0).unwrap();
        let w: Vec<f64> = gmm.weights().collect();
        assert_eq!(w, vec![0.75, 0.25]);
    }

    #[test]
    fn empty_clusters_are_dropped() {
        let samples = vec![v(&[0.0]), v(&[1.0])];
        let a = ClusterAssignment {
            mode_per_point: vec![0, 2],
            modes: vec![v(&[0.0]), v(&[5.0]), v(&[1.0])],
        };
        let gmm = cluster_statistics(&samples, &a, 1.0).unwrap();
        assert_eq!(gmm.len(), 2);
    }

    #[test]
    fn fitted_samples_have_finite_mahalanobis_to_own_cluster() {
        let samples: Vec<_> = (0..60)
            .map(|i| {
                let t = i as f64;
                v(&[(t * 0.7).sin() * 2.0 + (i % 3) as f64 * 4.0, (t * 1.1).cos()])
            })
            .collect();
        let a = meanshift_cluster(&samples, 0.6).unwrap();
        let gmm = cluster_statistics(&samples, &a, 0.6).unwrap();
        assert_eq!(gmm.len(), a.num_clusters());
        for (x, &m) in samples.iter().zip(&a.mode_per_point) {
            assert!(gmm.components()[m].mahalanobis_sq(x).is_finite());
        }
    }

    proptest! {
        #[test]
        fn weights_sum_to_one_and_order_invariant(
            raw in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40),
            labels in prop::collection::vec(0usize..4, 40),
            shift in 0usize..40,
        ) {
            let samples: Vec<_> = raw.iter().map(|&(a, b)| v(&[a, b])).collect();
            let n = samples.len();
            let a = ClusterAssignment {
                mode_per_point: labels[..n].to_vec(),
                modes: vec![v(&[0.0, 0.0]); 4],
            };
            let gmm = cluster_statistics(&samples, &a, 1.0).unwrap();
            let total: f64 = gmm.weights().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);

            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let ps: Vec<_> = perm.iter().map(|&i| samples[i].clone()).collect();
            let pa = ClusterAssignment {
                mode_per_point: perm.iter().map(|&i| a.mode_per_point[i]).collect(),
                modes: a.modes.clone(),
            };
            let g2 = cluster_statistics(&ps, &pa, 1.0).unwrap();
            for (c1, c2) in gmm.components().iter().zip(g2.components()) {
                prop_assert!((c1.mean() - c2.mean()).amax() < 1e-12);
                prop_assert!((c1.covariance() - c2.covariance()).amax() < 1e-12);
                prop_assert_eq!(c1.weight(), c2.weight());
            }
        }
    }
}

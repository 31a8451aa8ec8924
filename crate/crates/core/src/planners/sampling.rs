use nalgebra::DVector;
use rand::Rng;

use crate::gmm::{sample_mixture, GaussianMixture};
use crate::robots::JointLimits;

const MAX_REDRAWS: usize = 100;

pub fn uniform_sample<R: Rng + ?Sized>(limits: &JointLimits, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(limits.len(), limits.iter().map(|[lo, hi]| rng.gen_range(*lo..=*hi)))
}

/// Draws from the free-space mixture, redrawing samples outside the joint
/// limits up to 100 times before falling back to a uniform draw.
pub fn gmm_biased_sample<R: Rng + ?Sized>(
    gmm_free: &GaussianMixture,
    limits: &JointLimits,
    rng: &mut R,
) -> DVector<f64> {
    for _ in 0..=MAX_REDRAWS {
        let q = sample_mixture(gmm_free, rng);
        let inside = q.iter().zip(limits).all(|(v, [lo, hi])| *v >= *lo && *v <= *hi);
        if inside {
            return q;
        }
    }
    uniform_sample(limits, rng)
}

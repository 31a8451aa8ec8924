//! Gaussian mixture models of collision and free configuration space.
//!
//! Models are learned in two stages: Meanshift clustering with a Gaussian
//! kernel picks the number of components from a bandwidth, then one hard
//! EM step turns every cluster into a weighted Gaussian.

mod fit;
mod meanshift;
mod samples;

pub use fit::{cluster_statistics, fit_mixture, regularization_floor};
pub use meanshift::{meanshift_cluster, ClusterAssignment, MeanshiftParams};
pub use samples::LabeledSampleSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{all_finite, is_symmetric, SpdRoots, SYMMETRY_TOL};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One weighted Gaussian `w·N(μ, Σ)`.
///
/// The covariance roots are computed once at construction and reused by
/// density evaluation, sampling and corridor construction.
#[derive(Debug, Clone)]
pub struct GaussianComponent {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    weight: f64,
    mass: f64,
    roots: SpdRoots,
}

impl GaussianComponent {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>, weight: f64) -> Result<Self> {
        Self::with_mass(mean, covariance, weight, 0.0)
    }

    pub fn with_mass(mean: DVector<f64>, covariance: DMatrix<f64>, weight: f64, mass: f64) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::InvalidMixture("zero-dimensional component".into()));
        }
        check_dim(n, covariance.nrows())?;
        check_dim(n, covariance.ncols())?;
        if !all_finite(&mean) {
            return Err(Error::NonFinite("mean"));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidMixture(format!("bad weight {weight}")));
        }
        if !is_symmetric(&covariance, SYMMETRY_TOL) {
            return Err(Error::InvalidMixture("covariance is not symmetric".into()));
        }
        let roots = SpdRoots::new(&covariance, 0.0)?;
        let covariance = (&covariance + covariance.transpose()) * 0.5;
        Ok(GaussianComponent {
            mean,
            covariance,
            weight,
            mass,
            roots,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.roots.inv
    }

    /// Symmetric positive-definite `Σ^{-1/2}`.
    pub fn inv_sqrt(&self) -> &DMatrix<f64> {
        &self.roots.inv_sqrt
    }

    /// Symmetric positive-definite `Σ^{1/2}`.
    pub fn sqrt(&self) -> &DMatrix<f64> {
        &self.roots.sqrt
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.roots.min_eigenvalue
    }

    /// `ln det(2πΣ)`.
    pub fn log_det_2pi(&self) -> f64 {
        self.dim() as f64 * LN_2PI + self.roots.log_det
    }

    /// Log of the density at the mean.
    pub fn log_peak_density(&self) -> f64 {
        -0.5 * self.log_det_2pi()
    }

    /// `(x-μ)ᵀ Σ⁻¹ (x-μ)`, evaluated as `‖Σ^{-1/2}(x-μ)‖²`.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> f64 {
        (&self.roots.inv_sqrt * (x - &self.mean)).norm_squared()
    }

    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_peak_density() - 0.5 * self.mahalanobis_sq(x)
    }

    pub(crate) fn set_weight(&mut self, weight: f64) {
        self.weight = weight;
    }
}

/// Weighted list of Gaussians sharing one dimension.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    components: Vec<GaussianComponent>,
    dim: usize,
    bandwidth: f64,
}

impl GaussianMixture {
    pub const WEIGHT_SUM_TOL: f64 = 1e-9;

    pub fn new(components: Vec<GaussianComponent>, bandwidth: f64) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidMixture("no components".into()))?;
        let dim = first.dim();
        for c in &components {
            check_dim(dim, c.dim())?;
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > Self::WEIGHT_SUM_TOL {
            return Err(Error::InvalidMixture(format!("weights sum to {total}, expected 1")));
        }
        Ok(GaussianMixture {
            components,
            dim,
            bandwidth,
        })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Meanshift bandwidth the model was fitted with (0 when built by hand).
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().map(|c| c.weight)
    }
}

/// `det(2πΣ)^{-1/2} exp(-½ (x-μ)ᵀΣ⁻¹(x-μ))`.
pub fn gaussian_pdf(x: &DVector<f64>, component: &GaussianComponent) -> Result<f64> {
    check_dim(component.dim(), x.len())?;
    Ok(component.log_pdf(x).exp())
}

/// `Σ_k w_k N(x; μ_k, Σ_k)`.
pub fn mixture_pdf(x: &DVector<f64>, gmm: &GaussianMixture) -> Result<f64> {
    check_dim(gmm.dim(), x.len())?;
    Ok(gmm.components.iter().map(|c| c.weight * c.log_pdf(x).exp()).sum())
}

/// Draws one point: a component index with probability `w_k`, then
/// `μ_k + Σ_k^{1/2} z` with `z ~ N(0, I)`.
pub fn sample_mixture<R: Rng + ?Sized>(gmm: &GaussianMixture, rng: &mut R) -> DVector<f64> {
    let k = pick_component(gmm, rng.gen::<f64>());
    let c = &gmm.components[k];
    let z = DVector::from_fn(gmm.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    &c.mean + c.sqrt() * z
}

fn pick_component(gmm: &GaussianMixture, u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, c) in gmm.components.iter().enumerate() {
        if c.weight <= 0.0 {
            continue;
        }
        acc += c.weight;
        last_positive = k;
        if u < acc {
            return k;
        }
    }
    last_positive
}

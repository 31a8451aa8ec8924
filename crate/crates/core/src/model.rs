//! Learned models and their JSON file format.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::confidence::{shared_level_search, ComponentLevels};
use crate::corridor::DEFAULT_EPSILON;
use crate::error::{Error, Result};
use crate::gmm::{fit_mixture, GaussianComponent, GaussianMixture, LabeledSampleSet};

/// A mixture paired with its confidence levels, ready for corridor building.
#[derive(Debug, Clone)]
pub struct GuideModel {
    pub gmm: GaussianMixture,
    pub levels: ComponentLevels,
}

impl GuideModel {
    pub fn new(gmm: GaussianMixture, kappa: f64) -> Result<Self> {
        let levels = shared_level_search(&gmm, kappa)?;
        Ok(GuideModel { gmm, levels })
    }

    /// Model with every component clamped off: corridors are unbounded.
    pub fn inactive(gmm: GaussianMixture) -> Self {
        let levels = ComponentLevels::all_clamped(gmm.len());
        GuideModel { gmm, levels }
    }
}

/// Everything a planner may consult besides the scenario itself.
#[derive(Debug, Clone)]
pub struct LearnedModels {
    pub kappa: f64,
    pub epsilon: f64,
    pub bandwidth: f64,
    /// Configuration-space obstacle model.
    pub collision: Option<GuideModel>,
    /// Configuration-space free-space mixture for biased sampling.
    pub free: Option<GaussianMixture>,
    /// End-effector-space obstacle model.
    pub workspace: Option<GuideModel>,
}

impl Default for LearnedModels {
    fn default() -> Self {
        LearnedModels {
            kappa: 0.9,
            epsilon: DEFAULT_EPSILON,
            bandwidth: 0.0,
            collision: None,
            free: None,
            workspace: None,
        }
    }
}

impl LearnedModels {
    /// Fits the collision and free mixtures of a labeled sample set.
    /// A class with no samples leaves its model absent.
    pub fn fit(samples: &LabeledSampleSet, bandwidth: f64, kappa: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::NoSamples);
        }
        let coll = samples.class(true);
        let free = samples.class(false);
        let collision = if coll.is_empty() {
            None
        } else {
            Some(GuideModel::new(fit_mixture(&coll, bandwidth)?, kappa)?)
        };
        let free = if free.is_empty() {
            None
        } else {
            Some(fit_mixture(&free, bandwidth)?)
        };
        Ok(LearnedModels {
            kappa,
            bandwidth,
            collision,
            free,
            ..Default::default()
        })
    }

    /// Adds an end-effector-space obstacle model fitted on the colliding
    /// points of `samples`.
    pub fn fit_workspace(&mut self, samples: &LabeledSampleSet, bandwidth: f64) -> Result<()> {
        let coll = samples.class(true);
        if coll.is_empty() {
            return Err(Error::NoSamples);
        }
        self.workspace = Some(GuideModel::new(fit_mixture(&coll, bandwidth)?, self.kappa)?);
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            kappa: self.kappa,
            epsilon: self.epsilon,
            bandwidth: self.bandwidth,
            collision: self.collision.as_ref().map(GuideFile::from_model),
            free: self.free.as_ref().map(MixtureFile::from_mixture),
            workspace: self.workspace.as_ref().map(GuideFile::from_model),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        Ok(LearnedModels {
            kappa: file.kappa,
            epsilon: file.epsilon,
            bandwidth: file.bandwidth,
            collision: file.collision.map(GuideFile::into_model).transpose()?,
            free: file.free.map(MixtureFile::into_mixture).transpose()?,
            workspace: file.workspace.map(GuideFile::into_model).transpose()?,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json()? + "\n").map_err(|e| Error::io(path.as_ref(), e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentFile {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Row-major `dim × dim`.
    pub covariance: Vec<f64>,
    #[serde(default)]
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureFile {
    pub dim: usize,
    #[serde(default)]
    pub bandwidth: f64,
    pub components: Vec<ComponentFile>,
}

impl MixtureFile {
    pub fn from_mixture(gmm: &GaussianMixture) -> Self {
        MixtureFile {
            dim: gmm.dim(),
            bandwidth: gmm.bandwidth(),
            components: gmm
                .components()
                .iter()
                .map(|c| ComponentFile {
                    weight: c.weight(),
                    mean: c.mean().iter().copied().collect(),
                    covariance: c.covariance().transpose().iter().copied().collect(),
                    mass: c.mass(),
                })
                .collect(),
        }
    }

    pub fn into_mixture(self) -> Result<GaussianMixture> {
        let n = self.dim;
        let components = self
            .components
            .into_iter()
            .map(|c| {
                if c.mean.len() != n || c.covariance.len() != n * n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: c.mean.len(),
                    });
                }
                GaussianComponent::with_mass(
                    DVector::from_vec(c.mean),
                    DMatrix::from_row_slice(n, n, &c.covariance),
                    c.weight,
                    c.mass,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        GaussianMixture::new(components, self.bandwidth)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GuideFile {
    #[serde(flatten)]
    pub mixture: MixtureFile,
    pub levels: ComponentLevels,
}

impl GuideFile {
    fn from_model(m: &GuideModel) -> Self {
        GuideFile {
            mixture: MixtureFile::from_mixture(&m.gmm),
            levels: m.levels.clone(),
        }
    }

    fn into_model(self) -> Result<GuideModel> {
        let gmm = self.mixture.into_mixture()?;
        if self.levels.len() != gmm.len() {
            return Err(Error::DimensionMismatch {
                expected: gmm.len(),
                actual: self.levels.len(),
            });
        }
        Ok(GuideModel {
            gmm,
            levels: self.levels,
        })
    }
}

/// On-disk model document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub kappa: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub bandwidth: f64,
    #[serde(default)]
    pub collision: Option<GuideFile>,
    #[serde(default)]
    pub free: Option<MixtureFile>,
    #[serde(default)]
    pub workspace: Option<GuideFile>,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_preserves_mixture() {
        let mut set = LabeledSampleSet::new(2);
        for i in 0..40 {
            let t = i as f64 * 0.05;
            set.push(DVector::from_vec(vec![t, 0.3 * t]), i % 3 == 0).unwrap();
        }
        let models = LearnedModels::fit(&set, 0.3, 0.9).unwrap();
        let back = LearnedModels::from_json(&models.to_json().unwrap()).unwrap();
        let (a, b) = (models.collision.unwrap(), back.collision.unwrap());
        assert_eq!(a.levels, b.levels);
        for (x, y) in a.gmm.components().iter().zip(b.gmm.components()) {
            assert_eq!(x.mean(), y.mean());
            assert_eq!(x.covariance(), y.covariance());
            assert_eq!(x.weight(), y.weight());
        }
        assert_eq!(back.free.unwrap().len(), models.free.unwrap().len());
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(matches!(
            LearnedModels::fit(&LabeledSampleSet::new(2), 0.1, 0.9),
            Err(Error::NoSamples)
        ));
    }
}

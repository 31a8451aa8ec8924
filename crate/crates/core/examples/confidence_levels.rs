//! Chi-squared quantiles, the shared density level of a mixture and a
//! Monte-Carlo check of how much mass the union of confidence ellipsoids
//! holds.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use safecorridor::confidence::{chi2_inv_cdf, in_confidence_region, shared_level_search};
use safecorridor::gmm::{sample_mixture, GaussianComponent, GaussianMixture};

fn main() -> safecorridor::Result<()> {
    for dof in 1..=3 {
        println!("chi2 quantile at 0.9 with {dof} dof: {:.6}", chi2_inv_cdf(dof, 0.9)?);
    }

    let comp = |m: [f64; 2], cov: [f64; 4], w: f64| {
        GaussianComponent::new(DVector::from_row_slice(&m), DMatrix::from_row_slice(2, 2, &cov), w)
    };
    let gmm = GaussianMixture::new(
        vec![
            comp([0.0, 0.0], [0.04, 0.0, 0.0, 0.01], 0.5)?,
            comp([0.5, 0.2], [0.02, 0.01, 0.01, 0.03], 0.3)?,
            comp([-0.6, 0.4], [0.09, 0.0, 0.0, 0.09], 0.2)?,
        ],
        0.1,
    )?;
    let levels = shared_level_search(&gmm, 0.9)?;
    println!("overall level {:.6}", levels.overall_level);
    for (k, (kappa, r2)) in levels
        .per_component
        .iter()
        .zip(&levels.per_component_radius_sq)
        .enumerate()
    {
        println!("  component {k}: kappa {kappa:.4}, squared radius {r2:.4}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 100_000;
    let mut inside = 0;
    for _ in 0..n {
        if in_confidence_region(&sample_mixture(&gmm, &mut rng), &gmm, &levels)? {
            inside += 1;
        }
    }
    println!("mixture mass inside the union region: {:.4}", inside as f64 / n as f64);
    Ok(())
}

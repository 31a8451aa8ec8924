use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use safecorridor::confidence::{chi2_cdf, chi2_inv_cdf, shared_level_search};
use safecorridor::corridor::{build_corridor, project_onto_corridor, ActiveSetCache};
use safecorridor::gmm::{GaussianComponent, GaussianMixture};

fn mixture(raw: &[(f64, f64, f64, f64, f64)]) -> GaussianMixture {
    let total: f64 = raw.iter().map(|r| r.4).sum();
    let comps = raw
        .iter()
        .map(|&(mx, my, sx, sy, w)| {
            GaussianComponent::new(
                DVector::from_row_slice(&[mx, my]),
                DMatrix::from_diagonal(&DVector::from_row_slice(&[sx, sy])),
                w / total,
            )
            .unwrap()
        })
        .collect();
    GaussianMixture::new(comps, 0.1).unwrap()
}

fn component() -> impl Strategy<Value = (f64, f64, f64, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.01..0.5f64, 0.01..0.5f64, 0.1..1.0f64)
}

proptest! {
    #[test]
    fn chi2_cdf_matches_statrs(dof in 1u32..12, t in 0.0..40.0f64) {
        let oracle = ChiSquared::new(dof as f64).unwrap().cdf(t);
        prop_assert!((chi2_cdf(dof, t).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn chi2_inverse_matches_statrs(dof in 1u32..12, kappa in 0.01..0.999f64) {
        let oracle = ChiSquared::new(dof as f64).unwrap().inverse_cdf(kappa);
        let ours = chi2_inv_cdf(dof, kappa).unwrap();
        prop_assert!((ours - oracle).abs() < 1e-6 * (1.0 + oracle));
    }

    #[test]
    fn projection_is_feasible_idempotent_and_closest(
        raw in prop::collection::vec(component(), 1..6),
        anchor in prop::array::uniform2(-3.0..3.0f64),
        target in prop::array::uniform2(-5.0..5.0f64),
    ) {
        let gmm = mixture(&raw);
        let levels = shared_level_search(&gmm, 0.9).unwrap();
        let a = DVector::from_row_slice(&anchor);
        let t = DVector::from_row_slice(&target);
        let c = build_corridor(&a, &gmm, &levels, 0.01).unwrap();
        let mut cache = ActiveSetCache::new();
        let p = project_onto_corridor(&c, &t, &mut cache).unwrap().point;
        prop_assert!(c.slacks(&p).iter().all(|&s| s >= -1e-9));
        // the anchor is feasible, so the projection is at least as close
        prop_assert!((&p - &t).norm() <= (&a - &t).norm() + 1e-9);
        let again = project_onto_corridor(&c, &p, &mut ActiveSetCache::new()).unwrap().point;
        prop_assert!((again - &p).amax() < 1e-9);
    }

    #[test]
    fn interior_targets_are_unchanged(
        raw in prop::collection::vec(component(), 1..6),
        anchor in prop::array::uniform2(-3.0..3.0f64),
        frac in 0.0..1.0f64,
    ) {
        let gmm = mixture(&raw);
        let levels = shared_level_search(&gmm, 0.9).unwrap();
        let a = DVector::from_row_slice(&anchor);
        let c = build_corridor(&a, &gmm, &levels, 0.01).unwrap();
        // points between the anchor and its own projection of a far target are inside
        let far = &a + DVector::from_row_slice(&[3.0, 1.0]);
        let edge = project_onto_corridor(&c, &far, &mut ActiveSetCache::new()).unwrap().point;
        let inside = &a + (&edge - &a) * (0.99 * frac);
        let p = project_onto_corridor(&c, &inside, &mut ActiveSetCache::new()).unwrap();
        prop_assert_eq!(p.point, inside);
        prop_assert!(p.active.is_empty());
    }
}

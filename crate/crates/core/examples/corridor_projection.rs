//! Builds a safe corridor around a point between two obstacle Gaussians and
//! projects a few targets onto it.

use nalgebra::{DMatrix, DVector};
use safecorridor::confidence::{in_confidence_region, shared_level_search};
use safecorridor::corridor::{build_corridor, project_onto_corridor, ActiveSetCache};
use safecorridor::gmm::{GaussianComponent, GaussianMixture};

fn main() -> safecorridor::Result<()> {
    let comp =
        |x: f64, y: f64| GaussianComponent::new(DVector::from_row_slice(&[x, y]), DMatrix::identity(2, 2) * 0.02, 0.5);
    let gmm = GaussianMixture::new(vec![comp(1.0, 0.6)?, comp(1.0, -0.6)?], 0.1)?;
    let levels = shared_level_search(&gmm, 0.9)?;

    let anchor = DVector::from_row_slice(&[0.0, 0.0]);
    let corridor = build_corridor(&anchor, &gmm, &levels, 0.01)?;
    println!("corridor faces:");
    for h in corridor.halfspaces() {
        println!(
            "  n = ({:+.3}, {:+.3}), offset {:.3}, from component {}",
            h.normal[0], h.normal[1], h.offset, h.source_component
        );
    }

    let mut cache = ActiveSetCache::new();
    for target in [[2.0, 0.0], [2.0, 1.0], [0.5, 0.3], [1.0, -1.5]] {
        let t = DVector::from_row_slice(&target);
        let p = project_onto_corridor(&corridor, &t, &mut cache)?;
        println!(
            "({:+.2}, {:+.2}) -> ({:+.3}, {:+.3})  active {:?}  min slack {:+.1e}  in obstacle region {}",
            target[0],
            target[1],
            p.point[0],
            p.point[1],
            p.active,
            corridor.slacks(&p.point).into_iter().fold(f64::INFINITY, f64::min),
            in_confidence_region(&p.point, &gmm, &levels)?
        );
    }
    Ok(())
}

use std::collections::HashMap;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Meanshift tuning, all expressed relative to the bandwidth `B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanshiftParams {
    pub bandwidth: f64,
    /// Ascent stops once a step moves less than `tol_factor * B`.
    pub tol_factor: f64,
    pub max_iterations: usize,
    /// Converged modes closer than `merge_factor * B` are merged.
    pub merge_factor: f64,
    /// Samples farther than `cutoff_factor * B` get zero kernel weight;
    /// `f64::INFINITY` keeps the full kernel.
    pub cutoff_factor: f64,
}

impl MeanshiftParams {
    pub fn new(bandwidth: f64) -> Self {
        MeanshiftParams {
            bandwidth,
            tol_factor: 1e-4,
            max_iterations: 500,
            merge_factor: 0.5,
            cutoff_factor: 4.0,
        }
    }
}

/// Hard cluster membership: `mode_per_point[i]` indexes into `modes`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub mode_per_point: Vec<usize>,
    pub modes: Vec<DVector<f64>>,
}

impl ClusterAssignment {
    pub fn num_clusters(&self) -> usize {
        self.modes.len()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.modes.len()];
        for &m in &self.mode_per_point {
            sizes[m] += 1;
        }
        sizes
    }
}

/// Gaussian-kernel Meanshift with `B` as the kernel standard deviation.
///
/// Every sample ascends from its own location; converged locations are
/// merged greedily in sample order, and each sample is then assigned to the
/// surviving mode nearest to where it converged.
pub fn meanshift_cluster(points: &[DVector<f64>], bandwidth: f64) -> Result<ClusterAssignment> {
    meanshift_with(points, &MeanshiftParams::new(bandwidth))
}

pub fn meanshift_with(points: &[DVector<f64>], params: &MeanshiftParams) -> Result<ClusterAssignment> {
    if points.is_empty() {
        return Err(Error::NoSamples);
    }
    let b = params.bandwidth;
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {b}")));
    }
    let dim = points[0].len();
    let mut flat = Vec::with_capacity(points.len() * dim);
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("sample {i}")));
        }
        flat.extend(p.iter().copied());
    }

    let tol = params.tol_factor * b;
    let inv_two_b2 = 0.5 / (b * b);
    let cutoff = params.cutoff_factor * b;
    let grid = (cutoff.is_finite() && dim <= MAX_GRID_DIM).then(|| Grid::new(&flat, dim, cutoff));
    let kernel = Kernel {
        flat: &flat,
        dim,
        inv_two_b2,
        cutoff_sq: cutoff * cutoff,
        grid: grid.as_ref(),
    };
    let converged: Vec<Vec<f64>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut y = flat[i * dim..(i + 1) * dim].to_vec();
            kernel.ascend(&mut y, tol, params.max_iterations);
            y
        })
        .collect();

    let merge_sq = (params.merge_factor * b).powi(2);
    let mut modes: Vec<Vec<f64>> = Vec::new();
    for y in &converged {
        if !modes.iter().any(|m| dist_sq(m, y) < merge_sq) {
            modes.push(y.clone());
        }
    }
    let mode_per_point = converged
        .iter()
        .map(|y| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, m) in modes.iter().enumerate() {
                let d = dist_sq(m, y);
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            best
        })
        .collect();
    Ok(ClusterAssignment {
        mode_per_point,
        modes: modes.into_iter().map(DVector::from_vec).collect(),
    })
}

/// Grids in more dimensions visit too many neighbor cells to pay off.
const MAX_GRID_DIM: usize = 4;

/// Uniform grid with cell side equal to the kernel cutoff, so every sample
/// within the cutoff of a point lies in the 3ⁿ surrounding cells.
struct Grid {
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl Grid {
    fn new(flat: &[f64], dim: usize, cell: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (j, p) in flat.chunks_exact(dim).enumerate() {
            cells.entry(Self::key(p, cell)).or_default().push(j);
        }
        Grid { cell, cells }
    }

    fn key(p: &[f64], cell: f64) -> Vec<i64> {
        p.iter().map(|v| (v / cell).floor() as i64).collect()
    }

    /// Sample indices in the cells around `y`, ascending.
    fn candidates(&self, y: &[f64], out: &mut Vec<usize>) {
        out.clear();
        let base = Self::key(y, self.cell);
        let dim = base.len();
        let mut offset = vec![-1i64; dim];
        let mut key = vec![0i64; dim];
        loop {
            for d in 0..dim {
                key[d] = base[d] + offset[d];
            }
            if let Some(v) = self.cells.get(&key) {
                out.extend_from_slice(v);
            }
            let mut d = 0;
            while d < dim && offset[d] == 1 {
                offset[d] = -1;
                d += 1;
            }
            if d == dim {
                break;
            }
            offset[d] += 1;
        }
        out.sort_unstable();
    }
}

struct Kernel<'a> {
    flat: &'a [f64],
    dim: usize,
    inv_two_b2: f64,
    cutoff_sq: f64,
    grid: Option<&'a Grid>,
}

impl Kernel<'_> {
    fn ascend(&self, y: &mut [f64], tol: f64, max_iter: usize) {
        let dim = self.dim;
        let n = self.flat.len() / dim;
        let mut idx: Vec<usize> = Vec::new();
        let mut d2: Vec<(usize, f64)> = Vec::new();
        let mut next = vec![0.0; dim];
        for _ in 0..max_iter {
            match self.grid {
                Some(g) => g.candidates(y, &mut idx),
                None => {
                    idx.clear();
                    idx.extend(0..n);
                }
            }
            d2.clear();
            let mut min_d2 = f64::INFINITY;
            for &j in &idx {
                let d = dist_sq(&self.flat[j * dim..(j + 1) * dim], y);
                if d <= self.cutoff_sq {
                    d2.push((j, d));
                    min_d2 = min_d2.min(d);
                }
            }
            if d2.is_empty() {
                break;
            }
            next.iter_mut().for_each(|v| *v = 0.0);
            let mut total = 0.0;
            for &(j, d) in &d2 {
                // shifted by the nearest sample so the largest weight is exactly 1
                let w = (-(d - min_d2) * self.inv_two_b2).exp();
                if w == 0.0 {
                    continue;
                }
                total += w;
                for (acc, x) in next.iter_mut().zip(&self.flat[j * dim..(j + 1) * dim]) {
                    *acc += w * x;
                }
            }
            next.iter_mut().for_each(|v| *v /= total);
            let shift = dist_sq(&next, y).sqrt();
            y.copy_from_slice(&next);
            if shift < tol {
                break;
            }
        }
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[[f64; 2]]) -> Vec<DVector<f64>> {
        raw.iter().map(|p| DVector::from_row_slice(p)).collect()
    }

    #[test]
    fn close_points_form_one_cluster() {
        let a = meanshift_cluster(&pts(&[[0.0, 0.0], [0.1, 0.0]]), 1.0).unwrap();
        assert_eq!(a.num_clusters(), 1);
        assert_eq!(a.mode_per_point, vec![0, 0]);
    }

    #[test]
    fn far_points_stay_separate() {
        // exp(-100²/2) underflows far below 1e-100, so neither point moves.
        assert!((-(100.0f64 * 100.0) / 2.0).exp() < 1e-100);
        let a = meanshift_cluster(&pts(&[[0.0, 0.0], [100.0, 0.0]]), 1.0).unwrap();
        assert_eq!(a.num_clusters(), 2);
        assert_eq!(a.cluster_sizes(), vec![1, 1]);
        assert_eq!(a.modes[0], DVector::from_vec(vec![0.0, 0.0]));
        assert_eq!(a.modes[1], DVector::from_vec(vec![100.0, 0.0]));
    }

    #[test]
    fn single_point_is_a_fixed_point() {
        for b in [0.01, 1.0, 1e6] {
            let a = meanshift_cluster(&pts(&[[3.0, 4.0]]), b).unwrap();
            assert_eq!(a.modes, vec![DVector::from_vec(vec![3.0, 4.0])]);
        }
    }

    #[test]
    fn huge_bandwidth_gives_one_cluster() {
        let raw: Vec<[f64; 2]> = (0..40)
            .map(|i| [(i as f64 * 0.37).sin() * 5.0, (i as f64 * 1.3).cos() * 3.0])
            .collect();
        let a = meanshift_cluster(&pts(&raw), 1e4).unwrap();
        assert_eq!(a.num_clusters(), 1);
    }

    #[test]
    fn errors() {
        assert!(matches!(meanshift_cluster(&[], 1.0), Err(Error::NoSamples)));
        let bad = vec![DVector::from_vec(vec![f64::NAN, 0.0])];
        assert!(matches!(meanshift_cluster(&bad, 1.0), Err(Error::InvalidSample(_))));
    }

    #[test]
    fn two_blobs() {
        let mut raw = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.01;
            raw.push([t, -t]);
            raw.push([5.0 + t, 5.0 + t]);
        }
        let a = meanshift_cluster(&pts(&raw), 0.5).unwrap();
        assert_eq!(a.num_clusters(), 2);
        assert_eq!(a.cluster_sizes(), vec![20, 20]);
        for (i, &m) in a.mode_per_point.iter().enumerate() {
            assert_eq!(m, i % 2);
        }
    }
}

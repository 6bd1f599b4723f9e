//! Overlapping patch extraction, its adjoint (additive aggregation), and
//! the diagonal normalization used by the coefficient-image update.
//!
//! Extraction operators are plain sub-cube copies on a deterministic
//! lattice: origins sweep row-major ((o1, o2, o3), o3 fastest) with stride
//! steps, and the final origin on each axis is clamped inward so every
//! voxel is covered by at least one patch and every patch holds real data.

use alloc::format;
use alloc::vec::Vec;

use crate::error::Error;
use crate::tensor::Cube;
use crate::Result;

/// Deterministic description of the patch lattice over a source cube.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchLayout {
    pub patch_dims: (usize, usize, usize),
    pub stride: (usize, usize, usize),
    pub origins: Vec<(usize, usize, usize)>,
    pub source_dims: (usize, usize, usize),
}

impl PatchLayout {
    pub fn patch_count(&self) -> usize {
        self.origins.len()
    }
}

/// Per-voxel weights `w = 1 / (1 + lambda * c)` where `c` counts covering
/// patches; this is the exact inverse of `I + lambda * sum_i RiᵀRi`,
/// which is diagonal for extraction operators.
#[derive(Debug, Clone)]
pub struct CoverageWeights {
    pub lambda: f64,
    pub weights: Cube,
}

fn axis_origins(n: usize, p: usize, s: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut t = 0usize;
    loop {
        if t + p >= n {
            v.push(n - p);
            break;
        }
        v.push(t);
        t += s;
    }
    v
}

/// Plans the full-coverage lattice. Patch count is
/// `prod_j ceil((n_j - p_j)/s_j + 1)`.
pub fn plan_patches(
    source_dims: (usize, usize, usize),
    patch_dims: (usize, usize, usize),
    stride: (usize, usize, usize),
) -> Result<PatchLayout> {
    let n = [source_dims.0, source_dims.1, source_dims.2];
    let p = [patch_dims.0, patch_dims.1, patch_dims.2];
    let s = [stride.0, stride.1, stride.2];
    for a in 0..3 {
        if p[a] == 0 {
            return Err(Error::Dims(format!("patch dims must be positive, got {patch_dims:?}")));
        }
        if p[a] > n[a] {
            return Err(Error::Dims(format!(
                "patch {patch_dims:?} exceeds source {source_dims:?} on axis {a}"
            )));
        }
        if s[a] == 0 {
            return Err(Error::Param(format!("stride must be >= 1, got {stride:?}")));
        }
        // A stride beyond the patch size would leave coverage gaps.
        if s[a] > p[a] {
            return Err(Error::Param(format!(
                "stride {stride:?} exceeds patch dims {patch_dims:?} on axis {a}"
            )));
        }
    }
    let o1 = axis_origins(n[0], p[0], s[0]);
    let o2 = axis_origins(n[1], p[1], s[1]);
    let o3 = axis_origins(n[2], p[2], s[2]);
    let mut origins = Vec::with_capacity(o1.len() * o2.len() * o3.len());
    for &a in &o1 {
        for &b in &o2 {
            for &c in &o3 {
                origins.push((a, b, c));
            }
        }
    }
    Ok(PatchLayout {
        patch_dims,
        stride,
        origins,
        source_dims,
    })
}

/// Copies out every patch in lattice order.
pub fn extract(g: &Cube, layout: &PatchLayout) -> Result<Vec<Cube>> {
    if g.dims() != layout.source_dims {
        return Err(Error::Dims(format!(
            "extract: cube dims {:?} do not match layout source {:?}",
            g.dims(),
            layout.source_dims
        )));
    }
    layout
        .origins
        .iter()
        .map(|&o| extract_one(g, layout.patch_dims, o))
        .collect()
}

fn extract_one(g: &Cube, pd: (usize, usize, usize), o: (usize, usize, usize)) -> Result<Cube> {
    let mut patch = Cube::zeros(pd)?;
    for k in 0..pd.2 {
        for j in 0..pd.1 {
            for i in 0..pd.0 {
                patch.set(i, j, k, g.get(o.0 + i, o.1 + j, o.2 + k));
            }
        }
    }
    Ok(patch)
}

/// Adjoint of [`extract`]: sums patches back at their origins. Overlaps
/// add (no averaging); the accumulation order is the fixed lattice order,
/// so results do not depend on how callers parallelize upstream work.
pub fn aggregate(patches: &[Cube], layout: &PatchLayout) -> Result<Cube> {
    if patches.len() != layout.patch_count() {
        return Err(Error::Dims(format!(
            "aggregate: {} patches for a layout of {}",
            patches.len(),
            layout.patch_count()
        )));
    }
    let pd = layout.patch_dims;
    let mut out = Cube::zeros(layout.source_dims)?;
    for (patch, &o) in patches.iter().zip(&layout.origins) {
        if patch.dims() != pd {
            return Err(Error::Dims(format!(
                "aggregate: patch dims {:?} do not match layout {:?}",
                patch.dims(),
                pd
            )));
        }
        for k in 0..pd.2 {
            for j in 0..pd.1 {
                for i in 0..pd.0 {
                    let idx = out.index(o.0 + i, o.1 + j, o.2 + k);
                    out.data_mut()[idx] += patch.get(i, j, k);
                }
            }
        }
    }
    Ok(out)
}

/// Per-voxel number of covering patches, as a cube of counts.
pub fn coverage_counts(layout: &PatchLayout) -> Cube {
    let pd = layout.patch_dims;
    let mut out = Cube::zeros(layout.source_dims).expect("layout dims positive");
    for &o in &layout.origins {
        for k in 0..pd.2 {
            for j in 0..pd.1 {
                for i in 0..pd.0 {
                    let idx = out.index(o.0 + i, o.1 + j, o.2 + k);
                    out.data_mut()[idx] += 1.0;
                }
            }
        }
    }
    out
}

/// Exact inverse of `I + lambda * sum_i RiᵀRi` as a Hadamard weighting.
pub fn coverage_weights(layout: &PatchLayout, lambda: f64) -> Result<CoverageWeights> {
    if !(lambda >= 0.0) {
        return Err(Error::Param(format!(
            "coverage_weights: lambda must be >= 0, got {lambda}"
        )));
    }
    let counts = coverage_counts(layout);
    let weights = counts.map(|c| 1.0 / (1.0 + lambda * c));
    Ok(CoverageWeights { lambda, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_cube(dims: (usize, usize, usize), seed: u64) -> Cube {
        let mut rng = SplitMix64::new(seed);
        let n = dims.0 * dims.1 * dims.2;
        Cube::from_vec(dims, (0..n).map(|_| rng.next_f64() - 0.5).collect()).unwrap()
    }

    #[test]
    fn single_patch_layout_when_patch_fills_source() {
        let l = plan_patches((9, 9, 9), (9, 9, 9), (4, 4, 4)).unwrap();
        assert_eq!(l.origins, alloc::vec![(0, 0, 0)]);
    }

    #[test]
    fn final_origin_is_clamped_to_boundary() {
        let l = plan_patches((12, 9, 9), (9, 9, 9), (6, 6, 6)).unwrap();
        assert_eq!(l.origins, alloc::vec![(0, 0, 0), (3, 0, 0)]);
    }

    #[test]
    fn patch_count_matches_closed_form() {
        for (n, p, s) in [(24, 9, 6), (10, 9, 6), (15, 9, 6), (9, 9, 1), (7, 3, 2)] {
            let l = plan_patches((n, 9, 9), (p, 9, 9), (s, 6, 6)).unwrap();
            let expect = (n - p + s - 1) / s + 1; // ceil((n-p)/s) + 1
            assert_eq!(l.origins.len(), expect, "n={n} p={p} s={s}");
        }
    }

    #[test]
    fn every_voxel_is_covered() {
        for seed in 0..20u64 {
            let mut rng = SplitMix64::new(seed);
            let n = (
                3 + rng.next_below(10),
                3 + rng.next_below(10),
                3 + rng.next_below(10),
            );
            let p = (
                1 + rng.next_below(n.0),
                1 + rng.next_below(n.1),
                1 + rng.next_below(n.2),
            );
            let s = (
                1 + rng.next_below(p.0),
                1 + rng.next_below(p.1),
                1 + rng.next_below(p.2),
            );
            let l = plan_patches(n, p, s).unwrap();
            let counts = coverage_counts(&l);
            assert!(counts.data().iter().all(|&c| c >= 1.0), "uncovered voxel");
        }
    }

    #[test]
    fn plan_rejects_oversized_patch_and_zero_stride() {
        assert!(matches!(
            plan_patches((4, 4, 4), (5, 4, 4), (1, 1, 1)),
            Err(Error::Dims(_))
        ));
        assert!(matches!(
            plan_patches((4, 4, 4), (2, 2, 2), (0, 1, 1)),
            Err(Error::Param(_))
        ));
    }

    #[test]
    fn extract_of_single_patch_layout_is_the_cube() {
        let g = random_cube((5, 4, 3), 1);
        let l = plan_patches(g.dims(), g.dims(), (1, 1, 1)).unwrap();
        let ps = extract(&g, &l).unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].data(), g.data());
    }

    #[test]
    fn constant_cube_extracts_constant_patches() {
        let g = Cube::from_vec((6, 6, 4), alloc::vec![0.25; 144]).unwrap();
        let l = plan_patches(g.dims(), (3, 3, 2), (2, 2, 2)).unwrap();
        for p in extract(&g, &l).unwrap() {
            assert!(p.data().iter().all(|&x| x == 0.25));
        }
    }

    #[test]
    fn overlapping_voxels_appear_in_both_patches() {
        let g = random_cube((12, 9, 9), 3);
        let l = plan_patches((12, 9, 9), (9, 9, 9), (6, 6, 6)).unwrap();
        let ps = extract(&g, &l).unwrap();
        // Patches at origins (0,0,0) and (3,0,0) share rows 3..9.
        for k in 0..9 {
            for j in 0..9 {
                for i in 3..9 {
                    assert_eq!(ps[0].get(i, j, k), ps[1].get(i - 3, j, k));
                }
            }
        }
    }

    #[test]
    fn aggregate_of_extract_scales_by_coverage() {
        let g = random_cube((10, 8, 6), 4);
        let l = plan_patches(g.dims(), (4, 4, 3), (3, 3, 2)).unwrap();
        let agg = aggregate(&extract(&g, &l).unwrap(), &l).unwrap();
        let counted = g.hadamard(&coverage_counts(&l)).unwrap();
        let diff = agg.sub(&counted).unwrap().fro_norm();
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn aggregate_of_exact_tiling_is_identity() {
        let g = random_cube((8, 6, 4), 5);
        let l = plan_patches(g.dims(), (4, 3, 2), (4, 3, 2)).unwrap();
        let agg = aggregate(&extract(&g, &l).unwrap(), &l).unwrap();
        assert_eq!(agg.data(), g.data());
    }

    #[test]
    fn aggregate_of_zero_patches_is_zero() {
        let l = plan_patches((5, 5, 5), (3, 3, 3), (2, 2, 2)).unwrap();
        let zeros: Vec<Cube> = (0..l.patch_count())
            .map(|_| Cube::zeros((3, 3, 3)).unwrap())
            .collect();
        let agg = aggregate(&zeros, &l).unwrap();
        assert!(agg.data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn extract_aggregate_are_adjoint() {
        let l = plan_patches((7, 6, 5), (3, 3, 2), (2, 2, 2)).unwrap();
        for seed in 0..10u64 {
            let g = random_cube((7, 6, 5), 100 + seed);
            let qs: Vec<Cube> = (0..l.patch_count())
                .map(|i| random_cube((3, 3, 2), 500 + seed * 37 + i as u64))
                .collect();
            let lhs: f64 = extract(&g, &l)
                .unwrap()
                .iter()
                .zip(&qs)
                .map(|(p, q)| p.dot(q).unwrap())
                .sum();
            let rhs = g.dot(&aggregate(&qs, &l).unwrap()).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "seed {seed}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn weights_are_the_exact_operator_inverse() {
        let l = plan_patches((9, 8, 7), (4, 3, 3), (3, 2, 2)).unwrap();
        let lambda = 0.7;
        let w = coverage_weights(&l, lambda).unwrap();
        for seed in 0..5u64 {
            let g = random_cube((9, 8, 7), 300 + seed);
            // (I + lambda * aggregate(extract(.))) then Hadamard by w.
            let op = g
                .add(&aggregate(&extract(&g, &l).unwrap(), &l).unwrap().scale(lambda))
                .unwrap();
            let back = op.hadamard(&w.weights).unwrap();
            let diff = back.sub(&g).unwrap().fro_norm();
            assert!(diff < 1e-12, "seed {seed}: diff {diff}");
        }
    }

    #[test]
    fn weight_values_follow_coverage() {
        let l = plan_patches((9, 9, 9), (9, 9, 9), (6, 6, 6)).unwrap();
        let w0 = coverage_weights(&l, 0.0).unwrap();
        assert!(w0.weights.data().iter().all(|&x| x == 1.0));
        let w1 = coverage_weights(&l, 1.0).unwrap();
        assert!(w1.weights.data().iter().all(|&x| x == 0.5));

        let l2 = plan_patches((12, 9, 9), (9, 9, 9), (6, 6, 6)).unwrap();
        let w2 = coverage_weights(&l2, 1.0).unwrap();
        let counts = coverage_counts(&l2);
        for (w, c) in w2.weights.data().iter().zip(counts.data()) {
            let want = if *c == 1.0 { 0.5 } else { 1.0 / 3.0 };
            assert!((w - want).abs() < 1e-15);
        }
        assert!(matches!(coverage_weights(&l2, -1.0), Err(Error::Param(_))));
    }
}

//! Self-contained dense linear algebra: one-sided Jacobi SVD, power
//! iteration for operator norms, and a unitary mode-3 DFT.
//!
//! The matrices arising here are small (subspace bases of a few hundred
//! rows, patch slices of side ~9), so a dependency-free Jacobi sweep is
//! both fast enough and bit-stable across platforms.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::Error;
use crate::tensor::{Cube, Matrix};
use crate::Result;

/// Convergence tolerance for Jacobi rotations (relative to column norms).
const JACOBI_TOL: f64 = 1e-14;
/// Sweep cap; 12x12 matrices converge in well under ten sweeps.
const JACOBI_MAX_SWEEPS: usize = 60;
/// Singular values below `s_max * RANK_TOL` get replacement basis columns
/// instead of normalized (noise-dominated) ones.
const RANK_TOL: f64 = 1e-13;

/// Thin singular value decomposition `input = U · diag(s) · Vᵀ`.
///
/// `u` has orthonormal columns, `v` likewise, `s` is sorted descending and
/// non-negative. The sign convention (largest-magnitude entry of each `u`
/// column positive, first occurrence on ties) makes results byte-stable.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdResult {
    /// `U · diag(s) · Vᵀ`.
    pub fn reconstruct(&self) -> Result<Matrix> {
        let k = self.s.len();
        let mut us = self.u.clone();
        for c in 0..k {
            let col = &mut us.data_mut()[self.u.rows() * c..self.u.rows() * (c + 1)];
            for x in col {
                *x *= self.s[c];
            }
        }
        us.matmul(&self.v.transpose())
    }
}

/// One-sided Jacobi SVD, deterministic sweep order and sign convention.
pub fn svd(m: &Matrix) -> Result<SvdResult> {
    m.ensure_finite("svd input")?;
    if m.rows() >= m.cols() {
        svd_tall(m)
    } else {
        let r = svd_tall(&m.transpose())?;
        Ok(SvdResult {
            u: r.v,
            s: r.s,
            v: r.u,
        })
    }
}

fn svd_tall(m: &Matrix) -> Result<SvdResult> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut v = Matrix::identity(cols)?;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in (p + 1)..cols {
                let (alpha, beta, gamma) = column_gram(&a, p, q);
                if gamma.abs() <= JACOBI_TOL * libm::sqrt(alpha * beta) || gamma == 0.0 {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; order descending (stable).
    let mut norms: Vec<f64> = (0..cols)
        .map(|c| libm::sqrt(a.col(c).iter().map(|x| x * x).sum()))
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let s_max = norms[order[0]];
    let mut u = Matrix::zeros(rows, cols)?;
    let mut v_sorted = Matrix::zeros(cols, cols)?;
    let mut filled: Vec<usize> = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let norm = norms[src];
        if norm > s_max * RANK_TOL && norm > 0.0 {
            for r in 0..rows {
                u.set(r, dst, a.get(r, src) / norm);
            }
        } else {
            // Numerically zero direction: complete the basis instead of
            // normalizing noise.
            fill_orthonormal_column(&mut u, dst, &filled);
            norms[src] = norm.max(0.0);
        }
        for r in 0..cols {
            v_sorted.set(r, dst, v.get(r, src));
        }
        filled.push(dst);
    }
    let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();

    // Sign convention: largest-magnitude entry of each U column positive.
    for c in 0..cols {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for r in 0..rows {
            let av = u.get(r, c).abs();
            if av > best_abs {
                best_abs = av;
                best = r;
            }
        }
        if u.get(best, c) < 0.0 {
            for r in 0..rows {
                let x = u.get(r, c);
                u.set(r, c, -x);
            }
            for r in 0..cols {
                let x = v_sorted.get(r, c);
                v_sorted.set(r, c, -x);
            }
        }
    }

    Ok(SvdResult { u, s, v: v_sorted })
}

fn column_gram(a: &Matrix, p: usize, q: usize) -> (f64, f64, f64) {
    let cp = a.col(p);
    let cq = a.col(q);
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = 0.0;
    for (x, y) in cp.iter().zip(cq) {
        alpha += x * x;
        beta += y * y;
        gamma += x * y;
    }
    (alpha, beta, gamma)
}

fn rotate_columns(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = a.rows();
    for r in 0..rows {
        let x = a.get(r, p);
        let y = a.get(r, q);
        a.set(r, p, c * x - s * y);
        a.set(r, q, s * x + c * y);
    }
}

/// Writes into column `dst` a unit vector orthogonal to the columns listed
/// in `existing` (Gram-Schmidt over canonical basis candidates).
fn fill_orthonormal_column(u: &mut Matrix, dst: usize, existing: &[usize]) {
    let rows = u.rows();
    for cand in 0..rows {
        let mut col = vec![0.0; rows];
        col[cand] = 1.0;
        for &e in existing {
            let dot: f64 = (0..rows).map(|r| col[r] * u.get(r, e)).sum();
            for (r, item) in col.iter_mut().enumerate() {
                *item -= dot * u.get(r, e);
            }
        }
        let norm = libm::sqrt(col.iter().map(|x| x * x).sum());
        if norm > 0.5 {
            for (r, item) in col.iter().enumerate() {
                u.set(r, dst, item / norm);
            }
            return;
        }
    }
    // Unreachable: at most rows-1 columns exist, so some candidate survives.
    panic!("orthonormal completion failed");
}

/// Power-iteration estimate of the largest singular value of a linear
/// operator on cubes, times a 1.05 safety factor. Returns 0 for the zero
/// operator. Deterministic given `seed`.
pub fn spectral_norm(
    apply: impl Fn(&Cube) -> Cube,
    apply_adjoint: impl Fn(&Cube) -> Cube,
    probe_dims: (usize, usize, usize),
    iters: usize,
    seed: u64,
) -> f64 {
    let mut rng = crate::rng::SplitMix64::new(seed);
    let n = probe_dims.0 * probe_dims.1 * probe_dims.2;
    let mut v = Cube::from_vec(probe_dims, (0..n).map(|_| rng.next_f64() - 0.5).collect())
        .expect("probe dims must be positive");
    let nv = v.fro_norm();
    if nv == 0.0 {
        return 0.0;
    }
    v = v.scale(1.0 / nv);

    let mut sigma = 0.0;
    for _ in 0..iters.max(1) {
        let w = apply(&v);
        sigma = w.fro_norm();
        if sigma == 0.0 {
            return 0.0;
        }
        let z = apply_adjoint(&w);
        let nz = z.fro_norm();
        if nz == 0.0 {
            return 0.0;
        }
        v = z.scale(1.0 / nz);
    }
    sigma * 1.05
}

// ---------------------------------------------------------------------------
// Complex pieces: mode-3 DFT and the per-slice machinery behind the tensor
// SVT. The complex SVD never leaves this module.
// ---------------------------------------------------------------------------

/// Dense 3-D tensor of complex samples, same storage order as [`Cube`].
#[derive(Debug, Clone)]
pub struct ComplexCube {
    dims: (usize, usize, usize),
    data: Vec<Complex64>,
}

impl ComplexCube {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        let n = dims.0 * dims.1 * dims.2;
        Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn from_real(t: &Cube) -> Self {
        Self {
            dims: t.dims(),
            data: t.data().iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        self.data[self.index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Complex64) {
        let idx = self.index(i, j, k);
        self.data[idx] = v;
    }

    pub fn fro_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn max_imag_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()))
    }

    /// Drops imaginary parts. Callers must check `max_imag_abs` first.
    pub fn into_real(self) -> Cube {
        Cube::from_vec(self.dims, self.data.iter().map(|z| z.re).collect())
            .expect("dims preserved")
    }
}

/// Unitary DFT along mode 3 applied to every tube `t[i, j, :]`.
/// Both directions carry the 1/sqrt(n3) factor, so the transform is an
/// isometry and `dft(dft(t), inverse) == t`.
pub fn dft_mode3(t: &ComplexCube, inverse: bool) -> ComplexCube {
    let (n1, n2, n3) = t.dims();
    let scale = 1.0 / libm::sqrt(n3 as f64);
    let sign = if inverse { 1.0 } else { -1.0 };
    // Twiddle table for exponents mod n3.
    let tw: Vec<Complex64> = (0..n3)
        .map(|m| {
            let ang = sign * 2.0 * core::f64::consts::PI * m as f64 / n3 as f64;
            Complex64::new(libm::cos(ang), libm::sin(ang))
        })
        .collect();
    let mut out = ComplexCube::zeros(t.dims());
    for j in 0..n2 {
        for i in 0..n1 {
            for f in 0..n3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n3 {
                    acc += t.get(i, j, k) * tw[(f * k) % n3];
                }
                out.set(i, j, f, acc * scale);
            }
        }
    }
    out
}

/// Forward/inverse unitary mode-3 DFT of a real cube.
pub fn dft_mode3_real(t: &Cube, inverse: bool) -> ComplexCube {
    dft_mode3(&ComplexCube::from_real(t), inverse)
}

/// Column-major complex matrix used only by the tensor SVT path.
#[derive(Debug, Clone)]
pub(crate) struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + n * i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r + self.rows * c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r + self.rows * c] = v;
    }
}

/// One-sided Jacobi factorization of a complex matrix: on return `a`'s
/// columns are mutually orthogonal (a = U·diag(s)) and `v` holds the
/// accumulated right factor, so `input = a · vᴴ`.
fn complex_jacobi(a: &mut CMatrix, v: &mut CMatrix) {
    let cols = a.cols;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in (p + 1)..cols {
                let mut alpha = 0.0f64;
                let mut beta = 0.0f64;
                let mut gamma = Complex64::new(0.0, 0.0);
                for r in 0..a.rows {
                    let x = a.get(r, p);
                    let y = a.get(r, q);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                let g = gamma.norm();
                if g <= JACOBI_TOL * libm::sqrt(alpha * beta) || g == 0.0 {
                    continue;
                }
                // Phase-align column q so the 2x2 Gram block becomes real,
                // then apply a real Jacobi rotation.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + libm::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let pc = phase.conj();
                for r in 0..a.rows {
                    let x = a.get(r, p);
                    let y = a.get(r, q) * pc;
                    a.set(r, p, c * x - s * y);
                    a.set(r, q, s * x + c * y);
                }
                for r in 0..v.rows {
                    let x = v.get(r, p);
                    let y = v.get(r, q) * pc;
                    v.set(r, p, c * x - s * y);
                    v.set(r, q, s * x + c * y);
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Singular values of a complex matrix (unsorted).
pub(crate) fn complex_singular_values(m: &CMatrix) -> Vec<f64> {
    let mut a = m.clone();
    let mut v = CMatrix::identity(m.cols);
    complex_jacobi(&mut a, &mut v);
    (0..a.cols)
        .map(|c| {
            libm::sqrt(
                (0..a.rows)
                    .map(|r| a.get(r, c).norm_sqr())
                    .sum::<f64>(),
            )
        })
        .collect()
}

/// Soft-thresholds the singular values of a complex matrix:
/// `U · diag(max(s - tau, 0)) · Vᴴ`.
pub(crate) fn complex_svt(m: &CMatrix, tau: f64) -> CMatrix {
    let mut a = m.clone();
    let mut v = CMatrix::identity(m.cols);
    complex_jacobi(&mut a, &mut v);
    // Scale each column of a (= u_j * s_j) by max(s - tau, 0)/s, then
    // multiply by vᴴ.
    for c in 0..a.cols {
        let s = libm::sqrt(
            (0..a.rows)
                .map(|r| a.get(r, c).norm_sqr())
                .sum::<f64>(),
        );
        let f = if s > 0.0 { (s - tau).max(0.0) / s } else { 0.0 };
        for r in 0..a.rows {
            let x = a.get(r, c);
            a.set(r, c, x * f);
        }
    }
    // out = a · vᴴ
    let mut out = CMatrix::zeros(m.rows, m.cols);
    for c in 0..m.cols {
        for k in 0..a.cols {
            let b = v.get(c, k).conj();
            if b.norm_sqr() == 0.0 {
                continue;
            }
            for r in 0..m.rows {
                let cur = out.get(r, c);
                out.set(r, c, cur + a.get(r, k) * b);
            }
        }
    }
    out
}

/// Error helper shared by SVD call sites.
pub fn require_finite_scalar(x: f64, name: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Numeric(format!("{name} must be finite, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = SplitMix64::new(seed);
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.next_f64() - 0.5).collect())
            .unwrap()
    }

    #[test]
    fn svd_of_diagonal_matrix() {
        let m = Matrix::from_vec(2, 2, vec![3.0, 0.0, 0.0, 1.0]).unwrap();
        let r = svd(&m).unwrap();
        assert!((r.s[0] - 3.0).abs() < 1e-12);
        assert!((r.s[1] - 1.0).abs() < 1e-12);
        // Already diagonal: U and V are the identity under the sign rule.
        for c in 0..2 {
            for row in 0..2 {
                let want = if row == c { 1.0 } else { 0.0 };
                assert!((r.u.get(row, c) - want).abs() < 1e-12);
                assert!((r.v.get(row, c) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_of_permutation_has_unit_singular_values() {
        let m = Matrix::from_vec(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = svd(&m).unwrap();
        assert!((r.s[0] - 1.0).abs() < 1e-12);
        assert!((r.s[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_of_zero_matrix_keeps_orthonormal_factors() {
        let m = Matrix::zeros(3, 2).unwrap();
        let r = svd(&m).unwrap();
        assert_eq!(r.s, vec![0.0, 0.0]);
        assert!(r.u.orthogonality_defect() < 1e-12);
        assert!(r.v.orthogonality_defect() < 1e-12);
    }

    #[test]
    fn svd_rejects_non_finite_input() {
        let m = Matrix::from_vec(1, 2, vec![1.0, f64::INFINITY]).unwrap();
        assert!(matches!(svd(&m), Err(Error::Numeric(_))));
    }

    #[test]
    fn svd_invariants_on_random_matrices() {
        for seed in 0..100 {
            let mut rng = SplitMix64::new(seed);
            let rows = 1 + rng.next_below(12);
            let cols = 1 + rng.next_below(12);
            let m = random_matrix(rows, cols, seed * 7 + 1);
            let r = svd(&m).unwrap();
            assert!(r.u.orthogonality_defect() < 1e-10, "U defect seed {seed}");
            assert!(r.v.orthogonality_defect() < 1e-10, "V defect seed {seed}");
            let back = r.reconstruct().unwrap();
            let mut err = 0.0f64;
            for (a, b) in back.data().iter().zip(m.data()) {
                err += (a - b) * (a - b);
            }
            let err = libm::sqrt(err);
            assert!(err < 1e-8 * m.fro_norm().max(1.0), "recon err {err} seed {seed}");
            for w in r.s.windows(2) {
                assert!(w[0] >= w[1]);
            }
            assert!(r.s.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn svd_is_deterministic() {
        let m = random_matrix(8, 5, 3);
        let a = svd(&m).unwrap();
        let b = svd(&m).unwrap();
        assert_eq!(a.u.data(), b.u.data());
        assert_eq!(a.s, b.s);
        assert_eq!(a.v.data(), b.v.data());
    }

    #[test]
    fn spectral_norm_of_scaled_identity() {
        let est = spectral_norm(
            |c| c.scale(2.0),
            |c| c.scale(2.0),
            (3, 3, 3),
            50,
            1,
        );
        assert!((est - 2.1).abs() < 1e-6, "est {est}");
    }

    #[test]
    fn spectral_norm_of_zero_operator() {
        let est = spectral_norm(
            |c| c.scale(0.0),
            |c| c.scale(0.0),
            (2, 2, 2),
            10,
            1,
        );
        assert_eq!(est, 0.0);
    }

    #[test]
    fn spectral_norm_of_diagonal_operator() {
        // Pointwise multiply by [1, 5] along a 1x1x2 cube: top singular
        // value 5.
        let d = Cube::from_vec((1, 1, 2), vec![1.0, 5.0]).unwrap();
        let dd = d.clone();
        let est = spectral_norm(
            move |c| c.hadamard(&d).unwrap(),
            move |c| c.hadamard(&dd).unwrap(),
            (1, 1, 2),
            50,
            9,
        );
        assert!((est - 5.25).abs() < 1e-4, "est {est}");
    }

    #[test]
    fn spectral_norm_tracks_true_svd_value() {
        for seed in 0..20 {
            let m = random_matrix(8, 8, 1000 + seed);
            let truth = svd(&m).unwrap().s[0];
            let mm = m.clone();
            let mt = m.transpose();
            let est = spectral_norm(
                move |c| {
                    let x = Matrix::from_vec(8, 1, c.data().to_vec()).unwrap();
                    let y = mm.matmul(&x).unwrap();
                    Cube::from_vec((8, 1, 1), y.data().to_vec()).unwrap()
                },
                move |c| {
                    let x = Matrix::from_vec(8, 1, c.data().to_vec()).unwrap();
                    let y = mt.matmul(&x).unwrap();
                    Cube::from_vec((8, 1, 1), y.data().to_vec()).unwrap()
                },
                (8, 1, 1),
                200,
                seed,
            );
            // Within [truth, 1.02 * 1.05 * truth].
            assert!(est >= truth * 0.9999, "seed {seed}: est {est} truth {truth}");
            assert!(est <= truth * 1.05 * 1.02, "seed {seed}: est {est} truth {truth}");
        }
    }

    #[test]
    fn dft_constant_tube_concentrates_in_dc() {
        let t = Cube::from_vec((1, 1, 4), vec![2.0; 4]).unwrap();
        let f = dft_mode3_real(&t, false);
        assert!((f.get(0, 0, 0) - Complex64::new(4.0, 0.0)).norm() < 1e-12);
        for k in 1..4 {
            assert!(f.get(0, 0, k).norm() < 1e-12);
        }
    }

    #[test]
    fn dft_two_point() {
        let t = Cube::from_vec((1, 1, 2), vec![3.0, 1.0]).unwrap();
        let f = dft_mode3_real(&t, false);
        let inv_sqrt2 = 1.0 / libm::sqrt(2.0);
        assert!((f.get(0, 0, 0).re - 4.0 * inv_sqrt2).abs() < 1e-12);
        assert!((f.get(0, 0, 1).re - 2.0 * inv_sqrt2).abs() < 1e-12);
        assert!(f.get(0, 0, 0).im.abs() < 1e-12);
        assert!(f.get(0, 0, 1).im.abs() < 1e-12);
    }

    #[test]
    fn dft_roundtrip_and_parseval() {
        let mut rng = SplitMix64::new(17);
        let t = Cube::from_vec((3, 3, 4), (0..36).map(|_| rng.next_f64() - 0.5).collect())
            .unwrap();
        let f = dft_mode3_real(&t, false);
        assert!((f.fro_norm() - t.fro_norm()).abs() < 1e-12);
        let back = dft_mode3(&f, true);
        assert!(back.max_imag_abs() < 1e-12);
        let b = back.into_real();
        let diff = b.sub(&t).unwrap().fro_norm();
        assert!(diff < 1e-12, "roundtrip err {diff}");
    }

    #[test]
    fn complex_svt_matches_real_path_on_real_input() {
        let m = random_matrix(5, 4, 21);
        let mut cm = CMatrix::zeros(5, 4);
        for c in 0..4 {
            for r in 0..5 {
                cm.set(r, c, Complex64::new(m.get(r, c), 0.0));
            }
        }
        let sv = complex_singular_values(&cm);
        let mut sv_sorted = sv.clone();
        sv_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let truth = svd(&m).unwrap().s;
        for (a, b) in sv_sorted.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let shrunk = complex_svt(&cm, 0.1);
        assert!(shrunk.data.iter().all(|z| z.im.abs() < 1e-12));
    }
}

//! Mode dictionaries and the Tucker apply/adjoint operators of the
//! patch data-fit term.
//!
//! The default dictionaries are orthonormal DCT-II bases (rows indexed by
//! frequency, first row constant `1/sqrt(n)`), one per mode. Schedules may
//! override them; loaded dictionaries are validated for shape only.

use alloc::format;

use crate::error::Error;
use crate::tensor::{mode_product, Cube, Matrix};
use crate::Result;

/// The three mode dictionaries, each square.
#[derive(Debug, Clone)]
pub struct DictionarySet {
    pub d1: Matrix,
    pub d2: Matrix,
    pub d3: Matrix,
}

impl DictionarySet {
    /// Orthonormal DCT-II dictionaries of the given sides.
    pub fn dct(p1: usize, p2: usize, p3: usize) -> Result<Self> {
        Ok(Self {
            d1: dct_basis(p1)?,
            d2: dct_basis(p2)?,
            d3: dct_basis(p3)?,
        })
    }

    pub fn identity(p1: usize, p2: usize, p3: usize) -> Result<Self> {
        Ok(Self {
            d1: Matrix::identity(p1)?,
            d2: Matrix::identity(p2)?,
            d3: Matrix::identity(p3)?,
        })
    }

    /// Shape-only validation of externally supplied dictionaries.
    pub fn from_matrices(d1: Matrix, d2: Matrix, d3: Matrix) -> Result<Self> {
        for (name, d) in [("d1", &d1), ("d2", &d2), ("d3", &d3)] {
            if d.rows() != d.cols() {
                return Err(Error::Dims(format!(
                    "dictionary {name} must be square, got {}x{}",
                    d.rows(),
                    d.cols()
                )));
            }
            d.ensure_finite(name)?;
        }
        Ok(Self { d1, d2, d3 })
    }

    /// Dictionary sides (equal to the patch dims they act on).
    pub fn sides(&self) -> (usize, usize, usize) {
        (self.d1.rows(), self.d2.rows(), self.d3.rows())
    }
}

/// Orthonormal DCT-II basis of size n x n;
/// entry (k, j) = s_k * cos(pi * (2j+1) * k / (2n)) with s_0 = sqrt(1/n)
/// and s_k = sqrt(2/n) otherwise.
pub fn dct_basis(n: usize) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::Dims("dct_basis: size must be >= 1".into()));
    }
    let mut m = Matrix::zeros(n, n)?;
    let s0 = libm::sqrt(1.0 / n as f64);
    let sk = libm::sqrt(2.0 / n as f64);
    for k in 0..n {
        let scale = if k == 0 { s0 } else { sk };
        for j in 0..n {
            let ang = core::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2.0 * n as f64);
            m.set(k, j, scale * libm::cos(ang));
        }
    }
    Ok(m)
}

/// Tucker product of a code cube with the dictionary set:
/// forward `b ×₁ D₁ ×₂ D₂ ×₃ D₃`, adjoint with the transposed matrices.
/// For orthogonal dictionaries adjoint ∘ forward is the identity.
pub fn tucker_apply(b: &Cube, dict: &DictionarySet, adjoint: bool) -> Result<Cube> {
    let (m1, m2, m3);
    let (d1, d2, d3) = if adjoint {
        m1 = dict.d1.transpose();
        m2 = dict.d2.transpose();
        m3 = dict.d3.transpose();
        (&m1, &m2, &m3)
    } else {
        (&dict.d1, &dict.d2, &dict.d3)
    };
    let t = mode_product(b, d1, 1)?;
    let t = mode_product(&t, d2, 2)?;
    mode_product(&t, d3, 3)
}

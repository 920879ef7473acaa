//! Symmetric/antisymmetric split, eigenvalue signature and rank
//! decompositions of the moment matrix `M = −JΦ`.

use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::linalg::{antisym_part, ensure_phase_dim, ensure_square, scale, sym_part, symmetric_eigen_desc, symmetry_residual, Mat, Vector};
use crate::{Error, Result};

/// Default relative band inside which an eigenvalue counts as zero.
pub const ZERO_EIG_TOL: f64 = 1e-9;

/// Sign counts `(m₊, m₋, m₀)` of the eigenvalues of a symmetric matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl Signature {
    pub fn rank(&self) -> usize {
        self.plus + self.minus
    }

    pub fn dim(&self) -> usize {
        self.plus + self.minus + self.zero
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.plus, self.minus, self.zero)
    }
}

/// `((M + Mᵗ)/2, (M − Mᵗ)/2)`.
pub fn split_sym_antisym(m: &Mat) -> Result<(Mat, Mat)> {
    ensure_square(m)?;
    Ok((sym_part(m), antisym_part(m)))
}

fn ensure_symmetric(m: &Mat, tol: f64) -> Result<()> {
    let residual = symmetry_residual(m);
    if residual > tol * scale(m) {
        return Err(Error::NotSymmetric { residual });
    }
    Ok(())
}

/// Eigenvalue sign counts; `|λ| ≤ tol · max(1, ‖M‖_F)` counts as zero.
pub fn signature_of(m: &Mat, tol: f64) -> Result<Signature> {
    ensure_square(m)?;
    ensure_symmetric(m, tol)?;
    let band = tol * scale(m);
    let (values, _) = symmetric_eigen_desc(&sym_part(m))?;
    let plus = values.iter().filter(|&&l| l > band).count();
    let minus = values.iter().filter(|&&l| l < -band).count();
    Ok(Signature { plus, minus, zero: values.len() - plus - minus })
}

/// Splits a symmetric `M` as `Σ yᵢyᵢᵗ − Σ zⱼzⱼᵗ` from its eigen-decomposition,
/// `yᵢ = √λ·v` for positive and `zⱼ = √(−λ)·v` for negative eigenvalues,
/// both in descending eigenvalue order. Eigenvalues inside the
/// [`ZERO_EIG_TOL`] band are dropped.
pub fn decompose_signature(m: &Mat) -> Result<(Vec<Vector>, Vec<Vector>)> {
    ensure_square(m)?;
    ensure_symmetric(m, ZERO_EIG_TOL)?;
    let band = ZERO_EIG_TOL * scale(m);
    let (values, vectors) = symmetric_eigen_desc(&sym_part(m))?;
    let mut ys = Vec::new();
    let mut zs = Vec::new();
    for (l, v) in values.into_iter().zip(vectors) {
        if l > band {
            ys.push(v * l.sqrt());
        } else if l < -band {
            zs.push(v * (-l).sqrt());
        }
    }
    // negative eigenvalues came out ascending in |λ|; keep descending |λ|
    zs.reverse();
    Ok((ys, zs))
}

/// `Σ yᵢyᵢᵗ − Σ zⱼzⱼᵗ` in dimension `dim`.
pub fn compose(dim: usize, ys: &[Vector], zs: &[Vector]) -> Result<Mat> {
    let mut m = Mat::zeros(dim, dim);
    for (v, sign) in ys.iter().map(|y| (y, 1.0)).chain(zs.iter().map(|z| (z, -1.0))) {
        if v.len() != dim {
            return Err(Error::Dimension { expected: dim, found: v.len() });
        }
        m.ger(sign, v, v, 1.0);
    }
    Ok(m)
}

/// `‖ΦᵗJ + JΦ‖_F`.
pub fn sp_residual(phi: &Mat) -> Result<f64> {
    let d = ensure_phase_dim(phi)?;
    let j = crate::linalg::standard_j(d / 2);
    Ok((phi.transpose() * &j + &j * phi).norm())
}

//! Dense linear algebra shared by the rest of the crate.
//!
//! Products with the standard symplectic matrix `J` are done as signed row or
//! column permutations, so they are exact in floating point.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use nalgebra::linalg::{balancing, Schur, SymmetricEigen, SVD};
use nalgebra::{Complex, DMatrix, DVector};
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

const MAX_ITER: usize = 10_000;

/// Block matrix `[[0, Iₙ], [−Iₙ, 0]]`.
pub fn standard_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, i + n)] = 1.0;
        j[(i + n, i)] = -1.0;
    }
    j
}

/// `J v` for a vector of even length.
pub fn j_apply(v: &Vector) -> Vector {
    let n = v.len() / 2;
    Vector::from_fn(v.len(), |i, _| if i < n { v[i + n] } else { -v[i - n] })
}

/// `J M`.
pub fn j_mul(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| if i < n { m[(i + n, j)] } else { -m[(i - n, j)] })
}

/// `M J`.
pub fn mul_j(m: &Mat) -> Mat {
    let n = m.ncols() / 2;
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| if j < n { -m[(i, j + n)] } else { m[(i, j - n)] })
}

pub fn ensure_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

pub fn ensure_phase_dim(m: &Mat) -> Result<usize> {
    let d = ensure_square(m)?;
    if d == 0 || d % 2 != 0 {
        return Err(Error::Dimension { expected: d + d % 2, found: d });
    }
    Ok(d)
}

pub fn sym_part(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn antisym_part(m: &Mat) -> Mat {
    (m - m.transpose()) * 0.5
}

/// `‖M − Mᵗ‖_F`.
pub fn symmetry_residual(m: &Mat) -> f64 {
    (m - m.transpose()).norm()
}

/// Relative scale `max(1, ‖M‖_F)` used by every tolerance in the crate.
pub fn scale(m: &Mat) -> f64 {
    m.norm().max(1.0)
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues in descending
/// order.
pub fn symmetric_eigen_desc(m: &Mat) -> Result<(Vec<f64>, Vec<Vector>)> {
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(Ordering::Equal));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect();
    Ok((values, vectors))
}

pub fn singular_values(m: &Mat) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    Ok(s)
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &Mat, rel_tol: f64) -> Result<usize> {
    let s = singular_values(m)?;
    let Some(&smax) = s.first() else { return Ok(0) };
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * smax).count())
}

/// Eigenvalues of a general real matrix, computed on the balanced matrix and
/// sorted by real part, then imaginary part. Real parts closer than
/// `1e-6 · max(1, ‖M‖)` compare as equal so that pairs `±iω` with rounding
/// noise in the real part keep a stable order.
pub fn sorted_spectrum(m: &Mat) -> Result<Vec<Complex<f64>>> {
    let d = ensure_square(m)?;
    if d == 0 {
        return Ok(Vec::new());
    }
    let tie = 1e-6 * scale(m);
    let mut balanced = m.clone();
    balancing::balance_parlett_reinsch(&mut balanced);
    let schur = Schur::try_new(balanced, f64::EPSILON, MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut eig: Vec<Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    // insertion sort: the comparator is not transitive across a tie band
    for i in 1..eig.len() {
        let mut k = i;
        while k > 0 && spectral_order(&eig[k], &eig[k - 1], tie) == Ordering::Less {
            eig.swap(k, k - 1);
            k -= 1;
        }
    }
    Ok(eig)
}

fn spectral_order(a: &Complex<f64>, b: &Complex<f64>, tie: f64) -> Ordering {
    if (a.re - b.re).abs() > tie {
        a.re.partial_cmp(&b.re).unwrap_or(Ordering::Equal)
    } else {
        a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal)
    }
}

/// Coefficients (ascending powers of λ) of `Π (rₖ − λ)`.
pub fn poly_from_roots(roots: &[Complex<f64>]) -> Vec<f64> {
    let mut c = vec![Complex::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k] += ck * r;
            next[k + 1] -= ck;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

/// Coefficients of `P(λ) = det(Φ − λI)` in ascending powers, expanded from
/// the eigenvalues of `Φ`.
pub fn characteristic_polynomial(phi: &Mat) -> Result<Vec<f64>> {
    Ok(poly_from_roots(&sorted_spectrum(phi)?))
}

/// Faddeev-LeVerrier recursion for `det(λI − Φ) = Σ cₖ λᵏ` and
/// `adj(λI − Φ) = Σ Bₖ λᵏ`. Returns `(c, B)` with `c.len() = N + 1` and
/// `B.len() = N`.
pub fn faddeev_leverrier(phi: &Mat) -> Result<(Vec<f64>, Vec<Mat>)> {
    let d = ensure_square(phi)?;
    let mut c = vec![0.0; d + 1];
    let mut b = vec![Mat::zeros(d, d); d];
    c[d] = 1.0;
    if d == 0 {
        return Ok((c, b));
    }
    b[d - 1] = Mat::identity(d, d);
    for k in (0..d).rev() {
        let pb = phi * &b[k];
        c[k] = -pb.trace() / (d - k) as f64;
        if k > 0 {
            b[k - 1] = pb + Mat::identity(d, d) * c[k];
        }
    }
    Ok((c, b))
}

/// Matrix exponential by scaling and squaring with the fixed [13/13] Padé
/// approximant (Higham 2005 coefficients).
pub fn expm(a: &Mat) -> Result<Mat> {
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371_920_351_148_152;

    let d = ensure_square(a)?;
    if d == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let norm1 = (0..d).map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Err(Error::NonFinite { t: 0.0 });
    }
    let s = if norm1 > THETA_13 { (norm1 / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a * 2.0.powi(-s);
    let id = Mat::identity(d, d);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9]) + &a6 * B[7] + &a4 * B[5] + &a2 * B[3] + &id * B[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8]) + &a6 * B[6] + &a4 * B[4] + &a2 * B[2] + &id * B[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::Singular)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn j_products_match_dense() {
        let j = standard_j(2);
        let m = Mat::from_fn(4, 4, |i, k| (i * 4 + k) as f64 - 3.5);
        assert_eq!(j_mul(&m), &j * &m);
        assert_eq!(mul_j(&m), &m * &j);
        let v = Vector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(j_apply(&v), &j * &v);
    }

    #[test]
    fn j_squares_to_minus_identity() {
        for n in 1..5 {
            let j = standard_j(n);
            assert_eq!(&j * &j, -Mat::identity(2 * n, 2 * n));
            assert_eq!(j.transpose(), -&j);
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 0.7;
        let e = expm(&(standard_j(1) * t)).unwrap();
        // exp(tJ) = [[cos t, sin t], [−sin t, cos t]]
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-15);
        assert_relative_eq!(e[(0, 1)], t.sin(), epsilon = 1e-15);
        assert_relative_eq!(e[(1, 0)], -t.sin(), epsilon = 1e-15);
    }

    #[test]
    fn expm_agrees_with_nalgebra_on_large_norm() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 4.0, -2.0, 0.5, -3.0, 7.0, 2.0, 1.0, 0.0]) * 3.0;
        let ours = expm(&a).unwrap();
        let theirs = a.exp();
        assert!((&ours - &theirs).norm() <= 1e-12 * theirs.norm());
    }

    #[test]
    fn faddeev_leverrier_matches_eigen_expansion() {
        let phi = Mat::from_row_slice(4, 4, &[0.3, 1.0, -2.0, 0.1, 0.4, 0.2, 0.5, -1.0, 1.5, 0.0, -0.7, 0.9, 0.2, 0.3, 0.3, 0.1]);
        let (c_fl, _) = faddeev_leverrier(&phi).unwrap();
        let c_eig = characteristic_polynomial(&phi).unwrap();
        // even dimension: det(Φ − λI) = det(λI − Φ)
        for (a, b) in c_fl.iter().zip(&c_eig) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
        assert_relative_eq!(c_fl[0], phi.determinant(), epsilon = 1e-12);
    }

    #[test]
    fn spectrum_of_j_is_plus_minus_i() {
        let s = sorted_spectrum(&standard_j(1)).unwrap();
        assert_relative_eq!(s[0].im, -1.0, epsilon = 1e-14);
        assert_relative_eq!(s[1].im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_of_rank_one() {
        let y = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(numerical_rank(&(&y * y.transpose()), 1e-10).unwrap(), 1);
        assert_eq!(numerical_rank(&Mat::zeros(3, 3), 1e-10).unwrap(), 0);
    }
}

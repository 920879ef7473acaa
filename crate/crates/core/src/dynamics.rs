//! Right-hand sides of the base system, the system in variations, and the
//! vector, matrix (two-system) and multivector forms.

use alloc::vec::Vec;

use log::warn;

use crate::linalg::{j_apply, j_mul, mul_j, scale, sym_part, symmetry_residual, Mat, Vector};
use crate::model::HamiltonianModel;
use crate::{Error, Result};

/// Relative tolerance on `‖ΦᵗJ + JΦ‖_F` for a state to count as a
/// two-system state.
pub const SP_TOL: f64 = 1e-9;

/// `(x, y) ∈ ℝ²ⁿ × ℝ²ⁿ`, the phase point of the vector form.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFormState {
    pub x: Vector,
    pub y: Vector,
}

/// `(x, Φ)` stored through the moment matrix `M = −JΦ`.
///
/// `Φ ∈ sp(2n, ℝ)` exactly when `M` is symmetric; asymmetric `M` are accepted
/// so that the antisymmetric part can be studied on its own.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoState {
    pub x: Vector,
    pub m: Mat,
}

impl TwoState {
    pub fn new(x: Vector, m: Mat) -> Self {
        Self { x, m }
    }

    pub fn from_phi(x: Vector, phi: &Mat) -> Self {
        Self { x, m: -j_mul(phi) }
    }

    /// `(x, 0)`.
    pub fn zero_phi(x: Vector) -> Self {
        let d = x.len();
        Self { x, m: Mat::zeros(d, d) }
    }

    /// `Φ = JM`.
    pub fn phi(&self) -> Mat {
        j_mul(&self.m)
    }

    /// `‖ΦᵗJ + JΦ‖_F`, which for `Φ = JM` equals `‖Mᵗ − M‖_F`.
    pub fn sp_residual(&self) -> f64 {
        symmetry_residual(&self.m)
    }

    /// Errors when the sp-residual exceeds `tol · max(1, ‖Φ‖_F)`.
    pub fn check_sp(&self, tol: f64) -> Result<()> {
        let residual = self.sp_residual();
        let tol = tol * scale(&self.m);
        if residual > tol {
            return Err(Error::SpResidual { residual, tol });
        }
        Ok(())
    }

    fn check(&self, model: &HamiltonianModel) -> Result<()> {
        check_len(model, &self.x)?;
        if self.m.nrows() != model.dim() || self.m.ncols() != model.dim() {
            return Err(Error::Dimension { expected: model.dim(), found: self.m.nrows().max(self.m.ncols()) });
        }
        if let Err(e) = self.check_sp(SP_TOL) {
            warn!("{e}; continuing");
        }
        Ok(())
    }
}

/// `(x, {yᵢ}, {zⱼ})` for the multivector form of signature `(m₊, m₋)` with
/// `m₊ = ys.len()`, `m₋ = zs.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiVectorState {
    pub x: Vector,
    pub ys: Vec<Vector>,
    pub zs: Vec<Vector>,
}

impl MultiVectorState {
    fn check(&self, model: &HamiltonianModel) -> Result<()> {
        check_len(model, &self.x)?;
        let r = self.ys.len() + self.zs.len();
        if r > model.dim() {
            return Err(Error::Dimension { expected: model.dim(), found: r });
        }
        self.ys.iter().chain(&self.zs).try_for_each(|v| check_len(model, v))
    }

    /// `Σ yᵢyᵢᵗ − Σ zⱼzⱼᵗ`.
    pub fn moment(&self) -> Mat {
        let d = self.x.len();
        let mut m = Mat::zeros(d, d);
        for y in &self.ys {
            m.ger(1.0, y, y, 1.0);
        }
        for z in &self.zs {
            m.ger(-1.0, z, z, 1.0);
        }
        m
    }
}

fn check_len(model: &HamiltonianModel, v: &Vector) -> Result<()> {
    if v.len() != model.dim() {
        return Err(Error::Dimension { expected: model.dim(), found: v.len() });
    }
    Ok(())
}

/// `ẋ = J H′(x)`.
pub fn base_rhs(model: &HamiltonianModel, x: &Vector) -> Result<Vector> {
    Ok(j_apply(&model.grad_h(x)?))
}

/// `ẏ = J H″(x) y`.
pub fn variational_rhs(model: &HamiltonianModel, x: &Vector, y: &Vector) -> Result<Vector> {
    check_len(model, y)?;
    Ok(j_apply(&(model.hess_h(x)? * y)))
}

/// `ẋ = J (H′ + ½ ∇ₓ tr(H″M))` for a symmetric moment `M`.
fn coupled_x_rhs(model: &HamiltonianModel, x: &Vector, m: &Mat) -> Result<Vector> {
    let g = model.grad_h(x)? + model.third_contract(x, m)? * 0.5;
    Ok(j_apply(&g))
}

/// Vector form: `ẋ = J(H + ½ yᵗH″y)′`, `ẏ = JH″y`.
pub fn vector_form_rhs(model: &HamiltonianModel, s: &VectorFormState) -> Result<VectorFormState> {
    check_len(model, &s.y)?;
    let x = coupled_x_rhs(model, &s.x, &(&s.y * s.y.transpose()))?;
    let y = variational_rhs(model, &s.x, &s.y)?;
    Ok(VectorFormState { x, y })
}

/// `A(x) = H″(x) J`.
pub fn lax_matrix(model: &HamiltonianModel, x: &Vector) -> Result<Mat> {
    Ok(mul_j(&model.hess_h(x)?))
}

/// Two-system: `ẋ = J(H − ½ tr(AΦ))′`, `Φ̇ = [A, Φ]`.
///
/// `tr(AΦ) = −tr(H″M)` and only the symmetric part of `M` enters it, so the
/// `x` equation uses `third_contract(x, sym(M))`. The returned derivative is
/// expressed as `Ṁ = −J Φ̇`.
pub fn two_system_rhs(model: &HamiltonianModel, s: &TwoState) -> Result<TwoState> {
    s.check(model)?;
    let x = coupled_x_rhs(model, &s.x, &sym_part(&s.m))?;
    let a = lax_matrix(model, &s.x)?;
    let phi = s.phi();
    let phi_dot = &a * &phi - &phi * &a;
    Ok(TwoState { x, m: -j_mul(&phi_dot) })
}

/// Canonical flow of `H(x) + Σ F(x, yᵢ) − Σ F(x, zⱼ)` under `J ⊕ … ⊕ J`.
pub fn multivector_rhs(model: &HamiltonianModel, s: &MultiVectorState) -> Result<MultiVectorState> {
    s.check(model)?;
    let x = coupled_x_rhs(model, &s.x, &s.moment())?;
    let jh = j_mul(&model.hess_h(&s.x)?);
    Ok(MultiVectorState {
        x,
        ys: s.ys.iter().map(|y| &jh * y).collect(),
        zs: s.zs.iter().map(|z| &jh * z).collect(),
    })
}

/// Base system and system in variations glued together without feedback.
pub fn naive_union_rhs(model: &HamiltonianModel, s: &VectorFormState) -> Result<VectorFormState> {
    Ok(VectorFormState { x: base_rhs(model, &s.x)?, y: variational_rhs(model, &s.x, &s.y)? })
}

/// `‖asym(D)‖_F` where `D` is the finite-difference Jacobian of
/// `(J⊕J)⁻¹ · naive_union_rhs` at `s`. The naive union is locally
/// Hamiltonian for `J⊕J` exactly when this vanishes.
pub fn hamiltonicity_defect(model: &HamiltonianModel, s: &VectorFormState) -> Result<f64> {
    let d = model.dim();
    check_len(model, &s.x)?;
    check_len(model, &s.y)?;
    // (J⊕J)⁻¹ = −(J⊕J)
    let field = |z: &Vector| -> Result<Vector> {
        let st = VectorFormState { x: z.rows(0, d).into_owned(), y: z.rows(d, d).into_owned() };
        let f = naive_union_rhs(model, &st)?;
        let mut out = Vector::zeros(2 * d);
        out.rows_mut(0, d).copy_from(&-j_apply(&f.x));
        out.rows_mut(d, d).copy_from(&-j_apply(&f.y));
        Ok(out)
    };
    let mut z = Vector::zeros(2 * d);
    z.rows_mut(0, d).copy_from(&s.x);
    z.rows_mut(d, d).copy_from(&s.y);
    let h = 1e-5 * z.norm().max(1.0);
    let mut jac = Mat::zeros(2 * d, 2 * d);
    for k in 0..2 * d {
        let mut zp = z.clone();
        zp[k] += h;
        let mut zm = z.clone();
        zm[k] -= h;
        jac.set_column(k, &((field(&zp)? - field(&zm)?) / (2.0 * h)));
    }
    Ok(crate::linalg::antisym_part(&jac).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::standard_j;
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn base_and_variational() {
        let q = HamiltonianModel::quartic(0.1);
        assert_relative_eq!(base_rhs(&q, &v(&[1.0, 0.0])).unwrap(), v(&[0.0, -1.1]), epsilon = 1e-15);
        assert_eq!(base_rhs(&HamiltonianModel::harmonic(1), &v(&[1.0, 0.0])).unwrap(), v(&[0.0, -1.0]));
        assert_eq!(base_rhs(&q, &v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));

        assert_relative_eq!(variational_rhs(&q, &v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), v(&[0.0, -1.3]), epsilon = 1e-15);
        assert_eq!(variational_rhs(&q, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), v(&[0.0, 0.0]));
    }

    #[test]
    fn variational_of_quadratic_is_base_at_y() {
        let s = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let h = HamiltonianModel::quadratic(&s, &Vector::zeros(2), 0.0).unwrap();
        let y = v(&[0.3, -1.2]);
        assert_relative_eq!(variational_rhs(&h, &v(&[4.0, 1.0]), &y).unwrap(), base_rhs(&h, &y).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn vector_form_quartic() {
        let q = HamiltonianModel::quartic(0.1);
        let d = vector_form_rhs(&q, &VectorFormState { x: v(&[1.0, 0.0]), y: v(&[1.0, 0.0]) }).unwrap();
        assert_relative_eq!(d.x, v(&[0.0, -1.4]), epsilon = 1e-15);
        assert_relative_eq!(d.y, v(&[0.0, -1.3]), epsilon = 1e-15);
        let d0 = vector_form_rhs(&q, &VectorFormState { x: v(&[0.4, 0.2]), y: v(&[0.0, 0.0]) }).unwrap();
        assert_eq!(d0.x, base_rhs(&q, &v(&[0.4, 0.2])).unwrap());
    }

    #[test]
    fn lax_matrix_values() {
        let q = HamiltonianModel::quartic(0.1);
        assert_relative_eq!(
            lax_matrix(&q, &v(&[1.0, 0.0])).unwrap(),
            Mat::from_row_slice(2, 2, &[0.0, 1.3, -1.0, 0.0]),
            epsilon = 1e-15
        );
        assert_eq!(lax_matrix(&HamiltonianModel::harmonic(1), &v(&[3.0, 1.0])).unwrap(), standard_j(1));
    }

    #[test]
    fn two_system_quartic_example() {
        let q = HamiltonianModel::quartic(0.1);
        let d = two_system_rhs(&q, &TwoState::new(v(&[1.0, 0.0]), Mat::identity(2, 2))).unwrap();
        assert_relative_eq!(d.x, v(&[0.0, -1.4]), epsilon = 1e-15);
        assert_relative_eq!(d.m, Mat::from_row_slice(2, 2, &[0.0, -0.3, -0.3, 0.0]), epsilon = 1e-15);

        let x = v(&[0.7, -0.2]);
        let z = two_system_rhs(&q, &TwoState::zero_phi(x.clone())).unwrap();
        assert_eq!(z.x, base_rhs(&q, &x).unwrap());
        assert_eq!(z.m, Mat::zeros(2, 2));
    }

    #[test]
    fn multivector_reductions() {
        let q = HamiltonianModel::quartic(0.1);
        let x = v(&[1.0, 0.0]);
        let y = v(&[1.0, 0.0]);
        let single = multivector_rhs(&q, &MultiVectorState { x: x.clone(), ys: alloc::vec![y.clone()], zs: Vec::new() }).unwrap();
        let vf = vector_form_rhs(&q, &VectorFormState { x: x.clone(), y: y.clone() }).unwrap();
        assert_eq!(single.x, vf.x);
        assert_eq!(single.ys[0], vf.y);

        let cancel = multivector_rhs(&q, &MultiVectorState { x: x.clone(), ys: alloc::vec![y.clone()], zs: alloc::vec![y.clone()] }).unwrap();
        assert_eq!(cancel.x, base_rhs(&q, &x).unwrap());
        assert_eq!(cancel.ys[0], cancel.zs[0]);

        let mixed = multivector_rhs(&q, &MultiVectorState { x, ys: alloc::vec![y], zs: alloc::vec![v(&[0.0, 1.0])] }).unwrap();
        assert_relative_eq!(mixed.x, v(&[0.0, -1.4]), epsilon = 1e-15);
    }

    #[test]
    fn multivector_rejects_too_many_vectors() {
        let q = HamiltonianModel::quartic(0.1);
        let y = v(&[1.0, 0.0]);
        let s = MultiVectorState { x: y.clone(), ys: alloc::vec![y.clone(), y.clone()], zs: alloc::vec![y] };
        assert!(matches!(multivector_rhs(&q, &s), Err(Error::Dimension { .. })));
    }

    #[test]
    fn defect_quadratic_vs_quartic() {
        let h = HamiltonianModel::harmonic(1);
        let s = VectorFormState { x: v(&[0.3, 1.0]), y: v(&[-0.5, 2.0]) };
        assert!(hamiltonicity_defect(&h, &s).unwrap() <= 1e-6);

        let q = HamiltonianModel::quartic(0.1);
        let s = VectorFormState { x: v(&[1.0, 0.0]), y: v(&[1.0, 0.0]) };
        // cross block ∂(H″y)/∂q = 6εq·y₁ = 0.6, so ‖asym‖_F = 0.3·√2
        assert_relative_eq!(hamiltonicity_defect(&q, &s).unwrap(), 0.3 * 2f64.sqrt(), epsilon = 1e-8);

        // the cross block is proportional to y, so the defect vanishes at y = 0
        let s0 = VectorFormState { x: v(&[1.0, 0.0]), y: v(&[0.0, 0.0]) };
        assert!(hamiltonicity_defect(&q, &s0).unwrap() <= 1e-6);
    }
}

//! The degenerate Lie-Poisson bracket on ℝ²ⁿ × sp(2n, ℝ),
//!
//! ```text
//! {U, V}(x, Φ) = U′ J V′ + 2 tr(Φᵗ [∇_Φ U, ∇_Φ V]),
//! ```
//!
//! written in the chart of upper-triangle entries of `M = −JΦ`.
//!
//! Chart coordinate `m_p` (entry `(a, b)`, `a ≤ b`) corresponds to the
//! direction `J S_p` in sp(2n), with `S_p = E_ab + E_ba` (or `E_aa`). The
//! Φ-gradients are taken inside sp(2n) with respect to `⟨X, Y⟩ = tr(XYᵗ)`;
//! the dual basis of `{J S_p}` is `G_p = J S_p / ‖S_p‖²`, so the chart block
//! of the Poisson matrix is `Ω_pq = 2 ⟨Φ, [G_p, G_q]⟩`. For `n = 1` and
//! `(α, β, γ) = (M₁₁, M₁₂, M₂₂)` this is
//!
//! ```text
//! ω = [[0, 2α, 4β], [−2α, 0, 2γ], [−4β, −2γ, 0]].
//! ```

use alloc::vec;
use alloc::vec::Vec;

use log::warn;

use crate::dynamics::{TwoState, SP_TOL};
use crate::linalg::{characteristic_polynomial, ensure_phase_dim, ensure_square, faddeev_leverrier, j_mul, numerical_rank, standard_j, sym_part, Mat, Vector};
use crate::model::{HamiltonianModel, Polynomial};
use crate::{Error, Result};

/// Singular values below `RANK_TOL · σ_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Upper-triangle entries `M_ab`, `a ≤ b`, row-major. For `n = 1` this is
/// `(α, β, γ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentCoordinates(pub Vec<f64>);

impl MomentCoordinates {
    pub fn len_for(n: usize) -> usize {
        n * (2 * n + 1)
    }

    /// Reads the upper triangle of `M`; `M` is assumed symmetric.
    pub fn from_matrix(m: &Mat) -> Result<Self> {
        let d = ensure_phase_dim(m)?;
        let mut out = Vec::with_capacity(Self::len_for(d / 2));
        for a in 0..d {
            for b in a..d {
                out.push(m[(a, b)]);
            }
        }
        Ok(Self(out))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; Self::len_for(n)])
    }

    /// Degrees of freedom implied by the coordinate count.
    pub fn n(&self) -> Result<usize> {
        let k = self.0.len();
        (1..=k).find(|&n| Self::len_for(n) >= k).filter(|&n| Self::len_for(n) == k).ok_or(Error::Dimension {
            expected: Self::len_for(1),
            found: k,
        })
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let d = 2 * self.n()?;
        let mut m = Mat::zeros(d, d);
        for (&(a, b), &v) in chart_pairs(d).iter().zip(&self.0) {
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
        Ok(m)
    }
}

fn chart_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|a| (a..d).map(move |b| (a, b))).collect()
}

/// Coordinate directions and bracket structure for one value of `n`.
#[derive(Clone, Debug)]
pub struct MomentChart {
    n: usize,
    pairs: Vec<(usize, usize)>,
    /// `J S_p`: the sp(2n) element moved by `m_p`.
    directions: Vec<Mat>,
    /// `2 [G_p, G_q]`, row-major over `(p, q)`.
    brackets: Vec<Mat>,
}

impl MomentChart {
    pub fn new(n: usize) -> Self {
        let d = 2 * n;
        let pairs = chart_pairs(d);
        let directions: Vec<Mat> = pairs
            .iter()
            .map(|&(a, b)| {
                let mut s = Mat::zeros(d, d);
                s[(a, b)] = 1.0;
                s[(b, a)] = 1.0;
                j_mul(&s)
            })
            .collect();
        let duals: Vec<Mat> =
            pairs.iter().zip(&directions).map(|(&(a, b), dir)| if a == b { dir.clone() } else { dir * 0.5 }).collect();
        let mut brackets = Vec::with_capacity(duals.len() * duals.len());
        for gp in &duals {
            for gq in &duals {
                brackets.push((gp * gq - gq * gp) * 2.0);
            }
        }
        Self { n, pairs, directions, brackets }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of chart coordinates, `n(2n + 1)`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Total dimension `2n² + 3n` of ℝ²ⁿ × sp(2n).
    pub fn total_dim(&self) -> usize {
        2 * self.n + self.len()
    }

    /// `Φ = JM` for chart coordinates `m`.
    pub fn phi(&self, m: &MomentCoordinates) -> Mat {
        let d = 2 * self.n;
        let mut phi = Mat::zeros(d, d);
        for (dir, &v) in self.directions.iter().zip(&m.0) {
            if v != 0.0 {
                phi += dir * v;
            }
        }
        phi
    }

    /// Chart gradient of a function whose full Φ-gradient (entry-wise, in
    /// gl(2n)) is `grad`: `∂f/∂m_p = ⟨grad, J S_p⟩`.
    pub fn chart_gradient(&self, grad: &Mat) -> Vector {
        Vector::from_iterator(self.len(), self.directions.iter().map(|dir| grad.dot(dir)))
    }

    /// The moment block `ω_pq = {m_p, m_q}` at `m`.
    pub fn moment_block(&self, m: &MomentCoordinates) -> Mat {
        let phi = self.phi(m);
        let k = self.len();
        Mat::from_fn(k, k, |p, q| phi.dot(&self.brackets[p * k + q]))
    }

    /// `c^r_pq` such that `{m_p, m_q} = Σ_r c^r_pq m_r`.
    pub fn structure_constant(&self, p: usize, q: usize, r: usize) -> f64 {
        self.directions[r].dot(&self.brackets[p * self.len() + q])
    }

    fn check(&self, x: &Vector, m: &MomentCoordinates) -> Result<()> {
        if x.len() != 2 * self.n {
            return Err(Error::Dimension { expected: 2 * self.n, found: x.len() });
        }
        if m.0.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: m.0.len() });
        }
        Ok(())
    }
}

/// Antisymmetric `(2n² + 3n)`-square Poisson matrix over `(x, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaMatrix(pub Mat);

impl OmegaMatrix {
    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    /// The chart block, i.e. `ω` without the leading `J`.
    pub fn moment_block(&self, n: usize) -> Mat {
        let k = self.0.nrows() - 2 * n;
        self.0.view((2 * n, 2 * n), (k, k)).into_owned()
    }

    pub fn rank(&self) -> Result<usize> {
        numerical_rank(&self.0, RANK_TOL)
    }

    pub fn corank(&self) -> Result<usize> {
        Ok(self.0.nrows() - self.rank()?)
    }

    /// `∇Uᵗ Ω ∇V`.
    pub fn bracket(&self, grad_u: &Vector, grad_v: &Vector) -> f64 {
        grad_u.dot(&(&self.0 * grad_v))
    }
}

/// `Ω(x, m)`: `J` on the x-block, the Lie-Poisson structure on the chart
/// block, no cross terms.
pub fn omega_matrix(x: &Vector, m: &MomentCoordinates) -> Result<OmegaMatrix> {
    let chart = MomentChart::new(m.n()?);
    omega_with_chart(&chart, x, m)
}

pub fn omega_with_chart(chart: &MomentChart, x: &Vector, m: &MomentCoordinates) -> Result<OmegaMatrix> {
    chart.check(x, m)?;
    let d = 2 * chart.n;
    let mut omega = Mat::zeros(chart.total_dim(), chart.total_dim());
    omega.view_mut((0, 0), (d, d)).copy_from(&standard_j(chart.n));
    omega.view_mut((d, d), (chart.len(), chart.len())).copy_from(&chart.moment_block(m));
    Ok(OmegaMatrix(omega))
}

/// `∇_Φ det Φ = det Φ · (Φ⁻¹)ᵗ`.
pub fn grad_phi_det(phi: &Mat) -> Result<Mat> {
    ensure_square(phi)?;
    let det = phi.determinant();
    if det == 0.0 {
        return Err(Error::Singular);
    }
    let inv = phi.clone().try_inverse().ok_or(Error::Singular)?;
    Ok(inv.transpose() * det)
}

/// `∇_Φ tr(ΦA) = Aᵗ`.
pub fn grad_phi_trace(a: &Mat) -> Mat {
    a.transpose()
}

/// `𝓗(x; Φ) = H(x) − ½ tr(A(x)Φ) = H(x) + ½ tr(H″(x) M)`.
pub fn extended_energy(model: &HamiltonianModel, s: &TwoState) -> Result<f64> {
    let hess = model.hess_h(&s.x)?;
    if s.m.shape() != hess.shape() {
        return Err(Error::Dimension { expected: model.dim(), found: s.m.nrows() });
    }
    Ok(model.eval_h(&s.x)? + 0.5 * hess.dot(&s.m))
}

/// The two-system as `ż = Ω(z) ∇𝓗(z)` in the `(x, m)` chart. Only the
/// symmetric part of `M` is seen.
pub fn bracket_rhs(model: &HamiltonianModel, s: &TwoState) -> Result<TwoState> {
    let chart = MomentChart::new(model.n());
    bracket_rhs_with_chart(&chart, model, s)
}

pub fn bracket_rhs_with_chart(chart: &MomentChart, model: &HamiltonianModel, s: &TwoState) -> Result<TwoState> {
    if let Err(e) = s.check_sp(SP_TOL) {
        warn!("{e}; bracket form uses the symmetric part of M");
    }
    let d = model.dim();
    let ms = sym_part(&s.m);
    let m = MomentCoordinates::from_matrix(&ms)?;
    let omega = omega_with_chart(chart, &s.x, &m)?;
    let hess = model.hess_h(&s.x)?;

    let mut grad = Vector::zeros(chart.total_dim());
    grad.rows_mut(0, d).copy_from(&(model.grad_h(&s.x)? + model.third_contract(&s.x, &ms)? * 0.5));
    for (p, &(a, b)) in chart.pairs.iter().enumerate() {
        grad[d + p] = if a == b { 0.5 * hess[(a, a)] } else { hess[(a, b)] };
    }
    let z = &omega.0 * grad;
    let m_dot = MomentCoordinates(z.rows(d, chart.len()).iter().copied().collect()).to_matrix()?;
    Ok(TwoState { x: z.rows(0, d).into_owned(), m: m_dot })
}

/// Coefficients of `det(Φ − λI)` at `λ⁰, λ², …, λ^{2(n−1)}`, from the
/// eigenvalues of Φ. For `n = 1` this is `det Φ = αγ − β²`.
pub fn casimirs(phi: &Mat, n: usize) -> Result<Vec<f64>> {
    let d = ensure_phase_dim(phi)?;
    if d != 2 * n {
        return Err(Error::Dimension { expected: 2 * n, found: d });
    }
    let residual = crate::structure::sp_residual(phi)?;
    if residual > SP_TOL * phi.norm().max(1.0) {
        warn!("Casimirs of Φ outside sp(2n): residual {residual:e}");
    }
    let c = characteristic_polynomial(phi)?;
    Ok((0..n).map(|k| c[2 * k]).collect())
}

/// Entry-wise Φ-gradients of the Casimirs, in the order of [`casimirs`].
pub fn casimir_gradients(phi: &Mat) -> Result<Vec<Mat>> {
    let d = ensure_phase_dim(phi)?;
    let (_, adj) = faddeev_leverrier(phi)?;
    // det(Φ − λI) = det(λI − Φ) and adj(Φ − λI) = −adj(λI − Φ) in even dimension
    Ok((0..d / 2).map(|k| -adj[2 * k].transpose()).collect())
}

/// `max_C ‖Ω(x, m) ∇C‖₂` over the `n` Casimirs.
pub fn casimir_kernel_check(x: &Vector, m: &MomentCoordinates) -> Result<f64> {
    let chart = MomentChart::new(m.n()?);
    let omega = omega_with_chart(&chart, x, m)?;
    let phi = chart.phi(m);
    let d = 2 * chart.n;
    let mut worst: f64 = 0.0;
    for g in casimir_gradients(&phi)? {
        let mut grad = Vector::zeros(chart.total_dim());
        grad.rows_mut(d, chart.len()).copy_from(&chart.chart_gradient(&g));
        worst = worst.max((&omega.0 * grad).norm());
    }
    Ok(worst)
}

/// `{U, V}` for polynomials in the `2n² + 3n` chart variables `(x, m)`,
/// computed symbolically.
pub fn bracket_poly(chart: &MomentChart, u: &Polynomial, v: &Polynomial) -> Polynomial {
    let dim = chart.total_dim();
    assert!(u.dim() == dim && v.dim() == dim, "polynomials must live on the (x, m) space");
    let d = 2 * chart.n;
    let du = u.gradient();
    let dv = v.gradient();
    let mut out = Polynomial::zero(dim);
    for i in 0..d {
        let j = if i < chart.n { i + chart.n } else { i - chart.n };
        let sign = if i < chart.n { 1.0 } else { -1.0 };
        out = &out + &(&du[i] * &dv[j]).scaled(sign);
    }
    let k = chart.len();
    for p in 0..k {
        if du[d + p].is_zero() {
            continue;
        }
        for q in 0..k {
            if p == q || dv[d + q].is_zero() {
                continue;
            }
            let mut omega_pq = Polynomial::zero(dim);
            for r in 0..k {
                let c = chart.structure_constant(p, q, r);
                if c != 0.0 {
                    omega_pq = &omega_pq + &Polynomial::variable(dim, d + r).scaled(c);
                }
            }
            if !omega_pq.is_zero() {
                out = &out + &(&(&du[d + p] * &omega_pq) * &dv[d + q]);
            }
        }
    }
    out
}

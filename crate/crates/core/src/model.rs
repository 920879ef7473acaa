//! Hamilton's function and its derivatives.
//!
//! Polynomial models are differentiated term by term once, at construction;
//! every later gradient, Hessian and third-derivative contraction is an exact
//! evaluation of cached polynomials. Black-box models fall back to central
//! differences.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::linalg::{scale, symmetry_residual, Mat, Vector};
use crate::{Error, Result};

/// Relative tolerance for "symmetric" matrix arguments.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialTerm {
    pub coeff: f64,
    /// Power of each coordinate.
    pub exponents: Vec<u32>,
}

impl MonomialTerm {
    pub fn new(coeff: f64, exponents: Vec<u32>) -> Self {
        Self { coeff, exponents }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .fold(self.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

/// A real polynomial in `dim` variables with like terms merged.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<MonomialTerm>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<MonomialTerm>) -> Result<Self> {
        for t in &terms {
            if t.exponents.len() != dim {
                return Err(Error::Dimension { expected: dim, found: t.exponents.len() });
            }
        }
        Ok(Self::normalized(dim, terms))
    }

    fn normalized(dim: usize, terms: impl IntoIterator<Item = MonomialTerm>) -> Self {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for t in terms {
            *acc.entry(t.exponents).or_insert(0.0) += t.coeff;
        }
        let terms = acc.into_iter().filter(|(_, c)| *c != 0.0).map(|(e, c)| MonomialTerm::new(c, e)).collect();
        Self { dim, terms }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        Self::normalized(dim, [MonomialTerm::new(c, vec![0; dim])])
    }

    /// The coordinate function `x_i`.
    pub fn variable(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        Self { dim, terms: vec![MonomialTerm::new(1.0, e)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[MonomialTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.exponents.iter().sum()).max()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    pub fn derivative(&self, var: usize) -> Self {
        let terms = self.terms.iter().filter(|t| t.exponents[var] > 0).map(|t| {
            let mut e = t.exponents.clone();
            let p = e[var];
            e[var] -= 1;
            MonomialTerm::new(t.coeff * p as f64, e)
        });
        Self::normalized(self.dim, terms)
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim).map(|i| self.derivative(i)).collect()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self::normalized(self.dim, self.terms.iter().map(|t| MonomialTerm::new(t.coeff * k, t.exponents.clone())))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        Polynomial::normalized(self.dim, self.terms.iter().chain(&rhs.terms).cloned())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scaled(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "polynomial dimension mismatch");
        let terms = self.terms.iter().flat_map(|a| {
            rhs.terms.iter().map(move |b| {
                let e = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
                MonomialTerm::new(a.coeff * b.coeff, e)
            })
        });
        Polynomial::normalized(self.dim, terms)
    }
}

/// Parses the model text format: one term per line, `coeff e1 e2 … e_dim`,
/// whitespace separated, `#` starts a comment.
pub fn parse_polynomial(dim: usize, text: &str) -> Result<Polynomial> {
    let mut terms = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: alloc::string::String| Error::Parse { line: idx + 1, message };
        let mut fields = line.split_whitespace();
        let coeff: f64 = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|_| err("coefficient is not a number".to_string()))?;
        let exponents = fields
            .map(|f| f.parse::<u32>().map_err(|_| err(format!("bad exponent `{f}`"))))
            .collect::<Result<Vec<_>>>()?;
        if exponents.len() != dim {
            return Err(err(format!("expected {dim} exponents, found {}", exponents.len())));
        }
        terms.push(MonomialTerm::new(coeff, exponents));
    }
    Polynomial::new(dim, terms)
}

/// Writes a polynomial in the format read by [`parse_polynomial`].
pub fn format_polynomial(p: &Polynomial) -> alloc::string::String {
    let mut out = alloc::string::String::new();
    for t in p.terms() {
        out.push_str(&format!("{:e}", t.coeff));
        for e in &t.exponents {
            out.push_str(&format!(" {e}"));
        }
        out.push('\n');
    }
    out
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
struct PolynomialDerivatives {
    h: Polynomial,
    grad: Vec<Polynomial>,
    /// Upper triangle, row-major: `(i, j, ∂²H/∂xᵢ∂xⱼ)` with `i ≤ j`.
    hess: Vec<(usize, usize, Polynomial)>,
    /// Non-zero `(k, i, j, ∂³H/∂xₖ∂xᵢ∂xⱼ)` with `i ≤ j`.
    third: Vec<(usize, usize, usize, Polynomial)>,
}

impl PolynomialDerivatives {
    fn new(h: Polynomial) -> Self {
        let dim = h.dim();
        let grad = h.gradient();
        let mut hess = Vec::new();
        let mut third = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                let hij = grad[i].derivative(j);
                for k in 0..dim {
                    let t = hij.derivative(k);
                    if !t.is_zero() {
                        third.push((k, i, j, t));
                    }
                }
                if !hij.is_zero() {
                    hess.push((i, j, hij));
                }
            }
        }
        Self { h, grad, hess, third }
    }
}

#[derive(Clone)]
enum ModelForm {
    Polynomial(PolynomialDerivatives),
    BlackBox { f: Arc<ScalarFn>, h_fd: Option<f64> },
}

/// Hamilton's function `H(x)` on ℝ²ⁿ with coordinates ordered as
/// `(x₁…xₙ, xₙ₊₁…x₂ₙ)` = (positions, momenta).
#[derive(Clone)]
pub struct HamiltonianModel {
    n: usize,
    form: ModelForm,
}

impl fmt::Debug for HamiltonianModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            ModelForm::Polynomial(p) => f.debug_struct("HamiltonianModel").field("n", &self.n).field("h", &p.h).finish(),
            ModelForm::BlackBox { h_fd, .. } => {
                f.debug_struct("HamiltonianModel").field("n", &self.n).field("black_box_h_fd", h_fd).finish()
            }
        }
    }
}

impl HamiltonianModel {
    pub fn polynomial(n: usize, h: Polynomial) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension { expected: 2, found: 0 });
        }
        if h.dim() != 2 * n {
            return Err(Error::Dimension { expected: 2 * n, found: h.dim() });
        }
        Ok(Self { n, form: ModelForm::Polynomial(PolynomialDerivatives::new(h)) })
    }

    pub fn from_terms(n: usize, terms: Vec<MonomialTerm>) -> Result<Self> {
        Self::polynomial(n, Polynomial::new(2 * n, terms)?)
    }

    /// Parses the polynomial text format for a model with `n` degrees of
    /// freedom.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        Self::polynomial(n, parse_polynomial(2 * n, text)?)
    }

    /// Wraps an arbitrary scalar function; derivatives by central differences.
    ///
    /// With `h_fd = None` the step for derivative order `k` is
    /// `ε^{1/(k+2)} · max(1, ‖x‖)`, i.e. `cbrt(ε)` for the gradient. An
    /// explicit `h_fd` is used for all orders.
    pub fn black_box<F>(n: usize, f: F, h_fd: Option<f64>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(n >= 1, "a model needs at least one degree of freedom");
        Self { n, form: ModelForm::BlackBox { f: Arc::new(f), h_fd } }
    }

    /// `H(q, p) = (q² + p²)/2 + ε q⁴/4`.
    pub fn quartic(eps: f64) -> Self {
        let terms = vec![
            MonomialTerm::new(0.5, vec![2, 0]),
            MonomialTerm::new(0.5, vec![0, 2]),
            MonomialTerm::new(eps / 4.0, vec![4, 0]),
        ];
        Self::from_terms(1, terms).expect("quartic model is well formed")
    }

    /// `H = ½ |x|²` on ℝ²ⁿ.
    pub fn harmonic(n: usize) -> Self {
        Self::quadratic(&Mat::identity(2 * n, 2 * n), &Vector::zeros(2 * n), 0.0).expect("identity is symmetric")
    }

    /// `H = ½ xᵗSx + bᵗx + c`.
    pub fn quadratic(s: &Mat, b: &Vector, c: f64) -> Result<Self> {
        let dim = crate::linalg::ensure_phase_dim(s)?;
        if b.len() != dim {
            return Err(Error::Dimension { expected: dim, found: b.len() });
        }
        let res = symmetry_residual(s);
        if res > SYMMETRY_TOL * scale(s) {
            return Err(Error::NotSymmetric { residual: res });
        }
        let mut terms = vec![MonomialTerm::new(c, vec![0; dim])];
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 1;
            terms.push(MonomialTerm::new(b[i], e.clone()));
            e[i] = 2;
            terms.push(MonomialTerm::new(0.5 * s[(i, i)], e));
            for j in i + 1..dim {
                let mut e = vec![0; dim];
                e[i] = 1;
                e[j] = 1;
                terms.push(MonomialTerm::new(0.5 * (s[(i, j)] + s[(j, i)]), e));
            }
        }
        Self::from_terms(dim / 2, terms)
    }

    /// Degrees of freedom.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Phase-space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match &self.form {
            ModelForm::Polynomial(p) => Some(&p.h),
            ModelForm::BlackBox { .. } => None,
        }
    }

    fn check(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    fn fd_step(&self, x: &Vector, order: i32) -> f64 {
        match &self.form {
            ModelForm::BlackBox { h_fd: Some(h), .. } => *h,
            _ => f64::EPSILON.powf(1.0 / f64::from(order + 2)) * x.norm().max(1.0),
        }
    }

    pub fn eval_h(&self, x: &Vector) -> Result<f64> {
        self.check(x)?;
        Ok(match &self.form {
            ModelForm::Polynomial(p) => p.h.eval(x.as_slice()),
            ModelForm::BlackBox { f, .. } => f(x.as_slice()),
        })
    }

    /// `H′(x)`.
    pub fn grad_h(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        match &self.form {
            ModelForm::Polynomial(p) => Ok(Vector::from_iterator(self.dim(), p.grad.iter().map(|g| g.eval(x.as_slice())))),
            ModelForm::BlackBox { f, .. } => {
                let h = self.fd_step(x, 1);
                let mut xp = x.clone();
                Ok(Vector::from_fn(self.dim(), |k, _| {
                    xp[k] = x[k] + h;
                    let fp = f(xp.as_slice());
                    xp[k] = x[k] - h;
                    let fm = f(xp.as_slice());
                    xp[k] = x[k];
                    (fp - fm) / (2.0 * h)
                }))
            }
        }
    }

    /// `H″(x)`; exactly symmetric.
    pub fn hess_h(&self, x: &Vector) -> Result<Mat> {
        self.check(x)?;
        let d = self.dim();
        let mut out = Mat::zeros(d, d);
        match &self.form {
            ModelForm::Polynomial(p) => {
                for (i, j, hij) in &p.hess {
                    let v = hij.eval(x.as_slice());
                    out[(*i, *j)] = v;
                    out[(*j, *i)] = v;
                }
            }
            ModelForm::BlackBox { f, .. } => {
                let h = self.fd_step(x, 2);
                let mut y = x.clone();
                let mut at = |di: usize, si: f64, dj: usize, sj: f64| {
                    y[di] += si * h;
                    y[dj] += sj * h;
                    let v = f(y.as_slice());
                    y[di] = x[di];
                    y[dj] = x[dj];
                    v
                };
                for i in 0..d {
                    for j in i..d {
                        let v = if i == j {
                            let f0 = f(x.as_slice());
                            (at(i, 1.0, i, 1.0) - 2.0 * f0 + at(i, -1.0, i, -1.0)) / (4.0 * h * h)
                        } else {
                            (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0))
                                / (4.0 * h * h)
                        };
                        out[(i, j)] = v;
                        out[(j, i)] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    /// `∇ₓ tr(H″(x) M)`, i.e. component `k` is `Σᵢⱼ H‴ᵢⱼₖ(x) Mᵢⱼ`, for
    /// symmetric `M`.
    pub fn third_contract(&self, x: &Vector, m: &Mat) -> Result<Vector> {
        self.check(x)?;
        let d = self.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension { expected: d, found: m.nrows().max(m.ncols()) });
        }
        let res = symmetry_residual(m);
        if res > SYMMETRY_TOL * scale(m) {
            return Err(Error::NotSymmetric { residual: res });
        }
        match &self.form {
            ModelForm::Polynomial(p) => {
                let mut out = Vector::zeros(d);
                for (k, i, j, t) in &p.third {
                    let w = if i == j { m[(*i, *j)] } else { m[(*i, *j)] + m[(*j, *i)] };
                    if w != 0.0 {
                        out[*k] += w * t.eval(x.as_slice());
                    }
                }
                Ok(out)
            }
            ModelForm::BlackBox { .. } => {
                let h = self.fd_step(x, 3);
                let mut y = x.clone();
                let mut out = Vector::zeros(d);
                for k in 0..d {
                    y[k] = x[k] + h;
                    let tp = self.hess_h(&y)?.component_mul(m).sum();
                    y[k] = x[k] - h;
                    let tm = self.hess_h(&y)?.component_mul(m).sum();
                    y[k] = x[k];
                    out[k] = (tp - tm) / (2.0 * h);
                }
                Ok(out)
            }
        }
    }
}

//! Closed-form solutions of the integrable cases, used as ground truth for
//! the numerical integrators.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::dynamics::TwoState;
use crate::integrate::{integrate, FormTag, IntegratorConfig, State, Trajectory};
use crate::linalg::{ensure_phase_dim, expm, j_apply, j_mul, mul_j, scale, symmetry_residual, Mat, Vector};
use crate::model::{HamiltonianModel, MonomialTerm, SYMMETRY_TOL};
use crate::{Error, Result};

/// Tolerance of the stationary-point preconditions.
pub const STATIONARY_TOL: f64 = 1e-10;

/// `H(x) = ½ xᵗSx + bᵗx + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticModel {
    pub s: Mat,
    pub b: Vector,
    pub c: f64,
}

impl QuadraticModel {
    pub fn new(s: Mat, b: Vector, c: f64) -> Result<Self> {
        let dim = ensure_phase_dim(&s)?;
        if b.len() != dim {
            return Err(Error::Dimension { expected: dim, found: b.len() });
        }
        let residual = symmetry_residual(&s);
        if residual > SYMMETRY_TOL * scale(&s) {
            return Err(Error::NotSymmetric { residual });
        }
        Ok(Self { s, b, c })
    }

    /// Reads `S`, `b`, `c` off a polynomial model of degree at most two.
    pub fn from_model(model: &HamiltonianModel) -> Result<Self> {
        let poly = model.as_polynomial().ok_or(Error::InvalidConfig("quadratic oracle needs a polynomial model"))?;
        if poly.degree().unwrap_or(0) > 2 {
            return Err(Error::InvalidConfig("quadratic oracle needs degree at most 2"));
        }
        let origin = Vector::zeros(model.dim());
        Self::new(model.hess_h(&origin)?, model.grad_h(&origin)?, model.eval_h(&origin)?)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn to_model(&self) -> Result<HamiltonianModel> {
        HamiltonianModel::quadratic(&self.s, &self.b, self.c)
    }
}

/// Quadratic `H`: the base flow is affine and `A = SJ` is constant, so
/// `x(t)` comes from the exponential of the augmented matrix
/// `[[JS, Jb], [0, 0]]` and `Φ(t) = e^{tA} Φ₀ e^{−tA}`.
pub fn quadratic_closed_form(qm: &QuadraticModel, x0: &Vector, phi0: &Mat, t: f64) -> Result<TwoState> {
    let d = qm.dim();
    if x0.len() != d {
        return Err(Error::Dimension { expected: d, found: x0.len() });
    }
    if phi0.nrows() != d || phi0.ncols() != d {
        return Err(Error::Dimension { expected: d, found: phi0.nrows() });
    }
    let mut k = Mat::zeros(d + 1, d + 1);
    k.view_mut((0, 0), (d, d)).copy_from(&(j_mul(&qm.s) * t));
    k.view_mut((0, d), (d, 1)).copy_from(&(j_apply(&qm.b) * t));
    let e = expm(&k)?;
    let x = e.view((0, 0), (d, d)) * x0 + e.column(d).rows(0, d);
    Ok(TwoState::from_phi(x, &conjugate_by_exp(&mul_j(&qm.s), phi0, t)?))
}

/// `e^{tA} Φ e^{−tA}`.
pub fn conjugate_by_exp(a: &Mat, phi: &Mat, t: f64) -> Result<Mat> {
    let ea = expm(&(a * t))?;
    let ea_inv = expm(&(a * -t))?;
    Ok(ea * phi * ea_inv)
}

/// Base-system solution with `Φ ≡ 0`: a two-system trajectory whose states
/// are `(x(t | x₀), 0)`.
pub fn zero_phi_solution(model: &HamiltonianModel, x0: &Vector, cfg: &IntegratorConfig) -> Result<Trajectory> {
    let base = integrate(model, &State::Phase(x0.clone()), FormTag::Base, cfg)?;
    let states = base.states.into_iter().map(|s| match s {
        State::Phase(x) => State::Two(TwoState::zero_phi(x)),
        other => other,
    });
    Ok(Trajectory { form: FormTag::Two, times: base.times, states: states.collect(), stats: base.stats })
}

/// Errors unless `H′(x₀) = 0` and `H‴(x₀)` contracts to zero with every
/// element of the symmetric basis.
pub fn check_stationary(model: &HamiltonianModel, x0: &Vector) -> Result<()> {
    let g = model.grad_h(x0)?;
    if g.amax() > STATIONARY_TOL {
        return Err(Error::NotStationary(format!("|H'(x0)| = {:.3e} exceeds {STATIONARY_TOL:e}", g.amax())));
    }
    let d = model.dim();
    for a in 0..d {
        for b in a..d {
            let mut e = Mat::zeros(d, d);
            e[(a, b)] = 1.0;
            e[(b, a)] = 1.0;
            let c = model.third_contract(x0, &e)?.amax();
            if c > STATIONARY_TOL {
                return Err(Error::NotStationary(format!(
                    "third derivatives at x0 do not vanish: contraction with basis ({a}, {b}) is {c:.3e}"
                )));
            }
        }
    }
    Ok(())
}

/// At a stationary point with vanishing third derivatives: `x ≡ x₀` and
/// `Φ(t) = e^{tA₀} Φ₀ e^{−tA₀}`, `A₀ = H″(x₀)J`.
pub fn stationary_point_solution(model: &HamiltonianModel, x0: &Vector, phi0: &Mat, t: f64) -> Result<TwoState> {
    check_stationary(model, x0)?;
    let d = model.dim();
    if phi0.nrows() != d || phi0.ncols() != d {
        return Err(Error::Dimension { expected: d, found: phi0.nrows() });
    }
    let a0 = mul_j(&model.hess_h(x0)?);
    Ok(TwoState::from_phi(x0.clone(), &conjugate_by_exp(&a0, phi0, t)?))
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// `H = H(I)` for one degree of freedom in action-angle variables, given by
/// its first three derivatives.
#[derive(Clone)]
pub enum ActionAngleModel {
    /// `H(I) = Σ cₖ Iᵏ`, coefficients in ascending order.
    Polynomial(Vec<f64>),
    Custom { d1: Arc<ScalarFn>, d2: Arc<ScalarFn>, d3: Arc<ScalarFn> },
}

impl fmt::Debug for ActionAngleModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Self::Custom { .. } => f.write_str("Custom"),
        }
    }
}

fn poly_derivative_at(c: &[f64], order: u32, x: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &ck) in c.iter().enumerate().skip(order as usize).rev() {
        let falling: f64 = (0..order).map(|j| (k as u32 - j) as f64).product();
        acc = acc * x + ck * falling;
    }
    acc
}

impl ActionAngleModel {
    pub fn custom<F1, F2, F3>(d1: F1, d2: F2, d3: F3) -> Self
    where
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
        F3: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::Custom { d1: Arc::new(d1), d2: Arc::new(d2), d3: Arc::new(d3) }
    }

    /// `(H′, H″, H‴)` at `i`.
    pub fn derivatives(&self, i: f64) -> (f64, f64, f64) {
        match self {
            Self::Polynomial(c) => (poly_derivative_at(c, 1, i), poly_derivative_at(c, 2, i), poly_derivative_at(c, 3, i)),
            Self::Custom { d1, d2, d3 } => (d1(i), d2(i), d3(i)),
        }
    }

    /// The polynomial case as a model on ℝ² with coordinates `(θ, I)`, so
    /// that `θ̇ = H′(I)`.
    pub fn to_model(&self) -> Result<HamiltonianModel> {
        match self {
            Self::Polynomial(c) => {
                let terms = c.iter().enumerate().map(|(k, &ck)| MonomialTerm::new(ck, alloc::vec![0, k as u32])).collect();
                HamiltonianModel::from_terms(1, terms)
            }
            Self::Custom { .. } => Err(Error::InvalidConfig("only polynomial action-angle models convert to a phase-space model")),
        }
    }
}

/// `(I, θ, α, β, γ)` with `M = [[α, β], [β, γ]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleState {
    pub i: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl AngleState {
    pub fn new(i: f64, theta: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { i, theta, alpha, beta, gamma }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.i, self.theta, self.alpha, self.beta, self.gamma]
    }
}

/// The linear system
/// `İ = 0, θ̇ = H′ + H‴α, α̇ = 0, β̇ = H″β, γ̇ = 2H″β`.
pub fn action_angle_rhs(am: &ActionAngleModel, s: &AngleState) -> AngleState {
    let (h1, h2, h3) = am.derivatives(s.i);
    AngleState::new(0.0, h1 + h3 * s.alpha, 0.0, h2 * s.beta, 2.0 * h2 * s.beta)
}

/// Closed-form solution of [`action_angle_rhs`]:
/// `θ = θ₀ + ω₁t, β = β₀e^{ω₂t}, γ = 2β₀(e^{ω₂t} − 1) + γ₀` with
/// `ω₁ = H′(I₀) + H‴(I₀)α₀`, `ω₂ = H″(I₀)`.
pub fn action_angle_closed_form(am: &ActionAngleModel, s0: &AngleState, t: f64) -> AngleState {
    let (w1, w2) = frequencies(am, s0);
    let e = (w2 * t).exp();
    AngleState::new(s0.i, s0.theta + w1 * t, s0.alpha, s0.beta * e, 2.0 * s0.beta * (e - 1.0) + s0.gamma)
}

fn frequencies(am: &ActionAngleModel, s0: &AngleState) -> (f64, f64) {
    let (h1, h2, h3) = am.derivatives(s0.i);
    (h1 + h3 * s0.alpha, h2)
}

/// Time derivative of [`action_angle_closed_form`], differentiated by hand.
pub fn action_angle_closed_form_derivative(am: &ActionAngleModel, s0: &AngleState, t: f64) -> AngleState {
    let (w1, w2) = frequencies(am, s0);
    let e = (w2 * t).exp();
    AngleState::new(0.0, w1, 0.0, s0.beta * w2 * e, 2.0 * s0.beta * w2 * e)
}

/// `max |d/dt closed form − rhs(closed form)| / max(1, max |rhs|)` at `t`.
pub fn action_angle_residual(am: &ActionAngleModel, s0: &AngleState, t: f64) -> f64 {
    let lhs = action_angle_closed_form_derivative(am, s0, t).to_array();
    let rhs = action_angle_rhs(am, &action_angle_closed_form(am, s0, t)).to_array();
    let sc = rhs.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / sc
}

/// `(θ, I)` phase point and `M = [[γ, β], [β, α]]` in that ordering, so
/// that `α = M_II`.
pub fn angle_to_two_state(s: &AngleState) -> TwoState {
    TwoState::new(
        Vector::from_column_slice(&[s.theta, s.i]),
        Mat::from_row_slice(2, 2, &[s.gamma, s.beta, s.beta, s.alpha]),
    )
}

pub fn two_state_to_angle(s: &TwoState) -> AngleState {
    AngleState::new(s.x[1], s.x[0], s.m[(1, 1)], s.m[(0, 1)], s.m[(0, 0)])
}

/// What direct integration of the two-system for `H = H(I)` shows.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectAngleRun {
    /// `max |β(t) − β₀e^{ω₂t}|`.
    pub dev_exponential: f64,
    /// `max |β(t) − (β₀ + ω₂α₀t)|`.
    pub dev_linear: f64,
    /// Observed `(θ(T) − θ₀)/T`.
    pub theta_rate: f64,
    /// `ω₁ = H′ + H‴α₀`.
    pub omega1: f64,
    /// `H′ + ½H‴α₀`.
    pub omega1_half: f64,
    pub behaviour: BetaBehaviour,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaBehaviour {
    Exponential,
    Linear,
    Other,
}

impl fmt::Display for BetaBehaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exponential => "exponential",
            Self::Linear => "linear",
            Self::Other => "neither exponential nor linear",
        })
    }
}

/// Integrates the full two-system of the polynomial `H(I)` from `s0` and
/// classifies the observed off-diagonal entry `β(t)`.
pub fn action_angle_direct(am: &ActionAngleModel, s0: &AngleState, cfg: &IntegratorConfig) -> Result<DirectAngleRun> {
    let model = am.to_model()?;
    let traj = integrate(&model, &State::Two(angle_to_two_state(s0)), FormTag::Two, cfg)?;
    let (h1, h2, h3) = am.derivatives(s0.i);
    let (mut dev_exponential, mut dev_linear) = (0.0_f64, 0.0_f64);
    let mut scale_b = 1.0_f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let a = two_state_to_angle(s.as_two().ok_or(Error::FormMismatch("two"))?);
        scale_b = scale_b.max(a.beta.abs());
        dev_exponential = dev_exponential.max((a.beta - s0.beta * (h2 * t).exp()).abs());
        dev_linear = dev_linear.max((a.beta - (s0.beta + h2 * s0.alpha * t)).abs());
    }
    let t_end = *traj.times.last().unwrap_or(&0.0);
    let last = two_state_to_angle(traj.last().as_two().ok_or(Error::FormMismatch("two"))?);
    let theta_rate = if t_end > 0.0 { (last.theta - s0.theta) / t_end } else { h1 + 0.5 * h3 * s0.alpha };
    let tol = 1e-6 * scale_b;
    let behaviour = if dev_exponential <= tol {
        BetaBehaviour::Exponential
    } else if dev_linear <= tol {
        BetaBehaviour::Linear
    } else {
        BetaBehaviour::Other
    };
    Ok(DirectAngleRun {
        dev_exponential,
        dev_linear,
        theta_rate,
        omega1: h1 + h3 * s0.alpha,
        omega1_half: h1 + 0.5 * h3 * s0.alpha,
        behaviour,
    })
}

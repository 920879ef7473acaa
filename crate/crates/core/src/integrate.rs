//! Explicit Runge-Kutta integration of every system form, with invariant
//! monitoring along the computed trajectory.
//!
//! The schemes are generic (classical RK4 and the Dormand-Prince 5(4) pair);
//! the two-system's bracket is degenerate and non-canonical, so conservation
//! is measured rather than built in.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::dynamics::{
    multivector_rhs, naive_union_rhs, two_system_rhs, vector_form_rhs, MultiVectorState, TwoState, VectorFormState,
};
use crate::linalg::{antisym_part, characteristic_polynomial, sorted_spectrum, sym_part, Mat, Vector};
use crate::model::HamiltonianModel;
use crate::poisson::{bracket_rhs_with_chart, extended_energy, MomentChart};
use crate::structure::{signature_of, ZERO_EIG_TOL};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with (at most) the given step.
    Rk4 { step: f64 },
    /// Dormand-Prince 5(4) with proportional step control.
    DormandPrince { rtol: f64, atol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    /// Record every `k`-th accepted step.
    Stride(usize),
    /// Land exactly on multiples of `dt` and record there. Trajectories of
    /// different forms then share sample times.
    Grid(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    pub sampling: Sampling,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64) -> Self {
        Self { method: Method::Rk4 { step }, t_end, sampling: Sampling::Stride(1) }
    }

    pub fn adaptive(rtol: f64, atol: f64, t_end: f64) -> Self {
        Self { method: Method::DormandPrince { rtol, atol }, t_end, sampling: Sampling::Stride(1) }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig("t_end must be finite and non-negative"));
        }
        match self.method {
            Method::Rk4 { step } if !(step > 0.0) => return Err(Error::InvalidConfig("RK4 step must be positive")),
            Method::DormandPrince { rtol, atol } if !(rtol > 0.0 && atol > 0.0) => {
                return Err(Error::InvalidConfig("tolerances must be positive"))
            }
            _ => {}
        }
        match self.sampling {
            Sampling::Stride(0) => Err(Error::InvalidConfig("sample stride must be at least 1")),
            Sampling::Grid(dt) if !(dt > 0.0) => Err(Error::InvalidConfig("sample interval must be positive")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FormTag {
    /// `ẋ = JH′(x)`.
    Base,
    /// Base system and system in variations without feedback.
    Variational,
    /// Vector form on ℝ⁴ⁿ.
    Vector,
    /// Matrix form / two-system.
    Two,
    /// Canonical multivector form of signature `(m₊, m₋)`.
    Multivector,
    /// Two-system evaluated through the Poisson matrix Ω.
    Bracket,
}

impl FormTag {
    pub const ALL: [FormTag; 6] =
        [FormTag::Base, FormTag::Variational, FormTag::Vector, FormTag::Two, FormTag::Multivector, FormTag::Bracket];

    pub fn name(&self) -> &'static str {
        match self {
            FormTag::Base => "base",
            FormTag::Variational => "variational",
            FormTag::Vector => "vector",
            FormTag::Two => "two",
            FormTag::Multivector => "multivector",
            FormTag::Bracket => "bracket",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Whether states of this form carry a moment matrix.
    pub fn has_moment(&self) -> bool {
        !matches!(self, FormTag::Base)
    }
}

impl fmt::Display for FormTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A phase point of any of the forms.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Phase(Vector),
    Pair(VectorFormState),
    Two(TwoState),
    Multi(MultiVectorState),
}

impl State {
    pub fn x(&self) -> &Vector {
        match self {
            State::Phase(x) => x,
            State::Pair(s) => &s.x,
            State::Two(s) => &s.x,
            State::Multi(s) => &s.x,
        }
    }

    /// The moment matrix carried by the state: `M` itself, `yyᵗ`, or
    /// `Σyᵢyᵢᵗ − Σzⱼzⱼᵗ`.
    pub fn moment(&self) -> Option<Mat> {
        match self {
            State::Phase(_) => None,
            State::Pair(s) => Some(&s.y * s.y.transpose()),
            State::Two(s) => Some(s.m.clone()),
            State::Multi(s) => Some(s.moment()),
        }
    }

    pub fn as_two(&self) -> Option<&TwoState> {
        match self {
            State::Two(s) => Some(s),
            _ => None,
        }
    }

    fn matches(&self, form: FormTag) -> bool {
        matches!(
            (self, form),
            (State::Phase(_), FormTag::Base)
                | (State::Pair(_), FormTag::Variational | FormTag::Vector)
                | (State::Two(_), FormTag::Two | FormTag::Bracket)
                | (State::Multi(_), FormTag::Multivector)
        )
    }
}

/// How a [`State`] is packed into one flat vector.
#[derive(Clone, Copy, Debug)]
struct Layout {
    d: usize,
    plus: usize,
    minus: usize,
}

impl Layout {
    fn of(s: &State) -> Self {
        let d = s.x().len();
        match s {
            State::Multi(m) => Self { d, plus: m.ys.len(), minus: m.zs.len() },
            _ => Self { d, plus: 0, minus: 0 },
        }
    }

    fn flatten(&self, s: &State) -> Vector {
        let mut out: Vec<f64> = s.x().iter().copied().collect();
        match s {
            State::Phase(_) => {}
            State::Pair(p) => out.extend(p.y.iter()),
            State::Two(t) => {
                for i in 0..self.d {
                    out.extend(t.m.row(i).iter());
                }
            }
            State::Multi(m) => m.ys.iter().chain(&m.zs).for_each(|v| out.extend(v.iter())),
        }
        Vector::from_vec(out)
    }

    fn unflatten(&self, like: &State, v: &Vector) -> State {
        let d = self.d;
        let x = v.rows(0, d).into_owned();
        match like {
            State::Phase(_) => State::Phase(x),
            State::Pair(_) => State::Pair(VectorFormState { x, y: v.rows(d, d).into_owned() }),
            State::Two(_) => State::Two(TwoState { x, m: Mat::from_row_slice(d, d, &v.as_slice()[d..d + d * d]) }),
            State::Multi(_) => {
                let block = |k: usize| v.rows(d * (k + 1), d).into_owned();
                State::Multi(MultiVectorState {
                    x,
                    ys: (0..self.plus).map(block).collect(),
                    zs: (self.plus..self.plus + self.minus).map(block).collect(),
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub form: FormTag,
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states.last().expect("a trajectory always holds its initial sample")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Right-hand side of `form` at `s` (which must match the form).
pub fn form_rhs(model: &HamiltonianModel, s: &State, form: FormTag) -> Result<State> {
    let chart = (form == FormTag::Bracket).then(|| MomentChart::new(model.n()));
    rhs_dispatch(model, s, form, chart.as_ref())
}

fn rhs_dispatch(model: &HamiltonianModel, s: &State, form: FormTag, chart: Option<&MomentChart>) -> Result<State> {
    Ok(match (s, form) {
        (State::Phase(x), FormTag::Base) => State::Phase(crate::dynamics::base_rhs(model, x)?),
        (State::Pair(p), FormTag::Variational) => State::Pair(naive_union_rhs(model, p)?),
        (State::Pair(p), FormTag::Vector) => State::Pair(vector_form_rhs(model, p)?),
        (State::Two(t), FormTag::Two) => State::Two(two_system_rhs(model, t)?),
        (State::Two(t), FormTag::Bracket) => match chart {
            Some(c) => State::Two(bracket_rhs_with_chart(c, model, t)?),
            None => State::Two(crate::poisson::bracket_rhs(model, t)?),
        },
        (State::Multi(m), FormTag::Multivector) => State::Multi(multivector_rhs(model, m)?),
        _ => return Err(Error::FormMismatch(form.name())),
    })
}

/// Integrates `initial` under `form` from `t = 0` to `cfg.t_end`.
pub fn integrate(model: &HamiltonianModel, initial: &State, form: FormTag, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if !initial.matches(form) {
        return Err(Error::FormMismatch(form.name()));
    }
    // surfaces dimension errors before any stepping
    let chart = (form == FormTag::Bracket).then(|| MomentChart::new(model.n()));
    rhs_dispatch(model, initial, form, chart.as_ref())?;

    let layout = Layout::of(initial);
    let rhs = |v: &Vector| -> Result<Vector> {
        let s = layout.unflatten(initial, v);
        Ok(layout.flatten(&rhs_dispatch(model, &s, form, chart.as_ref())?))
    };
    let (times, flat, stats) = run(rhs, layout.flatten(initial), cfg)?;
    let states = flat.iter().map(|v| layout.unflatten(initial, v)).collect();
    Ok(Trajectory { form, times, states, stats })
}

struct Recorder {
    times: Vec<f64>,
    states: Vec<Vector>,
}

impl Recorder {
    fn push(&mut self, t: f64, y: &Vector) {
        if self.times.last() != Some(&t) {
            self.times.push(t);
            self.states.push(y.clone());
        }
    }
}

/// Next point the integrator must land on exactly.
fn next_stop(t: f64, cfg: &IntegratorConfig) -> f64 {
    match cfg.sampling {
        Sampling::Grid(dt) => {
            let k = (t / dt + 1e-9).floor() + 1.0;
            (k * dt).min(cfg.t_end)
        }
        Sampling::Stride(_) => cfg.t_end,
    }
}

fn run<F>(mut f: F, y0: Vector, cfg: &IntegratorConfig) -> Result<(Vec<f64>, Vec<Vector>, IntegrationStats)>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let mut rec = Recorder { times: Vec::new(), states: Vec::new() };
    rec.push(0.0, &y0);
    let mut stats = IntegrationStats::default();
    if cfg.t_end == 0.0 {
        return Ok((rec.times, rec.states, stats));
    }
    let stride = match cfg.sampling {
        Sampling::Stride(k) => Some(k),
        Sampling::Grid(_) => None,
    };
    let mut on_accept = |t: f64, y: &Vector, stats: &mut IntegrationStats, landed: bool| -> Result<()> {
        stats.accepted += 1;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t });
        }
        let record = match stride {
            Some(k) => stats.accepted.is_multiple_of(k) || t >= cfg.t_end,
            None => landed,
        };
        if record {
            rec.push(t, y);
        }
        Ok(())
    };

    match cfg.method {
        Method::Rk4 { step } => {
            let mut y = y0;
            let mut t = 0.0;
            while t < cfg.t_end {
                let stop = next_stop(t, cfg);
                let steps = ((stop - t) / step - 1e-9).ceil().max(1.0) as usize;
                let h = (stop - t) / steps as f64;
                for i in 0..steps {
                    y = rk4_step(&mut f, &y, h)?;
                    stats.rhs_evals += 4;
                    t = if i + 1 == steps { stop } else { t + h };
                    on_accept(t, &y, &mut stats, i + 1 == steps)?;
                }
            }
        }
        Method::DormandPrince { rtol, atol } => {
            dopri5(&mut f, y0, rtol, atol, cfg, &mut stats, &mut on_accept)?;
        }
    }
    Ok((rec.times, rec.states, stats))
}

fn rk4_step<F>(f: &mut F, y: &Vector, h: f64) -> Result<Vector>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let k1 = f(y)?;
    let k2 = f(&(y + &k1 * (0.5 * h)))?;
    let k3 = f(&(y + &k2 * (0.5 * h)))?;
    let k4 = f(&(y + &k3 * h))?;
    Ok(y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

// Dormand-Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

fn error_norm(err: &Vector, y: &Vector, y_new: &Vector, rtol: f64, atol: f64) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new.iter()))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc) * (e / sc)
        })
        .sum();
    (sum / n).sqrt()
}

/// Starting step from the usual two-evaluation estimate.
fn initial_step<F>(f: &mut F, y0: &Vector, f0: &Vector, rtol: f64, atol: f64, t_end: f64) -> Result<f64>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let sc = y0.map(|v| atol + rtol * v.abs());
    let norm = |v: &Vector| (v.component_div(&sc).norm_squared() / v.len().max(1) as f64).sqrt();
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(t_end);
    let f1 = f(&(y0 + f0 * h0))?;
    let d2 = norm(&(f1 - f0)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    Ok((100.0 * h0).min(h1).min(t_end))
}

fn dopri5<F, A>(
    f: &mut F,
    y0: Vector,
    rtol: f64,
    atol: f64,
    cfg: &IntegratorConfig,
    stats: &mut IntegrationStats,
    on_accept: &mut A,
) -> Result<()>
where
    F: FnMut(&Vector) -> Result<Vector>,
    A: FnMut(f64, &Vector, &mut IntegrationStats, bool) -> Result<()>,
{
    let t_end = cfg.t_end;
    let h_min = 1e-14 * t_end;
    let mut y = y0;
    let mut k1 = f(&y)?;
    stats.rhs_evals += 1;
    let mut h = initial_step(f, &y, &k1, rtol, atol, t_end)?;
    stats.rhs_evals += 1;
    let mut t = 0.0;
    let mut last_rejected = false;

    while t < t_end {
        let stop = next_stop(t, cfg);
        let landing = t + h >= stop;
        let h_try = if landing { stop - t } else { h };
        if h_try < h_min && !landing {
            return Err(Error::StepUnderflow { t, h: h_try });
        }

        let k2 = f(&(&y + &k1 * (h_try * A21)))?;
        let k3 = f(&(&y + (&k1 * A31 + &k2 * A32) * h_try))?;
        let k4 = f(&(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h_try))?;
        let k5 = f(&(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h_try))?;
        let k6 = f(&(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h_try))?;
        let y_new = &y + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h_try;
        let k7 = f(&y_new)?;
        stats.rhs_evals += 6;

        let err_vec = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h_try;
        let err = error_norm(&err_vec, &y, &y_new, rtol, atol);
        if !err.is_finite() {
            return Err(Error::NonFinite { t: t + h_try });
        }
        let mut fac = if err == 0.0 { FAC_MAX } else { (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX) };

        if err <= 1.0 {
            t = if landing { stop } else { t + h_try };
            y = y_new;
            k1 = k7;
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            on_accept(t, &y, stats, landing)?;
            // a step shortened to land on a stop does not shrink the next one
            h = if landing { h.max(h_try * fac) } else { h_try * fac };
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = h_try * fac.min(1.0);
            if h < h_min {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }
    Ok(())
}

/// One monitored quantity along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantSeries {
    pub name: String,
    pub values: Vec<f64>,
    /// `max |v(t) − v(0)| / max(1, |v(0)|)`.
    pub max_drift: f64,
}

impl InvariantSeries {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        let max_drift = drift(&values);
        Self { name: name.into(), values, max_drift }
    }
}

pub fn drift(values: &[f64]) -> f64 {
    let Some(&v0) = values.first() else { return 0.0 };
    let denom = v0.abs().max(1.0);
    values.iter().map(|v| (v - v0).abs() / denom).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantReport {
    pub series: Vec<InvariantSeries>,
}

impl InvariantReport {
    pub fn get(&self, name: &str) -> Option<&InvariantSeries> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Largest drift among series whose name starts with `prefix`.
    pub fn max_drift_with_prefix(&self, prefix: &str) -> Option<f64> {
        self.series.iter().filter(|s| s.name.starts_with(prefix)).map(|s| s.max_drift).reduce(f64::max)
    }
}

fn variational_energy(model: &HamiltonianModel, x: &Vector, v: &Vector) -> Result<f64> {
    Ok(0.5 * v.dot(&(model.hess_h(x)? * v)))
}

/// Energy appropriate to the form: `H`, `H + ½yᵗH″y`, the multivector
/// Hamiltonian, or the extended energy of the two-system. For the naive
/// union (no Hamiltonian exists) this is `H(x)`.
pub fn form_energy(model: &HamiltonianModel, s: &State) -> Result<f64> {
    match s {
        State::Phase(x) => model.eval_h(x),
        State::Pair(p) => Ok(model.eval_h(&p.x)? + variational_energy(model, &p.x, &p.y)?),
        State::Two(t) => extended_energy(model, t),
        State::Multi(m) => {
            let mut e = model.eval_h(&m.x)?;
            for y in &m.ys {
                e += variational_energy(model, &m.x, y)?;
            }
            for z in &m.zs {
                e -= variational_energy(model, &m.x, z)?;
            }
            Ok(e)
        }
    }
}

/// Monitors along a trajectory.
///
/// Every form gets `energy` (see [`form_energy`]); for the naive union it is
/// `H(x)`. Two-system and bracket trajectories also get `casimir_k`
/// (coefficient of `λ^{2k}` in `det(Φ − λI)`), `spectrum_k_re`/`_im` (sorted
/// eigenvalues of Φ), `signature_plus`/`_minus`/`_zero` of `sym(M)`, and
/// `sp_residual`. When the initial `M` has an antisymmetric part,
/// `antisym_norm` is added, plus `antisym_freeze = ‖M_a(t) − M_a(0)‖_F` for
/// `n = 1`.
pub fn invariant_report(model: &HamiltonianModel, traj: &Trajectory) -> Result<InvariantReport> {
    let mut series = Vec::new();
    let energy = traj.states.iter().map(|s| form_energy(model, s)).collect::<Result<Vec<_>>>()?;
    series.push(InvariantSeries::new("energy", energy));

    if !matches!(traj.form, FormTag::Two | FormTag::Bracket) {
        return Ok(InvariantReport { series });
    }
    let twos = traj
        .states
        .iter()
        .map(|s| s.as_two().ok_or(Error::FormMismatch(traj.form.name())))
        .collect::<Result<Vec<_>>>()?;
    let n = model.n();
    let d = 2 * n;

    let mut casimir = alloc::vec![Vec::with_capacity(twos.len()); n];
    let mut spec_re = alloc::vec![Vec::with_capacity(twos.len()); d];
    let mut spec_im = alloc::vec![Vec::with_capacity(twos.len()); d];
    let mut sig = [Vec::new(), Vec::new(), Vec::new()];
    let mut sp = Vec::with_capacity(twos.len());
    for s in &twos {
        let phi = s.phi();
        let c = characteristic_polynomial(&phi)?;
        for k in 0..n {
            casimir[k].push(c[2 * k]);
        }
        for (k, ev) in sorted_spectrum(&phi)?.into_iter().enumerate() {
            spec_re[k].push(ev.re);
            spec_im[k].push(ev.im);
        }
        let g = signature_of(&sym_part(&s.m), ZERO_EIG_TOL)?;
        sig[0].push(g.plus as f64);
        sig[1].push(g.minus as f64);
        sig[2].push(g.zero as f64);
        sp.push(s.sp_residual());
    }
    for (k, v) in casimir.into_iter().enumerate() {
        series.push(InvariantSeries::new(format!("casimir_{k}"), v));
    }
    for (k, (re, im)) in spec_re.into_iter().zip(spec_im).enumerate() {
        series.push(InvariantSeries::new(format!("spectrum_{k}_re"), re));
        series.push(InvariantSeries::new(format!("spectrum_{k}_im"), im));
    }
    let [plus, minus, zero] = sig;
    series.push(InvariantSeries::new("signature_plus", plus));
    series.push(InvariantSeries::new("signature_minus", minus));
    series.push(InvariantSeries::new("signature_zero", zero));
    series.push(InvariantSeries::new("sp_residual", sp));

    let a0 = antisym_part(&twos[0].m);
    if a0.norm() > 0.0 {
        series.push(InvariantSeries::new("antisym_norm", twos.iter().map(|s| antisym_part(&s.m).norm()).collect()));
        if n == 1 {
            series.push(InvariantSeries::new(
                "antisym_freeze",
                twos.iter().map(|s| (antisym_part(&s.m) - &a0).norm()).collect(),
            ));
        }
    }
    Ok(InvariantReport { series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn harmonic_rk4_full_period() {
        let h = HamiltonianModel::harmonic(1);
        let traj = integrate(&h, &State::Phase(v(&[1.0, 0.0])), FormTag::Base, &IntegratorConfig::rk4(1e-3, 2.0 * PI)).unwrap();
        let x = traj.last().x();
        assert!((x - v(&[1.0, 0.0])).amax() <= 1e-9, "{x}");
        assert_eq!(*traj.times.last().unwrap(), 2.0 * PI);
    }

    #[test]
    fn zero_horizon_gives_single_sample() {
        let h = HamiltonianModel::quartic(0.1);
        let s0 = State::Two(TwoState::new(v(&[1.0, 0.0]), Mat::identity(2, 2)));
        for cfg in [IntegratorConfig::rk4(0.1, 0.0), IntegratorConfig::adaptive(1e-8, 1e-8, 0.0)] {
            let traj = integrate(&h, &s0, FormTag::Two, &cfg).unwrap();
            assert_eq!(traj.times, alloc::vec![0.0]);
            assert_eq!(traj.states[0], s0);
        }
    }

    #[test]
    fn adaptive_matches_exact_harmonic() {
        let h = HamiltonianModel::harmonic(1);
        let traj = integrate(&h, &State::Phase(v(&[1.0, 0.0])), FormTag::Base, &IntegratorConfig::adaptive(1e-11, 1e-11, 10.0)).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            assert!((s.x() - v(&[t.cos(), -t.sin()])).amax() < 1e-9);
        }
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn stride_and_grid_sampling() {
        let h = HamiltonianModel::harmonic(1);
        let s0 = State::Phase(v(&[1.0, 0.0]));
        let cfg = IntegratorConfig::rk4(0.01, 1.0).with_sampling(Sampling::Stride(10));
        let traj = integrate(&h, &s0, FormTag::Base, &cfg).unwrap();
        assert_eq!(traj.len(), 11);
        let cfg = IntegratorConfig::adaptive(1e-9, 1e-9, 2.0).with_sampling(Sampling::Grid(0.25));
        let traj = integrate(&h, &s0, FormTag::Base, &cfg).unwrap();
        assert_eq!(traj.len(), 9);
        for (k, t) in traj.times.iter().enumerate() {
            assert!((t - 0.25 * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn form_mismatch_and_bad_config() {
        let h = HamiltonianModel::harmonic(1);
        let s0 = State::Phase(v(&[1.0, 0.0]));
        assert!(matches!(integrate(&h, &s0, FormTag::Two, &IntegratorConfig::rk4(0.1, 1.0)), Err(Error::FormMismatch(_))));
        assert!(matches!(integrate(&h, &s0, FormTag::Base, &IntegratorConfig::rk4(-0.1, 1.0)), Err(Error::InvalidConfig(_))));
        assert!(matches!(integrate(&h, &s0, FormTag::Base, &IntegratorConfig::adaptive(0.0, 1e-9, 1.0)), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn blow_up_is_reported() {
        // H = −q²p gives q̇ = −q², which blows up at t = 1 from q₀ = −1
        let h = HamiltonianModel::from_terms(1, alloc::vec![crate::MonomialTerm::new(-1.0, alloc::vec![2, 1])]).unwrap();
        let r = integrate(&h, &State::Phase(v(&[-1.0, 0.0])), FormTag::Base, &IntegratorConfig::adaptive(1e-8, 1e-8, 2.0));
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::NonFinite { .. })), "{r:?}");
    }

    #[test]
    fn zero_phi_report_is_trivial() {
        let h = HamiltonianModel::quartic(0.1);
        let traj = integrate(&h, &State::Two(TwoState::zero_phi(v(&[1.0, 0.3]))), FormTag::Two, &IntegratorConfig::adaptive(1e-9, 1e-9, 5.0)).unwrap();
        let report = invariant_report(&h, &traj).unwrap();
        for name in ["casimir_0", "spectrum_0_re", "spectrum_1_im", "sp_residual"] {
            assert!(report.get(name).unwrap().values.iter().all(|&v| v == 0.0), "{name}");
        }
        let energy = &report.get("energy").unwrap().values;
        for (e, s) in energy.iter().zip(&traj.states) {
            assert_eq!(*e, h.eval_h(s.x()).unwrap());
        }
        assert_eq!(report.get("signature_zero").unwrap().values[0], 2.0);
    }
}

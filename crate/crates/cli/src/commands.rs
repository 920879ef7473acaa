//! Subcommand implementations. Each writes a human-readable summary to `out`
//! and reports failure through [`CliError`].

use std::fs;
use std::io::Write;
use std::path::Path;

use log::info;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use twosystem_core::dynamics::two_system_rhs;
use twosystem_core::integrate::{integrate, invariant_report, InvariantSeries};
use twosystem_core::linalg::j_mul;
use twosystem_core::oracles::{
    action_angle_direct, action_angle_residual, check_stationary, quadratic_closed_form, stationary_point_solution,
    zero_phi_solution, ActionAngleModel, AngleState, QuadraticModel,
};
use twosystem_core::{
    FormTag, HamiltonianModel, IntegratorConfig, InvariantReport, Mat, MultiVectorState, Sampling, State, Trajectory,
    TwoState, Vector, VectorFormState,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{read_trajectory, write_report_file, write_trajectory_file};

/// Initial state of `form` built from the config's `(x, M)` or vectors.
pub fn initial_state(cfg: &RunConfig, form: FormTag) -> Result<State, CliError> {
    let (x, m) = cfg.initial_moment()?;
    Ok(match form {
        FormTag::Base => State::Phase(x),
        FormTag::Two | FormTag::Bracket => State::Two(TwoState::new(x, m)),
        FormTag::Vector | FormTag::Variational => {
            let (ys, zs) = cfg.initial_signature_vectors()?;
            let y = match (ys.len(), zs.len()) {
                (0, 0) => Vector::zeros(x.len()),
                (1, 0) => ys.into_iter().next().expect("one vector"),
                _ => {
                    return Err(CliError::Config(format!(
                        "form `{form}` needs a rank-1 positive semidefinite initial M (one y), got signature ({}, {})",
                        ys.len(),
                        zs.len()
                    )))
                }
            };
            State::Pair(VectorFormState { x, y })
        }
        FormTag::Multivector => {
            let (ys, zs) = cfg.initial_signature_vectors()?;
            State::Multi(MultiVectorState { x, ys, zs })
        }
    })
}

fn print_report(out: &mut dyn Write, report: &InvariantReport) -> Result<(), CliError> {
    for s in &report.series {
        writeln!(out, "  {:<16} max drift {:.3e}", s.name, s.max_drift)?;
    }
    Ok(())
}

/// Integrates the configured form, writes the trajectory CSV and report JSON.
pub fn simulate(cfg: &RunConfig, out: &mut dyn Write) -> Result<(Trajectory, InvariantReport), CliError> {
    let model = cfg.model()?;
    let form = cfg.form()?;
    let s0 = initial_state(cfg, form)?;
    let traj = integrate(&model, &s0, form, &cfg.integrator()?)?;
    let report = invariant_report(&model, &traj)?;
    if let Some(p) = &cfg.output.trajectory {
        write_trajectory_file(p, model.n(), &traj)?;
        info!("wrote {}", p.display());
    }
    if let Some(p) = &cfg.output.report {
        write_report_file(p, &report)?;
        info!("wrote {}", p.display());
    }
    writeln!(
        out,
        "{form} form: {} samples, {} accepted / {} rejected steps, t_end = {}",
        traj.len(),
        traj.stats.accepted,
        traj.stats.rejected,
        traj.times.last().copied().unwrap_or(0.0)
    )?;
    print_report(out, &report)?;
    Ok((traj, report))
}

/// Maximum x- and (when both forms carry one) M-deviation between two forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub x_dev: f64,
    pub m_dev: Option<f64>,
}

fn comparable(a: FormTag, b: FormTag) -> bool {
    a == b || (a != FormTag::Variational && b != FormTag::Variational)
}

/// Integrates `run.form` and `run.compare_with` from consistent initial data
/// on a shared time grid.
pub fn compare(cfg: &RunConfig, out: &mut dyn Write) -> Result<Comparison, CliError> {
    let model = cfg.model()?;
    let a = cfg.form()?;
    let b = crate::config::parse_form(
        cfg.run.compare_with.as_deref().ok_or_else(|| CliError::Config("compare needs run.compare_with".into()))?,
    )?;
    if !comparable(a, b) {
        return Err(CliError::Config(format!("forms `{a}` and `{b}` are not comparable")));
    }
    let mut icfg = cfg.integrator()?;
    if matches!(icfg.sampling, Sampling::Stride(_)) && icfg.t_end > 0.0 {
        icfg.sampling = Sampling::Grid(icfg.t_end / 100.0);
    }
    let ta = integrate(&model, &initial_state(cfg, a)?, a, &icfg)?;
    let tb = integrate(&model, &initial_state(cfg, b)?, b, &icfg)?;
    if ta.times != tb.times {
        return Err(CliError::Config("trajectories do not share sample times".into()));
    }
    let mut x_dev = 0.0_f64;
    let mut m_dev = (a.has_moment() && b.has_moment()).then_some(0.0_f64);
    for (sa, sb) in ta.states.iter().zip(&tb.states) {
        x_dev = x_dev.max((sa.x() - sb.x()).amax());
        if let (Some(d), Some(ma), Some(mb)) = (m_dev.as_mut(), sa.moment(), sb.moment()) {
            *d = d.max((ma - mb).amax());
        }
    }
    writeln!(out, "{a} vs {b}: {} common samples", ta.len())?;
    writeln!(out, "  max x deviation {x_dev:.3e}")?;
    if let Some(d) = m_dev {
        writeln!(out, "  max M deviation {d:.3e}")?;
    }
    let worst = x_dev.max(m_dev.unwrap_or(0.0));
    let tol = cfg.tolerances.compare;
    if worst > tol {
        return Err(CliError::Tolerance(format!("deviation {worst:.3e} above {tol:e}")));
    }
    writeln!(out, "  within tolerance {tol:e}")?;
    Ok(Comparison { x_dev, m_dev })
}

/// Outcome of an oracle check.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleOutcome {
    pub x_dev: f64,
    pub m_dev: f64,
}

fn grid(icfg: IntegratorConfig, samples: usize) -> IntegratorConfig {
    if icfg.t_end > 0.0 && matches!(icfg.sampling, Sampling::Stride(_)) {
        icfg.with_sampling(Sampling::Grid(icfg.t_end / samples.max(1) as f64))
    } else {
        icfg
    }
}

fn deviations<F>(traj: &Trajectory, mut exact: F) -> Result<OracleOutcome, CliError>
where
    F: FnMut(f64) -> Result<TwoState, CliError>,
{
    let mut o = OracleOutcome { x_dev: 0.0, m_dev: 0.0 };
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let e = exact(*t)?;
        let s = s.as_two().ok_or_else(|| CliError::Config("expected a two-system trajectory".into()))?;
        o.x_dev = o.x_dev.max((&s.x - &e.x).amax() / e.x.amax().max(1.0));
        o.m_dev = o.m_dev.max((&s.m - &e.m).amax() / e.m.amax().max(1.0));
    }
    Ok(o)
}

/// Closed-form case selected by `oracle.case` against numerical integration.
pub fn oracle(cfg: &RunConfig, out: &mut dyn Write) -> Result<OracleOutcome, CliError> {
    let oc = cfg.oracle.as_ref().ok_or_else(|| CliError::Config("oracle command needs an [oracle] section".into()))?;
    let tol = cfg.tolerances.oracle;
    let icfg = grid(cfg.integrator()?, oc.samples);
    let outcome = match oc.case.as_str() {
        "quadratic" => {
            let model = cfg.model()?;
            let qm = QuadraticModel::from_model(&model).map_err(|e| CliError::Oracle(e.to_string()))?;
            let (x0, m0) = cfg.initial_moment()?;
            let traj = integrate(&model, &State::Two(TwoState::new(x0.clone(), m0.clone())), FormTag::Two, &icfg)?;
            let phi0 = j_mul(&m0);
            deviations(&traj, |t| Ok(quadratic_closed_form(&qm, &x0, &phi0, t)?))?
        }
        "zero-phi" => {
            let model = cfg.model()?;
            let (x0, _) = cfg.initial_moment()?;
            let traj = integrate(&model, &State::Two(TwoState::zero_phi(x0.clone())), FormTag::Two, &icfg)?;
            let base = zero_phi_solution(&model, &x0, &icfg)?;
            if base.times != traj.times {
                return Err(CliError::Config("base and two-system runs do not share sample times".into()));
            }
            let mut states = base.states.into_iter();
            deviations(&traj, |_| Ok(states.next().and_then(|s| s.as_two().cloned()).expect("same length")))?
        }
        "stationary" => {
            let model = cfg.model()?;
            let (x0, m0) = cfg.initial_moment()?;
            check_stationary(&model, &x0).map_err(|e| CliError::Oracle(e.to_string()))?;
            let phi0 = j_mul(&m0);
            let traj = integrate(&model, &State::Two(TwoState::new(x0.clone(), m0)), FormTag::Two, &icfg)?;
            deviations(&traj, |t| Ok(stationary_point_solution(&model, &x0, &phi0, t)?))?
        }
        "action-angle" => return action_angle(cfg, &icfg, out),
        other => {
            return Err(CliError::Config(format!(
                "unknown oracle case `{other}` (quadratic | zero-phi | stationary | action-angle)"
            )))
        }
    };
    writeln!(out, "oracle {}: max x deviation {:.3e}, max M deviation {:.3e}", oc.case, outcome.x_dev, outcome.m_dev)?;
    let worst = outcome.x_dev.max(outcome.m_dev);
    if worst > tol {
        return Err(CliError::Tolerance(format!("oracle deviation {worst:.3e} above {tol:e}")));
    }
    writeln!(out, "  within tolerance {tol:e}")?;
    Ok(outcome)
}

fn action_angle(cfg: &RunConfig, icfg: &IntegratorConfig, out: &mut dyn Write) -> Result<OracleOutcome, CliError> {
    let oc = cfg.oracle.as_ref().expect("checked by caller");
    let coeffs = oc.action_coeffs.clone().ok_or_else(|| CliError::Config("action-angle case needs action_coeffs".into()))?;
    let [i, theta, alpha, beta, gamma] =
        oc.action_state.ok_or_else(|| CliError::Config("action-angle case needs action_state".into()))?;
    let am = ActionAngleModel::Polynomial(coeffs);
    let s0 = AngleState::new(i, theta, alpha, beta, gamma);
    let n = oc.samples.max(1);
    let residual = (0..n)
        .map(|k| action_angle_residual(&am, &s0, icfg.t_end * k as f64 / (n - 1).max(1) as f64))
        .fold(0.0, f64::max);
    writeln!(out, "closed form vs its linear system at {n} times: max residual {residual:.3e}")?;

    let run = action_angle_direct(&am, &s0, icfg)?;
    writeln!(out, "direct two-system integration in (θ, I), α = M_II (informational):")?;
    writeln!(out, "  β: max |β − β₀e^(ω₂t)| = {:.3e}, max |β − (β₀ + ω₂α₀t)| = {:.3e}", run.dev_exponential, run.dev_linear)?;
    writeln!(out, "  observed β behaviour: {}", run.behaviour)?;
    writeln!(
        out,
        "  θ rate {:.12e} (H′ + H‴α₀ = {:.12e}, H′ + ½H‴α₀ = {:.12e})",
        run.theta_rate, run.omega1, run.omega1_half
    )?;
    let tol = cfg.tolerances.action_residual;
    if residual > tol {
        return Err(CliError::Tolerance(format!("closed-form residual {residual:.3e} above {tol:e}")));
    }
    Ok(OracleOutcome { x_dev: residual, m_dev: residual })
}

/// `q̇ = p, ṗ = −(q + εq³) − 3εqα, α̇ = 2β, β̇ = −(1 + 3εq²)α + γ,
/// γ̇ = −2β(1 + 3εq²)` written out by hand.
pub fn quartic_rhs_by_hand(eps: f64, s: [f64; 5]) -> [f64; 5] {
    let [q, p, a, b, g] = s;
    let k = 1.0 + 3.0 * eps * q * q;
    [p, -(q + eps * q * q * q) - 3.0 * eps * q * a, 2.0 * b, -k * a + g, -2.0 * b * k]
}

fn quartic_rhs_derived(model: &HamiltonianModel, s: [f64; 5]) -> Result<[f64; 5], CliError> {
    let [q, p, a, b, g] = s;
    let st = TwoState::new(Vector::from_column_slice(&[q, p]), Mat::from_row_slice(2, 2, &[a, b, b, g]));
    let d = two_system_rhs(model, &st)?;
    Ok([d.x[0], d.x[1], d.m[(0, 0)], d.m[(0, 1)], d.m[(1, 1)]])
}

/// Largest componentwise disagreement, relative to `max(1, |·|)`, between
/// the hand-written quartic system and the general two-system over
/// `samples` seeded random states in `[−2, 2]⁵`.
pub fn quartic_identity_check(eps: f64, samples: usize, seed: u64) -> Result<f64, CliError> {
    let model = HamiltonianModel::quartic(eps);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let s: [f64; 5] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let hand = quartic_rhs_by_hand(eps, s);
        let derived = quartic_rhs_derived(&model, s)?;
        for (h, d) in hand.iter().zip(&derived) {
            worst = worst.max((h - d).abs() / h.abs().max(1.0));
        }
    }
    Ok(worst)
}

pub const QUARTIC_IDENTITY_TOL: f64 = 1e-12;

/// Checks the hand-written quartic system against the general one and
/// integrates it from `(q, p, α, β, γ) = (1, 0, 1, 0, 1)`.
pub fn example_quartic(
    eps: f64,
    t_end: f64,
    rtol: f64,
    out_dir: &Path,
    out: &mut dyn Write,
) -> Result<InvariantReport, CliError> {
    if !(t_end > 0.0) {
        return Err(CliError::Config("t_end must be positive".into()));
    }
    let worst = quartic_identity_check(eps, 1000, 2024)?;
    writeln!(out, "quartic ε = {eps}: hand-written vs general right-hand side at 1000 states, max deviation {worst:.3e}")?;
    if worst > QUARTIC_IDENTITY_TOL {
        return Err(CliError::Mismatch(format!("max deviation {worst:.3e} above {QUARTIC_IDENTITY_TOL:e}")));
    }
    let model = HamiltonianModel::quartic(eps);
    let s0 = State::Two(TwoState::new(Vector::from_column_slice(&[1.0, 0.0]), Mat::identity(2, 2)));
    let traj = integrate(&model, &s0, FormTag::Two, &IntegratorConfig::adaptive(rtol, rtol, t_end))?;
    let report = invariant_report(&model, &traj)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    write_trajectory_file(&out_dir.join("quartic.csv"), 1, &traj)?;
    write_report_file(&out_dir.join("quartic.report.json"), &report)?;
    writeln!(out, "integrated (1, 0, 1, 0, 1) to t = {t_end}: {} samples", traj.len())?;
    print_report(out, &report)?;
    Ok(report)
}

/// Recomputes the invariant report from a saved trajectory CSV.
///
/// Forms that carry a moment matrix are monitored through `(x, M)`; for the
/// vector and multivector forms only the energy is kept, and it equals the
/// extended energy of `(x, M)`.
pub fn invariants(cfg: &RunConfig, csv: &Path, out: &mut dyn Write) -> Result<InvariantReport, CliError> {
    let model = cfg.model()?;
    let form = cfg.form()?;
    let f = fs::File::open(csv).map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
    let table = read_trajectory(f, model.n())?;
    let report = match (&table.moments, form) {
        (Some(ms), FormTag::Two | FormTag::Bracket | FormTag::Vector | FormTag::Multivector) => {
            let states =
                table.xs.iter().zip(ms).map(|(x, m)| State::Two(TwoState::new(x.clone(), m.clone()))).collect();
            let tag = if form == FormTag::Bracket { FormTag::Bracket } else { FormTag::Two };
            let traj = Trajectory { form: tag, times: table.times.clone(), states, stats: Default::default() };
            let mut r = invariant_report(&model, &traj)?;
            if matches!(form, FormTag::Vector | FormTag::Multivector) {
                r.series.retain(|s| s.name == "energy");
            }
            r
        }
        (_, FormTag::Base | FormTag::Variational) => {
            let energy = table.xs.iter().map(|x| model.eval_h(x)).collect::<Result<Vec<_>, _>>()?;
            InvariantReport { series: vec![InvariantSeries::new("energy", energy)] }
        }
        (None, _) => return Err(CliError::Config(format!("CSV has no moment columns but form is `{form}`"))),
    };
    print_report(out, &report)?;
    Ok(report)
}

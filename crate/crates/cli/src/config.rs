//! Run configuration in TOML.
//!
//! ```toml
//! [model]
//! builtin = "quartic(0.1)"      # or "harmonic"; or polynomial_file = "h.poly"
//! n = 1
//!
//! [initial]
//! x = [1.0, 0.0]
//! m_upper = [1.0, 0.0, 1.0]     # or m = [[..], ..], or ys = [[..]] / zs = [[..]]
//!
//! [run]
//! form = "two"
//! compare_with = "bracket"      # used by `compare`
//!
//! [integrator]
//! method = "dopri5"             # or "rk4" with `step`
//! rtol = 1e-10
//! atol = 1e-10
//! t_end = 100.0
//! sample_stride = 1             # or sample_dt = 0.5
//!
//! [output]
//! trajectory = "out.csv"
//! report = "out.report.json"
//!
//! [tolerances]
//! compare = 1e-8
//!
//! [oracle]
//! case = "quadratic"            # zero-phi | stationary | action-angle
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twosystem_core::structure::{compose, decompose_signature};
use twosystem_core::{FormTag, HamiltonianModel, IntegratorConfig, Mat, Method, Sampling, Vector};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial_file: Option<PathBuf>,
    #[serde(default = "one")]
    pub n: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_upper: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ys: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zs: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub form: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_with: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { form: "two".into(), compare_with: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub method: String,
    pub rtol: f64,
    pub atol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub t_end: f64,
    #[serde(default = "one")]
    pub sample_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self { method: "dopri5".into(), rtol: 1e-10, atol: 1e-10, step: None, t_end: 10.0, sample_stride: 1, sample_dt: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub compare: f64,
    pub sp_residual: f64,
    pub signature: f64,
    pub oracle: f64,
    pub action_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { compare: 1e-8, sp_residual: 1e-9, signature: 1e-9, oracle: 1e-8, action_residual: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub case: String,
    /// `H(I) = Σ cₖ Iᵏ` for the action-angle case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_coeffs: Option<Vec<f64>>,
    /// `(I, θ, α, β, γ)` for the action-angle case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_state: Option<[f64; 5]>,
    #[serde(default = "hundred")]
    pub samples: usize,
}

fn hundred() -> usize {
    100
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_owned();
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.model.polynomial_file.as_mut() {
            resolve(p);
        }
        let traj = cfg.output.trajectory.get_or_insert_with(|| PathBuf::from(format!("{stem}.csv")));
        resolve(traj);
        let report = cfg.output.report.get_or_insert_with(|| PathBuf::from(format!("{stem}.report.json")));
        resolve(report);
        Ok(cfg)
    }

    pub fn form(&self) -> Result<FormTag, CliError> {
        parse_form(&self.run.form)
    }

    pub fn model(&self) -> Result<HamiltonianModel, CliError> {
        build_model(&self.model)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let it = &self.integrator;
        let method = match it.method.as_str() {
            "dopri5" => Method::DormandPrince { rtol: it.rtol, atol: it.atol },
            "rk4" => Method::Rk4 { step: it.step.ok_or_else(|| config_err("integrator.method = \"rk4\" needs `step`"))? },
            other => return Err(config_err(format!("unknown integrator method `{other}` (dopri5 | rk4)"))),
        };
        let sampling = match it.sample_dt {
            Some(dt) => Sampling::Grid(dt),
            None => Sampling::Stride(it.sample_stride),
        };
        Ok(IntegratorConfig { method, t_end: it.t_end, sampling })
    }

    /// Initial phase point and moment matrix `M`. Exactly one of `m_upper`,
    /// `m` and `ys`/`zs` may be given; none means `M = 0`.
    pub fn initial_moment(&self) -> Result<(Vector, Mat), CliError> {
        let d = 2 * self.model.n;
        let ini = &self.initial;
        let x = vector_of(&ini.x, d, "initial.x")?;
        let given = [ini.m_upper.is_some(), ini.m.is_some(), ini.ys.is_some() || ini.zs.is_some()];
        if given.iter().filter(|&&g| g).count() > 1 {
            return Err(config_err("give only one of initial.m_upper, initial.m, initial.ys/zs"));
        }
        let m = if let Some(up) = &ini.m_upper {
            let coords = twosystem_core::poisson::MomentCoordinates(up.clone());
            if up.len() != twosystem_core::poisson::MomentCoordinates::len_for(self.model.n) {
                return Err(config_err(format!("initial.m_upper needs {} entries", d * (d + 1) / 2)));
            }
            coords.to_matrix().map_err(|e| config_err(e.to_string()))?
        } else if let Some(rows) = &ini.m {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(config_err(format!("initial.m must be {d}×{d}")));
            }
            let m = Mat::from_fn(d, d, |i, j| rows[i][j]);
            let residual = twosystem_core::linalg::symmetry_residual(&m);
            if residual > self.tolerances.sp_residual * twosystem_core::linalg::scale(&m) {
                return Err(config_err(format!(
                    "initial M must be symmetric (Φ = JM in sp(2n)): ‖M − Mᵗ‖ = {residual:e}"
                )));
            }
            m
        } else {
            let (ys, zs) = self.initial_vectors(d)?;
            compose(d, &ys, &zs).map_err(|e| config_err(e.to_string()))?
        };
        Ok((x, m))
    }

    fn initial_vectors(&self, d: usize) -> Result<(Vec<Vector>, Vec<Vector>), CliError> {
        let list = |v: &Option<Vec<Vec<f64>>>, key: &str| -> Result<Vec<Vector>, CliError> {
            v.iter().flatten().map(|y| vector_of(y, d, key)).collect()
        };
        Ok((list(&self.initial.ys, "initial.ys")?, list(&self.initial.zs, "initial.zs")?))
    }

    /// The `(ys, zs)` of the initial data: as given, or from the signature
    /// decomposition of `M`.
    pub fn initial_signature_vectors(&self) -> Result<(Vec<Vector>, Vec<Vector>), CliError> {
        if self.initial.ys.is_some() || self.initial.zs.is_some() {
            return self.initial_vectors(2 * self.model.n);
        }
        let (_, m) = self.initial_moment()?;
        decompose_signature(&m).map_err(|e| config_err(e.to_string()))
    }
}

pub fn parse_form(s: &str) -> Result<FormTag, CliError> {
    FormTag::parse(s).ok_or_else(|| {
        config_err(format!("unknown form `{s}` (base | variational | vector | two | multivector | bracket)"))
    })
}

fn vector_of(v: &[f64], d: usize, key: &str) -> Result<Vector, CliError> {
    if v.len() != d {
        return Err(config_err(format!("{key} needs {d} entries, found {}", v.len())));
    }
    Ok(Vector::from_column_slice(v))
}

/// `"quartic(ε)"`, `"harmonic"`, or a polynomial file.
pub fn build_model(ms: &ModelSection) -> Result<HamiltonianModel, CliError> {
    match (&ms.builtin, &ms.polynomial_file) {
        (Some(_), Some(_)) => Err(config_err("give model.builtin or model.polynomial_file, not both")),
        (None, None) => Err(config_err("model needs `builtin` or `polynomial_file`")),
        (Some(name), None) => builtin_model(name.trim(), ms.n),
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            HamiltonianModel::parse(ms.n, &text).map_err(|e| config_err(format!("{}: {e}", path.display())))
        }
    }
}

pub fn builtin_model(name: &str, n: usize) -> Result<HamiltonianModel, CliError> {
    if name == "harmonic" {
        return Ok(HamiltonianModel::harmonic(n));
    }
    if let Some(arg) = name.strip_prefix("quartic(").and_then(|r| r.strip_suffix(')')) {
        if n != 1 {
            return Err(config_err("the quartic model has n = 1"));
        }
        let eps: f64 = arg.trim().parse().map_err(|_| config_err(format!("bad ε in `{name}`")))?;
        return Ok(HamiltonianModel::quartic(eps));
    }
    Err(config_err(format!("unknown builtin model `{name}` (quartic(ε) | harmonic)")))
}

//! Scenario configuration: the JSON schema of `rhombus run --config` and
//! the non-throwing validator behind `rhombus validate`.

use rhombus_core::twa::NoiseOrdering;
use rhombus_core::{LatticeSpec, ReservoirParams, TwaParams};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Bloch band table over a quasimomentum grid.
    Bands,
    /// One exact stationary SPDM, dumped entrywise.
    Steady,
    /// Exact stationary current over a flux grid, optionally for several
    /// lattice lengths.
    PhiSweep,
    /// Monte-Carlo stationary current over a flux grid, optionally for
    /// several interaction strengths.
    TwaSweep,
    /// Monte-Carlo site populations versus time from the empty lattice.
    Transient,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scenario::Bands => "bands",
            Scenario::Steady => "steady",
            Scenario::PhiSweep => "phi-sweep",
            Scenario::TwaSweep => "twa-sweep",
            Scenario::Transient => "transient",
        };
        f.write_str(name)
    }
}

/// Monte-Carlo settings; combined with the shared `spec` and `r` fields
/// into core [`TwaParams`] at run time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwaSettings {
    pub g: f64,
    pub dt: f64,
    pub n_traj: usize,
    pub burn_in: f64,
    pub avg_window: f64,
    pub seed: u64,
    #[serde(default)]
    pub ordering: NoiseOrdering,
}

impl TwaSettings {
    pub fn params(&self, spec: LatticeSpec, r: ReservoirParams) -> TwaParams {
        TwaParams {
            spec,
            r,
            g: self.g,
            dt: self.dt,
            n_traj: self.n_traj,
            burn_in: self.burn_in,
            avg_window: self.avg_window,
            seed: self.seed,
            ordering: self.ordering,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientSettings {
    /// Total simulated time.
    pub t_final: f64,
    /// Sampling interval of the output series.
    pub stride: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub spec: LatticeSpec,
    pub r: ReservoirParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twa: Option<TwaSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_grid: Option<Vec<f64>>,
    /// Lattice lengths for phi-sweep; defaults to [spec.m].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_values: Option<Vec<usize>>,
    /// Interaction strengths for twa-sweep; defaults to [twa.g].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_values: Option<Vec<f64>>,
    /// Per-g step sizes, parallel to g_values; defaults to twa.dt for all.
    /// Larger g needs smaller dt; this keeps a multi-g sweep in one config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transient: Option<TransientSettings>,
    pub output_path: String,
}

/// Evenly spaced grid including both end points.
pub fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect()
}

impl ScenarioConfig {
    /// Fill in the grids a scenario needs but the file left implicit, so
    /// the manifest echoes exactly what was run. Returns the filled-in
    /// field names.
    pub fn resolve(&mut self) -> Vec<String> {
        let mut defaulted = Vec::new();
        match self.scenario {
            Scenario::Bands => {
                if self.kappa_grid.is_none() {
                    self.kappa_grid = Some(linspace(-PI, PI, 256));
                    defaulted.push("kappa_grid = 256 points on [-pi, pi]".into());
                }
                if self.phi_grid.is_none() {
                    self.phi_grid = Some(vec![self.spec.phi]);
                    defaulted.push("phi_grid = [spec.phi]".into());
                }
            }
            Scenario::PhiSweep => {
                if self.m_values.is_none() {
                    self.m_values = Some(vec![self.spec.m]);
                    defaulted.push("m_values = [spec.m]".into());
                }
            }
            Scenario::TwaSweep => {
                if let Some(twa) = &self.twa {
                    if self.g_values.is_none() {
                        self.g_values = Some(vec![twa.g]);
                        defaulted.push("g_values = [twa.g]".into());
                    }
                    if self.dt_values.is_none() {
                        let n = self.g_values.as_ref().map_or(1, Vec::len);
                        self.dt_values = Some(vec![twa.dt; n]);
                        defaulted.push("dt_values = twa.dt for every g".into());
                    }
                }
            }
            Scenario::Steady | Scenario::Transient => {}
        }
        defaulted
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Warning,
    Error,
}

/// One validation finding; `field` names the config entry it concerns.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag} {}: {}", self.field, self.message)
    }
}

/// Range and consistency checks. Returns diagnostics instead of failing so
/// a config can be linted as a whole; `run` refuses to start if any of them
/// is an error.
pub fn validate(cfg: &ScenarioConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    fn error(out: &mut Vec<Diagnostic>, field: &str, message: String) {
        out.push(Diagnostic { severity: Severity::Error, field: field.into(), message })
    }

    if cfg.spec.m == 0 {
        error(&mut out, "spec.m", "need at least one rhomb".into());
    }
    if !cfg.spec.j.is_finite() || cfg.spec.j < 0.0 {
        error(&mut out, "spec.j", format!("hopping must be finite and >= 0, got {}", cfg.spec.j));
    }
    if cfg.r.gamma_l <= 0.0 || cfg.r.gamma_r <= 0.0 {
        error(
            &mut out,
            "r.gamma_l/r.gamma_r",
            format!(
                "reservoir rates must be positive (got {}, {}); an undriven chain has no stationary state",
                cfg.r.gamma_l, cfg.r.gamma_r
            ),
        );
    }
    if cfg.r.n_l < 0.0 || cfg.r.n_r < 0.0 {
        error(&mut out, "r.n_l/r.n_r", "reservoir densities cannot be negative".into());
    }
    if cfg.output_path.is_empty() {
        error(&mut out, "output_path", "must not be empty".into());
    }

    let needs_twa = matches!(cfg.scenario, Scenario::TwaSweep | Scenario::Transient);
    let exact = matches!(cfg.scenario, Scenario::Steady | Scenario::PhiSweep);
    if exact && cfg.spec.u != 0.0 {
        error(&mut out, "spec.u", format!("the exact solver handles u = 0 only, got {}", cfg.spec.u));
    }
    if matches!(cfg.scenario, Scenario::PhiSweep | Scenario::TwaSweep)
        && cfg.phi_grid.as_ref().map_or(true, |g| g.is_empty())
    {
        error(&mut out, "phi_grid", "this scenario sweeps flux; provide a non-empty grid".into());
    }
    if matches!(cfg.scenario, Scenario::PhiSweep | Scenario::TwaSweep) && cfg.r.n_l == 0.0 {
        error(&mut out, "r.n_l", "current sweeps normalize by nbar_L, which must be positive".into());
    }

    if needs_twa {
        match &cfg.twa {
            None => error(&mut out, "twa", format!("scenario {} needs Monte-Carlo settings", cfg.scenario)),
            Some(twa) => validate_twa(cfg, twa, &mut out),
        }
    }
    if cfg.scenario == Scenario::Transient {
        match &cfg.transient {
            None => error(&mut out, "transient", "this scenario needs t_final and stride".into()),
            Some(t) => {
                if !(t.stride > 0.0 && t.t_final >= t.stride) {
                    error(
                        &mut out,
                        "transient",
                        format!("need 0 < stride <= t_final, got stride {} and t_final {}", t.stride, t.t_final),
                    );
                }
            }
        }
    }
    if let (Some(g), Some(dt)) = (&cfg.g_values, &cfg.dt_values) {
        if g.len() != dt.len() {
            error(&mut out, "dt_values", format!("length {} does not match g_values length {}", dt.len(), g.len()));
        }
    }
    out
}

fn validate_twa(cfg: &ScenarioConfig, twa: &TwaSettings, out: &mut Vec<Diagnostic>) {
    let mut push = |severity: Severity, field: &str, message: String| {
        out.push(Diagnostic { severity, field: field.into(), message })
    };
    if twa.dt <= 0.0 {
        push(Severity::Error, "twa.dt", "step size must be positive".into());
        return;
    }
    if twa.n_traj < 2 {
        push(Severity::Error, "twa.n_traj", "error bars need at least 2 trajectories".into());
    }
    if twa.avg_window <= 0.0 && cfg.scenario != Scenario::Transient {
        push(Severity::Error, "twa.avg_window", "averaging window must be positive".into());
    }
    if twa.burn_in < 0.0 {
        push(Severity::Error, "twa.burn_in", "burn-in cannot be negative".into());
    }
    if twa.g < 0.0 {
        push(Severity::Warning, "twa.g", "attractive interactions are untested territory".into());
    }
    if twa.g > 0.0 && cfg.r.n_l == 0.0 {
        push(
            Severity::Error,
            "twa.g",
            "g > 0 with nbar_L = 0 leaves the microscopic interaction u = g/nbar_L undefined".into(),
        );
    }

    // Step-size heuristics. The linear bound comes from the band edge
    // J sqrt(2); the nonlinear one from the measured onset of Heun runaway
    // at frequency ~ 4 g (amplitude excursions reach a few nbar_L).
    let gs: Vec<f64> = cfg.g_values.clone().unwrap_or_else(|| vec![twa.g]);
    let dts: Vec<f64> = cfg
        .dt_values
        .clone()
        .unwrap_or_else(|| vec![twa.dt; gs.len()]);
    for (&g, &dt) in gs.iter().zip(dts.iter()) {
        if dt * cfg.spec.j * std::f64::consts::SQRT_2 > 0.2 {
            push(
                Severity::Warning,
                "twa.dt",
                format!("dt = {dt} does not resolve the band-edge period at J = {}; expect divergence", cfg.spec.j),
            );
        }
        if 4.0 * g * dt > 0.05 {
            push(
                Severity::Warning,
                "twa.dt",
                format!("dt = {dt} risks nonlinear runaway at g = {g}; keep 4*g*dt below 0.05"),
            );
        }
    }
}

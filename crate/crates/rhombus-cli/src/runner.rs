//! Scenario execution: turns a resolved config into CSV data plus a JSON
//! manifest that records exactly what was run.

use crate::config::{Scenario, ScenarioConfig};
use crate::csvout::{Cell, Table};
use rhombus_core::lattice::{bloch_bands, site_labels};
use rhombus_core::lindblad::{phi_sweep, reservoir_current, steady_state};
use rhombus_core::twa::{estimate_spdm, transient_populations};
use rhombus_core::{build_hamiltonian, LatticeSpec};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid config, field {field}: {message}")]
    Config { field: String, message: String },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Per-grid-point seed spacing; odd and full-width so consecutive points
/// never share a ChaCha key no matter how many streams each one consumes.
const SEED_STRIDE: u64 = 0x9E3779B97F4A7C15;

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<&'a str>,
    /// Master Monte-Carlo seed; absent for exact scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed_policy: Option<String>,
    config: &'a ScenarioConfig,
    defaulted: &'a [String],
    outputs: Vec<OutputDesc>,
    /// Extra scalar results that have no natural CSV home.
    #[serde(skip_serializing_if = "Option::is_none")]
    results: Option<serde_json::Value>,
    wall_time_s: f64,
}

#[derive(Serialize)]
struct OutputDesc {
    path: String,
    rows: usize,
    columns: Vec<ColumnDesc>,
}

#[derive(Serialize)]
struct ColumnDesc {
    name: String,
    unit: &'static str,
}

fn col(name: impl Into<String>, unit: &'static str) -> ColumnDesc {
    ColumnDesc { name: name.into(), unit }
}

struct ScenarioOutput {
    table: Table,
    columns: Vec<ColumnDesc>,
    rows: usize,
    results: Option<serde_json::Value>,
    monte_carlo: bool,
}

/// Execute the scenario and write `<output_path>` plus
/// `<output stem>.manifest.json` next to it. Returns the written paths.
pub fn run(cfg: &ScenarioConfig, preset: Option<&str>, defaulted: &[String]) -> Result<Vec<PathBuf>, RunError> {
    let started = Instant::now();
    let out = match cfg.scenario {
        Scenario::Bands => bands(cfg),
        Scenario::Steady => steady(cfg)?,
        Scenario::PhiSweep => exact_sweep(cfg)?,
        Scenario::TwaSweep => twa_sweep(cfg)?,
        Scenario::Transient => transient(cfg)?,
    };

    let csv_path = PathBuf::from(&cfg.output_path);
    write_file(&csv_path, &out.table.to_csv())?;

    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        preset,
        seed: cfg.twa.as_ref().filter(|_| out.monte_carlo).map(|t| t.seed),
        seed_policy: (out.monte_carlo && cfg.scenario == Scenario::TwaSweep)
            .then(|| format!("grid point k uses seed + k * {SEED_STRIDE:#x}")),
        config: cfg,
        defaulted,
        outputs: vec![OutputDesc {
            path: csv_path.display().to_string(),
            rows: out.rows,
            columns: out.columns,
        }],
        results: out.results,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let manifest_path = manifest_path(&csv_path);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write_file(&manifest_path, &text)?;
    Ok(vec![csv_path, manifest_path])
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn write_file(path: &Path, content: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|source| RunError::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, content).map_err(|source| RunError::Io { path: path.display().to_string(), source })
}

fn require<'a, T>(field: &str, value: Option<&'a T>) -> Result<&'a T, RunError> {
    value.ok_or_else(|| RunError::Config {
        field: field.into(),
        message: "required by this scenario".into(),
    })
}

fn bands(cfg: &ScenarioConfig) -> ScenarioOutput {
    let phis = cfg.phi_grid.as_deref().unwrap_or(&[]);
    let kappas = cfg.kappa_grid.as_deref().unwrap_or(&[]);
    let mut table = Table::new(vec!["phi", "kappa", "e_flat", "e_minus", "e_plus"]);
    let mut rows = 0;
    for &phi in phis {
        for &kappa in kappas {
            let (e0, em, ep) = bloch_bands(phi, kappa, cfg.spec.j);
            table.row(&[phi.into(), kappa.into(), e0.into(), em.into(), ep.into()]);
            rows += 1;
        }
    }
    ScenarioOutput {
        table,
        columns: vec![
            col("phi", "radians"),
            col("kappa", "radians"),
            col("e_flat", "energy, units of J"),
            col("e_minus", "energy, units of J"),
            col("e_plus", "energy, units of J"),
        ],
        rows,
        results: None,
        monte_carlo: false,
    }
}

fn steady(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let h = build_hamiltonian(&cfg.spec);
    let rho = steady_state(&h, &cfg.r).map_err(|e| RunError::Solver(e.to_string()))?;
    let l = cfg.spec.sites();
    let mut table = Table::new(vec!["row", "col", "re", "im"]);
    for i in 0..l {
        for k in 0..l {
            table.row(&[(i + 1).into(), (k + 1).into(), rho[(i, k)].re.into(), rho[(i, k)].im.into()]);
        }
    }
    let results = if cfg.r.n_l > 0.0 {
        let j = reservoir_current(&rho, &cfg.r).map_err(|e| RunError::Solver(e.to_string()))?;
        Some(serde_json::json!({
            "current": j.value,
            "normalized_current": j.normalized,
        }))
    } else {
        None
    };
    Ok(ScenarioOutput {
        table,
        columns: vec![
            col("row", "flat site index, 1-based"),
            col("col", "flat site index, 1-based"),
            col("re", "occupation (diagonal) / coherence (off-diagonal)"),
            col("im", "coherence, imaginary part"),
        ],
        rows: l * l,
        results,
        monte_carlo: false,
    })
}

fn exact_sweep(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let grid = require("phi_grid", cfg.phi_grid.as_ref())?;
    let ms = require("m_values", cfg.m_values.as_ref())?;
    let mut table = Table::new(vec!["m", "phi", "current", "normalized_current"]);
    let mut rows = 0;
    for &m in ms {
        let records = phi_sweep(m, cfg.spec.j, &cfg.r, grid).map_err(|e| RunError::Solver(e.to_string()))?;
        for (rec, &phi) in records.iter().zip(grid.iter()) {
            table.row(&[m.into(), phi.into(), rec.value.into(), rec.normalized.into()]);
            rows += 1;
        }
    }
    Ok(ScenarioOutput {
        table,
        columns: vec![
            col("m", "rhomb count"),
            col("phi", "radians"),
            col("current", "particles per time, units of J"),
            col("normalized_current", "current / nbar_L"),
        ],
        rows,
        results: None,
        monte_carlo: false,
    })
}

fn twa_sweep(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let settings = require("twa", cfg.twa.as_ref())?;
    let grid = require("phi_grid", cfg.phi_grid.as_ref())?;
    let gs = require("g_values", cfg.g_values.as_ref())?;
    let dts = require("dt_values", cfg.dt_values.as_ref())?;
    let mut table = Table::new(vec![
        "g",
        "phi",
        "current",
        "normalized_current",
        "stderr",
        "snapshot_current",
        "snapshot_stderr",
    ]);
    let mut rows = 0;
    let mut point = 0u64;
    for (&g, &dt) in gs.iter().zip(dts.iter()) {
        for &phi in grid {
            let mut p = settings.params(LatticeSpec { phi, ..cfg.spec }, cfg.r);
            p.g = g;
            p.dt = dt;
            p.seed = settings.seed.wrapping_add(point.wrapping_mul(SEED_STRIDE));
            point += 1;
            let est = estimate_spdm(&p).map_err(|e| RunError::Solver(e.to_string()))?;
            // source-side current from the time-averaged and the
            // final-snapshot population estimators
            let j = cfg.r.gamma_l * (cfg.r.n_l - est.spdm_mean[(0, 0)].re);
            let se = cfg.r.gamma_l * est.spdm_stderr[(0, 0)];
            let j_snap = cfg.r.gamma_l * (cfg.r.n_l - est.snapshot_mean[(0, 0)].re);
            let se_snap = cfg.r.gamma_l * est.snapshot_stderr[(0, 0)];
            table.row(&[
                g.into(),
                phi.into(),
                j.into(),
                (j / cfg.r.n_l).into(),
                se.into(),
                j_snap.into(),
                se_snap.into(),
            ]);
            rows += 1;
        }
    }
    Ok(ScenarioOutput {
        table,
        columns: vec![
            col("g", "effective interaction u * nbar_L, units of J"),
            col("phi", "radians"),
            col("current", "particles per time, units of J; window-averaged estimator"),
            col("normalized_current", "current / nbar_L"),
            col("stderr", "standard error of current"),
            col("snapshot_current", "particles per time; end-of-run estimator"),
            col("snapshot_stderr", "standard error of snapshot_current"),
        ],
        rows,
        results: None,
        monte_carlo: true,
    })
}

fn transient(cfg: &ScenarioConfig) -> Result<ScenarioOutput, RunError> {
    let settings = require("twa", cfg.twa.as_ref())?;
    let t = require("transient", cfg.transient.as_ref())?;
    let p = settings.params(cfg.spec, cfg.r);
    let series =
        transient_populations(&p, t.t_final, t.stride).map_err(|e| RunError::Solver(e.to_string()))?;

    let labels = site_labels(cfg.spec.m);
    let mut header = vec!["time".to_string()];
    let mut columns = vec![col("time", "units of 1/J")];
    for label in &labels {
        header.push(format!("n_{label}"));
        header.push(format!("se_{label}"));
        columns.push(col(format!("n_{label}"), "mean site occupation"));
        columns.push(col(format!("se_{label}"), "standard error"));
    }
    let mut table = Table::new(header);
    for (ti, &time) in series.times.iter().enumerate() {
        let mut cells: Vec<Cell> = vec![time.into()];
        for site in 0..labels.len() {
            cells.push(series.mean[(ti, site)].into());
            cells.push(series.stderr[(ti, site)].into());
        }
        table.row(&cells);
    }
    Ok(ScenarioOutput {
        table,
        columns,
        rows: series.times.len(),
        results: None,
        monte_carlo: true,
    })
}

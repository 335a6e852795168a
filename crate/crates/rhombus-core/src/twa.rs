//! Pseudo-classical Langevin engine for the interacting lattice.
//!
//! Each trajectory evolves a complex amplitude per site under the classical
//! Hamiltonian flow plus boundary friction, kicked by complex Wiener noise
//! on the reservoir sites only. Ensemble averages of a*_l a_m estimate the
//! SPDM; for u = 0 the method is exact in distribution, for u > 0 it is the
//! leading pseudo-classical approximation in the limit u -> 0,
//! nbar_L -> infinity at fixed g = u nbar_L.
//!
//! Wiener convention: dW_l = sigma_l sqrt(dt/2) (xi_1 + i xi_2) with
//! xi_k ~ N(0,1), so <dW dW*> = sigma_l^2 dt. Under the default
//! normal-ordered reading sigma_l^2 = gamma_l nbar_l, which makes the
//! decoupled boundary site relax to <|a|^2> = nbar; that calibration is a
//! tested invariant, not an assumption. The symmetric-ordering variant uses
//! sigma_l^2 = gamma_l (nbar_l + 1/2) and subtracts the half quantum from
//! estimated populations.
//!
//! Integration is stochastic Heun: an Euler predictor followed by a
//! trapezoidal corrector, the same Wiener increment in both stages. The
//! noise is additive, so Ito and Stratonovich readings coincide.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{build_hamiltonian, LatticeSpec};
use crate::lindblad::{CurrentRecord, Method, ReservoirParams};

/// Complex field amplitudes, one per site; |a_l|^2 estimates the occupation.
pub type ClassicalField = Vec<Complex64>;

/// Which operator ordering the reservoir noise represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseOrdering {
    /// Diffusion proportional to nbar alone; no vacuum contribution. With
    /// this choice an empty reservoir injects no noise and a = 0 is an exact
    /// fixed point of the empty lattice.
    #[default]
    Normal,
    /// Diffusion proportional to nbar + 1/2; the extra half quantum is
    /// subtracted from population estimates.
    Symmetric,
}

/// Parameters of a Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwaParams {
    pub spec: LatticeSpec,
    pub r: ReservoirParams,
    /// Effective interaction g = u nbar_L; the microscopic u is derived as
    /// g / nbar_L, which is the invariant combination of the classical limit.
    pub g: f64,
    pub dt: f64,
    pub n_traj: usize,
    /// Time discarded before averaging begins.
    pub burn_in: f64,
    /// Averaging window length.
    pub avg_window: f64,
    pub seed: u64,
    #[serde(default)]
    pub ordering: NoiseOrdering,
}

impl TwaParams {
    /// Microscopic interaction strength u = g / nbar_L.
    pub fn interaction_u(&self) -> Result<f64, TwaError> {
        if self.g == 0.0 {
            Ok(0.0)
        } else if self.r.n_l > 0.0 {
            Ok(self.g / self.r.n_l)
        } else {
            Err(TwaError::InvalidParams("g > 0 requires nbar_L > 0 to define u = g / nbar_L".into()))
        }
    }

    /// Boundary diffusion constants (D_L, D_R) under the chosen ordering.
    pub fn diffusion(&self) -> (f64, f64) {
        let shift = match self.ordering {
            NoiseOrdering::Normal => 0.0,
            NoiseOrdering::Symmetric => 0.5,
        };
        (self.r.gamma_l * (self.r.n_l + shift), self.r.gamma_r * (self.r.n_r + shift))
    }
}

/// SPDM estimated from a trajectory ensemble. `spdm_mean` averages each
/// trajectory over the time window first and then over trajectories;
/// `snapshot_mean` uses only the final time of each trajectory. Standard
/// errors come from the across-trajectory scatter of those per-trajectory
/// values, which are independent samples by construction.
#[derive(Debug, Clone)]
pub struct EnsembleEstimate {
    pub spdm_mean: Array2<Complex64>,
    pub spdm_stderr: Array2<f64>,
    pub snapshot_mean: Array2<Complex64>,
    pub snapshot_stderr: Array2<f64>,
    pub n_traj_used: usize,
}

/// Ensemble-averaged site populations on a time grid.
#[derive(Debug, Clone)]
pub struct PopulationSeries {
    pub times: Vec<f64>,
    /// (time, site) ensemble means of |a_l|^2.
    pub mean: Array2<f64>,
    pub stderr: Array2<f64>,
}

#[derive(Debug, Error)]
pub enum TwaError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(
        "trajectory {trajectory} diverged at t = {t:.3} (master seed {seed}, stream = trajectory \
         index); reduce dt"
    )]
    Diverged { trajectory: usize, seed: u64, t: f64 },
}

/// Classical Hamiltonian: quadratic hopping form plus (u/2) sum |a_l|^4.
pub fn classical_hamiltonian(a: &[Complex64], spec: &LatticeSpec) -> f64 {
    let h = build_hamiltonian(spec);
    let l = a.len();
    let mut quad = 0.0;
    for i in 0..l {
        for j in 0..l {
            quad += (a[i].conj() * h[(i, j)] * a[j]).re;
        }
    }
    let quart: f64 = a.iter().map(|z| z.norm_sqr().powi(2)).sum();
    quad + 0.5 * spec.u * quart
}

/// Deterministic part of the equation of motion:
/// da_l/dt = -i (sum_m H_{l,m} a_m + u |a_l|^2 a_l) - (gamma_l / 2) a_l on
/// the boundary sites.
pub fn drift(a: &[Complex64], p: &TwaParams) -> Result<ClassicalField, TwaError> {
    let engine = Engine::new(p)?;
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    engine.drift_into(a, &mut out);
    Ok(out)
}

/// Advance one stochastic Heun step in place.
pub fn langevin_step(a: &mut ClassicalField, p: &TwaParams, rng: &mut impl Rng) -> Result<(), TwaError> {
    let engine = Engine::new(p)?;
    let mut scratch = Scratch::new(a.len());
    engine
        .step(a, &mut scratch, rng)
        .map_err(|t| TwaError::Diverged { trajectory: 0, seed: p.seed, t })
}

/// Precomputed tables for the hot loop. Everything here is immutable during
/// integration, so trajectories share one Engine across threads.
struct Engine {
    neighbors: Vec<Vec<(usize, Complex64)>>,
    u: f64,
    /// gamma_l / 2 per site; nonzero only at the boundaries.
    friction: Vec<f64>,
    /// (site, sigma sqrt(dt/2)) for sites with nonzero diffusion.
    noise: Vec<(usize, f64)>,
    dt: f64,
}

struct Scratch {
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    pred: Vec<Complex64>,
    dw: Vec<Complex64>,
}

impl Scratch {
    fn new(l: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); l];
        Scratch { f1: z.clone(), f2: z.clone(), pred: z.clone(), dw: z }
    }
}

impl Engine {
    fn new(p: &TwaParams) -> Result<Self, TwaError> {
        if p.dt <= 0.0 {
            return Err(TwaError::InvalidParams("dt must be positive".into()));
        }
        let u = p.interaction_u()?;
        let h = build_hamiltonian(&p.spec);
        let l = p.spec.sites();
        let neighbors = (0..l)
            .map(|i| {
                (0..l)
                    .filter(|&j| h[(i, j)] != Complex64::new(0.0, 0.0))
                    .map(|j| (j, h[(i, j)]))
                    .collect()
            })
            .collect();
        let mut friction = vec![0.0; l];
        friction[0] = 0.5 * p.r.gamma_l;
        friction[l - 1] += 0.5 * p.r.gamma_r;
        let (d_l, d_r) = p.diffusion();
        let amp = |d: f64| (d * 0.5 * p.dt).sqrt();
        let mut noise = Vec::new();
        if d_l > 0.0 {
            noise.push((0, amp(d_l)));
        }
        if d_r > 0.0 {
            noise.push((l - 1, amp(d_r)));
        }
        Ok(Engine { neighbors, u, friction, noise, dt: p.dt })
    }

    fn drift_into(&self, a: &[Complex64], out: &mut [Complex64]) {
        for (l, row) in self.neighbors.iter().enumerate() {
            let mut hop = Complex64::new(0.0, 0.0);
            for &(m, h_lm) in row {
                hop += h_lm * a[m];
            }
            if self.u != 0.0 {
                hop += self.u * a[l].norm_sqr() * a[l];
            }
            // -i * hop - friction * a
            out[l] = Complex64::new(hop.im, -hop.re) - self.friction[l] * a[l];
        }
    }

    /// One Heun step. On divergence returns Err(t_reached).
    fn step(&self, a: &mut [Complex64], s: &mut Scratch, rng: &mut impl Rng) -> Result<(), f64> {
        for z in s.dw.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for &(site, amp) in &self.noise {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s.dw[site] = Complex64::new(amp * re, amp * im);
        }
        self.drift_into(a, &mut s.f1);
        for l in 0..a.len() {
            s.pred[l] = a[l] + s.f1[l] * self.dt + s.dw[l];
        }
        self.drift_into(&s.pred, &mut s.f2);
        let half_dt = 0.5 * self.dt;
        let mut finite = true;
        for l in 0..a.len() {
            a[l] += (s.f1[l] + s.f2[l]) * half_dt + s.dw[l];
            finite &= a[l].re.is_finite() && a[l].im.is_finite();
        }
        if finite {
            Ok(())
        } else {
            Err(f64::NAN)
        }
    }
}

/// Interval between accumulated samples inside the averaging window, in
/// units of time. Samples closer than the shortest dynamical period add
/// little information; 0.1/J keeps the accumulation cost negligible.
const SAMPLE_INTERVAL: f64 = 0.1;

struct TrajectoryStats {
    time_avg: Array2<Complex64>,
    snapshot: Array2<Complex64>,
}

fn run_trajectory(p: &TwaParams, engine: &Engine, index: usize) -> Result<TrajectoryStats, TwaError> {
    let l = p.spec.sites();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(index as u64);
    let mut a = vec![Complex64::new(0.0, 0.0); l];
    let mut scratch = Scratch::new(l);
    let diverged = |t: f64| TwaError::Diverged { trajectory: index, seed: p.seed, t };

    let n_burn = (p.burn_in / p.dt).round() as usize;
    for step in 0..n_burn {
        engine
            .step(&mut a, &mut scratch, &mut rng)
            .map_err(|_| diverged(step as f64 * p.dt))?;
    }
    let n_win = ((p.avg_window / p.dt).round() as usize).max(1);
    let stride = ((SAMPLE_INTERVAL / p.dt).round() as usize).max(1);
    let mut acc = Array2::<Complex64>::zeros((l, l));
    let mut count = 0u64;
    for step in 0..n_win {
        engine
            .step(&mut a, &mut scratch, &mut rng)
            .map_err(|_| diverged(p.burn_in + step as f64 * p.dt))?;
        if step % stride == 0 {
            accumulate_outer(&mut acc, &a);
            count += 1;
        }
    }
    acc.mapv_inplace(|z| z / count as f64);
    let mut snapshot = Array2::<Complex64>::zeros((l, l));
    accumulate_outer(&mut snapshot, &a);
    if p.ordering == NoiseOrdering::Symmetric {
        for i in 0..l {
            acc[(i, i)] -= 0.5;
            snapshot[(i, i)] -= 0.5;
        }
    }
    Ok(TrajectoryStats { time_avg: acc, snapshot })
}

// Index convention matches the exact solver: the moment matrix
// n_{lm} = <a_l conj(a_m)> obeys dn/dt = -i[H, n] + boundary terms, the
// same commutator ordering the SPDM equation uses. The conjugate-transpose
// convention would satisfy -i[conj(H), n] instead and mirror every
// off-diagonal phase.
fn accumulate_outer(acc: &mut Array2<Complex64>, a: &[Complex64]) {
    let l = a.len();
    for i in 0..l {
        let ai = a[i];
        for j in 0..l {
            acc[(i, j)] += ai * a[j].conj();
        }
    }
}

/// Mean and standard error over a set of matrices, reduced in index order
/// so the result does not depend on how trajectories were scheduled.
fn mean_stderr(samples: &[&Array2<Complex64>]) -> (Array2<Complex64>, Array2<f64>) {
    let n = samples.len();
    let shape = samples[0].raw_dim();
    let mut mean = Array2::<Complex64>::zeros(shape);
    for s in samples {
        mean += *s;
    }
    mean.mapv_inplace(|z| z / n as f64);
    let mut var = Array2::<f64>::zeros(shape);
    for s in samples {
        for (v, (m, x)) in var.iter_mut().zip(mean.iter().zip(s.iter())) {
            *v += (x - m).norm_sqr();
        }
    }
    let stderr = var.mapv(|v| (v / (n as f64 * (n - 1) as f64)).sqrt());
    (mean, stderr)
}

/// Run the full ensemble and estimate the SPDM.
///
/// Trajectory i draws its noise from stream i of a counter-based generator
/// keyed by the master seed, so the estimate is bitwise reproducible for a
/// fixed seed no matter how the trajectories are scheduled across threads.
/// Any divergent trajectory fails the whole run with its index and seed.
pub fn estimate_spdm(p: &TwaParams) -> Result<EnsembleEstimate, TwaError> {
    if p.n_traj < 2 {
        return Err(TwaError::InvalidParams("need at least 2 trajectories".into()));
    }
    if p.avg_window <= 0.0 {
        return Err(TwaError::InvalidParams("avg_window must be positive".into()));
    }
    let engine = Engine::new(p)?;
    let results: Vec<Result<TrajectoryStats, TwaError>> = (0..p.n_traj)
        .into_par_iter()
        .map(|i| run_trajectory(p, &engine, i))
        .collect();
    let mut stats = Vec::with_capacity(p.n_traj);
    for r in results {
        stats.push(r?);
    }
    let (spdm_mean, spdm_stderr) = mean_stderr(&stats.iter().map(|s| &s.time_avg).collect::<Vec<_>>());
    let (snapshot_mean, snapshot_stderr) =
        mean_stderr(&stats.iter().map(|s| &s.snapshot).collect::<Vec<_>>());
    Ok(EnsembleEstimate { spdm_mean, spdm_stderr, snapshot_mean, snapshot_stderr, n_traj_used: p.n_traj })
}

/// Stationary current from the source-side estimator
/// gamma_L (nbar_L - <|a_1|^2>), with the statistical error propagated from
/// the ensemble. The caller is responsible for a burn_in long enough that
/// the slowest transient has passed; near the caging flux with interactions
/// that transient is the slow un-caging cascade, not the bare damping time.
pub fn stationary_current_twa(p: &TwaParams) -> Result<CurrentRecord, TwaError> {
    if p.r.n_l == 0.0 {
        return Err(TwaError::InvalidParams("current normalization undefined: nbar_L = 0".into()));
    }
    let est = estimate_spdm(p)?;
    let value = p.r.gamma_l * (p.r.n_l - est.spdm_mean[(0, 0)].re);
    Ok(CurrentRecord {
        value,
        normalized: value / p.r.n_l,
        stderr: p.r.gamma_l * est.spdm_stderr[(0, 0)],
        method: Method::Twa,
    })
}

/// Ensemble-averaged site populations from the empty lattice, sampled every
/// `stride` time units up to `t_final`. burn_in and avg_window are ignored;
/// this is the transient observable.
pub fn transient_populations(p: &TwaParams, t_final: f64, stride: f64) -> Result<PopulationSeries, TwaError> {
    if p.n_traj < 2 {
        return Err(TwaError::InvalidParams("need at least 2 trajectories".into()));
    }
    if stride <= 0.0 || t_final < stride {
        return Err(TwaError::InvalidParams("need 0 < stride <= t_final".into()));
    }
    let engine = Engine::new(p)?;
    let l = p.spec.sites();
    let rec = ((stride / p.dt).round() as usize).max(1);
    let n_steps = (t_final / p.dt).round() as usize;
    let times: Vec<f64> = (0..=n_steps / rec).map(|k| (k * rec) as f64 * p.dt).collect();
    let n_times = times.len();

    let per_traj: Vec<Result<Array2<f64>, TwaError>> = (0..p.n_traj)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream(index as u64);
            let mut a = vec![Complex64::new(0.0, 0.0); l];
            let mut scratch = Scratch::new(l);
            let mut series = Array2::<f64>::zeros((n_times, l));
            // t = 0 row stays zero: empty initial condition.
            let mut row = 1;
            for step in 1..=n_steps {
                engine.step(&mut a, &mut scratch, &mut rng).map_err(|_| TwaError::Diverged {
                    trajectory: index,
                    seed: p.seed,
                    t: step as f64 * p.dt,
                })?;
                if step % rec == 0 {
                    for site in 0..l {
                        series[(row, site)] = a[site].norm_sqr();
                    }
                    row += 1;
                }
            }
            if p.ordering == NoiseOrdering::Symmetric {
                series.mapv_inplace(|v| v - 0.5);
            }
            Ok(series)
        })
        .collect();
    let mut all = Vec::with_capacity(p.n_traj);
    for r in per_traj {
        all.push(r?);
    }
    let n = all.len() as f64;
    let mut mean = Array2::<f64>::zeros((n_times, l));
    for s in &all {
        mean += s;
    }
    mean.mapv_inplace(|v| v / n);
    let mut var = Array2::<f64>::zeros((n_times, l));
    for s in &all {
        for (v, (m, x)) in var.iter_mut().zip(mean.iter().zip(s.iter())) {
            *v += (x - m) * (x - m);
        }
    }
    let stderr = var.mapv(|v| (v / (n * (n - 1.0))).sqrt());
    Ok(PopulationSeries { times, mean, stderr })
}

/// First time a series reaches half of its final value, where "final" is
/// the mean over the last tenth of the samples. None if the series never
/// gets there or the final value is not positive.
pub fn half_rise_time(times: &[f64], values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 || times.len() != n {
        return None;
    }
    let tail = (n / 10).max(1);
    let fin: f64 = values[n - tail..].iter().sum::<f64>() / tail as f64;
    if fin <= 0.0 {
        return None;
    }
    let half = 0.5 * fin;
    values.iter().position(|&v| v >= half).map(|i| times[i])
}

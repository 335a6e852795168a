//! Statistical contracts of the Langevin engine: calibration against known
//! stationary moments, agreement with the exact solver at u = 0, error-bar
//! scaling, step-size consistency, and loud failure on divergence.

use rhombus_core::lindblad::{reservoir_current, steady_state};
use rhombus_core::twa::{estimate_spdm, stationary_current_twa, TwaError};
use rhombus_core::{build_hamiltonian, LatticeSpec, NoiseOrdering, ReservoirParams, TwaParams};

fn base(m: usize, phi: f64, g: f64, seed: u64) -> TwaParams {
    TwaParams {
        spec: LatticeSpec { m, j: 1.0, phi, u: 0.0 },
        r: ReservoirParams { gamma_l: 0.4, gamma_r: 0.4, n_l: 1.0, n_r: 0.5 },
        g,
        dt: 0.01,
        n_traj: 400,
        burn_in: 150.0,
        avg_window: 200.0,
        seed,
        ordering: NoiseOrdering::Normal,
    }
}

#[test]
fn decoupled_site_calibrates_to_reservoir_density() {
    for (k, nbar) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let mut p = base(1, 0.0, 0.0, 21 + k as u64);
        p.spec.j = 0.0;
        p.r = ReservoirParams { gamma_l: 0.4, gamma_r: 0.4, n_l: nbar, n_r: 0.0 };
        p.burn_in = 60.0;
        p.avg_window = 150.0;
        let est = estimate_spdm(&p).unwrap();
        let n1 = est.spdm_mean[(0, 0)].re;
        let se = est.spdm_stderr[(0, 0)];
        assert!(
            (n1 - nbar).abs() < 3.0 * se,
            "nbar={nbar}: got {n1} +- {se}"
        );
    }
}

#[test]
fn matches_exact_solver_without_interaction() {
    let p = base(2, 1.3, 0.0, 4242);
    let est = estimate_spdm(&p).unwrap();
    let exact = steady_state(&build_hamiltonian(&p.spec), &p.r).unwrap();
    let l = p.spec.sites();

    let mut within = 0;
    for i in 0..l {
        for k in 0..l {
            let dev = (est.spdm_mean[(i, k)] - exact[(i, k)]).norm();
            if dev <= 3.0 * est.spdm_stderr[(i, k)] + 1e-12 {
                within += 1;
            }
        }
    }
    // 3 sigma two-sided covers ~99.7%; ask for 95% of the 49 entries
    assert!(within * 100 >= l * l * 95, "only {within}/{} entries within 3 sigma", l * l);

    let j_twa = stationary_current_twa(&p).unwrap();
    let j_exact = reservoir_current(&exact, &p.r).unwrap();
    assert!(
        (j_twa.value - j_exact.value).abs() < 3.0 * j_twa.stderr,
        "current {} +- {} vs exact {}",
        j_twa.value,
        j_twa.stderr,
        j_exact.value
    );
}

#[test]
fn error_bars_shrink_with_the_square_root_of_the_ensemble() {
    let mut small = base(2, 0.6, 0.0, 77);
    small.n_traj = 300;
    small.burn_in = 40.0;
    small.avg_window = 60.0;
    let mut big = small;
    big.n_traj = 1200;
    let e_small = estimate_spdm(&small).unwrap();
    let e_big = estimate_spdm(&big).unwrap();
    let mut ratios: Vec<f64> = e_big
        .spdm_stderr
        .iter()
        .zip(e_small.spdm_stderr.iter())
        .filter(|&(_, &s)| s > 0.0)
        .map(|(b, s)| b / s)
        .collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = ratios[ratios.len() / 2];
    // 4x the trajectories -> half the error, within 20%
    assert!((0.4..=0.6).contains(&median), "median stderr ratio {median}");
}

#[test]
fn halving_the_step_leaves_the_current_within_errors() {
    let coarse = base(2, 0.8, 0.7, 91);
    let mut fine = base(2, 0.8, 0.7, 92);
    fine.dt = 0.005;
    let j_c = stationary_current_twa(&coarse).unwrap();
    let j_f = stationary_current_twa(&fine).unwrap();
    let sigma = (j_c.stderr.powi(2) + j_f.stderr.powi(2)).sqrt();
    assert!(
        (j_c.value - j_f.value).abs() < 3.0 * sigma,
        "dt=0.01 gives {} +- {}, dt=0.005 gives {} +- {}",
        j_c.value,
        j_c.stderr,
        j_f.value,
        j_f.stderr
    );
}

#[test]
fn current_is_statistically_mirror_symmetric_in_flux() {
    let plus = base(2, 1.1, 1.0, 301);
    let minus = base(2, -1.1, 1.0, 302);
    let j_p = stationary_current_twa(&plus).unwrap();
    let j_m = stationary_current_twa(&minus).unwrap();
    let sigma = (j_p.stderr.powi(2) + j_m.stderr.powi(2)).sqrt();
    assert!(
        (j_p.value - j_m.value).abs() < 4.0 * sigma,
        "j(+phi) = {} +- {}, j(-phi) = {} +- {}",
        j_p.value,
        j_p.stderr,
        j_m.value,
        j_m.stderr
    );
}

#[test]
fn runaway_step_size_fails_with_trajectory_and_seed() {
    let mut p = base(2, 0.4, 30.0, 12345);
    p.dt = 0.05;
    p.r.n_l = 2.0;
    p.burn_in = 50.0;
    match estimate_spdm(&p) {
        Err(TwaError::Diverged { trajectory, seed, .. }) => {
            assert_eq!(seed, 12345);
            let msg = format!("{}", TwaError::Diverged { trajectory, seed, t: 1.0 });
            assert!(msg.contains("diverged") && msg.contains("seed"), "message: {msg}");
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

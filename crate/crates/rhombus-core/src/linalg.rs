//! Dense complex linear algebra used by the solvers, bridged to faer.
//!
//! Only two primitives are needed: Hermitian eigenvalues (diagnostics and
//! spectral tests) and a minimum-norm least-squares solve. The stationary
//! problem is solved in SVD form rather than by LU because the vectorized
//! evolution operator is rank-deficient whenever the open chain hosts dark
//! modes (eigenstates with no weight on either boundary site). Those null
//! directions carry no physical content for evolution that starts from the
//! vacuum, and the minimum-norm solution is exactly the infinite-time limit
//! of that evolution, so the pseudo-inverse is the correct stationary state,
//! not a numerical compromise.

use faer::{c64, Mat};
use ndarray::Array2;
use num_complex::Complex64;

fn to_faer(a: &Array2<Complex64>) -> Mat<c64> {
    // c64 is a re-export of Complex64, so this is a plain copy.
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Eigenvalues of a Hermitian matrix, ascending. Panics on a non-square
/// input; Hermiticity is the caller's contract (only the lower triangle is
/// read).
pub fn hermitian_eigenvalues(h: &Array2<Complex64>) -> Vec<f64> {
    let m = to_faer(h);
    let eig = m
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("hermitian eigendecomposition failed to converge");
    let mut vals: Vec<f64> = eig.S().column_vector().iter().map(|z| z.re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

pub(crate) struct MinNormSolution {
    pub x: Vec<Complex64>,
    /// Largest singular value of the operator.
    pub sigma_max: f64,
    /// Smallest singular value kept by the rank cutoff; equal to sigma_max
    /// when the operator has rank <= 1.
    pub sigma_min_kept: f64,
}

impl MinNormSolution {
    /// Condition estimate of the solved (range-restricted) system.
    pub fn condition(&self) -> f64 {
        if self.sigma_min_kept > 0.0 {
            self.sigma_max / self.sigma_min_kept
        } else {
            f64::INFINITY
        }
    }
}

/// Minimum-norm least-squares solution of a x = b via SVD.
///
/// Singular values below `rel_cutoff * sigma_max` are treated as exact zeros.
/// The cutoff separates true null directions (sigma ~ machine epsilon) from
/// physically small but meaningful ones; callers pick it per problem.
pub(crate) fn solve_min_norm(a: &Array2<Complex64>, b: &[Complex64], rel_cutoff: f64) -> MinNormSolution {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "square systems only");
    assert_eq!(b.len(), n);
    let svd = to_faer(a).svd().expect("svd failed to converge");
    let u = svd.U();
    let v = svd.V();
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let sigma_max = s.iter().copied().fold(0.0f64, f64::max);
    let cutoff = rel_cutoff * sigma_max;

    // y_k = (u_k^H b) / s_k over kept directions, then x = V y.
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut sigma_min_kept = sigma_max;
    for k in 0..n {
        if s[k] <= cutoff || s[k] == 0.0 {
            continue;
        }
        sigma_min_kept = sigma_min_kept.min(s[k]);
        let mut proj = Complex64::new(0.0, 0.0);
        for i in 0..n {
            proj += u[(i, k)].conj() * b[i];
        }
        let y = proj / s[k];
        for j in 0..n {
            x[j] += v[(j, k)] * y;
        }
    }
    MinNormSolution { x, sigma_max, sigma_min_kept }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn eigenvalues_of_pauli_like_matrix() {
        let h = array![
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)]
        ];
        let ev = hermitian_eigenvalues(&h);
        assert!((ev[0] + 1.0).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_norm_on_full_rank_system() {
        let a = array![
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)],
            [Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)]
        ];
        let b = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)];
        let sol = solve_min_norm(&a, &b, 1e-12);
        assert!(sol.condition().is_finite());
        // residual a x - b
        for i in 0..2 {
            let r: Complex64 = (0..2).map(|j| a[(i, j)] * sol.x[j]).sum::<Complex64>() - b[i];
            assert!(r.norm() < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn min_norm_picks_smallest_solution_of_singular_system() {
        // Rank-1 system: x + y = 2 has many solutions; minimum norm is (1, 1).
        let a = array![
            [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)]
        ];
        let b = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        let sol = solve_min_norm(&a, &b, 1e-12);
        // only one direction kept: condition is sigma_max / sigma_max
        assert_eq!(sol.condition(), 1.0);
        assert!((sol.x[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((sol.x[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

//! Lattice geometry, site indexing, and the single-particle Hamiltonian.
//!
//! Sites are ordered C_1, A_1, B_1, C_2, A_2, B_2, ..., C_{M+1}: cell m owns
//! the hub C_m and the arm pair (A_m, B_m) of the rhomb between C_m and
//! C_{m+1}, so M rhombs give L = 3M + 1 sites. The gauge puts the flux on
//! the left half of each rhomb: hopping C_m -> A_m carries e^{+i phi/2},
//! C_m -> B_m carries e^{-i phi/2}, and the right-half bonds are real. All
//! stored matrix elements include the -1/2 prefactor of the hopping sum, so
//! H is used directly in commutators downstream.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Full single-particle Hamiltonian of the open chain, L x L Hermitian.
pub type HoppingMatrix = Array2<Complex64>;

/// Geometry and couplings of the rhombic lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    /// Number of rhombs.
    pub m: usize,
    /// Hopping magnitude; sets the energy scale (figures use j = 1).
    pub j: f64,
    /// Peierls phase in radians. Kept unreduced: 2 pi periodicity of
    /// observables is a tested property, not an assumption baked in here.
    pub phi: f64,
    /// On-site interaction. Only the pseudo-classical engine uses it; the
    /// exact solver is valid for u = 0 alone.
    #[serde(default)]
    pub u: f64,
}

impl LatticeSpec {
    /// Total site count L = 3M + 1.
    pub fn sites(&self) -> usize {
        3 * self.m + 1
    }

    /// Resolve (cell, sublattice) to a flat site index.
    pub fn site_index(&self, cell: usize, sublattice: Sublattice) -> Result<SiteIndex, LatticeError> {
        if cell < 1 || cell > self.m + 1 {
            return Err(LatticeError::CellOutOfRange { cell, max: self.m + 1 });
        }
        if cell == self.m + 1 && sublattice != Sublattice::C {
            // The chain terminates on a hub; the last rhomb's arms belong to cell M.
            return Err(LatticeError::ArmInLastCell { cell });
        }
        let offset = match sublattice {
            Sublattice::C => 0,
            Sublattice::A => 1,
            Sublattice::B => 2,
        };
        Ok(SiteIndex {
            cell,
            sublattice,
            flat: 3 * (cell - 1) + offset + 1,
        })
    }
}

/// The three sublattices of a rhombic cell: hub C and arms A, B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    C,
    A,
    B,
}

impl std::fmt::Display for Sublattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sublattice::C => write!(f, "c"),
            Sublattice::A => write!(f, "a"),
            Sublattice::B => write!(f, "b"),
        }
    }
}

/// A lattice site, both in (cell, sublattice) coordinates and as a flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteIndex {
    pub cell: usize,
    pub sublattice: Sublattice,
    /// 1-based position in the C_1, A_1, B_1, C_2, ... ordering.
    pub flat: usize,
}

impl SiteIndex {
    /// 0-based index for matrix addressing.
    pub fn idx(&self) -> usize {
        self.flat - 1
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("cell {cell} out of range 1..={max}")]
    CellOutOfRange { cell: usize, max: usize },
    #[error("cell {cell} is the terminal hub; it has no A/B sites")]
    ArmInLastCell { cell: usize },
}

/// Human-readable site labels in flat order: c1, a1, b1, c2, ...
pub fn site_labels(m: usize) -> Vec<String> {
    let mut labels = Vec::with_capacity(3 * m + 1);
    for cell in 1..=m {
        labels.push(format!("c{cell}"));
        labels.push(format!("a{cell}"));
        labels.push(format!("b{cell}"));
    }
    labels.push(format!("c{}", m + 1));
    labels
}

/// Build the open-chain Hamiltonian in the rhomb gauge.
///
/// Nonzero entries: H[C_m, A_m] = -(j/2) e^{+i phi/2},
/// H[C_m, B_m] = -(j/2) e^{-i phi/2}, H[A_m, C_{m+1}] = H[B_m, C_{m+1}] = -j/2,
/// plus Hermitian conjugates. Diagonal is zero.
pub fn build_hamiltonian(spec: &LatticeSpec) -> HoppingMatrix {
    let l = spec.sites();
    let mut h = Array2::<Complex64>::zeros((l, l));
    let t = -0.5 * spec.j;
    let left_a = Complex64::from_polar(1.0, 0.5 * spec.phi) * t;
    let left_b = Complex64::from_polar(1.0, -0.5 * spec.phi) * t;
    let right = Complex64::new(t, 0.0);
    for m in 0..spec.m {
        let c = 3 * m;
        let (a, b, c_next) = (c + 1, c + 2, c + 3);
        h[(c, a)] = left_a;
        h[(a, c)] = left_a.conj();
        h[(c, b)] = left_b;
        h[(b, c)] = left_b.conj();
        h[(a, c_next)] = right;
        h[(c_next, a)] = right;
        h[(b, c_next)] = right;
        h[(c_next, b)] = right;
    }
    h
}

/// Bloch bands (e_0, e_minus, e_plus) at quasimomentum kappa.
///
/// e_0 = 0 is the flat band present at every flux; the dispersive pair is
/// +-j sqrt(1 + cos(phi/2) cos(kappa - phi/2)). At phi = pi all three are
/// flat: (0, -j, +j).
pub fn bloch_bands(phi: f64, kappa: f64, j: f64) -> (f64, f64, f64) {
    // The radicand is >= 0 analytically; clamp the last-ulp rounding dip.
    let radicand = (1.0 + (0.5 * phi).cos() * (kappa - 0.5 * phi).cos()).max(0.0);
    let e = j * radicand.sqrt();
    (0.0, -e, e)
}

/// Momentum-space Hamiltonian of one unit cell, basis (C, A, B).
///
/// Its spectrum over a full kappa scan reproduces the [`bloch_bands`] set;
/// individual kappa points are shifted by the gauge choice, so comparisons
/// are made between sorted eigenvalue samples over the Brillouin zone.
pub fn bloch_matrix(phi: f64, kappa: f64, j: f64) -> Array2<Complex64> {
    let t = -0.5 * j;
    let hop_back = Complex64::from_polar(1.0, -kappa);
    let h_a = (Complex64::from_polar(1.0, 0.5 * phi) + hop_back) * t;
    let h_b = (Complex64::from_polar(1.0, -0.5 * phi) + hop_back) * t;
    let mut h = Array2::<Complex64>::zeros((3, 3));
    h[(0, 1)] = h_a;
    h[(1, 0)] = h_a.conj();
    h[(0, 2)] = h_b;
    h[(2, 0)] = h_b.conj();
    h
}

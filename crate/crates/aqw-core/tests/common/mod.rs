//! Test oracles independent of the library's sparse application path: the
//! walk operators built as explicit dense matrices over the full lattice, and
//! a Schmidt-coefficient route to one-vs-rest negativity via SVD.

// shared by several test targets; not every target uses every oracle
#![allow(dead_code)]

use aqw_core::walker::WalkerState;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub struct DenseLattice {
    pub half_width: i32,
}

impl DenseLattice {
    pub fn new(half_width: i32) -> Self {
        Self { half_width }
    }

    pub fn side(&self) -> usize {
        (2 * self.half_width + 1) as usize
    }

    pub fn dim(&self) -> usize {
        self.side() * self.side() * 2
    }

    pub fn index(&self, x: i32, y: i32, c: u8) -> usize {
        let ix = (x + self.half_width) as usize;
        let iy = (y + self.half_width) as usize;
        (ix * self.side() + iy) * 2 + c as usize
    }

    pub fn to_vector(&self, s: &WalkerState) -> DVector<Complex64> {
        assert_eq!(s.half_width(), self.half_width);
        let mut v = DVector::zeros(self.dim());
        for (site, amp) in s.iter() {
            v[self.index(site.x, site.y, site.c)] = amp;
        }
        v
    }

    /// `1_xy ⊗ C(α,β,γ)` with the coin entries written out from the angles.
    pub fn coin_matrix(&self, alpha: f64, beta: f64, gamma: f64) -> DMatrix<Complex64> {
        let c00 = Complex64::new(alpha.cos(), 0.0);
        let c01 = Complex64::from_polar(alpha.sin(), beta);
        let c10 = Complex64::from_polar(alpha.sin(), gamma);
        let c11 = -Complex64::from_polar(alpha.cos(), beta + gamma);
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for x in -self.half_width..=self.half_width {
            for y in -self.half_width..=self.half_width {
                m[(self.index(x, y, 0), self.index(x, y, 0))] = c00;
                m[(self.index(x, y, 0), self.index(x, y, 1))] = c01;
                m[(self.index(x, y, 1), self.index(x, y, 0))] = c10;
                m[(self.index(x, y, 1), self.index(x, y, 1))] = c11;
            }
        }
        m
    }

    /// Conditional x-shift: coin 0 one site toward -x, coin 1 toward +x.
    /// Columns whose image would leave the lattice stay zero, so the matrix
    /// is an isometry only on interior-supported states — exactly the states
    /// the tests feed it.
    pub fn shift_x_matrix(&self) -> DMatrix<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for x in -self.half_width..=self.half_width {
            for y in -self.half_width..=self.half_width {
                if x > -self.half_width {
                    m[(self.index(x - 1, y, 0), self.index(x, y, 0))] = one;
                }
                if x < self.half_width {
                    m[(self.index(x + 1, y, 1), self.index(x, y, 1))] = one;
                }
            }
        }
        m
    }

    pub fn shift_y_matrix(&self) -> DMatrix<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for x in -self.half_width..=self.half_width {
            for y in -self.half_width..=self.half_width {
                if y > -self.half_width {
                    m[(self.index(x, y - 1, 0), self.index(x, y, 0))] = one;
                }
                if y < self.half_width {
                    m[(self.index(x, y + 1, 1), self.index(x, y, 1))] = one;
                }
            }
        }
        m
    }

    /// One full step `S_y · (1 ⊗ C) · S_x · (1 ⊗ C)` as a dense matrix.
    pub fn step_matrix(&self, alpha: f64, beta: f64, gamma: f64) -> DMatrix<Complex64> {
        let coin = self.coin_matrix(alpha, beta, gamma);
        self.shift_y_matrix() * &coin * self.shift_x_matrix() * &coin
    }

    /// Coin-independent translation by `(m, n)`.
    pub fn translation_matrix(&self, m: i32, n: i32) -> DMatrix<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        let mut t = DMatrix::zeros(self.dim(), self.dim());
        for x in -self.half_width..=self.half_width {
            for y in -self.half_width..=self.half_width {
                let (tx, ty) = (x + m, y + n);
                if tx.abs() <= self.half_width && ty.abs() <= self.half_width {
                    for c in 0..2u8 {
                        t[(self.index(tx, ty, c), self.index(x, y, c))] = one;
                    }
                }
            }
        }
        t
    }
}

/// Largest per-amplitude deviation between a sparse state and a dense vector.
pub fn max_amplitude_deviation(
    lattice: &DenseLattice,
    sparse: &WalkerState,
    dense: &DVector<Complex64>,
) -> f64 {
    let v = lattice.to_vector(sparse);
    (v - dense).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One-vs-rest negativity of the x | (y, coin) bipartition from the Schmidt
/// coefficients of the amplitude matrix: `((Σ s_i)² - 1)/2` for pure states.
pub fn schmidt_negativity_x(s: &WalkerState) -> f64 {
    let xs = s.occupied_xs();
    let ys = s.occupied_ys();
    let rows = xs.len();
    let cols = ys.len() * 2;
    let mut a = DMatrix::<Complex64>::zeros(rows, cols);
    for (site, amp) in s.iter() {
        let r = xs.binary_search(&site.x).unwrap();
        let cy = ys.binary_search(&site.y).unwrap();
        a[(r, cy * 2 + site.c as usize)] = amp;
    }
    let singular = a.svd(false, false).singular_values;
    let sum: f64 = singular.iter().sum();
    (sum * sum - 1.0) / 2.0
}

/// Schmidt spectrum (squared coefficients) of the same bipartition; equals
/// the eigenvalue spectrum of either reduced density operator.
pub fn schmidt_spectrum_x(s: &WalkerState) -> Vec<f64> {
    let xs = s.occupied_xs();
    let ys = s.occupied_ys();
    let mut a = DMatrix::<Complex64>::zeros(xs.len(), ys.len() * 2);
    for (site, amp) in s.iter() {
        let r = xs.binary_search(&site.x).unwrap();
        let cy = ys.binary_search(&site.y).unwrap();
        a[(r, cy * 2 + site.c as usize)] = amp;
    }
    let mut spectrum: Vec<f64> = a
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s * s)
        .collect();
    spectrum.sort_by(|p, q| q.partial_cmp(p).unwrap());
    spectrum
}

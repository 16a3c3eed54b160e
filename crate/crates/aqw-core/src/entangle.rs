//! Density matrices, partial traces/transposes, entanglement negativity and
//! the three-way tangle for walker states.
//!
//! Negativity follows the halved convention `(‖ρ^{T_i}‖ - 1)/2`: the value is
//! the absolute sum of negative eigenvalues of the partial transpose. The
//! tangle terms instead square the trace-norm negativity `‖ρ^{T_i}‖ - 1`
//! (twice the halved value); the two conventions coexist in the literature
//! and the reference values this library reproduces mix them exactly this way.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use crate::walker::WalkerState;

#[derive(Debug, Error)]
pub enum EntangleError {
    #[error("state has amplitude at ({x}, {y}) outside the requested support box")]
    SupportTooSmall { x: i32, y: i32 },
    #[error("subsystem selection is empty, duplicated, not present, or not a proper subset")]
    BadSubsystemSet,
    #[error("eigenvalue computation produced an invalid negativity ({value})")]
    NumericalInstability { value: f64 },
    #[error("pure-state vector length {got} does not match subsystem dimensions ({want})")]
    DimensionMismatch { got: usize, want: usize },
}

/// Degree-of-freedom labels for the tripartite factorization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Coin,
}

/// Inclusive rectangular position box used to index a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportBox {
    pub x_min: i32,
    pub x_max: i32,
    pub y_min: i32,
    pub y_max: i32,
}

impl SupportBox {
    /// `[-radius, radius]²`, the light-cone box after `radius` steps from the origin.
    pub fn centered(radius: i32) -> Self {
        Self {
            x_min: -radius,
            x_max: radius,
            y_min: -radius,
            y_max: radius,
        }
    }

    /// Tight bounding rectangle of the occupied sites.
    pub fn of_state(s: &WalkerState) -> Self {
        let xs = s.occupied_xs();
        let ys = s.occupied_ys();
        Self {
            x_min: xs.first().copied().unwrap_or(0),
            x_max: xs.last().copied().unwrap_or(0),
            y_min: ys.first().copied().unwrap_or(0),
            y_max: ys.last().copied().unwrap_or(0),
        }
    }
}

/// Hermitian density operator with an ordered subsystem factorization.
///
/// Row-major index over the axes in order: for dims `(dx, dy, 2)` the flat
/// index of `(ix, iy, ic)` is `(ix*dy + iy)*2 + ic`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    axes: Vec<(Axis, usize)>,
    data: DMatrix<Complex64>,
}

/// Rank-1 projector `|ψ⟩⟨ψ|` of a walker state over an explicit box with the
/// `x ⊗ y ⊗ coin` ordering. Fails if any occupied site falls outside the box.
pub fn to_density(s: &WalkerState, support: &SupportBox) -> Result<DensityMatrix, EntangleError> {
    for (site, _) in s.iter() {
        if site.x < support.x_min
            || site.x > support.x_max
            || site.y < support.y_min
            || site.y > support.y_max
        {
            return Err(EntangleError::SupportTooSmall {
                x: site.x,
                y: site.y,
            });
        }
    }
    let xs: Vec<i32> = (support.x_min..=support.x_max).collect();
    let ys: Vec<i32> = (support.y_min..=support.y_max).collect();
    Ok(DensityMatrix::pure_over_grid(s, &xs, &ys))
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|` over the occupied coordinate grid only. Unoccupied rows of a
    /// rectangular box contribute zero eigenvalues everywhere downstream, so
    /// dropping them changes no trace, spectrum tail, or negativity.
    pub fn compact_from_state(s: &WalkerState) -> Self {
        Self::pure_over_grid(s, &s.occupied_xs(), &s.occupied_ys())
    }

    fn pure_over_grid(s: &WalkerState, xs: &[i32], ys: &[i32]) -> Self {
        let dx = xs.len().max(1);
        let dy = ys.len().max(1);
        let dim = dx * dy * 2;
        let mut psi = DVector::zeros(dim);
        for (site, amp) in s.iter() {
            let ix = xs.binary_search(&site.x).expect("x coordinate indexed");
            let iy = ys.binary_search(&site.y).expect("y coordinate indexed");
            psi[(ix * dy + iy) * 2 + site.c as usize] = amp;
        }
        let data = &psi * psi.adjoint();
        Self {
            axes: vec![(Axis::X, dx), (Axis::Y, dy), (Axis::Coin, 2)],
            data,
        }
    }

    /// Rank-1 projector of an arbitrary pure vector over explicit axes.
    pub fn from_pure(
        axes: Vec<(Axis, usize)>,
        psi: &DVector<Complex64>,
    ) -> Result<Self, EntangleError> {
        let want: usize = axes.iter().map(|&(_, d)| d).product();
        if psi.len() != want {
            return Err(EntangleError::DimensionMismatch {
                got: psi.len(),
                want,
            });
        }
        let data = psi * psi.adjoint();
        Ok(Self { axes, data })
    }

    pub fn axes(&self) -> &[(Axis, usize)] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    fn axis_position(&self, which: Axis) -> Option<usize> {
        self.axes.iter().position(|&(a, _)| a == which)
    }

    /// Decompose a flat index into per-axis indices.
    fn decompose(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (slot, &(_, d)) in self.axes.iter().enumerate().rev() {
            out[slot] = flat % d;
            flat /= d;
        }
        out
    }

    fn recompose(&self, parts: &[usize]) -> usize {
        let mut flat = 0;
        for (slot, &(_, d)) in self.axes.iter().enumerate() {
            flat = flat * d + parts[slot];
        }
        flat
    }

    /// Standard partial trace keeping the listed subsystems (order preserved
    /// from the original factorization). `keep` must be a nonempty proper
    /// subset of the present axes.
    pub fn partial_trace(&self, keep: &[Axis]) -> Result<DensityMatrix, EntangleError> {
        if keep.is_empty() || keep.len() >= self.axes.len() {
            return Err(EntangleError::BadSubsystemSet);
        }
        let mut keep_slots = Vec::new();
        for &axis in keep {
            let slot = self
                .axis_position(axis)
                .ok_or(EntangleError::BadSubsystemSet)?;
            if keep_slots.contains(&slot) {
                return Err(EntangleError::BadSubsystemSet);
            }
            keep_slots.push(slot);
        }
        keep_slots.sort_unstable();

        let kept_axes: Vec<(Axis, usize)> =
            keep_slots.iter().map(|&slot| self.axes[slot]).collect();
        let traced_slots: Vec<usize> = (0..self.axes.len())
            .filter(|slot| !keep_slots.contains(slot))
            .collect();

        let out_dim: usize = kept_axes.iter().map(|&(_, d)| d).product();
        let mut out = DMatrix::zeros(out_dim, out_dim);
        let n = self.dim();
        for row in 0..n {
            let rparts = self.decompose(row);
            for col in 0..n {
                let cparts = self.decompose(col);
                if traced_slots
                    .iter()
                    .any(|&slot| rparts[slot] != cparts[slot])
                {
                    continue;
                }
                let mut ro = 0;
                let mut co = 0;
                for &slot in &keep_slots {
                    let d = self.axes[slot].1;
                    ro = ro * d + rparts[slot];
                    co = co * d + cparts[slot];
                }
                out[(ro, co)] += self.data[(row, col)];
            }
        }
        Ok(DensityMatrix {
            axes: kept_axes,
            data: out,
        })
    }

    /// Transpose the indices of one subsystem between bra and ket sides.
    /// Hermiticity and the trace are preserved.
    pub fn partial_transpose(&self, which: Axis) -> Result<DMatrix<Complex64>, EntangleError> {
        let slot = self
            .axis_position(which)
            .ok_or(EntangleError::BadSubsystemSet)?;
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for row in 0..n {
            let mut rparts = self.decompose(row);
            for col in 0..n {
                let mut cparts = self.decompose(col);
                std::mem::swap(&mut rparts[slot], &mut cparts[slot]);
                let (tr, tc) = (self.recompose(&rparts), self.recompose(&cparts));
                std::mem::swap(&mut rparts[slot], &mut cparts[slot]);
                out[(tr, tc)] = self.data[(row, col)];
            }
        }
        Ok(out)
    }

    /// Entanglement negativity with respect to one subsystem: the absolute
    /// sum of negative eigenvalues of the partial transpose, equal to
    /// `(‖ρ^{T_i}‖ - 1)/2` for unit-trace input.
    pub fn negativity(&self, which: Axis) -> Result<f64, EntangleError> {
        let pt = self.partial_transpose(which)?;
        let eigs = hermitian_eigenvalues(&pt);
        let neg: f64 = eigs.iter().map(|&l| (l.abs() - l) / 2.0).sum();
        sanitize_negativity(neg)
    }
}

/// Clamp roundoff-level negatives to zero; anything genuinely negative or
/// non-finite signals a broken spectrum.
fn sanitize_negativity(value: f64) -> Result<f64, EntangleError> {
    if !value.is_finite() || value < -1e-10 {
        return Err(EntangleError::NumericalInstability { value });
    }
    Ok(value.max(0.0))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    debug_assert!(is_hermitian(m, 1e-10));
    let mut eigs: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    eigs
}

pub fn is_hermitian(m: &DMatrix<Complex64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            if (m[(r, c)] - m[(c, r)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Von Neumann entropy `-Σ λ log2 λ` of a unit-trace Hermitian matrix, in bits.
pub fn von_neumann_entropy_bits(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m)
        .iter()
        .filter(|&&l| l > 1e-15)
        .map(|&l| -l * l.log2())
        .sum()
}

/// All six negativities of a tripartite pure state plus the assembled tangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementReport {
    /// Pairwise negativities of the reduced two-party states (halved convention).
    pub n_xy: f64,
    pub n_xc: f64,
    pub n_yc: f64,
    /// One-vs-rest negativities of the full state (halved convention).
    pub n_x_rest: f64,
    pub n_y_rest: f64,
    pub n_c_rest: f64,
    /// Mean of the three residual tangle terms built from trace-norm
    /// negativities (twice the `n_*` fields).
    pub pi_tangle: f64,
}

impl EntanglementReport {
    /// Residual term for x: squared one-vs-rest minus squared pairwise,
    /// all in the trace-norm (doubled) convention.
    pub fn pi_x(&self) -> f64 {
        4.0 * (self.n_x_rest * self.n_x_rest - self.n_xy * self.n_xy - self.n_xc * self.n_xc)
    }

    pub fn pi_y(&self) -> f64 {
        4.0 * (self.n_y_rest * self.n_y_rest - self.n_yc * self.n_yc - self.n_xy * self.n_xy)
    }

    pub fn pi_c(&self) -> f64 {
        4.0 * (self.n_c_rest * self.n_c_rest - self.n_xc * self.n_xc - self.n_yc * self.n_yc)
    }

    /// Reassemble the tangle from the stored negativities.
    pub fn recomputed_pi_tangle(&self) -> f64 {
        (self.pi_x() + self.pi_y() + self.pi_c()) / 3.0
    }
}

/// Full tripartite entanglement report of a pure walker state.
pub fn pi_tangle(s: &WalkerState) -> Result<EntanglementReport, EntangleError> {
    pi_tangle_of_density(&DensityMatrix::compact_from_state(s))
}

/// Tangle report of an arbitrary pure tripartite density matrix with axes
/// `(X, Y, Coin)`.
pub fn pi_tangle_of_density(rho: &DensityMatrix) -> Result<EntanglementReport, EntangleError> {
    let n_x_rest = rho.negativity(Axis::X)?;
    let n_y_rest = rho.negativity(Axis::Y)?;
    let n_c_rest = rho.negativity(Axis::Coin)?;
    let n_xy = rho
        .partial_trace(&[Axis::X, Axis::Y])?
        .negativity(Axis::X)?;
    let n_xc = rho
        .partial_trace(&[Axis::X, Axis::Coin])?
        .negativity(Axis::X)?;
    let n_yc = rho
        .partial_trace(&[Axis::Y, Axis::Coin])?
        .negativity(Axis::Y)?;
    let mut report = EntanglementReport {
        n_xy,
        n_xc,
        n_yc,
        n_x_rest,
        n_y_rest,
        n_c_rest,
        pi_tangle: 0.0,
    };
    report.pi_tangle = report.recomputed_pi_tangle();
    Ok(report)
}

/// Negativity between the two position degrees of freedom after tracing out
/// the coin.
pub fn nonlocal_negativity(s: &WalkerState) -> Result<f64, EntangleError> {
    DensityMatrix::compact_from_state(s)
        .partial_trace(&[Axis::X, Axis::Y])?
        .negativity(Axis::X)
}

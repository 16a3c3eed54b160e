//! Sparse state representation and evolution operators for the 2D alternate
//! quantum walk.
//!
//! A walker lives on a bounded square lattice `x, y ∈ [-L, L]` with a
//! two-level coin. One evolution step is `S_y · (1 ⊗ C) · S_x · (1 ⊗ C)`:
//! coin toss, conditional x-shift, coin toss, conditional y-shift. All
//! operations are pure and return new states; shifts that would push
//! amplitude off the lattice are hard errors, never silent truncation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use thiserror::Error;

/// Norm tolerance accepted when constructing a state from raw amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Amplitudes below this magnitude are dropped after each operation; the
/// threshold sits well under every test tolerance in the crate.
const PRUNE_THRESHOLD: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum WalkerError {
    #[error("initial position ({x}, {y}) lies outside lattice half-width {half_width}")]
    PositionOutOfLattice { x: i32, y: i32, half_width: i32 },
    #[error("shift would push amplitude at ({x}, {y}) past lattice half-width {half_width}")]
    BoundarySpill { x: i32, y: i32, half_width: i32 },
    #[error("states live on different lattices (half-widths {left} and {right})")]
    LatticeMismatch { left: i32, right: i32 },
    #[error("amplitudes are not normalized: sum |amp|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
    #[error("non-finite amplitude at ({x}, {y}, {c})")]
    NonFiniteAmplitude { x: i32, y: i32, c: u8 },
}

/// Lattice site plus coin bit. Ordering is (x, y, c) so that the two coin
/// components of a position are adjacent during iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub x: i32,
    pub y: i32,
    /// Coin bit, 0 or 1.
    pub c: u8,
}

impl Site {
    pub fn new(x: i32, y: i32, c: u8) -> Self {
        debug_assert!(c <= 1);
        Self { x, y, c }
    }
}

/// Parameters of the single-qubit coin
/// `C(α,β,γ) = [[cos α, e^{iβ} sin α], [e^{iγ} sin α, -e^{i(β+γ)} cos α]]`,
/// unitary for every parameter choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl CoinParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// Balanced entangling coin, `C(5π/16, π/2, π/2)`.
    pub fn m1() -> Self {
        Self::new(5.0 * PI / 16.0, PI / 2.0, PI / 2.0)
    }

    /// Nonlocal-entangling coin, `C(19π/16, π/2, π/2)`.
    pub fn g1() -> Self {
        Self::new(19.0 * PI / 16.0, PI / 2.0, PI / 2.0)
    }

    /// Hadamard coin, `C(π/4, 0, 0)`.
    pub fn hadamard() -> Self {
        Self::new(PI / 4.0, 0.0, 0.0)
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let (sa, ca) = self.alpha.sin_cos();
        let eib = Complex64::from_polar(1.0, self.beta);
        let eig = Complex64::from_polar(1.0, self.gamma);
        let eibg = Complex64::from_polar(1.0, self.beta + self.gamma);
        Matrix2::new(Complex64::new(ca, 0.0), eib * sa, eig * sa, -eibg * ca)
    }
}

/// Coin spinor `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`; unit norm by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinState {
    pub theta: f64,
    pub phi: f64,
}

impl CoinState {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn spinor(&self) -> (Complex64, Complex64) {
        let up = Complex64::new((self.theta / 2.0).cos(), 0.0);
        let down = Complex64::from_polar(1.0, self.phi) * (self.theta / 2.0).sin();
        debug_assert!((up.norm_sqr() + down.norm_sqr() - 1.0).abs() <= 1e-12);
        (up, down)
    }
}

/// Named coin presets for the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    M1,
    G1,
    Custom,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::M1 => "m1",
            Preset::G1 => "g1",
            Preset::Custom => "custom",
        }
    }
}

/// Per-step evolution recipe: one coin used for both the x and y sub-steps,
/// applied for a fixed number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSpec {
    coin: CoinParams,
    steps: u32,
    preset: Preset,
}

impl EvolutionSpec {
    pub fn m1(steps: u32) -> Self {
        Self {
            coin: CoinParams::m1(),
            steps,
            preset: Preset::M1,
        }
    }

    pub fn g1(steps: u32) -> Self {
        Self {
            coin: CoinParams::g1(),
            steps,
            preset: Preset::G1,
        }
    }

    pub fn custom(coin: CoinParams, steps: u32) -> Self {
        Self {
            coin,
            steps,
            preset: Preset::Custom,
        }
    }

    pub fn coin(&self) -> CoinParams {
        self.coin
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn preset(&self) -> Preset {
        self.preset
    }

    /// Same coin, different step count.
    pub fn with_steps(&self, steps: u32) -> Self {
        Self { steps, ..*self }
    }
}

/// Walker state: a sparse map from occupied sites to complex amplitudes on
/// the lattice `x, y ∈ [-half_width, half_width]`.
///
/// Invariants: every stored amplitude is finite and within lattice bounds,
/// and the squared norm is 1 (up to [`NORM_TOLERANCE`] at construction,
/// preserved exactly by the unitary operations).
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    half_width: i32,
    origin_step: u32,
    amps: BTreeMap<Site, Complex64>,
}

impl WalkerState {
    /// Localized initial state: the coin spinor `q` at position `(l, k)`.
    pub fn initial(l: i32, k: i32, q: CoinState, half_width: i32) -> Result<Self, WalkerError> {
        if l.abs() > half_width || k.abs() > half_width {
            return Err(WalkerError::PositionOutOfLattice {
                x: l,
                y: k,
                half_width,
            });
        }
        let (a0, a1) = q.spinor();
        let mut amps = BTreeMap::new();
        if a0.norm() >= PRUNE_THRESHOLD {
            amps.insert(Site::new(l, k, 0), a0);
        }
        if a1.norm() >= PRUNE_THRESHOLD {
            amps.insert(Site::new(l, k, 1), a1);
        }
        Ok(Self {
            half_width,
            origin_step: 0,
            amps,
        })
    }

    /// Build a state from explicit amplitudes, validating finiteness, lattice
    /// bounds and normalization. Duplicate sites accumulate.
    pub fn from_amplitudes<I>(
        half_width: i32,
        origin_step: u32,
        entries: I,
    ) -> Result<Self, WalkerError>
    where
        I: IntoIterator<Item = (Site, Complex64)>,
    {
        let mut amps: BTreeMap<Site, Complex64> = BTreeMap::new();
        for (site, amp) in entries {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(WalkerError::NonFiniteAmplitude {
                    x: site.x,
                    y: site.y,
                    c: site.c,
                });
            }
            if site.x.abs() > half_width || site.y.abs() > half_width || site.c > 1 {
                return Err(WalkerError::PositionOutOfLattice {
                    x: site.x,
                    y: site.y,
                    half_width,
                });
            }
            *amps.entry(site).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        let norm_sqr: f64 = amps.values().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(WalkerError::NotNormalized { norm_sqr });
        }
        Ok(Self {
            half_width,
            origin_step,
            amps,
        })
    }

    /// Random normalized state supported on `[-support_radius, support_radius]²`,
    /// for property tests and the commutation suite.
    pub fn random<R: rand::Rng>(rng: &mut R, half_width: i32, support_radius: i32) -> Self {
        assert!(support_radius <= half_width);
        let mut amps = BTreeMap::new();
        let mut norm_sqr = 0.0;
        for x in -support_radius..=support_radius {
            for y in -support_radius..=support_radius {
                for c in 0..2u8 {
                    let amp = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                    norm_sqr += amp.norm_sqr();
                    amps.insert(Site::new(x, y, c), amp);
                }
            }
        }
        let scale = norm_sqr.sqrt().recip();
        for amp in amps.values_mut() {
            *amp *= scale;
        }
        Self {
            half_width,
            origin_step: 0,
            amps,
        }
    }

    pub fn half_width(&self) -> i32 {
        self.half_width
    }

    pub fn origin_step(&self) -> u32 {
        self.origin_step
    }

    pub fn amplitude(&self, site: Site) -> Complex64 {
        self.amps
            .get(&site)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Occupied sites in (x, y, c) order.
    pub fn iter(&self) -> impl Iterator<Item = (Site, Complex64)> + '_ {
        self.amps.iter().map(|(&s, &a)| (s, a))
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64, WalkerError> {
        if self.half_width != other.half_width {
            return Err(WalkerError::LatticeMismatch {
                left: self.half_width,
                right: other.half_width,
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (site, amp) in &self.amps {
            if let Some(b) = other.amps.get(site) {
                acc += amp.conj() * b;
            }
        }
        Ok(acc)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64, WalkerError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// l2 distance to another state on the same lattice.
    pub fn distance(&self, other: &Self) -> Result<f64, WalkerError> {
        if self.half_width != other.half_width {
            return Err(WalkerError::LatticeMismatch {
                left: self.half_width,
                right: other.half_width,
            });
        }
        let mut acc = 0.0;
        for (site, amp) in &self.amps {
            let b = other.amplitude(*site);
            acc += (amp - b).norm_sqr();
        }
        for (site, b) in &other.amps {
            if !self.amps.contains_key(site) {
                acc += b.norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// Position probabilities summed over the coin, for measurement readout.
    pub fn position_mass(&self) -> BTreeMap<(i32, i32), f64> {
        let mut mass = BTreeMap::new();
        for (site, amp) in &self.amps {
            *mass.entry((site.x, site.y)).or_insert(0.0) += amp.norm_sqr();
        }
        mass
    }

    /// Sorted distinct occupied x coordinates.
    pub fn occupied_xs(&self) -> Vec<i32> {
        let mut xs: Vec<i32> = self.amps.keys().map(|s| s.x).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// Sorted distinct occupied y coordinates.
    pub fn occupied_ys(&self) -> Vec<i32> {
        let mut ys: Vec<i32> = self.amps.keys().map(|s| s.y).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }

    fn apply_matrix(&self, m: &Matrix2<Complex64>) -> Self {
        let mut amps: BTreeMap<Site, Complex64> = BTreeMap::new();
        for (site, amp) in &self.amps {
            let (to0, to1) = if site.c == 0 {
                (m[(0, 0)] * amp, m[(1, 0)] * amp)
            } else {
                (m[(0, 1)] * amp, m[(1, 1)] * amp)
            };
            let base = Site::new(site.x, site.y, 0);
            *amps.entry(base).or_insert(Complex64::new(0.0, 0.0)) += to0;
            *amps
                .entry(Site::new(site.x, site.y, 1))
                .or_insert(Complex64::new(0.0, 0.0)) += to1;
        }
        amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
        Self {
            half_width: self.half_width,
            origin_step: self.origin_step,
            amps,
        }
    }

    /// Left-multiply the coin spinor at every position by `C(p)`.
    pub fn apply_coin(&self, p: &CoinParams) -> Self {
        self.apply_matrix(&p.matrix())
    }

    fn shifted<F>(&self, mover: F) -> Result<Self, WalkerError>
    where
        F: Fn(Site) -> Site,
    {
        let mut amps = BTreeMap::new();
        for (&site, &amp) in &self.amps {
            let dst = mover(site);
            if dst.x.abs() > self.half_width || dst.y.abs() > self.half_width {
                return Err(WalkerError::BoundarySpill {
                    x: site.x,
                    y: site.y,
                    half_width: self.half_width,
                });
            }
            amps.insert(dst, amp);
        }
        Ok(Self {
            half_width: self.half_width,
            origin_step: self.origin_step,
            amps,
        })
    }

    /// Conditional x-shift: coin 0 moves one site toward -x, coin 1 toward +x.
    pub fn shift_x(&self) -> Result<Self, WalkerError> {
        self.shifted(|s| Site::new(if s.c == 0 { s.x - 1 } else { s.x + 1 }, s.y, s.c))
    }

    /// Conditional y-shift: coin 0 moves one site toward -y, coin 1 toward +y.
    pub fn shift_y(&self) -> Result<Self, WalkerError> {
        self.shifted(|s| Site::new(s.x, if s.c == 0 { s.y - 1 } else { s.y + 1 }, s.c))
    }

    fn unshift_x(&self) -> Result<Self, WalkerError> {
        self.shifted(|s| Site::new(if s.c == 0 { s.x + 1 } else { s.x - 1 }, s.y, s.c))
    }

    fn unshift_y(&self) -> Result<Self, WalkerError> {
        self.shifted(|s| Site::new(s.x, if s.c == 0 { s.y + 1 } else { s.y - 1 }, s.c))
    }

    /// One full step `S_y · (1 ⊗ C) · S_x · (1 ⊗ C)`.
    pub fn evolve_step(&self, p: &CoinParams) -> Result<Self, WalkerError> {
        let mut s = self.apply_coin(p).shift_x()?.apply_coin(p).shift_y()?;
        s.origin_step = self.origin_step + 1;
        Ok(s)
    }

    /// Exact adjoint of [`evolve_step`](Self::evolve_step): undo the y-shift,
    /// apply the adjoint coin, undo the x-shift, apply the adjoint coin.
    pub fn inverse_step(&self, p: &CoinParams) -> Result<Self, WalkerError> {
        let adj = p.matrix().adjoint();
        let mut s = self
            .unshift_y()?
            .apply_matrix(&adj)
            .unshift_x()?
            .apply_matrix(&adj);
        s.origin_step = self.origin_step.saturating_sub(1);
        Ok(s)
    }

    /// `spec.steps` applications of [`evolve_step`](Self::evolve_step).
    pub fn evolve(&self, spec: &EvolutionSpec) -> Result<Self, WalkerError> {
        let coin = spec.coin();
        let mut s = self.clone();
        for _ in 0..spec.steps() {
            s = s.evolve_step(&coin)?;
        }
        Ok(s)
    }

    /// `spec.steps` applications of [`inverse_step`](Self::inverse_step).
    ///
    /// Intermediate states can spread up to `spec.steps` sites beyond the
    /// input support (each sub-step shifts outward before the adjoint coin
    /// cancels, and the cancellation residue creeps one site per step), so
    /// the lattice must carry that margin.
    pub fn inverse_evolve(&self, spec: &EvolutionSpec) -> Result<Self, WalkerError> {
        let coin = spec.coin();
        let mut s = self.clone();
        for _ in 0..spec.steps() {
            s = s.inverse_step(&coin)?;
        }
        Ok(s)
    }

    /// Coin-independent translation by `(dx, dy)`; a permutation of
    /// amplitudes, so the norm is preserved exactly.
    pub fn translate(&self, dx: i32, dy: i32) -> Result<Self, WalkerError> {
        self.shifted(|s| Site::new(s.x + dx, s.y + dy, s.c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn coin_matrix_alpha_zero_is_diag_1_minus_1() {
        let m = CoinParams::new(0.0, 0.0, 0.0).matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)].re, -1.0, epsilon = 1e-15);
        assert!(m[(0, 1)].norm() < 1e-15 && m[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn coin_matrix_m1_has_i_sin_off_diagonal() {
        let m = CoinParams::m1().matrix();
        let a = 5.0 * PI / 16.0;
        assert_abs_diff_eq!(m[(0, 0)].re, a.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)].im, a.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 0)].im, a.sin(), epsilon = 1e-15);
        // e^{i(β+γ)} = e^{iπ} = -1 cancels the minus sign on the lower right
        assert_abs_diff_eq!(m[(1, 1)].re, a.cos(), epsilon = 1e-12);
        assert!(m[(1, 1)].im.abs() < 1e-12);
    }

    #[test]
    fn coin_matrix_hadamard() {
        let m = CoinParams::hadamard().matrix();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(m[(0, 0)].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 0)].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)].re, -h, epsilon = 1e-15);
    }

    #[test]
    fn coin_matrix_is_unitary_for_arbitrary_params() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = CoinParams::new(
                rng.gen::<f64>() * 2.0 * PI,
                rng.gen::<f64>() * 2.0 * PI,
                rng.gen::<f64>() * 2.0 * PI,
            );
            let m = p.matrix();
            let prod = m.adjoint() * m;
            let id = Matrix2::<Complex64>::identity();
            let dev = (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev <= 1e-12, "unitarity deviation {dev}");
        }
    }

    #[test]
    fn initial_state_places_spinor() {
        let s = WalkerState::initial(0, 0, CoinState::new(PI, 0.0), 4).unwrap();
        assert_eq!(s.support_len(), 1);
        assert_abs_diff_eq!(s.amplitude(Site::new(0, 0, 1)).re, 1.0, epsilon = 1e-15);

        let s = WalkerState::initial(0, 0, CoinState::new(PI / 2.0, PI), 4).unwrap();
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(s.amplitude(Site::new(0, 0, 0)).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(Site::new(0, 0, 1)).re, -h, epsilon = 1e-12);
    }

    #[test]
    fn initial_state_out_of_lattice() {
        let err = WalkerState::initial(5, 0, CoinState::new(0.0, 0.0), 4).unwrap_err();
        assert!(matches!(
            err,
            WalkerError::PositionOutOfLattice { x: 5, .. }
        ));
    }

    #[test]
    fn apply_coin_hadamard_on_coin0() {
        let s = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 2).unwrap();
        let s = s.apply_coin(&CoinParams::hadamard());
        let h = 0.5f64.sqrt();
        assert_abs_diff_eq!(s.amplitude(Site::new(0, 0, 0)).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(Site::new(0, 0, 1)).re, h, epsilon = 1e-15);
    }

    #[test]
    fn apply_coin_alpha_zero_negates_coin1() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = WalkerState::random(&mut rng, 3, 1);
        let t = s.apply_coin(&CoinParams::new(0.0, 0.0, 0.0));
        for (site, amp) in s.iter() {
            let expect = if site.c == 0 { amp } else { -amp };
            assert!((t.amplitude(site) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn shifts_move_single_kets() {
        let s = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 2).unwrap();
        let sx = s.shift_x().unwrap();
        assert_abs_diff_eq!(sx.amplitude(Site::new(-1, 0, 0)).re, 1.0, epsilon = 1e-15);

        let s = WalkerState::initial(0, 0, CoinState::new(PI, 0.0), 2).unwrap();
        let sy = s.shift_y().unwrap();
        assert_abs_diff_eq!(sy.amplitude(Site::new(0, 1, 1)).re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn shift_at_boundary_spills() {
        let s = WalkerState::initial(-2, 0, CoinState::new(0.0, 0.0), 2).unwrap();
        assert!(matches!(
            s.shift_x(),
            Err(WalkerError::BoundarySpill { .. })
        ));
    }

    #[test]
    fn evolve_step_hadamard_hand_value() {
        // one step on |0,0,0_c⟩: (|-1,-1,0⟩ + |-1,1,1⟩ + |1,-1,0⟩ - |1,1,1⟩)/2
        let s = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 3).unwrap();
        let s = s.evolve_step(&CoinParams::hadamard()).unwrap();
        assert_eq!(s.origin_step(), 1);
        assert_abs_diff_eq!(s.amplitude(Site::new(-1, -1, 0)).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(Site::new(-1, 1, 1)).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(Site::new(1, -1, 0)).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(Site::new(1, 1, 1)).re, -0.5, epsilon = 1e-15);
        assert_eq!(s.support_len(), 4);
    }

    #[test]
    fn inverse_step_undoes_hadamard_step() {
        let s0 = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 3).unwrap();
        let s1 = s0.evolve_step(&CoinParams::hadamard()).unwrap();
        let back = s1.inverse_step(&CoinParams::hadamard()).unwrap();
        assert!(back.distance(&s0).unwrap() <= 1e-12);
        assert_eq!(back.origin_step(), 0);
    }

    #[test]
    fn evolve_zero_steps_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = WalkerState::random(&mut rng, 4, 2);
        let spec = EvolutionSpec::m1(0);
        assert_eq!(s.evolve(&spec).unwrap(), s);
    }

    #[test]
    fn evolve_round_trip_m1() {
        let s0 = WalkerState::initial(0, 0, CoinState::new(PI / 2.0, PI), 8).unwrap();
        let spec = EvolutionSpec::m1(2);
        let fwd = s0.evolve(&spec).unwrap();
        let back = fwd.inverse_evolve(&spec).unwrap();
        assert!(back.fidelity(&s0).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn mismatched_inverse_coin_loses_fidelity() {
        let s0 = WalkerState::initial(0, 0, CoinState::new(PI / 2.0, PI), 8).unwrap();
        let fwd = s0.evolve(&EvolutionSpec::m1(2)).unwrap();
        let back = fwd.inverse_evolve(&EvolutionSpec::g1(2)).unwrap();
        assert!(back.fidelity(&s0).unwrap() < 1.0 - 1e-3);
    }

    #[test]
    fn light_cone_and_parity_hold() {
        let s0 = WalkerState::initial(0, 0, CoinState::new(PI / 3.0, 0.7), 12).unwrap();
        let mut s = s0;
        for t in 1..=5u32 {
            s = s.evolve_step(&CoinParams::m1()).unwrap();
            for (site, _) in s.iter() {
                assert!(site.x.abs() <= t as i32 && site.y.abs() <= t as i32);
                assert_eq!(site.x.rem_euclid(2), (t as i32).rem_euclid(2));
                assert_eq!(site.y.rem_euclid(2), (t as i32).rem_euclid(2));
            }
        }
    }

    #[test]
    fn fidelity_basics() {
        let s = WalkerState::initial(0, 0, CoinState::new(PI / 2.0, PI), 3).unwrap();
        assert_abs_diff_eq!(s.fidelity(&s).unwrap(), 1.0, epsilon = 1e-12);

        let a = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 3).unwrap();
        let b = WalkerState::initial(1, 0, CoinState::new(0.0, 0.0), 3).unwrap();
        assert_abs_diff_eq!(a.fidelity(&b).unwrap(), 0.0, epsilon = 1e-15);

        // t=1 Hadamard output is orthogonal to the input ket
        let u = a.evolve_step(&CoinParams::hadamard()).unwrap();
        assert_abs_diff_eq!(a.fidelity(&u).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_lattice_mismatch() {
        let a = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 3).unwrap();
        let b = WalkerState::initial(0, 0, CoinState::new(0.0, 0.0), 4).unwrap();
        assert!(matches!(
            a.fidelity(&b),
            Err(WalkerError::LatticeMismatch { .. })
        ));
    }

    #[test]
    fn from_amplitudes_rejects_bad_norm_and_nan() {
        let bad = WalkerState::from_amplitudes(2, 0, [(Site::new(0, 0, 0), c(0.5, 0.0))]);
        assert!(matches!(bad, Err(WalkerError::NotNormalized { .. })));

        let nan = WalkerState::from_amplitudes(2, 0, [(Site::new(0, 0, 0), c(f64::NAN, 0.0))]);
        assert!(matches!(nan, Err(WalkerError::NonFiniteAmplitude { .. })));
    }

    #[test]
    fn translate_moves_support() {
        let s = WalkerState::initial(0, 0, CoinState::new(PI / 2.0, PI), 5).unwrap();
        let t = s.translate(1, 2).unwrap();
        assert_abs_diff_eq!(
            t.amplitude(Site::new(1, 2, 0)).re,
            0.5f64.sqrt(),
            epsilon = 1e-15
        );
        assert!(matches!(
            s.translate(6, 0),
            Err(WalkerError::BoundarySpill { .. })
        ));
    }
}

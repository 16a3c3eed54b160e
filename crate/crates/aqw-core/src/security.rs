//! Entropy accounting for the key space and simulators for the two named
//! eavesdropping strategies.
//!
//! The key space is a finite grid: `D` admissible coins, `|τ|` admissible
//! step counts, and initial basis states on a `(2N+1)²` position box with a
//! two-valued coin. All choices are uniform and independent, so the private
//! key's Shannon entropy exceeds the public key's von Neumann entropy by
//! exactly `log2(D·|τ|)` bits — the margin an eavesdropper cannot close by
//! any measurement (Holevo bound).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::protocol::{self, MessagePair, PrivateKey, ProtocolError, DETECTION_THRESHOLD};
use crate::walker::{CoinParams, CoinState, EvolutionSpec, WalkerError, WalkerState};

#[derive(Debug, Error)]
pub enum SecurityError {
    #[error("invalid attack or key-space configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Walker(#[from] WalkerError),
}

/// Finite sampling grid for private keys: coin count, step-count choices,
/// and the position bound `N` (initial positions range over `[-N, N]²`,
/// coin basis over `{0, 1}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpace {
    coin_count: u128,
    step_count: u128,
    position_bound: u32,
}

impl KeySpace {
    pub fn new(
        coin_count: u128,
        step_count: u128,
        position_bound: u32,
    ) -> Result<Self, SecurityError> {
        if coin_count == 0 || step_count == 0 {
            return Err(SecurityError::Config(
                "coin and step counts must be at least 1".into(),
            ));
        }
        Ok(Self {
            coin_count,
            step_count,
            position_bound,
        })
    }

    pub fn coin_count(&self) -> u128 {
        self.coin_count
    }

    pub fn step_count(&self) -> u128 {
        self.step_count
    }

    pub fn position_bound(&self) -> u32 {
        self.position_bound
    }

    /// Number of basis initial states, `2(2N+1)²`.
    pub fn basis_state_count(&self) -> u64 {
        let side = 2 * self.position_bound as u64 + 1;
        2 * side * side
    }
}

/// Entropy bookkeeping in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport {
    /// Von Neumann entropy of the public key as seen without the private key.
    pub von_neumann_bits: f64,
    /// Shannon entropy of the uniform private-key distribution.
    pub shannon_bits: f64,
    /// Ceiling on classical information any measurement can extract.
    pub holevo_bound_bits: f64,
    /// `shannon_bits - von_neumann_bits`, equal to `log2(D·|τ|)`.
    pub gap_bits: f64,
    /// Configured minimum acceptable gap.
    pub floor_bits: f64,
    /// False when the gap falls below the floor.
    pub secure: bool,
}

/// Von Neumann entropy of the uniformly mixed public key,
/// `log2(2(2N+1)²) = 1 + 2·log2(2N+1)` bits.
pub fn mixed_public_key_entropy(ks: &KeySpace) -> f64 {
    1.0 + 2.0 * (2.0 * ks.position_bound as f64 + 1.0).log2()
}

/// Shannon entropy of the uniform private-key distribution,
/// `log2(D·|τ|) + 2·log2(2N+1) + 1` bits.
pub fn private_key_entropy(ks: &KeySpace) -> f64 {
    (ks.coin_count as f64).log2() + (ks.step_count as f64).log2() + mixed_public_key_entropy(ks)
}

/// Assemble the report; `floor_bits` is the minimum gap that counts as a
/// secure configuration (64 by default in the command-line tool).
pub fn security_report(ks: &KeySpace, floor_bits: f64) -> SecurityReport {
    let von_neumann_bits = mixed_public_key_entropy(ks);
    let shannon_bits = private_key_entropy(ks);
    let gap_bits = shannon_bits - von_neumann_bits;
    SecurityReport {
        von_neumann_bits,
        shannon_bits,
        holevo_bound_bits: von_neumann_bits,
        gap_bits,
        floor_bits,
        secure: gap_bits >= floor_bits,
    }
}

/// The public key averaged over every basis initial state on the key space's
/// position box, expressed in the frame of the evolved basis states: entry
/// `(i, j)` is `⟨ψ_i| ρ_pk |ψ_j⟩` for `ψ_i = U^t |basis_i⟩`. Because the
/// evolution is an isometry, the evolved states stay orthonormal and the
/// mixture is exactly `I/dim` — the uniformity an eavesdropper faces.
pub fn averaged_public_key_matrix(
    ks: &KeySpace,
    spec: &EvolutionSpec,
) -> Result<DMatrix<Complex64>, SecurityError> {
    let n = ks.position_bound as i32;
    let half_width = n + spec.steps() as i32;
    let mut evolved = Vec::new();
    for l in -n..=n {
        for k in -n..=n {
            for q in 0..2u8 {
                let coin = if q == 0 {
                    CoinState::new(0.0, 0.0)
                } else {
                    CoinState::new(std::f64::consts::PI, 0.0)
                };
                evolved.push(WalkerState::initial(l, k, coin, half_width)?.evolve(spec)?);
            }
        }
    }
    let dim = evolved.len();
    let mut gram = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            gram[(i, j)] = evolved[i].inner(&evolved[j])?;
        }
    }
    Ok(&gram * &gram / Complex64::new(dim as f64, 0.0))
}

/// What the interceptor does with the ciphertext in transit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EveBehavior {
    /// Measure in the position ⊗ coin computational basis and forward the
    /// collapsed basis ket.
    Measure,
    /// Forward untouched (the null attack; undetectable by construction).
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackMethod {
    Enumeration,
    MonteCarlo,
}

/// Aggregated attack statistics. Enumeration results sum exactly over every
/// measurement outcome; Monte Carlo results are frequencies under the
/// recorded seed (per-trial generators derived from it by stream counter).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackStats {
    pub trials: u64,
    /// Probability the eavesdropper's inferred message pair is correct, even
    /// granting her the initial position (an upper bound on her power).
    pub eve_correct_both: f64,
    /// Probability the receiver's decryption raises a tamper error.
    pub bob_detects: f64,
    pub method: AttackMethod,
    pub seed: Option<u64>,
}

fn basis_ket(site: crate::walker::Site, half_width: i32) -> WalkerState {
    WalkerState::from_amplitudes(half_width, 0, [(site, Complex64::new(1.0, 0.0))])
        .expect("basis ket is normalized")
}

fn bob_detects_on(cipher: &WalkerState, key: &PrivateKey, msg_bound: i32) -> bool {
    matches!(
        protocol::decrypt(cipher, key, msg_bound),
        Err(ProtocolError::TamperDetected { .. })
    )
}

/// Intercept-and-resend: the interceptor measures the ciphertext in the
/// position ⊗ coin basis (or forwards it untouched) and the receiver then
/// decrypts whatever arrives. Enumeration mode sums over every outcome and
/// requires `t ≤ 3`; Monte Carlo samples `trials` outcomes.
pub fn intercept_resend(
    key: &PrivateKey,
    msg: MessagePair,
    msg_bound: i32,
    behavior: EveBehavior,
    method: AttackMethod,
    trials: u64,
    seed: u64,
) -> Result<AttackStats, SecurityError> {
    if method == AttackMethod::Enumeration && key.spec.steps() > 3 {
        return Err(SecurityError::Config(
            "enumeration mode supports at most 3 steps; use monte-carlo".into(),
        ));
    }
    let public = protocol::keygen(key, msg_bound)?;
    let cipher = protocol::encrypt(&public, msg)?;
    let half_width = cipher.half_width();
    let center = (key.l + msg.m, key.k + msg.n);
    let message_space = (2 * msg_bound as u64 + 1).pow(2);

    match (behavior, method) {
        (EveBehavior::Forward, AttackMethod::Enumeration) => {
            // untouched ciphertext decodes cleanly; Eve can only guess blind
            let bob_detects = if bob_detects_on(&cipher, key, msg_bound) {
                1.0
            } else {
                0.0
            };
            Ok(AttackStats {
                trials: 1,
                eve_correct_both: 1.0 / message_space as f64,
                bob_detects,
                method,
                seed: None,
            })
        }
        (EveBehavior::Forward, AttackMethod::MonteCarlo) => {
            let mut detected = 0u64;
            let mut correct = 0u64;
            for trial in 0..trials {
                let mut rng = trial_rng(seed, trial);
                if bob_detects_on(&cipher, key, msg_bound) {
                    detected += 1;
                }
                let guess = MessagePair::new(
                    rng.gen_range(-msg_bound..=msg_bound),
                    rng.gen_range(-msg_bound..=msg_bound),
                );
                if guess == msg {
                    correct += 1;
                }
            }
            Ok(AttackStats {
                trials,
                eve_correct_both: correct as f64 / trials as f64,
                bob_detects: detected as f64 / trials as f64,
                method,
                seed: Some(seed),
            })
        }
        (EveBehavior::Measure, AttackMethod::Enumeration) => {
            let mut bob_detects = 0.0f64;
            let mut eve_correct = 0.0f64;
            for (site, amp) in cipher.iter() {
                let p = amp.norm_sqr();
                if bob_detects_on(&basis_ket(site, half_width), key, msg_bound) {
                    bob_detects += p;
                }
                if (site.x, site.y) == center {
                    eve_correct += p;
                }
            }
            Ok(AttackStats {
                trials: cipher.support_len() as u64,
                // outcome probabilities sum to 1 only up to roundoff
                eve_correct_both: eve_correct.min(1.0),
                bob_detects: bob_detects.min(1.0),
                method,
                seed: None,
            })
        }
        (EveBehavior::Measure, AttackMethod::MonteCarlo) => {
            let outcomes: Vec<(crate::walker::Site, f64)> =
                cipher.iter().map(|(s, a)| (s, a.norm_sqr())).collect();
            let mut detected = 0u64;
            let mut correct = 0u64;
            for trial in 0..trials {
                let mut rng = trial_rng(seed, trial);
                let site = sample_outcome(&outcomes, rng.gen::<f64>());
                if bob_detects_on(&basis_ket(site, half_width), key, msg_bound) {
                    detected += 1;
                }
                if (site.x, site.y) == center {
                    correct += 1;
                }
            }
            Ok(AttackStats {
                trials,
                eve_correct_both: correct as f64 / trials as f64,
                bob_detects: detected as f64 / trials as f64,
                method,
                seed: Some(seed),
            })
        }
    }
}

/// Per-trial generator: one root seed, the trial index as the stream
/// counter, so trials are reproducible and order-independent.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Projective measurement in the position ⊗ coin computational basis:
/// samples an occupied site with probability `|amplitude|²` and returns the
/// collapsed basis ket on the same lattice.
pub fn measure_collapse<R: Rng>(state: &WalkerState, rng: &mut R) -> WalkerState {
    let outcomes: Vec<(crate::walker::Site, f64)> =
        state.iter().map(|(s, a)| (s, a.norm_sqr())).collect();
    let site = sample_outcome(&outcomes, rng.gen::<f64>());
    basis_ket(site, state.half_width())
}

fn sample_outcome(outcomes: &[(crate::walker::Site, f64)], mut u: f64) -> crate::walker::Site {
    for &(site, p) in outcomes {
        if u < p {
            return site;
        }
        u -= p;
    }
    outcomes.last().expect("non-empty support").0
}

/// Candidate private keys an impersonating eavesdropper samples from.
#[derive(Debug, Clone)]
pub struct KeyGuessGrid {
    pub coins: Vec<CoinParams>,
    pub steps: Vec<u32>,
    /// Guessed initial positions range over `[-position_bound, position_bound]²`.
    pub position_bound: i32,
}

impl KeyGuessGrid {
    /// Degenerate grid holding exactly the true key parameters.
    pub fn exact(key: &PrivateKey) -> Self {
        Self {
            coins: vec![key.spec.coin()],
            steps: vec![key.spec.steps()],
            position_bound: 0,
        }
    }

    /// `coin_count` coins drawn uniformly from `[0, 2π)³`; a measure-zero
    /// chance of hitting any specific coin, so the true one is excluded.
    pub fn sampled(coin_count: usize, steps: Vec<u32>, position_bound: i32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = 2.0 * std::f64::consts::PI;
        let coins = (0..coin_count)
            .map(|_| {
                CoinParams::new(
                    rng.gen::<f64>() * tau,
                    rng.gen::<f64>() * tau,
                    rng.gen::<f64>() * tau,
                )
            })
            .collect();
        Self {
            coins,
            steps,
            position_bound,
        }
    }
}

/// Man-in-the-middle key guessing: per trial the eavesdropper draws a
/// candidate key from the grid and runs the receiver's decryption on the true
/// ciphertext. A decode that fails the product-ket validation tells her the
/// guess was wrong, leaving a blind uniform guess over the message space; so
/// her success rate is bounded by chance plus the grid's collision rate with
/// the true key.
pub fn mitm_key_guess(
    key: &PrivateKey,
    msg: MessagePair,
    msg_bound: i32,
    grid: &KeyGuessGrid,
    trials: u64,
    seed: u64,
) -> Result<AttackStats, SecurityError> {
    if grid.coins.is_empty() || grid.steps.is_empty() {
        return Err(SecurityError::Config(
            "guess grid must contain coins and step counts".into(),
        ));
    }
    let public = protocol::keygen(key, msg_bound)?;
    let cipher = protocol::encrypt(&public, msg)?;
    let offset = grid.position_bound;

    let mut correct = 0u64;
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let coin = grid.coins[rng.gen_range(0..grid.coins.len())];
        let steps = grid.steps[rng.gen_range(0..grid.steps.len())];
        let guess_l = key.l + rng.gen_range(-offset..=offset);
        let guess_k = key.k + rng.gen_range(-offset..=offset);
        let guess_spec = EvolutionSpec::custom(coin, steps);

        let decoded = cipher.inverse_evolve(&guess_spec).ok().and_then(|plain| {
            let ((x, y), mass, _) = protocol::readout(&plain, &key.q);
            (mass >= DETECTION_THRESHOLD).then(|| MessagePair::new(x - guess_l, y - guess_k))
        });
        let guess = decoded.unwrap_or_else(|| {
            MessagePair::new(
                rng.gen_range(-msg_bound..=msg_bound),
                rng.gen_range(-msg_bound..=msg_bound),
            )
        });
        if guess == msg {
            correct += 1;
        }
    }
    Ok(AttackStats {
        trials,
        eve_correct_both: correct as f64 / trials as f64,
        bob_detects: 0.0,
        method: AttackMethod::MonteCarlo,
        seed: Some(seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::von_neumann_entropy_bits;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn golden_key() -> PrivateKey {
        PrivateKey {
            spec: EvolutionSpec::m1(2),
            l: 0,
            k: 0,
            q: CoinState::new(PI / 2.0, PI),
        }
    }

    #[test]
    fn key_space_rejects_zero_counts() {
        assert!(KeySpace::new(0, 1, 1).is_err());
        assert!(KeySpace::new(1, 0, 1).is_err());
    }

    #[test]
    fn mixed_key_entropy_values() {
        let n0 = KeySpace::new(1, 1, 0).unwrap();
        assert_abs_diff_eq!(mixed_public_key_entropy(&n0), 1.0, epsilon = 1e-12);

        let n2 = KeySpace::new(1, 1, 2).unwrap();
        assert_abs_diff_eq!(mixed_public_key_entropy(&n2), 50f64.log2(), epsilon = 1e-12);
    }

    #[test]
    fn private_key_entropy_values() {
        let trivial = KeySpace::new(1, 1, 0).unwrap();
        assert_abs_diff_eq!(private_key_entropy(&trivial), 1.0, epsilon = 1e-12);

        let ks = KeySpace::new(1024, 16, 2).unwrap();
        let expected = 16384f64.log2() + 25f64.log2() + 1.0;
        assert_abs_diff_eq!(private_key_entropy(&ks), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 19.643856, epsilon = 1e-6);
    }

    #[test]
    fn entropy_gap_identity() {
        let ks = KeySpace::new(1 << 20, 37, 5).unwrap();
        let gap = private_key_entropy(&ks) - mixed_public_key_entropy(&ks);
        let expected = ((1u128 << 20) as f64 * 37.0).log2();
        assert_abs_diff_eq!(gap, expected, epsilon = 1e-10);
    }

    #[test]
    fn report_gap_and_floor() {
        let ks = KeySpace::new(1 << 80, 1 << 10, 15).unwrap();
        let report = security_report(&ks, 64.0);
        assert_abs_diff_eq!(report.gap_bits, 90.0, epsilon = 1e-9);
        assert!(report.secure);
        assert_abs_diff_eq!(
            report.holevo_bound_bits,
            report.von_neumann_bits,
            epsilon = 0.0
        );

        let weak = security_report(&KeySpace::new(1, 1, 15).unwrap(), 64.0);
        assert_abs_diff_eq!(weak.gap_bits, 0.0, epsilon = 1e-12);
        assert!(!weak.secure);
    }

    #[test]
    fn averaged_public_key_is_maximally_mixed() {
        let ks = KeySpace::new(1, 1, 1).unwrap();
        let m = averaged_public_key_matrix(&ks, &EvolutionSpec::m1(2)).unwrap();
        let dim = ks.basis_state_count() as usize;
        assert_eq!(m.nrows(), dim);
        let target = 1.0 / dim as f64;
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let expect = if r == c { target } else { 0.0 };
                worst = worst.max((m[(r, c)] - Complex64::new(expect, 0.0)).norm());
            }
        }
        assert!(worst <= 1e-10, "max entry deviation {worst}");

        let entropy = von_neumann_entropy_bits(&m);
        assert_abs_diff_eq!(entropy, mixed_public_key_entropy(&ks), epsilon = 1e-10);
    }

    #[test]
    fn intercept_enumeration_detects_measuring_eve() {
        let stats = intercept_resend(
            &golden_key(),
            MessagePair::new(1, 2),
            3,
            EveBehavior::Measure,
            AttackMethod::Enumeration,
            0,
            0,
        )
        .unwrap();
        assert!(stats.bob_detects > 0.0);
        // every collapsed basis ket spreads under the inverse walk
        assert_abs_diff_eq!(stats.bob_detects, 1.0, epsilon = 1e-12);
        // center mass of the evolved key: (2 + √2)/16
        assert_abs_diff_eq!(
            stats.eve_correct_both,
            (2.0 + 2f64.sqrt()) / 16.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn intercept_enumeration_rejects_large_t() {
        let key = PrivateKey {
            spec: EvolutionSpec::m1(4),
            ..golden_key()
        };
        assert!(matches!(
            intercept_resend(
                &key,
                MessagePair::new(0, 0),
                1,
                EveBehavior::Measure,
                AttackMethod::Enumeration,
                0,
                0
            ),
            Err(SecurityError::Config(_))
        ));
    }

    #[test]
    fn null_attack_is_undetectable() {
        let stats = intercept_resend(
            &golden_key(),
            MessagePair::new(0, 0),
            3,
            EveBehavior::Forward,
            AttackMethod::Enumeration,
            0,
            0,
        )
        .unwrap();
        assert_eq!(stats.bob_detects, 0.0);
        assert_abs_diff_eq!(stats.eve_correct_both, 1.0 / 49.0, epsilon = 1e-12);
    }

    #[test]
    fn monte_carlo_matches_enumeration_within_3_sigma() {
        let key = golden_key();
        let msg = MessagePair::new(1, 2);
        let exact = intercept_resend(
            &key,
            msg,
            3,
            EveBehavior::Measure,
            AttackMethod::Enumeration,
            0,
            0,
        )
        .unwrap();
        let trials = 100_000;
        let mc = intercept_resend(
            &key,
            msg,
            3,
            EveBehavior::Measure,
            AttackMethod::MonteCarlo,
            trials,
            42,
        )
        .unwrap();
        let sigma =
            (exact.eve_correct_both * (1.0 - exact.eve_correct_both) / trials as f64).sqrt();
        assert!((mc.eve_correct_both - exact.eve_correct_both).abs() <= 3.0 * sigma + 1e-9);
        let sigma_d = (exact.bob_detects * (1.0 - exact.bob_detects) / trials as f64).sqrt();
        assert!((mc.bob_detects - exact.bob_detects).abs() <= 3.0 * sigma_d + 1e-9);
    }

    #[test]
    fn mitm_with_true_key_always_succeeds() {
        let key = golden_key();
        let grid = KeyGuessGrid::exact(&key);
        let stats = mitm_key_guess(&key, MessagePair::new(1, 2), 3, &grid, 200, 7).unwrap();
        assert_eq!(stats.eve_correct_both, 1.0);
    }

    #[test]
    fn mitm_over_random_coins_is_chance_level() {
        let key = golden_key();
        let grid = KeyGuessGrid::sampled(1000, vec![2], 0, 99);
        let trials = 2000;
        let stats = mitm_key_guess(&key, MessagePair::new(1, 2), 3, &grid, trials, 5).unwrap();
        let baseline = 1.0 / 49.0;
        let sigma = (baseline * (1.0 - baseline) / trials as f64).sqrt();
        assert!(
            stats.eve_correct_both <= baseline + 3.0 * sigma,
            "success {} vs bound {}",
            stats.eve_correct_both,
            baseline + 3.0 * sigma
        );
    }

    #[test]
    fn mitm_perturbed_coin_fails_validation() {
        // a coin off by 0.01 rad leaves the decode short of the product-ket
        // threshold, so the guess degrades to a blind one
        let key = golden_key();
        let coin = CoinParams::new(5.0 * PI / 16.0 + 0.01, PI / 2.0, PI / 2.0);
        let public = protocol::keygen(&key, 3).unwrap();
        let cipher = protocol::encrypt(&public, MessagePair::new(1, 2)).unwrap();
        let plain = cipher
            .inverse_evolve(&EvolutionSpec::custom(coin, 2))
            .unwrap();
        let (_, mass, _) = protocol::readout(&plain, &key.q);
        assert!(mass < DETECTION_THRESHOLD);
    }
}

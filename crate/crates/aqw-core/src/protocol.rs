//! Dual-message protocol: public-key generation by evolving a localized
//! walker, translation encryption of a message pair, and inverse-evolution
//! decryption with tamper checks.
//!
//! The private key is the evolution recipe plus the initial position and
//! coin state; the public key is the evolved (entangled) walker state. A
//! message pair `(m, n)` is encoded as a coin-independent translation, which
//! commutes with the evolution, so inverting the walk on the ciphertext
//! leaves a clean position ket at `(l+m, k+n)` carrying the original coin
//! spinor. Anything else fails the product-ket checks below.

use thiserror::Error;

use crate::walker::{CoinState, EvolutionSpec, WalkerError, WalkerState};

/// A decoded state must concentrate at least this much probability on a
/// single position, and match the key's coin spinor at least this well, to
/// count as untampered. The honest noise floor is below 1e-9, three orders
/// of magnitude away.
pub const DETECTION_THRESHOLD: f64 = 1.0 - 1e-6;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid protocol configuration: {0}")]
    Config(String),
    #[error("message ({m}, {n}) exceeds the agreed bound {bound}")]
    MessageOutOfRange { m: i32, n: i32, bound: i32 },
    #[error(
        "decoded state failed the {check} check (fidelity {fidelity}); tampering or key mismatch"
    )]
    TamperDetected { check: &'static str, fidelity: f64 },
    #[error(transparent)]
    Walker(#[from] WalkerError),
}

/// Secret session parameters: evolution recipe, initial position, coin state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivateKey {
    pub spec: EvolutionSpec,
    pub l: i32,
    pub k: i32,
    pub q: CoinState,
}

/// The evolved walker state published by the receiver, with the metadata the
/// sender needs (step count for lattice sizing, message bound for range
/// validation).
#[derive(Debug, Clone, PartialEq)]
pub struct PublicKey {
    state: WalkerState,
    declared_t: u32,
    msg_bound: i32,
}

impl PublicKey {
    /// Reassemble a key received out of band (wire frame or state file).
    pub fn from_parts(state: WalkerState, declared_t: u32, msg_bound: i32) -> Self {
        Self {
            state,
            declared_t,
            msg_bound,
        }
    }

    pub fn state(&self) -> &WalkerState {
        &self.state
    }

    pub fn declared_t(&self) -> u32 {
        self.declared_t
    }

    pub fn msg_bound(&self) -> i32 {
        self.msg_bound
    }
}

/// Two integers carried by the x and y degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessagePair {
    pub m: i32,
    pub n: i32,
}

impl MessagePair {
    pub fn new(m: i32, n: i32) -> Self {
        Self { m, n }
    }

    pub fn within(&self, bound: i32) -> bool {
        self.m.abs() <= bound && self.n.abs() <= bound
    }
}

/// Result of an honest decryption.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecryptOutcome {
    pub message: MessagePair,
    /// Probability mass on the winning position, over both coin values.
    pub position_mass: f64,
    /// Fidelity of the conditional coin spinor against the key's coin state.
    pub coin_fidelity: f64,
}

/// Lattice half-width guaranteeing that key generation, translation by up to
/// `msg_bound`, and inverse evolution (including wrong-key attempts at the
/// same step count) never spill: forward support reaches `t`, translation
/// adds `msg_bound`, a mismatched inverse can transiently add `t` more.
pub fn lattice_half_width(steps: u32, msg_bound: i32, l: i32, k: i32) -> i32 {
    2 * steps as i32 + msg_bound + 1 + l.abs().max(k.abs())
}

/// Evolve the private key's initial state into the public key.
pub fn keygen(key: &PrivateKey, msg_bound: i32) -> Result<PublicKey, ProtocolError> {
    if key.spec.steps() == 0 {
        return Err(ProtocolError::Config(
            "step count must be at least 1".into(),
        ));
    }
    if msg_bound < 0 {
        return Err(ProtocolError::Config(
            "message bound must be non-negative".into(),
        ));
    }
    let half_width = lattice_half_width(key.spec.steps(), msg_bound, key.l, key.k);
    let state = WalkerState::initial(key.l, key.k, key.q, half_width)?.evolve(&key.spec)?;
    Ok(PublicKey {
        state,
        declared_t: key.spec.steps(),
        msg_bound,
    })
}

/// Encode a message pair by translating every amplitude by `(m, n)`.
pub fn encrypt(public: &PublicKey, msg: MessagePair) -> Result<WalkerState, ProtocolError> {
    if !msg.within(public.msg_bound) {
        return Err(ProtocolError::MessageOutOfRange {
            m: msg.m,
            n: msg.n,
            bound: public.msg_bound,
        });
    }
    Ok(public.state.translate(msg.m, msg.n)?)
}

/// Position readout: the position carrying the most probability, its mass,
/// and the conditional coin spinor's fidelity against `q`.
pub(crate) fn readout(plain: &WalkerState, q: &CoinState) -> ((i32, i32), f64, f64) {
    let mass = plain.position_mass();
    let (&position, &best) = mass
        .iter()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite probabilities"))
        .expect("state has support");
    let a0 = plain.amplitude(crate::walker::Site::new(position.0, position.1, 0));
    let a1 = plain.amplitude(crate::walker::Site::new(position.0, position.1, 1));
    let (q0, q1) = q.spinor();
    let coin_fidelity = if best > 0.0 {
        (q0.conj() * a0 + q1.conj() * a1).norm_sqr() / best
    } else {
        0.0
    };
    (position, best, coin_fidelity)
}

/// Invert the walk on a ciphertext and read the message pair off the
/// resulting position ket. Rejects anything that is not a clean product of
/// a position ket with the key's coin spinor.
pub fn decrypt(
    cipher: &WalkerState,
    key: &PrivateKey,
    msg_bound: i32,
) -> Result<DecryptOutcome, ProtocolError> {
    let plain = cipher.inverse_evolve(&key.spec)?;
    let ((x, y), position_mass, coin_fidelity) = readout(&plain, &key.q);
    if position_mass < DETECTION_THRESHOLD {
        return Err(ProtocolError::TamperDetected {
            check: "position",
            fidelity: position_mass,
        });
    }
    if coin_fidelity < DETECTION_THRESHOLD {
        return Err(ProtocolError::TamperDetected {
            check: "coin",
            fidelity: coin_fidelity,
        });
    }
    let message = MessagePair::new(x - key.l, y - key.k);
    if !message.within(msg_bound) {
        return Err(ProtocolError::MessageOutOfRange {
            m: message.m,
            n: message.n,
            bound: msg_bound,
        });
    }
    Ok(DecryptOutcome {
        message,
        position_mass,
        coin_fidelity,
    })
}

/// Max deviation `‖U T̂ ψ - T̂ U ψ‖` over random normalized states, where `U`
/// is one evolution step and `T̂` the message translation. The two operators
/// commute, so the contract is a deviation at roundoff level (≤ 1e-12).
pub fn commutation_check(
    spec: &EvolutionSpec,
    msg: MessagePair,
    trials: usize,
    seed: u64,
) -> Result<f64, ProtocolError> {
    use rand::SeedableRng;
    let support_radius = 2;
    let half_width = support_radius + msg.m.abs().max(msg.n.abs()) + 2;
    let coin = spec.coin();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let psi = WalkerState::random(&mut rng, half_width, support_radius);
        let shifted_then_evolved = psi.translate(msg.m, msg.n)?.evolve_step(&coin)?;
        let evolved_then_shifted = psi.evolve_step(&coin)?.translate(msg.m, msg.n)?;
        worst = worst.max(shifted_then_evolved.distance(&evolved_then_shifted)?);
    }
    Ok(worst)
}

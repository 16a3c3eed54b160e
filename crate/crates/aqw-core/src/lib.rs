//! Two-dimensional alternate quantum walk with entanglement quantifiers and
//! a dual-message cryptographic protocol on top of it.
//!
//! [`walker`] holds the sparse state and the evolution operators; [`entangle`]
//! computes negativities and the three-way tangle; [`protocol`] implements
//! key generation, translation encryption, and inverse-walk decryption;
//! [`security`] covers the entropy accounting and eavesdropper simulations;
//! [`wire`] serializes states and runs the framed two-party sessions.

pub mod entangle;
pub mod protocol;
pub mod security;
pub mod walker;
pub mod wire;

pub use entangle::{
    pi_tangle, to_density, Axis, DensityMatrix, EntangleError, EntanglementReport, SupportBox,
};
pub use protocol::{
    decrypt, encrypt, keygen, DecryptOutcome, MessagePair, PrivateKey, ProtocolError, PublicKey,
};
pub use walker::{CoinParams, CoinState, EvolutionSpec, Preset, Site, WalkerError, WalkerState};

//! Photonic circuit description: an ordered device list realizing the walk
//! (key generation) or its inverse (decryption) on a single photon, with the
//! transverse spatial mode, path, and polarization carrying the x, y, and
//! coin degrees of freedom.

use aqw_core::walker::CoinParams;
use serde::Serialize;
use std::f64::consts::PI;

use crate::angle::render_radians;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Generate,
    Decrypt,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Stage {
    /// Coin–x-shift–coin composite acting on polarization and spatial mode.
    JPlate {
        alpha: f64,
        beta: f64,
        gamma: f64,
        role: String,
    },
    /// Polarizing beam splitter: the conditional path (y) shift.
    Pbs { role: String },
    /// Single-photon detector.
    Spd { role: String },
    /// Single-mode fiber plus spatial light modulator, filtering one
    /// transverse mode onto a detector.
    SmfSlm { role: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CircuitDescription {
    pub direction: Direction,
    pub steps: u32,
    pub stages: Vec<Stage>,
}

/// Adjoint coin parameters: the conjugate transpose of `C(α,β,γ)` is
/// `C(α,-γ,-β)`, angles reduced to `[0, 2π)`.
fn adjoint_params(coin: &CoinParams) -> CoinParams {
    let wrap = |a: f64| a.rem_euclid(2.0 * PI);
    CoinParams::new(coin.alpha, wrap(-coin.gamma), wrap(-coin.beta))
}

pub fn circuit_description(
    coin: &CoinParams,
    steps: u32,
    direction: Direction,
) -> Result<CircuitDescription, String> {
    if steps == 0 {
        return Err("a circuit needs at least one step".into());
    }
    let mut stages = Vec::new();
    match direction {
        Direction::Generate => {
            for step in 1..=steps {
                stages.push(Stage::JPlate {
                    alpha: coin.alpha,
                    beta: coin.beta,
                    gamma: coin.gamma,
                    role: format!("step {step}: coin, x-shift, coin"),
                });
                stages.push(Stage::Pbs {
                    role: format!("step {step}: conditional y-shift"),
                });
            }
        }
        Direction::Decrypt => {
            let adj = adjoint_params(coin);
            for step in (1..=steps).rev() {
                stages.push(Stage::Pbs {
                    role: format!("undo step {step}: inverse conditional y-shift"),
                });
                stages.push(Stage::JPlate {
                    alpha: adj.alpha,
                    beta: adj.beta,
                    gamma: adj.gamma,
                    role: format!("undo step {step}: adjoint coin, inverse x-shift, adjoint coin"),
                });
            }
            stages.push(Stage::Spd {
                role: "path readout: second message from the y position".into(),
            });
            stages.push(Stage::SmfSlm {
                role: "mode filter onto a detector: first message from the x position".into(),
            });
        }
    }
    Ok(CircuitDescription {
        direction,
        steps,
        stages,
    })
}

impl std::fmt::Display for CircuitDescription {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let dir = match self.direction {
            Direction::Generate => "generate",
            Direction::Decrypt => "decrypt",
        };
        writeln!(f, "direction {dir} ({} steps)", self.steps)?;
        for (i, stage) in self.stages.iter().enumerate() {
            match stage {
                Stage::JPlate {
                    alpha,
                    beta,
                    gamma,
                    role,
                } => writeln!(
                    f,
                    "stage {:2}: J-plate(alpha={}, beta={}, gamma={})  # {role}",
                    i + 1,
                    render_radians(*alpha),
                    render_radians(*beta),
                    render_radians(*gamma),
                )?,
                Stage::Pbs { role } => writeln!(f, "stage {:2}: PBS  # {role}", i + 1)?,
                Stage::Spd { role } => writeln!(f, "stage {:2}: SPD  # {role}", i + 1)?,
                Stage::SmfSlm { role } => writeln!(f, "stage {:2}: SMF+SLM  # {role}", i + 1)?,
            }
        }
        Ok(())
    }
}

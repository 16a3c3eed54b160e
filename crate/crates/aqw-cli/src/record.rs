//! Private-key record: the secret session parameters persisted as TOML.

use anyhow::{bail, Context, Result};
use aqw_core::walker::{CoinParams, CoinState, EvolutionSpec, Preset};
use aqw_core::PrivateKey;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrivateKeyRecord {
    pub preset: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub steps: u32,
    pub l: i32,
    pub k: i32,
    pub theta: f64,
    pub phi: f64,
    pub msg_bound: i32,
}

impl PrivateKeyRecord {
    pub fn new(key: &PrivateKey, msg_bound: i32) -> Self {
        let coin = key.spec.coin();
        Self {
            preset: key.spec.preset().name().to_string(),
            alpha: coin.alpha,
            beta: coin.beta,
            gamma: coin.gamma,
            steps: key.spec.steps(),
            l: key.l,
            k: key.k,
            theta: key.q.theta,
            phi: key.q.phi,
            msg_bound,
        }
    }

    pub fn to_private_key(&self) -> Result<PrivateKey> {
        let coin = CoinParams::new(self.alpha, self.beta, self.gamma);
        let spec = match self.preset.as_str() {
            "m1" => EvolutionSpec::m1(self.steps),
            "g1" => EvolutionSpec::g1(self.steps),
            "custom" => EvolutionSpec::custom(coin, self.steps),
            other => bail!("unknown preset {other:?} in private key record"),
        };
        if spec.preset() != Preset::Custom && spec.coin() != coin {
            bail!("private key record's coin parameters disagree with its preset");
        }
        Ok(PrivateKey {
            spec,
            l: self.l,
            k: self.k,
            q: CoinState::new(self.theta, self.phi),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("serializing private key record")?;
        std::fs::write(path, text)
            .with_context(|| format!("writing private key record {}", path.display()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading private key record {}", path.display()))?;
        toml::from_str(&text).context("parsing private key record")
    }
}

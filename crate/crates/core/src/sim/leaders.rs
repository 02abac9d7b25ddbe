// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::ConfigError;

/// Per-round leader identity; `true` means honest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LeaderSequence {
    bits: Vec<bool>,
}

impl LeaderSequence {
    /// I.i.d. draws with P(honest) = 1 - alpha from a ChaCha8 stream seeded
    /// with `seed`.
    pub fn generate(seed: u64, rounds: u64, alpha: f64) -> Self {
        let beta = (1.0 - alpha).clamp(0.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..rounds).map(|_| rng.gen_bool(beta)).collect();
        LeaderSequence { bits }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        LeaderSequence { bits }
    }

    /// Low `rounds` bits of `mask`, round 1 first; bit set = honest.
    pub fn from_mask(mask: u64, rounds: u32) -> Self {
        LeaderSequence {
            bits: (0..rounds).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Leader of 1-based `round`; rounds past the end count as honest.
    pub fn is_honest(&self, round: u64) -> bool {
        round == 0 || self.bits.get(round as usize - 1).copied().unwrap_or(true)
    }

    pub fn honest_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// One `H` or `A` per round followed by a newline.
    pub fn to_text(&self) -> String {
        let mut s: String = self.bits.iter().map(|&b| if b { 'H' } else { 'A' }).collect();
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let body = text.trim_end_matches(['\n', '\r']);
        let bits = body
            .chars()
            .enumerate()
            .map(|(i, c)| match c {
                'H' => Ok(true),
                'A' => Ok(false),
                other => Err(ConfigError::LeaderFile(format!(
                    "unexpected character {other:?} at round {}",
                    i + 1
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if bits.is_empty() {
            return Err(ConfigError::LeaderFile("empty leader sequence".into()));
        }
        Ok(LeaderSequence { bits })
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::LeaderFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }
}

//! Batch file for the `sos` subcommand.
//!
//! ```toml
//! seed = 2024          # required
//! count = 70           # random initial conditions, uniform in (s, θ)
//! bounces = 480
//! reduction = "full"   # full | upper-half | fundamental
//!
//! [[orbit]]            # optional explicit starts, traced first
//! s = 1.25
//! theta = 0.8
//! ```

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use string_billiard::Reduction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub seed: u64,
    #[serde(default)]
    pub count: usize,
    pub bounces: Option<usize>,
    pub reduction: Option<Reduction>,
    #[serde(default, rename = "orbit")]
    pub orbits: Vec<Start>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Start {
    pub s: f64,
    pub theta: f64,
}

impl BatchConfig {
    pub fn parse(text: &str) -> Result<BatchConfig, String> {
        let cfg: BatchConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        if cfg.count == 0 && cfg.orbits.is_empty() {
            return Err("batch has no orbits: set `count` or add [[orbit]] entries".into());
        }
        for (i, o) in cfg.orbits.iter().enumerate() {
            if !(o.theta > 0.0 && o.theta < PI) || !o.s.is_finite() {
                return Err(format!("orbit {i}: need finite s and 0 < theta < π"));
            }
        }
        Ok(cfg)
    }

    /// Explicit starts followed by `count` seeded uniform draws over
    /// `[0, L) × [0, π)`.
    pub fn starts(&self, boundary_length: f64) -> Vec<Start> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = self.orbits.clone();
        out.extend((0..self.count).map(|_| Start {
            s: rng.random_range(0.0..boundary_length),
            theta: rng.random_range(0.0..PI),
        }));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        let err = BatchConfig::parse("count = 3").unwrap_err();
        assert!(err.contains("seed"), "{err}");
    }

    #[test]
    fn explicit_orbits_come_first() {
        let cfg = BatchConfig::parse(
            "seed = 1\ncount = 2\nreduction = \"upper-half\"\n[[orbit]]\ns = 1.0\ntheta = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.reduction, Some(Reduction::UpperHalf));
        let starts = cfg.starts(20.0);
        assert_eq!(starts.len(), 3);
        assert_eq!(starts[0], Start { s: 1.0, theta: 0.5 });
        assert_eq!(starts, cfg.starts(20.0));
    }

    #[test]
    fn rejects_empty_and_bad_batches() {
        assert!(BatchConfig::parse("seed = 1").is_err());
        assert!(BatchConfig::parse("seed = 1\n[[orbit]]\ns = 0.0\ntheta = 4.0\n").is_err());
        assert!(BatchConfig::parse("seed = 1\ncount = 1\ncolour = 2\n").is_err());
    }
}

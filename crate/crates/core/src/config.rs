use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which set of loop thresholds a run uses.
///
/// `Paper` keeps the asymptotic stopping rules, which make both loops
/// vacuous on small graphs. `Practical` keeps improving until the search
/// itself stalls; its results carry no approximation guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Paper,
    Practical,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Profile::Paper),
            "practical" => Ok(Profile::Practical),
            other => Err(format!("unknown profile `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("epsilon must lie in (0, 1/4), got {0}")]
    Epsilon(f64),
    #[error("base c must satisfy c >= 4 and c > 1/epsilon, got c = {c} with epsilon = {epsilon}")]
    BaseC { c: f64, epsilon: f64 },
    #[error("psi factor must be positive and finite, got {0}")]
    PsiFactor(f64),
}

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_PSI_FACTOR: f64 = 0.125;

/// Solver parameters, resolved for a concrete vertex count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub epsilon: f64,
    pub profile: Profile,
    pub base_c: f64,
    /// Local-search eligibility threshold as a multiple of `2^k`.
    pub psi_factor: f64,
    pub stop_threshold_local: f64,
    pub stop_threshold_aug: f64,
    pub rng_seed: u64,
}

/// `log2(n)`, zero for `n <= 1`.
pub fn log2n(n: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (n as f64).log2()
    }
}

/// `max(4, 1/eps + 1e-9, 2 log^0.4 n)`.
pub fn default_base_c(n: usize, epsilon: f64) -> f64 {
    let asymptotic = 2.0 * log2n(n).powf(0.4);
    asymptotic.max(4.0).max(1.0 / epsilon + 1e-9)
}

impl Config {
    pub fn new(n: usize, profile: Profile, epsilon: f64) -> Result<Config, ConfigError> {
        if !(epsilon > 0.0 && epsilon < 0.25) {
            return Err(ConfigError::Epsilon(epsilon));
        }
        let base_c = default_base_c(n, epsilon);
        let (local, aug) = match profile {
            Profile::Paper => (
                34.0 * log2n(n),
                2.0 * log2n(n) / (base_c / 2.0).log2(),
            ),
            Profile::Practical => (0.0, 0.0),
        };
        let cfg = Config {
            epsilon,
            profile,
            base_c,
            psi_factor: DEFAULT_PSI_FACTOR,
            stop_threshold_local: local,
            stop_threshold_aug: aug,
            rng_seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn practical(n: usize) -> Config {
        Config::new(n, Profile::Practical, DEFAULT_EPSILON).expect("default epsilon is valid")
    }

    pub fn with_seed(mut self, seed: u64) -> Config {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(ConfigError::Epsilon(self.epsilon));
        }
        if !(self.base_c >= 4.0 && self.base_c > 1.0 / self.epsilon) {
            return Err(ConfigError::BaseC {
                c: self.base_c,
                epsilon: self.epsilon,
            });
        }
        if !(self.psi_factor > 0.0 && self.psi_factor.is_finite()) {
            return Err(ConfigError::PsiFactor(self.psi_factor));
        }
        Ok(())
    }

    /// Subtree potential cap for start vertices at layer `i`:
    /// `0.9 * eps / (1+eps)^i * c^(k-1)`.
    pub fn efficiency_bound(&self, k: usize, layer: usize) -> f64 {
        0.9 * self.epsilon / (1.0 + self.epsilon).powi(layer as i32)
            * self.base_c.powi(k as i32 - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_c_is_floored() {
        let c = default_base_c(10, 0.1);
        assert!(c > 10.0 && c < 10.0 + 1e-6);
        assert!((default_base_c(16, 0.24) - (1.0 / 0.24 + 1e-9)).abs() < 1e-12);
        // 2 log^0.4 n only takes over once log n is large
        assert_eq!(default_base_c(1 << 40, 0.24), 2.0 * 40f64.powf(0.4));
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert_eq!(
            Config::new(10, Profile::Practical, 0.25),
            Err(ConfigError::Epsilon(0.25))
        );
        assert!(Config::new(10, Profile::Practical, 0.0).is_err());
        let mut cfg = Config::practical(10);
        cfg.base_c = 3.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::BaseC { .. })));
    }

    #[test]
    fn paper_thresholds() {
        let cfg = Config::new(1024, Profile::Paper, 0.1).unwrap();
        assert!((cfg.stop_threshold_local - 340.0).abs() < 1e-9);
        let expected = 20.0 / (cfg.base_c / 2.0).log2();
        assert!((cfg.stop_threshold_aug - expected).abs() < 1e-9);
        let p = Config::practical(1024);
        assert_eq!((p.stop_threshold_local, p.stop_threshold_aug), (0.0, 0.0));
    }
}

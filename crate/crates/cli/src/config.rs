//! Experiment configuration, validation and hashing.

use std::path::PathBuf;

use clap::ValueEnum;
use hdx_core::algebra::Field;
use hdx_core::expansion::Budget;
use hdx_core::groups::Construction;
use hdx_core::rational::Rational;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ConstructionKind {
    UnipFq,
    UnipPoly,
    Xsq,
    File,
}

/// Pipeline stages in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Build,
    Symmetry,
    Homology,
    Cones,
    Expansion,
    Spectral,
    Presentation,
    Checklist,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Build => "build",
            Stage::Symmetry => "symmetry",
            Stage::Homology => "homology",
            Stage::Cones => "cones",
            Stage::Expansion => "expansion",
            Stage::Spectral => "spectral",
            Stage::Presentation => "presentation",
            Stage::Checklist => "checklist",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub construction: ConstructionKind,
    pub n: usize,
    pub q: u32,
    pub s: usize,
    pub complex: Option<PathBuf>,
    pub k: isize,
    pub budget_log2: u32,
    pub size_cap_log2: u32,
    pub lambda: f64,
    #[serde(with = "hdx_core::rational::text")]
    pub epsilon: Rational,
    pub stages: Vec<Stage>,
    pub seed: u64,
}

#[derive(Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError(m));
        match self.construction {
            ConstructionKind::UnipFq | ConstructionKind::UnipPoly => {
                if self.n < 2 {
                    return err(format!("n = {} needs at least two subgroups (n >= 2)", self.n));
                }
                if self.n > 8 {
                    return err(format!("n = {} is outside the supported range 2..=8", self.n));
                }
            }
            ConstructionKind::Xsq => {
                if self.s < 5 {
                    return err(format!("s = {} but the construction needs s > 4", self.s));
                }
                if self.s > 64 {
                    return err(format!("s = {} exceeds 64", self.s));
                }
            }
            ConstructionKind::File => {
                if self.complex.is_none() {
                    return err("construction file needs --complex PATH".into());
                }
            }
        }
        if self.construction != ConstructionKind::File && !Field::is_supported(self.q) {
            return err(format!("q = {} is not a supported prime power", self.q));
        }
        if self.k < 0 {
            return err(format!("k = {} must be nonnegative", self.k));
        }
        if self.budget_log2 == 0 || self.budget_log2 > 40 {
            return err(format!("budget-log2 = {} outside 1..=40", self.budget_log2));
        }
        if self.size_cap_log2 == 0 || self.size_cap_log2 > 30 {
            return err(format!("size-cap-log2 = {} outside 1..=30", self.size_cap_log2));
        }
        if !(self.lambda.is_finite() && self.lambda > -1.0 && self.lambda <= 1.0) {
            return err(format!("lambda = {} outside (-1, 1]", self.lambda));
        }
        if self.epsilon <= Rational::from_integer(0) {
            return err("epsilon must be positive".into());
        }
        Ok(())
    }

    pub fn construction(&self) -> Option<Construction> {
        match self.construction {
            ConstructionKind::UnipFq => Some(Construction::UnipFq { n: self.n, q: self.q }),
            ConstructionKind::UnipPoly => Some(Construction::UnipPoly { n: self.n, q: self.q }),
            ConstructionKind::Xsq => Some(Construction::Xsq { q: self.q, s: self.s }),
            ConstructionKind::File => None,
        }
    }

    pub fn budget(&self) -> Budget {
        Budget {
            classes_log2: self.budget_log2,
            inner_log2: self.budget_log2,
        }
    }

    /// Vector count for homological searches (Gray-code scans).
    pub fn homology_budget(&self) -> u64 {
        1u64 << (self.budget_log2 + 4).min(40)
    }

    pub fn size_cap(&self) -> usize {
        1usize << self.size_cap_log2
    }

    /// SHA-256 over the canonical JSON of the configuration and, for file
    /// complexes, the file contents.
    pub fn hash(&self, file_bytes: Option<&[u8]>) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        if let Some(b) = file_bytes {
            h.update(b);
        }
        hex::encode(h.finalize())
    }
}

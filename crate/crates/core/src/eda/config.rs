use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "bmda-gs")]
    BmdaGs,
    #[serde(rename = "bmda")]
    BmdaOriginal,
    #[serde(rename = "ga")]
    Ga,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::BmdaGs, Algorithm::BmdaOriginal, Algorithm::Ga];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BmdaGs => "bmda-gs",
            Algorithm::BmdaOriginal => "bmda",
            Algorithm::Ga => "ga",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnsupportedAlgorithm(pub String);

impl fmt::Display for UnsupportedAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unsupported algorithm `{}` (expected bmda-gs, bmda or ga)", self.0)
    }
}

impl std::error::Error for UnsupportedAlgorithm {}

impl FromStr for Algorithm {
    type Err = UnsupportedAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bmda-gs" | "bmdags" | "bmda_gs" => Ok(Algorithm::BmdaGs),
            "bmda" | "bmda-original" | "bmda_original" => Ok(Algorithm::BmdaOriginal),
            "ga" => Ok(Algorithm::Ga),
            _ => Err(UnsupportedAlgorithm(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    pub population_size: usize,
    pub truncation_rate: f64,
    pub confidence_level: f64,
    /// Gibbs updates per sample, as a multiple of the variable count.
    pub gibbs_sweep_multiplier: usize,
    pub ga_crossover_rate: f64,
    pub ga_mutation_rate: f64,
    /// Fraction of the ranked population eligible for tournaments.
    pub ga_tournament_truncation: f64,
    pub iteration_budget: usize,
    pub stagnation_window: Option<usize>,
    pub seed: u64,
    pub elitism: bool,
    pub cache_fitness: bool,
    /// Stop as soon as the best fitness reaches this value.
    pub target_fitness: Option<f64>,
}

impl AlgoConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            population_size: 100,
            truncation_rate: 0.2,
            confidence_level: 0.99,
            gibbs_sweep_multiplier: 1000,
            ga_crossover_rate: 0.9,
            ga_mutation_rate: 0.1,
            ga_tournament_truncation: 0.6,
            iteration_budget: 30,
            stagnation_window: None,
            seed: 0,
            elitism: true,
            cache_fitness: true,
            target_fitness: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population_size < 2 {
            return Err(ConfigError::PopulationTooSmall(self.population_size));
        }
        let rates = [
            ("truncation_rate", self.truncation_rate),
            ("confidence_level", self.confidence_level),
            ("ga_tournament_truncation", self.ga_tournament_truncation),
        ];
        for (name, value) in rates {
            if !(value > 0.0 && value <= 1.0) {
                return Err(ConfigError::RateOutOfRange { name, value });
            }
        }
        // a confidence of exactly 1 has no finite quantile
        if self.confidence_level >= 1.0 {
            return Err(ConfigError::RateOutOfRange { name: "confidence_level", value: self.confidence_level });
        }
        for (name, value) in
            [("ga_crossover_rate", self.ga_crossover_rate), ("ga_mutation_rate", self.ga_mutation_rate)]
        {
            if !(0.0..=1.0).contains(&value) {
                return Err(ConfigError::ProbabilityOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

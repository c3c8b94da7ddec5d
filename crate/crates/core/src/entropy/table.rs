use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability tables must sum to one within this tolerance.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A discrete distribution over labelled outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncounterTable {
    #[serde(default)]
    pub name: String,
    pub outcomes: Vec<String>,
    pub probabilities: Vec<f64>,
}

impl EncounterTable {
    pub fn new(name: impl Into<String>, outcomes: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        let table = EncounterTable {
            name: name.into(),
            outcomes,
            probabilities,
        };
        table.validate()?;
        Ok(table)
    }

    /// Unlabelled table; outcomes are named by index.
    pub fn from_probabilities(name: impl Into<String>, probabilities: &[f64]) -> Result<Self> {
        let outcomes = (0..probabilities.len()).map(|i| i.to_string()).collect();
        Self::new(name, outcomes, probabilities.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidTable {
            name: self.name.clone(),
            reason,
        };
        if self.probabilities.is_empty() {
            return Err(invalid("no outcomes".into()));
        }
        if self.outcomes.len() != self.probabilities.len() {
            return Err(invalid(format!(
                "{} outcomes but {} probabilities",
                self.outcomes.len(),
                self.probabilities.len()
            )));
        }
        check_distribution(&self.probabilities).map_err(invalid)
    }
}

pub(crate) fn check_distribution(p: &[f64]) -> std::result::Result<(), String> {
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(format!("probability {bad} outside [0, 1]"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(format!("probabilities sum to {sum}"));
    }
    Ok(())
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn shannon_bits(p: &[f64]) -> f64 {
    // `0.0 - sum` rather than `-sum` so a certain outcome gives +0.
    0.0 - p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Entropy of a validated table, in bits.
pub fn table_entropy(table: &EncounterTable) -> Result<f64> {
    table.validate()?;
    Ok(shannon_bits(&table.probabilities))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_four_is_two_bits() {
        let t = EncounterTable::from_probabilities("u4", &[0.25; 4]).unwrap();
        assert_eq!(table_entropy(&t).unwrap(), 2.0);
    }

    #[test]
    fn point_mass_is_zero() {
        let t = EncounterTable::from_probabilities("pm", &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(table_entropy(&t).unwrap(), 0.0);
    }

    #[test]
    fn act1_rest_distribution() {
        let p = [
            0.0625, 0.125, 0.0625, 0.125, 0.0625, 0.125, 0.125, 0.09375, 0.09375, 0.125,
        ];
        let t = EncounterTable::from_probabilities("act1_rest", &p).unwrap();
        assert!((table_entropy(&t).unwrap() - 3.265).abs() < 1e-3);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            EncounterTable::from_probabilities("short", &[0.5, 0.4]),
            Err(Error::InvalidTable { .. })
        ));
        assert!(EncounterTable::from_probabilities("neg", &[1.5, -0.5]).is_err());
        assert!(EncounterTable::from_probabilities("empty", &[]).is_err());
        let mismatched = EncounterTable {
            name: "m".into(),
            outcomes: vec!["a".into()],
            probabilities: vec![0.5, 0.5],
        };
        assert!(table_entropy(&mismatched).is_err());
    }

    proptest! {
        #[test]
        fn entropy_bounded_by_log_outcomes(weights in prop::collection::vec(0.0f64..10.0, 1..12)) {
            let total: f64 = weights.iter().sum();
            prop_assume!(total > 1e-6);
            let p: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let h = shannon_bits(&p);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (p.len() as f64).log2() + 1e-12);
        }
    }
}

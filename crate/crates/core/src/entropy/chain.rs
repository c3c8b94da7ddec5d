//! Unknown-room contents as a first-order Markov chain.
//!
//! The first Unknown room of an act draws from the initial vector; each later
//! one draws from the transition row of the previous outcome. Step `k`
//! contributes `H(X_k | X_{k-1}) = Σ_x P(X_{k-1} = x) H(row_x)`, which depends
//! only on the marginal, so the chain can be advanced without knowing what the
//! player actually found.

use super::table::{check_distribution, shannon_bits};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownChain {
    states: Vec<String>,
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    row_entropy: Vec<f64>,
    /// Distribution of the most recent Unknown room; `initial` before any visit.
    marginal: Vec<f64>,
    visits: u32,
}

impl UnknownChain {
    pub fn new(states: Vec<String>, initial: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidTable {
            name: "unknown".into(),
            reason,
        };
        let n = initial.len();
        if n == 0 || states.len() != n {
            return Err(invalid(format!(
                "{} states but {n} initial probabilities",
                states.len()
            )));
        }
        if transition.len() != n || transition.iter().any(|row| row.len() != n) {
            return Err(invalid(format!("transition matrix must be {n}x{n}")));
        }
        check_distribution(&initial).map_err(|e| invalid(format!("initial vector: {e}")))?;
        for (i, row) in transition.iter().enumerate() {
            check_distribution(row).map_err(|e| invalid(format!("row {}: {e}", states[i])))?;
        }
        let row_entropy = transition.iter().map(|row| shannon_bits(row)).collect();
        Ok(UnknownChain {
            states,
            marginal: initial.clone(),
            initial,
            transition,
            row_entropy,
            visits: 0,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn marginal(&self) -> &[f64] {
        &self.marginal
    }

    /// Unknown rooms visited so far in the current act.
    pub fn visits(&self) -> u32 {
        self.visits
    }

    /// The same chain before any visit (act boundary).
    pub fn reset(&self) -> Self {
        UnknownChain {
            marginal: self.initial.clone(),
            visits: 0,
            ..self.clone()
        }
    }

    /// Entropy of the next Unknown room and the advanced chain.
    pub fn step(&self) -> (f64, Self) {
        let mut next = self.clone();
        let bits = if self.visits == 0 {
            shannon_bits(&self.initial)
        } else {
            let bits = self.marginal.iter().zip(&self.row_entropy).map(|(p, h)| p * h).sum();
            next.marginal = (0..self.marginal.len())
                .map(|j| {
                    self.marginal
                        .iter()
                        .zip(&self.transition)
                        .map(|(p, row)| p * row[j])
                        .sum()
                })
                .collect();
            bits
        };
        next.visits += 1;
        (bits, next)
    }
}

/// Entropy of the `k`-th Unknown room of an act; `chain` must have seen `k - 1`.
pub fn unknown_step_entropy(chain: &UnknownChain, k: u32) -> (f64, UnknownChain) {
    debug_assert_eq!(k, chain.visits() + 1, "chain state out of step with k");
    chain.step()
}

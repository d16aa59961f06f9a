//! Estimation theory: Fisher information, Cramér-Rao bounds, sampling,
//! maximum-likelihood estimation, calibration fitting and Monte-Carlo
//! studies.

mod calibration;
mod fisher;
mod mle;
mod montecarlo;
mod sampling;

pub use calibration::{fit_calibration, CalibrationFit};
pub use fisher::{
    crlb, fi_closed_form, fi_total_1d, fi_total_2d, fisher_numeric, gaussian_hg1_prob,
    model_fisher, Branch, FiTotals, FisherReport, Parameterization, DEFAULT_FI_EVAL_FLOOR,
};
pub use mle::{log_likelihood, mle_estimate, EstimationResult, SearchBounds};
pub use montecarlo::{mc_standard_error, McConfig, McSummary, Method};
pub use sampling::{sample_counts, sample_counts_with_rng, sub_seed, trial_rng, TrialRng};

use crate::error::{invalid, Error, Result};

/// Observed or simulated outcome counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    counts: Vec<u64>,
    rows: usize,
    cols: usize,
    total: u64,
    /// Known per-arm shift, when the data are labeled.
    pub separation: Option<f64>,
    /// Acquisition time in seconds.
    pub duration: Option<f64>,
    /// Factor the raw counts were scaled by, if any.
    pub normalization: Option<f64>,
}

impl CountMatrix {
    pub fn new(counts: Vec<u64>, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != counts.len() {
            return Err(Error::ShapeMismatch {
                expected: rows * cols,
                actual: counts.len(),
            });
        }
        let total = counts.iter().sum();
        Ok(Self {
            counts,
            rows,
            cols,
            total,
            separation: None,
            duration: None,
            normalization: None,
        })
    }

    /// A single row of counts, e.g. pixels of a camera.
    pub fn from_vec(counts: Vec<u64>) -> Self {
        let cols = counts.len();
        Self::new(counts, 1, cols).expect("shape matches by construction")
    }

    /// `round(N p_i)` per outcome.
    pub fn expected(probs: &[f64], n: u64, rows: usize, cols: usize) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probabilities must be finite and non-negative"));
        }
        let counts = probs.iter().map(|p| (p * n as f64).round() as u64).collect();
        Self::new(counts, rows, cols)
    }

    pub fn with_separation(mut self, d: f64) -> Self {
        self.separation = Some(d);
        self
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Counts divided by the total; all zeros when the total is zero.
    pub fn frequencies(&self) -> Vec<f64> {
        if self.total == 0 {
            return vec![0.0; self.counts.len()];
        }
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_matrix_invariants() {
        let c = CountMatrix::new(vec![1, 2, 3, 4], 2, 2).unwrap();
        assert_eq!(c.total(), 10);
        assert_eq!(c.frequencies()[3], 0.4);
        assert!(CountMatrix::new(vec![1, 2, 3], 2, 2).is_err());
        let e = CountMatrix::expected(&[0.25, 0.75], 10, 1, 2).unwrap();
        assert_eq!(e.counts(), &[3, 8]);
        assert!(CountMatrix::expected(&[-0.1, 1.1], 10, 1, 2).is_err());
        assert_eq!(CountMatrix::from_vec(vec![0, 0]).frequencies(), vec![0.0, 0.0]);
    }
}

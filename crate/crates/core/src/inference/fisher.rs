//! Fisher information, closed-form branch sums and Cramér-Rao bounds.
//!
//! All information is quoted per photon with respect to the total
//! separation `delta = 2d`.

use crate::error::{Error, Result};
use crate::model::{ForwardModel, PROBABILITY_FLOOR};
use crate::source::{coefficient_ratio, schmidt_coeff};

/// Smallest `|d|` at which [`model_fisher`] evaluates; the probabilities
/// are even in `d`, so a central difference at 0 is identically zero.
pub const DEFAULT_FI_EVAL_FLOOR: f64 = 1e-3;

/// The parameter an information value refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameterization {
    /// Total separation `delta = 2d`.
    TotalSeparation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherReport {
    /// Per-outcome information; zero for skipped outcomes.
    pub contributions: Vec<f64>,
    pub total: f64,
    /// Outcomes with probability below the floor, left out of the sum.
    pub skipped: Vec<usize>,
    pub parameterization: Parameterization,
}

/// Default central-difference step in `d`.
pub fn default_step(d: f64) -> f64 {
    1e-4 * d.abs().max(1e-2)
}

/// `Σ_j (1/P_j) (∂P_j/∂delta)²` by central differences with step `step` in `d`.
///
/// `prob_fn` need not be normalized; a single projection is allowed.
pub fn fisher_numeric<F>(prob_fn: F, d: f64, step: f64) -> Result<FisherReport>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    let center = prob_fn(d)?;
    let up = prob_fn(d + step)?;
    let down = prob_fn(d - step)?;
    if up.len() != center.len() || down.len() != center.len() {
        return Err(Error::ShapeMismatch {
            expected: center.len(),
            actual: up.len().min(down.len()),
        });
    }
    let mut contributions = Vec::with_capacity(center.len());
    let mut skipped = Vec::new();
    for (j, ((&p, &pu), &pd)) in center.iter().zip(&up).zip(&down).enumerate() {
        if p < PROBABILITY_FLOOR {
            skipped.push(j);
            contributions.push(0.0);
            continue;
        }
        // dP/d(delta) = dP/dd / 2
        let deriv = (pu - pd) / (2.0 * step) / 2.0;
        if !deriv.is_finite() {
            return Err(Error::Numerical(format!("non-finite derivative at outcome {j}")));
        }
        contributions.push(deriv * deriv / p);
    }
    let total = contributions.iter().sum();
    Ok(FisherReport {
        contributions,
        total,
        skipped,
        parameterization: Parameterization::TotalSeparation,
    })
}

/// Numeric information of a forward model at `max(|d|, DEFAULT_FI_EVAL_FLOOR)`.
pub fn model_fisher(model: &dyn ForwardModel, d: f64) -> Result<FisherReport> {
    let at = d.abs().max(DEFAULT_FI_EVAL_FLOOR);
    fisher_numeric(|x| model.probabilities(x), at, default_step(at))
}

/// Which neighbour of the idler mode the signal projection sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `k' = k`: information vanishes as `d → 0`.
    Diag,
    /// `k' = k + 1`.
    Up,
    /// `k' = k - 1`.
    Down,
}

/// Small-separation limit of one projection's information.
pub fn fi_closed_form(k: usize, l: usize, gamma: f64, branch: Branch) -> f64 {
    match branch {
        Branch::Diag => 0.0,
        Branch::Up => (k as f64 + 1.0) / 2.0 * schmidt_coeff(k + 1, l, gamma).powi(2),
        Branch::Down if k == 0 => 0.0,
        Branch::Down => k as f64 / 2.0 * schmidt_coeff(k - 1, l, gamma).powi(2),
    }
}

/// Branch subtotals of the summed small-separation information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiTotals {
    pub up: f64,
    pub down: f64,
}

impl FiTotals {
    pub fn total(&self) -> f64 {
        self.up + self.down
    }
}

/// Sum over `k` at `l = 0`: `½ + ½((1-γ)/(1+γ))²`.
pub fn fi_total_1d(gamma: f64) -> FiTotals {
    let r = coefficient_ratio(gamma);
    FiTotals {
        up: 0.5 * r * r,
        down: 0.5,
    }
}

/// Sum over all `k, l`: `(γ + 1/γ)/4 = √K/2`.
pub fn fi_total_2d(gamma: f64) -> FiTotals {
    FiTotals {
        up: (1.0 - gamma).powi(2) / (8.0 * gamma),
        down: (1.0 + gamma).powi(2) / (8.0 * gamma),
    }
}

/// Variance bound `2/(n√K)` on the total separation.
pub fn crlb(schmidt_number: f64, n_photons: f64) -> f64 {
    2.0 / (n_photons * schmidt_number.sqrt())
}

/// Probability of the first-order mode for a separable Gaussian source:
/// `½ d² e^(-d²/2)`.
pub fn gaussian_hg1_prob(d: f64) -> f64 {
    0.5 * d * d * (-0.5 * d * d).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{coincidence_prob, prob_matrix, ModeSpace};
    use crate::source::{schmidt_number, SchmidtModel};
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_first_mode_limit() {
        let report =
            fisher_numeric(|d| Ok(vec![gaussian_hg1_prob(d)]), 1e-3, default_step(1e-3)).unwrap();
        assert!((report.total - 0.5).abs() < 1e-3, "{}", report.total);
        assert_eq!(report.parameterization, Parameterization::TotalSeparation);
    }

    #[test]
    fn diagonal_projection_vanishes() {
        let model = SchmidtModel::new(0.15).unwrap();
        for k in 0..4 {
            let f = |d: f64| Ok(vec![coincidence_prob(k, 0, k, 0, d, &model)]);
            let report = fisher_numeric(f, 1e-3, default_step(1e-3)).unwrap();
            assert!(report.total < 1e-4);
        }
    }

    #[test]
    fn numeric_matches_neighbour_sums() {
        let model = SchmidtModel::new(0.15).unwrap();
        let space = ModeSpace::default();
        // neighbour branches that fit inside the 7×7 space
        let closed: f64 = (0..7)
            .map(|k| {
                let up = if k < 6 { fi_closed_form(k, 0, 0.15, Branch::Up) } else { 0.0 };
                up + fi_closed_form(k, 0, 0.15, Branch::Down)
            })
            .sum();
        let f = |d: f64| Ok(prob_matrix(d, &space, &model, false)?.into_entries());
        let near = fisher_numeric(f, 1e-3, default_step(1e-3)).unwrap();
        assert!((near.total - closed).abs() / closed < 1e-3);
        let at = fisher_numeric(f, 0.05, default_step(0.05)).unwrap();
        assert!((at.total - closed).abs() / closed < 1e-4, "{} vs {}", at.total, closed);
    }

    #[test]
    fn skipped_outcomes_reported() {
        let report = fisher_numeric(|_| Ok(vec![0.5, 0.0, 0.5]), 0.2, 1e-4).unwrap();
        assert_eq!(report.skipped, vec![1]);
        assert_eq!(report.contributions.len(), 3);
        assert!(fisher_numeric(|_| Ok(vec![f64::NAN]), 0.2, 0.0).is_err());
        let bad = fisher_numeric(
            |d| Ok(vec![if d > 0.2 { f64::INFINITY } else { 0.5 }]),
            0.2,
            1e-3,
        );
        assert!(matches!(bad, Err(Error::Numerical(_))));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(fi_closed_form(0, 0, 0.15, Branch::Down), 0.0);
        let up = fi_closed_form(0, 0, 0.15, Branch::Up);
        let c00 = schmidt_coeff(0, 0, 0.15).powi(2);
        let q = coefficient_ratio(0.15).powi(2);
        assert_relative_eq!(up, 0.5 * c00 * q, max_relative = 1e-14);
        assert!((up - 0.0562).abs() < 1e-4);
        assert!((c00 - 0.2058).abs() < 1e-4 && (q - 0.5463).abs() < 1e-4);
        // signal HG1 against idler HG0: down branch at k = 1
        assert_relative_eq!(fi_closed_form(1, 0, 0.15, Branch::Down), 0.5 * c00, max_relative = 1e-14);
        assert_eq!(fi_closed_form(3, 2, 0.15, Branch::Diag), 0.0);
    }

    #[test]
    fn one_dimensional_totals() {
        assert_eq!(fi_total_1d(1.0).total(), 0.5);
        let t = fi_total_1d(0.15);
        assert!((t.up - 0.27).abs() < 0.005);
        let (mut up, mut down) = (0.0, 0.0);
        for k in 0..=200 {
            up += fi_closed_form(k, 0, 0.15, Branch::Up);
            down += fi_closed_form(k, 0, 0.15, Branch::Down);
        }
        assert!((up - t.up).abs() < 1e-10);
        assert!((down - t.down).abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_totals() {
        let t = fi_total_2d(0.15);
        assert!((t.up - 0.60).abs() < 0.005 && (t.down - 1.10).abs() < 0.005);
        assert_relative_eq!(fi_total_2d(1.0).total(), 0.5, max_relative = 1e-15);
        for &g in &[0.05, 0.15, 0.5, 1.0, 2.0] {
            let mut brute = 0.0;
            for k in 0..=300 {
                for l in 0..=300 {
                    brute += fi_closed_form(k, l, g, Branch::Up) + fi_closed_form(k, l, g, Branch::Down);
                }
            }
            assert!((brute - fi_total_2d(g).total()).abs() < 1e-8, "gamma {g}");
            assert!((fi_total_2d(g).total() - schmidt_number(g).sqrt() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fi_total_bounded_below() {
        for i in 1..200 {
            let g = 0.025 * i as f64;
            let t = fi_total_2d(g).total();
            assert!(t >= 0.5 - 1e-15);
            if (g - 1.0).abs() > 1e-9 {
                assert!(t > 0.5);
            }
            assert!((t - fi_total_2d(1.0 / g).total()).abs() < 1e-12 * t);
        }
    }

    #[test]
    fn crlb_values() {
        assert_eq!(crlb(1.0, 1.0), 2.0);
        assert!((crlb(11.6, 1.0) - 0.587).abs() < 1e-3);
        assert_relative_eq!(crlb(11.6, 2.0), crlb(11.6, 1.0) / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn gaussian_hg1_values() {
        assert_eq!(gaussian_hg1_prob(0.0), 0.0);
        assert_relative_eq!(gaussian_hg1_prob(1.0), (-0.5f64).exp() / 2.0, max_relative = 1e-15);
        assert!((gaussian_hg1_prob(1.0) - 0.3033).abs() < 1e-4);
        let separable = SchmidtModel::new(1.0).unwrap();
        for &d in &[0.01, 0.3, 1.0, 2.0] {
            let via_overlaps = coincidence_prob(1, 0, 0, 0, d, &separable);
            assert!((via_overlaps - gaussian_hg1_prob(d)).abs() < 1e-12);
        }
    }
}

//! Maximum-likelihood estimation of the per-arm shift.

use crate::error::{invalid, Error, Result};
use crate::inference::fisher::model_fisher;
use crate::inference::CountMatrix;
use crate::model::{ForwardModel, PROBABILITY_FLOOR};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Search interval and refinement settings for [`mle_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBounds {
    pub lo: f64,
    pub hi: f64,
    pub grid_points: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 2.0,
            grid_points: 200,
            tol: 1e-5,
            max_iter: 200,
        }
    }
}

impl SearchBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let b = Self { lo, hi, ..Self::default() };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo >= 0.0 && self.lo < self.hi) {
            return Err(invalid(format!("bad search interval [{}, {}]", self.lo, self.hi)));
        }
        if self.grid_points < 2 {
            return Err(invalid("need at least two grid points"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    /// Per-arm shift.
    pub d_hat: f64,
    /// Total separation `2 d_hat`.
    pub delta_hat: f64,
    pub log_likelihood: f64,
    /// `1/(N F)` for the total separation, with `F` evaluated at the estimate.
    pub crlb_variance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub boundary_hit: bool,
    pub flat: bool,
}

/// `Σ n_j ln P_j` over outcomes with nonzero counts.
pub fn log_likelihood(counts: &[u64], probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(probs)
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &p)| n as f64 * p.max(PROBABILITY_FLOOR).ln())
        .sum()
}

/// Grid scan followed by golden-section refinement around the best node.
pub fn mle_estimate(
    counts: &CountMatrix,
    model: &dyn ForwardModel,
    bounds: &SearchBounds,
) -> Result<EstimationResult> {
    bounds.validate()?;
    if counts.len() != model.outcome_count() {
        return Err(Error::ShapeMismatch {
            expected: model.outcome_count(),
            actual: counts.len(),
        });
    }
    let data = counts.counts();
    let ll = |d: f64| -> Result<f64> {
        let v = log_likelihood(data, &model.probabilities(d)?);
        if v.is_nan() {
            return Err(Error::Numerical(format!("log-likelihood is NaN at d = {d}")));
        }
        Ok(v)
    };

    let g = bounds.grid_points;
    let step = (bounds.hi - bounds.lo) / (g - 1) as f64;
    let mut best = (bounds.lo, f64::NEG_INFINITY);
    let mut best_i = 0;
    let mut worst = f64::INFINITY;
    for i in 0..g {
        let x = if i == g - 1 { bounds.hi } else { bounds.lo + step * i as f64 };
        let v = ll(x)?;
        worst = worst.min(v);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let flat = best.1 - worst <= 1e-12 * best.1.abs().max(1.0);

    let mut a = bounds.lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (bounds.lo + step * (best_i + 1) as f64).min(bounds.hi);
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let (mut fc, mut fe) = (ll(c)?, ll(e)?);
    let mut iterations = 0;
    while b - a > bounds.tol && iterations < bounds.max_iter {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - INV_PHI * (b - a);
            fc = ll(c)?;
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + INV_PHI * (b - a);
            fe = ll(e)?;
        }
        iterations += 1;
    }
    let converged = b - a <= bounds.tol;
    let mid = 0.5 * (a + b);
    for (x, v) in [(c, fc), (e, fe), (mid, ll(mid)?)] {
        if v > best.1 {
            best = (x, v);
        }
    }
    let (d_hat, log_likelihood) = best;
    let boundary_hit = d_hat - bounds.lo <= bounds.tol || bounds.hi - d_hat <= bounds.tol;

    let n = counts.total() as f64;
    let fi = model_fisher(model, d_hat)?.total;
    let crlb_variance = if n > 0.0 && fi > 0.0 { 1.0 / (n * fi) } else { f64::INFINITY };

    Ok(EstimationResult {
        d_hat,
        delta_hat: 2.0 * d_hat,
        log_likelihood,
        crlb_variance,
        iterations,
        converged,
        boundary_hit,
        flat,
    })
}

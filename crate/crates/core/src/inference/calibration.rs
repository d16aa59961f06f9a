//! Per-entry linear calibration fitted from labeled data.

use crate::error::{invalid, Error, Result};
use crate::inference::CountMatrix;
use crate::model::{CalibrationModel, SpadeModel};

const DEGENERATE_VARIANCE: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFit {
    pub model: CalibrationModel,
    /// Entries whose theory value did not vary across the datasets; these get
    /// `alpha = 1` and an offset equal to the mean residual.
    pub rank_deficient: Vec<usize>,
}

/// Least-squares `n/N ≈ alpha P + beta` per entry, against the renormalized,
/// uncalibrated theory of `spade`.
///
/// Only the ratios of `alpha` and `beta` to the calibrated total are
/// identifiable, so the fit recovers them in that normalization.
pub fn fit_calibration(datasets: &[(f64, CountMatrix)], spade: &SpadeModel) -> Result<CalibrationFit> {
    let len = spade.space().len();
    let mut seps: Vec<f64> = datasets.iter().map(|(d, _)| *d).collect();
    seps.sort_by(f64::total_cmp);
    seps.dedup();
    if seps.len() < 2 {
        return Err(invalid("calibration needs at least two distinct separations"));
    }

    let mut xs = Vec::with_capacity(datasets.len());
    let mut ys = Vec::with_capacity(datasets.len());
    for (d, counts) in datasets {
        if counts.len() != len {
            return Err(Error::ShapeMismatch { expected: len, actual: counts.len() });
        }
        if counts.total() == 0 {
            return Err(invalid(format!("dataset at d = {d} has no counts")));
        }
        xs.push(spade.theory(*d)?.into_entries());
        ys.push(counts.frequencies());
    }

    let m = datasets.len() as f64;
    let mut alpha = vec![0.0; len];
    let mut beta = vec![0.0; len];
    let mut rank_deficient = Vec::new();
    for j in 0..len {
        let x_mean = xs.iter().map(|x| x[j]).sum::<f64>() / m;
        let y_mean = ys.iter().map(|y| y[j]).sum::<f64>() / m;
        let (mut sxx, mut sxy) = (0.0, 0.0);
        for (x, y) in xs.iter().zip(&ys) {
            sxx += (x[j] - x_mean).powi(2);
            sxy += (x[j] - x_mean) * (y[j] - y_mean);
        }
        if sxx <= DEGENERATE_VARIANCE {
            rank_deficient.push(j);
            alpha[j] = 1.0;
            beta[j] = (y_mean - x_mean).clamp(0.0, 1.0);
        } else {
            let a = (sxy / sxx).max(0.0);
            alpha[j] = a;
            beta[j] = (y_mean - a * x_mean).clamp(0.0, 1.0);
        }
    }
    Ok(CalibrationFit {
        model: CalibrationModel::new(alpha, beta)?,
        rank_deficient,
    })
}

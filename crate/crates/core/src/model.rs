//! Forward probability models.
//!
//! * Coincidence probabilities for joint Hermite-Gauss projections of the
//!   idler `(k, l)` and signal `(k', l')` photons:
//!   `P = ½ C²_{k',l} δ_{l,l'} Σ± |⟨k|k'±⟩|²`.
//! * Their second-order expansion in the per-arm shift `d`.
//! * The affine calibration `P → αP + β` absorbing attenuation and
//!   background counts.
//! * Direct imaging on a pixel array, for a Gaussian PSF or the reduced
//!   single-photon state of the pair.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::overlap::{displaced_overlap, Sign};
use crate::source::SchmidtModel;
use crate::specfun::{hg1d_all, QuadratureRule};

/// Probabilities below this are floored inside log-likelihoods only.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

const DEGENERATE_SPACE_THRESHOLD: f64 = 1e-9;
const PIXEL_QUADRATURE_ORDER: usize = 10;

/// A 2D Hermite-Gauss mode label `(k, l)`: `k` along the displacement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModePair {
    pub k: usize,
    pub l: usize,
}

impl ModePair {
    pub const fn new(k: usize, l: usize) -> Self {
        Self { k, l }
    }
}

/// The set of joint projections: every idler mode against every signal mode.
///
/// Outcomes are laid out row-major, idler index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSpace {
    idler: Vec<ModePair>,
    signal: Vec<ModePair>,
}

impl ModeSpace {
    pub fn new(idler: Vec<ModePair>, signal: Vec<ModePair>) -> Result<Self> {
        if idler.is_empty() || signal.is_empty() {
            return Err(invalid("mode space must contain at least one idler and one signal mode"));
        }
        for (arm, modes) in [("idler", &idler), ("signal", &signal)] {
            let mut sorted = modes.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate {arm} mode in mode space")));
            }
        }
        Ok(Self { idler, signal })
    }

    /// All modes with `k ≤ max_k`, `l ≤ max_l` on both arms.
    pub fn grid(max_k: usize, max_l: usize) -> Self {
        let modes: Vec<ModePair> = (0..=max_l)
            .flat_map(|l| (0..=max_k).map(move |k| ModePair::new(k, l)))
            .collect();
        Self {
            idler: modes.clone(),
            signal: modes,
        }
    }

    pub fn idler(&self) -> &[ModePair] {
        &self.idler
    }

    pub fn signal(&self) -> &[ModePair] {
        &self.signal
    }

    pub fn rows(&self) -> usize {
        self.idler.len()
    }

    pub fn cols(&self) -> usize {
        self.signal.len()
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat outcome index of an (idler, signal) pair, if present.
    pub fn position(&self, idler: ModePair, signal: ModePair) -> Option<usize> {
        let i = self.idler.iter().position(|&m| m == idler)?;
        let j = self.signal.iter().position(|&m| m == signal)?;
        Some(i * self.cols() + j)
    }

    /// `(idler, signal)` for each flat outcome index, in layout order.
    pub fn outcomes(&self) -> impl Iterator<Item = (ModePair, ModePair)> + '_ {
        self.idler
            .iter()
            .flat_map(move |&i| self.signal.iter().map(move |&s| (i, s)))
    }
}

impl Default for ModeSpace {
    /// The 7×7 set `k, k' ∈ 0..=6`, `l = l' = 0`.
    fn default() -> Self {
        Self::grid(6, 0)
    }
}

/// Outcome probabilities over a [`ModeSpace`] at one separation.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    separation: f64,
    renormalized: bool,
}

impl ProbabilityMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// Per-arm shift `d` the matrix was evaluated at.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn is_renormalized(&self) -> bool {
        self.renormalized
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }

    /// Sum of entries with row index ≠ column index.
    pub fn off_diagonal_mass(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self.get(i, j);
                }
            }
        }
        acc
    }
}

/// `½ C²_{k',l} δ_{l,l'} (|⟨k|k'+⟩|² + |⟨k|k'-⟩|²)`.
pub fn coincidence_prob(
    k: usize,
    l: usize,
    k_signal: usize,
    l_signal: usize,
    d: f64,
    model: &SchmidtModel,
) -> f64 {
    if l != l_signal {
        return 0.0;
    }
    let c2 = model.coeff_sq(k_signal, l);
    if c2 == 0.0 {
        return 0.0;
    }
    let sum: f64 = Sign::BOTH
        .iter()
        .map(|&s| displaced_overlap(k, k_signal, d, s).powi(2))
        .sum();
    0.5 * c2 * sum
}

/// Second-order expansion of [`coincidence_prob`] in `d`.
pub fn small_sep_prob(
    k: usize,
    l: usize,
    k_signal: usize,
    l_signal: usize,
    d: f64,
    model: &SchmidtModel,
) -> f64 {
    if l != l_signal {
        return 0.0;
    }
    let c2 = model.coeff_sq(k_signal, l);
    let d2 = d * d;
    let kp = k_signal as f64;
    let bracket = if k == k_signal {
        1.0 - d2 * (2.0 * kp + 1.0) / 2.0
    } else if k + 1 == k_signal {
        d2 * kp / 2.0
    } else if k == k_signal + 1 {
        d2 * (kp + 1.0) / 2.0
    } else {
        0.0
    };
    c2 * bracket
}

/// Fill a [`ProbabilityMatrix`] over `space` at per-arm shift `d`.
///
/// With `renormalize`, entries are conditioned on detection inside the space.
pub fn prob_matrix(
    d: f64,
    space: &ModeSpace,
    model: &SchmidtModel,
    renormalize: bool,
) -> Result<ProbabilityMatrix> {
    if !d.is_finite() {
        return Err(invalid(format!("separation must be finite, got {d}")));
    }
    let mut entries: Vec<f64> = space
        .outcomes()
        .map(|(i, s)| coincidence_prob(i.k, i.l, s.k, s.l, d, model))
        .collect();
    if renormalize {
        let total: f64 = entries.iter().sum();
        if total < DEGENERATE_SPACE_THRESHOLD {
            return Err(Error::DegenerateSpace(total));
        }
        entries.iter_mut().for_each(|p| *p /= total);
    }
    Ok(ProbabilityMatrix {
        rows: space.rows(),
        cols: space.cols(),
        entries,
        separation: d,
        renormalized: renormalize,
    })
}

/// Per-outcome affine correction `αP + β`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl CalibrationModel {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::ShapeMismatch {
                expected: alpha.len(),
                actual: beta.len(),
            });
        }
        if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid("calibration scales must be finite and >= 0"));
        }
        if beta.iter().any(|b| !(b.is_finite() && (0.0..=1.0).contains(b))) {
            return Err(invalid("calibration offsets must lie in [0, 1]"));
        }
        Ok(Self { alpha, beta })
    }

    pub fn identity(len: usize) -> Self {
        Self::uniform(len, 1.0, 0.0)
    }

    pub fn uniform(len: usize, alpha: f64, beta: f64) -> Self {
        Self {
            alpha: vec![alpha; len],
            beta: vec![beta; len],
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Map a probability vector and renormalize; negatives floored at 0.
    pub fn apply_to(&self, probs: &[f64]) -> Result<Vec<f64>> {
        if probs.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                actual: probs.len(),
            });
        }
        let mut out: Vec<f64> = probs
            .iter()
            .zip(self.alpha.iter().zip(&self.beta))
            .map(|(p, (a, b))| (a * p + b).max(0.0))
            .collect();
        let total: f64 = out.iter().sum();
        if total <= 0.0 {
            return Err(Error::CalibrationCollapse);
        }
        out.iter_mut().for_each(|p| *p /= total);
        Ok(out)
    }
}

pub fn apply_calibration(p: &ProbabilityMatrix, cal: &CalibrationModel) -> Result<ProbabilityMatrix> {
    Ok(ProbabilityMatrix {
        rows: p.rows,
        cols: p.cols,
        entries: cal.apply_to(&p.entries)?,
        separation: p.separation,
        renormalized: true,
    })
}

/// Point spread function seen by a direct-imaging camera.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PsfKind {
    /// A single Gaussian mode with the Schmidt waist.
    Gaussian,
    /// The reduced single-photon state of the pair (signal arm marginal).
    Spdc,
}

/// Image-plane intensity density of the two incoherent shifted copies.
pub fn marginal_intensity(x: f64, d: f64, model: &SchmidtModel, kind: PsfKind) -> f64 {
    let mut buf = Vec::new();
    marginal_intensity_with(x, d, model, kind, &mut buf)
}

fn marginal_intensity_with(
    x: f64,
    d: f64,
    model: &SchmidtModel,
    kind: PsfKind,
    buf: &mut Vec<f64>,
) -> f64 {
    match kind {
        PsfKind::Gaussian => {
            let g = |u: f64| (-u * u).exp() / PI.sqrt();
            0.5 * (g(x - d) + g(x + d))
        }
        PsfKind::Spdc => {
            let max_m = model.max_m();
            // weights truncated at the model order and renormalized
            let captured = 1.0 - model.q().powi(max_m as i32 + 1);
            let mut acc = 0.0;
            for shift in [x - d, x + d] {
                hg1d_all(max_m, shift, buf);
                acc += buf
                    .iter()
                    .enumerate()
                    .map(|(m, a)| model.reduced_weight(m) * a * a)
                    .sum::<f64>();
            }
            0.5 * acc / captured
        }
    }
}

/// Uniform pixel array on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelGrid {
    pixels: usize,
    lo: f64,
    hi: f64,
}

impl PixelGrid {
    pub fn new(pixels: usize, lo: f64, hi: f64) -> Result<Self> {
        if pixels == 0 {
            return Err(invalid("pixel grid needs at least one pixel"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!("invalid pixel span [{lo}, {hi}]")));
        }
        Ok(Self { pixels, lo, hi })
    }

    pub fn pixels(&self) -> usize {
        self.pixels
    }

    pub fn span(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.pixels as f64
    }

    pub fn edges(&self) -> Vec<f64> {
        let w = self.width();
        (0..=self.pixels)
            .map(|i| if i == self.pixels { self.hi } else { self.lo + w * i as f64 })
            .collect()
    }

    /// Pixels plus the out-of-span residual bucket.
    pub fn outcome_count(&self) -> usize {
        self.pixels + 1
    }
}

impl Default for PixelGrid {
    /// 50 pixels on `[-4, 4]`.
    fn default() -> Self {
        Self {
            pixels: 50,
            lo: -4.0,
            hi: 4.0,
        }
    }
}

fn pixel_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| {
        QuadratureRule::gauss_legendre(PIXEL_QUADRATURE_ORDER).expect("fixed quadrature order")
    })
}

/// Bin probabilities of the image plus a trailing residual bucket; sums to 1.
pub fn pixel_probs(d: f64, grid: &PixelGrid, model: &SchmidtModel, kind: PsfKind) -> Vec<f64> {
    let rule = pixel_rule();
    let edges = grid.edges();
    let mut buf = Vec::with_capacity(model.max_m() + 1);
    let mut out: Vec<f64> = edges
        .windows(2)
        .map(|e| {
            rule.integrate_interval(e[0], e[1], |x| {
                marginal_intensity_with(x, d, model, kind, &mut buf)
            })
        })
        .collect();
    let inside: f64 = out.iter().sum();
    if inside > 1.0 {
        out.iter_mut().for_each(|p| *p /= inside);
        out.push(0.0);
    } else {
        out.push(1.0 - inside);
    }
    out
}

/// A separation-dependent outcome distribution the estimator can fit.
pub trait ForwardModel: Send + Sync {
    fn outcome_count(&self) -> usize;

    /// Outcome probabilities at per-arm shift `d`; sums to 1.
    fn probabilities(&self, d: f64) -> Result<Vec<f64>>;
}

/// Coincidence counting over a mode space, optionally calibrated.
#[derive(Debug, Clone)]
pub struct SpadeModel {
    schmidt: SchmidtModel,
    space: ModeSpace,
    calibration: Option<CalibrationModel>,
}

impl SpadeModel {
    pub fn new(schmidt: SchmidtModel, space: ModeSpace) -> Self {
        Self {
            schmidt,
            space,
            calibration: None,
        }
    }

    pub fn with_calibration(mut self, cal: CalibrationModel) -> Result<Self> {
        if cal.len() != self.space.len() {
            return Err(Error::ShapeMismatch {
                expected: self.space.len(),
                actual: cal.len(),
            });
        }
        self.calibration = Some(cal);
        Ok(self)
    }

    pub fn schmidt(&self) -> &SchmidtModel {
        &self.schmidt
    }

    pub fn space(&self) -> &ModeSpace {
        &self.space
    }

    pub fn calibration(&self) -> Option<&CalibrationModel> {
        self.calibration.as_ref()
    }

    /// Renormalized theoretical matrix, ignoring any calibration.
    pub fn theory(&self, d: f64) -> Result<ProbabilityMatrix> {
        prob_matrix(d, &self.space, &self.schmidt, true)
    }
}

impl ForwardModel for SpadeModel {
    fn outcome_count(&self) -> usize {
        self.space.len()
    }

    fn probabilities(&self, d: f64) -> Result<Vec<f64>> {
        let p = self.theory(d)?;
        match &self.calibration {
            Some(cal) => cal.apply_to(p.entries()),
            None => Ok(p.into_entries()),
        }
    }
}

/// Direct imaging on a pixel array.
#[derive(Debug, Clone)]
pub struct DirectImagingModel {
    schmidt: SchmidtModel,
    grid: PixelGrid,
    kind: PsfKind,
}

impl DirectImagingModel {
    pub fn new(schmidt: SchmidtModel, grid: PixelGrid, kind: PsfKind) -> Self {
        Self { schmidt, grid, kind }
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn kind(&self) -> PsfKind {
        self.kind
    }
}

impl ForwardModel for DirectImagingModel {
    fn outcome_count(&self) -> usize {
        self.grid.outcome_count()
    }

    fn probabilities(&self, d: f64) -> Result<Vec<f64>> {
        if !d.is_finite() {
            return Err(invalid(format!("separation must be finite, got {d}")));
        }
        Ok(pixel_probs(d, &self.grid, &self.schmidt, self.kind))
    }
}

//! Source model: the Hermite-Gauss Schmidt decomposition of a down-converted
//! photon pair.
//!
//! The pair state is `Σ C_mn |m,n⟩_s |m,n⟩_i` with
//!
//! ```text
//! C_mn = 4γ/(1+γ)² · |(1-γ)/(1+γ)|^(m+n)
//! ```
//!
//! Everything downstream depends on γ alone. Physical lengths enter only
//! through [`gamma_from_physical`] and the unit helpers at the bottom.

use crate::error::{invalid, Error, Result};

/// Default hard cap on the symmetric truncation order.
pub const DEFAULT_TRUNCATION_CAP: usize = 2000;

/// Default captured-mass deficit used by [`SchmidtModel::new`].
pub const DEFAULT_MASS_DEFICIT: f64 = 1e-12;

/// Physical source parameters, all in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    pub pump_waist: f64,
    pub crystal_length: f64,
    pub pump_wavelength: f64,
    /// Projection waist; only needed to convert separations to lengths.
    pub schmidt_waist: Option<f64>,
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("pump_waist", self.pump_waist),
            ("crystal_length", self.crystal_length),
            ("pump_wavelength", self.pump_wavelength),
            ("schmidt_waist", self.schmidt_waist.unwrap_or(1.0)),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// `γ = (1/σ_p) √(L λ_p / 2π)`.
pub fn gamma_from_physical(params: &SourceParams) -> Result<f64> {
    params.validate()?;
    Ok((params.crystal_length * params.pump_wavelength / (2.0 * std::f64::consts::PI)).sqrt()
        / params.pump_waist)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(invalid(format!("gamma must be positive and finite, got {gamma}")));
    }
    Ok(())
}

/// Geometric ratio `|(1-γ)/(1+γ)|` of successive Schmidt coefficients.
pub fn coefficient_ratio(gamma: f64) -> f64 {
    ((1.0 - gamma) / (1.0 + gamma)).abs()
}

/// Schmidt coefficient `C_mn`, evaluated in log-space.
pub fn schmidt_coeff(m: usize, n: usize, gamma: f64) -> f64 {
    let lead = 4.0 * gamma / ((1.0 + gamma) * (1.0 + gamma));
    let order = m + n;
    if order == 0 {
        return lead;
    }
    let r = coefficient_ratio(gamma);
    if r == 0.0 {
        return 0.0;
    }
    (lead.ln() + order as f64 * r.ln()).exp()
}

/// Schmidt number `K = (γ + 1/γ)² / 4`.
pub fn schmidt_number(gamma: f64) -> f64 {
    let s = gamma + 1.0 / gamma;
    0.25 * s * s
}

/// The `γ ≤ 1` root of `schmidt_number(γ) = K`.
pub fn gamma_from_schmidt_number(k: f64) -> Result<f64> {
    if !(k.is_finite() && k >= 1.0) {
        return Err(invalid(format!("Schmidt number must be >= 1, got {k}")));
    }
    // γ + 1/γ = 2√K
    Ok(k.sqrt() - (k - 1.0).sqrt())
}

/// Mass `Σ_{m,n ≤ M} C_mn²` captured by the symmetric truncation `M`.
pub fn captured_mass(gamma: f64, max_order: usize) -> f64 {
    let q = coefficient_ratio(gamma).powi(2);
    let tail = q.powi(max_order as i32 + 1);
    (1.0 - tail) * (1.0 - tail)
}

/// Smallest symmetric truncation `(M, M)` capturing at least `1 - ε`.
pub fn choose_truncation(gamma: f64, mass_deficit: f64) -> Result<(usize, usize)> {
    choose_truncation_with_cap(gamma, mass_deficit, DEFAULT_TRUNCATION_CAP)
}

pub fn choose_truncation_with_cap(
    gamma: f64,
    mass_deficit: f64,
    cap: usize,
) -> Result<(usize, usize)> {
    check_gamma(gamma)?;
    if !(mass_deficit > 0.0 && mass_deficit < 1.0) {
        return Err(invalid(format!("mass deficit must lie in (0, 1), got {mass_deficit}")));
    }
    for order in 0..=cap {
        if captured_mass(gamma, order) >= 1.0 - mass_deficit {
            return Ok((order, order));
        }
    }
    Err(Error::TruncationCap { gamma, cap })
}

/// An immutable Schmidt decomposition with its truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtModel {
    gamma: f64,
    q: f64,
    max_m: usize,
    max_l: usize,
    mass_deficit: f64,
}

impl SchmidtModel {
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_mass_deficit(gamma, DEFAULT_MASS_DEFICIT)
    }

    pub fn with_mass_deficit(gamma: f64, mass_deficit: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let (max_m, max_l) = choose_truncation(gamma, mass_deficit)?;
        Ok(Self {
            gamma,
            q: coefficient_ratio(gamma).powi(2),
            max_m,
            max_l,
            mass_deficit,
        })
    }

    pub fn from_physical(params: &SourceParams) -> Result<Self> {
        Self::new(gamma_from_physical(params)?)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `((1-γ)/(1+γ))²`, the ratio of successive squared coefficients.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn max_m(&self) -> usize {
        self.max_m
    }

    pub fn max_l(&self) -> usize {
        self.max_l
    }

    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }

    pub fn coeff(&self, m: usize, n: usize) -> f64 {
        schmidt_coeff(m, n, self.gamma)
    }

    pub fn coeff_sq(&self, m: usize, n: usize) -> f64 {
        let c = self.coeff(m, n);
        c * c
    }

    pub fn schmidt_number(&self) -> f64 {
        schmidt_number(self.gamma)
    }

    /// Weight of mode `m` in the reduced single-photon state, `Σ_n C_mn²`.
    pub fn reduced_weight(&self, m: usize) -> f64 {
        (1.0 - self.q) * self.q.powi(m as i32)
    }
}

/// Convert a physical transverse length to adimensional units, `√2 x / σ_s`.
pub fn to_adimensional(length: f64, schmidt_waist: f64) -> f64 {
    std::f64::consts::SQRT_2 * length / schmidt_waist
}

/// Inverse of [`to_adimensional`].
pub fn to_physical(adimensional: f64, schmidt_waist: f64) -> f64 {
    adimensional * schmidt_waist / std::f64::consts::SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(pump_waist_um: f64, crystal_mm: f64, lambda_nm: f64) -> SourceParams {
        SourceParams {
            pump_waist: pump_waist_um * 1e-6,
            crystal_length: crystal_mm * 1e-3,
            pump_wavelength: lambda_nm * 1e-9,
            schmidt_waist: Some(100e-6),
        }
    }

    #[test]
    fn gamma_for_experimental_settings() {
        let g = gamma_from_physical(&params(40.0, 0.5, 405.0)).unwrap();
        assert!((g - 0.142).abs() < 1e-3, "gamma = {g}");
    }

    #[test]
    fn gamma_vanishes_for_wide_pump() {
        let g = gamma_from_physical(&params(1e6, 0.5, 405.0)).unwrap();
        assert!(g < 1e-3);
    }

    #[test]
    fn gamma_hand_evaluation() {
        // √(1e-3 · 405e-9 / 2π) / 20e-6, evaluated by calculator: 0.40142792613...
        let g = gamma_from_physical(&params(20.0, 1.0, 405.0)).unwrap();
        assert_relative_eq!(g, 0.401_427_926_134_373_5, max_relative = 1e-12);
    }

    #[test]
    fn physical_params_rejected_when_non_positive() {
        let mut p = params(40.0, 0.5, 405.0);
        p.crystal_length = 0.0;
        assert!(gamma_from_physical(&p).is_err());
        p.crystal_length = 1e-3;
        p.schmidt_waist = Some(-1.0);
        assert!(gamma_from_physical(&p).is_err());
    }

    #[test]
    fn separable_source_has_single_coefficient() {
        for m in 0..5 {
            for n in 0..5 {
                let expect = if m == 0 && n == 0 { 1.0 } else { 0.0 };
                assert_eq!(schmidt_coeff(m, n, 1.0), expect);
            }
        }
    }

    #[test]
    fn coefficients_are_normalized() {
        let mut total = 0.0;
        for m in 0..=200 {
            for n in 0..=200 {
                total += schmidt_coeff(m, n, 0.15).powi(2);
            }
        }
        assert!((total - 1.0).abs() < 1e-10, "Σ C² = {total}");
    }

    #[test]
    fn leading_coefficient() {
        assert_relative_eq!(schmidt_coeff(0, 0, 0.15), 0.6 / 1.3225, max_relative = 1e-14);
        assert!((schmidt_coeff(0, 0, 0.15) - 0.4537).abs() < 1e-4);
    }

    #[test]
    fn schmidt_number_values() {
        assert_eq!(schmidt_number(1.0), 1.0);
        assert!((schmidt_number(0.15) - 11.62).abs() < 0.005);
        // purity route: K = 1 / Σ C⁴
        for &g in &[0.15, 0.5, 2.0] {
            let mut purity = 0.0;
            for m in 0..=300 {
                for n in 0..=300 {
                    purity += schmidt_coeff(m, n, g).powi(4);
                }
            }
            assert_relative_eq!(schmidt_number(g), 1.0 / purity, max_relative = 1e-8);
        }
    }

    #[test]
    fn gamma_inverts_schmidt_number() {
        for &g in &[0.01, 0.15, 0.5, 1.0] {
            let back = gamma_from_schmidt_number(schmidt_number(g)).unwrap();
            assert_relative_eq!(back, g, max_relative = 1e-9);
        }
        assert!(gamma_from_schmidt_number(0.5).is_err());
    }

    // scan truncations and sum C² directly
    fn brute_truncation(gamma: f64, eps: f64) -> usize {
        let mut order = 0;
        loop {
            let mut mass = 0.0;
            for m in 0..=order {
                for n in 0..=order {
                    mass += schmidt_coeff(m, n, gamma).powi(2);
                }
            }
            if mass >= 1.0 - eps {
                return order;
            }
            order += 1;
        }
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(choose_truncation(1.0, 1e-6).unwrap(), (0, 0));
        let m = brute_truncation(0.15, 1e-6);
        assert_eq!(choose_truncation(0.15, 1e-6).unwrap(), (m, m));
        assert_eq!(m, 23);
        let m = brute_truncation(0.5, 1e-3);
        assert_eq!(choose_truncation(0.5, 1e-3).unwrap(), (m, m));
        assert_eq!(m, 3);
    }

    #[test]
    fn truncation_cap_and_domain() {
        assert!(matches!(
            choose_truncation(1e-6, 1e-12),
            Err(Error::TruncationCap { .. })
        ));
        assert!(choose_truncation(0.5, 0.0).is_err());
        assert!(choose_truncation(0.5, 1.0).is_err());
        assert!(SchmidtModel::new(-0.2).is_err());
    }

    #[test]
    fn model_invariants() {
        let model = SchmidtModel::with_mass_deficit(0.15, 1e-9).unwrap();
        assert!(model.q() >= 0.0 && model.q() < 1.0);
        let mut mass = 0.0;
        for m in 0..=model.max_m() {
            for n in 0..=model.max_l() {
                mass += model.coeff_sq(m, n);
            }
        }
        assert!(mass >= 1.0 - 1e-9);
        let w: f64 = (0..=300).map(|m| model.reduced_weight(m)).sum();
        assert_relative_eq!(w, 1.0, max_relative = 1e-12);
        let direct: f64 = (0..=300).map(|n| model.coeff_sq(2, n)).sum();
        assert_relative_eq!(model.reduced_weight(2), direct, max_relative = 1e-12);
    }

    #[test]
    fn unit_round_trip() {
        let sigma = 150e-6;
        let x = 37e-6;
        assert_relative_eq!(to_physical(to_adimensional(x, sigma), sigma), x, max_relative = 1e-15);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn coeff_symmetric_and_monotone(g in 0.01f64..0.99, m in 0usize..60, n in 0usize..60) {
                prop_assert_eq!(schmidt_coeff(m, n, g), schmidt_coeff(n, m, g));
                prop_assert!(schmidt_coeff(m + 1, n, g) <= schmidt_coeff(m, n, g));
            }

            #[test]
            fn schmidt_number_inversion_symmetric(g in 0.001f64..1000.0) {
                let a = schmidt_number(g);
                let b = schmidt_number(1.0 / g);
                prop_assert!((a - b).abs() <= 1e-12 * a);
                prop_assert!(a >= 1.0);
            }

            #[test]
            fn captured_mass_monotone(g in 0.01f64..5.0, order in 0usize..200) {
                prop_assert!(captured_mass(g, order + 1) >= captured_mass(g, order));
            }
        }
    }
}

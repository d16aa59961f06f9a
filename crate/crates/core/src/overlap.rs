//! Overlaps between Hermite-Gauss modes and laterally displaced copies.
//!
//! `⟨m|n±⟩ = ∫ hg(m, x) hg(n, x ± d) dx`. For `n >= m`,
//!
//! ```text
//! ⟨m|n±⟩ = √(m!/n!) 2^((m-n)/2) (±d)^(n-m) e^(-d²/4) L_m^(n-m)(d²/2)
//! ```
//!
//! and `m > n` follows from the exchange `⟨m|n±⟩ = ⟨n|m∓⟩`.

use crate::error::{invalid, Result};
use crate::specfun::{laguerre_unchecked, ln_factorial};

/// Direction of the displaced copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Per-arm shift `d` of each incoherent component; total separation is `2d`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Displacement(f64);

impl Displacement {
    pub fn new(d: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(invalid(format!("displacement must be finite and >= 0, got {d}")));
        }
        Ok(Self(d))
    }

    pub fn from_total(delta: f64) -> Result<Self> {
        Self::new(0.5 * delta)
    }

    pub fn per_arm(self) -> f64 {
        self.0
    }

    pub fn total(self) -> f64 {
        2.0 * self.0
    }
}

/// Exact `⟨m|n±⟩` for a per-arm shift `d`.
///
/// Negative `d` is accepted and is equivalent to flipping `sign`.
pub fn displaced_overlap(m: usize, n: usize, d: f64, sign: Sign) -> f64 {
    overlap_signed(m, n, sign.factor() * d)
}

/// `∫ hg(m, x) hg(n, x + s) dx` for a signed shift `s`.
pub fn overlap_signed(m: usize, n: usize, s: f64) -> f64 {
    if m > n {
        return overlap_signed(n, m, -s);
    }
    let p = n - m;
    if s == 0.0 {
        return if p == 0 { 1.0 } else { 0.0 };
    }
    let half_sq = 0.5 * s * s;
    let lag = laguerre_unchecked(m, p as f64, half_sq);
    if lag == 0.0 {
        return 0.0;
    }
    let ln_mag = 0.5 * (ln_factorial(m as u64) - ln_factorial(n as u64))
        - 0.5 * p as f64 * std::f64::consts::LN_2
        + p as f64 * s.abs().ln()
        - 0.5 * half_sq
        + lag.abs().ln();
    let sign = if s < 0.0 && p % 2 == 1 { -1.0 } else { 1.0 };
    sign * lag.signum() * ln_mag.exp()
}

/// First-order expansion of `⟨m|n±⟩` in `d`.
///
/// Uses `|n⟩' = √(n/2)|n-1⟩ - √((n+1)/2)|n+1⟩`, so the only first-order
/// couplings are to `m = n ± 1`.
pub fn overlap_first_order(m: usize, n: usize, d: f64, sign: Sign) -> f64 {
    let diag = if m == n { 1.0 } else { 0.0 };
    let derivative = if m + 1 == n {
        (n as f64 / 2.0).sqrt()
    } else if m == n + 1 {
        -((n as f64 + 1.0) / 2.0).sqrt()
    } else {
        0.0
    };
    diag + sign.factor() * d * derivative
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quad_overlap;
    use approx::assert_relative_eq;

    #[test]
    fn zero_displacement_is_identity() {
        for m in 0..10 {
            for n in 0..10 {
                let expect = if m == n { 1.0 } else { 0.0 };
                assert_eq!(displaced_overlap(m, n, 0.0, Sign::Plus), expect);
                assert_eq!(displaced_overlap(m, n, 0.0, Sign::Minus), expect);
            }
        }
    }

    #[test]
    fn ground_to_first_mode() {
        // ⟨1|0+⟩ = -√(1/2) d e^(-d²/4)
        let d: f64 = 0.3;
        let expect = -(d / 2f64.sqrt()) * (-d * d / 4.0).exp();
        assert_relative_eq!(displaced_overlap(1, 0, d, Sign::Plus), expect, max_relative = 1e-14);
        assert!((displaced_overlap(1, 0, d, Sign::Plus) + 0.2074).abs() < 1e-4);
        assert_relative_eq!(displaced_overlap(1, 0, d, Sign::Minus), -expect, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature_example() {
        // quad_overlap integrates hg(m, x) hg(n, x - shift), the minus copy
        let q = quad_overlap(3, 5, 0.8).unwrap();
        assert!((displaced_overlap(3, 5, 0.8, Sign::Minus) - q).abs() < 1e-10);
        let q = quad_overlap(1, 0, 0.6).unwrap();
        assert!((displaced_overlap(1, 0, 0.6, Sign::Minus) - q).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_quadrature_grid() {
        let mut worst: f64 = 0.0;
        for m in 0..=10 {
            for n in 0..=10 {
                for i in 0..=12 {
                    let d = 0.25 * i as f64;
                    let q = quad_overlap(m, n, d).unwrap();
                    worst = worst.max((displaced_overlap(m, n, d, Sign::Minus) - q).abs());
                }
            }
        }
        assert!(worst < 1e-10, "max deviation {worst:e}");
    }

    #[test]
    fn first_order_examples() {
        for m in 0..6 {
            assert_eq!(overlap_first_order(m, m, 0.3, Sign::Plus), 1.0);
            assert_eq!(overlap_first_order(m, m, 0.3, Sign::Minus), 1.0);
        }
        let d = 0.02;
        assert_relative_eq!(
            overlap_first_order(0, 1, d, Sign::Plus).abs(),
            d * 0.5f64.sqrt(),
            max_relative = 1e-14
        );
        let exact = displaced_overlap(2, 3, 0.01, Sign::Plus);
        let approx = overlap_first_order(2, 3, 0.01, Sign::Plus);
        assert!((exact - approx).abs() <= 5e-4, "{exact} vs {approx}");
        assert_relative_eq!(
            displaced_overlap(1, 0, 1e-4, Sign::Plus),
            overlap_first_order(1, 0, 1e-4, Sign::Plus),
            max_relative = 1e-7
        );
    }

    #[test]
    fn first_order_error_is_at_least_quadratic() {
        for m in 0..5 {
            for n in 0..5 {
                let e1 = (displaced_overlap(m, n, 1e-2, Sign::Plus)
                    - overlap_first_order(m, n, 1e-2, Sign::Plus))
                .abs();
                let e2 = (displaced_overlap(m, n, 2e-2, Sign::Plus)
                    - overlap_first_order(m, n, 2e-2, Sign::Plus))
                .abs();
                if e1 > 1e-12 {
                    let ratio = e2 / e1;
                    assert!(ratio > 3.5, "({m},{n}) ratio {ratio}");
                }
            }
        }
    }

    #[test]
    fn parity() {
        for m in 0..=12 {
            for n in 0..=12 {
                for &d in &[0.1, 0.5, 1.0, 2.0] {
                    let plus = displaced_overlap(m, n, d, Sign::Plus);
                    let minus = displaced_overlap(m, n, d, Sign::Minus);
                    let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((minus - sign * plus).abs() <= 1e-15 * plus.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn completeness() {
        for n in 0..=6 {
            for &d in &[0.1, 0.5, 1.0, 1.5, 2.0] {
                for sign in Sign::BOTH {
                    let total: f64 = (0..=n + 40)
                        .map(|m| displaced_overlap(m, n, d, sign).powi(2))
                        .sum();
                    assert!((1.0 - total).abs() < 1e-8, "n {n} d {d}: {total}");
                }
            }
        }
    }

    #[test]
    fn displacement_newtype() {
        let d = Displacement::from_total(0.6).unwrap();
        assert_eq!(d.per_arm(), 0.3);
        assert_eq!(d.total(), 0.6);
        assert!(Displacement::new(-0.1).is_err());
        assert!(Displacement::new(f64::NAN).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounded_and_even_in_d(m in 0usize..15, n in 0usize..15, d in 0.0f64..4.0) {
                let a = displaced_overlap(m, n, d, Sign::Plus);
                prop_assert!(a.abs() <= 1.0 + 1e-12);
                let b = displaced_overlap(m, n, -d, Sign::Plus);
                prop_assert!((a * a - b * b).abs() <= 1e-14);
            }

            #[test]
            fn exchange_symmetry(m in 0usize..15, n in 0usize..15, d in 0.0f64..4.0) {
                let a = displaced_overlap(m, n, d, Sign::Plus);
                let b = displaced_overlap(n, m, d, Sign::Minus);
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
    }
}

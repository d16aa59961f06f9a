//! Special functions and Gaussian quadrature.
//!
//! Hermite polynomials use the physicists' convention. Hermite-Gauss
//! amplitudes are normalized on the real line with envelope `e^(-x²/2)`:
//!
//! ```text
//! hg(m, x) = (2^m m! √π)^(-1/2) H_m(x) e^(-x²/2)
//! ```
//!
//! The quadrature rules here are the independent numerical route against
//! which the closed-form overlaps in [`crate::overlap`] are checked.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Largest quadrature order the Newton root finder is trusted for.
pub const MAX_QUADRATURE_ORDER: usize = 1000;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// `ln(n!)`, summed exactly for small `n` and via Stirling's series beyond.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 256 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    ln_gamma(n as f64 + 1.0)
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Physicists' Hermite polynomial `H_n(x)` by three-term recurrence.
pub fn hermite(n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(invalid(format!("hermite order must be non-negative, got {n}")));
    }
    Ok(hermite_unchecked(n as usize, x))
}

pub(crate) fn hermite_unchecked(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial `L_m^alpha(x)` by forward recurrence.
///
/// `alpha` may be any integer; for `alpha >= -m` this is the usual
/// polynomial of degree `m`.
pub fn laguerre(m: i64, alpha: i64, x: f64) -> Result<f64> {
    if m < 0 {
        return Err(invalid(format!("laguerre order must be non-negative, got {m}")));
    }
    if alpha < 0 && -alpha <= m {
        // L_m^(-j)(x) = (-x)^j (m-j)!/m! L_(m-j)^(j)(x); the forward recurrence
        // is poorly conditioned for negative alpha
        let j = (-alpha) as u64;
        let rest = laguerre_unchecked((m as u64 - j) as usize, j as f64, x);
        let ln_ratio = ln_factorial(m as u64 - j) - ln_factorial(m as u64);
        return Ok((-x).powi(j as i32) * ln_ratio.exp() * rest);
    }
    Ok(laguerre_unchecked(m as usize, alpha as f64, x))
}

pub(crate) fn laguerre_unchecked(m: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized 1D Hermite-Gauss amplitude of order `m` at `x`.
pub fn hg1d(m: usize, x: f64) -> f64 {
    let ln_norm = -0.5 * (m as f64 * 2f64.ln() + ln_factorial(m as u64) + 0.5 * PI.ln());
    let h = hermite_unchecked(m, x);
    if h == 0.0 {
        return 0.0;
    }
    h.signum() * (h.abs().ln() + ln_norm - 0.5 * x * x).exp()
}

/// All amplitudes `hg(0..=max_m, x)` using the orthonormal recurrence.
///
/// Numerically equivalent to calling [`hg1d`] per order, but linear in
/// `max_m` and free of any intermediate overflow.
pub fn hg1d_all(max_m: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    let psi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if max_m == 0 {
        return;
    }
    out.push(2f64.sqrt() * x * psi0);
    for n in 1..max_m {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
}

/// A Gaussian quadrature rule: ascending nodes and positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss-Hermite rule with `order` nodes for the weight `e^(-x²)`.
    pub fn gauss_hermite(order: usize) -> Result<Self> {
        check_order(order)?;
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let half = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-0.166_67),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut dp = 0.0;
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                // orthonormal recurrence avoids overflow at large order
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                dp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / dp;
                if (z - z1).abs() <= NEWTON_TOL * z.abs().max(1.0) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "gauss-hermite root {i} of order {n} did not converge"
                )));
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (dp * dp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[half - 1] = 0.0;
        }
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    /// Gauss-Legendre rule with `order` nodes on `[-1, 1]`.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        check_order(order)?;
        let n = order;
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                dp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / dp;
                if (z - z1).abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::Numerical(format!(
                    "gauss-legendre root {i} of order {n} did not converge"
                )));
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
            weights[n - 1 - i] = weights[i];
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i f(x_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrate over `[a, b]`, assuming a Legendre rule on `[-1, 1]`.
    pub fn integrate_interval<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|t| f(mid + half * t))
    }
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 || order > MAX_QUADRATURE_ORDER {
        return Err(Error::QuadratureOrder {
            requested: order,
            max: MAX_QUADRATURE_ORDER,
        });
    }
    Ok(())
}

/// Default Gauss-Hermite order for an overlap of modes `m` and `n`.
pub fn default_overlap_order(m: usize, n: usize) -> usize {
    2 * (m + n) + 20
}

/// `∫ hg(m, x) hg(n, x - shift) dx` by Gauss-Hermite quadrature.
///
/// The integrand is centred at `shift / 2`, where it is an exact polynomial
/// of degree `m + n` times `e^(-u²)`.
pub fn quad_overlap(m: usize, n: usize, shift: f64) -> Result<f64> {
    quad_overlap_with_order(m, n, shift, default_overlap_order(m, n))
}

pub fn quad_overlap_with_order(m: usize, n: usize, shift: f64, order: usize) -> Result<f64> {
    if order < m + n + 10 {
        return Err(invalid(format!(
            "quadrature order {order} below m + n + 10 = {}",
            m + n + 10
        )));
    }
    let rule = QuadratureRule::gauss_hermite(order)?;
    let a = 0.5 * shift;
    let ln_norm = -0.5
        * ((m + n) as f64 * 2f64.ln() + ln_factorial(m as u64) + ln_factorial(n as u64) + PI.ln());
    let scale = (ln_norm - 0.25 * shift * shift).exp();
    Ok(scale * rule.integrate(|u| hermite_unchecked(m, u + a) * hermite_unchecked(n, u - a)))
}

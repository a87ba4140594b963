//! Real-argument gamma-family functions.
//!
//! `ln_gamma` and `digamma` shift the argument upward with the recurrence
//! `Γ(x+1) = xΓ(x)` until the Stirling / de Moivre asymptotic series is
//! accurate to machine precision, then undo the shift. Negative arguments
//! go through the reflection formula.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SHIFT: f64 = 15.0;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn stirling_ln_gamma(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r
        * (1.0 / 12.0
            - r2 * (1.0 / 360.0
                - r2 * (1.0 / 1260.0
                    - r2 * (1.0 / 1680.0
                        - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

fn asymptotic_digamma(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    let series = r2
        * (1.0 / 12.0
            - r2 * (1.0 / 120.0
                - r2 * (1.0 / 252.0
                    - r2 * (1.0 / 240.0
                        - r2 * (1.0 / 132.0 - r2 * (691.0 / 32_760.0 - r2 / 12.0))))));
    x.ln() - 0.5 * r - series
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x >= SHIFT {
        return stirling_ln_gamma(x);
    }
    let mut prod = 1.0;
    let mut z = x;
    while z < SHIFT {
        prod *= z;
        z += 1.0;
    }
    stirling_ln_gamma(z) - prod.ln()
}

/// Digamma `Ψ(x) = Γ'(x)/Γ(x)` for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut acc = 0.0;
    let mut z = x;
    while z < SHIFT {
        acc -= 1.0 / z;
        z += 1.0;
    }
    Ok(acc + asymptotic_digamma(z))
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        (PI * (-1.0 - r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `(ln|Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if x > 0.0 {
        return Ok((ln_gamma(x)?, 1.0));
    }
    let s = sin_pi(x);
    if s == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("Γ has a pole at {x}")));
    }
    // Γ(x)Γ(1-x) = π / sin(πx)
    let lg = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Ok((lg, s.signum()))
}

/// `Γ(x)` for real `x` off the poles.
pub fn gamma(x: f64) -> Result<f64> {
    let (lg, sign) = ln_gamma_signed(x)?;
    Ok(sign * lg.exp())
}

/// `1/Γ(x)`, entire: zero at the non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    match ln_gamma_signed(x) {
        Ok((lg, sign)) => sign * (-lg).exp(),
        Err(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_values() {
        assert_abs_diff_eq!(ln_gamma(1.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(2.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ln_gamma(0.5).unwrap(), 0.572_364_942_924_700_1, epsilon = 1e-13);
        assert_abs_diff_eq!(digamma(1.0).unwrap(), -EULER_GAMMA, epsilon = 1e-13);
        // Ψ(1/2) = -γ - 2 ln 2
        assert_abs_diff_eq!(
            digamma(0.5).unwrap(),
            -EULER_GAMMA - 2.0 * 2f64.ln(),
            epsilon = 1e-13
        );
        // ln 10! = ln Γ(11)
        assert_abs_diff_eq!(ln_gamma(11.0).unwrap(), 3_628_800f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(digamma(0.0).is_err());
        assert!(digamma(f64::NAN).is_err());
    }

    #[test]
    fn matches_statrs_on_a_grid() {
        let mut x = 1e-3;
        while x < 200.0 {
            let ours = ln_gamma(x).unwrap();
            let theirs = statrs::function::gamma::ln_gamma(x);
            assert_abs_diff_eq!(ours, theirs, epsilon = 1e-12 * theirs.abs().max(1.0));
            let dg = digamma(x).unwrap();
            let dg_ref = statrs::function::gamma::digamma(x);
            assert_abs_diff_eq!(dg, dg_ref, epsilon = 1e-12 * dg_ref.abs().max(1.0));
            x *= 1.037;
        }
    }

    #[test]
    fn recurrences_hold() {
        for &x in &[0.01, 0.3, 1.4616, 2.5, 7.9, 14.99, 15.01, 40.0] {
            let lhs = ln_gamma(x + 1.0).unwrap();
            let rhs = ln_gamma(x).unwrap() + f64::ln(x);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
            let lhs = digamma(x + 1.0).unwrap();
            let rhs = digamma(x).unwrap() + 1.0 / x;
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn negative_arguments_by_reflection() {
        // Γ(-1/2) = -2√π
        assert_abs_diff_eq!(gamma(-0.5).unwrap(), -2.0 * PI.sqrt(), epsilon = 1e-12);
        // Γ(-3/2) = 4√π/3
        assert_abs_diff_eq!(gamma(-1.5).unwrap(), 4.0 * PI.sqrt() / 3.0, epsilon = 1e-12);
        assert!(gamma(-2.0).is_err());
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert_abs_diff_eq!(rgamma(-0.5), -0.5 / PI.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(rgamma(3.0), 0.5, epsilon = 1e-15);
    }
}

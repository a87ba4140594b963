//! Mellin transform `M(z) = 𝔼[I∞^{−z}]` of the exponential functional.
//!
//! `M` satisfies `ψ(αz)M(z) = zM(z+1)`, and its derivatives at 0 and 1 give
//! a second route to the FCLT variance:
//! `v² = 2(αp)^{−2}(−M′(0) + (αp)^{−1}M′(1))`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::expfun::{sample_i_inf, ClosedFormLaw, IInfLaw};
use crate::levy::{Interval, LevyFamily};
use crate::numdiff::{central_first, richardson};
use crate::stats::mean_se;

/// Difference step for closed-form derivatives.
pub const CLOSED_FORM_STEP: f64 = 1e-4;
/// Difference step for sampled derivatives.
pub const SAMPLED_STEP: f64 = 1e-2;
/// Relative disagreement tolerated between Richardson levels.
pub const RICHARDSON_TOLERANCE: f64 = 1e-4;
/// Evaluation window for sampled transforms.
pub const SAMPLED_WINDOW: Interval = Interval { lo: -0.5, hi: 2.5 };

/// `M(z)` for an explicit law, or estimated from draws of `I∞`.
#[derive(Debug, Clone)]
pub enum MellinFunction {
    ClosedForm(ClosedFormLaw),
    Sampled(SampledMellin),
}

/// Empirical Mellin transform over stored draws of `ln I∞^{−1}`.
#[derive(Debug, Clone)]
pub struct SampledMellin {
    log_inverse: Vec<f64>,
    interval: Interval,
    law: &'static str,
}

/// A value together with its Monte Carlo standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl SampledMellin {
    /// Draws `n` values of `I∞` from `law`.
    pub fn from_law<R: Rng + ?Sized>(law: &IInfLaw, n: usize, rng: &mut R) -> Result<Self> {
        let mut log_inverse = Vec::with_capacity(n);
        for _ in 0..n {
            log_inverse.push(-sample_i_inf(law, rng)?.ln());
        }
        let interval = match law.closed_form() {
            Some(c) => intersect(SAMPLED_WINDOW, c.mellin_interval()),
            None => SAMPLED_WINDOW,
        };
        Ok(SampledMellin {
            log_inverse,
            interval,
            law: law.descriptor(),
        })
    }

    pub fn len(&self) -> usize {
        self.log_inverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_inverse.is_empty()
    }

    pub fn law(&self) -> &'static str {
        self.law
    }

    /// Per-sample values of `q(Y)` with `Y = I∞^{−1}`.
    fn per_sample<Q: Fn(f64) -> f64>(&self, q: Q) -> Vec<f64> {
        self.log_inverse.iter().map(|&ly| q(ly)).collect()
    }

    fn check(&self, z: f64) -> Result<()> {
        if self.interval.contains(z) || z == self.interval.lo || z == self.interval.hi {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "sampled Mellin argument {z} outside {}",
                self.interval
            )))
        }
    }

    pub fn estimate(&self, z: f64) -> Result<Estimate> {
        self.check(z)?;
        let (value, se) = mean_se(&self.per_sample(|ly| (z * ly).exp()));
        Ok(Estimate { value, se })
    }
}

fn intersect(a: Interval, b: Interval) -> Interval {
    Interval {
        lo: a.lo.max(b.lo),
        hi: a.hi.min(b.hi),
    }
}

impl MellinFunction {
    pub fn interval(&self) -> Interval {
        match self {
            MellinFunction::ClosedForm(c) => c.mellin_interval(),
            MellinFunction::Sampled(s) => s.interval,
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        match self {
            MellinFunction::ClosedForm(c) => c.mellin(z),
            MellinFunction::Sampled(s) => Ok(s.estimate(z)?.value),
        }
    }

    /// `"closed-form"` or `"mc:<law>:<n>"`.
    pub fn provenance(&self) -> String {
        match self {
            MellinFunction::ClosedForm(_) => "closed-form".to_string(),
            MellinFunction::Sampled(s) => format!("mc:{}:{}", s.law, s.len()),
        }
    }
}

/// `ψ(αz)M(z) − zM(z+1)`.
pub fn recursion_residual(family: &LevyFamily, m: &MellinFunction, z: f64) -> Result<f64> {
    Ok(recursion_residual_estimate(family, m, z)?.value)
}

/// Residual of the recursion with its standard error. For sampled `M` both
/// sides use the same draws.
pub fn recursion_residual_estimate(
    family: &LevyFamily,
    m: &MellinFunction,
    z: f64,
) -> Result<Estimate> {
    let alpha = family.alpha();
    let psi = family.psi(alpha * z)?;
    match m {
        MellinFunction::ClosedForm(c) => Ok(Estimate {
            value: psi * c.mellin(z)? - z * c.mellin(z + 1.0)?,
            se: 0.0,
        }),
        MellinFunction::Sampled(s) => {
            s.check(z)?;
            s.check(z + 1.0)?;
            let q = s.per_sample(|ly| psi * (z * ly).exp() - z * ((z + 1.0) * ly).exp());
            let (value, se) = mean_se(&q);
            Ok(Estimate { value, se })
        }
    }
}

/// FCLT variance from derivatives of `M` at 0 and 1.
pub fn v2_via_mellin(family: &LevyFamily, m: &MellinFunction) -> Result<Estimate> {
    let ap = family.alpha() * family.mean_drift();
    let combine = |d0: f64, d1: f64| 2.0 / (ap * ap) * (-d0 + d1 / ap);
    match m {
        MellinFunction::ClosedForm(c) => {
            let f = |z: f64| c.mellin(z).unwrap_or(f64::NAN);
            let derivative = |x: f64| -> Result<f64> {
                let level0 = central_first(&f, x, CLOSED_FORM_STEP);
                let (level1, _) = richardson(|h| central_first(&f, x, h), CLOSED_FORM_STEP, 1);
                if !level1.is_finite() {
                    return Err(Error::Precision(format!("non-finite M′({x})")));
                }
                let rel = (level1 - level0).abs() / level1.abs().max(f64::MIN_POSITIVE);
                if rel > RICHARDSON_TOLERANCE {
                    return Err(Error::Precision(format!(
                        "M′({x}): Richardson levels differ by {rel:.3e} relative"
                    )));
                }
                Ok(level1)
            };
            Ok(Estimate {
                value: combine(derivative(0.0)?, derivative(1.0)?),
                se: 0.0,
            })
        }
        MellinFunction::Sampled(s) => {
            let h = SAMPLED_STEP;
            for z in [-h, h, 1.0 - h, 1.0 + h] {
                s.check(z)?;
            }
            let q = s.per_sample(|ly| {
                let d0 = ((h * ly).exp() - (-h * ly).exp()) / (2.0 * h);
                let d1 = (((1.0 + h) * ly).exp() - ((1.0 - h) * ly).exp()) / (2.0 * h);
                combine(d0, d1)
            });
            let (value, se) = mean_se(&q);
            Ok(Estimate { value, se })
        }
    }
}

//! The exponential functional `I∞ = ∫₀^∞ e^{−αξ_s} ds`.
//!
//! Its law fixes the entrance law of the pssMp at 0 and the invariant law
//! of the associated Ornstein–Uhlenbeck process: `X₁` under the entrance
//! law is `I∞^{−1/α}` with the law of `I∞` size-biased by `I∞^{−1}`.
//!
//! Closed forms are used wherever the catalog has one. They are all
//! written in terms of `Y = I∞^{−1}`:
//!
//! | family     | law of `Y`                                        |
//! |------------|---------------------------------------------------|
//! | bessel     | `2α²·Gamma(ν/α)`                                  |
//! | cp+ (d>0)  | `αd / Beta(1 + b/α, a/(αd))`                      |
//! | cp-        | `α·G_{(a−b)/α} / G_{1+b/α}` (beta prime)          |
//! | saw        | `α·Beta((b−a)/α, a/α)`                            |
//! | condstable | `1/S` with `S` positive `1/α`-stable (α = stable index) |
//!
//! At `α = 1` these are the textbook laws; other `α` follow by the time
//! change `s ↦ αs` applied to `αξ`. Every one satisfies `𝔼[Y] = αp`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::{FamilyKind, Interval, LevyFamily};
use crate::path::{exp_functional_to_infinity, ExtensionPolicy, PathSource, DEFAULT_DT};
use crate::special::ln_gamma_signed;

/// Relative size of the neglected tail in truncated-integral sampling.
pub const TAIL_TOLERANCE: f64 = 1e-6;
/// Proposal pool size for single importance-resampled draws.
pub const IR_POOL: usize = 1000;
/// Minimal effective sample size as a fraction of the pool.
pub const ESS_FLOOR: f64 = 0.1;

/// Closed-form law of `Y = I∞^{−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ClosedFormLaw {
    /// `Y = scale·Gamma(shape)`.
    GammaReciprocal { scale: f64, shape: f64 },
    /// `I∞ = Beta(a, b)/scale`, i.e. `Y = scale/Beta(a, b)`.
    BetaScaled { scale: f64, a: f64, b: f64 },
    /// `Y = scale·Beta(a, b)`.
    BetaReciprocal { scale: f64, a: f64, b: f64 },
    /// `Y = scale·G_num/G_den` with independent unit-scale gammas.
    BetaPrime { scale: f64, num: f64, den: f64 },
    /// `I∞ = S` with `𝔼 e^{−λS} = e^{−λ^index}`.
    PositiveStable { index: f64 },
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

fn beta_draw<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    Beta::new(a, b).expect("positive parameters").sample(rng)
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One-sided stable variate with Laplace transform `e^{−λ^β}`, `0 < β < 1`,
/// by Kanter's representation `(A(U)/E)^{(1−β)/β}`.
pub fn sample_positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = open_unit(rng);
    let e: f64 = Exp1.sample(rng);
    let ln_a = beta / (1.0 - beta) * (beta * PI * u).sin().ln() + ((1.0 - beta) * PI * u).sin().ln()
        - (PI * u).sin().ln() / (1.0 - beta);
    ((1.0 - beta) / beta * (ln_a - e.ln())).exp()
}

fn ln_gamma_s(x: f64) -> f64 {
    ln_gamma_signed(x).map(|v| v.0).unwrap_or(f64::NAN)
}

impl ClosedFormLaw {
    /// Draw of `Y = I∞^{−1}`.
    pub fn sample_inverse<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ClosedFormLaw::GammaReciprocal { scale, shape } => scale * gamma_draw(shape, rng),
            ClosedFormLaw::BetaScaled { scale, a, b } => scale / beta_draw(a, b, rng),
            ClosedFormLaw::BetaReciprocal { scale, a, b } => scale * beta_draw(a, b, rng),
            ClosedFormLaw::BetaPrime { scale, num, den } => {
                scale * gamma_draw(num, rng) / gamma_draw(den, rng)
            }
            ClosedFormLaw::PositiveStable { index } => 1.0 / sample_positive_stable(index, rng),
        }
    }

    /// Draw of `Y` under the law size-biased by `Y`, when it has a closed form.
    pub fn sample_size_biased_inverse<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        Some(match *self {
            ClosedFormLaw::GammaReciprocal { scale, shape } => scale * gamma_draw(shape + 1.0, rng),
            ClosedFormLaw::BetaScaled { scale, a, b } => scale / beta_draw(a - 1.0, b, rng),
            ClosedFormLaw::BetaReciprocal { scale, a, b } => scale * beta_draw(a + 1.0, b, rng),
            ClosedFormLaw::BetaPrime { scale, num, den } => {
                scale * gamma_draw(num + 1.0, rng) / gamma_draw(den - 1.0, rng)
            }
            ClosedFormLaw::PositiveStable { .. } => return None,
        })
    }

    /// Interval of `z` on which `𝔼[Y^z]` is finite.
    pub fn mellin_interval(&self) -> Interval {
        let inf = f64::INFINITY;
        match *self {
            ClosedFormLaw::GammaReciprocal { shape, .. } => Interval { lo: -shape, hi: inf },
            ClosedFormLaw::BetaScaled { a, .. } => Interval { lo: -inf, hi: a },
            ClosedFormLaw::BetaReciprocal { a, .. } => Interval { lo: -a, hi: inf },
            ClosedFormLaw::BetaPrime { num, den, .. } => Interval { lo: -num, hi: den },
            ClosedFormLaw::PositiveStable { index } => Interval { lo: -index, hi: inf },
        }
    }

    /// `M(z) = 𝔼[I∞^{−z}] = 𝔼[Y^z]`.
    pub fn mellin(&self, z: f64) -> Result<f64> {
        let dom = self.mellin_interval();
        if !dom.contains(z) {
            return Err(Error::Domain(format!("Mellin argument {z} outside {dom}")));
        }
        let log = match *self {
            ClosedFormLaw::GammaReciprocal { scale, shape } => {
                z * scale.ln() + ln_gamma_s(shape + z) - ln_gamma_s(shape)
            }
            ClosedFormLaw::BetaScaled { scale, a, b } => {
                z * scale.ln() + ln_gamma_s(a - z) + ln_gamma_s(a + b)
                    - ln_gamma_s(a)
                    - ln_gamma_s(a + b - z)
            }
            ClosedFormLaw::BetaReciprocal { scale, a, b } => {
                z * scale.ln() + ln_gamma_s(a + z) + ln_gamma_s(a + b)
                    - ln_gamma_s(a)
                    - ln_gamma_s(a + b + z)
            }
            ClosedFormLaw::BetaPrime { scale, num, den } => {
                z * scale.ln() + ln_gamma_s(num + z) + ln_gamma_s(den - z)
                    - ln_gamma_s(num)
                    - ln_gamma_s(den)
            }
            ClosedFormLaw::PositiveStable { index } => {
                ln_gamma_s(1.0 + z / index) - ln_gamma_s(1.0 + z)
            }
        };
        Ok(log.exp())
    }

    pub fn descriptor(&self) -> &'static str {
        match self {
            ClosedFormLaw::GammaReciprocal { .. } => "gamma-reciprocal",
            ClosedFormLaw::BetaScaled { .. } => "beta-scaled",
            ClosedFormLaw::BetaReciprocal { .. } => "beta-reciprocal",
            ClosedFormLaw::BetaPrime { .. } => "beta-prime",
            ClosedFormLaw::PositiveStable { .. } => "positive-stable",
        }
    }
}

/// Closed-form law of `I∞^{−1}` for a family, if the catalog has one.
pub fn closed_form_law(family: &LevyFamily) -> Option<ClosedFormLaw> {
    let alpha = family.alpha();
    match family.kind() {
        FamilyKind::BrownianDrift { nu } => Some(ClosedFormLaw::GammaReciprocal {
            scale: 2.0 * alpha * alpha,
            shape: nu / alpha,
        }),
        FamilyKind::CpPosDrift { drift, rate, jump } if drift > 0.0 && rate > 0.0 => {
            Some(ClosedFormLaw::BetaScaled {
                scale: alpha * drift,
                a: 1.0 + jump / alpha,
                b: rate / (alpha * drift),
            })
        }
        FamilyKind::CpNegDrift { rate, jump } => Some(ClosedFormLaw::BetaPrime {
            scale: alpha,
            num: (rate - jump) / alpha,
            den: 1.0 + jump / alpha,
        }),
        FamilyKind::SawTooth { rate, jump } if rate > 0.0 => Some(ClosedFormLaw::BetaReciprocal {
            scale: alpha,
            a: (jump - rate) / alpha,
            b: rate / alpha,
        }),
        FamilyKind::ConditionedStable { stable_index } if stable_index == alpha => {
            Some(ClosedFormLaw::PositiveStable {
                index: 1.0 / stable_index,
            })
        }
        _ => None,
    }
}

/// Sampler descriptor for `I∞`.
#[derive(Debug, Clone, PartialEq)]
pub enum IInfLaw {
    ClosedForm {
        family: LevyFamily,
        law: ClosedFormLaw,
    },
    /// Numerical integration of `e^{−αξ}` along a simulated path.
    McTruncated {
        family: LevyFamily,
        /// Grid step for Brownian paths.
        dt: f64,
        rel_tol: f64,
    },
}

/// The closed-form law when available, else the truncated-integral
/// sampler; `None` for families without either.
pub fn i_inf_sampler(family: &LevyFamily) -> Option<IInfLaw> {
    match closed_form_law(family) {
        Some(law) => Some(IInfLaw::ClosedForm {
            family: *family,
            law,
        }),
        None => mc_truncated_law(family, DEFAULT_DT),
    }
}

/// Truncated-integral sampler, for path-simulable families.
pub fn mc_truncated_law(family: &LevyFamily, dt: f64) -> Option<IInfLaw> {
    family.is_path_simulable().then_some(IInfLaw::McTruncated {
        family: *family,
        dt,
        rel_tol: TAIL_TOLERANCE,
    })
}

impl IInfLaw {
    pub fn family(&self) -> &LevyFamily {
        match self {
            IInfLaw::ClosedForm { family, .. } | IInfLaw::McTruncated { family, .. } => family,
        }
    }

    pub fn closed_form(&self) -> Option<ClosedFormLaw> {
        match self {
            IInfLaw::ClosedForm { law, .. } => Some(*law),
            IInfLaw::McTruncated { .. } => None,
        }
    }

    pub fn descriptor(&self) -> &'static str {
        match self {
            IInfLaw::ClosedForm { law, .. } => law.descriptor(),
            IInfLaw::McTruncated { .. } => "mc-truncated",
        }
    }
}

/// One draw of `I∞`.
pub fn sample_i_inf<R: Rng + ?Sized>(law: &IInfLaw, rng: &mut R) -> Result<f64> {
    match law {
        IInfLaw::ClosedForm { law, .. } => Ok(1.0 / law.sample_inverse(rng)),
        IInfLaw::McTruncated {
            family,
            dt,
            rel_tol,
        } => {
            let mut source = PathSource::for_family(family, *dt)?
                .expect("truncated sampler only built for path-simulable families");
            let policy = ExtensionPolicy::for_family(family);
            exp_functional_to_infinity(&mut source, rng, family.alpha(), *rel_tol, &policy)
        }
    }
}

fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    s * s / s2
}

/// Draws `n` values of `I∞^{−1}` from the plain law and resamples them
/// with self-normalised weights `I∞^{−1}`.
fn importance_resample<R: Rng + ?Sized>(
    law: &IInfLaw,
    pool: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut ys = Vec::with_capacity(pool);
    for _ in 0..pool {
        ys.push(1.0 / sample_i_inf(law, rng)?);
    }
    let ess = effective_sample_size(&ys);
    let floor = ESS_FLOOR * pool as f64;
    if !(ess >= floor) {
        return Err(Error::Resampling { ess, floor });
    }
    let total: f64 = ys.iter().sum();
    let mut cumulative = Vec::with_capacity(pool);
    let mut acc = 0.0;
    for y in &ys {
        acc += y / total;
        cumulative.push(acc);
    }
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let k = cumulative.partition_point(|&c| c < u).min(pool - 1);
            ys[k]
        })
        .collect())
}

/// One draw of `X₁` under the entrance law, equivalently of the invariant
/// law of `U(t) = e^{−t/α}X(e^t)`.
pub fn sample_entrance_x1<R: Rng + ?Sized>(law: &IInfLaw, rng: &mut R) -> Result<f64> {
    let alpha = law.family().alpha();
    if let Some(y) = law.closed_form().and_then(|c| c.sample_size_biased_inverse(rng)) {
        return Ok(y.powf(1.0 / alpha));
    }
    let y = importance_resample(law, IR_POOL, 1, rng)?[0];
    Ok(y.powf(1.0 / alpha))
}

/// `n` draws of `X₁` under the entrance law. Without a closed form the
/// draws come from one importance-resampled pool of size `n`.
pub fn sample_entrance_batch<R: Rng + ?Sized>(
    law: &IInfLaw,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let alpha = law.family().alpha();
    match law.closed_form() {
        Some(c) if !matches!(c, ClosedFormLaw::PositiveStable { .. }) => Ok((0..n)
            .map(|_| {
                c.sample_size_biased_inverse(rng)
                    .expect("closed form")
                    .powf(1.0 / alpha)
            })
            .collect()),
        _ => Ok(importance_resample(law, n.max(IR_POOL), n, rng)?
            .into_iter()
            .map(|y| y.powf(1.0 / alpha))
            .collect()),
    }
}

//! Generator of the Lamperti–OU process `U(t) = e^{−t/α}X(e^t)` and the
//! drift criteria for its exponential ergodicity.
//!
//! On power functions `f_m(x) = x^m` the generator acts as
//! `L^U f_m = ψ(m) x^{m−α} − (m/α) x^m`, and on the logarithm as
//! `L^U log = p x^{−α} − 1/α`. The quenched FCLT holds when either
//!
//! * (2a) some `m > 0` has `ψ(m) < 0`, or
//! * (2b) some `m > α` in the domain of `ψ` has `ψ(m) > 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levy::LevyFamily;
use crate::special::ln_gamma;

/// Points of the sign-search grid.
pub const SIGN_GRID: usize = 512;
/// Resolution of bisection refinement of a sign change.
pub const WITNESS_RESOLUTION: f64 = 1e-6;
/// Ratio of the smallest to the largest grid point in the (2a) search.
const GRID_FLOOR: f64 = 1e-6;
/// Sweep range for Lyapunov verification, `x ∈ 10^[−3, 3]`.
const SWEEP_DECADES: (f64, f64) = (-3.0, 3.0);
const SWEEP_POINTS: usize = 6001;

/// Test functions on which the generator is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `x ↦ x^m`.
    Power(f64),
    Log,
}

/// `L^U h(x)`.
pub fn generator_u_apply(family: &LevyFamily, h: TestFunction, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("generator needs x > 0, got {x}")));
    }
    let alpha = family.alpha();
    match h {
        TestFunction::Power(m) => {
            let psi = family.psi(m)?;
            Ok(psi * x.powf(m - alpha) - m / alpha * x.powf(m))
        }
        TestFunction::Log => Ok(family.mean_drift() * x.powf(-alpha) - 1.0 / alpha),
    }
}

/// `f(x) = x^{−α} − (αp)^{−1}`, centred under the invariant law of `U`.
pub fn poisson_f(family: &LevyFamily, x: f64) -> f64 {
    let alpha = family.alpha();
    x.powf(-alpha) - 1.0 / (alpha * family.mean_drift())
}

/// `g(x) = p^{−1} log x`, solving `L^U g = f`.
pub fn poisson_g(family: &LevyFamily, x: f64) -> f64 {
    x.ln() / family.mean_drift()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ExpErgodicVia2a,
    ExpErgodicVia2b,
    CriterionFails,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::ExpErgodicVia2a => "exp_ergodic_via_2a",
            Classification::ExpErgodicVia2b => "exp_ergodic_via_2b",
            Classification::CriterionFails => "criterion_fails",
        }
    }
}

/// Constants of the drift condition `L f ≤ −C f + D·1_{[0,K]}` for `f = f_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovConstants {
    pub c: f64,
    /// `None` when the condition holds for every `K`.
    pub k: Option<f64>,
    pub d: f64,
    pub x_max: Option<f64>,
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicityVerdict {
    pub classification: Classification,
    pub witness: Option<f64>,
    pub constants: Option<LyapunovConstants>,
    /// Set when the witness exists but the numeric sweep rejected the constants.
    pub sweep_failure: Option<String>,
}

/// Finite upper end of the search for `m`.
fn search_sup(family: &LevyFamily) -> f64 {
    let hi = family.psi_domain().hi;
    if hi.is_finite() {
        hi
    } else {
        3.0 * family.alpha().max(1.0)
    }
}

/// First maximal run of `(lo, hi)` on which `pred ∘ ψ` holds, found on a
/// geometric grid and refined by bisection. Returns the run's midpoint.
fn first_run<P: Fn(f64) -> bool>(family: &LevyFamily, lo: f64, hi: f64, pred: P) -> Option<f64> {
    if !(hi > lo) {
        return None;
    }
    let start = if lo > 0.0 { lo } else { hi * GRID_FLOOR };
    let ok = |m: f64| m > lo && m < hi && family.psi(m).map(&pred).unwrap_or(false);
    let ratio = hi / start;
    let grid: Vec<f64> = (0..SIGN_GRID)
        .map(|k| start * ratio.powf((k as f64 + 0.5) / SIGN_GRID as f64))
        .collect();
    let first = grid.iter().position(|&m| ok(m))?;
    let last = first + grid[first..].iter().take_while(|&&m| ok(m)).count() - 1;
    // bisect between a failing point (or the interval end) and a passing one
    let refine = |mut bad: f64, mut good: f64| {
        while (good - bad).abs() > WITNESS_RESOLUTION {
            let mid = 0.5 * (good + bad);
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        good
    };
    let left = if first == 0 {
        if lo > 0.0 {
            lo
        } else {
            refine(0.0, grid[0])
        }
    } else {
        refine(grid[first - 1], grid[first])
    };
    let right = if last + 1 == grid.len() {
        hi
    } else {
        refine(grid[last + 1], grid[last])
    };
    let mid = 0.5 * (left + right);
    ok(mid).then_some(mid).or(Some(grid[first]))
}

/// Default drift constant: half of `min(αm, m/α)`, which keeps the
/// coefficient of `x^m` negative under either reading of the generator.
pub fn default_c(alpha: f64, m: f64) -> f64 {
    0.5 * (alpha * m).min(m / alpha)
}

/// Sign search for the (2a) and (2b) conditions, (2a) first.
pub fn quenched_criterion(family: &LevyFamily) -> ErgodicityVerdict {
    let alpha = family.alpha();
    let sup = search_sup(family);
    let (classification, witness) = if let Some(m) = first_run(family, 0.0, sup, |v| v < 0.0) {
        (Classification::ExpErgodicVia2a, Some(m))
    } else if let Some(m) = first_run(family, alpha, sup, |v| v > 0.0) {
        (Classification::ExpErgodicVia2b, Some(m))
    } else {
        (Classification::CriterionFails, None)
    };
    let mut verdict = ErgodicityVerdict {
        classification,
        witness,
        constants: None,
        sweep_failure: None,
    };
    if let Some(m) = witness {
        match lyapunov_constants(family, m, default_c(alpha, m)) {
            Ok(c) => verdict.constants = Some(c),
            Err(e) => verdict.sweep_failure = Some(e.to_string()),
        }
    }
    verdict
}

/// Re-checks a witness against its defining inequalities.
pub fn witness_is_sound(family: &LevyFamily, classification: Classification, m: f64) -> bool {
    let psi = match family.psi(m) {
        Ok(v) => v,
        Err(_) => return false,
    };
    match classification {
        Classification::ExpErgodicVia2a => m > 0.0 && psi < 0.0,
        Classification::ExpErgodicVia2b => m > family.alpha() && psi > 0.0,
        Classification::CriterionFails => false,
    }
}

/// Drift constants for `f_m`, checked by a sweep of the generator.
///
/// For `ψ(m) > 0` the constants are
/// `x_max = ((m−α)ψ(m)/(m(m−αC)))^{1/α}`, `x₀ = (ψ(m)/(m−αC))^{1/α}`,
/// `K = ψ(m)/(m−C)` and `D = h(x_max)` with
/// `h(x) = ψ(m)x^{m−α} + (C−αm)x^m`; these coincide with the exact
/// maximiser and root of `L^U f_m + C f_m` only at `α = 1`. For `ψ(m) < 0`,
/// `D = 0` and `K` is arbitrary. Either way the sweep evaluates the actual
/// `L^U f_m + C f_m` on `x ∈ [10^{−3}, 10^3]`.
pub fn lyapunov_constants(family: &LevyFamily, m: f64, c: f64) -> Result<LyapunovConstants> {
    let alpha = family.alpha();
    let psi = family.psi(m)?;
    if !(c > 0.0 && c < alpha * m) {
        return Err(Error::InvalidParameter(format!(
            "drift constant C = {c} must lie in (0, αm) = (0, {})",
            alpha * m
        )));
    }
    let drift = |x: f64| psi * x.powf(m - alpha) + (c - m / alpha) * x.powf(m);
    let sweep = |bound: &dyn Fn(f64) -> f64| -> Result<()> {
        let (a, b) = SWEEP_DECADES;
        for i in 0..SWEEP_POINTS {
            let x = 10f64.powf(a + (b - a) * i as f64 / (SWEEP_POINTS - 1) as f64);
            let value = drift(x);
            let bound = bound(x);
            if value > bound + 1e-9 * bound.abs().max(1.0) {
                return Err(Error::Verification { x, value, bound });
            }
        }
        Ok(())
    };
    if psi < 0.0 && m > 0.0 {
        sweep(&|_| 0.0)?;
        return Ok(LyapunovConstants {
            c,
            k: None,
            d: 0.0,
            x_max: None,
            x0: None,
        });
    }
    if !(m > alpha && psi > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} needs ψ(m) < 0, or m > α = {alpha} with ψ(m) > 0"
        )));
    }
    let x_max = ((m - alpha) * psi / (m * (m - alpha * c))).powf(1.0 / alpha);
    let x0 = (psi / (m - alpha * c)).powf(1.0 / alpha);
    let k = psi / (m - c);
    let d = psi * x_max.powf(m - alpha) + (c - alpha * m) * x_max.powf(m);
    sweep(&|x| if x <= k { d } else { 0.0 })?;
    Ok(LyapunovConstants {
        c,
        k: Some(k),
        d,
        x_max: Some(x_max),
        x0: Some(x0),
    })
}

/// `∫₁^∞ log z μ(dz)` for the CBI Lévy measure
/// `μ(dz) = (κ+1)/Γ(1−κ) z^{−κ−2} dz`, by quadrature.
pub fn cbi_log_moment(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!("κ = {kappa} outside (0, 1)")));
    }
    let norm = (kappa + 1.0) / ln_gamma(1.0 - kappa)?.exp();
    // z = 1/u turns the tail integral into ∫₀¹ u^κ (−log u) du
    let out = quadrature::integrate(|u: f64| -u.powf(kappa) * u.ln(), 0.0, 1.0, 1e-14);
    let value = norm * out.integral;
    let closed = cbi_log_moment_closed_form(kappa);
    if (value - closed).abs() > 1e-8 * closed {
        return Err(Error::Inconsistency {
            what: "CBI log-moment".into(),
            closed,
            numerical: value,
        });
    }
    Ok(value)
}

/// `1/((κ+1)Γ(1−κ))`.
pub fn cbi_log_moment_closed_form(kappa: f64) -> f64 {
    1.0 / ((kappa + 1.0) * ln_gamma(1.0 - kappa).map(f64::exp).unwrap_or(f64::INFINITY))
}

//! Catalog of Lévy process families and their Laplace exponents.
//!
//! Each family fixes a Lévy process `ξ` through its Laplace exponent
//! `ψ(m) = log 𝔼 e^{mξ₁}`. Paired with a self-similarity index `α > 0` it
//! determines a positive self-similar Markov process through the Lamperti
//! time change. The first two cumulants `p = ψ'(0)` and `σ² = ψ''(0)` drive
//! every limit theorem in this crate; the clock variance is `σ²/(αp³)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numdiff::{central_first, central_second, richardson};
use crate::special::{digamma, ln_gamma, ln_gamma_signed, EULER_GAMMA};

/// Relative tolerance for closed-form vs finite-difference cumulants.
pub const CUMULANT_TOLERANCE: f64 = 1e-6;

/// Parameters of each catalog family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `ξ_t = 2B_t + 2νt`; the Lamperti image is the squared Bessel process.
    BrownianDrift { nu: f64 },
    /// `ξ_t = d·t + CP(a, b)`: positive drift, positive Exp(b) jumps at rate `a`.
    CpPosDrift { drift: f64, rate: f64, jump: f64 },
    /// `ξ_t = -t + CP(a, b)` with `b < a`.
    CpNegDrift { rate: f64, jump: f64 },
    /// `ξ_t = t - CP(a, b)` with `b > a`: the spectrally negative saw-tooth.
    SawTooth { rate: f64, jump: f64 },
    /// Underlying process of a spectrally negative stable process conditioned
    /// to stay positive, stable index in (1, 2).
    ConditionedStable { stable_index: f64 },
    /// Hypergeometric stable process (radial part of a Cauchy-like process).
    HypergeometricStable { stable_index: f64, dim: f64 },
    /// Continuous-state branching process with immigration.
    Cbi { kappa: f64, delta: f64, c: f64 },
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, m: f64) -> bool {
        m > self.lo && m < self.hi
    }

    /// Distance from `m` to the nearest end.
    pub fn margin(&self, m: f64) -> f64 {
        (m - self.lo).min(self.hi - m)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// A catalog family together with the self-similarity index `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyFamily {
    kind: FamilyKind,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cumulants {
    /// `ψ'(0)`, the mean drift of `ξ`.
    pub p: f64,
    /// `ψ''(0)`, the variance rate of `ξ`.
    pub sigma2: f64,
    /// `σ²/(αp³)`.
    pub v2: f64,
    /// Finite-difference estimate of `p` used to validate the closed form.
    pub p_numeric: f64,
    /// Finite-difference estimate of `σ²` used to validate the closed form.
    pub sigma2_numeric: f64,
}

/// Values as printed in the classical example catalog. Several of them
/// disagree with the exponents they accompany (missing factor 2 on `σ²`);
/// they are kept only so that reports can show the discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PublishedCumulants {
    pub sigma2: Option<f64>,
    pub v2: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")))
    }
}

impl FamilyKind {
    /// Default self-similarity index: 1 for the Brownian and compound
    /// Poisson families, the stable index for the stable families, κ for CBI.
    pub fn default_alpha(&self) -> f64 {
        match *self {
            FamilyKind::ConditionedStable { stable_index } => stable_index,
            FamilyKind::HypergeometricStable { stable_index, .. } => stable_index,
            FamilyKind::Cbi { kappa, .. } => kappa,
            _ => 1.0,
        }
    }

    /// Short name used in the family grammar and in CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::BrownianDrift { .. } => "bessel",
            FamilyKind::CpPosDrift { .. } => "cp+",
            FamilyKind::CpNegDrift { .. } => "cp-",
            FamilyKind::SawTooth { .. } => "saw",
            FamilyKind::ConditionedStable { .. } => "condstable",
            FamilyKind::HypergeometricStable { .. } => "hgstable",
            FamilyKind::Cbi { .. } => "cbi",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FamilyKind::BrownianDrift { nu } => positive("nu", nu),
            FamilyKind::CpPosDrift { drift, rate, jump } => {
                non_negative("d", drift)?;
                non_negative("a", rate)?;
                positive("b", jump)?;
                positive("p = d + a/b", drift + rate / jump)
            }
            FamilyKind::CpNegDrift { rate, jump } => {
                positive("a", rate)?;
                positive("b", jump)?;
                if jump >= rate {
                    return Err(Error::InvalidParameter(format!(
                        "cp- requires b < a, got a={rate}, b={jump}"
                    )));
                }
                Ok(())
            }
            FamilyKind::SawTooth { rate, jump } => {
                non_negative("a", rate)?;
                positive("b", jump)?;
                if jump <= rate {
                    return Err(Error::InvalidParameter(format!(
                        "saw requires b > a, got a={rate}, b={jump}"
                    )));
                }
                Ok(())
            }
            FamilyKind::ConditionedStable { stable_index } => {
                if stable_index > 1.0 && stable_index < 2.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "condstable requires alpha in (1, 2), got {stable_index}"
                    )))
                }
            }
            FamilyKind::HypergeometricStable { stable_index, dim } => {
                positive("alpha", stable_index)?;
                if dim <= stable_index || !dim.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "hgstable requires dim > alpha, got dim={dim}, alpha={stable_index}"
                    )));
                }
                Ok(())
            }
            FamilyKind::Cbi { kappa, delta, c } => {
                if !(kappa > 0.0 && kappa < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "cbi requires kappa in (0, 1), got {kappa}"
                    )));
                }
                positive("c", c)?;
                if !(delta > kappa / (kappa + 1.0)) {
                    return Err(Error::InvalidParameter(format!(
                        "cbi requires delta > kappa/(kappa+1), got {delta}"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl LevyFamily {
    pub fn new(kind: FamilyKind, alpha: f64) -> Result<Self> {
        kind.validate()?;
        positive("self-similarity index", alpha)?;
        Ok(Self { kind, alpha })
    }

    /// Family with its default self-similarity index.
    pub fn with_default_alpha(kind: FamilyKind) -> Result<Self> {
        Self::new(kind, kind.default_alpha())
    }

    /// Same Lévy process, different self-similarity index.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.kind, alpha)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Whether exact (or grid-exact) paths of `ξ` can be simulated.
    pub fn is_path_simulable(&self) -> bool {
        matches!(
            self.kind,
            FamilyKind::BrownianDrift { .. }
                | FamilyKind::CpPosDrift { .. }
                | FamilyKind::CpNegDrift { .. }
                | FamilyKind::SawTooth { .. }
        )
    }

    /// Open interval on which `ψ` is finite.
    pub fn psi_domain(&self) -> Interval {
        let inf = f64::INFINITY;
        match self.kind {
            FamilyKind::BrownianDrift { .. } => Interval { lo: -inf, hi: inf },
            FamilyKind::CpPosDrift { jump, .. } | FamilyKind::CpNegDrift { jump, .. } => {
                Interval { lo: -inf, hi: jump }
            }
            FamilyKind::SawTooth { jump, .. } => Interval { lo: -jump, hi: inf },
            FamilyKind::ConditionedStable { stable_index } => Interval {
                lo: -stable_index,
                hi: inf,
            },
            FamilyKind::HypergeometricStable { stable_index, dim } => Interval {
                lo: -dim,
                hi: stable_index,
            },
            FamilyKind::Cbi { kappa, .. } => Interval { lo: -inf, hi: kappa },
        }
    }

    /// Laplace exponent `ψ(m)`.
    ///
    /// The stable and CBI exponents are written as `m·g(m)` with the
    /// `Γ(±m)` pole cancelled analytically, so `ψ(0) = 0` exactly.
    pub fn psi(&self, m: f64) -> Result<f64> {
        let dom = self.psi_domain();
        if !dom.contains(m) {
            return Err(Error::Domain(format!(
                "m = {m} outside dom ψ = {dom} for {}",
                self.name()
            )));
        }
        Ok(match self.kind {
            FamilyKind::BrownianDrift { nu } => 2.0 * m * (m + nu),
            FamilyKind::CpPosDrift { drift, rate, jump } => m * (drift + rate / (jump - m)),
            FamilyKind::CpNegDrift { rate, jump } => m * (-1.0 + rate / (jump - m)),
            FamilyKind::SawTooth { rate, jump } => m * (1.0 - rate / (jump + m)),
            FamilyKind::ConditionedStable { stable_index } => {
                // Γ(m+α)/Γ(m) = m Γ(m+α)/Γ(m+1)
                m * gamma_ratio(&[m + stable_index], &[m + 1.0])?
            }
            FamilyKind::HypergeometricStable { stable_index: a, dim: d } => {
                // 1/Γ(-m/2) = (-m/2)/Γ(1-m/2)
                m * 2f64.powf(a - 1.0)
                    * gamma_ratio(&[(a - m) / 2.0, (m + d) / 2.0], &[1.0 - m / 2.0, (m + d - a) / 2.0])?
            }
            FamilyKind::Cbi { kappa, delta, c } => {
                // 1/Γ(-m) = -m/Γ(1-m)
                let s = (kappa + 1.0) * delta - kappa;
                c * m * (s + m) * gamma_ratio(&[kappa - m], &[1.0 - m])?
            }
        })
    }

    /// Closed-form `(p, σ²)`.
    pub fn cumulants_closed_form(&self) -> (f64, f64) {
        match self.kind {
            FamilyKind::BrownianDrift { nu } => (2.0 * nu, 4.0),
            FamilyKind::CpPosDrift { drift, rate, jump } => {
                (drift + rate / jump, 2.0 * rate / (jump * jump))
            }
            FamilyKind::CpNegDrift { rate, jump } => {
                ((rate - jump) / jump, 2.0 * rate / (jump * jump))
            }
            FamilyKind::SawTooth { rate, jump } => {
                ((jump - rate) / jump, 2.0 * rate / (jump * jump))
            }
            FamilyKind::ConditionedStable { stable_index: a } => {
                let g = ln_gamma(a).expect("validated").exp();
                let dg = digamma(a).expect("validated");
                (g, 2.0 * g * (dg + EULER_GAMMA))
            }
            FamilyKind::HypergeometricStable { stable_index: a, dim: d } => {
                let p = 2f64.powf(a - 1.0)
                    * (ln_gamma(a / 2.0).unwrap() + ln_gamma(d / 2.0).unwrap()
                        - ln_gamma((d - a) / 2.0).unwrap())
                    .exp();
                let bracket = digamma(d / 2.0).unwrap()
                    - digamma(a / 2.0).unwrap()
                    - EULER_GAMMA
                    - digamma((d - a) / 2.0).unwrap();
                (p, p * bracket)
            }
            FamilyKind::Cbi { kappa, delta, c } => {
                let s = (kappa + 1.0) * delta - kappa;
                let g = ln_gamma(kappa).unwrap().exp();
                let dg = digamma(kappa).unwrap();
                (c * s * g, 2.0 * c * g * (1.0 - s * (dg + EULER_GAMMA)))
            }
        }
    }

    /// Finite-difference `(ψ'(0), ψ''(0))`, two Richardson levels.
    ///
    /// The base step is `1e-3` shrunk by the distance from 0 to the nearest
    /// end of dom ψ so that every evaluation point stays inside the domain.
    pub fn cumulants_numeric(&self) -> Result<(f64, f64)> {
        let dom = self.psi_domain();
        let h = 1e-3 * dom.margin(0.0).min(1.0);
        let psi = |m: f64| self.psi(m).unwrap_or(f64::NAN);
        let (p, _) = richardson(|s| central_first(&psi, 0.0, s), h, 2);
        let (s2, _) = richardson(|s| central_second(&psi, 0.0, s), h, 2);
        if !p.is_finite() || !s2.is_finite() {
            return Err(Error::Domain(format!(
                "finite differences of ψ left the domain for {}",
                self.name()
            )));
        }
        Ok((p, s2))
    }

    /// `p`, `σ²` and the clock variance `v² = σ²/(αp³)`, cross-checked
    /// between the closed form and finite differences of `ψ`.
    pub fn cumulants(&self) -> Result<Cumulants> {
        let (p, sigma2) = self.cumulants_closed_form();
        let (p_numeric, sigma2_numeric) = self.cumulants_numeric()?;
        let agree = |a: f64, b: f64| {
            (a - b).abs() <= CUMULANT_TOLERANCE * a.abs().max(b.abs()) + 1e-9
        };
        if !agree(p, p_numeric) {
            return Err(Error::Inconsistency {
                what: format!("p for {}", self),
                closed: p,
                numerical: p_numeric,
            });
        }
        if !agree(sigma2, sigma2_numeric) {
            return Err(Error::Inconsistency {
                what: format!("sigma2 for {}", self),
                closed: sigma2,
                numerical: sigma2_numeric,
            });
        }
        Ok(Cumulants {
            p,
            sigma2,
            v2: sigma2 / (self.alpha * p * p * p),
            p_numeric,
            sigma2_numeric,
        })
    }

    /// `p = ψ'(0)` from the closed form, without the numerical cross-check.
    pub fn mean_drift(&self) -> f64 {
        self.cumulants_closed_form().0
    }

    pub fn published_cumulants(&self) -> PublishedCumulants {
        let alpha = self.alpha;
        match self.kind {
            FamilyKind::BrownianDrift { nu } => PublishedCumulants {
                sigma2: Some(4.0),
                v2: Some(1.0 / (4.0 * nu * nu * nu)),
            },
            FamilyKind::CpPosDrift { drift, rate, jump } => PublishedCumulants {
                sigma2: Some(rate / (jump * jump)),
                v2: Some(rate * jump.powi(3) / (rate + drift * jump).powi(3)),
            },
            FamilyKind::CpNegDrift { rate, jump } => PublishedCumulants {
                sigma2: Some(rate / (jump * jump)),
                v2: Some(rate * jump / (rate - jump).powi(3)),
            },
            FamilyKind::SawTooth { rate, jump } => PublishedCumulants {
                sigma2: Some(rate / (jump * jump)),
                v2: Some(rate * jump / (jump - rate).powi(3)),
            },
            FamilyKind::ConditionedStable { stable_index: a } => {
                let g = ln_gamma(a).unwrap().exp();
                let s2 = 2.0 * g * (digamma(a).unwrap() + EULER_GAMMA);
                PublishedCumulants {
                    sigma2: Some(s2),
                    v2: Some(s2 / (a * g * g * g)),
                }
            }
            FamilyKind::HypergeometricStable { stable_index: a, dim: d } => {
                let (p, _) = self.cumulants_closed_form();
                let s2 = p
                    * (1.0 - EULER_GAMMA - digamma((d - a) / 2.0).unwrap() - digamma(a / 2.0).unwrap());
                PublishedCumulants {
                    sigma2: Some(s2),
                    v2: Some(s2 / (alpha * p * p * p)),
                }
            }
            FamilyKind::Cbi { kappa, delta, c } => {
                let (p, _) = self.cumulants_closed_form();
                let g = ln_gamma(kappa).unwrap().exp();
                let dg = digamma(kappa).unwrap();
                let s2 = c * (g + (kappa - (kappa + 1.0) * delta) * (g * dg + EULER_GAMMA * g));
                PublishedCumulants {
                    sigma2: Some(s2),
                    v2: Some(s2 / (kappa * p * p * p)),
                }
            }
        }
    }
}

/// `Π Γ(num) / Π Γ(den)`; numerator arguments must be positive, a pole in
/// the denominator yields 0.
fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut log = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (lg, s) = ln_gamma_signed(x)?;
        log += lg;
        sign *= s;
    }
    for &x in den {
        match ln_gamma_signed(x) {
            Ok((lg, s)) => {
                log -= lg;
                sign *= s;
            }
            Err(_) => return Ok(0.0),
        }
    }
    Ok(sign * log.exp())
}

impl fmt::Display for LevyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::BrownianDrift { nu } => write!(f, "bessel(nu={nu})")?,
            FamilyKind::CpPosDrift { drift, rate, jump } => {
                write!(f, "cp+(d={drift},a={rate},b={jump})")?
            }
            FamilyKind::CpNegDrift { rate, jump } => write!(f, "cp-(a={rate},b={jump})")?,
            FamilyKind::SawTooth { rate, jump } => write!(f, "saw(a={rate},b={jump})")?,
            FamilyKind::ConditionedStable { stable_index } => {
                write!(f, "condstable(alpha={stable_index})")?
            }
            FamilyKind::HypergeometricStable { stable_index, dim } => {
                write!(f, "hgstable(alpha={stable_index},dim={dim})")?
            }
            FamilyKind::Cbi { kappa, delta, c } => {
                write!(f, "cbi(kappa={kappa},delta={delta},c={c})")?
            }
        }
        write!(f, "@alpha={}", self.alpha)
    }
}

impl FromStr for LevyFamily {
    type Err = Error;

    /// Parses `name(key=value,...)` optionally followed by `@alpha=value`.
    fn from_str(spec: &str) -> Result<Self> {
        let fail = |reason: String| Error::Parse {
            spec: spec.to_string(),
            reason,
        };
        let s: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
        let (body, alpha) = match s.split_once('@') {
            Some((body, suffix)) => {
                let v = suffix
                    .strip_prefix("alpha=")
                    .ok_or_else(|| fail(format!("expected @alpha=..., got @{suffix}")))?;
                let a: f64 = v
                    .parse()
                    .map_err(|_| fail(format!("bad alpha value {v:?}")))?;
                (body.to_string(), Some(a))
            }
            None => (s.clone(), None),
        };
        let open = body.find('(').ok_or_else(|| fail("missing '('".into()))?;
        if !body.ends_with(')') {
            return Err(fail("missing closing ')'".into()));
        }
        let name = &body[..open];
        let inner = &body[open + 1..body.len() - 1];
        let mut params: Vec<(String, f64)> = Vec::new();
        for item in inner.split(',').filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| fail(format!("expected key=value, got {item:?}")))?;
            let v: f64 = v
                .parse()
                .map_err(|_| fail(format!("bad number {v:?} for {k}")))?;
            if params.iter().any(|(key, _)| key == k) {
                return Err(fail(format!("duplicate key {k}")));
            }
            params.push((k.to_string(), v));
        }
        let allowed: &[&str] = match name {
            "bessel" => &["nu"],
            "cp+" => &["d", "a", "b"],
            "cp-" | "saw" => &["a", "b"],
            "condstable" => &["alpha"],
            "hgstable" => &["alpha", "dim"],
            "cbi" => &["kappa", "delta", "c"],
            other => return Err(fail(format!("unknown family {other:?}"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(fail(format!("unknown key {k:?} for {name}")));
        }
        let get = |k: &str| -> Result<f64> {
            params
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| *v)
                .ok_or_else(|| fail(format!("missing key {k:?}")))
        };
        let kind = match name {
            "bessel" => FamilyKind::BrownianDrift { nu: get("nu")? },
            "cp+" => FamilyKind::CpPosDrift {
                drift: get("d")?,
                rate: get("a")?,
                jump: get("b")?,
            },
            "cp-" => FamilyKind::CpNegDrift {
                rate: get("a")?,
                jump: get("b")?,
            },
            "saw" => FamilyKind::SawTooth {
                rate: get("a")?,
                jump: get("b")?,
            },
            "condstable" => FamilyKind::ConditionedStable {
                stable_index: get("alpha")?,
            },
            "hgstable" => FamilyKind::HypergeometricStable {
                stable_index: get("alpha")?,
                dim: get("dim")?,
            },
            "cbi" => FamilyKind::Cbi {
                kappa: get("kappa")?,
                delta: get("delta")?,
                c: get("c").unwrap_or(1.0),
            },
            _ => unreachable!(),
        };
        match alpha {
            Some(a) => LevyFamily::new(kind, a),
            None => LevyFamily::with_default_alpha(kind),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fam(s: &str) -> LevyFamily {
        s.parse().unwrap()
    }

    #[test]
    fn psi_examples() {
        assert_relative_eq!(fam("bessel(nu=1)").psi(1.0).unwrap(), 4.0);
        // 2·(1 − 1/4)
        assert_relative_eq!(fam("saw(a=1,b=2)").psi(2.0).unwrap(), 1.5);
    }

    #[test]
    fn psi_vanishes_at_zero_for_every_family() {
        for s in catalog() {
            assert_eq!(fam(s).psi(0.0).unwrap(), 0.0, "{s}");
        }
    }

    #[test]
    fn psi_rejects_points_outside_domain() {
        let f = fam("cp+(d=1,a=2,b=3)");
        assert!(matches!(f.psi(3.0), Err(Error::Domain(_))));
        assert!(f.psi(2.999).is_ok());
        assert!(fam("hgstable(alpha=1,dim=3)").psi(-3.0).is_err());
        assert!(fam("cbi(kappa=0.5,delta=0.9)").psi(0.5).is_err());
    }

    #[test]
    fn domains() {
        let d = fam("cp+(d=1,a=2,b=3)").psi_domain();
        assert_eq!((d.lo, d.hi), (f64::NEG_INFINITY, 3.0));
        let d = fam("bessel(nu=1)").psi_domain();
        assert_eq!((d.lo, d.hi), (f64::NEG_INFINITY, f64::INFINITY));
        let d = fam("hgstable(alpha=1,dim=3)").psi_domain();
        assert_eq!((d.lo, d.hi), (-3.0, 1.0));
    }

    #[test]
    fn cumulant_examples() {
        let c = fam("bessel(nu=1)").cumulants().unwrap();
        assert_eq!((c.p, c.sigma2, c.v2), (2.0, 4.0, 0.5));
        let c = fam("saw(a=1,b=2)").cumulants().unwrap();
        assert_relative_eq!(c.p, 0.5);
        assert_relative_eq!(c.sigma2, 0.5);
        assert_relative_eq!(c.v2, 4.0);
    }

    #[test]
    fn conditioned_stable_removable_singularity() {
        // ψ(-1) = 0 because 1/Γ(0) = 0
        let f = fam("condstable(alpha=1.5)");
        assert_eq!(f.psi(-1.0).unwrap(), 0.0);
        assert!(f.psi(-1.2).unwrap().is_finite());
    }

    #[test]
    fn hgstable_sign_change_at_two() {
        let f = fam("hgstable(alpha=2.5,dim=4)");
        assert!(f.psi(1.9).unwrap() > 0.0);
        assert!(f.psi(2.1).unwrap() < 0.0);
    }

    #[test]
    fn parse_round_trip_and_defaults() {
        let f = fam("cbi(kappa=0.5,delta=0.9)");
        assert_eq!(f.alpha(), 0.5);
        assert_eq!(f.kind(), FamilyKind::Cbi { kappa: 0.5, delta: 0.9, c: 1.0 });
        let g = fam("condstable(alpha=1.5)");
        assert_eq!(g.alpha(), 1.5);
        let h = fam("bessel(nu=2)@alpha=2");
        assert_eq!(h.alpha(), 2.0);
        for s in catalog() {
            let f = fam(s);
            assert_eq!(fam(&f.to_string()), f);
        }
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "bessel(nu=1",
            "bessel(mu=1)",
            "bessel(nu=x)",
            "gauss(nu=1)",
            "saw(a=2,b=1)",
            "cp-(a=1,b=2)",
            "bessel(nu=1)@beta=2",
            "saw(a=1,a=1,b=2)",
            "condstable(alpha=2.5)",
        ] {
            assert!(bad.parse::<LevyFamily>().is_err(), "{bad}");
        }
    }

    #[test]
    fn published_discrepancies() {
        let f = fam("bessel(nu=1)");
        assert_eq!(f.published_cumulants().v2, Some(0.25));
        let s = fam("saw(a=1,b=2)");
        assert_eq!(s.published_cumulants().sigma2, Some(0.25));
        // Only the conditioned stable printed values agree with ψ.
        let c = fam("condstable(alpha=1.5)");
        let cum = c.cumulants().unwrap();
        assert_relative_eq!(c.published_cumulants().v2.unwrap(), cum.v2, max_relative = 1e-12);
    }

    pub(crate) fn catalog() -> [&'static str; 7] {
        [
            "bessel(nu=1)",
            "cp+(d=1,a=2,b=3)",
            "cp-(a=3,b=1)",
            "saw(a=1,b=2)",
            "condstable(alpha=1.5)",
            "hgstable(alpha=1,dim=3)",
            "cbi(kappa=0.5,delta=0.9,c=1)",
        ]
    }
}

//! Monte Carlo experiments for the law of large numbers and the functional
//! CLT of the clock `∫ ds/X^α(s)`.
//!
//! With `L = log T` the rescaled clock is
//! `W(t) = L^{−1/2}(∫₁^{T^t} ds/X^α(s) − tL/(αp))`. Under `Q_a` the clock
//! from time 0 to `s` equals `τ(s·a^{−α})`, `τ` being the inverse of
//! `u ↦ ∫₀^u e^{αξ_r} dr`, so every level is handled as `log s − α log a`.
//! Under `Q₀` the process is restarted at time 1 from an entrance draw
//! `X₁` and the clock of the fresh process is read at `T^t − 1`.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expfun::{i_inf_sampler, sample_entrance_x1, IInfLaw};
use crate::levy::LevyFamily;
use crate::path::{tau_at_log_levels, ExtensionPolicy, PathSource, DEFAULT_DT};
use crate::rng::{replica_rng, sub_seed};
use crate::stats::{jackknife_covariance, ks_one_sample, mean_se, normal_cdf, KsResult};

pub const DEFAULT_T_GRID: [f64; 6] = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
/// KS p-value below which Gaussianity is rejected.
pub const KS_LEVEL: f64 = 0.01;
/// Standard errors allowed in moment checks.
pub const SE_MULTIPLIER: f64 = 4.0;
/// Finite-horizon allowance `BIAS_MULTIPLIER·v²/√L` in variance checks.
pub const BIAS_MULTIPLIER: f64 = 3.0;
/// LLN tolerance in units of `√(v²/L)`.
pub const LLN_MULTIPLIER: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regime {
    Qa { a: f64 },
    Q0,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Qa { .. } => "qa",
            Regime::Q0 => "q0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: LevyFamily,
    pub regime: Regime,
    pub log_t: f64,
    pub t_grid: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub dt: f64,
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(family: LevyFamily, regime: Regime, log_t: f64, replicas: usize, seed: u64) -> Self {
        ExperimentConfig {
            family,
            regime,
            log_t,
            t_grid: DEFAULT_T_GRID.to_vec(),
            replicas,
            seed,
            dt: DEFAULT_DT,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.log_t > 0.0 && self.log_t.is_finite()) {
            return bad(format!("logT must be positive, got {}", self.log_t));
        }
        if self.replicas < 2 {
            return bad(format!("need at least 2 replicas, got {}", self.replicas));
        }
        if self.t_grid.is_empty()
            || self.t_grid[0] <= 0.0
            || self.t_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return bad(format!("t grid must be positive and strictly increasing: {:?}", self.t_grid));
        }
        if !(self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if let Regime::Qa { a } = self.regime {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("starting point a must be positive, got {a}"));
            }
        }
        if !self.family.is_path_simulable() {
            return bad(format!("{} has no path simulator", self.family.name()));
        }
        Ok(())
    }
}

/// `ln(e^y − 1)` without overflow.
fn ln_expm1(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Per-replica context shared by all replicas of one experiment.
struct Shared {
    v_rate: f64,
    policy: ExtensionPolicy,
    entrance: Option<IInfLaw>,
}

fn shared(config: &ExperimentConfig) -> Result<Shared> {
    let family = &config.family;
    let entrance = match config.regime {
        Regime::Q0 => Some(i_inf_sampler(family).ok_or_else(|| {
            Error::Config(format!("{} has no sampler for the entrance law", family.name()))
        })?),
        Regime::Qa { .. } => None,
    };
    Ok(Shared {
        v_rate: 1.0 / (family.alpha() * family.mean_drift()),
        policy: ExtensionPolicy::for_family(family),
        entrance,
    })
}

fn replica_with(config: &ExperimentConfig, shared: &Shared, index: usize) -> Result<Vec<f64>> {
    let family = &config.family;
    let alpha = family.alpha();
    let l = config.log_t;
    let mut rng = replica_rng(config.seed, index as u64);
    let mut source = PathSource::for_family(family, config.dt)?
        .ok_or_else(|| Error::Config(format!("{} has no path simulator", family.name())))?;
    let (levels, offset_index) = match config.regime {
        Regime::Qa { a } => {
            let shift = alpha * a.ln();
            let mut levels = vec![-shift];
            levels.extend(config.t_grid.iter().map(|t| l * t - shift));
            (levels, true)
        }
        Regime::Q0 => {
            let law = shared.entrance.as_ref().expect("entrance law built for Q0");
            let x1 = sample_entrance_x1(law, &mut rng)?;
            let shift = alpha * x1.ln();
            let levels = config.t_grid.iter().map(|t| ln_expm1(l * t) - shift).collect();
            (levels, false)
        }
    };
    let taus = tau_at_log_levels(&mut source, &mut rng, alpha, &levels, &shared.policy)?;
    let (base, taus) = if offset_index {
        (taus[0], &taus[1..])
    } else {
        (0.0, &taus[..])
    };
    let scale = l.sqrt();
    Ok(config
        .t_grid
        .iter()
        .zip(taus)
        .map(|(t, tau)| (tau - base - t * l * shared.v_rate) / scale)
        .collect())
}

/// Rescaled clock `W(t)` over the grid for one replica.
pub fn run_replica(config: &ExperimentConfig, index: usize) -> Result<Vec<f64>> {
    config.validate()?;
    replica_with(config, &shared(config)?, index)
}

/// All replicas of an experiment, in replica order.
#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    /// `paths[i][j] = W(t_j)` for replica `i`.
    pub paths: Vec<Vec<f64>>,
    pub v2: f64,
    pub seconds: f64,
}

impl ExperimentRun {
    /// Samples of `W(t_j)` across replicas.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p[j]).collect()
    }

    pub fn grid_index(&self, t: f64) -> Option<usize> {
        self.config.t_grid.iter().position(|&s| s == t)
    }
}

/// Runs every replica on a pool of `config.workers` threads. The result
/// does not depend on the number of workers.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let v2 = config.family.cumulants()?.v2;
    let ctx = shared(config)?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let paths = pool.install(|| {
        (0..config.replicas)
            .into_par_iter()
            .map(|i| replica_with(config, &ctx, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ExperimentRun {
        config: config.clone(),
        paths,
        v2,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Moment checks of `W(t)` against `N(0, v²t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalRow {
    pub t: f64,
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub target: f64,
    pub mean_pass: bool,
    pub var_pass: bool,
}

impl MarginalRow {
    pub fn pass(&self) -> bool {
        self.mean_pass && self.var_pass
    }
}

/// `|var − v²t| ≤ 4·SE + 3v²t/√L` and `|mean| ≤ 4·SE + 3√(v²t)/√L`.
/// An infinite `log_t` removes the finite-horizon allowance.
pub fn marginal_row(t: f64, xs: &[f64], v2: f64, log_t: f64) -> MarginalRow {
    let target = v2 * t;
    let (mean, mean_se) = mean_se(xs);
    let (var, var_se) = jackknife_covariance(xs, xs);
    let root_l = log_t.sqrt();
    let var_pass = (var - target).abs() <= SE_MULTIPLIER * var_se + BIAS_MULTIPLIER * target / root_l;
    let mean_pass = mean.abs() <= SE_MULTIPLIER * mean_se + BIAS_MULTIPLIER * target.sqrt() / root_l;
    MarginalRow {
        t,
        mean,
        mean_se,
        var,
        var_se,
        target,
        mean_pass,
        var_pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltReport {
    pub row: MarginalRow,
    pub ks: KsResult,
    pub pass: bool,
}

/// Variance, centring and KS checks of samples of `W(1)` against `N(0, v²)`.
pub fn clt_test(samples: &[f64], v2: f64, log_t: f64) -> CltReport {
    let row = marginal_row(1.0, samples, v2, log_t);
    let ks = gaussian_ks(samples, v2);
    CltReport {
        row,
        ks,
        pass: row.pass() && ks.p_value > KS_LEVEL,
    }
}

/// KS of `xs/v` against the standard normal. A zero variance is tested
/// against the point mass at 0.
pub fn gaussian_ks(xs: &[f64], v2: f64) -> KsResult {
    if v2 > 0.0 {
        let v = v2.sqrt();
        ks_one_sample(xs, |x| normal_cdf(x / v))
    } else {
        ks_one_sample(xs, |x| if x < 0.0 { 0.0 } else { 1.0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FcltReport {
    pub t_grid: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub cov_se: Vec<Vec<f64>>,
    pub pair_pass: Vec<Vec<bool>>,
    /// Times of the tested increment.
    pub increment: (f64, f64),
    pub increment_ks: KsResult,
    pub pass: bool,
}

/// Covariance of `W` over the grid against `v² min(s, t)`, plus a KS test
/// of the increment between `t = 1` and `t = 2` (or the last two grid
/// points when those are absent). Diagonal entries use the marginal rule.
pub fn fclt_covariance_test(paths: &[Vec<f64>], t_grid: &[f64], v2: f64, log_t: f64) -> FcltReport {
    let k = t_grid.len();
    let cols: Vec<Vec<f64>> = (0..k).map(|j| paths.iter().map(|p| p[j]).collect()).collect();
    let mut cov = vec![vec![0.0; k]; k];
    let mut cov_se = vec![vec![0.0; k]; k];
    let mut pair_pass = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i..k {
            let (c, se) = jackknife_covariance(&cols[i], &cols[j]);
            let target = v2 * t_grid[i].min(t_grid[j]);
            let ok = if i == j {
                marginal_row(t_grid[i], &cols[i], v2, log_t).var_pass
            } else {
                (c - target).abs() <= SE_MULTIPLIER * se
            };
            for (a, b) in [(i, j), (j, i)] {
                cov[a][b] = c;
                cov_se[a][b] = se;
                pair_pass[a][b] = ok;
            }
        }
    }
    let pos = |t: f64| t_grid.iter().position(|&s| s == t);
    let (i1, i2) = match (pos(1.0), pos(2.0)) {
        (Some(a), Some(b)) => (a, b),
        _ => (k.saturating_sub(2), k - 1),
    };
    let incr: Vec<f64> = paths.iter().map(|p| p[i2] - p[i1]).collect();
    let increment_ks = gaussian_ks(&incr, v2 * (t_grid[i2] - t_grid[i1]));
    let pass = pair_pass.iter().flatten().all(|&b| b) && increment_ks.p_value > KS_LEVEL;
    FcltReport {
        t_grid: t_grid.to_vec(),
        cov,
        cov_se,
        pair_pass,
        increment: (t_grid[i1], t_grid[i2]),
        increment_ks,
        pass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LlnRow {
    pub log_t: f64,
    pub ratio: f64,
    pub target: f64,
    pub deviation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReport {
    pub rows: Vec<LlnRow>,
    pub pass: bool,
}

/// One path from `a`, read at `T = e^L` for each `L` in `l_list`; checks
/// `clock(T)/L` against `(αp)^{−1}` at the largest `L`.
pub fn lln_check(
    family: &LevyFamily,
    a: f64,
    l_list: &[f64],
    seed: u64,
    dt: f64,
) -> Result<LlnReport> {
    if l_list.is_empty() || l_list.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Config(format!("L list must be positive and non-empty: {l_list:?}")));
    }
    if !(a > 0.0) {
        return Err(Error::Config(format!("starting point a must be positive, got {a}")));
    }
    let alpha = family.alpha();
    let v2 = family.cumulants()?.v2;
    let target = 1.0 / (alpha * family.mean_drift());
    let mut sorted = l_list.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut source = PathSource::for_family(family, dt)?
        .ok_or_else(|| Error::Config(format!("{} has no path simulator", family.name())))?;
    let mut rng = replica_rng(sub_seed(seed, "lln"), 0);
    let levels: Vec<f64> = sorted.iter().map(|l| l - alpha * a.ln()).collect();
    let policy = ExtensionPolicy::for_family(family);
    let taus = tau_at_log_levels(&mut source, &mut rng, alpha, &levels, &policy)?;
    let rows: Vec<LlnRow> = sorted
        .iter()
        .zip(taus)
        .map(|(&l, tau)| {
            let ratio = tau / l;
            LlnRow {
                log_t: l,
                ratio,
                target,
                deviation: ratio - target,
                tolerance: LLN_MULTIPLIER * (v2 / l).sqrt(),
            }
        })
        .collect();
    let last = rows.last().expect("non-empty");
    let pass = last.deviation.abs() <= last.tolerance;
    Ok(LlnReport { rows, pass })
}

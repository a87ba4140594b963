//! Self-contained verification runs: normalisation of the exponential
//! functional, the Mellin recursion, and the LLN/CLT experiments bundled
//! with their verdicts.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expfun::{closed_form_law, i_inf_sampler, mc_truncated_law, sample_i_inf, IInfLaw};
use crate::harness::{clt_test, fclt_covariance_test, run_experiment, CltReport, ExperimentConfig, ExperimentRun, FcltReport, KS_LEVEL};
use crate::levy::LevyFamily;
use crate::mellin::{recursion_residual_estimate, MellinFunction, SampledMellin};
use crate::rng::{replica_rng, sub_seed};
use crate::stats::{ks_two_sample, mean_se};

/// Standard errors allowed between the mean of `I∞^{−1}` and `αp`.
pub const NORMALIZATION_SE: f64 = 3.0;
/// Absolute tolerance on the recursion residual for closed forms.
pub const CLOSED_RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Standard errors allowed on the residual for sampled transforms.
pub const SAMPLED_RESIDUAL_SE: f64 = 4.0;

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

/// `n` draws of `I∞`, draw `i` on stream `i` of `seed`.
pub fn sample_i_inf_batch(law: &IInfLaw, n: usize, seed: u64, workers: usize) -> Result<Vec<f64>> {
    pool(workers)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| sample_i_inf(law, &mut replica_rng(seed, i as u64)))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IInfCheck {
    pub family: String,
    pub alpha: f64,
    pub n: usize,
    pub mean_inverse: f64,
    pub alpha_p: f64,
    pub se: f64,
    /// Two-sample KS p-value, closed form vs truncated integral.
    pub ks_p: Option<f64>,
    pub normalization_pass: bool,
    pub pass: bool,
}

/// Mean of `I∞^{−1}` over `n` draws against `αp`, and, when the family has
/// both a closed form and a path simulator, a two-sample KS test of `n_ks`
/// closed-form draws against `n_ks` truncated-integral draws.
pub fn iinf_check(
    family: &LevyFamily,
    n: usize,
    n_ks: usize,
    seed: u64,
    workers: usize,
    dt: f64,
) -> Result<IInfCheck> {
    let law = i_inf_sampler(family).ok_or_else(|| {
        Error::Config(format!("{} has no sampler for the exponential functional", family.name()))
    })?;
    let draws = sample_i_inf_batch(&law, n, sub_seed(seed, "iinf"), workers)?;
    let inv: Vec<f64> = draws.iter().map(|i| 1.0 / i).collect();
    let (mean_inverse, se) = mean_se(&inv);
    let alpha_p = family.alpha() * family.mean_drift();
    let normalization_pass = (mean_inverse - alpha_p).abs() <= NORMALIZATION_SE * se;
    let ks_p = match (closed_form_law(family), mc_truncated_law(family, dt)) {
        (Some(_), Some(mc)) if n_ks > 0 => {
            let a = sample_i_inf_batch(&law, n_ks, sub_seed(seed, "iinf-ks-closed"), workers)?;
            let b = sample_i_inf_batch(&mc, n_ks, sub_seed(seed, "iinf-ks-mc"), workers)?;
            Some(ks_two_sample(&a, &b).p_value)
        }
        _ => None,
    };
    Ok(IInfCheck {
        family: family.name().to_string(),
        alpha: family.alpha(),
        n,
        mean_inverse,
        alpha_p,
        se,
        ks_p,
        normalization_pass,
        pass: normalization_pass && ks_p.is_none_or(|p| p > KS_LEVEL),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinRow {
    pub z: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Default evaluation points `z = 0.1, 0.2, …, 2.0`.
pub fn default_mellin_points() -> Vec<f64> {
    (1..=20).map(|k| k as f64 / 10.0).collect()
}

/// The Mellin transform used for checks: closed form when available,
/// otherwise `n` draws of the sampler.
pub fn mellin_for(family: &LevyFamily, n: usize, seed: u64) -> Result<MellinFunction> {
    if let Some(c) = closed_form_law(family) {
        return Ok(MellinFunction::ClosedForm(c));
    }
    let law = i_inf_sampler(family).ok_or_else(|| {
        Error::Config(format!("{} has no Mellin transform available", family.name()))
    })?;
    let mut rng = replica_rng(sub_seed(seed, "mellin"), 0);
    Ok(MellinFunction::Sampled(SampledMellin::from_law(&law, n, &mut rng)?))
}

/// Recursion residual at each admissible `z`; points where `M(z+1)` or
/// `ψ(αz)` is undefined are skipped.
pub fn mellin_check(family: &LevyFamily, m: &MellinFunction, points: &[f64]) -> Vec<MellinRow> {
    let closed = matches!(m, MellinFunction::ClosedForm(_));
    points
        .iter()
        .filter_map(|&z| {
            let est = recursion_residual_estimate(family, m, z).ok()?;
            let tolerance = if closed {
                CLOSED_RESIDUAL_TOLERANCE
            } else {
                SAMPLED_RESIDUAL_SE * est.se
            };
            Some(MellinRow {
                z,
                residual: est.value,
                tolerance,
                pass: est.value.abs() <= tolerance,
            })
        })
        .collect()
}

/// An experiment together with its marginal and covariance verdicts.
#[derive(Debug, Clone)]
pub struct CltOutcome {
    pub run: ExperimentRun,
    pub clt: CltReport,
    pub fclt: FcltReport,
}

impl CltOutcome {
    pub fn pass(&self) -> bool {
        self.clt.pass && self.fclt.pass
    }
}

/// Runs `config` and tests `W(1)` and the covariance over the grid.
pub fn clt_experiment(config: &ExperimentConfig) -> Result<CltOutcome> {
    let run = run_experiment(config)?;
    let j = run
        .grid_index(1.0)
        .ok_or_else(|| Error::Config("t grid must contain 1".into()))?;
    let clt = clt_test(&run.column(j), run.v2, config.log_t);
    let fclt = fclt_covariance_test(&run.paths, &config.t_grid, run.v2, config.log_t);
    Ok(CltOutcome { run, clt, fclt })
}

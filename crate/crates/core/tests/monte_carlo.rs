//! Monte Carlo invariants that need more than a handful of draws.

use lamperti_core::checks::{iinf_check, mellin_check, mellin_for, sample_i_inf_batch};
use lamperti_core::ergodicity::{generator_u_apply, TestFunction};
use lamperti_core::expfun::{i_inf_sampler, mc_truncated_law, sample_entrance_batch, IInfLaw};
use lamperti_core::harness::{run_experiment, ExperimentConfig, Regime, KS_LEVEL};
use lamperti_core::mellin::{v2_via_mellin, MellinFunction, SampledMellin};
use lamperti_core::rng::replica_rng;
use lamperti_core::stats::{ks_two_sample, mean_se};
use lamperti_core::LevyFamily;

fn fam(s: &str) -> LevyFamily {
    s.parse().unwrap()
}

/// Mean of `L^U f_m` under the invariant law of `U`, with its SE.
fn stationarity(s: &str, m: f64, n: usize) -> (f64, f64) {
    let f = fam(s);
    let law = i_inf_sampler(&f).unwrap();
    let xs = sample_entrance_batch(&law, n, &mut replica_rng(41, 0)).unwrap();
    let vals: Vec<f64> = xs
        .iter()
        .map(|&x| generator_u_apply(&f, TestFunction::Power(m), x).unwrap())
        .collect();
    mean_se(&vals)
}

#[test]
fn invariant_law_is_stationary_for_the_generator() {
    for (s, m) in [
        ("bessel(nu=1)", 0.5),
        ("saw(a=1,b=2)", 0.5),
        ("cp+(d=1,a=2,b=3)", 0.5),
        ("cp-(a=3,b=1)", 0.5),
        ("bessel(nu=1)@alpha=2", 1.0),
    ] {
        let (mean, se) = stationarity(s, m, 200_000);
        assert!(mean.abs() < 4.0 * se, "{s} m={m}: {mean} ± {se}");
    }
}

#[test]
fn stationarity_rejects_the_alpha_m_coefficient() {
    // at α = 2 the coefficient αm in place of m/α leaves the residual
    // −(αm − m/α)·𝔼[U^m] = −1.5·𝔼[U]
    let f = fam("bessel(nu=1)@alpha=2");
    let law = i_inf_sampler(&f).unwrap();
    let xs = sample_entrance_batch(&law, 200_000, &mut replica_rng(42, 0)).unwrap();
    let m = 1.0;
    let alt: Vec<f64> = xs
        .iter()
        .map(|&x| f.psi(m).unwrap() * x.powf(m - 2.0) - 2.0 * m * x.powf(m))
        .collect();
    let (mean, se) = mean_se(&alt);
    assert!(mean.abs() > 20.0 * se, "{mean} ± {se}");
}

#[test]
fn size_biased_law_has_the_right_negative_moment() {
    // 𝔼_entrance[X₁^{−α}] = 1/(αp)
    for s in ["bessel(nu=1)", "saw(a=1,b=2)", "cp+(d=2,a=1,b=3)@alpha=0.5", "cp-(a=3,b=1)"] {
        let f = fam(s);
        let law = i_inf_sampler(&f).unwrap();
        let xs = sample_entrance_batch(&law, 100_000, &mut replica_rng(7, 0)).unwrap();
        let v: Vec<f64> = xs.iter().map(|x| x.powf(-f.alpha())).collect();
        let (mean, se) = mean_se(&v);
        let target = 1.0 / (f.alpha() * f.mean_drift());
        assert!((mean - target).abs() < 4.0 * se, "{s}: {mean} ± {se} vs {target}");
    }
}

#[test]
fn closed_forms_match_truncated_integrals_beyond_unit_drift_and_alpha() {
    for s in ["cp+(d=2,a=1,b=3)", "cp+(d=0.5,a=2,b=1)@alpha=2", "saw(a=1,b=3)@alpha=0.5", "cp-(a=2,b=1)@alpha=2"] {
        let f = fam(s);
        let c = iinf_check(&f, 20_000, 5000, 3, 1, 1e-3).unwrap();
        assert!(c.pass, "{s}: {c:?}");
    }
}

#[test]
fn brownian_step_halving_leaves_the_functional_unchanged() {
    let f = fam("bessel(nu=1)");
    let coarse = mc_truncated_law(&f, 2e-3).unwrap();
    let fine = mc_truncated_law(&f, 1e-3).unwrap();
    let a = sample_i_inf_batch(&coarse, 4000, 5, 1).unwrap();
    let b = sample_i_inf_batch(&fine, 4000, 6, 1).unwrap();
    let ks = ks_two_sample(&a, &b);
    assert!(ks.p_value > KS_LEVEL, "{ks:?}");
    let (ma, sa) = mean_se(&a);
    let (mb, sb) = mean_se(&b);
    assert!((ma - mb).abs() < 4.0 * (sa * sa + sb * sb).sqrt());
}

#[test]
fn sampled_mellin_for_a_family_without_closed_form() {
    let f = fam("cp+(d=0,a=2,b=3)");
    assert!(matches!(i_inf_sampler(&f), Some(IInfLaw::McTruncated { .. })));
    let m = mellin_for(&f, 20_000, 8).unwrap();
    let rows = mellin_check(&f, &m, &[0.2, 0.5, 1.0, 1.5]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.pass), "{rows:?}");
}

#[test]
fn sampled_mellin_variance_matches_closed_form() {
    let f = fam("bessel(nu=1)");
    let law = i_inf_sampler(&f).unwrap();
    let s = SampledMellin::from_law(&law, 1_000_000, &mut replica_rng(9, 0)).unwrap();
    let est = v2_via_mellin(&f, &MellinFunction::Sampled(s)).unwrap();
    assert!((est.value - 0.5).abs() < 4.0 * est.se + 1e-3, "{est:?}");
}

#[test]
fn qa_limit_does_not_depend_on_the_start() {
    for s in ["saw(a=1,b=2)", "cp-(a=3,b=1)"] {
        let run = |a: f64, seed: u64| {
            let cfg = ExperimentConfig::new(fam(s), Regime::Qa { a }, 400.0, 4000, seed);
            let r = run_experiment(&cfg).unwrap();
            r.column(r.grid_index(1.0).unwrap())
        };
        let ks = ks_two_sample(&run(1.0, 77), &run(std::f64::consts::E, 78));
        assert!(ks.p_value > KS_LEVEL, "{s}: {ks:?}");
    }
}

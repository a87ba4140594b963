use lamperti_core::ergodicity::{quenched_criterion, witness_is_sound, Classification};
use lamperti_core::expfun::closed_form_law;
use lamperti_core::mellin::{recursion_residual, MellinFunction};
use lamperti_core::path::{sample_bm_path, sample_cp_path, tau_at_log_levels, ExpFunctional, ExtensionPolicy, PathSource, PiecewiseLinearPath};
use lamperti_core::LevyFamily;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fam(s: &str) -> LevyFamily {
    s.parse().unwrap()
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(2.0)]
}

fn path_for(kind: u8, alpha: f64, seed: u64) -> PiecewiseLinearPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        0 => sample_cp_path(&fam(&format!("saw(a=1,b=2)@alpha={alpha}")), 20.0, &mut rng).unwrap(),
        1 => sample_cp_path(&fam(&format!("cp-(a=3,b=1)@alpha={alpha}")), 20.0, &mut rng).unwrap(),
        _ => sample_bm_path(1.0, 0.01, 5.0, &mut rng).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tau_inverts_the_exponential_functional(
        kind in 0u8..3,
        alpha in alpha_strategy(),
        seed in any::<u64>(),
        frac in 0.01f64..0.99,
    ) {
        let path = path_for(kind, alpha, seed);
        let a = ExpFunctional::new(&path, alpha);
        let u = frac * path.horizon();
        let level = a.log_value(u);
        let back = a.inverse_log(level).unwrap();
        prop_assert!((back - u).abs() <= 1e-9 * path.horizon(), "{back} vs {u}");
        let again = a.log_value(back);
        prop_assert!((again - level).abs() <= 1e-10 * level.abs().max(1.0));
    }

    #[test]
    fn functional_and_inverse_are_increasing(
        kind in 0u8..3,
        alpha in alpha_strategy(),
        seed in any::<u64>(),
    ) {
        let path = path_for(kind, alpha, seed);
        let a = ExpFunctional::new(&path, alpha);
        let us: Vec<f64> = (1..=50).map(|k| path.horizon() * k as f64 / 50.0).collect();
        let vals: Vec<f64> = us.iter().map(|&u| a.log_value(u)).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] < w[1]));
        let taus: Vec<f64> = vals.iter().map(|&v| a.inverse_log(v - 0.5).unwrap()).collect();
        prop_assert!(taus.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn streaming_clock_is_monotone_in_level(
        alpha in alpha_strategy(),
        seed in any::<u64>(),
        l in 1.0f64..60.0,
    ) {
        let f = fam(&format!("saw(a=1,b=2)@alpha={alpha}"));
        let mut src = PathSource::for_family(&f, 1e-3).unwrap().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels: Vec<f64> = (0..8).map(|k| l * k as f64 / 7.0).collect();
        let taus = tau_at_log_levels(&mut src, &mut rng, alpha, &levels, &ExtensionPolicy::for_family(&f)).unwrap();
        prop_assert!(taus.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(taus.iter().all(|t| t.is_finite() && *t >= 0.0));
    }

    #[test]
    fn witnesses_are_sound(
        nu in 0.1f64..3.0,
        d in 0.2f64..3.0,
        rate in 0.1f64..4.0,
        jump in 0.2f64..4.0,
        stable in 0.6f64..1.99,
        dim in 2.0f64..6.0,
        alpha in 0.3f64..3.0,
    ) {
        let specs = [
            format!("bessel(nu={nu})@alpha={alpha}"),
            format!("cp+(d={d},a={rate},b={jump})@alpha={alpha}"),
            format!("saw(a={rate},b={})@alpha={alpha}", rate + jump),
            format!("cp-(a={},b={jump})@alpha={alpha}", rate + jump),
            format!("hgstable(alpha={stable},dim={dim})"),
        ];
        for s in specs {
            let f = fam(&s);
            let v = quenched_criterion(&f);
            match v.witness {
                Some(m) => prop_assert!(witness_is_sound(&f, v.classification, m), "{s}: {m}"),
                None => prop_assert_eq!(v.classification, Classification::CriterionFails),
            }
        }
    }

    #[test]
    fn closed_form_mellin_is_positive_with_unit_mass(
        nu in 0.1f64..3.0,
        rate in 0.1f64..4.0,
        jump in 0.2f64..4.0,
        alpha in 0.3f64..3.0,
        z in 0.05f64..0.95,
    ) {
        for s in [
            format!("bessel(nu={nu})@alpha={alpha}"),
            format!("saw(a={rate},b={})@alpha={alpha}", rate + jump),
            format!("cp+(d=1,a={rate},b={jump})@alpha={alpha}"),
            format!("cp-(a={},b={jump})@alpha={alpha}", rate + jump),
        ] {
            let f = fam(&s);
            let law = closed_form_law(&f).unwrap();
            prop_assert!((law.mellin(0.0).unwrap() - 1.0).abs() < 1e-13);
            let m = MellinFunction::ClosedForm(law);
            let iv = law.mellin_interval();
            if iv.contains(z) && iv.contains(z + 1.0) && f.psi_domain().contains(alpha * z) {
                prop_assert!(law.mellin(z).unwrap() > 0.0);
                let r = recursion_residual(&f, &m, z).unwrap();
                let scale = (z * law.mellin(z + 1.0).unwrap()).abs().max(1.0);
                prop_assert!(r.abs() < 1e-9 * scale, "{s} z={z}: {r}");
            }
        }
    }

    #[test]
    fn family_specs_round_trip(
        nu in 0.1f64..3.0,
        rate in 0.1f64..4.0,
        jump in 0.2f64..4.0,
        alpha in 0.3f64..3.0,
    ) {
        for s in [
            format!("bessel(nu={nu})@alpha={alpha}"),
            format!("cp+(d=1,a={rate},b={jump})"),
            format!("saw(a={rate},b={})@alpha={alpha}", rate + jump),
        ] {
            let f = fam(&s);
            let again: LevyFamily = f.to_string().parse().unwrap();
            prop_assert_eq!(f, again);
        }
    }
}

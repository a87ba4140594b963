//! Summary statistics, jackknife errors and Kolmogorov–Smirnov tests.

use serde::Serialize;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    (mean(xs), (variance(xs) / xs.len() as f64).sqrt())
}

/// Sample covariance with its delete-one jackknife standard error.
pub fn jackknife_covariance(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 3, "jackknife needs at least 3 samples");
    let nf = n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let cx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let cy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let sx: f64 = cx.iter().sum();
    let sy: f64 = cy.iter().sum();
    let sxy: f64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();
    let full = (sxy - sx * sy / nf) / (nf - 1.0);
    let m = nf - 1.0;
    let loo: Vec<f64> = cx
        .iter()
        .zip(&cy)
        .map(|(a, b)| {
            let (sx_i, sy_i, sxy_i) = (sx - a, sy - b, sxy - a * b);
            (sxy_i - sx_i * sy_i / m) / (m - 1.0)
        })
        .collect();
    let loo_mean = mean(&loo);
    let ss: f64 = loo.iter().map(|c| (c - loo_mean) * (c - loo_mean)).sum();
    (full, ((nf - 1.0) / nf * ss).sqrt())
}

/// Asymptotic Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

fn ks_p(d: f64, effective_n: f64) -> f64 {
    let s = effective_n.sqrt();
    kolmogorov_survival((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test against a continuous distribution function.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> KsResult {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    KsResult {
        statistic: d,
        p_value: ks_p(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> KsResult {
    let a = sorted(xs);
    let b = sorted(ys);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    KsResult {
        statistic: d,
        p_value: ks_p(d, n * m / (n + m)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64, shift: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z + shift
            })
            .collect()
    }

    #[test]
    fn normal_cdf_values() {
        assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(normal_cdf(1.959_963_984_540_054), 0.975, epsilon = 1e-12);
        assert_abs_diff_eq!(normal_cdf(-1.0), 0.158_655_253_931_457_05, epsilon = 1e-14);
    }

    #[test]
    fn kolmogorov_known_quantiles() {
        // 5% and 1% critical values of the Kolmogorov distribution
        assert_abs_diff_eq!(kolmogorov_survival(1.3581), 0.05, epsilon = 1e-4);
        assert_abs_diff_eq!(kolmogorov_survival(1.6276), 0.01, epsilon = 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn ks_calibration_and_power() {
        let ok = ks_one_sample(&normals(2000, 1, 0.0), normal_cdf);
        assert!(ok.p_value > 0.01, "{ok:?}");
        let bad = ks_one_sample(&normals(1000, 2, 1.0), normal_cdf);
        assert!(bad.p_value < 0.01, "{bad:?}");
        let two = ks_two_sample(&normals(2000, 3, 0.0), &normals(1500, 4, 0.0));
        assert!(two.p_value > 0.01, "{two:?}");
        let two = ks_two_sample(&normals(2000, 3, 0.0), &normals(1500, 4, 0.3));
        assert!(two.p_value < 0.01, "{two:?}");
    }

    #[test]
    fn two_sample_statistic_by_hand() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[2.5, 3.5]);
        // ECDF gap peaks at x = 2: 2/3 − 0
        assert_abs_diff_eq!(r.statistic, 2.0 / 3.0, epsilon = 1e-15);
        let r = ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let xs = normals(50, 9, 0.0);
        let ys: Vec<f64> = xs.iter().zip(normals(50, 10, 0.0)).map(|(x, e)| x + 0.5 * e).collect();
        let (c, se) = jackknife_covariance(&xs, &ys);
        let cov = |a: &[f64], b: &[f64]| {
            let (ma, mb) = (mean(a), mean(b));
            a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
        };
        assert_abs_diff_eq!(c, cov(&xs, &ys), epsilon = 1e-12);
        let n = xs.len();
        let loo: Vec<f64> = (0..n)
            .map(|i| {
                let a: Vec<f64> = xs.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v).collect();
                let b: Vec<f64> = ys.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, v)| *v).collect();
                cov(&a, &b)
            })
            .collect();
        let m = mean(&loo);
        let brute = ((n as f64 - 1.0) / n as f64 * loo.iter().map(|c| (c - m).powi(2)).sum::<f64>()).sqrt();
        assert_abs_diff_eq!(se, brute, epsilon = 1e-12);
    }
}

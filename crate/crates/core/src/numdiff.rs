//! Central differences with Richardson extrapolation.

/// Central difference estimate of the first derivative.
pub fn central_first<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference estimate of the second derivative.
pub fn central_second<F: Fn(f64) -> f64>(f: &F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Richardson table for an `O(h²)` symmetric rule evaluated at `h, h/2, h/4, ...`.
///
/// Returns the most extrapolated value and the difference to the previous
/// diagonal entry as an error estimate.
pub fn richardson<D: Fn(f64) -> f64>(rule: D, h: f64, levels: usize) -> (f64, f64) {
    let n = levels + 1;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut step = h;
    for i in 0..n {
        let mut row = Vec::with_capacity(i + 1);
        row.push(rule(step));
        let mut factor = 4.0;
        for j in 1..=i {
            let prev: &Vec<f64> = &table[i - 1];
            let v = (factor * row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(v);
            factor *= 4.0;
        }
        table.push(row);
        step *= 0.5;
    }
    let last = &table[n - 1];
    let best = last[n - 1];
    let err = if n > 1 {
        (best - table[n - 2][n - 2]).abs()
    } else {
        f64::NAN
    };
    (best, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_derivatives() {
        let f = |x: f64| x.exp();
        let (d1, e1) = richardson(|h| central_first(&f, 0.3, h), 1e-2, 2);
        assert!((d1 - 0.3f64.exp()).abs() < 1e-12, "{d1} err {e1}");
        let (d2, _) = richardson(|h| central_second(&f, 0.3, h), 1e-2, 2);
        assert!((d2 - 0.3f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn zero_levels_is_plain_rule() {
        let f = |x: f64| x * x * x;
        let (d, e) = richardson(|h| central_first(&f, 1.0, h), 0.1, 0);
        assert!((d - (3.0 + 0.01)).abs() < 1e-12);
        assert!(e.is_nan());
    }
}

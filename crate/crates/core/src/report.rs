//! CSV rendering of check and experiment results.
//!
//! Numbers use Rust's shortest round-trip formatting, so equal results give
//! byte-identical files.

use std::fmt::Write;

use crate::checks::{IInfCheck, MellinRow};
use crate::ergodicity::ErgodicityVerdict;
use crate::harness::{marginal_row, ExperimentRun, FcltReport, LlnReport};
use crate::levy::{Cumulants, LevyFamily};

/// Plain decimal for moderate magnitudes, exponent notation otherwise.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `bessel,1,p=2,sigma2=4,v2=0.5`.
pub fn cumulants_row(family: &LevyFamily, c: &Cumulants) -> String {
    format!(
        "{},{},p={},sigma2={},v2={}",
        family.name(),
        num(family.alpha()),
        num(c.p),
        num(c.sigma2),
        num(c.v2)
    )
}

pub const IINF_HEADER: &str = "family,alpha,n,mean_inv_Iinf,alpha_p,se,ks_p_closed_vs_mc";

pub fn iinf_row(c: &IInfCheck) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        c.family,
        num(c.alpha),
        c.n,
        num(c.mean_inverse),
        num(c.alpha_p),
        num(c.se),
        opt(c.ks_p)
    )
}

pub const MELLIN_HEADER: &str = "family,z,residual,tolerance,pass";

pub fn mellin_rows(family: &LevyFamily, rows: &[MellinRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            family.name(),
            num(r.z),
            num(r.residual),
            num(r.tolerance),
            r.pass
        );
    }
    out
}

pub const ERGODICITY_HEADER: &str = "family,alpha,verdict,witness_m,C,K,D";

/// An unbounded `K` (any value works) is written as `any`.
pub fn ergodicity_row(family: &LevyFamily, v: &ErgodicityVerdict) -> String {
    let (c, k, d) = match &v.constants {
        Some(c) => (
            num(c.c),
            c.k.map(num).unwrap_or_else(|| "any".into()),
            num(c.d),
        ),
        None => Default::default(),
    };
    format!(
        "{},{},{},{},{},{},{}",
        family.name(),
        num(family.alpha()),
        v.classification.as_str(),
        opt(v.witness),
        c,
        k,
        d
    )
}

pub const LLN_HEADER: &str = "logT,ratio,target,deviation,tolerance";

pub fn lln_csv(r: &LlnReport) -> String {
    let mut out = format!("{LLN_HEADER}\n");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(row.log_t),
            num(row.ratio),
            num(row.target),
            num(row.deviation),
            num(row.tolerance)
        );
    }
    out
}

pub const MARGINAL_HEADER: &str = "t,mean,var,se,target,pass";

/// One row per grid time; `se` is the jackknife standard error of the variance.
pub fn marginal_csv(run: &ExperimentRun) -> String {
    let mut out = format!("{MARGINAL_HEADER}\n");
    for (j, &t) in run.config.t_grid.iter().enumerate() {
        let r = marginal_row(t, &run.column(j), run.v2, run.config.log_t);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            num(t),
            num(r.mean),
            num(r.var),
            num(r.var_se),
            num(r.target),
            r.pass()
        );
    }
    out
}

/// Empirical covariance matrix with the grid as row and column headers.
pub fn covariance_csv(r: &FcltReport) -> String {
    let mut out = String::from("t");
    for t in &r.t_grid {
        let _ = write!(out, ",{}", num(*t));
    }
    out.push('\n');
    for (t, row) in r.t_grid.iter().zip(&r.cov) {
        let _ = write!(out, "{}", num(*t));
        for c in row {
            let _ = write!(out, ",{}", num(*c));
        }
        out.push('\n');
    }
    out
}

/// Raw `W(t)` samples, one replica per row.
pub fn paths_csv(run: &ExperimentRun) -> String {
    let mut out = String::from("replica");
    for t in &run.config.t_grid {
        let _ = write!(out, ",W({})", num(*t));
    }
    out.push('\n');
    for (i, p) in run.paths.iter().enumerate() {
        let _ = write!(out, "{i}");
        for w in p {
            let _ = write!(out, ",{}", num(*w));
        }
        out.push('\n');
    }
    out
}

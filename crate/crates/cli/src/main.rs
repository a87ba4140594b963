//! `lamperti`: batch runner for clock simulations of positive self-similar
//! Markov processes.
//!
//! Exit status is 0 when every verdict passes, 1 when a verification fails
//! and 2 on malformed input.

mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::Rng;
use serde_json::json;

use lamperti_core::checks::{clt_experiment, default_mellin_points, iinf_check, mellin_check, mellin_for};
use lamperti_core::ergodicity::quenched_criterion;
use lamperti_core::harness::{lln_check, ExperimentConfig, Regime};
use lamperti_core::mellin::v2_via_mellin;
use lamperti_core::path::{clock_value, ExtensionPolicy, PathSource, PiecewiseLinearPath};
use lamperti_core::report;
use lamperti_core::rng::{replica_rng, sub_seed};
use lamperti_core::{Error, LevyFamily};

use config::{parse_list, parse_regime, parse_seed, RunConfig, SeedSpec};

#[derive(Parser)]
#[command(name = "lamperti", version, about = "Clock simulations for positive self-similar Markov processes")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean drift, variance rate and FCLT variance of a family.
    Cumulants(Opts),
    /// Normalisation of the exponential functional and closed form vs truncated integral.
    IinfCheck(Opts),
    /// Residual of the Mellin recursion on z = 0.1, ..., 2.0.
    MellinCheck(Opts),
    /// Drift-criterion classification, one line per family.
    Ergodicity(Opts),
    /// Law of large numbers along one path.
    Lln(Opts),
    /// Marginal CLT at t = 1.
    Clt(Opts),
    /// Covariance of the rescaled clock over the time grid.
    Fclt(Opts),
    /// Clock and process values along one simulated path.
    SimulateClock(Opts),
}

impl Command {
    fn parts(&self) -> (&'static str, &Opts) {
        match self {
            Command::Cumulants(o) => ("cumulants", o),
            Command::IinfCheck(o) => ("iinf-check", o),
            Command::MellinCheck(o) => ("mellin-check", o),
            Command::Ergodicity(o) => ("ergodicity", o),
            Command::Lln(o) => ("lln", o),
            Command::Clt(o) => ("clt", o),
            Command::Fclt(o) => ("fclt", o),
            Command::SimulateClock(o) => ("simulate-clock", o),
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Flat key=value file, or a JSON summary of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Family spec such as "bessel(nu=1)" or "saw(a=1,b=2)@alpha=2"; repeatable.
    #[arg(long)]
    family: Vec<String>,
    /// qa (deterministic start a) or q0 (entrance law).
    #[arg(long)]
    regime: Option<String>,
    /// Starting point under qa.
    #[arg(long)]
    a: Option<f64>,
    /// Centering horizon L = log T.
    #[arg(long = "logT")]
    log_t: Option<f64>,
    /// Number of replicas or draws.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated, strictly increasing times.
    #[arg(long)]
    t_grid: Option<String>,
    /// Master seed, or "auto" to draw one (it is printed).
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Grid step for Brownian paths.
    #[arg(long)]
    dt: Option<f64>,
    /// Also write the simulated paths.
    #[arg(long)]
    dump_paths: bool,
    /// Comma-separated horizons L for lln.
    #[arg(long)]
    l_list: Option<String>,
    /// Comma-separated times for simulate-clock.
    #[arg(long)]
    times: Option<String>,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::Config(_) | Error::Parse { .. } | Error::InvalidParameter(_) | Error::Domain(_)) | None => {
                Failure::Usage(format!("{e:#}"))
            }
            Some(_) => Failure::Verification(format!("{e:#}")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn resolve(command: &str, opts: &Opts) -> std::result::Result<RunConfig, Failure> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::from_file(command, path)?,
        None => RunConfig::defaults(command),
    };
    if !opts.family.is_empty() {
        cfg.family = opts.family.clone();
    }
    if let Some(r) = &opts.regime {
        cfg.regime = parse_regime(r)?;
    }
    if let Some(a) = opts.a {
        cfg.a = a;
    }
    if let Some(l) = opts.log_t {
        cfg.log_t = l;
    }
    if let Some(n) = opts.n {
        cfg.n = n;
    }
    if let Some(g) = &opts.t_grid {
        cfg.t_grid = parse_list("t-grid", g)?;
    }
    if let Some(s) = &opts.seed {
        cfg.seed = match parse_seed(s)? {
            SeedSpec::Fixed(s) => s,
            SeedSpec::Auto => {
                let s: u64 = rand::rng().random();
                eprintln!("seed={s}");
                s
            }
        };
    }
    if let Some(w) = opts.workers {
        cfg.workers = w;
    }
    if let Some(o) = &opts.out {
        cfg.out = Some(o.clone());
    }
    if let Some(dt) = opts.dt {
        cfg.dt = dt;
    }
    if opts.dump_paths {
        cfg.dump_paths = true;
    }
    if let Some(l) = &opts.l_list {
        cfg.l_list = parse_list("l-list", l)?;
    }
    if let Some(t) = &opts.times {
        cfg.times = parse_list("times", t)?;
    }
    if cfg.family.is_empty() {
        return Err(Failure::Usage("--family is required".into()));
    }
    Ok(cfg)
}

fn families(cfg: &RunConfig) -> std::result::Result<Vec<LevyFamily>, Failure> {
    cfg.family
        .iter()
        .map(|s| s.parse::<LevyFamily>().map_err(Failure::from))
        .collect()
}

fn single_family(cfg: &RunConfig) -> std::result::Result<LevyFamily, Failure> {
    let mut f = families(cfg)?;
    if f.len() != 1 {
        return Err(Failure::Usage(format!("{} takes exactly one --family", cfg.command)));
    }
    Ok(f.remove(0))
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = PathBuf::from(cfg.out.as_deref().unwrap_or("."));
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn cumulants(cfg: &RunConfig) -> Outcome {
    let mut ok = true;
    for f in families(cfg)? {
        match f.cumulants() {
            Ok(c) => println!("{}", report::cumulants_row(&f, &c)),
            Err(e @ Error::Inconsistency { .. }) => {
                eprintln!("{}: {e}", f.name());
                ok = false;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ok)
}

fn iinf(cfg: &RunConfig) -> Outcome {
    println!("{}", report::IINF_HEADER);
    let mut ok = true;
    for f in families(cfg)? {
        let c = iinf_check(&f, cfg.n, cfg.n.min(10_000), cfg.seed, cfg.workers, cfg.dt)?;
        println!("{}", report::iinf_row(&c));
        ok &= c.pass;
    }
    Ok(ok)
}

fn mellin(cfg: &RunConfig) -> Outcome {
    println!("{}", report::MELLIN_HEADER);
    let mut ok = true;
    for f in families(cfg)? {
        let m = mellin_for(&f, cfg.n, cfg.seed)?;
        let rows = mellin_check(&f, &m, &default_mellin_points());
        print!("{}", report::mellin_rows(&f, &rows));
        ok &= rows.iter().all(|r| r.pass);
        match v2_via_mellin(&f, &m) {
            Ok(v) => eprintln!(
                "{}: v2 via Mellin {} (se {}), from cumulants {}, M from {}",
                f.name(),
                v.value,
                v.se,
                f.cumulants()?.v2,
                m.provenance()
            ),
            Err(e) => eprintln!("{}: v2 via Mellin unavailable: {e}", f.name()),
        }
    }
    Ok(ok)
}

fn ergodicity(cfg: &RunConfig) -> Outcome {
    println!("{}", report::ERGODICITY_HEADER);
    let mut ok = true;
    for f in families(cfg)? {
        let v = quenched_criterion(&f);
        println!("{}", report::ergodicity_row(&f, &v));
        if let Some(msg) = &v.sweep_failure {
            eprintln!("{}: drift constants rejected by the sweep: {msg}", f.name());
            ok = false;
        }
    }
    Ok(ok)
}

fn lln(cfg: &RunConfig) -> Outcome {
    let f = single_family(cfg)?;
    let r = lln_check(&f, cfg.a, &cfg.l_list, cfg.seed, cfg.dt)?;
    print!("{}", report::lln_csv(&r));
    Ok(r.pass)
}

fn experiment_config(cfg: &RunConfig) -> std::result::Result<ExperimentConfig, Failure> {
    let f = single_family(cfg)?;
    let regime = match cfg.regime.as_str() {
        "q0" => Regime::Q0,
        _ => Regime::Qa { a: cfg.a },
    };
    let mut e = ExperimentConfig::new(f, regime, cfg.log_t, cfg.n, cfg.seed);
    e.t_grid = cfg.t_grid.clone();
    e.dt = cfg.dt;
    e.workers = cfg.workers;
    e.validate()?;
    Ok(e)
}

fn clt_or_fclt(cfg: &RunConfig, fclt: bool) -> Outcome {
    let e = experiment_config(cfg)?;
    let o = clt_experiment(&e)?;
    let pass = if fclt { o.fclt.pass } else { o.clt.pass };
    let name = if fclt { "fclt" } else { "clt" };
    let marginal = report::marginal_csv(&o.run);
    print!("{marginal}");
    let dir = out_dir(cfg)?;
    write(&dir, &format!("{name}.csv"), &marginal)?;
    write(&dir, &format!("{name}_covariance.csv"), &report::covariance_csv(&o.fclt))?;
    if cfg.dump_paths {
        write(&dir, &format!("{name}_paths.csv"), &report::paths_csv(&o.run))?;
    }
    let summary = json!({
        "command": name,
        "pass": pass,
        "family": e.family.to_string(),
        "seed": cfg.seed,
        "v2": o.run.v2,
        "config": cfg,
        "clt": o.clt,
        "fclt": o.fclt,
        "runtime_seconds": o.run.seconds,
    });
    let text = serde_json::to_string_pretty(&summary).context("cannot serialise summary")?;
    write(&dir, &format!("{name}_summary.json"), &(text + "\n"))?;
    Ok(pass)
}

fn simulate_clock(cfg: &RunConfig) -> Outcome {
    let f = single_family(cfg)?;
    let mut source = PathSource::for_family(&f, cfg.dt)?
        .ok_or_else(|| Failure::Usage(format!("{} has no path simulator", f.name())))?;
    let mut rng = replica_rng(sub_seed(cfg.seed, "simulate-clock"), 0);
    let policy = ExtensionPolicy::for_family(&f);
    let mut path = PiecewiseLinearPath::new();
    let mut times = cfg.times.clone();
    times.sort_by(f64::total_cmp);
    let mut out = String::from("t,clock,x\n");
    for t in times {
        let c = clock_value(&mut path, f.alpha(), cfg.a, t, &mut source, &mut rng, &policy)?;
        let x = cfg.a * path.value_at(c.clock_value).exp();
        let _ = writeln!(out, "{t},{},{x}", c.clock_value);
    }
    print!("{out}");
    if cfg.dump_paths {
        write(&out_dir(cfg)?, "path.csv", &path.to_csv())?;
    }
    Ok(true)
}

fn run(command: &Command) -> Outcome {
    let (name, opts) = command.parts();
    let cfg = resolve(name, opts)?;
    match command {
        Command::Cumulants(_) => cumulants(&cfg),
        Command::IinfCheck(_) => iinf(&cfg),
        Command::MellinCheck(_) => mellin(&cfg),
        Command::Ergodicity(_) => ergodicity(&cfg),
        Command::Lln(_) => lln(&cfg),
        Command::Clt(_) => clt_or_fclt(&cfg, false),
        Command::Fclt(_) => clt_or_fclt(&cfg, true),
        Command::SimulateClock(_) => simulate_clock(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

//! Resolved run configuration: defaults, then a config file, then flags.
//!
//! A config file is either flat `key=value` lines (keys are the long flag
//! names, `#` starts a comment, `family` may repeat) or a JSON summary
//! written by an earlier run, whose `config` object is replayed.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use lamperti_core::harness::DEFAULT_T_GRID;
use lamperti_core::path::DEFAULT_DT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub family: Vec<String>,
    pub regime: String,
    pub a: f64,
    #[serde(rename = "logT")]
    pub log_t: f64,
    pub n: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<String>,
    pub dt: f64,
    pub dump_paths: bool,
    pub l_list: Vec<f64>,
    pub times: Vec<f64>,
}

/// Seed as given on the command line or in a file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeedSpec {
    Fixed(u64),
    Auto,
}

pub const DEFAULT_SEED: u64 = 1;

fn default_n(command: &str) -> usize {
    match command {
        "iinf-check" => 100_000,
        "mellin-check" => 1_000_000,
        _ => 4000,
    }
}

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            family: Vec::new(),
            regime: "qa".into(),
            a: 1.0,
            log_t: 400.0,
            n: default_n(command),
            t_grid: DEFAULT_T_GRID.to_vec(),
            seed: DEFAULT_SEED,
            workers: 1,
            out: None,
            dt: DEFAULT_DT,
            dump_paths: false,
            l_list: vec![100.0, 1000.0, 10_000.0],
            times: vec![1.0, 10.0, 100.0],
        }
    }

    /// Reads `path` on top of the defaults for `command`.
    pub fn from_file(command: &str, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        if text.trim_start().starts_with('{') {
            let value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("invalid JSON in {}", path.display()))?;
            let config = value
                .get("config")
                .cloned()
                .ok_or_else(|| anyhow!("{} has no \"config\" object", path.display()))?;
            let mut cfg: RunConfig = serde_json::from_value(config)
                .with_context(|| format!("invalid config object in {}", path.display()))?;
            cfg.command = command.to_string();
            return Ok(cfg);
        }
        let mut cfg = RunConfig::defaults(command);
        let mut families = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "family" {
                families.push(value.to_string());
                continue;
            }
            cfg.set(key, value)
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        if !families.is_empty() {
            cfg.family = families;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value. Unknown keys are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "family" => self.family = vec![value.to_string()],
            "regime" => self.regime = parse_regime(value)?,
            "a" => self.a = parse_num(key, value)?,
            "logT" => self.log_t = parse_num(key, value)?,
            "n" => self.n = value.parse().with_context(|| format!("bad n {value:?}"))?,
            "t-grid" => self.t_grid = parse_list(key, value)?,
            "seed" => match parse_seed(value)? {
                SeedSpec::Fixed(s) => self.seed = s,
                SeedSpec::Auto => bail!("seed=auto is only accepted on the command line"),
            },
            "workers" => {
                self.workers = value.parse().with_context(|| format!("bad workers {value:?}"))?
            }
            "out" => self.out = Some(value.to_string()),
            "dt" => self.dt = parse_num(key, value)?,
            "dump-paths" => {
                self.dump_paths = value.parse().with_context(|| format!("bad dump-paths {value:?}"))?
            }
            "l-list" => self.l_list = parse_list(key, value)?,
            "times" => self.times = parse_list(key, value)?,
            _ => bail!("unknown config key {key:?}"),
        }
        Ok(())
    }
}

pub fn parse_regime(s: &str) -> Result<String> {
    match s.to_ascii_lowercase().as_str() {
        "qa" => Ok("qa".into()),
        "q0" => Ok("q0".into()),
        _ => bail!("regime must be qa or q0, got {s:?}"),
    }
}

pub fn parse_seed(s: &str) -> Result<SeedSpec> {
    if s == "auto" {
        return Ok(SeedSpec::Auto);
    }
    s.parse()
        .map(SeedSpec::Fixed)
        .with_context(|| format!("seed must be an unsigned integer or auto, got {s:?}"))
}

fn parse_num(key: &str, s: &str) -> Result<f64> {
    s.parse().with_context(|| format!("bad {key} {s:?}"))
}

pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| parse_num(key, p.trim()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn flat_file_overrides_defaults() {
        let f = file("# run\nfamily = saw(a=1,b=2)\nlogT=100\nt-grid=0.5,1,2\nseed=9\n");
        let cfg = RunConfig::from_file("clt", f.path()).unwrap();
        assert_eq!(cfg.family, vec!["saw(a=1,b=2)".to_string()]);
        assert_eq!(cfg.log_t, 100.0);
        assert_eq!(cfg.t_grid, vec![0.5, 1.0, 2.0]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n, 4000);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let f = file("familly=saw(a=1,b=2)\n");
        let err = RunConfig::from_file("clt", f.path()).unwrap_err();
        assert!(format!("{err:#}").contains("unknown config key"), "{err:#}");
        let f = file("logT\n");
        assert!(RunConfig::from_file("clt", f.path()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut cfg = RunConfig::defaults("fclt");
        cfg.family = vec!["cp-(a=3,b=1)".into()];
        cfg.out = Some("/tmp/x".into());
        let json = serde_json::json!({ "pass": true, "config": cfg });
        let f = file(&serde_json::to_string_pretty(&json).unwrap());
        assert_eq!(RunConfig::from_file("fclt", f.path()).unwrap(), cfg);
    }

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("auto").unwrap(), SeedSpec::Auto);
        assert_eq!(parse_seed("7").unwrap(), SeedSpec::Fixed(7));
        assert!(parse_seed("-1").is_err());
    }
}

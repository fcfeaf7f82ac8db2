//! Shared parameters: flags layered over an optional `key = value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use multipin::Geometry;

/// Parameters accepted by every command. Values may also come from
/// `--config`; flags take precedence.
#[derive(Args, Clone, Debug, Default)]
pub struct Params {
    /// Pinning strength, or a comma-separated list
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Spacing: even integer, `inf`, a comma-separated list, or a rule
    /// (`half-critical`, `critical`, `double-critical`)
    #[arg(long = "T", global = true)]
    pub t: Option<String>,
    /// Polymer length(s); accepts `1e6` and comma-separated lists
    #[arg(long = "N", global = true)]
    pub n: Option<String>,
    /// Number of replicas
    #[arg(long = "M", global = true)]
    pub m: Option<String>,
    /// Master seed
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Target offset of the critical spacing rule
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub zeta: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<String>,
}

const KEYS: [&str; 8] = ["delta", "T", "N", "M", "seed", "zeta", "out", "threads"];

/// `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected `key = value`", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            bail!("config line {}: unknown key `{k}`", i + 1);
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

impl Params {
    /// Fill unset fields from the config map.
    pub fn merge(mut self, file: &BTreeMap<String, String>) -> Self {
        let pick = |slot: &mut Option<String>, key: &str| {
            if slot.is_none() {
                *slot = file.get(key).cloned();
            }
        };
        pick(&mut self.delta, "delta");
        pick(&mut self.t, "T");
        pick(&mut self.n, "N");
        pick(&mut self.m, "M");
        pick(&mut self.seed, "seed");
        pick(&mut self.zeta, "zeta");
        pick(&mut self.threads, "threads");
        if self.out.is_none() {
            self.out = file.get("out").map(PathBuf::from);
        }
        self
    }

    pub fn deltas(&self, default: &[f64]) -> Result<Vec<f64>> {
        match &self.delta {
            None => Ok(default.to_vec()),
            Some(s) => list(s, "delta", parse_f64),
        }
    }

    pub fn delta(&self, default: f64) -> Result<f64> {
        single(self.deltas(&[default])?, "delta")
    }

    pub fn geometries(&self, default: &[Geometry]) -> Result<Vec<Geometry>> {
        match &self.t {
            None => Ok(default.to_vec()),
            Some(s) => list(s, "T", |v| v.parse::<Geometry>().map_err(|e| anyhow!("{e}"))),
        }
    }

    pub fn spacing(&self, default: u32) -> Result<u32> {
        match single(self.geometries(&[Geometry::Finite(default)])?, "T")? {
            Geometry::Finite(t) => Ok(t),
            Geometry::Infinite => bail!("this command needs a finite spacing"),
        }
    }

    pub fn lengths(&self, default: &[u64]) -> Result<Vec<u64>> {
        match &self.n {
            None => Ok(default.to_vec()),
            Some(s) => list(s, "N", parse_count),
        }
    }

    pub fn length(&self, default: u64) -> Result<u64> {
        single(self.lengths(&[default])?, "N")
    }

    pub fn replicas(&self, default: usize) -> Result<usize> {
        match &self.m {
            None => Ok(default),
            Some(s) => Ok(parse_count(s)? as usize),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        match &self.seed {
            None => Ok(0),
            Some(s) => s.trim().parse().map_err(|_| anyhow!("seed must be an unsigned integer, got `{s}`")),
        }
    }

    pub fn zeta(&self) -> Result<f64> {
        match &self.zeta {
            None => Ok(0.0),
            Some(s) => parse_f64(s),
        }
    }

    pub fn threads(&self) -> Result<Option<usize>> {
        self.threads
            .as_ref()
            .map(|s| match parse_count(s)? {
                0 => bail!("threads must be positive"),
                k => Ok(k as usize),
            })
            .transpose()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("multipin-out"))
    }
}

fn list<T>(s: &str, what: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = s
        .split(',')
        .map(|v| f(v.trim()))
        .collect::<Result<_>>()
        .with_context(|| format!("parsing --{what} `{s}`"))?;
    if items.is_empty() {
        bail!("--{what} is empty");
    }
    Ok(items)
}

fn single<T>(mut v: Vec<T>, what: &str) -> Result<T> {
    if v.len() != 1 {
        bail!("--{what} takes a single value here");
    }
    Ok(v.remove(0))
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| anyhow!("not a number: `{s}`"))?;
    if !v.is_finite() {
        bail!("not a finite number: `{s}`");
    }
    Ok(v)
}

/// Non-negative integer, also written as `1e6`.
pub fn parse_count(s: &str) -> Result<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v = parse_f64(s)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        bail!("not a non-negative integer: `{s}`");
    }
    Ok(v as u64)
}

//! Run configuration: flat key=value files, flag overrides, the config hash
//! embedded in every artifact, and the flat-file result cache.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

/// Output format of record-producing subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Jsonl,
}

impl std::str::FromStr for OutputFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            "jsonl" => OutputFormat::Jsonl,
            _ => bail!("unknown output format {s:?}"),
        })
    }
}

impl OutputFormat {
    pub fn label(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Jsonl => "jsonl",
        }
    }
}

/// Effective configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    pub height_bound: Option<u64>,
    pub prime_list: Vec<u64>,
    /// Reduced-set constant on the leading coefficient.
    pub box_constant: u32,
    /// Reduced-set constant on the seminvariant 8ac − 3b².
    pub seminvariant_constant: u32,
    pub rng_seed: u64,
    pub output_format: Option<OutputFormat>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = quartic::reduce::ReductionParams::default();
        RunConfig {
            cache_dir: None,
            threads: None,
            height_bound: None,
            prime_list: vec![3, 5, 7],
            box_constant: p.ka,
            seminvariant_constant: p.kw,
            rng_seed: 0x5eed,
            output_format: None,
        }
    }
}

/// Parse a height such as `1000000`, `1e6` or `2.5e5` (must be a positive integer).
pub fn parse_height(s: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().with_context(|| format!("bad height {s:?}"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 1e19) {
        bail!("height {s:?} is not a positive integer");
    }
    Ok(v as u64)
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<T>().map_err(|_| anyhow::anyhow!("bad list entry {t:?}")))
        .collect()
}

impl RunConfig {
    /// Apply one key=value setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            "threads" => self.threads = Some(value.parse().context("threads")?),
            "height_bound" => self.height_bound = Some(parse_height(value)?),
            "prime_list" => self.prime_list = parse_list(value)?,
            "box_constant" => self.box_constant = value.parse().context("box_constant")?,
            "seminvariant_constant" => self.seminvariant_constant = value.parse().context("seminvariant_constant")?,
            "rng_seed" => self.rng_seed = value.parse().context("rng_seed")?,
            "output_format" => self.output_format = Some(value.parse()?),
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Read a flat key=value file; blank lines and `#` comments are ignored.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("{}:{}: expected key=value", path.display(), n + 1);
            };
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn reduction_params(&self) -> quartic::reduce::ReductionParams {
        quartic::reduce::ReductionParams { ka: self.box_constant, kw: self.seminvariant_constant }
    }

    /// Settings that can change results (cache location and thread count cannot).
    fn result_settings(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("height_bound", self.height_bound.map(|h| h.to_string()).unwrap_or_default());
        m.insert("prime_list", self.prime_list.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","));
        m.insert("box_constant", self.box_constant.to_string());
        m.insert("seminvariant_constant", self.seminvariant_constant.to_string());
        m.insert("rng_seed", self.rng_seed.to_string());
        m.insert("output_format", self.output_format.map(|f| f.label()).unwrap_or("").to_string());
        m
    }

    /// SHA-256 over the operation, its arguments and the result-relevant settings.
    pub fn hash(&self, op: &str, args: &BTreeMap<String, String>) -> String {
        let mut h = Sha256::new();
        h.update(format!("schema=qc1\nop={op}\n"));
        for (k, v) in args {
            h.update(format!("arg.{k}={v}\n"));
        }
        for (k, v) in self.result_settings() {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Flat-file cache of complete outputs keyed by (operation, config hash).
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    fn path(&self, op: &str, hash: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{op}-{hash}.out")))
    }

    pub fn get(&self, op: &str, hash: &str) -> Option<String> {
        fs::read_to_string(self.path(op, hash)?).ok()
    }

    pub fn put(&self, op: &str, hash: &str, content: &str) -> Result<()> {
        let Some(path) = self.path(op, hash) else { return Ok(()) };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, content)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights_and_lists() {
        assert_eq!(parse_height("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_height("250000").unwrap(), 250_000);
        assert!(parse_height("1.5").is_err());
        assert_eq!(parse_list::<u64>("3, 5,7").unwrap(), vec![3, 5, 7]);
    }

    #[test]
    fn hash_depends_on_results_only() {
        let mut a = RunConfig::default();
        let args = BTreeMap::new();
        let h0 = a.hash("constants", &args);
        a.threads = Some(4);
        a.cache_dir = Some("/tmp/x".into());
        assert_eq!(a.hash("constants", &args), h0);
        a.rng_seed = 1;
        assert_ne!(a.hash("constants", &args), h0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut c = RunConfig::default();
        assert!(c.set("nonsense", "1").is_err());
        c.set("prime_list", "3,11").unwrap();
        assert_eq!(c.prime_list, vec![3, 11]);
    }
}

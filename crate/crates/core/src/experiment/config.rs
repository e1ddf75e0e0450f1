//! Experiment configuration: TOML files, the one-line variation grammar and
//! seed lists.
//!
//! A config file looks like
//!
//! ```toml
//! environment = "river_swim"
//! episodes = 1000
//! seeds = "1..20"          # or an array of integers
//! output = "results/river" # optional
//!
//! [agent]
//! kind = "opp_ucrl2"
//! delta = 0.05
//! scale = 0.5
//!
//! [variation]
//! kind = "binary"
//! eps0 = 0.0
//! eps1 = 0.0
//! rho = 0.5
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::agents::{AgentConfig, AgentKind};
use crate::env::EnvironmentId;
use crate::error::{Error, Result};
use crate::variation::{quantile_thresholds, NormalizationThresholds, VariationProcess};

/// How the normalization thresholds are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdChoice {
    /// Support points for two-level processes, 5% quantiles for Beta, `[0, 1]` otherwise.
    Default,
    Quantile(f64),
    Explicit { l_min: f64, l_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationConfig {
    pub process: VariationProcess,
    pub thresholds: ThresholdChoice,
}

impl VariationConfig {
    pub fn new(process: VariationProcess) -> Self {
        Self {
            process,
            thresholds: ThresholdChoice::Default,
        }
    }

    pub fn thresholds(&self) -> Result<NormalizationThresholds> {
        match self.thresholds {
            ThresholdChoice::Default => self.process.default_thresholds(),
            ThresholdChoice::Quantile(rho) => quantile_thresholds(&self.process, rho),
            ThresholdChoice::Explicit { l_min, l_max } => NormalizationThresholds::new(l_min, l_max),
        }
    }

    /// Build from a kind name and `key = value` pairs. Errors name keys as
    /// `variation.<key>`.
    pub fn from_pairs(kind: &str, pairs: &BTreeMap<String, f64>) -> Result<Self> {
        let key = |k: &str| format!("variation.{k}");
        let allowed: &[&str] = match kind {
            "binary" => &["eps0", "eps1", "rho"],
            "square_wave" => &["eps0", "eps1"],
            "beta" => &["alpha", "beta"],
            "constant" => &["value"],
            other => {
                return Err(Error::config(
                    "variation.kind",
                    format!("unknown kind `{other}` (expected binary, square_wave, beta or constant)"),
                ))
            }
        };
        let threshold_keys = ["threshold_rho", "l_min", "l_max"];
        if let Some(bad) = pairs
            .keys()
            .find(|k| !allowed.contains(&k.as_str()) && !threshold_keys.contains(&k.as_str()))
        {
            return Err(Error::config(key(bad), format!("not a parameter of `{kind}` variation")));
        }
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            pairs
                .get(k)
                .copied()
                .or(default)
                .ok_or_else(|| Error::config(key(k), "missing"))
        };
        let process = match kind {
            "binary" => VariationProcess::BinaryIid {
                eps0: get("eps0", Some(0.0))?,
                eps1: get("eps1", Some(0.0))?,
                rho: get("rho", Some(0.5))?,
            },
            "square_wave" => VariationProcess::PeriodicSquareWave {
                eps0: get("eps0", Some(0.0))?,
                eps1: get("eps1", Some(0.0))?,
            },
            "beta" => VariationProcess::BetaIid {
                alpha: get("alpha", None)?,
                beta: get("beta", None)?,
            },
            _ => VariationProcess::Constant {
                value: get("value", None)?,
            },
        };
        process
            .validate()
            .map_err(|e| Error::config("variation", e.to_string()))?;

        let thresholds = match (pairs.get("threshold_rho"), pairs.get("l_min"), pairs.get("l_max")) {
            (None, None, None) => ThresholdChoice::Default,
            (Some(&rho), None, None) => ThresholdChoice::Quantile(rho),
            (None, Some(&l_min), Some(&l_max)) => ThresholdChoice::Explicit { l_min, l_max },
            (Some(_), _, _) => {
                return Err(Error::config(
                    "variation.threshold_rho",
                    "cannot be combined with explicit l_min/l_max",
                ))
            }
            (None, Some(_), None) => return Err(Error::config("variation.l_max", "missing (l_min was given)")),
            (None, None, Some(_)) => return Err(Error::config("variation.l_min", "missing (l_max was given)")),
        };
        let config = Self { process, thresholds };
        config.thresholds().map_err(|e| {
            let k = if matches!(thresholds, ThresholdChoice::Quantile(_)) {
                "variation.threshold_rho"
            } else {
                "variation.l_min"
            };
            Error::config(k, e.to_string())
        })?;
        Ok(config)
    }

    /// Parse the one-line grammar `kind:key=value,key=value`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut pairs = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::config("variation", format!("expected key=value, got `{item}`")))?;
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("variation.{}", k.trim()), format!("`{v}` is not a number")))?;
            if pairs.insert(k.trim().to_string(), value).is_some() {
                return Err(Error::config(format!("variation.{}", k.trim()), "given twice"));
            }
        }
        Self::from_pairs(kind.trim(), &pairs)
    }

    pub fn to_pairs(&self) -> (String, BTreeMap<String, f64>) {
        let mut pairs = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            pairs.insert(k.to_string(), v);
        };
        match self.process {
            VariationProcess::BinaryIid { eps0, eps1, rho } => {
                put("eps0", eps0);
                put("eps1", eps1);
                put("rho", rho);
            }
            VariationProcess::PeriodicSquareWave { eps0, eps1 } => {
                put("eps0", eps0);
                put("eps1", eps1);
            }
            VariationProcess::BetaIid { alpha, beta } => {
                put("alpha", alpha);
                put("beta", beta);
            }
            VariationProcess::Constant { value } => put("value", value),
        }
        match self.thresholds {
            ThresholdChoice::Default => {}
            ThresholdChoice::Quantile(rho) => put("threshold_rho", rho),
            ThresholdChoice::Explicit { l_min, l_max } => {
                put("l_min", l_min);
                put("l_max", l_max);
            }
        }
        (self.process.kind_name().to_string(), pairs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub environment: EnvironmentId,
    pub agent: AgentConfig,
    pub variation: VariationConfig,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::config("episodes", "must be at least 1"));
        }
        validate_seeds(&self.seeds)?;
        self.agent.validate()?;
        self.variation.thresholds()?;
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<file>", e.message().to_string()))?;
        Self::from_table(&table)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    fn from_table(table: &Table) -> Result<Self> {
        reject_unknown(table, "", &["environment", "episodes", "seeds", "output", "agent", "variation"])?;

        let environment: EnvironmentId = required_str(table, "environment", "environment")?.parse()?;
        let episodes = required_int(table, "episodes", "episodes")?;
        if episodes < 1 {
            return Err(Error::config("episodes", "must be at least 1"));
        }
        let seeds = match table.get("seeds") {
            None => return Err(Error::config("seeds", "missing")),
            Some(Value::String(s)) => parse_seeds(s)?,
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i >= 0 => Ok(*i as u64),
                    _ => Err(Error::config("seeds", "entries must be nonnegative integers")),
                })
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(Error::config("seeds", "expected an array or a range string")),
        };
        validate_seeds(&seeds)?;
        let output = match table.get("output") {
            None => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(Error::config("output", "expected a string")),
        };

        let agent_table = sub_table(table, "agent")?;
        reject_unknown(agent_table, "agent.", &["kind", "delta", "scale", "prior_value", "alpha_floor"])?;
        let kind: AgentKind = required_str(agent_table, "kind", "agent.kind")?.parse()?;
        let mut agent = AgentConfig::new(kind);
        for key in ["delta", "scale", "prior_value", "alpha_floor"] {
            if let Some(v) = optional_float(agent_table, key, &format!("agent.{key}"))? {
                agent.set(&format!("agent.{key}"), v)?;
            }
        }
        agent.validate()?;

        let variation_table = sub_table(table, "variation")?;
        let kind = required_str(variation_table, "kind", "variation.kind")?;
        let mut pairs = BTreeMap::new();
        for (k, _) in variation_table.iter().filter(|(k, _)| k.as_str() != "kind") {
            let full = format!("variation.{k}");
            pairs.insert(k.clone(), optional_float(variation_table, k, &full)?.expect("present"));
        }
        let variation = VariationConfig::from_pairs(kind, &pairs)?;

        Ok(Self {
            environment,
            agent,
            variation,
            episodes: episodes as usize,
            seeds,
            output,
        })
    }

    /// Serialize back into the file schema.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("environment".into(), Value::String(self.environment.name().into()));
        root.insert("episodes".into(), Value::Integer(self.episodes as i64));
        root.insert(
            "seeds".into(),
            Value::Array(self.seeds.iter().map(|&s| Value::Integer(s as i64)).collect()),
        );
        if let Some(out) = &self.output {
            root.insert("output".into(), Value::String(out.display().to_string()));
        }
        let mut agent = Table::new();
        agent.insert("kind".into(), Value::String(self.agent.kind.name().into()));
        agent.insert("delta".into(), Value::Float(self.agent.delta));
        agent.insert("scale".into(), Value::Float(self.agent.scale));
        agent.insert("prior_value".into(), Value::Float(self.agent.prior_value));
        agent.insert("alpha_floor".into(), Value::Float(self.agent.alpha_floor));
        root.insert("agent".into(), Value::Table(agent));
        let (kind, pairs) = self.variation.to_pairs();
        let mut variation = Table::new();
        variation.insert("kind".into(), Value::String(kind));
        for (k, v) in pairs {
            variation.insert(k, Value::Float(v));
        }
        root.insert("variation".into(), Value::Table(variation));
        toml::to_string(&root).expect("plain tables serialize")
    }
}

fn reject_unknown(table: &Table, prefix: &str, allowed: &[&str]) -> Result<()> {
    match table.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::config(format!("{prefix}{k}"), "unknown key")),
        None => Ok(()),
    }
}

fn sub_table<'a>(table: &'a Table, key: &str) -> Result<&'a Table> {
    match table.get(key) {
        Some(Value::Table(t)) => Ok(t),
        Some(_) => Err(Error::config(key, "expected a table")),
        None => Err(Error::config(key, "missing")),
    }
}

fn required_str<'a>(table: &'a Table, key: &str, full: &str) -> Result<&'a str> {
    match table.get(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Error::config(full, "expected a string")),
        None => Err(Error::config(full, "missing")),
    }
}

fn required_int(table: &Table, key: &str, full: &str) -> Result<i64> {
    match table.get(key) {
        Some(Value::Integer(i)) => Ok(*i),
        Some(_) => Err(Error::config(full, "expected an integer")),
        None => Err(Error::config(full, "missing")),
    }
}

fn optional_float(table: &Table, key: &str, full: &str) -> Result<Option<f64>> {
    match table.get(key) {
        Some(Value::Float(f)) => Ok(Some(*f)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(_) => Err(Error::config(full, "expected a number")),
        None => Ok(None),
    }
}

fn validate_seeds(seeds: &[u64]) -> Result<()> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "at least one seed is required"));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::config("seeds", format!("seed {} listed twice", w[0])));
    }
    Ok(())
}

/// Parse `"1..20"` (inclusive), `"3,5,8"`, or a mix such as `"1..4,10"`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = |item: &str| Error::config("seeds", format!("cannot parse `{item}`"));
    let mut seeds = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: u64 = lo.trim().parse().map_err(|_| bad(item))?;
            let hi: u64 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad(item))?;
            if hi < lo {
                return Err(Error::config("seeds", format!("empty range `{item}`")));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(item.parse().map_err(|_| bad(item))?);
        }
    }
    validate_seeds(&seeds)?;
    Ok(seeds)
}

//! Flag and config-file resolution into fully materialized settings, and the
//! run manifest that records them.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use charn_core::montecarlo::{DESK_N, PAPER_N, STUDY_ALPHAS};
use charn_core::{
    BandwidthRule, BootstrapConfig, ExperimentConfig, FitConfig, Hypothesis, KernelSpec, ModelId, SmoothingRule,
    TruncationRule, WeightFamily, WeightSpec, DEFAULT_BURN_IN,
};
use serde::{Deserialize, Serialize};

use crate::args::{MethodArgs, MonteCarloArgs, SimulateArgs, TestArgs};

const KNOWN_KEYS: &[&str] = &[
    "k",
    "alpha",
    "boot-reps",
    "weight",
    "gamma",
    "a-n-quantile",
    "a-n",
    "bandwidth",
    "kernel",
    "smoothing-bandwidth",
    "burn-in",
    "refit",
    "variance-correction",
    "min-kept",
    "seed",
    "threads",
    "model",
    "hypothesis",
    "n",
    "alphas",
    "mc-reps",
    "paper-scale",
];

/// `key = value` lines; `#` starts a comment. Keys are the long flag names.
#[derive(Debug, Default)]
pub struct ConfigFile {
    origin: String,
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected key=value, got '{line}'", i + 1))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("{origin}:{}: unknown key '{key}'", i + 1);
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("{origin}:{}: duplicate key '{key}'", i + 1);
            }
        }
        Ok(ConfigFile {
            origin: origin.to_string(),
            entries,
        })
    }

    fn load_optional(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// The flag if given, else the config entry parsed as `T`.
    fn value<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.entries
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| anyhow!("{}: key '{key}': {e}", self.origin)))
            .transpose()
    }

    /// Boolean switches only ever turn a setting on from the command line.
    fn switch(&self, flag: bool, key: &str) -> Result<Option<bool>> {
        self.value(flag.then_some(true), key)
    }
}

pub fn parse_list<T>(text: &str, what: &str) -> Result<Vec<T>>
where
    T: FromStr,
    T::Err: Display,
{
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<T>().map_err(|e| anyhow!("invalid {what} '{s}': {e}"))
        })
        .collect()
}

fn parse_bandwidth(text: &str) -> Result<BandwidthRule> {
    let number = |s: &str| s.trim().parse::<f64>().map_err(|e| anyhow!("invalid bandwidth '{text}': {e}"));
    match text.split_once(':') {
        None if text == "silverman" => Ok(BandwidthRule::Silverman),
        Some(("fixed", v)) => Ok(BandwidthRule::Fixed(number(v)?)),
        Some(("power", v)) => Ok(BandwidthRule::Power(number(v)?)),
        _ => bail!("invalid bandwidth '{text}' (expected silverman, fixed:<c> or power:<rho>)"),
    }
}

fn parse_smoothing(text: &str) -> Result<SmoothingRule> {
    if text == "auto" {
        return Ok(SmoothingRule::QuarterPower);
    }
    let h = text
        .parse::<f64>()
        .map_err(|e| anyhow!("invalid smoothing bandwidth '{text}': {e}"))?;
    Ok(SmoothingRule::Fixed(h))
}

fn parse_bound(text: &str) -> Result<TruncationRule> {
    if matches!(text, "inf" | "infinity" | "none") {
        return Ok(TruncationRule::Unbounded);
    }
    let a = text.parse::<f64>().map_err(|e| anyhow!("invalid a_n '{text}': {e}"))?;
    if a.is_infinite() {
        return Ok(TruncationRule::Unbounded);
    }
    Ok(TruncationRule::Absolute(a))
}

fn parse_weight(family: &str, gamma: Option<&str>, k: usize) -> Result<WeightSpec> {
    let family: WeightFamily = family.parse()?;
    let gammas = match gamma {
        None => vec![WeightSpec::DEFAULT_GAMMA; k + 1],
        Some(g) => {
            let values: Vec<f64> = parse_list(g, "gamma")?;
            match values.len() {
                1 => vec![values[0]; k + 1],
                len if len == k + 1 => values,
                len => bail!("--gamma takes 1 or k+1 = {} values, got {len}", k + 1),
            }
        }
    };
    Ok(WeightSpec::new(family, gammas)?)
}

/// Estimation, weight and bootstrap choices with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub k: usize,
    pub fit: FitConfig,
    pub weight: WeightSpec,
    pub bootstrap: BootstrapConfig,
}

fn resolve_method(args: &MethodArgs, cfg: &ConfigFile, alpha: Option<f64>) -> Result<MethodSettings> {
    let k = cfg.value(args.k, "k")?.unwrap_or(1);
    if k == 0 {
        bail!("k must be at least 1");
    }
    let family = cfg
        .value(args.weight.clone(), "weight")?
        .unwrap_or_else(|| "gauss".into());
    let gamma = cfg.value(args.gamma.clone(), "gamma")?;
    let weight = parse_weight(&family, gamma.as_deref(), k)?;

    let truncation = match (args.a_n_quantile, args.a_n.as_deref()) {
        (Some(q), _) => TruncationRule::Quantile(q),
        (None, Some(a)) => parse_bound(a)?,
        (None, None) => {
            let q = cfg.value::<f64>(None, "a-n-quantile")?;
            let a = cfg.value::<String>(None, "a-n")?;
            match (q, a) {
                (Some(_), Some(_)) => bail!("config sets both a-n-quantile and a-n"),
                (Some(q), None) => TruncationRule::Quantile(q),
                (None, Some(a)) => parse_bound(&a)?,
                (None, None) => FitConfig::default().truncation,
            }
        }
    };
    let bandwidth = match cfg.value(args.bandwidth.clone(), "bandwidth")? {
        Some(b) => parse_bandwidth(&b)?,
        None => BandwidthRule::Silverman,
    };
    let kernel = match cfg.value(args.kernel.clone(), "kernel")? {
        Some(name) => name.parse::<KernelSpec>()?,
        None => KernelSpec::default(),
    };
    let fit = FitConfig {
        kernel,
        bandwidth,
        truncation,
        ..FitConfig::default()
    };
    fit.validate()?;

    let defaults = BootstrapConfig::default();
    let smoothing = match cfg.value(args.smoothing_bandwidth.clone(), "smoothing-bandwidth")? {
        Some(h) => parse_smoothing(&h)?,
        None => defaults.smoothing,
    };
    let refit = match cfg.value::<bool>(args.no_refit.then_some(false), "refit")? {
        Some(r) => r,
        None => defaults.refit,
    };
    let bootstrap = BootstrapConfig {
        replicates: cfg.value(args.boot_reps, "boot-reps")?.unwrap_or(defaults.replicates),
        smoothing,
        burn_in: cfg.value(args.burn_in, "burn-in")?.unwrap_or(DEFAULT_BURN_IN),
        alpha: alpha.unwrap_or(defaults.alpha),
        seed: cfg.value(args.seed, "seed")?.unwrap_or(0),
        refit,
        variance_correction: cfg
            .switch(args.variance_correction, "variance-correction")?
            .unwrap_or(defaults.variance_correction),
        min_kept: cfg.value(args.min_kept, "min-kept")?.unwrap_or(defaults.min_kept),
        max_failure_rate: defaults.max_failure_rate,
    };
    bootstrap.validate()?;
    Ok(MethodSettings {
        k,
        fit,
        weight,
        bootstrap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSettings {
    pub method: MethodSettings,
    /// The series as read, pre-sample lags first.
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesFormat {
    Csv,
    Lines,
}

impl FromStr for SeriesFormat {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(SeriesFormat::Csv),
            "lines" => Ok(SeriesFormat::Lines),
            _ => bail!("unknown format '{s}' (expected csv or lines)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSettings {
    pub model: ModelId,
    pub hypothesis: Hypothesis,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub format: SeriesFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSettings {
    pub models: Vec<ModelId>,
    pub hypotheses: Vec<Hypothesis>,
    pub n_list: Vec<usize>,
    pub alphas: Vec<f64>,
    pub mc_reps: usize,
    pub method: MethodSettings,
}

impl MonteCarloSettings {
    /// One design per (model, hypothesis), models outermost.
    pub fn experiments(&self) -> Vec<ExperimentConfig> {
        let m = &self.method;
        let mut out = Vec::new();
        for &model in &self.models {
            for &hypothesis in &self.hypotheses {
                out.push(ExperimentConfig {
                    model,
                    hypothesis,
                    n_list: self.n_list.clone(),
                    alphas: self.alphas.clone(),
                    replicates: self.mc_reps,
                    k: m.k,
                    burn_in: m.bootstrap.burn_in,
                    bootstrap: m.bootstrap,
                    fit: m.fit,
                    weight: m.weight.clone(),
                    master_seed: m.bootstrap.seed,
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Settings {
    Test(TestSettings),
    Simulate(SimulateSettings),
    Montecarlo(MonteCarloSettings),
}

/// Everything needed to reproduce a run. Thread count is left out on
/// purpose: results do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub settings: Settings,
}

impl RunManifest {
    pub fn new(settings: Settings, input: Option<PathBuf>, output: Option<PathBuf>) -> Self {
        let (subcommand, seed) = match &settings {
            Settings::Test(s) => ("test", s.method.bootstrap.seed),
            Settings::Simulate(s) => ("simulate", s.seed),
            Settings::Montecarlo(s) => ("montecarlo", s.method.bootstrap.seed),
        };
        RunManifest {
            subcommand: subcommand.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            input,
            output,
            settings,
        }
    }

    /// Accepts a bare manifest or any JSON object with a `manifest` field.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).context("parsing JSON")?;
        let inner = match value.get("manifest") {
            Some(m) => m.clone(),
            None => value,
        };
        serde_json::from_value(inner).context("not a run manifest")
    }
}

pub fn resolve_test(args: &TestArgs, data: Vec<f64>) -> Result<(TestSettings, usize)> {
    let cfg = ConfigFile::load_optional(args.method.config.as_deref())?;
    let alpha = cfg.value(args.alpha, "alpha")?;
    let method = resolve_method(&args.method, &cfg, alpha)?;
    let threads = cfg.value(args.method.threads, "threads")?.unwrap_or(0);
    Ok((TestSettings { method, data }, threads))
}

pub fn resolve_simulate(args: &SimulateArgs) -> Result<SimulateSettings> {
    Ok(SimulateSettings {
        model: args.model.parse()?,
        hypothesis: args.hypothesis.parse()?,
        n: args.n,
        k: args.k,
        seed: args.seed,
        burn_in: args.burn_in,
        format: args.format.parse()?,
    })
}

fn parse_choice<T>(text: &str, all: &[T]) -> Result<Vec<T>>
where
    T: FromStr + Copy,
    T::Err: Display,
{
    if text == "all" {
        return Ok(all.to_vec());
    }
    parse_list(text, "choice")
}

pub fn resolve_montecarlo(args: &MonteCarloArgs) -> Result<(MonteCarloSettings, usize)> {
    let cfg = ConfigFile::load_optional(args.method.config.as_deref())?;
    let paper = cfg.switch(args.paper_scale, "paper-scale")?.unwrap_or(false);
    let (default_n, default_reps): (&[usize], usize) = if paper { (&PAPER_N, 400) } else { (&DESK_N, 200) };

    let mut method_args = args.method.clone();
    if method_args.boot_reps.is_none() && cfg.value::<usize>(None, "boot-reps")?.is_none() {
        method_args.boot_reps = Some(default_reps);
    }
    let method = resolve_method(&method_args, &cfg, None)?;

    let models = match cfg.value(args.model.clone(), "model")? {
        Some(m) => parse_choice(&m, &ModelId::ALL)?,
        None => ModelId::ALL.to_vec(),
    };
    let hypotheses = match cfg.value(args.hypothesis.clone(), "hypothesis")? {
        Some(h) => parse_choice(&h, &Hypothesis::ALL)?,
        None => Hypothesis::ALL.to_vec(),
    };
    let n_list = match cfg.value(args.n.clone(), "n")? {
        Some(n) => parse_list(&n, "sample size")?,
        None => default_n.to_vec(),
    };
    let alphas = match cfg.value(args.alphas.clone(), "alphas")? {
        Some(a) => parse_list(&a, "alpha")?,
        None => STUDY_ALPHAS.to_vec(),
    };
    let mc_reps = cfg.value(args.mc_reps, "mc-reps")?.unwrap_or(default_reps);
    let threads = cfg.value(args.method.threads, "threads")?.unwrap_or(0);
    let settings = MonteCarloSettings {
        models,
        hypotheses,
        n_list,
        alphas,
        mc_reps,
        method,
    };
    for e in settings.experiments() {
        e.validate()?;
    }
    Ok((settings, threads))
}

//! Size and power study: rejection frequencies of the bootstrap test for the
//! AR and ARCH designs under the null and the skew-normal alternative.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_test, evaluate_series, quantile, BootstrapConfig};
use crate::error::{invalid, Error, Result};
use crate::kernel::FitConfig;
use crate::model::{simulate, Hypothesis, ModelId, DEFAULT_BURN_IN};
use crate::rng::SeedStream;
use crate::weight::WeightSpec;

pub const DESK_N: [usize; 3] = [50, 100, 200];
pub const PAPER_N: [usize; 5] = [50, 100, 200, 300, 400];
pub const STUDY_ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelId,
    pub hypothesis: Hypothesis,
    pub n_list: Vec<usize>,
    pub alphas: Vec<f64>,
    pub replicates: usize,
    pub k: usize,
    pub burn_in: usize,
    /// `seed` is ignored; each replicate derives its own.
    pub bootstrap: BootstrapConfig,
    pub fit: FitConfig,
    pub weight: WeightSpec,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// `M = B = 200`, `n ∈ {50, 100, 200}`.
    pub fn desk(model: ModelId, hypothesis: Hypothesis) -> Self {
        ExperimentConfig {
            model,
            hypothesis,
            n_list: DESK_N.to_vec(),
            alphas: STUDY_ALPHAS.to_vec(),
            replicates: 200,
            k: 1,
            burn_in: DEFAULT_BURN_IN,
            bootstrap: BootstrapConfig {
                replicates: 200,
                ..BootstrapConfig::default()
            },
            fit: FitConfig::default(),
            weight: WeightSpec::default_for(1),
            master_seed: 0,
        }
    }

    /// `M = B = 400`, `n ∈ {50, ..., 400}`.
    pub fn paper_scale(model: ModelId, hypothesis: Hypothesis) -> Self {
        let mut cfg = Self::desk(model, hypothesis);
        cfg.n_list = PAPER_N.to_vec();
        cfg.replicates = 400;
        cfg.bootstrap.replicates = 400;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.alphas.is_empty() {
            return Err(invalid("experiment needs at least one sample size and one level"));
        }
        if self.replicates == 0 {
            return Err(invalid("experiment needs at least one Monte Carlo replicate"));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(invalid(format!("alpha must lie in (0, 1), got {a}")));
        }
        if self.k == 0 || self.weight.k() != self.k {
            return Err(invalid("k must be positive and match the weight"));
        }
        self.bootstrap.validate()
    }

    fn replicate_stream(&self, n: usize, r: usize) -> SeedStream {
        SeedStream::new(self.master_seed)
            .child(self.model.index())
            .child(self.hypothesis.index())
            .child(n as u64)
            .child(r as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionCell {
    pub n: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub rate: f64,
    /// Binomial standard error `√(p̂(1 − p̂)/M)`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub model: ModelId,
    pub hypothesis: Hypothesis,
    pub n_list: Vec<usize>,
    pub alphas: Vec<f64>,
    pub cells: Vec<RejectionCell>,
    pub replicates: usize,
    pub bootstrap_replicates: usize,
    pub master_seed: u64,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl RejectionTable {
    pub fn cell(&self, n: usize, alpha: f64) -> Option<&RejectionCell> {
        self.cells.iter().find(|c| c.n == n && c.alpha == alpha)
    }

    pub fn rate(&self, n: usize, alpha: f64) -> Option<f64> {
        self.cell(n, alpha).map(|c| c.rate)
    }

    pub const CSV_HEADER: &'static str = "model,hypothesis,n,alpha,M,B,reject_rate,se,seed";

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{:.4},{:.4},{}",
                self.model,
                self.hypothesis,
                c.n,
                c.alpha,
                self.replicates,
                self.bootstrap_replicates,
                c.rate,
                c.se,
                self.master_seed
            );
        }
        out
    }

    /// Aligned layout with one row per `n` and one column per `α`.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "model {} / {} hypothesis (M = {}, B = {}, seed = {})\n",
            self.model, self.hypothesis, self.replicates, self.bootstrap_replicates, self.master_seed
        );
        out.push_str("         ");
        for a in &self.alphas {
            let _ = write!(out, "{:>14}", format!("alpha={a}"));
        }
        out.push('\n');
        for &n in &self.n_list {
            let _ = write!(out, "n={n:<6} ");
            for &a in &self.alphas {
                let c = self.cell(n, a).expect("cell exists");
                let _ = write!(out, "{:>14}", format!("{:.4}({:.3})", c.rate, c.se));
            }
            out.push('\n');
        }
        out
    }
}

/// Render several tables as one CSV document.
pub fn tables_to_csv(tables: &[RejectionTable]) -> String {
    let mut out = String::from(RejectionTable::CSV_HEADER);
    out.push('\n');
    for t in tables {
        out.push_str(&t.csv_rows());
    }
    out
}

/// Run `f` on a pool of `threads` workers (`0` = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Which levels reject, for one simulated series.
fn replicate_decisions(cfg: &ExperimentConfig, n: usize, r: usize) -> Result<Vec<bool>> {
    let stream = cfg.replicate_stream(n, r);
    let model = cfg.model.model(cfg.hypothesis).with_burn_in(cfg.burn_in);
    let series = simulate(&model, n, cfg.k, stream.child(0))?;
    let boot = BootstrapConfig {
        seed: stream.child(1).key(),
        ..cfg.bootstrap
    };
    let report = bootstrap_test(&series, &cfg.fit, &cfg.weight, &boot)?;
    let mut sorted = report.bootstrap_statistics.clone();
    sorted.sort_by(f64::total_cmp);
    cfg.alphas
        .iter()
        .map(|&a| Ok(report.statistic > quantile(&sorted, 1.0 - a)?))
        .collect()
}

/// Rejection table for one design, computed in the current rayon pool.
pub fn run_experiment_here(cfg: &ExperimentConfig) -> Result<RejectionTable> {
    cfg.validate()?;
    let start = Instant::now();
    let mut cells = Vec::new();
    for &n in &cfg.n_list {
        let decisions: Vec<Vec<bool>> = (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                replicate_decisions(cfg, n, r).map_err(|e| Error::Cell {
                    model: cfg.model.to_string(),
                    hypothesis: cfg.hypothesis.to_string(),
                    n,
                    replicate: r,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        let m = cfg.replicates as f64;
        for (i, &alpha) in cfg.alphas.iter().enumerate() {
            let rejections = decisions.iter().filter(|d| d[i]).count();
            let rate = rejections as f64 / m;
            cells.push(RejectionCell {
                n,
                alpha,
                rejections,
                rate,
                se: (rate * (1.0 - rate) / m).sqrt(),
            });
        }
    }
    Ok(RejectionTable {
        model: cfg.model,
        hypothesis: cfg.hypothesis,
        n_list: cfg.n_list.clone(),
        alphas: cfg.alphas.clone(),
        cells,
        replicates: cfg.replicates,
        bootstrap_replicates: cfg.bootstrap.replicates,
        master_seed: cfg.master_seed,
        wall_time: start.elapsed(),
    })
}

/// Rejection table for one design on `parallelism` worker threads.
/// The result does not depend on `parallelism`.
pub fn run_experiment(cfg: &ExperimentConfig, parallelism: usize) -> Result<RejectionTable> {
    with_threads(parallelism, || run_experiment_here(cfg))?
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub model: ModelId,
    pub hypothesis: Hypothesis,
    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub fit: FitConfig,
    pub weight: WeightSpec,
}

impl ProbeConfig {
    pub fn new(model: ModelId, hypothesis: Hypothesis, n_list: Vec<usize>, replicates: usize) -> Self {
        ProbeConfig {
            model,
            hypothesis,
            n_list,
            replicates,
            master_seed: 0,
            fit: FitConfig::default(),
            weight: WeightSpec::default_for(1),
        }
    }
}

/// Mean of `T_n / n` over replicates for every `n`: tends to zero under the
/// null and to a positive limit under a fixed alternative.
pub fn consistency_probe(cfg: &ProbeConfig) -> Result<Vec<(usize, f64)>> {
    if cfg.n_list.len() < 2 {
        return Err(invalid("consistency probe needs at least two sample sizes"));
    }
    if cfg.replicates == 0 {
        return Err(invalid("consistency probe needs at least one replicate"));
    }
    let k = cfg.weight.k();
    let model = cfg.model.model(cfg.hypothesis);
    cfg.n_list
        .iter()
        .map(|&n| {
            let ratios: Vec<f64> = (0..cfg.replicates)
                .into_par_iter()
                .map(|r| {
                    let stream = SeedStream::new(cfg.master_seed)
                        .child(cfg.model.index())
                        .child(cfg.hypothesis.index())
                        .child(n as u64)
                        .child(r as u64);
                    let series = simulate(&model, n, k, stream)?;
                    Ok(evaluate_series(&series, &cfg.fit, &cfg.weight)?.statistic / n as f64)
                })
                .collect::<Result<_>>()?;
            Ok((n, ratios.iter().sum::<f64>() / cfg.replicates as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(model: ModelId, hypothesis: Hypothesis) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::desk(model, hypothesis);
        cfg.n_list = vec![40, 60];
        cfg.replicates = 12;
        cfg.bootstrap.replicates = 19;
        cfg
    }

    #[test]
    fn table_shape_and_bounds() {
        let t = run_experiment(&tiny(ModelId::ArchIi, Hypothesis::Null), 1).unwrap();
        assert_eq!(t.cells.len(), 6);
        for c in &t.cells {
            assert!((0.0..=1.0).contains(&c.rate));
            assert!((c.se - (c.rate * (1.0 - c.rate) / 12.0).sqrt()).abs() < 1e-15);
            assert_eq!(c.rate, c.rejections as f64 / 12.0);
        }
        // one bootstrap sample per series: rejections nest across levels
        for &n in &t.n_list {
            assert!(t.rate(n, 0.01) <= t.rate(n, 0.05));
            assert!(t.rate(n, 0.05) <= t.rate(n, 0.1));
        }
        let csv = tables_to_csv(std::slice::from_ref(&t));
        assert!(csv.starts_with("model,hypothesis,n,alpha,M,B,reject_rate,se,seed\n"));
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.lines().nth(1).unwrap().starts_with("arch-ii,null,40,0.01,12,19,"));
        assert!(t.to_text().contains("n=60"));
    }

    #[test]
    fn invariant_to_thread_count() {
        let cfg = tiny(ModelId::ArI, Hypothesis::Alternative);
        let a = run_experiment(&cfg, 1).unwrap();
        let b = run_experiment(&cfg, 3).unwrap();
        assert_eq!(a.cells, b.cells);
    }

    #[test]
    fn cell_errors_carry_coordinates() {
        let mut cfg = tiny(ModelId::ArI, Hypothesis::Null);
        cfg.bootstrap.min_kept = 1000;
        match run_experiment(&cfg, 1) {
            Err(Error::Cell { model, n, replicate, .. }) => {
                assert_eq!(model, "ar-i");
                assert_eq!(n, 40);
                assert!(replicate < 12);
            }
            other => panic!("expected a cell error, got {other:?}"),
        }
    }

    #[test]
    fn probe_requires_two_sizes() {
        let cfg = ProbeConfig::new(ModelId::ArI, Hypothesis::Null, vec![100], 2);
        assert!(consistency_probe(&cfg).is_err());
    }

    #[test]
    fn probe_null_decays() {
        let cfg = ProbeConfig::new(ModelId::ArI, Hypothesis::Null, vec![100, 800], 20);
        let out = consistency_probe(&cfg).unwrap();
        assert!(out[1].1 < out[0].1, "{out:?}");
    }

    #[test]
    fn probe_alternative_keeps_positive_limit() {
        let null = consistency_probe(&ProbeConfig::new(ModelId::ArI, Hypothesis::Null, vec![100, 800], 20)).unwrap();
        let alt =
            consistency_probe(&ProbeConfig::new(ModelId::ArI, Hypothesis::Alternative, vec![100, 800], 20)).unwrap();
        // the null decays like 1/n, the alternative levels off above it
        assert!(null[1].1 < 0.25 * null[0].1, "{null:?}");
        assert!(alt[1].1 > 2.0 * null[1].1, "{alt:?} vs {null:?}");
        assert!(alt[1].1 / alt[0].1 > 2.0 * null[1].1 / null[0].1);
    }
}

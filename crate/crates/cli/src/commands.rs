use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use charn_core::montecarlo::run_experiment_here;
use charn_core::{
    bootstrap_test, simulate, tables_to_csv, with_threads, RejectionTable, SeedStream, TestReport, TimeSeries,
};
use serde::Serialize;

use crate::args::{MonteCarloArgs, ReplayArgs, SimulateArgs, TestArgs};
use crate::input::read_series;
use crate::settings::{
    resolve_montecarlo, resolve_simulate, resolve_test, MonteCarloSettings, RunManifest, SeriesFormat, Settings,
    SimulateSettings, TestSettings,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Rejected,
}

#[derive(Serialize)]
struct TestOutput<'a> {
    #[serde(flatten)]
    report: &'a TestReport,
    manifest: &'a RunManifest,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// `<out>.manifest.json`, next to a non-JSON output.
fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn test(args: TestArgs) -> Result<Outcome> {
    let data = read_series(&args.input)?;
    let (settings, threads) = resolve_test(&args, data)?;
    let manifest = RunManifest::new(Settings::Test(settings), Some(args.input.clone()), args.out.clone());
    let reject = run_test(&manifest, args.out.as_deref(), threads)?;
    Ok(if reject && args.exit_on_reject {
        Outcome::Rejected
    } else {
        Outcome::Done
    })
}

fn test_settings(manifest: &RunManifest) -> &TestSettings {
    match &manifest.settings {
        Settings::Test(s) => s,
        _ => unreachable!("caller matched the subcommand"),
    }
}

fn run_test(manifest: &RunManifest, out: Option<&Path>, threads: usize) -> Result<bool> {
    let s = test_settings(manifest);
    let m = &s.method;
    let needed = m.k + m.bootstrap.min_kept;
    if s.data.len() < needed {
        bail!(
            "series too short: got {} values, need at least {needed} ({} pre-sample lags plus {} observations)",
            s.data.len(),
            m.k,
            m.bootstrap.min_kept
        );
    }
    let series = TimeSeries::new(s.data.clone(), m.k)?;
    let report = with_threads(threads, || bootstrap_test(&series, &m.fit, &m.weight, &m.bootstrap))??;
    emit(out, &to_json(&TestOutput {
        report: &report,
        manifest,
    })?)?;
    Ok(report.reject)
}

pub fn simulate_cmd(args: SimulateArgs) -> Result<Outcome> {
    let settings = resolve_simulate(&args)?;
    let manifest = RunManifest::new(Settings::Simulate(settings), None, args.out.clone());
    run_simulate(&manifest, args.out.as_deref())?;
    Ok(Outcome::Done)
}

fn render_series(s: &SimulateSettings) -> Result<String> {
    let model = s.model.model(s.hypothesis).with_burn_in(s.burn_in);
    let series = simulate(&model, s.n, s.k, SeedStream::new(s.seed))?;
    let mut text = String::new();
    match s.format {
        SeriesFormat::Csv => {
            // t <= 0 marks the pre-sample lags.
            text.push_str("t,value\n");
            for (i, v) in series.values().iter().enumerate() {
                let _ = writeln!(text, "{},{v}", i as i64 - s.k as i64 + 1);
            }
        }
        SeriesFormat::Lines => {
            for v in series.values() {
                let _ = writeln!(text, "{v}");
            }
        }
    }
    Ok(text)
}

fn run_simulate(manifest: &RunManifest, out: Option<&Path>) -> Result<()> {
    let Settings::Simulate(s) = &manifest.settings else {
        unreachable!("caller matched the subcommand")
    };
    emit(out, &render_series(s)?)?;
    if let Some(path) = out {
        emit(Some(&sidecar(path)), &to_json(manifest)?)?;
    }
    Ok(())
}

pub fn montecarlo(args: MonteCarloArgs) -> Result<Outcome> {
    let (settings, threads) = resolve_montecarlo(&args)?;
    let manifest = RunManifest::new(Settings::Montecarlo(settings), None, args.out_dir.clone());
    run_montecarlo(&manifest, args.out_dir.as_deref(), threads)?;
    Ok(Outcome::Done)
}

fn run_tables(s: &MonteCarloSettings) -> Result<Vec<RejectionTable>> {
    s.experiments()
        .iter()
        .map(|cfg| {
            let table = run_experiment_here(cfg)?;
            eprintln!(
                "{} / {}: {:.1} s",
                table.model,
                table.hypothesis,
                table.wall_time.as_secs_f64()
            );
            Ok(table)
        })
        .collect()
}

fn run_montecarlo(manifest: &RunManifest, out_dir: Option<&Path>, threads: usize) -> Result<()> {
    let Settings::Montecarlo(s) = &manifest.settings else {
        unreachable!("caller matched the subcommand")
    };
    let start = Instant::now();
    let tables = with_threads(threads, || run_tables(s))??;
    eprintln!("total: {:.1} s", start.elapsed().as_secs_f64());
    let text = tables.iter().map(|t| t.to_text()).collect::<Vec<_>>().join("\n");
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        emit(Some(&dir.join("rejection.csv")), &tables_to_csv(&tables))?;
        emit(Some(&dir.join("rejection.txt")), &text)?;
        emit(Some(&dir.join("manifest.json")), &to_json(manifest)?)?;
    }
    emit(None, &text)
}

pub fn replay(args: ReplayArgs) -> Result<Outcome> {
    let path = &args.manifest;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let manifest = RunManifest::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
    if manifest.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, replaying with {}",
            manifest.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let threads = args.threads.unwrap_or(0);
    let out = args.out.as_deref();
    match &manifest.settings {
        Settings::Test(_) => {
            run_test(&manifest, out, threads)?;
        }
        Settings::Simulate(_) => run_simulate(&manifest, out)?,
        Settings::Montecarlo(_) => run_montecarlo(&manifest, out, threads)?,
    }
    Ok(Outcome::Done)
}

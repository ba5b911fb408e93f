//! Fixtures shared by the benchmarks.

use charn_core::{simulate, FitConfig, FittedCharn, Hypothesis, ModelId, SeedStream, StatisticInput, TimeSeries, WeightSpec};

/// Model (i) under the null, one lag.
pub fn ar_series(n: usize, seed: u64) -> TimeSeries {
    let model = ModelId::ArI.model(Hypothesis::Null);
    simulate(&model, n, 1, SeedStream::new(seed)).expect("simulation")
}

/// Statistic input built from fitted residuals of an AR series.
pub fn fitted_input(n: usize, seed: u64) -> StatisticInput {
    let series = ar_series(n, seed);
    let fit = FittedCharn::fit(&series, &FitConfig::default()).expect("fit");
    let residuals = fit.residuals().expect("residuals");
    StatisticInput::from_residuals(&series, &residuals, WeightSpec::default_for(1)).expect("input")
}

//! Test result container shared by all hypothesis tests.

use std::collections::BTreeMap;

use serde::Serialize;

/// Outcome of one hypothesis test: the statistic, its p-value, and enough
/// metadata to reproduce the run.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    /// Observed test statistic.
    pub statistic: f64,
    /// p-value in `[0, 1]`.
    pub p_value: f64,
    /// Test identifier, e.g. `"s2n"` or `"maxstab"`.
    pub method: String,
    /// Number of resampling replicates (0 for asymptotic tests).
    pub replicates: usize,
    /// Seed of the resampling stream, if any.
    pub seed: Option<u64>,
    /// True for the heuristic variants (tail-restricted or block-maxima
    /// pre-processed) whose calibration is approximate by construction.
    pub heuristic: bool,
    /// Auxiliary diagnostics such as the jackknife variance or tau.
    /// Ordered so serialized reports are byte-stable.
    pub extras: BTreeMap<String, f64>,
}

impl TestReport {
    pub fn new(method: &str, statistic: f64, p_value: f64) -> Self {
        Self {
            statistic,
            p_value,
            method: method.to_string(),
            replicates: 0,
            seed: None,
            heuristic: false,
            extras: BTreeMap::new(),
        }
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }
}

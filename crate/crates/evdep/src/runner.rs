//! Uniform dispatch of the implemented tests by identifier, shared by the
//! power-study harness and the command line.

use crate::empirical::MultiplierConfig;
use crate::error::{Error, Result};
use crate::kendall::{test_s2n, test_s3n};
use crate::maxstab::{test_maxstab, MaxStabConfig};
use crate::pickands::{test_aplot_residual, test_pickands_a, DEFAULT_APLOT_KNOTS};
use crate::ranks::DataMatrix;
use crate::report::TestReport;

/// Identifier of an implemented test of extreme-value dependence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestId {
    S2n,
    S3n,
    Maxstab,
    PickandsA,
    AplotResid,
}

impl TestId {
    pub const ALL: [TestId; 5] = [
        TestId::S2n,
        TestId::S3n,
        TestId::Maxstab,
        TestId::PickandsA,
        TestId::AplotResid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestId::S2n => "s2n",
            TestId::S3n => "s3n",
            TestId::Maxstab => "maxstab",
            TestId::PickandsA => "pickands_a",
            TestId::AplotResid => "aplot_resid",
        }
    }

    /// True for tests calibrated by resampling rather than asymptotics.
    pub fn is_bootstrap(&self) -> bool {
        matches!(
            self,
            TestId::Maxstab | TestId::PickandsA | TestId::AplotResid
        )
    }

    /// Stable numeric id used in seed derivation.
    pub fn id(&self) -> u64 {
        match self {
            TestId::S2n => 1,
            TestId::S3n => 2,
            TestId::Maxstab => 3,
            TestId::PickandsA => 4,
            TestId::AplotResid => 5,
        }
    }
}

impl std::str::FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s2n" => Ok(TestId::S2n),
            "s3n" => Ok(TestId::S3n),
            "maxstab" => Ok(TestId::Maxstab),
            "pickands_a" => Ok(TestId::PickandsA),
            "aplot_resid" => Ok(TestId::AplotResid),
            other => Err(Error::UnknownTest(other.into())),
        }
    }
}

impl std::fmt::Display for TestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Knobs shared by the bootstrap-calibrated tests.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Resampling replicates for the bootstrap tests.
    pub bootstrap_replicates: usize,
    pub seed: u64,
    /// Aggregation exponents of the max-stability statistic.
    pub r_values: Vec<f64>,
    /// Upper-tail restriction for maxstab / trimming for aplot_resid.
    pub threshold: Option<Vec<f64>>,
    /// Interior knots of the A-plot spline.
    pub aplot_knots: usize,
}

impl RunOptions {
    pub fn new(bootstrap_replicates: usize, seed: u64) -> Self {
        Self {
            bootstrap_replicates,
            seed,
            r_values: vec![3.0, 4.0, 5.0],
            threshold: None,
            aplot_knots: DEFAULT_APLOT_KNOTS,
        }
    }

    fn threshold_pair(&self) -> Result<Option<[f64; 2]>> {
        match &self.threshold {
            None => Ok(None),
            Some(t) if t.len() == 2 => Ok(Some([t[0], t[1]])),
            Some(t) => Err(Error::DimensionMismatch {
                expected: 2,
                got: t.len(),
            }),
        }
    }
}

/// Runs one test on the data matrix.
pub fn run_test(id: TestId, data: &DataMatrix, opts: &RunOptions) -> Result<TestReport> {
    match id {
        TestId::S2n => test_s2n(data),
        TestId::S3n => test_s3n(data),
        TestId::Maxstab => {
            let mut cfg =
                MaxStabConfig::new(MultiplierConfig::new(opts.bootstrap_replicates, opts.seed));
            cfg.r_values = opts.r_values.clone();
            cfg.tail_threshold = opts.threshold.clone();
            test_maxstab(data, &cfg)
        }
        TestId::PickandsA => {
            let cfg = MultiplierConfig::new(opts.bootstrap_replicates, opts.seed);
            test_pickands_a(data, &cfg)
        }
        TestId::AplotResid => test_aplot_residual(
            data,
            opts.bootstrap_replicates,
            opts.seed,
            opts.threshold_pair()?,
            opts.aplot_knots,
        ),
    }
}

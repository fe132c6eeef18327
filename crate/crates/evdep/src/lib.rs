//! Rank-based tests of extreme-value (max-stable) dependence for bivariate
//! and multivariate samples, together with the machinery they stand on:
//! pseudo-observations with explicit ties policies, block maxima, the
//! empirical copula with its multiplier bootstrap, Kendall's distribution,
//! the CFG and spline estimators of the Pickands dependence function,
//! copula samplers, and a Monte Carlo power-study harness.
//!
//! The implemented tests, by identifier:
//!
//! * `s2n` — two-moment Kendall-distribution test, jackknife/normal p-value
//! * `s3n` — three-moment variant of the same idea
//! * `maxstab` — max-stability discrepancy test, multiplier bootstrap
//! * `pickands_a` — empirical copula vs. its CFG reconstruction,
//!   multiplier bootstrap
//! * `aplot_resid` — spline residual of the A-plot, parametric bootstrap
//!
//! All procedures are rank-based, hence invariant under strictly increasing
//! transformations of the margins, and deterministic given their seeds.

pub mod empirical;
pub mod error;
pub mod experiments;
pub mod kendall;
pub mod maxstab;
pub mod numeric;
pub mod pickands;
pub mod power;
pub mod ranks;
pub mod report;
pub mod runner;
pub mod simulate;
pub mod spline;

pub use empirical::{multiplier_replicates, EmpiricalCopula, MultiplierConfig, MultiplierLaw};
pub use error::{Error, Result};
pub use experiments::{
    randomize_experiment, ties_experiment, ties_rejection_rates, RandomizeRow,
    TiesComparisonRow, TiesTemplate,
};
pub use kendall::{
    cvm_kendall_distance, kendall_sample, null_kendall_cdf, null_moment, test_s2n, test_s3n,
    KendallSample,
};
pub use maxstab::{
    d_process, statistic_t, test_maxstab, test_mda_blockmax, MaxStabConfig, MdaInnerTest,
};
pub use pickands::{
    a_plot, cfg_estimator, ev_copula_from_a, spline_fit_a, test_aplot_residual, test_pickands_a,
    APlot, PickandsEstimate,
};
pub use power::{run_power_study, PowerSpec, PowerTable};
pub use ranks::{
    block_maxima, block_maxima_by_group, kendall_tau, kendall_tau_fast, pseudo_observations,
    DataMatrix, KendallTau, PseudoObs, TiesPolicy,
};
pub use report::TestReport;
pub use runner::{run_test, RunOptions, TestId};
pub use simulate::{
    analytic_copula, family_from_tau, fit_gumbel_itau, param_from_tau, sample, CopulaFamily,
    FamilyKind, GumbelItauFit,
};

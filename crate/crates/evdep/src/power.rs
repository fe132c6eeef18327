//! Monte Carlo power-study harness: rejection rates of the implemented
//! tests across copula families and dependence levels, with Monte Carlo
//! standard errors.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::mix_seed;
use crate::runner::{run_test, RunOptions, TestId};
use crate::simulate::{family_from_tau, FamilyKind};

/// One scenario grid: families x tau levels, a sample size, a replication
/// count and a significance level.
#[derive(Debug, Clone)]
pub struct PowerSpec {
    pub families: Vec<FamilyKind>,
    pub taus: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    /// Significance level of the rejection decision.
    pub level: f64,
    /// Bootstrap replicates handed to the resampling-calibrated tests.
    pub bootstrap_replicates: usize,
    pub seed: u64,
}

impl PowerSpec {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be >= 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.families.is_empty() || self.taus.is_empty() {
            return Err(Error::InvalidParameter(
                "need at least one family and one tau".into(),
            ));
        }
        Ok(())
    }
}

/// One row of the rejection-rate table.
#[derive(Debug, Clone)]
pub struct PowerRow {
    pub family: String,
    pub tau: f64,
    pub test: String,
    pub rate: f64,
    /// Binomial Monte Carlo standard error `sqrt(rate (1-rate) / reps)`.
    pub mc_se: f64,
    pub reps: usize,
    pub mean_runtime_s: f64,
}

/// Rejection rates keyed by (family, tau, test).
#[derive(Debug, Clone)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    /// CSV rendering. Wall-clock timings are excluded unless asked for,
    /// so that identical seeds yield byte-identical files.
    pub fn to_csv_string(&self, include_timings: bool) -> String {
        let mut out = String::new();
        if include_timings {
            out.push_str("family,tau,test,rate,mc_se,reps,mean_runtime_s\n");
        } else {
            out.push_str("family,tau,test,rate,mc_se,reps\n");
        }
        for r in &self.rows {
            if include_timings {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{:.6}",
                    r.family, r.tau, r.test, r.rate, r.mc_se, r.reps, r.mean_runtime_s
                );
            } else {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.family, r.tau, r.test, r.rate, r.mc_se, r.reps
                );
            }
        }
        out
    }

    /// Aligned text table, one row per (family, tau) and one column per
    /// test, rates in percent.
    pub fn to_text_table(&self, tests: &[TestId]) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<14}{:>6}", "family", "tau");
        for t in tests {
            let _ = write!(out, "{:>12}", t.name());
        }
        out.push('\n');
        let mut seen: Vec<(String, f64)> = Vec::new();
        for r in &self.rows {
            if !seen.iter().any(|(f, t)| *f == r.family && *t == r.tau) {
                seen.push((r.family.clone(), r.tau));
            }
        }
        for (family, tau) in seen {
            let _ = write!(out, "{family:<14}{tau:>6.2}");
            for t in tests {
                let rate = self
                    .rows
                    .iter()
                    .find(|r| r.family == family && r.tau == tau && r.test == t.name())
                    .map(|r| r.rate);
                match rate {
                    Some(v) => {
                        let _ = write!(out, "{:>12.1}", 100.0 * v);
                    }
                    None => {
                        let _ = write!(out, "{:>12}", "-");
                    }
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs the study: for every (family, tau, rep) one sample is drawn and
/// every requested test applied to it; rejection indicators are aggregated
/// into rates. Per-rep seeds are derived from (seed, family, tau, rep), so
/// adding a test to the list does not change the samples drawn, and equal
/// seeds reproduce the table exactly.
pub fn run_power_study(spec: &PowerSpec, tests: &[TestId]) -> Result<PowerTable> {
    spec.validate()?;
    if tests.is_empty() {
        return Err(Error::InvalidParameter("no tests requested".into()));
    }
    let mut rows = Vec::new();
    for &kind in &spec.families {
        for &tau in &spec.taus {
            let family = family_from_tau(kind, tau)?;
            let per_rep: Vec<Vec<(bool, u128)>> = (0..spec.reps)
                .into_par_iter()
                .map(|rep| -> Result<Vec<(bool, u128)>> {
                    let sample_seed =
                        mix_seed(&[spec.seed, kind.id(), tau.to_bits(), rep as u64]);
                    let data = crate::simulate::sample(&family, spec.n, sample_seed)?;
                    tests
                        .iter()
                        .map(|&test| {
                            let mut opts =
                                RunOptions::new(spec.bootstrap_replicates, 0);
                            opts.seed = mix_seed(&[sample_seed, 1000 + test.id()]);
                            let start = Instant::now();
                            let report = run_test(test, &data, &opts)?;
                            let elapsed = start.elapsed().as_nanos();
                            Ok((report.p_value <= spec.level, elapsed))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;

            for (t_idx, &test) in tests.iter().enumerate() {
                let rejections = per_rep.iter().filter(|r| r[t_idx].0).count();
                let total_ns: u128 = per_rep.iter().map(|r| r[t_idx].1).sum();
                let rate = rejections as f64 / spec.reps as f64;
                rows.push(PowerRow {
                    family: kind.name().to_string(),
                    tau,
                    test: test.name().to_string(),
                    rate,
                    mc_se: (rate * (1.0 - rate) / spec.reps as f64).sqrt(),
                    reps: spec.reps,
                    mean_runtime_s: total_ns as f64 / spec.reps as f64 / 1e9,
                });
            }
        }
    }
    Ok(PowerTable { rows })
}

//! Reusable engines for the two ties-handling studies: rerunning an
//! analysis under many random rank assignments, and measuring how a ties
//! pattern transplanted onto continuous samples distorts each test.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::mix_seed;
use crate::ranks::{pseudo_observations, DataMatrix, TiesPolicy};
use crate::runner::{run_test, RunOptions, TestId};
use crate::simulate::{fit_gumbel_itau, sample, CopulaFamily};

/// One randomization of the ties: p-values of the requested tests plus the
/// inversion-of-tau fit computed on that randomization.
#[derive(Debug, Clone)]
pub struct RandomizeRow {
    pub randomization: usize,
    pub p_values: BTreeMap<String, f64>,
    pub theta_hat: f64,
    pub std_err: f64,
}

/// Runs the analysis on `randomizations` independent random-rank
/// resolutions of the ties in `data`. Randomization k uses the ties seed
/// derived from `(master_seed, k)`, so the schedule is reproducible and
/// every randomization is independent of the others.
pub fn randomize_experiment(
    data: &DataMatrix,
    tests: &[TestId],
    randomizations: usize,
    master_seed: u64,
    opts: &RunOptions,
) -> Result<Vec<RandomizeRow>> {
    data.require_cols(2)?;
    if randomizations < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 randomizations".into(),
        ));
    }
    (0..randomizations)
        .into_par_iter()
        .map(|k| -> Result<RandomizeRow> {
            let ties_seed = mix_seed(&[master_seed, k as u64]);
            let pobs = pseudo_observations(data, TiesPolicy::Random { seed: ties_seed })?;
            let pdata = pobs.to_data_matrix();
            let mut p_values = BTreeMap::new();
            for &test in tests {
                let mut run_opts = opts.clone();
                run_opts.seed = mix_seed(&[ties_seed, 500 + test.id()]);
                let report = run_test(test, &pdata, &run_opts)?;
                p_values.insert(test.name().to_string(), report.p_value);
            }
            let fit = fit_gumbel_itau(&pdata)?;
            Ok(RandomizeRow {
                randomization: k,
                p_values,
                theta_hat: fit.theta_hat,
                std_err: fit.std_err,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Ties template experiment
// ---------------------------------------------------------------------------

/// The ties pattern of a reference data set: for each column, the max-rank
/// of every order statistic. Tied runs in the sorted reference column show
/// up as repeated entries, e.g. `[1, 3, 3, 4]` when the 2nd and 3rd
/// smallest values coincide.
#[derive(Debug, Clone)]
pub struct TiesTemplate {
    per_column: Vec<Vec<usize>>,
    n: usize,
}

impl TiesTemplate {
    /// Extracts the pattern from reference data.
    pub fn from_data(data: &DataMatrix) -> Self {
        let n = data.n_rows();
        let per_column = (0..data.n_cols())
            .map(|j| {
                let mut col = data.column(j);
                col.sort_by(|a, b| a.total_cmp(b));
                let mut pattern = vec![0usize; n];
                let mut start = 0;
                while start < n {
                    let mut end = start + 1;
                    while end < n && col[end] == col[start] {
                        end += 1;
                    }
                    for p in pattern.iter_mut().take(end).skip(start) {
                        *p = end; // 1-based max rank of the tied run
                    }
                    start = end;
                }
                pattern
            })
            .collect();
        Self { per_column, n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True if any column has a genuinely tied run.
    pub fn has_ties(&self) -> bool {
        self.per_column
            .iter()
            .any(|pat| pat.iter().enumerate().any(|(k, &r)| r != k + 1))
    }

    /// Imposes the pattern on a continuous sample: column by column, the
    /// k-th smallest value is replaced by the `pattern[k]`-th smallest, so
    /// the modified column's empirical c.d.f. matches the reference data's.
    /// Row pairings are preserved.
    pub fn apply(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.n_rows() != self.n || data.n_cols() != self.per_column.len() {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: data.n_rows(),
            });
        }
        let n = self.n;
        let d = data.n_cols();
        let mut columns: Vec<Vec<f64>> = (0..d).map(|j| data.column(j)).collect();
        for (j, pattern) in self.per_column.iter().enumerate() {
            let col = &mut columns[j];
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            let sorted: Vec<f64> = order.iter().map(|&i| col[i]).collect();
            for (k, &row) in order.iter().enumerate() {
                col[row] = sorted[pattern[k] - 1];
            }
        }
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..d).map(|j| columns[j][i]).collect()).collect();
        DataMatrix::from_rows(&rows, data.labels().to_vec())
    }
}

/// p-values of one test on (continuous, average-ranked tied, random-ranked
/// tied) versions of the same underlying sample.
#[derive(Debug, Clone, Copy)]
pub struct TiesComparisonRow {
    pub p_continuous: f64,
    pub p_average: f64,
    pub p_random: f64,
}

/// The ties-effect experiment: simulates `reps` continuous samples from a
/// Gumbel–Hougaard copula with parameter `theta`, transplants the reference
/// ties pattern onto each, and compares the test's p-value on the
/// continuous sample with the p-values under average and random rank
/// resolutions of the transplanted ties.
pub fn ties_experiment(
    template: &TiesTemplate,
    test: TestId,
    theta: f64,
    reps: usize,
    master_seed: u64,
    opts: &RunOptions,
) -> Result<Vec<TiesComparisonRow>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("reps must be >= 1".into()));
    }
    let family = CopulaFamily::Gumbel { theta };
    (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<TiesComparisonRow> {
            let rep_seed = mix_seed(&[master_seed, rep as u64]);
            let continuous = sample(&family, template.n(), rep_seed)?;
            let tied = template.apply(&continuous)?;

            let run = |data: &DataMatrix, salt: u64| -> Result<f64> {
                let mut run_opts = opts.clone();
                run_opts.seed = mix_seed(&[rep_seed, salt, test.id()]);
                Ok(run_test(test, data, &run_opts)?.p_value)
            };
            let p_continuous = run(&continuous, 1)?;
            let avg = pseudo_observations(&tied, TiesPolicy::Average)?.to_data_matrix();
            let p_average = run(&avg, 2)?;
            let rand_pobs = pseudo_observations(
                &tied,
                TiesPolicy::Random {
                    seed: mix_seed(&[rep_seed, 3]),
                },
            )?;
            let p_random = run(&rand_pobs.to_data_matrix(), 4)?;
            Ok(TiesComparisonRow {
                p_continuous,
                p_average,
                p_random,
            })
        })
        .collect()
}

/// Rejection rates at `level` for the three ties treatments.
pub fn ties_rejection_rates(rows: &[TiesComparisonRow], level: f64) -> [f64; 3] {
    let n = rows.len() as f64;
    [
        rows.iter().filter(|r| r.p_continuous <= level).count() as f64 / n,
        rows.iter().filter(|r| r.p_average <= level).count() as f64 / n,
        rows.iter().filter(|r| r.p_random <= level).count() as f64 / n,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_round_trip_without_ties_is_identity() {
        let data = sample(&CopulaFamily::Independence, 50, 5).unwrap();
        let template = TiesTemplate::from_data(&data);
        assert!(!template.has_ties());
        let fresh = sample(&CopulaFamily::Independence, 50, 6).unwrap();
        let applied = template.apply(&fresh).unwrap();
        for i in 0..50 {
            assert_eq!(applied.row(i), fresh.row(i));
        }
    }

    #[test]
    fn template_replicates_tie_pattern() {
        // reference column with the 2nd and 3rd smallest tied
        let reference = DataMatrix::from_rows(
            &[
                vec![10.0, 1.0],
                vec![5.0, 2.0],
                vec![5.0, 3.0],
                vec![1.0, 4.0],
            ],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let template = TiesTemplate::from_data(&reference);
        assert!(template.has_ties());

        let fresh = DataMatrix::from_rows(
            &[
                vec![0.4, 0.9],
                vec![0.1, 0.3],
                vec![0.8, 0.5],
                vec![0.3, 0.7],
            ],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let tied = template.apply(&fresh).unwrap();
        // sorted col a of fresh: 0.1, 0.3, 0.4, 0.8; pattern [1,3,3,4]
        // -> 2nd smallest (0.3) replaced by 3rd smallest (0.4)
        let mut col = tied.column(0);
        col.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(col, vec![0.1, 0.4, 0.4, 0.8]);
        // column b had no ties: untouched
        assert_eq!(tied.column(1), fresh.column(1));
        // row pairing preserved: the row that held 0.3 now holds 0.4
        assert_eq!(tied.get(3, 0), 0.4);
        assert_eq!(tied.get(3, 1), 0.7);
    }

    #[test]
    fn ties_experiment_columns_identical_without_ties() {
        let reference = sample(&CopulaFamily::Gumbel { theta: 1.5 }, 60, 9).unwrap();
        let template = TiesTemplate::from_data(&reference);
        let opts = RunOptions::new(20, 0);
        let rows = ties_experiment(&template, TestId::S2n, 1.5, 5, 42, &opts).unwrap();
        for row in rows {
            assert_eq!(row.p_continuous, row.p_average);
            assert_eq!(row.p_continuous, row.p_random);
        }
    }

    #[test]
    fn randomize_experiment_varies_with_ties_only() {
        // heavily tied data: rounded uniforms
        let raw = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 120, 7).unwrap();
        let pairs: Vec<(f64, f64)> = (0..120)
            .map(|i| {
                (
                    (raw.get(i, 0) * 12.0).round(),
                    (raw.get(i, 1) * 12.0).round(),
                )
            })
            .collect();
        let tied = DataMatrix::from_pairs(&pairs).unwrap();
        let opts = RunOptions::new(20, 0);
        let rows = randomize_experiment(&tied, &[TestId::S2n], 6, 11, &opts).unwrap();
        assert_eq!(rows.len(), 6);
        let ps: Vec<f64> = rows.iter().map(|r| r.p_values["s2n"]).collect();
        let spread = ps
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - ps.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(spread > 0.0, "randomizations all identical");
        // same master seed reproduces the rows exactly
        let again = randomize_experiment(&tied, &[TestId::S2n], 6, 11, &opts).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.p_values["s2n"].to_bits(), b.p_values["s2n"].to_bits());
            assert_eq!(a.theta_hat.to_bits(), b.theta_hat.to_bits());
        }
    }
}

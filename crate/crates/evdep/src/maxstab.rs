//! Test of extreme-value dependence through max-stability.
//!
//! A copula is of the extreme-value type if and only if
//! `{C(u^(1/r))}^r = C(u)` for every `r > 0`, so departures are visible in
//! the empirical process
//!
//! ```text
//! D_rn(u) = sqrt(n) [ {C_n(u1^(1/r), ..., ud^(1/r))}^r - C_n(u) ]
//! ```
//!
//! for a few fixed `r`. The statistic integrates `D_rn^2` over the
//! pseudo-observations and sums over `r` (default r = 3, 4, 5); p-values
//! come from a multiplier bootstrap with the delta-method linearization of
//! `u -> {C_n(u^(1/r))}^r`. Restricting the integration points to an upper
//! tail `[t, 1]`, or applying the test to block maxima first, gives the
//! heuristic checks of the domain-of-attraction condition.

use rayon::prelude::*;

use crate::empirical::{multiplier_replicates, EmpiricalCopula, MultiplierConfig};
use crate::error::{Error, Result};
use crate::kendall::{test_s2n, test_s3n};
use crate::pickands::{resampled_p_value, test_pickands_a};
use crate::ranks::{block_maxima, pseudo_observations, DataMatrix, TiesPolicy};
use crate::report::TestReport;

/// Configuration of the max-stability test.
#[derive(Debug, Clone)]
pub struct MaxStabConfig {
    /// Aggregation exponents, each > 1.
    pub r_values: Vec<f64>,
    pub multiplier: MultiplierConfig,
    /// When set, only pseudo-observations in `[t, 1]` enter the integration
    /// (the tail-restricted heuristic variant).
    pub tail_threshold: Option<Vec<f64>>,
}

impl MaxStabConfig {
    pub fn new(multiplier: MultiplierConfig) -> Self {
        Self {
            r_values: vec![3.0, 4.0, 5.0],
            multiplier,
            tail_threshold: None,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.r_values.is_empty() {
            return Err(Error::InvalidParameter("no r values".into()));
        }
        for &r in &self.r_values {
            if !(r > 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "aggregation exponent must exceed 1, got {r}"
                )));
            }
        }
        if let Some(t) = &self.tail_threshold {
            if t.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: t.len(),
                });
            }
            if t.iter().any(|v| !(0.0..1.0).contains(v)) {
                return Err(Error::InvalidParameter(
                    "threshold coordinates must lie in [0, 1)".into(),
                ));
            }
        }
        Ok(())
    }
}

impl Default for MaxStabConfig {
    fn default() -> Self {
        Self::new(MultiplierConfig::default())
    }
}

/// The max-stability discrepancy process
/// `sqrt(n) [ {C_n(u^(1/r))}^r - C_n(u) ]`.
pub fn d_process(copula: &EmpiricalCopula, r: f64, u: &[f64]) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "aggregation exponent must exceed 1, got {r}"
        )));
    }
    let root: Vec<f64> = u.iter().map(|v| v.powf(1.0 / r)).collect();
    let at_root = copula.eval(&root)?;
    let at_u = copula.eval(u)?;
    Ok((copula.n() as f64).sqrt() * (at_root.powf(r) - at_u))
}

fn integration_points(copula: &EmpiricalCopula, cfg: &MaxStabConfig) -> Vec<Vec<f64>> {
    let pobs = copula.pobs();
    (0..copula.n())
        .map(|i| pobs.row(i).to_vec())
        .filter(|u| match &cfg.tail_threshold {
            Some(t) => u.iter().zip(t).all(|(v, lo)| v >= lo),
            None => true,
        })
        .collect()
}

/// The test statistic: `sum_r (1/n) sum_i D_rn(U_i)^2`, the inner sum
/// running over the pseudo-observations (restricted to `[t, 1]` when a tail
/// threshold is set).
pub fn statistic_t(copula: &EmpiricalCopula, cfg: &MaxStabConfig) -> Result<f64> {
    cfg.validate(copula.d())?;
    let points = integration_points(copula, cfg);
    let n = copula.n() as f64;
    let mut total = 0.0;
    for &r in &cfg.r_values {
        let mut acc = 0.0;
        for u in &points {
            let d = d_process(copula, r, u)?;
            acc += d * d;
        }
        total += acc / n;
    }
    Ok(total)
}

/// Max-stability test with multiplier-bootstrap p-value.
pub fn test_maxstab(data: &DataMatrix, cfg: &MaxStabConfig) -> Result<TestReport> {
    if data.n_cols() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: data.n_cols(),
        });
    }
    let pobs = pseudo_observations(data, TiesPolicy::Average)?;
    let copula = EmpiricalCopula::new(pobs);
    cfg.validate(copula.d())?;

    let statistic = statistic_t(&copula, cfg)?;

    // evaluation points: each integration point and its r-th roots
    let points = integration_points(&copula, cfg);
    let k = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter(
            "tail threshold excluded every pseudo-observation".into(),
        ));
    }
    let n = copula.n() as f64;
    let n_r = cfg.r_values.len();
    let mut eval_points = points.clone();
    eval_points.reserve(k * n_r);
    for &r in &cfg.r_values {
        for u in &points {
            eval_points.push(u.iter().map(|v| v.powf(1.0 / r)).collect());
        }
    }
    // C_n at the root points, for the delta-method factor r * C_n^(r-1)
    let mut cn_root = vec![0.0f64; n_r * k];
    for (q, _) in cfg.r_values.iter().enumerate() {
        for i in 0..k {
            cn_root[q * k + i] = copula.eval(&eval_points[k * (1 + q) + i])?;
        }
    }

    let rows = multiplier_replicates(&copula, &eval_points, &cfg.multiplier)?;
    let replicate_stats: Vec<f64> = rows
        .par_iter()
        .map(|row| {
            let mut total = 0.0;
            for (q, &r) in cfg.r_values.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..k {
                    let c_root = cn_root[q * k + i];
                    let d_hat = r * c_root.powf(r - 1.0) * row[k * (1 + q) + i] - row[i];
                    acc += d_hat * d_hat;
                }
                total += acc / n;
            }
            total
        })
        .collect();

    let p_value = resampled_p_value(statistic, &replicate_stats)?;
    let mut report = TestReport {
        statistic,
        p_value,
        method: "maxstab".into(),
        replicates: cfg.multiplier.replicates,
        seed: Some(cfg.multiplier.seed),
        heuristic: cfg.tail_threshold.is_some(),
        extras: Default::default(),
    };
    report
        .extras
        .insert("points_used".into(), k as f64);
    Ok(report)
}

/// Inner tests available to the block-maxima heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdaInnerTest {
    S2n,
    S3n,
    Maxstab,
    PickandsA,
}

impl MdaInnerTest {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "s2n" => Ok(MdaInnerTest::S2n),
            "s3n" => Ok(MdaInnerTest::S3n),
            "maxstab" => Ok(MdaInnerTest::Maxstab),
            "pickands_a" => Ok(MdaInnerTest::PickandsA),
            other => Err(Error::UnknownTest(other.into())),
        }
    }
}

/// Heuristic test of the domain-of-attraction condition: form componentwise
/// block maxima, then apply the named test of extreme-value dependence to
/// the maxima. Flagged heuristic because no finite-block calibration
/// exists.
pub fn test_mda_blockmax(
    data: &DataMatrix,
    block_length: usize,
    inner: MdaInnerTest,
    multiplier: &MultiplierConfig,
) -> Result<TestReport> {
    let maxima = block_maxima(data, block_length)?;
    let mut report = match inner {
        MdaInnerTest::S2n => test_s2n(&maxima)?,
        MdaInnerTest::S3n => test_s3n(&maxima)?,
        MdaInnerTest::Maxstab => {
            test_maxstab(&maxima, &MaxStabConfig::new(multiplier.clone()))?
        }
        MdaInnerTest::PickandsA => test_pickands_a(&maxima, multiplier)?,
    };
    report.heuristic = true;
    report
        .extras
        .insert("block_length".into(), block_length as f64);
    report
        .extras
        .insert("n_blocks".into(), maxima.n_rows() as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{analytic_copula, sample, CopulaFamily};

    fn toy_copula() -> EmpiricalCopula {
        let data =
            DataMatrix::from_pairs(&[(1.0, 2.0), (2.0, 1.0), (3.0, 3.0)]).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        EmpiricalCopula::new(pobs)
    }

    #[test]
    fn d_process_examples() {
        let c = toy_copula();
        assert_eq!(d_process(&c, 3.0, &[1.0, 1.0]).unwrap(), 0.0);
        // hand count: C_n(0.75, 0.75) = 1, C_n(0.5625, 0.5625) = 2/3
        let d = d_process(&c, 2.0, &[0.5625, 0.5625]).unwrap();
        assert!((d - 3.0f64.sqrt() / 3.0).abs() < 1e-12, "d = {d}");
        assert!(d_process(&c, 1.0, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn analytic_gumbel_satisfies_the_defining_identity() {
        // the population analogue of the process vanishes identically
        let gumbel = CopulaFamily::Gumbel { theta: 2.5 };
        for &r in &[2.0, 3.0, 4.5] {
            for i in 1..10 {
                for j in 1..10 {
                    let u = [i as f64 / 10.0, j as f64 / 10.0];
                    let root = [u[0].powf(1.0 / r), u[1].powf(1.0 / r)];
                    let gap = analytic_copula(&gumbel, root).unwrap().powf(r)
                        - analytic_copula(&gumbel, u).unwrap();
                    assert!(gap.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn statistic_matches_brute_force_double_loop() {
        let data = sample(&CopulaFamily::Clayton { theta: 1.0 }, 100, 31).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let cfg = MaxStabConfig::default();
        let fast = statistic_t(&c, &cfg).unwrap();
        let mut brute = 0.0;
        for &r in &cfg.r_values {
            for i in 0..c.n() {
                let u = c.pobs().row(i).to_vec();
                let root: Vec<f64> = u.iter().map(|v| v.powf(1.0 / r)).collect();
                let d = (c.n() as f64).sqrt()
                    * (c.eval(&root).unwrap().powf(r) - c.eval(&u).unwrap());
                brute += d * d / c.n() as f64;
            }
        }
        assert!((fast - brute).abs() < 1e-12);
    }

    #[test]
    fn statistic_invariant_under_monotone_transforms() {
        let data = sample(&CopulaFamily::Frank { theta: 3.0 }, 120, 8).unwrap();
        let pairs: Vec<(f64, f64)> =
            (0..120).map(|i| (data.get(i, 0), data.get(i, 1))).collect();
        let transformed: Vec<(f64, f64)> = pairs
            .iter()
            .map(|&(x, y)| ((3.0 * x).exp(), y.powi(3)))
            .collect();
        let cfg = MaxStabConfig::default();
        let c1 = EmpiricalCopula::new(
            pseudo_observations(&data, TiesPolicy::Average).unwrap(),
        );
        let c2 = EmpiricalCopula::new(
            pseudo_observations(
                &DataMatrix::from_pairs(&transformed).unwrap(),
                TiesPolicy::Average,
            )
            .unwrap(),
        );
        let s1 = statistic_t(&c1, &cfg).unwrap();
        let s2 = statistic_t(&c2, &cfg).unwrap();
        assert_eq!(s1.to_bits(), s2.to_bits());
        assert!(s1 >= 0.0);
    }

    #[test]
    fn test_maxstab_deterministic_and_p_in_range() {
        let data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 100, 13).unwrap();
        let cfg = MaxStabConfig::new(MultiplierConfig::new(100, 77));
        let a = test_maxstab(&data, &cfg).unwrap();
        let b = test_maxstab(&data, &cfg).unwrap();
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
        let b_count = cfg.multiplier.replicates as f64;
        assert!(a.p_value >= 1.0 / (b_count + 1.0) && a.p_value <= 1.0);
    }

    #[test]
    fn test_maxstab_rejects_clayton() {
        let data = sample(&CopulaFamily::Clayton { theta: 2.0 }, 200, 3).unwrap();
        let cfg = MaxStabConfig::new(MultiplierConfig::new(250, 5));
        let report = test_maxstab(&data, &cfg).unwrap();
        assert!(report.p_value < 0.05, "p = {}", report.p_value);
    }

    #[test]
    fn tail_threshold_flags_heuristic_and_filters() {
        let data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 150, 19).unwrap();
        let mut cfg = MaxStabConfig::new(MultiplierConfig::new(50, 4));
        cfg.tail_threshold = Some(vec![0.3, 0.3]);
        let report = test_maxstab(&data, &cfg).unwrap();
        assert!(report.heuristic);
        assert!((report.extras["points_used"]) < 150.0);
    }

    #[test]
    fn mda_block_length_one_equals_inner_test() {
        let data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 120, 25).unwrap();
        let mult = MultiplierConfig::new(50, 6);
        let direct = test_s2n(&data).unwrap();
        let via_blocks = test_mda_blockmax(&data, 1, MdaInnerTest::S2n, &mult).unwrap();
        assert_eq!(via_blocks.statistic.to_bits(), direct.statistic.to_bits());
        assert_eq!(via_blocks.p_value.to_bits(), direct.p_value.to_bits());
        assert!(via_blocks.heuristic);
        assert!(MdaInnerTest::parse("aplot_resid").is_err());
    }
}

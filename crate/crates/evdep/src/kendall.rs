//! Tests of extreme-value dependence built on Kendall's distribution.
//!
//! For a bivariate vector with copula C, let `W = C(F1(X1), F2(X2))`. Under
//! extreme-value dependence the c.d.f. of W has the closed form
//! `K(w) = w - (1 - tau) w log w`, whose moments are
//! `mu_k = (k tau + 1)/(k+1)^2`. Eliminating tau from the first moments
//! yields parameter-free null identities; the tests plug empirical moments
//! of `W_i = F_n(X_i1, X_i2)` into those identities and studentize with a
//! jackknife variance.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::ranks::{
    dense_ranks, kendall_tau, pseudo_observations, DataMatrix, Fenwick, TiesPolicy,
};
use crate::report::TestReport;

/// The empirical Kendall sample `W_i = F_n(X_i1, X_i2)`, each in
/// `{1/n, ..., 1}` (every point dominates itself).
#[derive(Debug, Clone)]
pub struct KendallSample {
    w: Vec<f64>,
}

impl KendallSample {
    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Counts, for every observation, how many sample points it dominates
/// componentwise (including itself): one Fenwick-tree sweep, `O(n log n)`,
/// with tied groups handled exactly like a naive double loop.
fn dominated_counts(data: &DataMatrix) -> Vec<i64> {
    let n = data.n_rows();
    let x = data.column(0);
    let y = data.column(1);
    let y_ranks = dense_ranks(&y);
    let n_levels = y_ranks.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut tree = Fenwick::new(n_levels);
    let mut counts = vec![0i64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // equal first coordinates dominate each other, so insert the whole
        // group before querying any of its members
        for &idx in &order[start..end] {
            tree.add(y_ranks[idx], 1);
        }
        for &idx in &order[start..end] {
            counts[idx] = tree.prefix(y_ranks[idx]);
        }
        start = end;
    }
    counts
}

/// `W_i = (1/n) #{j : X_j1 <= X_i1, X_j2 <= X_i2}`.
pub fn kendall_sample(data: &DataMatrix) -> Result<KendallSample> {
    data.require_cols(2)?;
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            got: n,
        });
    }
    let counts = dominated_counts(data);
    let w = counts.iter().map(|&c| c as f64 / n as f64).collect();
    Ok(KendallSample { w })
}

pub(crate) fn kendall_cdf_formula(w: f64, tau: f64) -> f64 {
    w - (1.0 - tau) * w * w.ln()
}

/// Kendall's distribution under extreme-value dependence,
/// `K(w) = w - (1 - tau) w log w` for `w` in (0, 1].
pub fn null_kendall_cdf(w: f64, tau: f64) -> Result<f64> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::InvalidDomain(format!(
            "w must lie in (0, 1], got {w}"
        )));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::InvalidDomain(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    Ok(kendall_cdf_formula(w, tau))
}

/// k-th moment of W under extreme-value dependence,
/// `mu_k = (k tau + 1) / (k + 1)^2`.
pub fn null_moment(k: u32, tau: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment order must be >= 1".into()));
    }
    let kf = k as f64;
    Ok((kf * tau + 1.0) / ((kf + 1.0) * (kf + 1.0)))
}

fn two_sided_normal_p(z: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    2.0 * (1.0 - normal.cdf(z.abs()))
}

fn jackknife_variance(leave_one_out: &[f64]) -> f64 {
    let n = leave_one_out.len() as f64;
    let mean = pairwise_sum(leave_one_out) / n;
    let devs: Vec<f64> = leave_one_out.iter().map(|s| (s - mean).powi(2)).collect();
    (n - 1.0) / n * pairwise_sum(&devs)
}

fn sample_tau(data: &DataMatrix) -> Result<f64> {
    let pobs = pseudo_observations(data, TiesPolicy::Average)?;
    Ok(kendall_tau(&pobs)?.value())
}

// ---------------------------------------------------------------------------
// Two-moment test
// ---------------------------------------------------------------------------

/// Statistic of the two-moment test,
/// `S = -1 + 8/(n(n-1)) sum_{i!=j} I_ij - 9/(n(n-1)(n-2)) sum_{i!=j!=k} I_ij I_kj`
/// with `I_ij = 1(X_i1 <= X_j1, X_i2 <= X_j2)`. Computed from the dominated
/// counts in closed form; agrees exactly with the defining triple loop.
pub fn s2n_statistic(data: &DataMatrix) -> Result<f64> {
    data.require_cols(2)?;
    let n = data.n_rows();
    if n < 3 {
        return Err(Error::TooFewRows {
            required: 3,
            got: n,
        });
    }
    let counts = dominated_counts(data);
    let nf = n as f64;
    // M_j = sum_{i != j} I_ij; the triple sum over distinct i != k != j is
    // sum_j M_j (M_j - 1) because the I_ij are indicators
    let sum_m: i64 = counts.iter().map(|&c| c - 1).sum();
    let sum_mm: i64 = counts.iter().map(|&c| (c - 1) * (c - 2)).sum();
    Ok(-1.0 + 8.0 * sum_m as f64 / (nf * (nf - 1.0))
        - 9.0 * sum_mm as f64 / (nf * (nf - 1.0) * (nf - 2.0)))
}

/// Delete-one recomputation of the two-moment statistic for every
/// observation, via exact count updates (one extra `O(n^2)` pass).
fn s2n_leave_one_out(data: &DataMatrix, counts: &[i64]) -> Vec<f64> {
    let n = data.n_rows();
    let x = data.column(0);
    let y = data.column(1);
    let m: Vec<i64> = counts.iter().map(|&c| c - 1).collect();
    let sum_m: i64 = m.iter().sum();
    let sum_mm: i64 = m.iter().map(|&v| v * (v - 1)).sum();

    // D_i = #{j != i : X_i <= X_j}   (how many points dominate i)
    // R_i = sum_{j != i, X_i <= X_j} (M_j - 1)
    let mut dominating = vec![0i64; n];
    let mut r = vec![0i64; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if x[i] <= x[j] && y[i] <= y[j] {
                dominating[i] += 1;
                r[i] += m[j] - 1;
            }
        }
    }

    let nf = n as f64;
    (0..n)
        .map(|i| {
            let sum_m_i = (sum_m - m[i] - dominating[i]) as f64;
            let sum_mm_i = (sum_mm - m[i] * (m[i] - 1) - 2 * r[i]) as f64;
            -1.0 + 8.0 * sum_m_i / ((nf - 1.0) * (nf - 2.0))
                - 9.0 * sum_mm_i / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0))
        })
        .collect()
}

/// Two-moment test with jackknife variance and two-sided normal p-value.
pub fn test_s2n(data: &DataMatrix) -> Result<TestReport> {
    data.require_cols(2)?;
    let n = data.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows {
            required: 4,
            got: n,
        });
    }
    let statistic = s2n_statistic(data)?;
    let counts = dominated_counts(data);
    let loo = s2n_leave_one_out(data, &counts);
    let var = jackknife_variance(&loo);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance(
            "all delete-one two-moment statistics coincide (monotone or constant data)".into(),
        ));
    }
    let se = var.sqrt();
    let p = two_sided_normal_p(statistic / se);
    Ok(TestReport::new("s2n", statistic, p)
        .with_extra("jackknife_variance", var)
        .with_extra("tau", sample_tau(data)?))
}

// ---------------------------------------------------------------------------
// Three-moment test
// ---------------------------------------------------------------------------

/// Statistic of the three-moment test: the plug-in of
/// `-1 + 4 mu_1 + 9 mu_2 - 16 mu_3 = 0` with `mu_k` replaced by empirical
/// moments of the Kendall sample.
pub fn s3n_statistic(data: &DataMatrix) -> Result<f64> {
    let w = kendall_sample(data)?;
    let n = w.values().len() as f64;
    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for &wi in w.values() {
        m1 += wi;
        m2 += wi * wi;
        m3 += wi * wi * wi;
    }
    Ok(-1.0 + (4.0 * m1 + 9.0 * m2 - 16.0 * m3) / n)
}

/// Three-moment test with jackknife variance and two-sided normal p-value.
pub fn test_s3n(data: &DataMatrix) -> Result<TestReport> {
    data.require_cols(2)?;
    let n = data.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows {
            required: 4,
            got: n,
        });
    }
    let statistic = s3n_statistic(data)?;

    let counts = dominated_counts(data);
    let x = data.column(0);
    let y = data.column(1);
    let nf = n as f64;
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let le = (x[i] <= x[j] && y[i] <= y[j]) as i64;
                let w = (counts[j] - le) as f64 / (nf - 1.0);
                m1 += w;
                m2 += w * w;
                m3 += w * w * w;
            }
            -1.0 + (4.0 * m1 + 9.0 * m2 - 16.0 * m3) / (nf - 1.0)
        })
        .collect();
    let var = jackknife_variance(&loo);
    if !(var > 0.0) {
        return Err(Error::DegenerateVariance(
            "all delete-one three-moment statistics coincide (monotone or constant data)".into(),
        ));
    }
    let p = two_sided_normal_p(statistic / var.sqrt());
    Ok(TestReport::new("s3n", statistic, p)
        .with_extra("jackknife_variance", var)
        .with_extra("tau", sample_tau(data)?))
}

// ---------------------------------------------------------------------------
// Cramer-von Mises diagnostic
// ---------------------------------------------------------------------------

/// Cramer-von Mises-type distance between the empirical Kendall
/// distribution and the extreme-value form evaluated at the sample tau:
/// `sum_i { K_n(W_i) - K_tau(W_i) }^2`. A diagnostic only; no calibrated
/// p-value is attached.
pub fn cvm_kendall_distance(data: &DataMatrix) -> Result<f64> {
    let sample = kendall_sample(data)?;
    let tau = sample_tau(data)?;
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let terms: Vec<f64> = sample
        .values()
        .iter()
        .map(|&w| {
            let kn = sorted.partition_point(|&v| v <= w) as f64 / n;
            let ktau = kendall_cdf_formula(w, tau);
            (kn - ktau).powi(2)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

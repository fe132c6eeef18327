//! Raw data ingestion, pseudo-observations and block maxima.
//!
//! Every test in this crate is rank-based: the data matrix is reduced to
//! scaled ranks `R_ij / (n+1)` (pseudo-observations) before any statistic
//! is computed, which makes the procedures invariant under strictly
//! increasing transformations of the margins. Ties must be resolved
//! explicitly through a [`TiesPolicy`]; the tests themselves assume
//! continuous margins.

use std::io::Read;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;

// ---------------------------------------------------------------------------
// Data matrix
// ---------------------------------------------------------------------------

/// An `n x d` matrix of raw observations with column labels.
///
/// All entries are finite; construction rejects NaN and infinities rather
/// than silently imputing, which would corrupt the ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>, // row-major
    n_rows: usize,
    n_cols: usize,
    labels: Vec<String>,
}

impl DataMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(values: Vec<f64>, n_cols: usize, labels: Vec<String>) -> Result<Self> {
        if n_cols < 1 || values.len() % n_cols != 0 {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: values.len(),
            });
        }
        if labels.len() != n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: labels.len(),
            });
        }
        let n_rows = values.len() / n_cols;
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: k / n_cols + 1,
                    col: k % n_cols + 1,
                    label: labels[k % n_cols].clone(),
                });
            }
        }
        Ok(Self {
            values,
            n_rows,
            n_cols,
            labels,
        })
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<String>) -> Result<Self> {
        let n_cols = labels.len();
        let mut values = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, n_cols, labels)
    }

    /// Builds a bivariate matrix from `(x, y)` pairs with default labels.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let values = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
        Self::new(values, 2, vec!["x1".into(), "x2".into()])
    }

    /// Reads a matrix from CSV: a header row of column names followed by
    /// one observation per row of decimal-point reals. If `group_column`
    /// names a column, that column is returned separately as string labels.
    pub fn from_csv_reader<R: Read>(
        reader: R,
        group_column: Option<&str>,
    ) -> Result<(Self, Option<Vec<String>>)> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Csv(e.to_string()))?
            .iter()
            .map(|s| s.to_string())
            .collect();
        let group_idx = match group_column {
            Some(name) => Some(
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::Csv(format!("no column named `{name}`")))?,
            ),
            None => None,
        };
        let labels: Vec<String> = headers
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != group_idx)
            .map(|(_, h)| h.clone())
            .collect();
        let mut values = Vec::new();
        let mut groups = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Csv(e.to_string()))?;
            if record.len() != headers.len() {
                return Err(Error::Csv(format!(
                    "row {}: expected {} fields, got {}",
                    r + 1,
                    headers.len(),
                    record.len()
                )));
            }
            for (c, field) in record.iter().enumerate() {
                if Some(c) == group_idx {
                    groups.push(field.to_string());
                    continue;
                }
                let v: f64 = field.parse().map_err(|_| {
                    Error::Csv(format!(
                        "row {}, column `{}`: cannot parse `{}` as a real number",
                        r + 1,
                        headers[c],
                        field
                    ))
                })?;
                values.push(v);
            }
        }
        let matrix = Self::new(values, labels.len(), labels)?;
        Ok((matrix, group_idx.map(|_| groups)))
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    /// True if any column contains at least one duplicated value.
    pub fn has_ties(&self) -> bool {
        (0..self.n_cols).any(|j| {
            let mut col = self.column(j);
            col.sort_by(|a, b| a.total_cmp(b));
            col.windows(2).any(|w| w[0] == w[1])
        })
    }

    /// Errors unless the matrix has exactly `d` columns.
    pub fn require_cols(&self, d: usize) -> Result<()> {
        if self.n_cols != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.n_cols,
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Ties policies and pseudo-observations
// ---------------------------------------------------------------------------

/// How tied raw values are converted to ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiesPolicy {
    /// Tied entries share the mean of the ranks they span.
    Average,
    /// Tied entries all receive the largest rank of the tied block.
    Max,
    /// Tied entries receive a uniformly random permutation of the ranks
    /// they span (jittering). One RNG stream per call, seeded explicitly,
    /// so equal seeds and equal input yield identical output.
    Random { seed: u64 },
}

/// An `n x d` matrix of scaled ranks with entries in
/// `[1/(n+1), n/(n+1)]`; the margin-free representation all tests consume.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoObs {
    values: Vec<f64>, // row-major
    n_rows: usize,
    n_cols: usize,
}

impl PseudoObs {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.n_cols..(row + 1) * self.n_cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, col)).collect()
    }

    /// Reinterprets the pseudo-observations as a data matrix (the tests are
    /// rank-based, so feeding them scaled ranks is equivalent to feeding the
    /// raw data they came from).
    pub fn to_data_matrix(&self) -> DataMatrix {
        let labels = (1..=self.n_cols).map(|j| format!("u{j}")).collect();
        DataMatrix::new(self.values.clone(), self.n_cols, labels)
            .expect("pseudo-observations are finite")
    }
}

/// Ranks one column under the given policy. `rng` is only consulted for
/// [`TiesPolicy::Random`].
fn rank_column(col: &[f64], policy: TiesPolicy, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && col[order[end]] == col[order[start]] {
            end += 1;
        }
        // ranks spanned by this tied block: start+1 ..= end (1-based)
        match policy {
            TiesPolicy::Average => {
                let mean = (start + 1 + end) as f64 / 2.0;
                for &idx in &order[start..end] {
                    ranks[idx] = mean;
                }
            }
            TiesPolicy::Max => {
                for &idx in &order[start..end] {
                    ranks[idx] = end as f64;
                }
            }
            TiesPolicy::Random { .. } => {
                let mut spanned: Vec<usize> = (start + 1..=end).collect();
                spanned.shuffle(rng);
                for (k, &idx) in order[start..end].iter().enumerate() {
                    ranks[idx] = spanned[k] as f64;
                }
            }
        }
        start = end;
    }
    ranks
}

/// Converts raw data to pseudo-observations `R_ij / (n+1)` under `policy`.
pub fn pseudo_observations(data: &DataMatrix, policy: TiesPolicy) -> Result<PseudoObs> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            got: n,
        });
    }
    let seed = match policy {
        TiesPolicy::Random { seed } => seed,
        _ => 0,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let denom = n as f64 + 1.0;
    let mut values = vec![0.0; n * data.n_cols()];
    for j in 0..data.n_cols() {
        let col = data.column(j);
        let ranks = rank_column(&col, policy, &mut rng);
        for i in 0..n {
            values[i * data.n_cols() + j] = ranks[i] / denom;
        }
    }
    Ok(PseudoObs {
        values,
        n_rows: n,
        n_cols: data.n_cols(),
    })
}

// ---------------------------------------------------------------------------
// Block maxima
// ---------------------------------------------------------------------------

/// Componentwise maxima over consecutive blocks of `block_length` rows.
/// A trailing remainder block shorter than `block_length` is dropped.
pub fn block_maxima(data: &DataMatrix, block_length: usize) -> Result<DataMatrix> {
    if block_length == 0 {
        return Err(Error::InvalidParameter("block length must be >= 1".into()));
    }
    if block_length > data.n_rows() {
        return Err(Error::BlockTooLong {
            block_length,
            rows: data.n_rows(),
        });
    }
    let k = data.n_rows() / block_length;
    let d = data.n_cols();
    let mut values = Vec::with_capacity(k * d);
    for b in 0..k {
        for j in 0..d {
            let m = (0..block_length)
                .map(|i| data.get(b * block_length + i, j))
                .fold(f64::NEG_INFINITY, f64::max);
            values.push(m);
        }
    }
    DataMatrix::new(values, d, data.labels().to_vec())
}

/// Componentwise maxima within groups of rows sharing a label, one output
/// row per distinct label in order of first appearance.
pub fn block_maxima_by_group(data: &DataMatrix, group_labels: &[String]) -> Result<DataMatrix> {
    if group_labels.is_empty() {
        return Err(Error::BadGroupLabels("no labels supplied".into()));
    }
    if group_labels.len() != data.n_rows() {
        return Err(Error::BadGroupLabels(format!(
            "{} labels for {} rows",
            group_labels.len(),
            data.n_rows()
        )));
    }
    let d = data.n_cols();
    let mut order: Vec<&str> = Vec::new();
    let mut maxima: Vec<Vec<f64>> = Vec::new();
    for (i, label) in group_labels.iter().enumerate() {
        let slot = match order.iter().position(|&l| l == label) {
            Some(pos) => pos,
            None => {
                order.push(label);
                maxima.push(vec![f64::NEG_INFINITY; d]);
                order.len() - 1
            }
        };
        for j in 0..d {
            maxima[slot][j] = maxima[slot][j].max(data.get(i, j));
        }
    }
    DataMatrix::from_rows(&maxima, data.labels().to_vec())
}

// ---------------------------------------------------------------------------
// Kendall's tau
// ---------------------------------------------------------------------------

/// Kendall's rank correlation in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KendallTau {
    value: f64,
}

impl KendallTau {
    pub fn value(&self) -> f64 {
        self.value
    }
}

fn concordance_counts(pobs: &PseudoObs) -> (i64, i64) {
    let n = pobs.n_rows();
    let mut concordant: i64 = 0;
    let mut discordant: i64 = 0;
    for i in 0..n {
        let (xi, yi) = (pobs.get(i, 0), pobs.get(i, 1));
        for j in i + 1..n {
            let s = (xi - pobs.get(j, 0)) * (yi - pobs.get(j, 1));
            if s > 0.0 {
                concordant += 1;
            } else if s < 0.0 {
                discordant += 1;
            }
        }
    }
    (concordant, discordant)
}

/// Sample Kendall's tau, `(concordant - discordant) / (n choose 2)`,
/// by direct pair enumeration.
pub fn kendall_tau(pobs: &PseudoObs) -> Result<KendallTau> {
    if pobs.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pobs.n_cols(),
        });
    }
    let n = pobs.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            got: n,
        });
    }
    let (c, d) = concordance_counts(pobs);
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(KendallTau {
        value: (c - d) as f64 / pairs,
    })
}

/// `O(n log n)` Kendall's tau via a Fenwick-tree sweep. Agrees exactly with
/// [`kendall_tau`] (both are ratios of the same integer counts).
pub fn kendall_tau_fast(pobs: &PseudoObs) -> Result<KendallTau> {
    if pobs.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pobs.n_cols(),
        });
    }
    let n = pobs.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            got: n,
        });
    }
    let x = pobs.column(0);
    let y = pobs.column(1);
    let y_ranks = dense_ranks(&y);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

    let n_levels = y_ranks.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut tree = Fenwick::new(n_levels);
    let mut concordant: i64 = 0;
    let mut discordant: i64 = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // pairs inside an x-tied group contribute neither way
        for &idx in &order[start..end] {
            let r = y_ranks[idx];
            let below = tree.prefix(r.wrapping_sub(1));
            let equal_or_below = tree.prefix(r);
            let inserted = start as i64;
            concordant += below;
            discordant += inserted - equal_or_below;
        }
        for &idx in &order[start..end] {
            tree.add(y_ranks[idx], 1);
        }
        start = end;
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(KendallTau {
        value: (concordant - discordant) as f64 / pairs,
    })
}

/// Jackknife standard error of Kendall's tau via delete-one concordance
/// updates (one `O(n^2)` pass).
pub fn kendall_tau_jackknife(pobs: &PseudoObs) -> Result<(KendallTau, f64)> {
    if pobs.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pobs.n_cols(),
        });
    }
    let n = pobs.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows {
            required: 4,
            got: n,
        });
    }
    let mut conc_with = vec![0i64; n];
    let mut disc_with = vec![0i64; n];
    let mut concordant: i64 = 0;
    let mut discordant: i64 = 0;
    for i in 0..n {
        let (xi, yi) = (pobs.get(i, 0), pobs.get(i, 1));
        for j in i + 1..n {
            let s = (xi - pobs.get(j, 0)) * (yi - pobs.get(j, 1));
            if s > 0.0 {
                concordant += 1;
                conc_with[i] += 1;
                conc_with[j] += 1;
            } else if s < 0.0 {
                discordant += 1;
                disc_with[i] += 1;
                disc_with[j] += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    let tau = (concordant - discordant) as f64 / pairs;
    let reduced_pairs = ((n - 1) * (n - 2) / 2) as f64;
    let leave_one_out: Vec<f64> = (0..n)
        .map(|i| {
            let c = concordant - conc_with[i];
            let d = discordant - disc_with[i];
            (c - d) as f64 / reduced_pairs
        })
        .collect();
    let mean = pairwise_sum(&leave_one_out) / n as f64;
    let deviations: Vec<f64> = leave_one_out.iter().map(|t| (t - mean).powi(2)).collect();
    let var = (n as f64 - 1.0) / n as f64 * pairwise_sum(&deviations);
    Ok((KendallTau { value: tau }, var.sqrt()))
}

/// Dense (competition-free) integer ranks: equal values share an index.
pub(crate) fn dense_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0usize; values.len()];
    let mut rank = 0usize;
    for (k, &idx) in order.iter().enumerate() {
        if k > 0 && values[idx] != values[order[k - 1]] {
            rank += 1;
        }
        ranks[idx] = rank;
    }
    ranks
}

/// Fenwick tree over integer bins, used by the sweep-based counters.
pub(crate) struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Self {
        Self {
            tree: vec![0; len + 1],
        }
    }

    pub(crate) fn add(&mut self, mut idx: usize, delta: i64) {
        idx += 1;
        while idx < self.tree.len() {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    /// Sum of bins `0..=idx`; `prefix(usize::MAX)` returns 0.
    pub(crate) fn prefix(&self, idx: usize) -> i64 {
        if idx == usize::MAX {
            return 0;
        }
        let mut idx = (idx + 1).min(self.tree.len() - 1);
        let mut sum = 0;
        while idx > 0 {
            sum += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        sum
    }
}

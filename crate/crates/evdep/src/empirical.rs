//! The empirical copula, its partial derivatives and multiplier-bootstrap
//! replicates of the empirical copula process.
//!
//! For pseudo-observations `U_1, ..., U_n` the empirical copula is
//!
//! ```text
//! C_n(u) = (1/n) sum_i 1(U_i <= u),   u in [0,1]^d,
//! ```
//!
//! with the inequality understood componentwise. Resampling replicates of
//! the process `sqrt(n) (C_n - C)` are produced by perturbing the indicator
//! sum with i.i.d. mean-zero, unit-variance multipliers and removing the
//! estimated margin contributions through finite-difference partial
//! derivatives:
//!
//! ```text
//! raw:       a_b(u) = n^{-1/2} sum_i Z_i^b { 1(U_i <= u) - C_n(u) }
//! corrected: C_b(u) = a_b(u) - sum_j d_j C_n(u) * a_b(u^{(j)})
//! ```
//!
//! where `u^{(j)}` equals `u` with every coordinate except the j-th
//! replaced by 1.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ranks::PseudoObs;

/// Empirical copula backed by pseudo-observations.
#[derive(Debug, Clone)]
pub struct EmpiricalCopula {
    pobs: PseudoObs,
}

impl EmpiricalCopula {
    pub fn new(pobs: PseudoObs) -> Self {
        Self { pobs }
    }

    pub fn n(&self) -> usize {
        self.pobs.n_rows()
    }

    pub fn d(&self) -> usize {
        self.pobs.n_cols()
    }

    pub fn pobs(&self) -> &PseudoObs {
        &self.pobs
    }

    /// `C_n(u)`: the exact count of pseudo-observations componentwise
    /// `<= u`, divided by n.
    pub fn eval(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: u.len(),
            });
        }
        let n = self.n();
        let mut count = 0usize;
        for i in 0..n {
            if self.row_leq(i, u) {
                count += 1;
            }
        }
        Ok(count as f64 / n as f64)
    }

    #[inline]
    fn row_leq(&self, i: usize, u: &[f64]) -> bool {
        self.pobs.row(i).iter().zip(u).all(|(&x, &v)| x <= v)
    }

    /// Finite-difference estimate of the j-th partial derivative of `C_n`
    /// at `u`: a central difference with step `h`, the j-th argument clipped
    /// to `[0, 1]`, and the result clipped to `[0, 1]` (where true copula
    /// partials live).
    pub fn partial_derivative(&self, j: usize, u: &[f64], h: f64) -> Result<f64> {
        if j >= self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                got: j + 1,
            });
        }
        let mut hi = u.to_vec();
        let mut lo = u.to_vec();
        hi[j] = (u[j] + h).min(1.0);
        lo[j] = (u[j] - h).max(0.0);
        let deriv = (self.eval(&hi)? - self.eval(&lo)?) / (2.0 * h);
        Ok(deriv.clamp(0.0, 1.0))
    }

    /// Default derivative bandwidth `n^{-1/2}`, kept inside `(0, 1/2)`.
    pub fn default_bandwidth(&self) -> f64 {
        (1.0 / (self.n() as f64).sqrt()).min(0.4999)
    }
}

// ---------------------------------------------------------------------------
// Multiplier bootstrap
// ---------------------------------------------------------------------------

/// Law of the i.i.d. multiplier weights (mean 0, variance 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplierLaw {
    #[default]
    StandardNormal,
    Rademacher,
}

/// Configuration of the multiplier bootstrap.
#[derive(Debug, Clone)]
pub struct MultiplierConfig {
    /// Number of replicates B.
    pub replicates: usize,
    pub law: MultiplierLaw,
    /// Derivative bandwidth; `None` means `n^{-1/2}`.
    pub bandwidth: Option<f64>,
    pub seed: u64,
}

impl MultiplierConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            law: MultiplierLaw::StandardNormal,
            bandwidth: None,
            seed,
        }
    }

    pub(crate) fn validate(&self, copula: &EmpiricalCopula) -> Result<f64> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter(
                "multiplier bootstrap needs at least one replicate".into(),
            ));
        }
        let h = self
            .bandwidth
            .unwrap_or_else(|| copula.default_bandwidth());
        if !(h > 0.0 && h < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must lie in (0, 1/2), got {h}"
            )));
        }
        Ok(h)
    }
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        Self::new(1000, 0)
    }
}

/// Draws the `B x n` multiplier matrix. Replicate `b` uses its own
/// counter-derived stream of the seeded generator, so replicates can be
/// produced in parallel with a deterministic result.
pub(crate) fn draw_multipliers(cfg: &MultiplierConfig, n: usize) -> Vec<Vec<f64>> {
    (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64 + 1);
            match cfg.law {
                MultiplierLaw::StandardNormal => (0..n)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect(),
                MultiplierLaw::Rademacher => (0..n)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                    .collect(),
            }
        })
        .collect()
}

/// Per-point quantities reused by every replicate.
struct PointContext {
    /// `C_n` at the point.
    cn: f64,
    /// `d_j C_n` at the point, for each coordinate.
    partials: Vec<f64>,
    /// `C_n(u^{(j)})`, the empirical margin of coordinate j at `u_j`.
    margins: Vec<f64>,
}

fn point_contexts(copula: &EmpiricalCopula, points: &[Vec<f64>], h: f64) -> Result<Vec<PointContext>> {
    let d = copula.d();
    points
        .iter()
        .map(|u| {
            if u.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: u.len(),
                });
            }
            let cn = copula.eval(u)?;
            let mut partials = Vec::with_capacity(d);
            let mut margins = Vec::with_capacity(d);
            for j in 0..d {
                partials.push(copula.partial_derivative(j, u, h)?);
                let mut uj = vec![1.0; d];
                uj[j] = u[j];
                margins.push(copula.eval(&uj)?);
            }
            Ok(PointContext {
                cn,
                partials,
                margins,
            })
        })
        .collect()
}

/// Multiplier-bootstrap replicates of the empirical copula process,
/// evaluated at `eval_points`: a `B x |eval_points|` matrix, row `b`
/// holding the corrected process of replicate `b`. Deterministic given
/// the seed.
pub fn multiplier_replicates(
    copula: &EmpiricalCopula,
    eval_points: &[Vec<f64>],
    cfg: &MultiplierConfig,
) -> Result<Vec<Vec<f64>>> {
    let h = cfg.validate(copula)?;
    let multipliers = draw_multipliers(cfg, copula.n());
    replicates_with_multipliers(copula, eval_points, &multipliers, h)
}

/// Same as [`multiplier_replicates`] but with caller-supplied multiplier
/// vectors (one per replicate). Exposed so degenerate weights (e.g. all
/// zero) can be injected when validating the construction.
pub fn replicates_with_multipliers(
    copula: &EmpiricalCopula,
    eval_points: &[Vec<f64>],
    multipliers: &[Vec<f64>],
    h: f64,
) -> Result<Vec<Vec<f64>>> {
    if eval_points.is_empty() {
        return Err(Error::InvalidParameter("no evaluation points".into()));
    }
    if multipliers.is_empty() {
        return Err(Error::InvalidParameter("no multiplier vectors".into()));
    }
    let n = copula.n();
    for z in multipliers {
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            });
        }
    }
    let contexts = point_contexts(copula, eval_points, h)?;
    if copula.d() == 2 {
        Ok(replicates_bivariate(copula, eval_points, multipliers, &contexts))
    } else {
        Ok(replicates_dense(copula, eval_points, multipliers, &contexts))
    }
}

/// Bivariate path: per replicate, the weighted indicator sums at all
/// evaluation points come from one sweep over the sample in first-coordinate
/// order with a Fenwick tree over second-coordinate ranks, which drops the
/// replicate cost from `O(P n)` to `O((P + n) log n)`.
fn replicates_bivariate(
    copula: &EmpiricalCopula,
    eval_points: &[Vec<f64>],
    multipliers: &[Vec<f64>],
    contexts: &[PointContext],
) -> Vec<Vec<f64>> {
    let n = copula.n();
    let pobs = copula.pobs();
    let xs = pobs.column(0);
    let ys = pobs.column(1);
    let y_ranks = crate::ranks::dense_ranks(&ys);
    let n_levels = y_ranks.iter().max().map(|&m| m + 1).unwrap_or(0);
    let mut y_levels = ys.clone();
    y_levels.sort_by(|a, b| a.total_cmp(b));
    y_levels.dedup();
    let mut xs_sorted = xs.clone();
    xs_sorted.sort_by(|a, b| a.total_cmp(b));
    let mut ys_sorted = ys.clone();
    ys_sorted.sort_by(|a, b| a.total_cmp(b));
    let mut order_x: Vec<usize> = (0..n).collect();
    order_x.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut order_y: Vec<usize> = (0..n).collect();
    order_y.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));

    // per-point integer positions shared by every replicate
    let cx: Vec<usize> = eval_points
        .iter()
        .map(|u| xs_sorted.partition_point(|&v| v <= u[0]))
        .collect();
    let cy: Vec<usize> = eval_points
        .iter()
        .map(|u| ys_sorted.partition_point(|&v| v <= u[1]))
        .collect();
    let level: Vec<usize> = eval_points
        .iter()
        .map(|u| y_levels.partition_point(|&v| v <= u[1]).wrapping_sub(1))
        .collect();
    let mut by_cx: Vec<usize> = (0..eval_points.len()).collect();
    by_cx.sort_by_key(|&p| cx[p]);

    let sqrt_n = (n as f64).sqrt();
    multipliers
        .par_iter()
        .map(|z| {
            let z_sum: f64 = z.iter().sum();
            let mut prefix_x = vec![0.0f64; n + 1];
            let mut prefix_y = vec![0.0f64; n + 1];
            for k in 0..n {
                prefix_x[k + 1] = prefix_x[k] + z[order_x[k]];
                prefix_y[k + 1] = prefix_y[k] + z[order_y[k]];
            }
            let mut tree = FenwickF64::new(n_levels);
            let mut inserted = 0usize;
            let mut out = vec![0.0f64; eval_points.len()];
            for &p in &by_cx {
                while inserted < cx[p] {
                    let i = order_x[inserted];
                    tree.add(y_ranks[i], z[i]);
                    inserted += 1;
                }
                let ctx = &contexts[p];
                let joint = tree.prefix(level[p]);
                let alpha = (joint - ctx.cn * z_sum) / sqrt_n;
                let a1 = (prefix_x[cx[p]] - ctx.margins[0] * z_sum) / sqrt_n;
                let a2 = (prefix_y[cy[p]] - ctx.margins[1] * z_sum) / sqrt_n;
                out[p] = alpha - ctx.partials[0] * a1 - ctx.partials[1] * a2;
            }
            out
        })
        .collect()
}

/// General-dimension path with explicit indicator tables.
fn replicates_dense(
    copula: &EmpiricalCopula,
    eval_points: &[Vec<f64>],
    multipliers: &[Vec<f64>],
    contexts: &[PointContext],
) -> Vec<Vec<f64>> {
    let n = copula.n();
    let d = copula.d();
    let pobs = copula.pobs();
    let n_points = eval_points.len();
    let mut joint = vec![0.0f64; n_points * n];
    let mut marg = vec![0.0f64; n_points * d * n];
    for (p, u) in eval_points.iter().enumerate() {
        for i in 0..n {
            let row = pobs.row(i);
            let mut all = true;
            for j in 0..d {
                let le = row[j] <= u[j];
                if le {
                    marg[(p * d + j) * n + i] = 1.0;
                } else {
                    all = false;
                }
            }
            if all {
                joint[p * n + i] = 1.0;
            }
        }
    }

    let sqrt_n = (n as f64).sqrt();
    multipliers
        .par_iter()
        .map(|z| {
            let z_sum: f64 = z.iter().sum();
            (0..n_points)
                .map(|p| {
                    let ctx = &contexts[p];
                    let joint_dot: f64 = joint[p * n..(p + 1) * n]
                        .iter()
                        .zip(z)
                        .map(|(a, b)| a * b)
                        .sum();
                    let mut value = (joint_dot - ctx.cn * z_sum) / sqrt_n;
                    for j in 0..d {
                        let marg_dot: f64 = marg[(p * d + j) * n..(p * d + j + 1) * n]
                            .iter()
                            .zip(z)
                            .map(|(a, b)| a * b)
                            .sum();
                        let alpha_j = (marg_dot - ctx.margins[j] * z_sum) / sqrt_n;
                        value -= ctx.partials[j] * alpha_j;
                    }
                    value
                })
                .collect()
        })
        .collect()
}

/// Fenwick tree with f64 weights, for the replicate sweeps.
struct FenwickF64 {
    tree: Vec<f64>,
}

impl FenwickF64 {
    fn new(len: usize) -> Self {
        Self {
            tree: vec![0.0; len + 1],
        }
    }

    fn add(&mut self, mut idx: usize, delta: f64) {
        idx += 1;
        while idx < self.tree.len() {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    fn prefix(&self, idx: usize) -> f64 {
        if idx == usize::MAX {
            return 0.0;
        }
        let mut idx = (idx + 1).min(self.tree.len() - 1);
        let mut sum = 0.0;
        while idx > 0 {
            sum += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::{pseudo_observations, DataMatrix, TiesPolicy};
    use crate::simulate::{sample, CopulaFamily};

    fn toy_copula() -> EmpiricalCopula {
        // pseudo-observations {(0.25,0.5),(0.5,0.25),(0.75,0.75)}
        let data =
            DataMatrix::from_pairs(&[(1.0, 2.0), (2.0, 1.0), (3.0, 3.0)]).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        EmpiricalCopula::new(pobs)
    }

    #[test]
    fn eval_examples() {
        let c = toy_copula();
        assert_eq!(c.eval(&[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(c.eval(&[0.0, 0.7]).unwrap(), 0.0);
        // direct count: rows (0.25,0.5) and (0.5,0.25) satisfy <= (0.5,0.5)
        assert!((c.eval(&[0.5, 0.5]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(c.eval(&[0.5]).is_err());
    }

    #[test]
    fn eval_matches_naive_double_loop() {
        let data = sample(&CopulaFamily::Independence, 60, 77).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs.clone());
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..100 {
            let u = [rng.random::<f64>(), rng.random::<f64>()];
            let mut count = 0;
            for i in 0..pobs.n_rows() {
                let mut ok = true;
                for j in 0..2 {
                    if pobs.get(i, j) > u[j] {
                        ok = false;
                    }
                }
                if ok {
                    count += 1;
                }
            }
            let naive = count as f64 / pobs.n_rows() as f64;
            assert_eq!(c.eval(&u).unwrap(), naive);
        }
    }

    #[test]
    fn partial_derivative_zero_on_empty_window() {
        let c = toy_copula();
        // below every pseudo-observation: C_n vanishes on the whole window
        let d = c.partial_derivative(0, &[0.05, 0.05], 0.04).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn partial_derivative_in_unit_interval_at_corner() {
        let data = sample(&CopulaFamily::Independence, 400, 5).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let h = c.default_bandwidth();
        let d = c.partial_derivative(0, &[1.0, 1.0], h).unwrap();
        assert!((0.0..=1.0).contains(&d));
    }

    #[test]
    fn partial_derivative_approximates_independence_margin() {
        // d/du_j of u1*u2 is the other coordinate
        let data = sample(&CopulaFamily::Independence, 10_000, 42).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let h = c.default_bandwidth();
        for &(u1, u2) in &[(0.3, 0.6), (0.5, 0.5), (0.7, 0.2)] {
            let d0 = c.partial_derivative(0, &[u1, u2], h).unwrap();
            let d1 = c.partial_derivative(1, &[u1, u2], h).unwrap();
            assert!((d0 - u2).abs() < 0.05, "d0={d0} expected {u2}");
            assert!((d1 - u1).abs() < 0.05, "d1={d1} expected {u1}");
        }
    }

    #[test]
    fn zero_multipliers_give_zero_process() {
        let c = toy_copula();
        let points = vec![vec![0.4, 0.4], vec![0.9, 0.9]];
        let zeros = vec![vec![0.0; c.n()]; 4];
        let rows = replicates_with_multipliers(&c, &points, &zeros, 0.3).unwrap();
        for row in rows {
            for v in row {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn replicates_deterministic_given_seed() {
        let data = sample(&CopulaFamily::Independence, 50, 8).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let points: Vec<Vec<f64>> = (0..c.n()).map(|i| c.pobs().row(i).to_vec()).collect();
        let cfg = MultiplierConfig::new(8, 99);
        let a = multiplier_replicates(&c, &points, &cfg).unwrap();
        let b = multiplier_replicates(&c, &points, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn replicate_rows_finite_and_seed_changes_rows_not_law() {
        let data = sample(&CopulaFamily::Independence, 120, 21).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let points: Vec<Vec<f64>> = (0..c.n()).map(|i| c.pobs().row(i).to_vec()).collect();
        let rows_a = multiplier_replicates(&c, &points, &MultiplierConfig::new(40, 1)).unwrap();
        let rows_b = multiplier_replicates(&c, &points, &MultiplierConfig::new(40, 2)).unwrap();
        assert_ne!(rows_a, rows_b);
        let pool = |rows: &Vec<Vec<f64>>| -> Vec<f64> {
            rows.iter().flatten().copied().collect()
        };
        let (pa, pb) = (pool(&rows_a), pool(&rows_b));
        for v in pa.iter().chain(pb.iter()) {
            assert!(v.is_finite());
        }
        let d = crate::numeric::ks_statistic_two_sample(&pa, &pb);
        // pooled process values are dependent within a replicate, so allow
        // slack over the i.i.d. critical value
        let crit = crate::numeric::ks_critical_value_two_sample(pa.len(), pb.len(), 0.01);
        assert!(d < 8.0 * crit, "two-seed KS distance {d} vs {crit}");
    }

    #[test]
    fn bivariate_sweep_matches_dense_path() {
        let data = sample(&CopulaFamily::Independence, 70, 12).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let mut points: Vec<Vec<f64>> = (0..c.n()).map(|i| c.pobs().row(i).to_vec()).collect();
        for i in 0..10 {
            let v = i as f64 / 9.0;
            points.push(vec![v, 1.0 - v]);
        }
        let h = c.default_bandwidth();
        let multipliers = draw_multipliers(&MultiplierConfig::new(20, 3), c.n());
        let contexts = point_contexts(&c, &points, h).unwrap();
        let fast = replicates_bivariate(&c, &points, &multipliers, &contexts);
        let dense = replicates_dense(&c, &points, &multipliers, &contexts);
        for (rf, rd) in fast.iter().zip(&dense) {
            for (a, b) in rf.iter().zip(rd) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn replicate_variance_tracks_process_variance_under_independence() {
        // empirical variance of the replicate process at u=(0.5,0.5) should be
        // within a factor 2 of the sampling variance of sqrt(n)(C_n - C)(u)
        let n = 200;
        let u = vec![0.5, 0.5];
        let data = sample(&CopulaFamily::Independence, n, 31).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let c = EmpiricalCopula::new(pobs);
        let rows =
            multiplier_replicates(&c, &[u.clone()], &MultiplierConfig::new(1000, 5)).unwrap();
        let vals: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var_boot =
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;

        let mut fresh = Vec::new();
        for rep in 0..1000u64 {
            let d = sample(&CopulaFamily::Independence, n, 10_000 + rep).unwrap();
            let p = pseudo_observations(&d, TiesPolicy::Average).unwrap();
            let cn = EmpiricalCopula::new(p).eval(&u).unwrap();
            fresh.push((n as f64).sqrt() * (cn - 0.25));
        }
        let fmean = fresh.iter().sum::<f64>() / fresh.len() as f64;
        let var_true =
            fresh.iter().map(|v| (v - fmean).powi(2)).sum::<f64>() / (fresh.len() - 1) as f64;
        assert!(
            var_boot < 2.0 * var_true && var_boot > var_true / 2.0,
            "bootstrap variance {var_boot} vs sampling variance {var_true}"
        );
    }
}

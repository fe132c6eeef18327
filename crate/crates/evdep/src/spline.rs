//! Quadratic B-splines with shape constraints.
//!
//! The smoother fitted to A-plot point clouds is a degree-2 spline on
//! equally spaced knots over [0, 1], constrained to be a valid Pickands
//! dependence function: endpoint interpolation `s(0) = s(1) = 1`,
//! convexity expressed through the spline-coefficient differences, and the
//! envelope `max(t, 1-t) <= s(t) <= 1` at the knots. The constrained
//! least-squares problem is solved with a primal active-set method; the
//! problems are tiny (tens of coefficients), so dense linear algebra is
//! plenty.

use crate::error::{Error, Result};

const DEGREE: usize = 2;

/// A quadratic spline `s(t) = sum_k c_k B_k(t)` on a clamped knot vector
/// over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpline {
    /// Clamped knot vector: three zeros, the interior knots, three ones.
    knots: Vec<f64>,
    coeffs: Vec<f64>,
    /// Coefficients of the derivative (a degree-1 spline on the trimmed
    /// knot vector), precomputed because samplers evaluate it heavily.
    dcoeffs: Vec<f64>,
}

/// Clamped knot vector with `k` equally spaced interior knots.
fn uniform_knots(interior: usize) -> Vec<f64> {
    let mut knots = vec![0.0; DEGREE + 1];
    for i in 1..=interior {
        knots.push(i as f64 / (interior as f64 + 1.0));
    }
    knots.extend_from_slice(&[1.0; DEGREE + 1]);
    knots
}

/// Index of the knot span containing `t` (with `t = 1` mapped to the last
/// non-empty span).
fn find_span(knots: &[f64], t: f64) -> usize {
    let last = knots.len() - DEGREE - 2;
    if t >= knots[last + 1] {
        return last;
    }
    let mut lo = DEGREE;
    let mut hi = last + 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if t < knots[mid] {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// The `DEGREE + 1` basis functions that are nonzero on the span.
fn basis_at(knots: &[f64], span: usize, t: f64, degree: usize) -> Vec<f64> {
    let mut values = vec![0.0; degree + 1];
    values[0] = 1.0;
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    for j in 1..=degree {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = values[r] / (right[r + 1] + left[j - r]);
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    values
}

impl QuadraticSpline {
    fn from_parts(knots: Vec<f64>, coeffs: Vec<f64>) -> Self {
        let dcoeffs = (0..coeffs.len() - 1)
            .map(|k| {
                let gap = knots[k + 3] - knots[k + 1];
                DEGREE as f64 * (coeffs[k + 1] - coeffs[k]) / gap
            })
            .collect();
        Self {
            knots,
            coeffs,
            dcoeffs,
        }
    }

    pub fn n_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn interior_knots(&self) -> usize {
        self.knots.len() - 2 * (DEGREE + 1)
    }

    /// Full basis row at `t` (length `n_coeffs`).
    fn basis_row(knots: &[f64], n_coeffs: usize, t: f64) -> Vec<f64> {
        let span = find_span(knots, t);
        let local = basis_at(knots, span, t, DEGREE);
        let mut row = vec![0.0; n_coeffs];
        for (r, v) in local.iter().enumerate() {
            row[span - DEGREE + r] = *v;
        }
        row
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let span = find_span(&self.knots, t);
        let local = basis_at(&self.knots, span, t, DEGREE);
        local
            .iter()
            .enumerate()
            .map(|(r, v)| v * self.coeffs[span - DEGREE + r])
            .sum()
    }

    /// Analytic first derivative: a degree-1 spline on the trimmed knot
    /// vector with coefficients `2 (c_{k+1} - c_k) / (t_{k+3} - t_{k+1})`.
    pub fn deriv(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let dknots = &self.knots[1..self.knots.len() - 1];
        let last = dknots.len() - 3;
        let span = if t >= dknots[last + 1] {
            last
        } else {
            let mut lo = 1;
            let mut hi = last + 1;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if t < dknots[mid] {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo
        };
        let local = basis_at(dknots, span, t, 1);
        local
            .iter()
            .enumerate()
            .map(|(r, v)| v * self.dcoeffs[span - 1 + r])
            .sum()
    }

    /// Least-squares fit of `(t_i, z_i)` under the Pickands shape
    /// constraints (endpoints pinned at 1, convexity, envelope at knots).
    pub fn fit_pickands(ts: &[f64], zs: &[f64], interior_knots: usize) -> Result<Self> {
        if ts.len() != zs.len() {
            return Err(Error::DimensionMismatch {
                expected: ts.len(),
                got: zs.len(),
            });
        }
        let m = interior_knots + DEGREE + 1;
        if ts.len() < m {
            return Err(Error::TooFewRows {
                required: m,
                got: ts.len(),
            });
        }
        let knots = uniform_knots(interior_knots);

        // normal equations with a whisper of ridge so short data cannot
        // leave the Hessian singular
        let mut h = vec![vec![0.0; m]; m];
        let mut f = vec![0.0; m];
        for (&t, &z) in ts.iter().zip(zs) {
            let row = Self::basis_row(&knots, m, t.clamp(0.0, 1.0));
            for a in 0..m {
                if row[a] == 0.0 {
                    continue;
                }
                f[a] += row[a] * z;
                for b in 0..m {
                    h[a][b] += row[a] * row[b];
                }
            }
        }
        for (a, row) in h.iter_mut().enumerate() {
            row[a] += 1e-9;
        }

        // equalities: endpoint coefficients are the endpoint values for a
        // clamped spline
        let mut eq: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut unit = vec![0.0; m];
        unit[0] = 1.0;
        eq.push((unit, 1.0));
        let mut unit = vec![0.0; m];
        unit[m - 1] = 1.0;
        eq.push((unit, 1.0));

        // inequalities: row . c >= rhs
        let mut ineq: Vec<(Vec<f64>, f64)> = Vec::new();
        // convexity: first-derivative coefficients nondecreasing
        for k in 0..m - 2 {
            let mut row = vec![0.0; m];
            let left_gap = knots[k + 3] - knots[k + 1];
            let right_gap = knots[k + 4] - knots[k + 2];
            row[k] += 1.0 / left_gap;
            row[k + 1] -= 1.0 / left_gap + 1.0 / right_gap;
            row[k + 2] += 1.0 / right_gap;
            ineq.push((row, 0.0));
        }
        // envelope at interior knots (endpoints are pinned by equalities)
        for i in 0..interior_knots {
            let x = knots[DEGREE + 1 + i];
            let row = Self::basis_row(&knots, m, x);
            let lower = x.max(1.0 - x);
            ineq.push((row.clone(), lower));
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            ineq.push((neg, -1.0));
        }

        // the constant spline 1 is always feasible
        let start = vec![1.0; m];
        let coeffs = active_set_qp(&h, &f, &eq, &ineq, start)?;
        Ok(Self::from_parts(knots, coeffs))
    }
}

// ---------------------------------------------------------------------------
// Dense linear algebra and the active-set solver
// ---------------------------------------------------------------------------

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col].abs() < 1e-13 {
            return Err(Error::SolveFailed("singular KKT system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Minimizes `1/2 c' H c - f' c` subject to `eq` (equalities) and
/// `ineq` (`row . c >= rhs`), starting from a feasible point.
fn active_set_qp(
    h: &[Vec<f64>],
    f: &[f64],
    eq: &[(Vec<f64>, f64)],
    ineq: &[(Vec<f64>, f64)],
    start: Vec<f64>,
) -> Result<Vec<f64>> {
    let m = f.len();
    let mut c = start;
    let mut active: Vec<usize> = Vec::new();
    let max_iter = 100 * (m + ineq.len() + 1);

    for _ in 0..max_iter {
        // KKT system:  [ H  -A' ] [c]   [f]
        //              [ A   0  ] [l] = [b]
        let rows: Vec<&(Vec<f64>, f64)> =
            eq.iter().chain(active.iter().map(|&i| &ineq[i])).collect();
        let k = rows.len();
        let dim = m + k;
        let mut mat = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for a in 0..m {
            mat[a][..m].copy_from_slice(&h[a]);
            rhs[a] = f[a];
        }
        for (r, (row, b)) in rows.iter().enumerate() {
            for a in 0..m {
                mat[a][m + r] = -row[a];
                mat[m + r][a] = row[a];
            }
            rhs[m + r] = *b;
        }
        let sol = solve_dense(mat, rhs)?;
        let c_star = &sol[..m];
        let lambda = &sol[m..];

        // step toward c_star, stopping at the first blocking constraint
        let mut alpha = 1.0f64;
        let mut blocking = None;
        for (idx, (row, rhs_i)) in ineq.iter().enumerate() {
            if active.contains(&idx) {
                continue;
            }
            let v_new = dot(row, c_star) - rhs_i;
            if v_new < -1e-11 {
                let v_old = (dot(row, &c) - rhs_i).max(0.0);
                let step = v_old / (v_old - v_new);
                if step < alpha {
                    alpha = step;
                    blocking = Some(idx);
                }
            }
        }
        if let Some(idx) = blocking {
            for (cj, sj) in c.iter_mut().zip(c_star) {
                *cj += alpha * (sj - *cj);
            }
            active.push(idx);
            continue;
        }
        c.copy_from_slice(c_star);

        // optimal unless an active inequality has a negative multiplier
        let ineq_lambda = &lambda[eq.len()..];
        let mut worst = (-1e-9, usize::MAX);
        for (pos, &l) in ineq_lambda.iter().enumerate() {
            if l < worst.0 {
                worst = (l, pos);
            }
        }
        if worst.1 == usize::MAX {
            return Ok(c);
        }
        active.remove(worst.1);
    }
    Err(Error::SolveFailed(
        "active-set iteration limit exceeded".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gumbel_a(theta: f64, t: f64) -> f64 {
        (t.powf(theta) + (1.0 - t).powf(theta)).powf(1.0 / theta)
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n as f64 - 1.0)).collect()
    }

    #[test]
    fn flat_cloud_fits_constant_one() {
        let ts: Vec<f64> = (0..60).map(|i| (i as f64 + 0.5) / 60.0).collect();
        let zs = vec![1.0; 60];
        let s = QuadraticSpline::fit_pickands(&ts, &zs, 10).unwrap();
        for t in grid(101) {
            assert!((s.eval(t) - 1.0).abs() < 1e-6, "s({t}) = {}", s.eval(t));
        }
    }

    #[test]
    fn noise_free_gumbel_curve_is_recovered() {
        let ts: Vec<f64> = (0..400).map(|i| (i as f64 + 0.5) / 400.0).collect();
        let zs: Vec<f64> = ts.iter().map(|&t| gumbel_a(2.0, t)).collect();
        let s = QuadraticSpline::fit_pickands(&ts, &zs, 10).unwrap();
        let mut sup = 0.0f64;
        for t in grid(1001) {
            sup = sup.max((s.eval(t) - gumbel_a(2.0, t)).abs());
        }
        assert!(sup <= 0.005, "sup error {sup}");
    }

    #[test]
    fn residual_nonincreasing_in_knots_on_analytic_input() {
        let ts: Vec<f64> = (0..500).map(|i| (i as f64 + 0.5) / 500.0).collect();
        let zs: Vec<f64> = ts.iter().map(|&t| gumbel_a(3.0, t)).collect();
        let rss = |k: usize| {
            let s = QuadraticSpline::fit_pickands(&ts, &zs, k).unwrap();
            ts.iter()
                .zip(&zs)
                .map(|(&t, &z)| (z - s.eval(t)).powi(2))
                .sum::<f64>()
        };
        let (r5, r10, r20) = (rss(5), rss(10), rss(20));
        assert!(r10 <= r5 + 1e-12, "rss(10)={r10} rss(5)={r5}");
        assert!(r20 <= r10 + 1e-12, "rss(20)={r20} rss(10)={r10}");
    }

    #[test]
    fn constraints_hold_on_hostile_cloud() {
        // single interior point far below the envelope plus endpoints
        let ts = vec![0.5; 20];
        let zs = vec![0.1; 20];
        let s = QuadraticSpline::fit_pickands(&ts, &zs, 6).unwrap();
        assert!(s.eval(0.5) >= 0.5 - 1e-9);
        assert!(s.eval(0.5) <= 1.0 + 1e-9);
        assert!((s.eval(0.0) - 1.0).abs() < 1e-9);
        assert!((s.eval(1.0) - 1.0).abs() < 1e-9);
        // convexity on a fine grid via second differences
        let g = grid(1001);
        for w in g.windows(3) {
            let second = s.eval(w[0]) - 2.0 * s.eval(w[1]) + s.eval(w[2]);
            assert!(second >= -1e-9, "second difference {second} at {}", w[1]);
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let ts: Vec<f64> = (0..300).map(|i| (i as f64 + 0.5) / 300.0).collect();
        let zs: Vec<f64> = ts.iter().map(|&t| gumbel_a(2.0, t)).collect();
        let s = QuadraticSpline::fit_pickands(&ts, &zs, 8).unwrap();
        for &t in &[0.21, 0.4, 0.55, 0.83] {
            let h = 1e-6;
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!((s.deriv(t) - fd).abs() < 1e-5, "at {t}");
        }
    }
}

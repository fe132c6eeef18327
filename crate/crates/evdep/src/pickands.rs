//! Pickands dependence function machinery: the rank-based CFG estimator,
//! extreme-value copula reconstruction, the A-plot with its spline
//! smoother, and the two tests built on them.
//!
//! A bivariate extreme-value copula satisfies
//!
//! ```text
//! C(u1, u2) = exp{ log(u1 u2) * A( log(u2) / log(u1 u2) ) }
//! ```
//!
//! for a convex `A: [0,1] -> [1/2, 1]` with `max(t, 1-t) <= A(t) <= 1` and
//! `A(0) = A(1) = 1`. The first test compares the empirical copula with the
//! reconstruction from the CFG estimate of A and calibrates by a multiplier
//! bootstrap; the second fits a shape-constrained spline through the A-plot
//! and calibrates its residual sum of squares by a parametric bootstrap.

use rayon::prelude::*;

use crate::empirical::{draw_multipliers, EmpiricalCopula, MultiplierConfig};
use crate::error::{Error, Result};
use crate::numeric::mix_seed;
use crate::ranks::{pseudo_observations, DataMatrix, PseudoObs, TiesPolicy};
use crate::report::TestReport;
use crate::spline::QuadraticSpline;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Grid size of the inner integral in the multiplier linearization of the
/// CFG functional.
const CFG_INTEGRAL_GRID: usize = 200;

/// Default number of interior knots of the A-plot spline smoother.
pub const DEFAULT_APLOT_KNOTS: usize = 10;

// ---------------------------------------------------------------------------
// Pickands estimates
// ---------------------------------------------------------------------------

/// Rank-based CFG estimate of the Pickands dependence function.
#[derive(Debug, Clone)]
pub struct CfgEstimate {
    neg_log_u1: Vec<f64>,
    neg_log_u2: Vec<f64>,
    log_a_raw_0: f64,
    log_a_raw_1: f64,
}

impl CfgEstimate {
    /// `log A_raw(t) = -gamma - (1/n) sum_i log min{ -log U_i1 / (1-t),
    /// -log U_i2 / t }`; the minimum degenerates to the proper endpoint
    /// convention at t = 0 and t = 1 because the other branch is +inf.
    fn log_a_raw(&self, t: f64) -> f64 {
        let n = self.neg_log_u1.len() as f64;
        let mut acc = 0.0;
        for (&l1, &l2) in self.neg_log_u1.iter().zip(&self.neg_log_u2) {
            let xi = (l1 / (1.0 - t)).min(l2 / t);
            acc += xi.ln();
        }
        -EULER_GAMMA - acc / n
    }

    fn a(&self, t: f64) -> f64 {
        let log_a = self.log_a_raw(t)
            - (1.0 - t) * self.log_a_raw_0
            - t * self.log_a_raw_1;
        log_a.exp().clamp(t.max(1.0 - t), 1.0)
    }
}

/// Spline estimate of the Pickands dependence function (convex by
/// construction, pinned to 1 at the endpoints).
#[derive(Debug, Clone)]
pub struct SplineEstimate {
    spline: QuadraticSpline,
}

impl SplineEstimate {
    pub fn spline(&self) -> &QuadraticSpline {
        &self.spline
    }
}

/// An estimated Pickands dependence function on `[0, 1]`.
#[derive(Debug, Clone)]
pub enum PickandsEstimate {
    Cfg(CfgEstimate),
    Spline(SplineEstimate),
}

impl PickandsEstimate {
    /// Evaluates the estimate, always inside the envelope
    /// `max(t, 1-t) <= A <= 1` (clipping keeps finite-sample estimates
    /// usable as copula generators; the envelope is itself convex, so
    /// clipping preserves convexity of the spline kind).
    pub fn a(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            PickandsEstimate::Cfg(cfg) => cfg.a(t),
            PickandsEstimate::Spline(s) => {
                s.spline.eval(t).clamp(t.max(1.0 - t), 1.0)
            }
        }
    }

    /// Derivative of the estimate: analytic for the spline, a central
    /// difference for the CFG kind. Where envelope clipping is active the
    /// derivative follows the envelope, keeping (A, A') consistent so the
    /// conditional c.d.f. built from them stays monotone.
    pub fn a_deriv(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            PickandsEstimate::Cfg(_) => {
                let h = 1e-5;
                let hi = (t + h).min(1.0);
                let lo = (t - h).max(0.0);
                (self.a(hi) - self.a(lo)) / (hi - lo)
            }
            PickandsEstimate::Spline(s) => {
                let raw = s.spline.eval(t);
                if raw < t.max(1.0 - t) {
                    if t < 0.5 {
                        -1.0
                    } else {
                        1.0
                    }
                } else {
                    s.spline.deriv(t)
                }
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PickandsEstimate::Cfg(_) => "cfg",
            PickandsEstimate::Spline(_) => "spline",
        }
    }

    /// Fits the shape-constrained spline through arbitrary `(t, z)` points.
    pub fn spline_from_points(ts: &[f64], zs: &[f64], interior_knots: usize) -> Result<Self> {
        Ok(PickandsEstimate::Spline(SplineEstimate {
            spline: QuadraticSpline::fit_pickands(ts, zs, interior_knots)?,
        }))
    }
}

/// Rank-based CFG estimator with endpoint correction
/// `log A(t) = log A_raw(t) - (1-t) log A_raw(0) - t log A_raw(1)`,
/// clipped into the Pickands envelope.
pub fn cfg_estimator(pobs: &PseudoObs) -> Result<PickandsEstimate> {
    if pobs.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pobs.n_cols(),
        });
    }
    let neg_log_u1: Vec<f64> = pobs.column(0).iter().map(|u| -u.ln()).collect();
    let neg_log_u2: Vec<f64> = pobs.column(1).iter().map(|u| -u.ln()).collect();
    let mut estimate = CfgEstimate {
        neg_log_u1,
        neg_log_u2,
        log_a_raw_0: 0.0,
        log_a_raw_1: 0.0,
    };
    estimate.log_a_raw_0 = estimate.log_a_raw(0.0);
    estimate.log_a_raw_1 = estimate.log_a_raw(1.0);
    Ok(PickandsEstimate::Cfg(estimate))
}

/// Extreme-value copula reconstructed from a Pickands function:
/// `C(u1, u2) = exp{ log(u1 u2) A(log u2 / log(u1 u2)) }` on
/// `(0, 1]^2 \ {(1, 1)}`.
pub fn ev_copula_from_a(a: &PickandsEstimate, u: [f64; 2]) -> Result<f64> {
    let [u1, u2] = u;
    if !(u1 > 0.0 && u1 <= 1.0 && u2 > 0.0 && u2 <= 1.0) || (u1 == 1.0 && u2 == 1.0) {
        return Err(Error::InvalidDomain(format!(
            "({u1}, {u2}) outside (0,1]^2 \\ {{(1,1)}}"
        )));
    }
    let log_uv = u1.ln() + u2.ln();
    let t = u2.ln() / log_uv;
    Ok((log_uv * a.a(t)).exp())
}

// ---------------------------------------------------------------------------
// A-plot
// ---------------------------------------------------------------------------

/// The A-plot: transformed pseudo-observations that lie on the graph of A
/// under extreme-value dependence.
#[derive(Debug, Clone)]
pub struct APlot {
    /// `(T_i, Z_i)` pairs with `T_i` in (0,1).
    pub points: Vec<(f64, f64)>,
    /// True when an upper-tail threshold filtered the points.
    pub trimmed: bool,
    pub threshold: Option<[f64; 2]>,
    /// Points discarded because the copula count underneath them was zero.
    pub dropped: usize,
}

/// Builds the A-plot
/// `T_i = log U_i2 / log(U_i1 U_i2)`, `Z_i = log Cs(U_i) / log(U_i1 U_i2)`
/// where `Cs` counts with the boundary-safe `1/(n+1)` scaling, so that
/// `Z_i > 0` always and perfectly comonotone ranks map to exactly
/// `(1/2, 1/2)`. A threshold keeps only points with `U_i >= t`
/// componentwise.
pub fn a_plot(pobs: &PseudoObs, threshold: Option<[f64; 2]>) -> Result<APlot> {
    if pobs.n_cols() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: pobs.n_cols(),
        });
    }
    if let Some([t1, t2]) = threshold {
        if !((0.0..1.0).contains(&t1) && (0.0..1.0).contains(&t2)) {
            return Err(Error::InvalidParameter(format!(
                "threshold ({t1}, {t2}) must lie in [0, 1)^2"
            )));
        }
    }
    let n = pobs.n_rows();
    let mut points = Vec::with_capacity(n);
    let mut dropped = 0usize;
    for i in 0..n {
        let (u1, u2) = (pobs.get(i, 0), pobs.get(i, 1));
        if let Some([t1, t2]) = threshold {
            if u1 < t1 || u2 < t2 {
                continue;
            }
        }
        let mut count = 0usize;
        for j in 0..n {
            if pobs.get(j, 0) <= u1 && pobs.get(j, 1) <= u2 {
                count += 1;
            }
        }
        if count == 0 {
            dropped += 1;
            continue;
        }
        let log_uv = u1.ln() + u2.ln();
        let t_hat = u2.ln() / log_uv;
        let z_hat = (count as f64 / (n as f64 + 1.0)).ln() / log_uv;
        points.push((t_hat, z_hat));
    }
    Ok(APlot {
        points,
        trimmed: threshold.is_some(),
        threshold,
        dropped,
    })
}

/// Shape-constrained spline smoother of the A-plot.
pub fn spline_fit_a(plot: &APlot, interior_knots: usize) -> Result<PickandsEstimate> {
    let ts: Vec<f64> = plot.points.iter().map(|p| p.0).collect();
    let zs: Vec<f64> = plot.points.iter().map(|p| p.1).collect();
    PickandsEstimate::spline_from_points(&ts, &zs, interior_knots)
}

// ---------------------------------------------------------------------------
// Test via the CFG reconstruction and the multiplier bootstrap
// ---------------------------------------------------------------------------

/// Test of extreme-value dependence comparing the empirical copula with its
/// reconstruction from the CFG estimate of A. The statistic integrates the
/// squared difference process over the pseudo-observations; the p-value
/// comes from a multiplier bootstrap in which both the empirical copula and
/// the CFG functional are linearized with the same multiplier weights and
/// finite-difference copula derivatives.
pub fn test_pickands_a(data: &DataMatrix, cfg: &MultiplierConfig) -> Result<TestReport> {
    data.require_cols(2)?;
    let n = data.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows {
            required: 4,
            got: n,
        });
    }
    let pobs = pseudo_observations(data, TiesPolicy::Average)?;
    let copula = EmpiricalCopula::new(pobs);
    let h = cfg.validate(&copula)?;
    let a_hat = cfg_estimator(copula.pobs())?;

    // observed statistic
    let nf = n as f64;
    let mut t_vals = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut statistic = 0.0;
    for i in 0..n {
        let u = copula.pobs().row(i).to_vec();
        let log_uv = u[0].ln() + u[1].ln();
        let t = u[1].ln() / log_uv;
        let c_n = copula.eval(&u)?;
        let a_t = a_hat.a(t);
        let c_a = (log_uv * a_t).exp();
        statistic += (c_n - c_a) * (c_n - c_a);
        t_vals.push(t);
        beta.push(log_uv * c_a * a_t);
    }

    // linearization coefficients: for each t, the vector over observations
    // of the multiplier coefficient of sqrt(n)(log A_raw(t) - log A(t))
    let coef_for_t = |t: f64| -> Result<Vec<f64>> {
        let g = CFG_INTEGRAL_GRID;
        let mut coef = vec![0.0; n];
        for k in 0..g {
            let x = (k as f64 + 0.5) / g as f64;
            // 1/(x log x) is negative on (0, 1); the sign carries the
            // direction of the CFG functional's influence
            let factor = 1.0 / (g as f64 * x * x.ln());
            let p = [x.powf(1.0 - t), x.powf(t)];
            let cn = copula.eval(&p)?;
            let d1 = copula.partial_derivative(0, &p, h)?;
            let d2 = copula.partial_derivative(1, &p, h)?;
            let f1 = copula.eval(&[p[0], 1.0])?;
            let f2 = copula.eval(&[1.0, p[1]])?;
            for i in 0..n {
                let row = copula.pobs().row(i);
                let ind1 = (row[0] <= p[0]) as u8 as f64;
                let ind2 = (row[1] <= p[1]) as u8 as f64;
                let joint = if ind1 > 0.0 && ind2 > 0.0 { 1.0 } else { 0.0 };
                let c_i = (joint - cn) - d1 * (ind1 - f1) - d2 * (ind2 - f2);
                coef[i] += factor * c_i;
            }
        }
        Ok(coef)
    };

    let coef_0 = coef_for_t(0.0)?;
    let coef_1 = coef_for_t(1.0)?;
    let coef_t: Vec<Vec<f64>> = t_vals
        .par_iter()
        .map(|&t| coef_for_t(t))
        .collect::<Result<_>>()?;

    // process coefficients at each pseudo-observation: the replicate of the
    // difference process at point j is (1/sqrt n) sum_i Z_i e[j][i]
    let mut e = vec![0.0f64; n * n];
    for j in 0..n {
        let u = copula.pobs().row(j).to_vec();
        let cn = copula.eval(&u)?;
        let d1 = copula.partial_derivative(0, &u, h)?;
        let d2 = copula.partial_derivative(1, &u, h)?;
        let f1 = copula.eval(&[u[0], 1.0])?;
        let f2 = copula.eval(&[1.0, u[1]])?;
        let t = t_vals[j];
        for i in 0..n {
            let row = copula.pobs().row(i);
            let ind1 = (row[0] <= u[0]) as u8 as f64;
            let ind2 = (row[1] <= u[1]) as u8 as f64;
            let joint = if ind1 > 0.0 && ind2 > 0.0 { 1.0 } else { 0.0 };
            let c_i = (joint - cn) - d1 * (ind1 - f1) - d2 * (ind2 - f2);
            let a_lin = coef_t[j][i] - (1.0 - t) * coef_0[i] - t * coef_1[i];
            e[j * n + i] = c_i - beta[j] * a_lin;
        }
    }

    let multipliers = draw_multipliers(cfg, n);
    let replicate_stats: Vec<f64> = multipliers
        .par_iter()
        .map(|z| {
            let mut acc = 0.0;
            for j in 0..n {
                let dot: f64 = e[j * n..(j + 1) * n]
                    .iter()
                    .zip(z)
                    .map(|(a, b)| a * b)
                    .sum();
                let value = dot / nf.sqrt();
                acc += value * value;
            }
            acc / nf
        })
        .collect();

    let p_value = resampled_p_value(statistic, &replicate_stats)?;
    Ok(TestReport {
        statistic,
        p_value,
        method: "pickands_a".into(),
        replicates: cfg.replicates,
        seed: Some(cfg.seed),
        heuristic: false,
        extras: [("bandwidth".to_string(), h)].into_iter().collect(),
    })
}

/// `(1 + #{T_b >= T}) / (B + 1)`, refusing a collapsed replicate set.
pub(crate) fn resampled_p_value(observed: f64, replicates: &[f64]) -> Result<f64> {
    let b = replicates.len();
    if b == 0 {
        return Err(Error::InvalidParameter("no replicates".into()));
    }
    let first = replicates[0];
    if b > 1 && replicates.iter().all(|&t| t == first) {
        return Err(Error::DegenerateReplicates(format!(
            "all {b} replicate statistics equal {first}"
        )));
    }
    let exceed = replicates.iter().filter(|&&t| t >= observed).count();
    Ok((1 + exceed) as f64 / (b + 1) as f64)
}

// ---------------------------------------------------------------------------
// A-plot residual test with parametric bootstrap
// ---------------------------------------------------------------------------

/// Mean squared vertical distance of the A-plot points from a fitted
/// Pickands function.
pub fn aplot_residual_statistic(plot: &APlot, a: &PickandsEstimate) -> f64 {
    let k = plot.points.len() as f64;
    plot.points
        .iter()
        .map(|&(t, z)| (z - a.a(t)).powi(2))
        .sum::<f64>()
        / k
}

/// Residual test: fits the shape-constrained spline through the A-plot,
/// takes the residual sum of squares as the statistic, and calibrates it by
/// a parametric bootstrap that simulates from the extreme-value copula with
/// the fitted Pickands function and reruns the whole pipeline (ranks,
/// A-plot, spline fit) on every replicate. With a threshold the procedure
/// becomes the trimmed, heuristic variant.
pub fn test_aplot_residual(
    data: &DataMatrix,
    replicates: usize,
    seed: u64,
    threshold: Option<[f64; 2]>,
    interior_knots: usize,
) -> Result<TestReport> {
    data.require_cols(2)?;
    if replicates == 0 {
        return Err(Error::InvalidParameter(
            "parametric bootstrap needs at least one replicate".into(),
        ));
    }
    let n = data.n_rows();
    let pobs = pseudo_observations(data, TiesPolicy::Average)?;
    let plot = a_plot(&pobs, threshold)?;
    if plot.points.len() < interior_knots + 3 {
        return Err(Error::TooFewRows {
            required: interior_knots + 3,
            got: plot.points.len(),
        });
    }
    let fitted = spline_fit_a(&plot, interior_knots)?;
    let statistic = aplot_residual_statistic(&plot, &fitted);

    let family = crate::simulate::CopulaFamily::EvFromA { a: fitted.clone() };
    let replicate_stats: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|b| -> Result<f64> {
            let rep_seed = mix_seed(&[seed, b as u64 + 1]);
            let sim = crate::simulate::sample(&family, n, rep_seed)?;
            let sim_pobs = pseudo_observations(&sim, TiesPolicy::Average)?;
            let sim_plot = a_plot(&sim_pobs, threshold)?;
            if sim_plot.points.len() < interior_knots + 3 {
                return Err(Error::TooFewRows {
                    required: interior_knots + 3,
                    got: sim_plot.points.len(),
                });
            }
            let sim_fit = spline_fit_a(&sim_plot, interior_knots)?;
            Ok(aplot_residual_statistic(&sim_plot, &sim_fit))
        })
        .collect::<Result<_>>()?;

    let p_value = resampled_p_value(statistic, &replicate_stats)?;
    let mut report = TestReport {
        statistic,
        p_value,
        method: "aplot_resid".into(),
        replicates,
        seed: Some(seed),
        heuristic: threshold.is_some(),
        extras: Default::default(),
    };
    report.extras.insert("interior_knots".into(), interior_knots as f64);
    report.extras.insert("points_used".into(), plot.points.len() as f64);
    report.extras.insert("points_dropped".into(), plot.dropped as f64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{sample, CopulaFamily};

    fn gumbel_a(theta: f64, t: f64) -> f64 {
        (t.powf(theta) + (1.0 - t).powf(theta)).powf(1.0 / theta)
    }

    fn spline_of(f: impl Fn(f64) -> f64, knots: usize) -> PickandsEstimate {
        let ts: Vec<f64> = (0..800).map(|i| (i as f64 + 0.5) / 800.0).collect();
        let zs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        PickandsEstimate::spline_from_points(&ts, &zs, knots).unwrap()
    }

    #[test]
    fn ev_copula_examples() {
        // A == 1: the product copula
        let one = spline_of(|_| 1.0, 8);
        let c = ev_copula_from_a(&one, [0.3, 0.7]).unwrap();
        assert!((c - 0.21).abs() < 1e-5, "product value {c}");

        // A = max(t, 1-t): the comonotone copula
        let lower = spline_of(|t: f64| t.max(1.0 - t), 20);
        let c = ev_copula_from_a(&lower, [0.3, 0.7]).unwrap();
        assert!((c - 0.3).abs() < 2e-3, "comonotone value {c}");

        // Gumbel theta = 2 at (0.5, 0.5)
        let g2 = spline_of(|t| gumbel_a(2.0, t), 12);
        let c = ev_copula_from_a(&g2, [0.5, 0.5]).unwrap();
        let closed = (-(2.0f64.sqrt()) * 2.0f64.ln()).exp();
        assert!((c - closed).abs() < 1e-3, "gumbel value {c} vs {closed}");

        // domain errors
        assert!(ev_copula_from_a(&one, [0.0, 0.5]).is_err());
        assert!(ev_copula_from_a(&one, [1.0, 1.0]).is_err());
        // one coordinate at 1 degenerates to the other margin
        let c = ev_copula_from_a(&g2, [1.0, 0.42]).unwrap();
        assert!((c - 0.42).abs() < 1e-9);
    }

    #[test]
    fn ev_reconstruction_is_max_stable() {
        let g2 = spline_of(|t| gumbel_a(2.0, t), 12);
        for &r in &[2.0, 3.0, 5.0, 7.5] {
            for i in 1..=20 {
                for j in 1..=20 {
                    let u = [i as f64 / 21.0, j as f64 / 21.0];
                    let root = [u[0].powf(1.0 / r), u[1].powf(1.0 / r)];
                    let lhs = ev_copula_from_a(&g2, root).unwrap().powf(r);
                    let rhs = ev_copula_from_a(&g2, u).unwrap();
                    assert!(
                        (lhs - rhs).abs() < 1e-12,
                        "gap {} at {u:?}, r={r}",
                        lhs - rhs
                    );
                }
            }
        }
    }

    #[test]
    fn cfg_endpoints_exact_and_envelope_respected() {
        let data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 300, 17).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let a = cfg_estimator(&pobs).unwrap();
        assert_eq!(a.a(0.0), 1.0);
        assert_eq!(a.a(1.0), 1.0);
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let v = a.a(t);
            assert!(v <= 1.0 + 1e-12);
            assert!(v >= t.max(1.0 - t) - 1e-12);
        }
    }

    #[test]
    fn cfg_accurate_under_independence() {
        // median over 20 replications of the sup distance from A == 1
        let mut sups = Vec::new();
        for rep in 0..20 {
            let data = sample(&CopulaFamily::Independence, 5000, 900 + rep).unwrap();
            let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
            let a = cfg_estimator(&pobs).unwrap();
            let mut sup = 0.0f64;
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                sup = sup.max((a.a(t) - 1.0).abs());
            }
            sups.push(sup);
        }
        sups.sort_by(|a, b| a.total_cmp(b));
        let median = 0.5 * (sups[9] + sups[10]);
        assert!(median <= 0.03, "median sup deviation {median}");
    }

    #[test]
    fn a_plot_comonotone_collapses_to_center() {
        let data = DataMatrix::from_pairs(
            &(1..=50).map(|i| (i as f64, i as f64)).collect::<Vec<_>>(),
        )
        .unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let plot = a_plot(&pobs, None).unwrap();
        assert_eq!(plot.points.len(), 50);
        assert_eq!(plot.dropped, 0);
        for &(t, z) in &plot.points {
            assert!((t - 0.5).abs() < 1e-12, "t = {t}");
            assert!((z - 0.5).abs() < 1e-12, "z = {z}");
        }
    }

    #[test]
    fn a_plot_independence_clusters_near_one() {
        let data = sample(&CopulaFamily::Independence, 2000, 23).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let plot = a_plot(&pobs, None).unwrap();
        let mut devs: Vec<f64> = plot.points.iter().map(|&(_, z)| (z - 1.0).abs()).collect();
        devs.sort_by(|a, b| a.total_cmp(b));
        let median = devs[devs.len() / 2];
        assert!(median < 0.1, "median |z - 1| = {median}");
    }

    #[test]
    fn a_plot_threshold_filters_points() {
        let data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 400, 3).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        let plot = a_plot(&pobs, Some([0.9, 0.9])).unwrap();
        assert!(plot.trimmed);
        let expected = (0..400)
            .filter(|&i| pobs.get(i, 0) >= 0.9 && pobs.get(i, 1) >= 0.9)
            .count();
        assert_eq!(plot.points.len(), expected);
        assert!(expected < 400);
    }

    #[test]
    fn aplot_residual_zero_on_representable_curve() {
        let fitted = spline_of(|t| gumbel_a(2.0, t), 10);
        let ts: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let points: Vec<(f64, f64)> = ts.iter().map(|&t| (t, fitted.a(t))).collect();
        let plot = APlot {
            points,
            trimmed: false,
            threshold: None,
            dropped: 0,
        };
        let refit = spline_fit_a(&plot, 10).unwrap();
        let resid = aplot_residual_statistic(&plot, &refit);
        assert!(resid < 1e-10, "residual {resid}");
    }

    #[test]
    fn pickands_test_distinguishes_families() {
        let cfg = MultiplierConfig::new(200, 7);
        let null_data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 150, 41).unwrap();
        let null_report = test_pickands_a(&null_data, &cfg).unwrap();
        assert!(null_report.p_value > 0.01, "null p {}", null_report.p_value);

        let alt_data = sample(&CopulaFamily::Clayton { theta: 2.0 }, 150, 42).unwrap();
        let alt_report = test_pickands_a(&alt_data, &cfg).unwrap();
        assert!(alt_report.p_value < 0.05, "alt p {}", alt_report.p_value);
        assert!(alt_report.statistic > null_report.statistic);
    }

    #[test]
    fn pickands_test_deterministic() {
        let cfg = MultiplierConfig::new(50, 9);
        let data = sample(&CopulaFamily::Gumbel { theta: 1.5 }, 80, 2).unwrap();
        let a = test_pickands_a(&data, &cfg).unwrap();
        let b = test_pickands_a(&data, &cfg).unwrap();
        assert_eq!(a.statistic.to_bits(), b.statistic.to_bits());
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
    }

    #[test]
    fn aplot_residual_test_distinguishes_families() {
        let null_data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 200, 51).unwrap();
        let null_report =
            test_aplot_residual(&null_data, 100, 3, None, DEFAULT_APLOT_KNOTS).unwrap();
        assert!(null_report.p_value > 0.01, "null p {}", null_report.p_value);

        let alt_data = sample(&CopulaFamily::Clayton { theta: 2.0 }, 200, 52).unwrap();
        let alt_report =
            test_aplot_residual(&alt_data, 100, 3, None, DEFAULT_APLOT_KNOTS).unwrap();
        assert!(alt_report.p_value < 0.05, "alt p {}", alt_report.p_value);
    }

    #[test]
    fn resampled_p_value_contract() {
        assert_eq!(resampled_p_value(1.0, &[0.5, 2.0, 0.1]).unwrap(), 0.5);
        assert!(resampled_p_value(1.0, &[]).is_err());
        assert!(matches!(
            resampled_p_value(1.0, &[0.3, 0.3, 0.3]),
            Err(Error::DegenerateReplicates(_))
        ));
    }
}

//! Copula samplers, tau/parameter maps, and the inversion-of-tau fit.
//!
//! Families cover the usual power-study suspects (Gumbel–Hougaard, Clayton,
//! Frank, Gaussian, Student t with 4 d.f., independence) plus an
//! extreme-value copula driven by an arbitrary Pickands function, which the
//! parametric bootstrap of the A-plot residual test simulates from.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::pickands::{ev_copula_from_a, PickandsEstimate};
use crate::ranks::{pseudo_observations, DataMatrix, TiesPolicy};

/// A bivariate copula family with its parameter.
#[derive(Debug, Clone)]
pub enum CopulaFamily {
    Independence,
    /// Gumbel–Hougaard, `theta >= 1`.
    Gumbel { theta: f64 },
    /// Clayton, `theta > 0`.
    Clayton { theta: f64 },
    /// Frank, `theta != 0`.
    Frank { theta: f64 },
    /// Gaussian, `rho` in (-1, 1).
    Gaussian { rho: f64 },
    /// Student t with 4 degrees of freedom, `rho` in (-1, 1).
    StudentT4 { rho: f64 },
    /// Extreme-value copula with the given Pickands dependence function.
    EvFromA { a: PickandsEstimate },
}

impl CopulaFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gumbel { .. } => "gumbel",
            CopulaFamily::Clayton { .. } => "clayton",
            CopulaFamily::Frank { .. } => "frank",
            CopulaFamily::Gaussian { .. } => "gaussian",
            CopulaFamily::StudentT4 { .. } => "t4",
            CopulaFamily::EvFromA { .. } => "ev_from_a",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            CopulaFamily::Gumbel { theta } if !(*theta >= 1.0) => {
                bad(format!("gumbel theta must be >= 1, got {theta}"))
            }
            CopulaFamily::Clayton { theta } if !(*theta > 0.0) => {
                bad(format!("clayton theta must be > 0, got {theta}"))
            }
            CopulaFamily::Frank { theta } if *theta == 0.0 || !theta.is_finite() => {
                bad("frank theta must be finite and nonzero".into())
            }
            CopulaFamily::Gaussian { rho } | CopulaFamily::StudentT4 { rho }
                if !(rho.abs() < 1.0) =>
            {
                bad(format!("correlation must lie in (-1, 1), got {rho}"))
            }
            _ => Ok(()),
        }
    }
}

/// Family identifier without a parameter; scenario grids pair it with a
/// Kendall's tau and derive the parameter through [`param_from_tau`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Independence,
    Gumbel,
    Clayton,
    Frank,
    Gaussian,
    StudentT4,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Independence => "independence",
            FamilyKind::Gumbel => "gumbel",
            FamilyKind::Clayton => "clayton",
            FamilyKind::Frank => "frank",
            FamilyKind::Gaussian => "gaussian",
            FamilyKind::StudentT4 => "t4",
        }
    }

    /// Stable numeric id used in seed derivation.
    pub(crate) fn id(&self) -> u64 {
        match self {
            FamilyKind::Independence => 0,
            FamilyKind::Gumbel => 1,
            FamilyKind::Clayton => 2,
            FamilyKind::Frank => 3,
            FamilyKind::Gaussian => 4,
            FamilyKind::StudentT4 => 5,
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "independence" | "indep" => Ok(FamilyKind::Independence),
            "gumbel" | "gumbel-hougaard" => Ok(FamilyKind::Gumbel),
            "clayton" => Ok(FamilyKind::Clayton),
            "frank" => Ok(FamilyKind::Frank),
            "gaussian" | "normal" => Ok(FamilyKind::Gaussian),
            "t4" | "student_t4" | "student" => Ok(FamilyKind::StudentT4),
            other => Err(Error::InvalidParameter(format!(
                "unknown copula family `{other}`"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Positive stable variate with Laplace transform `exp(-t^alpha)`,
/// `0 < alpha < 1`, via the trigonometric transform method.
fn sample_positive_stable(alpha: f64, rng: &mut ChaCha12Rng) -> f64 {
    let u = rng.random::<f64>().clamp(1e-12, 1.0 - 1e-12) * std::f64::consts::PI;
    let w: f64 = Exp1.sample(rng);
    let w = w.max(1e-300);
    let s1 = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let s2 = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    s1 * s2
}

fn uniform_open(rng: &mut ChaCha12Rng) -> f64 {
    rng.random::<f64>().clamp(1e-15, 1.0 - 1e-15)
}

/// Draws `n` i.i.d. pairs with the family's copula and uniform margins.
/// Deterministic given the seed.
pub fn sample(family: &CopulaFamily, n: usize, seed: u64) -> Result<DataMatrix> {
    family.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(2 * n);
    match family {
        CopulaFamily::Independence => {
            for _ in 0..n {
                values.push(uniform_open(&mut rng));
                values.push(uniform_open(&mut rng));
            }
        }
        CopulaFamily::Gumbel { theta } => {
            if *theta == 1.0 {
                return sample(&CopulaFamily::Independence, n, seed);
            }
            // Archimedean frailty: S positive stable, U_j = psi(E_j / S)
            // with psi(t) = exp(-t^(1/theta)).
            let alpha = 1.0 / theta;
            for _ in 0..n {
                let s = sample_positive_stable(alpha, &mut rng);
                for _ in 0..2 {
                    let e: f64 = Exp1.sample(&mut rng);
                    let u = (-(e / s).powf(alpha)).exp();
                    values.push(u.clamp(1e-15, 1.0 - 1e-15));
                }
            }
        }
        CopulaFamily::Clayton { theta } => {
            // gamma frailty: psi(t) = (1 + t)^(-1/theta)
            let gamma = Gamma::new(1.0 / theta, 1.0)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            for _ in 0..n {
                let s: f64 = gamma.sample(&mut rng).max(1e-300);
                for _ in 0..2 {
                    let e: f64 = Exp1.sample(&mut rng);
                    let u = (1.0 + e / s).powf(-1.0 / theta);
                    values.push(u.clamp(1e-15, 1.0 - 1e-15));
                }
            }
        }
        CopulaFamily::Frank { theta } => {
            // closed-form conditional inversion
            let g = |x: f64| (-theta * x).exp_m1();
            let g1 = g(1.0);
            for _ in 0..n {
                let u = uniform_open(&mut rng);
                let p = uniform_open(&mut rng);
                let gv = p * g1 / ((-theta * u).exp() - p * g(u));
                let v = -(1.0 / theta) * gv.ln_1p();
                values.push(u);
                values.push(v.clamp(1e-15, 1.0 - 1e-15));
            }
        }
        CopulaFamily::Gaussian { rho } => {
            let normal = Normal::new(0.0, 1.0).unwrap();
            let s = (1.0 - rho * rho).sqrt();
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let e: f64 = StandardNormal.sample(&mut rng);
                let z2 = rho * z1 + s * e;
                values.push(normal.cdf(z1).clamp(1e-15, 1.0 - 1e-15));
                values.push(normal.cdf(z2).clamp(1e-15, 1.0 - 1e-15));
            }
        }
        CopulaFamily::StudentT4 { rho } => {
            let t4 = StudentsT::new(0.0, 1.0, 4.0).unwrap();
            let chi2 = ChiSquared::new(4.0).unwrap();
            let s = (1.0 - rho * rho).sqrt();
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let e: f64 = StandardNormal.sample(&mut rng);
                let z2 = rho * z1 + s * e;
                let w: f64 = chi2.sample(&mut rng);
                let scale = (4.0 / w.max(1e-300)).sqrt();
                values.push(t4.cdf(z1 * scale).clamp(1e-15, 1.0 - 1e-15));
                values.push(t4.cdf(z2 * scale).clamp(1e-15, 1.0 - 1e-15));
            }
        }
        CopulaFamily::EvFromA { a } => {
            for _ in 0..n {
                let u = uniform_open(&mut rng);
                let p = uniform_open(&mut rng);
                let v = invert_ev_conditional(a, u, p);
                values.push(u);
                values.push(v);
            }
        }
    }
    DataMatrix::new(values, 2, vec!["u1".into(), "u2".into()])
}

/// Conditional c.d.f. `v -> dC(u, v)/du` of an extreme-value copula with
/// Pickands function `a`:
/// `C(u,v)/u * [A(z) - z A'(z)]` with `z = log(v) / log(uv)`.
pub fn ev_conditional_cdf(a: &PickandsEstimate, u: f64, v: f64) -> f64 {
    if v >= 1.0 {
        return 1.0;
    }
    if v <= 0.0 {
        return 0.0;
    }
    let log_uv = u.ln() + v.ln();
    let z = v.ln() / log_uv;
    let c = (log_uv * a.a(z)).exp();
    (c / u) * (a.a(z) - z * a.a_deriv(z))
}

/// Solves `dC(u, v)/du = p` for `v` by bisection to 1e-10.
fn invert_ev_conditional(a: &PickandsEstimate, u: f64, p: f64) -> f64 {
    let mut lo = 1e-15;
    let mut hi = 1.0 - 1e-15;
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if ev_conditional_cdf(a, u, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// ---------------------------------------------------------------------------
// Tau <-> parameter maps
// ---------------------------------------------------------------------------

/// First Debye function `D_1(x) = (1/x) * integral_0^x t/(e^t - 1) dt`.
fn debye1(x: f64) -> f64 {
    let f = |t: f64| {
        if t.abs() < 1e-12 {
            1.0
        } else {
            t / t.exp_m1()
        }
    };
    adaptive_simpson(&f, 0.0, x, 1e-12) / x
}

/// Kendall's tau of the Frank copula as a function of theta.
fn frank_tau(theta: f64) -> f64 {
    1.0 - 4.0 / theta + 4.0 * debye1(theta) / theta
}

/// Maps a target Kendall's tau in (0, 1) to the family parameter.
pub fn param_from_tau(kind: FamilyKind, tau: f64) -> Result<f64> {
    if kind == FamilyKind::Independence {
        if tau == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::InvalidParameter(
            "independence has tau = 0 only".into(),
        ));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (0, 1) for {}, got {tau}",
            kind.name()
        )));
    }
    match kind {
        FamilyKind::Independence => unreachable!(),
        FamilyKind::Gumbel => Ok(1.0 / (1.0 - tau)),
        FamilyKind::Clayton => Ok(2.0 * tau / (1.0 - tau)),
        FamilyKind::Gaussian | FamilyKind::StudentT4 => {
            Ok((std::f64::consts::PI * tau / 2.0).sin())
        }
        FamilyKind::Frank => {
            let mut lo = 1e-8;
            let mut hi = 500.0;
            if frank_tau(hi) < tau {
                return Err(Error::InvalidParameter(format!(
                    "tau {tau} not attainable by frank in the supported range"
                )));
            }
            while hi - lo > 1e-10 {
                let mid = 0.5 * (lo + hi);
                if frank_tau(mid) < tau {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Builds the concrete family with the parameter matching `tau`.
pub fn family_from_tau(kind: FamilyKind, tau: f64) -> Result<CopulaFamily> {
    let p = param_from_tau(kind, tau)?;
    Ok(match kind {
        FamilyKind::Independence => CopulaFamily::Independence,
        FamilyKind::Gumbel => CopulaFamily::Gumbel { theta: p },
        FamilyKind::Clayton => CopulaFamily::Clayton { theta: p },
        FamilyKind::Frank => CopulaFamily::Frank { theta: p },
        FamilyKind::Gaussian => CopulaFamily::Gaussian { rho: p },
        FamilyKind::StudentT4 => CopulaFamily::StudentT4 { rho: p },
    })
}

// ---------------------------------------------------------------------------
// Inversion-of-tau fit
// ---------------------------------------------------------------------------

/// Gumbel–Hougaard fit by inversion of Kendall's tau.
#[derive(Debug, Clone, Copy)]
pub struct GumbelItauFit {
    pub theta_hat: f64,
    /// Delta-method standard error from the jackknife variance of tau.
    pub std_err: f64,
    pub tau: f64,
}

/// Fits the Gumbel–Hougaard parameter as `theta = 1/(1 - tau_n)`, with a
/// delta-method standard error `se(tau_n) / (1 - tau_n)^2` built on the
/// jackknife variance of the sample tau.
pub fn fit_gumbel_itau(data: &DataMatrix) -> Result<GumbelItauFit> {
    data.require_cols(2)?;
    let pobs = pseudo_observations(data, TiesPolicy::Average)?;
    let (tau, se_tau) = crate::ranks::kendall_tau_jackknife(&pobs)?;
    let t = tau.value();
    if t <= 0.0 {
        return Err(Error::InvalidDomain(format!(
            "inversion of tau needs tau in (0, 1), got {t}"
        )));
    }
    if t >= 1.0 {
        return Err(Error::InvalidDomain(
            "tau = 1 (monotone data): theta is unbounded".into(),
        ));
    }
    let denom = (1.0 - t) * (1.0 - t);
    Ok(GumbelItauFit {
        theta_hat: 1.0 / (1.0 - t),
        std_err: se_tau / denom,
        tau: t,
    })
}

// ---------------------------------------------------------------------------
// Analytic copula evaluation
// ---------------------------------------------------------------------------

/// Evaluates the family's copula at `u` by closed form, or by adaptive
/// quadrature (tolerance 1e-8) for the elliptical families. Intended for
/// validation, not hot loops.
pub fn analytic_copula(family: &CopulaFamily, u: [f64; 2]) -> Result<f64> {
    family.validate()?;
    let [u1, u2] = u;
    if !(0.0..=1.0).contains(&u1) || !(0.0..=1.0).contains(&u2) {
        return Err(Error::InvalidDomain(format!(
            "point ({u1}, {u2}) outside the unit square"
        )));
    }
    if u1 == 0.0 || u2 == 0.0 {
        return Ok(0.0);
    }
    if u1 == 1.0 {
        return Ok(u2);
    }
    if u2 == 1.0 {
        return Ok(u1);
    }
    let value = match family {
        CopulaFamily::Independence => u1 * u2,
        CopulaFamily::Gumbel { theta } => {
            let s = ((-u1.ln()).powf(*theta) + (-u2.ln()).powf(*theta)).powf(1.0 / theta);
            (-s).exp()
        }
        CopulaFamily::Clayton { theta } => {
            (u1.powf(-theta) + u2.powf(-theta) - 1.0).powf(-1.0 / theta)
        }
        CopulaFamily::Frank { theta } => {
            let g = |x: f64| (-theta * x).exp_m1();
            -(1.0 / theta) * (g(u1) * g(u2) / g(1.0)).ln_1p()
        }
        CopulaFamily::Gaussian { rho } => {
            let normal = Normal::new(0.0, 1.0).unwrap();
            let y = normal.inverse_cdf(u2);
            let s = (1.0 - rho * rho).sqrt();
            let f = |w: f64| {
                let wc = w.clamp(1e-15, 1.0 - 1e-15);
                normal.cdf((y - rho * normal.inverse_cdf(wc)) / s)
            };
            adaptive_simpson(&f, 0.0, u1, 1e-9)
        }
        CopulaFamily::StudentT4 { rho } => {
            let nu = 4.0;
            let t_nu = StudentsT::new(0.0, 1.0, nu).unwrap();
            let t_nu1 = StudentsT::new(0.0, 1.0, nu + 1.0).unwrap();
            let y = t_nu.inverse_cdf(u2);
            let s = (1.0 - rho * rho).sqrt();
            let f = |w: f64| {
                let wc = w.clamp(1e-15, 1.0 - 1e-15);
                let q = t_nu.inverse_cdf(wc);
                let scale = ((nu + 1.0) / (nu + q * q)).sqrt();
                t_nu1.cdf(scale * (y - rho * q) / s)
            };
            adaptive_simpson(&f, 0.0, u1, 1e-9)
        }
        CopulaFamily::EvFromA { a } => ev_copula_from_a(a, [u1, u2])?,
    };
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{ks_statistic_uniform, mix_seed};
    use crate::ranks::kendall_tau_fast;

    fn empirical_tau(family: &CopulaFamily, n: usize, seed: u64) -> f64 {
        let data = sample(family, n, seed).unwrap();
        let pobs = pseudo_observations(&data, TiesPolicy::Average).unwrap();
        kendall_tau_fast(&pobs).unwrap().value()
    }

    #[test]
    fn independence_tau_near_zero() {
        let tau = empirical_tau(&CopulaFamily::Independence, 100_000, 1);
        assert!(tau.abs() < 0.01, "tau = {tau}");
    }

    #[test]
    fn gumbel_tau_matches_inversion() {
        let tau = empirical_tau(&CopulaFamily::Gumbel { theta: 2.0 }, 100_000, 2);
        assert!((tau - 0.5).abs() < 0.01, "tau = {tau}");
    }

    #[test]
    fn frank_theta_for_tau_half() {
        let theta = param_from_tau(FamilyKind::Frank, 0.5).unwrap();
        assert!((theta - 5.7363).abs() < 5e-4, "theta = {theta}");
        let tau = empirical_tau(&CopulaFamily::Frank { theta }, 100_000, 3);
        assert!((tau - 0.5).abs() < 0.01, "tau = {tau}");
    }

    #[test]
    fn tau_round_trips_for_all_families() {
        for kind in [
            FamilyKind::Gumbel,
            FamilyKind::Clayton,
            FamilyKind::Frank,
            FamilyKind::Gaussian,
            FamilyKind::StudentT4,
        ] {
            for &tau in &[0.25, 0.5, 0.75] {
                let family = family_from_tau(kind, tau).unwrap();
                let seed = mix_seed(&[kind.id(), tau.to_bits(), 17]);
                let emp = empirical_tau(&family, 100_000, seed);
                assert!(
                    (emp - tau).abs() < 0.01,
                    "{} tau {tau}: empirical {emp}",
                    kind.name()
                );
            }
        }
    }

    #[test]
    fn margins_are_uniform() {
        let families = [
            CopulaFamily::Independence,
            CopulaFamily::Gumbel { theta: 2.0 },
            CopulaFamily::Clayton { theta: 2.0 },
            CopulaFamily::Frank { theta: 5.7363 },
            CopulaFamily::Gaussian { rho: 0.7 },
            CopulaFamily::StudentT4 { rho: 0.7 },
        ];
        let n = 100_000;
        let crit = 1.63 / (n as f64).sqrt();
        for (k, family) in families.iter().enumerate() {
            let data = sample(family, n, 100 + k as u64).unwrap();
            for j in 0..2 {
                let d = ks_statistic_uniform(&data.column(j));
                assert!(d < crit, "{} margin {j}: KS {d}", family.name());
            }
        }
    }

    #[test]
    fn parameter_maps_match_closed_forms() {
        assert_eq!(param_from_tau(FamilyKind::Gumbel, 0.5).unwrap(), 2.0);
        let rho = param_from_tau(FamilyKind::Gaussian, 0.5).unwrap();
        assert!((rho - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(param_from_tau(FamilyKind::Clayton, 0.0).is_err());
        assert!(param_from_tau(FamilyKind::Gumbel, 1.0).is_err());
        assert_eq!(param_from_tau(FamilyKind::Independence, 0.0).unwrap(), 0.0);
        assert!(param_from_tau(FamilyKind::Independence, 0.3).is_err());
    }

    #[test]
    fn analytic_copula_closed_form_values() {
        let gumbel = CopulaFamily::Gumbel { theta: 2.0 };
        let got = analytic_copula(&gumbel, [0.5, 0.5]).unwrap();
        let expected = (-(2.0f64.sqrt()) * 2.0f64.ln()).exp();
        assert!((got - expected).abs() < 1e-14);
        assert!((got - 0.3752).abs() < 1e-3);

        let clayton = CopulaFamily::Clayton { theta: 2.0 };
        let got = analytic_copula(&clayton, [0.5, 0.5]).unwrap();
        assert!((got - 7.0f64.powf(-0.5)).abs() < 1e-14);
        assert!((got - 0.37796).abs() < 1e-4);

        let indep = CopulaFamily::Independence;
        assert!((analytic_copula(&indep, [0.3, 0.7]).unwrap() - 0.21).abs() < 1e-15);

        // boundaries
        assert_eq!(analytic_copula(&gumbel, [0.0, 0.4]).unwrap(), 0.0);
        assert_eq!(analytic_copula(&gumbel, [1.0, 0.4]).unwrap(), 0.4);
        assert!(analytic_copula(&gumbel, [1.2, 0.4]).is_err());
    }

    #[test]
    fn elliptical_copulas_match_arcsine_identity() {
        // C(1/2, 1/2) = 1/4 + arcsin(rho) / (2 pi) for both elliptical families
        for &rho in &[-0.5f64, 0.0, 0.3, 0.7] {
            let expected = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
            let g = analytic_copula(&CopulaFamily::Gaussian { rho }, [0.5, 0.5]).unwrap();
            assert!((g - expected).abs() < 1e-7, "gaussian rho={rho}: {g}");
            let t = analytic_copula(&CopulaFamily::StudentT4 { rho }, [0.5, 0.5]).unwrap();
            assert!((t - expected).abs() < 1e-7, "t4 rho={rho}: {t}");
        }
    }

    #[test]
    fn gumbel_is_max_stable_clayton_is_not() {
        let gumbel = CopulaFamily::Gumbel { theta: 2.0 };
        let clayton = CopulaFamily::Clayton { theta: 2.0 };
        let mut clayton_gap = 0.0f64;
        for i in 1..=9 {
            for j in 1..=9 {
                let u = [i as f64 / 10.0, j as f64 / 10.0];
                for &r in &[2.0, 3.0, 5.0] {
                    let lhs = analytic_copula(&gumbel, [u[0].powf(1.0 / r), u[1].powf(1.0 / r)])
                        .unwrap()
                        .powf(r);
                    let rhs = analytic_copula(&gumbel, u).unwrap();
                    assert!((lhs - rhs).abs() < 1e-12, "gumbel gap at {u:?} r={r}");
                    let lhs_c = analytic_copula(
                        &clayton,
                        [u[0].powf(1.0 / r), u[1].powf(1.0 / r)],
                    )
                    .unwrap()
                    .powf(r);
                    let rhs_c = analytic_copula(&clayton, u).unwrap();
                    clayton_gap = clayton_gap.max((lhs_c - rhs_c).abs());
                }
            }
        }
        assert!(clayton_gap > 0.01, "clayton max gap {clayton_gap}");
    }

    #[test]
    fn gumbel_itau_fit_examples() {
        // tau exactly 1/2 -> theta exactly 2
        let pairs: Vec<(f64, f64)> = vec![
            (1.0, 1.0),
            (2.0, 3.0),
            (3.0, 2.0),
            (4.0, 4.0),
        ];
        // tau of this configuration: C(4,2)=6 pairs, one discordant -> 4/6
        let data = DataMatrix::from_pairs(&pairs).unwrap();
        let fit = fit_gumbel_itau(&data).unwrap();
        assert!((fit.tau - 2.0 / 3.0).abs() < 1e-12);
        assert!((fit.theta_hat - 3.0).abs() < 1e-12);

        let counter = DataMatrix::from_pairs(&[
            (1.0, 4.0),
            (2.0, 3.0),
            (3.0, 2.0),
            (4.0, 1.0),
        ])
        .unwrap();
        assert!(fit_gumbel_itau(&counter).is_err()); // tau = -1

        let como =
            DataMatrix::from_pairs(&[(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)]).unwrap();
        assert!(fit_gumbel_itau(&como).is_err()); // tau = 1
    }

    #[test]
    fn gumbel_itau_recovers_parameter_from_samples() {
        let data = sample(&CopulaFamily::Gumbel { theta: 2.0 }, 3000, 7).unwrap();
        let fit = fit_gumbel_itau(&data).unwrap();
        assert!((fit.theta_hat - 2.0).abs() < 0.15, "theta {}", fit.theta_hat);
        assert!(fit.std_err > 0.0 && fit.std_err < 0.2);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(sample(&CopulaFamily::Gumbel { theta: 0.5 }, 10, 0).is_err());
        assert!(sample(&CopulaFamily::Clayton { theta: -1.0 }, 10, 0).is_err());
        assert!(sample(&CopulaFamily::Frank { theta: 0.0 }, 10, 0).is_err());
        assert!(sample(&CopulaFamily::Gaussian { rho: 1.0 }, 10, 0).is_err());
    }
}

//! Checks on the location and value of the minimum and on slope counts.

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::report::{Component, TestReport};
use super::replicate;
use crate::bridge::brownian_minimum;
use crate::error::{Error, Result};
use crate::minorant::{argmin, convex_minorant};
use crate::models::{normal_cdf, LevyModel, Params};
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::stats::{ks_one_sample, ks_two_sample, mean_var};
use crate::sticks::{intensity_mass, slope_band_mass, Region, Weight};

fn brownian_params(model: &LevyModel) -> Result<(f64, f64)> {
    match model.params() {
        Params::BrownianDrift { sigma, drift } => Ok((sigma, drift)),
        _ => Err(Error::Unsupported(format!("{model}: needs Brownian motion with drift"))),
    }
}

/// Right-hand side of the double Laplace identity for the minimum of
/// `X_t − a·t` up to an `Exp(θ)` time, for Brownian motion with drift:
/// `exp(−∫_0^∞ ∫_{x≤0} (1 − e^{−αt+βx}) e^{−θt}/t P(X_t − at ∈ dx) dt)`.
pub fn pecherskii_rogozin_rhs(model: &LevyModel, theta: f64, alpha: f64, beta: f64, a: f64) -> Result<f64> {
    let (sigma, drift) = brownian_params(model)?;
    if !(theta > 0.0 && theta.is_finite() && alpha >= 0.0 && alpha.is_finite() && beta >= 0.0 && beta.is_finite() && a.is_finite()) {
        return Err(Error::Domain(format!("need θ > 0, α >= 0, β >= 0, finite a; got θ={theta}, α={alpha}, β={beta}, a={a}")));
    }
    let mu = drift - a;
    let s2 = sigma * sigma;
    let rate = -alpha + beta * mu + 0.5 * beta * beta * s2;
    // ∫_{x≤0} (1 − e^{−αt+βx}) P(Y_t ∈ dx) for Y_t ~ N(μt, σ²t).
    let inner = |t: f64| {
        let rt = t.sqrt();
        let first = normal_cdf(-mu * rt / sigma);
        let tail = 0.5 * libm::erfc((mu + beta * s2) * rt / sigma / std::f64::consts::SQRT_2);
        let second = if tail > 0.0 { (rate * t + tail.ln()).exp() } else { 0.0 };
        first - second
    };
    // t = s² removes the t^{-1/2} behaviour at the origin.
    let integral = integrate_to_infinity(
        |s: f64| {
            if s == 0.0 {
                return 0.0;
            }
            let t = s * s;
            2.0 * inner(t) * (-theta * t).exp() / s
        },
        0.0,
        1e-10,
        1e-14,
    )?;
    Ok((-integral).exp())
}

/// Monte Carlo side of the double Laplace identity, with exact bridge minima between grid points.
#[allow(clippy::too_many_arguments)]
pub fn pecherskii_rogozin_check(
    model: &LevyModel,
    theta: f64,
    alpha: f64,
    beta: f64,
    a: f64,
    n_grid: usize,
    reps: u64,
    seed: u64,
) -> Result<TestReport> {
    let (sigma, drift) = brownian_params(model)?;
    let rhs = pecherskii_rogozin_rhs(model, theta, alpha, beta, a)?;
    let exp = Exp::new(theta).map_err(|e| Error::Domain(e.to_string()))?;
    let values = replicate(seed, reps, |rng| {
        let t = loop {
            let t: f64 = exp.sample(rng);
            if t > 0.0 {
                break t;
            }
        };
        let rec = brownian_minimum(sigma, drift - a, t, n_grid, rng)?;
        Ok((-alpha * rec.rho + beta * rec.m).exp())
    })?;
    let (mean, var) = mean_var(&values);
    let component = if alpha == 0.0 && beta == 0.0 {
        Component::holds("both sides equal 1", u64::from(mean != 1.0) + u64::from(rhs != 1.0))
    } else {
        Component::rel_err(format!("Monte Carlo {mean:.6} vs quadrature {rhs:.6}"), mean, rhs, 0.02)
    };
    Ok(TestReport::new(
        format!("pecherskii_rogozin/{}/theta={theta},alpha={alpha},beta={beta},a={a}", model.family_name()),
        vec![component],
        reps,
        n_grid as u64,
        seed,
    )
    .with_note(format!("standard error {:.2e}", (var / reps as f64).sqrt())))
}

/// `∫_{t_min}^1 P(X_t ≤ 0) dt/t`, with a flag for integrands that do not vanish at 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RogozinIntegral {
    pub value: f64,
    /// The full integral from 0 diverges.
    pub divergent: bool,
}

pub fn rogozin_integral(model: &LevyModel, t_min: f64) -> Result<RogozinIntegral> {
    if !(t_min > 0.0 && t_min < 1.0) {
        return Err(Error::Domain(format!("t_min must lie in (0, 1), got {t_min}")));
    }
    let value = integrate(
        |s: f64| model.marginal_cdf(s.exp(), 0.0).unwrap_or(f64::NAN),
        t_min.ln(),
        0.0,
        1e-10,
        1e-15,
    )?;
    // A positive limit of P(X_t ≤ 0) at 0 makes the integral grow like log(1/t_min).
    let divergent = model.marginal_cdf(1e-12, 0.0)? > 1e-9;
    Ok(RogozinIntegral { value, divergent })
}

/// Rogozin's integral on the catalog families: divergent for Cauchy and
/// Brownian motion, identically zero for the Gamma subordinator.
pub fn rogozin_integral_check() -> Result<TestReport> {
    let t_min = 1e-6;
    let cauchy = rogozin_integral(&LevyModel::cauchy(1.0)?, t_min)?;
    let gamma = rogozin_integral(&LevyModel::gamma(), t_min)?;
    let drifts = [2.0, 1.0, 0.5];
    let bm: Vec<RogozinIntegral> = drifts
        .iter()
        .map(|&b| rogozin_integral(&LevyModel::brownian(1.0, b)?, t_min))
        .collect::<Result<_>>()?;
    // Cauchy has P(X_t ≤ 0) = 1/2 exactly.
    let cauchy_exact = 0.5 * (1.0 / t_min).ln();
    Ok(TestReport::new(
        "rogozin_integral",
        vec![
            Component::holds("Cauchy flagged divergent", u64::from(!cauchy.divergent)),
            Component::rel_err("Cauchy truncated value vs log(1/t_min)/2", cauchy.value, cauchy_exact, 1e-8),
            Component::holds("Gamma integral is 0 and finite", u64::from(gamma.value != 0.0 || gamma.divergent)),
            Component::holds(
                "Brownian truncated value grows as drift shrinks",
                u64::from(!(bm[0].value < bm[1].value && bm[1].value < bm[2].value)),
            ),
            Component::holds("Brownian flagged divergent", bm.iter().filter(|r| !r.divergent).count() as u64),
        ],
        0,
        0,
        0,
    )
    .with_note(format!("t_min={t_min}")))
}

fn arcsine_cdf(u: f64) -> f64 {
    2.0 / std::f64::consts::PI * u.clamp(0.0, 1.0).sqrt().asin()
}

/// Location of the minimum on `[0, 1]`: exact for Brownian motion, the last grid minimum otherwise.
fn argmin_time(model: &LevyModel, n_grid: usize, rng: &mut crate::rng::RngStream) -> Result<f64> {
    match model.params() {
        Params::BrownianDrift { sigma, drift } => Ok(brownian_minimum(sigma, drift, 1.0, n_grid, rng)?.rho),
        _ => Ok(argmin(&model.path_sample(1.0, n_grid, rng)?).0),
    }
}

/// Every one of 20 equal bins of `[0, 1]` receives some `ρ_1`; for driftless
/// Brownian motion `ρ_1` also follows the arcsine law.
pub fn argmin_support_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let rho = replicate(seed, reps, |rng| argmin_time(model, n_grid, rng))?;
    let mut bins = [0u64; 20];
    for &r in &rho {
        bins[((r * 20.0) as usize).min(19)] += 1;
    }
    let mut components = vec![Component::holds("empty bins out of 20", bins.iter().filter(|&&b| b == 0).count() as u64)];
    let driftless = matches!(model.params(), Params::BrownianDrift { drift, .. } if drift == 0.0);
    if driftless {
        let ks = ks_one_sample(&rho, arcsine_cdf)?;
        components.push(Component::p("KS argmin vs arcsine", ks.statistic, ks.p_value));
    }
    let note = if model.family_name() == "brownian" { "exact bridge refinement" } else { "last grid minimum" };
    Ok(TestReport::new(
        format!("argmin_support/{}/n_grid={n_grid}", model.family_name()),
        components,
        reps,
        n_grid as u64,
        seed,
    )
    .with_note(note))
}

/// Refined argmin of driftless Brownian motion at two grid sizes agree with each other and the arcsine law.
pub fn argmin_cross_grid_check(coarse: usize, fine: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let model = LevyModel::brownian(1.0, 0.0)?;
    let pairs = replicate(seed, reps, |rng| Ok((argmin_time(&model, coarse, rng)?, argmin_time(&model, fine, rng)?)))?;
    let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let ks = ks_two_sample(&a, &b)?;
    let kf = ks_one_sample(&b, arcsine_cdf)?;
    Ok(TestReport::new(
        format!("argmin_support/brownian/cross_grid={coarse},{fine}"),
        vec![
            Component::p(format!("KS argmin n_grid={coarse} vs {fine}"), ks.statistic, ks.p_value),
            Component::p(format!("KS argmin n_grid={fine} vs arcsine"), kf.statistic, kf.p_value),
        ],
        reps,
        fine as u64,
        seed,
    ))
}

/// Mean number of faces with slope in `(a, b)` for stable paths on `[0, 1]`,
/// against `∫_0^1 P(a < X_t/t < b) dt/t`.
pub fn stable_slope_count_check(alpha: f64, a: f64, b: f64, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    if alpha != 2.0 {
        return Err(Error::Unsupported(format!("slope counts need a closed-form CDF; only α = 2 is supported, got {alpha}")));
    }
    let model = LevyModel::stable(alpha, 0.0, 1.0)?;
    let expected = slope_band_mass(&model, 1.0, a, b)?;
    let counts = replicate(seed, reps, |rng| {
        let dec = convex_minorant(&model.path_sample(1.0, n_grid, rng)?);
        Ok(dec.faces().iter().filter(|f| f.slope > a && f.slope < b).count() as f64)
    })?;
    let (mean, var) = mean_var(&counts);
    let component = if expected == 0.0 {
        Component::holds("faces counted in an empty slope band", counts.iter().filter(|&&c| c > 0.0).count() as u64)
    } else {
        let z = if var > 0.0 { (mean - expected) / (var / reps as f64).sqrt() } else { f64::INFINITY };
        Component::z(format!("mean count vs quadrature {expected:.6}"), mean, z)
    };
    Ok(TestReport::new(
        format!("stable_slope_count/alpha={alpha}/slopes=({a},{b})"),
        vec![component],
        reps,
        n_grid as u64,
        seed,
    ))
}

/// Horizon past which faces of slope below `slope_cap` carry less than
/// `fraction` of the intensity mass of lengths in `[t1, t2]`.
pub fn long_horizon(model: &LevyModel, slope_cap: f64, t1: f64, t2: f64, fraction: f64) -> Result<f64> {
    let weight = Weight::Indicator { slope: slope_cap };
    let inside = intensity_mass(model, &Region { t1, t2, x1: f64::NEG_INFINITY, x2: f64::INFINITY }, weight)?;
    let mut horizon = (2.0 * t2).max(1.0);
    for _ in 0..40 {
        let tail = intensity_mass(
            model,
            &Region { t1: horizon, t2: f64::INFINITY, x1: f64::NEG_INFINITY, x2: f64::INFINITY },
            weight,
        )?;
        if tail < fraction * inside {
            return Ok(horizon);
        }
        horizon *= 2.0;
    }
    Err(Error::Domain(format!("no horizon found with tail mass below {fraction} of the region")))
}

/// Faces of slope below `slope_cap` with length in `[t1, t2]` from long-horizon
/// minorants, counted against the infinite-horizon intensity.
#[allow(clippy::too_many_arguments)]
pub fn infinite_horizon_check(
    model: &LevyModel,
    slope_cap: f64,
    t1: f64,
    t2: f64,
    n_grid: usize,
    reps: u64,
    seed: u64,
) -> Result<TestReport> {
    let horizon = long_horizon(model, slope_cap, t1, t2, 0.01)?;
    let region = Region { t1, t2, x1: f64::NEG_INFINITY, x2: f64::INFINITY };
    let expected = intensity_mass(model, &region, Weight::Indicator { slope: slope_cap })?;
    let counts = replicate(seed, reps, |rng| {
        let pts = crate::sticks::infinite_horizon_points(model, slope_cap, horizon, n_grid, rng)?;
        Ok(pts.iter().filter(|p| region.contains(p)).count() as f64)
    })?;
    let (mean, var) = mean_var(&counts);
    let z = if var > 0.0 { (mean - expected) / (var / reps as f64).sqrt() } else { f64::INFINITY };
    Ok(TestReport::new(
        format!("infinite_horizon/{}/slope<{slope_cap}", model.family_name()),
        vec![
            Component::z(format!("mean count of lengths in [{t1},{t2}] vs intensity {expected:.6}"), mean, z),
            Component::within("variance/mean", var / mean, 0.9, 1.1),
        ],
        reps,
        n_grid as u64,
        seed,
    )
    .with_note(format!("horizon {horizon}")))
}

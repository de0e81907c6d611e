//! Catalog of Lévy process families.
//!
//! Every family has continuous marginals for `t > 0`, so none of them is a
//! compound Poisson process with drift.

use std::f64::consts::{FRAC_1_PI, PI, SQRT_2};
use std::fmt;

use rand_distr::{Distribution, Exp1, Gamma, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use libm::erfc;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::path::GridPath;
use crate::rng::RngStream;

/// Family-specific parameters of a validated [`LevyModel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Params {
    /// `σ·B_t + b·t`.
    BrownianDrift { sigma: f64, drift: f64 },
    /// Symmetric Cauchy with `E e^{iuX_t} = e^{-t c |u|}`.
    Cauchy { scale: f64 },
    /// Strictly stable, `S_α(c, β, 0)` at `t = 1`.
    Stable { alpha: f64, beta: f64, scale: f64 },
    /// Gamma subordinator with `E e^{-qT_t} = (1+q)^{-t}`.
    GammaSub,
}

/// Serialized form of a model, e.g. `{"family":"brownian","sigma":1.0,"drift":0.0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Brownian {
        sigma: f64,
        #[serde(default)]
        drift: f64,
    },
    Cauchy {
        #[serde(default = "unit")]
        scale: f64,
    },
    Stable {
        alpha: f64,
        #[serde(default)]
        beta: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    Gamma,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpec", into = "ModelSpec")]
pub struct LevyModel {
    params: Params,
}

impl LevyModel {
    pub fn brownian(sigma: f64, drift: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidModel(format!("brownian: sigma must be positive, got {sigma}")));
        }
        if !drift.is_finite() {
            return Err(Error::InvalidModel(format!("brownian: drift must be finite, got {drift}")));
        }
        Ok(Self { params: Params::BrownianDrift { sigma, drift } })
    }

    pub fn cauchy(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModel(format!("cauchy: scale must be positive, got {scale}")));
        }
        Ok(Self { params: Params::Cauchy { scale } })
    }

    pub fn stable(alpha: f64, beta: f64, scale: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidModel(format!("stable: alpha must lie in (0, 2], got {alpha}")));
        }
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidModel(format!("stable: beta must lie in [-1, 1], got {beta}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModel(format!("stable: scale must be positive, got {scale}")));
        }
        if alpha == 1.0 && beta != 0.0 {
            return Err(Error::InvalidModel("stable: alpha = 1 requires beta = 0 (symmetric Cauchy)".into()));
        }
        Ok(Self { params: Params::Stable { alpha, beta, scale } })
    }

    pub fn gamma() -> Self {
        Self { params: Params::GammaSub }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn family_name(&self) -> &'static str {
        match self.params {
            Params::BrownianDrift { .. } => "brownian",
            Params::Cauchy { .. } => "cauchy",
            Params::Stable { .. } => "stable",
            Params::GammaSub => "gamma",
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    /// `lim X_t / t` when it exists almost surely (possibly `+∞`).
    pub fn long_run_slope(&self) -> Option<f64> {
        match self.params {
            Params::BrownianDrift { drift, .. } => Some(drift),
            Params::Cauchy { .. } => None,
            Params::Stable { alpha, beta, .. } => {
                if alpha > 1.0 {
                    Some(0.0)
                } else if alpha < 1.0 && beta == 1.0 {
                    Some(f64::INFINITY)
                } else if alpha < 1.0 && beta == -1.0 {
                    Some(f64::NEG_INFINITY)
                } else {
                    None
                }
            }
            // E T_1 = 1, so the strong law gives T_t / t -> 1.
            Params::GammaSub => Some(1.0),
        }
    }

    pub fn is_subordinator(&self) -> bool {
        match self.params {
            Params::GammaSub => true,
            Params::Stable { alpha, beta, .. } => alpha < 1.0 && beta == 1.0,
            _ => false,
        }
    }

    /// Prepares a sampler for increments over a fixed time step.
    pub fn sampler(&self, dt: f64) -> Result<IncrementSampler> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be positive and finite, got {dt}")));
        }
        let kind = match self.params {
            Params::BrownianDrift { sigma, drift } => SamplerKind::Normal { mean: drift * dt, sd: sigma * dt.sqrt() },
            Params::Cauchy { scale } => SamplerKind::Cauchy { scale: scale * dt },
            Params::Stable { alpha, beta, scale } => {
                let factor = scale * dt.powf(1.0 / alpha);
                if alpha == 1.0 {
                    SamplerKind::Cauchy { scale: factor }
                } else {
                    let zeta = beta * (PI * alpha / 2.0).tan();
                    SamplerKind::Stable {
                        alpha,
                        shift: zeta.atan() / alpha,
                        norm: (1.0 + zeta * zeta).powf(0.5 / alpha),
                        factor,
                    }
                }
            }
            Params::GammaSub => SamplerKind::Gamma(
                Gamma::new(dt, 1.0).map_err(|e| Error::Domain(format!("gamma shape {dt}: {e}")))?,
            ),
        };
        Ok(IncrementSampler { kind })
    }

    /// One draw of `X_dt`.
    pub fn increment_sample(&self, dt: f64, rng: &mut RngStream) -> Result<f64> {
        let x = self.sampler(dt)?.sample(rng);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite { step: 0, value: x })
        }
    }

    /// Samples `X` on `n_steps` equal steps of `[0, horizon]`, starting at 0.
    pub fn path_sample(&self, horizon: f64, n_steps: usize, rng: &mut RngStream) -> Result<GridPath> {
        if n_steps == 0 {
            return Err(Error::Domain("path needs at least one step".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive and finite, got {horizon}")));
        }
        let dt = horizon / n_steps as f64;
        let sampler = self.sampler(dt)?;
        let mut values = Vec::with_capacity(n_steps + 1);
        let mut acc = 0.0;
        values.push(acc);
        for k in 1..=n_steps {
            let x = sampler.sample(rng);
            acc += x;
            if !acc.is_finite() {
                return Err(Error::NonFinite { step: k, value: acc });
            }
            values.push(acc);
        }
        GridPath::new(0.0, dt, values)
    }

    /// Whether [`LevyModel::marginal_cdf`] is implemented for this model.
    pub fn has_cdf(&self) -> bool {
        match self.params {
            Params::Stable { alpha, beta, .. } => {
                alpha == 2.0 || alpha == 1.0 || (alpha == 0.5 && beta.abs() == 1.0)
            }
            _ => true,
        }
    }

    /// `P(X_t ≤ x)`.
    pub fn marginal_cdf(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be positive and finite, got {t}")));
        }
        if x.is_nan() {
            return Err(Error::Domain("x is NaN".into()));
        }
        if x == f64::INFINITY {
            return Ok(1.0);
        }
        if x == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let p = match self.params {
            Params::BrownianDrift { sigma, drift } => normal_cdf((x - drift * t) / (sigma * t.sqrt())),
            Params::Cauchy { scale } => 0.5 + (x / (scale * t)).atan() * FRAC_1_PI,
            Params::Stable { alpha, beta, scale } => {
                if alpha == 2.0 {
                    normal_cdf(x / (scale * (2.0 * t).sqrt()))
                } else if alpha == 1.0 {
                    0.5 + (x / (scale * t)).atan() * FRAC_1_PI
                } else if alpha == 0.5 && beta.abs() == 1.0 {
                    // One-sided Lévy law with scale c·t²; beta = -1 is its mirror image.
                    let s = scale * t * t;
                    let levy_cdf = |y: f64| if y <= 0.0 { 0.0 } else { erfc((s / (2.0 * y)).sqrt()) };
                    if beta == 1.0 {
                        levy_cdf(x)
                    } else {
                        1.0 - levy_cdf(-x)
                    }
                } else {
                    return Err(Error::UnsupportedCdf {
                        family: self.family_name().into(),
                        detail: format!(" for alpha = {alpha}, beta = {beta} (only 0.5 one-sided, 1, 2)"),
                    });
                }
            }
            Params::GammaSub => {
                if x <= 0.0 {
                    0.0
                } else {
                    gamma_lr(t, x)
                }
            }
        };
        Ok(p.clamp(0.0, 1.0))
    }
}

impl TryFrom<ModelSpec> for LevyModel {
    type Error = Error;

    fn try_from(spec: ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Brownian { sigma, drift } => Self::brownian(sigma, drift),
            ModelSpec::Cauchy { scale } => Self::cauchy(scale),
            ModelSpec::Stable { alpha, beta, scale } => Self::stable(alpha, beta, scale),
            ModelSpec::Gamma => Ok(Self::gamma()),
        }
    }
}

impl From<LevyModel> for ModelSpec {
    fn from(m: LevyModel) -> Self {
        match m.params {
            Params::BrownianDrift { sigma, drift } => ModelSpec::Brownian { sigma, drift },
            Params::Cauchy { scale } => ModelSpec::Cauchy { scale },
            Params::Stable { alpha, beta, scale } => ModelSpec::Stable { alpha, beta, scale },
            Params::GammaSub => ModelSpec::Gamma,
        }
    }
}

impl fmt::Display for LevyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.params {
            Params::BrownianDrift { sigma, drift } => write!(f, "brownian(sigma={sigma}, drift={drift})"),
            Params::Cauchy { scale } => write!(f, "cauchy(scale={scale})"),
            Params::Stable { alpha, beta, scale } => write!(f, "stable(alpha={alpha}, beta={beta}, scale={scale})"),
            Params::GammaSub => write!(f, "gamma"),
        }
    }
}

/// Increment sampler for a fixed model and time step.
#[derive(Clone, Debug)]
pub struct IncrementSampler {
    kind: SamplerKind,
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Normal { mean: f64, sd: f64 },
    Cauchy { scale: f64 },
    Stable { alpha: f64, shift: f64, norm: f64, factor: f64 },
    Gamma(Gamma<f64>),
}

impl IncrementSampler {
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match &self.kind {
            SamplerKind::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            SamplerKind::Cauchy { scale } => {
                let u: f64 = Open01.sample(rng);
                scale * (PI * (u - 0.5)).tan()
            }
            SamplerKind::Stable { alpha, shift, norm, factor } => {
                factor * chambers_mallows_stuck(*alpha, *shift, *norm, rng)
            }
            SamplerKind::Gamma(g) => g.sample(rng),
        }
    }
}

// Chambers–Mallows–Stuck draw of S_α(1, β, 0) for α ≠ 1; `shift` is
// arctan(β tan(πα/2))/α and `norm` is (1 + β² tan²(πα/2))^{1/(2α)}.
fn chambers_mallows_stuck(alpha: f64, shift: f64, norm: f64, rng: &mut RngStream) -> f64 {
    let u: f64 = Open01.sample(rng);
    let v = PI * (u - 0.5);
    let w: f64 = Exp1.sample(rng);
    let a = alpha * (v + shift);
    norm * a.sin() / v.cos().powf(1.0 / alpha) * ((v - a).cos() / w).powf((1.0 - alpha) / alpha)
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(LevyModel::brownian(0.0, 0.0).is_err());
        assert!(LevyModel::brownian(-1.0, 0.0).is_err());
        assert!(LevyModel::cauchy(0.0).is_err());
        assert!(LevyModel::stable(0.0, 0.0, 1.0).is_err());
        assert!(LevyModel::stable(2.5, 0.0, 1.0).is_err());
        assert!(LevyModel::stable(1.5, 1.5, 1.0).is_err());
        assert!(LevyModel::stable(1.0, 0.5, 1.0).is_err());
        assert!(LevyModel::stable(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = LevyModel::from_json(r#"{"family":"brownian","sigma":1.0,"drift":0.5}"#).unwrap();
        assert_eq!(m.params(), Params::BrownianDrift { sigma: 1.0, drift: 0.5 });
        assert_eq!(LevyModel::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(LevyModel::from_json(r#"{"family":"gamma"}"#).unwrap(), LevyModel::gamma());
        assert_eq!(
            LevyModel::from_json(r#"{"family":"cauchy"}"#).unwrap().params(),
            Params::Cauchy { scale: 1.0 }
        );
        assert!(LevyModel::from_json(r#"{"family":"brownian","sigma":-1.0}"#).is_err());
        assert!(LevyModel::from_json(r#"{"family":"poisson"}"#).is_err());
        assert!(LevyModel::from_json(r#"{"family":"cauchy","scal":2.0}"#).is_err());
    }

    #[test]
    fn determinism_of_increments() {
        for m in [
            LevyModel::brownian(1.0, 0.3).unwrap(),
            LevyModel::cauchy(1.0).unwrap(),
            LevyModel::stable(1.5, 0.2, 1.0).unwrap(),
            LevyModel::gamma(),
        ] {
            let a = m.increment_sample(0.5, &mut RngStream::new(7, 0)).unwrap();
            let b = m.increment_sample(0.5, &mut RngStream::new(7, 0)).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn non_positive_step_is_a_domain_error() {
        let m = LevyModel::cauchy(1.0).unwrap();
        let mut r = RngStream::new(1, 0);
        assert!(matches!(m.increment_sample(0.0, &mut r), Err(Error::Domain(_))));
        assert!(matches!(m.increment_sample(-1.0, &mut r), Err(Error::Domain(_))));
    }

    #[test]
    fn cdf_closed_forms() {
        let c = LevyModel::cauchy(1.0).unwrap();
        assert!((c.marginal_cdf(1.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((c.marginal_cdf(2.0, 2.0).unwrap() - 0.75).abs() < 1e-15);
        let b = LevyModel::brownian(1.0, 0.0).unwrap();
        assert!((b.marginal_cdf(4.0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        let v = b.marginal_cdf(1.0, 1.0).unwrap();
        assert!((v - 0.841_344_746_068_542_9).abs() < 1e-12, "{v:.17}");
        assert_eq!(b.marginal_cdf(1.0, f64::INFINITY).unwrap(), 1.0);
        assert_eq!(b.marginal_cdf(1.0, f64::NEG_INFINITY).unwrap(), 0.0);
        let g = LevyModel::gamma();
        assert!((g.marginal_cdf(1.0, 1.0).unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-12);
        assert_eq!(g.marginal_cdf(1.0, -1.0).unwrap(), 0.0);
        // Stable α=2 is Normal with variance 2c²t.
        let s2 = LevyModel::stable(2.0, 0.0, 1.0).unwrap();
        let bm = LevyModel::brownian(SQRT_2, 0.0).unwrap();
        for x in [-2.0, -0.3, 0.0, 1.1] {
            assert!((s2.marginal_cdf(3.0, x).unwrap() - bm.marginal_cdf(3.0, x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn unsupported_cdf_names_the_family() {
        let s = LevyModel::stable(1.5, 0.0, 1.0).unwrap();
        let err = s.marginal_cdf(1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::UnsupportedCdf { ref family, .. } if family == "stable"));
        assert!(!s.has_cdf());
    }

    #[test]
    fn cdf_is_monotone() {
        for m in [
            LevyModel::brownian(0.7, -0.2).unwrap(),
            LevyModel::cauchy(2.0).unwrap(),
            LevyModel::stable(0.5, 1.0, 1.0).unwrap(),
            LevyModel::stable(0.5, -1.0, 1.0).unwrap(),
            LevyModel::gamma(),
        ] {
            let mut prev = 0.0;
            for i in -200..=200 {
                let p = m.marginal_cdf(0.7, i as f64 * 0.05).unwrap();
                assert!(p >= prev, "{m} at {i}");
                prev = p;
            }
        }
    }

    #[test]
    fn path_sample_shape() {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        let mut r = RngStream::new(3, 0);
        let p = m.path_sample(2.0, 1, &mut r).unwrap();
        assert_eq!(p.values().len(), 2);
        assert_eq!(p.values()[0], 0.0);
        assert_eq!(p.t_end(), 2.0);
        let mut r2 = RngStream::new(3, 0);
        assert_eq!(p.values()[1], m.increment_sample(2.0, &mut r2).unwrap());
        assert!(m.path_sample(1.0, 0, &mut r).is_err());
    }

    #[test]
    fn long_run_slopes() {
        assert_eq!(LevyModel::brownian(1.0, 0.4).unwrap().long_run_slope(), Some(0.4));
        assert_eq!(LevyModel::cauchy(1.0).unwrap().long_run_slope(), None);
        assert_eq!(LevyModel::stable(1.5, 0.0, 1.0).unwrap().long_run_slope(), Some(0.0));
        assert_eq!(LevyModel::stable(0.5, 1.0, 1.0).unwrap().long_run_slope(), Some(f64::INFINITY));
        assert_eq!(LevyModel::stable(0.5, 0.0, 1.0).unwrap().long_run_slope(), None);
        assert_eq!(LevyModel::gamma().long_run_slope(), Some(1.0));
    }
}

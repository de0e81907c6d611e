//! Exact location and value of the minimum of Brownian motion with drift,
//! sampled through the Brownian bridges between grid points.

use rand_distr::{Distribution, Exp1, InverseGaussian, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Last time and value of the minimum of a path on `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinRecord {
    pub rho: f64,
    pub m: f64,
}

/// Minimum of a Brownian bridge from `x0` to `x1` over a step of length `h`.
pub fn bridge_minimum(x0: f64, x1: f64, sigma: f64, h: f64, rng: &mut RngStream) -> f64 {
    let e: f64 = Exp1.sample(rng);
    let d = x1 - x0;
    0.5 * (x0 + x1 - (d * d + 2.0 * sigma * sigma * h * e).sqrt())
}

/// Time within the step at which a bridge from `x0` to `x1` with minimum `m` attains it.
///
/// The density is proportional to the product of the first-passage densities
/// from `x0` forward and from `x1` backward down to `m`; with `V = (h − τ)/τ`
/// it splits into an inverse Gaussian and a reciprocal inverse Gaussian.
pub fn bridge_argmin_time(x0: f64, x1: f64, m: f64, sigma: f64, h: f64, rng: &mut RngStream) -> f64 {
    let a1 = (x0 - m) / sigma;
    let a2 = (x1 - m) / sigma;
    if !(a1 > 0.0) {
        return 0.0;
    }
    if !(a2 > 0.0) {
        return h;
    }
    let pick_first = rng.open01() * (a1 + a2) < a1;
    let v = if pick_first {
        inverse_gaussian(a2 / a1, a2 * a2 / h, rng)
    } else {
        1.0 / inverse_gaussian(a1 / a2, a1 * a1 / h, rng)
    };
    (h / (1.0 + v)).clamp(0.0, h)
}

fn inverse_gaussian(mean: f64, shape: f64, rng: &mut RngStream) -> f64 {
    match InverseGaussian::new(mean, shape) {
        Ok(ig) => ig.sample(rng),
        // Parameters this extreme put all the mass at the mean.
        Err(_) => mean,
    }
}

/// Exact `(ρ, m)` for `σ·W_t + drift·t` on `[0, horizon]`, with `n_grid` bridge steps.
pub fn brownian_minimum(sigma: f64, drift: f64, horizon: f64, n_grid: usize, rng: &mut RngStream) -> Result<MinRecord> {
    if !(sigma > 0.0 && sigma.is_finite() && drift.is_finite()) {
        return Err(Error::Domain(format!("need σ > 0 and finite drift, got σ={sigma}, drift={drift}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) || n_grid == 0 {
        return Err(Error::Domain(format!("need a positive horizon and grid, got {horizon}, {n_grid}")));
    }
    let h = horizon / n_grid as f64;
    let sd = sigma * h.sqrt();
    let mut x0 = 0.0;
    let mut best = (f64::INFINITY, 0usize, 0.0, 0.0);
    for k in 0..n_grid {
        let z: f64 = StandardNormal.sample(rng);
        let x1 = x0 + drift * h + sd * z;
        let m = bridge_minimum(x0, x1, sigma, h, rng);
        if m <= best.0 {
            best = (m, k, x0, x1);
        }
        x0 = x1;
    }
    let (m, k, a, b) = best;
    let tau = bridge_argmin_time(a, b, m, sigma, h, rng);
    Ok(MinRecord {
        rho: (k as f64 * h + tau).min(horizon),
        m,
    })
}

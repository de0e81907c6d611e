//! Uniform stick-breaking and the face point processes built from it.

use std::io::Write;

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::csv::fmt_f64;
use crate::error::{Error, Result};
use crate::minorant::{convex_minorant, Face, MinorantDecomposition};
use crate::models::LevyModel;
use crate::quadrature::{integrate, integrate_to_infinity};
use crate::rng::RngStream;

/// Default number of sticks; the expected leftover is `t·2^-64`.
pub const DEFAULT_STICKS: usize = 64;

/// Relative accuracy requested from the intensity quadratures.
const MASS_REL_TOL: f64 = 1e-9;

/// `[0, t]` broken at uniform fractions of what remains.
#[derive(Clone, Debug, PartialEq)]
pub struct StickBreak {
    horizon: f64,
    uniforms: Vec<f64>,
    lengths: Vec<f64>,
    partial_sums: Vec<f64>,
}

impl StickBreak {
    /// Breaks `[0, t]` with the given fractions, each in `(0, 1)`.
    pub fn from_uniforms(t: f64, uniforms: Vec<f64>) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("stick horizon must be positive and finite, got {t}")));
        }
        if uniforms.is_empty() {
            return Err(Error::Domain("need at least one stick".into()));
        }
        if let Some(v) = uniforms.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Domain(format!("stick fractions must lie in (0, 1), got {v}")));
        }
        let mut lengths = Vec::with_capacity(uniforms.len());
        let mut partial_sums = Vec::with_capacity(uniforms.len());
        // Track what remains multiplicatively: `t - sum` would round to zero
        // once the remainder drops below one ulp of `t`.
        let mut remaining = t;
        let mut sum = 0.0;
        for &v in &uniforms {
            let l = v * remaining;
            remaining *= 1.0 - v;
            sum += l;
            lengths.push(l);
            partial_sums.push(sum);
        }
        Ok(Self {
            horizon: t,
            uniforms,
            lengths,
            partial_sums,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn uniforms(&self) -> &[f64] {
        &self.uniforms
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    pub fn n_sticks(&self) -> usize {
        self.lengths.len()
    }

    /// Unbroken remainder `t·∏(1 − V_i)`.
    pub fn residual(&self) -> f64 {
        self.horizon * self.uniforms.iter().map(|v| 1.0 - v).product::<f64>()
    }
}

pub fn stick_break(t: f64, n_sticks: usize, rng: &mut RngStream) -> Result<StickBreak> {
    let uniforms = (0..n_sticks).map(|_| rng.open01()).collect();
    StickBreak::from_uniforms(t, uniforms)
}

/// A face described only by its length and increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacePoint {
    pub length: f64,
    pub increment: f64,
}

impl FacePoint {
    pub fn slope(&self) -> f64 {
        self.increment / self.length
    }
}

impl From<&Face> for FacePoint {
    fn from(f: &Face) -> Self {
        Self {
            length: f.length,
            increment: f.increment,
        }
    }
}

/// Stick lengths on `[0, t]` paired with independent increments of the model over each length.
pub fn face_law_sample(model: &LevyModel, t: f64, n_sticks: usize, rng: &mut RngStream) -> Result<Vec<FacePoint>> {
    let sticks = stick_break(t, n_sticks, rng)?;
    points_for_sticks(model, sticks.lengths(), rng)
}

/// Pairs each given length with an independent increment of the model over that length.
pub fn points_for_sticks(model: &LevyModel, lengths: &[f64], rng: &mut RngStream) -> Result<Vec<FacePoint>> {
    lengths
        .iter()
        .map(|&l| {
            Ok(FacePoint {
                length: l,
                increment: model.increment_sample(l, rng)?,
            })
        })
        .collect()
}

/// Lays the points end to end in increasing slope order, starting from `(0, 0)`.
pub fn minorant_from_points(points: &[FacePoint]) -> Result<MinorantDecomposition> {
    if let Some(p) = points.iter().find(|p| !(p.length > 0.0 && p.length.is_finite() && p.increment.is_finite())) {
        return Err(Error::Domain(format!(
            "face points need positive finite length and finite increment, got ({}, {})",
            p.length, p.increment
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.slope().total_cmp(&b.slope()));
    if let Some(w) = sorted.windows(2).find(|w| w[0].slope() == w[1].slope()) {
        return Err(Error::SlopeTie(w[0].slope()));
    }
    let mut g = 0.0;
    let faces = sorted
        .iter()
        .map(|p| {
            let d = g + p.length;
            let f = Face {
                g,
                d,
                length: p.length,
                increment: p.increment,
                slope: p.slope(),
            };
            g = d;
            f
        })
        .collect();
    MinorantDecomposition::from_faces(faces, 0.0)
}

/// Exponential horizon `T ~ Exp(θ)` and stick-breaking face points on `[0, T]`.
pub fn ppp_exponential_horizon(
    model: &LevyModel,
    theta: f64,
    n_sticks: usize,
    rng: &mut RngStream,
) -> Result<(f64, Vec<FacePoint>)> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Domain(format!("rate θ must be positive and finite, got {theta}")));
    }
    let exp = Exp::new(theta).map_err(|e| Error::Domain(e.to_string()))?;
    let t = loop {
        let t = exp.sample(rng);
        if t > 0.0 {
            break t;
        }
    };
    Ok((t, face_law_sample(model, t, n_sticks, rng)?))
}

/// Faces of slope below `slope_cap` from the minorant of one path on `[0, horizon]`.
pub fn infinite_horizon_points(
    model: &LevyModel,
    slope_cap: f64,
    horizon: f64,
    n_grid: usize,
    rng: &mut RngStream,
) -> Result<Vec<FacePoint>> {
    let l = model
        .long_run_slope()
        .ok_or_else(|| Error::LongRunSlopeUndefined(model.to_string()))?;
    if !(slope_cap < l) {
        return Err(Error::Domain(format!("slope cap {slope_cap} must lie below the long-run slope {l}")));
    }
    let path = model.path_sample(horizon, n_grid, rng)?;
    Ok(convex_minorant(&path)
        .faces()
        .iter()
        .filter(|f| f.slope < slope_cap)
        .map(FacePoint::from)
        .collect())
}

/// Rectangle of (length, increment) space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub t1: f64,
    pub t2: f64,
    pub x1: f64,
    pub x2: f64,
}

impl Region {
    pub fn contains(&self, p: &FacePoint) -> bool {
        p.length >= self.t1 && p.length <= self.t2 && p.increment >= self.x1 && p.increment <= self.x2
    }
}

/// Weight applied to the `dt/t · P(X_t ∈ dx)` intensity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    /// `e^{-θt}`: exponential horizon.
    ExpDecay { theta: f64 },
    /// `1{x < l·t}`: faces of slope below `l`.
    Indicator { slope: f64 },
    /// No weight.
    Unit,
}

/// `∫_{t1}^{t2} w(t)·P(X_t ∈ [x1, x2]) dt/t` by adaptive quadrature.
pub fn intensity_mass(model: &LevyModel, region: &Region, weight: Weight) -> Result<f64> {
    let Region { t1, t2, x1, x2 } = *region;
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(Error::Domain(format!("t1 must be positive and finite, got {t1}")));
    }
    if !(t2 > t1) {
        return Err(Error::Domain(format!("need t1 < t2, got [{t1}, {t2}]")));
    }
    if x1.is_nan() || x2.is_nan() || x1 > x2 {
        return Err(Error::Domain(format!("need x1 <= x2, got [{x1}, {x2}]")));
    }
    match weight {
        Weight::ExpDecay { theta } if !(theta > 0.0 && theta.is_finite()) => {
            return Err(Error::Domain(format!("rate θ must be positive and finite, got {theta}")));
        }
        Weight::Indicator { slope } if slope.is_nan() => {
            return Err(Error::Domain("indicator slope is NaN".into()));
        }
        Weight::Unit if t2.is_infinite() => {
            return Err(Error::Domain("unweighted mass needs a finite t2".into()));
        }
        _ => {}
    }
    // Fail early on families without a CDF.
    model.marginal_cdf(t1, 0.0)?;
    if x1 == x2 {
        return Ok(0.0);
    }
    let prob = |t: f64| -> f64 {
        let hi = match weight {
            Weight::Indicator { slope } => x2.min(slope * t),
            _ => x2,
        };
        if hi <= x1 {
            return 0.0;
        }
        let w = match weight {
            Weight::ExpDecay { theta } => (-theta * t).exp(),
            _ => 1.0,
        };
        let p = model.marginal_cdf(t, hi).unwrap_or(f64::NAN) - model.marginal_cdf(t, x1).unwrap_or(f64::NAN);
        w * p.max(0.0)
    };
    // t = e^s turns dt/t into ds.
    let f = |s: f64| prob(s.exp());
    if t2.is_infinite() {
        integrate_to_infinity(f, t1.ln(), MASS_REL_TOL, 1e-15)
    } else {
        integrate(f, t1.ln(), t2.ln(), MASS_REL_TOL, 1e-15)
    }
}

/// Expected number of faces with slope in `(a, b)` for the minorant on `[0, t]`:
/// `∫_0^t P(a < X_s/s < b) ds/s`.
pub fn slope_band_mass(model: &LevyModel, t: f64, a: f64, b: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("horizon must be positive and finite, got {t}")));
    }
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::Domain(format!("need a <= b, got ({a}, {b})")));
    }
    model.marginal_cdf(t, 0.0)?;
    if a == b {
        return Ok(0.0);
    }
    let p = |s: f64| {
        model.marginal_cdf(s, b * s).unwrap_or(f64::NAN) - model.marginal_cdf(s, a * s).unwrap_or(f64::NAN)
    };
    // s = r² tames the s^{-1/2} behaviour of diffusive families at the origin.
    integrate(|r: f64| if r == 0.0 { 0.0 } else { 2.0 * p(r * r).max(0.0) / r }, 0.0, t.sqrt(), MASS_REL_TOL, 1e-15)
}

/// Writes `replicate,i,length,increment,slope` rows; `i` counts from 1 within each replicate.
pub fn write_face_points_csv<'a, W, I>(mut w: W, replicates: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (u64, &'a [FacePoint])>,
{
    writeln!(w, "replicate,i,length,increment,slope")?;
    for (r, points) in replicates {
        for (i, p) in points.iter().enumerate() {
            writeln!(
                w,
                "{r},{},{},{},{}",
                i + 1,
                fmt_f64(p.length),
                fmt_f64(p.increment),
                fmt_f64(p.slope())
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_halves() {
        let s = StickBreak::from_uniforms(1.0, vec![0.5, 0.5, 0.5]).unwrap();
        assert_eq!(s.lengths(), &[0.5, 0.25, 0.125]);
        assert_eq!(s.partial_sums(), &[0.5, 0.75, 0.875]);
        assert_eq!(s.residual(), 0.125);
        assert!(StickBreak::from_uniforms(1.0, vec![0.5, 1.0]).is_err());
        assert!(StickBreak::from_uniforms(0.0, vec![0.5]).is_err());
    }

    #[test]
    fn partial_sums_increase_below_horizon() {
        for seed in 0..500 {
            let mut rng = RngStream::new(seed, 0);
            let s = stick_break(2.5, 10, &mut rng).unwrap();
            let sums = s.partial_sums();
            assert!(sums.windows(2).all(|w| w[0] < w[1]));
            assert!(sums[9] < 2.5);
            let r = s.residual();
            // `t - S_n` is only resolved to an ulp of `t`.
            assert!(((2.5 - sums[9]) - r).abs() <= 1e-12 * 2.5, "seed {seed}");
            assert!(s.lengths().iter().all(|&l| l > 0.0));
        }
    }

    #[test]
    fn first_stick_mean() {
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| stick_break(3.0, 1, &mut rng).unwrap().lengths()[0]).sum::<f64>() / n as f64;
        let sd = 3.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 1.5).abs() < 4.0 * sd, "{mean}");
    }

    #[test]
    fn points_sorted_by_slope() {
        let pts = [
            FacePoint { length: 0.5, increment: 1.0 },
            FacePoint { length: 0.5, increment: -1.0 },
        ];
        let dec = minorant_from_points(&pts).unwrap();
        assert_eq!(dec.faces(), &[Face::new(0.0, 0.5, -1.0), Face::new(0.5, 1.0, 1.0)]);
        let one = minorant_from_points(&pts[..1]).unwrap();
        assert_eq!(one.len(), 1);
        let tie = [pts[0], FacePoint { length: 1.0, increment: 2.0 }];
        assert!(matches!(minorant_from_points(&tie), Err(Error::SlopeTie(_))));
    }

    #[test]
    fn round_trip_from_samples_is_convex() {
        let model = LevyModel::cauchy(1.0).unwrap();
        for seed in 0..50 {
            let mut rng = RngStream::new(seed, 1);
            let pts = face_law_sample(&model, 1.0, 50, &mut rng).unwrap();
            let dec = minorant_from_points(&pts).unwrap();
            dec.check_invariants().unwrap();
            let total: f64 = pts.iter().map(|p| p.length).sum();
            assert!((dec.duration() - total).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_weight_full_line_is_log_ratio() {
        let m = LevyModel::brownian(1.0, 0.3).unwrap();
        let r = Region { t1: 0.2, t2: 7.0, x1: f64::NEG_INFINITY, x2: f64::INFINITY };
        let v = intensity_mass(&m, &r, Weight::Unit).unwrap();
        assert!((v - (7.0f64 / 0.2).ln()).abs() < 1e-8, "{v}");
    }

    #[test]
    fn degenerate_and_invalid_regions() {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        let flat = Region { t1: 0.5, t2: 1.5, x1: 0.3, x2: 0.3 };
        assert_eq!(intensity_mass(&m, &flat, Weight::ExpDecay { theta: 1.0 }).unwrap(), 0.0);
        let at_zero = Region { t1: 0.0, t2: 1.0, x1: -1.0, x2: 0.0 };
        assert!(matches!(intensity_mass(&m, &at_zero, Weight::Unit), Err(Error::Domain(_))));
        let stable = LevyModel::stable(1.5, 0.0, 1.0).unwrap();
        let r = Region { t1: 0.5, t2: 1.0, x1: -1.0, x2: 0.0 };
        assert!(matches!(intensity_mass(&stable, &r, Weight::Unit), Err(Error::UnsupportedCdf { .. })));
    }

    #[test]
    fn indicator_clips_the_increment_range() {
        let m = LevyModel::brownian(1.0, 1.0).unwrap();
        let r = Region { t1: 0.5, t2: 2.0, x1: f64::NEG_INFINITY, x2: f64::INFINITY };
        let clipped = intensity_mass(&m, &r, Weight::Indicator { slope: 0.0 }).unwrap();
        let direct = Region { x2: 0.0, ..r };
        let plain = intensity_mass(&m, &direct, Weight::Unit).unwrap();
        assert!((clipped - plain).abs() < 1e-9);
        assert!(clipped > 0.0);
    }

    #[test]
    fn infinite_horizon_preconditions() {
        let mut rng = RngStream::new(1, 0);
        let c = LevyModel::cauchy(1.0).unwrap();
        assert!(matches!(
            infinite_horizon_points(&c, 0.0, 10.0, 64, &mut rng),
            Err(Error::LongRunSlopeUndefined(_))
        ));
        let b = LevyModel::brownian(1.0, 1.0).unwrap();
        assert!(matches!(infinite_horizon_points(&b, 1.0, 10.0, 64, &mut rng), Err(Error::Domain(_))));
        let pts = infinite_horizon_points(&b, 0.0, 10.0, 1024, &mut rng).unwrap();
        assert!(pts.iter().all(|p| p.slope() < 0.0));
    }

    #[test]
    fn gamma_faces_below_any_cap_are_increasing() {
        let g = LevyModel::gamma();
        for seed in 0..20 {
            let mut rng = RngStream::new(seed, 2);
            let pts = infinite_horizon_points(&g, 0.5, 20.0, 2048, &mut rng).unwrap();
            assert!(pts.iter().all(|p| p.increment >= 0.0 && p.slope() < 0.5));
        }
    }

    #[test]
    fn slope_band_matches_rectangle_free_integral() {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        assert_eq!(slope_band_mass(&m, 1.0, 0.0, 0.0).unwrap(), 0.0);
        let narrow = slope_band_mass(&m, 1.0, 1.0, 2.0).unwrap();
        let wide = slope_band_mass(&m, 1.0, 0.5, 3.0).unwrap();
        assert!(0.0 < narrow && narrow < wide);
        // Integrand is Φ(2√s) − Φ(√s) over ds/s; compare with a plain Riemann sum in r = √s.
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut sum = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * h;
            let p = crate::models::normal_cdf(2.0 * r) - crate::models::normal_cdf(r);
            sum += 2.0 * p / r * h;
        }
        assert!((narrow - sum).abs() < 1e-8, "{narrow} vs {sum}");
    }

    #[test]
    fn exponential_horizon_mean() {
        let m = LevyModel::brownian(1.0, 0.0).unwrap();
        let mut rng = RngStream::new(9, 0);
        let n = 20_000;
        let mut total = 0.0;
        for _ in 0..n {
            let (t, pts) = ppp_exponential_horizon(&m, 2.0, 8, &mut rng).unwrap();
            assert_eq!(pts.len(), 8);
            total += t;
        }
        let mean = total / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt());
    }

    #[test]
    fn csv_rows() {
        let pts = [FacePoint { length: 0.5, increment: -1.0 }];
        let mut buf = Vec::new();
        write_face_points_csv(&mut buf, [(3u64, &pts[..])]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "replicate,i,length,increment,slope\n3,1,5.0000000000000000e-1,-1.0000000000000000e0,-2.0000000000000000e0\n"
        );
    }
}

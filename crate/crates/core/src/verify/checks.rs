//! Checks on minorant faces, stick-breaking and the path transforms.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma};

use super::report::{Component, TestReport};
use super::replicate;
use crate::error::{Error, Result};
use crate::minorant::{convex_minorant, excursion, Face, MinorantDecomposition};
use crate::models::LevyModel;
use crate::path::GridPath;
use crate::rng::RngStream;
use crate::stats::{
    bin_of, chi_square_gof, chi_square_independence, ks_one_sample, ks_two_sample, mean_var, quantile_edges, spearman,
};
use crate::sticks::{intensity_mass, ppp_exponential_horizon, Region, Weight, DEFAULT_STICKS};
use crate::transforms::{invariant_transform, knight_bridge, recursive_face_discovery, vervaat};

/// Face straddling a uniform time; uniforms that land on a vertex are redrawn and counted.
pub(crate) fn uniform_face(dec: &MinorantDecomposition, rng: &mut RngStream) -> (Face, u64) {
    let mut collisions = 0;
    loop {
        let u = dec.t0() + rng.open01() * dec.duration();
        match dec.face_containing(u) {
            Ok(f) => return (*f, collisions),
            Err(_) => collisions += 1,
        }
    }
}

fn uniform_cdf(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn need(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

/// Frequency of walks staying strictly above the chord from `(0, 0)` to `(n, S_n)`, against `1/n`.
pub fn chord_probability_check(model: &LevyModel, n: usize, reps: u64, seed: u64) -> Result<TestReport> {
    need(n >= 2, || format!("chord check needs n >= 2, got {n}"))?;
    let above = replicate(seed, reps, |rng| {
        let p = model.path_sample(n as f64, n, rng)?;
        let v = p.values();
        let sn = v[n];
        Ok((1..n).all(|k| v[k] > k as f64 * sn / n as f64))
    })?;
    let freq = above.iter().filter(|&&a| a).count() as f64 / reps as f64;
    let p0 = 1.0 / n as f64;
    let z = (freq - p0) / (p0 * (1.0 - p0) / reps as f64).sqrt();
    Ok(TestReport::new(
        format!("chord_probability/{}/n={n}", model.family_name()),
        vec![Component::z("frequency above chord vs 1/n", freq, z)],
        reps,
        n as u64,
        seed,
    ))
}

/// Harmonic number `H_n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Mean number of minorant faces of an `n`-step walk, against `H_n`.
pub fn face_count_check(model: &LevyModel, n: usize, reps: u64, seed: u64) -> Result<TestReport> {
    need(n >= 1, || "face count needs n >= 1".into())?;
    let counts = replicate(seed, reps, |rng| {
        Ok(convex_minorant(&model.path_sample(n as f64, n, rng)?).len() as f64)
    })?;
    let (mean, _) = mean_var(&counts);
    // The face count is distributed as the cycle count of a uniform permutation.
    let var: f64 = (1..=n).map(|k| 1.0 / k as f64 - 1.0 / (k * k) as f64).sum();
    let name = format!("face_count/{}/n={n}", model.family_name());
    let component = if var == 0.0 {
        Component::holds("walks with more than one face", counts.iter().filter(|&&c| c != 1.0).count() as u64)
    } else {
        Component::z("mean face count vs H_n", mean, (mean - harmonic(n)) / (var / reps as f64).sqrt())
    };
    Ok(TestReport::new(name, vec![component], reps, n as u64, seed))
}

/// Length of the face straddling a uniform time, against Uniform(0, 1).
pub fn uniform_face_length_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let draws = replicate(seed, reps, |rng| {
        let dec = convex_minorant(&model.path_sample(1.0, n_grid, rng)?);
        let (f, c) = uniform_face(&dec, rng);
        Ok((f.length, c))
    })?;
    let lengths: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let collisions: u64 = draws.iter().map(|d| d.1).sum();
    let ks = ks_one_sample(&lengths, uniform_cdf)?;
    Ok(TestReport::new(
        format!("uniform_face_length/{}/n_grid={n_grid}", model.family_name()),
        vec![Component::p("KS face length vs Uniform(0,1)", ks.statistic, ks.p_value)],
        reps,
        n_grid as u64,
        seed,
    )
    .with_note(format!("{collisions} vertex collisions redrawn")))
}

/// Exact discrete law: the face over a uniform grid point of an `n`-step walk
/// has a length uniform on `{1, ..., n}` steps.
pub fn discrete_invariance_check(model: &LevyModel, n: usize, reps: u64, seed: u64) -> Result<TestReport> {
    need(n >= 2, || format!("discrete invariance needs n >= 2, got {n}"))?;
    let lens = replicate(seed, reps, |rng| {
        let p = model.path_sample(1.0, n, rng)?;
        let dec = convex_minorant(&p);
        let k = rng.random_range(1..=n);
        let f = dec.faces()[dec.face_index_right_closed(p.time(k))?];
        Ok(p.index_of(f.d)? - p.index_of(f.g)?)
    })?;
    let mut counts = vec![0u64; n];
    for l in lens {
        counts[l - 1] += 1;
    }
    let chi = chi_square_gof(&counts, &vec![1.0 / n as f64; n])?;
    Ok(TestReport::new(
        format!("discrete_invariance/{}/n={n}", model.family_name()),
        vec![Component::p("chi-square face steps vs uniform", chi.statistic, chi.p_value)],
        reps,
        n as u64,
        seed,
    ))
}

/// (length, increment) of the face over a uniform time against the first stick
/// `L_1 ~ Uniform(0, 1)` paired with an independent increment over `L_1`.
pub fn face_law_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let draws = replicate(seed, reps, |rng| {
        let dec = convex_minorant(&model.path_sample(1.0, n_grid, rng)?);
        let (f, _) = uniform_face(&dec, rng);
        let l1 = rng.open01();
        let y1 = model.increment_sample(l1, rng)?;
        Ok([f.length, f.increment, l1, y1])
    })?;
    let col = |i: usize| draws.iter().map(|d| d[i]).collect::<Vec<f64>>();
    let (fl, fi, sl, si) = (col(0), col(1), col(2), col(3));
    let kl = ks_two_sample(&fl, &sl)?;
    let ki = ks_two_sample(&fi, &si)?;
    let mut components = vec![
        Component::p("KS length: face vs stick", kl.statistic, kl.p_value),
        Component::p("KS increment: face vs stick", ki.statistic, ki.p_value),
    ];
    if model.is_subordinator() {
        let negative = fi.iter().chain(&si).filter(|&&x| x < 0.0).count() as u64;
        components.push(Component::holds("negative increments", negative));
    }
    Ok(TestReport::new(
        format!("face_law/{}/n_grid={n_grid}", model.family_name()),
        components,
        reps,
        n_grid as u64,
        seed,
    ))
}

/// Independence of length and slope of the face over a uniform time.
pub fn cauchy_independence_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let draws = replicate(seed, reps, |rng| {
        let dec = convex_minorant(&model.path_sample(1.0, n_grid, rng)?);
        let (f, _) = uniform_face(&dec, rng);
        Ok((f.length, f.slope))
    })?;
    let lengths: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let slopes: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let (le, se) = (quantile_edges(&lengths, 4), quantile_edges(&slopes, 4));
    let mut table = vec![vec![0u64; 4]; 4];
    for (l, s) in lengths.iter().zip(&slopes) {
        table[bin_of(*l, &le)][bin_of(*s, &se)] += 1;
    }
    let chi = chi_square_independence(&table)?;
    let r = spearman(&lengths, &slopes)?;
    Ok(TestReport::new(
        format!("cauchy_independence/{}/n_grid={n_grid}", model.family_name()),
        vec![
            Component::p("chi-square 4x4 length/slope table", chi.statistic, chi.p_value),
            Component::z("Spearman length/slope", r, r * ((reps - 1) as f64).sqrt()),
        ],
        reps,
        n_grid as u64,
        seed,
    ))
}

/// `I_x` of Cauchy minorants against `T_{F(x)}/T_1` for a Gamma subordinator `T`,
/// thinned to the grid.
pub fn cauchy_gamma_check(n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let model = LevyModel::cauchy(1.0)?;
    let xs = [-1.0, 0.0, 1.0];
    let fx: Vec<f64> = xs.iter().map(|&x| model.marginal_cdf(1.0, x)).collect::<Result<_>>()?;
    let gammas: Vec<(Gamma<f64>, Gamma<f64>)> = fx
        .iter()
        .map(|&f| (Gamma::new(f, 1.0).expect("shape in (0,1)"), Gamma::new(1.0 - f, 1.0).expect("shape in (0,1)")))
        .collect();
    let draws = replicate(seed, reps, |rng| {
        let dec = convex_minorant(&model.path_sample(1.0, n_grid, rng)?);
        let mut row = [0.0; 6];
        for (i, &x) in xs.iter().enumerate() {
            row[i] = dec.slope_passage(x);
            let (ga, gb) = &gammas[i];
            let a = ga.sample(rng);
            let b = gb.sample(rng);
            // Walks resolve I_x only to multiples of 1/n; K ~ Binomial(n, B) is the exact grid analogue.
            let k = Binomial::new(n_grid as u64, a / (a + b)).map_err(|e| Error::Domain(e.to_string()))?.sample(rng);
            row[3 + i] = k as f64 / n_grid as f64;
        }
        Ok(row)
    })?;
    let col = |i: usize| draws.iter().map(|d| d[i]).collect::<Vec<f64>>();
    let mut components = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        let ks = ks_two_sample(&col(i), &col(3 + i))?;
        components.push(Component::p(format!("KS I_{x} vs T_F(x)/T_1"), ks.statistic, ks.p_value));
    }
    let arcsine = |u: f64| 2.0 / std::f64::consts::PI * u.clamp(0.0, 1.0).sqrt().asin();
    let ks = ks_one_sample(&col(1), arcsine)?;
    components.push(Component::p("KS I_0 vs Beta(1/2,1/2)", ks.statistic, ks.p_value));
    Ok(TestReport::new(format!("cauchy_gamma/n_grid={n_grid}"), components, reps, n_grid as u64, seed))
}

/// Counts of stick-breaking face points over an exponential horizon in
/// disjoint rectangles: Poisson means, unit dispersion, no correlation.
pub fn poisson_ppp_check(model: &LevyModel, theta: f64, rects: &[Region], reps: u64, seed: u64) -> Result<TestReport> {
    need(!rects.is_empty(), || "need at least one rectangle".into())?;
    let counts = replicate(seed, reps, |rng| {
        let (_, pts) = ppp_exponential_horizon(model, theta, DEFAULT_STICKS, rng)?;
        Ok(rects
            .iter()
            .map(|r| pts.iter().filter(|p| r.contains(p)).count() as f64)
            .collect::<Vec<f64>>())
    })?;
    let col = |i: usize| counts.iter().map(|c| c[i]).collect::<Vec<f64>>();
    let mut components = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        let mass = intensity_mass(model, r, Weight::ExpDecay { theta })?;
        let c = col(i);
        let (mean, var) = mean_var(&c);
        let label = format!("R{}=[{},{}]x[{},{}]", i + 1, r.t1, r.t2, r.x1, r.x2);
        if mass == 0.0 {
            components.push(Component::holds(format!("{label} points in empty region"), c.iter().filter(|&&x| x > 0.0).count() as u64));
            continue;
        }
        let z = if var > 0.0 { (mean - mass) / (var / reps as f64).sqrt() } else { f64::INFINITY };
        components.push(Component::z(format!("{label} mean count vs intensity {mass:.6}"), mean, z));
        components.push(Component::within(format!("{label} variance/mean"), var / mean, 0.9, 1.1));
    }
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            let (a, b) = (col(i), col(j));
            let (ma, _) = mean_var(&a);
            let (mb, _) = mean_var(&b);
            let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
            let (cov, var) = mean_var(&prods);
            let z = if var > 0.0 { cov / (var / reps as f64).sqrt() } else { 0.0 };
            components.push(Component::z(format!("covariance R{} R{}", i + 1, j + 1), cov, z));
        }
    }
    Ok(TestReport::new(
        format!("poisson_ppp/{}/theta={theta}", model.family_name()),
        components,
        reps,
        DEFAULT_STICKS as u64,
        seed,
    ))
}

/// Face length after the invariant transform against Uniform(0, 1), and the
/// transformed path's marginal at `t = 1/2` against the original path's.
pub fn invariant_transform_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    need(n_grid % 2 == 0, || "grid must have an even number of steps".into())?;
    let draws = replicate(seed, reps, |rng| {
        let p = model.path_sample(1.0, n_grid, rng)?;
        let r = loop {
            match invariant_transform(&p, rng.open01()) {
                Err(Error::VertexCollision(_)) => continue,
                other => break other?,
            }
        };
        let moved = (r.transformed.terminal() - p.terminal()).abs() > 1e-12 * p.terminal().abs().max(1.0);
        let uniform = rng.open01();
        let reference = model.path_sample(1.0, n_grid, rng)?.values()[n_grid / 2];
        Ok([r.uniform_length, uniform, r.transformed.values()[n_grid / 2], reference, moved as u8 as f64])
    })?;
    let col = |i: usize| draws.iter().map(|d| d[i]).collect::<Vec<f64>>();
    let kl = ks_two_sample(&col(0), &col(1))?;
    let kx = ks_two_sample(&col(2), &col(3))?;
    let moved = col(4).iter().filter(|&&m| m > 0.0).count() as u64;
    Ok(TestReport::new(
        format!("invariant_transform/{}/n_grid={n_grid}", model.family_name()),
        vec![
            Component::p("KS d-g vs Uniform(0,1)", kl.statistic, kl.p_value),
            Component::p("KS X^U(1/2) vs X(1/2)", kx.statistic, kx.p_value),
            Component::holds("terminal value changed", moved),
        ],
        reps,
        n_grid as u64,
        seed,
    ))
}

/// The first two relative lengths found by repeated uniform discovery are
/// Uniform(0, 1) and uncorrelated.
pub fn recursive_discovery_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let draws = replicate(seed, reps, |rng| {
        let p = model.path_sample(1.0, n_grid, rng)?;
        let d = recursive_face_discovery(&p, 2, rng)?;
        Ok((d.steps.len() == 2).then(|| (d.steps[0].relative_length, d.steps[1].relative_length)))
    })?;
    let done: Vec<(f64, f64)> = draws.iter().flatten().copied().collect();
    let skipped = draws.len() - done.len();
    let v1: Vec<f64> = done.iter().map(|d| d.0).collect();
    let v2: Vec<f64> = done.iter().map(|d| d.1).collect();
    let k1 = ks_one_sample(&v1, uniform_cdf)?;
    let k2 = ks_one_sample(&v2, uniform_cdf)?;
    let r = spearman(&v1, &v2)?;
    Ok(TestReport::new(
        format!("recursive_discovery/{}/n_grid={n_grid}", model.family_name()),
        vec![
            Component::p("KS V1 vs Uniform(0,1)", k1.statistic, k1.p_value),
            Component::p("KS V2 vs Uniform(0,1)", k2.statistic, k2.p_value),
            Component::z("Spearman V1/V2", r, r * ((v1.len() - 1) as f64).sqrt()),
        ],
        reps,
        n_grid as u64,
        seed,
    )
    .with_note(format!("{skipped} paths were a single face")))
}

/// Maximum, time-average and half-length value of an excursion-like path.
pub fn excursion_functionals(e: &GridPath) -> [f64; 3] {
    let v = e.values();
    let m = e.n_steps();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let avg = v.iter().sum::<f64>() / (m + 1) as f64;
    let mid = if m % 2 == 0 { v[m / 2] } else { 0.5 * (v[(m - 1) / 2] + v[m.div_ceil(2)]) };
    [max, avg, mid]
}

/// Excursion over the face straddling a uniform time against the Vervaat
/// transform of a Knight bridge over the first stick.
pub fn excursion_law_check(model: &LevyModel, n_grid: usize, reps: u64, seed: u64) -> Result<TestReport> {
    let draws = replicate(seed, reps, |rng| {
        let p = model.path_sample(1.0, n_grid, rng)?;
        let dec = convex_minorant(&p);
        let (f, _) = uniform_face(&dec, rng);
        let a = excursion_functionals(&excursion(&p, &f)?);
        // The stick is snapped up to the grid, matching the face-length law there.
        let steps = ((rng.open01() * n_grid as f64).ceil() as usize).clamp(1, n_grid);
        let len = steps as f64 / n_grid as f64;
        let walk = model.path_sample(len, steps, rng)?;
        let bridge = knight_bridge(&walk, 0.0, walk.t_end())?;
        let b = excursion_functionals(&vervaat(&bridge));
        Ok([a, b])
    })?;
    let names = ["maximum", "time-average", "midpoint"];
    let mut components = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let a: Vec<f64> = draws.iter().map(|d| d[0][i]).collect();
        let b: Vec<f64> = draws.iter().map(|d| d[1][i]).collect();
        let ks = ks_two_sample(&a, &b)?;
        components.push(Component::p(format!("KS {name}: excursion vs Vervaat bridge"), ks.statistic, ks.p_value));
    }
    Ok(TestReport::new(
        format!("excursion_law/{}/n_grid={n_grid}", model.family_name()),
        components,
        reps,
        n_grid as u64,
        seed,
    ))
}

//! Goodness-of-fit statistics used by the verification suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Smallest sample the asymptotic KS p-value is trusted for.
pub const KS_MIN_SAMPLES: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestStat {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-transformed series; converges fast for small λ.
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|j| {
                let k = (2 * j - 1) as f64;
                (-k * k * c).exp()
            })
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let x = -2.0 * lambda * lambda;
        let s: f64 = (1..=100)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * (x * (j * j) as f64).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

fn sorted(x: &[f64]) -> Result<Vec<f64>> {
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("samples contain NaN".into()));
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestStat> {
    for s in [a, b] {
        if s.len() < KS_MIN_SAMPLES {
            return Err(Error::TooFewSamples {
                needed: KS_MIN_SAMPLES,
                got: s.len(),
            });
        }
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(TestStat {
        statistic: d,
        p_value: ks_p(d, na * nb / (na + nb)),
    })
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestStat> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: KS_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let x = sorted(samples)?;
    let n = x.len() as f64;
    let mut d = 0.0f64;
    for (i, &v) in x.iter().enumerate() {
        let f = cdf(v);
        if f.is_nan() {
            return Err(Error::Domain(format!("CDF returned NaN at {v}")));
        }
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(TestStat {
        statistic: d,
        p_value: ks_p(d, n),
    })
}

fn chi_square_p(stat: f64, df: usize) -> Result<f64> {
    let dist = ChiSquared::new(df as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sf(stat))
}

/// Pearson goodness of fit of counts to cell probabilities (which must sum to 1).
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<TestStat> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(Error::Domain("need at least two cells with matching probabilities".into()));
    }
    if probs.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::Domain("cell probabilities must be positive".into()));
    }
    let n: u64 = observed.iter().sum();
    let stat = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    Ok(TestStat {
        statistic: stat,
        p_value: chi_square_p(stat, observed.len() - 1)?,
    })
}

/// Pearson test of independence for a contingency table given as rows.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<TestStat> {
    let r = table.len();
    let c = table.first().map_or(0, |row| row.len());
    if r < 2 || c < 2 || table.iter().any(|row| row.len() != c) {
        return Err(Error::Domain("need a rectangular table of at least 2×2".into()));
    }
    let rows: Vec<f64> = table.iter().map(|row| row.iter().sum::<u64>() as f64).collect();
    let cols: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum::<u64>() as f64).collect();
    let n: f64 = rows.iter().sum();
    if rows.iter().chain(&cols).any(|m| *m == 0.0) {
        return Err(Error::Domain("contingency table has an empty margin".into()));
    }
    let mut stat = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &o) in row.iter().enumerate() {
            let e = rows[i] * cols[j] / n;
            stat += (o as f64 - e).powi(2) / e;
        }
    }
    Ok(TestStat {
        statistic: stat,
        p_value: chi_square_p(stat, (r - 1) * (c - 1))?,
    })
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::Domain("need two samples of equal length, at least 3".into()));
    }
    Ok(pearson(&ranks(a), &ranks(b)))
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, _) = mean_var(a);
    let (mb, _) = mean_var(b);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Sample mean and unbiased variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Sample covariance of paired observations.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, _) = mean_var(a);
    let (mb, _) = mean_var(b);
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
}

/// z-score of a sample mean against `expected` when each draw has variance `variance`.
pub fn mean_z(mean: f64, expected: f64, variance: f64, n: usize) -> f64 {
    (mean - expected) / (variance / n as f64).sqrt()
}

/// Bin edges splitting `x` into `k` groups of (nearly) equal size.
pub fn quantile_edges(x: &[f64], k: usize) -> Vec<f64> {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    (1..k).map(|i| s[i * s.len() / k]).collect()
}

/// Index of the bin of `v` given interior edges (left-closed bins).
pub fn bin_of(v: f64, edges: &[f64]) -> usize {
    edges.partition_point(|&e| e <= v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series are valid near the switch point.
        let l = 1.18f64;
        let small = {
            let c = std::f64::consts::PI.powi(2) / (8.0 * l * l);
            1.0 - (2.0 * std::f64::consts::PI).sqrt() / l * (1..=20).map(|j| (-((2 * j - 1) as f64).powi(2) * c).exp()).sum::<f64>()
        };
        assert!((small - kolmogorov_q(l)).abs() < 1e-12);
        assert!((kolmogorov_q(1.3581) - 0.05).abs() < 1e-3);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }

    #[test]
    fn identical_and_disjoint_samples() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value > 0.999);
        let b: Vec<f64> = (0..50).map(|i| 100.0 + i as f64).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
        assert!(matches!(ks_two_sample(&a[..10], &b), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn normal_calibration() {
        let mut rng = RngStream::new(17, 0);
        let a: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
        let u: Vec<f64> = (0..10_000).map(|_| rng.open01()).collect();
        assert!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
    }

    #[test]
    fn one_sample_edge_cases() {
        let x: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        // Against its own ECDF the distance is at most 1/n.
        let ecdf = |v: f64| x.iter().filter(|&&y| y <= v).count() as f64 / x.len() as f64;
        assert!(ks_one_sample(&x, ecdf).unwrap().statistic <= 0.01 + 1e-15);
        let c = vec![0.5; 100];
        assert!(ks_one_sample(&c, |v| v.clamp(0.0, 1.0)).unwrap().p_value < 1e-6);
    }

    #[test]
    fn chi_square_examples() {
        let r = chi_square_gof(&[25, 25, 25, 25], &[0.25; 4]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let r = chi_square_gof(&[100, 0], &[0.5, 0.5]).unwrap();
        assert!(r.p_value < 1e-10);
        let t = vec![vec![10, 20], vec![20, 40]];
        assert!(chi_square_independence(&t).unwrap().statistic.abs() < 1e-12);
        let t = vec![vec![50, 0], vec![0, 50]];
        assert!(chi_square_independence(&t).unwrap().p_value < 1e-10);
    }

    #[test]
    fn spearman_and_ranks() {
        assert_eq!(ranks(&[3.0, 1.0, 2.0, 1.0]), vec![4.0, 1.5, 3.0, 1.5]);
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&a, &[10.0, 20.0, 25.0, 100.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_bins() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let e = quantile_edges(&x, 4);
        assert_eq!(e, vec![25.0, 50.0, 75.0]);
        let mut counts = [0; 4];
        for v in &x {
            counts[bin_of(*v, &e)] += 1;
        }
        assert_eq!(counts, [25; 4]);
    }
}

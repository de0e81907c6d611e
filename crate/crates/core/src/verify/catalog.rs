//! The fixed, ordered list of named checks run by `verify all`.

use super::checks::*;
use super::fluctuation::*;
use super::report::TestReport;
use crate::error::{Error, Result};
use crate::models::LevyModel;
use crate::rng::derive_seed;
use crate::sticks::Region;

type Runner = Box<dyn Fn(u64, u64) -> Result<TestReport> + Send + Sync>;

/// A named check with its default replicate count.
pub struct CheckEntry {
    pub name: String,
    pub default_reps: u64,
    /// Expected to fail.
    pub negative_control: bool,
    runner: Runner,
}

impl CheckEntry {
    fn new(name: impl Into<String>, default_reps: u64, runner: impl Fn(u64, u64) -> Result<TestReport> + Send + Sync + 'static) -> Self {
        Self { name: name.into(), default_reps, negative_control: false, runner: Box::new(runner) }
    }

    fn negative(mut self) -> Self {
        self.negative_control = true;
        self
    }

    /// Seed of this check's replicate streams under `master_seed`.
    pub fn seed(&self, master_seed: u64) -> u64 {
        derive_seed(master_seed, &self.name)
    }
}

impl std::fmt::Debug for CheckEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckEntry")
            .field("name", &self.name)
            .field("default_reps", &self.default_reps)
            .field("negative_control", &self.negative_control)
            .finish()
    }
}

fn bm() -> LevyModel {
    LevyModel::brownian(1.0, 0.0).expect("valid parameters")
}

fn cauchy() -> LevyModel {
    LevyModel::cauchy(1.0).expect("valid parameters")
}

/// Family prefixes in the order `verify all` runs them.
pub const CHECK_ORDER: &[&str] = &[
    "chord_probability",
    "discrete_invariance",
    "face_count",
    "face_law",
    "uniform_face_length",
    "poisson_ppp",
    "pecherskii_rogozin",
    "rogozin_integral",
    "cauchy_independence",
    "cauchy_gamma",
    "excursion_law",
    "argmin_support",
    "invariant_transform",
    "recursive_discovery",
    "stable_slope_count",
    "infinite_horizon",
];

/// Every check, in the documented order.
pub fn catalog() -> Vec<CheckEntry> {
    let mut v = Vec::new();
    for (model, fam) in [(bm(), "brownian"), (cauchy(), "cauchy")] {
        for n in [2usize, 10, 50] {
            let m = model;
            v.push(CheckEntry::new(format!("chord_probability/{fam}/n={n}"), 100_000, move |r, s| {
                chord_probability_check(&m, n, r, s)
            }));
        }
    }
    v.push(CheckEntry::new("discrete_invariance/brownian/n=16", 100_000, |r, s| {
        discrete_invariance_check(&bm(), 16, r, s)
    }));
    for (model, fam) in [(bm(), "brownian"), (cauchy(), "cauchy")] {
        v.push(CheckEntry::new(format!("face_count/{fam}/n=10"), 100_000, move |r, s| {
            face_count_check(&model, 10, r, s)
        }));
    }
    for (model, fam) in [(bm(), "brownian"), (cauchy(), "cauchy"), (LevyModel::gamma(), "gamma")] {
        for n_grid in [1usize << 12, 1 << 14] {
            let m = model;
            v.push(CheckEntry::new(format!("face_law/{fam}/n_grid={n_grid}"), 10_000, move |r, s| {
                face_law_check(&m, n_grid, r, s)
            }));
        }
    }
    for (model, fam) in [(bm(), "brownian"), (cauchy(), "cauchy")] {
        for n_grid in [1usize << 12, 1 << 14] {
            let m = model;
            v.push(CheckEntry::new(format!("uniform_face_length/{fam}/n_grid={n_grid}"), 10_000, move |r, s| {
                uniform_face_length_check(&m, n_grid, r, s)
            }));
        }
    }
    v.push(CheckEntry::new("poisson_ppp/brownian/theta=1", 10_000, |r, s| {
        poisson_ppp_check(&bm(), 1.0, &canonical_rectangles(), r, s)
    }));
    v.push(CheckEntry::new("pecherskii_rogozin/brownian/alpha=0.5,beta=0.3", 1_000_000, |r, s| {
        pecherskii_rogozin_check(&bm(), 1.0, 0.5, 0.3, 0.0, 16, r, s)
    }));
    v.push(CheckEntry::new("pecherskii_rogozin/brownian/alpha=0,beta=0", 1_000, |r, s| {
        pecherskii_rogozin_check(&bm(), 1.0, 0.0, 0.0, 0.0, 16, r, s)
    }));
    v.push(CheckEntry::new("rogozin_integral", 0, |_, _| rogozin_integral_check()));
    v.push(CheckEntry::new("cauchy_independence/cauchy/n_grid=4096", 10_000, |r, s| {
        cauchy_independence_check(&cauchy(), 4096, r, s)
    }));
    v.push(
        CheckEntry::new("cauchy_independence/brownian/n_grid=4096", 10_000, |r, s| {
            cauchy_independence_check(&bm(), 4096, r, s)
        })
        .negative(),
    );
    v.push(CheckEntry::new("cauchy_gamma/n_grid=16384", 10_000, |r, s| cauchy_gamma_check(1 << 14, r, s)));
    for n_grid in [1usize << 12, 1 << 14] {
        v.push(CheckEntry::new(format!("excursion_law/brownian/n_grid={n_grid}"), 10_000, move |r, s| {
            excursion_law_check(&bm(), n_grid, r, s)
        }));
    }
    v.push(CheckEntry::new("argmin_support/brownian/n_grid=1024", 100_000, |r, s| {
        argmin_support_check(&bm(), 1024, r, s)
    }));
    v.push(CheckEntry::new("argmin_support/cauchy/n_grid=1024", 100_000, |r, s| {
        argmin_support_check(&cauchy(), 1024, r, s)
    }));
    v.push(CheckEntry::new("argmin_support/brownian/cross_grid=1024,16384", 10_000, |r, s| {
        argmin_cross_grid_check(1 << 10, 1 << 14, r, s)
    }));
    v.push(
        CheckEntry::new("argmin_support/gamma/n_grid=1024", 10_000, |r, s| {
            argmin_support_check(&LevyModel::gamma(), 1024, r, s)
        })
        .negative(),
    );
    v.push(CheckEntry::new("invariant_transform/brownian/n_grid=4096", 10_000, |r, s| {
        invariant_transform_check(&bm(), 4096, r, s)
    }));
    v.push(CheckEntry::new("recursive_discovery/brownian/n_grid=4096", 10_000, |r, s| {
        recursive_discovery_check(&bm(), 4096, r, s)
    }));
    v.push(CheckEntry::new("stable_slope_count/alpha=2/slopes=(1,2)", 10_000, |r, s| {
        stable_slope_count_check(2.0, 1.0, 2.0, 1 << 14, r, s)
    }));
    v.push(CheckEntry::new("infinite_horizon/brownian_drift=1/slope<0", 10_000, |r, s| {
        let m = LevyModel::brownian(1.0, 1.0)?;
        infinite_horizon_check(&m, 0.0, 0.5, 8.0, 1 << 14, r, s)
    }));
    v
}

/// Disjoint (length, increment) rectangles used by the Poisson check.
pub fn canonical_rectangles() -> Vec<Region> {
    vec![
        Region { t1: 0.25, t2: 2.0, x1: -10.0, x2: 0.0 },
        Region { t1: 0.25, t2: 2.0, x1: 0.0, x2: 10.0 },
    ]
}

/// Entries named `pattern`, or under it as a `/`-separated prefix; `all` selects everything.
pub fn select(pattern: &str) -> Result<Vec<CheckEntry>> {
    let all = catalog();
    if pattern == "all" {
        return Ok(all);
    }
    let prefix = format!("{}/", pattern.trim_end_matches('/'));
    let chosen: Vec<CheckEntry> = all
        .into_iter()
        .filter(|e| e.name == pattern || e.name.starts_with(&prefix))
        .collect();
    if chosen.is_empty() {
        return Err(Error::Domain(format!("no check named {pattern:?}; try `all` or one of {}", CHECK_ORDER.join(", "))));
    }
    Ok(chosen)
}

/// Runs one entry under the seed derived from `master_seed` and its name.
pub fn run_entry(entry: &CheckEntry, master_seed: u64, reps: Option<u64>) -> Result<TestReport> {
    let reps = reps.unwrap_or(entry.default_reps);
    let report = (entry.runner)(reps, entry.seed(master_seed))?;
    let mut report = if entry.negative_control { report.negative_control() } else { report };
    report.name = entry.name.clone();
    Ok(report)
}

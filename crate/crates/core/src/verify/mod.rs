//! Monte Carlo checks of the distributional identities, with a fixed catalog
//! and reproducible JSON reports.

mod catalog;
mod checks;
mod fluctuation;
mod report;

use rayon::prelude::*;

use crate::error::Result;
use crate::rng::RngStream;

pub use catalog::{canonical_rectangles, catalog, run_entry, select, CheckEntry, CHECK_ORDER};
pub use checks::{
    cauchy_gamma_check, cauchy_independence_check, chord_probability_check, discrete_invariance_check,
    excursion_functionals, excursion_law_check, face_count_check, face_law_check, harmonic, invariant_transform_check,
    poisson_ppp_check, recursive_discovery_check, uniform_face_length_check,
};
pub use fluctuation::{
    argmin_cross_grid_check, argmin_support_check, infinite_horizon_check, long_horizon, pecherskii_rogozin_check,
    pecherskii_rogozin_rhs, rogozin_integral, rogozin_integral_check, stable_slope_count_check, RogozinIntegral,
};
pub use report::{summary_table, Component, TestReport, P_THRESHOLD, Z_THRESHOLD};

/// Runs `f` once per replicate on stream `(seed, r)`, in parallel, returning results in replicate order.
pub fn replicate<T, F>(seed: u64, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r);
            f(&mut rng)
        })
        .collect()
}

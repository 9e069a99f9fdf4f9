//! The two worked examples: the Delta of a European call option and the
//! correlated random walk.

mod crw;
mod delta;

pub use crw::{build_crw_model, run_crw_pipeline, CrwParams, CrwRow};
pub use delta::{
    black_scholes_delta, build_delta_model, expected_delta_limit, run_delta_pipeline, DeltaRow,
    DonskerWalk, MarketParams,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfn::{estimate, CharFnEstimate, Method};
use crate::error::Result;
use crate::model::{
    char_fn_brute_force, expectation_brute_force, expectation_by_distribution, sum_distribution,
    DspModel, DEFAULT_ENUMERATION_CAP,
};

/// How characteristic-function values are produced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub method: Method,
    pub shots: u64,
    pub ae_m: u32,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            method: Method::Exact,
            shots: 8192,
            ae_m: 6,
            seed: 0,
        }
    }
}

impl EstimatorConfig {
    pub fn estimate(&self, model: &DspModel, v: f64, seed: u64) -> Result<CharFnEstimate> {
        estimate(model, v, self.method, self.shots, self.ae_m, seed)
    }
}

/// `E[f(S_n)]` by path enumeration, or from the exact sum distribution when
/// the path count exceeds the enumeration cap.
pub fn oracle_expectation(model: &DspModel, f: impl Fn(f64) -> f64) -> Result<f64> {
    if model.path_count() <= DEFAULT_ENUMERATION_CAP as u128 {
        expectation_brute_force(model, f)
    } else {
        expectation_by_distribution(model, f, DEFAULT_ENUMERATION_CAP)
    }
}

/// `φ(v)` by enumeration, falling back to the exact sum distribution.
pub fn oracle_char_fn(model: &DspModel, v: f64) -> Result<Complex64> {
    if model.path_count() <= DEFAULT_ENUMERATION_CAP as u128 {
        char_fn_brute_force(model, v)
    } else {
        Ok(sum_distribution(model, DEFAULT_ENUMERATION_CAP)?
            .into_iter()
            .map(|(s, p)| p * Complex64::from_polar(1.0, v * s))
            .sum())
    }
}

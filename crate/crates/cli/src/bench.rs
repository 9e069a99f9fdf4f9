//! Error comparison of classical Monte Carlo, shot-sampled Pauli estimation
//! and amplitude estimation for `E[cos(v S_n)]`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qdsp_core::ae::error_bound;
use qdsp_core::applications::{oracle_char_fn, oracle_expectation};
use qdsp_core::charfn::{estimate_ae, estimate_shots, AeMode};
use qdsp_core::io::rows_to_string;
use qdsp_core::model::monte_carlo_estimate;
use qdsp_core::stats::derive_seed;
use qdsp_core::DspModel;

use crate::args::{Command, Resolved};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub shots_or_m: u64,
    /// Median absolute error over the repetitions.
    pub abs_error: f64,
    /// One-standard-error scale for sampling methods; the `8/π²`
    /// confidence bound for amplitude estimation.
    pub error_bound: f64,
    pub wall_time_s: Option<f64>,
}

fn median_abs(errors: &[f64]) -> f64 {
    let mut a: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    a.sort_by(f64::total_cmp);
    let mid = a.len() / 2;
    if a.len() % 2 == 1 {
        a[mid]
    } else {
        0.5 * (a[mid - 1] + a[mid])
    }
}

fn sweep(
    reps: u64,
    timing: bool,
    run: impl Fn(u64) -> qdsp_core::Result<f64> + Sync + Send,
) -> qdsp_core::Result<(f64, Option<f64>)> {
    let start = Instant::now();
    let errors = (0..reps)
        .into_par_iter()
        .map(run)
        .collect::<qdsp_core::Result<Vec<f64>>>()?;
    Ok((
        median_abs(&errors),
        timing.then(|| start.elapsed().as_secs_f64()),
    ))
}

pub fn run_bench(
    model: &DspModel,
    v: f64,
    reps: u64,
    shots_list: &[u64],
    m_list: &[u32],
    seed: u64,
    timing: bool,
) -> qdsp_core::Result<Vec<BenchRow>> {
    let target = oracle_char_fn(model, v)?.re;
    let second = oracle_expectation(model, |s| (v * s).cos().powi(2))?;
    let variance = (second - target * target).max(0.0);
    let a = (1.0 - target) / 2.0;
    let mut rows = Vec::new();
    for &shots in shots_list {
        let (err, time) = sweep(reps, timing, |r| {
            let s = derive_seed(seed, r as f64, 0x6d63 ^ shots);
            Ok(monte_carlo_estimate(model, |x| (v * x).cos(), shots, s)?.mean - target)
        })?;
        rows.push(BenchRow {
            method: "mc".into(),
            shots_or_m: shots,
            abs_error: err,
            error_bound: (variance / shots as f64).sqrt(),
            wall_time_s: time,
        });
    }
    for &shots in shots_list {
        let (err, time) = sweep(reps, timing, |r| {
            let s = derive_seed(seed, r as f64, 0x7368 ^ shots);
            Ok(estimate_shots(model, v, shots, s)?.value.re - target)
        })?;
        rows.push(BenchRow {
            method: "shots".into(),
            shots_or_m: shots,
            abs_error: err,
            error_bound: ((1.0 - target * target).max(0.0) / shots as f64).sqrt(),
            wall_time_s: time,
        });
    }
    for &m in m_list {
        let (err, time) = sweep(reps, timing, |r| {
            let s = derive_seed(seed, r as f64, 0x6165 ^ u64::from(m));
            Ok(estimate_ae(model, v, m, Some(s), AeMode::Cos)?.value.re - target)
        })?;
        rows.push(BenchRow {
            method: "ae".into(),
            shots_or_m: u64::from(m),
            abs_error: err,
            // the component is 1 - 2a
            error_bound: 2.0 * error_bound(a, m),
            wall_time_s: time,
        });
    }
    Ok(rows)
}

pub fn bench(cmd: &Command, r: &Resolved) -> Result<String, CliError> {
    let Command::Bench(a) = cmd else {
        unreachable!()
    };
    let path = r.model_path(&a.model)?;
    let model = DspModel::load(&path)
        .map_err(|e| CliError::Run(anyhow::anyhow!("model {}: {e}", path.display())))?;
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    if a.shots_list.iter().any(|&s| s < 2) {
        return Err(CliError::Usage(
            "--shots-list entries must be at least 2".into(),
        ));
    }
    if a.m_list.iter().any(|m| !(3..=20).contains(m)) {
        return Err(CliError::Usage("--m-list entries must be in 3..=20".into()));
    }
    let rows = run_bench(
        &model,
        a.v,
        a.reps,
        &a.shots_list,
        &a.m_list,
        r.seed,
        a.timing,
    )?;
    Ok(rows_to_string(&rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qdsp_core::LevelSpec;

    fn toy() -> DspModel {
        DspModel::independent(
            0.3,
            vec![
                LevelSpec::new(vec![0.2, 0.9], vec![0.3, 0.7]).unwrap(),
                LevelSpec::new(vec![-0.5, 0.4], vec![0.6, 0.4]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sampling_error_scales_like_inverse_sqrt() {
        let rows = run_bench(&toy(), 1.0, 200, &[100, 1000, 10000], &[], 7, false).unwrap();
        for method in ["mc", "shots"] {
            let errs: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == method)
                .map(|r| r.abs_error)
                .collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "{method}: {errs:?}");
            let slope = (errs[2] / errs[0]).log10() / 2.0;
            assert!((slope + 0.5).abs() <= 0.15, "{method}: slope {slope}");
        }
    }

    #[test]
    fn median_of_abs() {
        assert_eq!(median_abs(&[-3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_abs(&[-1.0, 4.0, 2.0, -3.0]), 2.5);
    }

    #[test]
    fn ae_bound_halves() {
        let rows = run_bench(&toy(), 1.0, 4, &[], &[4, 5, 6, 7, 8], 1, false).unwrap();
        for w in rows.windows(2) {
            let ratio = w[1].error_bound / w[0].error_bound;
            assert!((ratio - 0.5).abs() <= 0.125, "ratio {ratio}");
        }
    }

    #[test]
    fn report_is_deterministic() {
        let a = run_bench(&toy(), 0.7, 5, &[100], &[4], 3, false).unwrap();
        let b = run_bench(&toy(), 0.7, 5, &[100], &[4], 3, false).unwrap();
        assert_eq!(rows_to_string(&a).unwrap(), rows_to_string(&b).unwrap());
        assert!(a.iter().all(|r| r.wall_time_s.is_none()));
    }
}

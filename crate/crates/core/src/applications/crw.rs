use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{oracle_char_fn, EstimatorConfig};
use crate::error::Result;
use crate::fourier::{check_period, grid_point};
use crate::model::DspModel;

/// Scenario file for a correlated random walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrwParams {
    #[serde(default)]
    pub x0: f64,
    pub x_plus: f64,
    pub x_minus: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl CrwParams {
    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.model()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("walk params serialize")
    }

    pub fn model(&self) -> Result<DspModel> {
        build_crw_model(self.x0, self.x_plus, self.x_minus, &self.p, &self.q)
    }
}

/// Correlated walk with index 0 = `x_minus`, index 1 = `x_plus`;
/// `p[l]` and `q[l]` are the probabilities of index 0 after index 0 and
/// after index 1 respectively.
pub fn build_crw_model(
    x0: f64,
    x_plus: f64,
    x_minus: f64,
    p: &[f64],
    q: &[f64],
) -> Result<DspModel> {
    DspModel::correlated_walk(x0, [x_minus, x_plus], p.to_vec(), q.to_vec())
}

/// One grid point of the characteristic-function sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrwRow {
    pub l: i64,
    pub v: f64,
    pub re: f64,
    pub im: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
}

/// `φ(2πl/P)` for `l = -L..=L`. Negative `l` reuse the conjugate of the
/// positive evaluation unless `explicit_negative` is set.
pub fn run_crw_pipeline(
    model: &DspModel,
    order: usize,
    period: f64,
    estimator: &EstimatorConfig,
    explicit_negative: bool,
) -> Result<Vec<CrwRow>> {
    check_period(period)?;
    let order = order as i64;
    let direct: Vec<i64> = if explicit_negative {
        (-order..=order).collect()
    } else {
        (0..=order).collect()
    };
    let mut rows = direct
        .par_iter()
        .map(|&l| {
            let v = grid_point(l, period);
            let est = estimator.estimate(model, v, estimator.seed)?.value;
            let oracle = oracle_char_fn(model, v)?;
            Ok(CrwRow {
                l,
                v,
                re: est.re,
                im: est.im,
                oracle_re: oracle.re,
                oracle_im: oracle.im,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if !explicit_negative {
        let mirrored: Vec<CrwRow> = rows
            .iter()
            .filter(|r| r.l > 0)
            .map(|r| CrwRow {
                l: -r.l,
                v: grid_point(-r.l, period),
                re: r.re,
                im: -r.im,
                oracle_re: r.oracle_re,
                oracle_im: -r.oracle_im,
            })
            .collect();
        rows.extend(mirrored);
    }
    rows.sort_by_key(|r| r.l);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::Method;
    use crate::model::{char_fn_brute_force, enumerate_paths, LevelSpec};

    fn persistent_walk() -> DspModel {
        build_crw_model(
            0.0,
            1.0,
            -1.0,
            &[0.5, 2.0 / 3.0, 5.0 / 6.0, 1.0],
            &[0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn no_persistence_is_fair_walk() {
        let m = build_crw_model(0.0, 1.0, -1.0, &[0.5; 3], &[0.5; 3]).unwrap();
        let fair = DspModel::independent(0.0, vec![LevelSpec::fair(-1.0, 1.0); 3]).unwrap();
        for v in [0.3, 1.1, -2.0] {
            let a = char_fn_brute_force(&m, v).unwrap();
            assert!((a.re - v.cos().powi(3)).abs() < 1e-14 && a.im.abs() < 1e-14);
            assert!((a - char_fn_brute_force(&fair, v).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn full_persistence_has_two_paths() {
        let m = build_crw_model(0.0, 1.0, -1.0, &[1.0; 4], &[0.0; 4]).unwrap();
        let live: Vec<_> = enumerate_paths(&m)
            .unwrap()
            .into_iter()
            .filter(|p| p.prob > 0.0)
            .collect();
        assert_eq!(live.len(), 2);
        let mut sums: Vec<f64> = live.iter().map(|p| p.sum).collect();
        sums.sort_by(f64::total_cmp);
        assert_eq!(sums, vec![-4.0, 4.0]);
    }

    #[test]
    fn exact_grid_matches_oracle() {
        let rows = run_crw_pipeline(
            &persistent_walk(),
            100,
            100.0,
            &EstimatorConfig::default(),
            false,
        )
        .unwrap();
        assert_eq!(rows.len(), 201);
        assert_eq!(rows[100].l, 0);
        assert!((rows[100].re - 1.0).abs() < 1e-12 && rows[100].im.abs() < 1e-12);
        for r in &rows {
            assert!((r.re - r.oracle_re).abs() < 1e-10 && (r.im - r.oracle_im).abs() < 1e-10);
        }
        for i in 0..=100 {
            let (a, b) = (&rows[100 + i], &rows[100 - i]);
            assert_eq!(a.re, b.re);
            assert_eq!(a.im, -b.im);
            assert_eq!(a.v, -b.v);
        }
    }

    #[test]
    fn explicit_negatives_agree() {
        let rows = run_crw_pipeline(
            &persistent_walk(),
            10,
            100.0,
            &EstimatorConfig::default(),
            true,
        )
        .unwrap();
        for i in 0..=10 {
            let (a, b) = (&rows[10 + i], &rows[10 - i]);
            assert!((a.re - b.re).abs() < 1e-12 && (a.im + b.im).abs() < 1e-12);
        }
    }

    #[test]
    fn shots_are_seeded() {
        let cfg = EstimatorConfig {
            method: Method::Shots,
            shots: 256,
            seed: 3,
            ..EstimatorConfig::default()
        };
        let a = run_crw_pipeline(&persistent_walk(), 5, 100.0, &cfg, false).unwrap();
        assert_eq!(
            a,
            run_crw_pipeline(&persistent_walk(), 5, 100.0, &cfg, false).unwrap()
        );
    }

    #[test]
    fn params_json() {
        let text = r#"{"x_plus": 1, "x_minus": -1, "p": [0.5, 1], "q": [0.5, 0]}"#;
        let p = CrwParams::from_json(text).unwrap();
        assert_eq!(p.x0, 0.0);
        assert_eq!(CrwParams::from_json(&p.to_json()).unwrap(), p);
        assert!(
            CrwParams::from_json(r#"{"x_plus": 1, "x_minus": -1, "p": [2], "q": [0]}"#).is_err()
        );
        assert!(
            CrwParams::from_json(r#"{"x_plus": 1, "x_minus": -1, "p": [0.5], "q": []}"#).is_err()
        );
    }
}

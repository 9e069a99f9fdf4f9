use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use super::{oracle_expectation, EstimatorConfig};
use crate::error::{domain, Result};
use crate::fourier::{
    assemble_expectation, cdf_expectation, cdf_fourier_coeffs, grid_point, Evals,
};
use crate::model::{DspModel, LevelSpec};
use crate::stats::{derive_seed, normal_cdf};

/// Market scenario for a European call. Strikes are optional in the file;
/// they are usually supplied per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub mu: f64,
    pub sigma: f64,
    pub r: f64,
    #[serde(rename = "S0")]
    pub s0: f64,
    pub t: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
    #[serde(
        rename = "K",
        default,
        deserialize_with = "one_or_many",
        skip_serializing_if = "Vec::is_empty"
    )]
    pub strikes: Vec<f64>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.sigma, self.r, self.s0, self.t, self.maturity];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(domain("market parameters must be finite"));
        }
        if self.sigma <= 0.0 {
            return Err(domain(format!("sigma = {} must be positive", self.sigma)));
        }
        if self.s0 <= 0.0 {
            return Err(domain(format!("S0 = {} must be positive", self.s0)));
        }
        if !(self.t >= 0.0 && self.maturity > self.t) {
            return Err(domain(format!(
                "need T > t >= 0, got t = {}, T = {}",
                self.t, self.maturity
            )));
        }
        for &k in &self.strikes {
            check_strike(k)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("market params serialize")
    }

    /// Time to maturity `T - t`.
    pub fn tau(&self) -> f64 {
        self.maturity - self.t
    }

    /// `(ln S0 - ln K + (r + σ²/2)(T - t)) / (σ sqrt(T - t))`
    pub fn d1(&self, strike: f64) -> f64 {
        let tau = self.tau();
        ((self.s0 / strike).ln() + (self.r + 0.5 * self.sigma * self.sigma) * tau)
            / (self.sigma * tau.sqrt())
    }
}

fn check_strike(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("strike K = {k} must be positive")))
    }
}

/// Random-walk discretization of `B_t = μ_B t + σ_B W_t` on `[0, 1]` started
/// at `x0`, with steps `μ_B/n ± σ_B/sqrt(n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DonskerWalk {
    pub mu_b: f64,
    pub sigma_b: f64,
    pub n: usize,
    pub x0: f64,
}

impl DonskerWalk {
    pub fn new(mu_b: f64, sigma_b: f64, n: usize, x0: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("a walk needs n >= 1 steps"));
        }
        if !(sigma_b > 0.0 && sigma_b.is_finite()) || !mu_b.is_finite() || !x0.is_finite() {
            return Err(domain(
                "walk needs finite drift and start and positive volatility",
            ));
        }
        Ok(Self {
            mu_b,
            sigma_b,
            n,
            x0,
        })
    }

    /// The walk for the rescaled log-price of a call at strike `K`.
    pub fn for_call(params: &MarketParams, strike: f64, n: usize) -> Result<Self> {
        params.validate()?;
        check_strike(strike)?;
        let tau = params.tau();
        Self::new(
            (params.mu - 0.5 * params.sigma * params.sigma) / (params.sigma * tau.sqrt()),
            1.0 / tau.sqrt(),
            n,
            params.d1(strike),
        )
    }

    pub fn step_values(&self) -> [f64; 2] {
        let n = self.n as f64;
        let drift = self.mu_b / n;
        let spread = self.sigma_b / n.sqrt();
        [drift - spread, drift + spread]
    }

    pub fn model(&self) -> Result<DspModel> {
        let [lo, hi] = self.step_values();
        DspModel::independent(self.x0, vec![LevelSpec::fair(lo, hi); self.n])
    }

    /// `lim_{n→∞} E[Φ(S_n)] = Φ((x0 + μ_B) / sqrt(1 + σ_B²))`.
    pub fn limit_cdf_expectation(&self) -> f64 {
        normal_cdf((self.x0 + self.mu_b) / (1.0 + self.sigma_b * self.sigma_b).sqrt())
    }
}

/// Independent fair two-point model for the call Delta at strike `K`.
pub fn build_delta_model(params: &MarketParams, strike: f64, n: usize) -> Result<DspModel> {
    DonskerWalk::for_call(params, strike, n)?.model()
}

/// `Φ(d1)`.
pub fn black_scholes_delta(params: &MarketParams, strike: f64) -> Result<f64> {
    params.validate()?;
    check_strike(strike)?;
    Ok(normal_cdf(params.d1(strike)))
}

/// Continuous limit of `E[Φ(S̃_n)]` as `n → ∞`. The walk carries its own
/// Brownian term, so this differs from [`black_scholes_delta`].
pub fn expected_delta_limit(params: &MarketParams, strike: f64) -> Result<f64> {
    Ok(DonskerWalk::for_call(params, strike, 1)?.limit_cdf_expectation())
}

/// One strike of the Delta pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    #[serde(rename = "K")]
    pub strike: f64,
    pub estimate_re: f64,
    pub estimate_im: f64,
    /// Black–Scholes `Φ(d1)`.
    pub reference: f64,
    /// `E[Φ(S̃_n)]` by enumeration.
    pub brute_force: f64,
    /// Continuous-walk limit of `brute_force`.
    pub walk_limit: f64,
}

/// Evaluates `φ` on `v_l = 2πl/P` for `l = 1..=L` and assembles the CDF
/// series per strike. Rows are sorted by strike.
pub fn run_delta_pipeline(
    params: &MarketParams,
    strikes: &[f64],
    n: usize,
    order: usize,
    period: f64,
    estimator: &EstimatorConfig,
) -> Result<Vec<DeltaRow>> {
    params.validate()?;
    let spec = cdf_fourier_coeffs(period, order)?;
    let mut rows = strikes
        .par_iter()
        .map(|&strike| {
            let walk = DonskerWalk::for_call(params, strike, n)?;
            let model = walk.model()?;
            let seed = derive_seed(estimator.seed, strike, 0x44);
            let evals = (1..=order as i64)
                .into_par_iter()
                .map(|l| {
                    Ok((
                        l,
                        estimator
                            .estimate(&model, grid_point(l, period), seed)?
                            .value,
                    ))
                })
                .collect::<Result<Evals>>()?;
            Ok(DeltaRow {
                strike,
                estimate_re: cdf_expectation(&evals, period, order, model.mean())?,
                estimate_im: assemble_expectation(&spec, &evals)?.im,
                reference: black_scholes_delta(params, strike)?,
                brute_force: oracle_expectation(&model, normal_cdf)?,
                walk_limit: walk.limit_cdf_expectation(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.strike.total_cmp(&b.strike));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::Method;

    pub(crate) fn call_params() -> MarketParams {
        MarketParams {
            mu: 0.0,
            sigma: 0.02,
            r: 0.02,
            s0: 100.0,
            t: 1.0,
            maturity: 10.0,
            strikes: Vec::new(),
        }
    }

    #[test]
    fn model_parameters() {
        let p = call_params();
        let m = build_delta_model(&p, 110.0, 4).unwrap();
        let want_x0 = ((100.0f64 / 110.0).ln() + 0.0202 * 9.0) / (0.02 * 3.0);
        assert!((m.x0() - want_x0).abs() < 1e-14);
        assert!((m.x0() - 1.4415).abs() < 1e-4);
        let v = m.values(0);
        assert!((v[1] - v[0] - 1.0 / 3.0).abs() < 1e-15);
        // drift term (μ - σ²/2)/(nσ sqrt(T-t)) is the midpoint
        assert!(((v[0] + v[1]) / 2.0 - (-0.0002) / (4.0 * 0.02 * 3.0)).abs() < 1e-15);
        assert_eq!(m.level_probs(2).unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn at_the_money_forward_strike() {
        let p = call_params();
        let k = 100.0 * (0.0202f64 * 9.0).exp();
        assert!(build_delta_model(&p, k, 2).unwrap().x0().abs() < 1e-12);
        assert!((black_scholes_delta(&p, k).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_delta() {
        let p = call_params();
        assert!((black_scholes_delta(&p, 1e-9).unwrap() - 1.0).abs() < 1e-15);
        let d = black_scholes_delta(&p, 110.0).unwrap();
        assert!((d - 0.925_277_838_329_513).abs() < 1e-12);
        assert!((d - 0.9253).abs() < 1e-4);
        assert!(black_scholes_delta(&p, 0.0).is_err());
        assert!(black_scholes_delta(
            &MarketParams {
                sigma: 0.0,
                ..call_params()
            },
            100.0
        )
        .is_err());
        assert!(black_scholes_delta(
            &MarketParams {
                maturity: 1.0,
                ..call_params()
            },
            100.0
        )
        .is_err());
    }

    #[test]
    fn walk_limit_formula() {
        let p = call_params();
        let w = DonskerWalk::for_call(&p, 110.0, 256).unwrap();
        let lim = w.limit_cdf_expectation();
        let brute = oracle_expectation(&w.model().unwrap(), normal_cdf).unwrap();
        assert!((brute - lim).abs() < 1e-4, "{brute} vs {lim}");
        assert_eq!(expected_delta_limit(&p, 110.0).unwrap(), lim);
    }

    #[test]
    fn exact_pipeline_matches_oracle() {
        let p = call_params();
        let strikes = [220.0, 25.0, 110.0];
        let rows =
            run_delta_pipeline(&p, &strikes, 4, 100, 100.0, &EstimatorConfig::default()).unwrap();
        let ks: Vec<f64> = rows.iter().map(|r| r.strike).collect();
        assert_eq!(ks, vec![25.0, 110.0, 220.0]);
        for r in &rows {
            assert!((r.estimate_re - r.brute_force).abs() < 1e-9, "{r:?}");
            assert!(r.estimate_im.abs() < 1e-12);
        }
        assert!((rows[1].brute_force - 0.91372).abs() < 1e-5);
    }

    #[test]
    fn shot_pipeline_is_seeded() {
        let cfg = EstimatorConfig {
            method: Method::Shots,
            shots: 512,
            seed: 11,
            ..EstimatorConfig::default()
        };
        let a = run_delta_pipeline(&call_params(), &[105.0, 120.0], 4, 10, 100.0, &cfg).unwrap();
        let b = run_delta_pipeline(&call_params(), &[105.0, 120.0], 4, 10, 100.0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn params_json() {
        let text = r#"{"mu": 0, "sigma": 0.02, "r": 0.02, "S0": 100, "t": 1, "T": 10, "K": 110}"#;
        let p = MarketParams::from_json(text).unwrap();
        assert_eq!(p.strikes, vec![110.0]);
        let list =
            r#"{"mu": 0, "sigma": 0.02, "r": 0.02, "S0": 100, "t": 1, "T": 10, "K": [25, 55]}"#;
        assert_eq!(
            MarketParams::from_json(list).unwrap().strikes,
            vec![25.0, 55.0]
        );
        assert_eq!(MarketParams::from_json(&p.to_json()).unwrap(), p);
        assert!(MarketParams::from_json(r#"{"mu": 0}"#).is_err());
        let bad = r#"{"mu": 0, "sigma": -1, "r": 0.02, "S0": 100, "t": 1, "T": 10}"#;
        assert!(MarketParams::from_json(bad).is_err());
        let extra = r#"{"mu": 0, "sigma": 1, "r": 0.02, "S0": 100, "t": 1, "T": 10, "x": 1}"#;
        assert!(MarketParams::from_json(extra).is_err());
    }
}

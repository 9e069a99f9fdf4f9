//! Characteristic-function estimates `φ(v) = E[e^{ivS_n}]` from the compiled
//! circuits: exact expectation values, shot sampling, and amplitude
//! estimation.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::ae::{run_ae, AeProblem, AeReadout};
use crate::circuit::{compile, MeasurementScheme};
use crate::error::{domain, Result};
use crate::model::DspModel;
use crate::statevector::{Gate, Pauli, Statevector};
use crate::stats::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Shots,
    Ae,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Shots => "shots",
            Method::Ae => "ae",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "shots" => Ok(Method::Shots),
            "ae" => Ok(Method::Ae),
            other => Err(domain(format!("unknown method '{other}'"))),
        }
    }
}

/// Which component amplitude estimation recovers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AeMode {
    /// `E[cos S_n]`
    Cos,
    /// `E[sin S_n]`
    Sin,
}

impl AeMode {
    fn tag(self) -> u64 {
        match self {
            AeMode::Cos => 3,
            AeMode::Sin => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharFnEstimate {
    pub v: f64,
    pub value: Complex64,
    pub method: Method,
    pub shots: Option<u64>,
    pub stderr_re: Option<f64>,
    pub stderr_im: Option<f64>,
    pub ae_m: Option<u32>,
}

fn pauli_state(model: &DspModel, v: f64) -> Result<Statevector> {
    compile(model, &MeasurementScheme::pauli(v))?.simulate()
}

/// `⟨σ_x⟩ + i⟨σ_y⟩` of the data qubit, computed from the statevector.
pub fn estimate_exact(model: &DspModel, v: f64) -> Result<CharFnEstimate> {
    let s = pauli_state(model, v)?;
    let data = model.n();
    Ok(CharFnEstimate {
        v,
        value: Complex64::new(
            s.expval_pauli(Pauli::X, data)?,
            s.expval_pauli(Pauli::Y, data)?,
        ),
        method: Method::Exact,
        shots: None,
        stderr_re: None,
        stderr_im: None,
        ae_m: None,
    })
}

/// Samples `shots` outcomes of the data qubit in the given basis and returns
/// the `±1` mean and its standard error.
fn sample_pauli(
    base: &Statevector,
    data: usize,
    axis: Pauli,
    shots: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut s = base.clone();
    match axis {
        Pauli::X => s.apply(&Gate::h(data))?,
        Pauli::Y => {
            s.apply(&Gate::phase(data, -FRAC_PI_2))?;
            s.apply(&Gate::h(data))?;
        }
        Pauli::Z => {}
    }
    let p0 = s.subspace_probability(data, 0)?.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = Binomial::new(shots, p0)
        .map_err(|e| domain(e.to_string()))?
        .sample(&mut rng);
    let p_hat = k as f64 / shots as f64;
    let stderr = 2.0 * (p_hat * (1.0 - p_hat) / shots as f64).sqrt();
    Ok((2.0 * p_hat - 1.0, stderr))
}

/// Two independent shot batches, one per Pauli axis.
pub fn estimate_shots(model: &DspModel, v: f64, shots: u64, seed: u64) -> Result<CharFnEstimate> {
    if shots < 2 {
        return Err(domain("shots must be at least 2"));
    }
    let s = pauli_state(model, v)?;
    let data = model.n();
    let (re, se_re) = sample_pauli(&s, data, Pauli::X, shots, derive_seed(seed, v, 1))?;
    let (im, se_im) = sample_pauli(&s, data, Pauli::Y, shots, derive_seed(seed, v, 2))?;
    Ok(CharFnEstimate {
        v,
        value: Complex64::new(re, im),
        method: Method::Shots,
        shots: Some(shots),
        stderr_re: Some(se_re),
        stderr_im: Some(se_im),
        ae_m: None,
    })
}

/// The amplitude-estimation problem whose good-subspace weight `a`
/// satisfies `1 - 2a = E[cos(vS_n)]` (cos mode) or `E[sin(vS_n)]` (sin mode).
pub fn ae_problem(model: &DspModel, v: f64, m: u32, mode: AeMode) -> Result<AeProblem> {
    let scheme = match mode {
        AeMode::Cos => MeasurementScheme::amplitude_cos(v),
        AeMode::Sin => MeasurementScheme::amplitude_sin(v),
    };
    AeProblem::new(compile(model, &scheme)?, model.n(), m)
}

/// One component of `φ(v)` by amplitude estimation. With `seed = None` the
/// most likely outcome is read; otherwise one outcome is sampled.
pub fn estimate_ae(
    model: &DspModel,
    v: f64,
    m: u32,
    seed: Option<u64>,
    mode: AeMode,
) -> Result<CharFnEstimate> {
    if m < 3 {
        return Err(domain(format!(
            "amplitude estimation needs m >= 3, got {m}"
        )));
    }
    let problem = ae_problem(model, v, m, mode)?;
    let readout = match seed {
        None => AeReadout::MostLikely,
        Some(s) => AeReadout::Sampled {
            seed: derive_seed(s, v, mode.tag()),
        },
    };
    let component = 1.0 - 2.0 * run_ae(&problem, readout)?.a_hat;
    let value = match mode {
        AeMode::Cos => Complex64::new(component, 0.0),
        AeMode::Sin => Complex64::new(0.0, component),
    };
    Ok(CharFnEstimate {
        v,
        value,
        method: Method::Ae,
        shots: None,
        stderr_re: None,
        stderr_im: None,
        ae_m: Some(m),
    })
}

/// Both components by amplitude estimation.
pub fn estimate_ae_complex(
    model: &DspModel,
    v: f64,
    m: u32,
    seed: Option<u64>,
) -> Result<CharFnEstimate> {
    let re = estimate_ae(model, v, m, seed, AeMode::Cos)?;
    let im = estimate_ae(model, v, m, seed, AeMode::Sin)?;
    Ok(CharFnEstimate {
        value: re.value + im.value,
        ..re
    })
}

/// Dispatches on `method`. `shots` is used by the shot method and `m` by
/// amplitude estimation.
pub fn estimate(
    model: &DspModel,
    v: f64,
    method: Method,
    shots: u64,
    m: u32,
    seed: u64,
) -> Result<CharFnEstimate> {
    match method {
        Method::Exact => estimate_exact(model, v),
        Method::Shots => estimate_shots(model, v, shots, seed),
        Method::Ae => estimate_ae_complex(model, v, m, Some(seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ae::error_bound;
    use crate::model::{char_fn_brute_force, LevelSpec};
    use std::f64::consts::PI;

    fn fair_walk(n: usize) -> DspModel {
        DspModel::independent(0.0, vec![LevelSpec::fair(-1.0, 1.0); n]).unwrap()
    }

    fn crw() -> DspModel {
        DspModel::correlated_walk(
            0.0,
            [-1.0, 1.0],
            vec![0.5, 2.0 / 3.0, 5.0 / 6.0, 1.0],
            vec![0.5, 1.0 / 3.0, 1.0 / 6.0, 0.0],
        )
        .unwrap()
    }

    fn skewed() -> DspModel {
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
    fn exact_matches_oracle() {
        let one = estimate_exact(&crw(), 0.0).unwrap().value;
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let v = 2.0 * PI * 10.0 / 100.0;
        let got = estimate_exact(&crw(), v).unwrap().value;
        assert!((got - char_fn_brute_force(&crw(), v).unwrap()).norm() < 1e-10);
        for v in [-2.1, 0.4, 1.7] {
            let got = estimate_exact(&skewed(), v).unwrap().value;
            assert!((got - char_fn_brute_force(&skewed(), v).unwrap()).norm() < 1e-10);
            let neg = estimate_exact(&skewed(), -v).unwrap().value;
            assert!((got - neg.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn shots_at_zero_are_exact() {
        let e = estimate_shots(&crw(), 0.0, 100, 9).unwrap();
        // every σ_x outcome is +1; the σ_y batch is a fair coin
        assert_eq!(e.value.re, 1.0);
        assert_eq!(e.stderr_re, Some(0.0));
        assert!(e.value.im.abs() <= 5.0 * e.stderr_im.unwrap());
        assert!(estimate_shots(&crw(), 0.0, 1, 9).is_err());
    }

    #[test]
    fn shots_near_oracle_and_seeded() {
        let m = fair_walk(2);
        let oracle = char_fn_brute_force(&m, 1.0).unwrap();
        let e = estimate_shots(&m, 1.0, 100_000, 17).unwrap();
        assert!((e.value.re - oracle.re).abs() <= 5.0 * e.stderr_re.unwrap());
        assert!((e.value.im - oracle.im).abs() <= 5.0 * e.stderr_im.unwrap().max(1e-3));
        assert_eq!(e, estimate_shots(&m, 1.0, 100_000, 17).unwrap());
        assert_ne!(e.value, estimate_shots(&m, 1.0, 100_000, 18).unwrap().value);
    }

    #[test]
    fn stderr_scales_with_shots() {
        let m = skewed();
        let lo = estimate_shots(&m, 1.3, 1_000, 4)
            .unwrap()
            .stderr_re
            .unwrap();
        let hi = estimate_shots(&m, 1.3, 100_000, 4)
            .unwrap()
            .stderr_re
            .unwrap();
        let ratio = lo / hi;
        assert!((ratio - 10.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn ae_on_zero_model_reads_one() {
        let m = DspModel::independent(0.0, vec![LevelSpec::fair(0.0, 0.0); 2]).unwrap();
        let e = estimate_ae(&m, 1.0, 4, None, AeMode::Cos).unwrap();
        assert_eq!(e.value, Complex64::new(1.0, 0.0));
        assert!(estimate_ae(&m, 1.0, 2, None, AeMode::Cos).is_err());
    }

    #[test]
    fn ae_within_bound() {
        let m = skewed();
        let v = 1.1;
        let oracle = char_fn_brute_force(&m, v).unwrap();
        let m_anc = 7;
        let cos_a = (1.0 - oracle.re) / 2.0;
        let est = estimate_ae(&m, v, m_anc, None, AeMode::Cos).unwrap();
        assert!((est.value.re - oracle.re).abs() <= 2.0 * error_bound(cos_a, m_anc) + 1e-12);
        let sin_a = (1.0 - oracle.im) / 2.0;
        let est = estimate_ae(&m, v, m_anc, None, AeMode::Sin).unwrap();
        assert!((est.value.im - oracle.im).abs() <= 2.0 * error_bound(sin_a, m_anc) + 1e-12);
    }

    #[test]
    fn ae_sin_on_symmetric_walk() {
        let m = fair_walk(2);
        let est = estimate_ae(&m, 0.9, 5, None, AeMode::Sin).unwrap();
        assert!(est.value.im.abs() <= 2.0 * error_bound(0.5, 5));
    }

    #[test]
    fn dispatch() {
        let m = fair_walk(1);
        let e = estimate(&m, 0.5, Method::Exact, 0, 0, 0).unwrap();
        assert_eq!(e.method, Method::Exact);
        assert_eq!(e.shots, None);
        let s = estimate(&m, 0.5, Method::Shots, 64, 0, 1).unwrap();
        assert_eq!(s.shots, Some(64));
        let a = estimate(&m, 0.5, Method::Ae, 0, 4, 1).unwrap();
        assert_eq!(a.ae_m, Some(4));
        assert_eq!("AE".parse::<Method>().unwrap(), Method::Ae);
        assert!("mc".parse::<Method>().is_err());
    }
}

//! Fourier-series expectations `E[f_L(S)] = Σ_{|l|≤L} c_l φ(2πl/P)`.
//!
//! The closed-form CDF coefficients `c_0 = 1/2`, `c_n = -i e^{-2π²n²/P²}/(2πn)`
//! are the coefficients of the smooth periodic function `Φ(x) - x/P` on
//! `[-P/2, P/2]`. Summing them against `φ` yields `E[Φ(S)] - E[S]/P`; the
//! exact linear term is added back by [`cdf_expectation`].

use std::cell::Cell;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Characteristic-function evaluations keyed by `l`, with `v_l = 2πl/P`.
pub type Evals = BTreeMap<i64, Complex64>;

/// Evaluation points `v_l = 2πl/P`.
pub fn grid_point(l: i64, period: f64) -> f64 {
    2.0 * PI * l as f64 / period
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourierSpec {
    period: f64,
    order: usize,
    /// `coeffs[l + order]` holds `c_l`.
    coeffs: Vec<Complex64>,
}

impl FourierSpec {
    pub fn new(period: f64, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(domain(format!("period P = {period} must be positive")));
        }
        if coeffs.len() != 2 * order + 1 {
            return Err(domain(format!(
                "order {order} needs {} coefficients, got {}",
                2 * order + 1,
                coeffs.len()
            )));
        }
        Ok(Self {
            period,
            order,
            coeffs,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeff(&self, l: i64) -> Complex64 {
        let idx = l + self.order as i64;
        if idx < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs
            .get(idx as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// `(l, c_l)` for `l = -L..=L`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let order = self.order as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 - order, *c))
    }

    /// Evaluates the truncated series at `x`.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.iter()
            .map(|(l, c)| c * Complex64::from_polar(1.0, grid_point(l, self.period) * x))
            .sum()
    }

    /// Writes `l,re,im` rows.
    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["l", "re", "im"])?;
        for (l, c) in self.iter() {
            w.write_record([l.to_string(), c.re.to_string(), c.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn check_period(period: f64) -> Result<()> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("period P = {period} must be positive")))
    }
}

/// `|c_n|` envelope of the CDF coefficients.
fn cdf_weight(n: i64, period: f64) -> f64 {
    let n = n as f64;
    (-2.0 * PI * PI * n * n / (period * period)).exp() / (2.0 * PI * n)
}

/// Closed-form coefficients for the normal CDF.
pub fn cdf_fourier_coeffs(period: f64, order: usize) -> Result<FourierSpec> {
    check_period(period)?;
    if order < 1 {
        return Err(domain("CDF series needs order L >= 1"));
    }
    let coeffs = (-(order as i64)..=order as i64)
        .map(|l| {
            if l == 0 {
                Complex64::new(0.5, 0.0)
            } else {
                Complex64::new(0.0, -cdf_weight(l, period))
            }
        })
        .collect();
    FourierSpec::new(period, order, coeffs)
}

/// Coefficients `c_n = (1/P) ∫_{-P/2}^{P/2} f(x) e^{-2πinx/P} dx` by adaptive
/// double-exponential quadrature, each to an absolute error of `1e-9`.
pub fn numeric_fourier_coeffs(
    f: impl Fn(f64) -> f64,
    period: f64,
    order: usize,
) -> Result<FourierSpec> {
    check_period(period)?;
    const TOL: f64 = 1e-9;
    let pieces = (2 * order).max(8);
    let width = period / pieces as f64;
    let bad = Cell::new(false);
    let g = |x: f64| {
        let y = f(x);
        if !y.is_finite() {
            bad.set(true);
        }
        y
    };
    let mut coeffs = Vec::with_capacity(2 * order + 1);
    for l in -(order as i64)..=order as i64 {
        let w = grid_point(l, period);
        let mut re = 0.0;
        let mut im = 0.0;
        for i in 0..pieces {
            let a = -period / 2.0 + i as f64 * width;
            let b = a + width;
            let target = 0.1 * TOL * period / pieces as f64;
            let cr =
                quadrature::double_exponential::integrate(|x| g(x) * (w * x).cos(), a, b, target);
            let ci =
                quadrature::double_exponential::integrate(|x| g(x) * (w * x).sin(), a, b, target);
            if bad.get() || cr.error_estimate > 10.0 * target || ci.error_estimate > 10.0 * target {
                return Err(Error::QuadratureFailure { a, b });
            }
            re += cr.integral;
            im -= ci.integral;
        }
        coeffs.push(Complex64::new(re / period, im / period));
    }
    FourierSpec::new(period, order, coeffs)
}

/// `φ(2πl/P)`, falling back to `conj φ(-2πl/P)`.
pub fn lookup(evals: &Evals, l: i64) -> Result<Complex64> {
    if let Some(z) = evals.get(&l) {
        Ok(*z)
    } else if let Some(z) = evals.get(&-l) {
        Ok(z.conj())
    } else if l == 0 {
        Ok(Complex64::new(1.0, 0.0))
    } else {
        Err(Error::MissingEval(l))
    }
}

/// `Σ_{|l|≤L} c_l φ(2πl/P)`.
pub fn assemble_expectation(spec: &FourierSpec, evals: &Evals) -> Result<Complex64> {
    spec.iter()
        .try_fold(Complex64::new(0.0, 0.0), |acc, (l, c)| {
            Ok(acc
                + if c == Complex64::new(0.0, 0.0) {
                    c
                } else {
                    c * lookup(evals, l)?
                })
        })
}

/// `1/2 - Σ'_{0<|l|≤L} (i/2πl) e^{-2π²l²/P²} φ(2πl/P)`, real part.
pub fn delta_sum_form(evals: &Evals, period: f64, order: usize) -> Result<f64> {
    check_period(period)?;
    let mut total = Complex64::new(0.5, 0.0);
    for l in 1..=order as i64 {
        for s in [l, -l] {
            let w = cdf_weight(s, period);
            total -= Complex64::new(0.0, w) * lookup(evals, s)?;
        }
    }
    Ok(total.re)
}

/// `E[Φ(S)]` from the CDF series: `delta_sum_form + E[S]/P`.
pub fn cdf_expectation(evals: &Evals, period: f64, order: usize, mean: f64) -> Result<f64> {
    Ok(delta_sum_form(evals, period, order)? + mean / period)
}

/// Magnitude of the two outermost terms `|c_L φ_L| + |c_{-L} φ_{-L}|`, an
/// empirical indicator of the truncation error.
pub fn tail_magnitude(spec: &FourierSpec, evals: &Evals) -> Result<f64> {
    let l = spec.order() as i64;
    if l == 0 {
        return Ok(0.0);
    }
    Ok((spec.coeff(l) * lookup(evals, l)?).norm() + (spec.coeff(-l) * lookup(evals, -l)?).norm())
}

/// A warning when the attainable range `[lo, hi]` leaves `[-P/2, P/2]`.
pub fn periodization_warning(lo: f64, hi: f64, period: f64) -> Option<String> {
    let half = period / 2.0;
    (lo < -half || hi > half).then(|| {
        format!("attainable range [{lo}, {hi}] exceeds [-{half}, {half}]; the series is periodic with period {period}")
    })
}

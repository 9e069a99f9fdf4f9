use qdsp_core::applications::{
    black_scholes_delta, build_crw_model, build_delta_model, expected_delta_limit,
    oracle_expectation, run_crw_pipeline, run_delta_pipeline, CrwRow, DeltaRow, EstimatorConfig,
    MarketParams,
};
use qdsp_core::fourier::{assemble_expectation, grid_point, numeric_fourier_coeffs, Evals};
use qdsp_core::io::{read_rows, rows_to_string};
use qdsp_core::model::{expectation_brute_force, monte_carlo_estimate};
use qdsp_core::stats::normal_cdf;
use qdsp_core::{DspModel, LevelSpec, Method};

fn call_params() -> MarketParams {
    MarketParams::from_json(
        r#"{"mu": 0.0, "sigma": 0.02, "r": 0.02, "S0": 100.0, "t": 1.0, "T": 10.0}"#,
    )
    .unwrap()
}

// E[Φ(S̃_n)] at K = 110 from a binomial sum in scipy.
const DONSKER: [(usize, f64); 4] = [
    (4, 0.9137222182932524),
    (16, 0.9137604174661109),
    (64, 0.9137699647030848),
    (256, 0.9137723509024276),
];

#[test]
fn donsker_table() {
    let p = call_params();
    for (n, want) in DONSKER {
        let m = build_delta_model(&p, 110.0, n).unwrap();
        let got = oracle_expectation(&m, normal_cdf).unwrap();
        assert!((got - want).abs() < 1e-12, "n={n}: {got} vs {want}");
    }
    let limit = expected_delta_limit(&p, 110.0).unwrap();
    assert!((limit - 0.9137731462388043).abs() < 1e-13);
    assert!((black_scholes_delta(&p, 110.0).unwrap() - 0.925277838329513).abs() < 1e-13);
    // the walk converges to its own limit, not to Φ(d1)
    let gaps: Vec<f64> = DONSKER.iter().map(|(_, e)| limit - e).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
}

#[test]
fn delta_pipeline_rows() {
    let strikes = [110.0, 25.0, 220.0];
    let rows = run_delta_pipeline(
        &call_params(),
        &strikes,
        4,
        100,
        100.0,
        &EstimatorConfig::default(),
    )
    .unwrap();
    assert_eq!(
        rows.iter().map(|r| r.strike).collect::<Vec<_>>(),
        vec![25.0, 110.0, 220.0]
    );
    let r110 = &rows[1];
    assert!((r110.estimate_re - DONSKER[0].1).abs() < 1e-10);
    assert!((r110.brute_force - DONSKER[0].1).abs() < 1e-12);
    for r in &rows {
        assert!(r.estimate_im.abs() < 1e-12);
        assert!((r.estimate_re - r.brute_force).abs() < 1e-10);
    }
    assert!(rows[0].estimate_re > 0.999 && rows[2].estimate_re < 0.2);
    let text = rows_to_string(&rows).unwrap();
    assert!(text.starts_with("K,estimate_re,estimate_im,reference,brute_force,walk_limit\n"));
    assert_eq!(read_rows::<DeltaRow>(text.as_bytes()).unwrap(), rows);
}

#[test]
fn delta_pipeline_with_shots_is_close() {
    let est = EstimatorConfig {
        method: Method::Shots,
        shots: 8192,
        seed: 5,
        ..EstimatorConfig::default()
    };
    let noisy = run_delta_pipeline(&call_params(), &[110.0], 4, 20, 100.0, &est).unwrap();
    let exact = run_delta_pipeline(
        &call_params(),
        &[110.0],
        4,
        20,
        100.0,
        &EstimatorConfig::default(),
    )
    .unwrap();
    // L = 20 truncation alone costs about 0.025 here; compare like with like
    assert!((exact[0].estimate_re - exact[0].brute_force).abs() > 0.01);
    assert!(
        (noisy[0].estimate_re - exact[0].estimate_re).abs() < 0.02,
        "{noisy:?}"
    );
}

#[test]
fn crw_pipeline_csv() {
    let m = build_crw_model(0.0, 1.0, -1.0, &[0.5, 0.9, 0.1], &[0.5, 0.2, 0.7]).unwrap();
    let rows = run_crw_pipeline(&m, 12, 50.0, &EstimatorConfig::default(), false).unwrap();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows.first().unwrap().l, -12);
    for r in &rows {
        assert!((r.v - grid_point(r.l, 50.0)).abs() < 1e-15);
        assert!((r.re - r.oracle_re).abs() < 1e-12 && (r.im - r.oracle_im).abs() < 1e-12);
    }
    let text = rows_to_string(&rows).unwrap();
    assert_eq!(read_rows::<CrwRow>(text.as_bytes()).unwrap(), rows);
}

#[test]
fn smooth_expectation_from_numeric_coefficients() {
    let m = DspModel::independent(
        0.1,
        vec![
            LevelSpec::new(vec![-0.6, 0.8], vec![0.35, 0.65]).unwrap(),
            LevelSpec::new(vec![0.3, -0.2], vec![0.5, 0.5]).unwrap(),
            LevelSpec::new(vec![1.1, -0.9], vec![0.2, 0.8]).unwrap(),
        ],
    )
    .unwrap();
    let f = |x: f64| (-x * x).exp() * (2.0 * x).cos();
    let (period, order) = (16.0, 40);
    let spec = numeric_fourier_coeffs(f, period, order).unwrap();
    let evals: Evals = (-(order as i64)..=order as i64)
        .map(|l| {
            let v = grid_point(l, period);
            (l, qdsp_core::charfn::estimate_exact(&m, v).unwrap().value)
        })
        .collect();
    let got = assemble_expectation(&spec, &evals).unwrap();
    let want = expectation_brute_force(&m, f).unwrap();
    assert!((got.re - want).abs() < 1e-9, "{got} vs {want}");
    assert!(got.im.abs() < 1e-12);
    let mc = monte_carlo_estimate(&m, f, 200_000, 9).unwrap();
    assert!((mc.mean - want).abs() < 5.0 * mc.stderr);
}

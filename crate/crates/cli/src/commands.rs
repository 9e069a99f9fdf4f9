use rayon::prelude::*;

use qdsp_core::ae::{error_bound, run_ae, AeReadout};
use qdsp_core::applications::{
    run_crw_pipeline, run_delta_pipeline, CrwParams, DonskerWalk, EstimatorConfig, MarketParams,
};
use qdsp_core::charfn::{ae_problem, AeMode};
use qdsp_core::fourier::{grid_point, periodization_warning};
use qdsp_core::io::{rows_to_string, CharFnRow, PmfRow};
use qdsp_core::DspModel;

use crate::args::{Command, ModeArg, Resolved};
use crate::CliError;

fn load_model(path: &std::path::Path) -> Result<DspModel, CliError> {
    DspModel::load(path)
        .map_err(|e| CliError::Run(anyhow::anyhow!("model {}: {e}", path.display())))
}

fn estimator(r: &Resolved) -> EstimatorConfig {
    EstimatorConfig {
        method: r.method,
        shots: r.shots,
        ae_m: r.ae_m,
        seed: r.seed,
    }
}

fn warn_range(model: &DspModel, period: f64) {
    let (lo, hi) = model.attainable_range();
    if let Some(w) = periodization_warning(lo, hi, period) {
        eprintln!("warning: {w}");
    }
}

pub fn charfn(cmd: &Command, r: &Resolved) -> Result<String, CliError> {
    let Command::Charfn(a) = cmd else {
        unreachable!()
    };
    let model = load_model(&r.model_path(&a.model)?)?;
    warn_range(&model, r.period);
    let est = estimator(r);
    let order = r.order as i64;
    let points: Vec<f64> = if !a.v.is_empty() {
        a.v.clone()
    } else if a.explicit_negative {
        (-order..=order).map(|l| grid_point(l, r.period)).collect()
    } else {
        (0..=order).map(|l| grid_point(l, r.period)).collect()
    };
    let mut rows = points
        .par_iter()
        .map(|&v| Ok(CharFnRow::from(&est.estimate(&model, v, r.seed)?)))
        .collect::<Result<Vec<_>, qdsp_core::Error>>()?;
    if a.v.is_empty() && !a.explicit_negative {
        let mirrored: Vec<CharFnRow> = rows[1..]
            .iter()
            .enumerate()
            .rev()
            .map(|(i, row)| CharFnRow {
                v: grid_point(-(i as i64 + 1), r.period),
                im: -row.im,
                ..row.clone()
            })
            .collect();
        rows.splice(0..0, mirrored);
    }
    Ok(rows_to_string(&rows)?)
}

pub fn delta(cmd: &Command, r: &Resolved) -> Result<String, CliError> {
    let Command::Delta(a) = cmd else {
        unreachable!()
    };
    let path = r.params_path(&a.params)?;
    let params = MarketParams::load(&path)
        .map_err(|e| CliError::Run(anyhow::anyhow!("params {}: {e}", path.display())))?;
    let strikes = if !a.strikes.is_empty() {
        a.strikes.clone()
    } else if !r.strikes.is_empty() {
        r.strikes.clone()
    } else {
        params.strikes.clone()
    };
    if strikes.is_empty() {
        return Err(CliError::Usage(
            "no strikes: pass --K or set K in the parameter file".into(),
        ));
    }
    let n = a.n.unwrap_or(r.n);
    if n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    for &k in &strikes {
        warn_range(&DonskerWalk::for_call(&params, k, n)?.model()?, r.period);
    }
    let rows = run_delta_pipeline(&params, &strikes, n, r.order, r.period, &estimator(r))?;
    Ok(rows_to_string(&rows)?)
}

pub fn crw(cmd: &Command, r: &Resolved) -> Result<String, CliError> {
    let Command::Crw(a) = cmd else { unreachable!() };
    let path = r.params_path(&a.params)?;
    let params = CrwParams::load(&path)
        .map_err(|e| CliError::Run(anyhow::anyhow!("params {}: {e}", path.display())))?;
    let model = params.model()?;
    warn_range(&model, r.period);
    let rows = run_crw_pipeline(
        &model,
        r.order,
        r.period,
        &estimator(r),
        a.explicit_negative,
    )?;
    Ok(rows_to_string(&rows)?)
}

pub fn ae_demo(cmd: &Command, r: &Resolved) -> Result<String, CliError> {
    let Command::AeDemo(a) = cmd else {
        unreachable!()
    };
    let model = load_model(&r.model_path(&a.model)?)?;
    let mode = match a.mode {
        ModeArg::Cos => AeMode::Cos,
        ModeArg::Sin => AeMode::Sin,
    };
    if !(1..=20).contains(&r.ae_m) {
        return Err(CliError::Usage("--ae-m must be in 1..=20".into()));
    }
    let problem = ae_problem(&model, a.v, r.ae_m, mode)?;
    let exact_a = problem
        .prep
        .simulate()?
        .subspace_probability(problem.flag_qubit, 1)?;
    let result = run_ae(&problem, AeReadout::MostLikely)?;
    eprintln!(
        "a = {exact_a}, y = {}, a_hat = {}, bound = {}",
        result.y,
        result.a_hat,
        error_bound(exact_a, r.ae_m)
    );
    let pmf = result.distribution.unwrap_or_default();
    let rows: Vec<PmfRow> = pmf
        .iter()
        .enumerate()
        .map(|(y, &p)| PmfRow {
            y: y as u64,
            probability: p,
            a_hat: qdsp_core::ae::a_from_outcome(y as u64, r.ae_m),
        })
        .collect();
    Ok(rows_to_string(&rows)?)
}

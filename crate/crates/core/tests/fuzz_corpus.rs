//! Replays the fuzz corpus through the parser entry points on stable.

use std::path::{Path, PathBuf};

use qdsp_core::applications::{CrwParams, CrwRow, DeltaRow, MarketParams};
use qdsp_core::io::{read_rows, AmplitudeRow, CharFnRow, CoeffRow, PmfRow};
use qdsp_core::{Circuit, DspModel};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

fn text(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap()
}

#[test]
fn model_json() {
    let mut accepted = 0;
    for (path, bytes) in seeds("model_json") {
        if let Ok(m) = DspModel::from_json(text(&bytes)) {
            let again = DspModel::from_json(&m.to_json()).unwrap();
            assert_eq!((again.n(), again.k()), (m.n(), m.k()), "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn market_params_json() {
    let results: Vec<bool> = seeds("market_params_json")
        .iter()
        .map(|(_, b)| MarketParams::from_json(text(b)).is_ok())
        .collect();
    assert!(results.contains(&true) && results.contains(&false));
}

#[test]
fn crw_params_json() {
    for (path, bytes) in seeds("crw_params_json") {
        let p = CrwParams::from_json(text(&bytes))
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        p.model().unwrap();
    }
}

#[test]
fn circuit_text() {
    for (path, bytes) in seeds("circuit_text") {
        let c =
            Circuit::from_text(text(&bytes)).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = Circuit::from_text(&c.to_text()).unwrap();
        assert_eq!(again, c);
        let sv = c.simulate().unwrap();
        assert!((sv.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn csv_rows() {
    let mut parsed = 0;
    for (_, bytes) in seeds("csv_rows") {
        let b = bytes.as_slice();
        parsed += [
            read_rows::<CharFnRow>(b).is_ok(),
            read_rows::<CoeffRow>(b).is_ok(),
            read_rows::<PmfRow>(b).is_ok(),
            read_rows::<AmplitudeRow>(b).is_ok(),
            read_rows::<CrwRow>(b).is_ok(),
            read_rows::<DeltaRow>(b).is_ok(),
        ]
        .iter()
        .filter(|&&ok| ok)
        .count();
    }
    assert!(parsed >= 6);
}

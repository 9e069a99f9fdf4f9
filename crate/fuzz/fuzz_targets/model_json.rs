#![no_main]

use libfuzzer_sys::fuzz_target;
use qdsp_core::DspModel;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = DspModel::from_json(text) {
        // accepted models must survive a round trip
        let again = DspModel::from_json(&model.to_json()).expect("round trip");
        assert_eq!(again.n(), model.n());
        assert_eq!(again.k(), model.k());
    }
});

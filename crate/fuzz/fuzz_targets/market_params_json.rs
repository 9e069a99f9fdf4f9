#![no_main]

use libfuzzer_sys::fuzz_target;
use qdsp_core::applications::MarketParams;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = MarketParams::from_json(text) {
        assert!(p.tau() > 0.0);
        MarketParams::from_json(&p.to_json()).expect("round trip");
    }
});

#![no_main]

use libfuzzer_sys::fuzz_target;
use qdsp_core::applications::CrwParams;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = CrwParams::from_json(text) {
        p.model().expect("validated params build a model");
    }
});

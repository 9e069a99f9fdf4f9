#![no_main]

use libfuzzer_sys::fuzz_target;
use qdsp_core::Circuit;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = Circuit::from_text(text) {
        let again = Circuit::from_text(&c.to_text()).expect("round trip");
        assert_eq!(again.num_qubits(), c.num_qubits());
        assert_eq!(again.gates().len(), c.gates().len());
        // controlled powers can repeat a body up to 2^63 times
        if c.num_qubits() <= 10 && c.gates().len() <= 256 && !text.contains("cpow") {
            let _ = c.simulate();
        }
    }
});

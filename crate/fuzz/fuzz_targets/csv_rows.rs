#![no_main]

use libfuzzer_sys::fuzz_target;
use qdsp_core::applications::{CrwRow, DeltaRow};
use qdsp_core::io::{read_rows, AmplitudeRow, CharFnRow, CoeffRow, PmfRow};

fuzz_target!(|data: &[u8]| {
    let _ = read_rows::<CharFnRow>(data);
    let _ = read_rows::<CoeffRow>(data);
    let _ = read_rows::<PmfRow>(data);
    let _ = read_rows::<AmplitudeRow>(data);
    let _ = read_rows::<CrwRow>(data);
    let _ = read_rows::<DeltaRow>(data);
});

#![no_main]

use gtfk_cli::RunSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(spec) = serde_json::from_slice::<RunSpec>(data) {
        let _ = spec.validate();
    }
});

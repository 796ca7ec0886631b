#![no_main]

use gtfk_cli::RunSpec;
use libfuzzer_sys::fuzz_target;

// Arguments are whitespace-separated words of the input.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("gtfk").chain(text.split_whitespace());
    if let Ok(spec) = RunSpec::from_args(args) {
        let json = serde_json::to_string(&spec).unwrap();
        let back: RunSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
});

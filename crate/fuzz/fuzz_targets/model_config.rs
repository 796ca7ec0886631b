#![no_main]

use gtfk::ModelConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ModelConfig::parse(text) {
        // whatever parses must print back to the same configuration
        let again = ModelConfig::parse(&cfg.to_string()).expect("rendered config parses");
        assert_eq!(again, cfg);
        if let Ok(model) = cfg.build_model() {
            let _ = cfg.initial_state(&model);
        }
    }
});

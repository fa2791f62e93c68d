#![no_main]

use libfuzzer_sys::fuzz_target;
use rdqn_core::experiment::parse_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = parse_config(text) {
            config.agent.validate().expect("parsed configs are valid");
            assert!(!config.seeds.is_empty());
        }
    }
});

#![no_main]

use couple_stress::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = Config::from_json(text) {
            let _ = config.validate();
        }
    }
});

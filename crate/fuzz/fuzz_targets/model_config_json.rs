#![no_main]

use libfuzzer_sys::fuzz_target;
use snd_core::config::ModelConfigFile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(file) = ModelConfigFile::from_json(text) {
            // Resolution may reject parameters but must not panic.
            let _ = file.to_snd_config();
        }
    }
});

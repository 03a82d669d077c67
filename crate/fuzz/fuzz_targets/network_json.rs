#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Parsing untrusted network files must never panic; errors are
        // fine.
        let _ = snd_core::netcore::Network::from_json(text);
    }
});

#![no_main]

use libfuzzer_sys::fuzz_target;
use snd_core::netcore::{parse_state_series, Edge, Network};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let network =
            Network::new(4, vec![Edge::plain(0, 1), Edge::plain(2, 3)], None).unwrap();
        if let Ok(series) = parse_state_series(text, &network) {
            // Accepted rows must all be valid length-4 states.
            assert!(series.states().iter().all(|s| s.len() == 4));
            for s in series.states() {
                assert!(s.opinions().iter().all(|o| (-1..=1).contains(o)));
            }
        }
    }
});

#![no_main]

use helixwake::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_toml(text) {
            // Anything that validates must survive a round trip.
            let back = RunConfig::from_toml(&cfg.to_toml()).expect("reparse");
            assert_eq!(back.hash(), cfg.hash());
        }
    }
});

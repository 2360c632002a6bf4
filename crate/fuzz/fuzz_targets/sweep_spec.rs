#![no_main]

use helixwake::sweep::SweepSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = SweepSpec::from_toml(text) {
            assert_eq!(spec.points().len(), spec.strouhal.count * spec.amplitude.count);
        }
    }
});

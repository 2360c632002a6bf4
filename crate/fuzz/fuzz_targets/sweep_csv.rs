#![no_main]

use helixwake::sweep::SweepResult;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = SweepResult::points_from_csv(text);
    }
});

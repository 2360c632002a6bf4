#![no_main]

use helixwake::io::{timeseries_from_csv, timeseries_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(series) = timeseries_from_csv(text) {
            let _ = timeseries_to_csv(&series, &[]);
        }
    }
});

#![no_main]

use helixwake::io::{slice_from_grid, slice_to_grid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(slice) = slice_from_grid(text) {
            let back = slice_from_grid(&slice_to_grid(&slice, &[])).expect("reparse");
            assert_eq!(back, slice);
        }
    }
});

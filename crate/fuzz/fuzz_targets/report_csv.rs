#![no_main]

use helixwake::analysis::report::MetricsReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = MetricsReport::from_csv(text) {
            let _ = report.to_table();
            if let Ok(csv) = report.to_csv(&[]) {
                assert_eq!(MetricsReport::from_csv(&csv).expect("reparse"), report);
            }
        }
    }
});

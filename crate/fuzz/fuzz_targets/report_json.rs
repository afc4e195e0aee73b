#![no_main]

use libfuzzer_sys::fuzz_target;
use stable_exit_cli::ExperimentReport;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(report) = ExperimentReport::from_json(text) else {
        return;
    };
    let _ = report.to_csv();
    if let Ok(json) = report.to_json() {
        let back = ExperimentReport::from_json(&json).unwrap();
        assert_eq!(back.rows.len(), report.rows.len());
    }
});

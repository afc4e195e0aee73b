#![no_main]

use libfuzzer_sys::fuzz_target;
use stable_exit_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = ExperimentConfig::from_json_str(text) else {
        return;
    };
    if let Ok(runs) = config.exit_configs() {
        for run in runs {
            assert!(run.validate().is_ok());
            let mean = run.closed_form_mean().unwrap();
            assert!(mean.is_finite() && mean > 0.0);
            assert_eq!(run.config_hash().len(), 16);
        }
    }
});

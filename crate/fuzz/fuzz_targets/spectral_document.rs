#![no_main]

use libfuzzer_sys::fuzz_target;
use stable_exit::SpectralMeasure;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mu) = SpectralMeasure::from_json_str(text) else {
        return;
    };
    // Loaded measures are symmetric and survive a round trip.
    assert!(mu.is_symmetric());
    let json = serde_json::to_string(&mu.to_document()).unwrap();
    let back = SpectralMeasure::from_json_str(&json).unwrap();
    assert_eq!(back.dim(), mu.dim());
    let (a, b) = (back.total_mass(), mu.total_mass());
    assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
});

#![no_main]

use libfuzzer_sys::fuzz_target;
use voronoigram::io::{dataset_csv_string, parse_dataset_csv, parse_values, read_dataset};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_values(text);
    let _ = read_dataset(text);
    if let Ok((points, y)) = parse_dataset_csv(text) {
        // NaN never compares equal, so only finite rows must roundtrip exactly
        if points.iter().all(|p| p.x.is_finite() && p.y.is_finite())
            && y.iter().all(|v| v.is_finite())
        {
            let written = dataset_csv_string(&points, &y).expect("equal lengths");
            assert_eq!(parse_dataset_csv(&written).expect("reparses"), (points, y));
        }
    }
});

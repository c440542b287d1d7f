#![no_main]

use geotransport::io::{ConfigMap, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(map) = ConfigMap::parse(text) {
        let _ = RunConfig::from_map(&map);
    }
});

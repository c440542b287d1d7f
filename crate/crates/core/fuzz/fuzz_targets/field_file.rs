#![no_main]

use geotransport::io::FieldFile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = FieldFile::from_bytes(data) {
        // Anything accepted must survive a round trip.
        let again = FieldFile::from_bytes(&f.to_bytes()).expect("re-encoded file parses");
        assert_eq!(again.data.len(), f.data.len());
    }
});

#![no_main]

use geotransport::geodesic_grid::GeodesicGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(g) = GeodesicGrid::from_text(text) {
        let again = GeodesicGrid::from_text(&g.to_text()).expect("re-exported grid parses");
        assert_eq!(again.counts(), g.counts());
    }
});

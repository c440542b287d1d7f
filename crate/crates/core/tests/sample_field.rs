use std::path::PathBuf;

use geotransport::angular::{AngularBasis, AngularMatrices, BasisKind};
use geotransport::io::{FieldFile, Payload, RunConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

#[test]
fn oracle_sample_parses_and_matches_recomputation() {
    let f = FieldFile::load(&data("line_source_oracle.field")).unwrap();
    assert_eq!(f.scheme, "oracle");
    assert_eq!(f.payload, Payload::Energy);
    assert_eq!((f.grid.nx, f.grid.ny), (16, 16));
    assert_eq!((f.grid.x0, f.grid.dx), (-1.5, 0.1875));
    assert_eq!(f.time, 0.5);

    let config = RunConfig::from_text("problem = line_source\nnx = 16\nny = 16\n").unwrap();
    let fresh = config.spec.oracle_field(&f.grid, f.time).unwrap().unwrap();
    for (a, b) in f.data.iter().zip(&fresh) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
    }
    // The shell has not reached the corner cells at t = 0.5.
    assert!(f.data[0] < f.data[8 * 16 + 8]);
}

#[test]
fn coefficient_sample_gives_non_negative_energy() {
    let f = FieldFile::load(&data("line_source_femn0.field")).unwrap();
    assert_eq!((f.scheme.as_str(), f.level, f.n_angles), ("femn", 0, 12));
    assert_eq!(f.payload, Payload::Coefficients);
    assert!((f.time - 0.1).abs() < 1e-15);
    let m = AngularMatrices::assemble(&AngularBasis::new(BasisKind::Femn, 0).unwrap()).unwrap();
    let e = f.energy_values(Some(&m.basis_integrals)).unwrap();
    assert_eq!(e.len(), 64);
    assert!(e.iter().all(|v| v.is_finite() && *v >= 0.0));
    let state = f.to_state().unwrap();
    assert_eq!(state.energy(&m.basis_integrals), e);
    assert_eq!(FieldFile::from_bytes(&f.to_bytes()).unwrap(), f);
}

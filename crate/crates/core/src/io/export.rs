//! Matrix and grid export.
//!
//! Each matrix goes to `<name>.bin` as row-major little-endian `f64`;
//! `index.txt` lists `name rows cols file` per line after a header naming
//! the basis.

use std::fs;
use std::path::{Path, PathBuf};

use crate::angular::AngularMatrices;
use crate::error::{Error, Result};
use crate::geodesic_grid::GeodesicGrid;

const AXES: [&str; 3] = ["x", "y", "z"];

/// Named dense matrices, each `n × n` row-major.
pub fn named_matrices(m: &AngularMatrices) -> Vec<(String, Vec<f64>)> {
    let n = m.n;
    let diag = |d: &[f64]| {
        let mut out = vec![0.0; n * n];
        for (i, v) in d.iter().enumerate() {
            out[i * n + i] = *v;
        }
        out
    };
    let mut out = vec![("mass".to_string(), m.mass.clone()), ("lumped".to_string(), diag(&m.lumped))];
    for (prefix, set) in [("stiffness", &m.stiffness), ("advection", &m.advection), ("dissipation", &m.dissipation)] {
        for (axis, mat) in AXES.iter().zip(set.iter()) {
            out.push((format!("{prefix}_{axis}"), mat.clone()));
        }
    }
    out
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes every matrix of `m` into `dir`; returns the files written.
pub fn export_matrices(m: &AngularMatrices, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut index = format!("basis {} {} n {}\n", m.kind, m.resolution, m.n);
    let mut files = Vec::new();
    for (name, data) in named_matrices(m) {
        let file = format!("{name}.bin");
        let path = dir.join(&file);
        let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
        write(&path, &bytes)?;
        index.push_str(&format!("{name} {} {} {file}\n", m.n, m.n));
        files.push(path);
    }
    let path = dir.join("index.txt");
    write(&path, index.as_bytes())?;
    files.push(path);
    Ok(files)
}

/// Reads one exported matrix back.
pub fn read_matrix(path: &Path, n: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if Some(bytes.len()) != n.checked_mul(n).and_then(|v| v.checked_mul(8)) {
        return Err(Error::format("matrix file", format!("{} bytes for a {n}x{n} matrix", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn export_grid(grid: &GeodesicGrid, path: &Path) -> Result<()> {
    write(path, grid.to_text().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{AngularBasis, BasisKind};

    #[test]
    fn femn_k0_exports_eleven_matrices() {
        let basis = AngularBasis::new(BasisKind::Femn, 0).unwrap();
        let m = AngularMatrices::assemble(&basis).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = export_matrices(&m, dir.path()).unwrap();
        assert_eq!(files.len(), 12);
        let index = fs::read_to_string(dir.path().join("index.txt")).unwrap();
        assert_eq!(index.lines().count(), 12);
        assert!(index.lines().skip(1).all(|l| l.split(' ').nth(1) == Some("12")));
        let mass = read_matrix(&dir.path().join("mass.bin"), 12).unwrap();
        assert_eq!(mass, m.mass);
        let lumped = read_matrix(&dir.path().join("lumped.bin"), 12).unwrap();
        assert_eq!(lumped[13], m.lumped[1]);
        assert!(read_matrix(&dir.path().join("mass.bin"), 11).is_err());
    }

    #[test]
    fn grid_export_round_trips() {
        let g = GeodesicGrid::with_level(1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("grid.txt");
        export_grid(&g, &path).unwrap();
        let back = GeodesicGrid::from_text(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back.counts(), g.counts());
    }
}

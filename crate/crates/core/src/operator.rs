//! Square angle-space operators applied to blocks of coefficient vectors.
//!
//! A block is a column-major `n × ncols` matrix, i.e. `ncols` contiguous
//! coefficient vectors of length `n`, which is exactly how field states are
//! laid out. Storage is picked from the sparsity pattern: diagonal (S_N),
//! compressed rows (FEM_N and P_N advection) or dense (dissipation).

use rayon::prelude::*;

/// Column chunk for parallel application. Fixed so results do not depend on
/// the number of worker threads.
const CHUNK_COLS: usize = 256;

/// Density below which a matrix is stored in compressed-row form.
const SPARSE_DENSITY: f64 = 0.3;

#[derive(Clone, Debug)]
pub enum BlockOperator {
    Diagonal(Vec<f64>),
    Sparse {
        n: usize,
        row_ptr: Vec<usize>,
        cols: Vec<usize>,
        vals: Vec<f64>,
    },
    /// Row-major.
    Dense { n: usize, data: Vec<f64> },
}

impl BlockOperator {
    /// Builds an operator from a dense row-major `n × n` matrix, choosing the
    /// cheapest exact representation.
    pub fn from_dense(n: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), n * n);
        let nnz = data.iter().filter(|v| **v != 0.0).count();
        let off_diag = (0..n).any(|r| (0..n).any(|c| r != c && data[r * n + c] != 0.0));
        if !off_diag {
            return BlockOperator::Diagonal((0..n).map(|i| data[i * n + i]).collect());
        }
        if (nnz as f64) < SPARSE_DENSITY * (n * n) as f64 {
            let mut row_ptr = Vec::with_capacity(n + 1);
            let mut cols = Vec::with_capacity(nnz);
            let mut vals = Vec::with_capacity(nnz);
            row_ptr.push(0);
            for r in 0..n {
                for c in 0..n {
                    let v = data[r * n + c];
                    if v != 0.0 {
                        cols.push(c);
                        vals.push(v);
                    }
                }
                row_ptr.push(cols.len());
            }
            return BlockOperator::Sparse {
                n,
                row_ptr,
                cols,
                vals,
            };
        }
        BlockOperator::Dense {
            n,
            data: data.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BlockOperator::Diagonal(d) => d.len(),
            BlockOperator::Sparse { n, .. } | BlockOperator::Dense { n, .. } => *n,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n * n];
        match self {
            BlockOperator::Diagonal(d) => {
                for (i, v) in d.iter().enumerate() {
                    out[i * n + i] = *v;
                }
            }
            BlockOperator::Sparse {
                row_ptr,
                cols,
                vals,
                ..
            } => {
                for r in 0..n {
                    for k in row_ptr[r]..row_ptr[r + 1] {
                        out[r * n + cols[k]] = vals[k];
                    }
                }
            }
            BlockOperator::Dense { data, .. } => out.copy_from_slice(data),
        }
        out
    }

    /// `y = A x` for a single vector.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_serial(x, 1, y, 1.0, 0.0);
    }

    /// `Y = alpha A X + beta Y` over `x.len() / n` columns.
    pub fn apply_block(&self, x: &[f64], y: &mut [f64], alpha: f64, beta: f64) {
        let n = self.dim();
        assert_eq!(x.len(), y.len());
        assert_eq!(x.len() % n.max(1), 0);
        let chunk = CHUNK_COLS * n;
        x.par_chunks(chunk)
            .zip(y.par_chunks_mut(chunk))
            .for_each(|(xc, yc)| self.apply_serial(xc, xc.len() / n, yc, alpha, beta));
    }

    fn apply_serial(&self, x: &[f64], ncols: usize, y: &mut [f64], alpha: f64, beta: f64) {
        let n = self.dim();
        match self {
            BlockOperator::Diagonal(d) => {
                for (xc, yc) in x.chunks_exact(n).zip(y.chunks_exact_mut(n)) {
                    for i in 0..n {
                        yc[i] = alpha * d[i] * xc[i] + if beta == 0.0 { 0.0 } else { beta * yc[i] };
                    }
                }
            }
            BlockOperator::Sparse {
                row_ptr,
                cols,
                vals,
                ..
            } => {
                for (xc, yc) in x.chunks_exact(n).zip(y.chunks_exact_mut(n)) {
                    for r in 0..n {
                        let mut acc = 0.0;
                        for k in row_ptr[r]..row_ptr[r + 1] {
                            acc += vals[k] * xc[cols[k]];
                        }
                        yc[r] = alpha * acc + if beta == 0.0 { 0.0 } else { beta * yc[r] };
                    }
                }
            }
            BlockOperator::Dense { data, .. } => {
                if ncols == 0 {
                    return;
                }
                // SAFETY: pointers and strides describe the slices exactly:
                // A is n×n row-major, X and Y are n×ncols column-major.
                unsafe {
                    matrixmultiply::dgemm(
                        n,
                        n,
                        ncols,
                        alpha,
                        data.as_ptr(),
                        n as isize,
                        1,
                        x.as_ptr(),
                        1,
                        n as isize,
                        beta,
                        y.as_mut_ptr(),
                        1,
                        n as isize,
                    );
                }
            }
        }
    }
}

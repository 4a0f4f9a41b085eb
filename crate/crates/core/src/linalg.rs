//! Small dense linear algebra: row reduction and nullspace vectors.

/// Row-reduced echelon form of a dense matrix.
#[derive(Debug, Clone)]
pub struct Rref {
    /// Reduced rows, `rank` of them, each of length `ncols`.
    pub rows: Vec<Vec<f64>>,
    /// Pivot column of each reduced row.
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Rref {
    /// Gauss-Jordan elimination with partial pivoting. Entries below `tol`
    /// times the largest input magnitude count as zero.
    pub fn new(mut rows: Vec<Vec<f64>>, ncols: usize, tol: f64) -> Rref {
        debug_assert!(rows.iter().all(|r| r.len() == ncols));
        let scale = rows
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(1.0);
        let eps = tol * scale;
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..ncols {
            if rank == rows.len() {
                break;
            }
            let (best, mag) = (rank..rows.len())
                .map(|r| (r, rows[r][col].abs()))
                .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if mag <= eps {
                continue;
            }
            rows.swap(rank, best);
            let p = rows[rank][col];
            for v in rows[rank].iter_mut() {
                *v /= p;
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == rank {
                    continue;
                }
                let f = row[col];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    row[col] = 0.0;
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        Rref {
            rows,
            pivots,
            ncols,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Nullspace vector with a 1 in the first free column, or `None` when
    /// the matrix has full column rank.
    pub fn null_vector(&self) -> Option<Vec<f64>> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        let free = (0..self.ncols).find(|&c| !is_pivot[c])?;
        let mut x = vec![0.0; self.ncols];
        x[free] = 1.0;
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            x[p] = -row[free];
        }
        Some(x)
    }
}

/// A nonzero `x` with `A x = 0`, if one exists.
pub fn null_vector(rows: Vec<Vec<f64>>, ncols: usize) -> Option<Vec<f64>> {
    if ncols == 0 {
        return None;
    }
    Rref::new(rows, ncols, 1e-10).null_vector()
}

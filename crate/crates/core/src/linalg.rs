//! Dense linear solves for the tabular analytics.
//!
//! The verification suite caps MDPs at 64 states, so a plain LU
//! factorization with partial pivoting is all we need.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, CoreError, Result};

/// Solve `A x = b` for square row-major `A` (`n x n`) by LU with partial
/// pivoting. `A` and `b` are left untouched.
pub fn solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n || b.len() != n {
        return Err(invalid("linear solve: dimension mismatch"));
    }
    let mut lu = a.to_vec();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        // Pivot on the largest remaining entry in this column.
        let mut pivot = col;
        let mut best = lu[perm[col] * n + col].abs();
        for (i, &row) in perm.iter().enumerate().skip(col + 1) {
            let v = lu[row * n + col].abs();
            if v > best {
                best = v;
                pivot = i;
            }
        }
        if best == 0.0 {
            return Err(CoreError::Numeric(alloc::format!(
                "linear solve: singular matrix at column {col}"
            )));
        }
        perm.swap(col, pivot);
        let prow = perm[col];
        let diag = lu[prow * n + col];
        for &row in perm.iter().skip(col + 1) {
            let factor = lu[row * n + col] / diag;
            lu[row * n + col] = factor;
            for k in (col + 1)..n {
                lu[row * n + k] -= factor * lu[prow * n + k];
            }
        }
    }

    // Forward substitution on the permuted right-hand side.
    let mut y = vec![0.0; n];
    for (i, &row) in perm.iter().enumerate() {
        let mut s = x[row];
        for (j, yj) in y.iter().enumerate().take(i) {
            s -= lu[row * n + j] * yj;
        }
        y[i] = s;
    }
    // Back substitution.
    for i in (0..n).rev() {
        let row = perm[i];
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= lu[row * n + j] * x[j];
        }
        x[i] = s / lu[row * n + i];
    }
    Ok(x)
}

/// Solve `A^T x = b` without materializing the transpose at call sites.
pub fn solve_transposed(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n {
        return Err(invalid("linear solve: dimension mismatch"));
    }
    let mut at = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            at[j * n + i] = a[i * n + j];
        }
    }
    solve(&at, b, n)
}

//! Small dense linear solves (constraint corrections, shooting steps).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
/// Meant for the tiny systems in this crate (n <= a few dozen).
pub(crate) fn solve_dense<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut x: Vec<T> = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() <= T::epsilon() * crate::scalar::lit(32.0) {
            return Err(Error::DegeneratePoints(format!(
                "singular system (pivot {:e} in column {col})",
                crate::scalar::to_f64(m[pivot][col].abs())
            )));
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            // indexed: rows `col` and `row` are borrowed simultaneously
            #[allow(clippy::needless_range_loop)]
            for k in col..n {
                let upper = m[col][k];
                m[row][k] -= factor * upper;
            }
            let rhs = x[col];
            x[row] -= factor * rhs;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Ok(x)
}

/// Frobenius-based condition estimate `|A|_F |A^{-1}|_F` for the tiny
/// constraint systems; exact enough to flag degeneracy.
pub(crate) fn condition_estimate<T: Scalar>(a: &[Vec<T>]) -> T {
    let n = a.len();
    let mut inv_cols: Vec<Vec<T>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        match solve_dense(a, &e) {
            Ok(col) => inv_cols.push(col),
            Err(_) => return T::infinity(),
        }
    }
    let fro = |rows: &[Vec<T>]| -> T {
        rows.iter()
            .flat_map(|r| r.iter())
            .fold(T::zero(), |acc, &v| acc + v * v)
            .sqrt()
    };
    let inv_rows: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| inv_cols[j][i]).collect())
        .collect();
    fro(a) * fro(&inv_rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let a = vec![
            vec![2.0, 1.0, 0.0],
            vec![1.0, 3.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ];
        let b = vec![3.0, 5.0, 9.0];
        let x = solve_dense(&a, &b).unwrap();
        for (row, rhs) in a.iter().zip(b.iter()) {
            let lhs: f64 = row.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_singular() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve_dense(&a, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn condition_of_identity() {
        let a: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((condition_estimate(&a) - 2.0).abs() < 1e-12);
    }
}

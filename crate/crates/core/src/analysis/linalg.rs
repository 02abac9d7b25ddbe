// SPDX-License-Identifier: Apache-2.0

use crate::error::AnalysisError;

use super::scalar::Scalar;

pub type Matrix<S> = Vec<Vec<S>>;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve<S: Scalar>(mut a: Matrix<S>, mut b: Vec<S>) -> Result<Vec<S>, AnalysisError> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n), "square system expected");
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].magnitude().total_cmp(&a[j][col].magnitude()))
            .filter(|&p| a[p][col].magnitude() > 0.0)
            .ok_or(AnalysisError::Singular)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / a[col][col].clone();
            let (upper, lower) = a.split_at_mut(row);
            for (x, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x = x.clone() - factor.clone() * p.clone();
            }
            let delta = factor * b[col].clone();
            b[row] = b[row].clone() - delta;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

/// `m v`.
pub fn mat_vec<S: Scalar>(m: &Matrix<S>, v: &[S]) -> Vec<S> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
        .collect()
}

/// `v m` (row vector times matrix).
pub fn vec_mat<S: Scalar>(v: &[S], m: &Matrix<S>) -> Vec<S> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| v.iter().zip(m).fold(S::zero(), |acc, (a, row)| acc + a.clone() * row[j].clone()))
        .collect()
}

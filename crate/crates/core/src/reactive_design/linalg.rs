//! Dense Gaussian elimination over any [`Scalar`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `a · x = b` with partial pivoting on the largest magnitude.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::internal("linear system is not square"));
    }
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .ok_or_else(|| Error::internal("singular linear system"))?;
        if !S::EXACT && a[pivot][col].abs().to_f64() < 1e-300 {
            return Err(Error::internal("singular linear system"));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = S::one() / a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() * inv.clone();
            for k in col..n {
                let delta = factor.clone() * a[col][k].clone();
                a[row][k] = a[row][k].clone() - delta;
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

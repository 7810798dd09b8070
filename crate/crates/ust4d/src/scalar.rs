//! Scalar abstraction for the exact analytic kernels.
//!
//! Effective-resistance recursions, harmonic solves, and weighted tree
//! metrics are written once over [`Scalar`] and instantiated with `f64`
//! in production and with exact rationals (`num_rational::BigRational`)
//! in tests, where the contracts demand exact equality.

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Field-like scalar: ring operations with division, order, and lossless
/// construction from small integers. Satisfied by `f32`, `f64`, and the
/// `num-rational` types.
pub trait Scalar: Num + FromPrimitive + Clone + PartialOrd + std::fmt::Debug {}

impl<T> Scalar for T where T: Num + FromPrimitive + Clone + PartialOrd + std::fmt::Debug {}

/// Lossless conversion from a vertex/edge count.
pub fn from_count<S: Scalar>(n: usize) -> S {
    S::from_usize(n).expect("count representable in scalar")
}

/// Gaussian elimination with partial pivoting. Returns the solution and
/// the ratio of the smallest to the largest pivot magnitude as a cheap
/// conditioning diagnostic (1 for a 1x1 system, 0 is impossible since
/// singular systems error out).
pub fn solve_dense<S>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<(Vec<S>, f64)>
where
    S: Scalar + Signed + ToPrimitive,
{
    let m = b.len();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0f64;
    for col in 0..m {
        let pivot_row = (col..m)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("comparable pivots")
            })
            .unwrap();
        if a[pivot_row][col].is_zero() {
            return Err(Error::IllConditioned { pivot_ratio: 0.0 });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let mag = a[col][col].abs().to_f64().unwrap_or(f64::NAN);
        min_pivot = min_pivot.min(mag);
        max_pivot = max_pivot.max(mag);
        for row in col + 1..m {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone() / a[col][col].clone();
            for k in col..m {
                a[row][k] = a[row][k].clone() - factor.clone() * a[col][k].clone();
            }
            b[row] = b[row].clone() - factor * b[col].clone();
        }
    }
    let mut x = vec![S::zero(); m];
    for row in (0..m).rev() {
        let mut acc = b[row].clone();
        for col in row + 1..m {
            acc = acc - a[row][col].clone() * x[col].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    let ratio = if m == 0 { 1.0 } else { min_pivot / max_pivot };
    Ok((x, ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity_and_2x2() {
        let (x, ratio) = solve_dense::<f64>(
            vec![vec![2.0, 1.0], vec![1.0, 3.0]],
            vec![5.0, 10.0],
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!(ratio > 0.0 && ratio <= 1.0);
    }

    #[test]
    fn solve_rejects_singular() {
        let r = solve_dense::<f64>(
            vec![vec![1.0, 2.0], vec![2.0, 4.0]],
            vec![1.0, 2.0],
        );
        assert!(matches!(r, Err(Error::IllConditioned { .. })));
    }
}

//! Elementary divisors of integer matrices by Smith-style reduction.
//!
//! Sizes here are tiny (at most a few dozen rows), so the plain
//! pivot-and-reduce algorithm with exact `BigInt` arithmetic is enough.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// Nonzero elementary divisors d_1 | d_2 | ... of the given matrix,
/// each positive. The empty matrix (or zero matrix) yields an empty list.
pub fn elementary_divisors(rows: &[Vec<BigInt>]) -> Vec<BigInt> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<BigInt>> = rows.to_vec();
    debug_assert!(a.iter().all(|r| r.len() == n), "ragged matrix");

    let mut divisors = Vec::new();
    let mut top = 0usize;
    let mut left = 0usize;

    while top < m && left < n {
        // Pivot: smallest nonzero |entry| in the remaining block.
        let mut pivot: Option<(usize, usize)> = None;
        for r in top..m {
            for c in left..n {
                if a[r][c].is_zero() {
                    continue;
                }
                match &pivot {
                    None => pivot = Some((r, c)),
                    Some((pr, pc)) => {
                        if a[r][c].abs() < a[*pr][*pc].abs() {
                            pivot = Some((r, c));
                        }
                    }
                }
            }
        }
        let Some((pr, pc)) = pivot else { break };
        a.swap(top, pr);
        for row in a.iter_mut() {
            row.swap(left, pc);
        }

        // Clear the pivot row and column; restart whenever a remainder
        // shrinks the pivot.
        loop {
            let mut clean = true;
            for r in top + 1..m {
                if a[r][left].is_zero() {
                    continue;
                }
                let q = div_round(&a[r][left], &a[top][left]);
                for c in left..n {
                    let sub = &q * &a[top][c];
                    a[r][c] -= sub;
                }
                if !a[r][left].is_zero() {
                    a.swap(top, r);
                    clean = false;
                }
            }
            for c in left + 1..n {
                if a[top][c].is_zero() {
                    continue;
                }
                let q = div_round(&a[top][c], &a[top][left]);
                for row in a.iter_mut().take(m).skip(top) {
                    let sub = &q * &row[left];
                    row[c] -= sub;
                }
                if !a[top][c].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(left, c);
                    }
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }

        // Divisibility fix-up: the pivot must divide every later entry.
        let mut fixed = true;
        'scan: for r in top + 1..m {
            for c in left + 1..n {
                if !(&a[r][c] % &a[top][left]).is_zero() {
                    for cc in left..n {
                        let add = a[r][cc].clone();
                        a[top][cc] += add;
                    }
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if !fixed {
            continue; // re-run the clearing with the fattened pivot row
        }

        divisors.push(a[top][left].abs());
        top += 1;
        left += 1;
    }

    divisors
}

/// Product of the elementary divisors; `None` when the matrix has rank
/// below `full_rank`.
pub fn lattice_index(rows: &[Vec<BigInt>], full_rank: usize) -> Option<BigInt> {
    let divisors = elementary_divisors(rows);
    if divisors.len() < full_rank {
        return None;
    }
    let mut p = BigInt::from(1);
    for d in divisors {
        p *= d;
    }
    Some(p)
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::from(1);
    }
    debug_assert!(
        rows.iter().all(|r| r.len() == n),
        "determinant of non-square matrix"
    );
    let mut a = rows.to_vec();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Adjugate matrix via cofactors: adj(A) * A = det(A) * I. Fine for the
/// small stage counts this crate works at.
pub fn adjugate(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![vec![BigInt::from(1)]];
    }
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for r in 0..n {
        for c in 0..n {
            let minor: Vec<Vec<BigInt>> = rows
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != r)
                .map(|(_, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let cof = determinant(&minor);
            adj[c][r] = if (r + c) % 2 == 0 { cof } else { -cof };
        }
    }
    adj
}

/// Matrix product of integer matrices.
pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let rows = a.len();
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![BigInt::zero(); cols]; rows];
    for (i, arow) in a.iter().enumerate() {
        debug_assert_eq!(arow.len(), inner);
        for (k, brow) in b.iter().enumerate() {
            if arow[k].is_zero() {
                continue;
            }
            for (j, bval) in brow.iter().enumerate() {
                let add = &arow[k] * bval;
                out[i][j] += add;
            }
        }
    }
    out
}

/// Quotient rounded toward the nearest integer, which keeps remainders
/// small during the reduction.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if &r.abs() * &two > b.abs() {
        if (r.sign() == b.sign()) || r.is_zero() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    fn divs(rows: &[&[i64]]) -> Vec<i64> {
        elementary_divisors(&mat(rows))
            .iter()
            .map(|d| i64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn identity_and_scalars() {
        assert_eq!(divs(&[&[1, 0], &[0, 1]]), vec![1, 1]);
        assert_eq!(divs(&[&[2, 0], &[0, 3]]), vec![1, 6]);
        assert_eq!(divs(&[&[4, 0], &[0, 6]]), vec![2, 12]);
    }

    #[test]
    fn known_smith_forms() {
        // classic example: [[2,4,4],[-6,6,12],[10,-4,-16]] -> 2, 6, 12
        assert_eq!(
            divs(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]),
            vec![2, 6, 12]
        );
        assert_eq!(divs(&[&[1, 0], &[-1, 2]]), vec![1, 2]);
        assert_eq!(divs(&[&[0, 0], &[0, 0]]), Vec::<i64>::new());
        assert_eq!(divs(&[&[6, 10, 15]]), vec![1]);
        assert_eq!(divs(&[&[6], &[10], &[15]]), vec![1]);
        assert_eq!(divs(&[&[2, 0], &[0, 2], &[2, 2]]), vec![2, 2]);
    }

    #[test]
    fn divisibility_chain_holds() {
        let d = elementary_divisors(&mat(&[&[6, 4, 2], &[4, 8, 2], &[2, 2, 10]]));
        for w in d.windows(2) {
            assert!((&w[1] % &w[0]).is_zero(), "{:?}", d);
        }
    }

    #[test]
    fn determinant_and_adjugate_agree() {
        let a = mat(&[&[2, 1, 0], &[-1, 3, 2], &[4, 0, 1]]);
        let d = determinant(&a);
        // det = 2*(3*1-2*0) - 1*(-1*1-2*4) + 0 = 6 + 9 = 15
        assert_eq!(d, BigInt::from(15));
        let adj = adjugate(&a);
        let prod = mat_mul(&adj, &a);
        for (i, row) in prod.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { d.clone() } else { BigInt::zero() };
                assert_eq!(v, &want);
            }
        }
        assert_eq!(determinant(&mat(&[&[1, 2], &[2, 4]])), BigInt::zero());
        assert_eq!(determinant(&mat(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
    }

    #[test]
    fn index_of_full_rank_lattice() {
        // rows x1, 2x2 - x1 span an index-2 sublattice of Z^2
        assert_eq!(
            lattice_index(&mat(&[&[1, 0], &[-1, 2]]), 2),
            Some(BigInt::from(2))
        );
        assert_eq!(lattice_index(&mat(&[&[1, 0]]), 2), None);
    }
}

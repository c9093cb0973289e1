use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::ring::DegreeTwoClass;

/// The largest stage count the monomial bitmask representation supports.
pub const MAX_STAGES: usize = 64;

/// A strictly upper-triangular integer matrix (A^i_j)_{1 <= i < j <= n};
/// the complete presentation of an n-stage Bott tower.
///
/// Column j (j = 2..=n) holds the twist coefficients of stage j over the
/// earlier stages. Column 1 is vacuous: the first twist class is zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BottMatrix {
    n: usize,
    /// cols[j - 2] = [A^1_j, ..., A^{j-1}_j].
    cols: Vec<Vec<BigInt>>,
}

impl BottMatrix {
    /// Build from explicit (i, j, value) entries. Entries with i >= j are
    /// rejected; unspecified entries are zero.
    pub fn validate<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, BigInt)>,
    {
        if n < 1 || n > MAX_STAGES {
            return Err(Error::BadDimension { n });
        }
        let mut cols: Vec<Vec<BigInt>> = (2..=n).map(|j| vec![BigInt::zero(); j - 1]).collect();
        for (i, j, v) in entries {
            if i == 0 || j == 0 || i >= j {
                return Err(Error::NonTriangular { i, j });
            }
            if j > n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            cols[j - 2][i - 1] = v;
        }
        Ok(BottMatrix { n, cols })
    }

    /// Build from column data: `cols[j-2]` lists A^1_j ... A^{j-1}_j.
    pub fn from_cols(n: usize, cols: Vec<Vec<BigInt>>) -> Result<Self> {
        if n < 1 || n > MAX_STAGES {
            return Err(Error::BadDimension { n });
        }
        if cols.len() != n - 1 {
            return Err(Error::Parse(format!(
                "expected {} columns for n={n}, got {}",
                n - 1,
                cols.len()
            )));
        }
        for (k, col) in cols.iter().enumerate() {
            if col.len() != k + 1 {
                return Err(Error::Parse(format!(
                    "column {} must have {} entries, got {}",
                    k + 2,
                    k + 1,
                    col.len()
                )));
            }
        }
        Ok(BottMatrix { n, cols })
    }

    /// Convenience constructor from machine integers.
    pub fn from_cols_i64(n: usize, cols: &[&[i64]]) -> Result<Self> {
        let cols = cols
            .iter()
            .map(|c| c.iter().map(|&v| BigInt::from(v)).collect())
            .collect();
        Self::from_cols(n, cols)
    }

    /// The product tower (CP^1)^n.
    pub fn zero(n: usize) -> Result<Self> {
        Self::validate(n, std::iter::empty())
    }

    /// The Hirzebruch surface presentation with A^1_2 = a.
    pub fn hirzebruch(a: i64) -> Self {
        Self::validate(2, [(1, 2, BigInt::from(a))]).expect("fixed shape")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// A^i_j for 1 <= i < j <= n. Panics on out-of-range input; use
    /// `alpha` for the checked per-stage view.
    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        assert!(
            i >= 1 && i < j && j <= self.n,
            "entry ({i},{j}) out of range for n={}",
            self.n
        );
        &self.cols[j - 2][i - 1]
    }

    pub(crate) fn col(&self, j: usize) -> &[BigInt] {
        &self.cols[j - 2]
    }

    pub(crate) fn col_mut(&mut self, j: usize) -> &mut Vec<BigInt> {
        &mut self.cols[j - 2]
    }

    /// The twist class alpha_j = sum_{i<j} A^i_j x_i; alpha_1 = 0.
    pub fn alpha(&self, j: usize) -> Result<DegreeTwoClass> {
        if j < 1 || j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: self.n,
            });
        }
        let mut coeffs = vec![BigInt::zero(); self.n];
        if j >= 2 {
            for (i, v) in self.cols[j - 2].iter().enumerate() {
                coeffs[i] = v.clone();
            }
        }
        Ok(DegreeTwoClass::new(coeffs))
    }

    /// Largest |entry|, used by closure bounds.
    pub fn max_abs_entry(&self) -> BigInt {
        let mut m = BigInt::zero();
        for col in &self.cols {
            for v in col {
                let a = if v.sign() == num_bigint::Sign::Minus {
                    -v
                } else {
                    v.clone()
                };
                if a > m {
                    m = a;
                }
            }
        }
        m
    }

    /// Iterate (i, j, A^i_j) over nonzero entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> + '_ {
        self.cols.iter().enumerate().flat_map(|(k, col)| {
            let j = k + 2;
            col.iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(move |(i, v)| (i + 1, j, v))
        })
    }
}

impl std::fmt::Display for BottMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BottMatrix(n={}", self.n)?;
        let mut any = false;
        for (i, j, v) in self.entries() {
            write!(f, "{} A[{i},{j}]={v}", if any { "," } else { ";" })?;
            any = true;
        }
        write!(f, ")")
    }
}

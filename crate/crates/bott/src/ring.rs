//! Exact arithmetic in H*(B_n) over the square-free monomial basis.
//!
//! The ring is Z[x_1..x_n] modulo x_j^2 = alpha_j x_j. Iterating the
//! projective-bundle freeness, the square-free monomials x_S (S a subset of
//! {1..n}) form a Z-basis, and every element is kept in that normal form.
//! Internal degrees are half the cohomological degree: degree k here means
//! H^{2k}.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::matrix::BottMatrix;

/// A square-free monomial, stored as a bitmask of its support;
/// bit i-1 set means x_i divides the monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Monomial {
        let mut mask = 0u64;
        for i in indices {
            assert!(i >= 1 && i <= 64, "index {i} out of range");
            mask |= 1 << (i - 1);
        }
        Monomial(mask)
    }

    pub fn variable(i: usize) -> Monomial {
        Monomial::from_indices([i])
    }

    /// Half the cohomological degree, i.e. |S|.
    pub fn degree(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= 64 && self.0 & (1 << (i - 1)) != 0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=64).filter(|&i| self.contains(i))
    }

    fn mask(&self) -> u64 {
        self.0
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        for i in self.indices() {
            write!(f, "x{i}")?;
        }
        Ok(())
    }
}

/// An integer vector (c_1, ..., c_n) meaning sum c_i x_i in H^2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeTwoClass {
    coeffs: Vec<BigInt>,
}

impl DegreeTwoClass {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        DegreeTwoClass { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        DegreeTwoClass::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(n: usize) -> Self {
        DegreeTwoClass::new(vec![BigInt::zero(); n])
    }

    /// The class c * x_i inside an n-dimensional lattice.
    pub fn multiple_of_variable(n: usize, i: usize, c: BigInt) -> Self {
        let mut coeffs = vec![BigInt::zero(); n];
        coeffs[i - 1] = c;
        DegreeTwoClass::new(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of x_i (1-based).
    pub fn coeff(&self, i: usize) -> &BigInt {
        &self.coeffs[i - 1]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// gcd of the coefficients, nonnegative; zero for the zero class.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    /// Largest i with a nonzero coefficient.
    pub fn leading_index(&self) -> Option<usize> {
        (1..=self.dim()).rev().find(|&i| !self.coeff(i).is_zero())
    }

    /// True when every nonzero coefficient sits at an index < j.
    pub fn supported_below(&self, j: usize) -> bool {
        self.leading_index().map_or(true, |l| l < j)
    }

    /// Sign-normalized representative: the highest-index nonzero
    /// coefficient is made positive. The natural emitted forms
    /// x_j - alpha_j/2 and 2x_j - alpha_j are already canonical.
    pub fn canonical_sign(&self) -> DegreeTwoClass {
        match self.leading_index() {
            Some(l) if self.coeff(l).is_negative() => -self,
            _ => self.clone(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> DegreeTwoClass {
        DegreeTwoClass::new(self.coeffs.iter().map(|v| v * c).collect())
    }
}

impl std::ops::Add for &DegreeTwoClass {
    type Output = DegreeTwoClass;
    fn add(self, rhs: &DegreeTwoClass) -> DegreeTwoClass {
        assert_eq!(self.dim(), rhs.dim(), "degree-two class dimension mismatch");
        DegreeTwoClass::new(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl std::ops::Sub for &DegreeTwoClass {
    type Output = DegreeTwoClass;
    fn sub(self, rhs: &DegreeTwoClass) -> DegreeTwoClass {
        assert_eq!(self.dim(), rhs.dim(), "degree-two class dimension mismatch");
        DegreeTwoClass::new(
            self.coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl std::ops::Neg for &DegreeTwoClass {
    type Output = DegreeTwoClass;
    fn neg(self) -> DegreeTwoClass {
        DegreeTwoClass::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl std::fmt::Display for DegreeTwoClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in 1..=self.dim() {
            let c = self.coeff(i);
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{a}")?;
            }
            write!(f, "x{i}")?;
            first = false;
        }
        Ok(())
    }
}

/// Shared handle to the ambient presentation; cheap to clone.
#[derive(Debug, Clone)]
pub struct Ring {
    matrix: Arc<BottMatrix>,
}

impl Ring {
    pub fn new(matrix: BottMatrix) -> Self {
        Ring {
            matrix: Arc::new(matrix),
        }
    }

    pub fn matrix(&self) -> &BottMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    fn same_ambient(&self, other: &Ring) -> bool {
        Arc::ptr_eq(&self.matrix, &other.matrix) || self.matrix == other.matrix
    }

    pub fn zero(&self) -> RingElement {
        RingElement {
            ring: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self) -> RingElement {
        self.monomial(Monomial::ONE, BigInt::one())
    }

    pub fn monomial(&self, m: Monomial, coeff: BigInt) -> RingElement {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(m, coeff);
        }
        RingElement {
            ring: self.clone(),
            terms,
        }
    }

    /// The generator x_j.
    pub fn generator(&self, j: usize) -> Result<RingElement> {
        if j < 1 || j > self.n() {
            return Err(Error::IndexOutOfRange {
                index: j,
                n: self.n(),
            });
        }
        Ok(self.monomial(Monomial::variable(j), BigInt::one()))
    }

    /// Lossless embedding of a degree-two class.
    pub fn embed(&self, class: &DegreeTwoClass) -> Result<RingElement> {
        if class.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                left: class.dim(),
                right: self.n(),
            });
        }
        let mut terms = BTreeMap::new();
        for i in 1..=self.n() {
            let c = class.coeff(i);
            if !c.is_zero() {
                terms.insert(Monomial::variable(i), c.clone());
            }
        }
        Ok(RingElement {
            ring: self.clone(),
            terms,
        })
    }

    /// alpha_j embedded into the ring.
    pub fn alpha(&self, j: usize) -> Result<RingElement> {
        let class = self.matrix.alpha(j)?;
        self.embed(&class)
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.same_ambient(other)
    }
}
impl Eq for Ring {}

/// An element of H*(B_n) in normal form: a map from square-free monomials
/// to nonzero integer coefficients.
#[derive(Debug, Clone)]
pub struct RingElement {
    ring: Ring,
    terms: BTreeMap<Monomial, BigInt>,
}

impl RingElement {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    /// The homogeneous part in internal degree k (cohomological degree 2k).
    pub fn degree_part(&self, k: usize) -> RingElement {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == k)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        RingElement {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// Internal degrees present in the element.
    pub fn degrees(&self) -> Vec<usize> {
        let mut ds: Vec<usize> = self.terms.keys().map(|m| m.degree()).collect();
        ds.dedup();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    /// True when all terms share one internal degree (zero is homogeneous).
    pub fn is_homogeneous(&self) -> bool {
        self.degrees().len() <= 1
    }

    /// Reads the element back as a degree-two class; None if any term has
    /// degree != 1.
    pub fn as_degree_two(&self) -> Option<DegreeTwoClass> {
        let mut coeffs = vec![BigInt::zero(); self.ring.n()];
        for (m, c) in &self.terms {
            if m.degree() != 1 {
                return None;
            }
            let i = m.indices().next().expect("degree-1 monomial");
            coeffs[i - 1] = c.clone();
        }
        Some(DegreeTwoClass::new(coeffs))
    }

    pub fn scale(&self, c: &BigInt) -> RingElement {
        if c.is_zero() {
            return self.ring.zero();
        }
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        RingElement {
            ring: self.ring.clone(),
            terms,
        }
    }

    /// Exact normal-form product. The reduction replaces x_j^2 by
    /// alpha_j x_j at the largest repeated index first; alpha_j only
    /// involves lower indices, so the exponent word strictly descends.
    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        if !self.ring.same_ambient(&other.ring) {
            return Err(Error::AmbientMismatch);
        }
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ms, cs) in &self.terms {
            for (mt, ct) in &other.terms {
                let coeff = cs * ct;
                reduce_product(self.ring.matrix(), *ms, *mt, &coeff, &mut acc);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(RingElement {
            ring: self.ring.clone(),
            terms: acc,
        })
    }

    /// z^k with power(z, 0) the unit.
    pub fn power(&self, k: usize) -> RingElement {
        let mut out = self.ring.one();
        for _ in 0..k {
            out = out.mul(self).expect("same ambient");
        }
        out
    }
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same_ambient(&other.ring) && self.terms == other.terms
    }
}
impl Eq for RingElement {}

impl std::ops::Add for &RingElement {
    type Output = RingElement;
    fn add(self, rhs: &RingElement) -> RingElement {
        assert!(self.ring.same_ambient(&rhs.ring), "ambient mismatch in add");
        let mut terms = self.terms.clone();
        for (m, c) in &rhs.terms {
            let e = terms.entry(*m).or_insert_with(BigInt::zero);
            *e += c;
        }
        terms.retain(|_, c| !c.is_zero());
        RingElement {
            ring: self.ring.clone(),
            terms,
        }
    }
}

impl std::ops::Sub for &RingElement {
    type Output = RingElement;
    fn sub(self, rhs: &RingElement) -> RingElement {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &RingElement {
    type Output = RingElement;
    fn neg(self) -> RingElement {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c)).collect();
        RingElement {
            ring: self.ring.clone(),
            terms,
        }
    }
}

impl std::fmt::Display for RingElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut sorted: Vec<_> = self.terms.iter().collect();
        sorted.sort_by_key(|(m, _)| (m.degree(), m.mask()));
        for (idx, (m, c)) in sorted.iter().enumerate() {
            if idx == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if !a.is_one() || m.degree() == 0 {
                write!(f, "{a}")?;
                if m.degree() > 0 {
                    write!(f, "*")?;
                }
            }
            if m.degree() > 0 {
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

/// Multiply two square-free monomials and accumulate the normal form.
///
/// Repeated indices are resolved largest-first: each x_j^2 becomes
/// alpha_j x_j, whose support lies strictly below j. Intermediate words can
/// carry exponents above 2 (substituting alpha_j may hit an index that is
/// already repeated), so the worklist keeps full exponent vectors. The word
/// read from the top index downward strictly decreases lexicographically,
/// which bounds the rewriting.
fn reduce_product(
    matrix: &BottMatrix,
    a: Monomial,
    b: Monomial,
    coeff: &BigInt,
    acc: &mut BTreeMap<Monomial, BigInt>,
) {
    let n = matrix.n();
    let mut start = vec![0u8; n];
    for i in a.indices() {
        start[i - 1] += 1;
    }
    for i in b.indices() {
        start[i - 1] += 1;
    }
    let mut work: Vec<(Vec<u8>, BigInt)> = vec![(start, coeff.clone())];
    while let Some((exps, c)) = work.pop() {
        match (1..=n).rev().find(|&i| exps[i - 1] >= 2) {
            None => {
                let mono = Monomial::from_indices((1..=n).filter(|&i| exps[i - 1] == 1));
                let e = acc.entry(mono).or_insert_with(BigInt::zero);
                *e += c;
            }
            Some(1) => {} // alpha_1 = 0 annihilates the term
            Some(j) => {
                for (i, v) in matrix.col(j).iter().enumerate() {
                    if v.is_zero() {
                        continue;
                    }
                    let mut next = exps.clone();
                    next[j - 1] -= 1;
                    next[i] += 1;
                    work.push((next, &c * v));
                }
            }
        }
    }
}

/// Product of two degree-two classes, written in the degree-4 square-free
/// basis (pairs (i, j), i < j, in `degree_basis(n, 2)` order).
///
/// Closed form: cross terms x_i x_j are already basis elements, and the
/// diagonal x_j^2 = alpha_j x_j contributes A^i_j x_i x_j, so
/// c_{i,j} = z_i w_j + z_j w_i + z_j w_j A^i_j. This avoids the generic
/// rewriting machinery on the hottest path (relation and obstruction
/// checks); agreement with the generic multiplier is property-tested.
pub fn mul_degree_two(matrix: &BottMatrix, z: &DegreeTwoClass, w: &DegreeTwoClass) -> Vec<BigInt> {
    let n = matrix.n();
    debug_assert_eq!(z.dim(), n);
    debug_assert_eq!(w.dim(), n);
    let mut out = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for j in 2..=n {
        let zj = z.coeff(j);
        let wj = w.coeff(j);
        let diag = zj * wj;
        for i in 1..j {
            let mut c = z.coeff(i) * wj + zj * w.coeff(i);
            if !diag.is_zero() {
                c += &diag * matrix.entry(i, j);
            }
            out.push(c);
        }
    }
    out
}

/// Does z^2 vanish in H^4?
pub fn degree_two_square_is_zero(matrix: &BottMatrix, z: &DegreeTwoClass) -> bool {
    mul_degree_two(matrix, z, z).iter().all(Zero::is_zero)
}

/// Rank of H^{2k}: binomial(n, k).
pub fn graded_rank(matrix: &BottMatrix, k: usize) -> u128 {
    binomial(matrix.n(), k)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// All square-free monomials of internal degree k, ascending by mask.
pub fn degree_basis(n: usize, k: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    // Gosper-style iteration over k-subsets.
    if k == 0 {
        return vec![Monomial::ONE];
    }
    if k > n {
        return out;
    }
    let mut mask: u64 = (1u64 << k) - 1;
    while mask <= full {
        out.push(Monomial(mask));
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if c == 0 || r == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(n: usize, cols: &[&[i64]]) -> Ring {
        Ring::new(BottMatrix::from_cols_i64(n, cols).unwrap())
    }

    #[test]
    fn x1_squares_to_zero() {
        let r = ring(2, &[&[7]]);
        let x1 = r.generator(1).unwrap();
        assert!(x1.mul(&x1).unwrap().is_zero());
    }

    #[test]
    fn hirzebruch_one_square_relation() {
        // In Sigma_1: x2 * x2 = x1 x2.
        let r = Ring::new(BottMatrix::hirzebruch(1));
        let x2 = r.generator(2).unwrap();
        let sq = x2.mul(&x2).unwrap();
        assert_eq!(
            sq,
            r.monomial(Monomial::from_indices([1, 2]), BigInt::one())
        );
    }

    #[test]
    fn nested_reduction_hand_checked() {
        // M(A12=1, A13=0, A23=1): (x2 x3) * x2 = x2^2 x3 = (x1 x2) x3.
        let r = ring(3, &[&[1], &[0, 1]]);
        let x2x3 = r.monomial(Monomial::from_indices([2, 3]), BigInt::one());
        let x2 = r.generator(2).unwrap();
        let got = x2x3.mul(&x2).unwrap();
        assert_eq!(
            got,
            r.monomial(Monomial::from_indices([1, 2, 3]), BigInt::one())
        );
    }

    #[test]
    fn repeated_collision_with_already_doubled_index() {
        // (x2 x3)^2 = x2^2 x3^2; substituting alpha_3 = x2 drives the
        // exponent of x2 to three before everything collapses to zero.
        let r = ring(3, &[&[1], &[0, 1]]);
        let e = r.monomial(Monomial::from_indices([2, 3]), BigInt::one());
        assert!(e.mul(&e).unwrap().is_zero());
        // Same shape one stage up, where the collapse leaves a residue:
        // alpha_4 = x3, alpha_3 = x2, alpha_2 = 0 gives
        // (x3 x4)^2 = x3^2 x4^2 = (x2 x3)(x3 x4) = x2 x3^2 x4 = x2^2 x3 x4 = 0.
        let r4 = ring(4, &[&[0], &[0, 1], &[0, 0, 1]]);
        let e4 = r4.monomial(Monomial::from_indices([3, 4]), BigInt::one());
        assert!(e4.mul(&e4).unwrap().is_zero());
        // x2^3 in a surface dies on dimension grounds: x2^3 = x1 x2^2 =
        // x1^2 x2 = 0, and power agrees with iterated mul.
        let rr = ring(2, &[&[1]]);
        let x2 = rr.generator(2).unwrap();
        let cube = x2.mul(&x2).unwrap().mul(&x2).unwrap();
        assert!(cube.is_zero());
        assert_eq!(x2.power(3), cube);
        // one stage higher the same word leaves a residue
        let r3 = ring(3, &[&[1], &[0, 1]]);
        let y2 = r3.generator(2).unwrap();
        let y3 = r3.generator(3).unwrap();
        let word = y2.power(2).mul(&y3).unwrap();
        assert_eq!(
            word,
            r3.monomial(Monomial::from_indices([1, 2, 3]), BigInt::one())
        );
    }

    #[test]
    fn power_examples() {
        let r = ring(3, &[&[1], &[0, 1]]);
        let x1 = r.generator(1).unwrap();
        assert!(x1.power(2).is_zero());
        // alpha_3 = x2, so alpha_3^2 = x2^2 = x1 x2.
        let a3 = r.alpha(3).unwrap();
        assert_eq!(
            a3.power(2),
            r.monomial(Monomial::from_indices([1, 2]), BigInt::one())
        );
        assert_eq!(r.one().power(5), r.one());
        assert_eq!(a3.power(0), r.one());
    }

    #[test]
    fn graded_ranks() {
        let m4 = BottMatrix::zero(4).unwrap();
        assert_eq!(graded_rank(&m4, 2), 6);
        let m3 = BottMatrix::zero(3).unwrap();
        assert_eq!(graded_rank(&m3, 3), 1);
        assert_eq!(graded_rank(&m3, 4), 0);
        let m2 = BottMatrix::zero(2).unwrap();
        assert_eq!(graded_rank(&m2, 1), 2);
        for n in 1..=4 {
            let m = BottMatrix::zero(n).unwrap();
            for k in 0..=n + 1 {
                assert_eq!(degree_basis(n, k).len() as u128, graded_rank(&m, k));
            }
        }
    }

    #[test]
    fn top_class_survives() {
        let r = ring(4, &[&[2], &[1, -1], &[0, 3, 1]]);
        let mut top = r.one();
        for j in 1..=4 {
            top = top.mul(&r.generator(j).unwrap()).unwrap();
        }
        assert_eq!(
            top,
            r.monomial(Monomial::from_indices([1, 2, 3, 4]), BigInt::one())
        );
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<BottMatrix>();
        assert_send_sync::<Ring>();
        assert_send_sync::<RingElement>();
        assert_send_sync::<DegreeTwoClass>();
        assert_send_sync::<Monomial>();

        // concurrent reads of one shared ring agree
        let r = ring(4, &[&[1], &[0, 2], &[0, -1, 1]]);
        let expect = r.alpha(4).unwrap().power(2);
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| {
                    assert_eq!(r.alpha(4).unwrap().power(2), expect);
                });
            }
        });
    }

    #[test]
    fn ambient_mismatch_is_detected() {
        let r1 = Ring::new(BottMatrix::hirzebruch(1));
        let r2 = Ring::new(BottMatrix::hirzebruch(2));
        let a = r1.generator(2).unwrap();
        let b = r2.generator(2).unwrap();
        assert_eq!(a.mul(&b).unwrap_err(), Error::AmbientMismatch);
    }

    #[test]
    fn degree_two_class_roundtrip() {
        let r = ring(3, &[&[1], &[0, 1]]);
        let z = DegreeTwoClass::from_i64(&[-1, 2, 0]);
        let e = r.embed(&z).unwrap();
        assert_eq!(e.as_degree_two().unwrap(), z);
        assert!(z.is_primitive());
        assert_eq!(z.canonical_sign(), z);
        let neg = DegreeTwoClass::from_i64(&[1, -2, 0]);
        assert_eq!(neg.canonical_sign(), z);
    }

    /// Order-randomized reducer: same rewrite, arbitrary choice of which
    /// repeated index to resolve. Used to check confluence.
    fn reduce_any_order(
        m: &BottMatrix,
        exps: Vec<u32>,
        coeff: BigInt,
        pick: &mut u64,
    ) -> BTreeMap<Monomial, BigInt> {
        let mut acc = BTreeMap::new();
        let mut work = vec![(exps, coeff)];
        while let Some((e, c)) = work.pop() {
            let repeated: Vec<usize> = (1..=m.n()).filter(|&i| e[i - 1] >= 2).collect();
            if repeated.is_empty() {
                let mono = Monomial::from_indices((1..=m.n()).filter(|&i| e[i - 1] == 1));
                *acc.entry(mono).or_insert_with(BigInt::zero) += c;
                continue;
            }
            // xorshift step for the arbitrary choice
            *pick ^= *pick << 13;
            *pick ^= *pick >> 7;
            *pick ^= *pick << 17;
            let j = repeated[(*pick % repeated.len() as u64) as usize];
            if j == 1 {
                continue;
            }
            for (i, v) in m.col(j).iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let mut e2 = e.clone();
                e2[j - 1] -= 1;
                e2[i] += 1;
                work.push((e2, &c * v));
            }
        }
        acc.retain(|_, c: &mut BigInt| !c.is_zero());
        acc
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = BottMatrix> {
        let count = n * (n - 1) / 2;
        proptest::collection::vec(-3i64..=3, count).prop_map(move |vals| {
            let mut it = vals.into_iter();
            let cols: Vec<Vec<BigInt>> = (2..=n)
                .map(|j| (1..j).map(|_| BigInt::from(it.next().unwrap())).collect())
                .collect();
            BottMatrix::from_cols(n, cols).unwrap()
        })
    }

    fn arb_element(r: Ring, max_deg: usize) -> impl Strategy<Value = RingElement> {
        let n = r.n();
        let monos: Vec<Monomial> = (0..=max_deg.min(n))
            .flat_map(|k| degree_basis(n, k))
            .collect();
        proptest::collection::vec((0..monos.len(), -4i64..=4), 0..5).prop_map(move |picks| {
            let mut e = r.zero();
            for (idx, c) in picks {
                e = &e + &r.monomial(monos[idx], BigInt::from(c));
            }
            e
        })
    }

    fn matrix_and_elements() -> impl Strategy<Value = (RingElement, RingElement, RingElement)> {
        arb_matrix(4).prop_flat_map(|m| {
            let r = Ring::new(m);
            (
                arb_element(r.clone(), 2),
                arb_element(r.clone(), 2),
                arb_element(r, 2),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms((a, b, c) in matrix_and_elements()) {
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
            prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
            prop_assert_eq!(a.mul(&(&b + &c)).unwrap(), &a.mul(&b).unwrap() + &a.mul(&c).unwrap());
        }

        #[test]
        fn squares_match_alpha_relation(m in arb_matrix(4)) {
            let r = Ring::new(m);
            for j in 1..=4 {
                let xj = r.generator(j).unwrap();
                let lhs = xj.mul(&xj).unwrap();
                let rhs = r.alpha(j).unwrap().mul(&xj).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn grading_respected(m in arb_matrix(4)) {
            let r = Ring::new(m);
            let x2 = r.generator(2).unwrap();
            let a = &r.generator(1).unwrap() + &x2.mul(&r.generator(3).unwrap()).unwrap();
            for (mono, _) in a.mul(&a).unwrap().terms() {
                // degrees present in a are 1 and 2; products land in 2..=4
                prop_assert!(mono.degree() >= 2 && mono.degree() <= 4);
            }
            let b = x2.mul(&r.generator(4).unwrap()).unwrap();
            for (mono, _) in b.terms() {
                prop_assert_eq!(mono.degree(), 2);
            }
        }

        #[test]
        fn closed_form_degree_two_product_matches_engine(m in arb_matrix(4), zc in proptest::collection::vec(-5i64..=5, 4), wc in proptest::collection::vec(-5i64..=5, 4)) {
            let r = Ring::new(m.clone());
            let z = DegreeTwoClass::from_i64(&zc);
            let w = DegreeTwoClass::from_i64(&wc);
            let via_engine = r.embed(&z).unwrap().mul(&r.embed(&w).unwrap()).unwrap();
            let coords = mul_degree_two(&m, &z, &w);
            let basis = degree_basis(4, 2);
            for (mono, coord) in basis.iter().zip(&coords) {
                prop_assert_eq!(&via_engine.coefficient(mono), coord);
            }
            prop_assert_eq!(degree_two_square_is_zero(&m, &z), r.embed(&z).unwrap().power(2).is_zero());
        }

        #[test]
        fn reduction_is_confluent(m in arb_matrix(4), seed in 1u64..u64::MAX) {
            let r = Ring::new(m.clone());
            // product of two random square-free monomials
            let all: Vec<Monomial> = (0..=4).flat_map(|k| degree_basis(4, k)).collect();
            let a = all[(seed % all.len() as u64) as usize];
            let b = all[((seed / 64) % all.len() as u64) as usize];
            let ea = r.monomial(a, BigInt::one());
            let eb = r.monomial(b, BigInt::one());
            let largest_first = ea.mul(&eb).unwrap();

            let mut exps = vec![0u32; 4];
            for i in a.indices() { exps[i - 1] += 1; }
            for i in b.indices() { exps[i - 1] += 1; }
            let mut pick = seed | 1;
            let random_order = reduce_any_order(&m, exps, BigInt::one(), &mut pick);
            let expect: Vec<(Monomial, BigInt)> = largest_first.terms().map(|(m, c)| (*m, c.clone())).collect();
            let got: Vec<(Monomial, BigInt)> = random_order.into_iter().collect();
            prop_assert_eq!(expect, got);
        }
    }
}

//! Isomorphism-invariant data of H*(B_n).
//!
//! A primitive square-vanishing class must take the shape
//! x_j - alpha_j/2 (alpha_j even) or 2x_j - alpha_j (otherwise), and exists
//! exactly at the stages where alpha_j^2 = 0. Everything else here is
//! derived from that set in a basis-free way, so equal fingerprints are a
//! necessary condition for a graded ring isomorphism.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::matrix::BottMatrix;
use crate::ring::{degree_two_square_is_zero, mul_degree_two, DegreeTwoClass};
use crate::smith;

/// The set X(B_n): one canonical primitive square-vanishing class per
/// stage j with alpha_j^2 = 0, sign-normalized, ordered by stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareVanishingSet {
    elements: Vec<DegreeTwoClass>,
    stages: Vec<usize>,
}

impl SquareVanishingSet {
    pub fn elements(&self) -> &[DegreeTwoClass] {
        &self.elements
    }

    /// Stages contributing an element, ascending.
    pub fn stages(&self) -> &[usize] {
        &self.stages
    }

    /// t = |X(B_n)|.
    pub fn t(&self) -> usize {
        self.elements.len()
    }

    /// Membership up to sign.
    pub fn contains_up_to_sign(&self, z: &DegreeTwoClass) -> bool {
        let c = z.canonical_sign();
        self.elements.contains(&c)
    }
}

/// Per-stage flags: does alpha_j^2 vanish in H*(B_n)?
pub fn square_zero_stages(matrix: &BottMatrix) -> Vec<bool> {
    (1..=matrix.n())
        .map(|j| {
            let a = matrix.alpha(j).expect("stage in range");
            degree_two_square_is_zero(matrix, &a)
        })
        .collect()
}

/// The canonical square-vanishing set.
///
/// For each stage with alpha_j^2 = 0 this emits x_j - alpha_j/2 when
/// every twist coefficient is even and the primitive form 2x_j - alpha_j
/// otherwise. These are, up to sign, all primitive square-vanishing
/// classes of H^2.
pub fn square_vanishing_set(matrix: &BottMatrix) -> SquareVanishingSet {
    let n = matrix.n();
    let flags = square_zero_stages(matrix);
    let mut elements = Vec::new();
    let mut stages = Vec::new();
    let two = BigInt::from(2);
    for j in 1..=n {
        if !flags[j - 1] {
            continue;
        }
        let alpha = matrix.alpha(j).expect("stage in range");
        let all_even = alpha.coeffs().iter().all(|c| (c % &two).is_zero());
        let mut coeffs: Vec<BigInt>;
        if all_even {
            coeffs = alpha.coeffs().iter().map(|c| -(c / &two)).collect();
            coeffs[j - 1] = BigInt::one();
        } else {
            coeffs = alpha.coeffs().iter().map(|c| -c).collect();
            coeffs[j - 1] = two.clone();
        }
        let z = DegreeTwoClass::new(coeffs).canonical_sign();
        debug_assert!(z.is_primitive());
        elements.push(z);
        stages.push(j);
    }
    SquareVanishingSet { elements, stages }
}

/// True iff alpha_j^2 = 0 for every stage, i.e. t = n.
pub fn is_q_trivial(matrix: &BottMatrix) -> bool {
    square_zero_stages(matrix).iter().all(|&b| b)
}

/// True iff the square-vanishing stages are exactly an initial segment.
pub fn is_well_ordered(matrix: &BottMatrix) -> bool {
    let flags = square_zero_stages(matrix);
    let t = flags.iter().filter(|&&b| b).count();
    flags.iter().take(t).all(|&b| b)
}

/// Computable isomorphism invariants, used as non-isomorphism witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub n: usize,
    pub t: usize,
    /// Index of the sublattice of H^2 spanned by X(B_n); 0 when the span
    /// has rank below n.
    pub span_index: BigInt,
    /// Elementary divisors of the pairing map sending unordered pairs of
    /// X-elements to their product in the degree-4 monomial basis.
    pub product_divisors: Vec<BigInt>,
    /// Number of classes z in H^2 tensor Z/2 with z^2 = 0 mod 2.
    pub mod2_square_zero_count: u64,
}

/// Which fingerprint field differs first; doubles as a non-isomorphism
/// witness label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FingerprintField {
    N,
    T,
    SpanIndex,
    ProductDivisors,
    Mod2SquareZeroCount,
}

impl FingerprintField {
    pub fn name(&self) -> &'static str {
        match self {
            FingerprintField::N => "n",
            FingerprintField::T => "t",
            FingerprintField::SpanIndex => "spanIndex",
            FingerprintField::ProductDivisors => "productDivisors",
            FingerprintField::Mod2SquareZeroCount => "mod2SquareZeroCount",
        }
    }
}

impl Fingerprint {
    /// First differing field, if any, in a fixed comparison order.
    pub fn first_difference(&self, other: &Fingerprint) -> Option<FingerprintField> {
        if self.n != other.n {
            return Some(FingerprintField::N);
        }
        if self.t != other.t {
            return Some(FingerprintField::T);
        }
        if self.span_index != other.span_index {
            return Some(FingerprintField::SpanIndex);
        }
        if self.product_divisors != other.product_divisors {
            return Some(FingerprintField::ProductDivisors);
        }
        if self.mod2_square_zero_count != other.mod2_square_zero_count {
            return Some(FingerprintField::Mod2SquareZeroCount);
        }
        None
    }
}

/// Compute the fingerprint of a presentation. Equal fingerprints are
/// necessary, not sufficient, for graded ring isomorphism.
///
/// The mod-2 field enumerates all 2^n classes, so this is sized for the
/// small stage counts the census works at.
pub fn fingerprint(matrix: &BottMatrix) -> Fingerprint {
    let n = matrix.n();
    let xset = square_vanishing_set(matrix);
    let t = xset.t();

    let rows: Vec<Vec<BigInt>> = xset
        .elements()
        .iter()
        .map(|z| z.coeffs().to_vec())
        .collect();
    let span_index = smith::lattice_index(&rows, n).unwrap_or_else(BigInt::zero);

    let mut product_rows: Vec<Vec<BigInt>> = Vec::new();
    for a in 0..t {
        for b in a..t {
            product_rows.push(mul_degree_two(
                matrix,
                &xset.elements()[a],
                &xset.elements()[b],
            ));
        }
    }
    let product_divisors = smith::elementary_divisors(&product_rows);

    let mut mod2 = 0u64;
    let two = BigInt::from(2);
    for bits in 0u64..(1u64 << n) {
        let coeffs: Vec<BigInt> = (0..n).map(|i| BigInt::from((bits >> i) & 1)).collect();
        let sq = mul_degree_two(
            matrix,
            &DegreeTwoClass::new(coeffs.clone()),
            &DegreeTwoClass::new(coeffs),
        );
        if sq.iter().all(|c| (c % &two).is_zero()) {
            mod2 += 1;
        }
    }

    Fingerprint {
        n,
        t,
        span_index,
        product_divisors,
        mod2_square_zero_count: mod2,
    }
}

/// Exhaustively scan primitive degree-two classes with coefficients in
/// [-bound, bound] for vanishing squares. Slow; used as an oracle in tests
/// and retained here because the completeness contract of
/// `square_vanishing_set` is stated against it.
pub fn brute_force_square_vanishing(
    matrix: &BottMatrix,
    bound: i64,
) -> Result<Vec<DegreeTwoClass>> {
    let n = matrix.n();
    let mut found: Vec<DegreeTwoClass> = Vec::new();
    let width = (2 * bound + 1) as u64;
    let total = width.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let coeffs: Vec<BigInt> = (0..n)
            .map(|_| {
                let v = (c % width) as i64 - bound;
                c /= width;
                BigInt::from(v)
            })
            .collect();
        let z = DegreeTwoClass::new(coeffs);
        if z.is_zero() || !z.is_primitive() {
            continue;
        }
        if degree_two_square_is_zero(matrix, &z) {
            let canon = z.canonical_sign();
            if !found.contains(&canon) {
                found.push(canon);
            }
        }
    }
    found.sort();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    fn m(n: usize, cols: &[&[i64]]) -> BottMatrix {
        BottMatrix::from_cols_i64(n, cols).unwrap()
    }

    #[test]
    fn product_tower_has_all_generators() {
        let sigma0 = BottMatrix::hirzebruch(0);
        let x = square_vanishing_set(&sigma0);
        assert_eq!(x.t(), 2);
        assert_eq!(
            x.elements(),
            &[
                DegreeTwoClass::from_i64(&[1, 0]),
                DegreeTwoClass::from_i64(&[0, 1])
            ]
        );
    }

    #[test]
    fn odd_hirzebruch_set() {
        let sigma1 = BottMatrix::hirzebruch(1);
        let x = square_vanishing_set(&sigma1);
        assert_eq!(x.t(), 2);
        assert_eq!(
            x.elements(),
            &[
                DegreeTwoClass::from_i64(&[1, 0]),
                DegreeTwoClass::from_i64(&[-1, 2])
            ]
        );
    }

    #[test]
    fn stage_three_excluded_when_square_nonzero() {
        let mm = m(3, &[&[1], &[0, 1]]);
        let x = square_vanishing_set(&mm);
        assert_eq!(x.t(), 2);
        assert_eq!(x.stages(), &[1, 2]);
        assert_eq!(
            x.elements(),
            &[
                DegreeTwoClass::from_i64(&[1, 0, 0]),
                DegreeTwoClass::from_i64(&[-1, 2, 0])
            ]
        );
        // brute-force scan with |c_i| <= 8 finds exactly the same set
        let brute = brute_force_square_vanishing(&mm, 8).unwrap();
        let mut canon: Vec<DegreeTwoClass> = x.elements().to_vec();
        canon.sort();
        assert_eq!(brute, canon);
    }

    #[test]
    fn emitted_elements_square_to_zero() {
        for cols in [
            vec![vec![2i64], vec![0, 0], vec![4, -2, 0]],
            vec![vec![1], vec![1, 0], vec![0, 0, 2]],
            vec![vec![-2], vec![2, 2], vec![0, 2, 0]],
        ] {
            let slices: Vec<&[i64]> = cols.iter().map(|c| c.as_slice()).collect();
            let mm = m(4, &slices);
            let ring = Ring::new(mm.clone());
            for z in square_vanishing_set(&mm).elements() {
                assert!(ring.embed(z).unwrap().power(2).is_zero(), "{z} in {mm}");
            }
        }
    }

    #[test]
    fn q_triviality() {
        assert!(is_q_trivial(&BottMatrix::zero(4).unwrap()));
        for a in -3..=3 {
            assert!(is_q_trivial(&BottMatrix::hirzebruch(a)));
        }
        assert!(!is_q_trivial(&m(3, &[&[1], &[0, 1]])));
    }

    #[test]
    fn well_orderedness_and_the_witness_tower() {
        assert!(is_well_ordered(&BottMatrix::zero(3).unwrap()));
        // alpha_3^2 != 0 but alpha_4 = x1 squares to zero: not well-ordered.
        let m4 = m(4, &[&[1], &[0, 1], &[1, 0, 0]]);
        assert!(!is_well_ordered(&m4));
        let flags = square_zero_stages(&m4);
        assert_eq!(flags, vec![true, true, false, true]);
    }

    #[test]
    fn fingerprint_span_indices() {
        let f0 = fingerprint(&BottMatrix::hirzebruch(0));
        assert_eq!(f0.span_index, BigInt::from(1));
        let f1 = fingerprint(&BottMatrix::hirzebruch(1));
        assert_eq!(f1.span_index, BigInt::from(2));
        assert!(f0.first_difference(&f1).is_some());

        let f3 = fingerprint(&BottMatrix::hirzebruch(3));
        assert_eq!(f1, f3);
        assert_eq!(f1.first_difference(&f3), None);
    }

    #[test]
    fn two_stage_towers_are_q_trivial_with_t_two() {
        for a in -5..=5 {
            let f = fingerprint(&BottMatrix::hirzebruch(a));
            assert_eq!(f.t, 2);
            assert!(is_q_trivial(&BottMatrix::hirzebruch(a)));
        }
    }

    #[test]
    fn mod2_count_separates_nothing_on_hirzebruch_pairs() {
        // all four classes square to zero mod 2 over Sigma_even; over
        // Sigma_odd the class x2 does not.
        let even = fingerprint(&BottMatrix::hirzebruch(2));
        let odd = fingerprint(&BottMatrix::hirzebruch(1));
        assert_eq!(even.mod2_square_zero_count, 4);
        assert_eq!(odd.mod2_square_zero_count, 2);
    }
}

//! Graded ring isomorphisms between Bott cohomology rings: verification,
//! complete search in the Q-trivial case, bounded backtracking search in
//! general, and the stage-4 case classification.
//!
//! A candidate is an integer matrix P acting on H^2; it extends to a ring
//! map exactly when every relation x_j^2 = alpha_j x_j is preserved, and
//! to an isomorphism exactly when additionally |det P| = 1. `iso_check`
//! decides both, and everything else in this module funnels its claims
//! through that single gate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::invariants::{
    fingerprint, is_q_trivial, is_well_ordered, square_vanishing_set, FingerprintField,
};
use crate::matrix::BottMatrix;
use crate::moves::{bundle_change, stage_swap, well_order, MoveTrace};
use crate::ring::{mul_degree_two, DegreeTwoClass, Ring, RingElement};
use crate::smith::{adjugate, determinant, mat_mul};

/// An integer matrix on H^2 inducing (or failing to induce) a graded ring
/// map from the source presentation to the target one. Column j holds the
/// coordinates of phi(x_j) in the target basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoCandidate {
    source: BottMatrix,
    target: BottMatrix,
    p: Vec<Vec<BigInt>>,
    verified: bool,
}

impl IsoCandidate {
    pub fn new(source: BottMatrix, target: BottMatrix, p: Vec<Vec<BigInt>>) -> Result<Self> {
        if source.n() != target.n() {
            return Err(Error::DimensionMismatch {
                left: source.n(),
                right: target.n(),
            });
        }
        let n = source.n();
        if p.len() != n || p.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                left: p.len(),
                right: n,
            });
        }
        Ok(IsoCandidate {
            source,
            target,
            p,
            verified: false,
        })
    }

    /// Construct and immediately verify; fails with `Unverified` when the
    /// candidate is not a graded ring isomorphism.
    pub fn verified_new(
        source: BottMatrix,
        target: BottMatrix,
        p: Vec<Vec<BigInt>>,
    ) -> Result<Self> {
        let mut c = IsoCandidate::new(source, target, p)?;
        if !c.verify()? {
            return Err(Error::Unverified);
        }
        Ok(c)
    }

    pub fn identity(m: &BottMatrix) -> Self {
        let n = m.n();
        let p = (0..n)
            .map(|r| (0..n).map(|c| BigInt::from(u8::from(r == c))).collect())
            .collect();
        IsoCandidate::verified_new(m.clone(), m.clone(), p).expect("identity is an isomorphism")
    }

    pub fn source(&self) -> &BottMatrix {
        &self.source
    }

    pub fn target(&self) -> &BottMatrix {
        &self.target
    }

    pub fn matrix_p(&self) -> &[Vec<BigInt>] {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.source.n()
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    /// phi(x_j) as a degree-two class in the target basis.
    pub fn column_class(&self, j: usize) -> DegreeTwoClass {
        DegreeTwoClass::new(self.p.iter().map(|row| row[j - 1].clone()).collect())
    }

    /// The image of a degree-two class: P * z.
    pub fn apply_class(&self, z: &DegreeTwoClass) -> DegreeTwoClass {
        let n = self.n();
        let mut out = vec![BigInt::zero(); n];
        for (r, row) in self.p.iter().enumerate() {
            for c in 0..n {
                if row[c].is_zero() {
                    continue;
                }
                let add = &row[c] * z.coeff(c + 1);
                out[r] += add;
            }
        }
        DegreeTwoClass::new(out)
    }

    pub fn det(&self) -> BigInt {
        determinant(&self.p)
    }

    /// Run `iso_check` and latch the flag on success.
    pub fn verify(&mut self) -> Result<bool> {
        let ok = iso_check(self)?;
        if ok {
            self.verified = true;
        }
        Ok(ok)
    }

    /// Extend multiplicatively to a whole ring element of the source.
    pub fn apply(&self, e: &RingElement) -> Result<RingElement> {
        if e.ring().matrix() != &self.source {
            return Err(Error::AmbientMismatch);
        }
        let tring = Ring::new(self.target.clone());
        self.apply_in(&tring, e)
    }

    fn apply_in(&self, tring: &Ring, e: &RingElement) -> Result<RingElement> {
        let images: Vec<RingElement> = (1..=self.n())
            .map(|j| tring.embed(&self.column_class(j)))
            .collect::<Result<_>>()?;
        let mut acc = tring.zero();
        for (mono, coeff) in e.terms() {
            let mut term = tring.one();
            for i in mono.indices() {
                term = term.mul(&images[i - 1])?;
            }
            acc = &acc + &term.scale(coeff);
        }
        Ok(acc)
    }

    /// Composition source -> self.target = other.source -> other.target.
    pub fn compose(&self, other: &IsoCandidate) -> Result<IsoCandidate> {
        if !self.verified || !other.verified {
            return Err(Error::Unverified);
        }
        if self.target != other.source {
            return Err(Error::EndpointMismatch);
        }
        let p = mat_mul(&other.p, &self.p);
        IsoCandidate::verified_new(self.source.clone(), other.target.clone(), p).map_err(|e| {
            Error::InternalInvariantViolation(format!("composition failed verification: {e}"))
        })
    }

    /// The inverse isomorphism; integral because |det P| = 1.
    pub fn inverse(&self) -> Result<IsoCandidate> {
        if !self.verified {
            return Err(Error::Unverified);
        }
        let det = self.det();
        debug_assert!(det.abs().is_one());
        let adj = adjugate(&self.p);
        let p_inv: Vec<Vec<BigInt>> = adj
            .into_iter()
            .map(|row| row.into_iter().map(|v| &det * v).collect())
            .collect();
        IsoCandidate::verified_new(self.target.clone(), self.source.clone(), p_inv).map_err(|e| {
            Error::InternalInvariantViolation(format!("inverse failed verification: {e}"))
        })
    }
}

/// Decide whether the candidate is a graded ring isomorphism: |det P| = 1
/// and phi(x_j)^2 = phi(alpha_j) phi(x_j) in the target for every stage.
///
/// Both sides of each relation are degree-two products, so the check runs
/// on the closed-form multiplier.
pub fn iso_check(c: &IsoCandidate) -> Result<bool> {
    if !c.det().abs().is_one() {
        return Ok(false);
    }
    let n = c.n();
    let images: Vec<DegreeTwoClass> = (1..=n).map(|j| c.column_class(j)).collect();
    for j in 1..=n {
        let alpha = c.source.alpha(j)?;
        let mut phi_alpha = DegreeTwoClass::zero(n);
        for i in 1..j {
            let coeff = alpha.coeff(i);
            if !coeff.is_zero() {
                phi_alpha = &phi_alpha + &images[i - 1].scale(coeff);
            }
        }
        let lhs = mul_degree_two(&c.target, &images[j - 1], &images[j - 1]);
        let rhs = mul_degree_two(&c.target, &phi_alpha, &images[j - 1]);
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Does P map span(x_1..x_k) onto span(y_1..y_k)? With columns as images
/// this reads: rows below k vanish on the first k columns, and the leading
/// k x k block is unimodular.
pub fn is_stable(c: &IsoCandidate, k: usize) -> Result<bool> {
    if !c.verified {
        return Err(Error::Unverified);
    }
    let n = c.n();
    if k < 1 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    for r in k..n {
        for col in 0..k {
            if !c.p[r][col].is_zero() {
                return Ok(false);
            }
        }
    }
    let block: Vec<Vec<BigInt>> = (0..k).map(|r| c.p[r][..k].to_vec()).collect();
    Ok(determinant(&block).abs().is_one())
}

/// Reason attached to a NON_ISO verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonIsoReason {
    /// A fingerprint field differs; re-checkable from the two matrices.
    Fingerprint(FingerprintField),
    /// The complete signed-bijection family was exhausted without a hit
    /// (Q-trivial case only, where that family is provably exhaustive).
    ExhaustedCompleteFamily,
}

/// Outcome of an isomorphism decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsoVerdict {
    Iso {
        candidate: IsoCandidate,
        /// Set when the ring isomorphism upgrades to a diffeomorphism
        /// statement (stage count at most four).
        diffeomorphic: bool,
    },
    NonIso {
        reason: NonIsoReason,
    },
    Unknown {
        coeff_bound: i64,
    },
}

impl IsoVerdict {
    pub fn status(&self) -> &'static str {
        match self {
            IsoVerdict::Iso { .. } => "ISO",
            IsoVerdict::NonIso { .. } => "NON_ISO",
            IsoVerdict::Unknown { .. } => "UNKNOWN",
        }
    }

    pub fn is_iso(&self) -> bool {
        matches!(self, IsoVerdict::Iso { .. })
    }

    pub fn candidate(&self) -> Option<&IsoCandidate> {
        match self {
            IsoVerdict::Iso { candidate, .. } => Some(candidate),
            _ => None,
        }
    }
}

/// Complete decision for Q-trivial pairs. Any isomorphism permutes the
/// square-vanishing sets up to sign, and X spans H^2 rationally, so the
/// 2^n n! signed bijections exhaust all possible P matrices.
pub fn qtrivial_search(a: &BottMatrix, b: &BottMatrix) -> Result<IsoVerdict> {
    let found = qtrivial_candidates(a, b, true)?;
    match found.into_iter().next() {
        Some(candidate) => {
            let diffeo = a.n() <= 4;
            Ok(IsoVerdict::Iso {
                candidate,
                diffeomorphic: diffeo,
            })
        }
        None => Ok(IsoVerdict::NonIso {
            reason: NonIsoReason::ExhaustedCompleteFamily,
        }),
    }
}

/// All isomorphisms between two Q-trivial presentations, one per signed
/// bijection of square-vanishing sets that extends to a ring map.
pub fn qtrivial_isomorphisms(a: &BottMatrix, b: &BottMatrix) -> Result<Vec<IsoCandidate>> {
    qtrivial_candidates(a, b, false)
}

fn qtrivial_candidates(
    a: &BottMatrix,
    b: &BottMatrix,
    first_only: bool,
) -> Result<Vec<IsoCandidate>> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    if !is_q_trivial(a) || !is_q_trivial(b) {
        return Err(Error::NotQTrivial);
    }
    let n = a.n();
    let za = square_vanishing_set(a);
    let wb = square_vanishing_set(b);
    debug_assert_eq!(za.t(), n);
    debug_assert_eq!(wb.t(), n);

    // columns of Z are the source X-elements
    let z_mat: Vec<Vec<BigInt>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| za.elements()[c].coeff(r + 1).clone())
                .collect()
        })
        .collect();
    let adj_z = adjugate(&z_mat);
    let det_z = determinant(&z_mat);
    debug_assert!(!det_z.is_zero());

    let mut out = Vec::new();
    let mut perm: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    signed_bijection_scan(n, &mut perm, &mut used, &mut |perm: &[usize],
                                                         signs: u128|
     -> bool {
        // W' columns: signed target elements in permutation order
        let w_mat: Vec<Vec<BigInt>> = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        let v = wb.elements()[perm[c]].coeff(r + 1).clone();
                        if signs >> c & 1 == 1 {
                            -v
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let numer = mat_mul(&w_mat, &adj_z);
        let mut p = Vec::with_capacity(n);
        for row in numer {
            let mut prow = Vec::with_capacity(n);
            for v in row {
                let (q, r) = v.div_rem(&det_z);
                if !r.is_zero() {
                    return false; // not integral
                }
                prow.push(q);
            }
            p.push(prow);
        }
        if let Ok(c) = IsoCandidate::verified_new(a.clone(), b.clone(), p) {
            out.push(c);
            return first_only;
        }
        false
    });
    Ok(out)
}

/// Visit permutations in lexicographic order and sign masks in ascending
/// binary order; the callback returns true to stop the scan.
fn signed_bijection_scan(
    n: usize,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    f: &mut impl FnMut(&[usize], u128) -> bool,
) -> bool {
    if perm.len() == n {
        for signs in 0..(1u128 << n) {
            if f(perm, signs) {
                return true;
            }
        }
        return false;
    }
    for k in 0..n {
        if used[k] {
            continue;
        }
        used[k] = true;
        perm.push(k);
        let stop = signed_bijection_scan(n, perm, used, f);
        perm.pop();
        used[k] = false;
        if stop {
            return true;
        }
    }
    false
}

/// Backtracking search over columns of P with entries in
/// [-coeff_bound, coeff_bound]. Both sides are well-ordered first and the
/// certificate is conjugated back through the well-ordering traces.
/// Pruning: every isomorphism is t-stable and matches the square-vanishing
/// sets up to sign, which pins columns 1..=t up to a signed assignment;
/// later columns are scanned with per-column relation checks.
pub fn bounded_search(a: &BottMatrix, b: &BottMatrix, coeff_bound: i64) -> Result<IsoVerdict> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    assert!(coeff_bound > 0, "coefficient bound must be positive");
    let wa = well_order(a)?;
    let wb = well_order(b)?;
    let fa = fingerprint(wa.end());
    let fb = fingerprint(wb.end());
    if let Some(field) = fa.first_difference(&fb) {
        return Ok(IsoVerdict::NonIso {
            reason: NonIsoReason::Fingerprint(field),
        });
    }
    match search_well_ordered(wa.end(), wb.end(), coeff_bound)? {
        Some(core) => {
            let full = wa
                .composed_iso()?
                .compose(&core)?
                .compose(&wb.composed_pullback()?)?;
            Ok(IsoVerdict::Iso {
                candidate: full,
                diffeomorphic: a.n() <= 4,
            })
        }
        None => Ok(IsoVerdict::Unknown { coeff_bound }),
    }
}

/// Column backtracking between well-ordered presentations with equal
/// fingerprints. Returns the lexicographically first hit in a fixed
/// deterministic enumeration order.
fn search_well_ordered(
    a: &BottMatrix,
    b: &BottMatrix,
    coeff_bound: i64,
) -> Result<Option<IsoCandidate>> {
    let n = a.n();
    let xa = square_vanishing_set(a);
    let xb = square_vanishing_set(b);
    debug_assert_eq!(xa.t(), xb.t());
    let t = xa.t();
    debug_assert_eq!(xa.stages(), &(1..=t).collect::<Vec<_>>()[..]);

    let bound = BigInt::from(coeff_bound);
    let mut cols: Vec<DegreeTwoClass> = Vec::with_capacity(n);
    let mut used = vec![false; t];
    let found = assign_column(a, b, &xa, &xb, &bound, t, &mut cols, &mut used)?;
    match found {
        Some(p) => {
            let cand = IsoCandidate::verified_new(a.clone(), b.clone(), p).map_err(|e| {
                Error::InternalInvariantViolation(format!(
                    "relation-checked candidate failed final verification: {e}"
                ))
            })?;
            Ok(Some(cand))
        }
        None => Ok(None),
    }
}

#[allow(clippy::too_many_arguments)]
fn assign_column(
    a: &BottMatrix,
    target: &BottMatrix,
    xa: &crate::invariants::SquareVanishingSet,
    xb: &crate::invariants::SquareVanishingSet,
    bound: &BigInt,
    t: usize,
    cols: &mut Vec<DegreeTwoClass>,
    used: &mut Vec<bool>,
) -> Result<Option<Vec<Vec<BigInt>>>> {
    let n = a.n();
    let j = cols.len() + 1;
    if j > n {
        let p: Vec<Vec<BigInt>> = (0..n)
            .map(|r| (0..n).map(|c| cols[c].coeff(r + 1).clone()).collect())
            .collect();
        if determinant(&p).abs().is_one() {
            return Ok(Some(p));
        }
        return Ok(None);
    }

    if j <= t {
        // phi(z_j) must be a signed element of X(target); that determines
        // the column because z_j has x_j-coefficient 1 or 2.
        let z = &xa.elements()[j - 1];
        let d = z.coeff(j).clone();
        for k in 0..t {
            if used[k] {
                continue;
            }
            for negate in [false, true] {
                let w = if negate {
                    -&xb.elements()[k]
                } else {
                    xb.elements()[k].clone()
                };
                let mut numer = w;
                for (i, col) in cols.iter().enumerate() {
                    let zc = z.coeff(i + 1);
                    if !zc.is_zero() {
                        numer = &numer - &col.scale(zc);
                    }
                }
                let mut col_coeffs = Vec::with_capacity(n);
                let mut ok = true;
                for r in 1..=n {
                    let (q, rem) = numer.coeff(r).div_rem(&d);
                    if !rem.is_zero() || q.abs() > *bound {
                        ok = false;
                        break;
                    }
                    col_coeffs.push(q);
                }
                if !ok {
                    continue;
                }
                let col = DegreeTwoClass::new(col_coeffs);
                if !column_relation_holds(a, target, cols, &col, j)? {
                    continue;
                }
                cols.push(col);
                used[k] = true;
                let res = assign_column(a, target, xa, xb, bound, t, cols, used)?;
                used[k] = false;
                cols.pop();
                if res.is_some() {
                    return Ok(res);
                }
            }
        }
        return Ok(None);
    }

    // free column: odometer over [-bound, bound]^n, with the image of
    // alpha_j hoisted out of the scan
    let alpha = a.alpha(j)?;
    let mut mapped = DegreeTwoClass::zero(n);
    for i in 1..j {
        let c = alpha.coeff(i);
        if !c.is_zero() {
            mapped = &mapped + &cols[i - 1].scale(c);
        }
    }
    // in the last column the trailing (n-t)x(n-t) block must be
    // unimodular: P is block-triangular by t-stability and its leading
    // block is unimodular, so every valid isomorphism survives this cut
    let check_trailing = j == n && t < n;
    let width = 2 * i64::try_from(bound).expect("small bound") + 1;
    let total = (width as u128).pow(n as u32);
    let b_i64 = i64::try_from(bound).expect("small bound");
    for code in 0..total {
        let mut c = code;
        let coeffs: Vec<BigInt> = (0..n)
            .map(|_| {
                let v = (c % width as u128) as i64 - b_i64;
                c /= width as u128;
                BigInt::from(v)
            })
            .collect();
        let col = DegreeTwoClass::new(coeffs);
        if check_trailing && !trailing_block_unimodular(cols, &col, t, n) {
            continue;
        }
        if !relation_residue_is_zero(target, &mapped, &col) {
            continue;
        }
        cols.push(col);
        let res = assign_column(a, target, xa, xb, bound, t, cols, used)?;
        cols.pop();
        if res.is_some() {
            return Ok(res);
        }
    }
    Ok(None)
}

fn trailing_block_unimodular(
    cols: &[DegreeTwoClass],
    last: &DegreeTwoClass,
    t: usize,
    n: usize,
) -> bool {
    let block: Vec<Vec<BigInt>> = (t + 1..=n)
        .map(|r| {
            (t..cols.len())
                .map(|c| cols[c].coeff(r).clone())
                .chain(std::iter::once(last.coeff(r).clone()))
                .collect()
        })
        .collect();
    determinant(&block).abs().is_one()
}

/// Fused, allocation-free comparison of col^2 against mapped*col in the
/// degree-4 basis, bailing at the first differing coordinate. Same closed
/// form as `mul_degree_two`.
fn relation_residue_is_zero(
    target: &BottMatrix,
    mapped: &DegreeTwoClass,
    col: &DegreeTwoClass,
) -> bool {
    let n = target.n();
    for j in 2..=n {
        let cj = col.coeff(j);
        let mj = mapped.coeff(j);
        for i in 1..j {
            let ci = col.coeff(i);
            let mi = mapped.coeff(i);
            let mut lhs = ci * cj;
            lhs = &lhs + &lhs;
            let mut rhs = mi * cj + mj * ci;
            let a_ij = target.entry(i, j);
            if !a_ij.is_zero() {
                lhs += cj * cj * a_ij;
                rhs += mj * cj * a_ij;
            }
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Check phi(x_j)^2 = phi(alpha_j) phi(x_j) given the already-chosen
/// earlier columns.
fn column_relation_holds(
    a: &BottMatrix,
    target: &BottMatrix,
    cols: &[DegreeTwoClass],
    col: &DegreeTwoClass,
    j: usize,
) -> Result<bool> {
    let alpha = a.alpha(j)?;
    let mut mapped = DegreeTwoClass::zero(a.n());
    for i in 1..j {
        let c = alpha.coeff(i);
        if !c.is_zero() {
            mapped = &mapped + &cols[i - 1].scale(c);
        }
    }
    Ok(relation_residue_is_zero(target, &mapped, col))
}

/// The shape of a verified stage-4 isomorphism. When t = 2 the image of
/// x_3 falls into one of three forms, and the first two reduce to a
/// 3-stable residual by rewriting the target.
#[derive(Debug, Clone)]
pub enum CaseTag {
    QTrivial,
    Stable(usize),
    Case1 {
        trace: MoveTrace,
        residual: IsoCandidate,
    },
    Case2 {
        b: BigInt,
        trace: MoveTrace,
        residual: IsoCandidate,
    },
    Case3Exceptional,
}

impl CaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::QTrivial => "Q_TRIVIAL",
            CaseTag::Stable(_) => "STABLE",
            CaseTag::Case1 { .. } => "CASE1",
            CaseTag::Case2 { .. } => "CASE2",
            CaseTag::Case3Exceptional => "CASE3_EXCEPTIONAL",
        }
    }
}

/// Classify a verified isomorphism between well-ordered 4-stage
/// presentations. For CASE2 the returned residual candidate is the
/// composition with the bundle-change/stage-swap reduction on the target
/// and is checked to be 3-stable; the side conditions each case forces
/// are asserted, and their failure surfaces as an internal invariant
/// violation since a verified candidate cannot escape the trichotomy.
pub fn classify_iso_n4(c: &IsoCandidate) -> Result<CaseTag> {
    if !c.verified {
        return Err(Error::Unverified);
    }
    if c.n() != 4 {
        return Err(Error::WrongStage { n: c.n() });
    }
    if !is_well_ordered(&c.source) || !is_well_ordered(&c.target) {
        return Err(Error::NotWellOrdered);
    }
    let t_src = square_vanishing_set(&c.source).t();
    let t_tgt = square_vanishing_set(&c.target).t();
    if t_src != t_tgt {
        return Err(Error::InternalInvariantViolation(format!(
            "verified isomorphism with |X| mismatch: {t_src} vs {t_tgt}"
        )));
    }
    match t_src {
        4 => return Ok(CaseTag::QTrivial),
        3 => return Ok(CaseTag::Stable(3)),
        2 => {}
        other => {
            return Err(Error::InternalInvariantViolation(format!(
                "stage-4 tower with |X| = {other}; alpha_1 = 0 and alpha_2^2 = 0 force |X| >= 2"
            )))
        }
    }

    let col3 = c.column_class(3);
    let d3 = col3.coeff(3).clone();
    let d4 = col3.coeff(4).clone();
    let b = c.target.entry(3, 4).clone();
    let a34 = c.source.entry(3, 4).clone();
    let two = BigInt::from(2);

    if d4.is_zero() {
        if !d3.abs().is_one() {
            return Err(Error::UnmatchedForm(format!(
                "phi(x_3) has y_4-coefficient 0 and y_3-coefficient {d3}"
            )));
        }
        let trace = MoveTrace::identity(c.target.clone());
        let residual = c.clone();
        ensure_three_stable(&residual, "CASE1 candidate")?;
        return Ok(CaseTag::Case1 { trace, residual });
    }

    if d4.abs().is_one() {
        // phi(x_3) = eps (y_4 - (b/2) y_3) + w
        if (&b % &two) != BigInt::zero() || (&a34 - &b).mod_floor(&two) != BigInt::zero() {
            return Err(Error::InternalInvariantViolation(format!(
                "CASE2 with twist entries of different parity or odd b: a={a34}, b={b}"
            )));
        }
        if &d3 * &two != -(&d4 * &b) {
            return Err(Error::InternalInvariantViolation(format!(
                "CASE2 y_3-coefficient {d3} incompatible with b = {b}"
            )));
        }
        let mut trace = MoveTrace::identity(c.target.clone());
        if !b.is_zero() {
            let half_b = &b / &two;
            let u = DegreeTwoClass::multiple_of_variable(4, 3, half_b);
            let (_, mv) = bundle_change(trace.end(), 4, &u).map_err(|e| {
                Error::InternalInvariantViolation(format!(
                    "CASE2 bundle change precondition failed: {e}"
                ))
            })?;
            trace.push(mv)?;
        }
        let (_, swap) = stage_swap(trace.end(), 3).map_err(|e| {
            Error::InternalInvariantViolation(format!("CASE2 swap precondition failed: {e}"))
        })?;
        trace.push(swap)?;
        let residual = c.compose(&trace.composed_iso()?)?;
        ensure_three_stable(&residual, "CASE2 residual")?;
        return Ok(CaseTag::Case2 { b, trace, residual });
    }

    if d4.abs() == two {
        // phi(x_3) = eps (2 y_4 - b y_3) + w with both twist entries odd
        if !a34.abs().is_one() || !b.abs().is_one() {
            return Err(Error::InternalInvariantViolation(format!(
                "CASE3 requires |A^3_4| = |B^3_4| = 1, got a={a34}, b={b}"
            )));
        }
        let eps = &d4 / &two;
        if d3 != -(&eps * &b) {
            return Err(Error::InternalInvariantViolation(format!(
                "CASE3 y_3-coefficient {d3} incompatible with b = {b}"
            )));
        }
        return Ok(CaseTag::Case3Exceptional);
    }

    Err(Error::UnmatchedForm(format!(
        "phi(x_3) has y_4-coefficient {d4}"
    )))
}

fn ensure_three_stable(c: &IsoCandidate, what: &str) -> Result<()> {
    if !is_stable(c, 3)? {
        return Err(Error::InternalInvariantViolation(format!(
            "{what} is not 3-stable"
        )));
    }
    Ok(())
}

/// The four exceptional automorphisms of a tower with
/// alpha_4 = x_3 - alpha_3 / 2 (so A^3_4 = 1, A^i_4 = -A^i_3 / 2).
/// Each is verified before being returned.
pub fn exceptional_automorphisms(m: &BottMatrix) -> Result<Vec<IsoCandidate>> {
    if m.n() != 4 {
        return Err(Error::WrongShape(format!("stage count {} != 4", m.n())));
    }
    if !m.entry(3, 4).is_one() {
        return Err(Error::WrongShape(format!("A^3_4 = {} != 1", m.entry(3, 4))));
    }
    let two = BigInt::from(2);
    for i in 1..=2 {
        let a_i3 = m.entry(i, 3);
        let a_i4 = m.entry(i, 4);
        if !(a_i3 % &two).is_zero() || &(-a_i3) / &two != *a_i4 {
            return Err(Error::WrongShape(format!(
                "column 4 must be x_3 - alpha_3/2: entry ({i},4) = {a_i4}, entry ({i},3) = {a_i3}"
            )));
        }
    }
    let a13 = m.entry(1, 3).clone();
    let a23 = m.entry(2, 3).clone();
    let h13 = &a13 / &two;
    let h23 = &a23 / &two;

    // columns are images of x_1..x_4 in the x-basis
    let build = |c3: Vec<BigInt>, c4: Vec<BigInt>| -> Result<IsoCandidate> {
        let cols = [
            vec![
                BigInt::one(),
                BigInt::zero(),
                BigInt::zero(),
                BigInt::zero(),
            ],
            vec![
                BigInt::zero(),
                BigInt::one(),
                BigInt::zero(),
                BigInt::zero(),
            ],
            c3,
            c4,
        ];
        let p: Vec<Vec<BigInt>> = (0..4)
            .map(|r| (0..4).map(|c| cols[c][r].clone()).collect())
            .collect();
        IsoCandidate::verified_new(m.clone(), m.clone(), p).map_err(|e| {
            Error::InternalInvariantViolation(format!("exceptional automorphism rejected: {e}"))
        })
    };

    let neg = |v: &BigInt| -v;
    let phi = vec![
        // x_3 -> 2x_4 - x_3 + alpha_3, x_4 -> x_4
        build(
            vec![a13.clone(), a23.clone(), -BigInt::one(), two.clone()],
            vec![
                BigInt::zero(),
                BigInt::zero(),
                BigInt::zero(),
                BigInt::one(),
            ],
        )?,
        // x_3 -> 2x_4 - x_3 + alpha_3, x_4 -> x_4 - x_3 + alpha_3/2
        build(
            vec![a13.clone(), a23.clone(), -BigInt::one(), two.clone()],
            vec![h13.clone(), h23.clone(), -BigInt::one(), BigInt::one()],
        )?,
        // x_3 -> -2x_4 + x_3, x_4 -> -x_4
        build(
            vec![BigInt::zero(), BigInt::zero(), BigInt::one(), -two.clone()],
            vec![
                BigInt::zero(),
                BigInt::zero(),
                BigInt::zero(),
                -BigInt::one(),
            ],
        )?,
        // x_3 -> -2x_4 + x_3, x_4 -> -x_4 + x_3 - alpha_3/2
        build(
            vec![BigInt::zero(), BigInt::zero(), BigInt::one(), -two.clone()],
            vec![neg(&h13), neg(&h23), BigInt::one(), -BigInt::one()],
        )?,
    ];
    Ok(phi)
}

/// Full pipeline: well-order both sides, separate by fingerprint, then run
/// the complete Q-trivial decision or the bounded general search. For
/// stage counts at most four an ISO verdict is additionally a
/// diffeomorphism statement.
pub fn are_isomorphic(a: &BottMatrix, b: &BottMatrix, coeff_bound: i64) -> Result<IsoVerdict> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let wa = well_order(a)?;
    let wb = well_order(b)?;
    let fa = fingerprint(wa.end());
    let fb = fingerprint(wb.end());
    if let Some(field) = fa.first_difference(&fb) {
        return Ok(IsoVerdict::NonIso {
            reason: NonIsoReason::Fingerprint(field),
        });
    }
    let diffeo = a.n() <= 4;
    if fa.t == a.n() {
        // Q-trivial on both sides: complete decision.
        return match qtrivial_search(wa.end(), wb.end())? {
            IsoVerdict::Iso { candidate, .. } => {
                let full = wa
                    .composed_iso()?
                    .compose(&candidate)?
                    .compose(&wb.composed_pullback()?)?;
                Ok(IsoVerdict::Iso {
                    candidate: full,
                    diffeomorphic: diffeo,
                })
            }
            other => Ok(other),
        };
    }
    match search_well_ordered(wa.end(), wb.end(), coeff_bound)? {
        Some(core) => {
            let full = wa
                .composed_iso()?
                .compose(&core)?
                .compose(&wb.composed_pullback()?)?;
            Ok(IsoVerdict::Iso {
                candidate: full,
                diffeomorphic: diffeo,
            })
        }
        None => Ok(IsoVerdict::Unknown { coeff_bound }),
    }
}

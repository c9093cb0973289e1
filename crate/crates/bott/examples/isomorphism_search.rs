//! Deciding graded ring isomorphism: the complete Q-trivial search, the
//! bounded general search, and certificate handling.
//!
//! Run with: cargo run -p bott --example isomorphism_search

use bott::iso::{
    are_isomorphic, is_stable, iso_check, qtrivial_isomorphisms, qtrivial_search, IsoVerdict,
};
use bott::jsonio::{to_canonical_string, verdict_value};
use bott::matrix::BottMatrix;
use bott::moves::bundle_change;
use bott::ring::DegreeTwoClass;

fn main() {
    // Q-trivial pairs get a complete decision through signed bijections
    // of their square-vanishing sets.
    let s1 = BottMatrix::hirzebruch(1);
    let s3 = BottMatrix::hirzebruch(3);
    match qtrivial_search(&s1, &s3).unwrap() {
        IsoVerdict::Iso { candidate, .. } => {
            println!("twists 1 and 3: ISO, P = {:?}", candidate.matrix_p());
            println!("re-check: {}", iso_check(&candidate).unwrap());
        }
        other => println!("unexpected: {}", other.status()),
    }
    let autos = qtrivial_isomorphisms(&s1, &s1).unwrap();
    println!("ring automorphisms of the twisted surface: {}", autos.len());

    // The general pipeline: well-order, fingerprint, then search.
    let a = BottMatrix::from_cols_i64(4, &[&[1], &[0, 2], &[0, -1, 1]]).unwrap();
    let u = DegreeTwoClass::from_i64(&[0, 2, 0, 0]);
    let (b, _) = bundle_change(&a, 3, &u).unwrap();
    println!("\nsearching {a} vs {b}");
    let verdict = are_isomorphic(&a, &b, 3).unwrap();
    println!("verdict: {}", to_canonical_string(&verdict_value(&verdict)));
    if let IsoVerdict::Iso { candidate, .. } = &verdict {
        // every isomorphism restricts over the square-vanishing span
        println!("2-stable: {}", is_stable(candidate, 2).unwrap());
        let inv = candidate.inverse().unwrap();
        println!("inverse verified: {}", inv.verified());
    }

    // Fingerprint mismatches give a NON_ISO witness without any search.
    let verdict = are_isomorphic(&BottMatrix::hirzebruch(0), &s1, 3).unwrap();
    println!(
        "\neven vs odd twist: {}",
        to_canonical_string(&verdict_value(&verdict))
    );

    // Bounded searches report their limit honestly.
    let far_a = BottMatrix::from_cols_i64(3, &[&[5], &[0, 1]]).unwrap();
    let big_u = DegreeTwoClass::from_i64(&[7, 0, 0]);
    let (far_b, _) = bundle_change(&far_a, 2, &big_u).unwrap();
    let verdict = are_isomorphic(&far_a, &far_b, 2).unwrap();
    println!(
        "pair needing large coefficients at bound 2: {}",
        verdict.status()
    );
    let verdict = are_isomorphic(&far_a, &far_b, 8).unwrap();
    println!("same pair at bound 8: {}", verdict.status());
}

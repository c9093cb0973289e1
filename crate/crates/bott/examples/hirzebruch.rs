//! The parity classification of two-stage towers, with certificates in
//! both directions: an explicit rewrite chain for each isomorphic pair
//! and a fingerprint witness for each non-isomorphic one.
//!
//! Run with: cargo run -p bott --example hirzebruch

use bott::invariants::fingerprint;
use bott::iso::{are_isomorphic, IsoVerdict};
use bott::matrix::BottMatrix;
use bott::moves::{bundle_change, MoveTrace};
use bott::ring::DegreeTwoClass;

fn main() {
    // One bundle change with u = k x_1 drops the twist by 2k.
    let start = BottMatrix::hirzebruch(5);
    let mut trace = MoveTrace::identity(start.clone());
    for k in [1i64, 1] {
        let u = DegreeTwoClass::from_i64(&[k, 0]);
        let (_, mv) = bundle_change(trace.end(), 2, &u).unwrap();
        trace.push(mv).unwrap();
    }
    println!("chain: {} -> {}", trace.start(), trace.end());
    trace.replay().unwrap();
    println!(
        "replay ok; composed isomorphism verified: {}",
        trace.composed_iso().unwrap().verified()
    );

    // Full pairwise table for twists in [-3, 3].
    println!("\npairwise verdicts (rows/cols are twists -3..=3):");
    for a in -3i64..=3 {
        let mut row = String::new();
        for b in -3i64..=3 {
            let verdict =
                are_isomorphic(&BottMatrix::hirzebruch(a), &BottMatrix::hirzebruch(b), 4).unwrap();
            row.push(match verdict {
                IsoVerdict::Iso { .. } => '=',
                IsoVerdict::NonIso { .. } => '.',
                IsoVerdict::Unknown { .. } => '?',
            });
            row.push(' ');
        }
        println!("  twist {a:>2}: {row}");
    }

    // The separating invariant is the index of the square-vanishing span.
    let even = fingerprint(&BottMatrix::hirzebruch(0));
    let odd = fingerprint(&BottMatrix::hirzebruch(1));
    println!(
        "\nspan indices: even twist -> {}, odd twist -> {}",
        even.span_index, odd.span_index
    );
}

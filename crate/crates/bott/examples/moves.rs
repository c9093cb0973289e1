//! Certified rewrites: stage swaps, bundle changes, well-ordering, and
//! bounded move closures.
//!
//! Run with: cargo run -p bott --example moves

use bott::invariants::{fingerprint, is_well_ordered};
use bott::matrix::BottMatrix;
use bott::moves::{bundle_change, move_closure, stage_swap, well_order};
use bott::ring::DegreeTwoClass;

fn main() {
    // A four-stage tower whose third twist fails to square-vanish while
    // the fourth does: not well-ordered.
    let scrambled = BottMatrix::from_cols_i64(4, &[&[1], &[0, 1], &[1, 0, 0]]).unwrap();
    println!(
        "scrambled: {scrambled} (well-ordered: {})",
        is_well_ordered(&scrambled)
    );

    let trace = well_order(&scrambled).unwrap();
    println!(
        "well_order applied {} swap(s) -> {} (well-ordered: {})",
        trace.steps().len(),
        trace.end(),
        is_well_ordered(trace.end())
    );
    println!(
        "fingerprint preserved: {}",
        fingerprint(trace.start()) == fingerprint(trace.end())
    );

    // Every move ships a verified pullback isomorphism.
    let (swapped, mv) = stage_swap(&scrambled, 3).unwrap();
    println!("\nswap at stage 3 -> {swapped}");
    println!("induced map verified: {}", mv.induced().verified());

    // Bundle changes need the obstruction u(u - alpha) = 0.
    let m = BottMatrix::from_cols_i64(3, &[&[2], &[0, 1]]).unwrap();
    let legal = DegreeTwoClass::from_i64(&[1, 0, 0]);
    let (changed, mv2) = bundle_change(&m, 2, &legal).unwrap();
    println!("\nbundle change at stage 2 by {legal}: {m} -> {changed}");
    println!("induced map verified: {}", mv2.induced().verified());
    let illegal = DegreeTwoClass::from_i64(&[1, 1, 0]);
    println!(
        "illegal class {illegal}: {:?}",
        bundle_change(&m, 3, &illegal).unwrap_err()
    );

    // Bounded closure from one seed: everything reachable without
    // exceeding entry bound 3, bundle coefficients up to 2.
    let seed = BottMatrix::hirzebruch(3);
    let closure = move_closure(&seed, 3, 2, 10_000);
    println!("\nclosure of {seed} within entry bound 3:");
    for mat in &closure.matrices {
        println!("  {mat}");
    }
    println!("saturated: {}", closure.saturated);
}

//! Square-vanishing classes, Q-triviality, well-orderedness, and the
//! isomorphism fingerprint.
//!
//! Run with: cargo run -p bott --example square_vanishing

use bott::invariants::{
    brute_force_square_vanishing, fingerprint, is_q_trivial, is_well_ordered, square_vanishing_set,
};
use bott::jsonio::{fingerprint_value, to_canonical_string};
use bott::matrix::BottMatrix;

fn inspect(label: &str, matrix: &BottMatrix) {
    let x = square_vanishing_set(matrix);
    println!("{label}: {matrix}");
    println!("  t = {}", x.t());
    for (stage, z) in x.stages().iter().zip(x.elements()) {
        println!("  stage {stage}: {z}");
    }
    println!("  Q-trivial: {}", is_q_trivial(matrix));
    println!("  well-ordered: {}", is_well_ordered(matrix));
    let f = fingerprint(matrix);
    println!(
        "  fingerprint: {}",
        to_canonical_string(&fingerprint_value(&f))
    );
}

fn main() {
    inspect("product of lines", &BottMatrix::hirzebruch(0));
    inspect("twisted surface", &BottMatrix::hirzebruch(1));

    // A tower whose third stage fails to square-vanish.
    let m3 = BottMatrix::from_cols_i64(3, &[&[1], &[0, 1]]).unwrap();
    inspect("three stages", &m3);

    // The emitted set is complete: a brute-force scan over primitive
    // classes with coefficients in [-8, 8] finds nothing else.
    let brute = brute_force_square_vanishing(&m3, 8).unwrap();
    println!(
        "  brute-force scan agrees: {}",
        brute.len() == square_vanishing_set(&m3).t()
    );

    // A scrambled tower: square-vanishing stage after a non-vanishing one.
    let scrambled = BottMatrix::from_cols_i64(4, &[&[1], &[0, 1], &[1, 0, 0]]).unwrap();
    inspect("scrambled", &scrambled);

    // Fingerprints separate the two parity classes of surfaces.
    let f0 = fingerprint(&BottMatrix::hirzebruch(0));
    let f1 = fingerprint(&BottMatrix::hirzebruch(1));
    println!(
        "surfaces with twists 0 and 1 first differ at: {:?}",
        f0.first_difference(&f1).map(|field| field.name())
    );
    let f3 = fingerprint(&BottMatrix::hirzebruch(3));
    println!(
        "twists 1 and 3 differ: {}",
        f1.first_difference(&f3).is_some()
    );
}

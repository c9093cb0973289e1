//! Exact arithmetic in the cohomology ring of a Bott tower.
//!
//! Run with: cargo run -p bott --example ring_arithmetic

use bott::matrix::BottMatrix;
use bott::ring::{degree_basis, graded_rank, Ring};

fn main() {
    // A three-stage tower: alpha_2 = x1, alpha_3 = x2.
    let matrix = BottMatrix::from_cols_i64(3, &[&[1], &[0, 1]]).unwrap();
    println!("tower: {matrix}");

    let ring = Ring::new(matrix.clone());
    let x1 = ring.generator(1).unwrap();
    let x2 = ring.generator(2).unwrap();
    let x3 = ring.generator(3).unwrap();

    // The defining relations collapse squares onto lower terms.
    println!("x1 * x1 = {}", x1.mul(&x1).unwrap());
    println!("x2 * x2 = {}", x2.mul(&x2).unwrap());
    println!("x3 * x3 = {}", x3.mul(&x3).unwrap());

    // Products reduce to the square-free normal form, largest index first.
    let prod = x2.mul(&x3).unwrap().mul(&x2).unwrap();
    println!("(x2 x3) * x2 = {prod}");

    // Twist classes and their powers.
    let alpha3 = ring.alpha(3).unwrap();
    println!("alpha_3 = {alpha3}, alpha_3^2 = {}", alpha3.power(2));

    // Sums and scalar multiples behave like any commutative ring.
    let mixed = &(&x1 + &x2)
        .mul(&(&x3 - &x1.scale(&3.into())).clone())
        .unwrap()
        + &ring.one();
    println!("(x1 + x2)(x3 - 3 x1) + 1 = {mixed}");

    // Graded ranks are binomial coefficients; the top class never dies.
    for k in 0..=3 {
        let basis = degree_basis(3, k);
        println!(
            "rank H^{} = {} (basis {})",
            2 * k,
            graded_rank(&matrix, k),
            basis
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    let top = x1.mul(&x2).unwrap().mul(&x3).unwrap();
    println!("x1 x2 x3 = {top}");
}

//! The four exceptional automorphisms of a tower with
//! alpha_4 = x_3 - alpha_3/2, and the stage-4 case classification.
//!
//! Run with: cargo run -p bott --example exceptional_automorphisms

use bott::iso::{classify_iso_n4, exceptional_automorphisms, CaseTag, IsoCandidate};
use bott::matrix::BottMatrix;
use bott::moves::{bundle_change, stage_swap};
use bott::ring::DegreeTwoClass;

fn main() {
    // alpha_3 = 2 x_2, alpha_4 = x_3 - x_2: the shape carrying the
    // exceptional automorphisms.
    let tower = BottMatrix::from_cols_i64(4, &[&[1], &[0, 2], &[0, -1, 1]]).unwrap();
    println!("tower: {tower}");

    let phis = exceptional_automorphisms(&tower).unwrap();
    for (k, phi) in phis.iter().enumerate() {
        println!(
            "phi_{}: x3 -> {}, x4 -> {}, verified {}",
            k + 1,
            phi.column_class(3),
            phi.column_class(4),
            phi.verified()
        );
        let tag = classify_iso_n4(phi).unwrap();
        println!("       classified: {}", tag.name());
    }

    // For contrast, a CASE2 candidate built from moves, which the
    // classifier reduces to a 3-stable residual.
    let source = BottMatrix::from_cols_i64(4, &[&[1], &[2, 2], &[1, 1, 0]]).unwrap();
    let (_, sw) = stage_swap(&source, 3).unwrap();
    let u = DegreeTwoClass::from_i64(&[0, 0, 2, 0]);
    let (_, bc) = bundle_change(sw.result_matrix(), 4, &u).unwrap();
    let cand: IsoCandidate = sw
        .induced()
        .inverse()
        .unwrap()
        .compose(&bc.induced().inverse().unwrap())
        .unwrap();
    println!(
        "\nmove-composed candidate {} -> {}",
        cand.source(),
        cand.target()
    );
    match classify_iso_n4(&cand).unwrap() {
        CaseTag::Case2 { b, trace, residual } => {
            println!(
                "CASE2 with b = {b}; reduction uses {} move(s)",
                trace.steps().len()
            );
            println!(
                "residual endpoints: {} -> {}",
                residual.source(),
                residual.target()
            );
        }
        other => println!("classified: {}", other.name()),
    }

    // Identity on a product tower sits in the Q-trivial case.
    let id = IsoCandidate::identity(&BottMatrix::zero(4).unwrap());
    println!(
        "\nidentity on the product tower: {}",
        classify_iso_n4(&id).unwrap().name()
    );
}

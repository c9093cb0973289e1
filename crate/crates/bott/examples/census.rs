//! A small census: enumerate every tower within an entry bound, partition
//! into classes with certificates, write the report, and re-verify it.
//!
//! Run with: cargo run -p bott --example census

use bott::census::{classify, csv_summary, enumerate, render_report, verify_report, CensusConfig};
use bott::invariants::fingerprint;

fn main() {
    let mut cfg = CensusConfig::new(3, 1);
    cfg.workers = 2;

    let total = enumerate(&cfg).unwrap().count();
    println!(
        "enumerated {total} towers (n = {}, entries within {})",
        cfg.n, cfg.entry_bound
    );

    let report = classify(&cfg).unwrap();
    println!("classes: {}", report.stats.class_count);
    for (i, class) in report.classes.iter().enumerate() {
        let f = fingerprint(&class.rep);
        println!(
            "  class {i}: rep {}, {} member(s), {} certificate(s), t = {}",
            class.rep,
            class.members.len(),
            class.certs.len(),
            f.t
        );
    }
    if report.unresolved.is_empty() {
        println!("no unresolved pairs");
    } else {
        println!("unresolved pairs (equal fingerprints, no bounded merge):");
        for (a, b) in &report.unresolved {
            println!("  {a}  vs  {b}");
        }
    }

    // The JSONL report is canonical: identical runs give identical bytes.
    let text = render_report(&report);
    let path = std::env::temp_dir().join("bott-census-example.jsonl");
    std::fs::write(&path, &text).unwrap();
    println!(
        "\nwrote {} line(s) to {}",
        text.lines().count(),
        path.display()
    );
    println!("verify_report: {}", verify_report(&path).unwrap());

    println!("\nCSV summary:\n{}", csv_summary(&report));
}

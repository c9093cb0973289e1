//! Batch command-line front end. One verb per capability, canonical JSON
//! on stdout, machine-readable errors on stderr.
//!
//! Exit codes: 0 = success / ISO / valid; 1 = NON_ISO / invalid;
//! 2 = UNKNOWN; 64 = usage error; 65 = bad input data or rejected
//! precondition; 66 = unreadable input file; 70 = internal invariant
//! violation (a bug in the engine, not in the input).

use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use serde_json::{Map, Number, Value};

use crate::census::{self, CensusConfig};
use crate::error::{Error, Result};
use crate::invariants::{fingerprint, is_q_trivial, is_well_ordered, square_vanishing_set};
use crate::iso::{
    are_isomorphic, classify_iso_n4, exceptional_automorphisms, is_stable, CaseTag, IsoVerdict,
    NonIsoReason,
};
use crate::jsonio::{
    candidate_value, class_value, fingerprint_value, matrix_value, move_kind_value, parse_matrix,
    parse_trace, parse_value, to_canonical_string, verdict_value,
};
use crate::matrix::BottMatrix;
use crate::moves::{bundle_change, stage_swap, MoveTrace};
use crate::ring::DegreeTwoClass;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NOINPUT: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

const USAGE: &str = "usage: bott <verb> [args]\n\
  inv <matrix.json> [--format json|csv]      invariants and fingerprint\n\
  iso <a.json> <b.json> [--bound K]          isomorphism verdict (exit 0/1/2)\n\
  move --swap J <matrix.json>                stage swap\n\
  move --bundle J --u C1,..,C(J-1) <matrix.json>  bundle change\n\
  replay <trace.json>                        re-verify a move trace\n\
  census --n N --c C [--u-bound U] [--coeff-bound K]\n\
         [--node-cap M] [--workers W] [--out PATH] [--format json|csv]\n\
  verify <report.jsonl>                      re-verify a census report\n\
  paper-check                                run the built-in fixture suite";

/// Entry point shared by the binary and the tests.
pub fn run(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let code = match dispatch(args, out, err) {
        Ok(code) => code,
        Err(e) => {
            report_error(err, &e);
            match e {
                Error::InternalInvariantViolation(_) => EXIT_INTERNAL,
                Error::Io(_) => EXIT_NOINPUT,
                _ => EXIT_DATA,
            }
        }
    };
    let _ = out.flush();
    let _ = err.flush();
    code
}

fn report_error(err: &mut dyn Write, e: &Error) {
    let mut obj = Map::new();
    obj.insert("detail".into(), Value::String(e.to_string()));
    obj.insert("error".into(), Value::String(e.code().into()));
    let _ = writeln!(err, "{}", to_canonical_string(&Value::Object(obj)));
}

fn usage_error(err: &mut dyn Write, detail: &str) -> i32 {
    let mut obj = Map::new();
    obj.insert("detail".into(), Value::String(detail.into()));
    obj.insert("error".into(), Value::String("Usage".into()));
    let _ = writeln!(err, "{}", to_canonical_string(&Value::Object(obj)));
    let _ = writeln!(err, "{USAGE}");
    EXIT_USAGE
}

fn dispatch(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let Some(verb) = args.first() else {
        return Ok(usage_error(err, "missing verb"));
    };
    let rest = &args[1..];
    match verb.as_str() {
        "inv" => cmd_inv(rest, out, err),
        "iso" => cmd_iso(rest, out, err),
        "move" => cmd_move(rest, out, err),
        "replay" => cmd_replay(rest, out, err),
        "census" => cmd_census(rest, out, err),
        "verify" => cmd_verify(rest, out, err),
        "paper-check" => cmd_paper_check(out),
        other => Ok(usage_error(err, &format!("unknown verb {other:?}"))),
    }
}

fn load_matrix(path: &str) -> Result<BottMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&parse_value(&text)?)
}

/// Minimal flag scanner: returns positional arguments and looks up flag
/// values by name.
struct Flags<'a> {
    positional: Vec<&'a str>,
    named: Vec<(&'a str, &'a str)>,
}

fn scan_flags<'a>(
    args: &'a [String],
    value_flags: &[&str],
) -> std::result::Result<Flags<'a>, String> {
    let mut positional = Vec::new();
    let mut named = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let a = args[i].as_str();
        if let Some(name) = a.strip_prefix("--") {
            if value_flags.contains(&name) {
                i += 1;
                let Some(v) = args.get(i) else {
                    return Err(format!("flag --{name} needs a value"));
                };
                named.push((name, v.as_str()));
            } else {
                return Err(format!("unknown flag --{name}"));
            }
        } else {
            positional.push(a);
        }
        i += 1;
    }
    Ok(Flags { positional, named })
}

impl<'a> Flags<'a> {
    fn get(&self, name: &str) -> Option<&'a str> {
        self.named
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
}

fn cmd_inv(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let flags = match scan_flags(args, &["format"]) {
        Ok(f) => f,
        Err(e) => return Ok(usage_error(err, &e)),
    };
    let [path] = flags.positional[..] else {
        return Ok(usage_error(err, "inv takes exactly one matrix file"));
    };
    let m = load_matrix(path)?;
    let f = fingerprint(&m);
    let x = square_vanishing_set(&m);
    match flags.get("format").unwrap_or("json") {
        "json" => {
            let mut obj = Map::new();
            obj.insert("fingerprint".into(), fingerprint_value(&f));
            obj.insert("isQTrivial".into(), Value::Bool(is_q_trivial(&m)));
            obj.insert("isWellOrdered".into(), Value::Bool(is_well_ordered(&m)));
            obj.insert("n".into(), Value::Number(Number::from(m.n() as u64)));
            obj.insert(
                "squareVanishing".into(),
                Value::Array(x.elements().iter().map(|z| class_value(z, m.n())).collect()),
            );
            obj.insert("t".into(), Value::Number(Number::from(f.t as u64)));
            writeln!(out, "{}", to_canonical_string(&Value::Object(obj)))?;
        }
        "csv" => {
            writeln!(
                out,
                "n,t,spanIndex,productDivisors,mod2SquareZeroCount,isQTrivial,isWellOrdered"
            )?;
            let divisors: Vec<String> = f.product_divisors.iter().map(|d| d.to_string()).collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                f.n,
                f.t,
                f.span_index,
                divisors.join(";"),
                f.mod2_square_zero_count,
                is_q_trivial(&m),
                is_well_ordered(&m)
            )?;
        }
        other => return Ok(usage_error(err, &format!("unknown format {other:?}"))),
    }
    Ok(EXIT_OK)
}

fn cmd_iso(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let flags = match scan_flags(args, &["bound"]) {
        Ok(f) => f,
        Err(e) => return Ok(usage_error(err, &e)),
    };
    let [pa, pb] = flags.positional[..] else {
        return Ok(usage_error(err, "iso takes exactly two matrix files"));
    };
    let bound: i64 = parse_int(flags.get("bound").unwrap_or("3"), "bound")?;
    if bound < 1 {
        return Ok(usage_error(err, "bound must be positive"));
    }
    let a = load_matrix(pa)?;
    let b = load_matrix(pb)?;
    let verdict = are_isomorphic(&a, &b, bound)?;
    writeln!(out, "{}", to_canonical_string(&verdict_value(&verdict)))?;
    Ok(match verdict {
        IsoVerdict::Iso { .. } => EXIT_OK,
        IsoVerdict::NonIso { .. } => EXIT_NO,
        IsoVerdict::Unknown { .. } => EXIT_UNKNOWN,
    })
}

fn cmd_move(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let flags = match scan_flags(args, &["swap", "bundle", "u"]) {
        Ok(f) => f,
        Err(e) => return Ok(usage_error(err, &e)),
    };
    let [path] = flags.positional[..] else {
        return Ok(usage_error(err, "move takes exactly one matrix file"));
    };
    let m = load_matrix(path)?;
    let (result, mv) = match (flags.get("swap"), flags.get("bundle")) {
        (Some(js), None) => {
            let j: usize = parse_int(js, "stage")?;
            stage_swap(&m, j)?
        }
        (None, Some(js)) => {
            let j: usize = parse_int(js, "stage")?;
            let Some(us) = flags.get("u") else {
                return Ok(usage_error(err, "--bundle requires --u"));
            };
            let coeffs: Vec<BigInt> = us
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad coefficient {s:?}")))
                })
                .collect::<Result<_>>()?;
            if coeffs.len() >= j.max(1) {
                return Err(Error::BadSupport { j });
            }
            let mut full = coeffs;
            full.resize(m.n(), BigInt::from(0));
            bundle_change(&m, j, &DegreeTwoClass::new(full))?
        }
        _ => {
            return Ok(usage_error(
                err,
                "move needs exactly one of --swap J or --bundle J --u ...",
            ))
        }
    };
    let mut obj = Map::new();
    obj.insert("iso".into(), candidate_value(mv.induced()));
    obj.insert("matrix".into(), matrix_value(&result));
    obj.insert("move".into(), move_kind_value(mv.kind()));
    writeln!(out, "{}", to_canonical_string(&Value::Object(obj)))?;
    Ok(EXIT_OK)
}

fn cmd_replay(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let [path] = args else {
        return Ok(usage_error(err, "replay takes exactly one trace file"));
    };
    let text = std::fs::read_to_string(path)?;
    let value = parse_value(&text)?;
    match parse_trace(&value) {
        Ok(trace) => {
            trace.replay()?;
            let mut obj = Map::new();
            obj.insert("end".into(), matrix_value(trace.end()));
            obj.insert("start".into(), matrix_value(trace.start()));
            obj.insert(
                "steps".into(),
                Value::Number(Number::from(trace.steps().len() as u64)),
            );
            obj.insert("valid".into(), Value::Bool(true));
            writeln!(out, "{}", to_canonical_string(&Value::Object(obj)))?;
            Ok(EXIT_OK)
        }
        Err(Error::Parse(e)) => Err(Error::Parse(e)),
        Err(Error::Io(e)) => Err(Error::Io(e)),
        Err(e) => {
            // structurally fine, but a step fails to re-validate
            let mut obj = Map::new();
            obj.insert("detail".into(), Value::String(e.to_string()));
            obj.insert("valid".into(), Value::Bool(false));
            writeln!(out, "{}", to_canonical_string(&Value::Object(obj)))?;
            Ok(EXIT_NO)
        }
    }
}

fn cmd_census(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let flags = match scan_flags(
        args,
        &[
            "n",
            "c",
            "u-bound",
            "coeff-bound",
            "node-cap",
            "workers",
            "out",
            "format",
        ],
    ) {
        Ok(f) => f,
        Err(e) => return Ok(usage_error(err, &e)),
    };
    if !flags.positional.is_empty() {
        return Ok(usage_error(err, "census takes no positional arguments"));
    }
    let (Some(ns), Some(cs)) = (flags.get("n"), flags.get("c")) else {
        return Ok(usage_error(err, "census requires --n and --c"));
    };
    let mut cfg = CensusConfig::new(parse_int(ns, "n")?, parse_int(cs, "c")?);
    if let Some(v) = flags.get("u-bound") {
        cfg.u_bound = parse_int(v, "u-bound")?;
    }
    if let Some(v) = flags.get("coeff-bound") {
        cfg.coeff_bound = parse_int(v, "coeff-bound")?;
    }
    if let Some(v) = flags.get("node-cap") {
        cfg.node_cap = parse_int(v, "node-cap")?;
    }
    if let Some(v) = flags.get("workers") {
        cfg.workers = parse_int(v, "workers")?;
    }
    let start = Instant::now();
    let report = census::classify(&cfg)?;
    let rendered = match flags.get("format").unwrap_or("json") {
        "json" => census::render_report(&report),
        "csv" => census::csv_summary(&report),
        other => return Ok(usage_error(err, &format!("unknown format {other:?}"))),
    };
    match flags.get("out") {
        Some(path) => std::fs::write(path, rendered)?,
        None => out.write_all(rendered.as_bytes())?,
    }
    writeln!(
        err,
        "census n={} c={}: {} classes, {} unresolved, {:.2?}",
        cfg.n,
        cfg.entry_bound,
        report.stats.class_count,
        report.stats.unresolved_count,
        start.elapsed()
    )?;
    Ok(EXIT_OK)
}

fn cmd_verify(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let [path] = args else {
        return Ok(usage_error(err, "verify takes exactly one report file"));
    };
    let ok = census::verify_report(std::path::Path::new(path))?;
    let mut obj = Map::new();
    obj.insert("valid".into(), Value::Bool(ok));
    writeln!(out, "{}", to_canonical_string(&Value::Object(obj)))?;
    Ok(if ok { EXIT_OK } else { EXIT_NO })
}

// ---------------------------------------------------------------------
// paper-check: the built-in fixture suite
// ---------------------------------------------------------------------

struct Fixture {
    name: &'static str,
    outcome: Result<String>,
}

fn cmd_paper_check(out: &mut dyn Write) -> Result<i32> {
    let fixtures = vec![
        Fixture {
            name: "hirzebruch-parity",
            outcome: check_hirzebruch_parity(),
        },
        Fixture {
            name: "parity-witness",
            outcome: check_parity_witness(),
        },
        Fixture {
            name: "exceptional-automorphisms",
            outcome: check_exceptional_automorphisms(),
        },
        Fixture {
            name: "case2-reduction",
            outcome: check_case2_reduction(),
        },
    ];
    let mut all_ok = true;
    for f in &fixtures {
        match &f.outcome {
            Ok(detail) => writeln!(out, "PASS  {:<28} {detail}", f.name)?,
            Err(e) => {
                all_ok = false;
                writeln!(out, "FAIL  {:<28} {e}", f.name)?;
            }
        }
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_NO })
}

fn fail(msg: String) -> Error {
    Error::InternalInvariantViolation(msg)
}

/// Two-stage towers are ring-isomorphic exactly when the twists share a
/// parity; ISO pairs get explicit one-move certificates.
fn check_hirzebruch_parity() -> Result<String> {
    let mut iso_pairs = 0usize;
    for a in -5i64..=5 {
        for b in -5i64..=5 {
            let sa = BottMatrix::hirzebruch(a);
            let sb = BottMatrix::hirzebruch(b);
            let verdict = are_isomorphic(&sa, &sb, 6)?;
            let same_parity = (a - b) % 2 == 0;
            match verdict {
                IsoVerdict::Iso {
                    candidate,
                    diffeomorphic,
                } => {
                    if !same_parity {
                        return Err(fail(format!("{a} vs {b}: unexpected ISO")));
                    }
                    if !diffeomorphic || !candidate.verified() {
                        return Err(fail(format!("{a} vs {b}: certificate not usable")));
                    }
                    // one bundle change with u = ((a-b)/2) x_1 is a full
                    // diffeomorphism certificate
                    let k = (a - b) / 2;
                    let u = DegreeTwoClass::from_i64(&[k, 0]);
                    let (end, mv) = bundle_change(&sa, 2, &u)?;
                    if end != sb {
                        return Err(fail(format!("{a} vs {b}: move lands on {end}")));
                    }
                    let mut trace = MoveTrace::identity(sa.clone());
                    trace.push(mv)?;
                    trace.replay()?;
                    if fingerprint(trace.start()) != fingerprint(trace.end()) {
                        return Err(fail(format!("{a} vs {b}: fingerprint drifted")));
                    }
                    iso_pairs += 1;
                }
                IsoVerdict::NonIso { reason } => {
                    if same_parity {
                        return Err(fail(format!("{a} vs {b}: unexpected NON_ISO")));
                    }
                    if !matches!(
                        reason,
                        NonIsoReason::Fingerprint(crate::invariants::FingerprintField::SpanIndex)
                    ) {
                        return Err(fail(format!("{a} vs {b}: wrong witness {reason:?}")));
                    }
                }
                IsoVerdict::Unknown { .. } => {
                    return Err(fail(format!("{a} vs {b}: UNKNOWN on a complete family")));
                }
            }
        }
    }
    Ok(format!(
        "121 pairs decided, {iso_pairs} with move certificates"
    ))
}

fn check_parity_witness() -> Result<String> {
    let verdict = are_isomorphic(&BottMatrix::hirzebruch(0), &BottMatrix::hirzebruch(1), 3)?;
    match verdict {
        IsoVerdict::NonIso {
            reason: NonIsoReason::Fingerprint(field),
        } => Ok(format!("separated by {}", field.name())),
        other => Err(fail(format!(
            "expected fingerprint witness, got {}",
            other.status()
        ))),
    }
}

/// The running 4-stage fixture with alpha_4 = x_3 - alpha_3/2.
fn exceptional_fixture() -> BottMatrix {
    BottMatrix::from_cols_i64(4, &[&[1], &[0, 2], &[0, -1, 1]]).expect("fixed shape")
}

fn check_exceptional_automorphisms() -> Result<String> {
    let m = exceptional_fixture();
    let phis = exceptional_automorphisms(&m)?;
    if phis.len() != 4 {
        return Err(fail(format!(
            "expected 4 automorphisms, got {}",
            phis.len()
        )));
    }
    for (k, phi) in phis.iter().enumerate() {
        if !phi.verified() {
            return Err(fail(format!("automorphism {} failed iso_check", k + 1)));
        }
        match classify_iso_n4(phi)? {
            CaseTag::Case3Exceptional => {}
            other => {
                return Err(fail(format!(
                    "automorphism {} classified as {}",
                    k + 1,
                    other.name()
                )))
            }
        }
    }
    let p3 = &phis[2];
    if p3.column_class(3) != DegreeTwoClass::from_i64(&[0, 0, 1, -2])
        || p3.column_class(4) != DegreeTwoClass::from_i64(&[0, 0, 0, -1])
    {
        return Err(fail("third automorphism deviates from its listing".into()));
    }
    Ok("4 automorphisms verified, all CASE3_EXCEPTIONAL".into())
}

/// Run one forward-constructed CASE2 candidate through the classifier and
/// insist on a replayable reduction with a 3-stable residual.
fn expect_case2(cand: &crate::iso::IsoCandidate, want_b: i64) -> Result<()> {
    match classify_iso_n4(cand)? {
        CaseTag::Case2 { b, residual, trace } => {
            if b != BigInt::from(want_b) {
                return Err(fail(format!("expected b = {want_b}, got {b}")));
            }
            if !is_stable(&residual, 3)? {
                return Err(fail("residual not 3-stable".into()));
            }
            trace.replay()?;
            Ok(())
        }
        other => Err(fail(format!(
            "forward-constructed instance classified as {}",
            other.name()
        ))),
    }
}

/// Forward-construct CASE2 candidates: swapping a tower with A^3_4 = 0
/// gives the b = 0 family, and following the swap with a bundle change by
/// m y_3 at stage 4 gives b = -2m. The classifier must reduce each to a
/// 3-stable residual.
fn check_case2_reduction() -> Result<String> {
    let mut count = 0usize;
    for a12 in [-1i64, 0, 1] {
        for (c1, c2) in [(0i64, 1i64), (1, 1), (-1, 1), (1, -2)] {
            // alpha_4^2 != 0 in the source
            if c2 * (2 * c1 + c2 * a12) == 0 {
                continue;
            }
            // swap-only: b = 0, with an independent stage-3 twist
            for (q1, q2) in [(0i64, 1i64), (1, 1)] {
                if q2 * (2 * q1 + q2 * a12) == 0 {
                    continue;
                }
                let source = BottMatrix::from_cols_i64(4, &[&[a12], &[q1, q2], &[c1, c2, 0]])
                    .expect("fixed shape");
                let (_, sw) = stage_swap(&source, 3)?;
                let cand = sw.induced().inverse()?;
                expect_case2(&cand, 0)?;
                count += 1;
            }
            // swap then bundle change: b = -2m
            for m_shift in [-2i64, -1, 1, 2] {
                let source = BottMatrix::from_cols_i64(
                    4,
                    &[&[a12], &[m_shift * c1, m_shift * c2], &[c1, c2, 0]],
                )
                .expect("fixed shape");
                let (_, sw) = stage_swap(&source, 3)?;
                let u = DegreeTwoClass::from_i64(&[0, 0, m_shift, 0]);
                let (_, bc) = bundle_change(sw.result_matrix(), 4, &u)?;
                let cand = sw.induced().inverse()?.compose(&bc.induced().inverse()?)?;
                expect_case2(&cand, -2 * m_shift)?;
                count += 1;
            }
        }
    }
    if count < 20 {
        return Err(fail(format!("only {count} instances exercised")));
    }
    Ok(format!("{count} instances reduced to 3-stable residuals"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_vec(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        let code = run(&args, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    fn write_matrix(dir: &std::path::Path, name: &str, m: &BottMatrix) -> String {
        let path = dir.join(name);
        std::fs::write(&path, to_canonical_string(&matrix_value(m))).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn temp_dir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("bott-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn iso_exit_codes_match_verdicts() {
        let dir = temp_dir("iso");
        let p0 = write_matrix(&dir, "s0.json", &BottMatrix::hirzebruch(0));
        let p1 = write_matrix(&dir, "s1.json", &BottMatrix::hirzebruch(1));
        let p3 = write_matrix(&dir, "s3.json", &BottMatrix::hirzebruch(3));

        let (code, out, _) = run_vec(&["iso", &p0, &p1]);
        assert_eq!(code, EXIT_NO);
        assert!(out.contains("\"status\":\"NON_ISO\""));
        assert!(out.contains("spanIndex"));

        let (code, out, _) = run_vec(&["iso", &p1, &p3]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"status\":\"ISO\""));
        assert!(out.contains("\"diffeomorphic\":true"));
    }

    #[test]
    fn obstructed_swap_reports_exit_65() {
        let dir = temp_dir("move");
        let p1 = write_matrix(&dir, "s1.json", &BottMatrix::hirzebruch(1));
        let (code, _, err) = run_vec(&["move", "--swap", "1", &p1]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("SwapObstructed"));
    }

    #[test]
    fn move_and_replay_round_trip() {
        let dir = temp_dir("replay");
        let p5 = write_matrix(&dir, "s5.json", &BottMatrix::hirzebruch(5));
        let (code, out, _) = run_vec(&["move", "--bundle", "2", "--u", "2", &p5]);
        assert_eq!(code, EXIT_OK);
        let v = parse_value(out.trim()).unwrap();
        assert_eq!(
            parse_matrix(&v["matrix"]).unwrap(),
            BottMatrix::hirzebruch(1)
        );

        // wrap the move into a trace file and replay it
        let mut trace_obj = Map::new();
        trace_obj.insert("end".into(), v["matrix"].clone());
        trace_obj.insert("start".into(), matrix_value(&BottMatrix::hirzebruch(5)));
        trace_obj.insert("steps".into(), Value::Array(vec![v["move"].clone()]));
        let tpath = dir.join("trace.json");
        std::fs::write(&tpath, to_canonical_string(&Value::Object(trace_obj))).unwrap();
        let (code, out, _) = run_vec(&["replay", tpath.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.contains("\"valid\":true"));
    }

    #[test]
    fn inv_prints_fingerprint() {
        let dir = temp_dir("inv");
        let p1 = write_matrix(&dir, "s1.json", &BottMatrix::hirzebruch(1));
        let (code, out, _) = run_vec(&["inv", &p1]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"spanIndex\":2"));
        assert!(out.contains("\"isQTrivial\":true"));
        let (code, out, _) = run_vec(&["inv", "--format", "csv", &p1]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("n,t,"));
    }

    #[test]
    fn usage_errors_exit_64() {
        let (code, _, err) = run_vec(&["frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("Usage"));
        let (code, _, _) = run_vec(&["iso", "only-one.json"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_vec(&[]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_66() {
        let (code, _, err) = run_vec(&["inv", "/nonexistent/nowhere.json"]);
        assert_eq!(code, EXIT_NOINPUT);
        assert!(err.contains("\"error\":\"Io\""));
    }

    #[test]
    fn paper_check_passes() {
        let (code, out, _) = run_vec(&["paper-check"]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 4);
        assert!(!out.contains("FAIL"));
    }

    #[test]
    fn census_verb_writes_verifiable_report() {
        let dir = temp_dir("census");
        let rpath = dir.join("report.jsonl");
        let (code, _, _) = run_vec(&[
            "census",
            "--n",
            "2",
            "--c",
            "3",
            "--out",
            rpath.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let (code, out, _) = run_vec(&["verify", rpath.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"valid\":true"));

        let (code, out, _) = run_vec(&["census", "--n", "2", "--c", "3", "--format", "csv"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("class_id,size,t,fingerprint_hash"));
        assert_eq!(out.lines().count(), 3);
    }
}

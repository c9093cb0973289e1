//! Enumerate all Bott matrices within an entry bound, partition them into
//! classes by moves and isomorphism verdicts, and emit a reproducible,
//! certificate-carrying report.
//!
//! The pipeline: enumerate raw matrices in lexicographic order and
//! well-order each; find connected components under bounded moves (every
//! component member gets a move-trace certificate to its component root);
//! compare components with equal fingerprints through `are_isomorphic`,
//! merging on ISO with the candidate as a bridge certificate; whatever
//! stays split with equal fingerprints is reported as unresolved, never
//! forced. The report is byte-identical across worker counts: all work is
//! evaluated eagerly and applied in a fixed order.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::invariants::fingerprint;
use crate::iso::{are_isomorphic, IsoCandidate, IsoVerdict};
use crate::jsonio::{
    self, candidate_value, fingerprint_value, matrix_value, parse_candidate, parse_matrix,
    parse_trace, to_canonical_string, trace_value,
};
use crate::matrix::BottMatrix;
use crate::moves::{closure_with_paths, well_order, MoveTrace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusConfig {
    pub n: usize,
    /// Enumeration and move-closure entry bound c.
    pub entry_bound: i64,
    /// Coefficient bound for bundle-change classes during closure.
    pub u_bound: i64,
    /// Coefficient bound handed to the isomorphism search.
    pub coeff_bound: i64,
    /// Closure node cap; hitting it sets the saturation flag.
    pub node_cap: usize,
    /// Worker threads for the pairwise isomorphism phase.
    pub workers: usize,
}

impl CensusConfig {
    pub fn new(n: usize, entry_bound: i64) -> Self {
        CensusConfig {
            n,
            entry_bound,
            u_bound: 2,
            coeff_bound: 3,
            node_cap: 100_000,
            workers: 1,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n < 1 || self.n > 64 {
            return Err(Error::BadDimension { n: self.n });
        }
        if self.entry_bound < 1 || self.u_bound < 1 || self.coeff_bound < 1 || self.node_cap < 1 {
            return Err(Error::Parse("census bounds must be positive".into()));
        }
        Ok(())
    }
}

/// All (2c+1)^(n(n-1)/2) matrices in lexicographic entry order, each
/// emitted in its well-ordered form.
pub fn enumerate(cfg: &CensusConfig) -> Result<impl Iterator<Item = BottMatrix>> {
    cfg.check()?;
    Ok(RawEnumeration::new(cfg.n, cfg.entry_bound).map(|raw| {
        well_order(&raw)
            .expect("well-ordering cannot fail on a valid matrix")
            .end()
            .clone()
    }))
}

struct RawEnumeration {
    n: usize,
    bound: i64,
    digits: Option<Vec<i64>>,
}

impl RawEnumeration {
    fn new(n: usize, bound: i64) -> Self {
        let count = n * (n - 1) / 2;
        RawEnumeration {
            n,
            bound,
            digits: Some(vec![-bound; count]),
        }
    }
}

impl Iterator for RawEnumeration {
    type Item = BottMatrix;

    fn next(&mut self) -> Option<BottMatrix> {
        let digits = self.digits.as_mut()?;
        let mut flat = digits.iter();
        let cols: Vec<Vec<BigInt>> = (2..=self.n)
            .map(|j| {
                (1..j)
                    .map(|_| BigInt::from(*flat.next().unwrap()))
                    .collect()
            })
            .collect();
        let out = BottMatrix::from_cols(self.n, cols).expect("enumerated shape is valid");
        // advance the odometer; the last digit moves fastest
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                self.digits = None;
                break;
            }
            pos -= 1;
            if digits[pos] < self.bound {
                digits[pos] += 1;
                for d in digits.iter_mut().skip(pos + 1) {
                    *d = -self.bound;
                }
                break;
            }
        }
        Some(out)
    }
}

/// A certificate attached to a class: either a replayable move trace or a
/// verified isomorphism candidate between two members.
#[derive(Debug, Clone)]
pub enum ClassCert {
    Trace(MoveTrace),
    Iso(IsoCandidate),
}

impl ClassCert {
    /// The two members this certificate connects.
    pub fn endpoints(&self) -> (&BottMatrix, &BottMatrix) {
        match self {
            ClassCert::Trace(t) => (t.start(), t.end()),
            ClassCert::Iso(c) => (c.source(), c.target()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CensusClass {
    /// Lexicographically least well-ordered member.
    pub rep: BottMatrix,
    pub members: Vec<BottMatrix>,
    pub certs: Vec<ClassCert>,
}

#[derive(Debug, Clone)]
pub struct CensusStats {
    pub matrix_count: BigInt,
    pub unique_well_ordered: usize,
    pub class_count: usize,
    pub unresolved_count: usize,
    pub saturated: bool,
    pub config: CensusConfig,
}

#[derive(Debug, Clone)]
pub struct CensusReport {
    pub classes: Vec<CensusClass>,
    /// Pairs of class representatives with equal fingerprints that no
    /// bounded search connected.
    pub unresolved: Vec<(BottMatrix, BottMatrix)>,
    pub stats: CensusStats,
}

struct Component {
    root: BottMatrix,
    members: Vec<BottMatrix>,
    paths: BTreeMap<BottMatrix, Vec<crate::moves::MoveKind>>,
}

/// Run the full classification.
pub fn classify(cfg: &CensusConfig) -> Result<CensusReport> {
    cfg.check()?;
    if cfg.n > 4 {
        return Err(Error::WrongStage { n: cfg.n });
    }

    let mut uniques: BTreeSet<BottMatrix> = BTreeSet::new();
    let mut raw_count = BigInt::one();
    let side = BigInt::from(2 * cfg.entry_bound + 1);
    for _ in 0..cfg.n * (cfg.n - 1) / 2 {
        raw_count *= &side;
    }
    for m in enumerate(cfg)? {
        uniques.insert(m);
    }

    // move-closure components over the well-ordered representatives
    let mut components: Vec<Component> = Vec::new();
    let mut seen: BTreeSet<BottMatrix> = BTreeSet::new();
    let mut saturated = false;
    for u in &uniques {
        if seen.contains(u) {
            continue;
        }
        let (reached, sat) = closure_with_paths(u, cfg.entry_bound, cfg.u_bound, cfg.node_cap);
        saturated |= sat;
        let mut members = Vec::new();
        let mut paths = BTreeMap::new();
        for (mat, path) in &reached {
            seen.insert(mat.clone());
            if uniques.contains(mat) {
                members.push(mat.clone());
                paths.insert(mat.clone(), path.clone());
            }
        }
        members.sort();
        components.push(Component {
            root: u.clone(),
            members,
            paths,
        });
    }

    // group by fingerprint and evaluate candidate pairs
    let fps: Vec<String> = components
        .iter()
        .map(|c| to_canonical_string(&fingerprint_value(&fingerprint(&c.root))))
        .collect();
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, fp) in fps.iter().enumerate() {
        groups.entry(fp).or_default().push(i);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for idxs in groups.values() {
        for a in 0..idxs.len() {
            for b in a + 1..idxs.len() {
                pairs.push((idxs[a], idxs[b]));
            }
        }
    }
    let verdicts = eval_pairs(&pairs, &components, cfg.coeff_bound, cfg.workers)?;

    // union-find over components, applied in fixed pair order
    let mut parent: Vec<usize> = (0..components.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let mut bridges: Vec<(usize, usize, IsoCandidate)> = Vec::new();
    for ((i, j), verdict) in pairs.iter().zip(verdicts) {
        if let IsoVerdict::Iso { candidate, .. } = verdict {
            let (ri, rj) = (find(&mut parent, *i), find(&mut parent, *j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
                bridges.push((*i, *j, candidate));
            }
        }
    }

    // assemble classes
    let mut class_comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..components.len() {
        let r = find(&mut parent, i);
        class_comps.entry(r).or_default().push(i);
    }
    let mut classes: Vec<CensusClass> = Vec::new();
    for comp_ids in class_comps.values() {
        let mut members: Vec<BottMatrix> = Vec::new();
        let mut certs: Vec<ClassCert> = Vec::new();
        for &ci in comp_ids {
            let comp = &components[ci];
            members.extend(comp.members.iter().cloned());
            for m in &comp.members {
                let path = &comp.paths[m];
                if path.is_empty() {
                    continue;
                }
                let trace = MoveTrace::from_specs(comp.root.clone(), path)?;
                certs.push(ClassCert::Trace(trace));
            }
        }
        for (i, j, cand) in &bridges {
            if comp_ids.contains(i) && comp_ids.contains(j) {
                certs.push(ClassCert::Iso(cand.clone()));
            }
        }
        members.sort();
        members.dedup();
        let rep = members.first().expect("component is nonempty").clone();
        classes.push(CensusClass {
            rep,
            members,
            certs,
        });
    }
    classes.sort_by(|a, b| a.rep.cmp(&b.rep));

    // unresolved: final classes sharing a fingerprint
    let class_fp: Vec<String> = classes
        .iter()
        .map(|c| to_canonical_string(&fingerprint_value(&fingerprint(&c.rep))))
        .collect();
    let mut unresolved: Vec<(BottMatrix, BottMatrix)> = Vec::new();
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            if class_fp[a] == class_fp[b] {
                unresolved.push((classes[a].rep.clone(), classes[b].rep.clone()));
            }
        }
    }

    let stats = CensusStats {
        matrix_count: raw_count,
        unique_well_ordered: uniques.len(),
        class_count: classes.len(),
        unresolved_count: unresolved.len(),
        saturated,
        config: cfg.clone(),
    };
    Ok(CensusReport {
        classes,
        unresolved,
        stats,
    })
}

/// Evaluate all pairs, fanning out over `workers` threads; results come
/// back in input order, so downstream state is schedule-independent.
fn eval_pairs(
    pairs: &[(usize, usize)],
    comps: &[Component],
    coeff_bound: i64,
    workers: usize,
) -> Result<Vec<IsoVerdict>> {
    let workers = workers.max(1).min(pairs.len().max(1));
    if workers == 1 || pairs.len() <= 1 {
        return pairs
            .iter()
            .map(|&(i, j)| are_isomorphic(&comps[i].root, &comps[j].root, coeff_bound))
            .collect();
    }
    let mut results: Vec<Option<IsoVerdict>> = vec![None; pairs.len()];
    let chunks: Vec<Vec<usize>> = (0..workers)
        .map(|w| (w..pairs.len()).step_by(workers).collect())
        .collect();
    let outcomes: Vec<Result<Vec<(usize, IsoVerdict)>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|&k| {
                            let (i, j) = pairs[k];
                            are_isomorphic(&comps[i].root, &comps[j].root, coeff_bound)
                                .map(|v| (k, v))
                        })
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("census worker panicked"))
            .collect()
    });
    for outcome in outcomes {
        for (k, v) in outcome? {
            results[k] = Some(v);
        }
    }
    Ok(results
        .into_iter()
        .map(|r| r.expect("every pair evaluated"))
        .collect())
}

fn cert_value(cert: &ClassCert) -> Value {
    let mut obj = Map::new();
    match cert {
        ClassCert::Trace(t) => {
            obj.insert("kind".into(), Value::String("trace".into()));
            obj.insert("trace".into(), trace_value(t));
        }
        ClassCert::Iso(c) => {
            obj.insert("cand".into(), candidate_value(c));
            obj.insert("kind".into(), Value::String("iso".into()));
        }
    }
    Value::Object(obj)
}

fn class_value(class: &CensusClass) -> Value {
    let mut obj = Map::new();
    obj.insert(
        "certs".into(),
        Value::Array(class.certs.iter().map(cert_value).collect()),
    );
    obj.insert(
        "members".into(),
        Value::Array(class.members.iter().map(matrix_value).collect()),
    );
    obj.insert("rep".into(), matrix_value(&class.rep));
    Value::Object(obj)
}

fn stats_value(stats: &CensusStats) -> Value {
    let mut cfg = Map::new();
    cfg.insert(
        "coeffBound".into(),
        Value::Number(Number::from(stats.config.coeff_bound)),
    );
    cfg.insert(
        "entryBound".into(),
        Value::Number(Number::from(stats.config.entry_bound)),
    );
    cfg.insert(
        "n".into(),
        Value::Number(Number::from(stats.config.n as u64)),
    );
    cfg.insert(
        "nodeCap".into(),
        Value::Number(Number::from(stats.config.node_cap as u64)),
    );
    cfg.insert(
        "uBound".into(),
        Value::Number(Number::from(stats.config.u_bound)),
    );
    let mut obj = Map::new();
    obj.insert(
        "classCount".into(),
        Value::Number(Number::from(stats.class_count as u64)),
    );
    obj.insert("config".into(), Value::Object(cfg));
    obj.insert(
        "matrixCount".into(),
        jsonio::bigint_value(&stats.matrix_count),
    );
    obj.insert("saturated".into(), Value::Bool(stats.saturated));
    obj.insert(
        "uniqueWellOrdered".into(),
        Value::Number(Number::from(stats.unique_well_ordered as u64)),
    );
    obj.insert(
        "unresolvedCount".into(),
        Value::Number(Number::from(stats.unresolved_count as u64)),
    );
    Value::Object(obj)
}

/// Render the report as JSONL: one line per class, then a trailer line
/// with unresolved pairs and stats. Worker count is not echoed, so runs
/// with different parallelism are byte-identical.
pub fn render_report(report: &CensusReport) -> String {
    let mut out = String::new();
    for class in &report.classes {
        out.push_str(&to_canonical_string(&class_value(class)));
        out.push('\n');
    }
    let mut trailer = Map::new();
    trailer.insert("stats".into(), stats_value(&report.stats));
    trailer.insert(
        "unresolved".into(),
        Value::Array(
            report
                .unresolved
                .iter()
                .map(|(a, b)| Value::Array(vec![matrix_value(a), matrix_value(b)]))
                .collect(),
        ),
    );
    out.push_str(&to_canonical_string(&Value::Object(trailer)));
    out.push('\n');
    out
}

/// CSV companion: class id, size, t, fingerprint hash.
pub fn csv_summary(report: &CensusReport) -> String {
    let mut out = String::from("class_id,size,t,fingerprint_hash\n");
    for (i, class) in report.classes.iter().enumerate() {
        let f = fingerprint(&class.rep);
        let hash = jsonio::canonical_hash(&fingerprint_value(&f));
        out.push_str(&format!("{i},{},{},{hash}\n", class.members.len(), f.t));
    }
    out
}

/// Re-verify a rendered report end to end. Malformed files raise
/// `CorruptReport`; structurally sound files with any failing certificate,
/// inconsistent fingerprints, or missing separation witnesses yield false.
pub fn verify_report_str(text: &str) -> Result<bool> {
    let corrupt = |msg: &str| Error::CorruptReport(msg.to_string());
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.is_empty() {
        return Err(corrupt("empty report"));
    }
    let (class_lines, trailer_line) = lines.split_at(lines.len() - 1);

    let trailer =
        jsonio::parse_value(trailer_line[0]).map_err(|e| corrupt(&format!("trailer: {e}")))?;
    let trailer_obj = trailer
        .as_object()
        .ok_or_else(|| corrupt("trailer is not an object"))?;
    let stats = trailer_obj
        .get("stats")
        .ok_or_else(|| corrupt("missing stats"))?;
    let unresolved_v = trailer_obj
        .get("unresolved")
        .and_then(Value::as_array)
        .ok_or_else(|| corrupt("missing unresolved list"))?;
    let mut unresolved_pairs: BTreeSet<(BottMatrix, BottMatrix)> = BTreeSet::new();
    for pair in unresolved_v {
        let arr = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| corrupt("bad pair"))?;
        let a = parse_matrix(&arr[0]).map_err(|e| corrupt(&format!("unresolved pair: {e}")))?;
        let b = parse_matrix(&arr[1]).map_err(|e| corrupt(&format!("unresolved pair: {e}")))?;
        unresolved_pairs.insert((a, b));
    }

    let mut reps: Vec<BottMatrix> = Vec::new();
    let mut rep_fps: Vec<String> = Vec::new();
    let mut total_members = 0usize;
    for line in class_lines {
        let v = jsonio::parse_value(line).map_err(|e| corrupt(&format!("class line: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| corrupt("class line is not an object"))?;
        let rep = parse_matrix(obj.get("rep").ok_or_else(|| corrupt("missing rep"))?)
            .map_err(|e| corrupt(&format!("rep: {e}")))?;
        let members_v = obj
            .get("members")
            .and_then(Value::as_array)
            .ok_or_else(|| corrupt("missing members"))?;
        let mut members = Vec::with_capacity(members_v.len());
        for mv in members_v {
            members.push(parse_matrix(mv).map_err(|e| corrupt(&format!("member: {e}")))?);
        }
        if members.is_empty() || !members.contains(&rep) {
            return Ok(false);
        }
        total_members += members.len();

        // fingerprints must agree across the class
        let rep_fp = to_canonical_string(&fingerprint_value(&fingerprint(&rep)));
        for m in &members {
            let fp = to_canonical_string(&fingerprint_value(&fingerprint(m)));
            if fp != rep_fp {
                return Ok(false);
            }
        }

        // verify certificates and collect connectivity edges
        let certs_v = obj
            .get("certs")
            .and_then(Value::as_array)
            .ok_or_else(|| corrupt("missing certs"))?;
        let index_of = |m: &BottMatrix| members.iter().position(|x| x == m);
        let mut uf: Vec<usize> = (0..members.len()).collect();
        fn find(uf: &mut Vec<usize>, x: usize) -> usize {
            if uf[x] != x {
                let r = find(uf, uf[x]);
                uf[x] = r;
            }
            uf[x]
        }
        for cert in certs_v {
            let cobj = cert
                .as_object()
                .ok_or_else(|| corrupt("cert is not an object"))?;
            let kind = cobj
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| corrupt("cert missing kind"))?;
            let (a, b) = match kind {
                "trace" => {
                    let tv = cobj
                        .get("trace")
                        .ok_or_else(|| corrupt("cert missing trace"))?;
                    match parse_trace(tv) {
                        Ok(trace) => (trace.start().clone(), trace.end().clone()),
                        Err(Error::Parse(e)) => return Err(corrupt(&e)),
                        Err(_) => return Ok(false), // replay or precondition failure
                    }
                }
                "iso" => {
                    let cv = cobj
                        .get("cand")
                        .ok_or_else(|| corrupt("cert missing cand"))?;
                    match parse_candidate(cv) {
                        Ok((cand, true)) => (cand.source().clone(), cand.target().clone()),
                        Ok((_, false)) => return Ok(false),
                        Err(Error::Parse(e)) => return Err(corrupt(&e)),
                        Err(_) => return Ok(false),
                    }
                }
                other => return Err(corrupt(&format!("unknown cert kind {other:?}"))),
            };
            let (Some(ia), Some(ib)) = (index_of(&a), index_of(&b)) else {
                return Ok(false); // certificate endpoints must be members
            };
            let (ra, rb) = (find(&mut uf, ia), find(&mut uf, ib));
            if ra != rb {
                uf[ra.max(rb)] = ra.min(rb);
            }
        }
        let root = find(&mut uf, 0);
        for i in 1..members.len() {
            if find(&mut uf, i) != root {
                return Ok(false); // certificates do not connect the class
            }
        }

        reps.push(rep);
        rep_fps.push(rep_fp);
    }

    // separation: distinct classes need a differing fingerprint or an
    // unresolved entry
    for a in 0..reps.len() {
        for b in a + 1..reps.len() {
            if rep_fps[a] == rep_fps[b] {
                let pair = (reps[a].clone(), reps[b].clone());
                let flipped = (reps[b].clone(), reps[a].clone());
                if !unresolved_pairs.contains(&pair) && !unresolved_pairs.contains(&flipped) {
                    return Ok(false);
                }
            }
        }
    }

    // stats consistency
    let stats_obj = stats
        .as_object()
        .ok_or_else(|| corrupt("stats is not an object"))?;
    let class_count = stats_obj
        .get("classCount")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("stats.classCount"))?;
    let unresolved_count = stats_obj
        .get("unresolvedCount")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("stats.unresolvedCount"))?;
    let unique = stats_obj
        .get("uniqueWellOrdered")
        .and_then(Value::as_u64)
        .ok_or_else(|| corrupt("stats.uniqueWellOrdered"))?;
    if class_count as usize != reps.len()
        || unresolved_count as usize != unresolved_pairs.len()
        || unique as usize != total_members
    {
        return Ok(false);
    }
    Ok(true)
}

/// Read and verify a report file.
pub fn verify_report(path: &std::path::Path) -> Result<bool> {
    let text = std::fs::read_to_string(path)?;
    verify_report_str(&text)
}

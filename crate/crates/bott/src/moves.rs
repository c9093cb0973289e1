//! Diffeomorphism-producing rewrites on Bott tower presentations.
//!
//! Two rewrite families are available: interchanging adjacent stages when
//! the connecting twist entry vanishes, and the bundle change
//! alpha -> alpha - 2u, legal when u(u - alpha) = 0. Each application
//! returns the rewritten matrix together with a [`Move`] carrying the
//! induced cohomology isomorphism, which is verified by `iso_check` before
//! the move is handed out; a failed verification is a bug in this module,
//! not in the caller's data.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::invariants::square_zero_stages;
use crate::iso::IsoCandidate;
use crate::matrix::BottMatrix;
use crate::ring::{mul_degree_two, DegreeTwoClass};

/// The data of a single rewrite, sufficient to replay it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveKind {
    StageSwap { j: usize },
    BundleChange { j: usize, u: DegreeTwoClass },
}

impl MoveKind {
    /// The inverse rewrite: swaps are involutions and a bundle change by u
    /// is undone by a bundle change by -u.
    pub fn inverse(&self) -> MoveKind {
        match self {
            MoveKind::StageSwap { j } => MoveKind::StageSwap { j: *j },
            MoveKind::BundleChange { j, u } => MoveKind::BundleChange { j: *j, u: -u },
        }
    }
}

/// A certified rewrite: the kind plus the induced ring isomorphism
/// H*(result) -> H*(source), verified at construction.
#[derive(Debug, Clone)]
pub struct Move {
    kind: MoveKind,
    induced: IsoCandidate,
}

impl Move {
    pub fn kind(&self) -> &MoveKind {
        &self.kind
    }

    /// The verified pullback isomorphism H*(result) -> H*(source).
    pub fn induced(&self) -> &IsoCandidate {
        &self.induced
    }

    pub fn source_matrix(&self) -> &BottMatrix {
        self.induced.target()
    }

    pub fn result_matrix(&self) -> &BottMatrix {
        self.induced.source()
    }
}

/// Interchange stages j and j+1; requires A^j_{j+1} = 0.
pub fn stage_swap(m: &BottMatrix, j: usize) -> Result<(BottMatrix, Move)> {
    let n = m.n();
    if j < 1 || j + 1 > n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    if !m.entry(j, j + 1).is_zero() {
        return Err(Error::SwapObstructed { j });
    }
    let mut out = m.clone();
    // twist coefficients over the earlier stages travel with their stage
    for i in 1..j {
        let a = m.entry(i, j).clone();
        let b = m.entry(i, j + 1).clone();
        out.col_mut(j)[i - 1] = b;
        out.col_mut(j + 1)[i - 1] = a;
    }
    // later stages see the two generators exchanged
    for k in j + 2..=n {
        let a = m.entry(j, k).clone();
        let b = m.entry(j + 1, k).clone();
        out.col_mut(k)[j - 1] = b;
        out.col_mut(k)[j] = a;
    }
    out.col_mut(j + 1)[j - 1] = BigInt::zero();

    let mut p = identity_matrix(n);
    p[j - 1][j - 1] = BigInt::zero();
    p[j][j] = BigInt::zero();
    p[j - 1][j] = BigInt::from(1);
    p[j][j - 1] = BigInt::from(1);
    let induced = IsoCandidate::verified_new(out.clone(), m.clone(), p).map_err(|e| {
        Error::InternalInvariantViolation(format!("stage swap induced map failed: {e}"))
    })?;
    Ok((
        out,
        Move {
            kind: MoveKind::StageSwap { j },
            induced,
        },
    ))
}

/// Replace alpha_j by alpha_j - 2u; requires u supported below j and
/// u(u - alpha_j) = 0. Later twists absorb the generator shift:
/// A^i_k += A^j_k u_i for k > j, i < j.
pub fn bundle_change(m: &BottMatrix, j: usize, u: &DegreeTwoClass) -> Result<(BottMatrix, Move)> {
    let n = m.n();
    if j < 1 || j > n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    if u.dim() != n {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: n,
        });
    }
    if !u.supported_below(j) {
        return Err(Error::BadSupport { j });
    }
    let beta = m.alpha(j)?;
    let diff = u - &beta;
    if !mul_degree_two(m, u, &diff).iter().all(Zero::is_zero) {
        return Err(Error::ObstructionNonzero);
    }

    let mut out = m.clone();
    let two = BigInt::from(2);
    for i in 1..j {
        let shift = &two * u.coeff(i);
        out.col_mut(j)[i - 1] = m.entry(i, j) - shift;
    }
    for k in j + 1..=n {
        let a_jk = m.entry(j, k).clone();
        if a_jk.is_zero() {
            continue;
        }
        for i in 1..j {
            let add = &a_jk * u.coeff(i);
            out.col_mut(k)[i - 1] = m.entry(i, k) + add;
        }
    }

    // y_j |-> x_j - u, identity on the other generators.
    let mut p = identity_matrix(n);
    for i in 1..j {
        p[i - 1][j - 1] = -u.coeff(i);
    }
    let induced = IsoCandidate::verified_new(out.clone(), m.clone(), p).map_err(|e| {
        Error::InternalInvariantViolation(format!("bundle change induced map failed: {e}"))
    })?;
    Ok((
        out,
        Move {
            kind: MoveKind::BundleChange { j, u: u.clone() },
            induced,
        },
    ))
}

fn identity_matrix(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|r| (0..n).map(|c| BigInt::from(u8::from(r == c))).collect())
        .collect()
}

/// An ordered chain of certified rewrites from `start` to `end`.
#[derive(Debug, Clone)]
pub struct MoveTrace {
    start: BottMatrix,
    steps: Vec<Move>,
    end: BottMatrix,
}

impl MoveTrace {
    pub fn identity(m: BottMatrix) -> MoveTrace {
        MoveTrace {
            start: m.clone(),
            steps: Vec::new(),
            end: m,
        }
    }

    pub fn start(&self) -> &BottMatrix {
        &self.start
    }

    pub fn end(&self) -> &BottMatrix {
        &self.end
    }

    pub fn steps(&self) -> &[Move] {
        &self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Append a move whose source is the current end.
    pub fn push(&mut self, mv: Move) -> Result<()> {
        if mv.source_matrix() != &self.end {
            return Err(Error::EndpointMismatch);
        }
        self.end = mv.result_matrix().clone();
        self.steps.push(mv);
        Ok(())
    }

    /// Rebuild a trace by applying the given rewrites in order,
    /// re-validating every precondition and re-verifying every induced
    /// isomorphism.
    pub fn from_specs(start: BottMatrix, specs: &[MoveKind]) -> Result<MoveTrace> {
        let mut trace = MoveTrace::identity(start);
        for spec in specs {
            let (_, mv) = match spec {
                MoveKind::StageSwap { j } => stage_swap(&trace.end, *j)?,
                MoveKind::BundleChange { j, u } => bundle_change(&trace.end, *j, u)?,
            };
            trace.push(mv)?;
        }
        Ok(trace)
    }

    pub fn specs(&self) -> Vec<MoveKind> {
        self.steps.iter().map(|m| m.kind().clone()).collect()
    }

    /// Re-run the trace from its recorded start and confirm it lands on
    /// the recorded end.
    pub fn replay(&self) -> Result<()> {
        let rebuilt = MoveTrace::from_specs(self.start.clone(), &self.specs())?;
        if rebuilt.end != self.end {
            return Err(Error::EndpointMismatch);
        }
        Ok(())
    }

    /// The same chain run backwards, end to start.
    pub fn reversed(&self) -> Result<MoveTrace> {
        let specs: Vec<MoveKind> = self
            .steps
            .iter()
            .rev()
            .map(|m| m.kind().inverse())
            .collect();
        let rebuilt = MoveTrace::from_specs(self.end.clone(), &specs)?;
        if rebuilt.end != self.start {
            return Err(Error::InternalInvariantViolation(
                "reversed trace does not return to start".into(),
            ));
        }
        Ok(rebuilt)
    }

    /// Concatenate with a trace starting at this trace's end.
    pub fn concat(&self, other: &MoveTrace) -> Result<MoveTrace> {
        if self.end != other.start {
            return Err(Error::EndpointMismatch);
        }
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        Ok(MoveTrace {
            start: self.start.clone(),
            steps,
            end: other.end.clone(),
        })
    }

    /// The composed pullback H*(end) -> H*(start), a verified candidate.
    pub fn composed_pullback(&self) -> Result<IsoCandidate> {
        let mut acc = IsoCandidate::verified_new(
            self.start.clone(),
            self.start.clone(),
            identity_matrix(self.start.n()),
        )?;
        for step in &self.steps {
            acc = step.induced().compose(&acc)?;
        }
        Ok(acc)
    }

    /// The composed ring isomorphism H*(start) -> H*(end).
    pub fn composed_iso(&self) -> Result<IsoCandidate> {
        self.composed_pullback()?.inverse()
    }
}

/// Sort the stages so every square-vanishing twist precedes every
/// non-vanishing one. The connecting entry at each transposition is forced
/// to be zero by the square-vanishing analysis; hitting a nonzero one
/// would falsify this implementation.
pub fn well_order(m: &BottMatrix) -> Result<MoveTrace> {
    let mut trace = MoveTrace::identity(m.clone());
    loop {
        let flags = square_zero_stages(trace.end());
        let n = flags.len();
        let Some(j) = (1..n).find(|&j| !flags[j - 1] && flags[j]) else {
            return Ok(trace);
        };
        if !trace.end().entry(j, j + 1).is_zero() {
            return Err(Error::InternalInvariantViolation(format!(
                "square-vanishing stage {} sits over a nonzero twist entry at ({}, {})",
                j + 1,
                j,
                j + 1
            )));
        }
        let (_, mv) = stage_swap(trace.end(), j)?;
        trace.push(mv)?;
    }
}

/// Result of a bounded breadth-first closure.
#[derive(Debug, Clone)]
pub struct MoveClosure {
    pub matrices: BTreeSet<BottMatrix>,
    pub saturated: bool,
}

/// All matrices reachable from `m` by stage swaps and bundle changes with
/// |u coefficients| <= u_bound, discarding any matrix with an entry
/// exceeding entry_bound in absolute value. Exploration is breadth-first
/// with a lexicographically sorted frontier, so the outcome is a pure
/// function of the inputs. Hitting node_cap sets the saturation flag.
pub fn move_closure(
    m: &BottMatrix,
    entry_bound: i64,
    u_bound: i64,
    node_cap: usize,
) -> MoveClosure {
    assert!(
        entry_bound > 0 && u_bound > 0 && node_cap > 0,
        "bounds must be positive"
    );
    let (visited, saturated) = closure_with_paths(m, entry_bound, u_bound, node_cap);
    MoveClosure {
        matrices: visited.into_keys().collect(),
        saturated,
    }
}

/// Closure that also records, per reached matrix, the rewrite word from
/// the start. Used by the census to mint trace certificates.
pub(crate) fn closure_with_paths(
    m: &BottMatrix,
    entry_bound: i64,
    u_bound: i64,
    node_cap: usize,
) -> (BTreeMap<BottMatrix, Vec<MoveKind>>, bool) {
    let bound = BigInt::from(entry_bound);
    let mut visited: BTreeMap<BottMatrix, Vec<MoveKind>> = BTreeMap::new();
    let mut saturated = false;
    if m.max_abs_entry() > bound {
        return (visited, saturated);
    }
    visited.insert(m.clone(), Vec::new());
    let mut frontier: BTreeSet<BottMatrix> = BTreeSet::from([m.clone()]);
    'bfs: while !frontier.is_empty() {
        let mut next: BTreeSet<BottMatrix> = BTreeSet::new();
        for node in &frontier {
            let path = visited.get(node).expect("frontier is visited").clone();
            for (result, kind) in neighbors(node, &bound, u_bound) {
                if visited.contains_key(&result) {
                    continue;
                }
                if visited.len() >= node_cap {
                    saturated = true;
                    break 'bfs;
                }
                let mut word = path.clone();
                word.push(kind);
                visited.insert(result.clone(), word);
                next.insert(result);
            }
        }
        frontier = next;
    }
    (visited, saturated)
}

/// Legal one-step rewrites within the entry bound, in a fixed order:
/// stage swaps by ascending j, then bundle changes by ascending j and
/// lexicographic u.
fn neighbors(m: &BottMatrix, entry_bound: &BigInt, u_bound: i64) -> Vec<(BottMatrix, MoveKind)> {
    let n = m.n();
    let mut out = Vec::new();
    for j in 1..n {
        if let Ok((res, mv)) = stage_swap(m, j) {
            if res.max_abs_entry() <= *entry_bound {
                out.push((res, mv.kind().clone()));
            }
        }
    }
    for j in 2..=n {
        let width = (2 * u_bound + 1) as u64;
        let total = width.pow((j - 1) as u32);
        for code in 0..total {
            let mut c = code;
            let mut coeffs = vec![BigInt::zero(); n];
            for item in coeffs.iter_mut().take(j - 1) {
                *item = BigInt::from((c % width) as i64 - u_bound);
                c /= width;
            }
            let u = DegreeTwoClass::new(coeffs);
            if u.is_zero() {
                continue;
            }
            if let Ok((res, mv)) = bundle_change(m, j, &u) {
                if res.max_abs_entry() <= *entry_bound {
                    out.push((res, mv.kind().clone()));
                }
            }
        }
    }
    out
}

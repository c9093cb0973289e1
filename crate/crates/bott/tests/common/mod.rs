#![allow(dead_code)] // each test binary uses its own slice of this module

//! Shared oracle machinery for the integration suites.
//!
//! Everything here is deliberately independent of the library's arithmetic
//! paths: a separate i64 normal-form rewriter that resolves the *smallest*
//! repeated index first (the engine goes largest-first), and a plain
//! column-backtracking unimodular search that knows nothing about
//! square-vanishing sets or stability. Overflow panics rather than wraps,
//! so a passing oracle run is exact.

use std::collections::BTreeMap;

/// SplitMix64: tiny deterministic PRNG for reproducible sampling.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi].
    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn usize_below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// A tower presentation for the oracle: cols[j-2][i-1] = A^i_j as i64.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTower {
    pub n: usize,
    pub cols: Vec<Vec<i64>>,
}

impl OracleTower {
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.cols[j - 2][i - 1]
    }
}

pub type OracleElement = BTreeMap<u32, i64>;

fn checked_add_term(acc: &mut OracleElement, mask: u32, coeff: i64) {
    let slot = acc.entry(mask).or_insert(0);
    *slot = slot.checked_add(coeff).expect("oracle overflow");
    if *slot == 0 {
        acc.remove(&mask);
    }
}

/// Multiply two square-free monomials, reducing the smallest repeated
/// index first: x_j^2 -> sum_i A^i_j x_i x_j.
fn oracle_mul_monomials(t: &OracleTower, a: u32, b: u32, coeff: i64, acc: &mut OracleElement) {
    let mut exps = vec![0u8; t.n];
    for (i, e) in exps.iter_mut().enumerate() {
        *e = ((a >> i) & 1) as u8 + ((b >> i) & 1) as u8;
    }
    let mut work = vec![(exps, coeff)];
    while let Some((e, c)) = work.pop() {
        match (1..=t.n).find(|&i| e[i - 1] >= 2) {
            None => {
                let mask = (1..=t.n)
                    .filter(|&i| e[i - 1] == 1)
                    .fold(0u32, |m, i| m | (1 << (i - 1)));
                checked_add_term(acc, mask, c);
            }
            Some(1) => {}
            Some(j) => {
                for i in 1..j {
                    let v = t.entry(i, j);
                    if v == 0 {
                        continue;
                    }
                    let mut e2 = e.clone();
                    e2[j - 1] -= 1;
                    e2[i - 1] += 1;
                    work.push((e2, c.checked_mul(v).expect("oracle overflow")));
                }
            }
        }
    }
}

pub fn oracle_mul(t: &OracleTower, a: &OracleElement, b: &OracleElement) -> OracleElement {
    let mut acc = OracleElement::new();
    for (&ma, &ca) in a {
        for (&mb, &cb) in b {
            oracle_mul_monomials(
                t,
                ma,
                mb,
                ca.checked_mul(cb).expect("oracle overflow"),
                &mut acc,
            );
        }
    }
    acc
}

/// Embed an integer vector as a degree-two element.
pub fn oracle_embed(coeffs: &[i64]) -> OracleElement {
    let mut e = OracleElement::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            e.insert(1 << i, c);
        }
    }
    e
}

pub fn oracle_square_is_zero(t: &OracleTower, coeffs: &[i64]) -> bool {
    let e = oracle_embed(coeffs);
    oracle_mul(t, &e, &e).is_empty()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Quadratic-relation checker over a fixed target tower. The structure
/// constants (all products x_i x_j in the degree-4 basis) are computed
/// once by the oracle rewriter; per-candidate checks then reduce to i64
/// linear algebra by bilinearity.
pub struct OracleQuadratic {
    n: usize,
    dim4: usize,
    index: BTreeMap<u32, usize>,
    table: Vec<Vec<i64>>,
}

impl OracleQuadratic {
    pub fn new(t: &OracleTower) -> Self {
        let n = t.n;
        let mut masks: Vec<u32> = (0u32..1 << n).filter(|m| m.count_ones() == 2).collect();
        masks.sort_unstable();
        let index: BTreeMap<u32, usize> = masks.iter().enumerate().map(|(k, &m)| (m, k)).collect();
        let dim4 = masks.len();
        let mut table = vec![vec![0i64; dim4]; n * n];
        for i in 1..=n {
            for j in i..=n {
                let xi = oracle_embed(&unit_vec(n, i));
                let xj = oracle_embed(&unit_vec(n, j));
                let prod = oracle_mul(t, &xi, &xj);
                let row = &mut table[(i - 1) * n + (j - 1)];
                for (mask, coeff) in prod {
                    row[index[&mask]] = coeff;
                }
            }
        }
        OracleQuadratic {
            n,
            dim4,
            index,
            table,
        }
    }

    /// Does z^2 = w z hold in the tower's cohomology?
    pub fn relation_holds(&self, w: &[i64], z: &[i64]) -> bool {
        let n = self.n;
        let mut acc = vec![0i64; self.dim4];
        for i in 0..n {
            for j in i..n {
                let zz = if i == j { z[i] * z[i] } else { 2 * z[i] * z[j] };
                let wz = if i == j {
                    w[i] * z[i]
                } else {
                    w[i] * z[j] + w[j] * z[i]
                };
                let c = zz - wz;
                if c == 0 {
                    continue;
                }
                for (k, v) in self.table[i * n + j].iter().enumerate() {
                    if *v != 0 {
                        acc[k] += c * v;
                    }
                }
            }
        }
        acc.iter().all(|&v| v == 0)
    }

    pub fn square_is_zero(&self, z: &[i64]) -> bool {
        let w = vec![0i64; self.n];
        self.relation_holds(&w, z)
    }

    pub fn degree4_coord_count(&self) -> usize {
        self.index.len()
    }
}

fn unit_vec(n: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0i64; n];
    v[i - 1] = 1;
    v
}

/// All primitive vectors with coefficients in [-bound, bound] whose square
/// vanishes, sign-normalized so the highest-index nonzero entry is
/// positive, sorted. The squares come from the oracle's structure
/// constants.
pub fn oracle_square_vanishing(t: &OracleTower, bound: i64) -> Vec<Vec<i64>> {
    let n = t.n;
    let quad = OracleQuadratic::new(t);
    let width = (2 * bound + 1) as u64;
    let total = width.pow(n as u32);
    let mut out: Vec<Vec<i64>> = Vec::new();
    for code in 0..total {
        let mut c = code;
        let coeffs: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % width) as i64 - bound;
                c /= width;
                v
            })
            .collect();
        if coeffs.iter().all(|&v| v == 0) {
            continue;
        }
        let g = coeffs.iter().fold(0i64, |g, &v| gcd(g, v));
        if g != 1 {
            continue;
        }
        if !quad.square_is_zero(&coeffs) {
            continue;
        }
        let lead = coeffs.iter().rposition(|&v| v != 0).expect("nonzero");
        let canon: Vec<i64> = if coeffs[lead] < 0 {
            coeffs.iter().map(|&v| -v).collect()
        } else {
            coeffs
        };
        if !out.contains(&canon) {
            out.push(canon);
        }
    }
    out.sort();
    out
}

fn det_i64(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0].checked_mul(m[1][1]).unwrap() - m[0][1].checked_mul(m[1][0]).unwrap(),
        _ => {
            let mut acc: i64 = 0;
            for c in 0..n {
                if m[0][c] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = (1..n)
                    .map(|r| (0..n).filter(|&cc| cc != c).map(|cc| m[r][cc]).collect())
                    .collect();
                let term = m[0][c]
                    .checked_mul(det_i64(&minor))
                    .expect("oracle overflow");
                acc = if c % 2 == 0 {
                    acc.checked_add(term).expect("oracle overflow")
                } else {
                    acc.checked_sub(term).expect("oracle overflow")
                };
            }
            acc
        }
    }
}

/// gcd of all k x k minors of an n x k column prefix; a prefix of a
/// unimodular matrix always has gcd 1, so anything else cannot extend.
fn prefix_minor_gcd(cols: &[Vec<i64>], n: usize) -> i64 {
    let k = cols.len();
    let mut g = 0i64;
    let mut rows = vec![0usize; k];
    fn rec(
        cols: &[Vec<i64>],
        n: usize,
        k: usize,
        start: usize,
        depth: usize,
        rows: &mut Vec<usize>,
        g: &mut i64,
    ) {
        if depth == k {
            let sub: Vec<Vec<i64>> = rows
                .iter()
                .map(|&r| (0..k).map(|c| cols[c][r]).collect())
                .collect();
            *g = gcd(*g, det_i64(&sub));
            return;
        }
        for r in start..n {
            rows[depth] = r;
            rec(cols, n, k, r + 1, depth + 1, rows, g);
            if *g == 1 {
                return;
            }
        }
    }
    rec(cols, n, k, 0, 0, &mut rows, &mut g);
    g
}

/// Plain brute-force search for graded ring isomorphisms with all P
/// entries in [-bound, bound]: column backtracking with per-column
/// relation checks over the oracle ring, a prefix primitivity cut (gcd of
/// maximal minors must be 1, a necessary condition for any unimodular
/// extension), and |det P| = 1 at the leaves. Returns all hits when
/// `find_all`, else stops at the first.
pub fn oracle_unimodular_search(
    a: &OracleTower,
    b: &OracleTower,
    bound: i64,
    find_all: bool,
) -> Vec<Vec<Vec<i64>>> {
    let n = a.n;
    let quad = OracleQuadratic::new(b);
    let mut cols: Vec<Vec<i64>> = Vec::new();
    let mut found: Vec<Vec<Vec<i64>>> = Vec::new();
    search_column(a, &quad, bound, n, &mut cols, &mut found, find_all);
    found
}

fn search_column(
    a: &OracleTower,
    quad: &OracleQuadratic,
    bound: i64,
    n: usize,
    cols: &mut Vec<Vec<i64>>,
    found: &mut Vec<Vec<Vec<i64>>>,
    find_all: bool,
) {
    let j = cols.len() + 1;
    if j > n {
        let p: Vec<Vec<i64>> = (0..n)
            .map(|r| (0..n).map(|c| cols[c][r]).collect())
            .collect();
        if det_i64(&p).abs() == 1 {
            found.push(p);
        }
        return;
    }
    // phi(alpha_j) from the chosen columns
    let mut mapped = vec![0i64; n];
    if j >= 2 {
        for i in 1..j {
            let aij = a.entry(i, j);
            if aij != 0 {
                for r in 0..n {
                    mapped[r] += aij * cols[i - 1][r];
                }
            }
        }
    }
    let width = (2 * bound + 1) as u64;
    let total = width.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let col: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % width) as i64 - bound;
                c /= width;
                v
            })
            .collect();
        // relation: phi(x_j)^2 = phi(alpha_j) phi(x_j)
        if !quad.relation_holds(&mapped, &col) {
            continue;
        }
        cols.push(col);
        if prefix_minor_gcd(cols, n) == 1 {
            search_column(a, quad, bound, n, cols, found, find_all);
        }
        cols.pop();
        if !find_all && !found.is_empty() {
            return;
        }
    }
}

/// Random strictly upper-triangular tower with entries in [-bound, bound].
pub fn random_tower(rng: &mut SplitMix64, n: usize, bound: i64) -> OracleTower {
    let cols: Vec<Vec<i64>> = (2..=n)
        .map(|j| (1..j).map(|_| rng.range(-bound, bound)).collect())
        .collect();
    OracleTower { n, cols }
}

//! Binary LDPC codes: quasi-cyclic prototypes and alist files, systematic
//! encoding, and belief-propagation decoding.
//!
//! Bits are `u8` values in `{0, 1}`. LLRs follow `L = ln P(0) / P(1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quasi-cyclic prototype: block `(r, c)` of `H` is the `z × z` identity
/// cyclically shifted by `base[r][c]`, or zero when the entry is negative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcPrototype {
    pub z: usize,
    pub base: Vec<Vec<i32>>,
}

/// Code rates of the shipped `n_c = 648` prototypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    #[serde(rename = "1/2")]
    R1_2,
    #[serde(rename = "2/3")]
    R2_3,
    #[serde(rename = "3/4")]
    R3_4,
    #[serde(rename = "5/6")]
    R5_6,
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1/2" => Ok(Self::R1_2),
            "2/3" => Ok(Self::R2_3),
            "3/4" => Ok(Self::R3_4),
            "5/6" => Ok(Self::R5_6),
            _ => Err(Error::Parse(format!("no built-in code of rate `{s}`"))),
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::R1_2 => "1/2",
            Self::R2_3 => "2/3",
            Self::R3_4 => "3/4",
            Self::R5_6 => "5/6",
        })
    }
}

impl QcPrototype {
    /// 802.11 prototype with `z = 27`, `n_c = 648`.
    pub fn ieee80211_648(rate: Builtin) -> Self {
        let json = match rate {
            Builtin::R1_2 => include_str!("../../data/ldpc/ieee80211_n648_r1_2.json"),
            Builtin::R2_3 => include_str!("../../data/ldpc/ieee80211_n648_r2_3.json"),
            Builtin::R3_4 => include_str!("../../data/ldpc/ieee80211_n648_r3_4.json"),
            Builtin::R5_6 => include_str!("../../data/ldpc/ieee80211_n648_r5_6.json"),
        };
        serde_json::from_str(json).expect("shipped prototype is valid")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let cols = self.base.first().map_or(0, Vec::len);
        if self.z == 0 || cols == 0 || self.base.iter().any(|r| r.len() != cols) {
            return Err(Error::Parse("prototype must be a non-empty rectangle".into()));
        }
        if self.base.iter().flatten().any(|&s| s >= self.z as i32) {
            return Err(Error::Parse("shift exceeds the lifting size".into()));
        }
        Ok(())
    }

    fn rows(&self) -> usize {
        self.base.len()
    }

    fn cols(&self) -> usize {
        self.base[0].len()
    }

    /// Check-node neighborhoods of the lifted matrix.
    fn expand(&self) -> Vec<Vec<usize>> {
        let z = self.z;
        let mut checks = vec![Vec::new(); self.rows() * z];
        for (r, row) in self.base.iter().enumerate() {
            for (c, &s) in row.iter().enumerate() {
                if s < 0 {
                    continue;
                }
                for i in 0..z {
                    checks[r * z + i].push(c * z + (i + s as usize) % z);
                }
            }
        }
        checks
    }

    /// Whether the parity part has the 802.11 dual-diagonal form: a first
    /// column with shifts `(x, 0, x)` followed by a staircase of identities.
    fn is_dual_diagonal(&self) -> bool {
        let (mb, nb) = (self.rows(), self.cols());
        if mb < 2 || nb <= mb {
            return false;
        }
        let kb = nb - mb;
        let first: Vec<(usize, i32)> = (0..mb)
            .filter(|&r| self.base[r][kb] >= 0)
            .map(|r| (r, self.base[r][kb]))
            .collect();
        if first.len() != 3 || first[0].0 != 0 || first[2].0 != mb - 1 {
            return false;
        }
        if first[0].1 != first[2].1 || first[1].1 != 0 {
            return false;
        }
        (1..mb).all(|j| {
            (0..mb).all(|r| {
                let want = r + 1 == j || r == j;
                (self.base[r][kb + j] == 0) == want && (want || self.base[r][kb + j] < 0)
            })
        })
    }
}

#[derive(Debug, Clone)]
enum Encoder {
    /// Back-substitution through the dual-diagonal parity part.
    DualDiagonal(QcPrototype),
    /// Reduced row echelon form: parity bit `pivots[r]` is the inner product
    /// of `rows[r]` (a bitset over the information positions) with the input.
    Dense { pivots: Vec<usize>, rows: Vec<Vec<u64>> },
}

/// A binary LDPC code with a systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    n: usize,
    checks: Vec<Vec<usize>>,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    encoder: Encoder,
    graph: Graph,
}

/// Edge-indexed Tanner graph. Edges are grouped by check node.
#[derive(Debug, Clone)]
struct Graph {
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl Graph {
    fn new(n: usize, checks: &[Vec<usize>]) -> Self {
        let mut check_start = vec![0];
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); n];
        for check in checks {
            for &v in check {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        Self {
            check_start,
            edge_var,
            var_edges,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    #[default]
    SumProduct,
    /// Min-sum with check messages scaled by [`MIN_SUM_SCALE`].
    MinSum,
}

pub const MIN_SUM_SCALE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

impl LdpcCode {
    pub fn from_prototype(proto: &QcPrototype) -> Result<Self> {
        proto.validate()?;
        let n = proto.cols() * proto.z;
        let checks = proto.expand();
        if proto.is_dual_diagonal() {
            let k = n - proto.rows() * proto.z;
            Ok(Self {
                n,
                graph: Graph::new(n, &checks),
                checks,
                info_positions: (0..k).collect(),
                parity_positions: (k..n).collect(),
                encoder: Encoder::DualDiagonal(proto.clone()),
            })
        } else {
            Self::from_checks(n, checks)
        }
    }

    pub fn ieee80211_648(rate: Builtin) -> Self {
        Self::from_prototype(&QcPrototype::ieee80211_648(rate)).expect("shipped prototype is valid")
    }

    /// Code from check-node neighborhoods, encoded by Gaussian elimination.
    /// Pivots are taken from the rightmost columns, so the information
    /// positions are the leading ones whenever the parity part is invertible.
    pub fn from_checks(n: usize, mut checks: Vec<Vec<usize>>) -> Result<Self> {
        for c in &mut checks {
            c.sort_unstable();
            c.dedup();
            if c.iter().any(|&v| v >= n) {
                return Err(Error::Parse("check references a missing variable".into()));
            }
        }
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = checks
            .iter()
            .map(|c| {
                let mut w = vec![0u64; words];
                for &v in c {
                    w[v / 64] |= 1 << (v % 64);
                }
                w
            })
            .collect();
        let get = |w: &[u64], v: usize| (w[v / 64] >> (v % 64)) & 1 == 1;
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in (0..n).rev() {
            let Some(p) = (rank..rows.len()).find(|&r| get(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && get(row, col) {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&p| is_pivot[p] = true);
        let info_positions: Vec<usize> = (0..n).filter(|&v| !is_pivot[v]).collect();
        let info_words = info_positions.len().div_ceil(64);
        let packed = rows
            .iter()
            .map(|row| {
                let mut w = vec![0u64; info_words];
                for (i, &v) in info_positions.iter().enumerate() {
                    if get(row, v) {
                        w[i / 64] |= 1 << (i % 64);
                    }
                }
                w
            })
            .collect();
        let mut parity_positions = pivots.clone();
        parity_positions.sort_unstable();
        Ok(Self {
            n,
            graph: Graph::new(n, &checks),
            checks,
            info_positions,
            parity_positions,
            encoder: Encoder::Dense { pivots, rows: packed },
        })
    }

    /// Codeword length `n_c`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Information length `k_c`.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn checks(&self) -> &[Vec<usize>] {
        &self.checks
    }

    /// Codeword positions carrying the encoder input, in input order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn parity_positions(&self) -> &[usize] {
        &self.parity_positions
    }

    pub fn syndrome_ok(&self, c: &[u8]) -> bool {
        self.checks
            .iter()
            .all(|check| check.iter().fold(0u8, |acc, &v| acc ^ c[v]) == 0)
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::WordLength {
                got: info.len(),
                expected: self.k(),
            });
        }
        let mut c = vec![0u8; self.n];
        for (&p, &b) in self.info_positions.iter().zip(info) {
            c[p] = b;
        }
        match &self.encoder {
            Encoder::DualDiagonal(proto) => encode_dual_diagonal(proto, &mut c),
            Encoder::Dense { pivots, rows } => {
                let words = info.len().div_ceil(64);
                let mut packed = vec![0u64; words];
                for (i, &b) in info.iter().enumerate() {
                    packed[i / 64] |= (b as u64) << (i % 64);
                }
                for (&p, row) in pivots.iter().zip(rows) {
                    let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
                    c[p] = (ones & 1) as u8;
                }
            }
        }
        Ok(c)
    }

    /// Flooding belief propagation with early stop on a zero syndrome.
    pub fn decode(&self, llr: &[f64], max_iter: usize, kind: DecoderKind) -> Result<DecodeOutput> {
        if llr.len() != self.n {
            return Err(Error::SequenceLength {
                got: llr.len(),
                expected: self.n,
            });
        }
        let g = &self.graph;
        let hard = |t: &[f64]| t.iter().map(|&l| (l < 0.0) as u8).collect::<Vec<u8>>();
        let mut bits = hard(llr);
        if self.syndrome_ok(&bits) {
            return Ok(DecodeOutput {
                bits,
                converged: true,
                iterations: 0,
            });
        }
        let mut v2c: Vec<f64> = g.edge_var.iter().map(|&v| llr[v]).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut total = llr.to_vec();
        for it in 1..=max_iter {
            for c in 0..g.check_start.len() - 1 {
                let range = g.check_start[c]..g.check_start[c + 1];
                match kind {
                    DecoderKind::SumProduct => check_update_spa(&v2c[range.clone()], &mut c2v[range]),
                    DecoderKind::MinSum => check_update_min_sum(&v2c[range.clone()], &mut c2v[range]),
                }
            }
            for (v, edges) in g.var_edges.iter().enumerate() {
                let t = llr[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                total[v] = t;
                for &e in edges {
                    v2c[e] = t - c2v[e];
                }
            }
            bits = hard(&total);
            if self.syndrome_ok(&bits) {
                return Ok(DecodeOutput {
                    bits,
                    converged: true,
                    iterations: it,
                });
            }
        }
        Ok(DecodeOutput {
            bits,
            converged: false,
            iterations: max_iter,
        })
    }

    /// Parses the alist format: dimensions, maximum degrees, degree lists,
    /// then one line of 1-based row indices per column and one line of
    /// column indices per row (zero padding allowed).
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut tokens = text.split_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad alist token `{t}`")))
        });
        let mut next = || tokens.next().unwrap_or_else(|| Err(Error::Parse("truncated alist".into())));
        let (n, m) = (next()?, next()?);
        let (max_col, max_row) = (next()?, next()?);
        let col_deg: Vec<usize> = (0..n).map(|_| next()).collect::<Result<_>>()?;
        let row_deg: Vec<usize> = (0..m).map(|_| next()).collect::<Result<_>>()?;
        let mut col_lists = Vec::with_capacity(n);
        for &d in &col_deg {
            let raw: Vec<usize> = (0..max_col).map(|_| next()).collect::<Result<_>>()?;
            let list: Vec<usize> = raw.into_iter().filter(|&x| x != 0).collect();
            if list.len() != d || list.iter().any(|&r| r > m) {
                return Err(Error::Parse("alist column list disagrees with its degree".into()));
            }
            col_lists.push(list);
        }
        let mut checks = Vec::with_capacity(m);
        for &d in &row_deg {
            let raw: Vec<usize> = (0..max_row).map(|_| next()).collect::<Result<_>>()?;
            let list: Vec<usize> = raw.into_iter().filter(|&x| x != 0).collect();
            if list.len() != d || list.iter().any(|&c| c > n) {
                return Err(Error::Parse("alist row list disagrees with its degree".into()));
            }
            checks.push(list.into_iter().map(|c| c - 1).collect::<Vec<_>>());
        }
        for (v, rows) in col_lists.iter().enumerate() {
            if rows.iter().any(|&r| !checks[r - 1].contains(&v)) {
                return Err(Error::Parse("alist row and column lists disagree".into()));
            }
        }
        Self::from_checks(n, checks)
    }

    pub fn to_alist(&self) -> String {
        let m = self.checks.len();
        let mut cols = vec![Vec::new(); self.n];
        for (r, check) in self.checks.iter().enumerate() {
            for &v in check {
                cols[v].push(r + 1);
            }
        }
        let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        let line = |xs: Vec<usize>| xs.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
        let padded = |xs: &[usize], w: usize| {
            let mut v = xs.to_vec();
            v.resize(w, 0);
            line(v)
        };
        let mut out = vec![
            format!("{} {}", self.n, m),
            format!("{max_col} {max_row}"),
            line(cols.iter().map(Vec::len).collect()),
            line(self.checks.iter().map(Vec::len).collect()),
        ];
        out.extend(cols.iter().map(|c| padded(c, max_col)));
        out.extend(
            self.checks
                .iter()
                .map(|c| padded(&c.iter().map(|v| v + 1).collect::<Vec<_>>(), max_row)),
        );
        out.join("\n") + "\n"
    }
}

fn encode_dual_diagonal(proto: &QcPrototype, c: &mut [u8]) {
    let z = proto.z;
    let (mb, nb) = (proto.rows(), proto.cols());
    let kb = nb - mb;
    // P^s x, with (P^s x)[i] = x[(i + s) mod z].
    let shift = |x: &[u8], s: usize| -> Vec<u8> { (0..z).map(|i| x[(i + s) % z]).collect() };
    let add = |a: &mut [u8], b: &[u8]| a.iter_mut().zip(b).for_each(|(x, y)| *x ^= y);
    let lambda: Vec<Vec<u8>> = (0..mb)
        .map(|r| {
            let mut acc = vec![0u8; z];
            for col in 0..kb {
                let s = proto.base[r][col];
                if s >= 0 {
                    add(&mut acc, &shift(&c[col * z..(col + 1) * z], s as usize));
                }
            }
            acc
        })
        .collect();
    let mut p0 = vec![0u8; z];
    lambda.iter().for_each(|l| add(&mut p0, l));
    let hb = |r: usize| proto.base[r][kb];
    let mut prev = lambda[0].clone();
    add(&mut prev, &shift(&p0, hb(0) as usize));
    c[kb * z..(kb + 1) * z].copy_from_slice(&p0);
    c[(kb + 1) * z..(kb + 2) * z].copy_from_slice(&prev);
    for r in 1..mb - 1 {
        let mut next = prev.clone();
        add(&mut next, &lambda[r]);
        if hb(r) >= 0 {
            add(&mut next, &shift(&p0, hb(r) as usize));
        }
        let col = kb + 1 + r;
        c[col * z..(col + 1) * z].copy_from_slice(&next);
        prev = next;
    }
}

/// Largest message magnitude; keeps `tanh` away from ±1.
const LLR_CLAMP: f64 = 30.0;

/// `φ(x) = -ln tanh(x / 2)`, its own inverse on `x > 0`.
fn phi(x: f64) -> f64 {
    let x = x.clamp(1e-12, LLR_CLAMP);
    -(x * 0.5).tanh().ln()
}

fn check_update_spa(incoming: &[f64], out: &mut [f64]) {
    let mut sum = 0.0;
    let mut negative = false;
    for &q in incoming {
        sum += phi(q.abs());
        negative ^= q < 0.0;
    }
    for (o, &q) in out.iter_mut().zip(incoming) {
        let mag = phi((sum - phi(q.abs())).max(0.0));
        let neg = negative ^ (q < 0.0);
        *o = if neg { -mag } else { mag }.clamp(-LLR_CLAMP, LLR_CLAMP);
    }
}

fn check_update_min_sum(incoming: &[f64], out: &mut [f64]) {
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, 0);
    let mut negative = false;
    for (i, &q) in incoming.iter().enumerate() {
        let a = q.abs();
        if a < min1 {
            min2 = min1;
            min1 = a;
            arg = i;
        } else if a < min2 {
            min2 = a;
        }
        negative ^= q < 0.0;
    }
    for (i, (o, &q)) in out.iter_mut().zip(incoming).enumerate() {
        let mag = MIN_SUM_SCALE * if i == arg { min2 } else { min1 };
        *o = if negative ^ (q < 0.0) { -mag } else { mag };
    }
}

//! Quasi-cyclic LDPC coding: alist-format parity checks, a dense GF(2)
//! encoder derived by Gaussian elimination, and a normalized min-sum decoder.
//!
//! The built-in code is (3,6)-regular with n = 1296 and 648 checks. Its
//! circulant structure makes two parity rows linearly dependent, so the rank
//! is 646 and the code carries 650 information bits.

use crate::error::{Error, Result};

/// Scaling applied to check-node messages in the min-sum update.
pub const MIN_SUM_SCALE: f64 = 0.75;

/// Decoder iteration budget used by the link simulations.
pub const DEFAULT_MAX_ITERATIONS: usize = 25;

/// Sparse parity-check matrix as neighbor lists (0-indexed, sorted).
#[derive(Clone, Debug)]
pub struct ParityCheck {
    pub n: usize,
    pub m: usize,
    /// col_neighbors[v]: checks touching variable v.
    pub col_neighbors: Vec<Vec<usize>>,
    /// row_neighbors[c]: variables touching check c.
    pub row_neighbors: Vec<Vec<usize>>,
}

impl ParityCheck {
    /// Parse the alist text format: dimensions, max degrees, per-column and
    /// per-row degree lists, then one line of 1-indexed neighbors per column
    /// and per row. Zero entries in neighbor lines are padding and ignored,
    /// so both exact-degree and padded files load.
    pub fn from_alist(text: &str) -> Result<Self> {
        fn numbers(line: &str) -> Result<Vec<usize>> {
            line.split_whitespace()
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Alist(format!("non-numeric token {t:?}")))
                })
                .collect()
        }

        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next_line = |what: &str| -> Result<Vec<usize>> {
            numbers(lines.next().ok_or_else(|| Error::Alist(format!("missing {what}")))?)
        };

        let header = next_line("size line")?;
        let [n, m] = header[..] else {
            return Err(Error::Alist("size line needs exactly two numbers".into()));
        };
        if n == 0 || m == 0 {
            return Err(Error::Alist(format!("degenerate size {n} x {m}")));
        }
        let degrees = next_line("max-degree line")?;
        let [dv_max, dc_max] = degrees[..] else {
            return Err(Error::Alist("max-degree line needs exactly two numbers".into()));
        };
        let col_deg = next_line("variable degrees")?;
        let row_deg = next_line("check degrees")?;
        if col_deg.len() != n || row_deg.len() != m {
            return Err(Error::Alist("degree list length mismatch".into()));
        }
        if col_deg.iter().any(|&d| d == 0 || d > dv_max) {
            return Err(Error::Alist("variable degree out of range".into()));
        }
        if row_deg.iter().any(|&d| d == 0 || d > dc_max) {
            return Err(Error::Alist("check degree out of range".into()));
        }

        let mut read_lists = |degrees: &[usize], limit: usize, what: &str| -> Result<Vec<Vec<usize>>> {
            degrees
                .iter()
                .map(|&deg| {
                    let mut list: Vec<usize> = next_line(what)?
                        .into_iter()
                        .filter(|&idx| idx != 0)
                        .map(|idx| {
                            if idx > limit {
                                Err(Error::Alist(format!("{what} index {idx} > {limit}")))
                            } else {
                                Ok(idx - 1)
                            }
                        })
                        .collect::<Result<_>>()?;
                    if list.len() != deg {
                        return Err(Error::Alist(format!(
                            "{what} list has {} entries, degree says {deg}",
                            list.len()
                        )));
                    }
                    list.sort_unstable();
                    list.dedup();
                    if list.len() != deg {
                        return Err(Error::Alist(format!("duplicate {what} index")));
                    }
                    Ok(list)
                })
                .collect()
        };

        let col_neighbors = read_lists(&col_deg, m, "check")?;
        let row_neighbors = read_lists(&row_deg, n, "variable")?;

        // The two lists must describe the same matrix.
        let mut check_of_var = vec![Vec::new(); n];
        for (c, vars) in row_neighbors.iter().enumerate() {
            for &v in vars {
                check_of_var[v].push(c);
            }
        }
        if check_of_var != col_neighbors {
            return Err(Error::Alist("row and column lists disagree".into()));
        }
        Ok(ParityCheck { n, m, col_neighbors, row_neighbors })
    }

    /// H · bits over GF(2) is all zero.
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.row_neighbors.iter().all(|vars| {
            vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0
        })
    }
}

/// Dense bit-packed GF(2) matrix, 64 columns per word.
struct Gf2Matrix {
    cols: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
}

impl Gf2Matrix {
    fn from_neighbors(n: usize, row_neighbors: &[Vec<usize>]) -> Self {
        let words = n.div_ceil(64);
        let rows = row_neighbors
            .iter()
            .map(|vars| {
                let mut row = vec![0u64; words];
                for &v in vars {
                    row[v / 64] |= 1 << (v % 64);
                }
                row
            })
            .collect();
        Gf2Matrix { cols: n, words, rows }
    }

    fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r][c / 64] >> (c % 64) & 1 == 1
    }

    /// Reduce to reduced row-echelon form in place; returns the pivot column
    /// of each of the leading rank rows.
    fn reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(src) = (row..self.rows.len()).find(|&r| self.get(r, col)) else {
                continue;
            };
            self.rows.swap(row, src);
            for r in 0..self.rows.len() {
                if r != row && self.get(r, col) {
                    let (head, tail) = self.rows.split_at_mut(r.max(row));
                    let (a, b) = if r < row {
                        (&mut head[r], &tail[0])
                    } else {
                        (&mut tail[0], &head[row])
                    };
                    for w in 0..self.words {
                        a[w] ^= b[w];
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == self.rows.len() {
                break;
            }
        }
        pivots
    }
}

/// Systematic encoder: information bits sit on the non-pivot columns of the
/// reduced parity-check matrix; each pivot column is the XOR of the
/// information bits its reduced row touches.
struct Encoder {
    n: usize,
    pivot_cols: Vec<usize>,
    info_cols: Vec<usize>,
    /// For each pivot row, positions *within the info vector* to XOR.
    parity_support: Vec<Vec<u32>>,
}

impl Encoder {
    fn build(check: &ParityCheck) -> Encoder {
        let mut dense = Gf2Matrix::from_neighbors(check.n, &check.row_neighbors);
        let pivot_cols = dense.reduce();
        let is_pivot = {
            let mut mask = vec![false; check.n];
            for &c in &pivot_cols {
                mask[c] = true;
            }
            mask
        };
        let info_cols: Vec<usize> = (0..check.n).filter(|&c| !is_pivot[c]).collect();
        let info_slot = {
            let mut slot = vec![usize::MAX; check.n];
            for (i, &c) in info_cols.iter().enumerate() {
                slot[c] = i;
            }
            slot
        };
        let parity_support = (0..pivot_cols.len())
            .map(|r| {
                info_cols
                    .iter()
                    .filter(|&&c| dense.get(r, c))
                    .map(|&c| info_slot[c] as u32)
                    .collect()
            })
            .collect();
        Encoder { n: check.n, pivot_cols, info_cols, parity_support }
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.info_cols.len() {
            return Err(Error::Dimension(format!(
                "expected {} information bits, got {}",
                self.info_cols.len(),
                info.len()
            )));
        }
        let mut word = vec![0u8; self.n];
        for (i, &c) in self.info_cols.iter().enumerate() {
            word[c] = info[i] & 1;
        }
        for (r, &c) in self.pivot_cols.iter().enumerate() {
            word[c] = self.parity_support[r]
                .iter()
                .fold(0u8, |acc, &i| acc ^ info[i as usize]);
        }
        Ok(word)
    }
}

/// Result of a decoding attempt; `bits` are the hard decisions either way.
#[derive(Clone, Debug)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// A parity-check code with its derived encoder and min-sum decoder state.
pub struct LdpcCode {
    check: ParityCheck,
    encoder: Encoder,
    /// Flat edge ids grouped by check: edge_var[e] is the variable of edge e,
    /// with check c owning edges check_start[c]..check_start[c+1].
    edge_var: Vec<usize>,
    check_start: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl LdpcCode {
    pub fn from_alist_str(text: &str) -> Result<LdpcCode> {
        let check = ParityCheck::from_alist(text)?;
        let encoder = Encoder::build(&check);
        let mut edge_var = Vec::new();
        let mut check_start = Vec::with_capacity(check.m + 1);
        let mut var_edges = vec![Vec::new(); check.n];
        check_start.push(0);
        for vars in &check.row_neighbors {
            for &v in vars {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        Ok(LdpcCode { check, encoder, edge_var, check_start, var_edges })
    }

    /// The (3,6)-regular n = 1296 code shipped with the crate.
    pub fn builtin() -> Result<LdpcCode> {
        LdpcCode::from_alist_str(include_str!("../../data/ldpc_1296_648.alist"))
    }

    pub fn block_length(&self) -> usize {
        self.check.n
    }

    /// Number of information bits per codeword.
    pub fn dimension(&self) -> usize {
        self.encoder.info_cols.len()
    }

    /// GF(2) rank of the parity-check matrix.
    pub fn rank(&self) -> usize {
        self.encoder.pivot_cols.len()
    }

    pub fn parity_check(&self) -> &ParityCheck {
        &self.check
    }

    /// Codeword positions that carry the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.encoder.info_cols
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        self.encoder.encode(info)
    }

    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.check.syndrome_ok(bits)
    }

    /// Normalized min-sum decoding. Positive LLR means bit 0. Stops early
    /// once the hard decisions satisfy every check.
    pub fn decode(&self, llrs: &[f64], max_iterations: usize) -> Result<DecodeOutcome> {
        if llrs.len() != self.check.n {
            return Err(Error::Dimension(format!(
                "expected {} LLRs, got {}",
                self.check.n,
                llrs.len()
            )));
        }
        let n_edges = self.edge_var.len();
        // Variable-to-check messages, then check-to-variable, per edge.
        let mut q = vec![0.0f64; n_edges];
        let mut r = vec![0.0f64; n_edges];
        for (e, &v) in self.edge_var.iter().enumerate() {
            q[e] = llrs[v];
        }
        let mut total = llrs.to_vec();
        let mut bits = vec![0u8; self.check.n];

        for iter in 0..max_iterations {
            // Check-node update: for each check, the outgoing magnitude is
            // the smallest incoming magnitude among the *other* edges, scaled.
            for c in 0..self.check.m {
                let span = self.check_start[c]..self.check_start[c + 1];
                let mut sign = 1.0f64;
                let mut min1 = f64::INFINITY;
                let mut min2 = f64::INFINITY;
                let mut argmin = span.start;
                for e in span.clone() {
                    let m = q[e].abs();
                    if q[e] < 0.0 {
                        sign = -sign;
                    }
                    if m < min1 {
                        min2 = min1;
                        min1 = m;
                        argmin = e;
                    } else if m < min2 {
                        min2 = m;
                    }
                }
                for e in span {
                    let mag = if e == argmin { min2 } else { min1 };
                    let s = if q[e] < 0.0 { -sign } else { sign };
                    r[e] = MIN_SUM_SCALE * s * mag;
                }
            }
            // Variable-node update and hard decisions.
            for v in 0..self.check.n {
                let mut t = llrs[v];
                for &e in &self.var_edges[v] {
                    t += r[e];
                }
                total[v] = t;
                bits[v] = if t < 0.0 { 1 } else { 0 };
                for &e in &self.var_edges[v] {
                    q[e] = t - r[e];
                }
            }
            if self.check.syndrome_ok(&bits) {
                return Ok(DecodeOutcome { bits, converged: true, iterations: iter + 1 });
            }
        }
        Ok(DecodeOutcome { bits, converged: false, iterations: max_iterations })
    }
}

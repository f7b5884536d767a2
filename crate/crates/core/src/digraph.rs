//! Adjacency matrices of `d`-regular digraphs.
//!
//! A [`RegularDigraph`] is an `n x n` matrix with entries in `{0, 1}` whose
//! rows and columns all sum to `d`. **Loops are allowed** (diagonal entries
//! may be 1); multiple edges are not, since entries are bits.
//!
//! Samplers:
//!
//! * [`sample_configuration`] pairs `n d` out-stubs with `n d` in-stubs and
//!   rejects pairings that put two stubs in the same cell. Every simple
//!   matrix arises from exactly `(d!)^n` pairings, so accepted samples are
//!   exactly uniform. Acceptance decays like `exp(-(d-1)^2 / 2)`.
//! * [`sample_switch_chain`] runs the simple-switching Markov chain, which is
//!   uniform in the limit but only approximately uniform after finitely many
//!   steps.
//! * [`sample_uniform`] tries the exact sampler first and falls back to the
//!   chain, reporting which path produced the matrix.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::ComplexDenseMatrix;
use crate::rng::TrialRng;
use crate::Complex64;

/// Largest `n` accepted by [`enumerate_all`].
pub const ENUMERATION_MAX_N: usize = 7;
/// Largest number of matrices an enumeration may return.
pub const ENUMERATION_MAX_RESULTS: usize = 2_000_000;
/// Upper bound on the backtracking search tree of [`enumerate_restricted`],
/// measured as `C(free columns, d) ^ |T|`.
pub const RESTRICTED_SEARCH_BUDGET: f64 = 1e10;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RegularDigraph {
    n: usize,
    d: usize,
    supports: Vec<Vec<usize>>,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl std::fmt::Debug for RegularDigraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegularDigraph")
            .field("n", &self.n)
            .field("d", &self.d)
            .field("supports", &self.supports)
            .finish()
    }
}

impl RegularDigraph {
    /// Builds a matrix from its row supports, validating every invariant.
    pub fn from_supports(n: usize, d: usize, mut supports: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 || d > n {
            return Err(invalid(format!("need 1 <= n and d <= n, got n = {n}, d = {d}")));
        }
        if supports.len() != n {
            return Err(invalid(format!("expected {n} rows, got {}", supports.len())));
        }
        let mut col_sums = vec![0usize; n];
        for (i, row) in supports.iter_mut().enumerate() {
            row.sort_unstable();
            if row.len() != d {
                return Err(invalid(format!("row {i} has {} entries, expected {d}", row.len())));
            }
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("row {i} repeats a column (multiple edge)")));
            }
            for &j in row.iter() {
                if j >= n {
                    return Err(invalid(format!("row {i} has column {j} out of range")));
                }
                col_sums[j] += 1;
            }
        }
        if let Some(j) = col_sums.iter().position(|&c| c != d) {
            return Err(invalid(format!("column {j} sums to {}, expected {d}", col_sums[j])));
        }
        Ok(Self::from_sorted_unchecked(n, d, supports))
    }

    fn from_sorted_unchecked(n: usize, d: usize, supports: Vec<Vec<usize>>) -> Self {
        let words_per_row = n.div_ceil(64);
        let mut bits = vec![0u64; n * words_per_row];
        for (i, row) in supports.iter().enumerate() {
            for &j in row {
                bits[i * words_per_row + j / 64] |= 1 << (j % 64);
            }
        }
        Self {
            n,
            d,
            supports,
            words_per_row,
            bits,
        }
    }

    /// Builds a matrix from dense 0/1 rows.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(invalid("empty matrix"));
        }
        let mut supports = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(invalid(format!("row {i} has length {}, expected {n}", row.len())));
            }
            let mut s = Vec::new();
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => s.push(j),
                    _ => return Err(invalid(format!("entry ({i}, {j}) = {v} is not a bit"))),
                }
            }
            supports.push(s);
        }
        let d = supports[0].len();
        Self::from_supports(n, d, supports)
    }

    /// The circulant matrix with ones at `(i, (i + k) mod n)` for `k < d`.
    pub fn circulant(n: usize, d: usize) -> Result<Self> {
        if n == 0 || d > n {
            return Err(invalid(format!("need 1 <= n and d <= n, got n = {n}, d = {d}")));
        }
        let supports = (0..n)
            .map(|i| {
                let mut row: Vec<usize> = (0..d).map(|k| (i + k) % n).collect();
                row.sort_unstable();
                row
            })
            .collect();
        Ok(Self::from_sorted_unchecked(n, d, supports))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::circulant(n, 1)
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        Self::circulant(n, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    /// Sorted column indices of the ones in row `i`.
    pub fn row_support(&self, i: usize) -> &[usize] {
        &self.supports[i]
    }

    pub fn supports(&self) -> &[Vec<usize>] {
        &self.supports
    }

    pub fn row_dense(&self, i: usize) -> Vec<u8> {
        (0..self.n).map(|j| self.get(i, j) as u8).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| self.row_dense(i)).collect()
    }

    /// Row-major bit string, the key of the enumeration order.
    pub fn row_major_bits(&self) -> Vec<u8> {
        (0..self.n).flat_map(|i| self.row_dense(i)).collect()
    }

    /// The matrix `scale * A` with complex entries.
    pub fn to_complex(&self, scale: f64) -> ComplexDenseMatrix {
        let mut m = ComplexDenseMatrix::zeros(self.n, self.n);
        for (i, row) in self.supports.iter().enumerate() {
            for &j in row {
                m[(i, j)] = Complex64::new(scale, 0.0);
            }
        }
        m
    }

    /// The complement `J - A`, an element of the set with degree `n - d`.
    pub fn complement(&self) -> Self {
        let supports = (0..self.n)
            .map(|i| (0..self.n).filter(|&j| !self.get(i, j)).collect())
            .collect();
        Self::from_sorted_unchecked(self.n, self.n - self.d, supports)
    }

    /// Whether `mv` is an admissible simple switching for this matrix.
    pub fn is_admissible(&self, mv: &SwitchMove) -> bool {
        let SwitchMove { i1, i2, j1, j2 } = *mv;
        i1 != i2
            && j1 != j2
            && i1.max(i2) < self.n
            && j1.max(j2) < self.n
            && self.get(i1, j1)
            && self.get(i2, j2)
            && !self.get(i1, j2)
            && !self.get(i2, j1)
    }

    /// Text form: a header `n d`, then one line per row with its sorted
    /// 0-based column indices separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.n * (self.d * 5 + 1) + 16);
        let _ = writeln!(out, "{} {}", self.n, self.d);
        for row in &self.supports {
            let mut first = true;
            for j in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{j}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let parse = |tok: &str, line: usize| -> Result<usize> {
            tok.parse::<usize>().map_err(|e| Error::Parse {
                line,
                msg: format!("{tok:?}: {e}"),
            })
        };
        if head.len() != 2 {
            return Err(Error::Parse {
                line: 1,
                msg: "header must be `n d`".into(),
            });
        }
        let n = parse(head[0], 1)?;
        let d = parse(head[1], 1)?;
        let mut supports = Vec::with_capacity(n);
        for (idx, line) in lines {
            if supports.len() == n {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "more rows than the header declares".into(),
                });
            }
            let row = line
                .split_whitespace()
                .map(|tok| parse(tok, idx + 1))
                .collect::<Result<Vec<_>>>()?;
            supports.push(row);
        }
        if supports.len() != n {
            return Err(Error::Parse {
                line: supports.len() + 2,
                msg: format!("expected {n} rows, found {}", supports.len()),
            });
        }
        Self::from_supports(n, d, supports)
    }
}

/// A simple switching: with `A[i1][j1] = A[i2][j2] = 1` and
/// `A[i1][j2] = A[i2][j1] = 0`, flip all four entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SwitchMove {
    pub i1: usize,
    pub i2: usize,
    pub j1: usize,
    pub j2: usize,
}

impl SwitchMove {
    pub fn new(rows: (usize, usize), cols: (usize, usize)) -> Result<Self> {
        if rows.0 == rows.1 || cols.0 == cols.1 {
            return Err(invalid("a switch needs two distinct rows and two distinct columns"));
        }
        Ok(Self {
            i1: rows.0,
            i2: rows.1,
            j1: cols.0,
            j2: cols.1,
        })
    }

    /// The move that undoes `self` once applied.
    pub fn inverse(&self) -> Self {
        Self {
            i1: self.i1,
            i2: self.i2,
            j1: self.j2,
            j2: self.j1,
        }
    }
}

/// Applies a simple switching. Applying `mv` then `mv.inverse()` is the
/// identity.
pub fn apply_switch(m: &RegularDigraph, mv: &SwitchMove) -> Result<RegularDigraph> {
    if !m.is_admissible(mv) {
        return Err(Error::InadmissibleSwitch {
            i1: mv.i1,
            i2: mv.i2,
            j1: mv.j1,
            j2: mv.j2,
        });
    }
    let mut supports = m.supports.clone();
    replace_sorted(&mut supports[mv.i1], mv.j1, mv.j2);
    replace_sorted(&mut supports[mv.i2], mv.j2, mv.j1);
    Ok(RegularDigraph::from_sorted_unchecked(m.n, m.d, supports))
}

fn replace_sorted(row: &mut Vec<usize>, old: usize, new: usize) {
    let pos = row.binary_search(&old).expect("entry present");
    row.remove(pos);
    let ins = row.binary_search(&new).unwrap_err();
    row.insert(ins, new);
}

/// Exact uniform sampler by rejection on the configuration model.
pub fn sample_configuration(n: usize, d: usize, rng: &mut TrialRng, max_attempts: usize) -> Result<RegularDigraph> {
    sample_configuration_counted(n, d, rng, max_attempts).map(|(m, _)| m)
}

/// As [`sample_configuration`], also returning the number of attempts used.
pub fn sample_configuration_counted(
    n: usize,
    d: usize,
    rng: &mut TrialRng,
    max_attempts: usize,
) -> Result<(RegularDigraph, usize)> {
    if n == 0 || d == 0 || d > n {
        return Err(invalid(format!("need 1 <= d <= n, got n = {n}, d = {d}")));
    }
    if max_attempts == 0 {
        return Err(invalid("max_attempts must be at least 1"));
    }
    if d == n {
        return Ok((RegularDigraph::all_ones(n)?, 1));
    }
    let words_per_row = n.div_ceil(64);
    let mut bits = vec![0u64; n * words_per_row];
    let mut in_stubs: Vec<usize> = (0..n * d).map(|k| k / d).collect();
    for attempt in 1..=max_attempts {
        in_stubs.shuffle(rng);
        bits.iter_mut().for_each(|w| *w = 0);
        let mut simple = true;
        for (k, &j) in in_stubs.iter().enumerate() {
            let i = k / d;
            let w = &mut bits[i * words_per_row + j / 64];
            let mask = 1u64 << (j % 64);
            if *w & mask != 0 {
                simple = false;
                break;
            }
            *w |= mask;
        }
        if simple {
            let supports = in_stubs
                .chunks(d)
                .map(|c| {
                    let mut row = c.to_vec();
                    row.sort_unstable();
                    row
                })
                .collect();
            return Ok((RegularDigraph::from_sorted_unchecked(n, d, supports), attempt));
        }
    }
    Err(Error::RejectionBudgetExhausted {
        n,
        d,
        attempts: max_attempts,
    })
}

/// Mutable edge-list state for the switch chain.
struct ChainState {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    edges: Vec<(usize, usize)>,
}

impl ChainState {
    fn new(m: &RegularDigraph) -> Self {
        let edges = m
            .supports
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
            .collect();
        Self {
            n: m.n,
            words_per_row: m.words_per_row,
            bits: m.bits.clone(),
            edges,
        }
    }

    #[inline]
    fn has(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    fn flip(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] ^= 1 << (j % 64);
    }

    /// One proposal: two uniformly chosen edges (with replacement). Returns
    /// whether the switch was admissible and applied.
    fn step(&mut self, rng: &mut TrialRng) -> bool {
        let e = self.edges.len();
        let a = rng.random_range(0..e);
        let b = rng.random_range(0..e);
        let (i1, j1) = self.edges[a];
        let (i2, j2) = self.edges[b];
        if i1 == i2 || j1 == j2 || self.has(i1, j2) || self.has(i2, j1) {
            return false;
        }
        self.flip(i1, j1);
        self.flip(i2, j2);
        self.flip(i1, j2);
        self.flip(i2, j1);
        self.edges[a] = (i1, j2);
        self.edges[b] = (i2, j1);
        true
    }

    fn into_digraph(self, d: usize) -> RegularDigraph {
        let mut supports = vec![Vec::with_capacity(d); self.n];
        for (i, j) in self.edges {
            supports[i].push(j);
        }
        for row in &mut supports {
            row.sort_unstable();
        }
        RegularDigraph::from_sorted_unchecked(self.n, d, supports)
    }
}

/// Runs `steps` proposals of the switch chain from `start`.
///
/// Each proposal picks two edges `(i1, j1)`, `(i2, j2)` uniformly and
/// independently and applies the switch to `(i1, j2)`, `(i2, j1)` if it is
/// admissible. Every state has the same number of proposals and each
/// admissible proposal has a matching reverse proposal, so the chain is
/// symmetric with the uniform distribution as its stationary law.
pub fn sample_switch_chain(start: &RegularDigraph, steps: usize, rng: &mut TrialRng) -> RegularDigraph {
    if steps == 0 {
        return start.clone();
    }
    let mut state = ChainState::new(start);
    if state.edges.is_empty() {
        return start.clone();
    }
    for _ in 0..steps {
        state.step(rng);
    }
    state.into_digraph(start.d)
}

/// How a matrix returned by [`sample_uniform`] was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum SampleMethod {
    /// Rejection sampling; exactly uniform.
    Exact { attempts: usize },
    /// Switch chain from the circulant start; approximately uniform.
    SwitchChain { accepted: usize, proposals: usize },
}

impl SampleMethod {
    pub fn is_exact(&self) -> bool {
        matches!(self, SampleMethod::Exact { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplerOptions {
    /// Rejection attempts before falling back to the chain.
    pub max_attempts: usize,
    /// Accepted moves for the chain; `None` means `20 n d`.
    pub burn_in_accepted: Option<usize>,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            max_attempts: 200,
            burn_in_accepted: None,
        }
    }
}

/// Draws a matrix from the uniform measure, exactly when the rejection
/// sampler succeeds within budget and approximately otherwise.
///
/// For `d > n / 2` the complement (degree `n - d`) is sampled instead, which
/// is exact whenever the complement sampler is.
pub fn sample_uniform(
    n: usize,
    d: usize,
    rng: &mut TrialRng,
    opts: &SamplerOptions,
) -> Result<(RegularDigraph, SampleMethod)> {
    if n == 0 || d == 0 || d > n {
        return Err(invalid(format!("need 1 <= d <= n, got n = {n}, d = {d}")));
    }
    if d == n {
        return Ok((RegularDigraph::all_ones(n)?, SampleMethod::Exact { attempts: 1 }));
    }
    if 2 * d > n {
        let (m, how) = sample_uniform(n, n - d, rng, opts)?;
        return Ok((m.complement(), how));
    }
    match sample_configuration_counted(n, d, rng, opts.max_attempts) {
        Ok((m, attempts)) => return Ok((m, SampleMethod::Exact { attempts })),
        Err(Error::RejectionBudgetExhausted { .. }) => {}
        Err(e) => return Err(e),
    }
    let target = opts.burn_in_accepted.unwrap_or(20 * n * d);
    let start = RegularDigraph::circulant(n, d)?;
    let mut state = ChainState::new(&start);
    let cap = target.saturating_mul(1000).max(1000);
    let (mut accepted, mut proposals) = (0usize, 0usize);
    while accepted < target && proposals < cap {
        proposals += 1;
        if state.step(rng) {
            accepted += 1;
        }
    }
    Ok((state.into_digraph(d), SampleMethod::SwitchChain { accepted, proposals }))
}

/// Every element of the set for `(n, d)`, ordered by the row-major bit
/// string of the matrix (0 before 1).
pub fn enumerate_all(n: usize, d: usize) -> Result<Vec<RegularDigraph>> {
    if n > ENUMERATION_MAX_N {
        return Err(Error::SizeGuard(format!(
            "n = {n} exceeds the enumeration limit {ENUMERATION_MAX_N}"
        )));
    }
    if n == 0 || d > n {
        return Err(invalid(format!("need 1 <= n and d <= n, got n = {n}, d = {d}")));
    }
    let rows: Vec<usize> = (0..n).collect();
    fill_rows(n, d, &vec![Vec::new(); n], &rows, vec![d; n])
}

/// All matrices that agree with `m` on every row outside `free_rows`, in
/// enumeration order.
pub fn enumerate_restricted(m: &RegularDigraph, free_rows: &[usize]) -> Result<Vec<RegularDigraph>> {
    let (n, d) = (m.n, m.d);
    let mut rows: Vec<usize> = free_rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    if rows.iter().any(|&i| i >= n) {
        return Err(invalid("free row index out of range"));
    }
    if rows.is_empty() {
        return Ok(vec![m.clone()]);
    }
    let mut capacity = vec![0usize; n];
    for &i in &rows {
        for &j in &m.supports[i] {
            capacity[j] += 1;
        }
    }
    let free_cols = capacity.iter().filter(|&&c| c > 0).count();
    let tree = restricted_search_size(m, &rows);
    if tree > RESTRICTED_SEARCH_BUDGET {
        return Err(Error::SizeGuard(format!(
            "{} free rows over {free_cols} free columns (search size ~{tree:.1e})",
            rows.len()
        )));
    }
    let mut base = m.supports.clone();
    for &i in &rows {
        base[i].clear();
    }
    fill_rows(n, d, &base, &rows, capacity)
}

/// Size estimate `C(|S|, d)^{|T|}` of the search tree of
/// [`enumerate_restricted`], where `T` is the set of free rows and `S` the
/// union of their supports.
pub fn restricted_search_size(m: &RegularDigraph, free_rows: &[usize]) -> f64 {
    let mut rows: Vec<usize> = free_rows.iter().copied().filter(|&i| i < m.n).collect();
    rows.sort_unstable();
    rows.dedup();
    if rows.is_empty() {
        return 1.0;
    }
    let mut cols: Vec<usize> = rows.iter().flat_map(|&i| m.supports[i].iter().copied()).collect();
    cols.sort_unstable();
    cols.dedup();
    binomial(cols.len(), m.d).powi(rows.len() as i32)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, t| acc * (n - t) as f64 / (t + 1) as f64)
}

/// Backtracking over d-subsets for each free row, respecting the residual
/// column capacities.
fn fill_rows(
    n: usize,
    d: usize,
    base: &[Vec<usize>],
    free_rows: &[usize],
    mut capacity: Vec<usize>,
) -> Result<Vec<RegularDigraph>> {
    struct Search<'a> {
        d: usize,
        free_rows: &'a [usize],
        rows: Vec<Vec<usize>>,
        out: Vec<Vec<Vec<usize>>>,
        overflow: bool,
    }

    fn choose(s: &mut Search<'_>, capacity: &mut [usize], depth: usize, start: usize, picked: &mut Vec<usize>) {
        if s.overflow {
            return;
        }
        if picked.len() == s.d {
            let remaining = s.free_rows.len() - depth - 1;
            if capacity.iter().any(|&c| c > remaining) {
                return;
            }
            s.rows[s.free_rows[depth]] = picked.clone();
            descend(s, capacity, depth + 1);
            return;
        }
        let need = s.d - picked.len();
        for j in start..capacity.len() {
            if capacity.len() - j < need {
                break;
            }
            if capacity[j] == 0 {
                continue;
            }
            capacity[j] -= 1;
            picked.push(j);
            choose(s, capacity, depth, j + 1, picked);
            picked.pop();
            capacity[j] += 1;
        }
    }

    fn descend(s: &mut Search<'_>, capacity: &mut [usize], depth: usize) {
        if depth == s.free_rows.len() {
            if s.out.len() >= ENUMERATION_MAX_RESULTS {
                s.overflow = true;
                return;
            }
            s.out.push(s.rows.clone());
            return;
        }
        let mut picked = Vec::with_capacity(s.d);
        choose(s, capacity, depth, 0, &mut picked);
    }

    if capacity.iter().sum::<usize>() != free_rows.len() * d {
        return Ok(Vec::new());
    }
    let mut search = Search {
        d,
        free_rows,
        rows: base.to_vec(),
        out: Vec::new(),
        overflow: false,
    };
    descend(&mut search, &mut capacity, 0);
    if search.overflow {
        return Err(Error::SizeGuard(format!(
            "more than {ENUMERATION_MAX_RESULTS} matrices"
        )));
    }
    let mut all: Vec<RegularDigraph> = search
        .out
        .into_iter()
        .map(|rows| RegularDigraph::from_sorted_unchecked(n, d, rows))
        .collect();
    all.sort_by_cached_key(|m| m.row_major_bits());
    Ok(all)
}

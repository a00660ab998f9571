//! Array-based base matrices, block-structured sparse matrices and the
//! alist exchange format.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Sparse binary matrix stored as sorted per-column row lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    col_adj: Vec<Vec<usize>>,
}

impl BinaryMatrix {
    /// Builds a matrix from `(row, col)` positions. Duplicates and
    /// out-of-range positions are rejected.
    pub fn new(rows: usize, cols: usize, positions: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut col_adj = vec![Vec::new(); cols];
        for (r, c) in positions {
            if r >= rows || c >= cols {
                return Err(Error::Dimension(format!("position ({r}, {c}) outside {rows}x{cols}")));
            }
            col_adj[c].push(r);
        }
        for (c, list) in col_adj.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Dimension(format!("duplicate entry in column {c}")));
            }
        }
        Ok(BinaryMatrix { rows, cols, col_adj })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix { rows, cols, col_adj: vec![Vec::new(); cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Check neighbors of variable `c`, ascending.
    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_adj[c]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.col_adj[c].binary_search(&r).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.col_adj.iter().map(Vec::len).sum()
    }

    /// Variable neighbors of every check, ascending.
    pub fn row_adjacency(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.rows];
        for (c, list) in self.col_adj.iter().enumerate() {
            for &r in list {
                out[r].push(c);
            }
        }
        out
    }

    pub fn col_weights(&self) -> Vec<usize> {
        self.col_adj.iter().map(Vec::len).collect()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.rows];
        for list in &self.col_adj {
            for &r in list {
                w[r] += 1;
            }
        }
        w
    }

    pub fn positions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.col_adj
            .iter()
            .enumerate()
            .flat_map(|(c, list)| list.iter().map(move |&r| (r, c)))
    }

    /// Applies index maps: entry `(r, c)` moves to `(row_map[r], col_map[c])`.
    pub fn permuted(&self, row_map: &[usize], col_map: &[usize]) -> Result<Self> {
        if row_map.len() != self.rows || col_map.len() != self.cols {
            return Err(Error::Dimension("index map length mismatch".into()));
        }
        BinaryMatrix::new(self.rows, self.cols, self.positions().map(|(r, c)| (row_map[r], col_map[c])))
    }

    /// Submatrix on the given row and column ranges, re-indexed from zero.
    pub fn submatrix(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        let nr = rows.len();
        let nc = cols.len();
        let mut col_adj = vec![Vec::new(); nc];
        for c in cols.clone() {
            col_adj[c - cols.start] = self.col_adj[c]
                .iter()
                .filter(|r| rows.contains(r))
                .map(|r| r - rows.start)
                .collect();
        }
        BinaryMatrix { rows: nr, cols: nc, col_adj }
    }

    /// Dense 0/1 rendering, one row per line. Intended for small matrices.
    pub fn to_dense_string(&self) -> String {
        let mut grid = vec![vec![b'0'; self.cols]; self.rows];
        for (r, c) in self.positions() {
            grid[r][c] = b'1';
        }
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for row in grid {
            s.push_str(std::str::from_utf8(&row).expect("ascii"));
            s.push('\n');
        }
        s
    }
}

/// One block of a [`BlockMatrix`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockEntry {
    Zero,
    /// `σ^e`: row `r` of the block has its 1 in column `(r + e) mod size`.
    CirculantShift(usize),
    ExplicitPermutation(Permutation),
}

impl BlockEntry {
    /// Column of the 1 in row `r`, or `None` for a zero block.
    pub fn column_of_row(&self, r: usize, size: usize) -> Option<usize> {
        match self {
            BlockEntry::Zero => None,
            BlockEntry::CirculantShift(e) => Some((r + e) % size),
            BlockEntry::ExplicitPermutation(p) => Some(p.inverse().apply(r)),
        }
    }

    /// Row of the 1 in column `c`, or `None` for a zero block.
    pub fn row_of_col(&self, c: usize, size: usize) -> Option<usize> {
        match self {
            BlockEntry::Zero => None,
            BlockEntry::CirculantShift(e) => Some((c + size - e % size) % size),
            BlockEntry::ExplicitPermutation(p) => Some(p.apply(c)),
        }
    }

    /// The entry as a permutation of degree `size` (`None` for zero).
    pub fn as_permutation(&self, size: usize) -> Option<Permutation> {
        match self {
            BlockEntry::Zero => None,
            BlockEntry::CirculantShift(e) => Some(Permutation::shift(size, *e as i64)),
            BlockEntry::ExplicitPermutation(p) => Some(p.clone()),
        }
    }
}

/// Sparse matrix of square blocks, each zero, circulant, or an explicit
/// permutation matrix. Zero blocks are absent from the entry map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockMatrix {
    block_rows: usize,
    block_cols: usize,
    block_size: usize,
    entries: BTreeMap<(usize, usize), BlockEntry>,
}

impl BlockMatrix {
    pub fn new(block_rows: usize, block_cols: usize, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::param("block size must be positive"));
        }
        Ok(BlockMatrix { block_rows, block_cols, block_size, entries: BTreeMap::new() })
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn set(&mut self, br: usize, bc: usize, entry: BlockEntry) -> Result<()> {
        if br >= self.block_rows || bc >= self.block_cols {
            return Err(Error::Dimension(format!(
                "block ({br}, {bc}) outside {}x{}",
                self.block_rows, self.block_cols
            )));
        }
        match entry {
            BlockEntry::Zero => {
                self.entries.remove(&(br, bc));
            }
            BlockEntry::CirculantShift(e) => {
                self.entries.insert((br, bc), BlockEntry::CirculantShift(e % self.block_size));
            }
            BlockEntry::ExplicitPermutation(ref p) => {
                if p.degree() != self.block_size {
                    return Err(Error::DegreeMismatch { left: p.degree(), right: self.block_size });
                }
                self.entries.insert((br, bc), entry);
            }
        }
        Ok(())
    }

    pub fn get(&self, br: usize, bc: usize) -> &BlockEntry {
        self.entries.get(&(br, bc)).unwrap_or(&BlockEntry::Zero)
    }

    /// Nonzero blocks in row-major order.
    pub fn nonzero_blocks(&self) -> impl Iterator<Item = (usize, usize, &BlockEntry)> {
        self.entries.iter().map(|(&(r, c), e)| (r, c, e))
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_circulant(&self) -> bool {
        self.entries.values().all(|e| matches!(e, BlockEntry::CirculantShift(_)))
    }

    /// Expands to the full binary matrix.
    pub fn expand(&self) -> BinaryMatrix {
        let n = self.block_size;
        let mut col_adj = vec![Vec::new(); self.block_cols * n];
        for (&(br, bc), entry) in &self.entries {
            for c in 0..n {
                if let Some(r) = entry.row_of_col(c, n) {
                    col_adj[bc * n + c].push(br * n + r);
                }
            }
        }
        for list in &mut col_adj {
            list.sort_unstable();
        }
        BinaryMatrix { rows: self.block_rows * n, cols: self.block_cols * n, col_adj }
    }

    /// Regroups `factor x factor` groups of blocks into single blocks of
    /// size `block_size * factor`. Every group must expand to a zero or a
    /// permutation matrix; circulant groups become `CirculantShift`.
    pub fn coarsen(&self, factor: usize) -> Result<BlockMatrix> {
        if factor == 0 || self.block_rows % factor != 0 || self.block_cols % factor != 0 {
            return Err(Error::Dimension(format!(
                "{}x{} blocks not divisible by {factor}",
                self.block_rows, self.block_cols
            )));
        }
        let n = self.block_size;
        let big = n * factor;
        let mut groups: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (&(br, bc), entry) in &self.entries {
            for c in 0..n {
                let r = entry.row_of_col(c, n).expect("nonzero");
                groups
                    .entry((br / factor, bc / factor))
                    .or_default()
                    .push(((br % factor) * n + r, (bc % factor) * n + c));
            }
        }
        let mut out = BlockMatrix::new(self.block_rows / factor, self.block_cols / factor, big)?;
        for ((gr, gc), pos) in groups {
            let mut images = vec![usize::MAX; big];
            for (r, c) in pos {
                if images[c] != usize::MAX {
                    return Err(Error::Unsupported(format!("group ({gr}, {gc}) is not a permutation")));
                }
                images[c] = r;
            }
            if images.contains(&usize::MAX) {
                return Err(Error::Unsupported(format!("group ({gr}, {gc}) is not a permutation")));
            }
            let perm = Permutation::new(images)
                .map_err(|_| Error::Unsupported(format!("group ({gr}, {gc}) is not a permutation")))?;
            let entry = match perm.shift_exponent() {
                Some(k) => BlockEntry::CirculantShift(k),
                None => BlockEntry::ExplicitPermutation(perm),
            };
            out.set(gr, gc, entry)?;
        }
        Ok(out)
    }
}

/// Array-based base matrix `H(γ, p)`: block `(i, j)` is `σ^{(i·j) mod p}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbBase {
    gamma: usize,
    p: usize,
}

impl AbBase {
    pub fn new(gamma: usize, p: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if gamma == 0 || gamma > p {
            return Err(Error::param(format!("gamma must be in 1..={p}, got {gamma}")));
        }
        Ok(AbBase { gamma, p })
    }

    pub fn gamma(&self) -> usize {
        self.gamma
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn exponent(&self, i: usize, j: usize) -> usize {
        (i * j) % self.p
    }

    pub fn exponents(&self) -> Vec<Vec<usize>> {
        (0..self.gamma)
            .map(|i| (0..self.p).map(|j| self.exponent(i, j)).collect())
            .collect()
    }

    pub fn block_matrix(&self) -> BlockMatrix {
        let mut bm = BlockMatrix::new(self.gamma, self.p, self.p).expect("p >= 2");
        for i in 0..self.gamma {
            for j in 0..self.p {
                bm.set(i, j, BlockEntry::CirculantShift(self.exponent(i, j))).expect("in range");
            }
        }
        bm
    }

    pub fn expand(&self) -> BinaryMatrix {
        self.block_matrix().expand()
    }
}

pub fn ab_base(gamma: usize, p: usize) -> Result<AbBase> {
    AbBase::new(gamma, p)
}

pub fn expand(bm: &BlockMatrix) -> BinaryMatrix {
    bm.expand()
}

/// Writes the alist representation: header `N M`, maximum degrees, the
/// degree lists, then 1-indexed neighbor lists zero-padded to the maximum
/// degree.
pub fn export_alist<W: Write>(h: &BinaryMatrix, mut sink: W) -> Result<()> {
    sink.write_all(alist_string(h).as_bytes())?;
    Ok(())
}

pub fn alist_string(h: &BinaryMatrix) -> String {
    let rows = h.row_adjacency();
    let colw = h.col_weights();
    let roww: Vec<usize> = rows.iter().map(Vec::len).collect();
    let maxc = colw.iter().copied().max().unwrap_or(0);
    let maxr = roww.iter().copied().max().unwrap_or(0);
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", h.cols(), h.rows()));
    out.push_str(&format!("{maxc} {maxr}\n"));
    out.push_str(&join(&mut colw.iter().copied()));
    out.push('\n');
    out.push_str(&join(&mut roww.iter().copied()));
    out.push('\n');
    for c in 0..h.cols() {
        let list = h.col(c);
        let padded = list.iter().map(|r| r + 1).chain(std::iter::repeat_n(0, maxc - list.len()));
        out.push_str(&join(&mut padded.into_iter()));
        out.push('\n');
    }
    for list in &rows {
        let padded = list.iter().map(|c| c + 1).chain(std::iter::repeat_n(0, maxr - list.len()));
        out.push_str(&join(&mut padded.into_iter()));
        out.push('\n');
    }
    out
}

/// Parses an alist file, validating declared degrees, index ranges and the
/// agreement between the column and row sections. Errors carry the 1-based
/// line number of the offending line.
pub fn import_alist<R: BufRead>(source: R) -> Result<BinaryMatrix> {
    let mut lines = Vec::new();
    for line in source.lines() {
        lines.push(line?);
    }
    parse_alist(&lines.join("\n"))
}

pub fn parse_alist(text: &str) -> Result<BinaryMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_nums = |what: &str| -> Result<(usize, Vec<usize>)> {
        let (no, line) = lines
            .next()
            .ok_or_else(|| Error::Alist { line: 0, message: format!("missing {what}") })?;
        let nums = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Alist { line: no, message: format!("bad integer {t:?}") })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((no, nums))
    };
    let bad = |line: usize, message: String| Error::Alist { line, message };

    let (no, dims) = next_nums("dimensions")?;
    if dims.len() != 2 {
        return Err(bad(no, "expected `N M`".into()));
    }
    let (n, m) = (dims[0], dims[1]);
    let (no, maxes) = next_nums("maximum degrees")?;
    if maxes.len() != 2 {
        return Err(bad(no, "expected maximum column and row degrees".into()));
    }
    let (maxc, maxr) = (maxes[0], maxes[1]);
    let (no, colw) = next_nums("column degrees")?;
    if colw.len() != n {
        return Err(bad(no, format!("expected {n} column degrees, found {}", colw.len())));
    }
    if colw.iter().any(|&d| d > maxc) {
        return Err(bad(no, "column degree exceeds declared maximum".into()));
    }
    let (no, roww) = next_nums("row degrees")?;
    if roww.len() != m {
        return Err(bad(no, format!("expected {m} row degrees, found {}", roww.len())));
    }
    if roww.iter().any(|&d| d > maxr) {
        return Err(bad(no, "row degree exceeds declared maximum".into()));
    }

    let mut positions = Vec::new();
    for (c, &deg) in colw.iter().enumerate() {
        let (no, list) = next_nums("column neighbor list")?;
        let nz: Vec<usize> = list.iter().copied().filter(|&x| x != 0).collect();
        if nz.len() != deg {
            return Err(bad(no, format!("column {} declares degree {deg} but lists {}", c + 1, nz.len())));
        }
        if list.len() > maxc.max(deg) {
            return Err(bad(no, "neighbor list longer than maximum degree".into()));
        }
        for &r in &nz {
            if r > m {
                return Err(bad(no, format!("row index {r} out of range 1..={m}")));
            }
            positions.push((r - 1, c));
        }
    }
    let h = BinaryMatrix::new(m, n, positions.iter().copied()).map_err(|e| bad(0, e.to_string()))?;
    let rows = h.row_adjacency();
    for (r, &deg) in roww.iter().enumerate() {
        let (no, list) = next_nums("row neighbor list")?;
        let mut nz: Vec<usize> = list.iter().copied().filter(|&x| x != 0).collect();
        if nz.len() != deg {
            return Err(bad(no, format!("row {} declares degree {deg} but lists {}", r + 1, nz.len())));
        }
        if nz.iter().any(|&c| c > n) {
            return Err(bad(no, format!("column index out of range 1..={n}")));
        }
        nz.sort_unstable();
        let expect: Vec<usize> = rows[r].iter().map(|c| c + 1).collect();
        if nz != expect {
            return Err(bad(no, format!("row {} disagrees with the column section", r + 1)));
        }
    }
    Ok(h)
}

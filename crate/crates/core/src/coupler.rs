//! Edge-spreading and lifting.
//!
//! A spatially coupled matrix is built in one lift: every base edge gets a
//! label `(k, λ)` and is replaced by the `JL x JL` permutation matrix
//! `τ_L^k ⊗ λ` ([`lift_tailbiting`]). [`reorder`] then interleaves rows and
//! columns so the tailbiting band structure appears, and [`terminate`]
//! unwraps the band into the terminated form with `L + m` check positions.
//!
//! Randomized spreading uses ChaCha8 (`rand_chacha` 0.9) seeded with the
//! user seed; each edge (method i) or variable node (method ii) draws from
//! its own stream, selected with `set_stream(index)`, where edges are
//! indexed in column-major order of the base matrix.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abcode::{AbBase, BinaryMatrix, BlockEntry, BlockMatrix};
use crate::error::{Error, Result};
use crate::perm::{LiftLabel, Permutation};

/// Identifier written to spec files for the random generator in use.
pub const RNG_NAME: &str = "chacha8-v1";

/// Diagonal cut `ξ` of an array-based matrix into `H_0` and `H_1`: in block
/// row `i`, block columns `j < ξ_i` go to `H_0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CuttingVector {
    xi: Vec<usize>,
}

impl CuttingVector {
    /// Accepts nondecreasing entries in `0..=p`; `strict` additionally
    /// requires strictly increasing entries.
    pub fn new(xi: Vec<usize>, p: usize, strict: bool) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::param("cutting vector is empty"));
        }
        if let Some(&x) = xi.iter().find(|&&x| x > p) {
            return Err(Error::param(format!("cutting vector entry {x} outside 0..={p}")));
        }
        for w in xi.windows(2) {
            if w[1] < w[0] || (strict && w[1] == w[0]) {
                let what = if strict { "strictly increasing" } else { "nondecreasing" };
                return Err(Error::param(format!("cutting vector {xi:?} is not {what}")));
            }
        }
        Ok(CuttingVector { xi })
    }

    pub fn xi(&self) -> &[usize] {
        &self.xi
    }

    pub fn gamma(&self) -> usize {
        self.xi.len()
    }

    /// Every nondecreasing cutting vector of length `gamma` over `0..=p`, in
    /// lexicographic order.
    pub fn all(gamma: usize, p: usize) -> Vec<CuttingVector> {
        fn rec(prefix: &mut Vec<usize>, gamma: usize, p: usize, out: &mut Vec<CuttingVector>) {
            if prefix.len() == gamma {
                out.push(CuttingVector { xi: prefix.clone() });
                return;
            }
            let lo = prefix.last().copied().unwrap_or(0);
            for x in lo..=p {
                prefix.push(x);
                rec(prefix, gamma, p, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), gamma, p, &mut out);
        out
    }

    /// The 0/1 assignment matrix induced by the cut.
    pub fn to_bm(&self, p: usize) -> AssignmentMatrixBm {
        let rows: Vec<Vec<usize>> = self
            .xi
            .iter()
            .map(|&x| (0..p).map(|j| usize::from(j >= x)).collect())
            .collect();
        let m = rows.iter().flatten().copied().max().unwrap_or(0);
        AssignmentMatrixBm { m, rows }
    }
}

/// `γ x p` grid of coupling offsets, one per block of the base matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssignmentMatrixBm {
    m: usize,
    rows: Vec<Vec<usize>>,
}

impl AssignmentMatrixBm {
    /// Validates that every entry is at most `m` and that `m` occurs.
    pub fn new(rows: Vec<Vec<usize>>, m: usize) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Dimension("assignment matrix must be a nonempty rectangle".into()));
        }
        let max = rows.iter().flatten().copied().max().unwrap_or(0);
        if max > m {
            return Err(Error::param(format!("assignment entry {max} exceeds memory {m}")));
        }
        if max != m {
            return Err(Error::param(format!("no assignment entry equals the memory {m}")));
        }
        Ok(AssignmentMatrixBm { m, rows })
    }

    /// Memory inferred as the largest entry.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.iter().flatten().copied().max().unwrap_or(0);
        AssignmentMatrixBm::new(rows, m)
    }

    pub fn memory(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    /// Offsets of block column `j` across all block rows.
    pub fn column(&self, j: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// One row per line, entries separated by single spaces.
    pub fn to_grid_string(&self) -> String {
        let mut s = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses a whitespace-separated integer grid; blank lines and `#`
    /// comments are ignored. The memory is the largest entry unless given.
    pub fn parse_grid(text: &str, m: Option<usize>) -> Result<Self> {
        let mut rows = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::SpecFile {
                        line: no + 1,
                        message: format!("bad grid entry {t:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        match m {
            Some(m) => AssignmentMatrixBm::new(rows, m),
            None => AssignmentMatrixBm::from_rows(rows),
        }
    }
}

/// How the terminal `J x J` permutation of each block is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaPolicy {
    Identity,
    /// `τ_J^ℓ` on every block.
    Cyclic(usize),
    /// Explicit permutation per block, `γ x p`.
    Table(Vec<Vec<Permutation>>),
}

impl LambdaPolicy {
    pub fn lambda(&self, i: usize, j: usize, degree: usize) -> Result<Permutation> {
        match self {
            LambdaPolicy::Identity => Ok(Permutation::identity(degree)),
            LambdaPolicy::Cyclic(ell) => Ok(Permutation::shift(degree, *ell as i64)),
            LambdaPolicy::Table(t) => {
                let p = t
                    .get(i)
                    .and_then(|r| r.get(j))
                    .ok_or_else(|| Error::Dimension(format!("lambda table has no entry ({i}, {j})")))?;
                if p.degree() != degree {
                    return Err(Error::DegreeMismatch { left: p.degree(), right: degree });
                }
                Ok(p.clone())
            }
        }
    }

    /// True when every block gets a power of `τ_J`.
    pub fn is_cyclic(&self) -> bool {
        match self {
            LambdaPolicy::Identity | LambdaPolicy::Cyclic(_) => true,
            LambdaPolicy::Table(t) => t.iter().flatten().all(|p| p.shift_exponent().is_some()),
        }
    }

    /// Parses one table entry: an integer `ℓ` for `τ_J^ℓ`, or images
    /// joined by `/`.
    pub fn parse_entry(token: &str, degree: usize) -> Result<Permutation> {
        if token.contains('/') {
            let images = token
                .split('/')
                .map(|t| t.parse::<usize>().map_err(|_| Error::param(format!("bad image {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let p = Permutation::new(images)?;
            if p.degree() != degree {
                return Err(Error::DegreeMismatch { left: p.degree(), right: degree });
            }
            Ok(p)
        } else {
            let ell = token
                .parse::<i64>()
                .map_err(|_| Error::param(format!("bad lambda entry {token:?}")))?;
            Ok(Permutation::shift(degree, ell))
        }
    }

    pub fn format_entry(p: &Permutation) -> String {
        match p.shift_exponent() {
            Some(k) => k.to_string(),
            None => p.images().iter().map(|x| x.to_string()).collect::<Vec<_>>().join("/"),
        }
    }

    /// Parses a grid of entries (see [`LambdaPolicy::parse_entry`]).
    pub fn parse_table(text: &str, degree: usize) -> Result<Self> {
        let mut rows = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|t| {
                    LambdaPolicy::parse_entry(t, degree).map_err(|e| Error::SpecFile {
                        line: no + 1,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(LambdaPolicy::Table(rows))
    }
}

/// A label for every nonzero position of a base matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAssignment {
    j: usize,
    labels: BTreeMap<(usize, usize), LiftLabel>,
}

impl EdgeAssignment {
    pub fn new(j: usize, labels: BTreeMap<(usize, usize), LiftLabel>) -> Result<Self> {
        if j == 0 {
            return Err(Error::param("terminal lift degree must be positive"));
        }
        if let Some(l) = labels.values().find(|l| l.lambda.degree() != j) {
            return Err(Error::DegreeMismatch { left: l.lambda.degree(), right: j });
        }
        Ok(EdgeAssignment { j, labels })
    }

    pub fn terminal_degree(&self) -> usize {
        self.j
    }

    pub fn label(&self, r: usize, c: usize) -> Option<&LiftLabel> {
        self.labels.get(&(r, c))
    }

    pub fn labels(&self) -> impl Iterator<Item = ((usize, usize), &LiftLabel)> {
        self.labels.iter().map(|(&k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Largest shift exponent in use.
    pub fn memory(&self) -> usize {
        self.labels.values().map(|l| l.k).max().unwrap_or(0)
    }

    /// Checks that exactly the nonzero positions of `base` are labeled.
    pub fn check_covers(&self, base: &BinaryMatrix) -> Result<()> {
        if self.labels.len() != base.nnz() {
            return Err(Error::Dimension(format!(
                "{} labels for {} base edges",
                self.labels.len(),
                base.nnz()
            )));
        }
        for (r, c) in base.positions() {
            if !self.labels.contains_key(&(r, c)) {
                return Err(Error::Dimension(format!("base edge ({r}, {c}) has no label")));
            }
        }
        Ok(())
    }

    /// `H_k`: the base positions whose label has shift exponent `k`.
    pub fn component(&self, base: &BinaryMatrix, k: usize) -> BinaryMatrix {
        BinaryMatrix::new(
            base.rows(),
            base.cols(),
            self.labels.iter().filter(|(_, l)| l.k == k).map(|(&rc, _)| rc),
        )
        .expect("labels lie on base positions")
    }

    /// If every block of an array-based base (block size `p`) carries one
    /// shift exponent and identity `λ` with `J = 1`, returns the grid.
    pub fn block_constant_offsets(&self, gamma: usize, p: usize) -> Option<Vec<Vec<usize>>> {
        if self.j != 1 {
            return None;
        }
        let mut grid: Vec<Vec<Option<usize>>> = vec![vec![None; p]; gamma];
        for (&(r, c), l) in &self.labels {
            let (i, j) = (r / p, c / p);
            if i >= gamma || j >= p {
                return None;
            }
            match grid[i][j] {
                None => grid[i][j] = Some(l.k),
                Some(k) if k == l.k => {}
                Some(_) => return None,
            }
        }
        grid.into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
            .collect()
    }
}

fn block_assignment(
    base: &AbBase,
    offset: impl Fn(usize, usize) -> usize,
    lambda: &LambdaPolicy,
    j: usize,
) -> Result<EdgeAssignment> {
    let p = base.p();
    let mut labels = BTreeMap::new();
    for (r, c) in base.expand().positions() {
        let (bi, bj) = (r / p, c / p);
        labels.insert((r, c), LiftLabel::new(offset(bi, bj), lambda.lambda(bi, bj, j)?));
    }
    EdgeAssignment::new(j, labels)
}

/// Cutting-vector spread: block `(i, j)` gets `k = 0` when `j < ξ_i`, else 1.
pub fn spread_cutting_vector(base: &AbBase, xi: &CuttingVector) -> Result<EdgeAssignment> {
    if xi.gamma() != base.gamma() {
        return Err(Error::Dimension(format!(
            "cutting vector length {} for gamma {}",
            xi.gamma(),
            base.gamma()
        )));
    }
    CuttingVector::new(xi.xi().to_vec(), base.p(), false)?;
    block_assignment(base, |i, j| usize::from(j >= xi.xi()[i]), &LambdaPolicy::Identity, 1)
}

/// Every edge inside block `(i, j)` gets `k = B(i, j)` and the block's `λ`.
pub fn assignment_from_bm(
    base: &AbBase,
    bm: &AssignmentMatrixBm,
    lambda: &LambdaPolicy,
    j: usize,
) -> Result<EdgeAssignment> {
    if bm.gamma() != base.gamma() || bm.width() != base.p() {
        return Err(Error::Dimension(format!(
            "assignment matrix is {}x{}, base needs {}x{}",
            bm.gamma(),
            bm.width(),
            base.gamma(),
            base.p()
        )));
    }
    block_assignment(base, |i, jj| bm.get(i, jj), lambda, j)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw from `0..n` by rejection on 64-bit words.
fn uniform_below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    let zone = u64::MAX - (u64::MAX % n);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % n;
        }
    }
}

/// Method (i): every edge independently gets a uniform `k ∈ {0..=m}`.
pub fn spread_random_method_i(base: &BinaryMatrix, m: usize, seed: u64) -> Result<EdgeAssignment> {
    let mut labels = BTreeMap::new();
    for (edge, (r, c)) in column_major_edges(base).into_iter().enumerate() {
        let mut rng = stream_rng(seed, edge as u64);
        let k = uniform_below(&mut rng, m as u64 + 1) as usize;
        labels.insert((r, c), LiftLabel::shift_only(k, 1));
    }
    EdgeAssignment::new(1, labels)
}

/// Method (ii): each variable node of degree `d` picks `d` distinct
/// positions in `0..=m` uniformly, one per incident edge.
pub fn spread_random_method_ii(base: &BinaryMatrix, m: usize, seed: u64) -> Result<EdgeAssignment> {
    let mut labels = BTreeMap::new();
    for c in 0..base.cols() {
        let nbrs = base.col(c);
        if nbrs.len() > m + 1 {
            return Err(Error::param(format!(
                "variable {c} has degree {} > m + 1 = {}",
                nbrs.len(),
                m + 1
            )));
        }
        let mut rng = stream_rng(seed, c as u64);
        // partial Fisher-Yates over 0..=m
        let mut pool: Vec<usize> = (0..=m).collect();
        for (t, &r) in nbrs.iter().enumerate() {
            let pick = t + uniform_below(&mut rng, (pool.len() - t) as u64) as usize;
            pool.swap(t, pick);
            labels.insert((r, c), LiftLabel::shift_only(pool[t], 1));
        }
    }
    EdgeAssignment::new(1, labels)
}

fn column_major_edges(base: &BinaryMatrix) -> Vec<(usize, usize)> {
    (0..base.cols())
        .flat_map(|c| base.col(c).iter().map(move |&r| (r, c)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Tailbiting,
    Terminated,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tailbiting" => Ok(Mode::Tailbiting),
            "terminated" => Ok(Mode::Terminated),
            other => Err(Error::param(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Tailbiting => "tailbiting",
            Mode::Terminated => "terminated",
        })
    }
}

/// Replaces every base edge labeled `(k, λ)` by `τ_L^k ⊗ λ`. The result has
/// the base's block shape with blocks of size `J·L`.
pub fn lift_tailbiting(base: &BinaryMatrix, asg: &EdgeAssignment, l: usize) -> Result<BlockMatrix> {
    asg.check_covers(base)?;
    let j = asg.terminal_degree();
    let mut out = BlockMatrix::new(base.rows(), base.cols(), j * l)?;
    for ((r, c), label) in asg.labels() {
        if label.k >= l {
            return Err(Error::param(format!("label k = {} needs L > k, L = {l}", label.k)));
        }
        let entry = if j == 1 {
            BlockEntry::CirculantShift(label.k)
        } else {
            BlockEntry::ExplicitPermutation(Permutation::shift(l, label.k as i64).kronecker(&label.lambda))
        };
        out.set(r, c, entry)?;
    }
    Ok(out)
}

/// Index maps sending lifted row/column indices to their reordered
/// positions: lifted index `(b, i, u)` (base index `b`, position `i`,
/// terminal index `u`) moves to `(i·B + b)·J + u`.
pub fn reorder_maps(base_rows: usize, base_cols: usize, l: usize, j: usize) -> (Vec<usize>, Vec<usize>) {
    let map = |n: usize| -> Vec<usize> {
        (0..n * l * j)
            .map(|old| {
                let b = old / (l * j);
                let i = (old % (l * j)) / j;
                let u = old % j;
                (i * n + b) * j + u
            })
            .collect()
    };
    (map(base_rows), map(base_cols))
}

/// Reorders a lifted matrix (blocks of size `J·L`) into banded form with
/// `J x J` blocks moved intact.
pub fn reorder(lifted: &BlockMatrix, l: usize, j: usize) -> Result<BlockMatrix> {
    if l == 0 || j == 0 || lifted.block_size() != l * j {
        return Err(Error::Dimension(format!(
            "block size {} is not J·L = {}",
            lifted.block_size(),
            l * j
        )));
    }
    let (rb, cb) = (lifted.block_rows(), lifted.block_cols());
    let mut out = BlockMatrix::new(rb * l, cb * l, j)?;
    for (r, c, entry) in lifted.nonzero_blocks() {
        let perm = entry.as_permutation(l * j).expect("nonzero");
        for i in 0..l {
            let a = perm.apply(i * j) / j;
            let mut images = Vec::with_capacity(j);
            for u in 0..j {
                let v = perm.apply(i * j + u);
                if v / j != a {
                    return Err(Error::Unsupported(format!(
                        "block ({r}, {c}) does not move {j}x{j} blocks intact"
                    )));
                }
                images.push(v % j);
            }
            let sub = Permutation::new(images)?;
            let sub_entry = match sub.shift_exponent() {
                Some(k) => BlockEntry::CirculantShift(k),
                None => BlockEntry::ExplicitPermutation(sub),
            };
            out.set(a * rb + r, i * cb + c, sub_entry)?;
        }
    }
    Ok(out)
}

/// Unwraps a reordered tailbiting matrix with `L` positions into the
/// terminated form with `L + m` check positions, laid out as
/// `[H_0; H_1 H_0; ...; H_m]`.
///
/// The lift puts the offset-`k` checks of position `i` at `i - k (mod L)`,
/// a band above the diagonal. Reflecting positions (`t -> -t mod L`) is a
/// graph isomorphism that moves the band below the diagonal; this function
/// cuts the reflected band, so the offset-`k` checks of column group `i`
/// land in row group `i + k`. [`unwrap_tailbiting`] cuts the unreflected
/// band instead; both give isomorphic graphs.
pub fn terminate(tailbiting: &BlockMatrix, l: usize, m: usize) -> Result<BlockMatrix> {
    if l == 0 || tailbiting.block_rows() % l != 0 || tailbiting.block_cols() % l != 0 {
        return Err(Error::Dimension(format!(
            "{}x{} blocks not divisible by L = {l}",
            tailbiting.block_rows(),
            tailbiting.block_cols()
        )));
    }
    let rb = tailbiting.block_rows() / l;
    let cb = tailbiting.block_cols() / l;
    let mut out = BlockMatrix::new((l + m) * rb, tailbiting.block_cols(), tailbiting.block_size())?;
    for (r, c, entry) in tailbiting.nonzero_blocks() {
        let (a, br) = (r / rb, r % rb);
        let i = c / cb;
        // label k puts position i's checks at i - k (mod L)
        let d = (i + l - a) % l;
        if d > m {
            return Err(Error::NotBanded(format!(
                "block ({r}, {c}) sits {d} positions off its column group, memory is {m}"
            )));
        }
        out.set((i + d) * rb + br, c, entry.clone())?;
    }
    Ok(out)
}

/// Cuts a reordered tailbiting matrix without reflecting positions: the
/// offset-`k` checks of column group `i` go to row group `i - k + m`, so
/// each tailbiting check at the break is copied once per side.
pub fn unwrap_tailbiting(tailbiting: &BlockMatrix, l: usize, m: usize) -> Result<BlockMatrix> {
    if l == 0 || tailbiting.block_rows() % l != 0 || tailbiting.block_cols() % l != 0 {
        return Err(Error::Dimension(format!(
            "{}x{} blocks not divisible by L = {l}",
            tailbiting.block_rows(),
            tailbiting.block_cols()
        )));
    }
    let rb = tailbiting.block_rows() / l;
    let cb = tailbiting.block_cols() / l;
    let mut out = BlockMatrix::new((l + m) * rb, tailbiting.block_cols(), tailbiting.block_size())?;
    for (r, c, entry) in tailbiting.nonzero_blocks() {
        let (a, br) = (r / rb, r % rb);
        let i = c / cb;
        let k = (i + l - a) % l;
        if k > m {
            return Err(Error::NotBanded(format!(
                "block ({r}, {c}) sits {k} positions off its column group, memory is {m}"
            )));
        }
        out.set((i + m - k) * rb + br, c, entry.clone())?;
    }
    Ok(out)
}

/// True iff every `b x b` block is zero or circulant (each row is the
/// cyclic right shift of the row above).
pub fn is_quasi_cyclic(h: &BinaryMatrix, block_size: usize) -> Result<bool> {
    if block_size == 0 || h.rows() % block_size != 0 || h.cols() % block_size != 0 {
        return Err(Error::Dimension(format!(
            "{}x{} not divisible by block size {block_size}",
            h.rows(),
            h.cols()
        )));
    }
    let b = block_size;
    let set: HashSet<(usize, usize)> = h.positions().collect();
    for &(r, c) in &set {
        let (br, bc) = (r / b, c / b);
        let nr = br * b + (r % b + 1) % b;
        let nc = bc * b + (c % b + 1) % b;
        if !set.contains(&(nr, nc)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Circulant block form (block size `p`) of the reordered array-based SC
/// matrix defined by a block-constant assignment. Terminated matrices have
/// `γ(L + m)` block rows; block `(γ·t' + i, p·t + j)` is `σ^{ij}` when
/// `t' = t + B(i, j)`; tailbiting matrices use `t' = t - B(i, j) mod L`,
/// the reordered form of the lift.
pub fn ab_sc_block_matrix(base: &AbBase, bm: &AssignmentMatrixBm, l: usize, mode: Mode) -> Result<BlockMatrix> {
    let (g, p, m) = (base.gamma(), base.p(), bm.memory());
    if bm.gamma() != g || bm.width() != p {
        return Err(Error::Dimension("assignment matrix shape does not match base".into()));
    }
    if l == 0 || (m >= l && !(l == 1 && m == 0)) {
        return Err(Error::param(format!("memory {m} needs L > m, L = {l}")));
    }
    let groups = match mode {
        Mode::Terminated => l + m,
        Mode::Tailbiting => l,
    };
    let mut out = BlockMatrix::new(g * groups, p * l, p)?;
    for t in 0..l {
        for i in 0..g {
            for j in 0..p {
                let tp = match mode {
                    Mode::Terminated => t + bm.get(i, j),
                    Mode::Tailbiting => (t + l - bm.get(i, j)) % l,
                };
                out.set(g * tp + i, p * t + j, BlockEntry::CirculantShift(base.exponent(i, j)))?;
            }
        }
    }
    Ok(out)
}

/// Base graph of a construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseSpec {
    ArrayBased(AbBase),
    /// Explicit matrix; `source` is the alist path recorded in spec files.
    Explicit { matrix: BinaryMatrix, source: String },
}

impl BaseSpec {
    pub fn matrix(&self) -> BinaryMatrix {
        match self {
            BaseSpec::ArrayBased(ab) => ab.expand(),
            BaseSpec::Explicit { matrix, .. } => matrix.clone(),
        }
    }

    pub fn array_based(&self) -> Option<&AbBase> {
        match self {
            BaseSpec::ArrayBased(ab) => Some(ab),
            BaseSpec::Explicit { .. } => None,
        }
    }
}

/// Edge-spreading recipe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AssignmentSpec {
    CuttingVector(CuttingVector),
    Bm(AssignmentMatrixBm),
    RandomI,
    RandomII,
}

impl AssignmentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AssignmentSpec::CuttingVector(_) => "cutting-vector",
            AssignmentSpec::Bm(_) => "bm",
            AssignmentSpec::RandomI => "random-i",
            AssignmentSpec::RandomII => "random-ii",
        }
    }
}

/// Full recipe from which an SC parity-check matrix is built
/// deterministically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SCCodeSpec {
    pub base: BaseSpec,
    pub l: usize,
    pub m: usize,
    pub j: usize,
    pub mode: Mode,
    pub assignment: AssignmentSpec,
    pub lambda: LambdaPolicy,
    pub seed: u64,
    pub reordered: bool,
}

impl SCCodeSpec {
    /// Array-based, `J = 1`, terminated and reordered.
    pub fn ab(base: AbBase, l: usize, assignment: AssignmentSpec) -> Result<Self> {
        let m = match &assignment {
            AssignmentSpec::CuttingVector(xi) => xi.to_bm(base.p()).memory(),
            AssignmentSpec::Bm(bm) => bm.memory(),
            _ => return Err(Error::param("random spreads need an explicit memory")),
        };
        let spec = SCCodeSpec {
            base: BaseSpec::ArrayBased(base),
            l,
            m,
            j: 1,
            mode: Mode::Terminated,
            assignment,
            lambda: LambdaPolicy::Identity,
            seed: 0,
            reordered: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::param("coupling length must be positive"));
        }
        if self.j == 0 {
            return Err(Error::param("terminal lift degree must be positive"));
        }
        if self.m >= self.l && !(self.l == 1 && self.m == 0) {
            return Err(Error::param(format!("memory {} must be below L = {}", self.m, self.l)));
        }
        if self.mode == Mode::Terminated && !self.reordered {
            return Err(Error::param("terminated matrices are always reordered"));
        }
        match (&self.assignment, &self.base) {
            (AssignmentSpec::CuttingVector(xi), BaseSpec::ArrayBased(ab)) => {
                CuttingVector::new(xi.xi().to_vec(), ab.p(), false)?;
                if xi.gamma() != ab.gamma() {
                    return Err(Error::Dimension("cutting vector length differs from gamma".into()));
                }
                if xi.to_bm(ab.p()).memory() > self.m {
                    return Err(Error::param("cutting vector spread needs m >= 1"));
                }
            }
            (AssignmentSpec::Bm(bm), BaseSpec::ArrayBased(ab)) => {
                if bm.gamma() != ab.gamma() || bm.width() != ab.p() {
                    return Err(Error::Dimension("assignment matrix shape does not match base".into()));
                }
                if bm.memory() != self.m {
                    return Err(Error::param(format!(
                        "assignment matrix memory {} differs from m = {}",
                        bm.memory(),
                        self.m
                    )));
                }
            }
            (AssignmentSpec::CuttingVector(_) | AssignmentSpec::Bm(_), BaseSpec::Explicit { .. }) => {
                return Err(Error::param("cutting vectors and B_m grids need an array-based base"));
            }
            _ => {}
        }
        if matches!(self.assignment, AssignmentSpec::RandomI | AssignmentSpec::RandomII) && self.j != 1 {
            return Err(Error::param("random spreads are defined for J = 1"));
        }
        Ok(())
    }

    pub fn base_matrix(&self) -> BinaryMatrix {
        self.base.matrix()
    }

    pub fn edge_assignment(&self) -> Result<EdgeAssignment> {
        self.validate()?;
        let asg = match (&self.assignment, &self.base) {
            (AssignmentSpec::CuttingVector(xi), BaseSpec::ArrayBased(ab)) => {
                let bm = xi.to_bm(ab.p());
                assignment_from_bm(ab, &bm, &self.lambda, self.j)?
            }
            (AssignmentSpec::Bm(bm), BaseSpec::ArrayBased(ab)) => assignment_from_bm(ab, bm, &self.lambda, self.j)?,
            (AssignmentSpec::RandomI, base) => spread_random_method_i(&base.matrix(), self.m, self.seed)?,
            (AssignmentSpec::RandomII, base) => spread_random_method_ii(&base.matrix(), self.m, self.seed)?,
            _ => unreachable!("validated"),
        };
        if asg.memory() > self.m {
            return Err(Error::param(format!("label k = {} exceeds m = {}", asg.memory(), self.m)));
        }
        Ok(asg)
    }

    /// The block-constant offset grid when the spec qualifies for the
    /// line-counting path: array-based base with `γ = 3`, `J = 1`.
    pub fn block_offsets(&self) -> Option<(AbBase, AssignmentMatrixBm)> {
        let ab = *self.base.array_based()?;
        if self.j != 1 || ab.gamma() != 3 {
            return None;
        }
        match &self.assignment {
            AssignmentSpec::CuttingVector(xi) => Some((ab, xi.to_bm(ab.p()))),
            AssignmentSpec::Bm(bm) => Some((ab, bm.clone())),
            _ => {
                let asg = self.edge_assignment().ok()?;
                let grid = asg.block_constant_offsets(ab.gamma(), ab.p())?;
                Some((ab, AssignmentMatrixBm::from_rows(grid).ok()?))
            }
        }
    }

    /// Lifted tailbiting matrix before reordering (blocks of size `J·L`).
    pub fn lifted(&self) -> Result<BlockMatrix> {
        lift_tailbiting(&self.base_matrix(), &self.edge_assignment()?, self.l)
    }

    /// Builds the matrix: lift, then reorder, then terminate when asked.
    pub fn build(&self) -> Result<BlockMatrix> {
        let lifted = self.lifted()?;
        if !self.reordered {
            return Ok(lifted);
        }
        let tb = reorder(&lifted, self.l, self.j)?;
        match self.mode {
            Mode::Tailbiting => Ok(tb),
            Mode::Terminated => terminate(&tb, self.l, self.m),
        }
    }

    pub fn build_binary(&self) -> Result<BinaryMatrix> {
        Ok(self.build()?.expand())
    }

    /// Spec file text (see [`SCCodeSpec::parse`] for the grammar).
    pub fn to_text(&self) -> String {
        let mut s = String::from("# sclift code spec v1\n");
        match &self.base {
            BaseSpec::ArrayBased(ab) => {
                let _ = writeln!(s, "base=ab");
                let _ = writeln!(s, "gamma={}", ab.gamma());
                let _ = writeln!(s, "p={}", ab.p());
            }
            BaseSpec::Explicit { source, .. } => {
                let _ = writeln!(s, "base=alist:{source}");
            }
        }
        let _ = writeln!(s, "L={}", self.l);
        let _ = writeln!(s, "m={}", self.m);
        let _ = writeln!(s, "J={}", self.j);
        let _ = writeln!(s, "mode={}", self.mode);
        let _ = writeln!(s, "reordered={}", self.reordered);
        let _ = writeln!(s, "assignment={}", self.assignment.kind());
        match &self.assignment {
            AssignmentSpec::CuttingVector(xi) => {
                let parts: Vec<String> = xi.xi().iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "xi={}", parts.join(","));
            }
            AssignmentSpec::Bm(bm) => {
                for (i, row) in bm.rows().iter().enumerate() {
                    let parts: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                    let _ = writeln!(s, "bm.{i}={}", parts.join(" "));
                }
            }
            _ => {}
        }
        match &self.lambda {
            LambdaPolicy::Identity => {
                let _ = writeln!(s, "lambda=identity");
            }
            LambdaPolicy::Cyclic(ell) => {
                let _ = writeln!(s, "lambda=cyclic:{ell}");
            }
            LambdaPolicy::Table(t) => {
                let _ = writeln!(s, "lambda=table");
                for (i, row) in t.iter().enumerate() {
                    let parts: Vec<String> = row.iter().map(LambdaPolicy::format_entry).collect();
                    let _ = writeln!(s, "lambda.{i}={}", parts.join(" "));
                }
            }
        }
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "rng={RNG_NAME}");
        s
    }

    /// Parses the line-oriented `key=value` format. Blank lines and lines
    /// starting with `#` are ignored. Keys:
    ///
    /// ```text
    /// base=ab | alist:PATH      gamma=<int> p=<prime>   (ab only)
    /// L=<int> m=<int> J=<int>   mode=tailbiting|terminated
    /// reordered=true|false      assignment=cutting-vector|bm|random-i|random-ii
    /// xi=a,b,c                  bm.<row>=<ints separated by spaces>
    /// lambda=identity|cyclic:<l>|table   lambda.<row>=<entries>
    /// seed=<u64>                rng=chacha8-v1
    /// ```
    ///
    /// Relative alist paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::SpecFile {
                line: no + 1,
                message: format!("expected key=value, got {line:?}"),
            })?;
            if kv.insert(k.trim().to_string(), (no + 1, v.trim().to_string())).is_some() {
                return Err(Error::SpecFile { line: no + 1, message: format!("duplicate key {k:?}") });
            }
        }
        let err = |line: usize, message: String| Error::SpecFile { line, message };
        let get = |k: &str| kv.get(k).cloned();
        let req = |k: &str| get(k).ok_or_else(|| err(0, format!("missing key {k:?}")));
        let num = |k: &str| -> Result<usize> {
            let (no, v) = req(k)?;
            v.parse().map_err(|_| err(no, format!("{k} must be an integer, got {v:?}")))
        };

        let (bno, base_v) = req("base")?;
        let base = if base_v == "ab" {
            BaseSpec::ArrayBased(AbBase::new(num("gamma")?, num("p")?).map_err(|e| err(bno, e.to_string()))?)
        } else if let Some(path) = base_v.strip_prefix("alist:") {
            let full = match base_dir {
                Some(d) if Path::new(path).is_relative() => d.join(path),
                _ => Path::new(path).to_path_buf(),
            };
            let text = std::fs::read_to_string(&full)
                .map_err(|e| err(bno, format!("cannot read {}: {e}", full.display())))?;
            BaseSpec::Explicit { matrix: crate::abcode::parse_alist(&text)?, source: path.to_string() }
        } else {
            return Err(err(bno, format!("unknown base {base_v:?}")));
        };

        let l = num("L")?;
        let m = num("m")?;
        let j = match get("J") {
            Some(_) => num("J")?,
            None => 1,
        };
        let mode = match get("mode") {
            Some((no, v)) => v.parse().map_err(|e: Error| err(no, e.to_string()))?,
            None => Mode::Terminated,
        };
        let reordered = match get("reordered") {
            Some((no, v)) => v.parse().map_err(|_| err(no, format!("bad boolean {v:?}")))?,
            None => true,
        };
        let seed = match get("seed") {
            Some((no, v)) => v.parse().map_err(|_| err(no, format!("bad seed {v:?}")))?,
            None => 0,
        };
        if let Some((no, v)) = get("rng") {
            if v != RNG_NAME {
                return Err(err(no, format!("unsupported rng {v:?}, expected {RNG_NAME}")));
            }
        }
        let p_width = base.array_based().map(|ab| ab.p());
        let gamma = base.array_based().map(|ab| ab.gamma());

        let (ano, kind) = req("assignment")?;
        let assignment = match kind.as_str() {
            "cutting-vector" => {
                let (no, v) = req("xi")?;
                let xi = v
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|_| err(no, format!("bad xi entry {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                let p = p_width.ok_or_else(|| err(ano, "cutting vectors need base=ab".into()))?;
                AssignmentSpec::CuttingVector(CuttingVector::new(xi, p, false).map_err(|e| err(no, e.to_string()))?)
            }
            "bm" => {
                let g = gamma.ok_or_else(|| err(ano, "bm assignments need base=ab".into()))?;
                let mut grid = String::new();
                for i in 0..g {
                    let (_, v) = req(&format!("bm.{i}"))?;
                    grid.push_str(&v);
                    grid.push('\n');
                }
                AssignmentSpec::Bm(AssignmentMatrixBm::parse_grid(&grid, Some(m)).map_err(|e| err(ano, e.to_string()))?)
            }
            "random-i" => AssignmentSpec::RandomI,
            "random-ii" => AssignmentSpec::RandomII,
            other => return Err(err(ano, format!("unknown assignment {other:?}"))),
        };

        let lambda = match get("lambda") {
            None => LambdaPolicy::Identity,
            Some((no, v)) => {
                if v == "identity" {
                    LambdaPolicy::Identity
                } else if let Some(ell) = v.strip_prefix("cyclic:") {
                    LambdaPolicy::Cyclic(ell.parse().map_err(|_| err(no, format!("bad cyclic shift {ell:?}")))?)
                } else if v == "table" {
                    let g = gamma.ok_or_else(|| err(no, "lambda tables need base=ab".into()))?;
                    let mut grid = String::new();
                    for i in 0..g {
                        let (_, row) = req(&format!("lambda.{i}"))?;
                        grid.push_str(&row);
                        grid.push('\n');
                    }
                    LambdaPolicy::parse_table(&grid, j)?
                } else {
                    return Err(err(no, format!("unknown lambda policy {v:?}")));
                }
            }
        };

        let spec = SCCodeSpec { base, l, m, j, mode, assignment, lambda, seed, reordered };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abcode::ab_base;
    use proptest::prelude::*;

    #[test]
    fn cutting_vector_spread_example() {
        let base = ab_base(3, 3).unwrap();
        let xi = CuttingVector::new(vec![1, 2, 3], 3, true).unwrap();
        let asg = spread_cutting_vector(&base, &xi).unwrap();
        let grid = asg.block_constant_offsets(3, 3).unwrap();
        let h0: Vec<(usize, usize)> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| grid[i][j] == 0)
            .collect();
        assert_eq!(h0, vec![(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]);
        assert_eq!(asg.memory(), 1);
    }

    #[test]
    fn degenerate_cut_is_memory_zero() {
        let base = ab_base(3, 5).unwrap();
        let xi = CuttingVector::new(vec![5, 5, 5], 5, false).unwrap();
        let asg = spread_cutting_vector(&base, &xi).unwrap();
        assert_eq!(asg.memory(), 0);
        assert_eq!(xi.to_bm(5).memory(), 0);
    }

    #[test]
    fn cutting_vector_validation() {
        assert!(CuttingVector::new(vec![1, 1, 2], 5, false).is_ok());
        assert!(CuttingVector::new(vec![1, 1, 2], 5, true).is_err());
        assert!(CuttingVector::new(vec![3, 1, 2], 5, false).is_err());
        assert!(CuttingVector::new(vec![1, 2, 6], 5, false).is_err());
        assert_eq!(CuttingVector::all(3, 5).len(), 56);
    }

    #[test]
    fn bm_validation_and_grid() {
        assert!(AssignmentMatrixBm::new(vec![vec![0, 1], vec![1, 0]], 2).is_err());
        assert!(AssignmentMatrixBm::new(vec![vec![0, 3], vec![1, 0]], 2).is_err());
        let bm = AssignmentMatrixBm::new(vec![vec![0, 2], vec![1, 0]], 2).unwrap();
        let text = bm.to_grid_string();
        assert_eq!(text, "0 2\n1 0\n");
        assert_eq!(AssignmentMatrixBm::parse_grid(&text, None).unwrap(), bm);
    }

    #[test]
    fn bm_entry_labels_whole_block() {
        let base = ab_base(3, 5).unwrap();
        let mut rows = vec![vec![0; 5]; 3];
        rows[1][4] = 2;
        let bm = AssignmentMatrixBm::new(rows, 2).unwrap();
        let asg = assignment_from_bm(&base, &bm, &LambdaPolicy::Identity, 1).unwrap();
        for ((r, c), l) in asg.labels() {
            assert_eq!(l.k, if r / 5 == 1 && c / 5 == 4 { 2 } else { 0 });
        }
        let wrong = AssignmentMatrixBm::from_rows(vec![vec![0; 4]; 3]).unwrap();
        assert!(assignment_from_bm(&base, &wrong, &LambdaPolicy::Identity, 1).is_err());
    }

    #[test]
    fn cutting_vector_is_a_bm_assignment() {
        let base = ab_base(3, 7).unwrap();
        for xi in CuttingVector::all(3, 7).into_iter().step_by(11) {
            let a = spread_cutting_vector(&base, &xi).unwrap();
            let b = assignment_from_bm(&base, &xi.to_bm(7), &LambdaPolicy::Identity, 1).unwrap();
            assert_eq!(a, b);
            assert!(xi.to_bm(7).memory() <= 1);
        }
    }

    #[test]
    fn partition_property() {
        let base = ab_base(3, 5).unwrap();
        let h = base.expand();
        for seed in 0..5 {
            let asg = spread_random_method_i(&h, 2, seed).unwrap();
            let mut total = BTreeMap::new();
            for k in 0..=2 {
                for pos in asg.component(&h, k).positions() {
                    *total.entry(pos).or_insert(0) += 1;
                }
            }
            assert_eq!(total.len(), h.nnz());
            assert!(total.values().all(|&v| v == 1));
            assert!(h.positions().all(|pos| total.contains_key(&pos)));
        }
    }

    #[test]
    fn random_spreads() {
        let h = ab_base(3, 5).unwrap().expand();
        let a = spread_random_method_i(&h, 0, 42).unwrap();
        assert_eq!(a.memory(), 0);
        assert_eq!(spread_random_method_i(&h, 2, 7).unwrap(), spread_random_method_i(&h, 2, 7).unwrap());
        assert_ne!(spread_random_method_i(&h, 2, 7).unwrap(), spread_random_method_i(&h, 2, 8).unwrap());
        let b = spread_random_method_ii(&h, 2, 3).unwrap();
        for c in 0..h.cols() {
            let mut ks: Vec<usize> = h.col(c).iter().map(|&r| b.label(r, c).unwrap().k).collect();
            ks.sort_unstable();
            assert_eq!(ks, vec![0, 1, 2]);
        }
        assert_eq!(b, spread_random_method_ii(&h, 2, 3).unwrap());
        assert!(spread_random_method_ii(&h, 1, 3).is_err());
    }

    #[test]
    fn method_i_is_roughly_uniform() {
        let h = ab_base(3, 13).unwrap().expand();
        let a = spread_random_method_i(&h, 2, 99).unwrap();
        let mut counts = [0usize; 3];
        for (_, l) in a.labels() {
            counts[l.k] += 1;
        }
        // 507 edges, expectation 169 each
        assert!(counts.iter().all(|&c| (120..220).contains(&c)), "{counts:?}");
    }

    #[test]
    fn lift_single_edge() {
        let base = BinaryMatrix::new(1, 1, [(0, 0)]).unwrap();
        let mut labels = BTreeMap::new();
        labels.insert((0, 0), LiftLabel::shift_only(1, 1));
        let asg = EdgeAssignment::new(1, labels).unwrap();
        let lifted = lift_tailbiting(&base, &asg, 3).unwrap();
        let h = lifted.expand();
        let t = Permutation::shift(3, 1);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(h.get(r, c), t.matrix_entry(r, c));
            }
        }
    }

    fn identity_spec(p: usize, l: usize) -> SCCodeSpec {
        let bm = AssignmentMatrixBm::from_rows(vec![vec![0; p]; 3]).unwrap();
        SCCodeSpec {
            base: BaseSpec::ArrayBased(ab_base(3, p).unwrap()),
            l,
            m: 0,
            j: 1,
            mode: Mode::Tailbiting,
            assignment: AssignmentSpec::Bm(bm),
            lambda: LambdaPolicy::Identity,
            seed: 0,
            reordered: true,
        }
    }

    #[test]
    fn identity_lift_is_block_diagonal() {
        let spec = identity_spec(3, 4);
        let tb = spec.build().unwrap();
        // base is 9x9; reordered copies sit on the block diagonal
        for (r, c, _) in tb.nonzero_blocks() {
            assert_eq!(r / 9, c / 9);
        }
        let h = tb.expand();
        let base = spec.base_matrix();
        for t in 0..4 {
            assert_eq!(h.submatrix(t * 9..t * 9 + 9, t * 9..t * 9 + 9), base);
        }
    }

    #[test]
    fn degrees_preserved_tailbiting() {
        for seed in 0..4 {
            let base = ab_base(3, 5).unwrap();
            let h = base.expand();
            let asg = spread_random_method_i(&h, 2, seed).unwrap();
            let lifted = lift_tailbiting(&h, &asg, 4).unwrap().expand();
            assert!(lifted.col_weights().iter().all(|&w| w == 3));
            assert!(lifted.row_weights().iter().all(|&w| w == 5));
        }
    }

    #[test]
    fn reorder_maps_are_a_permutation_and_restore() {
        let base = ab_base(3, 5).unwrap();
        let h = base.expand();
        let asg = spread_random_method_i(&h, 1, 5).unwrap();
        let lifted = lift_tailbiting(&h, &asg, 3).unwrap();
        let re = reorder(&lifted, 3, 1).unwrap();
        let (rm, cm) = reorder_maps(h.rows(), h.cols(), 3, 1);
        assert_eq!(lifted.expand().permuted(&rm, &cm).unwrap(), re.expand());
        let inv = |m: &[usize]| {
            let mut v = vec![0; m.len()];
            for (i, &x) in m.iter().enumerate() {
                v[x] = i;
            }
            v
        };
        assert_eq!(re.expand().permuted(&inv(&rm), &inv(&cm)).unwrap(), lifted.expand());
    }

    #[test]
    fn reordered_memory_one_is_banded() {
        let base = ab_base(3, 5).unwrap();
        let xi = CuttingVector::new(vec![1, 2, 4], 5, false).unwrap();
        let asg = spread_cutting_vector(&base, &xi).unwrap();
        let l = 4;
        let re = reorder(&lift_tailbiting(&base.expand(), &asg, l).unwrap(), l, 1).unwrap();
        let (rb, cb) = (15, 25);
        for (r, c, _) in re.nonzero_blocks() {
            let d = (c / cb + l - r / rb) % l;
            assert!(d <= 1);
        }
    }

    #[test]
    fn terminate_shapes() {
        let base = BinaryMatrix::new(1, 1, [(0, 0)]).unwrap();
        let mut labels = BTreeMap::new();
        labels.insert((0, 0), LiftLabel::shift_only(1, 1));
        let asg = EdgeAssignment::new(1, labels).unwrap();
        let tb = reorder(&lift_tailbiting(&base, &asg, 4).unwrap(), 4, 1).unwrap();
        let term = terminate(&tb, 4, 1).unwrap();
        assert_eq!((term.block_rows(), term.block_cols()), (5, 4));
        let h = term.expand();
        for r in 0..5 {
            for c in 0..4 {
                assert_eq!(h.get(r, c), r == c + 1, "({r},{c})");
            }
        }

        // H_0 = [1 0]^T, H_1 = [0 1]^T: block bidiagonal [H_0; H_1 H_0; ...; H_1]
        let base2 = BinaryMatrix::new(2, 1, [(0, 0), (1, 0)]).unwrap();
        let mut labels = BTreeMap::new();
        labels.insert((0, 0), LiftLabel::shift_only(0, 1));
        labels.insert((1, 0), LiftLabel::shift_only(1, 1));
        let asg2 = EdgeAssignment::new(1, labels).unwrap();
        let tb2 = reorder(&lift_tailbiting(&base2, &asg2, 4).unwrap(), 4, 1).unwrap();
        let h2 = terminate(&tb2, 4, 1).unwrap().expand();
        assert_eq!((h2.rows(), h2.cols()), (10, 4));
        for c in 0..4 {
            assert_eq!(h2.col(c), &[2 * c, 2 * (c + 1) + 1]);
        }
        assert_eq!(term.nonzero_count(), tb.nonzero_count());
        let m0 = terminate(&tb, 4, 0);
        assert!(matches!(m0, Err(Error::NotBanded(_))));

        let spec = identity_spec(3, 3);
        let tb = spec.build().unwrap();
        assert_eq!(terminate(&tb, 3, 0).unwrap(), tb);
    }

    #[test]
    fn terminated_bm_has_extra_rows() {
        let base = ab_base(3, 5).unwrap();
        let mut rows = vec![vec![0; 5]; 3];
        rows[2][1] = 2;
        rows[1][3] = 1;
        let spec = SCCodeSpec::ab(base, 4, AssignmentSpec::Bm(AssignmentMatrixBm::new(rows, 2).unwrap())).unwrap();
        let bm = spec.build().unwrap();
        assert_eq!(bm.block_rows(), 15 * 6);
        let h = bm.expand();
        assert!(h.col_weights().iter().all(|&w| w == 3));
        assert_eq!(h.nnz(), 3 * 25 * 4);
    }

    #[test]
    fn normative_path_matches_circulant_builder() {
        let base = ab_base(3, 5).unwrap();
        for (seed, m) in [(1u64, 1usize), (2, 2), (3, 2)] {
            let h = base.expand();
            let asg = spread_random_method_i(&h, m, seed).unwrap();
            // make it block constant: take the label of each block's first edge
            let grid: Vec<Vec<usize>> = (0..3)
                .map(|i| {
                    (0..5)
                        .map(|j| {
                            let c = j * 5;
                            let r = h.col(c)[i];
                            asg.label(r, c).unwrap().k
                        })
                        .collect()
                })
                .collect();
            let Ok(bm) = AssignmentMatrixBm::from_rows(grid) else { continue };
            for mode in [Mode::Terminated, Mode::Tailbiting] {
                let l = 4;
                let spec = SCCodeSpec {
                    mode,
                    ..SCCodeSpec::ab(base, l, AssignmentSpec::Bm(bm.clone())).unwrap()
                };
                let normative = spec.build().unwrap().coarsen(5).unwrap();
                assert_eq!(normative, ab_sc_block_matrix(&base, &bm, l, mode).unwrap());
            }
        }
    }

    #[test]
    fn quasi_cyclic_checks() {
        let h = ab_base(3, 5).unwrap().expand();
        assert!(is_quasi_cyclic(&h, 5).unwrap());
        assert!(is_quasi_cyclic(&h, 4).is_err());

        let base = ab_base(3, 3).unwrap();
        for j in 2..=4 {
            for ell in 0..j {
                let spec = SCCodeSpec {
                    base: BaseSpec::ArrayBased(base),
                    l: 3,
                    m: 1,
                    j,
                    mode: Mode::Terminated,
                    assignment: AssignmentSpec::CuttingVector(CuttingVector::new(vec![1, 2, 2], 3, false).unwrap()),
                    lambda: LambdaPolicy::Cyclic(ell),
                    seed: 0,
                    reordered: true,
                };
                assert!(is_quasi_cyclic(&spec.build_binary().unwrap(), j).unwrap());
                assert!(is_quasi_cyclic(&spec.lifted().unwrap().expand(), j).unwrap());
            }
        }

        // a transposition of S_3 embedded in S_4 is not circulant
        let swap = Permutation::new(vec![1, 0, 2, 3]).unwrap();
        let table = LambdaPolicy::Table(vec![vec![swap; 3]; 3]);
        let spec = SCCodeSpec {
            base: BaseSpec::ArrayBased(base),
            l: 3,
            m: 1,
            j: 4,
            mode: Mode::Terminated,
            assignment: AssignmentSpec::CuttingVector(CuttingVector::new(vec![1, 2, 2], 3, false).unwrap()),
            lambda: table,
            seed: 0,
            reordered: true,
        };
        assert!(!is_quasi_cyclic(&spec.build_binary().unwrap(), 4).unwrap());
    }

    #[test]
    fn spec_text_roundtrip() {
        let base = ab_base(3, 7).unwrap();
        let xi = CuttingVector::new(vec![2, 3, 5], 7, false).unwrap();
        let spec = SCCodeSpec::ab(base, 5, AssignmentSpec::CuttingVector(xi)).unwrap();
        let text = spec.to_text();
        assert_eq!(SCCodeSpec::parse(&text, None).unwrap(), spec);

        let bm = AssignmentMatrixBm::from_rows(vec![vec![0, 1, 2, 0, 1, 2, 0]; 3]).unwrap();
        let mut spec = SCCodeSpec::ab(base, 5, AssignmentSpec::Bm(bm)).unwrap();
        spec.j = 3;
        spec.lambda = LambdaPolicy::Table(vec![
            vec![Permutation::shift(3, 1), Permutation::new(vec![1, 0, 2]).unwrap()]
                .into_iter()
                .cycle()
                .take(7)
                .collect();
            3
        ]);
        let text = spec.to_text();
        assert!(text.contains("lambda.0=1 1/0/2 1"));
        assert_eq!(SCCodeSpec::parse(&text, None).unwrap(), spec);
    }

    #[test]
    fn spec_parse_errors_have_lines() {
        let text = "base=ab\ngamma=3\np=7\nL=x\nm=1\nassignment=random-i\n";
        assert!(matches!(SCCodeSpec::parse(text, None), Err(Error::SpecFile { line: 4, .. })));
        let text = "base=ab\ngamma=3\np=7\nL=4\nm=1\nassignment=cutting-vector\nxi=1,9,3\n";
        assert!(matches!(SCCodeSpec::parse(text, None), Err(Error::SpecFile { line: 7, .. })));
        let text = "base=ab\ngamma=3\np=8\nL=4\nm=1\nassignment=random-i\n";
        assert!(matches!(SCCodeSpec::parse(text, None), Err(Error::SpecFile { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn terminate_conserves_blocks(seed in 0u64..1000, m in 1usize..3, l in 3usize..6) {
            let base = ab_base(3, 5).unwrap();
            let h = base.expand();
            let asg = spread_random_method_i(&h, m, seed).unwrap();
            let tb = reorder(&lift_tailbiting(&h, &asg, l).unwrap(), l, 1).unwrap();
            let term = terminate(&tb, l, m).unwrap();
            prop_assert_eq!(term.nonzero_count(), tb.nonzero_count());
            let he = term.expand();
            prop_assert!(he.col_weights().iter().all(|&w| w == 3));
            prop_assert_eq!(he.rows(), (l + m) * 15);
        }
    }
}

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{witness_from_neighbors, CountReport, Discrepancy, RegionCount};
use crate::abcode::{BinaryMatrix, BlockEntry, BlockMatrix};
use crate::coupler::SCCodeSpec;
use crate::error::{Error, Result};

fn two_hop(h: &BinaryMatrix, rows: &[Vec<usize>]) -> Vec<Vec<usize>> {
    (0..h.cols())
        .into_par_iter()
        .map(|v| {
            let mut n: Vec<usize> = h.col(v).iter().flat_map(|&r| rows[r].iter().copied()).filter(|&u| u != v).collect();
            n.sort_unstable();
            n.dedup();
            n
        })
        .collect()
}

/// Every (3,3)-absorbing set of `h`, as sorted column triples in
/// lexicographic order. Works on any matrix: a 3-variable absorbing set
/// induces a connected graph, so some variable (a center) shares a check
/// with both others; each triple is generated once, from its smallest
/// center.
pub fn enumerate_33_abs_bitlevel(h: &BinaryMatrix) -> Vec<[usize; 3]> {
    let rows = h.row_adjacency();
    let n2 = two_hop(h, &rows);
    let mut found: Vec<[usize; 3]> = (0..h.cols())
        .into_par_iter()
        .flat_map_iter(|v| {
            let nv = &n2[v];
            let mut out = Vec::new();
            for (a, &u) in nv.iter().enumerate() {
                for &w in &nv[a + 1..] {
                    let closed = n2[u].binary_search(&w).is_ok();
                    if closed && (u < v || w < v) {
                        continue;
                    }
                    let nbrs = [h.col(v), h.col(u), h.col(w)];
                    let mut t = [v, u, w];
                    t.sort_unstable();
                    if let Some(wit) = witness_from_neighbors(t.to_vec(), &nbrs) {
                        if wit.b == 3 {
                            out.push(t);
                        }
                    }
                }
            }
            out
        })
        .collect();
    found.sort_unstable();
    found
}

pub fn count_33_abs_bitlevel(h: &BinaryMatrix) -> u64 {
    enumerate_33_abs_bitlevel(h).len() as u64
}

fn common(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.contains(x)).collect()
}

/// Number of 6-cycles of the Tanner graph of `h`, by direct search over
/// pairwise-adjacent column triples.
pub fn count_six_cycles_bitlevel(h: &BinaryMatrix) -> u64 {
    let rows = h.row_adjacency();
    let n2 = two_hop(h, &rows);
    (0..h.cols())
        .into_par_iter()
        .map(|v| {
            let mut total = 0u64;
            for &u in n2[v].iter().filter(|&&u| u > v) {
                for &w in n2[u].iter().filter(|&&w| w > u) {
                    if n2[v].binary_search(&w).is_err() {
                        continue;
                    }
                    let (cvu, cuw, cwv) = (common(h.col(v), h.col(u)), common(h.col(u), h.col(w)), common(h.col(w), h.col(v)));
                    for &a in &cvu {
                        for &b in cuw.iter().filter(|&&b| b != a) {
                            total += cwv.iter().filter(|&&c| c != a && c != b).count() as u64;
                        }
                    }
                }
            }
            total
        })
        .sum()
}

/// One 6-cycle `c_1 - r_1 - c_2 - r_2 - c_3 - r_3 - c_1` of a circulant
/// block matrix, with `r_t = q_t·p + s_t` and `c_l = j_l·p + k_l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SixCycle {
    pub q: [usize; 3],
    pub s: [usize; 3],
    pub j: [usize; 3],
    pub k: [usize; 3],
}

impl SixCycle {
    pub fn rows(&self, p: usize) -> [usize; 3] {
        [0, 1, 2].map(|t| self.q[t] * p + self.s[t])
    }

    pub fn cols(&self, p: usize) -> [usize; 3] {
        [0, 1, 2].map(|l| self.j[l] * p + self.k[l])
    }
}

/// A block-level solution: block rows `q` and block columns `j` (with
/// `j_1 < j_2 < j_3`) whose exponents close the cycle mod `p`. Each
/// family contains exactly `p` cycles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SixCycleFamily {
    pub q: [usize; 3],
    pub j: [usize; 3],
    pub e: [[usize; 2]; 3],
}

impl SixCycleFamily {
    /// The member whose first column has in-block index `x`.
    pub fn cycle(&self, x: usize, p: usize) -> SixCycle {
        let sub = |a: usize, b: usize| (a + p - b) % p;
        let k1 = x;
        let s1 = sub(k1, self.e[0][0]);
        let k2 = (s1 + self.e[0][1]) % p;
        let s2 = sub(k2, self.e[1][0]);
        let k3 = (s2 + self.e[1][1]) % p;
        let s3 = sub(k3, self.e[2][0]);
        SixCycle { q: self.q, s: [s1, s2, s3], j: self.j, k: [k1, k2, k3] }
    }
}

/// Output of the block-level enumerator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SixCycleEnumeration {
    pub p: usize,
    pub families: Vec<SixCycleFamily>,
    /// Cycles whose variable triple failed the (3,3) check.
    pub discrepancies: Vec<Discrepancy>,
    /// Number of cycles whose variable triple was checked.
    pub validated: u64,
}

impl SixCycleEnumeration {
    pub fn count(&self) -> u64 {
        self.families.len() as u64 * self.p as u64
    }

    pub fn cycles(&self) -> impl Iterator<Item = SixCycle> + '_ {
        self.families.iter().flat_map(move |f| (0..self.p).map(move |x| f.cycle(x, self.p)))
    }
}

/// Enumerates the 6-cycles of a matrix of `p x p` circulant blocks through
/// the block-level modular condition. With `validate`, every cycle's
/// variable triple is checked to be a (3,3)-absorbing set; failures are
/// reported, not dropped.
pub fn enumerate_six_cycles_bruteforce(bm: &BlockMatrix, validate: bool) -> Result<SixCycleEnumeration> {
    let p = bm.block_size();
    let mut by_col: Vec<Vec<(usize, usize)>> = vec![Vec::new(); bm.block_cols()];
    let mut by_row: Vec<Vec<(usize, usize)>> = vec![Vec::new(); bm.block_rows()];
    for (r, c, entry) in bm.nonzero_blocks() {
        let e = match entry {
            BlockEntry::CirculantShift(e) => *e,
            BlockEntry::ExplicitPermutation(perm) => perm
                .shift_exponent()
                .ok_or_else(|| Error::Unsupported(format!("block ({r}, {c}) is not circulant")))?,
            BlockEntry::Zero => continue,
        };
        by_col[c].push((r, e));
        by_row[r].push((c, e));
    }
    let exp = |r: usize, c: usize| by_col[c].iter().find(|&&(q, _)| q == r).map(|&(_, e)| e);

    let mut families: Vec<SixCycleFamily> = (0..bm.block_cols())
        .into_par_iter()
        .flat_map_iter(|j1| {
            let mut out = Vec::new();
            for &(qa, ea1) in &by_col[j1] {
                for &(j2, ea2) in by_row[qa].iter().filter(|&&(j2, _)| j2 > j1) {
                    for &(qb, eb2) in by_col[j2].iter().filter(|&&(qb, _)| qb != qa) {
                        for &(j3, eb3) in by_row[qb].iter().filter(|&&(j3, _)| j3 > j2) {
                            for &(qc, ec3) in by_col[j3].iter().filter(|&&(qc, _)| qc != qa && qc != qb) {
                                let Some(ec1) = exp(qc, j1) else { continue };
                                let sum = (p - ea1 + ea2) + (p - eb2 + eb3) + (p - ec3 + ec1);
                                if sum % p == 0 {
                                    out.push(SixCycleFamily {
                                        q: [qa, qb, qc],
                                        j: [j1, j2, j3],
                                        e: [[ea1, ea2], [eb2, eb3], [ec3, ec1]],
                                    });
                                }
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    families.sort_unstable();

    let mut discrepancies = Vec::new();
    let mut validated = 0u64;
    if validate {
        let nbrs_of = |j: usize, k: usize| -> Vec<usize> {
            by_col[j].iter().map(|&(q, e)| q * p + (k + p - e) % p).collect()
        };
        let bad: Vec<Discrepancy> = families
            .par_iter()
            .flat_map_iter(|f| {
                (0..p).filter_map(move |x| {
                    let cyc = f.cycle(x, p);
                    let cols = cyc.cols(p);
                    let nbrs: Vec<Vec<usize>> = (0..3).map(|l| nbrs_of(cyc.j[l], cyc.k[l])).collect();
                    match witness_from_neighbors(cols.to_vec(), &nbrs) {
                        Some(w) if w.a == 3 && w.b == 3 => None,
                        other => Some(Discrepancy {
                            kind: "six-cycle-not-33-abs".into(),
                            detail: format!(
                                "cycle on columns {cols:?}, rows {:?}: {}",
                                cyc.rows(p),
                                match other {
                                    Some(w) => format!("({}, {})-absorbing set", w.a, w.b),
                                    None => "not absorbing".into(),
                                }
                            ),
                        }),
                    }
                })
            })
            .collect();
        validated = families.len() as u64 * p as u64;
        discrepancies = bad;
    }
    Ok(SixCycleEnumeration { p, families, discrepancies, validated })
}

/// Bit-level count on the built matrix of `spec`. When the spec is an
/// array-based `J = 1` construction, counts are also broken down by the
/// number of positions the variables span.
pub fn count_abs_brute(spec: &SCCodeSpec) -> Result<CountReport> {
    let start = Instant::now();
    let h = spec.build_binary()?;
    let sets = enumerate_33_abs_bitlevel(&h);
    let base = spec.base_matrix();
    let per_pos = base.cols() * spec.j;
    let mut by_spread = vec![0u64; spec.m + 1];
    let mut notes = Vec::new();
    if spec.reordered && spec.mode == crate::coupler::Mode::Terminated {
        for t in &sets {
            let pos = t.map(|c| c / per_pos);
            let s = pos.iter().max().unwrap() - pos.iter().min().unwrap();
            if s >= by_spread.len() {
                by_spread.resize(s + 1, 0);
            }
            by_spread[s] += 1;
        }
    } else {
        by_spread.clear();
        notes.push("positional breakdown only for reordered terminated matrices".into());
    }
    // a span-s set has L - s anchor positions
    let mu: Vec<u64> = by_spread
        .iter()
        .enumerate()
        .map(|(s, &c)| if s < spec.l { c / (spec.l - s) as u64 } else { 0 })
        .collect();
    let per_region = by_spread
        .iter()
        .enumerate()
        .map(|(s, &count)| RegionCount { region: format!("spread {s}"), count })
        .collect();
    Ok(CountReport {
        method: "brute".into(),
        p: spec.base.array_based().map(|ab| ab.p()),
        gamma: h.col_weights().into_iter().max().unwrap_or(0),
        l: spec.l,
        m: spec.m,
        mode: spec.mode,
        total: sets.len() as u64,
        mu,
        per_region,
        discrepancies: Vec::new(),
        notes,
        elapsed_us: start.elapsed().as_micros() as u64,
    })
}

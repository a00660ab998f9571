//! Counting for array-based SC codes with a block-constant assignment.
//!
//! Variable `(t, j, x)` (position, base block column, index in block) meets
//! its type-`i` check at position `t + B_i(j)`. A (3,3)-absorbing set is a
//! 6-cycle through one check of each type; anchored at its type-0 check
//! position `T_0`, it is described by the check pattern
//! `(d_1, d_2) = (T_1 - T_0, T_2 - T_0)` and the variable positions
//! relative to `T_0`. Sets with the same description repeat at every
//! anchor, so the terminated count is `sum_s (L - s) * mu[s]`, where `s` is
//! the number of positions the variables span minus one.
//!
//! Two exact evaluators are provided:
//! * [`cycle_classes`] walks every pair `j_1 < j_2` of identity-row block
//!   columns and both ways of closing the cycle; it runs in `O(p^2)` and
//!   backs the optimizer.
//! * [`strip_regions`] splits every pattern into runs of eligible block
//!   columns and sums [`count_line`] over run triples.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::brute::count_abs_brute;
use super::line::{count_line, Case, RegionSpec};
use super::{terminated_total, CountReport, Discrepancy, RegionCount};
use crate::abcode::AbBase;
use crate::coupler::{AssignmentMatrixBm, CuttingVector, Mode, SCCodeSpec};
use crate::error::{Error, Result};

/// Which check `c_1` shares with `c_3`: family `A` uses the exponent-`j`
/// row (cases 1 and 2), family `B` the exponent-`2j` row (cases 3 and 4).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub const BOTH: [Family; 2] = [Family::A, Family::B];

    pub fn cases(self) -> [Case; 2] {
        match self {
            Family::A => [Case::One, Case::Two],
            Family::B => [Case::Three, Case::Four],
        }
    }

    /// Block column of `c_3`.
    pub fn third(self, j1: usize, j2: usize, p: usize) -> usize {
        match self {
            Family::A => (2 * j2 + p - j1) % p,
            Family::B => (2 * j1 + p - j2) % p,
        }
    }

    /// Check types `c_1` and `c_2` use besides the identity row.
    fn partner_types(self) -> (usize, usize) {
        match self {
            Family::A => (1, 2),
            Family::B => (2, 1),
        }
    }
}

pub(crate) type Col = [usize; 3];

fn columns(bm: &AssignmentMatrixBm) -> Result<Vec<Col>> {
    if bm.gamma() != 3 {
        return Err(Error::Unsupported(format!("line counting needs gamma = 3, got {}", bm.gamma())));
    }
    Ok((0..bm.width()).map(|j| [bm.get(0, j), bm.get(1, j), bm.get(2, j)]).collect())
}

/// `p` absorbing sets per anchor: block columns `j = (j_1, j_2, j_3)`, check
/// positions `checks` and variable positions `offsets`, both relative to
/// the type-0 check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleClass {
    pub family: Family,
    pub j: [usize; 3],
    pub checks: [i64; 3],
    pub offsets: [i64; 3],
}

impl CycleClass {
    pub fn spread(&self) -> usize {
        (self.offsets.iter().max().unwrap() - self.offsets.iter().min().unwrap()) as usize
    }
}

/// Net position offset around the cycle of `(j1, j2, family)`; the cycle
/// closes in the terminated code iff it is zero, and in the tailbiting code
/// iff it is a multiple of `L`.
fn voltage(cols: &[Col], j1: usize, j2: usize, family: Family) -> i64 {
    let j3 = family.third(j1, j2, cols.len());
    let (x, y) = family.partner_types();
    let b = |j: usize, i: usize| cols[j][i] as i64;
    (b(j1, x) - b(j1, 0)) + (b(j3, y) - b(j3, x)) + (b(j2, 0) - b(j2, y))
}

fn class_for(cols: &[Col], j1: usize, j2: usize, family: Family) -> Option<CycleClass> {
    let p = cols.len();
    let j3 = family.third(j1, j2, p);
    let (x, y) = family.partner_types();
    let b = |j: usize, i: usize| cols[j][i] as i64;
    let t1 = -b(j1, 0);
    let t2 = -b(j2, 0);
    let tx = t1 + b(j1, x);
    let ty = t2 + b(j2, y);
    let t3 = tx - b(j3, x);
    if t3 + b(j3, y) != ty {
        return None;
    }
    let mut checks = [0i64; 3];
    checks[x] = tx;
    checks[y] = ty;
    Some(CycleClass { family, j: [j1, j2, j3], checks, offsets: [t1, t2, t3] })
}

/// All cycle classes of a `3 x p` assignment.
pub fn cycle_classes(bm: &AssignmentMatrixBm) -> Result<Vec<CycleClass>> {
    let cols = columns(bm)?;
    let p = cols.len();
    let mut out = Vec::new();
    for j1 in 0..p {
        for j2 in j1 + 1..p {
            for fam in Family::BOTH {
                out.extend(class_for(&cols, j1, j2, fam));
            }
        }
    }
    Ok(out)
}

fn mu_of_classes(classes: &[CycleClass], p: usize, m: usize) -> Vec<u64> {
    let mut mu = vec![0u64; m + 1];
    for c in classes {
        let s = c.spread();
        if s >= mu.len() {
            mu.resize(s + 1, 0);
        }
        mu[s] += p as u64;
    }
    mu
}

/// Incremental evaluator over partially assigned columns. The profile only
/// contains classes whose three block columns are all assigned, so it only
/// grows as columns are filled in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialCounter {
    p: usize,
    inv2: usize,
    cols: Vec<Option<Col>>,
    mu: Vec<u64>,
}

impl PartialCounter {
    pub fn new(p: usize, m: usize) -> Self {
        PartialCounter { p, inv2: p.div_ceil(2), cols: vec![None; p], mu: vec![0; 2 * m + 1] }
    }

    pub fn is_assigned(&self, j: usize) -> bool {
        self.cols[j].is_some()
    }

    pub fn column(&self, j: usize) -> Option<Col> {
        self.cols[j]
    }

    pub fn mu(&self) -> &[u64] {
        &self.mu
    }

    pub fn total(&self, l: usize) -> u64 {
        terminated_total(&self.mu, l)
    }

    pub(crate) fn for_new_classes(&self, j: usize, col: Col, mut f: impl FnMut(&CycleClass)) {
        let p = self.p;
        let mut cols: Vec<Col> = self.cols.iter().map(|c| c.unwrap_or([0; 3])).collect();
        cols[j] = col;
        let known = |k: usize| k == j || self.cols[k].is_some();
        for other in (0..p).filter(|&k| k != j && self.cols[k].is_some()) {
            let (j1, j2) = (j.min(other), j.max(other));
            for fam in Family::BOTH {
                if known(fam.third(j1, j2, p)) {
                    if let Some(c) = class_for(&cols, j1, j2, fam) {
                        f(&c);
                    }
                }
            }
        }
        // j as the third column
        for j1 in (0..p).filter(|&k| k != j && self.cols[k].is_some()) {
            let a2 = (j + j1) * self.inv2 % p;
            let b2 = (2 * j1 + p - j) % p;
            for (fam, j2) in [(Family::A, a2), (Family::B, b2)] {
                if j2 > j1 && j2 != j && self.cols[j2].is_some() {
                    if let Some(c) = class_for(&cols, j1, j2, fam) {
                        f(&c);
                    }
                }
            }
        }
    }

    /// Profile increment from assigning `col` to column `j`.
    pub fn delta(&self, j: usize, col: Col) -> Vec<u64> {
        let mut d = vec![0u64; self.mu.len()];
        self.for_new_classes(j, col, |c| d[c.spread()] += self.p as u64);
        d
    }

    pub fn assign(&mut self, j: usize, col: Col) {
        assert!(self.cols[j].is_none(), "column {j} already assigned");
        let d = self.delta(j, col);
        for (a, b) in self.mu.iter_mut().zip(d) {
            *a += b;
        }
        self.cols[j] = Some(col);
    }
}

/// A run triple of one strip pattern, with its line count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StripRegion {
    pub pattern: (i64, i64),
    pub family: Family,
    pub offsets: [i64; 3],
    pub spec: RegionSpec,
    pub count: u64,
}

/// Role eligibility for pattern `(d1, d2)`: `Some(offset)` when block
/// column `j` can play the role.
fn role_offsets(cols: &[Col], d: (i64, i64), family: Family) -> [Vec<Option<i64>>; 3] {
    let (x, y) = family.partner_types();
    let dd = |i: usize| if i == 1 { d.0 } else { d.1 };
    let b = |j: usize, i: usize| cols[j][i] as i64;
    let c1 = (0..cols.len()).map(|j| (b(j, x) - b(j, 0) == dd(x)).then(|| -b(j, 0))).collect();
    let c2 = (0..cols.len()).map(|j| (b(j, y) - b(j, 0) == dd(y)).then(|| -b(j, 0))).collect();
    let c3 = (0..cols.len()).map(|j| (b(j, 2) - b(j, 1) == d.1 - d.0).then(|| d.0 - b(j, 1))).collect();
    [c1, c2, c3]
}

/// Maximal runs `[start, end)` with equal eligibility key.
fn runs<K: PartialEq + Copy>(keys: &[Option<K>]) -> Vec<(usize, usize, K)> {
    let mut out = Vec::new();
    let mut j = 0;
    while j < keys.len() {
        let Some(k) = keys[j] else {
            j += 1;
            continue;
        };
        let start = j;
        while j < keys.len() && keys[j] == Some(k) {
            j += 1;
        }
        out.push((start, j, k));
    }
    out
}

/// Region parameters for a run triple; `None` when clipping leaves nothing.
fn clipped(case: Case, r1: (usize, usize), r2: (usize, usize), r3: (usize, usize), p: usize) -> Option<RegionSpec> {
    let (w1, w4) = (r1.0, r2.1);
    let w2 = r1.1.min(w4.saturating_sub(1));
    let w3 = r2.0.max(w1 + 1);
    if w2 <= w1 || w3 >= w4 {
        return None;
    }
    RegionSpec::new(case, r3.0, r3.1, w1, w2, w3, w4, p).ok()
}

fn region_triples<K: PartialEq + Copy>(
    roles: &[Vec<Option<K>>; 3],
    family: Family,
    p: usize,
    mut f: impl FnMut(RegionSpec, [K; 3], u64),
) {
    let (a, b, c) = (runs(&roles[0]), runs(&roles[1]), runs(&roles[2]));
    for &(s1, e1, k1) in &a {
        for &(s2, e2, k2) in b.iter().filter(|r| r.1 > s1 + 1) {
            for &(s3, e3, k3) in &c {
                for case in family.cases() {
                    if let Some(spec) = clipped(case, (s1, e1), (s2, e2), (s3, e3), p) {
                        let n = count_line(&spec);
                        if n > 0 {
                            f(spec, [k1, k2, k3], n);
                        }
                    }
                }
            }
        }
    }
}

/// Piecewise line counting: every pattern `(d_1, d_2) ∈ [-m, m]^2`, split
/// into runs of block columns with the same eligibility and position.
pub fn strip_regions(bm: &AssignmentMatrixBm) -> Result<Vec<StripRegion>> {
    let cols = columns(bm)?;
    let p = cols.len();
    let m = bm.memory() as i64;
    let mut out = Vec::new();
    for d1 in -m..=m {
        for d2 in -m..=m {
            for family in Family::BOTH {
                let roles = role_offsets(&cols, (d1, d2), family);
                region_triples(&roles, family, p, |spec, offsets, count| {
                    out.push(StripRegion { pattern: (d1, d2), family, offsets, spec, count });
                });
            }
        }
    }
    Ok(out)
}

fn spread_of(o: &[i64; 3]) -> usize {
    (o.iter().max().unwrap() - o.iter().min().unwrap()) as usize
}

fn base_report(method: &str, p: usize, l: usize, m: usize, mode: Mode) -> CountReport {
    CountReport {
        method: method.into(),
        p: Some(p),
        gamma: 3,
        l,
        m,
        mode,
        total: 0,
        mu: Vec::new(),
        per_region: Vec::new(),
        discrepancies: Vec::new(),
        notes: Vec::new(),
        elapsed_us: 0,
    }
}

/// Per-anchor count of tailbiting cycles that only close by wrapping
/// around: nonzero voltage divisible by `L`. Voltages lie in `[-3m, 3m]`,
/// so this is zero when `L > 3m`.
fn wrap_count(bm: &AssignmentMatrixBm, l: usize) -> Result<u64> {
    let cols = columns(bm)?;
    let p = cols.len();
    let l = l as i64;
    let mut n = 0u64;
    for j1 in 0..p {
        for j2 in j1 + 1..p {
            for fam in Family::BOTH {
                let v = voltage(&cols, j1, j2, fam);
                if v != 0 && v % l == 0 {
                    n += p as u64;
                }
            }
        }
    }
    Ok(n)
}

/// Line count for an array-based `γ = 3` code with a block-constant
/// assignment. The strip total is cross-checked against the cycle-class
/// evaluator; any difference is reported as a discrepancy.
pub fn count_abs_bm(base: &AbBase, bm: &AssignmentMatrixBm, l: usize, mode: Mode) -> Result<CountReport> {
    let start = Instant::now();
    if base.gamma() != 3 || bm.gamma() != 3 || bm.width() != base.p() {
        return Err(Error::Unsupported("line counting needs gamma = 3 and a 3 x p assignment".into()));
    }
    let p = base.p();
    let m = bm.memory();
    let regions = strip_regions(bm)?;
    let mut mu = vec![0u64; m + 1];
    let mut groups: BTreeMap<(i64, i64, usize), u64> = BTreeMap::new();
    for r in &regions {
        let s = spread_of(&r.offsets);
        if s >= mu.len() {
            mu.resize(s + 1, 0);
        }
        mu[s] += r.count;
        *groups.entry((r.pattern.0, r.pattern.1, s)).or_insert(0) += r.count;
    }
    let mut report = base_report("line", p, l, m, mode);
    report.per_region = groups
        .into_iter()
        .map(|((d1, d2, s), count)| RegionCount { region: format!("pattern ({d1},{d2}) spread {s}"), count })
        .collect();
    let check = mu_of_classes(&cycle_classes(bm)?, p, m);
    if trim(&check) != trim(&mu) {
        report.discrepancies.push(Discrepancy {
            kind: "strip-vs-class".into(),
            detail: format!("strip profile {mu:?}, class profile {check:?}"),
        });
    }
    report.total = match mode {
        Mode::Terminated => terminated_total(&mu, l),
        Mode::Tailbiting => {
            let wrap = if l > 3 * m { 0 } else { wrap_count(bm, l)? };
            if wrap > 0 {
                report.per_region.push(RegionCount { region: "wrap-around".into(), count: wrap });
                report.notes.push(format!("{wrap} cycles per anchor close only around the tailbiting wrap"));
            }
            l as u64 * (mu.iter().sum::<u64>() + wrap)
        }
    };
    report.mu = mu;
    report.elapsed_us = start.elapsed().as_micros() as u64;
    Ok(report)
}

fn trim(v: &[u64]) -> &[u64] {
    let n = v.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1);
    &v[..n]
}

/// Line count of a spec.
pub fn count_abs_line(spec: &SCCodeSpec) -> Result<CountReport> {
    let (ab, bm) = spec
        .block_offsets()
        .ok_or_else(|| Error::Unsupported("line counting needs an array-based gamma = 3, J = 1, block-constant spec".into()))?;
    if bm.memory() > spec.m {
        return Err(Error::param("assignment memory exceeds m"));
    }
    let mut r = count_abs_bm(&ab, &bm, spec.l, spec.mode)?;
    r.m = spec.m;
    Ok(r)
}

/// Line count when the structure allows it, otherwise the bit-level count
/// with a note explaining the fallback.
pub fn count_abs_general(spec: &SCCodeSpec) -> Result<CountReport> {
    match count_abs_line(spec) {
        Ok(r) => Ok(r),
        Err(Error::Unsupported(why)) => {
            let mut r = count_abs_brute(spec)?;
            r.notes.push(format!("fallback to brute: {why}"));
            Ok(r)
        }
        Err(e) => Err(e),
    }
}

/// One of the seven region shapes of a cutting-vector code, anchored at
/// the smallest variable position `t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutRegion {
    pub index: usize,
    /// Check positions of types 0, 1, 2 minus `t`.
    pub checks: [i64; 3],
    /// Allowed variable positions minus `t`.
    pub positions: Vec<i64>,
    pub specs: Vec<RegionSpec>,
    pub count: u64,
}

const CUT_REGIONS: [([i64; 3], &[i64]); 7] = [
    ([0, 0, 0], &[0]),
    ([1, 0, 0], &[0]),
    ([1, 1, 0], &[0]),
    ([1, 1, 1], &[0]),
    ([1, 1, 0], &[0, 1]),
    ([1, 1, 1], &[0, 1]),
    ([2, 1, 1], &[0, 1]),
];

/// Regions `R_1..R_7` of a `γ = 3` cutting-vector code with their line
/// counting parameters. `R_1..R_4` hold sets within one position, `R_5..R_7`
/// sets spanning two.
pub fn regions_for_cutting_vector(xi: &CuttingVector, p: usize) -> Result<Vec<CutRegion>> {
    if xi.gamma() != 3 {
        return Err(Error::Unsupported(format!("regions need gamma = 3, got {}", xi.gamma())));
    }
    let bm = xi.to_bm(p);
    let cols = columns(&bm)?;
    let mut out = Vec::new();
    for (idx, (checks, positions)) in CUT_REGIONS.iter().enumerate() {
        let d = (checks[1] - checks[0], checks[2] - checks[0]);
        let allowed: Vec<i64> = positions.iter().map(|&t| t - checks[0]).collect();
        let mut specs = Vec::new();
        let mut count = 0;
        for family in Family::BOTH {
            let roles = role_offsets(&cols, d, family);
            let masked: [Vec<Option<()>>; 3] =
                roles.map(|r| r.into_iter().map(|o| o.filter(|x| allowed.contains(x)).map(|_| ())).collect());
            region_triples(&masked, family, p, |spec, _, n| {
                specs.push(spec);
                count += n;
            });
        }
        out.push(CutRegion { index: idx + 1, checks: *checks, positions: positions.to_vec(), specs, count });
    }
    Ok(out)
}

/// `L μ_1 + (L - 1) μ_2` from the seven regions, with
/// `μ_1 = N_1 + N_2 + N_3 + N_4` and
/// `μ_2 = N_5 - N_3 + N_6 - N_4 - N_1 + N_7 - N_2`.
pub fn count_abs_cutting_vector(xi: &CuttingVector, p: usize, l: usize) -> Result<CountReport> {
    let start = Instant::now();
    let regions = regions_for_cutting_vector(xi, p)?;
    let n: Vec<i64> = regions.iter().map(|r| r.count as i64).collect();
    let mu1 = n[0] + n[1] + n[2] + n[3];
    let mu2 = n[4] - n[2] + n[5] - n[3] - n[0] + n[6] - n[1];
    let mut report = base_report("line", p, l, 1, Mode::Terminated);
    report.per_region = regions
        .iter()
        .map(|r| RegionCount { region: format!("R{}", r.index), count: r.count })
        .collect();
    let bm = xi.to_bm(p);
    let check = mu_of_classes(&cycle_classes(&bm)?, p, 1);
    if mu2 < 0 || trim(&check) != trim(&[mu1 as u64, mu2.max(0) as u64]) {
        report.discrepancies.push(Discrepancy {
            kind: "region-vs-class".into(),
            detail: format!("regions give ({mu1}, {mu2}), classes give {check:?}"),
        });
    }
    report.mu = vec![mu1 as u64, mu2.max(0) as u64];
    report.total = terminated_total(&report.mu, l);
    report.elapsed_us = start.elapsed().as_micros() as u64;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abcode::ab_base;
    use crate::abscount::brute::count_33_abs_bitlevel;
    use crate::coupler::{ab_sc_block_matrix, AssignmentSpec};

    fn brute_total(base: &AbBase, bm: &AssignmentMatrixBm, l: usize, mode: Mode) -> u64 {
        count_33_abs_bitlevel(&ab_sc_block_matrix(base, bm, l, mode).unwrap().expand())
    }

    fn lcg(seed: &mut u64) -> u64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *seed >> 33
    }

    fn random_bm(p: usize, m: usize, seed: &mut u64) -> AssignmentMatrixBm {
        loop {
            let rows: Vec<Vec<usize>> =
                (0..3).map(|_| (0..p).map(|_| (lcg(seed) % (m as u64 + 1)) as usize).collect()).collect();
            if let Ok(bm) = AssignmentMatrixBm::new(rows, m) {
                return bm;
            }
        }
    }

    #[test]
    fn uncoupled_is_p2_p_minus_1() {
        for p in [5, 7, 17] {
            let bm = AssignmentMatrixBm::from_rows(vec![vec![0; p]; 3]).unwrap();
            let r = count_abs_bm(&ab_base(3, p).unwrap(), &bm, 1, Mode::Terminated).unwrap();
            assert_eq!(r.total, (p * p * (p - 1)) as u64);
            assert!(r.discrepancies.is_empty());
        }
        let bm = AssignmentMatrixBm::from_rows(vec![vec![0; 17]; 3]).unwrap();
        assert_eq!(count_abs_bm(&ab_base(3, 17).unwrap(), &bm, 1, Mode::Terminated).unwrap().total, 4624);
    }

    #[test]
    fn random_bm_matches_brute_terminated() {
        let mut seed = 11;
        for (p, m) in [(5, 1), (7, 1), (5, 2), (7, 2)] {
            let base = ab_base(3, p).unwrap();
            for _ in 0..6 {
                let bm = random_bm(p, m, &mut seed);
                for l in [m + 1, m + 3] {
                    let r = count_abs_bm(&base, &bm, l, Mode::Terminated).unwrap();
                    assert!(r.discrepancies.is_empty(), "{:?}", r.discrepancies);
                    assert_eq!(r.total, brute_total(&base, &bm, l, Mode::Terminated), "p={p} m={m} l={l}");
                }
            }
        }
    }

    #[test]
    fn random_bm_matches_brute_tailbiting() {
        let mut seed = 5;
        for (p, m) in [(5, 1), (7, 1), (5, 2)] {
            let base = ab_base(3, p).unwrap();
            for _ in 0..4 {
                let bm = random_bm(p, m, &mut seed);
                for l in m + 1..3 * m + 3 {
                    let r = count_abs_bm(&base, &bm, l, Mode::Tailbiting).unwrap();
                    assert_eq!(r.total, brute_total(&base, &bm, l, Mode::Tailbiting), "p={p} m={m} l={l}");
                }
            }
        }
    }

    #[test]
    fn cutting_vector_regions_match_brute() {
        for p in [5usize, 7] {
            let base = ab_base(3, p).unwrap();
            for xi in CuttingVector::all(3, p).into_iter().step_by(5) {
                let r = count_abs_cutting_vector(&xi, p, 3).unwrap();
                assert!(r.discrepancies.is_empty(), "{xi:?}: {:?}", r.discrepancies);
                let brute = brute_total(&base, &xi.to_bm(p), 3, Mode::Terminated);
                assert_eq!(r.total, brute, "{xi:?}");
            }
        }
    }

    #[test]
    fn degenerate_cut_has_no_two_position_regions() {
        let xi = CuttingVector::new(vec![7, 7, 7], 7, false).unwrap();
        let regions = regions_for_cutting_vector(&xi, 7).unwrap();
        assert_eq!(regions[4].count, 0);
        assert_eq!(regions[6].count, 0);
        assert_eq!(regions[5].count, regions[0].count);
        let r = count_abs_cutting_vector(&xi, 7, 4).unwrap();
        assert_eq!(r.mu, vec![294, 0]);
    }

    #[test]
    fn partial_counter_matches_full() {
        let mut seed = 3;
        for (p, m) in [(7, 1), (11, 2), (13, 2)] {
            let bm = random_bm(p, m, &mut seed);
            let mut pc = PartialCounter::new(p, m);
            let mut order: Vec<usize> = (0..p).collect();
            order.rotate_left(3);
            let mut prev = 0;
            for &j in &order {
                pc.assign(j, [bm.get(0, j), bm.get(1, j), bm.get(2, j)]);
                let now: u64 = pc.mu().iter().sum();
                assert!(now >= prev);
                prev = now;
            }
            let full = mu_of_classes(&cycle_classes(&bm).unwrap(), p, m);
            assert_eq!(trim(pc.mu()), trim(&full));
        }
    }

    #[test]
    fn general_falls_back_for_unsupported() {
        let base = ab_base(3, 5).unwrap();
        let spec = SCCodeSpec {
            assignment: AssignmentSpec::RandomI,
            m: 1,
            ..SCCodeSpec::ab(base, 3, AssignmentSpec::Bm(AssignmentMatrixBm::from_rows(vec![vec![1; 5]; 3]).unwrap()))
                .unwrap()
        };
        let r = count_abs_general(&spec).unwrap();
        assert_eq!(r.total, count_33_abs_bitlevel(&spec.build_binary().unwrap()));
        if r.method == "brute" {
            assert!(r.notes.iter().any(|n| n.contains("fallback to brute")));
        }
    }
}

//! Sliding-window accounting of (3,3)-absorbing sets.
//!
//! A window of size `S` covers `S` consecutive position groups of variables
//! (`S p^2` variable nodes for an array-based base) and `γ(S - 2m + 1) + 1`
//! block rows starting at the first block row of row group `c_0 + m`, where
//! `c_0` is its first position. It slides by `S - 2m + 1` positions, so two
//! consecutive windows share exactly one block row. An absorbing set is seen
//! by a window when its variables and its three even-degree checks lie
//! inside it. A window with `S >= L` is the whole matrix.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abscount::{count_abs_general, cycle_classes, enumerate_33_abs_bitlevel, CycleClass};
use crate::coupler::{Mode, SCCodeSpec};
use crate::error::{Error, Result};

pub const STEP_ASSUMPTION: &str =
    "window slides by S - 2m + 1 positions so consecutive windows share one block row; S >= L is the whole matrix";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub s: usize,
    pub m: usize,
}

impl WindowSpec {
    pub fn new(s: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("windowed placement needs memory m >= 1"));
        }
        if s < 2 * m {
            return Err(Error::param(format!("window size {s} is below 2m = {}", 2 * m)));
        }
        Ok(WindowSpec { s, m })
    }

    /// Block rows per window for `gamma` block rows per position.
    pub fn block_rows(&self, gamma: usize) -> usize {
        gamma * (self.s + 1 - 2 * self.m) + 1
    }

    pub fn step(&self) -> usize {
        self.s + 1 - 2 * self.m
    }

    pub fn variable_nodes(&self, p: usize) -> usize {
        self.s * p * p
    }
}

/// Half-open block-row and position ranges of one window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPosition {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub method: String,
    pub s: usize,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub positions: Vec<WindowPosition>,
    pub per_position: Vec<u64>,
    pub total: u64,
    pub standard_total: u64,
    /// `r_2` as a reduced fraction.
    pub r2_num: u64,
    pub r2_den: u64,
    pub assumptions: Vec<String>,
    /// Wall time; not serialized so reports are reproducible byte for byte.
    #[serde(skip)]
    pub elapsed_us: u64,
}

impl WindowReport {
    pub fn r2(&self) -> f64 {
        self.r2_num as f64 / self.r2_den as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn check_spec(spec: &SCCodeSpec, w: &WindowSpec) -> Result<usize> {
    let ab = spec
        .base
        .array_based()
        .ok_or_else(|| Error::Unsupported("windowed counting needs an array-based base".into()))?;
    if spec.mode != Mode::Terminated || spec.j != 1 {
        return Err(Error::Unsupported("windowed counting needs a terminated J = 1 code".into()));
    }
    if w.m != spec.m {
        return Err(Error::param(format!("window memory {} differs from code memory {}", w.m, spec.m)));
    }
    Ok(ab.gamma())
}

/// Window placements for `spec`, in sliding order.
pub fn window_positions(spec: &SCCodeSpec, w: &WindowSpec) -> Result<Vec<WindowPosition>> {
    let gamma = check_spec(spec, w)?;
    Ok(placements(gamma, spec.l, w))
}

/// Placements in a terminated band of `l` positions with `gamma` block rows
/// per position and memory `w.m`.
pub fn placements(gamma: usize, l: usize, w: &WindowSpec) -> Vec<WindowPosition> {
    if w.s >= l {
        return vec![WindowPosition { rows: (0, gamma * (l + w.m)), cols: (0, l) }];
    }
    let mut out = Vec::new();
    let mut c0 = 0;
    while c0 + w.s <= l {
        let r0 = gamma * (c0 + w.m);
        out.push(WindowPosition { rows: (r0, r0 + w.block_rows(gamma)), cols: (c0, c0 + w.s) });
        c0 += w.step();
    }
    out
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -(-a).div_euclid(b)
}

/// Anchors `T_0` for which the class lies inside the window.
pub(crate) fn anchors_inside(c: &CycleClass, win: &WindowPosition, gamma: i64) -> u64 {
    let mut lo = i64::MIN;
    let mut hi = i64::MAX;
    for &o in &c.offsets {
        lo = lo.max(win.cols.0 as i64 - o);
        hi = hi.min(win.cols.1 as i64 - 1 - o);
    }
    for (i, &d) in c.checks.iter().enumerate() {
        let i = i as i64;
        lo = lo.max(ceil_div(win.rows.0 as i64 - i, gamma) - d);
        hi = hi.min((win.rows.1 as i64 - 1 - i).div_euclid(gamma) - d);
    }
    (hi - lo + 1).max(0) as u64
}

fn finish(
    method: &str,
    spec: &SCCodeSpec,
    w: &WindowSpec,
    positions: Vec<WindowPosition>,
    per_position: Vec<u64>,
    standard_total: u64,
    start: Instant,
) -> WindowReport {
    let total: u64 = per_position.iter().sum();
    let g = gcd(total, standard_total).max(1);
    let (r2_num, r2_den) = (total / g, standard_total / g);
    WindowReport {
        method: method.into(),
        s: w.s,
        m: w.m,
        l: spec.l,
        positions,
        per_position,
        total,
        standard_total,
        r2_num,
        r2_den,
        assumptions: vec![STEP_ASSUMPTION.into()],
        elapsed_us: start.elapsed().as_micros() as u64,
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Windowed count; block-constant `γ = 3` codes use the class evaluator,
/// anything else the brute-force restriction.
pub fn count_abs_windowed(spec: &SCCodeSpec, w: &WindowSpec) -> Result<WindowReport> {
    let start = Instant::now();
    let positions = window_positions(spec, w)?;
    let Some((ab, bm)) = spec.block_offsets() else {
        return count_abs_windowed_brute(spec, w);
    };
    let classes = cycle_classes(&bm)?;
    let p = ab.p() as u64;
    let per_position: Vec<u64> = positions
        .par_iter()
        .map(|win| classes.iter().map(|c| p * anchors_inside(c, win, 3)).sum())
        .collect();
    let standard = count_abs_general(spec)?.total;
    Ok(finish("class", spec, w, positions, per_position, standard, start))
}

/// Enumerates every absorbing set of the built matrix and keeps the ones
/// inside each window.
pub fn count_abs_windowed_brute(spec: &SCCodeSpec, w: &WindowSpec) -> Result<WindowReport> {
    let start = Instant::now();
    let positions = window_positions(spec, w)?;
    let ab = *spec.base.array_based().expect("checked by window_positions");
    let p = ab.p();
    let h = spec.build_binary()?;
    let sets = enumerate_33_abs_bitlevel(&h);
    let per_pos_cols = p * p;
    // (first, last) position of the variables and (first, last) block row of the even checks
    let spans: Vec<((usize, usize), (usize, usize))> = sets
        .iter()
        .map(|t| {
            let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
            for &c in t {
                for &r in h.col(c) {
                    *deg.entry(r).or_insert(0) += 1;
                }
            }
            let even: Vec<usize> = deg.iter().filter(|(_, &d)| d % 2 == 0).map(|(&r, _)| r / p).collect();
            let pos = t.map(|c| c / per_pos_cols);
            (
                (*pos.iter().min().unwrap(), *pos.iter().max().unwrap()),
                (*even.iter().min().unwrap(), *even.iter().max().unwrap()),
            )
        })
        .collect();
    let per_position: Vec<u64> = positions
        .par_iter()
        .map(|win| {
            spans
                .iter()
                .filter(|(c, r)| c.0 >= win.cols.0 && c.1 < win.cols.1 && r.0 >= win.rows.0 && r.1 < win.rows.1)
                .count() as u64
        })
        .collect();
    Ok(finish("brute", spec, w, positions, per_position, sets.len() as u64, start))
}

/// CSV rows `L,S,positions,per_position,total,standard,r2_num,r2_den` over a
/// sweep of coupling lengths; `per_position` is the first window's count.
pub fn r2_csv(make_spec: impl Fn(usize) -> Result<SCCodeSpec>, ls: &[usize], sizes: &[usize]) -> Result<String> {
    let mut out = String::from("L,S,positions,per_position,total,standard,r2_num,r2_den\n");
    for &l in ls {
        let spec = make_spec(l)?;
        for &s in sizes {
            let w = WindowSpec::new(s, spec.m)?;
            let r = count_abs_windowed(&spec, &w)?;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                l,
                s,
                r.positions.len(),
                r.per_position.first().copied().unwrap_or(0),
                r.total,
                r.standard_total,
                r.r2_num,
                r.r2_den
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abcode::AbBase;
    use crate::coupler::{AssignmentMatrixBm, AssignmentSpec, CuttingVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn xi_spec(xi: &[usize], p: usize, l: usize) -> SCCodeSpec {
        let cv = CuttingVector::new(xi.to_vec(), p, false).unwrap();
        SCCodeSpec::ab(AbBase::new(3, p).unwrap(), l, AssignmentSpec::CuttingVector(cv)).unwrap()
    }

    fn random_bm(p: usize, m: usize, rng: &mut ChaCha8Rng) -> AssignmentMatrixBm {
        loop {
            let rows: Vec<Vec<usize>> = (0..3).map(|_| (0..p).map(|_| rng.random_range(0..=m)).collect()).collect();
            if let Ok(bm) = AssignmentMatrixBm::from_rows(rows) {
                if bm.memory() == m {
                    return bm;
                }
            }
        }
    }

    #[test]
    fn block_row_counts() {
        assert_eq!(WindowSpec::new(2, 1).unwrap().block_rows(3), 4);
        assert_eq!(WindowSpec::new(4, 2).unwrap().block_rows(3), 4);
        assert!(WindowSpec::new(3, 2).is_err());
        assert!(WindowSpec::new(2, 0).is_err());
    }

    #[test]
    fn consecutive_windows_share_one_block_row() {
        let spec = xi_spec(&[1, 2, 4], 5, 9);
        for s in 2..6 {
            let pos = window_positions(&spec, &WindowSpec::new(s, 1).unwrap()).unwrap();
            for w in pos.windows(2) {
                assert_eq!(w[0].rows.1 - w[1].rows.0, 1);
            }
        }
    }

    #[test]
    fn full_window_is_standard_count() {
        let spec = xi_spec(&[1, 3, 4], 7, 4);
        let r = count_abs_windowed(&spec, &WindowSpec::new(4, 1).unwrap()).unwrap();
        assert_eq!(r.positions.len(), 1);
        assert_eq!((r.r2_num, r.r2_den), (1, 1));
    }

    #[test]
    fn class_matches_brute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [5usize, 7] {
            for (m, sizes) in [(1usize, [2usize, 3]), (2, [4, 5])] {
                for _ in 0..3 {
                    let bm = random_bm(p, m, &mut rng);
                    let spec = SCCodeSpec::ab(AbBase::new(3, p).unwrap(), 8, AssignmentSpec::Bm(bm)).unwrap();
                    for s in sizes {
                        let w = WindowSpec::new(s, m).unwrap();
                        let a = count_abs_windowed(&spec, &w).unwrap();
                        let b = count_abs_windowed_brute(&spec, &w).unwrap();
                        assert_eq!(a.per_position, b.per_position);
                        assert_eq!(a.standard_total, b.standard_total);
                        assert!(a.per_position.windows(2).all(|x| x[0] == x[1]));
                    }
                }
            }
        }
    }

    #[test]
    fn larger_windows_see_more() {
        let spec = xi_spec(&[2, 3, 5], 7, 9);
        let counts: Vec<u64> = (2..7)
            .map(|s| count_abs_windowed(&spec, &WindowSpec::new(s, 1).unwrap()).unwrap().per_position[0])
            .collect();
        assert!(counts.windows(2).all(|c| c[0] <= c[1]));
    }

    #[test]
    fn csv_header_and_rows() {
        let csv = r2_csv(|l| Ok(xi_spec(&[1, 2, 4], 5, l)), &[6, 8], &[2, 3]).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.starts_with("L,S,"));
    }
}

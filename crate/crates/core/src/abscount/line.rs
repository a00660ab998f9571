//! Integer line counting.
//!
//! Within a region of three block rows (identity row, then the rows of
//! exponents `j` and `2j`), every (3,3)-absorbing set contains two columns
//! `c_1 < c_2` joined through the identity row, so `c_2 - c_1 = np`. The
//! third column lies in block column `j_3`, determined by the block
//! columns of `c_1` and `c_2`. The four cases are:
//!
//! | case | `c_1` joins `c_3` through | `j_3`                |
//! |------|---------------------------|----------------------|
//! | 1    | exponent-`j` row          | `2 j_2 - j_1`        |
//! | 2    | exponent-`j` row          | `2 j_2 - j_1 - p`    |
//! | 3    | exponent-`2j` row         | `2 j_1 - j_2 + p`    |
//! | 4    | exponent-`2j` row         | `2 j_1 - j_2`        |
//!
//! For each `n`, the box `w_1 p <= c_1 < w_2 p`, `w_3 p <= c_2 < w_4 p` and
//! the case condition `α <= j_3 < β` are half-open intervals in `c_1`, so
//! the count is an exact sum of interval lengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Case {
    One,
    Two,
    Three,
    Four,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::One, Case::Two, Case::Three, Case::Four];

    pub fn index(self) -> usize {
        match self {
            Case::One => 1,
            Case::Two => 2,
            Case::Three => 3,
            Case::Four => 4,
        }
    }
}

/// Line-counting input: `c_1` in block columns `[w_1, w_2)`, `c_2` in
/// `[w_3, w_4)` and `c_3` in `[α, β)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionSpec {
    pub case: Case,
    pub alpha: usize,
    pub beta: usize,
    pub w1: usize,
    pub w2: usize,
    pub w3: usize,
    pub w4: usize,
    pub p: usize,
}

impl RegionSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(case: Case, alpha: usize, beta: usize, w1: usize, w2: usize, w3: usize, w4: usize, p: usize) -> Result<Self> {
        let ok = p >= 2
            && alpha < beta
            && beta <= p
            && w1 + 2 <= p
            && (1..p).contains(&w2)
            && w1 < w2
            && w1 < w3
            && w3 < p
            && w2 < w4
            && w3 < w4
            && w4 <= p;
        if !ok {
            return Err(Error::param(format!(
                "invalid region: alpha={alpha} beta={beta} w=({w1},{w2},{w3},{w4}) p={p}"
            )));
        }
        Ok(RegionSpec { case, alpha, beta, w1, w2, w3, w4, p })
    }
}

/// The constraint that bounds a line segment at one end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    C1Lower,
    C1Upper,
    C2Lower,
    C2Upper,
    CaseLower,
    CaseUpper,
}

/// Integer points `c_1 ∈ [lo, hi)` on the line `c_2 = c_1 + np`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSegment {
    pub n: usize,
    pub lo: i64,
    pub hi: i64,
    pub lower: Constraint,
    pub upper: Constraint,
}

impl LineSegment {
    pub fn len(&self) -> u64 {
        (self.hi - self.lo).max(0) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

/// The case condition on `c_1` for a given `n`, as a half-open interval.
pub fn case_interval(case: Case, p: usize, n: usize, alpha: usize, beta: usize) -> (i64, i64) {
    let (p, n, a, b) = (p as i64, n as i64, alpha as i64, beta as i64);
    let shift = match case {
        Case::One => -2 * n * p,
        Case::Two => p * p - 2 * n * p,
        Case::Three => n * p - p * p,
        Case::Four => n * p,
    };
    (a * p + shift, b * p + shift)
}

/// Per-`n` segments with their binding constraints; empty segments are
/// omitted. Ties go to the box constraint.
pub fn count_line_detail(r: &RegionSpec) -> Vec<LineSegment> {
    let p = r.p as i64;
    let mut out = Vec::new();
    for n in 1..r.w4 - r.w1 {
        let np = n as i64 * p;
        let (case_lo, case_hi) = case_interval(r.case, r.p, n, r.alpha, r.beta);
        let mut lo = (r.w1 as i64 * p, Constraint::C1Lower);
        for cand in [(r.w3 as i64 * p - np, Constraint::C2Lower), (case_lo, Constraint::CaseLower)] {
            if cand.0 > lo.0 {
                lo = cand;
            }
        }
        let mut hi = (r.w2 as i64 * p, Constraint::C1Upper);
        for cand in [(r.w4 as i64 * p - np, Constraint::C2Upper), (case_hi, Constraint::CaseUpper)] {
            if cand.0 < hi.0 {
                hi = cand;
            }
        }
        if hi.0 > lo.0 {
            out.push(LineSegment { n, lo: lo.0, hi: hi.0, lower: lo.1, upper: hi.1 });
        }
    }
    out
}

/// Number of integer pairs `(c_1, c_2)` of the region satisfying its case.
pub fn count_line(r: &RegionSpec) -> u64 {
    count_line_detail(r).iter().map(LineSegment::len).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn whole(p: usize, case: Case) -> RegionSpec {
        RegionSpec::new(case, 0, p, 0, p - 1, 1, p, p).unwrap()
    }

    #[test]
    fn whole_matrix_sums_to_uncoupled_count() {
        for p in [5usize, 7, 11, 13, 17] {
            let total: u64 = Case::ALL.iter().map(|&c| count_line(&whole(p, c))).sum();
            assert_eq!(total, (p * p * (p - 1)) as u64);
        }
    }

    #[test]
    fn empty_box() {
        // c_1 in block 0, c_2 in block 1 with j_3 = 2 only; case 4 needs j_3 = -1
        let r = RegionSpec::new(Case::Four, 2, 3, 0, 1, 1, 2, 5).unwrap();
        assert_eq!(count_line(&r), 0);
    }

    #[test]
    fn validation() {
        assert!(RegionSpec::new(Case::One, 3, 3, 0, 1, 1, 2, 5).is_err());
        assert!(RegionSpec::new(Case::One, 0, 5, 0, 5, 1, 5, 5).is_err());
        assert!(RegionSpec::new(Case::One, 0, 5, 2, 3, 2, 5, 5).is_err());
        assert!(RegionSpec::new(Case::One, 0, 6, 0, 1, 1, 2, 5).is_err());
    }

    #[test]
    fn segment_bounded_by_c2_lower_and_c1_upper() {
        // a single n whose segment is cut on the left by the c_2 box and on
        // the right by the c_1 box, holding five points
        let p = 5;
        let r = RegionSpec::new(Case::One, 0, 5, 0, 2, 2, 3, p).unwrap();
        let seg = count_line_detail(&r);
        let n1: Vec<_> = seg.iter().filter(|s| s.n == 1).collect();
        assert_eq!(n1.len(), 1);
        assert_eq!((n1[0].lower, n1[0].upper), (Constraint::C2Lower, Constraint::C1Upper));
        assert_eq!(n1[0].len(), 5);
    }

    fn brute(r: &RegionSpec) -> u64 {
        let p = r.p as i64;
        let mut count = 0;
        for c1 in r.w1 as i64 * p..r.w2 as i64 * p {
            for c2 in r.w3 as i64 * p..r.w4 as i64 * p {
                if c2 <= c1 || (c2 - c1) % p != 0 {
                    continue;
                }
                // printed inequalities, scaled by 2 to stay in integers
                let a = r.alpha as i64 * p;
                let b = r.beta as i64 * p;
                let ok = match r.case {
                    Case::One => a <= 2 * c2 - c1 && 2 * c2 - c1 < b,
                    Case::Two => p * p + a <= 2 * c2 - c1 && 2 * c2 - c1 < p * p + b,
                    Case::Three => p * p - b < c2 - 2 * c1 && c2 - 2 * c1 <= p * p - a,
                    Case::Four => -b < c2 - 2 * c1 && c2 - 2 * c1 <= -a,
                };
                if ok {
                    count += 1;
                }
            }
        }
        count
    }

    fn arb_region() -> impl Strategy<Value = RegionSpec> {
        (5usize..14, 0usize..4, any::<[u8; 6]>()).prop_filter_map("valid", |(p, c, raw)| {
            let v: Vec<usize> = raw.iter().map(|&x| x as usize % (p + 1)).collect();
            let (alpha, beta) = (v[0].min(v[1]), v[0].max(v[1]));
            let w1 = v[2];
            let w2 = v[3];
            let w3 = v[4];
            let w4 = v[5];
            RegionSpec::new(Case::ALL[c], alpha, beta, w1, w2, w3, w4, p).ok()
        })
    }

    proptest! {
        #[test]
        fn matches_printed_inequalities(r in arb_region()) {
            prop_assert_eq!(count_line(&r), brute(&r));
        }

        #[test]
        fn cases_are_disjoint(p in prop::sample::select(vec![5usize, 7, 11, 13])) {
            // each (c_1, n) satisfies at most one of cases 1/2 and one of 3/4
            for n in 1..p {
                let iv: Vec<_> = Case::ALL.iter().map(|&c| case_interval(c, p, n, 0, p)).collect();
                prop_assert!(iv[0].1 <= iv[1].0 || iv[1].1 <= iv[0].0);
                prop_assert!(iv[2].1 <= iv[3].0 || iv[3].1 <= iv[2].0);
            }
        }
    }
}

//! (3,3)-absorbing sets: the definition check, brute-force oracles, and
//! exact line counting for array-based SC codes.

mod brute;
mod line;
mod strips;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::abcode::BinaryMatrix;
use crate::coupler::Mode;
use crate::error::{Error, Result};

pub use brute::{
    count_33_abs_bitlevel, count_abs_brute, count_six_cycles_bitlevel, enumerate_33_abs_bitlevel,
    enumerate_six_cycles_bruteforce, SixCycle, SixCycleEnumeration, SixCycleFamily,
};
pub use line::{case_interval, count_line, count_line_detail, Case, Constraint, LineSegment, RegionSpec};
pub use strips::{
    count_abs_bm, count_abs_cutting_vector, count_abs_general, count_abs_line, cycle_classes, regions_for_cutting_vector,
    strip_regions, CutRegion, CycleClass, Family, PartialCounter, StripRegion,
};

/// An absorbing set `D` together with its odd-degree checks `O(D)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbingSetWitness {
    pub variables: Vec<usize>,
    pub odd_checks: Vec<usize>,
    pub a: usize,
    pub b: usize,
}

/// Checks the absorbing-set condition on the columns `d` of `h`: every
/// variable has strictly fewer neighbors among the odd-degree checks of the
/// induced subgraph than among the even-degree ones.
pub fn is_absorbing_set(h: &BinaryMatrix, d: &[usize]) -> Result<Option<AbsorbingSetWitness>> {
    if d.is_empty() {
        return Err(Error::param("absorbing-set candidate is empty"));
    }
    if let Some(&c) = d.iter().find(|&&c| c >= h.cols()) {
        return Err(Error::param(format!("column {c} out of range for {} columns", h.cols())));
    }
    let mut vars = d.to_vec();
    vars.sort_unstable();
    vars.dedup();
    let nbrs: Vec<&[usize]> = vars.iter().map(|&v| h.col(v)).collect();
    Ok(witness_from_neighbors(vars, &nbrs))
}

pub(crate) fn witness_from_neighbors<N: AsRef<[usize]>>(vars: Vec<usize>, nbrs: &[N]) -> Option<AbsorbingSetWitness> {
    let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
    for n in nbrs {
        for &r in n.as_ref() {
            *degree.entry(r).or_insert(0) += 1;
        }
    }
    let odd = |r: &usize| degree[r] % 2 == 1;
    for n in nbrs {
        let o = n.as_ref().iter().filter(|r| odd(r)).count();
        if o >= n.as_ref().len() - o {
            return None;
        }
    }
    let odd_checks: Vec<usize> = degree.keys().copied().filter(|r| odd(r)).collect();
    Some(AbsorbingSetWitness { a: vars.len(), b: odd_checks.len(), variables: vars, odd_checks })
}

/// A counted region or class with its contribution.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCount {
    pub region: String,
    pub count: u64,
}

/// Structured record of a disagreement or a failed structural assumption.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub kind: String,
    pub detail: String,
}

/// Result of a (3,3)-absorbing-set count.
///
/// `mu[s]` is the number of absorbing sets per anchor position whose
/// variables span `s + 1` consecutive positions; the terminated total is
/// `sum_s (L - s) * mu[s]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountReport {
    pub method: String,
    pub p: Option<usize>,
    pub gamma: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub m: usize,
    pub mode: Mode,
    pub total: u64,
    pub mu: Vec<u64>,
    pub per_region: Vec<RegionCount>,
    pub discrepancies: Vec<Discrepancy>,
    pub notes: Vec<String>,
    /// Wall time; not serialized so reports are reproducible byte for byte.
    #[serde(skip)]
    pub elapsed_us: u64,
}

impl CountReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Terminated total from a spread profile.
pub fn terminated_total(mu: &[u64], l: usize) -> u64 {
    mu.iter()
        .enumerate()
        .map(|(s, &x)| (l as u64).saturating_sub(s as u64) * x)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_variable_is_not_absorbing() {
        let h = BinaryMatrix::new(3, 1, [(0, 0), (1, 0), (2, 0)]).unwrap();
        assert_eq!(is_absorbing_set(&h, &[0]).unwrap(), None);
        assert!(is_absorbing_set(&h, &[]).is_err());
        assert!(is_absorbing_set(&h, &[1]).is_err());
    }

    #[test]
    fn three_three_configuration() {
        // 6-cycle v0-c0-v1-c1-v2-c2-v0, each variable with one private check
        let h = BinaryMatrix::new(
            6,
            3,
            [(0, 0), (2, 0), (3, 0), (0, 1), (1, 1), (4, 1), (1, 2), (2, 2), (5, 2)],
        )
        .unwrap();
        let w = is_absorbing_set(&h, &[0, 1, 2]).unwrap().unwrap();
        assert_eq!((w.a, w.b), (3, 3));
        assert_eq!(w.odd_checks, vec![3, 4, 5]);
    }

    #[test]
    fn four_two_configuration() {
        // even checks on v0v1, v1v2, v2v3, v3v0, v0v2; v1 and v3 keep one odd check each
        let h = BinaryMatrix::new(
            7,
            4,
            [
                (0, 0), (0, 1),
                (1, 1), (1, 2),
                (2, 2), (2, 3),
                (3, 3), (3, 0),
                (4, 0), (4, 2),
                (5, 1), (6, 3),
            ],
        )
        .unwrap();
        let w = is_absorbing_set(&h, &[0, 1, 2, 3]).unwrap().unwrap();
        assert_eq!((w.a, w.b), (4, 2));
        assert_eq!(w.odd_checks, vec![5, 6]);
        assert_eq!(is_absorbing_set(&h, &[0, 1]).unwrap(), None);
    }

    #[test]
    fn total_from_profile() {
        assert_eq!(terminated_total(&[748, 1292], 10), 748 * 10 + 1292 * 9);
        assert_eq!(terminated_total(&[5, 7, 11], 1), 5);
    }
}

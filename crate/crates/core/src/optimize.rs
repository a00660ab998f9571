//! Search over cutting vectors and `B_m` assignment matrices.
//!
//! Every objective is a sum of nonnegative per-class weights (see
//! [`cycle_classes`]), so the value of a partially assigned matrix only
//! counts classes whose three block columns are assigned and is a lower
//! bound on every completion. The search fills block columns in order,
//! keeping the best `beam` prefixes, then repeatedly re-optimizes windows
//! of `backtrack` consecutive columns exhaustively until nothing improves.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abcode::AbBase;
use crate::abscount::{
    count_abs_bm, count_abs_brute, count_abs_cutting_vector, cycle_classes, CountReport, CycleClass, PartialCounter,
};
use crate::coupler::{AssignmentMatrixBm, AssignmentSpec, CuttingVector, Mode, SCCodeSpec};
use crate::error::{Error, Result};
use crate::windowed::{anchors_inside, count_abs_windowed, count_abs_windowed_brute, placements, WindowPosition, WindowSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    Line,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectiveKind {
    Full,
    Windowed(WindowSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub kind: ObjectiveKind,
    pub p: usize,
    pub gamma: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub m: usize,
    pub mode: Mode,
    pub backend: Backend,
}

impl Objective {
    /// Full terminated count with the line backend.
    pub fn full(p: usize, l: usize, m: usize) -> Self {
        Objective { kind: ObjectiveKind::Full, p, gamma: 3, l, m, mode: Mode::Terminated, backend: Backend::Line }
    }

    pub fn windowed(p: usize, l: usize, w: WindowSpec) -> Self {
        Objective {
            kind: ObjectiveKind::Windowed(w),
            p,
            gamma: 3,
            l,
            m: w.m,
            mode: Mode::Terminated,
            backend: Backend::Line,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma != 3 {
            return Err(Error::Unsupported("optimization needs gamma = 3".into()));
        }
        AbBase::new(self.gamma, self.p)?;
        if self.l <= self.m {
            return Err(Error::param(format!("L = {} must exceed m = {}", self.l, self.m)));
        }
        match self.kind {
            ObjectiveKind::Windowed(w) => {
                if w.m != self.m {
                    return Err(Error::param("window memory differs from objective memory"));
                }
                if self.mode != Mode::Terminated {
                    return Err(Error::Unsupported("windowed objectives need a terminated code".into()));
                }
            }
            ObjectiveKind::Full => {
                if self.mode == Mode::Tailbiting && self.l <= 3 * self.m {
                    return Err(Error::Unsupported("tailbiting objectives need L > 3m".into()));
                }
            }
        }
        Ok(())
    }

    fn weigher(&self) -> Weigher {
        match self.kind {
            ObjectiveKind::Full => Weigher::Full { p: self.p as u64, l: self.l as u64, mode: self.mode },
            ObjectiveKind::Windowed(w) => Weigher::Windowed { p: self.p as u64, windows: placements(3, self.l, &w) },
        }
    }

    /// Value of a complete assignment with the configured backend.
    pub fn evaluate(&self, bm: &AssignmentMatrixBm) -> Result<u64> {
        self.validate()?;
        match self.backend {
            Backend::Line => Ok(self.weigher().value(&cycle_classes(bm)?)),
            Backend::Brute => {
                let spec = self.spec(bm)?;
                match self.kind {
                    ObjectiveKind::Full => Ok(count_abs_brute(&spec)?.total),
                    ObjectiveKind::Windowed(w) => Ok(count_abs_windowed_brute(&spec, &w)?.total),
                }
            }
        }
    }

    fn spec(&self, bm: &AssignmentMatrixBm) -> Result<SCCodeSpec> {
        let mut spec = SCCodeSpec::ab(AbBase::new(self.gamma, self.p)?, self.l, AssignmentSpec::Bm(bm.clone()))?;
        if self.mode == Mode::Tailbiting {
            spec.mode = Mode::Tailbiting;
        }
        Ok(spec)
    }

    fn report(&self, bm: &AssignmentMatrixBm) -> Result<CountReport> {
        count_abs_bm(&AbBase::new(self.gamma, self.p)?, bm, self.l, self.mode)
    }

    /// Class weights are invariant under `B -> m - B` for the full
    /// terminated count (the band read backwards).
    fn reversal_symmetric(&self) -> bool {
        self.kind == ObjectiveKind::Full && self.mode == Mode::Terminated
    }
}

enum Weigher {
    Full { p: u64, l: u64, mode: Mode },
    Windowed { p: u64, windows: Vec<WindowPosition> },
}

impl Weigher {
    fn weight(&self, c: &CycleClass) -> u64 {
        match self {
            Weigher::Full { p, l, mode: Mode::Terminated } => p * l.saturating_sub(c.spread() as u64),
            Weigher::Full { p, l, mode: Mode::Tailbiting } => p * l,
            Weigher::Windowed { p, windows } => windows.iter().map(|w| p * anchors_inside(c, w, 3)).sum(),
        }
    }

    fn value(&self, classes: &[CycleClass]) -> u64 {
        classes.iter().map(|c| self.weight(c)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnOrder {
    LeftToRight,
    RightToLeft,
    Custom(Vec<usize>),
}

impl ColumnOrder {
    fn resolve(&self, p: usize) -> Result<Vec<usize>> {
        let order: Vec<usize> = match self {
            ColumnOrder::LeftToRight => (0..p).collect(),
            ColumnOrder::RightToLeft => (0..p).rev().collect(),
            ColumnOrder::Custom(v) => v.clone(),
        };
        let mut seen = vec![false; p];
        for &j in &order {
            if j >= p || seen[j] {
                return Err(Error::param(format!("column order {order:?} is not a permutation of 0..{p}")));
            }
            seen[j] = true;
        }
        if order.len() != p {
            return Err(Error::param(format!("column order {order:?} is not a permutation of 0..{p}")));
        }
        Ok(order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Prefixes kept per column; `usize::MAX` keeps all of them.
    pub beam: usize,
    pub backtrack: usize,
    pub column_order: ColumnOrder,
    pub seed: u64,
    /// Maximum number of candidate evaluations.
    pub budget: u64,
    pub symmetry: bool,
    /// Beam passes with seeds `seed, seed + 1, ...`, sharing the incumbent.
    pub restarts: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam: 128,
            backtrack: 2,
            column_order: ColumnOrder::LeftToRight,
            seed: 0,
            budget: 1_000_000,
            symmetry: true,
            restarts: 16,
        }
    }
}

impl SearchConfig {
    pub fn exhaustive() -> Self {
        SearchConfig { beam: usize::MAX, backtrack: 0, restarts: 1, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beam == 0 || self.budget == 0 {
            return Err(Error::param("beam and budget must be positive"));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let beam = if self.beam == usize::MAX { "all".to_string() } else { self.beam.to_string() };
        let order = match &self.column_order {
            ColumnOrder::LeftToRight => "ltr".to_string(),
            ColumnOrder::RightToLeft => "rtl".to_string(),
            ColumnOrder::Custom(v) => v.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(","),
        };
        let _ = writeln!(s, "beam={beam}");
        let _ = writeln!(s, "backtrack={}", self.backtrack);
        let _ = writeln!(s, "column_order={order}");
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "budget={}", self.budget);
        let _ = writeln!(s, "symmetry={}", self.symmetry);
        let _ = writeln!(s, "restarts={}", self.restarts);
        s
    }

    /// Parses `key=value` lines; missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = SearchConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::SpecFile { line: n + 1, message: msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|e| err(format!("{k}: {e}")));
            match k {
                "beam" => c.beam = if v == "all" { usize::MAX } else { num(v)? as usize },
                "backtrack" => c.backtrack = num(v)? as usize,
                "seed" => c.seed = num(v)?,
                "budget" => c.budget = num(v)?,
                "restarts" => c.restarts = num(v)? as usize,
                "symmetry" => c.symmetry = v.parse().map_err(|_| err(format!("symmetry: bad bool {v:?}")))?,
                "column_order" => {
                    c.column_order = match v {
                        "ltr" => ColumnOrder::LeftToRight,
                        "rtl" => ColumnOrder::RightToLeft,
                        _ => ColumnOrder::Custom(
                            v.split(',')
                                .map(|x| x.trim().parse::<usize>().map_err(|e| err(format!("column_order: {e}"))))
                                .collect::<Result<_>>()?,
                        ),
                    }
                }
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub evaluations: u64,
    pub value: u64,
    pub phase: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub bm: AssignmentMatrixBm,
    pub value: u64,
    pub report: CountReport,
    pub trace: Vec<TraceEntry>,
    pub evaluations: u64,
    pub budget_exhausted: bool,
    pub verified_by: String,
}

impl OptimizeResult {
    pub fn trace_json(&self) -> String {
        serde_json::to_string_pretty(&self.trace).expect("trace serializes")
    }
}

/// Exhaustive search over nondecreasing cutting vectors with memory one;
/// ties go to the lexicographically smallest `ξ`.
pub fn best_cutting_vector(objective: &Objective) -> Result<(CuttingVector, CountReport)> {
    objective.validate()?;
    if objective.m != 1 {
        return Err(Error::param("cutting vectors have memory 1"));
    }
    let candidates: Vec<CuttingVector> = CuttingVector::all(objective.gamma, objective.p)
        .into_iter()
        .filter(|xi| xi.to_bm(objective.p).memory() == 1)
        .collect();
    let values: Vec<u64> = candidates
        .par_iter()
        .map(|xi| objective.evaluate(&xi.to_bm(objective.p)))
        .collect::<Result<_>>()?;
    let (best, _) = candidates
        .iter()
        .zip(&values)
        .min_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.xi().cmp(b.0.xi())))
        .ok_or_else(|| Error::param("no cutting vector with memory 1"))?;
    let report = match objective.kind {
        ObjectiveKind::Full if objective.mode == Mode::Terminated => {
            count_abs_cutting_vector(best, objective.p, objective.l)?
        }
        _ => objective.report(&best.to_bm(objective.p))?,
    };
    Ok((best.clone(), report))
}

#[derive(Clone)]
struct Prefix {
    counter: PartialCounter,
    value: u64,
    tie: u64,
}

struct Search<'a> {
    objective: &'a Objective,
    weigher: Weigher,
    config: &'a SearchConfig,
    choices: Vec<[usize; 3]>,
    tie_keys: Vec<Vec<u64>>,
    evaluations: u64,
    trace: Vec<TraceEntry>,
    best: Option<(u64, Vec<[usize; 3]>)>,
}

impl<'a> Search<'a> {
    fn new(objective: &'a Objective, config: &'a SearchConfig) -> Self {
        let m = objective.m;
        let mut choices = Vec::new();
        for a in 0..=m {
            for b in 0..=m {
                for c in 0..=m {
                    choices.push([a, b, c]);
                }
            }
        }
        let mut search = Search {
            objective,
            weigher: objective.weigher(),
            config,
            choices,
            tie_keys: Vec::new(),
            evaluations: 0,
            trace: Vec::new(),
            best: None,
        };
        search.reseed(config.seed);
        search
    }

    /// Tie-breaking keys among prefixes of equal value.
    fn reseed(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.tie_keys = (0..self.objective.p).map(|_| self.choices.iter().map(|_| rng.random()).collect()).collect();
    }

    fn exhausted(&self) -> bool {
        self.evaluations >= self.config.budget
    }

    fn offer(&mut self, value: u64, cols: Vec<[usize; 3]>, phase: &str) {
        let m = self.objective.m;
        if !cols.iter().any(|c| c.contains(&m)) {
            return;
        }
        let better = match &self.best {
            None => true,
            Some((v, b)) => value < *v || (value == *v && cols < *b),
        };
        if better {
            if self.best.as_ref().is_none_or(|(v, _)| value < *v) {
                self.trace.push(TraceEntry { evaluations: self.evaluations, value, phase: phase.into() });
            }
            self.best = Some((value, cols));
        }
    }

    fn full_value(&mut self, cols: &[[usize; 3]]) -> u64 {
        self.evaluations += 1;
        let bm = to_bm(cols);
        self.weigher.value(&cycle_classes(&bm).expect("gamma is 3"))
    }

    fn beam(&mut self, order: &[usize]) -> Option<(u64, Vec<[usize; 3]>)> {
        let p = self.objective.p;
        let m = self.objective.m;
        let mut beam = vec![Prefix { counter: PartialCounter::new(p, m), value: 0, tie: 0 }];
        for (depth, &j) in order.iter().enumerate() {
            let remaining = self.config.budget.saturating_sub(self.evaluations);
            if remaining == 0 {
                return None;
            }
            let incumbent = self.best.as_ref().map(|b| b.0);
            let weigher = &self.weigher;
            let choices = &self.choices;
            let tie_keys = &self.tie_keys[j];
            let mut cands: Vec<(u64, u64, usize, usize)> = beam
                .par_iter()
                .enumerate()
                .flat_map_iter(|(bi, pre)| {
                    choices.iter().enumerate().map(move |(ci, &col)| {
                        let mut dv = 0;
                        pre.counter.for_new_classes(j, col, |c| dv += weigher.weight(c));
                        (pre.value + dv, pre.tie.wrapping_add(tie_keys[ci]), bi, ci)
                    })
                })
                .collect();
            self.evaluations += cands.len() as u64;
            if let Some(inc) = incumbent {
                cands.retain(|c| c.0 < inc);
            }
            if self.config.symmetry && self.objective.reversal_symmetric() && depth == 0 {
                // B and m - B are interchangeable: keep one of each mirrored first column
                cands.retain(|c| {
                    let col = self.choices[c.3];
                    col <= [m - col[0], m - col[1], m - col[2]]
                });
            }
            cands.sort_unstable_by_key(|c| (c.0, c.1, c.2, c.3));
            cands.truncate(self.config.beam);
            beam = cands
                .into_iter()
                .map(|(value, tie, bi, ci)| {
                    let mut counter = beam[bi].counter.clone();
                    counter.assign(j, self.choices[ci]);
                    Prefix { counter, value, tie }
                })
                .collect();
            if beam.is_empty() {
                return None;
            }
        }
        let m = self.objective.m;
        let best = beam
            .iter()
            .map(|pre| (pre.value, (0..p).map(|j| pre.counter.column(j).expect("complete")).collect::<Vec<_>>()))
            .find(|(_, cols)| cols.iter().any(|c| c.contains(&m)));
        if let Some((v, cols)) = &best {
            self.offer(*v, cols.clone(), "beam");
        }
        best
    }

    /// Best assignment of the columns in `subset` with the others fixed.
    fn best_over_subset(&mut self, subset: &[usize], cols: &[[usize; 3]]) -> (u64, Vec<[usize; 3]>) {
        let p = self.objective.p;
        let mut base = PartialCounter::new(p, self.objective.m);
        let mut value = 0;
        for j in (0..p).filter(|j| !subset.contains(j)) {
            base.for_new_classes(j, cols[j], |c| value += self.weigher.weight(c));
            base.assign(j, cols[j]);
        }
        let mut best = (u64::MAX, cols.to_vec());
        let mut trial = cols.to_vec();
        self.fill(subset, &base, value, &mut trial, &mut best);
        best
    }

    fn fill(
        &mut self,
        subset: &[usize],
        counter: &PartialCounter,
        value: u64,
        trial: &mut Vec<[usize; 3]>,
        best: &mut (u64, Vec<[usize; 3]>),
    ) {
        let Some((&j, rest)) = subset.split_first() else {
            let m = self.objective.m;
            if value < best.0 && trial.iter().any(|c| c.contains(&m)) {
                *best = (value, trial.clone());
            }
            return;
        };
        for ci in 0..self.choices.len() {
            let col = self.choices[ci];
            let mut dv = 0;
            counter.for_new_classes(j, col, |c| dv += self.weigher.weight(c));
            self.evaluations += 1;
            if value + dv >= best.0 {
                continue;
            }
            trial[j] = col;
            if rest.is_empty() {
                self.fill(rest, counter, value + dv, trial, best);
            } else {
                let mut next = counter.clone();
                next.assign(j, col);
                self.fill(rest, &next, value + dv, trial, best);
            }
        }
    }

    /// Re-optimizes every set of `backtrack` columns exhaustively, in column
    /// order, until no set improves.
    fn backtrack(&mut self, order: &[usize], mut value: u64, mut cols: Vec<[usize; 3]>) -> (u64, Vec<[usize; 3]>) {
        let width = self.config.backtrack.min(order.len());
        if width == 0 {
            return (value, cols);
        }
        let mut idx: Vec<usize> = (0..width).collect();
        let mut since_improvement = 0usize;
        let subsets = binomial(order.len(), width);
        while since_improvement < subsets && !self.exhausted() {
            let subset: Vec<usize> = idx.iter().map(|&i| order[i]).collect();
            let (v, t) = self.best_over_subset(&subset, &cols);
            if v < value {
                value = v;
                cols = t;
                self.offer(value, cols.clone(), "backtrack");
                since_improvement = 0;
            } else {
                since_improvement += 1;
            }
            next_combination(&mut idx, order.len());
        }
        (value, cols)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order,
/// wrapping to the first one.
fn next_combination(idx: &mut [usize], n: usize) {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for t in i + 1..k {
                idx[t] = idx[t - 1] + 1;
            }
            return;
        }
    }
    for (t, x) in idx.iter_mut().enumerate() {
        *x = t;
    }
}

fn to_bm(cols: &[[usize; 3]]) -> AssignmentMatrixBm {
    let rows: Vec<Vec<usize>> = (0..3).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    AssignmentMatrixBm::from_rows(rows).expect("valid grid")
}

/// Beam search with iterative backtracking over `B_m` matrices. For `m = 1`
/// the search starts from the best cutting vector, so it never returns a
/// worse value. Returned counts are re-verified by brute force when
/// `p <= 13` and by the strip line count otherwise.
pub fn optimize_bm(objective: &Objective, config: &SearchConfig) -> Result<OptimizeResult> {
    objective.validate()?;
    config.validate()?;
    if objective.m == 0 {
        return Err(Error::param("optimize_bm needs m >= 1"));
    }
    let order = config.column_order.resolve(objective.p)?;
    let mut search = Search::new(objective, config);
    if objective.m == 1 && objective.backend == Backend::Line {
        let (xi, _) = best_cutting_vector(objective)?;
        let bm = xi.to_bm(objective.p);
        let cols: Vec<[usize; 3]> = (0..objective.p).map(|j| [bm.get(0, j), bm.get(1, j), bm.get(2, j)]).collect();
        search.evaluations += CuttingVector::all(objective.gamma, objective.p).len() as u64;
        let v = search.full_value(&cols);
        search.offer(v, cols, "cutting vector");
    }
    if let Some((v, cols)) = search.best.clone() {
        search.backtrack(&order, v, cols);
    }
    for restart in 0..config.restarts.max(1) {
        if search.exhausted() {
            break;
        }
        search.reseed(config.seed.wrapping_add(restart as u64));
        if let Some((v, cols)) = search.beam(&order) {
            search.backtrack(&order, v, cols);
        }
    }
    let budget_exhausted = search.exhausted();
    let (value, cols) = search
        .best
        .clone()
        .ok_or_else(|| Error::param("budget exhausted before any complete candidate"))?;
    let bm = to_bm(&cols);
    let report = objective.report(&bm)?;
    let verified_by = verify(objective, &bm, value)?;
    Ok(OptimizeResult {
        bm,
        value,
        report,
        trace: search.trace,
        evaluations: search.evaluations,
        budget_exhausted,
        verified_by,
    })
}

fn verify(objective: &Objective, bm: &AssignmentMatrixBm, value: u64) -> Result<String> {
    let spec = objective.spec(bm)?;
    let (method, check) = match (objective.kind, objective.p <= 13) {
        (ObjectiveKind::Full, true) => ("brute", count_abs_brute(&spec)?.total),
        (ObjectiveKind::Full, false) => ("line", objective.report(bm)?.total),
        (ObjectiveKind::Windowed(w), true) => ("brute", count_abs_windowed_brute(&spec, &w)?.total),
        (ObjectiveKind::Windowed(w), false) => ("class", count_abs_windowed(&spec, &w)?.total),
    };
    if check != value {
        return Err(Error::Unsupported(format!("{method} recount {check} differs from search value {value}")));
    }
    Ok(method.into())
}

/// Minimum over every `B_m` with memory exactly `m`; `(m+1)^{3p}` matrices.
pub fn enumerate_all_bm(objective: &Objective) -> Result<(AssignmentMatrixBm, u64)> {
    objective.validate()?;
    let (p, m) = (objective.p, objective.m);
    let k = (m + 1) as u64;
    let n = k.checked_pow(3 * p as u32).filter(|&n| n <= 1 << 24).ok_or_else(|| {
        Error::param(format!("(m+1)^(3p) is too large for full enumeration at p = {p}, m = {m}"))
    })?;
    let weigher = objective.weigher();
    let best = (0..n)
        .into_par_iter()
        .filter_map(|code| {
            let mut c = code;
            let mut rows = vec![vec![0usize; p]; 3];
            for j in 0..p {
                for row in rows.iter_mut() {
                    row[j] = (c % k) as usize;
                    c /= k;
                }
            }
            if !rows.iter().flatten().any(|&e| e == m) {
                return None;
            }
            let bm = AssignmentMatrixBm::from_rows(rows).ok()?;
            let v = weigher.value(&cycle_classes(&bm).ok()?);
            Some((v, code, bm))
        })
        .min_by_key(|(v, code, _)| (*v, *code))
        .ok_or_else(|| Error::param("no matrix with memory m"))?;
    Ok((best.2, best.0))
}

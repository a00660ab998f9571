//! Permutation algebra used by the lift constructions.
//!
//! Permutations act on `0..n`. A permutation `π` is identified with the
//! `n x n` matrix whose entry `(i, j)` is 1 exactly when `π(j) = i`. The
//! cyclic shift `τ_n` maps `j` to `(j - 1) mod n`, which is the identity
//! matrix with its columns shifted one place to the left.
//!
//! Composition follows function application: `p.compose(&q)` is `p ∘ q`,
//! so `q` acts first.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// A bijection on `{0, ..., n-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(images: Vec<usize>) -> Result<Self> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation, fixed points omitted; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles() {
            if cycle.len() > 1 {
                any = true;
                let parts: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(" "))?;
            }
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl Permutation {
    /// Builds a permutation from its image list, checking bijectivity.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::Permutation("degree must be positive".into()));
        }
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n {
                return Err(Error::Permutation(format!("image {x} out of range for degree {n}")));
            }
            if seen[x] {
                return Err(Error::Permutation(format!("image {x} repeated")));
            }
            seen[x] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "degree must be positive");
        Permutation { images: (0..n).collect() }
    }

    /// `τ_n^k`, with `k` reduced modulo `n` (negative values allowed).
    pub fn shift(n: usize, k: i64) -> Self {
        assert!(n >= 1, "degree must be positive");
        let k = k.rem_euclid(n as i64) as usize;
        Permutation { images: (0..n).map(|j| (j + n - k) % n).collect() }
    }

    /// Builds a permutation from disjoint cycles; unmentioned points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut touched = vec![false; n];
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= n || touched[x] {
                    return Err(Error::Permutation(format!("bad cycle element {x}")));
                }
                touched[x] = true;
                images[x] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch { left: self.degree(), right: other.degree() });
        }
        Ok(Permutation { images: other.images.iter().map(|&x| self.images[x]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { images: inv }
    }

    pub fn pow(&self, e: i64) -> Permutation {
        let base = if e < 0 { self.inverse() } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Permutation::identity(self.degree());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = sq.compose(&acc).expect("same degree");
            }
            sq = sq.compose(&sq).expect("same degree");
            e >>= 1;
        }
        acc
    }

    /// Disjoint cycles, each starting at its smallest element, ordered by
    /// that element. Fixed points appear as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_structure(&self) -> CycleStructure {
        let mut counts = vec![0; self.degree()];
        for c in self.cycles() {
            counts[c.len() - 1] += 1;
        }
        CycleStructure { counts }
    }

    /// Order in the symmetric group: lcm of the cycle lengths.
    pub fn order(&self) -> u64 {
        self.cycle_structure()
            .lengths()
            .fold(1, |acc, len| lcm(acc, len as u64))
    }

    /// Kronecker product: index `i*J + u` maps to `p(i)*J + q(u)` where `J`
    /// is the degree of `q`.
    pub fn kronecker(&self, q: &Permutation) -> Permutation {
        let jd = q.degree();
        let mut images = Vec::with_capacity(self.degree() * jd);
        for i in 0..self.degree() {
            let pi = self.images[i];
            for u in 0..jd {
                images.push(pi * jd + q.images[u]);
            }
        }
        Permutation { images }
    }

    /// Row `i`, column `j` entry of the permutation matrix.
    pub fn matrix_entry(&self, i: usize, j: usize) -> bool {
        self.images[j] == i
    }

    /// If this permutation is a power of `τ_n`, returns the exponent.
    pub fn shift_exponent(&self) -> Option<usize> {
        let n = self.degree();
        let k = (n - self.images[0]) % n;
        self.images
            .iter()
            .enumerate()
            .all(|(j, &x)| x == (j + n - k) % n)
            .then_some(k)
    }
}

/// `(c_1, ..., c_n)`: `c_i` is the number of `i`-cycles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CycleStructure {
    counts: Vec<usize>,
}

impl CycleStructure {
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Number of `i`-cycles, `i >= 1`.
    pub fn count(&self, i: usize) -> usize {
        if i == 0 || i > self.counts.len() {
            0
        } else {
            self.counts[i - 1]
        }
    }

    pub fn degree(&self) -> usize {
        self.counts.iter().enumerate().map(|(i, c)| (i + 1) * c).sum()
    }

    /// Cycle lengths with multiplicity, ascending.
    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(i, &c)| std::iter::repeat_n(i + 1, c))
    }
}

/// An edge label `(k, λ)` realized as `τ_L^k ⊗ λ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LiftLabel {
    pub k: usize,
    pub lambda: Permutation,
}

impl LiftLabel {
    pub fn new(k: usize, lambda: Permutation) -> Self {
        LiftLabel { k, lambda }
    }

    /// Label with an identity terminal permutation of degree `j`.
    pub fn shift_only(k: usize, j: usize) -> Self {
        LiftLabel { k, lambda: Permutation::identity(j) }
    }

    pub fn terminal_degree(&self) -> usize {
        self.lambda.degree()
    }
}

pub fn shift_perm(n: usize, k: i64) -> Permutation {
    Permutation::shift(n, k)
}

/// `{τ_L^0, ..., τ_L^m}`.
pub fn enumerate_a(l: usize, m: usize) -> Result<Vec<Permutation>> {
    if l == 0 {
        return Err(Error::param("coupling length must be positive"));
    }
    if m >= l {
        return Err(Error::param(format!("memory {m} must be below coupling length {l}")));
    }
    Ok((0..=m).map(|k| Permutation::shift(l, k as i64)).collect())
}

/// `τ_L^k ⊗ λ`.
pub fn realize_label(label: &LiftLabel, l: usize) -> Result<Permutation> {
    if l == 0 {
        return Err(Error::param("coupling length must be positive"));
    }
    if label.k >= l {
        return Err(Error::param(format!("shift exponent {} out of range for L = {l}", label.k)));
    }
    Ok(Permutation::shift(l, label.k as i64).kronecker(&label.lambda))
}

/// Every `τ_L^k ⊗ λ` with `0 <= k <= m` and `λ` ranging over `S_J`.
pub fn enumerate_b(l: usize, m: usize, j: usize) -> Result<Vec<Permutation>> {
    let shifts = enumerate_a(l, m)?;
    let lambdas = all_permutations(j);
    Ok(shifts
        .iter()
        .flat_map(|t| lambdas.iter().map(move |lam| t.kronecker(lam)))
        .collect())
}

/// All `n!` permutations of degree `n` in lexicographic order of images.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(Permutation { images: prefix.clone() });
            return;
        }
        for x in 0..n {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                rec(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Closed-form order of `τ_L^k ⊗ λ` as printed for the spread-lift subgroup:
/// `L·o(λ)·gcd(k, L, o(λ)) / (gcd(k, L)·gcd(L, o(λ)))`.
///
/// This is evaluated verbatim; it does not always agree with the true order
/// (see [`verify_order_formula`]).
pub fn order_formula(l: usize, k: usize, lambda: &Permutation) -> u64 {
    order_formula_from_order(l as u64, k as u64, lambda.order())
}

pub fn order_formula_from_order(l: u64, k: u64, o: u64) -> u64 {
    let num = l * o * gcd(gcd(k, l), o);
    num / (gcd(k, l) * gcd(l, o))
}

/// Closed-form order of `τ_L^k ⊗ τ_J^ℓ`:
/// `JL·gcd(k,J,L)·gcd(ℓ,J,L) / (gcd(ℓ,J)·gcd(k,L)·gcd(J,L)·gcd(k,ℓ,J,L))`.
pub fn cyclic_order_formula(l: usize, k: usize, j: usize, ell: usize) -> u64 {
    let (l, k, j, ell) = (l as u64, k as u64, j as u64, ell as u64);
    let gjl = gcd(j, l);
    let num = j * l * gcd(k, gjl) * gcd(ell, gjl);
    let den = gcd(ell, j) * gcd(k, l) * gjl * gcd(gcd(k, ell), gjl);
    num / den
}

/// Comparison of a closed-form order against direct computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub l: usize,
    pub k: usize,
    pub lambda_order: u64,
    pub formula: u64,
    pub direct: u64,
    pub agrees: bool,
}

/// Evaluates [`order_formula`] and the true order of `τ_L^k ⊗ λ`. A
/// disagreement is reported in the record, never as an error; the direct
/// value is authoritative.
pub fn verify_order_formula(l: usize, k: usize, lambda: &Permutation) -> Result<OrderCheck> {
    let realized = realize_label(&LiftLabel::new(k, lambda.clone()), l)?;
    let direct = realized.order();
    let formula = order_formula(l, k, lambda);
    Ok(OrderCheck {
        l,
        k,
        lambda_order: lambda.order(),
        formula,
        direct,
        agrees: formula == direct,
    })
}

/// Traversal direction of an edge relative to its lifting orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Forward,
    Reverse,
}

/// Net permutation of a path: `π_n ∘ ... ∘ π_1`, where reverse-oriented
/// edges contribute their inverse.
pub fn net_permutation(path: &[(Permutation, Orientation)]) -> Result<Permutation> {
    let Some((first, _)) = path.first() else {
        return Err(Error::param("empty path"));
    };
    let mut net = Permutation::identity(first.degree());
    for (perm, orient) in path {
        let step = match orient {
            Orientation::Forward => perm.clone(),
            Orientation::Reverse => perm.inverse(),
        };
        net = step.compose(&net)?;
    }
    Ok(net)
}

/// Lengths of the cycles a base cycle of length `k` lifts to: `c_i`
/// copies of `k·i` for the cycle structure `(c_1, ..., c_J)` of `net`.
pub fn lifted_cycle_components(k: usize, net: &Permutation) -> Vec<usize> {
    net.cycle_structure().lengths().map(|i| k * i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shift_examples() {
        assert!(shift_perm(4, 0).is_identity());
        assert_eq!(shift_perm(4, 1).images(), &[3, 0, 1, 2]);
        assert_eq!(shift_perm(6, 4).order(), 3);
        assert_eq!(shift_perm(5, -1), shift_perm(5, 4));
        assert_eq!(shift_perm(7, 3).shift_exponent(), Some(3));
    }

    #[test]
    fn shift_matrix_is_left_shifted_identity() {
        // column j of τ_n carries its 1 in row j-1
        let t = shift_perm(5, 1);
        for j in 0..5 {
            for i in 0..5 {
                assert_eq!(t.matrix_entry(i, j), i == (j + 4) % 5);
            }
        }
    }

    #[test]
    fn compose_and_cycles() {
        let t = shift_perm(4, 1);
        assert!(t.compose(&shift_perm(4, 3)).unwrap().is_identity());
        assert_eq!(shift_perm(6, 2).cycle_structure().counts(), &[0, 0, 2, 0, 0, 0]);
        let p = Permutation::from_cycles(5, &[vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(p.cycle_structure().counts(), &[1, 2, 0, 0, 0]);
        assert_eq!(p.order(), 2);
        assert!(matches!(
            t.compose(&shift_perm(3, 1)),
            Err(Error::DegreeMismatch { left: 4, right: 3 })
        ));
    }

    #[test]
    fn compose_applies_right_first() {
        let p = Permutation::new(vec![1, 2, 0]).unwrap();
        let q = Permutation::new(vec![0, 2, 1]).unwrap();
        let pq = p.compose(&q).unwrap();
        for x in 0..3 {
            assert_eq!(pq.apply(x), p.apply(q.apply(x)));
        }
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3]).is_err());
        assert!(Permutation::new(vec![]).is_err());
    }

    #[test]
    fn kronecker_examples() {
        assert!(Permutation::identity(3).kronecker(&Permutation::identity(2)).is_identity());
        assert_eq!(shift_perm(2, 1).kronecker(&Permutation::identity(2)).images(), &[2, 3, 0, 1]);
        // λ of order 6 in S_5: a 2-cycle and a 3-cycle
        let lam = Permutation::from_cycles(5, &[vec![0, 1], vec![2, 3, 4]]).unwrap();
        assert_eq!(lam.order(), 6);
        let kr = shift_perm(9, 3).kronecker(&lam);
        let mut x = kr.clone();
        let mut steps = 1;
        while !x.is_identity() {
            x = kr.compose(&x).unwrap();
            steps += 1;
        }
        assert_eq!(steps, 6);
        assert_eq!(kr.order(), 6);
    }

    #[test]
    fn kronecker_matches_matrix_product() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let q = Permutation::new(vec![1, 0]).unwrap();
        let kr = p.kronecker(&q);
        let j = q.degree();
        for r in 0..6 {
            for c in 0..6 {
                let expect = p.matrix_entry(r / j, c / j) && q.matrix_entry(r % j, c % j);
                assert_eq!(kr.matrix_entry(r, c), expect);
            }
        }
    }

    #[test]
    fn enumerate_a_examples() {
        let a63 = enumerate_a(6, 3).unwrap();
        assert_eq!(a63, (0..=3).map(|k| shift_perm(6, k)).collect::<Vec<_>>());
        let a73 = enumerate_a(7, 3).unwrap();
        assert_eq!(a73.len(), 4);
        assert_eq!(a73[3], shift_perm(7, 3));
        assert_eq!(enumerate_a(5, 0).unwrap(), vec![Permutation::identity(5)]);
        assert!(enumerate_a(4, 4).is_err());
    }

    #[test]
    fn realize_label_examples() {
        let id = realize_label(&LiftLabel::shift_only(0, 3), 5).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.degree(), 15);
        let t = realize_label(&LiftLabel::shift_only(1, 1), 3).unwrap();
        assert_eq!(t, shift_perm(3, 1));
        assert!(realize_label(&LiftLabel::shift_only(3, 1), 3).is_err());
    }

    #[test]
    fn b_set_size_and_distinct() {
        for (l, j) in [(3, 2), (4, 3), (2, 3)] {
            let b = enumerate_b(l, l - 1, j).unwrap();
            let fact: usize = (1..=j).product();
            assert_eq!(b.len(), l * fact);
            let set: std::collections::HashSet<_> = b.iter().collect();
            assert_eq!(set.len(), b.len());
        }
    }

    #[test]
    fn order_formula_examples() {
        let inv2 = Permutation::from_cycles(2, &[vec![0, 1]]).unwrap();
        let c = verify_order_formula(4, 1, &inv2).unwrap();
        assert_eq!((c.formula, c.direct, c.agrees), (4, 4, true));
        let c = verify_order_formula(6, 2, &inv2).unwrap();
        assert_eq!((c.formula, c.direct, c.agrees), (6, 6, true));
        let lam6 = Permutation::from_cycles(5, &[vec![0, 1], vec![2, 3, 4]]).unwrap();
        let c = verify_order_formula(9, 3, &lam6).unwrap();
        assert_eq!((c.formula, c.direct, c.agrees), (18, 6, false));
    }

    #[test]
    fn cyclic_order_formula_identity_cases() {
        // k = ℓ = 0 gives the identity
        assert_eq!(cyclic_order_formula(4, 0, 3, 0), 1);
        // coprime L, J: order is lcm of the two cyclic orders
        assert_eq!(cyclic_order_formula(5, 1, 3, 1), 15);
    }

    #[test]
    fn net_permutation_and_lifted_components() {
        let id4 = Permutation::identity(4);
        assert_eq!(lifted_cycle_components(6, &id4), vec![6, 6, 6, 6]);
        let p = Permutation::from_cycles(3, &[vec![1, 2]]).unwrap();
        assert_eq!(lifted_cycle_components(6, &p), vec![6, 12]);
        assert_eq!(lifted_cycle_components(6, &shift_perm(3, 1)), vec![18]);

        let a = shift_perm(3, 1);
        let net = net_permutation(&[
            (a.clone(), Orientation::Forward),
            (a.clone(), Orientation::Reverse),
        ])
        .unwrap();
        assert!(net.is_identity());
        let net = net_permutation(&[(a.clone(), Orientation::Forward), (a.clone(), Orientation::Forward)])
            .unwrap();
        assert_eq!(net, shift_perm(3, 2));
        assert!(net_permutation(&[(a, Orientation::Forward), (id4, Orientation::Forward)]).is_err());
    }

    /// Builds the lift of a `k`-cycle whose edges carry `labels` (edge `i`
    /// joins base vertex `i` to `i+1 mod k`) and returns the sorted lengths
    /// of the resulting cycles by walking the lifted graph.
    fn traced_lift_cycle_lengths(labels: &[Permutation]) -> Vec<usize> {
        let k = labels.len();
        let j = labels[0].degree();
        // adjacency of lifted vertex (v, a) as v*j + a
        let mut adj = vec![Vec::new(); k * j];
        for (i, lab) in labels.iter().enumerate() {
            let next = (i + 1) % k;
            for a in 0..j {
                let u = i * j + a;
                let w = next * j + lab.apply(a);
                adj[u].push(w);
                adj[w].push(u);
            }
        }
        let mut seen = vec![false; k * j];
        let mut lengths = Vec::new();
        for s in 0..k * j {
            if seen[s] {
                continue;
            }
            let mut stack = vec![s];
            let mut size = 0;
            seen[s] = true;
            while let Some(u) = stack.pop() {
                size += 1;
                assert_eq!(adj[u].len(), 2, "lift of a cycle is 2-regular");
                for &w in &adj[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            lengths.push(size);
        }
        lengths.sort_unstable();
        lengths
    }

    fn arb_perm(max_n: usize) -> impl Strategy<Value = Permutation> {
        (1..=max_n).prop_flat_map(|n| {
            Just((0..n).collect::<Vec<usize>>())
                .prop_shuffle()
                .prop_map(|v| Permutation::new(v).unwrap())
        })
    }

    fn arb_perm_of(n: usize) -> impl Strategy<Value = Permutation> {
        Just((0..n).collect::<Vec<usize>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::new(v).unwrap())
    }

    #[test]
    fn bijectivity_exhaustive_small() {
        for n in 1..=5 {
            let all = all_permutations(n);
            for p in &all {
                for q in all.iter().step_by(7) {
                    Permutation::new(p.compose(q).unwrap().images().to_vec()).unwrap();
                }
                Permutation::new(p.inverse().images().to_vec()).unwrap();
                Permutation::new(p.kronecker(&all[all.len() / 2]).images().to_vec()).unwrap();
            }
        }
    }

    #[test]
    fn lifted_cycles_match_tracing() {
        for k in 3..=8 {
            for j in 1..=6 {
                for seed in 0..4u64 {
                    let labels: Vec<Permutation> = (0..k)
                        .map(|i| {
                            let all_shift = shift_perm(j, (seed as i64) * 3 + i as i64);
                            if (i + seed as usize) % 2 == 0 {
                                all_shift
                            } else {
                                let mut v: Vec<usize> = (0..j).collect();
                                v.rotate_left((i * 7 + seed as usize) % j);
                                if j > 2 {
                                    v.swap(0, 2);
                                }
                                Permutation::new(v).unwrap()
                            }
                        })
                        .collect();
                    let path: Vec<_> =
                        labels.iter().map(|p| (p.clone(), Orientation::Forward)).collect();
                    let net = net_permutation(&path).unwrap();
                    let mut predicted = lifted_cycle_components(k, &net);
                    predicted.sort_unstable();
                    assert_eq!(predicted.iter().sum::<usize>(), k * j);
                    assert_eq!(predicted, traced_lift_cycle_lengths(&labels), "k={k} j={j}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn order_is_lcm_of_cycle_lengths(p in arb_perm(12)) {
            let direct = {
                let mut x = p.clone();
                let mut n = 1u64;
                while !x.is_identity() {
                    x = p.compose(&x).unwrap();
                    n += 1;
                }
                n
            };
            prop_assert_eq!(p.order(), direct);
            prop_assert_eq!(p.cycle_structure().degree(), p.degree());
        }

        #[test]
        fn compose_inverse_roundtrip(p in arb_perm(16)) {
            prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
            prop_assert!(p.inverse().compose(&p).unwrap().is_identity());
        }

        #[test]
        fn kronecker_power_law(l in 1usize..=8, k in 0usize..8, lam in arb_perm(8), t in 0i64..20) {
            let k = k % l;
            let kr = shift_perm(l, k as i64).kronecker(&lam);
            let lhs = kr.pow(t);
            let rhs = shift_perm(l, k as i64 * t).kronecker(&lam.pow(t));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn lifted_lengths_sum(k in 3usize..10, p in arb_perm(9)) {
            let total: usize = lifted_cycle_components(k, &p).iter().sum();
            prop_assert_eq!(total, k * p.degree());
        }

        #[test]
        fn random_lift_cycles_match_tracing(k in 3usize..=8, j in 1usize..=6, seed in any::<u64>()) {
            let strat_labels: Vec<Permutation> = (0..k)
                .map(|i| {
                    let mut v: Vec<usize> = (0..j).collect();
                    let mut s = seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)) | 1;
                    for a in (1..j).rev() {
                        s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                        v.swap(a, (s % (a as u64 + 1)) as usize);
                    }
                    Permutation::new(v).unwrap()
                })
                .collect();
            let path: Vec<_> = strat_labels.iter().map(|p| (p.clone(), Orientation::Forward)).collect();
            let mut predicted = lifted_cycle_components(k, &net_permutation(&path).unwrap());
            predicted.sort_unstable();
            prop_assert_eq!(predicted, traced_lift_cycle_lengths(&strat_labels));
        }

        #[test]
        fn kronecker_preserves_bijectivity(p in arb_perm(8), q in arb_perm_of(3)) {
            let kr = p.kronecker(&q);
            prop_assert!(Permutation::new(kr.images().to_vec()).is_ok());
        }
    }
}

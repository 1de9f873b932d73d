//! Cell indices: permutations, the semi-canonical reduction, and the torus
//! symmetry action on cells.
//!
//! A cell is indexed by σ with `y_{σ(0)} ≤ y_{σ(1)} ≤ … ≤ y_{σ(N−1)}` when
//! the points are labelled in x-order, so `σ(j)` is the x-rank of the point
//! with y-rank `j`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest N accepted by [`orbit_oracle_count`].
pub const ORBIT_ORACLE_LIMIT: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidPermutation(format!("{map:?}")));
            }
        }
        Ok(Permutation(map))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    /// `rank[i]` is the position of `i` in the sequence.
    pub fn ranks(&self) -> Vec<usize> {
        self.inverse().0
    }

    pub fn starts_with(&self, prefix: &[usize]) -> bool {
        self.0.starts_with(prefix)
    }
}

impl std::ops::Index<usize> for Permutation {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let map = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("bad entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(map)
    }
}

/// Symmetrized index distance `min(|i − j|, n − |i − j|)`.
pub fn cyclic_distance(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= n || j >= n {
        return Err(Error::OutOfRange(format!("({i}, {j}) with n = {n}")));
    }
    Ok(dist(i, j, n))
}

#[inline]
fn dist(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

fn lex_le_inverse(s: &[usize]) -> bool {
    let mut inv = vec![0; s.len()];
    for (i, &v) in s.iter().enumerate() {
        inv[v] = i;
    }
    s <= inv.as_slice()
}

/// Conditions (i)–(iii) of the semi-canonical form: σ(0) = 0, the first
/// step is a shortest cyclic step with σ(1) ≤ N/2, and the second step is
/// no longer than the closing one.
fn satisfies_shape(s: &[usize]) -> bool {
    let n = s.len();
    if n < 2 || s[0] != 0 {
        return false;
    }
    let first = s[1];
    if 2 * first > n {
        return false;
    }
    let min_step = (0..n).map(|i| dist(s[i], s[(i + 1) % n], n)).min().unwrap_or(0);
    if dist(0, first, n) != min_step {
        return false;
    }
    let second = if n >= 3 { s[2] } else { s[0] };
    dist(s[1], second, n) <= dist(0, s[n - 1], n)
}

/// Semi-canonical test, with the lexicographic comparison against the
/// inverse taken non-strictly.
pub fn is_semi_canonical(s: &Permutation) -> bool {
    satisfies_shape(&s.0) && lex_le_inverse(&s.0)
}

/// Which cells a sweep has to visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coverage {
    /// Exactly the semi-canonical permutations.
    SemiCanonical,
    /// Semi-canonical permutations plus one representative of every torus
    /// orbit that contains none, so every cell is reached up to symmetry.
    #[default]
    Complete,
}

/// Lexicographic depth-first stream of cells, optionally restricted to a
/// prefix.
///
/// Prefixes are pruned on σ(0) = 0, σ(1) ≤ N/2 and the running minimum of
/// the cyclic steps; the remaining conditions are checked at the leaves.
pub struct CellIter {
    n: usize,
    coverage: Coverage,
    perm: Vec<usize>,
    used: Vec<bool>,
    cursor: Vec<usize>,
    base: usize,
    pos: usize,
    done: bool,
}

impl CellIter {
    pub fn new(n: usize, coverage: Coverage) -> Self {
        Self::with_prefix(n, coverage, &[0])
    }

    /// Cells whose sequence starts with `prefix`. Empty when the prefix is
    /// itself inadmissible.
    pub fn with_prefix(n: usize, coverage: Coverage, prefix: &[usize]) -> Self {
        let mut it = CellIter {
            n,
            coverage,
            perm: vec![0; n.max(1)],
            used: vec![false; n.max(1)],
            cursor: vec![1; n.max(1)],
            base: prefix.len().max(1),
            pos: prefix.len().max(1),
            done: n < 2,
        };
        if it.done {
            return it;
        }
        let prefix = if prefix.is_empty() { &[0][..] } else { prefix };
        if prefix.len() > n || prefix[0] != 0 {
            it.done = true;
            return it;
        }
        it.used[0] = true;
        for (pos, &v) in prefix.iter().enumerate().skip(1) {
            if v >= n || it.used[v] || !it.admissible(pos, v) {
                it.done = true;
                return it;
            }
            it.perm[pos] = v;
            it.used[v] = true;
        }
        if prefix.len() == n {
            // Fully specified: fall back to a direct leaf test on next().
            it.pos = n;
        }
        it
    }

    fn admissible(&self, pos: usize, v: usize) -> bool {
        let n = self.n;
        let first = if pos == 1 { v } else { self.perm[1] };
        if pos == 1 && 2 * v > n {
            return false;
        }
        if pos >= 2 && dist(self.perm[pos - 1], v, n) < first {
            return false;
        }
        if pos == n - 1 {
            if dist(v, 0, n) < first {
                return false;
            }
            if n >= 3 {
                let second = if pos == 2 { v } else { self.perm[2] };
                if dist(first, second, n) > dist(0, v, n) {
                    return false;
                }
            }
        }
        true
    }

    fn accept_leaf(&self) -> bool {
        if lex_le_inverse(&self.perm) {
            return true;
        }
        self.coverage == Coverage::Complete && is_uncovered_representative(&self.perm)
    }
}

impl Iterator for CellIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let n = self.n;
        if self.pos == n && !self.done {
            self.done = true;
            return self.accept_leaf().then(|| Permutation(self.perm.clone()));
        }
        loop {
            if self.done {
                return None;
            }
            let pos = self.pos;
            let mut descended = false;
            while self.cursor[pos] < n {
                let v = self.cursor[pos];
                self.cursor[pos] += 1;
                if self.used[v] || !self.admissible(pos, v) {
                    continue;
                }
                self.perm[pos] = v;
                if pos == n - 1 {
                    if self.accept_leaf() {
                        return Some(Permutation(self.perm.clone()));
                    }
                    continue;
                }
                self.used[v] = true;
                self.pos = pos + 1;
                self.cursor[pos + 1] = 1;
                descended = true;
                break;
            }
            if descended {
                continue;
            }
            if pos == self.base {
                self.done = true;
                return None;
            }
            self.pos = pos - 1;
            self.used[self.perm[pos - 1]] = false;
        }
    }
}

/// Every semi-canonical permutation of size `n`, in lexicographic order.
pub fn enumerate_semi_canonical(n: usize) -> CellIter {
    CellIter::new(n, Coverage::SemiCanonical)
}

pub fn count_semi_canonical(n: usize) -> u64 {
    enumerate_semi_canonical(n).count() as u64
}

/// Admissible prefixes of length `depth` (including the leading 0), in
/// lexicographic order. Their subtrees partition the cell set.
pub fn shard_prefixes(n: usize, depth: usize) -> Vec<Vec<usize>> {
    let depth = depth.clamp(1, n.saturating_sub(1).max(1));
    let mut out = vec![vec![0usize]];
    for _ in 1..depth {
        let mut next = Vec::new();
        for p in &out {
            for v in 1..n {
                if p.contains(&v) {
                    continue;
                }
                let mut q = p.clone();
                q.push(v);
                if !CellIter::with_prefix(n, Coverage::Complete, &q).done {
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

/// A dihedral map `r ↦ k + sign·r (mod n)` on ranks.
#[derive(Clone, Copy)]
struct Dihedral {
    flip: bool,
    shift: usize,
}

impl Dihedral {
    fn apply(self, r: usize, n: usize) -> usize {
        if self.flip {
            (self.shift + n - r) % n
        } else {
            (self.shift + r) % n
        }
    }

    /// The map with the given reflection part sending `from` to 0.
    fn to_zero(flip: bool, from: usize, n: usize) -> Self {
        let shift = if flip { from % n } else { (n - from % n) % n };
        Dihedral { flip, shift }
    }
}

/// Torus-symmetry orbit of a cell: images under rank shifts and
/// reflections in both coordinates and the coordinate swap, renormalized so
/// that the pinned point keeps rank 0 in both coordinates. Sorted, without
/// duplicates.
pub fn orbit(sigma: &Permutation) -> Vec<Permutation> {
    orbit_raw(&sigma.0).into_iter().map(Permutation).collect()
}

fn orbit_raw(sigma: &[usize]) -> Vec<Vec<usize>> {
    let n = sigma.len();
    // y-rank of the point with x-rank i
    let mut x_to_y = vec![0; n];
    for (j, &i) in sigma.iter().enumerate() {
        x_to_y[i] = j;
    }
    let bases = [x_to_y, sigma.to_vec()];
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(8 * n);
    let mut image = vec![0; n];
    for base in &bases {
        for x_flip in [false, true] {
            for anchor in 0..n {
                let a = Dihedral::to_zero(x_flip, anchor, n);
                for y_flip in [false, true] {
                    let b = Dihedral::to_zero(y_flip, base[anchor], n);
                    // image: y-rank -> x-rank, i.e. the new σ
                    for x in 0..n {
                        image[b.apply(base[x], n)] = a.apply(x, n);
                    }
                    out.push(image.clone());
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Whether two cells are related by a torus symmetry.
pub fn same_orbit(a: &Permutation, b: &Permutation) -> bool {
    a.n() == b.n() && orbit_raw(&a.0).binary_search(&b.0).is_ok()
}

/// Smallest member of the orbit; a canonical cell label.
pub fn orbit_canonical(sigma: &Permutation) -> Permutation {
    Permutation(orbit_raw(&sigma.0).swap_remove(0))
}

fn is_uncovered_representative(sigma: &[usize]) -> bool {
    let members = orbit_raw(sigma);
    if members.iter().any(|m| satisfies_shape(m) && lex_le_inverse(m)) {
        return false;
    }
    members.iter().find(|m| satisfies_shape(m)).map(|m| m.as_slice()) == Some(sigma)
}

/// Representatives of the torus orbits that contain no semi-canonical
/// permutation, one per orbit, in lexicographic order.
pub fn uncovered_orbit_representatives(n: usize) -> Vec<Permutation> {
    CellIter::new(n, Coverage::Complete)
        .filter(|s| !is_semi_canonical(s))
        .collect()
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Every permutation with σ(0) = 0, in lexicographic order, by brute force.
pub fn all_pinned_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let mut cur: Option<Vec<usize>> = Some((0..n).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        cur = if next_permutation(&mut next[1..]) { Some(next) } else { None };
        Some(Permutation(out))
    })
}

/// Number of torus-symmetry orbits among cells with σ(0) = 0, by full
/// enumeration. Independent of the semi-canonical machinery.
pub fn orbit_oracle_count(n: usize) -> Result<u64> {
    Ok(orbit_oracle_representatives(n)?.len() as u64)
}

/// Smallest member of each orbit, by full enumeration.
pub fn orbit_oracle_representatives(n: usize) -> Result<Vec<Permutation>> {
    if n > ORBIT_ORACLE_LIMIT {
        return Err(Error::TooLarge { what: "the orbit oracle", n, limit: ORBIT_ORACLE_LIMIT });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut reps = Vec::new();
    for p in all_pinned_permutations(n) {
        if seen.contains(&p.0) {
            continue;
        }
        seen.extend(orbit_raw(&p.0));
        reps.push(p);
    }
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn cyclic_distance_examples() {
        assert_eq!(cyclic_distance(1, 12, 13).unwrap(), 2);
        assert_eq!(cyclic_distance(0, 5, 10).unwrap(), 5);
        assert_eq!(cyclic_distance(3, 3, 7).unwrap(), 0);
        assert!(cyclic_distance(7, 0, 7).is_err());
    }

    #[test]
    fn semi_canonical_examples() {
        assert!(is_semi_canonical(&p("(0 2 4 1 3)")));
        assert!(is_semi_canonical(&p("(0 1 2)")));
        assert!(is_semi_canonical(&p("(0 1)")));
        assert!(!is_semi_canonical(&p("(0 3 1 2)")));
        assert!(!is_semi_canonical(&p("(0)")));
        assert!(!is_semi_canonical(&p("(1 0 2)")));
    }

    #[test]
    fn permutation_parsing_and_display() {
        assert_eq!(p("0 2 4 1 3").to_string(), "(0 2 4 1 3)");
        assert_eq!(p("0,1"), p("(0 1)"));
        assert!("(0 0 1)".parse::<Permutation>().is_err());
        assert!("(0 3)".parse::<Permutation>().is_err());
        assert_eq!(p("(0 2 4 1 3)").inverse(), p("(0 3 1 4 2)"));
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_semi_canonical(1), 0);
        assert_eq!(count_semi_canonical(2), 1);
        assert_eq!(count_semi_canonical(3), 1);
        assert_eq!(count_semi_canonical(4), 2);
        assert_eq!(count_semi_canonical(5), 5);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 2..=8 {
            let fast: Vec<_> = enumerate_semi_canonical(n).collect();
            let slow: Vec<_> = all_pinned_permutations(n).filter(is_semi_canonical).collect();
            assert_eq!(fast, slow, "n = {n}");
        }
    }

    #[test]
    fn prefixes_partition_the_stream() {
        for n in 4..=9 {
            let all: Vec<_> = CellIter::new(n, Coverage::Complete).collect();
            for depth in 2..=3 {
                let sharded: Vec<_> = shard_prefixes(n, depth)
                    .iter()
                    .flat_map(|pre| CellIter::with_prefix(n, Coverage::Complete, pre))
                    .collect();
                assert_eq!(all, sharded, "n = {n}, depth = {depth}");
            }
        }
    }

    #[test]
    fn full_prefix_is_a_single_leaf() {
        let it: Vec<_> = CellIter::with_prefix(5, Coverage::SemiCanonical, &[0, 2, 4, 1, 3]).collect();
        assert_eq!(it, vec![p("(0 2 4 1 3)")]);
        let none: Vec<_> = CellIter::with_prefix(5, Coverage::SemiCanonical, &[0, 3]).collect();
        assert!(none.is_empty());
    }

    #[test]
    fn orbit_contains_self_and_is_closed() {
        let s = p("(0 2 6 3 8 5 1 7 4)");
        let o = orbit(&s);
        assert!(o.contains(&s));
        for m in &o {
            assert_eq!(m[0], 0);
            assert_eq!(orbit(m), o);
        }
    }

    #[test]
    fn table_pairs_share_an_orbit() {
        assert!(same_orbit(&p("(0 2 4 6 1 3 5)"), &p("(0 3 6 2 5 1 4)")));
        assert!(same_orbit(&p("(0 2 6 3 8 5 1 7 4)"), &p("(0 2 7 4 1 6 3 8 5)")));
        assert!(!same_orbit(&p("(0 1 3 2)"), &p("(0 1 2 3)")));
    }

    #[test]
    fn orbit_oracle_limits() {
        assert!(orbit_oracle_count(ORBIT_ORACLE_LIMIT + 1).is_err());
        assert_eq!(orbit_oracle_count(4).unwrap(), 2);
    }
}

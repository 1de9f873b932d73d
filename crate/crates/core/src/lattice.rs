//! Rank-1 integration lattices and Fibonacci lattices.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::scalar::{Rational, Scalar};
use crate::torus::{PointSet, TorusPoint};

/// Lattice size and generator, with `gcd(g, N) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    n: usize,
    g: usize,
}

impl LatticeSpec {
    pub fn new(n: usize, g: usize) -> Result<Self> {
        let g_max = (n.max(2)) - 1;
        if n == 0 || g == 0 || g > g_max || n.gcd(&g) != 1 {
            return Err(Error::InvalidGenerator { n, g });
        }
        Ok(LatticeSpec { n, g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.g
    }

    /// All admissible generators for `n`.
    pub fn generators(n: usize) -> impl Iterator<Item = LatticeSpec> {
        (1..n.max(2)).filter_map(move |g| LatticeSpec::new(n, g).ok())
    }
}

/// `{(i/N, i·g mod N / N) : i = 0..N−1}` with exact coordinates.
pub fn rank1_lattice(spec: LatticeSpec) -> PointSet<Rational> {
    let n = spec.n as i64;
    let points = (0..n)
        .map(|i| TorusPoint {
            x: Rational::from_ratio(i, n),
            y: Rational::from_ratio((i * spec.g as i64) % n, n),
        })
        .collect();
    PointSet::new(points).expect("lattice points lie in [0,1)^2")
}

/// Fibonacci numbers with `F_1 = F_2 = 1`.
pub fn fibonacci(index: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..index {
        (a, b) = (b, a + b);
    }
    a
}

/// Index `n` with `F_n = value`, taking the larger index for `value = 1`.
pub fn fibonacci_index(value: usize) -> Result<usize> {
    (2..94)
        .take_while(|&i| fibonacci(i) <= value as u64)
        .filter(|&i| fibonacci(i) == value as u64)
        .last()
        .ok_or(Error::NotFibonacci(value))
}

/// Rank-1 lattice with `N = F_n` and `g = F_{n−1}` (`g = 1` for `N ≤ 2`).
pub fn fibonacci_lattice(index: usize) -> Result<PointSet<Rational>> {
    fibonacci_spec(index).map(rank1_lattice)
}

pub fn fibonacci_spec(index: usize) -> Result<LatticeSpec> {
    if index < 2 {
        return Err(Error::InvalidFibonacciIndex(index));
    }
    let n = fibonacci(index) as usize;
    let g = if n <= 2 { 1 } else { fibonacci(index - 1) as usize };
    LatticeSpec::new(n, g)
}

fn distinct_order<S: Scalar>(values: &[S], axis: char) -> Result<Vec<usize>> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite coordinates"));
    if idx.windows(2).any(|w| values[w[0]] == values[w[1]]) {
        return Err(Error::AmbiguousCell { axis });
    }
    Ok(idx)
}

/// The cell a point set lies in: points are indexed in x-order and σ lists
/// them by increasing y.
pub fn lattice_sigma<S: Scalar>(p: &PointSet<S>) -> Result<Permutation> {
    let by_x = distinct_order(&p.xs(), 'x')?;
    let by_y = distinct_order(&p.ys(), 'y')?;
    let mut x_rank = vec![0; p.n()];
    for (r, &i) in by_x.iter().enumerate() {
        x_rank[i] = r;
    }
    Permutation::new(by_y.into_iter().map(|i| x_rank[i]).collect())
}

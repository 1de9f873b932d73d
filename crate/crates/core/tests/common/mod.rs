#![allow(dead_code)]

use torus_qmc::perm::Permutation;
use torus_qmc::{Gamma, PointSet, TorusPoint};

/// Published optimum per N: cell count, wce at γ = 1, D₂, optimal cells,
/// lattice flag.
pub struct Row {
    pub n: usize,
    pub cells: u64,
    pub wce: f64,
    pub d2: f64,
    pub sigma: &'static [&'static str],
    pub lattice: bool,
}

pub const TABLE: &[Row] = &[
    Row { n: 1, cells: 0, wce: 0.416667, d2: 0.372678, sigma: &["(0)"], lattice: true },
    Row { n: 2, cells: 1, wce: 0.214492, d2: 0.212459, sigma: &["(0 1)"], lattice: true },
    Row { n: 3, cells: 1, wce: 0.146109, d2: 0.153826, sigma: &["(0 1 2)"], lattice: true },
    Row { n: 4, cells: 2, wce: 0.111307, d2: 0.121181, sigma: &["(0 1 3 2)"], lattice: false },
    Row { n: 5, cells: 5, wce: 0.0892064, d2: 0.0980249, sigma: &["(0 2 4 1 3)"], lattice: true },
    Row { n: 6, cells: 13, wce: 0.0752924, d2: 0.0850795, sigma: &["(0 2 4 1 5 3)"], lattice: false },
    Row { n: 7, cells: 57, wce: 0.0650941, d2: 0.0749072, sigma: &["(0 2 4 6 1 3 5)", "(0 3 6 2 5 1 4)"], lattice: true },
    Row { n: 8, cells: 282, wce: 0.056846, d2: 0.0651562, sigma: &["(0 3 6 1 4 7 2 5)"], lattice: true },
    Row { n: 9, cells: 1862, wce: 0.0512711, d2: 0.0601654, sigma: &["(0 2 6 3 8 5 1 7 4)", "(0 2 7 4 1 6 3 8 5)"], lattice: false },
    Row { n: 10, cells: 14076, wce: 0.0461857, d2: 0.054473, sigma: &["(0 3 7 1 4 9 6 2 8 5)"], lattice: false },
    Row { n: 11, cells: 124995, wce: 0.0422449, d2: 0.050152, sigma: &["(0 3 8 1 6 10 4 7 2 9 5)", "(0 3 9 5 1 7 10 4 8 2 6)"], lattice: false },
    Row { n: 12, cells: 1227562, wce: 0.0370732, d2: 0.0456259, sigma: &["(0 5 10 3 8 1 6 11 4 9 2 7)"], lattice: true },
    Row { n: 13, cells: 13481042, wce: 0.0355885, d2: 0.0421763, sigma: &["(0 5 10 2 7 12 4 9 1 6 11 3 8)"], lattice: true },
];

pub fn row(n: usize) -> &'static Row {
    TABLE.iter().find(|r| r.n == n).expect("tabulated n")
}

pub fn perm(s: &str) -> Permutation {
    s.parse().expect("valid permutation")
}

pub fn gamma(v: i64) -> Gamma {
    Gamma::integer(v).unwrap()
}

pub fn points(coords: &[(f64, f64)]) -> PointSet<f64> {
    PointSet::new(coords.iter().map(|&(x, y)| TorusPoint { x, y }).collect()).unwrap()
}

pub fn report(criterion: u32, pass: bool, detail: &str) {
    println!("criterion {criterion:>2}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

/// Objective of integer coordinates `a / d`, scaled to the integer
/// `144 q d⁴ F` for `γ = p / q`. Computed without the library kernels.
pub fn scaled_objective(xs: &[i64], ys: &[i64], d: i64, p: i64, q: i64) -> i128 {
    let d = d as i128;
    // 12 d² k(|a|/d) = 6a² − 6|a|d + d²
    let k12 = |a: i64| {
        let a = (a as i128).abs();
        6 * a * a - 6 * a * d + d * d
    };
    let mut sum = 0i128;
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let kx = k12(xs[i] - xs[j]);
            let ky = k12(ys[i] - ys[j]);
            sum += 12 * q as i128 * d * d * (kx + ky) + p as i128 * kx * ky;
        }
    }
    sum
}

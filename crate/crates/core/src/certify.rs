//! Exact lower bounds per cell from Wolfe duality, and the exhaustion loop
//! that certifies a candidate as globally optimal.
//!
//! On a cell the constraints are `v_i = x_i − x_{i−1} ≥ 0` and
//! `w_i = y_{σ(i)} − y_{σ(i−1)} ≥ 0`. At any point of the closed cell whose
//! multipliers `λ = B⁻¹∇_x F`, `μ = B⁻¹P_σ∇_y F` are nonnegative, convexity
//! gives `F ≥ F(x̃, ỹ) − λᵀv − μᵀw` on the whole cell.

use std::time::Instant;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{objective_f, Gamma};
use crate::lattice::lattice_sigma;
use crate::optimize::{alternating_minimize, cell_gradient, in_cell, CellProblem, SolveOptions, SolveStatus};
use crate::perm::{same_orbit, shard_prefixes, CellIter, Coverage, Permutation};
use crate::scalar::{format_rational, rational_from_f64, Rational};
use crate::torus::{normalize, PointSet};

/// Suffix sums `(B⁻¹v)_i = Σ_{j ≥ i} v_j`.
pub fn apply_b_inverse(v: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); v.len()];
    let mut acc = Rational::zero();
    for i in (0..v.len()).rev() {
        acc += &v[i];
        out[i] = acc.clone();
    }
    out
}

/// Upper bidiagonal differences `(Bλ)_i = λ_i − λ_{i+1}`.
pub fn apply_b(lambda: &[Rational]) -> Vec<Rational> {
    (0..lambda.len())
        .map(|i| match lambda.get(i + 1) {
            Some(next) => &lambda[i] - next,
            None => lambda[i].clone(),
        })
        .collect()
}

/// `∇_y F` reordered along the cell: entry `j` is the component of the point
/// with y-rank `j + 1`.
fn sigma_ordered(gy: &[Rational], sigma: &Permutation) -> Vec<Rational> {
    (1..sigma.n()).map(|j| gy[sigma[j]].clone()).collect()
}

/// Multipliers at a point, without any sign check.
pub fn multipliers(xs: &[Rational], ys: &[Rational], sigma: &Permutation, gamma: &Rational) -> (Vec<Rational>, Vec<Rational>) {
    let (gx, gy) = cell_gradient(xs, ys, gamma, sigma);
    (apply_b_inverse(&gx[1..]), apply_b_inverse(&sigma_ordered(&gy, sigma)))
}

/// A point of the closed cell together with nonnegative multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    x: Vec<Rational>,
    y: Vec<Rational>,
    lambda: Vec<Rational>,
    mu: Vec<Rational>,
}

impl DualPoint {
    /// Validates the point and its multipliers. Zero multipliers are accepted
    /// only when `allow_zero` is set (an exactly stationary point).
    pub fn new(xs: Vec<Rational>, ys: Vec<Rational>, sigma: &Permutation, gamma: &Gamma, allow_zero: bool) -> Result<Self> {
        if xs.len() != sigma.n() || ys.len() != sigma.n() {
            return Err(Error::SizeMismatch(xs.len(), sigma.n()));
        }
        if !in_cell(&xs, &ys, sigma, false) {
            return Err(Error::DualInfeasible(format!("point outside the closed cell {sigma}")));
        }
        let (lambda, mu) = multipliers(&xs, &ys, sigma, gamma.exact());
        let bad = |v: &Rational| v.is_negative() || (!allow_zero && v.is_zero());
        if let Some(i) = lambda.iter().position(bad) {
            return Err(Error::DualInfeasible(format!("lambda_{} = {}", i + 1, format_rational(&lambda[i]))));
        }
        if let Some(j) = mu.iter().position(bad) {
            return Err(Error::DualInfeasible(format!("mu_{} = {}", j + 1, format_rational(&mu[j]))));
        }
        Ok(DualPoint { x: xs, y: ys, lambda, mu })
    }

    pub fn x(&self) -> &[Rational] {
        &self.x
    }

    pub fn y(&self) -> &[Rational] {
        &self.y
    }

    pub fn lambda(&self) -> &[Rational] {
        &self.lambda
    }

    pub fn mu(&self) -> &[Rational] {
        &self.mu
    }
}

/// `β = F(x̃, ỹ) − λᵀv(x̃) − μᵀw(ỹ)`, a lower bound for `F` on the cell.
pub fn wolfe_bound(dp: &DualPoint, sigma: &Permutation, gamma: &Gamma) -> Rational {
    let n = sigma.n();
    let mut beta = objective_f(&dp.x, &dp.y, gamma.exact());
    for i in 1..n {
        beta -= &dp.lambda[i - 1] * (&dp.x[i] - &dp.x[i - 1]);
        beta -= &dp.mu[i - 1] * (&dp.y[sigma[i]] - &dp.y[sigma[i - 1]]);
    }
    beta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    /// Bound above the candidate objective: the cell cannot beat it.
    Excluded,
    /// Bound at or below the candidate objective: the cell survives.
    Retained,
    /// No valid bound could be produced.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub sigma: Permutation,
    pub beta: Option<Rational>,
    pub status: CellStatus,
    /// Offset used for the emitted bound.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Certified,
    Refuted,
    Incomplete,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Certified => 0,
            Outcome::Refuted => 1,
            Outcome::Incomplete => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Certificate {
    pub n: usize,
    pub gamma: Gamma,
    pub theta: Rational,
    pub candidate_sigma: Permutation,
    pub delta: f64,
    pub records: Vec<CellRecord>,
    pub runtime_seconds: f64,
}

impl Certificate {
    /// Surviving cells `Ξ`.
    pub fn xi(&self) -> Vec<&Permutation> {
        self.records.iter().filter(|r| r.status == CellStatus::Retained).map(|r| &r.sigma).collect()
    }

    pub fn unresolved(&self) -> Vec<&Permutation> {
        self.records.iter().filter(|r| r.status == CellStatus::Unresolved).map(|r| &r.sigma).collect()
    }

    pub fn cells_certified(&self) -> usize {
        self.records.iter().filter(|r| r.beta.is_some()).count()
    }

    pub fn outcome(&self) -> Outcome {
        if !self.unresolved().is_empty() {
            Outcome::Incomplete
        } else if self.xi().iter().all(|s| same_orbit(s, &self.candidate_sigma)) {
            Outcome::Certified
        } else {
            Outcome::Refuted
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<_> = self
            .records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "sigma": r.sigma.to_string(),
                    "beta": r.beta.as_ref().map(format_rational),
                    "status": r.status,
                    "delta": r.delta,
                })
            })
            .collect();
        serde_json::json!({
            "n": self.n,
            "gamma": self.gamma.to_string(),
            "theta": format_rational(&self.theta),
            "candidate_sigma": self.candidate_sigma.to_string(),
            "outcome": self.outcome(),
            "cells_total": self.records.len(),
            "cells_certified": self.cells_certified(),
            "unresolved": self.unresolved().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "xi": self.xi().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            "runtime_seconds": self.runtime_seconds,
            "delta": self.delta,
            "cells": cells,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CertifyOptions {
    /// Offset for the interior solves; chosen from the optimality gap when
    /// absent.
    pub delta: Option<f64>,
    pub eps: f64,
    pub max_iter: usize,
    pub retries: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            delta: None,
            eps: crate::optimize::DEFAULT_EPS,
            max_iter: crate::optimize::DEFAULT_MAX_ITER,
            retries: 3,
        }
    }
}

pub const FALLBACK_DELTA: f64 = 1e-9;
pub const MIN_DELTA: f64 = 1e-10;

/// Every cell of size `n` up to symmetry; the single trivial cell for `n = 1`.
pub fn sweep_cells(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        vec![vec![0]]
    } else {
        shard_prefixes(n, 3.min(n.saturating_sub(1)))
    }
}

pub(crate) fn cells_with_prefix(n: usize, prefix: &[usize]) -> Box<dyn Iterator<Item = Permutation> + Send> {
    if n == 1 {
        Box::new(std::iter::once(Permutation::identity(1)))
    } else {
        Box::new(CellIter::with_prefix(n, Coverage::Complete, prefix))
    }
}

/// Runs `f` on every cell in parallel and returns the results in
/// lexicographic cell order.
pub(crate) fn map_cells<T: Send>(n: usize, f: impl Fn(Permutation) -> T + Sync) -> Vec<T> {
    sweep_cells(n)
        .into_par_iter()
        .map(|prefix| cells_with_prefix(n, &prefix).map(&f).collect::<Vec<_>>())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `δ = gap / (2N²)` from the float gap between the candidate objective
/// and the best cell outside its orbit.
pub fn choose_delta(n: usize, gamma: &Gamma, theta: f64, candidate: &Permutation, opts: &CertifyOptions) -> f64 {
    let solve = SolveOptions { eps: opts.eps, max_iter: opts.max_iter, ..SolveOptions::default() };
    let runner_up = map_cells(n, |sigma| {
        if same_orbit(&sigma, candidate) {
            return None;
        }
        let r = alternating_minimize(&CellProblem::new(gamma.clone(), sigma), &solve).ok()?;
        r.converged().then_some(r.objective)
    })
    .into_iter()
    .flatten()
    .fold(f64::INFINITY, f64::min);
    let margin = runner_up - theta;
    if margin.is_finite() && margin > 0.0 {
        (margin / (2.0 * (n * n) as f64)).max(MIN_DELTA)
    } else {
        FALLBACK_DELTA
    }
}

fn nudge_toward_center(problem: &CellProblem, xs: &[f64], ys: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (bx, by) = problem.barycentric_start();
    let dist = xs.iter().zip(&bx).chain(ys.iter().zip(&by)).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let t = if dist > 0.0 { (0.25 / problem.n as f64 / dist).min(1.0) } else { 0.0 };
    let mv = |u: &[f64], b: &[f64]| u.iter().zip(b).map(|(a, c)| a + t * (c - a)).collect();
    (mv(xs, &bx), mv(ys, &by))
}

fn exact_bound(problem: &CellProblem, xs: &[f64], ys: &[f64]) -> Result<Rational> {
    let xs = xs.iter().map(|&v| rational_from_f64(v)).collect::<Result<Vec<_>>>()?;
    let ys = ys.iter().map(|&v| rational_from_f64(v)).collect::<Result<Vec<_>>>()?;
    let dp = DualPoint::new(xs, ys, &problem.sigma, &problem.gamma, false)?;
    Ok(wolfe_bound(&dp, &problem.sigma, &problem.gamma))
}

/// Bound for one cell, retrying with a smaller offset when the bound is too
/// weak and a larger one when the multipliers are not positive.
pub fn certify_cell(
    sigma: Permutation,
    gamma: &Gamma,
    theta: &Rational,
    candidate: &Permutation,
    delta: f64,
    opts: &CertifyOptions,
) -> CellRecord {
    let problem = CellProblem::new(gamma.clone(), sigma);
    let own_orbit = same_orbit(&problem.sigma, candidate);
    let mut d = delta;
    let mut best: Option<(Rational, f64)> = None;
    for _ in 0..=opts.retries {
        let mut solve = SolveOptions { eps: opts.eps, delta: d, max_iter: opts.max_iter, start: None };
        let mut res = alternating_minimize(&problem, &solve);
        if let Ok(r) = &res {
            if r.status == SolveStatus::CellExit {
                solve.start = Some(nudge_toward_center(&problem, &r.x, &r.y));
                res = alternating_minimize(&problem, &solve);
            }
        }
        let r = match res {
            Ok(r) if r.status != SolveStatus::CellExit => r,
            _ => break,
        };
        match exact_bound(&problem, &r.x, &r.y) {
            Ok(beta) => {
                let done = beta > *theta || own_orbit;
                if best.as_ref().is_none_or(|(b, _)| beta > *b) {
                    best = Some((beta, d));
                }
                if done {
                    break;
                }
                d /= 10.0;
            }
            Err(_) => d *= 10.0,
        }
    }
    match best {
        Some((beta, d)) => {
            let status = if beta > *theta { CellStatus::Excluded } else { CellStatus::Retained };
            CellRecord { sigma: problem.sigma, beta: Some(beta), status, delta: d }
        }
        None => CellRecord { sigma: problem.sigma, beta: None, status: CellStatus::Unresolved, delta: d },
    }
}

/// Certifies `candidate` as a global minimizer of the worst-case error for
/// `n` points, or reports the cells that could not be excluded.
pub fn certify(n: usize, gamma: &Gamma, candidate: &PointSet<Rational>, opts: &CertifyOptions) -> Result<Certificate> {
    let start = Instant::now();
    gamma.ensure_convex()?;
    if candidate.n() != n {
        return Err(Error::SizeMismatch(candidate.n(), n));
    }
    if let Some(d) = opts.delta {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {d}")));
        }
    }
    let candidate = normalize(candidate);
    let candidate_sigma = lattice_sigma(&candidate)?;
    let theta = objective_f(&candidate.xs(), &candidate.ys(), gamma.exact());
    let delta = match opts.delta {
        Some(d) => d,
        None if n == 1 => FALLBACK_DELTA,
        None => choose_delta(n, gamma, crate::scalar::Scalar::to_f64(&theta), &candidate_sigma, opts),
    };
    let records = if n == 1 {
        vec![CellRecord { sigma: Permutation::identity(1), beta: Some(Rational::zero()), status: CellStatus::Retained, delta }]
    } else {
        map_cells(n, |sigma| certify_cell(sigma, gamma, &theta, &candidate_sigma, delta, opts))
    };
    Ok(Certificate {
        n,
        gamma: gamma.clone(),
        theta,
        candidate_sigma,
        delta,
        records,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{fibonacci_lattice, rank1_lattice, LatticeSpec};
    use crate::scalar::Scalar;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_ratio(p, q)
    }

    fn g1() -> Gamma {
        Gamma::integer(1).unwrap()
    }

    #[test]
    fn suffix_sums() {
        assert_eq!(apply_b_inverse(&[r(1, 1), r(1, 1), r(1, 1)]), vec![r(3, 1), r(2, 1), r(1, 1)]);
        let d = r(1, 7);
        assert_eq!(apply_b_inverse(&vec![d.clone(); 4]), vec![r(4, 7), r(3, 7), r(2, 7), r(1, 7)]);
        let v = vec![r(3, 5), r(-2, 9), r(11, 4), r(0, 1), r(-1, 3)];
        assert_eq!(apply_b(&apply_b_inverse(&v)), v);
        assert_eq!(apply_b_inverse(&apply_b(&v)), v);
    }

    #[test]
    fn multipliers_reproduce_gradient() {
        let sigma: Permutation = "(0 2 1)".parse().unwrap();
        let xs = vec![r(0, 1), r(2, 7), r(5, 8)];
        let ys = vec![r(0, 1), r(3, 4), r(1, 3)];
        let (lambda, mu) = multipliers(&xs, &ys, &sigma, &r(1, 1));
        let (gx, gy) = cell_gradient(&xs, &ys, &r(1, 1), &sigma);
        assert_eq!(apply_b(&lambda), gx[1..].to_vec());
        assert_eq!(apply_b(&mu), sigma_ordered(&gy, &sigma));
    }

    #[test]
    fn stationary_lattice_is_tight() {
        let p = fibonacci_lattice(5).unwrap();
        let sigma = lattice_sigma(&p).unwrap();
        assert!(matches!(
            DualPoint::new(p.xs(), p.ys(), &sigma, &g1(), false),
            Err(Error::DualInfeasible(_))
        ));
        let dp = DualPoint::new(p.xs(), p.ys(), &sigma, &g1(), true).unwrap();
        assert!(dp.lambda().iter().chain(dp.mu()).all(|v| v.is_zero()));
        assert_eq!(wolfe_bound(&dp, &sigma, &g1()), objective_f(&p.xs(), &p.ys(), &r(1, 1)));
    }

    #[test]
    fn offset_bound_beats_coarse_form() {
        let prob = CellProblem::new(g1(), "(0 2 4 1 3)".parse().unwrap());
        let delta = 1e-5;
        let res = alternating_minimize(&prob, &SolveOptions::with_delta(delta)).unwrap();
        let beta = exact_bound(&prob, &res.x, &res.y).unwrap();
        let f = res.objective;
        assert!(beta.to_f64() > f - delta * 25.0);
        assert!(beta.to_f64() <= f);
    }

    #[test]
    fn rejects_outside_points() {
        let sigma: Permutation = "(0 1)".parse().unwrap();
        assert!(DualPoint::new(vec![r(0, 1), r(3, 2)], vec![r(0, 1), r(1, 2)], &sigma, &g1(), true).is_err());
    }

    #[test]
    fn certifies_small_fibonacci() {
        for (idx, expect) in [(3, "(0 1)"), (4, "(0 1 2)"), (5, "(0 2 4 1 3)")] {
            let cert = certify(fibonacci_lattice(idx).unwrap().n(), &g1(), &fibonacci_lattice(idx).unwrap(), &CertifyOptions::default()).unwrap();
            assert_eq!(cert.outcome(), Outcome::Certified);
            let xi: Vec<String> = cert.xi().iter().map(|s| s.to_string()).collect();
            assert_eq!(xi, vec![expect.to_string()]);
        }
    }

    #[test]
    fn single_point_is_trivial() {
        let p = PointSet::from_coords(vec![r(1, 3)], vec![r(1, 2)]).unwrap();
        let cert = certify(1, &g1(), &p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.outcome(), Outcome::Certified);
        assert_eq!(cert.theta, r(0, 1));
    }

    #[test]
    fn wrong_candidate_is_refuted() {
        let p = rank1_lattice(LatticeSpec::new(5, 1).unwrap());
        let cert = certify(5, &g1(), &p, &CertifyOptions::default()).unwrap();
        assert_eq!(cert.outcome(), Outcome::Refuted);
        assert!(cert.xi().iter().any(|s| s.to_string() == "(0 2 4 1 3)"));
        let json = cert.to_json();
        assert_eq!(json["outcome"], "refuted");
        assert!(json["theta"].as_str().unwrap().contains('/'));
    }
}

//! Local minimization of the pairwise objective on a single cell by exact
//! alternating block solves.
//!
//! On a cell the orderings of both coordinates are fixed, so each block of
//! the objective is a convex quadratic once the other block is frozen. The
//! pinned point `(x_0, y_0) = (0, 0)` is excluded from the variables.

use crate::cholesky::Cholesky;
use crate::error::{Error, Result};
use crate::kernel::{k_abs, objective_f, Gamma};
use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::torus::PointSet;

pub const DEFAULT_EPS: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Pair weights `c_ij = 1 + γ k(|u_i − u_j|)` of the frozen block, row-major.
pub fn coefficients<S: Scalar>(u_fixed: &[S], gamma: &S) -> Vec<S> {
    let n = u_fixed.len();
    let mut c = vec![S::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = S::one() + gamma.clone() * k_abs(&u_fixed[i], &u_fixed[j]);
            c[i * n + j] = v.clone();
            c[j * n + i] = v;
        }
    }
    c
}

/// Fixed sign pattern `s_ij = sgn(u_i − u_j)` of a block, stored as ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSigns {
    rank: Vec<usize>,
}

impl BlockSigns {
    /// `order` lists the indices by increasing coordinate.
    pub fn from_order(order: &[usize]) -> Self {
        let mut rank = vec![0; order.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        BlockSigns { rank }
    }

    pub fn identity(n: usize) -> Self {
        BlockSigns { rank: (0..n).collect() }
    }

    /// Signs read off concrete values; ties leave a sign undefined.
    pub fn from_values<S: Scalar>(values: &[S]) -> Result<Self> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite coordinates"));
        if let Some(w) = idx.windows(2).find(|w| values[w[0]] == values[w[1]]) {
            return Err(Error::SignUndefined(w[0].min(w[1]), w[0].max(w[1])));
        }
        Ok(Self::from_order(&idx))
    }

    pub fn n(&self) -> usize {
        self.rank.len()
    }

    pub fn sign(&self, i: usize, j: usize) -> i32 {
        (self.rank[i] as i64 - self.rank[j] as i64).signum() as i32
    }
}

fn half_sign<S: Scalar>(s: i32) -> S {
    S::from_ratio(s as i64, 2)
}

fn gradient_with<S: Scalar>(c: &[S], u: &[S], signs: &BlockSigns, k: usize) -> S {
    let n = u.len();
    let mut g = S::zero();
    for i in (0..n).filter(|&i| i != k) {
        let cik = &c[i * n + k];
        g = g + cik.clone() * (u[k].clone() - u[i].clone() - half_sign::<S>(signs.sign(k, i)));
    }
    g
}

/// `∂F/∂u_k` for the variable block `u_var` with the other block frozen.
pub fn gradient_component<S: Scalar>(
    u_fixed: &[S],
    u_var: &[S],
    gamma: &S,
    signs: &BlockSigns,
    k: usize,
) -> S {
    gradient_with(&coefficients(u_fixed, gamma), u_var, signs, k)
}

/// Full block gradient, one entry per point (entry 0 belongs to the pinned
/// point and is not a variable).
pub fn gradient_block<S: Scalar>(u_fixed: &[S], u_var: &[S], gamma: &S, signs: &BlockSigns) -> Vec<S> {
    assert_eq!(u_fixed.len(), u_var.len());
    let c = coefficients(u_fixed, gamma);
    (0..u_var.len()).map(|k| gradient_with(&c, u_var, signs, k)).collect()
}

/// Block Hessian over the variables `1..N−1`, row-major.
pub fn hessian_block<S: Scalar>(u_fixed: &[S], gamma: &S) -> Vec<S> {
    hessian_from(&coefficients(u_fixed, gamma), u_fixed.len())
}

fn hessian_from<S: Scalar>(c: &[S], n: usize) -> Vec<S> {
    let m = n.saturating_sub(1);
    let mut h = vec![S::zero(); m * m];
    for k in 1..n {
        let mut diag = S::zero();
        for i in (0..n).filter(|&i| i != k) {
            diag = diag + c[i * n + k].clone();
            if i > 0 {
                h[(k - 1) * m + (i - 1)] = -c[k * n + i].clone();
            }
        }
        h[(k - 1) * m + (k - 1)] = diag;
    }
    h
}

/// Exact minimizer of the block quadratic shifted so that its gradient is
/// `δ·1`: `u − H⁻¹(∇ − δ1)`.
pub fn block_minimize(
    u_fixed: &[f64],
    u_var: &[f64],
    gamma: f64,
    signs: &BlockSigns,
    delta: f64,
) -> Result<Vec<f64>> {
    let n = u_var.len();
    let c = coefficients(u_fixed, &gamma);
    let h = hessian_from(&c, n);
    let chol = Cholesky::factor(&h, n.saturating_sub(1))?;
    let rhs: Vec<f64> = (1..n).map(|k| gradient_with(&c, u_var, signs, k) - delta).collect();
    let step = chol.solve(&rhs);
    let mut out = u_var.to_vec();
    for k in 1..n {
        out[k] -= step[k - 1];
    }
    Ok(out)
}

/// Sign patterns of a cell: identity order in x, σ order in y.
pub fn cell_signs(sigma: &Permutation) -> (BlockSigns, BlockSigns) {
    (BlockSigns::identity(sigma.n()), BlockSigns::from_order(sigma.as_slice()))
}

/// Gradient of the objective with the cell's fixed sign pattern.
pub fn cell_gradient<S: Scalar>(xs: &[S], ys: &[S], gamma: &S, sigma: &Permutation) -> (Vec<S>, Vec<S>) {
    let (sx, sy) = cell_signs(sigma);
    (gradient_block(ys, xs, gamma, &sx), gradient_block(xs, ys, gamma, &sy))
}

/// Whether `(x, y)` lies in the cell: pinned origin, strictly ordered, and
/// inside the unit square. `strict = false` checks the closed cell.
pub fn in_cell<S: Scalar>(xs: &[S], ys: &[S], sigma: &Permutation, strict: bool) -> bool {
    let n = xs.len();
    if n == 0 || ys.len() != n || sigma.n() != n || !xs[0].is_zero() || !ys[0].is_zero() {
        return false;
    }
    let ordered = |a: &S, b: &S| if strict { a < b } else { a <= b };
    let one = S::one();
    let last_ok = |v: &S| if strict { *v < one } else { *v <= one };
    (1..n).all(|i| ordered(&xs[i - 1], &xs[i]))
        && (1..n).all(|j| ordered(&ys[sigma[j - 1]], &ys[sigma[j]]))
        && last_ok(&xs[n - 1])
        && last_ok(&ys[sigma[n - 1]])
}

/// A cell `D_σ` with the origin pinned.
#[derive(Debug, Clone)]
pub struct CellProblem {
    pub n: usize,
    pub gamma: Gamma,
    pub sigma: Permutation,
}

impl CellProblem {
    pub fn new(gamma: Gamma, sigma: Permutation) -> Self {
        CellProblem { n: sigma.n(), gamma, sigma }
    }

    /// Evenly spaced interior start: `x_i = i/N`, `y_{σ(j)} = j/N`.
    pub fn barycentric_start(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let xs = (0..n).map(|i| i as f64 / n as f64).collect();
        let mut ys = vec![0.0; n];
        for j in 0..n {
            ys[self.sigma[j]] = j as f64 / n as f64;
        }
        (xs, ys)
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub eps: f64,
    pub delta: f64,
    pub max_iter: usize,
    pub start: Option<(Vec<f64>, Vec<f64>)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { eps: DEFAULT_EPS, delta: 0.0, max_iter: DEFAULT_MAX_ITER, start: None }
    }
}

impl SolveOptions {
    pub fn with_delta(delta: f64) -> Self {
        SolveOptions { delta, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    CellExit,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub objective: f64,
    /// Max-norm of `∇ − δ1` over both blocks.
    pub gradient_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl CellResult {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    pub fn points(&self) -> Result<PointSet<f64>> {
        PointSet::from_coords(self.x.clone(), self.y.clone())
    }
}

fn residuals(gx: &[f64], gy: &[f64], delta: f64) -> (f64, f64) {
    let mut sq = 0.0;
    let mut max = 0.0f64;
    for g in gx.iter().skip(1).chain(gy.iter().skip(1)) {
        let d = g - delta;
        sq += d * d;
        max = max.max(d.abs());
    }
    (sq.sqrt(), max)
}

/// Alternates exact x- and y-block solves until the gradient equals `δ·1`
/// to within `eps` in the Euclidean norm.
pub fn alternating_minimize(problem: &CellProblem, opts: &SolveOptions) -> Result<CellResult> {
    let n = problem.n;
    let gamma = problem.gamma.to_f64();
    let sigma = &problem.sigma;
    let (sx, sy) = cell_signs(sigma);
    let (mut xs, mut ys) = opts.start.clone().unwrap_or_else(|| problem.barycentric_start());
    if xs.len() != n || ys.len() != n {
        return Err(Error::SizeMismatch(xs.len(), n));
    }
    let finish = |xs: Vec<f64>, ys: Vec<f64>, iterations, status| {
        let (gx, gy) = cell_gradient(&xs, &ys, &gamma, sigma);
        let (_, max) = residuals(&gx, &gy, opts.delta);
        let objective = objective_f(&xs, &ys, &gamma);
        CellResult { x: xs, y: ys, objective, gradient_residual: max, iterations, status }
    };
    if !in_cell(&xs, &ys, sigma, true) && n > 1 {
        return Ok(finish(xs, ys, 0, SolveStatus::CellExit));
    }
    for it in 0..opts.max_iter {
        let (gx, gy) = cell_gradient(&xs, &ys, &gamma, sigma);
        if residuals(&gx, &gy, opts.delta).0 < opts.eps {
            return Ok(finish(xs, ys, it, SolveStatus::Converged));
        }
        let nx = block_minimize(&ys, &xs, gamma, &sx, opts.delta)?;
        if !in_cell(&nx, &ys, sigma, true) {
            return Ok(finish(xs, ys, it + 1, SolveStatus::CellExit));
        }
        xs = nx;
        let ny = block_minimize(&xs, &ys, gamma, &sy, opts.delta)?;
        if !in_cell(&xs, &ny, sigma, true) {
            return Ok(finish(xs, ys, it + 1, SolveStatus::CellExit));
        }
        ys = ny;
    }
    let (gx, gy) = cell_gradient(&xs, &ys, &gamma, sigma);
    let status = if residuals(&gx, &gy, opts.delta).0 < opts.eps {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    Ok(finish(xs, ys, opts.max_iter, status))
}

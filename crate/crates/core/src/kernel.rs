//! Reproducing kernel of the periodic mixed Sobolev space, worst-case error,
//! periodic L2-discrepancy and the two equivalent objectives.
//!
//! Everything except the box-counting oracle is generic over [`Scalar`], so
//! the same formula runs in `f64` and in exact [`Rational`] arithmetic.
//! Coordinate differences are plain absolute differences of the
//! representatives in `[0, 1)`; `k(t) = k(1 - t)` makes wrapping unnecessary.

use std::fmt;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar, ScalarMode};
use crate::torus::{PointSet, TorusPoint};

/// Space weight γ, kept exact so certification never rounds it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gamma(Rational);

impl Gamma {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::GammaOutOfRange(format_rational(&value)));
        }
        Ok(Gamma(value))
    }

    pub fn integer(v: i64) -> Result<Self> {
        Self::new(Rational::from_ratio(v, 1))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let value = parse_rational(s).map_err(Error::Config)?;
        Self::new(value)
    }

    /// Rejects weights outside `[0, 6]`, where the cell objectives stop
    /// being convex.
    pub fn ensure_convex(&self) -> Result<()> {
        if self.0 > Rational::from_ratio(6, 1) {
            return Err(Error::GammaOutOfRange(format_rational(&self.0)));
        }
        Ok(())
    }

    pub fn exact(&self) -> &Rational {
        &self.0
    }

    pub fn value<S: Scalar>(&self) -> S {
        S::from_rational(&self.0)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    /// `"p_q"`, used in output directory names.
    pub fn path_label(&self) -> String {
        format!("{}_{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// `k(t) = (t² − t + 1/6) / 2`, half the second Bernoulli polynomial.
pub fn bernoulli_k<S: Scalar>(t: &S) -> Result<S> {
    if *t < S::zero() || *t > S::one() {
        return Err(Error::Domain { value: t.to_f64() });
    }
    Ok(k_poly(t))
}

/// Polynomial form of `k`, valid for any argument.
pub(crate) fn k_poly<S: Scalar>(t: &S) -> S {
    (t.clone() * t.clone() - t.clone() + S::from_ratio(1, 6)) / S::from_ratio(2, 1)
}

pub(crate) fn k_abs<S: Scalar>(a: &S, b: &S) -> S {
    k_poly(&(a.clone() - b.clone()).abs())
}

/// Univariate kernel `1 + γ k(|u − v|)`.
pub fn kernel1<S: Scalar>(u: &S, v: &S, gamma: &S) -> S {
    S::one() + gamma.clone() * k_abs(u, v)
}

/// Tensor-product kernel on the torus.
pub fn kernel2<S: Scalar>(p: &TorusPoint<S>, q: &TorusPoint<S>, gamma: &S) -> S {
    kernel1(&p.x, &q.x, gamma) * kernel1(&p.y, &q.y, gamma)
}

/// Squared worst-case error, `−1 + N⁻² Σ_{i,j} K(p_i, p_j)`.
pub fn wce_squared<S: Scalar>(p: &PointSet<S>, gamma: &Gamma) -> S {
    let g: S = gamma.value();
    let pts = p.points();
    let mut sum = S::zero();
    for a in pts {
        for b in pts {
            sum = sum + kernel2(a, b, &g);
        }
    }
    let n = S::from_usize(p.n());
    sum / (n.clone() * n) - S::one()
}

fn checked_sqrt(sq: f64) -> Result<f64> {
    if sq < -1e-12 {
        return Err(Error::Inconsistent(sq));
    }
    Ok(sq.max(0.0).sqrt())
}

pub fn wce<S: Scalar>(p: &PointSet<S>, gamma: &Gamma) -> Result<f64> {
    checked_sqrt(wce_squared(p, gamma).to_f64())
}

/// Squared periodic L2-discrepancy, evaluated with its own kernel
/// `|u − v|² − |u − v| + 1/2` rather than through the worst-case error.
pub fn periodic_l2_discrepancy_squared<S: Scalar>(p: &PointSet<S>) -> S {
    let pts = p.points();
    let tilde = |u: &S, v: &S| {
        let d = (u.clone() - v.clone()).abs();
        d.clone() * d.clone() - d + S::from_ratio(1, 2)
    };
    let mut sum = S::zero();
    for a in pts {
        for b in pts {
            sum = sum + tilde(&a.x, &b.x) * tilde(&a.y, &b.y);
        }
    }
    let n = S::from_usize(p.n());
    sum / (n.clone() * n) - S::from_ratio(1, 9)
}

pub fn periodic_l2_discrepancy<S: Scalar>(p: &PointSet<S>) -> Result<f64> {
    checked_sqrt(periodic_l2_discrepancy_squared(p).to_f64())
}

/// Pairwise objective `Σ_{i<j} k(Δx) + k(Δy) + γ k(Δx) k(Δy)`.
pub fn objective_f<S: Scalar>(xs: &[S], ys: &[S], gamma: &S) -> S {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut sum = S::zero();
    for i in 0..n {
        for j in i + 1..n {
            let kx = k_abs(&xs[i], &xs[j]);
            let ky = k_abs(&ys[i], &ys[j]);
            sum = sum + kx.clone() + ky.clone() + gamma.clone() * kx * ky;
        }
    }
    sum
}

/// Full double sum `Σ_{i,j} (1 + γ k(Δx)) (1 + γ k(Δy))`.
pub fn objective_g<S: Scalar>(xs: &[S], ys: &[S], gamma: &S) -> S {
    let n = xs.len();
    let mut sum = S::zero();
    for i in 0..n {
        for j in 0..n {
            sum = sum + kernel1(&xs[i], &xs[j], gamma) * kernel1(&ys[i], &ys[j], gamma);
        }
    }
    sum
}

/// Squared worst-case error recovered from the pairwise objective:
/// `γ (2k(0) + γ k(0)²) / N + 2γ F / N²`.
pub fn wce_squared_from_objective<S: Scalar>(f: &S, n: usize, gamma: &S) -> S {
    let k0 = S::from_ratio(1, 12);
    let nn = S::from_usize(n);
    gamma.clone() * (S::from_ratio(2, 1) * k0.clone() + gamma.clone() * k0.clone() * k0)
        / nn.clone()
        + S::from_ratio(2, 1) * gamma.clone() * f.clone() / (nn.clone() * nn)
}

/// A metric evaluated in the requested arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricValue {
    Float(f64),
    Exact(Rational),
}

impl MetricValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MetricValue::Float(v) => *v,
            MetricValue::Exact(r) => r.to_f64(),
        }
    }
}

pub fn wce_squared_in(mode: ScalarMode, p: &PointSet<Rational>, gamma: &Gamma) -> MetricValue {
    match mode {
        ScalarMode::Float => MetricValue::Float(wce_squared(&p.to_f64(), gamma)),
        ScalarMode::Exact => MetricValue::Exact(wce_squared(p, gamma)),
    }
}

pub fn discrepancy_squared_in(mode: ScalarMode, p: &PointSet<Rational>) -> MetricValue {
    match mode {
        ScalarMode::Float => MetricValue::Float(periodic_l2_discrepancy_squared(&p.to_f64())),
        ScalarMode::Exact => MetricValue::Exact(periodic_l2_discrepancy_squared(p)),
    }
}

/// Box-counting estimate of the periodic L2-discrepancy.
///
/// Averages `D(P, B(a, b))²` over all `m⁴` periodic boxes whose corners
/// `a, b` lie on the grid `{0, 1/m, …, (m−1)/m}²`. Boxes are left-closed,
/// right-open, and a box with `a_j > b_j` wraps around as two intervals.
/// Only meant as an independent check of [`periodic_l2_discrepancy`].
pub fn discrepancy_box_oracle(p: &PointSet<f64>, m: usize) -> f64 {
    assert!(m >= 1, "grid resolution must be positive");
    let n = p.n();
    let words = n.div_ceil(64);
    let intervals = |coords: &[f64]| {
        let mut out = Vec::with_capacity(m * m);
        for ia in 0..m {
            for ib in 0..m {
                let a = ia as f64 / m as f64;
                let b = ib as f64 / m as f64;
                let (vol, inside): (f64, Box<dyn Fn(f64) -> bool>) = if ia <= ib {
                    (b - a, Box::new(move |u| a <= u && u < b))
                } else {
                    (1.0 - a + b, Box::new(move |u| u >= a || u < b))
                };
                let mut mask = vec![0u64; words];
                for (i, &u) in coords.iter().enumerate() {
                    if inside(u) {
                        mask[i / 64] |= 1 << (i % 64);
                    }
                }
                out.push((vol, mask));
            }
        }
        out
    };
    let ix = intervals(&p.xs());
    let iy = intervals(&p.ys());
    let mut total = 0.0;
    for (vx, mx) in &ix {
        for (vy, my) in &iy {
            let count: u32 = mx.iter().zip(my).map(|(a, b)| (a & b).count_ones()).sum();
            let d = count as f64 / n as f64 - vx * vy;
            total += d * d;
        }
    }
    (total / (m as f64).powi(4)).sqrt()
}

/// Three-term worst-case error formula with the initial-error integral
/// written out; for this kernel the two integral terms equal 1.
#[cfg(test)]
fn wce_squared_three_term(p: &PointSet<Rational>, gamma: &Gamma) -> Rational {
    let one = Rational::from_ratio(1, 1);
    // ∫∫ K = 1 and ∫ K(x_i, ·) = 1 because ∫₀¹ k(|x − y|) dy = 0.
    let double_integral = one.clone();
    let single_integrals: Rational = (0..p.n()).map(|_| one.clone()).sum();
    let n = Rational::from_usize(p.n());
    let mut sum = <Rational as num_traits::Zero>::zero();
    let g: Rational = gamma.value();
    for a in p.points() {
        for b in p.points() {
            sum += kernel2(a, b, &g);
        }
    }
    double_integral - Rational::from_ratio(2, 1) * single_integrals / n.clone() + sum / (n.clone() * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_ratio(p, q)
    }

    fn pt(a: i64, b: i64, c: i64, d: i64) -> TorusPoint<Rational> {
        TorusPoint { x: r(a, b), y: r(c, d) }
    }

    fn two_lattice() -> PointSet<Rational> {
        PointSet::new(vec![pt(0, 1, 0, 1), pt(1, 2, 1, 2)]).unwrap()
    }

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_k(&r(0, 1)).unwrap(), r(1, 12));
        assert_eq!(bernoulli_k(&r(1, 2)).unwrap(), r(-1, 24));
        assert_eq!(bernoulli_k(&r(1, 4)).unwrap(), r(-1, 96));
        assert_eq!(bernoulli_k(&r(3, 4)).unwrap(), r(-1, 96));
        assert!(matches!(bernoulli_k(&1.5f64), Err(Error::Domain { .. })));
        assert!(bernoulli_k(&-0.1f64).is_err());
    }

    #[test]
    fn kernel2_values() {
        let o = pt(0, 1, 0, 1);
        let h = pt(1, 2, 1, 2);
        assert_eq!(kernel2(&o, &o, &r(1, 1)), r(169, 144));
        assert_eq!(kernel2(&o, &h, &r(1, 1)), r(529, 576));
        assert_eq!(kernel2(&o, &h, &r(6, 1)), r(9, 16));
    }

    #[test]
    fn wce_closed_forms() {
        let one = Gamma::integer(1).unwrap();
        let single = PointSet::new(vec![pt(0, 1, 0, 1)]).unwrap();
        assert_eq!(wce_squared(&single, &one), r(25, 144));
        assert_eq!(wce_squared(&two_lattice(), &one), r(53, 1152));
        assert!((wce(&single, &one).unwrap() - 5.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_closed_forms() {
        let single = PointSet::new(vec![pt(0, 1, 0, 1)]).unwrap();
        assert_eq!(periodic_l2_discrepancy_squared(&single), r(5, 36));
        let d = periodic_l2_discrepancy(&single).unwrap();
        assert!((d - 5f64.sqrt() / 6.0).abs() < 1e-15);
    }

    #[test]
    fn objectives_on_two_lattice() {
        let p = two_lattice();
        let g = r(1, 1);
        // one pair: 2 k(1/2) + k(1/2)^2 = -1/12 + 1/576
        let f = objective_f(&p.xs(), &p.ys(), &g);
        assert_eq!(f, r(-47, 576));
        assert_eq!(wce_squared_from_objective(&f, 2, &g), r(53, 1152));
        assert_eq!(objective_g(&p.xs(), &p.ys(), &g), r(2410, 576));
        let single = PointSet::new(vec![pt(0, 1, 0, 1)]).unwrap();
        assert_eq!(objective_f(&single.xs(), &single.ys(), &g), r(0, 1));
        assert_eq!(objective_g(&single.xs(), &single.ys(), &g), r(169, 144));
    }

    #[test]
    fn three_term_formula_agrees() {
        let one = Gamma::integer(1).unwrap();
        let p = PointSet::new(vec![pt(0, 1, 0, 1), pt(1, 3, 2, 7), pt(5, 9, 1, 2)]).unwrap();
        assert_eq!(wce_squared_three_term(&p, &one), wce_squared(&p, &one));
    }

    #[test]
    fn degenerate_boxes_are_empty() {
        // m = 1 has the single box B(0, 0) = ∅, so D = 0 - 0.
        let p = two_lattice().to_f64();
        assert_eq!(discrepancy_box_oracle(&p, 1), 0.0);
    }

    #[test]
    fn box_oracle_near_closed_form() {
        let p = two_lattice().to_f64();
        let est = discrepancy_box_oracle(&p, 64);
        assert!((est - 0.212459).abs() < 0.02, "{est}");
    }

    #[test]
    fn gamma_validation() {
        assert!(Gamma::parse("-1").is_err());
        assert!(Gamma::parse("13/2").unwrap().ensure_convex().is_err());
        assert!(Gamma::parse("6").unwrap().ensure_convex().is_ok());
        assert_eq!(Gamma::parse("0.5").unwrap().to_string(), "1/2");
        assert_eq!(Gamma::parse("6").unwrap().path_label(), "6_1");
    }

    #[test]
    fn scalar_modes_agree() {
        let p = two_lattice();
        let one = Gamma::integer(1).unwrap();
        let f = wce_squared_in(ScalarMode::Float, &p, &one);
        let e = wce_squared_in(ScalarMode::Exact, &p, &one);
        assert!(matches!(e, MetricValue::Exact(_)));
        assert!((f.to_f64() - e.to_f64()).abs() < 1e-15);
        let de = discrepancy_squared_in(ScalarMode::Exact, &p).to_f64();
        let df = discrepancy_squared_in(ScalarMode::Float, &p).to_f64();
        assert!((de - df).abs() < 1e-15);
    }
}

//! Points on the two-dimensional torus and the symmetries that leave the
//! worst-case error unchanged.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, Rational, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint<S = f64> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> TorusPoint<S> {
    /// Builds a point, reducing both coordinates into `[0, 1)`.
    pub fn wrapped(x: S, y: S) -> Self {
        TorusPoint { x: x.frac(), y: y.frac() }
    }

    fn in_unit_square(&self) -> bool {
        let zero = S::zero();
        let one = S::one();
        self.x >= zero && self.x < one && self.y >= zero && self.y < one
    }

    fn lex_cmp(&self, other: &Self) -> Ordering {
        self.x
            .partial_cmp(&other.x)
            .unwrap_or(Ordering::Equal)
            .then_with(|| self.y.partial_cmp(&other.y).unwrap_or(Ordering::Equal))
    }
}

/// An ordered configuration of N ≥ 1 points on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<S = f64> {
    points: Vec<TorusPoint<S>>,
}

impl<S: Scalar> PointSet<S> {
    pub fn new(points: Vec<TorusPoint<S>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("a point set needs at least one point".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.in_unit_square()) {
            return Err(Error::OutOfRange(format!("point {i} is not in [0,1)^2")));
        }
        Ok(PointSet { points })
    }

    pub fn from_coords(xs: Vec<S>, ys: Vec<S>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::SizeMismatch(xs.len(), ys.len()));
        }
        Self::new(xs.into_iter().zip(ys).map(|(x, y)| TorusPoint { x, y }).collect())
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[TorusPoint<S>] {
        &self.points
    }

    pub fn xs(&self) -> Vec<S> {
        self.points.iter().map(|p| p.x.clone()).collect()
    }

    pub fn ys(&self) -> Vec<S> {
        self.points.iter().map(|p| p.y.clone()).collect()
    }

    pub fn to_f64(&self) -> PointSet<f64> {
        PointSet {
            points: self
                .points
                .iter()
                .map(|p| TorusPoint::wrapped(p.x.to_f64(), p.y.to_f64()))
                .collect(),
        }
    }

    pub fn apply(&self, s: &TorusSymmetry<S>) -> Result<Self> {
        apply_symmetry(self, s)
    }
}

impl PointSet<f64> {
    /// Exact rational image of every coordinate.
    pub fn to_exact(&self) -> Result<PointSet<Rational>> {
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(TorusPoint {
                    x: rational_from_f64(p.x)?,
                    y: rational_from_f64(p.y)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PointSet { points })
    }
}

/// Generators of the group of torus maps preserving the worst-case error.
#[derive(Debug, Clone, PartialEq)]
pub enum TorusSymmetry<S = f64> {
    ShiftX(S),
    ShiftY(S),
    ReflectX,
    ReflectY,
    SwapXY,
    /// Point `i` of the result is point `perm[i]` of the input.
    Relabel(Vec<usize>),
}

impl<S: Scalar> TorusSymmetry<S> {
    pub fn inverse(&self) -> Self {
        match self {
            TorusSymmetry::ShiftX(c) => TorusSymmetry::ShiftX((S::zero() - c.clone()).frac()),
            TorusSymmetry::ShiftY(c) => TorusSymmetry::ShiftY((S::zero() - c.clone()).frac()),
            TorusSymmetry::Relabel(perm) => {
                let mut inv = vec![0; perm.len()];
                for (i, &p) in perm.iter().enumerate() {
                    if p < inv.len() {
                        inv[p] = i;
                    }
                }
                TorusSymmetry::Relabel(inv)
            }
            other => other.clone(),
        }
    }
}

pub fn apply_symmetry<S: Scalar>(p: &PointSet<S>, s: &TorusSymmetry<S>) -> Result<PointSet<S>> {
    let one = S::one();
    let points = match s {
        TorusSymmetry::ShiftX(c) => p
            .points
            .iter()
            .map(|q| TorusPoint::wrapped(q.x.clone() + c.clone(), q.y.clone()))
            .collect(),
        TorusSymmetry::ShiftY(c) => p
            .points
            .iter()
            .map(|q| TorusPoint::wrapped(q.x.clone(), q.y.clone() + c.clone()))
            .collect(),
        TorusSymmetry::ReflectX => p
            .points
            .iter()
            .map(|q| TorusPoint::wrapped(one.clone() - q.x.clone(), q.y.clone()))
            .collect(),
        TorusSymmetry::ReflectY => p
            .points
            .iter()
            .map(|q| TorusPoint::wrapped(q.x.clone(), one.clone() - q.y.clone()))
            .collect(),
        TorusSymmetry::SwapXY => p
            .points
            .iter()
            .map(|q| TorusPoint { x: q.y.clone(), y: q.x.clone() })
            .collect(),
        TorusSymmetry::Relabel(perm) => {
            check_permutation(perm, p.n())?;
            perm.iter().map(|&i| p.points[i].clone()).collect()
        }
    };
    Ok(PointSet { points })
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidSymmetry(format!(
            "relabeling of length {} for {n} points",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidSymmetry(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}

/// Shifts the lexicographically smallest point to the origin and sorts the
/// points by `(x, y)`.
pub fn normalize<S: Scalar>(p: &PointSet<S>) -> PointSet<S> {
    let anchor = p
        .points
        .iter()
        .min_by(|a, b| a.lex_cmp(b))
        .expect("point sets are non-empty")
        .clone();
    let mut points: Vec<_> = p
        .points
        .iter()
        .map(|q| TorusPoint::wrapped(q.x.clone() - anchor.x.clone(), q.y.clone() - anchor.y.clone()))
        .collect();
    points.sort_by(|a, b| a.lex_cmp(b));
    PointSet { points }
}

fn torus_gap<S: Scalar>(a: &S, b: &S) -> S {
    let d = (a.clone() - b.clone()).abs();
    let wrapped = S::one() - d.clone();
    if wrapped < d {
        wrapped
    } else {
        d
    }
}

fn within<S: Scalar>(a: &TorusPoint<S>, b: &TorusPoint<S>, tol: &S) -> bool {
    torus_gap(&a.x, &b.x) <= *tol && torus_gap(&a.y, &b.y) <= *tol
}

/// Whether `q` can be mapped onto `p` by torus symmetries, up to `tol` in
/// the torus max-metric.
///
/// Any error-preserving map taking `q` to `p` must send some point of `q`
/// onto `p[0]`, so the search runs over that anchor, the two reflections
/// and the coordinate swap.
pub fn equivalent<S: Scalar>(p: &PointSet<S>, q: &PointSet<S>, tol: &S) -> Result<bool> {
    if p.n() != q.n() {
        return Err(Error::SizeMismatch(p.n(), q.n()));
    }
    let target = &p.points[0];
    for mask in 0..8u8 {
        let mut image = q.clone();
        if mask & 1 != 0 {
            image = apply_symmetry(&image, &TorusSymmetry::ReflectX)?;
        }
        if mask & 2 != 0 {
            image = apply_symmetry(&image, &TorusSymmetry::ReflectY)?;
        }
        if mask & 4 != 0 {
            image = apply_symmetry(&image, &TorusSymmetry::SwapXY)?;
        }
        for anchor in &image.points {
            let dx = target.x.clone() - anchor.x.clone();
            let dy = target.y.clone() - anchor.y.clone();
            let shifted: Vec<_> = image
                .points
                .iter()
                .map(|r| TorusPoint::wrapped(r.x.clone() + dx.clone(), r.y.clone() + dy.clone()))
                .collect();
            if matches_as_sets(&p.points, &shifted, tol) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

fn matches_as_sets<S: Scalar>(a: &[TorusPoint<S>], b: &[TorusPoint<S>], tol: &S) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|pa| {
        match b
            .iter()
            .enumerate()
            .position(|(j, pb)| !used[j] && within(pa, pb, tol))
        {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_ratio(p, q)
    }

    fn exact(pts: &[(i64, i64, i64, i64)]) -> PointSet<Rational> {
        PointSet::new(
            pts.iter()
                .map(|&(a, b, c, d)| TorusPoint { x: r(a, b), y: r(c, d) })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn shift_wraps() {
        let p = exact(&[(0, 1, 0, 1), (1, 2, 1, 2)]);
        let q = apply_symmetry(&p, &TorusSymmetry::ShiftX(r(1, 2))).unwrap();
        assert_eq!(q, exact(&[(1, 2, 0, 1), (0, 1, 1, 2)]));
    }

    #[test]
    fn reflection_reduces_one_to_zero() {
        let p = exact(&[(0, 1, 0, 1), (1, 4, 3, 4)]);
        let q = apply_symmetry(&p, &TorusSymmetry::ReflectY).unwrap();
        assert_eq!(q, exact(&[(0, 1, 0, 1), (1, 4, 1, 4)]));
    }

    #[test]
    fn swap_exchanges_coordinates() {
        let p = exact(&[(0, 1, 0, 1), (1, 5, 3, 5)]);
        let q = apply_symmetry(&p, &TorusSymmetry::SwapXY).unwrap();
        assert_eq!(q, exact(&[(0, 1, 0, 1), (3, 5, 1, 5)]));
    }

    #[test]
    fn bad_relabel_is_rejected() {
        let p = exact(&[(0, 1, 0, 1), (1, 5, 3, 5)]);
        for perm in [vec![0, 0], vec![0], vec![0, 2]] {
            assert!(matches!(
                apply_symmetry(&p, &TorusSymmetry::Relabel(perm)),
                Err(Error::InvalidSymmetry(_))
            ));
        }
    }

    #[test]
    fn normalize_examples() {
        let p = exact(&[(1, 2, 1, 2), (0, 1, 0, 1)]);
        assert_eq!(normalize(&p), exact(&[(0, 1, 0, 1), (1, 2, 1, 2)]));
        let p = exact(&[(3, 10, 4, 10), (8, 10, 9, 10)]);
        assert_eq!(normalize(&p), exact(&[(0, 1, 0, 1), (1, 2, 1, 2)]));
        let p = exact(&[(7, 10, 2, 10)]);
        assert_eq!(normalize(&p), exact(&[(0, 1, 0, 1)]));
    }

    #[test]
    fn out_of_range_points_rejected() {
        assert!(PointSet::new(vec![TorusPoint { x: 1.0, y: 0.0 }]).is_err());
        assert!(PointSet::new(vec![TorusPoint { x: -0.1, y: 0.0 }]).is_err());
        assert!(PointSet::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let p = exact(&[(0, 1, 0, 1), (0, 1, 1, 2)]);
        let q = exact(&[(0, 1, 0, 1), (1, 2, 1, 2)]);
        assert!(equivalent(&p, &p, &r(0, 1)).unwrap());
        assert!(!equivalent(&p, &q, &r(0, 1)).unwrap());
        assert!(!equivalent(&q, &p, &r(0, 1)).unwrap());
        let one = exact(&[(0, 1, 0, 1)]);
        assert!(matches!(equivalent(&one, &p, &r(0, 1)), Err(Error::SizeMismatch(1, 2))));
    }

    #[test]
    fn equivalence_finds_composite_maps() {
        let p = exact(&[(0, 1, 0, 1), (1, 5, 3, 5), (2, 5, 1, 5), (3, 5, 4, 5), (4, 5, 2, 5)]);
        let mut q = p.clone();
        for s in [
            TorusSymmetry::SwapXY,
            TorusSymmetry::ShiftX(r(3, 7)),
            TorusSymmetry::ReflectY,
            TorusSymmetry::ShiftY(r(1, 3)),
            TorusSymmetry::Relabel(vec![4, 2, 0, 1, 3]),
        ] {
            q = apply_symmetry(&q, &s).unwrap();
        }
        assert!(equivalent(&p, &q, &r(0, 1)).unwrap());
        assert!(equivalent(&q, &p, &r(0, 1)).unwrap());
    }
}

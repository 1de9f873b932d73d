//! Plain-text point files: one point per line, two coordinates separated by
//! whitespace or a comma, each a decimal or a `p/q` fraction. Blank lines and
//! text after `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::torus::{PointSet, TorusPoint};
use num_traits::{One, Zero};

/// Parses point-file text into exact coordinates.
pub fn parse_points(text: &str) -> Result<PointSet<Rational>> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let fields: Vec<&str> = body.split(|c: char| c.is_whitespace() || c == ',').filter(|f| !f.is_empty()).collect();
        if fields.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected 2 coordinates, found {}", fields.len()) });
        }
        let mut coords = Vec::with_capacity(2);
        for f in fields {
            let v = parse_rational(f).map_err(|msg| Error::Parse { line, msg })?;
            if v < Rational::zero() || v >= Rational::one() {
                return Err(Error::Parse { line, msg: format!("coordinate {f} outside [0,1)") });
            }
            coords.push(v);
        }
        let y = coords.pop().unwrap();
        let x = coords.pop().unwrap();
        points.push(TorusPoint { x, y });
    }
    if points.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no points".into() });
    }
    PointSet::new(points)
}

pub fn read_points(path: &Path) -> Result<PointSet<Rational>> {
    parse_points(&std::fs::read_to_string(path)?)
}

/// Floating-point coordinates, printed with round-trip precision.
pub fn format_points_f64(p: &PointSet<f64>, header: &str) -> String {
    let mut s = comment(header);
    for q in p.points() {
        let _ = writeln!(s, "{:?} {:?}", q.x, q.y);
    }
    s
}

pub fn format_points_exact(p: &PointSet<Rational>, header: &str) -> String {
    let mut s = comment(header);
    for q in p.points() {
        let _ = writeln!(s, "{} {}", format_rational(&q.x), format_rational(&q.y));
    }
    s
}

fn comment(header: &str) -> String {
    header.lines().map(|l| format!("# {l}\n")).collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    #[test]
    fn parses_mixed_formats() {
        let p = parse_points("# header\n0 0\n1/2, 0.25  # trailing\n\n3e-1 2/3\n").unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.points()[1].y, Rational::from_ratio(1, 4));
        assert_eq!(p.points()[2].x, Rational::from_ratio(3, 10));
    }

    #[test]
    fn reports_line_numbers() {
        assert!(matches!(parse_points("0 0\n1 0.5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_points("0 0\n0.5\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_points("0 0\n\n0.5 abc\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_points("# nothing\n"), Err(Error::Parse { line: 0, .. })));
    }

    #[test]
    fn float_round_trip() {
        let p = PointSet::from_coords(vec![0.0, 0.1, 0.7123456789012345], vec![0.0, 0.6, 1.0 / 3.0]).unwrap();
        let q = parse_points(&format_points_f64(&p, "x\ny")).unwrap();
        assert_eq!(q.to_f64(), p);
        assert_eq!(parse_points(&format_points_exact(&q, "")).unwrap(), q);
    }
}

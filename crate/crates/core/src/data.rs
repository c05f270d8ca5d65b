//! Initial data mini-language:
//!
//! ```text
//! const:<c>                 f ≡ c
//! indicator:b=<b>           χ_{x>b}
//! scaled-indicator:b=<b>    (1/x)·χ_{x>b}
//! csv:<path>                rows "x,value", zero beyond the last row
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::domain::{Geometry, SampledFunction, SpatialGrid, Tail};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum DataSpec {
    Const(f64),
    Indicator { b: f64 },
    ScaledIndicator { b: f64 },
    Csv { path: PathBuf, points: Vec<(f64, f64)> },
}

fn spec_error(spec: &str, reason: impl Into<String>) -> Error {
    Error::DataSpec { spec: spec.to_string(), reason: reason.into() }
}

fn parse_b(spec: &str, rest: &str) -> Result<f64> {
    let value = rest
        .strip_prefix("b=")
        .ok_or_else(|| spec_error(spec, "expected `b=<number>`"))?;
    let b: f64 = value.trim().parse().map_err(|_| spec_error(spec, format!("`{value}` is not a number")))?;
    if !b.is_finite() {
        return Err(spec_error(spec, "b must be finite"));
    }
    Ok(b)
}

fn read_csv(spec: &str, path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(x), Ok(v)) => points.push((x, v)),
            _ if points.is_empty() && n == 0 => continue,
            _ => return Err(spec_error(spec, format!("line {}: expected `x,value`", n + 1))),
        }
    }
    if points.len() < 2 {
        return Err(spec_error(spec, "csv data need at least two rows"));
    }
    Ok(points)
}

/// Parses and, for `csv:`, loads the file.
pub fn parse_data_spec(s: &str) -> Result<DataSpec> {
    let s = s.trim();
    let (kind, rest) = s.split_once(':').ok_or_else(|| spec_error(s, "expected `<kind>:<argument>`"))?;
    match kind {
        "const" => {
            let c: f64 = rest.trim().parse().map_err(|_| spec_error(s, format!("`{rest}` is not a number")))?;
            if !c.is_finite() {
                return Err(spec_error(s, "constant must be finite"));
            }
            Ok(DataSpec::Const(c))
        }
        "indicator" => Ok(DataSpec::Indicator { b: parse_b(s, rest)? }),
        "scaled-indicator" => Ok(DataSpec::ScaledIndicator { b: parse_b(s, rest)? }),
        "csv" => {
            let path = PathBuf::from(rest);
            let points = read_csv(s, &path)?;
            Ok(DataSpec::Csv { path, points })
        }
        other => Err(spec_error(s, format!("unknown kind `{other}`"))),
    }
}

impl FromStr for DataSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_data_spec(s)
    }
}

impl fmt::Display for DataSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataSpec::Const(c) => write!(f, "const:{c}"),
            DataSpec::Indicator { b } => write!(f, "indicator:b={b}"),
            DataSpec::ScaledIndicator { b } => write!(f, "scaled-indicator:b={b}"),
            DataSpec::Csv { path, .. } => write!(f, "csv:{}", path.display()),
        }
    }
}

impl DataSpec {
    /// Largest data discontinuity or support feature, measured as a coordinate.
    pub fn feature_location(&self) -> f64 {
        match self {
            DataSpec::Const(_) => 0.0,
            DataSpec::Indicator { b } | DataSpec::ScaledIndicator { b } => *b,
            DataSpec::Csv { points, .. } => points.last().map(|p| p.0).unwrap_or(0.0),
        }
    }

    /// Whether `sup |x f(x)|` is finite (always true on the half-line for
    /// the purpose of the rate runs).
    pub fn decays_like_inverse_radius(&self) -> bool {
        match self {
            DataSpec::Const(c) => *c == 0.0,
            DataSpec::Indicator { .. } => false,
            DataSpec::ScaledIndicator { .. } | DataSpec::Csv { .. } => true,
        }
    }

    /// Rejects ball data without `1/r` decay.
    pub fn require_decay(&self, geometry: Geometry) -> Result<()> {
        if geometry.is_ball() && !self.decays_like_inverse_radius() {
            return Err(Error::DecayCondition(format!("`{self}` does not decay like 1/r")));
        }
        Ok(())
    }

    /// Samples the data on the default graded grid up to `r_max`.
    pub fn materialize(&self, geometry: Geometry, r_max: f64) -> Result<SampledFunction> {
        let x0 = geometry.boundary_coordinate();
        match self {
            DataSpec::Const(c) => {
                let grid = SpatialGrid::for_data(geometry, r_max, &[])?;
                let tail = if *c == 0.0 { Tail::Zero } else { Tail::Constant { c: *c } };
                SampledFunction::from_fn(geometry, grid, |_| *c, tail)
            }
            DataSpec::Indicator { b } | DataSpec::ScaledIndicator { b } => {
                let b = *b;
                if !(b > x0) {
                    return Err(spec_error(&self.to_string(), format!("b must exceed the boundary coordinate {x0}")));
                }
                if !(r_max > b) {
                    return Err(Error::invalid(format!("truncation radius {r_max} must exceed b = {b}")));
                }
                let scaled = matches!(self, DataSpec::ScaledIndicator { .. });
                let profile = move |x: f64| if scaled { 1.0 / x } else { 1.0 };
                let grid = SpatialGrid::for_data(geometry, r_max, &[b])?;
                let right = grid.nodes().iter().map(|&x| if x >= b { profile(x) } else { 0.0 }).collect();
                let left = grid.nodes().iter().map(|&x| if x > b { profile(x) } else { 0.0 }).collect();
                let tail = if scaled { Tail::DecayLikeOneOverR { k: 1.0 } } else { Tail::Constant { c: 1.0 } };
                SampledFunction::from_limits(geometry, grid, left, right, tail)
            }
            DataSpec::Csv { points, .. } => {
                let nodes: Vec<f64> = points.iter().map(|p| p.0).collect();
                if (nodes[0] - x0).abs() > 1e-12 {
                    return Err(spec_error(&self.to_string(), format!("first node must be the boundary coordinate {x0}")));
                }
                let grid = SpatialGrid::new(nodes).map_err(|e| spec_error(&self.to_string(), e.to_string()))?;
                SampledFunction::new(geometry, grid, points.iter().map(|p| p.1).collect(), Tail::Zero)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_the_examples() {
        assert_eq!(parse_data_spec("const:0").unwrap(), DataSpec::Const(0.0));
        assert_eq!(parse_data_spec("indicator:b=1").unwrap(), DataSpec::Indicator { b: 1.0 });
        assert_eq!(parse_data_spec("scaled-indicator:b=2").unwrap(), DataSpec::ScaledIndicator { b: 2.0 });
        for bad in ["", "const", "const:x", "indicator:1", "indicator:b=", "wave:b=2", "csv:/nonexistent/file.csv"] {
            assert!(parse_data_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn zero_constant_is_the_zero_function() {
        let f = parse_data_spec("const:0").unwrap().materialize(Geometry::half_line(), 10.0).unwrap();
        assert_eq!(f.sup_norm(), 0.0);
        assert!(f.pieces().is_empty());
    }

    #[test]
    fn scaled_indicator_on_the_ball() {
        let f = parse_data_spec("scaled-indicator:b=2").unwrap().materialize(Geometry::exterior_ball(), 50.0).unwrap();
        assert_eq!(f.eval(1.5).unwrap(), 0.0);
        assert!((f.eval(3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.decay_constant() - 1.0).abs() < 1e-15);
        assert_eq!(f.tail(), Tail::DecayLikeOneOverR { k: 1.0 });
    }

    #[test]
    fn indicator_on_the_half_line() {
        let f = parse_data_spec("indicator:b=1").unwrap().materialize(Geometry::half_line(), 20.0).unwrap();
        assert_eq!(f.eval(0.99).unwrap(), 0.0);
        assert_eq!(f.eval(1.5).unwrap(), 1.0);
        assert_eq!(f.tail(), Tail::Constant { c: 1.0 });
    }

    #[test]
    fn ball_indicator_is_rejected_for_decay() {
        let spec = parse_data_spec("indicator:b=2").unwrap();
        assert!(matches!(spec.require_decay(Geometry::exterior_ball()), Err(Error::DecayCondition(_))));
        assert!(spec.require_decay(Geometry::half_line()).is_ok());
    }

    #[test]
    fn csv_round_trip() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "x,value\n0,0\n0.5,0.25\n1,1\n2,0").unwrap();
        let spec = parse_data_spec(&format!("csv:{}", file.path().display())).unwrap();
        let f = spec.materialize(Geometry::half_line(), 0.0).unwrap();
        assert!((f.eval(0.75).unwrap() - 0.625).abs() < 1e-15);
        assert_eq!(f.eval(3.0).unwrap(), 0.0);
        assert!(spec.materialize(Geometry::exterior_ball(), 0.0).is_err());
    }
}

//! Generic `S₁` quadrature against the closed-form oracles.

use rayon::prelude::*;

use crate::data::parse_data_spec;
use crate::error::Result;
use crate::operators::s1_value;
use crate::oracles::{cases, OracleCase};

/// Worst relative error of one oracle case over its parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleComparison {
    pub name: &'static str,
    pub max_relative_error: f64,
    /// `(x, s)` where the worst error occurs.
    pub worst_point: (f64, f64),
    pub points: usize,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// Compares one case on an `n × n` grid: `x` uniform, `s` log-uniform.
pub fn compare_case(case: &OracleCase, n: usize) -> Result<OracleComparison> {
    let spec = parse_data_spec(&case.data_spec)?;
    let f = spec.materialize(case.geometry, spec.feature_location().max(case.x_range.1) + 10.0)?;
    let xs = linspace(case.x_range.0, case.x_range.1, n);
    let ss = logspace(case.s_range.0, case.s_range.1, n);
    let grid: Vec<(f64, f64)> = ss.iter().flat_map(|&s| xs.iter().map(move |&x| (x, s))).collect();
    let errors = grid
        .par_iter()
        .map(|&(x, s)| {
            let exact = (case.closed_form)(x, s);
            let approx = s1_value(case.geometry, s, &f, x)?;
            Ok(((approx - exact).abs() / exact.abs().max(f64::MIN_POSITIVE), (x, s)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (max_relative_error, worst_point) = errors
        .into_iter()
        .fold((0.0, (f64::NAN, f64::NAN)), |acc, e| if e.0 > acc.0 || e.0.is_nan() { e } else { acc });
    Ok(OracleComparison { name: case.name, max_relative_error, worst_point, points: grid.len() })
}

/// All four oracle cases on a `10 × 10` grid.
pub fn run_oracle_suite() -> Result<Vec<OracleComparison>> {
    cases().iter().map(|c| compare_case(c, 10)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = logspace(1e-2, 1e2, 5);
        assert!((l[2] - 1.0).abs() < 1e-14 && (l[4] - 100.0).abs() < 1e-11);
    }

    #[test]
    fn generic_path_matches_every_oracle() {
        for cmp in run_oracle_suite().unwrap() {
            assert!(cmp.max_relative_error <= 1e-8, "{cmp:?}");
        }
    }
}

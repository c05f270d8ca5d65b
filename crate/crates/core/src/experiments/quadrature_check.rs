//! Self-validation of the time quadrature: a solve with twice the
//! Gauss–Legendre nodes must reproduce every reported field value.

use crate::data::DataSpec;
use crate::domain::Geometry;
use crate::error::Result;
use crate::operators::ProblemData;
use crate::picard::{solve, SolverConfig};
use crate::quadrature::DEFAULT_NODES;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureCheck {
    pub label: String,
    /// Largest absolute change of `u`, `v`, `w` or `√t·∂_ν v` under doubling.
    pub max_change: f64,
    pub worst: String,
}

/// Solves with `nodes` and `2·nodes` and compares fields on an 8 × 8 probe
/// grid over `x_range × [T/10, T]` and the nodal traces.
pub fn quadrature_doubling(
    geometry: Geometry,
    data: &DataSpec,
    phi_b: f64,
    eps: f64,
    horizon: f64,
    x_range: (f64, f64),
    nodes: usize,
) -> Result<QuadratureCheck> {
    let phi = data.materialize(geometry, data.feature_location().max(x_range.1) + 10.0)?;
    let problem = ProblemData::new(geometry, eps, phi, phi_b)?;
    let cfg = SolverConfig { time_nodes: 128, energy_records: 0, quadrature_nodes: nodes, ..SolverConfig::new(horizon) };
    let a = solve(&problem, &cfg)?;
    let b = solve(&problem, &SolverConfig { quadrature_nodes: 2 * nodes, ..cfg })?;
    let mut max_change: f64 = 0.0;
    let mut worst = String::new();
    let mut note = |change: f64, what: String| {
        if change > max_change {
            max_change = change;
            worst = what;
        }
    };
    for (i, (p, q)) in a.v_trace().weighted_values().iter().zip(b.v_trace().weighted_values()).enumerate() {
        note((p - q).abs(), format!("trace node {i}"));
    }
    for i in 0..8 {
        let t = horizon * (0.1 + 0.9 * i as f64 / 7.0);
        for j in 0..8 {
            let x = x_range.0 + (x_range.1 - x_range.0) * j as f64 / 7.0;
            note((a.v(x, t)? - b.v(x, t)?).abs(), format!("v({x}, {t})"));
            note((a.w(x, t)? - b.w(x, t)?).abs(), format!("w({x}, {t})"));
            note((a.u(x, t)? - b.u(x, t)?).abs(), format!("u({x}, {t})"));
        }
    }
    Ok(QuadratureCheck { label: format!("{geometry} {data} phi_b={phi_b} eps={eps}"), max_change, worst })
}

/// The canonical instances of both geometries at `ε = 2⁻⁴, 2⁻⁸, 2⁻¹²`.
pub fn run_quadrature_checks() -> Result<Vec<QuadratureCheck>> {
    let mut out = Vec::new();
    for k in [4, 8, 12] {
        let eps = 2f64.powi(-k);
        out.push(quadrature_doubling(Geometry::half_line(), &DataSpec::Indicator { b: 1.0 }, 0.0, eps, 0.2, (0.0, 3.0), DEFAULT_NODES)?);
        out.push(quadrature_doubling(Geometry::exterior_ball(), &DataSpec::ScaledIndicator { b: 2.0 }, 1.0, eps, 0.2, (1.0, 6.0), DEFAULT_NODES)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_the_rule_changes_nothing_visible() {
        let c = quadrature_doubling(Geometry::half_line(), &DataSpec::Indicator { b: 1.0 }, 0.0, 2f64.powi(-6), 0.2, (0.0, 3.0), 32).unwrap();
        assert!(c.max_change < 1e-8, "{c:?}");
    }
}

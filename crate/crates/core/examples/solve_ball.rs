//! Exterior of the unit ball with `φ = (1/r)χ_{r>2}` and `φ_b = 1`,
//! compared against `S₂(t)φ_b = 1/(r eᵗ)`.

use dynbc::experiments::rate::s2_constant;
use dynbc::{solve, DataSpec, Geometry, ProblemData, SolverConfig};

fn main() -> dynbc::Result<()> {
    let g = Geometry::exterior_ball();
    let phi = DataSpec::ScaledIndicator { b: 2.0 }.materialize(g, 40.0)?;
    for eps in [2f64.powi(-4), 2f64.powi(-8)] {
        let data = ProblemData::new(g, eps, phi.clone(), 1.0)?;
        let pair = solve(&data, &SolverConfig::new(0.2))?;
        println!("eps = {eps}: {} iterations", pair.iterations());
        for r in [1.0, 1.5, 2.0, 4.0] {
            let u = pair.u(r, 0.1)?;
            println!("  r = {r}: u = {u:.6}  S2 phi_b = {:.6}", s2_constant(g, 1.0, r, 0.1)?);
        }
    }
    Ok(())
}

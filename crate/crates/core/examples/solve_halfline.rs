//! Solve the reduced half-space problem for `φ = χ_{x>1}`, `φ_b = 0` and
//! print `u = v + w` along a few heights.

use dynbc::{solve, DataSpec, Geometry, ProblemData, SolverConfig};

fn main() -> dynbc::Result<()> {
    let g = Geometry::half_line();
    let phi = DataSpec::Indicator { b: 1.0 }.materialize(g, 20.0)?;
    let data = ProblemData::new(g, 0.05, phi, 0.0)?;
    let pair = solve(&data, &SolverConfig::new(0.2))?;
    println!("iterations {}, q bound {:.4}, observed ratio {:.4}", pair.iterations(), pair.q_bound(), pair.q_observed());
    for x in [0.0, 0.5, 1.0, 1.5, 3.0] {
        println!("x = {x:>4}: v = {:+.6e}  w = {:+.6e}  u = {:+.6e}", pair.v(x, 0.2)?, pair.w(x, 0.2)?, pair.u(x, 0.2)?);
    }
    for e in pair.energy().iter().step_by(4) {
        println!("E_eps(t = {:.3}) = {:.6}", e.t, e.e_eps);
    }
    Ok(())
}

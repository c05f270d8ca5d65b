//! Pointwise lower bound `u_ε ≥ C√ε` on K with the constant recipe, plus the
//! `I(ε,t,x) > 1/2` prerequisite.

use dynbc::experiments::{run_lower_bound_check, LowerBoundSetup};

fn main() -> dynbc::Result<()> {
    for setup in [LowerBoundSetup::halfline_default(), LowerBoundSetup::ball_default()] {
        let r = run_lower_bound_check(&setup)?;
        println!("{}: C~ = {:.4}, recipe margin {:.4}, C = {:.4}, eps0 = {:.3e}", r.geometry, r.c_tilde, r.recipe_margin, r.constant, r.eps0);
        for p in &r.points {
            println!("  eps = {:.3e}  min u/sqrt(eps) = {:.4}  I_min = {:.4}  violations {}", p.eps, p.observed_constant, p.i_min, p.violations);
        }
        println!("  passed: {}", r.passed());
    }
    Ok(())
}

//! Every operator inequality on randomized inputs with the frozen constants.

use dynbc::experiments::{run_bound_suite, SuiteConfig};
use dynbc::Geometry;

fn main() -> dynbc::Result<()> {
    let cfg = SuiteConfig::default();
    for g in [Geometry::half_line(), Geometry::exterior_ball()] {
        let report = run_bound_suite(g, &cfg)?;
        println!("{g} (seed {})", report.seed);
        for r in &report.inequalities {
            println!("  {:<22} C = {:<8.4} margin {:>10.4}  {}", r.id, r.constant.value(), r.worst_margin, if r.pass { "ok" } else { "VIOLATED" });
        }
    }
    Ok(())
}

//! Measured `‖D̃_ε v‖/‖v‖` and Picard step ratios against the contraction
//! factor on the exterior of the ball.

use dynbc::experiments::suite::contraction_cases;
use dynbc::experiments::SuiteConfig;

fn main() -> dynbc::Result<()> {
    for c in contraction_cases(&SuiteConfig::default())? {
        println!("eps = {:<5} T = {:<5} q = {:.4}  measured {:.4}  picard {:.4}  {}", c.eps, c.horizon, c.q_bound, c.measured, c.picard_ratio, if c.pass { "ok" } else { "fail" });
    }
    Ok(())
}

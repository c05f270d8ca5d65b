//! Indicator data on the exterior of the ball do not decay under `S₁`:
//! `S₁(s)χ_{r>b}(r) → 1 − 1/r`.

use dynbc::oracles::{long_time_exterior_limit, s1_exterior_indicator};

fn main() -> dynbc::Result<()> {
    let (r, b) = (2.0, 2.0);
    for s in [1.0, 1e2, 1e4, 1e6, 1e8] {
        println!("s = {s:>6.0e}: S1(s)chi(r=2) = {:.6}", s1_exterior_indicator(s, r, b)?);
    }
    println!("limit 1 - 1/r = {}", long_time_exterior_limit(r, b)?);
    let check = dynbc::experiments::suite::non_decay_check()?;
    println!("check at s = {:e}: {:.6} vs {} ({})", check.s, check.value, check.limit, if check.pass { "ok" } else { "fail" });
    Ok(())
}

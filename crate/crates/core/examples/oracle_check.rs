//! Generic `S₁` quadrature against the closed forms.

use dynbc::experiments::run_oracle_suite;

fn main() -> dynbc::Result<()> {
    let t = std::time::Instant::now();
    for c in run_oracle_suite()? {
        println!("{:<26} max rel. error {:.3e} at {:?} ({} points)", c.name, c.max_relative_error, c.worst_point, c.points);
    }
    println!("{:.2?}", t.elapsed());
    Ok(())
}

//! Doubling the Gauss–Legendre rule must leave every reported value unchanged.

use dynbc::experiments::run_quadrature_checks;

fn main() -> dynbc::Result<()> {
    for c in run_quadrature_checks()? {
        println!("{:<50} max change {:.3e} ({})", c.label, c.max_change, c.worst);
    }
    Ok(())
}

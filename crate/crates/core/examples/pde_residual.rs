//! Finite-difference residuals of the reconstructed fields.

use dynbc::experiments::ResidualInstance;

fn main() -> dynbc::Result<()> {
    for inst in [ResidualInstance::halfline(), ResidualInstance::ball()] {
        let r = inst.run()?;
        println!(
            "{}: pde {:.3e} (worst at {:?}), boundary {:.3e}, harmonicity {:.3e}",
            inst.geometry, r.pde, r.worst_pde_point, r.boundary, r.harmonic
        );
    }
    Ok(())
}

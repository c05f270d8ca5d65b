//! The initial-data mini-language.

use dynbc::{parse_data_spec, Geometry};

fn main() -> dynbc::Result<()> {
    for s in ["const:0", "indicator:b=1", "scaled-indicator:b=2"] {
        let spec = parse_data_spec(s)?;
        for g in [Geometry::half_line(), Geometry::exterior_ball()] {
            match spec.require_decay(g) {
                Ok(()) => {
                    let f = spec.materialize(g, 50.0)?;
                    println!("{s:<22} {g:<8} sup {:.3}  sup|x f| {:.3}  tail {:?}", f.sup_norm(), f.decay_constant(), f.tail());
                }
                Err(e) => println!("{s:<22} {g:<8} rejected: {e}"),
            }
        }
    }
    Ok(())
}

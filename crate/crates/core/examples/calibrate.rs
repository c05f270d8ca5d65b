//! Re-runs the constant calibration; compare with the frozen table.

use dynbc::calibration::{calibrate, DEFAULT_SEED, FROZEN};

fn main() -> dynbc::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let fresh = calibrate(seed)?;
    println!("seed {seed}");
    println!("fresh  {fresh:#?}");
    println!("frozen {FROZEN:#?}");
    Ok(())
}

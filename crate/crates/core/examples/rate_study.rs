//! Deviation `sup |u_ε − S₂φ_b|` over `K × (τ₁, τ₂)` against ε with a
//! log-log fit. Pass `ball` for the exterior problem.

use dynbc::experiments::{run_rate_study, RateStudy};

fn main() -> dynbc::Result<()> {
    let study = match std::env::args().nth(1).as_deref() {
        Some("ball") => RateStudy::ball_default(0.0),
        _ => RateStudy::halfline_default(),
    };
    let report = run_rate_study(&study)?;
    for p in &report.points {
        println!("eps = {:.3e}  deviation = {:.6e}  at {:?}", p.eps, p.deviation, p.argmax);
    }
    for w in report.points.windows(2) {
        let local = (w[0].deviation / w[1].deviation).ln() / (w[0].eps / w[1].eps).ln();
        println!("local slope {:.3e}..{:.3e}: {local:.4}", w[0].eps, w[1].eps);
    }
    let f = report.fit;
    println!("slope {:.4}, intercept {:.4}, max residual {:.4}, monotone {}", f.slope, f.intercept, f.max_residual, report.monotone);
    Ok(())
}

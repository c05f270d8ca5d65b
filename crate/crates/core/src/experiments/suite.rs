//! Randomized check of the semigroup and potential inequalities, the
//! contraction estimate and the non-decay example.
//!
//! Every inequality has the form `measured ≤ C·shape`. The suite records the
//! largest ratio `measured/shape` over all draws and reports the margin
//! `C / max ratio`; a margin below 1 is a violation.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calibration::{Calibration, DEFAULT_SEED, FROZEN};
use crate::data::DataSpec;
use crate::domain::{Geometry, SampledFunction, SpatialGrid, Tail};
use crate::error::{Error, Result};
use crate::kernels::s2_kernel_ball;
use crate::operators::{d_eps_with_derivative, s1_value, apply_s1_derivative, PreparedTrace, ProblemData};
use crate::picard::{contraction_factor, solve, SolverConfig};
use crate::quadrature::GaussRule;

/// Height `L` below which the half-line `S₁` smallness bound is checked.
pub const SMALLNESS_HEIGHT: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constant {
    /// Read off the proof.
    Explicit(f64),
    /// Empirical sup with 2× headroom, frozen in [`crate::calibration`].
    Calibrated(f64),
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Explicit(c) | Constant::Calibrated(c) => c,
        }
    }
}

/// Largest `measured/shape` over the draws, with the worst input.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRecord {
    pub id: &'static str,
    pub max_ratio: f64,
    pub witness: String,
    pub evaluations: usize,
}

impl RatioRecord {
    fn new(id: &'static str) -> Self {
        RatioRecord { id, max_ratio: 0.0, witness: String::new(), evaluations: 0 }
    }

    fn record(&mut self, measured: f64, shape: f64, witness: impl FnOnce() -> String) {
        self.evaluations += 1;
        let ratio = if measured == 0.0 {
            0.0
        } else if shape > 0.0 {
            measured / shape
        } else {
            f64::INFINITY
        };
        if ratio > self.max_ratio || ratio.is_nan() {
            self.max_ratio = ratio;
            self.witness = witness();
        }
    }

    fn merge(mut self, other: RatioRecord) -> RatioRecord {
        self.evaluations += other.evaluations;
        if other.max_ratio > self.max_ratio || other.max_ratio.is_nan() {
            self.max_ratio = other.max_ratio;
            self.witness = other.witness;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityResult {
    pub id: &'static str,
    pub constant: Constant,
    pub max_ratio: f64,
    /// `C / max ratio`; infinite when every measured value vanished.
    pub worst_margin: f64,
    pub witness: String,
    pub evaluations: usize,
    pub pass: bool,
}

/// One `(ε, T)` cell of the contraction check.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionCase {
    pub eps: f64,
    pub horizon: f64,
    pub q_bound: f64,
    /// Largest `‖D̃_ε v‖_{X_T} / ‖v‖_{X_T}` over the random traces.
    pub measured: f64,
    /// Largest ratio of successive Picard steps on the model problem.
    pub picard_ratio: f64,
    pub pass: bool,
}

/// `S₁(s)χ_{r>b}` at `r = 2`, `s = 10⁶` against `1 − 1/r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonDecayCheck {
    pub s: f64,
    pub r: f64,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub geometry: Geometry,
    pub seed: u64,
    pub inequalities: Vec<InequalityResult>,
    pub contraction: Vec<ContractionCase>,
    pub non_decay: Option<NonDecayCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.inequalities.iter().all(|r| r.pass)
            && self.contraction.iter().all(|c| c.pass)
            && self.non_decay.is_none_or(|n| n.pass)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub draws: usize,
    /// Diffusion parameters for the potential bounds.
    pub eps: Vec<f64>,
    /// Times for the potential bounds (at most `trace_horizon`).
    pub times: Vec<f64>,
    /// Semigroup times for the `S₁` bounds.
    pub semigroup_times: Vec<f64>,
    /// Distances to the boundary of the spatial probes.
    pub distances: Vec<f64>,
    pub trace_horizon: f64,
    pub trace_nodes: usize,
    /// `(ε, T)` cells of the contraction check.
    pub contraction_cells: Vec<(f64, f64)>,
    /// Replace every random input by zero.
    pub zero_inputs: bool,
    pub constants: Calibration,
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

impl SuiteConfig {
    pub fn new(seed: u64) -> Self {
        let mut distances = vec![0.0];
        distances.extend(logspace(1e-3, 50.0, 16));
        let cells = [0.01, 0.05, 0.1];
        SuiteConfig {
            seed,
            draws: 20,
            eps: vec![1e-3, 1e-2, 1e-1, 0.5],
            times: logspace(1e-3, 1.0, 5),
            semigroup_times: logspace(1e-3, 1e2, 6),
            distances,
            trace_horizon: 1.0,
            trace_nodes: 16,
            contraction_cells: cells.iter().flat_map(|&e| cells.iter().map(move |&t| (e, t))).collect(),
            zero_inputs: false,
            constants: FROZEN,
        }
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig::new(DEFAULT_SEED)
    }
}

/// The inequality ids checked on each geometry, in report order.
pub fn inequality_ids(geometry: Geometry) -> &'static [&'static str] {
    if geometry.is_ball() {
        &[
            "s1-sup",
            "s1-decay-gain",
            "s1-radial-derivative",
            "s2-sup",
            "d-eps-sup",
            "d-eps-radial",
            "dtilde-sup",
            "dtilde-radial",
            "dtilde-contraction",
            "w-minus-s2",
        ]
    } else {
        &[
            "s1-sup",
            "s1-gradient",
            "s1-smallness",
            "s2-sup",
            "d-eps-sup",
            "d-eps-gradient",
            "d-eps-smallness",
            "dtilde-smallness",
            "w-minus-s2",
        ]
    }
}

/// The constant each inequality is checked with.
pub fn constant_for(geometry: Geometry, id: &str, cal: &Calibration) -> Constant {
    use Constant::{Calibrated, Explicit};
    match (geometry.is_ball(), id) {
        (false, "s1-smallness") => Calibrated(cal.s1_smallness_halfline),
        (false, "dtilde-smallness") => Calibrated(cal.dtilde_halfline),
        // D_ε vanishes identically for data independent of x′
        (false, "d-eps-sup" | "d-eps-gradient" | "d-eps-smallness") => Explicit(1.0),
        (true, "d-eps-sup") => Calibrated(cal.d_eps_ball),
        (true, "d-eps-radial") => Calibrated(cal.d_eps_radial_ball),
        (true, "s1-radial-derivative") => Explicit(2.0),
        (_, "w-minus-s2") => Explicit(2.0),
        _ => Explicit(1.0),
    }
}

struct Draw {
    phi: SampledFunction,
    psi: f64,
    trace: PreparedTrace,
    /// `sup |√τ g(τ)|`.
    weighted_sup: f64,
}

fn random_data(rng: &mut ChaCha8Rng, geometry: Geometry, zero: bool) -> Result<SampledFunction> {
    let x0 = geometry.boundary_coordinate();
    let n = rng.random_range(4..12usize);
    let mut nodes = vec![x0];
    for _ in 1..n {
        let last = nodes[nodes.len() - 1];
        nodes.push(last + rng.random_range(0.05..1.0));
    }
    let values = nodes.iter().map(|_| if zero { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
    SampledFunction::new(geometry, SpatialGrid::new(nodes)?, values, Tail::Zero)
}

fn random_trace(rng: &mut ChaCha8Rng, geometry: Geometry, horizon: f64, n: usize, zero: bool) -> (PreparedTrace, f64) {
    let sigma: Vec<f64> = (0..=n).map(|i| horizon.sqrt() * i as f64 / n as f64).collect();
    let q: Vec<f64> = sigma.iter().map(|_| if zero { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
    let sup = q.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (PreparedTrace::from_weighted(geometry, sigma, q, GaussRule::default()), sup)
}

fn draws(geometry: Geometry, cfg: &SuiteConfig) -> Result<Vec<Draw>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.draws)
        .map(|_| {
            let phi = random_data(&mut rng, geometry, cfg.zero_inputs)?;
            let psi = if cfg.zero_inputs { 0.0 } else { rng.random_range(-2.0..2.0) };
            let (trace, weighted_sup) = random_trace(&mut rng, geometry, cfg.trace_horizon, cfg.trace_nodes, cfg.zero_inputs);
            Ok(Draw { phi, psi, trace, weighted_sup })
        })
        .collect()
}

fn ratios_for_draw(geometry: Geometry, cfg: &SuiteConfig, k: usize, d: &Draw) -> Result<Vec<RatioRecord>> {
    let ids = inequality_ids(geometry);
    let mut recs: Vec<RatioRecord> = ids.iter().map(|&id| RatioRecord::new(id)).collect();
    let idx = |id: &str| ids.iter().position(|&i| i == id).expect("known inequality id");
    let x0 = geometry.boundary_coordinate();
    let norm = d.phi.sup_norm();
    let decay = d.phi.decay_constant();
    let rule = GaussRule::default();

    for &s in &cfg.semigroup_times {
        for &y in &cfg.distances {
            let x = x0 + y;
            let v = s1_value(geometry, s, &d.phi, x)?.abs();
            let dv = apply_s1_derivative(geometry, s, &d.phi, x)?.abs();
            let w = || format!("draw {k}, s = {s:e}, x = {x:e}");
            recs[idx("s1-sup")].record(v, norm, w);
            if geometry.is_ball() {
                let r = x;
                if r > 1.0 {
                    recs[idx("s1-decay-gain")].record(v, (r - 1.0) * decay / (r * (PI * s).sqrt()), w);
                }
                recs[idx("s1-radial-derivative")].record(dv, decay / (PI * s).sqrt(), w);
            } else {
                recs[idx("s1-gradient")].record(s.sqrt() * dv, norm, w);
                if y <= SMALLNESS_HEIGHT {
                    recs[idx("s1-smallness")].record(v, norm / s.sqrt(), w);
                }
            }
        }
    }

    for &eps in &cfg.eps {
        let semi = d.weighted_sup / eps.sqrt();
        for &t in cfg.times.iter().filter(|&&t| t <= cfg.trace_horizon) {
            let a = d.trace.cumulative(t)?;
            for &y in &cfg.distances {
                let x = x0 + y;
                let w = || format!("draw {k}, eps = {eps:e}, t = {t:e}, x = {x:e}");
                let s2 = if geometry.is_ball() { s2_kernel_ball(d.psi, x, t)? } else { d.psi };
                recs[idx("s2-sup")].record(s2.abs(), d.psi.abs(), w);
                let (de, dde) = d_eps_with_derivative(geometry, d.psi, eps, x, t, &rule)?;
                let (dt, ddt) = d.trace.d_tilde(eps, x, t)?;
                let se = eps.sqrt();
                if geometry.is_ball() {
                    recs[idx("d-eps-sup")].record(de.abs(), (eps * t).sqrt() * d.psi.abs(), w);
                    recs[idx("d-eps-radial")].record(dde.abs(), (eps * t).sqrt() * d.psi.abs(), w);
                    let base = (eps * PI).sqrt() * d.weighted_sup;
                    recs[idx("dtilde-sup")].record(dt.abs(), base * (1.0 + t), w);
                    recs[idx("dtilde-radial")].record(ddt.abs(), base * (1.0 + 2.0 * t.sqrt() + 2.0 * t), w);
                } else {
                    let p = d.psi.abs();
                    recs[idx("d-eps-sup")].record(de.abs(), t.powf(0.25) * (se + t.powf(0.75)) * p, w);
                    recs[idx("d-eps-gradient")].record(dde.abs(), eps.powf(0.75) * t.powf(-0.25) * p, w);
                    recs[idx("d-eps-smallness")].record(de.max(0.0), p * se * (t.powf(0.25) + t.sqrt()), w);
                    let shape = se * semi * (t.sqrt() + se * t.powf(0.75) + t);
                    recs[idx("dtilde-smallness")].record(dt.abs(), shape, w);
                }
                let y_dist = geometry.distance(x)?;
                recs[idx("w-minus-s2")].record((geometry.weight(y_dist) * a).abs(), (eps * t).sqrt() * semi, w);
            }
        }
    }
    Ok(recs)
}

/// `sup_t (sup_x |D̃_ε v| + √(t/ε) sup_x |∂_x D̃_ε v|)` over the trace nodes and midpoints.
pub fn dtilde_xt_norm(trace: &PreparedTrace, eps: f64, distances: &[f64]) -> Result<f64> {
    let g = trace.geometry();
    let sigma = trace.sigma();
    let mut times = Vec::with_capacity(2 * sigma.len());
    for w in sigma.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        times.push(mid * mid);
        times.push(w[1] * w[1]);
    }
    let mut best: f64 = 0.0;
    for t in times {
        let (mut sv, mut sd): (f64, f64) = (0.0, 0.0);
        for &y in distances {
            let (v, d) = trace.d_tilde(eps, g.boundary_coordinate() + y, t)?;
            sv = sv.max(v.abs());
            sd = sd.max(d.abs());
        }
        best = best.max(sv + (t / eps).sqrt() * sd);
    }
    Ok(best)
}

/// Contraction of `D̃_ε` on random traces and the Picard step ratios of
/// the ball model problem `(1/r)χ_{r>2}`, `φ_b = 1`.
pub fn contraction_cases(cfg: &SuiteConfig) -> Result<Vec<ContractionCase>> {
    let g = Geometry::exterior_ball();
    let phi = DataSpec::ScaledIndicator { b: 2.0 }.materialize(g, 20.0)?;
    cfg.contraction_cells
        .par_iter()
        .enumerate()
        .map(|(cell, &(eps, horizon))| {
            let q_bound = contraction_factor(g, eps, horizon);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1 + cell as u64));
            let mut measured: f64 = 0.0;
            for _ in 0..cfg.draws {
                let (trace, sup) = random_trace(&mut rng, g, horizon, cfg.trace_nodes, cfg.zero_inputs);
                if sup == 0.0 {
                    continue;
                }
                let norm = dtilde_xt_norm(&trace, eps, &cfg.distances)?;
                measured = measured.max(norm / (sup / eps.sqrt()));
            }
            let data = ProblemData::new(g, eps, phi.clone(), 1.0)?;
            let pair = solve(&data, &SolverConfig { time_nodes: 64, energy_records: 0, ..SolverConfig::new(horizon) })?;
            let picard_ratio = pair.q_observed();
            let pass = measured <= q_bound && picard_ratio <= q_bound + 0.05;
            Ok(ContractionCase { eps, horizon, q_bound, measured, picard_ratio, pass })
        })
        .collect()
}

/// `S₁(10⁶)χ_{r>2}` at `r = 2` through the generic quadrature.
pub fn non_decay_check() -> Result<NonDecayCheck> {
    let g = Geometry::exterior_ball();
    let phi = DataSpec::Indicator { b: 2.0 }.materialize(g, 20.0)?;
    let (s, r) = (1e6, 2.0);
    let value = s1_value(g, s, &phi, r)?;
    let limit = 1.0 - 1.0 / r;
    Ok(NonDecayCheck { s, r, value, limit, pass: (value - limit).abs() <= 1e-2 })
}

/// Worst ratios of every inequality, before constants are attached.
pub fn measure_ratios(geometry: Geometry, cfg: &SuiteConfig) -> Result<Vec<RatioRecord>> {
    if cfg.times.iter().any(|&t| !(t > 0.0)) || cfg.semigroup_times.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("suite times must be positive"));
    }
    if cfg.eps.iter().any(|&e| !(e > 0.0 && e < geometry.eps_limit())) {
        return Err(Error::invalid(format!("suite eps values must lie in (0, {:.6})", geometry.eps_limit())));
    }
    let all = draws(geometry, cfg)?;
    let per_draw = all
        .par_iter()
        .enumerate()
        .map(|(k, d)| ratios_for_draw(geometry, cfg, k, d))
        .collect::<Result<Vec<_>>>()?;
    let mut merged: Vec<RatioRecord> = inequality_ids(geometry).iter().map(|&id| RatioRecord::new(id)).collect();
    for recs in per_draw {
        merged = merged.into_iter().zip(recs).map(|(a, b)| a.merge(b)).collect();
    }
    Ok(merged)
}

fn finish(id: &'static str, constant: Constant, max_ratio: f64, witness: String, evaluations: usize) -> InequalityResult {
    let worst_margin = if max_ratio == 0.0 { f64::INFINITY } else { constant.value() / max_ratio };
    InequalityResult { id, constant, max_ratio, worst_margin, witness, evaluations, pass: worst_margin >= 1.0 }
}

/// Every inequality of the geometry on `cfg.draws` random inputs.
pub fn run_bound_suite(geometry: Geometry, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let ratios = measure_ratios(geometry, cfg)?;
    let (contraction, non_decay) = if geometry.is_ball() {
        (contraction_cases(cfg)?, Some(non_decay_check()?))
    } else {
        (Vec::new(), None)
    };
    let mut inequalities = Vec::with_capacity(ratios.len());
    for rec in ratios {
        if rec.id == "dtilde-contraction" {
            let worst = contraction
                .iter()
                .map(|c| (c.measured / c.q_bound, format!("eps = {}, T = {}", c.eps, c.horizon)))
                .fold((0.0, String::new()), |a, b| if b.0 > a.0 { b } else { a });
            let evals = contraction.len() * cfg.draws;
            inequalities.push(finish(rec.id, Constant::Explicit(1.0), worst.0, worst.1, evals));
            continue;
        }
        let c = constant_for(geometry, rec.id, &cfg.constants);
        inequalities.push(finish(rec.id, c, rec.max_ratio, rec.witness, rec.evaluations));
    }
    Ok(SuiteReport { geometry, seed: cfg.seed, inequalities, contraction, non_decay })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SuiteConfig {
        SuiteConfig {
            draws: 3,
            eps: vec![1e-2, 0.3],
            times: vec![0.01, 0.5],
            semigroup_times: vec![1e-2, 1.0],
            distances: vec![0.0, 0.1, 1.0, 5.0],
            contraction_cells: vec![(0.01, 0.01)],
            ..SuiteConfig::new(seed)
        }
    }

    #[test]
    fn zero_inputs_hold_trivially() {
        for g in [Geometry::half_line(), Geometry::exterior_ball()] {
            let cfg = SuiteConfig { zero_inputs: true, ..small(1) };
            let report = run_bound_suite(g, &cfg).unwrap();
            for r in &report.inequalities {
                assert_eq!(r.max_ratio, 0.0, "{}", r.id);
                assert!(r.pass);
            }
            assert!(report.passed());
        }
    }

    #[test]
    fn explicit_bounds_hold_on_small_draws() {
        for g in [Geometry::half_line(), Geometry::exterior_ball()] {
            let report = run_bound_suite(g, &small(7)).unwrap();
            for r in report.inequalities.iter().filter(|r| matches!(r.constant, Constant::Explicit(_))) {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn halfline_d_eps_vanishes() {
        let ratios = measure_ratios(Geometry::half_line(), &small(3)).unwrap();
        for r in ratios.iter().filter(|r| r.id.starts_with("d-eps")) {
            assert_eq!(r.max_ratio, 0.0);
            assert!(r.evaluations > 0);
        }
    }

    #[test]
    fn non_decay_example() {
        let c = non_decay_check().unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn contraction_example_cell() {
        let cases = contraction_cases(&small(11)).unwrap();
        let c = &cases[0];
        assert!((c.q_bound - 0.0395).abs() < 5e-4);
        assert!(c.measured > 0.0 && c.measured <= c.q_bound, "{c:?}");
        assert!(c.picard_ratio <= c.q_bound + 0.05);
    }

    #[test]
    fn margins_follow_constants() {
        let r = finish("x", Constant::Calibrated(2.0), 1.0, String::new(), 1);
        assert_eq!(r.worst_margin, 2.0);
        assert!(r.pass);
        let r = finish("x", Constant::Explicit(1.0), 2.0, String::new(), 1);
        assert!(!r.pass);
    }
}

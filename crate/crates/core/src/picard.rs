//! Picard iteration for `v = Q_ε[v]` on the boundary trace, reconstruction
//! of `v_ε`, `w_ε`, `u_ε = v_ε + w_ε`, and finite-difference residual checks.
//!
//! The unknown is `q(t) = √t·∂_ν v(∂Ω, t)` at the nodes of the time grid. One
//! Picard step is
//!
//! ```text
//! g_new(t) = ∂_ν S₁(t/ε)Φ − λφ_b√(ε/π)∫₀^t e^{−λs}(t−s)^{−1/2} ds + √(ε/π)∫₀^t h(s)(t−s)^{−1/2} ds
//! ```
//!
//! with `h = −g + λ∫₀^t e^{−λ(t−s)} g(s) ds`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::domain::{xt_norm, BoundaryTrace, EnergyRecord, Geometry, SampledFunction, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::exp_clamped;
use crate::operators::{f1, q_eps_prepared, PreparedTrace, ProblemData};
use crate::quadrature::{smooth_history_integral, GaussRule, TimeKernel, DEFAULT_NODES};

/// Contraction factor of `v ↦ D̃_ε[v]` in `X_T`.
///
/// Ball: `(ε(1+T) + √ε(√T + 2T + 2T√T))√π`. Half-line: `(2 + √π)√(εT)`.
pub fn contraction_factor(geometry: Geometry, eps: f64, horizon: f64) -> f64 {
    let (se, st) = (eps.sqrt(), horizon.sqrt());
    if geometry.is_ball() {
        (eps * (1.0 + horizon) + se * (st + 2.0 * horizon + 2.0 * horizon * st)) * PI.sqrt()
    } else {
        (2.0 + PI.sqrt()) * se * st
    }
}

/// Largest horizon (up to `cap`) whose contraction factor is at most `target`.
pub fn horizon_for_factor(geometry: Geometry, eps: f64, target: f64, cap: f64) -> f64 {
    if contraction_factor(geometry, eps, cap) <= target {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if contraction_factor(geometry, eps, mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// A priori bound on `‖v_ε‖_{X_T}` for ball data:
/// `(‖φ‖ + (1 + 2/√π + 8/√π)|φ_b| + (2/√π)·sup|rφ|)/(1 − q)`.
pub fn ball_solution_bound(data: &ProblemData, q: f64) -> f64 {
    let c = 4.0 / PI.sqrt();
    let k = data.phi().decay_constant();
    (data.phi().sup_norm() + (1.0 + 2.0 / PI.sqrt() + 2.0 * c) * data.phi_b().abs() + 2.0 / PI.sqrt() * k) / (1.0 - q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Final time `T`.
    pub horizon: f64,
    /// Length of one continuation segment; `None` picks the largest segment
    /// with contraction factor at most 1/2 when continuing, else `T`.
    pub t_star: Option<f64>,
    /// Time nodes per segment.
    pub time_nodes: usize,
    pub max_iterations: usize,
    /// Stop when successive traces differ by less than this in `X_T`.
    pub tolerance_xt: f64,
    /// Solve segment by segment, freezing the history.
    pub continuation: bool,
    pub quadrature_nodes: usize,
    /// Number of `E_ε` records computed after convergence.
    pub energy_records: usize,
}

impl SolverConfig {
    pub fn new(horizon: f64) -> Self {
        SolverConfig {
            horizon,
            t_star: None,
            time_nodes: 256,
            max_iterations: 200,
            tolerance_xt: 1e-9,
            continuation: false,
            quadrature_nodes: DEFAULT_NODES,
            energy_records: 16,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::invalid(format!("horizon must be positive, got {}", self.horizon)));
        }
        if let Some(ts) = self.t_star {
            if !(ts > 0.0) {
                return Err(Error::invalid(format!("T_star must be positive, got {ts}")));
            }
        }
        if self.time_nodes < 2 || self.max_iterations == 0 || self.quadrature_nodes == 0 {
            return Err(Error::invalid("time nodes >= 2, iterations >= 1 and quadrature nodes >= 1 required"));
        }
        if !(self.tolerance_xt > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(())
    }

    fn segment_length(&self, geometry: Geometry, eps: f64) -> f64 {
        match (self.t_star, self.continuation) {
            (Some(ts), _) => ts.min(self.horizon),
            (None, true) => horizon_for_factor(geometry, eps, 0.5, self.horizon),
            (None, false) => self.horizon,
        }
    }
}

/// Segment end times and the time grid: `t = T★(i/n)²` on the first segment,
/// uniform in `√t` on the later ones.
fn segmented_grid(horizon: f64, seg: f64, n: usize) -> Result<(TimeGrid, Vec<usize>)> {
    let count = ((horizon / seg) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let seg = horizon / count as f64;
    let mut times = Vec::with_capacity(count * n);
    let mut ends = Vec::with_capacity(count);
    for j in 0..count {
        let (s0, s1) = ((j as f64 * seg).sqrt(), ((j + 1) as f64 * seg).sqrt());
        for i in 1..=n {
            let s = s0 + (s1 - s0) * i as f64 / n as f64;
            times.push(s * s);
        }
        let last = times.len() - 1;
        times[last] = if j + 1 == count { horizon } else { (j + 1) as f64 * seg };
        ends.push(times.len());
    }
    Ok((TimeGrid::new(times, true)?, ends))
}

/// The converged fixed point with reconstructed fields.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    data: ProblemData,
    trace: BoundaryTrace,
    prepared: PreparedTrace,
    energy: Vec<EnergyRecord>,
    q_bound: f64,
    q_observed: f64,
    steps: Vec<f64>,
}

impl SolutionPair {
    pub fn data(&self) -> &ProblemData {
        &self.data
    }

    /// `∂_ν v_ε(∂Ω, ·)`.
    pub fn v_trace(&self) -> &BoundaryTrace {
        &self.trace
    }

    pub fn prepared(&self) -> &PreparedTrace {
        &self.prepared
    }

    pub fn energy(&self) -> &[EnergyRecord] {
        &self.energy
    }

    pub fn horizon(&self) -> f64 {
        self.trace.horizon()
    }

    /// `‖v_ε‖_{X_T}` over the stored records.
    pub fn xt_norm(&self) -> Result<f64> {
        xt_norm(&self.energy)
    }

    /// Contraction factor of the longest solved segment.
    pub fn q_bound(&self) -> f64 {
        self.q_bound
    }

    /// Largest ratio of successive Picard steps (from the second step on).
    pub fn q_observed(&self) -> f64 {
        self.q_observed
    }

    /// `‖gⁿ⁺¹ − gⁿ‖_{X_T}` for every iteration, all segments concatenated.
    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// `v_ε(x,t)` and `∂_x v_ε(x,t)`.
    pub fn v_with_derivative(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        q_eps_prepared(&self.prepared, &self.data, x, t)
    }

    pub fn v(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.v_with_derivative(x, t)?.0)
    }

    pub fn w(&self, x: f64, t: f64) -> Result<f64> {
        assemble_w_prepared(&self.prepared, &self.data, x, t)
    }

    pub fn u(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.v(x, t)? + self.w(x, t)?)
    }

    /// `u_ε(x,t) − (S₂(t)φ_b)(x)`.
    pub fn deviation(&self, x: f64, t: f64) -> Result<f64> {
        let g = self.data.geometry();
        let y = g.distance(x)?;
        Ok(self.v(x, t)? - g.weight(y) * self.prepared.cumulative(t)?)
    }

    /// `v_ε(·,t)` sampled on the data grid.
    pub fn snapshot(&self, t: f64) -> Result<SampledFunction> {
        let grid = self.data.phi().grid().clone();
        let values = grid.nodes().par_iter().map(|&x| self.v(x, t)).collect::<Result<Vec<_>>>()?;
        SampledFunction::new(self.data.geometry(), grid, values, crate::domain::Tail::Zero)
    }

    /// `E_ε[v](t)` with the sup over the data grid nodes.
    pub fn energy_at(&self, t: f64) -> Result<EnergyRecord> {
        let nodes = self.data.phi().grid().nodes();
        let sup_v = nodes
            .par_iter()
            .map(|&x| self.v(x, t).map(f64::abs))
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
        let sup_dv = self.prepared.g(t)?.abs();
        EnergyRecord::new(t, sup_v, sup_dv, self.data.eps())
    }
}

/// `w_ε(x,t) = S₂(t)φ_b − ∫₀^t S₂(t−s)[∂_ν v(s)] ds`.
pub fn assemble_w(v_trace: &BoundaryTrace, data: &ProblemData, x: f64, t: f64) -> Result<f64> {
    assemble_w_prepared(&PreparedTrace::new(data.geometry(), v_trace), data, x, t)
}

fn assemble_w_prepared(prepared: &PreparedTrace, data: &ProblemData, x: f64, t: f64) -> Result<f64> {
    let g = data.geometry();
    let y = g.distance(x)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("w needs t >= 0, got {t}")));
    }
    let a = if t == 0.0 { 0.0 } else { prepared.cumulative(t)? };
    Ok(g.weight(y) * (data.phi_b() * exp_clamped(-g.decay_rate() * t) - a))
}

/// Solve with the default first iterate `g⁰ = ∂_ν Q_ε[0]`.
pub fn solve(data: &ProblemData, cfg: &SolverConfig) -> Result<SolutionPair> {
    solve_from(data, cfg, None)
}

/// Solve starting from a given trace (`None`: the first Picard term).
pub fn solve_from(data: &ProblemData, cfg: &SolverConfig, initial: Option<&BoundaryTrace>) -> Result<SolutionPair> {
    cfg.validate()?;
    let geometry = data.geometry();
    let eps = data.eps();
    let seg = cfg.segment_length(geometry, eps);
    let (grid, ends) = segmented_grid(cfg.horizon, seg, cfg.time_nodes)?;
    let solved_span = if cfg.continuation { grid.horizon() / ends.len() as f64 } else { grid.horizon() };
    let q_bound = contraction_factor(geometry, eps, solved_span);
    if q_bound >= 1.0 {
        return Err(Error::HorizonTooLong { q: q_bound });
    }
    let rule = GaussRule::new(cfg.quadrature_nodes)?;
    let times = grid.times().to_vec();
    let sigma = grid.root_nodes();
    let lambda = geometry.decay_rate();
    let root_eps_pi = (eps / PI).sqrt();

    let forcing: Vec<f64> = times
        .par_iter()
        .map(|&t| {
            let mut f = data.s1_phi_flux(t)?;
            if lambda != 0.0 && data.phi_b() != 0.0 {
                let e = smooth_history_integral(&rule, t, TimeKernel::InvSqrt, |s| exp_clamped(-lambda * s));
                f -= lambda * data.phi_b() * root_eps_pi * e;
            }
            Ok(f)
        })
        .collect::<Result<_>>()?;

    let mut q: Vec<f64> = std::iter::once(data.trace_origin_limit())
        .chain(times.iter().zip(&forcing).map(|(t, f)| t.sqrt() * f))
        .collect();
    if let Some(init) = initial {
        let p = PreparedTrace::with_rule(geometry, init, rule.clone());
        for (i, &t) in times.iter().enumerate() {
            q[i + 1] = t.sqrt() * p.g(t.min(init.horizon()))?;
        }
    }

    let blocks: Vec<(usize, usize)> = if cfg.continuation {
        let mut start = 0;
        ends.iter().map(|&e| { let b = (start, e); start = e; b }).collect()
    } else {
        vec![(0, times.len())]
    };

    let mut steps = Vec::new();
    let mut ratios = Vec::new();
    for (start, end) in blocks {
        let mut converged = false;
        let mut last = f64::INFINITY;
        for it in 0..cfg.max_iterations {
            let prepared = PreparedTrace::from_weighted(geometry, sigma.clone(), q.clone(), rule.clone());
            let updated: Vec<f64> = (start..end)
                .into_par_iter()
                .map(|i| {
                    let t = times[i];
                    Ok(t.sqrt() * (forcing[i] + prepared.boundary_flux(eps, t)?))
                })
                .collect::<Result<_>>()?;
            let step = updated
                .iter()
                .zip(&q[start + 1..end + 1])
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
                / eps.sqrt();
            q[start + 1..end + 1].copy_from_slice(&updated);
            if it >= 1 && last > 1e-12 {
                ratios.push(step / last);
            }
            steps.push(step);
            last = step;
            if step < cfg.tolerance_xt {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NotConverged { iterations: cfg.max_iterations, residual: last });
        }
    }

    let values: Vec<f64> = times.iter().zip(&q[1..]).map(|(t, q)| q / t.sqrt()).collect();
    let trace = BoundaryTrace::new(grid, values, q[0])?;
    let prepared = PreparedTrace::from_weighted(geometry, sigma, q, rule);
    let q_observed = ratios.iter().copied().fold(0.0, f64::max);
    let mut pair = SolutionPair { data: data.clone(), trace, prepared, energy: Vec::new(), q_bound, q_observed, steps };
    let m = cfg.energy_records;
    pair.energy = (1..=m)
        .map(|k| pair.energy_at(cfg.horizon * k as f64 / m as f64))
        .collect::<Result<_>>()?;
    Ok(pair)
}

/// Probe layout for [`residual_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualProbes {
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    pub nx: usize,
    pub nt: usize,
    /// Spatial finite-difference step.
    pub h: f64,
    /// Temporal finite-difference step.
    pub k: f64,
}

impl ResidualProbes {
    pub fn new(x_range: (f64, f64), t_range: (f64, f64)) -> Self {
        ResidualProbes { x_range, t_range, nx: 8, nt: 8, h: 1e-3, k: 1e-4 }
    }

    fn points(range: (f64, f64), n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (range.0 + range.1)];
        }
        (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    /// `max |ε∂_t v − Δv + εF₁ + εF₂|` over interior probes.
    pub pde: f64,
    /// `max |∂_t u + ∂_ν u|` on the boundary at the probe times.
    pub boundary: f64,
    /// Deviation of `w/ω` from a function of `t` alone (harmonicity of `w`).
    pub harmonic: f64,
    pub worst_pde_point: (f64, f64),
}

/// Finite-difference residuals of the reconstructed fields.
pub fn residual_check(pair: &SolutionPair, probes: &ResidualProbes) -> Result<ResidualReport> {
    let data = pair.data();
    let g = data.geometry();
    let eps = data.eps();
    let (h, k) = (probes.h, probes.k);
    let xs = ResidualProbes::points(probes.x_range, probes.nx);
    let ts = ResidualProbes::points(probes.t_range, probes.nt);
    if xs.iter().any(|&x| x - h < g.boundary_coordinate()) {
        return Err(Error::invalid("interior probes must stay one step away from the boundary"));
    }
    if ts.iter().any(|&t| t - k <= 0.0 || t + k > pair.horizon()) {
        return Err(Error::invalid("probe times must stay one step inside (0, T]"));
    }
    let grid: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    let pde = grid
        .par_iter()
        .map(|&(x, t)| {
            let dt = (pair.v(x, t + k)? - pair.v(x, t - k)?) / (2.0 * k);
            let (vm, v0, vp) = (pair.v(x - h, t)?, pair.v(x, t)?, pair.v(x + h, t)?);
            let mut lap = (vp - 2.0 * v0 + vm) / (h * h);
            if g.is_ball() {
                lap += 2.0 / x * (vp - vm) / (2.0 * h);
            }
            let y = g.distance(x)?;
            let f2 = g.weight(y) * pair.prepared().h(t)?;
            let r = eps * dt - lap + eps * f1(g, data.phi_b(), x, t)? + eps * f2;
            Ok((r.abs(), (x, t)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (pde_max, worst) = pde.iter().fold((0.0, (f64::NAN, f64::NAN)), |acc, &(r, p)| if r > acc.0 { (r, p) } else { acc });

    let x0 = g.boundary_coordinate();
    let boundary = ts
        .par_iter()
        .map(|&t| {
            let dt = (pair.u(x0, t + k)? - pair.u(x0, t - k)?) / (2.0 * k);
            let dy = (-3.0 * pair.u(x0, t)? + 4.0 * pair.u(x0 + h, t)? - pair.u(x0 + 2.0 * h, t)?) / (2.0 * h);
            Ok((dt - dy).abs())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut harmonic: f64 = 0.0;
    for &t in &ts {
        let reduced = |x: f64| -> Result<f64> { Ok(pair.w(x, t)? / g.weight(g.distance(x)?)) };
        let base = reduced(x0)?;
        for &x in &xs {
            harmonic = harmonic.max((reduced(x)? - base).abs());
        }
    }
    Ok(ResidualReport { pde: pde_max, boundary, harmonic, worst_pde_point: worst })
}

//! The solution operators acting on sampled data and boundary traces.
//!
//! In the distance variable `y` every operator is a half-line operator
//! conjugated by the weight `ω` (see [`crate::domain`]):
//!
//! ```text
//! S₁(τ)f          = ω·H(τ)[f/ω]              H: Dirichlet heat flow on (0,∞)
//! S₂(t)ψ          = ψ·ω·e^{−λt}
//! F₁[ψ](t)        = −λψ·ω·e^{−λt}
//! F₂[v](t)        = ω·h(t),      h = −g + λA,  A(t) = ∫₀^t e^{−λ(t−s)} g(s) ds
//! D_ε[ψ](y,t)     = −λψ·ω ∫₀^t e^{−λs} erf(y√ε / 2√(t−s)) ds
//! D̃_ε[v](y,t)     = ω ∫₀^t h(s) erf(y√ε / 2√(t−s)) ds
//! ```
//!
//! where `g = ∂_ν v` on the boundary, `λ = 1` on the ball and `λ = 0` on the
//! half-line.

use std::f64::consts::PI;

use crate::domain::{BoundaryTrace, Geometry, Piece, SampledFunction};
use crate::error::{Error, Result};
use crate::kernels::{exp_clamped, heat_kernel_halfline, linear_piece_action};
use crate::quadrature::{history_integral, smooth_history_integral, GaussRule, TimeKernel};

/// Initial data, boundary datum and diffusion parameter of one problem.
#[derive(Clone, Debug)]
pub struct ProblemData {
    geometry: Geometry,
    eps: f64,
    phi: SampledFunction,
    phi_b: f64,
    big_phi: SampledFunction,
    pieces: Vec<Piece>,
}

impl ProblemData {
    pub fn new(geometry: Geometry, eps: f64, phi: SampledFunction, phi_b: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < geometry.eps_limit()) {
            return Err(Error::invalid(format!(
                "eps = {eps} outside (0, {:.6}) for the {geometry} geometry",
                geometry.eps_limit()
            )));
        }
        if !phi_b.is_finite() {
            return Err(Error::invalid("boundary datum must be finite"));
        }
        if phi.geometry() != geometry {
            return Err(Error::invalid("initial data live on a different geometry"));
        }
        let big_phi = phi.minus_boundary_profile(phi_b)?;
        let pieces = big_phi.pieces();
        Ok(ProblemData { geometry, eps, phi, phi_b, big_phi, pieces })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn phi(&self) -> &SampledFunction {
        &self.phi
    }

    pub fn phi_b(&self) -> f64 {
        self.phi_b
    }

    /// `Φ = φ − S₂(0)φ_b`.
    pub fn big_phi(&self) -> &SampledFunction {
        &self.big_phi
    }

    /// Same data with another ε.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        ProblemData::new(self.geometry, eps, self.phi.clone(), self.phi_b)
    }

    /// On the ball, requires `sup |r φ(r)| < ∞`.
    pub fn require_decay(&self) -> Result<()> {
        if self.geometry.is_ball() && !self.phi.decay_constant().is_finite() {
            return Err(Error::DecayCondition(format!(
                "the initial data tail {:?} does not decay like 1/r",
                self.phi.tail()
            )));
        }
        Ok(())
    }

    /// `S₁(t/ε)Φ` at `x` and its `x`-derivative.
    pub fn s1_phi(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        s1_pieces(self.geometry, &self.pieces, t / self.eps, x)
    }

    /// `∂_ν S₁(t/ε)Φ` on the boundary.
    pub fn s1_phi_flux(&self, t: f64) -> Result<f64> {
        Ok(-s1_pieces(self.geometry, &self.pieces, t / self.eps, self.geometry.boundary_coordinate())?.1)
    }

    /// `lim_{t↓0} √t·∂_ν v(∂Ω, t) = −Φ(∂Ω⁺)·√(ε/π)`.
    pub fn trace_origin_limit(&self) -> f64 {
        let m0 = match self.pieces.first() {
            Some(Piece::Linear { za, fa, .. }) if *za == 0.0 => *fa,
            _ => 0.0,
        };
        -m0 * (self.eps / PI).sqrt()
    }
}

/// `S₁(τ)` applied to reduced pieces, evaluated with its derivative at `x`.
fn s1_pieces(geometry: Geometry, pieces: &[Piece], tau: f64, x: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!("S1 needs t > 0, got {tau}")));
    }
    let y = geometry.distance(x)?;
    let (mut h, mut dh) = (0.0, 0.0);
    for piece in pieces {
        let (v, d) = match *piece {
            Piece::Linear { za, zb, fa, slope } => linear_piece_action(tau, y, za, zb, fa, slope),
            Piece::InverseDistance { za, k } => inverse_distance_action(tau, y, za, k),
        };
        h += v;
        dh += d;
    }
    let w = geometry.weight(y);
    Ok((w * h, geometry.weight_slope(y) * h + w * dh))
}

/// Half-line Dirichlet flow of `k/z` on `[za, ∞)` by panel quadrature.
fn inverse_distance_action(tau: f64, y: f64, za: f64, k: f64) -> (f64, f64) {
    inverse_distance_action_with(&GaussRule::new(32).expect("nonzero"), tau, y, za, k)
}

fn inverse_distance_action_with(rule: &GaussRule, tau: f64, y: f64, za: f64, k: f64) -> (f64, f64) {
    let width = 40.0 * tau.sqrt();
    let lo = za.max(y - width);
    let hi = za.max(y) + width;
    if hi <= lo {
        return (0.0, 0.0);
    }
    let panels = (((hi - lo) / tau.sqrt()).ceil() as usize).clamp(1, 4000);
    let step = (hi - lo) / panels as f64;
    let norm = 1.0 / (4.0 * PI * tau).sqrt();
    let (mut value, mut deriv) = (0.0, 0.0);
    for p in 0..panels {
        let (a, b) = (lo + p as f64 * step, lo + (p + 1) as f64 * step);
        value += rule.integrate(a, b, |z| heat_kernel_halfline(tau, y, z).unwrap_or(0.0) * k / z);
        deriv += rule.integrate(a, b, |z| {
            let em = exp_clamped(-(y - z) * (y - z) / (4.0 * tau));
            let ep = exp_clamped(-(y + z) * (y + z) / (4.0 * tau));
            norm * (-(y - z) * em + (y + z) * ep) / (2.0 * tau) * k / z
        });
    }
    (value, deriv)
}

fn check_positive_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    Ok(())
}

/// `S₁(t)f` on the grid of `f`.
pub fn apply_s1(geometry: Geometry, t: f64, f: &SampledFunction) -> Result<SampledFunction> {
    check_positive_time(t)?;
    if f.geometry() != geometry {
        return Err(Error::invalid("data live on a different geometry"));
    }
    let pieces = f.pieces();
    let values = f
        .grid()
        .nodes()
        .iter()
        .map(|&x| s1_pieces(geometry, &pieces, t, x).map(|v| v.0))
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(geometry, f.grid().clone(), values, f.tail())
}

/// `(S₁(t)f)(x)`.
pub fn s1_value(geometry: Geometry, t: f64, f: &SampledFunction, x: f64) -> Result<f64> {
    check_positive_time(t)?;
    Ok(s1_pieces(geometry, &f.pieces(), t, x)?.0)
}

/// `∂_x (S₁(t)f)(x)`, differentiating the kernel analytically.
pub fn apply_s1_derivative(geometry: Geometry, t: f64, f: &SampledFunction, x: f64) -> Result<f64> {
    check_positive_time(t)?;
    Ok(s1_pieces(geometry, &f.pieces(), t, x)?.1)
}

/// `∂_ν (S₁(t)f)` on the boundary.
pub fn apply_s1_normal_derivative(geometry: Geometry, t: f64, f: &SampledFunction) -> Result<f64> {
    Ok(-apply_s1_derivative(geometry, t, f, geometry.boundary_coordinate())?)
}

/// `F₁[φ_b](x,t) = ∂_t S₂(t)φ_b`.
pub fn f1(geometry: Geometry, phi_b: f64, x: f64, t: f64) -> Result<f64> {
    let y = geometry.distance(x)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("F1 needs t >= 0, got {t}")));
    }
    let lambda = geometry.decay_rate();
    if lambda == 0.0 || phi_b == 0.0 {
        return Ok(0.0);
    }
    Ok(-lambda * phi_b * geometry.weight(y) * exp_clamped(-lambda * t))
}

/// `F₂[v](x,t) = ω·(−g(t) + λ∫₀^t e^{−λ(t−s)} g(s) ds)`.
pub fn f2(geometry: Geometry, trace: &BoundaryTrace, x: f64, t: f64) -> Result<f64> {
    let y = geometry.distance(x)?;
    let prepared = PreparedTrace::new(geometry, trace);
    Ok(geometry.weight(y) * prepared.h(t)?)
}

/// `D_ε[φ_b](x,t)` and its `x`-derivative.
pub fn d_eps_with_derivative(geometry: Geometry, phi_b: f64, eps: f64, x: f64, t: f64, rule: &GaussRule) -> Result<(f64, f64)> {
    check_positive_time(t)?;
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let y = geometry.distance(x)?;
    let lambda = geometry.decay_rate();
    if lambda == 0.0 || phi_b == 0.0 {
        return Ok((0.0, 0.0));
    }
    let c = 0.5 * y * eps.sqrt();
    let p = |s: f64| exp_clamped(-lambda * s);
    let i_erf = if y == 0.0 { 0.0 } else { smooth_history_integral(rule, t, TimeKernel::Erf { c }, p) };
    let i_gauss = smooth_history_integral(rule, t, TimeKernel::Gauss { c }, p);
    let scale = -lambda * phi_b;
    let value = scale * geometry.weight(y) * i_erf;
    let deriv = scale * (geometry.weight_slope(y) * i_erf + geometry.weight(y) * (eps / PI).sqrt() * i_gauss);
    Ok((value, deriv))
}

/// `D_ε[φ_b](x,t)`.
pub fn d_eps(geometry: Geometry, phi_b: f64, eps: f64, x: f64, t: f64) -> Result<f64> {
    Ok(d_eps_with_derivative(geometry, phi_b, eps, x, t, &GaussRule::default())?.0)
}

/// `D̃_ε[v](x,t)` for the trace `g = ∂_ν v`.
pub fn d_tilde_eps(geometry: Geometry, trace: &BoundaryTrace, eps: f64, x: f64, t: f64) -> Result<f64> {
    Ok(PreparedTrace::new(geometry, trace).d_tilde(eps, x, t)?.0)
}

/// `Q_ε[v](x,t) = S₁(t/ε)Φ(x) − D_ε[φ_b](x,t) − D̃_ε[v](x,t)`.
pub fn q_eps(trace: &BoundaryTrace, data: &ProblemData, x: f64, t: f64) -> Result<f64> {
    let prepared = PreparedTrace::new(data.geometry(), trace);
    Ok(q_eps_prepared(&prepared, data, x, t)?.0)
}

/// `Q_ε` and its `x`-derivative for a prepared trace.
pub fn q_eps_prepared(prepared: &PreparedTrace, data: &ProblemData, x: f64, t: f64) -> Result<(f64, f64)> {
    let (s, ds) = data.s1_phi(x, t)?;
    let (d, dd) = d_eps_with_derivative(data.geometry(), data.phi_b(), data.eps(), x, t, prepared.rule())?;
    let (dt, ddt) = prepared.d_tilde(data.eps(), x, t)?;
    Ok((s - d - dt, ds - dd - ddt))
}

/// A boundary trace in the form used by the time integrals: `q = √t·g` and
/// `A` at the `σ = √t` nodes, both interpolated linearly in `σ`.
#[derive(Clone, Debug)]
pub struct PreparedTrace {
    geometry: Geometry,
    sigma: Vec<f64>,
    q: Vec<f64>,
    a: Vec<f64>,
    h_total: Vec<f64>,
    rule: GaussRule,
}

impl PreparedTrace {
    pub fn new(geometry: Geometry, trace: &BoundaryTrace) -> Self {
        Self::with_rule(geometry, trace, GaussRule::default())
    }

    pub fn with_rule(geometry: Geometry, trace: &BoundaryTrace, rule: GaussRule) -> Self {
        let sigma = trace.time_grid().root_nodes();
        Self::from_weighted(geometry, sigma, trace.weighted_values(), rule)
    }

    /// From `σ` nodes (starting at 0) and nodal values of `q = √t·g`.
    pub fn from_weighted(geometry: Geometry, sigma: Vec<f64>, q: Vec<f64>, rule: GaussRule) -> Self {
        debug_assert_eq!(sigma.len(), q.len());
        let lambda = geometry.decay_rate();
        let n = sigma.len();
        let mut a = vec![0.0; n];
        for k in 0..n - 1 {
            let t1 = sigma[k + 1] * sigma[k + 1];
            let (s0, s1, q0, q1) = (sigma[k], sigma[k + 1], q[k], q[k + 1]);
            let inc = rule.integrate(s0, s1, |s| {
                let qs = q0 + (q1 - q0) * (s - s0) / (s1 - s0);
                2.0 * qs * exp_clamped(-lambda * (t1 - s * s))
            });
            a[k + 1] = exp_clamped(-lambda * (t1 - s0 * s0)) * a[k] + inc;
        }
        let mut prepared = PreparedTrace { geometry, sigma, q, a, h_total: vec![0.0; n], rule };
        for k in 0..n - 1 {
            let (s0, s1) = (prepared.sigma[k], prepared.sigma[k + 1]);
            let inc = prepared.rule.integrate(s0, s1, |s| prepared.h_density(k, s));
            prepared.h_total[k + 1] = prepared.h_total[k] + inc;
        }
        prepared
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn weighted(&self) -> &[f64] {
        &self.q
    }

    pub fn horizon(&self) -> f64 {
        let s = self.sigma[self.sigma.len() - 1];
        s * s
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!("trace evaluated at t = {t} <= 0")));
        }
        if t > self.horizon() * (1.0 + 1e-12) {
            return Err(Error::TraceTooShort { t, last: self.horizon() });
        }
        Ok(())
    }

    fn panel(&self, s: f64) -> usize {
        let k = self.sigma.partition_point(|&x| x <= s);
        k.saturating_sub(1).min(self.sigma.len() - 2)
    }

    #[inline]
    fn interp(&self, values: &[f64], k: usize, s: f64) -> f64 {
        let (s0, s1) = (self.sigma[k], self.sigma[k + 1]);
        values[k] + (values[k + 1] - values[k]) * (s - s0) / (s1 - s0)
    }

    /// `h(σ²)·2σ` with `A` interpolated in `σ`.
    #[inline]
    fn h_density(&self, k: usize, s: f64) -> f64 {
        let lambda = self.geometry.decay_rate();
        let q = self.interp(&self.q, k, s);
        if lambda == 0.0 {
            -2.0 * q
        } else {
            2.0 * (-q + lambda * s * self.interp(&self.a, k, s))
        }
    }

    /// `g(t)`.
    pub fn g(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let s = t.sqrt();
        Ok(self.interp(&self.q, self.panel(s), s) / s)
    }

    /// `A(t) = ∫₀^t e^{−λ(t−s)} g(s) ds`.
    pub fn cumulative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        let lambda = self.geometry.decay_rate();
        let s = t.sqrt().min(self.sigma[self.sigma.len() - 1]);
        let k = self.panel(s);
        let s0 = self.sigma[k];
        let inc = self.rule.integrate(s0, s, |x| 2.0 * self.interp(&self.q, k, x) * exp_clamped(-lambda * (t - x * x)));
        Ok(exp_clamped(-lambda * (t - s0 * s0)) * self.a[k] + inc)
    }

    /// `h(t) = −g(t) + λA(t)`.
    pub fn h(&self, t: f64) -> Result<f64> {
        let lambda = self.geometry.decay_rate();
        let g = self.g(t)?;
        Ok(if lambda == 0.0 { -g } else { -g + lambda * self.cumulative(t)? })
    }

    /// `∫₀^t h(s)·K(t−s) ds`.
    pub fn integrate_h(&self, t: f64, kernel: TimeKernel) -> Result<f64> {
        self.check(t)?;
        Ok(history_integral(&self.rule, &self.sigma, t, kernel, |k, s| self.h_density(k, s)))
    }

    /// `∫₀^t g(s)·K(t−s) ds`.
    pub fn integrate_g(&self, t: f64, kernel: TimeKernel) -> Result<f64> {
        self.check(t)?;
        Ok(history_integral(&self.rule, &self.sigma, t, kernel, |k, s| 2.0 * self.interp(&self.q, k, s)))
    }

    fn h_total(&self, t: f64) -> f64 {
        let s = t.sqrt().min(self.sigma[self.sigma.len() - 1]);
        let k = self.panel(s);
        self.h_total[k] + self.rule.integrate(self.sigma[k], s, |x| self.h_density(k, x))
    }

    /// `D̃_ε[v](x,t)` and its `x`-derivative.
    pub fn d_tilde(&self, eps: f64, x: f64, t: f64) -> Result<(f64, f64)> {
        self.check(t)?;
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {eps}")));
        }
        let g = self.geometry;
        let y = g.distance(x)?;
        let c = 0.5 * y * eps.sqrt();
        let i_erf = if y == 0.0 {
            0.0
        } else {
            self.h_total(t) - self.integrate_h(t, TimeKernel::Erfc { c })?
        };
        let i_gauss = self.integrate_h(t, TimeKernel::Gauss { c })?;
        let value = g.weight(y) * i_erf;
        let deriv = g.weight_slope(y) * i_erf + g.weight(y) * (eps / PI).sqrt() * i_gauss;
        Ok((value, deriv))
    }

    /// `√(ε/π)·∫₀^t h(s)/√(t−s) ds = −∂_ν D̃_ε[v](∂Ω, t)`.
    pub fn boundary_flux(&self, eps: f64, t: f64) -> Result<f64> {
        Ok((eps / PI).sqrt() * self.integrate_h(t, TimeKernel::InvSqrt)?)
    }
}

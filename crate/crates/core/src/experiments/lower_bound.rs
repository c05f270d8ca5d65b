//! Pointwise lower bound `u_ε(x,t) ≥ C√ε` on a compact set, with `C` from
//! the explicit recipes.
//!
//! Half-line, `φ = χ_{x>b}`, `K ⊂ (x₀,∞) × (0,τ₂)`:
//!
//! ```text
//! margin = x₀/(2√π) − C̃ τ₂^{1/2}(τ₂^{1/2} + τ₂^{3/4} + τ₂),   C = margin / (2 inf_K t)
//! ```
//!
//! Ball, `φ = (1/r)χ_{r>b}`, `K ⊂ {r > r₀} × (0,τ₂)`:
//!
//! ```text
//! c₁ = (r₀−1)/(2r₀√π) − C̃ √τ₂(1 + τ₂ + √τ₂),   C = c₁/√τ₁,  τ₁ = inf_K t
//! ```
//!
//! `C̃` bounds `|D̃_ε v| + |w_ε − S₂φ_b|` by `C̃ ε^{1/2}(t^{1/2} + ε^{1/2}t^{3/4} + t)`
//! (half-line) or `C̃ √ε(√ε(1+t) + √t)` (ball) and is calibrated.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::calibration::FROZEN;
use crate::data::DataSpec;
use crate::domain::Geometry;
use crate::error::{Error, Result};
use crate::operators::ProblemData;
use crate::oracles::{s1_indicator_ball, s1_indicator_halfline};
use crate::picard::{solve, SolutionPair, SolverConfig};

use super::rate::{powers_of_two, s2_constant};

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundSetup {
    pub geometry: Geometry,
    pub data: DataSpec,
    /// `x₀` (half-line) or `r₀` (ball): `K` lies beyond it.
    pub region: f64,
    /// Spatial extent of `K`.
    pub x_range: (f64, f64),
    /// Time extent of `K`.
    pub t_range: (f64, f64),
    pub tau2: f64,
    pub eps: Vec<f64>,
    pub c_tilde: f64,
    pub probes: (usize, usize),
    pub time_nodes: usize,
}

impl LowerBoundSetup {
    /// `φ = χ_{x>1}`, `K = [1,2] × [0.05,0.1]`, `ε = 2⁻⁶…2⁻¹²`.
    pub fn halfline_default() -> Self {
        LowerBoundSetup {
            geometry: Geometry::half_line(),
            data: DataSpec::Indicator { b: 1.0 },
            region: 1.0,
            x_range: (1.0, 2.0),
            t_range: (0.05, 0.1),
            tau2: 0.1,
            eps: powers_of_two(6, 12),
            c_tilde: FROZEN.c_tilde_halfline,
            probes: (32, 32),
            time_nodes: 256,
        }
    }

    /// `φ = (1/r)χ_{r>2}`, `K = [2,3] × [0.05,0.1]`, `ε = 2⁻⁶…2⁻¹²`.
    pub fn ball_default() -> Self {
        LowerBoundSetup {
            geometry: Geometry::exterior_ball(),
            data: DataSpec::ScaledIndicator { b: 2.0 },
            region: 2.0,
            x_range: (2.0, 3.0),
            c_tilde: FROZEN.c_tilde_ball,
            ..LowerBoundSetup::halfline_default()
        }
    }

    fn b(&self) -> Option<f64> {
        match self.data {
            DataSpec::Indicator { b } if !self.geometry.is_ball() => Some(b),
            DataSpec::ScaledIndicator { b } if self.geometry.is_ball() => Some(b),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_range.0 > 0.0 && self.t_range.0 <= self.t_range.1 && self.t_range.1 <= self.tau2) {
            return Err(Error::invalid("K must satisfy 0 < t_min <= t_max <= tau2"));
        }
        if !(self.x_range.0 >= self.region && self.x_range.0 <= self.x_range.1) {
            return Err(Error::invalid(format!("K must lie beyond {}", self.region)));
        }
        if !(self.region > self.geometry.boundary_coordinate()) {
            return Err(Error::invalid("the region bound must lie inside the domain"));
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e < self.geometry.eps_limit())) {
            return Err(Error::invalid("eps values outside the admissible range"));
        }
        if self.probes.0 < 2 || self.probes.1 < 2 {
            return Err(Error::invalid("at least 2 probes per direction"));
        }
        Ok(())
    }

    /// Admissibility margin of the recipe and the resulting constant `C`.
    pub fn recipe(&self) -> (f64, f64) {
        let (t2, c) = (self.tau2, self.c_tilde);
        if self.geometry.is_ball() {
            let r = self.region;
            let c1 = (r - 1.0) / (2.0 * r * PI.sqrt()) - c * t2.sqrt() * (1.0 + t2 + t2.sqrt());
            (c1, c1 / self.t_range.0.sqrt())
        } else {
            let margin = self.region / (2.0 * PI.sqrt()) - c * t2.sqrt() * (t2.sqrt() + t2.powf(0.75) + t2);
            (margin, margin / (2.0 * self.t_range.0))
        }
    }

    /// `I(ε,t,x)` from the closed form.
    pub fn i_factor(&self, eps: f64, x: f64, t: f64) -> Result<f64> {
        let b = self.b().ok_or_else(|| Error::invalid("the lower-bound recipe needs indicator data"))?;
        let f = if self.geometry.is_ball() { s1_indicator_ball(eps, t, x, b)? } else { s1_indicator_halfline(eps, t, x, b)? };
        Ok(f.i_factor)
    }

    fn solve(&self, eps: f64) -> Result<SolutionPair> {
        let r_max = self.data.feature_location().max(self.x_range.1) + 10.0;
        let phi = self.data.materialize(self.geometry, r_max)?;
        let data = ProblemData::new(self.geometry, eps, phi, 0.0)?;
        solve(&data, &SolverConfig { time_nodes: self.time_nodes, energy_records: 0, ..SolverConfig::new(self.tau2) })
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

/// Outcome for one `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundPoint {
    pub eps: f64,
    /// `min_K u_ε / √ε`.
    pub observed_constant: f64,
    /// Where the minimum is attained.
    pub argmin: (f64, f64),
    /// `min_K I(ε,·,·)`.
    pub i_min: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub geometry: Geometry,
    pub c_tilde: f64,
    /// Admissibility margin of the recipe (`x₀/(2√π) − …` or `c₁`).
    pub recipe_margin: f64,
    pub constant: f64,
    /// Largest `ε` below which `I > 1/2` holds on `K` (scan over `2^{−k/4}`).
    pub eps0: f64,
    pub points: Vec<LowerBoundPoint>,
    /// First failing probe `(ε, x, t, u)`.
    pub witness: Option<(f64, f64, f64, f64)>,
    /// Zero data: nothing to check.
    pub skipped: bool,
}

impl LowerBoundReport {
    pub fn admissible(&self) -> bool {
        self.recipe_margin > 0.0
    }

    pub fn i_condition_holds(&self) -> bool {
        self.points.iter().filter(|p| p.eps < self.eps0).all(|p| p.i_min > 0.5)
    }

    pub fn passed(&self) -> bool {
        self.skipped || (self.admissible() && self.witness.is_none() && self.i_condition_holds())
    }
}

fn min_i(setup: &LowerBoundSetup, eps: f64) -> Result<f64> {
    let xs = axis(setup.x_range, setup.probes.0);
    let ts = axis(setup.t_range, setup.probes.1);
    let mut m = f64::INFINITY;
    for &t in &ts {
        for &x in &xs {
            m = m.min(setup.i_factor(eps, x, t)?);
        }
    }
    Ok(m)
}

/// Largest `2^{−k/4}` (below the geometry limit) such that `min_K I > 1/2`
/// for it and every smaller grid value down to `2⁻³⁰`.
pub fn estimate_eps0(setup: &LowerBoundSetup) -> Result<f64> {
    let mut eps0 = 0.0;
    for k in (0..=120).rev() {
        let eps = 2f64.powf(-(k as f64) / 4.0);
        if eps >= setup.geometry.eps_limit() {
            break;
        }
        if min_i(setup, eps)? > 0.5 {
            eps0 = eps;
        } else {
            break;
        }
    }
    Ok(eps0)
}

/// Runs the recipe, the `I > 1/2` prerequisite and the probe check.
pub fn run_lower_bound_check(setup: &LowerBoundSetup) -> Result<LowerBoundReport> {
    setup.validate()?;
    let (recipe_margin, constant) = setup.recipe();
    let skipped = matches!(setup.data, DataSpec::Const(c) if c == 0.0);
    if skipped {
        return Ok(LowerBoundReport {
            geometry: setup.geometry,
            c_tilde: setup.c_tilde,
            recipe_margin,
            constant,
            eps0: 0.0,
            points: Vec::new(),
            witness: None,
            skipped,
        });
    }
    let eps0 = estimate_eps0(setup)?;
    let xs = axis(setup.x_range, setup.probes.0);
    let ts = axis(setup.t_range, setup.probes.1);
    let per_eps = setup
        .eps
        .par_iter()
        .map(|&eps| {
            let pair = setup.solve(eps)?;
            let mut worst = (f64::INFINITY, (f64::NAN, f64::NAN));
            let mut violations = 0;
            let mut witness = None;
            for &t in &ts {
                for &x in &xs {
                    let u = pair.u(x, t)?;
                    let c = u / eps.sqrt();
                    if c < worst.0 {
                        worst = (c, (x, t));
                    }
                    if u < constant * eps.sqrt() {
                        violations += 1;
                        witness.get_or_insert((eps, x, t, u));
                    }
                }
            }
            let point = LowerBoundPoint { eps, observed_constant: worst.0, argmin: worst.1, i_min: min_i(setup, eps)?, violations };
            Ok((point, witness))
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = per_eps.iter().find_map(|(_, w)| *w);
    let points = per_eps.into_iter().map(|(p, _)| p).collect();
    Ok(LowerBoundReport { geometry: setup.geometry, c_tilde: setup.c_tilde, recipe_margin, constant, eps0, points, witness, skipped })
}

/// `sup (|D̃_ε v| + |w_ε − S₂φ_b|) / shape(ε,t)` over the solved instances of
/// `setup` for `t ∈ (0, τ₂]` and the whole domain (geometric probes).
pub fn measure_c_tilde(setup: &LowerBoundSetup) -> Result<f64> {
    setup.validate()?;
    let g = setup.geometry;
    let x0 = g.boundary_coordinate();
    let xs: Vec<f64> = (0..40).map(|i| x0 + (1e-3f64.ln() + (200f64.ln() - 1e-3f64.ln()) * i as f64 / 39.0).exp()).collect();
    let ts: Vec<f64> = (0..24).map(|i| setup.tau2 * 1e-3f64.powf(1.0 - i as f64 / 23.0)).collect();
    let per_eps = setup
        .eps
        .par_iter()
        .map(|&eps| {
            let pair = setup.solve(eps)?;
            let se = eps.sqrt();
            let mut best: f64 = 0.0;
            for &t in &ts {
                let shape = if g.is_ball() { se * (se * (1.0 + t) + t.sqrt()) } else { se * (t.sqrt() + se * t.powf(0.75) + t) };
                for &x in &xs {
                    let dt = pair.prepared().d_tilde(eps, x, t)?.0;
                    let w = pair.w(x, t)? - s2_constant(g, pair.data().phi_b(), x, t)?;
                    best = best.max((dt.abs() + w.abs()) / shape);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_eps.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipe_formulas() {
        let mut s = LowerBoundSetup::halfline_default();
        s.c_tilde = 0.0;
        let (m, c) = s.recipe();
        assert!((m - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        assert!((c - m / 0.1).abs() < 1e-15);
        let mut b = LowerBoundSetup::ball_default();
        b.c_tilde = 0.0;
        let (c1, c) = b.recipe();
        assert!((c1 - 0.25 / PI.sqrt()).abs() < 1e-15);
        assert!((c - c1 / 0.05f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_data_are_skipped() {
        let s = LowerBoundSetup { data: DataSpec::Const(0.0), ..LowerBoundSetup::halfline_default() };
        let r = run_lower_bound_check(&s).unwrap();
        assert!(r.skipped && r.passed());
    }

    #[test]
    fn i_factor_tends_to_one() {
        let s = LowerBoundSetup::halfline_default();
        assert!(s.i_factor(1e-8, 1.5, 0.07).unwrap() > 0.999);
        let b = LowerBoundSetup::ball_default();
        assert!(b.i_factor(1e-8, 2.5, 0.07).unwrap() > 0.999);
        assert!(estimate_eps0(&s).unwrap() > 2f64.powi(-6));
    }

    #[test]
    fn inadmissible_recipe_fails() {
        let s = LowerBoundSetup { c_tilde: 100.0, eps: vec![2f64.powi(-8)], probes: (4, 4), time_nodes: 64, ..LowerBoundSetup::halfline_default() };
        let r = run_lower_bound_check(&s).unwrap();
        assert!(!r.admissible());
        assert!(!r.passed());
        assert!(r.points[0].observed_constant > 0.0);
    }
}

//! Geometries, grids, sampled functions, boundary traces and the weighted
//! norms `E_ε` and `‖·‖_{X_T}`.
//!
//! Both geometries are handled through the distance to the boundary
//! `y ≥ 0` (`y = x_N` on the half-line, `y = r − 1` on the ball) and a
//! weight `ω(y)`: `ω ≡ 1` on the half-line and `ω = 1/(1+y) = 1/r` on the
//! ball. With `f = ω·F`, the radial Dirichlet heat flow on the ball becomes
//! the Dirichlet heat flow of `F` on the half-line, so sampled data are
//! interpolated linearly in the reduced variable `F`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    ExteriorBallRadial,
    HalfSpaceReduced,
}

/// The active domain: `ℝ³ ∖ B₁(0)` with radial data, or `ℝ^N_+` with data
/// depending only on `x_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Geometry {
    kind: GeometryKind,
    dimension: usize,
}

impl Geometry {
    pub fn exterior_ball() -> Self {
        Geometry { kind: GeometryKind::ExteriorBallRadial, dimension: 3 }
    }

    pub fn half_space(dimension: usize) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::invalid(format!("half-space dimension must be >= 2, got {dimension}")));
        }
        Ok(Geometry { kind: GeometryKind::HalfSpaceReduced, dimension })
    }

    /// The half-space `ℝ³_+` reduced to the height variable.
    pub fn half_line() -> Self {
        Geometry { kind: GeometryKind::HalfSpaceReduced, dimension: 3 }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_ball(&self) -> bool {
        self.kind == GeometryKind::ExteriorBallRadial
    }

    /// `r = 1` on the ball, `x_N = 0` on the half-space.
    pub fn boundary_coordinate(&self) -> f64 {
        match self.kind {
            GeometryKind::ExteriorBallRadial => 1.0,
            GeometryKind::HalfSpaceReduced => 0.0,
        }
    }

    /// Distance to the boundary. Points within `1e-12` outside are clamped.
    pub fn distance(&self, x: f64) -> Result<f64> {
        let y = x - self.boundary_coordinate();
        if !y.is_finite() || y < -1e-12 {
            return Err(Error::OutOfDomain(format!("{x} is outside the {} domain", self.name())));
        }
        Ok(y.max(0.0))
    }

    pub fn coordinate(&self, y: f64) -> f64 {
        self.boundary_coordinate() + y
    }

    /// `ω(y)`; also the profile of `S₂(0)` applied to a unit boundary value.
    pub fn weight(&self, y: f64) -> f64 {
        match self.kind {
            GeometryKind::ExteriorBallRadial => 1.0 / (1.0 + y),
            GeometryKind::HalfSpaceReduced => 1.0,
        }
    }

    pub fn weight_slope(&self, y: f64) -> f64 {
        match self.kind {
            GeometryKind::ExteriorBallRadial => -1.0 / ((1.0 + y) * (1.0 + y)),
            GeometryKind::HalfSpaceReduced => 0.0,
        }
    }

    /// Decay rate `λ` of `S₂` on constant boundary data: `S₂(t)c = c·ω·e^{−λt}`.
    pub fn decay_rate(&self) -> f64 {
        match self.kind {
            GeometryKind::ExteriorBallRadial => 1.0,
            GeometryKind::HalfSpaceReduced => 0.0,
        }
    }

    /// Upper end of the admissible ε range (exclusive).
    pub fn eps_limit(&self) -> f64 {
        match self.kind {
            GeometryKind::ExteriorBallRadial => 1.0 / std::f64::consts::PI.sqrt(),
            GeometryKind::HalfSpaceReduced => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            GeometryKind::ExteriorBallRadial => "ball",
            GeometryKind::HalfSpaceReduced => "halfline",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ball" | "exterior-ball" => Ok(Geometry::exterior_ball()),
            "halfline" | "half-line" | "halfspace" | "half-space" => Ok(Geometry::half_line()),
            other => Err(Error::invalid(format!("unknown geometry `{other}` (expected ball or halfline)"))),
        }
    }
}

/// Truncation radius so that Gaussian tails beyond it are negligible:
/// `boundary + b + 12·√(T/ε)`.
pub fn default_truncation(geometry: Geometry, b: f64, t_max: f64, eps_min: f64) -> f64 {
    geometry.boundary_coordinate() + b.max(0.0) + 12.0 * (t_max / eps_min).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialGrid {
    nodes: Vec<f64>,
    grading: f64,
}

impl SpatialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("a spatial grid needs at least two nodes"));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("grid nodes must be finite"));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid nodes must be strictly increasing"));
        }
        Ok(SpatialGrid { nodes, grading: 1.0 })
    }

    /// Geometric grading away from the boundary: steps `h₀·ratio^k`, then the
    /// given breakpoints are inserted as exact nodes.
    pub fn graded(
        geometry: Geometry,
        r_max: f64,
        first_step: f64,
        ratio: f64,
        breakpoints: &[f64],
    ) -> Result<Self> {
        let x0 = geometry.boundary_coordinate();
        if !(r_max > x0) || !(first_step > 0.0) || !(ratio >= 1.0) {
            return Err(Error::invalid(format!(
                "bad grading parameters: r_max = {r_max}, first step = {first_step}, ratio = {ratio}"
            )));
        }
        let mut nodes = vec![x0];
        let mut h = first_step;
        let mut x = x0;
        while x + h < r_max {
            x += h;
            nodes.push(x);
            h *= ratio;
        }
        nodes.push(r_max);
        let mut grid = SpatialGrid { nodes, grading: ratio };
        grid.insert_breakpoints(breakpoints)?;
        Ok(grid)
    }

    pub fn uniform(geometry: Geometry, r_max: f64, intervals: usize) -> Result<Self> {
        let x0 = geometry.boundary_coordinate();
        if intervals == 0 || !(r_max > x0) {
            return Err(Error::invalid("uniform grid needs r_max above the boundary and >= 1 interval"));
        }
        let h = (r_max - x0) / intervals as f64;
        let mut nodes: Vec<f64> = (0..intervals).map(|k| x0 + k as f64 * h).collect();
        nodes.push(r_max);
        Ok(SpatialGrid { nodes, grading: 1.0 })
    }

    /// Default data grid: first step `10⁻³`, ratio `1.05`, exact breakpoints.
    pub fn for_data(geometry: Geometry, r_max: f64, breakpoints: &[f64]) -> Result<Self> {
        Self::graded(geometry, r_max, 1e-3, 1.05, breakpoints)
    }

    fn insert_breakpoints(&mut self, breakpoints: &[f64]) -> Result<()> {
        for &b in breakpoints {
            if !b.is_finite() {
                return Err(Error::invalid(format!("breakpoint {b} is not finite")));
            }
            if b <= self.nodes[0] || b >= self.r_max() {
                continue;
            }
            let k = self.nodes.partition_point(|&x| x < b);
            if self.nodes[k] != b {
                self.nodes.insert(k, b);
            }
        }
        Ok(())
    }

    /// Grid with every interval halved.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.r_max());
        SpatialGrid { nodes, grading: self.grading }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn boundary(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    /// Index `k` of the interval `[nodes[k], nodes[k+1])` containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.nodes[0] || x > self.r_max() {
            return None;
        }
        let k = self.nodes.partition_point(|&n| n <= x);
        Some(k.saturating_sub(1).min(self.nodes.len() - 2))
    }
}

/// Behaviour of a sampled function beyond `R_max`, in physical variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    Zero,
    /// `f(x) = k/x` beyond the grid.
    DecayLikeOneOverR { k: f64 },
    Constant { c: f64 },
    /// `f(x) = c + k/x` beyond the grid.
    ConstantPlusDecay { c: f64, k: f64 },
}

impl Tail {
    fn parts(self) -> (f64, f64) {
        match self {
            Tail::Zero => (0.0, 0.0),
            Tail::DecayLikeOneOverR { k } => (0.0, k),
            Tail::Constant { c } => (c, 0.0),
            Tail::ConstantPlusDecay { c, k } => (c, k),
        }
    }

    fn from_parts(c: f64, k: f64) -> Tail {
        match (c == 0.0, k == 0.0) {
            (true, true) => Tail::Zero,
            (true, false) => Tail::DecayLikeOneOverR { k },
            (false, true) => Tail::Constant { c },
            (false, false) => Tail::ConstantPlusDecay { c, k },
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        let (c, k) = self.parts();
        if k == 0.0 {
            c
        } else {
            c + k / x
        }
    }
}

/// One piece of the reduced function `F = f/ω` in the distance variable `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    /// `F(z) = fa + slope·(z − za)` on `[za, zb]`; `zb` may be `+∞`.
    Linear { za: f64, zb: f64, fa: f64, slope: f64 },
    /// `F(z) = k/z` on `[za, ∞)` (half-line `1/x` tails only).
    InverseDistance { za: f64, k: f64 },
}

/// Piecewise-linear data on a spatial grid (linear in `f/ω`) with an
/// analytic tail. Jumps are allowed at nodes through separate left and
/// right limits.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    geometry: Geometry,
    grid: SpatialGrid,
    left: Vec<f64>,
    values: Vec<f64>,
    tail: Tail,
}

impl SampledFunction {
    pub fn new(geometry: Geometry, grid: SpatialGrid, values: Vec<f64>, tail: Tail) -> Result<Self> {
        Self::from_limits(geometry, grid, values.clone(), values, tail)
    }

    /// `left[k]` is the limit from below at node `k`, `right[k]` the value
    /// there (right-continuous convention).
    pub fn from_limits(
        geometry: Geometry,
        grid: SpatialGrid,
        left: Vec<f64>,
        right: Vec<f64>,
        tail: Tail,
    ) -> Result<Self> {
        if left.len() != grid.len() || right.len() != grid.len() {
            return Err(Error::invalid(format!(
                "{} values for {} grid nodes",
                right.len(),
                grid.len()
            )));
        }
        if (grid.boundary() - geometry.boundary_coordinate()).abs() > 1e-12 {
            return Err(Error::invalid("grid does not start at the boundary"));
        }
        if left.iter().chain(&right).any(|v| !v.is_finite()) {
            return Err(Error::invalid("sampled values must be finite"));
        }
        let (c, k) = tail.parts();
        if !c.is_finite() || !k.is_finite() {
            return Err(Error::invalid("tail coefficients must be finite"));
        }
        if let Tail::DecayLikeOneOverR { k } = tail {
            let n = grid.len();
            for i in n.saturating_sub(3)..n {
                let x = grid.nodes()[i];
                let rf = (x * left[i]).abs().max((x * right[i]).abs());
                if rf > k.abs() * (1.0 + 1e-9) + 1e-300 {
                    return Err(Error::invalid(format!(
                        "tail DecayLikeOneOverR({k}) violated at x = {x}: |x f(x)| = {rf}"
                    )));
                }
            }
        }
        let mut right = right;
        let last = right.len() - 1;
        right[last] = left[last];
        Ok(SampledFunction { geometry, grid, left, values: right, tail })
    }

    pub fn from_fn(geometry: Geometry, grid: SpatialGrid, f: impl Fn(f64) -> f64, tail: Tail) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(geometry, grid, values, tail)
    }

    pub fn zero(geometry: Geometry, grid: SpatialGrid) -> Self {
        let n = grid.len();
        SampledFunction { geometry, grid, left: vec![0.0; n], values: vec![0.0; n], tail: Tail::Zero }
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_values(&self) -> &[f64] {
        &self.left
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.geometry.distance(x)?;
        let nodes = self.grid.nodes();
        if x > self.grid.r_max() {
            return Ok(self.tail.eval(x));
        }
        let k = self.grid.locate(x).expect("x within grid");
        let (xa, xb) = (nodes[k], nodes[k + 1]);
        let ya = xa - self.geometry.boundary_coordinate();
        let yb = xb - self.geometry.boundary_coordinate();
        let y = x - self.geometry.boundary_coordinate();
        let fa = self.values[k] / self.geometry.weight(ya);
        let fb = self.left[k + 1] / self.geometry.weight(yb);
        let s = (y - ya) / (yb - ya);
        Ok(self.geometry.weight(y) * (fa + s * (fb - fa)))
    }

    /// The reduced function `F = f/ω` as pieces in the distance variable.
    pub fn pieces(&self) -> Vec<Piece> {
        let g = self.geometry;
        let x0 = g.boundary_coordinate();
        let nodes = self.grid.nodes();
        let mut out = Vec::with_capacity(nodes.len());
        for k in 0..nodes.len() - 1 {
            let za = nodes[k] - x0;
            let zb = nodes[k + 1] - x0;
            let fa = self.values[k] / g.weight(za);
            let fb = self.left[k + 1] / g.weight(zb);
            if fa == 0.0 && fb == 0.0 {
                continue;
            }
            out.push(Piece::Linear { za, zb, fa, slope: (fb - fa) / (zb - za) });
        }
        let zr = self.grid.r_max() - x0;
        let (c, k) = self.tail.parts();
        let mut out = Self::merge_collinear(out);
        if g.is_ball() {
            // F = (1+z)(c + k/(1+z)) = c(1+z) + k
            let fa = c * (1.0 + zr) + k;
            if fa != 0.0 || c != 0.0 {
                out.push(Piece::Linear { za: zr, zb: f64::INFINITY, fa, slope: c });
            }
        } else {
            if c != 0.0 {
                out.push(Piece::Linear { za: zr, zb: f64::INFINITY, fa: c, slope: 0.0 });
            }
            if k != 0.0 {
                out.push(Piece::InverseDistance { za: zr, k });
            }
        }
        Self::merge_collinear(out)
    }

    fn merge_collinear(pieces: Vec<Piece>) -> Vec<Piece> {
        let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if let (Some(Piece::Linear { za: pa, zb: pb, fa: pf, slope: ps }), Piece::Linear { za, zb, fa, slope }) =
                (merged.last().copied(), p)
            {
                let end = pf + ps * (pb - pa);
                let scale = pf.abs().max(fa.abs()).max(1e-300);
                if pb == za && (end - fa).abs() <= 1e-14 * scale && (slope - ps).abs() <= 1e-12 * (scale + slope.abs()) {
                    let last = merged.len() - 1;
                    merged[last] = Piece::Linear { za: pa, zb, fa: pf, slope: ps };
                    continue;
                }
            }
            merged.push(p);
        }
        merged
    }

    /// `∂_ν f` at the boundary from the first interpolation piece.
    pub fn normal_derivative_at_boundary(&self) -> f64 {
        let g = self.geometry;
        let nodes = self.grid.nodes();
        let zb = nodes[1] - nodes[0];
        let fa = self.values[0];
        let fb = self.left[1] / g.weight(zb);
        let slope = (fb - fa) / zb;
        -(g.weight_slope(0.0) * fa + slope)
    }

    pub fn sup_norm(&self) -> f64 {
        let nodes = self.values.iter().chain(&self.left).fold(0.0_f64, |m, v| m.max(v.abs()));
        let r = self.grid.r_max();
        let tail = match self.tail {
            Tail::Zero => 0.0,
            Tail::Constant { c } => c.abs(),
            Tail::DecayLikeOneOverR { k } => k.abs() / r,
            Tail::ConstantPlusDecay { c, k } => (c + k / r).abs().max(c.abs()),
        };
        nodes.max(tail)
    }

    /// `sup_x |x·f(x)|` in physical coordinates; `+∞` for non-decaying tails.
    pub fn decay_constant(&self) -> f64 {
        let (c, k) = self.tail.parts();
        if c != 0.0 {
            return f64::INFINITY;
        }
        let nodes = self.grid.nodes();
        let mut m = k.abs();
        for i in 0..nodes.len() - 1 {
            let (xa, xb) = (nodes[i], nodes[i + 1]);
            let (fa, fb) = (self.values[i], self.left[i + 1]);
            m = m.max((xa * fa).abs()).max((xb * fb).abs());
            if !self.geometry.is_ball() {
                // x·f is quadratic on the piece; check its vertex
                let s = (fb - fa) / (xb - xa);
                if s != 0.0 {
                    let xv = 0.5 * (xa - fa / s);
                    if xv > xa && xv < xb {
                        m = m.max((xv * (fa + s * (xv - xa))).abs());
                    }
                }
            }
        }
        m
    }

    /// `f − S₂(0)ψ`: subtracts `ψ·ω` from every value and from the tail.
    pub fn minus_boundary_profile(&self, psi: f64) -> Result<Self> {
        if psi == 0.0 {
            return Ok(self.clone());
        }
        let g = self.geometry;
        let x0 = g.boundary_coordinate();
        let shift = |x: f64, v: f64| v - psi * g.weight(x - x0);
        let nodes = self.grid.nodes();
        let left = nodes.iter().zip(&self.left).map(|(&x, &v)| shift(x, v)).collect();
        let right = nodes.iter().zip(&self.values).map(|(&x, &v)| shift(x, v)).collect();
        let (c, k) = self.tail.parts();
        let tail = if g.is_ball() { Tail::from_parts(c, k - psi) } else { Tail::from_parts(c - psi, k) };
        Self::from_limits(g, self.grid.clone(), left, right, tail)
    }
}

pub fn sup_norm(f: &SampledFunction) -> f64 {
    f.sup_norm()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    includes_origin_limit: bool,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>, includes_origin_limit: bool) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("a time grid needs at least one node"));
        }
        if times.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::invalid("time nodes must be finite and positive"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("time nodes must be strictly increasing"));
        }
        Ok(TimeGrid { times, includes_origin_limit })
    }

    /// `t_i = T(i/n)²`, `i = 1..n`: uniform in `√t`.
    pub fn quadratic(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0) || n == 0 {
            return Err(Error::invalid(format!("need T > 0 and n >= 1, got T = {horizon}, n = {n}")));
        }
        let mut times: Vec<f64> = (1..=n).map(|i| horizon * (i as f64 / n as f64).powi(2)).collect();
        times[n - 1] = horizon;
        Self::new(times, true)
    }

    pub fn uniform(horizon: f64, n: usize) -> Result<Self> {
        if !(horizon > 0.0) || n == 0 {
            return Err(Error::invalid(format!("need T > 0 and n >= 1, got T = {horizon}, n = {n}")));
        }
        let mut times: Vec<f64> = (1..=n).map(|i| horizon * i as f64 / n as f64).collect();
        times[n - 1] = horizon;
        Self::new(times, true)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn includes_origin_limit(&self) -> bool {
        self.includes_origin_limit
    }

    /// `[0, √t₁, …, √t_n]`.
    pub fn root_nodes(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.times.iter().map(|t| t.sqrt())).collect()
    }
}

/// Samples of `g(t) = ∂_ν v(∂Ω, t)` on `(0, T]`.
///
/// Between nodes the product `√t·g(t)` is interpolated linearly in `√t`,
/// which reproduces `g = c/√t` exactly. `origin_limit` is the value of
/// `√t·g(t)` as `t ↓ 0`; without an origin limit the first node value is
/// extended to `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    time_grid: TimeGrid,
    values: Vec<f64>,
    origin_limit: f64,
    weighted_sup: f64,
}

impl BoundaryTrace {
    pub fn new(time_grid: TimeGrid, values: Vec<f64>, origin_limit: f64) -> Result<Self> {
        if values.len() != time_grid.len() {
            return Err(Error::invalid(format!(
                "{} trace values for {} time nodes",
                values.len(),
                time_grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !origin_limit.is_finite() {
            return Err(Error::invalid("trace values must be finite"));
        }
        let origin_limit = if time_grid.includes_origin_limit() {
            origin_limit
        } else {
            time_grid.times()[0].sqrt() * values[0]
        };
        let mut trace = BoundaryTrace { time_grid, values, origin_limit, weighted_sup: 0.0 };
        trace.refresh();
        Ok(trace)
    }

    pub fn zeros(time_grid: TimeGrid) -> Self {
        let n = time_grid.len();
        BoundaryTrace { time_grid, values: vec![0.0; n], origin_limit: 0.0, weighted_sup: 0.0 }
    }

    pub fn from_fn(time_grid: TimeGrid, g: impl Fn(f64) -> f64, origin_limit: f64) -> Result<Self> {
        let values = time_grid.times().iter().map(|&t| g(t)).collect();
        Self::new(time_grid, values, origin_limit)
    }

    /// Trace from samples of `q(t) = √t·g(t)` (including `t = 0`).
    pub fn from_weighted(time_grid: TimeGrid, q: impl Fn(f64) -> f64) -> Result<Self> {
        let values = time_grid.times().iter().map(|&t| q(t) / t.sqrt()).collect();
        let q0 = q(0.0);
        Self::new(time_grid, values, q0)
    }

    fn refresh(&mut self) {
        let nodes = self
            .time_grid
            .times()
            .iter()
            .zip(&self.values)
            .fold(0.0_f64, |m, (t, g)| m.max((t.sqrt() * g).abs()));
        self.weighted_sup = nodes.max(self.origin_limit.abs());
    }

    pub fn set_values(&mut self, values: Vec<f64>, origin_limit: f64) -> Result<()> {
        *self = BoundaryTrace::new(self.time_grid.clone(), values, origin_limit)?;
        Ok(())
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin_limit(&self) -> f64 {
        self.origin_limit
    }

    pub fn horizon(&self) -> f64 {
        self.time_grid.horizon()
    }

    /// `sup |√t·g(t)|` over the nodes and the origin limit.
    pub fn weighted_sup(&self) -> f64 {
        self.weighted_sup
    }

    /// `sup √(t/ε)|g(t)|`, the boundary part of `‖v‖_{X_T}`.
    pub fn xt_seminorm(&self, eps: f64) -> f64 {
        self.weighted_sup / eps.sqrt()
    }

    /// Nodal values of `√t·g(t)`, preceded by the origin limit.
    pub fn weighted_values(&self) -> Vec<f64> {
        std::iter::once(self.origin_limit)
            .chain(self.time_grid.times().iter().zip(&self.values).map(|(t, g)| t.sqrt() * g))
            .collect()
    }

    pub fn value_at(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        if !(t > 0.0) {
            return Err(Error::invalid(format!("trace evaluated at t = {t} <= 0")));
        }
        if t > horizon * (1.0 + 1e-12) {
            return Err(Error::TraceTooShort { t, last: horizon });
        }
        let sigma = t.sqrt().min(horizon.sqrt());
        let times = self.time_grid.times();
        let k = times.partition_point(|&ti| ti.sqrt() < sigma);
        let (s0, q0) = if k == 0 { (0.0, self.origin_limit) } else { (times[k - 1].sqrt(), times[k - 1].sqrt() * self.values[k - 1]) };
        let s1 = times[k].sqrt();
        let q1 = s1 * self.values[k];
        let q = q0 + (q1 - q0) * (sigma - s0) / (s1 - s0);
        Ok(q / sigma)
    }

    /// The same trace restricted to nodes `t ≤ t_end`.
    pub fn truncated(&self, t_end: f64) -> Result<Self> {
        let n = self.time_grid.times().partition_point(|&t| t <= t_end * (1.0 + 1e-12));
        if n == 0 {
            return Err(Error::invalid(format!("no trace nodes up to t = {t_end}")));
        }
        let grid = TimeGrid::new(self.time_grid.times()[..n].to_vec(), self.time_grid.includes_origin_limit())?;
        BoundaryTrace::new(grid, self.values[..n].to_vec(), self.origin_limit)
    }
}

/// `E_ε[v](t) = ‖v(·,t)‖_∞ + √(t/ε)·‖∂_ν v(·,t)‖`, with the normal derivative
/// taken on the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub sup_v: f64,
    pub sup_dv: f64,
    pub e_eps: f64,
}

impl EnergyRecord {
    pub fn new(t: f64, sup_v: f64, sup_dv: f64, eps: f64) -> Result<Self> {
        if !(t >= 0.0) || !(eps > 0.0) || !(sup_v >= 0.0) || !(sup_dv >= 0.0) {
            return Err(Error::invalid(format!(
                "energy record needs t >= 0, eps > 0 and nonnegative norms (t = {t}, eps = {eps})"
            )));
        }
        Ok(EnergyRecord { t, sup_v, sup_dv, e_eps: sup_v + (t / eps).sqrt() * sup_dv })
    }

    /// Record of a sampled snapshot `f = v(·,t)`.
    pub fn of_snapshot(f: &SampledFunction, t: f64, eps: f64) -> Result<Self> {
        Self::new(t, f.sup_norm(), f.normal_derivative_at_boundary().abs(), eps)
    }
}

pub fn xt_norm(records: &[EnergyRecord]) -> Result<f64> {
    records.iter().map(|r| r.e_eps).reduce(f64::max).ok_or(Error::NoRecords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ball_grid(r_max: f64) -> SpatialGrid {
        SpatialGrid::for_data(Geometry::exterior_ball(), r_max, &[2.0]).unwrap()
    }

    #[test]
    fn xt_norm_is_max_of_records() {
        let recs: Vec<_> = [1.0, 2.0, 0.5]
            .iter()
            .map(|&e| EnergyRecord { t: 0.1, sup_v: e, sup_dv: 0.0, e_eps: e })
            .collect();
        assert_eq!(xt_norm(&recs).unwrap(), 2.0);
        assert!(matches!(xt_norm(&[]), Err(Error::NoRecords)));
    }

    #[test]
    fn zero_trace_has_zero_seminorm() {
        let trace = BoundaryTrace::zeros(TimeGrid::quadratic(1.0, 8).unwrap());
        assert_eq!(trace.xt_seminorm(0.01), 0.0);
        let rec = EnergyRecord::new(0.5, 0.0, 0.0, 0.01).unwrap();
        assert_eq!(xt_norm(&[rec]).unwrap(), 0.0);
    }

    #[test]
    fn sup_norm_examples() {
        let g = Geometry::half_line();
        let grid = SpatialGrid::uniform(g, 5.0, 10).unwrap();
        let one = SampledFunction::from_fn(g, grid.clone(), |_| 1.0, Tail::Constant { c: 1.0 }).unwrap();
        assert_eq!(sup_norm(&one), 1.0);
        assert_eq!(sup_norm(&SampledFunction::zero(g, grid)), 0.0);

        let b = Geometry::exterior_ball();
        let grid = SpatialGrid::uniform(b, 10.0, 90).unwrap();
        let inv = SampledFunction::from_fn(b, grid, |r| 1.0 / r, Tail::DecayLikeOneOverR { k: 1.0 }).unwrap();
        assert_eq!(sup_norm(&inv), 1.0);
        assert_relative_eq!(inv.decay_constant(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decay_tail_is_checked() {
        let b = Geometry::exterior_ball();
        let grid = SpatialGrid::uniform(b, 10.0, 9).unwrap();
        let err = SampledFunction::from_fn(b, grid, |_| 1.0, Tail::DecayLikeOneOverR { k: 1.0 });
        assert!(err.is_err());
    }

    #[test]
    fn ball_interpolation_is_exact_for_inverse_r() {
        let b = Geometry::exterior_ball();
        let f = SampledFunction::from_fn(b, ball_grid(7.0), |r| 1.0 / r, Tail::DecayLikeOneOverR { k: 1.0 }).unwrap();
        for &r in &[1.0, 1.3, 2.71, 6.99, 9.0, 40.0] {
            assert_relative_eq!(f.eval(r).unwrap(), 1.0 / r, max_relative = 1e-14);
        }
        assert_relative_eq!(f.normal_derivative_at_boundary(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn jumps_keep_both_limits() {
        let g = Geometry::half_line();
        let grid = SpatialGrid::for_data(g, 4.0, &[1.0]).unwrap();
        let n = grid.len();
        let nodes = grid.nodes().to_vec();
        let right: Vec<f64> = nodes.iter().map(|&x| if x >= 1.0 { 1.0 } else { 0.0 }).collect();
        let left: Vec<f64> = nodes.iter().map(|&x| if x > 1.0 { 1.0 } else { 0.0 }).collect();
        let f = SampledFunction::from_limits(g, grid, left, right, Tail::Constant { c: 1.0 }).unwrap();
        assert_eq!(f.eval(0.999_999).unwrap(), 0.0);
        assert_eq!(f.eval(1.0).unwrap(), 1.0);
        assert_eq!(f.eval(100.0).unwrap(), 1.0);
        assert_eq!(f.values().len(), n);
        let pieces = f.pieces();
        assert!(pieces.iter().all(|p| match p {
            Piece::Linear { za, .. } => *za >= 1.0,
            Piece::InverseDistance { .. } => false,
        }));
    }

    #[test]
    fn boundary_profile_shift_matches_pointwise() {
        let b = Geometry::exterior_ball();
        let f = SampledFunction::from_fn(b, ball_grid(6.0), |r| (-r).exp(), Tail::Zero).unwrap();
        let phi = f.minus_boundary_profile(2.0).unwrap();
        for &r in &[1.0, 1.5, 3.0, 5.9, 12.0] {
            assert_relative_eq!(phi.eval(r).unwrap(), f.eval(r).unwrap() - 2.0 / r, max_relative = 1e-13);
        }
        assert_eq!(phi.tail(), Tail::DecayLikeOneOverR { k: -2.0 });
    }

    #[test]
    fn energy_of_inverse_r_is_refinement_invariant() {
        let b = Geometry::exterior_ball();
        let grid = SpatialGrid::uniform(b, 8.0, 14).unwrap();
        let coarse = SampledFunction::from_fn(b, grid.clone(), |r| 1.0 / r, Tail::DecayLikeOneOverR { k: 1.0 }).unwrap();
        let fine = SampledFunction::from_fn(b, grid.refined(), |r| 1.0 / r, Tail::DecayLikeOneOverR { k: 1.0 }).unwrap();
        let e0 = EnergyRecord::of_snapshot(&coarse, 0.1, 0.01).unwrap().e_eps;
        let e1 = EnergyRecord::of_snapshot(&fine, 0.1, 0.01).unwrap().e_eps;
        let h: f64 = 0.5;
        assert!((e0 - e1).abs() <= h * h);
        assert_relative_eq!(e1, 1.0 + (0.1_f64 / 0.01).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn smooth_half_line_energy_converges_at_second_order_or_better() {
        let g = Geometry::half_line();
        let f = |x: f64| x * (-x).exp();
        let mut errs = Vec::new();
        for n in [20, 40, 80] {
            let grid = SpatialGrid::uniform(g, 10.0, n).unwrap();
            let s = SampledFunction::from_fn(g, grid, f, Tail::Zero).unwrap();
            let e = EnergyRecord::of_snapshot(&s, 0.04, 0.04).unwrap().e_eps;
            errs.push((e - ((-1.0_f64).exp() + 1.0)).abs());
        }
        assert!(errs[2] < errs[1] && errs[1] < errs[0]);
    }

    #[test]
    fn trace_interpolates_inverse_sqrt_exactly() {
        let grid = TimeGrid::quadratic(1.0, 16).unwrap();
        let trace = BoundaryTrace::from_weighted(grid, |_| 1.0).unwrap();
        for &t in &[1e-6, 0.003, 0.5, 1.0] {
            assert_relative_eq!(trace.value_at(t).unwrap(), 1.0 / t.sqrt(), max_relative = 1e-13);
        }
        assert!(matches!(trace.value_at(1.5), Err(Error::TraceTooShort { .. })));
        assert_relative_eq!(trace.weighted_sup(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn geometry_parsing_and_domain() {
        assert!("ball".parse::<Geometry>().unwrap().is_ball());
        assert!(!"halfline".parse::<Geometry>().unwrap().is_ball());
        assert!("torus".parse::<Geometry>().is_err());
        assert!(Geometry::exterior_ball().distance(0.5).is_err());
        assert_eq!(Geometry::exterior_ball().dimension(), 3);
        assert!(Geometry::half_space(1).is_err());
    }

    #[test]
    fn graded_grid_contains_breakpoints() {
        let grid = SpatialGrid::for_data(Geometry::exterior_ball(), 30.0, &[2.0, 3.5]).unwrap();
        assert_eq!(grid.boundary(), 1.0);
        assert_eq!(grid.r_max(), 30.0);
        assert!(grid.nodes().contains(&2.0) && grid.nodes().contains(&3.5));
        assert!(grid.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    proptest! {
        #[test]
        fn xt_norm_monotone_in_horizon(vals in proptest::collection::vec(-5.0f64..5.0, 2..40), cut in 0.05f64..0.95) {
            let n = vals.len();
            let grid = TimeGrid::quadratic(1.0, n).unwrap();
            let trace = BoundaryTrace::new(grid, vals, 0.0).unwrap();
            let short = trace.truncated(cut.max(trace.time_grid().times()[0])).unwrap();
            prop_assert!(short.weighted_sup() <= trace.weighted_sup());
        }

        #[test]
        fn trace_sup_is_nodal_max(vals in proptest::collection::vec(-5.0f64..5.0, 1..40)) {
            let grid = TimeGrid::uniform(2.0, vals.len()).unwrap();
            let trace = BoundaryTrace::new(grid.clone(), vals.clone(), 0.0).unwrap();
            let m = grid.times().iter().zip(&vals).fold(0.0f64, |m, (t, g)| m.max((t.sqrt() * g).abs()));
            prop_assert_eq!(trace.weighted_sup(), m);
        }

        #[test]
        fn energy_dominates_sup(sup_v in 0.0f64..10.0, sup_dv in 0.0f64..10.0, t in 0.0f64..5.0, eps in 1e-4f64..1.0) {
            let r = EnergyRecord::new(t, sup_v, sup_dv, eps).unwrap();
            prop_assert!(r.e_eps >= r.sup_v && r.sup_v >= 0.0);
        }
    }
}

//! Convergence rate of `u_ε → S₂(t)φ_b` as `ε → 0`.

use rayon::prelude::*;

use crate::data::DataSpec;
use crate::domain::Geometry;
use crate::error::{Error, Result};
use crate::kernels::{s2_halfspace_constant, s2_kernel_ball};
use crate::operators::ProblemData;
use crate::picard::{solve, SolutionPair, SolverConfig};

/// Least-squares line through `(ln ε, ln deviation)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

impl RateFit {
    pub fn predict(&self, eps: f64) -> f64 {
        (self.intercept + self.slope * eps.ln()).exp()
    }
}

/// Ordinary least squares on the logs; needs at least four positive points.
pub fn fit_power_law(eps: &[f64], deviation: &[f64]) -> Result<RateFit> {
    if eps.len() != deviation.len() {
        return Err(Error::invalid("eps and deviation lists differ in length"));
    }
    if eps.len() < 4 {
        return Err(Error::invalid(format!("a rate fit needs at least 4 points, got {}", eps.len())));
    }
    if eps.iter().chain(deviation).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::invalid("rate fit needs positive finite values"));
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = deviation.iter().map(|d| d.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs distinct eps values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    Ok(RateFit { slope, intercept, max_residual })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateStudy {
    pub geometry: Geometry,
    pub data: DataSpec,
    pub phi_b: f64,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub tau1: f64,
    pub tau2: f64,
    /// Probe interval `K` in the coordinate (`x` or `r`).
    pub probe_range: (f64, f64),
    /// Probes in `x` and in `t`.
    pub probes: (usize, usize),
    pub spacing: ProbeSpacing,
    pub time_nodes: usize,
    pub quadrature_nodes: usize,
    /// Re-evaluate the supremum on a doubled probe grid.
    pub check_probe_doubling: bool,
}

/// `2^{-a}, …, 2^{-b}`.
pub fn powers_of_two(a: i32, b: i32) -> Vec<f64> {
    (a..=b).map(|k| 2f64.powi(-k)).collect()
}

impl RateStudy {
    pub fn new(geometry: Geometry, data: DataSpec, phi_b: f64, eps: Vec<f64>, window: (f64, f64), probe_range: (f64, f64)) -> Self {
        RateStudy {
            geometry,
            data,
            phi_b,
            eps,
            tau1: window.0,
            tau2: window.1,
            probe_range,
            probes: (32, 32),
            spacing: ProbeSpacing::Uniform,
            time_nodes: 256,
            quadrature_nodes: crate::quadrature::DEFAULT_NODES,
            check_probe_doubling: true,
        }
    }

    /// Half-line indicator `χ_{x>1}`, `φ_b = 0`, `ε = 2⁻⁴…2⁻¹²`, window `(0.05, 0.2)`, `K = [0, 3]`.
    pub fn halfline_default() -> Self {
        RateStudy::new(Geometry::half_line(), DataSpec::Indicator { b: 1.0 }, 0.0, powers_of_two(4, 12), (0.05, 0.2), (0.0, 3.0))
    }

    /// Ball data `(1/r)χ_{r>2}` with the given constant boundary datum. The
    /// supremum is over the whole exterior, so `K = [1, 200]` with
    /// geometric probes: the maximizer drifts out like `√(t/ε)`.
    pub fn ball_default(phi_b: f64) -> Self {
        RateStudy {
            spacing: ProbeSpacing::Geometric,
            ..RateStudy::new(Geometry::exterior_ball(), DataSpec::ScaledIndicator { b: 2.0 }, phi_b, powers_of_two(4, 12), (0.05, 0.2), (1.0, 200.0))
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.iter().any(|&e| !(e > 0.0 && e < self.geometry.eps_limit())) {
            return Err(Error::invalid(format!("eps values must lie in (0, {:.6})", self.geometry.eps_limit())));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("eps list must be strictly decreasing"));
        }
        if !(self.tau1 > 0.0 && self.tau1 < self.tau2 && self.tau2.is_finite()) {
            return Err(Error::invalid(format!("need 0 < tau1 < tau2, got ({}, {})", self.tau1, self.tau2)));
        }
        let (a, b) = self.probe_range;
        if !(a >= self.geometry.boundary_coordinate() && a <= b && b.is_finite()) {
            return Err(Error::invalid(format!("probe range ({a}, {b}) is not inside the domain")));
        }
        if self.probes.0 < 2 || self.probes.1 < 2 {
            return Err(Error::invalid("at least 2 probes per direction"));
        }
        if !self.phi_b.is_finite() {
            return Err(Error::invalid("boundary datum must be finite"));
        }
        self.data.require_decay(self.geometry)
    }

    fn problem(&self, eps: f64) -> Result<ProblemData> {
        let r_max = self.data.feature_location().max(self.probe_range.1) + 10.0;
        let phi = self.data.materialize(self.geometry, r_max)?;
        ProblemData::new(self.geometry, eps, phi, self.phi_b)
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            time_nodes: self.time_nodes,
            quadrature_nodes: self.quadrature_nodes,
            energy_records: 0,
            ..SolverConfig::new(self.tau2)
        }
    }
}

/// `S₂(t)ψ` for constant `ψ`.
pub fn s2_constant(geometry: Geometry, psi: f64, x: f64, t: f64) -> Result<f64> {
    if geometry.is_ball() {
        s2_kernel_ball(psi, x, t)
    } else {
        Ok(s2_halfspace_constant(psi, t))
    }
}

/// Spatial probe layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeSpacing {
    Uniform,
    /// Uniform in `ln(1 + y)` with `y` the distance to the boundary.
    Geometric,
}

fn probe_axis(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
}

fn spatial_probes(geometry: Geometry, range: (f64, f64), n: usize, spacing: ProbeSpacing) -> Vec<f64> {
    match spacing {
        ProbeSpacing::Uniform => probe_axis(range, n),
        ProbeSpacing::Geometric => {
            let x0 = geometry.boundary_coordinate();
            let (a, b) = ((1.0 + range.0 - x0).ln(), (1.0 + range.1 - x0).ln());
            let mut xs: Vec<f64> = probe_axis((a, b), n).into_iter().map(|l| x0 + l.exp() - 1.0).collect();
            xs[0] = range.0;
            xs[n - 1] = range.1;
            xs
        }
    }
}

/// `sup |u_ε − S₂(t)φ_b|` over an `nx × nt` probe grid, with the maximizer.
pub fn probe_deviation(
    pair: &SolutionPair,
    x_range: (f64, f64),
    t_range: (f64, f64),
    (nx, nt): (usize, usize),
    spacing: ProbeSpacing,
) -> Result<(f64, (f64, f64))> {
    let g = pair.data().geometry();
    let phi_b = pair.data().phi_b();
    let xs = spatial_probes(g, x_range, nx, spacing);
    let ts = probe_axis(t_range, nt);
    let grid: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    let values = grid
        .par_iter()
        .map(|&(x, t)| Ok(((pair.u(x, t)? - s2_constant(g, phi_b, x, t)?).abs(), (x, t))))
        .collect::<Result<Vec<_>>>()?;
    Ok(values.into_iter().fold((0.0, (f64::NAN, f64::NAN)), |acc, v| if v.0 > acc.0 { v } else { acc }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatePoint {
    pub eps: f64,
    pub deviation: f64,
    pub argmax: (f64, f64),
    pub iterations: usize,
    /// Relative change of the supremum on the doubled probe grid.
    pub doubling_change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub points: Vec<RatePoint>,
    pub fit: RateFit,
    /// `dev(ε_{i+1}) < dev(ε_i)` for every consecutive pair.
    pub monotone: bool,
}

impl RateReport {
    pub fn max_doubling_change(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.doubling_change).reduce(f64::max)
    }
}

fn rate_point(study: &RateStudy, eps: f64) -> Result<RatePoint> {
    let data = study.problem(eps)?;
    let pair = solve(&data, &study.solver())?;
    let window = (study.tau1, study.tau2);
    let (nx, nt) = study.probes;
    let (deviation, argmax) = probe_deviation(&pair, study.probe_range, window, (nx, nt), study.spacing)?;
    let doubling_change = if study.check_probe_doubling {
        let (fine, _) = probe_deviation(&pair, study.probe_range, window, (2 * nx - 1, 2 * nt - 1), study.spacing)?;
        Some((fine - deviation).abs() / fine.max(f64::MIN_POSITIVE))
    } else {
        None
    };
    Ok(RatePoint { eps, deviation, argmax, iterations: pair.iterations(), doubling_change })
}

/// Solves every `ε` in parallel and fits the deviations.
pub fn run_rate_study(study: &RateStudy) -> Result<RateReport> {
    study.validate()?;
    let results: Vec<Result<RatePoint>> = study.eps.par_iter().map(|&e| rate_point(study, e)).collect();
    let mut points = Vec::with_capacity(results.len());
    for (r, &eps) in results.into_iter().zip(&study.eps) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                return Err(Error::StudyAborted {
                    eps,
                    reason: e.to_string(),
                    completed: points.iter().map(|p: &RatePoint| (p.eps, p.deviation)).collect(),
                })
            }
        }
    }
    let eps: Vec<f64> = points.iter().map(|p| p.eps).collect();
    let dev: Vec<f64> = points.iter().map(|p| p.deviation).collect();
    let fit = fit_power_law(&eps, &dev)?;
    let monotone = dev.windows(2).all(|w| w[1] < w[0]);
    Ok(RateReport { points, fit, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_square_root_law() {
        let eps = powers_of_two(4, 12);
        let dev: Vec<f64> = eps.iter().map(|e| e.sqrt()).collect();
        let fit = fit_power_law(&eps, &dev).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-14);
        assert!(fit.intercept.abs() < 1e-13);
        assert!(fit.max_residual < 1e-13);
        assert!((fit.predict(0.25) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn geometric_probes_nest_under_doubling() {
        let g = Geometry::exterior_ball();
        let coarse = spatial_probes(g, (1.0, 200.0), 5, ProbeSpacing::Geometric);
        let fine = spatial_probes(g, (1.0, 200.0), 9, ProbeSpacing::Geometric);
        assert_eq!(coarse[0], 1.0);
        assert_eq!(coarse[4], 200.0);
        for (i, x) in coarse.iter().enumerate() {
            assert!((fine[2 * i] - x).abs() < 1e-12 * x);
        }
    }

    #[test]
    fn fit_needs_four_points() {
        assert!(fit_power_law(&[0.1, 0.01, 0.001], &[1.0, 0.5, 0.2]).is_err());
        assert!(fit_power_law(&[0.1, 0.01, 0.001, 1e-4], &[1.0, 0.5, 0.0, 0.1]).is_err());
    }

    #[test]
    fn study_validation() {
        let mut s = RateStudy::halfline_default();
        assert!(s.validate().is_ok());
        s.eps = vec![0.1, 0.2, 0.01, 0.001];
        assert!(s.validate().is_err());
        let mut b = RateStudy::ball_default(0.0);
        b.data = DataSpec::Indicator { b: 2.0 };
        assert!(matches!(b.validate(), Err(Error::DecayCondition(_))));
        let mut b = RateStudy::ball_default(1.0);
        b.eps = vec![0.6, 0.1, 0.01, 0.001];
        assert!(b.validate().is_err());
    }

    #[test]
    fn zero_data_give_zero_deviation() {
        let mut s = RateStudy::halfline_default();
        s.data = DataSpec::Const(0.0);
        s.eps = powers_of_two(4, 5);
        s.probes = (4, 4);
        s.time_nodes = 32;
        s.check_probe_doubling = false;
        let p = rate_point(&s, 0.0625).unwrap();
        assert_eq!(p.deviation, 0.0);
        assert!(matches!(run_rate_study(&s), Err(Error::InvalidArgument(_))));
    }

    proptest! {
        #[test]
        fn fit_recovers_power_laws(slope in 0.1f64..2.0, c in 0.1f64..10.0) {
            let eps = powers_of_two(2, 9);
            let dev: Vec<f64> = eps.iter().map(|e| c * e.powf(slope)).collect();
            let fit = fit_power_law(&eps, &dev).unwrap();
            prop_assert!((fit.slope - slope).abs() < 1e-10);
            prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
        }
    }
}

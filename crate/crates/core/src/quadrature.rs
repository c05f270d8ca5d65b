//! Composite Gauss–Legendre quadrature for the weakly singular Volterra
//! integrals `∫₀^t P(s)·K(t−s) ds`.
//!
//! With `s = σ²` the density becomes `P(σ²)·2σ`, which is bounded for traces
//! growing like `s^{−1/2}`. Each `σ`-panel is then mapped by `σ = √t − v²`,
//! so `t − s = v²(2√t − v²)` and `K(t−s)·2v` is smooth for every kernel in
//! [`TimeKernel`]. Kernels with a length scale `c` are split geometrically
//! toward `v = 0` down to an eighth of their transition point.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::kernels::{erf, erfc, exp_clamped};

pub const DEFAULT_NODES: usize = 64;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Result<Self> {
        let n = NonZeroUsize::new(n).ok_or_else(|| Error::invalid("quadrature needs at least one node"))?;
        let rule = GaussLegendre::new(n);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Ok(GaussRule { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The rule with twice as many nodes.
    pub fn doubled(&self) -> Self {
        GaussRule::new(2 * self.len()).expect("nonzero node count")
    }

    #[inline]
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        half * sum
    }
}

impl Default for GaussRule {
    fn default() -> Self {
        GaussRule::new(DEFAULT_NODES).expect("nonzero node count")
    }
}

/// Memory kernels `K(τ)` of the time integrals, `τ = t − s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeKernel {
    One,
    /// `τ^{−1/2}`
    InvSqrt,
    /// `erf(c/√τ)`
    Erf { c: f64 },
    /// `erfc(c/√τ)`
    Erfc { c: f64 },
    /// `e^{−c²/τ}/√τ`
    Gauss { c: f64 },
    /// `e^{−λτ}`
    Exp { lambda: f64 },
}

impl TimeKernel {
    pub fn eval(&self, tau: f64) -> f64 {
        match *self {
            TimeKernel::One => 1.0,
            TimeKernel::InvSqrt => 1.0 / tau.sqrt(),
            TimeKernel::Erf { c } => erf(c / tau.sqrt()),
            TimeKernel::Erfc { c } => erfc(c / tau.sqrt()),
            TimeKernel::Gauss { c } => exp_clamped(-c * c / tau) / tau.sqrt(),
            TimeKernel::Exp { lambda } => exp_clamped(-lambda * tau),
        }
    }

    /// `2v·K(v²w)` with `w = 2√t − v²`.
    #[inline]
    fn weighted(&self, v: f64, w: f64) -> f64 {
        match *self {
            TimeKernel::One => 2.0 * v,
            TimeKernel::InvSqrt => 2.0 / w.sqrt(),
            TimeKernel::Erf { c } => 2.0 * v * erf(c / (v * w.sqrt())),
            TimeKernel::Erfc { c } => {
                if v == 0.0 {
                    0.0
                } else {
                    2.0 * v * erfc(c / (v * w.sqrt()))
                }
            }
            TimeKernel::Gauss { c } => {
                if c == 0.0 {
                    2.0 / w.sqrt()
                } else if v == 0.0 {
                    0.0
                } else {
                    2.0 * exp_clamped(-c * c / (v * v * w)) / w.sqrt()
                }
            }
            TimeKernel::Exp { lambda } => 2.0 * v * exp_clamped(-lambda * v * v * w),
        }
    }

    fn scale(&self) -> Option<f64> {
        match *self {
            TimeKernel::Erf { c } | TimeKernel::Erfc { c } | TimeKernel::Gauss { c } if c > 0.0 => Some(c),
            _ => None,
        }
    }

    /// True when the kernel vanishes to double precision for all `τ ≤ tau_max`.
    fn negligible_below(&self, tau_max: f64) -> bool {
        match *self {
            TimeKernel::Erfc { c } => c > 0.0 && c / tau_max.sqrt() > 27.3,
            TimeKernel::Gauss { c } => c > 0.0 && c * c / tau_max > 745.0,
            _ => false,
        }
    }
}

/// `∫₀^t P(s)·K(t−s) ds` for a density given panel-wise on the `σ = √s`
/// nodes `sigma[0] = 0 < sigma[1] < …`.
///
/// `density(k, σ)` must return `P(σ²)·2σ` for `σ` in panel `k`; it is only
/// called on panels that start below `√t`.
pub fn history_integral(
    rule: &GaussRule,
    sigma: &[f64],
    t: f64,
    kernel: TimeKernel,
    density: impl Fn(usize, f64) -> f64,
) -> f64 {
    if !(t > 0.0) {
        return 0.0;
    }
    let root_t = t.sqrt();
    let two_root = 2.0 * root_t;
    let mut total = 0.0;
    for k in 0..sigma.len().saturating_sub(1) {
        let a = sigma[k];
        if a >= root_t {
            break;
        }
        let b = sigma[k + 1].min(root_t);
        let v_hi = (root_t - a).sqrt();
        let v_lo = (root_t - b).max(0.0).sqrt();
        let tau_max = v_hi * v_hi * (two_root - v_hi * v_hi);
        if kernel.negligible_below(tau_max) {
            continue;
        }
        let f = |v: f64| {
            let w = two_root - v * v;
            density(k, root_t - v * v) * kernel.weighted(v, w)
        };
        match kernel.scale() {
            Some(c) if v_lo == 0.0 => {
                let v_star = c / two_root.sqrt();
                let mut hi = v_hi;
                while hi > v_star / 8.0 && hi > 1e-300 {
                    let lo = 0.5 * hi;
                    total += rule.integrate(lo, hi, f);
                    hi = lo;
                }
                total += rule.integrate(0.0, hi, f);
            }
            _ => total += rule.integrate(v_lo, v_hi, f),
        }
    }
    total
}

/// `∫₀^t p(s)·K(t−s) ds` for a density `p` smooth on `[0, t]`.
pub fn smooth_history_integral(rule: &GaussRule, t: f64, kernel: TimeKernel, p: impl Fn(f64) -> f64) -> f64 {
    let sigma = [0.0, t.sqrt()];
    history_integral(rule, &sigma, t, kernel, |_, s| p(s * s) * 2.0 * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials() {
        let rule = GaussRule::new(8).unwrap();
        assert_relative_eq!(rule.integrate(0.0, 2.0, |x| x.powi(15)), 2f64.powi(16) / 16.0, max_relative = 1e-13);
        assert!(GaussRule::new(0).is_err());
    }

    #[test]
    fn beta_integral_is_pi() {
        // ∫₀^t s^{−1/2}(t−s)^{−1/2} ds = π
        let rule = GaussRule::default();
        for &t in &[1e-4, 0.3, 7.0] {
            let v = smooth_history_integral(&rule, t, TimeKernel::InvSqrt, |s| 1.0 / s.sqrt());
            assert_relative_eq!(v, PI, max_relative = 1e-13);
        }
    }

    #[test]
    fn erf_kernel_against_closed_form() {
        // ∫₀^t erfc(c/√τ) dτ = (t + 2c²)·erfc(c/√t) − 2c√(t/π)·e^{−c²/t}
        let rule = GaussRule::default();
        for &(t, c) in &[(1.0, 1e-4), (0.25, 0.05), (2.0, 1.5), (0.01, 3.0)] {
            let v = smooth_history_integral(&rule, t, TimeKernel::Erfc { c }, |_| 1.0);
            let exact = (t + 2.0 * c * c) * erfc(c / f64::sqrt(t)) - 2.0 * c * f64::sqrt(t / PI) * (-c * c / t).exp();
            assert!((v - exact).abs() < 1e-13 * (1.0 + exact.abs()), "t = {t}, c = {c}: {v} vs {exact}");
            let w = smooth_history_integral(&rule, t, TimeKernel::Erf { c }, |_| 1.0);
            assert!((w + v - t).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_kernel_against_closed_form() {
        // ∫₀^t e^{−c²/τ}τ^{−1/2} dτ = 2√t·e^{−c²/t} − 2c√π·erfc(c/√t)
        let rule = GaussRule::default();
        for &(t, c) in &[(1.0, 1e-5), (0.3, 0.2), (4.0, 2.0)] {
            let v = smooth_history_integral(&rule, t, TimeKernel::Gauss { c }, |_| 1.0);
            let exact = 2.0 * f64::sqrt(t) * (-c * c / t).exp() - 2.0 * c * PI.sqrt() * erfc(c / f64::sqrt(t));
            assert!((v - exact).abs() < 1e-13, "t = {t}, c = {c}");
        }
    }

    #[test]
    fn panelled_trace_density() {
        // g(s) = 1/√s on σ-panels: ∫₀^t g(s)/√(t−s) ds = π for every t
        let rule = GaussRule::default();
        let sigma: Vec<f64> = (0..=16).map(|i| i as f64 / 16.0).collect();
        for &t in &[0.01, 0.2, 0.5, 1.0] {
            let v = history_integral(&rule, &sigma, t, TimeKernel::InvSqrt, |_, _| 2.0);
            assert_relative_eq!(v, PI, max_relative = 1e-13);
        }
    }

    #[test]
    fn doubling_nodes_is_stable() {
        let rule = GaussRule::default();
        let fine = rule.doubled();
        let sigma: Vec<f64> = (0..=64).map(|i| (i as f64 / 64.0) * 0.5).collect();
        let dens = |_: usize, s: f64| 2.0 * (1.0 + (3.0 * s).sin());
        for kernel in [TimeKernel::InvSqrt, TimeKernel::Erf { c: 0.01 }, TimeKernel::Gauss { c: 0.03 }, TimeKernel::Exp { lambda: 1.0 }] {
            let a = history_integral(&rule, &sigma, 0.2, kernel, dens);
            let b = history_integral(&fine, &sigma, 0.2, kernel, dens);
            assert!((a - b).abs() < 1e-8, "{kernel:?}");
        }
    }
}

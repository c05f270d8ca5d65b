//! Closed-form kernels: erf, the image-method Dirichlet heat kernels on the
//! half-line and on the radial exterior of the unit ball, the boundary
//! semigroup kernels, and the exact action of the half-line Dirichlet heat
//! semigroup on one linear piece of data.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// `e^{x}` with arguments below `−745` flushed to exactly zero.
#[inline]
pub fn exp_clamped(x: f64) -> f64 {
    if x < -745.0 {
        0.0
    } else {
        x.exp()
    }
}

#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// `erf(b) − erf(a)` without cancellation when both arguments sit in the
/// same tail.
pub fn erf_diff(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a >= 0.0 && b >= 0.0 {
        erfc(a) - erfc(b)
    } else if a <= 0.0 && b <= 0.0 {
        erfc(-b) - erfc(-a)
    } else {
        erf(b) - erf(a)
    }
}

/// `e^{−u²} − e^{−v²}` given `u` and `d = v² − u²`, accurate for small `d`.
#[inline]
fn gauss_gap(u: f64, d: f64) -> f64 {
    -exp_clamped(-u * u) * (-d).exp_m1()
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("kernel time must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `(4πt)^{−1/2}(e^{−(x−y)²/4t} − e^{−(x+y)²/4t})`.
pub fn heat_kernel_halfline(t: f64, x: f64, y: f64) -> Result<f64> {
    check_time(t)?;
    if x < 0.0 || y < 0.0 {
        return Err(Error::OutOfDomain(format!("half-line kernel at x = {x}, y = {y}")));
    }
    let u2 = (x - y) * (x - y) / (4.0 * t);
    Ok(gauss_gap(u2.sqrt(), x * y / t) / (4.0 * PI * t).sqrt())
}

/// `(ρ/(r√(4πt)))(e^{−(r−ρ)²/4t} − e^{−(r+ρ−2)²/4t})`.
pub fn heat_kernel_ball_radial(t: f64, r: f64, rho: f64) -> Result<f64> {
    check_time(t)?;
    if r < 1.0 || rho < 1.0 {
        return Err(Error::OutOfDomain(format!("ball kernel at r = {r}, rho = {rho}")));
    }
    let u2 = (r - rho) * (r - rho) / (4.0 * t);
    Ok(rho / r * gauss_gap(u2.sqrt(), (r - 1.0) * (rho - 1.0) / t) / (4.0 * PI * t).sqrt())
}

/// `ψ/(r·e^t)`.
pub fn s2_kernel_ball(psi: f64, r: f64, t: f64) -> Result<f64> {
    if r < 1.0 || !(t >= 0.0) {
        return Err(Error::OutOfDomain(format!("boundary semigroup on the ball at r = {r}, t = {t}")));
    }
    Ok(psi * exp_clamped(-t) / r)
}

/// The half-space boundary semigroup on constant boundary data, normalized so
/// that constants are fixed.
pub fn s2_halfspace_constant(psi: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    psi
}

/// Value and `y`-derivative of the half-line Dirichlet heat semigroup at time
/// `τ`, applied to `F(z) = fa + slope·(z − za)` on `[za, zb]` and zero
/// elsewhere. `zb` may be infinite; `za ≥ 0`.
pub fn linear_piece_action(tau: f64, y: f64, za: f64, zb: f64, fa: f64, slope: f64) -> (f64, f64) {
    let s = 2.0 * tau.sqrt();
    let rt = tau.sqrt();
    let fy = fa + slope * (y - za);
    let fmy = fa - slope * (y + za);
    let ua = (za - y) / s;
    let va = (za + y) / s;
    let infinite = zb.is_infinite();
    let (ub, vb) = if infinite { (f64::INFINITY, f64::INFINITY) } else { ((zb - y) / s, (zb + y) / s) };
    let du = erf_diff(ua, ub);
    let dv = erf_diff(va, vb);

    // e^{−u²} − e^{−v²} at each end; v² − u² = z·y/τ
    let gap_a = gauss_gap(ua.abs(), za * y / tau);
    let gap_b = if infinite { 0.0 } else { gauss_gap(ub.abs(), zb * y / tau) };
    let value = 0.5 * (fy * du - fmy * dv) + slope * rt * FRAC_1_SQRT_PI * (gap_a - gap_b);

    let norm = 1.0 / (PI * tau).sqrt();
    let ea = 0.5 * norm * (exp_clamped(-ua * ua) + exp_clamped(-va * va));
    let eb = if infinite { 0.0 } else { 0.5 * norm * (exp_clamped(-ub * ub) + exp_clamped(-vb * vb)) };
    let fb = if infinite { 0.0 } else { fa + slope * (zb - za) };
    let deriv = 0.5 * slope * (du + dv) + fa * ea - fb * eb;
    (value, deriv)
}

/// `∂_y` of [`linear_piece_action`] at `y = 0`.
pub fn linear_piece_flux(tau: f64, za: f64, zb: f64, fa: f64, slope: f64) -> f64 {
    linear_piece_action(tau, 0.0, za, zb, fa, slope).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use gauss_quad::GaussLegendre;
    use proptest::prelude::*;
    use std::num::NonZeroUsize;

    /// Maclaurin series summed in order; independent of libm.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        2.0 / PI.sqrt() * sum
    }

    fn gl(n: usize) -> GaussLegendre {
        GaussLegendre::new(NonZeroUsize::new(n).unwrap())
    }

    fn composite(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> f64) -> f64 {
        let rule = gl(40);
        let h = (b - a) / panels as f64;
        (0..panels).map(|k| rule.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &f)).sum()
    }

    #[test]
    fn erf_reference_values() {
        assert_eq!(erf(0.0), 0.0);
        assert!((erf(10.0) - 1.0).abs() < 1e-14);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        for &x in &[0.1, 0.5, 1.0, 1.7, 2.5] {
            assert!((erf(x) - erf_series(x)).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn erf_diff_keeps_tail_precision() {
        let d = erf_diff(6.0, 6.5);
        let reference = erfc(6.0) - erfc(6.5);
        assert_relative_eq!(d, reference, max_relative = 1e-14);
        assert!(d > 0.0);
        assert_relative_eq!(erf_diff(-6.5, -6.0), d, max_relative = 1e-14);
    }

    #[test]
    fn halfline_kernel_examples() {
        assert_eq!(heat_kernel_halfline(0.3, 0.0, 1.0).unwrap(), 0.0);
        let k = heat_kernel_halfline(0.25, 1.0, 1.0).unwrap();
        assert_relative_eq!(k, (PI).sqrt().recip() * (1.0 - (-4.0f64).exp()), max_relative = 1e-14);
        let a = heat_kernel_halfline(0.1, 1.0, 2.0).unwrap();
        let b = heat_kernel_halfline(0.1, 2.0, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(heat_kernel_halfline(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn ball_kernel_examples() {
        assert_eq!(heat_kernel_ball_radial(0.3, 1.0, 2.0).unwrap(), 0.0);
        let k = heat_kernel_ball_radial(0.25, 2.0, 2.0).unwrap();
        assert_relative_eq!(k, 2.0 / (2.0 * PI.sqrt()) * (1.0 - (-4.0f64).exp()), max_relative = 1e-14);
        assert!(heat_kernel_ball_radial(0.25, 0.5, 2.0).is_err());
    }

    #[test]
    fn boundary_semigroup_examples() {
        assert_eq!(s2_kernel_ball(1.0, 2.0, 0.0).unwrap(), 0.5);
        assert_eq!(s2_kernel_ball(0.0, 3.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(s2_kernel_ball(3.0, 1.0, 2f64.ln()).unwrap(), 1.5, max_relative = 1e-15);
        assert!(s2_kernel_ball(1.0, 0.9, 0.0).is_err());
        assert_eq!(s2_halfspace_constant(1.0, 5.0), 1.0);
        assert_eq!(s2_halfspace_constant(0.0, 1.0), 0.0);
        assert_eq!(s2_halfspace_constant(-2.0, 0.0), -2.0);
    }

    #[test]
    fn halfline_kernel_mass() {
        let (t, x) = (0.3, 1.2);
        let mass = composite(0.0, 12.0, 60, |y| heat_kernel_halfline(t, x, y).unwrap());
        assert!((mass - erf(x / (2.0 * t.sqrt()))).abs() < 1e-8);
    }

    #[test]
    fn ball_kernel_on_constant_data() {
        for &(t, r) in &[(0.3, 1.5), (1.0, 2.0), (0.05, 1.1)] {
            let mass = composite(1.0, 1.0 + r + 30.0 * f64::sqrt(t), 200, |rho| heat_kernel_ball_radial(t, r, rho).unwrap());
            let closed = 1.0 - erfc((r - 1.0) / (2.0 * f64::sqrt(t))) / r;
            assert!((mass - closed).abs() < 1e-8, "t = {t}, r = {r}");
        }
    }

    #[test]
    fn kernels_have_the_semigroup_property() {
        let f = |y: f64| (-(y - 1.0) * (y - 1.0)).exp() * y;
        let (t, s, x) = (0.1, 0.1, 0.8);
        let direct = composite(0.0, 5.0, 50, |y| heat_kernel_halfline(t + s, x, y).unwrap() * f(y));
        let nested = composite(0.0, 5.0, 50, |z| {
            heat_kernel_halfline(t, x, z).unwrap() * composite(0.0, 5.0, 25, |y| heat_kernel_halfline(s, z, y).unwrap() * f(y))
        });
        assert!((direct - nested).abs() < 1e-6);

        let g = |rho: f64| (-(rho - 2.0) * (rho - 2.0)).exp();
        let r = 1.7;
        let direct = composite(1.0, 6.0, 50, |rho| heat_kernel_ball_radial(t + s, r, rho).unwrap() * g(rho));
        let nested = composite(1.0, 6.0, 50, |q| {
            heat_kernel_ball_radial(t, r, q).unwrap() * composite(1.0, 6.0, 25, |rho| heat_kernel_ball_radial(s, q, rho).unwrap() * g(rho))
        });
        assert!((direct - nested).abs() < 1e-6);
    }

    #[test]
    fn piece_action_matches_quadrature() {
        let (tau, y) = (0.07, 0.4);
        let (za, zb, fa, slope) = (0.2, 1.3, 0.5, -0.8);
        let (v, d) = linear_piece_action(tau, y, za, zb, fa, slope);
        let f = |z: f64| fa + slope * (z - za);
        let q = composite(za, zb, 40, |z| heat_kernel_halfline(tau, y, z).unwrap() * f(z));
        assert!((v - q).abs() < 1e-13);
        let h = 1e-5;
        let vp = linear_piece_action(tau, y + h, za, zb, fa, slope).0;
        let vm = linear_piece_action(tau, y - h, za, zb, fa, slope).0;
        assert!((d - (vp - vm) / (2.0 * h)).abs() < 1e-7);
        assert_eq!(linear_piece_action(tau, 0.0, za, zb, fa, slope).0, 0.0);
    }

    #[test]
    fn infinite_piece_matches_closed_form() {
        // constant 1 on (0, ∞) gives erf(y/(2√τ))
        for &(tau, y) in &[(0.01, 0.05), (1.0, 2.0), (1e6, 3.0)] {
            let (v, d) = linear_piece_action(tau, y, 0.0, f64::INFINITY, 1.0, 0.0);
            assert_relative_eq!(v, erf(y / (2.0 * f64::sqrt(tau))), max_relative = 1e-14);
            let dd = (-y * y / (4.0 * tau)).exp() / (PI * tau).sqrt();
            assert_relative_eq!(d, dd, max_relative = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn erf_is_odd_and_monotone(x in -6.0f64..6.0, dx in 0.0f64..1.0) {
            prop_assert_eq!(erf(-x), -erf(x));
            prop_assert!(erf(x + dx) >= erf(x));
        }

        #[test]
        fn halfline_kernel_nonnegative(t in 1e-3f64..10.0, x in 0.0f64..5.0, y in 0.0f64..5.0) {
            prop_assert!(heat_kernel_halfline(t, x, y).unwrap() >= 0.0);
        }

        #[test]
        fn piece_action_is_linear_in_data(tau in 1e-3f64..5.0, y in 0.0f64..3.0, fa in -2.0f64..2.0, s in -2.0f64..2.0) {
            let (a, da) = linear_piece_action(tau, y, 0.3, 1.0, fa, s);
            let (b, db) = linear_piece_action(tau, y, 0.3, 1.0, 2.0 * fa, 2.0 * s);
            prop_assert!((b - 2.0 * a).abs() <= 1e-14 * (1.0 + a.abs()));
            prop_assert!((db - 2.0 * da).abs() <= 1e-12 * (1.0 + da.abs()));
        }
    }
}

//! Closed-form reference values for the Dirichlet heat semigroup on the
//! worked example data, written directly from the erf reductions and sharing
//! nothing with [`crate::kernels`] beyond the erf primitive.

use std::f64::consts::PI;

use crate::domain::Geometry;
use crate::error::{Error, Result};

/// A closed-form value together with its factorization
/// `value = prefactor · I` (the `I` factor tends to 1 as `ε → 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Factorized {
    pub value: f64,
    pub prefactor: f64,
    pub i_factor: f64,
    /// `i_factor` was obtained as a limit (point on the boundary).
    pub limit: bool,
}

fn erf_gap(a: f64, b: f64) -> f64 {
    // erf(b) − erf(a), taking complements in a common tail
    if a >= 0.0 && b >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if a <= 0.0 && b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

fn check(eps: f64, t: f64) -> Result<()> {
    if !(eps > 0.0) || !(t > 0.0) {
        return Err(Error::invalid(format!("oracle needs eps > 0 and t > 0 (eps = {eps}, t = {t})")));
    }
    Ok(())
}

/// `S₁(t/ε)χ_{x>b}` at height `x` on the half-line:
/// `(1/√π)∫_{√(ε/4t)(b−x)}^{√(ε/4t)(b+x)} e^{−z²}dz = x√(ε/(πt))·I(ε,t,x)`.
pub fn s1_indicator_halfline(eps: f64, t: f64, x: f64, b: f64) -> Result<Factorized> {
    check(eps, t)?;
    if x < 0.0 || !(b > 0.0) {
        return Err(Error::invalid(format!("need x >= 0 and b > 0 (x = {x}, b = {b})")));
    }
    let a = (eps / (4.0 * t)).sqrt();
    let value = 0.5 * erf_gap(a * (b - x), a * (b + x));
    let prefactor = x * (eps / (PI * t)).sqrt();
    if x == 0.0 {
        return Ok(Factorized { value: 0.0, prefactor: 0.0, i_factor: (-(a * b) * (a * b)).exp(), limit: true });
    }
    Ok(Factorized { value, prefactor, i_factor: value / prefactor, limit: false })
}

/// `S₁(t/ε)[(1/ρ)χ_{ρ>b}]` at radius `r` on the exterior of the unit ball:
/// `(1/(r√π))∫_{(b−r)/(2√(t/ε))}^{(b+r−2)/(2√(t/ε))} e^{−z²}dz = ((r−1)/(r√π))√(ε/t)·I(ε,t,r)`.
pub fn s1_indicator_ball(eps: f64, t: f64, r: f64, b: f64) -> Result<Factorized> {
    check(eps, t)?;
    if r < 1.0 || !(b > 1.0) {
        return Err(Error::invalid(format!("need r >= 1 and b > 1 (r = {r}, b = {b})")));
    }
    let s = 2.0 * (t / eps).sqrt();
    let value = erf_gap((b - r) / s, (b + r - 2.0) / s) / (2.0 * r);
    let prefactor = (r - 1.0) / (r * PI.sqrt()) * (eps / t).sqrt();
    if r == 1.0 {
        let c = (b - 1.0) / s;
        return Ok(Factorized { value: 0.0, prefactor: 0.0, i_factor: (-c * c).exp(), limit: true });
    }
    Ok(Factorized { value, prefactor, i_factor: value / prefactor, limit: false })
}

/// `lim_{t→∞} S₁(t)χ_{r>b} = 1 − 1/r` on the exterior of the unit ball.
pub fn long_time_exterior_limit(r: f64, b: f64) -> Result<f64> {
    if r < 1.0 || !(b >= 1.0) {
        return Err(Error::invalid(format!("need r >= 1 and b >= 1 (r = {r}, b = {b})")));
    }
    Ok(1.0 - 1.0 / r)
}

/// `S₁(t)χ_{r>b}` at finite `t`:
/// `(√t/(r√π))(e^{−(b−r)²/4t} − e^{−(b+r−2)²/4t}) + ½erfc((b−r)/2√t) + ((r−2)/(2r))erfc((b+r−2)/2√t)`.
pub fn s1_exterior_indicator(t: f64, r: f64, b: f64) -> Result<f64> {
    if !(t > 0.0) || r < 1.0 || !(b >= 1.0) {
        return Err(Error::invalid(format!("need t > 0, r >= 1, b >= 1 (t = {t}, r = {r}, b = {b})")));
    }
    let s = 2.0 * t.sqrt();
    let (p, m) = ((b - r) / s, (b + r - 2.0) / s);
    // e^{−p²} − e^{−m²} with m² − p² = (r−1)(b−1)/t
    let gap = -(-p * p).exp() * (-(r - 1.0) * (b - 1.0) / t).exp_m1();
    Ok(t.sqrt() / (r * PI.sqrt()) * gap + 0.5 * libm::erfc(p) + (r - 2.0) / (2.0 * r) * libm::erfc(m))
}

/// `S₁(t)1 = 1 − (1/r)·erfc((r−1)/(2√t))` on the exterior of the unit ball.
pub fn s1_constant_ball(t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0) || r < 1.0 {
        return Err(Error::invalid(format!("need t > 0 and r >= 1 (t = {t}, r = {r})")));
    }
    Ok(1.0 - libm::erfc((r - 1.0) / (2.0 * t.sqrt())) / r)
}

type ClosedForm = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// One closed form and the region where it is checked, in the variables
/// `(x, s)` with `s` the semigroup time.
pub struct OracleCase {
    pub name: &'static str,
    pub geometry: Geometry,
    /// Initial data in the data-spec mini-language.
    pub data_spec: String,
    pub x_range: (f64, f64),
    pub s_range: (f64, f64),
    pub closed_form: ClosedForm,
}

impl std::fmt::Debug for OracleCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleCase")
            .field("name", &self.name)
            .field("geometry", &self.geometry)
            .field("data_spec", &self.data_spec)
            .field("x_range", &self.x_range)
            .field("s_range", &self.s_range)
            .finish()
    }
}

/// The four reference cases: half-line indicator, ball scaled indicator,
/// ball indicator (finite-time exterior form) and ball constant.
pub fn cases() -> Vec<OracleCase> {
    vec![
        OracleCase {
            name: "halfline-indicator",
            geometry: Geometry::half_line(),
            data_spec: "indicator:b=1".into(),
            x_range: (0.1, 3.0),
            s_range: (1e-2, 1e4),
            closed_form: Box::new(|x, s| s1_indicator_halfline(1.0, s, x, 1.0).map(|f| f.value).unwrap_or(f64::NAN)),
        },
        OracleCase {
            name: "ball-scaled-indicator",
            geometry: Geometry::exterior_ball(),
            data_spec: "scaled-indicator:b=2".into(),
            x_range: (1.1, 4.0),
            s_range: (1e-2, 1e4),
            closed_form: Box::new(|r, s| s1_indicator_ball(1.0, s, r, 2.0).map(|f| f.value).unwrap_or(f64::NAN)),
        },
        OracleCase {
            name: "ball-indicator-exterior",
            geometry: Geometry::exterior_ball(),
            data_spec: "indicator:b=2".into(),
            x_range: (1.1, 4.0),
            s_range: (1e-2, 1e6),
            closed_form: Box::new(|r, s| s1_exterior_indicator(s, r, 2.0).unwrap_or(f64::NAN)),
        },
        OracleCase {
            name: "ball-constant",
            geometry: Geometry::exterior_ball(),
            data_spec: "const:1".into(),
            x_range: (1.1, 4.0),
            s_range: (1e-2, 1e4),
            closed_form: Box::new(|r, s| s1_constant_ball(s, r).unwrap_or(f64::NAN)),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const ERF1: f64 = 0.842_700_792_949_714_9;

    #[test]
    fn halfline_examples() {
        let z = s1_indicator_halfline(0.1, 0.3, 0.0, 1.0).unwrap();
        assert_eq!(z.value, 0.0);
        assert!(z.limit);
        let v = s1_indicator_halfline(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v.value, ERF1 / 2.0, max_relative = 1e-15);
        let small = s1_indicator_halfline(1e-8, 0.1, 1.5, 1.0).unwrap();
        assert!((small.i_factor - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ball_examples() {
        assert_eq!(s1_indicator_ball(0.1, 0.3, 1.0, 2.0).unwrap().value, 0.0);
        let eps = 0.01;
        let v = s1_indicator_ball(eps, eps, 2.0, 2.0).unwrap();
        assert_relative_eq!(v.value, ERF1 / 4.0, max_relative = 1e-15);
        let small = s1_indicator_ball(1e-8, 0.1, 2.5, 2.0).unwrap();
        assert!((small.i_factor - 1.0).abs() < 1e-6);
    }

    #[test]
    fn long_time_examples() {
        assert_eq!(long_time_exterior_limit(1.0, 2.0).unwrap(), 0.0);
        assert_eq!(long_time_exterior_limit(2.0, 2.0).unwrap(), 0.5);
        assert!((long_time_exterior_limit(1e12, 2.0).unwrap() - 1.0).abs() < 1e-11);
        assert!((s1_exterior_indicator(1e6, 2.0, 2.0).unwrap() - 0.5).abs() < 1e-2);
        assert!((s1_exterior_indicator(1e12, 3.0, 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-5);
        assert!(s1_exterior_indicator(0.5, 1.0, 2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn constant_examples() {
        assert_eq!(s1_constant_ball(0.3, 1.0).unwrap(), 0.0);
        assert!((s1_constant_ball(1e-6, 1.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((s1_constant_ball(1e12, 2.0).unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn exterior_indicator_with_b_one_is_constant_case() {
        for &(t, r) in &[(0.1, 1.3), (2.0, 2.0), (50.0, 4.0)] {
            assert_relative_eq!(s1_exterior_indicator(t, r, 1.0).unwrap(), s1_constant_ball(t, r).unwrap(), max_relative = 1e-13);
        }
    }

    proptest! {
        #[test]
        fn indicators_monotone_in_space(eps in 1e-4f64..1.0, t in 1e-3f64..10.0, x in 0.0f64..4.0, dx in 0.0f64..1.0) {
            let a = s1_indicator_halfline(eps, t, x, 1.0).unwrap().value;
            let b = s1_indicator_halfline(eps, t, x + dx, 1.0).unwrap().value;
            prop_assert!(b >= a - 1e-15);
        }

        #[test]
        fn ball_indicator_reduced_monotone_in_radius(eps in 1e-4f64..0.5, t in 1e-3f64..10.0, r in 1.0f64..4.0, dr in 0.0f64..1.0) {
            let a = r * s1_indicator_ball(eps, t, r, 2.0).unwrap().value;
            let b = (r + dr) * s1_indicator_ball(eps, t, r + dr, 2.0).unwrap().value;
            prop_assert!(b >= a - 1e-15);
        }
    }
}

//! Closed-form length and distortion bounds.
//!
//! `m(r, s, θ)` is the minimum length of an arc outside the open unit ball
//! joining points at radii `r` and `s` that subtend the central angle `θ`;
//! `m1(s, θ)` is its minimum over the first radius. All angles are radians.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

/// Inputs this far below the domain boundary are clamped onto it; anything
/// further out is a domain error.
const DOMAIN_TOL: f64 = 1e-12;

/// Which piece of a piecewise formula produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `m`: the straight chord misses the ball.
    Chord,
    /// `m`: tangent segment, great-circle arc, tangent segment.
    Wrap,
    /// `m1`: `θ <= arcsec s`.
    SmallAngle,
    /// `m1`: `θ >= arcsec s`.
    LargeAngle,
    /// Single-formula bounds.
    Direct,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::Chord => "chord",
            Branch::Wrap => "wrap",
            Branch::SmallAngle => "small-angle",
            Branch::LargeAngle => "large-angle",
            Branch::Direct => "direct",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundEval {
    pub value: f64,
    pub branch: Branch,
}

fn radius(name: &str, x: f64) -> Result<f64> {
    if x.is_nan() || x < 1.0 - DOMAIN_TOL {
        return Err(Error::Domain(format!("{name} = {x} must be >= 1")));
    }
    Ok(x.max(1.0))
}

fn angle(theta: f64) -> Result<f64> {
    if !(-DOMAIN_TOL..=PI + DOMAIN_TOL).contains(&theta) {
        return Err(Error::Domain(format!("angle {theta} must lie in [0, pi]")));
    }
    Ok(theta.clamp(0.0, PI))
}

/// `arcsec x = arccos(1/x)` for `x >= 1`.
pub fn arcsec(x: f64) -> Result<f64> {
    let x = radius("x", x)?;
    Ok((1.0 / x).acos())
}

/// `θ0(r, s) = arcsec r + arcsec s`, the angle at which the chord starts to
/// cut into the ball.
pub fn theta0(r: f64, s: f64) -> Result<f64> {
    Ok(arcsec(r)? + arcsec(s)?)
}

/// Shortest arc length outside the unit ball between points at radii `r`,
/// `s` separated by central angle `theta`.
pub fn m(r: f64, s: f64, theta: f64) -> Result<BoundEval> {
    let r = radius("r", r)?;
    let s = radius("s", s)?;
    let theta = angle(theta)?;
    let t0 = theta0(r, s)?;
    if theta <= t0 {
        let v = (r * r + s * s - 2.0 * r * s * theta.cos()).max(0.0).sqrt();
        Ok(BoundEval {
            value: v,
            branch: Branch::Chord,
        })
    } else {
        let v = (r * r - 1.0).sqrt() + (s * s - 1.0).sqrt() + theta - t0;
        Ok(BoundEval {
            value: v,
            branch: Branch::Wrap,
        })
    }
}

/// `m1(s, θ) = min_{r >= 1} m(r, s, θ)`.
pub fn m1(s: f64, theta: f64) -> Result<BoundEval> {
    let s = radius("s", s)?;
    let theta = angle(theta)?;
    let a = arcsec(s)?;
    if theta <= a {
        Ok(BoundEval {
            value: s * theta.sin(),
            branch: Branch::SmallAngle,
        })
    } else {
        Ok(BoundEval {
            value: (s * s - 1.0).sqrt() + theta - a,
            branch: Branch::LargeAngle,
        })
    }
}

/// Length of the path that follows a quarter circle from a unit-radius point
/// and then runs straight to a point at radius `s` on the far side:
/// `sqrt(s^2 + 1) + pi/2`. Always below `m1(s, pi)`.
pub fn quarter_circle_bound(s: f64) -> Result<f64> {
    let s = radius("s", s)?;
    Ok((s * s + 1.0).sqrt() + FRAC_PI_2)
}

/// Lower bound `2 pi - 2 arcsin(c/2)` on the arc distance between the ends
/// of an essential secant of chord `c`, measured in units of the shortest
/// essential secant.
pub fn secant_length_bound(c: f64) -> Result<f64> {
    if c.is_nan() || c <= 0.0 || c > 2.0 {
        return Err(Error::Domain(format!("chord {c} must lie in (0, 2]")));
    }
    Ok(2.0 * PI - 2.0 * (c / 2.0).asin())
}

/// Distortion bound `sec(alpha/2)` for an arc of total curvature `alpha < pi`.
pub fn curvature_distortion_bound(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || !(0.0..PI).contains(&alpha) {
        return Err(Error::Domain(format!(
            "total curvature {alpha} must lie in [0, pi)"
        )));
    }
    Ok(1.0 / (alpha / 2.0).cos())
}

/// Distortion bound `R/2` for a closed curve of ropelength `R`.
pub fn ropelength_distortion_bound(ropelength: f64) -> Result<f64> {
    if ropelength.is_nan() || ropelength <= 0.0 {
        return Err(Error::Domain(format!(
            "ropelength {ropelength} must be positive"
        )));
    }
    Ok(ropelength / 2.0)
}

/// `5 pi / 3`, the distortion lower bound for nontrivial tame knots.
pub fn knot_distortion_lower_constant() -> f64 {
    5.0 * PI / 3.0
}

/// Gromov's lower bound `pi/2` for any closed curve.
pub fn closed_curve_lower_constant() -> f64 {
    FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn theta0_examples() {
        assert_eq!(theta0(1.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(theta0(2.0, 2.0).unwrap(), 2.0 * PI / 3.0, max_relative = 1e-15);
        let r2 = 2f64.sqrt();
        assert_relative_eq!(theta0(r2, r2).unwrap(), FRAC_PI_2, max_relative = 1e-15);
        assert!(theta0(0.5, 1.0).is_err());
        // Rounding just below 1 is clamped.
        assert_eq!(theta0(1.0 - 1e-14, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn m_examples() {
        let e = m(1.0, 1.0, PI).unwrap();
        assert_relative_eq!(e.value, PI, max_relative = 1e-15);
        assert_eq!(e.branch, Branch::Wrap);

        let e = m(2.0, 2.0, FRAC_PI_3).unwrap();
        assert_relative_eq!(e.value, 2.0, max_relative = 1e-15);
        assert_eq!(e.branch, Branch::Chord);

        let e = m(2.0, 2.0, PI).unwrap();
        assert_relative_eq!(e.value, 2.0 * 3f64.sqrt() + PI / 3.0, max_relative = 1e-15);
        assert_eq!(e.branch, Branch::Wrap);

        assert!(m(0.5, 1.0, 1.0).is_err());
        assert!(m(1.0, 1.0, 4.0).is_err());
        assert!(m(1.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn m1_examples() {
        let e = m1(2.0, PI).unwrap();
        assert_relative_eq!(e.value, 3f64.sqrt() + 2.0 * PI / 3.0, max_relative = 1e-15);
        assert!((e.value - 3.826).abs() < 5e-4);
        assert_eq!(e.branch, Branch::LargeAngle);
        for k in 0..=20 {
            let th = PI * k as f64 / 20.0;
            assert_relative_eq!(m1(1.0, th).unwrap().value, th, max_relative = 1e-15);
        }
        let e = m1(3.0, 0.0).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.branch, Branch::SmallAngle);
    }

    #[test]
    fn quarter_circle_examples() {
        assert_relative_eq!(quarter_circle_bound(1.0).unwrap(), 2f64.sqrt() + FRAC_PI_2);
        let q2 = quarter_circle_bound(2.0).unwrap();
        assert_relative_eq!(q2, 5f64.sqrt() + FRAC_PI_2);
        assert!(q2 < m1(2.0, PI).unwrap().value);
        assert_relative_eq!(quarter_circle_bound(10.0).unwrap(), 101f64.sqrt() + FRAC_PI_2);
    }

    #[test]
    fn secant_examples() {
        assert_relative_eq!(secant_length_bound(1.0).unwrap(), 5.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(secant_length_bound(2.0).unwrap(), PI, max_relative = 1e-15);
        assert!((secant_length_bound(1e-300).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!(secant_length_bound(0.0).is_err());
        assert!(secant_length_bound(2.0001).is_err());
    }

    #[test]
    fn simple_bounds() {
        assert_eq!(curvature_distortion_bound(0.0).unwrap(), 1.0);
        assert_relative_eq!(curvature_distortion_bound(2.0 * PI / 3.0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(curvature_distortion_bound(FRAC_PI_2).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
        assert!(curvature_distortion_bound(PI).is_err());
        assert_relative_eq!(ropelength_distortion_bound(2.0 * PI).unwrap(), PI);
        assert_eq!(ropelength_distortion_bound(1.0).unwrap(), 0.5);
        assert_eq!(ropelength_distortion_bound(32.0).unwrap(), 16.0);
        assert!(ropelength_distortion_bound(0.0).is_err());
    }

    #[test]
    fn knot_constant() {
        let k = knot_distortion_lower_constant();
        assert!((k - 5.235987755982988).abs() < 1e-15);
        assert!((k - secant_length_bound(1.0).unwrap()).abs() <= 2.0 * f64::EPSILON * k);
        assert!(k > closed_curve_lower_constant());
    }

    #[test]
    fn m1_monotone_on_grid() {
        let ns = 200;
        for i in 0..=ns {
            let s = 1.0 + 4.0 * i as f64 / ns as f64;
            let mut prev = m1(s, 0.0).unwrap().value;
            for j in 1..=ns {
                let th = PI * j as f64 / ns as f64;
                let cur = m1(s, th).unwrap().value;
                assert!(cur - prev >= -1e-12, "theta monotonicity at s={s} th={th}");
                assert!(cur >= th - 1e-12, "m1 >= theta at s={s} th={th}");
                prev = cur;
            }
        }
        for j in 0..=ns {
            let th = PI * j as f64 / ns as f64;
            let mut prev = m1(1.0, th).unwrap().value;
            for i in 1..=ns {
                let s = 1.0 + 4.0 * i as f64 / ns as f64;
                let cur = m1(s, th).unwrap().value;
                assert!(cur - prev >= -1e-12, "s monotonicity at s={s} th={th}");
                prev = cur;
            }
        }
    }

    #[test]
    fn m1_concave_in_theta() {
        let ns = 400;
        let h = PI / ns as f64;
        for i in 0..=40 {
            let s = 1.0 + 0.1 * i as f64;
            for j in 1..ns {
                let th = j as f64 * h;
                let d2 = m1(s, th + h).unwrap().value - 2.0 * m1(s, th).unwrap().value
                    + m1(s, th - h).unwrap().value;
                assert!(d2 <= 1e-12, "second difference {d2} at s={s} th={th}");
            }
        }
    }

    #[test]
    fn remark_on_grid() {
        for i in 0..=9900 {
            let s = 1.0 + 0.01 * i as f64;
            let v = m1(s, PI).unwrap();
            assert_eq!(v.branch, Branch::LargeAngle);
            assert!(v.value > quarter_circle_bound(s).unwrap());
            assert!(v.value > s + FRAC_PI_2);
        }
    }

    #[test]
    fn secant_bound_strictly_decreasing() {
        let mut prev = f64::INFINITY;
        for i in 1..=2000 {
            let c = 2.0 * i as f64 / 2000.0;
            let v = secant_length_bound(c).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn arcsec_quarter() {
        assert_relative_eq!(arcsec(2f64.sqrt()).unwrap(), FRAC_PI_4, max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn m_continuous_across_theta0(r in 1.0..6.0f64, s in 1.0..6.0f64) {
            let t0 = theta0(r, s).unwrap();
            prop_assume!(t0 > 1e-7 && t0 < PI - 1e-7);
            let eps = 1e-8;
            let lo = m(r, s, t0 - eps).unwrap();
            let hi = m(r, s, t0 + eps).unwrap();
            prop_assert_eq!(lo.branch, Branch::Chord);
            prop_assert_eq!(hi.branch, Branch::Wrap);
            prop_assert!((lo.value - hi.value).abs() <= 1e-6);
        }

        #[test]
        fn m1_is_min_over_r(s in 1.0..5.0f64, theta in 0.0..PI) {
            let target = m1(s, theta).unwrap().value;
            let n = 10_000;
            let hi = s + 5.0;
            let grid_min = (0..n)
                .map(|k| 1.0 + (hi - 1.0) * k as f64 / (n - 1) as f64)
                .map(|r| m(r, s, theta).unwrap().value)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(grid_min >= target - 1e-6);
            prop_assert!(grid_min <= target + 1e-3);
        }

        #[test]
        fn branch_matches_inputs(s in 1.0..5.0f64, theta in 0.0..PI) {
            let e = m1(s, theta).unwrap();
            let expect = if theta <= arcsec(s).unwrap() { Branch::SmallAngle } else { Branch::LargeAngle };
            prop_assert_eq!(e.branch, expect);
        }
    }
}

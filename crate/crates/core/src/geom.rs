//! Planar vectors and unit directions.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Quarter turn counter-clockwise: `(x, y) -> (-y, x)`.
    pub fn perp(self) -> Vec2 {
        perp(self)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// `(x1, x2) -> (-x2, x1)`. Applying it twice negates the argument.
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// `v1 u2 - u1 v2`, which equals `u . perp(v)`.
pub fn det2(v: Direction, u: Direction) -> f64 {
    v.0.x * u.0.y - u.0.x * v.0.y
}

const UNIT_TOL: f64 = 1e-12;

/// A unit vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vec2);

impl Direction {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let v = Vec2::new(x, y);
        if !x.is_finite() || !y.is_finite() || (v.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(x, y));
        }
        Ok(Direction(v))
    }

    /// Normalizes `v`; fails only for the zero vector or non-finite input.
    pub fn normalized(v: Vec2) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit(v.x, v.y));
        }
        Ok(Direction(Vec2::new(v.x / n, v.y / n)))
    }

    pub fn from_angle(theta: f64) -> Self {
        Direction(Vec2::from_angle(theta))
    }

    pub fn vec(self) -> Vec2 {
        self.0
    }

    pub fn x(self) -> f64 {
        self.0.x
    }

    pub fn y(self) -> f64 {
        self.0.y
    }

    pub fn perp(self) -> Direction {
        Direction(perp(self.0))
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.0.dot(other)
    }

    pub fn angle(self) -> f64 {
        self.0.angle()
    }
}

impl Neg for Direction {
    type Output = Direction;
    fn neg(self) -> Direction {
        Direction(-self.0)
    }
}

impl From<Direction> for Vec2 {
    fn from(d: Direction) -> Vec2 {
        d.0
    }
}

/// Parameter interval `[t0, t1]` on which `p + t d` lies in the closed disc
/// of radius `r` about the origin, if the line meets it.
pub(crate) fn disc_chord(p: Vec2, d: Vec2, r: f64) -> Option<(f64, f64)> {
    // |p + t d|^2 = r^2 with |d| = 1
    let b = p.dot(d);
    let c = p.norm_sq() - r * r;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((-b - s, -b + s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perp_of_basis_vectors() {
        assert_eq!(perp(Vec2::new(1.0, 0.0)), Vec2::new(0.0, 1.0));
        assert_eq!(perp(Vec2::new(0.0, 1.0)), Vec2::new(-1.0, 0.0));
    }

    #[test]
    fn det2_examples() {
        let u = Direction::new(1.0, 0.0).unwrap();
        let v = Direction::new(0.0, 1.0).unwrap();
        assert_eq!(det2(v, u), -1.0);
        assert_eq!(det2(u, u), 0.0);
        for &(a, b) in &[(0.3, 1.9), (-2.0, 0.4), (1.0, 1.0 + 1e-3)] {
            let u = Direction::from_angle(a);
            let v = Direction::from_angle(b);
            // hand oracle: v1 u2 - u1 v2 = cos b sin a - cos a sin b
            let expected = (a - b).sin();
            assert!((det2(v, u) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn direction_rejects_non_unit() {
        assert!(Direction::new(1.0, 1e-3).is_err());
        assert!(Direction::new(0.6, 0.8).is_ok());
        assert!(Direction::new(f64::NAN, 0.0).is_err());
        assert!(Direction::normalized(Vec2::ZERO).is_err());
        let d = Direction::normalized(Vec2::new(3.0, 4.0)).unwrap();
        assert!((d.vec().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chord_of_unit_disc() {
        let (t0, t1) = disc_chord(Vec2::new(-2.0, 0.0), Vec2::new(1.0, 0.0), 1.0).unwrap();
        assert!((t0 - 1.0).abs() < 1e-15 && (t1 - 3.0).abs() < 1e-15);
        assert!(disc_chord(Vec2::new(0.0, 1.5), Vec2::new(1.0, 0.0), 1.0).is_none());
    }

    proptest! {
        #[test]
        fn perp_twice_negates(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            let v = Vec2::new(a, b);
            prop_assert_eq!(perp(perp(v)), -v);
        }

        #[test]
        fn det2_is_dot_with_perp(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let u = Direction::from_angle(a);
            let v = Direction::from_angle(b);
            prop_assert_eq!(det2(v, u), u.vec().dot(perp(v.vec())));
        }
    }
}

//! Scalar quaternions and the complex split used by every matrix routine.
//!
//! A quaternion `a = w + x i + y j + z k` splits as `a = c1 + j c2` with
//! `c1 = w + x i` and `c2 = y - z i`. The split interacts with products through
//! the commutation rule `j c = conj(c) j`, which is what makes the pairwise
//! matrix representation in [`crate::qmat`] work.

use num_complex::Complex64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// The complex pair (c1, c2) with a = c1 + j c2.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexPair {
    pub c1: C64,
    pub c2: C64,
}

impl Quat {
    pub const ZERO: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Quat = Quat { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: Quat = Quat { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Self { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Embeds a complex number through the canonical copy of C inside H.
    pub fn from_complex(c: C64) -> Self {
        Self { w: c.re, x: c.im, y: 0.0, z: 0.0 }
    }

    pub fn conj(self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn abs_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn abs(self) -> f64 {
        self.abs_sq().sqrt()
    }

    /// Multiplicative inverse; None at zero.
    pub fn inv(self) -> Option<Self> {
        let n = self.abs_sq();
        if n == 0.0 {
            return None;
        }
        Some(self.conj() * (1.0 / n))
    }

    pub fn split(self) -> ComplexPair {
        ComplexPair {
            c1: C64::new(self.w, self.x),
            c2: C64::new(self.y, -self.z),
        }
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl ComplexPair {
    pub fn merge(self) -> Quat {
        Quat {
            w: self.c1.re,
            x: self.c1.im,
            y: self.c2.re,
            z: -self.c2.im,
        }
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, r: Quat) -> Quat {
        Quat::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl AddAssign for Quat {
    fn add_assign(&mut self, r: Quat) {
        *self = *self + r;
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, r: Quat) -> Quat {
        Quat::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl SubAssign for Quat {
    fn sub_assign(&mut self, r: Quat) {
        *self = *self - r;
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product. Noncommutative: i j = k = -(j i).
impl Mul for Quat {
    type Output = Quat;
    fn mul(self, r: Quat) -> Quat {
        Quat {
            w: self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            x: self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            y: self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            z: self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        }
    }
}

impl Mul<f64> for Quat {
    type Output = Quat;
    fn mul(self, s: f64) -> Quat {
        Quat::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

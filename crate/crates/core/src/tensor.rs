//! Symmetric 2x2 tensors for in-plane strain and stress.

use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        xx: 0.0,
        yy: 0.0,
        xy: 0.0,
    };

    pub const fn new(xx: f64, yy: f64, xy: f64) -> Self {
        Sym2 { xx, yy, xy }
    }

    pub const fn identity() -> Self {
        Sym2::new(1.0, 1.0, 0.0)
    }

    pub fn spherical(value: f64) -> Self {
        Sym2::new(value, value, 0.0)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// In-plane deviator `t - (tr t / 2) I`.
    pub fn deviator(&self) -> Sym2 {
        let m = 0.5 * self.trace();
        Sym2::new(self.xx - m, self.yy - m, self.xy)
    }

    /// Double contraction `a : b`.
    pub fn ddot(&self, other: &Sym2) -> f64 {
        self.xx * other.xx + self.yy * other.yy + 2.0 * self.xy * other.xy
    }

    pub fn norm_sq(&self) -> f64 {
        self.ddot(self)
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        [m + r, m - r]
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx + o.xx, self.yy + o.yy, self.xy + o.xy)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.xx - o.xx, self.yy - o.yy, self.xy - o.xy)
    }
}

impl Mul<Sym2> for f64 {
    type Output = Sym2;
    fn mul(self, t: Sym2) -> Sym2 {
        Sym2::new(self * t.xx, self * t.yy, self * t.xy)
    }
}

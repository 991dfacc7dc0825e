//! Points of ℝ/ℤ as 128-bit binary fractions.
//!
//! Integer multiples and sums are exact modulo 1, so phases such as
//! `α·n²` or `k^L·α` never accumulate rounding error. A finite `f64` in
//! `[0, 1)` with exponent above `-128` converts without loss.

use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Turn(pub u128);

const TWO_128: f64 = 340282366920938463463374607431768211456.0;

impl Turn {
    pub const ZERO: Turn = Turn(0);

    pub fn from_f64(x: f64) -> Turn {
        assert!(x.is_finite(), "phase must be finite");
        if x < 0.0 {
            return -Turn::from_f64(-x);
        }
        let frac = x - x.floor();
        if frac == 0.0 {
            return Turn::ZERO;
        }
        let bits = frac.to_bits();
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let (mant, e) = if exp == 0 {
            (bits & ((1u64 << 52) - 1), -1074)
        } else {
            ((bits & ((1u64 << 52) - 1)) | (1u64 << 52), exp - 1075)
        };
        let shift = e + 128;
        if shift >= 0 {
            Turn((mant as u128) << shift)
        } else if shift > -64 {
            Turn((mant as u128) >> (-shift))
        } else {
            Turn::ZERO
        }
    }

    /// `p/q mod 1`, rounded down to the nearest representable point.
    pub fn from_ratio(p: i128, q: u64) -> Turn {
        assert!(q > 0, "denominator must be positive");
        let q = q as u128;
        let r = p.rem_euclid(q as i128) as u128;
        let hi = (r << 64) / q;
        let rem = (r << 64) % q;
        let lo = (rem << 64) / q;
        Turn((hi << 64) | lo)
    }

    /// Representative in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_128
    }

    /// Representative in `[-1/2, 1/2)`.
    pub fn centered(self) -> f64 {
        (self.0 as i128) as f64 / TWO_128
    }

    /// Distance to the nearest integer.
    pub fn dist0(self) -> f64 {
        self.centered().abs()
    }

    pub fn mul_u(self, n: u128) -> Turn {
        Turn(self.0.wrapping_mul(n))
    }

    pub fn mul_i(self, n: i128) -> Turn {
        Turn(self.0.wrapping_mul(n as u128))
    }

    /// `e(x) = exp(2πix)`.
    pub fn e(self) -> Complex64 {
        let (s, c) = (std::f64::consts::TAU * self.centered()).sin_cos();
        Complex64::new(c, s)
    }
}

impl Add for Turn {
    type Output = Turn;
    fn add(self, o: Turn) -> Turn {
        Turn(self.0.wrapping_add(o.0))
    }
}

impl Sub for Turn {
    type Output = Turn;
    fn sub(self, o: Turn) -> Turn {
        Turn(self.0.wrapping_sub(o.0))
    }
}

impl Neg for Turn {
    type Output = Turn;
    fn neg(self) -> Turn {
        Turn(self.0.wrapping_neg())
    }
}

/// `exp(2πix)` for a real `x`, reduced mod 1 first.
pub fn e(x: f64) -> Complex64 {
    Turn::from_f64(x).e()
}

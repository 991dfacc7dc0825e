//! Output values: exact complex rationals or floating complex pairs.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type ExactComplex = Complex<BigRational>;

/// A sequence value. Arithmetic between two exact values stays exact; any
/// floating operand makes the result floating.
#[derive(Clone, Debug)]
pub enum Value {
    Exact(ExactComplex),
    Float(Complex64),
}

fn canon(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => {
                canon(a.re) == canon(b.re) && canon(a.im) == canon(b.im)
            }
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Value::Exact(a) => {
                0u8.hash(state);
                a.re.hash(state);
                a.im.hash(state);
            }
            Value::Float(a) => {
                1u8.hash(state);
                canon(a.re).hash(state);
                canon(a.im).hash(state);
            }
        }
    }
}

impl Value {
    pub fn int(n: i64) -> Self {
        Value::Exact(Complex::new(BigRational::from_integer(n.into()), BigRational::zero()))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Value::Exact(Complex::new(
            BigRational::new(p.into(), q.into()),
            BigRational::zero(),
        ))
    }

    pub fn exact(re: BigRational, im: BigRational) -> Self {
        Value::Exact(Complex::new(re, im))
    }

    pub fn float(c: Complex64) -> Self {
        Value::Float(c)
    }

    pub fn zero() -> Self {
        Value::int(0)
    }

    pub fn one() -> Self {
        Value::int(1)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Value::Exact(a) => Complex64::new(
                a.re.to_f64().unwrap_or(f64::NAN),
                a.im.to_f64().unwrap_or(f64::NAN),
            ),
            Value::Float(a) => *a,
        }
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(a) => a.re.is_zero() && a.im.is_zero(),
            Value::Float(a) => a.re == 0.0 && a.im == 0.0,
        }
    }

    /// Zero test with a tolerance for floating values; exact values are
    /// tested exactly.
    pub fn is_negligible(&self, tol: f64) -> bool {
        match self {
            Value::Exact(_) => self.is_zero(),
            Value::Float(a) => a.norm() <= tol,
        }
    }

    /// Real part as an exact rational, when the value is exact and real.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(a) if a.im.is_zero() => Some(&a.re),
            _ => None,
        }
    }

    pub fn add(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            _ => Value::Float(self.to_c64() + o.to_c64()),
        }
    }

    pub fn sub(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            _ => Value::Float(self.to_c64() - o.to_c64()),
        }
    }

    pub fn mul(&self, o: &Value) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            _ => Value::Float(self.to_c64() * o.to_c64()),
        }
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(-a.clone()),
            Value::Float(a) => Value::Float(-a),
        }
    }

    pub fn conj(&self) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(a.conj()),
            Value::Float(a) => Value::Float(a.conj()),
        }
    }

    pub fn scale(&self, n: &BigInt) -> Value {
        match self {
            Value::Exact(a) => {
                let r = BigRational::from_integer(n.clone());
                Value::Exact(Complex::new(&a.re * &r, &a.im * &r))
            }
            Value::Float(a) => Value::Float(a * n.to_f64().unwrap_or(f64::NAN)),
        }
    }

    pub fn div_int(&self, n: &BigInt) -> Value {
        match self {
            Value::Exact(a) => {
                let r = BigRational::from_integer(n.clone());
                Value::Exact(Complex::new(&a.re / &r, &a.im / &r))
            }
            Value::Float(a) => Value::Float(a / n.to_f64().unwrap_or(f64::NAN)),
        }
    }

    /// Squared modulus bound check `|v| <= 1`, exact when possible.
    pub fn within_unit_disc(&self) -> bool {
        match self {
            Value::Exact(a) => {
                let n = &a.re * &a.re + &a.im * &a.im;
                n <= BigRational::one()
            }
            Value::Float(a) => a.norm_sqr() <= 1.0 + 1e-12,
        }
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl std::str::FromStr for Value {
    type Err = crate::Error;

    /// `p`, `p/q`, decimals, or `re±imi`.
    fn from_str(s: &str) -> crate::Result<Value> {
        crate::automaton::parse_value(s).ok_or_else(|| crate::Error::InvalidArgument(format!("bad value `{s}`")))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(a) => {
                if a.im.is_zero() {
                    write!(f, "{}", fmt_rational(&a.re))
                } else {
                    let sign = if a.im.is_negative() { "-" } else { "+" };
                    write!(f, "{}{}{}i", fmt_rational(&a.re), sign, fmt_rational(&a.im.abs()))
                }
            }
            Value::Float(a) => {
                if a.im == 0.0 {
                    write!(f, "{}", crate::fmt_num(a.re))
                } else {
                    let sign = if a.im < 0.0 { "-" } else { "+" };
                    write!(f, "{}{}{}i", crate::fmt_num(a.re), sign, crate::fmt_num(a.im.abs()))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Value::ratio(1, 2);
        let b = Value::ratio(-1, 3);
        assert_eq!(a.add(&b), Value::ratio(1, 6));
        assert_eq!(a.mul(&b), Value::ratio(-1, 6));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn mixing_kinds_produces_float() {
        let a = Value::ratio(1, 2);
        let b = Value::float(Complex64::new(0.25, 1.0));
        let c = a.add(&b);
        assert!(!c.is_exact());
        assert_eq!(c.to_c64(), Complex64::new(0.75, 1.0));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Value::ratio(-1, 2).to_string(), "-1/2");
        let v = Value::exact(BigRational::from_integer(1.into()), BigRational::new((-2).into(), 3.into()));
        assert_eq!(v.to_string(), "1-2/3i");
    }
}

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::turn::Turn;

/// A phase coefficient: exact rational `p/q` or a real number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coeff {
    Rational(i64, u64),
    Real(f64),
    /// A point of `ℝ/ℤ` held exactly in fixed point.
    Turn(Turn),
}

impl Coeff {
    pub fn rational(p: i64, q: u64) -> Coeff {
        assert!(q > 0, "denominator must be positive");
        let g = (p.unsigned_abs()).gcd(&q).max(1);
        Coeff::Rational(p / g as i64, q / g)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Coeff::Rational(p, q) => p as f64 / q as f64,
            Coeff::Real(x) => x,
            Coeff::Turn(t) => t.to_f64(),
        }
    }

    pub fn turn(self) -> Turn {
        match self {
            Coeff::Rational(p, q) => Turn::from_ratio(p as i128, q),
            Coeff::Real(x) => Turn::from_f64(x),
            Coeff::Turn(t) => t,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Coeff::Rational(p, _) => p == 0,
            Coeff::Real(x) => x == 0.0,
            Coeff::Turn(t) => t == Turn::ZERO,
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Rational(p, 1) => write!(f, "{p}"),
            Coeff::Rational(p, q) => write!(f, "{p}/{q}"),
            Coeff::Real(x) => write!(f, "{}", crate::fmt_num(*x)),
            Coeff::Turn(t) => write!(f, "{}", crate::fmt_num(t.to_f64())),
        }
    }
}

fn parse_term(t: &str) -> Option<Coeff> {
    match t {
        "golden" => return Some(Coeff::Real((5f64.sqrt() - 1.0) / 2.0)),
        "pi" => return Some(Coeff::Real(std::f64::consts::PI)),
        _ => {}
    }
    if let Some(r) = t.strip_prefix("sqrt") {
        let v: f64 = r.parse().ok()?;
        return (v >= 0.0).then(|| Coeff::Real(v.sqrt()));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.parse().ok()?;
        let q: u64 = q.parse().ok()?;
        return (q > 0).then(|| Coeff::rational(p, q));
    }
    if let Ok(p) = t.parse::<i64>() {
        return Some(Coeff::Rational(p, 1));
    }
    t.parse::<f64>().ok().filter(|x| x.is_finite()).map(Coeff::Real)
}

/// Parses sums of terms such as `1/3`, `0.25`, `sqrt2-1`, `golden`, `pi`.
pub fn parse_real(s: &str) -> Option<Coeff> {
    let s = s.trim();
    let bytes = s.as_bytes();
    let mut cuts = vec![0];
    for i in 1..bytes.len() {
        if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'+' | b'-') {
            cuts.push(i);
        }
    }
    cuts.push(bytes.len());
    let mut acc: Option<Coeff> = None;
    for w in cuts.windows(2) {
        let term = &s[w[0]..w[1]];
        let (neg, body) = match term.as_bytes().first() {
            Some(b'-') => (true, &term[1..]),
            Some(b'+') => (false, &term[1..]),
            _ => (false, term),
        };
        let mut c = parse_term(body)?;
        if neg {
            c = match c {
                Coeff::Rational(p, q) => Coeff::Rational(-p, q),
                Coeff::Real(x) => Coeff::Real(-x),
                Coeff::Turn(t) => Coeff::Turn(-t),
            };
        }
        acc = Some(match (acc, c) {
            (None, c) => c,
            (Some(Coeff::Rational(a, b)), Coeff::Rational(c, d)) => {
                let l = b.lcm(&d);
                Coeff::rational(a * (l / b) as i64 + c * (l / d) as i64, l)
            }
            (Some(x), y) => Coeff::Real(x.to_f64() + y.to_f64()),
        });
    }
    acc
}

/// `p(n) = Σ α_i n^i`, evaluated modulo 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePolynomial {
    coeffs: Vec<Coeff>,
}

impl PhasePolynomial {
    pub fn new(mut coeffs: Vec<Coeff>) -> PhasePolynomial {
        while coeffs.len() > 1 && coeffs.last().unwrap().is_zero() {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Coeff::Rational(0, 1));
        }
        PhasePolynomial { coeffs }
    }

    pub fn from_reals(c: Vec<f64>) -> PhasePolynomial {
        PhasePolynomial::new(c.into_iter().map(Coeff::Real).collect())
    }

    pub fn from_turns(c: Vec<Turn>) -> PhasePolynomial {
        PhasePolynomial::new(c.into_iter().map(Coeff::Turn).collect())
    }

    pub fn linear(alpha: f64) -> PhasePolynomial {
        PhasePolynomial::new(vec![Coeff::Rational(0, 1), Coeff::Real(alpha)])
    }

    pub fn linear_ratio(p: i64, q: u64) -> PhasePolynomial {
        PhasePolynomial::new(vec![Coeff::Rational(0, 1), Coeff::rational(p, q)])
    }

    /// `lin:<alpha>`, `poly:<c0>,<c1>,...` or `rat:<p>/<q>`.
    pub fn parse(spec: &str) -> Result<PhasePolynomial> {
        let bad = || Error::InvalidArgument(format!("bad phase `{spec}`"));
        let (kind, body) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "lin" => Ok(PhasePolynomial::new(vec![Coeff::Rational(0, 1), parse_real(body).ok_or_else(bad)?])),
            "rat" => match parse_real(body).ok_or_else(bad)? {
                c @ Coeff::Rational(..) => Ok(PhasePolynomial::new(vec![Coeff::Rational(0, 1), c])),
                _ => Err(bad()),
            },
            "poly" => {
                let c: Option<Vec<Coeff>> = body.split(',').map(parse_real).collect();
                Ok(PhasePolynomial::new(c.ok_or_else(bad)?))
            }
            _ => Err(bad()),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Coeff] {
        &self.coeffs
    }

    /// Common denominator when every coefficient is rational.
    pub fn denominator(&self) -> Option<u64> {
        self.coeffs.iter().try_fold(1u64, |acc, c| match c {
            Coeff::Rational(_, q) => Some(acc.lcm(q)),
            _ => None,
        })
    }

    /// Integer coefficients, when all coefficients are integers.
    pub fn integer_coeffs(&self) -> Option<Vec<i64>> {
        self.coeffs
            .iter()
            .map(|c| match c {
                Coeff::Rational(p, 1) => Some(*p),
                _ => None,
            })
            .collect()
    }

    /// `p(n) mod 1`, exact up to the initial rounding of each coefficient.
    pub fn eval_turn(&self, n: u64) -> Turn {
        let n = n as u128;
        self.coeffs
            .iter()
            .rev()
            .fold(Turn::ZERO, |acc, c| acc.mul_u(n) + c.turn())
    }

    /// `p(n) mod 1` for a rational phase, computed in integers mod `q`.
    pub fn eval_rational(&self, n: u64) -> Option<(u64, u64)> {
        let q = self.denominator()?;
        let nn = (n % q) as u128;
        let mut acc = 0u128;
        for c in self.coeffs.iter().rev() {
            let Coeff::Rational(p, d) = *c else { unreachable!() };
            let num = (p as i128 * (q / d) as i128).rem_euclid(q as i128) as u128;
            acc = (acc * nn + num) % q as u128;
        }
        Some((acc as u64, q))
    }

    /// Multiplies every coefficient by the integer `m`.
    pub fn scaled(&self, m: i64) -> PhasePolynomial {
        PhasePolynomial::new(
            self.coeffs
                .iter()
                .map(|c| match *c {
                    Coeff::Rational(p, q) => Coeff::rational(p * m, q),
                    Coeff::Real(x) => Coeff::Real(x * m as f64),
                    Coeff::Turn(t) => Coeff::Turn(t.mul_i(m as i128)),
                })
                .collect(),
        )
    }
}

impl fmt::Display for PhasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 1 && self.coeffs[0].is_zero() {
            return match self.coeffs[1] {
                c @ Coeff::Rational(..) => write!(f, "rat:{c}"),
                c => write!(f, "lin:{c}"),
            };
        }
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "poly:{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse_real("1/3"), Some(Coeff::Rational(1, 3)));
        assert_eq!(parse_real("2/6"), Some(Coeff::Rational(1, 3)));
        assert_eq!(parse_real("1/2+1/3"), Some(Coeff::Rational(5, 6)));
        assert_eq!(parse_real("-3"), Some(Coeff::Rational(-3, 1)));
        let c = parse_real("sqrt2-1").unwrap().to_f64();
        assert!((c - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(parse_real("1e-3"), Some(Coeff::Real(1e-3)));
        assert!(parse_real("abc").is_none());

        let p = PhasePolynomial::parse("poly:0,0,sqrt2").unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(PhasePolynomial::parse("rat:1/3").unwrap(), PhasePolynomial::linear_ratio(1, 3));
        assert!(PhasePolynomial::parse("rat:0.5").is_err());
        assert!(PhasePolynomial::parse("cubic:1").is_err());
        assert_eq!(PhasePolynomial::parse("lin:golden").unwrap().to_string(), "lin:0.61803398875");
    }

    #[test]
    fn evaluation() {
        let p = PhasePolynomial::parse("poly:1/4,0,1/4").unwrap();
        for n in 0..20u64 {
            let (num, q) = p.eval_rational(n).unwrap();
            assert_eq!(q, 4);
            assert_eq!(num, (1 + n * n) % 4);
            assert!((p.eval_turn(n).to_f64() - num as f64 / 4.0).abs() < 1e-15);
        }
        let r = PhasePolynomial::from_reals(vec![0.0, 0.1, 0.01]);
        let x = r.eval_turn(1000).to_f64();
        assert!((x - (100.0 + 10_000.0f64) % 1.0).abs() < 1e-9);
    }
}

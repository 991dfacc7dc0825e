//! Automatic sequences read least significant digit first, their weighted
//! exponential sums, and weighted ergodic averages on torus systems.

pub mod analysis;
pub mod automaton;
pub mod builtins;
pub mod ergodic;
pub mod error;
pub mod exact;
pub mod expsum;
pub mod invariants;
pub mod turn;
pub mod value;

pub use automaton::{Automaton, DigitWord, SequenceHandle};
pub use error::{Error, Result};
pub use value::Value;

/// Significant digits used by every numeric report.
pub const REPORT_DIGITS: usize = 12;

/// Formats `x` with 12 significant digits, trailing zeros removed;
/// scientific notation outside `[1e-5, 1e12)`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", REPORT_DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-5..12).contains(&exp) {
        let mant = trim(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (REPORT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_num;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt_num(4.0 / (3.0 * 3f64.sqrt())), "0.76980035892");
        assert_eq!(fmt_num(123456.789), "123456.789");
        assert_eq!(fmt_num(1e-9), "1e-9");
        assert_eq!(fmt_num(2.5e13), "2.5e13");
    }
}

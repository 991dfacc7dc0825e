//! Line-oriented text format.
//!
//! ```text
//! reading: lsd-first
//! base: 2
//! states: a b
//! initial: a
//! output: a=1 b=-1
//! delta: a 0 -> a
//! delta: a 1 -> b
//! delta: b 0 -> b
//! delta: b 1 -> a
//! ```
//!
//! Outputs are `p`, `p/q`, decimals, or complex `re+imi` with either part
//! in those forms. Files using only integers and fractions load exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::Automaton;
use crate::error::{Error, Result};
use crate::value::Value;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

enum Part {
    Exact(BigRational),
    Float(f64),
}

impl Part {
    fn to_f64(&self) -> f64 {
        match self {
            Part::Exact(r) => {
                use num_traits::ToPrimitive;
                r.to_f64().unwrap_or(f64::NAN)
            }
            Part::Float(x) => *x,
        }
    }
}

fn parse_real(s: &str) -> Option<Part> {
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.parse().ok()?;
        let q: BigInt = q.parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Part::Exact(BigRational::new(p, q)));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Part::Exact(BigRational::from_integer(n)));
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite()).map(Part::Float)
}

/// Parses `re`, `imi`, or `re±imi`.
pub(crate) fn parse_value(s: &str) -> Option<Value> {
    let s = s.trim();
    let (re, im) = if let Some(body) = s.strip_suffix('i') {
        // split at the last sign not at position 0 and not after an exponent
        let bytes = body.as_bytes();
        let cut = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        match cut {
            Some(i) => (parse_real(&body[..i])?, {
                let t = &body[i..];
                let t = t.strip_prefix('+').unwrap_or(t);
                parse_real(if t == "-" { "-1" } else if t.is_empty() { "1" } else { t })?
            }),
            None => {
                let t = if body.is_empty() || body == "+" { "1" } else if body == "-" { "-1" } else { body };
                (Part::Exact(BigRational::zero()), parse_real(t)?)
            }
        }
    } else {
        (parse_real(s)?, Part::Exact(BigRational::zero()))
    };
    Some(match (re, im) {
        (Part::Exact(a), Part::Exact(b)) => Value::exact(a, b),
        (a, b) => Value::float(Complex64::new(a.to_f64(), b.to_f64())),
    })
}

pub fn parse_automaton(text: &str) -> Result<Automaton> {
    let mut reading = false;
    let mut base: Option<u32> = None;
    let mut states: Option<Vec<String>> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut initial: Option<usize> = None;
    let mut outputs: HashMap<usize, Value> = HashMap::new();
    let mut delta: HashMap<(usize, u32), usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| err(line_no, format!("expected `key: value`, got `{line}`")))?;
        let rest = rest.trim();
        match key.trim() {
            "reading" => {
                if rest != "lsd-first" {
                    return Err(err(line_no, format!("unsupported reading order `{rest}`")));
                }
                reading = true;
            }
            "base" => {
                let k: u32 = rest.parse().map_err(|_| err(line_no, format!("bad base `{rest}`")))?;
                if k < 2 {
                    return Err(err(line_no, "base must be at least 2"));
                }
                base = Some(k);
            }
            "states" => {
                if states.is_some() {
                    return Err(err(line_no, "duplicate `states:` line"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(err(line_no, "empty state list"));
                }
                for (j, n) in names.iter().enumerate() {
                    if index.insert(n.clone(), j).is_some() {
                        return Err(err(line_no, format!("duplicate state `{n}`")));
                    }
                }
                states = Some(names);
            }
            "initial" => {
                let s = *index
                    .get(rest)
                    .ok_or_else(|| err(line_no, format!("unknown state `{rest}`")))?;
                if initial.replace(s).is_some() {
                    return Err(err(line_no, "duplicate `initial:` line"));
                }
            }
            "output" => {
                for item in rest.split_whitespace() {
                    let (id, v) = item
                        .split_once('=')
                        .ok_or_else(|| err(line_no, format!("expected `state=value`, got `{item}`")))?;
                    let s = *index
                        .get(id)
                        .ok_or_else(|| err(line_no, format!("unknown state `{id}`")))?;
                    let v = parse_value(v).ok_or_else(|| err(line_no, format!("bad output value `{v}`")))?;
                    if !v.within_unit_disc() {
                        return Err(err(line_no, format!("output `{v}` has modulus above 1")));
                    }
                    if outputs.insert(s, v).is_some() {
                        return Err(err(line_no, format!("duplicate output for `{id}`")));
                    }
                }
            }
            "delta" => {
                let k = base.ok_or_else(|| err(line_no, "`delta:` before `base:`"))?;
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 4 || toks[2] != "->" {
                    return Err(err(line_no, format!("malformed delta line `{line}`")));
                }
                let from = *index
                    .get(toks[0])
                    .ok_or_else(|| err(line_no, format!("unknown state `{}`", toks[0])))?;
                let j: u32 = toks[1]
                    .parse()
                    .map_err(|_| err(line_no, format!("bad digit `{}`", toks[1])))?;
                if j >= k {
                    return Err(err(line_no, format!("digit {j} out of range for base {k}")));
                }
                let to = *index
                    .get(toks[3])
                    .ok_or_else(|| err(line_no, format!("unknown state `{}`", toks[3])))?;
                if delta.insert((from, j), to).is_some() {
                    return Err(err(line_no, format!("duplicate transition `{} {j}`", toks[0])));
                }
            }
            other => return Err(err(line_no, format!("unknown key `{other}`"))),
        }
    }

    if !reading {
        return Err(err(0, "missing header `reading: lsd-first`"));
    }
    let k = base.ok_or_else(|| err(0, "missing `base:`"))?;
    let names = states.ok_or_else(|| err(0, "missing `states:`"))?;
    let n = names.len();
    let mut table = vec![vec![0; k as usize]; n];
    for (s, row) in table.iter_mut().enumerate() {
        for j in 0..k {
            row[j as usize] = *delta
                .get(&(s, j))
                .ok_or_else(|| err(0, format!("delta not total: missing `{} {j}`", names[s])))?;
        }
    }
    let output = if outputs.is_empty() {
        None
    } else {
        let mut out = Vec::with_capacity(n);
        for (s, name) in names.iter().enumerate() {
            out.push(
                outputs
                    .remove(&s)
                    .ok_or_else(|| err(0, format!("output missing for `{name}`")))?,
            );
        }
        Some(out)
    };
    Automaton::with_names(k, names, table, initial, output)
}

fn fmt_real(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub(crate) fn format_value(v: &Value) -> String {
    match v {
        Value::Exact(z) => {
            if z.im.is_zero() {
                fmt_real(&z.re)
            } else if z.re.is_zero() {
                format!("{}i", fmt_real(&z.im))
            } else {
                let im = fmt_real(&z.im);
                let sign = if im.starts_with('-') { "" } else { "+" };
                format!("{}{sign}{im}i", fmt_real(&z.re))
            }
        }
        Value::Float(z) => {
            if z.im == 0.0 {
                format!("{:?}", z.re)
            } else {
                let sign = if z.im.is_sign_negative() { "" } else { "+" };
                format!("{:?}{sign}{:?}i", z.re, z.im)
            }
        }
    }
}

/// Serializes an automaton; `parse_automaton` reads it back unchanged.
pub fn write_automaton(a: &Automaton) -> String {
    let mut s = String::new();
    let names = a.names();
    writeln!(s, "reading: lsd-first").unwrap();
    writeln!(s, "base: {}", a.base()).unwrap();
    writeln!(s, "states: {}", names.join(" ")).unwrap();
    if let Some(i) = a.initial() {
        writeln!(s, "initial: {}", names[i]).unwrap();
    }
    if let Some(out) = a.output() {
        let items: Vec<String> = names
            .iter()
            .zip(out)
            .map(|(n, v)| format!("{n}={}", format_value(v)))
            .collect();
        writeln!(s, "output: {}", items.join(" ")).unwrap();
    }
    for (st, name) in names.iter().enumerate() {
        for j in 0..a.base() {
            writeln!(s, "delta: {name} {j} -> {}", names[a.next(st, j)]).unwrap();
        }
    }
    s
}

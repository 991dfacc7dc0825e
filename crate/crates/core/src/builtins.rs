//! Named example sequences.

use crate::automaton::{product, Automaton, SequenceHandle};
use crate::value::Value;

pub const NAMES: &[&str] = &[
    "thue-morse",
    "rudin-shapiro",
    "nu2-parity",
    "log-length",
    "paperfold",
    "gtm3",
    "alternating",
    "constant",
    "mod3-tracker",
    "tm-odd",
];

fn named(k: u32, names: &[&str], delta: Vec<Vec<usize>>, out: Vec<Value>) -> Automaton {
    Automaton::with_names(
        k,
        names.iter().map(|s| s.to_string()).collect(),
        delta,
        Some(0),
        Some(out),
    )
    .expect("builtin automaton is well formed")
}

fn handle(a: Automaton, label: &str) -> SequenceHandle {
    SequenceHandle::new(a, label).expect("builtin automaton is complete")
}

/// `t(n) = (−1)^{s₂(n)}`.
pub fn thue_morse() -> SequenceHandle {
    let a = named(2, &["e", "o"], vec![vec![0, 1], vec![1, 0]], vec![Value::int(1), Value::int(-1)]);
    handle(a, "thue-morse")
}

/// `(−1)^{#11}`, the parity of occurrences of the block `11` in `(n)₂`.
pub fn rudin_shapiro() -> SequenceHandle {
    // (previous digit, parity)
    let a = named(
        2,
        &["0e", "1e", "0o", "1o"],
        vec![vec![0, 1], vec![0, 3], vec![2, 3], vec![2, 1]],
        vec![Value::int(1), Value::int(1), Value::int(-1), Value::int(-1)],
    );
    handle(a, "rudin-shapiro")
}

/// `(−1)^{ν₂(n)}` with `a(0) = 1`.
pub fn nu2_parity() -> SequenceHandle {
    let a = named(
        2,
        &["Ze", "Zo", "De", "Do"],
        vec![vec![1, 2], vec![0, 3], vec![2, 2], vec![3, 3]],
        vec![Value::int(1), Value::int(1), Value::int(1), Value::int(-1)],
    );
    handle(a, "nu2-parity")
}

/// `⌊log₂ n⌋ mod 2` with `a(0) = 0`.
pub fn log_length() -> SequenceHandle {
    // length parity of the word read so far; output is (length − 1) mod 2
    let a = named(
        2,
        &["start", "odd", "even"],
        vec![vec![1, 1], vec![2, 2], vec![1, 1]],
        vec![Value::int(0), Value::int(0), Value::int(1)],
    );
    handle(a, "log-length")
}

/// The raw two-state length-parity automaton: every digit swaps the
/// state, outputs `(0, 1)`. It does not ignore leading zeros.
pub fn length_parity_automaton() -> Automaton {
    named(2, &["p0", "p1"], vec![vec![1, 1], vec![0, 0]], vec![Value::int(0), Value::int(1)])
}

/// Regular paperfolding sequence: `+1` when the odd part of `n` is
/// `1 mod 4`, with `a(0) = 1`.
pub fn paperfold() -> SequenceHandle {
    let a = named(
        2,
        &["Z", "A", "P", "M"],
        vec![vec![0, 1], vec![2, 3], vec![2, 2], vec![3, 3]],
        vec![Value::int(1), Value::int(1), Value::int(1), Value::int(-1)],
    );
    handle(a, "paperfold")
}

/// `Re ω^{s₃(n)}` with `ω = e(1/3)`.
pub fn gtm3() -> SequenceHandle {
    let a = named(
        3,
        &["g0", "g1", "g2"],
        vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
        vec![Value::int(1), Value::ratio(-1, 2), Value::ratio(-1, 2)],
    );
    handle(a, "gtm3")
}

/// `(−1)^n`.
pub fn alternating() -> SequenceHandle {
    let a = named(
        2,
        &["start", "E", "O"],
        vec![vec![1, 2], vec![1, 1], vec![2, 2]],
        vec![Value::int(1), Value::int(1), Value::int(-1)],
    );
    handle(a, "alternating")
}

pub fn constant() -> SequenceHandle {
    constant_in_base(2)
}

pub fn constant_in_base(k: u32) -> SequenceHandle {
    let a = named(k, &["c"], vec![vec![0; k as usize]], vec![Value::int(1)]);
    handle(a, "constant")
}

/// Base-2 automaton tracking `n mod 3` through states `(v, 2^i mod 3)`,
/// output `Re ω^v`.
pub fn mod3_tracker() -> SequenceHandle {
    let mut names = Vec::new();
    let mut delta = Vec::new();
    let mut out = Vec::new();
    // state index 2*v + (w − 1)
    for v in 0..3usize {
        for w in 1..3usize {
            names.push(format!("v{v}w{w}"));
            delta.push((0..2).map(|j| 2 * ((v + j * w) % 3) + (2 * w % 3 - 1)).collect());
            out.push(if v == 0 { Value::int(1) } else { Value::ratio(-1, 2) });
        }
    }
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    handle(named(2, &names, delta, out), "mod3-tracker")
}

/// `t(n)·(1 − (−1)^n)/2`: Thue–Morse on odd `n`, zero on even `n`.
pub fn tm_odd() -> SequenceHandle {
    let mask = named(
        2,
        &["start", "E", "O"],
        vec![vec![1, 2], vec![1, 1], vec![2, 2]],
        vec![Value::int(0), Value::int(0), Value::int(1)],
    );
    let a = product(thue_morse().automaton(), &mask, Value::mul).expect("same base");
    handle(a, "tm-odd")
}

pub fn by_name(name: &str) -> Option<SequenceHandle> {
    Some(match name {
        "thue-morse" => thue_morse(),
        "rudin-shapiro" => rudin_shapiro(),
        "nu2-parity" => nu2_parity(),
        "log-length" => log_length(),
        "paperfold" => paperfold(),
        "gtm3" => gtm3(),
        "alternating" => alternating(),
        "constant" => constant(),
        "mod3-tracker" => mod3_tracker(),
        "tm-odd" => tm_odd(),
        _ => return None,
    })
}

pub fn all() -> Vec<SequenceHandle> {
    NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s2(n: u64) -> u32 {
        n.count_ones()
    }

    fn brute_rs(n: u64) -> i64 {
        if (n & (n >> 1)).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    #[test]
    fn closed_forms() {
        let (tm, rs, nu, ll, pf, g3, alt, m3, odd) = (
            thue_morse(),
            rudin_shapiro(),
            nu2_parity(),
            log_length(),
            paperfold(),
            gtm3(),
            alternating(),
            mod3_tracker(),
            tm_odd(),
        );
        for n in 0..5000u64 {
            let t = if s2(n) % 2 == 0 { 1 } else { -1 };
            assert_eq!(tm.eval(n), Value::int(t));
            assert_eq!(rs.eval(n), Value::int(brute_rs(n)));
            let nu_v = if n == 0 || n.trailing_zeros() % 2 == 0 { 1 } else { -1 };
            assert_eq!(nu.eval(n), Value::int(nu_v));
            let ll_v = if n == 0 { 0 } else { (63 - n.leading_zeros() as i64) % 2 };
            assert_eq!(ll.eval(n), Value::int(ll_v));
            let pf_v = if n == 0 || (n >> n.trailing_zeros()) % 4 == 1 { 1 } else { -1 };
            assert_eq!(pf.eval(n), Value::int(pf_v), "paperfold {n}");
            let s3: u64 = crate::automaton::digits(n, 3).iter().map(|&d| d as u64).sum();
            let g_v = if s3 % 3 == 0 { Value::int(1) } else { Value::ratio(-1, 2) };
            assert_eq!(g3.eval(n), g_v);
            assert_eq!(alt.eval(n), Value::int(if n % 2 == 0 { 1 } else { -1 }));
            let m_v = if n % 3 == 0 { Value::int(1) } else { Value::ratio(-1, 2) };
            assert_eq!(m3.eval(n), m_v);
            assert_eq!(odd.eval(n), Value::int(if n % 2 == 1 { t } else { 0 }));
        }
    }

    #[test]
    fn rudin_shapiro_three() {
        assert_eq!(brute_rs(3), -1);
    }

    #[test]
    fn names_resolve() {
        assert_eq!(all().len(), NAMES.len());
        assert!(by_name("nope").is_none());
        for n in NAMES {
            assert_eq!(by_name(n).unwrap().label(), *n);
        }
    }

    #[test]
    fn handles_are_normalized() {
        for seq in all() {
            assert!(seq.automaton().is_normalized(), "{}", seq.label());
            assert!(seq.automaton().ignores_leading_zeros(), "{}", seq.label());
        }
    }
}

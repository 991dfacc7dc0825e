//! Loop-value gcd, the aperiodicity test and the constructive splitting of
//! a strongly connected sequence into strongly aperiodic pieces.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{base_change, restrict_ap, scc_analysis, Automaton, SequenceHandle};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CycleGcd {
    pub d: u64,
    /// A nonzero loop difference `[u]_k − [v]_k` and the loop length.
    pub witness: BigInt,
    pub witness_len: usize,
    /// Candidate divisors of the witness and whether each divides `d`.
    pub tests: Vec<(u64, bool)>,
}

/// `d_A = gcd{[u]_k − [v]_k : δ(s,u) = δ(s,v) = s, |u| = |v|}`.
pub fn cycle_gcd(a: &Automaton, s: usize) -> Result<u64> {
    cycle_gcd_detail(a, s).map(|c| c.d)
}

pub fn cycle_gcd_detail(a: &Automaton, s: usize) -> Result<CycleGcd> {
    if !scc_analysis(a).is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let n = a.num_states();
    let k = a.base() as u64;
    let limit = 2 * n * n + 2;
    let (witness, witness_len) = loop_difference(a, s, limit)?;
    // The residues of [x] mod d over words x of a fixed length inject into
    // the states, so d ≤ |S| and every candidate is a small divisor.
    let mut tests = Vec::new();
    let mut d = 1;
    for q in 2..=n as u64 {
        if q.gcd(&k) != 1 || !(&witness % BigInt::from(q)).is_zero() {
            continue;
        }
        let ok = divides_all_loops(a, s, q);
        tests.push((q, ok));
        if ok {
            d = q;
        }
    }
    debug_assert_eq!(d.gcd(&k), 1);
    Ok(CycleGcd { d, witness, witness_len, tests })
}

/// Shortest pair of distinct equal-length loops at `s`, found by
/// breadth-first search on pairs of states with a "words differ" flag.
fn loop_difference(a: &Automaton, s: usize, limit: usize) -> Result<(BigInt, usize)> {
    let n = a.num_states();
    let k = a.base();
    let node = |x: usize, y: usize, f: usize| (x * n + y) * 2 + f;
    let size = n * n * 2;
    let mut parent: Vec<Option<(usize, u32, u32)>> = vec![None; size];
    let mut depth = vec![usize::MAX; size];
    let start = node(s, s, 0);
    let target = node(s, s, 1);
    depth[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if depth[v] >= limit {
            continue;
        }
        let (x, y, f) = (v / 2 / n, (v / 2) % n, v % 2);
        for j1 in 0..k {
            for j2 in 0..k {
                let f2 = f | (j1 != j2) as usize;
                let w = node(a.next(x, j1), a.next(y, j2), f2);
                if depth[w] == usize::MAX {
                    depth[w] = depth[v] + 1;
                    parent[w] = Some((v, j1, j2));
                    if w == target {
                        return Ok((path_value(&parent, target, k), depth[w]));
                    }
                    queue.push_back(w);
                }
            }
        }
    }
    Err(Error::DegenerateCycles(limit))
}

fn path_value(parent: &[Option<(usize, u32, u32)>], mut v: usize, k: u32) -> BigInt {
    let mut steps = Vec::new();
    while let Some((p, j1, j2)) = parent[v] {
        steps.push(j1 as i64 - j2 as i64);
        v = p;
    }
    steps.reverse();
    let mut total = BigInt::zero();
    let mut w = BigInt::from(1);
    for d in steps {
        total += &w * d;
        w *= k;
    }
    total.abs()
}

/// Whether `q` divides every loop difference at `s`: exhaustive search over
/// `((s₁, s₂), Δ mod q, k^t mod q)` from `((s, s), 0, 1)`.
fn divides_all_loops(a: &Automaton, s: usize, q: u64) -> bool {
    let n = a.num_states();
    let k = a.base();
    let qu = q as usize;
    let node = |x: usize, y: usize, d: usize, w: usize| ((x * n + y) * qu + d) * qu + w;
    let mut seen = vec![false; n * n * qu * qu];
    let start = node(s, s, 0, 1 % qu);
    seen[start] = true;
    let mut stack = vec![(s, s, 0usize, 1 % qu)];
    while let Some((x, y, d, w)) = stack.pop() {
        let w2 = (w * k as usize) % qu;
        for j1 in 0..k {
            let x2 = a.next(x, j1);
            for j2 in 0..k {
                let y2 = a.next(y, j2);
                let diff = (j1 as i64 - j2 as i64).rem_euclid(q as i64) as usize;
                let d2 = (d + diff * w) % qu;
                if x2 == s && y2 == s && d2 != 0 {
                    return false;
                }
                let id = node(x2, y2, d2, w2);
                if !seen[id] {
                    seen[id] = true;
                    stack.push((x2, y2, d2, w2));
                }
            }
        }
    }
    true
}

/// Outcome of the sufficient test `d_A = 1` and `δ(s, 0) = s` for some `s`.
#[derive(Clone, Debug)]
pub struct AperiodicCertificate {
    pub holds: bool,
    pub cycle_gcd: CycleGcd,
    pub zero_fixed_state: Option<usize>,
    pub failure: Option<String>,
}

pub fn check_aperiodic(a: &Automaton) -> Result<AperiodicCertificate> {
    let s = a.initial().unwrap_or(0);
    let cg = cycle_gcd_detail(a, s)?;
    let zero_fixed_state = (0..a.num_states()).find(|&t| a.next(t, 0) == t);
    let failure = if cg.d != 1 {
        Some(format!("cycle gcd is {}", cg.d))
    } else if zero_fixed_state.is_none() {
        Some("no state is fixed by digit 0".to_string())
    } else {
        None
    };
    Ok(AperiodicCertificate { holds: failure.is_none(), cycle_gcd: cg, zero_fixed_state, failure })
}

/// Period of a strongly connected transition graph: the gcd of its cycle
/// lengths.
pub(crate) fn graph_period(a: &Automaton) -> u64 {
    let n = a.num_states();
    let mut level = vec![usize::MAX; n];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(s) = queue.pop_front() {
        for &t in a.row(s) {
            if level[t] == usize::MAX {
                level[t] = level[s] + 1;
                queue.push_back(t);
            }
        }
    }
    let mut p = 0u64;
    for s in 0..n {
        for &t in a.row(s) {
            let diff = (level[s] as i64 + 1 - level[t] as i64).unsigned_abs();
            p = p.gcd(&diff);
        }
    }
    p.max(1)
}

/// Tail length and cycle-length lcm of the map `s ↦ δ(s, 0)`.
fn zero_action_shape(a: &Automaton) -> (usize, u64) {
    let n = a.num_states();
    let mut tail = 0;
    let mut period = 1u64;
    for s in 0..n {
        let mut seen = vec![usize::MAX; n];
        let mut t = s;
        let mut i = 0;
        while seen[t] == usize::MAX {
            seen[t] = i;
            t = a.next(t, 0);
            i += 1;
        }
        tail = tail.max(seen[t]);
        period = period.lcm(&((i - seen[t]) as u64));
    }
    (tail, period)
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    /// The new base `k′ = k^l`.
    pub base: u32,
    pub exponent: u32,
    pub q: u64,
    /// `parts[r]` produces `n ↦ a(qn + r)` in base `k′`.
    pub parts: Vec<SequenceHandle>,
    /// Aperiodicity certificates for the terminal components of each part.
    pub certificates: Vec<Vec<AperiodicCertificate>>,
}

const INTERLEAVE_CHECK: u64 = 4096;

/// Splits a strongly connected sequence along residues mod `q = d_A` after
/// a base change making the 0-action idempotent, so that every terminal
/// component of every piece passes [`check_aperiodic`].
pub fn decompose_aperiodic(seq: &SequenceHandle) -> Result<Decomposition> {
    let a = seq.automaton();
    if !scc_analysis(a).is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let n = a.num_states() as u64;
    let step = graph_period(a).lcm(&zero_action_shape(a).1);
    let cap = (1..=n).fold(1u64, |acc, i| acc.lcm(&i)) * (n + 1);
    let mut l = step;
    let (base, q) = loop {
        if l > cap {
            return Err(Error::Diagnostic(format!("no suitable base change up to exponent {cap}")));
        }
        let b = base_change(a, l as u32)?;
        if let Some(q) = conditions_hold(&b)? {
            break (b, q);
        }
        l += step;
    };
    let handle = SequenceHandle::new(base.clone(), format!("{}^(k^{})", seq.label(), l))?;
    let mut parts = Vec::new();
    let mut certificates = Vec::new();
    for r in 0..q {
        let part = restrict_ap(&handle, q, r)?;
        let scc = scc_analysis(part.automaton());
        let mut certs = Vec::new();
        for comp in scc.terminal_components() {
            let sub = part.automaton().restrict_to(comp)?;
            let cert = check_aperiodic(&sub)?;
            if !cert.holds {
                return Err(Error::Diagnostic(format!(
                    "terminal component of residue {r} fails the aperiodicity test: {}",
                    cert.failure.clone().unwrap_or_default()
                )));
            }
            certs.push(cert);
        }
        parts.push(part);
        certificates.push(certs);
    }
    for m in 0..INTERLEAVE_CHECK {
        let r = m % q;
        if parts[r as usize].eval(m / q) != seq.eval(m) {
            return Err(Error::Diagnostic(format!("interleaving mismatch at n = {m}")));
        }
    }
    Ok(Decomposition { base: base.base(), exponent: l as u32, q, parts, certificates })
}

/// For a base-changed automaton: `Some(d_A)` when the state set is stable,
/// the 0-action is idempotent and `δ(δ(s, j), 0) = δ(s, j)` for `j < d_A < k`.
fn conditions_hold(b: &Automaton) -> Result<Option<u64>> {
    let scc = scc_analysis(b);
    if !scc.is_strongly_connected() || graph_period(b) != 1 {
        return Ok(None);
    }
    let n = b.num_states();
    let zero = |s: usize| b.next(s, 0);
    if (0..n).any(|s| zero(zero(s)) != zero(s)) {
        return Ok(None);
    }
    let q = cycle_gcd(b, 0)?;
    if q >= b.base() as u64 {
        return Ok(None);
    }
    let ok = (0..n).all(|s| {
        (0..q as u32).all(|j| {
            let t = b.next(s, j);
            zero(t) == t
        })
    });
    Ok(ok.then_some(q))
}

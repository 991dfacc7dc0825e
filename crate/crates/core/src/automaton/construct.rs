use std::collections::{HashMap, HashSet, VecDeque};

use super::{digits, minimize, Automaton, SequenceHandle};
use crate::error::{Error, Result};
use crate::value::Value;

/// Automaton producing the same sequence on canonical expansions whose
/// outputs are unchanged by appended high zeros.
///
/// States are pairs `(current, checkpoint)` where the checkpoint is the
/// state reached right after the last nonzero digit; the output reads the
/// checkpoint.
pub fn normalize_leading_zeros(a: &Automaton) -> Result<Automaton> {
    let (s0, out) = a.require_complete()?;
    if a.ignores_leading_zeros() {
        return Ok(a.pruned().set_normalized(true));
    }
    let k = a.base();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs = vec![(s0, s0)];
    index.insert((s0, s0), 0);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (cur, mark) = pairs[i];
        for j in 0..k {
            let c = a.next(cur, j);
            let p = if j == 0 { (c, mark) } else { (c, c) };
            let id = *index.entry(p).or_insert_with(|| {
                pairs.push(p);
                pairs.len() - 1
            });
            delta.push(id);
        }
        i += 1;
    }
    let names = pairs
        .iter()
        .map(|&(c, m)| format!("{}.{}", a.names()[c], a.names()[m]))
        .collect();
    let output = pairs.iter().map(|&(_, m)| out[m].clone()).collect();
    let b = Automaton::from_parts(k, names, delta, Some(0), Some(output), true);
    Ok(minimize(&b)?.set_normalized(true))
}

/// Pair automaton computing `combine(a(n), b(n))`.
pub fn product<F>(a: &Automaton, b: &Automaton, combine: F) -> Result<Automaton>
where
    F: Fn(&Value, &Value) -> Value,
{
    if a.base() != b.base() {
        return Err(Error::BaseMismatch(a.base(), b.base()));
    }
    let (a0, ao) = a.require_complete()?;
    let (b0, bo) = b.require_complete()?;
    let k = a.base();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs = vec![(a0, b0)];
    index.insert((a0, b0), 0);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (x, y) = pairs[i];
        for j in 0..k {
            let p = (a.next(x, j), b.next(y, j));
            let id = *index.entry(p).or_insert_with(|| {
                pairs.push(p);
                pairs.len() - 1
            });
            delta.push(id);
        }
        i += 1;
    }
    let names = pairs
        .iter()
        .map(|&(x, y)| format!("{}.{}", a.names()[x], b.names()[y]))
        .collect();
    let output = pairs.iter().map(|&(x, y)| combine(&ao[x], &bo[y])).collect();
    let normalized = a.is_normalized() && b.is_normalized();
    Ok(Automaton::from_parts(k, names, delta, Some(0), Some(output), normalized))
}

/// Handle for `n ↦ a(qn + r)` with any `q ≥ 1`, `r ≥ 0`.
///
/// States are `(s, m)` with `m` the pending carry; reading digit `j` moves
/// to `(δ(s, (qj+m) mod k), ⌊(qj+m)/k⌋)` and the output flushes the digits
/// of the final carry through `δ`.
pub fn affine(seq: &SequenceHandle, q: u64, r: u64) -> Result<SequenceHandle> {
    if q < 1 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    let a = seq.automaton();
    let out = seq.outputs();
    let k = a.base() as u64;
    let mut index: HashMap<(usize, u64), usize> = HashMap::new();
    let mut pairs = vec![(0usize, r)];
    index.insert((0, r), 0);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (s, m) = pairs[i];
        for j in 0..k {
            let v = q * j + m;
            let p = (a.next(s, (v % k) as u32), v / k);
            let id = *index.entry(p).or_insert_with(|| {
                pairs.push(p);
                pairs.len() - 1
            });
            delta.push(id);
        }
        i += 1;
    }
    let names = pairs
        .iter()
        .map(|&(s, m)| format!("{}.{}", a.names()[s], m))
        .collect();
    let output = pairs
        .iter()
        .map(|&(s, m)| out[a.run(s, &digits(m, a.base()))].clone())
        .collect();
    let b = Automaton::from_parts(a.base(), names, delta, Some(0), Some(output), true);
    SequenceHandle::new(b, format!("{}[{}n+{}]", seq.label(), q, r))
}

/// Handle for `n ↦ a(qn + r)`, `0 ≤ r < q`.
pub fn restrict_ap(seq: &SequenceHandle, q: u64, r: u64) -> Result<SequenceHandle> {
    if q < 1 || r >= q {
        return Err(Error::InvalidArgument(format!("need 0 <= r < q, got q={q}, r={r}")));
    }
    affine(seq, q, r)
}

/// Handle for `n ↦ a(n + c)`.
pub fn shift(seq: &SequenceHandle, c: u64) -> Result<SequenceHandle> {
    affine(seq, 1, c).map(|h| h.relabel(format!("{}[n+{}]", seq.label(), c)))
}

const BASE_CHANGE_LIMIT: u64 = 1 << 22;

/// The same sequence read in base `k^l`: `δ′(s, [u]_k) = δ*(s, u)` for
/// words of length `l`, keeping the states reachable by paths whose length
/// is divisible by `l`.
pub fn base_change(a: &Automaton, l: u32) -> Result<Automaton> {
    if l < 1 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let k = a.base() as u64;
    let kl = k
        .checked_pow(l)
        .filter(|&kl| kl.saturating_mul(a.num_states() as u64) <= BASE_CHANGE_LIMIT)
        .ok_or_else(|| Error::InvalidArgument(format!("base {k}^{l} too large")))?;
    if kl > u32::MAX as u64 {
        return Err(Error::InvalidArgument(format!("base {k}^{l} too large")));
    }
    let n = a.num_states();
    let table: Vec<Vec<usize>> = (0..n).map(|s| block_table(a, s, l)).collect();
    let roots: Vec<usize> = match a.initial() {
        Some(s0) => vec![s0],
        None => (0..n).collect(),
    };
    let mut index = vec![usize::MAX; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    for s in roots {
        if index[s] == usize::MAX {
            index[s] = order.len();
            order.push(s);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        for &t in &table[s] {
            if index[t] == usize::MAX {
                index[t] = order.len();
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    let mut delta = Vec::with_capacity(order.len() * kl as usize);
    for &s in &order {
        delta.extend(table[s].iter().map(|&t| index[t]));
    }
    let names = order.iter().map(|&s| a.names()[s].clone()).collect();
    let output = a.output().map(|o| order.iter().map(|&s| o[s].clone()).collect());
    let initial = a.initial().map(|_| 0);
    Ok(Automaton::from_parts(kl as u32, names, delta, initial, output, a.is_normalized()))
}

/// `δ*(s, u)` for every word `u` of length `l`, indexed by `[u]_k`.
pub(crate) fn block_table(a: &Automaton, s: usize, l: u32) -> Vec<usize> {
    let k = a.base() as usize;
    let mut cur = vec![s];
    for _ in 0..l {
        let mut next = Vec::with_capacity(cur.len() * k);
        for j in 0..k {
            next.extend(cur.iter().map(|&t| a.next(t, j as u32)));
        }
        cur = next;
    }
    cur
}

/// The k-kernel `{n ↦ a(k^l n + m)}`: one handle per distinct sequence,
/// obtained by moving the initial state.
pub fn kernel_family(seq: &SequenceHandle) -> Result<Vec<SequenceHandle>> {
    let m = minimize(seq.automaton())?;
    (0..m.num_states())
        .map(|s| {
            let label = format!("{}@{}", seq.label(), m.names()[s]);
            SequenceHandle::new(m.with_initial(s), label)
        })
        .collect()
}

/// Closure of `τ` under `τ ↦ τ∘δ(·, j)`, in discovery order (`τ` first).
pub fn cokernel_outputs(a: &Automaton) -> Result<Vec<Vec<Value>>> {
    let out = a
        .output()
        .ok_or(Error::Incomplete("no output map"))?
        .to_vec();
    let n = a.num_states();
    let mut seen: HashSet<Vec<Value>> = HashSet::from([out.clone()]);
    let mut family = vec![out];
    let mut i = 0;
    while i < family.len() {
        for j in 0..a.base() {
            let v: Vec<Value> = (0..n).map(|s| family[i][a.next(s, j)].clone()).collect();
            if seen.insert(v.clone()) {
                family.push(v);
            }
        }
        i += 1;
    }
    Ok(family)
}

/// The co-kernel as automata sharing the transition structure and
/// differing in output.
pub fn cokernel_family(a: &Automaton) -> Result<Vec<Automaton>> {
    Ok(cokernel_outputs(a)?
        .into_iter()
        .map(|o| a.with_output(o))
        .collect())
}

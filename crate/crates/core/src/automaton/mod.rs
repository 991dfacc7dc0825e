//! Finite k-automata with output, read least significant digit first.
//!
//! A word `w` has value `[w]_k = Σ w_i k^i`; `w_0` is read first, so
//! `δ(s, uv) = δ(δ(s, v), u)` and `a(n) = τ(δ(s₀, (n)_k))`.

mod construct;
mod cycles;
mod format;
mod frequency;
mod group;
mod minimize;
mod scc;

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::value::Value;

pub use construct::{
    affine, base_change, cokernel_outputs, cokernel_family, kernel_family,
    normalize_leading_zeros, product, restrict_ap, shift,
};
pub use cycles::{
    check_aperiodic, cycle_gcd, cycle_gcd_detail, decompose_aperiodic, AperiodicCertificate,
    CycleGcd, Decomposition,
};
pub use format::{parse_automaton, write_automaton};
pub(crate) use format::parse_value;
pub use frequency::{frequencies, multiplicative_order, Frequencies};
pub use group::{invertibility, GroupPresentation};
pub use minimize::{isomorphic, minimize};
pub use scc::{scc_analysis, SccReport};

/// Base-k digits of `n`, least significant first; empty for `n = 0`.
pub fn digits(mut n: u64, k: u32) -> Vec<u32> {
    let mut d = Vec::new();
    while n > 0 {
        d.push((n % k as u64) as u32);
        n /= k as u64;
    }
    d
}

/// A digit word with index `i` carrying weight `k^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitWord {
    pub k: u32,
    pub digits: Vec<u32>,
}

impl DigitWord {
    /// The canonical expansion `(n)_k`, with no high zero.
    pub fn canonical(n: u64, k: u32) -> Self {
        DigitWord { k, digits: digits(n, k) }
    }

    /// The expansion of `n` padded with high zeros to `len` digits.
    pub fn padded(n: u64, k: u32, len: usize) -> Self {
        let mut d = digits(n, k);
        assert!(d.len() <= len, "{n} needs more than {len} digits");
        d.resize(len, 0);
        DigitWord { k, digits: d }
    }

    pub fn value(&self) -> u128 {
        self.digits
            .iter()
            .rev()
            .fold(0u128, |acc, &d| acc * self.k as u128 + d as u128)
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Automaton {
    k: u32,
    names: Vec<String>,
    delta: Vec<usize>,
    initial: Option<usize>,
    output: Option<Vec<Value>>,
    normalized: bool,
}

impl Automaton {
    /// Builds an automaton from a transition table `delta[s][j]`. When an
    /// initial state is given, unreachable states are pruned and the rest
    /// renumbered in breadth-first order.
    pub fn new(
        k: u32,
        delta: Vec<Vec<usize>>,
        initial: Option<usize>,
        output: Option<Vec<Value>>,
    ) -> Result<Self> {
        let n = delta.len();
        let names = (0..n).map(|i| format!("s{i}")).collect();
        Self::with_names(k, names, delta, initial, output)
    }

    pub fn with_names(
        k: u32,
        names: Vec<String>,
        delta: Vec<Vec<usize>>,
        initial: Option<usize>,
        output: Option<Vec<Value>>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("base must be at least 2, got {k}")));
        }
        let n = delta.len();
        if n == 0 {
            return Err(Error::InvalidArgument("automaton has no states".into()));
        }
        if names.len() != n {
            return Err(Error::InvalidArgument("state name count mismatch".into()));
        }
        let mut flat = Vec::with_capacity(n * k as usize);
        for (s, row) in delta.iter().enumerate() {
            if row.len() != k as usize {
                return Err(Error::InvalidArgument(format!(
                    "state {} has {} transitions, expected {k}",
                    names[s],
                    row.len()
                )));
            }
            for &t in row {
                if t >= n {
                    return Err(Error::InvalidArgument(format!("transition target {t} out of range")));
                }
                flat.push(t);
            }
        }
        if let Some(i) = initial {
            if i >= n {
                return Err(Error::InvalidArgument(format!("initial state {i} out of range")));
            }
        }
        if let Some(out) = &output {
            if out.len() != n {
                return Err(Error::InvalidArgument("output count mismatch".into()));
            }
            if let Some(v) = out.iter().find(|v| !v.within_unit_disc()) {
                return Err(Error::InvalidArgument(format!("output {v} has modulus above 1")));
            }
        }
        let a = Automaton { k, names, delta: flat, initial, output, normalized: false };
        Ok(a.pruned())
    }

    pub(crate) fn from_parts(
        k: u32,
        names: Vec<String>,
        delta: Vec<usize>,
        initial: Option<usize>,
        output: Option<Vec<Value>>,
        normalized: bool,
    ) -> Self {
        debug_assert_eq!(delta.len(), names.len() * k as usize);
        Automaton { k, names, delta, initial, output, normalized }
    }

    pub fn base(&self) -> u32 {
        self.k
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn initial(&self) -> Option<usize> {
        self.initial
    }

    pub fn output(&self) -> Option<&[Value]> {
        self.output.as_deref()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn next(&self, s: usize, j: u32) -> usize {
        self.delta[s * self.k as usize + j as usize]
    }

    pub fn row(&self, s: usize) -> &[usize] {
        let k = self.k as usize;
        &self.delta[s * k..(s + 1) * k]
    }

    /// `δ*(s, w)`, reading `w` least significant digit first.
    pub fn run(&self, s: usize, word: &[u32]) -> usize {
        word.iter().fold(s, |s, &j| self.next(s, j))
    }

    /// State reached from `s` on the canonical digits of `n`.
    pub fn run_int(&self, mut s: usize, mut n: u64) -> usize {
        let k = self.k as u64;
        while n > 0 {
            s = self.next(s, (n % k) as u32);
            n /= k;
        }
        s
    }

    pub(crate) fn require_complete(&self) -> Result<(usize, &[Value])> {
        let s0 = self.initial.ok_or(Error::Incomplete("no initial state"))?;
        let out = self.output.as_deref().ok_or(Error::Incomplete("no output map"))?;
        Ok((s0, out))
    }

    /// `τ(δ(s₀, w))` for a digit word, leading zeros included.
    pub fn eval_word(&self, word: &[u32]) -> Result<Value> {
        let (s0, out) = self.require_complete()?;
        Ok(out[self.run(s0, word)].clone())
    }

    /// `a(n) = τ(δ(s₀, (n)_k))` on the canonical expansion.
    pub fn eval(&self, n: u64) -> Result<Value> {
        let (s0, out) = self.require_complete()?;
        Ok(out[self.run_int(s0, n)].clone())
    }

    /// Whether `τ(δ(s, 0)) = τ(s)` for every state.
    pub fn ignores_leading_zeros(&self) -> bool {
        match &self.output {
            None => false,
            Some(out) => (0..self.num_states()).all(|s| out[self.next(s, 0)] == out[s]),
        }
    }

    pub fn with_initial(&self, s: usize) -> Automaton {
        let mut a = self.clone();
        a.initial = Some(s);
        a.pruned()
    }

    pub fn with_output(&self, output: Vec<Value>) -> Automaton {
        assert_eq!(output.len(), self.num_states());
        let mut a = self.clone();
        a.output = Some(output);
        a.normalized = a.initial.is_some() && a.ignores_leading_zeros();
        a
    }

    pub(crate) fn set_normalized(mut self, flag: bool) -> Self {
        self.normalized = flag;
        self
    }

    /// Sub-automaton on a set of states closed under every digit map.
    pub fn restrict_to(&self, states: &[usize]) -> Result<Automaton> {
        let mut index = vec![usize::MAX; self.num_states()];
        for (i, &s) in states.iter().enumerate() {
            index[s] = i;
        }
        let k = self.k as usize;
        let mut delta = Vec::with_capacity(states.len() * k);
        for &s in states {
            for &t in self.row(s) {
                if index[t] == usize::MAX {
                    return Err(Error::InvalidArgument("state set is not closed under transitions".into()));
                }
                delta.push(index[t]);
            }
        }
        let names = states.iter().map(|&s| self.names[s].clone()).collect();
        let output = self
            .output
            .as_ref()
            .map(|o| states.iter().map(|&s| o[s].clone()).collect());
        let initial = match self.initial {
            Some(s0) if index[s0] != usize::MAX => Some(index[s0]),
            _ => Some(0),
        };
        let a = Automaton::from_parts(self.k, names, delta, initial, output, false);
        let flag = a.output.is_some() && a.ignores_leading_zeros();
        Ok(a.set_normalized(flag))
    }

    /// Removes states unreachable from the initial state and renumbers
    /// breadth-first, visiting digits in increasing order.
    pub fn pruned(&self) -> Automaton {
        let Some(s0) = self.initial else {
            return self.clone();
        };
        let n = self.num_states();
        let mut order = Vec::with_capacity(n);
        let mut index = vec![usize::MAX; n];
        let mut queue = VecDeque::from([s0]);
        index[s0] = 0;
        order.push(s0);
        while let Some(s) = queue.pop_front() {
            for &t in self.row(s) {
                if index[t] == usize::MAX {
                    index[t] = order.len();
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        let k = self.k as usize;
        let mut delta = Vec::with_capacity(order.len() * k);
        for &s in &order {
            delta.extend(self.row(s).iter().map(|&t| index[t]));
        }
        Automaton {
            k: self.k,
            names: order.iter().map(|&s| self.names[s].clone()).collect(),
            delta,
            initial: Some(0),
            output: self.output.as_ref().map(|o| order.iter().map(|&s| o[s].clone()).collect()),
            normalized: self.normalized,
        }
    }

    /// Integer transition-count matrix `M[s][t] = #{j : δ(s,j) = t}`.
    pub fn count_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.num_states();
        let mut m = vec![vec![0u64; n]; n];
        for s in 0..n {
            for &t in self.row(s) {
                m[s][t] += 1;
            }
        }
        m
    }
}

/// A normalized automaton with initial state and output: an evaluable
/// k-automatic sequence.
#[derive(Clone, Debug)]
pub struct SequenceHandle {
    automaton: Automaton,
    label: String,
    fast: Vec<Complex64>,
}

impl SequenceHandle {
    /// Wraps an automaton, normalizing it first when needed.
    pub fn new(automaton: Automaton, label: impl Into<String>) -> Result<Self> {
        automaton.require_complete()?;
        let automaton = if automaton.is_normalized() {
            automaton.pruned()
        } else {
            normalize_leading_zeros(&automaton)?
        };
        let fast = automaton.output().unwrap().iter().map(Value::to_c64).collect();
        Ok(SequenceHandle { automaton, label: label.into(), fast })
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn base(&self) -> u32 {
        self.automaton.k
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn eval(&self, n: u64) -> Value {
        let a = &self.automaton;
        a.output.as_ref().unwrap()[a.run_int(0, n)].clone()
    }

    pub fn eval_c64(&self, n: u64) -> Complex64 {
        self.fast[self.automaton.run_int(0, n)]
    }

    /// State reached on `(n)_k`.
    pub fn state_of(&self, n: u64) -> usize {
        self.automaton.run_int(0, n)
    }

    pub fn outputs(&self) -> &[Value] {
        self.automaton.output().unwrap()
    }

    pub fn outputs_c64(&self) -> &[Complex64] {
        &self.fast
    }

    /// `max |τ(s)|` over states.
    pub fn max_abs(&self) -> f64 {
        self.fast.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `a(0), …, a(n-1)` as floating values.
    pub fn values_c64(&self, n: usize) -> Vec<Complex64> {
        self.state_table(n).into_iter().map(|s| self.fast[s]).collect()
    }

    /// States reached on the zero-padded expansions of `0, …, n-1`; their
    /// outputs are `a(0), …, a(n-1)`.
    pub fn state_table(&self, n: usize) -> Vec<usize> {
        let a = &self.automaton;
        let k = a.k as usize;
        if n == 0 {
            return Vec::new();
        }
        let mut pad = vec![0usize];
        let mut block = 1usize;
        while block < n {
            let size = (block * k).min(n);
            let next: Vec<usize> = (0..size).map(|m| a.next(pad[m % block], (m / block) as u32)).collect();
            pad = next;
            block *= k;
        }
        pad.truncate(n);
        pad
    }
}

//! Partial sums, balancedness and the periodic plus balanced splitting of
//! invertible sequences.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::automaton::{
    cokernel_outputs, cycle_gcd, digits, frequencies, invertibility, minimize, product,
    restrict_ap, scc_analysis, Automaton, SequenceHandle,
};
use crate::error::{Error, Result};
use crate::exact::{charpoly, cyclotomic, totient, Poly, Q};
use crate::turn::Turn;
use crate::value::Value;

/// Exact block sums `σ_b(L) = Σ_{|u| = L} b(u)` for every co-kernel
/// variant `b`.
#[derive(Clone, Debug)]
pub struct BlockSumTable {
    pub base: u32,
    /// `matrix[s][t] = #{j : δ(s, j) = t}`.
    pub matrix: Vec<Vec<u64>>,
    /// `counts[L][s] = #{u ∈ Σ_k^L : δ(s₀, u) = s}`.
    pub counts: Vec<Vec<BigInt>>,
    /// Co-kernel output variants; entry 0 is `τ`.
    pub variants: Vec<Vec<Value>>,
    /// `sigma[b][L]`.
    pub sigma: Vec<Vec<Value>>,
}

impl BlockSumTable {
    /// `σ_τ(L) = Σ_{n < k^L} a(n)`.
    pub fn sum(&self, l: usize) -> &Value {
        &self.sigma[0][l]
    }
}

fn count_levels(a: &Automaton, l_max: usize) -> Vec<Vec<BigInt>> {
    let n = a.num_states();
    let mut cur = vec![BigInt::zero(); n];
    cur[a.initial().unwrap_or(0)] = BigInt::one();
    let mut levels = vec![cur.clone()];
    for _ in 0..l_max {
        let mut next = vec![BigInt::zero(); n];
        for (s, c) in cur.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for &t in a.row(s) {
                next[t] += c;
            }
        }
        levels.push(next.clone());
        cur = next;
    }
    levels
}

fn contract(counts: &[BigInt], out: &[Value]) -> Value {
    counts
        .iter()
        .zip(out)
        .filter(|(c, _)| !c.is_zero())
        .fold(Value::zero(), |acc, (c, v)| acc.add(&v.scale(c)))
}

pub fn block_sums(seq: &SequenceHandle, l_max: usize) -> Result<BlockSumTable> {
    let a = seq.automaton();
    let counts = count_levels(a, l_max);
    let variants = cokernel_outputs(a)?;
    let sigma = variants
        .iter()
        .map(|b| counts.iter().map(|c| contract(c, b)).collect())
        .collect();
    Ok(BlockSumTable { base: a.base(), matrix: a.count_matrix(), counts, variants, sigma })
}

/// Multiplicity of each state as the endpoint of `(n)_k`, `n < N`, via
/// the greedy decomposition of `[0, N)` into aligned blocks
/// `[m k^i, (m+1) k^i)`.
pub fn prefix_state_counts(a: &Automaton, n_max: u64) -> Vec<u128> {
    let k = a.base() as u64;
    let ns = a.num_states();
    let s0 = a.initial().unwrap_or(0);
    let d = digits(n_max, a.base());
    // counts of padded words of each length
    let mut levels: Vec<Vec<u128>> = Vec::with_capacity(d.len());
    let mut cur = vec![0u128; ns];
    cur[s0] = 1;
    for _ in 0..d.len() {
        levels.push(cur.clone());
        let mut next = vec![0u128; ns];
        for (s, &c) in cur.iter().enumerate() {
            if c != 0 {
                for &t in a.row(s) {
                    next[t] += c;
                }
            }
        }
        cur = next;
    }
    let mut w = vec![0u128; ns];
    let mut hi = 0u64;
    for i in (0..d.len()).rev() {
        for j in 0..d[i] as u64 {
            let m = hi * k + j;
            for (s, &c) in levels[i].iter().enumerate() {
                if c != 0 {
                    w[a.run_int(s, m)] += c;
                }
            }
        }
        hi = hi * k + d[i] as u64;
    }
    w
}

/// Exact `Σ_{n<N} a(n)`.
pub fn partial_sum(seq: &SequenceHandle, n: u64) -> Value {
    let w = prefix_state_counts(seq.automaton(), n);
    w.iter()
        .zip(seq.outputs())
        .filter(|(c, _)| **c != 0)
        .fold(Value::zero(), |acc, (&c, v)| acc.add(&v.scale(&BigInt::from(c))))
}

/// `E_{n<N} a(n)`, exact when the outputs are.
pub fn mean(seq: &SequenceHandle, n: u64) -> Value {
    partial_sum(seq, n).div_int(&BigInt::from(n.max(1)))
}

/// Outcome of the exact balancedness decision.
#[derive(Clone, Debug)]
pub struct BalanceCertificate {
    pub balanced: bool,
    /// States of the minimal automaton analysed.
    pub states: usize,
    /// Characteristic polynomial of `M/k`.
    pub charpoly: Poly,
    /// Indices `j` of the cyclotomic factors `Φ_j`, with multiplicity.
    pub peripheral: Vec<usize>,
    pub variants: usize,
    /// First co-kernel variant whose power-of-k means do not vanish.
    pub failing_variant: Option<usize>,
    /// `(N, |E_{n<N} a(n)|)` at sample points.
    pub sampled_means: Vec<(u64, f64)>,
}

const FLOAT_ZERO: f64 = 1e-9;

/// Decides whether `E_{n<N} a(n) → 0`.
///
/// The power-of-k means `x_b(L) = σ_b(L)/k^L` of every co-kernel variant
/// satisfy the recurrence of `χ(M/k) = ψ_per ψ_rest`, where `ψ_per`
/// collects the cyclotomic factors. They tend to 0 iff `ψ_rest(E) x_b`
/// vanishes, which is checked on its first `deg ψ_per` terms.
pub fn is_balanced(seq: &SequenceHandle) -> Result<BalanceCertificate> {
    let m = minimize(seq.automaton())?;
    let n = m.num_states();
    let k = m.base() as i64;
    let mat: Vec<Vec<i64>> = m
        .count_matrix()
        .into_iter()
        .map(|r| r.into_iter().map(|x| x as i64).collect())
        .collect();
    let chi = charpoly(&mat);
    let kq = Q::from_integer(BigInt::from(k));
    let kn = num_traits::pow(kq.clone(), n);
    let psi = Poly::new(
        chi.0
            .iter()
            .enumerate()
            .map(|(i, c)| c * num_traits::pow(kq.clone(), i) / &kn)
            .collect(),
    );

    let jmax = 2 * n * n + 2;
    let mut rest = psi.clone();
    let mut per = Poly::one();
    let mut peripheral = Vec::new();
    for j in 1..=jmax {
        if totient(j) > n {
            continue;
        }
        let phi = cyclotomic(j);
        loop {
            let (quot, rem) = rest.div_rem(&phi);
            if !rem.is_zero() || rest.degree() == 0 {
                break;
            }
            rest = quot;
            per = per.mul(&phi);
            peripheral.push(j);
        }
    }

    let variants = cokernel_outputs(&m)?;
    let counts = count_levels(&m, n);
    let deg_per = if per.is_zero() { 0 } else { per.degree() };
    let mut failing_variant = None;
    'variants: for (b, out) in variants.iter().enumerate() {
        let x: Vec<Value> = counts
            .iter()
            .enumerate()
            .map(|(l, c)| contract(c, out).div_int(&num_traits::pow(BigInt::from(k), l)))
            .collect();
        for l in 0..deg_per {
            let y = rest.0.iter().enumerate().fold(Value::zero(), |acc, (i, c)| {
                acc.add(&x[l + i].mul(&Value::exact(c.clone(), BigRational::zero())))
            });
            if !y.is_negligible(FLOAT_ZERO) {
                failing_variant = Some(b);
                break 'variants;
            }
        }
    }

    let sampled_means = [1_000u64, 10_000, 100_000, 1_000_000, 3_000_001]
        .iter()
        .map(|&nn| (nn, mean(seq, nn).abs()))
        .collect();
    Ok(BalanceCertificate {
        balanced: failing_variant.is_none(),
        states: n,
        charpoly: psi,
        peripheral,
        variants: variants.len(),
        failing_variant,
        sampled_means,
    })
}

/// Bounded total-balancedness certificate.
#[derive(Clone, Debug)]
pub struct TotalBalanceCertificate {
    pub holds: bool,
    pub q_bound: u64,
    /// Moduli beyond `q_bound` also tested.
    pub extra_q: Vec<u64>,
    /// Number of `(q, r)` pairs checked.
    pub tested: usize,
    /// First `(q, r)` in test order along which the means do not vanish.
    pub witness: Option<(u64, u64)>,
}

const EXTRA_Q_CAP: u64 = 64;

/// Moduli `k^m d`, `m ≤ 2`, with `d` dividing the lcm of `k − 1` and the
/// cycle gcds of the terminal components.
pub fn extra_moduli(seq: &SequenceHandle, q_bound: u64) -> Result<Vec<u64>> {
    let a = seq.automaton();
    let k = a.base() as u64;
    let report = scc_analysis(a);
    let mut f = (k - 1).max(1);
    for comp in report.terminal_components() {
        let sub = a.restrict_to(comp)?;
        f = f.lcm(&cycle_gcd(&sub, 0)?);
    }
    let mut out = Vec::new();
    for d in (1..=f).filter(|d| f % d == 0) {
        let mut q = d;
        for _ in 0..=2 {
            if q > q_bound && q <= EXTRA_Q_CAP {
                out.push(q);
            }
            q *= k;
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Runs [`is_balanced`] on `n ↦ a(qn + r)` for all `q ≤ q_bound`, `r < q`,
/// and for the moduli of [`extra_moduli`].
pub fn is_totally_balanced(seq: &SequenceHandle, q_bound: u64) -> Result<TotalBalanceCertificate> {
    let extra_q = extra_moduli(seq, q_bound)?;
    let pairs: Vec<(u64, u64)> = (1..=q_bound)
        .chain(extra_q.iter().copied())
        .flat_map(|q| (0..q).map(move |r| (q, r)))
        .collect();
    let results: Vec<Result<bool>> = pairs
        .par_iter()
        .map(|&(q, r)| Ok(is_balanced(&restrict_ap(seq, q, r)?)?.balanced))
        .collect();
    let mut witness = None;
    for (pair, res) in pairs.iter().zip(results) {
        if !res? {
            witness = Some(*pair);
            break;
        }
    }
    Ok(TotalBalanceCertificate {
        holds: witness.is_none(),
        q_bound,
        extra_q,
        tested: pairs.len(),
        witness,
    })
}

/// Base-k automaton for `n ↦ table[n mod p]`, tracking `(n mod p, k^i mod p)`.
pub fn periodic_sequence(k: u32, table: Vec<Value>) -> Result<SequenceHandle> {
    let p = table.len() as u64;
    if p == 0 {
        return Err(Error::InvalidArgument("empty periodic table".into()));
    }
    let kk = k as u64;
    let mut index = std::collections::HashMap::new();
    let mut pairs = vec![(0u64, 1 % p)];
    index.insert(pairs[0], 0usize);
    let mut delta = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (v, w) = pairs[i];
        let row: Vec<usize> = (0..kk)
            .map(|j| {
                let nxt = ((v + j * w) % p, (w * kk) % p);
                *index.entry(nxt).or_insert_with(|| {
                    pairs.push(nxt);
                    pairs.len() - 1
                })
            })
            .collect();
        delta.push(row);
        i += 1;
    }
    let names = pairs.iter().map(|(v, w)| format!("r{v}w{w}")).collect();
    let output = pairs.iter().map(|&(v, _)| table[v as usize].clone()).collect();
    let a = Automaton::with_names(k, names, delta, Some(0), Some(output))?;
    SequenceHandle::new(a, format!("periodic/{p}"))
}

/// A weight `b(n)` multiplying the sequence in [`decay_exponent`].
#[derive(Clone, Debug)]
pub enum Weight {
    /// `b(n) = table[n mod p]`.
    Periodic(Vec<Value>),
    /// `b(n) = e(pn/q)`.
    RationalPhase(i64, u64),
}

impl Weight {
    fn table(&self) -> Result<Vec<Value>> {
        Ok(match self {
            Weight::Periodic(t) => t.clone(),
            Weight::RationalPhase(p, q) => {
                if *q == 0 {
                    return Err(Error::InvalidArgument("phase denominator is zero".into()));
                }
                (0..*q)
                    .map(|n| {
                        let t = Turn::from_ratio(*p as i128 * n as i128, *q);
                        match (0..4).find(|&j| t == Turn::from_ratio(j, 4)) {
                            Some(0) => Value::one(),
                            Some(1) => Value::exact(BigRational::zero(), BigRational::one()),
                            Some(2) => Value::int(-1),
                            Some(_) => Value::exact(BigRational::zero(), -BigRational::one()),
                            None => Value::float(t.e()),
                        }
                    })
                    .collect()
            }
        })
    }
}

/// Power-law fit of `|E_{n<N} a(n) b(n)|` over `N = k^L`.
#[derive(Clone, Debug)]
pub struct DecayFit {
    /// `(L, N, exact mean)`.
    pub points: Vec<(u32, u64, Value)>,
    /// Fitted `c` in `|mean| ≈ C N^{-c}`; `f64::INFINITY` when the means
    /// vanish identically from some point on.
    pub exponent: f64,
    /// Root mean square residual of the log-log fit.
    pub residual: f64,
    /// `c ± 2` standard errors.
    pub band: (f64, f64),
    /// Number of exactly vanishing means.
    pub zeros: usize,
}

impl DecayFit {
    pub fn is_exact_zero(&self) -> bool {
        self.exponent.is_infinite()
    }
}

/// Least squares line `y ≈ a + b x`; returns `(b, rms residual, stderr of b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let rms = (ss / n).sqrt();
    let se = if x.len() > 2 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (b, rms, se)
}

pub fn decay_exponent(seq: &SequenceHandle, weight: &Weight, l_range: RangeInclusive<u32>) -> Result<DecayFit> {
    let k = seq.base();
    let w = periodic_sequence(k, weight.table()?)?;
    let prod = product(seq.automaton(), w.automaton(), Value::mul)?;
    let prod = SequenceHandle::new(prod, format!("{}*weight", seq.label()))?;
    if !is_balanced(&prod)?.balanced {
        return Err(Error::NotBalanced);
    }
    let mut points = Vec::new();
    for l in l_range {
        let nn = (k as u64)
            .checked_pow(l)
            .ok_or_else(|| Error::InvalidArgument(format!("{k}^{l} exceeds 64 bits")))?;
        points.push((l, nn, mean(&prod, nn)));
    }
    let zeros = points.iter().filter(|p| p.2.is_negligible(0.0)).count();
    if points.last().is_none_or(|p| p.2.is_negligible(0.0)) {
        return Ok(DecayFit {
            points,
            exponent: f64::INFINITY,
            residual: 0.0,
            band: (f64::INFINITY, f64::INFINITY),
            zeros,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.2.is_negligible(0.0))
        .map(|p| ((p.1 as f64).ln(), p.2.abs().ln()))
        .unzip();
    if x.len() < 2 {
        return Err(Error::Diagnostic("fewer than two nonzero means to fit".into()));
    }
    let (slope, residual, se) = linear_fit(&x, &y);
    let c = (-slope).max(0.0);
    Ok(DecayFit { points, exponent: c, residual, band: (c - 2.0 * se, c + 2.0 * se), zeros })
}

/// `a(n) = per(n mod (k−1)) + bal(n)`.
#[derive(Clone, Debug)]
pub struct PerBalDecomposition {
    pub period: u64,
    pub per: Vec<Value>,
    pub bal: SequenceHandle,
    /// Order of the group generated by the digit actions.
    pub group_order: usize,
}

impl PerBalDecomposition {
    pub fn per_at(&self, n: u64) -> &Value {
        &self.per[(n % self.period) as usize]
    }
}

/// Splits an invertible sequence into a `(k−1)`-periodic part given by the
/// limiting means along residues mod `k − 1`, and the remainder.
pub fn invertible_decomposition(seq: &SequenceHandle) -> Result<PerBalDecomposition> {
    let g = invertibility(seq.automaton())?.ok_or(Error::NotInvertible)?;
    let k = seq.base() as u64;
    let q = k - 1;
    let m = &g.automaton;
    let freq = frequencies(m, q)?;
    let out = m.output().unwrap();
    let exact = out.iter().all(Value::is_exact);
    let per: Vec<Value> = (0..q)
        .map(|r| {
            if exact {
                out.iter().enumerate().fold(Value::zero(), |acc, (s, v)| {
                    acc.add(&v.mul(&Value::exact(freq.get(s, r).clone(), BigRational::zero())))
                })
            } else {
                let z: Complex64 = out
                    .iter()
                    .enumerate()
                    .map(|(s, v)| v.to_c64() * freq.get_f64(s, r))
                    .sum();
                Value::float(z)
            }
        })
        .collect();
    let counter = periodic_sequence(seq.base(), per.clone())?;
    let bal = product(seq.automaton(), counter.automaton(), Value::sub)?;
    let bal = SequenceHandle::new(bal, format!("{}-per", seq.label()))?;
    Ok(PerBalDecomposition { period: q, per, bal, group_order: g.order() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    fn naive_sum(seq: &SequenceHandle, n: u64) -> Value {
        (0..n).fold(Value::zero(), |acc, i| acc.add(&seq.eval(i)))
    }

    #[test]
    fn block_sum_examples() {
        let tm = block_sums(&builtins::thue_morse(), 6).unwrap();
        assert_eq!(tm.sum(1), &Value::zero());
        let c = block_sums(&builtins::constant_in_base(3), 5).unwrap();
        for l in 0..=5 {
            assert_eq!(c.sum(l), &Value::int(3i64.pow(l as u32)));
        }
        let rs = builtins::rudin_shapiro();
        let t = block_sums(&rs, 4).unwrap();
        assert_eq!(t.sum(4), &naive_sum(&rs, 16));
    }

    #[test]
    fn block_sums_match_enumeration() {
        for seq in builtins::all() {
            let t = block_sums(&seq, 8).unwrap();
            let k = seq.base() as u64;
            for l in 0..=8u32 {
                if k.pow(l) > 70_000 {
                    break;
                }
                assert_eq!(t.sum(l as usize), &naive_sum(&seq, k.pow(l)), "{} L={l}", seq.label());
            }
        }
    }

    #[test]
    fn partial_sum_examples() {
        let tm = builtins::thue_morse();
        for l in 1..30 {
            assert_eq!(partial_sum(&tm, 1 << l), Value::zero());
        }
        for seq in builtins::all() {
            assert_eq!(partial_sum(&seq, 1), seq.eval(0));
            for n in [2u64, 3, 17, 100, 1000, 4097] {
                assert_eq!(partial_sum(&seq, n), naive_sum(&seq, n), "{} N={n}", seq.label());
            }
        }
    }

    #[test]
    fn log_length_means_oscillate() {
        let ll = builtins::log_length();
        for l in 1..12u32 {
            let even = partial_sum(&ll, 1 << (2 * l));
            let expect = 2 * (4i64.pow(l) - 1) / 3;
            assert_eq!(even, Value::int(expect));
            // ones in [0, 2^{2l+1}) equal ones in [0, 2^{2l}): the mean halves
            let odd = partial_sum(&ll, 1 << (2 * l + 1));
            assert_eq!(odd, even);
        }
    }

    #[test]
    fn balance_examples() {
        assert!(is_balanced(&builtins::thue_morse()).unwrap().balanced);
        assert!(is_balanced(&builtins::alternating()).unwrap().balanced);
        let c = is_balanced(&builtins::constant()).unwrap();
        assert!(!c.balanced);
        assert_eq!(c.peripheral, vec![1]);
        assert!(!is_balanced(&builtins::log_length()).unwrap().balanced);
        assert!(!is_balanced(&builtins::nu2_parity()).unwrap().balanced);
        assert!(is_balanced(&builtins::rudin_shapiro()).unwrap().balanced);
    }

    #[test]
    fn total_balance_examples() {
        let tm = is_totally_balanced(&builtins::thue_morse(), 12).unwrap();
        assert!(tm.holds);
        assert!(tm.tested >= 78);
        let alt = is_totally_balanced(&builtins::alternating(), 2).unwrap();
        assert!(!alt.holds);
        assert_eq!(alt.witness, Some((2, 0)));
        assert!(is_totally_balanced(&builtins::tm_odd(), 8).unwrap().holds);
    }

    #[test]
    fn decay_examples() {
        let tm = builtins::thue_morse();
        let fit = decay_exponent(&tm, &Weight::Periodic(vec![Value::one()]), 2..=16).unwrap();
        assert!(fit.is_exact_zero());
        assert_eq!(fit.zeros, 15);

        let odd = restrict_ap(&tm, 2, 1).unwrap();
        let alt = Weight::Periodic(vec![Value::int(1), Value::int(-1)]);
        let fit = decay_exponent(&odd, &alt, 2..=16).unwrap();
        assert!(fit.exponent > 0.0);
        for &(_, n, ref m) in &fit.points {
            let direct: f64 = (0..n)
                .map(|i| odd.eval_c64(i).re * if i % 2 == 0 { 1.0 } else { -1.0 })
                .sum::<f64>()
                / n as f64;
            assert!((m.to_c64().re - direct).abs() < 1e-12);
        }

        let third = decay_exponent(&tm, &Weight::RationalPhase(1, 3), 4..=20).unwrap();
        assert!(third.exponent > 0.1 && third.exponent < 0.3, "{}", third.exponent);

        let nu = decay_exponent(&builtins::nu2_parity(), &Weight::Periodic(vec![Value::one()]), 2..=10);
        assert_eq!(nu.unwrap_err(), Error::NotBalanced);
    }

    #[test]
    fn periodic_sequence_values() {
        let t = vec![Value::int(1), Value::ratio(1, 2), Value::int(0), Value::int(-1), Value::ratio(-1, 3), Value::int(1)];
        for k in [2u32, 3, 10] {
            let p = periodic_sequence(k, t.clone()).unwrap();
            for n in 0..2000u64 {
                assert_eq!(p.eval(n), t[(n % 6) as usize]);
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let tm = builtins::thue_morse();
        let d = invertible_decomposition(&tm).unwrap();
        assert_eq!(d.per, vec![Value::zero()]);
        for n in 0..5000 {
            assert_eq!(d.bal.eval(n), tm.eval(n));
        }
        let g = builtins::gtm3();
        let d = invertible_decomposition(&g).unwrap();
        assert_eq!(d.period, 2);
        for n in 0..20_000 {
            assert_eq!(d.per_at(n).add(&d.bal.eval(n)), g.eval(n));
        }
        assert_eq!(
            invertible_decomposition(&builtins::nu2_parity()).unwrap_err(),
            Error::NotInvertible
        );
    }
}

//! Weighted exponential sums `E_{n<N} a(n) e(p(n))`.

mod arcs;
mod phase;
mod sup;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::partial_sum;
use crate::automaton::{digits, Automaton, SequenceHandle};
use crate::error::{Error, Result};
use crate::turn::Turn;

pub use arcs::{
    classify_arc, convergents, lipschitz_discrepancy, partition_bound_check, vdc_check,
    ArcClassification, ArcVerdict, PartitionCheck, VdcCheck, C0, C_VDC, VDC_CORRELATION_FACTOR,
};
pub use phase::{parse_real, Coeff, PhasePolynomial};
pub use sup::{
    exp_sum_rational, poly_sup_sample, sup_decay, sup_linear, sup_linear_with_budget, ApCache, PolySample,
    SampleEntry, SampleFamily, SampleSpec, SupDecay, SupReport, DEFAULT_GRID_BUDGET,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    Transfer,
    Interval,
    /// Splitting into residue classes of a rational phase.
    Rational,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Transfer => "transfer",
            Method::Interval => "interval",
            Method::Rational => "rational",
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExpSumReport {
    pub n: u64,
    pub phase: String,
    pub mean: Complex64,
    pub method: Method,
    /// A priori bound on the floating rounding error of `mean`.
    pub err: f64,
}

impl ExpSumReport {
    pub fn abs(&self) -> f64 {
        self.mean.norm()
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: Complex64,
    comp: Complex64,
}

fn two_sum(s: f64, x: f64, c: &mut f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *c += (s - t) + x;
    } else {
        *c += (x - t) + s;
    }
    t
}

impl Neumaier {
    pub fn add(&mut self, x: Complex64) {
        self.sum.re = two_sum(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = two_sum(self.sum.im, x.im, &mut self.comp.im);
    }

    pub fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

/// Sum of a slice by a fixed-shape binary tree.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

const CHUNK_MIN: u64 = 4096;

/// Padded-word states of one aligned chunk: `pad[u] = δ(s₀, u)` for `|u| = j`.
fn chunk_layout(a: &Automaton) -> (u64, Vec<usize>) {
    let k = a.base() as u64;
    let mut size = 1u64;
    let mut pad = vec![a.initial().unwrap_or(0)];
    while size < CHUNK_MIN {
        let mut next = Vec::with_capacity((size * k) as usize);
        for j in 0..k {
            next.extend(pad.iter().map(|&s| a.next(s, j as u32)));
        }
        pad = next;
        size *= k;
    }
    (size, pad)
}

/// `(1/N) Σ_{n<N} a(n) e(p(n))` by direct summation. Phases advance by an
/// exact difference table; chunks are summed with compensation and
/// combined by a fixed pairwise tree, so the result does not depend on the
/// number of workers.
pub fn exp_sum_direct(seq: &SequenceHandle, p: &PhasePolynomial, n: u64) -> ExpSumReport {
    if p.degree() == 0 {
        let s = partial_sum(seq, n).to_c64();
        return ExpSumReport {
            n,
            phase: p.to_string(),
            mean: p.eval_turn(0).e() * s / n.max(1) as f64,
            method: Method::Direct,
            err: 4.0 * f64::EPSILON,
        };
    }
    let a = seq.automaton();
    let out = seq.outputs_c64();
    let (size, pad) = chunk_layout(a);
    let chunks = n.div_ceil(size);
    let d = p.degree();
    let partials: Vec<Complex64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * size;
            let len = size.min(n - start) as usize;
            let map: Vec<usize> = (0..a.num_states()).map(|s| a.run_int(s, c)).collect();
            // forward differences of p at `start`
            let mut diff: Vec<Turn> = (0..=d as u64).map(|i| p.eval_turn(start + i)).collect();
            for level in 1..=d {
                for i in (level..=d).rev() {
                    diff[i] = diff[i] - diff[i - 1];
                }
            }
            let mut acc = Neumaier::default();
            for u in 0..len {
                acc.add(out[map[pad[u]]] * diff[0].e());
                for i in 0..d {
                    diff[i] = diff[i] + diff[i + 1];
                }
            }
            acc.total()
        })
        .collect();
    let total = pairwise_sum(&partials);
    ExpSumReport {
        n,
        phase: p.to_string(),
        mean: total / n as f64,
        method: Method::Direct,
        err: 8.0 * f64::EPSILON * (1.0 + (chunks as f64).log2()),
    }
}

/// Row vectors `v_L = e_{s₀} T_L(α)` for `L = 0..=l`, where
/// `T_{L+1}(α) = T_L(α) D(k^L α)` and `D(β)[s,t] = Σ_{δ(s,j)=t} e(jβ)`.
pub fn transfer_vectors(a: &Automaton, alpha: Turn, l: u32) -> Vec<Vec<Complex64>> {
    let n = a.num_states();
    let k = a.base();
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    v[a.initial().unwrap_or(0)] = Complex64::new(1.0, 0.0);
    let mut out = vec![v.clone()];
    let mut beta = alpha;
    for _ in 0..l {
        let phases: Vec<Complex64> = (0..k).map(|j| beta.mul_u(j as u128).e()).collect();
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for (s, &x) in v.iter().enumerate() {
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..k {
                next[a.next(s, j)] += x * phases[j as usize];
            }
        }
        v = next;
        out.push(v.clone());
        beta = beta.mul_u(k as u128);
    }
    out
}

fn pow_checked(k: u32, l: u32) -> Result<u64> {
    (k as u64)
        .checked_pow(l)
        .ok_or_else(|| Error::InvalidArgument(format!("{k}^{l} exceeds 64 bits")))
}

/// `E_{n<k^L} a(n) e(nα)` by the transfer recursion.
pub fn exp_sum_transfer_turn(seq: &SequenceHandle, alpha: Turn, l: u32) -> Result<ExpSumReport> {
    let n = pow_checked(seq.base(), l)?;
    let v = transfer_vectors(seq.automaton(), alpha, l);
    let s: Complex64 = v[l as usize].iter().zip(seq.outputs_c64()).map(|(x, t)| x * t).sum();
    let states = seq.automaton().num_states() as f64;
    Ok(ExpSumReport {
        n,
        phase: format!("lin:{}", crate::fmt_num(alpha.to_f64())),
        mean: s / n as f64,
        method: Method::Transfer,
        err: 4.0 * f64::EPSILON * (l as f64 + 1.0) * states * seq.base() as f64,
    })
}

pub fn exp_sum_transfer(seq: &SequenceHandle, alpha: f64, l: u32) -> Result<ExpSumReport> {
    exp_sum_transfer_turn(seq, Turn::from_f64(alpha), l)
}

/// `E_{n<N} a(n) e(nα)` over the aligned blocks `[m k^i, (m+1) k^i)` of
/// `[0, N)`; each block contributes `e(m k^i α) Σ_s v_i[s] τ(δ(s, (m)_k))`.
pub fn exp_sum_interval_turn(seq: &SequenceHandle, alpha: Turn, n: u64) -> ExpSumReport {
    let a = seq.automaton();
    let out = seq.outputs_c64();
    let k = a.base() as u64;
    let d = digits(n, a.base());
    let v = transfer_vectors(a, alpha, d.len() as u32);
    let mut acc = Neumaier::default();
    let mut hi = 0u64;
    let mut ki: Vec<u128> = vec![1];
    for _ in 1..d.len() {
        ki.push(ki.last().unwrap() * k as u128);
    }
    for i in (0..d.len()).rev() {
        for j in 0..d[i] as u64 {
            let m = hi * k + j;
            let block: Complex64 = v[i]
                .iter()
                .enumerate()
                .map(|(s, x)| x * out[a.run_int(s, m)])
                .sum();
            acc.add(alpha.mul_u(m as u128 * ki[i]).e() * block);
        }
        hi = hi * k + d[i] as u64;
    }
    let blocks = d.iter().map(|&x| x as f64).sum::<f64>();
    ExpSumReport {
        n,
        phase: format!("lin:{}", crate::fmt_num(alpha.to_f64())),
        mean: acc.total() / n.max(1) as f64,
        method: Method::Interval,
        err: 8.0 * f64::EPSILON * (blocks + d.len() as f64 * a.num_states() as f64),
    }
}

pub fn exp_sum_interval(seq: &SequenceHandle, alpha: f64, n: u64) -> ExpSumReport {
    exp_sum_interval_turn(seq, Turn::from_f64(alpha), n)
}

/// `Π_{l<L} |sin(π 2^l α)|`, the modulus of `E_{n<2^L} t(n) e(nα)`.
pub fn tm_product_oracle(alpha: f64, l: u32) -> f64 {
    let a = Turn::from_f64(alpha);
    (0..l)
        .map(|i| (std::f64::consts::PI * a.mul_u(1u128 << i).to_f64()).sin().abs())
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(seq: &SequenceHandle, p: &PhasePolynomial, n: u64) -> Complex64 {
        let s: Complex64 = (0..n).map(|i| seq.eval_c64(i) * p.eval_turn(i).e()).sum();
        s / n as f64
    }

    #[test]
    fn direct_examples() {
        let tm = builtins::thue_morse();
        let zero = PhasePolynomial::from_reals(vec![0.0]);
        assert_eq!(exp_sum_direct(&tm, &zero, 1 << 12).mean, Complex64::new(0.0, 0.0));

        let third = PhasePolynomial::linear_ratio(1, 3);
        let d = exp_sum_direct(&tm, &third, 1 << 16);
        let t = exp_sum_transfer_turn(&tm, Turn::from_ratio(1, 3), 16).unwrap();
        assert!((d.mean - t.mean).norm() < 1e-10);

        let one = builtins::constant();
        let half = PhasePolynomial::linear_ratio(1, 2);
        for n in [2u64, 10, 5000] {
            assert!(exp_sum_direct(&one, &half, n).mean.norm() < 1e-15);
        }
    }

    #[test]
    fn direct_matches_naive_across_chunks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seq in builtins::all() {
            let p = PhasePolynomial::from_reals(vec![rng.gen(), rng.gen(), rng.gen()]);
            for n in [1u64, 7, 4095, 4096, 4097, 10_000] {
                let d = exp_sum_direct(&seq, &p, n).mean;
                assert!((d - naive(&seq, &p, n)).norm() < 1e-11, "{} {n}", seq.label());
            }
        }
    }

    #[test]
    fn transfer_examples() {
        let tm = builtins::thue_morse();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a: f64 = rng.gen();
            let m = exp_sum_transfer(&tm, a, 2).unwrap().mean.norm();
            let pi = std::f64::consts::PI;
            assert!((m - ((pi * a).sin() * (2.0 * pi * a).sin()).abs()).abs() < 1e-12);
        }
        for seq in builtins::all() {
            let l = if seq.base() == 2 { 10 } else { 6 };
            let t = exp_sum_transfer(&seq, 0.0, l).unwrap();
            let n = t.n;
            let exact = crate::analysis::mean(&seq, n).to_c64();
            assert!((t.mean - exact).norm() < 1e-12);
        }
        let rs = builtins::rudin_shapiro();
        let t = exp_sum_transfer_turn(&rs, Turn::from_ratio(1, 5), 12).unwrap();
        let p = PhasePolynomial::linear_ratio(1, 5);
        assert!((t.mean - naive(&rs, &p, 4096)).norm() < 1e-10);
    }

    #[test]
    fn interval_examples() {
        let tm = builtins::thue_morse();
        for l in 0..12u32 {
            let a = Turn::from_f64(0.377);
            let i = exp_sum_interval_turn(&tm, a, 1 << l);
            let t = exp_sum_transfer_turn(&tm, a, l).unwrap();
            assert_eq!(i.mean, t.mean);
        }
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let n = 3 * 1024 + 5;
        let i = exp_sum_interval(&tm, golden, n);
        let p = PhasePolynomial::from_reals(vec![0.0, golden]);
        assert!((i.mean - exp_sum_direct(&tm, &p, n).mean).norm() < 1e-9);
        for seq in builtins::all() {
            assert_eq!(exp_sum_interval(&seq, 0.3, 1).mean, seq.eval_c64(0));
        }
    }

    #[test]
    fn oracle_examples() {
        assert!(tm_product_oracle(0.5, 2) < 1e-15);
        assert_eq!(tm_product_oracle(0.0, 3), 0.0);
        let tm = builtins::thue_morse();
        let t = exp_sum_transfer(&tm, 1.0 / 3.0, 4).unwrap().mean.norm();
        assert!((t - tm_product_oracle(1.0 / 3.0, 4)).abs() < 1e-12);
    }

    #[test]
    fn pairwise_shape_is_fixed() {
        let xs: Vec<Complex64> = (0..1000).map(|i| Complex64::new(1.0 / (i as f64 + 1.0), 0.0)).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
        let mut acc = Neumaier::default();
        for _ in 0..10 {
            acc.add(Complex64::new(0.1, 0.0));
        }
        assert_eq!(acc.total().re, 1.0);
    }
}

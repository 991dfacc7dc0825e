use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::phase::{Coeff, PhasePolynomial};
use super::{exp_sum_direct, exp_sum_interval_turn, ExpSumReport, Method};
use crate::analysis::partial_sum;
use crate::automaton::{invertibility, restrict_ap, SequenceHandle};
use crate::error::{Error, Result};
use crate::turn::Turn;

/// Largest frequency grid `sup_linear` will build by default.
pub const DEFAULT_GRID_BUDGET: u64 = 1 << 28;

const OVERSAMPLE: u64 = 4;
const CANDIDATES: usize = 8;
const GOLDEN_STEPS: usize = 90;
const TIE_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct SupReport {
    pub n: u64,
    /// Maximizer in `[0, 1)`.
    pub alpha: f64,
    pub value: f64,
    /// Certified bound on `sup − grid_max`.
    pub err: f64,
    pub grid_max: f64,
    pub grid_size: u64,
}

/// `sup_α |E_{n<N} a(n) e(nα)|` within `target`.
pub fn sup_linear(seq: &SequenceHandle, n: u64, target: f64) -> Result<SupReport> {
    sup_linear_with_budget(seq, n, target, DEFAULT_GRID_BUDGET)
}

fn grid_error(n: u64, m: u64, amax: f64, grid_max: f64) -> f64 {
    let x = std::f64::consts::PI * (n - 1) as f64 / (2.0 * m as f64);
    let lip = x * amax;
    let bern = if x < std::f64::consts::FRAC_PI_2 { grid_max * (1.0 / x.cos() - 1.0) } else { f64::INFINITY };
    lip.min(bern)
}

fn required_grid(n: u64, target: f64, amax: f64, grid_max: f64) -> f64 {
    let span = std::f64::consts::PI * (n - 1) as f64 / 2.0;
    let lip = span * amax / target;
    let bern = if grid_max > 0.0 {
        span / (1.0 / (1.0 + target / grid_max)).acos()
    } else {
        f64::INFINITY
    };
    lip.min(bern)
}

struct Grid {
    max: f64,
    top: Vec<(f64, u64)>,
}

fn better(a: &(f64, u64), b: &(f64, u64)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

/// `|S(t/M)|/N` for `t < M = P·R`: for each residue `ρ` the length-`P`
/// inverse transform of `a(n) e(nρ/M)` gives the points `t = Rτ + ρ`.
fn grid(values: &[Complex64], p: usize, r: u64, fft: &Arc<dyn Fft<f64>>) -> Grid {
    let m = p as u64 * r;
    let n = values.len() as f64;
    let parts: Vec<Grid> = (0..r)
        .into_par_iter()
        .map(|rho| {
            let mut buf = vec![Complex64::new(0.0, 0.0); p];
            for (i, v) in values.iter().enumerate() {
                buf[i] = v * Turn::from_ratio(i as i128 * rho as i128, m).e();
            }
            fft.process(&mut buf);
            let mut top: Vec<(f64, u64)> = Vec::with_capacity(CANDIDATES + 1);
            let mut max = 0.0f64;
            for (tau, z) in buf.iter().enumerate() {
                let v = z.norm() / n;
                max = max.max(v);
                if top.len() < CANDIDATES || v > top[top.len() - 1].0 {
                    top.push((v, r * tau as u64 + rho));
                    top.sort_by(better);
                    top.truncate(CANDIDATES);
                }
            }
            Grid { max, top }
        })
        .collect();
    let mut top: Vec<(f64, u64)> = parts.iter().flat_map(|g| g.top.iter().copied()).collect();
    top.sort_by(better);
    top.truncate(CANDIDATES);
    Grid { max: parts.iter().map(|g| g.max).fold(0.0, f64::max), top }
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

pub fn sup_linear_with_budget(seq: &SequenceHandle, n: u64, target: f64, budget: u64) -> Result<SupReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("sup_linear needs N >= 2".into()));
    }
    if !(target > 0.0) {
        return Err(Error::InvalidArgument("target error must be positive".into()));
    }
    let values = seq.values_c64(n as usize);
    let amax = seq.max_abs();
    let p = (n as usize).next_power_of_two().max(16);
    let fft = FftPlanner::new().plan_fft_inverse(p);
    let mut r = OVERSAMPLE;
    if p as u64 * r > budget {
        return Err(Error::Budget { required: p as u64 * r, budget });
    }
    let mut g = grid(&values, p, r, &fft);
    let mut m = p as u64 * r;
    if grid_error(n, m, amax, g.max) > target {
        let need = required_grid(n, target, amax, g.max);
        let mut r2 = r;
        while ((p as u64 * r2) as f64) < need && p as u64 * r2 <= budget {
            r2 *= 2;
        }
        while grid_error(n, p as u64 * r2, amax, g.max) > target && p as u64 * r2 <= budget {
            r2 *= 2;
        }
        if p as u64 * r2 > budget {
            return Err(Error::Budget { required: need.ceil().max((p as u64 * r2) as f64) as u64, budget });
        }
        r = r2;
        m = p as u64 * r;
        g = grid(&values, p, r, &fft);
    }
    let err = grid_error(n, m, amax, g.max);

    let f = |alpha: f64| exp_sum_interval_turn(seq, Turn::from_f64(alpha), n).abs();
    let mut best: Option<(f64, f64)> = None;
    for &(_, t) in &g.top {
        let a0 = t as f64 / m as f64;
        let v0 = f(a0);
        let (a1, v1) = golden_max(f, (t as f64 - 1.0) / m as f64, (t as f64 + 1.0) / m as f64);
        let (a, v) = if v1 > v0 + TIE_TOL { (a1.rem_euclid(1.0), v1) } else { (a0, v0) };
        best = match best {
            None => Some((a, v)),
            Some((ba, bv)) => {
                let distinct = (a - ba).abs() > 2.0 / m as f64;
                if v > bv + TIE_TOL || ((v - bv).abs() <= TIE_TOL && distinct && a < ba) {
                    Some((a, v))
                } else {
                    Some((ba, bv))
                }
            }
        };
    }
    let (alpha, value) = best.expect("grid is nonempty");
    Ok(SupReport { n, alpha, value: value.max(g.max), err, grid_max: g.max, grid_size: m })
}

#[derive(Clone, Debug)]
pub struct SupDecay {
    /// `(L, sup_α |E_{n<k^L} a(n) e(nα)|, certified error)`.
    pub points: Vec<(u32, f64, f64)>,
    /// `−slope` of `log_k sup` against `L`.
    pub exponent: f64,
    pub residual: f64,
}

/// Least-squares decay rate of the linear-phase supremum along `N = k^L`.
pub fn sup_decay(seq: &SequenceHandle, ls: std::ops::RangeInclusive<u32>, target: f64) -> Result<SupDecay> {
    let k = seq.base() as u64;
    let mut points = Vec::new();
    for l in ls {
        let n = k
            .checked_pow(l)
            .ok_or_else(|| Error::InvalidArgument(format!("{k}^{l} exceeds 64 bits")))?;
        let s = sup_linear(seq, n, target)?;
        points.push((l, s.value, s.err));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(l, v, _)| (l as f64, v.ln() / (k as f64).ln()))
        .unzip();
    if x.len() < 2 {
        return Err(Error::Diagnostic("fewer than two nonzero suprema to fit".into()));
    }
    let (slope, residual, _) = crate::analysis::linear_fit(&x, &y);
    Ok(SupDecay { points, exponent: -slope, residual })
}

/// Restricted handles `n ↦ a(qn + r)`, built on demand.
pub struct ApCache {
    seq: SequenceHandle,
    handles: HashMap<(u64, u64), SequenceHandle>,
}

impl ApCache {
    pub fn new(seq: &SequenceHandle) -> ApCache {
        ApCache { seq: seq.clone(), handles: HashMap::new() }
    }

    pub fn get(&mut self, q: u64, r: u64) -> Result<&SequenceHandle> {
        if !self.handles.contains_key(&(q, r)) {
            let h = restrict_ap(&self.seq, q, r)?;
            self.handles.insert((q, r), h);
        }
        Ok(&self.handles[&(q, r)])
    }

    /// `E_{n<N} a(n) e(p(n))` for a rational phase with denominator `q`:
    /// `e(p(n))` depends only on `n mod q`, so the sum is
    /// `Σ_{r<q} e(p(r)) Σ_{m} a(qm + r)` with exact inner sums.
    pub fn exp_sum(&mut self, p: &PhasePolynomial, n: u64) -> Result<ExpSumReport> {
        let q = p
            .denominator()
            .ok_or_else(|| Error::InvalidArgument("phase is not rational".into()))?;
        let mut total = Complex64::new(0.0, 0.0);
        for r in 0..q.min(n) {
            let count = (n - r - 1) / q + 1;
            let (num, _) = p.eval_rational(r).expect("rational phase");
            let inner = partial_sum(self.get(q, r)?, count).to_c64();
            total += Turn::from_ratio(num as i128, q).e() * inner;
        }
        Ok(ExpSumReport {
            n,
            phase: p.to_string(),
            mean: total / n.max(1) as f64,
            method: Method::Rational,
            err: 4.0 * f64::EPSILON * q as f64,
        })
    }
}

pub fn exp_sum_rational(seq: &SequenceHandle, p: &PhasePolynomial, n: u64) -> Result<ExpSumReport> {
    ApCache::new(seq).exp_sum(p, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFamily {
    /// Uniform coefficients in `[0, 1)`.
    Real,
    /// Coefficients `a_i/q` with one `q ≤ max_denominator`.
    Rational,
    /// Rational lower coefficients, leading coefficient `a/q + η/N^d`, `|η| ≤ 4`.
    NearRational,
}

#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub reals: usize,
    pub rationals: usize,
    pub near_rationals: usize,
    pub max_denominator: u64,
    pub seed: u64,
    /// Refuse non-invertible inputs instead of running the experiment.
    pub require_invertible: bool,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { reals: 16, rationals: 16, near_rationals: 16, max_denominator: 24, seed: 0, require_invertible: false }
    }
}

#[derive(Clone, Debug)]
pub struct SampleEntry {
    pub family: SampleFamily,
    pub phase: PhasePolynomial,
    pub report: ExpSumReport,
}

#[derive(Clone, Debug)]
pub struct PolySample {
    pub entries: Vec<SampleEntry>,
    pub max: f64,
    pub argmax: usize,
}

fn rational_coeffs(rng: &mut ChaCha8Rng, d: usize, q: u64) -> Vec<Coeff> {
    let mut c = vec![Coeff::Rational(0, 1)];
    for i in 1..=d {
        let lo = if i == d { 1 } else { 0 };
        c.push(Coeff::rational(rng.gen_range(lo..q) as i64, q));
    }
    c
}

/// `|E_{n<N} a(n) e(p(n))|` over a seeded sample of phases of degree `d`.
pub fn poly_sup_sample(seq: &SequenceHandle, d: usize, n: u64, spec: &SampleSpec) -> Result<PolySample> {
    if d < 1 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    if spec.max_denominator < 2 {
        return Err(Error::InvalidArgument("max denominator must be at least 2".into()));
    }
    if spec.require_invertible && invertibility(seq.automaton())?.is_none() {
        return Err(Error::NotInvertible);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut cache = ApCache::new(seq);
    let mut entries = Vec::new();
    for _ in 0..spec.reals {
        let mut c = vec![0.0];
        c.extend((0..d).map(|_| rng.gen::<f64>()));
        let phase = PhasePolynomial::from_reals(c);
        let report = exp_sum_direct(seq, &phase, n);
        entries.push(SampleEntry { family: SampleFamily::Real, phase, report });
    }
    for _ in 0..spec.rationals {
        let q = rng.gen_range(2..=spec.max_denominator);
        let phase = PhasePolynomial::new(rational_coeffs(&mut rng, d, q));
        let report = cache.exp_sum(&phase, n)?;
        entries.push(SampleEntry { family: SampleFamily::Rational, phase, report });
    }
    for _ in 0..spec.near_rationals {
        let q = rng.gen_range(2..=spec.max_denominator);
        let mut c = rational_coeffs(&mut rng, d, q);
        let eta: f64 = rng.gen_range(-4.0..=4.0);
        c[d] = Coeff::Real(c[d].to_f64() + eta / (n as f64).powi(d as i32));
        let phase = PhasePolynomial::new(c);
        let report = exp_sum_direct(seq, &phase, n);
        entries.push(SampleEntry { family: SampleFamily::NearRational, phase, report });
    }
    let (argmax, max) = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (i, e.report.abs()))
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(PolySample { entries, max, argmax })
}

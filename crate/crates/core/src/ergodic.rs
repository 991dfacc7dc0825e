//! Weighted ergodic averages `E_{n<N} a(n) f(T^{p(n)} x)` on torus systems
//! with closed-form iterates.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::mean;
use crate::automaton::{parse_value, SequenceHandle};
use crate::builtins;
use crate::error::{Error, Result};
use crate::expsum::{exp_sum_direct, exp_sum_interval_turn, parse_real, Coeff, Neumaier, PhasePolynomial};
use crate::turn::Turn;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemKind {
    Rotation(Turn),
    RationalRotation(i64, u64),
    /// `T(x, y) = (x + α, y + x)`.
    Skew(Turn),
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynSystem {
    pub kind: SystemKind,
    pub spec: String,
}

fn reduce(p: i64, q: u64) -> (i64, u64) {
    let g = p.unsigned_abs().gcd(&q).max(1);
    ((p / g as i64).rem_euclid((q / g) as i64), q / g)
}

/// `m(m−1)/2 mod 2^128`.
fn tri(m: u128) -> u128 {
    if m % 2 == 0 {
        (m / 2).wrapping_mul(m.wrapping_sub(1))
    } else {
        m.wrapping_mul((m - 1) / 2)
    }
}

impl DynSystem {
    pub fn rotation(alpha: f64) -> DynSystem {
        DynSystem { kind: SystemKind::Rotation(Turn::from_f64(alpha)), spec: format!("rotation:alpha={}", crate::fmt_num(alpha)) }
    }

    pub fn rational(p: i64, q: u64) -> DynSystem {
        assert!(q > 0, "denominator must be positive");
        let (p, q) = reduce(p, q);
        DynSystem { kind: SystemKind::RationalRotation(p, q), spec: format!("rational:{p}/{q}") }
    }

    pub fn skew(alpha: f64) -> DynSystem {
        DynSystem { kind: SystemKind::Skew(Turn::from_f64(alpha)), spec: format!("skew:alpha={}", crate::fmt_num(alpha)) }
    }

    pub fn identity() -> DynSystem {
        DynSystem { kind: SystemKind::Identity, spec: "identity".into() }
    }

    /// `rotation:alpha=<real>`, `rational:<p>/<q>`, `skew:alpha=<real>` or `identity`.
    pub fn parse(spec: &str) -> Result<DynSystem> {
        let bad = || Error::InvalidArgument(format!("bad system `{spec}`"));
        if spec == "identity" {
            return Ok(DynSystem::identity());
        }
        let (kind, body) = spec.split_once(':').ok_or_else(bad)?;
        let alpha = || body.strip_prefix("alpha=").and_then(parse_real).ok_or_else(bad);
        let mut sys = match kind {
            "rotation" => match alpha()? {
                Coeff::Rational(p, q) => DynSystem::rational(p, q),
                c => DynSystem { kind: SystemKind::Rotation(c.turn()), spec: String::new() },
            },
            "rational" => match parse_real(body).ok_or_else(bad)? {
                Coeff::Rational(p, q) => DynSystem::rational(p, q),
                _ => return Err(bad()),
            },
            "skew" => DynSystem { kind: SystemKind::Skew(alpha()?.turn()), spec: String::new() },
            _ => return Err(bad()),
        };
        if sys.spec.is_empty() {
            sys.spec = spec.to_string();
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            SystemKind::Skew(_) => 2,
            _ => 1,
        }
    }

    /// Irrational rotations and skew products are totally ergodic.
    pub fn totally_ergodic(&self) -> bool {
        matches!(self.kind, SystemKind::Rotation(_) | SystemKind::Skew(_))
    }

    /// `T^m x` in closed form.
    pub fn orbit(&self, x: &[Turn], m: u128) -> Vec<Turn> {
        match self.kind {
            SystemKind::Rotation(a) => vec![x[0] + a.mul_u(m)],
            SystemKind::RationalRotation(p, q) => {
                let r = (p as i128).rem_euclid(q as i128) as u128 * (m % q as u128) % q as u128;
                vec![x[0] + Turn::from_ratio(r as i128, q)]
            }
            SystemKind::Skew(a) => vec![x[0] + a.mul_u(m), x[1] + x[0].mul_u(m) + a.mul_u(tri(m))],
            SystemKind::Identity => x.to_vec(),
        }
    }

    /// `T^m x` with exact rational arithmetic, for rational rotations and the
    /// identity.
    pub fn orbit_exact(&self, x: &BigRational, m: u64) -> Result<BigRational> {
        let frac = |v: BigRational| &v - v.floor();
        match self.kind {
            SystemKind::RationalRotation(p, q) => {
                Ok(frac(x + BigRational::new(BigInt::from(p) * BigInt::from(m), BigInt::from(q))))
            }
            SystemKind::Identity => Ok(frac(x.clone())),
            _ => Err(Error::InvalidArgument("exact orbits need a rational rotation or the identity".into())),
        }
    }

    fn alpha_turn(&self) -> Option<Turn> {
        match self.kind {
            SystemKind::Rotation(a) => Some(a),
            SystemKind::RationalRotation(p, q) => Some(Turn::from_ratio(p as i128, q)),
            _ => None,
        }
    }
}

impl fmt::Display for DynSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

/// Trigonometric polynomial `Σ c_m e(m·x)` on the torus.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

impl Observable {
    pub fn character(m: Vec<i64>) -> Observable {
        Observable { terms: vec![(m, Complex64::new(1.0, 0.0))] }
    }

    pub fn constant(c: f64) -> Observable {
        Observable { terms: vec![(vec![0], Complex64::new(c, 0.0))] }
    }

    fn parse_freq(s: &str) -> Option<Vec<i64>> {
        s.split(';').map(|t| t.trim().parse().ok()).collect()
    }

    /// `char:<m>` or `trig:<m1>=<c1>,...`; a frequency on the 2-torus is
    /// written `<a>;<b>`.
    pub fn parse(spec: &str) -> Result<Observable> {
        let bad = || Error::InvalidArgument(format!("bad observable `{spec}`"));
        let (kind, body) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "char" => Ok(Observable::character(Self::parse_freq(body).ok_or_else(bad)?)),
            "trig" => {
                let mut terms = Vec::new();
                for part in body.split(',') {
                    let (m, c) = part.split_once('=').ok_or_else(bad)?;
                    let m = Self::parse_freq(m).ok_or_else(bad)?;
                    let c = parse_value(c).ok_or_else(bad)?.to_c64();
                    terms.push((m, c));
                }
                if terms.is_empty() {
                    return Err(bad());
                }
                Ok(Observable { terms })
            }
            _ => Err(bad()),
        }
    }

    pub fn dim(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.len()).max().unwrap_or(1)
    }

    /// `∫ f dμ`.
    pub fn integral(&self) -> Complex64 {
        self.terms.iter().filter(|(m, _)| m.iter().all(|&x| x == 0)).map(|(_, c)| c).sum()
    }

    pub fn is_mean_zero(&self) -> bool {
        self.integral() == Complex64::new(0.0, 0.0)
    }

    /// `Σ |c_m| ≥ ‖f‖∞`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn eval(&self, x: &[Turn]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let t = m.iter().zip(x).fold(Turn::ZERO, |acc, (&mi, &xi)| acc + xi.mul_i(mi as i128));
                c * t.e()
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct AverageTrace {
    pub checkpoints: Vec<u64>,
    pub starts: Vec<Vec<f64>>,
    /// `values[j][i]`: average up to `checkpoints[j]` from `starts[i]`.
    pub values: Vec<Vec<Complex64>>,
    pub sup: Vec<f64>,
    pub l2: Vec<f64>,
}

fn integer_phase(p: &PhasePolynomial, n_max: u64) -> Result<Vec<i64>> {
    let c = p
        .integer_coeffs()
        .ok_or_else(|| Error::InvalidArgument(format!("phase {p} must have integer coefficients")))?;
    if c.iter().all(|&x| x >= 0) {
        return Ok(c);
    }
    for n in 0..=n_max {
        let v = c.iter().rev().try_fold(0i128, |acc, &ci| acc.checked_mul(n as i128)?.checked_add(ci as i128));
        match v {
            Some(v) if v >= 0 => {}
            Some(_) => return Err(Error::InvalidArgument(format!("phase {p} is negative at n = {n}"))),
            None => return Err(Error::InvalidArgument(format!("phase {p} overflows at n = {n}"))),
        }
    }
    Ok(c)
}

fn eval_u128(c: &[i64], n: u64) -> u128 {
    c.iter().rev().fold(0u128, |acc, &ci| acc.wrapping_mul(n as u128).wrapping_add(ci as i128 as u128))
}

/// `E_{n<N_j} a(n) f(T^{p(n)} x)` for every start `x` and checkpoint `N_j`.
pub fn weighted_average(
    sys: &DynSystem,
    f: &Observable,
    seq: &SequenceHandle,
    p: &PhasePolynomial,
    starts: &[Vec<Turn>],
    checkpoints: &[u64],
) -> Result<AverageTrace> {
    if f.dim() > sys.dim() {
        return Err(Error::InvalidArgument(format!("observable needs {} coordinates, system has {}", f.dim(), sys.dim())));
    }
    if starts.iter().any(|x| x.len() != sys.dim()) {
        return Err(Error::InvalidArgument("start points must match the system dimension".into()));
    }
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    cps.dedup();
    if cps.first() == Some(&0) || cps.is_empty() {
        return Err(Error::InvalidArgument("checkpoints must be positive".into()));
    }
    let n_max = *cps.last().unwrap();
    let c = integer_phase(p, n_max)?;
    let a = seq.values_c64(n_max as usize);
    let bound = seq.max_abs() * f.sup_bound();
    let per_start: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|x| {
            let mut acc = Neumaier::default();
            let mut out = Vec::with_capacity(cps.len());
            let mut j = 0;
            for (n, an) in a.iter().enumerate() {
                if *an != Complex64::new(0.0, 0.0) {
                    let y = sys.orbit(x, eval_u128(&c, n as u64));
                    acc.add(an * f.eval(&y));
                }
                while j < cps.len() && cps[j] == n as u64 + 1 {
                    out.push(acc.total() / cps[j] as f64);
                    j += 1;
                }
            }
            out
        })
        .collect();
    let values: Vec<Vec<Complex64>> = (0..cps.len()).map(|j| per_start.iter().map(|v| v[j]).collect()).collect();
    for row in &values {
        for v in row {
            if v.norm() > bound * (1.0 + 1e-12) {
                return Err(Error::Diagnostic(format!("average {} exceeds max|a|·‖f‖∞ = {}", v.norm(), bound)));
            }
        }
    }
    let sup = values.iter().map(|r| r.iter().map(|z| z.norm()).fold(0.0, f64::max)).collect();
    let l2 = values
        .iter()
        .map(|r| (r.iter().map(|z| z.norm_sqr()).sum::<f64>() / r.len().max(1) as f64).sqrt())
        .collect();
    Ok(AverageTrace {
        checkpoints: cps,
        starts: starts.iter().map(|x| x.iter().map(|t| t.to_f64()).collect()).collect(),
        values,
        sup,
        l2,
    })
}

/// `c e(m x₀) E_{n<N} a(n) e(m p(n) α)` for a single character `c e(mx)` on a rotation.
pub fn spectral_oracle(
    sys: &DynSystem,
    f: &Observable,
    seq: &SequenceHandle,
    p: &PhasePolynomial,
    x0: Turn,
    n: u64,
) -> Result<Complex64> {
    let alpha = sys
        .alpha_turn()
        .ok_or_else(|| Error::InvalidArgument("spectral oracle needs a rotation".into()))?;
    let [(m, coef)] = f.terms.as_slice() else {
        return Err(Error::InvalidArgument("spectral oracle needs a single character".into()));
    };
    let m = *m.first().unwrap_or(&0) as i128;
    let c = integer_phase(p, n)?;
    let start = coef * x0.mul_i(m).e();
    let beta: Vec<Turn> = c.iter().map(|&ci| alpha.mul_i(m * ci as i128)).collect();
    let s = if c.len() == 2 {
        beta[0].e() * exp_sum_interval_turn(seq, beta[1], n).mean
    } else {
        exp_sum_direct(seq, &PhasePolynomial::from_turns(beta), n).mean
    };
    Ok(start * s)
}

fn linear_n() -> PhasePolynomial {
    PhasePolynomial::new(vec![Coeff::Rational(0, 1), Coeff::Rational(1, 1)])
}

/// Starting points: half Kronecker points `j·(γ, √2)`, half seeded uniform.
pub fn sample_starts(dim: usize, count: usize, seed: u64) -> Vec<Vec<Turn>> {
    let steps = [Turn::from_f64((5f64.sqrt() - 1.0) / 2.0), Turn::from_f64(2f64.sqrt() - 1.0)];
    let kron = count.div_ceil(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<Turn>> = (0..kron).map(|j| (0..dim).map(|d| steps[d % 2].mul_u(j as u128 + 1)).collect()).collect();
    out.extend((kron..count).map(|_| (0..dim).map(|_| Turn::from_f64(rng.gen::<f64>())).collect()));
    out
}

/// Slack allowed when reading the last three `L²` estimates as nonincreasing.
pub const MONOTONE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub system: String,
    pub totally_ergodic: bool,
    pub trace: AverageTrace,
    pub kronecker_starts: usize,
    pub uniform_starts: usize,
    /// The tail is nonincreasing over the last three checkpoints; not a proof.
    pub consistent_with_zero: bool,
}

pub fn convergence_report(
    sys: &DynSystem,
    f: &Observable,
    seq: &SequenceHandle,
    p: &PhasePolynomial,
    samples: usize,
    schedule: &[u64],
    seed: u64,
) -> Result<ConvergenceReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one starting point".into()));
    }
    let starts = sample_starts(sys.dim(), samples, seed);
    let trace = weighted_average(sys, f, seq, p, &starts, schedule)?;
    let k = trace.l2.len();
    let consistent = k >= 3 && trace.l2[k - 3] + MONOTONE_TOL >= trace.l2[k - 2] && trace.l2[k - 2] + MONOTONE_TOL >= trace.l2[k - 1] && trace.l2[k - 1] < trace.l2[k - 3];
    Ok(ConvergenceReport {
        system: sys.to_string(),
        totally_ergodic: sys.totally_ergodic(),
        trace,
        kronecker_starts: samples.div_ceil(2),
        uniform_starts: samples / 2,
        consistent_with_zero: consistent,
    })
}

#[derive(Clone, Debug)]
pub struct CounterexampleReport {
    /// `(L, E_{n<2^L} a(n))` for the log-length sequence.
    pub means: Vec<(u32, BigRational)>,
    pub closed_form_holds: bool,
    pub halving_holds: bool,
    /// Even-checkpoint mean minus the following odd-checkpoint mean, at the largest pair.
    pub gap: f64,
    /// `(N, max |avg|, (2 log₂ N + 2)/N)` for the coboundary observable.
    pub coboundary: Vec<(u64, f64, f64)>,
    pub coboundary_holds: bool,
}

/// Log-length Cesàro means on the identity system, and the same weight on
/// the coboundary `h − h∘T`, `h = e(x)`, over the golden rotation.
pub fn counterexample_demo(n_max: u64) -> Result<CounterexampleReport> {
    if n_max < 4 {
        return Err(Error::InvalidArgument("need N_max >= 4".into()));
    }
    let seq = builtins::log_length();
    let l_max = 63 - n_max.leading_zeros();
    let means: Vec<(u32, BigRational)> = (1..=l_max)
        .map(|l| {
            let m = mean(&seq, 1u64 << l);
            (l, m.as_rational().expect("exact outputs").clone())
        })
        .collect();
    let get = |l: u32| &means[(l - 1) as usize].1;
    let mut closed = true;
    let mut halving = true;
    let mut gap = f64::NAN;
    for l in 1..=l_max / 2 {
        let four = BigInt::from(4u32).pow(l);
        let expect = BigRational::new(BigInt::from(2) * (&four - BigInt::one()), BigInt::from(3) * &four);
        closed &= *get(2 * l) == expect;
        if 2 * l < l_max {
            let half = get(2 * l) / BigRational::from_integer(BigInt::from(2));
            halving &= *get(2 * l + 1) == half;
            gap = (get(2 * l) - get(2 * l + 1)).to_f64().unwrap_or(f64::NAN);
        }
    }

    let sys = DynSystem::parse("rotation:alpha=golden")?;
    let alpha = sys.alpha_turn().expect("rotation");
    let f = Observable {
        terms: vec![(vec![1], Complex64::new(1.0, 0.0) - alpha.e())],
    };
    let mut cps: Vec<u64> = (1..=l_max).map(|l| 1u64 << l).collect();
    cps.extend((2..l_max).map(|l| 3u64 << (l - 1)).filter(|&n| n <= n_max));
    cps.push(n_max);
    let trace = weighted_average(&sys, &f, &seq, &linear_n(), &sample_starts(1, 4, 0), &cps)?;
    let coboundary: Vec<(u64, f64, f64)> = trace
        .checkpoints
        .iter()
        .zip(&trace.sup)
        .map(|(&n, &s)| (n, s, (2.0 * (n as f64).log2() + 2.0) / n as f64))
        .collect();
    let coboundary_holds = coboundary.iter().all(|(_, s, b)| s <= b);
    Ok(CounterexampleReport {
        means,
        closed_form_holds: closed,
        halving_holds: halving,
        gap,
        coboundary,
        coboundary_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::partial_sum;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn lin() -> PhasePolynomial {
        linear_n()
    }

    #[test]
    fn orbits_compose() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let systems = [DynSystem::rotation(GOLDEN), DynSystem::skew(2f64.sqrt() - 1.0), DynSystem::rational(3, 7), DynSystem::identity()];
        for sys in &systems {
            for _ in 0..1000 {
                let (m, n) = (rng.gen_range(0..1u128 << 40), rng.gen_range(0..1u128 << 40));
                let x: Vec<Turn> = (0..sys.dim()).map(|_| Turn::from_f64(rng.gen())).collect();
                let lhs = sys.orbit(&x, m + n);
                let rhs = sys.orbit(&sys.orbit(&x, n), m);
                for (a, b) in lhs.iter().zip(&rhs) {
                    assert!((*a - *b).dist0() < 1e-12, "{sys}");
                }
            }
        }
        let sys = DynSystem::rational(3, 7);
        for _ in 0..1000 {
            let (m, n) = (rng.gen_range(0..1u64 << 40), rng.gen_range(0..1u64 << 40));
            let x = BigRational::new(rng.gen_range(0..1000).into(), 1000.into());
            let lhs = sys.orbit_exact(&x, m + n).unwrap();
            let rhs = sys.orbit_exact(&sys.orbit_exact(&x, n).unwrap(), m).unwrap();
            assert_eq!(lhs, rhs);
        }
        assert!(DynSystem::rotation(GOLDEN).orbit_exact(&BigRational::one(), 1).is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(DynSystem::parse("rotation:alpha=golden").unwrap().kind, SystemKind::Rotation(Turn::from_f64(GOLDEN)));
        assert_eq!(DynSystem::parse("rotation:alpha=1/4").unwrap().kind, SystemKind::RationalRotation(1, 4));
        assert_eq!(DynSystem::parse("rational:2/4").unwrap().kind, SystemKind::RationalRotation(1, 2));
        assert!(DynSystem::parse("skew:alpha=sqrt2-1").unwrap().totally_ergodic());
        assert!(!DynSystem::parse("identity").unwrap().totally_ergodic());
        assert!(DynSystem::parse("torus").is_err());
        assert!(DynSystem::parse("rational:0.5").is_err());

        let f = Observable::parse("trig:0=1,1=1/2,-1=1/2").unwrap();
        assert_eq!(f.integral(), Complex64::new(1.0, 0.0));
        assert!(!f.is_mean_zero());
        assert_eq!(f.sup_bound(), 2.0);
        assert!((f.eval(&[Turn::from_ratio(1, 4)]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let g = Observable::parse("char:0;1").unwrap();
        assert!(g.is_mean_zero() && g.dim() == 2);
        assert!(Observable::parse("char:x").is_err());
    }

    #[test]
    fn rotation_trace_is_spectral() {
        let tm = builtins::thue_morse();
        let sys = DynSystem::rotation(GOLDEN);
        let f = Observable::character(vec![1]);
        let starts = sample_starts(1, 3, 9);
        let cps = [1u64, 100, 1000, 4097];
        let t = weighted_average(&sys, &f, &tm, &lin(), &starts, &cps).unwrap();
        for (j, &n) in cps.iter().enumerate() {
            let s = exp_sum_interval_turn(&tm, Turn::from_f64(GOLDEN), n).mean;
            for (i, x) in starts.iter().enumerate() {
                assert!((t.values[j][i] - x[0].e() * s).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn identity_trace_is_cesaro() {
        let tm = builtins::thue_morse();
        let t = weighted_average(&DynSystem::identity(), &Observable::constant(1.0), &tm, &lin(), &[vec![Turn::ZERO]], &[7, 64, 1000]).unwrap();
        for (j, &n) in t.checkpoints.iter().enumerate() {
            let exact = partial_sum(&tm, n).to_c64() / n as f64;
            assert!((t.values[j][0] - exact).norm() < 1e-15);
        }
        assert_eq!(t.values[1][0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rational_rotation_alternating_is_stuck() {
        let alt = builtins::alternating();
        let x = Turn::from_f64(0.3);
        let t = weighted_average(&DynSystem::rational(1, 2), &Observable::character(vec![1]), &alt, &lin(), &[vec![x]], &[1, 10, 1001]).unwrap();
        for row in &t.values {
            assert!((row[0] - x.e()).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_phase_rejected() {
        let tm = builtins::thue_morse();
        let p = PhasePolynomial::parse("poly:-5,1").unwrap();
        let r = weighted_average(&DynSystem::identity(), &Observable::constant(1.0), &tm, &p, &[vec![Turn::ZERO]], &[10]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let p = PhasePolynomial::parse("poly:0,-1,1").unwrap();
        assert!(weighted_average(&DynSystem::identity(), &Observable::constant(1.0), &tm, &p, &[vec![Turn::ZERO]], &[10]).is_ok());
        assert!(weighted_average(&DynSystem::identity(), &Observable::constant(1.0), &tm, &PhasePolynomial::linear(0.5), &[vec![Turn::ZERO]], &[10]).is_err());
    }

    #[test]
    fn oracle_examples() {
        let tm = builtins::thue_morse();
        let sys = DynSystem::rotation(GOLDEN);
        let f = Observable::character(vec![1]);
        let x = Turn::from_f64(0.125);
        let n = 100_000;
        let o = spectral_oracle(&sys, &f, &tm, &lin(), x, n).unwrap();
        let t = weighted_average(&sys, &f, &tm, &lin(), &[vec![x]], &[n]).unwrap();
        assert!((o - t.values[0][0]).norm() < 1e-8);

        let sq = PhasePolynomial::parse("poly:0,0,1").unwrap();
        let o = spectral_oracle(&sys, &f, &tm, &sq, x, 20_000).unwrap();
        let t = weighted_average(&sys, &f, &tm, &sq, &[vec![x]], &[20_000]).unwrap();
        assert!((o - t.values[0][0]).norm() < 1e-8);

        let rs = builtins::rudin_shapiro();
        let o = spectral_oracle(&sys, &Observable::character(vec![0]), &rs, &lin(), x, 777).unwrap();
        assert!((o - partial_sum(&rs, 777).to_c64() / 777.0).norm() < 1e-15);

        let one = builtins::constant();
        let quarter = DynSystem::rational(1, 4);
        for n in [4u64, 400, 40_000] {
            assert!(spectral_oracle(&quarter, &f, &one, &lin(), x, n).unwrap().norm() < 1e-12);
        }
        assert!(spectral_oracle(&DynSystem::skew(GOLDEN), &f, &one, &lin(), x, 4).is_err());
        let two = Observable::parse("trig:1=1,2=1").unwrap();
        assert!(spectral_oracle(&sys, &two, &one, &lin(), x, 4).is_err());
    }

    #[test]
    fn skew_quadratic_decreases() {
        let tm = builtins::thue_morse();
        let sys = DynSystem::skew(2f64.sqrt() - 1.0);
        let sq = PhasePolynomial::parse("poly:0,0,1").unwrap();
        let r = convergence_report(&sys, &Observable::character(vec![0, 1]), &tm, &sq, 8, &[1 << 8, 1 << 12, 1 << 16], 0).unwrap();
        assert!(r.consistent_with_zero, "{:?}", r.trace.l2);
        assert!(r.totally_ergodic);
    }

    #[test]
    fn golden_rotation_pointwise() {
        let tm = builtins::thue_morse();
        let sys = DynSystem::rotation(GOLDEN);
        let r = convergence_report(&sys, &Observable::character(vec![1]), &tm, &lin(), 64, &[10_000, 100_000, 1_000_000], 1).unwrap();
        assert_eq!(r.kronecker_starts + r.uniform_starts, 64);
        assert!(*r.trace.sup.last().unwrap() < 0.02);
    }

    #[test]
    fn periodic_phase_does_not_decay() {
        let one = builtins::constant();
        let sys = DynSystem::rational(1, 2);
        let p = PhasePolynomial::parse("poly:0,2").unwrap();
        let r = convergence_report(&sys, &Observable::character(vec![1]), &one, &p, 4, &[100, 1000, 10_000], 0).unwrap();
        assert!(!r.consistent_with_zero);
        assert!(!r.totally_ergodic);
        assert!(r.trace.l2.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn log_length_counterexample() {
        let r = counterexample_demo(1 << 20).unwrap();
        assert!(r.closed_form_holds && r.halving_holds);
        assert_eq!(r.means[1].1, BigRational::new(1.into(), 2.into()));
        assert!((r.gap - 1.0 / 3.0).abs() < 1e-5);
        assert!(r.coboundary_holds);
        assert!(r.coboundary.len() > 20);
        // brute-force mean at 2^10
        let ll = builtins::log_length();
        let s: i64 = (0..1024u64).map(|n| if n == 0 { 0 } else { (63 - n.leading_zeros() as i64) % 2 }).sum();
        assert_eq!(r.means[9].1, BigRational::new(s.into(), 1024.into()));
        assert_eq!(ll.eval(1023), crate::Value::int(1));
    }
}

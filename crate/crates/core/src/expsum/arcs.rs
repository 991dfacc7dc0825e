use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::turn::Turn;

/// Exponent in the rational range `q < δ^{-C₀}` and distance `1/(δ^{C₀} N)`.
pub const C0: u32 = 1;
/// Coefficient of the mean correlation in the van der Corput majorant.
pub const VDC_CORRELATION_FACTOR: f64 = 2.0;
/// Coefficient of `H/N` in the van der Corput majorant.
pub const C_VDC: f64 = 3.0;

const CHARACTERS: u64 = 256;
const TENT_LEVELS: u32 = 10;
const TENT_MAX_N: u64 = 1 << 20;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

/// Continued-fraction convergents `p/q` of the binary value of `α` with `q ≤ q_max`.
pub fn convergents(alpha: f64, q_max: u64) -> Vec<(i64, u64)> {
    let mut x = exact(alpha);
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (x.floor().to_integer(), BigInt::one());
    let mut out = Vec::new();
    loop {
        match (p1.to_i64(), q1.to_u64()) {
            (Some(p), Some(q)) if q <= q_max => out.push((p, q)),
            _ => break,
        }
        let frac = &x - x.floor();
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
        let a = x.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArcVerdict {
    Equidistributed,
    Rational { p: i64, q: u64, distance: f64 },
    /// Neither a close rational nor a discrepancy below `δ`.
    Undetermined,
}

#[derive(Clone, Debug)]
pub struct ArcClassification {
    pub alpha: f64,
    pub n: u64,
    pub delta: f64,
    pub verdict: ArcVerdict,
    pub convergents: Vec<(i64, u64)>,
    pub discrepancy: Option<f64>,
}

/// Rational when some `p/q` with `q < δ^{-C₀}` has `|α − p/q| < 1/(δ^{C₀} N)`
/// (least such `q`); otherwise the Lipschitz discrepancy decides.
pub fn classify_arc(alpha: f64, n: u64, delta: f64) -> Result<ArcClassification> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument("need 0 < delta < 1/2".into()));
    }
    if n < 1 || !alpha.is_finite() {
        return Err(Error::InvalidArgument("need N >= 1 and finite alpha".into()));
    }
    let d = exact(delta.powi(C0 as i32));
    let a = exact(alpha);
    let nn = BigRational::from_integer(BigInt::from(n));
    let one = BigRational::one();
    let q_max = (1.0 / delta.powi(C0 as i32)).ceil() as u64;
    let convs = convergents(alpha, q_max);
    let mut verdict = None;
    for q in 1..=q_max {
        let qq = BigRational::from_integer(BigInt::from(q));
        if &qq * &d >= one {
            break;
        }
        let p = (&a * &qq).round();
        let dist = (&a - &p / &qq).abs();
        if &dist * &d * &nn < one {
            verdict = Some(ArcVerdict::Rational {
                p: p.to_integer().to_i64().expect("numerator fits"),
                q,
                distance: dist.to_f64().unwrap_or(f64::NAN),
            });
            break;
        }
    }
    let (verdict, discrepancy) = match verdict {
        Some(v) => (v, None),
        None => {
            let disc = lipschitz_discrepancy(alpha, n);
            let v = if disc < delta { ArcVerdict::Equidistributed } else { ArcVerdict::Undetermined };
            (v, Some(disc))
        }
    };
    Ok(ArcClassification { alpha, n, delta, verdict, convergents: convs, discrepancy })
}

fn sin_pi(t: Turn) -> f64 {
    (std::f64::consts::PI * t.to_f64()).sin().abs()
}

/// `max_f |E_{n<N} f(nα) − ∫f| / ‖f‖_Lip` over characters `e(hx)`, `h ≤ 256`,
/// and tents of width `2^{-j}`, `j ≤ 10`, centred on multiples of half
/// their width. Tents are skipped for `N > 2^20`.
pub fn lipschitz_discrepancy(alpha: f64, n: u64) -> f64 {
    let a = Turn::from_f64(alpha);
    let mut worst = 0.0f64;
    for h in 1..=CHARACTERS {
        let b = a.mul_u(h as u128);
        let den = sin_pi(b);
        let v = if den < 1e-300 { 1.0 } else { (sin_pi(b.mul_u(n as u128)) / (n as f64 * den)).min(1.0) };
        worst = worst.max(v / (1.0 + 2.0 * std::f64::consts::PI * h as f64));
    }
    if n > TENT_MAX_N {
        return worst;
    }
    let mut xs: Vec<f64> = (0..n).map(|i| a.mul_u(i as u128).to_f64()).collect();
    xs.sort_by(f64::total_cmp);
    let ext: Vec<f64> = xs
        .iter()
        .map(|x| x - 1.0)
        .chain(xs.iter().copied())
        .chain(xs.iter().map(|x| x + 1.0))
        .collect();
    let mut prefix = vec![0.0f64; ext.len() + 1];
    for (i, x) in ext.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    let lower = |t: f64| ext.partition_point(|&x| x < t);
    let nf = n as f64;
    for j in 1..=TENT_LEVELS {
        let w = 0.5f64.powi(j as i32);
        let h = w / 2.0;
        for c_idx in 0..(1u64 << (j + 1)) {
            let c = c_idx as f64 * h;
            let (lo, mid, hi) = (lower(c - h), lower(c), lower(c + h));
            let left = (mid - lo) as f64 * c - (prefix[mid] - prefix[lo]);
            let right = (prefix[hi] - prefix[mid]) - (hi - mid) as f64 * c;
            let mass = (hi - lo) as f64 - (left + right) / h;
            let dev = (mass / nf - h).abs();
            worst = worst.max(dev / (1.0 + 2.0 / w));
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct PartitionCheck {
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
    pub discrepancy: f64,
}

/// `Σ_i (|S_i|/N) |E_{n∈S_i} e(nα)| ≤ 1 − 1/(6r²)` for the partition of
/// `[0, N)` given by `labels[n] ∈ 0..r`.
pub fn partition_bound_check(alpha: f64, n: u64, labels: &[usize], r: usize) -> Result<PartitionCheck> {
    if r < 1 || labels.len() as u64 != n || labels.iter().any(|&l| l >= r) {
        return Err(Error::InvalidArgument("labels must assign each n < N a part below r".into()));
    }
    let rf = r as f64;
    let disc = lipschitz_discrepancy(alpha, n);
    let need = 1.0 / (100.0 * rf * rf);
    if disc >= need {
        return Err(Error::Hypothesis(format!(
            "discrepancy {} is not below 1/(100 r^2) = {}",
            crate::fmt_num(disc),
            crate::fmt_num(need)
        )));
    }
    let a = Turn::from_f64(alpha);
    let mut parts = vec![Complex64::new(0.0, 0.0); r];
    for (i, &l) in labels.iter().enumerate() {
        parts[l] += a.mul_u(i as u128).e();
    }
    let lhs = parts.iter().map(|z| z.norm()).sum::<f64>() / n as f64;
    let bound = 1.0 - 1.0 / (6.0 * rf * rf);
    Ok(PartitionCheck { lhs, bound, margin: bound - lhs, holds: lhs <= bound, discrepancy: disc })
}

#[derive(Clone, Debug)]
pub struct VdcCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|E_{n<N} x(n)|² ≤ 2 E_{h<H} |E_{n<N} x(n+h) x̄(n)| + 3H/N`.
pub fn vdc_check(x: &[Complex64], h: usize, n: usize) -> Result<VdcCheck> {
    if h < 1 || h >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= H < N, got H={h}, N={n}")));
    }
    if x.len() < n + h {
        return Err(Error::InvalidArgument(format!("need N + H <= {} values", x.len())));
    }
    let nf = n as f64;
    let mean: Complex64 = x[..n].iter().sum::<Complex64>() / nf;
    let corr: f64 = (0..h)
        .map(|d| (0..n).map(|i| x[i + d] * x[i].conj()).sum::<Complex64>().norm() / nf)
        .sum::<f64>()
        / h as f64;
    let lhs = mean.norm_sqr();
    let rhs = VDC_CORRELATION_FACTOR * corr + C_VDC * h as f64 / nf;
    Ok(VdcCheck { lhs, rhs, holds: lhs <= rhs })
}

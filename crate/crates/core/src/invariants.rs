//! The invariant suite behind `autoweight check`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{block_sums, decay_exponent, invertible_decomposition, is_balanced, is_totally_balanced, partial_sum, Weight};
use crate::automaton::{
    base_change, check_aperiodic, cycle_gcd, frequencies, invertibility, isomorphic, kernel_family, cokernel_family,
    minimize, normalize_leading_zeros, product, restrict_ap, scc_analysis, shift, Automaton, SequenceHandle,
};
use crate::builtins;
use crate::ergodic::{counterexample_demo, spectral_oracle, weighted_average, DynSystem, Observable};
use crate::expsum::{
    classify_arc, exp_sum_direct, exp_sum_interval_turn, exp_sum_transfer_turn, sup_linear, tm_product_oracle, vdc_check,
    ArcVerdict, PhasePolynomial,
};
use crate::turn::Turn;
use crate::value::Value;

/// Cross-method agreement of exponential sums.
pub const METHOD_TOL: f64 = 1e-9;
/// Transfer recursion against the Thue–Morse product formula.
pub const ORACLE_TOL: f64 = 1e-10;
/// Spectral identity between orbit averages and exponential sums.
pub const SPECTRAL_TOL: f64 = 1e-8;
/// Residue spread of frequencies for aperiodic automata.
pub const SPREAD_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, failures: Vec<String>, ok_detail: String) -> Check {
    match failures.first() {
        None => Check { name, passed: true, detail: ok_detail },
        Some(f) => Check { name, passed: false, detail: format!("{} failure(s); first: {f}", failures.len()) },
    }
}

/// Compares the outputs at two state tables exactly, caching state pairs.
fn same_outputs(a: &[Value], sa: &[usize], b: &[Value], sb: &[usize]) -> Option<usize> {
    let mut cache: HashMap<(usize, usize), bool> = HashMap::new();
    sa.iter()
        .zip(sb)
        .position(|(&x, &y)| !*cache.entry((x, y)).or_insert_with(|| a[x] == b[y]))
}

/// `eval(restrict_ap(a, q, r), n) = eval(a, qn + r)` for all builtins, `q ≤ q_max`, `n < n_max`.
pub fn restrict_roundtrip(q_max: u64, n_max: usize) -> Check {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for seq in builtins::all() {
        let full = seq.state_table(q_max as usize * n_max + q_max as usize);
        for q in 1..=q_max {
            for r in 0..q {
                let h = match restrict_ap(&seq, q, r) {
                    Ok(h) => h,
                    Err(e) => {
                        failures.push(format!("{} q={q} r={r}: {e}", seq.label()));
                        continue;
                    }
                };
                let sh = h.state_table(n_max);
                let sa: Vec<usize> = (0..n_max).map(|n| full[q as usize * n + r as usize]).collect();
                if let Some(n) = same_outputs(h.outputs(), &sh, seq.outputs(), &sa) {
                    failures.push(format!("{} q={q} r={r} n={n}", seq.label()));
                }
                pairs += 1;
            }
        }
    }
    check("restrict_ap round trip", failures, format!("{pairs} progressions, n < {n_max}"))
}

/// `eval(base_change(A, l), n) = eval(A, n)` for `l ∈ {2, 3}`.
pub fn base_change_fidelity(n_max: usize) -> Check {
    let mut failures = Vec::new();
    for seq in builtins::all() {
        let sa = seq.state_table(n_max);
        for l in [2u32, 3] {
            let h = match base_change(seq.automaton(), l).and_then(|b| SequenceHandle::new(b, "bc")) {
                Ok(h) => h,
                Err(e) => {
                    failures.push(format!("{} l={l}: {e}", seq.label()));
                    continue;
                }
            };
            if let Some(n) = same_outputs(h.outputs(), &h.state_table(n_max), seq.outputs(), &sa) {
                failures.push(format!("{} l={l} n={n}", seq.label()));
            }
        }
    }
    check("base_change fidelity", failures, format!("l in {{2,3}}, n < {n_max}"))
}

/// Kernel closures stay within the state count and are closed under
/// `b ↦ b(kn + j)`; co-kernel closures terminate.
pub fn kernel_closure() -> Check {
    let mut failures = Vec::new();
    let probe = 600usize;
    for seq in builtins::all() {
        let states = minimize(seq.automaton()).map(|m| m.num_states()).unwrap_or(0);
        let fam = match kernel_family(&seq) {
            Ok(f) => f,
            Err(e) => {
                failures.push(format!("{}: {e}", seq.label()));
                continue;
            }
        };
        if fam.len() > states {
            failures.push(format!("{}: kernel size {} > {}", seq.label(), fam.len(), states));
        }
        let k = seq.base() as u64;
        let tables: Vec<Vec<Value>> = fam.iter().map(|h| (0..probe as u64).map(|n| h.eval(n)).collect()).collect();
        for h in &fam {
            for j in 0..k {
                let sub: Vec<Value> = (0..probe as u64).map(|n| h.eval(k * n + j)).collect();
                if !tables.contains(&sub) {
                    failures.push(format!("{}: kernel not closed at j={j}", h.label()));
                }
            }
        }
        match cokernel_family(seq.automaton()) {
            Ok(c) => {
                let distinct: std::collections::HashSet<&Value> = seq.outputs().iter().collect();
                let bound = (distinct.len() as f64).powi(seq.automaton().num_states() as i32);
                if c.len() as f64 > bound {
                    failures.push(format!("{}: co-kernel size {}", seq.label(), c.len()));
                }
            }
            Err(e) => failures.push(format!("{}: {e}", seq.label())),
        }
    }
    check("kernel closure sizes", failures, "all builtins".into())
}

fn strongly_connected_samples() -> Vec<(String, Automaton)> {
    let mut out = Vec::new();
    for seq in builtins::all() {
        let Ok(m) = minimize(seq.automaton()) else { continue };
        let scc = scc_analysis(&m);
        for comp in scc.terminal_components() {
            if let Ok(sub) = m.restrict_to(comp) {
                out.push((format!("{}[terminal]", seq.label()), sub));
            }
        }
    }
    out
}

/// `cycle_gcd` is the same at every state and coprime to `k`.
pub fn cycle_gcd_uniform() -> Check {
    let mut failures = Vec::new();
    let samples = strongly_connected_samples();
    for (name, a) in &samples {
        let ds: Vec<u64> = (0..a.num_states()).filter_map(|s| cycle_gcd(a, s).ok()).collect();
        if ds.len() != a.num_states() || ds.iter().any(|&d| d != ds[0]) {
            failures.push(format!("{name}: {ds:?}"));
        } else if ds[0].gcd(&(a.base() as u64)) != 1 {
            failures.push(format!("{name}: d={} not coprime to k", ds[0]));
        }
    }
    check("cycle gcd uniformity", failures, format!("{} strongly connected automata", samples.len()))
}

/// Frequency rows sum to 1; aperiodic automata have equal rows.
pub fn frequency_rows(q_max: u64) -> Check {
    let mut failures = Vec::new();
    let mut tested = 0;
    for (name, a) in strongly_connected_samples() {
        let aperiodic = check_aperiodic(&a).map(|c| c.holds).unwrap_or(false);
        for q in 1..=q_max {
            if q.gcd(&(a.base() as u64)) != 1 {
                continue;
            }
            let f = match frequencies(&a, q) {
                Ok(f) => f,
                Err(e) => {
                    failures.push(format!("{name} q={q}: {e}"));
                    continue;
                }
            };
            for r in 0..q {
                let row: f64 = (0..a.num_states()).map(|s| f.get_f64(s, r)).sum();
                if (row - 1.0).abs() > 1e-12 {
                    failures.push(format!("{name} q={q} r={r}: row sum {row}"));
                }
            }
            if aperiodic && f.residue_spread() > SPREAD_TOL {
                failures.push(format!("{name} q={q}: spread {}", f.residue_spread()));
            }
            tested += 1;
        }
    }
    check("frequency row sums", failures, format!("{tested} (automaton, q) pairs"))
}

/// Products of invertible automata are invertible.
pub fn invertible_products() -> Check {
    let mut failures = Vec::new();
    let inv: Vec<SequenceHandle> = builtins::all()
        .into_iter()
        .filter(|s| matches!(invertibility(s.automaton()), Ok(Some(_))))
        .collect();
    for a in &inv {
        for b in &inv {
            if a.base() != b.base() {
                continue;
            }
            let ok = product(a.automaton(), b.automaton(), Value::mul)
                .and_then(|p| invertibility(&p))
                .map(|g| g.is_some())
                .unwrap_or(false);
            if !ok {
                failures.push(format!("{} x {}", a.label(), b.label()));
            }
        }
    }
    check("invertible products", failures, format!("{} invertible builtins", inv.len()))
}

/// A random complete automaton with outputs in `{−1, −1/2, 0, 1/2, 1}`.
pub fn random_automaton(rng: &mut impl Rng, k: u32, states: usize) -> Automaton {
    let delta = (0..states).map(|_| (0..k).map(|_| rng.gen_range(0..states)).collect()).collect();
    let out = (0..states).map(|_| Value::ratio(rng.gen_range(-2..=2), 2)).collect();
    Automaton::new(k, delta, Some(0), Some(out)).expect("well formed")
}

/// Normalizing twice changes nothing and preserves canonical evaluation.
pub fn normalization_idempotence(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut autos: Vec<Automaton> = builtins::all().iter().map(|s| s.automaton().clone()).collect();
    autos.push(builtins::length_parity_automaton());
    for _ in 0..trials {
        let k = rng.gen_range(2..=4);
        let n = rng.gen_range(1..=5);
        autos.push(random_automaton(&mut rng, k, n));
    }
    for (i, a) in autos.iter().enumerate() {
        let once = match normalize_leading_zeros(a) {
            Ok(x) => x,
            Err(e) => {
                failures.push(format!("#{i}: {e}"));
                continue;
            }
        };
        let twice = normalize_leading_zeros(&once).expect("normalized input");
        let same = match (minimize(&once), minimize(&twice)) {
            (Ok(x), Ok(y)) => isomorphic(&x, &y),
            _ => false,
        };
        if !same || !once.ignores_leading_zeros() {
            failures.push(format!("#{i}: not idempotent"));
        }
        for n in 0..500u64 {
            if once.eval(n).ok() != a.eval(n).ok() {
                failures.push(format!("#{i}: value differs at n={n}"));
                break;
            }
        }
    }
    check("normalization idempotence", failures, format!("{} automata", autos.len()))
}

/// Direct, transfer and interval evaluation agree.
pub fn three_method_agreement(trials: usize, n_max: u64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seqs = builtins::all();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let seq = &seqs[rng.gen_range(0..seqs.len())];
        let alpha: f64 = rng.gen();
        let n = rng.gen_range(1..=n_max);
        let a = Turn::from_f64(alpha);
        let p = PhasePolynomial::linear(alpha);
        let d = exp_sum_direct(seq, &p, n).mean;
        let i = exp_sum_interval_turn(seq, a, n).mean;
        let k = seq.base() as u64;
        let mut l = 0u32;
        while k.pow(l + 1) <= n {
            l += 1;
        }
        let t = exp_sum_transfer_turn(seq, a, l).expect("fits").mean;
        let i2 = exp_sum_interval_turn(seq, a, k.pow(l)).mean;
        let e = (d - i).norm().max((t - i2).norm());
        worst = worst.max(e);
        if e > METHOD_TOL {
            failures.push(format!("{} alpha={alpha} N={n}: {e:e}", seq.label()));
        }
    }
    check("three-method agreement", failures, format!("{trials} triples, worst {}", crate::fmt_num(worst)))
}

/// `|E_{n<2^L} t(n) e(nα)| = Π |sin(π 2^l α)|`.
pub fn tm_closed_form(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tm = builtins::thue_morse();
    let mut failures = Vec::new();
    for _ in 0..trials {
        let alpha: f64 = rng.gen();
        let l = rng.gen_range(0..=20);
        let t = exp_sum_transfer_turn(&tm, Turn::from_f64(alpha), l).expect("fits").abs();
        let o = tm_product_oracle(alpha, l);
        if (t - o).abs() > ORACLE_TOL {
            failures.push(format!("alpha={alpha} L={l}: {t} vs {o}"));
        }
    }
    check("Thue-Morse product formula", failures, format!("{trials} phases"))
}

/// Exact partial sums against sums of state counts over `n < N`.
pub fn partial_sums_naive(samples: usize, n_max: u64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for seq in builtins::all() {
        let mut ns: Vec<u64> = (0..samples / 10).map(|_| rng.gen_range(0..=n_max)).collect();
        ns.sort_unstable();
        let states = seq.state_table(n_max as usize);
        let mut counts = vec![0u64; seq.automaton().num_states()];
        let mut pos = 0usize;
        for &n in &ns {
            while (pos as u64) < n {
                counts[states[pos]] += 1;
                pos += 1;
            }
            let naive = counts
                .iter()
                .zip(seq.outputs())
                .filter(|(c, _)| **c > 0)
                .fold(Value::zero(), |acc, (&c, v)| acc.add(&v.scale(&BigInt::from(c))));
            if naive != partial_sum(&seq, n) {
                failures.push(format!("{} N={n}", seq.label()));
            }
        }
    }
    check("partial sums", failures, format!("{samples} sampled N <= {n_max}"))
}

/// `σ(L)` from the block recursion equals enumeration over all words of length `L`.
pub fn block_sums_enumeration(l_max: usize) -> Check {
    let mut failures = Vec::new();
    for seq in builtins::all() {
        let a = seq.automaton();
        let k = a.base() as u64;
        let Ok(t) = block_sums(&seq, l_max) else {
            failures.push(format!("{}: block_sums failed", seq.label()));
            continue;
        };
        for l in 0..=l_max {
            let count = k.pow(l as u32);
            if count > 1 << 16 {
                break;
            }
            let s0 = a.initial().unwrap_or(0);
            let mut acc = Value::zero();
            for u in 0..count {
                let mut s = s0;
                let mut x = u;
                for _ in 0..l {
                    s = a.next(s, (x % k) as u32);
                    x /= k;
                }
                acc = acc.add(&seq.outputs()[s]);
            }
            if acc != *t.sum(l) {
                failures.push(format!("{} L={l}", seq.label()));
            }
        }
    }
    check("block sums", failures, format!("L <= {l_max}"))
}

/// Balanced sequences have a decay fit with `c > 0` or identically zero blocks.
pub fn balanced_implies_decay() -> Check {
    let mut failures = Vec::new();
    let mut tested = 0;
    for seq in builtins::all() {
        if !is_balanced(&seq).map(|c| c.balanced).unwrap_or(false) {
            continue;
        }
        tested += 1;
        let l = if seq.base() == 2 { 4..=16 } else { 3..=10 };
        match decay_exponent(&seq, &Weight::Periodic(vec![Value::one()]), l) {
            Ok(f) if f.is_exact_zero() || f.exponent > 0.0 => {}
            Ok(f) => failures.push(format!("{}: c = {}", seq.label(), f.exponent)),
            Err(e) => failures.push(format!("{}: {e}", seq.label())),
        }
    }
    check("balanced implies decay", failures, format!("{tested} balanced builtins"))
}

/// `per + bal` recombines exactly and `per` has period `k − 1`.
pub fn per_bal_recombination(n_max: u64) -> Check {
    let mut failures = Vec::new();
    let mut tested = 0;
    for seq in builtins::all() {
        if !matches!(invertibility(seq.automaton()), Ok(Some(_))) {
            continue;
        }
        tested += 1;
        match invertible_decomposition(&seq) {
            Ok(d) => {
                if (seq.base() as u64 - 1) % d.period != 0 {
                    failures.push(format!("{}: period {}", seq.label(), d.period));
                }
                let sb = d.bal.state_table(n_max as usize);
                let sa = seq.state_table(n_max as usize);
                let mut cache: HashMap<(usize, usize, u64), bool> = HashMap::new();
                for n in 0..n_max {
                    let key = (sa[n as usize], sb[n as usize], n % d.period);
                    let ok = *cache.entry(key).or_insert_with(|| {
                        d.per_at(n).add(&d.bal.outputs()[key.1]) == seq.outputs()[key.0]
                    });
                    if !ok {
                        failures.push(format!("{} n={n}", seq.label()));
                        break;
                    }
                }
            }
            Err(e) => failures.push(format!("{}: {e}", seq.label())),
        }
    }
    check("per + bal recombination", failures, format!("{tested} invertible builtins, n < {n_max}"))
}

/// Total balance at `Q` implies total balance at every smaller `Q′`.
pub fn total_balance_monotone() -> Check {
    let mut failures = Vec::new();
    for name in ["thue-morse", "rudin-shapiro", "alternating", "tm-odd"] {
        let seq = builtins::by_name(name).expect("builtin");
        let results: Vec<bool> = [2u64, 5, 8, 12]
            .iter()
            .map(|&q| is_totally_balanced(&seq, q).map(|c| c.holds).unwrap_or(false))
            .collect();
        if results.windows(2).any(|w| w[1] && !w[0]) {
            failures.push(format!("{name}: {results:?}"));
        }
    }
    check("total balance monotone in Q", failures, "Q in {2,5,8,12}".into())
}

/// `sup_linear` lies between the grid maximum and grid maximum plus its bound.
pub fn sup_bracket(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for seq in builtins::all() {
        let n = rng.gen_range(2..2000);
        match sup_linear(&seq, n, 1e-4) {
            Ok(s) if s.value >= s.grid_max && s.value <= s.grid_max + s.err && s.err <= 1e-4 => {}
            Ok(s) => failures.push(format!("{} N={n}: {s:?}", seq.label())),
            Err(e) => failures.push(format!("{} N={n}: {e}", seq.label())),
        }
    }
    check("sup bracket", failures, "all builtins".into())
}

/// Rational verdicts satisfy `q < δ^{-C₀}` and `|α − p/q| < 1/(δ^{C₀} N)`.
pub fn arc_inequality(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut rational = 0;
    for _ in 0..trials {
        let q0 = rng.gen_range(1..20u64);
        let alpha = rng.gen_range(0..q0) as f64 / q0 as f64 + rng.gen_range(-1e-3..1e-3);
        let delta = rng.gen_range(0.02..0.45);
        let n = rng.gen_range(1..3000u64);
        match classify_arc(alpha, n, delta) {
            Ok(c) => {
                if let ArcVerdict::Rational { p, q, .. } = c.verdict {
                    rational += 1;
                    let dc = delta.powi(crate::expsum::C0 as i32);
                    if !((q as f64) * dc < 1.0 && (alpha - p as f64 / q as f64).abs() * dc * (n as f64) < 1.0) {
                        failures.push(format!("alpha={alpha} N={n} delta={delta}: {p}/{q}"));
                    }
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    check("arc classification", failures, format!("{trials} trials, {rational} rational"))
}

/// The van der Corput inequality on bounded random sequences.
pub fn vdc_trials(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for t in 0..trials {
        let h = [8usize, 16, 32][t % 3];
        let n = 10_000;
        let x = random_bounded(&mut rng, n + h);
        match vdc_check(&x, h, n) {
            Ok(c) if c.holds => {}
            Ok(c) => failures.push(format!("trial {t}: lhs {} > rhs {}", c.lhs, c.rhs)),
            Err(e) => failures.push(e.to_string()),
        }
    }
    check("van der Corput", failures, format!("{trials} trials"))
}

/// Seeded complex sequences of modulus at most 1, mixing structured and noisy families.
pub fn random_bounded(rng: &mut impl Rng, len: usize) -> Vec<Complex64> {
    match rng.gen_range(0..4) {
        0 => (0..len).map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen::<f64>() * std::f64::consts::TAU)).collect(),
        1 => {
            let a: f64 = rng.gen();
            let b: f64 = rng.gen();
            (0..len).map(|i| Turn::from_f64(a).mul_u(i as u128 * i as u128).e() * Turn::from_f64(b).mul_u(i as u128).e()).collect()
        }
        2 => {
            let bias: f64 = rng.gen_range(0.0..1.0);
            (0..len).map(|_| Complex64::new(if rng.gen::<f64>() < bias { 1.0 } else { -1.0 }, 0.0)).collect()
        }
        _ => {
            let period = rng.gen_range(1..12);
            let base: Vec<Complex64> = (0..period).map(|_| Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)).collect();
            (0..len).map(|i| base[i % period]).collect()
        }
    }
}

/// `t(n) t(n+1) = (−1)^{ν₂(n+1)+1}`.
pub fn tm_shift_product(n_max: u64) -> Check {
    let tm = builtins::thue_morse();
    let mut failures = Vec::new();
    match shift(&tm, 1).and_then(|s| product(tm.automaton(), s.automaton(), Value::mul)).and_then(|p| SequenceHandle::new(p, "tt")) {
        Ok(h) => {
            for n in 0..n_max {
                let e = if (n + 1).trailing_zeros() % 2 == 0 { -1 } else { 1 };
                if h.eval(n) != Value::int(e) {
                    failures.push(format!("n={n}"));
                    break;
                }
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    check("shifted Thue-Morse product", failures, format!("n < {n_max}"))
}

/// `T^{m+n} x = T^m(T^n x)`.
pub fn orbit_composition(trials: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let systems = [
        DynSystem::rotation((5f64.sqrt() - 1.0) / 2.0),
        DynSystem::skew(2f64.sqrt() - 1.0),
        DynSystem::rational(2, 5),
        DynSystem::identity(),
    ];
    for _ in 0..trials {
        let sys = &systems[rng.gen_range(0..systems.len())];
        let (m, n) = (rng.gen_range(0..1u128 << 50), rng.gen_range(0..1u128 << 50));
        let x: Vec<Turn> = (0..sys.dim()).map(|_| Turn::from_f64(rng.gen())).collect();
        let lhs = sys.orbit(&x, m + n);
        let rhs = sys.orbit(&sys.orbit(&x, n), m);
        if lhs.iter().zip(&rhs).any(|(a, b)| (*a - *b).dist0() > 1e-12) {
            failures.push(format!("{sys} m={m} n={n}"));
        }
    }
    check("orbit composition", failures, format!("{trials} trials"))
}

/// Orbit averages of characters on rotations equal the exponential-sum oracle.
pub fn spectral_identity(trials: usize, n: u64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seqs = builtins::all();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let seq = &seqs[rng.gen_range(0..seqs.len())];
        let sys = DynSystem::rotation(rng.gen());
        let m = rng.gen_range(-3..=3i64);
        let f = Observable::character(vec![m]);
        let p = PhasePolynomial::parse(&format!("poly:{},{}", rng.gen_range(0..5), rng.gen_range(1..4))).expect("phase");
        let x = Turn::from_f64(rng.gen());
        let res = spectral_oracle(&sys, &f, seq, &p, x, n)
            .and_then(|o| weighted_average(&sys, &f, seq, &p, &[vec![x]], &[n]).map(|t| (o - t.values[0][0]).norm()));
        match res {
            Ok(e) => {
                worst = worst.max(e);
                if e > SPECTRAL_TOL {
                    failures.push(format!("{} {sys} m={m} p={p}: {e:e}", seq.label()));
                }
            }
            Err(e) => failures.push(e.to_string()),
        }
    }
    check("spectral identity", failures, format!("{trials} configurations, worst {}", crate::fmt_num(worst)))
}

/// Exact halving of log-length means and the coboundary bound.
pub fn counterexample(n_max: u64) -> Check {
    let mut failures = Vec::new();
    match counterexample_demo(n_max) {
        Ok(r) => {
            if !r.closed_form_holds {
                failures.push("closed form".into());
            }
            if !r.halving_holds {
                failures.push("halving".into());
            }
            if !r.coboundary_holds {
                failures.push("coboundary bound".into());
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    check("log-length counterexample", failures, format!("N <= {n_max}"))
}

/// Every check, in a fixed order.
pub fn run_suite(seed: u64) -> Vec<Check> {
    vec![
        restrict_roundtrip(50, 100_000),
        base_change_fidelity(100_000),
        kernel_closure(),
        cycle_gcd_uniform(),
        frequency_rows(12),
        invertible_products(),
        normalization_idempotence(200, seed),
        partial_sums_naive(10_000, 1_000_000, seed),
        block_sums_enumeration(8),
        balanced_implies_decay(),
        per_bal_recombination(100_000),
        total_balance_monotone(),
        three_method_agreement(500, 1 << 20, seed),
        tm_closed_form(1000, seed),
        sup_bracket(seed),
        arc_inequality(1000, seed),
        vdc_trials(1000, seed),
        tm_shift_product(100_000),
        orbit_composition(1000, seed),
        spectral_identity(20, 20_000, seed),
        counterexample(1 << 24),
    ]
}

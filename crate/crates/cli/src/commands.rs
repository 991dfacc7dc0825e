use std::path::{Path, PathBuf};

use autoweight_core::analysis::{decay_exponent, invertible_decomposition, is_balanced, is_totally_balanced, Weight};
use autoweight_core::automaton::{
    check_aperiodic, cycle_gcd, decompose_aperiodic, invertibility, restrict_ap, scc_analysis, write_automaton,
};
use autoweight_core::ergodic::{convergence_report, counterexample_demo, DynSystem, Observable};
use autoweight_core::expsum::{
    exp_sum_direct, exp_sum_interval_turn, exp_sum_rational, exp_sum_transfer_turn, parse_real, poly_sup_sample,
    sup_decay, sup_linear, ExpSumReport, PhasePolynomial, SampleSpec,
};
use autoweight_core::invariants::run_suite;
use autoweight_core::{builtins, Automaton, SequenceHandle, Value};
use clap::{Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::input::{load_automaton, load_sequence, parse_count, parse_list, parse_range};
use crate::report::{num, Report};
use crate::CliError;

const MAX_EVAL: u64 = 1_000_000;

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Evaluate the sequence at consecutive indices.
    Eval {
        input: String,
        #[arg(long, default_value = "0", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value = "1", value_parser = parse_count)]
        count: u64,
    },
    /// Structural and balancedness report.
    Analyze {
        input: String,
        #[arg(long, default_value_t = 12)]
        q_bound: u64,
    },
    /// Weighted exponential sum `E_{n<N} a(n) e(p(n))`.
    Sum {
        input: String,
        #[arg(long)]
        phase: String,
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Supremum over linear phases, or a sample of polynomial phases.
    Sup {
        input: String,
        #[arg(long = "N", value_parser = parse_count)]
        n: u64,
        #[arg(long, default_value_t = 1e-6)]
        err: f64,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value_t = 16)]
        reals: usize,
        #[arg(long, default_value_t = 16)]
        rationals: usize,
        #[arg(long, default_value_t = 16)]
        near_rationals: usize,
        #[arg(long, default_value_t = 24)]
        max_denominator: u64,
        #[arg(long)]
        require_invertible: bool,
        /// List every sampled phase.
        #[arg(long)]
        all: bool,
    },
    /// Decay rate of means along `N = k^L`.
    Decay {
        input: String,
        #[arg(long = "L", default_value = "4..16", value_parser = parse_range)]
        l: (u32, u32),
        /// `none`, `periodic:<v0>,<v1>,...` or `phase:<p>/<q>`.
        #[arg(long, default_value = "none")]
        weight: String,
        /// Fit the linear-phase supremum instead.
        #[arg(long)]
        sup: bool,
        #[arg(long, default_value_t = 1e-4)]
        err: f64,
    },
    /// Automaton for `n ↦ a(qn + r)`.
    Restrict {
        input: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Aperiodic or periodic-plus-balanced decomposition.
    Decompose {
        input: String,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Output directory.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Weighted ergodic averages.
    Ergodic {
        #[arg(long, default_value = "rotation:alpha=golden")]
        system: String,
        #[arg(long, default_value = "char:1")]
        observable: String,
        #[arg(long, default_value = "thue-morse")]
        weight: String,
        #[arg(long, default_value = "poly:0,1")]
        phase: String,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Comma-separated checkpoints.
        #[arg(long, default_value = "2^10,2^12,2^14")]
        schedule: String,
        /// Run the log-length demonstration instead.
        #[arg(long)]
        counterexample: bool,
        #[arg(long, default_value = "2^24", value_parser = parse_count)]
        n_max: u64,
    },
    /// Print or save a built-in automaton.
    Builtin {
        name: Option<String>,
        #[arg(long)]
        list: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Check,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Auto,
    Direct,
    Transfer,
    Interval,
    Rational,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindArg {
    Aperiodic,
    Invertible,
}

pub fn run(verb: &Verb, seed: u64, r: &mut Report) -> Result<(), CliError> {
    match verb {
        Verb::Eval { input, n, count } => eval(input, *n, *count, r),
        Verb::Analyze { input, q_bound } => analyze(input, *q_bound, r),
        Verb::Sum { input, phase, n, method } => sum(input, phase, *n, *method, r),
        Verb::Sup { input, n, err, degree, reals, rationals, near_rationals, max_denominator, require_invertible, all } => {
            let seq = load_sequence(input)?;
            if *degree <= 1 {
                sup(&seq, *n, *err, r)
            } else {
                let spec = SampleSpec {
                    reals: *reals,
                    rationals: *rationals,
                    near_rationals: *near_rationals,
                    max_denominator: *max_denominator,
                    seed,
                    require_invertible: *require_invertible,
                };
                sample(&seq, *degree, *n, &spec, *all, r)
            }
        }
        Verb::Decay { input, l, weight, sup, err } => decay(input, *l, weight, *sup, *err, r),
        Verb::Restrict { input, q, r: res, output } => restrict(input, *q, *res, output.as_deref(), r),
        Verb::Decompose { input, kind, output } => decompose(input, *kind, output.as_deref(), r),
        Verb::Ergodic { system, observable, weight, phase, samples, schedule, counterexample, n_max } => {
            if *counterexample {
                counterexample_cmd(*n_max, r)
            } else {
                ergodic(system, observable, weight, phase, *samples, schedule, seed, r)
            }
        }
        Verb::Builtin { name, list, output } => builtin(name.as_deref(), *list, output.as_deref(), r),
        Verb::Check => check(seed, r),
    }
}

fn value_json(v: &Value) -> Json {
    Json::String(v.to_string())
}

fn eval(input: &str, n: u64, count: u64, r: &mut Report) -> Result<(), CliError> {
    if count == 0 || count > MAX_EVAL {
        return Err(CliError::Domain(format!("count must lie in 1..={MAX_EVAL}")));
    }
    let seq = load_sequence(input)?;
    let end = n.checked_add(count).ok_or_else(|| CliError::Domain("index overflow".into()))?;
    let rows: Vec<Json> = (n..end).map(|i| json!([i, value_json(&seq.eval(i))])).collect();
    if count == 1 {
        r.set("n", n).set("value", value_json(&seq.eval(n)));
    } else {
        r.set("values", rows);
    }
    Ok(())
}

fn names(a: &Automaton, states: &[usize]) -> String {
    states.iter().map(|&s| a.names()[s].as_str()).collect::<Vec<_>>().join(" ")
}

fn digits_bijective(a: &Automaton) -> bool {
    (0..a.base()).all(|j| {
        let mut seen = vec![false; a.num_states()];
        (0..a.num_states()).all(|s| !std::mem::replace(&mut seen[a.next(s, j)], true))
    })
}

fn analyze(input: &str, q_bound: u64, r: &mut Report) -> Result<(), CliError> {
    let (a, label) = load_automaton(input)?;
    r.set("automaton", label.as_str()).set("base", a.base()).set("states", a.num_states());
    r.set("initial", a.initial().map(|s| Json::String(a.names()[s].clone())).unwrap_or(Json::Null));
    let complete = a.initial().is_some() && a.output().is_some();
    r.set("complete", complete);

    let scc = scc_analysis(&a);
    let comps: Vec<Json> = scc
        .components
        .iter()
        .zip(&scc.terminal)
        .map(|(c, t)| json!({"states": names(&a, c), "terminal": t}))
        .collect();
    r.set("strongly_connected", scc.is_strongly_connected()).set("components", comps);

    let mut terminal = Vec::new();
    let mut aperiodic = true;
    for c in scc.terminal_components() {
        let sub = a.restrict_to(c)?;
        let d = cycle_gcd(&sub, 0)?;
        let cert = check_aperiodic(&sub)?;
        aperiodic &= cert.holds;
        terminal.push(json!({
            "states": names(&a, c),
            "cycle_gcd": d,
            "zero_fixed": cert.zero_fixed_state.map(|s| Json::String(sub.names()[s].clone())).unwrap_or(Json::Null),
            "aperiodic": cert.holds,
        }));
    }
    r.set("terminal", terminal).set("aperiodic_sufficient_test", aperiodic);

    if !complete {
        r.set("digits_bijective", digits_bijective(&a));
        return Ok(());
    }
    match invertibility(&a)? {
        Some(g) => r.set("invertible", true).set("group_order", g.order()),
        None => r.set("invertible", false),
    };
    let seq = SequenceHandle::new(a, label)?;
    let bal = is_balanced(&seq)?;
    r.set("balanced", bal.balanced);
    let tot = is_totally_balanced(&seq, q_bound)?;
    let witness = tot.witness.map(|(q, r)| json!([q, r])).unwrap_or(Json::Null);
    r.set(
        "totally_balanced",
        json!({"holds": tot.holds, "q_bound": tot.q_bound, "extra_q": tot.extra_q, "tested": tot.tested, "witness": witness}),
    );
    Ok(())
}

fn parse_phase(s: &str) -> Result<PhasePolynomial, CliError> {
    if let Ok(p) = PhasePolynomial::parse(s) {
        return Ok(p);
    }
    match parse_real(s) {
        Some(c) => Ok(PhasePolynomial::new(vec![autoweight_core::expsum::Coeff::Rational(0, 1), c])),
        None => Err(CliError::Domain(format!("bad phase `{s}`"))),
    }
}

fn exact_log(n: u64, k: u64) -> Option<u32> {
    let mut l = 0;
    let mut m = 1u64;
    while m < n {
        m = m.checked_mul(k)?;
        l += 1;
    }
    (m == n).then_some(l)
}

fn sum(input: &str, phase: &str, n: u64, method: MethodArg, r: &mut Report) -> Result<(), CliError> {
    let seq = load_sequence(input)?;
    let p = parse_phase(phase)?;
    let linear = p.degree() <= 1;
    let method = match method {
        MethodArg::Auto if p.denominator().is_some() => MethodArg::Rational,
        MethodArg::Auto if linear => MethodArg::Interval,
        MethodArg::Auto => MethodArg::Direct,
        m => m,
    };
    let alpha = || -> Result<_, CliError> {
        if !linear {
            return Err(CliError::Domain("method requires a linear phase".into()));
        }
        Ok(p.coeffs().get(1).map(|c| c.turn()).unwrap_or_default())
    };
    let shift = p.coeffs()[0].turn().e();
    let mut rep: ExpSumReport = match method {
        MethodArg::Direct => exp_sum_direct(&seq, &p, n),
        MethodArg::Rational => exp_sum_rational(&seq, &p, n)?,
        MethodArg::Interval => exp_sum_interval_turn(&seq, alpha()?, n),
        MethodArg::Transfer => {
            let l = exact_log(n, seq.base() as u64)
                .ok_or_else(|| CliError::Domain(format!("transfer method needs N a power of {}", seq.base())))?;
            exp_sum_transfer_turn(&seq, alpha()?, l)?
        }
        MethodArg::Auto => unreachable!(),
    };
    if matches!(method, MethodArg::Interval | MethodArg::Transfer) {
        rep.mean *= shift;
    }
    r.set("N", n)
        .set("phase", p.to_string())
        .set("re", num(rep.mean.re))
        .set("im", num(rep.mean.im))
        .set("abs", num(rep.abs()))
        .set("method", rep.method.to_string())
        .set("err", num(rep.err));
    Ok(())
}

fn sup(seq: &SequenceHandle, n: u64, err: f64, r: &mut Report) -> Result<(), CliError> {
    let s = sup_linear(seq, n, err)?;
    r.set("N", s.n)
        .set("alpha", num(s.alpha))
        .set("value", num(s.value))
        .set("err", num(s.err))
        .set("grid_max", num(s.grid_max))
        .set("grid_size", s.grid_size);
    Ok(())
}

fn sample(seq: &SequenceHandle, d: usize, n: u64, spec: &SampleSpec, all: bool, r: &mut Report) -> Result<(), CliError> {
    let s = poly_sup_sample(seq, d, n, spec)?;
    let best = &s.entries[s.argmax];
    r.set("N", n)
        .set("degree", d)
        .set("phases", s.entries.len())
        .set("max", num(s.max))
        .set("argmax", json!({"family": format!("{:?}", best.family).to_lowercase(), "phase": best.phase.to_string(), "method": best.report.method.to_string()}));
    if all {
        let rows: Vec<Json> = s
            .entries
            .iter()
            .map(|e| json!({"family": format!("{:?}", e.family).to_lowercase(), "phase": e.phase.to_string(), "abs": num(e.report.abs())}))
            .collect();
        r.set("entries", rows);
    }
    Ok(())
}

fn parse_weight(s: &str) -> Result<Weight, CliError> {
    let bad = || CliError::Domain(format!("bad weight `{s}`"));
    if s == "none" {
        return Ok(Weight::Periodic(vec![Value::one()]));
    }
    let (kind, body) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "periodic" => {
            let vals: Option<Vec<Value>> = body.split(',').map(|v| v.trim().parse::<Value>().ok()).collect();
            Ok(Weight::Periodic(vals.filter(|v| !v.is_empty()).ok_or_else(bad)?))
        }
        "phase" => {
            let (p, q) = body.split_once('/').ok_or_else(bad)?;
            Ok(Weight::RationalPhase(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
        }
        _ => Err(bad()),
    }
}

fn decay(input: &str, (lo, hi): (u32, u32), weight: &str, use_sup: bool, err: f64, r: &mut Report) -> Result<(), CliError> {
    let seq = load_sequence(input)?;
    if use_sup {
        let d = sup_decay(&seq, lo..=hi, err)?;
        let rows: Vec<Json> = d.points.iter().map(|&(l, v, e)| json!([l, num(v), num(e)])).collect();
        r.set("columns", "L sup err").set("points", rows).set("exponent", num(d.exponent)).set("residual", num(d.residual));
        return Ok(());
    }
    let w = parse_weight(weight)?;
    let fit = decay_exponent(&seq, &w, lo..=hi)?;
    let rows: Vec<Json> = fit.points.iter().map(|(l, n, v)| json!([l, n, num(v.abs())])).collect();
    r.set("columns", "L N abs_mean")
        .set("points", rows)
        .set("exponent", num(fit.exponent))
        .set("residual", num(fit.residual))
        .set("band", json!([num(fit.band.0), num(fit.band.1)]))
        .set("zeros", fit.zeros);
    Ok(())
}

fn emit(path: Option<&Path>, key: &str, a: &Automaton, r: &mut Report) -> Result<(), CliError> {
    let text = write_automaton(a);
    match path {
        Some(p) => {
            std::fs::write(p, &text).map_err(|e| CliError::Domain(format!("{}: {e}", p.display())))?;
            r.set(key, p.display().to_string());
        }
        None => {
            r.set(key, text);
        }
    }
    Ok(())
}

fn restrict(input: &str, q: u64, res: u64, out: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let seq = load_sequence(input)?;
    let h = restrict_ap(&seq, q, res)?;
    r.set("q", q).set("r", res).set("states", h.automaton().num_states());
    emit(out, "automaton", h.automaton(), r)
}

fn decompose(input: &str, kind: KindArg, out: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    let seq = load_sequence(input)?;
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Domain(format!("{}: {e}", dir.display())))?;
    }
    let path = |name: &str| out.map(|d| d.join(name));
    match kind {
        KindArg::Aperiodic => {
            let d = decompose_aperiodic(&seq)?;
            r.set("base", d.base).set("exponent", d.exponent).set("q", d.q);
            let certs: Vec<Json> = d.certificates.iter().map(|c| Json::Bool(c.iter().all(|x| x.holds))).collect();
            r.set("parts_aperiodic", certs);
            for (i, part) in d.parts.iter().enumerate() {
                let name = format!("part-{i}.aut");
                emit(path(&name).as_deref(), &format!("part_{i}"), part.automaton(), r)?;
            }
        }
        KindArg::Invertible => {
            let d = invertible_decomposition(&seq)?;
            let per: Vec<Json> = d.per.iter().map(value_json).collect();
            r.set("period", d.period).set("per", per).set("group_order", d.group_order);
            emit(path("bal.aut").as_deref(), "bal", d.bal.automaton(), r)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn ergodic(
    system: &str,
    observable: &str,
    weight: &str,
    phase: &str,
    samples: usize,
    schedule: &str,
    seed: u64,
    r: &mut Report,
) -> Result<(), CliError> {
    let schedule = parse_list(schedule).map_err(CliError::Domain)?;
    let sys = DynSystem::parse(system)?;
    let f = Observable::parse(observable)?;
    let seq = load_sequence(weight)?;
    let p = parse_phase(phase)?;
    let rep = convergence_report(&sys, &f, &seq, &p, samples, &schedule, seed)?;
    let rows: Vec<Json> = rep
        .trace
        .checkpoints
        .iter()
        .zip(rep.trace.sup.iter().zip(&rep.trace.l2))
        .map(|(n, (s, l))| json!([n, num(*s), num(*l)]))
        .collect();
    r.set("system", rep.system)
        .set("totally_ergodic", rep.totally_ergodic)
        .set("mean_zero", f.is_mean_zero())
        .set("kronecker_starts", rep.kronecker_starts)
        .set("uniform_starts", rep.uniform_starts)
        .set("columns", "N sup l2")
        .set("trace", rows)
        .set("consistent_with_zero", rep.consistent_with_zero);
    Ok(())
}

fn counterexample_cmd(n_max: u64, r: &mut Report) -> Result<(), CliError> {
    let c = counterexample_demo(n_max)?;
    let means: Vec<Json> = c.means.iter().map(|(l, m)| json!([l, m.to_string()])).collect();
    let cob: Vec<Json> = c.coboundary.iter().map(|&(n, m, b)| json!([n, num(m), num(b)])).collect();
    r.set("columns", "L mean")
        .set("means", means)
        .set("closed_form_holds", c.closed_form_holds)
        .set("halving_holds", c.halving_holds)
        .set("gap", num(c.gap))
        .set("coboundary_columns", "N max_avg bound")
        .set("coboundary", cob)
        .set("coboundary_holds", c.coboundary_holds);
    Ok(())
}

fn builtin(name: Option<&str>, list: bool, out: Option<&Path>, r: &mut Report) -> Result<(), CliError> {
    if list {
        r.set("builtins", builtins::NAMES.to_vec());
        return Ok(());
    }
    let name = name.ok_or_else(|| CliError::Domain("builtin name required (or --list)".into()))?;
    let seq = builtins::by_name(name).ok_or_else(|| CliError::Domain(format!("unknown builtin `{name}`")))?;
    r.set("name", name).set("base", seq.base()).set("states", seq.automaton().num_states());
    emit(out, "automaton", seq.automaton(), r)
}

fn check(seed: u64, r: &mut Report) -> Result<(), CliError> {
    let checks = run_suite(seed);
    let passed = checks.iter().filter(|c| c.passed).count();
    let rows: Vec<Json> = checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail})).collect();
    r.set("checks", rows).set("passed", passed).set("total", checks.len());
    if passed == checks.len() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed)
    }
}

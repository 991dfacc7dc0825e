use std::path::Path;

use autoweight_core::automaton::parse_automaton;
use autoweight_core::{builtins, Automaton, SequenceHandle};

use crate::CliError;

fn atom(s: &str) -> Option<u64> {
    if let Some((b, e)) = s.split_once('^') {
        return b.parse::<u64>().ok()?.checked_pow(e.parse().ok()?);
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let m: u64 = m.parse().ok()?;
        return m.checked_mul(10u64.checked_pow(e.parse().ok()?)?);
    }
    s.parse().ok()
}

/// Integers such as `4096`, `2^12`, `1e6` or `3*2^10+5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let mut total = 0u64;
    for term in s.split('+') {
        let mut prod = 1u64;
        for f in term.split('*') {
            let v = atom(f).ok_or_else(|| format!("bad integer `{f}`"))?;
            prod = prod.checked_mul(v).ok_or("integer overflow")?;
        }
        total = total.checked_add(prod).ok_or("integer overflow")?;
    }
    Ok(total)
}

/// `a..b` (inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").unwrap_or((s, s));
    let a: u32 = a.trim().parse().map_err(|_| format!("bad range `{s}`"))?;
    let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad range `{s}`"))?;
    if a > b {
        return Err(format!("empty range `{s}`"));
    }
    Ok((a, b))
}

pub fn parse_list(s: &str) -> Result<Vec<u64>, String> {
    s.split(',').map(parse_count).collect()
}

/// An automaton file, or a builtin name when no such file exists.
pub fn load_automaton(input: &str) -> Result<(Automaton, String), CliError> {
    let path = Path::new(input);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{input}: {e}")))?;
        let a = parse_automaton(&text).map_err(|e| CliError::Domain(format!("{input}: {e}")))?;
        let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| input.to_string());
        return Ok((a, label));
    }
    if let Some(seq) = builtins::by_name(input) {
        return Ok((seq.automaton().clone(), input.to_string()));
    }
    Err(CliError::Domain(format!("{input}: no such file or builtin")))
}

pub fn load_sequence(input: &str) -> Result<SequenceHandle, CliError> {
    let (a, label) = load_automaton(input)?;
    if let Some(seq) = builtins::by_name(&label).filter(|_| !Path::new(input).exists()) {
        return Ok(seq);
    }
    SequenceHandle::new(a, label).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("2^12"), Ok(4096));
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("3*2^10+5"), Ok(3077));
        assert_eq!(parse_count("17"), Ok(17));
        assert!(parse_count("2^70").is_err());
        assert!(parse_count("x").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("8..22"), Ok((8, 22)));
        assert_eq!(parse_range("8..=22"), Ok((8, 22)));
        assert_eq!(parse_range("5"), Ok((5, 5)));
        assert!(parse_range("9..3").is_err());
        assert_eq!(parse_list("1e3,2^10"), Ok(vec![1000, 1024]));
    }
}

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::construct::block_table;
use super::{scc_analysis, Automaton};
use crate::error::{Error, Result};
use crate::exact::{cesaro_limit, Q};

/// Limiting state frequencies conditioned on the input residue mod `q`.
#[derive(Clone, Debug)]
pub struct Frequencies {
    pub q: u64,
    /// Block length `l = ord_q(k)`.
    pub block: u32,
    /// `table[r][s] = π(s; r mod q)`.
    pub table: Vec<Vec<Q>>,
}

impl Frequencies {
    pub fn get(&self, s: usize, r: u64) -> &Q {
        &self.table[(r % self.q) as usize][s]
    }

    pub fn get_f64(&self, s: usize, r: u64) -> f64 {
        self.get(s, r).to_f64().unwrap_or(f64::NAN)
    }

    /// `max_{s,r} |π(s; r) − π(s; 0)|`.
    pub fn residue_spread(&self) -> f64 {
        let mut worst = 0.0f64;
        for row in &self.table {
            for (s, p) in row.iter().enumerate() {
                let d = (p - &self.table[0][s]).to_f64().unwrap_or(f64::NAN).abs();
                worst = worst.max(d);
            }
        }
        worst
    }
}

/// Smallest `l ≥ 1` with `k^l ≡ 1 (mod q)`.
pub fn multiplicative_order(k: u64, q: u64) -> Option<u32> {
    if q == 1 {
        return Some(1);
    }
    if k.gcd(&q) != 1 {
        return None;
    }
    let mut x = k % q;
    for l in 1..=q as u32 {
        if x == 1 {
            return Some(l);
        }
        x = x * k % q;
    }
    None
}

/// Cesàro-limiting law of `(δ(s₀, u), [u]_k mod q)` for uniformly random
/// words built from blocks of length `ord_q(k)`, normalized per residue.
pub fn frequencies(a: &Automaton, q: u64) -> Result<Frequencies> {
    let k = a.base() as u64;
    if q == 0 {
        return Err(Error::InvalidArgument("q must be positive".into()));
    }
    if q.gcd(&k) != 1 {
        return Err(Error::NotCoprime { q, k: a.base() });
    }
    if !scc_analysis(a).is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let l = multiplicative_order(k, q).unwrap();
    let n = a.num_states();
    let qs = q as usize;
    let words = k.pow(l);
    let w = Q::new(1.into(), words.into());
    let mut p = vec![vec![Q::zero(); n * qs]; n * qs];
    for s in 0..n {
        let table = block_table(a, s, l);
        for (v, &t) in table.iter().enumerate() {
            let dv = v as u64 % q;
            for r in 0..q {
                let from = s * qs + r as usize;
                let to = t * qs + ((r + dv) % q) as usize;
                p[from][to] += &w;
            }
        }
    }
    let s0 = a.initial().unwrap_or(0);
    let joint = cesaro_limit(&p, s0 * qs);
    let mut table = vec![vec![Q::zero(); n]; qs];
    for r in 0..qs {
        let mass = (0..n).fold(Q::zero(), |acc, s| acc + &joint[s * qs + r]);
        for s in 0..n {
            table[r][s] = &joint[s * qs + r] / &mass;
        }
    }
    Ok(Frequencies { q, block: l, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;
    use num_traits::One;

    fn half() -> Q {
        Q::new(1.into(), 2.into())
    }

    #[test]
    fn thue_morse_frequencies() {
        let a = builtins::thue_morse().automaton().clone();
        let f = frequencies(&a, 1).unwrap();
        assert_eq!(f.table, vec![vec![half(), half()]]);
        let f = frequencies(&a, 3).unwrap();
        assert_eq!(f.block, 2);
        for r in 0..3 {
            assert_eq!(f.table[r as usize], vec![half(), half()]);
        }
    }

    /// Largest deviation of the empirical state share from 1/2 over
    /// residues mod 3, for words of length `len`.
    fn empirical_deviation(len: u32) -> f64 {
        let tm = builtins::thue_morse();
        let mut counts = [[0u64; 2]; 3];
        for n in 0..1u64 << len {
            counts[(n % 3) as usize][tm.state_of(n)] += 1;
        }
        counts
            .iter()
            .map(|row| (row[0] as f64 / (row[0] + row[1]) as f64 - 0.5).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn thue_morse_empirical_counts_approach_half() {
        // the residue bias decays like (3/4)^(len/2)
        let (d16, d20) = (empirical_deviation(16), empirical_deviation(20));
        assert!(d20 < 0.06, "{d20}");
        assert!(d20 < 0.6 * d16, "{d16} {d20}");
    }

    #[test]
    fn single_state_is_uniform() {
        let a = Automaton::new(3, vec![vec![0, 0, 0]], Some(0), None).unwrap();
        for q in [1, 2, 4, 5] {
            let f = frequencies(&a, q).unwrap();
            assert!(f.table.iter().all(|row| row == &vec![Q::one()]));
        }
    }

    #[test]
    fn rejects_non_coprime_modulus() {
        let a = builtins::thue_morse().automaton().clone();
        assert_eq!(frequencies(&a, 6).unwrap_err(), Error::NotCoprime { q: 6, k: 2 });
    }

    #[test]
    fn mod3_tracker_depends_on_residue() {
        let a = builtins::mod3_tracker().automaton().clone();
        let f = frequencies(&a, 3).unwrap();
        for row in &f.table {
            assert_eq!(row.iter().fold(Q::zero(), |acc, x| acc + x), Q::one());
        }
        assert!(f.residue_spread() > 0.1);
    }

    #[test]
    fn orders() {
        assert_eq!(multiplicative_order(2, 3), Some(2));
        assert_eq!(multiplicative_order(2, 7), Some(3));
        assert_eq!(multiplicative_order(3, 2), Some(1));
        assert_eq!(multiplicative_order(2, 4), None);
    }
}

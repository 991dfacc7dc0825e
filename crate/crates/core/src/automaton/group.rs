use std::collections::HashMap;

use super::{minimize, Automaton};
use crate::error::Result;
use crate::value::Value;

/// Permutation group generated by the digit actions of an invertible
/// automaton, with `a(n) = π(g(n))`.
#[derive(Clone, Debug)]
pub struct GroupPresentation {
    pub base: u32,
    /// Minimal automaton the permutations act on.
    pub automaton: Automaton,
    /// `generators[j]` is the permutation `s ↦ δ(s, j)`.
    pub generators: Vec<Vec<usize>>,
    /// Group elements as permutations; index 0 is the identity.
    pub elements: Vec<Vec<usize>>,
    /// `generator_index[j]` locates `generators[j]` in `elements`.
    pub generator_index: Vec<usize>,
    /// `projection[i] = τ(elements[i](s₀))`.
    pub projection: Vec<Value>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl GroupPresentation {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index of the composition `x ∘ y` (apply `y` first).
    pub fn compose(&self, x: usize, y: usize) -> usize {
        let (px, py) = (&self.elements[x], &self.elements[y]);
        let p: Vec<usize> = py.iter().map(|&s| px[s]).collect();
        self.lookup[&p]
    }

    pub fn zero_is_identity(&self) -> bool {
        self.generator_index[0] == 0
    }

    /// `g(n)` as an element index; `g(uv) = g(u)∘g(v)` with `v` read first.
    pub fn element_of(&self, mut n: u64) -> usize {
        let k = self.base as u64;
        let mut g = 0;
        while n > 0 {
            g = self.compose(self.generator_index[(n % k) as usize], g);
            n /= k;
        }
        g
    }

    pub fn project(&self, n: u64) -> Value {
        self.projection[self.element_of(n)].clone()
    }
}

/// The group representation when every digit acts bijectively on the
/// states of the minimal automaton; `None` otherwise.
pub fn invertibility(a: &Automaton) -> Result<Option<GroupPresentation>> {
    let m = minimize(a)?;
    let n = m.num_states();
    let k = m.base();
    let generators: Vec<Vec<usize>> = (0..k).map(|j| (0..n).map(|s| m.next(s, j)).collect()).collect();
    for g in &generators {
        let mut seen = vec![false; n];
        for &t in g {
            if std::mem::replace(&mut seen[t], true) {
                return Ok(None);
            }
        }
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut lookup = HashMap::from([(identity.clone(), 0)]);
    let mut elements = vec![identity];
    let mut i = 0;
    while i < elements.len() {
        for g in &generators {
            let p: Vec<usize> = elements[i].iter().map(|&s| g[s]).collect();
            if !lookup.contains_key(&p) {
                lookup.insert(p.clone(), elements.len());
                elements.push(p);
            }
        }
        i += 1;
    }
    let generator_index = generators.iter().map(|g| lookup[g]).collect();
    let out = m.output().unwrap();
    let s0 = m.initial().unwrap();
    let projection = elements.iter().map(|p| out[p[s0]].clone()).collect();
    Ok(Some(GroupPresentation {
        base: k,
        automaton: m,
        generators,
        elements,
        generator_index,
        projection,
        lookup,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::product;
    use crate::builtins;

    #[test]
    fn thue_morse_group_is_z2() {
        let g = invertibility(builtins::thue_morse().automaton()).unwrap().unwrap();
        assert_eq!(g.order(), 2);
        assert!(g.zero_is_identity());
        assert_eq!(g.projection, vec![Value::int(1), Value::int(-1)]);
        let tm = builtins::thue_morse();
        for n in 0..2000 {
            assert_eq!(g.project(n), tm.eval(n));
        }
    }

    #[test]
    fn nu2_parity_is_not_invertible() {
        assert!(invertibility(builtins::nu2_parity().automaton()).unwrap().is_none());
    }

    #[test]
    fn constant_gives_trivial_group() {
        let g = invertibility(builtins::constant().automaton()).unwrap().unwrap();
        assert_eq!(g.order(), 1);
    }

    #[test]
    fn gtm3_group_is_z3() {
        let seq = builtins::gtm3();
        let g = invertibility(seq.automaton()).unwrap().unwrap();
        assert_eq!(g.order(), 3);
        for n in 0..3000 {
            assert_eq!(g.project(n), seq.eval(n));
        }
    }

    #[test]
    fn product_of_invertible_is_invertible() {
        let tm = builtins::thue_morse();
        let g3 = builtins::gtm3();
        assert!(invertibility(builtins::rudin_shapiro().automaton()).unwrap().is_none());
        assert!(invertibility(builtins::alternating().automaton()).unwrap().is_none());
        let p = product(tm.automaton(), tm.automaton(), Value::mul).unwrap();
        assert!(invertibility(&p).unwrap().is_some());
        let p = product(g3.automaton(), g3.automaton(), Value::mul).unwrap();
        assert!(invertibility(&p).unwrap().is_some());
    }
}

use std::collections::HashMap;

use super::Automaton;
use crate::error::Result;

/// Minimal automaton for the same word function, by partition refinement
/// starting from the output classes.
pub fn minimize(a: &Automaton) -> Result<Automaton> {
    a.require_complete()?;
    let a = a.pruned();
    let out = a.output().unwrap();
    let n = a.num_states();
    let k = a.base();

    let mut ids = HashMap::new();
    let mut class: Vec<usize> = out
        .iter()
        .map(|v| {
            let next = ids.len();
            *ids.entry(v).or_insert(next)
        })
        .collect();
    let mut count = ids.len();
    loop {
        let mut sigs: HashMap<Vec<usize>, usize> = HashMap::new();
        let refined: Vec<usize> = (0..n)
            .map(|s| {
                let mut sig = Vec::with_capacity(k as usize + 1);
                sig.push(class[s]);
                sig.extend((0..k).map(|j| class[a.next(s, j)]));
                let next = sigs.len();
                *sigs.entry(sig).or_insert(next)
            })
            .collect();
        let new_count = sigs.len();
        class = refined;
        if new_count == count {
            break;
        }
        count = new_count;
    }

    let mut rep = vec![usize::MAX; count];
    for s in 0..n {
        if rep[class[s]] == usize::MAX {
            rep[class[s]] = s;
        }
    }
    let mut delta = Vec::with_capacity(count * k as usize);
    for &r in &rep {
        delta.extend((0..k).map(|j| class[a.next(r, j)]));
    }
    let names = rep.iter().map(|&r| a.names()[r].clone()).collect();
    let output = rep.iter().map(|&r| out[r].clone()).collect();
    let q = Automaton::from_parts(k, names, delta, Some(class[0]), Some(output), a.is_normalized());
    Ok(q.pruned())
}

/// Structural equality after breadth-first renumbering from the initial
/// state; state names are ignored.
pub fn isomorphic(a: &Automaton, b: &Automaton) -> bool {
    let (a, b) = (a.pruned(), b.pruned());
    a.base() == b.base()
        && a.num_states() == b.num_states()
        && a.initial().is_some() == b.initial().is_some()
        && (0..a.num_states()).all(|s| a.row(s) == b.row(s))
        && a.output() == b.output()
}

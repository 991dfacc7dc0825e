use super::Automaton;
use crate::exact::components;

/// Strongly connected components of the transition graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SccReport {
    /// Components in reverse topological order (sinks first).
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub terminal: Vec<bool>,
    /// Deduplicated edges between distinct components.
    pub edges: Vec<(usize, usize)>,
}

impl SccReport {
    pub fn is_strongly_connected(&self) -> bool {
        self.components.len() == 1
    }

    pub fn terminal_components(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.components
            .iter()
            .zip(&self.terminal)
            .filter(|(_, &t)| t)
            .map(|(c, _)| c)
    }
}

pub fn scc_analysis(a: &Automaton) -> SccReport {
    let n = a.num_states();
    let adj: Vec<Vec<usize>> = (0..n).map(|s| a.row(s).to_vec()).collect();
    let comps = components(&adj);
    let mut component_of = vec![0; n];
    for (i, c) in comps.iter().enumerate() {
        for &s in c {
            component_of[s] = i;
        }
    }
    let mut edges = Vec::new();
    for s in 0..n {
        for &t in a.row(s) {
            let (cs, ct) = (component_of[s], component_of[t]);
            if cs != ct {
                edges.push((cs, ct));
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut terminal = vec![true; comps.len()];
    for &(c, _) in &edges {
        terminal[c] = false;
    }
    SccReport { components: comps, component_of, terminal, edges }
}

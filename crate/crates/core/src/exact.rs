//! Exact rational linear algebra, polynomials over ℚ and limiting
//! distributions of finite Markov chains.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Solves `m x = rhs` by Gaussian elimination; `None` if singular.
pub fn solve(mut m: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        rhs.swap(col, piv);
        let inv = m[col][col].recip();
        for c in col..n {
            m[col][c] = &m[col][c] * &inv;
        }
        rhs[col] = &rhs[col] * &inv;
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for c in col..n {
                let t = &f * &m[col][c];
                m[r][c] -= t;
            }
            let t = &f * &rhs[col];
            rhs[r] -= t;
        }
    }
    Some(rhs)
}

/// Tarjan components of an adjacency list, sinks first.
pub(crate) fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut calls: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(top) = calls.last_mut() {
            let v = top.0;
            if top.1 < adj[v].len() {
                let w = adj[v][top.1];
                top.1 += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some(&(parent, _)) = calls.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

/// Cesàro limit `lim (1/T) Σ_{t<T} e_start P^t` of a row-stochastic matrix.
pub fn cesaro_limit(p: &[Vec<Q>], start: usize) -> Vec<Q> {
    let n = p.len();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| !p[i][j].is_zero()).collect())
        .collect();
    let comps = components(&adj);
    let mut comp_of = vec![0; n];
    for (c, states) in comps.iter().enumerate() {
        for &s in states {
            comp_of[s] = c;
        }
    }
    let closed: Vec<bool> = comps
        .iter()
        .map(|c| c.iter().all(|&s| adj[s].iter().all(|&t| comp_of[t] == comp_of[s])))
        .collect();
    let transient: Vec<usize> = (0..n).filter(|&s| !closed[comp_of[s]]).collect();
    let mut t_index = vec![usize::MAX; n];
    for (i, &s) in transient.iter().enumerate() {
        t_index[s] = i;
    }

    let mut result = vec![Q::zero(); n];
    for (c, states) in comps.iter().enumerate() {
        if !closed[c] {
            continue;
        }
        let weight = if closed[comp_of[start]] {
            if comp_of[start] == c {
                Q::one()
            } else {
                continue;
            }
        } else {
            // absorption probability into this class from `start`
            let m: Vec<Vec<Q>> = transient
                .iter()
                .map(|&x| {
                    transient
                        .iter()
                        .map(|&y| {
                            let id = if x == y { Q::one() } else { Q::zero() };
                            id - &p[x][y]
                        })
                        .collect()
                })
                .collect();
            let b: Vec<Q> = transient
                .iter()
                .map(|&x| states.iter().fold(Q::zero(), |acc, &y| acc + &p[x][y]))
                .collect();
            let h = solve(m, b).expect("transient block is invertible");
            h[t_index[start]].clone()
        };
        if weight.is_zero() {
            continue;
        }
        let pi = stationary(p, states);
        for (i, &s) in states.iter().enumerate() {
            result[s] = &weight * &pi[i];
        }
    }
    result
}

/// Stationary distribution of the chain restricted to a closed class.
fn stationary(p: &[Vec<Q>], states: &[usize]) -> Vec<Q> {
    let m = states.len();
    // rows: Σ_x π_x (P[x][y] − δ_xy) = 0 for y, last row replaced by Σ π = 1
    let mut a = vec![vec![Q::zero(); m]; m];
    for (yi, &y) in states.iter().enumerate() {
        for (xi, &x) in states.iter().enumerate() {
            let id = if x == y { Q::one() } else { Q::zero() };
            a[yi][xi] = &p[x][y] - id;
        }
    }
    let mut rhs = vec![Q::zero(); m];
    a[m - 1] = vec![Q::one(); m];
    rhs[m - 1] = Q::one();
    solve(a, rhs).expect("irreducible class has a unique stationary law")
}

/// Polynomials over ℚ, coefficients in increasing degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn from_ints(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| q_int(x)).collect())
    }

    pub fn one() -> Poly {
        Poly(vec![Q::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly(Vec::new());
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.0.clone();
        let dl = d.0.len();
        if r.len() < dl {
            return (Poly(Vec::new()), self.clone());
        }
        let lead = d.0[dl - 1].recip();
        let mut quot = vec![Q::zero(); r.len() - dl + 1];
        for i in (0..quot.len()).rev() {
            let f = &r[i + dl - 1] * &lead;
            if f.is_zero() {
                continue;
            }
            for j in 0..dl {
                let t = &f * &d.0[j];
                r[i + j] -= t;
            }
            quot[i] = f;
        }
        (Poly::new(quot), Poly::new(r))
    }
}

/// Euler's totient.
pub fn totient(mut n: usize) -> usize {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn mobius(mut n: usize) -> i32 {
    let mut m = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            m = -m;
        }
        p += 1;
    }
    if n > 1 {
        m = -m;
    }
    m
}

/// `Φ_j = Π_{d | j} (x^d − 1)^{μ(j/d)}`, memoized.
pub fn cyclotomic(j: usize) -> Poly {
    static CACHE: OnceLock<Mutex<HashMap<usize, Poly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().unwrap().get(&j) {
        return p.clone();
    }
    assert!(j >= 1, "cyclotomic index must be positive");
    let binomial = |d: usize| {
        let mut c = vec![0i64; d + 1];
        c[0] = -1;
        c[d] = 1;
        Poly::from_ints(&c)
    };
    let divisors: Vec<usize> = (1..=j).filter(|d| j % d == 0).collect();
    let mut num = Poly::one();
    for &d in &divisors {
        if mobius(j / d) == 1 {
            num = num.mul(&binomial(d));
        }
    }
    for &d in &divisors {
        if mobius(j / d) == -1 {
            num = num.div_rem(&binomial(d)).0;
        }
    }
    cache.lock().unwrap().insert(j, num.clone());
    num
}

/// Characteristic polynomial `det(xI − M)` of an integer matrix
/// (Faddeev–LeVerrier, exact).
pub fn charpoly(m: &[Vec<i64>]) -> Poly {
    let n = m.len();
    let mi: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut c = vec![BigInt::zero(); n + 1];
    c[n] = BigInt::one();
    let mut mk = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        // mk ← M·mk + c_{n−k+1} I
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigInt::zero();
                for t in 0..n {
                    if !mi[i][t].is_zero() && !mk[t][j].is_zero() {
                        acc += &mi[i][t] * &mk[t][j];
                    }
                }
                if i == j {
                    acc += &c[n - k + 1];
                }
                next[i][j] = acc;
            }
        }
        mk = next;
        let mut tr = BigInt::zero();
        for i in 0..n {
            for t in 0..n {
                tr += &mi[i][t] * &mk[t][i];
            }
        }
        let kk = BigInt::from(k as i64);
        debug_assert!((&tr % &kk).is_zero());
        c[n - k] = -(tr / kk);
    }
    Poly::new(c.into_iter().map(Q::from_integer).collect())
}

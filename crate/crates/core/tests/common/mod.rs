//! Independent reference implementations used to cross-check the library.
#![allow(dead_code)]

pub mod trials;
pub mod weights;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tameds::multgroup::evaluate_char;
use tameds::spectral::ClassSpec;
use tameds::{MultElement, StarGraph};

pub fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

pub fn sym(s: &str) -> MultElement {
    MultElement::symbol(s)
}

/// Gram matrix of the star graph computed from its edge list.
pub fn gram(g: &StarGraph) -> Vec<Vec<i64>> {
    let n = g.num_vertices();
    let mut c = vec![vec![0; n]; n];
    for (v, row) in c.iter_mut().enumerate() {
        row[v] = 2;
    }
    for (a, b) in g.edges() {
        c[a][b] -= 1;
        c[b][a] -= 1;
    }
    c
}

pub fn form(c: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    let mut s = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            s += a[i] * c[i][j] * b[j];
        }
    }
    s
}

pub fn p_of(c: &[Vec<i64>], d: &[i64]) -> i64 {
    1 - form(c, d, d) / 2
}

pub fn reflect_ref(c: &[Vec<i64>], v: usize, d: &[i64]) -> Vec<i64> {
    let mut out = d.to_vec();
    let k: i64 = (0..d.len()).map(|w| c[v][w] * d[w]).sum();
    out[v] -= k;
    out
}

fn connected(c: &[Vec<i64>], d: &[i64]) -> bool {
    let support: Vec<usize> = (0..d.len()).filter(|&v| d[v] != 0).collect();
    let Some(&start) = support.first() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &support {
            if c[v][w] < 0 && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == support.len()
}

/// Every vector `0 ≤ x ≤ bound`, excluding zero.
pub fn box_points(bound: &[i64]) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; bound.len()];
    loop {
        let mut i = 0;
        while i < cur.len() {
            if cur[i] < bound[i] {
                cur[i] += 1;
                break;
            }
            cur[i] = 0;
            i += 1;
        }
        if i == cur.len() {
            return out;
        }
        out.push(cur.clone());
    }
}

/// Vectors of height at most `height`, excluding zero.
pub fn height_points(n: usize, height: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            if cur.iter().any(|&x| x > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for x in 0..=left {
            cur.push(x);
            rec(n, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, height, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefKind {
    Real,
    Isotropic,
    Anisotropic,
}

/// Positive roots of height at most `height`, found by growing Weyl orbits of
/// the simple roots and of the fundamental set with words of length at most
/// `max_word`.
pub fn weyl_orbit_roots(g: &StarGraph, height: i64, max_word: usize) -> BTreeMap<Vec<i64>, RefKind> {
    let c = gram(g);
    let n = g.num_vertices();
    let mut seeds: Vec<(Vec<i64>, RefKind)> = Vec::new();
    for v in 0..n {
        let mut e = vec![0; n];
        e[v] = 1;
        seeds.push((e, RefKind::Real));
    }
    for d in height_points(n, height) {
        if !connected(&c, &d) {
            continue;
        }
        if (0..n).all(|v| form(&c, &d, &unit(n, v)) <= 0) {
            let kind = if p_of(&c, &d) == 1 {
                RefKind::Isotropic
            } else {
                RefKind::Anisotropic
            };
            seeds.push((d, kind));
        }
    }
    let mut found: BTreeMap<Vec<i64>, RefKind> = BTreeMap::new();
    let mut frontier = Vec::new();
    for (d, k) in seeds {
        if found.insert(d.clone(), k).is_none() {
            frontier.push(d);
        }
    }
    for _ in 0..max_word {
        let mut next = Vec::new();
        for d in &frontier {
            let kind = found[d];
            for v in 0..n {
                let r = reflect_ref(&c, v, d);
                if r.iter().any(|&x| x < 0) || r.iter().sum::<i64>() > height {
                    continue;
                }
                if !found.contains_key(&r) {
                    found.insert(r.clone(), kind);
                    next.push(r);
                }
            }
        }
        frontier = next;
    }
    found
}

pub fn unit(n: usize, v: usize) -> Vec<i64> {
    let mut e = vec![0; n];
    e[v] = 1;
    e
}

pub fn theta_dot_ref(theta: &[BigRational], d: &[i64]) -> BigRational {
    theta
        .iter()
        .zip(d)
        .map(|(t, &x)| t * BigInt::from(x))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `R^+_{q,θ}` below `d` with `p`-values, using the orbit root list.
pub fn admissible_ref(
    roots: &BTreeMap<Vec<i64>, RefKind>,
    c: &[Vec<i64>],
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> Vec<(Vec<i64>, i64)> {
    box_points(d)
        .into_iter()
        .filter(|g| roots.contains_key(g))
        .filter(|g| evaluate_char(q, g).unwrap().is_one() && theta_dot_ref(theta, g).is_zero())
        .map(|g| {
            let p = p_of(c, &g);
            (g, p)
        })
        .collect()
}

/// Largest `Σ p` over decompositions into at least two parts, by plain
/// recursion over nondecreasing part indices.
pub fn naive_best_split(parts: &[(Vec<i64>, i64)], d: &[i64]) -> Option<i64> {
    fn rec(parts: &[(Vec<i64>, i64)], rest: &[i64], from: usize, used: usize) -> Option<i64> {
        if rest.iter().all(|&x| x == 0) {
            return if used >= 2 { Some(0) } else { None };
        }
        let mut best: Option<i64> = None;
        for i in from..parts.len() {
            let (g, p) = &parts[i];
            if g.iter().zip(rest).all(|(a, b)| a <= b) {
                let r: Vec<i64> = rest.iter().zip(g).map(|(a, b)| a - b).collect();
                if let Some(v) = rec(parts, &r, i, used + 1) {
                    best = Some(best.map_or(p + v, |b| b.max(p + v)));
                }
            }
        }
        best
    }
    rec(parts, d, 0, 0)
}

/// Membership in `Σ_{q,θ}` from the definition.
pub fn naive_sigma(
    roots: &BTreeMap<Vec<i64>, RefKind>,
    c: &[Vec<i64>],
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> bool {
    if !roots.contains_key(d) || !evaluate_char(q, d).unwrap().is_one() || !theta_dot_ref(theta, d).is_zero() {
        return false;
    }
    let parts = admissible_ref(roots, c, d, q, theta);
    let p = p_of(c, d);
    naive_best_split(&parts, d).map_or(true, |b| b < p)
}

/// Every multiset of `parts` summing to `d`, as index lists.
pub fn all_decompositions(parts: &[Vec<i64>], d: &[i64]) -> Vec<Vec<usize>> {
    fn rec(parts: &[Vec<i64>], rest: &[i64], from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.iter().all(|&x| x == 0) {
            out.push(cur.clone());
            return;
        }
        for i in from..parts.len() {
            if parts[i].iter().zip(rest).all(|(a, b)| a <= b) {
                let r: Vec<i64> = rest.iter().zip(&parts[i]).map(|(a, b)| a - b).collect();
                cur.push(i);
                rec(parts, &r, i, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(parts, d, 0, &mut Vec::new(), &mut out);
    out
}

/// Whether `fine` can be grouped so that the groups sum to the parts of `coarse`.
pub fn refines(fine: &[Vec<i64>], coarse: &[Vec<i64>]) -> bool {
    fn rec(fine: &[Vec<i64>], i: usize, rests: &mut Vec<Vec<i64>>) -> bool {
        if i == fine.len() {
            return rests.iter().all(|r| r.iter().all(|&x| x == 0));
        }
        for k in 0..rests.len() {
            if fine[i].iter().zip(&rests[k]).all(|(a, b)| a <= b) {
                if k > 0 && rests[k] == rests[k - 1] {
                    continue;
                }
                for (x, y) in rests[k].iter_mut().zip(&fine[i]) {
                    *x -= y;
                }
                if rec(fine, i + 1, rests) {
                    return true;
                }
                for (x, y) in rests[k].iter_mut().zip(&fine[i]) {
                    *x += y;
                }
            }
        }
        false
    }
    let mut fine = fine.to_vec();
    fine.sort_by(|a, b| b.iter().sum::<i64>().cmp(&a.iter().sum::<i64>()));
    let mut rests = coarse.to_vec();
    rests.sort();
    rec(&fine, 0, &mut rests)
}

pub fn random_graph(rng: &mut ChaCha8Rng, max_legs: usize, max_len: usize) -> StarGraph {
    let k = rng.gen_range(1..=max_legs);
    let legs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..=max_len)).collect();
    StarGraph::new(&legs)
}

/// Parameters built from roots of unity of order dividing `n`, tuned at the
/// centre so that `q^d = 1`; small orders leave many relations.
pub fn torsion_params(rng: &mut ChaCha8Rng, d: &[i64], orders: &[u64]) -> Vec<MultElement> {
    let n = orders[rng.gen_range(0..orders.len())];
    let mut q: Vec<MultElement> = (0..d.len())
        .map(|_| MultElement::zeta(n, rng.gen_range(0..n as i64)))
        .collect();
    let rest = (1..d.len()).fold(MultElement::one(), |acc, v| acc.mul(&q[v].pow(d[v])));
    q[0] = if d[0] == 0 {
        MultElement::one()
    } else {
        let (m, a) = rest.torsion();
        MultElement::zeta(m * d[0] as u64, -(a as i64))
    };
    if d[0] == 0 {
        // no centre to adjust: force the relation on the first supported vertex instead
        if let Some(v) = (1..d.len()).find(|&v| d[v] != 0) {
            let others = (1..d.len())
                .filter(|&w| w != v)
                .fold(MultElement::one(), |acc, w| acc.mul(&q[w].pow(d[w])));
            let (m, a) = others.torsion();
            q[v] = MultElement::zeta(m * d[v] as u64, -(a as i64));
        }
    }
    q
}

/// Weights in `{−1, 0, 1}` (mostly zero), tuned at the centre so that `θ·d = 0`.
pub fn sparse_theta(rng: &mut ChaCha8Rng, d: &[i64]) -> Vec<BigRational> {
    let mut t: Vec<BigRational> = (0..d.len())
        .map(|_| match rng.gen_range(0..6) {
            0 => rat(1, 1),
            1 => rat(-1, 1),
            _ => rat(0, 1),
        })
        .collect();
    match (0..d.len()).find(|&v| d[v] != 0) {
        Some(v) => {
            let others = (0..d.len())
                .filter(|&w| w != v)
                .fold(BigRational::zero(), |acc, w| acc + &t[w] * BigInt::from(d[w]));
            t[v] = -others / BigInt::from(d[v]);
        }
        None => {}
    }
    t
}

/// Random semisimple classes in `GL_n` with independent symbols, except one
/// eigenvalue fixed by the determinant relation. Returns `None` when the
/// relation cannot be written with integer exponents.
pub fn generic_classes(rng: &mut ChaCha8Rng, n: i64, k: usize, tag: usize) -> Option<Vec<ClassSpec>> {
    let mut pairs: Vec<Vec<(MultElement, i64)>> = Vec::new();
    for j in 0..k {
        let mut left = n;
        let mut leg = Vec::new();
        let mut i = 0;
        while left > 0 {
            let m = rng.gen_range(1..=left);
            leg.push((sym(&format!("x{tag}_{j}_{i}")), m));
            left -= m;
            i += 1;
        }
        pairs.push(leg);
    }
    let last = pairs.last().unwrap().len() - 1;
    let mu = pairs.last().unwrap()[last].1;
    let mut fixed = MultElement::one();
    for (j, leg) in pairs.iter().enumerate() {
        for (i, (x, m)) in leg.iter().enumerate() {
            if j == k - 1 && i == last {
                continue;
            }
            if m % mu != 0 {
                return None;
            }
            fixed = fixed.mul(&x.pow(-m / mu));
        }
    }
    pairs.last_mut().unwrap()[last].0 = fixed;
    pairs.into_iter().map(|p| ClassSpec::semisimple(p).ok()).collect()
}

/// A random strict vector with `q^d = 1` and `θ·d = 0` arranged at the centre.
pub fn random_instance(rng: &mut ChaCha8Rng, max_height: i64) -> (StarGraph, Vec<i64>, Vec<MultElement>, Vec<BigRational>) {
    loop {
        let g = random_graph(rng, 4, 3);
        let n = g.num_vertices();
        let mut d = vec![0; n];
        d[0] = rng.gen_range(1..=4);
        for (j, &len) in g.legs().iter().enumerate() {
            let mut prev = d[0];
            for i in 1..=len {
                let x = rng.gen_range(0..=prev);
                d[g.vertex(j, i)] = x;
                prev = x;
            }
        }
        if d.iter().sum::<i64>() > max_height {
            continue;
        }
        let q = torsion_params(rng, &d, &[1, 1, 2, 3, 4, 6]);
        let theta = if rng.gen_bool(0.5) { vec![BigRational::zero(); n] } else { sparse_theta(rng, &d) };
        return (g, d, q, theta);
    }
}

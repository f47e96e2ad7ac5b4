//! Randomized and exhaustive checks shared by the module tests and the acceptance run.

use std::collections::BTreeSet;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tameds::decomp::minimal_decomposition;
use tameds::kostov::{generate, generic_parameters, kappa_check};
use tameds::multgroup::evaluate_char;
use tameds::oracle::{search, Binding, SearchConfig};
use tameds::sigma::{
    best_split, ds_verdict, in_r_plus, reflect_params, reflect_theta, sigma_membership, theta_dot, SigmaWitness,
};
use tameds::spectral::build_problem;
use tameds::{AffineDiagram, Error, MultElement, RootKind, StarGraph};

use super::*;

pub fn divisors(m: i64) -> Vec<u64> {
    (1..=m as u64).filter(|l| m as u64 % l == 0).collect()
}

/// Every generated family for `m ≤ max_m` and `l | m`: `κ = 0` and an exact round trip.
pub fn family_integrity(max_m: i64) {
    for dg in AffineDiagram::ALL {
        for m in 1..=max_m {
            for l in divisors(m) {
                let q = generic_parameters(dg, m, l).unwrap();
                let f = generate(dg, m, &q).unwrap();
                assert_eq!(f.l, l);
                assert!(kappa_check(&f), "{} m={m} l={l}", dg.name());
                let k = if dg == AffineDiagram::D4 { 4 } else { 3 };
                assert_eq!(f.classes.len(), k);
                assert!(f.classes.iter().all(|c| c.n() == m * dg.center()));
                let p = build_problem(&f.classes).unwrap();
                assert_eq!(p.graph.legs(), dg.graph().legs());
                assert_eq!(p.d, f.dimension_vector());
                assert_eq!(p.q, q);
                assert!(p.char_trivial);
            }
        }
    }
}


pub fn kind_matches(a: RootKind, b: Option<RefKind>) -> bool {
    matches!(
        (a, b),
        (RootKind::NotRoot, None)
            | (RootKind::Real, Some(RefKind::Real))
            | (RootKind::ImaginaryIsotropic, Some(RefKind::Isotropic))
            | (RootKind::ImaginaryAnisotropic, Some(RefKind::Anisotropic))
    )
}


pub fn agree_with_orbits(g: &StarGraph, height: i64) -> usize {
    let orbit = weyl_orbit_roots(g, height, 8);
    let mut bad = 0;
    for d in height_points(g.num_vertices(), height) {
        let c = g.classify_root(&d).unwrap();
        if !kind_matches(c.kind, orbit.get(&d).copied()) {
            eprintln!("{d:?}: {:?} vs {:?}", c.kind, orbit.get(&d));
            bad += 1;
        }
    }
    bad
}

/// `{d1 + mδ}` with `d1` a root of the finite diagram (the tip of the first
/// arm removed) or zero.
pub fn closed_form(dg: AffineDiagram, big_m: i64) -> BTreeSet<Vec<i64>> {
    let g = dg.graph();
    let c = gram(&g);
    let n = g.num_vertices();
    let ext = g.vertex(0, dg.arms()[0]);
    let delta = dg.null_vector();
    let mut finite: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut frontier: Vec<Vec<i64>> = (0..n).filter(|&v| v != ext).map(|v| unit(n, v)).collect();
    finite.extend(frontier.iter().cloned());
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for d in &frontier {
            for v in (0..n).filter(|&v| v != ext) {
                let r = reflect_ref(&c, v, d);
                if finite.insert(r.clone()) {
                    next.push(r);
                }
            }
        }
        frontier = next;
    }
    let mut d1s: Vec<Vec<i64>> = finite.into_iter().collect();
    d1s.push(vec![0; n]);
    let mut out = BTreeSet::new();
    for m in 0..=big_m {
        for d1 in &d1s {
            let x: Vec<i64> = d1.iter().zip(&delta).map(|(a, b)| a + m * b).collect();
            let positive = x.iter().all(|&v| v >= 0) && x.iter().any(|&v| v > 0);
            let within = x.iter().zip(&delta).all(|(a, b)| *a <= big_m * b);
            if positive && within {
                out.insert(x);
            }
        }
    }
    out
}

/// Every `Σ_{q,θ}`-decomposition of `d`, found by brute force.
pub fn sigma_decompositions(g: &StarGraph, d: &[i64], q: &[MultElement], theta: &[BigRational]) -> Vec<Vec<Vec<i64>>> {
    let c = gram(g);
    let roots = weyl_orbit_roots(g, d.iter().sum(), 12);
    let members: Vec<Vec<i64>> = box_points(d)
        .into_iter()
        .filter(|x| x.iter().any(|&v| v > 0))
        .filter(|x| naive_sigma(&roots, &c, x, q, theta))
        .collect();
    all_decompositions(&members, d)
        .into_iter()
        .map(|ix| ix.into_iter().map(|i| members[i].clone()).collect())
        .collect()
}



/// Random instances: every Σ-decomposition found by brute force refines the minimal one.
pub fn refinement_trials(seed: u64, count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut split, mut failed) = (0, 0);
    for _ in 0..count {
        let (g, d, q, theta) = random_instance(&mut rng, 10);
        let all = sigma_decompositions(&g, &d, &q, &theta);
        match minimal_decomposition(&g, &d, &q, &theta) {
            Ok(minimal) => {
                assert!(!all.is_empty(), "{d:?}: minimal {minimal:?} but no Σ-decomposition");
                for p in &minimal {
                    assert!(sigma_membership(&g, p, &q, &theta).unwrap().member, "{p:?}");
                }
                for fine in &all {
                    assert!(refines(fine, &minimal), "{d:?}: {fine:?} does not refine {minimal:?}");
                }
                split += (minimal.len() > 1) as usize;
            }
            Err(Error::NoDecomposition(_)) => {
                assert!(all.is_empty(), "{d:?} has Σ-decompositions {all:?}");
                failed += 1;
            }
            Err(e) => panic!("{d:?}: {e}"),
        }
    }
    assert!(split > 20, "only {split} instances split ({failed} had no decomposition)");
}


/// Random instances: memoized and naive Σ searches agree, and every witness checks out.
pub fn sigma_agreement_trials(seed: u64, count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = 0;
    for _ in 0..count {
        let (g, d, q, theta) = random_instance(&mut rng, 12);
        let c = gram(&g);
        let roots = weyl_orbit_roots(&g, d.iter().sum(), 12);
        let cert = sigma_membership(&g, &d, &q, &theta).unwrap();
        assert_eq!(cert.member, naive_sigma(&roots, &c, &d, &q, &theta), "{d:?} {q:?} {theta:?}");
        members += cert.member as usize;
        let parts = admissible_ref(&roots, &c, &d, &q, &theta);
        assert_eq!(best_split(&parts, &d).map(|b| b.0), naive_best_split(&parts, &d));
        if let SigmaWitness::Decomposition { parts, p_whole, p_parts } = cert.witness {
            assert!(parts.len() >= 2);
            let mut sum = vec![0; d.len()];
            for p in &parts {
                assert!(in_r_plus(&g, p, &q, &theta).unwrap());
                for (s, x) in sum.iter_mut().zip(p) {
                    *s += x;
                }
            }
            assert_eq!(sum, d);
            assert_eq!(p_parts, parts.iter().map(|p| p_of(&c, p)).sum::<i64>());
            assert!(p_whole <= p_parts);
        }
    }
    assert!(members > 20, "too few members ({members}) to be a meaningful sample");
}

/// Random graphs, vectors, parameters and weights: one reflection preserves the
/// form, `p`, the character and the weight pairing. Returns the number of failures.
pub fn reflection_trials(seed: u64, count: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..count {
        let g = random_graph(&mut rng, 5, 3);
        let n = g.num_vertices();
        let vector = |rng: &mut ChaCha8Rng| -> Vec<i64> { (0..n).map(|_| rng.gen_range(-4..=6)).collect() };
        let d1 = vector(&mut rng);
        let d2 = vector(&mut rng);
        let q: Vec<MultElement> = (0..n)
            .map(|v| {
                let order = rng.gen_range(1..=6u64);
                let a = rng.gen_range(0..order as i64);
                MultElement::zeta(order, a).mul(&sym(&format!("s{v}")).pow(rng.gen_range(-2..=2)))
            })
            .collect();
        let theta: Vec<BigRational> = (0..n).map(|_| rat(rng.gen_range(-5..=5), rng.gen_range(1..=4))).collect();
        let v = rng.gen_range(0..n);
        let c = gram(&g);
        let s1 = g.reflect(v, &d1).unwrap();
        let s2 = g.reflect(v, &d2).unwrap();
        let q1 = reflect_params(&g, &q, v);
        let t1 = reflect_theta(&g, &theta, v);
        let ok = s1 == reflect_ref(&c, v, &d1)
            && form(&c, &s1, &s2) == form(&c, &d1, &d2)
            && g.pairing(&s1, &s2).unwrap() == form(&c, &d1, &d2)
            && g.p_value(&s1).unwrap() == p_of(&c, &d1)
            && evaluate_char(&q1, &s1).unwrap() == evaluate_char(&q, &d1).unwrap()
            && theta_dot(&t1, &s1) == theta_dot_ref(&theta, &d1);
        failures += !ok as usize;
    }
    failures
}

/// Outcome of running the numerical search on random generic problems.
#[derive(Debug, Default)]
pub struct OracleTally {
    pub problems: usize,
    pub irreducible: usize,
    /// Seeds of the problems left without an irreducible witness at the first budget.
    pub exhausted: Vec<u64>,
    /// Problems still without one after the rerun.
    pub rerun_failures: Vec<u64>,
}

/// Random generic problems in `GL_n`, `n ≤ 4`, with at most four classes, kept
/// when the exact criterion says solvable, then handed to the numerical search.
pub fn oracle_trials(seed: u64, count: usize, restarts: usize, rerun: usize) -> OracleTally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = OracleTally::default();
    let mut tag = 0;
    while tally.problems < count {
        tag += 1;
        let n = rng.gen_range(2..=4);
        let k = rng.gen_range(2..=4);
        let Some(classes) = generic_classes(&mut rng, n, k, tag) else { continue };
        let Ok(verdict) = ds_verdict(&classes, None) else { continue };
        let p = &verdict.problem;
        if !verdict.solvable || !sigma_membership(&p.graph, &p.d, &p.q, &p.theta).unwrap().member {
            continue;
        }
        tally.problems += 1;
        let binding = Binding::random(&classes, tag as u64);
        let run = |restarts: usize| {
            let cfg = SearchConfig { restarts, tol: 1e-10, seed: tag as u64, ..SearchConfig::default() };
            search(&classes, &binding, &cfg)
                .unwrap()
                .is_some_and(|w| w.irreducible && w.burnside_dim == (n * n) as usize)
        };
        if run(restarts) {
            tally.irreducible += 1;
        } else {
            tally.exhausted.push(tag as u64);
            if !run(rerun) {
                tally.rerun_failures.push(tag as u64);
            }
        }
    }
    tally
}

//! Exact reference helpers for weights, walls and degenerations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tameds::hodge::{
    angle_weight, betti_to_dolbeault, degeneration_degree_check, dolbeault_to_betti, filtered_degree,
    indivisibility_transfer, is_divisible, pick_weight, pushforward_weight, walls, BettiDatum, BettiEntry, TypedWeight,
    WeightMode,
};
use tameds::kostov::generate;
use tameds::multgroup::evaluate_char;
use tameds::spectral::{degenerate_type, Degeneration, TypeShape};
use tameds::{AffineDiagram, Error, MultElement};

use super::{rat, sym};

pub type Typed = Vec<Vec<i64>>;

pub fn star_of(c: &[Vec<i64>]) -> Typed {
    c.iter()
        .map(|leg| (0..leg.len()).map(|i| leg[i] - leg.get(i + 1).copied().unwrap_or(0)).collect())
        .collect()
}

pub fn typed_from_star(star: &[Vec<i64>]) -> Typed {
    star.iter()
        .map(|leg| (0..leg.len()).map(|i| leg[i..].iter().sum()).collect())
        .collect()
}

pub fn pairing(alpha: &TypedWeight, star: &[Vec<i64>]) -> BigRational {
    let mut s = BigRational::zero();
    for (a, c) in alpha.iter().zip(star) {
        for (x, y) in a.iter().zip(c) {
            s += x * BigInt::from(*y);
        }
    }
    s
}

pub fn is_int(x: &BigRational) -> bool {
    x.is_integer()
}

/// Splittings of `n` into `parts` nonnegative summands.
pub fn splittings(n: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|a| {
            splittings(n - a, parts - 1).into_iter().map(move |mut r| {
                r.push(a);
                r
            })
        })
        .collect()
}

/// All `c'*` for strict `c'` of rank `1..=n` on the given flag lengths.
pub fn sub_stars(shape: &[usize], n: i64) -> Vec<Typed> {
    let mut out = Vec::new();
    for r in 1..=n {
        let mut acc: Vec<Typed> = vec![vec![]];
        for &len in shape {
            let mut next = Vec::new();
            for prefix in &acc {
                for s in splittings(r, len) {
                    let mut p = prefix.clone();
                    p.push(s);
                    next.push(p);
                }
            }
            acc = next;
        }
        out.extend(acc);
    }
    out
}

pub fn proportional(a: &Typed, b: &Typed) -> bool {
    let x: Vec<i64> = a.iter().flatten().copied().collect();
    let y: Vec<i64> = b.iter().flatten().copied().collect();
    (0..x.len()).all(|i| (0..x.len()).all(|k| x[i] * y[k] == x[k] * y[i]))
}

/// Number of integers `Σ α_t c'*` passes over `t ∈ (0,1]` on the segment.
pub fn crossings(s0: &BigRational, s1: &BigRational) -> BigInt {
    if s0 == s1 {
        return if is_int(s0) { BigInt::one() } else { BigInt::zero() };
    }
    if s1 > s0 {
        s1.floor().to_integer() - s0.floor().to_integer()
    } else {
        s0.ceil().to_integer() - s1.ceil().to_integer()
    }
}

pub fn in_weight_space(alpha: &TypedWeight, e: i64, c: &[Vec<i64>]) -> bool {
    let ordered = alpha
        .iter()
        .all(|l| l.windows(2).all(|w| w[0] <= w[1]) && l.iter().all(|a| !a.is_negative() && *a < BigRational::one()));
    ordered && (BigRational::from_integer(e.into()) + pairing(alpha, &star_of(c))).is_zero()
}

/// Exact certificate for `pick_weight`: `α` in the weight space and no
/// forbidden relation crossed anywhere on `(anchor, α]`.
pub fn certify(e: i64, c: &[Vec<i64>], anchor: &TypedWeight, alpha: &TypedWeight, mode: WeightMode) -> bool {
    if !in_weight_space(alpha, e, c) {
        return false;
    }
    let star = star_of(c);
    let shape: Vec<usize> = c.iter().map(|l| l.len()).collect();
    sub_stars(&shape, c[0][0]).iter().all(|sub| {
        let forbidden = match mode {
            WeightMode::AlmostGeneric => !proportional(sub, &star),
            WeightMode::Generic => *sub != star,
        };
        !forbidden || crossings(&pairing(anchor, sub), &pairing(alpha, sub)).is_zero()
    })
}

pub fn random_strict(rng: &mut ChaCha8Rng, k: usize, max_len: usize, n: i64) -> Typed {
    let star: Typed = (0..k)
        .map(|_| {
            let len = rng.gen_range(1..=max_len + 1);
            let mut s = vec![0; len];
            for _ in 0..n {
                s[rng.gen_range(0..len)] += 1;
            }
            s
        })
        .collect();
    typed_from_star(&star)
}

/// An ordered weight on `c` with small denominators whose degree `−Σ α c*` is integral.
pub fn random_weight(rng: &mut ChaCha8Rng, c: &[Vec<i64>]) -> Option<(TypedWeight, i64)> {
    let star = star_of(c);
    for _ in 0..2000 {
        let den = [2, 3, 4, 6][rng.gen_range(0..4)];
        let alpha: TypedWeight = c
            .iter()
            .map(|l| {
                let mut v: Vec<i64> = (0..l.len()).map(|_| rng.gen_range(0..den)).collect();
                v.sort_unstable();
                v.into_iter().map(|x| rat(x, den)).collect()
            })
            .collect();
        let s = pairing(&alpha, &star);
        if is_int(&s) {
            let e: i64 = (-s).to_integer().try_into().unwrap();
            return Some((alpha, e));
        }
    }
    None
}

pub fn random_element(rng: &mut ChaCha8Rng) -> MultElement {
    let mut x = MultElement::zeta(rng.gen_range(1..=12), rng.gen_range(0..12));
    for name in ["x", "y"] {
        x = x.mul(&sym(name).pow(rng.gen_range(-2..=2)));
    }
    if rng.gen_bool(0.3) {
        x = x.mul(&MultElement::integer(rng.gen_range(2..=6)).unwrap());
    }
    x
}

pub fn random_degeneration(rng: &mut ChaCha8Rng, target: &TypeShape) -> Degeneration {
    let maps: Vec<Vec<usize>> = target
        .nu
        .iter()
        .map(|&nu| {
            let mut m = vec![0];
            m.extend((1..=nu).filter(|_| rng.gen_bool(0.5)));
            m
        })
        .collect();
    Degeneration::new(maps, target).unwrap()
}

/// `(σ_*α)_{[j,i']}` is `α` at the largest `i` with `σ(i) ≤ i'`.
pub fn pushforward_ref(maps: &[Vec<usize>], target: &[usize], alpha: &TypedWeight) -> TypedWeight {
    maps.iter()
        .zip(target)
        .zip(alpha)
        .map(|((m, &nu), a)| {
            (0..=nu)
                .map(|ip| {
                    let i = m.iter().rposition(|&s| s <= ip).unwrap();
                    a[i].clone()
                })
                .collect()
        })
        .collect()
}

/// With `e = 0` every weight below a positive `c*` entry is 0, so
/// `Σ_j α_{[j,0]} = 0` holds on the whole weight space: a relation of rank 1
/// that is forbidden unless `c*` sits entirely at the first flag index.
pub fn pinned_to_a_wall(e: i64, c: &[Vec<i64>]) -> bool {
    e == 0 && star_of(c).iter().any(|l| l[1..].iter().any(|&x| x > 0))
}

pub fn random_unit(rng: &mut ChaCha8Rng, l: u64) -> i64 {
    loop {
        let u = rng.gen_range(1..=l as i64);
        if u.gcd(&(l as i64)) == 1 {
            return u;
        }
    }
}

/// Torsion parameters on an affine diagram, all different from 1, with `q^δ` of exact order `l`.
pub fn torsion_family_params(rng: &mut ChaCha8Rng, dg: AffineDiagram, l: u64) -> Vec<MultElement> {
    let g = dg.graph();
    let delta = dg.null_vector();
    let tip = g.vertex(0, dg.arms()[0]);
    loop {
        let n = [5u64, 7, 8, 9, 12][rng.gen_range(0..5)];
        let mut q: Vec<MultElement> = (0..delta.len()).map(|_| MultElement::zeta(n, rng.gen_range(1..n as i64))).collect();
        let others = (0..delta.len())
            .filter(|&v| v != tip)
            .fold(MultElement::one(), |acc, v| acc.mul(&q[v].pow(delta[v])));
        q[tip] = MultElement::zeta(l, random_unit(rng, l)).div(&others);
        if q.iter().all(|x| !x.is_one()) && evaluate_char(&q, &delta).unwrap().order_of() == Some(l) {
            return q;
        }
    }
}

/// Random exact Betti data survive the round trip through the Dolbeault side.
pub fn round_trip_trials(seed: u64, count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let legs: Vec<Vec<BettiEntry>> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let mut betas: Vec<BigRational> = (0..rng.gen_range(1..=4)).map(|_| rat(rng.gen_range(-20..=20), rng.gen_range(1..=4))).collect();
                betas.sort();
                betas.dedup();
                betas
                    .into_iter()
                    .map(|beta| BettiEntry {
                        beta,
                        xi: random_element(&mut rng),
                        size: rng.gen_range(1..=3),
                    })
                    .collect()
            })
            .collect();
        let datum = BettiDatum { legs };
        let dol = betti_to_dolbeault(&datum).unwrap();
        for (leg, blocks) in datum.legs.iter().zip(&dol.legs) {
            assert_eq!(leg.iter().map(|x| x.size).sum::<i64>(), blocks.iter().map(|b| b.dim).sum::<i64>());
            assert!(blocks.windows(2).all(|w| w[0].alpha < w[1].alpha));
            for x in leg {
                let a = angle_weight(&x.xi);
                let block = blocks.iter().find(|b| b.alpha == a).unwrap();
                assert!(block.residues.iter().any(|r| r.b == -x.beta.clone() / BigInt::from(2) && r.c == x.xi.modulus()));
            }
        }
        assert_eq!(dolbeault_to_betti(&dol).unwrap(), datum);
    }
}

/// Random degenerations: the pushforward matches its definition and keeps the degree.
pub fn pushforward_trials(seed: u64, count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let k = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=6);
        let dims = random_strict(&mut rng, k, 4, n);
        let target = TypeShape {
            nu: dims.iter().map(|l| l.len() - 1).collect(),
        };
        let sigma = random_degeneration(&mut rng, &target);
        let maps: Vec<Vec<usize>> = (0..k)
            .map(|j| (0..=sigma.source().nu[j]).map(|i| sigma.map(j, i)).collect())
            .collect();
        let alpha: TypedWeight = maps
            .iter()
            .map(|m| {
                let mut v: Vec<BigRational> = m.iter().map(|_| rat(rng.gen_range(0..60), 60)).collect();
                v.sort();
                v
            })
            .collect();
        let pushed = pushforward_weight(&sigma, &alpha).unwrap();
        assert_eq!(pushed, pushforward_ref(&maps, &target.nu, &alpha));
        let pulled: Typed = maps.iter().zip(&dims).map(|(m, d)| m.iter().map(|&i| d[i]).collect()).collect();
        assert_eq!(degenerate_type(&sigma, &dims).unwrap(), pulled);
        let lhs = pairing(&alpha, &star_of(&pulled));
        let rhs = pairing(&pushed, &star_of(&dims));
        assert_eq!(lhs, rhs);
        assert_eq!(filtered_degree(&pulled, &alpha, None).unwrap(), lhs);
        assert!(degeneration_degree_check(&sigma, &alpha, &dims).unwrap());
    }
}

/// Picked weights on random `(e, c)`: certified by an independent crossing count.
pub fn pick_weight_trials(seed: u64, count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut certified = 0;
    for round in 0..count as u64 {
        let c = { let k = rng.gen_range(1..=3); let n = rng.gen_range(1..=4); random_strict(&mut rng, k, 2, n) };
        let Some((anchor, e)) = random_weight(&mut rng, &c) else { continue };
        for mode in [WeightMode::AlmostGeneric, WeightMode::Generic] {
            match pick_weight(e, &c, &anchor, mode, round) {
                Ok(alpha) => {
                    assert!(certify(e, &c, &anchor, &alpha, mode), "{c:?} e = {e} {anchor:?} → {alpha:?}");
                    for w in walls(e, &c).unwrap().iter().filter(|_| mode == WeightMode::AlmostGeneric) {
                        let v = BigRational::from_integer(w.e.into()) + pairing(&alpha, &star_of(&w.c));
                        assert!(!v.is_zero());
                    }
                    certified += 1;
                }
                Err(Error::Precondition(_)) => {
                    assert!(mode == WeightMode::Generic && is_divisible(e, &c) || pinned_to_a_wall(e, &c), "{c:?} e = {e} {anchor:?} {mode:?}");
                }
                Err(err) => panic!("{err}"),
            }
        }
    }
    assert!(certified > 60);
}

/// Constructed `(m, l)` instances: `(e, d)` indivisible exactly when `l = m`.
pub fn indivisibility_trials(seed: u64, count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let cases: Vec<(i64, u64)> = (1..=6i64).flat_map(|m| (1..=m as u64).filter(move |l| m as u64 % l == 0).map(move |l| (m, l))).collect();
    while done < count {
        let dg = AffineDiagram::ALL[done % 4];
        let (m, l) = cases[done % cases.len()];
        let (q, f) = loop {
            let q = torsion_family_params(&mut rng, dg, l);
            if let Ok(f) = generate(dg, m, &q) {
                break (q, f);
            }
        };
        // the degree from the eigenvalue angles of the generated classes
        let s = f
            .classes
            .iter()
            .flat_map(|c| c.eigenvalues.iter().zip(c.multiplicities()))
            .fold(BigRational::zero(), |acc, (xi, mult)| {
                let (n, a) = xi.torsion();
                acc + rat((n as i64 - a as i64).rem_euclid(n as i64), n as i64) * BigInt::from(mult)
            });
        assert!(s.is_integer());
        let e = -s.to_integer();
        let indivisible = e.gcd(&BigInt::from(m)).is_one();
        assert_eq!(indivisible, l as i64 == m, "{} m={m} l={l} e={e}", dg.name());
        let g = dg.graph();
        assert_eq!(indivisibility_transfer(&g, &f.dimension_vector(), &q, m, l).unwrap(), indivisible);
        done += 1;
    }
}

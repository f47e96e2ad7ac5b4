//! Exact bookkeeping between filtered local systems (Betti side) and
//! parabolic Higgs bundles (Dolbeault side): weights, walls, degenerations.
//!
//! An eigenvalue `ξ = exp(−2πiα + 4πc)` is split into its torsion part, which
//! fixes `α ∈ [0,1)`, and its free part, which is kept as the formal modulus
//! `c`. Free generators (primes and symbols) are read as positive reals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multgroup::{evaluate_char, is_proportional, MultElement};
use crate::root_system::{DimVector, StarGraph};
use crate::spectral::{degenerate_type, from_star, strictness, Degeneration, DsProblem};

/// Weights indexed like a typed vector: `alpha[j][i]`.
pub type TypedWeight = Vec<Vec<BigRational>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BettiEntry {
    #[serde(serialize_with = "crate::rational_serde::one")]
    pub beta: BigRational,
    pub xi: MultElement,
    /// Size of the scalar block `ξ·Id` on the graded piece.
    pub size: i64,
}

/// Per puncture, entries in increasing `β`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BettiDatum {
    pub legs: Vec<Vec<BettiEntry>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueEigenvalue {
    #[serde(serialize_with = "crate::rational_serde::one")]
    pub b: BigRational,
    pub c: MultElement,
    pub mult: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DolbeaultBlock {
    #[serde(serialize_with = "crate::rational_serde::one")]
    pub alpha: BigRational,
    pub dim: i64,
    pub residues: Vec<ResidueEigenvalue>,
}

/// Per puncture, blocks in increasing `α`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DolbeaultDatum {
    pub legs: Vec<Vec<DolbeaultBlock>>,
}

impl DolbeaultDatum {
    pub fn weights(&self) -> TypedWeight {
        self.legs
            .iter()
            .map(|l| l.iter().map(|b| b.alpha.clone()).collect())
            .collect()
    }

    /// Typed dimension vector of the flags, rebuilt from the block sizes.
    pub fn dims(&self) -> Vec<Vec<i64>> {
        from_star(
            &self
                .legs
                .iter()
                .map(|l| l.iter().map(|b| b.dim).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        )
    }
}

/// `α ∈ [0,1)` with `exp(−2πiα)` equal to the torsion part of `ξ`.
pub fn angle_weight(xi: &MultElement) -> BigRational {
    let (n, a) = xi.torsion();
    BigRational::new(BigInt::from((n - a) % n), BigInt::from(n))
}

/// The root of unity `exp(−2πiα)` for rational `α ∈ [0,1)`.
pub fn weight_torsion(alpha: &BigRational) -> Result<MultElement> {
    if alpha.is_negative() || *alpha >= BigRational::one() {
        return Err(Error::validation("/alpha", format!("weight {alpha} is outside [0,1)")));
    }
    let n = alpha
        .denom()
        .to_u64()
        .ok_or(Error::Overflow("weight denominator"))?;
    let a = alpha.numer().to_i64().ok_or(Error::Overflow("weight numerator"))?;
    Ok(MultElement::zeta(n, -a))
}

pub fn betti_to_dolbeault(datum: &BettiDatum) -> Result<DolbeaultDatum> {
    let mut legs = Vec::with_capacity(datum.legs.len());
    for (j, leg) in datum.legs.iter().enumerate() {
        for (i, x) in leg.iter().enumerate() {
            if x.size <= 0 {
                return Err(Error::validation(format!("/legs/{j}/{i}/size"), "sizes must be positive"));
            }
            if i > 0 && x.beta <= leg[i - 1].beta {
                return Err(Error::validation(
                    format!("/legs/{j}/{i}/beta"),
                    "weights β must increase strictly along a puncture",
                ));
            }
        }
        let mut blocks: Vec<DolbeaultBlock> = Vec::new();
        for x in leg {
            let alpha = angle_weight(&x.xi);
            let residue = ResidueEigenvalue {
                b: -x.beta.clone() / BigInt::from(2),
                c: x.xi.modulus(),
                mult: x.size,
            };
            match blocks.iter_mut().find(|b| b.alpha == alpha) {
                Some(b) => {
                    b.dim += x.size;
                    b.residues.push(residue);
                }
                None => blocks.push(DolbeaultBlock {
                    alpha,
                    dim: x.size,
                    residues: vec![residue],
                }),
            }
        }
        blocks.sort_by(|a, b| a.alpha.cmp(&b.alpha));
        legs.push(blocks);
    }
    Ok(DolbeaultDatum { legs })
}

pub fn dolbeault_to_betti(datum: &DolbeaultDatum) -> Result<BettiDatum> {
    let mut legs = Vec::with_capacity(datum.legs.len());
    for (j, leg) in datum.legs.iter().enumerate() {
        let mut entries = Vec::new();
        for (i, block) in leg.iter().enumerate() {
            let loc = format!("/legs/{j}/{i}");
            let torsion = weight_torsion(&block.alpha).map_err(|_| {
                Error::validation(format!("{loc}/alpha"), format!("weight {} is outside [0,1)", block.alpha))
            })?;
            if i > 0 && block.alpha <= leg[i - 1].alpha {
                return Err(Error::validation(
                    format!("{loc}/alpha"),
                    "weights α must increase strictly along a puncture",
                ));
            }
            if block.residues.iter().map(|r| r.mult).sum::<i64>() != block.dim {
                return Err(Error::validation(
                    format!("{loc}/residues"),
                    "residue multiplicities must add up to the block size",
                ));
            }
            for (r_idx, r) in block.residues.iter().enumerate() {
                if r.c.torsion().0 != 1 {
                    return Err(Error::validation(
                        format!("{loc}/residues/{r_idx}/c"),
                        "the modulus must be free of torsion",
                    ));
                }
                entries.push(BettiEntry {
                    beta: -r.b.clone() * BigInt::from(2),
                    xi: torsion.mul(&r.c),
                    size: r.mult,
                });
            }
        }
        entries.sort_by(|a, b| a.beta.cmp(&b.beta));
        if let Some(w) = entries.windows(2).find(|w| w[0].beta == w[1].beta) {
            return Err(Error::validation(
                format!("/legs/{j}"),
                format!("weight β = {} appears twice", w[0].beta),
            ));
        }
        legs.push(entries);
    }
    Ok(BettiDatum { legs })
}

/// `Σ w_{[j,i]} d*_{[j,i]}`, plus the bundle degree when given.
pub fn filtered_degree(dims: &[Vec<i64>], weights: &TypedWeight, bundle_degree: Option<i64>) -> Result<BigRational> {
    let (strict, star) = strictness(dims);
    if !strict {
        return Err(Error::Domain("dimension vector is not strict".into()));
    }
    shape_match(dims, weights)?;
    let mut total = BigRational::from_integer(BigInt::from(bundle_degree.unwrap_or(0)));
    for (w, s) in weights.iter().flatten().zip(star.iter().flatten()) {
        total += w * BigInt::from(*s);
    }
    Ok(total)
}

fn shape_match<A, B>(a: &[Vec<A>], b: &[Vec<B>]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Mismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    for (x, y) in a.iter().zip(b) {
        if x.len() != y.len() {
            return Err(Error::Mismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
    }
    Ok(())
}

/// `(σ_*α)_{[j,i']} = α_{[j,i]}` for `σ(i) ≤ i' < σ(i+1)`.
pub fn pushforward_weight(sigma: &Degeneration, alpha: &TypedWeight) -> Result<TypedWeight> {
    let source = sigma.source();
    let target = sigma.target();
    source.check(alpha)?;
    Ok(target
        .nu
        .iter()
        .enumerate()
        .map(|(j, &nu)| {
            let mu = source.nu[j];
            let mut out = Vec::with_capacity(nu + 1);
            for i in 0..=mu {
                let end = if i < mu { sigma.map(j, i + 1) } else { nu + 1 };
                for _ in sigma.map(j, i)..end {
                    out.push(alpha[j][i].clone());
                }
            }
            out
        })
        .collect())
}

/// `deg_{α'} E' = deg_{σ_*α'} E` where `E'` carries the degenerated flags.
pub fn degeneration_degree_check(sigma: &Degeneration, alpha: &TypedWeight, dims: &[Vec<i64>]) -> Result<bool> {
    let degenerate = degenerate_type(sigma, dims)?;
    let lhs = filtered_degree(&degenerate, alpha, None)?;
    let rhs = filtered_degree(dims, &pushforward_weight(sigma, alpha)?, None)?;
    Ok(lhs == rhs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub e: i64,
    /// Strict typed vector of some rank `n' ≤ n`.
    pub c: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Generic,
    AlmostGeneric,
}

/// Upper limit on the number of candidate vectors `c'` visited.
pub const WALL_SEARCH_LIMIT: u128 = 5_000_000;

/// `α ∈ I^τ(e,c)`: ordered weights in `[0,1)` on the hyperplane `e + Σ α c* = 0`.
pub fn check_weight(alpha: &TypedWeight, e: i64, c: &[Vec<i64>]) -> Result<()> {
    shape_match(c, alpha)?;
    check_rank_vector(c)?;
    for (j, leg) in alpha.iter().enumerate() {
        for (i, a) in leg.iter().enumerate() {
            if a.is_negative() || *a >= BigRational::one() {
                return Err(Error::validation(format!("/alpha/{j}/{i}"), "weights must lie in [0,1)"));
            }
            if i > 0 && *a < leg[i - 1] {
                return Err(Error::validation(format!("/alpha/{j}/{i}"), "weights must not decrease"));
            }
        }
    }
    let h = hyperplane_value(alpha, e, c);
    if !h.is_zero() {
        return Err(Error::validation(
            "/alpha",
            format!("e + Σ α c* = {h}, not 0"),
        ));
    }
    Ok(())
}

fn check_rank_vector(c: &[Vec<i64>]) -> Result<i64> {
    let (strict, _) = strictness(c);
    let n = c.first().and_then(|l| l.first()).copied().unwrap_or(0);
    if !strict || n <= 0 || c.iter().any(|l| l.first() != Some(&n)) {
        return Err(Error::validation("/c", "expected a strict vector of positive rank"));
    }
    Ok(n)
}

fn hyperplane_value(alpha: &TypedWeight, e: i64, c: &[Vec<i64>]) -> BigRational {
    let (_, star) = strictness(c);
    BigRational::from_integer(e.into()) + pair(alpha, &star)
}

fn pair(alpha: &TypedWeight, star: &[Vec<i64>]) -> BigRational {
    alpha
        .iter()
        .flatten()
        .zip(star.iter().flatten())
        .fold(BigRational::zero(), |acc, (a, &s)| acc + a * BigInt::from(s))
}

/// Calls `visit(c'*)` for every strict `c'` of rank `1..=n` on the shape of `c`.
fn for_each_subvector(shape: &[usize], n: i64, mut visit: impl FnMut(&[Vec<i64>]) -> bool) -> Result<()> {
    let mut total: u128 = 0;
    for r in 1..=n {
        let mut count: u128 = 1;
        for &len in shape {
            count = count.saturating_mul(binomial(r as u128 + len as u128 - 1, len as u128 - 1));
        }
        total = total.saturating_add(count);
    }
    if total > WALL_SEARCH_LIMIT {
        return Err(Error::Overflow("too many candidate walls"));
    }
    for r in 1..=n {
        let per_leg: Vec<Vec<Vec<i64>>> = shape.iter().map(|&len| compositions(r, len)).collect();
        let mut idx = vec![0usize; shape.len()];
        let mut cur: Vec<Vec<i64>> = per_leg.iter().map(|p| p[0].clone()).collect();
        loop {
            if !visit(&cur) {
                return Ok(());
            }
            let mut j = 0;
            while j < idx.len() {
                idx[j] += 1;
                if idx[j] < per_leg[j].len() {
                    cur[j] = per_leg[j][idx[j]].clone();
                    break;
                }
                idx[j] = 0;
                cur[j] = per_leg[j][0].clone();
                j += 1;
            }
            if j == idx.len() {
                break;
            }
        }
    }
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Compositions of `total` into `parts` nonnegative entries.
fn compositions(total: i64, parts: usize) -> Vec<Vec<i64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn flat_with(e: i64, star: &[Vec<i64>]) -> Vec<i64> {
    std::iter::once(e).chain(star.iter().flatten().copied()).collect()
}

fn shape_of(c: &[Vec<i64>]) -> Vec<usize> {
    c.iter().map(|l| l.len()).collect()
}

fn is_integer(x: &BigRational) -> bool {
    x.denom().is_one()
}

/// Points where the hyperplane `e + Σ α c* = 0` meets the vertices and edges
/// of the closed weight box, a product of order simplices (one per puncture).
/// The vertex `t` puts weight 1 on the top `t_j` indices of puncture `j`.
struct HyperplaneSection {
    tops: Vec<Vec<usize>>,
    /// `(u, w, g_u, g_w)`: the point `(g_u·w − g_w·u)/(g_u − g_w)`; `u = w` for a vertex on the hyperplane.
    points: Vec<(usize, usize, i128, i128)>,
}

impl HyperplaneSection {
    fn new(e: i64, star: &[Vec<i64>]) -> Self {
        let mut tops: Vec<Vec<usize>> = vec![vec![]];
        for leg in star {
            tops = tops
                .into_iter()
                .flat_map(|t| {
                    (0..=leg.len()).map(move |x| {
                        let mut t = t.clone();
                        t.push(x);
                        t
                    })
                })
                .collect();
        }
        let g: Vec<i128> = tops.iter().map(|t| e as i128 + top_sum(star, t)).collect();
        let mut points = Vec::new();
        for (u, tu) in tops.iter().enumerate() {
            if g[u] == 0 {
                points.push((u, u, 0, 0));
            }
            for (w, tw) in tops.iter().enumerate().skip(u + 1) {
                let differ = tu.iter().zip(tw).filter(|(a, b)| a != b).count();
                if differ == 1 && g[u].signum() * g[w].signum() < 0 {
                    points.push((u, w, g[u], g[w]));
                }
            }
        }
        HyperplaneSection { tops, points }
    }

    /// Range of `Σ α c'*` over the section, as fractions `(num, den)` with `den > 0`.
    fn range(&self, sub: &[Vec<i64>]) -> Option<((i128, i128), (i128, i128))> {
        let f: Vec<i128> = self.tops.iter().map(|t| top_sum(sub, t)).collect();
        let mut lo: Option<(i128, i128)> = None;
        let mut hi: Option<(i128, i128)> = None;
        for &(u, w, gu, gw) in &self.points {
            let x = if u == w {
                (f[u], 1)
            } else {
                let (num, den) = (gu * f[w] - gw * f[u], gu - gw);
                if den < 0 {
                    (-num, -den)
                } else {
                    (num, den)
                }
            };
            if lo.map_or(true, |l| x.0 * l.1 < l.0 * x.1) {
                lo = Some(x);
            }
            if hi.map_or(true, |h| x.0 * h.1 > h.0 * x.1) {
                hi = Some(x);
            }
        }
        Some((lo?, hi?))
    }
}

fn top_sum(star: &[Vec<i64>], tops: &[usize]) -> i128 {
    star.iter()
        .zip(tops)
        .map(|(leg, &t)| leg[leg.len() - t..].iter().map(|&x| x as i128).sum::<i128>())
        .sum()
}

/// All primitive walls `(e', c')` meeting the closure of `I^τ(e,c)` that are
/// not proportional to `(e, c)`.
pub fn walls(e: i64, c: &[Vec<i64>]) -> Result<Vec<Wall>> {
    let n = check_rank_vector(c)?;
    let (_, star) = strictness(c);
    let ambient = flat_with(e, &star);
    let section = HyperplaneSection::new(e, &star);
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_subvector(&shape_of(c), n, |sub| {
        let Some((lo, hi)) = section.range(sub) else {
            return true;
        };
        let content = sub.iter().flatten().fold(0i64, |g, &x| g.gcd(&x));
        // e' = −Σ α c'* runs over [−hi, −lo]
        let first = Integer::div_ceil(&-hi.0, &hi.1) as i64;
        let last = Integer::div_floor(&-lo.0, &lo.1) as i64;
        for ep in first..=last {
            if ep.gcd(&content) != 1 {
                continue;
            }
            if is_proportional(&flat_with(ep, sub), &ambient) {
                continue;
            }
            out.push(Wall {
                e: ep,
                c: from_star(sub),
            });
            if out.len() as u128 > WALL_SEARCH_LIMIT {
                overflow = true;
                return false;
            }
        }
        true
    })?;
    if overflow {
        return Err(Error::Overflow("too many walls"));
    }
    Ok(out)
}

/// No relation `e' + Σ α c'* = 0` except those proportional to `(e, c)`.
pub fn is_almost_generic(alpha: &TypedWeight, e: i64, c: &[Vec<i64>]) -> Result<bool> {
    check_weight(alpha, e, c)?;
    relation_free(alpha, c, WeightMode::AlmostGeneric)
}

/// No relation `e' + Σ α c'* = 0` at all except `(e', c') = (e, c)`.
pub fn is_generic(alpha: &TypedWeight, e: i64, c: &[Vec<i64>]) -> Result<bool> {
    check_weight(alpha, e, c)?;
    relation_free(alpha, c, WeightMode::Generic)
}

fn relation_free(alpha: &TypedWeight, c: &[Vec<i64>], mode: WeightMode) -> Result<bool> {
    let n = check_rank_vector(c)?;
    let (_, star) = strictness(c);
    let mut free = true;
    for_each_subvector(&shape_of(c), n, |sub| {
        if !constrains(sub, &star, mode) {
            return true;
        }
        if is_integer(&pair(alpha, sub)) {
            free = false;
        }
        free
    })?;
    Ok(free)
}

/// Whether an integral value of `Σ α c'*` breaks the requested genericity.
/// On the hyperplane a `c'*` proportional to `c*` has `Σ α c'* = −t e`, so the
/// relation is automatically proportional.
fn constrains(sub: &[Vec<i64>], star: &[Vec<i64>], mode: WeightMode) -> bool {
    match mode {
        WeightMode::AlmostGeneric => {
            let a: Vec<i64> = sub.iter().flatten().copied().collect();
            let b: Vec<i64> = star.iter().flatten().copied().collect();
            !is_proportional(&a, &b)
        }
        WeightMode::Generic => sub != star,
    }
}

fn satisfies(alpha: &TypedWeight, e: i64, c: &[Vec<i64>], mode: WeightMode) -> Result<bool> {
    match mode {
        WeightMode::AlmostGeneric => is_almost_generic(alpha, e, c),
        WeightMode::Generic => is_generic(alpha, e, c),
    }
}

/// `(e, c)` has a common divisor greater than one.
pub fn is_divisible(e: i64, c: &[Vec<i64>]) -> bool {
    c.iter().flatten().fold(e, |g, &x| g.gcd(&x)) > 1
}

/// Exact test whether `{from + t(to − from) : 0 < t ≤ 1}` meets a relation
/// forbidden by `mode`.
pub fn segment_meets_wall(
    e: i64,
    c: &[Vec<i64>],
    from: &TypedWeight,
    to: &TypedWeight,
    mode: WeightMode,
) -> Result<bool> {
    check_weight(from, e, c)?;
    check_weight(to, e, c)?;
    let n = check_rank_vector(c)?;
    let (_, star) = strictness(c);
    let mut meets = false;
    for_each_subvector(&shape_of(c), n, |sub| {
        if !constrains(sub, &star, mode) {
            return true;
        }
        let s0 = pair(from, sub);
        let s1 = pair(to, sub);
        // values over t ∈ (0,1] fill (s0, s1] or [s1, s0)
        meets = if s0 == s1 {
            is_integer(&s0)
        } else if s1 > s0 {
            s1.floor() > s0
        } else {
            s1.ceil() < s0
        };
        !meets
    })?;
    Ok(meets)
}

/// A weight in the requested mode reached from `anchor` along a segment that
/// meets no forbidden relation; `anchor` itself is returned when it already qualifies.
pub fn pick_weight(e: i64, c: &[Vec<i64>], anchor: &TypedWeight, mode: WeightMode, seed: u64) -> Result<TypedWeight> {
    check_weight(anchor, e, c)?;
    if mode == WeightMode::Generic && is_divisible(e, c) {
        return Err(Error::Precondition(
            "generic weights do not exist for a divisible (e, c)".into(),
        ));
    }
    if satisfies(anchor, e, c, mode)? {
        return Ok(anchor.clone());
    }
    let n = check_rank_vector(c)?;
    let (_, star) = strictness(c);
    let mut subs: Vec<Vec<Vec<i64>>> = Vec::new();
    for_each_subvector(&shape_of(c), n, |sub| {
        if constrains(sub, &star, mode) {
            subs.push(sub.to_vec());
        }
        true
    })?;
    let section = HyperplaneSection::new(e, &star);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..256 {
        let Some(target) = random_hyperplane_point(&mut rng, &section, c) else {
            break;
        };
        let direction: TypedWeight = target
            .iter()
            .zip(anchor)
            .map(|(t, a)| t.iter().zip(a).map(|(x, y)| x - y).collect())
            .collect();
        let Some(s_max) = step_bound(&subs, anchor, &direction) else {
            continue;
        };
        let mut s = BigRational::one();
        while s >= s_max {
            s /= BigInt::from(2);
        }
        let alpha: TypedWeight = anchor
            .iter()
            .zip(&direction)
            .map(|(a, v)| a.iter().zip(v).map(|(x, y)| x + y * &s).collect())
            .collect();
        if satisfies(&alpha, e, c, mode)? && !segment_meets_wall(e, c, anchor, &alpha, mode)? {
            return Ok(alpha);
        }
    }
    Err(Error::Precondition("no admissible weight found near the anchor".into()))
}

/// Largest step `s` such that `(S0, S0 + s·D]` avoids integers for every `c'`;
/// `None` when the direction lies inside a forbidden relation.
fn step_bound(subs: &[Vec<Vec<i64>>], anchor: &TypedWeight, direction: &TypedWeight) -> Option<BigRational> {
    let mut bound: Option<BigRational> = None;
    for sub in subs {
        let s0 = pair(anchor, sub);
        let d = pair(direction, sub);
        if d.is_zero() {
            if is_integer(&s0) {
                return None;
            }
            continue;
        }
        let dist = if d.is_positive() {
            s0.floor() + BigRational::one() - &s0
        } else {
            &s0 - (s0.ceil() - BigRational::one())
        };
        let b = dist / d.abs();
        if bound.as_ref().map_or(true, |x| b < *x) {
            bound = Some(b);
        }
    }
    Some(bound.unwrap_or_else(|| BigRational::from_integer(2.into())))
}

/// A random point in the relative interior of `I^τ(e,c)`: a convex
/// combination with positive weights of every point of the section.
fn random_hyperplane_point(rng: &mut ChaCha8Rng, section: &HyperplaneSection, c: &[Vec<i64>]) -> Option<TypedWeight> {
    let vertex = |u: usize| -> Vec<Vec<i128>> {
        c.iter()
            .zip(&section.tops[u])
            .map(|(leg, &t)| (0..leg.len()).map(|i| (i + t >= leg.len()) as i128).collect())
            .collect()
    };
    let mut acc: Vec<Vec<BigRational>> = c.iter().map(|l| vec![BigRational::zero(); l.len()]).collect();
    let mut total = BigRational::zero();
    for &(u, w, gu, gw) in &section.points {
        let lambda = BigRational::from_integer(rng.gen_range(1..=64).into());
        let (vu, vw) = (vertex(u), vertex(w));
        for (j, leg) in acc.iter_mut().enumerate() {
            for (i, x) in leg.iter_mut().enumerate() {
                let p = if u == w {
                    BigRational::from_integer(vu[j][i].into())
                } else {
                    BigRational::new((gu * vw[j][i] - gw * vu[j][i]).into(), (gu - gw).into())
                };
                *x += &lambda * p;
            }
        }
        total += lambda;
    }
    if total.is_zero() {
        return None;
    }
    Some(acc.into_iter().map(|l| l.into_iter().map(|x| x / &total).collect()).collect())
}

/// `(e, d)` is indivisible, where `d = mγ` with `γ` indivisible and `e` is the
/// degree forced by the torsion angles of any eigenvalues realizing `q`.
/// The result is checked against `l = m` for `l` the order of `q^γ`.
pub fn indivisibility_transfer(g: &StarGraph, d: &[i64], q: &[MultElement], m: i64, l: u64) -> Result<bool> {
    g.check(d)?;
    g.check_params(q)?;
    let content = d.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if m <= 0 || content != m {
        return Err(Error::Precondition(format!("d is not {m} times an indivisible vector")));
    }
    let gamma: DimVector = d.iter().map(|x| x / m).collect();
    if evaluate_char(q, &gamma)?.order_of() != Some(l) {
        return Err(Error::Precondition(format!("q^γ does not have order {l}")));
    }
    // base eigenvalues ξ_{[j,0]}: q_⋆ on the first leg and 1 elsewhere
    let typed = crate::spectral::star_to_typed(g, d);
    let (_, star) = strictness(&typed);
    let mut sum = BigRational::zero();
    for (j, &len) in g.legs().iter().enumerate() {
        let mut xi = if j == 0 { q[0].clone() } else { MultElement::one() };
        for i in 0..=len {
            if i > 0 {
                xi = q[g.vertex(j, i)].mul(&xi);
            }
            sum += angle_weight(&xi) * BigInt::from(star[j][i]);
        }
    }
    if g.legs().is_empty() {
        sum += angle_weight(&q[0]) * BigInt::from(d[0]);
    }
    if !is_integer(&sum) {
        return Err(Error::Precondition("q^d is not 1".into()));
    }
    let e = -sum.to_integer().to_i64().ok_or(Error::Overflow("degree"))?;
    let indivisible = e.gcd(&m) == 1;
    if indivisible != (l as i64 == m) {
        return Err(Error::Internal(format!(
            "(e, d) = ({e}, {}) indivisible = {indivisible} but l = {l}, m = {m}",
            g.format(d)
        )));
    }
    Ok(indivisible)
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightReport {
    pub betti: BettiDatum,
    pub dolbeault: DolbeaultDatum,
    pub e: i64,
    /// Betti block sizes reordered by weight, as a typed rank vector.
    pub c: Vec<Vec<i64>>,
    #[serde(serialize_with = "crate::rational_serde::typed")]
    pub anchor: TypedWeight,
    pub wall_count: usize,
    pub mode: WeightMode,
    #[serde(serialize_with = "crate::rational_serde::typed")]
    pub alpha: TypedWeight,
}

/// Betti data of a problem, with `β_{[j,i]} = i` along each flag.
pub fn betti_datum(problem: &DsProblem) -> BettiDatum {
    BettiDatum {
        legs: problem
            .classes_in_leg_order()
            .iter()
            .map(|cls| {
                cls.eigenvalues
                    .iter()
                    .zip(cls.multiplicities())
                    .enumerate()
                    .map(|(i, (xi, size))| BettiEntry {
                        beta: BigRational::from_integer(BigInt::from(i)),
                        xi: xi.clone(),
                        size,
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Dolbeault data, degree, walls and a certified weight for a problem.
pub fn weight_report(problem: &DsProblem, mode: WeightMode, seed: u64) -> Result<WeightReport> {
    let betti = betti_datum(problem);
    let dolbeault = betti_to_dolbeault(&betti)?;
    // refine the grouped flags to one index per Betti block, sorted by weight
    let mut anchor = Vec::new();
    let mut star = Vec::new();
    for leg in &betti.legs {
        let mut pieces: Vec<(BigRational, i64)> = leg.iter().map(|x| (angle_weight(&x.xi), x.size)).collect();
        pieces.sort_by(|a, b| a.0.cmp(&b.0));
        anchor.push(pieces.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
        star.push(pieces.iter().map(|p| p.1).collect::<Vec<_>>());
    }
    let c = from_star(&star);
    let sum = pair(&anchor, &star);
    if !is_integer(&sum) {
        return Err(Error::Precondition(format!("Σ α d* = {sum} is not an integer, so q^d ≠ 1")));
    }
    let e = -sum.to_integer().to_i64().ok_or(Error::Overflow("degree"))?;
    let wall_count = walls(e, &c)?.len();
    let alpha = pick_weight(e, &c, &anchor, mode, seed)?;
    Ok(WeightReport {
        betti,
        dolbeault,
        e,
        c,
        anchor,
        wall_count,
        mode,
        alpha,
    })
}

//! Membership in `Σ_{q,θ}`, admissible reflections and the classification of
//! dimension vectors that are not in `Σ_{q,θ}`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::CharLattice;
use crate::multgroup::{evaluate_char, MultElement, ParamVector};
use crate::root_system::{AffineDiagram, DimVector, StarGraph};
use crate::spectral::{build_problem, ClassSpec, DsProblem, WeightVector};
use crate::Fact;

pub fn theta_dot(theta: &[BigRational], g: &[i64]) -> BigRational {
    theta
        .iter()
        .zip(g)
        .filter(|(_, &k)| k != 0)
        .fold(BigRational::zero(), |acc, (t, &k)| acc + t * BigInt::from(k))
}

fn check_nonzero_nonneg(g: &StarGraph, d: &[i64]) -> Result<()> {
    g.check(d)?;
    if d.iter().any(|&x| x < 0) || d.iter().all(|&x| x == 0) {
        return Err(Error::Domain("expected a nonzero nonnegative vector".into()));
    }
    Ok(())
}

/// `γ` is a positive root with `q^γ = 1` and `θ·γ = 0`.
pub fn in_r_plus(g: &StarGraph, gamma: &[i64], q: &[MultElement], theta: &[BigRational]) -> Result<bool> {
    check_nonzero_nonneg(g, gamma)?;
    Ok(g.classify_root(gamma)?.is_root()
        && evaluate_char(q, gamma)?.is_one()
        && theta_dot(theta, gamma).is_zero())
}

/// `R^+_{q,θ} ∩ (0, d]` with the `p`-value of each element, in lexicographic order.
pub fn admissible_roots(
    g: &StarGraph,
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> Result<Vec<(DimVector, i64)>> {
    g.check(d)?;
    g.check_params(q)?;
    g.check_params(theta)?;
    let lattice = CharLattice::new(q, Some(theta))?;
    let mut out = Vec::new();
    for gamma in lattice.points_in_box(d)? {
        if g.classify_root(&gamma)?.is_root() {
            let p = g.p_value(&gamma)?;
            out.push((gamma, p));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SigmaWitness {
    /// `d` is admissible and none of the decompositions over `candidates` parts reaches `p(d)`.
    Exhausted { candidates: usize },
    /// A decomposition with `p(d) ≤ Σ p(parts)`.
    Decomposition {
        parts: Vec<DimVector>,
        p_whole: i64,
        p_parts: i64,
    },
    NotPositiveRoot,
    CharacterNotTrivial { value: String },
    ThetaNonzero { value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaCertificate {
    pub member: bool,
    pub witness: SigmaWitness,
}

/// Largest `Σ p` over decompositions of `d` into at least two of `parts`,
/// with the indices of one maximizing decomposition.
pub fn best_split(parts: &[(DimVector, i64)], d: &[i64]) -> Option<(i64, Vec<usize>)> {
    let mut memo = SplitMemo {
        parts,
        table: HashMap::new(),
    };
    let mut best: Option<(i64, usize)> = None;
    for (idx, (gamma, p)) in parts.iter().enumerate() {
        if gamma.as_slice() == d || !fits(gamma, d) {
            continue;
        }
        let rest = sub(d, gamma);
        if let Some(b) = memo.best(&rest) {
            if best.map_or(true, |(v, _)| p + b > v) {
                best = Some((p + b, idx));
            }
        }
    }
    let (value, first) = best?;
    let mut chosen = vec![first];
    let mut rest = sub(d, &parts[first].0);
    while rest.iter().any(|&x| x != 0) {
        let (_, idx) = memo.table[&rest].expect("reachable residual");
        chosen.push(idx);
        rest = sub(&rest, &parts[idx].0);
    }
    Some((value, chosen))
}

struct SplitMemo<'a> {
    parts: &'a [(DimVector, i64)],
    /// residual → best Σp over decompositions into ≥ 1 parts, with the first part used
    table: HashMap<DimVector, Option<(i64, usize)>>,
}

impl SplitMemo<'_> {
    fn best(&mut self, r: &[i64]) -> Option<i64> {
        if r.iter().all(|&x| x == 0) {
            return Some(0);
        }
        if let Some(v) = self.table.get(r) {
            return v.map(|x| x.0);
        }
        let mut best: Option<(i64, usize)> = None;
        for idx in 0..self.parts.len() {
            let (gamma, p) = &self.parts[idx];
            if !fits(gamma, r) {
                continue;
            }
            let rest = sub(r, gamma);
            if let Some(b) = self.best(&rest) {
                if best.map_or(true, |(v, _)| p + b > v) {
                    best = Some((p + b, idx));
                }
            }
        }
        self.table.insert(r.to_vec(), best);
        best.map(|x| x.0)
    }
}

fn fits(gamma: &[i64], r: &[i64]) -> bool {
    gamma.iter().zip(r).all(|(a, b)| a <= b)
}

fn sub(a: &[i64], b: &[i64]) -> DimVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Decides `d ∈ Σ_{q,θ}` exhaustively and returns a certificate either way.
pub fn sigma_membership(
    g: &StarGraph,
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> Result<SigmaCertificate> {
    check_nonzero_nonneg(g, d)?;
    g.check_params(q)?;
    g.check_params(theta)?;
    let non_member = |witness| SigmaCertificate {
        member: false,
        witness,
    };
    let ch = evaluate_char(q, d)?;
    if !ch.is_one() {
        return Ok(non_member(SigmaWitness::CharacterNotTrivial {
            value: ch.to_string(),
        }));
    }
    let td = theta_dot(theta, d);
    if !td.is_zero() {
        return Ok(non_member(SigmaWitness::ThetaNonzero {
            value: td.to_string(),
        }));
    }
    if !g.classify_root(d)?.is_root() {
        return Ok(non_member(SigmaWitness::NotPositiveRoot));
    }
    let parts = admissible_roots(g, d, q, theta)?;
    let p_whole = g.p_value(d)?;
    match best_split(&parts, d) {
        Some((p_parts, idxs)) if p_parts >= p_whole => {
            Ok(non_member(SigmaWitness::Decomposition {
                parts: idxs.into_iter().map(|i| parts[i].0.clone()).collect(),
                p_whole,
                p_parts,
            }))
        }
        _ => Ok(SigmaCertificate {
            member: true,
            witness: SigmaWitness::Exhausted {
                candidates: parts.len(),
            },
        }),
    }
}

/// `u_v(q)_w = q_v^{−(e_v,e_w)} q_w`.
pub fn reflect_params(g: &StarGraph, q: &[MultElement], v: usize) -> ParamVector {
    let mut out = q.to_vec();
    out[v] = q[v].inv();
    for w in g.neighbors(v) {
        out[w] = q[w].mul(&q[v]);
    }
    out
}

/// `r_v(θ)_w = θ_w − (e_v,e_w) θ_v`.
pub fn reflect_theta(g: &StarGraph, theta: &[BigRational], v: usize) -> WeightVector {
    let mut out = theta.to_vec();
    out[v] = -theta[v].clone();
    for w in g.neighbors(v) {
        out[w] = &theta[w] + &theta[v];
    }
    out
}

pub fn is_admissible(q: &[MultElement], theta: &[BigRational], v: usize) -> bool {
    !q[v].is_one() || !theta[v].is_zero()
}

/// Simultaneous reflection of `(q, d, θ)` at `v`; requires `q_v ≠ 1` or `θ_v ≠ 0`.
pub fn admissible_reflect(
    g: &StarGraph,
    q: &[MultElement],
    d: &[i64],
    theta: &[BigRational],
    v: usize,
) -> Result<(ParamVector, DimVector, WeightVector)> {
    g.check(d)?;
    g.check_params(q)?;
    g.check_params(theta)?;
    if v >= g.num_vertices() {
        return Err(Error::Domain(format!("vertex {v} out of range")));
    }
    if !is_admissible(q, theta, v) {
        return Err(Error::Precondition(format!(
            "reflection at {} is not admissible: q_v = 1 and θ_v = 0",
            g.vertex_name(v)
        )));
    }
    Ok((reflect_params(g, q, v), g.reflect(v, d)?, reflect_theta(g, theta, v)))
}

/// Parameters after a sequence of admissible reflections.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub q: ParamVector,
    pub d: DimVector,
    pub theta: WeightVector,
    pub trail: Vec<usize>,
}

impl Reduced {
    fn reflect(&mut self, g: &StarGraph, v: usize) -> Result<()> {
        let (q, d, t) = admissible_reflect(g, &self.q, &self.d, &self.theta, v)?;
        if d[v] < 0 {
            return Err(Error::Precondition(format!(
                "reflection at {} makes the dimension negative",
                g.vertex_name(v)
            )));
        }
        self.q = q;
        self.d = d;
        self.theta = t;
        self.trail.push(v);
        Ok(())
    }

    /// Maps a vector from the reduced coordinates back to the original ones.
    pub fn unwind(&self, g: &StarGraph, x: &[i64]) -> Result<DimVector> {
        let mut out = x.to_vec();
        for &v in self.trail.iter().rev() {
            out = g.reflect(v, &out)?;
        }
        Ok(out)
    }
}

/// Sweeps each leg with admissible reflections until `θ_{[j,i]} ≥ 0` for every `i > 0`.
pub fn normalize_theta(
    g: &StarGraph,
    q: &[MultElement],
    d: &[i64],
    theta: &[BigRational],
) -> Result<Reduced> {
    let mut r = Reduced {
        q: q.to_vec(),
        d: d.to_vec(),
        theta: theta.to_vec(),
        trail: Vec::new(),
    };
    let negative = |r: &Reduced, v: usize| r.theta[v] < BigRational::zero();
    for (j, &len) in g.legs().iter().enumerate() {
        while let Some(start) = (1..=len).rev().find(|&i| negative(&r, g.vertex(j, i))) {
            let mut i = start;
            loop {
                r.reflect(g, g.vertex(j, i))?;
                if i < len && negative(&r, g.vertex(j, i + 1)) {
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Kind {
    Sigma,
    /// `d = mδ` (up to admissible reflections) with `q^δ` of order `l`.
    Aff {
        m: i64,
        l: u64,
        delta: DimVector,
        diagram: AffineDiagram,
    },
    /// `d = e_∞ + mδ` (up to admissible reflections).
    AffInf {
        m: i64,
        delta: DimVector,
        infinity: DimVector,
        diagram: AffineDiagram,
    },
    NotInCriterion { reason: Reason },
}

impl Kind {
    pub fn label(&self) -> &'static str {
        match self {
            Kind::Sigma => "Sigma",
            Kind::Aff { .. } => "Aff",
            Kind::AffInf { .. } => "AffInf",
            Kind::NotInCriterion { .. } => "NotInCriterion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Reason {
    NotRoot,
    CharacterNotTrivial { value: String },
    ThetaNonzero { value: String },
    Decomposable { parts: Vec<DimVector> },
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub kind: Kind,
    /// Admissible reflections applied before matching the exceptional shapes.
    pub reflection_trail: Vec<usize>,
    pub certificate: SigmaCertificate,
}

pub fn classify(
    g: &StarGraph,
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> Result<Classification> {
    let certificate = sigma_membership(g, d, q, theta)?;
    let done = |kind, trail| {
        Ok(Classification {
            kind,
            reflection_trail: trail,
            certificate: certificate.clone(),
        })
    };
    let parts = match &certificate.witness {
        _ if certificate.member => return done(Kind::Sigma, vec![]),
        SigmaWitness::CharacterNotTrivial { value } => {
            let reason = Reason::CharacterNotTrivial { value: value.clone() };
            return done(Kind::NotInCriterion { reason }, vec![]);
        }
        SigmaWitness::ThetaNonzero { value } => {
            let reason = Reason::ThetaNonzero { value: value.clone() };
            return done(Kind::NotInCriterion { reason }, vec![]);
        }
        SigmaWitness::NotPositiveRoot => {
            return done(Kind::NotInCriterion { reason: Reason::NotRoot }, vec![]);
        }
        SigmaWitness::Decomposition { parts, .. } => parts.clone(),
        SigmaWitness::Exhausted { .. } => unreachable!("exhausted search means membership"),
    };
    let decomposable = Kind::NotInCriterion {
        reason: Reason::Decomposable { parts },
    };
    let Ok(mut r) = normalize_theta(g, q, d, theta) else {
        return done(decomposable, vec![]);
    };
    descend(g, &mut r)?;
    if let Some(kind) = match_exceptional(g, &r)? {
        return done(kind, r.trail);
    }
    done(decomposable, r.trail)
}

/// Admissible reflections at the smallest vertex with `(d, e_v) > 0` while possible.
fn descend(g: &StarGraph, r: &mut Reduced) -> Result<()> {
    loop {
        let next = (0..g.num_vertices())
            .find(|&v| g.pairing_simple(&r.d, v) > 0 && is_admissible(&r.q, &r.theta, v));
        let Some(v) = next else { return Ok(()) };
        if g.reflect(v, &r.d)?[v] < 0 {
            return Ok(());
        }
        r.reflect(g, v)?;
    }
}

fn match_exceptional(g: &StarGraph, r: &Reduced) -> Result<Option<Kind>> {
    if let Some(am) = g.affine_recognition(&r.d) {
        let qd = evaluate_char(&r.q, &am.delta)?;
        if let Some(l) = qd.order_of() {
            if am.multiple >= 2 && am.multiple % l as i64 == 0 && theta_dot(&r.theta, &am.delta).is_zero() {
                return Ok(Some(Kind::Aff {
                    m: am.multiple,
                    l,
                    delta: r.unwind(g, &am.delta)?,
                    diagram: am.diagram,
                }));
            }
        }
    }
    for (j, &len) in g.legs().iter().enumerate() {
        let Some(tip) = (1..=len).take_while(|&i| r.d[g.vertex(j, i)] > 0).last() else {
            continue;
        };
        let inf = g.vertex(j, tip);
        if tip < 2 || r.d[inf] != 1 {
            continue;
        }
        let mut rest = r.d.clone();
        rest[inf] = 0;
        let Some(am) = g.affine_recognition(&rest) else { continue };
        if am.multiple < 2 || am.delta[g.vertex(j, tip - 1)] != 1 {
            continue;
        }
        if r.q[inf].is_one()
            && evaluate_char(&r.q, &am.delta)?.is_one()
            && r.theta[inf].is_zero()
            && theta_dot(&r.theta, &am.delta).is_zero()
        {
            return Ok(Some(Kind::AffInf {
                m: am.multiple,
                delta: r.unwind(g, &am.delta)?,
                infinity: r.unwind(g, &g.unit(inf))?,
                diagram: am.diagram,
            }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub solvable: bool,
    pub problem: DsProblem,
    pub classification: Classification,
    pub statement: String,
    pub facts: Vec<Fact>,
}

pub const TAG_CRITERION: &str = "criterion:irreducible-iff-sigma";
pub const TAG_CHARACTER: &str = "necessary:determinant-product";
pub const TAG_AFF: &str = "nonexistence:isotropic-multiple";
pub const TAG_AFF_INF: &str = "nonexistence:flat-root";

/// End-to-end decision for a tuple of conjugacy classes.
pub fn ds_verdict(classes: &[ClassSpec], theta: Option<WeightVector>) -> Result<Verdict> {
    let mut problem = build_problem(classes)?;
    if let Some(t) = theta {
        problem.graph.check_params(&t)?;
        problem.theta = t;
    }
    let stability = if problem.theta.iter().all(|t| t.is_zero()) {
        "irreducible solution"
    } else {
        "θ-stable representation"
    };
    let c = classify(&problem.graph, &problem.d, &problem.q, &problem.theta)?;
    let mut facts = vec![Fact::new(
        TAG_CRITERION,
        format!("an {stability} exists if and only if d lies in Σ_{{q,θ}}"),
    )];
    let statement = match &c.kind {
        Kind::Sigma => format!("d ∈ Σ_{{q,θ}}: an {stability} exists"),
        Kind::Aff { m, l, diagram, .. } => {
            facts.push(Fact::new(
                TAG_AFF,
                format!(
                    "d is {m} times the null root of {} and q^δ has order {l} < {m} or the multiple is not in Σ; no {stability} exists",
                    diagram.name()
                ),
            ));
            format!("no {stability} exists (d = {m}δ on {}, q^δ of order {l})", diagram.name())
        }
        Kind::AffInf { m, diagram, .. } => {
            facts.push(Fact::new(
                TAG_AFF_INF,
                format!("d = e_∞ + {m}δ on {} with m ≥ 2 is a flat root; no {stability} exists", diagram.name()),
            ));
            format!("no {stability} exists (d = e_∞ + {m}δ over {})", diagram.name())
        }
        Kind::NotInCriterion { reason } => match reason {
            Reason::CharacterNotTrivial { value } => {
                facts.push(Fact::new(
                    TAG_CHARACTER,
                    "the product of the determinants must be 1 for any solution",
                ));
                format!("no solution exists: q^d = {value} ≠ 1")
            }
            Reason::ThetaNonzero { value } => format!("no {stability} exists: θ·d = {value} ≠ 0"),
            Reason::NotRoot => format!("no {stability} exists: d is not a root"),
            Reason::Decomposable { .. } => {
                format!("no {stability} exists: d admits a decomposition with p(d) ≤ Σ p(parts)")
            }
        },
    };
    Ok(Verdict {
        solvable: c.kind == Kind::Sigma,
        problem,
        classification: c,
        statement,
        facts,
    })
}

//! Minimal `Σ_{q,θ}`-decompositions and the product structure of the moduli
//! space they induce.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multgroup::{evaluate_char, MultElement};
use crate::root_system::{DimVector, StarGraph};
use crate::sigma::{is_admissible, reflect_params, reflect_theta, sigma_membership, theta_dot};
use crate::spectral::star_to_typed;
use crate::Fact;

pub const TAG_NORMAL: &str = "NORMAL";
pub const TAG_CONNECTED: &str = "CONNECTED";
pub const TAG_SYM_ISO: &str = "SYM-ISO";
pub const TAG_PRODUCT: &str = "PRODUCT";
pub const TAG_STRATUM: &str = "STRATUM-DIM";

#[derive(Debug, Clone, Serialize)]
pub struct DecompReport {
    /// Distinct parts with their multiplicities.
    pub parts: Vec<(DimVector, i64)>,
    pub is_minimal: bool,
    pub moduli_dimension: i64,
    pub factorization: Vec<String>,
    pub notes: Vec<Fact>,
}

/// The parts of the minimal `Σ_{q,θ}`-decomposition of `d`, with repetition.
pub fn minimal_decomposition(
    g: &StarGraph,
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> Result<Vec<DimVector>> {
    g.check(d)?;
    g.check_params(q)?;
    g.check_params(theta)?;
    if d.iter().any(|&x| x < 0) || d.iter().all(|&x| x == 0) {
        return Err(Error::Domain("expected a nonzero nonnegative vector".into()));
    }
    let ch = evaluate_char(q, d)?;
    if !ch.is_one() {
        return Err(Error::Precondition(format!("q^d = {ch} ≠ 1")));
    }
    let td = theta_dot(theta, d);
    if !td.is_zero() {
        return Err(Error::Precondition(format!("θ·d = {td} ≠ 0")));
    }
    let mut parts = recurse(g, d, q, theta)?;
    parts.sort_by(|a, b| b.cmp(a));
    Ok(parts)
}

fn recurse(g: &StarGraph, d: &[i64], q: &[MultElement], theta: &[BigRational]) -> Result<Vec<DimVector>> {
    let n = g.num_vertices();
    let positive: Vec<usize> = (0..n).filter(|&v| g.pairing_simple(d, v) > 0).collect();

    if let Some(&v) = positive.iter().find(|&&v| is_admissible(q, theta, v)) {
        let reflected = g.reflect(v, d)?;
        if reflected[v] < 0 {
            return Err(Error::NoDecomposition(format!(
                "{} reflects to a negative vector at {}",
                g.format(d),
                g.vertex_name(v)
            )));
        }
        let inner = recurse(g, &reflected, &reflect_params(g, q, v), &reflect_theta(g, theta, v))?;
        return inner.iter().map(|p| g.reflect(v, p)).collect();
    }

    if let Some(&v) = positive.first() {
        let unit = g.unit(v);
        if d == unit.as_slice() {
            return Ok(vec![unit]);
        }
        let mut rest = d.to_vec();
        rest[v] -= 1;
        let mut out = recurse(g, &rest, q, theta)?;
        out.push(unit);
        return Ok(out);
    }

    let comps = g.components(d);
    if comps.len() > 1 {
        let mut out = Vec::new();
        for c in comps {
            check_part(g, &c, q, theta)?;
            out.extend(recurse(g, &c, q, theta)?);
        }
        return Ok(out);
    }

    if sigma_membership(g, d, q, theta)?.member {
        return Ok(vec![d.to_vec()]);
    }

    if let Some(am) = g.affine_recognition(d) {
        if let Some(l) = evaluate_char(q, &am.delta)?.order_of() {
            if am.multiple % l as i64 == 0 {
                let block: DimVector = am.delta.iter().map(|x| x * l as i64).collect();
                return Ok(vec![block; (am.multiple / l as i64) as usize]);
            }
        }
    }

    for (a, b) in g.edges() {
        if d[a] != 1 || d[b] != 1 {
            continue;
        }
        // every edge of a star is a bridge; b is the endpoint farther from the center
        let mut outer = vec![0; n];
        let crate::root_system::Vertex::Leg { leg, pos } = g.locate(b) else {
            continue;
        };
        for i in pos..=g.legs()[leg] {
            let w = g.vertex(leg, i);
            outer[w] = d[w];
        }
        let inner: DimVector = d.iter().zip(&outer).map(|(x, y)| x - y).collect();
        if check_part(g, &outer, q, theta).is_ok() && check_part(g, &inner, q, theta).is_ok() {
            let mut out = recurse(g, &outer, q, theta)?;
            out.extend(recurse(g, &inner, q, theta)?);
            return Ok(out);
        }
    }

    for (j, &len) in g.legs().iter().enumerate() {
        let Some(tip) = (1..=len).take_while(|&i| d[g.vertex(j, i)] > 0).last() else {
            continue;
        };
        let inf = g.vertex(j, tip);
        if tip < 2 || d[inf] != 1 || !q[inf].is_one() || !theta[inf].is_zero() {
            continue;
        }
        let mut rest = d.to_vec();
        rest[inf] = 0;
        let Some(am) = g.affine_recognition(&rest) else { continue };
        if am.multiple >= 2 && am.delta[g.vertex(j, tip - 1)] == 1 && evaluate_char(q, &am.delta)?.is_one() {
            let mut out = recurse(g, &rest, q, theta)?;
            out.push(g.unit(inf));
            return Ok(out);
        }
    }

    Err(Error::NoDecomposition(format!(
        "{} matches none of the reducible shapes and is not in Σ_{{q,θ}}",
        g.format(d)
    )))
}

fn check_part(g: &StarGraph, d: &[i64], q: &[MultElement], theta: &[BigRational]) -> Result<()> {
    if d.iter().all(|&x| x == 0) {
        return Err(Error::NoDecomposition("empty part".into()));
    }
    if !evaluate_char(q, d)?.is_one() || !theta_dot(theta, d).is_zero() {
        return Err(Error::NoDecomposition(format!(
            "{} does not satisfy q^γ = 1 and θ·γ = 0",
            g.format(d)
        )));
    }
    Ok(())
}

/// `Σ 2 p(d^(i))` over the listed strata parts; the labels are ignored.
pub fn stratum_dimension(g: &StarGraph, parts: &[(i64, DimVector)]) -> Result<i64> {
    if parts.is_empty() {
        return Err(Error::Domain("at least one part is required".into()));
    }
    parts.iter().try_fold(0i64, |acc, (_, d)| {
        let p = g.p_value(d)?;
        acc.checked_add(2 * p).ok_or(Error::Overflow("stratum dimension"))
    })
}

pub fn moduli_report(
    g: &StarGraph,
    d: &[i64],
    q: &[MultElement],
    theta: &[BigRational],
) -> Result<DecompReport> {
    let flat = minimal_decomposition(g, d, q, theta)?;
    let mut grouped: BTreeMap<DimVector, i64> = BTreeMap::new();
    for p in &flat {
        *grouped.entry(p.clone()).or_default() += 1;
    }
    let parts: Vec<(DimVector, i64)> = grouped.into_iter().rev().collect();
    let mut is_minimal = true;
    let mut moduli_dimension = 0i64;
    let mut factorization = Vec::new();
    let mut notes = vec![
        Fact::new(
            TAG_PRODUCT,
            "taking direct sums identifies the product of symmetric powers with the moduli space",
        ),
        Fact::new(TAG_NORMAL, "the moduli space is normal if nonempty"),
    ];
    for (part, m) in &parts {
        is_minimal &= sigma_membership(g, part, q, theta)?.member;
        let p = g.p_value(part)?;
        moduli_dimension += m * 2 * p;
        let factor = format!("M(q, {})", g.format(part));
        factorization.push(if *m == 1 {
            factor
        } else {
            format!("Sym^{m} {factor}")
        });
        if *m > 1 && p == 1 {
            notes.push(Fact::new(
                TAG_SYM_ISO,
                format!("Sym^{m} M(q, {0}) ≅ M(q, {m}·{0}), which is connected", g.format(part)),
            ));
        }
        if connected_part(g, part, q)? {
            notes.push(Fact::new(
                TAG_CONNECTED,
                format!("M(q, {}) is connected", g.format(part)),
            ));
        }
    }
    notes.push(Fact::new(
        TAG_STRATUM,
        format!("dimension Σ m_t·2p(d^(t)) = {moduli_dimension}"),
    ));
    Ok(DecompReport {
        parts,
        is_minimal,
        moduli_dimension,
        factorization,
        notes,
    })
}

/// Strictly decreasing legs and `d = m d₀` with `q^{d₀}` a primitive `m`-th root of unity.
fn connected_part(g: &StarGraph, d: &[i64], q: &[MultElement]) -> Result<bool> {
    let typed = star_to_typed(g, d);
    if !typed
        .iter()
        .all(|leg| leg.windows(2).all(|w| w[0] > w[1]) && leg.last().map_or(false, |&x| x > 0))
    {
        return Ok(false);
    }
    let m = d.iter().fold(0i64, |acc, &x| num_integer::gcd(acc, x));
    let base: DimVector = d.iter().map(|x| x / m).collect();
    Ok(evaluate_char(q, &base)?.order_of() == Some(m as u64))
}

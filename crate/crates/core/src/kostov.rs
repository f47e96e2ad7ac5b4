//! Semisimple tuples on the affine star diagrams whose dimension vector is a
//! multiple of the null root: the standard nonexistence fixtures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::multgroup::{almost_generic_check, evaluate_char, MultElement, ParamVector};
use crate::root_system::{AffineDiagram, DimVector, StarGraph};
use crate::spectral::ClassSpec;

#[derive(Debug, Clone, Serialize)]
pub struct KostovFamily {
    pub diagram: AffineDiagram,
    pub m: i64,
    /// Order of `q^δ`.
    pub l: u64,
    pub q: ParamVector,
    pub classes: Vec<ClassSpec>,
}

impl KostovFamily {
    pub fn graph(&self) -> StarGraph {
        self.diagram.graph()
    }

    pub fn dimension_vector(&self) -> DimVector {
        self.diagram.null_vector().iter().map(|x| x * self.m).collect()
    }
}

/// Parameters from independent symbols `t_v` with `q^δ = ζ_l`: the tip of the
/// first arm absorbs the relation.
pub fn generic_parameters(diagram: AffineDiagram, m: i64, l: u64) -> Result<ParamVector> {
    if m <= 0 {
        return Err(Error::validation("/m", "m must be positive"));
    }
    if l == 0 || m % l as i64 != 0 {
        return Err(Error::validation("/l", format!("l = {l} must divide m = {m}")));
    }
    let g = diagram.graph();
    let delta = diagram.null_vector();
    let tip = g.vertex(0, diagram.arms()[0]);
    debug_assert_eq!(delta[tip], 1);
    let mut q: ParamVector = (0..g.num_vertices())
        .map(|v| MultElement::symbol(&symbol_name(&g, v)))
        .collect();
    let mut w = MultElement::zeta(l, 1);
    for v in (0..q.len()).filter(|&v| v != tip) {
        w = w.mul(&q[v].pow(-delta[v]));
    }
    q[tip] = w;
    Ok(q)
}

fn symbol_name(g: &StarGraph, v: usize) -> String {
    match g.locate(v) {
        crate::root_system::Vertex::Star => "t".into(),
        crate::root_system::Vertex::Leg { leg, pos } => format!("t{}_{}", leg + 1, pos),
    }
}

pub fn generate(diagram: AffineDiagram, m: i64, q: &[MultElement]) -> Result<KostovFamily> {
    if m <= 0 {
        return Err(Error::validation("/m", "m must be positive"));
    }
    let g = diagram.graph();
    g.check_params(q)?;
    if let Some(v) = q.iter().position(|x| x.is_one()) {
        return Err(Error::validation(
            format!("/q/{}", g.vertex_name(v)),
            "every parameter must differ from 1",
        ));
    }
    let delta = diagram.null_vector();
    let qd = evaluate_char(q, &delta)?;
    let l = match qd.order_of() {
        Some(l) if m % l as i64 == 0 => l,
        _ => {
            return Err(Error::validation(
                "/q",
                format!("q^{{mδ}} ≠ 1: q^δ = {qd} and m = {m}"),
            ))
        }
    };
    let arms = g.legs();
    let k = arms.len();
    // base eigenvalues a_1, ..., a_{k-1} free; the last one fixes ∏ ξ_{[j,0]} = q_⋆
    let mut base: Vec<MultElement> = (1..k).map(|j| MultElement::symbol(&format!("a{j}"))).collect();
    let last = base.iter().fold(q[0].clone(), |acc, a| acc.div(a));
    base.push(last);
    let mut classes = Vec::with_capacity(k);
    for (j, &len) in arms.iter().enumerate() {
        let mut xi = base[j].clone();
        let mut pairs = Vec::with_capacity(len + 1);
        for i in 0..=len {
            if i > 0 {
                xi = q[g.vertex(j, i)].mul(&xi);
            }
            let here = delta[g.vertex(j, i)];
            let next = if i < len { delta[g.vertex(j, i + 1)] } else { 0 };
            pairs.push((xi.clone(), m * (here - next)));
        }
        classes.push(ClassSpec::semisimple(pairs)?);
    }
    Ok(KostovFamily {
        diagram,
        m,
        l,
        q: q.to_vec(),
        classes,
    })
}

/// `Σ_j dim C_j = 2n²` for semisimple classes, `dim C = n² − Σ mult²`.
pub fn kappa_check(family: &KostovFamily) -> bool {
    let Some(n) = family.classes.first().map(|c| c.n()) else {
        return false;
    };
    let total: i64 = family
        .classes
        .iter()
        .map(|c| n * n - c.multiplicities().iter().map(|x| x * x).sum::<i64>())
        .sum();
    total == 2 * n * n
}

/// The only `0 < γ ≤ mδ` with `q^γ = 1` are multiples of `lδ`.
pub fn almost_generic_family_check(family: &KostovFamily) -> Result<bool> {
    almost_generic_check(&family.q, &family.dimension_vector())
}

//! From conjugacy-class data to star-shaped quiver data, plus the
//! bookkeeping on types `τ(ν)`: strictness, `d*` and degenerations.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multgroup::{evaluate_char, MultElement, ParamVector};
use crate::root_system::{DimVector, StarGraph};

/// A conjugacy class closure in `GL_n` described by eigenvalues `ξ_0..ξ_ν`
/// and ranks `d_i = rk (A−ξ_0)⋯(A−ξ_{i−1})`, with `d_0 = n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassSpec {
    pub eigenvalues: Vec<MultElement>,
    pub ranks: Vec<i64>,
    pub semisimple: bool,
}

impl ClassSpec {
    pub fn new(eigenvalues: Vec<MultElement>, ranks: Vec<i64>) -> Result<Self> {
        let c = ClassSpec {
            eigenvalues,
            ranks,
            semisimple: false,
        };
        c.validate()?;
        Ok(c)
    }

    /// Semisimple class from `(eigenvalue, multiplicity)` pairs with distinct eigenvalues.
    pub fn semisimple(pairs: Vec<(MultElement, i64)>) -> Result<Self> {
        for (i, (x, m)) in pairs.iter().enumerate() {
            if *m <= 0 {
                return Err(Error::validation(
                    format!("/multiplicities/{i}"),
                    "multiplicities must be positive",
                ));
            }
            if pairs[..i].iter().any(|(y, _)| y == x) {
                return Err(Error::validation(
                    format!("/eigenvalues/{i}"),
                    format!("eigenvalue {x} repeated in a semisimple class"),
                ));
            }
        }
        let n: i64 = pairs.iter().map(|p| p.1).sum();
        let mut ranks = Vec::with_capacity(pairs.len());
        let mut r = n;
        for (_, m) in &pairs {
            ranks.push(r);
            r -= m;
        }
        let c = ClassSpec {
            eigenvalues: pairs.into_iter().map(|p| p.0).collect(),
            ranks,
            semisimple: true,
        };
        c.validate()?;
        Ok(c)
    }

    /// Scalar class `λ·Id_n`.
    pub fn scalar(lambda: MultElement, n: i64) -> Result<Self> {
        Self::semisimple(vec![(lambda, n)])
    }

    fn validate(&self) -> Result<()> {
        if self.eigenvalues.is_empty() || self.eigenvalues.len() != self.ranks.len() {
            return Err(Error::validation(
                "/ranks",
                "one rank per eigenvalue is required",
            ));
        }
        if self.ranks[0] <= 0 {
            return Err(Error::validation("/ranks/0", "n must be positive"));
        }
        for i in 1..self.ranks.len() {
            if self.ranks[i] >= self.ranks[i - 1] || self.ranks[i] <= 0 {
                return Err(Error::validation(
                    format!("/ranks/{i}"),
                    "ranks must be positive and strictly decreasing",
                ));
            }
        }
        // Within a run of equal consecutive eigenvalues the numbers d*_i count
        // Jordan blocks of size ≥ 1, ≥ 2, ..., so they cannot increase.
        let star = self.multiplicities();
        for i in 1..self.eigenvalues.len() {
            if self.eigenvalues[i] == self.eigenvalues[i - 1] {
                if self.semisimple {
                    return Err(Error::validation(
                        format!("/eigenvalues/{i}"),
                        "a semisimple class cannot repeat an eigenvalue",
                    ));
                }
                if star[i] > star[i - 1] {
                    return Err(Error::validation(
                        format!("/ranks/{i}"),
                        "rank profile is not realizable: a repeated eigenvalue gains Jordan blocks",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> i64 {
        self.ranks[0]
    }

    pub fn nu(&self) -> usize {
        self.ranks.len() - 1
    }

    /// `d*_i = d_i − d_{i+1}`.
    pub fn multiplicities(&self) -> Vec<i64> {
        (0..self.ranks.len())
            .map(|i| self.ranks[i] - self.ranks.get(i + 1).copied().unwrap_or(0))
            .collect()
    }

    /// Eigenvalues listed with multiplicity `d*_i`; their product is `det A`.
    pub fn eigenvalue_multiset(&self) -> Vec<MultElement> {
        self.eigenvalues
            .iter()
            .zip(self.multiplicities())
            .flat_map(|(x, m)| std::iter::repeat(x.clone()).take(m as usize))
            .collect()
    }

    pub fn determinant(&self) -> MultElement {
        self.eigenvalues
            .iter()
            .zip(self.multiplicities())
            .fold(MultElement::one(), |acc, (x, m)| acc.mul(&x.pow(m)))
    }
}

/// Leg data of one class: dimensions `d_0..d_ν` and parameters
/// `q_0 = ξ_0`, `q_i = ξ_i ξ_{i−1}^{-1}`.
pub fn class_to_leg(c: &ClassSpec) -> (Vec<i64>, Vec<MultElement>) {
    let mut q = Vec::with_capacity(c.eigenvalues.len());
    q.push(c.eigenvalues[0].clone());
    for i in 1..c.eigenvalues.len() {
        q.push(c.eigenvalues[i].div(&c.eigenvalues[i - 1]));
    }
    debug_assert_eq!(
        evaluate_char(&q, &c.ranks).unwrap(),
        c.determinant(),
        "leg character must equal the determinant"
    );
    (c.ranks.clone(), q)
}

/// Inverse of the parameter half of [`class_to_leg`].
pub fn leg_to_eigenvalues(q: &[MultElement]) -> Vec<MultElement> {
    let mut out: Vec<MultElement> = Vec::with_capacity(q.len());
    for (i, x) in q.iter().enumerate() {
        out.push(if i == 0 { x.clone() } else { x.mul(&out[i - 1]) });
    }
    out
}

/// Stability parameter over graph vertices.
pub type WeightVector = Vec<BigRational>;

#[derive(Debug, Clone, Serialize)]
pub struct DsProblem {
    pub graph: StarGraph,
    pub d: DimVector,
    pub q: ParamVector,
    #[serde(skip)]
    pub theta: WeightVector,
    pub classes: Vec<ClassSpec>,
    /// `q^d = 1`, equivalently the product of the determinants is one.
    pub char_trivial: bool,
}

impl DsProblem {
    pub fn n(&self) -> i64 {
        self.d[0]
    }

    /// Canonical leg `j` belongs to the class at this position of the input.
    pub fn class_of_leg(&self, j: usize) -> usize {
        self.graph.leg_order()[j]
    }

    /// The input class indices listed in canonical leg order.
    pub fn classes_in_leg_order(&self) -> Vec<&ClassSpec> {
        self.graph.leg_order().iter().map(|&i| &self.classes[i]).collect()
    }
}

/// Assembles the star-shaped quiver by identifying all vertices `[j,0]`.
pub fn build_problem(classes: &[ClassSpec]) -> Result<DsProblem> {
    let Some(first) = classes.first() else {
        return Err(Error::validation("/classes", "at least one class is required"));
    };
    let n = first.n();
    for (j, c) in classes.iter().enumerate() {
        if c.n() != n {
            return Err(Error::validation(
                format!("/classes/{j}/n"),
                format!("class has size {} but the first class has size {n}", c.n()),
            ));
        }
    }
    let legs: Vec<usize> = classes.iter().map(|c| c.nu()).collect();
    let graph = StarGraph::new(&legs);
    let nv = graph.num_vertices();
    let mut d = vec![0; nv];
    let mut q = vec![MultElement::one(); nv];
    d[0] = n;
    for (j, &orig) in graph.leg_order().iter().enumerate() {
        let (dims, params) = class_to_leg(&classes[orig]);
        q[0] = q[0].mul(&params[0]);
        for i in 1..dims.len() {
            let v = graph.vertex(j, i);
            d[v] = dims[i];
            q[v] = params[i].clone();
        }
    }
    let char_trivial = evaluate_char(&q, &d)?.is_one();
    Ok(DsProblem {
        theta: vec![BigRational::zero(); nv],
        graph,
        d,
        q,
        classes: classes.to_vec(),
        char_trivial,
    })
}

/// Per-puncture flag lengths; the index set is `{[j,i] : 0 ≤ i ≤ ν_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeShape {
    pub nu: Vec<usize>,
}

impl TypeShape {
    pub fn of_graph(g: &StarGraph) -> Self {
        TypeShape {
            nu: g.legs().to_vec(),
        }
    }

    pub fn check<T>(&self, v: &[Vec<T>]) -> Result<()> {
        if v.len() != self.nu.len() || v.iter().zip(&self.nu).any(|(x, &n)| x.len() != n + 1) {
            return Err(Error::Domain("vector does not match the type".into()));
        }
        Ok(())
    }
}

/// Reads a star-graph vector as a vector over `τ(ν)`: entry `[j,0]` is the centre.
pub fn star_to_typed(g: &StarGraph, d: &[i64]) -> Vec<Vec<i64>> {
    g.legs()
        .iter()
        .enumerate()
        .map(|(j, &len)| (0..=len).map(|i| d[g.vertex(j, i)]).collect())
        .collect()
}

/// `(is_strict, d*)` with `d*_{[j,i]} = d_{[j,i]} − d_{[j,i+1]}`.
pub fn strictness(d: &[Vec<i64>]) -> (bool, Vec<Vec<i64>>) {
    let star: Vec<Vec<i64>> = d
        .iter()
        .map(|leg| {
            (0..leg.len())
                .map(|i| leg[i] - leg.get(i + 1).copied().unwrap_or(0))
                .collect()
        })
        .collect();
    let strict = star.iter().flatten().all(|&x| x >= 0);
    (strict, star)
}

/// Rebuilds `d` from `d*` by suffix sums.
pub fn from_star(star: &[Vec<i64>]) -> Vec<Vec<i64>> {
    star.iter()
        .map(|leg| {
            let mut out = vec![0; leg.len()];
            let mut acc = 0;
            for i in (0..leg.len()).rev() {
                acc += leg[i];
                out[i] = acc;
            }
            out
        })
        .collect()
}

/// A degeneration `σ : τ(μ) → τ(ν)`: per puncture an increasing map with `σ(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Degeneration {
    maps: Vec<Vec<usize>>,
    target: Vec<usize>,
}

impl Degeneration {
    pub fn new(maps: Vec<Vec<usize>>, target: &TypeShape) -> Result<Self> {
        if maps.len() != target.nu.len() {
            return Err(Error::validation("/sigma", "one map per puncture is required"));
        }
        for (j, m) in maps.iter().enumerate() {
            if m.first() != Some(&0) {
                return Err(Error::validation(format!("/sigma/{j}/0"), "σ([j,0]) must be [j,0]"));
            }
            for i in 1..m.len() {
                if m[i] <= m[i - 1] {
                    return Err(Error::validation(format!("/sigma/{j}/{i}"), "σ must be increasing"));
                }
            }
            if *m.last().unwrap() > target.nu[j] {
                return Err(Error::validation(
                    format!("/sigma/{j}"),
                    "σ leaves the target type",
                ));
            }
        }
        Ok(Degeneration {
            maps,
            target: target.nu.clone(),
        })
    }

    pub fn identity(shape: &TypeShape) -> Self {
        Degeneration {
            maps: shape.nu.iter().map(|&n| (0..=n).collect()).collect(),
            target: shape.nu.clone(),
        }
    }

    pub fn source(&self) -> TypeShape {
        TypeShape {
            nu: self.maps.iter().map(|m| m.len() - 1).collect(),
        }
    }

    pub fn target(&self) -> TypeShape {
        TypeShape {
            nu: self.target.clone(),
        }
    }

    pub fn map(&self, j: usize, i: usize) -> usize {
        self.maps[j][i]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Degeneration) -> Result<Degeneration> {
        if inner.target != self.source().nu {
            return Err(Error::Domain("degenerations are not composable".into()));
        }
        Ok(Degeneration {
            maps: inner
                .maps
                .iter()
                .enumerate()
                .map(|(j, m)| m.iter().map(|&i| self.maps[j][i]).collect())
                .collect(),
            target: self.target.clone(),
        })
    }
}

/// Pullback `(σ*d)_{[j,i]} = d_{[j,σ(i)]}`.
pub fn degenerate_type(sigma: &Degeneration, d: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    sigma.target().check(d)?;
    Ok(sigma
        .maps
        .iter()
        .enumerate()
        .map(|(j, m)| m.iter().map(|&i| d[j][i]).collect())
        .collect())
}

/// Along each leg, inside every maximal run of equal consecutive
/// eigenvalues (`q_{[j,i]} = 1`), the numbers `d*` do not increase.
pub fn char_compat(g: &StarGraph, d: &[i64], q: &[MultElement]) -> Result<bool> {
    g.check(d)?;
    g.check_params(q)?;
    let typed = star_to_typed(g, d);
    let (_, star) = strictness(&typed);
    for (j, &len) in g.legs().iter().enumerate() {
        for i in 1..=len {
            if q[g.vertex(j, i)].is_one() && star[j][i] > star[j][i - 1] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl StarGraph {
    pub fn check_params<T>(&self, q: &[T]) -> Result<()> {
        if q.len() != self.num_vertices() {
            return Err(Error::Mismatch {
                expected: self.num_vertices(),
                got: q.len(),
            });
        }
        Ok(())
    }
}

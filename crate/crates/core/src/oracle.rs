//! Numerical search for `A_1 ⋯ A_k = Id` with each `A_j` in a prescribed
//! conjugacy class, and a Burnside test for irreducibility of what it finds.
//!
//! `A_1` is pinned to a canonical representative; every other factor is
//! `g_j C_j g_j^{-1}`. A damped Gauss-Newton iteration updates
//! `g_j ← (I + X_j) g_j`, linearizing the product in the `X_j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::multgroup::{Generator, MultElement};
use crate::spectral::ClassSpec;

pub type CMatrix = DMatrix<Complex64>;

/// Numerical values for the free generators of the eigenvalues.
#[derive(Debug, Clone, Default)]
pub struct Binding {
    symbols: BTreeMap<String, Complex64>,
}

impl Binding {
    /// Random unit-modulus values for every symbol in `classes`.
    pub fn random(classes: &[ClassSpec], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut names: Vec<&str> = classes
            .iter()
            .flat_map(|c| c.eigenvalues.iter())
            .flat_map(|x| x.symbols())
            .collect();
        names.sort_unstable();
        names.dedup();
        let symbols = names
            .into_iter()
            .map(|s| (s.to_string(), Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI))))
            .collect();
        Binding { symbols }
    }

    pub fn with_symbol(mut self, name: &str, value: Complex64) -> Self {
        self.symbols.insert(name.to_string(), value);
        self
    }

    pub fn eval(&self, x: &MultElement) -> Result<Complex64> {
        let (n, a) = x.torsion();
        let mut out = Complex64::from_polar(1.0, 2.0 * PI * a as f64 / n as f64);
        for (g, &k) in x.free_exponents() {
            let base = match g {
                Generator::Prime(p) => Complex64::new(*p as f64, 0.0),
                Generator::Symbol(s) => *self
                    .symbols
                    .get(s)
                    .ok_or_else(|| Error::Domain(format!("symbol {s} has no value")))?,
            };
            out *= base.powi(k as i32);
        }
        Ok(out)
    }
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical ranks of `∏_{j<i}(A − ξ_j)` for `i = 1..=ν+1`.
fn rank_profile(a: &CMatrix, eig: &[Complex64], rank_tol: f64) -> Vec<usize> {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let mut p = id.clone();
    let mut ranks = Vec::with_capacity(eig.len());
    for &x in eig {
        p = &p * (a - &id * x);
        let s = singular_values(&p);
        let scale = s.first().copied().unwrap_or(0.0).max(1.0);
        ranks.push(s.iter().filter(|&&v| v > rank_tol * scale).count());
    }
    ranks
}

/// Largest relative singular value of `∏_{j<i}(A − ξ_j)` beyond the prescribed rank.
pub fn class_residual(a: &CMatrix, spec: &ClassSpec, eig: &[Complex64]) -> f64 {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    let mut p = id.clone();
    let mut worst: f64 = 0.0;
    for (i, &x) in eig.iter().enumerate() {
        p = &p * (a - &id * x);
        let target = spec.ranks.get(i + 1).copied().unwrap_or(0) as usize;
        let s = singular_values(&p);
        let scale = s.first().copied().unwrap_or(0.0).max(1.0);
        if let Some(v) = s.get(target) {
            worst = worst.max(v / scale);
        }
    }
    worst
}

/// Whether the numerical rank profile of `a` matches `spec` exactly.
pub fn matches_class(a: &CMatrix, spec: &ClassSpec, eig: &[Complex64], rank_tol: f64) -> bool {
    rank_profile(a, eig, rank_tol)
        .iter()
        .enumerate()
        .all(|(i, &r)| r as i64 == spec.ranks.get(i + 1).copied().unwrap_or(0))
}

/// Block upper bidiagonal matrix with diagonal blocks `ξ_i·Id` of size `d*_i`
/// and partial identities coupling consecutive blocks; diagonal when semisimple.
pub fn canonical_representative(spec: &ClassSpec, eig: &[Complex64]) -> Result<CMatrix> {
    if eig.len() != spec.eigenvalues.len() {
        return Err(Error::Mismatch {
            expected: spec.eigenvalues.len(),
            got: eig.len(),
        });
    }
    let n = spec.n() as usize;
    let sizes: Vec<usize> = spec.multiplicities().iter().map(|&m| m as usize).collect();
    let mut offsets = vec![0usize];
    for s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let mut a = CMatrix::zeros(n, n);
    for (i, &x) in eig.iter().enumerate() {
        for r in offsets[i]..offsets[i + 1] {
            a[(r, r)] = x;
        }
        if !spec.semisimple && i + 1 < sizes.len() {
            for t in 0..sizes[i].min(sizes[i + 1]) {
                a[(offsets[i] + t, offsets[i + 1] + t)] = Complex64::new(1.0, 0.0);
            }
        }
    }
    if !matches_class(&a, spec, eig, 1e-8) {
        return Err(Error::Internal(format!(
            "canonical representative misses the rank profile {:?}",
            spec.ranks
        )));
    }
    Ok(a)
}

/// Dimension of the unital algebra generated by `mats`, by orthogonalizing
/// words breadth first.
pub fn burnside_dim(mats: &[CMatrix], tol: f64) -> usize {
    let Some(first) = mats.first() else { return 0 };
    let n = first.nrows();
    let full = n * n;
    let mut basis: Vec<CMatrix> = Vec::new();
    let mut frontier = vec![CMatrix::identity(n, n)];
    let push = |m: CMatrix, basis: &mut Vec<CMatrix>| -> Option<CMatrix> {
        let norm = m.norm();
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        let mut v = m / Complex64::new(norm, 0.0);
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let rest = v.norm();
        if rest > tol {
            let v = v / Complex64::new(rest, 0.0);
            basis.push(v.clone());
            Some(v)
        } else {
            None
        }
    };
    let id = frontier[0].clone();
    push(id, &mut basis);
    while !frontier.is_empty() && basis.len() < full {
        let mut next = Vec::new();
        for w in &frontier {
            for a in mats {
                if let Some(v) = push(a * w, &mut basis) {
                    next.push(v);
                }
                if basis.len() == full {
                    return full;
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionWitness {
    #[serde(serialize_with = "serialize_matrices")]
    pub matrices: Vec<CMatrix>,
    pub residual: f64,
    pub class_residuals: Vec<f64>,
    pub burnside_dim: usize,
    pub irreducible: bool,
    pub restart: usize,
}

fn serialize_matrices<S: Serializer>(mats: &[CMatrix], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Vec<[f64; 2]>>> = mats
        .iter()
        .map(|m| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                .collect()
        })
        .collect();
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for m in &rows {
        seq.serialize_element(m)?;
    }
    seq.end()
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub tol: f64,
    pub seed: u64,
    /// Relative singular-value cut for ranks and for the Burnside test.
    pub rank_tol: f64,
    pub max_iterations: usize,
    /// Restarts evaluated together; the search stops after the first batch with a success.
    pub batch: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 100,
            tol: 1e-10,
            seed: 0,
            rank_tol: 1e-6,
            max_iterations: 400,
            batch: 8,
        }
    }
}

struct Prepared {
    canon: Vec<CMatrix>,
    eig: Vec<Vec<Complex64>>,
    n: usize,
}

fn prepare(classes: &[ClassSpec], binding: &Binding) -> Result<Prepared> {
    if classes.len() < 2 {
        return Err(Error::Domain("at least two classes are required".into()));
    }
    let n = classes[0].n();
    if classes.iter().any(|c| c.n() != n) {
        return Err(Error::Domain("classes have different sizes".into()));
    }
    let eig: Vec<Vec<Complex64>> = classes
        .iter()
        .map(|c| c.eigenvalues.iter().map(|x| binding.eval(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let canon = classes
        .iter()
        .zip(&eig)
        .map(|(c, e)| canonical_representative(c, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        canon,
        eig,
        n: n as usize,
    })
}

/// Best witness from the first batch of restarts containing a success; `None`
/// when the budget is exhausted, which says nothing about existence.
pub fn search(classes: &[ClassSpec], binding: &Binding, config: &SearchConfig) -> Result<Option<SolutionWitness>> {
    let prep = prepare(classes, binding)?;
    let batch = config.batch.max(1);
    let mut start = 0;
    while start < config.restarts {
        let end = (start + batch).min(config.restarts);
        let found: Vec<SolutionWitness> = (start..end)
            .into_par_iter()
            .filter_map(|idx| run_restart(&prep, classes, config, idx))
            .collect();
        let best = found
            .into_iter()
            .min_by(|a, b| a.residual.total_cmp(&b.residual).then(a.restart.cmp(&b.restart)));
        if best.is_some() {
            return Ok(best);
        }
        start = end;
    }
    Ok(None)
}

/// Every successful restart, in restart order.
pub fn sweep(classes: &[ClassSpec], binding: &Binding, config: &SearchConfig) -> Result<Vec<SolutionWitness>> {
    let prep = prepare(classes, binding)?;
    Ok((0..config.restarts)
        .into_par_iter()
        .filter_map(|idx| run_restart(&prep, classes, config, idx))
        .collect())
}

fn product(mats: &[CMatrix], n: usize) -> CMatrix {
    mats.iter().fold(CMatrix::identity(n, n), |acc, m| acc * m)
}

fn residual_of(mats: &[CMatrix], n: usize) -> f64 {
    (product(mats, n) - CMatrix::identity(n, n)).norm()
}

fn conjugate(g: &CMatrix, c: &CMatrix) -> Option<CMatrix> {
    let inv = g.clone().try_inverse()?;
    let out = g * c * inv;
    out.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(out)
}

fn condition(g: &CMatrix) -> f64 {
    let s = singular_values(g);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

fn run_restart(prep: &Prepared, classes: &[ClassSpec], config: &SearchConfig, idx: usize) -> Option<SolutionWitness> {
    let n = prep.n;
    let k = prep.canon.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(idx as u64);
    let mut gs: Vec<CMatrix> = (1..k)
        .map(|_| {
            CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
        })
        .collect();
    let mut mats = vec![prep.canon[0].clone()];
    for (j, g) in gs.iter().enumerate() {
        mats.push(conjugate(g, &prep.canon[j + 1])?);
    }
    let mut res = residual_of(&mats, n);
    let mut lambda = 1e-2;
    let id = CMatrix::identity(n, n);
    for _ in 0..config.max_iterations {
        if res <= config.tol {
            break;
        }
        let (jac, r) = linearize(&mats, n);
        let mut accepted = false;
        for _ in 0..12 {
            let Some(step) = damped_step(&jac, &r, lambda) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial_g = gs.clone();
            let mut trial = mats.clone();
            let mut ok = true;
            for j in 1..k {
                let x = CMatrix::from_fn(n, n, |a, b| step[(j - 1) * n * n + a * n + b]);
                let mut g = (&id + x) * &gs[j - 1];
                let scale = g.norm() / (n as f64).sqrt();
                if !(scale.is_finite() && scale > 0.0) {
                    ok = false;
                    break;
                }
                g /= Complex64::new(scale, 0.0);
                match conjugate(&g, &prep.canon[j]) {
                    Some(m) => trial[j] = m,
                    None => {
                        ok = false;
                        break;
                    }
                }
                trial_g[j - 1] = g;
            }
            let trial_res = if ok { residual_of(&trial, n) } else { f64::INFINITY };
            if trial_res < res {
                gs = trial_g;
                mats = trial;
                res = trial_res;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted || gs.iter().any(|g| condition(g) > 1e8) {
            return None;
        }
    }
    if res > config.tol {
        return None;
    }
    let class_residuals: Vec<f64> = mats
        .iter()
        .zip(classes)
        .zip(&prep.eig)
        .map(|((m, c), e)| class_residual(m, c, e))
        .collect();
    if mats
        .iter()
        .zip(classes)
        .zip(&prep.eig)
        .any(|((m, c), e)| !matches_class(m, c, e, config.rank_tol))
    {
        return None;
    }
    let dim = burnside_dim(&mats, config.rank_tol);
    Some(SolutionWitness {
        irreducible: dim == n * n,
        burnside_dim: dim,
        matrices: mats,
        residual: res,
        class_residuals,
        restart: idx,
    })
}

/// Jacobian of `vec(A_1 ⋯ A_k − I)` in the entries of the `X_j`, and the residual.
fn linearize(mats: &[CMatrix], n: usize) -> (CMatrix, nalgebra::DVector<Complex64>) {
    let k = mats.len();
    let nn = n * n;
    let mut prefix = vec![CMatrix::identity(n, n)];
    for m in mats {
        let next = prefix.last().unwrap() * m;
        prefix.push(next);
    }
    let mut suffix = vec![CMatrix::identity(n, n); k + 1];
    for j in (0..k).rev() {
        suffix[j] = &mats[j] * &suffix[j + 1];
    }
    let f = &prefix[k] - CMatrix::identity(n, n);
    let r = nalgebra::DVector::from_fn(nn, |i, _| f[(i / n, i % n)]);
    let mut jac = CMatrix::zeros(nn, (k - 1) * nn);
    for j in 1..k {
        let l = &prefix[j];
        let s = &suffix[j + 1];
        let a_s = &mats[j] * s;
        let l_a = l * &mats[j];
        for a in 0..n {
            for b in 0..n {
                let col = (j - 1) * nn + a * n + b;
                for p in 0..n {
                    for q in 0..n {
                        jac[(p * n + q, col)] = l[(p, a)] * a_s[(b, q)] - l_a[(p, a)] * s[(b, q)];
                    }
                }
            }
        }
    }
    (jac, r)
}

/// `x = −J^H (J J^H + λI)^{-1} r`.
fn damped_step(jac: &CMatrix, r: &nalgebra::DVector<Complex64>, lambda: f64) -> Option<nalgebra::DVector<Complex64>> {
    let jh = jac.adjoint();
    let mut m = jac * &jh;
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(lambda, 0.0);
    }
    let y = m.lu().solve(r)?;
    let x = -(jh * y);
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(x)
}

//! The lattice `{γ ∈ ℤ^n : q^γ = 1, θ·γ = 0}` and exact enumeration of its
//! points inside a box `[0, bound]`.
//!
//! The defining conditions are linear: one integer equation per free
//! generator, one for the cleared-denominator `θ`, and a congruence modulo
//! the torsion order. The kernel is computed by unimodular column reduction
//! and brought to row echelon form, which lets the box search fix one pivot
//! coordinate at a time and prune on every coordinate it determines.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::multgroup::{Generator, MultElement};

#[derive(Debug, Clone)]
pub struct CharLattice {
    dim: usize,
    /// Echelon basis: pivots strictly increase, pivot entries are positive.
    rows: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

impl CharLattice {
    pub fn new(q: &[MultElement], theta: Option<&[BigRational]>) -> Result<Self> {
        let n = q.len();
        if let Some(t) = theta {
            if t.len() != n {
                return Err(Error::Mismatch {
                    expected: n,
                    got: t.len(),
                });
            }
        }
        let gens: BTreeSet<&Generator> = q.iter().flat_map(|x| x.free_exponents().keys()).collect();
        let mut eqs: Vec<Vec<BigInt>> = Vec::new();
        for g in gens {
            eqs.push(
                q.iter()
                    .map(|x| BigInt::from(*x.free_exponents().get(g).unwrap_or(&0)))
                    .collect(),
            );
        }
        if let Some(t) = theta {
            let den = t
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let row: Vec<BigInt> = t.iter().map(|x| (x * &den).to_integer()).collect();
            if row.iter().any(|x| !x.is_zero()) {
                eqs.push(row);
            }
        }
        let order = q.iter().fold(1u64, |acc, x| acc.lcm(&x.torsion().0));
        let cols = if order > 1 { n + 1 } else { n };
        let mut a: Vec<Vec<BigInt>> = eqs
            .into_iter()
            .map(|mut r| {
                r.resize(cols, BigInt::zero());
                r
            })
            .collect();
        if order > 1 {
            let mut r: Vec<BigInt> = q
                .iter()
                .map(|x| {
                    let (m, res) = x.torsion();
                    BigInt::from(res) * BigInt::from(order / m)
                })
                .collect();
            r.push(BigInt::from(order));
            a.push(r);
        }
        let kernel = integer_kernel(&mut a, cols);
        let mut basis: Vec<Vec<BigInt>> = kernel
            .into_iter()
            .map(|mut v| {
                v.truncate(n);
                v
            })
            .collect();
        let pivots = row_echelon(&mut basis, n);
        let rows = basis
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_i64().ok_or(Error::Overflow("lattice basis")))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CharLattice {
            dim: n,
            rows,
            pivots,
        })
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// All nonzero lattice points `γ` with `0 ≤ γ ≤ bound`, in lexicographic order.
    pub fn points_in_box(&self, bound: &[i64]) -> Result<Vec<Vec<i64>>> {
        if bound.len() != self.dim {
            return Err(Error::Mismatch {
                expected: self.dim,
                got: bound.len(),
            });
        }
        let mut out = Vec::new();
        if bound.iter().any(|&b| b < 0) {
            return Ok(out);
        }
        let mut cur = vec![0i128; self.dim];
        self.descend(0, &mut cur, bound, &mut out);
        out.retain(|g: &Vec<i64>| g.iter().any(|&x| x != 0));
        out.sort();
        Ok(out)
    }

    fn descend(&self, k: usize, cur: &mut Vec<i128>, bound: &[i64], out: &mut Vec<Vec<i64>>) {
        if k == self.rows.len() {
            out.push(cur.iter().map(|&x| x as i64).collect());
            return;
        }
        let row = &self.rows[k];
        let p = self.pivots[k];
        let end = self.pivots.get(k + 1).copied().unwrap_or(self.dim);
        let piv = row[p] as i128;
        let lo = ceil_div(-cur[p], piv);
        let hi = floor_div(bound[p] as i128 - cur[p], piv);
        for c in lo..=hi {
            let ok = (p..end).all(|col| {
                let x = cur[col] + c * row[col] as i128;
                x >= 0 && x <= bound[col] as i128
            });
            if !ok {
                continue;
            }
            for col in p..self.dim {
                cur[col] += c * row[col] as i128;
            }
            self.descend(k + 1, cur, bound, out);
            for col in p..self.dim {
                cur[col] -= c * row[col] as i128;
            }
        }
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

/// Basis of `{x : A x = 0}` by unimodular column operations on `A`.
fn integer_kernel(a: &mut [Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    // u[c] is the c-th column of the accumulated unimodular transform
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|c| {
            let mut e = vec![BigInt::zero(); cols];
            e[c] = BigInt::one();
            e
        })
        .collect();
    let mut piv = 0;
    for r in 0..a.len() {
        loop {
            let best = (piv..cols)
                .filter(|&c| !a[r][c].is_zero())
                .min_by_key(|&c| a[r][c].abs());
            let Some(b) = best else { break };
            swap_columns(a, &mut u, b, piv);
            let mut clean = true;
            for c in piv + 1..cols {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].div_floor(&a[r][piv]);
                for row in a.iter_mut() {
                    let t = &row[piv] * &f;
                    row[c] -= t;
                }
                let t: Vec<BigInt> = u[piv].iter().map(|x| x * &f).collect();
                for (x, y) in u[c].iter_mut().zip(t) {
                    *x -= y;
                }
                if !a[r][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                piv += 1;
                break;
            }
        }
        if piv == cols {
            break;
        }
    }
    u.split_off(piv)
}

fn swap_columns(a: &mut [Vec<BigInt>], u: &mut [Vec<BigInt>], i: usize, j: usize) {
    if i == j {
        return;
    }
    for row in a.iter_mut() {
        row.swap(i, j);
    }
    u.swap(i, j);
}

/// Integer row reduction to echelon form; returns the pivot columns.
fn row_echelon(m: &mut Vec<Vec<BigInt>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..cols {
        if top == m.len() {
            break;
        }
        loop {
            let best = (top..m.len())
                .filter(|&r| !m[r][col].is_zero())
                .min_by_key(|&r| m[r][col].abs());
            let Some(b) = best else { break };
            m.swap(top, b);
            let mut clean = true;
            for r in top + 1..m.len() {
                if m[r][col].is_zero() {
                    continue;
                }
                let f = m[r][col].div_floor(&m[top][col]);
                let t: Vec<BigInt> = m[top].iter().map(|x| x * &f).collect();
                for (x, y) in m[r].iter_mut().zip(t) {
                    *x -= y;
                }
                if !m[r][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                if m[top][col].is_negative() {
                    for x in m[top].iter_mut() {
                        *x = -x.clone();
                    }
                }
                pivots.push(col);
                top += 1;
                break;
            }
        }
    }
    m.truncate(top);
    pivots
}

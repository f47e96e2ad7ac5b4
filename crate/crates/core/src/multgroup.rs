//! Exact arithmetic in `ℤ^G ⊕ ℤ/N`: rationals factored into primes, roots
//! of unity in a torsion slot and user symbols treated as multiplicatively
//! independent.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::CharLattice;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Generator {
    Prime(u64),
    Symbol(String),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Prime(p) => write!(f, "{p}"),
            Generator::Symbol(s) => f.write_str(s),
        }
    }
}

/// `∏ g^{e_g} · ζ_N^a` with the torsion part kept in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultElement {
    free: BTreeMap<Generator, i64>,
    order: u64,
    residue: u64,
}

impl Default for MultElement {
    fn default() -> Self {
        Self::one()
    }
}

impl MultElement {
    pub fn one() -> Self {
        MultElement {
            free: BTreeMap::new(),
            order: 1,
            residue: 0,
        }
    }

    /// `ζ_n^a = exp(2πi a/n)`.
    pub fn zeta(n: u64, a: i64) -> Self {
        assert!(n > 0, "root of unity of order zero");
        let a = a.rem_euclid(n as i64) as u64;
        let mut x = MultElement {
            free: BTreeMap::new(),
            order: n,
            residue: a,
        };
        x.normalize_torsion();
        x
    }

    pub fn minus_one() -> Self {
        Self::zeta(2, 1)
    }

    pub fn symbol(name: &str) -> Self {
        let mut free = BTreeMap::new();
        free.insert(Generator::Symbol(name.to_string()), 1);
        MultElement {
            free,
            order: 1,
            residue: 0,
        }
    }

    pub fn generator(g: Generator, exponent: i64) -> Self {
        let mut x = Self::one();
        if exponent != 0 {
            x.free.insert(g, exponent);
        }
        x
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::rational(n, 1)
    }

    /// The nonzero rational `num/den`.
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::Domain("zero is not invertible".into()));
        }
        let mut x = if (num < 0) != (den < 0) {
            Self::minus_one()
        } else {
            Self::one()
        };
        for (p, e) in factor(num.unsigned_abs()) {
            x = x.mul(&Self::generator(Generator::Prime(p), e as i64));
        }
        for (p, e) in factor(den.unsigned_abs()) {
            x = x.mul(&Self::generator(Generator::Prime(p), -(e as i64)));
        }
        Ok(x)
    }

    fn normalize_torsion(&mut self) {
        self.residue %= self.order;
        if self.residue == 0 {
            self.order = 1;
            return;
        }
        let g = self.residue.gcd(&self.order);
        self.residue /= g;
        self.order /= g;
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut free = self.free.clone();
        for (g, &e) in &other.free {
            let entry = free.entry(g.clone()).or_insert(0);
            *entry += e;
            if *entry == 0 {
                free.remove(g);
            }
        }
        let order = self.order.lcm(&other.order);
        let a = (self.residue as u128 * (order / self.order) as u128
            + other.residue as u128 * (order / other.order) as u128)
            % order as u128;
        let mut x = MultElement {
            free,
            order,
            residue: a as u64,
        };
        x.normalize_torsion();
        x
    }

    pub fn inv(&self) -> Self {
        MultElement {
            free: self.free.iter().map(|(g, &e)| (g.clone(), -e)).collect(),
            order: self.order,
            residue: (self.order - self.residue) % self.order,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    pub fn pow(&self, k: i64) -> Self {
        if k == 0 {
            return Self::one();
        }
        let free = self.free.iter().map(|(g, &e)| (g.clone(), e * k)).collect();
        let a = (self.residue as i128 * k as i128).rem_euclid(self.order as i128) as u64;
        let mut x = MultElement {
            free,
            order: self.order,
            residue: a,
        };
        x.normalize_torsion();
        x
    }

    pub fn is_one(&self) -> bool {
        self.free.is_empty() && self.order == 1
    }

    /// Multiplicative order when the free part vanishes.
    pub fn order_of(&self) -> Option<u64> {
        self.free.is_empty().then_some(self.order)
    }

    pub fn free_exponents(&self) -> &BTreeMap<Generator, i64> {
        &self.free
    }

    /// `(N, a)` with `ζ_N^a` the torsion part, in lowest terms.
    pub fn torsion(&self) -> (u64, u64) {
        (self.order, self.residue)
    }

    /// The free part alone (torsion stripped).
    pub fn modulus(&self) -> Self {
        MultElement {
            free: self.free.clone(),
            order: 1,
            residue: 0,
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.free.keys().filter_map(|g| match g {
            Generator::Symbol(s) => Some(s.as_str()),
            Generator::Prime(_) => None,
        })
    }

    /// Parses the eigenvalue syntax: rationals, `zeta(N)`, symbols, `*`, `/`,
    /// integer powers `^k` and parentheses.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = Parser {
            chars: text.chars().collect(),
            pos: 0,
        };
        let x = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(x)
    }
}

impl fmt::Display for MultElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (g, &e) in &self.free {
            if e == 1 {
                parts.push(g.to_string());
            } else {
                parts.push(format!("{g}^{e}"));
            }
        }
        if self.order > 1 {
            if self.order == 2 {
                parts.push("(-1)".to_string());
            } else if self.residue == 1 {
                parts.push(format!("zeta({})", self.order));
            } else {
                parts.push(format!("zeta({})^{}", self.order, self.residue));
            }
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

impl Serialize for MultElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, msg: &str) -> Error {
        Error::validation(format!("character {}", self.pos), msg)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<MultElement> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some('/') => {
                    self.pos += 1;
                    acc = acc.div(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<MultElement> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.power()?.mul(&MultElement::minus_one()));
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = if self.peek() == Some('(') {
                self.pos += 1;
                let k = self.signed_int()?;
                self.expect(')')?;
                k
            } else {
                self.signed_int()?
            };
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn signed_int(&mut self) -> Result<i64> {
        let neg = if self.peek() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let v = self.unsigned()?;
        let v = i64::try_from(v).map_err(|_| self.error("integer too large"))?;
        Ok(if neg { -v } else { v })
    }

    fn unsigned(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        if matches!(self.chars.get(self.pos), Some('.') | Some('e') | Some('E')) {
            return Err(self.error("floating-point literals are not accepted; use fractions, zeta(N) or symbols"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| self.error("integer too large"))
    }

    fn atom(&mut self) -> Result<MultElement> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let x = self.expr()?;
                self.expect(')')?;
                Ok(x)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.unsigned()?;
                if n == 0 {
                    return Err(self.error("zero is not an admissible eigenvalue"));
                }
                let n = i64::try_from(n).map_err(|_| self.error("integer too large"))?;
                MultElement::integer(n)
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                if name == "zeta" {
                    self.expect('(')?;
                    let n = self.unsigned()?;
                    if n == 0 {
                        return Err(self.error("zeta needs a positive order"));
                    }
                    self.expect(')')?;
                    Ok(MultElement::zeta(n, 1))
                } else {
                    Ok(MultElement::symbol(&name))
                }
            }
            Some('.') => Err(self.error("floating-point literals are not accepted")),
            _ => Err(self.error("expected a number, symbol, zeta(N) or '('")),
        }
    }
}

/// Parameters indexed by graph vertices.
pub type ParamVector = Vec<MultElement>;

/// `∏_v q_v^{γ_v}`.
pub fn evaluate_char(q: &[MultElement], gamma: &[i64]) -> Result<MultElement> {
    if q.len() != gamma.len() {
        return Err(Error::Mismatch {
            expected: q.len(),
            got: gamma.len(),
        });
    }
    let mut acc = MultElement::one();
    for (x, &k) in q.iter().zip(gamma) {
        if k != 0 {
            acc = acc.mul(&x.pow(k));
        }
    }
    Ok(acc)
}

/// For every `0 < N < n`, no choice of `N` eigenvalues from each class (with
/// multiplicity) has product one.
pub fn generic_check(classes: &[Vec<MultElement>], n: usize) -> Result<bool> {
    for (j, c) in classes.iter().enumerate() {
        if c.len() != n {
            return Err(Error::validation(
                format!("/classes/{j}"),
                format!("expected {n} eigenvalues, got {}", c.len()),
            ));
        }
    }
    let total = classes
        .iter()
        .flatten()
        .fold(MultElement::one(), |acc, x| acc.mul(x));
    if !total.is_one() {
        return Err(Error::Precondition(format!(
            "the product of all eigenvalues is {total}, not 1"
        )));
    }
    // products[j][N] = distinct products of N-element sub-multisets of class j
    let products: Vec<Vec<HashSet<MultElement>>> = classes
        .iter()
        .map(|c| submultiset_products(c, n))
        .collect();
    for size in 1..n {
        let mut acc: HashSet<MultElement> = HashSet::from([MultElement::one()]);
        for p in &products {
            let mut next = HashSet::new();
            for a in &acc {
                for b in &p[size] {
                    next.insert(a.mul(b));
                }
            }
            acc = next;
        }
        if acc.contains(&MultElement::one()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn submultiset_products(class: &[MultElement], n: usize) -> Vec<HashSet<MultElement>> {
    let mut groups: Vec<(MultElement, usize)> = Vec::new();
    for x in class {
        match groups.iter_mut().find(|(y, _)| y == x) {
            Some(g) => g.1 += 1,
            None => groups.push((x.clone(), 1)),
        }
    }
    let mut table: Vec<HashSet<MultElement>> = vec![HashSet::new(); n + 1];
    table[0].insert(MultElement::one());
    for (x, mult) in groups {
        let mut next: Vec<HashSet<MultElement>> = vec![HashSet::new(); n + 1];
        for (size, set) in table.iter().enumerate() {
            for y in set {
                let mut cur = y.clone();
                for c in 0..=mult {
                    if size + c > n {
                        break;
                    }
                    next[size + c].insert(cur.clone());
                    cur = cur.mul(&x);
                }
            }
        }
        table = next;
    }
    table
}

/// Every `0 < γ ≤ d` with `q^γ = 1` is a rational multiple of `d`.
pub fn almost_generic_check(q: &[MultElement], d: &[i64]) -> Result<bool> {
    if !evaluate_char(q, d)?.is_one() {
        return Err(Error::Precondition("q^d is not 1".into()));
    }
    let lattice = CharLattice::new(q, None)?;
    Ok(lattice
        .points_in_box(d)?
        .iter()
        .all(|g| is_proportional(g, d)))
}

/// `a` and `b` span the same line.
pub fn is_proportional(a: &[i64], b: &[i64]) -> bool {
    let Some(k) = b.iter().position(|&x| x != 0) else {
        return a.iter().all(|&x| x == 0);
    };
    a.iter()
        .zip(b)
        .all(|(&x, &y)| x as i128 * b[k] as i128 == y as i128 * a[k] as i128)
}

//! The JSON problem format: a list of classes, an optional stability weight
//! keyed by vertex, optional symbol declarations and per-command options.
//!
//! ```json
//! { "classes": [ { "n": 2, "semisimple": true,
//!                  "eigenvalues": ["a1", "b1"], "multiplicities": [1, 1] } ],
//!   "theta": { "*": "1/2", "[1,1]": -1 },
//!   "symbols": ["a1", "b1"] }
//! ```
//!
//! Vertex keys name the user's classes: `[j,i]` is position `i` on the leg of
//! the `j`-th class (one-based), whatever order the legs are stored in.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::multgroup::MultElement;
use crate::spectral::{build_problem, ClassSpec, DsProblem, WeightVector};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Options {
    pub restarts: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub bound: Option<i64>,
    pub mode: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub classes: Vec<ClassSpec>,
    /// User vertex key to weight, as written in the file.
    pub theta: BTreeMap<String, BigRational>,
    pub symbols: Option<Vec<String>>,
    pub options: Options,
}

impl ProblemFile {
    pub fn new(classes: Vec<ClassSpec>) -> Self {
        ProblemFile {
            classes,
            theta: BTreeMap::new(),
            symbols: None,
            options: Options::default(),
        }
    }

    /// Builds the quiver data and places θ on the canonical vertices.
    pub fn problem(&self) -> Result<DsProblem> {
        let mut p = build_problem(&self.classes)?;
        p.theta = theta_vector(&p, &self.theta, "/theta")?;
        Ok(p)
    }

    pub fn to_value(&self) -> Value {
        let classes: Vec<Value> = self.classes.iter().map(class_value).collect();
        let mut out = Map::new();
        out.insert("classes".into(), Value::Array(classes));
        if !self.theta.is_empty() {
            let t: Map<String, Value> = self
                .theta
                .iter()
                .map(|(k, v)| (k.clone(), Value::String(v.to_string())))
                .collect();
            out.insert("theta".into(), Value::Object(t));
        }
        if let Some(s) = &self.symbols {
            out.insert("symbols".into(), json!(s));
        }
        let o = &self.options;
        let mut opts = Map::new();
        if let Some(x) = o.restarts {
            opts.insert("restarts".into(), json!(x));
        }
        if let Some(x) = o.tol {
            opts.insert("tol".into(), json!(x));
        }
        if let Some(x) = o.seed {
            opts.insert("seed".into(), json!(x));
        }
        if let Some(x) = o.bound {
            opts.insert("bound".into(), json!(x));
        }
        if let Some(x) = &o.mode {
            opts.insert("mode".into(), json!(x));
        }
        if !opts.is_empty() {
            out.insert("options".into(), Value::Object(opts));
        }
        Value::Object(out)
    }
}

fn class_value(c: &ClassSpec) -> Value {
    let eig: Vec<String> = c.eigenvalues.iter().map(|x| x.to_string()).collect();
    if c.semisimple {
        json!({ "n": c.n(), "semisimple": true, "eigenvalues": eig, "multiplicities": c.multiplicities() })
    } else {
        json!({ "n": c.n(), "semisimple": false, "eigenvalues": eig, "ranks": c.ranks })
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::validation("", format!("invalid JSON at line {} column {}: {e}", e.line(), e.column())))?;
    from_value(&v)
}

fn object<'a>(v: &'a Value, at: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::validation(at, "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::validation(format!("{at}/{}", escape(k)), "unknown field"));
    }
    Ok(obj)
}

/// JSON-pointer escaping of a single reference token.
fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn int_field(v: &Value, at: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::validation(at, "expected an integer"))
}

fn int_list(v: &Value, at: &str) -> Result<Vec<i64>> {
    let arr = v.as_array().ok_or_else(|| Error::validation(at, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| int_field(x, &format!("{at}/{i}")))
        .collect()
}

pub fn from_value(v: &Value) -> Result<ProblemFile> {
    let root = object(v, "", &["classes", "theta", "symbols", "options"])?;
    let classes_v = root
        .get("classes")
        .ok_or_else(|| Error::validation("/classes", "missing field"))?
        .as_array()
        .ok_or_else(|| Error::validation("/classes", "expected an array"))?;
    if classes_v.is_empty() {
        return Err(Error::validation("/classes", "at least one class is required"));
    }
    let classes = classes_v
        .iter()
        .enumerate()
        .map(|(j, c)| parse_class(c, &format!("/classes/{j}")))
        .collect::<Result<Vec<_>>>()?;

    let symbols = match root.get("symbols") {
        None => None,
        Some(s) => {
            let arr = s
                .as_array()
                .ok_or_else(|| Error::validation("/symbols", "expected an array of names"))?;
            let names = arr
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    x.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::validation(format!("/symbols/{i}"), "expected a string"))
                })
                .collect::<Result<Vec<_>>>()?;
            let declared: BTreeSet<&str> = names.iter().map(String::as_str).collect();
            for (j, c) in classes.iter().enumerate() {
                for (i, x) in c.eigenvalues.iter().enumerate() {
                    if let Some(s) = x.symbols().find(|s| !declared.contains(s)) {
                        return Err(Error::validation(
                            format!("/classes/{j}/eigenvalues/{i}"),
                            format!("symbol {s} is not declared"),
                        ));
                    }
                }
            }
            Some(names)
        }
    };

    let theta = match root.get("theta") {
        None => BTreeMap::new(),
        Some(t) => parse_theta_map(t, "/theta")?,
    };
    let options = match root.get("options") {
        None => Options::default(),
        Some(o) => parse_options(o)?,
    };
    let file = ProblemFile {
        classes,
        theta,
        symbols,
        options,
    };
    // resolve the vertex keys now so that bad keys are reported on load
    file.problem()?;
    Ok(file)
}

fn parse_class(v: &Value, at: &str) -> Result<ClassSpec> {
    let obj = object(v, at, &["n", "semisimple", "eigenvalues", "multiplicities", "ranks"])?;
    let eig_v = obj
        .get("eigenvalues")
        .ok_or_else(|| Error::validation(format!("{at}/eigenvalues"), "missing field"))?
        .as_array()
        .ok_or_else(|| Error::validation(format!("{at}/eigenvalues"), "expected an array"))?;
    let eigenvalues = eig_v
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let loc = format!("{at}/eigenvalues/{i}");
            let text = match e {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() => n.to_string(),
                _ => return Err(Error::validation(loc, "expected an expression string")),
            };
            MultElement::parse(&text).map_err(|err| match err {
                Error::Validation { location, message } => {
                    Error::validation(loc, format!("{message} at {location} of {text:?}"))
                }
                other => Error::validation(loc, other.to_string()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let semisimple = match obj.get("semisimple") {
        None => None,
        Some(b) => Some(
            b.as_bool()
                .ok_or_else(|| Error::validation(format!("{at}/semisimple"), "expected a boolean"))?,
        ),
    };
    let rebase = |e: Error| match e {
        Error::Validation { location, message } => Error::validation(format!("{at}{location}"), message),
        other => other,
    };
    let spec = match (obj.get("multiplicities"), obj.get("ranks")) {
        (Some(_), Some(_)) => {
            return Err(Error::validation(
                format!("{at}/ranks"),
                "give either multiplicities or ranks, not both",
            ))
        }
        (None, None) => {
            return Err(Error::validation(
                format!("{at}/multiplicities"),
                "one of multiplicities or ranks is required",
            ))
        }
        (Some(m), None) => {
            if semisimple == Some(false) {
                return Err(Error::validation(
                    format!("{at}/multiplicities"),
                    "multiplicities describe a semisimple class; give ranks instead",
                ));
            }
            let mults = int_list(m, &format!("{at}/multiplicities"))?;
            if mults.len() != eigenvalues.len() {
                return Err(Error::validation(
                    format!("{at}/multiplicities"),
                    format!("{} multiplicities for {} eigenvalues", mults.len(), eigenvalues.len()),
                ));
            }
            ClassSpec::semisimple(eigenvalues.into_iter().zip(mults).collect()).map_err(rebase)?
        }
        (None, Some(r)) => {
            let ranks = int_list(r, &format!("{at}/ranks"))?;
            if semisimple == Some(true) {
                let mut mults: Vec<i64> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
                mults.extend(ranks.last());
                if ranks.len() != eigenvalues.len() {
                    return Err(Error::validation(
                        format!("{at}/ranks"),
                        "one rank per eigenvalue is required",
                    ));
                }
                ClassSpec::semisimple(eigenvalues.into_iter().zip(mults).collect()).map_err(rebase)?
            } else {
                ClassSpec::new(eigenvalues, ranks).map_err(rebase)?
            }
        }
    };
    if let Some(n) = obj.get("n") {
        let n = int_field(n, &format!("{at}/n"))?;
        if n != spec.n() {
            return Err(Error::validation(
                format!("{at}/n"),
                format!("n = {n} but the class data describes size {}", spec.n()),
            ));
        }
    }
    Ok(spec)
}

fn parse_options(v: &Value) -> Result<Options> {
    let obj = object(v, "/options", &["restarts", "tol", "seed", "bound", "mode"])?;
    let mut o = Options::default();
    if let Some(x) = obj.get("restarts") {
        o.restarts = Some(
            x.as_u64()
                .ok_or_else(|| Error::validation("/options/restarts", "expected a nonnegative integer"))?
                as usize,
        );
    }
    if let Some(x) = obj.get("tol") {
        let t = x
            .as_f64()
            .filter(|t| *t > 0.0)
            .ok_or_else(|| Error::validation("/options/tol", "expected a positive number"))?;
        o.tol = Some(t);
    }
    if let Some(x) = obj.get("seed") {
        o.seed = Some(
            x.as_u64()
                .ok_or_else(|| Error::validation("/options/seed", "expected a nonnegative integer"))?,
        );
    }
    if let Some(x) = obj.get("bound") {
        o.bound = Some(int_field(x, "/options/bound")?);
    }
    if let Some(x) = obj.get("mode") {
        let m = x
            .as_str()
            .filter(|m| matches!(*m, "generic" | "almost-generic"))
            .ok_or_else(|| Error::validation("/options/mode", "expected \"generic\" or \"almost-generic\""))?;
        o.mode = Some(m.to_string());
    }
    Ok(o)
}

/// Integers or `"p/q"` strings.
pub fn parse_rational(v: &Value, at: &str) -> Result<BigRational> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|k| BigRational::from_integer(BigInt::from(k)))
            .ok_or_else(|| Error::validation(at, "expected an integer or a \"p/q\" string")),
        Value::String(s) => {
            let s = s.trim();
            let (num, den) = match s.split_once('/') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (s, "1"),
            };
            let num: BigInt = num
                .parse()
                .map_err(|_| Error::validation(at, format!("bad numerator in {s:?}")))?;
            let den: BigInt = den
                .parse()
                .map_err(|_| Error::validation(at, format!("bad denominator in {s:?}")))?;
            if den.is_zero() {
                return Err(Error::validation(at, "zero denominator"));
            }
            Ok(BigRational::new(num, den))
        }
        _ => Err(Error::validation(at, "expected an integer or a \"p/q\" string")),
    }
}

/// Reads `{vertex: rational}` without resolving the keys.
pub fn parse_theta_map(v: &Value, at: &str) -> Result<BTreeMap<String, BigRational>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::validation(at, "expected an object keyed by vertex"))?;
    obj.iter()
        .map(|(k, x)| Ok((k.clone(), parse_rational(x, &format!("{at}/{}", escape(k)))?)))
        .collect()
}

/// Canonical vertex index of a user key `*`, `star` or `[j,i]`.
pub fn resolve_vertex(problem: &DsProblem, key: &str) -> Option<usize> {
    let s = key.trim();
    if s == "*" || s.eq_ignore_ascii_case("star") {
        return Some(0);
    }
    let inner = s.strip_prefix('[')?.strip_suffix(']')?;
    let (a, b) = inner.split_once(',')?;
    let j: usize = a.trim().parse().ok()?;
    let i: usize = b.trim().parse().ok()?;
    let leg = problem.graph.leg_order().iter().position(|&o| o + 1 == j)?;
    if i > problem.graph.legs()[leg] {
        return None;
    }
    Some(problem.graph.vertex(leg, i))
}

/// The user key naming canonical vertex `v`.
pub fn user_key(problem: &DsProblem, v: usize) -> String {
    match problem.graph.locate(v) {
        crate::root_system::Vertex::Star => "*".into(),
        crate::root_system::Vertex::Leg { leg, pos } => format!("[{},{}]", problem.class_of_leg(leg) + 1, pos),
    }
}

pub fn theta_vector(problem: &DsProblem, map: &BTreeMap<String, BigRational>, at: &str) -> Result<WeightVector> {
    let mut theta = vec![BigRational::zero(); problem.graph.num_vertices()];
    let mut seen = BTreeSet::new();
    for (k, x) in map {
        let loc = format!("{at}/{}", escape(k));
        let v = resolve_vertex(problem, k).ok_or_else(|| Error::validation(&loc, format!("no vertex {k}")))?;
        if !seen.insert(v) {
            return Err(Error::validation(loc, format!("vertex {k} given twice")));
        }
        theta[v] = x.clone();
    }
    Ok(theta)
}

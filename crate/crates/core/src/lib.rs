//! Exact decision procedures for the tame Deligne-Simpson problem.
//!
//! A tuple of conjugacy classes in `GL_n` is turned into a star-shaped
//! quiver with a dimension vector `d` and a multiplicative parameter `q`.
//! Irreducible solutions of `A_1 ⋯ A_k = 1` exist exactly when `d` lies in
//! the set `Σ_{q,θ}`, which [`sigma`] decides by exhaustive search over the
//! admissible positive roots below `d`.

pub mod decomp;
pub mod error;
pub mod hodge;
pub mod kostov;
pub mod lattice;
pub mod multgroup;
pub mod oracle;
pub mod problem;
pub mod root_system;
pub mod sigma;
pub mod spectral;

pub use error::{Error, Result};
pub use multgroup::MultElement;
pub use root_system::{AffineDiagram, DimVector, RootClass, RootKind, StarGraph};

/// A proven fact attached to a report, tagged so output can be audited.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Fact {
    pub tag: &'static str,
    pub statement: String,
}

impl Fact {
    pub fn new(tag: &'static str, statement: impl Into<String>) -> Self {
        Fact {
            tag,
            statement: statement.into(),
        }
    }
}

/// Rationals are written as `"p/q"` strings (or `"p"` when integral).
pub(crate) mod rational_serde {
    use num_rational::BigRational;
    use serde::ser::{SerializeSeq, Serializer};

    pub fn one<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn typed<S: Serializer>(x: &[Vec<BigRational>], s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = x.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for r in &rows {
            seq.serialize_element(r)?;
        }
        seq.end()
    }
}

//! Root system of a star-shaped graph: the symmetric bilinear form, `p`,
//! simple reflections, root classification by reflection descent, bounded
//! enumeration of positive roots and recognition of affine supports.

use serde::Serialize;

use crate::error::{Error, Result};

/// Integer vector indexed by the vertices of a [`StarGraph`].
pub type DimVector = Vec<i64>;

/// The four affine Dynkin diagrams that are star-shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum AffineDiagram {
    D4,
    E6,
    E7,
    E8,
}

impl AffineDiagram {
    pub const ALL: [AffineDiagram; 4] = [
        AffineDiagram::D4,
        AffineDiagram::E6,
        AffineDiagram::E7,
        AffineDiagram::E8,
    ];

    /// Arm lengths in canonical (nonincreasing) order.
    pub fn arms(self) -> &'static [usize] {
        match self {
            AffineDiagram::D4 => &[1, 1, 1, 1],
            AffineDiagram::E6 => &[2, 2, 2],
            AffineDiagram::E7 => &[3, 3, 1],
            AffineDiagram::E8 => &[5, 2, 1],
        }
    }

    /// Value of the null vector at the central vertex.
    pub fn center(self) -> i64 {
        match self {
            AffineDiagram::D4 => 2,
            AffineDiagram::E6 => 3,
            AffineDiagram::E7 => 4,
            AffineDiagram::E8 => 6,
        }
    }

    /// Null-vector entries along an arm of length `len`, starting next to the centre.
    fn arm_values(self, len: usize) -> &'static [i64] {
        match (self, len) {
            (AffineDiagram::D4, 1) => &[1],
            (AffineDiagram::E6, 2) => &[2, 1],
            (AffineDiagram::E7, 3) => &[3, 2, 1],
            (AffineDiagram::E7, 1) => &[2],
            (AffineDiagram::E8, 5) => &[5, 4, 3, 2, 1],
            (AffineDiagram::E8, 2) => &[4, 2],
            (AffineDiagram::E8, 1) => &[3],
            _ => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AffineDiagram::D4 => "D4~",
            AffineDiagram::E6 => "E6~",
            AffineDiagram::E7 => "E7~",
            AffineDiagram::E8 => "E8~",
        }
    }

    /// Accepts `D4t`, `D4~` or `D4` (and likewise for the E types).
    pub fn from_name(s: &str) -> Option<Self> {
        let base = s.trim_end_matches(['t', '~', 'T']);
        match base.to_ascii_uppercase().as_str() {
            "D4" => Some(AffineDiagram::D4),
            "E6" => Some(AffineDiagram::E6),
            "E7" => Some(AffineDiagram::E7),
            "E8" => Some(AffineDiagram::E8),
            _ => None,
        }
    }

    /// Number of punctures in the associated family of conjugacy classes.
    pub fn punctures(self) -> usize {
        self.arms().len()
    }

    pub fn graph(self) -> StarGraph {
        StarGraph::new(self.arms())
    }

    /// The minimal positive imaginary root on [`AffineDiagram::graph`].
    pub fn null_vector(self) -> DimVector {
        let g = self.graph();
        let mut delta = vec![0; g.num_vertices()];
        delta[0] = self.center();
        for (j, &len) in g.legs().iter().enumerate() {
            for (i, &x) in self.arm_values(len).iter().enumerate() {
                delta[g.vertex(j, i + 1)] = x;
            }
        }
        debug_assert!((0..g.num_vertices()).all(|v| g.pairing_simple(&delta, v) == 0));
        delta
    }
}

/// Location of a vertex in a star graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    Star,
    /// Zero-based leg index, position `pos ≥ 1` counted from the centre.
    Leg { leg: usize, pos: usize },
}

/// A tree with one central vertex and linear legs. Vertex 0 is the centre;
/// leg `j` occupies a contiguous block of indices ordered away from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StarGraph {
    legs: Vec<usize>,
    leg_order: Vec<usize>,
    infinity: Option<usize>,
    offsets: Vec<usize>,
}

impl StarGraph {
    /// Builds the graph with legs sorted by nonincreasing length; ties keep
    /// the order in which they were given.
    pub fn new(legs: &[usize]) -> Self {
        let mut order: Vec<usize> = (0..legs.len()).collect();
        order.sort_by(|&a, &b| legs[b].cmp(&legs[a]));
        let sorted: Vec<usize> = order.iter().map(|&i| legs[i]).collect();
        let mut offsets = Vec::with_capacity(sorted.len());
        let mut next = 1;
        for &len in &sorted {
            offsets.push(next);
            next += len;
        }
        StarGraph {
            legs: sorted,
            leg_order: order,
            infinity: None,
            offsets,
        }
    }

    /// The affine diagram with one extra vertex `∞` attached to its affine
    /// node, which is the tip of the longest arm.
    pub fn with_infinity(diagram: AffineDiagram) -> Self {
        let mut legs = diagram.arms().to_vec();
        legs[0] += 1;
        let mut g = StarGraph::new(&legs);
        g.infinity = Some(g.vertex(0, legs[0]));
        g
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    /// `leg_order()[j]` is the position, in the caller's order, of canonical leg `j`.
    pub fn leg_order(&self) -> &[usize] {
        &self.leg_order
    }

    pub fn infinity_vertex(&self) -> Option<usize> {
        self.infinity
    }

    pub fn num_vertices(&self) -> usize {
        1 + self.legs.iter().sum::<usize>()
    }

    /// Index of position `pos` on leg `leg`; position 0 is the centre.
    pub fn vertex(&self, leg: usize, pos: usize) -> usize {
        if pos == 0 {
            0
        } else {
            debug_assert!(pos <= self.legs[leg]);
            self.offsets[leg] + pos - 1
        }
    }

    pub fn locate(&self, v: usize) -> Vertex {
        if v == 0 {
            return Vertex::Star;
        }
        for (j, &off) in self.offsets.iter().enumerate() {
            if v >= off && v < off + self.legs[j] {
                return Vertex::Leg {
                    leg: j,
                    pos: v - off + 1,
                };
            }
        }
        panic!("vertex {v} out of range");
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        match self.locate(v) {
            Vertex::Star => (0..self.legs.len())
                .filter(|&j| self.legs[j] > 0)
                .map(|j| self.offsets[j])
                .collect(),
            Vertex::Leg { leg, pos } => {
                let mut out = vec![self.vertex(leg, pos - 1)];
                if pos < self.legs[leg] {
                    out.push(v + 1);
                }
                out
            }
        }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (j, &len) in self.legs.iter().enumerate() {
            for pos in 1..=len {
                out.push((self.vertex(j, pos - 1), self.vertex(j, pos)));
            }
        }
        out
    }

    /// Human-readable vertex label: `*` for the centre, `[j,i]` with a
    /// one-based canonical leg index otherwise.
    pub fn vertex_name(&self, v: usize) -> String {
        match self.locate(v) {
            Vertex::Star => "*".to_string(),
            Vertex::Leg { leg, pos } => format!("[{},{}]", leg + 1, pos),
        }
    }

    pub fn parse_vertex(&self, name: &str) -> Option<usize> {
        let s = name.trim();
        if s == "*" || s.eq_ignore_ascii_case("star") {
            return Some(0);
        }
        let inner = s.strip_prefix('[')?.strip_suffix(']')?;
        let (a, b) = inner.split_once(',')?;
        let j: usize = a.trim().parse().ok()?;
        let i: usize = b.trim().parse().ok()?;
        if j == 0 || j > self.legs.len() || i > self.legs[j - 1] {
            return None;
        }
        Some(self.vertex(j - 1, i))
    }

    /// Renders a vector as `(centre; leg1 | leg2 | ...)`.
    pub fn format(&self, d: &[i64]) -> String {
        let mut s = format!("({}", d[0]);
        let mut first = true;
        for (j, &len) in self.legs.iter().enumerate() {
            if len == 0 {
                continue;
            }
            s.push_str(if first { "; " } else { " | " });
            first = false;
            let parts: Vec<String> = (1..=len)
                .map(|i| d[self.vertex(j, i)].to_string())
                .collect();
            s.push_str(&parts.join(","));
        }
        s.push(')');
        s
    }

    pub fn unit(&self, v: usize) -> DimVector {
        let mut e = vec![0; self.num_vertices()];
        e[v] = 1;
        e
    }

    pub fn check(&self, d: &[i64]) -> Result<()> {
        if d.len() != self.num_vertices() {
            return Err(Error::Mismatch {
                expected: self.num_vertices(),
                got: d.len(),
            });
        }
        Ok(())
    }

    /// `(d, e_v)`.
    pub fn pairing_simple(&self, d: &[i64], v: usize) -> i64 {
        let mut x = 2 * d[v];
        for w in self.neighbors(v) {
            x -= d[w];
        }
        x
    }

    /// The symmetric bilinear form `2 Σ a_v b_v − Σ_edges (a_v b_w + a_w b_v)`.
    pub fn pairing(&self, a: &[i64], b: &[i64]) -> Result<i64> {
        self.check(a)?;
        self.check(b)?;
        let mut acc: i128 = 0;
        for v in 0..a.len() {
            acc += 2 * a[v] as i128 * b[v] as i128;
        }
        for (v, w) in self.edges() {
            acc -= a[v] as i128 * b[w] as i128 + a[w] as i128 * b[v] as i128;
        }
        i64::try_from(acc).map_err(|_| Error::Overflow("pairing"))
    }

    /// `p(d) = 1 − (d,d)/2`.
    pub fn p_value(&self, d: &[i64]) -> Result<i64> {
        let dd = self.pairing(d, d)?;
        debug_assert!(dd % 2 == 0);
        Ok(1 - dd / 2)
    }

    pub fn reflect(&self, v: usize, d: &[i64]) -> Result<DimVector> {
        self.check(d)?;
        let mut out = d.to_vec();
        let c = self.pairing_simple(d, v);
        out[v] = d[v].checked_sub(c).ok_or(Error::Overflow("reflection"))?;
        Ok(out)
    }

    /// True when `d` is nonzero and its support is connected.
    pub fn has_connected_support(&self, d: &[i64]) -> bool {
        if d[0] != 0 {
            self.legs.iter().enumerate().all(|(j, &len)| {
                let mut ended = false;
                (1..=len).all(|i| {
                    let x = d[self.vertex(j, i)];
                    if x == 0 {
                        ended = true;
                        true
                    } else {
                        !ended
                    }
                })
            })
        } else {
            let support: Vec<usize> = (0..d.len()).filter(|&v| d[v] != 0).collect();
            match (support.first(), support.last()) {
                (Some(&a), Some(&b)) => {
                    let (Vertex::Leg { leg: la, .. }, Vertex::Leg { leg: lb, .. }) =
                        (self.locate(a), self.locate(b))
                    else {
                        return false;
                    };
                    la == lb && support.len() == b - a + 1
                }
                _ => false,
            }
        }
    }

    /// Splits `d` into its restrictions to the connected components of its support.
    pub fn components(&self, d: &[i64]) -> Vec<DimVector> {
        let n = d.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if d[s] == 0 || seen[s] {
                continue;
            }
            let mut part = vec![0; n];
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                part[v] = d[v];
                for w in self.neighbors(v) {
                    if d[w] != 0 && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            out.push(part);
        }
        out
    }

    /// Decides whether `d ≥ 0` is a root by descending through reflections at
    /// the smallest vertex `v` with `(d, e_v) > 0`.
    pub fn classify_root(&self, d: &[i64]) -> Result<RootClass> {
        self.check(d)?;
        if d.iter().any(|&x| x < 0) {
            return Err(Error::Domain("classify_root needs a nonnegative vector".into()));
        }
        if d.iter().all(|&x| x == 0) {
            return Err(Error::Domain("the zero vector is not classified".into()));
        }
        let mut cur = d.to_vec();
        let mut word = Vec::new();
        let not_root = |word| RootClass {
            kind: RootKind::NotRoot,
            word,
        };
        if !self.has_connected_support(&cur) {
            return Ok(not_root(word));
        }
        loop {
            if cur.iter().sum::<i64>() == 1 {
                return Ok(RootClass {
                    kind: RootKind::Real,
                    word,
                });
            }
            let next = (0..cur.len())
                .map(|v| (v, self.pairing_simple(&cur, v)))
                .find(|&(_, c)| c > 0);
            let Some((v, c)) = next else {
                let kind = if self.p_value(&cur)? == 1 {
                    RootKind::ImaginaryIsotropic
                } else {
                    RootKind::ImaginaryAnisotropic
                };
                return Ok(RootClass { kind, word });
            };
            cur[v] -= c;
            word.push(v);
            if cur[v] < 0 || (cur[v] == 0 && !self.has_connected_support(&cur)) {
                return Ok(not_root(word));
            }
        }
    }

    /// All positive roots `0 < γ ≤ bound`, sorted lexicographically.
    ///
    /// A positive root is either supported on a single leg (an interval of
    /// ones) or has positive centre and is nonincreasing along every leg, so
    /// only those shapes are tested.
    pub fn positive_roots_below(&self, bound: &[i64]) -> Result<Vec<(DimVector, RootClass)>> {
        self.check(bound)?;
        if bound.iter().any(|&x| x < 0) {
            return Err(Error::Domain("bound must be nonnegative".into()));
        }
        let n = self.num_vertices();
        let mut candidates: Vec<DimVector> = Vec::new();
        for (j, &len) in self.legs.iter().enumerate() {
            for a in 1..=len {
                for b in a..=len {
                    if (a..=b).all(|i| bound[self.vertex(j, i)] >= 1) {
                        let mut g = vec![0; n];
                        for i in a..=b {
                            g[self.vertex(j, i)] = 1;
                        }
                        candidates.push(g);
                    } else {
                        break;
                    }
                }
            }
        }
        for c in 1..=bound[0] {
            let per_leg: Vec<Vec<Vec<i64>>> = (0..self.legs.len())
                .map(|j| self.leg_sequences(j, c, bound))
                .collect();
            let mut idx = vec![0usize; per_leg.len()];
            'odometer: loop {
                let mut g = vec![0; n];
                g[0] = c;
                for (j, seqs) in per_leg.iter().enumerate() {
                    for (i, &x) in seqs[idx[j]].iter().enumerate() {
                        g[self.vertex(j, i + 1)] = x;
                    }
                }
                candidates.push(g);
                for j in 0..idx.len() {
                    idx[j] += 1;
                    if idx[j] < per_leg[j].len() {
                        continue 'odometer;
                    }
                    idx[j] = 0;
                }
                break;
            }
        }
        let mut out = Vec::new();
        for g in candidates {
            let rc = self.classify_root(&g)?;
            if rc.is_root() {
                out.push((g, rc));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    /// Nonincreasing sequences along leg `j` starting below `c` and under `bound`.
    fn leg_sequences(&self, j: usize, c: i64, bound: &[i64]) -> Vec<Vec<i64>> {
        fn rec(g: &StarGraph, j: usize, pos: usize, prev: i64, bound: &[i64], cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if pos > g.legs[j] {
                out.push(cur.clone());
                return;
            }
            let hi = prev.min(bound[g.vertex(j, pos)]);
            for x in 0..=hi {
                cur.push(x);
                if x == 0 {
                    cur.resize(g.legs[j], 0);
                    out.push(cur.clone());
                    cur.truncate(pos - 1);
                    continue;
                }
                rec(g, j, pos + 1, x, bound, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(self, j, 1, c, bound, &mut Vec::new(), &mut out);
        out
    }

    /// Recognizes `d` as a multiple of the null vector of an affine diagram
    /// on its support.
    pub fn affine_recognition(&self, d: &[i64]) -> Option<AffineMatch> {
        if d.len() != self.num_vertices() || d[0] <= 0 || !self.has_connected_support(d) {
            return None;
        }
        let mut arms: Vec<(usize, usize)> = self
            .legs
            .iter()
            .enumerate()
            .map(|(j, &len)| (j, (1..=len).take_while(|&i| d[self.vertex(j, i)] > 0).count()))
            .filter(|&(_, t)| t > 0)
            .collect();
        arms.sort_by(|a, b| b.1.cmp(&a.1));
        let lengths: Vec<usize> = arms.iter().map(|a| a.1).collect();
        let diagram = AffineDiagram::ALL
            .into_iter()
            .find(|dg| dg.arms() == lengths.as_slice())?;
        let mut delta = vec![0; d.len()];
        delta[0] = diagram.center();
        for &(j, t) in &arms {
            for (i, &x) in diagram.arm_values(t).iter().enumerate() {
                delta[self.vertex(j, i + 1)] = x;
            }
        }
        if d[0] % delta[0] != 0 {
            return None;
        }
        let m = d[0] / delta[0];
        if d.iter().zip(&delta).all(|(&a, &b)| a == m * b) {
            Some(AffineMatch {
                delta,
                diagram,
                multiple: m,
            })
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RootKind {
    NotRoot,
    Real,
    ImaginaryIsotropic,
    ImaginaryAnisotropic,
}

/// Outcome of [`StarGraph::classify_root`] together with the reflection word
/// that was applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootClass {
    pub kind: RootKind,
    pub word: Vec<usize>,
}

impl RootClass {
    pub fn is_root(&self) -> bool {
        self.kind != RootKind::NotRoot
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineMatch {
    pub delta: DimVector,
    pub diagram: AffineDiagram,
    pub multiple: i64,
}

//! Restricted 2-edge-colourings of the complete graph on the positive integers,
//! truncated to a finite horizon, and small explicit colourings of `K_n`.
//!
//! A restricted colouring is stored as a class partition (every vertex is
//! either red or blue) plus, for each vertex `v`, a finite list of forward
//! exceptions `opp(v) ⊆ (v, horizon]`. The edge `{a, b}` with `a < b` takes
//! the class of `a`, unless `b ∈ opp(a)`, in which case it takes the other
//! colour. Every vertex therefore sees only finitely many edges of the colour
//! opposite to its class.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertices are 1-based, matching `[t] = {1, ..., t}`.
pub type Vertex = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Colour {
    Red,
    Blue,
}

impl Colour {
    pub const BOTH: [Colour; 2] = [Colour::Red, Colour::Blue];

    #[must_use]
    pub fn opposite(self) -> Colour {
        match self {
            Colour::Red => Colour::Blue,
            Colour::Blue => Colour::Red,
        }
    }

    /// Stable index for per-colour arrays.
    #[must_use]
    pub fn index(self) -> usize {
        match self {
            Colour::Red => 0,
            Colour::Blue => 1,
        }
    }

    #[must_use]
    pub fn as_char(self) -> char {
        match self {
            Colour::Red => 'R',
            Colour::Blue => 'B',
        }
    }

    pub fn from_char(c: char) -> Option<Colour> {
        match c {
            'R' => Some(Colour::Red),
            'B' => Some(Colour::Blue),
            _ => None,
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ColouringError {
    #[error("vertex {vertex} exceeds horizon {horizon}")]
    HorizonExceeded { vertex: Vertex, horizon: usize },
    #[error("edge requires two distinct vertices, got {0} twice")]
    Loop(Vertex),
    #[error("vertex 0 is not a vertex (vertices are 1-based)")]
    ZeroVertex,
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
    #[error("malformed colouring: {0}")]
    Structure(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for ColouringError {
    fn from(e: serde_json::Error) -> Self {
        ColouringError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Anything that can answer edge-colour and vertex-class queries. Used by the
/// forest validity checks so that both colouring models can back them.
pub trait EdgeColouring {
    fn vertex_count(&self) -> usize;
    fn class_of(&self, v: Vertex) -> Result<Colour, ColouringError>;
    fn edge_colour(&self, u: Vertex, v: Vertex) -> Result<Colour, ColouringError>;
}

/// A restricted colouring truncated to `[horizon]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedColouring {
    horizon: usize,
    // index 0 unused
    classes: Vec<Colour>,
    opp: Vec<Vec<Vertex>>,
}

/// Structural or restricted-property violation found by [`RestrictedColouring::check_restricted`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouringViolation {
    pub vertex: Vertex,
    pub message: String,
}

impl RestrictedColouring {
    /// Builds a colouring, rejecting exception lists that leave `(v, horizon]`.
    /// Exception lists are sorted and deduplicated.
    pub fn new(classes: Vec<Colour>, opp: BTreeMap<Vertex, Vec<Vertex>>) -> Result<Self, ColouringError> {
        let c = Self::from_parts_unchecked(classes, opp)?;
        if let Some(v) = c.check_restricted().into_iter().next() {
            return Err(ColouringError::Structure(format!("vertex {}: {}", v.vertex, v.message)));
        }
        Ok(c)
    }

    /// Builds a colouring without range checks on the exception lists, so that
    /// [`check_restricted`](Self::check_restricted) has something to report on.
    /// Only the out-of-horizon keys are refused, since they have nowhere to live.
    pub fn from_parts_unchecked(
        classes: Vec<Colour>,
        opp: BTreeMap<Vertex, Vec<Vertex>>,
    ) -> Result<Self, ColouringError> {
        let horizon = classes.len();
        if horizon == 0 {
            return Err(ColouringError::Structure("horizon must be positive".into()));
        }
        let mut lists = vec![Vec::new(); horizon + 1];
        for (v, mut ws) in opp {
            if v == 0 || v > horizon {
                return Err(ColouringError::Structure(format!(
                    "exception list for vertex {v} outside [1, {horizon}]"
                )));
            }
            ws.sort_unstable();
            ws.dedup();
            lists[v] = ws;
        }
        let mut cls = Vec::with_capacity(horizon + 1);
        cls.push(Colour::Red);
        cls.extend(classes);
        Ok(Self {
            horizon,
            classes: cls,
            opp: lists,
        })
    }

    #[must_use]
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn check_vertex(&self, v: Vertex) -> Result<(), ColouringError> {
        if v == 0 {
            Err(ColouringError::ZeroVertex)
        } else if v > self.horizon {
            Err(ColouringError::HorizonExceeded {
                vertex: v,
                horizon: self.horizon,
            })
        } else {
            Ok(())
        }
    }

    pub fn class_of(&self, v: Vertex) -> Result<Colour, ColouringError> {
        self.check_vertex(v)?;
        Ok(self.classes[v])
    }

    /// Class lookup for callers that already know `v` is in range.
    #[must_use]
    pub fn class(&self, v: Vertex) -> Colour {
        self.classes[v]
    }

    /// The forward exception list of `v`.
    pub fn opp(&self, v: Vertex) -> Result<&[Vertex], ColouringError> {
        self.check_vertex(v)?;
        Ok(&self.opp[v])
    }

    pub fn edge_colour(&self, u: Vertex, v: Vertex) -> Result<Colour, ColouringError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(ColouringError::Loop(u));
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let class = self.classes[a];
        Ok(if self.opp[a].binary_search(&b).is_ok() {
            class.opposite()
        } else {
            class
        })
    }

    /// Opposite-class vertices `w > t` joined to `t` by an edge of the colour
    /// opposite to `t`'s class. Always a subset of `opp(t)`.
    pub fn forward_opposite_neighbours(&self, t: Vertex) -> Result<Vec<Vertex>, ColouringError> {
        self.check_vertex(t)?;
        let other = self.classes[t].opposite();
        Ok(self.opp[t]
            .iter()
            .copied()
            .filter(|&w| w > t && w <= self.horizon && self.classes[w] == other)
            .collect())
    }

    /// Largest `max(opp(v)) - v` over all vertices; 0 if there are no exceptions.
    #[must_use]
    pub fn max_forward_reach(&self) -> usize {
        (1..=self.horizon)
            .filter_map(|v| self.opp[v].last().map(|&w| w.saturating_sub(v)))
            .max()
            .unwrap_or(0)
    }

    /// Returns every structural violation plus any breach of the
    /// finite-exception bound. Never aborts.
    #[must_use]
    pub fn check_restricted(&self) -> Vec<ColouringViolation> {
        let mut out = Vec::new();
        if self.classes.len() != self.horizon + 1 {
            out.push(ColouringViolation {
                vertex: 0,
                message: format!("{} classes for horizon {}", self.classes.len() - 1, self.horizon),
            });
            return out;
        }
        let mut structurally_sound = true;
        for v in 1..=self.horizon {
            let list = &self.opp[v];
            if list.windows(2).any(|w| w[0] >= w[1]) {
                structurally_sound = false;
                out.push(ColouringViolation {
                    vertex: v,
                    message: "exception list not strictly increasing".into(),
                });
            }
            for &w in list {
                if w <= v || w > self.horizon {
                    structurally_sound = false;
                    out.push(ColouringViolation {
                        vertex: v,
                        message: format!("exception {w} outside ({v}, {}]", self.horizon),
                    });
                }
            }
        }
        if !structurally_sound {
            return out;
        }
        for v in 1..=self.horizon {
            let class = self.classes[v];
            let off = (1..=self.horizon)
                .filter(|&w| w != v)
                .filter(|&w| self.edge_colour(v, w).map(|c| c != class).unwrap_or(true))
                .count();
            let bound = self.opp[v].len() + (v - 1);
            if off > bound {
                out.push(ColouringViolation {
                    vertex: v,
                    message: format!("{off} off-class edges exceed bound {bound}"),
                });
            }
        }
        out
    }

    /// The colouring induced on `{offset + 1, ..., horizon}`, relabelled so that
    /// `offset + 1` becomes vertex 1.
    pub fn suffix(&self, offset: usize) -> Result<RestrictedColouring, ColouringError> {
        if offset >= self.horizon {
            return Err(ColouringError::HorizonExceeded {
                vertex: offset + 1,
                horizon: self.horizon,
            });
        }
        let classes = self.classes[offset + 1..].to_vec();
        let opp = (offset + 1..=self.horizon)
            .filter(|&v| !self.opp[v].is_empty())
            .map(|v| (v - offset, self.opp[v].iter().map(|w| w - offset).collect()))
            .collect();
        RestrictedColouring::from_parts_unchecked(classes, opp)
    }

    /// Materializes the colouring on `[n]` as an explicit upper-triangular array.
    pub fn to_explicit(&self, n: usize) -> Result<ExplicitColouring, ColouringError> {
        if n > self.horizon {
            return Err(ColouringError::HorizonExceeded {
                vertex: n,
                horizon: self.horizon,
            });
        }
        let mut colours = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 1..=n {
            for v in u + 1..=n {
                colours.push(self.edge_colour(u, v)?);
            }
        }
        Ok(ExplicitColouring { n, colours })
    }

    /// Class sequence of `[n]`, 0-padded so that index `v` is vertex `v`.
    #[must_use]
    pub fn classes_prefix(&self, n: usize) -> Vec<Colour> {
        self.classes[..=n.min(self.horizon)].to_vec()
    }

    // ---------------------------------------------------------------------
    // JSON
    // ---------------------------------------------------------------------

    pub fn to_json(&self) -> String {
        let file = RestrictedFile {
            horizon: self.horizon,
            classes: self.classes[1..].iter().map(|c| c.as_char()).collect(),
            opp: (1..=self.horizon)
                .filter(|&v| !self.opp[v].is_empty())
                .map(|v| (v.to_string(), self.opp[v].clone()))
                .collect(),
        };
        serde_json::to_string(&file).expect("colouring serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ColouringError> {
        let file: RestrictedFile = serde_json::from_str(text)?;
        let classes = parse_colour_string(&file.classes, "classes")?;
        if classes.len() != file.horizon {
            return Err(ColouringError::Structure(format!(
                "expected {} class entries, found {}",
                file.horizon,
                classes.len()
            )));
        }
        let mut opp = BTreeMap::new();
        for (key, ws) in file.opp {
            let v: Vertex = key
                .parse()
                .map_err(|_| ColouringError::Structure(format!("opp key {key:?} is not a vertex")))?;
            opp.insert(v, ws);
        }
        RestrictedColouring::new(classes, opp)
    }

    pub fn save(&self, path: &Path) -> Result<(), ColouringError> {
        std::fs::write(path, self.to_json()).map_err(|e| ColouringError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ColouringError> {
        let text = std::fs::read_to_string(path).map_err(|e| ColouringError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}

impl EdgeColouring for RestrictedColouring {
    fn vertex_count(&self) -> usize {
        self.horizon
    }
    fn class_of(&self, v: Vertex) -> Result<Colour, ColouringError> {
        RestrictedColouring::class_of(self, v)
    }
    fn edge_colour(&self, u: Vertex, v: Vertex) -> Result<Colour, ColouringError> {
        RestrictedColouring::edge_colour(self, u, v)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RestrictedFile {
    horizon: usize,
    classes: String,
    #[serde(default)]
    opp: BTreeMap<String, Vec<Vertex>>,
}

fn parse_colour_string(s: &str, field: &str) -> Result<Vec<Colour>, ColouringError> {
    s.chars()
        .enumerate()
        .map(|(i, ch)| {
            Colour::from_char(ch)
                .ok_or_else(|| ColouringError::Structure(format!("{field}[{i}] = {ch:?}, expected 'R' or 'B'")))
        })
        .collect()
}

// -------------------------------------------------------------------------
// Explicit colourings of K_n
// -------------------------------------------------------------------------

/// An arbitrary 2-edge-colouring of `K_n`, stored row-major over pairs `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitColouring {
    n: usize,
    colours: Vec<Colour>,
}

impl ExplicitColouring {
    pub fn new(n: usize, colours: Vec<Colour>) -> Result<Self, ColouringError> {
        if n == 0 {
            return Err(ColouringError::Structure("n must be positive".into()));
        }
        let want = n * (n - 1) / 2;
        if colours.len() != want {
            return Err(ColouringError::Structure(format!(
                "expected {want} edge colours for n = {n}, found {}",
                colours.len()
            )));
        }
        Ok(Self { n, colours })
    }

    pub fn monochromatic(n: usize, colour: Colour) -> Self {
        Self {
            n,
            colours: vec![colour; n * n.saturating_sub(1) / 2],
        }
    }

    /// Decodes colouring number `code` of `K_n`: bit `i` of `code` is the colour
    /// of the `i`-th pair in row-major order (1 = blue).
    pub fn from_code(n: usize, code: u64) -> Self {
        let m = n * n.saturating_sub(1) / 2;
        let colours = (0..m)
            .map(|i| if code >> i & 1 == 1 { Colour::Blue } else { Colour::Red })
            .collect();
        Self { n, colours }
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Self {
        let m = n * n.saturating_sub(1) / 2;
        let colours = (0..m)
            .map(|_| if rng.gen::<bool>() { Colour::Blue } else { Colour::Red })
            .collect();
        Self { n, colours }
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    fn pair_index(&self, u: Vertex, v: Vertex) -> usize {
        // offset of row u (1-based) in the row-major upper triangle
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let row = a - 1;
        row * self.n - row * (row + 1) / 2 + (b - a - 1)
    }

    pub fn colour(&self, u: Vertex, v: Vertex) -> Result<Colour, ColouringError> {
        for x in [u, v] {
            if x == 0 {
                return Err(ColouringError::ZeroVertex);
            }
            if x > self.n {
                return Err(ColouringError::HorizonExceeded {
                    vertex: x,
                    horizon: self.n,
                });
            }
        }
        if u == v {
            return Err(ColouringError::Loop(u));
        }
        Ok(self.colours[self.pair_index(u, v)])
    }

    /// Adjacency bitmasks of the colour-`c` graph; bit `j - 1` of entry `i - 1`
    /// is set iff `{i, j}` has colour `c`. Requires `n <= 64`.
    #[must_use]
    pub fn adjacency_masks(&self, c: Colour) -> Vec<u64> {
        assert!(self.n <= 64, "bitmask adjacency needs n <= 64");
        let mut masks = vec![0u64; self.n];
        let mut k = 0;
        for u in 1..=self.n {
            for v in u + 1..=self.n {
                if self.colours[k] == c {
                    masks[u - 1] |= 1 << (v - 1);
                    masks[v - 1] |= 1 << (u - 1);
                }
                k += 1;
            }
        }
        masks
    }

    pub fn to_json(&self) -> String {
        let file = ExplicitFile {
            n: self.n,
            upper: self.colours.iter().map(|c| c.as_char()).collect(),
        };
        serde_json::to_string(&file).expect("colouring serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ColouringError> {
        let file: ExplicitFile = serde_json::from_str(text)?;
        let colours = parse_colour_string(&file.upper, "upper")?;
        Self::new(file.n, colours)
    }

    pub fn save(&self, path: &Path) -> Result<(), ColouringError> {
        std::fs::write(path, self.to_json()).map_err(|e| ColouringError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ColouringError> {
        let text = std::fs::read_to_string(path).map_err(|e| ColouringError::Io(e.to_string()))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitFile {
    n: usize,
    upper: String,
}

/// An explicit colouring paired with a vertex class assignment, so that the
/// red/blue path-forest rules can be evaluated on it.
#[derive(Debug, Clone, Copy)]
pub struct ClassedExplicit<'a> {
    pub colouring: &'a ExplicitColouring,
    /// Index `v` holds the class of vertex `v`; index 0 is ignored.
    pub classes: &'a [Colour],
}

impl EdgeColouring for ClassedExplicit<'_> {
    fn vertex_count(&self) -> usize {
        self.colouring.n()
    }
    fn class_of(&self, v: Vertex) -> Result<Colour, ColouringError> {
        self.classes
            .get(v)
            .copied()
            .filter(|_| v > 0)
            .ok_or(ColouringError::HorizonExceeded {
                vertex: v,
                horizon: self.classes.len().saturating_sub(1),
            })
    }
    fn edge_colour(&self, u: Vertex, v: Vertex) -> Result<Colour, ColouringError> {
        self.colouring.colour(u, v)
    }
}

// -------------------------------------------------------------------------
// Generators
// -------------------------------------------------------------------------

/// Generator families for restricted colourings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// Classes i.i.d. red with probability `p`; each `w ∈ (v, v + window]`
    /// independently joins `opp(v)` with probability `q`.
    Random { p: f64, q: f64, window: usize },
    /// Class blocks of the given lengths, cycled, starting red. Exceptions are
    /// drawn as for `Random`.
    Block { lengths: Vec<usize>, q: f64, window: usize },
    /// Every vertex red, no exceptions.
    AllOneColour,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<(), ColouringError> {
        let prob = |name: &str, x: f64| {
            if (0.0..=1.0).contains(&x) {
                Ok(())
            } else {
                Err(ColouringError::Parameter(format!("{name} = {x} not in [0, 1]")))
            }
        };
        match self {
            GeneratorSpec::Random { p, q, window } => {
                prob("p", *p)?;
                prob("q", *q)?;
                if *q > 0.0 && *window == 0 {
                    return Err(ColouringError::Parameter("window must be positive when q > 0".into()));
                }
                Ok(())
            }
            GeneratorSpec::Block { lengths, q, window } => {
                if lengths.is_empty() || lengths.contains(&0) {
                    return Err(ColouringError::Parameter(
                        "block lengths must be non-empty and positive".into(),
                    ));
                }
                prob("q", *q)?;
                if *q > 0.0 && *window == 0 {
                    return Err(ColouringError::Parameter("window must be positive when q > 0".into()));
                }
                Ok(())
            }
            GeneratorSpec::AllOneColour => Ok(()),
        }
    }
}

fn draw_exceptions(rng: &mut ChaCha8Rng, horizon: usize, q: f64, window: usize) -> BTreeMap<Vertex, Vec<Vertex>> {
    let mut opp = BTreeMap::new();
    if q <= 0.0 {
        return opp;
    }
    for v in 1..=horizon {
        let hi = (v + window).min(horizon);
        let ws: Vec<Vertex> = (v + 1..=hi).filter(|_| rng.gen_bool(q)).collect();
        if !ws.is_empty() {
            opp.insert(v, ws);
        }
    }
    opp
}

/// Deterministic in `(spec, seed, horizon)`.
pub fn generate(spec: &GeneratorSpec, seed: u64, horizon: usize) -> Result<RestrictedColouring, ColouringError> {
    if horizon == 0 {
        return Err(ColouringError::Parameter("horizon must be at least 1".into()));
    }
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (classes, opp) = match spec {
        GeneratorSpec::Random { p, q, window } => {
            let classes = (0..horizon)
                .map(|_| if rng.gen_bool(*p) { Colour::Red } else { Colour::Blue })
                .collect();
            (classes, draw_exceptions(&mut rng, horizon, *q, *window))
        }
        GeneratorSpec::Block { lengths, q, window } => {
            let mut classes = Vec::with_capacity(horizon);
            let mut colour = Colour::Red;
            'outer: loop {
                for &len in lengths {
                    for _ in 0..len {
                        if classes.len() == horizon {
                            break 'outer;
                        }
                        classes.push(colour);
                    }
                    colour = colour.opposite();
                }
            }
            (classes, draw_exceptions(&mut rng, horizon, *q, *window))
        }
        GeneratorSpec::AllOneColour => (vec![Colour::Red; horizon], BTreeMap::new()),
    };
    RestrictedColouring::new(classes, opp)
}

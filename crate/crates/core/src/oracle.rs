//! Exact solvers for small instances.
//!
//! * [`longest_mono_path`]: longest path in each colour class of an explicit
//!   colouring, by dynamic programming over (vertex subset, endpoint).
//! * [`max_pathforest_coverage`]: the largest number of vertices of `[t]` a
//!   red (or blue) path-forest can cover, by branch and bound.
//! * [`exhaustive_coverage`]: the same quantity by enumerating every linear
//!   forest of the colour class. Slow, but it also handles the relaxed rules.
//! * [`enumerate_small`]: runs a predicate over all colourings of `K_n`
//!   (`n <= 6`) or over a seeded sample.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::colouring::{ClassedExplicit, Colour, ColouringError, EdgeColouring, ExplicitColouring, Vertex};
use crate::pathforest::PathForest;

pub const MAX_PATH_VERTICES: usize = 20;
pub const MAX_COVERAGE_PREFIX: usize = 14;
pub const MAX_EXHAUSTIVE_COVERAGE_VERTICES: usize = 10;
pub const MAX_ENUMERATION_VERTICES: usize = 6;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the exact-search limit {max}")]
    Size {
        what: &'static str,
        value: usize,
        max: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Colouring(#[from] ColouringError),
}

/// An exact optimum together with a witness achieving it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub colour: Colour,
    pub best: usize,
    /// A path, or the paths of a forest.
    pub witness: Vec<Vec<Vertex>>,
    /// Search states visited.
    pub explored: u64,
}

impl OracleResult {
    #[must_use]
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("oracle result serializes")
    }
}

// -------------------------------------------------------------------------
// Longest monochromatic path
// -------------------------------------------------------------------------

/// Longest path (counted in vertices) of each colour, red first.
pub fn longest_mono_path(c: &ExplicitColouring) -> Result<[OracleResult; 2], OracleError> {
    let n = c.n();
    if n > MAX_PATH_VERTICES {
        return Err(OracleError::Size {
            what: "n",
            value: n,
            max: MAX_PATH_VERTICES,
        });
    }
    Ok(Colour::BOTH.map(|colour| longest_in(&c.adjacency_masks(colour), colour)))
}

fn longest_in(adj: &[u64], colour: Colour) -> OracleResult {
    let n = adj.len();
    // reach[mask]: endpoints v such that some path covers exactly `mask` and ends at v
    let mut reach = vec![0u32; 1 << n];
    for v in 0..n {
        reach[1 << v] = 1 << v;
    }
    let (mut best, mut best_mask, mut explored) = (0usize, 0usize, 0u64);
    for mask in 1..reach.len() {
        let ends = reach[mask];
        if ends == 0 {
            continue;
        }
        explored += u64::from(ends.count_ones());
        let size = mask.count_ones() as usize;
        if size > best {
            best = size;
            best_mask = mask;
        }
        let mut e = ends;
        while e != 0 {
            let v = e.trailing_zeros() as usize;
            e &= e - 1;
            let mut ext = adj[v] as usize & !mask;
            while ext != 0 {
                let u = ext.trailing_zeros() as usize;
                ext &= ext - 1;
                reach[mask | 1 << u] |= 1 << u;
            }
        }
    }

    let mut witness = Vec::with_capacity(best);
    if best > 0 {
        let mut mask = best_mask;
        let mut v = reach[mask].trailing_zeros() as usize;
        witness.push(v + 1);
        while mask.count_ones() > 1 {
            let prev = mask ^ (1 << v);
            let u = (reach[prev] & adj[v] as u32).trailing_zeros() as usize;
            witness.push(u + 1);
            mask = prev;
            v = u;
        }
    }
    OracleResult {
        colour,
        best,
        witness: vec![witness],
        explored,
    }
}

/// Longest monochromatic path over both colours has at least `⌈2n/3⌉` vertices.
pub fn gg_bound_holds(c: &ExplicitColouring) -> Result<bool, OracleError> {
    let [r, b] = longest_mono_path(c)?;
    Ok(3 * r.best.max(b.best) >= 2 * c.n())
}

/// The longest red and longest blue paths together have at least `n` vertices.
pub fn two_path_bound_holds(c: &ExplicitColouring) -> Result<bool, OracleError> {
    let [r, b] = longest_mono_path(c)?;
    Ok(r.best + b.best >= c.n())
}

// -------------------------------------------------------------------------
// Path-forest coverage
// -------------------------------------------------------------------------

/// Endpoint links over the own-class vertices, with an undo log.
struct Links {
    deg: Vec<u8>,
    end: Vec<Vertex>,
    log: Vec<(Vertex, Vertex, u8)>,
}

impl Links {
    fn new(size: usize) -> Self {
        Links {
            deg: vec![0; size],
            end: (0..size).collect(),
            log: Vec::new(),
        }
    }

    fn can_join(&self, a: Vertex, b: Vertex) -> bool {
        a != b && self.deg[a] < 2 && self.deg[b] < 2 && self.end[a] != b
    }

    fn join(&mut self, a: Vertex, b: Vertex) {
        let (ea, eb) = (self.end[a], self.end[b]);
        for v in [a, b, ea, eb] {
            self.log.push((v, self.end[v], self.deg[v]));
        }
        self.deg[a] += 1;
        self.deg[b] += 1;
        self.end[ea] = eb;
        self.end[eb] = ea;
    }

    fn mark(&self) -> usize {
        self.log.len()
    }

    fn undo(&mut self, mark: usize) {
        while self.log.len() > mark {
            let (v, e, d) = self.log.pop().unwrap();
            self.end[v] = e;
            self.deg[v] = d;
        }
    }
}

struct CoverageSearch {
    // per opposite-class vertex of [t]: the own-class vertices it may sit between
    targets: Vec<(Vertex, Vec<Vertex>)>,
    links: Links,
    chosen: Vec<Option<(Vertex, Vertex)>>,
    best: usize,
    best_choice: Vec<Option<(Vertex, Vertex)>>,
    explored: u64,
}

impl CoverageSearch {
    fn go(&mut self, i: usize, count: usize) {
        self.explored += 1;
        if count > self.best {
            self.best = count;
            self.best_choice = self.chosen.clone();
        }
        if i == self.targets.len() {
            return;
        }
        // bound: every remaining target that still has two usable neighbours
        let open = self.targets[i..]
            .iter()
            .filter(|(_, cand)| cand.iter().filter(|&&r| self.links.deg[r] < 2).nth(1).is_some())
            .count();
        if count + open <= self.best {
            return;
        }
        let cand = self.targets[i].1.clone();
        for (k, &a) in cand.iter().enumerate() {
            for &b in &cand[k + 1..] {
                if !self.links.can_join(a, b) {
                    continue;
                }
                let mark = self.links.mark();
                self.links.join(a, b);
                self.chosen[i] = Some((a, b));
                self.go(i + 1, count + 1);
                self.chosen[i] = None;
                self.links.undo(mark);
                if self.best == self.targets.len() {
                    return;
                }
            }
        }
        self.go(i + 1, count);
    }
}

fn prefix_check(c: &dyn EdgeColouring, t: usize, max: usize) -> Result<(), OracleError> {
    if t > max {
        return Err(OracleError::Size {
            what: "t",
            value: t,
            max,
        });
    }
    if t == 0 || t > c.vertex_count() {
        return Err(OracleError::Parameter(format!(
            "prefix t = {t} must lie in [1, {}]",
            c.vertex_count()
        )));
    }
    Ok(())
}

/// Maximum of `|V(F) ∩ [t]|` over all path-forests `F` of colour
/// `forest_colour`: edges of that colour, endpoints of that class, classes
/// alternating along paths. Vertices beyond `t` (up to the colouring size) may
/// be used as connectors.
///
/// Own-class vertices of `[t]` are always coverable as one-vertex paths, so the
/// search only decides which opposite-class vertices sit between two own-class
/// neighbours; the chosen pairs must form a linear forest on own-class vertices.
pub fn max_pathforest_coverage(
    c: &ClassedExplicit<'_>,
    forest_colour: Colour,
    t: usize,
) -> Result<OracleResult, OracleError> {
    prefix_check(c, t, MAX_COVERAGE_PREFIX)?;
    let n = c.vertex_count();
    let mut classes = vec![forest_colour; n + 1];
    for (v, slot) in classes.iter_mut().enumerate().skip(1) {
        *slot = c.class_of(v)?;
    }
    let own: Vec<Vertex> = (1..=t).filter(|&v| classes[v] == forest_colour).collect();
    let mut targets = Vec::new();
    for b in (1..=t).filter(|&v| classes[v] != forest_colour) {
        let mut cand = Vec::new();
        for r in (1..=n).filter(|&r| classes[r] == forest_colour) {
            if c.edge_colour(b, r)? == forest_colour {
                cand.push(r);
            }
        }
        if cand.len() >= 2 {
            targets.push((b, cand));
        }
    }
    targets.sort_by_key(|(b, cand)| (cand.len(), *b));

    let k = targets.len();
    let mut search = CoverageSearch {
        targets,
        links: Links::new(n + 1),
        chosen: vec![None; k],
        best: 0,
        best_choice: vec![None; k],
        explored: 0,
    };
    search.go(0, 0);

    let mut f = PathForest::new();
    for &v in &own {
        f.ensure_vertex(v);
    }
    for (i, pick) in search.best_choice.iter().enumerate() {
        if let Some((a, b)) = *pick {
            let mid = search.targets[i].0;
            f.add_edge(a, mid).expect("search keeps a linear forest");
            f.add_edge(mid, b).expect("search keeps a linear forest");
        }
    }
    Ok(OracleResult {
        colour: forest_colour,
        best: own.len() + search.best,
        witness: f.paths(),
        explored: search.explored,
    })
}

/// Which path-forest rules [`exhaustive_coverage`] enforces. Own-class
/// endpoints are always required; otherwise every vertex would count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverageRules {
    pub alternation: bool,
}

impl Default for CoverageRules {
    fn default() -> Self {
        CoverageRules { alternation: true }
    }
}

/// [`max_pathforest_coverage`] by enumerating every linear forest of the
/// colour-`forest_colour` graph on the whole colouring (at most
/// [`MAX_EXHAUSTIVE_COVERAGE_VERTICES`] vertices).
pub fn exhaustive_coverage(
    c: &ClassedExplicit<'_>,
    forest_colour: Colour,
    t: usize,
    rules: CoverageRules,
) -> Result<OracleResult, OracleError> {
    let n = c.vertex_count();
    if n > MAX_EXHAUSTIVE_COVERAGE_VERTICES {
        return Err(OracleError::Size {
            what: "n",
            value: n,
            max: MAX_EXHAUSTIVE_COVERAGE_VERTICES,
        });
    }
    prefix_check(c, t, MAX_COVERAGE_PREFIX)?;
    let mut classes = vec![forest_colour; n + 1];
    for (v, slot) in classes.iter_mut().enumerate().skip(1) {
        *slot = c.class_of(v)?;
    }
    let mut edges = Vec::new();
    for u in 1..=n {
        for v in u + 1..=n {
            if c.edge_colour(u, v)? == forest_colour && (!rules.alternation || classes[u] != classes[v]) {
                edges.push((u, v));
            }
        }
    }

    struct Enum<'e> {
        edges: &'e [(Vertex, Vertex)],
        classes: &'e [Colour],
        colour: Colour,
        t: usize,
        links: Links,
        picked: Vec<(Vertex, Vertex)>,
        best: usize,
        best_edges: Vec<(Vertex, Vertex)>,
        explored: u64,
    }

    impl Enum<'_> {
        fn score(&self) -> (usize, Vec<(Vertex, Vertex)>) {
            let n = self.classes.len() - 1;
            let f = PathForest::from_edges_unchecked(&(1..=n).collect::<Vec<_>>(), &self.picked);
            let mut total = 0;
            let mut keep = Vec::new();
            for path in f.paths() {
                let (a, b) = (path[0], *path.last().unwrap());
                if self.classes[a] == self.colour && self.classes[b] == self.colour {
                    total += path.iter().filter(|&&v| v <= self.t).count();
                    keep.extend(path.windows(2).map(|w| (w[0], w[1])));
                }
            }
            (total, keep)
        }

        fn go(&mut self, i: usize) {
            self.explored += 1;
            if i == self.edges.len() {
                let (total, keep) = self.score();
                if total > self.best {
                    self.best = total;
                    self.best_edges = keep;
                }
                return;
            }
            let (u, v) = self.edges[i];
            if self.links.can_join(u, v) {
                let mark = self.links.mark();
                self.links.join(u, v);
                self.picked.push((u, v));
                self.go(i + 1);
                self.picked.pop();
                self.links.undo(mark);
            }
            self.go(i + 1);
        }
    }

    let mut e = Enum {
        edges: &edges,
        classes: &classes,
        colour: forest_colour,
        t,
        links: Links::new(n + 1),
        picked: Vec::new(),
        best: 0,
        best_edges: Vec::new(),
        explored: 0,
    };
    e.go(0);

    let mut f = PathForest::new();
    for v in (1..=t).filter(|&v| classes[v] == forest_colour) {
        f.ensure_vertex(v);
    }
    for &(u, v) in &e.best_edges {
        f.add_edge(u, v).expect("enumerated edges form a linear forest");
    }
    Ok(OracleResult {
        colour: forest_colour,
        best: e.best,
        witness: f.paths(),
        explored: e.explored,
    })
}

// -------------------------------------------------------------------------
// Enumeration
// -------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Every colouring of `K_n`, in code order.
    Exhaustive,
    /// `samples` uniformly random colourings from a seeded stream.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationOutcome {
    pub checked: u64,
    pub counterexample: Option<ExplicitColouring>,
}

/// Runs `predicate` until it first returns `false`.
pub fn enumerate_small<P>(n: usize, mode: Enumeration, mut predicate: P) -> Result<EnumerationOutcome, OracleError>
where
    P: FnMut(&ExplicitColouring) -> Result<bool, OracleError>,
{
    if n == 0 {
        return Err(OracleError::Parameter("n must be positive".into()));
    }
    let mut checked = 0;
    match mode {
        Enumeration::Exhaustive => {
            if n > MAX_ENUMERATION_VERTICES {
                return Err(OracleError::Size {
                    what: "n",
                    value: n,
                    max: MAX_ENUMERATION_VERTICES,
                });
            }
            let pairs = n * (n - 1) / 2;
            for code in 0..1u64 << pairs {
                let c = ExplicitColouring::from_code(n, code);
                checked += 1;
                if !predicate(&c)? {
                    return Ok(EnumerationOutcome {
                        checked,
                        counterexample: Some(c),
                    });
                }
            }
        }
        Enumeration::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let c = ExplicitColouring::random(n, &mut rng);
                checked += 1;
                if !predicate(&c)? {
                    return Ok(EnumerationOutcome {
                        checked,
                        counterexample: Some(c),
                    });
                }
            }
        }
    }
    Ok(EnumerationOutcome {
        checked,
        counterexample: None,
    })
}

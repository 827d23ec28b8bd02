//! Vertex-disjoint unions of paths with degree accounting.
//!
//! Same-path queries are answered in O(1) by endpoint pairing: every path
//! endpoint stores the opposite endpoint of its path (an isolated vertex
//! stores itself). Joining two paths by an edge only rewrites the links of the
//! two surviving endpoints.
//!
//! Each incidence also remembers the engine round in which its edge was added,
//! so that past degrees can be recovered without snapshots.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::{Colour, EdgeColouring, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ForestError {
    #[error("vertex {0} is not in the forest")]
    Absent(Vertex),
    #[error("adding {u}-{v} would give vertex {at} degree 3")]
    WouldExceedDegree { u: Vertex, v: Vertex, at: Vertex },
    #[error("adding {u}-{v} would close a cycle")]
    WouldCreateCycle { u: Vertex, v: Vertex },
    #[error("spare degree {available} is below the requested {needed}")]
    InsufficientSpareDegree { available: usize, needed: usize },
    #[error("only {0} attachable neighbours, need at least 3")]
    InsufficientNeighbourhood(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("absorption precondition violated: {0}")]
    AbsorptionPrecondition(String),
    #[error("malformed forest file: {0}")]
    Parse(String),
}

/// A path-forest on positive integer vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathForest {
    present: Vec<bool>,
    adj: Vec<Vec<Vertex>>,
    stamps: Vec<Vec<usize>>,
    other_end: Vec<Vertex>,
    vertex_count: usize,
    edge_count: usize,
    max_vertex: Vertex,
}

impl PathForest {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    fn grow(&mut self, v: Vertex) {
        if v >= self.present.len() {
            let len = (v + 1).max(self.present.len() * 2);
            self.present.resize(len, false);
            self.adj.resize_with(len, Vec::new);
            self.stamps.resize_with(len, Vec::new);
            self.other_end.resize(len, 0);
        }
    }

    /// Adds `v` as an isolated vertex if it is not already present.
    pub fn ensure_vertex(&mut self, v: Vertex) {
        self.grow(v);
        if !self.present[v] {
            self.present[v] = true;
            self.other_end[v] = v;
            self.vertex_count += 1;
            self.max_vertex = self.max_vertex.max(v);
        }
    }

    #[must_use]
    pub fn contains(&self, v: Vertex) -> bool {
        self.present.get(v).copied().unwrap_or(false)
    }

    /// Degree of `v`; absent vertices have degree 0.
    #[must_use]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj.get(v).map_or(0, Vec::len)
    }

    /// Degree of `v` counting only edges added in rounds `<= round`.
    #[must_use]
    pub fn degree_at(&self, v: Vertex, round: usize) -> usize {
        self.stamps
            .get(v)
            .map_or(0, |s| s.iter().filter(|&&r| r <= round).count())
    }

    /// Rounds at which the edges incident to `v` were added.
    #[must_use]
    pub fn incidence_rounds(&self, v: Vertex) -> &[usize] {
        self.stamps.get(v).map_or(&[], Vec::as_slice)
    }

    #[must_use]
    pub fn neighbours(&self, v: Vertex) -> &[Vertex] {
        self.adj.get(v).map_or(&[], Vec::as_slice)
    }

    #[must_use]
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    #[must_use]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[must_use]
    pub fn max_vertex(&self) -> Vertex {
        self.max_vertex
    }

    /// Vertices in ascending order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.present.iter().enumerate().filter(|(_, &p)| p).map(|(v, _)| v)
    }

    /// Present vertices in `(lo, hi]`.
    pub fn vertices_in(&self, lo: Vertex, hi: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let hi = hi.min(self.present.len().saturating_sub(1));
        (lo + 1..=hi).filter(move |&v| self.present[v])
    }

    /// `|V(F) ∩ [t]|`.
    #[must_use]
    pub fn count_upto(&self, t: Vertex) -> usize {
        let beyond = if t < self.max_vertex {
            self.vertices_in(t, self.max_vertex).count()
        } else {
            0
        };
        self.vertex_count - beyond
    }

    /// Edges `(u, v)` with `u < v`, in ascending order.
    #[must_use]
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in self.vertices() {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// True iff `u` and `v` are the two endpoints of one path with at least
    /// one edge.
    #[must_use]
    pub fn same_path_endpoints(&self, u: Vertex, v: Vertex) -> bool {
        u != v && self.contains(u) && self.degree(u) <= 1 && self.other_end[u] == v
    }

    /// For an endpoint `v`, the opposite endpoint of its path.
    #[must_use]
    pub fn other_end(&self, v: Vertex) -> Option<Vertex> {
        (self.contains(v) && self.degree(v) <= 1).then(|| self.other_end[v])
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) -> Result<(), ForestError> {
        self.add_edge_stamped(u, v, 0)
    }

    /// Adds `u-v`, recording `round` as the edge's creation round.
    pub fn add_edge_stamped(&mut self, u: Vertex, v: Vertex, round: usize) -> Result<(), ForestError> {
        if u == v {
            return Err(ForestError::WouldCreateCycle { u, v });
        }
        for at in [u, v] {
            if self.degree(at) >= 2 {
                return Err(ForestError::WouldExceedDegree { u, v, at });
            }
        }
        if self.same_path_endpoints(u, v) {
            return Err(ForestError::WouldCreateCycle { u, v });
        }
        self.ensure_vertex(u);
        self.ensure_vertex(v);
        let a = self.other_end[u];
        let b = self.other_end[v];
        self.adj[u].push(v);
        self.adj[v].push(u);
        self.stamps[u].push(round);
        self.stamps[v].push(round);
        self.other_end[a] = b;
        self.other_end[b] = a;
        self.edge_count += 1;
        Ok(())
    }

    /// `Σ_{v ∈ vs} (2 - d(v))`.
    pub fn spare_degree(&self, vs: &[Vertex]) -> Result<usize, ForestError> {
        vs.iter().try_fold(0, |acc, &v| {
            if self.contains(v) {
                Ok(acc + 2 - self.degree(v))
            } else {
                Err(ForestError::Absent(v))
            }
        })
    }

    /// Inclusion-minimal subset of the shortest prefix of `vs` whose spare
    /// degree reaches `ell`.
    ///
    /// The prefix is cut at the first position where the running spare degree
    /// reaches `ell`; saturated vertices are discarded, then the survivors are
    /// scanned in order and any vertex whose removal keeps the total at least
    /// `ell` is dropped. The result has spare degree `ell` or `ell + 1`.
    pub fn select_sigma(&self, vs: &[Vertex], ell: usize) -> Result<Vec<Vertex>, ForestError> {
        if ell < 2 || !ell.is_multiple_of(2) {
            return Err(ForestError::Precondition(format!(
                "ell = {ell} must be even and at least 2"
            )));
        }
        let mut prefix = Vec::new();
        let mut total = 0;
        for &v in vs {
            if !self.contains(v) {
                return Err(ForestError::Absent(v));
            }
            let spare = 2 - self.degree(v);
            if spare > 0 {
                prefix.push((v, spare));
                total += spare;
            }
            if total >= ell {
                break;
            }
        }
        if total < ell {
            return Err(ForestError::InsufficientSpareDegree {
                available: total,
                needed: ell,
            });
        }
        let mut kept = Vec::with_capacity(prefix.len());
        for (v, spare) in prefix {
            if total - spare >= ell {
                total -= spare;
            } else {
                kept.push(v);
            }
        }
        Ok(kept)
    }

    /// Attaches the new vertex `x` to two members of `candidates` so that the
    /// result stays a path-forest, maximising the smaller chosen endpoint, then
    /// the larger one. Returns `(j1, j2)` with `j1 < j2`.
    pub fn attach_two(
        &mut self,
        x: Vertex,
        candidates: &[Vertex],
        round: usize,
    ) -> Result<(Vertex, Vertex), ForestError> {
        if candidates.len() < 3 {
            return Err(ForestError::InsufficientNeighbourhood(candidates.len()));
        }
        if self.contains(x) {
            return Err(ForestError::Precondition(format!("{x} is already in the forest")));
        }
        let mut js = candidates.to_vec();
        js.sort_unstable();
        js.dedup();
        if js.len() < 3 {
            return Err(ForestError::InsufficientNeighbourhood(js.len()));
        }
        if let Some(&j) = js.iter().find(|&&j| j == x || self.degree(j) >= 2) {
            return Err(ForestError::Precondition(format!(
                "candidate {j} cannot take another edge"
            )));
        }
        // Scan pairs by descending smaller endpoint, then descending larger one.
        let mut choice = None;
        'search: for lo in (0..js.len()).rev() {
            for hi in (lo + 1..js.len()).rev() {
                if !self.same_path_endpoints(js[lo], js[hi]) {
                    choice = Some((js[lo], js[hi]));
                    break 'search;
                }
            }
        }
        let (j1, j2) = choice.ok_or_else(|| ForestError::Precondition("no attachable pair".into()))?;
        self.ensure_vertex(x);
        self.add_edge_stamped(x, j1, round)?;
        self.add_edge_stamped(x, j2, round)?;
        Ok((j1, j2))
    }

    /// Covers all but at most four vertices of `ys` with paths through the
    /// bipartite graph `(xs, ys)` whose endpoints lie in `xs`.
    ///
    /// Requires `spare_degree(xs) >= 2|ys|`, `ys` disjoint from the forest, and
    /// every `x` adjacent to all but at most two members of `ys`. While five or
    /// more vertices of `ys` are uncovered, the first two unsaturated `x`s (in
    /// `xs` order) that are not ends of one path are joined through the
    /// smallest uncovered `y` adjacent to both.
    pub fn absorb<F>(
        &mut self,
        xs: &[Vertex],
        ys: &[Vertex],
        adjacent: F,
        round: usize,
    ) -> Result<Absorption, ForestError>
    where
        F: Fn(Vertex, Vertex) -> bool,
    {
        let spare = self.spare_degree(xs)?;
        if spare < 2 * ys.len() {
            return Err(ForestError::AbsorptionPrecondition(format!(
                "spare degree {spare} below 2|Y| = {}",
                2 * ys.len()
            )));
        }
        let mut uncovered: Vec<Vertex> = ys.to_vec();
        uncovered.sort_unstable();
        uncovered.dedup();
        if let Some(&y) = uncovered.iter().find(|&&y| self.contains(y)) {
            return Err(ForestError::AbsorptionPrecondition(format!(
                "{y} is already in the forest"
            )));
        }
        for &x in xs {
            let missing = uncovered.iter().filter(|&&y| !adjacent(x, y)).count();
            if missing > 2 {
                return Err(ForestError::AbsorptionPrecondition(format!(
                    "{x} misses {missing} of the {} vertices to absorb",
                    uncovered.len()
                )));
            }
        }

        let mut result = Absorption::default();
        while uncovered.len() >= 5 {
            let eligible = |f: &Self, v: Vertex| f.degree(v) < 2;
            let x1 = *xs
                .iter()
                .find(|&&x| eligible(self, x))
                .ok_or_else(|| ForestError::AbsorptionPrecondition("no unsaturated vertex left".into()))?;
            let x2 = *xs
                .iter()
                .find(|&&x| x != x1 && eligible(self, x) && !self.same_path_endpoints(x1, x))
                .ok_or_else(|| ForestError::AbsorptionPrecondition("no second unsaturated vertex".into()))?;
            let pos = uncovered
                .iter()
                .position(|&y| adjacent(x1, y) && adjacent(x2, y))
                .ok_or_else(|| {
                    ForestError::AbsorptionPrecondition(format!("{x1} and {x2} have no common neighbour"))
                })?;
            let y = uncovered.remove(pos);
            self.ensure_vertex(y);
            self.add_edge_stamped(x1, y, round)?;
            self.add_edge_stamped(y, x2, round)?;
            result.edges.push((x1, y));
            result.edges.push((y, x2));
            result.covered.push(y);
        }
        result.covered.sort_unstable();
        Ok(result)
    }

    /// Paths listed from their smaller endpoint; isolated vertices as
    /// singletons. Components without endpoints (cycles) are omitted.
    #[must_use]
    pub fn paths(&self) -> Vec<Vec<Vertex>> {
        let mut seen = vec![false; self.present.len()];
        let mut out = Vec::new();
        for v in self.vertices() {
            if seen[v] || self.degree(v) > 1 {
                continue;
            }
            let mut path = vec![v];
            seen[v] = true;
            let mut prev = 0;
            let mut cur = v;
            loop {
                let next = self.adj[cur].iter().copied().find(|&w| w != prev && !seen[w]);
                match next {
                    Some(w) => {
                        seen[w] = true;
                        path.push(w);
                        prev = cur;
                        cur = w;
                    }
                    None => break,
                }
            }
            out.push(path);
        }
        out
    }

    /// Builds a structure from raw vertex and edge lists without any checks.
    /// Intended for feeding [`is_valid`](Self::is_valid) hand-made inputs.
    #[must_use]
    pub fn from_edges_unchecked(vertices: &[Vertex], edges: &[(Vertex, Vertex)]) -> Self {
        let mut f = PathForest::new();
        for &v in vertices {
            f.ensure_vertex(v);
        }
        for &(u, v) in edges {
            f.ensure_vertex(u);
            f.ensure_vertex(v);
            f.adj[u].push(v);
            f.adj[v].push(u);
            f.stamps[u].push(0);
            f.stamps[v].push(0);
            f.edge_count += 1;
        }
        for path in f.paths() {
            let (a, b) = (path[0], *path.last().unwrap());
            f.other_end[a] = b;
            f.other_end[b] = a;
        }
        f
    }

    /// From-scratch validity check: symmetric adjacency, degrees at most two,
    /// no cycles, intact endpoint links, and (when given) the colour rules of a
    /// red or blue path-forest.
    #[must_use]
    pub fn is_valid(&self, constraints: Option<&ColouredForestConstraints<'_>>) -> Vec<ForestViolation> {
        let mut out = Vec::new();
        let verts: Vec<Vertex> = self.vertices().collect();
        let mut edge_set = BTreeSet::new();
        for &u in &verts {
            if self.adj[u].len() > 2 {
                out.push(ForestViolation::DegreeExceeded {
                    vertex: u,
                    degree: self.adj[u].len(),
                });
            }
            for &v in &self.adj[u] {
                if !self.contains(v) || !self.adj[v].contains(&u) {
                    out.push(ForestViolation::Asymmetric { u, v });
                }
                if u == v {
                    out.push(ForestViolation::Cycle { vertex: u });
                }
                edge_set.insert((u.min(v), u.max(v)));
            }
        }
        let total_incidences: usize = verts.iter().map(|&v| self.adj[v].len()).sum();
        if edge_set.len() * 2 != total_incidences || edge_set.len() != self.edge_count {
            out.push(ForestViolation::CountMismatch {
                recorded: self.edge_count,
                recomputed: edge_set.len(),
            });
        }
        if verts.len() != self.vertex_count {
            out.push(ForestViolation::CountMismatch {
                recorded: self.vertex_count,
                recomputed: verts.len(),
            });
        }

        // acyclicity by union-find over the edge list
        let size = self.present.len();
        let mut parent: Vec<usize> = (0..size).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(u, v) in &edge_set {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                out.push(ForestViolation::Cycle { vertex: u });
            } else {
                parent[ru] = rv;
            }
        }

        if out.is_empty() {
            for path in self.paths() {
                let (a, b) = (path[0], *path.last().unwrap());
                if self.other_end[a] != b || self.other_end[b] != a {
                    out.push(ForestViolation::StaleEndpointLink { vertex: a });
                }
            }
        }

        if let Some(c) = constraints {
            for &(u, v) in &edge_set {
                match c.colouring.edge_colour(u, v) {
                    Ok(col) if col == c.forest_colour => {}
                    Ok(col) => out.push(ForestViolation::EdgeColour { u, v, colour: col }),
                    Err(_) => out.push(ForestViolation::Unknown { vertex: u.max(v) }),
                }
                match (c.colouring.class_of(u), c.colouring.class_of(v)) {
                    (Ok(a), Ok(b)) if a != b => {}
                    (Ok(_), Ok(_)) => out.push(ForestViolation::NonAlternating { u, v }),
                    _ => out.push(ForestViolation::Unknown { vertex: u.max(v) }),
                }
            }
            for &v in &verts {
                if self.adj[v].len() <= 1 {
                    match c.colouring.class_of(v) {
                        Ok(class) if class == c.forest_colour => {}
                        Ok(class) => out.push(ForestViolation::EndpointClass { vertex: v, class }),
                        Err(_) => out.push(ForestViolation::Unknown { vertex: v }),
                    }
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ForestFile { paths: self.paths() }).expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ForestError> {
        let file: ForestFile = serde_json::from_str(text).map_err(|e| ForestError::Parse(e.to_string()))?;
        let mut f = PathForest::new();
        for path in &file.paths {
            for &v in path {
                if v == 0 || f.contains(v) {
                    return Err(ForestError::Parse(format!("vertex {v} invalid or repeated")));
                }
                f.ensure_vertex(v);
            }
            for w in path.windows(2) {
                f.add_edge(w[0], w[1])?;
            }
        }
        Ok(f)
    }
}

/// Result of [`PathForest::absorb`]: the added edges and the covered subset of `Y`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Absorption {
    pub edges: Vec<(Vertex, Vertex)>,
    pub covered: Vec<Vertex>,
}

/// Colour rules for a red (or blue) path-forest.
#[derive(Clone, Copy)]
pub struct ColouredForestConstraints<'a> {
    pub forest_colour: Colour,
    pub colouring: &'a dyn EdgeColouring,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForestViolation {
    DegreeExceeded { vertex: Vertex, degree: usize },
    Asymmetric { u: Vertex, v: Vertex },
    Cycle { vertex: Vertex },
    CountMismatch { recorded: usize, recomputed: usize },
    StaleEndpointLink { vertex: Vertex },
    EdgeColour { u: Vertex, v: Vertex, colour: Colour },
    NonAlternating { u: Vertex, v: Vertex },
    EndpointClass { vertex: Vertex, class: Colour },
    Unknown { vertex: Vertex },
}

#[derive(Serialize, Deserialize)]
struct ForestFile {
    paths: Vec<Vec<Vertex>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::RestrictedColouring;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn path(vs: &[Vertex]) -> PathForest {
        let mut f = PathForest::new();
        for &v in vs {
            f.ensure_vertex(v);
        }
        for w in vs.windows(2) {
            f.add_edge(w[0], w[1]).unwrap();
        }
        f
    }

    #[test]
    fn ensure_vertex_is_idempotent() {
        let mut f = PathForest::new();
        f.ensure_vertex(1);
        assert_eq!(f.vertex_count(), 1);
        assert_eq!(f.degree(1), 0);
        let before = f.clone();
        f.ensure_vertex(1);
        assert_eq!(f, before);

        let mut g = path(&[1, 2, 3]);
        g.ensure_vertex(2);
        assert_eq!(g.degree(2), 2);
    }

    #[test]
    fn add_edge_joins_and_refuses_cycles() {
        let mut f = PathForest::new();
        f.ensure_vertex(3);
        f.ensure_vertex(8);
        f.add_edge(3, 8).unwrap();
        assert_eq!(f.paths(), vec![vec![3, 8]]);
        assert_eq!(f.add_edge(8, 3), Err(ForestError::WouldCreateCycle { u: 8, v: 3 }));

        let mut g = path(&[1, 2, 3, 4]);
        assert_eq!(g.add_edge(4, 1), Err(ForestError::WouldCreateCycle { u: 4, v: 1 }));
        assert!(matches!(
            g.add_edge(2, 9),
            Err(ForestError::WouldExceedDegree { at: 2, .. })
        ));
        g.add_edge(4, 9).unwrap();
        assert_eq!(g.other_end(1), Some(9));
        assert!(g.is_valid(None).is_empty());
    }

    #[test]
    fn spare_degree_counts() {
        let mut f = path(&[1, 2]);
        f.ensure_vertex(5);
        f.ensure_vertex(6);
        assert_eq!(f.spare_degree(&[]).unwrap(), 0);
        assert_eq!(f.spare_degree(&[5, 6]).unwrap(), 4);
        assert_eq!(f.spare_degree(&[1, 2, 5]).unwrap(), 4);
        assert_eq!(f.spare_degree(&[7]), Err(ForestError::Absent(7)));
    }

    #[test]
    fn sigma_single_isolated_vertex() {
        let mut f = PathForest::new();
        f.ensure_vertex(4);
        assert_eq!(f.select_sigma(&[4], 2).unwrap(), vec![4]);
    }

    /// All inclusion-minimal subsets of `prefix` with spare at least `ell`.
    fn minimal_subsets(f: &PathForest, prefix: &[Vertex], ell: usize) -> Vec<Vec<Vertex>> {
        let n = prefix.len();
        let spare = |mask: u32| -> usize {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| 2 - f.degree(prefix[i]))
                .sum()
        };
        let mut out = Vec::new();
        for mask in 0u32..1 << n {
            if spare(mask) < ell {
                continue;
            }
            let minimal = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .all(|i| spare(mask & !(1 << i)) < ell);
            if minimal {
                out.push((0..n).filter(|i| mask >> i & 1 == 1).map(|i| prefix[i]).collect());
            }
        }
        out
    }

    #[test]
    fn sigma_drops_in_scan_order() {
        // a has spare 1, b and c are isolated
        let mut f = path(&[10, 11]);
        f.ensure_vertex(20);
        f.ensure_vertex(30);
        let (a, b, c) = (10, 20, 30);
        let got = f.select_sigma(&[a, b, c], 4).unwrap();
        assert_eq!(got, vec![b, c]);
        let spare = f.spare_degree(&got).unwrap();
        assert!(spare == 4 || spare == 5);
        let options = minimal_subsets(&f, &[a, b, c], 4);
        assert!(options.contains(&got));
        for o in &options {
            let s = f.spare_degree(o).unwrap();
            assert!(s == 4 || s == 5);
        }
    }

    #[test]
    fn sigma_exact_total_keeps_all_positive_members() {
        let mut f = path(&[1, 2, 3]);
        f.ensure_vertex(7);
        // spare: 1 -> 1, 2 -> 0, 3 -> 1, 7 -> 2; total 4
        assert_eq!(f.select_sigma(&[1, 2, 3, 7], 4).unwrap(), vec![1, 3, 7]);
        assert_eq!(
            f.select_sigma(&[2, 1], 4),
            Err(ForestError::InsufficientSpareDegree {
                available: 1,
                needed: 4
            })
        );
    }

    #[test]
    fn attach_two_prefers_large_minimum() {
        let mut f = PathForest::new();
        for v in [4, 7, 9] {
            f.ensure_vertex(v);
        }
        assert_eq!(f.attach_two(1, &[4, 7, 9], 1).unwrap(), (7, 9));
        assert_eq!(f.neighbours(1), &[7, 9]);
        assert!(f.is_valid(None).is_empty());
    }

    #[test]
    fn attach_two_avoids_closing_a_path() {
        // 5 and 9 end one path; 6 is isolated
        let mut f = path(&[5, 2, 9]);
        f.ensure_vertex(6);
        let js = [5, 6, 9];
        // brute force: every valid pair, best by (min, max)
        let mut best = None;
        for i in 0..3 {
            for k in i + 1..3 {
                let mut g = f.clone();
                g.ensure_vertex(1);
                if g.add_edge(1, js[i]).is_ok() && g.add_edge(1, js[k]).is_ok() {
                    let key = (js[i].min(js[k]), js[i].max(js[k]));
                    best = best.max(Some(key));
                }
            }
        }
        let got = f.attach_two(1, &js, 3).unwrap();
        assert_eq!(Some(got), best);
        assert_eq!(got, (6, 9));
        assert!(f.is_valid(None).is_empty());
        assert!(f.degree(6) <= 2 && f.degree(9) <= 2);
    }

    #[test]
    fn attach_two_errors() {
        let mut f = PathForest::new();
        assert_eq!(
            f.attach_two(1, &[2, 3], 1),
            Err(ForestError::InsufficientNeighbourhood(2))
        );
        let mut g = path(&[2, 3, 4]);
        g.ensure_vertex(5);
        g.ensure_vertex(6);
        assert!(matches!(
            g.attach_two(1, &[3, 5, 6], 1),
            Err(ForestError::Precondition(_))
        ));
    }

    #[test]
    fn absorb_small_y_is_trivial() {
        let mut f = PathForest::new();
        for x in 1..=4 {
            f.ensure_vertex(x);
        }
        let res = f.absorb(&[1, 2, 3, 4], &[10, 11, 12, 13], |_, _| true, 1).unwrap();
        assert!(res.covered.is_empty() && res.edges.is_empty());
        assert_eq!(f.edge_count(), 0);
    }

    fn exhaustive_best_cover(
        f: &PathForest,
        xs: &[Vertex],
        ys: &[Vertex],
        adjacent: &dyn Fn(Vertex, Vertex) -> bool,
    ) -> usize {
        // Each y is either left out or becomes an internal vertex joined to two xs.
        fn go(
            f: &PathForest,
            xs: &[Vertex],
            ys: &[Vertex],
            i: usize,
            adjacent: &dyn Fn(Vertex, Vertex) -> bool,
        ) -> usize {
            if i == ys.len() {
                return 0;
            }
            let mut best = go(f, xs, ys, i + 1, adjacent);
            let y = ys[i];
            for a in 0..xs.len() {
                for b in a + 1..xs.len() {
                    let (x1, x2) = (xs[a], xs[b]);
                    if !adjacent(x1, y) || !adjacent(x2, y) {
                        continue;
                    }
                    let mut g = f.clone();
                    g.ensure_vertex(y);
                    if g.add_edge(x1, y).is_ok() && g.add_edge(y, x2).is_ok() {
                        best = best.max(1 + go(&g, xs, ys, i + 1, adjacent));
                    }
                }
            }
            best
        }
        go(f, xs, ys, 0, adjacent)
    }

    #[test]
    fn absorb_five_into_five_isolated() {
        let mut f = PathForest::new();
        let xs = [1, 2, 3, 4, 5];
        let ys = [11, 12, 13, 14, 15];
        for x in xs {
            f.ensure_vertex(x);
        }
        let best = exhaustive_best_cover(&f, &xs, &ys, &|_, _| true);
        assert!(best >= ys.len() - 4);
        let res = f.clone().absorb(&xs, &ys, |_, _| true, 1).unwrap();
        assert_eq!(res.covered, vec![11]);
        assert_eq!(res.edges, vec![(1, 11), (11, 2)]);
        assert!(res.covered.len() >= ys.len() - 4 && res.covered.len() <= best);
    }

    #[test]
    fn absorb_rejects_failed_hypotheses() {
        let mut f = PathForest::new();
        for x in 1..=3 {
            f.ensure_vertex(x);
        }
        let ys = [10, 11, 12, 13, 14];
        assert!(matches!(
            f.absorb(&[1, 2, 3], &ys, |_, _| true, 1),
            Err(ForestError::AbsorptionPrecondition(_))
        ));
        for x in 4..=5 {
            f.ensure_vertex(x);
        }
        // vertex 1 misses three of the ys
        let adj = |x: Vertex, y: Vertex| !(x == 1 && y <= 12);
        assert!(matches!(
            f.absorb(&[1, 2, 3, 4, 5], &ys, adj, 1),
            Err(ForestError::AbsorptionPrecondition(_))
        ));
    }

    #[test]
    fn is_valid_reports_cycles_and_colour_rules() {
        let tri = PathForest::from_edges_unchecked(&[1, 2, 3], &[(1, 2), (2, 3), (1, 3)]);
        assert!(tri
            .is_valid(None)
            .iter()
            .any(|v| matches!(v, ForestViolation::Cycle { .. })));

        // vertex 2 is blue; red edges 1-2 and 2-3 by the default rule
        let mut classes = vec![Colour::Red; 4];
        classes[1] = Colour::Blue;
        let opp = BTreeMap::from([(2, vec![3])]);
        let c = RestrictedColouring::new(classes, opp).unwrap();
        let cons = ColouredForestConstraints {
            forest_colour: Colour::Red,
            colouring: &c,
        };
        assert!(path(&[1, 2, 3]).is_valid(Some(&cons)).is_empty());
        let bad = path(&[1, 2]);
        let v = bad.is_valid(Some(&cons));
        assert!(
            v.contains(&ForestViolation::EndpointClass {
                vertex: 2,
                class: Colour::Blue
            }),
            "{v:?}"
        );
        let nonalt = path(&[1, 3]);
        assert!(nonalt
            .is_valid(Some(&cons))
            .contains(&ForestViolation::NonAlternating { u: 1, v: 3 }));
    }

    #[test]
    fn json_round_trip() {
        let mut f = path(&[3, 1, 4]);
        f.ensure_vertex(9);
        let text = f.to_json();
        assert_eq!(text, r#"{"paths":[[3,1,4],[9]]}"#);
        let g = PathForest::from_json(&text).unwrap();
        assert_eq!(g.paths(), f.paths());
        assert!(PathForest::from_json(r#"{"paths":[[1,2],[2]]}"#).is_err());
    }

    #[test]
    fn random_insertions_stay_valid() {
        let mut f = PathForest::new();
        let pairs = [
            (1, 2),
            (3, 4),
            (2, 3),
            (5, 6),
            (7, 1),
            (6, 8),
            (9, 10),
            (10, 5),
            (4, 11),
            (12, 9),
        ];
        for (u, v) in pairs {
            f.add_edge(u, v).unwrap();
            assert!(f.is_valid(None).is_empty(), "after {u}-{v}");
        }
        assert_eq!(f.edge_count(), 10);
    }

    proptest! {
        #[test]
        fn arbitrary_edge_attempts_keep_forest_valid(ops in proptest::collection::vec((1usize..25, 1usize..25), 1..80)) {
            let mut f = PathForest::new();
            for (u, v) in ops {
                let watch: Vec<Vertex> = (1..25).filter(|&w| f.contains(w)).collect();
                let before = f.spare_degree(&watch).unwrap();
                let (du, dv) = (f.degree(u), f.degree(v));
                let had = (f.contains(u), f.contains(v));
                if f.add_edge(u, v).is_ok() {
                    // each endpoint already watched loses exactly one spare unit
                    let lost = usize::from(had.0 && du < 2) + usize::from(had.1 && dv < 2);
                    prop_assert_eq!(f.spare_degree(&watch).unwrap(), before - lost);
                }
                prop_assert!(f.is_valid(None).is_empty());
            }
        }

        #[test]
        fn sigma_is_minimal_with_tight_spare(degs in proptest::collection::vec(0usize..3, 1..16), half in 1usize..6) {
            let ell = 2 * half;
            // build a forest where vertex 100 + i has degree degs[i] via private leaves
            let mut f = PathForest::new();
            let mut leaf = 1000;
            let vs: Vec<Vertex> = (0..degs.len()).map(|i| 100 + i).collect();
            for (i, &d) in degs.iter().enumerate() {
                f.ensure_vertex(vs[i]);
                for _ in 0..d {
                    f.add_edge(vs[i], leaf).unwrap();
                    leaf += 1;
                }
            }
            match f.select_sigma(&vs, ell) {
                Ok(sel) => {
                    let s = f.spare_degree(&sel).unwrap();
                    prop_assert!(s == ell || s == ell + 1);
                    for &v in &sel {
                        prop_assert!(f.degree(v) <= 1);
                        let rest: Vec<Vertex> = sel.iter().copied().filter(|&w| w != v).collect();
                        prop_assert!(f.spare_degree(&rest).unwrap() < ell);
                    }
                }
                Err(ForestError::InsufficientSpareDegree { .. }) => {
                    prop_assert!(f.spare_degree(&vs).unwrap() < ell);
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}

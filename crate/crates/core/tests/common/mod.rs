//! Helpers shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use std::collections::BTreeSet;

use monopath::colouring::{Colour, ExplicitColouring, Vertex};
use monopath::pathforest::PathForest;
use rand::seq::SliceRandom;
use rand::Rng;

/// Longest colour-`c` path by depth-first enumeration of all simple paths.
pub fn dfs_longest(c: &ExplicitColouring, colour: Colour) -> usize {
    fn go(c: &ExplicitColouring, colour: Colour, v: Vertex, seen: &mut Vec<bool>, len: usize) -> usize {
        let mut best = len;
        for u in 1..=c.n() {
            if !seen[u] && c.colour(v, u).unwrap() == colour {
                seen[u] = true;
                best = best.max(go(c, colour, u, seen, len + 1));
                seen[u] = false;
            }
        }
        best
    }
    let mut best = 0;
    for v in 1..=c.n() {
        let mut seen = vec![false; c.n() + 1];
        seen[v] = true;
        best = best.max(go(c, colour, v, &mut seen, 1));
    }
    best
}

/// A random input meeting the absorption hypotheses: `ys` outside the
/// forest, `spare(xs) >= 2|ys|`, and each `x` missing at most two `ys`.
pub struct AbsorbInstance {
    pub forest: PathForest,
    pub xs: Vec<Vertex>,
    pub ys: Vec<Vertex>,
    pub missing: BTreeSet<(Vertex, Vertex)>,
}

impl AbsorbInstance {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let k = rng.gen_range(1..=24);
        let m = rng.gen_range(2 * k..=4 * k + 8);
        let mut forest = PathForest::new();
        for v in 1..=m {
            forest.ensure_vertex(v);
        }
        for _ in 0..rng.gen_range(0..=m) {
            let (u, v) = (rng.gen_range(1..=m), rng.gen_range(1..=m));
            if u != v {
                let _ = forest.add_edge(u, v);
            }
        }
        let mut pool: Vec<Vertex> = (1..=m).collect();
        pool.shuffle(rng);
        let mut xs = Vec::new();
        for v in pool {
            if forest.spare_degree(&xs).unwrap() >= 2 * k {
                break;
            }
            xs.push(v);
        }
        let mut next = m + 1;
        while forest.spare_degree(&xs).unwrap() < 2 * k {
            forest.ensure_vertex(next);
            xs.push(next);
            next += 1;
        }
        let ys: Vec<Vertex> = (1000..1000 + k).collect();
        let mut missing = BTreeSet::new();
        for &x in &xs {
            for _ in 0..rng.gen_range(0..=2) {
                missing.insert((x, ys[rng.gen_range(0..k)]));
            }
        }
        AbsorbInstance {
            forest,
            xs,
            ys,
            missing,
        }
    }

    pub fn adjacent(&self, x: Vertex, y: Vertex) -> bool {
        !self.missing.contains(&(x, y))
    }

    /// Runs the absorption and checks its contract.
    pub fn check(&self) -> Result<usize, String> {
        let mut f = self.forest.clone();
        let before = f.edge_count();
        let res = f
            .absorb(&self.xs, &self.ys, |x, y| self.adjacent(x, y), 1)
            .map_err(|e| format!("absorb failed: {e}"))?;
        let k = self.ys.len();
        if res.covered.len() + 4 < k {
            return Err(format!("covered {} of {k}", res.covered.len()));
        }
        let violations = f.is_valid(None);
        if !violations.is_empty() {
            return Err(format!("invalid forest: {violations:?}"));
        }
        if f.edge_count() != before + res.edges.len() || res.edges.len() != 2 * res.covered.len() {
            return Err("edge accounting".into());
        }
        let xs: BTreeSet<Vertex> = self.xs.iter().copied().collect();
        for &(a, b) in &res.edges {
            let (x, y) = if xs.contains(&a) { (a, b) } else { (b, a) };
            if !xs.contains(&x) || !res.covered.contains(&y) || !self.adjacent(x, y) {
                return Err(format!("edge {a}-{b} is not an adjacent x-y pair"));
            }
        }
        for &y in &res.covered {
            if f.degree(y) != 2 {
                return Err(format!("{y} is not interior"));
            }
        }
        for &y in self.ys.iter().filter(|y| !res.covered.contains(y)) {
            if f.contains(y) {
                return Err(format!("uncovered {y} entered the forest"));
            }
        }
        Ok(res.covered.len())
    }
}

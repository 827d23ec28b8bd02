//! Stitching successive path-forests into one long monochromatic path.
//!
//! Each iteration runs the engine on the colouring beyond everything used so
//! far, takes the forest of the colour with larger coverage, and joins its
//! paths onto the running path of that colour with short connecting paths
//! that avoid every vertex already in use. The running path of the other
//! colour is carried over unchanged.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::{Colour, ColouringError, RestrictedColouring, Vertex};
use crate::engine::{EngineError, EngineState};
use crate::pathforest::PathForest;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("join precondition: {0}")]
    Precondition(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Colouring(#[from] ColouringError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Shortest colour-`colour` path from `x1` to `x2` inside `[search_bound]`
/// avoiding `avoid`, or `None` if the truncated graph has none.
pub fn join_avoiding(
    colouring: &RestrictedColouring,
    colour: Colour,
    x1: Vertex,
    x2: Vertex,
    avoid: &HashSet<Vertex>,
    search_bound: usize,
) -> Result<Option<Vec<Vertex>>, AssemblyError> {
    let bound = search_bound.min(colouring.horizon());
    if x1 == x2 {
        return Err(AssemblyError::Precondition(format!("endpoints coincide at {x1}")));
    }
    for x in [x1, x2] {
        if x == 0 || x > bound {
            return Err(AssemblyError::Precondition(format!("vertex {x} outside [1, {bound}]")));
        }
        if colouring.class(x) != colour {
            return Err(AssemblyError::Precondition(format!(
                "vertex {x} is not of class {colour}"
            )));
        }
        if avoid.contains(&x) {
            return Err(AssemblyError::Precondition(format!("vertex {x} is in the avoided set")));
        }
    }
    if colouring.edge_colour(x1, x2)? == colour {
        return Ok(Some(vec![x1, x2]));
    }

    // dense graph: scan the shrinking list of unvisited vertices
    let mut unvisited: Vec<Vertex> = (1..=bound).filter(|v| *v != x1 && !avoid.contains(v)).collect();
    let mut parent = vec![0; bound + 1];
    let mut queue = VecDeque::from([x1]);
    while let Some(v) = queue.pop_front() {
        let mut rest = Vec::with_capacity(unvisited.len());
        for &u in &unvisited {
            if colouring.edge_colour(v, u)? == colour {
                parent[u] = v;
                if u == x2 {
                    let mut path = vec![x2];
                    let mut w = x2;
                    while w != x1 {
                        w = parent[w];
                        path.push(w);
                    }
                    path.reverse();
                    return Ok(Some(path));
                }
                queue.push_back(u);
            } else {
                rest.push(u);
            }
        }
        unvisited = rest;
    }
    Ok(None)
}

/// A density checkpoint `|V(P) ∩ [n]| / n`, taken when the iteration ending
/// at `n` finished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledPath {
    pub colour: Colour,
    pub path: Vec<Vertex>,
    pub checkpoints: Vec<Checkpoint>,
}

impl AssembledPath {
    fn new(colour: Colour) -> Self {
        AssembledPath {
            colour,
            path: Vec::new(),
            checkpoints: Vec::new(),
        }
    }

    #[must_use]
    pub fn count_upto(&self, n: usize) -> usize {
        self.path.iter().filter(|&&v| v <= n).count()
    }

    /// Checks that the path is simple and all its edges have its colour.
    pub fn validate(&self, colouring: &RestrictedColouring) -> Result<(), String> {
        let mut f = PathForest::new();
        for &v in &self.path {
            if v == 0 || f.contains(v) {
                return Err(format!("vertex {v} invalid or repeated"));
            }
            f.ensure_vertex(v);
        }
        for w in self.path.windows(2) {
            let c = colouring.edge_colour(w[0], w[1]).map_err(|e| e.to_string())?;
            if c != self.colour {
                return Err(format!("edge {}-{} is {c}", w[0], w[1]));
            }
            f.add_edge(w[0], w[1]).map_err(|e| e.to_string())?;
        }
        if !f.is_valid(None).is_empty() {
            return Err("inconsistent path structure".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("path serializes")
    }
}

/// Limits keeping an assembly desk-sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub iterations: usize,
    /// Upper bound on the engine rounds of a single iteration.
    pub max_rounds: usize,
}

/// What happened in one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iteration {
    pub i: usize,
    /// Largest vertex used before the iteration.
    pub r: usize,
    /// Rounds the schedule asked for, `2(i + 1) r`.
    pub k: usize,
    /// Rounds actually run.
    pub t: usize,
    pub n: usize,
    pub colour: Colour,
    pub forest_paths: usize,
    pub forest_coverage: usize,
    pub joins: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assembly {
    pub red: AssembledPath,
    pub blue: AssembledPath,
    pub iterations: Vec<Iteration>,
    /// False once a join failed or the horizon cut the schedule short.
    pub complete: bool,
}

impl Assembly {
    #[must_use]
    pub fn path(&self, c: Colour) -> &AssembledPath {
        match c {
            Colour::Red => &self.red,
            Colour::Blue => &self.blue,
        }
    }

    /// Colour selected in the most iterations (red on ties) and its count.
    #[must_use]
    pub fn dominant(&self) -> (Colour, usize) {
        let red = self.iterations.iter().filter(|it| it.colour == Colour::Red).count();
        let blue = self.iterations.len() - red;
        if red >= blue {
            (Colour::Red, red)
        } else {
            (Colour::Blue, blue)
        }
    }
}

/// Runs the assembly loop. Iteration `i` starts from `r_i`, the largest vertex
/// used so far (at least `n_i`), runs the engine for `min(2(i + 1) r_i,
/// max_rounds)` rounds on the colouring beyond `r_i`, and extends the path of
/// the denser colour. Stops early, flagged incomplete, when the horizon leaves
/// no room or a join fails inside the horizon.
pub fn assemble(colouring: &RestrictedColouring, ell: usize, schedule: Schedule) -> Result<Assembly, AssemblyError> {
    if schedule.max_rounds == 0 {
        return Err(AssemblyError::Parameter("max_rounds must be positive".into()));
    }
    let horizon = colouring.horizon();
    let mut paths = [AssembledPath::new(Colour::Red), AssembledPath::new(Colour::Blue)];
    let first = colouring.class_of(1)?;
    paths[first.index()].path.push(1);
    let mut n = 1;
    let mut out = Vec::new();
    let mut complete = true;
    record(&mut paths, n);

    for i in 1..=schedule.iterations {
        let r = paths
            .iter()
            .flat_map(|p| p.path.iter().copied())
            .max()
            .unwrap_or(0)
            .max(n);
        let k = 2 * (i + 1) * r;
        if r >= horizon {
            complete = false;
            break;
        }
        let sub = colouring.suffix(r)?;
        let mut state = EngineState::init(&sub, ell)?;
        let t = k.min(schedule.max_rounds).min(state.max_rounds());
        if t == 0 {
            complete = false;
            break;
        }
        for _ in 0..t {
            state.step()?;
        }
        let colour = if state.coverage(Colour::Red) >= state.coverage(Colour::Blue) {
            Colour::Red
        } else {
            Colour::Blue
        };
        let forest: Vec<Vec<Vertex>> = state
            .forest(colour)
            .paths()
            .into_iter()
            .map(|p| p.into_iter().map(|v| v + r).collect())
            .collect();
        let coverage = state.coverage(colour);
        n = r + t;

        let other = paths[colour.opposite().index()].path.clone();
        let (joins, ok) = extend(colouring, &mut paths[colour.index()], &forest, &other)?;
        record(&mut paths, n);
        out.push(Iteration {
            i,
            r,
            k,
            t,
            n,
            colour,
            forest_paths: forest.len(),
            forest_coverage: coverage,
            joins,
            complete: ok && t == k,
        });
        if !ok {
            complete = false;
            break;
        }
        if t < k {
            complete = false;
        }
    }
    let [red, blue] = paths;
    Ok(Assembly {
        red,
        blue,
        iterations: out,
        complete,
    })
}

fn record(paths: &mut [AssembledPath; 2], n: usize) {
    for p in paths.iter_mut() {
        let density = p.count_upto(n) as f64 / n as f64;
        p.checkpoints.push(Checkpoint { n, density });
    }
}

/// Appends the forest paths to `target` one by one. Returns the number of
/// joins made and whether every path was attached.
fn extend(
    colouring: &RestrictedColouring,
    target: &mut AssembledPath,
    forest: &[Vec<Vertex>],
    other: &[Vertex],
) -> Result<(usize, bool), AssemblyError> {
    let mut used: HashSet<Vertex> = target.path.iter().chain(other).copied().collect();
    for p in forest {
        used.extend(p.iter().copied());
    }
    let mut joins = 0;
    let mut pieces = forest.iter();
    if target.path.is_empty() {
        match pieces.next() {
            Some(p) => target.path = p.clone(),
            None => return Ok((0, true)),
        }
    }
    for piece in pieces {
        let end = *target.path.last().unwrap();
        let mut joined = false;
        for (a, b) in [(piece[0], *piece.last().unwrap()), (*piece.last().unwrap(), piece[0])] {
            let mut avoid = used.clone();
            avoid.remove(&end);
            avoid.remove(&a);
            let Some(link) = join_avoiding(colouring, target.colour, end, a, &avoid, colouring.horizon())? else {
                continue;
            };
            used.extend(link.iter().copied());
            target.path.extend_from_slice(&link[1..link.len() - 1]);
            if a == piece[0] {
                target.path.extend_from_slice(piece);
            } else {
                target.path.extend(piece.iter().rev());
            }
            debug_assert_eq!(*target.path.last().unwrap(), b);
            joins += 1;
            joined = true;
            break;
        }
        if !joined {
            return Ok((joins, false));
        }
    }
    Ok((joins, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::{generate, GeneratorSpec};
    use std::collections::BTreeMap;

    fn all_red(h: usize) -> RestrictedColouring {
        RestrictedColouring::new(vec![Colour::Red; h], BTreeMap::new()).unwrap()
    }

    #[test]
    fn direct_edge_when_available() {
        let c = all_red(10);
        let p = join_avoiding(&c, Colour::Red, 3, 7, &HashSet::new(), 10).unwrap();
        assert_eq!(p, Some(vec![3, 7]));
    }

    #[test]
    fn separated_endpoints() {
        // edge 1-2 is blue, every other vertex avoided
        let opp = BTreeMap::from([(1, vec![2])]);
        let c = RestrictedColouring::new(vec![Colour::Red; 6], opp).unwrap();
        let avoid: HashSet<_> = (3..=6).collect();
        assert_eq!(join_avoiding(&c, Colour::Red, 1, 2, &avoid, 6).unwrap(), None);
        let p = join_avoiding(&c, Colour::Red, 1, 2, &HashSet::new(), 6)
            .unwrap()
            .unwrap();
        assert_eq!(p.len(), 3);
        assert!(join_avoiding(&c, Colour::Red, 1, 1, &HashSet::new(), 6).is_err());
        assert!(join_avoiding(&c, Colour::Blue, 1, 2, &HashSet::new(), 6).is_err());
    }

    #[test]
    fn seeded_joins_validate() {
        let spec = GeneratorSpec::Random {
            p: 0.5,
            q: 0.3,
            window: 20,
        };
        let c = generate(&spec, 4, 300).unwrap();
        let reds: Vec<Vertex> = (1..=300).filter(|&v| c.class(v) == Colour::Red).collect();
        let avoid: HashSet<Vertex> = reds[2..40].iter().copied().collect();
        let p = join_avoiding(&c, Colour::Red, reds[0], reds[1], &avoid, 300)
            .unwrap()
            .unwrap();
        assert!(p.iter().all(|v| !avoid.contains(v)));
        let ap = AssembledPath {
            colour: Colour::Red,
            path: p,
            checkpoints: vec![],
        };
        ap.validate(&c).unwrap();
    }

    #[test]
    fn all_red_assembles_an_interval() {
        let c = all_red(2000);
        let a = assemble(
            &c,
            8,
            Schedule {
                iterations: 3,
                max_rounds: 1000,
            },
        )
        .unwrap();
        assert!(a.complete);
        let n = a.iterations.last().unwrap().n;
        assert_eq!(n, 315);
        let mut sorted = a.red.path.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=n).collect::<Vec<_>>());
        assert!(a.red.checkpoints.iter().all(|cp| cp.density == 1.0));
        assert!(a.blue.path.is_empty());
        a.red.validate(&c).unwrap();
    }

    #[test]
    fn seeded_assembly_contains_forests() {
        let spec = GeneratorSpec::Random {
            p: 0.5,
            q: 0.1,
            window: 16,
        };
        let c = generate(&spec, 2, 3000).unwrap();
        let a = assemble(
            &c,
            8,
            Schedule {
                iterations: 3,
                max_rounds: 1000,
            },
        )
        .unwrap();
        for colour in Colour::BOTH {
            let p = a.path(colour);
            p.validate(&c).unwrap();
            for cp in &p.checkpoints {
                assert!(cp.density <= 1.0);
                // later joins may only add vertices below an earlier checkpoint
                assert!(cp.density <= p.count_upto(cp.n) as f64 / cp.n as f64);
            }
        }
        assert_eq!(a.iterations.len(), 3);
        let json = a.red.to_json();
        assert!(json.starts_with("{\"colour\":\"Red\",\"path\":["));
    }
}

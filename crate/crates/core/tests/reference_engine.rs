//! A deliberately naive re-implementation of the round procedure, compared
//! line by line with the engine.

use monopath::colouring::{generate, Colour, GeneratorSpec, RestrictedColouring};
use monopath::engine::{run, CheckLevel, Event, RoundTrace, TypeCounts, VertexType};

/// Edge list forest: every query is a scan.
#[derive(Default, Clone)]
struct NaiveForest {
    vertices: Vec<usize>,
    // (u, v, round)
    edges: Vec<(usize, usize, usize)>,
}

impl NaiveForest {
    fn has(&self, v: usize) -> bool {
        self.vertices.contains(&v)
    }
    fn add_vertex(&mut self, v: usize) {
        if !self.has(v) {
            self.vertices.push(v);
        }
    }
    fn deg(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v || e.1 == v).count()
    }
    fn deg_at(&self, v: usize, round: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| (e.0 == v || e.1 == v) && e.2 <= round)
            .count()
    }
    fn nbrs(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.0 == v {
                    Some(e.1)
                } else if e.1 == v {
                    Some(e.0)
                } else {
                    None
                }
            })
            .collect()
    }
    /// Walks from `v` to the far end of its path.
    fn far_end(&self, v: usize) -> usize {
        let (mut prev, mut cur) = (0, v);
        loop {
            let next: Vec<usize> = self.nbrs(cur).into_iter().filter(|&w| w != prev).collect();
            match next.first() {
                Some(&w) => {
                    prev = cur;
                    cur = w;
                }
                None => return cur,
            }
        }
    }
    fn connected_ends(&self, a: usize, b: usize) -> bool {
        self.deg(a) < 2 && self.far_end(a) == b
    }
    fn add_edge(&mut self, u: usize, v: usize, round: usize) {
        assert!(self.deg(u) < 2 && self.deg(v) < 2 && !self.connected_ends(u, v));
        self.edges.push((u, v, round));
    }
    fn spare(&self, vs: &[usize]) -> usize {
        vs.iter().map(|&v| 2 - self.deg(v)).sum()
    }
    fn count_upto(&self, t: usize) -> usize {
        self.vertices.iter().filter(|&&v| v <= t).count()
    }
}

#[derive(Default, Clone)]
struct NaiveSide {
    forest: NaiveForest,
    available: Vec<usize>,
    reserve: Option<(Vec<usize>, usize)>,
    history: Vec<(Vec<usize>, usize)>,
    waiting: Vec<usize>,
    counts: [usize; 4],
}

impl NaiveSide {
    fn sigma(&self, ell: usize) -> Vec<usize> {
        // shortest prefix reaching ell, then drop removable members in order
        let mut prefix = Vec::new();
        for &v in &self.available {
            if self.forest.deg(v) < 2 {
                prefix.push(v);
            }
            if self.forest.spare(&prefix) >= ell {
                break;
            }
        }
        let mut kept = prefix.clone();
        for v in prefix {
            let without: Vec<usize> = kept.iter().copied().filter(|&w| w != v).collect();
            if self.forest.spare(&without) >= ell {
                kept = without;
            }
        }
        kept
    }

    fn maybe_reserve(&mut self, ell: usize, round: usize) {
        if self.reserve.is_none() && self.forest.spare(&self.available) >= ell {
            let members = self.sigma(ell);
            let mut key = members.clone();
            key.sort_unstable();
            let created = match self.history.iter().find(|(s, _)| *s == key) {
                Some(&(_, r)) => r,
                None => {
                    self.history.push((key, round));
                    round
                }
            };
            self.reserve = Some((members, created));
        }
    }
}

fn naive_run(c: &RestrictedColouring, ell: usize, rounds: usize) -> (Vec<RoundTrace>, [NaiveForest; 2]) {
    let mut sides = [NaiveSide::default(), NaiveSide::default()];
    let mut matures_at: Vec<(usize, usize)> = Vec::new(); // (round, vertex)
    let mut out = Vec::new();
    for t in 1..=rounds {
        let own = c.class(t);
        let (oi, xi) = (own.index(), own.opposite().index());
        sides[oi].forest.add_vertex(t);

        let mut matured: Vec<usize> = matures_at.iter().filter(|m| m.0 == t).map(|m| m.1).collect();
        matured.sort_unstable();
        sides[xi].available.extend(matured);
        sides[xi].maybe_reserve(ell, t);

        let forward: Vec<usize> = (t + 1..=c.horizon())
            .filter(|&w| c.class(w) != own && c.edge_colour(t, w).unwrap() != own)
            .collect();
        let j: Vec<usize> = forward.into_iter().filter(|&w| sides[xi].forest.deg(w) < 2).collect();
        let ty = if j.len() >= 3 {
            VertexType::W
        } else {
            match &sides[xi].reserve {
                None => VertexType::X,
                Some((_, created)) if sides[oi].forest.deg_at(t, *created) < 2 => VertexType::Y,
                Some(_) => VertexType::Z,
            }
        };
        sides[oi].counts[ty.index()] += 1;

        let mut event = Event::None;
        if ty == VertexType::W {
            'pick: for a in (0..j.len()).rev() {
                for b in (a + 1..j.len()).rev() {
                    if !sides[xi].forest.connected_ends(j[a], j[b]) {
                        let f = &mut sides[xi].forest;
                        f.add_vertex(t);
                        f.add_edge(t, j[a], t);
                        f.add_edge(t, j[b], t);
                        matures_at.push((j[a], t));
                        break 'pick;
                    }
                }
            }
            event = Event::ForwardAttach;
        } else {
            sides[oi].available.push(t);
            sides[oi].maybe_reserve(ell, t);
        }
        if ty == VertexType::Y {
            if sides[oi].waiting.len() + 1 < ell / 2 {
                sides[oi].waiting.push(t);
            } else {
                let mut ys = std::mem::take(&mut sides[oi].waiting);
                ys.push(t);
                ys.sort_unstable();
                let xs = sides[xi].reserve.take().unwrap().0;
                let colour = own.opposite();
                let f = &mut sides[xi].forest;
                while ys.len() >= 5 {
                    let x1 = *xs.iter().find(|&&x| f.deg(x) < 2).unwrap();
                    let x2 = *xs
                        .iter()
                        .find(|&&x| x != x1 && f.deg(x) < 2 && !f.connected_ends(x1, x))
                        .unwrap();
                    let pos = ys
                        .iter()
                        .position(|&y| {
                            c.edge_colour(x1, y).unwrap() == colour && c.edge_colour(x2, y).unwrap() == colour
                        })
                        .unwrap();
                    let y = ys.remove(pos);
                    f.add_vertex(y);
                    f.add_edge(x1, y, t);
                    f.add_edge(y, x2, t);
                }
                sides[xi].maybe_reserve(ell, t);
                event = Event::BatchAbsorb;
            }
        }

        out.push(RoundTrace {
            t,
            c_red: sides[0].forest.count_upto(t),
            c_blue: sides[1].forest.count_upto(t),
            rho_red: sides[0].forest.spare(&sides[0].available),
            rho_blue: sides[1].forest.spare(&sides[1].available),
            counts: TypeCounts::from_arrays(sides[0].counts, sides[1].counts),
            vertex_type: ty,
            event,
        });
    }
    let [r, b] = sides;
    (out, [r.forest, b.forest])
}

#[test]
fn engine_matches_naive_reference() {
    let specs = [
        GeneratorSpec::Random {
            p: 0.5,
            q: 0.1,
            window: 32,
        },
        GeneratorSpec::Random {
            p: 0.5,
            q: 0.35,
            window: 12,
        },
        GeneratorSpec::Random {
            p: 0.3,
            q: 0.5,
            window: 8,
        },
        GeneratorSpec::Block {
            lengths: vec![3, 5],
            q: 0.3,
            window: 10,
        },
    ];
    let mut absorbs = 0;
    let mut attaches = 0;
    for spec in &specs {
        for seed in 0..6 {
            let c = generate(spec, seed, 240).unwrap();
            for ell in [2, 4, 8, 16] {
                let rounds = 200.min(c.horizon() - c.max_forward_reach());
                let engine = run(&c, ell, rounds, CheckLevel::None).unwrap();
                let (naive, forests) = naive_run(&c, ell, rounds);
                for (a, b) in engine.trace.iter().zip(&naive) {
                    assert_eq!(a, b, "spec {spec:?} seed {seed} ell {ell}");
                }
                for colour in Colour::BOTH {
                    let mut want: Vec<(usize, usize)> = forests[colour.index()]
                        .edges
                        .iter()
                        .map(|e| (e.0.min(e.1), e.0.max(e.1)))
                        .collect();
                    want.sort_unstable();
                    let mut got = engine.state.forest(colour).edges();
                    got.sort_unstable();
                    assert_eq!(got, want);
                }
                absorbs += naive.iter().filter(|l| l.event == Event::BatchAbsorb).count();
                attaches += naive.iter().filter(|l| l.event == Event::ForwardAttach).count();
            }
        }
    }
    assert!(absorbs > 0 && attaches > 0, "absorbs {absorbs}, attaches {attaches}");
}

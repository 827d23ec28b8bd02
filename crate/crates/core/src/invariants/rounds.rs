//! Per-round checks, evaluated against the live engine state.

use crate::colouring::{Colour, Vertex};
use crate::engine::{EngineState, RoundTrace, VertexType};
use crate::pathforest::ColouredForestConstraints;

use super::pairs::{self, History, PairPlan};
use super::{colour_tag, coverage_bound_holds, total_bound, CheckReport, Recorder, SuiteReport};

const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

/// Watches an engine run round by round. Keeps private copies of everything
/// that must never change once written, so that rewrites are detected.
#[derive(Debug)]
pub struct RoundChecker {
    ell: usize,
    forest_every: usize,
    plan: PairPlan,
    rec: Recorder,
    phi: Vec<Vertex>,
    types: Vec<Option<VertexType>>,
    class_count: [usize; 2],
    tally: [[usize; 4]; 2],
    available: [Vec<Vertex>; 2],
    forest_size: [(usize, usize); 2],
    // w_due[r][c]: colour-c type-W vertices whose maturation round is r
    w_due: Vec<[usize; 2]>,
    matured: [usize; 2],
    history: History,
}

impl RoundChecker {
    #[must_use]
    pub fn new(ell: usize) -> Self {
        RoundChecker {
            ell,
            forest_every: 20,
            plan: PairPlan::default(),
            rec: Recorder::default(),
            phi: vec![0],
            types: vec![None],
            class_count: [0; 2],
            tally: [[0; 4]; 2],
            available: [Vec::new(), Vec::new()],
            forest_size: [(0, 0); 2],
            w_due: Vec::new(),
            matured: [0; 2],
            history: History::new(),
        }
    }

    /// Full forest validation every `every` rounds (and after the last one).
    #[must_use]
    pub fn with_forest_interval(mut self, every: usize) -> Self {
        self.forest_every = every.max(1);
        self
    }

    #[must_use]
    pub fn with_pair_plan(mut self, plan: PairPlan) -> Self {
        self.plan = plan;
        self
    }

    /// Checks the state reached after one round; returns this round's failures.
    pub fn observe(&mut self, s: &EngineState<'_>, line: &RoundTrace) -> Vec<CheckReport> {
        let before = self.rec.report.failures.len();
        let t = s.t;
        let ell = self.ell;
        let col = s.colouring();
        let cls = col.class(t);
        let ci = cls.index();

        // --- φ: written once, at least its argument, opposite class when moved
        let phi_ok = s.phi.len() == t + 1 && s.phi[..t] == self.phi[..] && s.phi[t] >= t;
        self.rec.check("L4.2(i)", phi_ok, || {
            let at = (1..t.min(s.phi.len())).find(|&i| s.phi[i] != self.phi[i]).unwrap_or(t);
            CheckReport::fail(
                "L4.2(i)",
                t,
                at as f64,
                t as f64,
                format!("phi changed or invalid at vertex {at}"),
            )
        });
        let pt = s.phi.get(t).copied().unwrap_or(0);
        let moved = pt > t;
        self.rec.record("L4.2(ii)", moved, !moved || col.class(pt) != cls, || {
            CheckReport::fail(
                "L4.2(ii)",
                t,
                pt as f64,
                t as f64,
                format!("phi({t}) = {pt} has the class of {t}"),
            )
        });
        self.phi.push(pt);

        // --- types: one new entry, old ones untouched, tallies consistent
        let ty = s.types.get(t).copied().flatten();
        let types_ok = s.types.len() == t + 1 && s.types[..t] == self.types[..] && ty == Some(line.vertex_type);
        self.rec.check("L4.3(ii)", types_ok, || {
            CheckReport::fail("L4.3(ii)", t, 0.0, 0.0, "type of an earlier vertex changed".into())
        });
        let ty = line.vertex_type;
        self.types.push(Some(ty));
        self.class_count[ci] += 1;
        self.tally[ci][ty.index()] += 1;
        if ty == VertexType::W {
            if self.w_due.len() <= pt {
                self.w_due.resize(pt + 1, [0; 2]);
            }
            self.w_due[pt][ci] += 1;
        }
        if let Some(due) = self.w_due.get(t) {
            for c in 0..2 {
                self.matured[c] += due[c];
            }
        }

        // --- L4.3(iii): a type-X vertex sees no reserve of the other colour
        let x_fired = ty == VertexType::X;
        self.rec.record(
            "L4.3(iii)",
            x_fired,
            !x_fired || s.side(cls.opposite()).reserve.is_none(),
            || {
                CheckReport::fail(
                    "L4.3(iii)",
                    t,
                    1.0,
                    0.0,
                    "type X while the other reserve is non-empty".into(),
                )
            },
        );

        let mut mark = vec![false; t + 1];
        for c in Colour::BOTH {
            let k = c.index();
            let tag = colour_tag(c);
            let side = s.side(c);
            let f = &side.forest;
            let counts = side.counts;

            // L4.2(iii)
            mark.iter_mut().for_each(|m| *m = false);
            let mut bad = None;
            for &v in &side.available {
                if v == 0 || v > t || col.class(v) != c || mark[v] {
                    bad.get_or_insert(v);
                } else {
                    mark[v] = true;
                }
            }
            let prefix_ok = side.available.len() >= self.available[k].len()
                && side.available[..self.available[k].len()] == self.available[k][..];
            if let Some(r) = &side.reserve {
                for &v in &r.members {
                    if v == 0 || v > t || !mark[v] {
                        bad.get_or_insert(v);
                    }
                }
            }
            for &v in &side.waiting {
                if v == 0 || v > t || col.class(v) != c {
                    bad.get_or_insert(v);
                }
            }
            self.rec.check("L4.2(iii)", bad.is_none() && prefix_ok, || {
                CheckReport::fail(
                    "L4.2(iii)",
                    t,
                    bad.unwrap_or(0) as f64,
                    t as f64,
                    format!(
                        "{tag}: available/reserve/waiting membership broken (vertex {bad:?}, prefix kept {prefix_ok})"
                    ),
                )
            });
            self.available[k].clone_from(&side.available);

            // L4.2(iv)
            let late = side
                .available
                .iter()
                .copied()
                .find(|&v| s.phi.get(v).is_none_or(|&p| p > t));
            self.rec.check("L4.2(iv)", late.is_none(), || {
                let v = late.unwrap_or(0);
                CheckReport::fail(
                    "L4.2(iv)",
                    t,
                    s.phi.get(v).copied().unwrap_or(0) as f64,
                    t as f64,
                    format!("{tag}: vertex {v} available before maturing"),
                )
            });

            // L4.2(v)
            let spare_res = side
                .reserve
                .as_ref()
                .map(|r| r.members.iter().map(|&v| 2 - f.degree(v)).sum::<usize>());
            self.rec.record(
                "L4.2(v)",
                spare_res.is_some(),
                spare_res.is_none_or(|x| x == ell || x == ell + 1),
                || {
                    CheckReport::fail(
                        "L4.2(v)",
                        t,
                        spare_res.unwrap_or(0) as f64,
                        ell as f64,
                        format!("{tag}: reserve spare out of range"),
                    )
                },
            );

            // L4.2(vi)
            self.rec.check("L4.2(vi)", 2 * side.waiting.len() < ell, || {
                CheckReport::fail(
                    "L4.2(vi)",
                    t,
                    side.waiting.len() as f64,
                    (ell / 2) as f64,
                    format!("{tag}: waiting batch too large"),
                )
            });

            // L4.2(vii) and L4.3(iv): forest vertices beyond t
            let mut beyond_class = None;
            let mut beyond_nbr = None;
            for v in f.vertices_in(t, f.max_vertex()) {
                if v > col.horizon() || col.class(v) != c {
                    beyond_class.get_or_insert(v);
                    continue;
                }
                for &u in f.neighbours(v) {
                    let ok = u <= t && col.class(u) == c.opposite() && s.types[u] == Some(VertexType::W);
                    if !ok {
                        beyond_nbr.get_or_insert((v, u));
                    }
                }
            }
            self.rec.check("L4.2(vii)", beyond_class.is_none(), || {
                CheckReport::fail(
                    "L4.2(vii)",
                    t,
                    beyond_class.unwrap_or(0) as f64,
                    t as f64,
                    format!("{tag} forest holds an opposite-class vertex beyond t"),
                )
            });
            self.rec
                .check("L4.3(iv)", beyond_class.is_none() && beyond_nbr.is_none(), || {
                    let (v, u) = beyond_nbr.unwrap_or((beyond_class.unwrap_or(0), 0));
                    CheckReport::fail(
                        "L4.3(iv)",
                        t,
                        v as f64,
                        t as f64,
                        format!("{tag}: forward vertex {v} has neighbour {u} not of opposite type W"),
                    )
                });

            // L4.3(v)
            let stray = f
                .vertices()
                .take_while(|&v| v <= t)
                .find(|&v| {
                    col.class(v) != c && f.degree(v) > 0 && !matches!(s.types[v], Some(VertexType::W | VertexType::Y))
                })
                .or_else(|| {
                    f.vertices_in(t, f.max_vertex())
                        .find(|&v| col.class(v) != c && f.degree(v) > 0)
                });
            self.rec.check("L4.3(v)", stray.is_none(), || {
                CheckReport::fail(
                    "L4.3(v)",
                    t,
                    stray.unwrap_or(0) as f64,
                    0.0,
                    format!("{tag} forest uses an opposite vertex of type X/Z"),
                )
            });

            // L4.3(vi)
            let rho = side.available.iter().map(|&v| 2 - f.degree(v)).sum::<usize>();
            let fired = rho >= ell;
            self.rec
                .record("L4.3(vi)", fired, !fired || side.reserve.is_some(), || {
                    CheckReport::fail(
                        "L4.3(vi)",
                        t,
                        rho as f64,
                        ell as f64,
                        format!("{tag}: spare at least ell but no reserve"),
                    )
                });

            // L4.3(vii): coverage against the other colour's X and Z
            let oc = s.side(c.opposite()).counts;
            let cov = f.vertices().take_while(|&v| v <= t).count();
            let (lhs, rhs) = coverage_bound_holds(ell, cov, t, oc[X], oc[Z]);
            self.rec.check("L4.3(vii)", lhs >= rhs, || {
                CheckReport::fail(
                    "L4.3(vii)",
                    t,
                    lhs as f64 / ell as f64,
                    rhs as f64 / ell as f64,
                    format!("c{tag} below coverage bound"),
                )
            });

            // L4.3(i)
            let total: usize = counts.iter().sum();
            self.rec.check(
                "L4.3(i)",
                total == self.class_count[k] && counts == self.tally[k],
                || {
                    CheckReport::fail(
                        "L4.3(i)",
                        t,
                        total as f64,
                        self.class_count[k] as f64,
                        format!("{tag}: type counts do not partition the class"),
                    )
                },
            );

            // L4.3(ii): growth of forests and type sets
            let size = (f.vertex_count(), f.edge_count());
            let grew = size.0 >= self.forest_size[k].0 && size.1 >= self.forest_size[k].1;
            let prev_counts = self.history.counts[k].last().copied().unwrap_or([0; 4]);
            let counts_grew = (0..4).all(|i| counts[i] >= prev_counts[i]);
            let prev_cov = self.history.cov[k].last().copied().unwrap_or(0);
            self.rec.check("L4.3(ii)", grew && counts_grew && cov >= prev_cov, || {
                CheckReport::fail("L4.3(ii)", t, 0.0, 0.0, format!("{tag}: forest or type sets shrank"))
            });
            self.forest_size[k] = size;

            // available list = matured W ∪ X ∪ Y ∪ Z
            let d_size = self.matured[k] + counts[Y];
            self.rec.check(
                "A=D+X+Z",
                side.available.len() == d_size + counts[X] + counts[Z],
                || {
                    CheckReport::fail(
                        "A=D+X+Z",
                        t,
                        side.available.len() as f64,
                        (d_size + counts[X] + counts[Z]) as f64,
                        format!("{tag}: available list differs from matured W plus X, Y, Z"),
                    )
                },
            );

            // L4.4(ii)
            let od = self.matured[1 - k] + oc[Y];
            let lhs = 2 * od as i64;
            let rhs = 2 * (d_size + counts[X] + counts[Z]) as i64 - rho as i64;
            self.rec.check("L4.4(ii)", lhs >= rhs, || {
                CheckReport::fail(
                    "L4.4(ii)",
                    t,
                    lhs as f64,
                    rhs as f64,
                    format!("edges into the {tag} forest exceed 2|D|"),
                )
            });

            // trace line consistency
            let ok = line.c(c) == cov && line.rho(c) == rho && line.counts.of(c) == counts && line.t == t;
            self.rec.check("trace", ok, || {
                CheckReport::fail(
                    "trace",
                    t,
                    line.c(c) as f64,
                    cov as f64,
                    format!("{tag}: trace line disagrees with the state"),
                )
            });

            // full forest validation
            if t.is_multiple_of(self.forest_every) {
                self.check_forest(s, c);
            }

            self.history.push_side(
                k,
                side.available.len(),
                counts,
                rho,
                cov,
                self.matured[k],
                side.waiting.len(),
            );
        }

        // L4.2(viii): reserve of one colour against the waiting batch of the other
        for c in Colour::BOTH {
            let tag = colour_tag(c);
            let (res, wait) = (&s.side(c).reserve, &s.side(c.opposite()).waiting);
            let fired = res.is_some() && !wait.is_empty();
            let (mut order_ok, mut degree_ok) = (true, true);
            let (mut lhs, mut rhs, mut worst) = (0usize, 0usize, 0usize);
            if let (Some(r), true) = (res, fired) {
                let max_v = r.members.iter().copied().max().unwrap_or(0);
                let max_phi = r.members.iter().map(|&v| s.phi[v]).max().unwrap_or(0);
                let min_g = wait.iter().copied().min().unwrap_or(usize::MAX);
                order_ok = max_v <= max_phi && max_phi < min_g;
                lhs = max_phi;
                rhs = min_g;
                for &v in &r.members {
                    let d = wait
                        .iter()
                        .filter(|&&w| col.edge_colour(v, w) == Ok(c.opposite()))
                        .count();
                    worst = worst.max(d);
                }
                degree_ok = worst <= 2;
            }
            self.rec.record("L4.2(viii).order", fired, order_ok, || {
                CheckReport::fail(
                    "L4.2(viii).order",
                    t,
                    lhs as f64,
                    rhs as f64,
                    format!("{tag} reserve matures no earlier than the waiting batch starts"),
                )
            });
            self.rec.record("L4.2(viii).degree", fired, degree_ok, || {
                CheckReport::fail(
                    "L4.2(viii).degree",
                    t,
                    worst as f64,
                    2.0,
                    format!("{tag} reserve vertex misses too much of the waiting batch"),
                )
            });
        }

        // L4.4(iv)
        let (lhs, rhs) = total_bound(ell, line);
        self.rec.check("L4.4(iv)", lhs >= rhs, || {
            let scale = 2.0 * ell as f64;
            CheckReport::fail(
                "L4.4(iv)",
                t,
                lhs as f64 / scale,
                rhs as f64 / scale,
                "combined coverage below bound".into(),
            )
        });

        self.history.finish_round();
        self.rec.report.rounds = t;
        self.rec.report.failures[before..].to_vec()
    }

    fn check_forest(&mut self, s: &EngineState<'_>, c: Colour) {
        let cons = ColouredForestConstraints {
            forest_colour: c,
            colouring: s.colouring(),
        };
        let v = s.forest(c).is_valid(Some(&cons));
        self.rec.check("forest", v.is_empty(), || {
            CheckReport::fail(
                "forest",
                s.t,
                v.len() as f64,
                0.0,
                format!("{}: {:?}", colour_tag(c), v.first()),
            )
        });
    }

    /// Final forest validation only, without the round-pair facts.
    #[must_use]
    pub fn finish_rounds(mut self, s: &EngineState<'_>) -> SuiteReport {
        for c in Colour::BOTH {
            self.check_forest(s, c);
        }
        self.rec.report
    }

    /// Final forest validation, round-pair facts and monitors.
    #[must_use]
    pub fn finish(mut self, s: &EngineState<'_>) -> SuiteReport {
        for c in Colour::BOTH {
            self.check_forest(s, c);
        }
        pairs::evaluate(&mut self.rec, &self.history, s, self.ell, &self.plan);
        self.rec.report
    }
}

//! Two-round facts and existence monitors, evaluated after a run.
//!
//! Available lists only ever grow at the end, so the list of round `t` is the
//! first `len_t` entries of the final list. Forest degrees at an earlier round
//! are recovered from edge creation rounds: the spare degree at round `s` of
//! the first `len` available vertices is `2 len` minus the number of their
//! incidences created in rounds `<= s`. Those counts are answered offline with
//! a Fenwick tree swept over list positions.

use serde::Serialize;

use crate::colouring::Colour;
use crate::engine::EngineState;

use super::{colour_tag, CheckReport, Recorder};

const W: usize = 0;
const X: usize = 1;
const Y: usize = 2;
const Z: usize = 3;

/// Per-round scalars recorded by the round checker; index `t` is round `t`,
/// index 0 the empty initial state.
#[derive(Debug, Clone)]
pub(crate) struct History {
    pub a_len: [Vec<usize>; 2],
    pub counts: [Vec<[usize; 4]>; 2],
    pub rho: [Vec<usize>; 2],
    pub cov: [Vec<usize>; 2],
    pub matured: [Vec<usize>; 2],
    pub waiting: [Vec<usize>; 2],
    pub rounds: usize,
}

impl History {
    pub fn new() -> Self {
        let z = || [vec![0], vec![0]];
        History {
            a_len: z(),
            counts: [vec![[0; 4]], vec![[0; 4]]],
            rho: z(),
            cov: z(),
            matured: z(),
            waiting: z(),
            rounds: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_side(
        &mut self,
        k: usize,
        a_len: usize,
        counts: [usize; 4],
        rho: usize,
        cov: usize,
        matured: usize,
        waiting: usize,
    ) {
        self.a_len[k].push(a_len);
        self.counts[k].push(counts);
        self.rho[k].push(rho);
        self.cov[k].push(cov);
        self.matured[k].push(matured);
        self.waiting[k].push(waiting);
    }

    pub fn finish_round(&mut self) {
        self.rounds += 1;
    }

    fn d(&self, k: usize, t: usize) -> usize {
        self.matured[k][t] + self.counts[k][t][Y]
    }
}

/// Which round pairs to evaluate and the monitor tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPlan {
    /// Evaluate every pair when the run has at most this many rounds.
    pub exhaustive_upto: usize,
    /// Otherwise a `grid × grid` stratified sample.
    pub grid: usize,
    /// Slack used by the combined-density monitor.
    pub monitor_eps: f64,
}

impl Default for PairPlan {
    fn default() -> Self {
        PairPlan {
            exhaustive_upto: 300,
            grid: 100,
            monitor_eps: 0.1,
        }
    }
}

impl PairPlan {
    /// Pairs `(t, t')` with `1 <= t <= t' <= rounds`.
    #[must_use]
    pub fn pairs(&self, rounds: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if rounds == 0 {
            return out;
        }
        if rounds <= self.exhaustive_upto {
            for t in 1..=rounds {
                for tp in t..=rounds {
                    out.push((t, tp));
                }
            }
            return out;
        }
        let g = self.grid.max(2);
        let mut ts: Vec<usize> = (0..g).map(|i| 1 + i * (rounds - 1) / (g - 1)).collect();
        ts.dedup();
        for &t in &ts {
            let mut tps: Vec<usize> = (0..g).map(|j| t + j * (rounds - t) / (g - 1)).collect();
            tps.dedup();
            out.extend(tps.into_iter().map(|tp| (t, tp)));
        }
        out
    }
}

/// Outcome counts of an existence monitor. Unresolved instances are
/// inconclusive, not failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonitorSummary {
    pub name: String,
    pub fired: u64,
    pub resolved: u64,
    pub inconclusive: u64,
    /// Largest gap between a firing round and its resolution.
    pub max_delay: usize,
}

impl MonitorSummary {
    fn new(name: &str) -> Self {
        MonitorSummary {
            name: name.into(),
            fired: 0,
            resolved: 0,
            inconclusive: 0,
            max_delay: 0,
        }
    }

    pub(crate) fn absorb(&mut self, other: &MonitorSummary) {
        self.fired += other.fired;
        self.resolved += other.resolved;
        self.inconclusive += other.inconclusive;
        self.max_delay = self.max_delay.max(other.max_delay);
    }

    fn resolve(&mut self, t: usize, at: Option<usize>) {
        self.fired += 1;
        match at {
            Some(tp) => {
                self.resolved += 1;
                self.max_delay = self.max_delay.max(tp - t);
            }
            None => self.inconclusive += 1,
        }
    }
}

struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    /// Adds one at 0-based index `i`.
    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over 0-based indices `0..=i`.
    fn prefix(&self, i: usize) -> usize {
        let mut i = (i + 1).min(self.tree.len() - 1);
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    /// Smallest 0-based index whose prefix sum reaches `k >= 1`.
    fn kth(&self, k: usize) -> Option<usize> {
        let n = self.tree.len() - 1;
        if k == 0 || n == 0 || self.prefix(n - 1) < k {
            return None;
        }
        let mut pos = 0;
        let mut rem = k;
        let mut step = 1 << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            if pos + step <= n && self.tree[pos + step] < rem {
                pos += step;
                rem -= self.tree[pos];
            }
            step >>= 1;
        }
        Some(pos)
    }
}

/// Incidence creation rounds of the final available list, by list position.
fn incidences(s: &EngineState<'_>, c: Colour) -> Vec<Vec<usize>> {
    let side = s.side(c);
    side.available
        .iter()
        .map(|&v| side.forest.incidence_rounds(v).to_vec())
        .collect()
}

/// For each query `(len, round)`, the number of incidences of the first `len`
/// list entries created in rounds `<= round`.
fn offline_counts(inc: &[Vec<usize>], rounds: usize, queries: &[(usize, usize)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..queries.len()).collect();
    order.sort_by_key(|&i| queries[i].0);
    let mut fw = Fenwick::new(rounds + 1);
    let mut inserted = 0;
    let mut out = vec![0; queries.len()];
    for i in order {
        let (len, round) = queries[i];
        while inserted < len.min(inc.len()) {
            for &r in &inc[inserted] {
                fw.add(r.min(rounds));
            }
            inserted += 1;
        }
        out[i] = fw.prefix(round.min(rounds));
    }
    out
}

pub(crate) fn evaluate(rec: &mut Recorder, h: &History, s: &EngineState<'_>, ell: usize, plan: &PairPlan) {
    let rounds = h.rounds;
    let pairs = plan.pairs(rounds);
    let inc = [incidences(s, Colour::Red), incidences(s, Colour::Blue)];

    // spare degree of the round-t list at rounds t, t'-1 and t'
    let mut spare = [
        [Vec::new(), Vec::new(), Vec::new()],
        [Vec::new(), Vec::new(), Vec::new()],
    ];
    for k in 0..2 {
        let len = |t: usize| h.a_len[k][t];
        let q_now: Vec<_> = pairs.iter().map(|&(t, _)| (len(t), t)).collect();
        let q_before: Vec<_> = pairs.iter().map(|&(t, tp)| (len(t), tp - 1)).collect();
        let q_then: Vec<_> = pairs.iter().map(|&(t, tp)| (len(t), tp)).collect();
        for (slot, q) in [q_now, q_before, q_then].into_iter().enumerate() {
            spare[k][slot] = offline_counts(&inc[k], rounds, &q)
                .into_iter()
                .zip(&q)
                .map(|(n, &(l, _))| 2 * l as i64 - n as i64)
                .collect();
        }
    }

    for c in Colour::BOTH {
        let k = c.index();
        let o = 1 - k;
        let tag = colour_tag(c);
        for (i, &(t, tp)) in pairs.iter().enumerate() {
            let pair_fail = |prop: &str, lhs: i64, rhs: i64, detail: String| {
                let mut r = CheckReport::fail(prop, t, lhs as f64, rhs as f64, detail);
                r.t_prime = Some(tp);
                r
            };
            let rho_t = spare[k][0][i];
            let rho_before = spare[k][1][i];
            let rho_then = spare[k][2][i];

            // frozen list at round t reproduces the recorded spare degree
            rec.check("frozen-A", rho_t == h.rho[k][t] as i64, || {
                pair_fail(
                    "frozen-A",
                    rho_t,
                    h.rho[k][t] as i64,
                    format!("{tag}: replayed spare differs"),
                )
            });

            // L4.3(viii): spare lost by the round-t list against growth of the other Y
            let drop = rho_t - rho_then;
            let grow_o = (h.counts[o][tp][Y] - h.counts[o][t][Y]) as i64;
            rec.check("L4.3(viii)", 2 * grow_o >= drop, || {
                pair_fail(
                    "L4.3(viii)",
                    2 * grow_o,
                    drop,
                    format!("{tag} list lost more spare than 2|new Y|"),
                )
            });
            let grow_k = (h.counts[k][tp][Y] - h.counts[k][t][Y]) as i64;
            rec.note("L4.3(viii).swapped", true, 2 * grow_k >= drop);
            let waiting = h.waiting[o][t] as i64;
            rec.note("L4.3(viii).with-waiting", true, 2 * (grow_o + waiting) >= drop);

            // L4.3(ix)
            let fired = rho_before >= ell as i64;
            let (zo, wk) = (h.counts[o][tp][Z] as i64, h.counts[k][t][W] as i64);
            rec.record("L4.3(ix)", fired, zo <= wk, || {
                pair_fail(
                    "L4.3(ix)",
                    zo,
                    wk,
                    format!("|Z| of the other colour at t' exceeds |W{tag}_t|"),
                )
            });

            // L4.4(i)
            let lhs = h.rho[k][tp] as i64 - h.rho[k][t] as i64;
            let rhs =
                2 * (h.d(k, tp) as i64 - h.d(k, t) as i64) + 2 * (h.counts[k][tp][X] as i64 - h.counts[k][t][X] as i64);
            rec.check("L4.4(i)", lhs <= rhs, || {
                pair_fail("L4.4(i)", lhs, rhs, format!("{tag} spare grew faster than new D and X"))
            });

            // L4.4(iii): hypothesis on the other colour's frozen list
            let fired = spare[o][1][i] >= ell as i64;
            let lhs = 2 * h.d(o, t) as i64;
            let xz = (h.counts[k][tp][X] + h.counts[k][tp][Z]) as i64;
            let rhs = 2 * h.d(k, t) as i64 + xz - h.rho[k][t] as i64;
            rec.record("L4.4(iii)", fired, lhs >= rhs, || {
                pair_fail(
                    "L4.4(iii)",
                    lhs,
                    rhs,
                    format!("{tag}: 2|D| of the other colour below bound"),
                )
            });
        }
    }

    rec.report.monitors.extend(monitors(h, &inc, ell, plan.monitor_eps));
}

fn monitors(h: &History, inc: &[Vec<Vec<usize>>; 2], ell: usize, eps: f64) -> Vec<MonitorSummary> {
    let rounds = h.rounds;
    let mut out = Vec::new();
    let big = 2.0 * std::f64::consts::SQRT_2 - 2.0 - eps;
    // next round > t where the larger coverage reaches the 4.6 density
    let mut next_dense = vec![None; rounds + 2];
    for t in (1..=rounds).rev() {
        let best = h.cov[0][t].max(h.cov[1][t]) as f64;
        next_dense[t] = if best >= big * t as f64 {
            Some(t)
        } else {
            next_dense[t + 1]
        };
    }
    for c in Colour::BOTH {
        let k = c.index();
        let tag = colour_tag(c);

        // next round > t where own coverage reaches (1 - 9/ell) t'
        let mut next_cov = vec![None; rounds + 2];
        for t in (1..=rounds).rev() {
            let hit = (ell as i64) * h.cov[k][t] as i64 >= (ell as i64 - 9) * t as i64;
            next_cov[t] = if hit { Some(t) } else { next_cov[t + 1] };
        }
        let mut m45 = MonitorSummary::new(&format!("L4.5[{tag}]"));
        let mut fw = Fenwick::new(rounds + 1);
        let mut inserted = 0;
        for t in 1..=rounds {
            if h.rho[k][t] < ell {
                continue;
            }
            let len = h.a_len[k][t];
            while inserted < len {
                for &r in &inc[k][inserted] {
                    fw.add(r.min(rounds));
                }
                inserted += 1;
            }
            // spare falls below ell once more than 2 len - ell incidences exist
            let need = 2 * len + 1 - ell;
            let by_spare = fw.kth(need).filter(|&r| r > t && r <= rounds);
            let by_cov = next_cov[t + 1];
            m45.resolve(t, [by_spare, by_cov].into_iter().flatten().min());
        }
        out.push(m45);

        let mut m46 = MonitorSummary::new(&format!("L4.6[{tag}]"));
        let mut next_low = vec![None; rounds + 2];
        for t in (1..=rounds).rev() {
            next_low[t] = if h.rho[k][t] < ell { Some(t) } else { next_low[t + 1] };
        }
        for t in 1..=rounds {
            if h.rho[k][t] >= ell {
                let at = [next_low[t + 1], next_dense[t + 1]].into_iter().flatten().min();
                m46.resolve(t, at);
            }
        }
        out.push(m46);
    }
    out
}

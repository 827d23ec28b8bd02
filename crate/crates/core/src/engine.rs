//! Round-by-round construction of a red and a blue path-forest.
//!
//! Round `t` considers vertex `t`. Writing `own` for the class of `t` and
//! `other` for the opposite class:
//!
//! 1. `t` joins the `own` forest as an isolated vertex (it may already be
//!    there, attached earlier by forward edges).
//! 2. `other`-class vertices whose maturation round is `t` join the `other`
//!    available list; a reserve is drawn from that list if none exists.
//! 3. `t` is classified by how it could enter the `other` forest.
//! 4. `W`: two forward edges into the `other` forest. `X`/`Z`: `t` becomes
//!    available in its own colour. `Y`: as `X`, and `t` also waits in a batch
//!    that is absorbed through the `other` reserve once it is full.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colouring::{Colour, ColouringError, RestrictedColouring, Vertex};
use crate::invariants::{CheckReport, RoundChecker};
use crate::pathforest::{ForestError, PathForest};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("ell = {0} must be even and at least 2")]
    Parameter(usize),
    #[error("round {round} needs vertices up to {needed} but the horizon is {horizon}")]
    Horizon {
        round: usize,
        needed: usize,
        horizon: usize,
    },
    #[error("consistency failure in round {round}: {source}")]
    Consistency {
        round: usize,
        #[source]
        source: ForestError,
    },
    #[error(transparent)]
    Colouring(#[from] ColouringError),
    #[error("invariant {} failed in round {}: {} (lhs {}, rhs {})", .0.property, .0.round, .0.detail, .0.lhs, .0.rhs)]
    Invariant(Box<CheckReport>),
    #[error("trace i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexType {
    W,
    X,
    Y,
    Z,
}

impl VertexType {
    pub const ALL: [VertexType; 4] = [VertexType::W, VertexType::X, VertexType::Y, VertexType::Z];

    #[must_use]
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    ForwardAttach,
    BatchAbsorb,
    None,
}

/// A reserved subset of an available list and the round it is dated to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reserve {
    pub members: Vec<Vertex>,
    pub created: usize,
}

/// Per-colour part of the state. The forest of colour `c` holds every vertex
/// of class `c` seen so far; `available`, `reserve` and `waiting` consist of
/// class-`c` vertices.
#[derive(Debug, Clone, Default)]
pub struct Side {
    pub forest: PathForest,
    pub available: Vec<Vertex>,
    pub reserve: Option<Reserve>,
    pub waiting: Vec<Vertex>,
    pub counts: [usize; 4],
}

/// Type tallies of both colours, serialized as `WR..ZB`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeCounts {
    #[serde(rename = "WR")]
    pub wr: usize,
    #[serde(rename = "XR")]
    pub xr: usize,
    #[serde(rename = "YR")]
    pub yr: usize,
    #[serde(rename = "ZR")]
    pub zr: usize,
    #[serde(rename = "WB")]
    pub wb: usize,
    #[serde(rename = "XB")]
    pub xb: usize,
    #[serde(rename = "YB")]
    pub yb: usize,
    #[serde(rename = "ZB")]
    pub zb: usize,
}

impl TypeCounts {
    #[must_use]
    pub fn from_arrays(red: [usize; 4], blue: [usize; 4]) -> Self {
        TypeCounts {
            wr: red[0],
            xr: red[1],
            yr: red[2],
            zr: red[3],
            wb: blue[0],
            xb: blue[1],
            yb: blue[2],
            zb: blue[3],
        }
    }

    #[must_use]
    pub fn of(&self, colour: Colour) -> [usize; 4] {
        match colour {
            Colour::Red => [self.wr, self.xr, self.yr, self.zr],
            Colour::Blue => [self.wb, self.xb, self.yb, self.zb],
        }
    }

    #[must_use]
    pub fn get(&self, colour: Colour, ty: VertexType) -> usize {
        self.of(colour)[ty.index()]
    }
}

/// One line of the run trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub t: usize,
    #[serde(rename = "cR")]
    pub c_red: usize,
    #[serde(rename = "cB")]
    pub c_blue: usize,
    #[serde(rename = "rhoR")]
    pub rho_red: usize,
    #[serde(rename = "rhoB")]
    pub rho_blue: usize,
    pub counts: TypeCounts,
    #[serde(rename = "type")]
    pub vertex_type: VertexType,
    pub event: Event,
}

impl RoundTrace {
    #[must_use]
    pub fn c(&self, colour: Colour) -> usize {
        match colour {
            Colour::Red => self.c_red,
            Colour::Blue => self.c_blue,
        }
    }

    #[must_use]
    pub fn rho(&self, colour: Colour) -> usize {
        match colour {
            Colour::Red => self.rho_red,
            Colour::Blue => self.rho_blue,
        }
    }
}

/// Which round a reserve is dated to, for the `Y`/`Z` split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReserveClock {
    /// The first round at which the reserve equalled its current member set.
    /// A redefinition that reproduces an earlier set keeps the earlier date.
    #[default]
    FirstEqual,
    /// The round of the latest (re)definition.
    Redefinition,
}

/// How much checking `run` performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub enum CheckLevel {
    #[default]
    None,
    /// Per-round structural and inequality checks.
    Round,
    /// Per-round checks plus round-pair facts and monitors after the run.
    Full,
}

#[derive(Debug, Clone)]
pub struct EngineState<'c> {
    colouring: &'c RestrictedColouring,
    reach: usize,
    pub ell: usize,
    pub clock: ReserveClock,
    pub t: usize,
    pub sides: [Side; 2],
    /// `phi[v]` for `v <= t`; index 0 unused.
    pub phi: Vec<Vertex>,
    /// `types[v]` for `v <= t`; index 0 unused.
    pub types: Vec<Option<VertexType>>,
    /// `maturing[r]`: vertices whose maturation round is `r > t`.
    maturing: Vec<Vec<Vertex>>,
    // first round each reserve member set was in force, by colour
    first_seen: [HashMap<Vec<Vertex>, usize>; 2],
}

impl<'c> EngineState<'c> {
    pub fn init(colouring: &'c RestrictedColouring, ell: usize) -> Result<Self, EngineError> {
        Self::init_with(colouring, ell, ReserveClock::default())
    }

    pub fn init_with(colouring: &'c RestrictedColouring, ell: usize, clock: ReserveClock) -> Result<Self, EngineError> {
        if ell < 2 || !ell.is_multiple_of(2) {
            return Err(EngineError::Parameter(ell));
        }
        Ok(EngineState {
            colouring,
            reach: colouring.max_forward_reach(),
            ell,
            clock,
            t: 0,
            sides: [Side::default(), Side::default()],
            phi: vec![0],
            types: vec![None],
            maturing: Vec::new(),
            first_seen: [HashMap::new(), HashMap::new()],
        })
    }

    #[must_use]
    pub fn colouring(&self) -> &'c RestrictedColouring {
        self.colouring
    }

    #[must_use]
    pub fn side(&self, c: Colour) -> &Side {
        &self.sides[c.index()]
    }

    #[must_use]
    pub fn forest(&self, c: Colour) -> &PathForest {
        &self.sides[c.index()].forest
    }

    /// `|V(F_c) ∩ [t]|`.
    #[must_use]
    pub fn coverage(&self, c: Colour) -> usize {
        self.forest(c).count_upto(self.t)
    }

    /// Spare degree of the available list of colour `c` in its own forest.
    #[must_use]
    pub fn available_spare(&self, c: Colour) -> usize {
        let s = self.side(c);
        s.available.iter().map(|&v| 2 - s.forest.degree(v)).sum()
    }

    /// Largest round the colouring supports.
    #[must_use]
    pub fn max_rounds(&self) -> usize {
        self.colouring.horizon().saturating_sub(self.reach)
    }

    fn reserve_if_possible(&mut self, c: Colour, round: usize) -> Result<(), ForestError> {
        let ell = self.ell;
        let side = &mut self.sides[c.index()];
        if side.reserve.is_none() && side.forest.spare_degree(&side.available)? >= ell {
            let members = side.forest.select_sigma(&side.available, ell)?;
            let mut key = members.clone();
            key.sort_unstable();
            let first = *self.first_seen[c.index()].entry(key).or_insert(round);
            let created = match self.clock {
                ReserveClock::FirstEqual => first,
                ReserveClock::Redefinition => round,
            };
            side.reserve = Some(Reserve { members, created });
        }
        Ok(())
    }

    /// Classification of round vertex `t`, assuming Steps 1 and 2 of round `t`
    /// have been applied. Returns the type and the attachable set `J`.
    pub fn classify(&self, t: Vertex) -> Result<(VertexType, Vec<Vertex>), EngineError> {
        let own = self.colouring.class_of(t)?;
        let other = self.side(own.opposite());
        let j: Vec<Vertex> = self
            .colouring
            .forward_opposite_neighbours(t)?
            .into_iter()
            .filter(|&w| other.forest.degree(w) < 2)
            .collect();
        let ty = if j.len() >= 3 {
            VertexType::W
        } else {
            match &other.reserve {
                None => VertexType::X,
                Some(r) if self.forest(own).degree_at(t, r.created) < 2 => VertexType::Y,
                Some(_) => VertexType::Z,
            }
        };
        Ok((ty, j))
    }

    /// Executes round `t + 1`.
    pub fn step(&mut self) -> Result<RoundTrace, EngineError> {
        let t = self.t + 1;
        let horizon = self.colouring.horizon();
        if t + self.reach > horizon {
            return Err(EngineError::Horizon {
                round: t,
                needed: t + self.reach,
                horizon,
            });
        }
        let consistency = |source| EngineError::Consistency { round: t, source };
        let own = self.colouring.class(t);
        let other = own.opposite();
        let (oi, xi) = (own.index(), other.index());

        // Step 1
        self.sides[oi].forest.ensure_vertex(t);

        // Step 2
        let mut matured = self.maturing.get_mut(t).map(std::mem::take).unwrap_or_default();
        matured.sort_unstable();
        for &v in &matured {
            if self.colouring.class(v) != other {
                return Err(consistency(ForestError::Precondition(format!(
                    "vertex {v} matures in a round of its own class"
                ))));
            }
        }
        self.sides[xi].available.extend_from_slice(&matured);
        self.reserve_if_possible(other, t).map_err(consistency)?;

        // Step 3
        let (ty, j) = self.classify(t)?;
        self.types.push(Some(ty));
        self.sides[oi].counts[ty.index()] += 1;

        // Step 4
        let mut event = Event::None;
        match ty {
            VertexType::W => {
                let (j1, _) = self.sides[xi].forest.attach_two(t, &j, t).map_err(consistency)?;
                self.phi.push(j1);
                if self.maturing.len() <= j1 {
                    self.maturing.resize_with(j1 + 1, Vec::new);
                }
                self.maturing[j1].push(t);
                event = Event::ForwardAttach;
            }
            VertexType::X | VertexType::Y | VertexType::Z => {
                self.phi.push(t);
                self.sides[oi].available.push(t);
                self.reserve_if_possible(own, t).map_err(consistency)?;
            }
        }
        if ty == VertexType::Y {
            let half = self.ell / 2;
            if self.sides[oi].waiting.len() + 1 < half {
                self.sides[oi].waiting.push(t);
            } else {
                let mut batch = std::mem::take(&mut self.sides[oi].waiting);
                batch.push(t);
                let xs = self.sides[xi]
                    .reserve
                    .as_ref()
                    .map(|r| r.members.clone())
                    .ok_or_else(|| consistency(ForestError::Precondition("type Y without a reserve".into())))?;
                let colouring = self.colouring;
                self.sides[xi]
                    .forest
                    .absorb(&xs, &batch, |x, y| colouring.edge_colour(x, y) == Ok(other), t)
                    .map_err(consistency)?;
                self.sides[xi].reserve = None;
                self.reserve_if_possible(other, t).map_err(consistency)?;
                event = Event::BatchAbsorb;
            }
        }
        self.t = t;

        Ok(self.trace_line(ty, event))
    }

    fn trace_line(&self, ty: VertexType, event: Event) -> RoundTrace {
        RoundTrace {
            t: self.t,
            c_red: self.coverage(Colour::Red),
            c_blue: self.coverage(Colour::Blue),
            rho_red: self.available_spare(Colour::Red),
            rho_blue: self.available_spare(Colour::Blue),
            counts: TypeCounts::from_arrays(self.sides[0].counts, self.sides[1].counts),
            vertex_type: ty,
            event,
        }
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput<'c> {
    pub trace: Vec<RoundTrace>,
    pub state: EngineState<'c>,
}

/// Runs `rounds` rounds. With checks enabled, the first failing invariant
/// aborts the run.
pub fn run<'c>(
    colouring: &'c RestrictedColouring,
    ell: usize,
    rounds: usize,
    checks: CheckLevel,
) -> Result<RunOutput<'c>, EngineError> {
    run_with(colouring, ell, rounds, checks, ReserveClock::default())
}

pub fn run_with<'c>(
    colouring: &'c RestrictedColouring,
    ell: usize,
    rounds: usize,
    checks: CheckLevel,
    clock: ReserveClock,
) -> Result<RunOutput<'c>, EngineError> {
    let mut state = EngineState::init_with(colouring, ell, clock)?;
    let mut trace = Vec::with_capacity(rounds);
    let mut checker = (checks >= CheckLevel::Round).then(|| RoundChecker::new(ell));
    for _ in 0..rounds {
        let line = state.step()?;
        if let Some(ch) = checker.as_mut() {
            if let Some(fail) = ch.observe(&state, &line).into_iter().find(|r| !r.passed) {
                return Err(EngineError::Invariant(Box::new(fail)));
            }
        }
        trace.push(line);
    }
    if let (CheckLevel::Full, Some(ch)) = (checks, checker) {
        if let Some(fail) = ch.finish(&state).failures.into_iter().next() {
            return Err(EngineError::Invariant(Box::new(fail)));
        }
    }
    Ok(RunOutput { trace, state })
}

// -------------------------------------------------------------------------
// Density summary
// -------------------------------------------------------------------------

/// Statistics of `max(c_R, c_B) / t` over a trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensitySummary {
    pub sup: f64,
    pub sup_at: usize,
    /// Supremum over rounds `t >= k0` (`None` if the trace is shorter).
    pub sup_from_k0: Option<f64>,
    pub k0: usize,
    pub last: f64,
    pub target: f64,
    /// First round whose ratio reaches `target`.
    pub first_at_target: Option<usize>,
    pub first_at_target_from_k0: Option<usize>,
}

#[must_use]
pub fn density_summary(trace: &[RoundTrace], k0: usize, target: f64) -> DensitySummary {
    let ratio = |l: &RoundTrace| l.c_red.max(l.c_blue) as f64 / l.t as f64;
    let mut out = DensitySummary {
        sup: 0.0,
        sup_at: 0,
        sup_from_k0: None,
        k0,
        last: trace.last().map_or(0.0, ratio),
        target,
        first_at_target: None,
        first_at_target_from_k0: None,
    };
    for l in trace {
        let r = ratio(l);
        if r > out.sup {
            out.sup = r;
            out.sup_at = l.t;
        }
        if r >= target && out.first_at_target.is_none() {
            out.first_at_target = Some(l.t);
        }
        if l.t >= k0 {
            out.sup_from_k0 = Some(out.sup_from_k0.map_or(r, |s: f64| s.max(r)));
            if r >= target && out.first_at_target_from_k0.is_none() {
                out.first_at_target_from_k0 = Some(l.t);
            }
        }
    }
    out
}

// -------------------------------------------------------------------------
// Trace files
// -------------------------------------------------------------------------

pub fn write_jsonl<W: Write>(trace: &[RoundTrace], mut out: W) -> Result<(), EngineError> {
    for line in trace {
        let text = serde_json::to_string(line).map_err(|e| EngineError::Io(e.to_string()))?;
        writeln!(out, "{text}").map_err(|e| EngineError::Io(e.to_string()))?;
    }
    Ok(())
}

#[must_use]
pub fn trace_to_jsonl(trace: &[RoundTrace]) -> String {
    let mut buf = Vec::new();
    write_jsonl(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<RoundTrace>, EngineError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| EngineError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| EngineError::Io(format!("line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CsvRow {
    t: usize,
    #[serde(rename = "cR")]
    c_red: usize,
    #[serde(rename = "cB")]
    c_blue: usize,
    #[serde(rename = "rhoR")]
    rho_red: usize,
    #[serde(rename = "rhoB")]
    rho_blue: usize,
    #[serde(rename = "WR")]
    wr: usize,
    #[serde(rename = "XR")]
    xr: usize,
    #[serde(rename = "YR")]
    yr: usize,
    #[serde(rename = "ZR")]
    zr: usize,
    #[serde(rename = "WB")]
    wb: usize,
    #[serde(rename = "XB")]
    xb: usize,
    #[serde(rename = "YB")]
    yb: usize,
    #[serde(rename = "ZB")]
    zb: usize,
    #[serde(rename = "type")]
    vertex_type: VertexType,
    event: Event,
}

pub fn write_csv<W: Write>(trace: &[RoundTrace], out: W) -> Result<(), EngineError> {
    let mut w = csv::Writer::from_writer(out);
    for r in trace {
        let c = r.counts;
        w.serialize(CsvRow {
            t: r.t,
            c_red: r.c_red,
            c_blue: r.c_blue,
            rho_red: r.rho_red,
            rho_blue: r.rho_blue,
            wr: c.wr,
            xr: c.xr,
            yr: c.yr,
            zr: c.zr,
            wb: c.wb,
            xb: c.xb,
            yb: c.yb,
            zb: c.zb,
            vertex_type: r.vertex_type,
            event: r.event,
        })
        .map_err(|e| EngineError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| EngineError::Io(e.to_string()))
}

//! Checks that need nothing but a trace file.

use crate::colouring::Colour;
use crate::engine::{Event, RoundTrace, VertexType};

use super::{colour_tag, coverage_bound_holds, total_bound, CheckReport, Recorder, SuiteReport};

/// Evaluates the trace-level facts: consecutive rounds, one new type per
/// round, growth of counts and coverage, coverage of every own-class vertex,
/// and the coverage inequalities `L4.3(vii)` and `L4.4(iv)`.
#[must_use]
pub fn check_trace(trace: &[RoundTrace], ell: usize) -> SuiteReport {
    let mut rec = Recorder::default();
    let mut prev: Option<&RoundTrace> = None;
    for line in trace {
        let t = line.t;
        let expected = prev.map_or(1, |p| p.t + 1);
        rec.check("trace.rounds", t == expected, || {
            CheckReport::fail(
                "trace.rounds",
                t,
                t as f64,
                expected as f64,
                "rounds are not consecutive".into(),
            )
        });

        let all: usize = Colour::BOTH
            .iter()
            .map(|&c| line.counts.of(c).iter().sum::<usize>())
            .sum();
        rec.check("L4.3(i)", all == t, || {
            CheckReport::fail(
                "L4.3(i)",
                t,
                all as f64,
                t as f64,
                "type counts do not add up to t".into(),
            )
        });

        let (mut grew, mut increments) = (true, Vec::new());
        for c in Colour::BOTH {
            let now = line.counts.of(c);
            let before = prev.map_or([0; 4], |p| p.counts.of(c));
            for ty in VertexType::ALL {
                let (a, b) = (before[ty.index()], now[ty.index()]);
                grew &= b >= a;
                if b > a {
                    increments.push((ty, b - a));
                }
            }
            grew &= line.c(c) >= prev.map_or(0, |p| p.c(c));
        }
        let one_new = increments.len() == 1 && increments[0] == (line.vertex_type, 1);
        rec.check("L4.3(ii)", grew && one_new, || {
            CheckReport::fail(
                "L4.3(ii)",
                t,
                increments.len() as f64,
                1.0,
                format!("counts changed by {increments:?}"),
            )
        });

        let event_ok = match line.event {
            Event::ForwardAttach => line.vertex_type == VertexType::W,
            Event::BatchAbsorb => line.vertex_type == VertexType::Y,
            Event::None => line.vertex_type != VertexType::W,
        };
        rec.check("trace.event", event_ok, || {
            CheckReport::fail(
                "trace.event",
                t,
                0.0,
                0.0,
                format!("event {:?} with type {}", line.event, line.vertex_type),
            )
        });

        for c in Colour::BOTH {
            let tag = colour_tag(c);
            let own: usize = line.counts.of(c).iter().sum();
            rec.check("trace.own-class", line.c(c) >= own, || {
                CheckReport::fail(
                    "trace.own-class",
                    t,
                    line.c(c) as f64,
                    own as f64,
                    format!("c{tag} misses own-class vertices"),
                )
            });
            let o = line.counts.of(c.opposite());
            let (lhs, rhs) = coverage_bound_holds(ell, line.c(c), t, o[1], o[3]);
            rec.check("L4.3(vii)", lhs >= rhs, || {
                CheckReport::fail(
                    "L4.3(vii)",
                    t,
                    lhs as f64 / ell as f64,
                    rhs as f64 / ell as f64,
                    format!("c{tag} below coverage bound"),
                )
            });
        }
        let (lhs, rhs) = total_bound(ell, line);
        rec.check("L4.4(iv)", lhs >= rhs, || {
            let scale = 2.0 * ell as f64;
            CheckReport::fail(
                "L4.4(iv)",
                t,
                lhs as f64 / scale,
                rhs as f64 / scale,
                "combined coverage below bound".into(),
            )
        });
        prev = Some(line);
    }
    rec.report.rounds = trace.len();
    rec.report
}

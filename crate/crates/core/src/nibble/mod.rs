//! The semi-random coloring procedure.
//!
//! Every uncolored vertex `u` keeps a probability vector `p_u` over the
//! palette. In each round a color `c` is tentatively activated at `u` with
//! probability `θ p_u(c)`; colors that would complete a monochromatic edge
//! (of `H^(t)` or of a restriction hypergraph `H_i`) are lost, a vertex takes
//! the smallest activated color it may still use, and the vectors are
//! rescaled so that each `p_u(c)` is a martingale.

mod params;
mod state;
pub mod telemetry;

use std::io::Write;

use serde::Serialize;

pub use params::{DerivedParams, EngineParams, Mode, PracticalOverrides};
pub use state::{ColoringState, Restriction, RoundScratch};
pub use telemetry::{telemetry_check, Flag, TelemetryCheck, TelemetrySnapshot};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every vertex is colored.
    Done,
    /// The round budget ran out.
    RoundLimit,
    /// Every uncolored vertex has degree at most `Δ^x` in `H^(t)` plus the `H_i`.
    Handoff,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: ColoringState,
    /// Snapshot of the initial state followed by one per round.
    pub series: Vec<TelemetrySnapshot>,
    pub stop: StopReason,
}

impl RunOutcome {
    pub fn rounds(&self) -> usize {
        self.state.round()
    }

    /// Telemetry series as CSV, header included.
    pub fn telemetry_csv(&self) -> String {
        let mut out = TelemetrySnapshot::csv_header(self.state.graph().k());
        out.push('\n');
        for s in &self.series {
            out.push_str(&s.csv_row());
            out.push('\n');
        }
        out
    }
}

fn stop_reason(state: &ColoringState, snap: &TelemetrySnapshot) -> Option<StopReason> {
    if snap.uncolored == 0 {
        return Some(StopReason::Done);
    }
    let p = state.params();
    if let Some(x) = p.handoff_exponent {
        if (snap.max_d as f64) <= (p.max_degree.max(2) as f64).powf(x) {
            return Some(StopReason::Handoff);
        }
    }
    if state.round() >= p.rounds {
        return Some(StopReason::RoundLimit);
    }
    None
}

/// Runs rounds until every vertex is colored, the hand-off degree is
/// reached or the round budget is spent. Soundness (no monochromatic
/// fully colored edge) is checked after every round.
pub fn run(mut state: ColoringState) -> Result<RunOutcome> {
    let first = telemetry::snapshot(&state);
    let mut stop = stop_reason(&state, &first);
    let mut series = vec![first];
    while stop.is_none() {
        let snap = state.run_round()?;
        stop = stop_reason(&state, &snap);
        series.push(snap);
    }
    Ok(RunOutcome {
        state,
        series,
        stop: stop.unwrap(),
    })
}

#[derive(Serialize)]
struct VertexDump {
    vertex: u32,
    colored: bool,
    color: Option<u32>,
    sum_p: f64,
    lost: usize,
    capped: usize,
}

/// One JSON object per vertex: `vertex`, `colored`, `color`, `sum_p`,
/// `lost` (`|A(u)|`) and `capped` (`|B(u)|`).
pub fn write_state_jsonl(state: &ColoringState, mut out: impl Write) -> Result<()> {
    for u in 0..state.graph().num_vertices() as u32 {
        let row = VertexDump {
            vertex: u,
            colored: !state.is_uncolored(u),
            color: state.color(u).map(|c| state.label(c)),
            sum_p: state.probs(u).iter().sum(),
            lost: state.lost_count(u),
            capped: state.capped_count(u),
        };
        serde_json::to_writer(&mut out, &row).map_err(|e| crate::Error::Io(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

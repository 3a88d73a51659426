//! End-to-end coloring: nibble plus finisher on triangle-free input, and
//! the partition reduction for everything else.
//!
//! In full mode the vertex set is split three times — a coarse random
//! partition, a finer one inside each part, then the triangle-free classes
//! of each finer part — and every class is colored on its own with a
//! disjoint block of colors, so an edge spread over several classes can
//! never be monochromatic.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finisher::{finish_with, local_lemma_palette, moser_tardos_extend};
use crate::hypergraph::{Coloring, ColoringReport, Hypergraph};
use crate::nibble::{self, ColoringState, EngineParams, Mode, PracticalOverrides, StopReason, TelemetrySnapshot};
use crate::partition::{
    lemma1_partition, lemma2_partition, triangle_free_refine, Lemma1Config, Lemma2Config, PartitionResult, Refinement,
};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineMode {
    /// Nibble and finisher on the whole (triangle-free) instance.
    Direct,
    /// Partition into triangle-free classes first.
    Full,
    /// `direct` when the instance is triangle-free, `full` otherwise.
    Auto,
}

/// How the nibble parameters are chosen for each colored piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub mode: Mode,
    /// ε for theory mode.
    pub epsilon: f64,
    /// Practical-mode choices; unset fields use the default schedule.
    pub overrides: PracticalOverrides,
    pub resample_on_breach: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            mode: Mode::Practical,
            epsilon: 0.5,
            overrides: PracticalOverrides::default(),
            resample_on_breach: false,
        }
    }
}

impl EngineConfig {
    /// Parameters for a piece with maximum degree `max_degree` (raised to 2).
    pub fn params(&self, k: usize, max_degree: usize, seed: u64) -> Result<EngineParams> {
        let d = max_degree.max(2);
        let mut p = match self.mode {
            Mode::Theory => {
                let mut p = EngineParams::theory(k, d, self.epsilon, seed)?.params;
                p.validate()?;
                if let Some(h) = self.overrides.handoff_exponent {
                    p.handoff_exponent = h;
                }
                p
            }
            Mode::Practical => EngineParams::practical(k, d, seed, &self.overrides)?,
        };
        p.resample_on_breach = self.resample_on_breach;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub mode: PipelineMode,
    pub engine: EngineConfig,
    pub lemma1: Lemma1Config,
    pub lemma2: Lemma2Config,
    /// Finisher resample cap; `None` means `1000 |E|` of the residual.
    pub finisher_cap: Option<u64>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: PipelineMode::Auto,
            engine: EngineConfig::default(),
            lemma1: Lemma1Config::default(),
            lemma2: Lemma2Config::default(),
            finisher_cap: None,
            seed: 0,
        }
    }
}

/// What happened to one triangle-free piece.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRun {
    pub class: usize,
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    /// Nibble palette size (zero when the piece had no edges).
    pub q: usize,
    pub rounds: usize,
    pub stop: Option<StopReason>,
    pub residual_vertices: usize,
    pub residual_edges: usize,
    pub residual_max_degree: usize,
    pub finisher_palette: u32,
    /// Whether the finisher needed more than `min(q, ceil(4 Δ'^(1/(k-1))) + 1)` colors.
    pub finisher_escalated: bool,
    pub finisher_resamples: u64,
    pub colors_used: usize,
    /// First color id of this piece in the merged coloring.
    pub color_offset: u32,
}

/// The partitions computed in full mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partitions {
    pub lemma1: PartitionResult,
    /// One per coarse part, in part order.
    pub lemma2: Vec<PartitionResult>,
    /// One per fine part, in order.
    pub refinements: Vec<Refinement>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub mode: PipelineMode,
    pub coloring: Coloring,
    pub report: ColoringReport,
    pub colors_used: usize,
    pub classes: Vec<ClassRun>,
    /// Telemetry series per class, in class order.
    pub telemetry: Vec<Vec<TelemetrySnapshot>>,
    pub partitions: Option<Partitions>,
    /// Final nibble state of the single class in direct mode.
    pub final_state: Option<ColoringState>,
}

impl PipelineOutcome {
    /// All telemetry rows with a leading `class` column.
    pub fn telemetry_csv(&self, k: usize) -> String {
        let mut out = format!("class,{}\n", TelemetrySnapshot::csv_header(k));
        for (class, series) in self.telemetry.iter().enumerate() {
            for s in series {
                out.push_str(&format!("{class},{}\n", s.csv_row()));
            }
        }
        out
    }
}

struct PieceColoring {
    colors: Vec<u32>,
    run: ClassRun,
    series: Vec<TelemetrySnapshot>,
    state: Option<ColoringState>,
}

/// Nibble then finisher on a triangle-free simple hypergraph. Nibble
/// colors come first, finisher colors after them; the result is compacted
/// to `0..colors_used`.
fn color_piece(h: &Hypergraph, cfg: &PipelineConfig, class: usize, seed: u64) -> Result<PieceColoring> {
    let n = h.num_vertices();
    let mut run = ClassRun {
        class,
        vertices: n,
        edges: h.num_edges(),
        max_degree: h.max_degree(),
        q: 0,
        rounds: 0,
        stop: None,
        residual_vertices: 0,
        residual_edges: 0,
        residual_max_degree: 0,
        finisher_palette: 0,
        finisher_escalated: false,
        finisher_resamples: 0,
        colors_used: 0,
        color_offset: 0,
    };
    if h.num_edges() == 0 {
        run.colors_used = usize::from(n > 0);
        return Ok(PieceColoring {
            colors: vec![0; n],
            run,
            series: Vec::new(),
            state: None,
        });
    }
    let params = cfg.engine.params(h.k(), h.max_degree(), seed)?;
    run.q = params.q;
    let out = nibble::run(ColoringState::new(h, &params)?)?;
    run.rounds = out.rounds();
    run.stop = Some(out.stop);

    let partial = out.state.partial_coloring();
    let open: Vec<u32> = (0..n as u32).filter(|&v| partial[v as usize].is_none()).collect();
    let residual = h.induced(&open)?;
    let r = &residual.graph;
    run.residual_vertices = r.num_vertices();
    run.residual_edges = r.num_edges();
    run.residual_max_degree = r.max_degree();

    let ceiling = local_lemma_palette(h.k(), r.max_degree()).max(2);
    let mut palette = ceiling.min(params.q as u32).max(if r.num_edges() > 0 { 2 } else { 1 });
    let fin_seed = rng::derive(seed, 7);
    let finished = loop {
        let cap = cfg.finisher_cap.unwrap_or(1000 * r.num_edges() as u64);
        let attempt = finish_with(r, params.q as u32, palette, fin_seed).and_then(|f| {
            if f.resamples > cap {
                Err(Error::ResampleCapExceeded {
                    cap,
                    resamples: f.resamples,
                })
            } else {
                Ok(f)
            }
        });
        match attempt {
            Ok(f) => break f,
            Err(Error::ResampleCapExceeded { .. }) if palette < ceiling => {
                palette += 1;
                run.finisher_escalated = true;
            }
            Err(e) => return Err(e),
        }
    };
    run.finisher_palette = palette;
    run.finisher_resamples = finished.resamples;

    let mut colors: Vec<u32> = partial.iter().map(|c| c.unwrap_or(u32::MAX)).collect();
    for (i, &v) in residual.to_parent.iter().enumerate() {
        colors[v as usize] = finished.coloring.get(i as u32).expect("finisher colors everything");
    }
    let colors = compact(&colors);
    run.colors_used = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    Ok(PieceColoring {
        colors,
        run,
        series: out.series,
        state: Some(out.state),
    })
}

/// Relabels colors to `0..m` in order of first appearance by color id.
fn compact(colors: &[u32]) -> Vec<u32> {
    let ids: BTreeMap<u32, u32> = colors
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, i as u32))
        .collect();
    colors.iter().map(|c| ids[c]).collect()
}

/// Colors `h` according to `cfg` and verifies the result.
pub fn color(h: &Hypergraph, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    h.ensure_simple()?;
    let triangle_free = h.find_triangles(1)?.is_empty();
    let mode = match cfg.mode {
        PipelineMode::Auto if triangle_free => PipelineMode::Direct,
        PipelineMode::Auto => PipelineMode::Full,
        m => m,
    };
    let (pieces, partitions) = match mode {
        PipelineMode::Direct => {
            let piece = color_piece(h, cfg, 0, rng::derive(cfg.seed, 1 << 32))?;
            (vec![((0..h.num_vertices() as u32).collect::<Vec<_>>(), piece)], None)
        }
        _ => {
            let (classes, partitions) = full_classes(h, cfg)?;
            let mut pieces = Vec::with_capacity(classes.len());
            for (i, class) in classes.into_iter().enumerate() {
                let sub = h.induced(&class)?;
                let piece = color_piece(&sub.graph, cfg, i, rng::derive(cfg.seed, (1 << 32) | i as u64))?;
                pieces.push((class, piece));
            }
            (pieces, Some(partitions))
        }
    };

    let mut colors = vec![0u32; h.num_vertices()];
    let mut offset = 0u32;
    let mut classes = Vec::with_capacity(pieces.len());
    let mut telemetry = Vec::with_capacity(pieces.len());
    let mut final_state = None;
    for (members, mut piece) in pieces {
        for (i, &v) in members.iter().enumerate() {
            colors[v as usize] = offset + piece.colors[i];
        }
        piece.run.color_offset = offset;
        offset += piece.run.colors_used as u32;
        classes.push(piece.run);
        telemetry.push(piece.series);
        if mode == PipelineMode::Direct {
            final_state = piece.state;
        }
    }
    let coloring = Coloring::from_colors(colors, offset.max(1))?;
    let report = h.verify_coloring(&coloring)?;
    if !report.proper {
        return Err(Error::Invariant(format!(
            "pipeline produced {} monochromatic edges",
            report.monochromatic_edges.len()
        )));
    }
    Ok(PipelineOutcome {
        mode,
        colors_used: coloring.colors_used(),
        coloring,
        report,
        classes,
        telemetry,
        partitions,
        final_state,
    })
}

/// Coarse partition, fine partition of each part, then triangle-free
/// classes of each fine part. Returns the classes in parent ids.
fn full_classes(h: &Hypergraph, cfg: &PipelineConfig) -> Result<(Vec<Vec<u32>>, Partitions)> {
    let l1 = lemma1_partition(
        h,
        &Lemma1Config {
            seed: rng::derive(cfg.seed, 1),
            ..cfg.lemma1.clone()
        },
    )?;
    let mut lemma2 = Vec::new();
    let mut refinements = Vec::new();
    let mut classes = Vec::new();
    for (i, part) in l1.parts.iter().enumerate() {
        if part.vertices.is_empty() {
            continue;
        }
        let coarse = h.induced(&part.vertices)?;
        let l2 = lemma2_partition(
            &coarse.graph,
            &Lemma2Config {
                seed: rng::derive(cfg.seed, 1000 + i as u64),
                ..cfg.lemma2.clone()
            },
        )?;
        for fine_part in &l2.parts {
            if fine_part.vertices.is_empty() {
                continue;
            }
            let fine = coarse.graph.induced(&fine_part.vertices)?;
            let refinement = triangle_free_refine(&fine.graph)?;
            for class in &refinement.classes {
                // back to the ids of h
                classes.push(
                    class
                        .iter()
                        .map(|&v| coarse.to_parent[fine.to_parent[v as usize] as usize])
                        .collect(),
                );
            }
            refinements.push(refinement);
        }
        lemma2.push(l2);
    }
    Ok((
        classes,
        Partitions {
            lemma1: l1,
            lemma2,
            refinements,
        },
    ))
}

/// List coloring of a triangle-free simple hypergraph: every vertex brings
/// at least `2q` colors; the nibble runs on the `q` smallest of each list
/// and the leftover vertices are finished from the rest of their lists.
pub fn color_lists(h: &Hypergraph, lists: &[Vec<u32>], params: &EngineParams, cap: Option<u64>) -> Result<Coloring> {
    let out = nibble::run(ColoringState::new_with_lists(h, params, lists)?)?;
    let fixed = out.state.partial_coloring();
    let reserve = out.state.reserve().expect("list mode keeps reserves").to_vec();
    let cap = cap.unwrap_or(1000 * h.num_edges().max(1) as u64);
    let (colors, _) = moser_tardos_extend(h, &reserve, &fixed, cap, rng::derive(params.seed, 7))?;
    let palette = lists.iter().flatten().copied().max().map_or(1, |m| m + 1);
    let coloring = Coloring::from_colors(colors, palette)?;
    let report = h.verify_coloring(&coloring)?;
    if !report.proper {
        return Err(Error::Invariant("list coloring is not proper".into()));
    }
    Ok(coloring)
}

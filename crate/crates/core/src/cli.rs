//! Command-line front end.
//!
//! Every subcommand prints one JSON object on stdout. Exit status is 0 on
//! success, 1 when a contract fails (an improper coloring, a finisher that
//! ran out of resamples, a violated internal invariant) and 2 for usage,
//! parse and I/O errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::format;
use crate::gen::{self, GenSpec};
use crate::hypergraph::{Coloring, Girth, Hypergraph};
use crate::nibble::{self, Mode};
use crate::pipeline::{self, ClassRun, PipelineConfig, PipelineMode};
use crate::probe::{covered_pair_polysystem, empirical_tail, kimvu_stats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    File(PathBuf),
    Fixture(String),
    Generate(GenSpec),
}

impl InstanceSource {
    pub fn load(&self) -> Result<Hypergraph> {
        match self {
            InstanceSource::File(p) => format::read(p),
            InstanceSource::Fixture(name) => gen::fixture(name),
            InstanceSource::Generate(spec) => Ok(gen::generate(spec)?.graph),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub k: usize,
    pub n: usize,
    /// Degree caps handed to the generator.
    pub degrees: Vec<usize>,
    /// Seeds `first_seed .. first_seed + seeds`.
    pub seeds: u64,
    pub first_seed: u64,
    pub triangle_free: bool,
    pub density: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            k: 3,
            n: 1000,
            degrees: vec![16, 32, 64, 128],
            seeds: 10,
            first_seed: 0,
            triangle_free: true,
            density: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub vertex: u32,
    /// Each vertex succeeds with probability `1/m`.
    pub m: u64,
    pub trials: usize,
    pub lambdas: Vec<f64>,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            vertex: 0,
            m: 2,
            trials: 10_000,
            lambdas: vec![0.25, 0.5, 1.0, 1.5, 2.0],
            seed: 0,
        }
    }
}

/// Everything a run depends on. Runs are pure functions of this value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub instance: Option<InstanceSource>,
    pub pipeline: PipelineConfig,
    pub sweep: SweepConfig,
    pub probe: ProbeConfig,
    pub out_dir: Option<PathBuf>,
    /// Also write the final nibble state (direct mode).
    pub write_state: bool,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hypercolor",
    version,
    about = "Semi-random coloring of simple k-uniform hypergraphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance (or write a fixture) to a file.
    Gen(GenArgs),
    /// Color an instance and write the run directory.
    Color(ColorArgs),
    /// Check a coloring against an instance.
    Verify(VerifyArgs),
    /// Generate and color over a grid of degrees and seeds.
    Sweep(SweepArgs),
    /// Covered-pair concentration statistics at a vertex.
    Probe(ProbeArgs),
    /// Structural statistics of an instance.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance file in the text format.
    #[arg(long, short)]
    pub instance: Option<PathBuf>,
    /// Named fixture: fano, single_edge(k), loose_cycle(i,k), sunflower(d,k).
    #[arg(long, conflicts_with = "instance")]
    pub fixture: Option<String>,
}

impl InstanceArgs {
    fn source(&self) -> Option<InstanceSource> {
        match (&self.instance, &self.fixture) {
            (Some(p), _) => Some(InstanceSource::File(p.clone())),
            (_, Some(f)) => Some(InstanceSource::Fixture(f.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, short, default_value_t = 1000)]
    pub n: usize,
    /// Degree cap.
    #[arg(long, short = 'd', default_value_t = 16)]
    pub max_degree: usize,
    #[arg(long)]
    pub triangle_free: bool,
    #[arg(long, default_value_t = 1.0)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_attempts: usize,
    /// Write this fixture instead of generating.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Output file.
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Direct,
    Full,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EngineArg {
    Theory,
    Practical,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Parameter schedule for the nibble.
    #[arg(long)]
    pub engine: Option<EngineArg>,
    /// ε for the theory schedule.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Nibble palette size.
    #[arg(long)]
    pub q: Option<usize>,
    /// Activation scale θ.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Probability cap p̂.
    #[arg(long)]
    pub p_hat: Option<f64>,
    /// Round budget.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Hand off to the finisher once every uncolored degree is at most Δ^x.
    #[arg(long)]
    pub handoff: Option<f64>,
    /// Never hand off early.
    #[arg(long, conflicts_with = "handoff")]
    pub no_handoff: bool,
    /// Re-draw a round whose telemetry breaks an invariant bound.
    #[arg(long)]
    pub resample_on_breach: bool,
    /// Finisher resample cap.
    #[arg(long)]
    pub finisher_cap: Option<u64>,
}

impl EngineArgs {
    fn apply(&self, p: &mut PipelineConfig) {
        match self.engine {
            Some(EngineArg::Theory) => p.engine.mode = Mode::Theory,
            Some(EngineArg::Practical) => p.engine.mode = Mode::Practical,
            None => {}
        }
        let o = &mut p.engine.overrides;
        if let Some(e) = self.epsilon {
            p.engine.epsilon = e;
            o.epsilon = Some(e);
        }
        o.q = self.q.or(o.q);
        o.theta = self.theta.or(o.theta);
        o.p_hat = self.p_hat.or(o.p_hat);
        o.rounds = self.rounds.or(o.rounds);
        if let Some(x) = self.handoff {
            o.handoff_exponent = Some(Some(x));
        }
        if self.no_handoff {
            o.handoff_exponent = Some(None);
        }
        p.engine.resample_on_breach |= self.resample_on_breach;
        p.finisher_cap = self.finisher_cap.or(p.finisher_cap);
    }
}

#[derive(Debug, Args)]
pub struct ColorArgs {
    /// JSON run configuration; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Run directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Also write the final nibble state as state.jsonl.
    #[arg(long)]
    pub write_state: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Coloring as JSON lines `{"vertex": v, "color": c}`.
    #[arg(long, short)]
    pub coloring: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, short)]
    pub n: Option<usize>,
    /// Comma-separated degree caps.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Option<Vec<usize>>,
    /// Number of seeds per degree.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub first_seed: Option<u64>,
    /// Generate instances that may contain triangles (colored in full mode).
    #[arg(long)]
    pub allow_triangles: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Directory for sweep.csv and medians.csv.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    pub vertex: u32,
    /// Each vertex succeeds with probability 1/m.
    #[arg(long, default_value_t = 2)]
    pub m: u64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Comma-separated λ grid.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.25, 0.5, 1.0, 1.5, 2.0])]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the tail table as CSV here.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Look for cycles of length below this.
    #[arg(long, default_value_t = 5)]
    pub girth_cap: usize,
}

/// Parses `args` (program name first), runs the command and writes its JSON
/// summary to `out`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Color(a) => cmd_color(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Probe(a) => cmd_probe(&a),
        Command::Stats(a) => cmd_stats(&a),
    };
    let (value, code) = match result {
        Ok(r) => r,
        Err(e) => (json!({ "error": e.to_string() }), exit_code(&e)),
    };
    let _ = writeln!(out, "{value}");
    code
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Invariant(_) | Error::ResampleCapExceeded { .. } | Error::Uncolored(_) => EXIT_CONTRACT,
        _ => EXIT_USAGE,
    }
}

type Outcome = Result<(serde_json::Value, i32)>;

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("serializable")
}

fn cmd_gen(a: &GenArgs) -> Outcome {
    let (h, report) = match &a.fixture {
        Some(name) => (gen::fixture(name)?, serde_json::Value::Null),
        None => {
            let spec = GenSpec {
                k: a.k,
                n: a.n,
                max_degree: a.max_degree,
                triangle_free: a.triangle_free,
                density: a.density,
                seed: a.seed,
                max_attempts: a.max_attempts,
            };
            let g = gen::generate(&spec)?;
            (g.graph, to_value(&g.report))
        }
    };
    format::write(&a.out, &h)?;
    Ok((
        json!({
            "path": a.out,
            "k": h.k(),
            "n": h.num_vertices(),
            "m": h.num_edges(),
            "max_degree": h.max_degree(),
            "report": report,
        }),
        EXIT_OK,
    ))
}

/// Summary of a colored instance, as written to `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ColorSummary {
    pub k: usize,
    pub n: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub mode: PipelineMode,
    pub proper: bool,
    pub monochromatic_edges: usize,
    pub colors_used: usize,
    pub classes: Vec<ClassRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn resolve_color_config(a: &ColorArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(src) = a.instance.source() {
        cfg.instance = Some(src);
    }
    if let Some(m) = a.mode {
        cfg.pipeline.mode = match m {
            ModeArg::Direct => PipelineMode::Direct,
            ModeArg::Full => PipelineMode::Full,
            ModeArg::Auto => PipelineMode::Auto,
        };
    }
    if let Some(s) = a.seed {
        cfg.pipeline.seed = s;
    }
    a.engine.apply(&mut cfg.pipeline);
    if a.out.is_some() {
        cfg.out_dir = a.out.clone();
    }
    cfg.write_state |= a.write_state;
    Ok(cfg)
}

fn cmd_color(a: &ColorArgs) -> Outcome {
    let cfg = resolve_color_config(a)?;
    color_run(&cfg)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes a coloring as JSON lines `{"vertex": v, "color": c}`.
pub fn write_coloring_jsonl(coloring: &Coloring, mut out: impl Write) -> Result<()> {
    for (v, c) in coloring.colors().iter().enumerate() {
        writeln!(out, "{}", json!({ "vertex": v, "color": c }))?;
    }
    Ok(())
}

/// Reads a coloring written by [`write_coloring_jsonl`]. The palette size is
/// one more than the largest color.
pub fn read_coloring_jsonl(text: &str, n: usize) -> Result<Coloring> {
    #[derive(Deserialize)]
    struct Row {
        vertex: usize,
        color: Option<u32>,
    }
    let mut colors = vec![None; n];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if row.vertex >= n {
            return Err(Error::NoSuchVertex {
                vertex: row.vertex as u32,
                n,
            });
        }
        colors[row.vertex] = row.color;
    }
    let palette = colors.iter().flatten().max().map_or(1, |&m| m + 1);
    Coloring::from_partial(colors, palette)
}

/// Runs the pipeline for `cfg` and, if `cfg.out_dir` is set, writes
/// `config.json`, `instance.txt`, `coloring.jsonl`, `telemetry.csv`,
/// `summary.json` and, when present, `partition.jsonl` and `state.jsonl`.
pub fn color_run(cfg: &RunConfig) -> Outcome {
    let source = cfg
        .instance
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("no instance given".into()))?;
    let h = source.load()?;
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("config.json"), cfg)?;
        format::write(dir.join("instance.txt"), &h)?;
    }
    let mut summary = ColorSummary {
        k: h.k(),
        n: h.num_vertices(),
        edges: h.num_edges(),
        max_degree: h.max_degree(),
        mode: cfg.pipeline.mode,
        proper: false,
        monochromatic_edges: 0,
        colors_used: 0,
        classes: Vec::new(),
        error: None,
    };
    let outcome = match pipeline::color(&h, &cfg.pipeline) {
        Ok(o) => o,
        Err(e) => {
            summary.error = Some(e.to_string());
            if let Some(dir) = &cfg.out_dir {
                write_json(&dir.join("summary.json"), &summary)?;
            }
            return Err(e);
        }
    };
    summary.mode = outcome.mode;
    summary.proper = outcome.report.proper;
    summary.monochromatic_edges = outcome.report.monochromatic_edges.len();
    summary.colors_used = outcome.colors_used;
    summary.classes = outcome.classes.clone();
    if let Some(dir) = &cfg.out_dir {
        let mut buf = Vec::new();
        write_coloring_jsonl(&outcome.coloring, &mut buf)?;
        fs::write(dir.join("coloring.jsonl"), buf)?;
        fs::write(dir.join("telemetry.csv"), outcome.telemetry_csv(h.k()))?;
        if let Some(p) = &outcome.partitions {
            let mut buf = Vec::new();
            p.lemma1.write_jsonl(&mut buf)?;
            fs::write(dir.join("partition.jsonl"), buf)?;
        }
        if cfg.write_state {
            if let Some(state) = &outcome.final_state {
                let mut buf = Vec::new();
                nibble::write_state_jsonl(state, &mut buf)?;
                fs::write(dir.join("state.jsonl"), buf)?;
            }
        }
        write_json(&dir.join("summary.json"), &summary)?;
    }
    let code = if summary.proper { EXIT_OK } else { EXIT_CONTRACT };
    Ok((to_value(&summary), code))
}

fn load_instance(a: &InstanceArgs) -> Result<Hypergraph> {
    a.source()
        .ok_or_else(|| Error::InvalidParameter("give --instance or --fixture".into()))?
        .load()
}

fn cmd_verify(a: &VerifyArgs) -> Outcome {
    let h = load_instance(&a.instance)?;
    let text = fs::read_to_string(&a.coloring)?;
    let coloring = read_coloring_jsonl(&text, h.num_vertices())?;
    let report = h.verify_coloring(&coloring)?;
    let code = if report.proper { EXIT_OK } else { EXIT_CONTRACT };
    Ok((
        json!({
            "proper": report.proper,
            "monochromatic_edges": report.monochromatic_edges,
            "colors_used": coloring.colors_used(),
        }),
        code,
    ))
}

/// One generated-and-colored instance of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub n: usize,
    /// Degree cap given to the generator.
    pub delta: usize,
    pub seed: u64,
    /// Maximum degree the generated instance actually has.
    pub realized_delta: usize,
    pub edges: usize,
    pub colors_used: Option<usize>,
    /// `colors_used / (Δ / ln Δ)^(1/(k-1))` with Δ the degree cap.
    pub ratio: Option<f64>,
    /// The same with the realized maximum degree.
    pub ratio_realized: Option<f64>,
    pub proper: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMedian {
    pub delta: usize,
    pub runs: usize,
    pub median_ratio: Option<f64>,
    pub median_ratio_realized: Option<f64>,
    pub median_colors: Option<f64>,
}

/// `(Δ / ln Δ)^(1/(k-1))`.
pub fn scale(k: usize, delta: usize) -> f64 {
    let d = delta as f64;
    (d / d.ln()).powf(1.0 / (k as f64 - 1.0))
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Generates and colors one instance per (degree, seed) pair, in parallel,
/// and returns the rows in grid order with one median line per degree.
pub fn sweep(s: &SweepConfig, base: &PipelineConfig) -> (Vec<SweepRow>, Vec<SweepMedian>) {
    let grid: Vec<(usize, u64)> = s
        .degrees
        .iter()
        .flat_map(|&d| (s.first_seed..s.first_seed + s.seeds).map(move |seed| (d, seed)))
        .collect();
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .map(|&(delta, seed)| {
            let mut row = SweepRow {
                k: s.k,
                n: s.n,
                delta,
                seed,
                realized_delta: 0,
                edges: 0,
                colors_used: None,
                ratio: None,
                ratio_realized: None,
                proper: false,
                error: None,
            };
            let spec = GenSpec {
                k: s.k,
                n: s.n,
                max_degree: delta,
                triangle_free: s.triangle_free,
                density: s.density,
                seed,
                max_attempts: 2000,
            };
            let result = gen::generate(&spec).and_then(|g| {
                row.realized_delta = g.graph.max_degree();
                row.edges = g.graph.num_edges();
                let cfg = PipelineConfig { seed, ..base.clone() };
                pipeline::color(&g.graph, &cfg)
            });
            match result {
                Ok(out) => {
                    row.proper = out.report.proper;
                    row.colors_used = Some(out.colors_used);
                    if delta >= 2 {
                        row.ratio = Some(out.colors_used as f64 / scale(s.k, delta));
                    }
                    if row.realized_delta >= 2 {
                        row.ratio_realized = Some(out.colors_used as f64 / scale(s.k, row.realized_delta));
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    let medians = s
        .degrees
        .iter()
        .map(|&delta| {
            let these: Vec<&SweepRow> = rows.iter().filter(|r| r.delta == delta).collect();
            let pick = |f: fn(&SweepRow) -> Option<f64>| median(&these.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            SweepMedian {
                delta,
                runs: these.len(),
                median_ratio: pick(|r| r.ratio),
                median_ratio_realized: pick(|r| r.ratio_realized),
                median_colors: pick(|r| r.colors_used.map(|c| c as f64)),
            }
        })
        .collect();
    (rows, medians)
}

fn opt<T: std::fmt::Display>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

/// Sweep rows as CSV, fixed column order.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("k,n,delta,seed,realized_delta,edges,colors_used,ratio,ratio_realized,proper,error\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.k,
            r.n,
            r.delta,
            r.seed,
            r.realized_delta,
            r.edges,
            opt(&r.colors_used),
            opt(&r.ratio),
            opt(&r.ratio_realized),
            r.proper,
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        ));
    }
    out
}

/// Medians as CSV, fixed column order.
pub fn medians_csv(meds: &[SweepMedian]) -> String {
    let mut out = String::from("delta,runs,median_ratio,median_ratio_realized,median_colors\n");
    for m in meds {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            m.delta,
            m.runs,
            opt(&m.median_ratio),
            opt(&m.median_ratio_realized),
            opt(&m.median_colors)
        ));
    }
    out
}

fn cmd_sweep(a: &SweepArgs) -> Outcome {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let s = &mut cfg.sweep;
    s.k = a.k.unwrap_or(s.k);
    s.n = a.n.unwrap_or(s.n);
    if let Some(d) = &a.degrees {
        s.degrees = d.clone();
    }
    s.seeds = a.seeds.unwrap_or(s.seeds);
    s.first_seed = a.first_seed.unwrap_or(s.first_seed);
    s.triangle_free &= !a.allow_triangles;
    a.engine.apply(&mut cfg.pipeline);
    if a.out.is_some() {
        cfg.out_dir = a.out.clone();
    }
    let (rows, medians) = sweep(&cfg.sweep, &cfg.pipeline);
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("config.json"), &cfg)?;
        fs::write(dir.join("sweep.csv"), sweep_csv(&rows))?;
        fs::write(dir.join("medians.csv"), medians_csv(&medians))?;
    }
    let failed = rows.iter().filter(|r| !r.proper).count();
    let code = if failed == 0 { EXIT_OK } else { EXIT_CONTRACT };
    Ok((
        json!({ "runs": rows.len(), "failed": failed, "medians": medians }),
        code,
    ))
}

fn cmd_probe(a: &ProbeArgs) -> Outcome {
    let h = load_instance(&a.instance)?;
    if a.m == 0 {
        return Err(Error::InvalidParameter("m must be positive".into()));
    }
    let p = BigRational::new(BigInt::from(1), BigInt::from(a.m));
    let exact = covered_pair_polysystem(&h, a.vertex, p)?;
    let exact_stats = kimvu_stats(&exact, &[])?;
    let sys = covered_pair_polysystem(&h, a.vertex, 1.0 / a.m as f64)?;
    let stats = kimvu_stats(&sys, &[])?;
    let tail = empirical_tail(&sys, a.trials, &a.lambdas, a.seed)?;
    if let Some(path) = &a.out {
        fs::write(path, tail.to_csv())?;
    }
    Ok((
        json!({
            "vertex": a.vertex,
            "covered_pairs": sys.sets.len(),
            "rank": stats.rank,
            "expectation": stats.expectation,
            "expectation_exact": exact_stats.expectation.to_string(),
            "m0": stats.m0,
            "m1": stats.m1,
            "sample_mean": tail.sample_mean,
            "std_err": tail.std_err,
            "tail": tail.rows,
        }),
        EXIT_OK,
    ))
}

fn cmd_stats(a: &StatsArgs) -> Outcome {
    let h = load_instance(&a.instance)?;
    let mut hist: std::collections::BTreeMap<usize, usize> = Default::default();
    for d in h.degrees() {
        *hist.entry(d).or_default() += 1;
    }
    let simple = h.is_simple();
    let triangles = if simple {
        Some(h.find_triangles(usize::MAX)?.len())
    } else {
        None
    };
    let girth = match h.girth(a.girth_cap) {
        Girth::Exact(g) => json!({ "exact": g }),
        Girth::AtLeast(g) => json!({ "at_least": g }),
    };
    Ok((
        json!({
            "k": h.k(),
            "n": h.num_vertices(),
            "m": h.num_edges(),
            "max_degree": h.max_degree(),
            "degree_histogram": hist.into_iter().collect::<Vec<_>>(),
            "simple": simple,
            "triangles": triangles,
            "girth": girth,
        }),
        EXIT_OK,
    ))
}

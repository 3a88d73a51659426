use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use super::params::EngineParams;
use super::telemetry::{self, TelemetrySnapshot};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::{self, Domain};

/// Products with a factor this small are taken in log space.
const LOG_SPACE_BELOW: f64 = 1e-12;

/// An edge of a restriction hypergraph `H_i`: the `i` uncolored vertices of
/// an edge of `H` whose other `k - i` vertices all carry `color`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Restriction {
    pub edge: u32,
    pub color: u32,
    pub members: Vec<u32>,
}

/// The state between two rounds.
///
/// Colors are indices into the working palette `C`; [`ColoringState::label`]
/// maps them back to caller-visible color ids (they differ only in list mode).
#[derive(Debug, Clone)]
pub struct ColoringState {
    graph: Hypergraph,
    params: EngineParams,
    palette: Vec<u32>,
    t: usize,
    uncolored: Vec<bool>,
    kappa: Vec<Option<u32>>,
    colored_at: Vec<Option<usize>>,
    /// `p_u(c)` at `u * |C| + c`.
    p: Vec<f64>,
    /// `A(u)` as flags at `u * |C| + c`.
    lost: Vec<bool>,
    /// Edges of `H^(t)`: edges of `H` with every vertex uncolored.
    active: Vec<u32>,
    active_inc: Vec<Vec<u32>>,
    restrictions: Vec<Restriction>,
    restr_inc: Vec<Vec<u32>>,
    initial_entropy: Vec<f64>,
    /// `Ξ_e` at the start, by edge id.
    initial_xi: Vec<f64>,
    reserve: Option<Vec<Vec<u32>>>,
}

/// Random choices and derived sets of one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundScratch {
    /// `Θ(u)`, ascending; empty for colored vertices.
    pub activated: Vec<Vec<u32>>,
    /// `η_u(c)` at `u * |C| + c`.
    pub eta: Vec<bool>,
    /// `L(u)`, ascending.
    pub lost: Vec<Vec<u32>>,
    /// `Ψ(u) = Θ(u) \ (A(u) ∪ B(u))` after `L(u)` is merged into `A(u)`.
    pub usable: Vec<Vec<u32>>,
    /// The smallest color of `Ψ(u)`, if any.
    pub chosen: Vec<Option<u32>>,
}

fn round_key(t: usize, attempt: usize, u: u32) -> u64 {
    ((t as u64) << 40) | ((attempt as u64 & 0xff) << 32) | u as u64
}

/// `∏ xs`, in log space when some factor is tiny.
fn product(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    if xs.clone().any(|x| x < LOG_SPACE_BELOW) {
        if xs.clone().any(|x| x == 0.0) {
            return 0.0;
        }
        xs.map(f64::ln).sum::<f64>().exp()
    } else {
        xs.product()
    }
}

impl ColoringState {
    /// Uniform start: `p_u = (1/q, ..., 1/q)` over `C = [q]`.
    pub fn new(graph: &Hypergraph, params: &EngineParams) -> Result<Self> {
        let q = params.q;
        let palette: Vec<u32> = (0..q as u32).collect();
        let p = vec![1.0 / q as f64; graph.num_vertices() * q];
        Self::build(graph, params, palette, p, None)
    }

    /// List-coloring start. Each vertex brings at least `2q` available
    /// colors; its `q` smallest form `B_v`, `C` is the union of the `B_v`,
    /// and `p_v(c) = 1/q` exactly on `B_v`. The rest of each list is kept as
    /// the vertex's reserve for the final phase.
    pub fn new_with_lists(graph: &Hypergraph, params: &EngineParams, lists: &[Vec<u32>]) -> Result<Self> {
        let q = params.q;
        if lists.len() != graph.num_vertices() {
            return Err(Error::InvalidParameter(format!(
                "{} lists for {} vertices",
                lists.len(),
                graph.num_vertices()
            )));
        }
        let mut chosen = Vec::with_capacity(lists.len());
        let mut reserve = Vec::with_capacity(lists.len());
        for (v, l) in lists.iter().enumerate() {
            let mut l = l.clone();
            l.sort_unstable();
            l.dedup();
            if l.len() < 2 * q {
                return Err(Error::InvalidParameter(format!(
                    "vertex {v} has {} available colors, needs {}",
                    l.len(),
                    2 * q
                )));
            }
            reserve.push(l.split_off(q));
            chosen.push(l);
        }
        let mut palette: Vec<u32> = chosen.iter().flatten().copied().collect();
        palette.sort_unstable();
        palette.dedup();
        let width = palette.len();
        let mut p = vec![0.0; graph.num_vertices() * width];
        for (v, b) in chosen.iter().enumerate() {
            for c in b {
                let idx = palette.binary_search(c).unwrap();
                p[v * width + idx] = 1.0 / q as f64;
            }
        }
        Self::build(graph, params, palette, p, Some(reserve))
    }

    fn build(
        graph: &Hypergraph,
        params: &EngineParams,
        palette: Vec<u32>,
        p: Vec<f64>,
        reserve: Option<Vec<Vec<u32>>>,
    ) -> Result<Self> {
        params.validate()?;
        if params.k != graph.k() {
            return Err(Error::InvalidParameter(format!(
                "parameters are for k = {}, hypergraph has k = {}",
                params.k,
                graph.k()
            )));
        }
        graph.ensure_simple()?;
        if let Some(t) = graph.find_triangles(1)?.first() {
            return Err(Error::HasTriangle(t[0], t[1], t[2]));
        }
        if 1.0 / (params.q as f64) > params.p_hat {
            return Err(Error::InvalidParameter(format!(
                "p_hat = {} is below the initial probability 1/q = {}",
                params.p_hat,
                1.0 / params.q as f64
            )));
        }
        let n = graph.num_vertices();
        let width = palette.len();
        let mut state = ColoringState {
            graph: graph.clone(),
            params: params.clone(),
            palette,
            t: 0,
            uncolored: vec![true; n],
            kappa: vec![None; n],
            colored_at: vec![None; n],
            p,
            lost: vec![false; n * width],
            active: Vec::new(),
            active_inc: vec![Vec::new(); n],
            restrictions: Vec::new(),
            restr_inc: vec![Vec::new(); n],
            initial_entropy: Vec::new(),
            initial_xi: Vec::new(),
            reserve,
        };
        state.rebuild()?;
        state.initial_entropy = (0..n as u32).map(|u| telemetry::entropy(state.probs(u))).collect();
        state.initial_xi = (0..graph.num_edges()).map(|e| state.xi_edge(e)).collect();
        Ok(state)
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn params(&self) -> &EngineParams {
        &self.params
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.t
    }

    /// `|C|`.
    pub fn num_colors(&self) -> usize {
        self.palette.len()
    }

    /// Caller-visible id of working color `c`.
    pub fn label(&self, c: u32) -> u32 {
        self.palette[c as usize]
    }

    pub fn is_uncolored(&self, u: u32) -> bool {
        self.uncolored[u as usize]
    }

    pub fn uncolored_vertices(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.uncolored.len() as u32).filter(|&u| self.uncolored[u as usize])
    }

    pub fn num_uncolored(&self) -> usize {
        self.uncolored.iter().filter(|&&x| x).count()
    }

    /// Working color of `u`, if colored.
    pub fn color(&self, u: u32) -> Option<u32> {
        self.kappa[u as usize]
    }

    /// Round in which `u` received its color.
    pub fn colored_at(&self, u: u32) -> Option<usize> {
        self.colored_at[u as usize]
    }

    pub fn probs(&self, u: u32) -> &[f64] {
        let w = self.palette.len();
        &self.p[u as usize * w..(u as usize + 1) * w]
    }

    pub fn prob(&self, u: u32, c: u32) -> f64 {
        self.p[u as usize * self.palette.len() + c as usize]
    }

    /// `c ∈ A(u)`.
    pub fn is_lost(&self, u: u32, c: u32) -> bool {
        self.lost[u as usize * self.palette.len() + c as usize]
    }

    /// `c ∈ B(u)`, i.e. `p_u(c) = p̂`.
    pub fn is_capped(&self, u: u32, c: u32) -> bool {
        self.prob(u, c) == self.params.p_hat
    }

    pub fn lost_count(&self, u: u32) -> usize {
        (0..self.palette.len() as u32).filter(|&c| self.is_lost(u, c)).count()
    }

    pub fn capped_count(&self, u: u32) -> usize {
        (0..self.palette.len() as u32).filter(|&c| self.is_capped(u, c)).count()
    }

    /// Edge ids of `H^(t)`.
    pub fn active_edges(&self) -> &[u32] {
        &self.active
    }

    /// Edges of `H_2, ..., H_{k-1}`.
    pub fn restrictions(&self) -> &[Restriction] {
        &self.restrictions
    }

    pub(crate) fn active_through(&self, u: u32) -> &[u32] {
        &self.active_inc[u as usize]
    }

    pub(crate) fn restrictions_through(&self, u: u32) -> impl Iterator<Item = &Restriction> + '_ {
        self.restr_inc[u as usize]
            .iter()
            .map(|&r| &self.restrictions[r as usize])
    }

    pub fn initial_entropy(&self, u: u32) -> f64 {
        self.initial_entropy[u as usize]
    }

    /// `Ξ_e` of edge `e` at the start.
    pub fn initial_xi_edge(&self, e: usize) -> f64 {
        self.initial_xi[e]
    }

    /// Unused part of each list in list mode.
    pub fn reserve(&self) -> Option<&[Vec<u32>]> {
        self.reserve.as_deref()
    }

    /// Partial coloring in caller-visible color ids.
    pub fn partial_coloring(&self) -> Vec<Option<u32>> {
        self.kappa.iter().map(|c| c.map(|c| self.label(c))).collect()
    }

    pub(crate) fn xi_edge(&self, e: usize) -> f64 {
        let edge = self.graph.edge(e);
        (0..self.palette.len() as u32)
            .map(|c| product(edge.iter().map(|&v| self.prob(v, c))))
            .sum()
    }

    /// Overwrites `p_u` for an uncolored vertex. Entries must lie in
    /// `[0, p̂]`. Used to set up hand-built states.
    pub fn set_probabilities(&mut self, u: u32, values: &[f64]) -> Result<()> {
        if values.len() != self.palette.len() {
            return Err(Error::InvalidParameter(format!(
                "{} probabilities for a palette of {}",
                values.len(),
                self.palette.len()
            )));
        }
        if !self.is_uncolored(u) {
            return Err(Error::InvalidParameter(format!("vertex {u} is already colored")));
        }
        if let Some(x) = values.iter().find(|&&x| !(0.0..=self.params.p_hat).contains(&x)) {
            return Err(Error::InvalidParameter(format!("probability {x} outside [0, p_hat]")));
        }
        let w = self.palette.len();
        self.p[u as usize * w..(u as usize + 1) * w].copy_from_slice(values);
        Ok(())
    }

    /// Permanently colors the given vertices (working color ids) and
    /// updates the restriction hypergraphs. A vertex left as the only
    /// uncolored vertex of an edge whose other vertices share color `c`
    /// loses `c`. Used to set up hand-built states.
    pub fn precolor(&mut self, assignments: &[(u32, u32)]) -> Result<()> {
        let w = self.palette.len();
        for &(u, c) in assignments {
            if c as usize >= w || !self.is_uncolored(u) || self.is_lost(u, c) {
                return Err(Error::InvalidParameter(format!("cannot color vertex {u} with {c}")));
            }
            self.uncolored[u as usize] = false;
            self.kappa[u as usize] = Some(c);
            self.colored_at[u as usize] = Some(self.t);
        }
        for e in 0..self.graph.num_edges() {
            let edge = self.graph.edge(e);
            let open: Vec<u32> = edge.iter().copied().filter(|&v| self.uncolored[v as usize]).collect();
            if open.len() != 1 {
                continue;
            }
            let mut colors = edge.iter().filter_map(|&v| self.kappa[v as usize]);
            let first = colors.next().unwrap();
            if colors.all(|c| c == first) {
                let idx = open[0] as usize * w + first as usize;
                self.lost[idx] = true;
                self.p[idx] = 0.0;
            }
        }
        self.rebuild()
    }

    /// `q_u(c)`: the probability that `c` survives at `u` this round, i.e.
    /// the product over edges of `H^(t)` through `u` of
    /// `1 - θ^(k-1) ∏_{j≠u} p_j(c)` and over color-`c` edges of `H_i` through
    /// `u` of `1 - θ^(i-1) ∏_{j≠u} p_j(c)`.
    pub fn q_u(&self, u: u32, c: u32) -> f64 {
        let theta = self.params.theta;
        let mut q = 1.0;
        for &e in self.active_through(u) {
            let others = self.graph.edge(e as usize).iter().filter(|&&v| v != u);
            let prod = product(others.map(|&v| self.prob(v, c)));
            q *= 1.0 - theta.powi(self.graph.k() as i32 - 1) * prod;
        }
        for r in self.restrictions_through(u).filter(|r| r.color == c) {
            let prod = product(r.members.iter().filter(|&&v| v != u).map(|&v| self.prob(v, c)));
            q *= 1.0 - theta.powi(r.members.len() as i32 - 1) * prod;
        }
        q
    }

    /// The union-bound floor `1 - θ^(k-1) Ξ_u(c) - Σ_i θ^(i-1) Φ_{u,i}(c)`
    /// that `q_u(c)` never falls below.
    pub fn q_u_lower_bound(&self, u: u32, c: u32) -> f64 {
        let theta = self.params.theta;
        let xi: f64 = self
            .active_through(u)
            .iter()
            .map(|&e| {
                product(
                    self.graph
                        .edge(e as usize)
                        .iter()
                        .filter(|&&v| v != u)
                        .map(|&v| self.prob(v, c)),
                )
            })
            .sum();
        let phi: f64 = self
            .restrictions_through(u)
            .filter(|r| r.color == c)
            .map(|r| {
                theta.powi(r.members.len() as i32 - 1)
                    * product(r.members.iter().filter(|&&v| v != u).map(|&v| self.prob(v, c)))
            })
            .sum();
        1.0 - theta.powi(self.graph.k() as i32 - 1) * xi - phi
    }

    /// Draws the tentative activations `γ` and the coins `η` for the current
    /// round and derives `Θ`, `L` and `Ψ`. Nothing is committed. Draws for
    /// `(round, attempt, u)` come from their own stream of `seed`.
    pub fn draw_round(&self, seed: u64, attempt: usize) -> RoundScratch {
        let n = self.graph.num_vertices();
        let w = self.palette.len();
        let theta = self.params.theta;
        let p_hat = self.params.p_hat;
        let mut activated = vec![Vec::new(); n];
        let mut eta = vec![false; n * w];
        for u in self.uncolored_vertices() {
            let mut rng = rng::stream(seed, Domain::Activation, round_key(self.t, attempt, u));
            for c in 0..w {
                let pu = self.p[u as usize * w + c];
                let g: f64 = rng.random();
                let h: f64 = rng.random();
                if g < theta * pu {
                    activated[u as usize].push(c as u32);
                }
                eta[u as usize * w + c] = h < pu / p_hat;
            }
        }

        let mut lost: Vec<Vec<u32>> = vec![Vec::new(); n];
        let is_on = |v: u32, c: u32| activated[v as usize].binary_search(&c).is_ok();
        let clash = |members: &[u32], c: u32, lost: &mut Vec<Vec<u32>>| {
            let off: Vec<u32> = members.iter().copied().filter(|&v| !is_on(v, c)).collect();
            match off.len() {
                0 => members.iter().for_each(|&v| lost[v as usize].push(c)),
                1 => lost[off[0] as usize].push(c),
                _ => {}
            }
        };
        for &e in &self.active {
            let members = self.graph.edge(e as usize);
            // a color on all but one member is on one of any two members
            let mut cand: Vec<u32> = activated[members[0] as usize]
                .iter()
                .chain(&activated[members[1] as usize])
                .copied()
                .collect();
            cand.sort_unstable();
            cand.dedup();
            for c in cand {
                clash(members, c, &mut lost);
            }
        }
        for r in &self.restrictions {
            clash(&r.members, r.color, &mut lost);
        }
        for l in lost.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }

        let mut usable = vec![Vec::new(); n];
        let mut chosen = vec![None; n];
        for u in self.uncolored_vertices() {
            let ui = u as usize;
            usable[ui] = activated[ui]
                .iter()
                .copied()
                .filter(|&c| !self.is_lost(u, c) && lost[ui].binary_search(&c).is_err() && !self.is_capped(u, c))
                .collect();
            chosen[ui] = usable[ui].first().copied();
        }
        RoundScratch {
            activated,
            eta,
            lost,
            usable,
            chosen,
        }
    }

    /// `p'` for every vertex: colors already in `A(u)` keep their value;
    /// otherwise Case A (`p/q_u(c) < p̂`) gives `0` on a loss and `p/q_u(c)`
    /// else, and Case B gives `η p̂`. Vertices colored before this round
    /// keep their frozen vectors.
    pub fn next_probabilities(&self, scratch: &RoundScratch) -> Result<Vec<f64>> {
        let w = self.palette.len();
        let p_hat = self.params.p_hat;
        let mut next = self.p.clone();
        for u in self.uncolored_vertices() {
            let ui = u as usize;
            for c in 0..w as u32 {
                let idx = ui * w + c as usize;
                if self.lost[idx] {
                    continue;
                }
                let q = self.q_u(u, c);
                if q.is_nan() || q <= 0.0 {
                    return Err(Error::Invariant(format!("q_u(c) = {q} at u = {u}, c = {c}")));
                }
                let ratio = self.p[idx] / q;
                next[idx] = if ratio < p_hat {
                    if scratch.lost[ui].binary_search(&c).is_ok() {
                        0.0
                    } else {
                        ratio
                    }
                } else if scratch.eta[idx] {
                    p_hat
                } else {
                    0.0
                };
            }
        }
        Ok(next)
    }

    /// Commits a drawn round: merges `L` into `A`, installs `p'`, assigns
    /// the chosen colors and rebuilds `H^(t+1)` and the `H_i`. Fails if a
    /// fully colored edge became monochromatic.
    pub fn commit(&mut self, scratch: &RoundScratch, next_p: Vec<f64>) -> Result<()> {
        let w = self.palette.len();
        let uncolored: Vec<u32> = self.uncolored_vertices().collect();
        for &u in &uncolored {
            for &c in &scratch.lost[u as usize] {
                self.lost[u as usize * w + c as usize] = true;
            }
        }
        self.p = next_p;
        for &u in &uncolored {
            if let Some(c) = scratch.chosen[u as usize] {
                self.kappa[u as usize] = Some(c);
                self.uncolored[u as usize] = false;
                self.colored_at[u as usize] = Some(self.t);
            }
        }
        self.t += 1;
        self.rebuild()
    }

    /// One full round with the engine's own seed. With
    /// `resample_on_breach`, a round whose telemetry fails an invariant flag
    /// is re-drawn (up to `max_round_retries` times) and the last draw kept.
    pub fn run_round(&mut self) -> Result<TelemetrySnapshot> {
        let attempts = if self.params.resample_on_breach {
            self.params.max_round_retries + 1
        } else {
            1
        };
        let mut last = None;
        for attempt in 0..attempts {
            let scratch = self.draw_round(self.params.seed, attempt);
            let next = self.next_probabilities(&scratch)?;
            let mut trial = self.clone();
            trial.commit(&scratch, next)?;
            let snapshot = telemetry::snapshot(&trial);
            let breach = attempt + 1 < attempts && !telemetry::flags(&trial).iter().all(|f| f.pass);
            last = Some((trial, snapshot));
            if !breach {
                break;
            }
        }
        let (trial, snapshot) = last.expect("at least one attempt");
        *self = trial;
        Ok(snapshot)
    }

    // Derives H^(t) and the H_i from the current coloring, checking that no
    // fully colored edge is monochromatic and that a lone uncolored vertex of
    // an otherwise one-colored edge has lost that color.
    fn rebuild(&mut self) -> Result<()> {
        let k = self.graph.k();
        let w = self.palette.len();
        self.active.clear();
        self.restrictions.clear();
        self.active_inc.iter_mut().for_each(Vec::clear);
        self.restr_inc.iter_mut().for_each(Vec::clear);
        let mut seen: HashMap<Vec<u32>, u32> = HashMap::new();
        for e in 0..self.graph.num_edges() {
            let edge = self.graph.edge(e);
            let open: Vec<u32> = edge.iter().copied().filter(|&v| self.uncolored[v as usize]).collect();
            if open.len() == k {
                self.active.push(e as u32);
                for &v in edge {
                    self.active_inc[v as usize].push(e as u32);
                }
                continue;
            }
            let mut colors = edge.iter().filter_map(|&v| self.kappa[v as usize]);
            let color = colors.next().unwrap();
            if !colors.all(|c| c == color) {
                continue;
            }
            match open.len() {
                0 => {
                    return Err(Error::Invariant(format!(
                        "edge {e} {:?} is monochromatic in color {}",
                        edge,
                        self.label(color)
                    )))
                }
                1 => {
                    if !self.lost[open[0] as usize * w + color as usize] {
                        return Err(Error::Invariant(format!(
                            "vertex {} can still take color {} which would complete edge {e}",
                            open[0],
                            self.label(color)
                        )));
                    }
                }
                _ => {
                    if let Some(&other) = seen.get(&open) {
                        return Err(Error::Invariant(format!(
                            "restriction {:?} arises from edges {other} and {e}",
                            open
                        )));
                    }
                    seen.insert(open.clone(), e as u32);
                    let id = self.restrictions.len() as u32;
                    for &v in &open {
                        self.restr_inc[v as usize].push(id);
                    }
                    self.restrictions.push(Restriction {
                        edge: e as u32,
                        color,
                        members: open,
                    });
                }
            }
        }
        Ok(())
    }
}

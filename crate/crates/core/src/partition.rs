//! Random vertex partitions with per-part certificates.
//!
//! Both partitioners draw a uniform part for every vertex, look for vertices
//! whose part violates the degree or covered-pair bound, and re-draw the
//! parts of every vertex within distance two of a violator until no violator
//! is left or the round cap is reached. A run that stalls for
//! `restart_after` rounds is restarted from a fresh draw. The best partition
//! seen is returned with `certified = false` when the cap is hit.
//!
//! [`triangle_free_refine`] splits one part further, through a proper
//! coloring of the graph underlying the covered-pair digraph, into classes
//! that induce triangle-free hypergraphs.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma1Config {
    /// Part count; `None` means `ceil(Δ^(2/(3k-4) - ε))`.
    pub parts: Option<usize>,
    pub epsilon: f64,
    /// Degree bound is `degree_factor * Δ / m^(k-1)`.
    pub degree_factor: f64,
    /// Covered-pair bound is `covered_factor * Δ² / m^(3k-4)`; `None` means `k²`.
    pub covered_factor: Option<f64>,
    pub max_rounds: usize,
    pub restart_after: usize,
    pub seed: u64,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Lemma1Config {
            parts: None,
            epsilon: 0.05,
            degree_factor: 2.0,
            covered_factor: None,
            max_rounds: 50,
            restart_after: 10,
            seed: 0,
        }
    }
}

impl Lemma1Config {
    pub fn part_count(&self, k: usize, max_degree: usize) -> usize {
        self.parts.unwrap_or_else(|| {
            let expo = 2.0 / (3.0 * k as f64 - 4.0) - self.epsilon;
            ((max_degree.max(1) as f64).powf(expo).ceil() as usize).max(1)
        })
    }

    pub fn bounds(&self, k: usize, max_degree: usize) -> PartitionBounds {
        let m = self.part_count(k, max_degree) as f64;
        let d = max_degree as f64;
        let kf = k as f64;
        PartitionBounds {
            max_degree: self.degree_factor * d / m.powi(k as i32 - 1),
            max_covered_pairs: self.covered_factor.unwrap_or(kf * kf) * d * d / m.powi(3 * k as i32 - 4),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.parts == Some(0) {
            return Err(Error::InvalidParameter("part count must be at least 1".into()));
        }
        if self.degree_factor <= 0.0 || self.covered_factor.is_some_and(|f| f <= 0.0) {
            return Err(Error::InvalidParameter("bound factors must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lemma2Config {
    /// Part count; `None` means `ceil(d^(1/(k-1) - δ))`.
    pub parts: Option<usize>,
    pub delta: f64,
    /// Degree bound is `degree_factor * d / ℓ^(k-1)`.
    pub degree_factor: f64,
    /// A vertex violates once its part holds this many covered pairs at it;
    /// `None` means `200 k²`.
    pub covered_cap: Option<usize>,
    pub max_rounds: usize,
    pub restart_after: usize,
    pub seed: u64,
}

impl Default for Lemma2Config {
    fn default() -> Self {
        Lemma2Config {
            parts: None,
            delta: 0.1,
            degree_factor: 2.0,
            covered_cap: None,
            max_rounds: 50,
            restart_after: 10,
            seed: 0,
        }
    }
}

impl Lemma2Config {
    pub fn part_count(&self, k: usize, max_degree: usize) -> usize {
        self.parts.unwrap_or_else(|| {
            let expo = 1.0 / (k as f64 - 1.0) - self.delta;
            ((max_degree.max(1) as f64).powf(expo).ceil() as usize).max(1)
        })
    }

    pub fn bounds(&self, k: usize, max_degree: usize) -> PartitionBounds {
        let l = self.part_count(k, max_degree) as f64;
        let cap = self.covered_cap.unwrap_or(200 * k * k);
        PartitionBounds {
            max_degree: self.degree_factor * max_degree as f64 / l.powi(k as i32 - 1),
            max_covered_pairs: cap.saturating_sub(1) as f64,
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.parts == Some(0) {
            return Err(Error::InvalidParameter("part count must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0 / (k as f64 - 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "delta {} outside (0, 1/(k-1))",
                self.delta
            )));
        }
        if self.degree_factor <= 0.0 {
            return Err(Error::InvalidParameter("degree factor must be positive".into()));
        }
        Ok(())
    }
}

/// Per-vertex limits a partition is certified against (both inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionBounds {
    pub max_degree: f64,
    pub max_covered_pairs: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartStats {
    pub part: usize,
    pub vertices: Vec<u32>,
    pub max_degree: usize,
    pub max_covered_pairs: usize,
    pub triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    /// Vertex -> part id.
    pub assignment: Vec<u32>,
    pub parts: Vec<PartStats>,
    pub bounds: PartitionBounds,
    /// Resample rounds performed after the initial draw.
    pub rounds: usize,
    pub certified: bool,
}

impl PartitionResult {
    /// One JSON record per part.
    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for p in &self.parts {
            serde_json::to_writer(&mut out, p).map_err(|e| Error::Io(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Random partition into `m` parts certified against the degree bound
/// `2Δ/m^(k-1)` and the covered-pair bound `k²Δ²/m^(3k-4)` (both scaled by
/// the configured factors).
pub fn lemma1_partition(h: &Hypergraph, cfg: &Lemma1Config) -> Result<PartitionResult> {
    h.ensure_simple()?;
    cfg.validate()?;
    let delta = h.max_degree();
    let m = cfg.part_count(h.k(), delta);
    let bounds = cfg.bounds(h.k(), delta);
    Ok(resample_partition(
        h,
        m,
        bounds,
        cfg.max_rounds,
        cfg.restart_after,
        cfg.seed,
    ))
}

/// Random partition into `ℓ` parts certified against the degree bound
/// `2d/ℓ^(k-1)` and fewer than `200k²` covered pairs per neighborhood.
pub fn lemma2_partition(h: &Hypergraph, cfg: &Lemma2Config) -> Result<PartitionResult> {
    h.ensure_simple()?;
    cfg.validate(h.k())?;
    let d = h.max_degree();
    let l = cfg.part_count(h.k(), d);
    let bounds = cfg.bounds(h.k(), d);
    Ok(resample_partition(
        h,
        l,
        bounds,
        cfg.max_rounds,
        cfg.restart_after,
        cfg.seed,
    ))
}

fn resample_partition(
    h: &Hypergraph,
    parts: usize,
    bounds: PartitionBounds,
    max_rounds: usize,
    restart_after: usize,
    seed: u64,
) -> PartitionResult {
    let n = h.num_vertices();
    let mut rng = rng::stream(seed, Domain::Partition, 0);
    let mut assignment: Vec<u32> = (0..n).map(|_| rng.random_range(0..parts as u32)).collect();
    let mut violators = find_violators(h, &assignment, parts, &bounds);
    let mut best = (violators.len(), assignment.clone());
    let mut stalled = 0usize;
    let mut rounds = 0usize;
    let mut in_ball = vec![false; n];

    while !violators.is_empty() && rounds < max_rounds {
        rounds += 1;
        let mut rng = rng::stream(seed, Domain::Partition, rounds as u64);
        if restart_after > 0 && stalled >= restart_after {
            for a in assignment.iter_mut() {
                *a = rng.random_range(0..parts as u32);
            }
            stalled = 0;
        } else {
            for &v in &violators {
                in_ball[v as usize] = true;
                for &e in h.incident(v) {
                    for &x in h.edge(e as usize) {
                        in_ball[x as usize] = true;
                        for &f in h.incident(x) {
                            for &y in h.edge(f as usize) {
                                in_ball[y as usize] = true;
                            }
                        }
                    }
                }
            }
            for (v, flag) in in_ball.iter_mut().enumerate() {
                if std::mem::take(flag) {
                    assignment[v] = rng.random_range(0..parts as u32);
                }
            }
        }
        violators = find_violators(h, &assignment, parts, &bounds);
        if violators.len() < best.0 {
            best = (violators.len(), assignment.clone());
            stalled = 0;
        } else {
            stalled += 1;
        }
    }

    let assignment = if violators.is_empty() { assignment } else { best.1 };
    let parts_stats = part_stats(h, &assignment, parts);
    PartitionResult {
        certified: best.0 == 0 || violators.is_empty(),
        assignment,
        parts: parts_stats,
        bounds,
        rounds,
    }
}

fn split(assignment: &[u32], parts: usize) -> Vec<Vec<u32>> {
    let mut groups = vec![Vec::new(); parts];
    for (v, &p) in assignment.iter().enumerate() {
        groups[p as usize].push(v as u32);
    }
    groups
}

// Vertices whose induced part exceeds a bound, ascending.
fn find_violators(h: &Hypergraph, assignment: &[u32], parts: usize, bounds: &PartitionBounds) -> Vec<u32> {
    let mut out = Vec::new();
    for group in split(assignment, parts) {
        let sub = h.induced(&group).expect("part vertices are in range");
        let g = &sub.graph;
        let mut mark = vec![false; g.num_vertices()];
        for v in 0..g.num_vertices() as u32 {
            let deg = g.incident(v).len() as f64;
            if deg > bounds.max_degree || g.covered_pair_count(v, &mut mark) as f64 > bounds.max_covered_pairs {
                out.push(sub.to_parent[v as usize]);
            }
        }
    }
    out.sort_unstable();
    out
}

fn part_stats(h: &Hypergraph, assignment: &[u32], parts: usize) -> Vec<PartStats> {
    split(assignment, parts)
        .into_iter()
        .enumerate()
        .map(|(part, vertices)| {
            let g = h.induced(&vertices).expect("part vertices are in range").graph;
            let mut mark = vec![false; g.num_vertices()];
            let max_covered_pairs = (0..g.num_vertices() as u32)
                .map(|v| g.covered_pair_count(v, &mut mark))
                .max()
                .unwrap_or(0);
            PartStats {
                part,
                max_degree: g.max_degree(),
                max_covered_pairs,
                triangles: g.find_triangles(usize::MAX).map(|t| t.len()).unwrap_or(0),
                vertices,
            }
        })
        .collect()
}

/// Outcome of [`check_partition`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PartitionCheck {
    /// Reported statistics equal the recomputed ones.
    pub consistent: bool,
    /// Every part satisfies the bounds.
    pub within_bounds: bool,
    pub problems: Vec<String>,
}

impl PartitionCheck {
    pub fn passed(&self) -> bool {
        self.consistent && self.within_bounds
    }
}

/// Recomputes every statistic of `result` from scratch and compares it,
/// field by field, with what was reported; then checks the bounds.
pub fn check_partition(h: &Hypergraph, result: &PartitionResult, bounds: &PartitionBounds) -> PartitionCheck {
    let mut problems = Vec::new();
    let n = h.num_vertices();
    let parts = result.parts.len();
    if result.assignment.len() != n {
        problems.push(format!("assignment covers {} of {n} vertices", result.assignment.len()));
    }
    if let Some(v) = result.assignment.iter().position(|&p| p as usize >= parts) {
        problems.push(format!("vertex {v} assigned to missing part {}", result.assignment[v]));
    }
    if !problems.is_empty() {
        return PartitionCheck {
            consistent: false,
            within_bounds: false,
            problems,
        };
    }
    let fresh = part_stats(h, &result.assignment, parts);
    let mut consistent = true;
    for (got, want) in result.parts.iter().zip(&fresh) {
        if got != want {
            consistent = false;
            problems.push(format!(
                "part {} stats {:?} differ from recomputed {:?}",
                want.part, got, want
            ));
        }
    }
    let mut within_bounds = true;
    for p in &fresh {
        if p.max_degree as f64 > bounds.max_degree {
            within_bounds = false;
            problems.push(format!(
                "part {} max degree {} > {}",
                p.part, p.max_degree, bounds.max_degree
            ));
        }
        if p.max_covered_pairs as f64 > bounds.max_covered_pairs {
            within_bounds = false;
            problems.push(format!(
                "part {} has {} covered pairs at a vertex > {}",
                p.part, p.max_covered_pairs, bounds.max_covered_pairs
            ));
        }
    }
    PartitionCheck {
        consistent,
        within_bounds,
        problems,
    }
}

/// Classes produced by [`triangle_free_refine`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Refinement {
    /// Vertex classes, each inducing a triangle-free hypergraph.
    pub classes: Vec<Vec<u32>>,
    /// Largest out-degree in the covered-pair digraph.
    pub max_out_degree: usize,
    /// Degeneracy of its underlying graph.
    pub degeneracy: usize,
}

/// Splits a simple hypergraph into triangle-free classes. Every vertex `v`
/// gets an arc to both ends of every covered pair at `v`; the underlying graph
/// is colored greedily along a smallest-last order and the color classes
/// are returned.
pub fn triangle_free_refine(h: &Hypergraph) -> Result<Refinement> {
    h.ensure_simple()?;
    let n = h.num_vertices();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut max_out_degree = 0;
    for v in 0..n as u32 {
        let mut out: Vec<u32> = h
            .covered_pairs_unchecked(v)
            .pairs
            .iter()
            .flat_map(|&(x, y, _)| [x, y])
            .collect();
        out.sort_unstable();
        out.dedup();
        max_out_degree = max_out_degree.max(out.len());
        for &x in &out {
            adj[v as usize].push(x);
            adj[x as usize].push(v);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let (order, degeneracy) = smallest_last_order(&adj);
    let colors = greedy_color(&adj, &order);
    let count = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut classes = vec![Vec::new(); count];
    for (v, &c) in colors.iter().enumerate() {
        classes[c as usize].push(v as u32);
    }
    for class in &classes {
        let sub = h.induced(class)?;
        if let Some(t) = sub.graph.find_triangles(1)?.first() {
            return Err(Error::Invariant(format!(
                "class of {} vertices still contains triangle {:?}",
                class.len(),
                t
            )));
        }
    }
    if classes.len() > 2 * max_out_degree + 1 {
        return Err(Error::Invariant(format!(
            "{} classes exceed 2 * {max_out_degree} + 1",
            classes.len()
        )));
    }
    Ok(Refinement {
        classes,
        max_out_degree,
        degeneracy,
    })
}

/// Smallest-last vertex order (the reverse of repeatedly deleting a vertex of
/// minimum remaining degree) and the degeneracy it certifies. Ties go to the
/// smallest vertex id.
pub fn smallest_last_order(adj: &[Vec<u32>]) -> (Vec<u32>, usize) {
    let n = adj.len();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let maxd = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<std::collections::BTreeSet<u32>> = vec![Default::default(); maxd + 1];
    for v in 0..n {
        buckets[deg[v]].insert(v as u32);
    }
    let mut removed = vec![false; n];
    let mut removal = Vec::with_capacity(n);
    let mut degeneracy = 0;
    let mut low = 0;
    for _ in 0..n {
        low = low.min(maxd);
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop_first().unwrap();
        degeneracy = degeneracy.max(low);
        removed[v as usize] = true;
        removal.push(v);
        for &u in &adj[v as usize] {
            if !removed[u as usize] {
                let d = deg[u as usize];
                buckets[d].remove(&u);
                deg[u as usize] = d - 1;
                buckets[d - 1].insert(u);
                low = low.min(d - 1);
            }
        }
    }
    removal.reverse();
    (removal, degeneracy)
}

/// Smallest available color along `order`.
pub fn greedy_color(adj: &[Vec<u32>], order: &[u32]) -> Vec<u32> {
    let mut color = vec![u32::MAX; adj.len()];
    let mut taken: Vec<bool> = Vec::new();
    for &v in order {
        taken.clear();
        taken.resize(adj[v as usize].len() + 1, false);
        for &u in &adj[v as usize] {
            let c = color[u as usize] as usize;
            if c < taken.len() {
                taken[c] = true;
            }
        }
        color[v as usize] = taken.iter().position(|&t| !t).unwrap() as u32;
    }
    color
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{fixture, gen_simple, GenSpec};

    #[test]
    fn single_part_is_identity() {
        let h = gen_simple(&GenSpec::new(3, 40, 4, 1)).unwrap().graph;
        let cfg = Lemma1Config {
            parts: Some(1),
            degree_factor: 1.0,
            covered_factor: Some(1e9),
            ..Default::default()
        };
        let r = lemma1_partition(&h, &cfg).unwrap();
        assert!(r.assignment.iter().all(|&p| p == 0));
        assert_eq!(r.parts[0].max_degree, h.max_degree());
        assert!(check_partition(&h, &r, &r.bounds).passed());
    }

    #[test]
    fn many_parts_leave_parts_edgeless() {
        let h = fixture("fano").unwrap();
        // Near-zero bounds force resampling until every part is edgeless.
        let cfg = Lemma1Config {
            parts: Some(500),
            degree_factor: 1e-12,
            ..Default::default()
        };
        let r = lemma1_partition(&h, &cfg).unwrap();
        assert!(r.certified);
        assert!(r.parts.iter().all(|p| p.max_degree == 0));
        assert!(check_partition(&h, &r, &r.bounds).passed());
    }

    #[test]
    fn lemma2_on_loose_cycle() {
        let h = fixture("loose_cycle(3,3)").unwrap();
        for seed in 0..8 {
            let cfg = Lemma2Config {
                parts: Some(2),
                seed,
                ..Default::default()
            };
            let r = lemma2_partition(&h, &cfg).unwrap();
            let check = check_partition(&h, &r, &r.bounds);
            assert!(check.consistent, "{:?}", check.problems);
            if r.certified {
                assert!(check.within_bounds);
            }
        }
    }

    #[test]
    fn lemma2_single_part_counts_actual_pairs() {
        let h = fixture("sunflower(4,3)").unwrap();
        let r = lemma2_partition(
            &h,
            &Lemma2Config {
                parts: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.parts.len(), 1);
        assert_eq!(r.parts[0].max_covered_pairs, 0);
        assert!(r.certified);
    }

    #[test]
    fn lemma2_rejects_bad_delta() {
        let h = fixture("fano").unwrap();
        let cfg = Lemma2Config {
            delta: 0.5,
            ..Default::default()
        };
        assert!(lemma2_partition(&h, &cfg).is_err());
    }

    #[test]
    fn tampered_stats_are_flagged() {
        let h = fixture("fano").unwrap();
        let mut r = lemma1_partition(
            &h,
            &Lemma1Config {
                parts: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        r.parts[0].max_degree += 1;
        let check = check_partition(&h, &r, &r.bounds);
        assert!(!check.consistent);
        let mut r2 = r.clone();
        r2.assignment.pop();
        assert!(!check_partition(&h, &r2, &r2.bounds).passed());
    }

    #[test]
    fn empty_hypergraph_passes() {
        let h = Hypergraph::empty(3, 0).unwrap();
        let r = lemma1_partition(&h, &Lemma1Config::default()).unwrap();
        assert!(r.certified);
        assert!(check_partition(&h, &r, &r.bounds).passed());
    }

    #[test]
    fn refine_loose_cycle() {
        let h = fixture("loose_cycle(3,3)").unwrap();
        let r = triangle_free_refine(&h).unwrap();
        assert!(r.classes.len() >= 2);
        assert!(r.classes.len() <= 2 * r.max_out_degree + 1);
        for c in &r.classes {
            assert!(h.induced(c).unwrap().graph.find_triangles(10).unwrap().is_empty());
        }
    }

    #[test]
    fn refine_triangle_free_and_edgeless() {
        let h = fixture("sunflower(3,3)").unwrap();
        let r = triangle_free_refine(&h).unwrap();
        assert_eq!(r.classes.len(), 1);
        assert_eq!(r.max_out_degree, 0);
        let e = Hypergraph::empty(3, 5).unwrap();
        assert_eq!(triangle_free_refine(&e).unwrap().classes, vec![vec![0, 1, 2, 3, 4]]);
        let bad = Hypergraph::new(3, 4, [[0u32, 1, 2], [0, 1, 3]]).unwrap();
        assert!(triangle_free_refine(&bad).is_err());
    }

    #[test]
    fn smallest_last_on_a_path_and_clique() {
        let path = vec![vec![1], vec![0, 2], vec![1]];
        assert_eq!(smallest_last_order(&path).1, 1);
        let k4: Vec<Vec<u32>> = (0..4u32).map(|v| (0..4).filter(|&u| u != v).collect()).collect();
        let (order, d) = smallest_last_order(&k4);
        assert_eq!(d, 3);
        let colors = greedy_color(&k4, &order);
        let mut sorted = colors.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3]);
    }

    #[test]
    fn jsonl_one_record_per_part() {
        let h = fixture("fano").unwrap();
        let r = lemma1_partition(
            &h,
            &Lemma1Config {
                parts: Some(3),
                ..Default::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let first: PartStats = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first, r.parts[0]);
    }
}

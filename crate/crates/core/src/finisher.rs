//! Resampling colorer for the sparse hypergraph left after the nibble.
//!
//! Start from a uniformly random coloring; while some edge is
//! monochromatic, re-draw the colors of the lexicographically least such
//! edge. When every edge shares vertices with few others this terminates
//! quickly; the cap turns an infeasible palette into an error.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Coloring, Hypergraph};
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinisherConfig {
    pub palette: u32,
    /// Resamples allowed before giving up; `None` means `1000 |E|`.
    pub cap: Option<u64>,
    pub seed: u64,
}

impl FinisherConfig {
    /// Palette `ceil(4 Δ'^(1/(k-1))) + 1` for the given hypergraph.
    pub fn for_graph(h: &Hypergraph, seed: u64) -> Self {
        FinisherConfig {
            palette: local_lemma_palette(h.k(), h.max_degree()),
            cap: None,
            seed,
        }
    }

    pub fn cap_for(&self, h: &Hypergraph) -> u64 {
        self.cap.unwrap_or(1000 * h.num_edges() as u64)
    }
}

/// `ceil(4 Δ^(1/(k-1))) + 1`, computed exactly: the smallest `m` with
/// `m^(k-1) >= 4^(k-1) Δ`, plus one.
pub fn local_lemma_palette(k: usize, max_degree: usize) -> u32 {
    if max_degree == 0 || k < 2 {
        return 1;
    }
    let e = (k - 1) as u32;
    let target = 4u128.saturating_pow(e).saturating_mul(max_degree as u128);
    let pow = |m: u128| m.checked_pow(e).unwrap_or(u128::MAX);
    // floating guess, then correct by stepping
    let mut m = (4.0 * (max_degree as f64).powf(1.0 / e as f64)).ceil() as u128;
    while m > 0 && pow(m - 1) >= target {
        m -= 1;
    }
    while pow(m) < target {
        m += 1;
    }
    (m + 1).min(u32::MAX as u128) as u32
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finished {
    pub coloring: Coloring,
    pub resamples: u64,
}

/// Proper coloring of `h` with `config.palette` colors by resampling.
pub fn moser_tardos_color(h: &Hypergraph, config: &FinisherConfig) -> Result<Finished> {
    if config.palette == 0 {
        return Err(Error::InvalidParameter("palette must be positive".into()));
    }
    let all: Vec<u32> = (0..config.palette).collect();
    let lists = vec![all; h.num_vertices()];
    let fixed = vec![None; h.num_vertices()];
    let (colors, resamples) = resample(h, &lists, &fixed, config.cap_for(h), config.seed)?;
    Ok(Finished {
        coloring: Coloring::from_colors(colors, config.palette)?,
        resamples,
    })
}

/// Extends `fixed` to a proper coloring in which each free vertex `v`
/// takes a color from `lists[v]`. Only free vertices are re-drawn; an edge
/// that is monochromatic on fixed vertices alone is an error.
pub fn moser_tardos_extend(
    h: &Hypergraph,
    lists: &[Vec<u32>],
    fixed: &[Option<u32>],
    cap: u64,
    seed: u64,
) -> Result<(Vec<u32>, u64)> {
    let n = h.num_vertices();
    if lists.len() != n || fixed.len() != n {
        return Err(Error::InvalidParameter(
            "one list and one slot per vertex expected".into(),
        ));
    }
    if let Some(v) = (0..n).find(|&v| fixed[v].is_none() && lists[v].is_empty()) {
        return Err(Error::InvalidParameter(format!("vertex {v} has an empty list")));
    }
    resample(h, lists, fixed, cap, seed)
}

fn resample(h: &Hypergraph, lists: &[Vec<u32>], fixed: &[Option<u32>], cap: u64, seed: u64) -> Result<(Vec<u32>, u64)> {
    let mut rng = rng::stream(seed, Domain::Finisher, 0);
    let mut colors: Vec<u32> = (0..h.num_vertices())
        .map(|v| fixed[v].unwrap_or_else(|| lists[v][rng.random_range(0..lists[v].len())]))
        .collect();
    let mono = |colors: &[u32], e: usize| {
        let edge = h.edge(e);
        edge.iter().all(|&v| colors[v as usize] == colors[edge[0] as usize])
    };
    let mut bad: BTreeSet<usize> = (0..h.num_edges()).filter(|&e| mono(&colors, e)).collect();
    let mut resamples = 0u64;
    while let Some(&e) = bad.iter().next() {
        let edge = h.edge(e);
        if edge.iter().all(|&v| fixed[v as usize].is_some()) {
            return Err(Error::Invariant(format!(
                "edge {e} {edge:?} is monochromatic on fixed vertices"
            )));
        }
        if resamples >= cap {
            return Err(Error::ResampleCapExceeded { cap, resamples });
        }
        resamples += 1;
        for &v in edge {
            if fixed[v as usize].is_none() {
                let l = &lists[v as usize];
                colors[v as usize] = l[rng.random_range(0..l.len())];
            }
        }
        for &v in edge {
            for &f in h.incident(v) {
                let f = f as usize;
                if mono(&colors, f) {
                    bad.insert(f);
                } else {
                    bad.remove(&f);
                }
            }
        }
    }
    Ok((colors, resamples))
}

/// Colors the residual hypergraph with fresh colors `offset..offset + m`,
/// `m = min(q, ceil(4 Δ'^(1/(k-1))) + 1)`, raised to 2 when the residual has
/// edges. The returned coloring's palette size is `offset + m`.
pub fn finish(residual: &Hypergraph, offset: u32, q: u32, seed: u64) -> Result<Finished> {
    let mut palette = local_lemma_palette(residual.k(), residual.max_degree()).min(q.max(1));
    if residual.num_edges() > 0 {
        palette = palette.max(2);
    }
    finish_with(residual, offset, palette, seed)
}

/// [`finish`] with an explicit palette size.
pub fn finish_with(residual: &Hypergraph, offset: u32, palette: u32, seed: u64) -> Result<Finished> {
    let cfg = FinisherConfig {
        palette,
        cap: None,
        seed,
    };
    let done = moser_tardos_color(residual, &cfg)?;
    let shifted = done.coloring.colors().iter().map(|c| c.map(|c| c + offset)).collect();
    Ok(Finished {
        coloring: Coloring::from_partial(shifted, offset + palette)?,
        resamples: done.resamples,
    })
}

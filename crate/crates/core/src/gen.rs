//! Seeded instance generators and named fixtures.
//!
//! Random instances are partial Steiner systems built by random greedy
//! packing: draw a k-set from the vertices still below the degree cap and
//! keep it unless two of its vertices already share an edge (or, for the
//! triangle-free variant, it would close a triangle).

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::{self, Domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub k: usize,
    pub n: usize,
    /// Degree cap.
    pub max_degree: usize,
    #[serde(default)]
    pub triangle_free: bool,
    /// Fraction of the degree budget `floor(n * max_degree / k)` to fill.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default)]
    pub seed: u64,
    /// Consecutive rejected draws before the generator gives up.
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
}

fn default_density() -> f64 {
    1.0
}

fn default_max_attempts() -> usize {
    2000
}

impl GenSpec {
    pub fn new(k: usize, n: usize, max_degree: usize, seed: u64) -> Self {
        GenSpec {
            k,
            n,
            max_degree,
            triangle_free: false,
            density: 1.0,
            seed,
            max_attempts: default_max_attempts(),
        }
    }

    pub fn triangle_free(mut self, yes: bool) -> Self {
        self.triangle_free = yes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::BadUniformity(self.k));
        }
        if self.max_degree < 1 {
            return Err(Error::InvalidParameter("max_degree must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(Error::InvalidParameter(format!(
                "density {} outside [0, 1]",
                self.density
            )));
        }
        if self.n < self.k {
            return Err(Error::InvalidParameter(format!(
                "n = {} is smaller than k = {}",
                self.n, self.k
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidParameter("max_attempts must be positive".into()));
        }
        Ok(())
    }

    /// Number of edges the generator aims for.
    pub fn target_edges(&self) -> usize {
        let budget = self.n * self.max_degree / self.k;
        (self.density * budget as f64).floor() as usize
    }
}

/// How far generation got relative to its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenReport {
    pub target_edges: usize,
    pub edges: usize,
    /// `target_edges - edges`; zero when the target was met.
    pub shortfall: usize,
    /// Whether fewer than half of the target edges were placed.
    pub below_half: bool,
    pub draws: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Hypergraph,
    pub report: GenReport,
}

/// Random simple k-graph with maximum degree at most `spec.max_degree`.
/// Honors `spec.triangle_free`.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    spec.validate()?;
    let GenSpec { k, n, max_degree, .. } = *spec;
    let target = spec.target_edges();
    let mut rng = rng::stream(spec.seed, Domain::Generator, 0);

    let mut pool: Vec<u32> = (0..n as u32).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut degree = vec![0usize; n];
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut stamp = vec![0u32; n];
    let mut epoch = 0u32;
    let mut failures = 0usize;
    let mut draws = 0u64;

    while edges.len() < target && pool.len() >= k && failures < spec.max_attempts {
        draws += 1;
        let mut cand: Vec<u32> = sample(&mut rng, pool.len(), k).iter().map(|i| pool[i]).collect();
        cand.sort_unstable();
        if epoch == u32::MAX {
            stamp.iter_mut().for_each(|s| *s = 0);
            epoch = 0;
        }
        epoch += 1;
        if conflicts(&cand, &neighbors, &mut stamp, epoch, spec.triangle_free) {
            failures += 1;
            continue;
        }
        failures = 0;
        for (i, &a) in cand.iter().enumerate() {
            for &b in &cand[i + 1..] {
                neighbors[a as usize].push(b);
                neighbors[b as usize].push(a);
            }
            degree[a as usize] += 1;
            if degree[a as usize] == max_degree {
                // swap-remove a saturated vertex from the pool
                let p = pos[a as usize];
                let last = *pool.last().unwrap();
                pool.swap_remove(p);
                if p < pool.len() {
                    pos[last as usize] = p;
                }
            }
        }
        edges.push(cand);
    }

    if target > 0 && edges.is_empty() {
        return Err(Error::InvalidParameter("no edge could be placed".into()));
    }
    let count = edges.len();
    Ok(Generated {
        graph: Hypergraph::new(k, n, edges)?,
        report: GenReport {
            target_edges: target,
            edges: count,
            shortfall: target - count,
            below_half: 2 * count < target,
            draws,
        },
    })
}

/// Random simple k-graph; see [`generate`].
pub fn gen_simple(spec: &GenSpec) -> Result<Generated> {
    generate(&GenSpec {
        triangle_free: false,
        ..spec.clone()
    })
}

/// Random simple triangle-free k-graph; see [`generate`].
pub fn gen_simple_triangle_free(spec: &GenSpec) -> Result<Generated> {
    generate(&GenSpec {
        triangle_free: true,
        ..spec.clone()
    })
}

// Two vertices of a candidate N already sharing an edge break simplicity.
// Otherwise N closes a triangle iff two of its vertices x != y have a
// common neighbor w: the edges xw and yw are distinct (no edge holds both x
// and y) and w lies outside N (no edge holds two vertices of N). Vertices
// stamped with `epoch` are neighbors of candidate vertices seen so far.
fn conflicts(cand: &[u32], neighbors: &[Vec<u32>], stamp: &mut [u32], epoch: u32, triangle_free: bool) -> bool {
    for &x in cand {
        if stamp[x as usize] == epoch {
            return true;
        }
        let nx = &neighbors[x as usize];
        if triangle_free && nx.iter().any(|&w| stamp[w as usize] == epoch) {
            return true;
        }
        for &w in nx {
            stamp[w as usize] = epoch;
        }
    }
    false
}

const FANO: [[u32; 3]; 7] = [
    [0, 1, 2],
    [0, 3, 4],
    [0, 5, 6],
    [1, 3, 5],
    [1, 4, 6],
    [2, 3, 6],
    [2, 4, 5],
];

/// Named fixtures: `fano`, `single_edge(k)`, `loose_cycle(i,k)`,
/// `sunflower(d,k)`.
pub fn fixture(name: &str) -> Result<Hypergraph> {
    let unknown = || Error::UnknownFixture(name.to_string());
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(p) if name.ends_with(')') => {
            let args: Vec<usize> = name[p + 1..name.len() - 1]
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| unknown())?;
            (&name[..p], args)
        }
        _ => (name, Vec::new()),
    };
    match (head, args.as_slice()) {
        ("fano", []) => Hypergraph::new(3, 7, FANO),
        ("single_edge", [k]) => Hypergraph::new(*k, *k, [(0..*k as u32).collect::<Vec<_>>()]),
        ("loose_cycle", [i, k]) => loose_cycle(*i, *k),
        ("sunflower", [d, k]) => sunflower(*d, *k),
        _ => Err(unknown()),
    }
}

/// `i` edges of size `k` arranged in a ring, consecutive edges sharing one vertex.
pub fn loose_cycle(i: usize, k: usize) -> Result<Hypergraph> {
    if i < 2 || k < 2 {
        return Err(Error::InvalidParameter("loose_cycle needs i >= 2 and k >= 2".into()));
    }
    let n = i * (k - 1);
    let edges = (0..i).map(|j| (0..k).map(|s| ((j * (k - 1) + s) % n) as u32).collect::<Vec<_>>());
    Hypergraph::new(k, n, edges)
}

/// `d` edges of size `k` through vertex 0, otherwise disjoint.
pub fn sunflower(d: usize, k: usize) -> Result<Hypergraph> {
    let n = 1 + d * (k - 1);
    let edges = (0..d).map(|j| {
        std::iter::once(0u32)
            .chain((0..k - 1).map(|s| (1 + j * (k - 1) + s) as u32))
            .collect::<Vec<_>>()
    });
    Hypergraph::new(k, n, edges)
}

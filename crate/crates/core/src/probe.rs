//! Polynomial concentration statistics, tail bounds and a small exact
//! chromatic-number oracle.
//!
//! A [`PolySystem`] is a family of subsets of a ground set whose elements
//! are independent Bernoulli variables; `Z` counts the sets whose elements
//! all succeed. [`kimvu_stats`] computes `E(Z)` and the partial-derivative
//! expectations `M_A` exactly, in whatever numeric type the system uses
//! (`f64`, or `BigRational` for exact checks).

use std::collections::BTreeSet;

use num_traits::{Num, ToPrimitive};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::rng::{self, Domain};

/// Sets larger than this are not expanded into their subsets.
const MAX_RANK: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem<P> {
    /// Element labels, ascending.
    pub ground: Vec<u32>,
    /// Success probability of `ground[i]`.
    pub prob: Vec<P>,
    /// The family; each set sorted, elements from `ground`.
    pub sets: Vec<Vec<u32>>,
}

impl<P: Clone + Num + PartialOrd> PolySystem<P> {
    /// Builds a system with the same probability on every element; the
    /// ground set is the union of the sets.
    pub fn uniform(sets: Vec<Vec<u32>>, p: P) -> Result<Self> {
        let mut sets = sets;
        for s in sets.iter_mut() {
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("set {s:?} repeats an element")));
            }
        }
        if !(P::zero() <= p && p <= P::one()) {
            return Err(Error::InvalidParameter("probability outside [0, 1]".into()));
        }
        let ground: Vec<u32> = sets
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let prob = vec![p; ground.len()];
        Ok(PolySystem { ground, prob, sets })
    }

    /// Largest set size.
    pub fn rank(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    fn p(&self, x: u32) -> P {
        match self.ground.binary_search(&x) {
            Ok(i) => self.prob[i].clone(),
            Err(_) => P::zero(),
        }
    }

    /// `M_A = Σ_{f ⊇ A} ∏_{i ∈ f \ A} p_i`. `A` must be sorted.
    pub fn m_a(&self, a: &[u32]) -> P {
        let mut total = P::zero();
        for f in &self.sets {
            if contains_sorted(f, a) {
                let mut prod = P::one();
                for &x in f {
                    if a.binary_search(&x).is_err() {
                        prod = prod * self.p(x);
                    }
                }
                total = total + prod;
            }
        }
        total
    }

    /// `E(Z) = M_∅`.
    pub fn expectation(&self) -> P {
        self.m_a(&[])
    }
}

fn contains_sorted(big: &[u32], small: &[u32]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KimVuStats<P> {
    pub expectation: P,
    /// `M_A` for each queried `A` (sorted).
    pub queried: Vec<(Vec<u32>, P)>,
    /// `max_A M_A` over all `A`, the empty set included.
    pub m0: P,
    /// `max_{|A| >= 1} M_A`.
    pub m1: P,
    pub rank: usize,
}

fn max_of<P: PartialOrd>(a: P, b: P) -> P {
    if b > a {
        b
    } else {
        a
    }
}

/// `E(Z)`, `M_A` for the queried sets, and `M_0`, `M_1`.
///
/// `M_A` vanishes unless `A` lies inside some set of the family, so the
/// maxima range over the nonempty subsets of the family's sets only.
pub fn kimvu_stats<P: Clone + Num + PartialOrd>(sys: &PolySystem<P>, queries: &[Vec<u32>]) -> Result<KimVuStats<P>> {
    let rank = sys.rank();
    if rank > MAX_RANK {
        return Err(Error::InvalidParameter(format!("rank {rank} too large to enumerate")));
    }
    let mut subsets: BTreeSet<Vec<u32>> = BTreeSet::new();
    for f in &sys.sets {
        for mask in 1u32..(1 << f.len()) {
            subsets.insert(
                f.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &x)| x)
                    .collect(),
            );
        }
    }
    let expectation = sys.expectation();
    let m1 = subsets.iter().map(|a| sys.m_a(a)).fold(P::zero(), max_of);
    let m0 = max_of(expectation.clone(), m1.clone());
    let queried = queries
        .iter()
        .map(|a| {
            let mut a = a.clone();
            a.sort_unstable();
            let m = sys.m_a(&a);
            (a, m)
        })
        .collect();
    Ok(KimVuStats {
        expectation,
        queried,
        m0,
        m1,
        rank,
    })
}

impl<P: ToPrimitive> KimVuStats<P> {
    /// The deviation scale `λ^s √(M_0 M_1)`, with the unknown leading
    /// constant left out.
    pub fn threshold(&self, lambda: f64) -> f64 {
        let m0 = self.m0.to_f64().unwrap_or(f64::NAN);
        let m1 = self.m1.to_f64().unwrap_or(f64::NAN);
        lambda.powi(self.rank as i32) * (m0 * m1).sqrt()
    }
}

/// Family of the sets `T_v(x) ∪ T_v(y) ∪ (e \ {x, y})`, one per covered pair
/// `{x, y}` at `v` with covering edge `e`, every vertex succeeding with
/// probability `p`.
pub fn covered_pair_polysystem<P: Clone + Num + PartialOrd>(h: &Hypergraph, v: u32, p: P) -> Result<PolySystem<P>> {
    let report = h.covered_pairs(v)?;
    let mut sets = Vec::with_capacity(report.pairs.len());
    for &(x, y, e) in &report.pairs {
        let mut s = h.link_set(v, x).expect("x is a neighbor of v");
        s.extend(h.link_set(v, y).expect("y is a neighbor of v"));
        s.extend(h.edge(e).iter().copied().filter(|&w| w != x && w != y));
        sets.push(s);
    }
    PolySystem::uniform(sets, p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailRow {
    pub lambda: f64,
    pub threshold: f64,
    /// Fraction of trials with `|Z - E(Z)| >= threshold`.
    pub tail: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    pub expectation: f64,
    pub sample_mean: f64,
    /// Standard error of the sample mean.
    pub std_err: f64,
    pub rows: Vec<TailRow>,
}

impl TailReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,threshold,tail,trials\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.lambda, r.threshold, r.tail, r.trials));
        }
        out
    }
}

/// Samples `Z` `trials` times and reports, for each `λ`, how often it
/// strays from `E(Z)` by at least `λ^s √(M_0 M_1)`. Trial `i` draws from its
/// own stream, so the result does not depend on the thread count.
pub fn empirical_tail(sys: &PolySystem<f64>, trials: usize, lambdas: &[f64], seed: u64) -> Result<TailReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let stats = kimvu_stats(sys, &[])?;
    let mean = stats.expectation;
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, Domain::Probe, i as u64);
            let hit: Vec<bool> = sys.prob.iter().map(|&p| rng.random::<f64>() < p).collect();
            sys.sets
                .iter()
                .filter(|f| f.iter().all(|x| hit[sys.ground.binary_search(x).unwrap()]))
                .count() as f64
        })
        .collect();
    let n = trials as f64;
    let sample_mean = samples.iter().sum::<f64>() / n;
    let var = if trials > 1 {
        samples.iter().map(|z| (z - sample_mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let threshold = stats.threshold(lambda);
            let count = samples
                .iter()
                .filter(|&&z| (z - mean).abs() >= threshold && threshold > 0.0)
                .count();
            TailRow {
                lambda,
                threshold,
                tail: count as f64 / n,
                trials,
            }
        })
        .collect();
    Ok(TailReport {
        expectation: mean,
        sample_mean,
        std_err: (var / n).sqrt(),
        rows,
    })
}

/// `exp(-2 t² / Σ a_i²)` for a sum of independent variables with ranges
/// `a_i`, deviating by `t` from its mean.
pub fn hoeffding_bound(t: f64, ranges: &[f64]) -> Result<f64> {
    let s: f64 = ranges.iter().map(|a| a * a).sum();
    if t.is_nan() || t <= 0.0 || s.is_nan() || s <= 0.0 {
        return Err(Error::InvalidParameter("need t > 0 and a nonzero range".into()));
    }
    Ok((-2.0 * t * t / s).exp())
}

/// `(3/α)^L`, the bound on `P(X >= L)` for a sum of independent indicators
/// when `L >= α E(X)`; that condition is the caller's to check.
pub fn hoeffding_mult(l: f64, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 1.0 || l < 0.0 {
        return Err(Error::InvalidParameter("need alpha > 1 and L >= 0".into()));
    }
    Ok((3.0 / alpha).powf(l))
}

/// `exp(-np/3)`, bounding `P(Bin(n, p) >= 2np)`.
pub fn chernoff_half(n: u64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    Ok((-(n as f64) * p / 3.0).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Chromatic {
    Exact(u32),
    /// Not colorable with `max_colors` colors.
    AboveCap,
    /// The search budget ran out before an answer.
    BudgetExhausted,
}

/// Smallest palette with no monochromatic edge, by backtracking. Colors
/// are tried in order and a vertex may open at most one new color, which
/// removes palette symmetry. `budget` caps the number of search nodes.
pub fn exact_chromatic(h: &Hypergraph, max_colors: u32, budget: u64) -> Chromatic {
    let mut nodes = 0u64;
    for m in 1..=max_colors {
        match colorable(h, m, budget, &mut nodes) {
            Some(true) => return Chromatic::Exact(m),
            Some(false) => {}
            None => return Chromatic::BudgetExhausted,
        }
    }
    Chromatic::AboveCap
}

fn colorable(h: &Hypergraph, m: u32, budget: u64, nodes: &mut u64) -> Option<bool> {
    let n = h.num_vertices();
    // high degree first
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(h.incident(v).len()));
    let mut color: Vec<Option<u32>> = vec![None; n];

    #[allow(clippy::too_many_arguments)]
    fn go(
        h: &Hypergraph,
        m: u32,
        order: &[u32],
        idx: usize,
        used: u32,
        color: &mut Vec<Option<u32>>,
        budget: u64,
        nodes: &mut u64,
    ) -> Option<bool> {
        if idx == order.len() {
            return Some(true);
        }
        let v = order[idx];
        for c in 0..(used + 1).min(m) {
            *nodes += 1;
            if *nodes > budget {
                return None;
            }
            color[v as usize] = Some(c);
            let clash = h
                .incident(v)
                .iter()
                .any(|&e| h.edge(e as usize).iter().all(|&w| color[w as usize] == Some(c)));
            if !clash && go(h, m, order, idx + 1, used.max(c + 1), color, budget, nodes)? {
                return Some(true);
            }
        }
        color[v as usize] = None;
        Some(false)
    }

    go(h, m, &order, 0, 0, &mut color, budget, nodes)
}

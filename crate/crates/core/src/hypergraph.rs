//! Immutable k-uniform hypergraphs and the structural queries the coloring
//! pipeline relies on: degrees, neighborhoods, simplicity, short cycles,
//! triangles, covered pairs and proper-coloring verification.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A k-uniform hypergraph on vertices `0..n`.
///
/// Edges are stored sorted, deduplicated and in lexicographic order, so edge
/// ids and every iteration order are canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    k: usize,
    n: usize,
    /// Flattened edge list, `k` vertices per edge.
    verts: Vec<u32>,
    /// CSR incidence index: edges through `v` are `inc[offsets[v]..offsets[v + 1]]`.
    offsets: Vec<usize>,
    inc: Vec<u32>,
}

impl Hypergraph {
    /// Builds a hypergraph from an edge list. Vertex order inside an edge and
    /// edge order in the list do not matter.
    pub fn new<I, E>(k: usize, n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[u32]>,
    {
        if k < 2 {
            return Err(Error::BadUniformity(k));
        }
        let mut list: Vec<Vec<u32>> = Vec::new();
        for (index, e) in edges.into_iter().enumerate() {
            let e = e.as_ref();
            if e.len() != k {
                return Err(Error::WrongArity {
                    index,
                    expected: k,
                    found: e.len(),
                });
            }
            let mut e = e.to_vec();
            e.sort_unstable();
            for w in e.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::RepeatedVertex { index, vertex: w[0] });
                }
            }
            if let Some(&v) = e.iter().find(|&&v| v as usize >= n) {
                return Err(Error::VertexOutOfRange { index, vertex: v, n });
            }
            list.push(e);
        }
        list.sort_unstable();
        for w in list.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateEdge { edge: w[0].clone() });
            }
        }
        Ok(Self::from_canonical(k, n, list.concat()))
    }

    /// An edgeless hypergraph.
    pub fn empty(k: usize, n: usize) -> Result<Self> {
        Self::new(k, n, std::iter::empty::<Vec<u32>>())
    }

    // `verts` must already be canonical.
    fn from_canonical(k: usize, n: usize, verts: Vec<u32>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &v in &verts {
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut inc = vec![0u32; verts.len()];
        for (e, chunk) in verts.chunks_exact(k).enumerate() {
            for &v in chunk {
                inc[fill[v as usize]] = e as u32;
                fill[v as usize] += 1;
            }
        }
        Hypergraph {
            k,
            n,
            verts,
            offsets,
            inc,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.verts.len() / self.k
    }

    /// Sorted vertices of edge `e`.
    pub fn edge(&self, e: usize) -> &[u32] {
        &self.verts[e * self.k..(e + 1) * self.k]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.verts.chunks_exact(self.k)
    }

    /// Ids of the edges through `v`, ascending. Panics if `v >= n`.
    pub fn incident(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.inc[self.offsets[v]..self.offsets[v + 1]]
    }

    fn check_vertex(&self, v: u32) -> Result<()> {
        if (v as usize) < self.n {
            Ok(())
        } else {
            Err(Error::NoSuchVertex { vertex: v, n: self.n })
        }
    }

    pub fn degree(&self, v: u32) -> Result<usize> {
        self.check_vertex(v)?;
        Ok(self.incident(v).len())
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n)
            .map(|v| self.offsets[v + 1] - self.offsets[v])
            .max()
            .unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.offsets[v + 1] - self.offsets[v]).collect()
    }

    /// `N(v)`: every vertex sharing an edge with `v`, sorted, `v` excluded.
    pub fn neighborhood(&self, v: u32) -> Result<Vec<u32>> {
        self.check_vertex(v)?;
        let set: BTreeSet<u32> = self
            .incident(v)
            .iter()
            .flat_map(|&e| self.edge(e as usize).iter().copied())
            .filter(|&x| x != v)
            .collect();
        Ok(set.into_iter().collect())
    }

    /// True iff `e` contains `v`.
    pub fn edge_contains(&self, e: usize, v: u32) -> bool {
        self.edge(e).binary_search(&v).is_ok()
    }

    /// First pair of distinct edges sharing two or more vertices, found by
    /// counting co-occurrences of each vertex with its neighbors.
    pub fn non_simple_witness(&self) -> Option<(usize, usize)> {
        let mut owner: Vec<u32> = vec![u32::MAX; self.n];
        let mut touched: Vec<u32> = Vec::new();
        for v in 0..self.n as u32 {
            for &e in self.incident(v) {
                for &x in self.edge(e as usize) {
                    if x == v {
                        continue;
                    }
                    let slot = &mut owner[x as usize];
                    if *slot != u32::MAX {
                        return Some((*slot as usize, e as usize));
                    }
                    *slot = e;
                    touched.push(x);
                }
            }
            for x in touched.drain(..) {
                owner[x as usize] = u32::MAX;
            }
        }
        None
    }

    /// Every two edges share at most one vertex.
    pub fn is_simple(&self) -> bool {
        self.non_simple_witness().is_none()
    }

    pub fn ensure_simple(&self) -> Result<()> {
        match self.non_simple_witness() {
            None => Ok(()),
            Some((a, b)) => Err(Error::NotSimple(a.min(b), a.max(b))),
        }
    }

    /// Map from each vertex pair covered by an edge to the least edge id
    /// covering it.
    pub fn pair_index(&self) -> HashMap<(u32, u32), u32> {
        let mut map = HashMap::with_capacity(self.num_edges() * self.k * (self.k - 1) / 2);
        for (e, edge) in self.edges().enumerate() {
            for (i, &a) in edge.iter().enumerate() {
                for &b in &edge[i + 1..] {
                    map.entry((a, b)).or_insert(e as u32);
                }
            }
        }
        map
    }

    /// Number of distinct vertices spanned by a set of edges.
    pub fn span(&self, edges: &[usize]) -> usize {
        let set: BTreeSet<u32> = edges.iter().flat_map(|&e| self.edge(e).iter().copied()).collect();
        set.len()
    }

    /// All `i`-cycles: sets of `i` distinct edges spanned by at most
    /// `i(k-1)` vertices, as ascending edge-id lists in lexicographic order.
    /// At most `limit` cycles are returned.
    pub fn find_i_cycles(&self, i: usize, limit: usize) -> Vec<Vec<usize>> {
        if i < 2 || limit == 0 || i > self.num_edges() {
            return Vec::new();
        }
        let mut out = if i == 2 {
            self.two_cycles(limit)
        } else if i == 3 && self.is_simple() {
            // In a simple hypergraph the 3-cycles are exactly the triangles.
            self.triangle_scan(limit).into_iter().map(|t| t.to_vec()).collect()
        } else {
            let mut out = Vec::new();
            let mut counts = vec![0u32; self.n];
            let mut chosen = Vec::with_capacity(i);
            self.cycle_search(i, 0, 0, &mut counts, &mut chosen, &mut out, limit);
            out
        };
        out.sort();
        out.truncate(limit);
        out
    }

    fn two_cycles(&self, limit: usize) -> Vec<Vec<usize>> {
        let mut by_pair: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
        for (e, edge) in self.edges().enumerate() {
            for (i, &a) in edge.iter().enumerate() {
                for &b in &edge[i + 1..] {
                    by_pair.entry((a, b)).or_default().push(e);
                }
            }
        }
        let mut found = BTreeSet::new();
        for list in by_pair.values() {
            for (x, &a) in list.iter().enumerate() {
                for &b in &list[x + 1..] {
                    found.insert(vec![a, b]);
                }
            }
        }
        found.into_iter().take(limit).collect()
    }

    // Lexicographic backtracking over edge subsets. The span only grows as
    // edges are added, so a branch dies once it exceeds i(k-1).
    #[allow(clippy::too_many_arguments)]
    fn cycle_search(
        &self,
        i: usize,
        start: usize,
        span: usize,
        counts: &mut [u32],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        if chosen.len() == i {
            out.push(chosen.clone());
            return;
        }
        let bound = i * (self.k - 1);
        let remaining = i - chosen.len();
        for e in start..=self.num_edges() - remaining {
            let mut added = 0;
            for &v in self.edge(e) {
                if counts[v as usize] == 0 {
                    added += 1;
                }
                counts[v as usize] += 1;
            }
            if span + added <= bound {
                chosen.push(e);
                self.cycle_search(i, e + 1, span + added, counts, chosen, out, limit);
                chosen.pop();
            }
            for &v in self.edge(e) {
                counts[v as usize] -= 1;
            }
            if out.len() >= limit {
                return;
            }
        }
    }

    /// Girth capped at `cap`: the least `i >= 2` with an i-cycle, if below `cap`.
    pub fn girth(&self, cap: usize) -> Girth {
        for i in 2..cap {
            let found = match i {
                2 => !self.is_simple(),
                3 => !self.triangle_scan(1).is_empty(),
                // A minimal cycle can be taken connected, so only connected
                // edge sets need to be searched once shorter cycles are ruled out.
                _ => self.has_connected_cycle(i),
            };
            if found {
                return Girth::Exact(i);
            }
        }
        Girth::AtLeast(cap)
    }

    // ESU enumeration of connected i-edge sets in the line graph, pruned by span.
    fn has_connected_cycle(&self, i: usize) -> bool {
        let m = self.num_edges();
        let bound = i * (self.k - 1);
        let line_nbrs = |e: usize| -> BTreeSet<usize> {
            self.edge(e)
                .iter()
                .flat_map(|&v| self.incident(v).iter().map(|&f| f as usize))
                .filter(|&f| f != e)
                .collect()
        };
        fn extend(
            h: &Hypergraph,
            i: usize,
            bound: usize,
            root: usize,
            sub: &mut Vec<usize>,
            ext: Vec<usize>,
            nbrs: &dyn Fn(usize) -> BTreeSet<usize>,
        ) -> bool {
            if h.span(sub) > bound {
                return false;
            }
            if sub.len() == i {
                return true;
            }
            let mut ext = ext;
            while let Some(w) = ext.pop() {
                let closed: BTreeSet<usize> = sub
                    .iter()
                    .flat_map(|&s| nbrs(s).into_iter().chain(std::iter::once(s)))
                    .collect();
                let mut next = ext.clone();
                for u in nbrs(w) {
                    if u > root && !closed.contains(&u) && !next.contains(&u) {
                        next.push(u);
                    }
                }
                sub.push(w);
                let hit = extend(h, i, bound, root, sub, next, nbrs);
                sub.pop();
                if hit {
                    return true;
                }
            }
            false
        }
        (0..m).any(|root| {
            let ext: Vec<usize> = line_nbrs(root).into_iter().filter(|&u| u > root).collect();
            extend(self, i, bound, root, &mut vec![root], ext, &line_nbrs)
        })
    }

    /// Triangles of a simple hypergraph: three edges pairwise meeting in one
    /// vertex with no vertex common to all three. Ascending edge-id triples.
    pub fn find_triangles(&self, limit: usize) -> Result<Vec<[usize; 3]>> {
        self.ensure_simple()?;
        let mut out = self.triangle_scan(limit);
        out.truncate(limit);
        Ok(out)
    }

    // Assumes simplicity. Every triangle is a covered pair seen from each of
    // its three meeting points.
    fn triangle_scan(&self, limit: usize) -> Vec<[usize; 3]> {
        let pairs = self.pair_index();
        let mut found = BTreeSet::new();
        'outer: for v in 0..self.n as u32 {
            let inc = self.incident(v);
            for (ia, &a) in inc.iter().enumerate() {
                for &b in &inc[ia + 1..] {
                    for &x in self.edge(a as usize) {
                        if x == v {
                            continue;
                        }
                        for &y in self.edge(b as usize) {
                            if y == v {
                                continue;
                            }
                            let key = if x < y { (x, y) } else { (y, x) };
                            if let Some(&c) = pairs.get(&key) {
                                let mut t = [a as usize, b as usize, c as usize];
                                t.sort_unstable();
                                found.insert(t);
                                if found.len() >= limit {
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
            }
        }
        found.into_iter().collect()
    }

    /// `T_v(x)`: the `k-1` vertices completing `v` to the edge through `v`
    /// that contains `x`.
    pub fn link_set(&self, v: u32, x: u32) -> Option<Vec<u32>> {
        if v as usize >= self.n || x as usize >= self.n || v == x {
            return None;
        }
        self.incident(v)
            .iter()
            .find(|&&e| self.edge_contains(e as usize, x))
            .map(|&e| self.edge(e as usize).iter().copied().filter(|&w| w != v).collect())
    }

    /// Pairs `x < y` of `N(v)` lying together in an edge that avoids `v`.
    pub fn covered_pairs(&self, v: u32) -> Result<CoveredPairReport> {
        self.check_vertex(v)?;
        self.ensure_simple()?;
        Ok(self.covered_pairs_unchecked(v))
    }

    pub(crate) fn covered_pairs_unchecked(&self, v: u32) -> CoveredPairReport {
        let mut in_nbhd = vec![false; self.n];
        let nbhd: Vec<u32> = self
            .incident(v)
            .iter()
            .flat_map(|&e| self.edge(e as usize).iter().copied())
            .filter(|&x| x != v)
            .collect();
        for &x in &nbhd {
            in_nbhd[x as usize] = true;
        }
        let mut pairs: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for &x in &nbhd {
            for &s in self.incident(x) {
                let s = s as usize;
                if self.edge_contains(s, v) {
                    continue;
                }
                for &y in self.edge(s) {
                    if y > x && in_nbhd[y as usize] {
                        let w = pairs.entry((x, y)).or_insert(s);
                        *w = (*w).min(s);
                    }
                }
            }
        }
        CoveredPairReport {
            center: v,
            pairs: pairs.into_iter().map(|((x, y), s)| (x, y, s)).collect(),
        }
    }

    /// Number of covered pairs at `v`. Assumes simplicity.
    pub(crate) fn covered_pair_count(&self, v: u32, mark: &mut [bool]) -> usize {
        let inc = self.incident(v);
        for &e in inc {
            for &x in self.edge(e as usize) {
                mark[x as usize] = x != v;
            }
        }
        let mut count = 0;
        for &e in inc {
            for &x in self.edge(e as usize) {
                if x == v {
                    continue;
                }
                for &s in self.incident(x) {
                    if s == e {
                        continue;
                    }
                    count += self
                        .edge(s as usize)
                        .iter()
                        .filter(|&&y| y > x && mark[y as usize])
                        .count();
                }
            }
        }
        for &e in inc {
            for &x in self.edge(e as usize) {
                mark[x as usize] = false;
            }
        }
        count
    }

    /// Sub-hypergraph induced by `subset` (duplicates ignored). New ids follow
    /// the ascending order of the kept vertices.
    pub fn induced(&self, subset: &[u32]) -> Result<Induced> {
        let mut to_parent: Vec<u32> = subset.to_vec();
        to_parent.sort_unstable();
        to_parent.dedup();
        if let Some(&v) = to_parent.iter().find(|&&v| v as usize >= self.n) {
            return Err(Error::NoSuchVertex { vertex: v, n: self.n });
        }
        let mut from_parent = vec![None; self.n];
        for (new, &old) in to_parent.iter().enumerate() {
            from_parent[old as usize] = Some(new as u32);
        }
        // The relabeling is monotone, so canonical order is preserved.
        let mut verts = Vec::new();
        for edge in self.edges() {
            if edge.iter().all(|&v| from_parent[v as usize].is_some()) {
                verts.extend(edge.iter().map(|&v| from_parent[v as usize].unwrap()));
            }
        }
        Ok(Induced {
            graph: Hypergraph::from_canonical(self.k, to_parent.len(), verts),
            to_parent,
            from_parent,
        })
    }

    /// Checks that no edge is monochromatic. Every vertex must be colored.
    pub fn verify_coloring(&self, coloring: &Coloring) -> Result<ColoringReport> {
        if coloring.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "coloring covers {} vertices, hypergraph has {}",
                coloring.len(),
                self.n
            )));
        }
        if let Some(v) = coloring.first_uncolored() {
            return Err(Error::Uncolored(v));
        }
        let monochromatic_edges: Vec<usize> = self
            .edges()
            .enumerate()
            .filter(|(_, e)| {
                let c = coloring.get(e[0]);
                e[1..].iter().all(|&v| coloring.get(v) == c)
            })
            .map(|(i, _)| i)
            .collect();
        Ok(ColoringReport {
            proper: monochromatic_edges.is_empty(),
            monochromatic_edges,
        })
    }
}

/// Result of a capped girth query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Girth {
    Exact(usize),
    /// No cycle shorter than the cap exists.
    AtLeast(usize),
}

/// An induced sub-hypergraph with its vertex relabeling.
#[derive(Debug, Clone)]
pub struct Induced {
    pub graph: Hypergraph,
    /// New id -> parent id.
    pub to_parent: Vec<u32>,
    /// Parent id -> new id, `None` when the vertex was dropped.
    pub from_parent: Vec<Option<u32>>,
}

/// Covered pairs at a center vertex, each with the least witness edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveredPairReport {
    pub center: u32,
    /// `(x, y, witness)` with `x < y`, ascending.
    pub pairs: Vec<(u32, u32, usize)>,
}

/// A (possibly partial) vertex coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<Option<u32>>,
    palette_size: u32,
}

impl Coloring {
    /// All vertices uncolored.
    pub fn uncolored(n: usize, palette_size: u32) -> Self {
        Coloring {
            colors: vec![None; n],
            palette_size,
        }
    }

    pub fn from_colors(colors: Vec<u32>, palette_size: u32) -> Result<Self> {
        Self::from_partial(colors.into_iter().map(Some).collect(), palette_size)
    }

    pub fn from_partial(colors: Vec<Option<u32>>, palette_size: u32) -> Result<Self> {
        for (v, c) in colors.iter().enumerate() {
            if let Some(c) = *c {
                if c >= palette_size {
                    return Err(Error::ColorOutOfPalette {
                        vertex: v as u32,
                        color: c,
                        palette: palette_size,
                    });
                }
            }
        }
        Ok(Coloring { colors, palette_size })
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn palette_size(&self) -> u32 {
        self.palette_size
    }

    pub fn get(&self, v: u32) -> Option<u32> {
        self.colors[v as usize]
    }

    pub fn set(&mut self, v: u32, color: u32) -> Result<()> {
        if color >= self.palette_size {
            return Err(Error::ColorOutOfPalette {
                vertex: v,
                color,
                palette: self.palette_size,
            });
        }
        self.colors[v as usize] = Some(color);
        Ok(())
    }

    pub fn colors(&self) -> &[Option<u32>] {
        &self.colors
    }

    pub fn first_uncolored(&self) -> Option<u32> {
        self.colors.iter().position(Option::is_none).map(|v| v as u32)
    }

    pub fn is_complete(&self) -> bool {
        self.first_uncolored().is_none()
    }

    /// Number of distinct colors actually assigned.
    pub fn colors_used(&self) -> usize {
        self.colors.iter().flatten().collect::<BTreeSet<_>>().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringReport {
    pub proper: bool,
    pub monochromatic_edges: Vec<usize>,
}

//! Hierarchical clustering by the quartet method: unrooted ternary trees
//! scored by the summed costs of their embedded quartet topologies,
//! optimized by randomized hill-climbing and verified by exhaustive
//! enumeration at small sizes.
//!
//! For four leaves {a,b,c,d} a tree embeds exactly one of the pairings
//! ab|cd, ac|bd, ad|bc (the one whose two within-pair paths are
//! edge-disjoint). The cost of a pairing is the sum of its two within-pair
//! matrix distances; the tree fitness `s` normalizes the total embedded
//! cost between the per-quartet minima and maxima, so `s = 1` means every
//! quartet sits at its cheapest topology.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::distances::DistanceMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuartetError {
    #[error("quartet trees need at least 4 leaves, got {0}")]
    TooFewLeaves(usize),
    #[error("exhaustive search is capped at 8 leaves, got {0}")]
    TooManyLeaves(usize),
    #[error("tree labels do not match matrix labels")]
    LabelMismatch,
    #[error("matrix holds an infinite distance for ({a}, {b}); quartet costs require finite cells")]
    InfiniteDistance { a: String, b: String },
    #[error("invalid tree: {0}")]
    InvalidTree(&'static str),
}

/// One of the three pairings of a leaf quartet, with each pair and the
/// pair list sorted ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Topology {
    pub pairs: [[usize; 2]; 2],
}

impl Topology {
    fn new(a: usize, b: usize, c: usize, d: usize) -> Self {
        let mut p0 = [a, b];
        let mut p1 = [c, d];
        p0.sort_unstable();
        p1.sort_unstable();
        if p0[0] > p1[0] {
            std::mem::swap(&mut p0, &mut p1);
        }
        Topology { pairs: [p0, p1] }
    }
}

/// The mutation applied by one hill-climbing proposal.
#[derive(Clone, Copy, Debug)]
pub enum TreeMove {
    LeafSwap(usize, usize),
    Regraft,
    SubtreeExchange,
}

/// An unrooted tree with `n` labeled leaves of degree 1 and `n − 2`
/// unlabeled internal nodes of degree 3. Leaf node ids are `0..n` and
/// equal the index into the label list; internal ids follow.
#[derive(Clone, Debug)]
pub struct QuartetTree {
    labels: Arc<Vec<String>>,
    adj: Vec<Vec<usize>>,
}

impl QuartetTree {
    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn node_count(&self) -> usize {
        2 * self.labels.len() - 2
    }

    /// Builds a tree from an explicit edge list and checks every
    /// invariant: node count `2n − 2`, leaf degrees 1, internal degrees 3,
    /// connected and acyclic.
    pub fn from_edges(labels: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, QuartetError> {
        let n = labels.len();
        if n < 4 {
            return Err(QuartetError::TooFewLeaves(n));
        }
        let nodes = 2 * n - 2;
        if edges.len() != nodes - 1 {
            return Err(QuartetError::InvalidTree("edge count must be 2n − 3"));
        }
        let mut adj = vec![Vec::new(); nodes];
        for &(u, v) in edges {
            if u >= nodes || v >= nodes || u == v {
                return Err(QuartetError::InvalidTree("edge endpoint out of range"));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let tree = QuartetTree {
            labels: Arc::new(labels),
            adj,
        };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<(), QuartetError> {
        let n = self.leaf_count();
        for (node, nbrs) in self.adj.iter().enumerate() {
            let want = if node < n { 1 } else { 3 };
            if nbrs.len() != want {
                return Err(QuartetError::InvalidTree("wrong node degree"));
            }
        }
        // Connectivity; acyclicity follows from the edge count.
        let mut seen = vec![false; self.node_count()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    queue.push_back(v);
                }
            }
        }
        if visited != self.node_count() {
            return Err(QuartetError::InvalidTree("disconnected"));
        }
        Ok(())
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.node_count() - 1);
        for (u, nbrs) in self.adj.iter().enumerate() {
            for &v in nbrs {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn remove_adj(&mut self, u: usize, v: usize) {
        self.adj[u].retain(|&x| x != v);
    }

    /// Hop counts between every pair of leaves.
    fn leaf_hops(&self) -> Vec<Vec<u16>> {
        let n = self.leaf_count();
        let mut hops = vec![vec![0u16; n]; n];
        let mut dist = vec![u16::MAX; self.node_count()];
        for start in 0..n {
            dist.fill(u16::MAX);
            dist[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &self.adj[u] {
                    if dist[v] == u16::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for leaf in 0..n {
                hops[start][leaf] = dist[leaf];
            }
        }
        hops
    }

    /// Marks the nodes on `v`'s side of the edge `u–v`.
    fn side_of(&self, u: usize, v: usize) -> Vec<bool> {
        let mut side = vec![false; self.node_count()];
        side[v] = true;
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if y != u && !side[y] {
                    side[y] = true;
                    queue.push_back(y);
                }
            }
        }
        side
    }

    fn mutate_with_rng(&self, rng: &mut ChaCha8Rng) -> (QuartetTree, TreeMove) {
        let n = self.leaf_count();
        loop {
            match rng.gen_range(0..3u8) {
                0 => {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    if a == b {
                        continue;
                    }
                    let mut t = self.clone();
                    let pa = t.adj[a][0];
                    let pb = t.adj[b][0];
                    if pa == pb {
                        // Sibling leaves: swapping them is the identity.
                        return (t, TreeMove::LeafSwap(a, b));
                    }
                    for x in t.adj[pa].iter_mut() {
                        if *x == a {
                            *x = b;
                        }
                    }
                    for x in t.adj[pb].iter_mut() {
                        if *x == b {
                            *x = a;
                        }
                    }
                    t.adj[a][0] = pb;
                    t.adj[b][0] = pa;
                    return (t, TreeMove::LeafSwap(a, b));
                }
                1 => {
                    // Detach the subtree on v's side of a random edge and
                    // reattach it on a random remaining edge.
                    let edges = self.edges();
                    let &(x, y) = &edges[rng.gen_range(0..edges.len())];
                    let (u, v) = if rng.gen_bool(0.5) { (x, y) } else { (y, x) };
                    if u < n {
                        continue; // detaching at a leaf would strand it
                    }
                    let side = self.side_of(u, v);
                    let mut t = self.clone();
                    t.remove_adj(u, v);
                    t.remove_adj(v, u);
                    let (a, b) = (t.adj[u][0], t.adj[u][1]);
                    t.adj[u].clear();
                    t.remove_adj(a, u);
                    t.remove_adj(b, u);
                    t.adj[a].push(b);
                    t.adj[b].push(a);
                    let mut remaining: Vec<(usize, usize)> = t
                        .edges()
                        .into_iter()
                        .filter(|&(p, q)| !side[p] && !side[q] && p != u && q != u)
                        .collect();
                    remaining.sort_unstable();
                    let &(p, q) = &remaining[rng.gen_range(0..remaining.len())];
                    t.remove_adj(p, q);
                    t.remove_adj(q, p);
                    t.adj[p].push(u);
                    t.adj[q].push(u);
                    t.adj[u].push(p);
                    t.adj[u].push(q);
                    t.adj[u].push(v);
                    t.adj[v].push(u);
                    debug_assert!(t.validate().is_ok());
                    return (t, TreeMove::Regraft);
                }
                _ => {
                    // Exchange two node-disjoint subtrees.
                    let edges = self.edges();
                    let pick = |rng: &mut ChaCha8Rng| {
                        let &(x, y) = &edges[rng.gen_range(0..edges.len())];
                        if rng.gen_bool(0.5) {
                            (x, y)
                        } else {
                            (y, x)
                        }
                    };
                    let (u1, v1) = pick(rng);
                    let (u2, v2) = pick(rng);
                    if (u1, v1) == (u2, v2) {
                        continue;
                    }
                    let side1 = self.side_of(u1, v1);
                    if side1[u2] || side1[v2] {
                        continue;
                    }
                    let side2 = self.side_of(u2, v2);
                    if side2[u1] || side2[v1] {
                        continue;
                    }
                    let mut t = self.clone();
                    t.remove_adj(u1, v1);
                    t.remove_adj(v1, u1);
                    t.remove_adj(u2, v2);
                    t.remove_adj(v2, u2);
                    t.adj[u1].push(v2);
                    t.adj[v2].push(u1);
                    t.adj[u2].push(v1);
                    t.adj[v1].push(u2);
                    debug_assert!(t.validate().is_ok());
                    return (t, TreeMove::SubtreeExchange);
                }
            }
        }
    }

    /// Leaf bipartitions induced by the internal edges: one membership
    /// mask per edge. A leaf set forms a connected subtree exactly when it
    /// appears as a side of some split (or is a single leaf or all
    /// leaves).
    pub fn splits(&self) -> Vec<Vec<bool>> {
        let n = self.leaf_count();
        self.edges()
            .into_iter()
            .filter(|&(u, v)| u >= n && v >= n)
            .map(|(u, v)| {
                let side = self.side_of(u, v);
                (0..n).map(|leaf| side[leaf]).collect()
            })
            .collect()
    }

    /// Serialization that is identical for identical topologies: rooted at
    /// leaf 0, children ordered by their minimum leaf.
    pub fn canonical_form(&self) -> String {
        fn ser(t: &QuartetTree, node: usize, parent: usize) -> (usize, String) {
            if node < t.leaf_count() {
                return (node, node.to_string());
            }
            let mut children: Vec<(usize, String)> = t.adj[node]
                .iter()
                .filter(|&&c| c != parent)
                .map(|&c| ser(t, c, node))
                .collect();
            children.sort();
            let min = children[0].0;
            let body: Vec<String> = children.into_iter().map(|(_, s)| s).collect();
            (min, format!("({})", body.join(",")))
        }
        let root = self.adj[0][0];
        format!("(0,{})", ser(self, root, 0).1)
    }

    /// Unrooted Newick form, anchored on a deterministic internal edge; no
    /// branch lengths.
    pub fn to_newick(&self) -> String {
        fn quote(label: &str) -> String {
            if label.chars().any(|c| " ()[]{}:;,'\t\n".contains(c)) {
                format!("'{}'", label.replace('\'', "''"))
            } else {
                label.to_string()
            }
        }
        fn ser(t: &QuartetTree, node: usize, parent: usize) -> (usize, String) {
            if node < t.leaf_count() {
                return (node, quote(&t.labels[node]));
            }
            let mut children: Vec<(usize, String)> = t.adj[node]
                .iter()
                .filter(|&&c| c != parent)
                .map(|&c| ser(t, c, node))
                .collect();
            children.sort();
            let min = children[0].0;
            let body: Vec<String> = children.into_iter().map(|(_, s)| s).collect();
            (min, format!("({})", body.join(",")))
        }

        let n = self.leaf_count();
        // Anchor edge: the internal edge whose far side (away from leaf 0)
        // has the smallest (min leaf, size).
        let mut best: Option<((usize, usize), (usize, usize))> = None;
        for (u, v) in self.edges() {
            if u < n || v < n {
                continue;
            }
            let side_v = self.side_of(u, v);
            let (zero_side, far_root) = if side_v[0] { (v, u) } else { (u, v) };
            let far = self.side_of(zero_side, far_root);
            let min_leaf = (0..n).find(|&l| far[l]).expect("both sides hold leaves");
            let size = far.iter().filter(|&&b| b).count();
            let key = (min_leaf, size);
            if best.map_or(true, |(k, _)| key < k) {
                best = Some((key, (zero_side, far_root)));
            }
        }
        let (_, (zs, fs)) = best.expect("n >= 4 guarantees an internal edge");
        format!("({},{});", ser(self, zs, fs).1, ser(self, fs, zs).1)
    }

    /// Undirected DOT graph; leaves are boxed and labeled, internal nodes
    /// are points.
    pub fn to_dot(&self) -> String {
        let n = self.leaf_count();
        let name = |node: usize| -> String {
            if node < n {
                format!(
                    "\"{}\"",
                    self.labels[node].replace('\\', "\\\\").replace('"', "\\\"")
                )
            } else {
                format!("i{}", node - n)
            }
        };
        let mut out = String::from("graph quartet_tree {\n  node [shape=point];\n");
        for leaf in 0..n {
            let _ = writeln!(out, "  {} [shape=box, label={}];", name(leaf), name(leaf));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {} -- {};", name(u), name(v));
        }
        out.push_str("}\n");
        out
    }
}

/// Uniformly random unrooted ternary topology over the labels, grown by
/// inserting each leaf on a uniformly chosen edge. Deterministic per seed.
pub fn random_tree(labels: &[String], seed: u64) -> Result<QuartetTree, QuartetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_tree_with_rng(labels, &mut rng)
}

fn random_tree_with_rng(
    labels: &[String],
    rng: &mut ChaCha8Rng,
) -> Result<QuartetTree, QuartetError> {
    let n = labels.len();
    if n < 4 {
        return Err(QuartetError::TooFewLeaves(n));
    }
    let nodes = 2 * n - 2;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(nodes - 1);
    let hub = n;
    for leaf in 0..3 {
        adj[leaf].push(hub);
        adj[hub].push(leaf);
        edges.push((leaf, hub));
    }
    for leaf in 3..n {
        let w = n + leaf - 2;
        let idx = rng.gen_range(0..edges.len());
        let (x, y) = edges[idx];
        adj[x].retain(|&z| z != y);
        adj[y].retain(|&z| z != x);
        adj[x].push(w);
        adj[y].push(w);
        adj[w].push(x);
        adj[w].push(y);
        adj[w].push(leaf);
        adj[leaf].push(w);
        edges[idx] = (x, w);
        edges.push((w, y));
        edges.push((leaf, w));
    }
    let tree = QuartetTree {
        labels: Arc::new(labels.to_vec()),
        adj,
    };
    debug_assert!(tree.validate().is_ok());
    Ok(tree)
}

/// One randomized topology move: a leaf swap, a subtree regraft, or an
/// exchange of two disjoint subtrees, chosen uniformly; proposals that
/// would break the tree invariants are resampled. Deterministic per seed.
pub fn mutate(t: &QuartetTree, seed: u64) -> QuartetTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    t.mutate_with_rng(&mut rng).0
}

/// The unique pairing of the four given leaves whose within-pair paths
/// are edge-disjoint in the tree. The four leaves must be distinct.
pub fn embedded_topology(t: &QuartetTree, quartet: [usize; 4]) -> Topology {
    let n = t.leaf_count();
    assert!(
        quartet.iter().all(|&l| l < n),
        "quartet leaves must be valid leaf ids"
    );
    let mut sorted = quartet;
    sorted.sort_unstable();
    assert!(
        sorted.windows(2).all(|w| w[0] != w[1]),
        "quartet leaves must be distinct"
    );
    let hops = t.leaf_hops();
    let [a, b, c, d] = sorted;
    let h1 = hops[a][b] as u32 + hops[c][d] as u32;
    let h2 = hops[a][c] as u32 + hops[b][d] as u32;
    let h3 = hops[a][d] as u32 + hops[b][c] as u32;
    if h1 < h2 && h1 < h3 {
        Topology::new(a, b, c, d)
    } else if h2 < h1 && h2 < h3 {
        Topology::new(a, c, b, d)
    } else {
        debug_assert!(h3 < h1 && h3 < h2, "ternary trees embed a unique pairing");
        Topology::new(a, d, b, c)
    }
}

/// Fitness of a tree against a distance matrix.
#[derive(Clone, Copy, Debug)]
pub struct QuartetScore {
    /// Total cost of the embedded topologies over all quartets.
    pub c_t: f64,
    /// Sum of per-quartet minimal topology costs.
    pub m_min: f64,
    /// Sum of per-quartet maximal topology costs.
    pub m_max: f64,
    /// Normalized fitness `(m_max − c_t) / (m_max − m_min)` in `[0, 1]`;
    /// 1 when the matrix is degenerate (`m_max = m_min`).
    pub s: f64,
}

/// Per-matrix precomputation shared by every tree evaluation: pair costs
/// and the quartet min/max cost sums, which do not depend on the tree.
struct ScoreContext {
    n: usize,
    dist: Vec<f64>,
    m_min: f64,
    m_max: f64,
}

impl ScoreContext {
    fn new(d: &DistanceMatrix) -> Result<Self, QuartetError> {
        let n = d.len();
        if n < 4 {
            return Err(QuartetError::TooFewLeaves(n));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = d.value(i, j);
                if !v.is_finite() {
                    return Err(QuartetError::InfiniteDistance {
                        a: d.labels()[i].clone(),
                        b: d.labels()[j].clone(),
                    });
                }
                dist[i * n + j] = v;
            }
        }
        let mut m_min = 0.0;
        let mut m_max = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for e in c + 1..n {
                        let s1 = dist[a * n + b] + dist[c * n + e];
                        let s2 = dist[a * n + c] + dist[b * n + e];
                        let s3 = dist[a * n + e] + dist[b * n + c];
                        m_min += s1.min(s2).min(s3);
                        m_max += s1.max(s2).max(s3);
                    }
                }
            }
        }
        Ok(ScoreContext {
            n,
            dist,
            m_min,
            m_max,
        })
    }

    fn quartet_cost(&self, hops: &[Vec<u16>], a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        let h1 = hops[a][b] as u32 + hops[c][d] as u32;
        let h2 = hops[a][c] as u32 + hops[b][d] as u32;
        let h3 = hops[a][d] as u32 + hops[b][c] as u32;
        if h1 < h2 && h1 < h3 {
            self.dist[a * n + b] + self.dist[c * n + d]
        } else if h2 < h1 && h2 < h3 {
            self.dist[a * n + c] + self.dist[b * n + d]
        } else {
            self.dist[a * n + d] + self.dist[b * n + c]
        }
    }

    fn total_cost(&self, hops: &[Vec<u16>]) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        total += self.quartet_cost(hops, a, b, c, d);
                    }
                }
            }
        }
        total
    }

    /// Change in total cost from swapping leaves `a` and `b`: only the
    /// quartets containing one of them can change.
    fn swap_delta(&self, hops: &[Vec<u16>], a: usize, b: usize) -> f64 {
        let n = self.n;
        let perm = |x: usize| {
            if x == a {
                b
            } else if x == b {
                a
            } else {
                x
            }
        };
        let mut swapped = hops.to_vec();
        for i in 0..n {
            for j in 0..n {
                swapped[i][j] = hops[perm(i)][perm(j)];
            }
        }
        let others: Vec<usize> = (0..n).filter(|&x| x != a && x != b).collect();

        let mut delta = 0.0;
        // Quartets with exactly one of a, b.
        for single in [a, b] {
            for i in 0..others.len() {
                for j in i + 1..others.len() {
                    for k in j + 1..others.len() {
                        let mut q = [single, others[i], others[j], others[k]];
                        q.sort_unstable();
                        delta += self.quartet_cost(&swapped, q[0], q[1], q[2], q[3])
                            - self.quartet_cost(hops, q[0], q[1], q[2], q[3]);
                    }
                }
            }
        }
        // Quartets with both.
        for i in 0..others.len() {
            for j in i + 1..others.len() {
                let mut q = [a, b, others[i], others[j]];
                q.sort_unstable();
                delta += self.quartet_cost(&swapped, q[0], q[1], q[2], q[3])
                    - self.quartet_cost(hops, q[0], q[1], q[2], q[3]);
            }
        }
        delta
    }

    fn score_from_cost(&self, c_t: f64) -> QuartetScore {
        let s = if self.m_max > self.m_min {
            ((self.m_max - c_t) / (self.m_max - self.m_min)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        QuartetScore {
            c_t,
            m_min: self.m_min,
            m_max: self.m_max,
            s,
        }
    }
}

/// Scores one tree against the matrix. The matrix must be finite and its
/// labels must equal the tree's labels in order.
pub fn score(t: &QuartetTree, d: &DistanceMatrix) -> Result<QuartetScore, QuartetError> {
    if t.labels() != d.labels() {
        return Err(QuartetError::LabelMismatch);
    }
    let ctx = ScoreContext::new(d)?;
    let hops = t.leaf_hops();
    Ok(ctx.score_from_cost(ctx.total_cost(&hops)))
}

/// One accepted step of a hill-climbing restart.
#[derive(Clone, Copy, Debug)]
pub struct TraceEntry {
    pub restart: usize,
    pub step: usize,
    pub s: f64,
}

/// Renders a trace as `step,restart,s` CSV.
pub fn trace_to_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("step,restart,s\n");
    for e in trace {
        let _ = writeln!(out, "{},{},{}", e.step, e.restart, e.s);
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct HillClimbParams {
    pub restarts: usize,
    /// Consecutive rejected proposals before a restart stops.
    pub patience: usize,
    pub seed: u64,
}

impl Default for HillClimbParams {
    fn default() -> Self {
        HillClimbParams {
            restarts: 10,
            patience: 1000,
            seed: 0,
        }
    }
}

pub struct HillClimbResult {
    pub tree: QuartetTree,
    pub score: QuartetScore,
    pub trace: Vec<TraceEntry>,
}

/// Randomized hill-climbing over tree topologies: per restart, start from
/// a random tree and accept a mutation only when it strictly improves the
/// fitness, stopping after `patience` consecutive rejections. Restarts run
/// concurrently with derived seeds; the winner is reduced by (s, canonical
/// form), so the output is deterministic per seed.
pub fn hill_climb(
    d: &DistanceMatrix,
    params: &HillClimbParams,
) -> Result<HillClimbResult, QuartetError> {
    if params.restarts == 0 {
        return Err(QuartetError::InvalidTree("restarts must be positive"));
    }
    let ctx = ScoreContext::new(d)?;
    let labels = d.labels().to_vec();

    let runs: Vec<(QuartetTree, f64, Vec<TraceEntry>)> = (0..params.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                params
                    .seed
                    .wrapping_add((restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            let mut tree = random_tree_with_rng(&labels, &mut rng).expect("size checked");
            let mut hops = tree.leaf_hops();
            let mut c_t = ctx.total_cost(&hops);
            let mut trace = vec![TraceEntry {
                restart,
                step: 0,
                s: ctx.score_from_cost(c_t).s,
            }];
            let mut rejections = 0usize;
            let mut step = 0usize;
            while rejections < params.patience {
                let (cand, mv) = tree.mutate_with_rng(&mut rng);
                let cand_cost = match mv {
                    TreeMove::LeafSwap(a, b) => c_t + ctx.swap_delta(&hops, a, b),
                    _ => ctx.total_cost(&cand.leaf_hops()),
                };
                if cand_cost < c_t {
                    tree = cand;
                    hops = tree.leaf_hops();
                    c_t = cand_cost;
                    step += 1;
                    rejections = 0;
                    trace.push(TraceEntry {
                        restart,
                        step,
                        s: ctx.score_from_cost(c_t).s,
                    });
                } else {
                    rejections += 1;
                }
            }
            // Report the exact cost of the final tree (incremental deltas
            // can drift by rounding).
            let exact = ctx.total_cost(&tree.leaf_hops());
            (tree, exact, trace)
        })
        .collect();

    let mut trace = Vec::new();
    for (_, _, t) in &runs {
        trace.extend_from_slice(t);
    }
    let (best_tree, best_cost, _) = runs
        .into_iter()
        .min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| a.0.canonical_form().cmp(&b.0.canonical_form()))
        })
        .expect("at least one restart");
    Ok(HillClimbResult {
        score: ctx.score_from_cost(best_cost),
        tree: best_tree,
        trace,
    })
}

/// Exact maximizer of the fitness by exhaustive enumeration of all
/// `(2n−5)!!` unrooted ternary topologies; capped at 8 leaves. Ties are
/// broken toward the lexicographically smallest canonical form.
pub fn brute_force(d: &DistanceMatrix) -> Result<(QuartetTree, QuartetScore), QuartetError> {
    let n = d.len();
    if n > 8 {
        return Err(QuartetError::TooManyLeaves(n));
    }
    let ctx = ScoreContext::new(d)?;
    let labels = Arc::new(d.labels().to_vec());

    let mut best: Option<(f64, String, QuartetTree)> = None;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); 2 * n - 2];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for leaf in 0..3 {
        adj[leaf].push(n);
        adj[n].push(leaf);
        edges.push((leaf, n));
    }
    let mut visit = |tree: &QuartetTree| {
        let cost = ctx.total_cost(&tree.leaf_hops());
        let replace = match &best {
            None => true,
            Some((bc, bcanon, _)) => {
                cost < *bc || (cost == *bc && tree.canonical_form() < *bcanon)
            }
        };
        if replace {
            best = Some((cost, tree.canonical_form(), tree.clone()));
        }
    };
    enumerate_topologies(3, n, &labels, &mut adj, &mut edges, &mut visit);
    let (cost, _, tree) = best.expect("enumeration visits at least one tree");
    Ok((tree, ctx.score_from_cost(cost)))
}

/// Visits every unrooted ternary topology exactly once by inserting leaves
/// in index order on every existing edge.
fn enumerate_topologies(
    next_leaf: usize,
    n: usize,
    labels: &Arc<Vec<String>>,
    adj: &mut Vec<Vec<usize>>,
    edges: &mut Vec<(usize, usize)>,
    visit: &mut impl FnMut(&QuartetTree),
) {
    if next_leaf == n {
        let tree = QuartetTree {
            labels: Arc::clone(labels),
            adj: adj.clone(),
        };
        visit(&tree);
        return;
    }
    let w = n + next_leaf - 2;
    for idx in 0..edges.len() {
        let (x, y) = edges[idx];
        adj[x].retain(|&z| z != y);
        adj[y].retain(|&z| z != x);
        adj[x].push(w);
        adj[y].push(w);
        adj[w].push(x);
        adj[w].push(y);
        adj[w].push(next_leaf);
        adj[next_leaf].push(w);
        edges[idx] = (x, w);
        edges.push((w, y));
        edges.push((next_leaf, w));

        enumerate_topologies(next_leaf + 1, n, labels, adj, edges, visit);

        edges.pop();
        edges.pop();
        edges[idx] = (x, y);
        adj[next_leaf].clear();
        adj[w].clear();
        adj[x].retain(|&z| z != w);
        adj[y].retain(|&z| z != w);
        adj[x].push(y);
        adj[y].push(x);
    }
}

/// Number of distinct unrooted ternary topologies on `n` labeled leaves:
/// the double factorial `(2n−5)!!`.
pub fn topology_count(n: usize) -> u64 {
    let mut count = 1u64;
    let mut k = 5;
    while k <= n {
        count *= 2 * k as u64 - 5;
        k += 1;
    }
    if n >= 4 {
        count *= 3;
    }
    count
}

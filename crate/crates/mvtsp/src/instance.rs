//! Instance data model and compact walk machinery.
//!
//! Walks are never expanded to explicit vertex sequences of length `r(V)`:
//! multigraphs store edge multiplicities, decompositions store one open path
//! plus weighted cycles, and traversals store a base trail plus symbolic
//! "repeat this cycle k times" blocks. Every operation here runs in time
//! polynomial in `n` and `log r(V)` and uses exact arithmetic throughout.

use crate::rational::{format_rat, int_to_rat, parse_int, parse_rat, Int, Rat};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A many-visits instance on the complete graph with self-loops.
///
/// `t` is `None` for the closed-tour variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    cost: Vec<Vec<Rat>>,
    requests: Vec<Int>,
    s: usize,
    t: Option<usize>,
}

/// One violated metric constraint, naming its witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    /// `cost(u,w) > cost(u,v) + cost(v,w)`.
    Triangle { u: usize, v: usize, w: usize },
    /// `cost(v,v) > 2 * min_{u != v} cost(u,v)`.
    SelfLoop { v: usize },
}

impl Instance {
    /// Builds an instance, rejecting structurally malformed data
    /// (asymmetry, negative costs, zero requests, bad endpoints).
    /// Metric violations are not checked here; see [`Instance::validate_metric`].
    pub fn new(
        cost: Vec<Vec<Rat>>,
        requests: Vec<Int>,
        s: usize,
        t: Option<usize>,
    ) -> Result<Self> {
        let n = cost.len();
        if n == 0 {
            return Err(Error::Structural("empty cost matrix".into()));
        }
        for (i, row) in cost.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Structural(format!(
                    "cost row {i} has length {} instead of {n}",
                    row.len()
                )));
            }
            for (j, c) in row.iter().enumerate() {
                if c.is_negative() {
                    return Err(Error::Structural(format!("negative cost at ({i},{j})")));
                }
                if *c != cost[j][i] {
                    return Err(Error::Structural(format!(
                        "cost matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if requests.len() != n {
            return Err(Error::Structural(format!(
                "{} requests for {n} vertices",
                requests.len()
            )));
        }
        if let Some(v) = requests.iter().position(|r| r < &Int::one()) {
            return Err(Error::Structural(format!("request of vertex {v} is < 1")));
        }
        if s >= n {
            return Err(Error::Structural(format!("start vertex {s} out of range")));
        }
        if let Some(t) = t {
            if t >= n {
                return Err(Error::Structural(format!("end vertex {t} out of range")));
            }
            if s == t {
                return Err(Error::Structural(
                    "endpoints must differ; use the closed variant for s = t".into(),
                ));
            }
        }
        Ok(Instance {
            n,
            cost,
            requests,
            s,
            t,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost(&self, u: usize, v: usize) -> &Rat {
        &self.cost[u][v]
    }

    pub fn request(&self, v: usize) -> &Int {
        &self.requests[v]
    }

    pub fn requests(&self) -> &[Int] {
        &self.requests
    }

    /// Sum of all requests.
    pub fn total_requests(&self) -> Int {
        self.requests.iter().sum()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> Option<usize> {
        self.t
    }

    /// The end vertex of a path instance; errors for closed instances.
    pub fn t_required(&self) -> Result<usize> {
        self.t
            .ok_or_else(|| Error::Structural("operation requires a path instance (t set)".into()))
    }

    /// Checks both metric invariants and reports every violation.
    ///
    /// Returns an empty report iff the triangle inequality holds for all
    /// triples and every self-loop costs at most twice the cheapest
    /// incident regular edge.
    pub fn validate_metric(&self) -> Vec<MetricViolation> {
        let mut out = Vec::new();
        let n = self.n;
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    if u != v && v != w && u != w {
                        let via = &self.cost[u][v] + &self.cost[v][w];
                        if self.cost[u][w] > via {
                            out.push(MetricViolation::Triangle { u, v, w });
                        }
                    }
                }
            }
        }
        for v in 0..n {
            let min_leave = (0..n).filter(|&u| u != v).map(|u| &self.cost[u][v]).min();
            if let Some(m) = min_leave {
                if self.cost[v][v] > m + m {
                    out.push(MetricViolation::SelfLoop { v });
                }
            }
        }
        out
    }

    /// The derived degree target: `2 r(v)`, minus one at each endpoint of a
    /// path instance.
    pub fn degree_target(&self, v: usize) -> Int {
        let two_r = &self.requests[v] + &self.requests[v];
        match self.t {
            Some(t) if v == self.s || v == t => two_r - 1,
            None => two_r,
            _ => two_r,
        }
    }
}

/// Enumeration of the edge set of the complete graph with self-loops:
/// unordered pairs `{u, v}` with `u <= v`, indexed contiguously.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeSpace {
    n: usize,
}

impl EdgeSpace {
    pub fn new(n: usize) -> Self {
        EdgeSpace { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    pub fn id(&self, u: usize, v: usize) -> usize {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        debug_assert!(v < self.n);
        // Row u starts after rows 0..u of lengths n, n-1, ...
        u * self.n - u * u.saturating_sub(1) / 2 + (v - u)
    }

    pub fn endpoints(&self, id: usize) -> (usize, usize) {
        let mut u = 0usize;
        let mut base = 0usize;
        loop {
            let row = self.n - u;
            if id < base + row {
                return (u, u + (id - base));
            }
            base += row;
            u += 1;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.count()).map(move |id| {
            let (u, v) = self.endpoints(id);
            (id, u, v)
        })
    }

    pub fn is_loop(&self, id: usize) -> bool {
        let (u, v) = self.endpoints(id);
        u == v
    }
}

/// A multigraph over `0..n` stored as sparse non-negative edge
/// multiplicities. Keys are normalized to `u <= v`; `u == v` is a self-loop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompactMultigraph {
    n: usize,
    mult: BTreeMap<(usize, usize), Int>,
}

impl CompactMultigraph {
    pub fn new(n: usize) -> Self {
        CompactMultigraph {
            n,
            mult: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn key(u: usize, v: usize) -> (usize, usize) {
        if u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    pub fn add(&mut self, u: usize, v: usize, k: Int) {
        assert!(u < self.n && v < self.n, "edge endpoint out of range");
        if k.is_zero() {
            return;
        }
        let e = self.mult.entry(Self::key(u, v)).or_insert_with(Int::zero);
        *e += k;
        assert!(!e.is_negative(), "multiplicity driven negative");
        if e.is_zero() {
            self.mult.remove(&Self::key(u, v));
        }
    }

    pub fn add_one(&mut self, u: usize, v: usize) {
        self.add(u, v, Int::one());
    }

    pub fn get(&self, u: usize, v: usize) -> Int {
        self.mult
            .get(&Self::key(u, v))
            .cloned()
            .unwrap_or_else(Int::zero)
    }

    /// Iterates support edges `((u, v), mult)` with `u <= v` in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Int)> {
        self.mult.iter().map(|(&(u, v), m)| (u, v, m))
    }

    pub fn support_size(&self) -> usize {
        self.mult.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    /// Degree of `v`: regular incident multiplicities plus twice the loop.
    pub fn degree(&self, v: usize) -> Int {
        assert!(v < self.n);
        let mut d = Int::zero();
        for (u, w, m) in self.edges() {
            if u == v && w == v {
                d += m + m;
            } else if u == v || w == v {
                d += m;
            }
        }
        d
    }

    /// Total multiplicity over all edges.
    pub fn total_multiplicity(&self) -> Int {
        self.mult.values().sum()
    }

    /// Exact cost `sum_e z(e) * cost(e)`.
    pub fn cost(&self, inst: &Instance) -> Rat {
        let mut total = Rat::zero();
        for (u, v, m) in self.edges() {
            total += inst.cost(u, v) * int_to_rat(m);
        }
        total
    }

    /// Union with another multigraph on the same vertex set.
    pub fn union(&self, other: &CompactMultigraph) -> CompactMultigraph {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (u, v, m) in other.edges() {
            out.add(u, v, m.clone());
        }
        out
    }

    /// `true` iff the support, viewed as a graph on all `n` vertices,
    /// is connected. The empty graph on one vertex is connected.
    pub fn support_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for (u, v, _) in self.edges() {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    /// Feasibility of this multigraph as a tour for `inst`, with diagnostics.
    ///
    /// A path tour needs a connected support and degrees `2 r(v)` everywhere
    /// except `2 r(v) - 1` at the endpoints; a closed tour needs `2 r(v)`
    /// everywhere.
    pub fn is_feasible_tour(&self, inst: &Instance) -> (bool, Vec<String>) {
        let mut issues = Vec::new();
        if self.n != inst.n() {
            issues.push(format!(
                "vertex count mismatch: multigraph {} vs instance {}",
                self.n,
                inst.n()
            ));
            return (false, issues);
        }
        if !self.support_connected() {
            issues.push("support is not connected".to_string());
        }
        for v in 0..self.n {
            let want = inst.degree_target(v);
            let got = self.degree(v);
            if got != want {
                issues.push(format!("degree of vertex {v} is {got}, expected {want}"));
            }
        }
        (issues.is_empty(), issues)
    }
}

/// A simple cycle in a multigraph: distinct vertices, closed implicitly.
/// A single vertex denotes a self-loop; two vertices denote a doubled edge.
pub type Cycle = Vec<usize>;

/// Edge list of a cycle, as (u, v) pairs; a doubled edge appears twice.
fn cycle_edges(c: &Cycle) -> Vec<(usize, usize)> {
    match c.len() {
        0 => Vec::new(),
        1 => vec![(c[0], c[0])],
        _ => (0..c.len()).map(|i| (c[i], c[(i + 1) % c.len()])).collect(),
    }
}

/// One open `s`-`t`-path plus weighted simple cycles; together they
/// reproduce a multigraph exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCycleDecomposition {
    /// Vertex sequence from `s` to `t` (at least one edge for `s != t`).
    pub path: Vec<usize>,
    /// `(cycle, multiplicity)` pairs, multiplicities >= 1.
    pub cycles: Vec<(Cycle, Int)>,
}

impl PathCycleDecomposition {
    /// Rebuilds the multigraph this decomposition represents.
    pub fn recompose(&self, n: usize) -> CompactMultigraph {
        let mut g = CompactMultigraph::new(n);
        for w in self.path.windows(2) {
            g.add_one(w[0], w[1]);
        }
        for (c, mu) in &self.cycles {
            for (u, v) in cycle_edges(c) {
                g.add(u, v, mu.clone());
            }
        }
        g
    }
}

/// Decomposes `g` into exactly one open `s`-`t`-path and weighted simple
/// cycles. Requires odd degree exactly at `s` and `t`; the graph need not be
/// connected away from the path. Each extracted cycle is removed with its
/// full bottleneck multiplicity at once, so the loop count is bounded by the
/// support size regardless of how large the multiplicities are.
pub fn decompose_path_cycles(
    g: &CompactMultigraph,
    s: usize,
    t: usize,
) -> Result<PathCycleDecomposition> {
    assert!(s != t, "open decomposition needs distinct endpoints");
    let n = g.n();
    let two = Int::from(2);
    for v in 0..n {
        let parity_odd = g.degree(v) % &two == Int::one();
        let want_odd = v == s || v == t;
        if parity_odd != want_odd {
            return Err(Error::ParityViolation { vertex: v });
        }
    }

    let mut work = g.clone();

    // Peel off one s-t path over the support (BFS; exists by parity).
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(s);
    seen[s] = true;
    while let Some(u) = queue.pop_front() {
        if u == t {
            break;
        }
        for v in 0..n {
            if v != u && !seen[v] && !work.get(u, v).is_zero() {
                seen[v] = true;
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    if !seen[t] {
        return Err(Error::Internal(
            "parity holds but endpoints are in different components".into(),
        ));
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = parent[cur];
        path.push(cur);
    }
    path.reverse();
    for w in path.windows(2) {
        work.add(w[0], w[1], -Int::one());
    }

    let cycles = peel_cycles(&mut work)?;
    Ok(PathCycleDecomposition { path, cycles })
}

/// Decomposes an all-even-degree multigraph into weighted simple cycles
/// (empty path). Used for closed tours.
pub fn decompose_closed(g: &CompactMultigraph) -> Result<PathCycleDecomposition> {
    let two = Int::from(2);
    for v in 0..g.n() {
        if g.degree(v) % &two == Int::one() {
            return Err(Error::ParityViolation { vertex: v });
        }
    }
    let mut work = g.clone();
    let cycles = peel_cycles(&mut work)?;
    Ok(PathCycleDecomposition {
        path: Vec::new(),
        cycles,
    })
}

/// Peels weighted simple cycles out of an even-degree multigraph until it is
/// empty. Each extraction zeroes at least one support edge.
fn peel_cycles(work: &mut CompactMultigraph) -> Result<Vec<(Cycle, Int)>> {
    let n = work.n();
    let mut cycles: Vec<(Cycle, Int)> = Vec::new();
    while !work.is_empty() {
        let (&(a, b), _) = work.mult.iter().next().unwrap();
        let cycle = if a == b {
            vec![a]
        } else {
            // Walk from `a`, tracking in-walk edge usage, until a vertex repeats.
            let mut stack = vec![a];
            let mut pos = vec![usize::MAX; n];
            pos[a] = 0;
            let mut used: BTreeMap<(usize, usize), Int> = BTreeMap::new();
            loop {
                let u = *stack.last().unwrap();
                if !work.get(u, u).is_zero() {
                    break vec![u];
                }
                let mut next = None;
                for v in 0..n {
                    if v == u {
                        continue;
                    }
                    let avail = work.get(u, v)
                        - used
                            .get(&CompactMultigraph::key(u, v))
                            .cloned()
                            .unwrap_or_else(Int::zero);
                    if avail > Int::zero() {
                        next = Some(v);
                        break;
                    }
                }
                let v = next.ok_or_else(|| {
                    Error::Internal("even multigraph walk got stuck".into())
                })?;
                *used
                    .entry(CompactMultigraph::key(u, v))
                    .or_insert_with(Int::zero) += Int::one();
                if pos[v] != usize::MAX {
                    break stack[pos[v]..].to_vec();
                }
                pos[v] = stack.len();
                stack.push(v);
            }
        };

        // Bottleneck: minimum of z(e) / uses(e) over the cycle's edges.
        let mut uses: BTreeMap<(usize, usize), Int> = BTreeMap::new();
        for (u, v) in cycle_edges(&cycle) {
            *uses
                .entry(CompactMultigraph::key(u, v))
                .or_insert_with(Int::zero) += Int::one();
        }
        let mu = uses
            .iter()
            .map(|(&(u, v), cnt)| work.get(u, v) / cnt)
            .min()
            .expect("cycle has edges");
        debug_assert!(mu >= Int::one());
        for (key, cnt) in uses {
            work.add(key.0, key.1, -(cnt * &mu));
        }
        cycles.push((cycle, mu));
    }
    Ok(cycles)
}

/// A walk stored as an explicit trail with symbolic repeated-cycle blocks.
///
/// Expansion rule: items are concatenated; a `Repeat` block sits after an
/// occurrence of its anchor vertex and expands to `repeats` copies of `tail`
/// (the cycle rotated to leave and re-enter the anchor, so `tail` ends at the
/// anchor). Consecutive equal vertices in the expansion traverse a self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkItem {
    /// One visit of a vertex.
    Visit(usize),
    /// `repeats` traversals of a cycle anchored at the preceding vertex.
    Repeat { tail: Vec<usize>, repeats: Int },
}

/// Symbolic vertex order of a walk: polynomial size, exponentially many
/// visits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicOrder {
    pub items: Vec<WalkItem>,
}

impl SymbolicOrder {
    /// Number of visits of each vertex in the expanded walk.
    pub fn visit_counts(&self, n: usize) -> Vec<Int> {
        let mut counts = vec![Int::zero(); n];
        for item in &self.items {
            match item {
                WalkItem::Visit(v) => counts[*v] += 1,
                WalkItem::Repeat { tail, repeats } => {
                    for &v in tail {
                        counts[v] += repeats;
                    }
                }
            }
        }
        counts
    }

    /// The multigraph of traversed edges.
    pub fn to_multigraph(&self, n: usize) -> CompactMultigraph {
        let mut g = CompactMultigraph::new(n);
        let mut prev: Option<usize> = None;
        for item in &self.items {
            match item {
                WalkItem::Visit(v) => {
                    if let Some(p) = prev {
                        g.add_one(p, *v);
                    }
                    prev = Some(*v);
                }
                WalkItem::Repeat { tail, repeats } => {
                    let anchor = prev.expect("repeat block cannot start a walk");
                    debug_assert_eq!(*tail.last().unwrap(), anchor, "tail must return to anchor");
                    let mut at = anchor;
                    for &v in tail {
                        g.add(at, v, repeats.clone());
                        at = v;
                    }
                    prev = Some(anchor);
                }
            }
        }
        g
    }

    fn first_vertex(&self) -> Option<usize> {
        match self.items.first() {
            Some(WalkItem::Visit(v)) => Some(*v),
            _ => None,
        }
    }

    fn last_vertex(&self) -> Option<usize> {
        match self.items.last() {
            Some(WalkItem::Visit(v)) => Some(*v),
            Some(WalkItem::Repeat { tail, .. }) => tail.last().copied(),
            None => None,
        }
    }

    /// Structural sanity: the walk starts with a visit, tails are nonempty
    /// with non-negative repeat counts, and every repeat block returns to
    /// the vertex it follows.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut prev: Option<usize> = None;
        for (i, item) in self.items.iter().enumerate() {
            match item {
                WalkItem::Visit(v) => {
                    if *v >= n {
                        return Err(Error::Structural(format!("vertex {v} out of range")));
                    }
                    prev = Some(*v);
                }
                WalkItem::Repeat { tail, repeats } => {
                    let Some(anchor) = prev else {
                        return Err(Error::Structural(
                            "walk cannot start with a repeat block".into(),
                        ));
                    };
                    if tail.is_empty() || tail.iter().any(|&v| v >= n) {
                        return Err(Error::Structural(format!("bad tail in item {i}")));
                    }
                    if tail.last() != Some(&anchor) {
                        return Err(Error::Structural(format!(
                            "repeat block {i} does not return to its anchor {anchor}"
                        )));
                    }
                    if repeats.is_negative() {
                        return Err(Error::Structural(format!("negative repeats in item {i}")));
                    }
                    prev = Some(anchor);
                }
            }
        }
        Ok(())
    }
}

/// Merges a path-cycle decomposition into one symbolic `s`-`t` walk.
///
/// Builds the auxiliary multigraph holding the path plus a single copy of
/// every cycle, computes an Eulerian `s`-`t`-trail with Hierholzer's
/// algorithm, and attaches each cycle's remaining `mu - 1` traversals as a
/// repeat block at the first trail occurrence of one of its vertices.
/// Fails with [`Error::Disconnected`] if the edges do not form one trail.
pub fn eulerian_merge(decomp: &PathCycleDecomposition, n: usize) -> Result<SymbolicOrder> {
    assert!(decomp.path.len() >= 2, "path must have at least one edge");
    let s = decomp.path[0];

    // Auxiliary multigraph: adjacency with small counts (path + one copy each).
    let mut adj = vec![vec![0usize; n]; n];
    let mut edge_total = 0usize;
    let bump = |a: usize, b: usize, adj: &mut Vec<Vec<usize>>| {
        adj[a][b] += 1;
        if a != b {
            adj[b][a] += 1;
        }
    };
    for w in decomp.path.windows(2) {
        bump(w[0], w[1], &mut adj);
        edge_total += 1;
    }
    for (c, _) in &decomp.cycles {
        for (u, v) in cycle_edges(c) {
            bump(u, v, &mut adj);
            edge_total += 1;
        }
    }

    // Hierholzer from s; parity guarantees the trail ends at t.
    let mut stack = vec![s];
    let mut trail = Vec::with_capacity(edge_total + 1);
    let mut cursor = vec![0usize; n];
    while let Some(&u) = stack.last() {
        let mut advanced = false;
        while cursor[u] < n {
            let v = cursor[u];
            if adj[u][v] > 0 {
                adj[u][v] -= 1;
                if u != v {
                    adj[v][u] -= 1;
                }
                stack.push(v);
                advanced = true;
                break;
            }
            cursor[u] += 1;
        }
        if !advanced {
            trail.push(stack.pop().unwrap());
        }
    }
    trail.reverse();
    if trail.len() != edge_total + 1 {
        return Err(Error::Disconnected);
    }

    let mut first_pos = vec![usize::MAX; n];
    for (i, &v) in trail.iter().enumerate() {
        if first_pos[v] == usize::MAX {
            first_pos[v] = i;
        }
    }

    // Insertion position for each cycle: earliest trail occurrence among its
    // vertices. Blocks at the same position keep cycle order.
    let mut insertions: Vec<(usize, usize)> = Vec::new(); // (trail pos, cycle idx)
    for (ci, (c, mu)) in decomp.cycles.iter().enumerate() {
        if mu > &Int::one() {
            let pos = c.iter().map(|&v| first_pos[v]).min().unwrap();
            insertions.push((pos, ci));
        }
    }
    insertions.sort();

    let mut items = Vec::new();
    let mut ins_iter = insertions.into_iter().peekable();
    for (i, &v) in trail.iter().enumerate() {
        items.push(WalkItem::Visit(v));
        while let Some(&(pos, ci)) = ins_iter.peek() {
            if pos != i {
                break;
            }
            ins_iter.next();
            let (c, mu) = &decomp.cycles[ci];
            let anchor_idx = c.iter().position(|&x| x == v).unwrap();
            let mut tail: Vec<usize> = Vec::with_capacity(c.len());
            if c.len() == 1 {
                tail.push(c[0]);
            } else {
                for k in 1..=c.len() {
                    tail.push(c[(anchor_idx + k) % c.len()]);
                }
            }
            items.push(WalkItem::Repeat {
                tail,
                repeats: mu - Int::one(),
            });
        }
    }

    Ok(SymbolicOrder { items })
}

/// A feasible tour: its multigraph, a decomposition witnessing walk
/// structure, and its exact cost.
#[derive(Debug, Clone)]
pub struct TourSolution {
    pub multigraph: CompactMultigraph,
    pub decomposition: PathCycleDecomposition,
    pub total_cost: Rat,
}

/// Shortcuts surplus visits out of a symbolic walk so that every vertex `v`
/// is visited exactly `r(v)` times.
///
/// Surplus occurrences are removed back-to-front, unrolling at most the last
/// few copies of a repeat block; splicing `u, w, v` to `u, v` never raises
/// the cost under metric costs (the degenerate cases collapse to self-loops
/// or drop one). The walk's first and final visits are never removed.
pub fn shortcut(order: &SymbolicOrder, inst: &Instance) -> Result<TourSolution> {
    let n = inst.n();
    let t = inst.t_required()?;
    let visits = order.visit_counts(n);
    let mut surplus: Vec<usize> = Vec::with_capacity(n);
    let mut total_surplus = 0usize;
    for v in 0..n {
        let extra = &visits[v] - inst.request(v);
        if extra.is_negative() {
            return Err(Error::VisitDeficit {
                vertex: v,
                visits: visits[v].clone(),
                required: inst.request(v).clone(),
            });
        }
        let extra_usize = usize::try_from(&extra).map_err(|_| {
            Error::Internal(format!("surplus at vertex {v} is not O(n): {extra}"))
        })?;
        surplus.push(extra_usize);
        total_surplus += extra_usize;
    }
    assert!(
        total_surplus <= 4 * n * n + 4,
        "surplus exceeds the structural bound"
    );

    let before_cost = order.to_multigraph(n).cost(inst);

    // Walk items back-to-front, materializing repeat copies only while some
    // contained vertex still has surplus.
    let mut items = order.items.clone();
    let mut idx = items.len();
    let last = order.last_vertex();
    let mut skipped_final_t = false;
    while idx > 0 {
        idx -= 1;
        match items[idx].clone() {
            WalkItem::Visit(v) => {
                if surplus[v] > 0 {
                    if idx == 0 {
                        continue; // never drop the start of the walk
                    }
                    if v == t && !skipped_final_t && Some(v) == last {
                        skipped_final_t = true;
                        continue; // never drop the final arrival at t
                    }
                    items.remove(idx);
                    surplus[v] -= 1;
                }
            }
            WalkItem::Repeat { tail, repeats } => {
                if tail.iter().any(|&v| surplus[v] > 0) && !repeats.is_zero() {
                    // Materialize the last copy and revisit it.
                    let new_rep = &repeats - Int::one();
                    if new_rep.is_zero() {
                        items.remove(idx);
                    } else {
                        items[idx] = WalkItem::Repeat {
                            tail: tail.clone(),
                            repeats: new_rep,
                        };
                        idx += 1;
                    }
                    for (off, &v) in tail.iter().enumerate() {
                        items.insert(idx + off, WalkItem::Visit(v));
                    }
                    idx += tail.len(); // rescan the materialized copy
                }
            }
        }
    }

    let final_order = SymbolicOrder { items };
    debug_assert_eq!(final_order.first_vertex(), Some(inst.s()));
    debug_assert_eq!(final_order.last_vertex(), Some(t));
    let counts = final_order.visit_counts(n);
    for v in 0..n {
        if &counts[v] != inst.request(v) {
            return Err(Error::Internal(format!(
                "shortcut left vertex {v} at {} visits, want {}",
                counts[v],
                inst.request(v)
            )));
        }
    }

    let multigraph = final_order.to_multigraph(n);
    let total_cost = multigraph.cost(inst);
    assert!(
        total_cost <= before_cost,
        "shortcutting increased the cost"
    );
    let decomposition = decompose_path_cycles(&multigraph, inst.s(), t)?;
    Ok(TourSolution {
        multigraph,
        decomposition,
        total_cost,
    })
}

// ---------------------------------------------------------------------------
// JSON interchange formats
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    cost: Vec<Vec<String>>,
    requests: Vec<String>,
    s: usize,
    t: Option<usize>,
}

impl Instance {
    /// Parses the canonical instance JSON:
    /// `{"n", "cost": [["p/q"...]...], "requests": ["k"...], "s", "t"}`.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: RawInstance =
            serde_json::from_str(json).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
        if raw.cost.len() != raw.n {
            return Err(Error::Structural(format!(
                "n = {} but cost matrix has {} rows",
                raw.n,
                raw.cost.len()
            )));
        }
        let cost = raw
            .cost
            .iter()
            .map(|row| row.iter().map(|s| parse_rat(s)).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(Error::Parse)?;
        let requests = raw
            .requests
            .iter()
            .map(|s| parse_int(s))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(Error::Parse)?;
        Instance::new(cost, requests, raw.s, raw.t)
    }

    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            n: self.n,
            cost: self
                .cost
                .iter()
                .map(|row| row.iter().map(format_rat).collect())
                .collect(),
            requests: self.requests.iter().map(|r| r.to_string()).collect(),
            s: self.s,
            t: self.t,
        };
        serde_json::to_string_pretty(&raw).expect("instance serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct RawTour {
    edges: Vec<(usize, usize, String)>,
    cost: String,
}

impl TourSolution {
    /// Tour JSON: `{"edges": [[u, v, "mult"]...], "cost": "p/q"}`,
    /// edges sorted with `u <= v`.
    pub fn to_json(&self) -> String {
        let raw = RawTour {
            edges: self
                .multigraph
                .edges()
                .map(|(u, v, m)| (u, v, m.to_string()))
                .collect(),
            cost: format_rat(&self.total_cost),
        };
        serde_json::to_string_pretty(&raw).expect("tour serialization cannot fail")
    }
}

/// Parses tour JSON back into a multigraph and cost.
pub fn tour_from_json(json: &str, n: usize) -> Result<(CompactMultigraph, Rat)> {
    let raw: RawTour =
        serde_json::from_str(json).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
    let mut g = CompactMultigraph::new(n);
    for (u, v, m) in &raw.edges {
        if *u >= n || *v >= n {
            return Err(Error::Structural(format!("edge ({u},{v}) out of range")));
        }
        g.add(*u, *v, parse_int(m).map_err(Error::Structural)?);
    }
    let cost = parse_rat(&raw.cost).map_err(Error::Structural)?;
    Ok((g, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    /// Two cities, r = (2, 1), c(uv) = 1, loops 2. Optimal walk u,u,v costs 3.
    pub(crate) fn t2() -> Instance {
        Instance::new(
            vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]],
            vec![int(2), int(1)],
            0,
            Some(1),
        )
        .unwrap()
    }

    /// Three cities on a line: c(ab)=c(bc)=1, c(ac)=2, loops 2, r = 1.
    pub(crate) fn t3() -> Instance {
        Instance::new(
            vec![
                vec![rat(2), rat(1), rat(2)],
                vec![rat(1), rat(2), rat(1)],
                vec![rat(2), rat(1), rat(2)],
            ],
            vec![int(1), int(1), int(1)],
            0,
            Some(2),
        )
        .unwrap()
    }

    #[test]
    fn metric_validation_empty_on_line_instance() {
        assert!(t3().validate_metric().is_empty());
    }

    #[test]
    fn metric_validation_reports_triangle_violation() {
        let inst = Instance::new(
            vec![
                vec![rat(2), rat(1), rat(3)],
                vec![rat(1), rat(2), rat(1)],
                vec![rat(3), rat(1), rat(2)],
            ],
            vec![int(1), int(1), int(1)],
            0,
            Some(2),
        )
        .unwrap();
        let report = inst.validate_metric();
        assert!(report
            .iter()
            .any(|v| matches!(v, MetricViolation::Triangle { u: 0, v: 1, w: 2 })));
    }

    #[test]
    fn metric_validation_reports_loop_violation() {
        let inst = Instance::new(
            vec![
                vec![rat(2), rat(1), rat(2)],
                vec![rat(1), rat(5), rat(1)],
                vec![rat(2), rat(1), rat(2)],
            ],
            vec![int(1), int(1), int(1)],
            0,
            Some(2),
        )
        .unwrap();
        let report = inst.validate_metric();
        assert_eq!(report, vec![MetricViolation::SelfLoop { v: 1 }]);
    }

    #[test]
    fn structural_errors_are_not_metric_violations() {
        let asym = Instance::new(
            vec![vec![rat(0), rat(1)], vec![rat(2), rat(0)]],
            vec![int(1), int(1)],
            0,
            Some(1),
        );
        assert!(matches!(asym, Err(Error::Structural(_))));
        let neg = Instance::new(
            vec![vec![rat(0), rat(-1)], vec![rat(-1), rat(0)]],
            vec![int(1), int(1)],
            0,
            Some(1),
        );
        assert!(matches!(neg, Err(Error::Structural(_))));
    }

    #[test]
    fn degree_counts_loops_twice() {
        let mut g = CompactMultigraph::new(2);
        g.add_one(0, 0);
        g.add_one(0, 1);
        assert_eq!(g.degree(0), int(3));
        assert_eq!(g.degree(1), int(1));
        assert_eq!(CompactMultigraph::new(2).degree(0), int(0));
    }

    #[test]
    fn degree_handles_huge_multiplicities() {
        let mut g = CompactMultigraph::new(2);
        g.add(0, 1, int(1_000_000_000));
        assert_eq!(g.degree(0), int(1_000_000_000));
    }

    #[test]
    fn degree_sum_is_twice_edge_mass() {
        let mut g = CompactMultigraph::new(4);
        g.add(0, 1, int(5));
        g.add(2, 2, int(7));
        g.add(1, 3, int(2));
        let sum: Int = (0..4).map(|v| g.degree(v)).sum();
        assert_eq!(sum, g.total_multiplicity() * 2);
    }

    #[test]
    fn decompose_loop_plus_edge() {
        let mut g = CompactMultigraph::new(2);
        g.add_one(0, 0);
        g.add_one(0, 1);
        let d = decompose_path_cycles(&g, 0, 1).unwrap();
        assert_eq!(d.path, vec![0, 1]);
        assert_eq!(d.cycles, vec![(vec![0], int(1))]);
        assert_eq!(d.recompose(2), g);
    }

    #[test]
    fn decompose_single_edge() {
        let mut g = CompactMultigraph::new(2);
        g.add_one(0, 1);
        let d = decompose_path_cycles(&g, 0, 1).unwrap();
        assert_eq!(d.path, vec![0, 1]);
        assert!(d.cycles.is_empty());
    }

    #[test]
    fn decompose_tripled_edge() {
        let mut g = CompactMultigraph::new(2);
        g.add(0, 1, int(3));
        let d = decompose_path_cycles(&g, 0, 1).unwrap();
        assert_eq!(d.path, vec![0, 1]);
        assert_eq!(d.cycles, vec![(vec![0, 1], int(1))]);
        assert_eq!(d.recompose(2), g);
    }

    #[test]
    fn decompose_rejects_bad_parity() {
        let mut g = CompactMultigraph::new(3);
        g.add_one(0, 1);
        g.add_one(1, 2);
        g.add_one(0, 2);
        let err = decompose_path_cycles(&g, 0, 1).unwrap_err();
        assert!(matches!(err, Error::ParityViolation { vertex: 0 }));
    }

    #[test]
    fn decompose_big_multiplicities_is_compact() {
        let big = int(1_000_000_000);
        let mut g = CompactMultigraph::new(3);
        g.add(0, 1, &big * 2 + 1);
        g.add(1, 2, big.clone());
        g.add(2, 0, big.clone());
        let d = decompose_path_cycles(&g, 0, 1).unwrap();
        assert!(d.cycles.len() <= 9);
        assert_eq!(d.recompose(3), g);
    }

    #[test]
    fn eulerian_merge_path_with_loop() {
        let d = PathCycleDecomposition {
            path: vec![0, 1],
            cycles: vec![(vec![0], int(1))],
        };
        let order = eulerian_merge(&d, 2).unwrap();
        let g = order.to_multigraph(2);
        assert_eq!(g, d.recompose(2));
        assert_eq!(order.visit_counts(2), vec![int(2), int(1)]);
    }

    #[test]
    fn eulerian_merge_repeated_cycle() {
        let d = PathCycleDecomposition {
            path: vec![0, 1, 2],
            cycles: vec![(vec![1, 3], int(5))],
        };
        let order = eulerian_merge(&d, 4).unwrap();
        assert_eq!(order.to_multigraph(4), d.recompose(4));
        let counts = order.visit_counts(4);
        assert_eq!(counts[3], int(5));
    }

    #[test]
    fn eulerian_merge_detects_disconnection() {
        let d = PathCycleDecomposition {
            path: vec![0, 1],
            cycles: vec![(vec![2, 3], int(1))],
        };
        assert!(matches!(eulerian_merge(&d, 4), Err(Error::Disconnected)));
    }

    #[test]
    fn shortcut_identity_when_no_surplus() {
        let inst = t2();
        let d = PathCycleDecomposition {
            path: vec![0, 1],
            cycles: vec![(vec![0], int(1))],
        };
        let order = eulerian_merge(&d, 2).unwrap();
        let tour = shortcut(&order, &inst).unwrap();
        assert_eq!(tour.total_cost, rat(3));
        assert!(tour.multigraph.is_feasible_tour(&inst).0);
    }

    #[test]
    fn shortcut_removes_surplus_visit() {
        // Walk u,v,u,v on T2 has one extra visit of v; u,u,v costs 3.
        let inst = t2();
        let order = SymbolicOrder {
            items: vec![
                WalkItem::Visit(0),
                WalkItem::Visit(1),
                WalkItem::Visit(0),
                WalkItem::Visit(1),
            ],
        };
        let tour = shortcut(&order, &inst).unwrap();
        assert_eq!(tour.total_cost, rat(3));
        let (ok, issues) = tour.multigraph.is_feasible_tour(&inst);
        assert!(ok, "{issues:?}");
    }

    #[test]
    fn shortcut_splices_middle_vertex() {
        // s,a,b,a,t with r(a)=1: drop the second a, keep feasibility.
        let inst = Instance::new(
            vec![
                vec![rat(2), rat(1), rat(2), rat(1)],
                vec![rat(1), rat(2), rat(1), rat(2)],
                vec![rat(2), rat(1), rat(2), rat(1)],
                vec![rat(1), rat(2), rat(1), rat(2)],
            ],
            vec![int(1), int(1), int(1), int(1)],
            0,
            Some(3),
        )
        .unwrap();
        let order = SymbolicOrder {
            items: vec![
                WalkItem::Visit(0),
                WalkItem::Visit(1),
                WalkItem::Visit(2),
                WalkItem::Visit(1),
                WalkItem::Visit(3),
            ],
        };
        let tour = shortcut(&order, &inst).unwrap();
        let (ok, issues) = tour.multigraph.is_feasible_tour(&inst);
        assert!(ok, "{issues:?}");
        assert!(tour.total_cost <= rat(6));
    }

    #[test]
    fn shortcut_reports_deficit() {
        let inst = t2();
        let order = SymbolicOrder {
            items: vec![WalkItem::Visit(0), WalkItem::Visit(1)],
        };
        assert!(matches!(
            shortcut(&order, &inst),
            Err(Error::VisitDeficit { vertex: 0, .. })
        ));
    }

    #[test]
    fn tour_feasibility_diagnostics() {
        let inst = t2();
        let mut g = CompactMultigraph::new(2);
        g.add_one(0, 0);
        g.add_one(0, 1);
        assert!(g.is_feasible_tour(&inst).0);

        let mut disconnected = CompactMultigraph::new(2);
        disconnected.add_one(0, 0);
        disconnected.add_one(1, 1);
        let (ok, issues) = disconnected.is_feasible_tour(&inst);
        assert!(!ok);
        assert!(issues.iter().any(|m| m.contains("connected")));

        let mut wrong_degree = CompactMultigraph::new(2);
        wrong_degree.add(0, 1, int(3));
        let (ok, issues) = wrong_degree.is_feasible_tour(&inst);
        assert!(!ok);
        assert!(issues.iter().any(|m| m.contains("degree")));
    }

    #[test]
    fn cost_is_exact_on_huge_multiplicities() {
        let inst = Instance::new(
            vec![vec![rat(2), rat(3)], vec![rat(3), rat(2)]],
            vec![int(1), int(1)],
            0,
            Some(1),
        )
        .unwrap();
        let mut g = CompactMultigraph::new(2);
        g.add(0, 1, int(1_000_000_000));
        assert_eq!(g.cost(&inst), rat(3_000_000_000));
        assert_eq!(CompactMultigraph::new(2).cost(&inst), rat(0));
        let mut two = CompactMultigraph::new(2);
        two.add(0, 1, int(2));
        assert_eq!(two.cost(&inst).to_string(), "6");
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = t2();
        let parsed = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(inst, parsed);
        assert!(Instance::from_json("{not json").is_err());
    }

    #[test]
    fn tour_json_round_trip() {
        let inst = t2();
        let mut g = CompactMultigraph::new(2);
        g.add_one(0, 0);
        g.add_one(0, 1);
        let cost = g.cost(&inst);
        let tour = TourSolution {
            multigraph: g.clone(),
            decomposition: decompose_path_cycles(&g, 0, 1).unwrap(),
            total_cost: cost.clone(),
        };
        let (back, back_cost) = tour_from_json(&tour.to_json(), 2).unwrap();
        assert_eq!(back, g);
        assert_eq!(back_cost, cost);
    }
}

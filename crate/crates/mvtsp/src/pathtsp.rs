//! The 3/2-approximation pipeline for the metric many-visits path problem,
//! and the closed-tour variant via endpoint splitting.
//!
//! Pipeline: solve the many-visits Held-Karp relaxation to a vertex `x*`;
//! collect the family of `s`-`t`-cuts with `x*`-load below 3; build a
//! minimum-cost point `y` that is well-behaved on that family (load >= 3,
//! or exactly one unit edge across the cut) via a shortest path in a DAG
//! whose nodes are (cut, portal vertex) pairs and whose arc lengths are
//! restricted Held-Karp optima; turn `y` into a degree-bounded connected
//! multigraph `P` by iterative rounding with a unit cap on the witness
//! edges; fix parities with a minimum-cost matching; then take an Eulerian
//! traversal and shortcut down to the exact visit counts.

use crate::gpolymatroid::bounded_degree_connected_multigraph;
use crate::instance::{
    decompose_path_cycles, eulerian_merge, shortcut, CompactMultigraph, EdgeSpace, Instance,
    TourSolution,
};
use crate::lp::{held_karp_mv, held_karp_sub};
use crate::matching::min_cost_perfect_matching;
use crate::rational::{format_rat, int_to_rat, is_integral, Int, Rat};
use crate::{Error, Result};
use num_traits::{One, Zero};
use serde_json::json;
use std::collections::HashMap;

/// Largest instance for which cut enumeration stays exhaustive.
pub const MAX_EXHAUSTIVE_CUT_VERTICES: usize = 22;

/// The `s`-`t`-cuts whose `x*`-load is strictly below 3, as vertex masks
/// containing `s` and avoiding `t`, sorted by size then mask.
#[derive(Debug, Clone)]
pub struct CutFamily {
    pub n: usize,
    pub cuts: Vec<u32>,
    pub loads: Vec<Rat>,
}

impl CutFamily {
    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn members(&self, cut: u32) -> Vec<usize> {
        (0..self.n).filter(|v| cut >> v & 1 == 1).collect()
    }
}

fn cut_load(x: &[Rat], support: &[(usize, usize, usize)], cut: u32) -> Rat {
    let mut load = Rat::zero();
    for &(id, u, v) in support {
        if u != v && ((cut >> u & 1) != (cut >> v & 1)) {
            load += &x[id];
        }
    }
    load
}

/// Enumerates every `s`-`t`-cut with load strictly below 3 under `x`
/// (a global edge vector). Exhaustive over the `2^(n-2)` candidates.
pub fn enumerate_low_cuts(x: &[Rat], inst: &Instance) -> Result<CutFamily> {
    let n = inst.n();
    let t = inst.t_required()?;
    if n > MAX_EXHAUSTIVE_CUT_VERTICES {
        return Err(Error::CapsExceeded(format!(
            "cut enumeration is exhaustive and capped at {MAX_EXHAUSTIVE_CUT_VERTICES} vertices, got {n}"
        )));
    }
    let space = EdgeSpace::new(n);
    assert_eq!(x.len(), space.count());
    let support: Vec<(usize, usize, usize)> = space
        .iter()
        .filter(|&(id, _, _)| !x[id].is_zero())
        .collect();
    let free: Vec<usize> = (0..n).filter(|&v| v != inst.s() && v != t).collect();
    let three = Rat::from_integer(Int::from(3));
    let mut cuts = Vec::new();
    let mut loads = Vec::new();
    for pick in 0u32..(1 << free.len()) {
        let mut cut = 1u32 << inst.s();
        for (i, &v) in free.iter().enumerate() {
            if pick >> i & 1 == 1 {
                cut |= 1 << v;
            }
        }
        let load = cut_load(x, &support, cut);
        if load < three {
            cuts.push(cut);
            loads.push(load);
        }
    }
    let mut order: Vec<usize> = (0..cuts.len()).collect();
    order.sort_by_key(|&i| (cuts[i].count_ones(), cuts[i]));
    let cuts: Vec<u32> = order.iter().map(|&i| cuts[i]).collect();
    let loads: Vec<Rat> = order.iter().map(|&i| loads[i].clone()).collect();
    assert!(
        cuts.len() <= n.pow(4),
        "low-load cut family exceeded the n^4 bound"
    );
    Ok(CutFamily { n, cuts, loads })
}

/// Classification of one family cut under a candidate point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CutClass {
    /// Load at least 3.
    Type1,
    /// Load exactly 1, integral across the cut; carries the unit edge.
    Type2 { edge: (usize, usize) },
    Violation,
}

/// Exact per-cut classification of `y` against the family. The point is
/// good iff no cut is classified as a violation.
pub fn check_b_good(y: &[Rat], family: &CutFamily) -> (bool, Vec<CutClass>) {
    let space = EdgeSpace::new(family.n);
    let support: Vec<(usize, usize, usize)> = space
        .iter()
        .filter(|&(id, _, _)| !y[id].is_zero())
        .collect();
    let three = Rat::from_integer(Int::from(3));
    let mut classes = Vec::with_capacity(family.cuts.len());
    let mut ok = true;
    for &cut in &family.cuts {
        let load = cut_load(y, &support, cut);
        let class = if load >= three {
            CutClass::Type1
        } else if load.is_one() {
            let crossing: Vec<&(usize, usize, usize)> = support
                .iter()
                .filter(|&&(_, u, v)| u != v && ((cut >> u & 1) != (cut >> v & 1)))
                .collect();
            if crossing.iter().all(|&&(id, _, _)| is_integral(&y[id])) {
                assert_eq!(crossing.len(), 1, "unit integral cut must cross one edge");
                let &&(_, u, v) = crossing.first().unwrap();
                CutClass::Type2 { edge: (u, v) }
            } else {
                CutClass::Violation
            }
        } else {
            CutClass::Violation
        };
        if class == CutClass::Violation {
            ok = false;
        }
        classes.push(class);
    }
    (ok, classes)
}

/// One link of the nested chain: the cut, its inside portal `v`, and its
/// outside portal `u` (the unit edge is `v u`).
#[derive(Debug, Clone)]
pub struct ChainLink {
    pub cut: u32,
    pub v: usize,
    pub u: usize,
}

/// A minimum-cost point that is well-behaved on the cut family, with its
/// nested chain of unit-edge cuts.
#[derive(Debug, Clone)]
pub struct BGoodPoint {
    /// Global edge vector.
    pub y: Vec<Rat>,
    pub value: Rat,
    pub chain: Vec<ChainLink>,
    pub classes: Vec<CutClass>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    /// Departure side: (cut, vertex outside the cut); the source is
    /// `(empty, s)`.
    Plus(u32, usize),
    /// Arrival side: (cut, vertex inside the cut); the target is
    /// `(full, t)`.
    Minus(u32, usize),
}

/// Computes a minimum-cost point `y` with, on every family cut, either load
/// at least 3 or a single unit edge, by a shortest-path dynamic program over
/// (cut, portal) nodes. Arc lengths between nested cuts are optima of the
/// Held-Karp relaxation restricted to the difference set, with load-3 side
/// constraints on sandwiched family cuts.
pub fn compute_b_good_point(family: &CutFamily, inst: &Instance) -> Result<BGoodPoint> {
    let n = inst.n();
    let t = inst.t_required()?;
    let s = inst.s();
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let space = EdgeSpace::new(n);

    // Node order: cuts by (size, mask); within a cut, Minus nodes before
    // Plus nodes (arcs go Plus(smaller) -> Minus(bigger) -> Plus(same)).
    let mut nodes: Vec<Node> = vec![Node::Plus(0, s)];
    for &cut in &family.cuts {
        for v in 0..n {
            if cut >> v & 1 == 1 {
                nodes.push(Node::Minus(cut, v));
            }
        }
        for u in 0..n {
            if cut >> u & 1 == 0 {
                nodes.push(Node::Plus(cut, u));
            }
        }
    }
    nodes.push(Node::Minus(full, t));
    let index: HashMap<Node, usize> = nodes.iter().enumerate().map(|(i, &nd)| (nd, i)).collect();

    let mut dist: Vec<Option<Rat>> = vec![None; nodes.len()];
    let mut pred: Vec<usize> = vec![usize::MAX; nodes.len()];
    // Segment solutions attached to the Minus endpoint of each relaxed arc.
    let mut segment: Vec<Option<crate::lp::SubHkSolution>> = vec![None; nodes.len()];
    dist[0] = Some(Rat::zero());

    // Memoized restricted LP per (difference mask, portals, side family).
    let mut lp_cache: HashMap<(u32, usize, usize, Vec<u32>), Option<crate::lp::SubHkSolution>> =
        HashMap::new();

    let plus_cuts: Vec<u32> = std::iter::once(0u32).chain(family.cuts.iter().copied()).collect();
    let minus_cuts: Vec<u32> = family.cuts.iter().copied().chain(std::iter::once(full)).collect();

    for &bminus in &minus_cuts {
        // Relax all arcs into Minus(bminus, v).
        for &bplus in &plus_cuts {
            if bplus & !bminus != 0 || bplus == bminus {
                continue;
            }
            let w_mask = bminus & !bplus;
            let w_verts: Vec<usize> = (0..n).filter(|v| w_mask >> v & 1 == 1).collect();
            for &u in &w_verts {
                let from = match index.get(&Node::Plus(bplus, u)) {
                    Some(&i) => i,
                    None => continue,
                };
                let Some(base) = dist[from].clone() else {
                    continue;
                };
                for &v in &w_verts {
                    if bminus == full && v != t {
                        continue;
                    }
                    let to = index[&Node::Minus(bminus, v)];
                    // Family cuts sandwiched between the pair, separating
                    // u from v, must carry load at least 3.
                    let sides: Vec<u32> = family
                        .cuts
                        .iter()
                        .copied()
                        .filter(|&b| {
                            bplus & !b == 0
                                && b & !bminus == 0
                                && b >> u & 1 == 1
                                && b >> v & 1 == 0
                        })
                        .collect();
                    let key = (w_mask, u, v, sides.clone());
                    let sub = lp_cache
                        .entry(key)
                        .or_insert_with(|| {
                            let side_sets: Vec<Vec<usize>> = sides
                                .iter()
                                .map(|&b| (0..n).filter(|x| b >> x & 1 == 1).collect())
                                .collect();
                            held_karp_sub(inst, &w_verts, u, v, &side_sets)
                                .expect("restricted relaxation solve failed")
                        })
                        .clone();
                    let Some(sub) = sub else {
                        continue; // empty polytope: arc length is infinite
                    };
                    let cand = &base + &sub.value;
                    if dist[to].as_ref().is_none_or(|d| cand < *d) {
                        dist[to] = Some(cand);
                        pred[to] = from;
                        segment[to] = Some(sub);
                    }
                }
            }
        }
        // Relax the within-cut arcs Minus(bminus, v) -> Plus(bminus, u).
        if bminus != full {
            for v in 0..n {
                if bminus >> v & 1 == 0 {
                    continue;
                }
                let from = index[&Node::Minus(bminus, v)];
                let Some(base) = dist[from].clone() else {
                    continue;
                };
                for u in 0..n {
                    if bminus >> u & 1 == 1 {
                        continue;
                    }
                    let to = index[&Node::Plus(bminus, u)];
                    let cand = &base + inst.cost(v, u);
                    if dist[to].as_ref().is_none_or(|d| cand < *d) {
                        dist[to] = Some(cand);
                        pred[to] = from;
                        segment[to] = None;
                    }
                }
            }
        }
    }

    let target = index[&Node::Minus(full, t)];
    let best = dist[target].clone().ok_or_else(|| {
        Error::Internal("no finite traversal of the cut chain exists".into())
    })?;

    // Walk the predecessor chain back to the source.
    let mut path_nodes = vec![target];
    let mut at = target;
    while at != 0 {
        at = pred[at];
        path_nodes.push(at);
    }
    path_nodes.reverse();

    let mut y = vec![Rat::zero(); space.count()];
    let mut chain = Vec::new();
    for (step, &node_idx) in path_nodes.iter().enumerate().skip(1) {
        match nodes[node_idx] {
            Node::Minus(..) => {
                let sub = segment[node_idx]
                    .as_ref()
                    .expect("relaxed arcs carry their segment solution");
                sub.add_into(&mut y, &space);
            }
            Node::Plus(cut, u) => {
                let Node::Minus(prev_cut, v) = nodes[path_nodes[step - 1]] else {
                    return Err(Error::Internal("traversal must alternate node kinds".into()));
                };
                debug_assert_eq!(prev_cut, cut);
                y[space.id(v, u)] += Rat::one();
                chain.push(ChainLink { cut, v, u });
            }
        }
    }

    let value: Rat = space.iter().map(|(id, u, v)| inst.cost(u, v) * &y[id]).sum();
    assert_eq!(value, best, "assembled point must match the path length");

    // Degree equalities of the Held-Karp relaxation.
    for v in 0..n {
        let mut deg = Rat::zero();
        for (id, a, b) in space.iter() {
            if a == v && b == v {
                deg += &y[id];
                deg += &y[id];
            } else if a == v || b == v {
                deg += &y[id];
            }
        }
        assert_eq!(
            deg,
            int_to_rat(&inst.degree_target(v)),
            "degree equality failed at {v}"
        );
    }
    let (good, classes) = check_b_good(&y, family);
    assert!(good, "dynamic program produced a non-good point");
    // The unit-edge cuts must be exactly the chain, and nested.
    let mut type2: Vec<u32> = family
        .cuts
        .iter()
        .zip(&classes)
        .filter(|(_, c)| matches!(c, CutClass::Type2 { .. }))
        .map(|(&b, _)| b)
        .collect();
    type2.sort_by_key(|b| b.count_ones());
    let chain_cuts: Vec<u32> = chain.iter().map(|l| l.cut).collect();
    assert_eq!(type2, chain_cuts, "unit-edge cuts must equal the chain");
    for w in chain_cuts.windows(2) {
        assert!(w[0] & !w[1] == 0 && w[0] != w[1], "chain must be strictly nested");
    }

    Ok(BGoodPoint {
        y,
        value,
        chain,
        classes,
    })
}

/// Builds the constrained multigraph `P`: connected, `r(V) - 1` edges,
/// degree at least `2 r(v) - 1` (`2 r(v) - 2` at the endpoints), supported
/// on `supp(y)`, with the chain's witness edges capped at multiplicity one.
pub fn build_p(good: &BGoodPoint, inst: &Instance) -> Result<CompactMultigraph> {
    let n = inst.n();
    let t = inst.t_required()?;
    let space = EdgeSpace::new(n);
    let rho: Vec<Int> = (0..n)
        .map(|v| {
            let two_r = inst.request(v) + inst.request(v);
            if v == inst.s() || v == t {
                two_r - 1
            } else {
                two_r
            }
        })
        .collect();
    let witness: Vec<(usize, usize)> = good
        .classes
        .iter()
        .filter_map(|c| match c {
            CutClass::Type2 { edge } => Some(*edge),
            _ => None,
        })
        .collect();
    let mut upper: Vec<Option<Int>> = vec![None; space.count()];
    for (id, u, v) in space.iter() {
        if good.y[id].is_zero() {
            upper[id] = Some(Int::zero());
        } else if witness.contains(&(u, v)) || witness.contains(&(v, u)) {
            upper[id] = Some(Int::one());
        }
    }
    let cost: Vec<Rat> = space.iter().map(|(_, u, v)| inst.cost(u, v).clone()).collect();
    let (p_graph, outcome) = bounded_degree_connected_multigraph(
        n,
        &cost,
        &rho,
        vec![Int::zero(); space.count()],
        upper,
    )?;
    let p_cost = p_graph.cost(inst);
    assert!(
        p_cost <= good.value,
        "constrained multigraph exceeded the good point's cost"
    );
    assert!(outcome.initial_lp_value <= good.value);
    Ok(p_graph)
}

/// Minimum-cost perfect matching on `odd(P) symmetric-difference {s, t}`.
pub fn parity_matching(
    p_graph: &CompactMultigraph,
    inst: &Instance,
) -> Result<(Vec<(usize, usize)>, Rat)> {
    let t = inst.t_required()?;
    let two = Int::from(2);
    let mut q: Vec<usize> = (0..inst.n())
        .filter(|&v| {
            let odd = p_graph.degree(v) % &two == Int::one();
            odd != (v == inst.s() || v == t)
        })
        .collect();
    q.sort_unstable();
    if !q.len().is_multiple_of(2) {
        return Err(Error::Internal("odd parity-repair set".into()));
    }
    let matching = min_cost_perfect_matching(&q, |a, b| inst.cost(a, b).clone())?;
    let cost: Rat = matching.iter().map(|&(a, b)| inst.cost(a, b).clone()).sum();
    Ok((matching, cost))
}

/// Everything a pipeline run produces, for reporting and verification.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub tour: TourSolution,
    pub hk_vector: Vec<Rat>,
    pub hk_value: Rat,
    pub family: CutFamily,
    pub good: BGoodPoint,
    pub p_graph: CompactMultigraph,
    pub p_cost: Rat,
    pub matching: Vec<(usize, usize)>,
    pub matching_cost: Rat,
}

impl PipelineRun {
    /// Pipeline report JSON; oracle fields are filled when available.
    pub fn report_json(&self, oracle_cost: Option<&Rat>) -> String {
        let ratio = oracle_cost.map(|oc| format_rat(&(&self.tour.total_cost / oc)));
        let chain: Vec<Vec<usize>> = self
            .good
            .chain
            .iter()
            .map(|l| self.family.members(l.cut))
            .collect();
        serde_json::to_string_pretty(&json!({
            "x_star_value": format_rat(&self.hk_value),
            "b_family_size": self.family.len(),
            "type2_chain": chain,
            "y_value": format_rat(&self.good.value),
            "p_cost": format_rat(&self.p_cost),
            "matching_cost": format_rat(&self.matching_cost),
            "final_cost": format_rat(&self.tour.total_cost),
            "oracle_cost": oracle_cost.map(format_rat),
            "ratio": ratio,
        }))
        .expect("report serialization cannot fail")
    }
}

/// The 3/2-approximation for the metric many-visits path problem.
pub fn approx_15(inst: &Instance) -> Result<PipelineRun> {
    let t = inst.t_required()?;
    let n = inst.n();
    assert!(n >= 2);

    let (x_star, hk_value, _vertex) = held_karp_mv(inst)?;
    let family = enumerate_low_cuts(&x_star, inst)?;
    let good = compute_b_good_point(&family, inst)?;
    let p_graph = build_p(&good, inst)?;

    // Chain cuts are crossed exactly once by P, splitting the repair set
    // evenly.
    let two = Int::from(2);
    for link in &good.chain {
        let crossing: Int = p_graph
            .edges()
            .filter(|&(u, v, _)| u != v && ((link.cut >> u & 1) != (link.cut >> v & 1)))
            .map(|(_, _, m)| m.clone())
            .sum();
        assert!(crossing.is_one(), "chain cut crossed {crossing} times");
        let odd_inside = (0..n)
            .filter(|&v| link.cut >> v & 1 == 1)
            .filter(|&v| {
                let odd = p_graph.degree(v) % &two == Int::one();
                odd != (v == inst.s() || v == t)
            })
            .count();
        assert!(odd_inside % 2 == 0, "chain cut splits the repair set oddly");
    }

    let (matching, matching_cost) = parity_matching(&p_graph, inst)?;
    // Matching cost bound via the midpoint of x* and y.
    let quarter = Rat::new(Int::one(), Int::from(4));
    assert!(
        matching_cost <= (&hk_value + &good.value) * quarter,
        "parity matching exceeded its certified bound"
    );

    let mut joined = p_graph.clone();
    for &(a, b) in &matching {
        joined.add_one(a, b);
    }
    let p_cost = p_graph.cost(inst);
    let decomp = decompose_path_cycles(&joined, inst.s(), t)?;
    let order = eulerian_merge(&decomp, n)?;
    let tour = shortcut(&order, inst)?;
    assert!(tour.total_cost <= &p_cost + &matching_cost);
    let (ok, issues) = tour.multigraph.is_feasible_tour(inst);
    if !ok {
        return Err(Error::Internal(format!(
            "pipeline produced an infeasible tour: {issues:?}"
        )));
    }

    Ok(PipelineRun {
        tour,
        hk_vector: x_star,
        hk_value,
        family,
        good,
        p_graph,
        p_cost,
        matching,
        matching_cost,
    })
}

/// The 3/2-approximation for the closed variant: split an arbitrary city
/// into a departure copy (keeping `r(v)`) and an arrival copy with one
/// visit, run the path pipeline, and identify the copies again.
pub fn mvtsp_15(inst: &Instance) -> Result<(TourSolution, PipelineRun)> {
    if inst.t().is_some() {
        return Err(Error::Structural(
            "closed variant expects an instance without endpoints".into(),
        ));
    }
    let n = inst.n();
    assert!(n >= 2);
    let split = n; // arrival copy of city 0 appended at index n
    let m = n + 1;
    let mut cost = vec![vec![Rat::zero(); m]; m];
    for a in 0..n {
        for b in 0..n {
            cost[a][b] = inst.cost(a, b).clone();
        }
    }
    for a in 0..n {
        cost[a][split] = inst.cost(a, 0).clone();
        cost[split][a] = inst.cost(a, 0).clone();
    }
    cost[split][split] = inst.cost(0, 0).clone();
    cost[0][split] = inst.cost(0, 0).clone();
    cost[split][0] = inst.cost(0, 0).clone();
    let mut requests: Vec<Int> = (0..n).map(|v| inst.request(v).clone()).collect();
    requests.push(Int::one());
    let path_inst = Instance::new(cost, requests, 0, Some(split))?;
    assert!(
        path_inst.validate_metric().is_empty(),
        "split instance must stay metric"
    );

    let run = approx_15(&path_inst)?;

    // Identify the copies: edges to the arrival copy fold back onto city 0.
    let mut folded = CompactMultigraph::new(n);
    for (u, v, mult) in run.tour.multigraph.edges() {
        let fu = if u == split { 0 } else { u };
        let fv = if v == split { 0 } else { v };
        folded.add(fu, fv, mult.clone());
    }
    let folded_cost = folded.cost(inst);
    assert_eq!(folded_cost, run.tour.total_cost, "folding changed the cost");
    for v in 0..n {
        assert_eq!(
            folded.degree(v),
            inst.request(v) + inst.request(v),
            "closed tour degree mismatch at {v}"
        );
    }
    assert!(folded.support_connected());
    let decomposition = crate::instance::decompose_closed(&folded)?;
    let tour = TourSolution {
        multigraph: folded,
        decomposition,
        total_cost: folded_cost,
    };
    Ok((tour, run))
}

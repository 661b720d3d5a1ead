//! Exact reference solvers for desk-scale verification.
//!
//! These are deliberately simple and provably correct within hard caps:
//! exhaustive search over degree-feasible multigraphs for the many-visits
//! problem, a subset DP for single-visit paths, and an explicit-constraint
//! LP mirror of the cutting-plane solver. Tests and the CLI's `exact` mode
//! are the only intended users; a cap hit fails loudly instead of skipping.

use crate::instance::{CompactMultigraph, EdgeSpace, Instance};
use crate::lp::{con, solve_min, Cmp, LinConstraint};
use crate::rational::{Int, Rat};
use crate::{Error, Result};
use num_traits::{One, Zero};

/// Enumeration limits for the exhaustive solvers.
#[derive(Debug, Clone)]
pub struct OracleCaps {
    pub max_n: usize,
    pub max_request: Int,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_n: 5,
            max_request: Int::from(3),
        }
    }
}

impl OracleCaps {
    fn admit(&self, inst: &Instance) -> Result<()> {
        if inst.n() > self.max_n {
            return Err(Error::CapsExceeded(format!(
                "n = {} exceeds oracle cap {}",
                inst.n(),
                self.max_n
            )));
        }
        if let Some(r) = (0..inst.n()).map(|v| inst.request(v)).max() {
            if *r > self.max_request {
                return Err(Error::CapsExceeded(format!(
                    "request {r} exceeds oracle cap {}",
                    self.max_request
                )));
            }
        }
        Ok(())
    }
}

struct Search<'a> {
    inst: &'a Instance,
    edges: &'a [(usize, usize)],
    mult: Vec<i64>,
    best: Option<(Rat, Vec<i64>)>,
}

impl Search<'_> {
    fn run(&mut self, idx: usize, rem: &mut [i64], cost_so_far: Rat) {
        if let Some((best, _)) = &self.best {
            if &cost_so_far >= best {
                return;
            }
        }
        if idx == self.edges.len() {
            debug_assert!(rem.iter().all(|&r| r == 0));
            if self.connected() {
                self.best = Some((cost_so_far, self.mult.clone()));
            }
            return;
        }
        let (u, v) = self.edges[idx];
        let n = rem.len();
        let closes_row = v == n - 1;
        if u == v {
            if rem[u] % 2 != 0 && closes_row {
                return; // a lone loop cannot fix odd remaining degree
            }
            let choices: Vec<i64> = if closes_row {
                // Loop at the last vertex must absorb all remaining degree.
                vec![rem[u] / 2]
            } else {
                (0..=rem[u] / 2).collect()
            };
            for k in choices {
                self.mult[idx] = k;
                rem[u] -= 2 * k;
                let c = self.inst.cost(u, u) * Rat::from_integer(Int::from(k));
                self.run(idx + 1, rem, &cost_so_far + c);
                rem[u] += 2 * k;
            }
            self.mult[idx] = 0;
        } else {
            let choices: Vec<i64> = if closes_row {
                // Final regular edge of u's row: forced to close u out.
                if rem[u] <= rem[v] {
                    vec![rem[u]]
                } else {
                    vec![]
                }
            } else {
                (0..=rem[u].min(rem[v])).collect()
            };
            for k in choices {
                self.mult[idx] = k;
                rem[u] -= k;
                rem[v] -= k;
                let c = self.inst.cost(u, v) * Rat::from_integer(Int::from(k));
                self.run(idx + 1, rem, &cost_so_far + c);
                rem[u] += k;
                rem[v] += k;
            }
            self.mult[idx] = 0;
        }
    }

    fn connected(&self) -> bool {
        let n = self.inst.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for (idx, &(u, v)) in self.edges.iter().enumerate() {
            if self.mult[idx] > 0 && u != v {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                parent[ru] = rv;
            }
        }
        let root = find(&mut parent, 0);
        (1..n).all(|v| find(&mut parent, v) == root)
    }
}

/// Exhaustive optimum over all connected multigraphs with exact degrees
/// `target(v)`, minimizing cost.
fn exhaustive_min_multigraph(
    inst: &Instance,
    targets: &[Int],
) -> Option<(Rat, CompactMultigraph)> {
    let n = inst.n();
    let space = EdgeSpace::new(n);
    let edge_list: Vec<(usize, usize)> = space.iter().map(|(_, u, v)| (u, v)).collect();
    let mut remaining: Vec<i64> = targets
        .iter()
        .map(|t| i64::try_from(t).expect("targets within cap range"))
        .collect();
    if remaining.iter().sum::<i64>() % 2 != 0 {
        return None;
    }
    let mut search = Search {
        inst,
        edges: &edge_list,
        mult: vec![0; edge_list.len()],
        best: None,
    };
    search.run(0, &mut remaining, Rat::zero());
    let (cost, mult) = search.best?;
    let mut g = CompactMultigraph::new(n);
    for (idx, &(u, v)) in edge_list.iter().enumerate() {
        if mult[idx] > 0 {
            g.add(u, v, Int::from(mult[idx]));
        }
    }
    Some((cost, g))
}

/// Exhaustive optimum of the many-visits path problem: minimum-cost
/// connected multigraph with degrees `2 r(v)` (`2 r(v) - 1` at the
/// endpoints).
pub fn exact_mvtsp_path(inst: &Instance, caps: &OracleCaps) -> Result<(Rat, CompactMultigraph)> {
    caps.admit(inst)?;
    inst.t_required()?;
    let targets: Vec<Int> = (0..inst.n()).map(|v| inst.degree_target(v)).collect();
    exhaustive_min_multigraph(inst, &targets)
        .ok_or_else(|| Error::Internal("path instance has no feasible multigraph".into()))
}

/// Exhaustive optimum of the closed many-visits problem: degrees `2 r(v)`
/// everywhere.
pub fn exact_mvtsp_cycle(inst: &Instance, caps: &OracleCaps) -> Result<(Rat, CompactMultigraph)> {
    caps.admit(inst)?;
    let targets: Vec<Int> = (0..inst.n())
        .map(|v| inst.request(v) + inst.request(v))
        .collect();
    exhaustive_min_multigraph(inst, &targets)
        .ok_or_else(|| Error::Internal("closed instance has no feasible multigraph".into()))
}

/// Subset-DP optimum for single-visit path instances (`r == 1`):
/// returns the cost and an optimal vertex order from `s` to `t`.
pub fn exact_single_visit_path(inst: &Instance, max_n: usize) -> Result<(Rat, Vec<usize>)> {
    let n = inst.n();
    if n > max_n {
        return Err(Error::CapsExceeded(format!(
            "n = {n} exceeds single-visit DP cap {max_n}"
        )));
    }
    if (0..n).any(|v| !inst.request(v).is_one()) {
        return Err(Error::Structural(
            "single-visit solver requires unit requests".into(),
        ));
    }
    let s = inst.s();
    let t = inst.t_required()?;

    let full = (1usize << n) - 1;
    let mut dp: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; 1 << n];
    let mut parent: Vec<Vec<usize>> = vec![vec![usize::MAX; n]; 1 << n];
    dp[1 << s][s] = Some(Rat::zero());
    for mask in 0..=full {
        if mask & (1 << s) == 0 {
            continue;
        }
        for last in 0..n {
            let Some(cost) = dp[mask][last].clone() else {
                continue;
            };
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = &cost + inst.cost(last, next);
                let cell = &mut dp[mask | (1 << next)][next];
                if cell.as_ref().is_none_or(|c| cand < *c) {
                    *cell = Some(cand);
                    parent[mask | (1 << next)][next] = last;
                }
            }
        }
    }
    let best = dp[full][t]
        .clone()
        .ok_or_else(|| Error::Internal("subset DP missed the full mask".into()))?;
    let mut order = vec![t];
    let mut mask = full;
    let mut at = t;
    while at != s || mask != (1 << s) {
        let prev = parent[mask][at];
        mask ^= 1 << at;
        at = prev;
        order.push(at);
    }
    order.reverse();
    Ok((best, order))
}

/// Which polytope the explicit-constraint reference should build.
#[derive(Debug, Clone, Copy)]
pub enum ReferencePolytope {
    /// The many-visits Held-Karp relaxation of the path problem.
    HeldKarpMv,
}

/// Solves the selected polytope once with every cut constraint written out
/// explicitly (no separation). Exact mirror for differential tests.
pub fn explicit_lp_reference(
    inst: &Instance,
    which: ReferencePolytope,
    max_n: usize,
) -> Result<Rat> {
    let n = inst.n();
    if n > max_n {
        return Err(Error::CapsExceeded(format!(
            "n = {n} exceeds explicit-LP cap {max_n}"
        )));
    }
    match which {
        ReferencePolytope::HeldKarpMv => {
            let s = inst.s();
            let t = inst.t_required()?;
            let space = EdgeSpace::new(n);
            let objective: Vec<Rat> = space
                .iter()
                .map(|(_, u, v)| inst.cost(u, v).clone())
                .collect();
            let mut constraints: Vec<LinConstraint> = Vec::new();
            for v in 0..n {
                let mut coeffs = Vec::new();
                for (id, a, b) in space.iter() {
                    if a == v && b == v {
                        coeffs.push((id, Rat::from_integer(Int::from(2))));
                    } else if a == v || b == v {
                        coeffs.push((id, Rat::one()));
                    }
                }
                constraints.push(con(
                    coeffs,
                    Cmp::Eq,
                    Rat::from_integer(inst.degree_target(v)),
                    format!("degree v{v}"),
                ));
            }
            for mask in 1u32..(1 << n) - 1 {
                let inside = |v: usize| mask >> v & 1 == 1;
                let rhs = if inside(s) != inside(t) { 1 } else { 2 };
                let coeffs: Vec<(usize, Rat)> = space
                    .iter()
                    .filter(|&(_, u, v)| u != v && (inside(u) != inside(v)))
                    .map(|(id, _, _)| (id, Rat::one()))
                    .collect();
                constraints.push(con(
                    coeffs,
                    Cmp::Ge,
                    Rat::from_integer(Int::from(rhs)),
                    format!("cut {mask:#b}"),
                ));
            }
            let sol = solve_min(space.count(), &objective, &constraints)?;
            Ok(sol.value)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn t2() -> Instance {
        Instance::new(
            vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]],
            vec![int(2), int(1)],
            0,
            Some(1),
        )
        .unwrap()
    }

    fn t3() -> Instance {
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
    fn t2_optimum_is_three() {
        let (cost, g) = exact_mvtsp_path(&t2(), &OracleCaps::default()).unwrap();
        assert_eq!(cost, rat(3));
        assert!(g.is_feasible_tour(&t2()).0);
    }

    #[test]
    fn t3_optimum_is_two() {
        let (cost, _) = exact_mvtsp_path(&t3(), &OracleCaps::default()).unwrap();
        assert_eq!(cost, rat(2));
    }

    #[test]
    fn uniform_cost_shift_raises_optimum_by_edge_count() {
        // Adding 10 to every cost (still metric) adds 10 (r(V) - 1).
        let base = t3();
        let shifted = Instance::new(
            (0..3)
                .map(|i| (0..3).map(|j| base.cost(i, j) + rat(10)).collect())
                .collect(),
            base.requests().to_vec(),
            0,
            Some(2),
        )
        .unwrap();
        let (c0, _) = exact_mvtsp_path(&base, &OracleCaps::default()).unwrap();
        let (c1, _) = exact_mvtsp_path(&shifted, &OracleCaps::default()).unwrap();
        assert_eq!(c1, c0 + rat(20));
    }

    #[test]
    fn caps_fail_loudly() {
        let inst = Instance::new(
            vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]],
            vec![int(100), int(1)],
            0,
            Some(1),
        )
        .unwrap();
        assert!(matches!(
            exact_mvtsp_path(&inst, &OracleCaps::default()),
            Err(Error::CapsExceeded(_))
        ));
    }

    #[test]
    fn single_visit_dp_matches_exhaustive() {
        let (cost, order) = exact_single_visit_path(&t3(), 12).unwrap();
        assert_eq!(cost, rat(2));
        assert_eq!(order, vec![0, 1, 2]);

        let unit2 = Instance::new(
            vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]],
            vec![int(1), int(1)],
            0,
            Some(1),
        )
        .unwrap();
        let (cost2, order2) = exact_single_visit_path(&unit2, 12).unwrap();
        assert_eq!(cost2, rat(1));
        assert_eq!(order2, vec![0, 1]);

        let (ex, _) = exact_mvtsp_path(&t3(), &OracleCaps::default()).unwrap();
        assert_eq!(cost, ex);
    }

    #[test]
    fn cycle_oracle_doubles_the_two_city_edge() {
        let inst = Instance::new(
            vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]],
            vec![int(1), int(1)],
            0,
            None,
        )
        .unwrap();
        let (cost, g) = exact_mvtsp_cycle(&inst, &OracleCaps::default()).unwrap();
        assert_eq!(cost, rat(2));
        assert_eq!(g.get(0, 1), int(2));
    }

    #[test]
    fn explicit_reference_matches_separation_solver() {
        let v = explicit_lp_reference(&t3(), ReferencePolytope::HeldKarpMv, 10).unwrap();
        assert_eq!(v, rat(2));
        let (_, sep, _) = crate::lp::held_karp_mv(&t3()).unwrap();
        assert_eq!(v, sep);
    }
}

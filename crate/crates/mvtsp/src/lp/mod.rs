//! Cutting-plane linear programming over exact rationals.
//!
//! The solver keeps an explicit constraint pool, asks pluggable separation
//! oracles for violated constraints at the current optimum, and re-solves
//! until no oracle objects. Because the simplex core returns basic feasible
//! solutions, the final point is a vertex of the full oracle-defined
//! polytope; a purification pass guards the degenerate corner cases and is
//! exposed for direct use.
//!
//! On top of the generic layer sit the two relaxation families used by the
//! approximation pipeline: the many-visits Held-Karp polytope (open and
//! closed variants, on any vertex subset) and its cut-restricted versions.

pub mod cuts;
mod simplex;

use crate::instance::{EdgeSpace, Instance};
use crate::rational::{format_rat, Int, Rat};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde_json::json;

pub use simplex::{solve_min, LpSolution};

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// A sparse linear constraint `sum coeffs . x  cmp  rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinConstraint {
    pub coeffs: Vec<(usize, Rat)>,
    pub cmp: Cmp,
    pub rhs: Rat,
    pub label: String,
}

impl LinConstraint {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }

    pub fn satisfied_by(&self, x: &[Rat]) -> bool {
        let lhs = self.eval(x);
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }

    pub fn tight_at(&self, x: &[Rat]) -> bool {
        self.eval(x) == self.rhs
    }
}

/// Shorthand constructor.
pub fn con(
    coeffs: Vec<(usize, Rat)>,
    cmp: Cmp,
    rhs: Rat,
    label: impl Into<String>,
) -> LinConstraint {
    LinConstraint {
        coeffs,
        cmp,
        rhs,
        label: label.into(),
    }
}

/// Witness that the accumulated row system has no solution with `x >= 0`.
///
/// Carries the normalized rows so it can be checked independently:
/// multipliers are sign-feasible, combine the rows into a non-positive
/// functional, yet combine the right-hand sides into something positive.
#[derive(Debug, Clone)]
pub struct InfeasibilityCertificate {
    pub row_multipliers: Vec<Rat>,
    senses: Vec<Cmp>,
    normalized_rows: Vec<Vec<Rat>>,
    normalized_rhs: Vec<Rat>,
}

impl InfeasibilityCertificate {
    pub fn verify(&self, num_vars: usize) -> bool {
        let m = self.row_multipliers.len();
        if self.senses.len() != m || self.normalized_rows.len() != m {
            return false;
        }
        for (y, s) in self.row_multipliers.iter().zip(&self.senses) {
            match s {
                Cmp::Le if y.is_positive() => return false,
                Cmp::Ge if y.is_negative() => return false,
                _ => {}
            }
        }
        for j in 0..num_vars {
            let combined: Rat = (0..m)
                .map(|i| &self.row_multipliers[i] * &self.normalized_rows[i][j])
                .sum();
            if combined.is_positive() {
                return false;
            }
        }
        let rhs_combo: Rat = (0..m)
            .map(|i| &self.row_multipliers[i] * &self.normalized_rhs[i])
            .sum();
        rhs_combo.is_positive()
    }
}

/// A separation oracle: given a candidate point, return one violated valid
/// constraint or `None`. Oracles must be pure.
pub trait SeparationOracle {
    fn separate(&self, x: &[Rat]) -> Option<LinConstraint>;
    fn name(&self) -> &'static str {
        "oracle"
    }
}

/// A linear program with explicit rows plus oracle-defined rows.
pub struct LinearProgram {
    pub num_vars: usize,
    /// Minimized.
    pub objective: Vec<Rat>,
    pub constraints: Vec<LinConstraint>,
    pub oracles: Vec<Box<dyn SeparationOracle>>,
}

/// An optimal vertex of the full (oracle-defined) polytope.
#[derive(Debug, Clone)]
pub struct LpVertexSolution {
    pub x: Vec<Rat>,
    pub value: Rat,
    /// Tight rows (including variable bounds) of full column rank.
    pub tight_rank: usize,
    /// The accumulated explicit rows that witnessed optimality.
    pub pool: Vec<LinConstraint>,
}

/// Solves to an optimal vertex: separate, re-solve, purify until no oracle
/// reports a violation and the tight rows have full rank.
pub fn solve_with_separation(lp: &LinearProgram) -> Result<LpVertexSolution> {
    let mut pool = lp.constraints.clone();
    let cap = 200_000usize;
    for _ in 0..cap {
        let sol = solve_min(lp.num_vars, &lp.objective, &pool)?;
        if let Some(cut) = separate_any(&lp.oracles, &sol.x) {
            debug_assert!(!cut.satisfied_by(&sol.x), "oracle returned a satisfied cut");
            pool.push(cut);
            continue;
        }
        let rank = tight_rank(&sol.x, &pool, lp.num_vars);
        if rank == lp.num_vars {
            return Ok(LpVertexSolution {
                x: sol.x,
                value: sol.value,
                tight_rank: rank,
                pool,
            });
        }
        // Rare: the basic solution of the padded system projects to a
        // non-vertex. Purify within the pool, then let the oracles re-check.
        let purified = purify(sol.x, &lp.objective, &pool);
        if let Some(cut) = separate_any(&lp.oracles, &purified) {
            pool.push(cut);
            continue;
        }
        let rank = tight_rank(&purified, &pool, lp.num_vars);
        debug_assert_eq!(rank, lp.num_vars, "purification must reach a vertex");
        let value = lp
            .objective
            .iter()
            .zip(&purified)
            .map(|(c, v)| c * v)
            .sum();
        return Ok(LpVertexSolution {
            x: purified,
            value,
            tight_rank: rank,
            pool,
        });
    }
    Err(Error::Internal(
        "separation loop exceeded its iteration cap".into(),
    ))
}

fn separate_any(oracles: &[Box<dyn SeparationOracle>], x: &[Rat]) -> Option<LinConstraint> {
    oracles.iter().find_map(|o| o.separate(x))
}

/// Rank of the tight rows at `x` (pool rows holding with equality, plus
/// `x_j = 0` bounds).
pub fn tight_rank(x: &[Rat], pool: &[LinConstraint], num_vars: usize) -> usize {
    let mut basis: Vec<Vec<Rat>> = Vec::new();
    for j in 0..num_vars {
        if x[j].is_zero() {
            let mut row = vec![Rat::zero(); num_vars];
            row[j] = Rat::one();
            add_to_row_basis(&mut basis, row);
        }
    }
    for c in pool {
        if c.tight_at(x) {
            let mut row = vec![Rat::zero(); num_vars];
            for (j, a) in &c.coeffs {
                row[*j] += a;
            }
            add_to_row_basis(&mut basis, row);
        }
    }
    basis.len()
}

/// Gaussian update: reduce `row` against `basis` (echelon by leading index);
/// push the remainder if nonzero.
fn add_to_row_basis(basis: &mut Vec<Vec<Rat>>, mut row: Vec<Rat>) -> bool {
    for b in basis.iter() {
        let lead = b.iter().position(|v| !v.is_zero()).unwrap();
        if !row[lead].is_zero() {
            let factor = &row[lead] / &b[lead];
            for (r, bv) in row.iter_mut().zip(b) {
                let delta = &factor * bv;
                *r -= delta;
            }
        }
    }
    if row.iter().any(|v| !v.is_zero()) {
        basis.push(row);
        true
    } else {
        false
    }
}

/// Moves an optimal point to an optimal vertex of the row system.
///
/// While the tight rows are rank-deficient, walk along a null-space
/// direction (objective-neutral by optimality) to the nearest newly-tight
/// constraint. Each step grows the tight rank by at least one.
pub fn purify(mut x: Vec<Rat>, objective: &[Rat], pool: &[LinConstraint]) -> Vec<Rat> {
    let n = x.len();
    loop {
        // Row basis of tight constraints.
        let mut basis: Vec<Vec<Rat>> = Vec::new();
        for j in 0..n {
            if x[j].is_zero() {
                let mut row = vec![Rat::zero(); n];
                row[j] = Rat::one();
                add_to_row_basis(&mut basis, row);
            }
        }
        for c in pool {
            if c.tight_at(&x) {
                let mut row = vec![Rat::zero(); n];
                for (j, a) in &c.coeffs {
                    row[*j] += a;
                }
                add_to_row_basis(&mut basis, row);
            }
        }
        if basis.len() == n {
            return x;
        }
        // Null-space direction: free column + back-substitution.
        let mut lead_of = vec![usize::MAX; n];
        for (i, b) in basis.iter().enumerate() {
            lead_of[b.iter().position(|v| !v.is_zero()).unwrap()] = i;
        }
        let free = (0..n).find(|&j| lead_of[j] == usize::MAX).unwrap();
        let mut d = vec![Rat::zero(); n];
        d[free] = Rat::one();
        // Solve basis . d = 0 back to front over leading columns.
        let order: Vec<usize> = {
            let mut leads: Vec<usize> = (0..n).filter(|&j| lead_of[j] != usize::MAX).collect();
            leads.sort_unstable_by(|a, b| b.cmp(a));
            leads
        };
        for lead in order {
            let b = &basis[lead_of[lead]];
            let dot: Rat = (0..n)
                .filter(|&j| j != lead)
                .map(|j| &b[j] * &d[j])
                .sum();
            d[lead] = -dot / &b[lead];
        }
        let obj_drift: Rat = objective.iter().zip(&d).map(|(c, v)| c * v).sum();
        debug_assert!(obj_drift.is_zero(), "null-space move changed the objective");

        let step = |dir: &[Rat]| -> Option<Rat> {
            let mut best: Option<Rat> = None;
            let mut consider = |limit: Rat| {
                debug_assert!(!limit.is_negative());
                if best.as_ref().is_none_or(|b| limit < *b) {
                    best = Some(limit);
                }
            };
            for j in 0..n {
                if dir[j].is_negative() {
                    consider(-(&x[j] / &dir[j]));
                }
            }
            for c in pool {
                let slope: Rat = c.coeffs.iter().map(|(j, a)| a * &dir[*j]).sum();
                let gap = &c.rhs - c.eval(&x);
                match c.cmp {
                    Cmp::Le if slope.is_positive() => consider(gap / slope),
                    Cmp::Ge if slope.is_negative() => consider(gap / slope),
                    Cmp::Eq => debug_assert!(slope.is_zero(), "equality row left tight set"),
                    _ => {}
                }
            }
            best
        };

        let neg: Vec<Rat> = d.iter().map(|v| -v.clone()).collect();
        let (dir, alpha) = match step(&d) {
            Some(a) => (d, a),
            None => {
                let a = step(&neg).expect("pointed polyhedron bounds one direction");
                (neg, a)
            }
        };
        debug_assert!(alpha.is_positive() || alpha.is_zero());
        for j in 0..n {
            if !dir[j].is_zero() {
                let delta = &dir[j] * &alpha;
                x[j] += delta;
            }
        }
    }
}

/// JSON debug dump of a solved LP: constraint list plus solution.
pub fn dump_lp_json(lp_vars: usize, objective: &[Rat], sol: &LpVertexSolution) -> String {
    let cons: Vec<_> = sol
        .pool
        .iter()
        .map(|c| {
            json!({
                "coeffs": c.coeffs.iter().map(|(j, a)| json!([j, format_rat(a)])).collect::<Vec<_>>(),
                "cmp": match c.cmp { Cmp::Le => "<=", Cmp::Ge => ">=", Cmp::Eq => "=" },
                "rhs": format_rat(&c.rhs),
                "label": c.label,
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({
        "variables": lp_vars,
        "objective": objective.iter().map(format_rat).collect::<Vec<_>>(),
        "constraints": cons,
        "solution": {
            "x": sol.x.iter().map(format_rat).collect::<Vec<_>>(),
            "value": format_rat(&sol.value),
            "tight_rank": sol.tight_rank,
        },
    }))
    .expect("dump serialization cannot fail")
}

// ---------------------------------------------------------------------------
// Held-Karp relaxations for the many-visits setting
// ---------------------------------------------------------------------------

/// A solved Held-Karp-style subproblem on an induced vertex set.
#[derive(Debug, Clone)]
pub struct SubHkSolution {
    pub value: Rat,
    /// Values per local edge, indexed like `edges`.
    pub x: Vec<Rat>,
    /// Global endpoints `(a, b)` with `a <= b` per local variable.
    pub edges: Vec<(usize, usize)>,
    pub vertex_solution: LpVertexSolution,
}

impl SubHkSolution {
    /// Embeds the local solution into a global edge vector.
    pub fn add_into(&self, global: &mut [Rat], space: &EdgeSpace) {
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            if !self.x[i].is_zero() {
                global[space.id(a, b)] += &self.x[i];
            }
        }
    }
}

struct SubCutOracle {
    /// Global vertex ids of the subproblem, defining local indices.
    verts: Vec<usize>,
    /// Local endpoint indices; equal for the closed variant.
    u: usize,
    v: usize,
    /// Local edge list as (local a, local b, var index).
    edge_vars: Vec<(usize, usize, usize)>,
}

impl SubCutOracle {
    fn crossing_constraint(&self, side: &[bool], rhs: i64, tag: &str) -> LinConstraint {
        let coeffs = self
            .edge_vars
            .iter()
            .filter(|(a, b, _)| a != b && (side[*a] ^ side[*b]))
            .map(|(_, _, j)| (*j, Rat::one()))
            .collect();
        let members: Vec<usize> = side
            .iter()
            .enumerate()
            .filter(|(_, &inside)| inside)
            .map(|(i, _)| self.verts[i])
            .collect();
        con(
            coeffs,
            Cmp::Ge,
            Rat::from_integer(Int::from(rhs)),
            format!("{tag} cut {members:?}"),
        )
    }
}

impl SeparationOracle for SubCutOracle {
    fn separate(&self, x: &[Rat]) -> Option<LinConstraint> {
        let k = self.verts.len();
        if k < 2 {
            return None;
        }
        let mut weights = vec![vec![Rat::zero(); k]; k];
        for (a, b, j) in &self.edge_vars {
            if a != b && !x[*j].is_zero() {
                weights[*a][*b] += &x[*j];
                weights[*b][*a] += &x[*j];
            }
        }
        let two = Rat::from_integer(Int::from(2));
        if self.u == self.v {
            // Closed variant: every proper nonempty cut needs load >= 2.
            let (cut, side) = cuts::global_min_cut(&weights);
            if cut < two {
                return Some(self.crossing_constraint(&side, 2, "closed"));
            }
            return None;
        }
        // Cuts not separating the endpoints: contract them, take a global
        // min cut.
        if k > 2 {
            let (merged, side_of) = cuts::contract_pair(&weights, self.u, self.v);
            let (cut, mside) = cuts::global_min_cut(&merged);
            if cut < two {
                let mut side = vec![false; k];
                for i in 0..k {
                    side[i] = mside[side_of[i]];
                }
                // Normalize: report the side not holding the endpoints.
                if side[self.u] {
                    for b in side.iter_mut() {
                        *b = !*b;
                    }
                }
                return Some(self.crossing_constraint(&side, 2, "both-sides"));
            }
        }
        // Endpoint-separating cuts need load >= 1.
        let (cut, side) = cuts::min_st_cut(&weights, self.u, self.v);
        if cut < Rat::one() {
            return Some(self.crossing_constraint(&side, 1, "endpoint"));
        }
        None
    }

    fn name(&self) -> &'static str {
        "held-karp cuts"
    }
}

/// Builds and solves the many-visits Held-Karp relaxation restricted to the
/// vertex set `verts` with endpoints `u`, `v` (all global ids; `u == v`
/// selects the closed variant with degree `2 r(u) - 2` at `u`).
///
/// `side_cuts` are additional global vertex sets whose crossing load must be
/// at least 3. Returns `None` when the polytope is empty.
pub fn held_karp_sub(
    inst: &Instance,
    verts: &[usize],
    u: usize,
    v: usize,
    side_cuts: &[Vec<usize>],
) -> Result<Option<SubHkSolution>> {
    let k = verts.len();
    let local = |g: usize| verts.iter().position(|&w| w == g).expect("vertex in set");
    let lu = local(u);
    let lv = local(v);

    // Local variables: all edges within the set, loops included.
    let mut edges = Vec::new();
    let mut edge_vars = Vec::new();
    for a in 0..k {
        for b in a..k {
            let j = edges.len();
            let (ga, gb) = (verts[a].min(verts[b]), verts[a].max(verts[b]));
            edges.push((ga, gb));
            edge_vars.push((a, b, j));
        }
    }
    let objective: Vec<Rat> = edges.iter().map(|&(a, b)| inst.cost(a, b).clone()).collect();

    let mut constraints = Vec::new();
    for w in 0..k {
        let mut coeffs = Vec::new();
        for (a, b, j) in &edge_vars {
            if a == b && *a == w {
                coeffs.push((*j, Rat::from_integer(Int::from(2))));
            } else if *a == w || *b == w {
                coeffs.push((*j, Rat::one()));
            }
        }
        let two_r = inst.request(verts[w]) * 2;
        let target = if lu == lv {
            if w == lu {
                two_r - 2
            } else {
                two_r
            }
        } else if w == lu || w == lv {
            two_r - 1
        } else {
            two_r
        };
        constraints.push(con(
            coeffs,
            Cmp::Eq,
            Rat::from_integer(target),
            format!("degree v{}", verts[w]),
        ));
    }
    for cut in side_cuts {
        let inside: Vec<bool> = (0..k).map(|i| cut.contains(&verts[i])).collect();
        let coeffs: Vec<(usize, Rat)> = edge_vars
            .iter()
            .filter(|(a, b, _)| a != b && (inside[*a] ^ inside[*b]))
            .map(|(_, _, j)| (*j, Rat::one()))
            .collect();
        constraints.push(con(
            coeffs,
            Cmp::Ge,
            Rat::from_integer(Int::from(3)),
            format!("side cut {cut:?}"),
        ));
    }

    let lp = LinearProgram {
        num_vars: edges.len(),
        objective: objective.clone(),
        constraints,
        oracles: vec![Box::new(SubCutOracle {
            verts: verts.to_vec(),
            u: lu,
            v: lv,
            edge_vars,
        })],
    };
    match solve_with_separation(&lp) {
        Ok(sol) => Ok(Some(SubHkSolution {
            value: sol.value.clone(),
            x: sol.x.clone(),
            edges,
            vertex_solution: sol,
        })),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Optimal vertex of the full many-visits Held-Karp relaxation, as a global
/// edge vector over [`EdgeSpace`].
pub fn held_karp_mv(inst: &Instance) -> Result<(Vec<Rat>, Rat, LpVertexSolution)> {
    let t = inst.t_required()?;
    let verts: Vec<usize> = (0..inst.n()).collect();
    let sub = held_karp_sub(inst, &verts, inst.s(), t, &[])?
        .ok_or_else(|| Error::Internal("Held-Karp relaxation cannot be empty".into()))?;
    let space = EdgeSpace::new(inst.n());
    let mut x = vec![Rat::zero(); space.count()];
    sub.add_into(&mut x, &space);
    Ok((x, sub.value, sub.vertex_solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use crate::rational::{int, rat, ratio};

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
    fn trivial_box_lp_yields_vertex() {
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![rat(0), rat(0)],
            constraints: vec![
                con(vec![(0, rat(1))], Cmp::Le, rat(1), "b0"),
                con(vec![(1, rat(1))], Cmp::Le, rat(1), "b1"),
            ],
            oracles: vec![],
        };
        let sol = solve_with_separation(&lp).unwrap();
        assert_eq!(sol.tight_rank, 2);
        for v in &sol.x {
            assert!(v.is_zero() || v.is_one());
        }
    }

    #[test]
    fn held_karp_t3_value_two() {
        let (x, value, _) = held_karp_mv(&t3()).unwrap();
        assert_eq!(value, rat(2));
        let space = EdgeSpace::new(3);
        assert_eq!(x[space.id(0, 1)], rat(1));
        assert_eq!(x[space.id(1, 2)], rat(1));
    }

    #[test]
    fn held_karp_t2_value_three() {
        let (_, value, vertex) = held_karp_mv(&t2()).unwrap();
        assert_eq!(value, rat(3));
        assert_eq!(vertex.tight_rank, 3);
    }

    #[test]
    fn held_karp_scales_with_costs() {
        let inst = t3();
        let scaled = Instance::new(
            (0..3)
                .map(|i| (0..3).map(|j| inst.cost(i, j) * rat(7)).collect())
                .collect(),
            inst.requests().to_vec(),
            0,
            Some(2),
        )
        .unwrap();
        let (_, v1, _) = held_karp_mv(&inst).unwrap();
        let (_, v7, _) = held_karp_mv(&scaled).unwrap();
        assert_eq!(v7, v1 * rat(7));
    }

    #[test]
    fn sub_lp_single_vertex_closed() {
        // One vertex, r = 3: the loop carries multiplicity 2.
        let inst = Instance::new(
            vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]],
            vec![int(3), int(1)],
            0,
            Some(1),
        )
        .unwrap();
        let sub = held_karp_sub(&inst, &[0], 0, 0, &[]).unwrap().unwrap();
        assert_eq!(sub.value, rat(4));
        assert_eq!(sub.x, vec![rat(2)]);

        // r = 1 forces the zero vector at value 0.
        let unit = t2();
        let sub = held_karp_sub(&unit, &[1], 1, 1, &[]).unwrap().unwrap();
        assert_eq!(sub.value, rat(0));
        assert_eq!(sub.x, vec![rat(0)]);
    }

    #[test]
    fn sub_lp_closed_on_two_vertices_with_unit_request_is_empty() {
        let sub = held_karp_sub(&t2(), &[0, 1], 1, 1, &[]).unwrap();
        assert!(sub.is_none());
    }

    #[test]
    fn purify_moves_to_higher_rank() {
        // Optimal face of min 0 over the unit square: interior point has rank
        // 0, purification must land on a corner.
        let pool = vec![
            con(vec![(0, rat(1))], Cmp::Le, rat(1), "b0"),
            con(vec![(1, rat(1))], Cmp::Le, rat(1), "b1"),
        ];
        let objective = vec![rat(0), rat(0)];
        let interior = vec![ratio(1, 3), ratio(2, 3)];
        let start_rank = tight_rank(&interior, &pool, 2);
        let pure = purify(interior, &objective, &pool);
        let end_rank = tight_rank(&pure, &pool, 2);
        assert!(end_rank > start_rank);
        assert_eq!(end_rank, 2);
    }

    #[test]
    fn dump_contains_solution() {
        let (_, _, vertex) = held_karp_mv(&t2()).unwrap();
        let dump = dump_lp_json(3, &[rat(2), rat(1), rat(2)], &vertex);
        let parsed: serde_json::Value = serde_json::from_str(&dump).unwrap();
        assert_eq!(parsed["solution"]["value"], "3/1");
        assert!(parsed["constraints"].as_array().unwrap().len() >= 2);
    }
}

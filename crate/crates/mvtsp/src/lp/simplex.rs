//! Dense two-phase primal simplex over exact rationals.
//!
//! Built for the desk-scale cutting-plane layer: tens of variables, a few
//! hundred rows. Variables are implicitly non-negative; rows may be `<=`,
//! `>=` or `=`. Dantzig pricing with a switch to Bland's rule guarantees
//! termination; all tie-breaking is by lowest index, so identical inputs
//! produce identical bases.

use super::{Cmp, InfeasibilityCertificate, LinConstraint};
use crate::rational::Rat;
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<Rat>,
    pub value: Rat,
}

struct Tableau {
    rows: Vec<Vec<Rat>>, // m x (cols + 1), last column is the rhs
    basis: Vec<usize>,
    cols: usize,
    rc: Vec<Rat>, // reduced costs, length cols
    obj_shift: Rat,
}

impl Tableau {
    fn set_objective(&mut self, costs: &[Rat]) {
        // rc_j = c_j - sum_i c_basis(i) * T[i][j]
        self.rc = costs.to_vec();
        self.obj_shift = Rat::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if costs[b].is_zero() {
                continue;
            }
            let cb = costs[b].clone();
            for j in 0..self.cols {
                if !self.rows[i][j].is_zero() {
                    let delta = &cb * &self.rows[i][j];
                    self.rc[j] -= delta;
                }
            }
            self.obj_shift += &cb * &self.rows[i][self.cols];
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.rows[pr][pc].clone();
        debug_assert!(!piv.is_zero());
        for j in 0..=self.cols {
            if !self.rows[pr][j].is_zero() {
                self.rows[pr][j] = &self.rows[pr][j] / &piv;
            }
        }
        let pivot_row = self.rows[pr].clone();
        for i in 0..self.rows.len() {
            if i == pr || self.rows[i][pc].is_zero() {
                continue;
            }
            let factor = self.rows[i][pc].clone();
            for j in 0..=self.cols {
                if !pivot_row[j].is_zero() {
                    let delta = &factor * &pivot_row[j];
                    self.rows[i][j] -= delta;
                }
            }
            debug_assert!(self.rows[i][pc].is_zero());
        }
        if !self.rc[pc].is_zero() {
            let factor = self.rc[pc].clone();
            for j in 0..self.cols {
                if !pivot_row[j].is_zero() {
                    let delta = &factor * &pivot_row[j];
                    self.rc[j] -= delta;
                }
            }
            self.obj_shift += &factor * &pivot_row[self.cols];
        }
        self.basis[pr] = pc;
    }

    /// Runs the simplex loop on the current objective. `allowed[j] = false`
    /// bars a column from entering. Returns Err on unboundedness.
    fn optimize(&mut self, allowed: &[bool]) -> Result<()> {
        let m = self.rows.len();
        let bland_after = 3 * (m + self.cols) + 20;
        let hard_cap = 2000 * (m + self.cols) + 10_000;
        for iter in 0..hard_cap {
            let bland = iter >= bland_after;
            let mut entering: Option<usize> = None;
            for j in 0..self.cols {
                if !allowed[j] || !self.rc[j].is_negative() {
                    continue;
                }
                match entering {
                    None => entering = Some(j),
                    Some(e) => {
                        if !bland && self.rc[j] < self.rc[e] {
                            entering = Some(j);
                        }
                    }
                }
                if bland {
                    break;
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            // Ratio test; ties go to the lowest basis variable.
            let mut pr: Option<usize> = None;
            let mut best: Option<Rat> = None;
            for i in 0..m {
                if self.rows[i][pc].is_positive() {
                    let ratio = &self.rows[i][self.cols] / &self.rows[i][pc];
                    let better = match &best {
                        None => true,
                        Some(b) => {
                            ratio < *b || (ratio == *b && self.basis[i] < self.basis[pr.unwrap()])
                        }
                    };
                    if better {
                        best = Some(ratio);
                        pr = Some(i);
                    }
                }
            }
            let Some(pr) = pr else {
                return Err(Error::Unbounded);
            };
            self.pivot(pr, pc);
        }
        Err(Error::Internal("simplex iteration cap exceeded".into()))
    }
}

/// Minimizes `objective . x` subject to `constraints` and `x >= 0`.
pub fn solve_min(
    num_vars: usize,
    objective: &[Rat],
    constraints: &[LinConstraint],
) -> Result<LpSolution> {
    assert_eq!(objective.len(), num_vars);
    let m = constraints.len();

    // Normalize rows to non-negative rhs, remembering sense flips.
    let mut dense: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut senses: Vec<Cmp> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    for c in constraints {
        let mut row = vec![Rat::zero(); num_vars];
        for (j, a) in &c.coeffs {
            assert!(*j < num_vars, "constraint references variable {j}");
            row[*j] += a;
        }
        let (row, sense, b) = if c.rhs.is_negative() {
            let flipped = match c.cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
            (
                row.into_iter().map(|a| -a).collect::<Vec<_>>(),
                flipped,
                -c.rhs.clone(),
            )
        } else {
            (row, c.cmp, c.rhs.clone())
        };
        dense.push(row);
        senses.push(sense);
        rhs.push(b);
    }

    // Column layout: structural | slack/surplus | artificial.
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for s in &senses {
        match s {
            Cmp::Le => n_slack += 1,
            Cmp::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Cmp::Eq => n_art += 1,
        }
    }
    let cols = num_vars + n_slack + n_art;
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut basis = vec![usize::MAX; m];
    let mut art_of_row = vec![usize::MAX; m];
    let mut slack_idx = num_vars;
    let mut art_idx = num_vars + n_slack;
    for i in 0..m {
        let mut row = vec![Rat::zero(); cols + 1];
        row[..num_vars].clone_from_slice(&dense[i]);
        row[cols] = rhs[i].clone();
        match senses[i] {
            Cmp::Le => {
                row[slack_idx] = Rat::one();
                basis[i] = slack_idx;
                slack_idx += 1;
            }
            Cmp::Ge => {
                row[slack_idx] = -Rat::one();
                slack_idx += 1;
                row[art_idx] = Rat::one();
                basis[i] = art_idx;
                art_of_row[i] = art_idx;
                art_idx += 1;
            }
            Cmp::Eq => {
                row[art_idx] = Rat::one();
                basis[i] = art_idx;
                art_of_row[i] = art_idx;
                art_idx += 1;
            }
        }
        rows.push(row);
    }

    let mut t = Tableau {
        rows,
        basis,
        cols,
        rc: Vec::new(),
        obj_shift: Rat::zero(),
    };
    let all_allowed = vec![true; cols];

    // Phase 1: minimize the artificial mass.
    if n_art > 0 {
        let mut phase1 = vec![Rat::zero(); cols];
        for c in phase1.iter_mut().skip(num_vars + n_slack) {
            *c = Rat::one();
        }
        t.set_objective(&phase1);
        t.optimize(&all_allowed)?;
        let art_value: Rat = t
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= num_vars + n_slack)
            .map(|(i, _)| t.rows[i][t.cols].clone())
            .sum();
        if art_value.is_positive() {
            // Farkas-style certificate from the phase-1 duals: y_i = 1 - rc
            // at row i's artificial column (0 for rows without one).
            let mut multipliers = Vec::with_capacity(m);
            for i in 0..m {
                if art_of_row[i] == usize::MAX {
                    // A <= row: its slack has cost 0, dual is -rc at the slack.
                    multipliers.push(Rat::zero());
                } else {
                    multipliers.push(Rat::one() - t.rc[art_of_row[i]].clone());
                }
            }
            // Recover duals of <= rows from their slack columns.
            let mut slack_cursor = num_vars;
            for i in 0..m {
                match senses[i] {
                    Cmp::Le => {
                        multipliers[i] = -t.rc[slack_cursor].clone();
                        slack_cursor += 1;
                    }
                    Cmp::Ge => slack_cursor += 1,
                    Cmp::Eq => {}
                }
            }
            return Err(Error::Infeasible(InfeasibilityCertificate {
                row_multipliers: multipliers,
                senses,
                normalized_rows: dense,
                normalized_rhs: rhs,
            }));
        }
        // Drive leftover artificials out of the basis.
        for i in 0..m {
            if t.basis[i] >= num_vars + n_slack {
                let pc = (0..num_vars + n_slack).find(|&j| !t.rows[i][j].is_zero());
                if let Some(pc) = pc {
                    t.pivot(i, pc);
                }
                // Otherwise the row is all-zero (redundant) and stays put;
                // its artificial remains basic at value zero.
            }
        }
    }

    // Phase 2 with artificial columns barred.
    let mut phase2 = vec![Rat::zero(); cols];
    phase2[..num_vars].clone_from_slice(objective);
    t.set_objective(&phase2);
    let mut allowed = vec![true; cols];
    for a in allowed.iter_mut().skip(num_vars + n_slack) {
        *a = false;
    }
    t.optimize(&allowed)?;

    let mut x = vec![Rat::zero(); num_vars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < num_vars {
            x[b] = t.rows[i][t.cols].clone();
        }
    }
    let value = objective
        .iter()
        .zip(&x)
        .map(|(c, xi)| c * xi)
        .sum::<Rat>();
    Ok(LpSolution { x, value })
}

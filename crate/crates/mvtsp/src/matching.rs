//! Maximum-weight matching in general graphs, with exact rational weights.
//!
//! Primal-dual blossom method in the classic array-based formulation
//! (Galil's survey of Edmonds' algorithm); the code follows the widely used
//! van Rantwijk layout: vertices `0..nvertex` are trivial blossoms,
//! `nvertex..2*nvertex` are blossom slots, and edge endpoints `2k`/`2k+1`
//! belong to edge `k`. Vertex duals are stored doubled so that edge slacks
//! are plain sums; with rational arithmetic every dual update is exact and
//! the final complementary-slackness check is a hard assertion.
//!
//! Minimum-cost perfect matching is the max-cardinality maximum matching of
//! the negated costs.

use crate::rational::Rat;
use crate::{Error, Result};
use num_traits::{Signed, Zero};

const SENTINEL: usize = usize::MAX;

type Weight = Rat;

pub struct Matching {
    nvertex: usize,
    nedge: usize,
    edges: Vec<(usize, usize, Weight)>,
    maxcardinality: bool,

    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<usize>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<Weight>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Matching {
    pub fn new(edges: Vec<(usize, usize, Weight)>, maxcardinality: bool) -> Self {
        let nedge = edges.len();
        let mut nvertex = 0;
        for &(i, j, _) in &edges {
            assert!(i != j);
            nvertex = nvertex.max(i + 1).max(j + 1);
        }
        let maxweight = edges
            .iter()
            .map(|e| e.2.clone())
            .max()
            .unwrap_or_else(Rat::zero)
            .max(Rat::zero());

        let endpoint = (0..2 * nedge)
            .map(|p| if p % 2 == 0 { edges[p / 2].0 } else { edges[p / 2].1 })
            .collect();
        let mut neighbend = vec![vec![]; nvertex];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![maxweight; nvertex];
        dualvar.extend(vec![Rat::zero(); nvertex]);

        Matching {
            nvertex,
            nedge,
            edges,
            maxcardinality,
            endpoint,
            neighbend,
            mate: vec![SENTINEL; nvertex],
            label: vec![0; 2 * nvertex],
            labelend: vec![SENTINEL; 2 * nvertex],
            inblossom: (0..nvertex).collect(),
            blossomparent: vec![SENTINEL; 2 * nvertex],
            blossomchilds: vec![vec![]; 2 * nvertex],
            blossombase: (0..nvertex).chain(std::iter::repeat_n(SENTINEL, nvertex)).collect(),
            blossomendps: vec![vec![]; 2 * nvertex],
            bestedge: vec![SENTINEL; 2 * nvertex],
            blossombestedges: vec![vec![]; 2 * nvertex],
            unusedblossoms: (nvertex..2 * nvertex).collect(),
            dualvar,
            allowedge: vec![false; nedge],
            queue: vec![],
        }
    }

    /// 2 * slack of edge k (not meaningful inside blossoms).
    fn slack(&self, k: usize) -> Weight {
        let (i, j, ref wt) = self.edges[k];
        &self.dualvar[i] + &self.dualvar[j] - wt - wt
    }

    fn blossom_leaves(&self, b: usize) -> Vec<usize> {
        let mut leaves = vec![];
        if b < self.nvertex {
            leaves.push(b);
        } else {
            for &t in &self.blossomchilds[b] {
                if t < self.nvertex {
                    leaves.push(t);
                } else {
                    leaves.extend(self.blossom_leaves(t));
                }
            }
        }
        leaves
    }

    fn assign_label(&mut self, w: usize, t: usize, p: usize) {
        let b = self.inblossom[w];
        assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = SENTINEL;
        self.bestedge[b] = SENTINEL;
        if t == 1 {
            let leaves = self.blossom_leaves(b);
            self.queue.extend(leaves);
        } else if t == 2 {
            let base = self.blossombase[b];
            assert!(self.mate[base] != SENTINEL);
            let mbase = self.mate[base];
            let ep = self.endpoint[mbase];
            self.assign_label(ep, 1, mbase ^ 1);
        }
    }

    /// Trace back from `v` and `w`; returns the base of a new blossom or
    /// SENTINEL when the paths reach two distinct roots (augmenting path).
    fn scan_blossom(&mut self, v: usize, w: usize) -> usize {
        let mut path = vec![];
        let mut base = SENTINEL;
        let mut v = v;
        let mut w = w;
        while v != SENTINEL || w != SENTINEL {
            let mut b = self.inblossom[v];
            if self.label[b] & 4 != 0 {
                base = self.blossombase[b];
                break;
            }
            assert_eq!(self.label[b], 1);
            path.push(b);
            self.label[b] = 5;
            assert_eq!(self.labelend[b], self.mate[self.blossombase[b]]);
            if self.labelend[b] == SENTINEL {
                v = SENTINEL;
            } else {
                v = self.endpoint[self.labelend[b]];
                b = self.inblossom[v];
                assert_eq!(self.label[b], 2);
                assert!(self.labelend[b] != SENTINEL);
                v = self.endpoint[self.labelend[b]];
            }
            if w != SENTINEL {
                std::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k].clone();
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];

        let b = self.unusedblossoms.pop().unwrap();
        self.blossombase[b] = base;
        self.blossomparent[b] = SENTINEL;
        self.blossomparent[bb] = b;

        self.blossomchilds[b] = vec![];
        self.blossomendps[b] = vec![];
        while bv != bb {
            self.blossomparent[bv] = b;
            self.blossomchilds[b].push(bv);
            self.blossomendps[b].push(self.labelend[bv]);
            assert!(
                self.label[bv] == 2
                    || (self.label[bv] == 1
                        && self.labelend[bv] == self.mate[self.blossombase[bv]])
            );
            assert!(self.labelend[bv] != SENTINEL);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        self.blossomchilds[b].push(bb);
        self.blossomchilds[b].reverse();
        self.blossomendps[b].reverse();
        self.blossomendps[b].push(2 * k);

        while bw != bb {
            self.blossomparent[bw] = b;
            self.blossomchilds[b].push(bw);
            self.blossomendps[b].push(self.labelend[bw] ^ 1);
            assert!(
                self.label[bw] == 2
                    || (self.label[bw] == 1
                        && self.labelend[bw] == self.mate[self.blossombase[bw]])
            );
            assert!(self.labelend[bw] != SENTINEL);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = Rat::zero();

        for v in self.blossom_leaves(b) {
            if self.label[self.inblossom[v]] == 2 {
                self.queue.push(v);
            }
            self.inblossom[v] = b;
        }

        // Compute the blossom's least-slack edges to neighbouring S-blossoms.
        let mut bestedgeto = vec![SENTINEL; 2 * self.nvertex];
        for bv in self.blossomchilds[b].clone() {
            let nblists: Vec<Vec<usize>> = if self.blossombestedges[bv].is_empty() {
                self.blossom_leaves(bv)
                    .into_iter()
                    .map(|v| self.neighbend[v].iter().map(|p| p / 2).collect())
                    .collect()
            } else {
                vec![self.blossombestedges[bv].clone()]
            };
            for nblist in nblists {
                for k in nblist {
                    let (mut i, mut j, _) = self.edges[k].clone();
                    if self.inblossom[j] == b {
                        std::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == SENTINEL
                            || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[bv] = vec![];
            self.bestedge[bv] = SENTINEL;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != SENTINEL).collect();
        self.bestedge[b] = SENTINEL;
        for &k in &self.blossombestedges[b] {
            if self.bestedge[b] == SENTINEL || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for s in self.blossomchilds[b].clone() {
            self.blossomparent[s] = SENTINEL;
            if s < self.nvertex {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s].is_zero() {
                self.expand_blossom(s, endstage);
            } else {
                for v in self.blossom_leaves(s) {
                    self.inblossom[v] = s;
                }
            }
        }

        if !endstage && self.label[b] == 2 {
            assert!(self.labelend[b] != SENTINEL);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let mut j = self.blossomchilds[b]
                .iter()
                .position(|&r| r == entrychild)
                .unwrap() as i32;
            let jstep: i32;
            let endptrick: usize;
            if j & 1 != 0 {
                j -= self.blossomchilds[b].len() as i32;
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = pos_neg_index(&self.blossomendps[b], j - endptrick as i32) ^ endptrick ^ 1;
                self.label[self.endpoint[q]] = 0;
                let ep = self.endpoint[p ^ 1];
                self.assign_label(ep, 2, p);
                self.allowedge[pos_neg_index(&self.blossomendps[b], j - endptrick as i32) / 2] =
                    true;
                j += jstep;
                p = pos_neg_index(&self.blossomendps[b], j - endptrick as i32) ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            let bv = pos_neg_index(&self.blossomchilds[b], j);
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = SENTINEL;
            j += jstep;
            while pos_neg_index(&self.blossomchilds[b], j) != entrychild {
                let bv = pos_neg_index(&self.blossomchilds[b], j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let mut v = SENTINEL;
                for t in self.blossom_leaves(bv) {
                    v = t;
                    if self.label[v] != 0 {
                        break;
                    }
                }
                if v != SENTINEL && self.label[v] != 0 {
                    assert_eq!(self.label[v], 2);
                    assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let lblend = self.labelend[v];
                    self.assign_label(v, 2, lblend);
                }
                j += jstep;
            }
        }

        self.label[b] = SENTINEL;
        self.labelend[b] = SENTINEL;
        self.blossombase[b] = SENTINEL;
        self.bestedge[b] = SENTINEL;
        self.blossomchilds[b] = vec![];
        self.blossomendps[b] = vec![];
        self.blossombestedges[b] = vec![];
        self.unusedblossoms.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t != SENTINEL && t >= self.nvertex {
            self.augment_blossom(t, v);
        }
        let i = self.blossomchilds[b].iter().position(|&r| r == t).unwrap();
        let mut j = i as i32;
        let jstep: i32;
        let endptrick: usize;
        if i & 1 != 0 {
            j -= self.blossomchilds[b].len() as i32;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while j != 0 {
            j += jstep;
            let mut t = pos_neg_index(&self.blossomchilds[b], j);
            let p = pos_neg_index(&self.blossomendps[b], j - endptrick as i32) ^ endptrick;
            if t != SENTINEL && t >= self.nvertex {
                let endp = self.endpoint[p];
                self.augment_blossom(t, endp);
            }
            j += jstep;
            t = pos_neg_index(&self.blossomchilds[b], j);
            if t != SENTINEL && t >= self.nvertex {
                let endp = self.endpoint[p ^ 1];
                self.augment_blossom(t, endp);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        rotate(&mut self.blossomchilds[b], i);
        rotate(&mut self.blossomendps[b], i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        assert_eq!(self.blossombase[b], v);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k].clone();
        for &(s0, p0) in &[(v, 2 * k + 1), (w, 2 * k)] {
            let mut s = s0;
            let mut p = p0;
            loop {
                let bs = self.inblossom[s];
                assert_eq!(self.label[bs], 1);
                assert_eq!(self.labelend[bs], self.mate[self.blossombase[bs]]);
                if bs != SENTINEL && bs >= self.nvertex {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == SENTINEL {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                assert_eq!(self.label[bt], 2);
                assert!(self.labelend[bt] != SENTINEL);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                assert_eq!(self.blossombase[bt], t);
                if bt != SENTINEL && bt >= self.nvertex {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    /// Complementary slackness of the final primal/dual pair.
    fn verify_optimum(&self) {
        let vdualoffset = if self.maxcardinality {
            let min_dual = self.dualvar[..self.nvertex].iter().min().unwrap();
            (-min_dual.clone()).max(Rat::zero())
        } else {
            Rat::zero()
        };
        for k in 0..self.nedge {
            let (i, j, ref wt) = self.edges[k];
            let mut s = &self.dualvar[i] + &self.dualvar[j] - wt - wt;
            // (blossom duals along the common nesting chain are added below)
            let mut iblossoms = vec![i];
            let mut jblossoms = vec![j];
            while self.blossomparent[*iblossoms.last().unwrap()] != SENTINEL {
                iblossoms.push(self.blossomparent[*iblossoms.last().unwrap()]);
            }
            while self.blossomparent[*jblossoms.last().unwrap()] != SENTINEL {
                jblossoms.push(self.blossomparent[*jblossoms.last().unwrap()]);
            }
            iblossoms.reverse();
            jblossoms.reverse();
            for (&bi, &bj) in iblossoms.iter().zip(jblossoms.iter()) {
                if bi != bj {
                    break;
                }
                s += &self.dualvar[bi] + &self.dualvar[bi];
            }
            assert!(!s.is_negative());
            if self.mate[i] / 2 == k || self.mate[j] / 2 == k {
                assert!(self.mate[i] / 2 == k && self.mate[j] / 2 == k);
                assert!(s.is_zero());
            }
        }
        for v in 0..self.nvertex {
            assert!(
                self.mate[v] != SENTINEL || (&self.dualvar[v] + &vdualoffset).is_zero()
            );
        }
        for b in self.nvertex..2 * self.nvertex {
            if self.blossombase[b] != SENTINEL && self.dualvar[b].is_positive() {
                assert!(self.blossomendps[b].len() % 2 == 1);
                for (ix, &p) in self.blossomendps[b].iter().enumerate() {
                    if ix % 2 == 1 {
                        assert_eq!(self.mate[self.endpoint[p]], p ^ 1);
                        assert_eq!(self.mate[self.endpoint[p ^ 1]], p);
                    }
                }
            }
        }
    }

    /// Runs the algorithm; `mate[v]` is v's partner or SENTINEL.
    pub fn solve(&mut self) -> Vec<usize> {
        if self.edges.is_empty() {
            return vec![];
        }
        for _ in 0..self.nvertex {
            self.label = vec![0; 2 * self.nvertex];
            self.bestedge = vec![SENTINEL; 2 * self.nvertex];
            for b in self.nvertex..2 * self.nvertex {
                self.blossombestedges[b] = vec![];
            }
            self.allowedge = vec![false; self.nedge];
            self.queue = vec![];

            for v in 0..self.nvertex {
                if self.mate[v] == SENTINEL && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, SENTINEL);
                }
            }
            let mut augmented = false;
            loop {
                while !self.queue.is_empty() && !augmented {
                    let v = self.queue.pop().unwrap();
                    assert_eq!(self.label[self.inblossom[v]], 1);
                    for p in self.neighbend[v].clone() {
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = Rat::zero();
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if !kslack.is_positive() {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != SENTINEL {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                assert_eq!(self.label[self.inblossom[w]], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == SENTINEL
                                || kslack < self.slack(self.bestedge[b])
                            {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == SENTINEL
                                || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment.
                let mut deltatype = -1i32;
                let mut delta = Rat::zero();
                let mut deltaedge = 0usize;
                let mut deltablossom = 0usize;

                if !self.maxcardinality {
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex].iter().min().unwrap().clone();
                }
                for v in 0..self.nvertex {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != SENTINEL {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * self.nvertex {
                    if self.blossomparent[b] == SENTINEL
                        && self.label[b] == 1
                        && self.bestedge[b] != SENTINEL
                    {
                        let kslack = self.slack(self.bestedge[b]);
                        let d = kslack / Rat::from_integer(2.into());
                        if deltatype == -1 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != SENTINEL
                        && self.blossomparent[b] == SENTINEL
                        && self.label[b] == 2
                        && (deltatype == -1 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b].clone();
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == -1 {
                    assert!(self.maxcardinality);
                    deltatype = 1;
                    delta = self.dualvar[..self.nvertex]
                        .iter()
                        .min()
                        .unwrap()
                        .clone()
                        .max(Rat::zero());
                }

                for v in 0..self.nvertex {
                    match self.label[self.inblossom[v]] {
                        0 => {}
                        1 => self.dualvar[v] -= &delta,
                        2 => self.dualvar[v] += &delta,
                        _ => unreachable!("unexpected vertex label"),
                    }
                }
                for b in self.nvertex..2 * self.nvertex {
                    if self.blossombase[b] != SENTINEL && self.blossomparent[b] == SENTINEL {
                        match self.label[b] {
                            0 => {}
                            1 => self.dualvar[b] += &delta,
                            2 => self.dualvar[b] -= &delta,
                            _ => unreachable!("unexpected blossom label"),
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        let (mut i, j, _) = self.edges[deltaedge].clone();
                        self.allowedge[deltaedge] = true;
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge].clone();
                        assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    4 => self.expand_blossom(deltablossom, false),
                    _ => unreachable!("unexpected delta type"),
                }
            }

            if !augmented {
                break;
            }
            for b in self.nvertex..2 * self.nvertex {
                if self.blossomparent[b] == SENTINEL
                    && self.blossombase[b] != SENTINEL
                    && self.label[b] == 1
                    && self.dualvar[b].is_zero()
                {
                    self.expand_blossom(b, true);
                }
            }
        }
        self.verify_optimum();

        for v in 0..self.nvertex {
            if self.mate[v] != SENTINEL {
                self.mate[v] = self.endpoint[self.mate[v]];
            }
        }
        for v in 0..self.nvertex {
            assert!(self.mate[v] == SENTINEL || self.mate[self.mate[v]] == v);
        }
        self.mate.clone()
    }
}

fn rotate(v: &mut [usize], split: usize) {
    v.rotate_left(split);
}

fn pos_neg_index(v: &[usize], index: i32) -> usize {
    let idx = if index >= 0 {
        index as usize
    } else {
        v.len() - (-index) as usize
    };
    v[idx]
}

/// Minimum-cost perfect matching on the complete graph over `points`
/// (global vertex ids) with metric costs given by `cost`. Self-loops are
/// never used. Returns the matched pairs.
pub fn min_cost_perfect_matching(
    points: &[usize],
    cost: impl Fn(usize, usize) -> Rat,
) -> Result<Vec<(usize, usize)>> {
    let k = points.len();
    if !k.is_multiple_of(2) {
        return Err(Error::Internal(format!(
            "perfect matching needs an even vertex count, got {k}"
        )));
    }
    if k == 0 {
        return Ok(vec![]);
    }
    let mut edges = Vec::with_capacity(k * (k - 1) / 2);
    for a in 0..k {
        for b in (a + 1)..k {
            edges.push((a, b, -cost(points[a], points[b])));
        }
    }
    let mate = Matching::new(edges, true).solve();
    let mut out = Vec::with_capacity(k / 2);
    for a in 0..k {
        let m = mate[a];
        if m == SENTINEL {
            return Err(Error::Internal(
                "perfect matching left a vertex unmatched".into(),
            ));
        }
        if a < m {
            out.push((points[a], points[m]));
        }
    }
    Ok(out)
}

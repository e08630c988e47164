//! Completion of a constrained partial Latin rectangle with few symbols.
//!
//! Every forced cluster and every unconstrained cell is a unit; units that
//! share a row or column must get different symbols, so completion is a
//! graph colouring. The search picks the unit with the fewest feasible
//! symbols (ties: more uncoloured neighbours, then lower index), tries symbols in
//! ascending order and only opens one fresh symbol per node, since unused
//! symbols are interchangeable.

use super::{Cplr, LatinError, LatinRectangle};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Completion {
    pub rect: LatinRectangle,
    /// Symbols used.
    pub t: u32,
    /// True when every smaller alphabet was searched exhaustively.
    pub proven_minimal: bool,
    /// Search nodes spent over all alphabet sizes.
    pub nodes: u64,
}

enum Outcome {
    Found(Vec<u32>),
    Infeasible,
    Exhausted,
}

struct Graph {
    adj: Vec<Vec<u32>>,
    unit_of: Vec<u32>,
}

impl Graph {
    fn new(cplr: &Cplr) -> Self {
        let (rows, cols) = (cplr.rows(), cplr.cols());
        let n = rows * cols;
        let mut unit_of = vec![NONE; n];
        let mut units = 0u32;
        for cells in cplr.clusters() {
            for &c in cells {
                unit_of[c] = units;
            }
            units += 1;
        }
        for slot in unit_of.iter_mut().filter(|u| **u == NONE) {
            *slot = units;
            units += 1;
        }
        let mut by_row = vec![Vec::new(); rows];
        let mut by_col = vec![Vec::new(); cols];
        for (cell, &u) in unit_of.iter().enumerate() {
            by_row[cell / cols].push(u);
            by_col[cell % cols].push(u);
        }
        let mut adj = vec![Vec::new(); units as usize];
        for (cell, &u) in unit_of.iter().enumerate() {
            let lines = by_row[cell / cols].iter().chain(&by_col[cell % cols]);
            adj[u as usize].extend(lines.copied().filter(|&v| v != u));
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Self { adj, unit_of }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }
}

struct Search<'a> {
    g: &'a Graph,
    t: usize,
    color: Vec<u32>,
    forbid: Vec<u16>,
    sat: Vec<u16>,
    free_deg: Vec<u16>,
    used: Vec<u32>,
    n_used: usize,
    colored: usize,
    nodes: u64,
    budget: u64,
}

impl<'a> Search<'a> {
    fn new(g: &'a Graph, t: usize, budget: u64) -> Self {
        let n = g.len();
        Self {
            g,
            t,
            color: vec![NONE; n],
            forbid: vec![0; n * t],
            sat: vec![0; n],
            free_deg: g.adj.iter().map(|a| a.len() as u16).collect(),
            used: vec![0; t],
            n_used: 0,
            colored: 0,
            nodes: 0,
            budget,
        }
    }

    fn assign(&mut self, u: usize, c: usize) {
        self.color[u] = c as u32;
        self.colored += 1;
        self.used[c] += 1;
        if c == self.n_used {
            self.n_used += 1;
        }
        for &v in &self.g.adj[u] {
            let f = &mut self.forbid[v as usize * self.t + c];
            if *f == 0 {
                self.sat[v as usize] += 1;
            }
            *f += 1;
            self.free_deg[v as usize] -= 1;
        }
    }

    fn unassign(&mut self, u: usize, c: usize) {
        self.color[u] = NONE;
        self.colored -= 1;
        self.used[c] -= 1;
        if self.used[c] == 0 && c + 1 == self.n_used {
            self.n_used -= 1;
        }
        for &v in &self.g.adj[u] {
            let f = &mut self.forbid[v as usize * self.t + c];
            *f -= 1;
            if *f == 0 {
                self.sat[v as usize] -= 1;
            }
            self.free_deg[v as usize] += 1;
        }
    }

    fn pick(&self) -> usize {
        let mut best = usize::MAX;
        let mut key = (usize::MAX, 0usize);
        for u in 0..self.g.len() {
            if self.color[u] != NONE {
                continue;
            }
            let k = (self.t - self.sat[u] as usize, self.free_deg[u] as usize);
            if k.0 < key.0 || (k.0 == key.0 && k.1 > key.1) {
                key = k;
                best = u;
            }
        }
        best
    }

    /// Returns `None` when the budget ran out.
    fn run(&mut self) -> Option<bool> {
        if self.colored == self.g.len() {
            return Some(true);
        }
        let u = self.pick();
        if self.sat[u] as usize >= self.t {
            return Some(false);
        }
        let limit = self.t.min(self.n_used + 1);
        for c in 0..limit {
            if self.forbid[u * self.t + c] != 0 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            self.assign(u, c);
            match self.run() {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => self.unassign(u, c),
            }
        }
        Some(false)
    }

    fn solve(mut self) -> (Outcome, u64) {
        let outcome = match self.run() {
            Some(true) => Outcome::Found(self.color.clone()),
            Some(false) => Outcome::Infeasible,
            None => Outcome::Exhausted,
        };
        (outcome, self.nodes.min(self.budget))
    }
}

/// First-fit colouring in the same unit order, without backtracking.
fn greedy(g: &Graph) -> Vec<u32> {
    let mut s = Search::new(g, g.len().max(1), u64::MAX);
    while s.colored < g.len() {
        let u = s.pick();
        let c = (0..s.t)
            .find(|&c| s.forbid[u * s.t + c] == 0)
            .expect("enough symbols");
        s.assign(u, c);
    }
    s.color
}

fn materialize(cplr: &Cplr, g: &Graph, colors: &[u32]) -> Result<LatinRectangle, LatinError> {
    let cells: Vec<u32> = g.unit_of.iter().map(|&u| colors[u as usize]).collect();
    let t = cells.iter().max().map_or(0, |m| m + 1);
    LatinRectangle::new(cplr.rows(), cplr.cols(), cells, t)
}

/// Fills a CPLR into a Latin rectangle with as few symbols as the search
/// can find, trying alphabet sizes from `max(rows, cols)` up to `t_max` with
/// `budget` nodes each.
pub fn complete(cplr: &Cplr, t_max: u32, budget: u64) -> Result<Completion, LatinError> {
    let g = Graph::new(cplr);
    let lower = cplr.rows().max(cplr.cols()) as u32;
    let mut proven = true;
    let mut nodes = 0;
    for t in lower..=t_max {
        let (outcome, spent) = Search::new(&g, t as usize, budget).solve();
        nodes += spent;
        match outcome {
            Outcome::Found(colors) => {
                let rect = materialize(cplr, &g, &colors)?;
                return Ok(Completion {
                    t: rect.t(),
                    rect,
                    proven_minimal: proven,
                    nodes,
                });
            }
            Outcome::Infeasible => {}
            Outcome::Exhausted => proven = false,
        }
    }
    let rect = materialize(cplr, &g, &greedy(&g))?;
    if rect.t() > t_max {
        return Err(LatinError::Budget { t_max });
    }
    Ok(Completion {
        t: rect.t(),
        rect,
        proven_minimal: false,
        nodes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fadespace::{FadeCatalog, SystemDims};
    use crate::latin::tests::{bkey, bpsk, qpsk};
    use crate::latin::{build_cplr, verify_removal};
    use crate::Execution;

    fn check(cplr: &Cplr, rect: &LatinRectangle) {
        for cells in cplr.clusters() {
            let s = rect.cells()[cells[0]];
            assert!(cells.iter().all(|&c| rect.cells()[c] == s));
        }
    }

    #[test]
    fn full_support_key_completes_with_four_symbols() {
        let d = SystemDims::square(2).unwrap();
        let cplr = build_cplr(bpsk(), &d, &bkey(&[2, 2, -2, -2])).unwrap();
        let done = complete(&cplr, 16, DEFAULT_BUDGET).unwrap();
        assert_eq!(done.t, 4);
        assert!(done.proven_minimal);
        check(&cplr, &done.rect);
    }

    #[test]
    fn three_antenna_key_completes_with_four_symbols() {
        let d = SystemDims::square(2).unwrap();
        let key = bkey(&[0, -2, -2, 2]);
        let cplr = build_cplr(bpsk(), &d, &key).unwrap();
        let done = complete(&cplr, 16, DEFAULT_BUDGET).unwrap();
        assert_eq!(done.t, 4);
        assert!(verify_removal(bpsk(), &done.rect, &key).unwrap());
    }

    #[test]
    fn every_small_key_completes_and_is_removed() {
        for (p, d) in [
            (bpsk(), SystemDims::square(2).unwrap()),
            (qpsk(), SystemDims::square(1).unwrap()),
        ] {
            let cat = FadeCatalog::build(p, d, Execution::Sequential).unwrap();
            for id in cat.removable_ids() {
                let key = &cat.keys()[id];
                let cplr = build_cplr(p, &d, key).unwrap();
                let done = complete(&cplr, 64, DEFAULT_BUDGET).unwrap();
                check(&cplr, &done.rect);
                assert!(verify_removal(p, &done.rect, key).unwrap(), "{key}");
            }
        }
    }

    #[test]
    fn tiny_budget_falls_back_to_greedy() {
        let d = SystemDims::square(2).unwrap();
        let cplr = build_cplr(bpsk(), &d, &bkey(&[0, -2, -2, 2])).unwrap();
        let done = complete(&cplr, 16, 1).unwrap();
        assert!(!done.proven_minimal);
        check(&cplr, &done.rect);
        assert!(matches!(
            complete(&cplr, 3, 1),
            Err(LatinError::Budget { t_max: 3 })
        ));
    }
}

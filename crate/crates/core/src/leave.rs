//! Exact K_k-decomposition of the leave by exact cover (Algorithm X on
//! dancing links).
//!
//! Columns are the facets of `L`, rows the k-sets all of whose facets lie in
//! `L`. Branching always takes the column with the fewest live rows. Each
//! restart shuffles column and row order and gets twice the node budget of
//! the previous one, so the search is deterministic per seed.

use crate::combin::Binomial;
use crate::hypergraph::Hypergraph;
use crate::rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    /// Search nodes for the first attempt; doubled on each restart.
    pub base_nodes: u64,
    pub restarts: usize,
    /// Wall-clock cap per attempt.
    pub attempt_time: Duration,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget { base_nodes: 200_000, restarts: 10, attempt_time: Duration::from_secs(30) }
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionProblem<'a> {
    pub leave: &'a Hypergraph,
    /// Rows that are edges of this hypergraph are tried first.
    pub prefer: Option<&'a Hypergraph>,
    pub budget: SolverBudget,
    pub seed: u64,
}

impl<'a> DecompositionProblem<'a> {
    pub fn new(leave: &'a Hypergraph, seed: u64) -> Self {
        DecompositionProblem { leave, prefer: None, budget: SolverBudget::default(), seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decomposition {
    Solved { edges: Hypergraph, restart: usize, nodes: u64 },
    /// Proven: either divisibility fails or an attempt searched exhaustively.
    Infeasible { divisibility: bool },
    Timeout { restarts: usize, nodes: u64 },
}

impl Decomposition {
    pub fn edges(&self) -> Option<&Hypergraph> {
        match self {
            Decomposition::Solved { edges, .. } => Some(edges),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decomposition::Solved { .. } => "solved",
            Decomposition::Infeasible { .. } => "infeasible",
            Decomposition::Timeout { .. } => "timeout",
        }
    }
}

/// `K_k(L)` as a sorted k-uniform hypergraph.
pub fn candidates(leave: &Hypergraph) -> Hypergraph {
    leave.k_cliques()
}

/// Dancing-links matrix. Node 0 is the root, nodes `1..=cols` are column
/// headers.
struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    col: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
}

enum Search {
    Found,
    Exhausted,
    OutOfBudget,
}

impl Dlx {
    fn new(cols: usize, col_order: &[usize]) -> Dlx {
        let h = cols + 1;
        let mut d = Dlx {
            left: vec![0; h],
            right: vec![0; h],
            up: (0..h).collect(),
            down: (0..h).collect(),
            col: (0..h).collect(),
            row: vec![usize::MAX; h],
            size: vec![0; h],
        };
        // header ring in the requested order
        let mut prev = 0;
        for &c in col_order {
            let node = c + 1;
            d.right[prev] = node;
            d.left[node] = prev;
            prev = node;
        }
        d.right[prev] = 0;
        d.left[0] = prev;
        d
    }

    fn add_row(&mut self, row_id: usize, cols: &[usize]) {
        let first = self.left.len();
        for (i, &c) in cols.iter().enumerate() {
            let node = first + i;
            let header = c + 1;
            self.col.push(header);
            self.row.push(row_id);
            self.up.push(self.up[header]);
            self.down.push(header);
            let above = self.up[header];
            self.down[above] = node;
            self.up[header] = node;
            self.size[header] += 1;
            self.left.push(if i == 0 { first + cols.len() - 1 } else { node - 1 });
            self.right.push(if i + 1 == cols.len() { first } else { node + 1 });
        }
    }

    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = d;
                self.up[d] = u;
                self.size[self.col[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                self.size[self.col[j]] += 1;
                let (u, d) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[d] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    fn best_column(&self) -> Option<usize> {
        let mut c = self.right[0];
        let mut best = None;
        let mut best_size = usize::MAX;
        while c != 0 {
            if self.size[c] < best_size {
                best_size = self.size[c];
                best = Some(c);
                if best_size == 0 {
                    break;
                }
            }
            c = self.right[c];
        }
        best
    }

    /// Depth-first search for one solution.
    fn solve(&mut self, partial: &mut Vec<usize>, nodes: &mut u64, limit: u64, deadline: Instant) -> Search {
        let Some(c) = self.best_column() else {
            return Search::Found;
        };
        if self.size[c] == 0 {
            return Search::Exhausted;
        }
        *nodes += 1;
        if *nodes > limit || (*nodes % 4096 == 0 && Instant::now() > deadline) {
            return Search::OutOfBudget;
        }
        self.cover(c);
        let mut r = self.down[c];
        let mut result = Search::Exhausted;
        while r != c {
            partial.push(self.row[r]);
            let mut j = self.right[r];
            while j != r {
                self.cover(self.col[j]);
                j = self.right[j];
            }
            let sub = self.solve(partial, nodes, limit, deadline);
            let mut j = self.left[r];
            while j != r {
                self.uncover(self.col[j]);
                j = self.left[j];
            }
            match sub {
                Search::Found => {
                    result = Search::Found;
                    break;
                }
                Search::OutOfBudget => {
                    partial.pop();
                    result = Search::OutOfBudget;
                    break;
                }
                Search::Exhausted => {
                    partial.pop();
                }
            }
            r = self.down[r];
        }
        self.uncover(c);
        result
    }

    /// Number of solutions, stopping at `cap`.
    fn count(&mut self, cap: u64, found: &mut u64) {
        let Some(c) = self.best_column() else {
            *found += 1;
            return;
        };
        if self.size[c] == 0 {
            return;
        }
        self.cover(c);
        let mut r = self.down[c];
        while r != c && *found < cap {
            let mut j = self.right[r];
            while j != r {
                self.cover(self.col[j]);
                j = self.right[j];
            }
            self.count(cap, found);
            let mut j = self.left[r];
            while j != r {
                self.uncover(self.col[j]);
                j = self.left[j];
            }
            r = self.down[r];
        }
        self.uncover(c);
    }
}

/// Column indices (facet positions in `leave`) of each candidate row.
fn row_columns(leave: &Hypergraph, rows: &Hypergraph) -> Vec<Vec<usize>> {
    let k = rows.k();
    let binomial = Binomial::new(leave.n(), k);
    let index: HashMap<u64, usize> = leave.edges().enumerate().map(|(i, f)| (binomial.rank(f), i)).collect();
    rows.edges().map(|e| (0..k).map(|s| index[&binomial.rank_without(e, s)]).collect()).collect()
}

/// Randomized-restart exact cover. Rows in `prefer` come first in every
/// column; order within each class is shuffled per restart (restart 0 keeps
/// canonical order).
pub fn decompose_exact(p: &DecompositionProblem) -> Decomposition {
    let leave = p.leave;
    let k = leave.k() + 1;
    if leave.is_empty() {
        return Decomposition::Solved { edges: Hypergraph::empty(leave.n(), k), restart: 0, nodes: 0 };
    }
    if !leave.is_k_divisible(k) {
        return Decomposition::Infeasible { divisibility: true };
    }
    let rows = candidates(leave);
    let cols = row_columns(leave, &rows);
    let preferred: Vec<bool> = rows.edges().map(|e| p.prefer.is_some_and(|h| h.contains(e))).collect();
    let mut total_nodes = 0;
    for restart in 0..=p.budget.restarts {
        let mut rng = rng::stream(p.seed, "exact-cover", restart as u64);
        let mut col_order: Vec<usize> = (0..leave.len()).collect();
        let mut row_order: Vec<usize> = (0..rows.len()).collect();
        if restart > 0 {
            col_order.shuffle(&mut rng);
            row_order.shuffle(&mut rng);
        }
        row_order.sort_by_key(|&r| !preferred[r]);
        let mut dlx = Dlx::new(leave.len(), &col_order);
        for &r in &row_order {
            dlx.add_row(r, &cols[r]);
        }
        let limit = p.budget.base_nodes.saturating_mul(1u64 << restart.min(40));
        let deadline = Instant::now() + p.budget.attempt_time;
        let mut partial = Vec::new();
        let mut nodes = 0;
        let outcome = dlx.solve(&mut partial, &mut nodes, limit, deadline);
        total_nodes += nodes;
        match outcome {
            Search::Found => {
                let edges = Hypergraph::from_edges(leave.n(), k, partial.iter().map(|&r| rows.edge(r).to_vec()))
                    .expect("rows are valid edges");
                debug_assert!(verify_decomposition(leave, &edges));
                return Decomposition::Solved { edges, restart, nodes: total_nodes };
            }
            Search::Exhausted => return Decomposition::Infeasible { divisibility: false },
            Search::OutOfBudget => {}
        }
    }
    Decomposition::Timeout { restarts: p.budget.restarts, nodes: total_nodes }
}

/// Number of K_k-decompositions of `leave`, up to `cap`.
pub fn count_decompositions(leave: &Hypergraph, cap: u64) -> u64 {
    if leave.is_empty() {
        return 1;
    }
    let rows = candidates(leave);
    let cols = row_columns(leave, &rows);
    let order: Vec<usize> = (0..leave.len()).collect();
    let mut dlx = Dlx::new(leave.len(), &order);
    for (r, c) in cols.iter().enumerate() {
        dlx.add_row(r, c);
    }
    let mut found = 0;
    dlx.count(cap, &mut found);
    found
}

/// True iff every facet of `leave` lies in exactly one edge of `s` and every
/// facet of every edge of `s` is in `leave`.
pub fn verify_decomposition(leave: &Hypergraph, s: &Hypergraph) -> bool {
    if s.k() != leave.k() + 1 {
        return false;
    }
    let mut seen = vec![false; leave.len()];
    for e in s.edges() {
        for skip in 0..s.k() {
            let f = crate::combin::without(e, skip);
            match leave.position(&f) {
                Some(i) if !seen[i] => seen[i] = true,
                _ => return false,
            }
        }
    }
    seen.iter().all(|&b| b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[[u32; 2]]) -> Hypergraph {
        Hypergraph::from_edges(n, 2, edges.iter().map(|e| e.to_vec())).unwrap()
    }

    #[test]
    fn fano_plane_from_k7() {
        let l = Hypergraph::complete(7, 2);
        let d = decompose_exact(&DecompositionProblem::new(&l, 1));
        let s = d.edges().expect("STS(7) exists");
        assert_eq!(s.len(), 7);
        assert!(verify_decomposition(&l, s));
    }

    #[test]
    fn single_triangle() {
        let l = graph(3, &[[0, 1], [0, 2], [1, 2]]);
        let d = decompose_exact(&DecompositionProblem::new(&l, 0));
        assert_eq!(d.edges().unwrap(), &Hypergraph::complete(3, 3));
        assert_eq!(count_decompositions(&l, 10), 1);
    }

    #[test]
    fn k6_is_not_divisible() {
        let l = Hypergraph::complete(6, 2);
        assert_eq!(decompose_exact(&DecompositionProblem::new(&l, 0)), Decomposition::Infeasible { divisibility: true });
    }

    #[test]
    fn divisible_but_triangle_free_is_infeasible() {
        // C_9: even degrees, 9 edges, no triangles
        let edges: Vec<[u32; 2]> = (0..9u32).map(|i| { let j = (i + 1) % 9; [i.min(j), i.max(j)] }).collect();
        let l = graph(9, &edges);
        assert!(l.is_k_divisible(3));
        assert_eq!(decompose_exact(&DecompositionProblem::new(&l, 0)), Decomposition::Infeasible { divisibility: false });
    }

    #[test]
    fn empty_counts() {
        assert_eq!(count_decompositions(&Hypergraph::empty(5, 2), 10), 1);
        assert_eq!(count_decompositions(&Hypergraph::complete(7, 2), 1000), 30);
        assert_eq!(count_decompositions(&Hypergraph::complete(7, 2), 5), 5);
    }

    #[test]
    fn verify_rejects_bad_sets() {
        let l = Hypergraph::complete(7, 2);
        let s = decompose_exact(&DecompositionProblem::new(&l, 3)).edges().unwrap().clone();
        let missing = Hypergraph::from_edges(7, 3, s.edges().skip(1)).unwrap();
        assert!(!verify_decomposition(&l, &missing));
        let mut extra: Vec<Vec<u32>> = s.edges().map(|e| e.to_vec()).collect();
        let first = extra[0].clone();
        let clash = (0..7u32).find(|&v| !first.contains(&v)).unwrap();
        let mut bad = vec![first[0], first[1], clash];
        bad.sort_unstable();
        extra.push(bad);
        assert!(!verify_decomposition(&l, &Hypergraph::from_edges(7, 3, extra).unwrap()));
    }

    #[test]
    fn preferred_rows_are_used_when_possible() {
        let l = Hypergraph::complete(7, 2);
        let first = decompose_exact(&DecompositionProblem::new(&l, 0)).edges().unwrap().clone();
        let mut p = DecompositionProblem::new(&l, 0);
        p.prefer = Some(&first);
        assert_eq!(p.prefer.unwrap(), decompose_exact(&p).edges().unwrap());
    }

    #[test]
    fn timeout_is_not_infeasible() {
        let l = Hypergraph::complete(13, 2);
        let mut p = DecompositionProblem::new(&l, 0);
        p.budget = SolverBudget { base_nodes: 1, restarts: 1, attempt_time: Duration::from_secs(5) };
        assert!(matches!(decompose_exact(&p), Decomposition::Timeout { .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn solutions_verify(n in 7usize..16, seed in any::<u64>()) {
            let l = Hypergraph::complete(n, 2);
            let d = decompose_exact(&DecompositionProblem::new(&l, seed));
            if let Some(s) = d.edges() {
                prop_assert!(verify_decomposition(&l, s));
            }
            if n % 6 == 1 || n % 6 == 3 {
                prop_assert!(d.edges().is_some());
            } else {
                prop_assert_eq!(d, Decomposition::Infeasible { divisibility: true });
            }
        }
    }
}

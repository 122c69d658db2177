//! Rödl nibble and random greedy packing.
//!
//! Both produce a partial design `N` that is facet-disjoint from the
//! template, leaving the uncovered facets `L`. The leave is always
//! `K_{k-1}^n` minus the facets of `T ∪ N`, so
//! `k|N| + |L| + k|T| = C(n, k-1)` holds exactly at every step.

use crate::combin::{binom, Binomial};
use crate::hypergraph::Hypergraph;
use crate::rng;
use crate::template::Template;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

pub const DEFAULT_NU: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Reached,
    /// Ran out of steps before the density target.
    MaxSteps,
    /// `D_t < 1` or no eligible edges left.
    Stalled,
}

/// Optional per-row measurements of the leave; both are costly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub typicality_h: usize,
    pub typicality_samples: usize,
    pub affine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NibbleParams {
    pub nu: f64,
    pub target_density: f64,
    /// Defaults to `⌈10 ln n⌉`.
    pub max_steps: Option<usize>,
    pub diagnostics: Option<Diagnostics>,
}

impl Default for NibbleParams {
    fn default() -> Self {
        NibbleParams { nu: DEFAULT_NU, target_density: 0.05, max_steps: None, diagnostics: None }
    }
}

pub fn default_max_steps(n: usize) -> usize {
    (10.0 * (n as f64).ln()).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub eligible: usize,
    pub accepted: usize,
    pub leave: usize,
    pub d: f64,
    pub predicted_leave: f64,
    pub typicality_defect: Option<f64>,
    pub affine_c: Option<f64>,
    /// Uncovered facets inside no eligible edge.
    pub discrepancy: usize,
}

/// Bitset over colex ranks of (k-1)-sets.
#[derive(Debug, Clone)]
struct FacetSet {
    bits: Vec<u64>,
}

impl FacetSet {
    fn new(len: u64) -> FacetSet {
        FacetSet { bits: vec![0; (len as usize).div_ceil(64)] }
    }

    #[inline]
    fn contains(&self, r: u64) -> bool {
        self.bits[(r / 64) as usize] >> (r % 64) & 1 == 1
    }

    #[inline]
    fn insert(&mut self, r: u64) -> bool {
        let (w, b) = ((r / 64) as usize, r % 64);
        let fresh = self.bits[w] >> b & 1 == 0;
        self.bits[w] |= 1 << b;
        fresh
    }
}

#[derive(Debug, Clone)]
pub struct NibbleState {
    n: usize,
    k: usize,
    binomial: Binomial,
    covered: FacetSet,
    /// `G_t`, flat and sorted.
    eligible: Vec<u32>,
    /// `N_t`, flat in acceptance order.
    accepted: Vec<u32>,
    template_facets: usize,
    leave: usize,
    leave0: usize,
    divisible: bool,
    pub nu: f64,
    pub t: usize,
    pub trace: Vec<TraceRow>,
}

/// True when `K_{k-1}^n` is k-divisible: `(k - i) | C(n - i, k - 1 - i)` for
/// every `0 <= i <= k - 2`.
pub fn complete_is_divisible(n: usize, k: usize) -> bool {
    (0..k - 1).all(|i| binom((n - i) as u64, (k - 1 - i) as u64) % (k - i) as u64 == 0)
}

impl NibbleState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eligible_len(&self) -> usize {
        self.eligible.len() / self.k
    }

    pub fn accepted_len(&self) -> usize {
        self.accepted.len() / self.k
    }

    pub fn leave_len(&self) -> usize {
        self.leave
    }

    pub fn facet_total(&self) -> usize {
        binom(self.n as u64, (self.k - 1) as u64) as usize
    }

    pub fn leave_density(&self) -> f64 {
        self.leave as f64 / self.facet_total() as f64
    }

    /// `D_t = k|G_t| / |L_t|`; zero when the leave is empty.
    pub fn d(&self) -> f64 {
        if self.leave == 0 {
            0.0
        } else {
            (self.k * self.eligible_len()) as f64 / self.leave as f64
        }
    }

    /// `|L_0| (1 - ν e^{-kν})^t`.
    pub fn predicted_leave(&self, t: usize) -> f64 {
        self.leave0 as f64 * (1.0 - self.nu * (-(self.k as f64) * self.nu).exp()).powi(t as i32)
    }

    pub fn eligible(&self) -> Hypergraph {
        Hypergraph::from_sorted_flat(self.n, self.k, self.eligible.clone())
    }

    pub fn partial_design(&self) -> Hypergraph {
        Hypergraph::from_edges(self.n, self.k, self.accepted.chunks(self.k)).expect("accepted edges are valid")
    }

    /// Accepted edges in acceptance order.
    pub fn accepted_edges(&self) -> impl Iterator<Item = &[u32]> {
        self.accepted.chunks(self.k)
    }

    pub fn leave(&self) -> Hypergraph {
        let mut verts = Vec::with_capacity(self.leave * (self.k - 1));
        crate::combin::for_each_combination(self.n as u32, self.k - 1, |f| {
            if !self.covered.contains(self.binomial.rank(f)) {
                verts.extend_from_slice(f);
            }
        });
        Hypergraph::from_edges(self.n, self.k - 1, verts.chunks(self.k - 1).map(|c| c.to_vec()))
            .expect("facets are valid")
    }

    #[inline]
    fn facets_free(&self, e: &[u32]) -> bool {
        (0..self.k).all(|s| !self.covered.contains(self.binomial.rank_without(e, s)))
    }

    fn cover(&mut self, e: &[u32]) {
        for s in 0..self.k {
            let fresh = self.covered.insert(self.binomial.rank_without(e, s));
            assert!(fresh, "accepted edge {e:?} reuses a covered facet");
            self.leave -= 1;
        }
    }

    fn drop_blocked(&mut self) {
        let k = self.k;
        let kept: Vec<u32> = self
            .eligible
            .par_chunks(k)
            .filter(|e| self.facets_free(e))
            .flat_map_iter(|e| e.iter().copied())
            .collect();
        self.eligible = kept;
    }

    fn discrepancy(&self) -> usize {
        let mut inside = FacetSet::new(self.facet_total() as u64);
        for e in self.eligible.chunks(self.k) {
            for s in 0..self.k {
                inside.insert(self.binomial.rank_without(e, s));
            }
        }
        let mut count = 0;
        for r in 0..self.facet_total() as u64 {
            if !self.covered.contains(r) && !inside.contains(r) {
                count += 1;
            }
        }
        count
    }

    fn check_invariants(&self) {
        assert_eq!(
            self.k * self.accepted_len() + self.leave + self.template_facets,
            self.facet_total(),
            "facet accounting identity"
        );
        if self.divisible {
            assert!(self.leave().is_k_divisible(self.k), "leave lost k-divisibility at t={}", self.t);
        }
    }

    fn record(&mut self, diagnostics: Option<Diagnostics>, template: &Template, seed: u64) {
        let (mut typ, mut aff) = (None, None);
        if let Some(diag) = diagnostics {
            let leave = self.leave();
            if diag.typicality_samples > 0 {
                typ = leave
                    .typicality_defect(diag.typicality_h, diag.typicality_samples, rng::derive(seed, "trace", self.t as u64))
                    .ok()
                    .map(|t| t.defect);
            }
            if diag.affine {
                if let Some(layer) = template.layers().first() {
                    aff = leave.affine_bound(&layer.injection).ok();
                }
            }
        }
        let row = TraceRow {
            t: self.t,
            eligible: self.eligible_len(),
            accepted: self.accepted_len(),
            leave: self.leave,
            d: self.d(),
            predicted_leave: self.predicted_leave(self.t),
            typicality_defect: typ,
            affine_c: aff,
            discrepancy: self.discrepancy(),
        };
        self.trace.push(row);
    }
}

/// `G_0`: host edges facet-disjoint from the template. `N_0 = ∅`.
pub fn nibble_init(h: &Hypergraph, template: &Template, nu: f64) -> NibbleState {
    let (n, k) = (h.n(), h.k());
    assert!(k >= 2, "nibble needs k >= 2");
    let binomial = Binomial::new(n, k);
    let total = binom(n as u64, (k - 1) as u64);
    let mut covered = FacetSet::new(total);
    let mut template_facets = 0;
    for layer in template.layers() {
        for e in layer.edges.edges() {
            for s in 0..k {
                assert!(covered.insert(binomial.rank_without(e, s)), "template is not a partial design");
                template_facets += 1;
            }
        }
    }
    let mut state = NibbleState {
        n,
        k,
        binomial,
        covered,
        eligible: Vec::new(),
        accepted: Vec::new(),
        template_facets,
        leave: total as usize - template_facets,
        leave0: total as usize - template_facets,
        divisible: complete_is_divisible(n, k),
        nu,
        t: 0,
        trace: Vec::new(),
    };
    let kept: Vec<u32> =
        h.edges().collect::<Vec<_>>().par_iter().filter(|e| state.facets_free(e)).flat_map_iter(|e| e.iter().copied()).collect();
    state.eligible = kept;
    state
}

/// Keyed bite uniform for edge `e` at step `t`.
#[inline]
fn bite_uniform(seed: u64, t: usize, rank: u64) -> f64 {
    rng::unit(rng::keyed(&[seed, 0x6E69_6262_6C65, t as u64, rank]))
}

/// One nibble round. Returns false (state untouched) on the stop signal:
/// no eligible edges or `D_t < 1`.
pub fn nibble_step(state: &mut NibbleState, seed: u64) -> bool {
    let d = state.d();
    if state.eligible.is_empty() || d < 1.0 {
        return false;
    }
    let rate = state.nu / d;
    let k = state.k;
    let t = state.t;
    let binomial = &state.binomial;
    let bite: Vec<&[u32]> =
        state.eligible.par_chunks(k).filter(|e| bite_uniform(seed, t, binomial.rank(e)) < rate).collect();
    let mut counts: HashMap<u64, u32> = HashMap::with_capacity(bite.len() * k);
    for e in &bite {
        for s in 0..k {
            *counts.entry(binomial.rank_without(e, s)).or_insert(0) += 1;
        }
    }
    let keep: Vec<Vec<u32>> =
        bite.iter().filter(|e| (0..k).all(|s| counts[&binomial.rank_without(e, s)] == 1)).map(|e| e.to_vec()).collect();
    for e in &keep {
        state.cover(e);
        state.accepted.extend_from_slice(e);
    }
    state.drop_blocked();
    state.t += 1;
    true
}

#[derive(Debug, Clone)]
pub struct NibbleOutcome {
    pub partial: Hypergraph,
    pub leave: Hypergraph,
    pub trace: Vec<TraceRow>,
    pub status: Status,
}

pub fn nibble_run(h: &Hypergraph, template: &Template, params: &NibbleParams, seed: u64) -> NibbleOutcome {
    assert!(params.nu > 0.0 && params.nu <= 1.0, "nu must lie in (0, 1]");
    let max_steps = params.max_steps.unwrap_or_else(|| default_max_steps(h.n()));
    let mut state = nibble_init(h, template, params.nu);
    state.check_invariants();
    state.record(params.diagnostics, template, seed);
    let status = loop {
        if state.leave_density() <= params.target_density {
            break Status::Reached;
        }
        if state.t >= max_steps {
            break Status::MaxSteps;
        }
        if !nibble_step(&mut state, seed) {
            break Status::Stalled;
        }
        state.check_invariants();
        state.record(params.diagnostics, template, seed);
    };
    NibbleOutcome { partial: state.partial_design(), leave: state.leave(), trace: state.trace, status }
}

/// Random greedy packing as a scan of the eligible edges in uniformly random
/// order: an edge is taken when it is still facet-disjoint from `T ∪ N`.
/// Rows are logged roughly fifty times over the run.
pub fn greedy_pack_run(h: &Hypergraph, template: &Template, target_density: f64, seed: u64) -> NibbleOutcome {
    let mut state = nibble_init(h, template, 0.0);
    state.check_invariants();
    state.record(None, template, seed);
    let k = state.k;
    let mut order: Vec<usize> = (0..state.eligible_len()).collect();
    order.shuffle(&mut rng::stream(seed, "greedy", 0));
    let every = (state.leave0 / (k * 50)).max(1);
    let candidates = std::mem::take(&mut state.eligible);
    let mut status = Status::Stalled;
    for (pos, &i) in order.iter().enumerate() {
        if state.leave_density() <= target_density {
            status = Status::Reached;
            break;
        }
        let e = &candidates[i * k..(i + 1) * k];
        if !state.facets_free(e) {
            continue;
        }
        state.cover(e);
        state.accepted.extend_from_slice(e);
        if state.accepted_len() % every == 0 {
            state.eligible = remaining(&state, &candidates, &order[pos + 1..]);
            state.t += 1;
            state.check_invariants();
            state.record(None, template, seed);
        }
    }
    if state.leave_density() <= target_density {
        status = Status::Reached;
    }
    state.eligible = remaining(&state, &candidates, &order);
    state.t += 1;
    state.check_invariants();
    state.record(None, template, seed);
    NibbleOutcome { partial: state.partial_design(), leave: state.leave(), trace: state.trace, status }
}

/// Still-eligible edges among `rest`, sorted.
fn remaining(state: &NibbleState, candidates: &[u32], rest: &[usize]) -> Vec<u32> {
    let k = state.k;
    let mut idx: Vec<usize> = rest.iter().copied().filter(|&i| state.facets_free(&candidates[i * k..(i + 1) * k])).collect();
    idx.sort_unstable();
    idx.iter().flat_map(|&i| candidates[i * k..(i + 1) * k].iter().copied()).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "G", "N", "L", "D", "predicted_L", "typicality_defect", "affine_C", "discrepancy_count"])?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.eligible.to_string(),
            r.accepted.to_string(),
            r.leave.to_string(),
            format!("{}", r.d),
            format!("{}", r.predicted_leave),
            opt(r.typicality_defect),
            opt(r.affine_c),
            r.discrepancy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! Random greedy absorption of the leave decomposition, final assembly and
//! the end-to-end pipeline.
//!
//! Each edge `s` of the leave decomposition `S` gets an absorber `A_s`
//! chosen uniformly among those facet-disjoint from the absorbers chosen so
//! far and from `S \ {s}`. The design is then
//! `N ∪ (T \ ∪ A^alg) ∪ ∪ A^non-alg`.

use crate::combin::{binom, Binomial};
use crate::gf::{FieldCtx, FieldPolicy};
use crate::hypergraph::{sample_hnp, Hypergraph};
use crate::leave::{decompose_exact, Decomposition, DecompositionProblem, SolverBudget};
use crate::nibble::{nibble_init, nibble_run, Diagnostics, NibbleParams, Status};
use crate::operators::{apply, build_families, OperatorFamily};
use crate::rng;
use crate::template::{
    build_template, find_absorbers, layer_count, sample_injection, select_layer, Absorber, AbsorberSearch, Template,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::time::Instant;
use thiserror::Error;

/// Pairwise facet-disjoint edges with a live facet index.
#[derive(Debug, Clone)]
pub struct PartialDesign {
    n: usize,
    k: usize,
    binomial: Binomial,
    edges: Vec<Vec<u32>>,
    covered: HashMap<u64, usize>,
}

impl PartialDesign {
    pub fn new(n: usize, k: usize) -> PartialDesign {
        PartialDesign { n, k, binomial: Binomial::new(n, k), edges: Vec::new(), covered: HashMap::new() }
    }

    pub fn from_hypergraph(h: &Hypergraph) -> Result<PartialDesign, Vec<u32>> {
        let mut p = PartialDesign::new(h.n(), h.k());
        for e in h.edges() {
            p.insert(e)?;
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn facet_rank(&self, facet: &[u32]) -> u64 {
        self.binomial.rank(facet)
    }

    pub fn covers(&self, facet_rank: u64) -> bool {
        self.covered.contains_key(&facet_rank)
    }

    pub fn is_free(&self, edge: &[u32]) -> bool {
        (0..self.k).all(|s| !self.covered.contains_key(&self.binomial.rank_without(edge, s)))
    }

    /// Adds a sorted edge; on conflict returns the first shared facet.
    pub fn insert(&mut self, edge: &[u32]) -> Result<(), Vec<u32>> {
        if let Some(s) = (0..self.k).find(|&s| self.covered.contains_key(&self.binomial.rank_without(edge, s))) {
            return Err(crate::combin::without(edge, s));
        }
        let id = self.edges.len();
        for s in 0..self.k {
            self.covered.insert(self.binomial.rank_without(edge, s), id);
        }
        self.edges.push(edge.to_vec());
        Ok(())
    }

    pub fn to_hypergraph(&self) -> Hypergraph {
        Hypergraph::from_edges(self.n, self.k, self.edges.iter().cloned()).expect("edges are valid")
    }
}

/// A verified Steiner system.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub edges: Hypergraph,
}

impl Design {
    pub fn n(&self) -> usize {
        self.edges.n()
    }

    pub fn k(&self) -> usize {
        self.edges.k()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SteinerViolation {
    #[error("facet {0:?} is covered {1} times")]
    Coverage(Vec<u32>, usize),
    #[error("edge {0:?} is not in the host")]
    NotInHost(Vec<u32>),
}

/// First violation of the Steiner property, if any.
pub fn steiner_violation(d: &Hypergraph, host: Option<&Hypergraph>) -> Option<SteinerViolation> {
    let (n, k) = (d.n(), d.k());
    if let Some(h) = host {
        if let Some(e) = d.edges().find(|e| !h.contains(e)) {
            return Some(SteinerViolation::NotInHost(e.to_vec()));
        }
    }
    let binomial = Binomial::new(n, k);
    let mut count = vec![0u8; binom(n as u64, (k - 1) as u64) as usize];
    for e in d.edges() {
        for s in 0..k {
            let r = binomial.rank_without(e, s) as usize;
            count[r] = count[r].saturating_add(1);
        }
    }
    let bad = count.iter().position(|&c| c != 1)?;
    let mut facet = Vec::new();
    binomial.unrank(bad as u64, k - 1, &mut facet);
    Some(SteinerViolation::Coverage(facet, count[bad] as usize))
}

/// Every (k-1)-set of `[n]` lies in exactly one edge, and `D ⊆ H` when a
/// host is given.
pub fn verify_steiner(d: &Hypergraph, host: Option<&Hypergraph>) -> bool {
    steiner_violation(d, host).is_none()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AbsorbAbort {
    pub index: usize,
    pub edge: Vec<u32>,
    pub candidates: usize,
    pub excluded_by_absorbers: usize,
    pub excluded_by_leave: usize,
    /// Candidates whose facet `F(x; a)` was already taken, per facet
    /// operator label.
    pub facet_operator_exclusions: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbsorbError {
    #[error("no permissible absorber for edge #{} {:?} ({} candidates)", .0.index, .0.edge, .0.candidates)]
    Abort(Box<AbsorbAbort>),
    #[error("no template layer for edge {0:?}")]
    NoLayer(Vec<u32>),
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AbsorbStep {
    pub edge: Vec<u32>,
    pub candidates: usize,
    pub permissible: usize,
}

/// Candidate absorbers per target edge, reused across retries.
#[derive(Default)]
pub struct AbsorberCache {
    map: HashMap<Vec<u32>, std::sync::Arc<Vec<Candidate>>>,
}

struct Candidate {
    absorber: Absorber,
    facets: Vec<u64>,
}

impl AbsorberCache {
    pub fn new() -> AbsorberCache {
        AbsorberCache::default()
    }
}

fn candidates_for(
    cache: &mut AbsorberCache,
    x: &[u32],
    host: &Hypergraph,
    template: &Template,
    layer: usize,
    search: AbsorberSearch,
    binomial: &Binomial,
) -> std::sync::Arc<Vec<Candidate>> {
    cache
        .map
        .entry(x.to_vec())
        .or_insert_with(|| {
            let found = find_absorbers(x, host, template, layer, search);
            std::sync::Arc::new(
                found
                    .into_iter()
                    .map(|absorber| {
                        let facets = absorber.facet_set().iter().map(|f| binomial.rank(f)).collect();
                        Candidate { absorber, facets }
                    })
                    .collect(),
            )
        })
        .clone()
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Absorption {
    #[serde(skip)]
    pub absorbers: Vec<Absorber>,
    pub steps: Vec<AbsorbStep>,
}

/// Random greedy absorption of `targets ⊆ S` in lexicographic order.
/// Absorbers must avoid facets of earlier absorbers and of `S \ {s}`.
pub fn rga_absorb(
    s: &Hypergraph,
    targets: &Hypergraph,
    template: &Template,
    host: &Hypergraph,
    seed: u64,
    search: AbsorberSearch,
    cache: &mut AbsorberCache,
) -> Result<Absorption, AbsorbError> {
    let (n, k) = (s.n(), s.k());
    let binomial = Binomial::new(n, k);
    let leave_facets: HashSet<u64> =
        s.edges().flat_map(|e| (0..k).map(|j| binomial.rank_without(e, j)).collect::<Vec<_>>()).collect();
    let mut used: HashSet<u64> = HashSet::new();
    let mut absorbers = Vec::with_capacity(targets.len());
    let mut steps = Vec::with_capacity(targets.len());
    let mut rng = rng::stream(seed, "rga", 0);
    for (index, x) in targets.edges().enumerate() {
        let layer = select_layer(x, template).map_err(|_| AbsorbError::NoLayer(x.to_vec()))?;
        let cands = candidates_for(cache, x, host, template, layer, search, &binomial);
        let own: HashSet<u64> = (0..k).map(|j| binomial.rank_without(x, j)).collect();
        let blocked_by_leave = |f: &u64| leave_facets.contains(f) && !own.contains(f);

        let permissible: Vec<usize> = (0..cands.len())
            .filter(|&i| cands[i].facets.iter().all(|f| !used.contains(f) && !blocked_by_leave(f)))
            .collect();

        // same count through an inverted facet index
        let mut index_of: HashMap<u64, Vec<usize>> = HashMap::new();
        for (i, c) in cands.iter().enumerate() {
            for &f in &c.facets {
                index_of.entry(f).or_default().push(i);
            }
        }
        let mut by_absorbers = vec![false; cands.len()];
        let mut by_leave = vec![false; cands.len()];
        for f in &used {
            for &i in index_of.get(f).map(|v| v.as_slice()).unwrap_or(&[]) {
                by_absorbers[i] = true;
            }
        }
        for f in leave_facets.iter().filter(|f| !own.contains(f)) {
            for &i in index_of.get(f).map(|v| v.as_slice()).unwrap_or(&[]) {
                by_leave[i] = true;
            }
        }
        let excluded = (0..cands.len()).filter(|&i| by_absorbers[i] || by_leave[i]).count();
        assert_eq!(permissible.len(), cands.len() - excluded, "permissible count disagrees between index and filter");

        steps.push(AbsorbStep { edge: x.to_vec(), candidates: cands.len(), permissible: permissible.len() });
        if permissible.is_empty() {
            let family = build_families(k, *template.layer(layer).injection.field());
            let exclusions = facet_operator_exclusions(&family, &cands, template, layer, &used, &binomial, &blocked_by_leave);
            return Err(AbsorbError::Abort(Box::new(AbsorbAbort {
                index,
                edge: x.to_vec(),
                candidates: cands.len(),
                excluded_by_absorbers: by_absorbers.iter().filter(|&&b| b).count(),
                excluded_by_leave: by_leave.iter().filter(|&&b| b).count(),
                facet_operator_exclusions: exclusions,
            })));
        }
        let pick = &cands[permissible[rng.gen_range(0..permissible.len())]];
        used.extend(pick.facets.iter().copied());
        absorbers.push(pick.absorber.clone());
    }
    Ok(Absorption { absorbers, steps })
}

fn facet_operator_exclusions(
    family: &OperatorFamily,
    cands: &[Candidate],
    template: &Template,
    layer: usize,
    used: &HashSet<u64>,
    binomial: &Binomial,
    blocked_by_leave: &dyn Fn(&u64) -> bool,
) -> Vec<(String, usize)> {
    let pi = &template.layer(layer).injection;
    family
        .facet
        .iter()
        .map(|op| {
            let hits = cands
                .iter()
                .filter(|c| {
                    let values = apply(&op.matrix, &c.absorber.outer.x, &c.absorber.outer.a, &family.field).expect("k matches");
                    let facet = pi.vertices_of(&values).expect("absorber vertices are in the image");
                    let r = binomial.rank(&facet);
                    used.contains(&r) || blocked_by_leave(&r)
                })
                .count();
            (op.label(), hits)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssembleError {
    #[error("assembled union is not a Steiner system: {0}")]
    Violation(SteinerViolation),
}

/// `N ∪ (T \ ∪ A^alg) ∪ ∪ A^non-alg ∪ extra`, verified before return.
/// `extra` holds leave-decomposition edges kept as they are.
pub fn assemble_design(
    partial: &Hypergraph,
    template: &Template,
    absorbers: &[Absorber],
    extra: &Hypergraph,
) -> Result<Design, AssembleError> {
    let (n, k) = (partial.n(), partial.k());
    let swapped: HashSet<&[u32]> = absorbers.iter().flat_map(|a| a.alg.iter().map(|e| e.as_slice())).collect();
    let mut edges: Vec<Vec<u32>> = partial.edges().map(|e| e.to_vec()).collect();
    for layer in template.layers() {
        edges.extend(layer.edges.edges().filter(|e| !swapped.contains(e)).map(|e| e.to_vec()));
    }
    for a in absorbers {
        edges.extend(a.non_alg.iter().cloned());
    }
    edges.extend(extra.edges().map(|e| e.to_vec()));
    let total = edges.len();
    let d = Hypergraph::from_edges(n, k, edges).expect("edges are valid");
    if d.len() != total {
        // a repeated edge covers its facets twice
        let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
        for e in partial.edges().chain(extra.edges()) {
            *counts.entry(e.to_vec()).or_default() += 1;
        }
        let facet = counts.keys().next().map(|e| crate::combin::without(e, 0)).unwrap_or_default();
        return Err(AssembleError::Violation(SteinerViolation::Coverage(facet, 2)));
    }
    match steiner_violation(&d, None) {
        None => Ok(Design { edges: d }),
        Some(v) => Err(AssembleError::Violation(v)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsorbMode {
    /// Absorb every leave-decomposition edge.
    Faithful,
    /// Keep leave-decomposition edges that are already in the host.
    SkipHost,
}

impl std::str::FromStr for AbsorbMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "faithful" => Ok(AbsorbMode::Faithful),
            "skip-host" | "skip_host" => Ok(AbsorbMode::SkipHost),
            _ => Err(format!("unknown absorb mode {s:?} (faithful | skip-host)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub field_policy: FieldPolicy,
    pub nu: f64,
    pub target_density: f64,
    pub max_steps: Option<usize>,
    pub mode: AbsorbMode,
    pub template_retries: usize,
    pub nibble_retries: usize,
    pub absorb_retries: usize,
    pub solver: SolverBudget,
    /// Absorber candidates kept per target edge; `None` keeps all.
    pub absorber_limit: Option<usize>,
    pub absorber_samples: usize,
    pub diagnostics: Option<Diagnostics>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            field_policy: FieldPolicy::Minimal,
            nu: crate::nibble::DEFAULT_NU,
            target_density: 0.45,
            max_steps: None,
            mode: AbsorbMode::Faithful,
            template_retries: 5,
            nibble_retries: 5,
            absorb_retries: 3,
            solver: SolverBudget { base_nodes: 100_000, restarts: 3, ..SolverBudget::default() },
            absorber_limit: None,
            absorber_samples: 1_000_000,
            diagnostics: None,
        }
    }
}

/// What happened in one attempt of the pipeline's retry loop.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Attempt {
    pub template_try: usize,
    pub nibble_try: Option<usize>,
    pub absorb_try: Option<usize>,
    pub outcome: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Provenance {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
    pub host_seed: u64,
    pub config: PipelineConfig,
    pub host_edges: usize,
    pub field_bits: u32,
    pub template_edges: Vec<usize>,
    pub template_collisions: Vec<usize>,
    pub nibble_status: Option<Status>,
    pub nibble_steps: usize,
    pub partial_edges: usize,
    pub leave_facets: usize,
    pub solver: Option<String>,
    pub solver_restart: Option<usize>,
    pub solver_nodes: u64,
    pub decomposition_edges: usize,
    pub decomposition_in_host: usize,
    pub absorbed: usize,
    pub absorb_steps: Vec<AbsorbStep>,
    pub abort: Option<AbsorbAbort>,
    pub design_edges: usize,
    /// The design's indicator solves the fractional decomposition LP on H.
    pub indicator_feasible: Option<bool>,
    pub attempts: Vec<Attempt>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub host: Hypergraph,
    pub design: Option<Design>,
    pub provenance: Provenance,
    pub trace: Vec<crate::nibble::TraceRow>,
    pub absorbers: Vec<Absorber>,
    pub seconds: f64,
}

impl PipelineRun {
    pub fn succeeded(&self) -> bool {
        self.design.is_some()
    }
}

/// Seed of the host hypergraph for a trial seed; shared across `p` so that
/// hosts are monotonically coupled.
pub fn host_seed(seed: u64) -> u64 {
    rng::derive(seed, "host", 0)
}

/// Facets of `leave` lying in no k-clique of `leave`: no decomposition of any
/// sub-leave can cover them.
pub fn uncoverable_facets(leave: &Hypergraph) -> usize {
    leave.len() - leave.k_cliques().facets_of().len()
}

/// Sample `H(n; p)`, build the template, nibble, decompose the leave, absorb
/// and assemble, retrying each stage with fresh sub-seeds.
pub fn run_pipeline(n: usize, k: usize, p: f64, seed: u64, config: &PipelineConfig) -> PipelineRun {
    let started = Instant::now();
    let hs = host_seed(seed);
    let host = sample_hnp(n, k, p, hs).expect("valid parameters");
    let mut run = run_on_host(host, p, seed, config);
    run.provenance.host_seed = hs;
    run.seconds = started.elapsed().as_secs_f64();
    run
}

/// The pipeline on a given host.
pub fn run_on_host(host: Hypergraph, p: f64, seed: u64, config: &PipelineConfig) -> PipelineRun {
    let started = Instant::now();
    let (n, k) = (host.n(), host.k());
    let mut prov = Provenance {
        n,
        k,
        p,
        seed,
        host_seed: 0,
        config: config.clone(),
        host_edges: host.len(),
        field_bits: 0,
        template_edges: Vec::new(),
        template_collisions: Vec::new(),
        nibble_status: None,
        nibble_steps: 0,
        partial_edges: 0,
        leave_facets: 0,
        solver: None,
        solver_restart: None,
        solver_nodes: 0,
        decomposition_edges: 0,
        decomposition_in_host: 0,
        absorbed: 0,
        absorb_steps: Vec::new(),
        abort: None,
        design_edges: 0,
        indicator_feasible: None,
        attempts: Vec::new(),
    };
    let finish = |prov: Provenance, design, trace, absorbers, host| PipelineRun {
        host,
        design,
        provenance: prov,
        trace,
        absorbers,
        seconds: started.elapsed().as_secs_f64(),
    };
    let field = match FieldCtx::for_vertices(n, config.field_policy) {
        Ok(f) => f,
        Err(e) => {
            prov.attempts.push(Attempt { template_try: 0, nibble_try: None, absorb_try: None, outcome: e.to_string() });
            return finish(prov, None, Vec::new(), Vec::new(), host);
        }
    };
    prov.field_bits = field.bits();
    let mut last_trace = Vec::new();
    for ti in 0..=config.template_retries {
        let attempt = |nt: Option<usize>, at: Option<usize>, outcome: String| Attempt {
            template_try: ti,
            nibble_try: nt,
            absorb_try: at,
            outcome,
        };
        let pis = (0..layer_count(k))
            .map(|l| sample_injection(n, &field, rng::derive(seed, "injection", (ti * 64 + l) as u64)))
            .collect::<Result<Vec<_>, _>>();
        let pis = match pis {
            Ok(p) => p,
            Err(e) => {
                prov.attempts.push(attempt(None, None, e.to_string()));
                break;
            }
        };
        let template = build_template(&host, pis).expect("injection count matches k");
        prov.template_edges = template.layers().iter().map(|l| l.edges.len()).collect();
        prov.template_collisions = template.layers().iter().map(|l| l.collisions).collect();

        // the nibble only removes facets, so a facet of L_0 inside no k-clique
        // of L_0 can never be decomposed
        let stuck = uncoverable_facets(&nibble_init(&host, &template, config.nu).leave());
        if stuck > 0 {
            prov.attempts.push(attempt(None, None, format!("leave has {stuck} uncoverable facets")));
            continue;
        }

        for ni in 0..=config.nibble_retries {
            let params = NibbleParams {
                nu: config.nu,
                target_density: config.target_density,
                max_steps: config.max_steps,
                diagnostics: config.diagnostics,
            };
            let nseed = rng::derive(seed, "nibble", (ti * 64 + ni) as u64);
            let out = nibble_run(&host, &template, &params, nseed);
            prov.nibble_status = Some(out.status);
            prov.nibble_steps = out.trace.len().saturating_sub(1);
            prov.partial_edges = out.partial.len();
            prov.leave_facets = out.leave.len();
            last_trace = out.trace.clone();

            let problem = DecompositionProblem {
                leave: &out.leave,
                prefer: Some(&host),
                budget: config.solver,
                seed: rng::derive(seed, "decompose", (ti * 64 + ni) as u64),
            };
            let decomposition = decompose_exact(&problem);
            prov.solver = Some(decomposition.label().to_string());
            let (s, restart, nodes) = match decomposition {
                Decomposition::Solved { edges, restart, nodes } => (edges, restart, nodes),
                Decomposition::Timeout { nodes, .. } => {
                    prov.solver_nodes = nodes;
                    prov.attempts.push(attempt(Some(ni), None, "leave decomposition timed out".into()));
                    continue;
                }
                Decomposition::Infeasible { divisibility } => {
                    let why = if divisibility { "leave not divisible" } else { "leave decomposition infeasible" };
                    prov.attempts.push(attempt(Some(ni), None, why.into()));
                    continue;
                }
            };
            prov.solver_restart = Some(restart);
            prov.solver_nodes = nodes;
            prov.decomposition_edges = s.len();
            prov.decomposition_in_host = s.edges().filter(|e| host.contains(e)).count();
            let (targets, kept) = match config.mode {
                AbsorbMode::Faithful => (s.clone(), Hypergraph::empty(n, k)),
                AbsorbMode::SkipHost => {
                    let outside = s.difference(&host);
                    let inside = s.difference(&outside);
                    (outside, inside)
                }
            };
            let search = AbsorberSearch {
                limit: config.absorber_limit,
                samples: config.absorber_samples,
                seed: rng::derive(seed, "absorber-search", ti as u64),
            };
            let mut cache = AbsorberCache::new();
            for ai in 0..=config.absorb_retries {
                let aseed = rng::derive(seed, "absorb", ((ti * 64 + ni) * 64 + ai) as u64);
                match rga_absorb(&s, &targets, &template, &host, aseed, search, &mut cache) {
                    Ok(absorption) => {
                        prov.absorbed = absorption.absorbers.len();
                        prov.absorb_steps = absorption.steps;
                        prov.abort = None;
                        match assemble_design(&out.partial, &template, &absorption.absorbers, &kept) {
                            Ok(design) => {
                                assert!(verify_steiner(&design.edges, Some(&host)), "assembled design leaves the host");
                                prov.design_edges = design.edges.len();
                                let indicator = crate::fractional::indicator_is_feasible(&host, &design.edges);
                                assert!(indicator, "design indicator is not a fractional decomposition");
                                prov.indicator_feasible = Some(indicator);
                                prov.attempts.push(attempt(Some(ni), Some(ai), "success".into()));
                                return finish(prov, Some(design), last_trace, absorption.absorbers, host);
                            }
                            Err(e) => panic!("assembly failed after a successful absorption: {e}"),
                        }
                    }
                    Err(AbsorbError::Abort(abort)) => {
                        prov.attempts.push(attempt(Some(ni), Some(ai), format!("absorption aborted at #{}", abort.index)));
                        prov.abort = Some(*abort);
                    }
                    Err(AbsorbError::NoLayer(x)) => {
                        prov.attempts.push(attempt(Some(ni), Some(ai), format!("no template layer for {x:?}")));
                        break;
                    }
                }
            }
        }
    }
    finish(prov, None, last_trace, Vec::new(), host)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::Injection;

    fn fano() -> Hypergraph {
        Hypergraph::from_edges(7, 3, [[0u32, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]]).unwrap()
    }

    #[test]
    fn verify_steiner_examples() {
        let f = fano();
        assert!(verify_steiner(&f, None));
        assert!(verify_steiner(&f, Some(&Hypergraph::complete(7, 3))));
        let missing = Hypergraph::from_edges(7, 3, f.edges().skip(1)).unwrap();
        assert!(matches!(steiner_violation(&missing, None), Some(SteinerViolation::Coverage(_, 0))));
        let mut dup: Vec<Vec<u32>> = f.edges().map(|e| e.to_vec()).collect();
        dup.push(vec![0, 1, 3]);
        assert!(!verify_steiner(&Hypergraph::from_edges(7, 3, dup).unwrap(), None));
        let small_host = Hypergraph::from_edges(7, 3, f.edges().skip(1)).unwrap();
        assert!(matches!(steiner_violation(&f, Some(&small_host)), Some(SteinerViolation::NotInHost(_))));
    }

    #[test]
    fn partial_design_rejects_shared_facets() {
        let mut p = PartialDesign::new(6, 3);
        p.insert(&[0, 1, 2]).unwrap();
        assert_eq!(p.insert(&[0, 1, 3]), Err(vec![0, 1]));
        assert!(p.is_free(&[0, 3, 4]));
        p.insert(&[0, 3, 4]).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn empty_leave_needs_no_absorbers() {
        let n = 7;
        let host = Hypergraph::complete(n, 3);
        let f = FieldCtx::new(3).unwrap();
        let pi = Injection::from_values(f, (1..=7).map(crate::gf::FieldElement).collect()).unwrap();
        let t = build_template(&host, vec![pi]).unwrap();
        // seven points onto GF(8)*: the template is a Fano plane
        assert_eq!(t.len(), 7);
        let empty = Hypergraph::empty(n, 3);
        let a = rga_absorb(&empty, &empty, &t, &host, 0, AbsorberSearch::default(), &mut AbsorberCache::new()).unwrap();
        assert!(a.absorbers.is_empty());
        let d = assemble_design(&empty, &t, &[], &empty).unwrap();
        assert!(verify_steiner(&d.edges, Some(&host)));
    }

    /// With π onto all of GF(32)*, the template is a Steiner triple system.
    /// Swapping an absorber's alg edges for its non-alg edges covers every
    /// facet once more for the facets of x, and no others change.
    #[test]
    fn single_absorber_swaps_coverage() {
        let n = 31;
        let host = Hypergraph::complete(n, 3);
        let f = FieldCtx::new(5).unwrap();
        let pi = Injection::from_values(f, (1..=31).map(crate::gf::FieldElement).collect()).unwrap();
        let t = build_template(&host, vec![pi]).unwrap();
        let empty = Hypergraph::empty(n, 3);
        assert!(verify_steiner(&assemble_design(&empty, &t, &[], &empty).unwrap().edges, None));
        let x = (0..n as u32)
            .flat_map(|a| (a + 1..n as u32).flat_map(move |b| (b + 1..n as u32).map(move |c| vec![a, b, c])))
            .find(|e| !t.union().contains(e))
            .unwrap();
        let found = find_absorbers(&x, &host, &t, 0, AbsorberSearch { limit: Some(3), ..Default::default() });
        assert!(!found.is_empty());
        for a in &found {
            assert_eq!(a.facet_set().len(), 39);
            let mut count: HashMap<Vec<u32>, i32> = HashMap::new();
            for e in t.union().edges().filter(|e| !a.alg.iter().any(|g| g == e)).chain(a.non_alg.iter().map(|e| e.as_slice())) {
                for j in 0..3 {
                    *count.entry(crate::combin::without(e, j)).or_default() += 1;
                }
            }
            let twice: Vec<Vec<u32>> = count.iter().filter(|(_, &c)| c == 2).map(|(f, _)| f.clone()).collect();
            assert_eq!(twice.len(), 3);
            assert!(twice.iter().all(|f| f.iter().all(|v| x.contains(v))));
            assert!(count.values().all(|&c| c == 1 || c == 2));
            assert_eq!(count.len(), n * (n - 1) / 2);
            assert!(matches!(
                assemble_design(&empty, &t, std::slice::from_ref(a), &empty),
                Err(AssembleError::Violation(SteinerViolation::Coverage(_, 2)))
            ));
        }
    }

    #[test]
    fn pipeline_on_small_complete_host() {
        let cfg = PipelineConfig { mode: AbsorbMode::SkipHost, ..Default::default() };
        let runs: Vec<PipelineRun> = (0..4).map(|seed| run_pipeline(31, 3, 1.0, seed, &cfg)).collect();
        assert!(runs.iter().any(|r| r.succeeded()));
        for run in runs.iter().filter(|r| r.succeeded()) {
            let d = run.design.as_ref().unwrap();
            assert!(verify_steiner(&d.edges, Some(&run.host)));
            assert_eq!(d.edges.len(), 31 * 30 / 6);
            assert_eq!(run.provenance.indicator_feasible, Some(true));
            assert_eq!(run.provenance.attempts.last().unwrap().outcome, "success");
        }
    }
}

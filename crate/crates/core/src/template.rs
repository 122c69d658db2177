//! Random injections into F*, the zero-sum template, cross-polytopes and
//! absorbers.
//!
//! A vertex set is identified with its image under an injection
//! `π: [n] → F*`. The template keeps the host edges whose images sum to zero.
//! For k ≥ 5 the template is a union of k + 1 layers, each built from its own
//! injection and kept facet-disjoint from the earlier layers.

use crate::combin::Binomial;
use crate::gf::{FieldCtx, FieldElement};
use crate::hypergraph::Hypergraph;
use crate::rng;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

const NO_VERTEX: u32 = u32::MAX;

/// Candidate tuples above which `find_absorbers` samples instead of looping.
pub const EXHAUSTIVE_ABSORBER_LIMIT: u128 = 100_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("{n} vertices do not fit into the {nonzero} nonzero elements of the field")]
    FieldTooSmall { n: usize, nonzero: usize },
    #[error("injection is not valid: {0}")]
    BadInjection(String),
    #[error("k={k} needs {expected} injection(s), got {got}")]
    LayerCount { k: usize, expected: usize, got: usize },
    #[error("edge has zero sum under the injection; the associated cross-polytope is degenerate")]
    Algebraic,
    #[error("no layer avoids zero-sum (k-2)-subsets of {0:?}; resample injections")]
    NoLayer(Vec<u32>),
    #[error("malformed template file: {0}")]
    Format(String),
}

/// An injection `[n] → F*` together with its inverse.
#[derive(Clone, PartialEq, Eq)]
pub struct Injection {
    field: FieldCtx,
    values: Vec<FieldElement>,
    inverse: Vec<u32>,
}

impl std::fmt::Debug for Injection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Injection(n={}, {:?})", self.values.len(), self.field)
    }
}

impl Injection {
    pub fn from_values(field: FieldCtx, values: Vec<FieldElement>) -> Result<Injection, TemplateError> {
        let mut inverse = vec![NO_VERTEX; field.order()];
        for (v, &x) in values.iter().enumerate() {
            if x.is_zero() || x.0 as usize >= field.order() {
                return Err(TemplateError::BadInjection(format!("vertex {v} maps to {:?}", x)));
            }
            if inverse[x.0 as usize] != NO_VERTEX {
                return Err(TemplateError::BadInjection(format!("value {:?} used twice", x)));
            }
            inverse[x.0 as usize] = v as u32;
        }
        Ok(Injection { field, values, inverse })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    #[inline]
    pub fn value(&self, v: u32) -> FieldElement {
        self.values[v as usize]
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    #[inline]
    pub fn vertex_of(&self, x: FieldElement) -> Option<u32> {
        match self.inverse.get(x.0 as usize) {
            Some(&v) if v != NO_VERTEX => Some(v),
            _ => None,
        }
    }

    pub fn edge_sum(&self, edge: &[u32]) -> FieldElement {
        edge.iter().fold(FieldElement::ZERO, |acc, &v| acc + self.value(v))
    }

    /// Sorted vertex ids of a set of field values, if all lie in the image.
    pub fn vertices_of(&self, values: &[FieldElement]) -> Option<Vec<u32>> {
        let mut out: Vec<u32> = values.iter().map(|&x| self.vertex_of(x)).collect::<Option<_>>()?;
        out.sort_unstable();
        Some(out)
    }
}

/// Uniformly random injection of `[n]` into `F*`.
pub fn sample_injection(n: usize, field: &FieldCtx, seed: u64) -> Result<Injection, TemplateError> {
    let nonzero = field.order() - 1;
    if n > nonzero {
        return Err(TemplateError::FieldTooSmall { n, nonzero });
    }
    let mut pool: Vec<FieldElement> = field.nonzero().collect();
    let mut rng = rng::stream(seed, "injection", 0);
    let (chosen, _) = pool.partial_shuffle(&mut rng, n);
    Injection::from_values(*field, chosen.to_vec())
}

/// Number of injections the layered template uses for uniformity `k`.
pub fn layer_count(k: usize) -> usize {
    if k <= 4 {
        1
    } else {
        k + 1
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    pub injection: Injection,
    pub edges: Hypergraph,
    /// Zero-sum host edges dropped because they share a facet with an
    /// earlier layer.
    pub collisions: usize,
}

#[derive(Debug, Clone)]
pub struct Template {
    n: usize,
    k: usize,
    layers: Vec<Layer>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TemplateJson {
    pub m: u32,
    pub modulus: u64,
    pub n: usize,
    pub k: usize,
    pub layers: Vec<LayerJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LayerJson {
    /// `pi[v - 1]` is the value of vertex `v` (1-based), as an integer.
    pub pi: Vec<u32>,
    /// 1-based sorted edges.
    pub edges: Vec<Vec<u32>>,
}

impl Template {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    pub fn len(&self) -> usize {
        self.layers.iter().map(|l| l.edges.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All template edges as one hypergraph.
    pub fn union(&self) -> Hypergraph {
        let edges = self.layers.iter().flat_map(|l| l.edges.edges());
        Hypergraph::from_edges(self.n, self.k, edges).expect("template edges are valid")
    }

    /// Layer containing a sorted edge.
    pub fn layer_of(&self, sorted: &[u32]) -> Option<usize> {
        self.layers.iter().position(|l| l.edges.contains(sorted))
    }

    /// An empty template with one layer per injection; used to run the
    /// nibble on the whole host.
    pub fn empty(n: usize, k: usize, injections: Vec<Injection>) -> Template {
        let layers = injections.into_iter().map(|injection| Layer { injection, edges: Hypergraph::empty(n, k), collisions: 0 }).collect();
        Template { n, k, layers }
    }

    pub fn to_json(&self) -> TemplateJson {
        let field = self.layers.first().map(|l| *l.injection.field());
        TemplateJson {
            m: field.map_or(0, |f| f.bits()),
            modulus: field.map_or(0, |f| f.modulus()),
            n: self.n,
            k: self.k,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson { pi: l.injection.values().iter().map(|x| x.0).collect(), edges: l.edges.to_json().edges })
                .collect(),
        }
    }

    pub fn from_json(j: &TemplateJson) -> Result<Template, TemplateError> {
        let field = FieldCtx::with_modulus(j.m, j.modulus).map_err(|e| TemplateError::Format(e.to_string()))?;
        let mut layers = Vec::new();
        for l in &j.layers {
            let injection = Injection::from_values(field, l.pi.iter().map(|&x| FieldElement(x)).collect())?;
            let hj = crate::hypergraph::HypergraphJson { n: j.n, k: j.k, edges: l.edges.clone() };
            let edges = Hypergraph::from_json(&hj).map_err(|e| TemplateError::Format(e.to_string()))?;
            layers.push(Layer { injection, edges, collisions: 0 });
        }
        Ok(Template { n: j.n, k: j.k, layers })
    }
}

/// Layer `j` keeps the host edges whose `π_j`-images sum to zero and that
/// share no facet with layers `0..j`. Layers are scanned in index order and
/// edges in canonical order.
pub fn build_template(h: &Hypergraph, injections: Vec<Injection>) -> Result<Template, TemplateError> {
    let (n, k) = (h.n(), h.k());
    let expected = layer_count(k);
    if injections.len() != expected {
        return Err(TemplateError::LayerCount { k, expected, got: injections.len() });
    }
    if let Some(bad) = injections.iter().find(|p| p.n() != n) {
        return Err(TemplateError::BadInjection(format!("injection covers {} vertices, host has {n}", bad.n())));
    }
    let binomial = Binomial::new(n, k);
    let mut covered: HashSet<u64> = HashSet::new();
    let mut layers = Vec::with_capacity(injections.len());
    for injection in injections {
        let mut verts = Vec::new();
        let mut collisions = 0;
        let mut fresh = Vec::new();
        for e in h.edges() {
            if !injection.edge_sum(e).is_zero() {
                continue;
            }
            let facets: Vec<u64> = (0..k).map(|s| binomial.rank_without(e, s)).collect();
            if facets.iter().any(|f| covered.contains(f)) {
                collisions += 1;
                continue;
            }
            verts.extend_from_slice(e);
            fresh.extend(facets);
        }
        let before = fresh.len();
        let layer_facets: HashSet<u64> = fresh.into_iter().collect();
        // zero-sum edges sharing k-1 vertices coincide
        assert_eq!(layer_facets.len(), before, "template layer is not a partial design");
        covered.extend(layer_facets);
        layers.push(Layer { injection, edges: Hypergraph::from_sorted_flat(n, k, verts), collisions });
    }
    Ok(Template { n, k, layers })
}

/// Smallest layer under which no (k-2)-subset of `x` sums to zero.
pub fn select_layer(x: &[u32], template: &Template) -> Result<usize, TemplateError> {
    let k = x.len();
    template
        .layers
        .iter()
        .position(|l| !has_zero_sum_subset(x, k.saturating_sub(2), &l.injection))
        .ok_or_else(|| TemplateError::NoLayer(x.to_vec()))
}

/// True when some `r`-subset of `x` (r ≥ 1) sums to zero under `pi`.
pub fn has_zero_sum_subset(x: &[u32], r: usize, pi: &Injection) -> bool {
    if r == 0 || r > x.len() {
        return false;
    }
    let mut found = false;
    crate::combin::for_each_combination(x.len() as u32, r, |idx| {
        if !found && idx.iter().fold(FieldElement::ZERO, |acc, &i| acc + pi.value(x[i as usize])).is_zero() {
            found = true;
        }
    });
    found
}

/// The cross-polytope spanned by `x_1..x_k, a_1..a_k`: edges `e_I` take
/// `a_i` for `i ∈ I` and `x_i` otherwise. Subsets `I` are bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossPolytope {
    pub x: Vec<FieldElement>,
    pub a: Vec<FieldElement>,
}

impl CrossPolytope {
    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn edge(&self, mask: u32) -> Vec<FieldElement> {
        (0..self.k()).map(|i| if mask & (1 << i) != 0 { self.a[i] } else { self.x[i] }).collect()
    }

    pub fn vertices(&self) -> Vec<FieldElement> {
        self.x.iter().chain(&self.a).copied().collect()
    }

    /// Masks of edges of the given parity (`true` = odd).
    pub fn masks(&self, odd: bool) -> impl Iterator<Item = u32> {
        (0u32..1 << self.x.len()).filter(move |m| (m.count_ones() % 2 == 1) == odd)
    }
}

/// Associated cross-polytope of a non-algebraic edge: `a_i = σ + x_i` where
/// `σ` is the sum of the edge's values. Each odd edge then sums to zero.
pub fn associated_cross_polytope(x: &[FieldElement]) -> Result<CrossPolytope, TemplateError> {
    let sigma = x.iter().fold(FieldElement::ZERO, |acc, &v| acc + v);
    if sigma.is_zero() {
        return Err(TemplateError::Algebraic);
    }
    Ok(CrossPolytope { x: x.to_vec(), a: x.iter().map(|&v| sigma + v).collect() })
}

/// Why a spanning tuple does not give an absorber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AbsorberFailure {
    /// Some `a_i` equals some `x_j`.
    NotDisjoint,
    /// Vertex values of the gadget repeat or include zero.
    VerticesNotDistinct,
    /// A vertex value is outside `π([n])`.
    OutsideImage,
    /// An odd edge of the outer cross-polytope is not a host edge.
    OuterOddMissing(Vec<u32>),
    /// An odd edge of an associated cross-polytope is not a template edge
    /// (this covers the facets of the even edge not being algebraic).
    AssociatedOddNotTemplate(Vec<u32>),
    /// An even edge of an associated cross-polytope, other than its base, is
    /// not a host edge.
    AssociatedEvenMissing(Vec<u32>),
}

impl std::fmt::Display for AbsorberFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AbsorberFailure::NotDisjoint => write!(f, "not disjoint"),
            AbsorberFailure::VerticesNotDistinct => write!(f, "vertices not distinct and nonzero"),
            AbsorberFailure::OutsideImage => write!(f, "vertex outside the injection image"),
            AbsorberFailure::OuterOddMissing(e) => write!(f, "outer odd edge {e:?} not in host"),
            AbsorberFailure::AssociatedOddNotTemplate(e) => write!(f, "associated odd edge {e:?} not in template"),
            AbsorberFailure::AssociatedEvenMissing(e) => write!(f, "associated even edge {e:?} not in host"),
        }
    }
}

/// An absorber for `x`: the outer cross-polytope `C_{x,a}` with an associated
/// cross-polytope on every even edge other than `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Absorber {
    /// Target edge, sorted.
    pub x: Vec<u32>,
    /// Spanning vertices, `spanning[i]` paired with `x[i]`.
    pub spanning: Vec<u32>,
    pub layer: usize,
    pub outer: CrossPolytope,
    /// One per nonempty even mask, in increasing mask order.
    pub associated: Vec<CrossPolytope>,
    /// Odd edges of every associated cross-polytope; template edges.
    pub alg: Vec<Vec<u32>>,
    /// Odd outer edges plus the even associated edges other than their
    /// bases; host edges.
    pub non_alg: Vec<Vec<u32>>,
}

impl Absorber {
    pub fn edges(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.alg.iter().chain(&self.non_alg)
    }

    /// Distinct vertex ids, sorted.
    pub fn vertex_set(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.edges().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Distinct facets (sorted (k-1)-sets), sorted.
    pub fn facet_set(&self) -> Vec<Vec<u32>> {
        let k = self.x.len();
        let mut f: Vec<Vec<u32>> =
            self.edges().flat_map(|e| (0..k).map(move |s| crate::combin::without(e, s))).collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

/// Number of edges in an absorber, `2^{2k-1} - 2^k + 1`.
pub fn absorber_size(k: usize) -> usize {
    (1usize << (2 * k - 1)) - (1usize << k) + 1
}

/// Number of vertices in an absorber, `2k + k(2^{k-1} - 1)`.
pub fn absorber_vertex_count(k: usize) -> usize {
    2 * k + k * ((1usize << (k - 1)) - 1)
}

/// All vertex values of the gadget spanned by `x, a`: x, a, then the
/// algebraic vertices of every associated cross-polytope.
fn gadget_values(x: &[FieldElement], a: &[FieldElement], out: &mut Vec<FieldElement>) -> bool {
    let k = x.len();
    out.clear();
    out.extend_from_slice(x);
    out.extend_from_slice(a);
    for mask in 1u32..1 << k {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let mut sigma = FieldElement::ZERO;
        for i in 0..k {
            sigma += if mask & (1 << i) != 0 { a[i] } else { x[i] };
        }
        if sigma.is_zero() {
            return false;
        }
        for i in 0..k {
            out.push(sigma + if mask & (1 << i) != 0 { a[i] } else { x[i] });
        }
    }
    true
}

fn sorted_vertices(pi: &Injection, values: &[FieldElement]) -> Vec<u32> {
    pi.vertices_of(values).expect("vertex screen passed")
}

/// Check the absorber conditions for target `x` (sorted vertex ids) and
/// spanning values `a` (paired with `x` in order) under one template layer,
/// returning the absorber on success.
///
/// Checks run in this order: `x ∩ a = ∅`; all gadget vertex values distinct,
/// nonzero and inside `π([n])`; odd outer edges in the host; for every even
/// outer edge `e ≠ x`, its associated odd edges in the template layer and its
/// associated even edges other than `e` in the host.
pub fn span_absorber(
    x: &[u32],
    a: &[FieldElement],
    host: &Hypergraph,
    template: &Template,
    layer: usize,
) -> Result<Absorber, AbsorberFailure> {
    let pi = &template.layer(layer).injection;
    let t_layer = &template.layer(layer).edges;
    let k = x.len();
    let xv: Vec<FieldElement> = x.iter().map(|&v| pi.value(v)).collect();
    if a.iter().any(|ai| xv.contains(ai)) {
        return Err(AbsorberFailure::NotDisjoint);
    }
    let mut values = Vec::with_capacity(absorber_vertex_count(k));
    if !gadget_values(&xv, a, &mut values) {
        return Err(AbsorberFailure::VerticesNotDistinct);
    }
    let mut sorted = values.clone();
    sorted.sort_unstable();
    if sorted[0].is_zero() || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(AbsorberFailure::VerticesNotDistinct);
    }
    if values.iter().any(|&v| pi.vertex_of(v).is_none()) {
        return Err(AbsorberFailure::OutsideImage);
    }
    let outer = CrossPolytope { x: xv, a: a.to_vec() };
    let mut non_alg = Vec::new();
    for mask in outer.masks(true) {
        let e = sorted_vertices(pi, &outer.edge(mask));
        if !host.contains(&e) {
            return Err(AbsorberFailure::OuterOddMissing(e));
        }
        non_alg.push(e);
    }
    let mut alg = Vec::new();
    let mut associated = Vec::new();
    for mask in outer.masks(false).filter(|&m| m != 0) {
        let cp = associated_cross_polytope(&outer.edge(mask)).expect("screened nonzero sum");
        for m in cp.masks(true) {
            let e = sorted_vertices(pi, &cp.edge(m));
            if !t_layer.contains(&e) {
                return Err(AbsorberFailure::AssociatedOddNotTemplate(e));
            }
            alg.push(e);
        }
        for m in cp.masks(false).filter(|&m| m != 0) {
            let e = sorted_vertices(pi, &cp.edge(m));
            if !host.contains(&e) {
                return Err(AbsorberFailure::AssociatedEvenMissing(e));
            }
            non_alg.push(e);
        }
        associated.push(cp);
    }
    let spanning = a.iter().map(|&v| pi.vertex_of(v).expect("screened")).collect();
    Ok(Absorber { x: x.to_vec(), spanning, layer, outer, associated, alg, non_alg })
}

pub fn is_absorber(
    x: &[u32],
    a: &[FieldElement],
    host: &Hypergraph,
    template: &Template,
    layer: usize,
) -> Result<(), AbsorberFailure> {
    span_absorber(x, a, host, template, layer).map(|_| ())
}

/// Settings for [`find_absorbers`].
#[derive(Debug, Clone, Copy)]
pub struct AbsorberSearch {
    pub limit: Option<usize>,
    /// Draws when the tuple space is too large to enumerate.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AbsorberSearch {
    fn default() -> Self {
        AbsorberSearch { limit: None, samples: 1_000_000, seed: 0 }
    }
}

/// Absorbers for `x` under `layer`, in discovery order. Spanning tuples range
/// over `π([n])^k`: lexicographically by value when there are at most
/// [`EXHAUSTIVE_ABSORBER_LIMIT`] of them, otherwise as a seeded stream of
/// uniform draws (repeats skipped).
pub fn find_absorbers(
    x: &[u32],
    host: &Hypergraph,
    template: &Template,
    layer: usize,
    search: AbsorberSearch,
) -> Vec<Absorber> {
    let pi = &template.layer(layer).injection;
    let k = x.len();
    let limit = search.limit.unwrap_or(usize::MAX);
    let mut found = Vec::new();
    if host.is_empty() || limit == 0 {
        return found;
    }
    let mut image: Vec<FieldElement> = pi.values().to_vec();
    image.sort_unstable();
    let xv: Vec<FieldElement> = x.iter().map(|&v| pi.value(v)).collect();
    let space = (image.len() as u128).saturating_pow(k as u32);
    if space <= EXHAUSTIVE_ABSORBER_LIMIT {
        // odometer over positions into `image`, pruning prefixes that repeat
        // a value or hit x
        let usable: Vec<FieldElement> = image.iter().copied().filter(|v| !xv.contains(v)).collect();
        if usable.len() < k {
            return found;
        }
        let mut idx = vec![0usize; k];
        let mut a = vec![FieldElement::ZERO; k];
        let mut depth = 0usize;
        loop {
            if idx[depth] == usable.len() {
                if depth == 0 {
                    break;
                }
                idx[depth] = 0;
                depth -= 1;
                idx[depth] += 1;
                continue;
            }
            let v = usable[idx[depth]];
            if a[..depth].contains(&v) {
                idx[depth] += 1;
                continue;
            }
            a[depth] = v;
            if depth + 1 < k {
                depth += 1;
                continue;
            }
            if let Ok(abs) = span_absorber(x, &a, host, template, layer) {
                found.push(abs);
                if found.len() >= limit {
                    break;
                }
            }
            idx[depth] += 1;
        }
    } else {
        let mut rng = rng::stream(search.seed, "absorbers", layer as u64);
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        let mut a = vec![FieldElement::ZERO; k];
        for _ in 0..search.samples {
            for ai in a.iter_mut() {
                *ai = image[rng.gen_range(0..image.len())];
            }
            if !seen.insert(a.iter().map(|v| v.0).collect()) {
                continue;
            }
            if let Ok(abs) = span_absorber(x, &a, host, template, layer) {
                found.push(abs);
                if found.len() >= limit {
                    break;
                }
            }
        }
    }
    found
}

//! Vertex, facet and edge operators of an absorber as matrices over F.
//!
//! A spanning pair `(x; a) ∈ F^{2k}` is mapped by the vertex operators to the
//! absorber's vertices, by the facet operators to its facets and by the edge
//! operators to its edges. Generators:
//!
//! * `T_i`, `P_i`: coordinate projection onto `i`, and deletion of `i`;
//! * `E_I = [X_{[k]\I}  X_I]`: selects the cross-polytope edge `e_I`;
//! * `C = [I; J + I]`: vertices of the associated cross-polytope.
//!
//! All entries are 0 or 1, so a family is valid for every field of
//! characteristic 2; the field only matters at application time.

use crate::gf::{FieldCtx, FieldElement, GfError, Matrix};
use crate::hypergraph::Hypergraph;
use crate::rng;
use crate::template::Injection;
use rand::Rng;
use serde::Serialize;
use std::collections::HashSet;

/// Number of sampled points used by the randomized checks.
pub const CHECK_SAMPLES: usize = 10_000;
/// Domains up to this size are enumerated instead of sampled.
pub const EXHAUSTIVE_DOMAIN: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kind {
    Vertex,
    Facet,
    Edge,
}

/// One family member and the generators it was composed from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operator {
    pub kind: Kind,
    /// 1 or 2: which sub-family.
    pub part: u8,
    /// Projection index for `T_i` / `P_i`.
    pub i: Option<usize>,
    /// Outer selector `I` as a bitmask (`E_I` applied first).
    pub outer: u32,
    /// Inner selector `J`, present when `C` is applied.
    pub inner: Option<u32>,
    pub matrix: Matrix,
}

impl Operator {
    /// Part acting on `x`.
    pub fn t1(&self) -> Matrix {
        let k = self.matrix.cols() / 2;
        self.matrix.column_block(0, k)
    }

    /// Part acting on `a`.
    pub fn t2(&self) -> Matrix {
        let k = self.matrix.cols() / 2;
        self.matrix.column_block(k, 2 * k)
    }

    pub fn label(&self) -> String {
        let name = match self.kind {
            Kind::Vertex => "T",
            Kind::Facet => "P",
            Kind::Edge => "",
        };
        let proj = self.i.map(|i| format!("{name}{} ", i + 1)).unwrap_or_default();
        match self.inner {
            Some(j) => format!("{proj}E{} C E{}", mask_label(j), mask_label(self.outer)),
            None => format!("{proj}E{}", mask_label(self.outer)),
        }
    }
}

fn mask_label(mask: u32) -> String {
    let items: Vec<String> = (0..32).filter(|b| mask & (1 << b) != 0).map(|b| (b + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

#[derive(Debug, Clone)]
pub struct OperatorFamily {
    pub k: usize,
    pub field: FieldCtx,
    pub vertex: Vec<Operator>,
    pub facet: Vec<Operator>,
    pub edge: Vec<Operator>,
}

pub fn projection_t(k: usize, i: usize) -> Matrix {
    let mut m = Matrix::zeros(1, k);
    m.set(0, i, FieldElement::ONE);
    m
}

pub fn projection_p(k: usize, i: usize) -> Matrix {
    let mut m = Matrix::zeros(k - 1, k);
    for (r, c) in (0..k).filter(|&c| c != i).enumerate() {
        m.set(r, c, FieldElement::ONE);
    }
    m
}

pub fn diagonal_x(k: usize, mask: u32) -> Matrix {
    let mut m = Matrix::zeros(k, k);
    for i in (0..k).filter(|i| mask & (1 << i) != 0) {
        m.set(i, i, FieldElement::ONE);
    }
    m
}

pub fn selector_e(k: usize, mask: u32) -> Matrix {
    let full = (1u32 << k) - 1;
    diagonal_x(k, full & !mask).hstack(&diagonal_x(k, mask))
}

pub fn associate_c(k: usize) -> Matrix {
    let mut lower = Matrix::zeros(k, k);
    for r in 0..k {
        for c in 0..k {
            if r != c {
                lower.set(r, c, FieldElement::ONE);
            }
        }
    }
    Matrix::identity(k).vstack(&lower)
}

fn even_nonempty(k: usize) -> impl Iterator<Item = u32> {
    (1u32..1 << k).filter(|m| m.count_ones() % 2 == 0)
}

pub fn build_families(k: usize, field: FieldCtx) -> OperatorFamily {
    assert!(k >= 2, "operator families need k >= 2");
    let full = (1u32 << k) - 1;
    let c = associate_c(k);
    let ece = |j: u32, i: u32| selector_e(k, j).mul(&c, &field).mul(&selector_e(k, i), &field);
    let op = |kind, part, i, outer, inner, matrix| Operator { kind, part, i, outer, inner, matrix };

    let mut vertex = Vec::new();
    for outer in [0, full] {
        for i in 0..k {
            vertex.push(op(Kind::Vertex, 1, Some(i), outer, None, projection_t(k, i).mul(&selector_e(k, outer), &field)));
        }
    }
    for outer in even_nonempty(k) {
        let inner = ece(full, outer);
        for i in 0..k {
            vertex.push(op(Kind::Vertex, 2, Some(i), outer, Some(full), projection_t(k, i).mul(&inner, &field)));
        }
    }

    let mut facet = Vec::new();
    for i in 0..k {
        facet.push(op(Kind::Facet, 1, Some(i), 0, None, projection_p(k, i).mul(&selector_e(k, 0), &field)));
    }
    for outer in even_nonempty(k) {
        for j in (0u32..1 << k).filter(|m| m.count_ones() % 2 == 0) {
            let inner = ece(j, outer);
            for i in 0..k {
                facet.push(op(Kind::Facet, 2, Some(i), outer, Some(j), projection_p(k, i).mul(&inner, &field)));
            }
        }
    }

    let mut edge = Vec::new();
    for outer in (0u32..1 << k).filter(|m| m.count_ones() % 2 == 1) {
        edge.push(op(Kind::Edge, 1, None, outer, None, selector_e(k, outer)));
    }
    for outer in even_nonempty(k) {
        for j in 1u32..1 << k {
            edge.push(op(Kind::Edge, 2, None, outer, Some(j), ece(j, outer)));
        }
    }
    OperatorFamily { k, field, vertex, facet, edge }
}

/// `op (x; a)`.
pub fn apply(op: &Matrix, x: &[FieldElement], a: &[FieldElement], field: &FieldCtx) -> Result<Vec<FieldElement>, GfError> {
    if x.len() != a.len() {
        return Err(GfError::Dimension { expected: x.len(), got: a.len() });
    }
    let xa: Vec<FieldElement> = x.iter().chain(a).copied().collect();
    op.apply(&xa, field)
}

/// Images of one family on `(x; a)`, each image sorted as a set.
pub fn images(ops: &[Operator], x: &[FieldElement], a: &[FieldElement], field: &FieldCtx) -> Vec<Vec<FieldElement>> {
    ops.iter()
        .map(|op| {
            let mut v = apply(&op.matrix, x, a, field).expect("family matches k");
            v.sort_unstable();
            v
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilySizes {
    pub vo1: usize,
    pub vo2: usize,
    pub fo1: usize,
    pub fo2: usize,
    pub eo1: usize,
    pub eo2: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub exhaustive: bool,
    pub counterexamples: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorReport {
    pub k: usize,
    pub m: u32,
    pub modulus: u64,
    pub sizes: FamilySizes,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl OperatorReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct CheckBuilder {
    name: &'static str,
    checked: usize,
    exhaustive: bool,
    failures: usize,
    examples: Vec<String>,
}

impl CheckBuilder {
    fn new(name: &'static str, exhaustive: bool) -> CheckBuilder {
        CheckBuilder { name, checked: 0, exhaustive, failures: 0, examples: Vec::new() }
    }

    fn record(&mut self, ok: bool, example: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.examples.len() < 5 {
                self.examples.push(example());
            }
        }
    }

    fn finish(self) -> Check {
        Check { name: self.name.to_string(), passed: self.failures == 0, checked: self.checked, exhaustive: self.exhaustive, counterexamples: self.examples }
    }
}

fn column_is_zero(m: &Matrix, c: usize) -> bool {
    (0..m.rows()).all(|r| m.get(r, c).is_zero())
}

/// Functionals `V` and `V + V'` whose `a`-part vanishes; the vertex screen
/// for `x` fails exactly when one of them also vanishes on `x`.
pub struct VertexScreen {
    risky: Vec<(String, Vec<FieldElement>)>,
}

impl VertexScreen {
    pub fn new(family: &OperatorFamily) -> VertexScreen {
        let k = family.k;
        let rows: Vec<(String, Vec<FieldElement>)> = family.vertex.iter().map(|v| (v.label(), v.matrix.row(0).to_vec())).collect();
        let mut risky = Vec::new();
        let mut consider = |label: String, row: Vec<FieldElement>| {
            if row[k..].iter().all(|e| e.is_zero()) {
                risky.push((label, row[..k].to_vec()));
            }
        };
        for (i, (li, ri)) in rows.iter().enumerate() {
            consider(li.clone(), ri.clone());
            for (lj, rj) in &rows[i + 1..] {
                consider(format!("{li} + {lj}"), ri.iter().zip(rj).map(|(&p, &q)| p + q).collect());
            }
        }
        VertexScreen { risky }
    }

    /// Labels of functionals violating `T_1 x ≠ 0 or T_2 ≠ 0`.
    pub fn failures(&self, x: &[FieldElement]) -> Vec<&str> {
        self.risky
            .iter()
            .filter(|(_, t1)| t1.iter().zip(x).fold(FieldElement::ZERO, |acc, (&c, &v)| if c.is_zero() { acc } else { acc + v }).is_zero())
            .map(|(l, _)| l.as_str())
            .collect()
    }
}

fn has_zero_sum_subset(x: &[FieldElement], r: usize) -> bool {
    if r == 0 || r > x.len() {
        return false;
    }
    let mut found = false;
    crate::combin::for_each_combination(x.len() as u32, r, |idx| {
        if !found && idx.iter().fold(FieldElement::ZERO, |acc, &i| acc + x[i as usize]).is_zero() {
            found = true;
        }
    });
    found
}

fn random_distinct_nonzero(k: usize, field: &FieldCtx, rng: &mut impl Rng) -> Vec<FieldElement> {
    let mut x: Vec<FieldElement> = Vec::with_capacity(k);
    while x.len() < k {
        let v = FieldElement(rng.gen_range(1..field.order() as u32));
        if !x.contains(&v) {
            x.push(v);
        }
    }
    x
}

/// Random distinct nonzero `x` whose first `k - 2` entries sum to zero.
fn planted_zero_sum(k: usize, field: &FieldCtx, rng: &mut impl Rng) -> Option<Vec<FieldElement>> {
    for _ in 0..1000 {
        let mut x = random_distinct_nonzero(k, field, rng);
        let s = x[..k - 3].iter().fold(FieldElement::ZERO, |acc, &v| acc + v);
        x[k - 3] = s;
        let mut sorted = x.clone();
        sorted.sort_unstable();
        if !s.is_zero() && sorted.windows(2).all(|w| w[0] != w[1]) {
            return Some(x);
        }
    }
    None
}

/// Every ordered k-tuple of distinct nonzero elements, in lex order.
fn for_each_distinct_tuple(k: usize, field: &FieldCtx, mut f: impl FnMut(&[FieldElement])) {
    let q = field.order() as u32;
    let mut x = vec![FieldElement::ZERO; k];
    fn rec(pos: usize, x: &mut Vec<FieldElement>, q: u32, f: &mut dyn FnMut(&[FieldElement])) {
        if pos == x.len() {
            f(x);
            return;
        }
        for v in 1..q {
            let v = FieldElement(v);
            if !x[..pos].contains(&v) {
                x[pos] = v;
                rec(pos + 1, x, q, f);
            }
        }
    }
    rec(0, &mut x, q, &mut f);
}

/// Machine-checks the structural facts the absorber analysis relies on.
pub fn verify_properties(k: usize, field: FieldCtx, seed: u64) -> OperatorReport {
    let fam = build_families(k, field);
    let q = field.order() as u128;
    let count = |ops: &[Operator], part| ops.iter().filter(|o| o.part == part).count();
    let sizes = FamilySizes {
        vo1: count(&fam.vertex, 1),
        vo2: count(&fam.vertex, 2),
        fo1: count(&fam.facet, 1),
        fo2: count(&fam.facet, 2),
        eo1: count(&fam.edge, 1),
        eo2: count(&fam.edge, 2),
    };
    let mut checks = Vec::new();

    let mut c = CheckBuilder::new("family_sizes", true);
    let half = 1usize << (k - 1);
    c.record(sizes.fo1 == k, || format!("|FO1| = {}", sizes.fo1));
    c.record(sizes.vo1 + sizes.vo2 == k * (half + 1), || format!("|VO| = {}", sizes.vo1 + sizes.vo2));
    c.record(sizes.eo1 == half, || format!("|EO1| = {}", sizes.eo1));
    c.record(sizes.eo1 + sizes.eo2 == crate::template::absorber_size(k), || format!("|EO| = {}", sizes.eo1 + sizes.eo2));
    checks.push(c.finish());

    let fo2: Vec<&Operator> = fam.facet.iter().filter(|o| o.part == 2).collect();

    let mut c = CheckBuilder::new("fo2_kernel_has_two_basis_vectors", true);
    for f in &fo2 {
        let t1 = f.t1();
        let zero_cols = (0..k).filter(|&col| column_is_zero(&t1, col)).count();
        c.record(zero_cols >= 2, || f.label());
    }
    checks.push(c.finish());

    let mut c = CheckBuilder::new("fo2_rank_f2_positive", true);
    for f in &fo2 {
        c.record(f.t2().rank(&field) >= 1, || f.label());
    }
    checks.push(c.finish());

    let mut c = CheckBuilder::new("fo_rank_is_k_minus_1", true);
    for f in &fam.facet {
        c.record(f.matrix.rank(&field) == k - 1, || f.label());
    }
    checks.push(c.finish());

    // solvable-a set is the projection of F^{-1}(f) onto the a-coordinates
    let mut rng = rng::stream(seed, "operators", k as u64);
    let per_op = (CHECK_SAMPLES / fo2.len().max(1)).max(1);
    let mut c = CheckBuilder::new("fo2_solvable_a_dimension", false);
    for f in &fo2 {
        let rk1 = f.t1().rank(&field);
        for _ in 0..per_op {
            let target: Vec<FieldElement> = (0..k - 1).map(|_| FieldElement(rng.gen_range(0..field.order() as u32))).collect();
            let dim = match f.matrix.affine_preimage(&target, &field).expect("dimensions match") {
                Some(set) => {
                    let rows: Vec<Vec<FieldElement>> = set.basis.iter().map(|b| b[k..].to_vec()).collect();
                    if rows.is_empty() {
                        Some(0)
                    } else {
                        Some(Matrix::from_rows(rows).expect("rectangular").rank(&field))
                    }
                }
                None => None,
            };
            c.record(dim == Some(rk1 + 1), || format!("{} f={:?} dim={dim:?} rk F1={rk1}", f.label(), target));
        }
    }
    checks.push(c.finish());

    let mut c = CheckBuilder::new("eo_kernel_e2_at_most_k_minus_1", true);
    for e in &fam.edge {
        let dim_ker = k - e.t2().rank(&field);
        c.record(dim_ker < k, || e.label());
    }
    checks.push(c.finish());

    let mut c = CheckBuilder::new("selector_rank_is_k", true);
    for mask in 0u32..1 << k {
        c.record(selector_e(k, mask).rank(&field) == k, || mask_label(mask));
    }
    checks.push(c.finish());

    // vertex screen: fails exactly on x holding a zero-sum (k-2)-set
    let screen = VertexScreen::new(&fam);
    let domain = (q - 1).saturating_pow(k as u32);
    let exhaustive = domain <= EXHAUSTIVE_DOMAIN;
    let mut c = CheckBuilder::new("vo_screen_iff_no_zero_sum_subset", exhaustive);
    let judge = |x: &[FieldElement], c: &mut CheckBuilder| {
        let fails = screen.failures(x);
        let degenerate = has_zero_sum_subset(x, k - 2);
        c.record(fails.is_empty() != degenerate, || format!("x={:?} zero-sum={degenerate} failing={:?}", x, fails.first()));
    };
    if q - 1 >= k as u128 {
        if exhaustive {
            for_each_distinct_tuple(k, &field, |x| judge(x, &mut c));
        } else {
            for s in 0..CHECK_SAMPLES {
                let x = if k >= 5 && s % 2 == 1 { planted_zero_sum(k, &field, &mut rng) } else { None };
                let x = x.unwrap_or_else(|| random_distinct_nonzero(k, &field, &mut rng));
                judge(&x, &mut c);
            }
        }
    }
    checks.push(c.finish());

    let passed = checks.iter().all(|c| c.passed);
    OperatorReport { k, m: field.bits(), modulus: field.modulus(), sizes, checks, passed }
}

/// Measured ratio `|π(S) ∩ F_1^{-1}(f)| / (C |S| / n^k |F_1^{-1}(f)|)` over
/// sampled `F ∈ FO_2` and `f = F_1 y` for random ordered edges `y` of `S`.
#[derive(Debug, Clone, Serialize)]
pub struct InverseDiagnostic {
    pub samples: usize,
    pub affine_c: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

pub fn bounded_inverse_diagnostic(
    family: &OperatorFamily,
    s: &Hypergraph,
    pi: &Injection,
    affine_c: f64,
    samples: usize,
    seed: u64,
) -> InverseDiagnostic {
    let k = family.k;
    let field = family.field;
    let fo2: Vec<&Operator> = family.facet.iter().filter(|o| o.part == 2).collect();
    let mut max_ratio: f64 = 0.0;
    let mut total = 0.0;
    let mut done = 0;
    if s.is_empty() || fo2.is_empty() {
        return InverseDiagnostic { samples: 0, affine_c, max_ratio, mean_ratio: 0.0 };
    }
    let perms = permutations(k);
    let tuples: Vec<Vec<FieldElement>> = s
        .edges()
        .flat_map(|e| perms.iter().map(move |p| p.iter().map(|&i| pi.value(e[i])).collect::<Vec<_>>()))
        .collect();
    let mut rng = rng::stream(seed, "inverse-diagnostic", 0);
    let scale = affine_c * s.len() as f64 / (s.n() as f64).powi(k as i32);
    for _ in 0..samples {
        let f = fo2[rng.gen_range(0..fo2.len())];
        let t1 = f.t1();
        let ker = (field.order() as f64).powi((k - t1.rank(&field)) as i32);
        let y = &tuples[rng.gen_range(0..tuples.len())];
        let target = t1.apply(y, &field).expect("k columns");
        let hits = tuples.iter().filter(|t| t1.apply(t, &field).expect("k columns") == target).count();
        let ratio = hits as f64 / (scale * ker);
        max_ratio = max_ratio.max(ratio);
        total += ratio;
        done += 1;
    }
    InverseDiagnostic { samples: done, affine_c, max_ratio, mean_ratio: total / done.max(1) as f64 }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    let mut seen = HashSet::new();
    fn heap(n: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, seen: &mut HashSet<Vec<usize>>) {
        if n <= 1 {
            if seen.insert(p.clone()) {
                out.push(p.clone());
            }
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, p, out, seen);
            if n % 2 == 0 {
                p.swap(i, n - 1);
            } else {
                p.swap(0, n - 1);
            }
        }
        heap(n - 1, p, out, seen);
    }
    heap(k, &mut p, &mut out, &mut seen);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{associated_cross_polytope, CrossPolytope};

    fn fe(v: &[u32]) -> Vec<FieldElement> {
        v.iter().map(|&x| FieldElement(x)).collect()
    }

    #[test]
    fn family_sizes() {
        let f = FieldCtx::new(3).unwrap();
        let fam = build_families(3, f);
        assert_eq!(fam.vertex.len(), 15);
        assert_eq!(fam.edge.iter().filter(|o| o.part == 1).count(), 4);
        assert_eq!(fam.edge.len(), 25);
        assert_eq!(fam.facet.len(), 39);
        let fam4 = build_families(4, FieldCtx::new(5).unwrap());
        assert_eq!(fam4.edge.len(), 113);
        assert_eq!(fam4.vertex.len(), 4 * 9);
    }

    #[test]
    fn selectors_pick_blocks() {
        let f = FieldCtx::new(3).unwrap();
        let (x, a) = (fe(&[1, 2, 4]), fe(&[6, 5, 3]));
        assert_eq!(apply(&selector_e(3, 0), &x, &a, &f).unwrap(), x);
        assert_eq!(apply(&selector_e(3, 7), &x, &a, &f).unwrap(), a);
        assert!(apply(&selector_e(3, 0), &x, &a[..2], &f).is_err());
    }

    /// Rebuild every family member's image straight from cross-polytope
    /// edges, independent of matrix composition.
    #[test]
    fn matrices_match_their_generators() {
        let f = FieldCtx::new(5).unwrap();
        for k in 2..=5 {
            let fam = build_families(k, f);
            let x: Vec<FieldElement> = (1..=k as u32).map(FieldElement).collect();
            let a: Vec<FieldElement> = (0..k as u32).map(|i| FieldElement(11 + 2 * i)).collect();
            let outer = CrossPolytope { x: x.clone(), a: a.clone() };
            let edge_of = |op: &Operator| -> Vec<FieldElement> {
                let e = outer.edge(op.outer);
                match op.inner {
                    None => e,
                    Some(j) => {
                        let sigma = e.iter().fold(FieldElement::ZERO, |acc, &v| acc + v);
                        let cp = CrossPolytope { x: e.clone(), a: e.iter().map(|&v| sigma + v).collect() };
                        cp.edge(j)
                    }
                }
            };
            for op in fam.vertex.iter().chain(&fam.facet).chain(&fam.edge) {
                let e = edge_of(op);
                let expect = match op.kind {
                    Kind::Vertex => vec![e[op.i.unwrap()]],
                    Kind::Facet => crate::combin::without(&e.iter().map(|v| v.0).collect::<Vec<_>>(), op.i.unwrap())
                        .into_iter()
                        .map(FieldElement)
                        .collect(),
                    Kind::Edge => e,
                };
                assert_eq!(apply(&op.matrix, &x, &a, &f).unwrap(), expect, "{}", op.label());
            }
        }
    }

    #[test]
    fn edge_family_matches_absorber_example() {
        let f = FieldCtx::new(3).unwrap();
        let fam = build_families(3, f);
        let (x, a) = (fe(&[1, 2, 4]), fe(&[6, 5, 3]));
        let mut from_ops = images(&fam.edge, &x, &a, &f);
        from_ops.sort();
        let outer = CrossPolytope { x, a };
        let mut built: Vec<Vec<FieldElement>> = outer.masks(true).map(|m| outer.edge(m)).collect();
        for m in outer.masks(false).filter(|&m| m != 0) {
            let cp = associated_cross_polytope(&outer.edge(m)).unwrap();
            built.extend((1u32..8).map(|j| cp.edge(j)));
        }
        for e in built.iter_mut() {
            e.sort_unstable();
        }
        built.sort();
        assert_eq!(from_ops, built);
    }

    #[test]
    fn properties_hold_for_small_k() {
        for (k, m) in [(3, 3), (3, 6), (4, 4), (4, 6)] {
            let r = verify_properties(k, FieldCtx::new(m).unwrap(), 1);
            assert!(r.passed, "k={k} m={m}: {}", r.to_json());
        }
    }

    #[test]
    fn vertex_screen_fails_on_zero_sum_triples_at_k5() {
        let f = FieldCtx::new(6).unwrap();
        let fam = build_families(5, f);
        let screen = VertexScreen::new(&fam);
        assert!(!screen.failures(&fe(&[1, 2, 3, 8, 16])).is_empty());
        assert!(screen.failures(&fe(&[1, 2, 4, 8, 16])).is_empty());
        let r = verify_properties(5, f, 2);
        assert!(r.check("vo_screen_iff_no_zero_sum_subset").unwrap().passed);
    }

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
    }
}

//! Uniform hypergraphs on `[n]`: storage, sampling, facets, divisibility,
//! pseudo-randomness measurements and the random hypergraph process.
//!
//! Vertices are 0-based internally; the text format is 1-based.

use crate::combin::{binom, for_each_combination, next_combination, Binomial};
use crate::gf::{FieldElement, GfError};
use crate::rng;
use crate::template::Injection;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

const HNP_TAG: u64 = 0x686e_70;

/// Exhaustive typicality enumeration cutoff (number of set tuples).
pub const TYPICALITY_EXHAUSTIVE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum HypergraphError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("edge {edge:?} is invalid for a {k}-uniform hypergraph on {n} vertices")]
    BadEdge { edge: Vec<u32>, n: usize, k: usize },
    #[error("density zero")]
    DensityZero,
    #[error("stream exhausted after {0} edges")]
    Exhausted(usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Field(#[from] GfError),
}

/// A k-uniform hypergraph on `[n]`. Edges are kept sorted within and
/// lexicographically across, without duplicates.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    verts: Vec<u32>,
}

impl std::fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Hypergraph(n={}, k={}, |E|={})", self.n, self.k, self.len())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct HypergraphJson {
    pub n: usize,
    pub k: usize,
    /// 1-based vertex ids.
    pub edges: Vec<Vec<u32>>,
}

/// Result of a typicality measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Typicality {
    pub defect: f64,
    /// False when the value came from sampling and is only a lower bound.
    pub exhaustive: bool,
    pub tuples: u64,
}

impl Hypergraph {
    pub fn empty(n: usize, k: usize) -> Hypergraph {
        Hypergraph { n, k, verts: Vec::new() }
    }

    pub fn from_edges<I, E>(n: usize, k: usize, edges: I) -> Result<Hypergraph, HypergraphError>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[u32]>,
    {
        let mut rows: Vec<Vec<u32>> = Vec::new();
        for e in edges {
            let mut e = e.as_ref().to_vec();
            e.sort_unstable();
            let distinct = e.windows(2).all(|w| w[0] < w[1]);
            if e.len() != k || !distinct || e.last().is_some_and(|&v| v as usize >= n) {
                return Err(HypergraphError::BadEdge { edge: e, n, k });
            }
            rows.push(e);
        }
        rows.sort_unstable();
        rows.dedup();
        Ok(Hypergraph { n, k, verts: rows.concat() })
    }

    /// Build from edges already sorted internally and lexicographically, no
    /// duplicates. Checked in debug builds.
    pub(crate) fn from_sorted_flat(n: usize, k: usize, verts: Vec<u32>) -> Hypergraph {
        let h = Hypergraph { n, k, verts };
        debug_assert!(h.edges().all(|e| e.windows(2).all(|w| w[0] < w[1])));
        debug_assert!(k == 0 || h.verts.chunks_exact(k).collect::<Vec<_>>().windows(2).all(|w| w[0] < w[1]));
        h
    }

    /// K_k^n.
    pub fn complete(n: usize, k: usize) -> Hypergraph {
        let mut verts = Vec::with_capacity(binom(n as u64, k as u64) as usize * k);
        for_each_combination(n as u32, k, |c| verts.extend_from_slice(c));
        Hypergraph { n, k, verts }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        if self.k == 0 {
            0
        } else {
            self.verts.len() / self.k
        }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.verts.chunks_exact(self.k.max(1))
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.verts[i * self.k..(i + 1) * self.k]
    }

    /// Index of a sorted edge, if present.
    pub fn position(&self, sorted: &[u32]) -> Option<usize> {
        if sorted.len() != self.k {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(sorted) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn contains(&self, sorted: &[u32]) -> bool {
        self.position(sorted).is_some()
    }

    /// Membership for an edge in any vertex order.
    pub fn contains_unsorted(&self, edge: &[u32]) -> bool {
        let mut e = edge.to_vec();
        e.sort_unstable();
        self.contains(&e)
    }

    /// `|H| / C(n, k)`.
    pub fn density(&self) -> f64 {
        let total = binom(self.n as u64, self.k as u64);
        if total == 0 {
            0.0
        } else {
            self.len() as f64 / total as f64
        }
    }

    /// All (k-1)-subsets of edges.
    pub fn facets_of(&self) -> Hypergraph {
        let r = self.k.saturating_sub(1);
        let mut rows: Vec<Vec<u32>> = Vec::with_capacity(self.len() * self.k);
        for e in self.edges() {
            for skip in 0..self.k {
                rows.push(crate::combin::without(e, skip));
            }
        }
        rows.sort_unstable();
        rows.dedup();
        Hypergraph { n: self.n, k: r, verts: rows.concat() }
    }

    /// All (k+1)-sets whose every k-subset is an edge of `self`.
    pub fn k_cliques(&self) -> Hypergraph {
        let r = self.k + 1;
        let mut verts = Vec::new();
        let mut cand = vec![0u32; r];
        let mut sub = vec![0u32; self.k];
        for f in self.edges() {
            let start = f.last().map_or(0, |&v| v + 1);
            for v in start..self.n as u32 {
                cand[..self.k].copy_from_slice(f);
                cand[self.k] = v;
                let all = (0..self.k).all(|skip| {
                    // the subset without the last vertex is f itself
                    let mut p = 0;
                    for (i, &x) in cand.iter().enumerate() {
                        if i != skip {
                            sub[p] = x;
                            p += 1;
                        }
                    }
                    self.contains(&sub)
                });
                if all {
                    verts.extend_from_slice(&cand);
                }
            }
        }
        // f ranges lexicographically and v increases, so output is sorted
        Hypergraph::from_sorted_flat(self.n, r, verts)
    }

    /// Degree of every vertex subset of size `< k` that lies in some edge,
    /// keyed by (size, colex rank). Subsets absent from the map have degree 0.
    fn subset_degrees(&self) -> HashMap<(usize, u64), u64> {
        let binomial = Binomial::new(self.n, self.k);
        let mut deg: HashMap<(usize, u64), u64> = HashMap::new();
        let mut sub = Vec::with_capacity(self.k);
        for e in self.edges() {
            for mask in 0u32..(1 << self.k) - 1 {
                sub.clear();
                for (i, &v) in e.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        sub.push(v);
                    }
                }
                *deg.entry((sub.len(), binomial.rank(&sub))).or_insert(0) += 1;
            }
        }
        deg
    }

    /// `self` is (k-1)-uniform: true iff `(k - i) | |G(S)|` for every i-set
    /// `S`, `0 <= i <= k - 1`.
    pub fn is_k_divisible(&self, k: usize) -> bool {
        assert_eq!(self.k + 1, k, "is_k_divisible expects a (k-1)-uniform hypergraph");
        self.subset_degrees().iter().all(|(&(size, _), &d)| d % (k - size) as u64 == 0)
    }

    /// Edges present in `self` but not in `other`.
    pub fn difference(&self, other: &Hypergraph) -> Hypergraph {
        let verts = self.edges().filter(|e| !other.contains(e)).flatten().copied().collect();
        Hypergraph::from_sorted_flat(self.n, self.k, verts)
    }

    pub fn union(&self, other: &Hypergraph) -> Hypergraph {
        assert_eq!(self.k, other.k);
        Hypergraph::from_edges(self.n, self.k, self.edges().chain(other.edges())).expect("both inputs are valid")
    }

    pub fn is_subset_of(&self, other: &Hypergraph) -> bool {
        self.edges().all(|e| other.contains(e))
    }

    /// Link `G(S)` of a (k-1)-set as a vertex bitset, for every (k-1)-set
    /// with nonempty link. Keyed by colex rank.
    fn links(&self) -> HashMap<u64, Vec<u64>> {
        let words = self.n.div_ceil(64);
        let r = self.k - 1;
        let binomial = Binomial::new(self.n, r.max(1));
        let mut out: HashMap<u64, Vec<u64>> = HashMap::new();
        for e in self.edges() {
            for skip in 0..self.k {
                let key = binomial.rank_without(e, skip);
                let v = e[skip] as usize;
                out.entry(key).or_insert_with(|| vec![0; words])[v / 64] |= 1 << (v % 64);
            }
        }
        out
    }

    /// Smallest `c` with `|∩ G(S_i)| = (1 ± c) d(G)^l n` for every collection
    /// of `l <= h` distinct (k-2)-sets, where `self` is the (k-1)-uniform G.
    /// Exhaustive up to [`TYPICALITY_EXHAUSTIVE_LIMIT`] tuples, sampled
    /// (`samples` draws) above it.
    pub fn typicality_defect(&self, h: usize, samples: usize, seed: u64) -> Result<Typicality, HypergraphError> {
        if self.is_empty() {
            return Err(HypergraphError::DensityZero);
        }
        if self.k == 0 || h == 0 {
            return Err(HypergraphError::Params("typicality needs k-1 >= 1 and h >= 1".into()));
        }
        let d = self.density();
        let n = self.n as f64;
        let links = self.links();
        let words = self.n.div_ceil(64);
        let empty = vec![0u64; words];
        let num_sets = binom(self.n as u64, (self.k - 1) as u64);
        let tuples: u64 = (1..=h as u64).map(|l| binom(num_sets, l)).fold(0u64, u64::saturating_add);
        let link_of = |rank: u64| links.get(&rank).map_or(empty.as_slice(), Vec::as_slice);
        let deviation = |ranks: &[u32], scratch: &mut Vec<u64>| {
            scratch.clear();
            scratch.extend_from_slice(link_of(ranks[0] as u64));
            for &r in &ranks[1..] {
                for (w, x) in scratch.iter_mut().zip(link_of(r as u64)) {
                    *w &= x;
                }
            }
            let size: u32 = scratch.iter().map(|w| w.count_ones()).sum();
            let expected = d.powi(ranks.len() as i32) * n;
            (size as f64 / expected - 1.0).abs()
        };
        let mut worst = 0.0f64;
        let mut scratch = Vec::with_capacity(words);
        if tuples <= TYPICALITY_EXHAUSTIVE_LIMIT {
            for l in 1..=h.min(num_sets as usize) {
                let mut c: Vec<u32> = (0..l as u32).collect();
                loop {
                    worst = worst.max(deviation(&c, &mut scratch));
                    if !next_combination(&mut c, num_sets as u32) {
                        break;
                    }
                }
            }
            Ok(Typicality { defect: worst, exhaustive: true, tuples })
        } else {
            let mut rng = rng::stream(seed, "typicality", 0);
            let mut pick = Vec::with_capacity(h);
            for _ in 0..samples {
                let l = rng.gen_range(1..=h);
                pick.clear();
                while pick.len() < l {
                    let r = rng.gen_range(0..num_sets) as u32;
                    if !pick.contains(&r) {
                        pick.push(r);
                    }
                }
                worst = worst.max(deviation(&pick, &mut scratch));
            }
            Ok(Typicality { defect: worst, exhaustive: false, tuples })
        }
    }

    /// Measured affine-boundedness constant of `π(self)` in `F^{k}` (self is
    /// k-uniform here; typically a leave of facets): the maximum over affine
    /// lines `A` of `|A ∩ π(G)| · |F|^k / (|A| · |π(G)|)`.
    ///
    /// Higher-dimensional affine subspaces partition into parallel lines, so
    /// their ratio never exceeds the best line's. Lines missing `π(G)` never
    /// attain the maximum, so only lines through occupied points are counted.
    pub fn affine_bound(&self, pi: &Injection) -> Result<f64, HypergraphError> {
        if self.is_empty() {
            return Err(HypergraphError::DensityZero);
        }
        let field = pi.field();
        let q = field.order();
        let d = self.k;
        let points: Vec<Vec<FieldElement>> =
            self.edges().map(|e| e.iter().map(|&v| pi.value(v)).collect()).collect();
        let mut best = 1usize;
        if d >= 2 {
            let mut counts = vec![0u32; q.pow(d as u32 - 1)];
            let mut dir = vec![FieldElement::ZERO; d];
            // directions normalised so the first nonzero coordinate is 1
            for lead in 0..d {
                let tail = d - lead - 1;
                for rest in 0..q.pow(tail as u32) {
                    dir.iter_mut().for_each(|x| *x = FieldElement::ZERO);
                    dir[lead] = FieldElement::ONE;
                    let mut r = rest;
                    for x in dir[lead + 1..].iter_mut() {
                        *x = FieldElement((r % q) as u32);
                        r /= q;
                    }
                    counts.iter_mut().for_each(|c| *c = 0);
                    for p in &points {
                        let t = p[lead];
                        let mut idx = 0usize;
                        for (j, (&pj, &dj)) in p.iter().zip(&dir).enumerate() {
                            if j == lead {
                                continue;
                            }
                            let c = pj + field.mul(t, dj);
                            idx = idx * q + c.0 as usize;
                        }
                        counts[idx] += 1;
                    }
                    best = best.max(*counts.iter().max().unwrap_or(&0) as usize);
                }
            }
        } else {
            best = points.len();
        }
        Ok(best as f64 * (q as f64).powi(d as i32 - 1) / points.len() as f64)
    }

    pub fn to_json(&self) -> HypergraphJson {
        HypergraphJson { n: self.n, k: self.k, edges: self.edges().map(|e| e.iter().map(|&v| v + 1).collect()).collect() }
    }

    pub fn from_json(j: &HypergraphJson) -> Result<Hypergraph, HypergraphError> {
        let edges: Vec<Vec<u32>> = j
            .edges
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&v| v.checked_sub(1).ok_or(HypergraphError::BadEdge { edge: e.clone(), n: j.n, k: j.k }))
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Hypergraph::from_edges(j.n, j.k, edges)
    }

    /// Text format: `n k` header, then one 1-based sorted edge per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.k);
        for e in self.edges() {
            let line: Vec<String> = e.iter().map(|v| (v + 1).to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Hypergraph, HypergraphError> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
        let (_, header) = lines.next().ok_or(HypergraphError::Parse { line: 1, msg: "missing header".into() })?;
        let header = header?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| HypergraphError::Parse { line: 1, msg: format!("bad header `{header}`") }))
            .collect::<Result<_, _>>()?;
        let [n, k] = nums[..] else {
            return Err(HypergraphError::Parse { line: 1, msg: "header must be `n k`".into() });
        };
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line?;
            let e: Vec<u32> = line
                .split_whitespace()
                .map(|t| match t.parse::<u32>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(HypergraphError::Parse { line: i + 1, msg: format!("bad vertex `{t}`") }),
                })
                .collect::<Result<_, _>>()?;
            edges.push(e);
        }
        Hypergraph::from_edges(n, k, edges)
    }

    pub fn save(&self, path: &Path) -> Result<(), HypergraphError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_text().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Hypergraph, HypergraphError> {
        Hypergraph::read_text(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Per-edge uniform keyed by `(seed, colex rank)`. Shared by
/// [`sample_hnp`] and [`ProcessStream`], which couples them: H(n;p) is the
/// set of edges whose uniform is below `p`.
#[inline]
pub fn edge_uniform(seed: u64, rank: u64) -> f64 {
    rng::unit(rng::keyed(&[seed, HNP_TAG, rank]))
}

fn check_params(n: usize, k: usize) -> Result<(), HypergraphError> {
    if k < 2 || k > n {
        return Err(HypergraphError::Params(format!("need 2 <= k <= n, got n={n}, k={k}")));
    }
    if n > u32::MAX as usize / 2 {
        return Err(HypergraphError::Params(format!("n={n} too large")));
    }
    Ok(())
}

/// H(n; p): each k-set independently with probability `p`.
pub fn sample_hnp(n: usize, k: usize, p: f64, seed: u64) -> Result<Hypergraph, HypergraphError> {
    check_params(n, k)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(HypergraphError::Params(format!("p={p} outside [0, 1]")));
    }
    let binomial = Binomial::new(n, k);
    let mut verts = Vec::new();
    for_each_combination(n as u32, k, |c| {
        if edge_uniform(seed, binomial.rank(c)) < p {
            verts.extend_from_slice(c);
        }
    });
    Ok(Hypergraph::from_sorted_flat(n, k, verts))
}

/// The random hypergraph process: all k-sets in a seeded uniformly random
/// order, revealed one at a time.
#[derive(Debug, Clone)]
pub struct ProcessStream {
    n: usize,
    k: usize,
    order: Vec<u32>,
    t: usize,
}

impl ProcessStream {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<ProcessStream, HypergraphError> {
        check_params(n, k)?;
        let binomial = Binomial::new(n, k);
        let mut keyed: Vec<(f64, u64, Vec<u32>)> = Vec::new();
        for_each_combination(n as u32, k, |c| {
            let r = binomial.rank(c);
            keyed.push((edge_uniform(seed, r), r, c.to_vec()));
        });
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let order = keyed.into_iter().flat_map(|(_, _, e)| e).collect();
        Ok(ProcessStream { n, k, order, t: 0 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Edges revealed so far.
    pub fn step(&self) -> usize {
        self.t
    }

    pub fn total(&self) -> usize {
        self.order.len() / self.k
    }

    pub fn is_exhausted(&self) -> bool {
        self.t == self.total()
    }

    pub fn next_edge(&mut self) -> Result<&[u32], HypergraphError> {
        if self.is_exhausted() {
            return Err(HypergraphError::Exhausted(self.t));
        }
        let e = &self.order[self.t * self.k..(self.t + 1) * self.k];
        self.t += 1;
        Ok(e)
    }

    /// The `i`-th edge of the order (0-based), regardless of progress.
    pub fn edge_at(&self, i: usize) -> &[u32] {
        &self.order[i * self.k..(i + 1) * self.k]
    }

    /// Hypergraph of the first `t` edges.
    pub fn prefix(&self, t: usize) -> Hypergraph {
        let edges = (0..t.min(self.total())).map(|i| self.edge_at(i));
        Hypergraph::from_edges(self.n, self.k, edges).expect("stream edges are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(n: usize, k: usize, edges: &[&[u32]]) -> Hypergraph {
        Hypergraph::from_edges(n, k, edges.iter().map(|e| e.iter().map(|v| v - 1).collect::<Vec<_>>())).unwrap()
    }

    #[test]
    fn construction_validates_and_canonicalises() {
        let h = Hypergraph::from_edges(5, 3, [[2u32, 0, 1], [0, 1, 2], [4, 3, 2]]).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.edge(0), &[0, 1, 2]);
        assert!(Hypergraph::from_edges(5, 3, [[0u32, 0, 1]]).is_err());
        assert!(Hypergraph::from_edges(5, 3, [[0u32, 1, 5]]).is_err());
        assert!(Hypergraph::from_edges(5, 3, [vec![0u32, 1]]).is_err());
    }

    #[test]
    fn hnp_extremes() {
        assert_eq!(sample_hnp(8, 3, 1.0, 3).unwrap().len(), 56);
        assert_eq!(sample_hnp(8, 3, 0.0, 3).unwrap().len(), 0);
        assert!(sample_hnp(8, 1, 0.5, 3).is_err());
        assert!(sample_hnp(8, 3, 1.5, 3).is_err());
        assert_eq!(sample_hnp(9, 3, 0.4, 11).unwrap(), sample_hnp(9, 3, 0.4, 11).unwrap());
    }

    #[test]
    fn hnp_size_is_binomial() {
        // mean 570, sd sqrt(570 * 0.5)
        let sd = (570.0f64 * 0.5).sqrt();
        for seed in 0..100 {
            let m = sample_hnp(20, 3, 0.5, seed).unwrap().len() as f64;
            assert!((m - 570.0).abs() <= 4.0 * sd, "seed {seed}: {m}");
        }
    }

    #[test]
    fn hnp_is_monotone_in_p() {
        for seed in 0..5 {
            let lo = sample_hnp(10, 3, 0.3, seed).unwrap();
            let hi = sample_hnp(10, 3, 0.6, seed).unwrap();
            assert!(lo.is_subset_of(&hi));
        }
    }

    #[test]
    fn facets_examples() {
        let one = g(4, 3, &[&[1, 2, 3]]);
        assert_eq!(one.facets_of(), g(4, 2, &[&[1, 2], &[1, 3], &[2, 3]]));
        assert!(Hypergraph::empty(4, 3).facets_of().is_empty());
        assert_eq!(g(4, 3, &[&[1, 2, 3], &[1, 2, 4]]).facets_of().len(), 5);
    }

    #[test]
    fn clique_examples() {
        assert_eq!(Hypergraph::complete(4, 2).k_cliques().len(), 4);
        let c4 = g(4, 2, &[&[1, 2], &[2, 3], &[3, 4], &[1, 4]]);
        assert!(c4.k_cliques().is_empty());
        assert!(Hypergraph::empty(4, 2).k_cliques().is_empty());
        assert_eq!(Hypergraph::complete(6, 3).k_cliques(), Hypergraph::complete(6, 4));
    }

    #[test]
    fn divisibility_examples() {
        assert!(Hypergraph::complete(7, 2).is_k_divisible(3));
        assert!(!Hypergraph::complete(6, 2).is_k_divisible(3));
        assert!(g(3, 2, &[&[1, 2], &[1, 3], &[2, 3]]).is_k_divisible(3));
    }

    #[test]
    fn triangle_divisibility_matches_congruence() {
        for n in 3..=50 {
            assert_eq!(Hypergraph::complete(n, 2).is_k_divisible(3), n % 6 == 1 || n % 6 == 3, "n={n}");
        }
    }

    #[test]
    fn typicality_examples() {
        let t = Hypergraph::complete(10, 2).typicality_defect(1, 0, 0).unwrap();
        assert!((t.defect - 0.1).abs() < 1e-12);
        assert!(t.exhaustive);
        assert!(matches!(Hypergraph::empty(5, 2).typicality_defect(1, 0, 0), Err(HypergraphError::DensityZero)));
        // K_2^n with h = 2: |G(u) ∩ G(v)| = n - 2 against d^2 n = n
        let t2 = Hypergraph::complete(10, 2).typicality_defect(2, 0, 0).unwrap();
        assert!((t2.defect - 0.2).abs() < 1e-12);
    }

    #[test]
    fn stream_properties() {
        let mut s = ProcessStream::new(5, 3, 9).unwrap();
        let first: Vec<Vec<u32>> = (0..3).map(|_| s.next_edge().unwrap().to_vec()).collect();
        assert_ne!(first[0], first[1]);
        assert_ne!(first[1], first[2]);
        assert_ne!(first[0], first[2]);
        while !s.is_exhausted() {
            s.next_edge().unwrap();
        }
        assert!(matches!(s.next_edge(), Err(HypergraphError::Exhausted(10))));
        assert_eq!(s.prefix(10), Hypergraph::complete(5, 3));
        let a = ProcessStream::new(6, 3, 4).unwrap();
        let b = ProcessStream::new(6, 3, 4).unwrap();
        assert_eq!(a.order, b.order);
    }

    #[test]
    fn stream_prefix_matches_hnp_coupling() {
        let s = ProcessStream::new(9, 3, 21).unwrap();
        let h = sample_hnp(9, 3, 0.4, 21).unwrap();
        assert_eq!(s.prefix(h.len()), h);
    }

    #[test]
    fn text_round_trip() {
        let h = sample_hnp(9, 3, 0.3, 2).unwrap();
        let back = Hypergraph::read_text(h.to_text().as_bytes()).unwrap();
        assert_eq!(back, h);
        assert_eq!(Hypergraph::from_json(&h.to_json()).unwrap(), h);
        assert!(Hypergraph::read_text("3 3\n1 2 0\n".as_bytes()).is_err());
        assert!(Hypergraph::read_text("".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn cliques_have_their_facets(seed in 0u64..500, p in 0.2f64..0.9) {
            let gph = sample_hnp(8, 2, p, seed).unwrap();
            let cl = gph.k_cliques();
            prop_assert!(cl.facets_of().is_subset_of(&gph));
        }

        #[test]
        fn removing_a_partial_design_keeps_divisibility(seed in 0u64..200) {
            // greedy partial Steiner triple system on 9 points
            let mut rng = crate::rng::stream(seed, "test", 0);
            let mut covered = std::collections::HashSet::new();
            let mut used = Vec::new();
            let mut all: Vec<Vec<u32>> = Hypergraph::complete(9, 3).edges().map(<[u32]>::to_vec).collect();
            rand::seq::SliceRandom::shuffle(all.as_mut_slice(), &mut rng);
            for e in all {
                let fs = [(e[0], e[1]), (e[0], e[2]), (e[1], e[2])];
                if fs.iter().all(|f| !covered.contains(f)) {
                    covered.extend(fs);
                    used.push(e);
                }
            }
            let design = Hypergraph::from_edges(9, 3, &used).unwrap();
            let leave = Hypergraph::complete(9, 2).difference(&design.facets_of());
            prop_assert!(leave.is_k_divisible(3));
        }
    }
}

//! Fractional K_k-decompositions: weights `w: H -> [0, 1]` with
//! `Σ_{f ⊆ e ∈ H} w(e) = 1` for every facet, and the hitting-time experiment
//! comparing the disappearance of uncovered facets with the appearance of a
//! fractional decomposition in the random hypergraph process.
//!
//! Feasibility is a phase-one simplex over a dense tableau, generic over
//! `f64` and exact rationals. Bland's rule throughout; the LPs here are
//! highly degenerate.

use crate::combin::{binom, Binomial};
use crate::hypergraph::{Hypergraph, HypergraphError, ProcessStream};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Float,
    Rational,
}

/// Scalar for the simplex.
pub trait Scalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn is_zero(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
    fn lt(&self, o: &Self) -> bool {
        o.sub(self).is_pos()
    }
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOLERANCE
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOLERANCE
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Phase-one tableau for `A w = 1, w ≥ 0` with 0/1 columns. Columns can be
/// appended while keeping the current basis, which stays primal feasible.
#[derive(Debug, Clone)]
pub struct Phase1<S: Scalar> {
    rows: usize,
    /// `B^-1 A`, row-major, one entry per structural column.
    body: Vec<Vec<S>>,
    /// `B^-1`: the artificial columns.
    binv: Vec<Vec<S>>,
    rhs: Vec<S>,
    /// Reduced costs of structural and artificial columns.
    cost: Vec<S>,
    cost_art: Vec<S>,
    /// Basic variable per row.
    basis: Vec<Var>,
    cols: usize,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    Real(usize),
    Art(usize),
}

impl<S: Scalar> Phase1<S> {
    pub fn new(rows: usize) -> Phase1<S> {
        let binv = (0..rows).map(|i| (0..rows).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
        Phase1 {
            rows,
            body: vec![Vec::new(); rows],
            binv,
            rhs: vec![S::one(); rows],
            cost: Vec::new(),
            cost_art: vec![S::zero(); rows],
            basis: (0..rows).map(Var::Art).collect(),
            cols: 0,
            pivots: 0,
        }
    }

    /// Adds a column with ones in `support`.
    pub fn push_column(&mut self, support: &[usize]) {
        // the reduced cost of artificial i is 1 - y_i
        let y: Vec<S> = self.cost_art.iter().map(|d| S::one().sub(d)).collect();
        let mut d = S::zero();
        for &r in support {
            d = d.sub(&y[r]);
        }
        for i in 0..self.rows {
            let mut v = S::zero();
            for &r in support {
                v = v.add(&self.binv[i][r]);
            }
            self.body[i].push(v);
        }
        self.cost.push(d);
        self.cols += 1;
    }

    /// Sum of artificial values at the current basis.
    pub fn infeasibility(&self) -> S {
        let mut z = S::zero();
        for (i, b) in self.basis.iter().enumerate() {
            if matches!(b, Var::Art(_)) {
                z = z.add(&self.rhs[i]);
            }
        }
        z
    }

    fn entering(&self) -> Option<Var> {
        if let Some(j) = self.cost.iter().position(|d| d.is_neg()) {
            return Some(Var::Real(j));
        }
        self.cost_art.iter().position(|d| d.is_neg()).map(Var::Art)
    }

    fn column(&self, v: Var, i: usize) -> &S {
        match v {
            Var::Real(j) => &self.body[i][j],
            Var::Art(j) => &self.binv[i][j],
        }
    }

    fn pivot(&mut self, r: usize, enter: Var) {
        let p = self.column(enter, r).clone();
        for x in self.body[r].iter_mut().chain(self.binv[r].iter_mut()) {
            *x = x.div(&p);
        }
        self.rhs[r] = self.rhs[r].div(&p);
        let (pivot_body, pivot_binv, pivot_rhs) = (self.body[r].clone(), self.binv[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.column(enter, i).clone();
            if f.is_zero() {
                continue;
            }
            for (x, q) in self.body[i].iter_mut().zip(&pivot_body) {
                *x = x.sub(&f.mul(q));
            }
            for (x, q) in self.binv[i].iter_mut().zip(&pivot_binv) {
                *x = x.sub(&f.mul(q));
            }
            self.rhs[i] = self.rhs[i].sub(&f.mul(&pivot_rhs));
        }
        let f = match enter {
            Var::Real(j) => self.cost[j].clone(),
            Var::Art(j) => self.cost_art[j].clone(),
        };
        if !f.is_zero() {
            for (x, q) in self.cost.iter_mut().zip(&pivot_body) {
                *x = x.sub(&f.mul(q));
            }
            for (x, q) in self.cost_art.iter_mut().zip(&pivot_binv) {
                *x = x.sub(&f.mul(q));
            }
        }
        self.basis[r] = enter;
        self.pivots += 1;
    }

    /// Runs phase one to optimality; true when the artificials reach zero.
    pub fn solve(&mut self) -> bool {
        while let Some(enter) = self.entering() {
            let mut best: Option<(usize, S)> = None;
            for i in 0..self.rows {
                let a = self.column(enter, i);
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio.lt(&br) || (!br.lt(&ratio) && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                Some((r, _)) => self.pivot(r, enter),
                // phase one is bounded below by zero
                None => unreachable!("unbounded phase-one direction"),
            }
        }
        !self.infeasibility().is_pos()
    }

    /// Structural values at the current basis.
    pub fn values(&self) -> Vec<S> {
        let mut w = vec![S::zero(); self.cols];
        for (i, b) in self.basis.iter().enumerate() {
            if let Var::Real(j) = b {
                w[*j] = self.rhs[i].clone();
            }
        }
        w
    }
}

/// Weights per edge of `H`, in edge order.
#[derive(Debug, Clone, PartialEq)]
pub enum FractionalSolution {
    Float(Vec<f64>),
    Rational(Vec<BigRational>),
}

impl FractionalSolution {
    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            FractionalSolution::Float(w) => w.clone(),
            FractionalSolution::Rational(w) => w.iter().map(Scalar::to_f64).collect(),
        }
    }
}

/// Row index per facet: all of `K_{k-1}^n` when `cover_all`, otherwise the
/// facets of `H` in colex order.
fn facet_rows(h: &Hypergraph, cover_all: bool) -> (usize, Box<dyn Fn(&[u32]) -> usize>) {
    let binomial = Binomial::new(h.n(), h.k());
    if cover_all {
        let rows = binom(h.n() as u64, (h.k() - 1) as u64) as usize;
        (rows, Box::new(move |f| binomial.rank(f) as usize))
    } else {
        let facets = h.facets_of();
        let ranks: Vec<u64> = facets.edges().map(|f| binomial.rank(f)).collect();
        let mut sorted = ranks.clone();
        sorted.sort_unstable();
        (sorted.len(), Box::new(move |f| sorted.binary_search(&binomial.rank(f)).expect("facet of H")))
    }
}

fn supports(h: &Hypergraph, row: &dyn Fn(&[u32]) -> usize) -> Vec<Vec<usize>> {
    h.edges().map(|e| (0..h.k()).map(|s| row(&crate::combin::without(e, s))).collect()).collect()
}

/// A fractional decomposition of `K_{k-1}(H)` (or of `K_{k-1}^n` with
/// `cover_all`), or `None` when infeasible.
pub fn fractional_exists(h: &Hypergraph, arithmetic: Arithmetic, cover_all: bool) -> Option<FractionalSolution> {
    let (rows, row) = facet_rows(h, cover_all);
    let cols = supports(h, &*row);
    match arithmetic {
        Arithmetic::Float => solve::<f64>(rows, &cols).map(FractionalSolution::Float),
        Arithmetic::Rational => solve::<BigRational>(rows, &cols).map(FractionalSolution::Rational),
    }
}

fn solve<S: Scalar>(rows: usize, cols: &[Vec<usize>]) -> Option<Vec<S>> {
    let mut lp = Phase1::<S>::new(rows);
    for c in cols {
        lp.push_column(c);
    }
    lp.solve().then(|| lp.values())
}

/// Largest facet-equation residual and bound violation of `w` on `H`.
pub fn residual(h: &Hypergraph, w: &[f64], cover_all: bool) -> f64 {
    let (rows, row) = facet_rows(h, cover_all);
    let mut sum = vec![0.0; rows];
    for (e, s) in supports(h, &*row).iter().zip(w) {
        for &r in e {
            sum[r] += s;
        }
    }
    let eq = sum.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let bounds = w.iter().map(|&x| (-x).max(x - 1.0).max(0.0)).fold(0.0, f64::max);
    eq.max(bounds)
}

/// Exact feasibility check of rational weights.
pub fn is_exact_solution(h: &Hypergraph, w: &[BigRational], cover_all: bool) -> bool {
    let (rows, row) = facet_rows(h, cover_all);
    let mut sum = vec![<BigRational as Zero>::zero(); rows];
    for (e, s) in supports(h, &*row).iter().zip(w) {
        for &r in e {
            sum[r] += s;
        }
    }
    let one = <BigRational as One>::one();
    sum.iter().all(|s| *s == one) && w.iter().all(|x| !x.is_negative() && *x <= one)
}

/// The indicator of `D` as weights on `H`; `None` when `D ⊄ H`.
pub fn indicator(h: &Hypergraph, d: &Hypergraph) -> Option<Vec<BigRational>> {
    if !d.is_subset_of(h) {
        return None;
    }
    Some(h.edges().map(|e| if d.contains(e) { <BigRational as One>::one() } else { <BigRational as Zero>::zero() }).collect())
}

/// The indicator of a design inside `H` is an exact fractional decomposition
/// of `K_{k-1}^n`.
pub fn indicator_is_feasible(h: &Hypergraph, d: &Hypergraph) -> bool {
    indicator(h, d).is_some_and(|w| is_exact_solution(h, &w, true))
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingTimes {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub t_cover: usize,
    pub t_frac: usize,
}

impl HittingTimes {
    pub fn equal(&self) -> bool {
        self.t_cover == self.t_frac
    }
}

/// Runs the random hypergraph process until every facet is covered
/// (`t_cover`), then keeps adding edges until a fractional decomposition of
/// `K_{k-1}^n` exists (`t_frac`). The LP is warm-started from the previous
/// basis after each new edge.
pub fn hitting_times(n: usize, k: usize, seed: u64) -> Result<HittingTimes, HypergraphError> {
    let mut stream = ProcessStream::new(n, k, seed)?;
    let binomial = Binomial::new(n, k);
    let rows = binom(n as u64, (k - 1) as u64) as usize;
    let mut covered = vec![false; rows];
    let mut uncovered = rows;
    let mut edges: Vec<Vec<usize>> = Vec::new();
    while uncovered > 0 {
        let e = stream.next_edge()?;
        let support: Vec<usize> = (0..k).map(|s| binomial.rank_without(e, s) as usize).collect();
        for &r in &support {
            if !covered[r] {
                covered[r] = true;
                uncovered -= 1;
            }
        }
        edges.push(support);
    }
    let t_cover = stream.step();
    let mut lp = Phase1::<f64>::new(rows);
    for c in &edges {
        lp.push_column(c);
    }
    while !lp.solve() {
        let e = stream.next_edge()?;
        let support: Vec<usize> = (0..k).map(|s| binomial.rank_without(e, s) as usize).collect();
        lp.push_column(&support);
    }
    Ok(HittingTimes { seed, n, k, t_cover, t_frac: stream.step() })
}

/// One CSV row per trial: `seed,n,k,t_cover,t_frac,equal`.
pub fn write_hitting_csv<W: Write>(rows: &[HittingTimes], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "n", "k", "t_cover", "t_frac", "equal"])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.t_cover.to_string(),
            r.t_frac.to_string(),
            r.equal().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::sample_hnp;
    use proptest::prelude::*;

    /// Exhaustive search over weights in {0, 1/2, 1}: enough for the tiny
    /// instances below, and independent of the simplex.
    fn half_integral_exists(h: &Hypergraph, cover_all: bool) -> bool {
        let m = h.len();
        let mut w = vec![0u8; m];
        loop {
            let x: Vec<f64> = w.iter().map(|&v| v as f64 / 2.0).collect();
            if residual(h, &x, cover_all) < 1e-12 {
                return true;
            }
            let mut i = 0;
            while i < m && w[i] == 2 {
                w[i] = 0;
                i += 1;
            }
            if i == m {
                return false;
            }
            w[i] += 1;
        }
    }

    #[test]
    fn single_triangle() {
        let h = Hypergraph::from_edges(5, 3, [[0u32, 1, 2]]).unwrap();
        for a in [Arithmetic::Float, Arithmetic::Rational] {
            let w = fractional_exists(&h, a, false).unwrap();
            assert_eq!(w.as_f64(), vec![1.0]);
            assert!(fractional_exists(&h, a, true).is_none());
        }
    }

    #[test]
    fn k4_takes_halves() {
        let h = Hypergraph::complete(4, 3);
        let FractionalSolution::Rational(w) = fractional_exists(&h, Arithmetic::Rational, true).unwrap() else {
            panic!()
        };
        assert!(is_exact_solution(&h, &w, true));
        assert!(w.iter().all(|x| *x == rational(1, 2)));
        let f = fractional_exists(&h, Arithmetic::Float, true).unwrap().as_f64();
        assert!(residual(&h, &f, true) <= 1e-9);
        assert!(half_integral_exists(&h, true));
    }

    #[test]
    fn uncovered_facet_is_infeasible() {
        let h = Hypergraph::from_edges(4, 3, [[0u32, 1, 2], [0, 1, 3], [0, 2, 3]]).unwrap();
        assert!(fractional_exists(&h, Arithmetic::Float, true).is_none());
        assert!(fractional_exists(&h, Arithmetic::Rational, true).is_none());
    }

    #[test]
    fn fano_indicator() {
        let d = Hypergraph::from_edges(7, 3, [[0u32, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]]).unwrap();
        let h = Hypergraph::complete(7, 3);
        assert!(indicator_is_feasible(&h, &d));
        assert!(indicator_is_feasible(&d, &d));
        let smaller = Hypergraph::from_edges(7, 3, d.edges().skip(1)).unwrap();
        assert!(!indicator_is_feasible(&smaller, &d));
        assert!(fractional_exists(&d, Arithmetic::Rational, true).is_some());
    }

    #[test]
    fn matches_half_integral_search_on_small_hosts() {
        // on 5 points every feasible instance has a half-integral solution
        for seed in 0..40 {
            let h = sample_hnp(5, 3, 0.7, seed).unwrap();
            let exact = fractional_exists(&h, Arithmetic::Rational, false).is_some();
            assert_eq!(exact, half_integral_exists(&h, false), "seed {seed}");
        }
    }

    #[test]
    fn warm_start_matches_cold_solve() {
        let h = sample_hnp(8, 3, 0.8, 5).unwrap();
        let (rows, row) = facet_rows(&h, true);
        let cols = supports(&h, &*row);
        let mut warm = Phase1::<BigRational>::new(rows);
        for (i, c) in cols.iter().enumerate() {
            warm.push_column(c);
            let cold = solve::<BigRational>(rows, &cols[..=i]).is_some();
            assert_eq!(warm.solve(), cold, "prefix {}", i + 1);
        }
    }

    #[test]
    fn hitting_times_are_ordered() {
        for seed in 0..5 {
            let t = hitting_times(8, 3, seed).unwrap();
            assert!(t.t_frac >= t.t_cover);
            let at_frac = ProcessStream::new(8, 3, seed).unwrap().prefix(t.t_frac);
            assert!(fractional_exists(&at_frac, Arithmetic::Rational, true).is_some());
            let before = ProcessStream::new(8, 3, seed).unwrap().prefix(t.t_frac - 1);
            assert!(fractional_exists(&before, Arithmetic::Rational, true).is_none());
        }
    }

    #[test]
    fn hitting_csv_header() {
        let mut buf = Vec::new();
        write_hitting_csv(&[HittingTimes { seed: 1, n: 12, k: 3, t_cover: 40, t_frac: 41 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "seed,n,k,t_cover,t_frac,equal\n1,12,3,40,41,false\n");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn adding_an_edge_keeps_feasibility(seed in any::<u64>(), extra in 0usize..35) {
            let h = sample_hnp(7, 3, 0.6, seed).unwrap();
            if fractional_exists(&h, Arithmetic::Rational, false).is_some() {
                let mut c = Vec::new();
                crate::combin::Binomial::new(7, 3).unrank(extra as u64, 3, &mut c);
                let bigger = h.union(&Hypergraph::from_edges(7, 3, [c]).unwrap());
                // e's facets may be new rows; keep the comparison on K_{k-1}^n
                if fractional_exists(&h, Arithmetic::Rational, true).is_some() {
                    prop_assert!(fractional_exists(&bigger, Arithmetic::Rational, true).is_some());
                }
            }
        }

        #[test]
        fn float_agrees_with_rational(seed in any::<u64>(), p in 0.3f64..1.0, cover_all in any::<bool>()) {
            let h = sample_hnp(7, 3, p, seed).unwrap();
            let f = fractional_exists(&h, Arithmetic::Float, cover_all);
            let r = fractional_exists(&h, Arithmetic::Rational, cover_all);
            prop_assert_eq!(f.is_some(), r.is_some());
            if let Some(w) = f {
                prop_assert!(residual(&h, &w.as_f64(), cover_all) <= 1e-9);
            }
        }
    }
}

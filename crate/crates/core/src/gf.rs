//! Arithmetic in GF(2^m) and dense linear algebra over it.
//!
//! Elements are stored as their polynomial-basis bit pattern. Addition is XOR,
//! multiplication is carry-less shift-and-reduce modulo a fixed irreducible
//! polynomial. Every context for a given `m` uses the same modulus, so results
//! are reproducible across platforms and runs.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 31;

/// Irreducible moduli for m = 2..=16, lowest-weight conventional choices.
const MODULUS_TABLE: [u64; 15] = [
    0x7,     // x^2+x+1
    0xB,     // x^3+x+1
    0x13,    // x^4+x+1
    0x25,    // x^5+x^2+1
    0x43,    // x^6+x+1
    0x83,    // x^7+x+1
    0x11D,   // x^8+x^4+x^3+x^2+1
    0x211,   // x^9+x^4+1
    0x409,   // x^10+x^3+1
    0x805,   // x^11+x^2+1
    0x1053,  // x^12+x^6+x^4+x+1
    0x201B,  // x^13+x^4+x^3+x+1
    0x4443,  // x^14+x^10+x^6+x+1
    0x8003,  // x^15+x+1
    0x1100B, // x^16+x^12+x^3+x+1
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("field bit-width {0} outside supported range {MIN_BITS}..={MAX_BITS}")]
    BitWidth(u32),
    #[error("modulus {modulus:#x} is not an irreducible polynomial of degree {m}")]
    Reducible { m: u32, modulus: u64 },
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("no field of size 2^m with 2 <= m <= 31 fits {0} vertices")]
    TooManyVertices(usize),
}

/// An element of GF(2^m), as the bit pattern of its polynomial representative.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn add(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl std::ops::AddAssign for FieldElement {
    #[inline]
    fn add_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

/// How to pick the field size for an `n`-vertex instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FieldPolicy {
    /// Smallest m with 2n <= 2^m <= 4n.
    Wide,
    /// Smallest m with 2^m > n + 1.
    #[default]
    Minimal,
}

impl FieldPolicy {
    pub fn bits_for(self, n: usize) -> Result<u32, GfError> {
        let n = n as u64;
        let m = match self {
            FieldPolicy::Wide => (MIN_BITS..=MAX_BITS).find(|&m| {
                let q = 1u64 << m;
                2 * n <= q && q <= 4 * n
            }),
            FieldPolicy::Minimal => (MIN_BITS..=MAX_BITS).find(|&m| (1u64 << m) > n + 1),
        };
        m.ok_or(GfError::TooManyVertices(n as usize))
    }
}

impl std::str::FromStr for FieldPolicy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "wide" => Ok(FieldPolicy::Wide),
            "minimal" => Ok(FieldPolicy::Minimal),
            other => Err(format!("unknown field policy `{other}` (expected wide|minimal)")),
        }
    }
}

/// GF(2^m) with a fixed modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldCtx {
    m: u32,
    modulus: u64,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF(2^{}, {:#x})", self.m, self.modulus)
    }
}

impl FieldCtx {
    /// Field with `2^m` elements and the canonical modulus for `m`.
    pub fn new(m: u32) -> Result<FieldCtx, GfError> {
        if !(MIN_BITS..=MAX_BITS).contains(&m) {
            return Err(GfError::BitWidth(m));
        }
        let modulus = if m <= 16 {
            MODULUS_TABLE[(m - 2) as usize]
        } else {
            // smallest irreducible of degree m with the constant term set
            let top = 1u64 << m;
            (1..top)
                .step_by(2)
                .map(|low| top | low)
                .find(|&p| is_irreducible(p))
                .expect("an irreducible polynomial exists in every degree")
        };
        Ok(FieldCtx { m, modulus })
    }

    pub fn with_modulus(m: u32, modulus: u64) -> Result<FieldCtx, GfError> {
        if !(MIN_BITS..=MAX_BITS).contains(&m) {
            return Err(GfError::BitWidth(m));
        }
        if degree(modulus) != Some(m) || !is_irreducible(modulus) {
            return Err(GfError::Reducible { m, modulus });
        }
        Ok(FieldCtx { m, modulus })
    }

    pub fn for_vertices(n: usize, policy: FieldPolicy) -> Result<FieldCtx, GfError> {
        FieldCtx::new(policy.bits_for(n)?)
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Number of elements, `2^m`.
    pub fn order(&self) -> usize {
        1usize << self.m
    }

    pub fn element(&self, bits: u32) -> FieldElement {
        debug_assert!((bits as u64) < (1u64 << self.m));
        FieldElement(bits)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..(1u64 << self.m)).map(|b| FieldElement(b as u32))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = FieldElement> {
        (1..(1u64 << self.m)).map(|b| FieldElement(b as u32))
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let mut acc: u64 = 0;
        let mut x = a.0 as u64;
        let mut y = b.0 as u64;
        let top = 1u64 << self.m;
        while y != 0 {
            if y & 1 == 1 {
                acc ^= x;
            }
            y >>= 1;
            x <<= 1;
            if x & top != 0 {
                x ^= self.modulus;
            }
        }
        FieldElement(acc as u32)
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via a^(2^m - 2).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.pow(a, (1u64 << self.m) - 2))
    }

    pub fn sum<I: IntoIterator<Item = FieldElement>>(&self, items: I) -> FieldElement {
        items.into_iter().fold(FieldElement::ZERO, |acc, x| acc + x)
    }
}

fn degree(p: u64) -> Option<u32> {
    if p == 0 {
        None
    } else {
        Some(63 - p.leading_zeros())
    }
}

fn poly_mod(mut a: u64, b: u64) -> u64 {
    let db = degree(b).expect("nonzero divisor");
    while let Some(da) = degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Irreducibility over GF(2) by trial division with every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible(p: u64) -> bool {
    let d = match degree(p) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    for dq in 1..=d / 2 {
        for q in (1u64 << dq)..(1u64 << (dq + 1)) {
            if poly_mod(p, q) == 0 {
                return false;
            }
        }
    }
    true
}

/// Dense row-major matrix over a GF(2^m).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<FieldElement>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<u32> = self.row(r).iter().map(|e| e.0).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

/// Solution set `point + span(basis)` of a linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSet {
    pub point: Vec<FieldElement>,
    pub basis: Vec<Vec<FieldElement>>,
}

impl AffineSet {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Number of points, `|F|^dim`, saturating.
    pub fn size(&self, field: &FieldCtx) -> u128 {
        (field.order() as u128).saturating_pow(self.dim() as u32)
    }
}

/// Reduced row echelon form plus pivot columns.
struct Echelon {
    m: Matrix,
    pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, entries: vec![FieldElement::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::ONE);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Matrix, GfError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(GfError::Dimension { expected: c, got: row.len() });
            }
            entries.extend(row);
        }
        Ok(Matrix { rows: r, cols: c, entries })
    }

    /// Matrix with 0/1 entries given as `u8` rows.
    pub fn from_bits(rows: &[Vec<u8>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged bit matrix");
            for (j, &b) in row.iter().enumerate() {
                m.set(i, j, FieldElement((b & 1) as u32));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Columns `range` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Matrix {
        let mut out = Matrix::zeros(self.rows, end - start);
        for r in 0..self.rows {
            for c in start..end {
                out.set(r, c - start, self.get(r, c));
            }
        }
        out
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Matrix { rows: self.rows + other.rows, cols: self.cols, entries }
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self.entries.iter().zip(&other.entries).map(|(&a, &b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, entries }
    }

    pub fn mul(&self, other: &Matrix, field: &FieldCtx) -> Matrix {
        assert_eq!(self.cols, other.rows, "incompatible matrix product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        let cur = out.get(i, j);
                        out.set(i, j, cur + field.mul(a, b));
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[FieldElement], field: &FieldCtx) -> Result<Vec<FieldElement>, GfError> {
        if v.len() != self.cols {
            return Err(GfError::Dimension { expected: self.cols, got: v.len() });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r).iter().zip(v).fold(FieldElement::ZERO, |acc, (&a, &x)| {
                    if a == FieldElement::ONE {
                        acc + x
                    } else {
                        acc + field.mul(a, x)
                    }
                })
            })
            .collect())
    }

    fn echelon(&self, field: &FieldCtx) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    let tmp = m.get(r, j);
                    m.set(r, j, m.get(p, j));
                    m.set(p, j, tmp);
                }
            }
            let inv = field.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in 0..m.cols {
                m.set(r, j, field.mul(m.get(r, j), inv));
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j) + field.mul(factor, m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { m, pivots }
    }

    pub fn rank(&self, field: &FieldCtx) -> usize {
        self.echelon(field).pivots.len()
    }

    /// Basis of the null space; its length is `cols - rank`.
    pub fn kernel_basis(&self, field: &FieldCtx) -> Vec<Vec<FieldElement>> {
        let Echelon { m, pivots } = self.echelon(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![FieldElement::ZERO; self.cols];
                v[fc] = FieldElement::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    // char 2: -x = x
                    v[pc] = m.get(r, fc);
                }
                v
            })
            .collect()
    }

    /// All `x` with `self * x = y`, or `None` when `y` is outside the image.
    pub fn affine_preimage(&self, y: &[FieldElement], field: &FieldCtx) -> Result<Option<AffineSet>, GfError> {
        if y.len() != self.rows {
            return Err(GfError::Dimension { expected: self.rows, got: y.len() });
        }
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, y[r]);
        }
        let Echelon { m, pivots } = aug.echelon(field);
        if pivots.last() == Some(&self.cols) {
            return Ok(None);
        }
        let mut point = vec![FieldElement::ZERO; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            point[pc] = m.get(r, self.cols);
        }
        Ok(Some(AffineSet { point, basis: self.kernel_basis(field) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf8() -> FieldCtx {
        FieldCtx::new(3).unwrap()
    }

    /// Independent schoolbook product: multiply as polynomials, then reduce
    /// by long division.
    fn schoolbook(a: u32, b: u32, modulus: u64) -> u32 {
        let mut prod = 0u64;
        for i in 0..32 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        poly_mod(prod, modulus) as u32
    }

    #[test]
    fn field_sizes_and_range() {
        let f = gf8();
        assert_eq!(f.order(), 8);
        assert_eq!(f.nonzero().count(), 7);
        assert_eq!(FieldCtx::new(1), Err(GfError::BitWidth(1)));
        assert_eq!(FieldCtx::new(32), Err(GfError::BitWidth(32)));
    }

    #[test]
    fn modulus_table_is_irreducible() {
        for m in MIN_BITS..=16 {
            let f = FieldCtx::new(m).unwrap();
            assert!(is_irreducible(f.modulus()), "m={m}");
            assert_eq!(degree(f.modulus()), Some(m));
        }
        // search path
        for m in [17, 20] {
            let f = FieldCtx::new(m).unwrap();
            assert!(is_irreducible(f.modulus()));
            assert_eq!(degree(f.modulus()), Some(m));
        }
        assert!(!is_irreducible(0b101)); // x^2+1 = (x+1)^2
        assert!(FieldCtx::with_modulus(3, 0b1001).is_err());
    }

    #[test]
    fn sizing_for_n_100() {
        assert_eq!(FieldPolicy::Wide.bits_for(100).unwrap(), 8);
        assert_eq!(FieldPolicy::Minimal.bits_for(100).unwrap(), 7);
        assert_eq!(FieldPolicy::Minimal.bits_for(63).unwrap(), 7);
        assert_eq!(FieldPolicy::Minimal.bits_for(49).unwrap(), 6);
    }

    #[test]
    fn add_examples() {
        let f = gf8();
        let a = f.element(0b011);
        assert_eq!(f.add(a, a), FieldElement::ZERO);
        assert_eq!(f.add(a, FieldElement::ZERO), a);
        assert_eq!(f.add(a, f.element(0b101)), f.element(0b110));
    }

    #[test]
    fn mul_examples() {
        let f = gf8();
        assert_eq!(f.modulus(), 0b1011);
        assert_eq!(schoolbook(0b010, 0b100, 0b1011), 0b011);
        assert_eq!(f.mul(f.element(0b010), f.element(0b100)), f.element(0b011));
        for a in f.elements() {
            assert_eq!(f.mul(a, FieldElement::ONE), a);
            assert_eq!(f.mul(a, FieldElement::ZERO), FieldElement::ZERO);
        }
    }

    #[test]
    fn mul_matches_schoolbook_exhaustively_up_to_gf256() {
        for m in 2..=8 {
            let f = FieldCtx::new(m).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b).0, schoolbook(a.0, b.0, f.modulus()));
                }
            }
        }
    }

    #[test]
    fn inverse_examples() {
        let f = gf8();
        assert_eq!(f.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
        // exhaustive search oracle
        let a = f.element(0b010);
        let found: Vec<_> = f.elements().filter(|&b| f.mul(a, b) == FieldElement::ONE).collect();
        assert_eq!(found, vec![f.element(0b101)]);
        assert_eq!(f.inv(a).unwrap(), f.element(0b101));
        assert_eq!(f.inv(FieldElement::ZERO), Err(GfError::ZeroInverse));
    }

    #[test]
    fn rank_examples() {
        let f = gf8();
        assert_eq!(Matrix::identity(4).rank(&f), 4);
        assert_eq!(Matrix::zeros(3, 5).rank(&f), 0);
        assert!(Matrix::identity(3).kernel_basis(&f).is_empty());
        assert_eq!(Matrix::zeros(3, 3).kernel_basis(&f).len(), 3);
    }

    #[test]
    fn affine_preimage_examples() {
        let f = gf8();
        let y = vec![f.element(3), f.element(5), f.element(7)];
        let sol = Matrix::identity(3).affine_preimage(&y, &f).unwrap().unwrap();
        assert_eq!(sol.point, y);
        assert_eq!(sol.dim(), 0);
        assert!(Matrix::zeros(2, 2).affine_preimage(&[f.element(1), FieldElement::ZERO], &f).unwrap().is_none());
        assert!(Matrix::identity(2).affine_preimage(&[FieldElement::ONE], &f).is_err());
    }

    #[test]
    fn rank_2x3_preimage_has_eight_points() {
        let f = gf8();
        let m = Matrix::from_rows(vec![
            vec![f.element(1), f.element(2), f.element(3)],
            vec![f.element(0), f.element(5), f.element(6)],
        ])
        .unwrap();
        assert_eq!(m.rank(&f), 2);
        let x = [f.element(4), f.element(1), f.element(7)];
        let y = m.apply(&x, &f).unwrap();
        let sol = m.affine_preimage(&y, &f).unwrap().unwrap();
        // enumerate F^3
        let mut count = 0;
        for a in f.elements() {
            for b in f.elements() {
                for c in f.elements() {
                    if m.apply(&[a, b, c], &f).unwrap() == y {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 8);
        assert_eq!(sol.size(&f), 8);
        assert_eq!(m.apply(&sol.point, &f).unwrap(), y);
    }
}

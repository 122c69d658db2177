//! Binomial coefficients, colexicographic ranks and k-subset iteration.
//!
//! Vertices are 0-based `u32` internally. A sorted subset `s_0 < s_1 < ...`
//! has colex rank `sum_i C(s_i, i + 1)`, which is a bijection between the
//! r-subsets of `[n]` and `0..C(n, r)`.

pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).unwrap_or(u64::MAX)
}

/// Precomputed Pascal triangle rows `0..=n`, columns `0..=k`.
#[derive(Debug, Clone)]
pub struct Binomial {
    k: usize,
    table: Vec<u64>,
}

impl Binomial {
    pub fn new(n: usize, k: usize) -> Binomial {
        let mut table = vec![0u64; (n + 1) * (k + 1)];
        for i in 0..=n {
            for j in 0..=k.min(i) {
                table[i * (k + 1) + j] = binom(i as u64, j as u64);
            }
        }
        Binomial { k, table }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > self.k {
            return binom(n as u64, k as u64);
        }
        self.table.get(n * (self.k + 1) + k).copied().unwrap_or_else(|| binom(n as u64, k as u64))
    }

    #[inline]
    pub fn rank(&self, sorted: &[u32]) -> u64 {
        sorted.iter().enumerate().map(|(i, &v)| self.get(v as usize, i + 1)).sum()
    }

    /// Rank of `sorted` with position `skip` removed.
    #[inline]
    pub fn rank_without(&self, sorted: &[u32], skip: usize) -> u64 {
        let mut r = 0;
        let mut pos = 0;
        for (i, &v) in sorted.iter().enumerate() {
            if i == skip {
                continue;
            }
            pos += 1;
            r += self.get(v as usize, pos);
        }
        r
    }

    pub fn unrank(&self, mut rank: u64, size: usize, out: &mut Vec<u32>) {
        out.clear();
        out.resize(size, 0);
        for i in (0..size).rev() {
            // largest v with C(v, i+1) <= rank
            let mut v = i as u32;
            while self.get(v as usize + 1, i + 1) <= rank {
                v += 1;
            }
            out[i] = v;
            rank -= self.get(v as usize, i + 1);
        }
    }
}

/// Advance `c` (sorted, values < n) to the next r-subset in lexicographic
/// order. Returns false after the last subset.
pub fn next_combination(c: &mut [u32], n: u32) -> bool {
    let r = c.len();
    if r == 0 {
        return false;
    }
    let mut i = r;
    while i > 0 {
        i -= 1;
        if c[i] < n - (r - i) as u32 {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` with every r-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: u32, r: usize, mut f: impl FnMut(&[u32])) {
    if r as u64 > n as u64 {
        return;
    }
    let mut c: Vec<u32> = (0..r as u32).collect();
    loop {
        f(&c);
        if !next_combination(&mut c, n) {
            break;
        }
    }
}

/// Sorted copy of `set` with `skip` removed.
pub fn without(set: &[u32], skip: usize) -> Vec<u32> {
    set.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(7, 3), 35);
        assert_eq!(binom(403, 2), 81_003);
        assert_eq!(binom(3, 5), 0);
        let b = Binomial::new(50, 4);
        assert_eq!(b.get(49, 2), 1176);
    }

    #[test]
    fn rank_is_a_bijection() {
        let b = Binomial::new(9, 3);
        let mut seen = Vec::new();
        for_each_combination(9, 3, |c| seen.push(b.rank(c)));
        seen.sort_unstable();
        assert_eq!(seen, (0..84).collect::<Vec<_>>());
        let mut out = Vec::new();
        for_each_combination(9, 3, |c| {
            b.unrank(b.rank(c), 3, &mut out);
            assert_eq!(out, c);
        });
    }

    #[test]
    fn rank_without_matches_rank() {
        let b = Binomial::new(20, 4);
        let e = [2, 5, 11, 17];
        for skip in 0..4 {
            assert_eq!(b.rank_without(&e, skip), b.rank(&without(&e, skip)));
        }
    }
}

//! Prime-field scalars and row-reduced subspaces of `F_p^n`.

use serde::{Deserialize, Serialize};

/// Returns true when `n` is prime (trial division; inputs here are small).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Reduces a signed integer into `0..p`.
#[inline]
pub fn reduce(x: i64, p: u32) -> u32 {
    x.rem_euclid(p as i64) as u32
}

#[inline]
pub fn add(a: u32, b: u32, p: u32) -> u32 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn mul(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
pub fn neg(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub fn pow(mut a: u32, mut e: u64, p: u32) -> u32 {
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, a, p);
        }
        a = mul(a, a, p);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse; `a` must be nonzero mod `p`.
pub fn inv(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow(a, p as u64 - 2, p)
}

/// `y += c * x` coordinatewise.
#[inline]
pub fn axpy(y: &mut [u32], c: u32, x: &[u32], p: u32) {
    if c == 0 {
        return;
    }
    for (yi, &xi) in y.iter_mut().zip(x) {
        if xi != 0 {
            *yi = ((*yi as u64 + c as u64 * xi as u64) % p as u64) as u32;
        }
    }
}

pub fn is_zero(v: &[u32]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// A subspace of `F_p^n` stored as a reduced row echelon basis.
///
/// Every row has a leading 1 at its pivot column and zeros in the pivot
/// columns of all other rows, so two subspaces are equal iff their rows are.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subspace {
    p: u32,
    n: usize,
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(n: usize, p: u32) -> Self {
        Subspace {
            p,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(n: usize, p: u32) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![0; n];
                r[i] = 1;
                r
            })
            .collect();
        Subspace {
            p,
            n,
            rows,
            pivots: (0..n).collect(),
        }
    }

    pub fn span<I, V>(n: usize, p: u32, vectors: I) -> Self
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[u32]>,
    {
        let mut s = Subspace::zero(n, p);
        for v in vectors {
            if s.is_full() {
                break;
            }
            s.insert(v.as_ref());
        }
        s
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn codim(&self) -> usize {
        self.n - self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.n
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduces `v` in place against the basis; the remainder is zero iff `v` lies in the span.
    pub fn reduce_in_place(&self, v: &mut [u32]) {
        let p = self.p;
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let a = v[c];
            if a != 0 {
                axpy(v, neg(a, p), row, p);
            }
        }
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        assert_eq!(
            v.len(),
            self.n,
            "vector length does not match ambient dimension"
        );
        if self.is_full() {
            return true;
        }
        let mut w = v.to_vec();
        self.reduce_in_place(&mut w);
        is_zero(&w)
    }

    /// Adds `v` to the span. Returns true if the dimension grew.
    pub fn insert(&mut self, v: &[u32]) -> bool {
        assert_eq!(
            v.len(),
            self.n,
            "vector length does not match ambient dimension"
        );
        if self.is_full() {
            return false;
        }
        let p = self.p;
        let mut w: Vec<u32> = v.iter().map(|&x| x % p).collect();
        self.reduce_in_place(&mut w);
        let Some(c) = w.iter().position(|&x| x != 0) else {
            return false;
        };
        let s = inv(w[c], p);
        for x in w.iter_mut() {
            *x = mul(*x, s, p);
        }
        for row in self.rows.iter_mut() {
            let a = row[c];
            if a != 0 {
                axpy(row, neg(a, p), &w, p);
            }
        }
        let at = self.pivots.partition_point(|&q| q < c);
        self.pivots.insert(at, c);
        self.rows.insert(at, w);
        true
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut s = self.clone();
        for r in &other.rows {
            if s.is_full() {
                break;
            }
            s.insert(r);
        }
        s
    }

    /// A basis of the quotient `F_p^n / self`, given by standard vectors on non-pivot columns.
    pub fn complement_basis(&self) -> Vec<Vec<u32>> {
        (0..self.n)
            .filter(|c| self.pivots.binary_search(c).is_err())
            .map(|c| {
                let mut e = vec![0; self.n];
                e[c] = 1;
                e
            })
            .collect()
    }
}

/// Every `k`-dimensional subspace of `F_p^n`, in a fixed order (pivot sets
/// lexicographically, then free entries in base-`p` counting order).
pub fn enumerate_subspaces(n: usize, p: u32, k: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        // free positions: row r, columns after its pivot that are not pivots
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| {
                let pv = &pivots;
                (pv[r] + 1..n)
                    .filter(move |c| !pv.contains(c))
                    .map(move |c| (r, c))
            })
            .collect();
        let total = (p as u64).pow(free.len() as u32);
        for mut idx in 0..total {
            let mut rows: Vec<Vec<u32>> = pivots
                .iter()
                .map(|&c| {
                    let mut v = vec![0; n];
                    v[c] = 1;
                    v
                })
                .collect();
            for &(r, c) in &free {
                rows[r][c] = (idx % p as u64) as u32;
                idx /= p as u64;
            }
            out.push(Subspace {
                p,
                n,
                rows,
                pivots: pivots.clone(),
            });
        }
        // next k-combination of 0..n
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < n - k + i {
                pivots[i] += 1;
                for j in i + 1..k {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Rank of a list of vectors.
pub fn rank<V: AsRef<[u32]>>(n: usize, p: u32, vectors: &[V]) -> usize {
    Subspace::span(n, p, vectors.iter().map(|v| v.as_ref())).dim()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn inverse_round_trip() {
        for p in [2u32, 3, 5, 7, 11, 13] {
            for a in 1..p {
                assert_eq!(mul(a, inv(a, p), p), 1);
            }
        }
    }

    #[test]
    fn span_of_dependent_vectors() {
        let s = Subspace::span(3, 5, [[1, 2, 3], [2, 4, 6], [0, 1, 1]]);
        assert_eq!(s.dim(), 2);
        assert!(s.contains(&[1, 3, 4]));
        assert!(!s.contains(&[0, 0, 1]));
    }

    // Brute force: the span over F_p enumerated as all linear combinations.
    fn enumerate_span(p: u32, vs: &[Vec<u32>], n: usize) -> std::collections::BTreeSet<Vec<u32>> {
        let mut out = std::collections::BTreeSet::new();
        let k = vs.len();
        let total = (p as usize).pow(k as u32);
        for mut idx in 0..total {
            let mut w = vec![0u32; n];
            for v in vs {
                let c = (idx % p as usize) as u32;
                idx /= p as usize;
                axpy(&mut w, c, v, p);
            }
            out.insert(w);
        }
        out
    }

    #[test]
    fn enumerated_subspaces_are_distinct_and_complete() {
        // oracle: canonical spans of all k-tuples of vectors in F_p^n
        for (n, p) in [(3usize, 2u32), (4, 2), (3, 3)] {
            let all: Vec<Vec<u32>> = (0..(p as usize).pow(n as u32))
                .map(|mut x| {
                    (0..n)
                        .map(|_| {
                            let d = (x % p as usize) as u32;
                            x /= p as usize;
                            d
                        })
                        .collect()
                })
                .collect();
            for k in 0..=n {
                let listed = enumerate_subspaces(n, p, k);
                let set: std::collections::BTreeSet<Vec<Vec<u32>>> =
                    listed.iter().map(|s| s.basis().to_vec()).collect();
                assert_eq!(set.len(), listed.len());
                let mut brute = std::collections::BTreeSet::new();
                let mut idx = vec![0usize; k];
                loop {
                    let s = Subspace::span(n, p, idx.iter().map(|&i| &all[i]));
                    if s.dim() == k {
                        brute.insert(s.basis().to_vec());
                    }
                    let mut j = 0;
                    while j < k {
                        idx[j] += 1;
                        if idx[j] < all.len() {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == k {
                        break;
                    }
                }
                assert_eq!(set, brute, "n={n} p={p} k={k}");
            }
        }
    }

    proptest! {
        #[test]
        fn dim_matches_enumerated_span(
            p in prop::sample::select(vec![2u32, 3, 5]),
            raw in prop::collection::vec(prop::collection::vec(0u32..5, 4), 0..4)
        ) {
            let vs: Vec<Vec<u32>> = raw.into_iter().map(|v| v.into_iter().map(|x| x % p).collect()).collect();
            let s = Subspace::span(4, p, &vs);
            let brute = enumerate_span(p, &vs, 4);
            prop_assert_eq!(brute.len(), (p as usize).pow(s.dim() as u32));
            for w in &brute {
                prop_assert!(s.contains(w));
            }
        }

        #[test]
        fn rref_is_canonical(
            raw in prop::collection::vec(prop::collection::vec(0u32..3, 5), 1..5)
        ) {
            let a = Subspace::span(5, 3, &raw);
            let mut rev = raw.clone();
            rev.reverse();
            let b = Subspace::span(5, 3, &rev);
            prop_assert_eq!(a, b);
        }
    }
}

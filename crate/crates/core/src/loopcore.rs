//! Loop algebras `⊕_{n≥1} g_{n mod m} ⊗ t^n` over `F_p`, their `D`-fold powers,
//! cofinite graded subalgebras and the codimension of their commutators.
//!
//! Grade `n` of `L^D` is stored as `D` consecutive blocks of local coordinates of
//! `g_{n mod m}` (copy-major).

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chevalley::{
    is_perfect, twisted_graded_algebra, BracketEntry, ChevalleyError, FpLieAlgebra,
    GradedLieAlgebra,
};
use crate::fp::{self, Subspace};
use crate::rootsys::{build_root_datum, CartanType};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoopError {
    #[error("the graded algebra is not perfect; pass an explicit truncation grade")]
    NotPerfect,
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("prime mismatch: algebra over F_{expected}, subspace over F_{got}")]
    PrimeMismatch { expected: u32, got: u32 },
    #[error("not a subalgebra: [h_{i}, h_{j}] is not contained in h_{}", i + j)]
    NotClosed { i: usize, j: usize },
    #[error("sweep too large: {0}")]
    TooLarge(String),
    #[error("unknown algebra label {0:?}")]
    UnknownAlgebra(String),
    #[error(transparent)]
    Chevalley(#[from] ChevalleyError),
}

/// Graded algebra from a label: a Cartan type (`A1`, `G2`, ...) for the untwisted
/// algebra, or a twist prefix (`2A2`, `3D4`, `2BC1`) for the automorphism grading.
pub fn ghat_from_label(label: &str, p: u32) -> Result<GradedLieAlgebra, LoopError> {
    let bad = || LoopError::UnknownAlgebra(label.to_string());
    let (r, rest) = match label.chars().next() {
        Some(c @ '2'..='3') => (c.to_digit(10).unwrap(), &label[1..]),
        _ => (1, label),
    };
    let t: CartanType = rest.parse().map_err(|_| bad())?;
    let rd = build_root_datum(t).map_err(|_| bad())?;
    if r == 1 {
        if !rd.is_reduced() {
            return Err(bad());
        }
        return Ok(GradedLieAlgebra::trivial(
            crate::chevalley::chevalley_algebra(&rd, p)?,
        ));
    }
    Ok(twisted_graded_algebra(&rd, r, p)?)
}

/// Like [`ghat_from_label`] but for any prime: integral structure constants reduced
/// mod `p`, without the perfectness guarantees of large characteristic.
pub fn ghat_any_characteristic(label: &str, p: u32) -> Result<GradedLieAlgebra, LoopError> {
    let bad = || LoopError::UnknownAlgebra(label.to_string());
    if !fp::is_prime(p as u64) {
        return Err(ChevalleyError::BadCharacteristic {
            p,
            reason: "not a prime".into(),
        }
        .into());
    }
    let (r, rest) = match label.chars().next() {
        Some(c @ '2'..='3') => (c.to_digit(10).unwrap(), &label[1..]),
        _ => (1, label),
    };
    let t: CartanType = rest.parse().map_err(|_| bad())?;
    let rd = build_root_datum(t).map_err(|_| bad())?;
    if r == 1 {
        if !rd.is_reduced() {
            return Err(bad());
        }
        return Ok(GradedLieAlgebra::trivial(
            crate::chevalley::chevalley_integral(&rd)?.reduce(p),
        ));
    }
    let ad = crate::rootsys::build_affine_datum(&rd, r).map_err(|_| bad())?;
    let real = crate::chevalley::twisted_realization(&ad)?;
    Ok(crate::chevalley::graded_from_realization(&real, p))
}

/// `L^D` for a Z/m-graded algebra.
#[derive(Debug)]
pub struct LoopAlgebra {
    ghat: GradedLieAlgebra,
    copies: usize,
    comp_dim: Vec<usize>,
    // [a*m+b][x*db+y] -> (local index in g_{a+b}, coefficient)
    local: Vec<Vec<Vec<(u32, u32)>>>,
    // span of [g_a, g_b] inside g_{a+b}
    pair_span: Vec<Subspace>,
    // cover[k][mask]: the pairs (a, k-a) with a in mask already span g_k
    cover: Vec<Vec<bool>>,
    perfect: bool,
}

impl LoopAlgebra {
    pub fn new(ghat: GradedLieAlgebra, copies: usize) -> Arc<Self> {
        let m = ghat.modulus();
        let p = ghat.prime();
        let comp_dim = ghat.component_dims();
        let mut local = Vec::with_capacity(m * m);
        let mut pair_span = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                let k = (a + b) % m;
                let (ca, cb) = (ghat.component(a), ghat.component(b));
                let mut t = Vec::with_capacity(ca.len() * cb.len());
                let mut span = Subspace::zero(comp_dim[k], p);
                for &x in ca {
                    for &y in cb {
                        let v: Vec<(u32, u32)> = ghat
                            .algebra
                            .bracket_basis(x, y)
                            .iter()
                            .map(|&(z, c)| (ghat.local_index(z as usize, k) as u32, c))
                            .collect();
                        if !v.is_empty() {
                            let mut w = vec![0; comp_dim[k]];
                            for &(z, c) in &v {
                                w[z as usize] = c;
                            }
                            span.insert(&w);
                        }
                        t.push(v);
                    }
                }
                local.push(t);
                pair_span.push(span);
            }
        }
        let cover = (0..m)
            .map(|k| {
                (0..1usize << m)
                    .map(|mask| {
                        let mut s = Subspace::zero(comp_dim[k], p);
                        for a in (0..m).filter(|a| mask >> a & 1 == 1) {
                            s = s.sum(&pair_span[a * m + (k + m - a) % m]);
                        }
                        s.is_full()
                    })
                    .collect()
            })
            .collect();
        let perfect = is_perfect(&ghat).perfect;
        Arc::new(LoopAlgebra {
            ghat,
            copies,
            comp_dim,
            local,
            pair_span,
            cover,
            perfect,
        })
    }

    pub fn ghat(&self) -> &GradedLieAlgebra {
        &self.ghat
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn modulus(&self) -> usize {
        self.ghat.modulus()
    }

    pub fn prime(&self) -> u32 {
        self.ghat.prime()
    }

    pub fn is_perfect(&self) -> bool {
        self.perfect
    }

    /// Dimension of grade `n`, that is `D * dim g_{n mod m}`.
    pub fn grade_dim(&self, n: usize) -> usize {
        self.comp_dim[n % self.modulus()] * self.copies
    }

    /// `C = 4 m dim ĝ`.
    pub fn bound_constant(&self) -> usize {
        4 * self.modulus() * self.ghat.dim()
    }

    /// `out += [u, v]` for `u` in grade `i` and `v` in grade `j`.
    pub fn bracket_acc(&self, i: usize, u: &[u32], j: usize, v: &[u32], out: &mut [u32]) {
        let m = self.modulus();
        let p = self.prime() as u64;
        let (a, b) = (i % m, j % m);
        let (da, db, dk) = (
            self.comp_dim[a],
            self.comp_dim[b],
            self.comp_dim[(a + b) % m],
        );
        let t = &self.local[a * m + b];
        for c in 0..self.copies {
            let uc = &u[c * da..(c + 1) * da];
            let vc = &v[c * db..(c + 1) * db];
            let oc = &mut out[c * dk..(c + 1) * dk];
            for (x, &ux) in uc.iter().enumerate() {
                if ux == 0 {
                    continue;
                }
                for (y, &vy) in vc.iter().enumerate() {
                    if vy == 0 {
                        continue;
                    }
                    let s = ux as u64 * vy as u64 % p;
                    for &(z, w) in &t[x * db + y] {
                        let z = z as usize;
                        oc[z] = ((oc[z] as u64 + s * w as u64) % p) as u32;
                    }
                }
            }
        }
    }

    pub fn bracket(&self, i: usize, u: &[u32], j: usize, v: &[u32]) -> Vec<u32> {
        let mut out = vec![0; self.grade_dim(i + j)];
        self.bracket_acc(i, u, j, v, &mut out);
        out
    }
}

fn units(n: usize) -> Vec<Vec<u32>> {
    (0..n)
        .map(|i| {
            let mut e = vec![0; n];
            e[i] = 1;
            e
        })
        .collect()
}

/// Graded subspace of `L^D` given explicitly in grades `1..=N0` and full above.
#[derive(Clone, Debug)]
pub struct CofiniteSubalgebra {
    parent: Arc<LoopAlgebra>,
    grades: Vec<Subspace>,
}

impl CofiniteSubalgebra {
    pub fn whole(parent: &Arc<LoopAlgebra>) -> Self {
        CofiniteSubalgebra {
            parent: parent.clone(),
            grades: Vec::new(),
        }
    }

    /// Validates ambient dimensions and closure `[h_i, h_j] ⊆ h_{i+j}`.
    pub fn new(parent: &Arc<LoopAlgebra>, grades: Vec<Subspace>) -> Result<Self, LoopError> {
        let h = Self::new_unchecked(parent, grades)?;
        if let Some((i, j)) = h.closure_violation() {
            return Err(LoopError::NotClosed { i, j });
        }
        Ok(h)
    }

    /// Checks dimensions only; the caller vouches for closure.
    pub fn new_unchecked(
        parent: &Arc<LoopAlgebra>,
        grades: Vec<Subspace>,
    ) -> Result<Self, LoopError> {
        for (k, s) in grades.iter().enumerate() {
            if s.prime() != parent.prime() {
                return Err(LoopError::PrimeMismatch {
                    expected: parent.prime(),
                    got: s.prime(),
                });
            }
            let n = k + 1;
            if s.ambient_dim() != parent.grade_dim(n) {
                return Err(LoopError::DimensionMismatch {
                    what: format!("grade {n}"),
                    expected: parent.grade_dim(n),
                    got: s.ambient_dim(),
                });
            }
        }
        Ok(CofiniteSubalgebra {
            parent: parent.clone(),
            grades,
        })
    }

    pub fn parent(&self) -> &Arc<LoopAlgebra> {
        &self.parent
    }

    pub fn n0(&self) -> usize {
        self.grades.len()
    }

    /// `None` means the full grade.
    pub fn grade(&self, n: usize) -> Option<&Subspace> {
        if n >= 1 && n <= self.n0() {
            Some(&self.grades[n - 1])
        } else {
            None
        }
    }

    pub fn grades(&self) -> &[Subspace] {
        &self.grades
    }

    pub fn basis(&self, n: usize) -> Vec<Vec<u32>> {
        match self.grade(n) {
            Some(s) => s.basis().to_vec(),
            None => units(self.parent.grade_dim(n)),
        }
    }

    pub fn contains(&self, n: usize, v: &[u32]) -> bool {
        self.grade(n).is_none_or(|s| s.contains(v))
    }

    pub fn codim(&self) -> usize {
        self.grades.iter().map(|s| s.codim()).sum()
    }

    /// Codimension from one flattened subspace of grades `1..=N0` (cross-check of [`codim`](Self::codim)).
    pub fn codim_flattened(&self) -> usize {
        let dims: Vec<usize> = (1..=self.n0()).map(|n| self.parent.grade_dim(n)).collect();
        let total: usize = dims.iter().sum();
        let mut flat = Subspace::zero(total, self.parent.prime());
        let mut off = 0;
        for (k, s) in self.grades.iter().enumerate() {
            for r in s.basis() {
                let mut v = vec![0; total];
                v[off..off + dims[k]].copy_from_slice(r);
                flat.insert(&v);
            }
            off += dims[k];
        }
        flat.codim()
    }

    /// Drops trailing full grades.
    pub fn trimmed(mut self) -> Self {
        while self.grades.last().is_some_and(|s| s.is_full()) {
            self.grades.pop();
        }
        self
    }

    pub fn closure_violation(&self) -> Option<(usize, usize)> {
        let n0 = self.n0();
        for n in 2..=n0 {
            for i in 1..=n / 2 {
                let j = n - i;
                let (bi, bj) = (self.basis(i), self.basis(j));
                for u in &bi {
                    for v in &bj {
                        if !self.contains(n, &self.parent.bracket(i, u, j, v)) {
                            return Some((i, j));
                        }
                    }
                }
            }
        }
        None
    }

    /// Grade-wise containment `self_n ⊆ other_n` for every `n`.
    pub fn is_contained_in(&self, other: &CofiniteSubalgebra) -> bool {
        let top = self.n0().max(other.n0());
        (1..=top).all(|n| match (self.grade(n), other.grade(n)) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => b.contains_subspace(a),
        })
    }
}

/// `2m(N0 + 2)`: every grade of `[h, h]` above this is full when `ĝ` is perfect.
pub fn stabilization_bound(m: usize, n0: usize) -> usize {
    2 * m * (n0 + 2)
}

/// Grade `n` of `[h, h]`.
///
/// With `shortcuts`, pairs `[g_i, g_j]` with both factors full are taken from the
/// precomputed spans, and the grade is declared full as soon as those spans cover it.
pub fn commutator_grade(h: &CofiniteSubalgebra, n: usize, shortcuts: bool) -> Subspace {
    let l = &h.parent;
    let p = l.prime();
    let m = l.modulus();
    let dim = l.grade_dim(n);
    let mut s = Subspace::zero(dim, p);
    if n < 2 || dim == 0 {
        return s;
    }
    let n0 = h.n0();
    if shortcuts {
        let mut mask = 0usize;
        let mut i = n0 + 1;
        while i + n0 < n && i <= n0 + m {
            mask |= 1 << (i % m);
            i += 1;
        }
        let k = n % m;
        if l.cover[k][mask] {
            return Subspace::full(dim, p);
        }
        let dk = l.comp_dim[k];
        for a in (0..m).filter(|a| mask >> a & 1 == 1) {
            for w in l.pair_span[a * m + (k + m - a) % m].basis() {
                for c in 0..l.copies {
                    let mut v = vec![0; dim];
                    v[c * dk..(c + 1) * dk].copy_from_slice(w);
                    s.insert(&v);
                }
            }
        }
    }
    let mut out = vec![0u32; dim];
    for i in 1..=n / 2 {
        let j = n - i;
        if shortcuts && i > n0 {
            break;
        }
        let bi = h.basis(i);
        let bj = if i == j { bi.clone() } else { h.basis(j) };
        for (x, u) in bi.iter().enumerate() {
            let start = if i == j { x + 1 } else { 0 };
            for v in &bj[start..] {
                if s.is_full() {
                    return s;
                }
                out.iter_mut().for_each(|z| *z = 0);
                l.bracket_acc(i, u, j, v, &mut out);
                if !fp::is_zero(&out) {
                    s.insert(&out);
                }
            }
        }
    }
    s
}

/// Explicit grades `1..=top` of `[h, h]`, with no claim about grades above `top`.
pub fn commutator_truncated(h: &CofiniteSubalgebra, top: usize) -> Vec<Subspace> {
    (1..=top)
        .map(|n| commutator_grade(h, n, h.parent.perfect))
        .collect()
}

/// `[h, h]` as a cofinite subalgebra; needs `ĝ` perfect so that high grades are full.
pub fn commutator_subalgebra(h: &CofiniteSubalgebra) -> Result<CofiniteSubalgebra, LoopError> {
    if !h.parent.perfect {
        return Err(LoopError::NotPerfect);
    }
    let top = stabilization_bound(h.parent.modulus(), h.n0());
    let grades = commutator_truncated(h, top);
    Ok(CofiniteSubalgebra {
        parent: h.parent.clone(),
        grades,
    }
    .trimmed())
}

/// Recomputes `[h, h]` without shortcuts on grades up to `2m` past the stabilization
/// bound and checks that the grades above the bound are full.
pub fn verify_stabilization(h: &CofiniteSubalgebra) -> bool {
    let m = h.parent.modulus();
    let b = stabilization_bound(m, h.n0());
    (b + 1..=b + 2 * m).all(|n| commutator_grade(h, n, false).is_full())
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GradedBoundReport {
    pub m: usize,
    pub dim_ghat: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "N0")]
    pub n0: usize,
    pub codim_h: usize,
    pub lhs: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub rhs: usize,
    pub holds: bool,
}

/// `codim [h, h] <= C (codim h + D)` with `C = 4 m dim ĝ`.
pub fn check_graded_lie_bound(h: &CofiniteSubalgebra) -> Result<GradedBoundReport, LoopError> {
    let comm = commutator_subalgebra(h)?;
    let l = &h.parent;
    let lhs = comm.codim();
    let c = l.bound_constant();
    let rhs = c * (h.codim() + l.copies);
    Ok(GradedBoundReport {
        m: l.modulus(),
        dim_ghat: l.ghat.dim(),
        d: l.copies,
        n0: h.n0(),
        codim_h: h.codim(),
        lhs,
        c,
        rhs,
        holds: lhs <= rhs,
    })
}

/// A random subspace in each grade `1..=n0`, then closed under brackets.
///
/// Grades are closed in increasing order; grade `n` only receives brackets from
/// lower grades, so one pass reaches the fixpoint.
pub fn random_cofinite_subalgebra<R: Rng>(
    parent: &Arc<LoopAlgebra>,
    n0: usize,
    rng: &mut R,
) -> CofiniteSubalgebra {
    let p = parent.prime();
    let mut h = CofiniteSubalgebra::whole(parent);
    for n in 1..=n0 {
        let dim = parent.grade_dim(n);
        let k = rng.gen_range(0..=dim);
        let mut s = Subspace::zero(dim, p);
        for _ in 0..k {
            let v: Vec<u32> = (0..dim).map(|_| rng.gen_range(0..p)).collect();
            s.insert(&v);
        }
        for i in 1..=n / 2 {
            let j = n - i;
            let (bi, bj) = (h.basis(i), h.basis(j));
            for u in &bi {
                for v in &bj {
                    if s.is_full() {
                        break;
                    }
                    s.insert(&parent.bracket(i, u, j, v));
                }
            }
        }
        h.grades.push(s);
    }
    h
}

/// One line of a randomized bound run.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TrialReport {
    pub seed: u64,
    pub ghat: String,
    pub m: usize,
    #[serde(rename = "D")]
    pub d: usize,
    #[serde(rename = "N0")]
    pub n0: usize,
    pub codim_h: usize,
    pub codim_comm: usize,
    #[serde(rename = "C")]
    pub c: usize,
    pub holds: bool,
}

/// Runs `trials` random subalgebras; trial `i` draws from ChaCha8 seeded with
/// `base_seed + i` and uses `N0` uniform in `1..=max_n0`. Output is in trial order.
pub fn run_bound_trials(
    parent: &Arc<LoopAlgebra>,
    label: &str,
    trials: usize,
    base_seed: u64,
    max_n0: usize,
) -> Vec<TrialReport> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n0 = rng.gen_range(1..=max_n0.max(1));
            let h = random_cofinite_subalgebra(parent, n0, &mut rng);
            let r = check_graded_lie_bound(&h).expect("trial algebra must be perfect");
            TrialReport {
                seed,
                ghat: label.to_string(),
                m: r.m,
                d: r.d,
                n0: r.n0,
                codim_h: r.codim_h,
                codim_comm: r.lhs,
                c: r.c,
                holds: r.holds,
            }
        })
        .collect()
}

pub fn to_json_lines<T: Serialize>(rows: &[T]) -> String {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).expect("serializable"));
        s.push('\n');
    }
    s
}

/// A bilinear map `g0 x g1 -> W`, `W` containing `[g0, g1]`.
#[derive(Clone, Debug)]
pub struct BilinearBracket {
    pub p: u32,
    pub dim0: usize,
    pub dim1: usize,
    pub dim_out: usize,
    table: Vec<Vec<(usize, u32)>>,
}

impl BilinearBracket {
    /// `g0 = g1 = W = g`.
    pub fn from_lie(g: &FpLieAlgebra) -> Self {
        let d = g.dim();
        let table = (0..d * d)
            .map(|ij| {
                g.bracket_basis(ij / d, ij % d)
                    .iter()
                    .map(|&(k, c)| (k as usize, c))
                    .collect()
            })
            .collect();
        BilinearBracket {
            p: g.prime(),
            dim0: d,
            dim1: d,
            dim_out: d,
            table,
        }
    }

    /// `g_a x g_b -> g_{a+b}` of a graded algebra.
    pub fn from_components(g: &GradedLieAlgebra, a: usize, b: usize) -> Self {
        let l = LoopAlgebra::new(g.clone(), 1);
        let m = g.modulus();
        let (a, b) = (a % m, b % m);
        let table = l.local[a * m + b]
            .iter()
            .map(|v| v.iter().map(|&(k, c)| (k as usize, c)).collect())
            .collect();
        BilinearBracket {
            p: g.prime(),
            dim0: l.comp_dim[a],
            dim1: l.comp_dim[b],
            dim_out: l.comp_dim[(a + b) % m],
            table,
        }
    }

    /// Small test brackets by name: `sl2`, `heisenberg` (`[x,y] = z`), `affine2`
    /// (`[x,y] = y`), and `2A2:g0g1` (`g0 x g1 -> g1` of twisted `A2`).
    pub fn named(name: &str, p: u32) -> Result<Self, LoopError> {
        let lie = |br: &[BracketEntry<i64>], dim: usize| {
            FpLieAlgebra::from_brackets(p, (0..dim).map(|i| format!("e{i}")).collect(), br)
        };
        match name {
            "sl2" => Ok(Self::from_lie(&ghat_any_characteristic("A1", p)?.algebra)),
            "heisenberg" => Ok(Self::from_lie(&lie(&[(0, 1, vec![(2, 1)])], 3))),
            "affine2" => Ok(Self::from_lie(&lie(&[(0, 1, vec![(1, 1)])], 2))),
            "2A2:g0g1" => Ok(Self::from_components(
                &ghat_any_characteristic("2A2", p)?,
                0,
                1,
            )),
            _ => Err(LoopError::UnknownAlgebra(name.to_string())),
        }
    }

    /// `[u, v]` on `D` copies.
    pub fn apply(&self, d: usize, u: &[u32], v: &[u32]) -> Vec<u32> {
        let p = self.p as u64;
        let mut out = vec![0u32; self.dim_out * d];
        for c in 0..d {
            for x in 0..self.dim0 {
                let ux = u[c * self.dim0 + x];
                if ux == 0 {
                    continue;
                }
                for y in 0..self.dim1 {
                    let vy = v[c * self.dim1 + y];
                    if vy == 0 {
                        continue;
                    }
                    for &(k, w) in &self.table[x * self.dim1 + y] {
                        let o = &mut out[c * self.dim_out + k];
                        *o = ((*o as u64 + ux as u64 * vy as u64 % p * w as u64) % p) as u32;
                    }
                }
            }
        }
        out
    }

    /// `dim [g0, g1]`.
    pub fn image_dim(&self) -> usize {
        let mut s = Subspace::zero(self.dim_out, self.p);
        for v in &self.table {
            let mut w = vec![0; self.dim_out];
            for &(k, c) in v {
                w[k] = c;
            }
            s.insert(&w);
        }
        s.dim()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TwoSubspaceReport {
    #[serde(rename = "D")]
    pub d: usize,
    pub codim_u: usize,
    pub codim_v: usize,
    pub dim_uv: usize,
    pub lhs: usize,
    pub rhs: usize,
    pub holds: bool,
}

/// `codim_{[g0,g1]^D} [U, V] <= dim(g1) codim U + dim[g0,g1] codim V` for `U ⊆ g0^D`, `V ⊆ g1^D`
/// given by spanning vectors.
pub fn check_two_subspace_bound(
    br: &BilinearBracket,
    u: &[Vec<u32>],
    v: &[Vec<u32>],
    d: usize,
) -> Result<TwoSubspaceReport, LoopError> {
    for (what, vs, n) in [("U", u, br.dim0 * d), ("V", v, br.dim1 * d)] {
        if let Some(bad) = vs.iter().find(|x| x.len() != n) {
            return Err(LoopError::DimensionMismatch {
                what: what.into(),
                expected: n,
                got: bad.len(),
            });
        }
    }
    let su = Subspace::span(br.dim0 * d, br.p, u);
    let sv = Subspace::span(br.dim1 * d, br.p, v);
    let mut uv = Subspace::zero(br.dim_out * d, br.p);
    for a in su.basis() {
        for b in sv.basis() {
            uv.insert(&br.apply(d, a, b));
        }
    }
    let img = br.image_dim();
    let lhs = img * d - uv.dim();
    let rhs = br.dim1 * su.codim() + img * sv.codim();
    Ok(TwoSubspaceReport {
        d,
        codim_u: su.codim(),
        codim_v: sv.codim(),
        dim_uv: uv.dim(),
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Bases of `U` and `V`.
pub type SubspacePair = (Vec<Vec<u32>>, Vec<Vec<u32>>);

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SweepReport {
    pub p: u32,
    #[serde(rename = "D")]
    pub d: usize,
    pub dim0: usize,
    pub dim1: usize,
    pub max_codim: usize,
    pub subspaces_u: usize,
    pub subspaces_v: usize,
    pub pairs: u64,
    pub violations: u64,
    /// Largest `lhs - rhs` seen (negative when the bound has slack everywhere).
    pub worst_margin: i64,
    pub counterexample: Option<SubspacePair>,
}

/// Vectors of `F_p^n` coded as base-`p` integers, with arithmetic by table lookup.
struct CodeSpace {
    p: u32,
    n: usize,
    size: usize,
    digit: Vec<u8>,
    lead: Vec<(u8, u8)>,
    scale: Vec<u16>,
    sub: Vec<u16>,
}

impl CodeSpace {
    fn new(n: usize, p: u32) -> Self {
        let size = (p as usize).pow(n as u32);
        let digits = |c: usize| -> Vec<u32> {
            let mut c = c;
            (0..n)
                .map(|_| {
                    let d = (c % p as usize) as u32;
                    c /= p as usize;
                    d
                })
                .collect()
        };
        let all: Vec<Vec<u32>> = (0..size).map(digits).collect();
        let mut cs = CodeSpace {
            p,
            n,
            size,
            digit: Vec::with_capacity(size * n),
            lead: Vec::with_capacity(size),
            scale: vec![0; p as usize * size],
            sub: vec![0; size * size],
        };
        for v in &all {
            cs.digit.extend(v.iter().map(|&d| d as u8));
            let l = v
                .iter()
                .position(|&d| d != 0)
                .map_or((u8::MAX, 0), |i| (i as u8, v[i] as u8));
            cs.lead.push(l);
        }
        for c in 0..p {
            for (x, v) in all.iter().enumerate() {
                cs.scale[c as usize * size + x] =
                    cs.encode(&v.iter().map(|&d| fp::mul(d, c, p)).collect::<Vec<_>>());
            }
        }
        for (x, v) in all.iter().enumerate() {
            for (y, w) in all.iter().enumerate() {
                cs.sub[x * size + y] = cs.encode(
                    &v.iter()
                        .zip(w)
                        .map(|(&a, &b)| fp::sub(a, b, p))
                        .collect::<Vec<_>>(),
                );
            }
        }
        cs
    }

    fn encode(&self, v: &[u32]) -> u16 {
        v.iter()
            .rev()
            .fold(0usize, |acc, &d| acc * self.p as usize + d as usize) as u16
    }

    fn decode(&self, c: u16) -> Vec<u32> {
        self.digit[c as usize * self.n..(c as usize + 1) * self.n]
            .iter()
            .map(|&d| d as u32)
            .collect()
    }

    /// Rank of the vectors yielded, stopping once `cap` is reached.
    fn rank_capped(&self, vs: impl Iterator<Item = u16>, cap: usize) -> usize {
        let mut rows: Vec<(usize, u16)> = Vec::with_capacity(self.n);
        let inv: Vec<u32> = (0..self.p)
            .map(|a| if a == 0 { 0 } else { fp::inv(a, self.p) })
            .collect();
        for mut w in vs {
            if w == 0 {
                continue;
            }
            for &(piv, r) in &rows {
                let c = self.digit[w as usize * self.n + piv];
                if c != 0 {
                    w = self.sub[w as usize * self.size
                        + self.scale[c as usize * self.size + r as usize] as usize];
                }
            }
            if w != 0 {
                let (piv, c) = self.lead[w as usize];
                let w = self.scale[inv[c as usize] as usize * self.size + w as usize];
                rows.push((piv as usize, w));
                if rows.len() >= cap {
                    break;
                }
            }
        }
        rows.len()
    }
}

const SWEEP_CODE_LIMIT: usize = 1024;

/// Every pair `U ⊆ g0^D`, `V ⊆ g1^D` with codimension at most `max_codim`, checked
/// against the two-subspace bound.
pub fn two_subspace_sweep(
    br: &BilinearBracket,
    d: usize,
    max_codim: usize,
) -> Result<SweepReport, LoopError> {
    let p = br.p;
    let (n0, n1, nout) = (br.dim0 * d, br.dim1 * d, br.dim_out * d);
    for n in [n0, n1, nout] {
        let size = (p as usize).checked_pow(n as u32).unwrap_or(usize::MAX);
        if size > SWEEP_CODE_LIMIT {
            return Err(LoopError::TooLarge(format!(
                "F_{p}^{n} has {size} vectors, limit {SWEEP_CODE_LIMIT}"
            )));
        }
    }
    let c0 = CodeSpace::new(n0, p);
    let c1 = CodeSpace::new(n1, p);
    let co = CodeSpace::new(nout, p);
    let mut table = vec![0u16; c0.size * c1.size];
    for x in 0..c0.size {
        let u = c0.decode(x as u16);
        for y in 0..c1.size {
            table[x * c1.size + y] = co.encode(&br.apply(d, &u, &c1.decode(y as u16)));
        }
    }
    let img = br.image_dim();
    let target = img * d;
    let listing = |c: &CodeSpace, n: usize| -> Vec<(usize, Vec<u16>)> {
        (0..=max_codim.min(n))
            .flat_map(|k| {
                fp::enumerate_subspaces(n, p, n - k)
                    .into_iter()
                    .map(move |s| {
                        (
                            k,
                            s.basis().iter().map(|r| c.encode(r)).collect::<Vec<u16>>(),
                        )
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let table = &table;
    let s1 = c1.size;
    let us = listing(&c0, n0);
    let vs = listing(&c1, n1);
    let per_u: Vec<(u64, i64, Option<usize>)> = us
        .par_iter()
        .map(|(ku, bu)| {
            let mut viol = 0u64;
            let mut worst = i64::MIN;
            let mut first = None;
            for (vi, (kv, bv)) in vs.iter().enumerate() {
                let r = co.rank_capped(
                    bu.iter().flat_map(|&a| {
                        bv.iter().map(move |&b| table[a as usize * s1 + b as usize])
                    }),
                    target,
                );
                let lhs = (target - r) as i64;
                let rhs = (br.dim1 * ku + img * kv) as i64;
                worst = worst.max(lhs - rhs);
                if lhs > rhs {
                    viol += 1;
                    first.get_or_insert(vi);
                }
            }
            (viol, worst, first)
        })
        .collect();
    let violations = per_u.iter().map(|x| x.0).sum();
    let worst_margin = per_u.iter().map(|x| x.1).max().unwrap_or(i64::MIN);
    let counterexample = per_u.iter().enumerate().find_map(|(ui, x)| {
        x.2.map(|vi| {
            (
                us[ui].1.iter().map(|&c| c0.decode(c)).collect(),
                vs[vi].1.iter().map(|&c| c1.decode(c)).collect(),
            )
        })
    });
    Ok(SweepReport {
        p,
        d,
        dim0: br.dim0,
        dim1: br.dim1,
        max_codim,
        subspaces_u: us.len(),
        subspaces_v: vs.len(),
        pairs: (us.len() * vs.len()) as u64,
        violations,
        worst_margin,
        counterexample,
    })
}

/// Element of `L^D` with finitely many nonzero grades.
pub type GradedElement = BTreeMap<usize, Vec<u32>>;

/// Leading-term spaces of a subalgebra on grades `1..=window`.
#[derive(Clone, Debug)]
pub struct LeadingTermAlgebra {
    pub window: usize,
    pub grades: Vec<Subspace>,
    /// Dimension of the generated subalgebra modulo grades above the window.
    pub truncated_dim: usize,
}

impl LeadingTermAlgebra {
    pub fn codim_on_window(&self) -> usize {
        self.grades.iter().map(|s| s.codim()).sum()
    }
}

/// Leading terms (lowest nonzero grade components) of the subalgebra generated by
/// `generators`, computed in the quotient by the ideal of grades above `window`.
pub fn leading_terms(
    generators: &[GradedElement],
    parent: &Arc<LoopAlgebra>,
    window: usize,
) -> Result<LeadingTermAlgebra, LoopError> {
    let p = parent.prime();
    let dims: Vec<usize> = (1..=window).map(|n| parent.grade_dim(n)).collect();
    let offs: Vec<usize> = dims
        .iter()
        .scan(0, |acc, &d| {
            let o = *acc;
            *acc += d;
            Some(o)
        })
        .collect();
    let total: usize = dims.iter().sum();
    let flatten = |g: &GradedElement| -> Result<Vec<u32>, LoopError> {
        let mut v = vec![0; total];
        for (&n, comp) in g {
            if n == 0 {
                return Err(LoopError::DimensionMismatch {
                    what: "grade 0 is not part of the loop algebra".into(),
                    expected: 1,
                    got: 0,
                });
            }
            if n > window {
                continue;
            }
            if comp.len() != dims[n - 1] {
                return Err(LoopError::DimensionMismatch {
                    what: format!("generator grade {n}"),
                    expected: dims[n - 1],
                    got: comp.len(),
                });
            }
            v[offs[n - 1]..offs[n - 1] + dims[n - 1]].copy_from_slice(comp);
        }
        Ok(v)
    };
    let bracket_flat = |u: &[u32], v: &[u32]| -> Vec<u32> {
        let mut out = vec![0; total];
        for i in 1..=window {
            let ui = &u[offs[i - 1]..offs[i - 1] + dims[i - 1]];
            if fp::is_zero(ui) {
                continue;
            }
            for j in 1..=window - i {
                let vj = &v[offs[j - 1]..offs[j - 1] + dims[j - 1]];
                if fp::is_zero(vj) {
                    continue;
                }
                let k = i + j;
                parent.bracket_acc(
                    i,
                    ui,
                    j,
                    vj,
                    &mut out[offs[k - 1]..offs[k - 1] + dims[k - 1]],
                );
            }
        }
        out
    };
    let mut span = Subspace::zero(total, p);
    let mut elems: Vec<Vec<u32>> = Vec::new();
    for g in generators {
        let v = flatten(g)?;
        if span.insert(&v) {
            elems.push(v);
        }
    }
    let mut next = 0;
    while next < elems.len() {
        let x = elems[next].clone();
        let new: Vec<_> = elems[..next].iter().map(|y| bracket_flat(&x, y)).collect();
        for b in new {
            if span.insert(&b) {
                elems.push(b);
            }
        }
        next += 1;
    }
    let mut grades: Vec<Subspace> = dims.iter().map(|&d| Subspace::zero(d, p)).collect();
    for (row, &piv) in span.basis().iter().zip(span.pivots()) {
        let n = offs.partition_point(|&o| o <= piv);
        grades[n - 1].insert(&row[offs[n - 1]..offs[n - 1] + dims[n - 1]]);
    }
    Ok(LeadingTermAlgebra {
        window,
        grades,
        truncated_dim: span.dim(),
    })
}

/// `ĝ ⊗ F_{p^2}` viewed over `F_p`, with `F_{p^2} = F_p[s]/(s^2 - ν)` for the least
/// non-residue `ν`. Basis: `e_i` then `s e_i`, grades copied.
pub fn quadratic_extension(g: &GradedLieAlgebra) -> GradedLieAlgebra {
    let p = g.prime();
    let nu = (2..p)
        .find(|&a| fp::pow(a, ((p - 1) / 2) as u64, p) == p - 1)
        .expect("odd prime");
    let d = g.dim();
    let mut labels: Vec<String> = g.algebra.labels().to_vec();
    labels.extend(g.algebra.labels().iter().map(|l| format!("s*{l}")));
    let mut brackets = Vec::new();
    for i in 0..2 * d {
        for j in i + 1..2 * d {
            let (a, x) = (i / d, i % d);
            let (b, y) = (j / d, j % d);
            let e = a + b;
            let (shift, scale) = match e {
                0 => (0, 1),
                1 => (d, 1),
                _ => (0, nu),
            };
            let v: Vec<(usize, i64)> = g
                .algebra
                .bracket_basis(x, y)
                .iter()
                .map(|&(k, c)| (k as usize + shift, fp::mul(c, scale, p) as i64))
                .collect();
            if !v.is_empty() {
                brackets.push((i, j, v));
            }
        }
    }
    let alg = FpLieAlgebra::from_brackets(p, labels, &brackets);
    let grades = (0..2 * d).map(|i| g.grade_of(i % d)).collect();
    GradedLieAlgebra::new(alg, g.modulus(), grades)
}

/// `h ⊗ F_{p^2}` inside the loop algebra of [`quadratic_extension`].
pub fn extend_subalgebra(h: &CofiniteSubalgebra, ext: &Arc<LoopAlgebra>) -> CofiniteSubalgebra {
    let base = h.parent();
    let grades = h
        .grades()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let n = k + 1;
            let da = base.grade_dim(n) / base.copies().max(1);
            let mut t = Subspace::zero(ext.grade_dim(n), ext.prime());
            for r in s.basis() {
                for part in 0..2 {
                    let mut v = vec![0; ext.grade_dim(n)];
                    for c in 0..base.copies() {
                        v[c * 2 * da + part * da..c * 2 * da + part * da + da]
                            .copy_from_slice(&r[c * da..(c + 1) * da]);
                    }
                    t.insert(&v);
                }
            }
            t
        })
        .collect();
    CofiniteSubalgebra {
        parent: ext.clone(),
        grades,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn loop_of(label: &str, p: u32, d: usize) -> Arc<LoopAlgebra> {
        LoopAlgebra::new(ghat_from_label(label, p).unwrap(), d)
    }

    #[test]
    fn whole_sl2_loop() {
        let l = loop_of("A1", 5, 1);
        let h = CofiniteSubalgebra::whole(&l);
        let c = commutator_subalgebra(&h).unwrap();
        assert_eq!(c.codim(), 3);
        assert_eq!(c.n0(), 1);
        let r = check_graded_lie_bound(&h).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (3, 12, true));
    }

    // Oracle: explicit span of brackets of basis vectors, grade by grade, with no shortcuts.
    fn brute_commutator_codim(h: &CofiniteSubalgebra) -> usize {
        let b = stabilization_bound(h.parent().modulus(), h.n0());
        (1..=b).map(|n| commutator_grade(h, n, false).codim()).sum()
    }

    #[test]
    fn zero_first_grade() {
        let l = loop_of("A1", 5, 1);
        let h = CofiniteSubalgebra::new(&l, vec![Subspace::zero(3, 5)]).unwrap();
        let c = commutator_subalgebra(&h).unwrap();
        assert_eq!(c.codim(), brute_commutator_codim(&h));
        // grade 1 and grade 2 ([h_1, h_1] with h_1 = 0) are both empty
        assert_eq!(c.grade(1).unwrap().dim(), 0);
        assert_eq!(c.grade(2).unwrap().dim(), 0);
        assert!(verify_stabilization(&h));
    }

    #[test]
    fn diagonal_copy() {
        let l1 = loop_of("A1", 5, 1);
        let l2 = loop_of("A1", 5, 2);
        let n0 = 3;
        let diag: Vec<Subspace> = (0..n0)
            .map(|_| {
                Subspace::span(
                    6,
                    5,
                    (0..3).map(|i| {
                        let mut v = vec![0; 6];
                        v[i] = 1;
                        v[3 + i] = 1;
                        v
                    }),
                )
            })
            .collect();
        let h2 = CofiniteSubalgebra::new(&l2, diag).unwrap();
        // compare the diagonal part of [h, h] with the D = 1 answer for h = whole in grades <= n0
        let c1 = commutator_truncated(&CofiniteSubalgebra::whole(&l1), n0);
        let c2 = commutator_truncated(&h2, n0);
        for n in 0..n0 {
            assert_eq!(c2[n].dim(), c1[n].dim());
            for r in c1[n].basis() {
                let v: Vec<u32> = r.iter().chain(r.iter()).copied().collect();
                assert!(c2[n].contains(&v));
            }
        }
    }

    #[test]
    fn twisted_a2_example_rhs() {
        let l = loop_of("2A2", 5, 2);
        assert_eq!(l.bound_constant(), 4 * 2 * 8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut seen = false;
        for _ in 0..400 {
            let h = random_cofinite_subalgebra(&l, 2, &mut rng);
            let r = check_graded_lie_bound(&h).unwrap();
            assert!(r.holds);
            assert_eq!(r.lhs, brute_commutator_codim(&h));
            if r.codim_h == 4 {
                assert_eq!(r.rhs, 384);
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn zero_copies_and_zero_subalgebra() {
        let l = loop_of("A1", 7, 0);
        let h = CofiniteSubalgebra::whole(&l);
        let r = check_graded_lie_bound(&h).unwrap();
        assert!(r.holds && r.lhs == 0 && r.rhs == 0);
        let l = loop_of("A2", 7, 1);
        let h = CofiniteSubalgebra::new(&l, vec![Subspace::zero(8, 7); 3]).unwrap();
        let r = check_graded_lie_bound(&h).unwrap();
        assert!(r.holds);
        assert_eq!(r.lhs, brute_commutator_codim(&h));
    }

    #[test]
    fn non_perfect_needs_truncation() {
        let g = GradedLieAlgebra::trivial(FpLieAlgebra::abelian(5, 2));
        let l = LoopAlgebra::new(g, 1);
        let h = CofiniteSubalgebra::whole(&l);
        assert_eq!(
            commutator_subalgebra(&h).unwrap_err(),
            LoopError::NotPerfect
        );
        assert!(commutator_truncated(&h, 4).iter().all(|s| s.dim() == 0));
    }

    #[test]
    fn closure_is_validated() {
        let l = loop_of("A1", 5, 1);
        // h_1 = span(x_a, x_-a) brackets to h into grade 2, which is missing
        let h1 = Subspace::span(3, 5, [[1, 0, 0], [0, 1, 0]]);
        let err = CofiniteSubalgebra::new(&l, vec![h1, Subspace::zero(3, 5)]).unwrap_err();
        assert_eq!(err, LoopError::NotClosed { i: 1, j: 1 });
        let err = CofiniteSubalgebra::new(&l, vec![Subspace::zero(4, 5)]).unwrap_err();
        assert!(matches!(err, LoopError::DimensionMismatch { .. }));
    }

    #[test]
    fn random_trials_hold_and_are_deterministic() {
        for label in ["A1", "A2", "2A2", "3D4"] {
            for d in 1..=2 {
                let l = loop_of(label, 7, d);
                let a = run_bound_trials(&l, label, 10, 99, 3);
                assert!(a.iter().all(|r| r.holds));
                let b = run_bound_trials(&l, label, 10, 99, 3);
                assert_eq!(to_json_lines(&a), to_json_lines(&b));
            }
        }
    }

    #[test]
    fn stabilization_holds_directly() {
        for label in ["A1", "2A2", "3D4"] {
            let l = loop_of(label, 5, 1);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..5 {
                let h = random_cofinite_subalgebra(&l, 2, &mut rng);
                assert!(verify_stabilization(&h), "{label}");
            }
        }
    }

    #[test]
    fn two_subspace_examples() {
        let g = ghat_from_label("A1", 5).unwrap();
        let br = BilinearBracket::from_lie(&g.algebra);
        let full: Vec<Vec<u32>> = units(6);
        let r = check_two_subspace_bound(&br, &full, &full, 2).unwrap();
        assert_eq!((r.lhs, r.holds), (0, true));
        let r = check_two_subspace_bound(&br, &full, &[], 2).unwrap();
        assert_eq!(r.lhs, br.image_dim() * 2);
        assert_eq!(r.codim_v, 6);
        assert!(r.holds);
        assert!(matches!(
            check_two_subspace_bound(&br, &[vec![1, 0]], &full, 2),
            Err(LoopError::DimensionMismatch { .. })
        ));
    }

    // Oracle for the sweep: the slow subspace-based check over all pairs.
    #[test]
    fn sweep_matches_slow_check() {
        let z =
            crate::chevalley::chevalley_integral(&build_root_datum("A1".parse().unwrap()).unwrap())
                .unwrap();
        let br = BilinearBracket::from_lie(&z.reduce(2));
        let fast = two_subspace_sweep(&br, 1, 2).unwrap();
        let mut worst = i64::MIN;
        let mut pairs = 0;
        for ku in 0..=2 {
            for u in fp::enumerate_subspaces(3, 2, 3 - ku) {
                for kv in 0..=2 {
                    for v in fp::enumerate_subspaces(3, 2, 3 - kv) {
                        let r = check_two_subspace_bound(&br, u.basis(), v.basis(), 1).unwrap();
                        worst = worst.max(r.lhs as i64 - r.rhs as i64);
                        pairs += 1;
                    }
                }
            }
        }
        assert_eq!(fast.pairs, pairs);
        assert_eq!(fast.worst_margin, worst);
        assert_eq!(fast.violations, 0);
    }

    #[test]
    fn leading_terms_examples() {
        let l = loop_of("A1", 5, 1);
        let x = GradedElement::from([(1, vec![1, 0, 0])]);
        let lt = leading_terms(std::slice::from_ref(&x), &l, 4).unwrap();
        assert_eq!(lt.grades[0].dim(), 1);
        assert!(lt.grades[1..].iter().all(|s| s.dim() == 0));
        let y = GradedElement::from([(1, vec![0, 1, 0])]);
        let lt = leading_terms(&[x.clone(), y.clone()], &l, 4).unwrap();
        assert!(lt.grades[1].contains(&[0, 0, 1]));
        assert_eq!(lt.codim_on_window(), 4 * 3 - lt.truncated_dim);
        let all: Vec<GradedElement> = units(3)
            .into_iter()
            .map(|e| GradedElement::from([(1, e)]))
            .collect();
        let lt = leading_terms(&all, &l, 5).unwrap();
        assert!(lt.grades.iter().all(|s| s.is_full()));
        assert!(leading_terms(&[], &l, 3)
            .unwrap()
            .grades
            .iter()
            .all(|s| s.dim() == 0));
        // mixed-degree generator: leading term sits in its lowest grade
        let z = GradedElement::from([(2, vec![0, 0, 1]), (3, vec![1, 0, 0])]);
        let lt = leading_terms(&[z], &l, 4).unwrap();
        assert!(lt.grades[1].contains(&[0, 0, 1]) && lt.grades[2].dim() == 0);
    }

    #[test]
    fn quadratic_extension_codims() {
        for label in ["A1", "2A2"] {
            let g = ghat_from_label(label, 5).unwrap();
            let l = LoopAlgebra::new(g.clone(), 1);
            let ext = LoopAlgebra::new(quadratic_extension(&g), 1);
            assert!(ext.ghat().algebra.check_jacobi());
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..5 {
                let h = random_cofinite_subalgebra(&l, 2, &mut rng);
                let he = extend_subalgebra(&h, &ext);
                assert!(he.closure_violation().is_none());
                assert_eq!(he.codim(), 2 * h.codim());
                let c = commutator_subalgebra(&h).unwrap().codim();
                let ce = commutator_subalgebra(&he).unwrap().codim();
                assert_eq!(ce, 2 * c, "{label}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn codim_additivity_and_monotonicity(seed in any::<u64>(), n0 in 1usize..4) {
            let l = loop_of("2A2", 7, 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_cofinite_subalgebra(&l, n0, &mut rng);
            prop_assert_eq!(h.codim(), h.codim_flattened());
            prop_assert!(h.closure_violation().is_none());
            // enlarge grade-wise, close again, and compare commutators
            let mut bigger = h.grades().to_vec();
            for (k, s) in bigger.iter_mut().enumerate() {
                let v: Vec<u32> = (0..l.grade_dim(k + 1)).map(|_| rng.gen_range(0..7)).collect();
                s.insert(&v);
            }
            let mut g = CofiniteSubalgebra::new_unchecked(&l, Vec::new()).unwrap();
            for (k, s) in bigger.into_iter().enumerate() {
                let n = k + 1;
                let mut s = s;
                for i in 1..=n / 2 {
                    for u in g.basis(i) {
                        for v in g.basis(n - i) {
                            s.insert(&l.bracket(i, &u, n - i, &v));
                        }
                    }
                }
                g.grades.push(s);
            }
            prop_assert!(h.is_contained_in(&g));
            let ch = commutator_subalgebra(&h).unwrap();
            let cg = commutator_subalgebra(&g).unwrap();
            prop_assert!(ch.is_contained_in(&cg));
        }
    }
}

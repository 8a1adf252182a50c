//! Finite root systems, their affine extensions and filtration functionals.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("unsupported root system type {0}")]
    UnsupportedType(String),
    #[error("twist of order {twist} is not available for type {label}")]
    IllegalTwist { label: String, twist: u32 },
    #[error("({grad:?}, {constant}) is not an affine root")]
    NotAffineRoot { grad: Vec<i64>, constant: i64 },
    #[error("subset of the affine basis is invalid: {0}")]
    BadSubset(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    BC,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

impl CartanType {
    pub const fn new(family: Family, rank: usize) -> Self {
        CartanType { family, rank }
    }

    pub fn is_supported(&self) -> bool {
        let r = self.rank;
        match self.family {
            Family::A => (1..=8).contains(&r),
            Family::B | Family::C => (2..=8).contains(&r),
            Family::D => (4..=8).contains(&r),
            Family::E => (6..=8).contains(&r),
            Family::F => r == 4,
            Family::G => r == 2,
            Family::BC => (1..=2).contains(&r),
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.family != Family::BC
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for CartanType {
    type Err = RootError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let (head, tail) = s.split_at(split);
        let family = match head.to_ascii_uppercase().as_str() {
            "A" => Family::A,
            "B" => Family::B,
            "C" => Family::C,
            "D" => Family::D,
            "E" => Family::E,
            "F" => Family::F,
            "G" => Family::G,
            "BC" => Family::BC,
            _ => return Err(RootError::UnsupportedType(s.to_string())),
        };
        let rank: usize = tail
            .parse()
            .map_err(|_| RootError::UnsupportedType(s.to_string()))?;
        let t = CartanType { family, rank };
        if !t.is_supported() {
            return Err(RootError::UnsupportedType(s.to_string()));
        }
        Ok(t)
    }
}

impl Serialize for CartanType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CartanType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Cartan matrix in Bourbaki numbering, `a[i][j] = <alpha_j, alpha_i^vee>`.
fn cartan_matrix(t: CartanType) -> Vec<Vec<i64>> {
    let n = t.rank;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let link = |a: &mut Vec<Vec<i64>>, i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match t.family {
        Family::A => (0..n.saturating_sub(1)).for_each(|i| link(&mut a, i, i + 1)),
        Family::B | Family::BC => {
            (0..n.saturating_sub(2)).for_each(|i| link(&mut a, i, i + 1));
            if n >= 2 {
                a[n - 2][n - 1] = -1;
                a[n - 1][n - 2] = -2;
            }
        }
        Family::C => {
            (0..n - 2).for_each(|i| link(&mut a, i, i + 1));
            a[n - 2][n - 1] = -2;
            a[n - 1][n - 2] = -1;
        }
        Family::D => {
            (0..n - 2).for_each(|i| link(&mut a, i, i + 1));
            link(&mut a, n - 3, n - 1);
        }
        Family::E => {
            link(&mut a, 0, 2);
            link(&mut a, 2, 3);
            link(&mut a, 1, 3);
            (3..n - 1).for_each(|i| link(&mut a, i, i + 1));
        }
        Family::F => {
            link(&mut a, 0, 1);
            a[1][2] = -1;
            a[2][1] = -2;
            link(&mut a, 2, 3);
        }
        Family::G => {
            a[0][1] = -3;
            a[1][0] = -1;
        }
    }
    a
}

/// Half squared lengths of simple roots, scaled so the shortest is 1.
fn symmetrizer(a: &[Vec<i64>]) -> Vec<Rational64> {
    let n = a.len();
    let mut d: Vec<Option<Rational64>> = vec![None; n];
    d[0] = Some(Rational64::from_integer(1));
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if a[i][j] != 0 && d[j].is_none() {
                d[j] = Some(d[i].unwrap() * Rational64::new(a[i][j], a[j][i]));
                stack.push(j);
            }
        }
    }
    let d: Vec<Rational64> = d
        .into_iter()
        .map(|x| x.expect("connected diagram"))
        .collect();
    let m = *d.iter().min().unwrap();
    d.into_iter().map(|x| x / m).collect()
}

/// Positive roots by the root-string algorithm, sorted by height then lexicographically.
fn positive_roots(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let unit = |i: usize| {
        let mut v = vec![0i64; n];
        v[i] = 1;
        v
    };
    let mut roots: Vec<Vec<i64>> = (0..n).map(unit).collect();
    let mut seen: std::collections::HashSet<Vec<i64>> = roots.iter().cloned().collect();
    let mut frontier = roots.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for b in &frontier {
            for i in 0..n {
                let pairing: i64 = (0..n).map(|j| b[j] * a[i][j]).sum();
                let mut p = 0;
                let mut c = b.clone();
                loop {
                    c[i] -= 1;
                    if seen.contains(&c) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                if p - pairing > 0 {
                    let mut nb = b.clone();
                    nb[i] += 1;
                    if seen.insert(nb.clone()) {
                        roots.push(nb.clone());
                        next.push(nb);
                    }
                }
            }
        }
        frontier = next;
    }
    roots.sort_by(|x, y| {
        let hx: i64 = x.iter().sum();
        let hy: i64 = y.iter().sum();
        hx.cmp(&hy).then_with(|| y.cmp(x))
    });
    roots
}

/// A finite root system with integer coordinates in the basis of simple roots.
///
/// `roots[..n_pos]` are the positive roots sorted by height (the first `rank`
/// being the simple roots in Bourbaki order) and `roots[n_pos + k] = -roots[k]`.
#[derive(Clone, Debug)]
pub struct RootDatum {
    cartan_type: CartanType,
    cartan: Vec<Vec<i64>>,
    gram: Vec<Vec<Rational64>>,
    roots: Vec<Vec<i64>>,
    n_pos: usize,
    index: HashMap<Vec<i64>, usize>,
}

pub fn build_root_datum(t: CartanType) -> Result<RootDatum, RootError> {
    if !t.is_supported() {
        return Err(RootError::UnsupportedType(t.to_string()));
    }
    let cartan = cartan_matrix(t);
    let n = t.rank;
    let gram: Vec<Vec<Rational64>> = if n == 1 {
        vec![vec![Rational64::from_integer(2)]]
    } else {
        let d = symmetrizer(&cartan);
        (0..n)
            .map(|i| (0..n).map(|j| d[i] * cartan[i][j]).collect())
            .collect()
    };
    let mut pos = positive_roots(&cartan);
    if t.family == Family::BC {
        let norm = |v: &Vec<i64>| -> Rational64 {
            let mut s = Rational64::from_integer(0);
            for i in 0..n {
                for j in 0..n {
                    s += gram[i][j] * (v[i] * v[j]);
                }
            }
            s
        };
        let shortest = pos.iter().map(norm).min().unwrap();
        let doubled: Vec<Vec<i64>> = pos
            .iter()
            .filter(|v| norm(v) == shortest)
            .map(|v| v.iter().map(|x| 2 * x).collect())
            .collect();
        pos.extend(doubled);
        pos.sort_by(|x, y| {
            let hx: i64 = x.iter().sum();
            let hy: i64 = y.iter().sum();
            hx.cmp(&hy).then_with(|| y.cmp(x))
        });
    }
    let n_pos = pos.len();
    let mut roots = pos.clone();
    roots.extend(pos.iter().map(|v| v.iter().map(|x| -x).collect::<Vec<_>>()));
    let index = roots
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), i))
        .collect();
    Ok(RootDatum {
        cartan_type: t,
        cartan,
        gram,
        roots,
        n_pos,
        index,
    })
}

impl RootDatum {
    pub fn cartan_type(&self) -> CartanType {
        self.cartan_type
    }

    pub fn rank(&self) -> usize {
        self.cartan_type.rank
    }

    pub fn cartan_matrix(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn gram(&self) -> &[Vec<Rational64>] {
        &self.gram
    }

    pub fn roots(&self) -> &[Vec<i64>] {
        &self.roots
    }

    pub fn num_roots(&self) -> usize {
        self.roots.len()
    }

    pub fn num_positive(&self) -> usize {
        self.n_pos
    }

    pub fn root(&self, i: usize) -> &[i64] {
        &self.roots[i]
    }

    pub fn root_index(&self, v: &[i64]) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn negative(&self, i: usize) -> usize {
        if i < self.n_pos {
            i + self.n_pos
        } else {
            i - self.n_pos
        }
    }

    pub fn is_positive(&self, i: usize) -> bool {
        i < self.n_pos
    }

    pub fn is_reduced(&self) -> bool {
        self.cartan_type.is_reduced()
    }

    pub fn height(&self, i: usize) -> i64 {
        self.roots[i].iter().sum()
    }

    pub fn inner(&self, a: &[i64], b: &[i64]) -> Rational64 {
        let n = self.rank();
        let mut s = Rational64::from_integer(0);
        for (i, &ai) in a.iter().enumerate().take(n) {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate().take(n) {
                if bj != 0 {
                    s += self.gram[i][j] * (ai * bj);
                }
            }
        }
        s
    }

    pub fn norm2(&self, i: usize) -> Rational64 {
        self.inner(&self.roots[i], &self.roots[i])
    }

    /// `2<v, alpha_i> / <alpha_i, alpha_i>` for the simple root `alpha_i`.
    pub fn coroot_pairing(&self, v: &[i64], i: usize) -> i64 {
        let e = self.simple(i);
        let x = self.inner(v, &e) * 2 / self.inner(&e, &e);
        assert!(x.is_integer(), "non-integral coroot pairing");
        x.to_integer()
    }

    fn simple(&self, i: usize) -> Vec<i64> {
        let mut e = vec![0; self.rank()];
        e[i] = 1;
        e
    }

    /// Simple reflection `s_i` applied to coordinates `v`.
    pub fn reflect(&self, i: usize, v: &[i64]) -> Vec<i64> {
        let c = self.coroot_pairing(v, i);
        let mut w = v.to_vec();
        w[i] -= c;
        w
    }

    pub fn max_cartan_entry(&self) -> i64 {
        self.cartan
            .iter()
            .flatten()
            .map(|x| x.abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_multipliable(&self, i: usize) -> bool {
        let d: Vec<i64> = self.roots[i].iter().map(|x| 2 * x).collect();
        self.index.contains_key(&d)
    }

    pub fn is_divisible(&self, i: usize) -> bool {
        let r = &self.roots[i];
        r.iter().all(|x| x % 2 == 0) && {
            let h: Vec<i64> = r.iter().map(|x| x / 2).collect();
            self.index.contains_key(&h)
        }
    }

    /// Non-divisible roots (the set written with one bullet).
    pub fn non_divisible(&self) -> Vec<usize> {
        (0..self.num_roots())
            .filter(|&i| !self.is_divisible(i))
            .collect()
    }

    /// Non-multipliable roots (the set written with two bullets).
    pub fn non_multipliable(&self) -> Vec<usize> {
        (0..self.num_roots())
            .filter(|&i| !self.is_multipliable(i))
            .collect()
    }

    /// Minimum squared length over the non-divisible roots.
    pub fn short_norm(&self) -> Rational64 {
        (0..self.num_roots())
            .filter(|&i| !self.is_divisible(i))
            .map(|i| self.norm2(i))
            .min()
            .unwrap()
    }

    pub fn is_short(&self, i: usize) -> bool {
        self.norm2(i) == self.short_norm()
    }

    pub fn highest_root(&self) -> usize {
        (0..self.n_pos).max_by_key(|&i| self.height(i)).unwrap()
    }

    pub fn dominant_short_root(&self) -> usize {
        (0..self.n_pos)
            .filter(|&i| self.is_short(i))
            .max_by_key(|&i| self.height(i))
            .unwrap()
    }

    /// Dimension of the split Lie algebra with this root system (non-divisible roots only).
    pub fn lie_dim(&self) -> usize {
        self.non_divisible().len() + self.rank()
    }
}

/// An affine function `(gradient, constant)` with gradient in simple-root coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineFn {
    pub grad: Vec<i64>,
    pub constant: i64,
}

impl AffineFn {
    pub fn delta(rank: usize) -> Self {
        AffineFn {
            grad: vec![0; rank],
            constant: 1,
        }
    }

    pub fn add(&self, other: &AffineFn) -> AffineFn {
        AffineFn {
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(a, b)| a + b)
                .collect(),
            constant: self.constant + other.constant,
        }
    }

    pub fn scale(&self, k: i64) -> AffineFn {
        AffineFn {
            grad: self.grad.iter().map(|a| a * k).collect(),
            constant: self.constant * k,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.grad.iter().all(|&x| x == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AffineKind {
    /// Split over the maximal unramified extension.
    Split,
    /// Non-split with reduced relative root system.
    Unramified,
    /// Relative root system of type BC.
    NonReduced,
}

/// Diagram automorphism of order `twist` on the simple nodes of `t`, as a permutation.
pub fn diagram_automorphism(t: CartanType, twist: u32) -> Result<Vec<usize>, RootError> {
    let n = t.rank;
    let illegal = || RootError::IllegalTwist {
        label: t.to_string(),
        twist,
    };
    match (t.family, twist) {
        (_, 1) if t.is_reduced() => Ok((0..n).collect()),
        (Family::A, 2) if n >= 2 => Ok((0..n).map(|i| n - 1 - i).collect()),
        (Family::D, 2) => {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(n - 2, n - 1);
            Ok(p)
        }
        (Family::E, 2) if n == 6 => Ok(vec![5, 1, 4, 3, 2, 0]),
        (Family::D, 3) if n == 4 => Ok(vec![2, 1, 3, 0]),
        _ => Err(illegal()),
    }
}

/// How absolute simple nodes fold onto relative simple roots, and the relative type.
fn folding(t: CartanType, twist: u32) -> Result<(CartanType, Vec<Vec<usize>>), RootError> {
    let n = t.rank;
    if twist == 1 {
        return Ok((t, (0..n).map(|i| vec![i]).collect()));
    }
    let perm = diagram_automorphism(t, twist)?;
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; n];
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let mut o = vec![i];
        seen[i] = true;
        let mut j = perm[i];
        while j != i {
            o.push(j);
            seen[j] = true;
            j = perm[j];
        }
        orbits.push(o);
    }
    let rel = match (t.family, twist) {
        (Family::A, 2) if n.is_multiple_of(2) => CartanType::new(Family::BC, n / 2),
        (Family::A, 2) => CartanType::new(Family::C, n.div_ceil(2)),
        (Family::D, 2) => CartanType::new(Family::B, n - 1),
        (Family::E, 2) => CartanType::new(Family::F, 4),
        (Family::D, 3) => CartanType::new(Family::G, 2),
        _ => unreachable!(),
    };
    // Relative simple roots in Bourbaki order.
    let order: Vec<usize> = match (t.family, twist) {
        (Family::E, 2) => vec![1, 3, 2, 0],
        _ => (0..orbits.len()).collect(),
    };
    let orbits: Vec<Vec<usize>> = order.into_iter().map(|k| orbits[k].clone()).collect();
    if !rel.is_supported() {
        return Err(RootError::UnsupportedType(rel.to_string()));
    }
    Ok((rel, orbits))
}

/// Affine root system attached to an absolutely simple group over a local function field.
#[derive(Clone, Debug)]
pub struct AffineRootDatum {
    absolute: CartanType,
    twist: u32,
    kind: AffineKind,
    relative: RootDatum,
    node_orbits: Vec<Vec<usize>>,
    theta: Vec<i64>,
    delta: Vec<AffineFn>,
    m: Vec<i64>,
}

/// Builds the affine datum for `base` twisted by a diagram automorphism of order `twist`.
///
/// `base` is the absolute type; for `BC_r` the absolute type `A_{2r}` is implied and
/// `twist` must be 2.
pub fn build_affine_datum(base: &RootDatum, twist: u32) -> Result<AffineRootDatum, RootError> {
    let t = base.cartan_type();
    let (absolute, relative_type, orbits) = if t.family == Family::BC {
        if twist != 2 {
            return Err(RootError::IllegalTwist {
                label: t.to_string(),
                twist,
            });
        }
        let abs = CartanType::new(Family::A, 2 * t.rank);
        let (_, o) = folding(abs, 2)?;
        (abs, t, o)
    } else {
        let (rel, o) = folding(t, twist)?;
        (t, rel, o)
    };
    let relative = if relative_type == t {
        base.clone()
    } else {
        build_root_datum(relative_type)?
    };
    let kind = match (twist, relative.is_reduced()) {
        (1, _) => AffineKind::Split,
        (_, true) => AffineKind::Unramified,
        (_, false) => AffineKind::NonReduced,
    };
    let rank = relative.rank();
    let theta: Vec<i64> = match kind {
        AffineKind::Split => relative.root(relative.highest_root()).to_vec(),
        AffineKind::Unramified => relative.root(relative.dominant_short_root()).to_vec(),
        // Twice the highest multipliable root; in rank one this is the simple root.
        AffineKind::NonReduced => relative
            .root(relative.dominant_short_root())
            .iter()
            .map(|x| 2 * x)
            .collect(),
    };
    let mut delta: Vec<AffineFn> = (0..rank)
        .map(|i| {
            let mut g = vec![0; rank];
            g[i] = 1;
            AffineFn {
                grad: g,
                constant: 0,
            }
        })
        .collect();
    delta.push(AffineFn {
        grad: theta.iter().map(|x| -x).collect(),
        constant: 1,
    });
    let mut m = theta.clone();
    m.push(1);
    Ok(AffineRootDatum {
        absolute,
        twist,
        kind,
        relative,
        node_orbits: orbits,
        theta,
        delta,
        m,
    })
}

/// A member of the affine root set: relative root index plus constant term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineRoot {
    pub root: usize,
    pub constant: i64,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct AffineDatumJson {
    #[serde(rename = "type")]
    pub type_label: String,
    pub rank: usize,
    pub twist: u32,
    pub delta: Vec<AffineFn>,
    pub m_alpha: Vec<i64>,
}

impl AffineRootDatum {
    pub fn absolute_type(&self) -> CartanType {
        self.absolute
    }

    pub fn twist(&self) -> u32 {
        self.twist
    }

    pub fn kind(&self) -> AffineKind {
        self.kind
    }

    pub fn relative(&self) -> &RootDatum {
        &self.relative
    }

    pub fn rank(&self) -> usize {
        self.relative.rank()
    }

    /// Absolute simple nodes folding onto each relative simple root.
    pub fn node_orbits(&self) -> &[Vec<usize>] {
        &self.node_orbits
    }

    pub fn delta_basis(&self) -> &[AffineFn] {
        &self.delta
    }

    pub fn special_index(&self) -> usize {
        self.delta.len() - 1
    }

    pub fn special_root(&self) -> &AffineFn {
        self.delta.last().unwrap()
    }

    pub fn m_alpha(&self) -> &[i64] {
        &self.m
    }

    /// Dimension of the absolute group.
    pub fn group_dim(&self) -> usize {
        let abs = build_root_datum(self.absolute).expect("absolute type is supported");
        abs.num_roots() + abs.rank()
    }

    /// `r / [L_phi : K]`: 1 for roots whose orbit has full size, `r` otherwise.
    pub fn r_phi(&self, i: usize) -> i64 {
        match self.kind {
            AffineKind::Split => 1,
            AffineKind::Unramified => {
                if self.relative.is_short(i) {
                    1
                } else {
                    self.twist as i64
                }
            }
            AffineKind::NonReduced => {
                if self.relative.is_divisible(i) {
                    2
                } else {
                    1
                }
            }
        }
    }

    pub fn contains(&self, root: usize, constant: i64) -> bool {
        match self.kind {
            AffineKind::Split => true,
            AffineKind::Unramified => {
                self.relative.is_short(root) || constant.rem_euclid(self.twist as i64) == 0
            }
            AffineKind::NonReduced => {
                !self.relative.is_divisible(root) || constant.rem_euclid(2) == 1
            }
        }
    }

    pub fn to_affine_fn(&self, a: AffineRoot) -> AffineFn {
        AffineFn {
            grad: self.relative.root(a.root).to_vec(),
            constant: a.constant,
        }
    }

    pub fn as_affine_root(&self, f: &AffineFn) -> Option<AffineRoot> {
        let root = self.relative.root_index(&f.grad)?;
        self.contains(root, f.constant).then_some(AffineRoot {
            root,
            constant: f.constant,
        })
    }

    /// Coefficients `t_alpha` of `f` in the basis Delta.
    pub fn coefficients(&self, f: &AffineFn) -> Vec<i64> {
        let mut t: Vec<i64> = f
            .grad
            .iter()
            .zip(&self.theta)
            .map(|(g, th)| g + f.constant * th)
            .collect();
        t.push(f.constant);
        t
    }

    fn check_subset(&self, xi: &[usize]) -> Result<(), RootError> {
        if let Some(&k) = xi.iter().find(|&&k| k >= self.delta.len()) {
            return Err(RootError::BadSubset(format!(
                "index {k} outside the affine basis"
            )));
        }
        Ok(())
    }

    /// Filtration value `sum_{alpha in Xi} t_alpha`. Multiples of delta are accepted.
    pub fn l_xi(&self, xi: &[usize], f: &AffineFn) -> Result<i64, RootError> {
        self.check_subset(xi)?;
        if !f.is_constant() && self.as_affine_root(f).is_none() {
            return Err(RootError::NotAffineRoot {
                grad: f.grad.clone(),
                constant: f.constant,
            });
        }
        Ok(self.l_xi_unchecked(xi, f))
    }

    pub fn l_xi_unchecked(&self, xi: &[usize], f: &AffineFn) -> i64 {
        let t = self.coefficients(f);
        xi.iter().map(|&k| t[k]).sum()
    }

    pub fn l_root(&self, xi: &[usize], a: AffineRoot) -> i64 {
        self.l_xi_unchecked(xi, &self.to_affine_fn(a))
    }

    pub fn l_delta(&self, xi: &[usize]) -> i64 {
        xi.iter().map(|&k| self.m[k]).sum()
    }

    /// All affine roots with `lo <= l_Xi <= hi`, sorted by (value, root, constant).
    pub fn roots_in_window(&self, xi: &[usize], lo: i64, hi: i64) -> Vec<(AffineRoot, i64)> {
        let ld = self.l_delta(xi);
        assert!(ld > 0, "empty subset has no window");
        let mut out = Vec::new();
        for root in 0..self.relative.num_roots() {
            let base = self.l_root(xi, AffineRoot { root, constant: 0 });
            let nmin = (lo - base).div_euclid(ld) - 1;
            let nmax = (hi - base).div_euclid(ld) + 1;
            for constant in nmin..=nmax {
                let v = base + constant * ld;
                if v >= lo && v <= hi && self.contains(root, constant) {
                    out.push((AffineRoot { root, constant }, v));
                }
            }
        }
        out.sort_by_key(|&(a, v)| (v, a.root, a.constant));
        out
    }

    pub fn to_json(&self) -> AffineDatumJson {
        let label = match self.kind {
            AffineKind::Split => self.absolute.to_string(),
            AffineKind::Unramified => format!("{}^({})", self.absolute, self.twist),
            AffineKind::NonReduced => format!("{}^(2)", self.absolute),
        };
        AffineDatumJson {
            type_label: label,
            rank: self.rank(),
            twist: self.twist,
            delta: self.delta.clone(),
            m_alpha: self.m.clone(),
        }
    }
}

//! Function-field arithmetic and the covolume side.
//!
//! Curves enter only through their zeta function `Z(u) = P(u)/((1-u)(1-qu))`.
//! Type data, the factor `B`, the Euler product `Z(G)`, the covolume and the
//! exponent ledger of the covolume lower bound are computed with exact rationals;
//! logarithms are mirrors for reporting.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fp::is_prime;
use crate::rootsys::{CartanType, Family};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("unknown type label {0:?}")]
    UnknownType(String),
    #[error("inconsistent scenario: {0}")]
    InconsistentScenario(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("not the zeta function of a curve: {0}")]
    NotACurve(String),
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn rat(x: BigInt) -> BigRational {
    BigRational::from_integer(x)
}

/// `q^e` for any integer `e`.
pub fn qpow(q: u64, e: i64) -> BigRational {
    let p = rat(BigInt::from(q).pow(e.unsigned_abs() as u32));
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// `p^k` with `p` prime, `k >= 1`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut x, mut k) = (q, 0);
    while x % p == 0 {
        x /= p;
        k += 1;
    }
    (x == 1 && is_prime(p)).then_some((p, k))
}

/// `x >= b sqrt(q)` for integers `x`, `b` and `q >= 0`.
fn ge_surd(x: &BigInt, b: &BigInt, q: u64) -> bool {
    let rhs2 = b * b * BigInt::from(q);
    match (x.is_negative(), b.is_negative()) {
        (false, true) => true,
        (true, false) => b.is_zero() && x.is_zero(),
        (false, false) => x * x >= rhs2,
        (true, true) => x * x <= rhs2,
    }
}

/// `(sqrt q + sign)^(2g)` as `a + b sqrt q`.
fn surd_power(q: u64, sign: i64, g: u32) -> (BigInt, BigInt) {
    let (mut a, mut b) = (BigInt::one(), BigInt::zero());
    let (c, d) = (BigInt::from(q + 1), big(2 * sign));
    let qb = BigInt::from(q);
    for _ in 0..g {
        let na = &a * &c + &b * &d * &qb;
        let nb = &a * &d + &b * &c;
        a = na;
        b = nb;
    }
    (a, b)
}

fn mobius(n: u64) -> i64 {
    let (mut n, mut m, mut p) = (n, 1, 2);
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            m = -m;
        }
        p += 1;
    }
    if n > 1 {
        -m
    } else {
        m
    }
}

/// Zeta function of a smooth projective curve over `F_q`, through its L-polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveZeta {
    q: u64,
    genus: u32,
    l_poly: Vec<BigInt>,
}

impl CurveZeta {
    /// Validates `P(0) = 1`, the functional equation, and the Weil class-number bounds.
    pub fn new(q: u64, genus: u32, l_poly: Vec<BigInt>) -> Result<Self, ArithError> {
        if prime_power(q).is_none() {
            return Err(ArithError::NotACurve(format!(
                "q = {q} is not a prime power"
            )));
        }
        let g = genus as usize;
        if l_poly.len() != 2 * g + 1 {
            return Err(ArithError::NotACurve(format!(
                "L-polynomial of genus {g} needs {} coefficients",
                2 * g + 1
            )));
        }
        if !l_poly[0].is_one() {
            return Err(ArithError::NotACurve("P(0) must be 1".into()));
        }
        for i in 0..=g {
            let want = &l_poly[i] * BigInt::from(q).pow((g - i) as u32);
            if l_poly[2 * g - i] != want {
                return Err(ArithError::NotACurve(format!(
                    "functional equation fails at degree {}",
                    2 * g - i
                )));
            }
        }
        let z = CurveZeta { q, genus, l_poly };
        let h = z.class_number();
        let (la, lb) = surd_power(q, -1, genus);
        let (ua, ub) = surd_power(q, 1, genus);
        if !(ge_surd(&(&h - &la), &lb, q) && ge_surd(&(&ua - &h), &-ub, q)) {
            return Err(ArithError::NotACurve(format!(
                "class number {h} violates the Weil bounds"
            )));
        }
        Ok(z)
    }

    /// Genus 0: `P(u) = 1`.
    pub fn projective_line(q: u64) -> Result<Self, ArithError> {
        CurveZeta::new(q, 0, vec![BigInt::one()])
    }

    pub fn from_coefficients(q: u64, genus: u32, l_poly: &[i64]) -> Result<Self, ArithError> {
        CurveZeta::new(q, genus, l_poly.iter().map(|&c| big(c)).collect())
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn l_poly(&self) -> &[BigInt] {
        &self.l_poly
    }

    /// `h = P(1)`.
    pub fn class_number(&self) -> BigInt {
        self.l_poly.iter().sum()
    }

    /// Weil bounds `(sqrt q - 1)^(2g) <= h <= (sqrt q + 1)^(2g)`, checked exactly.
    pub fn weil_bounds_hold(&self) -> bool {
        let h = self.class_number();
        let (la, lb) = surd_power(self.q, -1, self.genus);
        let (ua, ub) = surd_power(self.q, 1, self.genus);
        ge_surd(&(&h - &la), &lb, self.q) && ge_surd(&(&ua - &h), &-ub, self.q)
    }

    /// Power sums `s_e` of the reciprocal roots, `e = 1..=n`.
    fn power_sums(&self, n: usize) -> Vec<BigInt> {
        let a = |j: usize| self.l_poly.get(j).cloned().unwrap_or_default();
        let mut s: Vec<BigInt> = vec![BigInt::zero(); n + 1];
        for e in 1..=n {
            let mut v = -big(e as i64) * a(e);
            for j in 1..e {
                v -= a(j) * &s[e - j];
            }
            s[e] = v;
        }
        s
    }

    /// `N_e = #C(F_{q^e})` for `e = 1..=n`.
    pub fn point_counts(&self, n: usize) -> Vec<BigInt> {
        let s = self.power_sums(n);
        (1..=n)
            .map(|e| BigInt::from(self.q).pow(e as u32) + 1 - &s[e])
            .collect()
    }

    /// Number of places of degree `e = 1..=n`, by Möbius inversion of point counts.
    pub fn place_counts(&self, n: usize) -> Vec<BigInt> {
        let pts = self.point_counts(n);
        (1..=n)
            .map(|e| {
                let mut t = BigInt::zero();
                for d in 1..=e {
                    if e % d == 0 {
                        t += &pts[d - 1] * mobius((e / d) as u64);
                    }
                }
                t / big(e as i64)
            })
            .collect()
    }

    /// Coefficients `b_0..=b_n` of `P(u)/((1-u)(1-qu))`.
    pub fn divisor_series(&self, n: usize) -> Vec<BigInt> {
        let q = BigInt::from(self.q);
        // 1/((1-u)(1-qu)) = sum (q^{N+1}-1)/(q-1) u^N
        let mut geo = Vec::with_capacity(n + 1);
        let mut qp = BigInt::one();
        let mut acc = BigInt::zero();
        for _ in 0..=n {
            acc += &qp;
            geo.push(acc.clone());
            qp *= &q;
        }
        (0..=n)
            .map(|k| {
                self.l_poly
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i <= k)
                    .map(|(i, a)| a * &geo[k - i])
                    .sum()
            })
            .collect()
    }

    /// `b_N`, the number of effective divisors of degree `N`.
    pub fn effective_divisor_count(&self, n: usize) -> BigInt {
        self.divisor_series(n).pop().unwrap()
    }

    /// `sum_{N <= y} b_N`.
    pub fn cumulative_count(&self, y: usize) -> BigInt {
        self.divisor_series(y).into_iter().sum()
    }

    /// `b_N <= 2 h q^N` and `sum_{N <= y} b_N <= 4 h q^y` for `N, y <= n`.
    pub fn divisor_bounds_hold(&self, n: usize) -> bool {
        let h = self.class_number();
        let series = self.divisor_series(n);
        let q = BigInt::from(self.q);
        let mut cum = BigInt::zero();
        let mut qp = BigInt::one();
        for b in &series {
            cum += b;
            if *b > big(2) * &h * &qp || cum > big(4) * &h * &qp {
                return false;
            }
            qp *= &q;
        }
        true
    }

    /// `Z(u) = P(u)/((1-u)(1-qu))`.
    pub fn z_at(&self, u: &BigRational) -> BigRational {
        let mut p = BigRational::zero();
        let mut up = BigRational::one();
        for a in &self.l_poly {
            p += &up * rat(a.clone());
            up *= u;
        }
        let one = BigRational::one();
        let q = rat(BigInt::from(self.q));
        p / ((&one - u) * (&one - &q * u))
    }

    /// `ζ_k(s) = Z(q^{-s})`.
    pub fn zeta(&self, s: i64) -> BigRational {
        self.z_at(&qpow(self.q, -s))
    }
}

/// Recovers the L-polynomial from `N_1..N_g`.
pub fn zeta_from_point_counts(q: u64, genus: u32, counts: &[i64]) -> Result<CurveZeta, ArithError> {
    let g = genus as usize;
    if counts.len() < g {
        return Err(ArithError::NotACurve(format!(
            "genus {g} needs {g} point counts"
        )));
    }
    if prime_power(q).is_none() {
        return Err(ArithError::NotACurve(format!(
            "q = {q} is not a prime power"
        )));
    }
    let qb = BigInt::from(q);
    let mut s = vec![BigInt::zero(); g + 1];
    for i in 1..=g {
        let qi = qb.pow(i as u32);
        let dev: BigInt = big(counts[i - 1]) - &qi - 1;
        if &dev * &dev > big(4 * (g * g) as i64) * &qi {
            return Err(ArithError::NotACurve(format!(
                "N_{i} = {} violates the Weil bound",
                counts[i - 1]
            )));
        }
        s[i] = -dev;
    }
    let mut a = vec![BigInt::zero(); 2 * g + 1];
    a[0] = BigInt::one();
    for e in 1..=g {
        let mut t = -s[e].clone();
        for j in 1..e {
            t -= &a[j] * &s[e - j];
        }
        let (quo, r) = t.div_rem(&big(e as i64));
        if !r.is_zero() {
            return Err(ArithError::NotACurve(format!(
                "point counts give a non-integral coefficient at degree {e}"
            )));
        }
        a[e] = quo;
    }
    for i in 0..g {
        a[2 * g - i] = &a[i] * qb.pow((g - i) as u32);
    }
    CurveZeta::new(q, genus, a)
}

/// Local factor shape of `e_qs` at an unramified place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    /// `(1 - x^d)^{-1}`.
    Plain,
    /// `(1 - χ x^d)^{-1}` with `χ = -1` at places inert in a quadratic extension.
    Sign,
    /// `((1 - ζ x^d)(1 - ζ² x^d))^{-1}`, `ζ` a cube root of unity at inert places; counts two degrees.
    CubePair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeData {
    pub label: String,
    pub family: Family,
    pub rank: usize,
    /// `[l:k]`.
    pub degree: u32,
    pub dim: i64,
    pub s: i64,
    pub s_prime: i64,
    pub epsilon: i64,
    pub t: i64,
    /// `dim - [l:k] s'`, defined for outer forms.
    pub sigma7: Option<i64>,
    /// `s' - 2 ε'`, defined for outer forms.
    pub sigma8: Option<i64>,
    /// Degrees of the basic invariants of the split form.
    pub exponents: Vec<i64>,
    /// Local factors of `e_qs` at unramified places, one per invariant degree.
    pub factors: Vec<(i64, FactorKind)>,
}

fn degrees(family: Family, r: usize) -> Vec<i64> {
    let r = r as i64;
    match family {
        Family::A => (2..=r + 1).collect(),
        Family::B | Family::C => (1..=r).map(|i| 2 * i).collect(),
        Family::D => {
            let mut d: Vec<i64> = (1..r).map(|i| 2 * i).collect();
            d.push(r);
            d.sort();
            d
        }
        Family::E => match r {
            6 => vec![2, 5, 6, 8, 9, 12],
            7 => vec![2, 6, 8, 10, 12, 14, 18],
            _ => vec![2, 8, 12, 14, 18, 20, 24, 30],
        },
        Family::F => vec![2, 6, 8, 12],
        Family::G => vec![2, 6],
        Family::BC => unreachable!("absolute types are reduced"),
    }
}

fn exponent_of_center(family: Family, r: usize) -> i64 {
    match family {
        Family::A => r as i64 + 1,
        Family::B | Family::C => 2,
        Family::D if r.is_multiple_of(2) => 2,
        Family::D => 4,
        Family::E if r == 6 => 3,
        Family::E if r == 7 => 2,
        _ => 1,
    }
}

/// Labels: split types `A1`..`G2`, outer forms `2A_r` (r >= 2), `2D_r`, `2E6`, `3D4`, `6D4`.
pub fn type_data(label: &str) -> Result<TypeData, ArithError> {
    let unknown = || ArithError::UnknownType(label.to_string());
    let (degree, rest) = match label.as_bytes().first() {
        Some(b'2') => (2, &label[1..]),
        Some(b'3') => (3, &label[1..]),
        Some(b'6') => (3, &label[1..]),
        _ => (1, label),
    };
    let t: CartanType = rest.parse().map_err(|_| unknown())?;
    if !t.is_supported() || t.family == Family::BC {
        return Err(unknown());
    }
    let (f, r) = (t.family, t.rank);
    let ri = r as i64;
    let outer_ok = match (degree, f) {
        (1, _) => true,
        (2, Family::A) => r >= 2,
        (2, Family::D) | (2, Family::E) => f != Family::E || r == 6,
        (3, Family::D) => r == 4,
        _ => false,
    };
    if !outer_ok {
        return Err(unknown());
    }
    let exps = degrees(f, r);
    let dim: i64 = exps.iter().map(|d| 2 * d - 1).sum();
    let epsilon = if f == Family::D && r % 2 == 0 { 2 } else { 1 };
    let s = match (degree, f) {
        (1, _) => 0,
        (_, Family::A) if r % 2 == 1 => (ri - 1) * (ri + 2) / 2,
        (_, Family::A) => ri * (ri + 3) / 2,
        (_, Family::D) => 2 * ri - 1,
        _ => 26,
    };
    let s_prime = if degree > 1 && f == Family::D && r % 2 == 0 {
        s - 2
    } else {
        s
    };
    let (sigma7, sigma8) = if degree > 1 {
        (
            Some(dim - degree as i64 * s_prime),
            Some(s_prime - 2 * epsilon),
        )
    } else {
        (None, None)
    };
    let factors = match (degree, f) {
        (1, _) => exps.iter().map(|&d| (d, FactorKind::Plain)).collect(),
        (2, Family::A) => exps
            .iter()
            .map(|&d| {
                (
                    d,
                    if d % 2 == 1 {
                        FactorKind::Sign
                    } else {
                        FactorKind::Plain
                    },
                )
            })
            .collect(),
        (2, Family::D) => {
            let mut v: Vec<(i64, FactorKind)> =
                (1..ri).map(|i| (2 * i, FactorKind::Plain)).collect();
            v.push((ri, FactorKind::Sign));
            v
        }
        (2, _) => exps
            .iter()
            .map(|&d| {
                (
                    d,
                    if d == 5 || d == 9 {
                        FactorKind::Sign
                    } else {
                        FactorKind::Plain
                    },
                )
            })
            .collect(),
        _ => vec![
            (2, FactorKind::Plain),
            (4, FactorKind::CubePair),
            (6, FactorKind::Plain),
        ],
    };
    Ok(TypeData {
        label: label.to_string(),
        family: f,
        rank: r,
        degree,
        dim,
        s,
        s_prime,
        epsilon,
        t: exponent_of_center(f, r),
        sigma7,
        sigma8,
        exponents: exps,
        factors,
    })
}

/// Every supported row: split types, then outer forms.
pub fn all_type_data() -> Vec<TypeData> {
    let mut labels: Vec<String> = Vec::new();
    for (f, lo, hi) in [
        ("A", 1, 8),
        ("B", 2, 8),
        ("C", 2, 8),
        ("D", 4, 8),
        ("E", 6, 8),
    ] {
        for r in lo..=hi {
            labels.push(format!("{f}{r}"));
        }
    }
    labels.extend(["F4", "G2"].map(String::from));
    labels.extend((2..=8).map(|r| format!("2A{r}")));
    labels.extend((4..=8).map(|r| format!("2D{r}")));
    labels.extend(["2E6", "3D4", "6D4"].map(String::from));
    labels
        .iter()
        .map(|l| type_data(l).expect("listed labels are supported"))
        .collect()
}

/// `#M(F_q)` for the reductive group with the given local factors: `q^dim ∏ (factor)`.
pub fn finite_group_order(td: &TypeData, q: u64, inert: bool) -> BigUint {
    let qb = BigInt::from(q);
    // q^N with N = |Φ+| = (dim - rank)/2
    let mut n = qb.pow(((td.dim - td.exponents.len() as i64) / 2) as u32);
    for &(d, k) in &td.factors {
        let qd = qb.pow(d as u32);
        n *= match (k, inert) {
            (FactorKind::Plain, _) | (FactorKind::Sign, false) => qd - 1,
            (FactorKind::Sign, true) => qd + 1,
            (FactorKind::CubePair, false) => (&qd - 1) * (&qd - 1),
            (FactorKind::CubePair, true) => &qd * &qd + &qd + 1,
        };
    }
    n.to_biguint().expect("group orders are positive")
}

/// Data of the pair `(k, l)` and the places where the lattice is not hyperspecial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeScenario {
    #[serde(rename = "type")]
    pub type_label: String,
    pub q_k: u64,
    pub g_k: u32,
    /// L-polynomial of `k`; may be omitted in genus 0.
    #[serde(default)]
    pub l_poly_k: Option<Vec<i64>>,
    /// Defaults to `q_k^[l:k]` (constant field extension).
    #[serde(default)]
    pub q_l: Option<u64>,
    /// Defaults to `g_k`.
    #[serde(default)]
    pub g_l: Option<u32>,
    #[serde(default)]
    pub ramified_degrees: Vec<u32>,
    /// Factors `e'(p)` at non-hyperspecial places, as rationals like `"7/2"`.
    #[serde(default)]
    pub local_overrides: Vec<String>,
    /// Tamagawa number, `"1"` by default.
    #[serde(default)]
    pub tau: Option<String>,
}

/// Scenario with defaults filled in and consistency checked.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub td: TypeData,
    pub q_k: u64,
    pub g_k: u32,
    pub q_l: u64,
    pub g_l: u32,
    /// `q_l = q_k^[l:k]`.
    pub constant_field: bool,
    pub zeta_k: Option<CurveZeta>,
    pub ramified: Vec<u32>,
    pub overrides: Vec<BigRational>,
    pub tau: BigRational,
}

fn parse_rational(s: &str, what: &str) -> Result<BigRational, ArithError> {
    s.trim().parse::<BigRational>().map_err(|_| {
        ArithError::InconsistentScenario(format!("{what}: {s:?} is not a rational number"))
    })
}

impl VolumeScenario {
    pub fn resolve(&self) -> Result<Resolved, ArithError> {
        let td = type_data(&self.type_label)?;
        let bad = |m: String| ArithError::InconsistentScenario(m);
        if prime_power(self.q_k).is_none() {
            return Err(bad(format!("q_k = {} is not a prime power", self.q_k)));
        }
        let deg = td.degree;
        let q_l = self.q_l.unwrap_or(self.q_k.pow(deg));
        let g_l = self.g_l.unwrap_or(self.g_k);
        let constant_field = q_l == self.q_k.pow(deg);
        if deg == 1 && (q_l != self.q_k || g_l != self.g_k) {
            return Err(bad(
                "for an inner form l = k, so q_l = q_k and g_l = g_k".into()
            ));
        }
        if deg > 1 && !constant_field && q_l != self.q_k {
            return Err(bad(format!("q_l = {q_l} must be q_k or q_k^{deg}")));
        }
        if deg > 1 && constant_field && g_l != self.g_k {
            return Err(bad("a constant field extension keeps the genus".into()));
        }
        if self.ramified_degrees.contains(&0) {
            return Err(bad("place degrees are at least 1".into()));
        }
        let zeta_k = match (&self.l_poly_k, self.g_k) {
            (Some(p), g) => {
                Some(CurveZeta::from_coefficients(self.q_k, g, p).map_err(|e| bad(e.to_string()))?)
            }
            (None, 0) => {
                Some(CurveZeta::projective_line(self.q_k).map_err(|e| bad(e.to_string()))?)
            }
            (None, _) => None,
        };
        let overrides = self
            .local_overrides
            .iter()
            .map(|s| parse_rational(s, "local override"))
            .collect::<Result<_, _>>()?;
        let tau = match &self.tau {
            Some(s) => parse_rational(s, "tau")?,
            None => BigRational::one(),
        };
        Ok(Resolved {
            td,
            q_k: self.q_k,
            g_k: self.g_k,
            q_l,
            g_l,
            constant_field,
            zeta_k,
            ramified: self.ramified_degrees.clone(),
            overrides,
            tau,
        })
    }
}

/// Natural log of a positive rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    fn ln_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits < 1000 {
            return n.to_f64().unwrap().ln();
        }
        let shift = bits - 64;
        (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
    ln_int(x.numer()) - ln_int(x.denom())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BReport {
    /// Exact value as `"num/den"`.
    pub value: String,
    /// `log_{q_k} B`, exact when `q_l` is a power of `q_k` (always, for supported scenarios).
    pub log_qk: String,
    pub log_qk_f64: f64,
}

/// `B = q_k^{(g_k-1) dim} (q_l^{g_l-1} / q_k^{(g_k-1)[l:k]})^s`, with `log_{q_k} B`.
pub fn b_of_g(sc: &Resolved) -> (BigRational, BReport) {
    let td = &sc.td;
    let gk = sc.g_k as i64 - 1;
    let gl = sc.g_l as i64 - 1;
    let f = if sc.q_l == sc.q_k {
        1
    } else {
        td.degree as i64
    };
    let ex = gk * td.dim + td.s * (gl * f - gk * td.degree as i64);
    let v = qpow(sc.q_k, ex);
    let rep = BReport {
        value: v.to_string(),
        log_qk: ex.to_string(),
        log_qk_f64: ex as f64,
    };
    (v, rep)
}

/// Fixed-point reals with `FRAC` fractional bits.
mod fixed {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};

    pub const FRAC: u64 = 320;

    pub fn one() -> BigInt {
        BigInt::one() << FRAC
    }

    pub fn mul(a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> FRAC
    }

    /// `1 / m` for a positive integer `m`.
    pub fn recip(m: &BigInt) -> BigInt {
        one() / m
    }

    /// `sum_k c(k) y^k / k` for a small `y >= 0`.
    pub fn log_series(y: &BigInt, c: impl Fn(u64) -> i64) -> BigInt {
        let mut acc = BigInt::zero();
        let mut yk = y.clone();
        let mut k = 1u64;
        while !yk.is_zero() {
            acc += &yk * BigInt::from(c(k)) / BigInt::from(k);
            yk = mul(&yk, y);
            k += 1;
        }
        acc
    }

    pub fn exp(x: &BigInt) -> BigInt {
        let mut acc = one();
        let mut term = one();
        let mut k = 1u64;
        loop {
            term = mul(&term, x) / BigInt::from(k);
            if term.is_zero() {
                return acc;
            }
            acc += &term;
            k += 1;
        }
    }

    pub fn to_f64(x: &BigInt) -> f64 {
        use num_traits::ToPrimitive;
        let s = (x >> (FRAC - 60)).to_f64().unwrap();
        s / (1u64 << 60) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerReport {
    pub type_label: String,
    pub cutoff: u32,
    /// Places of each degree `1..=cutoff`.
    pub places: Vec<String>,
    pub truncated: f64,
    /// Exact partial product, when there are at most 64 places below the cutoff.
    pub truncated_exact: Option<String>,
    /// Closed form as a product of zeta values (split, or quadratic constant field extension).
    pub closed_form: Option<String>,
    pub closed_form_f64: Option<f64>,
    /// Proven bound on `|Z / Z_trunc - 1|`.
    pub tail_bound: f64,
    /// Observed `|Z_trunc - Z| / Z`.
    pub observed_gap: Option<f64>,
    pub within_tail_bound: Option<bool>,
}

fn local_factor_exact(d: i64, kind: FactorKind, deg: u32, e: u64, q: u64) -> BigRational {
    let y = qpow(q, -(d * e as i64));
    let one = BigRational::one();
    let inert = deg > 1 && !e.is_multiple_of(deg as u64);
    match (kind, inert) {
        (FactorKind::Plain, _) | (FactorKind::Sign, false) => (&one - &y).recip(),
        (FactorKind::Sign, true) => (&one + &y).recip(),
        (FactorKind::CubePair, false) => (&one - &y).pow(2).recip(),
        (FactorKind::CubePair, true) => (&one + &y + &y * &y).recip(),
    }
}

/// Coefficient `c_k` in `-ln(local factor^{-1}) = sum c_k y^k / k`.
fn log_coefficient(kind: FactorKind, deg: u32, e: u64, k: u64) -> i64 {
    let inert = deg > 1 && !e.is_multiple_of(deg as u64);
    match (kind, inert) {
        (FactorKind::Plain, _) | (FactorKind::Sign, false) => 1,
        (FactorKind::Sign, true) => {
            if k.is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
        (FactorKind::CubePair, false) => 2,
        (FactorKind::CubePair, true) => {
            if k.is_multiple_of(3) {
                2
            } else {
                -1
            }
        }
    }
}

/// Truncated product `∏_{deg p <= cutoff} e_qs(p)`, its closed form and a tail bound.
pub fn euler_z(
    sc: &Resolved,
    cutoff: u32,
) -> Result<(Option<BigRational>, EulerReport), ArithError> {
    let td = &sc.td;
    let zeta = sc.zeta_k.as_ref().ok_or_else(|| {
        ArithError::Unsupported("the Euler product needs the L-polynomial of k".into())
    })?;
    if td.degree > 1 && !sc.constant_field {
        return Err(ArithError::Unsupported(
            "place splitting in a geometric extension is not determined by the zeta function of k"
                .into(),
        ));
    }
    if td.label.starts_with('6') {
        return Err(ArithError::Unsupported(
            "no order formula for the non-Galois triality form".into(),
        ));
    }
    let q = sc.q_k;
    let places = zeta.place_counts(cutoff as usize);
    let total_places: BigInt = places.iter().sum();
    let mut log_fixed = BigInt::zero();
    for (i, n_e) in places.iter().enumerate() {
        let e = i as u64 + 1;
        for &(d, kind) in &td.factors {
            let y = fixed::recip(&BigInt::from(q).pow((d as u64 * e) as u32));
            log_fixed += n_e * fixed::log_series(&y, |k| log_coefficient(kind, td.degree, e, k));
        }
    }
    let trunc_fixed = fixed::exp(&log_fixed);
    let truncated_exact = (total_places <= BigInt::from(64)).then(|| {
        let mut v = BigRational::one();
        for (i, n_e) in places.iter().enumerate() {
            for &(d, kind) in &td.factors {
                v *= local_factor_exact(d, kind, td.degree, i as u64 + 1, q)
                    .pow(n_e.to_i32().unwrap());
            }
        }
        v
    });
    let closed = if td.degree == 1 || (td.degree == 2 && sc.constant_field) {
        let mut v = BigRational::one();
        for &(d, kind) in &td.factors {
            v *= match kind {
                FactorKind::Sign => zeta.z_at(&-qpow(q, -d)),
                _ => zeta.zeta(d),
            };
        }
        Some(v)
    } else {
        None
    };
    // tail: n_e <= (q^e + 1 + 2g q^{e/2}) / e and |ln(1 - z)| <= |z| / (1 - |z|)
    let (qf, c, g) = (q as f64, cutoff as f64, zeta.genus() as f64);
    let geo = |r: f64| r.powf(c + 1.0) / (1.0 - r);
    let mut tail = 0.0;
    for &(d, kind) in &td.factors {
        let mult = if kind == FactorKind::CubePair {
            2.0
        } else {
            1.0
        };
        let d = d as f64;
        let lead = 1.0 / ((c + 1.0) * (1.0 - qf.powf(-d * (c + 1.0))));
        tail += mult
            * lead
            * (geo(qf.powf(1.0 - d)) + geo(qf.powf(-d)) + 2.0 * g * geo(qf.powf(0.5 - d)));
    }
    let tail_bound = tail.exp_m1();
    let (closed_f64, gap) = match &closed {
        Some(z) => {
            let zf = (z.numer() << fixed::FRAC) / z.denom();
            let diff = (&trunc_fixed - &zf).abs();
            let gap = BigRational::new(diff, zf.clone());
            (Some(fixed::to_f64(&zf)), Some(gap.to_f64().unwrap()))
        }
        None => (None, None),
    };
    let report = EulerReport {
        type_label: td.label.clone(),
        cutoff,
        places: places.iter().map(|n| n.to_string()).collect(),
        truncated: fixed::to_f64(&trunc_fixed),
        truncated_exact: truncated_exact.as_ref().map(|v| v.to_string()),
        closed_form: closed.as_ref().map(|v| v.to_string()),
        closed_form_f64: closed_f64,
        tail_bound,
        observed_gap: gap,
        within_tail_bound: gap.map(|x| x <= tail_bound),
    };
    Ok((closed, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovolumeReport {
    pub b: BReport,
    pub z: String,
    pub overrides: Vec<String>,
    pub tau: String,
    pub value: String,
    pub ln_value: f64,
    pub log_qk_value: f64,
}

/// `vol = τ B Z ∏ e'(p)`, with `Z` in closed form.
pub fn covolume(sc: &Resolved) -> Result<(BigRational, CovolumeReport), ArithError> {
    let (b, brep) = b_of_g(sc);
    let (closed, _) = euler_z(sc, 1)?;
    let z = closed.ok_or_else(|| {
        ArithError::Unsupported(format!("no closed form for Z of {}", sc.td.label))
    })?;
    let mut v = &sc.tau * &b * &z;
    for e in &sc.overrides {
        v *= e;
    }
    let ln = ln_rational(&v);
    let rep = CovolumeReport {
        b: brep,
        z: z.to_string(),
        overrides: sc.overrides.iter().map(|x| x.to_string()).collect(),
        tau: sc.tau.to_string(),
        value: v.to_string(),
        ln_value: ln,
        log_qk_value: ln / (sc.q_k as f64).ln(),
    };
    Ok((v, rep))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InequalityCase {
    /// `l = k`.
    Inner,
    /// `q_l = q_k^2`: constant field extension, `g_l = g_k`.
    ConstantQuadratic,
    /// `q_l = q_k^3`.
    ConstantCubic,
    /// `q_l = q_k`.
    SameConstants,
}

/// Exponent ledger of the covolume lower bound, up to an unresolved constant factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityLedger {
    pub type_label: String,
    pub case: InequalityCase,
    pub sigma7: Option<i64>,
    pub sigma8: Option<i64>,
    /// Exponent of `q_k` coming from `g_k (dim - [l:k] s')`.
    pub gk_term: i64,
    /// Exponent of `q_l` coming from `g_l s'`.
    pub gl_term: i64,
    /// `log_{q_k}` of the class-number substitution `(sqrt q_l + 1)^{-2 g_l ε'}`.
    pub weil_factor_log_qk: f64,
    /// The case's main exponent of `q` (with `q = q_k` unless stated otherwise).
    pub main_exponent: String,
    /// For outer `A_r` with `r` even: `g_l((r+1)^2 - 5)/2`.
    pub rearranged_exponent: Option<i64>,
    pub sigma: String,
    /// `σ sum deg p` over ramified places.
    pub ramified_exponent: String,
    pub total_log_qk: f64,
    /// `g_l - 1 >= [l:k](g_k - 1)`, required of an actual extension.
    pub riemann_hurwitz_ok: bool,
    pub unresolved_constant: String,
}

/// Ledger with a caller-chosen `σ` (use 1 when unknown).
pub fn main_inequality_lower_bound(sc: &Resolved, sigma: &BigRational) -> InequalityLedger {
    let td = &sc.td;
    let (gk, gl) = (sc.g_k as i64, sc.g_l as i64);
    let deg = td.degree as i64;
    let eps_p = if td.degree == 1 { 1 } else { td.epsilon };
    let case = match (td.degree, sc.q_l == sc.q_k) {
        (1, _) => InequalityCase::Inner,
        (_, true) => InequalityCase::SameConstants,
        (2, false) => InequalityCase::ConstantQuadratic,
        _ => InequalityCase::ConstantCubic,
    };
    let gk_term = gk * (td.dim - deg * td.s_prime);
    let gl_term = gl * td.s_prime;
    let (qk, ql) = (sc.q_k as f64, sc.q_l as f64);
    let weil = -2.0 * gl as f64 * eps_p as f64 * (ql.sqrt() + 1.0).ln() / qk.ln();
    let log_ql = ql.ln() / qk.ln();
    let (main, main_f64) = match case {
        InequalityCase::Inner => (format!("{}", gk * td.dim), (gk * td.dim) as f64),
        InequalityCase::SameConstants => {
            let e = gk * td.sigma7.unwrap() + gl * td.sigma8.unwrap();
            (format!("{e}"), e as f64)
        }
        _ => {
            let e = gk_term as f64 + gl_term as f64 * log_ql;
            (format!("{gk_term} + {gl_term} log_qk(q_l)"), e)
        }
    };
    let rearranged = (td.family == Family::A
        && td.degree == 2
        && td.rank.is_multiple_of(2)
        && case == InequalityCase::SameConstants)
        .then(|| {
            let r = td.rank as i64;
            gl * ((r + 1) * (r + 1) - 5) / 2
        });
    let ram: u64 = sc.ramified_degrees_sum();
    let ram_exp = sigma * rat(BigInt::from(ram));
    // the SameConstants exponent already absorbs the class-number factor via sqrt q + 1 <= q
    let weil_used = if case == InequalityCase::SameConstants {
        0.0
    } else {
        weil
    };
    let total = main_f64 + weil_used + ram_exp.to_f64().unwrap();
    InequalityLedger {
        type_label: td.label.clone(),
        case,
        sigma7: td.sigma7,
        sigma8: td.sigma8,
        gk_term,
        gl_term,
        weil_factor_log_qk: weil,
        main_exponent: main,
        rearranged_exponent: rearranged,
        sigma: sigma.to_string(),
        ramified_exponent: ram_exp.to_string(),
        total_log_qk: total,
        riemann_hurwitz_ok: gl > deg * (gk - 1),
        unresolved_constant: "multiplicative constant depending only on the ambient group".into(),
    }
}

impl Resolved {
    fn ramified_degrees_sum(&self) -> u64 {
        self.ramified.iter().map(|&d| d as u64).sum()
    }
}

//! Exact arithmetic in cyclotomic fields `Q(zeta_N)`.
//!
//! An element of order `N` is stored as the residue of a rational polynomial
//! modulo the cyclotomic polynomial `Phi_N`, so equality of two values of the
//! same order is a plain coefficient comparison. Mixed-order arithmetic embeds
//! both operands into the field of order `lcm(N1, N2)` first.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on supported cyclotomic orders.
pub const DEFAULT_ORDER_LIMIT: u32 = 240;

static ORDER_LIMIT: AtomicU32 = AtomicU32::new(DEFAULT_ORDER_LIMIT);

/// Largest order accepted by constructors.
pub fn order_limit() -> u32 {
    ORDER_LIMIT.load(AtomicOrdering::Relaxed)
}

/// Changes the largest accepted order. Existing values are unaffected.
pub fn set_order_limit(limit: u32) {
    ORDER_LIMIT.store(limit.max(1), AtomicOrdering::Relaxed);
}

fn check_order(n: u32) -> Result<()> {
    if n == 0 || n > order_limit() {
        return Err(Error::OrderOutOfRange(n));
    }
    Ok(())
}

pub fn euler_phi(n: u32) -> u32 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

type PolyCache = Mutex<HashMap<u32, Arc<Vec<i64>>>>;

fn poly_cache() -> &'static PolyCache {
    static CACHE: OnceLock<PolyCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Integer coefficients of `Phi_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<i64>> {
    if let Some(p) = poly_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let div = cyclotomic_polynomial(d);
            num = exact_int_div(&num, &div);
        }
    }
    let p = Arc::new(num);
    poly_cache().lock().unwrap().insert(n, p.clone());
    p
}

// Division by a monic integer polynomial that is known to be exact.
fn exact_int_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qlen = rem.len() - dd;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// An exact element of `Q(zeta_N)`.
#[derive(Clone, Debug)]
pub struct CyclotomicNumber {
    order: u32,
    coeffs: Vec<BigRational>,
}

fn normalize_order(n: u32) -> u32 {
    // Q(zeta_2) = Q
    if n == 2 {
        1
    } else {
        n
    }
}

impl CyclotomicNumber {
    /// Builds `sum coeffs[i] * zeta_N^i`, reducing modulo `Phi_N`.
    pub fn from_coeffs(order: u32, coeffs: Vec<BigRational>) -> Result<Self> {
        check_order(order)?;
        let order = if order == 2 {
            // coefficients are in powers of -1
            let v = coeffs
                .into_iter()
                .enumerate()
                .fold(BigRational::zero(), |acc, (i, c)| {
                    if i % 2 == 0 {
                        acc + c
                    } else {
                        acc - c
                    }
                });
            return Ok(Self::rational(v));
        } else {
            order
        };
        Ok(Self::reduced(order, coeffs))
    }

    fn reduced(order: u32, mut coeffs: Vec<BigRational>) -> Self {
        let phi = euler_phi(order) as usize;
        if coeffs.len() > phi {
            let modulus = cyclotomic_polynomial(order);
            for i in (phi..coeffs.len()).rev() {
                let c = std::mem::take(&mut coeffs[i]);
                if c.is_zero() {
                    continue;
                }
                for (j, &m) in modulus[..phi].iter().enumerate() {
                    if m != 0 {
                        coeffs[i - phi + j] -= &c * BigRational::from_integer(BigInt::from(m));
                    }
                }
            }
            coeffs.truncate(phi);
        }
        coeffs.resize(phi, BigRational::zero());
        CyclotomicNumber { order, coeffs }
    }

    pub fn rational(q: BigRational) -> Self {
        CyclotomicNumber {
            order: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    /// `zeta_N^k` for a primitive `N`-th root of unity `zeta_N = exp(2 pi i / N)`.
    pub fn zeta_pow(order: u32, k: i64) -> Result<Self> {
        check_order(order)?;
        let e = k.rem_euclid(order as i64) as usize;
        if order <= 2 {
            return Ok(Self::from_integer(if e == 0 { 1 } else { -1 }));
        }
        let mut coeffs = vec![BigRational::zero(); e + 1];
        coeffs[e] = BigRational::one();
        Ok(Self::reduced(order, coeffs))
    }

    pub fn zeta(order: u32) -> Result<Self> {
        Self::zeta_pow(order, 1)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The value as a rational number, when it lies in `Q`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// Re-expresses `self` in the field of order `m`, which must be a multiple
    /// of the current order.
    pub fn embed(&self, m: u32) -> Result<Self> {
        let m = normalize_order(m);
        if m == self.order {
            return Ok(self.clone());
        }
        check_order(m)?;
        if !m.is_multiple_of(self.order) {
            return Err(Error::Schema(format!(
                "cannot embed order {} into order {m}",
                self.order
            )));
        }
        if self.order == 1 {
            return Ok(Self::reduced(m, vec![self.coeffs[0].clone()]));
        }
        let step = (m / self.order) as usize;
        let mut coeffs = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * step] = c.clone();
        }
        Ok(Self::reduced(m, coeffs))
    }

    fn unify(a: &Self, b: &Self) -> (Self, Self) {
        let m = lcm(a.order, b.order);
        // Both orders already passed the limit check; the lcm may exceed it,
        // in which case arithmetic still proceeds exactly.
        let emb = |x: &Self| -> Self {
            if x.order == m {
                x.clone()
            } else if x.order == 1 {
                Self::reduced(m, vec![x.coeffs[0].clone()])
            } else {
                let step = (m / x.order) as usize;
                let mut coeffs = vec![BigRational::zero(); (x.coeffs.len() - 1) * step + 1];
                for (i, c) in x.coeffs.iter().enumerate() {
                    coeffs[i * step] = c.clone();
                }
                Self::reduced(m, coeffs)
            }
        };
        (emb(a), emb(b))
    }

    fn add_ref(&self, other: &Self) -> Self {
        if self.order == other.order {
            let coeffs = self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect();
            return CyclotomicNumber {
                order: self.order,
                coeffs,
            };
        }
        if other.order == 1 {
            let mut r = self.clone();
            r.coeffs[0] += &other.coeffs[0];
            return r;
        }
        if self.order == 1 {
            let mut r = other.clone();
            r.coeffs[0] += &self.coeffs[0];
            return r;
        }
        let (a, b) = Self::unify(self, other);
        a.add_ref(&b)
    }

    fn neg_ref(&self) -> Self {
        CyclotomicNumber {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    fn sub_ref(&self, other: &Self) -> Self {
        if self.order == other.order {
            let coeffs = self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect();
            return CyclotomicNumber {
                order: self.order,
                coeffs,
            };
        }
        self.add_ref(&other.neg_ref())
    }

    fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return CyclotomicNumber {
                order: self.order,
                coeffs: vec![BigRational::zero(); self.coeffs.len()],
            };
        }
        CyclotomicNumber {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if other.order == 1 {
            return self.scale(&other.coeffs[0]);
        }
        if self.order == 1 {
            return other.scale(&self.coeffs[0]);
        }
        if self.order != other.order {
            let (a, b) = Self::unify(self, other);
            return a.mul_ref(&b);
        }
        let n = self.coeffs.len();
        let mut prod = vec![BigRational::zero(); 2 * n - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Self::reduced(self.order, prod)
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Phi_N`.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(q) = self.as_rational() {
            return Ok(Self::reduced(self.order, vec![q.recip()]));
        }
        let modulus: Vec<BigRational> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        let u = poly_inverse_mod(&self.coeffs, &modulus);
        Ok(Self::reduced(self.order, u))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul_ref(&other.inv()?))
    }

    /// `self^k` by square-and-multiply; negative `k` inverts first.
    pub fn pow(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_ref(&sq);
            }
        }
        Ok(acc)
    }

    /// Smallest `k >= 1` with `self^k = 1`, or `None` when `self` is not a root of unity.
    pub fn root_of_unity_order(&self) -> Option<u32> {
        RootOfUnity::from_cyclotomic(self).map(|r| r.order())
    }

    /// Complex conjugate, i.e. the Galois action `zeta -> zeta^-1`.
    pub fn conj(&self) -> Self {
        if self.order == 1 {
            return self.clone();
        }
        let n = self.order as usize;
        let mut coeffs = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(n - i) % n] += c;
        }
        Self::reduced(self.order, coeffs)
    }
}

// Inverse of `a` modulo `m` in Q[x]; `a` must be coprime to `m`.
fn poly_inverse_mod(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    // invariant: s_i * a == r_i (mod m)
    let mut r0 = trim(m.to_vec());
    let mut r1 = trim(a.to_vec());
    let mut s0: Vec<BigRational> = vec![BigRational::zero()];
    let mut s1: Vec<BigRational> = vec![BigRational::one()];
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_divrem(&r0, &r1);
        let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    // r0 is a nonzero constant
    let c = r0[0].recip();
    s0.into_iter().map(|x| x * &c).collect()
}

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    if p.is_empty() {
        p.push(BigRational::zero());
    }
    p
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    if rem.len() <= db {
        return (vec![BigRational::zero()], trim(rem));
    }
    let lead_inv = b[db].recip();
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    for i in (0..quot.len()).rev() {
        let c = &rem[i + db] * &lead_inv;
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                rem[i + j] -= &c * bj;
            }
        }
        quot[i] = c;
    }
    rem.truncate(db.max(1));
    (trim(quot), trim(rem))
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

impl PartialEq for CyclotomicNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = Self::unify(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CyclotomicNumber {}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&CyclotomicNumber> for &CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
                self.$inner(rhs)
            }
        }
        impl $trait<CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: CyclotomicNumber) -> CyclotomicNumber {
                self.$inner(&rhs)
            }
        }
        impl $trait<&CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $method(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
                self.$inner(rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

/// Panics on division by zero; use [`CyclotomicNumber::checked_div`] otherwise.
impl Div<&CyclotomicNumber> for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn div(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        self.checked_div(rhs).expect("division by zero")
    }
}

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        self.neg_ref()
    }
}

impl Neg for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        self.neg_ref()
    }
}

/// The four arithmetic operations, for callers that pick one at runtime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(a: &CyclotomicNumber, b: &CyclotomicNumber, op: ArithOp) -> Result<CyclotomicNumber> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

impl fmt::Display for CyclotomicNumber {
    /// Writes `c0 + c1*zeta(N) + c2*zeta(N)^2 + ...`, omitting zero terms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if wrote {
                f.write_str(if neg { " - " } else { " + " })?;
            } else if neg {
                f.write_str("-")?;
            }
            if i == 0 {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write!(f, "zeta({})", self.order)?;
                if i > 1 {
                    write!(f, "^{i}")?;
                }
            }
            wrote = true;
        }
        if !wrote {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn parse_zeta(s: &str) -> Result<(u32, i64)> {
    let bad = || Error::Schema(format!("malformed root of unity literal `{s}`"));
    let rest = s.strip_prefix("zeta(").ok_or_else(bad)?;
    let close = rest.find(')').ok_or_else(bad)?;
    let order: u32 = rest[..close].trim().parse().map_err(|_| bad())?;
    let tail = rest[close + 1..].trim();
    let k = if tail.is_empty() {
        1
    } else {
        let e = tail.strip_prefix('^').ok_or_else(bad)?.trim();
        let e = e
            .strip_prefix('(')
            .and_then(|e| e.strip_suffix(')'))
            .unwrap_or(e);
        e.parse().map_err(|_| bad())?
    };
    Ok((order, k))
}

fn parse_term(t: &str) -> Result<CyclotomicNumber> {
    let t = t.trim();
    let bad = || Error::Schema(format!("malformed cyclotomic term `{t}`"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(pos) = t.find("zeta(") {
        let (coef, z) = t.split_at(pos);
        let coef = coef.trim().trim_end_matches('*').trim();
        let (order, k) = parse_zeta(z.trim())?;
        let zeta = CyclotomicNumber::zeta_pow(order, k)?;
        match coef {
            "" | "+" => return Ok(zeta),
            "-" => return Ok(-zeta),
            _ => {}
        }
        let q: BigRational = coef.parse().map_err(|_| bad())?;
        return Ok(zeta.scale(&q));
    }
    let q: BigRational = t.parse().map_err(|_| bad())?;
    Ok(CyclotomicNumber::rational(q))
}

impl FromStr for CyclotomicNumber {
    type Err = Error;

    /// Accepts `zeta(N)^k`, `-1`, integers, `p/q`, and sums of such terms
    /// with rational coefficients such as `1/2 - 3*zeta(12)^2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Schema("empty cyclotomic literal".into()));
        }
        let mut acc = CyclotomicNumber::zero();
        let mut sign_neg = false;
        let mut start = 0;
        let bytes = s.as_bytes();
        let mut depth = 0usize;
        let mut i = 0;
        let mut prev_nonspace: Option<u8> = None;
        if s.matches('(').count() != s.matches(')').count() {
            return Err(Error::Schema(format!("unbalanced parentheses in `{s}`")));
        }
        while i <= bytes.len() {
            let at_end = i == bytes.len();
            let c = if at_end { b'+' } else { bytes[i] };
            match c {
                b'(' => depth += 1,
                b')' => depth = depth.saturating_sub(1),
                b'+' | b'-' if depth == 0 => {
                    // a sign directly after '^' or '*' or '/' belongs to the term
                    let binary =
                        !matches!(prev_nonspace, None | Some(b'^') | Some(b'*') | Some(b'/'));
                    if binary || at_end {
                        let term = &s[start..i];
                        if !term.trim().is_empty() {
                            let v = parse_term(term)?;
                            acc = if sign_neg { acc - v } else { acc + v };
                        } else if !at_end && prev_nonspace.is_some() {
                            return Err(Error::Schema(format!(
                                "malformed cyclotomic literal `{s}`"
                            )));
                        }
                        sign_neg = c == b'-';
                        start = i + 1;
                    }
                }
                _ => {}
            }
            if !at_end && !bytes[i].is_ascii_whitespace() {
                prev_nonspace = Some(bytes[i]);
            }
            i += 1;
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
struct CanonicalForm {
    order: u32,
    coeffs: Vec<String>,
}

impl Serialize for CyclotomicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CanonicalForm {
            order: self.order,
            coeffs: self.coeffs.iter().map(ToString::to_string).collect(),
        }
        .serialize(serializer)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyForm {
    Canonical(CanonicalForm),
    Text(String),
    Int(i64),
}

impl<'de> Deserialize<'de> for CyclotomicNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match AnyForm::deserialize(deserializer)? {
            AnyForm::Canonical(c) => {
                let coeffs = c
                    .coeffs
                    .iter()
                    .map(|s| {
                        s.parse::<BigRational>()
                            .map_err(|_| D::Error::custom(format!("bad rational `{s}`")))
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                CyclotomicNumber::from_coeffs(c.order, coeffs).map_err(D::Error::custom)
            }
            AnyForm::Text(s) => s.parse().map_err(D::Error::custom),
            AnyForm::Int(n) => Ok(CyclotomicNumber::from_integer(n)),
        }
    }
}

/// A root of unity `exp(2 pi i * num / den)`, stored as a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    num: u32,
    den: u32,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };
    pub const MINUS_ONE: RootOfUnity = RootOfUnity { num: 1, den: 2 };

    /// `zeta_order^k`.
    pub fn new(order: u32, k: i64) -> Self {
        assert!(order > 0, "root of unity order must be positive");
        let num = k.rem_euclid(order as i64) as u32;
        let g = num.gcd(&order);
        if num == 0 {
            return Self::ONE;
        }
        RootOfUnity {
            num: num / g,
            den: order / g,
        }
    }

    pub fn order(&self) -> u32 {
        self.den
    }

    /// Exponent `k` with `self = zeta_order^k`.
    pub fn exponent(&self) -> u32 {
        self.num
    }

    /// Exponent of `self` as a power of `zeta_m`; `m` must be a multiple of the order.
    pub fn exponent_in(&self, m: u32) -> Option<u32> {
        m.is_multiple_of(self.den)
            .then(|| self.num * (m / self.den))
    }

    pub fn mul(self, other: Self) -> Self {
        let den = lcm(self.den, other.den);
        let k =
            self.num as i64 * (den / self.den) as i64 + other.num as i64 * (den / other.den) as i64;
        Self::new(den, k)
    }

    pub fn inv(self) -> Self {
        Self::new(self.den, -(self.num as i64))
    }

    pub fn pow(self, k: i64) -> Self {
        Self::new(self.den, (self.num as i64) * k)
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// The square root `exp(pi i * num / den)`, i.e. `zeta_(2N)^k` for `zeta_N^k`.
    pub fn canonical_sqrt(self) -> Self {
        Self::new(2 * self.den, self.num as i64)
    }

    /// Position on the unit circle as a fraction of a full turn, in `[0, 1)`.
    pub fn turn(&self) -> (u32, u32) {
        (self.num, self.den)
    }

    pub fn to_cyclotomic(self) -> CyclotomicNumber {
        CyclotomicNumber::zeta_pow(self.den, self.num as i64)
            .unwrap_or_else(|_| panic!("root of unity order {} exceeds order limit", self.den))
    }

    /// Recognizes `a` as a root of unity. The roots of unity inside `Q(zeta_N)`
    /// are exactly the `lcm(2, N)`-th roots.
    pub fn from_cyclotomic(a: &CyclotomicNumber) -> Option<Self> {
        if a.is_zero() {
            return None;
        }
        if let Some(q) = a.as_rational() {
            return if q.is_one() {
                Some(Self::ONE)
            } else if *q == -BigRational::one() {
                Some(Self::MINUS_ONE)
            } else {
                None
            };
        }
        let n = a.order();
        // A root of unity has exactly one nonzero coefficient modulo x^N - 1
        // only for some orders; test candidates directly instead.
        let m = lcm(2, n);
        for k in 0..m {
            let z = if m == n {
                CyclotomicNumber::zeta_pow(n, k as i64).ok()?
            } else {
                // zeta_{2n}^k for odd n equals -zeta_n^{k'} with k' = k(n+1)/2
                let sign = if k % 2 == 0 { 1 } else { -1 };
                let kk = (k as i64 * ((n as i64 + 1) / 2)).rem_euclid(n as i64);
                let z = CyclotomicNumber::zeta_pow(n, kk).ok()?;
                if sign < 0 {
                    -z
                } else {
                    z
                }
            };
            if z == *a {
                return Some(Self::new(m, k as i64));
            }
        }
        None
    }
}

impl PartialOrd for RootOfUnity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootOfUnity {
    /// By order, then exponent.
    fn cmp(&self, other: &Self) -> Ordering {
        (self.den, self.num).cmp(&(other.den, other.num))
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => f.write_str("1"),
            (1, 2) => f.write_str("-1"),
            (1, d) => write!(f, "zeta({d})"),
            (k, d) => write!(f, "zeta({d})^{k}"),
        }
    }
}

impl FromStr for RootOfUnity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "1" => return Ok(Self::ONE),
            "-1" => return Ok(Self::MINUS_ONE),
            _ => {}
        }
        if let Some(rest) = t.strip_prefix('-') {
            let r: RootOfUnity = rest.parse()?;
            return Ok(r.mul(Self::MINUS_ONE));
        }
        if t.starts_with("zeta(") {
            let (order, k) = parse_zeta(t)?;
            if order == 0 {
                return Err(Error::Schema(format!("zero order in `{s}`")));
            }
            return Ok(Self::new(order, k));
        }
        let v: CyclotomicNumber = t.parse()?;
        Self::from_cyclotomic(&v).ok_or_else(|| Error::NotRootOfUnity(t.to_string()))
    }
}

impl Serialize for RootOfUnity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RootOfUnity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(deserializer)?;
        match v {
            serde_json::Value::String(s) => s.parse().map_err(D::Error::custom),
            serde_json::Value::Number(n) if n.as_i64() == Some(1) => Ok(Self::ONE),
            serde_json::Value::Number(n) if n.as_i64() == Some(-1) => Ok(Self::MINUS_ONE),
            other => {
                let c: CyclotomicNumber =
                    serde_json::from_value(other).map_err(D::Error::custom)?;
                Self::from_cyclotomic(&c)
                    .ok_or_else(|| D::Error::custom(format!("{c} is not a root of unity")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: u32, k: i64) -> CyclotomicNumber {
        CyclotomicNumber::zeta_pow(n, k).unwrap()
    }

    fn q(a: i64, b: i64) -> CyclotomicNumber {
        CyclotomicNumber::rational(BigRational::new(a.into(), b.into()))
    }

    #[test]
    fn cube_roots_sum_to_zero() {
        let s = CyclotomicNumber::one() + z(3, 1) + z(3, 2);
        assert!(s.is_zero());
    }

    #[test]
    fn eta_squared_is_zeta6() {
        let eta = z(12, 1);
        assert_eq!(&eta * &eta, z(6, 1));
        assert_eq!((&eta * &eta).order(), 12);
    }

    #[test]
    fn half_over_half() {
        assert_eq!(
            q(1, 2).checked_div(&q(1, 2)).unwrap(),
            CyclotomicNumber::one()
        );
        assert!(matches!(
            q(1, 2).checked_div(&CyclotomicNumber::zero()),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn orders_of_roots() {
        assert_eq!(
            CyclotomicNumber::from_integer(-1).root_of_unity_order(),
            Some(2)
        );
        assert_eq!(z(8, 3).root_of_unity_order(), Some(8));
        assert_eq!(
            CyclotomicNumber::from_integer(2).root_of_unity_order(),
            None
        );
        // -zeta_3 is a primitive 6th root
        assert_eq!((-z(3, 1)).root_of_unity_order(), Some(6));
        assert_eq!((z(12, 1) + z(12, 2)).root_of_unity_order(), None);
    }

    #[test]
    fn powers() {
        assert!(z(6, 1).pow(6).unwrap().is_one());
        assert!(z(12, 1).pow(24).unwrap().is_one());
        // determinant of the spin-lift class eta, eta^3, eta^9, eta^11
        let det = [1, 3, 9, 11]
            .iter()
            .fold(CyclotomicNumber::one(), |acc, &k| acc * z(12, k));
        assert!(det.is_one());
        let m1 = CyclotomicNumber::from_integer(-1);
        assert_eq!(m1.pow(-1).unwrap(), m1);
        assert!(CyclotomicNumber::zero().pow(-1).is_err());
    }

    #[test]
    fn phi_vanishes_at_zeta() {
        for n in 1..=64u32 {
            let poly = cyclotomic_polynomial(n);
            let zeta = z(n, 1);
            let mut acc = CyclotomicNumber::zero();
            let mut pw = CyclotomicNumber::one();
            for &c in poly.iter() {
                acc = acc + &pw * &CyclotomicNumber::from_integer(c);
                pw = &pw * &zeta;
            }
            assert!(acc.is_zero(), "Phi_{n}(zeta_{n}) != 0");
            assert_eq!(poly.len() as u32 - 1, euler_phi(n));
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let a = q(3, 1) + z(7, 2) - q(1, 5) * z(7, 5);
        let b = a.inv().unwrap();
        assert!((&a * &b).is_one());
    }

    #[test]
    fn parse_and_display() {
        let a: CyclotomicNumber = "zeta(12)^3".parse().unwrap();
        assert_eq!(a, z(12, 3));
        let b: CyclotomicNumber = "1/2 - 3*zeta(12)^2 + zeta(12)".parse().unwrap();
        let back: CyclotomicNumber = b.to_string().parse().unwrap();
        assert_eq!(b, back);
        assert_eq!(
            "-1".parse::<CyclotomicNumber>().unwrap(),
            CyclotomicNumber::from_integer(-1)
        );
        assert_eq!("-zeta(4)".parse::<CyclotomicNumber>().unwrap(), z(4, 3));
        assert_eq!("zeta(8)^-1".parse::<CyclotomicNumber>().unwrap(), z(8, 7));
        assert!("zeta(".parse::<CyclotomicNumber>().is_err());
        assert!("1 + + 2".parse::<CyclotomicNumber>().is_err());
    }

    #[test]
    fn json_forms() {
        let a = q(1, 3) * z(5, 2) + CyclotomicNumber::from_integer(7);
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.contains("\"order\":5"));
        let back: CyclotomicNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(a, back);
        let short: CyclotomicNumber = serde_json::from_str("\"zeta(6)^5\"").unwrap();
        assert_eq!(short, z(6, 5));
        let int: CyclotomicNumber = serde_json::from_str("-1").unwrap();
        assert_eq!(int, CyclotomicNumber::from_integer(-1));
    }

    #[test]
    fn root_of_unity_basics() {
        let eta = RootOfUnity::new(12, 1);
        assert_eq!(eta.mul(eta), RootOfUnity::new(6, 1));
        assert_eq!(RootOfUnity::new(6, 1).canonical_sqrt(), eta);
        assert_eq!(RootOfUnity::new(4, 2), RootOfUnity::MINUS_ONE);
        assert_eq!(
            "zeta(12)^3".parse::<RootOfUnity>().unwrap(),
            RootOfUnity::new(4, 1)
        );
        assert_eq!(
            "-zeta(6)".parse::<RootOfUnity>().unwrap(),
            RootOfUnity::new(3, 2)
        );
        assert_eq!(RootOfUnity::new(8, 3).to_string(), "zeta(8)^3");
        assert_eq!(
            RootOfUnity::from_cyclotomic(&z(12, 5)),
            Some(RootOfUnity::new(12, 5))
        );
        assert_eq!(
            RootOfUnity::from_cyclotomic(&(-z(5, 1))),
            Some(RootOfUnity::new(10, 7))
        );
    }

    #[test]
    fn order_limit_enforced() {
        assert!(CyclotomicNumber::zeta(DEFAULT_ORDER_LIMIT + 1).is_err());
        assert!(CyclotomicNumber::zeta(DEFAULT_ORDER_LIMIT).is_ok());
    }

    #[test]
    fn conjugation_is_galois_inverse() {
        let a = z(9, 2);
        assert_eq!(a.conj(), z(9, 7));
        let b = q(2, 3) + z(12, 1);
        assert_eq!(b.conj().conj(), b);
    }
}

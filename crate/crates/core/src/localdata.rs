//! Formal local monodromy data: Jordan classes per puncture, centralizer
//! dimensions, the Euler-Poincare rigidity count, and the effect of twists,
//! tensor constructions, middle convolution and power-map pullback on Jordan
//! classes.
//!
//! Tensor-type functors are computed on "weights": a Jordan block `J(mu, l)`
//! contributes the pairs `(mu, l-1), (mu, l-3), ..., (mu, 1-l)`, i.e. the
//! eigenvalue of the semisimple part together with the weights of the `sl2`
//! acting through the unipotent part. Characters of tensor, symmetric and
//! exterior powers are computed on these pairs and decomposed back into
//! blocks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::{CyclotomicNumber, RootOfUnity};
use crate::error::{Error, Result};
use crate::linalg::{commutant_dim, GroupSpec, Matrix};

/// Multiset of Jordan blocks `(eigenvalue, size)`, kept sorted by eigenvalue
/// (order, then exponent) and, within an eigenvalue, by size descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JordanClass {
    parts: Vec<(RootOfUnity, usize)>,
}

impl JordanClass {
    pub fn new(mut parts: Vec<(RootOfUnity, usize)>) -> Self {
        parts.retain(|&(_, s)| s > 0);
        parts.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
        JordanClass { parts }
    }

    pub fn identity(rank: usize) -> Self {
        Self::new(vec![(RootOfUnity::ONE, 1); rank])
    }

    /// `mu` times the identity.
    pub fn scalar(mu: RootOfUnity, rank: usize) -> Self {
        Self::new(vec![(mu, 1); rank])
    }

    /// Regular unipotent `U(n)`.
    pub fn unipotent(n: usize) -> Self {
        Self::new(vec![(RootOfUnity::ONE, n)])
    }

    /// Semisimple class with the given eigenvalues.
    pub fn semisimple(eigenvalues: &[RootOfUnity]) -> Self {
        Self::new(eigenvalues.iter().map(|&e| (e, 1)).collect())
    }

    pub fn parts(&self) -> &[(RootOfUnity, usize)] {
        &self.parts
    }

    pub fn rank(&self) -> usize {
        self.parts.iter().map(|p| p.1).sum()
    }

    pub fn det(&self) -> RootOfUnity {
        self.parts
            .iter()
            .fold(RootOfUnity::ONE, |acc, &(mu, s)| acc.mul(mu.pow(s as i64)))
    }

    pub fn eigenvalues(&self) -> Vec<RootOfUnity> {
        let mut v: Vec<RootOfUnity> = self.parts.iter().map(|p| p.0).collect();
        v.dedup();
        v
    }

    /// Block sizes at `mu`, descending.
    pub fn partition_at(&self, mu: RootOfUnity) -> Vec<usize> {
        self.parts
            .iter()
            .filter(|p| p.0 == mu)
            .map(|p| p.1)
            .collect()
    }

    /// `dim ker(A - mu)`: the number of blocks with eigenvalue `mu`.
    pub fn geometric_multiplicity(&self, mu: RootOfUnity) -> usize {
        self.parts.iter().filter(|p| p.0 == mu).count()
    }

    pub fn algebraic_multiplicity(&self, mu: RootOfUnity) -> usize {
        self.partition_at(mu).iter().sum()
    }

    /// `rank(A - mu)`.
    pub fn rank_minus(&self, mu: RootOfUnity) -> usize {
        self.rank() - self.geometric_multiplicity(mu)
    }

    pub fn is_identity(&self) -> bool {
        self.parts.iter().all(|&(mu, s)| mu.is_one() && s == 1)
    }

    pub fn twist(&self, s: RootOfUnity) -> Self {
        Self::new(self.parts.iter().map(|&(mu, l)| (mu.mul(s), l)).collect())
    }

    /// Class of the `k`-th power: `J(mu, l)^k ~ J(mu^k, l)` for `k >= 1`.
    pub fn power(&self, k: u32) -> Self {
        Self::new(
            self.parts
                .iter()
                .map(|&(mu, l)| (mu.pow(k as i64), l))
                .collect(),
        )
    }

    /// Class of the inverse (equivalently of the dual).
    pub fn inverse(&self) -> Self {
        Self::new(self.parts.iter().map(|&(mu, l)| (mu.inv(), l)).collect())
    }

    /// Direct sum of two classes.
    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::new(self.parts.iter().chain(&other.parts).copied().collect())
    }

    pub fn weights(&self) -> Vec<Weight> {
        let mut out = Vec::with_capacity(self.rank());
        for &(mu, l) in &self.parts {
            let l = l as i64;
            for j in 0..l {
                out.push(Weight {
                    eigenvalue: mu,
                    sl2: l - 1 - 2 * j,
                });
            }
        }
        out
    }

    /// Reassembles a class from a weight multiset.
    pub fn from_weights(weights: &[Weight]) -> Result<Self> {
        let mut by_eigen: BTreeMap<RootOfUnity, BTreeMap<i64, usize>> = BTreeMap::new();
        for w in weights {
            *by_eigen
                .entry(w.eigenvalue)
                .or_default()
                .entry(w.sl2)
                .or_default() += 1;
        }
        let mut parts = Vec::new();
        for (mu, mut counts) in by_eigen {
            while let Some((&top, _)) = counts.iter().next_back() {
                if top < 0 {
                    return Err(Error::Schema(
                        "weight multiset is not an sl2 character".into(),
                    ));
                }
                let mut m = top;
                while m >= -top {
                    let c = counts.get_mut(&m).ok_or_else(|| {
                        Error::Schema("weight multiset is not an sl2 character".into())
                    })?;
                    *c -= 1;
                    if *c == 0 {
                        counts.remove(&m);
                    }
                    m -= 2;
                }
                parts.push((mu, top as usize + 1));
            }
        }
        Ok(Self::new(parts))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let a = self.weights();
        let b = other.weights();
        let ws: Vec<Weight> = a
            .iter()
            .flat_map(|x| b.iter().map(move |y| x.combine(y)))
            .collect();
        Self::from_weights(&ws).expect("tensor of characters is a character")
    }

    pub fn sym2(&self) -> Self {
        let a = self.weights();
        let mut ws = Vec::new();
        for i in 0..a.len() {
            for j in i..a.len() {
                ws.push(a[i].combine(&a[j]));
            }
        }
        Self::from_weights(&ws).expect("symmetric square of a character is a character")
    }

    pub fn lambda2(&self) -> Self {
        let a = self.weights();
        let mut ws = Vec::new();
        for i in 0..a.len() {
            for j in i + 1..a.len() {
                ws.push(a[i].combine(&a[j]));
            }
        }
        Self::from_weights(&ws).expect("exterior square of a character is a character")
    }

    /// Removes one trivial `1x1` block, if present.
    pub fn remove_trivial_block(&self) -> Option<Self> {
        let idx = self
            .parts
            .iter()
            .position(|&(mu, l)| mu.is_one() && l == 1)?;
        let mut parts = self.parts.clone();
        parts.remove(idx);
        Some(Self::new(parts))
    }
}

/// Eigenvalue of the semisimple part paired with an `sl2` weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight {
    pub eigenvalue: RootOfUnity,
    pub sl2: i64,
}

impl Weight {
    pub fn combine(&self, other: &Weight) -> Weight {
        Weight {
            eigenvalue: self.eigenvalue.mul(other.eigenvalue),
            sl2: self.sl2 + other.sl2,
        }
    }

    pub fn inverse(&self) -> Weight {
        Weight {
            eigenvalue: self.eigenvalue.inv(),
            sl2: -self.sl2,
        }
    }
}

fn fmt_block(f: &mut fmt::Formatter<'_>, mu: RootOfUnity, l: usize) -> fmt::Result {
    if l == 1 {
        return write!(f, "{mu}");
    }
    if mu.is_one() {
        write!(f, "U({l})")
    } else if mu == RootOfUnity::MINUS_ONE {
        write!(f, "-U({l})")
    } else {
        write!(f, "{mu}*U({l})")
    }
}

impl fmt::Display for JordanClass {
    /// Notation: `U(k)` for a unipotent block, `-U(k)` and
    /// `zeta(N)^j*U(k)` for twisted blocks, bare eigenvalues for `1x1` blocks.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &(mu, l)) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            fmt_block(f, mu, l)?;
        }
        Ok(())
    }
}

impl FromStr for JordanClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if let Some(pos) = tok.find("U(") {
                let (pre, rest) = tok.split_at(pos);
                let size: usize = rest[2..]
                    .strip_suffix(')')
                    .and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| Error::Schema(format!("bad block `{tok}`")))?;
                let pre = pre.trim().trim_end_matches('*').trim();
                let mu = match pre {
                    "" | "+" => RootOfUnity::ONE,
                    "-" => RootOfUnity::MINUS_ONE,
                    other => other.parse()?,
                };
                parts.push((mu, size));
            } else {
                parts.push((tok.parse()?, 1));
            }
        }
        if parts.is_empty() {
            return Err(Error::Schema("empty Jordan class".into()));
        }
        Ok(Self::new(parts))
    }
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    eigenvalue: RootOfUnity,
    size: usize,
}

impl Serialize for JordanClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let blocks: Vec<BlockJson> = self
            .parts
            .iter()
            .map(|&(eigenvalue, size)| BlockJson { eigenvalue, size })
            .collect();
        blocks.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for JordanClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let blocks = Vec::<BlockJson>::deserialize(deserializer)?;
        if blocks.iter().any(|b| b.size == 0) {
            return Err(D::Error::custom("block size must be positive"));
        }
        Ok(JordanClass::new(
            blocks.into_iter().map(|b| (b.eigenvalue, b.size)).collect(),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupFamily {
    Gl,
    Sl,
    So,
    Sp,
}

/// A classical group `GL_n`, `SL_n`, `SO_n` or `Sp_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupSpecTag {
    pub family: GroupFamily,
    pub size: usize,
}

impl GroupSpecTag {
    pub fn new(family: GroupFamily, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Schema("group size must be positive".into()));
        }
        if family == GroupFamily::Sp && size % 2 == 1 {
            return Err(Error::Schema(format!("Sp{size} needs even size")));
        }
        Ok(GroupSpecTag { family, size })
    }

    pub fn gl(n: usize) -> Self {
        GroupSpecTag {
            family: GroupFamily::Gl,
            size: n,
        }
    }

    /// Dimension of the group (and of its Lie algebra).
    pub fn dim(&self) -> i64 {
        let n = self.size as i64;
        match self.family {
            GroupFamily::Gl => n * n,
            GroupFamily::Sl => n * n - 1,
            GroupFamily::So => n * (n - 1) / 2,
            GroupFamily::Sp => n * (n + 1) / 2,
        }
    }

    /// Dimension of the center of the Lie algebra.
    pub fn center_dim(&self) -> i64 {
        match self.family {
            GroupFamily::Gl => 1,
            GroupFamily::So if self.size == 2 => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for GroupSpecTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            GroupFamily::Gl => "GL",
            GroupFamily::Sl => "SL",
            GroupFamily::So => "SO",
            GroupFamily::Sp => "Sp",
        };
        write!(f, "{fam}{}", self.size)
    }
}

impl FromStr for GroupSpecTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let upper = t.to_ascii_uppercase();
        let (family, rest) = if let Some(r) = upper.strip_prefix("GL") {
            (GroupFamily::Gl, r)
        } else if let Some(r) = upper.strip_prefix("SL") {
            (GroupFamily::Sl, r)
        } else if let Some(r) = upper.strip_prefix("SO") {
            (GroupFamily::So, r)
        } else if let Some(r) = upper.strip_prefix("SP") {
            (GroupFamily::Sp, r)
        } else {
            return Err(Error::Schema(format!("unknown group `{t}`")));
        };
        let size = rest
            .trim_start_matches('_')
            .parse()
            .map_err(|_| Error::Schema(format!("unknown group `{t}`")))?;
        Self::new(family, size)
    }
}

impl Serialize for GroupSpecTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupSpecTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        String::deserialize(deserializer)?
            .parse()
            .map_err(D::Error::custom)
    }
}

pub const INFINITY: &str = "inf";

pub fn is_infinity_label(label: &str) -> bool {
    matches!(label, "inf" | "infinity" | "∞" | "oo")
}

/// Conjugacy-class data of a local system: one Jordan class per puncture.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalLocalSystem {
    pub rank: usize,
    pub group: GroupSpecTag,
    pub punctures: Vec<String>,
    pub classes: Vec<JordanClass>,
}

impl FormalLocalSystem {
    /// Builds and validates a profile.
    pub fn new(
        group: GroupSpecTag,
        punctures: Vec<String>,
        classes: Vec<JordanClass>,
    ) -> Result<Self> {
        let f = FormalLocalSystem {
            rank: group.size,
            group,
            punctures,
            classes,
        };
        f.validate()?;
        Ok(f)
    }

    /// GL-tagged profile from `(label, class)` pairs.
    pub fn gl(entries: &[(&str, JordanClass)]) -> Result<Self> {
        let rank = entries.first().map_or(0, |e| e.1.rank());
        Self::new(
            GroupSpecTag::gl(rank),
            entries.iter().map(|e| e.0.to_string()).collect(),
            entries.iter().map(|e| e.1.clone()).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.group.size != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: self.group.size,
            });
        }
        if self.punctures.len() != self.classes.len() {
            return Err(Error::Schema("one class per puncture required".into()));
        }
        let infs = self
            .punctures
            .iter()
            .filter(|p| is_infinity_label(p))
            .count();
        if infs != 1 {
            return Err(Error::Schema(
                "exactly one puncture must be labelled `inf`".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        if !self.punctures.iter().all(|p| seen.insert(p.as_str())) {
            return Err(Error::Schema("duplicate puncture label".into()));
        }
        for c in &self.classes {
            if c.rank() != self.rank {
                return Err(Error::RankMismatch {
                    expected: self.rank,
                    got: c.rank(),
                });
            }
        }
        let det = self
            .classes
            .iter()
            .fold(RootOfUnity::ONE, |acc, c| acc.mul(c.det()));
        if !det.is_one() {
            return Err(Error::Schema(format!(
                "product of local determinants is {det}, not 1"
            )));
        }
        for c in &self.classes {
            if !validate_class_in_group(c, &self.group)? {
                return Err(Error::NotRealizable(format!("{c} in {}", self.group)));
            }
        }
        Ok(())
    }

    pub fn infinity_index(&self) -> usize {
        self.punctures
            .iter()
            .position(|p| is_infinity_label(p))
            .expect("validated profile has inf")
    }

    pub fn class_at(&self, label: &str) -> Option<&JordanClass> {
        if is_infinity_label(label) {
            return Some(&self.classes[self.infinity_index()]);
        }
        self.punctures
            .iter()
            .position(|p| p == label)
            .map(|i| &self.classes[i])
    }

    pub fn at_infinity(&self) -> &JordanClass {
        &self.classes[self.infinity_index()]
    }

    /// `(label, class)` for the finite punctures, in listed order.
    pub fn finite(&self) -> impl Iterator<Item = (&str, &JordanClass)> {
        self.punctures
            .iter()
            .zip(&self.classes)
            .filter(|(p, _)| !is_infinity_label(p))
            .map(|(p, c)| (p.as_str(), c))
    }

    pub fn finite_labels(&self) -> Vec<String> {
        self.finite().map(|(p, _)| p.to_string()).collect()
    }

    /// Same rank and same class at every label, ignoring group tag and order.
    pub fn same_local_data(&self, other: &Self) -> bool {
        self.rank == other.rank
            && self.punctures.len() == other.punctures.len()
            && self
                .punctures
                .iter()
                .zip(&self.classes)
                .all(|(p, c)| other.class_at(p) == Some(c))
    }

    pub fn with_group(mut self, group: GroupSpecTag) -> Result<Self> {
        self.group = group;
        self.validate()?;
        Ok(self)
    }

    fn with_classes(&self, group: GroupSpecTag, classes: Vec<JordanClass>) -> Result<Self> {
        Self::new(group, self.punctures.clone(), classes)
    }
}

impl fmt::Display for FormalLocalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [", self.group)?;
        for (i, (p, c)) in self.punctures.iter().zip(&self.classes).enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{p}: {c}")?;
        }
        f.write_str("]")
    }
}

/// Conjugate partition of a descending partition.
pub fn conjugate_partition(parts: &[usize]) -> Vec<usize> {
    let max = parts.iter().copied().max().unwrap_or(0);
    (1..=max)
        .map(|j| parts.iter().filter(|&&p| p >= j).count())
        .collect()
}

/// Dimension of the centralizer in `gl_n`: `sum over eigenvalues of sum_i (lambda'_i)^2`.
pub fn centralizer_dim_gl(c: &JordanClass) -> usize {
    c.eigenvalues()
        .into_iter()
        .map(|mu| {
            conjugate_partition(&c.partition_at(mu))
                .iter()
                .map(|x| x * x)
                .sum::<usize>()
        })
        .sum()
}

/// Whether some element of `g` has Jordan type `c`.
pub fn validate_class_in_group(c: &JordanClass, g: &GroupSpecTag) -> Result<bool> {
    if c.rank() != g.size {
        return Err(Error::RankMismatch {
            expected: g.size,
            got: c.rank(),
        });
    }
    let det_ok = c.det().is_one();
    Ok(match g.family {
        GroupFamily::Gl => true,
        GroupFamily::Sl => det_ok,
        GroupFamily::So | GroupFamily::Sp => {
            let orthogonal = g.family == GroupFamily::So;
            if orthogonal && !det_ok {
                return Ok(false);
            }
            c.eigenvalues().into_iter().all(|mu| {
                let here = c.partition_at(mu);
                if mu.inv() != mu {
                    return here == c.partition_at(mu.inv());
                }
                // at +-1: blocks of the "wrong" parity come in pairs
                let wrong_parity = |l: usize| {
                    if orthogonal {
                        l.is_multiple_of(2)
                    } else {
                        l % 2 == 1
                    }
                };
                let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
                for l in here {
                    *counts.entry(l).or_default() += 1;
                }
                counts.iter().all(|(&l, &m)| !wrong_parity(l) || m % 2 == 0)
            })
        }
    })
}

/// A matrix of a given Jordan type inside a classical group, with the form it preserves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRepresentative {
    pub matrix: Matrix,
    /// Preserved Gram matrix for `SO`/`Sp`.
    pub form: Option<Matrix>,
}

impl GroupRepresentative {
    pub fn lie_algebra(&self, g: &GroupSpecTag) -> GroupSpec {
        match (g.family, &self.form) {
            (GroupFamily::So, Some(f)) => GroupSpec::So(f.clone()),
            (GroupFamily::Sp, Some(f)) => GroupSpec::Sp(f.clone()),
            (GroupFamily::Sl, _) => GroupSpec::Sl(g.size),
            _ => GroupSpec::Gl(g.size),
        }
    }
}

// Antidiagonal form with alternating signs: symmetric for odd n, alternating for even n.
fn antidiagonal_form(n: usize) -> Matrix {
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        let v = if i % 2 == 0 { 1 } else { -1 };
        g.set(i, n - 1 - i, CyclotomicNumber::from_integer(v));
    }
    g
}

// Regular unipotent of size n preserving `antidiagonal_form(n)`, via the Cayley
// transform of the principal nilpotent.
fn regular_unipotent_in_form(n: usize) -> Matrix {
    let nil = Matrix::jordan_block(&CyclotomicNumber::zero(), n);
    let id = Matrix::identity(n);
    let plus = id.add(&nil).expect("same size");
    let minus_inv = id
        .sub(&nil)
        .expect("same size")
        .inverse()
        .expect("unipotent is invertible");
    plus.mul(&minus_inv).expect("same size")
}

fn hyperbolic_pair(block: &Matrix, sign: i64) -> (Matrix, Matrix) {
    let n = block.rows();
    let dual = block
        .inverse()
        .expect("Jordan block is invertible")
        .transpose();
    let m = Matrix::direct_sum(&[block.clone(), dual]);
    let mut g = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        g.set(i, n + i, CyclotomicNumber::one());
        g.set(n + i, i, CyclotomicNumber::from_integer(sign));
    }
    (m, g)
}

/// Builds an element of `g` with Jordan type `c`.
pub fn group_representative(c: &JordanClass, g: &GroupSpecTag) -> Result<GroupRepresentative> {
    if !validate_class_in_group(c, g)? {
        return Err(Error::NotRealizable(format!("{c} in {g}")));
    }
    let blocks = || -> Vec<Matrix> {
        c.parts()
            .iter()
            .map(|&(mu, l)| Matrix::jordan_block(&mu.to_cyclotomic(), l))
            .collect()
    };
    match g.family {
        GroupFamily::Gl | GroupFamily::Sl => Ok(GroupRepresentative {
            matrix: Matrix::direct_sum(&blocks()),
            form: None,
        }),
        GroupFamily::So | GroupFamily::Sp => {
            let orthogonal = g.family == GroupFamily::So;
            let sign = if orthogonal { 1 } else { -1 };
            let mut mats = Vec::new();
            let mut forms = Vec::new();
            for mu in c.eigenvalues() {
                let inv = mu.inv();
                if inv != mu {
                    // each block at mu is paired with a block at mu^-1; handle the pair once
                    if inv < mu {
                        continue;
                    }
                    for l in c.partition_at(mu) {
                        let (m, f) =
                            hyperbolic_pair(&Matrix::jordan_block(&mu.to_cyclotomic(), l), sign);
                        mats.push(m);
                        forms.push(f);
                    }
                    continue;
                }
                let wrong_parity = |l: usize| {
                    if orthogonal {
                        l.is_multiple_of(2)
                    } else {
                        l % 2 == 1
                    }
                };
                let mut pending: BTreeMap<usize, usize> = BTreeMap::new();
                for l in c.partition_at(mu) {
                    *pending.entry(l).or_default() += 1;
                }
                for (l, count) in pending {
                    if wrong_parity(l) {
                        for _ in 0..count / 2 {
                            let (m, f) = hyperbolic_pair(
                                &Matrix::jordan_block(&mu.to_cyclotomic(), l),
                                sign,
                            );
                            mats.push(m);
                            forms.push(f);
                        }
                    } else {
                        for _ in 0..count {
                            mats.push(regular_unipotent_in_form(l).scale(&mu.to_cyclotomic()));
                            forms.push(antidiagonal_form(l));
                        }
                    }
                }
            }
            Ok(GroupRepresentative {
                matrix: Matrix::direct_sum(&mats),
                form: Some(Matrix::direct_sum(&forms)),
            })
        }
    }
}

/// `dim Ad^{I_s}` for a single class inside `g`.
pub fn centralizer_dim_in(c: &JordanClass, g: &GroupSpecTag) -> Result<i64> {
    match g.family {
        GroupFamily::Gl => {
            if c.rank() != g.size {
                return Err(Error::RankMismatch {
                    expected: g.size,
                    got: c.rank(),
                });
            }
            Ok(centralizer_dim_gl(c) as i64)
        }
        GroupFamily::Sl => {
            if !validate_class_in_group(c, g)? {
                return Err(Error::NotRealizable(format!("{c} in {g}")));
            }
            Ok(centralizer_dim_gl(c) as i64 - 1)
        }
        GroupFamily::So | GroupFamily::Sp => {
            let rep = group_representative(c, g)?;
            Ok(commutant_dim(std::slice::from_ref(&rep.matrix), &rep.lie_algebra(g))? as i64)
        }
    }
}

/// `dim H * (2 - |S|) + sum_s dim Ad^{I_s}`.
pub fn euler_characteristic(f: &FormalLocalSystem, g: &GroupSpecTag) -> Result<i64> {
    if f.rank != g.size {
        return Err(Error::RankMismatch {
            expected: g.size,
            got: f.rank,
        });
    }
    let local: i64 = f
        .classes
        .iter()
        .map(|c| centralizer_dim_in(c, g))
        .sum::<Result<i64>>()?;
    Ok(g.dim() * (2 - f.punctures.len() as i64) + local)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RigidityReport {
    pub group: GroupSpecTag,
    pub chi: i64,
    pub threshold: i64,
    pub local_dims: Vec<i64>,
    pub rigid: bool,
    /// Set when irreducibility was not assumed: `rigid` then only says that the
    /// count matches the irreducible threshold.
    pub conditional: bool,
}

/// Cohomological rigidity test by the Euler-Poincare count.
pub fn is_cohomologically_rigid(
    f: &FormalLocalSystem,
    g: &GroupSpecTag,
    assume_irreducible: bool,
) -> Result<RigidityReport> {
    if f.rank != g.size {
        return Err(Error::RankMismatch {
            expected: g.size,
            got: f.rank,
        });
    }
    let local_dims = f
        .classes
        .iter()
        .map(|c| centralizer_dim_in(c, g))
        .collect::<Result<Vec<_>>>()?;
    let chi = g.dim() * (2 - f.punctures.len() as i64) + local_dims.iter().sum::<i64>();
    let threshold = 2 * g.center_dim();
    Ok(RigidityReport {
        group: *g,
        chi,
        threshold,
        local_dims,
        rigid: chi == threshold,
        conditional: !assume_irreducible,
    })
}

/// Multiplies the class at each finite puncture by its scalar (missing labels
/// mean 1) and the class at infinity by the inverse of their product.
pub fn twist_formal(
    f: &FormalLocalSystem,
    scalars: &BTreeMap<String, RootOfUnity>,
) -> Result<FormalLocalSystem> {
    for label in scalars.keys() {
        if is_infinity_label(label) || !f.punctures.contains(label) {
            return Err(Error::PunctureMismatch);
        }
    }
    let total = scalars
        .values()
        .fold(RootOfUnity::ONE, |acc, &s| acc.mul(s));
    let classes = f
        .punctures
        .iter()
        .zip(&f.classes)
        .map(|(p, c)| {
            if is_infinity_label(p) {
                c.twist(total.inv())
            } else {
                c.twist(scalars.get(p).copied().unwrap_or(RootOfUnity::ONE))
            }
        })
        .collect();
    FormalLocalSystem::new(GroupSpecTag::gl(f.rank), f.punctures.clone(), classes)
}

fn same_punctures(a: &FormalLocalSystem, b: &FormalLocalSystem) -> bool {
    a.punctures.len() == b.punctures.len() && a.punctures.iter().all(|p| b.class_at(p).is_some())
}

pub fn tensor_formal(a: &FormalLocalSystem, b: &FormalLocalSystem) -> Result<FormalLocalSystem> {
    if !same_punctures(a, b) {
        return Err(Error::PunctureMismatch);
    }
    let classes = a
        .punctures
        .iter()
        .zip(&a.classes)
        .map(|(p, c)| c.tensor(b.class_at(p).expect("checked")))
        .collect();
    a.with_classes(GroupSpecTag::gl(a.rank * b.rank), classes)
}

pub fn sym2_formal(f: &FormalLocalSystem) -> Result<FormalLocalSystem> {
    let r = f.rank * (f.rank + 1) / 2;
    f.with_classes(
        GroupSpecTag::gl(r),
        f.classes.iter().map(JordanClass::sym2).collect(),
    )
}

pub fn lambda2_formal(f: &FormalLocalSystem) -> Result<FormalLocalSystem> {
    if f.rank < 2 {
        return Err(Error::ZeroQuotient);
    }
    let r = f.rank * (f.rank - 1) / 2;
    f.with_classes(
        GroupSpecTag::gl(r),
        f.classes.iter().map(JordanClass::lambda2).collect(),
    )
}

/// Rank of the middle convolution predicted from local data.
pub fn mc_rank(f: &FormalLocalSystem, lambda: RootOfUnity) -> i64 {
    let finite: i64 = f
        .finite()
        .map(|(_, c)| c.rank_minus(RootOfUnity::ONE) as i64)
        .sum();
    let at_inf = f.at_infinity().rank_minus(lambda) as i64;
    finite + at_inf - f.rank as i64
}

/// Local monodromy of the middle convolution `MC_lambda`, block by block:
///
/// * finite puncture: `J(1,l) -> J(lambda,l-1)`, `J(lambda^-1,l) -> J(1,l+1)`,
///   `J(a,l) -> J(a lambda,l)` otherwise, padded with `1`;
/// * infinity: `J(1,l) -> J(lambda^-1,l+1)`, `J(lambda,l) -> J(1,l-1)`,
///   `J(a,l) -> J(a lambda^-1,l)` otherwise, padded with `lambda^-1`.
///
/// The rules at infinity are the usual ones read through `A_inf^-1`, because
/// `A_inf` is the inverse of the ordered product of the finite monodromies.
pub fn mc_formal(f: &FormalLocalSystem, lambda: RootOfUnity) -> Result<FormalLocalSystem> {
    if lambda.is_one() {
        return Err(Error::TrivialCharacter);
    }
    if f.rank == 1 {
        let nontrivial = f.finite().filter(|(_, c)| !c.is_identity()).count();
        if nontrivial < 2 {
            return Err(Error::PassThrough(
                "rank-one system with fewer than two nontrivial finite punctures".into(),
            ));
        }
    }
    let new_rank = mc_rank(f, lambda);
    if new_rank <= 0 {
        return Err(Error::ZeroQuotient);
    }
    let new_rank = new_rank as usize;
    let linv = lambda.inv();
    let mut classes = Vec::with_capacity(f.classes.len());
    for (p, c) in f.punctures.iter().zip(&f.classes) {
        let inf = is_infinity_label(p);
        // at infinity the roles of lambda and lambda^-1 swap
        let (mult, special) = if inf { (linv, lambda) } else { (lambda, linv) };
        let mut parts = Vec::new();
        for &(a, l) in c.parts() {
            if a.is_one() {
                if inf {
                    parts.push((mult, l + 1));
                } else if l > 1 {
                    parts.push((mult, l - 1));
                }
            } else if a == special {
                if !inf {
                    parts.push((RootOfUnity::ONE, l + 1));
                } else if l > 1 {
                    parts.push((RootOfUnity::ONE, l - 1));
                }
            } else {
                parts.push((a.mul(mult), l));
            }
        }
        let used: usize = parts.iter().map(|p| p.1).sum();
        if used > new_rank {
            return Err(Error::PassThrough(format!(
                "local data at `{p}` is incompatible with rank {new_rank}"
            )));
        }
        let pad = if inf { linv } else { RootOfUnity::ONE };
        parts.extend(std::iter::repeat_n((pad, 1), new_rank - used));
        classes.push(JordanClass::new(parts));
    }
    FormalLocalSystem::new(GroupSpecTag::gl(new_rank), f.punctures.clone(), classes)
}

/// Pullback along `z -> z^k` for a system on `P^1 - {0, 1, inf}`: the classes
/// at `0` and `inf` are raised to the `k`-th power and the class at `1` is
/// copied to every `k`-th root of unity.
pub fn pullback_power_formal(f: &FormalLocalSystem, k: u32) -> Result<FormalLocalSystem> {
    if k == 0 {
        return Err(Error::Schema("pullback degree must be positive".into()));
    }
    if f.punctures
        .iter()
        .any(|p| !(is_infinity_label(p) || p == "0" || p == "1"))
    {
        return Err(Error::UnsupportedPunctures(f.punctures.clone()));
    }
    let mut punctures = vec![INFINITY.to_string()];
    let mut classes = vec![f.at_infinity().power(k)];
    if let Some(c) = f.class_at("0") {
        punctures.push("0".into());
        classes.push(c.power(k));
    }
    if let Some(c) = f.class_at("1") {
        for j in 0..k {
            punctures.push(RootOfUnity::new(k, j as i64).to_string());
            classes.push(c.clone());
        }
    }
    FormalLocalSystem::new(GroupSpecTag::gl(f.rank), punctures, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jc(s: &str) -> JordanClass {
        s.parse().unwrap()
    }

    fn eta(k: i64) -> RootOfUnity {
        RootOfUnity::new(12, k)
    }

    #[test]
    fn class_notation_roundtrip() {
        for s in [
            "U(4)",
            "-1,-1,1,1",
            "U(2),1,1",
            "U(3),U(2),U(2)",
            "1,-U(2),-U(2),-1,-1",
            "zeta(4)*U(2),zeta(8)^3",
        ] {
            let c = jc(s);
            assert_eq!(jc(&c.to_string()), c, "{s}");
        }
        assert_eq!(jc("-1,1,-1,1").to_string(), "1,1,-1,-1");
    }

    #[test]
    fn dwork_centralizers() {
        let spin0 = JordanClass::semisimple(&[eta(1), eta(3), eta(9), eta(11)]);
        assert_eq!(centralizer_dim_gl(&JordanClass::unipotent(4)), 4);
        assert_eq!(centralizer_dim_gl(&jc("-1,-1,1,1")), 8);
        assert_eq!(centralizer_dim_gl(&spin0), 4);
        assert_eq!(centralizer_dim_gl(&JordanClass::identity(5)), 25);
        let sl0 = JordanClass::semisimple(&[eta(2), eta(4), eta(7), eta(11)]);
        assert_eq!(centralizer_dim_gl(&sl0), 4);
        assert_eq!(centralizer_dim_gl(&jc("U(2),1,1")), 10);
    }

    #[test]
    fn realizability() {
        let so = |n| GroupSpecTag::new(GroupFamily::So, n).unwrap();
        let sp = |n| GroupSpecTag::new(GroupFamily::Sp, n).unwrap();
        assert!(validate_class_in_group(&JordanClass::unipotent(7), &so(7)).unwrap());
        assert!(!validate_class_in_group(&JordanClass::unipotent(2), &so(2)).unwrap());
        let spin0 = JordanClass::semisimple(&[eta(1), eta(3), eta(9), eta(11)]);
        assert!(validate_class_in_group(&spin0, &sp(4)).unwrap());
        assert!(validate_class_in_group(&jc("U(2),U(2)"), &so(4)).unwrap());
        assert!(!validate_class_in_group(&jc("U(3),1"), &sp(4)).unwrap());
        assert!(matches!(
            validate_class_in_group(&JordanClass::unipotent(3), &so(4)),
            Err(Error::RankMismatch { .. })
        ));
    }

    #[test]
    fn functor_examples() {
        assert_eq!(JordanClass::unipotent(2).sym2(), JordanClass::unipotent(3));
        assert_eq!(
            JordanClass::unipotent(2).lambda2(),
            JordanClass::identity(1)
        );
        assert_eq!(JordanClass::unipotent(4).lambda2(), jc("U(5),1"));
        assert_eq!(JordanClass::unipotent(4).sym2(), jc("U(7),U(3)"));
        assert_eq!(
            JordanClass::unipotent(2).tensor(&JordanClass::unipotent(3)),
            jc("U(4),U(2)")
        );
        let sl0 = JordanClass::semisimple(&[eta(2), eta(4), eta(7), eta(11)]);
        let expected = JordanClass::semisimple(&[eta(1), eta(3), eta(9), eta(11), eta(6), eta(6)]);
        assert_eq!(sl0.lambda2(), expected);
    }

    fn dwork_sp4() -> FormalLocalSystem {
        FormalLocalSystem::gl(&[
            ("inf", JordanClass::unipotent(4)),
            (
                "0",
                JordanClass::semisimple(&[eta(1), eta(3), eta(9), eta(11)]),
            ),
            ("1", jc("-1,-1,1,1")),
        ])
        .unwrap()
    }

    #[test]
    fn euler_characteristics() {
        let gl5 = FormalLocalSystem::gl(&[
            ("inf", JordanClass::unipotent(5)),
            (
                "0",
                JordanClass::semisimple(
                    &(1..=5).map(|i| RootOfUnity::new(6, i)).collect::<Vec<_>>(),
                ),
            ),
            ("1", jc("1,1,1,1,-1")),
        ])
        .unwrap();
        assert_eq!(euler_characteristic(&gl5, &GroupSpecTag::gl(5)).unwrap(), 2);
        assert_eq!(
            euler_characteristic(&dwork_sp4(), &GroupSpecTag::gl(4)).unwrap(),
            0
        );
        let sl4 = FormalLocalSystem::gl(&[
            ("inf", JordanClass::unipotent(4)),
            (
                "0",
                JordanClass::semisimple(&[eta(2), eta(4), eta(7), eta(11)]),
            ),
            ("1", jc("U(2),1,1")),
        ])
        .unwrap();
        assert_eq!(euler_characteristic(&sl4, &GroupSpecTag::gl(4)).unwrap(), 2);
        let rank1 =
            FormalLocalSystem::gl(&[("inf", jc("1")), ("0", jc("-1")), ("1", jc("-1"))]).unwrap();
        let rep = is_cohomologically_rigid(&rank1, &GroupSpecTag::gl(1), true).unwrap();
        assert!(rep.rigid && rep.chi == 2 && !rep.conditional);
    }

    #[test]
    fn mc_dwork_profile() {
        let out = mc_formal(&dwork_sp4(), RootOfUnity::MINUS_ONE).unwrap();
        assert_eq!(out.rank, 6);
        assert_eq!(out.class_at("inf").unwrap(), &jc("-U(5),-1"));
        let minus_eta = JordanClass::semisimple(&[eta(7), eta(9), eta(3), eta(5), eta(0), eta(0)]);
        assert_eq!(out.class_at("0").unwrap(), &minus_eta);
        assert_eq!(out.class_at("1").unwrap(), &jc("U(2),U(2),1,1"));
        assert!(matches!(
            mc_formal(&dwork_sp4(), RootOfUnity::ONE),
            Err(Error::TrivialCharacter)
        ));
    }

    #[test]
    fn twist_examples() {
        let f = dwork_sp4();
        assert_eq!(twist_formal(&f, &BTreeMap::new()).unwrap(), f);
        let mut s = BTreeMap::new();
        s.insert("0".to_string(), RootOfUnity::new(3, 1));
        let t = twist_formal(&f, &s).unwrap();
        let mut back = BTreeMap::new();
        back.insert("0".to_string(), RootOfUnity::new(3, 2));
        assert_eq!(twist_formal(&t, &back).unwrap(), f);
        s.insert("7".into(), RootOfUnity::ONE);
        assert!(matches!(twist_formal(&f, &s), Err(Error::PunctureMismatch)));
    }

    #[test]
    fn pullback_examples() {
        let rank1 = FormalLocalSystem::gl(&[
            ("inf", jc("zeta(3)^2")),
            ("0", jc("zeta(3)")),
            ("1", jc("1")),
        ])
        .unwrap();
        let p = pullback_power_formal(&rank1, 3).unwrap();
        assert_eq!(p.punctures.len(), 5);
        assert!(p.class_at("0").unwrap().is_identity());
        assert_eq!(
            pullback_power_formal(&rank1, 1).unwrap().classes,
            rank1.classes
        );
        let bad =
            FormalLocalSystem::gl(&[("inf", jc("1")), ("2", jc("-1")), ("1", jc("-1"))]).unwrap();
        assert!(matches!(
            pullback_power_formal(&bad, 2),
            Err(Error::UnsupportedPunctures(_))
        ));
    }

    #[test]
    fn profile_validation() {
        let bad_det = FormalLocalSystem::gl(&[("inf", jc("1")), ("0", jc("-1"))]);
        assert!(bad_det.is_err());
        let no_inf = FormalLocalSystem::gl(&[("2", jc("1")), ("0", jc("1"))]);
        assert!(no_inf.is_err());
        let json = serde_json::to_string(&dwork_sp4()).unwrap();
        let back: FormalLocalSystem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, dwork_sp4());
    }
}

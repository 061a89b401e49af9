//! Monodromy tuples and the operations on them: middle convolution,
//! twists, tensor constructions, power-map pullback and the exceptional
//! isogeny projections.
//!
//! A tuple lists the local monodromies `A_1, ..., A_p` at the finite punctures;
//! the monodromy at infinity is derived from `A_inf * A_p * ... * A_1 = I`.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::{lcm, CyclotomicNumber, RootOfUnity};
use crate::error::{Error, Result};
use crate::linalg::{
    conjugating_matrix, induced_on_quotient, invariant_bilinear, joint_kernel, jordan_type,
    restrict_to_subspace, Echelon, FormClassification, Matrix, Vector,
};
use crate::localdata::{is_infinity_label, FormalLocalSystem, GroupSpecTag, JordanClass, INFINITY};

pub const CONVENTION: &str = "Ainf*Ap*...*A1=I";

fn normalize_convention(c: &str) -> String {
    c.chars()
        .filter(|ch| !ch.is_whitespace() && *ch != '_' && *ch != '·')
        .collect::<String>()
        .to_ascii_lowercase()
}

/// Local monodromy matrices at the finite punctures, in product order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonodromyTuple {
    rank: usize,
    punctures: Vec<String>,
    matrices: Vec<Matrix>,
    at_infinity: Matrix,
}

impl MonodromyTuple {
    pub fn new(punctures: Vec<String>, matrices: Vec<Matrix>) -> Result<Self> {
        if punctures.len() != matrices.len() {
            return Err(Error::Schema(
                "one matrix per finite puncture required".into(),
            ));
        }
        if matrices.is_empty() {
            return Err(Error::Schema(
                "at least one finite puncture required".into(),
            ));
        }
        if punctures.iter().any(|p| is_infinity_label(p)) {
            return Err(Error::Schema(
                "the monodromy at infinity is derived, do not list it".into(),
            ));
        }
        let mut seen = std::collections::HashSet::new();
        if !punctures.iter().all(|p| seen.insert(p.as_str())) {
            return Err(Error::Schema("duplicate puncture label".into()));
        }
        let rank = matrices[0].rows();
        let mut product = Matrix::identity(rank);
        for (p, m) in punctures.iter().zip(&matrices) {
            if !m.is_square() || m.rows() != rank {
                return Err(Error::ShapeMismatch(format!(
                    "matrix at `{p}` is not {rank}x{rank}"
                )));
            }
            if !m.is_invertible() {
                return Err(Error::Singular);
            }
            product = m.mul(&product)?;
        }
        let at_infinity = product.inverse()?;
        Ok(MonodromyTuple {
            rank,
            punctures,
            matrices,
            at_infinity,
        })
    }

    /// Rank-one tuple with the given scalars at the finite punctures.
    pub fn rank_one(entries: &[(&str, RootOfUnity)]) -> Result<Self> {
        Self::new(
            entries.iter().map(|e| e.0.to_string()).collect(),
            entries
                .iter()
                .map(|e| Matrix::scalar(1, &e.1.to_cyclotomic()))
                .collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn punctures(&self) -> &[String] {
        &self.punctures
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn at_infinity(&self) -> &Matrix {
        &self.at_infinity
    }

    pub fn matrix_at(&self, label: &str) -> Option<&Matrix> {
        if is_infinity_label(label) {
            return Some(&self.at_infinity);
        }
        self.punctures
            .iter()
            .position(|p| p == label)
            .map(|i| &self.matrices[i])
    }

    /// Finite matrices followed by the one at infinity.
    pub fn all_matrices(&self) -> Vec<Matrix> {
        let mut v = self.matrices.clone();
        v.push(self.at_infinity.clone());
        v
    }

    /// lcm of the cyclotomic orders of all entries.
    pub fn field_order(&self) -> u32 {
        self.all_matrices()
            .iter()
            .fold(1, |acc, m| lcm(acc, m.cyclotomic_order()))
    }

    /// `P A_k P^-1` for every `k`.
    pub fn conjugate_by(&self, p: &Matrix) -> Result<Self> {
        let pinv = p.inverse()?;
        let mats = self
            .matrices
            .iter()
            .map(|m| p.mul(m)?.mul(&pinv))
            .collect::<Result<_>>()?;
        Self::new(self.punctures.clone(), mats)
    }

    fn map(&self, f: impl Fn(&Matrix) -> Result<Matrix>) -> Result<Self> {
        Self::new(
            self.punctures.clone(),
            self.matrices.iter().map(f).collect::<Result<_>>()?,
        )
    }
}

#[derive(Serialize, Deserialize)]
struct TupleJson {
    rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cyclotomic_order: Option<u32>,
    punctures: Vec<String>,
    matrices: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    convention: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    infinity: Option<Matrix>,
}

impl Serialize for MonodromyTuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TupleJson {
            rank: self.rank,
            cyclotomic_order: Some(self.field_order()),
            punctures: self.punctures.clone(),
            matrices: self.matrices.clone(),
            convention: Some(CONVENTION.into()),
            infinity: Some(self.at_infinity.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MonodromyTuple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = TupleJson::deserialize(deserializer)?;
        if let Some(c) = &raw.convention {
            if normalize_convention(c) != normalize_convention(CONVENTION) {
                return Err(D::Error::custom(format!("unsupported convention `{c}`")));
            }
        }
        let t = MonodromyTuple::new(raw.punctures, raw.matrices).map_err(D::Error::custom)?;
        if t.rank != raw.rank {
            return Err(D::Error::custom(format!(
                "declared rank {} but matrices are {}x{}",
                raw.rank, t.rank, t.rank
            )));
        }
        if let Some(n) = raw.cyclotomic_order {
            // Q(zeta_n) = Q(zeta_2n) for odd n
            let m = if n % 2 == 1 { 2 * n } else { n };
            if n == 0 || m % t.field_order() != 0 {
                return Err(D::Error::custom(format!(
                    "entries do not lie in the cyclotomic field of order {n}"
                )));
            }
        }
        if let Some(inf) = raw.infinity {
            if inf != t.at_infinity {
                return Err(D::Error::custom(
                    "matrix at infinity violates the product relation",
                ));
            }
        }
        Ok(t)
    }
}

/// Eigenvalue search order used when none is given.
pub fn default_search_order(t: &MonodromyTuple) -> u32 {
    lcm(2 * t.field_order(), 12).min(crate::cyclotomic::order_limit())
}

/// Jordan type of every local monodromy, infinity first.
pub fn jordan_profile(t: &MonodromyTuple, search_order: Option<u32>) -> Result<FormalLocalSystem> {
    let n = search_order.unwrap_or_else(|| default_search_order(t));
    let mut punctures = vec![INFINITY.to_string()];
    let mut classes = vec![jordan_type(&t.at_infinity, n)?];
    for (p, m) in t.punctures.iter().zip(&t.matrices) {
        punctures.push(p.clone());
        classes.push(jordan_type(m, n)?);
    }
    FormalLocalSystem::new(GroupSpecTag::gl(t.rank), punctures, classes)
}

/// Middle convolution `MC_lambda` (Dettweiler-Reiter), for `lambda != 1`.
///
/// With `A_inf A_p ... A_1 = 1` the block matrices `B_k` satisfy the same
/// relation, so no reordering is needed.
pub fn middle_convolution(t: &MonodromyTuple, lambda: RootOfUnity) -> Result<MonodromyTuple> {
    if lambda.is_one() {
        return Err(Error::TrivialCharacter);
    }
    if t.rank == 1 {
        let nontrivial = t.matrices.iter().filter(|m| !m.is_identity()).count();
        if nontrivial < 2 {
            return Err(Error::PassThrough(
                "rank-one system with fewer than two nontrivial finite punctures".into(),
            ));
        }
    }
    let r = t.rank;
    let p = t.matrices.len();
    let dim = p * r;
    let lam = lambda.to_cyclotomic();
    let c = &t.matrices;
    let one = CyclotomicNumber::one();
    let c_minus: Vec<Matrix> = c.iter().map(|m| m.shift(&one)).collect();

    let mut b = Vec::with_capacity(p);
    for k in 0..p {
        let mut m = Matrix::identity(dim);
        for i in 0..r {
            for jblk in 0..p {
                let block = match jblk.cmp(&k) {
                    std::cmp::Ordering::Less => c_minus[jblk].clone(),
                    std::cmp::Ordering::Equal => c[k].scale(&lam),
                    std::cmp::Ordering::Greater => c_minus[jblk].scale(&lam),
                };
                for j in 0..r {
                    m.set(k * r + i, jblk * r + j, block.get(i, j).clone());
                }
            }
        }
        b.push(m);
    }

    // K: kernels of C_k - 1 placed in the k-th block; L: joint kernel of B_k - 1
    let mut sub: Vec<Vector> = Vec::new();
    for (k, cm) in c_minus.iter().enumerate() {
        for v in cm.kernel() {
            let mut w = vec![CyclotomicNumber::zero(); dim];
            w[k * r..(k + 1) * r].clone_from_slice(&v);
            sub.push(w);
        }
    }
    let shifted: Vec<Matrix> = b.iter().map(|m| m.shift(&one)).collect();
    sub.extend(joint_kernel(&shifted)?);

    let q = induced_on_quotient(&b, &sub)?;
    MonodromyTuple::new(t.punctures.clone(), q)
}

/// Multiplies `A_k` by the scalar given for its label (missing labels mean 1).
pub fn twist(
    t: &MonodromyTuple,
    scalars: &BTreeMap<String, RootOfUnity>,
) -> Result<MonodromyTuple> {
    for label in scalars.keys() {
        if !t.punctures.contains(label) {
            return Err(Error::PunctureMismatch);
        }
    }
    let mats = t
        .punctures
        .iter()
        .zip(&t.matrices)
        .map(|(p, m)| match scalars.get(p) {
            Some(s) => m.scale(&s.to_cyclotomic()),
            None => m.clone(),
        })
        .collect();
    MonodromyTuple::new(t.punctures.clone(), mats)
}

pub fn tensor(a: &MonodromyTuple, b: &MonodromyTuple) -> Result<MonodromyTuple> {
    if a.punctures.len() != b.punctures.len() {
        return Err(Error::PunctureMismatch);
    }
    let mats = a
        .punctures
        .iter()
        .zip(&a.matrices)
        .map(|(p, m)| {
            b.matrix_at(p)
                .map(|n| m.kron(n))
                .ok_or(Error::PunctureMismatch)
        })
        .collect::<Result<_>>()?;
    // the product relation only survives if both tuples list punctures in the same order
    if a.punctures != b.punctures {
        return Err(Error::PunctureMismatch);
    }
    MonodromyTuple::new(a.punctures.clone(), mats)
}

/// Action on `Lambda^2` in the basis `e_i ^ e_j`, `i < j`, lexicographic.
pub fn exterior_square_matrix(a: &Matrix) -> Matrix {
    let n = a.rows();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut out = Matrix::zeros(pairs.len(), pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for (row, &(k, l)) in pairs.iter().enumerate() {
            let v = &(a.get(k, i) * a.get(l, j)) - &(a.get(l, i) * a.get(k, j));
            out.set(row, col, v);
        }
    }
    out
}

/// Action on `Sym^2` in the basis `e_i e_j`, `i <= j`, lexicographic.
pub fn symmetric_square_matrix(a: &Matrix) -> Matrix {
    let n = a.rows();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut out = Matrix::zeros(pairs.len(), pairs.len());
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for (row, &(k, l)) in pairs.iter().enumerate() {
            let v = if k == l {
                a.get(k, i) * a.get(k, j)
            } else {
                &(a.get(k, i) * a.get(l, j)) + &(a.get(l, i) * a.get(k, j))
            };
            out.set(row, col, v);
        }
    }
    out
}

pub fn sym2(t: &MonodromyTuple) -> Result<MonodromyTuple> {
    t.map(|m| Ok(symmetric_square_matrix(m)))
}

pub fn lambda2(t: &MonodromyTuple) -> Result<MonodromyTuple> {
    if t.rank < 2 {
        return Err(Error::ZeroQuotient);
    }
    t.map(|m| Ok(exterior_square_matrix(m)))
}

/// Pullback along `z -> z^k` of a tuple on `P^1 - {0, 1, inf}` with finite
/// punctures listed as `["0", "1"]`. The new tuple is
/// `[A_0^k, B_{k-1}, ..., B_0]` with `B_j = A_0^j A_1 A_0^-j`, the matrix `B_j`
/// being labelled by the `j`-th power of `zeta(k)`.
pub fn pullback_power(t: &MonodromyTuple, k: u32) -> Result<MonodromyTuple> {
    if k == 0 {
        return Err(Error::Schema("pullback degree must be positive".into()));
    }
    if t.punctures != ["0", "1"] {
        return Err(Error::UnsupportedPunctures(t.punctures.clone()));
    }
    let a0 = &t.matrices[0];
    let a1 = &t.matrices[1];
    let mut labels = vec!["0".to_string()];
    let mut mats = vec![a0.pow(k as i64)?];
    for j in (0..k as i64).rev() {
        labels.push(RootOfUnity::new(k, j).to_string());
        mats.push(a0.pow(j)?.mul(a1)?.mul(&a0.pow(-j)?)?);
    }
    MonodromyTuple::new(labels, mats)
}

/// `Sp_4 -> SO_5`: the action on the kernel of the contraction
/// `Lambda^2 V -> K` with the invariant alternating form.
pub fn project_sp4_to_so5(t: &MonodromyTuple) -> Result<MonodromyTuple> {
    if t.rank != 4 {
        return Err(Error::RankNot4(t.rank));
    }
    let g = match invariant_bilinear(&t.all_matrices())? {
        FormClassification::Symplectic(g) => g,
        _ => return Err(Error::NotSymplectic),
    };
    let mut functional = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            functional.push(g.get(i, j).clone());
        }
    }
    let basis = Matrix::from_rows(vec![functional])?.kernel();
    t.map(|m| restrict_to_subspace(&exterior_square_matrix(m), &basis))
}

/// `SL_4 -> SO_6`: the exterior square.
pub fn project_sl4_to_so6(t: &MonodromyTuple) -> Result<MonodromyTuple> {
    if t.rank != 4 {
        return Err(Error::RankNot4(t.rank));
    }
    for (p, m) in t.punctures.iter().zip(&t.matrices) {
        if !m.det()?.is_one() {
            return Err(Error::DetNotOne(p.clone()));
        }
    }
    if !t.at_infinity.det()?.is_one() {
        return Err(Error::DetNotOne(INFINITY.into()));
    }
    lambda2(t)
}

/// An `X` with `X A_k X^-1 = B_k` for all `k`, if the tuples are simultaneously conjugate.
pub fn are_conjugate(a: &MonodromyTuple, b: &MonodromyTuple) -> Result<Option<Matrix>> {
    if a.rank != b.rank || a.punctures != b.punctures {
        return Err(Error::ShapeMismatch(
            "tuples differ in rank or punctures".into(),
        ));
    }
    conjugating_matrix(&a.matrices, &b.matrices)
}

/// Dimension of the algebra generated by the local monodromies.
pub fn generated_algebra_dim(t: &MonodromyTuple) -> usize {
    let n = t.rank;
    let flat = |m: &Matrix| m.entries().to_vec();
    let mut ech = Echelon::new(n * n);
    let mut basis = vec![Matrix::identity(n)];
    ech.insert(flat(&basis[0]));
    let mut frontier = basis.clone();
    while !frontier.is_empty() && ech.rank() < n * n {
        let mut next = Vec::new();
        for x in &frontier {
            for g in &t.matrices {
                let y = g.mul(x).expect("square matrices of equal size");
                if ech.insert(flat(&y)) {
                    next.push(y);
                }
            }
        }
        basis.extend(next.iter().cloned());
        frontier = next;
    }
    ech.rank()
}

/// Absolute irreducibility: the local monodromies generate the full matrix algebra.
pub fn is_irreducible(t: &MonodromyTuple) -> bool {
    generated_algebra_dim(t) == t.rank * t.rank
}

/// The bilinear forms preserved by the whole tuple.
pub fn invariant_form(t: &MonodromyTuple) -> Result<FormClassification> {
    invariant_bilinear(&t.all_matrices())
}

/// Jordan classes of a tuple, as a map from label (with `inf`) to class.
pub fn classes_by_label(f: &FormalLocalSystem) -> BTreeMap<String, JordanClass> {
    f.punctures
        .iter()
        .cloned()
        .zip(f.classes.iter().cloned())
        .collect()
}

//! Dense exact linear algebra over cyclotomic numbers.
//!
//! Everything here is plain Gaussian elimination with normalized pivots. The
//! systems are small (at most a few hundred unknowns), so clarity wins over
//! fraction-free tricks.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cyclotomic::{lcm, CyclotomicNumber, RootOfUnity};
use crate::error::{Error, Result};
use crate::localdata::JordanClass;

pub type Vector = Vec<CyclotomicNumber>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<CyclotomicNumber>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![CyclotomicNumber::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = CyclotomicNumber::one();
        }
        m
    }

    pub fn scalar(n: usize, c: &CyclotomicNumber) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn diagonal(entries: &[CyclotomicNumber]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<CyclotomicNumber>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::ShapeMismatch(
                "matrix must have positive dimensions".into(),
            ));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        let v = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| CyclotomicNumber::from_integer(x))
                    .collect()
            })
            .collect();
        Self::from_rows(v).expect("well-formed integer rows")
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vector]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if c == 0 || r == 0 || cols.iter().any(|v| v.len() != r) {
            return Err(Error::ShapeMismatch("bad column list".into()));
        }
        let mut m = Self::zeros(r, c);
        for (j, v) in cols.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                m.data[i * c + j] = x.clone();
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &CyclotomicNumber {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CyclotomicNumber) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[CyclotomicNumber] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<CyclotomicNumber>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[CyclotomicNumber] {
        &self.data
    }

    /// lcm of the cyclotomic orders of all entries.
    pub fn cyclotomic_order(&self) -> u32 {
        self.data.iter().fold(1, |acc, x| lcm(acc, x.order()))
    }

    /// Re-expresses every entry in the field of order `m`.
    pub fn embed(&self, m: u32) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|x| x.embed(m))
            .collect::<Result<_>>()?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::SizeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] = &out.data[idx] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[CyclotomicNumber]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::SizeMismatch("matrix-vector product".into()));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(CyclotomicNumber::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    fn zip_with(
        &self,
        other: &Matrix,
        f: impl Fn(&CyclotomicNumber, &CyclotomicNumber) -> CyclotomicNumber,
    ) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SizeMismatch("elementwise operation".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &CyclotomicNumber) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// `self - c * I`.
    pub fn shift(&self, c: &CyclotomicNumber) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let idx = i * self.cols + i;
            m.data[idx] = &m.data[idx] - c;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(CyclotomicNumber::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.get(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    pub fn trace(&self) -> CyclotomicNumber {
        (0..self.rows.min(self.cols)).fold(CyclotomicNumber::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new(self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i).to_vec());
        }
        ech.rank()
    }

    /// Basis of the right kernel `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<Vector> {
        let mut ech = Echelon::new(self.cols);
        for i in 0..self.rows {
            ech.insert(self.row(i).to_vec());
        }
        ech.kernel()
    }

    pub fn det(&self) -> Result<CyclotomicNumber> {
        if !self.is_square() {
            return Err(Error::SizeMismatch(
                "determinant of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = CyclotomicNumber::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
                return Ok(CyclotomicNumber::zero());
            };
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det = &det * &a[c][c];
            let inv = a[c][c].inv()?;
            for r in c + 1..n {
                if a[r][c].is_zero() {
                    continue;
                }
                let f = &a[r][c] * &inv;
                for k in c..n {
                    let t = &f * &a[c][k];
                    a[r][k] = &a[r][k] - &t;
                }
            }
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("inverse of a non-square matrix".into()));
        }
        self.solve(&Matrix::identity(self.rows))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Solves `self * X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if !self.is_square() || rhs.rows != self.rows {
            return Err(Error::SizeMismatch("solve".into()));
        }
        let n = self.rows;
        let m = rhs.cols;
        let mut a: Vec<Vec<CyclotomicNumber>> = (0..n)
            .map(|i| self.row(i).iter().chain(rhs.row(i)).cloned().collect())
            .collect();
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !a[r][c].is_zero())
                .ok_or(Error::Singular)?;
            a.swap(p, c);
            let inv = a[c][c].inv()?;
            let pivot: Vec<CyclotomicNumber> = a[c].iter().map(|x| x * &inv).collect();
            for (r, row) in a.iter_mut().enumerate() {
                if r == c || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot).skip(c) {
                    if !p.is_zero() {
                        *x = &*x - &(&f * p);
                    }
                }
            }
            a[c] = pivot;
        }
        let mut out = Matrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                out.data[i * m + j] = a[i][n + j].clone();
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: i64) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::SizeMismatch("power of a non-square matrix".into()));
        }
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Matrix::identity(self.rows);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * c + j * other.cols + l] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn direct_sum(blocks: &[Matrix]) -> Matrix {
        let r: usize = blocks.iter().map(|b| b.rows).sum();
        let c: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zeros(r, c);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.data[(r0 + i) * c + c0 + j] = b.get(i, j).clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Single Jordan block `mu * I + N` of size `n`.
    pub fn jordan_block(mu: &CyclotomicNumber, n: usize) -> Matrix {
        let mut m = Matrix::scalar(n, mu);
        for i in 0..n.saturating_sub(1) {
            m.data[i * n + i + 1] = CyclotomicNumber::one();
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.is_square() && self.transpose() == self.scale(&CyclotomicNumber::from_integer(-1))
    }

    /// `A^T G A == G`.
    pub fn preserves_form(&self, gram: &Matrix) -> bool {
        self.transpose()
            .mul(gram)
            .and_then(|x| x.mul(self))
            .map(|x| x == *gram)
            .unwrap_or(false)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            f.write_str("[")?;
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            f.write_str("]\n")?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|i| self.row(i).iter().map(ToString::to_string).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rows = Vec::<Vec<CyclotomicNumber>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(D::Error::custom)
    }
}

/// Incrementally maintained reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    // rows normalized so that row[pivot] = 1, sorted by insertion
    rows: Vec<(usize, Vector)>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn reduce(&self, row: &mut [CyclotomicNumber]) {
        for (p, prow) in &self.rows {
            if row[*p].is_zero() {
                continue;
            }
            let f = row[*p].clone();
            for (x, y) in row.iter_mut().zip(prow) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
    }

    /// Whether `row` already lies in the span.
    pub fn contains(&self, row: &[CyclotomicNumber]) -> bool {
        let mut r = row.to_vec();
        self.reduce(&mut r);
        r.iter().all(CyclotomicNumber::is_zero)
    }

    /// Adds `row` to the span; returns false when it was already dependent.
    pub fn insert(&mut self, mut row: Vector) -> bool {
        assert_eq!(row.len(), self.ncols, "row length mismatch");
        self.reduce(&mut row);
        let Some(p) = row.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = row[p].inv().expect("nonzero pivot");
        for x in row.iter_mut() {
            if !x.is_zero() {
                *x = &*x * &inv;
            }
        }
        // keep earlier rows reduced with respect to the new pivot
        for (_, prow) in self.rows.iter_mut() {
            if prow[p].is_zero() {
                continue;
            }
            let f = prow[p].clone();
            for (x, y) in prow.iter_mut().zip(&row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        self.rows.push((p, row));
        true
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|(p, _)| *p).collect()
    }

    /// Basis of `{v : r . v = 0 for every inserted row r}`, one vector per free column,
    /// in increasing column order.
    pub fn kernel(&self) -> Vec<Vector> {
        let pivots = self.pivots();
        let mut is_pivot = vec![false; self.ncols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![CyclotomicNumber::zero(); self.ncols];
                v[f] = CyclotomicNumber::one();
                for (p, row) in &self.rows {
                    if !row[f].is_zero() {
                        v[*p] = -&row[f];
                    }
                }
                v
            })
            .collect()
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.rows.iter().map(|(_, r)| r.clone()).collect()
    }
}

/// Rank of a list of vectors.
pub fn span_rank(vectors: &[Vector]) -> usize {
    let Some(first) = vectors.first() else {
        return 0;
    };
    let mut ech = Echelon::new(first.len());
    for v in vectors {
        ech.insert(v.clone());
    }
    ech.rank()
}

/// The maximal linearly independent prefix-greedy subset of `vectors`.
pub fn independent_subset(vectors: &[Vector]) -> Vec<Vector> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let mut ech = Echelon::new(first.len());
    vectors
        .iter()
        .filter(|v| ech.insert((*v).clone()))
        .cloned()
        .collect()
}

/// Intersection of the right kernels of several matrices with the same column count.
pub fn joint_kernel(mats: &[Matrix]) -> Result<Vec<Vector>> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let n = first.cols();
    let mut ech = Echelon::new(n);
    for m in mats {
        if m.cols() != n {
            return Err(Error::SizeMismatch("joint kernel".into()));
        }
        for i in 0..m.rows() {
            ech.insert(m.row(i).to_vec());
        }
    }
    Ok(ech.kernel())
}

/// Matrix `R` with `M S = S R`, where the columns of `S` span an `M`-invariant subspace.
pub fn restrict_to_subspace(m: &Matrix, basis: &[Vector]) -> Result<Matrix> {
    let s = Matrix::from_columns(basis)?;
    let d = s.cols();
    let ms = m.mul(&s)?;
    // pick d independent rows of S
    let mut ech = Echelon::new(d);
    let mut picked = Vec::with_capacity(d);
    for i in 0..s.rows() {
        if ech.insert(s.row(i).to_vec()) {
            picked.push(i);
            if picked.len() == d {
                break;
            }
        }
    }
    if picked.len() != d {
        return Err(Error::ShapeMismatch(
            "subspace basis is not independent".into(),
        ));
    }
    let sp = Matrix::from_rows(picked.iter().map(|&i| s.row(i).to_vec()).collect())?;
    let msp = Matrix::from_rows(picked.iter().map(|&i| ms.row(i).to_vec()).collect())?;
    let r = sp.solve(&msp)?;
    if s.mul(&r)? != ms {
        return Err(Error::ShapeMismatch("subspace is not invariant".into()));
    }
    Ok(r)
}

/// Completion of an independent list of vectors to a basis of the whole space,
/// adding standard basis vectors in index order.
pub fn complete_basis(basis: &[Vector], dim: usize) -> Vec<Vector> {
    let mut ech = Echelon::new(dim);
    for v in basis {
        ech.insert(v.clone());
    }
    let mut extra = Vec::new();
    for i in 0..dim {
        if ech.rank() == dim {
            break;
        }
        let mut e = vec![CyclotomicNumber::zero(); dim];
        e[i] = CyclotomicNumber::one();
        if ech.insert(e.clone()) {
            extra.push(e);
        }
    }
    extra
}

/// Actions induced on `V / W` by each matrix, where `W` (spanned by `sub`) is
/// invariant under all of them. The quotient basis is the image of the standard
/// completion from [`complete_basis`], so the result is deterministic.
pub fn induced_on_quotient(mats: &[Matrix], sub: &[Vector]) -> Result<Vec<Matrix>> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let n = first.rows();
    let sub = independent_subset(sub);
    let extra = complete_basis(&sub, n);
    if extra.is_empty() {
        return Err(Error::ZeroQuotient);
    }
    let all: Vec<Vector> = sub.iter().chain(&extra).cloned().collect();
    let p = Matrix::from_columns(&all)?;
    let c = Matrix::from_columns(&extra)?;
    let d = sub.len();
    let q = extra.len();
    mats.iter()
        .map(|m| {
            let y = p.solve(&m.mul(&c)?)?;
            // the W-block column of P^-1 M P must vanish below the diagonal
            if !sub.is_empty() {
                let ys = p.solve(&m.mul(&Matrix::from_columns(&sub)?)?)?;
                for i in d..n {
                    for j in 0..d {
                        if !ys.get(i, j).is_zero() {
                            return Err(Error::ShapeMismatch("subspace is not invariant".into()));
                        }
                    }
                }
            }
            let mut out = Matrix::zeros(q, q);
            for i in 0..q {
                for j in 0..q {
                    out.set(i, j, y.get(d + i, j).clone());
                }
            }
            Ok(out)
        })
        .collect()
}

/// The Lie algebra in which fixed points are counted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Gl(usize),
    Sl(usize),
    /// Orthogonal algebra of a symmetric Gram matrix.
    So(Matrix),
    /// Symplectic algebra of an alternating Gram matrix.
    Sp(Matrix),
}

impl GroupSpec {
    pub fn size(&self) -> usize {
        match self {
            GroupSpec::Gl(n) | GroupSpec::Sl(n) => *n,
            GroupSpec::So(g) | GroupSpec::Sp(g) => g.rows(),
        }
    }
}

fn unknown(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

/// Dimension of `{X in g : A X A^-1 = X for all A}`.
pub fn commutant_dim(mats: &[Matrix], spec: &GroupSpec) -> Result<usize> {
    let n = spec.size();
    for a in mats {
        if !a.is_square() || a.rows() != n {
            return Err(Error::SizeMismatch(format!("expected {n}x{n} matrices")));
        }
    }
    let mut ech = Echelon::new(n * n);
    for a in mats {
        insert_commutator_rows(&mut ech, a, a);
    }
    match spec {
        GroupSpec::Gl(_) => {}
        GroupSpec::Sl(_) => {
            let mut row = vec![CyclotomicNumber::zero(); n * n];
            for i in 0..n {
                row[unknown(n, i, i)] = CyclotomicNumber::one();
            }
            ech.insert(row);
        }
        GroupSpec::So(g) | GroupSpec::Sp(g) => {
            if !g.is_square() || g.rows() != n {
                return Err(Error::SizeMismatch("Gram matrix size".into()));
            }
            let symmetric = matches!(spec, GroupSpec::So(_));
            if (symmetric && !g.is_symmetric()) || (!symmetric && !g.is_antisymmetric()) {
                return Err(Error::Schema("Gram matrix has the wrong symmetry".into()));
            }
            if !g.is_invertible() {
                return Err(Error::FormNotInvertible);
            }
            insert_form_rows(&mut ech, g);
        }
    }
    Ok(n * n - ech.rank())
}

// Rows of the linear system X A - B X = 0 in the unknowns X (row-major).
fn insert_commutator_rows(ech: &mut Echelon, a: &Matrix, b: &Matrix) {
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![CyclotomicNumber::zero(); n * n];
            for k in 0..n {
                let akj = a.get(k, j);
                if !akj.is_zero() {
                    let idx = unknown(n, i, k);
                    row[idx] = &row[idx] + akj;
                }
                let bik = b.get(i, k);
                if !bik.is_zero() {
                    let idx = unknown(n, k, j);
                    row[idx] = &row[idx] - bik;
                }
            }
            ech.insert(row);
        }
    }
}

// Rows of X^T G + G X = 0.
fn insert_form_rows(ech: &mut Echelon, g: &Matrix) {
    let n = g.rows();
    for i in 0..n {
        for j in 0..n {
            let mut row = vec![CyclotomicNumber::zero(); n * n];
            for k in 0..n {
                let gkj = g.get(k, j);
                if !gkj.is_zero() {
                    let idx = unknown(n, k, i);
                    row[idx] = &row[idx] + gkj;
                }
                let gik = g.get(i, k);
                if !gik.is_zero() {
                    let idx = unknown(n, k, j);
                    row[idx] = &row[idx] + gik;
                }
            }
            ech.insert(row);
        }
    }
}

fn unflatten(n: usize, v: &[CyclotomicNumber]) -> Matrix {
    Matrix {
        rows: n,
        cols: n,
        data: v.to_vec(),
    }
}

/// Basis of `{X : X A_k = B_k X for all k}`.
pub fn intertwiners(a: &[Matrix], b: &[Matrix]) -> Result<Vec<Matrix>> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch("tuples of different length".into()));
    }
    let Some(first) = a.first() else {
        return Ok(Vec::new());
    };
    let n = first.rows();
    for m in a.iter().chain(b) {
        if !m.is_square() || m.rows() != n {
            return Err(Error::ShapeMismatch("matrix sizes differ".into()));
        }
    }
    let mut ech = Echelon::new(n * n);
    for (x, y) in a.iter().zip(b) {
        insert_commutator_rows(&mut ech, x, y);
    }
    Ok(ech.kernel().iter().map(|v| unflatten(n, v)).collect())
}

/// An invertible `X` with `X A_k X^-1 = B_k` for all `k`, if one exists.
///
/// When the intertwiner space has dimension above one, integer combinations of
/// the basis are tried in a fixed order; for irreducible tuples the space has
/// dimension at most one and the answer is exact.
pub fn conjugating_matrix(a: &[Matrix], b: &[Matrix]) -> Result<Option<Matrix>> {
    let basis = intertwiners(a, b)?;
    if basis.is_empty() {
        return Ok(None);
    }
    if basis.len() == 1 {
        return Ok(basis[0].is_invertible().then(|| basis[0].clone()));
    }
    for trial in 0..40u64 {
        let mut x = Matrix::zeros(basis[0].rows(), basis[0].cols());
        for (idx, m) in basis.iter().enumerate() {
            // deterministic spread of small coefficients
            let c = ((trial + 1) * 7919 + (idx as u64 + 1) * 104_729) % 97;
            let c = c as i64 - 48;
            x = x.add(&m.scale(&CyclotomicNumber::from_integer(c)))?;
        }
        if x.is_invertible() {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Bilinear forms preserved by a family of matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormClassification {
    Orthogonal(Matrix),
    Symplectic(Matrix),
    None,
    /// Solution space of dimension above one.
    Multiple(usize),
}

impl FormClassification {
    pub fn kind(&self) -> &'static str {
        match self {
            FormClassification::Orthogonal(_) => "orthogonal",
            FormClassification::Symplectic(_) => "symplectic",
            FormClassification::None => "none",
            FormClassification::Multiple(_) => "multiple",
        }
    }
}

/// Solves `A^T G A = G` for all given `A`.
pub fn invariant_bilinear(mats: &[Matrix]) -> Result<FormClassification> {
    let Some(first) = mats.first() else {
        return Ok(FormClassification::None);
    };
    let n = first.rows();
    let mut ech = Echelon::new(n * n);
    for a in mats {
        if !a.is_square() || a.rows() != n {
            return Err(Error::SizeMismatch("invariant form".into()));
        }
        // A^T G - G A^-1 = 0
        let at = a.transpose();
        let ainv = a.inverse()?;
        insert_commutator_rows(&mut ech, &ainv, &at);
    }
    let sols = ech.kernel();
    match sols.len() {
        0 => Ok(FormClassification::None),
        1 => {
            let g = unflatten(n, &sols[0]);
            if g.is_symmetric() {
                Ok(FormClassification::Orthogonal(g))
            } else if g.is_antisymmetric() {
                Ok(FormClassification::Symplectic(g))
            } else {
                Ok(FormClassification::None)
            }
        }
        d => Ok(FormClassification::Multiple(d)),
    }
}

/// Jordan type of `a`, searching eigenvalues among the roots of unity of order
/// dividing `search_order`.
pub fn jordan_type(a: &Matrix, search_order: u32) -> Result<JordanClass> {
    if !a.is_square() {
        return Err(Error::SizeMismatch(
            "Jordan type of a non-square matrix".into(),
        ));
    }
    let n = a.rows();
    let mut parts = Vec::new();
    let mut found = 0;
    for k in 0..search_order {
        if found == n {
            break;
        }
        let mu = RootOfUnity::new(search_order, k as i64);
        let shifted = a.shift(&mu.to_cyclotomic());
        let mut ranks = vec![n];
        let mut power = shifted.clone();
        loop {
            let r = power.rank();
            let last = *ranks.last().unwrap();
            if r == last {
                break;
            }
            ranks.push(r);
            if r == 0 {
                break;
            }
            power = power.mul(&shifted)?;
        }
        let multiplicity = n - *ranks.last().unwrap();
        if multiplicity == 0 {
            continue;
        }
        found += multiplicity;
        // blocks of size >= j: ranks[j-1] - ranks[j]
        let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
        for (j, &cnt) in at_least.iter().enumerate() {
            let next = at_least.get(j + 1).copied().unwrap_or(0);
            for _ in 0..cnt - next {
                parts.push((mu, j + 1));
            }
        }
    }
    if found != n {
        return Err(Error::NotQuasiUnipotent {
            search_order,
            found,
            size: n,
        });
    }
    Ok(JordanClass::new(parts))
}

//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

pub mod suites;

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rls_core::convolution::{is_irreducible, middle_convolution, twist, MonodromyTuple};
use rls_core::linalg::{Echelon, Matrix};
use rls_core::{CyclotomicNumber, JordanClass, RootOfUnity};

pub const INDEX: u32 = 12;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn root(rng: &mut ChaCha8Rng) -> RootOfUnity {
    RootOfUnity::new(INDEX, rng.gen_range(0..INDEX as i64))
}

pub fn nontrivial_root(rng: &mut ChaCha8Rng) -> RootOfUnity {
    RootOfUnity::new(INDEX, rng.gen_range(1..INDEX as i64))
}

pub fn labels(p: usize) -> Vec<String> {
    (0..p).map(|i| i.to_string()).collect()
}

/// Random integer matrix with nonzero determinant.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-2..=2)).collect())
            .collect();
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        let m = Matrix::from_int_rows(&refs);
        if m.is_invertible() {
            return m;
        }
    }
}

/// Irreducible tuple built from a rank-one system by random twists and
/// middle convolutions, then conjugated by a random integer matrix.
pub fn random_irreducible(rng: &mut ChaCha8Rng, p: usize, max_rank: usize) -> MonodromyTuple {
    loop {
        let entries: Vec<(String, RootOfUnity)> = labels(p)
            .into_iter()
            .map(|l| (l, nontrivial_root(rng)))
            .collect();
        let refs: Vec<(&str, RootOfUnity)> =
            entries.iter().map(|(l, r)| (l.as_str(), *r)).collect();
        let mut t = MonodromyTuple::rank_one(&refs).unwrap();
        let steps = rng.gen_range(0..4);
        for _ in 0..steps {
            let scalars: BTreeMap<String, RootOfUnity> =
                labels(p).into_iter().map(|l| (l, root(rng))).collect();
            let twisted = twist(&t, &scalars).unwrap();
            match middle_convolution(&twisted, nontrivial_root(rng)) {
                Ok(next) if next.rank() <= max_rank => t = next,
                _ => break,
            }
        }
        if !is_irreducible(&t) {
            continue;
        }
        if t.rank() == 1 && t.matrices().iter().filter(|m| !m.is_identity()).count() < 2 {
            continue;
        }
        let pm = random_invertible(rng, t.rank());
        return t.conjugate_by(&pm).unwrap();
    }
}

/// Jordan class read off from nullities of powers of `A - mu`, for every
/// `mu` of order dividing `order`.
pub fn oracle_jordan(a: &Matrix, order: u32) -> JordanClass {
    let n = a.rows();
    let mut parts = Vec::new();
    for k in 0..order as i64 {
        let mu = RootOfUnity::new(order, k);
        let shifted = a.sub(&Matrix::scalar(n, &mu.to_cyclotomic())).unwrap();
        let mut nullities = vec![0usize];
        let mut power = Matrix::identity(n);
        for _ in 0..n {
            power = power.mul(&shifted).unwrap();
            nullities.push(power.kernel().len());
        }
        // number of blocks of size >= j is nullity_j - nullity_{j-1}
        let at_least: Vec<usize> = nullities.windows(2).map(|w| w[1] - w[0]).collect();
        for j in 0..n {
            let bigger = if j + 1 < n { at_least[j + 1] } else { 0 };
            for _ in 0..at_least[j] - bigger {
                parts.push((mu, j + 1));
            }
        }
    }
    JordanClass::new(parts)
}

fn flatten(m: &Matrix) -> Vec<CyclotomicNumber> {
    m.entries().to_vec()
}

fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    m.set(i, j, CyclotomicNumber::one());
    m
}

/// Dimension of `{X : X^T G + G X = 0, A X = X A}` by a direct computation in
/// the basis of elementary matrices.
pub fn oracle_centralizer_in_form(a: &Matrix, g: &Matrix) -> usize {
    let n = a.rows();
    let ainv = a.inverse().unwrap();
    // image of each elementary matrix under the two linear conditions
    let mut columns = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let e = unit(n, i, j);
            let form = e
                .transpose()
                .mul(g)
                .unwrap()
                .add(&g.mul(&e).unwrap())
                .unwrap();
            let conj = a.mul(&e).unwrap().mul(&ainv).unwrap().sub(&e).unwrap();
            let mut col = flatten(&form);
            col.extend(flatten(&conj));
            columns.push(col);
        }
    }
    // kernel of the matrix whose columns are the images
    let m = Matrix::from_columns(&columns).unwrap();
    m.kernel().len()
}

/// Dimension of the centralizer of `a` in `gl_n`, by the same direct method.
pub fn oracle_centralizer_gl(a: &Matrix) -> usize {
    let n = a.rows();
    let mut columns = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let e = unit(n, i, j);
            columns.push(flatten(
                &a.mul(&e).unwrap().sub(&e.mul(a).unwrap()).unwrap(),
            ));
        }
    }
    Matrix::from_columns(&columns).unwrap().kernel().len()
}

/// Dimension of the algebra spanned by all words in the matrices.
pub fn oracle_algebra_dim(mats: &[Matrix]) -> usize {
    let n = mats[0].rows();
    let mut ech = Echelon::new(n * n);
    let mut words = vec![Matrix::identity(n)];
    ech.insert(flatten(&words[0]));
    for _ in 0..n * n {
        let mut next = Vec::new();
        for w in &words {
            for m in mats {
                let x = w.mul(m).unwrap();
                if ech.insert(flatten(&x)) {
                    next.push(x);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        words.extend(next);
    }
    ech.rank()
}

/// Random class in `Sp_4` with eigenvalues of order dividing 12.
pub fn random_sp4_class(rng: &mut ChaCha8Rng) -> JordanClass {
    let sp4 = rls_core::GroupSpecTag::new(rls_core::GroupFamily::Sp, 4).unwrap();
    loop {
        let a = root(rng);
        let b = root(rng);
        let shape = rng.gen_range(0..5);
        let parts = match shape {
            0 => vec![(a, 1), (a.inv(), 1), (b, 1), (b.inv(), 1)],
            1 => vec![(a, 2), (a.inv(), 2)],
            2 => vec![(a, 2), (b, 2)],
            3 => vec![(a, 4)],
            _ => vec![(a, 2), (b, 1), (b.inv(), 1)],
        };
        let c = JordanClass::new(parts);
        if rls_core::localdata::validate_class_in_group(&c, &sp4).unwrap() {
            return c;
        }
    }
}

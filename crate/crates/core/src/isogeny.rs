//! Class-level lifting through `Spin_5 = Sp_4 -> SO_5`, `Spin_6 = SL_4 -> SO_6`
//! and the spin representation of `SO_{2n+1}` for `n <= 3`.
//!
//! A class in `SO_m` is read as a multiset of (eigenvalue, `sl2` weight)
//! pairs, see [`JordanClass::weights`]. Pairing each weight with its inverse
//! gives the torus coordinates `x_i`; the spin weights are the half sums
//! `(+-x_1 +- ... +- x_n) / 2`, evaluated with the canonical square root
//! `zeta_N^k -> zeta_{2N}^k`.

use serde::{Deserialize, Serialize};

use crate::convolution::{are_conjugate, project_sl4_to_so6, project_sp4_to_so5, MonodromyTuple};
use crate::cyclotomic::RootOfUnity;
use crate::error::{Error, Result};
use crate::katz::ProjectionMap;
use crate::localdata::{
    validate_class_in_group, FormalLocalSystem, GroupFamily, GroupSpecTag, JordanClass, Weight,
};

/// The two lifts of a class, differing by the central sign.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinLiftResult {
    pub input: JordanClass,
    pub candidates: [JordanClass; 2],
    /// Index of the lift built from canonical square roots.
    pub canonical: usize,
}

impl SpinLiftResult {
    fn from_canonical(input: &JordanClass, lift: JordanClass) -> Self {
        let other = lift.twist(RootOfUnity::MINUS_ONE);
        SpinLiftResult {
            input: input.clone(),
            candidates: [lift, other],
            canonical: 0,
        }
    }

    pub fn canonical_class(&self) -> &JordanClass {
        &self.candidates[self.canonical]
    }
}

// Exponent in (0, 1/2) for eigenvalues other than +-1; positive sl2 weight at +-1.
fn is_positive(w: &Weight) -> bool {
    let (num, den) = w.eigenvalue.turn();
    if den <= 2 {
        w.sl2 > 0
    } else {
        2 * num < den
    }
}

/// Splits a weight multiset closed under inversion into `n` torus coordinates.
fn torus_coordinates(weights: &[Weight], n: usize, what: &JordanClass) -> Result<Vec<Weight>> {
    let mut xs = Vec::with_capacity(n);
    let mut self_dual: std::collections::BTreeMap<Weight, usize> = Default::default();
    for w in weights {
        if w.inverse() == *w {
            *self_dual.entry(*w).or_default() += 1;
        } else if is_positive(w) {
            xs.push(*w);
        }
    }
    let positive = weights
        .iter()
        .filter(|w| w.inverse() != **w && is_positive(w))
        .count();
    let negative = weights
        .iter()
        .filter(|w| w.inverse() != **w && !is_positive(w))
        .count();
    if positive != negative {
        return Err(Error::NotRealizable(format!("{what} is not orthogonal")));
    }
    for (w, count) in self_dual {
        if count % 2 == 1 {
            return Err(Error::NotRealizable(format!("{what} is not orthogonal")));
        }
        xs.extend(std::iter::repeat_n(w, count / 2));
    }
    if xs.len() != n {
        return Err(Error::NotRealizable(format!(
            "{what} has the wrong torus rank"
        )));
    }
    xs.sort();
    Ok(xs)
}

/// Weights `sum_i s_i x_i / 2` over the given sign vectors.
fn half_spin_weights(xs: &[Weight], signs: &[Vec<i8>], what: &JordanClass) -> Result<Vec<Weight>> {
    let roots: Vec<RootOfUnity> = xs.iter().map(|x| x.eigenvalue.canonical_sqrt()).collect();
    signs
        .iter()
        .map(|eps| {
            let mut eigenvalue = RootOfUnity::ONE;
            let mut twice = 0i64;
            for ((x, r), &e) in xs.iter().zip(&roots).zip(eps) {
                eigenvalue = eigenvalue.mul(if e > 0 { *r } else { r.inv() });
                twice += e as i64 * x.sl2;
            }
            if twice % 2 != 0 {
                return Err(Error::NotLiftable(format!(
                    "{what}: half-integral sl2 weight"
                )));
            }
            Ok(Weight {
                eigenvalue,
                sl2: twice / 2,
            })
        })
        .collect()
}

fn all_signs(n: usize) -> Vec<Vec<i8>> {
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect()
}

/// Spin-representation class (rank `2^n`) of a class in `SO_{2n+1}`, `1 <= n <= 3`.
pub fn spin_class(c: &JordanClass, n: usize) -> Result<SpinLiftResult> {
    if !(1..=3).contains(&n) {
        return Err(Error::Schema(format!(
            "spin classes are supported for n <= 3, got n = {n}"
        )));
    }
    let g = GroupSpecTag::new(GroupFamily::So, 2 * n + 1)?;
    if !validate_class_in_group(c, &g)? {
        return Err(Error::NotRealizable(format!("{c} in {g}")));
    }
    let mut weights = c.weights();
    let zero = Weight {
        eigenvalue: RootOfUnity::ONE,
        sl2: 0,
    };
    let idx = weights
        .iter()
        .position(|w| *w == zero)
        .ok_or_else(|| Error::NotRealizable(format!("{c} has no fixed vector")))?;
    weights.remove(idx);
    let xs = torus_coordinates(&weights, n, c)?;
    let ws = half_spin_weights(&xs, &all_signs(n), c)?;
    Ok(SpinLiftResult::from_canonical(
        c,
        JordanClass::from_weights(&ws)?,
    ))
}

/// Lift of a class in `SO_6` to `SL_4` through `Lambda^2`.
///
/// The lift uses the half-spin weights with an odd number of minus signs; the
/// other half-spin representation gives the dual class, which has the same
/// exterior square.
pub fn lift_class_so6_to_sl4(c: &JordanClass) -> Result<SpinLiftResult> {
    let g = GroupSpecTag::new(GroupFamily::So, 6)?;
    if !validate_class_in_group(c, &g)? {
        return Err(Error::NotLiftable(format!("{c} is not in SO6")));
    }
    let xs =
        torus_coordinates(&c.weights(), 3, c).map_err(|e| Error::NotLiftable(e.to_string()))?;
    let signs = vec![
        vec![1, 1, -1],
        vec![1, -1, 1],
        vec![-1, 1, 1],
        vec![-1, -1, -1],
    ];
    let lift = JordanClass::from_weights(&half_spin_weights(&xs, &signs, c)?)?;
    if lift.lambda2() != *c || !lift.det().is_one() {
        return Err(Error::NotLiftable(format!("{c}")));
    }
    Ok(SpinLiftResult::from_canonical(c, lift))
}

/// Class-level `Sp_4 -> SO_5`: the exterior square minus its trivial summand.
pub fn project_class_sp4_to_so5(c: &JordanClass) -> Result<JordanClass> {
    if c.rank() != 4 {
        return Err(Error::RankNot4(c.rank()));
    }
    c.lambda2()
        .remove_trivial_block()
        .ok_or(Error::NotSymplectic)
}

pub fn project_sp4_to_so5_formal(f: &FormalLocalSystem) -> Result<FormalLocalSystem> {
    if f.rank != 4 {
        return Err(Error::RankNot4(f.rank));
    }
    let classes = f
        .classes
        .iter()
        .map(project_class_sp4_to_so5)
        .collect::<Result<_>>()?;
    FormalLocalSystem::new(
        GroupSpecTag::new(GroupFamily::So, 5)?,
        f.punctures.clone(),
        classes,
    )
}

pub fn project_sl4_to_so6_formal(f: &FormalLocalSystem) -> Result<FormalLocalSystem> {
    if f.rank != 4 {
        return Err(Error::RankNot4(f.rank));
    }
    for (p, c) in f.punctures.iter().zip(&f.classes) {
        if !c.det().is_one() {
            return Err(Error::DetNotOne(p.clone()));
        }
    }
    let classes = f.classes.iter().map(JordanClass::lambda2).collect();
    FormalLocalSystem::new(
        GroupSpecTag::new(GroupFamily::So, 6)?,
        f.punctures.clone(),
        classes,
    )
}

/// Whether projecting `lifted` gives a tuple conjugate to `target`.
pub fn verify_lift(
    lifted: &MonodromyTuple,
    target: &MonodromyTuple,
    map: ProjectionMap,
) -> Result<bool> {
    let expected = match map {
        ProjectionMap::Sp4So5 => 5,
        ProjectionMap::Sl4So6 => 6,
    };
    if lifted.rank() != 4 || target.rank() != expected {
        return Err(Error::ShapeMismatch(format!(
            "expected ranks 4 and {expected}, got {} and {}",
            lifted.rank(),
            target.rank()
        )));
    }
    let projected = match map {
        ProjectionMap::Sp4So5 => project_sp4_to_so5(lifted)?,
        ProjectionMap::Sl4So6 => project_sl4_to_so6(lifted)?,
    };
    if projected.punctures() != target.punctures() {
        return Err(Error::ShapeMismatch("puncture lists differ".into()));
    }
    Ok(are_conjugate(&projected, target)?.is_some())
}

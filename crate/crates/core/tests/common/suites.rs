//! Randomized suites shared by the property tests and the acceptance target.
//! Each returns a one-line summary or a description of the first failure.

use std::collections::BTreeMap;

use rand::Rng;

use super::*;
use rls_core::convolution::{
    are_conjugate, jordan_profile, lambda2, middle_convolution, pullback_power, sym2, tensor, twist,
};
use rls_core::isogeny::{project_class_sp4_to_so5, spin_class};
use rls_core::localdata::{
    euler_characteristic, lambda2_formal, mc_formal, pullback_power_formal, sym2_formal,
    tensor_formal, twist_formal,
};
use rls_core::{FormalLocalSystem, GroupSpecTag, RootOfUnity};

type Outcome = std::result::Result<String, String>;

fn chi(f: &FormalLocalSystem) -> i64 {
    euler_characteristic(f, &GroupSpecTag::gl(f.rank)).unwrap()
}

fn random_scalars(rng: &mut ChaCha8Rng, labels: &[String]) -> BTreeMap<String, RootOfUnity> {
    labels.iter().map(|l| (l.clone(), root(rng))).collect()
}

/// `MC_{1/lambda} MC_lambda T` is conjugate to `T`.
pub fn mc_round_trips(seed: u64, count: usize) -> Outcome {
    let mut r = rng(seed);
    let mut max_rank = 0;
    for i in 0..count {
        let p = 2 + r.gen_range(0..2);
        let t = random_irreducible(&mut r, p, 4);
        let lambda = nontrivial_root(&mut r);
        let there = middle_convolution(&t, lambda).map_err(|e| format!("instance {i}: {e}"))?;
        let back =
            middle_convolution(&there, lambda.inv()).map_err(|e| format!("instance {i}: {e}"))?;
        if back.rank() != t.rank() || are_conjugate(&back, &t).unwrap().is_none() {
            return Err(format!(
                "instance {i}: MC_{} MC_{lambda} is not conjugate to the input",
                lambda.inv()
            ));
        }
        max_rank = max_rank.max(t.rank());
    }
    Ok(format!("{count} tuples up to rank {max_rank}"))
}

/// The GL Euler characteristic is unchanged by MC and twists.
pub fn euler_invariance(seed: u64, count: usize) -> Outcome {
    let mut r = rng(seed);
    for i in 0..count {
        let p = 2 + r.gen_range(0..2);
        let t = random_irreducible(&mut r, p, 4);
        let f = jordan_profile(&t, Some(INDEX)).unwrap();
        let lambda = nontrivial_root(&mut r);
        let g = jordan_profile(&middle_convolution(&t, lambda).unwrap(), Some(INDEX)).unwrap();
        let h = jordan_profile(
            &twist(&t, &random_scalars(&mut r, t.punctures())).unwrap(),
            Some(INDEX),
        )
        .unwrap();
        let (a, b, c) = (chi(&f), chi(&g), chi(&h));
        if a != b || a != c {
            return Err(format!("instance {i}: chi {a} -> MC {b}, twist {c}"));
        }
    }
    Ok(format!("{count} tuples"))
}

pub const OPS: [&str; 6] = ["twist", "mc", "tensor", "sym2", "lambda2", "pullback"];

/// Each formal operation predicts the Jordan profile of the matrix operation.
pub fn formal_agreement(seed: u64, count: usize) -> Outcome {
    let mut r = rng(seed);
    let mut done = [0usize; 6];
    for i in 0..count {
        let op = i % OPS.len();
        let p = if op == 5 { 2 } else { 2 + r.gen_range(0..2) };
        let mut t = random_irreducible(&mut r, p, if op == 2 { 2 } else { 3 });
        while op == 4 && t.rank() < 2 {
            t = random_irreducible(&mut r, p, 3);
        }
        let f = jordan_profile(&t, Some(INDEX)).unwrap();
        let pair = match op {
            0 => {
                let s = random_scalars(&mut r, t.punctures());
                (twist_formal(&f, &s), twist(&t, &s))
            }
            1 => {
                let lambda = nontrivial_root(&mut r);
                (mc_formal(&f, lambda), middle_convolution(&t, lambda))
            }
            2 => {
                let u = random_irreducible(&mut r, p, 2);
                let g = jordan_profile(&u, Some(INDEX)).unwrap();
                (tensor_formal(&f, &g), tensor(&t, &u))
            }
            3 => (sym2_formal(&f), sym2(&t)),
            4 => (lambda2_formal(&f), lambda2(&t)),
            _ => {
                let k = r.gen_range(2..4);
                (pullback_power_formal(&f, k), pullback_power(&t, k))
            }
        };
        let (formal, actual) = match pair {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                return Err(format!(
                    "instance {i} ({}): {:?} / {:?}",
                    OPS[op],
                    a.err(),
                    b.err()
                ))
            }
        };
        let observed =
            jordan_profile(&actual, Some(24)).map_err(|e| format!("instance {i}: {e}"))?;
        if !formal.same_local_data(&observed) {
            return Err(format!(
                "instance {i} ({}): predicted {formal}, observed {observed}",
                OPS[op]
            ));
        }
        done[op] += 1;
    }
    let per: Vec<String> = OPS
        .iter()
        .zip(done)
        .map(|(o, n)| format!("{o} {n}"))
        .collect();
    Ok(format!("{count} instances ({})", per.join(", ")))
}

/// Every `Sp_4` class is among the spin lifts of its `SO_5` projection.
pub fn spin_sections(seed: u64, count: usize) -> Outcome {
    let mut r = rng(seed);
    for _ in 0..count {
        let c = random_sp4_class(&mut r);
        let down = project_class_sp4_to_so5(&c).map_err(|e| format!("{c}: {e}"))?;
        let lift = spin_class(&down, 2).map_err(|e| format!("{c} -> {down}: {e}"))?;
        if !lift.candidates.contains(&c) {
            return Err(format!(
                "{c} -> {down} lifts to {} / {}",
                lift.candidates[0], lift.candidates[1]
            ));
        }
        for cand in &lift.candidates {
            if project_class_sp4_to_so5(cand).ok().as_ref() != Some(&down) {
                return Err(format!("lift {cand} of {down} projects elsewhere"));
            }
        }
    }
    Ok(format!("{count} classes"))
}

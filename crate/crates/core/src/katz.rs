//! Katz's algorithm on formal local data: strip a rigid profile down to rank
//! one by alternating twists and middle convolutions, record the inverse
//! sequence as a [`ConstructionPlan`], and replay plans on matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::convolution::{self, is_irreducible, jordan_profile, MonodromyTuple};
use crate::cyclotomic::{lcm, order_limit, RootOfUnity};
use crate::error::{Error, Result};
use crate::isogeny::{project_sl4_to_so6_formal, project_sp4_to_so5_formal};
use crate::localdata::{
    euler_characteristic, lambda2_formal, mc_formal, mc_rank, sym2_formal, tensor_formal,
    twist_formal, FormalLocalSystem, GroupSpecTag, INFINITY,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMap {
    Sp4So5,
    Sl4So6,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum PlanStep {
    Mc {
        lambda: RootOfUnity,
    },
    Twist {
        scalars: BTreeMap<String, RootOfUnity>,
    },
    Sym2,
    Lambda2,
    Tensor {
        plan: Box<ConstructionPlan>,
    },
    Project {
        map: ProjectionMap,
    },
}

/// A rank-one starting point and the operations that build a local system from it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionPlan {
    /// Finite puncture order; defaults to the sorted labels of `base`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub punctures: Option<Vec<String>>,
    pub base: BTreeMap<String, RootOfUnity>,
    #[serde(default)]
    pub steps: Vec<PlanStep>,
}

impl ConstructionPlan {
    pub fn new(
        punctures: Vec<String>,
        base: BTreeMap<String, RootOfUnity>,
        steps: Vec<PlanStep>,
    ) -> Self {
        ConstructionPlan {
            punctures: Some(punctures),
            base,
            steps,
        }
    }

    pub fn puncture_order(&self) -> Vec<String> {
        self.punctures
            .clone()
            .unwrap_or_else(|| self.base.keys().cloned().collect())
    }

    fn validate(&self) -> Result<()> {
        let order = self.puncture_order();
        if order.len() != self.base.len() || order.iter().any(|p| !self.base.contains_key(p)) {
            return Err(Error::Schema(
                "plan puncture list does not match its base".into(),
            ));
        }
        Ok(())
    }

    /// The rank-one tuple the plan starts from.
    pub fn base_tuple(&self) -> Result<MonodromyTuple> {
        self.validate()?;
        let order = self.puncture_order();
        let entries: Vec<(&str, RootOfUnity)> =
            order.iter().map(|p| (p.as_str(), self.base[p])).collect();
        MonodromyTuple::rank_one(&entries)
    }

    /// The rank-one profile the plan starts from.
    pub fn base_profile(&self) -> Result<FormalLocalSystem> {
        self.validate()?;
        let order = self.puncture_order();
        let total = order
            .iter()
            .fold(RootOfUnity::ONE, |acc, p| acc.mul(self.base[p]));
        let mut punctures = vec![INFINITY.to_string()];
        let mut classes = vec![crate::localdata::JordanClass::scalar(total.inv(), 1)];
        for p in &order {
            punctures.push(p.clone());
            classes.push(crate::localdata::JordanClass::scalar(self.base[p], 1));
        }
        FormalLocalSystem::new(GroupSpecTag::gl(1), punctures, classes)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub twist: BTreeMap<String, RootOfUnity>,
    pub lambda: RootOfUnity,
    pub rank_before: usize,
    pub rank_after: usize,
    /// Whether the choice came from exhaustive search rather than the heuristic.
    pub searched: bool,
    pub profile: FormalLocalSystem,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

/// The eigenvalue with the most Jordan blocks, ties broken by algebraic
/// multiplicity and then by the canonical order of roots of unity.
fn dominant(c: &crate::localdata::JordanClass, exclude_one: bool) -> Option<RootOfUnity> {
    c.eigenvalues()
        .into_iter()
        .filter(|mu| !(exclude_one && mu.is_one()))
        .max_by(|a, b| {
            (c.geometric_multiplicity(*a), c.algebraic_multiplicity(*a))
                .cmp(&(c.geometric_multiplicity(*b), c.algebraic_multiplicity(*b)))
                .then(b.cmp(a))
        })
}

struct Choice {
    twist: BTreeMap<String, RootOfUnity>,
    lambda: RootOfUnity,
    next: FormalLocalSystem,
}

fn try_choice(
    f: &FormalLocalSystem,
    twist: BTreeMap<String, RootOfUnity>,
    lambda: RootOfUnity,
) -> Option<(i64, Choice)> {
    if lambda.is_one() {
        return None;
    }
    let twisted = twist_formal(f, &twist).ok()?;
    let rank = mc_rank(&twisted, lambda);
    if rank <= 0 {
        return None;
    }
    let next = mc_formal(&twisted, lambda).ok()?;
    Some((
        rank,
        Choice {
            twist,
            lambda,
            next,
        },
    ))
}

fn heuristic_choice(f: &FormalLocalSystem) -> Option<(i64, Choice)> {
    let mut twist = BTreeMap::new();
    for (p, c) in f.finite() {
        let mu = dominant(c, false)?;
        if !mu.is_one() {
            twist.insert(p.to_string(), mu.inv());
        }
    }
    let twisted = twist_formal(f, &twist).ok()?;
    // in the A_inf * A_p * ... * A_1 = I convention the rank term at infinity is rk(A_inf - lambda)
    let lambda = dominant(twisted.at_infinity(), true)?;
    try_choice(f, twist, lambda)
}

const SEARCH_LIMIT: usize = 20_000;

fn exhaustive_choice(f: &FormalLocalSystem) -> Option<(i64, Choice)> {
    let finite: Vec<(String, Vec<RootOfUnity>)> = f
        .finite()
        .map(|(p, c)| (p.to_string(), c.eigenvalues()))
        .collect();
    let combos: usize = finite.iter().map(|(_, e)| e.len()).product();
    if combos > SEARCH_LIMIT {
        return None;
    }
    let mut best: Option<(i64, Choice)> = None;
    let mut idx = vec![0usize; finite.len()];
    loop {
        let twist: BTreeMap<String, RootOfUnity> = finite
            .iter()
            .zip(&idx)
            .filter(|((_, e), &i)| !e[i].is_one())
            .map(|((p, e), &i)| (p.clone(), e[i].inv()))
            .collect();
        if let Ok(twisted) = twist_formal(f, &twist) {
            for lambda in twisted.at_infinity().eigenvalues() {
                if let Some(cand) = try_choice(f, twist.clone(), lambda) {
                    if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                        best = Some(cand);
                    }
                }
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < finite[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Reduces a rigid profile to rank one; the returned plan rebuilds it.
pub fn reduce(f: &FormalLocalSystem) -> Result<(ConstructionPlan, ReductionTrace)> {
    let gl = GroupSpecTag::gl(f.rank);
    let f = f.clone().with_group(gl)?;
    let chi = euler_characteristic(&f, &gl)?;
    if chi != 2 {
        return Err(Error::NotRigid { chi, threshold: 2 });
    }
    let guard = f.rank * f.punctures.len();
    let mut trace = ReductionTrace::default();
    let mut current = f.clone();
    while current.rank > 1 {
        if trace.steps.len() >= guard {
            return Err(Error::Stuck {
                rank: current.rank,
                best_rank: current.rank as i64,
            });
        }
        let r = current.rank as i64;
        let (choice, searched) = match heuristic_choice(&current) {
            Some((rank, c)) if rank < r => (c, false),
            _ => match exhaustive_choice(&current) {
                Some((rank, c)) if rank < r => (c, true),
                Some((rank, _)) => {
                    return Err(Error::Stuck {
                        rank: current.rank,
                        best_rank: rank,
                    })
                }
                None => {
                    return Err(Error::Stuck {
                        rank: current.rank,
                        best_rank: r,
                    })
                }
            },
        };
        trace.steps.push(ReductionStep {
            twist: choice.twist,
            lambda: choice.lambda,
            rank_before: current.rank,
            rank_after: choice.next.rank,
            searched,
            profile: choice.next.clone(),
        });
        current = choice.next;
    }
    let order = f.finite_labels();
    let base = current
        .finite()
        .map(|(p, c)| (p.to_string(), c.parts()[0].0))
        .collect();
    let mut steps = Vec::new();
    for s in trace.steps.iter().rev() {
        steps.push(PlanStep::Mc {
            lambda: s.lambda.inv(),
        });
        let inverse: BTreeMap<String, RootOfUnity> =
            s.twist.iter().map(|(p, x)| (p.clone(), x.inv())).collect();
        if !inverse.is_empty() {
            steps.push(PlanStep::Twist { scalars: inverse });
        }
    }
    Ok((ConstructionPlan::new(order, base, steps), trace))
}

fn apply_step(t: &MonodromyTuple, step: &PlanStep) -> Result<MonodromyTuple> {
    match step {
        PlanStep::Mc { lambda } => convolution::middle_convolution(t, *lambda),
        PlanStep::Twist { scalars } => convolution::twist(t, scalars),
        PlanStep::Sym2 => convolution::sym2(t),
        PlanStep::Lambda2 => convolution::lambda2(t),
        PlanStep::Tensor { plan } => convolution::tensor(t, &replay(plan)?),
        PlanStep::Project {
            map: ProjectionMap::Sp4So5,
        } => convolution::project_sp4_to_so5(t),
        PlanStep::Project {
            map: ProjectionMap::Sl4So6,
        } => convolution::project_sl4_to_so6(t),
    }
}

/// Applies a sequence of plan steps to an existing tuple.
pub fn apply_steps(t: &MonodromyTuple, steps: &[PlanStep]) -> Result<MonodromyTuple> {
    let mut t = t.clone();
    for (i, step) in steps.iter().enumerate() {
        t = apply_step(&t, step).map_err(|e| Error::at_step(i, e))?;
    }
    Ok(t)
}

/// Executes a plan on matrices.
pub fn replay(plan: &ConstructionPlan) -> Result<MonodromyTuple> {
    apply_steps(&plan.base_tuple()?, &plan.steps)
}

/// Replays a plan on every intermediate tuple, returning all of them (base first).
pub fn replay_all(plan: &ConstructionPlan) -> Result<Vec<MonodromyTuple>> {
    let mut out = vec![plan.base_tuple()?];
    for (i, step) in plan.steps.iter().enumerate() {
        let next =
            apply_step(out.last().expect("nonempty"), step).map_err(|e| Error::at_step(i, e))?;
        out.push(next);
    }
    Ok(out)
}

/// Executes a plan on formal local data only.
pub fn replay_formal(plan: &ConstructionPlan) -> Result<FormalLocalSystem> {
    let mut f = plan.base_profile()?;
    for (i, step) in plan.steps.iter().enumerate() {
        let next = match step {
            PlanStep::Mc { lambda } => mc_formal(&f, *lambda),
            PlanStep::Twist { scalars } => twist_formal(&f, scalars),
            PlanStep::Sym2 => sym2_formal(&f),
            PlanStep::Lambda2 => lambda2_formal(&f),
            PlanStep::Tensor { plan } => replay_formal(plan).and_then(|g| tensor_formal(&f, &g)),
            PlanStep::Project {
                map: ProjectionMap::Sp4So5,
            } => project_sp4_to_so5_formal(&f),
            PlanStep::Project {
                map: ProjectionMap::Sl4So6,
            } => project_sl4_to_so6_formal(&f),
        };
        f = next.map_err(|e| Error::at_step(i, e))?;
    }
    Ok(f)
}

/// Smallest eigenvalue search order covering every eigenvalue in `f`.
pub fn profile_search_order(f: &FormalLocalSystem) -> u32 {
    let n = f
        .classes
        .iter()
        .flat_map(|c| c.eigenvalues())
        .fold(1, |acc, mu| lcm(acc, mu.order()));
    n.min(order_limit())
}

/// Builds an explicit irreducible tuple with the given rigid profile.
pub fn realize(f: &FormalLocalSystem) -> Result<MonodromyTuple> {
    let (plan, _) = reduce(f)?;
    let t = replay(&plan)?;
    let got = jordan_profile(&t, Some(profile_search_order(f)))?;
    if !got.same_local_data(f) {
        return Err(Error::Verification(format!(
            "realized profile {got} differs from {f}"
        )));
    }
    if !is_irreducible(&t) {
        return Err(Error::Verification("realized tuple is reducible".into()));
    }
    Ok(t)
}

//! Inputs shared by the benchmarks.

use std::collections::BTreeMap;

use rls_core::convolution::{project_sl4_to_so6, twist};
use rls_core::corpus::Fixtures;
use rls_core::katz::realize;
use rls_core::{FormalLocalSystem, MonodromyTuple, RootOfUnity};

pub fn profile(name: &str) -> FormalLocalSystem {
    Fixtures::bundled().profile(name).expect("bundled fixture")
}

/// Realized `SL_4` system of the Dwork chain.
pub fn sl4_tuple() -> MonodromyTuple {
    realize(&profile("dwork_sl4.json")).expect("rigid profile")
}

/// Its `SO_6` projection twisted by -1 at `0`: the rank-6 input of `MC_{-1}`.
pub fn so6_twisted() -> MonodromyTuple {
    let w = project_sl4_to_so6(&sl4_tuple()).expect("det 1");
    let s: BTreeMap<String, RootOfUnity> = [("0".to_string(), RootOfUnity::MINUS_ONE)].into();
    twist(&w, &s).expect("known puncture")
}

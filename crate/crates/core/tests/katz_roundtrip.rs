mod common;

use common::*;
use rls_core::convolution::{are_conjugate, is_irreducible, jordan_profile};
use rls_core::corpus::Fixtures;
use rls_core::katz::{realize, reduce, replay, replay_formal};
use rls_core::localdata::euler_characteristic;
use rls_core::{Error, GroupSpecTag};

#[test]
fn fixture_profiles_realize_exactly() {
    let profiles = Fixtures::bundled().rigid_profiles().unwrap();
    assert!(profiles.len() >= 10);
    let mut r = rng(11);
    for f in &profiles {
        assert_eq!(
            euler_characteristic(f, &GroupSpecTag::gl(f.rank)).unwrap(),
            2,
            "{f}"
        );
        let t = realize(f).unwrap();
        assert!(
            jordan_profile(&t, Some(24)).unwrap().same_local_data(f),
            "{f}"
        );
        assert!(is_irreducible(&t));

        let (plan, _) = reduce(f).unwrap();
        assert!(replay_formal(&plan).unwrap().same_local_data(f));
        let other = replay(&plan)
            .unwrap()
            .conjugate_by(&random_invertible(&mut r, f.rank))
            .unwrap();
        assert!(are_conjugate(&t, &other).unwrap().is_some(), "{f}");
    }
}

#[test]
fn realize_recovers_randomly_built_systems() {
    let mut r = rng(12);
    for _ in 0..20 {
        let t = random_irreducible(&mut r, 2, 4);
        let f = jordan_profile(&t, Some(INDEX)).unwrap();
        let s = realize(&f).unwrap();
        assert!(are_conjugate(&s, &t).unwrap().is_some(), "{f}");
    }
}

#[test]
fn non_rigid_profiles_are_refused() {
    let fx = Fixtures::bundled();
    let sp4 = fx.profile("dwork_sp4.json").unwrap();
    assert!(matches!(reduce(&sp4), Err(Error::NotRigid { .. })));
    assert!(realize(&sp4).is_err());
}

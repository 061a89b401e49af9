mod common;

use proptest::prelude::*;

use common::*;
use rls_core::convolution::{generated_algebra_dim, is_irreducible, tensor};
use rls_core::linalg::{commutant_dim, jordan_type, GroupSpec};
use rls_core::localdata::{centralizer_dim_gl, centralizer_dim_in, group_representative};
use rls_core::{GroupFamily, GroupSpecTag, JordanClass, RootOfUnity};

#[test]
fn jordan_type_matches_nullity_oracle() {
    let mut r = rng(1);
    for _ in 0..30 {
        let t = random_irreducible(&mut r, 2, 4);
        for m in t.all_matrices() {
            assert_eq!(jordan_type(&m, INDEX).unwrap(), oracle_jordan(&m, INDEX));
        }
    }
}

#[test]
fn irreducibility_matches_algebra_oracle() {
    let mut r = rng(2);
    for _ in 0..20 {
        let a = random_irreducible(&mut r, 2, 3);
        let n = a.rank();
        assert_eq!(generated_algebra_dim(&a), oracle_algebra_dim(a.matrices()));
        assert_eq!(oracle_algebra_dim(a.matrices()), n * n);
        if n <= 2 {
            let b = random_irreducible(&mut r, 2, 2);
            let ab = tensor(&a, &b).unwrap();
            assert_eq!(
                is_irreducible(&ab),
                oracle_algebra_dim(ab.matrices()) == ab.rank() * ab.rank()
            );
        }
    }
}

#[test]
fn centralizers_match_direct_computation() {
    let cases = [
        (GroupFamily::Gl, 4, "U(2),-1,-1"),
        (GroupFamily::Gl, 5, "U(3),U(2)"),
        (GroupFamily::So, 5, "U(5)"),
        (GroupFamily::So, 5, "1,-1,-1,-1,-1"),
        (GroupFamily::So, 5, "U(3),-1,-1"),
        (GroupFamily::So, 7, "U(3),U(2),U(2)"),
        (GroupFamily::So, 7, "1,-U(2),-U(2),-1,-1"),
        (GroupFamily::Sp, 4, "U(2),-U(2)"),
        (GroupFamily::Sp, 4, "U(4)"),
        (GroupFamily::Sp, 4, "1,1,-1,-1"),
        (GroupFamily::Sp, 4, "U(2),U(2)"),
    ];
    for (family, n, class) in cases {
        let c: JordanClass = class.parse().unwrap();
        let g = GroupSpecTag::new(family, n).unwrap();
        let rep = group_representative(&c, &g).unwrap();
        assert_eq!(jordan_type(&rep.matrix, 12).unwrap(), c, "{class}");
        let expected = match &rep.form {
            None => oracle_centralizer_gl(&rep.matrix),
            Some(form) => {
                assert!(rep.matrix.preserves_form(form));
                oracle_centralizer_in_form(&rep.matrix, form)
            }
        };
        assert_eq!(
            centralizer_dim_in(&c, &g).unwrap(),
            expected as i64,
            "{family:?}{n} {class}"
        );
    }
    let mut r = rng(3);
    for _ in 0..20 {
        let t = random_irreducible(&mut r, 2, 4);
        for m in t.all_matrices() {
            let c = jordan_type(&m, INDEX).unwrap();
            assert_eq!(centralizer_dim_gl(&c), oracle_centralizer_gl(&m));
            assert_eq!(
                commutant_dim(std::slice::from_ref(&m), &GroupSpec::Gl(m.rows())).unwrap(),
                oracle_centralizer_gl(&m)
            );
        }
    }
}

#[test]
fn middle_convolution_inverts_up_to_conjugacy() {
    suites::mc_round_trips(4, 50).unwrap();
}

#[test]
fn euler_characteristic_is_invariant() {
    suites::euler_invariance(5, 30).unwrap();
}

#[test]
fn formal_operations_agree_with_matrices() {
    suites::formal_agreement(6, 120).unwrap();
}

#[test]
fn spin_lift_is_a_section_of_projection() {
    suites::spin_sections(7, 60).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn class_text_round_trips(parts in prop::collection::vec((0i64..12, 1usize..4), 1..5)) {
        let c = JordanClass::new(parts.iter().map(|&(k, s)| (RootOfUnity::new(12, k), s)).collect());
        let back: JordanClass = c.to_string().parse().unwrap();
        prop_assert_eq!(&back, &c);
        let json = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(serde_json::from_str::<JordanClass>(&json).unwrap(), c);
    }

    #[test]
    fn formal_twist_is_invertible(parts in prop::collection::vec((0i64..12, 1usize..3), 1..4), k in 0i64..12) {
        let c = JordanClass::new(parts.iter().map(|&(e, s)| (RootOfUnity::new(12, e), s)).collect());
        let z = RootOfUnity::new(12, k);
        prop_assert_eq!(c.twist(z).twist(z.inv()), c.clone());
        let n = c.rank();
        prop_assert_eq!(c.lambda2().rank(), n * (n - 1) / 2);
        prop_assert_eq!(c.sym2().rank(), n * (n + 1) / 2);
        prop_assert_eq!(c.tensor(&c).rank(), n * n);
    }
}

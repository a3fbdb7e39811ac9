use proptest::prelude::*;
use toposforge::finset::FinFunction;
use toposforge::smallmap::{check_locally_full, find_representation, MapClass, ProbeUniverse};

#[test]
fn representations_are_genuine_pullbacks() {
    for carrier in 1..=3 {
        let probe = ProbeUniverse::new(carrier);
        for class in [MapClass::FiberBound(1), MapClass::FiberBound(2), MapClass::FiberBound(3), MapClass::All] {
            let rep = find_representation(&class, &probe).unwrap();
            let small = probe.maps().filter(|f| class.contains(f)).count();
            assert_eq!(rep.witnesses.len(), small);
            assert!(rep.verified(), "{} over carrier {carrier}", class.name());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_fullness_splits_into_s4a_and_s4b(picks in proptest::collection::vec(any::<bool>(), 0..40)) {
        let probe = ProbeUniverse::new(2);
        let maps: Vec<FinFunction> = probe.maps().cloned().collect();
        let chosen: Vec<FinFunction> = maps.iter().zip(picks.iter().cycle()).filter(|(_, &p)| p).map(|(f, _)| f.clone()).collect();
        let class = MapClass::Explicit(chosen);
        let v = check_locally_full(&class, &probe).unwrap();
        prop_assert_ne!(v.remark_agrees, Some(false));
        if v.identities_small && v.s1_holds {
            prop_assert_eq!(v.s4.holds, v.s4a.holds && v.s4b.holds);
        }
    }
}

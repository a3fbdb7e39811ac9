use std::sync::Arc;

use proptest::prelude::*;
use toposforge::cat::FinCategory;
use toposforge::corpus;
use toposforge::finset::subterms;
use toposforge::presheaf::{all_presheaves, nat_transformations, Presheaf};
use toposforge::wpresheaf::{is_composable, is_natural, restrict_term, wtype_presheaf};

fn bases() -> Vec<Arc<FinCategory>> {
    let s = |x: &str| x.to_string();
    vec![
        corpus::sierpinski(),
        Arc::new(FinCategory::from_parts([s("*")], vec![(s("e"), s("*"), s("*"))], vec![(s("e"), s("e"), s("e"))]).unwrap()),
    ]
}

fn presheaves() -> Vec<Vec<Presheaf>> {
    bases().iter().map(|b| all_presheaves(b, 2, 1 << 20).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subterms_and_restrictions_stay_natural(base in 0usize..2, i in 0usize..64, j in 0usize..64, k in 0usize..16, depth in 1usize..=3) {
        let ps = &presheaves()[base];
        let (a, b) = (&ps[i % ps.len()], &ps[j % ps.len()]);
        let maps = nat_transformations(b, a, 1 << 20).unwrap();
        prop_assume!(!maps.is_empty());
        let f = &maps[k % maps.len()];
        let w = wtype_presheaf(f, depth).unwrap();
        prop_assert!(w.structure.is_iso());
        let base = f.base();
        for (c, ts) in w.terms.iter().enumerate() {
            for t in ts {
                prop_assert!(is_natural(&w.induced, t));
                for s in subterms(t) {
                    prop_assert!(is_composable(&w.induced, &s) && is_natural(&w.induced, &s));
                }
                for alpha in base.arrows_into(c) {
                    let r = restrict_term(&w.induced, t, alpha).unwrap();
                    prop_assert!(is_natural(&w.induced, &r));
                }
            }
        }
    }
}

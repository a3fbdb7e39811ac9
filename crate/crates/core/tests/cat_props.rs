use proptest::prelude::*;
use toposforge::cat::{compile_presentation, validate_category, CatPresentation};

fn presentation() -> impl Strategy<Value = CatPresentation> {
    let objects = 1usize..=2;
    objects.prop_flat_map(|n| {
        let gens = proptest::collection::vec((0..n, 0..n), 1..=3);
        gens.prop_flat_map(move |gens| {
            let k = gens.len();
            let word = proptest::collection::vec(0..k, 0..=2);
            let relations = proptest::collection::vec((word.clone(), word), 0..=2);
            relations.prop_map(move |rels| {
                let name = |i: usize| format!("g{i}");
                CatPresentation {
                    objects: (0..n).map(|o| format!("o{o}")).collect(),
                    generators: gens.iter().enumerate().map(|(i, &(d, c))| (name(i), format!("o{d}"), format!("o{c}"))).collect(),
                    relations: rels
                        .iter()
                        .map(|(l, r)| (l.iter().map(|&i| name(i)).collect(), r.iter().map(|&i| name(i)).collect()))
                        .collect(),
                }
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compiled_presentations_are_categories(p in presentation()) {
        if let Ok(c) = compile_presentation(&p, 16) {
            prop_assert!(validate_category(&c).is_valid());
            prop_assert!(validate_category(&c.op()).is_valid());
            prop_assert_eq!(c.op().op(), c.clone());
            let dual = compile_presentation(&p.op(), 16).unwrap();
            prop_assert_eq!(dual.num_arrows(), c.num_arrows());
        }
    }

    #[test]
    fn op_is_an_involution(p in presentation()) {
        prop_assert_eq!(p.op().op(), p);
    }
}

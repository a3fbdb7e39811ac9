use toposforge::corpus;
use toposforge::presheaf::{empty, find_isomorphism, nat_transformations, product};
use toposforge::sheaf::{enumerate_sheaves, is_cover_in_sheaves, is_locally_surjective, is_sheaf_for, sheafify};
use toposforge::wpresheaf::wtype_presheaf;

const BUDGET: usize = 1 << 20;

#[test]
fn sheafification_preserves_binary_products() {
    for named in corpus::sites() {
        let s = &named.site;
        let ps = corpus::presheaves(s.base());
        for p in &ps {
            for q in &ps {
                let joint = sheafify(&product(p, q).unwrap().object, s).unwrap().object;
                let apart = product(&sheafify(p, s).unwrap().object, &sheafify(q, s).unwrap().object).unwrap().object;
                assert!(find_isomorphism(&joint, &apart).unwrap().is_some(), "{}: a({p} × {q})", named.name);
            }
        }
    }
}

#[test]
fn covers_of_sheaves_are_the_locally_surjective_maps() {
    for named in corpus::sites() {
        let s = &named.site;
        let sheaves = enumerate_sheaves(s, 2, BUDGET).unwrap();
        for f in &sheaves {
            for g in &sheaves {
                for t in nat_transformations(f, g, BUDGET).unwrap() {
                    assert_eq!(
                        is_cover_in_sheaves(&t, s, BUDGET).unwrap(),
                        is_locally_surjective(&t, s).unwrap(),
                        "{}: {t}",
                        named.name
                    );
                }
            }
        }
    }
}

/// Saturated presheaf W-types over sheaves, split by whether they are
/// sheaves, with the base category's empty presheaf flagged.
fn wtype_sheaf_verdicts(s: &toposforge::site::Site) -> Vec<(bool, bool)> {
    let sheaves = enumerate_sheaves(s, 2, BUDGET).unwrap();
    let mut out = Vec::new();
    for a in &sheaves {
        for b in &sheaves {
            for f in nat_transformations(b, a, BUDGET).unwrap() {
                let w = wtype_presheaf(&f, 4).unwrap();
                if w.saturated {
                    out.push((is_sheaf_for(&w.object, s).unwrap().is_sheaf, w.object.total_size() == 0));
                }
            }
        }
    }
    out
}

#[test]
fn saturated_wtypes_of_sheaves_are_sheaves_when_the_empty_presheaf_is() {
    for named in corpus::sites() {
        let s = &named.site;
        if !is_sheaf_for(&empty(s.base()), s).unwrap().is_sheaf {
            continue;
        }
        for (is_sheaf, _) in wtype_sheaf_verdicts(s) {
            assert!(is_sheaf, "{}", named.name);
        }
    }
}

#[test]
fn empty_covers_break_presheaf_wtypes_in_sheaves() {
    // `e` is covered by the empty family, so sheaves have one point there and
    // the empty presheaf, a W-type for signatures without base cases, is not
    // a sheaf.
    let s = corpus::two_point_site();
    let verdicts = wtype_sheaf_verdicts(&s);
    let failures: Vec<_> = verdicts.iter().filter(|v| !v.0).collect();
    assert!(!failures.is_empty());
    assert!(failures.iter().all(|v| v.1), "every failure is the empty presheaf");
}

use toposforge::corpus;
use toposforge::sheaf::is_sheaf_for;
use toposforge::site::{generate_grothendieck, is_collection_site, CovTree, SpanMode};

#[test]
fn embedded_covers_keep_their_families() {
    for named in corpus::sites() {
        let s = &named.site;
        for (u, cover) in s.covers().iter().enumerate() {
            let mut family = CovTree::embed(s, u).family(s);
            let mut arrows = cover.arrows.clone();
            family.sort_unstable();
            arrows.sort_unstable();
            assert_eq!(family, arrows, "{} cover {}", named.name, cover.name);
        }
    }
}

#[test]
fn generation_preserves_sheaves_at_every_depth() {
    for named in corpus::sites() {
        let s = &named.site;
        for depth in 1..=3 {
            let g = generate_grothendieck(s, depth, 1 << 20).unwrap();
            for p in corpus::presheaves(s.base()) {
                let before = is_sheaf_for(&p, s).unwrap().is_sheaf;
                let after = is_sheaf_for(&p, &g.site).unwrap().is_sheaf;
                assert_eq!(before, after, "{} at depth {depth}: {p}", named.name);
            }
        }
    }
}

// Refining mode is not inherited: the empty coverage passes it vacuously,
// while the identity covers added by generation have one-element fibers.
#[test]
fn collection_sites_stay_collection_sites() {
    for named in corpus::sites() {
        let s = &named.site;
        let g = generate_grothendieck(s, 3, 1 << 20).unwrap();
        if is_collection_site(s, SpanMode::Internal).unwrap().holds {
            assert!(is_collection_site(&g.site, SpanMode::Internal).unwrap().holds, "{}", named.name);
        }
    }
}

#[test]
fn refining_mode_is_lost_by_generation_on_the_empty_coverage() {
    let s = corpus::empty_coverage();
    let g = generate_grothendieck(&s, 3, 1 << 20).unwrap();
    assert!(is_collection_site(&s, SpanMode::Refining).unwrap().holds);
    assert!(!is_collection_site(&g.site, SpanMode::Refining).unwrap().holds);
    assert!(is_collection_site(&g.site, SpanMode::Internal).unwrap().holds);
}

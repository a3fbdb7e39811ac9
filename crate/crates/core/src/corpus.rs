//! Small named categories, sites and presheaves used by tests and the CLI.

use std::sync::Arc;

use crate::cat::FinCategory;
use crate::finset::FinSet;
use crate::presheaf::{self, Presheaf};
use crate::site::{CoveringFamily, Site};

fn s(x: &str) -> String {
    x.to_string()
}

/// `0 → 1` with the single arrow `u`.
pub fn sierpinski() -> Arc<FinCategory> {
    Arc::new(FinCategory::from_parts([s("0"), s("1")], vec![(s("u"), s("0"), s("1"))], vec![]).unwrap())
}

/// `a → c ← b` with arrows `p`, `q`.
pub fn cospan() -> Arc<FinCategory> {
    Arc::new(
        FinCategory::from_parts(
            [s("a"), s("b"), s("c")],
            vec![(s("p"), s("a"), s("c")), (s("q"), s("b"), s("c"))],
            vec![],
        )
        .unwrap(),
    )
}

/// `0 → 1 → 2` with `w = v ∘ u`.
pub fn chain() -> Arc<FinCategory> {
    Arc::new(
        FinCategory::from_parts(
            [s("0"), s("1"), s("2")],
            vec![(s("u"), s("0"), s("1")), (s("v"), s("1"), s("2")), (s("w"), s("0"), s("2"))],
            vec![(s("v"), s("u"), s("w"))],
        )
        .unwrap(),
    )
}

/// Open sets of the discrete two-point space: `e ⊆ x, y ⊆ t`.
pub fn two_point_opens() -> Arc<FinCategory> {
    Arc::new(
        FinCategory::from_parts(
            [s("e"), s("t"), s("x"), s("y")],
            vec![
                (s("jx"), s("e"), s("x")),
                (s("jy"), s("e"), s("y")),
                (s("ix"), s("x"), s("t")),
                (s("iy"), s("y"), s("t")),
                (s("k"), s("e"), s("t")),
            ],
            vec![(s("ix"), s("jx"), s("k")), (s("iy"), s("jy"), s("k"))],
        )
        .unwrap(),
    )
}

fn family(c: &Arc<FinCategory>, name: &str, target: &str, arrows: &[&str]) -> CoveringFamily {
    let target = c.object_index(target).unwrap();
    let arrows: Vec<usize> = arrows.iter().map(|a| c.arrow_index(a).unwrap()).collect();
    CoveringFamily::from_arrows(c, name, target, &arrows).unwrap()
}

fn identity_covers(c: &Arc<FinCategory>) -> Vec<CoveringFamily> {
    (0..c.num_objects())
        .map(|x| {
            let name = format!("id@{}", c.object_name(x));
            CoveringFamily::from_arrows(c, name, x, &[c.identity(x)]).unwrap()
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct NamedSite {
    pub name: &'static str,
    pub site: Site,
}

pub fn empty_coverage() -> Site {
    Site::new(sierpinski(), vec![]).unwrap()
}

/// The cover `{u}` of `1` and nothing else.
pub fn u_site() -> Site {
    let c = sierpinski();
    Site::new(c.clone(), vec![family(&c, "U", "1", &["u"])]).unwrap()
}

pub fn cospan_site() -> Site {
    let c = cospan();
    Site::new(c.clone(), vec![family(&c, "PQ", "c", &["p", "q"])]).unwrap()
}

/// `{v}` covers `2`; pulling it back along `w` has no cover of `0`.
pub fn chain_site() -> Site {
    let c = chain();
    Site::new(c.clone(), vec![family(&c, "V", "2", &["v"])]).unwrap()
}

pub fn two_point_site() -> Site {
    let c = two_point_opens();
    let mut covers = identity_covers(&c);
    covers.push(family(&c, "T", "t", &["ix", "iy"]));
    covers.push(family(&c, "E", "e", &[]));
    Site::new(c, covers).unwrap()
}

pub fn identity_site() -> Site {
    let c = sierpinski();
    Site::new(c.clone(), identity_covers(&c)).unwrap()
}

pub fn sites() -> Vec<NamedSite> {
    vec![
        NamedSite { name: "empty-coverage", site: empty_coverage() },
        NamedSite { name: "identity", site: identity_site() },
        NamedSite { name: "u-site", site: u_site() },
        NamedSite { name: "cospan", site: cospan_site() },
        NamedSite { name: "chain", site: chain_site() },
        NamedSite { name: "two-point", site: two_point_site() },
    ]
}

pub fn site(name: &str) -> Option<Site> {
    sites().into_iter().find(|n| n.name == name).map(|n| n.site)
}

/// `P(1) = {p, q}`, both restricting to `r ∈ P(0)`, on `0 → 1`.
pub fn collapsing_presheaf() -> Presheaf {
    let c = sierpinski();
    let u = c.arrow_index("u").unwrap();
    let values = vec![FinSet::new(["r"]).unwrap(), FinSet::new(["p", "q"]).unwrap()];
    Presheaf::from_fn(c, values, |a, x| if a == u { 0 } else { x }).unwrap()
}

/// Representables, the terminal and empty presheaves, and every presheaf
/// with values of size at most one.
pub fn presheaves(base: &Arc<FinCategory>) -> Vec<Presheaf> {
    let mut out: Vec<Presheaf> = (0..base.num_objects()).map(|c| presheaf::yoneda(base, c)).collect();
    out.push(presheaf::terminal(base));
    out.push(presheaf::empty(base));
    out.extend(presheaf::all_presheaves(base, 1, 1 << 20).unwrap());
    if **base == *sierpinski() {
        out.push(collapsing_presheaf());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::{check_c, check_l, check_m};

    #[test]
    fn corpus_axioms() {
        assert!(!check_c(&u_site()).holds);
        assert!(!check_c(&chain_site()).holds);
        assert!(check_c(&identity_site()).holds);
        let two = two_point_site();
        assert!(check_c(&two).holds && check_m(&two).holds);
        assert!(check_l(&two).holds);
        assert_eq!(sites().len(), 6);
    }
}

//! Sheaves on finite sites: the sheaf condition, local surjectivity,
//! sheafification by the plus construction, and sums and quotients of
//! sheaves.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::cat::FinCategory;
use crate::enumerate::Product;
use crate::error::{Error, Result};
use crate::finset::FinSet;
use crate::presheaf::{self, nat_tables, Presheaf, PresheafMorphism};
pub use crate::presheaf::all_presheaves as enumerate_presheaves;
use crate::site::{is_collection_site, sieve_members, sieve_topology_fixpoint, Sieve, Site, SpanMode, Topology};

/// A compatible family for one cover with the wrong number of amalgamations.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SheafInstance {
    pub cover: String,
    pub family: Vec<String>,
    pub amalgamations: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SheafVerdict {
    pub is_sheaf: bool,
    pub is_separated: bool,
    pub families_checked: usize,
    pub failures: Vec<SheafInstance>,
}

/// Pairs `(i, j, β, γ)` with `α_i β = α_j γ`.
fn factorization_pairs(base: &FinCategory, arrows: &[usize]) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for (i, &ai) in arrows.iter().enumerate() {
        for (j, &aj) in arrows.iter().enumerate().skip(i) {
            for beta in base.arrows_into(base.dom(ai)) {
                for gamma in base.arrows_into(base.dom(aj)) {
                    if base.dom(beta) == base.dom(gamma) && base.comp(ai, beta) == base.comp(aj, gamma) {
                        out.push((i, j, beta, gamma));
                    }
                }
            }
        }
    }
    out
}

/// Unique amalgamation of every compatible family, for every cover.
pub fn is_sheaf_for(p: &Presheaf, s: &Site) -> Result<SheafVerdict> {
    if p.base() != s.base() {
        return Err(Error::Shape("presheaf and site live on different categories".into()));
    }
    let base = s.base();
    let mut checked = 0;
    let mut failures = Vec::new();
    let (mut sheaf, mut separated) = (true, true);
    for u in s.covers() {
        let pairs = factorization_pairs(base, &u.arrows);
        let sizes: Vec<usize> = u.arrows.iter().map(|&a| p.value(base.dom(a)).len()).collect();
        for family in Product::new(sizes) {
            let compatible = pairs
                .iter()
                .all(|&(i, j, beta, gamma)| p.restrict(family[i], beta) == p.restrict(family[j], gamma));
            if !compatible {
                continue;
            }
            checked += 1;
            let amalgamations = (0..p.value(u.target).len())
                .filter(|&x| u.arrows.iter().zip(&family).all(|(&a, &xi)| p.restrict(x, a) == xi))
                .count();
            if amalgamations != 1 {
                sheaf = false;
                separated &= amalgamations == 0;
                failures.push(SheafInstance {
                    cover: u.name.clone(),
                    family: u
                        .arrows
                        .iter()
                        .zip(&family)
                        .map(|(&a, &xi)| p.value(base.dom(a)).label(xi).to_string())
                        .collect(),
                    amalgamations,
                });
            }
        }
    }
    Ok(SheafVerdict { is_sheaf: sheaf, is_separated: separated, families_checked: checked, failures })
}

pub fn is_separated(p: &Presheaf, s: &Site) -> Result<bool> {
    Ok(is_sheaf_for(p, s)?.is_separated)
}

/// Matching families for a sieve, each listed along `sieve_members`.
pub fn matching_families(p: &Presheaf, sieve: Sieve) -> Vec<Vec<usize>> {
    let base = p.base();
    let members = sieve_members(sieve);
    let pos: HashMap<usize, usize> = members.iter().enumerate().map(|(k, &h)| (h, k)).collect();
    // (a, k, b): x_b = x_a·k, checked once the later of a, b is assigned.
    let mut constraints: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); members.len()];
    for (ia, &h) in members.iter().enumerate() {
        for k in base.arrows_into(base.dom(h)) {
            let ib = pos[&base.comp(h, k)];
            constraints[ia.max(ib)].push((ia, k, ib));
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0; members.len()];
    fn go(
        p: &Presheaf,
        members: &[usize],
        constraints: &[Vec<(usize, usize, usize)>],
        k: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == members.len() {
            out.push(current.clone());
            return;
        }
        for x in 0..p.value(p.base().dom(members[k])).len() {
            current[k] = x;
            if constraints[k].iter().all(|&(a, arrow, b)| p.restrict(current[a], arrow) == current[b]) {
                go(p, members, constraints, k + 1, current, out);
            }
        }
    }
    go(p, &members, &constraints, 0, &mut current, &mut out);
    out
}

/// The sieve formulation: unique amalgamation for every covering sieve.
pub fn is_sheaf_for_topology(p: &Presheaf, j: &Topology) -> bool {
    let base = p.base();
    (0..base.num_objects()).all(|c| {
        j.sieves[c].iter().all(|&sieve| {
            let members = sieve_members(sieve);
            matching_families(p, sieve).iter().all(|family| {
                (0..p.value(c).len())
                    .filter(|&x| members.iter().zip(family).all(|(&h, &xh)| p.restrict(x, h) == xh))
                    .count()
                    == 1
            })
        })
    })
}

/// Every section of the codomain is locally in the image.
pub fn is_locally_surjective_in(f: &PresheafMorphism, j: &Topology) -> bool {
    let base = f.base();
    let q = f.target();
    let images: Vec<HashSet<usize>> =
        (0..base.num_objects()).map(|c| f.component(c).table().iter().copied().collect()).collect();
    (0..base.num_objects()).all(|c| {
        (0..q.value(c).len()).all(|y| {
            let reached: Sieve = base
                .arrows_into(c)
                .into_iter()
                .filter(|&h| images[base.dom(h)].contains(&q.restrict(y, h)))
                .fold(0, |acc, h| acc | (1 << h));
            j.covers(c, reached)
        })
    })
}

pub fn is_locally_surjective(f: &PresheafMorphism, s: &Site) -> Result<bool> {
    Ok(is_locally_surjective_in(f, &sieve_topology_fixpoint(s)?))
}

/// A morphism of sheaves is a cover when no proper subsheaf of the
/// codomain contains its image. Checked by enumerating subpresheaves.
pub fn is_cover_in_sheaves(f: &PresheafMorphism, s: &Site, budget: usize) -> Result<bool> {
    let base = f.base();
    let q = f.target();
    let n = base.num_objects();
    let sizes: Vec<usize> = (0..n).map(|c| 1usize << q.value(c).len()).collect();
    if sizes.iter().product::<usize>() > budget {
        return Err(Error::Budget(budget));
    }
    for masks in Product::new(sizes) {
        let keep: Vec<Vec<bool>> =
            (0..n).map(|c| (0..q.value(c).len()).map(|y| masks[c] & (1 << y) != 0).collect()).collect();
        let proper = keep.iter().any(|k| k.iter().any(|&b| !b));
        let contains_image = (0..n).all(|c| f.component(c).table().iter().all(|&y| keep[c][y]));
        let closed = (0..base.num_arrows()).all(|a| {
            (0..q.value(base.cod(a)).len()).all(|y| !keep[base.cod(a)][y] || keep[base.dom(a)][q.restrict(y, a)])
        });
        if proper && contains_image && closed {
            let (sub, _) = presheaf::subpresheaf(q, &keep)?;
            if is_sheaf_for(&sub, s)?.is_sheaf {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `P⁺` and the canonical map `P → P⁺`.
#[derive(Clone, Debug)]
pub struct PlusConstruction {
    pub object: Presheaf,
    pub unit: PresheafMorphism,
}

fn family_label(p: &Presheaf, sieve: Sieve, family: &[usize]) -> String {
    let base = p.base();
    let parts: Vec<String> = sieve_members(sieve)
        .into_iter()
        .zip(family)
        .map(|(h, &x)| format!("{}={}", base.arrow_name(h), p.value(base.dom(h)).label(x)))
        .collect();
    format!("{{{}}}", parts.join(","))
}

/// The covering sieves on each object form a finite directed set whose
/// least element is the minimum covering sieve, so the colimit defining
/// `P⁺(C)` is the set of matching families for that sieve.
pub fn plus(p: &Presheaf, j: &Topology) -> Result<PlusConstruction> {
    let base = p.base();
    let n = base.num_objects();
    let minimum: Vec<Sieve> = (0..n).map(|c| j.minimum_sieve(c)).collect();
    let families: Vec<Vec<Vec<usize>>> = (0..n).map(|c| matching_families(p, minimum[c])).collect();
    let lookup: Vec<HashMap<&Vec<usize>, usize>> =
        families.iter().map(|fs| fs.iter().enumerate().map(|(k, f)| (f, k)).collect()).collect();
    let values: Vec<FinSet> = (0..n)
        .map(|c| FinSet::new(families[c].iter().map(|f| family_label(p, minimum[c], f))))
        .collect::<Result<_>>()?;
    let positions: Vec<HashMap<usize, usize>> = minimum
        .iter()
        .map(|&s| sieve_members(s).into_iter().enumerate().map(|(k, h)| (h, k)).collect())
        .collect();
    let relabel: Vec<Vec<usize>> = (0..n)
        .map(|c| families[c].iter().map(|f| values[c].index_of(&family_label(p, minimum[c], f)).unwrap()).collect())
        .collect();
    let mut tables = Vec::new();
    for a in 0..base.num_arrows() {
        let (d, c) = (base.dom(a), base.cod(a));
        let mut t = vec![0; families[c].len()];
        for (k, family) in families[c].iter().enumerate() {
            let pulled: Vec<usize> =
                sieve_members(minimum[d]).into_iter().map(|h| family[positions[c][&base.comp(a, h)]]).collect();
            let idx = lookup[d]
                .get(&pulled)
                .ok_or_else(|| Error::Invariant("restricted family is not matching".into()))?;
            t[relabel[c][k]] = relabel[d][*idx];
        }
        tables.push(t);
    }
    let object = Presheaf::from_tables(base.clone(), values, tables)?;
    let unit_tables: Vec<Vec<usize>> = (0..n)
        .map(|c| {
            (0..p.value(c).len())
                .map(|x| {
                    let family: Vec<usize> = sieve_members(minimum[c]).into_iter().map(|h| p.restrict(x, h)).collect();
                    relabel[c][lookup[c][&family]]
                })
                .collect()
        })
        .collect();
    let unit = PresheafMorphism::from_tables(p.clone(), object.clone(), unit_tables)?;
    Ok(PlusConstruction { object, unit })
}

/// The associated sheaf `aP = P⁺⁺` and the unit `P → aP`.
#[derive(Clone, Debug)]
pub struct Sheafification {
    pub object: Presheaf,
    pub unit: PresheafMorphism,
}

pub fn sheafify_with(p: &Presheaf, j: &Topology) -> Result<Sheafification> {
    let first = plus(p, j)?;
    let second = plus(&first.object, j)?;
    let unit = first.unit.then(&second.unit)?;
    Ok(Sheafification { object: second.object, unit })
}

pub fn sheafify(p: &Presheaf, s: &Site) -> Result<Sheafification> {
    sheafify_with(p, &sieve_topology_fixpoint(s)?)
}

/// `a(h): aP → aQ`, the unique map with `a(h) ∘ η_P = η_Q ∘ h`.
pub fn sheafify_map(
    h: &PresheafMorphism,
    source: &Sheafification,
    target: &Sheafification,
) -> Result<PresheafMorphism> {
    let n = h.base().num_objects();
    let mut required: Vec<Vec<Option<usize>>> = (0..n).map(|c| vec![None; source.object.value(c).len()]).collect();
    for c in 0..n {
        for x in 0..h.source().value(c).len() {
            required[c][source.unit.apply(c, x)] = Some(target.unit.apply(c, h.apply(c, x)));
        }
    }
    let allowed = |c: usize, x: usize, y: usize| required[c][x].is_none_or(|r| r == y);
    let mut found = Vec::new();
    presheaf::for_each_nat(&source.object, &target.object, Some(&allowed), |t| {
        found.push(t.to_vec());
        if found.len() > 1 {
            std::ops::ControlFlow::Break(())
        } else {
            std::ops::ControlFlow::Continue(())
        }
    })?;
    if found.len() != 1 {
        return Err(Error::Invariant(format!("{} candidate extensions through the unit", found.len())));
    }
    PresheafMorphism::from_tables(source.object.clone(), target.object.clone(), found.pop().unwrap())
}

/// Result of comparing two hom-sets through a canonical map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniversalCheck {
    pub holds: bool,
    pub targets_checked: usize,
    pub failure: Option<String>,
}

impl UniversalCheck {
    fn new() -> UniversalCheck {
        UniversalCheck { holds: true, targets_checked: 0, failure: None }
    }

    fn record(&mut self, ok: bool, target: &Presheaf, detail: impl FnOnce() -> String) {
        self.targets_checked += 1;
        if !ok && self.holds {
            self.holds = false;
            self.failure = Some(format!("{} (target {})", detail(), target));
        }
    }
}

fn precompose(t: &[Vec<usize>], f: &PresheafMorphism) -> Vec<Vec<usize>> {
    (0..t.len()).map(|c| f.component(c).table().iter().map(|&x| t[c][x]).collect()).collect()
}

/// `Hom(aP, F) → Hom(P, F)`, precomposition with the unit, is a bijection
/// for every sheaf `F` in `sheaves`.
pub fn check_unit_universal(sh: &Sheafification, sheaves: &[Presheaf], budget: usize) -> Result<UniversalCheck> {
    let mut check = UniversalCheck::new();
    for f in sheaves {
        let homs = nat_tables(&sh.object, f, budget)?;
        let images: HashSet<Vec<Vec<usize>>> = homs.iter().map(|t| precompose(t, &sh.unit)).collect();
        let expected = nat_tables(sh.unit.source(), f, budget)?.len();
        check.record(images.len() == homs.len() && homs.len() == expected, f, || {
            format!("{} maps from aP, {} distinct restrictions, {} maps from P", homs.len(), images.len(), expected)
        });
    }
    Ok(check)
}

/// Presheaves with values of size at most `bound` that are sheaves.
pub fn enumerate_sheaves(s: &Site, bound: usize, budget: usize) -> Result<Vec<Presheaf>> {
    let mut out = Vec::new();
    for p in enumerate_presheaves(s.base(), bound, budget)? {
        if is_sheaf_for(&p, s)?.is_sheaf {
            out.push(p);
        }
    }
    Ok(out)
}

/// How a sheaf colimit was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ColimitRoute {
    pub method: &'static str,
    pub collection_site_internal: bool,
    pub collection_site_refining: bool,
}

fn route(s: &Site) -> Result<ColimitRoute> {
    Ok(ColimitRoute {
        method: "presheaf colimit followed by the plus construction",
        collection_site_internal: is_collection_site(s, SpanMode::Internal)?.holds,
        collection_site_refining: is_collection_site(s, SpanMode::Refining)?.holds,
    })
}

fn require_sheaf(p: &Presheaf, s: &Site, what: &str) -> Result<()> {
    if !is_sheaf_for(p, s)?.is_sheaf {
        return Err(Error::Precondition(format!("{what} is not a sheaf")));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SheafSum {
    pub object: Presheaf,
    pub inl: PresheafMorphism,
    pub inr: PresheafMorphism,
    pub route: ColimitRoute,
}

pub fn sheaf_sum(f: &Presheaf, g: &Presheaf, s: &Site) -> Result<SheafSum> {
    require_sheaf(f, s, "left summand")?;
    require_sheaf(g, s, "right summand")?;
    let sum = presheaf::sum(f, g)?;
    let a = sheafify(&sum.object, s)?;
    Ok(SheafSum {
        inl: sum.inl.then(&a.unit)?,
        inr: sum.inr.then(&a.unit)?,
        object: a.object,
        route: route(s)?,
    })
}

/// `Hom(F + G, H) ≅ Hom(F, H) × Hom(G, H)` for every `H` in `sheaves`.
pub fn check_sum_universal(sum: &SheafSum, sheaves: &[Presheaf], budget: usize) -> Result<UniversalCheck> {
    let mut check = UniversalCheck::new();
    for h in sheaves {
        let homs = nat_tables(&sum.object, h, budget)?;
        let pairs: HashSet<(Vec<Vec<usize>>, Vec<Vec<usize>>)> =
            homs.iter().map(|t| (precompose(t, &sum.inl), precompose(t, &sum.inr))).collect();
        let expected = nat_tables(sum.inl.source(), h, budget)?.len() * nat_tables(sum.inr.source(), h, budget)?.len();
        check.record(pairs.len() == homs.len() && homs.len() == expected, h, || {
            format!("{} maps out of the sum, {} distinct pairs, {} expected", homs.len(), pairs.len(), expected)
        });
    }
    Ok(check)
}

#[derive(Clone, Debug)]
pub struct SheafQuotient {
    pub object: Presheaf,
    pub projection: PresheafMorphism,
    pub route: ColimitRoute,
}

/// Quotient of a sheaf by an equivalence relation `r1, r2: R ⇉ F`.
pub fn sheaf_quotient(r1: &PresheafMorphism, r2: &PresheafMorphism, s: &Site) -> Result<SheafQuotient> {
    require_sheaf(r1.target(), s, "quotiented object")?;
    let q = presheaf::quotient(r1, r2)?;
    let a = sheafify(&q.object, s)?;
    Ok(SheafQuotient { projection: q.projection.then(&a.unit)?, object: a.object, route: route(s)? })
}

/// `Hom(F/R, H)` is in bijection with the maps `F → H` coequalizing `R`.
pub fn check_quotient_universal(
    q: &SheafQuotient,
    r1: &PresheafMorphism,
    r2: &PresheafMorphism,
    sheaves: &[Presheaf],
    budget: usize,
) -> Result<UniversalCheck> {
    let mut check = UniversalCheck::new();
    for h in sheaves {
        let homs = nat_tables(&q.object, h, budget)?;
        let images: HashSet<Vec<Vec<usize>>> = homs.iter().map(|t| precompose(t, &q.projection)).collect();
        let expected = nat_tables(r1.target(), h, budget)?
            .into_iter()
            .filter(|t| precompose(t, r1) == precompose(t, r2))
            .count();
        check.record(images.len() == homs.len() && homs.len() == expected, h, || {
            format!("{} maps out of the quotient, {} distinct, {} coequalizing maps", homs.len(), images.len(), expected)
        });
    }
    Ok(check)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SameSheavesVerdict {
    pub equal: bool,
    pub complete: bool,
    pub bound: usize,
    pub presheaves_checked: usize,
    pub witness: Option<String>,
}

/// Compares the sheaves of two sites among all presheaves with values of
/// size at most `bound`, up to isomorphism.
pub fn same_sheaves(s1: &Site, s2: &Site, bound: usize, budget: usize) -> Result<SameSheavesVerdict> {
    if s1.base() != s2.base() {
        return Err(Error::Shape("sites live on different categories".into()));
    }
    let all = match enumerate_presheaves(s1.base(), bound, budget) {
        Ok(all) => all,
        Err(Error::Budget(_)) => {
            return Ok(SameSheavesVerdict { equal: false, complete: false, bound, presheaves_checked: 0, witness: None })
        }
        Err(e) => return Err(e),
    };
    for (k, p) in all.iter().enumerate() {
        let (a, b) = (is_sheaf_for(p, s1)?.is_sheaf, is_sheaf_for(p, s2)?.is_sheaf);
        if a != b {
            let side = if a { "first" } else { "second" };
            return Ok(SameSheavesVerdict {
                equal: false,
                complete: true,
                bound,
                presheaves_checked: k + 1,
                witness: Some(format!("{p} is a sheaf only for the {side} site")),
            });
        }
    }
    Ok(SameSheavesVerdict { equal: true, complete: true, bound, presheaves_checked: all.len(), witness: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presheaf::{product, yoneda};
    use crate::site::CoveringFamily;

    use std::sync::Arc;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn sierpinski() -> Arc<FinCategory> {
        Arc::new(FinCategory::from_parts([s("0"), s("1")], vec![(s("u"), s("0"), s("1"))], vec![]).unwrap())
    }

    fn u_site() -> Site {
        let c = sierpinski();
        let u = c.arrow_index("u").unwrap();
        Site::new(c.clone(), vec![CoveringFamily::from_arrows(&c, "U", 1, &[u]).unwrap()]).unwrap()
    }

    /// `P(1) = {p, q}`, both restricting to `r ∈ P(0)`.
    fn collapsing() -> Presheaf {
        let c = sierpinski();
        let u = c.arrow_index("u").unwrap();
        let values = vec![FinSet::new(["r"]).unwrap(), FinSet::new(["p", "q"]).unwrap()];
        Presheaf::from_fn(c, values, |a, x| if a == u { 0 } else { x }).unwrap()
    }

    #[test]
    fn collapsing_presheaf_is_not_separated() {
        let p = collapsing();
        let v = is_sheaf_for(&p, &u_site()).unwrap();
        assert!(!v.is_sheaf && !v.is_separated);
        assert_eq!(v.failures[0].amalgamations, 2);
        let empty = Site::new(sierpinski(), vec![]).unwrap();
        assert!(is_sheaf_for(&p, &empty).unwrap().is_sheaf);
        assert!(is_sheaf_for(&presheaf::terminal(&sierpinski()), &u_site()).unwrap().is_sheaf);
    }

    #[test]
    fn sheafifying_the_collapsing_presheaf() {
        let site = u_site();
        let p = collapsing();
        let a = sheafify(&p, &site).unwrap();
        assert_eq!(a.object.value(0).len(), 1);
        assert_eq!(a.object.value(1).len(), 1);
        assert!(is_sheaf_for(&a.object, &site).unwrap().is_sheaf);
        let sheaves = enumerate_sheaves(&site, 2, 100_000).unwrap();
        assert!(check_unit_universal(&a, &sheaves, 100_000).unwrap().holds);
        let again = sheafify(&a.object, &site).unwrap();
        assert!(again.unit.is_iso());
    }

    #[test]
    fn sheaf_conditions_agree_with_the_topology() {
        let site = u_site();
        let j = sieve_topology_fixpoint(&site).unwrap();
        for p in enumerate_presheaves(site.base(), 2, 100_000).unwrap() {
            assert_eq!(is_sheaf_for(&p, &site).unwrap().is_sheaf, is_sheaf_for_topology(&p, &j));
        }
    }

    #[test]
    fn local_surjectivity() {
        let site = u_site();
        let c = site.base().clone();
        // The inclusion of y(0) into y(1) misses id_1 but reaches it along u.
        let y0 = yoneda(&c, 0);
        let y1 = yoneda(&c, 1);
        let maps = presheaf::nat_transformations(&y0, &y1, 10).unwrap();
        assert_eq!(maps.len(), 1);
        assert!(!maps[0].is_epi());
        assert!(is_locally_surjective(&maps[0], &site).unwrap());
        let empty = Site::new(c, vec![]).unwrap();
        assert!(!is_locally_surjective(&maps[0], &empty).unwrap());
    }

    #[test]
    fn sums_and_quotients() {
        let site = u_site();
        let sheaves = enumerate_sheaves(&site, 2, 100_000).unwrap();
        let one = presheaf::terminal(site.base());
        let sum = sheaf_sum(&one, &one, &site).unwrap();
        assert_eq!(sum.object.value(1).len(), 2);
        assert!(check_sum_universal(&sum, &sheaves, 100_000).unwrap().holds);
        let with_empty = sheaf_sum(&one, &presheaf::empty(site.base()), &site).unwrap();
        assert!(with_empty.inl.is_iso());
        let f = &sum.object;
        let diag = PresheafMorphism::identity(f);
        let q = sheaf_quotient(&diag, &diag, &site).unwrap();
        assert!(q.projection.is_iso());
        assert!(check_quotient_universal(&q, &diag, &diag, &sheaves, 100_000).unwrap().holds);
        let total = product(f, f).unwrap();
        let q = sheaf_quotient(&total.p1, &total.p2, &site).unwrap();
        assert_eq!(q.object.value(1).len(), 1);
        assert!(check_quotient_universal(&q, &total.p1, &total.p2, &sheaves, 100_000).unwrap().holds);
    }

    #[test]
    fn comparing_sites() {
        let site = u_site();
        let empty = Site::new(site.base().clone(), vec![]).unwrap();
        assert!(same_sheaves(&site, &site, 2, 100_000).unwrap().equal);
        let v = same_sheaves(&site, &empty, 2, 100_000).unwrap();
        assert!(!v.equal && v.complete && v.witness.is_some());
        let partial = same_sheaves(&site, &empty, 2, 1).unwrap();
        assert!(!partial.complete);
    }
}

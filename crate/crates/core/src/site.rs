//! Sites on finite categories: covering families, the site axioms, the
//! generated Grothendieck site, and the sieve topology used as an oracle.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use crate::cat::FinCategory;
use crate::enumerate::{Functions, Product};
use crate::error::{Error, Result};
use crate::finset::{FinFunction, FinSet};
use crate::smallmap::MapClass;

/// `(α_i: C_i → C | i ∈ I)`, with `arrows` listed along the canonical order
/// of `index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringFamily {
    pub name: String,
    pub target: usize,
    pub index: FinSet,
    pub arrows: Vec<usize>,
}

impl CoveringFamily {
    pub fn new(name: impl Into<String>, target: usize, members: Vec<(String, usize)>) -> Result<CoveringFamily> {
        let (index, pos) = FinSet::with_positions(members.iter().map(|m| m.0.clone()).collect())?;
        let mut arrows = vec![0; members.len()];
        for (k, m) in members.iter().enumerate() {
            arrows[pos[k]] = m.1;
        }
        Ok(CoveringFamily { name: name.into(), target, index, arrows })
    }

    /// Indexed by the arrow names; repeated arrows get `#k` suffixes.
    pub fn from_arrows(base: &FinCategory, name: impl Into<String>, target: usize, arrows: &[usize]) -> Result<CoveringFamily> {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let members = arrows
            .iter()
            .map(|&a| {
                let k = seen.entry(a).or_insert(0);
                *k += 1;
                let label = if *k == 1 { base.arrow_name(a).to_string() } else { format!("{}#{}", base.arrow_name(a), k) };
                (label, a)
            })
            .collect();
        CoveringFamily::new(name, target, members)
    }

    pub fn arrow_set(&self) -> BTreeSet<usize> {
        self.arrows.iter().copied().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Site {
    base: Arc<FinCategory>,
    covers: Vec<CoveringFamily>,
}

/// The square `Cov ← Cov_ → C1` over `C0`.
#[derive(Clone, Debug)]
pub struct SiteSquare {
    pub cov: FinSet,
    pub indexed: FinSet,
    pub phi: FinFunction,
    pub m: FinFunction,
    pub target: FinFunction,
}

impl Site {
    pub fn new(base: Arc<FinCategory>, covers: Vec<CoveringFamily>) -> Result<Site> {
        let mut names = BTreeSet::new();
        for u in &covers {
            if !names.insert(u.name.clone()) {
                return Err(Error::DuplicateLabel(u.name.clone()));
            }
            if u.target >= base.num_objects() || u.arrows.len() != u.index.len() {
                return Err(Error::Shape(format!("covering family {} is malformed", u.name)));
            }
            if u.arrows.iter().any(|&a| a >= base.num_arrows() || base.cod(a) != u.target) {
                return Err(Error::NotCommuting);
            }
        }
        Ok(Site { base, covers })
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn covers(&self) -> &[CoveringFamily] {
        &self.covers
    }

    pub fn covers_of(&self, c: usize) -> Vec<usize> {
        (0..self.covers.len()).filter(|&u| self.covers[u].target == c).collect()
    }

    pub fn square(&self) -> SiteSquare {
        let cov_labels: Vec<String> = self.covers.iter().map(|u| u.name.clone()).collect();
        let (cov, cov_pos) = FinSet::with_positions(cov_labels).expect("cover names are distinct");
        let mut raw = Vec::new();
        for (k, u) in self.covers.iter().enumerate() {
            for (i, &a) in u.arrows.iter().enumerate() {
                raw.push((format!("{}|{}", u.name, u.index.label(i)), cov_pos[k], a));
            }
        }
        let (indexed, pos) = FinSet::with_positions(raw.iter().map(|r| r.0.clone()).collect()).expect("distinct");
        let (mut phi, mut m) = (vec![0; raw.len()], vec![0; raw.len()]);
        for (k, r) in raw.iter().enumerate() {
            phi[pos[k]] = r.1;
            m[pos[k]] = r.2;
        }
        let mut target = vec![0; cov.len()];
        for (k, u) in self.covers.iter().enumerate() {
            target[cov_pos[k]] = u.target;
        }
        SiteSquare {
            phi: FinFunction::new(indexed.clone(), cov.clone(), phi).unwrap(),
            m: FinFunction::new(indexed.clone(), self.base.arrows().clone(), m).unwrap(),
            target: FinFunction::new(cov.clone(), self.base.objects().clone(), target).unwrap(),
            cov,
            indexed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomVerdict {
    pub axiom: &'static str,
    pub holds: bool,
    pub failures: Vec<String>,
}

/// One instance of a strong axiom and the family chosen for it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Choice {
    pub instance: String,
    pub chosen: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceVerdict {
    pub axiom: &'static str,
    pub holds: bool,
    pub choices: Vec<Choice>,
}

impl ChoiceVerdict {
    fn weaken(&self) -> AxiomVerdict {
        AxiomVerdict {
            axiom: self.axiom,
            holds: self.holds,
            failures: self.choices.iter().filter(|c| c.chosen.is_none()).map(|c| c.instance.clone()).collect(),
        }
    }
}

fn factors_through_any(base: &FinCategory, x: usize, ys: &[usize]) -> bool {
    ys.iter().any(|&y| base.factors_through(x, y))
}

/// (C) with the pullback family chosen first-found in cover order.
pub fn check_strong_c(s: &Site) -> ChoiceVerdict {
    let base = &s.base;
    let mut choices = Vec::new();
    for u in &s.covers {
        for f in base.arrows_into(u.target) {
            let d = base.dom(f);
            let chosen = s.covers_of(d).into_iter().find(|&v| {
                s.covers[v].arrows.iter().all(|&beta| factors_through_any(base, base.comp(f, beta), &u.arrows))
            });
            choices.push(Choice {
                instance: format!("{} along {}", u.name, base.arrow_name(f)),
                chosen: chosen.map(|v| s.covers[v].name.clone()),
            });
        }
    }
    let holds = choices.iter().all(|c| c.chosen.is_some());
    ChoiceVerdict { axiom: "C", holds, choices }
}

pub fn check_c(s: &Site) -> AxiomVerdict {
    check_strong_c(s).weaken()
}

pub fn check_m(s: &Site) -> AxiomVerdict {
    let base = &s.base;
    let failures: Vec<String> = (0..base.num_objects())
        .filter(|&c| !s.covers_of(c).into_iter().any(|u| s.covers[u].arrows.contains(&base.identity(c))))
        .map(|c| base.object_name(c).to_string())
        .collect();
    AxiomVerdict { axiom: "M", holds: failures.is_empty(), failures }
}

/// (L) with the composite family chosen first-found in cover order.
pub fn check_strong_l(s: &Site) -> ChoiceVerdict {
    let base = &s.base;
    let mut choices = Vec::new();
    for u in &s.covers {
        let options: Vec<Vec<usize>> = u.arrows.iter().map(|&a| s.covers_of(base.dom(a))).collect();
        for pick in Product::new(options.iter().map(Vec::len).collect()) {
            let composites: Vec<usize> = u
                .arrows
                .iter()
                .zip(&pick)
                .enumerate()
                .flat_map(|(i, (&a, &p))| s.covers[options[i][p]].arrows.iter().map(move |&b| base.comp(a, b)))
                .collect();
            let chosen = s
                .covers_of(u.target)
                .into_iter()
                .find(|&w| s.covers[w].arrows.iter().all(|&g| factors_through_any(base, g, &composites)));
            let parts: Vec<&str> = pick.iter().enumerate().map(|(i, &p)| s.covers[options[i][p]].name.as_str()).collect();
            choices.push(Choice {
                instance: format!("{} refined by [{}]", u.name, parts.join(", ")),
                chosen: chosen.map(|w| s.covers[w].name.clone()),
            });
        }
    }
    let holds = choices.iter().all(|c| c.chosen.is_some());
    ChoiceVerdict { axiom: "L", holds, choices }
}

pub fn check_l(s: &Site) -> AxiomVerdict {
    check_strong_l(s).weaken()
}

/// How the factorization `p = f ∘ q` through a cover `f: F ↠ D_c` is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanMode {
    /// Any `q`, as in the internal logic of finite sets.
    Internal,
    /// `q` must itself be a cover. Stricter; used to exhibit failures.
    Refining,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectionSpanVerdict {
    pub holds: bool,
    pub mode: SpanMode,
    /// Covers `F ↠ D_c` were enumerated up to this many elements; beyond it
    /// the check is bounded.
    pub bound: usize,
    pub covers_checked: usize,
    pub failure: Option<String>,
}

/// Multiplicity vectors `m ≥ 1` on `n` points with total at most `bound`;
/// each describes a cover `F ↠ D_c` up to isomorphism.
fn multiplicities(n: usize, bound: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    if bound < n {
        return Vec::new();
    }
    let extra = bound - n;
    Product::new(vec![extra + 1; n])
        .filter(|v| v.iter().sum::<usize>() <= extra)
        .map(|v| v.into_iter().map(|e| e + 1).collect())
        .collect()
}

/// Is `(g: D → C, h: D → B)` a collection span over `A` (via `over: C → A`)?
/// `bound` caps the covers `F ↠ D_c`; the default is `|D_c| + 2`.
pub fn is_collection_span(
    g: &FinFunction,
    h: &FinFunction,
    over: &FinFunction,
    bound: Option<usize>,
    mode: SpanMode,
) -> Result<CollectionSpanVerdict> {
    if g.dom() != h.dom() || over.dom() != g.cod() {
        return Err(Error::Shape("collection span needs g: D → C, h: D → B and C → A".into()));
    }
    let fibers = g.fibers();
    let mut max_bound = 0;
    let mut checked = 0;
    for c in 0..g.cod().len() {
        let dc = &fibers[c];
        let b = bound.unwrap_or(dc.len() + 2);
        max_bound = max_bound.max(b);
        for mult in multiplicities(dc.len(), b) {
            checked += 1;
            let found = (0..g.cod().len()).filter(|&c2| over.apply(c2) == over.apply(c)).any(|c2| {
                let dc2 = &fibers[c2];
                Functions::new(dc2.len(), dc.len()).any(|p| {
                    let mut count = vec![0; dc.len()];
                    for &x in &p {
                        count[x] += 1;
                    }
                    let onto = count.iter().all(|&k| k > 0);
                    let over_b = p.iter().enumerate().all(|(y, &x)| h.apply(dc2[y]) == h.apply(dc[x]));
                    let lifts = match mode {
                        SpanMode::Internal => true,
                        SpanMode::Refining => count.iter().zip(&mult).all(|(k, m)| k >= m),
                    };
                    onto && over_b && lifts
                })
            });
            if !found {
                return Ok(CollectionSpanVerdict {
                    holds: false,
                    mode,
                    bound: max_bound,
                    covers_checked: checked,
                    failure: Some(format!(
                        "cover of the fiber over {} with multiplicities {:?} is not refined by any fiber",
                        g.cod().label(c),
                        mult
                    )),
                });
            }
        }
    }
    Ok(CollectionSpanVerdict { holds: true, mode, bound: max_bound, covers_checked: checked, failure: None })
}

/// The span `(φ, m)` of the site square is a collection span over `C0`.
pub fn is_collection_site(s: &Site, mode: SpanMode) -> Result<CollectionSpanVerdict> {
    let sq = s.square();
    is_collection_span(&sq.phi, &sq.m, &sq.target, None, mode)
}

pub fn has_small_covers(s: &Site, class: &MapClass) -> bool {
    class.contains(&s.square().phi)
}

/// An element of `COV_C`: `*` or `sup_U(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CovTree {
    Leaf(usize),
    Sup(usize, Vec<Arc<CovTree>>),
}

impl CovTree {
    pub fn root(&self, s: &Site) -> usize {
        match self {
            CovTree::Leaf(c) => *c,
            CovTree::Sup(u, _) => s.covers[*u].target,
        }
    }

    /// `*` has height 0.
    pub fn height(&self) -> usize {
        match self {
            CovTree::Leaf(_) => 0,
            CovTree::Sup(_, t) => 1 + t.iter().map(|c| c.height()).max().unwrap_or(0),
        }
    }

    pub fn label(&self, s: &Site) -> String {
        match self {
            CovTree::Leaf(_) => "*".to_string(),
            CovTree::Sup(u, t) => {
                let parts: Vec<String> = t.iter().map(|c| c.label(s)).collect();
                format!("{}({})", s.covers[*u].name, parts.join(","))
            }
        }
    }

    /// `M`: `*` gives the identity; `(i, k)` gives `m(i) ∘ M(k)`.
    pub fn family(&self, s: &Site) -> Vec<usize> {
        match self {
            CovTree::Leaf(c) => vec![s.base.identity(*c)],
            CovTree::Sup(u, t) => {
                let cover = &s.covers[*u];
                cover
                    .arrows
                    .iter()
                    .zip(t)
                    .flat_map(|(&a, child)| child.family(s).into_iter().map(move |k| s.base.comp(a, k)))
                    .collect()
            }
        }
    }

    /// `sup_U(λi.*)`.
    pub fn embed(s: &Site, u: usize) -> CovTree {
        let cover = &s.covers[u];
        CovTree::Sup(u, cover.arrows.iter().map(|&a| Arc::new(CovTree::Leaf(s.base.dom(a)))).collect())
    }
}

#[derive(Clone, Debug)]
pub struct RegistryEntry {
    pub tree: CovTree,
    /// Index of the tree's family among the generated covers.
    pub family: usize,
}

#[derive(Clone, Debug)]
pub struct GeneratedSite {
    pub site: Site,
    pub depth: usize,
    pub registry: Vec<RegistryEntry>,
}

/// The Grothendieck site generated by all covering trees of height at most
/// `depth`. Families with the same arrow set are identified.
pub fn generate_grothendieck(s: &Site, depth: usize, budget: usize) -> Result<GeneratedSite> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let base = &s.base;
    let n = base.num_objects();
    let mut level: Vec<Vec<Arc<CovTree>>> = (0..n).map(|c| vec![Arc::new(CovTree::Leaf(c))]).collect();
    for _ in 0..depth {
        let mut next: Vec<Vec<Arc<CovTree>>> = (0..n).map(|c| vec![Arc::new(CovTree::Leaf(c))]).collect();
        let mut total = n;
        for (k, u) in s.covers.iter().enumerate() {
            let options: Vec<&Vec<Arc<CovTree>>> = u.arrows.iter().map(|&a| &level[base.dom(a)]).collect();
            let count: usize = options.iter().map(|o| o.len()).product();
            total += count;
            if total > budget {
                return Err(Error::Budget(budget));
            }
            for pick in Product::new(options.iter().map(|o| o.len()).collect()) {
                let children = pick.iter().enumerate().map(|(i, &p)| options[i][p].clone()).collect();
                next[u.target].push(Arc::new(CovTree::Sup(k, children)));
            }
        }
        level = next;
    }
    let mut covers: Vec<CoveringFamily> = Vec::new();
    let mut by_key: HashMap<(usize, BTreeSet<usize>), usize> = HashMap::new();
    let mut registry = Vec::new();
    for (c, trees) in level.iter().enumerate() {
        for t in trees {
            let family = t.family(s);
            let key: BTreeSet<usize> = family.iter().copied().collect();
            let next_index = covers.len();
            let idx = *by_key.entry((c, key.clone())).or_insert(next_index);
            if idx == next_index {
                let names: Vec<&str> = key.iter().map(|&a| base.arrow_name(a)).collect();
                let arrows: Vec<usize> = key.iter().copied().collect();
                let name = format!("{}:{{{}}}", base.object_name(c), names.join(","));
                covers.push(CoveringFamily::from_arrows(base, name, c, &arrows)?);
            }
            registry.push(RegistryEntry { tree: (**t).clone(), family: idx });
        }
    }
    Ok(GeneratedSite { site: Site::new(base.clone(), covers)?, depth, registry })
}

/// Sieves as bitmasks over the arrows of the base.
pub type Sieve = u64;

fn require_small(base: &FinCategory) -> Result<()> {
    if base.num_arrows() > 64 {
        return Err(Error::Precondition("sieve bitmasks support at most 64 arrows".into()));
    }
    Ok(())
}

pub fn maximal_sieve(base: &FinCategory, c: usize) -> Sieve {
    base.arrows_into(c).into_iter().fold(0, |s, a| s | (1 << a))
}

/// The sieve generated by a family of arrows into one object.
pub fn sieve_of_family(base: &FinCategory, arrows: &[usize]) -> Sieve {
    let mut s = 0;
    for &a in arrows {
        for h in base.arrows_into(base.dom(a)) {
            s |= 1 << base.comp(a, h);
        }
    }
    s
}

/// `f*S = {h | f ∘ h ∈ S}`.
pub fn pullback_sieve(base: &FinCategory, s: Sieve, f: usize) -> Sieve {
    base.arrows_into(base.dom(f)).into_iter().filter(|&h| s & (1 << base.comp(f, h)) != 0).fold(0, |acc, h| acc | (1 << h))
}

pub fn sieve_members(s: Sieve) -> Vec<usize> {
    (0..64).filter(|&a| s & (1 << a) != 0).collect()
}

/// Every sieve on `c`.
pub fn all_sieves(base: &FinCategory, c: usize) -> Vec<Sieve> {
    let into = base.arrows_into(c);
    let mut out = Vec::new();
    for bits in 0u64..(1 << into.len()) {
        let s: Sieve = into.iter().enumerate().filter(|(i, _)| bits & (1 << i) != 0).fold(0, |acc, (_, &a)| acc | (1 << a));
        let closed = sieve_members(s)
            .into_iter()
            .all(|a| base.arrows_into(base.dom(a)).into_iter().all(|h| s & (1 << base.comp(a, h)) != 0));
        if closed {
            out.push(s);
        }
    }
    out
}

/// Covering sieves per object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub base: Arc<FinCategory>,
    pub sieves: Vec<BTreeSet<Sieve>>,
}

impl Topology {
    pub fn covers(&self, c: usize, s: Sieve) -> bool {
        self.sieves[c].contains(&s)
    }

    /// The intersection of all covering sieves on `c`, itself covering.
    pub fn minimum_sieve(&self, c: usize) -> Sieve {
        self.sieves[c].iter().fold(maximal_sieve(&self.base, c), |acc, &s| acc & s)
    }
}

/// Least Grothendieck topology containing the given sieves.
pub fn close_topology(base: &Arc<FinCategory>, initial: Vec<BTreeSet<Sieve>>) -> Result<Topology> {
    require_small(base)?;
    let n = base.num_objects();
    let candidates: Vec<Vec<Sieve>> = (0..n).map(|c| all_sieves(base, c)).collect();
    let mut j = initial;
    for (c, set) in j.iter_mut().enumerate() {
        set.insert(maximal_sieve(base, c));
    }
    loop {
        let mut changed = false;
        for c in 0..n {
            let current: Vec<Sieve> = j[c].iter().copied().collect();
            for s in current {
                for f in base.arrows_into(c) {
                    changed |= j[base.dom(f)].insert(pullback_sieve(base, s, f));
                }
            }
        }
        for c in 0..n {
            for &r in &candidates[c] {
                if j[c].contains(&r) {
                    continue;
                }
                let local = j[c].iter().any(|&s| {
                    sieve_members(s).into_iter().all(|h| j[base.dom(h)].contains(&pullback_sieve(base, r, h)))
                });
                if local {
                    j[c].insert(r);
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(Topology { base: base.clone(), sieves: j });
        }
    }
}

pub fn sieve_topology_fixpoint(s: &Site) -> Result<Topology> {
    let base = &s.base;
    require_small(base)?;
    let mut initial: Vec<BTreeSet<Sieve>> = vec![BTreeSet::new(); base.num_objects()];
    for u in &s.covers {
        initial[u.target].insert(sieve_of_family(base, &u.arrows));
    }
    close_topology(base, initial)
}

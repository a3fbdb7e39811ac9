//! Classes of small maps, checked over finite probe universes.
//!
//! Axioms quantify over a whole category; here they range over a finite
//! probe of objects and maps. Every verdict names its probe. A construction
//! whose result is larger than the probe's objects is out of scope: its
//! verdict is recorded separately and never counts as a counterexample.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cat::FinCategory;
use crate::enumerate::{surjections, Functions};
use crate::error::{Error, Result};
use crate::finset::{self, is_pullback_square, is_quasi_pullback, FinFunction, FinSet, Signature, Square};
use crate::presheaf::{self, nat_transformations, underlying_map, Presheaf, PresheafMorphism};
use crate::sheaf::{self, enumerate_sheaves, same_sheaves, SameSheavesVerdict};
use crate::site::{
    has_small_covers, is_collection_site, is_collection_span, sieve_topology_fixpoint, CollectionSpanVerdict,
    CoveringFamily, Site, SpanMode, Topology,
};

/// A class of maps between finite sets. Membership is invariant under
/// isomorphism in the arrow category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapClass {
    /// Every fiber has at most `k` elements.
    FiberBound(usize),
    All,
    /// Maps isomorphic to one of the listed maps, i.e. with the same
    /// multiset of fiber sizes.
    Explicit(Vec<FinFunction>),
}

fn fiber_profile(f: &FinFunction) -> Vec<usize> {
    let mut sizes = f.fiber_sizes();
    sizes.sort_unstable();
    sizes
}

impl MapClass {
    pub fn contains(&self, f: &FinFunction) -> bool {
        match self {
            MapClass::FiberBound(k) => f.max_fiber() <= *k,
            MapClass::All => true,
            MapClass::Explicit(maps) => {
                let p = fiber_profile(f);
                maps.iter().any(|g| fiber_profile(g) == p)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            MapClass::FiberBound(k) => format!("fiber-bound({k})"),
            MapClass::All => "all-maps".to_string(),
            MapClass::Explicit(maps) => format!("explicit({} maps)", maps.len()),
        }
    }
}

impl Serialize for MapClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// A membership test on the maps of some world.
pub trait Smallness<M> {
    fn is_small(&self, f: &M) -> bool;
    fn describe(&self) -> String;
}

impl Smallness<FinFunction> for MapClass {
    fn is_small(&self, f: &FinFunction) -> bool {
        self.contains(f)
    }

    fn describe(&self) -> String {
        self.name()
    }
}

/// The finite fragment of a category that axiom checks range over.
pub trait MapWorld {
    type Map: Clone + fmt::Display;

    fn describe(&self) -> String;
    /// `(dom, cod, map)` with `dom` and `cod` indexing the probe objects.
    fn entries(&self) -> &[(usize, usize, Self::Map)];
    fn identities(&self) -> Vec<Self::Map>;
    fn in_scope(&self, f: &Self::Map) -> bool;
    /// Largest fiber, used to rank witnesses.
    fn weight(&self, f: &Self::Map) -> usize;
    fn is_epi(&self, f: &Self::Map) -> Result<bool>;
    /// The pullback of `f: B → A` along `g: A' → A`, as a map into `A'`.
    fn pull_back(&self, f: &Self::Map, g: &Self::Map) -> Result<Self::Map>;
    fn sum(&self, f: &Self::Map, g: &Self::Map) -> Result<Self::Map>;
    /// `second ∘ first`.
    fn compose(&self, first: &Self::Map, second: &Self::Map) -> Result<Self::Map>;
    /// `X → X ×_Y X` for `f: X → Y`.
    fn diagonal(&self, f: &Self::Map) -> Result<Self::Map>;
}

/// Finite sets: subsets of a labelled carrier, and optionally extra
/// standard sets, with every map between them.
#[derive(Clone, Debug)]
pub struct ProbeUniverse {
    pub carrier: usize,
    pub objects: Vec<FinSet>,
    entries: Vec<(usize, usize, FinFunction)>,
    extra: Vec<usize>,
}

impl ProbeUniverse {
    /// All subsets of `{0, ..., carrier-1}` and all maps among them.
    pub fn new(carrier: usize) -> ProbeUniverse {
        let labels: Vec<String> = (0..carrier).map(|i| i.to_string()).collect();
        let objects = (0u64..(1 << carrier))
            .map(|mask| {
                FinSet::new(labels.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, l)| l.clone()))
                    .unwrap()
            })
            .collect();
        ProbeUniverse::from_objects(carrier, objects, Vec::new())
    }

    /// Adds one set of each given size, with labels `x0, x1, ...`.
    pub fn with_extra_sets(self, sizes: &[usize]) -> ProbeUniverse {
        let mut objects = self.objects;
        objects.extend(sizes.iter().map(|&n| FinSet::numbered("x", n)));
        let mut extra = self.extra;
        extra.extend_from_slice(sizes);
        ProbeUniverse::from_objects(self.carrier, objects, extra)
    }

    fn from_objects(carrier: usize, objects: Vec<FinSet>, extra: Vec<usize>) -> ProbeUniverse {
        let mut entries = Vec::new();
        for (i, x) in objects.iter().enumerate() {
            for (j, y) in objects.iter().enumerate() {
                for t in Functions::new(x.len(), y.len()) {
                    entries.push((i, j, FinFunction::new(x.clone(), y.clone(), t).unwrap()));
                }
            }
        }
        ProbeUniverse { carrier, objects, entries, extra }
    }

    pub fn max_size(&self) -> usize {
        self.objects.iter().map(FinSet::len).max().unwrap_or(0)
    }

    pub fn maps(&self) -> impl Iterator<Item = &FinFunction> {
        self.entries.iter().map(|e| &e.2)
    }
}

impl MapWorld for ProbeUniverse {
    type Map = FinFunction;

    fn describe(&self) -> String {
        if self.extra.is_empty() {
            format!("subsets of a {}-element carrier", self.carrier)
        } else {
            format!("subsets of a {}-element carrier plus sets of sizes {:?}", self.carrier, self.extra)
        }
    }

    fn entries(&self) -> &[(usize, usize, FinFunction)] {
        &self.entries
    }

    fn identities(&self) -> Vec<FinFunction> {
        self.objects.iter().map(FinFunction::identity).collect()
    }

    fn in_scope(&self, f: &FinFunction) -> bool {
        let m = self.max_size();
        f.dom().len() <= m && f.cod().len() <= m
    }

    fn weight(&self, f: &FinFunction) -> usize {
        f.max_fiber()
    }

    fn is_epi(&self, f: &FinFunction) -> Result<bool> {
        Ok(f.is_surjective())
    }

    fn pull_back(&self, f: &FinFunction, g: &FinFunction) -> Result<FinFunction> {
        Ok(finset::pullback(f, g)?.p2)
    }

    fn sum(&self, f: &FinFunction, g: &FinFunction) -> Result<FinFunction> {
        Ok(finset::sum_map(f, g))
    }

    fn compose(&self, first: &FinFunction, second: &FinFunction) -> Result<FinFunction> {
        first.then(second)
    }

    fn diagonal(&self, f: &FinFunction) -> Result<FinFunction> {
        let kp = finset::pullback(f, f)?;
        FinFunction::from_fn(f.dom().clone(), kp.object.clone(), |x| kp.index(x, x).unwrap())
    }
}

/// Presheaves (or sheaves) with values of bounded size and all natural
/// transformations among them.
#[derive(Clone, Debug)]
pub struct PresheafProbe {
    pub base: Arc<FinCategory>,
    pub bound: usize,
    pub objects: Vec<Presheaf>,
    entries: Vec<(usize, usize, PresheafMorphism)>,
    sheaves: Option<(Site, Topology)>,
}

impl PresheafProbe {
    pub fn presheaves(base: &Arc<FinCategory>, bound: usize, budget: usize) -> Result<PresheafProbe> {
        let objects = presheaf::all_presheaves(base, bound, budget)?;
        PresheafProbe::build(base.clone(), bound, objects, None, budget)
    }

    pub fn sheaves(s: &Site, bound: usize, budget: usize) -> Result<PresheafProbe> {
        let objects = enumerate_sheaves(s, bound, budget)?;
        let j = sieve_topology_fixpoint(s)?;
        PresheafProbe::build(s.base().clone(), bound, objects, Some((s.clone(), j)), budget)
    }

    fn build(
        base: Arc<FinCategory>,
        bound: usize,
        objects: Vec<Presheaf>,
        sheaves: Option<(Site, Topology)>,
        budget: usize,
    ) -> Result<PresheafProbe> {
        let mut entries = Vec::new();
        for (i, p) in objects.iter().enumerate() {
            for (j, q) in objects.iter().enumerate() {
                for f in nat_transformations(p, q, budget)? {
                    entries.push((i, j, f));
                }
                if entries.len() > budget {
                    return Err(Error::Budget(budget));
                }
            }
        }
        Ok(PresheafProbe { base, bound, objects, entries, sheaves })
    }
}

impl fmt::Display for PresheafMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.base();
        let parts: Vec<String> =
            (0..base.num_objects()).map(|c| format!("{}:{}", base.object_name(c), self.component(c))).collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl MapWorld for PresheafProbe {
    type Map = PresheafMorphism;

    fn describe(&self) -> String {
        let kind = if self.sheaves.is_some() { "sheaves" } else { "presheaves" };
        format!("{} {} with values of size at most {}", self.objects.len(), kind, self.bound)
    }

    fn entries(&self) -> &[(usize, usize, PresheafMorphism)] {
        &self.entries
    }

    fn identities(&self) -> Vec<PresheafMorphism> {
        self.objects.iter().map(PresheafMorphism::identity).collect()
    }

    fn in_scope(&self, f: &PresheafMorphism) -> bool {
        f.source().max_value() <= self.bound && f.target().max_value() <= self.bound
    }

    fn weight(&self, f: &PresheafMorphism) -> usize {
        underlying_map(f).map(|u| u.max_fiber()).unwrap_or(0)
    }

    fn is_epi(&self, f: &PresheafMorphism) -> Result<bool> {
        match &self.sheaves {
            Some((_, j)) => Ok(sheaf::is_locally_surjective_in(f, j)),
            None => Ok(f.is_epi()),
        }
    }

    fn pull_back(&self, f: &PresheafMorphism, g: &PresheafMorphism) -> Result<PresheafMorphism> {
        Ok(presheaf::pullback(f, g)?.p2)
    }

    fn sum(&self, f: &PresheafMorphism, g: &PresheafMorphism) -> Result<PresheafMorphism> {
        let dom = presheaf::sum(f.source(), g.source())?;
        let cod = presheaf::sum(f.target(), g.target())?;
        let s = dom.copair(&f.then(&cod.inl)?, &g.then(&cod.inr)?)?;
        match &self.sheaves {
            None => Ok(s),
            Some((_, j)) => {
                let a = sheaf::sheafify_with(s.source(), j)?;
                let b = sheaf::sheafify_with(s.target(), j)?;
                sheaf::sheafify_map(&s, &a, &b)
            }
        }
    }

    fn compose(&self, first: &PresheafMorphism, second: &PresheafMorphism) -> Result<PresheafMorphism> {
        first.then(second)
    }

    fn diagonal(&self, f: &PresheafMorphism) -> Result<PresheafMorphism> {
        let kp = presheaf::kernel_pair(f)?;
        let id = PresheafMorphism::identity(f.source());
        kp.pair(&id, &id)
    }
}

/// One axiom instantiated over a probe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub axiom: &'static str,
    pub holds: bool,
    pub instances: usize,
    pub counterexamples: usize,
    /// The first few counterexamples.
    pub examples: Vec<String>,
    /// Instances whose construction left the probe.
    pub outside_scope: usize,
    pub outside_scope_violations: usize,
}

const EXAMPLES: usize = 3;

struct Tally {
    report: AxiomReport,
}

impl Tally {
    fn new(axiom: &'static str) -> Tally {
        Tally {
            report: AxiomReport {
                axiom,
                holds: true,
                instances: 0,
                counterexamples: 0,
                examples: Vec::new(),
                outside_scope: 0,
                outside_scope_violations: 0,
            },
        }
    }

    fn record(&mut self, in_scope: bool, ok: bool, describe: impl FnOnce() -> String) {
        let r = &mut self.report;
        r.instances += 1;
        if !in_scope {
            r.outside_scope += 1;
            r.outside_scope_violations += usize::from(!ok);
        } else if !ok {
            r.holds = false;
            r.counterexamples += 1;
            if r.examples.len() < EXAMPLES {
                r.examples.push(describe());
            }
        }
    }

    fn finish(self) -> AxiomReport {
        self.report
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityVerdict {
    pub class: String,
    pub probe: String,
    pub holds: bool,
    pub s1: AxiomReport,
    pub s2: AxiomReport,
    pub s3: AxiomReport,
}

/// S1 (pullback stability), S2 (descent along epis) and S3 (sums).
pub fn check_stable<W: MapWorld, S: Smallness<W::Map>>(class: &S, world: &W) -> Result<StabilityVerdict> {
    let entries = world.entries();
    let mut s1 = Tally::new("S1");
    let mut s2 = Tally::new("S2");
    let mut s3 = Tally::new("S3");
    let epis: Vec<bool> = entries.iter().map(|e| world.is_epi(&e.2)).collect::<Result<_>>()?;
    for (_, a, f) in entries {
        let f_small = class.is_small(f);
        for (k, (_, a2, g)) in entries.iter().enumerate() {
            if a2 != a {
                continue;
            }
            let pulled = world.pull_back(f, g)?;
            let pulled_small = class.is_small(&pulled);
            if f_small {
                s1.record(world.in_scope(&pulled), pulled_small, || format!("{f} pulled back along {g}"));
            }
            if epis[k] {
                s2.record(world.in_scope(&pulled), !pulled_small || f_small, || {
                    format!("{f} is not small but its pullback along the epi {g} is")
                });
            }
        }
    }
    let small: Vec<&W::Map> = entries.iter().map(|e| &e.2).filter(|f| class.is_small(f)).collect();
    for f in &small {
        for g in &small {
            let s = world.sum(f, g)?;
            s3.record(world.in_scope(&s), class.is_small(&s), || format!("{f} + {g}"));
        }
    }
    let (s1, s2, s3) = (s1.finish(), s2.finish(), s3.finish());
    Ok(StabilityVerdict {
        class: class.describe(),
        probe: world.describe(),
        holds: s1.holds && s2.holds && s3.holds,
        s1,
        s2,
        s3,
    })
}

/// A failing composite `second ∘ first` of two small maps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Triangle {
    pub first: String,
    pub second: String,
    pub composite: String,
    pub composite_fiber: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalFullnessVerdict {
    pub class: String,
    pub probe: String,
    pub holds: bool,
    pub s4: AxiomReport,
    pub s4a: AxiomReport,
    pub s4b: AxiomReport,
    /// The failing composite with the largest fiber.
    pub s4a_witness: Option<Triangle>,
    pub identities_small: bool,
    pub s1_holds: bool,
    /// `S4 ⇔ S4a ∧ S4b`, compared only when identities are small and S1
    /// holds.
    pub remark_agrees: Option<bool>,
}

pub fn check_locally_full<W: MapWorld, S: Smallness<W::Map>>(class: &S, world: &W) -> Result<LocalFullnessVerdict> {
    let entries = world.entries();
    let mut s4 = Tally::new("S4");
    let mut s4a = Tally::new("S4a");
    let mut s4b = Tally::new("S4b");
    let mut witness: Option<Triangle> = None;
    for (b, _, f) in entries {
        if !class.is_small(f) {
            continue;
        }
        let d = world.diagonal(f)?;
        s4b.record(world.in_scope(&d), class.is_small(&d), || format!("diagonal of {f}"));
        for (_, b2, g) in entries {
            if b2 != b {
                continue;
            }
            let h = world.compose(g, f)?;
            let (g_small, h_small) = (class.is_small(g), class.is_small(&h));
            let scope = world.in_scope(&h);
            s4.record(scope, g_small == h_small, || format!("{g} then {f}"));
            if g_small {
                s4a.record(scope, h_small, || format!("{g} then {f}"));
                if scope && !h_small && witness.as_ref().is_none_or(|w| world.weight(&h) > w.composite_fiber) {
                    witness = Some(Triangle {
                        first: g.to_string(),
                        second: f.to_string(),
                        composite: h.to_string(),
                        composite_fiber: world.weight(&h),
                    });
                }
            }
        }
    }
    let identities_small = world.identities().iter().all(|i| class.is_small(i));
    let s1_holds = check_s1(class, world)?;
    let (s4, s4a, s4b) = (s4.finish(), s4a.finish(), s4b.finish());
    let remark_agrees = (identities_small && s1_holds).then_some(s4.holds == (s4a.holds && s4b.holds));
    Ok(LocalFullnessVerdict {
        class: class.describe(),
        probe: world.describe(),
        holds: s4.holds,
        s4,
        s4a,
        s4b,
        s4a_witness: witness,
        identities_small,
        s1_holds,
        remark_agrees,
    })
}

fn check_s1<W: MapWorld, S: Smallness<W::Map>>(class: &S, world: &W) -> Result<bool> {
    let entries = world.entries();
    for (_, a, f) in entries.iter().filter(|e| class.is_small(&e.2)) {
        for (_, a2, g) in entries {
            if a2 == a {
                let pulled = world.pull_back(f, g)?;
                if world.in_scope(&pulled) && !class.is_small(&pulled) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A failing dependent product `Π_f(g) → A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiWitness {
    pub f: String,
    pub g: String,
    pub fiber: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiWVerdict {
    pub class: String,
    pub probe: String,
    pub holds: bool,
    pub sums: AxiomReport,
    pub quotients: AxiomReport,
    pub pi: AxiomReport,
    pub pi_witness: Option<PiWitness>,
    /// W-types are truncated at this depth; an unsaturated truncation is
    /// out of scope.
    pub w_depth: usize,
    pub w: AxiomReport,
}

/// Closure of the small maps over each `X` under sums, quotients, `Π` and
/// bounded W-types.
/// Out-of-scope W approximations larger than this are not materialized.
const W_SCOPE_LIMIT: usize = 1 << 12;

pub fn check_pi_w_closure(class: &MapClass, probe: &ProbeUniverse, w_depth: usize) -> Result<PiWVerdict> {
    let entries = probe.entries();
    let max = probe.max_size();
    let mut sums = Tally::new("sums");
    let mut quotients = Tally::new("quotients");
    let mut pi = Tally::new("pi");
    let mut w = Tally::new("w");
    let mut witness: Option<PiWitness> = None;
    let small: Vec<&(usize, usize, FinFunction)> = entries.iter().filter(|e| class.contains(&e.2)).collect();
    for (_, x, f) in &small {
        for (_, x2, g) in &small {
            if x2 != x {
                continue;
            }
            let s = finset::sum(f.dom(), g.dom());
            let table: Vec<usize> = f.table().iter().chain(g.table()).copied().collect();
            let copair = FinFunction::new(s.object, f.cod().clone(), table)?;
            sums.record(copair.dom().len() <= max, class.contains(&copair), || format!("[{f}, {g}]"));
        }
    }
    for (_, q, e) in entries {
        if !e.is_surjective() {
            continue;
        }
        for (q2, _, f) in entries {
            if q2 != q {
                continue;
            }
            let composite = e.then(f)?;
            if class.contains(&composite) {
                quotients.record(true, class.contains(f), || format!("{f} under the cover {e}"));
            }
        }
    }
    for (b, _, f) in &small {
        for (_, b2, g) in &small {
            if b2 != b {
                continue;
            }
            let dp = finset::pi_f(f, g)?;
            let scope = dp.object.len() <= max;
            let ok = class.contains(&dp.projection);
            pi.record(scope, ok, || format!("Π along {f} of {g}"));
            let fiber = dp.projection.max_fiber();
            if !ok && witness.as_ref().is_none_or(|w| fiber > w.fiber) {
                witness = Some(PiWitness { f: f.to_string(), g: g.to_string(), fiber });
            }
        }
        let a_small = class.contains(&FinFunction::to_terminal(f.cod()));
        if a_small {
            let sig = Signature::new(f.clone());
            let size = finset::kleene_size(&sig, w_depth);
            let saturated = finset::kleene_size(&sig, w_depth + 1) == size;
            if saturated && size <= max {
                let to_one = FinFunction::to_terminal(&finset::kleene_iterate(&sig, w_depth));
                w.record(true, class.contains(&to_one), || format!("W-type of {f}"));
            } else if size <= W_SCOPE_LIMIT {
                let to_one = FinFunction::to_terminal(&FinSet::numbered("w", size));
                w.record(false, class.contains(&to_one), || format!("W-type of {f}"));
            }
        }
    }
    let (sums, quotients, pi, w) = (sums.finish(), quotients.finish(), pi.finish(), w.finish());
    Ok(PiWVerdict {
        class: class.name(),
        probe: probe.describe(),
        holds: sums.holds && quotients.holds && pi.holds && w.holds,
        sums,
        quotients,
        pi,
        pi_witness: witness,
        w_depth,
        w,
    })
}

/// `π: E → U` with one point of `U` per fiber size; the fiber over the
/// point for size `n` is `{un.0, ..., un.(n-1)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalMap {
    pub pi: FinFunction,
    pub sizes: Vec<usize>,
}

impl UniversalMap {
    pub fn from_sizes(sizes: &BTreeSet<usize>) -> UniversalMap {
        let u = FinSet::new(sizes.iter().map(|n| format!("u{n}"))).unwrap();
        let mut labels = Vec::new();
        for n in sizes {
            labels.extend((0..*n).map(|k| (format!("u{n}.{k}"), format!("u{n}"))));
        }
        let e = FinSet::new(labels.iter().map(|l| l.0.clone())).unwrap();
        let pi = FinFunction::from_fn(e.clone(), u.clone(), |i| u.index_of(&labels.iter().find(|l| l.0 == e.label(i)).unwrap().1).unwrap())
            .unwrap();
        let sizes = (0..u.len()).map(|p| pi.fibers()[p].len()).collect();
        UniversalMap { pi, sizes }
    }

    pub fn point(&self, size: usize) -> Option<usize> {
        self.sizes.iter().position(|&n| n == size)
    }

    pub fn fiber(&self, u: usize) -> Vec<usize> {
        self.pi.fibers().swap_remove(u)
    }
}

/// Witnesses that `f` is a pullback of `π` after the cover `p = id`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepresentationWitness {
    pub map: String,
    pub classifier: String,
    pub cover_is_epi: bool,
    pub left_pullback: bool,
    pub right_pullback: bool,
}

#[derive(Clone, Debug)]
pub struct Representation {
    pub universal: UniversalMap,
    pub witnesses: Vec<RepresentationWitness>,
}

impl Representation {
    pub fn verified(&self) -> bool {
        self.witnesses.iter().all(|w| w.cover_is_epi && w.left_pullback && w.right_pullback)
    }
}

/// Both squares exhibiting `f: B → A` as a pullback of `π` along the
/// classifying map `A → U`.
pub fn represent(f: &FinFunction, universal: &UniversalMap) -> Result<RepresentationWitness> {
    let fibers = f.fibers();
    let u = universal.pi.cod();
    let classifier = FinFunction::from_fn(f.cod().clone(), u.clone(), |a| {
        universal.point(fibers[a].len()).expect("every fiber size has a point")
    })?;
    let right = finset::pullback(&classifier, &universal.pi)?;
    let position: Vec<usize> = (0..universal.pi.dom().len())
        .map(|e| universal.fiber(universal.pi.apply(e)).iter().position(|&x| x == e).unwrap())
        .collect();
    let to_b = FinFunction::from_fn(right.object.clone(), f.dom().clone(), |k| {
        fibers[right.p1.apply(k)][position[right.p2.apply(k)]]
    })?;
    let id = FinFunction::identity(f.cod());
    let left = Square::new(to_b, right.p1.clone(), f.clone(), id.clone())?;
    let right_sq = Square::new(right.p2.clone(), right.p1.clone(), universal.pi.clone(), classifier.clone())?;
    Ok(RepresentationWitness {
        map: f.to_string(),
        classifier: classifier.to_string(),
        cover_is_epi: id.is_surjective(),
        left_pullback: is_pullback_square(&left)?,
        right_pullback: is_pullback_square(&right_sq)?,
    })
}

/// Builds `π` from the fiber sizes of the small maps in the probe and
/// represents each of them.
pub fn find_representation(class: &MapClass, probe: &ProbeUniverse) -> Result<Representation> {
    let small: Vec<&FinFunction> = probe.maps().filter(|f| class.contains(f)).collect();
    let sizes: BTreeSet<usize> = small.iter().flat_map(|f| f.fiber_sizes()).collect();
    let universal = UniversalMap::from_sizes(&sizes);
    if !class.contains(&universal.pi) {
        return Err(Error::Precondition(format!("the universal map {} is not small", universal.pi)));
    }
    let witnesses = small.into_iter().map(|f| represent(f, &universal)).collect::<Result<Vec<_>>>()?;
    Ok(Representation { universal, witnesses })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectionVerdict {
    pub class: String,
    pub probe: String,
    pub holds: bool,
    pub instances: usize,
    pub section_witnesses: usize,
    pub searched_witnesses: usize,
    pub counterexamples: Vec<String>,
    /// The reformulation through the universal map, in both readings.
    pub universal_collection_internal: Option<bool>,
    pub universal_collection_refining: Option<bool>,
}

/// A section of a surjection, choosing the first element of each fiber.
fn section(e: &FinFunction) -> Option<FinFunction> {
    let fibers = e.fibers();
    if fibers.iter().any(Vec::is_empty) {
        return None;
    }
    FinFunction::new(e.cod().clone(), e.dom().clone(), fibers.iter().map(|f| f[0]).collect()).ok()
}

/// The collection axiom: every small `f: A → X` and epi `C ↠ A` admit a
/// quasi-pullback `B → C ↠ A` over an epi `Y ↠ X` with `g: B → Y` small.
pub fn check_collection_axiom(class: &MapClass, probe: &ProbeUniverse) -> Result<CollectionVerdict> {
    check_collection_axiom_with(class, probe, &|_| true)
}

/// As [`check_collection_axiom`], with the candidates for `g` further
/// restricted by `allowed`.
pub fn check_collection_axiom_with(
    class: &MapClass,
    probe: &ProbeUniverse,
    allowed: &dyn Fn(&FinFunction) -> bool,
) -> Result<CollectionVerdict> {
    let entries = probe.entries();
    let (mut instances, mut by_section, mut by_search) = (0, 0, 0);
    let mut counterexamples = Vec::new();
    for (a, x, f) in entries.iter().filter(|e| class.contains(&e.2)) {
        for (c, a2, e) in entries {
            if a2 != a || !e.is_surjective() {
                continue;
            }
            instances += 1;
            if allowed(f) {
                if let Some(s) = section(e) {
                    let top = s.then(e)?;
                    let sq = Square::new(top, f.clone(), f.clone(), FinFunction::identity(f.cod()))?;
                    if is_quasi_pullback(&sq)? {
                        by_section += 1;
                        continue;
                    }
                }
            }
            let found = entries.iter().filter(|q| q.1 == *x && q.2.is_surjective()).any(|(y, _, q)| {
                entries.iter().filter(|g| g.1 == *y && class.contains(&g.2) && allowed(&g.2)).any(|(b, _, g)| {
                    entries.iter().filter(|k| k.0 == *b && k.1 == *c).any(|(_, _, k)| {
                        let top = k.then(e).unwrap();
                        Square::new(top, g.clone(), f.clone(), q.clone())
                            .and_then(|sq| is_quasi_pullback(&sq))
                            .unwrap_or(false)
                    })
                })
            });
            if found {
                by_search += 1;
            } else if counterexamples.len() < EXAMPLES {
                counterexamples.push(format!("{f} with the epi {e}"));
            } else {
                counterexamples.push(String::new());
            }
        }
    }
    let failures = counterexamples.len();
    counterexamples.retain(|c| !c.is_empty());
    let (internal, refining) = match find_representation(class, probe) {
        Ok(r) => {
            let pi = &r.universal.pi;
            let h = FinFunction::to_terminal(pi.dom());
            let over = FinFunction::to_terminal(pi.cod());
            (
                Some(is_collection_span(pi, &h, &over, None, SpanMode::Internal)?.holds),
                Some(is_collection_span(pi, &h, &over, None, SpanMode::Refining)?.holds),
            )
        }
        Err(_) => (None, None),
    };
    Ok(CollectionVerdict {
        class: class.name(),
        probe: probe.describe(),
        holds: failures == 0,
        instances,
        section_witnesses: by_section,
        searched_witnesses: by_search,
        counterexamples,
        universal_collection_internal: internal,
        universal_collection_refining: refining,
    })
}

/// `C = Σ_{a, u} {p: E_u ↠ B_a}`, `D = Σ_{(a,u,p)} E_u`, with `g: D → C`,
/// `h: D → B` acting by `p`, and `C → A`.
#[derive(Clone, Debug)]
pub struct CollectionSpanConstruction {
    pub c: FinSet,
    pub d: FinSet,
    pub g: FinFunction,
    pub h: FinFunction,
    pub over: FinFunction,
    /// Per element of `C`: `(a, u, p)` with `p` listing elements of `B`.
    pub triples: Vec<(usize, usize, Vec<usize>)>,
    pub quasi_pullback: bool,
    pub g_small: bool,
    pub span: CollectionSpanVerdict,
}

impl CollectionSpanConstruction {
    pub fn verified(&self) -> bool {
        self.quasi_pullback && self.g_small && self.span.holds
    }
}

pub fn collsp_construct(f: &FinFunction, class: &MapClass, universal: &UniversalMap) -> Result<CollectionSpanConstruction> {
    if !class.contains(f) {
        return Err(Error::Precondition(format!("{f} is not small")));
    }
    let b_fibers = f.fibers();
    let u_set = universal.pi.cod();
    let e_set = universal.pi.dom();
    let mut triples = Vec::new();
    for (a, fiber) in b_fibers.iter().enumerate() {
        for u in 0..u_set.len() {
            let eu = universal.fiber(u);
            for p in surjections(eu.len(), fiber.len()) {
                triples.push((a, u, p.iter().map(|&k| fiber[k]).collect::<Vec<usize>>()));
            }
        }
    }
    let c_labels: Vec<String> = triples
        .iter()
        .map(|(a, u, p)| {
            let parts: Vec<&str> = p.iter().map(|&b| f.dom().label(b)).collect();
            format!("{}|{}|[{}]", f.cod().label(*a), u_set.label(*u), parts.join(","))
        })
        .collect();
    let (c, c_pos) = FinSet::with_positions(c_labels.clone())?;
    let mut d_raw = Vec::new();
    for (k, (_, u, p)) in triples.iter().enumerate() {
        for (i, &e) in universal.fiber(*u).iter().enumerate() {
            d_raw.push((format!("{}|{}", c_labels[k], e_set.label(e)), c_pos[k], p[i]));
        }
    }
    let (d, d_pos) = FinSet::with_positions(d_raw.iter().map(|r| r.0.clone()).collect())?;
    let (mut g_t, mut h_t) = (vec![0; d_raw.len()], vec![0; d_raw.len()]);
    for (k, r) in d_raw.iter().enumerate() {
        g_t[d_pos[k]] = r.1;
        h_t[d_pos[k]] = r.2;
    }
    let mut ordered = vec![(0, 0, Vec::new()); triples.len()];
    for (k, t) in triples.into_iter().enumerate() {
        ordered[c_pos[k]] = t;
    }
    let g = FinFunction::new(d.clone(), c.clone(), g_t)?;
    let h = FinFunction::new(d.clone(), f.dom().clone(), h_t)?;
    let over = FinFunction::from_fn(c.clone(), f.cod().clone(), |k| ordered[k].0)?;
    let quasi_pullback = is_quasi_pullback(&Square::new(h.clone(), g.clone(), f.clone(), over.clone())?)?;
    let g_small = class.contains(&g);
    let span = is_collection_span(&g, &h, &over, None, SpanMode::Internal)?;
    Ok(CollectionSpanConstruction { c, d, g, h, over, triples: ordered, quasi_pullback, g_small, span })
}

#[derive(Clone, Debug)]
pub struct EquivalentCollectionSite {
    pub site: Site,
    pub collection_site: CollectionSpanVerdict,
    pub small_covers: bool,
    pub same_sheaves: SameSheavesVerdict,
}

impl EquivalentCollectionSite {
    pub fn verified(&self) -> bool {
        self.collection_site.holds && self.small_covers && self.same_sheaves.equal && self.same_sheaves.complete
    }
}

/// Re-indexes every cover `U` by the surjections `E_u ↠ I_U`, giving one
/// cover `(U, u, p)` with arrows `m(p(e))` for `e ∈ E_u`.
pub fn equiv_collection_site(
    s: &Site,
    class: &MapClass,
    universal: &UniversalMap,
    bound: usize,
    budget: usize,
) -> Result<EquivalentCollectionSite> {
    if !has_small_covers(s, class) {
        return Err(Error::Precondition(format!("the covers are not small for {}", class.name())));
    }
    let sq = s.square();
    let cons = collsp_construct(&sq.phi, class, universal)?;
    let fibers = cons.g.fibers();
    let e_set = universal.pi.dom();
    let mut covers = Vec::new();
    for (k, (cover, u, _)) in cons.triples.iter().enumerate() {
        let eu = universal.fiber(*u);
        let members = fibers[k]
            .iter()
            .enumerate()
            .map(|(i, &d)| (e_set.label(eu[i]).to_string(), sq.m.apply(cons.h.apply(d))))
            .collect();
        covers.push(CoveringFamily::new(cons.c.label(k), sq.target.apply(*cover), members)?);
    }
    let site = Site::new(s.base().clone(), covers)?;
    Ok(EquivalentCollectionSite {
        collection_site: is_collection_site(&site, SpanMode::Internal)?,
        small_covers: has_small_covers(&site, class),
        same_sheaves: same_sheaves(s, &site, bound, budget)?,
        site,
    })
}

/// The class of presheaf (or sheaf) morphisms whose components are all
/// small, i.e. whose map of underlying sets is small.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InducedClass {
    pub base_class: MapClass,
    pub sheaves: bool,
    /// Whether `cod: C1 → C0` is small.
    pub cod_small: bool,
    pub warning: Option<String>,
}

impl Smallness<PresheafMorphism> for InducedClass {
    fn is_small(&self, f: &PresheafMorphism) -> bool {
        underlying_map(f).is_ok_and(|u| self.base_class.contains(&u))
    }

    fn describe(&self) -> String {
        let kind = if self.sheaves { "sheaf" } else { "presheaf" };
        format!("pointwise {} ({kind} morphisms)", self.base_class.name())
    }
}

fn induce(class: &MapClass, base: &FinCategory, sheaves: bool) -> InducedClass {
    let cod = base.cod_map();
    let cod_small = class.contains(cod);
    let warning = (!cod_small).then(|| {
        format!(
            "cod: C1 → C0 is not small for {} (largest hom-fiber {}); closure under Π and W is not guaranteed",
            class.name(),
            cod.max_fiber()
        )
    });
    InducedClass { base_class: class.clone(), sheaves, cod_small, warning }
}

pub fn induce_presheaf_class(class: &MapClass, base: &FinCategory) -> InducedClass {
    induce(class, base, false)
}

pub fn induce_sheaf_class(class: &MapClass, s: &Site) -> InducedClass {
    induce(class, s.base(), true)
}

/// A fiber-bound class containing the given maps, together with its
/// collection-axiom verdict on a probe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniverseWitness {
    pub class: MapClass,
    pub contains_all: bool,
    pub collection: CollectionVerdict,
}

pub fn synthesize_class(maps: &[FinFunction], probe: &ProbeUniverse) -> Result<UniverseWitness> {
    let k = maps.iter().map(FinFunction::max_fiber).max().unwrap_or(0);
    let class = MapClass::FiberBound(k);
    Ok(UniverseWitness {
        contains_all: maps.iter().all(|f| class.contains(f)),
        collection: check_collection_axiom(&class, probe)?,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(dom: &[&str], cod: &[&str], table: Vec<usize>) -> FinFunction {
        FinFunction::new(FinSet::new(dom.iter().copied()).unwrap(), FinSet::new(cod.iter().copied()).unwrap(), table)
            .unwrap()
    }

    #[test]
    fn membership() {
        let f = map(&["a", "b", "c"], &["x", "y"], vec![0, 0, 1]);
        assert!(MapClass::FiberBound(2).contains(&f));
        assert!(!MapClass::FiberBound(1).contains(&f));
        let iso = map(&["p", "q", "r"], &["s", "t"], vec![1, 0, 0]);
        assert!(MapClass::Explicit(vec![f]).contains(&iso));
    }

    #[test]
    fn fiber_bound_is_stable_on_a_small_probe() {
        let probe = ProbeUniverse::new(2);
        let v = check_stable(&MapClass::FiberBound(1), &probe).unwrap();
        assert!(v.holds, "{v:?}");
        assert!(check_stable(&MapClass::All, &probe).unwrap().holds);
    }

    #[test]
    fn explicit_class_fails_pullback_stability() {
        let f = map(&["a", "b"], &["x"], vec![0, 0]);
        let v = check_stable(&MapClass::Explicit(vec![f]), &ProbeUniverse::new(2)).unwrap();
        assert!(!v.s1.holds);
    }

    #[test]
    fn composite_of_double_covers() {
        let probe = ProbeUniverse::new(2).with_extra_sets(&[4]);
        let v = check_locally_full(&MapClass::FiberBound(2), &probe).unwrap();
        assert!(!v.s4a.holds);
        assert_eq!(v.s4a_witness.unwrap().composite_fiber, 4);
        assert_eq!(v.remark_agrees, Some(true));
    }

    #[test]
    fn universal_maps() {
        let r = find_representation(&MapClass::FiberBound(2), &ProbeUniverse::new(3)).unwrap();
        assert_eq!(r.universal.pi.cod().len(), 3);
        assert_eq!(r.universal.pi.dom().len(), 3);
        assert!(r.verified());
        let r = find_representation(&MapClass::All, &ProbeUniverse::new(3)).unwrap();
        assert_eq!(r.universal.pi.cod().len(), 4);
        let only_bijection = MapClass::Explicit(vec![map(&["a", "b"], &["x", "y"], vec![0, 1])]);
        assert!(find_representation(&only_bijection, &ProbeUniverse::new(2)).is_err());
    }

    #[test]
    fn collection_axiom_by_sections() {
        let probe = ProbeUniverse::new(2);
        let v = check_collection_axiom(&MapClass::FiberBound(1), &probe).unwrap();
        assert!(v.holds && v.section_witnesses == v.instances);
        assert_eq!(v.universal_collection_internal, Some(true));
        let v = check_collection_axiom_with(&MapClass::All, &probe, &|_| false).unwrap();
        assert!(!v.holds);
    }

    #[test]
    fn collection_span_construction_counts() {
        let universal = UniversalMap::from_sizes(&[0, 1, 2].into_iter().collect());
        let f = map(&["b"], &["a"], vec![0]);
        let cons = collsp_construct(&f, &MapClass::FiberBound(2), &universal).unwrap();
        assert_eq!(cons.c.len(), 2);
        assert!(cons.verified());
        let empty_fiber = map(&[], &["a"], vec![]);
        let cons = collsp_construct(&empty_fiber, &MapClass::FiberBound(2), &universal).unwrap();
        assert_eq!(cons.c.len(), 1);
        assert!(cons.verified());
    }

    #[test]
    fn cod_small_warning() {
        let c = FinCategory::from_parts(["0".to_string(), "1".to_string()], vec![("u".into(), "0".into(), "1".into())], vec![])
            .unwrap();
        assert!(induce_presheaf_class(&MapClass::FiberBound(2), &c).warning.is_none());
        assert!(induce_presheaf_class(&MapClass::FiberBound(1), &c).warning.is_some());
    }
}

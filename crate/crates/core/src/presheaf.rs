//! Presheaves of finite sets on a finite category.
//!
//! For an arrow `α: D → C`, the restriction of `x ∈ P(C)` is written `x·α`
//! and lives in `P(D)`. Limits, colimits, images and quotients are computed
//! objectwise with [`crate::finset`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::cat::{FinCategory, Violation};
use crate::enumerate::{permutations, Product};
use crate::error::{Error, Result};
use crate::finset::{self, pair_label, FinFunction, FinSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presheaf {
    base: Arc<FinCategory>,
    values: Vec<FinSet>,
    /// Indexed by arrow; the arrow `α: D → C` gives `P(C) → P(D)`.
    restrictions: Vec<FinFunction>,
}

impl Presheaf {
    pub fn new(base: Arc<FinCategory>, values: Vec<FinSet>, restrictions: Vec<FinFunction>) -> Result<Presheaf> {
        if values.len() != base.num_objects() || restrictions.len() != base.num_arrows() {
            return Err(Error::Shape("presheaf needs one value per object and one restriction per arrow".into()));
        }
        for (a, r) in restrictions.iter().enumerate() {
            if *r.dom() != values[base.cod(a)] || *r.cod() != values[base.dom(a)] {
                return Err(Error::Shape(format!("restriction along {} has the wrong type", base.arrow_name(a))));
            }
        }
        Ok(Presheaf { base, values, restrictions })
    }

    pub fn from_tables(base: Arc<FinCategory>, values: Vec<FinSet>, tables: Vec<Vec<usize>>) -> Result<Presheaf> {
        if tables.len() != base.num_arrows() || values.len() != base.num_objects() {
            return Err(Error::Shape("presheaf needs one value per object and one table per arrow".into()));
        }
        let restrictions = tables
            .into_iter()
            .enumerate()
            .map(|(a, t)| FinFunction::new(values[base.cod(a)].clone(), values[base.dom(a)].clone(), t))
            .collect::<Result<Vec<_>>>()?;
        Presheaf::new(base, values, restrictions)
    }

    /// `f(α, x)` is `x·α`.
    pub fn from_fn(base: Arc<FinCategory>, values: Vec<FinSet>, f: impl Fn(usize, usize) -> usize) -> Result<Presheaf> {
        let tables = (0..base.num_arrows()).map(|a| (0..values[base.cod(a)].len()).map(|x| f(a, x)).collect()).collect();
        Presheaf::from_tables(base, values, tables)
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.base
    }

    pub fn value(&self, c: usize) -> &FinSet {
        &self.values[c]
    }

    pub fn values(&self) -> &[FinSet] {
        &self.values
    }

    pub fn restriction(&self, a: usize) -> &FinFunction {
        &self.restrictions[a]
    }

    /// `x·α`.
    pub fn restrict(&self, x: usize, a: usize) -> usize {
        self.restrictions[a].apply(x)
    }

    pub fn total_size(&self) -> usize {
        self.values.iter().map(FinSet::len).sum()
    }

    pub fn max_value(&self) -> usize {
        self.values.iter().map(FinSet::len).max().unwrap_or(0)
    }

    pub fn require_same_base(&self, other: &Presheaf) -> Result<()> {
        if Arc::ptr_eq(&self.base, &other.base) || self.base == other.base {
            Ok(())
        } else {
            Err(Error::Shape("presheaves over different base categories".into()))
        }
    }

    /// Element `x` of `P(c)` by label.
    pub fn element(&self, c: usize, label: &str) -> Result<usize> {
        self.values[c].require(label)
    }
}

/// Builds a presheaf from labels in construction order. `restrict(α, k)` is
/// the construction index of `k·α`. Returns the presheaf and, per object,
/// the canonical index of each construction position.
impl fmt::Display for Presheaf {
    /// Values per object, then the non-identity restrictions.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = &self.base;
        let mut parts: Vec<String> =
            (0..base.num_objects()).map(|c| format!("{}={}", base.object_name(c), self.values[c])).collect();
        for a in (0..base.num_arrows()).filter(|&a| !base.is_identity(a)) {
            let table: Vec<String> = (0..self.value(base.cod(a)).len())
                .map(|x| format!("{}↦{}", self.value(base.cod(a)).label(x), self.value(base.dom(a)).label(self.restrict(x, a))))
                .collect();
            parts.push(format!("{}:[{}]", base.arrow_name(a), table.join(",")));
        }
        write!(f, "{}", parts.join(" "))
    }
}

pub(crate) fn assemble(
    base: &Arc<FinCategory>,
    labels: Vec<Vec<String>>,
    restrict: impl Fn(usize, usize) -> usize,
) -> Result<(Presheaf, Vec<Vec<usize>>)> {
    let mut values = Vec::new();
    let mut pos = Vec::new();
    for l in labels {
        let (set, p) = FinSet::with_positions(l)?;
        values.push(set);
        pos.push(p);
    }
    let mut tables = Vec::new();
    for a in 0..base.num_arrows() {
        let (d, c) = (base.dom(a), base.cod(a));
        let mut t = vec![0; values[c].len()];
        for k in 0..values[c].len() {
            t[pos[c][k]] = pos[d][restrict(a, k)];
        }
        tables.push(t);
    }
    Ok((Presheaf::from_tables(base.clone(), values, tables)?, pos))
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct FunctorialityVerdict {
    pub violations: Vec<Violation>,
}

impl FunctorialityVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_presheaf(p: &Presheaf) -> FunctorialityVerdict {
    let c = &p.base;
    let mut violations = Vec::new();
    for x in 0..c.num_objects() {
        let r = p.restriction(c.identity(x));
        if (0..r.dom().len()).any(|i| r.apply(i) != i) {
            violations.push(Violation {
                law: "identity restriction",
                detail: format!("restriction along {} is not the identity", c.arrow_name(c.identity(x))),
            });
        }
    }
    for g in 0..c.num_arrows() {
        for f in 0..c.num_arrows() {
            if c.cod(f) != c.dom(g) {
                continue;
            }
            let Some(gf) = c.compose(g, f) else { continue };
            for x in 0..p.value(c.cod(g)).len() {
                if p.restrict(x, gf) != p.restrict(p.restrict(x, g), f) {
                    violations.push(Violation {
                        law: "composite restriction",
                        detail: format!(
                            "{}·({} ∘ {}) ≠ ({}·{})·{}",
                            p.value(c.cod(g)).label(x),
                            c.arrow_name(g),
                            c.arrow_name(f),
                            p.value(c.cod(g)).label(x),
                            c.arrow_name(g),
                            c.arrow_name(f)
                        ),
                    });
                }
            }
        }
    }
    FunctorialityVerdict { violations }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafMorphism {
    source: Presheaf,
    target: Presheaf,
    components: Vec<FinFunction>,
}

impl PresheafMorphism {
    pub fn new(source: Presheaf, target: Presheaf, components: Vec<FinFunction>) -> Result<PresheafMorphism> {
        source.require_same_base(&target)?;
        if components.len() != source.values.len() {
            return Err(Error::Shape("one component per object is required".into()));
        }
        for (c, f) in components.iter().enumerate() {
            if *f.dom() != source.values[c] || *f.cod() != target.values[c] {
                return Err(Error::Shape(format!("component at {} has the wrong type", source.base.object_name(c))));
            }
        }
        Ok(PresheafMorphism { source, target, components })
    }

    pub fn from_tables(source: Presheaf, target: Presheaf, tables: Vec<Vec<usize>>) -> Result<PresheafMorphism> {
        if tables.len() != source.values.len() {
            return Err(Error::Shape("one component per object is required".into()));
        }
        let components = tables
            .into_iter()
            .enumerate()
            .map(|(c, t)| FinFunction::new(source.values[c].clone(), target.values[c].clone(), t))
            .collect::<Result<Vec<_>>>()?;
        PresheafMorphism::new(source, target, components)
    }

    pub fn identity(p: &Presheaf) -> PresheafMorphism {
        let components = p.values.iter().map(FinFunction::identity).collect();
        PresheafMorphism { source: p.clone(), target: p.clone(), components }
    }

    pub fn source(&self) -> &Presheaf {
        &self.source
    }

    pub fn target(&self) -> &Presheaf {
        &self.target
    }

    pub fn base(&self) -> &Arc<FinCategory> {
        &self.source.base
    }

    pub fn component(&self, c: usize) -> &FinFunction {
        &self.components[c]
    }

    pub fn components(&self) -> &[FinFunction] {
        &self.components
    }

    pub fn apply(&self, c: usize, x: usize) -> usize {
        self.components[c].apply(x)
    }

    pub fn tables(&self) -> Vec<Vec<usize>> {
        self.components.iter().map(|f| f.table().to_vec()).collect()
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &PresheafMorphism) -> Result<PresheafMorphism> {
        if self.target != after.source {
            return Err(Error::Shape("morphisms are not composable".into()));
        }
        let components =
            self.components.iter().zip(&after.components).map(|(f, g)| f.then(g)).collect::<Result<Vec<_>>>()?;
        PresheafMorphism::new(self.source.clone(), after.target.clone(), components)
    }

    /// Covers of presheaves are the pointwise surjections.
    pub fn is_epi(&self) -> bool {
        self.components.iter().all(FinFunction::is_surjective)
    }

    pub fn is_mono(&self) -> bool {
        self.components.iter().all(FinFunction::is_injective)
    }

    pub fn is_iso(&self) -> bool {
        self.components.iter().all(FinFunction::is_bijective)
    }
}

pub fn validate_morphism(f: &PresheafMorphism) -> FunctorialityVerdict {
    let c = f.base();
    let mut violations = Vec::new();
    for a in 0..c.num_arrows() {
        let (d, e) = (c.dom(a), c.cod(a));
        for x in 0..f.source.value(e).len() {
            if f.apply(d, f.source.restrict(x, a)) != f.target.restrict(f.apply(e, x), a) {
                violations.push(Violation {
                    law: "naturality",
                    detail: format!(
                        "square for {} fails at {}",
                        c.arrow_name(a),
                        f.source.value(e).label(x)
                    ),
                });
            }
        }
    }
    FunctorialityVerdict { violations }
}

/// `y(C)(D) = Hom(D, C)`, restricting by precomposition.
pub fn yoneda(base: &Arc<FinCategory>, c: usize) -> Presheaf {
    let labels: Vec<Vec<String>> = (0..base.num_objects())
        .map(|d| base.hom(d, c).into_iter().map(|h| base.arrow_name(h).to_string()).collect())
        .collect();
    let homs: Vec<Vec<usize>> = (0..base.num_objects()).map(|d| base.hom(d, c)).collect();
    let (p, _) = assemble(base, labels, |a, k| {
        let h = base.comp(homs[base.cod(a)][k], a);
        homs[base.dom(a)].iter().position(|&x| x == h).expect("composite lies in the hom-set")
    })
    .expect("hom-sets have distinct arrow names");
    p
}

/// The presheaf with the same set everywhere and identity restrictions.
pub fn constant(base: &Arc<FinCategory>, set: &FinSet) -> Presheaf {
    let values = vec![set.clone(); base.num_objects()];
    Presheaf::from_fn(base.clone(), values, |_, x| x).expect("constant presheaf")
}

pub fn terminal(base: &Arc<FinCategory>) -> Presheaf {
    constant(base, &FinSet::singleton("*"))
}

pub fn empty(base: &Arc<FinCategory>) -> Presheaf {
    constant(base, &FinSet::empty())
}

pub fn to_terminal(p: &Presheaf) -> PresheafMorphism {
    let t = terminal(&p.base);
    let tables = p.values.iter().map(|v| vec![0; v.len()]).collect();
    PresheafMorphism::from_tables(p.clone(), t, tables).expect("unique map to the terminal")
}

pub fn from_empty(p: &Presheaf) -> PresheafMorphism {
    let e = empty(&p.base);
    PresheafMorphism::from_tables(e, p.clone(), vec![Vec::new(); p.values.len()]).expect("unique map from the empty")
}

/// `P ×_R Q` for `f: P → R`, `g: Q → R`.
#[derive(Clone, Debug)]
pub struct PresheafPullback {
    pub object: Presheaf,
    pub p1: PresheafMorphism,
    pub p2: PresheafMorphism,
    lookup: Vec<HashMap<(usize, usize), usize>>,
}

impl PresheafPullback {
    pub fn index(&self, c: usize, x: usize, y: usize) -> Option<usize> {
        self.lookup[c].get(&(x, y)).copied()
    }

    /// The pairing `⟨u, v⟩: S → P ×_R Q` of a commuting cone.
    pub fn pair(&self, u: &PresheafMorphism, v: &PresheafMorphism) -> Result<PresheafMorphism> {
        let tables = (0..u.components.len())
            .map(|c| {
                (0..u.source.value(c).len())
                    .map(|s| self.index(c, u.apply(c, s), v.apply(c, s)).ok_or(Error::NotCommuting))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PresheafMorphism::from_tables(u.source.clone(), self.object.clone(), tables)
    }
}

pub fn pullback(f: &PresheafMorphism, g: &PresheafMorphism) -> Result<PresheafPullback> {
    f.source.require_same_base(&g.source)?;
    if f.target != g.target {
        return Err(Error::Shape("pullback of morphisms with different codomains".into()));
    }
    let base = f.base().clone();
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut construction: Vec<HashMap<(usize, usize), usize>> = Vec::new();
    for c in 0..base.num_objects() {
        let fibers = g.components[c].fibers();
        let mut v = Vec::new();
        let mut m = HashMap::new();
        for x in 0..f.source.value(c).len() {
            for &y in &fibers[f.apply(c, x)] {
                m.insert((x, y), v.len());
                v.push((x, y));
            }
        }
        pairs.push(v);
        construction.push(m);
    }
    let labels = pairs
        .iter()
        .enumerate()
        .map(|(c, v)| v.iter().map(|&(x, y)| pair_label(f.source.value(c).label(x), g.source.value(c).label(y))).collect())
        .collect();
    let (object, pos) = assemble(&base, labels, |a, k| {
        let (x, y) = pairs[base.cod(a)][k];
        construction[base.dom(a)][&(f.source.restrict(x, a), g.source.restrict(y, a))]
    })?;
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    let mut lookup = Vec::new();
    for c in 0..base.num_objects() {
        let n = pairs[c].len();
        let (mut a, mut b) = (vec![0; n], vec![0; n]);
        let mut m = HashMap::new();
        for (k, &(x, y)) in pairs[c].iter().enumerate() {
            a[pos[c][k]] = x;
            b[pos[c][k]] = y;
            m.insert((x, y), pos[c][k]);
        }
        t1.push(a);
        t2.push(b);
        lookup.push(m);
    }
    Ok(PresheafPullback {
        p1: PresheafMorphism::from_tables(object.clone(), f.source.clone(), t1)?,
        p2: PresheafMorphism::from_tables(object.clone(), g.source.clone(), t2)?,
        object,
        lookup,
    })
}

pub fn product(p: &Presheaf, q: &Presheaf) -> Result<PresheafPullback> {
    p.require_same_base(q)?;
    pullback(&to_terminal(p), &to_terminal(q))
}

pub fn kernel_pair(f: &PresheafMorphism) -> Result<PresheafPullback> {
    pullback(f, f)
}

/// A subpresheaf given by membership flags, with its inclusion.
pub fn subpresheaf(p: &Presheaf, keep: &[Vec<bool>]) -> Result<(Presheaf, PresheafMorphism)> {
    let base = p.base.clone();
    for a in 0..base.num_arrows() {
        for x in 0..p.value(base.cod(a)).len() {
            if keep[base.cod(a)][x] && !keep[base.dom(a)][p.restrict(x, a)] {
                return Err(Error::Precondition("subset is not closed under restriction".into()));
            }
        }
    }
    let members: Vec<Vec<usize>> =
        keep.iter().map(|k| k.iter().enumerate().filter(|e| *e.1).map(|e| e.0).collect()).collect();
    let labels =
        members.iter().enumerate().map(|(c, m)| m.iter().map(|&x| p.value(c).label(x).to_string()).collect()).collect();
    let (object, pos) = assemble(&base, labels, |a, k| {
        let y = p.restrict(members[base.cod(a)][k], a);
        members[base.dom(a)].binary_search(&y).expect("closed subset")
    })?;
    let tables = (0..base.num_objects())
        .map(|c| {
            let mut t = vec![0; members[c].len()];
            for (k, &x) in members[c].iter().enumerate() {
                t[pos[c][k]] = x;
            }
            t
        })
        .collect();
    let inclusion = PresheafMorphism::from_tables(object.clone(), p.clone(), tables)?;
    Ok((object, inclusion))
}

/// Equalizer of a parallel pair, with its inclusion.
pub fn equalizer(f: &PresheafMorphism, g: &PresheafMorphism) -> Result<(Presheaf, PresheafMorphism)> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::Shape("equalizer of a non-parallel pair".into()));
    }
    let keep: Vec<Vec<bool>> = (0..f.components.len())
        .map(|c| (0..f.source.value(c).len()).map(|x| f.apply(c, x) == g.apply(c, x)).collect())
        .collect();
    subpresheaf(&f.source, &keep)
}

#[derive(Clone, Debug)]
pub struct PresheafSum {
    pub object: Presheaf,
    pub inl: PresheafMorphism,
    pub inr: PresheafMorphism,
}

impl PresheafSum {
    /// The copairing `[u, v]: P + Q → R`.
    pub fn copair(&self, u: &PresheafMorphism, v: &PresheafMorphism) -> Result<PresheafMorphism> {
        if u.target != v.target {
            return Err(Error::Shape("copairing needs a common codomain".into()));
        }
        let tables = (0..u.components.len())
            .map(|c| {
                let mut t = vec![0; self.object.value(c).len()];
                for x in 0..u.source.value(c).len() {
                    t[self.inl.apply(c, x)] = u.apply(c, x);
                }
                for y in 0..v.source.value(c).len() {
                    t[self.inr.apply(c, y)] = v.apply(c, y);
                }
                t
            })
            .collect();
        PresheafMorphism::from_tables(self.object.clone(), u.target.clone(), tables)
    }
}

pub fn sum(p: &Presheaf, q: &Presheaf) -> Result<PresheafSum> {
    p.require_same_base(q)?;
    let base = p.base.clone();
    let sums: Vec<finset::Sum> = (0..base.num_objects()).map(|c| finset::sum(p.value(c), q.value(c))).collect();
    let values = sums.iter().map(|s| s.object.clone()).collect();
    let object = Presheaf::from_fn(base.clone(), values, |a, z| {
        let (d, c) = (base.dom(a), base.cod(a));
        let nl = p.value(c).len();
        if z < nl {
            sums[d].inl.apply(p.restrict(z, a))
        } else {
            sums[d].inr.apply(q.restrict(z - nl, a))
        }
    })?;
    let inl = PresheafMorphism::new(p.clone(), object.clone(), sums.iter().map(|s| s.inl.clone()).collect())?;
    let inr = PresheafMorphism::new(q.clone(), object.clone(), sums.iter().map(|s| s.inr.clone()).collect())?;
    Ok(PresheafSum { object, inl, inr })
}

#[derive(Clone, Debug)]
pub struct PresheafImage {
    pub object: Presheaf,
    pub cover: PresheafMorphism,
    pub mono: PresheafMorphism,
}

pub fn image(f: &PresheafMorphism) -> Result<PresheafImage> {
    let keep: Vec<Vec<bool>> = (0..f.components.len())
        .map(|c| {
            let mut k = vec![false; f.target.value(c).len()];
            for &v in f.components[c].table() {
                k[v] = true;
            }
            k
        })
        .collect();
    let (object, mono) = subpresheaf(&f.target, &keep)?;
    let tables = (0..f.components.len())
        .map(|c| {
            let m = mono.component(c).table();
            f.components[c].table().iter().map(|v| m.binary_search(v).expect("value in the image")).collect()
        })
        .collect();
    let cover = PresheafMorphism::from_tables(f.source.clone(), object.clone(), tables)?;
    Ok(PresheafImage { object, cover, mono })
}

#[derive(Clone, Debug)]
pub struct PresheafQuotient {
    pub object: Presheaf,
    pub projection: PresheafMorphism,
}

/// Quotient of an equivalence relation `r1, r2: R ⇉ P`, computed objectwise.
/// Fails unless each component is an equivalence relation and the induced
/// restriction on classes is well defined.
pub fn quotient(r1: &PresheafMorphism, r2: &PresheafMorphism) -> Result<PresheafQuotient> {
    if r1.source != r2.source || r1.target != r2.target {
        return Err(Error::Shape("relation legs must be parallel".into()));
    }
    let p = &r1.target;
    let base = p.base.clone();
    let qs: Vec<finset::Quotient> = (0..base.num_objects())
        .map(|c| finset::quotient(r1.component(c), r2.component(c)))
        .collect::<Result<Vec<_>>>()?;
    let mut tables = Vec::new();
    for a in 0..base.num_arrows() {
        let (d, c) = (base.dom(a), base.cod(a));
        let mut t: Vec<Option<usize>> = vec![None; qs[c].object.len()];
        for x in 0..p.value(c).len() {
            let class = qs[c].projection.apply(x);
            let image = qs[d].projection.apply(p.restrict(x, a));
            if t[class].replace(image).is_some_and(|old| old != image) {
                return Err(Error::Precondition("relation is not stable under restriction".into()));
            }
        }
        tables.push(t.into_iter().map(|v| v.expect("classes are inhabited")).collect());
    }
    let object = Presheaf::from_tables(base, qs.iter().map(|q| q.object.clone()).collect(), tables)?;
    let projection = PresheafMorphism::new(p.clone(), object.clone(), qs.into_iter().map(|q| q.projection).collect())?;
    Ok(PresheafQuotient { object, projection })
}

/// Pushout of `f: P → R` and `g: P → S`, computed objectwise.
pub fn pushout(f: &PresheafMorphism, g: &PresheafMorphism) -> Result<(Presheaf, PresheafMorphism, PresheafMorphism)> {
    if f.source != g.source {
        return Err(Error::Shape("pushout of morphisms with different domains".into()));
    }
    let s = sum(&f.target, &g.target)?;
    let base = f.base().clone();
    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for c in 0..base.num_objects() {
        let pairs: Vec<(usize, usize)> = (0..f.source.value(c).len())
            .map(|x| (s.inl.apply(c, f.apply(c, x)), s.inr.apply(c, g.apply(c, x))))
            .collect();
        let (a, b) = finset::equivalence_closure(s.object.value(c), &pairs)?;
        r1.push(a);
        r2.push(b);
    }
    // The objectwise equivalence closure is stable under restriction because
    // the generating pairs are.
    let (relation, pos) = assemble(
        &base,
        r1.iter().map(|r| r.dom().labels().to_vec()).collect(),
        |a, k| {
            let (d, c) = (base.dom(a), base.cod(a));
            let x = s.object.restrict(r1[c].apply(k), a);
            let y = s.object.restrict(r2[c].apply(k), a);
            (0..r1[d].dom().len()).find(|&j| r1[d].apply(j) == x && r2[d].apply(j) == y).expect("closure is stable")
        },
    )?;
    debug_assert!(pos.iter().all(|p| p.iter().enumerate().all(|(i, &j)| i == j)));
    let leg1 = PresheafMorphism::new(relation.clone(), s.object.clone(), r1)?;
    let leg2 = PresheafMorphism::new(relation, s.object.clone(), r2)?;
    let q = quotient(&leg1, &leg2)?;
    let i1 = s.inl.then(&q.projection)?;
    let i2 = s.inr.then(&q.projection)?;
    Ok((q.object, i1, i2))
}

/// `f` is epi iff the two legs of its cokernel pair agree.
pub fn is_epi_by_cokernel_pair(f: &PresheafMorphism) -> Result<bool> {
    let (_, i1, i2) = pushout(f, f)?;
    Ok(i1 == i2)
}

/// Backtracking enumeration of natural transformations `P → Q`. Assigning
/// `t(x) = y` at `C` forces `t(x·α) = y·α` for every arrow into `C`.
struct NatSearch<'a> {
    p: &'a Presheaf,
    q: &'a Presheaf,
    allowed: Option<&'a dyn Fn(usize, usize, usize) -> bool>,
    into: Vec<Vec<usize>>,
    order: Vec<(usize, usize)>,
    val: Vec<Vec<usize>>,
    trail: Vec<(usize, usize)>,
}

const UNSET: usize = usize::MAX;

impl<'a> NatSearch<'a> {
    fn new(p: &'a Presheaf, q: &'a Presheaf, allowed: Option<&'a dyn Fn(usize, usize, usize) -> bool>) -> Self {
        let base = &p.base;
        let into: Vec<Vec<usize>> = (0..base.num_objects()).map(|c| base.arrows_into(c)).collect();
        let mut objects: Vec<usize> = (0..base.num_objects()).collect();
        objects.sort_by_key(|&c| std::cmp::Reverse(into[c].len()));
        let order = objects.iter().flat_map(|&c| (0..p.value(c).len()).map(move |x| (c, x))).collect();
        let val = p.values.iter().map(|v| vec![UNSET; v.len()]).collect();
        NatSearch { p, q, allowed, into, order, val, trail: Vec::new() }
    }

    fn ok(&self, c: usize, x: usize, y: usize) -> bool {
        self.allowed.is_none_or(|f| f(c, x, y))
    }

    fn assign(&mut self, c: usize, x: usize, y: usize) -> bool {
        for &a in &self.into[c] {
            let d = self.p.base.dom(a);
            let (x2, y2) = (self.p.restrict(x, a), self.q.restrict(y, a));
            match self.val[d][x2] {
                UNSET => {
                    if !self.ok(d, x2, y2) {
                        return false;
                    }
                    self.val[d][x2] = y2;
                    self.trail.push((d, x2));
                }
                v if v != y2 => return false,
                _ => {}
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (d, x) = self.trail.pop().unwrap();
            self.val[d][x] = UNSET;
        }
    }

    fn run(&mut self, k: usize, visit: &mut dyn FnMut(&[Vec<usize>]) -> ControlFlow<()>) -> ControlFlow<()> {
        let Some(&(c, x)) = self.order.get(k) else {
            return visit(&self.val);
        };
        if self.val[c][x] != UNSET {
            return self.run(k + 1, visit);
        }
        for y in 0..self.q.value(c).len() {
            if !self.ok(c, x, y) {
                continue;
            }
            let mark = self.trail.len();
            if self.assign(c, x, y) {
                self.run(k + 1, visit)?;
            }
            self.undo(mark);
        }
        ControlFlow::Continue(())
    }
}

/// Visits the component tables of every natural transformation `P → Q`
/// whose values satisfy `allowed(c, x, y)`.
pub fn for_each_nat(
    p: &Presheaf,
    q: &Presheaf,
    allowed: Option<&dyn Fn(usize, usize, usize) -> bool>,
    mut visit: impl FnMut(&[Vec<usize>]) -> ControlFlow<()>,
) -> Result<()> {
    p.require_same_base(q)?;
    let mut search = NatSearch::new(p, q, allowed);
    let _ = search.run(0, &mut visit);
    Ok(())
}

pub fn nat_tables(p: &Presheaf, q: &Presheaf, budget: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    let mut out = Vec::new();
    let mut over = false;
    for_each_nat(p, q, None, |t| {
        if out.len() >= budget {
            over = true;
            return ControlFlow::Break(());
        }
        out.push(t.to_vec());
        ControlFlow::Continue(())
    })?;
    if over {
        return Err(Error::Budget(budget));
    }
    Ok(out)
}

pub fn nat_transformations(p: &Presheaf, q: &Presheaf, budget: usize) -> Result<Vec<PresheafMorphism>> {
    nat_tables(p, q, budget)?
        .into_iter()
        .map(|t| PresheafMorphism::from_tables(p.clone(), q.clone(), t))
        .collect()
}

pub fn count_nat(p: &Presheaf, q: &Presheaf) -> Result<usize> {
    let mut n = 0;
    for_each_nat(p, q, None, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// Morphisms `X → Y` over a common base: `over_y ∘ t = over_x`.
pub fn count_nat_over(x: &PresheafMorphism, y: &PresheafMorphism) -> Result<usize> {
    let allowed = |c: usize, e: usize, v: usize| y.apply(c, v) == x.apply(c, e);
    let mut n = 0;
    for_each_nat(&x.source, &y.source, Some(&allowed), |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// An isomorphism `P → Q`, if one exists.
pub fn find_isomorphism(p: &Presheaf, q: &Presheaf) -> Result<Option<PresheafMorphism>> {
    p.require_same_base(q)?;
    if p.values.iter().zip(&q.values).any(|(a, b)| a.len() != b.len()) {
        return Ok(None);
    }
    let mut found = None;
    for_each_nat(p, q, None, |t| {
        if t.iter().all(|c| c.iter().collect::<HashSet<_>>().len() == c.len()) {
            found = Some(t.to_vec());
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    found.map(|t| PresheafMorphism::from_tables(p.clone(), q.clone(), t)).transpose()
}

fn nat_label(p: &Presheaf, q: &Presheaf, t: &[Vec<usize>]) -> String {
    let mut parts = Vec::new();
    for (c, comp) in t.iter().enumerate() {
        for (x, &y) in comp.iter().enumerate() {
            parts.push(format!("{}>{}", p.value(c).label(x), q.value(c).label(y)));
        }
    }
    format!("{{{}}}", parts.join(";"))
}

/// `Q^P` with its evaluation map `Q^P × P → Q`.
#[derive(Clone, Debug)]
pub struct Exponential {
    pub object: Presheaf,
    pub product: PresheafPullback,
    pub evaluation: PresheafMorphism,
}

pub fn exponential(p: &Presheaf, q: &Presheaf) -> Result<Exponential> {
    p.require_same_base(q)?;
    let base = p.base.clone();
    let n = base.num_objects();
    let ys: Vec<Presheaf> = (0..n).map(|c| yoneda(&base, c)).collect();
    let yps: Vec<PresheafPullback> = ys.iter().map(|y| product(y, p)).collect::<Result<Vec<_>>>()?;
    let mut nats: Vec<Vec<Vec<Vec<usize>>>> = Vec::new();
    let mut lookup: Vec<HashMap<Vec<Vec<usize>>, usize>> = Vec::new();
    let mut labels = Vec::new();
    for c in 0..n {
        let ts = nat_tables(&yps[c].object, q, usize::MAX)?;
        lookup.push(ts.iter().enumerate().map(|(k, t)| (t.clone(), k)).collect());
        labels.push(ts.iter().map(|t| nat_label(&yps[c].object, q, t)).collect());
        nats.push(ts);
    }
    // (τ·α)_D(h, x) = τ_D(α ∘ h, x) for α: C' → C.
    let (object, pos) = assemble(&base, labels, |a, k| {
        let (c2, c) = (base.dom(a), base.cod(a));
        let tau = &nats[c][k];
        let restricted: Vec<Vec<usize>> = (0..n)
            .map(|d| {
                (0..yps[c2].object.value(d).len())
                    .map(|e| {
                        let h = yps[c2].p1.apply(d, e);
                        let x = yps[c2].p2.apply(d, e);
                        let h_arrow = base.arrow_index(ys[c2].value(d).label(h)).unwrap();
                        let ah = base.comp(a, h_arrow);
                        let ah_idx = ys[c].value(d).index_of(base.arrow_name(ah)).unwrap();
                        tau[d][yps[c].index(d, ah_idx, x).unwrap()]
                    })
                    .collect()
            })
            .collect();
        lookup[c2][&restricted]
    })?;
    let product = product(&object, p)?;
    let mut tables = Vec::new();
    for c in 0..n {
        let inverse: HashMap<usize, usize> = pos[c].iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let id_idx = ys[c].value(c).index_of(base.arrow_name(base.identity(c))).unwrap();
        tables.push(
            (0..product.object.value(c).len())
                .map(|e| {
                    let tau = &nats[c][inverse[&product.p1.apply(c, e)]];
                    let x = product.p2.apply(c, e);
                    tau[c][yps[c].index(c, id_idx, x).unwrap()]
                })
                .collect(),
        );
    }
    let evaluation = PresheafMorphism::from_tables(product.object.clone(), q.clone(), tables)?;
    Ok(Exponential { object, product, evaluation })
}

/// `B_a(D) = {(β: D → C, b ∈ B(D)) | f(b) = a·β}` for `a ∈ A(C)` and `f: B → A`.
#[derive(Clone, Debug)]
pub struct FiberPresheaf {
    pub object: Presheaf,
    pub root: usize,
    pub point: usize,
    /// Per object, the pair `(β, b)` of each element in canonical order.
    pub elements: Vec<Vec<(usize, usize)>>,
    /// Projection `(β, b) ↦ b` onto the domain of `f`.
    pub to_source: PresheafMorphism,
    /// Projection `(β, b) ↦ β` onto `y(C)`.
    pub to_yoneda: PresheafMorphism,
    lookup: HashMap<(usize, usize), usize>,
}

impl FiberPresheaf {
    /// Index of `(β, b)` in `B_a(dom β)`.
    pub fn index(&self, beta: usize, b: usize) -> Option<usize> {
        self.lookup.get(&(beta, b)).copied()
    }
}

pub fn fiber_presheaf(f: &PresheafMorphism, c: usize, a: usize) -> Result<FiberPresheaf> {
    let base = f.base().clone();
    let (bp, ap) = (&f.source, &f.target);
    if a >= ap.value(c).len() {
        return Err(Error::UnknownElement(format!("element {a} at {}", base.object_name(c))));
    }
    let pairs: Vec<Vec<(usize, usize)>> = (0..base.num_objects())
        .map(|d| {
            let mut v = Vec::new();
            for beta in base.hom(d, c) {
                let target = ap.restrict(a, beta);
                for b in 0..bp.value(d).len() {
                    if f.apply(d, b) == target {
                        v.push((beta, b));
                    }
                }
            }
            v
        })
        .collect();
    let construction: Vec<HashMap<(usize, usize), usize>> =
        pairs.iter().map(|v| v.iter().enumerate().map(|(k, &e)| (e, k)).collect()).collect();
    let labels = pairs
        .iter()
        .enumerate()
        .map(|(d, v)| v.iter().map(|&(beta, b)| pair_label(base.arrow_name(beta), bp.value(d).label(b))).collect())
        .collect();
    // (β, b)·δ = (β ∘ δ, b·δ).
    let (object, pos) = assemble(&base, labels, |delta, k| {
        let (beta, b) = pairs[base.cod(delta)][k];
        construction[base.dom(delta)][&(base.comp(beta, delta), bp.restrict(b, delta))]
    })?;
    let y = yoneda(&base, c);
    let mut elements = Vec::new();
    let mut lookup = HashMap::new();
    let mut to_b = Vec::new();
    let mut to_y = Vec::new();
    for d in 0..base.num_objects() {
        let mut e = vec![(0, 0); pairs[d].len()];
        for (k, &pair) in pairs[d].iter().enumerate() {
            e[pos[d][k]] = pair;
            lookup.insert(pair, pos[d][k]);
        }
        to_b.push(e.iter().map(|&(_, b)| b).collect());
        to_y.push(e.iter().map(|&(beta, _)| y.value(d).index_of(base.arrow_name(beta)).unwrap()).collect());
        elements.push(e);
    }
    Ok(FiberPresheaf {
        to_source: PresheafMorphism::from_tables(object.clone(), bp.clone(), to_b)?,
        to_yoneda: PresheafMorphism::from_tables(object.clone(), y, to_y)?,
        object,
        root: c,
        point: a,
        elements,
        lookup,
    })
}

/// `Π_f(X) → A` for `f: B → A` and `x: X → B`: at `C`, pairs `(a, s)` with
/// `s: B_a → X` natural and a section of `x` over the projection `B_a → B`.
#[derive(Clone, Debug)]
pub struct PiPresheaf {
    pub object: Presheaf,
    pub projection: PresheafMorphism,
}

pub fn pi_presheaf(f: &PresheafMorphism, x: &PresheafMorphism) -> Result<PiPresheaf> {
    if x.target != f.source {
        return Err(Error::Shape("the family must live over the domain of f".into()));
    }
    let base = f.base().clone();
    let a_p = &f.target;
    let xp = &x.source;
    let mut fibers: Vec<Vec<FiberPresheaf>> = Vec::new();
    let mut entries: Vec<Vec<(usize, Vec<Vec<usize>>)>> = Vec::new();
    let mut lookup: Vec<HashMap<(usize, Vec<Vec<usize>>), usize>> = Vec::new();
    let mut labels = Vec::new();
    for c in 0..base.num_objects() {
        let mut fs = Vec::new();
        let mut es = Vec::new();
        let mut ls = Vec::new();
        for a in 0..a_p.value(c).len() {
            let fib = fiber_presheaf(f, c, a)?;
            let allowed = |d: usize, e: usize, v: usize| x.apply(d, v) == fib.elements[d][e].1;
            let mut sections = Vec::new();
            for_each_nat(&fib.object, xp, Some(&allowed), |t| {
                sections.push(t.to_vec());
                ControlFlow::Continue(())
            })?;
            for s in sections {
                ls.push(format!("{}{}", a_p.value(c).label(a), nat_label(&fib.object, xp, &s)));
                es.push((a, s));
            }
            fs.push(fib);
        }
        lookup.push(es.iter().enumerate().map(|(k, e)| (e.clone(), k)).collect());
        fibers.push(fs);
        entries.push(es);
        labels.push(ls);
    }
    // (a, s)·α = (a·α, α*s) with α*s(β, b) = s(α ∘ β, b).
    let (object, pos) = assemble(&base, labels, |alpha, k| {
        let (c2, c) = (base.dom(alpha), base.cod(alpha));
        let (a, s) = &entries[c][k];
        let a2 = a_p.restrict(*a, alpha);
        let fib2 = &fibers[c2][a2];
        let fib = &fibers[c][*a];
        let s2: Vec<Vec<usize>> = (0..base.num_objects())
            .map(|d| {
                fib2.elements[d].iter().map(|&(beta, b)| s[d][fib.index(base.comp(alpha, beta), b).unwrap()]).collect()
            })
            .collect();
        lookup[c2][&(a2, s2)]
    })?;
    let tables = (0..base.num_objects())
        .map(|c| {
            let mut t = vec![0; entries[c].len()];
            for (k, (a, _)) in entries[c].iter().enumerate() {
                t[pos[c][k]] = *a;
            }
            t
        })
        .collect();
    let projection = PresheafMorphism::from_tables(object.clone(), a_p.clone(), tables)?;
    Ok(PiPresheaf { object, projection })
}

/// `|P| = {(x, C) | x ∈ P(C)}` with its projection to the objects.
#[derive(Clone, Debug)]
pub struct UnderlyingSet {
    pub set: FinSet,
    pub root: FinFunction,
    /// `(C, x)` of each element in canonical order.
    pub elements: Vec<(usize, usize)>,
    lookup: HashMap<(usize, usize), usize>,
}

impl UnderlyingSet {
    pub fn index(&self, c: usize, x: usize) -> usize {
        self.lookup[&(c, x)]
    }
}

pub fn element_label(x: &str, c: &str) -> String {
    format!("{x}@{c}")
}

pub fn underlying(p: &Presheaf) -> UnderlyingSet {
    let base = &p.base;
    let raw: Vec<(usize, usize)> =
        (0..base.num_objects()).flat_map(|c| (0..p.value(c).len()).map(move |x| (c, x))).collect();
    let labels = raw.iter().map(|&(c, x)| element_label(p.value(c).label(x), base.object_name(c))).collect();
    let (set, pos) = FinSet::with_positions(labels).expect("object names separate the summands");
    let mut elements = vec![(0, 0); raw.len()];
    let mut lookup = HashMap::new();
    for (k, &e) in raw.iter().enumerate() {
        elements[pos[k]] = e;
        lookup.insert(e, pos[k]);
    }
    let root = FinFunction::from_fn(set.clone(), base.objects().clone(), |i| elements[i].0).unwrap();
    UnderlyingSet { set, root, elements, lookup }
}

/// `|f|: |P| → |Q|` over the objects.
pub fn underlying_map(f: &PresheafMorphism) -> Result<FinFunction> {
    let (us, ut) = (underlying(&f.source), underlying(&f.target));
    FinFunction::from_fn(us.set.clone(), ut.set.clone(), |i| {
        let (c, x) = us.elements[i];
        ut.index(c, f.apply(c, x))
    })
}

fn canonical_code(base: &FinCategory, sizes: &[usize], tables: &[Vec<usize>], perms: &[&Vec<usize>]) -> Vec<usize> {
    let mut code = Vec::new();
    for (a, t) in tables.iter().enumerate() {
        let (d, c) = (base.dom(a), base.cod(a));
        let mut u = vec![0; sizes[c]];
        for (x, &y) in t.iter().enumerate() {
            u[perms[c][x]] = perms[d][y];
        }
        code.extend(u);
    }
    code
}

/// Every presheaf on `base` with values of size at most `max_value`, one
/// per isomorphism class. Elements are labelled `0, 1, ...`.
pub fn all_presheaves(base: &Arc<FinCategory>, max_value: usize, budget: usize) -> Result<Vec<Presheaf>> {
    let n = base.num_objects();
    let non_identity: Vec<usize> = (0..base.num_arrows()).filter(|&a| !base.is_identity(a)).collect();
    let perms: Vec<Vec<Vec<usize>>> = (0..=max_value).map(permutations).collect();
    let mut seen: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
    let mut out = Vec::new();
    let mut work = 0usize;
    for sizes in Product::new(vec![max_value + 1; n]) {
        let radices: Vec<usize> = non_identity
            .iter()
            .map(|&a| sizes[base.dom(a)].pow(sizes[base.cod(a)] as u32))
            .collect();
        if radices.contains(&0) {
            continue;
        }
        for choice in Product::new(radices) {
            work += 1;
            if work > budget {
                return Err(Error::Budget(budget));
            }
            let mut tables: Vec<Vec<usize>> = (0..base.num_arrows()).map(|a| (0..sizes[base.cod(a)]).collect()).collect();
            for (k, &a) in non_identity.iter().enumerate() {
                let (m, mut code) = (sizes[base.dom(a)], choice[k]);
                for slot in tables[a].iter_mut() {
                    *slot = code % m;
                    code /= m;
                }
            }
            let functorial = base.composition_triples().into_iter().all(|(g, f, gf)| {
                (0..sizes[base.cod(g)]).all(|x| tables[gf][x] == tables[f][tables[g][x]])
            });
            if !functorial {
                continue;
            }
            let mut best: Option<Vec<usize>> = None;
            for combo in Product::new(sizes.iter().map(|&s| perms[s].len()).collect()) {
                let chosen: Vec<&Vec<usize>> = combo.iter().enumerate().map(|(c, &i)| &perms[sizes[c]][i]).collect();
                let code = canonical_code(base, &sizes, &tables, &chosen);
                if best.as_ref().is_none_or(|b| code < *b) {
                    best = Some(code);
                }
            }
            if seen.insert((sizes.clone(), best.unwrap())) {
                let values = sizes.iter().map(|&s| FinSet::numbered("", s)).collect();
                out.push(Presheaf::from_tables(base.clone(), values, tables)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn sierpinski() -> Arc<FinCategory> {
        Arc::new(FinCategory::from_parts([s("0"), s("1")], vec![(s("u"), s("0"), s("1"))], vec![]).unwrap())
    }

    fn chain3() -> Arc<FinCategory> {
        Arc::new(
            FinCategory::from_parts(
                [s("0"), s("1"), s("2")],
                vec![(s("u"), s("0"), s("1")), (s("v"), s("1"), s("2")), (s("w"), s("0"), s("2"))],
                vec![(s("v"), s("u"), s("w"))],
            )
            .unwrap(),
        )
    }

    fn two() -> FinSet {
        FinSet::new(["p", "q"]).unwrap()
    }

    #[test]
    fn constant_presheaf_is_valid() {
        assert!(validate_presheaf(&constant(&chain3(), &two())).is_valid());
    }

    #[test]
    fn broken_composite_restriction_is_named() {
        let c = chain3();
        let values = vec![two(), two(), two()];
        let u = c.arrow_index("u").unwrap();
        // Swap along u only: then x·w = x but (x·v)·u is swapped.
        let p = Presheaf::from_fn(c.clone(), values, |a, x| if a == u { 1 - x } else { x }).unwrap();
        let verdict = validate_presheaf(&p);
        assert!(verdict.violations.iter().any(|v| v.law == "composite restriction" && v.detail.contains("v ∘ u")));
    }

    #[test]
    fn yoneda_values_and_validity() {
        let c = sierpinski();
        let y1 = yoneda(&c, 1);
        assert_eq!(y1.value(0).labels(), ["u"]);
        assert_eq!(y1.value(1).labels(), ["id_1"]);
        assert!(validate_presheaf(&y1).is_valid());
        assert!(validate_presheaf(&yoneda(&chain3(), 2)).is_valid());
        let one = Arc::new(FinCategory::terminal("*"));
        assert!(find_isomorphism(&yoneda(&one, 0), &terminal(&one)).unwrap().is_some());
    }

    #[test]
    fn product_with_terminal_and_sum_counts() {
        let c = sierpinski();
        let y1 = yoneda(&c, 1);
        let y0 = yoneda(&c, 0);
        let pt = product(&y1, &terminal(&c)).unwrap();
        assert!(find_isomorphism(&pt.object, &y1).unwrap().is_some());
        let s = sum(&y0, &y1).unwrap();
        assert!(validate_presheaf(&s.object).is_valid());
        for d in 0..2 {
            assert_eq!(s.object.value(d).len(), y0.value(d).len() + y1.value(d).len());
        }
    }

    #[test]
    fn quotient_of_diagonal_is_identity() {
        let c = chain3();
        let p = yoneda(&c, 2);
        let id = PresheafMorphism::identity(&p);
        let q = quotient(&id, &id).unwrap();
        assert!(q.projection.is_iso());
    }

    #[test]
    fn exponential_examples() {
        let c = sierpinski();
        let q = constant(&c, &two());
        let qt = exponential(&terminal(&c), &q).unwrap();
        assert!(find_isomorphism(&qt.object, &q).unwrap().is_some());
        let q0 = exponential(&empty(&c), &q).unwrap();
        assert!(find_isomorphism(&q0.object, &terminal(&c)).unwrap().is_some());
        // Constant 2-element sets over 0 → 1: a natural map y(C) × P → Q is
        // determined by its value at the top of y(C).
        let e = exponential(&q, &q).unwrap();
        assert_eq!(e.object.value(0).len(), 4);
        assert_eq!(e.object.value(1).len(), count_nat(&product(&yoneda(&c, 1), &q).unwrap().object, &q).unwrap());
        assert!(validate_presheaf(&e.object).is_valid());
        assert!(validate_morphism(&e.evaluation).is_valid());
    }

    #[test]
    fn exponential_currying_counts() {
        let c = sierpinski();
        let ps = all_presheaves(&c, 2, 100_000).unwrap();
        for p in ps.iter().take(6) {
            for q in ps.iter().take(6) {
                let e = exponential(p, q).unwrap();
                for r in ps.iter().take(5) {
                    let lhs = count_nat(&product(r, p).unwrap().object, q).unwrap();
                    let rhs = count_nat(r, &e.object).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn currying_is_a_bijection() {
        let c = sierpinski();
        let p = yoneda(&c, 1);
        let q = constant(&c, &two());
        let r = yoneda(&c, 1);
        let e = exponential(&p, &q).unwrap();
        let mut uncurried = HashSet::new();
        for phi in nat_transformations(&r, &e.object, 1000).unwrap() {
            let rp = product(&r, &p).unwrap();
            let lift = e.product.pair(&rp.p1.then(&phi).unwrap(), &rp.p2).unwrap();
            uncurried.insert(lift.then(&e.evaluation).unwrap().tables());
        }
        let all = nat_tables(&product(&r, &p).unwrap().object, &q, 1000).unwrap();
        assert_eq!(uncurried.len(), all.len());
    }

    #[test]
    fn pi_adjunction_counts() {
        let c = sierpinski();
        let ps = all_presheaves(&c, 2, 100_000).unwrap();
        let mut checked = 0;
        for b in ps.iter().take(5) {
            for a in ps.iter().take(5) {
                for f in nat_transformations(b, a, 100).unwrap().into_iter().take(3) {
                    for xo in ps.iter().take(4) {
                        for x in nat_transformations(xo, b, 100).unwrap().into_iter().take(2) {
                            let pi = pi_presheaf(&f, &x).unwrap();
                            assert!(validate_presheaf(&pi.object).is_valid());
                            for yo in ps.iter().take(4) {
                                for y in nat_transformations(yo, a, 100).unwrap().into_iter().take(2) {
                                    let pb = pullback(&f, &y).unwrap();
                                    let lhs = count_nat_over(&pb.p1, &x).unwrap();
                                    let rhs = count_nat_over(&y, &pi.projection).unwrap();
                                    assert_eq!(lhs, rhs);
                                    checked += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn fiber_of_identity_is_representable() {
        let c = sierpinski();
        let a = constant(&c, &two());
        let f = PresheafMorphism::identity(&a);
        let fib = fiber_presheaf(&f, 1, 0).unwrap();
        assert!(fib.to_yoneda.is_iso());
        assert!(validate_presheaf(&fib.object).is_valid());
    }

    #[test]
    fn underlying_sets() {
        let c = sierpinski();
        let t = underlying(&terminal(&c));
        assert!(t.root.is_bijective());
        assert_eq!(underlying(&yoneda(&c, 1)).set.len(), 2);
        assert_eq!(underlying(&empty(&c)).set.len(), 0);
        assert_eq!(underlying(&yoneda(&c, 1)).set.labels(), ["id_1@1", "u@0"]);
    }

    #[test]
    fn presheaf_enumeration_counts() {
        // Presheaves on 0 → 1 with values ≤ 1: sizes (0,0), (1,1), (1,0)
        // carry one restriction each; (0,1) has none.
        let c = sierpinski();
        assert_eq!(all_presheaves(&c, 1, 1000).unwrap().len(), 3);
        let one = Arc::new(FinCategory::terminal("*"));
        assert_eq!(all_presheaves(&one, 3, 1000).unwrap().len(), 4);
    }

    fn presheaf_pair() -> impl Strategy<Value = (usize, usize, usize)> {
        (0usize..64, 0usize..64, 0usize..16)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn covers_are_pointwise_surjections((i, j, k) in presheaf_pair()) {
            let c = chain3();
            let ps = all_presheaves(&c, 2, 1_000_000).unwrap();
            let (p, q) = (&ps[i % ps.len()], &ps[j % ps.len()]);
            let maps = nat_transformations(p, q, 10_000).unwrap();
            if !maps.is_empty() {
                let f = &maps[k % maps.len()];
                prop_assert!(validate_morphism(f).is_valid());
                prop_assert_eq!(f.is_epi(), is_epi_by_cokernel_pair(f).unwrap());
                let im = image(f).unwrap();
                prop_assert!(im.cover.is_epi() && im.mono.is_mono());
                prop_assert_eq!(im.cover.then(&im.mono).unwrap(), f.clone());
            }
        }

        #[test]
        fn pullback_is_universal((i, j, k) in presheaf_pair()) {
            let c = sierpinski();
            let ps = all_presheaves(&c, 2, 1_000_000).unwrap();
            let (p, r) = (&ps[i % ps.len()], &ps[j % ps.len()]);
            let maps = nat_transformations(p, r, 10_000).unwrap();
            if !maps.is_empty() {
                let f = &maps[k % maps.len()];
                let kp = kernel_pair(f).unwrap();
                prop_assert!(validate_presheaf(&kp.object).is_valid());
                // Cones from a test object match maps into the pullback.
                for t in ps.iter().take(4) {
                    let mut cones = 0;
                    for u in nat_transformations(t, p, 10_000).unwrap() {
                        for v in nat_transformations(t, p, 10_000).unwrap() {
                            if u.then(f).unwrap() == v.then(f).unwrap() {
                                cones += 1;
                            }
                        }
                    }
                    prop_assert_eq!(cones, count_nat(t, &kp.object).unwrap());
                }
            }
        }

        #[test]
        fn sums_are_universal((i, j, k) in presheaf_pair()) {
            let c = sierpinski();
            let ps = all_presheaves(&c, 2, 1_000_000).unwrap();
            let (p, q, r) = (&ps[i % ps.len()], &ps[j % ps.len()], &ps[k % ps.len()]);
            let s = sum(p, q).unwrap();
            prop_assert_eq!(
                count_nat(&s.object, r).unwrap(),
                count_nat(p, r).unwrap() * count_nat(q, r).unwrap()
            );
        }
    }
}

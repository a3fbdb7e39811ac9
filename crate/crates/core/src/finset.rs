//! Finite sets and functions: the ambient ΠW-pretopos at desk scale.
//!
//! Elements carry string labels. A [`FinSet`] keeps its labels sorted, so the
//! index of an element is its position in lexicographic order and every
//! composite construction (pairs, classes, sections, trees) gets a canonical,
//! reproducible labelling.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::enumerate::Product;
use crate::error::{Error, Result};

/// A finite set of distinct labels in canonical (lexicographic) order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSet {
    labels: Arc<[String]>,
}

impl FinSet {
    pub fn new<I, S>(labels: I) -> Result<FinSet>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        Ok(FinSet::with_positions(labels)?.0)
    }

    /// Builds a set from labels given in construction order and returns, for
    /// each input position, the index of that label in the canonical order.
    pub fn with_positions(labels: Vec<String>) -> Result<(FinSet, Vec<usize>)> {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&i, &j| labels[i].cmp(&labels[j]));
        for w in order.windows(2) {
            if labels[w[0]] == labels[w[1]] {
                return Err(Error::DuplicateLabel(labels[w[0]].clone()));
            }
        }
        let mut positions = vec![0; labels.len()];
        for (sorted, &orig) in order.iter().enumerate() {
            positions[orig] = sorted;
        }
        let sorted: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        Ok((FinSet { labels: sorted.into() }, positions))
    }

    pub fn empty() -> FinSet {
        FinSet { labels: Vec::new().into() }
    }

    pub fn singleton(label: impl Into<String>) -> FinSet {
        FinSet { labels: vec![label.into()].into() }
    }

    /// `{prefix0, prefix1, ...}` with `n` elements.
    pub fn numbered(prefix: &str, n: usize) -> FinSet {
        FinSet::new((0..n).map(|i| format!("{prefix}{i}"))).expect("numbered labels are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label).ok_or_else(|| Error::UnknownElement(label.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.labels.iter()).finish()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

impl Serialize for FinSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels.serialize(s)
    }
}

/// A total function between finite sets, stored as an index table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinFunction {
    dom: FinSet,
    cod: FinSet,
    table: Vec<usize>,
}

impl FinFunction {
    pub fn new(dom: FinSet, cod: FinSet, table: Vec<usize>) -> Result<FinFunction> {
        if table.len() != dom.len() {
            return Err(Error::Shape(format!(
                "table has {} entries for a domain of {} elements",
                table.len(),
                dom.len()
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= cod.len()) {
            return Err(Error::Shape(format!("value index {bad} outside a codomain of {}", cod.len())));
        }
        Ok(FinFunction { dom, cod, table })
    }

    pub fn from_fn(dom: FinSet, cod: FinSet, f: impl Fn(usize) -> usize) -> Result<FinFunction> {
        let table = (0..dom.len()).map(f).collect();
        FinFunction::new(dom, cod, table)
    }

    /// Builds a function from `(argument, value)` label pairs.
    pub fn from_pairs<'a>(
        dom: FinSet,
        cod: FinSet,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<FinFunction> {
        let mut table = vec![None; dom.len()];
        for (x, y) in pairs {
            let i = dom.require(x)?;
            let j = cod.require(y)?;
            if table[i].replace(j).is_some_and(|old| old != j) {
                return Err(Error::Shape(format!("`{x}` is assigned twice")));
            }
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::Shape(format!("no value for `{}`", dom.label(i)))))
            .collect::<Result<Vec<_>>>()?;
        FinFunction::new(dom, cod, table)
    }

    pub fn identity(set: &FinSet) -> FinFunction {
        FinFunction { dom: set.clone(), cod: set.clone(), table: (0..set.len()).collect() }
    }

    /// The unique map into a one-element set.
    pub fn to_terminal(set: &FinSet) -> FinFunction {
        FinFunction { dom: set.clone(), cod: FinSet::singleton("*"), table: vec![0; set.len()] }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply_label(&self, x: &str) -> Option<&str> {
        self.dom.index_of(x).map(|i| self.cod.label(self.table[i]))
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &FinFunction) -> Result<FinFunction> {
        if self.cod != after.dom {
            return Err(Error::Shape("composite of non-composable functions".into()));
        }
        Ok(FinFunction {
            dom: self.dom.clone(),
            cod: after.cod.clone(),
            table: self.table.iter().map(|&i| after.table[i]).collect(),
        })
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fibers = vec![Vec::new(); self.cod.len()];
        for (i, &v) in self.table.iter().enumerate() {
            fibers[v].push(i);
        }
        fibers
    }

    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cod.len()];
        for &v in &self.table {
            sizes[v] += 1;
        }
        sizes
    }

    pub fn max_fiber(&self) -> usize {
        self.fiber_sizes().into_iter().max().unwrap_or(0)
    }

    pub fn is_injective(&self) -> bool {
        self.fiber_sizes().into_iter().all(|n| n <= 1)
    }

    pub fn is_surjective(&self) -> bool {
        self.fiber_sizes().into_iter().all(|n| n >= 1)
    }

    pub fn is_bijective(&self) -> bool {
        self.fiber_sizes().into_iter().all(|n| n == 1)
    }
}

impl fmt::Debug for FinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FinFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .table
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{}↦{}", self.dom.label(i), self.cod.label(v)))
            .collect();
        write!(f, "[{}] : {} → {}", parts.join(", "), self.dom, self.cod)
    }
}

impl Serialize for FinFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.table.len()))?;
        for (i, &v) in self.table.iter().enumerate() {
            map.serialize_entry(self.dom.label(i), self.cod.label(v))?;
        }
        map.end()
    }
}

pub fn pair_label(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// A square
///
/// ```text
///   D --top--> B
///   |          |
///  left      right
///   v          v
///   C -bottom-> A
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Square {
    pub top: FinFunction,
    pub left: FinFunction,
    pub right: FinFunction,
    pub bottom: FinFunction,
}

impl Square {
    pub fn new(top: FinFunction, left: FinFunction, right: FinFunction, bottom: FinFunction) -> Result<Square> {
        if top.dom != left.dom || top.cod != right.dom || left.cod != bottom.dom || right.cod != bottom.cod {
            return Err(Error::Shape("square boundaries do not match".into()));
        }
        Ok(Square { top, left, right, bottom })
    }

    pub fn commutes(&self) -> bool {
        (0..self.top.dom.len())
            .all(|d| self.right.apply(self.top.apply(d)) == self.bottom.apply(self.left.apply(d)))
    }

    /// The comparison map `D → B ×_A C`.
    pub fn comparison(&self) -> Result<FinFunction> {
        if !self.commutes() {
            return Err(Error::NotCommuting);
        }
        let pb = pullback(&self.right, &self.bottom)?;
        FinFunction::from_fn(self.top.dom.clone(), pb.object.clone(), |d| {
            pb.index(self.top.apply(d), self.left.apply(d)).expect("commuting square lands in the pullback")
        })
    }
}

/// `B ×_A C` for `f: B → A`, `g: C → A`.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub object: FinSet,
    /// Projection onto the domain of `f`.
    pub p1: FinFunction,
    /// Projection onto the domain of `g`.
    pub p2: FinFunction,
    lookup: HashMap<(usize, usize), usize>,
}

impl Pullback {
    pub fn index(&self, b: usize, c: usize) -> Option<usize> {
        self.lookup.get(&(b, c)).copied()
    }
}

pub fn pullback(f: &FinFunction, g: &FinFunction) -> Result<Pullback> {
    if f.cod != g.cod {
        return Err(Error::Shape("pullback of maps with different codomains".into()));
    }
    let g_fibers = g.fibers();
    let mut pairs = Vec::new();
    for b in 0..f.dom.len() {
        for &c in &g_fibers[f.apply(b)] {
            pairs.push((b, c));
        }
    }
    let labels = pairs.iter().map(|&(b, c)| pair_label(f.dom.label(b), g.dom.label(c))).collect();
    let (object, pos) = FinSet::with_positions(labels)?;
    let mut t1 = vec![0; pairs.len()];
    let mut t2 = vec![0; pairs.len()];
    let mut lookup = HashMap::new();
    for (k, &(b, c)) in pairs.iter().enumerate() {
        t1[pos[k]] = b;
        t2[pos[k]] = c;
        lookup.insert((b, c), pos[k]);
    }
    Ok(Pullback {
        p1: FinFunction::new(object.clone(), f.dom.clone(), t1)?,
        p2: FinFunction::new(object.clone(), g.dom.clone(), t2)?,
        object,
        lookup,
    })
}

/// Image factorization `f = mono ∘ cover`.
#[derive(Clone, Debug)]
pub struct Image {
    pub object: FinSet,
    pub cover: FinFunction,
    pub mono: FinFunction,
}

pub fn image_factorization(f: &FinFunction) -> Image {
    let hit: BTreeSet<usize> = f.table.iter().copied().collect();
    let range: Vec<usize> = hit.into_iter().collect();
    let object = FinSet::new(range.iter().map(|&i| f.cod.label(i).to_string())).expect("subset of a set");
    let position: HashMap<usize, usize> = range.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let cover = FinFunction::from_fn(f.dom.clone(), object.clone(), |i| position[&f.apply(i)]).unwrap();
    let mono = FinFunction::new(object.clone(), f.cod.clone(), range).unwrap();
    Image { object, cover, mono }
}

/// A map is a cover when its image is the whole codomain.
pub fn is_cover(f: &FinFunction) -> bool {
    image_factorization(f).object.len() == f.cod.len()
}

/// Right-cancellability tested against all pairs of maps into a two-element set.
pub fn is_epi_by_cancellation(f: &FinFunction) -> bool {
    let n = f.cod.len();
    let maps: Vec<Vec<usize>> = crate::enumerate::Functions::new(n, 2).collect();
    for g in &maps {
        for h in &maps {
            if g != h && f.table.iter().all(|&i| g[i] == h[i]) {
                return false;
            }
        }
    }
    true
}

pub fn is_quasi_pullback(sq: &Square) -> Result<bool> {
    Ok(sq.comparison()?.is_surjective())
}

pub fn is_pullback_square(sq: &Square) -> Result<bool> {
    Ok(sq.comparison()?.is_bijective())
}

/// `X/R` together with the projection `X → X/R`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub object: FinSet,
    pub projection: FinFunction,
}

pub fn quotient(r1: &FinFunction, r2: &FinFunction) -> Result<Quotient> {
    if r1.dom != r2.dom || r1.cod != r2.cod {
        return Err(Error::Shape("relation legs must share domain and codomain".into()));
    }
    let x = r1.cod.clone();
    let pairs: Vec<(usize, usize)> = (0..r1.dom.len()).map(|i| (r1.apply(i), r2.apply(i))).collect();
    let set: HashSet<(usize, usize)> = pairs.iter().copied().collect();
    if set.len() != pairs.len() {
        return Err(Error::NotEquivalence("joint monicity"));
    }
    if (0..x.len()).any(|i| !set.contains(&(i, i))) {
        return Err(Error::NotEquivalence("reflexivity"));
    }
    if pairs.iter().any(|&(a, b)| !set.contains(&(b, a))) {
        return Err(Error::NotEquivalence("symmetry"));
    }
    for &(a, b) in &pairs {
        for c in 0..x.len() {
            if set.contains(&(b, c)) && !set.contains(&(a, c)) {
                return Err(Error::NotEquivalence("transitivity"));
            }
        }
    }
    // Least-label representative of each class.
    let rep: Vec<usize> = (0..x.len()).map(|i| (0..x.len()).find(|&j| set.contains(&(i, j))).unwrap()).collect();
    let reps: BTreeSet<usize> = rep.iter().copied().collect();
    let object = FinSet::new(reps.iter().map(|&i| x.label(i).to_string()))?;
    let projection = FinFunction::from_fn(x.clone(), object.clone(), |i| object.index_of(x.label(rep[i])).unwrap())?;
    let q = Quotient { object, projection };
    verify_exact_quotient(r1, r2, &q)?;
    Ok(q)
}

/// The square `R ⇉ X → X/R` must be a pullback (the kernel pair of the
/// projection is `R`) and a coequalizer (the projection is a cover that
/// identifies the legs).
pub fn verify_exact_quotient(r1: &FinFunction, r2: &FinFunction, q: &Quotient) -> Result<()> {
    let coequalizes = (0..r1.dom.len()).all(|i| q.projection.apply(r1.apply(i)) == q.projection.apply(r2.apply(i)));
    if !coequalizes || !q.projection.is_surjective() {
        return Err(Error::Invariant("quotient projection is not a coequalizer".into()));
    }
    let kernel = pullback(&q.projection, &q.projection)?;
    let sq = Square::new(
        FinFunction::from_fn(r1.dom.clone(), kernel.object.clone(), |i| kernel.index(r1.apply(i), r2.apply(i)).unwrap())?
            .then(&kernel.p1)?,
        r2.clone(),
        q.projection.clone(),
        q.projection.clone(),
    )?;
    if !is_pullback_square(&sq)? {
        return Err(Error::Invariant("relation is not the kernel pair of its quotient".into()));
    }
    Ok(())
}

/// The least equivalence relation on `x` containing `pairs`, as a jointly
/// monic pair `R ⇉ X`.
pub fn equivalence_closure(x: &FinSet, pairs: &[(usize, usize)]) -> Result<(FinFunction, FinFunction)> {
    let mut parent: Vec<usize> = (0..x.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    let roots: Vec<usize> = (0..x.len()).map(|i| find(&mut parent, i)).collect();
    let mut rel = Vec::new();
    for a in 0..x.len() {
        for b in 0..x.len() {
            if roots[a] == roots[b] {
                rel.push((a, b));
            }
        }
    }
    let labels = rel.iter().map(|&(a, b)| pair_label(x.label(a), x.label(b))).collect();
    let (r, pos) = FinSet::with_positions(labels)?;
    let mut t1 = vec![0; rel.len()];
    let mut t2 = vec![0; rel.len()];
    for (k, &(a, b)) in rel.iter().enumerate() {
        t1[pos[k]] = a;
        t2[pos[k]] = b;
    }
    Ok((FinFunction::new(r.clone(), x.clone(), t1)?, FinFunction::new(r, x.clone(), t2)?))
}

/// Tagged disjoint union `X + Y`.
#[derive(Clone, Debug)]
pub struct Sum {
    pub object: FinSet,
    pub inl: FinFunction,
    pub inr: FinFunction,
}

pub fn sum(x: &FinSet, y: &FinSet) -> Sum {
    let labels: Vec<String> =
        x.iter().map(|l| format!("inl({l})")).chain(y.iter().map(|l| format!("inr({l})"))).collect();
    // `inl(` sorts before `inr(` and both sides are already sorted.
    let object = FinSet::new(labels).expect("tags keep summands apart");
    let inl = FinFunction::new(x.clone(), object.clone(), (0..x.len()).collect()).unwrap();
    let inr = FinFunction::new(y.clone(), object.clone(), (x.len()..x.len() + y.len()).collect()).unwrap();
    Sum { object, inl, inr }
}

/// `f + g : B + B' → A + A'`.
pub fn sum_map(f: &FinFunction, g: &FinFunction) -> FinFunction {
    let dom = sum(&f.dom, &g.dom);
    let cod = sum(&f.cod, &g.cod);
    let mut table: Vec<usize> = f.table.clone();
    table.extend(g.table.iter().map(|&v| v + f.cod.len()));
    FinFunction::new(dom.object, cod.object, table).unwrap()
}

/// Two monos into a common codomain with empty intersection that jointly cover it.
pub fn is_disjoint_sum(i1: &FinFunction, i2: &FinFunction) -> bool {
    if i1.cod != i2.cod || !i1.is_injective() || !i2.is_injective() {
        return false;
    }
    let Ok(meet) = pullback(i1, i2) else { return false };
    let mut hit = vec![false; i1.cod.len()];
    for &v in i1.table.iter().chain(i2.table.iter()) {
        hit[v] = true;
    }
    meet.object.is_empty() && hit.into_iter().all(|h| h)
}

/// Pulling the coproduct injections back along `g: Z → X + Y` must present
/// `Z` as the sum of the two pullbacks.
pub fn sum_stable_along(s: &Sum, g: &FinFunction) -> Result<bool> {
    let left = pullback(&s.inl, g)?;
    let right = pullback(&s.inr, g)?;
    Ok(is_disjoint_sum(&left.p2, &right.p2))
}

/// `Π_f(g) → A` for `f: B → A` and `g: X → B`.
#[derive(Clone, Debug)]
pub struct DependentProduct {
    pub object: FinSet,
    pub projection: FinFunction,
    /// Per element (in canonical order): the base point `a` and the chosen
    /// `x` for each element of the fiber `B_a`, in fiber order.
    pub sections: Vec<(usize, Vec<usize>)>,
    lookup: HashMap<(usize, Vec<usize>), usize>,
}

impl DependentProduct {
    pub fn index(&self, a: usize, section: &[usize]) -> Option<usize> {
        self.lookup.get(&(a, section.to_vec())).copied()
    }
}

pub fn pi_f(f: &FinFunction, g: &FinFunction) -> Result<DependentProduct> {
    if g.cod != f.dom {
        return Err(Error::Shape("Π_f expects an object over the domain of f".into()));
    }
    let b_fibers = f.fibers();
    let x_fibers = g.fibers();
    let mut raw = Vec::new();
    for (a, fiber) in b_fibers.iter().enumerate() {
        let bounds = fiber.iter().map(|&b| x_fibers[b].len()).collect();
        for choice in Product::new(bounds) {
            let xs: Vec<usize> = choice.iter().zip(fiber).map(|(&k, &b)| x_fibers[b][k]).collect();
            raw.push((a, xs));
        }
    }
    let labels = raw
        .iter()
        .map(|(a, xs)| {
            let parts: Vec<&str> = xs.iter().map(|&x| g.dom.label(x)).collect();
            format!("{}[{}]", f.cod.label(*a), parts.join(","))
        })
        .collect();
    let (object, pos) = FinSet::with_positions(labels)?;
    let mut sections = vec![(0, Vec::new()); raw.len()];
    let mut lookup = HashMap::new();
    for (k, entry) in raw.into_iter().enumerate() {
        lookup.insert(entry.clone(), pos[k]);
        sections[pos[k]] = entry;
    }
    let projection = FinFunction::from_fn(object.clone(), f.cod.clone(), |i| sections[i].0)?;
    Ok(DependentProduct { object, projection, sections, lookup })
}

/// All maps `h: S → T` over a common base `Z`, i.e. with `target ∘ h = source`.
pub fn slice_homs(source: &FinFunction, target: &FinFunction) -> Result<Vec<Vec<usize>>> {
    if source.cod != target.cod {
        return Err(Error::Shape("slice maps need a common base".into()));
    }
    let fibers = target.fibers();
    let bounds = source.table.iter().map(|&z| fibers[z].len()).collect();
    Ok(Product::new(bounds)
        .map(|choice| choice.iter().enumerate().map(|(s, &k)| fibers[source.apply(s)][k]).collect())
        .collect())
}

/// Result of checking `Hom_{/B}(f*Y, X) ≅ Hom_{/A}(Y, Π_f X)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjunctionCheck {
    pub lhs: usize,
    pub rhs: usize,
    /// The transpose map is injective and hits every right-hand map.
    pub bijective: bool,
}

pub fn pi_adjunction(f: &FinFunction, g: &FinFunction, y: &FinFunction) -> Result<AdjunctionCheck> {
    if y.cod != f.cod {
        return Err(Error::Shape("Y must live over the codomain of f".into()));
    }
    let pi = pi_f(f, g)?;
    let pb = pullback(f, y)?;
    let lhs = slice_homs(&pb.p1, g)?;
    let rhs = slice_homs(y, &pi.projection)?;
    let b_fibers = f.fibers();
    let mut transposes = HashSet::new();
    for h in &lhs {
        let k: Vec<usize> = (0..y.dom.len())
            .map(|yy| {
                let a = y.apply(yy);
                let section: Vec<usize> = b_fibers[a].iter().map(|&b| h[pb.index(b, yy).unwrap()]).collect();
                pi.index(a, &section).unwrap()
            })
            .collect();
        transposes.insert(k);
    }
    let rhs_set: HashSet<Vec<usize>> = rhs.iter().cloned().collect();
    Ok(AdjunctionCheck {
        lhs: lhs.len(),
        rhs: rhs.len(),
        bijective: transposes.len() == lhs.len() && transposes == rhs_set,
    })
}

/// A map `f: B → A` read as a signature: one constructor per `a ∈ A` with
/// arity the fiber `B_a` (in canonical order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    map: FinFunction,
    fibers: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl Signature {
    pub fn new(map: FinFunction) -> Signature {
        let fibers = map.fibers();
        let mut position = vec![0; map.dom.len()];
        for fiber in &fibers {
            for (k, &b) in fiber.iter().enumerate() {
                position[b] = k;
            }
        }
        Signature { map, fibers, position }
    }

    pub fn map(&self) -> &FinFunction {
        &self.map
    }

    pub fn constructors(&self) -> &FinSet {
        &self.map.cod
    }

    pub fn arity(&self, a: usize) -> usize {
        self.fibers[a].len()
    }

    pub fn fiber(&self, a: usize) -> &[usize] {
        &self.fibers[a]
    }

    /// Position of `b` inside its fiber.
    pub fn position(&self, b: usize) -> usize {
        self.position[b]
    }

    pub fn has_nonempty_arity(&self) -> bool {
        self.fibers.iter().any(|f| !f.is_empty())
    }
}

/// `head` for a leaf, `head(c1,c2,...)` otherwise.
pub fn term_label(head: &str, children: &[&str]) -> String {
    if children.is_empty() {
        head.to_string()
    } else {
        format!("{head}({})", children.join(","))
    }
}

/// `P_f(X) = Σ_a X^{B_a}` with its decoding table.
#[derive(Clone, Debug)]
pub struct PolynomialObject {
    pub object: FinSet,
    /// `(a, t)` per element, `t` listing values along the fiber `B_a`.
    pub entries: Vec<(usize, Vec<usize>)>,
    lookup: HashMap<(usize, Vec<usize>), usize>,
}

impl PolynomialObject {
    pub fn index(&self, a: usize, t: &[usize]) -> Option<usize> {
        self.lookup.get(&(a, t.to_vec())).copied()
    }
}

pub fn polynomial_apply(sig: &Signature, x: &FinSet) -> PolynomialObject {
    let mut raw = Vec::new();
    for a in 0..sig.constructors().len() {
        for t in crate::enumerate::Functions::new(sig.arity(a), x.len()) {
            raw.push((a, t));
        }
    }
    let labels = raw
        .iter()
        .map(|(a, t)| {
            let parts: Vec<&str> = t.iter().map(|&v| x.label(v)).collect();
            term_label(sig.constructors().label(*a), &parts)
        })
        .collect();
    let (object, pos) = FinSet::with_positions(labels).expect("polynomial labels are distinct");
    let mut entries = vec![(0, Vec::new()); raw.len()];
    let mut lookup = HashMap::new();
    for (k, entry) in raw.into_iter().enumerate() {
        lookup.insert(entry.clone(), pos[k]);
        entries[pos[k]] = entry;
    }
    PolynomialObject { object, entries, lookup }
}

/// `P_f^depth(∅)`.
pub fn kleene_iterate(sig: &Signature, depth: usize) -> FinSet {
    let mut x = FinSet::empty();
    for _ in 0..depth {
        x = polynomial_apply(sig, &x).object;
    }
    x
}

/// `|P_f^depth(∅)|` without building it, saturating at `usize::MAX`.
pub fn kleene_size(sig: &Signature, depth: usize) -> usize {
    let mut size = 0usize;
    for _ in 0..depth {
        size = (0..sig.constructors().len())
            .fold(0usize, |acc, a| acc.saturating_add(size.saturating_pow(sig.arity(a).try_into().unwrap_or(u32::MAX))));
    }
    size
}

/// A well-founded term `sup_head(children)`, children listed along the fiber
/// of `head`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WTree {
    head: usize,
    children: Vec<Arc<WTree>>,
}

impl WTree {
    pub fn leaf(head: usize) -> WTree {
        WTree { head, children: Vec::new() }
    }

    pub fn sup(head: usize, children: Vec<WTree>) -> WTree {
        WTree { head, children: children.into_iter().map(Arc::new).collect() }
    }

    pub fn from_shared(head: usize, children: Vec<Arc<WTree>>) -> WTree {
        WTree { head, children }
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn children(&self) -> &[Arc<WTree>] {
        &self.children
    }

    pub fn child(&self, k: usize) -> &WTree {
        &self.children[k]
    }

    /// Leaves have height 1.
    pub fn height(&self) -> usize {
        1 + self.children.iter().map(|c| c.height()).max().unwrap_or(0)
    }

    pub fn label(&self, heads: &FinSet) -> String {
        let parts: Vec<String> = self.children.iter().map(|c| c.label(heads)).collect();
        let parts: Vec<&str> = parts.iter().map(String::as_str).collect();
        term_label(heads.label(self.head), &parts)
    }

    /// Shape check against a signature: the head exists and the children are
    /// indexed exactly by its fiber.
    pub fn conforms(&self, sig: &Signature) -> bool {
        self.head < sig.constructors().len()
            && self.children.len() == sig.arity(self.head)
            && self.children.iter().all(|c| c.conforms(sig))
    }
}

/// Depth-truncated W-type.
#[derive(Clone, Debug)]
pub struct WTypeApprox {
    pub depth: usize,
    pub trees: BTreeSet<WTree>,
    /// `P_f^depth(∅) = P_f^{depth+1}(∅)`: the W-type is finite and complete.
    pub saturated: bool,
}

impl WTypeApprox {
    pub fn labels(&self, sig: &Signature) -> Result<FinSet> {
        FinSet::new(self.trees.iter().map(|t| t.label(sig.constructors())))
    }
}

/// All terms of height at most `depth`.
pub fn wtype_enumerate(sig: &Signature, depth: usize) -> Result<WTypeApprox> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let mut level: Vec<Arc<WTree>> = Vec::new();
    for _ in 0..depth {
        let mut next = Vec::new();
        for a in 0..sig.constructors().len() {
            for choice in crate::enumerate::Functions::new(sig.arity(a), level.len()) {
                next.push(Arc::new(WTree::from_shared(a, choice.iter().map(|&i| level[i].clone()).collect())));
            }
        }
        level = next;
    }
    let trees: BTreeSet<WTree> = level.iter().map(|t| (**t).clone()).collect();
    let tallest = trees.iter().any(|t| t.height() == depth);
    let saturated = !tallest || !sig.has_nonempty_arity();
    Ok(WTypeApprox { depth, trees, saturated })
}

/// An alternating sequence `⟨w_0, b_0, w_1, …, w_n⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub trees: Vec<WTree>,
    pub branches: Vec<usize>,
}

pub fn is_path(sig: &Signature, path: &Path) -> bool {
    if path.trees.len() != path.branches.len() + 1 {
        return false;
    }
    path.branches.iter().enumerate().all(|(i, &b)| {
        let w = &path.trees[i];
        b < sig.map().dom().len()
            && sig.map().apply(b) == w.head
            && w.children.get(sig.position(b)).is_some_and(|c| **c == path.trees[i + 1])
    })
}

/// All paths starting at `w` (including the empty path).
pub fn paths_from(sig: &Signature, w: &WTree) -> Vec<Path> {
    let mut out = vec![Path { trees: vec![w.clone()], branches: Vec::new() }];
    let mut i = 0;
    while i < out.len() {
        let p = out[i].clone();
        let last = p.trees.last().unwrap();
        for (k, &b) in sig.fiber(last.head).iter().enumerate() {
            let mut q = p.clone();
            q.branches.push(b);
            q.trees.push((*last.children[k]).clone());
            out.push(q);
        }
        i += 1;
    }
    out
}

/// Every `v` reachable from `w` by a path; `w` itself via the empty path.
pub fn subterms(w: &WTree) -> BTreeSet<WTree> {
    let mut out = BTreeSet::new();
    let mut stack = vec![w];
    while let Some(t) = stack.pop() {
        if out.insert(t.clone()) {
            stack.extend(t.children.iter().map(|c| &**c));
        }
    }
    out
}

/// Verdict of the characterization test for a candidate W-type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CharacterizationVerdict {
    pub structure_is_iso: bool,
    pub no_proper_subalgebra: bool,
    /// Size of the least subalgebra reached by the closure iteration.
    pub closure_size: usize,
    pub carrier_size: usize,
    pub closure_steps: usize,
    pub is_wtype: bool,
}

/// `m: P_f(V) → V` is the W-type iff it is a bijection and `V` has no proper
/// `P_f`-subalgebra. The least subalgebra is computed by closing `∅` under
/// `m`, for at most `depth` rounds.
pub fn check_wtype_characterization(
    sig: &Signature,
    carrier: &FinSet,
    structure: &FinFunction,
    depth: usize,
) -> Result<CharacterizationVerdict> {
    let poly = polynomial_apply(sig, carrier);
    if structure.dom != poly.object || structure.cod != *carrier {
        return Err(Error::Shape("structure map must be P_f(V) → V".into()));
    }
    let structure_is_iso = structure.is_bijective();
    let mut inside = vec![false; carrier.len()];
    let mut steps = 0;
    while steps < depth {
        let mut grew = false;
        for (e, (_, t)) in poly.entries.iter().enumerate() {
            if t.iter().all(|&v| inside[v]) {
                let target = structure.apply(e);
                if !inside[target] {
                    inside[target] = true;
                    grew = true;
                }
            }
        }
        steps += 1;
        if !grew {
            break;
        }
    }
    let closure_size = inside.iter().filter(|&&b| b).count();
    let no_proper_subalgebra = closure_size == carrier.len();
    Ok(CharacterizationVerdict {
        structure_is_iso,
        no_proper_subalgebra,
        closure_size,
        carrier_size: carrier.len(),
        closure_steps: steps,
        is_wtype: structure_is_iso && no_proper_subalgebra,
    })
}

/// The canonical structure map `P_f(W) → W` of a saturated truncation, where
/// both sides carry the same term labels.
pub fn saturated_structure_map(sig: &Signature, w: &WTypeApprox) -> Result<(FinSet, FinFunction)> {
    if !w.saturated {
        return Err(Error::Precondition("W-type truncation is not saturated".into()));
    }
    let carrier = w.labels(sig)?;
    let poly = polynomial_apply(sig, &carrier);
    let m = FinFunction::from_fn(poly.object.clone(), carrier.clone(), |i| {
        carrier.index_of(poly.object.label(i)).expect("saturated W is a fixed point")
    })?;
    Ok((carrier, m))
}

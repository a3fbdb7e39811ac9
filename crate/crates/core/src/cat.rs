//! Finitely presented categories.

use std::cmp::Ordering;
use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{FinFunction, FinSet};

/// A finite category given by its objects, arrows, structure maps and a
/// composition table. Identities are explicit arrows named `id_<object>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinCategory {
    objects: FinSet,
    arrows: FinSet,
    dom: FinFunction,
    cod: FinFunction,
    id: FinFunction,
    /// `comp[g * n + f] = g ∘ f`.
    comp: Vec<Option<usize>>,
}

pub fn identity_name(object: &str) -> String {
    format!("id_{object}")
}

impl FinCategory {
    /// Assembles a category from named arrows and composition triples
    /// `(g, f, g∘f)`. Identities and their composites are filled in. Only
    /// shape errors are reported here; the category laws are checked by
    /// [`validate_category`].
    pub fn from_parts<O, A, C>(objects: O, arrows: A, compose: C) -> Result<FinCategory>
    where
        O: IntoIterator,
        O::Item: Into<String>,
        A: IntoIterator<Item = (String, String, String)>,
        C: IntoIterator<Item = (String, String, String)>,
    {
        let objects = FinSet::new(objects)?;
        let mut specs: Vec<(String, usize, usize)> = Vec::new();
        for x in 0..objects.len() {
            specs.push((identity_name(objects.label(x)), x, x));
        }
        for (name, d, c) in arrows {
            let (d, c) = (objects.require(&d)?, objects.require(&c)?);
            if let Some(x) = (0..objects.len()).find(|&x| identity_name(objects.label(x)) == name) {
                if d == x && c == x {
                    continue;
                }
                return Err(Error::Shape(format!("`{name}` is reserved for an identity")));
            }
            specs.push((name, d, c));
        }
        let (arrows, pos) = FinSet::with_positions(specs.iter().map(|s| s.0.clone()).collect())?;
        let mut dom = vec![0; specs.len()];
        let mut cod = vec![0; specs.len()];
        for (k, s) in specs.iter().enumerate() {
            dom[pos[k]] = s.1;
            cod[pos[k]] = s.2;
        }
        let id: Vec<usize> = (0..objects.len()).map(|x| pos[x]).collect();
        let n = arrows.len();
        let mut comp = vec![None; n * n];
        for (g, f, gf) in compose {
            let (g, f, gf) = (arrows.require(&g)?, arrows.require(&f)?, arrows.require(&gf)?);
            if comp[g * n + f].replace(gf).is_some_and(|old| old != gf) {
                return Err(Error::Shape(format!(
                    "composite {} ∘ {} given twice",
                    arrows.label(g),
                    arrows.label(f)
                )));
            }
        }
        for f in 0..n {
            let left = id[cod[f]] * n + f;
            let right = f * n + id[dom[f]];
            comp[left].get_or_insert(f);
            comp[right].get_or_insert(f);
        }
        Ok(FinCategory {
            dom: FinFunction::new(arrows.clone(), objects.clone(), dom)?,
            cod: FinFunction::new(arrows.clone(), objects.clone(), cod)?,
            id: FinFunction::new(objects.clone(), arrows.clone(), id)?,
            objects,
            arrows,
            comp,
        })
    }

    /// The category with one object and only its identity.
    pub fn terminal(object: &str) -> FinCategory {
        FinCategory::from_parts([object], Vec::new(), Vec::new()).unwrap()
    }

    pub fn objects(&self) -> &FinSet {
        &self.objects
    }

    pub fn arrows(&self) -> &FinSet {
        &self.arrows
    }

    pub fn dom_map(&self) -> &FinFunction {
        &self.dom
    }

    pub fn cod_map(&self) -> &FinFunction {
        &self.cod
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn dom(&self, a: usize) -> usize {
        self.dom.apply(a)
    }

    pub fn cod(&self, a: usize) -> usize {
        self.cod.apply(a)
    }

    pub fn identity(&self, x: usize) -> usize {
        self.id.apply(x)
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identity(self.dom(a)) == a
    }

    pub fn object_name(&self, x: usize) -> &str {
        self.objects.label(x)
    }

    pub fn arrow_name(&self, a: usize) -> &str {
        self.arrows.label(a)
    }

    pub fn object_index(&self, name: &str) -> Result<usize> {
        self.objects.require(name)
    }

    pub fn arrow_index(&self, name: &str) -> Result<usize> {
        self.arrows.require(name)
    }

    /// `g ∘ f`, when the table has an entry.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.comp[g * self.arrows.len() + f]
    }

    /// `g ∘ f` for a composable pair of a valid category.
    pub fn comp(&self, g: usize, f: usize) -> usize {
        debug_assert_eq!(self.cod(f), self.dom(g));
        self.compose(g, f).expect("composable pair in a validated category")
    }

    pub fn hom(&self, d: usize, c: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.dom(a) == d && self.cod(a) == c).collect()
    }

    pub fn arrows_into(&self, c: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.cod(a) == c).collect()
    }

    pub fn arrows_from(&self, d: usize) -> Vec<usize> {
        (0..self.arrows.len()).filter(|&a| self.dom(a) == d).collect()
    }

    /// Does `x: D → C` factor as `y ∘ h`?
    pub fn factors_through(&self, x: usize, y: usize) -> bool {
        self.cod(x) == self.cod(y) && self.hom(self.dom(x), self.dom(y)).into_iter().any(|h| self.comp(y, h) == x)
    }

    /// The opposite category: same names, reversed arrows.
    pub fn op(&self) -> FinCategory {
        let n = self.arrows.len();
        let mut comp = vec![None; n * n];
        for g in 0..n {
            for f in 0..n {
                comp[g * n + f] = self.comp[f * n + g];
            }
        }
        FinCategory {
            objects: self.objects.clone(),
            arrows: self.arrows.clone(),
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            id: self.id.clone(),
            comp,
        }
    }

    /// Non-identity composition triples, as in the input format.
    pub fn composition_triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.arrows.len();
        let mut out = Vec::new();
        for g in 0..n {
            for f in 0..n {
                if self.is_identity(g) || self.is_identity(f) {
                    continue;
                }
                if let Some(gf) = self.compose(g, f) {
                    out.push((g, f, gf));
                }
            }
        }
        out
    }
}

impl fmt::Display for FinCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "category with objects {} and {} arrows", self.objects, self.arrows.len())
    }
}

/// A single failed category law.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub law: &'static str,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CategoryVerdict {
    pub violations: Vec<Violation>,
}

impl CategoryVerdict {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_category(c: &FinCategory) -> CategoryVerdict {
    let mut violations = Vec::new();
    let name = |a: usize| c.arrow_name(a).to_string();
    let n = c.num_arrows();
    for x in 0..c.num_objects() {
        let i = c.identity(x);
        if c.dom(i) != x || c.cod(i) != x {
            violations.push(Violation { law: "identity", detail: format!("{} is not an endo-arrow", name(i)) });
        }
    }
    for g in 0..n {
        for f in 0..n {
            let composable = c.cod(f) == c.dom(g);
            match (composable, c.compose(g, f)) {
                (true, None) => violations.push(Violation {
                    law: "composition total",
                    detail: format!("{} ∘ {} is missing", name(g), name(f)),
                }),
                (false, Some(_)) => violations.push(Violation {
                    law: "composable pair",
                    detail: format!("{} ∘ {} is given but the arrows are not composable", name(g), name(f)),
                }),
                (true, Some(gf)) if c.dom(gf) != c.dom(f) || c.cod(gf) != c.cod(g) => {
                    violations.push(Violation {
                        law: "composite shape",
                        detail: format!("{} ∘ {} = {} has the wrong domain or codomain", name(g), name(f), name(gf)),
                    })
                }
                _ => {}
            }
        }
    }
    for f in 0..n {
        if c.compose(c.identity(c.cod(f)), f) != Some(f) {
            violations.push(Violation { law: "left unit", detail: format!("id ∘ {} ≠ {}", name(f), name(f)) });
        }
        if c.compose(f, c.identity(c.dom(f))) != Some(f) {
            violations.push(Violation { law: "right unit", detail: format!("{} ∘ id ≠ {}", name(f), name(f)) });
        }
    }
    for h in 0..n {
        for g in 0..n {
            let Some(hg) = c.compose(h, g) else { continue };
            for f in 0..n {
                let (Some(gf), true) = (c.compose(g, f), c.cod(f) == c.dom(g)) else { continue };
                if let (Some(l), Some(r)) = (c.compose(h, gf), c.compose(hg, f)) {
                    if l != r {
                        violations.push(Violation {
                            law: "associativity",
                            detail: format!("{} ∘ ({} ∘ {}) ≠ ({} ∘ {}) ∘ {}", name(h), name(g), name(f), name(h), name(g), name(f)),
                        });
                    }
                }
            }
        }
    }
    CategoryVerdict { violations }
}

/// Generators and relations. Paths in relations are written in applicative
/// order: `["g", "f"]` is `g ∘ f`; the empty path is an identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatPresentation {
    pub objects: Vec<String>,
    pub generators: Vec<(String, String, String)>,
    pub relations: Vec<(Vec<String>, Vec<String>)>,
}

impl CatPresentation {
    pub fn op(&self) -> CatPresentation {
        CatPresentation {
            objects: self.objects.clone(),
            generators: self.generators.iter().map(|(n, d, c)| (n.clone(), c.clone(), d.clone())).collect(),
            relations: self
                .relations
                .iter()
                .map(|(l, r)| (l.iter().rev().cloned().collect(), r.iter().rev().cloned().collect()))
                .collect(),
        }
    }
}

type Word = Vec<usize>;

fn shortlex(a: &[usize], b: &[usize]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

fn find_factor(word: &[usize], pat: &[usize]) -> Option<usize> {
    if pat.len() > word.len() {
        return None;
    }
    (0..=word.len() - pat.len()).find(|&i| word[i..i + pat.len()] == *pat)
}

fn reduce(mut word: Word, rules: &[(Word, Word)]) -> Word {
    'outer: loop {
        for (l, r) in rules {
            if let Some(i) = find_factor(&word, l) {
                word.splice(i..i + l.len(), r.iter().copied());
                continue 'outer;
            }
        }
        return word;
    }
}

fn orient(a: Word, b: Word) -> Option<(Word, Word)> {
    match shortlex(&a, &b) {
        Ordering::Greater => Some((a, b)),
        Ordering::Less => Some((b, a)),
        Ordering::Equal => None,
    }
}

/// Knuth–Bendix completion under shortlex order, capped at `max_rules`.
fn complete(mut rules: Vec<(Word, Word)>, max_rules: usize) -> Option<Vec<(Word, Word)>> {
    loop {
        let mut added = false;
        let snapshot = rules.clone();
        for (i, (l1, r1)) in snapshot.iter().enumerate() {
            for (j, (l2, r2)) in snapshot.iter().enumerate() {
                let mut pairs = Vec::new();
                for k in 1..l1.len().min(l2.len()) {
                    if l1[l1.len() - k..] == l2[..k] {
                        let mut a = r1.clone();
                        a.extend_from_slice(&l2[k..]);
                        let mut b = l1[..l1.len() - k].to_vec();
                        b.extend_from_slice(r2);
                        pairs.push((a, b));
                    }
                }
                if i != j {
                    if let Some(p) = find_factor(l1, l2) {
                        let a = r1.clone();
                        let mut b = l1[..p].to_vec();
                        b.extend_from_slice(r2);
                        b.extend_from_slice(&l1[p + l2.len()..]);
                        pairs.push((a, b));
                    }
                }
                for (a, b) in pairs {
                    let (a, b) = (reduce(a, &rules), reduce(b, &rules));
                    if let Some(rule) = orient(a, b) {
                        rules.push(rule);
                        added = true;
                        if rules.len() > max_rules {
                            return None;
                        }
                    }
                }
            }
        }
        if !added {
            return Some(rules);
        }
    }
}

/// Compiles a presentation into a finite category whose arrows are the
/// normal forms of composable paths. Fails when more than `budget` arrows
/// appear, which is how infinite presentations are detected.
pub fn compile_presentation(p: &CatPresentation, budget: usize) -> Result<FinCategory> {
    let objects = FinSet::new(p.objects.iter().cloned())?;
    if budget < p.generators.len() + objects.len() {
        return Err(Error::Precondition("budget must cover the generators and identities".into()));
    }
    let mut gens: Vec<(String, usize, usize)> = Vec::new();
    let mut gen_index = HashMap::new();
    for (name, d, c) in &p.generators {
        gen_index.insert(name.clone(), gens.len());
        gens.push((name.clone(), objects.require(d)?, objects.require(c)?));
    }
    // Applicative path -> diagrammatic word with its type.
    let typed = |path: &[String]| -> Result<(Word, Option<(usize, usize)>)> {
        let mut word = Vec::new();
        for name in path.iter().rev() {
            word.push(*gen_index.get(name).ok_or_else(|| Error::UnknownElement(name.clone()))?);
        }
        for w in word.windows(2) {
            if gens[w[0]].2 != gens[w[1]].1 {
                return Err(Error::Shape(format!("path {path:?} is not composable")));
            }
        }
        let ty = word.first().map(|&f| (gens[f].1, gens[*word.last().unwrap()].2));
        Ok((word, ty))
    };
    let mut rules = Vec::new();
    for (l, r) in &p.relations {
        let (lw, lt) = typed(l)?;
        let (rw, rt) = typed(r)?;
        let ok = match (lt, rt) {
            (Some(a), Some(b)) => a == b,
            (Some((d, c)), None) | (None, Some((d, c))) => d == c,
            (None, None) => true,
        };
        if !ok {
            return Err(Error::Shape(format!("relation {l:?} = {r:?} relates paths of different types")));
        }
        rules.extend(orient(lw, rw));
    }
    let rules = complete(rules, 16 * budget + 64).ok_or(Error::CategoryBudget(budget))?;

    let mut arrows: Vec<(usize, usize, Word)> = (0..objects.len()).map(|x| (x, x, Vec::new())).collect();
    let mut index: HashMap<(usize, usize, Word), usize> = HashMap::new();
    for (k, a) in arrows.iter().enumerate() {
        index.insert(a.clone(), k);
    }
    let mut queue: VecDeque<usize> = (0..arrows.len()).collect();
    while let Some(k) = queue.pop_front() {
        let (d, c, word) = arrows[k].clone();
        for (s, gen) in gens.iter().enumerate() {
            if gen.1 != c {
                continue;
            }
            let mut next = word.clone();
            next.push(s);
            if rules.iter().any(|(l, _)| next.ends_with(l)) {
                continue;
            }
            let key = (d, gen.2, next);
            if !index.contains_key(&key) {
                if arrows.len() >= budget {
                    return Err(Error::CategoryBudget(budget));
                }
                index.insert(key.clone(), arrows.len());
                queue.push_back(arrows.len());
                arrows.push(key);
            }
        }
    }
    let name = |a: &(usize, usize, Word)| -> String {
        if a.2.is_empty() {
            identity_name(objects.label(a.0))
        } else {
            a.2.iter().rev().map(|&s| gens[s].0.as_str()).collect::<Vec<_>>().join(".")
        }
    };
    let mut compose = Vec::new();
    for f in &arrows {
        for g in &arrows {
            if f.1 != g.0 || f.2.is_empty() || g.2.is_empty() {
                continue;
            }
            let mut w = f.2.clone();
            w.extend_from_slice(&g.2);
            let key = (f.0, g.1, reduce(w, &rules));
            let gf = index.get(&key).ok_or_else(|| Error::Invariant("composite normal form not enumerated".into()))?;
            compose.push((name(g), name(f), name(&arrows[*gf])));
        }
    }
    let specs: Vec<(String, String, String)> = arrows
        .iter()
        .filter(|a| !a.2.is_empty())
        .map(|a| (name(a), objects.label(a.0).to_string(), objects.label(a.1).to_string()))
        .collect();
    FinCategory::from_parts(p.objects.iter().cloned(), specs, compose)
}

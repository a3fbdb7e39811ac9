//! W-types in presheaf categories, built from terms over the induced
//! signature `g: Σ_{(a,C) ∈ |A|} |B_a| → |A|`.
//!
//! A term is a [`WTree`] over `g`: its head is an element `(a, C)` of `|A|`
//! and its children are listed along `|B_a|` in canonical order. Natural
//! terms rooted at `C` form `W(C)`.

use std::collections::HashMap;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{term_label, FinFunction, FinSet, Signature, WTree};
pub use crate::presheaf::{fiber_presheaf, FiberPresheaf};
use crate::presheaf::{
    assemble, element_label, empty, for_each_nat, underlying, validate_morphism, Presheaf, PresheafMorphism,
    UnderlyingSet,
};

/// A term of the presheaf W-type.
pub type PresheafTerm = WTree;

/// The induced base map `g` with the fiber presheaves behind it.
#[derive(Clone, Debug)]
pub struct InducedSignature {
    pub morphism: PresheafMorphism,
    /// `|A|`; heads of terms index into it.
    pub heads: UnderlyingSet,
    pub signature: Signature,
    fibers: Vec<FiberPresheaf>,
    /// Per head, the elements `(D, e)` of `B_a` in fiber order.
    slots: Vec<Vec<(usize, usize)>>,
    slot_index: Vec<HashMap<(usize, usize), usize>>,
}

impl InducedSignature {
    pub fn map(&self) -> &FinFunction {
        self.signature.map()
    }

    pub fn head(&self, c: usize, a: usize) -> usize {
        self.heads.index(c, a)
    }

    /// `(C, a)` of a head.
    pub fn head_parts(&self, h: usize) -> (usize, usize) {
        self.heads.elements[h]
    }

    pub fn fiber(&self, h: usize) -> &FiberPresheaf {
        &self.fibers[h]
    }

    pub fn slots(&self, h: usize) -> &[(usize, usize)] {
        &self.slots[h]
    }

    pub fn slot(&self, h: usize, d: usize, e: usize) -> Option<usize> {
        self.slot_index[h].get(&(d, e)).copied()
    }

    /// `γ(T)`.
    pub fn root(&self, t: &PresheafTerm) -> usize {
        self.heads.elements[t.head()].0
    }

    pub fn label(&self, t: &PresheafTerm) -> String {
        t.label(&self.heads.set)
    }
}

pub fn induced_base_map(f: &PresheafMorphism) -> Result<InducedSignature> {
    let heads = underlying(f.target());
    let mut fibers = Vec::new();
    let mut slots = Vec::new();
    let mut slot_index = Vec::new();
    let mut dom_labels = Vec::new();
    let mut dom_heads = Vec::new();
    for (h, &(c, a)) in heads.elements.iter().enumerate() {
        let fib = fiber_presheaf(f, c, a)?;
        let u = underlying(&fib.object);
        for (k, l) in u.set.iter().enumerate() {
            dom_labels.push(format!("{}|{}", heads.set.label(h), l));
            dom_heads.push(h);
            debug_assert_eq!(k, u.index(u.elements[k].0, u.elements[k].1));
        }
        slot_index.push(u.elements.iter().enumerate().map(|(k, &e)| (e, k)).collect());
        slots.push(u.elements.clone());
        fibers.push(fib);
    }
    let (dom, pos) = FinSet::with_positions(dom_labels)?;
    let mut table = vec![0; dom.len()];
    for (k, &h) in dom_heads.iter().enumerate() {
        table[pos[k]] = h;
    }
    let signature = Signature::new(FinFunction::new(dom, heads.set.clone(), table)?);
    for h in 0..heads.set.len() {
        if signature.arity(h) != slots[h].len() {
            return Err(Error::Invariant(format!("fiber of g over {} is not |B_a|", heads.set.label(h))));
        }
    }
    Ok(InducedSignature { morphism: f.clone(), heads, signature, fibers, slots, slot_index })
}

/// `T·α = sup_{(a·α, C')} α*(t)` with `α*(t)(β, b) = t(α ∘ β, b)`.
pub fn restrict_term(ind: &InducedSignature, t: &PresheafTerm, alpha: usize) -> Result<PresheafTerm> {
    let base = ind.morphism.base();
    let (c, a) = ind.head_parts(t.head());
    if c != base.cod(alpha) {
        return Err(Error::RootMismatch {
            expected: base.object_name(base.cod(alpha)).to_string(),
            found: base.object_name(c).to_string(),
        });
    }
    let c2 = base.dom(alpha);
    let a2 = ind.morphism.target().restrict(a, alpha);
    let h2 = ind.head(c2, a2);
    let (fib, fib2) = (ind.fiber(t.head()), ind.fiber(h2));
    let children = ind
        .slots(h2)
        .iter()
        .map(|&(d, e)| {
            let (beta, b) = fib2.elements[d][e];
            let e1 = fib.index(base.comp(alpha, beta), b).expect("α ∘ β lies in B_a");
            t.children()[ind.slot(t.head(), d, e1).unwrap()].clone()
        })
        .collect();
    Ok(WTree::from_shared(h2, children))
}

fn node_composable(ind: &InducedSignature, t: &PresheafTerm) -> bool {
    t.children().len() == ind.slots(t.head()).len()
        && ind.slots(t.head()).iter().zip(t.children()).all(|(&(d, _), child)| ind.root(child) == d)
}

/// `γ(t(β, b)) = dom(β)` at every subterm.
pub fn is_composable(ind: &InducedSignature, t: &PresheafTerm) -> bool {
    node_composable(ind, t) && t.children().iter().all(|c| is_composable(ind, c))
}

fn node_natural(ind: &InducedSignature, t: &PresheafTerm) -> bool {
    let base = ind.morphism.base();
    let h = t.head();
    let fib = ind.fiber(h);
    for (k, &(d, e)) in ind.slots(h).iter().enumerate() {
        for gamma in base.arrows_into(d) {
            if base.is_identity(gamma) {
                continue;
            }
            let e2 = fib.object.restrict(e, gamma);
            let j = ind.slot(h, base.dom(gamma), e2).unwrap();
            match restrict_term(ind, &t.children()[k], gamma) {
                Ok(r) if r == *t.children()[j] => {}
                _ => return false,
            }
        }
    }
    true
}

/// Composable, and `t(β, b)·γ = t(β ∘ γ, b·γ)` at every subterm.
pub fn is_natural(ind: &InducedSignature, t: &PresheafTerm) -> bool {
    is_composable(ind, t) && natural_rec(ind, t)
}

fn natural_rec(ind: &InducedSignature, t: &PresheafTerm) -> bool {
    node_natural(ind, t) && t.children().iter().all(|c| natural_rec(ind, c))
}

/// `P_f(X)(C) = {(a, t) | a ∈ A(C), t: B_a → X}` with `t` natural.
#[derive(Clone, Debug)]
pub struct PolynomialPresheaf {
    pub object: Presheaf,
    pub projection: PresheafMorphism,
    /// Per object, `(a, t)` with `t` listed along `|B_a|` in fiber order.
    pub entries: Vec<Vec<(usize, Vec<usize>)>>,
    lookup: Vec<HashMap<(usize, Vec<usize>), usize>>,
}

impl PolynomialPresheaf {
    pub fn index(&self, c: usize, a: usize, t: &[usize]) -> Option<usize> {
        self.lookup[c].get(&(a, t.to_vec())).copied()
    }
}

pub fn polynomial_presheaf(f: &PresheafMorphism, x: &Presheaf) -> Result<PolynomialPresheaf> {
    f.source().require_same_base(x)?;
    let ind = induced_base_map(f)?;
    polynomial_with(&ind, x)
}

fn polynomial_with(ind: &InducedSignature, x: &Presheaf) -> Result<PolynomialPresheaf> {
    let f = &ind.morphism;
    let base = f.base().clone();
    let a_p = f.target();
    let n = base.num_objects();
    let mut entries: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); n];
    let mut labels: Vec<Vec<String>> = vec![Vec::new(); n];
    for c in 0..n {
        for a in 0..a_p.value(c).len() {
            let h = ind.head(c, a);
            let fib = ind.fiber(h);
            let mut ts = Vec::new();
            for_each_nat(&fib.object, x, None, |t| {
                ts.push(ind.slots(h).iter().map(|&(d, e)| t[d][e]).collect::<Vec<usize>>());
                ControlFlow::Continue(())
            })?;
            for t in ts {
                let parts: Vec<&str> = ind.slots(h).iter().zip(&t).map(|(&(d, _), &v)| x.value(d).label(v)).collect();
                labels[c].push(term_label(ind.heads.set.label(h), &parts));
                entries[c].push((a, t));
            }
        }
    }
    let construction: Vec<HashMap<(usize, Vec<usize>), usize>> =
        entries.iter().map(|es| es.iter().enumerate().map(|(k, e)| (e.clone(), k)).collect()).collect();
    // (a, t)·α = (a·α, α*(t)).
    let (object, pos) = assemble(&base, labels, |alpha, k| {
        let (c2, c) = (base.dom(alpha), base.cod(alpha));
        let (a, t) = &entries[c][k];
        let h = ind.head(c, *a);
        let a2 = a_p.restrict(*a, alpha);
        let h2 = ind.head(c2, a2);
        let (fib, fib2) = (ind.fiber(h), ind.fiber(h2));
        let t2: Vec<usize> = ind
            .slots(h2)
            .iter()
            .map(|&(d, e)| {
                let (beta, b) = fib2.elements[d][e];
                t[ind.slot(h, d, fib.index(base.comp(alpha, beta), b).unwrap()).unwrap()]
            })
            .collect();
        construction[c2][&(a2, t2)]
    })?;
    let mut sorted = Vec::new();
    let mut lookup = Vec::new();
    let mut proj = Vec::new();
    for c in 0..n {
        let mut s = vec![(0, Vec::new()); entries[c].len()];
        let mut m = HashMap::new();
        for (k, e) in entries[c].iter().enumerate() {
            s[pos[c][k]] = e.clone();
            m.insert(e.clone(), pos[c][k]);
        }
        proj.push(s.iter().map(|e| e.0).collect());
        sorted.push(s);
        lookup.push(m);
    }
    let projection = PresheafMorphism::from_tables(object.clone(), a_p.clone(), proj)?;
    Ok(PolynomialPresheaf { object, projection, entries: sorted, lookup })
}

/// `P_f^depth(∅)`.
pub fn kleene_presheaf(f: &PresheafMorphism, depth: usize) -> Result<Presheaf> {
    let ind = induced_base_map(f)?;
    let mut x = empty(f.base());
    for _ in 0..depth {
        x = polynomial_with(&ind, &x)?.object;
    }
    Ok(x)
}

/// Natural terms of height at most `depth`, as a presheaf, with the
/// structure map `S: P_f(W_{depth-1}) → W_depth`.
#[derive(Clone, Debug)]
pub struct PresheafWType {
    pub depth: usize,
    pub induced: InducedSignature,
    pub object: Presheaf,
    /// Per object, the term behind each element in canonical order.
    pub terms: Vec<Vec<PresheafTerm>>,
    pub previous: Presheaf,
    pub previous_terms: Vec<Vec<PresheafTerm>>,
    pub structure: PresheafMorphism,
    /// No term reaches the depth bound, or no head has children.
    pub saturated: bool,
}

impl PresheafWType {
    pub fn index(&self, c: usize, t: &PresheafTerm) -> Option<usize> {
        self.terms[c].binary_search_by(|u| self.induced.label(u).cmp(&self.induced.label(t))).ok()
    }
}

/// Level `h` from the terms of height below `h`: every head with a natural
/// choice of children.
fn next_level(ind: &InducedSignature, level: &[Vec<PresheafTerm>]) -> Result<Vec<Vec<PresheafTerm>>> {
    let f = &ind.morphism;
    let base = f.base();
    let n = base.num_objects();
    let index: Vec<HashMap<&PresheafTerm, usize>> =
        level.iter().map(|ts| ts.iter().enumerate().map(|(i, t)| (t, i)).collect()).collect();
    // restricted[D][i][γ] = index of level[D][i]·γ in level[dom γ].
    let mut restricted: Vec<Vec<HashMap<usize, usize>>> = Vec::new();
    for d in 0..n {
        let mut per = Vec::new();
        for t in &level[d] {
            let mut m = HashMap::new();
            for gamma in base.arrows_into(d) {
                let r = restrict_term(ind, t, gamma)?;
                let i = *index[base.dom(gamma)]
                    .get(&r)
                    .ok_or_else(|| Error::Invariant("restriction of a natural term left the level".into()))?;
                m.insert(gamma, i);
            }
            per.push(m);
        }
        restricted.push(per);
    }
    let mut out = vec![Vec::new(); n];
    for c in 0..n {
        for a in 0..f.target().value(c).len() {
            let h = ind.head(c, a);
            let slots = ind.slots(h);
            let fib = ind.fiber(h);
            // (k, γ, j): child_k·γ must equal child_j.
            let mut checks: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); slots.len()];
            for (k, &(d, e)) in slots.iter().enumerate() {
                for gamma in base.arrows_into(d) {
                    if base.is_identity(gamma) {
                        continue;
                    }
                    let j = ind.slot(h, base.dom(gamma), fib.object.restrict(e, gamma)).unwrap();
                    checks[k.max(j)].push((k, gamma, j));
                }
            }
            let mut choice = vec![0usize; slots.len()];
            fn go(
                p: usize,
                slots: &[(usize, usize)],
                level: &[Vec<PresheafTerm>],
                restricted: &[Vec<HashMap<usize, usize>>],
                checks: &[Vec<(usize, usize, usize)>],
                choice: &mut Vec<usize>,
                emit: &mut dyn FnMut(&[usize]),
            ) {
                if p == slots.len() {
                    emit(choice);
                    return;
                }
                let d = slots[p].0;
                for i in 0..level[d].len() {
                    choice[p] = i;
                    let ok = checks[p]
                        .iter()
                        .all(|&(k, gamma, j)| restricted[slots[k].0][choice[k]][&gamma] == choice[j]);
                    if ok {
                        go(p + 1, slots, level, restricted, checks, choice, emit);
                    }
                }
            }
            let mut emit = |ch: &[usize]| {
                let children = slots.iter().zip(ch).map(|(&(d, _), &i)| level[d][i].clone()).collect();
                out[c].push(WTree::sup(h, children));
            };
            go(0, slots, level, &restricted, &checks, &mut choice, &mut emit);
        }
    }
    Ok(out)
}

fn level_presheaf(ind: &InducedSignature, level: &mut [Vec<PresheafTerm>]) -> Result<Presheaf> {
    let base = ind.morphism.base().clone();
    for ts in level.iter_mut() {
        ts.sort_by_cached_key(|t| ind.label(t));
    }
    let labels = level.iter().map(|ts| ts.iter().map(|t| ind.label(t)).collect()).collect();
    let index: Vec<HashMap<&PresheafTerm, usize>> =
        level.iter().map(|ts| ts.iter().enumerate().map(|(i, t)| (t, i)).collect()).collect();
    let (p, _) = assemble(&base, labels, |alpha, k| {
        let r = restrict_term(ind, &level[base.cod(alpha)][k], alpha).expect("root matches");
        index[base.dom(alpha)][&r]
    })?;
    Ok(p)
}

pub fn wtype_presheaf(f: &PresheafMorphism, depth: usize) -> Result<PresheafWType> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let ind = induced_base_map(f)?;
    let n = f.base().num_objects();
    let mut previous_terms: Vec<Vec<PresheafTerm>> = vec![Vec::new(); n];
    let mut terms = next_level(&ind, &previous_terms)?;
    for _ in 1..depth {
        previous_terms = terms;
        terms = next_level(&ind, &previous_terms)?;
    }
    let previous = level_presheaf(&ind, &mut previous_terms)?;
    let object = level_presheaf(&ind, &mut terms)?;
    let poly = polynomial_with(&ind, &previous)?;
    let index: Vec<HashMap<&PresheafTerm, usize>> =
        terms.iter().map(|ts| ts.iter().enumerate().map(|(i, t)| (t, i)).collect()).collect();
    // S_C(a, t) = sup_{(a, C)} t.
    let tables = (0..n)
        .map(|c| {
            poly.entries[c]
                .iter()
                .map(|(a, t)| {
                    let h = ind.head(c, *a);
                    let children = ind.slots(h).iter().zip(t).map(|(&(d, _), &v)| previous_terms[d][v].clone()).collect();
                    index[c]
                        .get(&WTree::sup(h, children))
                        .copied()
                        .ok_or_else(|| Error::Invariant("S leaves the next level".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let structure = PresheafMorphism::from_tables(poly.object.clone(), object.clone(), tables)?;
    if !validate_morphism(&structure).is_valid() {
        return Err(Error::Invariant("S is not natural".into()));
    }
    let tallest = terms.iter().flatten().any(|t| t.height() == depth);
    let saturated = !tallest || !ind.signature.has_nonempty_arity();
    Ok(PresheafWType { depth, induced: ind, object, terms, previous, previous_terms, structure, saturated })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityVerdict {
    pub is_subpresheaf: bool,
    pub closed_under_s: bool,
    pub equals_w: bool,
    /// The least S-closed subpresheaf, grown from nothing, is all of W.
    pub least_subalgebra_is_w: bool,
    pub closure_steps: usize,
    pub passes: bool,
}

/// Tests a candidate `K ⊆ W`, given by membership flags, against the
/// minimality clause: `K` must be closed under `S` and so equal to `W`.
pub fn check_minimality(w: &PresheafWType, candidate: &[Vec<bool>]) -> Result<MinimalityVerdict> {
    let base = w.object.base();
    if candidate.len() != w.terms.len() || candidate.iter().zip(&w.terms).any(|(k, t)| k.len() != t.len()) {
        return Err(Error::Shape("candidate flags must match the terms of W".into()));
    }
    let index: Vec<HashMap<&PresheafTerm, usize>> =
        w.terms.iter().map(|ts| ts.iter().enumerate().map(|(i, t)| (t, i)).collect()).collect();
    let child_positions: Vec<Vec<Vec<(usize, usize)>>> = w
        .terms
        .iter()
        .map(|ts| {
            ts.iter()
                .map(|t| {
                    w.induced
                        .slots(t.head())
                        .iter()
                        .zip(t.children())
                        .map(|(&(d, _), child)| (d, index[d][&**child]))
                        .collect()
                })
                .collect()
        })
        .collect();
    let generated = |inside: &[Vec<bool>]| -> Vec<Vec<bool>> {
        child_positions
            .iter()
            .map(|per| per.iter().map(|cs| cs.iter().all(|&(d, i)| inside[d][i])).collect())
            .collect()
    };
    let is_subpresheaf = (0..base.num_arrows()).all(|a| {
        (0..w.terms[base.cod(a)].len())
            .all(|x| !candidate[base.cod(a)][x] || candidate[base.dom(a)][w.object.restrict(x, a)])
    });
    let closed_under_s = generated(candidate).iter().flatten().zip(candidate.iter().flatten()).all(|(g, k)| !g || *k);
    let equals_w = candidate.iter().flatten().all(|&k| k);
    let mut inside: Vec<Vec<bool>> = w.terms.iter().map(|t| vec![false; t.len()]).collect();
    let mut steps = 0;
    loop {
        let next = generated(&inside);
        if next == inside {
            break;
        }
        inside = next;
        steps += 1;
    }
    let least_subalgebra_is_w = inside.iter().flatten().all(|&b| b);
    Ok(MinimalityVerdict {
        is_subpresheaf,
        closed_under_s,
        equals_w,
        least_subalgebra_is_w,
        closure_steps: steps,
        passes: is_subpresheaf && closed_under_s && equals_w && least_subalgebra_is_w,
    })
}

/// Label of an element of `|A|`, the head syntax of terms.
pub fn head_label(f: &PresheafMorphism, c: usize, a: usize) -> String {
    element_label(f.target().value(c).label(a), f.base().object_name(c))
}

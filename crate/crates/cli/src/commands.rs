use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};
use toposforge::cat::FinCategory;
use toposforge::finset::{
    check_wtype_characterization, kleene_iterate, kleene_size, saturated_structure_map, wtype_enumerate, Signature,
};
use toposforge::sheaf::{check_unit_universal, enumerate_sheaves, is_sheaf_for, same_sheaves, sheafify};
use toposforge::site::{check_l, check_m, check_strong_c, generate_grothendieck, Site};
use toposforge::smallmap::{
    check_collection_axiom, check_locally_full, check_pi_w_closure, check_stable, collsp_construct, equiv_collection_site,
    find_representation, MapClass, ProbeUniverse,
};
use toposforge::wpresheaf::{is_natural, kleene_presheaf, restrict_term, wtype_presheaf};

use crate::doc::{morphism_doc, presheaf_doc, site_doc, Bundle, InputError};
use crate::report::{InputHash, Report};
use crate::Command;

/// Terms listed in `wtype` reports before truncation.
const LISTED_TERMS: usize = 64;

pub struct Context<'a> {
    pub bundle: &'a Bundle,
    pub budget: usize,
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("verdicts serialize")
}

impl Context<'_> {
    fn category_name(&self, c: &Arc<FinCategory>) -> String {
        self.bundle.categories.iter().find(|(_, d)| *d == c).map(|(n, _)| n.clone()).unwrap_or_default()
    }

    fn site(&self, name: Option<&str>) -> anyhow::Result<(&str, &Site)> {
        Bundle::select(&self.bundle.sites, "site", name)
    }

    fn class(&self, name: Option<&str>) -> anyhow::Result<MapClass> {
        if let Some(n) = name {
            if let Some(c) = self.bundle.classes.get(n) {
                return Ok(c.clone());
            }
            if n == "all" {
                return Ok(MapClass::All);
            }
            if let Some(k) = n.strip_prefix("fiber_bound:") {
                return k.parse().map(MapClass::FiberBound).map_err(|_| invalid(format!("bad fiber bound `{k}`")));
            }
        }
        Ok(Bundle::select(&self.bundle.classes, "map_class", name)?.1.clone())
    }
}

fn report(command: &str, inputs: Vec<InputHash>, bounds: &[(&str, Value)], holds: bool, result: Value) -> Report {
    Report {
        command: command.to_string(),
        inputs,
        bounds: bounds.iter().map(|(k, v)| (k.to_string(), v.clone())).collect::<BTreeMap<_, _>>(),
        holds,
        result,
    }
}

pub fn dispatch(command: &Command, ctx: &Context, inputs: Vec<InputHash>) -> anyhow::Result<Report> {
    let b = ctx.bundle;
    let budget = json!(ctx.budget);
    Ok(match command {
        Command::Validate { .. } => {
            let documents: Vec<Value> = b.entries.iter().map(|(kind, name)| json!({ "kind": kind, "name": name })).collect();
            report("validate", inputs, &[], true, json!({ "documents": documents }))
        }
        Command::GenSite { site, depth, .. } => {
            let (name, s) = ctx.site(site.as_deref())?;
            let g = generate_grothendieck(s, *depth, ctx.budget)?;
            let (m, l, c) = (check_m(&g.site), check_l(&g.site), check_strong_c(&g.site));
            let holds = m.holds && l.holds && c.holds;
            let generated = site_doc(&format!("{name}-generated"), b.site_category(name), &g.site);
            let result = json!({
                "site": generated,
                "trees": g.registry.len(),
                "check_m": m,
                "check_l": l,
                "check_strong_c": c,
            });
            report("gen-site", inputs, &[("depth", json!(depth)), ("budget", budget)], holds, result)
        }
        Command::CheckSheaf { presheaf, site, .. } => {
            let (_, p) = Bundle::select(&b.presheaves, "presheaf", presheaf.as_deref())?;
            let (_, s) = ctx.site(site.as_deref())?;
            if p.base() != s.base() {
                return Err(invalid("the presheaf and the site live over different categories"));
            }
            let v = is_sheaf_for(p, s)?;
            report("check-sheaf", inputs, &[], v.is_sheaf, to_value(&v))
        }
        Command::Sheafify { presheaf, site, max_size, .. } => {
            let (pname, p) = Bundle::select(&b.presheaves, "presheaf", presheaf.as_deref())?;
            let (_, s) = ctx.site(site.as_deref())?;
            if p.base() != s.base() {
                return Err(invalid("the presheaf and the site live over different categories"));
            }
            let sh = sheafify(p, s)?;
            let sheaf = is_sheaf_for(&sh.object, s)?;
            let sheaves = enumerate_sheaves(s, *max_size, ctx.budget)?;
            let universal = check_unit_universal(&sh, &sheaves, ctx.budget)?;
            let aname = format!("a({pname})");
            let result = json!({
                "sheaf": presheaf_doc(&aname, b.presheaf_category(pname), &sh.object),
                "unit": morphism_doc(&format!("unit({pname})"), pname, &aname, &sh.unit),
                "unit_is_iso": sh.unit.is_iso(),
                "is_sheaf": sheaf,
                "unit_universal": universal,
            });
            let bounds = [("max_size", json!(max_size)), ("budget", budget)];
            report("sheafify", inputs, &bounds, sheaf.is_sheaf && universal.holds, result)
        }
        Command::SameSheaves { site, max_size, .. } => {
            let names: Vec<String> = match site.len() {
                2 => site.clone(),
                0 if b.sites.len() == 2 => b.entries.iter().filter(|e| e.0 == "site").map(|e| e.1.clone()).collect(),
                _ => return Err(invalid("same-sheaves needs exactly two sites")),
            };
            let (_, s1) = ctx.site(Some(&names[0]))?;
            let (_, s2) = ctx.site(Some(&names[1]))?;
            let v = same_sheaves(s1, s2, *max_size, ctx.budget)?;
            let bounds = [("max_size", json!(max_size)), ("budget", budget)];
            let result = json!({ "sites": names, "verdict": v });
            report("same-sheaves", inputs, &bounds, v.equal && v.complete, result)
        }
        Command::Wtype { function, depth, .. } => {
            let (_, f) = Bundle::select(&b.functions, "function", function.as_deref())?;
            let sig = Signature::new(f.clone());
            let size = kleene_size(&sig, *depth);
            if size > ctx.budget {
                return Err(toposforge::Error::Budget(ctx.budget).into());
            }
            let w = wtype_enumerate(&sig, *depth)?;
            let labels = w.labels(&sig)?;
            let kleene_agrees = labels == kleene_iterate(&sig, *depth);
            let characterization = if w.saturated {
                let (v, m) = saturated_structure_map(&sig, &w)?;
                Some(check_wtype_characterization(&sig, &v, &m, depth + 2)?)
            } else {
                None
            };
            let holds = kleene_agrees && characterization.as_ref().is_none_or(|c| c.is_wtype);
            let result = json!({
                "terms": labels.len(),
                "saturated": w.saturated,
                "kleene_agrees": kleene_agrees,
                "labels": labels.iter().take(LISTED_TERMS).collect::<Vec<_>>(),
                "labels_truncated": labels.len() > LISTED_TERMS,
                "characterization": characterization,
            });
            report("wtype", inputs, &[("depth", json!(depth)), ("budget", budget)], holds, result)
        }
        Command::WtypePresheaf { morphism, depth, .. } => {
            let (_, f) = Bundle::select(&b.morphisms, "presheaf_morphism", morphism.as_deref())?;
            let w = wtype_presheaf(f, *depth)?;
            let equals_kleene = w.object == kleene_presheaf(f, *depth)?;
            let base = f.base();
            let mut terms_natural = true;
            let mut restrictions_closed = true;
            for (c, ts) in w.terms.iter().enumerate() {
                for t in ts {
                    terms_natural &= is_natural(&w.induced, t);
                    for alpha in base.arrows_into(c) {
                        let r = restrict_term(&w.induced, t, alpha)?;
                        restrictions_closed &= is_natural(&w.induced, &r) && w.index(base.dom(alpha), &r).is_some();
                    }
                }
            }
            let structure_is_iso = w.structure.is_iso();
            let holds = equals_kleene && terms_natural && restrictions_closed && structure_is_iso;
            let result = json!({
                "object": presheaf_doc("W", &ctx.category_name(base), &w.object),
                "saturated": w.saturated,
                "equals_kleene": equals_kleene,
                "terms_natural": terms_natural,
                "restrictions_closed": restrictions_closed,
                "structure_is_iso": structure_is_iso,
            });
            report("wtype-presheaf", inputs, &[("depth", json!(depth))], holds, result)
        }
        Command::CheckClass { class, probe, extra_set, w_depth, .. } => {
            let class = ctx.class(class.as_deref())?;
            let universe = ProbeUniverse::new(*probe).with_extra_sets(extra_set);
            let stable = check_stable(&class, &universe)?;
            let full = check_locally_full(&class, &universe)?;
            let piw = check_pi_w_closure(&class, &universe, *w_depth)?;
            let (representable, representation) = match find_representation(&class, &universe) {
                Ok(r) => (
                    r.verified(),
                    json!({
                        "u": r.universal.pi.cod().len(),
                        "e": r.universal.pi.dom().len(),
                        "sizes": r.universal.sizes,
                        "maps_represented": r.witnesses.len(),
                        "verified": r.verified(),
                    }),
                ),
                Err(toposforge::Error::Precondition(msg)) => (false, json!({ "failure": msg })),
                Err(e) => return Err(e.into()),
            };
            let ca = check_collection_axiom(&class, &universe)?;
            let holds = stable.holds && full.holds && piw.holds && representable && ca.holds;
            let result = json!({
                "class": class.name(),
                "stability": stable,
                "local_fullness": full,
                "pi_w": piw,
                "representation": representation,
                "collection": ca,
            });
            let bounds = [("probe", json!(probe)), ("extra_sets", json!(extra_set)), ("w_depth", json!(w_depth))];
            report("check-class", inputs, &bounds, holds, result)
        }
        Command::Collsp { class, probe, function, .. } => {
            let class = ctx.class(class.as_deref())?;
            let universe = ProbeUniverse::new(*probe);
            let rep = find_representation(&class, &universe)?;
            let maps: Vec<_> = match function {
                Some(n) => vec![Bundle::select(&b.functions, "function", Some(n))?.1.clone()],
                None => universe.maps().filter(|f| class.contains(f)).cloned().collect(),
            };
            let mut holds = true;
            let mut constructions = Vec::new();
            for f in &maps {
                let cons = collsp_construct(f, &class, &rep.universal)?;
                holds &= cons.verified();
                constructions.push(json!({
                    "map": f.to_string(),
                    "c": cons.c.len(),
                    "d": cons.d.len(),
                    "quasi_pullback": cons.quasi_pullback,
                    "g_small": cons.g_small,
                    "collection_span": cons.span,
                    "verified": cons.verified(),
                }));
            }
            let result = json!({
                "class": class.name(),
                "universal": { "u": rep.universal.pi.cod().len(), "e": rep.universal.pi.dom().len() },
                "constructions": constructions,
            });
            report("collsp", inputs, &[("probe", json!(probe))], holds, result)
        }
        Command::EquivCollSite { site, class, probe, max_size, .. } => {
            let (name, s) = ctx.site(site.as_deref())?;
            let class = ctx.class(class.as_deref())?;
            let rep = find_representation(&class, &ProbeUniverse::new(*probe))?;
            let e = equiv_collection_site(s, &class, &rep.universal, *max_size, ctx.budget)?;
            let result = json!({
                "class": class.name(),
                "site": site_doc(&format!("{name}-collection"), b.site_category(name), &e.site),
                "collection_site": e.collection_site,
                "small_covers": e.small_covers,
                "same_sheaves": e.same_sheaves,
            });
            let bounds = [("probe", json!(probe)), ("max_size", json!(max_size)), ("budget", budget)];
            report("equiv-coll-site", inputs, &bounds, e.verified(), result)
        }
    })
}

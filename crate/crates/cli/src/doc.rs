//! JSON documents, their canonical form and name resolution.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use toposforge::cat::{validate_category, FinCategory};
use toposforge::finset::{FinFunction, FinSet};
use toposforge::presheaf::{validate_morphism, validate_presheaf, Presheaf, PresheafMorphism};
use toposforge::site::{CoveringFamily, Site};
use toposforge::smallmap::MapClass;

/// Input problems; always exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Category(CategoryDoc),
    Presheaf(PresheafDoc),
    PresheafMorphism(MorphismDoc),
    Site(SiteDoc),
    MapClass(MapClassDoc),
    Function(FunctionDoc),
    Corpus(CorpusDoc),
}

impl Document {
    pub fn name(&self) -> &str {
        match self {
            Document::Category(d) => &d.name,
            Document::Presheaf(d) => &d.name,
            Document::PresheafMorphism(d) => &d.name,
            Document::Site(d) => &d.name,
            Document::MapClass(d) => &d.name,
            Document::Function(d) => &d.name,
            Document::Corpus(d) => &d.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Document::Category(_) => "category",
            Document::Presheaf(_) => "presheaf",
            Document::PresheafMorphism(_) => "presheaf_morphism",
            Document::Site(_) => "site",
            Document::MapClass(_) => "map_class",
            Document::Function(_) => "function",
            Document::Corpus(_) => "corpus",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowDoc {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryDoc {
    pub name: String,
    pub objects: Vec<String>,
    #[serde(default)]
    pub arrows: Vec<ArrowDoc>,
    /// Triples `[g, f, g∘f]`.
    #[serde(default)]
    pub compose: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafDoc {
    pub name: String,
    pub category: String,
    pub values: BTreeMap<String, Vec<String>>,
    /// Per arrow `α: D → C`, `x ↦ x·α` from `P(C)` to `P(D)`.
    #[serde(default)]
    pub restrict: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub name: String,
    pub source: String,
    pub target: String,
    pub components: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberDoc {
    pub index: String,
    pub arrow: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub name: String,
    pub target: String,
    pub family: Vec<MemberDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDoc {
    pub name: String,
    pub category: String,
    pub covers: Vec<CoverDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub dom: Vec<String>,
    pub cod: Vec<String>,
    pub map: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassSpec {
    FiberBound { bound: usize },
    All,
    Explicit { maps: Vec<MapDoc> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapClassDoc {
    pub name: String,
    pub class: ClassSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub name: String,
    #[serde(flatten)]
    pub body: MapDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusDoc {
    pub name: String,
    pub items: Vec<Document>,
}

/// Two-space JSON with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("documents serialize");
    out.push('\n');
    out
}

pub fn parse(text: &str, origin: &str) -> anyhow::Result<Document> {
    serde_json::from_str(text).map_err(|e| invalid(format!("{origin}:{}:{}: {e}", e.line(), e.column())))
}

fn build_set(labels: &[String], what: &str) -> anyhow::Result<FinSet> {
    FinSet::new(labels.iter().cloned()).map_err(|e| invalid(format!("{what}: {e}")))
}

pub fn build_function(d: &MapDoc, what: &str) -> anyhow::Result<FinFunction> {
    let dom = build_set(&d.dom, what)?;
    let cod = build_set(&d.cod, what)?;
    FinFunction::from_pairs(dom, cod, d.map.iter().map(|(k, v)| (k.as_str(), v.as_str())))
        .map_err(|e| invalid(format!("{what}: {e}")))
}

pub fn function_doc(f: &FinFunction) -> MapDoc {
    MapDoc {
        dom: f.dom().labels().to_vec(),
        cod: f.cod().labels().to_vec(),
        map: (0..f.dom().len()).map(|i| (f.dom().label(i).to_string(), f.cod().label(f.apply(i)).to_string())).collect(),
    }
}

pub fn category_doc(name: &str, c: &FinCategory) -> CategoryDoc {
    let arrows = (0..c.num_arrows())
        .filter(|&a| !c.is_identity(a))
        .map(|a| ArrowDoc {
            name: c.arrow_name(a).to_string(),
            dom: c.object_name(c.dom(a)).to_string(),
            cod: c.object_name(c.cod(a)).to_string(),
        })
        .collect();
    let compose = c
        .composition_triples()
        .into_iter()
        .filter(|&(g, f, _)| !c.is_identity(g) && !c.is_identity(f))
        .map(|(g, f, gf)| [c.arrow_name(g).to_string(), c.arrow_name(f).to_string(), c.arrow_name(gf).to_string()])
        .collect();
    CategoryDoc { name: name.to_string(), objects: c.objects().labels().to_vec(), arrows, compose }
}

pub fn presheaf_doc(name: &str, category: &str, p: &Presheaf) -> PresheafDoc {
    let c = p.base();
    let values = (0..c.num_objects()).map(|x| (c.object_name(x).to_string(), p.value(x).labels().to_vec())).collect();
    let restrict = (0..c.num_arrows())
        .filter(|&a| !c.is_identity(a))
        .map(|a| {
            let r = p.restriction(a);
            let table = (0..r.dom().len()).map(|x| (r.dom().label(x).to_string(), r.cod().label(r.apply(x)).to_string())).collect();
            (c.arrow_name(a).to_string(), table)
        })
        .collect();
    PresheafDoc { name: name.to_string(), category: category.to_string(), values, restrict }
}

pub fn morphism_doc(name: &str, source: &str, target: &str, f: &PresheafMorphism) -> MorphismDoc {
    let c = f.base();
    let components = (0..c.num_objects())
        .map(|x| {
            let m = f.component(x);
            let table = (0..m.dom().len()).map(|i| (m.dom().label(i).to_string(), m.cod().label(m.apply(i)).to_string())).collect();
            (c.object_name(x).to_string(), table)
        })
        .collect();
    MorphismDoc { name: name.to_string(), source: source.to_string(), target: target.to_string(), components }
}

pub fn site_doc(name: &str, category: &str, s: &Site) -> SiteDoc {
    let c = s.base();
    let covers = s
        .covers()
        .iter()
        .map(|u| CoverDoc {
            name: u.name.clone(),
            target: c.object_name(u.target).to_string(),
            family: (0..u.index.len())
                .map(|i| MemberDoc { index: u.index.label(i).to_string(), arrow: c.arrow_name(u.arrows[i]).to_string() })
                .collect(),
        })
        .collect();
    SiteDoc { name: name.to_string(), category: category.to_string(), covers }
}

pub fn class_spec(class: &MapClass) -> ClassSpec {
    match class {
        MapClass::FiberBound(k) => ClassSpec::FiberBound { bound: *k },
        MapClass::All => ClassSpec::All,
        MapClass::Explicit(maps) => ClassSpec::Explicit { maps: maps.iter().map(function_doc).collect() },
    }
}

/// Every named object of the input files, built and validated.
#[derive(Default)]
pub struct Bundle {
    pub categories: BTreeMap<String, Arc<FinCategory>>,
    pub presheaves: BTreeMap<String, Presheaf>,
    presheaf_category: BTreeMap<String, String>,
    pub morphisms: BTreeMap<String, PresheafMorphism>,
    pub sites: BTreeMap<String, Site>,
    site_category: BTreeMap<String, String>,
    pub classes: BTreeMap<String, MapClass>,
    pub functions: BTreeMap<String, FinFunction>,
    /// `(kind, name)` in input order.
    pub entries: Vec<(&'static str, String)>,
}

fn flatten(doc: Document, out: &mut Vec<Document>) {
    match doc {
        Document::Corpus(c) => {
            for item in c.items {
                flatten(item, out);
            }
        }
        other => out.push(other),
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str, from: &str) -> anyhow::Result<&'a T> {
    map.get(name).ok_or_else(|| invalid(format!("{from}: unknown {kind} `{name}`")))
}

impl Bundle {
    pub fn from_documents(docs: Vec<Document>) -> anyhow::Result<Bundle> {
        let mut flat = Vec::new();
        for d in docs {
            flatten(d, &mut flat);
        }
        let mut b = Bundle::default();
        let mut seen = BTreeMap::new();
        for d in &flat {
            if seen.insert((d.kind(), d.name().to_string()), ()).is_some() {
                return Err(invalid(format!("duplicate {} `{}`", d.kind(), d.name())));
            }
            b.entries.push((d.kind(), d.name().to_string()));
        }
        // Build in dependency order: categories, then what refers to them.
        for d in &flat {
            match d {
                Document::Category(c) => {
                    b.categories.insert(c.name.clone(), Arc::new(build_category(c)?));
                }
                Document::MapClass(c) => {
                    b.classes.insert(c.name.clone(), build_class(c)?);
                }
                Document::Function(f) => {
                    let what = format!("function `{}`", f.name);
                    b.functions.insert(f.name.clone(), build_function(&f.body, &what)?);
                }
                _ => {}
            }
        }
        for d in &flat {
            match d {
                Document::Presheaf(p) => {
                    let built = b.build_presheaf(p)?;
                    b.presheaves.insert(p.name.clone(), built);
                    b.presheaf_category.insert(p.name.clone(), p.category.clone());
                }
                Document::Site(s) => {
                    let built = b.build_site(s)?;
                    b.sites.insert(s.name.clone(), built);
                    b.site_category.insert(s.name.clone(), s.category.clone());
                }
                _ => {}
            }
        }
        for d in &flat {
            if let Document::PresheafMorphism(m) = d {
                let built = b.build_morphism(m)?;
                b.morphisms.insert(m.name.clone(), built);
            }
        }
        Ok(b)
    }

    fn build_presheaf(&self, d: &PresheafDoc) -> anyhow::Result<Presheaf> {
        let from = format!("presheaf `{}`", d.name);
        let c = lookup(&self.categories, "category", &d.category, &from)?;
        for key in d.values.keys() {
            c.object_index(key).map_err(|e| invalid(format!("{from}: values: {e}")))?;
        }
        for key in d.restrict.keys() {
            c.arrow_index(key).map_err(|e| invalid(format!("{from}: restrict: {e}")))?;
        }
        let values = (0..c.num_objects())
            .map(|x| {
                let name = c.object_name(x);
                let labels = d.values.get(name).ok_or_else(|| invalid(format!("{from}: no value for object `{name}`")))?;
                build_set(labels, &format!("{from}: value at `{name}`"))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let mut tables = Vec::with_capacity(c.num_arrows());
        for a in 0..c.num_arrows() {
            let (dom, cod) = (&values[c.dom(a)], &values[c.cod(a)]);
            if c.is_identity(a) {
                tables.push((0..cod.len()).collect());
                continue;
            }
            let name = c.arrow_name(a);
            let empty = BTreeMap::new();
            let given = d.restrict.get(name).unwrap_or(&empty);
            let f = FinFunction::from_pairs(cod.clone(), dom.clone(), given.iter().map(|(k, v)| (k.as_str(), v.as_str())))
                .map_err(|e| invalid(format!("{from}: restriction along `{name}`: {e}")))?;
            tables.push(f.table().to_vec());
        }
        let p = Presheaf::from_tables(c.clone(), values, tables).map_err(|e| invalid(format!("{from}: {e}")))?;
        let verdict = validate_presheaf(&p);
        if !verdict.is_valid() {
            return Err(invalid(format!("{from}: not functorial: {}", serde_json::to_string(&verdict)?)));
        }
        Ok(p)
    }

    fn build_morphism(&self, d: &MorphismDoc) -> anyhow::Result<PresheafMorphism> {
        let from = format!("presheaf_morphism `{}`", d.name);
        let p = lookup(&self.presheaves, "presheaf", &d.source, &from)?;
        let q = lookup(&self.presheaves, "presheaf", &d.target, &from)?;
        if p.base() != q.base() {
            return Err(invalid(format!("{from}: source and target live over different categories")));
        }
        let c = p.base();
        for key in d.components.keys() {
            c.object_index(key).map_err(|e| invalid(format!("{from}: components: {e}")))?;
        }
        let components = (0..c.num_objects())
            .map(|x| {
                let name = c.object_name(x);
                let empty = BTreeMap::new();
                let given = d.components.get(name).unwrap_or(&empty);
                FinFunction::from_pairs(p.value(x).clone(), q.value(x).clone(), given.iter().map(|(k, v)| (k.as_str(), v.as_str())))
                    .map_err(|e| invalid(format!("{from}: component at `{name}`: {e}")))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let f = PresheafMorphism::new(p.clone(), q.clone(), components).map_err(|e| invalid(format!("{from}: {e}")))?;
        let verdict = validate_morphism(&f);
        if !verdict.is_valid() {
            return Err(invalid(format!("{from}: not natural: {}", serde_json::to_string(&verdict)?)));
        }
        Ok(f)
    }

    fn build_site(&self, d: &SiteDoc) -> anyhow::Result<Site> {
        let from = format!("site `{}`", d.name);
        let c = lookup(&self.categories, "category", &d.category, &from)?;
        let covers = d
            .covers
            .iter()
            .map(|u| {
                let at = format!("{from}: cover `{}`", u.name);
                let target = c.object_index(&u.target).map_err(|e| invalid(format!("{at}: {e}")))?;
                let members = u
                    .family
                    .iter()
                    .map(|m| Ok((m.index.clone(), c.arrow_index(&m.arrow).map_err(|e| invalid(format!("{at}: {e}")))?)))
                    .collect::<anyhow::Result<Vec<_>>>()?;
                CoveringFamily::new(u.name.clone(), target, members).map_err(|e| invalid(format!("{at}: {e}")))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Site::new(c.clone(), covers).map_err(|e| invalid(format!("{from}: {e}")))
    }

    pub fn presheaf_category(&self, presheaf: &str) -> &str {
        &self.presheaf_category[presheaf]
    }

    pub fn site_category(&self, site: &str) -> &str {
        &self.site_category[site]
    }

    /// The named item, or the only one of its kind when no name is given.
    pub fn select<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: Option<&str>) -> anyhow::Result<(&'a str, &'a T)> {
        match name {
            Some(n) => map.get_key_value(n).map(|(k, v)| (k.as_str(), v)).ok_or_else(|| invalid(format!("unknown {kind} `{n}`"))),
            None if map.len() == 1 => {
                let (k, v) = map.iter().next().unwrap();
                Ok((k.as_str(), v))
            }
            None if map.is_empty() => Err(invalid(format!("no {kind} in the inputs"))),
            None => Err(invalid(format!("several {kind} documents; pick one by name"))),
        }
    }
}

fn build_category(d: &CategoryDoc) -> anyhow::Result<FinCategory> {
    let from = format!("category `{}`", d.name);
    let c = FinCategory::from_parts(
        d.objects.iter().cloned(),
        d.arrows.iter().map(|a| (a.name.clone(), a.dom.clone(), a.cod.clone())),
        d.compose.iter().map(|[g, f, gf]| (g.clone(), f.clone(), gf.clone())),
    )
    .map_err(|e| invalid(format!("{from}: {e}")))?;
    let verdict = validate_category(&c);
    if !verdict.is_valid() {
        return Err(invalid(format!("{from}: category laws fail: {}", serde_json::to_string(&verdict)?)));
    }
    Ok(c)
}

fn build_class(d: &MapClassDoc) -> anyhow::Result<MapClass> {
    Ok(match &d.class {
        ClassSpec::FiberBound { bound } => MapClass::FiberBound(*bound),
        ClassSpec::All => MapClass::All,
        ClassSpec::Explicit { maps } => MapClass::Explicit(
            maps.iter()
                .enumerate()
                .map(|(k, m)| build_function(m, &format!("map_class `{}`: map {k}", d.name)))
                .collect::<anyhow::Result<_>>()?,
        ),
    })
}

/// The canonical form of a document: built within `b`, then written back out.
pub fn canonical_in(doc: &Document, b: &Bundle) -> anyhow::Result<Document> {
    Ok(match doc {
        Document::Category(c) => Document::Category(category_doc(&c.name, &b.categories[&c.name])),
        Document::Presheaf(p) => Document::Presheaf(presheaf_doc(&p.name, &p.category, &b.presheaves[&p.name])),
        Document::PresheafMorphism(m) => {
            Document::PresheafMorphism(morphism_doc(&m.name, &m.source, &m.target, &b.morphisms[&m.name]))
        }
        Document::Site(s) => Document::Site(site_doc(&s.name, &s.category, &b.sites[&s.name])),
        Document::MapClass(c) => Document::MapClass(MapClassDoc { name: c.name.clone(), class: class_spec(&b.classes[&c.name]) }),
        Document::Function(f) => {
            Document::Function(FunctionDoc { name: f.name.clone(), body: function_doc(&b.functions[&f.name]) })
        }
        Document::Corpus(c) => Document::Corpus(CorpusDoc {
            name: c.name.clone(),
            items: c.items.iter().map(|d| canonical_in(d, b)).collect::<anyhow::Result<_>>()?,
        }),
    })
}

//! TOML documents for operads, complexes, dendrices, horns and morphisms.
//!
//! Colors and basis vectors are referred to by name, rationals are strings
//! like `"-3/2"`, profiles are written `a,b->c`, and trees use the nested
//! list encoding with `:color` suffixes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num::Zero;
use serde::{Deserialize, Serialize};

use opnerve::hops::{
    tree_profile, vertex_profile, MultiMap, SuHomotopyOperad, SuMorphism, SuTable,
    DEFAULT_VERTEX_BOUND,
};
use opnerve::linalg::{fmt_q, parse_q, ChainComplex, GradedSpace, Matrix, SparseVec, Q};
use opnerve::nerve::{key_profile, keys, Dendrex, InnerHorn, Key};
use opnerve::operads::{Color, DgColoredOperad, OperadMorphism, Profile, Table, DEFAULT_WINDOW};
use opnerve::trees::{bit, bits, parse_tree, ColoredTree, Tree};

use crate::CliError;

type Res<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    #[default]
    DgOperad,
    SuOperad,
    TreeOperad,
    Endomorphism,
    Complex,
    Dendrex,
    Horn,
    Morphism,
}

/// A linear combination: (basis label, rational coefficient).
pub type Combo = Vec<(String, String)>;

/// (source label, target label, coefficient).
pub type Entry = (String, String, String);

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arity: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_window: Option<[i32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub basis: Vec<(String, i32)>,
    /// d(source) has `coefficient` on target.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d: Vec<Entry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub profile: String,
    pub basis: Vec<(String, i32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d: Vec<Entry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositionDoc {
    pub outer: String,
    pub slot: usize,
    pub inner: String,
    pub x: String,
    pub y: String,
    pub result: Combo,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDoc {
    pub profile: String,
    pub perm: Vec<usize>,
    pub entries: Vec<Entry>,
}

/// γ or a higher morphism component on a colored tree; `inputs` lists one
/// basis label per vertex in depth-first order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeEntryDoc {
    pub tree: String,
    pub inputs: Vec<String>,
    pub result: Combo,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub profile: String,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDoc {
    pub vertices: Vec<usize>,
    #[serde(default)]
    pub cuts: Vec<usize>,
    pub value: Combo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperadRef {
    Path(String),
    Inline(Box<Document>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub colors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub identity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub units: BTreeMap<String, Combo>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub color_map: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compositions: Vec<CompositionDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<ActionDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<TreeEntryDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<MapDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub higher: Vec<TreeEntryDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<ElementDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operad: Option<OperadRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<OperadRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<OperadRef>,
}

impl Document {
    pub fn from_toml(src: &str) -> Res<Self> {
        toml::from_str(src).map_err(|e| CliError::Syntax(e.to_string()))
    }

    pub fn to_toml(&self) -> Res<String> {
        toml::to_string(self).map_err(|e| CliError::Syntax(e.to_string()))
    }
}

/// Settings that override document bounds.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub window: Option<(i32, i32)>,
    pub vertex_bound: Option<usize>,
}

/// An operad with its dg structure when it has one.
#[derive(Clone, Debug)]
pub struct Operad {
    pub dg: Option<DgColoredOperad>,
    pub su: SuHomotopyOperad,
}

#[derive(Clone, Debug)]
pub enum Object {
    Operad(Operad),
    Complex(ChainComplex),
    Dendrex(Operad, Dendrex),
    Horn(Operad, InnerHorn),
    Morphism(SuMorphism),
}

fn err(loc: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Invalid {
        loc: loc.into(),
        msg: msg.into(),
    }
}

fn rational(s: &str, loc: &str) -> Res<Q> {
    parse_q(s).ok_or_else(|| err(loc, format!("'{s}' is not a rational number")))
}

fn color_index(colors: &[String], name: &str, loc: &str) -> Res<Color> {
    colors
        .iter()
        .position(|c| c == name)
        .ok_or_else(|| err(loc, format!("unknown color '{name}'")))
}

pub fn parse_profile(s: &str, colors: &[String], loc: &str) -> Res<Profile> {
    let (ins, out) = s
        .split_once("->")
        .ok_or_else(|| err(loc, format!("profile '{s}' needs '->'")))?;
    let inputs = ins
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|c| color_index(colors, c, loc))
        .collect::<Res<Vec<_>>>()?;
    Ok(Profile::new(inputs, color_index(colors, out.trim(), loc)?))
}

pub fn profile_str(p: &Profile, colors: &[String]) -> String {
    let ins: Vec<&str> = p.inputs.iter().map(|&c| colors[c].as_str()).collect();
    format!("{}->{}", ins.join(","), colors[p.output])
}

fn label_index(space: &GradedSpace, label: &str, loc: &str) -> Res<usize> {
    space
        .index_of(label)
        .ok_or_else(|| err(loc, format!("no basis vector '{label}'")))
}

fn combo_vec(c: &Combo, space: &GradedSpace, loc: &str) -> Res<Vec<Q>> {
    let mut v = vec![Q::zero(); space.dim()];
    for (label, x) in c {
        v[label_index(space, label, loc)?] += rational(x, loc)?;
    }
    Ok(v)
}

fn combo_sparse(c: &Combo, space: &GradedSpace, loc: &str) -> Res<SparseVec> {
    Ok(combo_vec(c, space, loc)?
        .into_iter()
        .enumerate()
        .filter(|(_, x)| *x != Q::zero())
        .collect())
}

pub fn vec_combo(v: &[Q], space: &GradedSpace) -> Combo {
    v.iter()
        .enumerate()
        .filter(|(_, x)| **x != Q::zero())
        .map(|(i, x)| (space.label(i).to_string(), fmt_q(x)))
        .collect()
}

fn sparse_combo(v: &SparseVec, space: &GradedSpace) -> Combo {
    v.iter()
        .map(|(&i, x)| (space.label(i).to_string(), fmt_q(x)))
        .collect()
}

fn window_of(doc: &Document, o: &Overrides) -> (i32, i32) {
    o.window
        .or_else(|| {
            doc.bounds
                .as_ref()
                .and_then(|b| b.degree_window)
                .map(|[a, b]| (a, b))
        })
        .unwrap_or(DEFAULT_WINDOW)
}

fn vertex_bound_of(doc: &Document, o: &Overrides) -> usize {
    o.vertex_bound
        .or_else(|| doc.bounds.as_ref().and_then(|b| b.vertex_bound))
        .unwrap_or(DEFAULT_VERTEX_BOUND)
}

fn space_of(basis: &[(String, i32)], window: (i32, i32), loc: &str) -> Res<GradedSpace> {
    GradedSpace::new(basis.to_vec(), window).map_err(|e| err(loc, e.to_string()))
}

fn complex_of(
    basis: &[(String, i32)],
    d: &[Entry],
    window: (i32, i32),
    loc: &str,
) -> Res<ChainComplex> {
    let space = space_of(basis, window, loc)?;
    let mut m = Matrix::zero(space.dim(), space.dim());
    for (k, (src, tgt, c)) in d.iter().enumerate() {
        let l = format!("{loc}.d[{k}]");
        let (s, t) = (label_index(&space, src, &l)?, label_index(&space, tgt, &l)?);
        if space.degree(t) != space.degree(s) - 1 {
            return Err(err(
                l,
                format!(
                    "d {src} has degree {} but {tgt} has degree {}",
                    space.degree(s) - 1,
                    space.degree(t)
                ),
            ));
        }
        m.add(t, s, rational(c, &l)?);
    }
    ChainComplex::new(space, m).map_err(|e| err(loc, e.to_string()))
}

fn complex_entries(c: &ChainComplex) -> Vec<Entry> {
    let sp = c.space();
    let mut out: Vec<(usize, usize, Entry)> = c
        .d()
        .entries()
        .map(|(t, s, x)| {
            (
                s,
                t,
                (sp.label(s).to_string(), sp.label(t).to_string(), fmt_q(x)),
            )
        })
        .collect();
    out.sort_by_key(|e| (e.0, e.1));
    out.into_iter().map(|e| e.2).collect()
}

fn require<'a, T>(x: &'a Option<T>, field: &str, kind: Kind) -> Res<&'a T> {
    x.as_ref()
        .ok_or_else(|| err(field, format!("required for kind {kind:?}")))
}

/// Parse a colored tree whose colors are names; every edge must carry one.
pub fn parse_colored_tree(src: &str, colors: &[String], loc: &str) -> Res<(Tree, Vec<Color>)> {
    let (t, names) = parse_tree(src).map_err(|e| err(loc, e.to_string()))?;
    let cs = names
        .iter()
        .enumerate()
        .map(|(e, n)| match n {
            Some(n) => color_index(colors, n, loc),
            None => Err(err(loc, format!("edge {e} has no color"))),
        })
        .collect::<Res<Vec<_>>>()?;
    Ok((t, cs))
}

pub fn colored_tree_str(t: &Tree, colors: &[Color], names: &[String]) -> String {
    t.encode_with(&|e| Some(names[colors[e]].clone()))
}

/// Load a document, resolving operad references relative to `base`.
pub fn load(path: &Path, o: &Overrides) -> Res<Object> {
    let src = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc = Document::from_toml(&src)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    to_object(&doc, &base, o)
}

fn resolve(r: &OperadRef, base: &Path, o: &Overrides, field: &str) -> Res<Operad> {
    let (doc, base) = match r {
        OperadRef::Inline(d) => ((**d).clone(), base.to_path_buf()),
        OperadRef::Path(p) => {
            let full: PathBuf = base.join(p);
            let src = std::fs::read_to_string(&full)
                .map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
            (
                Document::from_toml(&src)?,
                full.parent().map(Path::to_path_buf).unwrap_or_default(),
            )
        }
    };
    match to_object(&doc, &base, o)? {
        Object::Operad(op) => Ok(op),
        _ => Err(err(field, "must refer to an operad")),
    }
}

pub fn to_object(doc: &Document, base: &Path, o: &Overrides) -> Res<Object> {
    let window = window_of(doc, o);
    let vb = vertex_bound_of(doc, o);
    let dg = |p: DgColoredOperad| {
        Object::Operad(Operad {
            su: SuHomotopyOperad::from_dg(&p).with_vertex_bound(vb),
            dg: Some(p),
        })
    };
    match doc.kind {
        Kind::DgOperad => Ok(dg(parse_dg(doc, window)?)),
        Kind::TreeOperad => {
            let src = require(&doc.tree, "tree", doc.kind)?;
            let (t, _) = parse_tree(src).map_err(|e| err("tree", e.to_string()))?;
            Ok(dg(DgColoredOperad::tree_operad(&t)))
        }
        Kind::Endomorphism => {
            let sp = require(&doc.space, "space", doc.kind)?;
            let v = complex_of(&sp.basis, &sp.d, window, "space")?;
            let arity = doc.bounds.as_ref().and_then(|b| b.arity).unwrap_or(2);
            Ok(dg(DgColoredOperad::endomorphism(&v, arity)
                .map_err(|e| err("space", e.to_string()))?))
        }
        Kind::SuOperad => {
            let su = parse_su(doc, window, vb)?;
            Ok(Object::Operad(Operad { dg: None, su }))
        }
        Kind::Complex => {
            let sp = require(&doc.space, "space", doc.kind)?;
            Ok(Object::Complex(complex_of(
                &sp.basis, &sp.d, window, "space",
            )?))
        }
        Kind::Dendrex | Kind::Horn => {
            let op = resolve(require(&doc.operad, "operad", doc.kind)?, base, o, "operad")?;
            let names = op.su.color_names().to_vec();
            let (t, colors) =
                parse_colored_tree(require(&doc.tree, "tree", doc.kind)?, &names, "tree")?;
            let valid: Vec<Key> = keys(&t);
            let mut elements = BTreeMap::new();
            for (k, el) in doc.elements.iter().enumerate() {
                let loc = format!("elements[{k}]");
                let mut s = 0;
                for &v in &el.vertices {
                    if v >= t.n_vertices() {
                        return Err(err(&loc, format!("no vertex {v}")));
                    }
                    s |= bit(v);
                }
                let c = el.cuts.iter().fold(0, |acc, &e| acc | bit(e));
                if !valid.contains(&(s, c)) {
                    return Err(err(&loc, "not a sub-tree with inner cuts"));
                }
                let prof = key_profile(&t, &colors, (s, c));
                let space = op.su.component(&prof).ok_or_else(|| {
                    err(
                        &loc,
                        format!("empty component {}", profile_str(&prof, &names)),
                    )
                })?;
                elements.insert((s, c), combo_vec(&el.value, space, &loc)?);
            }
            if doc.kind == Kind::Dendrex {
                Ok(Object::Dendrex(
                    op,
                    Dendrex {
                        tree: t,
                        colors,
                        elements,
                    },
                ))
            } else {
                let edge = *require(&doc.edge, "edge", doc.kind)?;
                if edge >= t.n_edges() || !t.is_inner(edge) {
                    return Err(err("edge", format!("{edge} is not an inner edge")));
                }
                Ok(Object::Horn(
                    op,
                    InnerHorn {
                        tree: t,
                        colors,
                        edge,
                        elements,
                    },
                ))
            }
        }
        Kind::Morphism => parse_morphism(doc, base, o).map(Object::Morphism),
    }
}

fn parse_dg(doc: &Document, window: (i32, i32)) -> Res<DgColoredOperad> {
    let colors = &doc.colors;
    if colors.is_empty() {
        return Err(err("colors", "at least one color"));
    }
    let mut table = Table::default();
    for (k, c) in doc.components.iter().enumerate() {
        let loc = format!("components[{k}]");
        let p = parse_profile(&c.profile, colors, &loc)?;
        if table.components.contains_key(&p) {
            return Err(err(&loc, format!("profile {} given twice", c.profile)));
        }
        table
            .components
            .insert(p, complex_of(&c.basis, &c.d, window, &loc)?);
    }
    for (c, name) in colors.iter().enumerate() {
        let loc = format!("units.{name}");
        let u = match (table.components.get(&Profile::unit(c)), doc.units.get(name)) {
            (Some(comp), Some(combo)) => combo_vec(combo, comp.space(), &loc)?,
            (Some(comp), None) => vec![Q::zero(); comp.dim()],
            (None, Some(_)) => return Err(err(&loc, "no unary component to hold the unit")),
            (None, None) => vec![],
        };
        table.units.push(u);
    }
    if let Some(extra) = doc.units.keys().find(|k| !colors.contains(k)) {
        return Err(err(format!("units.{extra}"), "unknown color"));
    }
    let component = |p: &Profile, loc: &str| -> Res<GradedSpace> {
        table
            .components
            .get(p)
            .map(|c| c.space().clone())
            .ok_or_else(|| err(loc, format!("no component {}", profile_str(p, colors))))
    };
    let mut comps: BTreeMap<(Profile, usize, Profile), BTreeMap<(usize, usize), SparseVec>> =
        BTreeMap::new();
    for (k, c) in doc.compositions.iter().enumerate() {
        let loc = format!("compositions[{k}]");
        let px = parse_profile(&c.outer, colors, &loc)?;
        let py = parse_profile(&c.inner, colors, &loc)?;
        if c.slot >= px.arity() || px.inputs[c.slot] != py.output {
            return Err(err(
                &loc,
                format!(
                    "cannot insert {} at slot {} of {}",
                    c.inner, c.slot, c.outer
                ),
            ));
        }
        let (sx, sy) = (component(&px, &loc)?, component(&py, &loc)?);
        let (x, y) = (label_index(&sx, &c.x, &loc)?, label_index(&sy, &c.y, &loc)?);
        let pr = px.graft(c.slot, &py);
        let result = if c.result.is_empty() {
            SparseVec::new()
        } else {
            combo_sparse(&c.result, &component(&pr, &loc)?, &loc)?
        };
        comps
            .entry((px, c.slot, py))
            .or_default()
            .insert((x, y), result);
    }
    table.comps = comps;
    for (k, a) in doc.actions.iter().enumerate() {
        let loc = format!("actions[{k}]");
        let p = parse_profile(&a.profile, colors, &loc)?;
        let mut sorted = a.perm.clone();
        sorted.sort_unstable();
        if sorted != (0..p.arity()).collect::<Vec<_>>() {
            return Err(err(&loc, "perm is not a permutation of the inputs"));
        }
        let src = component(&p, &loc)?;
        let tgt = component(&p.permuted(&a.perm), &loc)?;
        let mut m = Matrix::zero(tgt.dim(), src.dim());
        for (s, t, c) in &a.entries {
            m.add(
                label_index(&tgt, t, &loc)?,
                label_index(&src, s, &loc)?,
                rational(c, &loc)?,
            );
        }
        table.actions.insert((p, a.perm.clone()), m);
    }
    table.fill_unit_laws();
    DgColoredOperad::from_table(colors.clone(), table).map_err(|e| err("components", e.to_string()))
}

fn parse_su(doc: &Document, window: (i32, i32), vb: usize) -> Res<SuHomotopyOperad> {
    let colors = &doc.colors;
    let mut table = SuTable::default();
    for (k, c) in doc.components.iter().enumerate() {
        let loc = format!("components[{k}]");
        if !c.d.is_empty() {
            return Err(err(
                &loc,
                "an su operad takes its differential from γ on corollas",
            ));
        }
        let p = parse_profile(&c.profile, colors, &loc)?;
        table
            .components
            .insert(p, space_of(&c.basis, window, &loc)?);
    }
    for (c, name) in colors.iter().enumerate() {
        let loc = format!("units.{name}");
        let u = match (table.components.get(&Profile::unit(c)), doc.units.get(name)) {
            (Some(sp), Some(combo)) => combo_vec(combo, sp, &loc)?,
            (Some(sp), None) => vec![Q::zero(); sp.dim()],
            (None, Some(_)) => return Err(err(&loc, "no unary component to hold the unit")),
            (None, None) => vec![],
        };
        table.units.push(u);
    }
    for (k, g) in doc.gamma.iter().enumerate() {
        let loc = format!("gamma[{k}]");
        let (key, idx, out) = tree_entry(
            g,
            colors,
            &|p| table.components.get(p).cloned(),
            &|p| table.components.get(p).cloned(),
            &loc,
        )?;
        table.gamma.entry(key).or_default().insert(idx, out);
    }
    SuHomotopyOperad::from_table(colors.clone(), table, vb)
        .map_err(|e| err("components", e.to_string()))
}

/// (numeric tree key, vertex basis indices, result) for a γ-like entry.
fn tree_entry(
    g: &TreeEntryDoc,
    colors: &[String],
    src: &dyn Fn(&Profile) -> Option<GradedSpace>,
    tgt: &dyn Fn(&Profile) -> Option<GradedSpace>,
    loc: &str,
) -> Res<(String, Vec<usize>, SparseVec)> {
    let (t, cs) = parse_colored_tree(&g.tree, colors, loc)?;
    let ct = ColoredTree {
        tree: t,
        colors: cs,
    };
    if g.inputs.len() != ct.tree.n_vertices() {
        return Err(err(
            loc,
            format!(
                "{} inputs for {} vertices",
                g.inputs.len(),
                ct.tree.n_vertices()
            ),
        ));
    }
    let mut idx = Vec::new();
    for (v, label) in g.inputs.iter().enumerate() {
        let p = vertex_profile(&ct, v);
        let sp =
            src(&p).ok_or_else(|| err(loc, format!("no component {}", profile_str(&p, colors))))?;
        idx.push(label_index(&sp, label, loc)?);
    }
    let p = tree_profile(&ct);
    let out = match tgt(&p) {
        Some(sp) => combo_sparse(&g.result, &sp, loc)?,
        None if g.result.is_empty() => SparseVec::new(),
        None => {
            return Err(err(
                loc,
                format!("no component {}", profile_str(&p, colors)),
            ))
        }
    };
    Ok((ct.planar_encoding(), idx, out))
}

fn parse_morphism(doc: &Document, base: &Path, o: &Overrides) -> Res<SuMorphism> {
    let source = resolve(require(&doc.source, "source", doc.kind)?, base, o, "source")?;
    if doc.identity {
        return Ok(SuMorphism::identity(&source.su));
    }
    let target = resolve(require(&doc.target, "target", doc.kind)?, base, o, "target")?;
    let (sn, tn) = (
        source.su.color_names().to_vec(),
        target.su.color_names().to_vec(),
    );
    let color_map = sn
        .iter()
        .map(|c| {
            let loc = format!("color_map.{c}");
            let t = doc
                .color_map
                .get(c)
                .ok_or_else(|| err(&loc, "unmapped color"))?;
            color_index(&tn, t, &loc)
        })
        .collect::<Res<Vec<_>>>()?;
    let image = |p: &Profile| {
        Profile::new(
            p.inputs.iter().map(|&c| color_map[c]).collect(),
            color_map[p.output],
        )
    };
    let mut maps = BTreeMap::new();
    for (k, m) in doc.maps.iter().enumerate() {
        let loc = format!("maps[{k}]");
        let p = parse_profile(&m.profile, &sn, &loc)?;
        let ip = image(&p);
        let ss = source
            .su
            .component(&p)
            .ok_or_else(|| err(&loc, "empty source component"))?;
        let ts = target
            .su
            .component(&ip)
            .ok_or_else(|| err(&loc, "empty target component"))?;
        let mut mat = Matrix::zero(ts.dim(), ss.dim());
        for (s, t, c) in &m.entries {
            let (i, j) = (label_index(ts, t, &loc)?, label_index(ss, s, &loc)?);
            if ts.degree(i) != ss.degree(j) {
                return Err(err(&loc, format!("{s} ↦ {t} changes degree")));
            }
            mat.add(i, j, rational(c, &loc)?);
        }
        maps.insert(p, mat);
    }
    if let (Some(sd), Some(td), true) = (&source.dg, &target.dg, doc.higher.is_empty()) {
        let f = OperadMorphism::from_table(sd, td, color_map, maps)
            .map_err(|e| err("maps", e.to_string()))?;
        let mut m = SuMorphism::from_dg(&f);
        m.source = source.su;
        m.target = target.su;
        return Ok(m);
    }
    let mut f1: BTreeMap<Profile, Matrix> = source
        .su
        .all_profiles()
        .into_iter()
        .map(|p| {
            let z = Matrix::zero(target.su.dim(&image(&p)), source.su.dim(&p));
            (p, z)
        })
        .collect();
    f1.extend(maps);
    let mut higher: BTreeMap<String, MultiMap> = BTreeMap::new();
    for (k, g) in doc.higher.iter().enumerate() {
        let loc = format!("higher[{k}]");
        let (key, idx, out) = tree_entry(
            g,
            &sn,
            &|p| source.su.component(p).cloned(),
            &|p| target.su.component(&image(p)).cloned(),
            &loc,
        )?;
        higher.entry(key).or_default().insert(idx, out);
    }
    Ok(SuMorphism {
        source: source.su,
        target: target.su,
        color_map,
        f1,
        higher,
    })
}

// serialization

fn bounds(
    window: Option<(i32, i32)>,
    vertex_bound: Option<usize>,
    arity: Option<usize>,
) -> Option<Bounds> {
    Some(Bounds {
        arity,
        degree_window: window.map(|(a, b)| [a, b]),
        vertex_bound,
        level: None,
    })
}

fn space_basis(sp: &GradedSpace) -> Vec<(String, i32)> {
    sp.basis().to_vec()
}

pub fn complex_doc(c: &ChainComplex) -> Document {
    Document {
        kind: Kind::Complex,
        bounds: bounds(Some(c.space().window()), None, None),
        space: Some(SpaceDoc {
            basis: space_basis(c.space()),
            d: complex_entries(c),
        }),
        ..Document::default()
    }
}

pub fn endomorphism_doc(v: &ChainComplex, arity: usize) -> Document {
    Document {
        kind: Kind::Endomorphism,
        bounds: bounds(Some(v.space().window()), None, Some(arity)),
        space: Some(SpaceDoc {
            basis: space_basis(v.space()),
            d: complex_entries(v),
        }),
        ..Document::default()
    }
}

pub fn dg_doc(p: &DgColoredOperad, vertex_bound: Option<usize>) -> Document {
    if let Some(t) = p.tree() {
        return Document {
            kind: Kind::TreeOperad,
            tree: Some(t.planar_encoding()),
            bounds: vertex_bound.and_then(|v| bounds(None, Some(v), None)),
            ..Document::default()
        };
    }
    let names = p.color_names().to_vec();
    let table = p.to_table();
    let ps = |q: &Profile| profile_str(q, &names);
    let components = table
        .components
        .iter()
        .map(|(q, c)| ComponentDoc {
            profile: ps(q),
            basis: space_basis(c.space()),
            d: complex_entries(c),
        })
        .collect();
    let units = names
        .iter()
        .enumerate()
        .filter_map(|(c, n)| {
            let comp = table.components.get(&Profile::unit(c))?;
            let u = vec_combo(&table.units[c], comp.space());
            (!u.is_empty()).then(|| (n.clone(), u))
        })
        .collect();
    let mut compositions = Vec::new();
    for ((px, i, py), entries) in &table.comps {
        let (sx, sy) = (table.components[px].space(), table.components[py].space());
        let pr = px.graft(*i, py);
        for (&(x, y), r) in entries {
            let result = match table.components.get(&pr) {
                Some(c) => sparse_combo(r, c.space()),
                None => vec![],
            };
            compositions.push(CompositionDoc {
                outer: ps(px),
                slot: *i,
                inner: ps(py),
                x: sx.label(x).to_string(),
                y: sy.label(y).to_string(),
                result,
            });
        }
    }
    let actions = table
        .actions
        .iter()
        .map(|((q, perm), m)| {
            let src = table.components[q].space();
            let tgt = table.components[&q.permuted(perm)].space();
            let mut entries: Vec<(usize, usize, Entry)> = m
                .entries()
                .map(|(i, j, x)| {
                    (
                        j,
                        i,
                        (src.label(j).to_string(), tgt.label(i).to_string(), fmt_q(x)),
                    )
                })
                .collect();
            entries.sort_by_key(|e| (e.0, e.1));
            ActionDoc {
                profile: ps(q),
                perm: perm.clone(),
                entries: entries.into_iter().map(|e| e.2).collect(),
            }
        })
        .collect();
    Document {
        kind: Kind::DgOperad,
        colors: names.clone(),
        bounds: bounds(Some(p.window()), vertex_bound, None),
        units,
        components,
        compositions,
        actions,
        ..Document::default()
    }
}

fn numeric_tree_to_names(key: &str, names: &[String]) -> Res<(Tree, Vec<Color>, String)> {
    let (t, cs) = parse_tree(key).map_err(|e| err("gamma", e.to_string()))?;
    let cs: Vec<Color> = cs
        .into_iter()
        .map(|c| {
            c.and_then(|s| s.parse().ok())
                .ok_or_else(|| err("gamma", format!("bad key {key}")))
        })
        .collect::<Res<_>>()?;
    let s = colored_tree_str(&t, &cs, names);
    Ok((t, cs, s))
}

pub fn operad_doc(op: &Operad) -> Res<Document> {
    if let Some(dg) = &op.dg {
        let vb = op.su.vertex_bound();
        return Ok(dg_doc(dg, (vb != DEFAULT_VERTEX_BOUND).then_some(vb)));
    }
    let p = &op.su;
    let table = p
        .table()
        .ok_or_else(|| err("operad", "only stored su operads can be written out"))?;
    let names = p.color_names().to_vec();
    let components = table
        .components
        .iter()
        .map(|(q, sp)| ComponentDoc {
            profile: profile_str(q, &names),
            basis: space_basis(sp),
            d: vec![],
        })
        .collect();
    let units = names
        .iter()
        .enumerate()
        .filter_map(|(c, n)| {
            let sp = table.components.get(&Profile::unit(c))?;
            let u = vec_combo(&table.units[c], sp);
            (!u.is_empty()).then(|| (n.clone(), u))
        })
        .collect();
    let mut gamma = Vec::new();
    for (key, mm) in &table.gamma {
        let (t, cs, s) = numeric_tree_to_names(key, &names)?;
        let ct = ColoredTree {
            tree: t,
            colors: cs,
        };
        let out = tree_profile(&ct);
        for (idx, r) in mm {
            let inputs = idx
                .iter()
                .enumerate()
                .map(|(v, &i)| {
                    table.components[&vertex_profile(&ct, v)]
                        .label(i)
                        .to_string()
                })
                .collect();
            let result = table
                .components
                .get(&out)
                .map_or_else(Vec::new, |sp| sparse_combo(r, sp));
            gamma.push(TreeEntryDoc {
                tree: s.clone(),
                inputs,
                result,
            });
        }
    }
    let window = table
        .components
        .values()
        .map(GradedSpace::window)
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)));
    Ok(Document {
        kind: Kind::SuOperad,
        colors: names,
        bounds: bounds(window, Some(p.vertex_bound()), None),
        units,
        components,
        gamma,
        ..Document::default()
    })
}

fn elements_doc(
    su: &SuHomotopyOperad,
    t: &Tree,
    colors: &[Color],
    elements: &BTreeMap<Key, Vec<Q>>,
) -> Vec<ElementDoc> {
    elements
        .iter()
        .filter_map(|(&(s, c), v)| {
            let sp = su.component(&key_profile(t, colors, (s, c)))?;
            Some(ElementDoc {
                vertices: bits(s).collect(),
                cuts: bits(c).collect(),
                value: vec_combo(v, sp),
            })
        })
        .collect()
}

pub fn dendrex_doc(op: OperadRef, su: &SuHomotopyOperad, x: &Dendrex) -> Document {
    Document {
        kind: Kind::Dendrex,
        tree: Some(colored_tree_str(&x.tree, &x.colors, su.color_names())),
        elements: elements_doc(su, &x.tree, &x.colors, &x.elements),
        operad: Some(op),
        ..Document::default()
    }
}

pub fn horn_doc(op: OperadRef, su: &SuHomotopyOperad, h: &InnerHorn) -> Document {
    Document {
        kind: Kind::Horn,
        tree: Some(colored_tree_str(&h.tree, &h.colors, su.color_names())),
        edge: Some(h.edge),
        elements: elements_doc(su, &h.tree, &h.colors, &h.elements),
        operad: Some(op),
        ..Document::default()
    }
}

pub fn morphism_doc(f: &SuMorphism, source: Document, target: Document) -> Res<Document> {
    let (sn, tn) = (f.source.color_names(), f.target.color_names());
    let color_map = sn
        .iter()
        .enumerate()
        .map(|(c, n)| (n.clone(), tn[f.color_map[c]].clone()))
        .collect();
    let mut maps = Vec::new();
    for (p, m) in &f.f1 {
        if m.is_zero() {
            continue;
        }
        let (Some(ss), Some(ts)) = (
            f.source.component(p),
            f.target.component(&f.image_profile(p)),
        ) else {
            continue;
        };
        let mut entries: Vec<(usize, usize, Entry)> = m
            .entries()
            .map(|(i, j, x)| {
                (
                    j,
                    i,
                    (ss.label(j).to_string(), ts.label(i).to_string(), fmt_q(x)),
                )
            })
            .collect();
        entries.sort_by_key(|e| (e.0, e.1));
        maps.push(MapDoc {
            profile: profile_str(p, sn),
            entries: entries.into_iter().map(|e| e.2).collect(),
        });
    }
    let mut higher = Vec::new();
    for (key, mm) in &f.higher {
        let (t, cs, s) = numeric_tree_to_names(key, sn)?;
        let ct = ColoredTree {
            tree: t,
            colors: cs,
        };
        let out = f.image_profile(&tree_profile(&ct));
        for (idx, r) in mm {
            let inputs = idx
                .iter()
                .enumerate()
                .map(|(v, &i)| {
                    f.source
                        .component(&vertex_profile(&ct, v))
                        .map_or(String::new(), |sp| sp.label(i).to_string())
                })
                .collect();
            let result = f
                .target
                .component(&out)
                .map_or_else(Vec::new, |sp| sparse_combo(r, sp));
            higher.push(TreeEntryDoc {
                tree: s.clone(),
                inputs,
                result,
            });
        }
    }
    Ok(Document {
        kind: Kind::Morphism,
        color_map,
        maps,
        higher,
        source: Some(OperadRef::Inline(Box::new(source))),
        target: Some(OperadRef::Inline(Box::new(target))),
        ..Document::default()
    })
}

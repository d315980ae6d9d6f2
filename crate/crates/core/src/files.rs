//! JSON groupoid and kernel files.
//!
//! A groupoid file is either the explicit form
//! `{units: [{id, weight}], arrows: [{id, src, tgt, inv}], compose: [[g, h, gh]]}`
//! or a generator form tagged by `type`: `pair`, `full_relation`, `group`,
//! `bundle`, `product`, `union`, `restrict`. Weights are `"p/q"` strings,
//! integers or decimals, all read exactly.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use num::complex::Complex;
use num::{BigRational, One};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::constructions::finite::{cyclic_table, dihedral_table, torus_table};
use crate::error::{Error, Result};
use crate::groupoid::{
    build_group_bundle, build_group_groupoid, build_pair_groupoid, disjoint_union, full_relation, product, restrict,
    Arrow, Bisection, FiniteGroupoid, GroupoidRef, Unit, UnitSet,
};
use crate::kernel::{BisectionMeasure, Kernel, Orientation};
use crate::scalar::{format_rational, parse_rational};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Json(serde_json::Number),
}

impl Number {
    pub fn to_rational(&self) -> Result<BigRational> {
        let text = match self {
            Number::Text(t) => t.clone(),
            Number::Json(n) => n.to_string(),
        };
        parse_rational(&text).ok_or_else(|| Error::Parse(format!("`{text}` is not a rational number")))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitDef {
    pub id: String,
    pub weight: Number,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowDef {
    pub id: String,
    pub src: String,
    pub tgt: String,
    pub inv: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitDef {
    pub units: Vec<UnitDef>,
    pub arrows: Vec<ArrowDef>,
    pub compose: Vec<[String; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleUnit {
    pub id: String,
    pub weight: Number,
    #[serde(default)]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnionPart {
    pub groupoid: GroupoidDef,
    /// Defaults to `1/len`.
    #[serde(default)]
    pub scale: Option<Number>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupoidDef {
    Explicit {
        units: Vec<UnitDef>,
        arrows: Vec<ArrowDef>,
        compose: Vec<[String; 3]>,
    },
    Pair {
        classes: Vec<Vec<UnitDef>>,
    },
    FullRelation {
        n: usize,
    },
    Group {
        #[serde(default)]
        table: Option<Vec<Vec<usize>>>,
        #[serde(default)]
        preset: Option<String>,
        #[serde(default)]
        weight: Option<Number>,
    },
    Bundle {
        units: Vec<BundleUnit>,
    },
    Product {
        parts: Vec<GroupoidDef>,
    },
    Union {
        parts: Vec<UnionPart>,
    },
    Restrict {
        groupoid: Box<GroupoidDef>,
        units: Vec<String>,
    },
}

/// Multiplication table of a named group: `Z_n`, `Z_n^2` or `D_n`.
pub fn preset_table(name: &str) -> Result<Vec<Vec<usize>>> {
    let bad = || Error::Parse(format!("unknown group preset `{name}`; expected Z_n, Z_n^2 or D_n"));
    if name == "free_ball" {
        return Err(Error::InvalidGroupoid(
            "a free-group ball is not a finite groupoid with a group law; use `reproduce free-group`".into(),
        ));
    }
    let size = |s: &str| s.parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(bad);
    if let Some(rest) = name.strip_prefix("Z_") {
        return match rest.strip_suffix("^2") {
            Some(n) => Ok(torus_table(size(n)?)),
            None => Ok(cyclic_table(size(rest)?)),
        };
    }
    if let Some(rest) = name.strip_prefix("D_") {
        let n = size(rest)?;
        if n < 2 {
            return Err(bad());
        }
        return Ok(dihedral_table(n));
    }
    Err(bad())
}

fn table_of(table: Option<Vec<Vec<usize>>>, preset: Option<String>) -> Result<Vec<Vec<usize>>> {
    match (table, preset) {
        (Some(t), None) => Ok(t),
        (None, Some(p)) => preset_table(&p),
        _ => Err(Error::Parse("give exactly one of `table` and `preset`".into())),
    }
}

fn build_explicit(def: ExplicitDef) -> Result<FiniteGroupoid> {
    let unit_index: HashMap<&str, usize> = def.units.iter().enumerate().map(|(i, u)| (u.id.as_str(), i)).collect();
    let arrow_index: HashMap<&str, usize> =
        def.arrows.iter().enumerate().map(|(i, a)| (a.id.as_str(), i)).collect();
    let unit = |id: &str| unit_index.get(id).copied().ok_or_else(|| Error::UnknownUnit(id.to_string()));
    let arrow = |id: &str| arrow_index.get(id).copied().ok_or_else(|| Error::UnknownArrow(id.to_string()));
    let units = def
        .units
        .iter()
        .map(|u| Ok(Unit { id: u.id.clone(), weight: u.weight.to_rational()? }))
        .collect::<Result<Vec<_>>>()?;
    let arrows = def
        .arrows
        .iter()
        .map(|a| Ok(Arrow { id: a.id.clone(), src: unit(&a.src)?, tgt: unit(&a.tgt)? }))
        .collect::<Result<Vec<_>>>()?;
    let inverse = def.arrows.iter().map(|a| arrow(&a.inv)).collect::<Result<Vec<_>>>()?;
    let compose = def
        .compose
        .iter()
        .map(|[g, h, gh]| Ok((arrow(g)?, arrow(h)?, arrow(gh)?)))
        .collect::<Result<Vec<_>>>()?;
    FiniteGroupoid::from_table(units, arrows, inverse, compose)
}

/// Builds the groupoid a definition describes without checking the axioms.
pub fn build_groupoid(def: GroupoidDef) -> Result<FiniteGroupoid> {
    match def {
        GroupoidDef::Explicit { units, arrows, compose } => build_explicit(ExplicitDef { units, arrows, compose }),
        GroupoidDef::Pair { classes } => {
            let classes = classes
                .into_iter()
                .map(|c| c.into_iter().map(|u| Ok((u.id, u.weight.to_rational()?))).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            build_pair_groupoid(&classes)
        }
        GroupoidDef::FullRelation { n } => {
            if n == 0 {
                return Err(Error::BadParameters("full relation needs n >= 1".into()));
            }
            Ok(full_relation(n))
        }
        GroupoidDef::Group { table, preset, weight } => {
            let weight = weight.map(|w| w.to_rational()).transpose()?.unwrap_or_else(BigRational::one);
            build_group_groupoid(&table_of(table, preset)?, weight)
        }
        GroupoidDef::Bundle { units } => {
            let base = units
                .into_iter()
                .map(|u| Ok((u.id, u.weight.to_rational()?, table_of(u.table, u.preset)?)))
                .collect::<Result<Vec<_>>>()?;
            build_group_bundle(&base)
        }
        GroupoidDef::Product { parts } => {
            let mut parts = parts.into_iter();
            let first = parts.next().ok_or_else(|| Error::Parse("product needs at least one part".into()))?;
            let mut acc: GroupoidRef = Arc::new(build_groupoid(first)?);
            for part in parts {
                let right: GroupoidRef = Arc::new(build_groupoid(part)?);
                acc = Arc::new(product(&acc, &right));
            }
            Arc::try_unwrap(acc).map_err(|_| Error::InvalidGroupoid("shared product".into()))
        }
        GroupoidDef::Union { parts } => {
            let len = parts.len();
            let parts = parts
                .into_iter()
                .map(|p| {
                    let scale = match p.scale {
                        Some(s) => s.to_rational()?,
                        None => BigRational::new(1.into(), (len as i64).into()),
                    };
                    Ok((Arc::new(build_groupoid(p.groupoid)?) as GroupoidRef, scale))
                })
                .collect::<Result<Vec<_>>>()?;
            disjoint_union(&parts)
        }
        GroupoidDef::Restrict { groupoid, units } => {
            let g: GroupoidRef = Arc::new(build_groupoid(*groupoid)?);
            let set = unit_set(&g, &units)?;
            restrict(&g, &set)
        }
    }
}

/// Parses a groupoid file; the explicit form may omit `type`.
pub fn parse_groupoid(text: &str) -> Result<FiniteGroupoid> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let def = if value.get("type").is_some() {
        serde_json::from_value::<GroupoidDef>(value)
    } else {
        serde_json::from_value::<ExplicitDef>(value)
            .map(|e| GroupoidDef::Explicit { units: e.units, arrows: e.arrows, compose: e.compose })
    }
    .map_err(|e| Error::Parse(e.to_string()))?;
    build_groupoid(def)
}

/// Parses and validates; any axiom or measure violation is an error.
pub fn load_groupoid_str(text: &str) -> Result<GroupoidRef> {
    let g = parse_groupoid(text)?;
    let violations = g.validate();
    if let Some(first) = violations.first() {
        return Err(Error::InvalidGroupoid(format!("{first} ({} violation(s))", violations.len())));
    }
    Ok(Arc::new(g))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn load_groupoid(path: &Path) -> Result<GroupoidRef> {
    load_groupoid_str(&read_file(path)?)
}

/// Unit ids to a [`UnitSet`].
pub fn unit_set(g: &FiniteGroupoid, ids: &[impl AsRef<str>]) -> Result<UnitSet> {
    let members = ids
        .iter()
        .map(|id| g.unit_index(id.as_ref()).ok_or_else(|| Error::UnknownUnit(id.as_ref().to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitSet::new(members))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ValueDef {
    Real(Number),
    Complex { re: Number, im: Number },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectionItem {
    pub arrows: Vec<String>,
    pub weight: Number,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelDef {
    Uniform,
    UnitIndicator,
    /// Uniform on the listed arrows.
    UniformOn {
        arrows: Vec<String>,
    },
    Matrix {
        data: Vec<Vec<Number>>,
        #[serde(default)]
        orientation: Option<String>,
    },
    Bisections {
        items: Vec<BisectionItem>,
    },
    Explicit {
        values: BTreeMap<String, ValueDef>,
    },
}

/// A kernel read from a file; complex values only arise from the explicit form.
#[derive(Debug, Clone)]
pub enum LoadedKernel {
    Real(Kernel<BigRational>),
    Complex(Kernel<Complex<BigRational>>),
}

impl LoadedKernel {
    /// The real kernel, or `NegativeValue` naming the first non-real arrow.
    pub fn into_real(self) -> Result<Kernel<BigRational>> {
        match self {
            LoadedKernel::Real(k) => Ok(k),
            LoadedKernel::Complex(k) => {
                let bad = k.support().find(|(_, v)| !num::Zero::is_zero(&v.im)).map(|(g, _)| g);
                match bad {
                    Some(g) => Err(Error::NegativeValue(g)),
                    None => Ok(k.map(|v| v.re.clone())),
                }
            }
        }
    }
}

fn arrow_of(g: &FiniteGroupoid, id: &str) -> Result<usize> {
    g.arrow_index(id).ok_or_else(|| Error::UnknownArrow(id.to_string()))
}

pub fn build_kernel(g: &GroupoidRef, def: KernelDef) -> Result<LoadedKernel> {
    let real = |k| Ok(LoadedKernel::Real(k));
    match def {
        KernelDef::Uniform => real(Kernel::uniform_field(g.clone())),
        KernelDef::UnitIndicator => real(Kernel::unit_indicator(g.clone())),
        KernelDef::UniformOn { arrows } => {
            let mut ids = arrows.iter().map(|id| arrow_of(g, id)).collect::<Result<Vec<_>>>()?;
            ids.sort_unstable();
            ids.dedup();
            if ids.is_empty() {
                return Err(Error::Parse("uniform_on needs at least one arrow".into()));
            }
            let w = BigRational::new(1.into(), (ids.len() as i64).into());
            let values = ids.into_iter().map(|a| (a, w.clone())).collect();
            real(Kernel::new(g.clone(), values)?)
        }
        KernelDef::Matrix { data, orientation } => {
            let orientation: Orientation = orientation.as_deref().unwrap_or("auto").parse()?;
            let matrix = data
                .iter()
                .map(|row| row.iter().map(Number::to_rational).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            real(Kernel::field_from_matrix(g.clone(), &matrix, orientation)?)
        }
        KernelDef::Bisections { items } => {
            let items = items
                .into_iter()
                .map(|item| {
                    let arrows = item.arrows.iter().map(|id| arrow_of(g, id)).collect::<Result<Vec<_>>>()?;
                    Ok((Bisection::new(g, arrows)?, item.weight.to_rational()?))
                })
                .collect::<Result<Vec<_>>>()?;
            real(Kernel::field_from_bisections(g.clone(), &BisectionMeasure::new(items)?)?)
        }
        KernelDef::Explicit { values } => {
            let mut complex = false;
            let mut parsed = BTreeMap::new();
            for (id, v) in values {
                let a = arrow_of(g, &id)?;
                let z = match v {
                    ValueDef::Real(x) => Complex::new(x.to_rational()?, BigRational::from_integer(0.into())),
                    ValueDef::Complex { re, im } => {
                        complex = true;
                        Complex::new(re.to_rational()?, im.to_rational()?)
                    }
                };
                parsed.insert(a, z);
            }
            let k = Kernel::new(g.clone(), parsed)?;
            if complex {
                Ok(LoadedKernel::Complex(k))
            } else {
                Ok(LoadedKernel::Real(k.map(|v| v.re.clone())))
            }
        }
    }
}

pub fn load_kernel_str(g: &GroupoidRef, text: &str) -> Result<LoadedKernel> {
    let def: KernelDef = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    build_kernel(g, def)
}

pub fn load_kernel(g: &GroupoidRef, path: &Path) -> Result<LoadedKernel> {
    load_kernel_str(g, &read_file(path)?)
}

/// The explicit form of any groupoid.
pub fn groupoid_to_json(g: &FiniteGroupoid) -> Value {
    let units: Vec<Value> =
        g.units().iter().map(|u| json!({"id": u.id, "weight": format_rational(&u.weight)})).collect();
    let arrows: Vec<Value> = g
        .arrows()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            json!({
                "id": a.id,
                "src": g.unit(a.src).id,
                "tgt": g.unit(a.tgt).id,
                "inv": g.arrow(g.inverse(i)).id,
            })
        })
        .collect();
    let mut compose = Vec::new();
    for a in 0..g.arrow_count() {
        for &b in g.target_fiber(g.src(a)) {
            if let Some(ab) = g.compose(a, b) {
                compose.push(json!([g.arrow(a).id, g.arrow(b).id, g.arrow(ab).id]));
            }
        }
    }
    json!({"units": units, "arrows": arrows, "compose": compose})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    const TWO_POINT: &str = r#"{
        "units": [{"id": "a", "weight": "1/2"}, {"id": "b", "weight": 0.5}],
        "arrows": [
            {"id": "ea", "src": "a", "tgt": "a", "inv": "ea"},
            {"id": "eb", "src": "b", "tgt": "b", "inv": "eb"},
            {"id": "ab", "src": "b", "tgt": "a", "inv": "ba"},
            {"id": "ba", "src": "a", "tgt": "b", "inv": "ab"}
        ],
        "compose": [
            ["ea","ea","ea"], ["eb","eb","eb"], ["ea","ab","ab"], ["ab","eb","ab"],
            ["eb","ba","ba"], ["ba","ea","ba"], ["ab","ba","ea"], ["ba","ab","eb"]
        ]
    }"#;

    #[test]
    fn explicit_form_round_trips() {
        let g = load_groupoid_str(TWO_POINT).unwrap();
        assert_eq!(g.unit_count(), 2);
        assert_eq!(g.weight(1), &rational(1, 2));
        let again = load_groupoid_str(&groupoid_to_json(&g).to_string()).unwrap();
        assert!(again.same_structure(&g));
    }

    #[test]
    fn measure_violation_is_refused() {
        let bad = TWO_POINT.replace("0.5", "\"1/3\"");
        let g = parse_groupoid(&bad).unwrap();
        assert!(!g.validate().is_empty());
        assert!(matches!(load_groupoid_str(&bad), Err(Error::InvalidGroupoid(_))));
    }

    #[test]
    fn generator_forms() {
        let g = load_groupoid_str(r#"{"type": "group", "preset": "D_4"}"#).unwrap();
        assert_eq!(g.arrow_count(), 8);
        let g = load_groupoid_str(
            r#"{"type": "union", "parts": [
                {"groupoid": {"type": "full_relation", "n": 2}},
                {"groupoid": {"type": "full_relation", "n": 3}}
            ]}"#,
        )
        .unwrap();
        assert_eq!(g.arrow_count(), 13);
        assert!(g.is_normalized());
        let g = load_groupoid_str(
            r#"{"type": "product", "parts": [{"type": "group", "preset": "Z_2"}, {"type": "full_relation", "n": 2}]}"#,
        )
        .unwrap();
        assert_eq!(g.arrow_count(), 8);
        let g = load_groupoid_str(
            r#"{"type": "restrict", "groupoid": {"type": "full_relation", "n": 4}, "units": ["1", "2"]}"#,
        )
        .unwrap();
        assert_eq!(g.arrow_count(), 4);
        let g = load_groupoid_str(
            r#"{"type": "bundle", "units": [{"id": "x", "weight": "1/3", "preset": "Z_3"}, {"id": "y", "weight": "2/3", "table": [[0]]}]}"#,
        )
        .unwrap();
        assert_eq!(g.arrow_count(), 4);
        assert!(matches!(
            load_groupoid_str(r#"{"type": "group", "preset": "free_ball"}"#),
            Err(Error::InvalidGroupoid(_))
        ));
        assert!(matches!(load_groupoid_str(r#"{"type": "group", "preset": "Q_8"}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn kernel_forms() {
        let g = load_groupoid_str(r#"{"type": "full_relation", "n": 2}"#).unwrap();
        let k = load_kernel_str(&g, r#"{"type": "uniform"}"#).unwrap().into_real().unwrap();
        assert!(k.is_probability_field());
        let k = load_kernel_str(&g, r#"{"type": "matrix", "data": [["3/4", 0.5], ["1/4", "1/2"]]}"#)
            .unwrap()
            .into_real()
            .unwrap();
        assert!(k.is_probability_field());
        let swap = r#"{"type": "bisections", "items": [{"arrows": ["(1,2)", "(2,1)"], "weight": "1/2"},
                                                        {"arrows": ["(1,1)", "(2,2)"], "weight": "1/2"}]}"#;
        let k = load_kernel_str(&g, swap).unwrap().into_real().unwrap();
        assert_eq!(k, Kernel::uniform_field(g.clone()));
        let c = load_kernel_str(&g, r#"{"type": "explicit", "values": {"(1,2)": {"re": 1, "im": "-1/2"}}}"#).unwrap();
        assert!(matches!(c, LoadedKernel::Complex(_)));
        assert!(matches!(
            load_kernel_str(&g, r#"{"type": "explicit", "values": {"nope": 1}}"#),
            Err(Error::UnknownArrow(_))
        ));
    }
}

//! Finite discrete measured groupoids.
//!
//! A [`FiniteGroupoid`] carries a positive rational weight on every unit and
//! a composition law. Named constructors (pair groupoids, groups, products,
//! unions, restrictions) compute composition implicitly; groupoids read from
//! explicit data keep a table.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num::{BigRational, BigUint, One, Signed};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, GroupAxiom, Result};
use crate::scalar::format_rational;

pub type GroupoidRef = Arc<FiniteGroupoid>;

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub id: String,
    pub weight: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    pub src: usize,
    pub tgt: usize,
}

#[derive(Debug, Clone)]
struct GroupFiber {
    offset: usize,
    table: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
enum Law {
    /// Explicit `(g, h) -> gh` table.
    Table(HashMap<(usize, usize), usize>),
    /// Principal groupoid: `(tgt, src) -> arrow`, so `(x,y)(y,z) = (x,z)`.
    Principal(HashMap<(usize, usize), usize>),
    /// Group bundle, one multiplication table per unit.
    Groups(Vec<GroupFiber>),
    Product {
        left: GroupoidRef,
        right: GroupoidRef,
    },
    Union {
        parts: Vec<GroupoidRef>,
        arrow_offsets: Vec<usize>,
        arrow_part: Vec<usize>,
    },
    Restriction {
        parent: GroupoidRef,
        to_parent: Vec<usize>,
        from_parent: HashMap<usize, usize>,
    },
}

#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    units: Vec<Unit>,
    arrows: Vec<Arrow>,
    inverse: Vec<usize>,
    unit_arrow: Vec<usize>,
    law: Law,
    normalized: bool,
    source_fibers: Vec<Vec<usize>>,
    target_fibers: Vec<Vec<usize>>,
    metadata: BTreeMap<String, String>,
}

/// One violated groupoid or measure axiom, with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveWeight { unit: String },
    IdentityEndpoints { unit: String },
    InverseEndpoints { arrow: String },
    InverseLaw { arrow: String },
    RightIdentity { arrow: String },
    LeftIdentity { arrow: String },
    MissingComposite { g: String, h: String },
    SpuriousComposite { g: String, h: String },
    CompositeEndpoints { g: String, h: String },
    Associativity { g: String, h: String, k: String },
    MeasureNotPreserved { arrow: String, src_weight: String, tgt_weight: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveWeight { unit } => write!(f, "unit {unit}: weight is not positive"),
            Violation::IdentityEndpoints { unit } => {
                write!(f, "unit {unit}: identity arrow has wrong endpoints")
            }
            Violation::InverseEndpoints { arrow } => {
                write!(f, "arrow {arrow}: inverse has wrong endpoints")
            }
            Violation::InverseLaw { arrow } => write!(f, "arrow {arrow}: g g^-1 is not an identity"),
            Violation::RightIdentity { arrow } => write!(f, "arrow {arrow}: g id_s(g) != g"),
            Violation::LeftIdentity { arrow } => write!(f, "arrow {arrow}: id_t(g) g != g"),
            Violation::MissingComposite { g, h } => write!(f, "composable pair ({g},{h}) has no product"),
            Violation::SpuriousComposite { g, h } => {
                write!(f, "non-composable pair ({g},{h}) has a product")
            }
            Violation::CompositeEndpoints { g, h } => {
                write!(f, "product of ({g},{h}) has wrong endpoints")
            }
            Violation::Associativity { g, h, k } => write!(f, "({g} {h}) {k} != {g} ({h} {k})"),
            Violation::MeasureNotPreserved { arrow, src_weight, tgt_weight } => write!(
                f,
                "arrow {arrow}: mu(src) = {src_weight} but mu(tgt) = {tgt_weight}"
            ),
        }
    }
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::NonPositiveWeight { .. } => "non_positive_weight",
            Violation::IdentityEndpoints { .. } => "identity_endpoints",
            Violation::InverseEndpoints { .. } => "inverse_endpoints",
            Violation::InverseLaw { .. } => "inverse_law",
            Violation::RightIdentity { .. } => "right_identity",
            Violation::LeftIdentity { .. } => "left_identity",
            Violation::MissingComposite { .. } => "missing_composite",
            Violation::SpuriousComposite { .. } => "spurious_composite",
            Violation::CompositeEndpoints { .. } => "composite_endpoints",
            Violation::Associativity { .. } => "associativity",
            Violation::MeasureNotPreserved { .. } => "measure_not_preserved",
        }
    }
}

impl FiniteGroupoid {
    fn from_law(
        units: Vec<Unit>,
        arrows: Vec<Arrow>,
        inverse: Vec<usize>,
        unit_arrow: Vec<usize>,
        law: Law,
    ) -> Self {
        let mut source_fibers = vec![Vec::new(); units.len()];
        let mut target_fibers = vec![Vec::new(); units.len()];
        for (g, arrow) in arrows.iter().enumerate() {
            source_fibers[arrow.src].push(g);
            target_fibers[arrow.tgt].push(g);
        }
        let total: BigRational = units.iter().map(|u| u.weight.clone()).sum();
        FiniteGroupoid {
            normalized: total.is_one(),
            units,
            arrows,
            inverse,
            unit_arrow,
            law,
            source_fibers,
            target_fibers,
            metadata: BTreeMap::new(),
        }
    }

    /// Builds a groupoid from explicit data. Only structural problems
    /// (unknown references, missing identities) are errors here; axiom
    /// violations are reported by [`FiniteGroupoid::validate`].
    pub fn from_table(
        units: Vec<Unit>,
        arrows: Vec<Arrow>,
        inverse: Vec<usize>,
        compose: Vec<(usize, usize, usize)>,
    ) -> Result<Self> {
        check_unique(units.iter().map(|u| u.id.as_str()), Error::DuplicateUnit)?;
        check_unique(arrows.iter().map(|a| a.id.as_str()), Error::DuplicateArrow)?;
        for arrow in &arrows {
            if arrow.src >= units.len() {
                return Err(Error::UnitOutOfRange(arrow.src));
            }
            if arrow.tgt >= units.len() {
                return Err(Error::UnitOutOfRange(arrow.tgt));
            }
        }
        if inverse.len() != arrows.len() || inverse.iter().any(|&i| i >= arrows.len()) {
            return Err(Error::InvalidGroupoid("inverse map is not total".into()));
        }
        let mut table = HashMap::with_capacity(compose.len());
        for (g, h, gh) in compose {
            if g >= arrows.len() || h >= arrows.len() || gh >= arrows.len() {
                return Err(Error::InvalidGroupoid("composition entry out of range".into()));
            }
            table.insert((g, h), gh);
        }
        // id_x is the loop at x that is idempotent under the table.
        let mut unit_arrow = Vec::with_capacity(units.len());
        for (x, unit) in units.iter().enumerate() {
            let found = arrows
                .iter()
                .enumerate()
                .find(|(g, a)| a.src == x && a.tgt == x && table.get(&(*g, *g)) == Some(g))
                .map(|(g, _)| g);
            match found {
                Some(g) => unit_arrow.push(g),
                None => return Err(Error::MissingIdentity(unit.id.clone())),
            }
        }
        Ok(Self::from_law(units, arrows, inverse, unit_arrow, Law::Table(table)))
    }

    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn unit(&self, x: usize) -> &Unit {
        &self.units[x]
    }

    pub fn arrow(&self, g: usize) -> &Arrow {
        &self.arrows[g]
    }

    pub fn weight(&self, x: usize) -> &BigRational {
        &self.units[x].weight
    }

    pub fn src(&self, g: usize) -> usize {
        self.arrows[g].src
    }

    pub fn tgt(&self, g: usize) -> usize {
        self.arrows[g].tgt
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn unit_arrow(&self, x: usize) -> usize {
        self.unit_arrow[x]
    }

    pub fn is_unit_arrow(&self, g: usize) -> bool {
        let a = &self.arrows[g];
        a.src == a.tgt && self.unit_arrow[a.src] == g
    }

    /// Arrows with source `x`.
    pub fn source_fiber(&self, x: usize) -> &[usize] {
        &self.source_fibers[x]
    }

    /// Arrows with target `x`.
    pub fn target_fiber(&self, x: usize) -> &[usize] {
        &self.target_fibers[x]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total_mass(&self) -> BigRational {
        self.units.iter().map(|u| u.weight.clone()).sum()
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn with_metadata(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }

    pub fn arrow_index(&self, id: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.id == id)
    }

    /// `gh`, defined exactly when `src(g) == tgt(h)`.
    pub fn compose(&self, g: usize, h: usize) -> Option<usize> {
        if self.arrows[g].src != self.arrows[h].tgt {
            return None;
        }
        match &self.law {
            Law::Table(table) => table.get(&(g, h)).copied(),
            Law::Principal(lookup) => {
                lookup.get(&(self.arrows[g].tgt, self.arrows[h].src)).copied()
            }
            Law::Groups(fibers) => {
                let fiber = &fibers[self.arrows[g].src];
                Some(fiber.offset + fiber.table[g - fiber.offset][h - fiber.offset])
            }
            Law::Product { left, right } => {
                let n = right.arrow_count();
                let a = left.compose(g / n, h / n)?;
                let b = right.compose(g % n, h % n)?;
                Some(a * n + b)
            }
            Law::Union { parts, arrow_offsets, arrow_part } => {
                let part = arrow_part[g];
                if arrow_part[h] != part {
                    return None;
                }
                let offset = arrow_offsets[part];
                parts[part].compose(g - offset, h - offset).map(|k| k + offset)
            }
            Law::Restriction { parent, to_parent, from_parent } => parent
                .compose(to_parent[g], to_parent[h])
                .and_then(|k| from_parent.get(&k).copied()),
        }
    }

    /// For groupoids built by [`product`], the factor arrows of `g`.
    pub fn product_factors(&self, g: usize) -> Option<(usize, usize)> {
        match &self.law {
            Law::Product { right, .. } => {
                let n = right.arrow_count();
                Some((g / n, g % n))
            }
            _ => None,
        }
    }

    /// For groupoids built by [`restrict`], the parent arrow of `g`.
    pub fn parent_arrow(&self, g: usize) -> Option<usize> {
        match &self.law {
            Law::Restriction { to_parent, .. } => Some(to_parent[g]),
            _ => None,
        }
    }

    pub fn restriction_parent(&self) -> Option<&GroupoidRef> {
        match &self.law {
            Law::Restriction { parent, .. } => Some(parent),
            _ => None,
        }
    }

    /// Exhaustive check of the groupoid axioms and of `mu(src g) = mu(tgt g)`.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let aid = |g: usize| self.arrows[g].id.clone();
        for unit in &self.units {
            if !unit.weight.is_positive() {
                out.push(Violation::NonPositiveWeight { unit: unit.id.clone() });
            }
        }
        for (x, &e) in self.unit_arrow.iter().enumerate() {
            if self.arrows[e].src != x || self.arrows[e].tgt != x {
                out.push(Violation::IdentityEndpoints { unit: self.units[x].id.clone() });
            }
        }
        if let Law::Table(table) = &self.law {
            for &(g, h) in table.keys() {
                if self.arrows[g].src != self.arrows[h].tgt {
                    out.push(Violation::SpuriousComposite { g: aid(g), h: aid(h) });
                }
            }
        }
        for (g, arrow) in self.arrows.iter().enumerate() {
            let inv = self.inverse[g];
            if self.arrows[inv].src != arrow.tgt || self.arrows[inv].tgt != arrow.src {
                out.push(Violation::InverseEndpoints { arrow: aid(g) });
            } else if self.compose(g, inv) != Some(self.unit_arrow[arrow.tgt])
                || self.compose(inv, g) != Some(self.unit_arrow[arrow.src])
            {
                out.push(Violation::InverseLaw { arrow: aid(g) });
            }
            if self.compose(g, self.unit_arrow[arrow.src]) != Some(g) {
                out.push(Violation::RightIdentity { arrow: aid(g) });
            }
            if self.compose(self.unit_arrow[arrow.tgt], g) != Some(g) {
                out.push(Violation::LeftIdentity { arrow: aid(g) });
            }
            if self.units[arrow.src].weight != self.units[arrow.tgt].weight {
                out.push(Violation::MeasureNotPreserved {
                    arrow: aid(g),
                    src_weight: format_rational(&self.units[arrow.src].weight),
                    tgt_weight: format_rational(&self.units[arrow.tgt].weight),
                });
            }
        }
        let mut endpoints_ok = true;
        for g in 0..self.arrows.len() {
            for &h in &self.target_fibers[self.arrows[g].src] {
                match self.compose(g, h) {
                    None => {
                        endpoints_ok = false;
                        out.push(Violation::MissingComposite { g: aid(g), h: aid(h) });
                    }
                    Some(gh) => {
                        if self.arrows[gh].tgt != self.arrows[g].tgt
                            || self.arrows[gh].src != self.arrows[h].src
                        {
                            endpoints_ok = false;
                            out.push(Violation::CompositeEndpoints { g: aid(g), h: aid(h) });
                        }
                    }
                }
            }
        }
        if endpoints_ok {
            for g in 0..self.arrows.len() {
                for &h in &self.target_fibers[self.arrows[g].src] {
                    let gh = self.compose(g, h).expect("checked above");
                    for &k in &self.target_fibers[self.arrows[h].src] {
                        let hk = self.compose(h, k).expect("checked above");
                        if self.compose(gh, k) != self.compose(g, hk) {
                            out.push(Violation::Associativity { g: aid(g), h: aid(h), k: aid(k) });
                        }
                    }
                }
            }
        }
        out
    }

    /// Connected components of the unit graph, ordered by smallest member.
    pub fn orbits(&self) -> Vec<UnitSet> {
        let mut parent: Vec<usize> = (0..self.units.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for arrow in &self.arrows {
            let a = find(&mut parent, arrow.src);
            let b = find(&mut parent, arrow.tgt);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.units.len() {
            let root = find(&mut parent, x);
            blocks.entry(root).or_default().push(x);
        }
        let mut orbits: Vec<UnitSet> = blocks.into_values().map(UnitSet::from_sorted).collect();
        orbits.sort_by_key(|o| o.members[0]);
        orbits
    }

    /// `t(G E) = E`, the finite form of invariance.
    pub fn is_invariant(&self, set: &UnitSet) -> bool {
        let saturated: BTreeSet<usize> = self
            .arrows
            .iter()
            .filter(|a| set.contains(a.src))
            .map(|a| a.tgt)
            .collect();
        saturated.into_iter().eq(set.members.iter().copied())
    }

    /// All non-empty invariant sets, or `None` when there are more than `cap`.
    pub fn invariant_sets(&self, cap: usize) -> Option<Vec<UnitSet>> {
        let orbits = self.orbits();
        let k = orbits.len();
        if k >= usize::BITS as usize - 1 || (1usize << k) - 1 > cap {
            return None;
        }
        let mut sets = Vec::with_capacity((1 << k) - 1);
        for mask in 1usize..(1 << k) {
            let mut members = Vec::new();
            for (i, orbit) in orbits.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    members.extend_from_slice(&orbit.members);
                }
            }
            sets.push(UnitSet::new(members));
        }
        Some(sets)
    }

    pub fn all_units(&self) -> UnitSet {
        UnitSet::from_sorted((0..self.units.len()).collect())
    }

    /// Size of the isotropy group at `x`.
    pub fn isotropy_order(&self, x: usize) -> usize {
        self.target_fibers[x].iter().filter(|&&g| self.arrows[g].src == x).count()
    }

    /// Same underlying arrow structure.
    pub fn same_structure(&self, other: &FiniteGroupoid) -> bool {
        std::ptr::eq(self, other)
            || (self.arrows == other.arrows
                && self.inverse == other.inverse
                && self.units == other.units)
    }
}

fn check_unique<'a>(
    ids: impl Iterator<Item = &'a str>,
    err: impl Fn(String) -> Error,
) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(err(id.to_string()));
        }
    }
    Ok(())
}

/// A set of units, stored as a sorted index list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitSet {
    members: Vec<usize>,
}

impl UnitSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        UnitSet { members }
    }

    fn from_sorted(members: Vec<usize>) -> Self {
        UnitSet { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn mass(&self, g: &FiniteGroupoid) -> BigRational {
        self.members.iter().map(|&x| g.weight(x).clone()).sum()
    }

    pub fn check_range(&self, g: &FiniteGroupoid) -> Result<()> {
        match self.members.last() {
            Some(&x) if x >= g.unit_count() => Err(Error::UnitOutOfRange(x)),
            _ => Ok(()),
        }
    }

    pub fn label(&self, g: &FiniteGroupoid) -> String {
        let ids: Vec<&str> = self.members.iter().map(|&x| g.unit(x).id.as_str()).collect();
        format!("{{{}}}", ids.join(","))
    }
}

/// Pair groupoid of a partition: all ordered pairs inside each class, with
/// `src(x,y) = y`, `tgt(x,y) = x` and `(x,y)(y,z) = (x,z)`.
pub fn build_pair_groupoid(classes: &[Vec<(String, BigRational)>]) -> Result<FiniteGroupoid> {
    check_unique(classes.iter().flatten().map(|(id, _)| id.as_str()), Error::DuplicateUnit)?;
    let mut units = Vec::new();
    let mut arrows = Vec::new();
    let mut lookup = HashMap::new();
    for (c, class) in classes.iter().enumerate() {
        for (id, w) in class {
            if !w.is_positive() {
                return Err(Error::NonPositiveWeight(id.clone()));
            }
        }
        if class.windows(2).any(|pair| pair[0].1 != pair[1].1) {
            return Err(Error::UnequalClassWeights { class: c });
        }
        let base = units.len();
        for (id, w) in class {
            units.push(Unit { id: id.clone(), weight: w.clone() });
        }
        for i in 0..class.len() {
            for j in 0..class.len() {
                let (x, y) = (base + i, base + j);
                lookup.insert((x, y), arrows.len());
                arrows.push(Arrow { id: format!("({},{})", class[i].0, class[j].0), src: y, tgt: x });
            }
        }
    }
    let inverse = arrows.iter().map(|a| lookup[&(a.src, a.tgt)]).collect();
    let unit_arrow = (0..units.len()).map(|x| lookup[&(x, x)]).collect();
    Ok(FiniteGroupoid::from_law(units, arrows, inverse, unit_arrow, Law::Principal(lookup)))
}

/// The full equivalence relation on `[n]` with normalized counting measure.
pub fn full_relation(n: usize) -> FiniteGroupoid {
    let w = BigRational::new(1.into(), n.into());
    let class: Vec<_> = (1..=n).map(|i| (i.to_string(), w.clone())).collect();
    build_pair_groupoid(&[class]).expect("valid class")
}

/// Checks the group axioms; returns the identity element.
pub fn check_group_table(table: &[Vec<usize>]) -> Result<usize> {
    let n = table.len();
    for (row, entries) in table.iter().enumerate() {
        if entries.len() != n {
            return Err(Error::NotAGroup(GroupAxiom::NotSquare { row }));
        }
        if let Some(col) = entries.iter().position(|&v| v >= n) {
            return Err(Error::NotAGroup(GroupAxiom::OutOfRange { row, col }));
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|j| table[e][j] == j && table[j][e] == j))
        .ok_or(Error::NotAGroup(GroupAxiom::NoIdentity))?;
    for (a, row) in table.iter().enumerate() {
        if !(0..n).any(|b| row[b] == identity && table[b][a] == identity) {
            return Err(Error::NotAGroup(GroupAxiom::NoInverse { element: a }));
        }
    }
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(Error::NotAGroup(GroupAxiom::NotAssociative { a, b, c }));
                }
            }
        }
    }
    Ok(identity)
}

/// A group as a one-unit groupoid.
pub fn build_group_groupoid(table: &[Vec<usize>], weight: BigRational) -> Result<FiniteGroupoid> {
    build_group_bundle(&[("*".to_string(), weight, table.to_vec())])
}

/// Disjoint union of one-unit group groupoids; source and target fibers agree.
pub fn build_group_bundle(base: &[(String, BigRational, Vec<Vec<usize>>)]) -> Result<FiniteGroupoid> {
    check_unique(base.iter().map(|(id, _, _)| id.as_str()), Error::DuplicateUnit)?;
    let mut units = Vec::new();
    let mut arrows = Vec::new();
    let mut inverse = Vec::new();
    let mut unit_arrow = Vec::new();
    let mut fibers = Vec::new();
    for (x, (id, weight, table)) in base.iter().enumerate() {
        if !weight.is_positive() {
            return Err(Error::NonPositiveWeight(id.clone()));
        }
        let identity = check_group_table(table)?;
        let offset = arrows.len();
        units.push(Unit { id: id.clone(), weight: weight.clone() });
        let prefix = if base.len() == 1 { String::new() } else { format!("{id}:") };
        for a in 0..table.len() {
            arrows.push(Arrow { id: format!("{prefix}g{a}"), src: x, tgt: x });
            let inv = (0..table.len()).find(|&b| table[a][b] == identity).expect("checked");
            inverse.push(offset + inv);
        }
        unit_arrow.push(offset + identity);
        fibers.push(GroupFiber { offset, table: table.clone() });
    }
    Ok(FiniteGroupoid::from_law(units, arrows, inverse, unit_arrow, Law::Groups(fibers)))
}

/// Product groupoid with product measure and componentwise structure maps.
pub fn product(left: &GroupoidRef, right: &GroupoidRef) -> FiniteGroupoid {
    let (m, n) = (right.unit_count(), right.arrow_count());
    let mut units = Vec::with_capacity(left.unit_count() * m);
    for x in left.units() {
        for y in right.units() {
            units.push(Unit { id: format!("({},{})", x.id, y.id), weight: &x.weight * &y.weight });
        }
    }
    let mut arrows = Vec::with_capacity(left.arrow_count() * n);
    let mut inverse = Vec::with_capacity(left.arrow_count() * n);
    for (a, ga) in left.arrows().iter().enumerate() {
        for (b, gb) in right.arrows().iter().enumerate() {
            arrows.push(Arrow {
                id: format!("({},{})", ga.id, gb.id),
                src: ga.src * m + gb.src,
                tgt: ga.tgt * m + gb.tgt,
            });
            inverse.push(left.inverse(a) * n + right.inverse(b));
        }
    }
    let mut unit_arrow = Vec::with_capacity(units.len());
    for x in 0..left.unit_count() {
        for y in 0..m {
            unit_arrow.push(left.unit_arrow(x) * n + right.unit_arrow(y));
        }
    }
    FiniteGroupoid::from_law(
        units,
        arrows,
        inverse,
        unit_arrow,
        Law::Product { left: left.clone(), right: right.clone() },
    )
}

/// Disjoint union; unit weights of part `i` are multiplied by its scale.
pub fn disjoint_union(parts: &[(GroupoidRef, BigRational)]) -> Result<FiniteGroupoid> {
    if parts.is_empty() {
        return Err(Error::EmptyUnion);
    }
    let mut units = Vec::new();
    let mut arrows = Vec::new();
    let mut inverse = Vec::new();
    let mut unit_arrow = Vec::new();
    let mut arrow_offsets = Vec::new();
    let mut arrow_part = Vec::new();
    for (i, (part, scale)) in parts.iter().enumerate() {
        if !scale.is_positive() {
            return Err(Error::NonPositiveScale(i));
        }
        let (unit_offset, arrow_offset) = (units.len(), arrows.len());
        arrow_offsets.push(arrow_offset);
        for u in part.units() {
            units.push(Unit { id: format!("{i}.{}", u.id), weight: &u.weight * scale });
        }
        for (g, a) in part.arrows().iter().enumerate() {
            arrows.push(Arrow {
                id: format!("{i}.{}", a.id),
                src: a.src + unit_offset,
                tgt: a.tgt + unit_offset,
            });
            inverse.push(part.inverse(g) + arrow_offset);
            arrow_part.push(i);
        }
        unit_arrow.extend((0..part.unit_count()).map(|x| part.unit_arrow(x) + arrow_offset));
    }
    let parts = parts.iter().map(|(p, _)| p.clone()).collect();
    Ok(FiniteGroupoid::from_law(
        units,
        arrows,
        inverse,
        unit_arrow,
        Law::Union { parts, arrow_offsets, arrow_part },
    ))
}

/// `G|_E`: arrows with both endpoints in `E`, weights renormalized by `mu(E)`.
pub fn restrict(g: &GroupoidRef, set: &UnitSet) -> Result<FiniteGroupoid> {
    set.check_range(g)?;
    let mass = set.mass(g);
    if !mass.is_positive() {
        return Err(Error::NullSet);
    }
    let mut local_unit = vec![usize::MAX; g.unit_count()];
    let mut units = Vec::with_capacity(set.len());
    for (i, &x) in set.members().iter().enumerate() {
        local_unit[x] = i;
        units.push(Unit { id: g.unit(x).id.clone(), weight: g.weight(x) / &mass });
    }
    let mut arrows = Vec::new();
    let mut to_parent = Vec::new();
    let mut from_parent = HashMap::new();
    for (k, a) in g.arrows().iter().enumerate() {
        if set.contains(a.src) && set.contains(a.tgt) {
            from_parent.insert(k, arrows.len());
            to_parent.push(k);
            arrows.push(Arrow { id: a.id.clone(), src: local_unit[a.src], tgt: local_unit[a.tgt] });
        }
    }
    let inverse = to_parent.iter().map(|&k| from_parent[&g.inverse(k)]).collect();
    let unit_arrow = set.members().iter().map(|&x| from_parent[&g.unit_arrow(x)]).collect();
    let mut out = FiniteGroupoid::from_law(
        units,
        arrows,
        inverse,
        unit_arrow,
        Law::Restriction { parent: g.clone(), to_parent, from_parent },
    );
    out.normalized = true;
    Ok(out)
}

/// A set of arrows meeting every source and every target fiber at most once.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bisection {
    arrows: Vec<usize>,
    full: bool,
}

pub fn is_bisection(g: &FiniteGroupoid, arrows: &[usize]) -> bool {
    let mut srcs = HashSet::new();
    let mut tgts = HashSet::new();
    let mut seen = HashSet::new();
    arrows.iter().all(|&a| {
        a < g.arrow_count() && seen.insert(a) && srcs.insert(g.src(a)) && tgts.insert(g.tgt(a))
    })
}

impl Bisection {
    pub fn new(g: &FiniteGroupoid, mut arrows: Vec<usize>) -> Result<Self> {
        if !is_bisection(g, &arrows) {
            return Err(Error::NotABisection);
        }
        arrows.sort_unstable();
        let full = arrows.len() == g.unit_count();
        Ok(Bisection { arrows, full })
    }

    /// The unit space as a bisection.
    pub fn units(g: &FiniteGroupoid) -> Self {
        let arrows = (0..g.unit_count()).map(|x| g.unit_arrow(x)).collect();
        Bisection::new(g, arrows).expect("identities form a bisection")
    }

    pub fn arrows(&self) -> &[usize] {
        &self.arrows
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn contains(&self, arrow: usize) -> bool {
        self.arrows.binary_search(&arrow).is_ok()
    }

    pub fn inverse(&self, g: &FiniteGroupoid) -> Self {
        let mut arrows: Vec<usize> = self.arrows.iter().map(|&a| g.inverse(a)).collect();
        arrows.sort_unstable();
        Bisection { arrows, full: self.full }
    }

    /// `{ab : a in self, b in other, s(a) = t(b)}`.
    pub fn compose(&self, g: &FiniteGroupoid, other: &Bisection) -> Self {
        let by_target: HashMap<usize, usize> = other.arrows.iter().map(|&b| (g.tgt(b), b)).collect();
        let arrows = self
            .arrows
            .iter()
            .filter_map(|&a| by_target.get(&g.src(a)).and_then(|&b| g.compose(a, b)))
            .collect();
        Bisection::new(g, arrows).expect("products of bisections are bisections")
    }

    /// Unit permutation `src(a) -> tgt(a)` induced by a full bisection.
    pub fn unit_map(&self, g: &FiniteGroupoid) -> Vec<usize> {
        let mut map = (0..g.unit_count()).collect::<Vec<_>>();
        for &a in &self.arrows {
            map[g.src(a)] = g.tgt(a);
        }
        map
    }
}

/// Number of full bisections: each orbit of size `k` with isotropy of order
/// `c` contributes `k! c^k`.
pub fn full_bisection_count(g: &FiniteGroupoid) -> BigUint {
    let mut count = BigUint::one();
    for orbit in g.orbits() {
        let k = orbit.len();
        let c = g.isotropy_order(orbit.members()[0]);
        for i in 1..=k {
            count *= BigUint::from(i) * BigUint::from(c);
        }
    }
    count
}

pub fn full_bisections(g: &FiniteGroupoid, bound: usize) -> Result<Vec<Bisection>> {
    let count = full_bisection_count(g);
    if count > BigUint::from(bound) {
        return Err(Error::TooManyBisections { count: count.to_string(), bound });
    }
    let n = g.unit_count();
    let mut out = Vec::new();
    let mut used = vec![false; n];
    let mut chosen = Vec::with_capacity(n);
    fn recurse(
        g: &FiniteGroupoid,
        x: usize,
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Bisection>,
    ) {
        if x == g.unit_count() {
            out.push(Bisection::new(g, chosen.clone()).expect("one arrow per fiber"));
            return;
        }
        for &a in g.target_fiber(x) {
            let s = g.src(a);
            if !used[s] {
                used[s] = true;
                chosen.push(a);
                recurse(g, x + 1, used, chosen, out);
                chosen.pop();
                used[s] = false;
            }
        }
    }
    recurse(g, 0, &mut used, &mut chosen, &mut out);
    Ok(out)
}

/// A uniformly chosen unit permutation inside each orbit, with a random
/// arrow realizing each step.
pub fn random_full_bisection<R: Rng + ?Sized>(g: &FiniteGroupoid, rng: &mut R) -> Bisection {
    let mut arrows = Vec::with_capacity(g.unit_count());
    for orbit in g.orbits() {
        let mut sources = orbit.members().to_vec();
        sources.shuffle(rng);
        for (&x, &y) in orbit.members().iter().zip(&sources) {
            let candidates: Vec<usize> =
                g.target_fiber(x).iter().copied().filter(|&a| g.src(a) == y).collect();
            arrows.push(*candidates.choose(rng).expect("orbits are transitive"));
        }
    }
    Bisection::new(g, arrows).expect("permutation of each orbit")
}

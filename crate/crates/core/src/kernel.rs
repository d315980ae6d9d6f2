//! Functions on arrows: fields of probability measures, the I-norm,
//! convolution and involution.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num::{BigRational, Signed, Zero};

use crate::error::{Error, Result};
use crate::groupoid::{Bisection, FiniteGroupoid, GroupoidRef};
use crate::scalar::{format_rational, is_one, rational_to_f64, Scalar, FLOAT_TOL};

/// A kernel on the arrows of a groupoid, stored sparsely (absent means 0).
#[derive(Debug, Clone)]
pub struct Kernel<S: Scalar> {
    groupoid: GroupoidRef,
    values: BTreeMap<usize, S>,
    probability: OnceLock<bool>,
    symmetric: OnceLock<bool>,
}

impl<S: Scalar> PartialEq for Kernel<S> {
    fn eq(&self, other: &Self) -> bool {
        self.groupoid.same_structure(&other.groupoid) && self.values == other.values
    }
}

/// How a square matrix is read as a field on a full relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `pi(i,j) = A(i,j)`; the field condition asks for unit row sums.
    AsIs,
    /// `pi(i,j) = A(j,i)`; the field condition asks for unit column sums.
    Transpose,
    /// Whichever of the two satisfies the field condition, as-is first.
    Auto,
}

impl std::str::FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-is" => Ok(Orientation::AsIs),
            "transpose" => Ok(Orientation::Transpose),
            "auto" => Ok(Orientation::Auto),
            other => Err(Error::Parse(format!("unknown orientation `{other}`"))),
        }
    }
}

impl<S: Scalar> Kernel<S> {
    pub fn new(groupoid: GroupoidRef, values: BTreeMap<usize, S>) -> Result<Self> {
        if let Some((&g, _)) = values.iter().next_back() {
            if g >= groupoid.arrow_count() {
                return Err(Error::UnknownArrow(g.to_string()));
            }
        }
        Ok(Self::from_map(groupoid, values))
    }

    fn from_map(groupoid: GroupoidRef, mut values: BTreeMap<usize, S>) -> Self {
        values.retain(|_, v| !v.is_zero());
        Kernel { groupoid, values, probability: OnceLock::new(), symmetric: OnceLock::new() }
    }

    pub fn from_fn(groupoid: GroupoidRef, f: impl Fn(usize) -> S) -> Self {
        let values = (0..groupoid.arrow_count()).map(|g| (g, f(g))).collect();
        Self::from_map(groupoid, values)
    }

    pub fn zero(groupoid: GroupoidRef) -> Self {
        Self::from_map(groupoid, BTreeMap::new())
    }

    /// The indicator of the unit space, the identity for convolution.
    pub fn unit_indicator(groupoid: GroupoidRef) -> Self {
        let values = (0..groupoid.unit_count()).map(|x| (groupoid.unit_arrow(x), S::one())).collect();
        Self::from_map(groupoid, values)
    }

    /// `pi(g) = 1 / |G^{t(g)}|`.
    pub fn uniform_field(groupoid: GroupoidRef) -> Self {
        let g = groupoid.clone();
        Self::from_fn(groupoid, |a| {
            let size = g.target_fiber(g.tgt(a)).len();
            S::from_rational(&BigRational::new(1.into(), size.into()))
        })
    }

    /// Reads a square matrix as a field on a single full equivalence class,
    /// arrow `(i,j)` (target `i`, source `j`) taking `A(i,j)` or `A(j,i)`.
    pub fn field_from_matrix(
        groupoid: GroupoidRef,
        matrix: &[Vec<S>],
        orientation: Orientation,
    ) -> Result<Self> {
        let n = groupoid.unit_count();
        let pairs = full_relation_arrows(&groupoid)?;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::MatrixShape(n));
        }
        let build = |transpose: bool| {
            let mut values = BTreeMap::new();
            for i in 0..n {
                for j in 0..n {
                    let v = if transpose { &matrix[j][i] } else { &matrix[i][j] };
                    values.insert(pairs[i][j], v.clone());
                }
            }
            Self::from_map(groupoid.clone(), values)
        };
        match orientation {
            Orientation::AsIs => {
                let k = build(false);
                k.check_probability_field()?;
                Ok(k)
            }
            Orientation::Transpose => {
                let k = build(true);
                k.check_probability_field()?;
                Ok(k)
            }
            Orientation::Auto => {
                let k = build(false);
                match k.check_probability_field() {
                    Ok(()) => Ok(k),
                    Err(err) => {
                        let t = build(true);
                        if t.is_probability_field() {
                            Ok(t)
                        } else {
                            Err(err)
                        }
                    }
                }
            }
        }
    }

    /// `pi(g) = nu({gamma : g in gamma})`.
    pub fn field_from_bisections(groupoid: GroupoidRef, measure: &BisectionMeasure) -> Result<Self> {
        let mut values: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (i, (bisection, weight)) in measure.items().iter().enumerate() {
            if !bisection.is_full() {
                return Err(Error::NotFull(i));
            }
            if bisection.arrows().iter().any(|&a| a >= groupoid.arrow_count()) {
                return Err(Error::GroupoidMismatch);
            }
            for &a in bisection.arrows() {
                *values.entry(a).or_insert_with(BigRational::zero) += weight;
            }
        }
        let values = values.iter().map(|(&g, v)| (g, S::from_rational(v))).collect();
        Ok(Self::from_map(groupoid, values))
    }

    pub fn groupoid(&self) -> &GroupoidRef {
        &self.groupoid
    }

    pub fn get(&self, g: usize) -> S {
        self.values.get(&g).cloned().unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.values.iter().map(|(&g, v)| (g, v))
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// `sum_{g in G^x} pi(g)` for every unit `x`.
    pub fn target_fiber_sums(&self) -> Vec<S> {
        let mut sums = vec![S::zero(); self.groupoid.unit_count()];
        for (&g, v) in &self.values {
            let x = self.groupoid.tgt(g);
            sums[x] = sums[x].clone() + v.clone();
        }
        sums
    }

    pub fn check_probability_field(&self) -> Result<()> {
        if let Some((&g, _)) = self.values.iter().find(|(_, v)| !v.is_real_nonnegative()) {
            return Err(Error::NegativeValue(g));
        }
        for (x, sum) in self.target_fiber_sums().iter().enumerate() {
            if !is_one(sum) {
                let shown = if S::EXACT { format!("{sum:?}") } else { sum.re_f64().to_string() };
                return Err(Error::NotAField { unit: x, sum: shown });
            }
        }
        Ok(())
    }

    pub fn is_probability_field(&self) -> bool {
        *self.probability.get_or_init(|| self.check_probability_field().is_ok())
    }

    /// First arrow where `pi(g^-1) != conj(pi(g))`, if any.
    pub fn symmetry_witness(&self) -> Option<usize> {
        (0..self.groupoid.arrow_count()).find(|&g| {
            let inv = self.get(self.groupoid.inverse(g));
            !inv.close_to(&self.get(g).conj(), FLOAT_TOL)
        })
    }

    pub fn is_symmetric(&self) -> bool {
        *self.symmetric.get_or_init(|| self.symmetry_witness().is_none())
    }

    pub fn check_symmetric(&self) -> Result<()> {
        match self.symmetry_witness() {
            Some(g) => Err(Error::NonSymmetric(g)),
            None => Ok(()),
        }
    }

    /// Largest absolute source- or target-fiber sum.
    pub fn i_norm(&self) -> f64 {
        let n = self.groupoid.unit_count();
        let (mut by_src, mut by_tgt) = (vec![0.0f64; n], vec![0.0f64; n]);
        for (&g, v) in &self.values {
            let a = v.abs_f64();
            by_src[self.groupoid.src(g)] += a;
            by_tgt[self.groupoid.tgt(g)] += a;
        }
        by_src.into_iter().chain(by_tgt).fold(0.0, f64::max)
    }

    /// `sum_g mu(t(g)) |pi(g)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.values
            .iter()
            .map(|(&g, v)| rational_to_f64(self.groupoid.weight(self.groupoid.tgt(g))) * v.abs_f64().powi(2))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.groupoid, &other.groupoid) || self.groupoid.same_structure(&other.groupoid) {
            Ok(())
        } else {
            Err(Error::GroupoidMismatch)
        }
    }

    /// `(pi1 * pi2)(g) = sum_{h in G^{t(g)}} pi1(h) pi2(h^-1 g)`, summed here as
    /// `sum over composable (h, k) with hk = g of pi1(h) pi2(k)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let g = &self.groupoid;
        let mut by_target: Vec<Vec<(usize, &S)>> = vec![Vec::new(); g.unit_count()];
        for (&k, v) in &other.values {
            by_target[g.tgt(k)].push((k, v));
        }
        let mut out: BTreeMap<usize, S> = BTreeMap::new();
        for (&h, a) in &self.values {
            for &(k, b) in &by_target[g.src(h)] {
                let hk = g.compose(h, k).expect("composable by construction");
                let term = a.clone() * b.clone();
                match out.get_mut(&hk) {
                    Some(slot) => *slot = slot.clone() + term,
                    None => {
                        out.insert(hk, term);
                    }
                }
            }
        }
        Ok(Self::from_map(self.groupoid.clone(), out))
    }

    /// `pi^{*n}`, with `pi^{*0}` the unit indicator.
    pub fn convolution_power(&self, n: usize) -> Self {
        let mut acc = Self::unit_indicator(self.groupoid.clone());
        for _ in 0..n {
            acc = acc.convolve(self).expect("same groupoid");
        }
        acc
    }

    /// `pi*(g) = conj(pi(g^-1))`.
    pub fn involution(&self) -> Self {
        let values = self
            .values
            .iter()
            .map(|(&g, v)| (self.groupoid.inverse(g), v.conj()))
            .collect();
        Self::from_map(self.groupoid.clone(), values)
    }

    pub fn scale(&self, factor: &S) -> Self {
        let values = self.values.iter().map(|(&g, v)| (g, v.clone() * factor.clone())).collect();
        Self::from_map(self.groupoid.clone(), values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut values = self.values.clone();
        for (&g, v) in &other.values {
            let slot = values.entry(g).or_insert_with(S::zero);
            *slot = slot.clone() + v.clone();
        }
        Ok(Self::from_map(self.groupoid.clone(), values))
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Kernel<T> {
        let values = self.values.iter().map(|(&g, v)| (g, f(v))).collect();
        Kernel::from_map(self.groupoid.clone(), values)
    }

    pub fn to_f64(&self) -> Kernel<f64> {
        self.map(|v| v.re_f64())
    }

    pub fn to_c64(&self) -> Kernel<num::complex::Complex64> {
        self.map(|v| v.to_c64())
    }

    pub fn is_real(&self) -> bool {
        self.values.values().all(|v| v.to_c64().im == 0.0)
    }

    /// The restriction of this kernel to `sub = G|_E`.
    pub fn restrict_to(&self, sub: &GroupoidRef) -> Result<Self> {
        match sub.restriction_parent() {
            Some(parent) if parent.same_structure(&self.groupoid) => {}
            _ => return Err(Error::GroupoidMismatch),
        }
        let values = (0..sub.arrow_count())
            .filter_map(|a| {
                let parent = sub.parent_arrow(a).expect("restriction");
                self.values.get(&parent).map(|v| (a, v.clone()))
            })
            .collect();
        Ok(Self::from_map(sub.clone(), values))
    }

    /// `(pi1 x pi2)(a, b) = pi1(a) pi2(b)` on a groupoid built by `product`.
    pub fn tensor(left: &Self, right: &Self, product: GroupoidRef) -> Result<Self> {
        if product.arrow_count() != left.groupoid.arrow_count() * right.groupoid.arrow_count()
            || product.product_factors(0).is_none()
        {
            return Err(Error::GroupoidMismatch);
        }
        let n = right.groupoid.arrow_count();
        let mut values = BTreeMap::new();
        for (&a, u) in &left.values {
            for (&b, v) in &right.values {
                values.insert(a * n + b, u.clone() * v.clone());
            }
        }
        Ok(Self::from_map(product, values))
    }

    /// The kernel equal to `parts[i]` on part `i` of a groupoid built by
    /// `disjoint_union` from the same parts in the same order.
    pub fn direct_sum(parts: &[Self], union: GroupoidRef) -> Result<Self> {
        let total: usize = parts.iter().map(|k| k.groupoid.arrow_count()).sum();
        if total != union.arrow_count() {
            return Err(Error::GroupoidMismatch);
        }
        let mut values = BTreeMap::new();
        let mut offset = 0;
        for k in parts {
            for (&g, v) in &k.values {
                values.insert(offset + g, v.clone());
            }
            offset += k.groupoid.arrow_count();
        }
        Ok(Self::from_map(union, values))
    }

    /// Arrow-id keyed view, for output.
    pub fn describe(&self) -> Vec<(String, S)> {
        self.values.iter().map(|(&g, v)| (self.groupoid.arrow(g).id.clone(), v.clone())).collect()
    }
}

/// `pairs[i][j]` is the arrow with target `i` and source `j`.
pub fn full_relation_arrows(g: &FiniteGroupoid) -> Result<Vec<Vec<usize>>> {
    let n = g.unit_count();
    if g.arrow_count() != n * n || g.orbits().len() != 1 {
        return Err(Error::NotFullRelation(n));
    }
    let mut pairs = vec![vec![usize::MAX; n]; n];
    for (a, arrow) in g.arrows().iter().enumerate() {
        if pairs[arrow.tgt][arrow.src] != usize::MAX {
            return Err(Error::NotFullRelation(n));
        }
        pairs[arrow.tgt][arrow.src] = a;
    }
    Ok(pairs)
}

/// Orientation under which a square matrix is a field (as-is preferred).
pub fn resolve_orientation<S: Scalar>(matrix: &[Vec<S>]) -> Option<Orientation> {
    let n = matrix.len();
    let nonneg = matrix.iter().flatten().all(|v| v.is_real_nonnegative());
    if !nonneg {
        return None;
    }
    let rows_ok = matrix.iter().all(|row| is_one(&row.iter().cloned().fold(S::zero(), |a, b| a + b)));
    if rows_ok {
        return Some(Orientation::AsIs);
    }
    let cols_ok = (0..n).all(|j| is_one(&matrix.iter().map(|r| r[j].clone()).fold(S::zero(), |a, b| a + b)));
    cols_ok.then_some(Orientation::Transpose)
}

/// A finitely supported probability measure on full bisections.
#[derive(Debug, Clone)]
pub struct BisectionMeasure {
    items: Vec<(Bisection, BigRational)>,
}

impl BisectionMeasure {
    pub fn new(items: Vec<(Bisection, BigRational)>) -> Result<Self> {
        let total: BigRational = items.iter().map(|(_, w)| w.clone()).sum();
        if items.iter().any(|(_, w)| w.is_negative()) || total != BigRational::from_integer(1.into()) {
            return Err(Error::BadBisectionWeights(total));
        }
        Ok(BisectionMeasure { items })
    }

    pub fn point_mass(bisection: Bisection) -> Self {
        BisectionMeasure { items: vec![(bisection, BigRational::from_integer(1.into()))] }
    }

    pub fn items(&self) -> &[(Bisection, BigRational)] {
        &self.items
    }

    /// `weight(gamma) = weight(gamma^-1)` after merging repeated entries.
    pub fn is_symmetric(&self, g: &FiniteGroupoid) -> bool {
        let mut merged: BTreeMap<&Bisection, BigRational> = BTreeMap::new();
        for (b, w) in &self.items {
            *merged.entry(b).or_insert_with(BigRational::zero) += w;
        }
        merged.iter().all(|(b, w)| {
            let inv = b.inverse(g);
            merged.get(&inv).map_or(w.is_zero(), |v| v == w)
        })
    }

    pub fn describe(&self) -> Vec<(Vec<usize>, String)> {
        self.items.iter().map(|(b, w)| (b.arrows().to_vec(), format_rational(w))).collect()
    }
}

//! The weighted L² space of arrows and invariant Markov operators.
//!
//! `L²(G, mu_t)` weighs arrow `g` by `mu(t(g))`. Since the matrix entry
//! `M[g, g'] = pi(g^-1 g')` vanishes unless `t(g) = t(g')`, the operator is
//! block diagonal with one block per target fiber, and the weight is constant
//! on each block. Conjugating by `diag(sqrt(mu(t(g))))` therefore leaves the
//! blocks unchanged, so unweighted dense solvers give weighted norms.

use std::fmt::Write as _;

use num::complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groupoid::{GroupoidRef, UnitSet};
use crate::kernel::Kernel;
use crate::linalg::{dense_norm, POWER_SEED};
use crate::scalar::{rational_to_f64, Scalar};

/// A function on arrows with the `mu_t`-weighted inner product.
#[derive(Debug, Clone)]
pub struct L2Vector<S: Scalar> {
    groupoid: GroupoidRef,
    values: Vec<S>,
}

impl<S: Scalar> PartialEq for L2Vector<S> {
    fn eq(&self, other: &Self) -> bool {
        self.groupoid.same_structure(&other.groupoid) && self.values == other.values
    }
}

impl<S: Scalar> L2Vector<S> {
    pub fn zeros(groupoid: GroupoidRef) -> Self {
        let values = vec![S::zero(); groupoid.arrow_count()];
        L2Vector { groupoid, values }
    }

    pub fn from_fn(groupoid: GroupoidRef, f: impl Fn(usize) -> S) -> Self {
        let values = (0..groupoid.arrow_count()).map(f).collect();
        L2Vector { groupoid, values }
    }

    pub fn from_values(groupoid: GroupoidRef, values: Vec<S>) -> Result<Self> {
        if values.len() != groupoid.arrow_count() {
            return Err(Error::GroupoidMismatch);
        }
        Ok(L2Vector { groupoid, values })
    }

    /// `chi_E`: the indicator of the unit arrows over `E`.
    pub fn indicator(groupoid: GroupoidRef, set: &UnitSet) -> Self {
        let mut v = Self::zeros(groupoid.clone());
        for &x in set.members() {
            v.values[groupoid.unit_arrow(x)] = S::one();
        }
        v
    }

    pub fn constant(groupoid: GroupoidRef, value: S) -> Self {
        Self::from_fn(groupoid, |_| value.clone())
    }

    pub fn groupoid(&self) -> &GroupoidRef {
        &self.groupoid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, g: usize) -> &S {
        &self.values[g]
    }

    /// `<xi, eta> = sum_g mu(t(g)) xi(g) conj(eta(g))`.
    pub fn inner(&self, other: &Self) -> S {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .fold(S::zero(), |acc, (g, (a, b))| {
                let w = S::from_rational(self.groupoid.weight(self.groupoid.tgt(g)));
                acc + w * a.clone() * b.conj()
            })
    }

    pub fn norm_sq(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(g, a)| rational_to_f64(self.groupoid.weight(self.groupoid.tgt(g))) * a.abs_f64().powi(2))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> L2Vector<T> {
        L2Vector { groupoid: self.groupoid.clone(), values: self.values.iter().map(f).collect() }
    }
}

/// One target-fiber block: `entries[i * k + j] = M[arrows[i], arrows[j]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block<S> {
    pub unit: usize,
    pub arrows: Vec<usize>,
    pub entries: Vec<S>,
}

impl<S: Scalar> Block<S> {
    pub fn dim(&self) -> usize {
        self.arrows.len()
    }

    pub fn at(&self, i: usize, j: usize) -> &S {
        &self.entries[i * self.arrows.len() + j]
    }

    pub fn to_c64(&self) -> Vec<Complex64> {
        self.entries.iter().map(|v| v.to_c64()).collect()
    }

    pub fn norm(&self) -> f64 {
        dense_norm(self.dim(), &self.to_c64())
    }
}

/// A block-diagonal operator on `L²(G, mu_t)`, one block per unit.
#[derive(Debug, Clone)]
pub struct BlockOperator<S: Scalar> {
    groupoid: GroupoidRef,
    blocks: Vec<Block<S>>,
}

impl<S: Scalar> PartialEq for BlockOperator<S> {
    fn eq(&self, other: &Self) -> bool {
        self.groupoid.same_structure(&other.groupoid) && self.blocks == other.blocks
    }
}

/// How `operator_norm` computes its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMethod {
    Exact,
    PowerIteration,
}

impl std::str::FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(NormMethod::Exact),
            "power" | "power_iteration" => Ok(NormMethod::PowerIteration),
            other => Err(Error::Parse(format!("unknown norm method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NormOptions {
    pub method: NormMethod,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest block dimension the exact method will decompose.
    pub dense_cap: usize,
    /// Decompose blocks on the rayon pool; the result is the same maximum.
    pub parallel: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { method: NormMethod::Exact, tol: 1e-10, max_iter: 100_000, dense_cap: 2048, parallel: false }
    }
}

impl NormOptions {
    pub fn power() -> Self {
        NormOptions { method: NormMethod::PowerIteration, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct NormCertificate {
    pub value: f64,
    pub method: NormMethod,
    pub iterations: usize,
    /// Rayleigh-quotient estimates (power iteration) or block norms (exact).
    pub trace: Vec<f64>,
}

impl<S: Scalar> BlockOperator<S> {
    pub fn groupoid(&self) -> &GroupoidRef {
        &self.groupoid
    }

    pub fn blocks(&self) -> &[Block<S>] {
        &self.blocks
    }

    pub fn apply(&self, xi: &L2Vector<S>) -> Result<L2Vector<S>> {
        if !self.groupoid.same_structure(&xi.groupoid) {
            return Err(Error::GroupoidMismatch);
        }
        let mut out = L2Vector::zeros(self.groupoid.clone());
        for block in &self.blocks {
            let k = block.dim();
            for i in 0..k {
                let mut acc = S::zero();
                for j in 0..k {
                    let m = &block.entries[i * k + j];
                    if !m.is_zero() {
                        acc = acc + m.clone() * xi.values[block.arrows[j]].clone();
                    }
                }
                out.values[block.arrows[i]] = acc;
            }
        }
        Ok(out)
    }

    pub fn identity(groupoid: GroupoidRef) -> Self {
        let blocks = (0..groupoid.unit_count())
            .map(|x| {
                let arrows = groupoid.target_fiber(x).to_vec();
                let k = arrows.len();
                let entries = (0..k * k).map(|p| if p / k == p % k { S::one() } else { S::zero() }).collect();
                Block { unit: x, arrows, entries }
            })
            .collect();
        BlockOperator { groupoid, blocks }
    }

    /// Operator product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if !self.groupoid.same_structure(&other.groupoid) {
            return Err(Error::GroupoidMismatch);
        }
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| {
                let k = a.dim();
                let mut entries = vec![S::zero(); k * k];
                for i in 0..k {
                    for l in 0..k {
                        let x = &a.entries[i * k + l];
                        if x.is_zero() {
                            continue;
                        }
                        for j in 0..k {
                            let y = &b.entries[l * k + j];
                            if !y.is_zero() {
                                entries[i * k + j] = entries[i * k + j].clone() + x.clone() * y.clone();
                            }
                        }
                    }
                }
                Block { unit: a.unit, arrows: a.arrows.clone(), entries }
            })
            .collect();
        Ok(BlockOperator { groupoid: self.groupoid.clone(), blocks })
    }

    /// Adjoint for the weighted inner product: `A*[g,g'] = conj(M[g',g]) mu(t(g'))/mu(t(g))`,
    /// which is the conjugate transpose because weights are constant per block.
    pub fn adjoint(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let k = b.dim();
                let entries = (0..k * k).map(|p| b.entries[(p % k) * k + p / k].conj()).collect();
                Block { unit: b.unit, arrows: b.arrows.clone(), entries }
            })
            .collect();
        BlockOperator { groupoid: self.groupoid.clone(), blocks }
    }

    /// Largest `|<P xi_i, xi_j> - <xi_i, P xi_j>|` over the weighted
    /// orthonormal basis `xi_g = chi_g / sqrt(mu(t(g)))`.
    pub fn self_adjoint_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            let k = b.dim();
            for i in 0..k {
                for j in 0..k {
                    let d = b.entries[i * k + j].to_c64() - b.entries[j * k + i].to_c64().conj();
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    pub fn block_norms(&self, parallel: bool) -> Vec<f64> {
        if parallel {
            self.blocks.par_iter().map(Block::norm).collect()
        } else {
            self.blocks.iter().map(Block::norm).collect()
        }
    }

    pub fn operator_norm(&self, options: &NormOptions) -> Result<NormCertificate> {
        match options.method {
            NormMethod::Exact => {
                if let Some(big) = self.blocks.iter().map(Block::dim).max().filter(|&d| d > options.dense_cap) {
                    return Err(Error::DenseTooLarge { size: big, cap: options.dense_cap });
                }
                let trace = self.block_norms(options.parallel);
                let value = trace.iter().copied().fold(0.0, f64::max);
                Ok(NormCertificate { value, method: NormMethod::Exact, iterations: 0, trace })
            }
            NormMethod::PowerIteration => self.power_norm(options.tol, options.max_iter),
        }
    }

    /// Power iteration on `P* P`; every estimate `|P v|` with `|v| = 1` is a
    /// lower bound for the norm.
    fn power_norm(&self, tol: f64, max_iter: usize) -> Result<NormCertificate> {
        let blocks: Vec<(Vec<usize>, Vec<Complex64>)> =
            self.blocks.iter().map(|b| (b.arrows.clone(), b.to_c64())).collect();
        let n = self.groupoid.arrow_count();
        let weights: Vec<f64> =
            (0..n).map(|g| rational_to_f64(self.groupoid.weight(self.groupoid.tgt(g)))).collect();
        let norm = |v: &[Complex64]| v.iter().zip(&weights).map(|(z, w)| w * z.norm_sqr()).sum::<f64>().sqrt();
        let apply = |v: &[Complex64], adjoint: bool| {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (arrows, m) in &blocks {
                let k = arrows.len();
                for i in 0..k {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..k {
                        let e = if adjoint { m[j * k + i].conj() } else { m[i * k + j] };
                        acc += e * v[arrows[j]];
                    }
                    out[arrows[i]] = acc;
                }
            }
            out
        };
        let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
        let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(0.5..1.5), 0.0)).collect();
        let mut trace = Vec::new();
        for iter in 1..=max_iter {
            let nv = norm(&v);
            if nv == 0.0 {
                return Ok(NormCertificate { value: 0.0, method: NormMethod::PowerIteration, iterations: iter, trace });
            }
            v.iter_mut().for_each(|z| *z /= nv);
            let w = apply(&v, false);
            let estimate = norm(&w);
            trace.push(estimate);
            if trace.len() >= 2 && (estimate - trace[trace.len() - 2]).abs() < tol {
                return Ok(NormCertificate { value: estimate, method: NormMethod::PowerIteration, iterations: iter, trace });
            }
            if estimate == 0.0 {
                return Ok(NormCertificate { value: 0.0, method: NormMethod::PowerIteration, iterations: iter, trace });
            }
            v = apply(&w, true);
        }
        let lower_bound = trace.iter().copied().fold(0.0, f64::max);
        Err(Error::NoConvergence { max_iter, lower_bound })
    }

    /// Coordinate-format export: `row_arrow_id,col_arrow_id,value` per nonzero.
    pub fn to_coo(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let k = b.dim();
            for i in 0..k {
                for j in 0..k {
                    let v = &b.entries[i * k + j];
                    if v.is_zero() {
                        continue;
                    }
                    let z = v.to_c64();
                    let shown = if z.im == 0.0 { format!("{}", z.re) } else { format!("{}{:+}i", z.re, z.im) };
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        csv_field(&self.groupoid.arrow(b.arrows[i]).id),
                        csv_field(&self.groupoid.arrow(b.arrows[j]).id),
                        shown
                    );
                }
            }
        }
        out
    }

    /// Principal sub-operator on the blocks of the units in `set`.
    pub fn blocks_over(&self, set: &UnitSet) -> Vec<&Block<S>> {
        self.blocks.iter().filter(|b| set.contains(b.unit)).collect()
    }
}

fn csv_field(text: &str) -> std::borrow::Cow<'_, str> {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\"")).into()
    } else {
        text.into()
    }
}

/// The invariant Markov operator `P^pi` together with its kernel.
#[derive(Debug, Clone)]
pub struct MarkovOperator<S: Scalar> {
    op: BlockOperator<S>,
    kernel: Kernel<S>,
}

impl<S: Scalar> std::ops::Deref for MarkovOperator<S> {
    type Target = BlockOperator<S>;

    fn deref(&self) -> &Self::Target {
        &self.op
    }
}

impl<S: Scalar> MarkovOperator<S> {
    pub fn kernel(&self) -> &Kernel<S> {
        &self.kernel
    }

    pub fn as_block_operator(&self) -> &BlockOperator<S> {
        &self.op
    }

    pub fn into_block_operator(self) -> BlockOperator<S> {
        self.op
    }
}

/// `M[g, g'] = pi(g^-1 g')` for `t(g) = t(g')`.
pub fn assemble<S: Scalar>(groupoid: &GroupoidRef, kernel: &Kernel<S>) -> Result<MarkovOperator<S>> {
    if !groupoid.same_structure(kernel.groupoid()) {
        return Err(Error::GroupoidMismatch);
    }
    let blocks = (0..groupoid.unit_count())
        .map(|x| {
            let arrows = groupoid.target_fiber(x).to_vec();
            let mut entries = Vec::with_capacity(arrows.len() * arrows.len());
            for &g in &arrows {
                let g_inv = groupoid.inverse(g);
                for &h in &arrows {
                    let a = groupoid.compose(g_inv, h).expect("same target");
                    entries.push(kernel.get(a));
                }
            }
            Block { unit: x, arrows, entries }
        })
        .collect();
    Ok(MarkovOperator { op: BlockOperator { groupoid: groupoid.clone(), blocks }, kernel: kernel.clone() })
}

/// `(P xi)(g) = sum_{h in G^{s(g)}} xi(gh) pi(h)`, evaluated directly.
pub fn apply_fiber_sum<S: Scalar>(kernel: &Kernel<S>, xi: &L2Vector<S>) -> Result<L2Vector<S>> {
    let g = kernel.groupoid();
    if !g.same_structure(xi.groupoid()) {
        return Err(Error::GroupoidMismatch);
    }
    Ok(L2Vector::from_fn(g.clone(), |a| {
        g.target_fiber(g.src(a)).iter().fold(S::zero(), |acc, &h| {
            let ah = g.compose(a, h).expect("composable");
            acc + xi.get(ah).clone() * kernel.get(h)
        })
    }))
}

/// `(|pi|_2, |P^pi|, |pi|_I)`, nondecreasing for every kernel on a
/// probability groupoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSandwich {
    pub l2: f64,
    pub operator: f64,
    pub i_norm: f64,
}

impl NormSandwich {
    pub fn is_ordered(&self, tol: f64) -> bool {
        self.l2 <= self.operator + tol && self.operator <= self.i_norm + tol
    }
}

pub fn norm_sandwich_report<S: Scalar>(kernel: &Kernel<S>, options: &NormOptions) -> Result<NormSandwich> {
    let g = kernel.groupoid();
    if !g.is_normalized() {
        return Err(Error::NotProbabilityMeasure(g.total_mass()));
    }
    let p = assemble(g, kernel)?;
    Ok(NormSandwich { l2: kernel.l2_norm(), operator: p.operator_norm(options)?.value, i_norm: kernel.i_norm() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{build_group_groupoid, full_relation};
    use crate::kernel::Orientation;
    use crate::scalar::rational;
    use num::BigRational;
    use std::sync::Arc;

    fn cyclic(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect()
    }

    #[test]
    fn unit_indicator_gives_identity() {
        let g: GroupoidRef = Arc::new(full_relation(3));
        let k = Kernel::<BigRational>::unit_indicator(g.clone());
        let p = assemble(&g, &k).unwrap();
        assert_eq!(*p.as_block_operator(), BlockOperator::identity(g.clone()));
        let xi = L2Vector::from_fn(g.clone(), |a| rational(a as i64, 7));
        assert_eq!(p.apply(&xi).unwrap(), xi);
        let norm = p.operator_norm(&NormOptions::default()).unwrap();
        assert_eq!(norm.value, 1.0);
    }

    #[test]
    fn uniform_full_relation_norm_one() {
        for n in [1, 2, 5, 17, 50] {
            let g: GroupoidRef = Arc::new(full_relation(n));
            let p = assemble(&g, &Kernel::<f64>::uniform_field(g.clone())).unwrap();
            let ones = L2Vector::constant(g.clone(), 1.0);
            let image = p.apply(&ones).unwrap();
            assert!(image.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
            let norm = p.operator_norm(&NormOptions::default()).unwrap().value;
            assert!((norm - 1.0).abs() < 1e-12, "n={n}: {norm}");
        }
    }

    #[test]
    fn z2_uniform_block() {
        let g: GroupoidRef = Arc::new(build_group_groupoid(&cyclic(2), rational(1, 1)).unwrap());
        let p = assemble(&g, &Kernel::<f64>::uniform_field(g.clone())).unwrap();
        assert_eq!(p.blocks().len(), 1);
        assert_eq!(p.blocks()[0].entries, vec![0.5; 4]);
        let (vals, _) = crate::linalg::hermitian_eigen(2, &p.blocks()[0].to_c64());
        let mut vals = vals;
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(vals[0].abs() < 1e-15 && (vals[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_matches_fiber_sum_and_units_identity() {
        let g: GroupoidRef = Arc::new(full_relation(3));
        let k = Kernel::<BigRational>::from_fn(g.clone(), |a| rational((a * a % 5) as i64 - 1, 3));
        let p = assemble(&g, &k).unwrap();
        let xi = L2Vector::from_fn(g.clone(), |a| rational(2 * a as i64 - 3, 5));
        assert_eq!(p.apply(&xi).unwrap(), apply_fiber_sum(&k, &xi).unwrap());
        // P(chi_units) = conj(pi*)
        let chi = L2Vector::indicator(g.clone(), &g.all_units());
        let image = p.apply(&chi).unwrap();
        let star = k.involution();
        for a in 0..g.arrow_count() {
            assert_eq!(image.get(a), &star.get(a).conj());
        }
    }

    #[test]
    fn homomorphism_and_adjoint() {
        let g: GroupoidRef = Arc::new(full_relation(3));
        let k1 = Kernel::<BigRational>::from_fn(g.clone(), |a| rational(a as i64 + 1, 4));
        let k2 = Kernel::<BigRational>::from_fn(g.clone(), |a| rational(3 - a as i64, 2));
        let p1 = assemble(&g, &k1).unwrap();
        let p2 = assemble(&g, &k2).unwrap();
        let conv = assemble(&g, &k1.convolve(&k2).unwrap()).unwrap();
        assert_eq!(*conv.as_block_operator(), p1.matmul(&p2).unwrap());
        let star = assemble(&g, &k1.involution()).unwrap();
        assert_eq!(*star.as_block_operator(), p1.adjoint());
        // adjoint in the weighted inner product
        let xi = L2Vector::from_fn(g.clone(), |a| rational(a as i64, 3));
        let eta = L2Vector::from_fn(g.clone(), |a| rational(1 + (a % 2) as i64, 1));
        assert_eq!(p1.apply(&xi).unwrap().inner(&eta), xi.inner(&star.apply(&eta).unwrap()));
    }

    #[test]
    fn a_delta_style_field_norm() {
        // rows identical to x = (1 - e, e/3, e/3, e/3), e = 1/40
        let n = 4;
        let e = 0.025;
        let x = [1.0 - e, e / 3.0, e / 3.0, e / 3.0];
        let g: GroupoidRef = Arc::new(full_relation(n));
        let a: Vec<Vec<f64>> = (0..n).map(|i| vec![x[i]; n]).collect();
        let k = Kernel::field_from_matrix(g.clone(), &a, Orientation::Auto).unwrap();
        let p = assemble(&g, &k).unwrap();
        let f = (1.0 - e) * (1.0 - e) + e * e / 3.0;
        let expected = (n as f64 * f).sqrt();
        let exact = p.operator_norm(&NormOptions::default()).unwrap().value;
        assert!((exact - expected).abs() < 1e-12);
        assert!((exact - 1.95022).abs() < 1e-5);
        let power = p.operator_norm(&NormOptions::power()).unwrap();
        assert!((power.value - expected).abs() < 1e-8);
        assert!(power.trace.iter().all(|&t| t <= expected + 1e-12));
    }

    #[test]
    fn sandwich_examples() {
        let g: GroupoidRef = Arc::new(full_relation(2));
        let chi = Kernel::<f64>::unit_indicator(g.clone());
        let s = norm_sandwich_report(&chi, &NormOptions::default()).unwrap();
        assert_eq!((s.l2, s.operator, s.i_norm), (1.0, 1.0, 1.0));
        let u = Kernel::<f64>::uniform_field(g.clone());
        let s = norm_sandwich_report(&u, &NormOptions::default()).unwrap();
        assert!((s.l2 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((s.operator - 1.0).abs() < 1e-12 && s.i_norm == 1.0);
        let heavy: GroupoidRef = Arc::new(build_group_groupoid(&cyclic(2), rational(2, 1)).unwrap());
        let k = Kernel::<f64>::uniform_field(heavy);
        assert!(matches!(
            norm_sandwich_report(&k, &NormOptions::default()),
            Err(Error::NotProbabilityMeasure(_))
        ));
    }

    #[test]
    fn coo_export() {
        let g: GroupoidRef = Arc::new(build_group_groupoid(&cyclic(2), rational(1, 1)).unwrap());
        let p = assemble(&g, &Kernel::<f64>::uniform_field(g.clone())).unwrap();
        let coo = p.to_coo();
        assert_eq!(coo.lines().count(), 4);
        assert!(coo.lines().all(|l| l.ends_with(",0.5")));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let g: GroupoidRef = Arc::new(full_relation(4));
        let p = assemble(&g, &Kernel::<f64>::uniform_field(g.clone())).unwrap();
        let options = NormOptions { dense_cap: 3, ..NormOptions::default() };
        assert!(matches!(p.operator_norm(&options), Err(Error::DenseTooLarge { size: 4, cap: 3 })));
    }
}

//! The two unboundedness examples: the matrices `A_delta` on full relations
//! and the interval partition of the naturals.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{build_pair_groupoid, disjoint_union, full_relation, product, GroupoidRef};
use crate::kernel::{Kernel, Orientation};
use crate::markov::{assemble, NormOptions};
use crate::scalar::{format_rational, rational_to_f64};

/// Decimal resolution of `epsilon_0` when `delta / (2 sqrt n)` is irrational.
const EPSILON_DIGITS: u32 = 15;

/// `F(eps) = (1 - eps)^2 + eps^2 / (n - 1)`.
pub fn f_eps(n: usize, eps: &BigRational) -> BigRational {
    let one = BigRational::one();
    let a = &one - eps;
    &a * &a + eps * eps / BigRational::from_integer((n as i64 - 1).into())
}

/// The largest `eps <= delta / (2 sqrt n)` with a short decimal expansion,
/// exact when `n` is a perfect square.
pub fn default_epsilon(n: usize, delta: &BigRational) -> BigRational {
    let root = (n as f64).sqrt().round() as usize;
    if root * root == n {
        return delta / BigRational::from_integer((2 * root as i64).into());
    }
    // k / 10^d with (k / 10^d)^2 * 4n <= delta^2
    let scale = BigInt::from(10u32).pow(EPSILON_DIGITS);
    let fits = |k: &BigInt| {
        k * k * BigInt::from(4 * n) * delta.denom() * delta.denom() <= delta.numer() * delta.numer() * &scale * &scale
    };
    let estimate = rational_to_f64(delta) / (2.0 * (n as f64).sqrt()) * 10f64.powi(EPSILON_DIGITS as i32);
    let mut k = BigInt::from(estimate.floor() as i128);
    while k.is_positive() && !fits(&k) {
        k -= 1;
    }
    while fits(&(&k + 1)) {
        k += 1;
    }
    BigRational::new(k, scale)
}

#[derive(Debug, Clone)]
pub struct ADelta {
    pub n: usize,
    pub delta: BigRational,
    pub epsilon0: BigRational,
    /// `x_eps = (1 - eps, eps/(n-1), ..., eps/(n-1))`.
    pub column: Vec<BigRational>,
    /// `A(i, j) = x_eps(i)`: every column is `x_eps`, so columns sum to 1.
    pub matrix: Vec<Vec<BigRational>>,
    pub f_eps0: BigRational,
    /// `sqrt(n F(eps_0))`, the norm of the rank-one block.
    pub exact_norm: f64,
}

pub fn a_delta_matrix(n: usize, delta: &BigRational) -> Result<ADelta> {
    let half = BigRational::new(1.into(), 2.into());
    if n < 2 {
        return Err(Error::BadParameters(format!("n = {n} must be at least 2")));
    }
    if !delta.is_positive() || *delta >= half {
        return Err(Error::BadParameters(format!("delta = {} must lie in (0, 1/2)", format_rational(delta))));
    }
    let epsilon0 = default_epsilon(n, delta);
    if !epsilon0.is_positive() {
        return Err(Error::BadParameters(format!("delta = {} is below the epsilon resolution", format_rational(delta))));
    }
    let side = &epsilon0 / BigRational::from_integer((n as i64 - 1).into());
    let column: Vec<BigRational> =
        (0..n).map(|i| if i == 0 { BigRational::one() - &epsilon0 } else { side.clone() }).collect();
    let matrix = column.iter().map(|x| vec![x.clone(); n]).collect();
    let f_eps0 = f_eps(n, &epsilon0);
    let exact_norm = (n as f64 * rational_to_f64(&f_eps0)).sqrt();
    Ok(ADelta { n, delta: delta.clone(), epsilon0, column, matrix, f_eps0, exact_norm })
}

impl ADelta {
    pub fn column_sums_are_one(&self) -> bool {
        (0..self.n).all(|j| self.matrix.iter().map(|row| &row[j]).sum::<BigRational>().is_one())
    }

    pub fn min_entry(&self) -> &BigRational {
        self.matrix.iter().flatten().min().expect("n >= 2")
    }

    /// The field on `S_n` whose target-fiber sums are the column sums.
    pub fn field(&self) -> Result<Kernel<BigRational>> {
        let g: GroupoidRef = Arc::new(full_relation(self.n));
        Kernel::field_from_matrix(g, &self.matrix, Orientation::Auto)
    }

    /// Operator norm by dense decomposition of the assembled blocks.
    pub fn dense_norm(&self, options: &NormOptions) -> Result<f64> {
        let k = self.field()?.to_f64();
        Ok(assemble(k.groupoid(), &k)?.operator_norm(options)?.value)
    }

    /// `sqrt(n) - delta`, which the norm must exceed.
    pub fn lower_bound(&self) -> f64 {
        (self.n as f64).sqrt() - rational_to_f64(&self.delta)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnionRow {
    pub n: usize,
    pub epsilon0: String,
    /// `|P^{pi_0}| sqrt(n F(eps_0))`.
    pub predicted: f64,
    pub computed: f64,
    /// `|P^{pi_0}| (sqrt(n) - delta)`.
    pub lower_bound: f64,
    pub i_norm: f64,
    /// I-norm of the truncation to components `1..=n`.
    pub truncated_i_norm: f64,
    /// Operator norm of the truncation to components `1..=n`.
    pub truncated_norm: f64,
}

#[derive(Debug, Clone)]
pub struct UnionExample {
    pub delta: BigRational,
    pub base_norm: f64,
    pub rows: Vec<UnionRow>,
    /// `|P^pi|` on the whole truncated union, computed directly.
    pub union_norm: f64,
    pub union_i_norm: f64,
    pub groupoid: GroupoidRef,
    pub kernel: Kernel<BigRational>,
}

impl UnionExample {
    pub fn strictly_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].computed > w[0].computed)
    }
}

/// `R = union_{n <= N} (R_0 x S_n)` with `pi = pi_0 x pi_n` and `pi_n` from
/// `A_delta`; components are weighted `1/N`.
pub fn unbounded_union_example(
    n_max: usize,
    delta: &BigRational,
    base: &GroupoidRef,
    base_kernel: &Kernel<BigRational>,
) -> Result<UnionExample> {
    if n_max == 0 {
        return Err(Error::BadParameters("N must be at least 1".into()));
    }
    base_kernel.check_symmetric()?;
    base_kernel.check_probability_field()?;
    if !base.same_structure(base_kernel.groupoid()) {
        return Err(Error::GroupoidMismatch);
    }
    let options = NormOptions::default();
    let base_f = base_kernel.to_f64();
    let base_norm = assemble(base, &base_f)?.operator_norm(&options)?.value;

    let mut parts = Vec::with_capacity(n_max);
    let mut kernels = Vec::with_capacity(n_max);
    let mut rows: Vec<UnionRow> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (field, epsilon0, factor) = if n == 1 {
            let g: GroupoidRef = Arc::new(full_relation(1));
            (Kernel::unit_indicator(g), BigRational::zero(), 1.0)
        } else {
            let a = a_delta_matrix(n, delta)?;
            let factor = a.exact_norm;
            (a.field()?, a.epsilon0, factor)
        };
        let component: GroupoidRef = Arc::new(product(base, field.groupoid()));
        let kernel = Kernel::tensor(base_kernel, &field, component.clone())?;
        let kf = kernel.to_f64();
        let computed = assemble(&component, &kf)?.operator_norm(&options)?.value;
        let i_norm = kf.i_norm();
        let (truncated_i_norm, truncated_norm) = match rows.last() {
            Some(prev) => (prev.truncated_i_norm.max(i_norm), prev.truncated_norm.max(computed)),
            None => (i_norm, computed),
        };
        rows.push(UnionRow {
            n,
            epsilon0: format_rational(&epsilon0),
            predicted: base_norm * factor,
            computed,
            lower_bound: base_norm * ((n as f64).sqrt() - rational_to_f64(delta)),
            i_norm,
            truncated_i_norm,
            truncated_norm,
        });
        parts.push((component, BigRational::new(1.into(), (n_max as i64).into())));
        kernels.push(kernel);
    }
    let groupoid: GroupoidRef = Arc::new(disjoint_union(&parts)?);
    let kernel = Kernel::direct_sum(&kernels, groupoid.clone())?;
    let kf = kernel.to_f64();
    let union_norm = assemble(&groupoid, &kf)?.operator_norm(&options)?.value;
    Ok(UnionExample {
        delta: delta.clone(),
        base_norm,
        rows,
        union_norm,
        union_i_norm: kf.i_norm(),
        groupoid,
        kernel,
    })
}

/// `I_k = [k(k+1)/2, (k+1)(k+2)/2)`.
pub fn interval(k: usize) -> std::ops::Range<usize> {
    k * (k + 1) / 2..(k + 1) * (k + 2) / 2
}

/// Sparse function on arrows `(x, y)` of the pair relation on `0..T`.
pub type PairVector = BTreeMap<(usize, usize), BigRational>;

/// The pair relation on `0..T`, `T = (K+1)(K+2)/2`, with counting measure and
/// `pi(m, n) = 1` iff `n in I_m`. Each `n` lies in exactly one interval, so
/// `sum_m pi(m, n) = 1`: the sums run over the source fiber of `n`.
#[derive(Debug, Clone)]
pub struct IntervalExample {
    pub k_max: usize,
    /// `owner[n] = m` with `n in I_m`.
    owner: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalRow {
    pub k: usize,
    pub interval_len: usize,
    pub xi_norm_sq: String,
    pub image_norm_sq: String,
    pub ratio_sq: String,
    pub ratio: f64,
    /// The three identities hold in exact arithmetic.
    pub exact: bool,
}

impl IntervalExample {
    pub fn new(k_max: usize) -> Self {
        let mut owner = Vec::new();
        for k in 0..=k_max {
            owner.extend(interval(k).map(|_| k));
        }
        IntervalExample { k_max, owner }
    }

    pub fn unit_count(&self) -> usize {
        self.owner.len()
    }

    pub fn pi(&self, m: usize, n: usize) -> BigRational {
        if self.owner[n] == m {
            BigRational::one()
        } else {
            BigRational::zero()
        }
    }

    /// `(P xi)(x, y) = sum_z xi(x, z) pi(y, z)`.
    pub fn apply(&self, xi: &PairVector) -> PairVector {
        let mut out = PairVector::new();
        for (&(x, z), v) in xi {
            // pi(y, z) vanishes unless y is the owner of z
            let y = self.owner[z];
            *out.entry((x, y)).or_insert_with(BigRational::zero) += v * self.pi(y, z);
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// `xi_k`: the indicator of row `k`, columns `I_k`.
    pub fn xi(&self, k: usize) -> PairVector {
        interval(k).map(|a| ((k, a), BigRational::one())).collect()
    }

    /// Squared norm under counting measure.
    pub fn norm_sq(v: &PairVector) -> BigRational {
        v.values().map(|x| x * x).sum()
    }

    /// `sum_m pi(m, n) = 1` for every `n` in the window.
    pub fn source_sums_are_one(&self) -> bool {
        (0..self.unit_count()).all(|n| (0..=self.k_max).map(|m| self.pi(m, n)).sum::<BigRational>().is_one())
    }

    pub fn row(&self, k: usize) -> IntervalRow {
        let xi = self.xi(k);
        let image = self.apply(&xi);
        let a = Self::norm_sq(&xi);
        let b = Self::norm_sq(&image);
        let ratio_sq = &b / &a;
        let expected = BigRational::from_integer((k as i64 + 1).into());
        let image_ok = image.len() == 1 && image.get(&(k, k)) == Some(&expected);
        let exact = a == expected && b == &expected * &expected && ratio_sq == expected && image_ok;
        IntervalRow {
            k,
            interval_len: interval(k).len(),
            xi_norm_sq: format_rational(&a),
            image_norm_sq: format_rational(&b),
            ratio: exact_sqrt(&ratio_sq),
            ratio_sq: format_rational(&ratio_sq),
            exact,
        }
    }

    pub fn rows(&self) -> Vec<IntervalRow> {
        (0..=self.k_max).map(|k| self.row(k)).collect()
    }

    /// The same example as a pair groupoid with unit weights, for small `K`.
    pub fn as_groupoid(&self) -> Result<(GroupoidRef, Kernel<BigRational>)> {
        let t = self.unit_count();
        let class = (0..t).map(|i| (i.to_string(), BigRational::one())).collect::<Vec<_>>();
        let g: GroupoidRef = Arc::new(build_pair_groupoid(&[class])?);
        let k = Kernel::from_fn(g.clone(), |a| self.pi(g.tgt(a), g.src(a)));
        Ok((g, k))
    }
}

/// `sqrt` that is exact on squares of integers.
fn exact_sqrt(r: &BigRational) -> f64 {
    if r.is_integer() {
        let root = r.numer().sqrt();
        if &root * &root == *r.numer() {
            return root.to_f64().unwrap_or(f64::NAN);
        }
    }
    rational_to_f64(r).sqrt()
}

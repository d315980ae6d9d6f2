//! Seeded random instances: small normalized groupoids with symmetric
//! probability fields and arbitrary rational and complex test kernels.

use std::sync::Arc;

use num::complex::Complex;
use num::{BigRational, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::finite::{cyclic_table, dihedral_table, torus_table};
use crate::groupoid::{
    build_group_bundle, build_group_groupoid, build_pair_groupoid, disjoint_union, product, random_full_bisection,
    FiniteGroupoid, GroupoidRef,
};
use crate::kernel::{BisectionMeasure, Kernel};
use crate::scalar::rational;

pub const MAX_ARROWS: usize = 64;
pub const DEFAULT_SEED: u64 = 20_240_601;

pub type ComplexRational = Complex<BigRational>;

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub groupoid: GroupoidRef,
    /// A symmetric probability field.
    pub field: Kernel<BigRational>,
    /// Arbitrary kernels for the algebraic identities.
    pub kernels: [Kernel<BigRational>; 3],
    pub complex: [Kernel<ComplexRational>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Pair,
    Group,
    Bundle,
    Product,
    Union,
}

const SHAPES: [Shape; 5] = [Shape::Pair, Shape::Group, Shape::Bundle, Shape::Product, Shape::Union];

fn small_group<R: Rng>(rng: &mut R, max_order: usize) -> (String, Vec<Vec<usize>>) {
    loop {
        let (name, table) = match rng.gen_range(0..3) {
            0 => {
                let n = rng.gen_range(1..=12);
                (format!("Z_{n}"), cyclic_table(n))
            }
            1 => {
                let n = rng.gen_range(2..=4);
                (format!("Z_{n}^2"), torus_table(n))
            }
            _ => {
                let n = rng.gen_range(2..=8);
                (format!("D_{n}"), dihedral_table(n))
            }
        };
        if table.len() <= max_order {
            return (name, table);
        }
    }
}

/// Partition of the unit space into classes of equal-weight units.
fn random_pair<R: Rng>(rng: &mut R, max_arrows: usize) -> (String, FiniteGroupoid) {
    let mut sizes = Vec::new();
    let mut arrows = 0;
    loop {
        let c = rng.gen_range(1..=5);
        if arrows + c * c > max_arrows || sizes.len() == 4 {
            break;
        }
        arrows += c * c;
        sizes.push(c);
    }
    if sizes.is_empty() {
        sizes.push(1);
    }
    let raw: Vec<i64> = sizes.iter().map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = sizes.iter().zip(&raw).map(|(&c, &w)| c as i64 * w).sum();
    let classes: Vec<Vec<(String, BigRational)>> = sizes
        .iter()
        .zip(&raw)
        .enumerate()
        .map(|(i, (&c, &w))| (0..c).map(|j| (format!("u{i}_{j}"), rational(w, total))).collect())
        .collect();
    (format!("pair{sizes:?}"), build_pair_groupoid(&classes).expect("valid classes"))
}

fn random_bundle<R: Rng>(rng: &mut R, max_arrows: usize) -> (String, FiniteGroupoid) {
    let mut base = Vec::new();
    let mut arrows = 0;
    let mut names = Vec::new();
    while base.len() < 5 && arrows < max_arrows {
        let (name, table) = small_group(rng, max_arrows - arrows);
        arrows += table.len();
        names.push(name);
        base.push((format!("x{}", base.len()), rng.gen_range(1..=4i64), table));
        if rng.gen_bool(0.3) {
            break;
        }
    }
    let total: i64 = base.iter().map(|b| b.1).sum();
    let base: Vec<_> = base.into_iter().map(|(id, w, t)| (id, rational(w, total), t)).collect();
    (format!("bundle[{}]", names.join(",")), build_group_bundle(&base).expect("valid bundle"))
}

fn random_group<R: Rng>(rng: &mut R, max_arrows: usize) -> (String, FiniteGroupoid) {
    let (name, table) = small_group(rng, max_arrows);
    (name, build_group_groupoid(&table, rational(1, 1)).expect("valid group"))
}

fn random_leaf<R: Rng>(rng: &mut R, max_arrows: usize) -> (String, FiniteGroupoid) {
    match rng.gen_range(0..3) {
        0 => random_pair(rng, max_arrows),
        1 => random_group(rng, max_arrows),
        _ => random_bundle(rng, max_arrows),
    }
}

fn random_groupoid<R: Rng>(rng: &mut R, shape: Shape) -> (String, FiniteGroupoid) {
    match shape {
        Shape::Pair => random_pair(rng, MAX_ARROWS),
        Shape::Group => random_group(rng, MAX_ARROWS),
        Shape::Bundle => random_bundle(rng, MAX_ARROWS),
        Shape::Product => {
            let (ln, left) = random_leaf(rng, 8);
            let room = (MAX_ARROWS / left.arrow_count()).max(1);
            let (rn, right) = random_leaf(rng, room);
            let (left, right): (GroupoidRef, GroupoidRef) = (Arc::new(left), Arc::new(right));
            (format!("({ln})x({rn})"), product(&left, &right))
        }
        Shape::Union => {
            let mut parts = Vec::new();
            let mut names = Vec::new();
            let mut arrows = 0;
            while parts.len() < 3 && arrows < MAX_ARROWS {
                let (name, part) = random_leaf(rng, (MAX_ARROWS - arrows).min(24));
                arrows += part.arrow_count();
                names.push(name);
                parts.push((Arc::new(part) as GroupoidRef, rng.gen_range(1..=3i64)));
                if parts.len() >= 2 && rng.gen_bool(0.4) {
                    break;
                }
            }
            let total: i64 = parts.iter().map(|p| p.1).sum();
            let parts: Vec<_> = parts.into_iter().map(|(g, w)| (g, rational(w, total))).collect();
            (format!("union[{}]", names.join(",")), disjoint_union(&parts).expect("valid union"))
        }
    }
}

/// `sum_i w_i (delta_{gamma_i} + delta_{gamma_i^-1}) / 2` over random full
/// bisections, optionally mixed with the uniform field.
pub fn random_symmetric_field<R: Rng>(g: &GroupoidRef, rng: &mut R) -> Kernel<BigRational> {
    let uniform = Kernel::<BigRational>::uniform_field(g.clone());
    if rng.gen_bool(0.1) {
        return uniform;
    }
    let count = rng.gen_range(1..=3);
    let raw: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum::<i64>() * 2;
    let mut items = Vec::new();
    for &w in &raw {
        let b = random_full_bisection(g, rng);
        items.push((b.inverse(g), rational(w, total)));
        items.push((b, rational(w, total)));
    }
    let measure = BisectionMeasure::new(items).expect("weights sum to one");
    let field = Kernel::field_from_bisections(g.clone(), &measure).expect("full bisections");
    if rng.gen_bool(0.25) {
        let t = rational(rng.gen_range(1..=3), 4);
        let s = rational(1, 1) - &t;
        field.scale(&t).add(&uniform.scale(&s)).expect("same groupoid")
    } else {
        field
    }
}

fn random_rational<R: Rng>(rng: &mut R) -> BigRational {
    rational(rng.gen_range(-6..=6), rng.gen_range(1..=5))
}

pub fn random_kernel<R: Rng>(g: &GroupoidRef, rng: &mut R) -> Kernel<BigRational> {
    let density = rng.gen_range(0.2..=1.0);
    let values: Vec<BigRational> = (0..g.arrow_count())
        .map(|_| if rng.gen_bool(density) { random_rational(rng) } else { BigRational::zero() })
        .collect();
    Kernel::from_fn(g.clone(), |a| values[a].clone())
}

pub fn random_complex_kernel<R: Rng>(g: &GroupoidRef, rng: &mut R) -> Kernel<ComplexRational> {
    let values: Vec<ComplexRational> = (0..g.arrow_count())
        .map(|_| {
            if rng.gen_bool(0.6) {
                Complex::new(random_rational(rng), random_rational(rng))
            } else {
                Complex::new(BigRational::zero(), BigRational::zero())
            }
        })
        .collect();
    Kernel::from_fn(g.clone(), |a| values[a].clone())
}

/// `count` instances cycling through the five constructor shapes.
pub fn random_suite(count: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = SHAPES.to_vec();
    (0..count)
        .map(|i| {
            if i % SHAPES.len() == 0 {
                order.shuffle(&mut rng);
            }
            let (name, g) = random_groupoid(&mut rng, order[i % SHAPES.len()]);
            let g: GroupoidRef = Arc::new(g);
            let field = random_symmetric_field(&g, &mut rng);
            let kernels = [random_kernel(&g, &mut rng), random_kernel(&g, &mut rng), random_kernel(&g, &mut rng)];
            let complex = [random_complex_kernel(&g, &mut rng), random_complex_kernel(&g, &mut rng)];
            Instance { name: format!("#{i} {name}"), groupoid: g, field, kernels, complex }
        })
        .collect()
}

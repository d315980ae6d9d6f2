//! Small groups with uniform measures on symmetric generating sets.

use std::sync::Arc;

use num::BigRational;

use crate::groupoid::{build_group_groupoid, full_relation, GroupoidRef};
use crate::kernel::Kernel;

/// `Z_n`, element `i` is `g^i`.
pub fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect()
}

/// `Z_n x Z_n`, element `a + n b` is `(a, b)`.
pub fn torus_table(n: usize) -> Vec<Vec<usize>> {
    let size = n * n;
    (0..size)
        .map(|x| {
            (0..size)
                .map(|y| (x % n + y % n) % n + n * ((x / n + y / n) % n))
                .collect()
        })
        .collect()
}

/// `D_n` of order `2n`, element `i + n f` is `r^i s^f` and
/// `(r^a s^f)(r^b s^g) = r^{a + (-1)^f b} s^{f + g}`.
pub fn dihedral_table(n: usize) -> Vec<Vec<usize>> {
    let size = 2 * n;
    (0..size)
        .map(|x| {
            let (a, f) = (x % n, x / n);
            (0..size)
                .map(|y| {
                    let (b, g) = (y % n, y / n);
                    let rot = if f == 0 { (a + b) % n } else { (a + n - b) % n };
                    rot + n * ((f + g) % 2)
                })
                .collect()
        })
        .collect()
}

/// Uniform probability on the distinct elements listed.
pub fn uniform_on(g: &GroupoidRef, elements: &[usize]) -> Kernel<BigRational> {
    let mut set = elements.to_vec();
    set.sort_unstable();
    set.dedup();
    let w = BigRational::new(1.into(), (set.len() as i64).into());
    Kernel::from_fn(g.clone(), |a| if set.binary_search(&a).is_ok() { w.clone() } else { BigRational::from_integer(0.into()) })
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub groupoid: GroupoidRef,
    pub kernel: Kernel<BigRational>,
}

fn group(table: Vec<Vec<usize>>) -> GroupoidRef {
    Arc::new(build_group_groupoid(&table, BigRational::from_integer(1.into())).expect("valid table"))
}

/// `Z_n` with `pi` uniform on `{e, g, g^-1}`.
pub fn cyclic_preset(n: usize) -> Preset {
    let g = group(cyclic_table(n));
    let kernel = uniform_on(&g, &[0, 1 % n, (n - 1) % n]);
    Preset { name: format!("Z_{n}"), groupoid: g, kernel }
}

/// `Z_n^2` with `pi` uniform on `{e, +-e1, +-e2}`.
pub fn torus_preset(n: usize) -> Preset {
    let g = group(torus_table(n));
    let kernel = uniform_on(&g, &[0, 1 % n, (n - 1) % n, n % (n * n), n * (n - 1)]);
    Preset { name: format!("Z_{n}^2"), groupoid: g, kernel }
}

/// `D_n` with `pi` uniform on `{e, r, r^-1, s}`.
pub fn dihedral_preset(n: usize) -> Preset {
    let g = group(dihedral_table(n));
    let kernel = uniform_on(&g, &[0, 1 % n, (n - 1) % n, n]);
    Preset { name: format!("D_{n}"), groupoid: g, kernel }
}

/// The full relation on `n` points with the uniform field.
pub fn full_relation_preset(n: usize) -> Preset {
    let g: GroupoidRef = Arc::new(full_relation(n));
    let kernel = Kernel::uniform_field(g.clone());
    Preset { name: format!("S_{n}"), groupoid: g, kernel }
}

/// `Z_2`, `Z_n` for `3 <= n <= 8`, `Z_n^2` for `2 <= n <= 4` and the dihedral
/// groups of order at most 16.
pub fn finite_group_suite() -> Vec<Preset> {
    let mut out = vec![cyclic_preset(2)];
    out.extend((3..=8).map(cyclic_preset));
    out.extend((2..=4).map(torus_preset));
    out.extend((3..=8).map(dihedral_preset));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::check_group_table;
    use crate::markov::{assemble, NormOptions};
    use crate::scalar::rational;
    use crate::spectral::{kesten_check, INVARIANT_SET_CAP};

    #[test]
    fn tables_are_groups() {
        for n in 1..=8 {
            assert_eq!(check_group_table(&cyclic_table(n)).unwrap(), 0);
            assert_eq!(check_group_table(&torus_table(n)).unwrap(), 0);
        }
        for n in 2..=8 {
            assert_eq!(check_group_table(&dihedral_table(n)).unwrap(), 0);
        }
        // s r s = r^-1 in D_4
        let d = dihedral_table(4);
        assert_eq!(d[d[4][1]][4], 3);
    }

    #[test]
    fn presets_pass_kesten() {
        for p in finite_group_suite() {
            assert!(p.groupoid.validate().is_empty(), "{}", p.name);
            assert!(p.kernel.is_symmetric() && p.kernel.is_probability_field(), "{}", p.name);
            let report = kesten_check(&p.kernel, 1e-9, INVARIANT_SET_CAP, &NormOptions::default()).unwrap();
            assert!(report.all_pass, "{}", p.name);
        }
    }

    #[test]
    fn named_examples() {
        let z2 = cyclic_preset(2);
        assert_eq!(z2.kernel.get(0), rational(1, 2));
        assert_eq!(z2.kernel.get(1), rational(1, 2));
        let z6 = cyclic_preset(6);
        assert_eq!(z6.kernel.support_len(), 3);
        let p = assemble(&z6.groupoid, &z6.kernel.to_f64()).unwrap();
        assert!((p.operator_norm(&NormOptions::default()).unwrap().value - 1.0).abs() < 1e-12);
        assert_eq!(dihedral_preset(4).kernel.support_len(), 4);
        assert_eq!(torus_preset(2).kernel.support_len(), 3);
    }
}

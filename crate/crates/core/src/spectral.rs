//! Return probabilities, E-spectral radii and the Kesten check.

use std::fmt::Write as _;
use std::sync::Arc;

use num::complex::Complex64;
use num::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groupoid::{restrict, GroupoidRef, UnitSet};
use crate::kernel::Kernel;
use crate::linalg::hermitian_eigen;
use crate::markov::{assemble, BlockOperator, L2Vector, NormOptions};
use crate::scalar::{rational_to_f64, Scalar};

/// Default number of radius terms.
pub const DEFAULT_NMAX: usize = 64;
/// Default cap on the number of invariant sets enumerated by [`kesten_check`].
pub const INVARIANT_SET_CAP: usize = 1 << 16;
/// Eigenvalues closer than this are merged into one atom.
const ATOM_MERGE: f64 = 1e-9;
/// Atoms lighter than this are treated as numerical zero mass.
const ATOM_MASS_FLOOR: f64 = 1e-12;

/// `mu(E)^-1 <P^n chi_E, chi_E>` by applying the operator `n` times.
pub fn return_probability_by_powers<S: Scalar>(kernel: &Kernel<S>, set: &UnitSet, n: usize) -> Result<S> {
    let g = kernel.groupoid();
    let mass = checked_mass(g, set)?;
    let p = assemble(g, kernel)?;
    let chi = L2Vector::indicator(g.clone(), set);
    let mut v = chi.clone();
    for _ in 0..n {
        v = p.apply(&v)?;
    }
    Ok(v.inner(&chi) * S::from_rational(&mass.recip()))
}

/// `mu(E)^-1 sum_{x in E} mu(x) pi^{*n}(id_x)` from the convolution power.
pub fn return_probability_by_convolution<S: Scalar>(kernel: &Kernel<S>, set: &UnitSet, n: usize) -> Result<S> {
    let g = kernel.groupoid();
    let mass = checked_mass(g, set)?;
    let power = kernel.convolution_power(n);
    let total = set.members().iter().fold(S::zero(), |acc, &x| {
        acc + S::from_rational(g.weight(x)) * power.get(g.unit_arrow(x))
    });
    Ok(total * S::from_rational(&mass.recip()))
}

/// Both routes for a probability field: `(by_powers, by_convolution)`.
pub fn return_probability<S: Scalar>(kernel: &Kernel<S>, set: &UnitSet, n: usize) -> Result<(S, S)> {
    kernel.check_probability_field()?;
    Ok((return_probability_by_powers(kernel, set, n)?, return_probability_by_convolution(kernel, set, n)?))
}

fn checked_mass(g: &GroupoidRef, set: &UnitSet) -> Result<BigRational> {
    set.check_range(g)?;
    let mass = set.mass(g);
    if set.is_empty() || mass <= BigRational::from_integer(0.into()) {
        return Err(Error::NullSet);
    }
    Ok(mass)
}

/// Atoms `(t, nu_E({t}))` of the spectral measure of `xi_E = mu(E)^-1/2 chi_E`,
/// sorted by `t`. Requires self-adjoint blocks.
pub fn spectral_measure<S: Scalar>(op: &BlockOperator<S>, set: &UnitSet) -> Result<Vec<(f64, f64)>> {
    let g = op.groupoid();
    let mass = rational_to_f64(&checked_mass(g, set)?);
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for block in op.blocks_over(set) {
        let pos = block.arrows.iter().position(|&a| a == g.unit_arrow(block.unit)).expect("unit arrow in block");
        let (values, vectors) = hermitian_eigen(block.dim(), &block.to_c64());
        let share = rational_to_f64(g.weight(block.unit)) / mass;
        for (j, &t) in values.iter().enumerate() {
            atoms.push((t, share * vectors[(pos, j)].norm_sqr()));
        }
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (t, m) in atoms {
        match merged.last_mut() {
            Some(last) if (t - last.0).abs() <= ATOM_MERGE => {
                // keep the heavier representative
                if m > last.1 {
                    last.0 = t;
                }
                last.1 += m;
            }
            _ => merged.push((t, m)),
        }
    }
    Ok(merged)
}

/// `max |t|` over atoms of `nu_E` with nonzero mass.
pub fn spectral_measure_radius(atoms: &[(f64, f64)]) -> f64 {
    atoms.iter().filter(|a| a.1 > ATOM_MASS_FLOOR).map(|a| a.0.abs()).fold(0.0, f64::max)
}

/// Accelerated limit of `r_n`.
///
/// `r_n` approaches its limit like `1/n`, which plain Aitken only halves.
/// The increments `s_n = n ln r_n - (n-1) ln r_{n-1} = ln(p_{2n}/p_{2n-2})/2`
/// converge geometrically to `ln rho`, so Aitken is applied to them instead.
pub fn extrapolate(r_seq: &[f64]) -> Result<f64> {
    let len = r_seq.len();
    if len < 3 {
        return Err(Error::TooShort(len));
    }
    let last = r_seq[len - 1];
    let cap = last.max(1.0);
    if r_seq[len - 4.min(len)..].iter().any(|&r| r.is_nan() || r <= 0.0) {
        return Ok(last);
    }
    let s = |i: usize| -> f64 {
        let n = (i + 1) as f64;
        if i == 0 {
            r_seq[0].ln()
        } else {
            n * r_seq[i].ln() - (n - 1.0) * r_seq[i - 1].ln()
        }
    };
    let (s0, s1, s2) = (s(len - 3), s(len - 2), s(len - 1));
    let denom = s2 - 2.0 * s1 + s0;
    let accelerated = if denom.abs() > 1e-300 { s2 - (s2 - s1).powi(2) / denom } else { s2 };
    let log_limit = if accelerated.is_finite() { accelerated } else { s2 };
    let value = log_limit.exp();
    if !value.is_finite() {
        return Ok(last);
    }
    Ok(value.clamp(last, cap))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub set: String,
    pub set_mass: f64,
    /// `t(G E) = E`; only then is the value a Kesten quantity.
    pub invariant: bool,
    /// `p_{2n}` for `n = 1..=n_max`.
    pub return_probabilities: Vec<f64>,
    pub r_seq: Vec<f64>,
    pub rho_extrapolated: f64,
    /// `|P^pi|` on the whole groupoid.
    pub operator_norm: f64,
    /// `|P_E^pi|` on `G|_E`.
    pub restricted_norm: f64,
    /// `max |t|` over the atoms of `nu_E`, when the exact method ran.
    pub rho_exact: Option<f64>,
    /// `| |P_E| - 1 | <= tol`, reported only for invariant `E`.
    pub kesten_pass: Option<bool>,
    pub monotonicity_ok: bool,
    pub warnings: Vec<String>,
}

impl SpectralReport {
    /// Rows `n,return_probability_2n,r_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,return_probability_2n,r_n\n");
        for (i, (p, r)) in self.return_probabilities.iter().zip(&self.r_seq).enumerate() {
            let _ = writeln!(out, "{},{},{}", i + 1, p, r);
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RadiusOptions {
    pub n_max: usize,
    pub tol: f64,
    pub norm: NormOptions,
    /// Run the eigendecomposition for the exact radius.
    pub exact: bool,
}

impl Default for RadiusOptions {
    fn default() -> Self {
        RadiusOptions { n_max: DEFAULT_NMAX, tol: 1e-9, norm: NormOptions::default(), exact: true }
    }
}

/// `r_n = (mu(E)^-1 <P^{2n} chi_E, chi_E>)^{1/2n}` for `n = 1..=n_max` plus limits.
pub fn e_spectral_radius<S: Scalar>(kernel: &Kernel<S>, set: &UnitSet, options: &RadiusOptions) -> Result<SpectralReport> {
    let g = kernel.groupoid();
    let mass = checked_mass(g, set)?;
    kernel.check_symmetric()?;
    kernel.check_probability_field()?;
    let p = assemble(g, &kernel.to_c64())?;
    let chi = L2Vector::indicator(g.clone(), set).map(|v: &Complex64| *v);
    let inv_mass = 1.0 / rational_to_f64(&mass);

    let mut returns = Vec::with_capacity(options.n_max);
    let mut v = chi.clone();
    for _ in 0..options.n_max {
        v = p.apply(&p.apply(&v)?)?;
        returns.push(v.inner(&chi).re * inv_mass);
    }
    let r_seq: Vec<f64> = returns
        .iter()
        .enumerate()
        .map(|(i, &q)| q.max(0.0).powf(1.0 / (2.0 * (i + 1) as f64)))
        .collect();

    let mut warnings = Vec::new();
    let monotonicity_ok = r_seq.windows(2).all(|w| w[1] + 1e-12 >= w[0]);
    if !monotonicity_ok {
        warnings.push("r_n is not nondecreasing".to_string());
    }
    let rho_extrapolated = match extrapolate(&r_seq) {
        Ok(v) => v,
        Err(_) => {
            warnings.push(format!("n_max = {} is too short to extrapolate", options.n_max));
            r_seq.last().copied().unwrap_or(0.0)
        }
    };
    if options.n_max >= 2 {
        let slow = r_seq[options.n_max - 1] - r_seq[options.n_max / 2 - 1];
        if slow > 10.0 * options.tol {
            warnings.push(format!("slow convergence: r_nmax - r_nmax/2 = {slow:.3e}"));
        }
    }

    let operator_norm = p.operator_norm(&options.norm)?.value;
    let invariant = g.is_invariant(set);
    let sub: GroupoidRef = Arc::new(restrict(g, set)?);
    let restricted = assemble(&sub, &kernel.restrict_to(&sub)?.to_c64())?;
    let restricted_norm = restricted.operator_norm(&options.norm)?.value;
    let rho_exact = if options.exact {
        Some(spectral_measure_radius(&spectral_measure(p.as_block_operator(), set)?))
    } else {
        None
    };
    let kesten_pass = invariant.then(|| (restricted_norm - 1.0).abs() <= options.tol);

    Ok(SpectralReport {
        set: set.label(g),
        set_mass: rational_to_f64(&mass),
        invariant,
        return_probabilities: returns,
        r_seq,
        rho_extrapolated,
        operator_norm,
        restricted_norm,
        rho_exact,
        kesten_pass,
        monotonicity_ok,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KestenEntry {
    pub set: String,
    pub units: Vec<usize>,
    pub norm: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct KestenReport {
    pub tol: f64,
    /// `false` when there were more invariant sets than the cap and only
    /// orbits were checked.
    pub enumerated: bool,
    pub orbit_norms: Vec<f64>,
    pub entries: Vec<KestenEntry>,
    pub all_pass: bool,
}

/// `|P_E^pi|` for every invariant `E`, flagged against 1.
///
/// Each orbit gets its own restricted operator. An invariant set is a union
/// of orbits and the restricted operator is the direct sum of theirs, so its
/// norm is the largest orbit norm.
pub fn kesten_check<S: Scalar>(kernel: &Kernel<S>, tol: f64, cap: usize, options: &NormOptions) -> Result<KestenReport> {
    kernel.check_symmetric()?;
    kernel.check_probability_field()?;
    let g = kernel.groupoid();
    let orbits = g.orbits();
    let orbit_norm = |orbit: &UnitSet| -> Result<f64> {
        let sub: GroupoidRef = Arc::new(restrict(g, orbit)?);
        let k = kernel.restrict_to(&sub)?.to_c64();
        Ok(assemble(&sub, &k)?.operator_norm(options)?.value)
    };
    let orbit_norms: Vec<f64> = if options.parallel {
        orbits.par_iter().map(orbit_norm).collect::<Result<_>>()?
    } else {
        orbits.iter().map(orbit_norm).collect::<Result<_>>()?
    };
    let entry = |units: Vec<usize>, norm: f64| KestenEntry {
        set: UnitSet::new(units.clone()).label(g),
        units,
        norm,
        pass: (norm - 1.0).abs() <= tol,
    };
    let (enumerated, entries) = match g.invariant_sets(cap) {
        Some(sets) => {
            let entries: Vec<KestenEntry> = sets
                .into_iter()
                .map(|set| {
                    let norm = orbits
                        .iter()
                        .zip(&orbit_norms)
                        .filter(|(o, _)| set.contains(o.members()[0]))
                        .map(|(_, &n)| n)
                        .fold(0.0, f64::max);
                    entry(set.members().to_vec(), norm)
                })
                .collect();
            (true, entries)
        }
        None => (false, orbits.iter().zip(&orbit_norms).map(|(o, &n)| entry(o.members().to_vec(), n)).collect()),
    };
    let all_pass = entries.iter().all(|e: &KestenEntry| e.pass);
    Ok(KestenReport { tol, enumerated, orbit_norms, entries, all_pass })
}

/// `|P| - (second largest distinct |eigenvalue|)` over the whole spectrum.
pub fn spectral_gap<S: Scalar>(op: &BlockOperator<S>) -> f64 {
    let mut mags: Vec<f64> = op
        .blocks()
        .iter()
        .flat_map(|b| hermitian_eigen(b.dim(), &b.to_c64()).0.into_iter().map(f64::abs))
        .collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let top = mags.first().copied().unwrap_or(0.0);
    let second = mags.iter().copied().find(|&m| top - m > ATOM_MERGE).unwrap_or(0.0);
    top - second
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{build_group_groupoid, disjoint_union, full_relation};
    use crate::scalar::rational;

    fn cyclic(n: usize) -> Vec<Vec<usize>> {
        (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect()
    }

    fn z2() -> GroupoidRef {
        Arc::new(build_group_groupoid(&cyclic(2), rational(1, 1)).unwrap())
    }

    #[test]
    fn return_probability_examples() {
        let g = z2();
        let k = Kernel::<BigRational>::uniform_field(g.clone());
        let all = g.all_units();
        assert_eq!(return_probability(&k, &all, 0).unwrap(), (rational(1, 1), rational(1, 1)));
        for n in 1..6 {
            assert_eq!(return_probability(&k, &all, n).unwrap(), (rational(1, 2), rational(1, 2)));
        }
        let s4: GroupoidRef = Arc::new(full_relation(4));
        let k = Kernel::<BigRational>::uniform_field(s4.clone());
        let (a, b) = return_probability(&k, &UnitSet::new(vec![0, 2]), 3).unwrap();
        assert_eq!(a, rational(1, 4));
        assert_eq!(b, rational(1, 4));
        assert!(matches!(return_probability(&k, &UnitSet::new(vec![]), 1), Err(Error::NullSet)));
    }

    #[test]
    fn radius_of_z2() {
        let g = z2();
        let k = Kernel::<f64>::uniform_field(g.clone());
        let report = e_spectral_radius(&k, &g.all_units(), &RadiusOptions::default()).unwrap();
        assert!((report.r_seq[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((report.r_seq[4] - 0.5f64.powf(0.1)).abs() < 1e-12);
        assert!((report.r_seq[4] - 0.9330).abs() < 1e-4);
        assert!(report.monotonicity_ok);
        assert!((report.operator_norm - 1.0).abs() < 1e-12);
        assert!((report.rho_exact.unwrap() - 1.0).abs() < 1e-12);
        assert!((0.99..=1.0001).contains(&report.rho_extrapolated));
        assert_eq!(report.kesten_pass, Some(true));
        assert!(report.to_csv().starts_with("n,return_probability_2n,r_n\n1,"));
    }

    #[test]
    fn identity_kernel_radius_is_one() {
        let g: GroupoidRef = Arc::new(full_relation(3));
        let k = Kernel::<f64>::unit_indicator(g.clone());
        let report = e_spectral_radius(&k, &g.all_units(), &RadiusOptions { n_max: 8, ..Default::default() }).unwrap();
        assert!(report.r_seq.iter().all(|&r| (r - 1.0).abs() < 1e-15));
        assert_eq!(report.rho_extrapolated, 1.0);
    }

    #[test]
    fn non_invariant_set_is_labelled() {
        let g: GroupoidRef = Arc::new(full_relation(4));
        let k = Kernel::<f64>::uniform_field(g.clone());
        let report = e_spectral_radius(&k, &UnitSet::new(vec![1]), &RadiusOptions::default()).unwrap();
        assert!(!report.invariant);
        assert_eq!(report.kesten_pass, None);
        assert!((report.return_probabilities[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn non_symmetric_is_refused() {
        let g: GroupoidRef = Arc::new(full_relation(2));
        let m = vec![vec![0.9, 0.2], vec![0.1, 0.8]];
        let k = Kernel::field_from_matrix(g.clone(), &m, crate::kernel::Orientation::Auto).unwrap();
        assert!(matches!(
            e_spectral_radius(&k, &g.all_units(), &RadiusOptions::default()),
            Err(Error::NonSymmetric(_))
        ));
    }

    #[test]
    fn extrapolation_cases() {
        assert_eq!(extrapolate(&[0.7, 0.7, 0.7, 0.7]).unwrap(), 0.7);
        let seq: Vec<f64> = (1..=50).map(|n| 0.5f64.powf(1.0 / (2.0 * n as f64))).collect();
        let e = extrapolate(&seq).unwrap();
        assert!((0.99..=1.0001).contains(&e), "{e}");
        assert!(extrapolate(&[0.3, 0.3, 0.5]).unwrap().is_finite());
        assert!(matches!(extrapolate(&[1.0, 1.0]), Err(Error::TooShort(2))));
        // geometric approach to 0.8
        let seq: Vec<f64> = (1..=40)
            .map(|n| (0.3 * 0.8f64.powi(2 * n) + 0.7 * 0.5f64.powi(2 * n)).powf(1.0 / (2.0 * n as f64)))
            .collect();
        assert!((extrapolate(&seq).unwrap() - 0.8).abs() < 1e-6);
        assert!((seq[39] - 0.8).abs() > 1e-2);
    }

    #[test]
    fn kesten_on_union() {
        let s2: GroupoidRef = Arc::new(full_relation(2));
        let s3: GroupoidRef = Arc::new(full_relation(3));
        let g: GroupoidRef = Arc::new(disjoint_union(&[(s2, rational(1, 2)), (s3, rational(1, 2))]).unwrap());
        let k = Kernel::<f64>::uniform_field(g.clone());
        let report = kesten_check(&k, 1e-9, INVARIANT_SET_CAP, &NormOptions::default()).unwrap();
        assert!(report.enumerated);
        assert_eq!(report.entries.len(), 3);
        assert!(report.all_pass);
        let capped = kesten_check(&k, 1e-9, 2, &NormOptions::default()).unwrap();
        assert!(!capped.enumerated);
        assert_eq!(capped.entries.len(), 2);
    }

    #[test]
    fn spectral_measure_of_s3() {
        let g: GroupoidRef = Arc::new(full_relation(3));
        let k = Kernel::<f64>::uniform_field(g.clone());
        let p = assemble(&g, &k).unwrap();
        let atoms = spectral_measure(p.as_block_operator(), &g.all_units()).unwrap();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let top = atoms.iter().find(|a| (a.0 - 1.0).abs() < 1e-9).unwrap();
        assert!((top.1 - 1.0 / 3.0).abs() < 1e-12);
        assert!((spectral_gap(p.as_block_operator()) - 1.0).abs() < 1e-12);
    }
}

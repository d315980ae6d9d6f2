//! The invariant suite behind `ggk selftest`.

use std::time::Instant;

use num::BigRational;
use serde::Serialize;

use crate::constructions::appendix::{a_delta_matrix, unbounded_union_example, IntervalExample};
use crate::constructions::finite::{cyclic_preset, finite_group_suite, full_relation_preset, Preset};
use crate::constructions::free_group::{free_group_ball, path_value, BALL_CAP, DENSE_BALL_CAP};
use crate::groupoid::{full_relation, GroupoidRef};
use crate::kernel::Kernel;
use crate::markov::{assemble, norm_sandwich_report, NormOptions};
use crate::scalar::rational;
use crate::spectral::{
    e_spectral_radius, kesten_check, return_probability_by_convolution, return_probability_by_powers, spectral_gap,
    RadiusOptions, INVARIANT_SET_CAP,
};
use crate::suite::{random_suite, Instance, DEFAULT_SEED};
use crate::walk::{estimate_return, with_threads};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SelftestOptions {
    pub instances: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions { instances: 500, seed: DEFAULT_SEED, threads: 1 }
    }
}

fn outcome(name: &'static str, start: Instant, checked: usize, failures: Vec<String>) -> CheckOutcome {
    CheckOutcome { name, passed: failures.is_empty(), checked, failures, seconds: start.elapsed().as_secs_f64() }
}

fn collect<T>(items: &[T], check: impl Fn(&T) -> Result<(), String>) -> Vec<String> {
    items.iter().filter_map(|item| check(item).err()).collect()
}

/// Exact identities of the convolution algebra and the operator map.
pub fn structural_identities(inst: &Instance) -> Result<(), String> {
    let fail = |what: &str| Err(format!("{}: {what}", inst.name));
    let g = &inst.groupoid;
    if !g.validate().is_empty() {
        return fail("groupoid axioms or measure preservation");
    }
    if inst.field.check_probability_field().is_err() {
        return fail("fiber sums of the field");
    }
    if !inst.field.is_symmetric() {
        return fail("field symmetry");
    }
    let [a, b, c] = &inst.kernels;
    let conv = |x: &Kernel<BigRational>, y: &Kernel<BigRational>| x.convolve(y).expect("same groupoid");
    if conv(&conv(a, b), c) != conv(a, &conv(b, c)) {
        return fail("associativity");
    }
    let unit = Kernel::unit_indicator(g.clone());
    if conv(&unit, &inst.field) != inst.field || conv(&inst.field, &unit) != inst.field || conv(&unit, a) != *a {
        return fail("identity law");
    }
    if conv(a, b).involution() != conv(&b.involution(), &a.involution()) || a.involution().involution() != *a {
        return fail("involution on rational kernels");
    }
    let [p, q] = &inst.complex;
    let pq = p.convolve(q).expect("same groupoid");
    if pq.involution() != q.involution().convolve(&p.involution()).expect("same groupoid") {
        return fail("involution on complex kernels");
    }
    let op = |k: &Kernel<BigRational>| assemble(g, k).expect("same groupoid").into_block_operator();
    if op(&conv(a, b)) != op(a).matmul(&op(b)).expect("same groupoid") {
        return fail("operator of a convolution");
    }
    if op(&a.involution()) != op(a).adjoint() {
        return fail("operator of the involution");
    }
    let cp = |k: &Kernel<_>| assemble(g, k).expect("same groupoid").into_block_operator();
    if cp(&pq) != cp(p).matmul(&cp(q)).expect("same groupoid") {
        return fail("operator of a complex convolution");
    }
    Ok(())
}

pub fn sandwich(inst: &Instance) -> Result<(), String> {
    let options = NormOptions::default();
    for (label, k) in [("field", inst.field.to_f64()), ("kernel", inst.kernels[0].to_f64())] {
        let s = norm_sandwich_report(&k, &options).map_err(|e| format!("{}: {e}", inst.name))?;
        if !s.is_ordered(1e-10) {
            return Err(format!("{} {label}: {s:?}", inst.name));
        }
    }
    let defect = assemble(&inst.groupoid, &inst.field.to_f64()).expect("same groupoid").self_adjoint_defect();
    if defect > 1e-12 {
        return Err(format!("{}: self-adjointness defect {defect:e}", inst.name));
    }
    Ok(())
}

pub fn kesten(kernel: &Kernel<BigRational>, name: &str) -> Result<(), String> {
    let report = kesten_check(kernel, 1e-9, INVARIANT_SET_CAP, &NormOptions::default()).map_err(|e| format!("{name}: {e}"))?;
    if !report.all_pass {
        let worst = report.entries.iter().map(|e| (e.norm - 1.0).abs()).fold(0.0, f64::max);
        return Err(format!("{name}: | |P_E| - 1 | reaches {worst:e}"));
    }
    Ok(())
}

pub fn radius(inst: &Instance) -> Result<(), String> {
    let k = inst.field.to_f64();
    let all = inst.groupoid.all_units();
    let report = e_spectral_radius(&k, &all, &RadiusOptions::default()).map_err(|e| format!("{}: {e}", inst.name))?;
    let name = &inst.name;
    if !report.monotonicity_ok {
        return Err(format!("{name}: r_n decreases"));
    }
    if report.r_seq.iter().any(|&r| r > report.operator_norm + 1e-12) {
        return Err(format!("{name}: r_n exceeds the norm"));
    }
    let rho = report.rho_exact.unwrap_or(f64::NAN);
    if (rho - report.operator_norm).abs() > 1e-10 {
        return Err(format!("{name}: spectral-measure radius {rho} vs norm {}", report.operator_norm));
    }
    let gap = spectral_gap(assemble(&inst.groupoid, &k).expect("same groupoid").as_block_operator());
    if gap > 0.05 && (report.rho_extrapolated - report.operator_norm).abs() > 5e-3 {
        return Err(format!("{name}: extrapolated {} vs norm {}", report.rho_extrapolated, report.operator_norm));
    }
    for n in [1, 2, 5, 16] {
        let a = return_probability_by_powers(&k, &all, n).map_err(|e| e.to_string())?;
        let b = return_probability_by_convolution(&k, &all, n).map_err(|e| e.to_string())?;
        if (a - b).abs() > 1e-12 {
            return Err(format!("{name}: return probability routes differ at n = {n}: {a} vs {b}"));
        }
    }
    Ok(())
}

pub fn a_delta_grid() -> Vec<String> {
    let mut failures = Vec::new();
    let options = NormOptions { parallel: true, ..NormOptions::default() };
    for delta in [rational(2, 5), rational(1, 10), rational(1, 100)] {
        for n in 2..=50 {
            let tag = format!("n = {n}, delta = {delta}");
            let a = match a_delta_matrix(n, &delta) {
                Ok(a) => a,
                Err(e) => {
                    failures.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            if !a.column_sums_are_one() || a.min_entry() <= &BigRational::from_integer(0.into()) {
                failures.push(format!("{tag}: column sums or positivity"));
            }
            match a.dense_norm(&options) {
                Ok(d) if (d - a.exact_norm).abs() <= 1e-12 && d > a.lower_bound() => {}
                Ok(d) => failures.push(format!("{tag}: dense {d} vs {}", a.exact_norm)),
                Err(e) => failures.push(format!("{tag}: {e}")),
            }
        }
    }
    failures
}

pub fn union_trend(n_max: usize, delta: &BigRational) -> Vec<String> {
    let point: GroupoidRef = std::sync::Arc::new(full_relation(1));
    let k0 = Kernel::unit_indicator(point.clone());
    let ex = match unbounded_union_example(n_max, delta, &point, &k0) {
        Ok(ex) => ex,
        Err(e) => return vec![e.to_string()],
    };
    let mut failures = Vec::new();
    if !ex.strictly_increasing() {
        failures.push("block norms do not strictly increase".into());
    }
    let last = ex.rows.last().expect("n_max >= 1");
    if last.computed <= last.lower_bound {
        failures.push(format!("last block norm {} does not exceed {}", last.computed, last.lower_bound));
    }
    if ex.rows.windows(2).any(|w| w[1].truncated_i_norm <= w[0].truncated_i_norm) {
        failures.push("truncated I-norm does not grow".into());
    }
    failures
}

pub fn interval_ratios(k_max: usize) -> Vec<String> {
    let ex = IntervalExample::new(k_max);
    let mut failures: Vec<String> =
        ex.rows().into_iter().filter(|r| !r.exact).map(|r| format!("k = {}: {r:?}", r.k)).collect();
    if !ex.source_sums_are_one() {
        failures.push("field sums over the partition".into());
    }
    failures
}

pub fn free_group_contrast(max_radius: usize) -> Vec<String> {
    let mut failures = Vec::new();
    let limit = 3f64.sqrt() / 2.0;
    let mut previous = 0.0;
    for r in 1..=max_radius {
        let report = free_group_ball(2, r, BALL_CAP).and_then(|b| b.report(DENSE_BALL_CAP, 1e-14));
        match report {
            Ok(rep) => {
                if rep.norm <= previous || rep.norm > limit + 1e-9 {
                    failures.push(format!("R = {r}: norm {} after {previous}", rep.norm));
                }
                if (rep.norm - rep.radial_norm).abs() > 1e-9 {
                    failures.push(format!("R = {r}: norm {} vs radial {}", rep.norm, rep.radial_norm));
                }
                previous = rep.norm;
            }
            Err(e) => failures.push(format!("R = {r}: {e}")),
        }
    }
    if max_radius >= 12 && (previous - limit).abs() > 0.05 {
        failures.push(format!("R = 12 norm {previous} is not within 0.05 of {limit}"));
    }
    match free_group_ball(1, 200, BALL_CAP).and_then(|b| b.report(DENSE_BALL_CAP, 1e-14)) {
        Ok(rep) if rep.norm >= 0.999 && (rep.norm - path_value(200)).abs() <= 1e-9 => {}
        Ok(rep) => failures.push(format!("integer ball norm {}", rep.norm)),
        Err(e) => failures.push(e.to_string()),
    }
    failures
}

/// The preset Monte Carlo cells: `(preset, steps)`.
pub fn monte_carlo_cells() -> Vec<(Preset, usize)> {
    vec![(cyclic_preset(2), 4), (full_relation_preset(4), 2), (cyclic_preset(6), 6)]
}

pub fn monte_carlo(samples: usize, seed: u64) -> Vec<String> {
    let mut failures = Vec::new();
    for (i, (preset, n)) in monte_carlo_cells().into_iter().enumerate() {
        let set = preset.groupoid.all_units();
        let exact = return_probability_by_convolution(&preset.kernel, &set, n).map(|p| crate::scalar::rational_to_f64(&p));
        let one = with_threads(1, || estimate_return(&preset.kernel, &set, n, samples, seed + i as u64));
        let four = with_threads(4, || estimate_return(&preset.kernel, &set, n, samples, seed + i as u64));
        match (exact, one, four) {
            (Ok(exact), Ok(Ok(a)), Ok(Ok(b))) => {
                if a.z_score(exact).abs() > 4.0 {
                    failures.push(format!("{} n = {n}: p_hat {} vs exact {exact}", preset.name, a.p_hat));
                }
                if a.returns != b.returns {
                    failures.push(format!("{} n = {n}: thread count changed the estimate", preset.name));
                }
            }
            _ => failures.push(format!("{} n = {n}: estimation failed", preset.name)),
        }
    }
    failures
}

pub fn run_selftest(options: &SelftestOptions) -> Vec<CheckOutcome> {
    let suite = random_suite(options.instances, options.seed);
    let mut out = Vec::new();

    let t = Instant::now();
    out.push(outcome("structural_identities", t, suite.len(), collect(&suite, structural_identities)));
    let t = Instant::now();
    out.push(outcome("norm_sandwich", t, suite.len(), collect(&suite, sandwich)));
    let t = Instant::now();
    let presets = finite_group_suite();
    let mut failures = collect(&suite, |i| kesten(&i.field, &i.name));
    failures.extend(collect(&presets, |p| kesten(&p.kernel, &p.name)));
    out.push(outcome("kesten_finite", t, suite.len() + presets.len(), failures));
    let t = Instant::now();
    out.push(outcome("spectral_radius", t, suite.len(), collect(&suite, radius)));
    let t = Instant::now();
    out.push(outcome("a_delta", t, 147, a_delta_grid()));
    let t = Instant::now();
    out.push(outcome("unbounded_union", t, 25, union_trend(25, &rational(1, 10))));
    let t = Instant::now();
    out.push(outcome("interval_ratios", t, 41, interval_ratios(40)));
    let t = Instant::now();
    out.push(outcome("free_group_contrast", t, 13, free_group_contrast(12)));
    let t = Instant::now();
    out.push(outcome("monte_carlo", t, 3, monte_carlo(100_000, options.seed)));
    out
}

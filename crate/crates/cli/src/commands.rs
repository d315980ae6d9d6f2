use std::path::Path;
use std::sync::Arc;

use num::{BigRational, One};
use serde_json::json;

use ggk_core::constructions::appendix::{a_delta_matrix, f_eps, unbounded_union_example, IntervalExample};
use ggk_core::constructions::finite::finite_group_suite;
use ggk_core::constructions::free_group::{free_group_ball, kesten_value, path_value, BALL_CAP, DENSE_BALL_CAP};
use ggk_core::files::{load_kernel, parse_groupoid, read_file, unit_set, LoadedKernel};
use ggk_core::groupoid::{full_relation, GroupoidRef, UnitSet};
use ggk_core::kernel::Kernel;
use ggk_core::markov::{assemble, norm_sandwich_report, NormOptions};
use ggk_core::scalar::{format_rational, rational_to_f64, Scalar};
use ggk_core::selftest::{run_selftest, SelftestOptions};
use ggk_core::spectral::{e_spectral_radius, kesten_check, RadiusOptions, INVARIANT_SET_CAP};
use ggk_core::walk::{estimate_return, RNG_ALGORITHM};

use crate::report::{f, Report, RunManifest};
use crate::{Cli, CliError, Command, Target};

macro_rules! with_kernel {
    ($loaded:expr, $k:ident => $body:expr) => {
        match $loaded {
            LoadedKernel::Real($k) => $body,
            LoadedKernel::Complex($k) => $body,
        }
    };
}

type Out = Result<Report, CliError>;

pub fn run(cli: &Cli) -> Out {
    let exact = cli.exact;
    let options = NormOptions { parallel: true, ..NormOptions::default() };
    match &cli.command {
        Command::Validate { groupoid } => validate(groupoid, exact),
        Command::Norm { groupoid, kernel, method, tol } => {
            let (_, k) = load(groupoid, kernel)?;
            let options = NormOptions { method: *method, tol: *tol, ..options };
            let s = with_kernel!(k, k => norm_sandwich_report(&k, &options))?;
            let manifest = RunManifest::new("norm", exact)
                .input(groupoid)
                .input(kernel)
                .param("method", format!("{method:?}").to_lowercase())
                .param("tol", tol);
            let mut report = Report::new(manifest, &["quantity", "value"]);
            report.row(vec!["l2_norm".into(), f(s.l2)]);
            report.row(vec!["operator_norm".into(), f(s.operator)]);
            report.row(vec!["i_norm".into(), f(s.i_norm)]);
            report.row(vec!["ordered".into(), s.is_ordered(*tol).to_string()]);
            Ok(report)
        }
        Command::Radius { groupoid, kernel, set, nmax } => {
            let (g, k) = load(groupoid, kernel)?;
            let set = parse_set(&g, set.as_deref())?;
            let radius_options = RadiusOptions { n_max: *nmax, norm: options, ..RadiusOptions::default() };
            let exact_column = match (&k, exact) {
                (LoadedKernel::Real(k), true) => Some(exact_returns(k, &set, *nmax)?),
                _ => None,
            };
            let spectral = with_kernel!(&k, k => e_spectral_radius(k, &set, &radius_options))?;
            let manifest = RunManifest::new("radius", exact)
                .input(groupoid)
                .input(kernel)
                .param("set", set.label(&g))
                .param("nmax", nmax);
            let mut header = vec!["n", "return_probability_2n", "r_n"];
            if exact_column.is_some() {
                header.push("return_probability_2n_exact");
            }
            let mut report = Report::new(manifest, &header);
            for (i, (p, r)) in spectral.return_probabilities.iter().zip(&spectral.r_seq).enumerate() {
                let mut row = vec![(i + 1).to_string(), f(*p), f(*r)];
                if let Some(col) = &exact_column {
                    row.push(col[i].clone());
                }
                report.row(row);
            }
            for w in &spectral.warnings {
                eprintln!("warning: {w}");
            }
            Ok(report.summary(json!({
                "set": spectral.set,
                "set_mass": spectral.set_mass,
                "invariant": spectral.invariant,
                "rho_extrapolated": spectral.rho_extrapolated,
                "rho_exact": spectral.rho_exact,
                "operator_norm": spectral.operator_norm,
                "restricted_norm": spectral.restricted_norm,
                "kesten_pass": spectral.kesten_pass,
                "monotonicity_ok": spectral.monotonicity_ok,
                "warnings": spectral.warnings,
            })))
        }
        Command::Kesten { groupoid, kernel, tol } => {
            let (_, k) = load(groupoid, kernel)?;
            let check = with_kernel!(k, k => kesten_check(&k, *tol, INVARIANT_SET_CAP, &options))?;
            let manifest = RunManifest::new("kesten", exact).input(groupoid).input(kernel).param("tol", tol);
            let mut report = Report::new(manifest, &["set", "units", "norm", "pass"]);
            for e in &check.entries {
                report.row(vec![e.set.clone(), e.units.len().to_string(), format!("{:.12}", e.norm), e.pass.to_string()]);
            }
            report.exit_code = if check.all_pass { 0 } else { 1 };
            Ok(report.summary(json!({
                "enumerated": check.enumerated,
                "orbit_norms": check.orbit_norms,
                "all_pass": check.all_pass,
            })))
        }
        Command::Walk { groupoid, kernel, steps, samples, seed, set } => {
            let (g, k) = load(groupoid, kernel)?;
            let k = k.into_real()?;
            let set = parse_set(&g, set.as_deref())?;
            let estimate = estimate_return(&k, &set, *steps, *samples, *seed)?;
            let exact_value = ggk_core::spectral::return_probability_by_convolution(&k, &set, *steps)?;
            let exact_f = rational_to_f64(&exact_value);
            let mut manifest = RunManifest::new("walk", exact)
                .input(groupoid)
                .input(kernel)
                .param("set", set.label(&g))
                .param("steps", steps)
                .param("samples", samples)
                .param("seed", seed);
            manifest.rng = Some(RNG_ALGORITHM);
            let mut header = vec!["steps", "samples", "returns", "p_hat", "std_error", "exact", "z_score"];
            if exact {
                header.push("exact_rational");
            }
            let mut report = Report::new(manifest, &header);
            let mut row = vec![
                steps.to_string(),
                samples.to_string(),
                estimate.returns.to_string(),
                f(estimate.p_hat),
                f(estimate.std_error),
                f(exact_f),
                f(estimate.z_score(exact_f)),
            ];
            if exact {
                row.push(format_rational(&exact_value));
            }
            report.row(row);
            Ok(report)
        }
        Command::Coo { groupoid, kernel } => {
            let (g, k) = load(groupoid, kernel)?;
            let manifest = RunManifest::new("coo", exact).input(groupoid).input(kernel);
            let mut report = Report::new(manifest, &["row", "col", "value"]);
            match (k, exact) {
                (LoadedKernel::Real(k), true) => coo_rows(&mut report, &g, &k, format_rational)?,
                (k, _) => with_kernel!(k, k => coo_rows(&mut report, &g, &k, |v| {
                    let z = v.to_c64();
                    if z.im == 0.0 { f(z.re) } else { format!("{}{:+}i", z.re, z.im) }
                }))?,
            }
            Ok(report)
        }
        Command::Reproduce { target } => reproduce(target, exact, &options),
        Command::Selftest { instances, seed } => {
            let outcomes =
                run_selftest(&SelftestOptions { instances: *instances, seed: *seed, threads: cli.threads.max(1) });
            let manifest = RunManifest::new("selftest", exact).param("instances", instances).param("seed", seed);
            let mut report = Report::new(manifest, &["check", "passed", "checked", "failures"]);
            for o in &outcomes {
                eprintln!("{}: {} in {:.2}s", o.name, if o.passed { "pass" } else { "FAIL" }, o.seconds);
                for failure in o.failures.iter().take(5) {
                    eprintln!("  {failure}");
                }
                report.row(vec![o.name.into(), o.passed.to_string(), o.checked.to_string(), o.failures.len().to_string()]);
            }
            report.exit_code = if outcomes.iter().all(|o| o.passed) { 0 } else { 1 };
            Ok(report)
        }
    }
}

fn validate(path: &Path, exact: bool) -> Out {
    let g = parse_groupoid(&read_file(path)?)?;
    let violations = g.validate();
    if !violations.is_empty() {
        return Err(CliError::Invalid {
            message: format!("{} violation(s); first: {}", violations.len(), violations[0]),
            violations: violations.iter().map(|v| (v.kind().to_string(), v.to_string())).collect(),
        });
    }
    if !g.is_normalized() {
        return Err(ggk_core::Error::NotProbabilityMeasure(g.total_mass()).into());
    }
    let manifest = RunManifest::new("validate", exact).input(path);
    let mut report = Report::new(manifest, &["property", "value"]);
    report.row(vec!["units".into(), g.unit_count().to_string()]);
    report.row(vec!["arrows".into(), g.arrow_count().to_string()]);
    report.row(vec!["orbits".into(), g.orbits().len().to_string()]);
    report.row(vec!["total_mass".into(), format_rational(&g.total_mass())]);
    Ok(report)
}

fn load(groupoid: &Path, kernel: &Path) -> Result<(GroupoidRef, LoadedKernel), CliError> {
    let g = ggk_core::files::load_groupoid(groupoid)?;
    let k = load_kernel(&g, kernel)?;
    Ok((g, k))
}

fn parse_set(g: &GroupoidRef, set: Option<&str>) -> Result<UnitSet, CliError> {
    match set {
        None => Ok(g.all_units()),
        Some(text) => {
            let ids: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            Ok(unit_set(g, &ids)?)
        }
    }
}

/// `mu(E)^-1 sum_{x in E} mu(x) pi^{*2n}(id_x)` for `n = 1..=nmax`, as rationals.
fn exact_returns(k: &Kernel<BigRational>, set: &UnitSet, nmax: usize) -> Result<Vec<String>, CliError> {
    let g = k.groupoid();
    let mass = set.mass(g);
    if mass == BigRational::from_integer(0.into()) {
        return Err(ggk_core::Error::NullSet.into());
    }
    let square = k.convolve(k)?;
    let mut power = square.clone();
    let mut out = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        let total: BigRational =
            set.members().iter().map(|&x| g.weight(x) * power.get(g.unit_arrow(x))).sum::<BigRational>() / &mass;
        out.push(format_rational(&total));
        if n < nmax {
            power = power.convolve(&square)?;
        }
    }
    Ok(out)
}

fn coo_rows<S: Scalar>(
    report: &mut Report,
    g: &GroupoidRef,
    k: &Kernel<S>,
    show: impl Fn(&S) -> String,
) -> Result<(), CliError> {
    let op = assemble(g, k)?;
    for b in op.blocks() {
        let d = b.dim();
        for i in 0..d {
            for j in 0..d {
                let v = b.at(i, j);
                if !num::Zero::is_zero(v) {
                    report.row(vec![g.arrow(b.arrows[i]).id.clone(), g.arrow(b.arrows[j]).id.clone(), show(v)]);
                }
            }
        }
    }
    Ok(())
}

fn reproduce(target: &Target, exact: bool, options: &NormOptions) -> Out {
    match target {
        Target::AppendixA { nmax, delta } => {
            let point: GroupoidRef = Arc::new(full_relation(1));
            let base = Kernel::unit_indicator(point.clone());
            let ex = unbounded_union_example(*nmax, delta, &point, &base)?;
            let manifest = RunManifest::new("reproduce appendix-a", exact)
                .param("nmax", nmax)
                .param("delta", format_rational(delta));
            let mut header = vec![
                "n",
                "predicted",
                "computed",
                "gap",
                "epsilon0",
                "lower_bound",
                "i_norm",
                "truncated_i_norm",
                "truncated_norm",
            ];
            if exact {
                header.push("predicted_sq_exact");
            }
            let mut report = Report::new(manifest, &header);
            for r in &ex.rows {
                let mut row = vec![
                    r.n.to_string(),
                    f(r.predicted),
                    f(r.computed),
                    f(r.computed - r.predicted),
                    r.epsilon0.clone(),
                    f(r.lower_bound),
                    f(r.i_norm),
                    f(r.truncated_i_norm),
                    f(r.truncated_norm),
                ];
                if exact {
                    let sq = if r.n == 1 {
                        BigRational::one()
                    } else {
                        let eps = ggk_core::scalar::parse_rational(&r.epsilon0).expect("formatted rational");
                        f_eps(r.n, &eps) * BigRational::from_integer((r.n as i64).into())
                    };
                    row.push(format_rational(&sq));
                }
                report.row(row);
            }
            Ok(report.summary(json!({
                "base_norm": ex.base_norm,
                "union_norm": ex.union_norm,
                "union_i_norm": ex.union_i_norm,
                "strictly_increasing": ex.strictly_increasing(),
            })))
        }
        Target::ADelta { nmax, delta } => {
            let deltas: Vec<String> = delta.iter().map(format_rational).collect();
            let manifest = RunManifest::new("reproduce a-delta", exact).param("nmax", nmax).param("delta", &deltas);
            let mut header = vec![
                "n",
                "predicted",
                "computed",
                "gap",
                "delta",
                "epsilon0",
                "column_sums_one",
                "entries_positive",
                "lower_bound",
            ];
            if exact {
                header.push("predicted_sq_exact");
            }
            let mut report = Report::new(manifest, &header);
            for d in delta {
                for n in 2..=*nmax {
                    let a = a_delta_matrix(n, d)?;
                    let computed = a.dense_norm(options)?;
                    let mut row = vec![
                        n.to_string(),
                        f(a.exact_norm),
                        f(computed),
                        f(computed - a.exact_norm),
                        format_rational(d),
                        format_rational(&a.epsilon0),
                        a.column_sums_are_one().to_string(),
                        (a.min_entry() > &BigRational::from_integer(0.into())).to_string(),
                        f(a.lower_bound()),
                    ];
                    if exact {
                        row.push(format_rational(&(&a.f_eps0 * BigRational::from_integer((n as i64).into()))));
                    }
                    report.row(row);
                }
            }
            Ok(report)
        }
        Target::AppendixB { kmax } => {
            let ex = IntervalExample::new(*kmax);
            let manifest = RunManifest::new("reproduce appendix-b", exact).param("kmax", kmax);
            let mut report = Report::new(
                manifest,
                &["k", "predicted", "computed", "gap", "interval_len", "xi_norm_sq", "image_norm_sq", "ratio_sq", "exact"],
            );
            for r in ex.rows() {
                let predicted = ((r.k + 1) as f64).sqrt();
                report.row(vec![
                    r.k.to_string(),
                    f(predicted),
                    f(r.ratio),
                    f(r.ratio - predicted),
                    r.interval_len.to_string(),
                    r.xi_norm_sq,
                    r.image_norm_sq,
                    r.ratio_sq,
                    r.exact.to_string(),
                ]);
            }
            Ok(report.summary(json!({"source_sums_are_one": ex.source_sums_are_one()})))
        }
        Target::FreeGroup { gens, radius } => {
            let manifest = RunManifest::new("reproduce free-group", exact).param("gens", gens).param("radius", radius);
            let mut report = Report::new(
                manifest,
                &["R", "predicted", "computed", "gap", "vertices", "method", "closed_form", "closed_form_gap"],
            );
            for r in 1..=*radius {
                let rep = free_group_ball(*gens, r, BALL_CAP)?.report(DENSE_BALL_CAP, 1e-14)?;
                let closed = if *gens == 1 { path_value(r) } else { kesten_value(*gens) };
                report.row(vec![
                    r.to_string(),
                    f(rep.radial_norm),
                    f(rep.norm),
                    f(rep.norm - rep.radial_norm),
                    rep.vertices.to_string(),
                    rep.method.to_string(),
                    f(closed),
                    f(closed - rep.norm),
                ]);
            }
            Ok(report)
        }
        Target::FiniteSuite => {
            let manifest = RunManifest::new("reproduce finite-suite", exact);
            let mut report = Report::new(
                manifest,
                &["group", "predicted", "computed", "gap", "arrows", "rho_extrapolated", "rho_exact", "kesten_pass"],
            );
            for preset in finite_group_suite() {
                let all = preset.groupoid.all_units();
                let radius_options = RadiusOptions { norm: *options, ..RadiusOptions::default() };
                let s = e_spectral_radius(&preset.kernel, &all, &radius_options)?;
                report.row(vec![
                    preset.name.clone(),
                    f(1.0),
                    f(s.operator_norm),
                    f(s.operator_norm - 1.0),
                    preset.groupoid.arrow_count().to_string(),
                    f(s.rho_extrapolated),
                    s.rho_exact.map(f).unwrap_or_default(),
                    s.kesten_pass.map(|p| p.to_string()).unwrap_or_default(),
                ]);
            }
            Ok(report)
        }
    }
}

//! The acceptance criteria, one PASS/FAIL line each. Every check recomputes
//! its expected values from definitions rather than reusing library helpers.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use num::{BigRational, One, ToPrimitive, Zero};

use ggk_core::constructions::appendix::{a_delta_matrix, f_eps, unbounded_union_example, IntervalExample};
use ggk_core::constructions::finite::{cyclic_preset, finite_group_suite, full_relation_preset};
use ggk_core::constructions::free_group::{free_group_ball, BALL_CAP, DENSE_BALL_CAP};
use ggk_core::groupoid::{full_relation, FiniteGroupoid, GroupoidRef};
use ggk_core::kernel::Kernel;
use ggk_core::markov::{assemble, norm_sandwich_report, NormOptions};
use ggk_core::scalar::Scalar;
use ggk_core::spectral::{
    e_spectral_radius, kesten_check, return_probability_by_convolution, return_probability_by_powers, spectral_gap,
    RadiusOptions, INVARIANT_SET_CAP,
};
use ggk_core::suite::{random_suite, Instance, DEFAULT_SEED};
use ggk_core::walk::{estimate_return, with_threads};

const SUITE_SIZE: usize = 500;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `(a * b)(gh) += a(g) b(h)` over every composable pair.
fn naive_convolve<S: Scalar>(a: &Kernel<S>, b: &Kernel<S>) -> Vec<S> {
    let g = a.groupoid();
    let mut out = vec![S::zero(); g.arrow_count()];
    for x in 0..g.arrow_count() {
        for &y in g.target_fiber(g.src(x)) {
            let xy = g.compose(x, y).expect("composable pair has a product");
            out[xy] = out[xy].clone() + a.get(x) * b.get(y);
        }
    }
    out
}

fn naive_involution<S: Scalar>(a: &Kernel<S>) -> Vec<S> {
    let g = a.groupoid();
    (0..g.arrow_count()).map(|x| a.get(g.inverse(x)).conj()).collect()
}

fn kernel_of<S: Scalar>(g: &GroupoidRef, values: &[S]) -> Kernel<S> {
    Kernel::from_fn(g.clone(), |a| values[a].clone())
}

type Sparse<S> = Vec<BTreeMap<usize, S>>;

/// Row `g` of `P^pi`: `(P xi)(g) = sum_{h in G^{s(g)}} xi(gh) pi(h)`.
fn naive_operator<S: Scalar>(k: &Kernel<S>) -> Sparse<S> {
    let g = k.groupoid();
    (0..g.arrow_count())
        .map(|x| {
            let mut row = BTreeMap::new();
            for &h in g.target_fiber(g.src(x)) {
                let v = k.get(h);
                if !v.is_zero() {
                    let e = row.entry(g.compose(x, h).expect("composable")).or_insert_with(S::zero);
                    *e = e.clone() + v;
                }
            }
            row.retain(|_, v| !v.is_zero());
            row
        })
        .collect()
}

fn sparse_product<S: Scalar>(a: &Sparse<S>, b: &Sparse<S>) -> Sparse<S> {
    a.iter()
        .map(|row| {
            let mut out: BTreeMap<usize, S> = BTreeMap::new();
            for (&k, v) in row {
                for (&j, w) in &b[k] {
                    let e = out.entry(j).or_insert_with(S::zero);
                    *e = e.clone() + v.clone() * w.clone();
                }
            }
            out.retain(|_, v| !v.is_zero());
            out
        })
        .collect()
}

/// The library operator agrees with the definition entry by entry.
fn operator_matches<S: Scalar>(k: &Kernel<S>) -> bool {
    let naive = naive_operator(k);
    let op = assemble(k.groupoid(), k).expect("same groupoid");
    let mut seen = 0;
    for b in op.blocks() {
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                let expected = naive[b.arrows[i]].get(&b.arrows[j]).cloned().unwrap_or_else(S::zero);
                if *b.at(i, j) != expected {
                    return false;
                }
                if !expected.is_zero() {
                    seen += 1;
                }
            }
        }
    }
    seen == naive.iter().map(BTreeMap::len).sum::<usize>()
}

fn orbits(g: &FiniteGroupoid) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..g.unit_count()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for a in 0..g.arrow_count() {
        let (s, t) = (find(&mut parent, g.src(a)), find(&mut parent, g.tgt(a)));
        parent[s] = t;
    }
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in 0..g.unit_count() {
        let r = find(&mut parent, x);
        classes.entry(r).or_default().push(x);
    }
    classes.into_values().collect()
}

/// `mu(E)^-1 sum_{x in E} mu(x) pi^{*n}(id_x)` with `E` all units.
fn exact_return(k: &Kernel<BigRational>, n: usize) -> BigRational {
    let g = k.groupoid();
    let mut power: Vec<BigRational> =
        (0..g.arrow_count()).map(|a| if g.is_unit_arrow(a) { BigRational::one() } else { BigRational::zero() }).collect();
    for _ in 0..n {
        power = naive_convolve(&kernel_of(g, &power), k);
    }
    (0..g.unit_count()).map(|x| g.weight(x) * &power[g.unit_arrow(x)]).sum()
}

fn structural(inst: &Instance) -> Result<(), String> {
    let g = &inst.groupoid;
    let fail = |what: &str| Err(format!("{}: {what}", inst.name));
    if g.arrow_count() > 64 {
        return fail("more than 64 arrows");
    }
    let total: BigRational = (0..g.unit_count()).map(|x| g.weight(x).clone()).sum();
    if !total.is_one() || (0..g.arrow_count()).any(|a| g.weight(g.src(a)) != g.weight(g.tgt(a))) {
        return fail("measure");
    }
    let mut sums = vec![BigRational::zero(); g.unit_count()];
    for a in 0..g.arrow_count() {
        sums[g.tgt(a)] += inst.field.get(a);
    }
    if sums.iter().any(|s| !s.is_one()) {
        return fail("fiber sums");
    }
    let [a, b, c] = &inst.kernels;
    let ab = naive_convolve(a, b);
    if a.convolve(b).expect("same groupoid") != kernel_of(g, &ab) {
        return fail("library convolution");
    }
    let bc = kernel_of(g, &naive_convolve(b, c));
    if naive_convolve(&kernel_of(g, &ab), c) != naive_convolve(a, &bc) {
        return fail("associativity");
    }
    let unit: Vec<BigRational> =
        (0..g.arrow_count()).map(|x| if g.is_unit_arrow(x) { BigRational::one() } else { BigRational::zero() }).collect();
    let unit = kernel_of(g, &unit);
    let field: Vec<BigRational> = (0..g.arrow_count()).map(|x| inst.field.get(x)).collect();
    if naive_convolve(&unit, &inst.field) != field || naive_convolve(&inst.field, &unit) != field {
        return fail("identity law");
    }
    let lhs = naive_involution(&kernel_of(g, &ab));
    let rhs = naive_convolve(&kernel_of(g, &naive_involution(b)), &kernel_of(g, &naive_involution(a)));
    if lhs != rhs || kernel_of(g, &naive_involution(a)).involution() != *a {
        return fail("involution");
    }
    let [p, r] = &inst.complex;
    let pr = kernel_of(g, &naive_convolve(p, r));
    let lhs = naive_involution(&pr);
    let rhs = naive_convolve(&kernel_of(g, &naive_involution(r)), &kernel_of(g, &naive_involution(p)));
    if lhs != rhs || p.involution() != kernel_of(g, &naive_involution(p)) {
        return fail("complex involution");
    }
    if sparse_product(&naive_operator(a), &naive_operator(b)) != naive_operator(&kernel_of(g, &ab)) {
        return fail("operator of a convolution");
    }
    if sparse_product(&naive_operator(p), &naive_operator(r)) != naive_operator(&pr) {
        return fail("operator of a complex convolution");
    }
    if !operator_matches(a) || !operator_matches(&inst.field) || !operator_matches(p) {
        return fail("library operator");
    }
    Ok(())
}

fn criterion_1(suite: &[Instance]) -> Check {
    let t = Instant::now();
    for inst in suite {
        structural(inst)?;
    }
    let secs = t.elapsed().as_secs_f64();
    if secs > 60.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{} instances exact in {secs:.1}s", suite.len()))
}

fn criterion_2(suite: &[Instance]) -> Check {
    let mut worst_defect: f64 = 0.0;
    for inst in suite {
        let g = &inst.groupoid;
        for k in [&inst.field, &inst.kernels[0]] {
            let kf = k.to_f64();
            let s = norm_sandwich_report(&kf, &NormOptions::default()).map_err(|e| format!("{}: {e}", inst.name))?;
            let l2 = (0..g.arrow_count()).map(|a| to_f64(g.weight(g.tgt(a))) * kf.get(a).powi(2)).sum::<f64>().sqrt();
            let (mut by_src, mut by_tgt) = (vec![0.0; g.unit_count()], vec![0.0; g.unit_count()]);
            for a in 0..g.arrow_count() {
                by_src[g.src(a)] += kf.get(a).abs();
                by_tgt[g.tgt(a)] += kf.get(a).abs();
            }
            let i_norm = by_src.iter().chain(&by_tgt).copied().fold(0.0, f64::max);
            if (s.l2 - l2).abs() > 1e-12 || (s.i_norm - i_norm).abs() > 1e-12 {
                return Err(format!("{}: norms {s:?} vs l2 {l2}, I {i_norm}", inst.name));
            }
            if s.l2 > s.operator + 1e-10 || s.operator > s.i_norm + 1e-10 {
                return Err(format!("{}: sandwich violated {s:?}", inst.name));
            }
        }
        let m = naive_operator(&inst.field.to_f64());
        for (x, row) in m.iter().enumerate() {
            for (&y, v) in row {
                let back = m[y].get(&x).copied().unwrap_or(0.0);
                worst_defect = worst_defect.max((v - back).abs());
            }
        }
        let lib = assemble(g, &inst.field.to_f64()).expect("same groupoid").self_adjoint_defect();
        worst_defect = worst_defect.max(lib);
    }
    if worst_defect > 1e-12 {
        return Err(format!("self-adjointness defect {worst_defect:e}"));
    }
    Ok(format!("{} instances x 2 kernels ordered, defect <= {worst_defect:e}", suite.len()))
}

fn criterion_3(suite: &[Instance]) -> Check {
    let presets = finite_group_suite();
    let kernels = suite.iter().map(|i| (&i.name, &i.field)).chain(presets.iter().map(|p| (&p.name, &p.kernel)));
    let mut sets = 0;
    let mut worst: f64 = 0.0;
    for (name, k) in kernels {
        let report = kesten_check(k, 1e-9, INVARIANT_SET_CAP, &NormOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        let orbits = orbits(k.groupoid());
        if report.enumerated && report.entries.len() != (1usize << orbits.len()) - 1 {
            return Err(format!("{name}: {} invariant sets for {} orbits", report.entries.len(), orbits.len()));
        }
        for e in &report.entries {
            worst = worst.max((e.norm - 1.0).abs());
        }
        if !report.all_pass || worst > 1e-9 {
            return Err(format!("{name}: | |P_E| - 1 | = {worst:e}"));
        }
        // certificate: P chi_O = chi_O on each orbit, so |P_O| >= 1 = I-norm
        let g = k.groupoid();
        let p = naive_operator(k);
        for orbit in &orbits {
            let inside = |a: usize| orbit.contains(&g.tgt(a));
            for (a, row) in p.iter().enumerate().filter(|(a, _)| inside(*a)) {
                let image: BigRational = row.iter().filter(|(b, _)| inside(**b)).map(|(_, v)| v.clone()).sum();
                if !image.is_one() {
                    return Err(format!("{name}: P chi_O differs from chi_O at arrow {a}"));
                }
            }
        }
        sets += report.entries.len();
    }
    Ok(format!("{sets} invariant sets over {} kernels, max | |P_E| - 1 | = {worst:e}", suite.len() + presets.len()))
}

fn criterion_4(suite: &[Instance]) -> Check {
    let mut gapped = 0;
    let mut worst_extrapolation: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for inst in suite {
        let name = &inst.name;
        let k = inst.field.to_f64();
        let all = inst.groupoid.all_units();
        let rep = e_spectral_radius(&k, &all, &RadiusOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        if rep.r_seq.len() != 64 {
            return Err(format!("{name}: {} terms", rep.r_seq.len()));
        }
        if rep.r_seq.windows(2).any(|w| w[1] < w[0] - 1e-12) {
            return Err(format!("{name}: r_n decreases"));
        }
        if rep.r_seq.iter().any(|&r| r > rep.operator_norm + 1e-12) {
            return Err(format!("{name}: r_n above the norm"));
        }
        let rho = rep.rho_exact.ok_or_else(|| format!("{name}: no exact radius"))?;
        worst_exact = worst_exact.max((rho - rep.operator_norm).abs());
        let gap = spectral_gap(assemble(&inst.groupoid, &k).expect("same groupoid").as_block_operator());
        if gap > 0.05 {
            gapped += 1;
            worst_extrapolation = worst_extrapolation.max((rep.rho_extrapolated - rep.operator_norm).abs());
        }
        for n in 1..=3 {
            let exact = to_f64(&exact_return(&inst.field, 2 * n));
            if (rep.return_probabilities[n - 1] - exact).abs() > 1e-12 {
                return Err(format!("{name}: return probability at 2n = {} is {} not {exact}", 2 * n, rep.return_probabilities[n - 1]));
            }
        }
        for n in [1, 2, 7, 16] {
            let a = return_probability_by_powers(&k, &all, n).map_err(|e| e.to_string())?;
            let b = return_probability_by_convolution(&k, &all, n).map_err(|e| e.to_string())?;
            if (a - b).abs() > 1e-12 {
                return Err(format!("{name}: routes differ at n = {n}"));
            }
        }
    }
    if worst_exact > 1e-10 {
        return Err(format!("spectral-measure radius off by {worst_exact:e}"));
    }
    if worst_extrapolation > 5e-3 {
        return Err(format!("extrapolation off by {worst_extrapolation:e}"));
    }
    Ok(format!(
        "{} instances; {gapped} with gap > 0.05, extrapolation error <= {worst_extrapolation:.2e}; exact radius error <= {worst_exact:.2e}",
        suite.len()
    ))
}

fn criterion_5() -> Check {
    let t = Instant::now();
    let options = NormOptions { parallel: true, ..NormOptions::default() };
    let mut worst: f64 = 0.0;
    for (delta, d) in [(q(2, 5), 0.4), (q(1, 10), 0.1), (q(1, 100), 0.01)] {
        for n in 2..=50 {
            let tag = format!("n = {n}, delta = {d}");
            let a = a_delta_matrix(n, &delta).map_err(|e| format!("{tag}: {e}"))?;
            let nq = BigRational::from_integer((n as i64).into());
            for j in 0..n {
                let col: BigRational = (0..n).map(|i| a.matrix[i][j].clone()).sum();
                if !col.is_one() {
                    return Err(format!("{tag}: column {j} sums to {col}"));
                }
            }
            if a.matrix.iter().flatten().any(|x| *x <= BigRational::zero()) {
                return Err(format!("{tag}: non-positive entry"));
            }
            if &a.epsilon0 * &a.epsilon0 * BigRational::from_integer((4 * n as i64).into()) > &delta * &delta {
                return Err(format!("{tag}: epsilon_0 exceeds delta / (2 sqrt n)"));
            }
            // A = c 1^T, so |A| = sqrt(n) |c|
            let c_sq: BigRational = a.matrix.iter().map(|row| &row[0] * &row[0]).sum();
            if c_sq != f_eps(n, &a.epsilon0) {
                return Err(format!("{tag}: |c|^2 != F(epsilon_0)"));
            }
            let oracle = to_f64(&(&nq * c_sq)).sqrt();
            let dense = a.dense_norm(&options).map_err(|e| format!("{tag}: {e}"))?;
            worst = worst.max((dense - oracle).abs());
            if (dense - oracle).abs() > 1e-12 || dense <= (n as f64).sqrt() - d {
                return Err(format!("{tag}: dense {dense} vs sqrt(nF) {oracle}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs > 10.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("147 matrices, max |dense - sqrt(nF)| = {worst:e}, {secs:.2}s"))
}

fn criterion_6() -> Check {
    let point: GroupoidRef = std::sync::Arc::new(full_relation(1));
    let ex = unbounded_union_example(25, &q(1, 10), &point, &Kernel::unit_indicator(point.clone()))
        .map_err(|e| e.to_string())?;
    let norms: Vec<f64> = ex.rows.iter().map(|r| r.computed).collect();
    if norms.len() != 25 || norms.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("block norms not strictly increasing: {norms:?}"));
    }
    for r in ex.rows.iter().skip(1) {
        let a = a_delta_matrix(r.n, &q(1, 10)).map_err(|e| e.to_string())?;
        let oracle = (r.n as f64 * to_f64(&f_eps(r.n, &a.epsilon0))).sqrt();
        if (r.computed - oracle).abs() > 1e-10 {
            return Err(format!("N = {}: block norm {} vs {oracle}", r.n, r.computed));
        }
    }
    let last = norms[24];
    if last <= 25f64.sqrt() - 0.1 {
        return Err(format!("N = 25 norm {last} <= 4.9"));
    }
    let i_norms: Vec<f64> = ex.rows.iter().map(|r| r.truncated_i_norm).collect();
    if i_norms.windows(2).any(|w| w[1] <= w[0]) {
        return Err("truncated I-norm does not grow".into());
    }
    Ok(format!(
        "norms {:.5} .. {last:.6} > 4.9; truncated I-norm {:.3} .. {:.3}",
        norms[0], i_norms[0], i_norms[24]
    ))
}

fn criterion_7() -> Check {
    let t = Instant::now();
    let k_max = 40;
    let ex = IntervalExample::new(k_max);
    let len = |k: usize| k + 1;
    let start = |k: usize| k * (k + 1) / 2;
    let total = start(k_max + 1);
    let owner = |z: usize| (0..=k_max).find(|&m| (start(m)..start(m) + len(m)).contains(&z)).expect("covered");
    let owners: Vec<usize> = (0..total).map(owner).collect();
    for (k, row) in ex.rows().into_iter().enumerate() {
        // brute force over the row x = k: (P xi)(k, y) = sum_z xi(k, z) [z in I_y]
        let xi = |z: usize| (start(k)..start(k) + len(k)).contains(&z) as u64;
        let xi_sq: u64 = (0..total).map(|z| xi(z) * xi(z)).sum();
        let image_sq: u64 =
            (0..total).map(|y| (0..total).filter(|&z| owners[z] == y).map(xi).sum::<u64>()).map(|v| v * v).sum();
        let lib_image = IntervalExample::norm_sq(&ex.apply(&ex.xi(k)));
        let kk = (k + 1) as u64;
        if xi_sq != kk || image_sq != kk * kk || lib_image != BigRational::from_integer(image_sq.into()) {
            return Err(format!("k = {k}: brute force {xi_sq}, {image_sq}; library {lib_image}"));
        }
        let exact_strings = [kk.to_string(), (kk * kk).to_string(), kk.to_string()];
        if !row.exact || [&row.xi_norm_sq, &row.image_norm_sq, &row.ratio_sq] != [&exact_strings[0], &exact_strings[1], &exact_strings[2]] {
            return Err(format!("k = {k}: {row:?}"));
        }
        let root = (kk as f64).sqrt();
        if row.ratio != root {
            return Err(format!("k = {k}: ratio {} vs {root}", row.ratio));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs > 30.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("k = 0..=40 exact, final ratio sqrt(41); {secs:.2}s"))
}

fn criterion_8() -> Check {
    let oracle = 3f64.sqrt() / 2.0;
    let mut previous = 0.0;
    let mut norms = Vec::new();
    for r in 1..=12 {
        let norm = free_group_ball(2, r, BALL_CAP)
            .and_then(|b| b.report(DENSE_BALL_CAP, 1e-14))
            .map_err(|e| format!("R = {r}: {e}"))?
            .norm;
        if norm <= previous || norm > 0.8660 + 1e-9 {
            return Err(format!("R = {r}: {norm} after {previous}"));
        }
        previous = norm;
        norms.push(norm);
    }
    if (previous - oracle).abs() > 0.05 {
        return Err(format!("R = 12: {previous} vs {oracle}"));
    }
    let z = free_group_ball(1, 200, BALL_CAP).and_then(|b| b.report(DENSE_BALL_CAP, 1e-14)).map_err(|e| e.to_string())?;
    let path = (std::f64::consts::PI / 402.0).cos();
    if z.norm < 0.999 || (z.norm - path).abs() > 1e-9 {
        return Err(format!("integer ball: {} vs cos(pi/402) = {path}", z.norm));
    }
    Ok(format!(
        "F_2 norms {:.4} .. {previous:.6} (limit {oracle:.6}); Z ball R = 200: {:.9} vs {path:.9}",
        norms[0], z.norm
    ))
}

fn criterion_9() -> Check {
    let cells = [(cyclic_preset(2), 4), (full_relation_preset(4), 2), (cyclic_preset(6), 6)];
    let mut notes = Vec::new();
    for (i, (preset, n)) in cells.iter().enumerate() {
        let exact = exact_return(&preset.kernel, *n);
        let exact_f = to_f64(&exact);
        let set = preset.groupoid.all_units();
        let seed = DEFAULT_SEED + i as u64;
        let run = |threads| {
            with_threads(threads, || estimate_return(&preset.kernel, &set, *n, 100_000, seed))
                .and_then(|r| r)
                .map_err(|e| e.to_string())
        };
        let (one, four) = (run(1)?, run(4)?);
        if one.p_hat.to_bits() != four.p_hat.to_bits() {
            return Err(format!("{} n = {n}: {} with 1 thread, {} with 4", preset.name, one.p_hat, four.p_hat));
        }
        let z = (one.p_hat - exact_f) / one.std_error;
        if (one.p_hat - exact_f).abs() > 4.0 * one.std_error {
            return Err(format!("{} n = {n}: p_hat {} vs {exact}", preset.name, one.p_hat));
        }
        notes.push(format!("{} n={n}: p_hat {} vs {exact} (z = {z:.2})", preset.name, one.p_hat));
    }
    Ok(notes.join("; "))
}

fn ggk(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ggk")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn criterion_10() -> Check {
    let (code, _) = ggk(&["selftest"])?;
    if code != 0 {
        return Err(format!("selftest exit {code}"));
    }
    let targets: [&[&str]; 5] = [
        &["reproduce", "a-delta"],
        &["reproduce", "appendix-a", "--nmax", "25", "--delta", "0.1"],
        &["reproduce", "appendix-b", "--kmax", "40"],
        &["reproduce", "free-group", "--gens", "2", "--radius", "12"],
        &["reproduce", "free-group", "--gens", "1", "--radius", "200"],
    ];
    for target in targets {
        let mut runs = Vec::new();
        for threads in ["1", "4"] {
            let mut args = target.to_vec();
            args.extend(["--exact", "--threads", threads]);
            let (code, out) = ggk(&args)?;
            if code != 0 || out.is_empty() {
                return Err(format!("{target:?}: exit {code}"));
            }
            runs.push(out);
        }
        if runs[0] != runs[1] {
            return Err(format!("{target:?}: outputs differ between runs"));
        }
        if !runs[0].starts_with(b"# {") {
            return Err(format!("{target:?}: no manifest line"));
        }
    }
    let (_, out) = ggk(&["reproduce", "appendix-b", "--kmax", "24", "--exact"])?;
    let text = String::from_utf8_lossy(&out);
    let last = text.lines().last().unwrap_or_default();
    if last.split(',').nth(2) != Some("5") {
        return Err(format!("appendix-b K = 24 final row {last}"));
    }
    Ok("selftest exit 0; 5 reproduce targets bit-identical across runs and thread counts".into())
}

fn main() {
    let t = Instant::now();
    let suite = random_suite(SUITE_SIZE, DEFAULT_SEED);
    let criteria: [Criterion; 10] = [
        ("structural exactness", Box::new(|| criterion_1(&suite))),
        ("norm sandwich", Box::new(|| criterion_2(&suite))),
        ("Kesten positive side", Box::new(|| criterion_3(&suite))),
        ("return probabilities and radius", Box::new(|| criterion_4(&suite))),
        ("A_delta matrices", Box::new(criterion_5)),
        ("unbounded union trend", Box::new(criterion_6)),
        ("interval ratios", Box::new(criterion_7)),
        ("free-group contrast", Box::new(criterion_8)),
        ("Monte Carlo consistency", Box::new(criterion_9)),
        ("CLI contract", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} [{secs:.2}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} [{secs:.2}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 10 passed in {:.1}s", 10 - failed, t.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}


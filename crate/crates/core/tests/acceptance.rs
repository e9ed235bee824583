//! Acceptance gate: one line per criterion on the 610-site lattice.
//!
//! Run with `cargo test --release --test acceptance`.

use std::f64::consts::{LN_2, PI};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nhqc::levels::gap_ratios;
use nhqc::localization::{default_ipr_threshold, mobility_edge_table, profile, StateClass};
use nhqc::model::{build_hamiltonian, ModelKind, ModelSpec};
use nhqc::spectrum::{decompose, default_tol_imag};
use nhqc::sweep::transitions::{first_where, phase_boundaries, steps, PhaseClass};
use nhqc::sweep::{run_sweep, Axis, Diagnostic, DiagnosticsRecord, SweepPlan, SweepResult};
use nhqc::validate::{run_oracle_suite, winding_grid_stability, OracleOptions};
use nhqc::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Fibonacci index of the 610-site ring.
const FIB_610: u32 = 15;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn ring(kind: ModelKind) -> ModelSpec {
    ModelSpec::fibonacci(kind, FIB_610)
}

fn sweep(base: ModelSpec, axis: Axis, diagnostics: &[Diagnostic]) -> SweepResult {
    let mut plan = SweepPlan::new(base, axis).with_diagnostics(diagnostics.iter().copied());
    plan.perturb_retry = true;
    run_sweep(&plan).expect("sweep runs")
}

fn errors(res: &SweepResult) -> String {
    let bad: Vec<String> =
        res.rows.iter().filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.axis1))).collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!(" errors at {}", bad.join(" | "))
    }
}

fn within(x: Option<f64>, target: f64, tol: f64) -> bool {
    x.is_some_and(|x| (x - target).abs() <= tol)
}

fn show(x: Option<f64>) -> String {
    x.map_or("none".into(), |x| format!("{x:.3}"))
}

fn ipr_threshold(r: &DiagnosticsRecord) -> f64 {
    r.tolerances.map_or(f64::NAN, |t| t.ipr_threshold)
}

fn tol_imag(r: &DiagnosticsRecord) -> f64 {
    r.tolerances.map_or(f64::NAN, |t| t.tol_imag)
}

fn ipr_min(r: &DiagnosticsRecord) -> f64 {
    r.localization.map_or(f64::NAN, |l| l.ipr_min)
}

fn ipr_max(r: &DiagnosticsRecord) -> f64 {
    r.localization.map_or(f64::NAN, |l| l.ipr_max)
}

fn imag_max(r: &DiagnosticsRecord) -> f64 {
    r.realness.map_or(f64::NAN, |x| x.e_imag_max)
}

fn row_at(rows: &[DiagnosticsRecord], x: f64) -> Option<&DiagnosticsRecord> {
    rows.iter().find(|r| (r.axis1 - x).abs() < 1e-9)
}

/// Where `|w|` first turns nonzero, as the midpoint of the two grid values.
fn onset(rows: &[DiagnosticsRecord], w: impl Fn(&DiagnosticsRecord) -> Option<i64>) -> Option<f64> {
    steps(rows, |r| w(r).map(|w| w != 0)).into_iter().find(|s| !s.from && s.to).map(|s| s.at)
}

fn abelian_model2() -> Outcome {
    let start = Instant::now();
    let base = ring(ModelKind::Model2).with_j(1.0).with_v(6.0).with_phi(0.0);
    let res = sweep(base, Axis::range("beta", 0.4, 1.8, 0.02).unwrap(), &[Diagnostic::Realness, Diagnostic::Localization]);
    let secs = start.elapsed().as_secs_f64();
    let delocalized = first_where(&res.rows, |r| ipr_min(r) < ipr_threshold(r));
    let complex = first_where(&res.rows, |r| imag_max(r) > tol_imag(r));
    let expected = 3.0f64.ln();
    let agree = matches!((delocalized, complex), (Some(a), Some(b)) if (a - b).abs() <= 0.05 + 1e-9);
    let passed =
        agree && within(delocalized, expected, 0.1) && within(complex, expected, 0.1) && secs < 300.0 && res.n_errors() == 0;
    outcome(
        passed,
        format!(
            "IPR_min<tau at beta={}, Im E>tol at beta={}, expected {expected:.4}; {} points in {secs:.0} s{}",
            show(delocalized),
            show(complex),
            res.rows.len(),
            errors(&res)
        ),
    )
}

fn abelian_model3() -> Outcome {
    let base = ring(ModelKind::Model3).with_j(1.0).with_v(0.5).with_phi(0.0);
    let res = sweep(base, Axis::range("gamma", 0.4, 1.0, 0.02).unwrap(), &[Diagnostic::Realness, Diagnostic::Localization]);
    let first_localized = first_where(&res.rows, |r| ipr_max(r) > ipr_threshold(r));
    let all_localized = first_where(&res.rows, |r| ipr_min(r) > ipr_threshold(r));
    let complex = first_where(&res.rows, |r| imag_max(r) > tol_imag(r));
    let expected = 4.0f64.ln() / 2.0;
    let passed = [first_localized, all_localized, complex].iter().all(|&x| within(x, expected, 0.1)) && res.n_errors() == 0;
    outcome(
        passed,
        format!(
            "IPR_max>tau at gamma={}, IPR_min>tau at gamma={}, Im E>tol at gamma={}, expected {expected:.4}{}",
            show(first_localized),
            show(all_localized),
            show(complex),
            errors(&res)
        ),
    )
}

fn model1_window(res: &SweepResult) -> Outcome {
    let rows = &res.rows;
    let w2_on = onset(rows, |r| r.winding.map(|w| w.w2));
    let w1_on = onset(rows, |r| r.winding.map(|w| w.w1));
    let (Some(lo), Some(hi)) = (w2_on, w1_on) else {
        return outcome(false, format!("w2 onset {}, w1 onset {}{}", show(w2_on), show(w1_on), errors(res)));
    };
    let inside: Vec<&DiagnosticsRecord> = rows.iter().filter(|r| r.axis1 > lo && r.axis1 < hi).collect();
    let rho_ok = !inside.is_empty() && inside.iter().all(|r| r.realness.is_some_and(|x| x.rho > 0.0 && x.rho < 1.0));
    let eta = |r: &DiagnosticsRecord| r.localization.map_or(f64::NAN, |l| l.eta);
    let eta_peak = inside.iter().map(|r| eta(r)).fold(f64::NEG_INFINITY, f64::max);
    let eta_ends = eta(&rows[0]).max(eta(&rows[rows.len() - 1]));
    let passed = (lo - 0.3).abs() <= 0.1 && (hi - 0.8).abs() <= 0.1 && rho_ok && eta_peak >= eta_ends + 1.0;
    outcome(
        passed,
        format!(
            "|w2| onset J={lo:.3}, |w1| onset J={hi:.3}, 0<rho<1 on {} window points: {rho_ok}, eta peak {eta_peak:.2} vs ends {eta_ends:.2}{}",
            inside.len(),
            errors(res)
        ),
    )
}

fn boundaries(res: &SweepResult, first: (f64, f64), last: (f64, f64), param: &str) -> Outcome {
    let steps = phase_boundaries(&res.rows);
    let list: Vec<String> = steps.iter().map(|s| format!("{:?}->{:?} at {:.3}", s.from, s.to, s.at)).collect();
    let lo = steps.first().map(|s| s.at);
    let hi = steps.last().map(|s| s.at);
    let crit = |s: Option<&nhqc::sweep::transitions::Step<PhaseClass>>, side_critical: bool| {
        s.is_some_and(|s| if side_critical { s.to == PhaseClass::Critical } else { s.from == PhaseClass::Critical })
    };
    let passed = steps.len() >= 2
        && within(lo, first.0, first.1)
        && within(hi, last.0, last.1)
        && crit(steps.first(), true)
        && crit(steps.last(), false)
        && res.n_errors() == 0;
    outcome(
        passed,
        format!("{param} boundaries [{}], expected {}±{} and {}±{}{}", list.join(", "), first.0, first.1, last.0, last.1, errors(res)),
    )
}

fn entropy_plateau(localized_row: Option<&DiagnosticsRecord>) -> Outcome {
    let spec = ring(ModelKind::Model1).with_j(2.0).with_v(1.0).with_phi(PI / 10.0);
    let plan = SweepPlan::new(spec.clone(), Axis::new("J", vec![2.0])).with_diagnostics([Diagnostic::Entanglement]);
    let extended = nhqc::sweep::diagnose(&plan, &spec, None).ok().and_then(|(r, _)| r.entanglement).map(|e| e.entropy);
    let localized = localized_row.and_then(|r| r.entanglement).map(|e| e.entropy);
    let target = 4.0 * LN_2;
    let passed = within(extended, target, 0.2) && localized.is_some_and(|s| s < 0.05);
    outcome(passed, format!("S(J=2)={} (target {target:.4}), S(J=0.1)={}", show(extended), show(localized)))
}

fn mobility_edges() -> Outcome {
    let spec = ring(ModelKind::Model2).with_j(1.0).with_v(6.0).with_phi(PI / 2.0).with_beta(1.1);
    let dec = decompose(&build_hamiltonian(&spec).unwrap()).unwrap();
    let prof = profile(&dec);
    let tol = default_tol_imag(&dec);
    let thr = default_ipr_threshold(dec.len());
    let table = mobility_edge_table(&dec, &prof, tol, thr);
    let localized: Vec<_> = table.localized().collect();
    let extended_complex = table.intervals.iter().filter(|i| i.class == StateClass::Extended).all(|i| i.all_complex);
    let loc_states: Vec<usize> = (0..dec.len()).filter(|&j| prof.ipr[j] > thr).collect();
    let loc_complex = loc_states.iter().filter(|&&j| dec.eigenvalues[j].im.abs() > tol).count();
    let ext_real = (0..dec.len()).filter(|&j| prof.ipr[j] <= thr && dec.eigenvalues[j].im.abs() <= tol).count();
    let passed = localized.len() == 1 && localized[0].all_real && extended_complex;
    outcome(
        passed,
        format!(
            "{} localized Re E interval(s), {} localized states of which {loc_complex} complex, {ext_real} real extended states, {} intervals in all",
            localized.len(),
            loc_states.len(),
            table.intervals.len()
        ),
    )
}

fn oracles(cuts: &[&SweepResult]) -> Outcome {
    let start = Instant::now();
    let report = run_oracle_suite(&OracleOptions { seed: 2024, n_random: 100 });
    let secs = start.elapsed().as_secs_f64();
    let failed: Vec<String> = report.checks.iter().filter(|c| !c.passed).map(|c| c.to_string()).collect();

    let mut checked = 0;
    let mut unstable = Vec::new();
    for res in cuts {
        let Some(bases) = res.base_energies.first().copied().flatten() else {
            unstable.push(format!("{}: no base energies", res.plan.base.kind));
            continue;
        };
        for (index, row) in res.rows.iter().enumerate() {
            let spec = res.plan.spec_at(index).unwrap();
            match winding_grid_stability(&spec, bases, res.plan.n_theta) {
                Ok(g) if g.stable() => checked += 1,
                Ok(g) => unstable.push(format!("{} {}: {g:?}", spec.kind, row.axis1)),
                Err(e) => unstable.push(format!("{} {}: {e}", spec.kind, row.axis1)),
            }
        }
    }
    let passed = failed.is_empty() && secs < 120.0 && unstable.is_empty();
    outcome(
        passed,
        format!(
            "{} oracle checks in {secs:.1} s, {} failed; windings quantized and grid-stable at {checked} sweep points{}{}",
            report.checks.len(),
            failed.len(),
            if failed.is_empty() { String::new() } else { format!(" [{}]", failed.join("; ")) },
            if unstable.is_empty() { String::new() } else { format!(", unstable: {}", unstable.join("; ")) }
        ),
    )
}

/// Mean gap ratio of uncorrelated levels.
fn poisson_gap_ratio(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(0.0..1.0), 0.0)).collect();
    gap_ratios(&levels, 0.0).unwrap().g_mean
}

fn level_statistics(res: &SweepResult) -> Outcome {
    let g = |x: f64| row_at(&res.rows, x).and_then(|r| r.levelstat).map(|l| l.g_mean);
    let (ext, loc) = (g(1.2), g(0.05));
    let lo = onset(&res.rows, |r| r.winding.map(|w| w.w2));
    let hi = onset(&res.rows, |r| r.winding.map(|w| w.w1));
    let window: Vec<f64> = match (lo, hi) {
        (Some(lo), Some(hi)) => {
            res.rows.iter().filter(|r| r.axis1 > lo && r.axis1 < hi).filter_map(|r| r.levelstat.map(|l| l.g_mean)).collect()
        }
        _ => Vec::new(),
    };
    let intermediate = match (ext, loc) {
        (Some(e), Some(l)) => !window.is_empty() && window.iter().all(|&w| w > e && w < l),
        _ => false,
    };
    let poisson = poisson_gap_ratio(200_000, 11);
    let target = 2.0 * LN_2 - 1.0;
    let passed =
        ext.is_some_and(|x| x <= 0.1) && loc.is_some_and(|x| x > 0.3) && intermediate && (poisson - target).abs() <= 0.01;
    let range = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    outcome(
        passed,
        format!(
            "g(J=1.2)={}, g(J=0.05)={}, window g in [{:.4}, {:.4}] over {} points, Poisson g={poisson:.4} (target {target:.4})",
            show(ext),
            show(loc),
            range.0,
            range.1,
            window.len()
        ),
    )
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = panic::catch_unwind(AssertUnwindSafe(f));
    let secs = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            (false, format!("panicked: {}", msg.unwrap_or_default()))
        }
    };
    println!("[{}] {n}. {name}: {detail} ({secs:.1} s)", if passed { "PASS" } else { "FAIL" });
    passed
}

fn main() -> ExitCode {
    let all = Diagnostic::ALL;
    let mut results = Vec::new();

    results.push(run(1, "abelian model 2 transition", abelian_model2));
    results.push(run(2, "abelian model 3 transition", abelian_model3));

    let start = Instant::now();
    let model1 = sweep(ring(ModelKind::Model1).with_v(1.0).with_phi(PI / 10.0), Axis::range("J", 0.05, 1.2, 0.05).unwrap(), &all);
    let model2 = sweep(ring(ModelKind::Model2).with_j(1.0).with_v(6.0).with_phi(PI / 2.0), Axis::range("beta", 0.0, 2.6, 0.1).unwrap(), &all);
    let model3 = sweep(ring(ModelKind::Model3).with_j(1.0).with_v(0.5).with_phi(PI / 2.0), Axis::range("gamma", 0.0, 1.2, 0.05).unwrap(), &all);
    println!("# sweeps for criteria 3-5 took {:.0} s", start.elapsed().as_secs_f64());

    results.push(run(3, "model 1 critical window", || model1_window(&model1)));
    results.push(run(4, "model 2 critical window", || boundaries(&model2, (0.5, 0.15), (2.0, 0.2), "beta")));
    results.push(run(5, "model 3 critical window", || boundaries(&model3, (0.31, 0.1), (0.94, 0.15), "gamma")));
    results.push(run(6, "entanglement plateau", || entropy_plateau(row_at(&model1.rows, 0.1))));
    results.push(run(7, "mobility-edge structure", mobility_edges));
    results.push(run(8, "oracle suite", || oracles(&[&model1, &model2, &model3])));
    results.push(run(9, "level statistics", || level_statistics(&model1)));

    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

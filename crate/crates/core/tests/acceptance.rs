//! One line per acceptance criterion. Runs as a plain binary (`harness = false`)
//! and exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use kdvrecip::calculus::{commutator, extend_commuting_flow, working_context, EvolutionaryOp, EvolutionarySystem, FlowLabel};
use kdvrecip::drpaper::{
    dispersionless_closed_form, dispersionless_flows, f1_tree_sum, genus0_potentials, primary_flows,
    verify_theorem_with, FaultInjection, FamilySpec, VerificationReport, VerifyOptions,
};
use kdvrecip::lax::{kdv_flow_dx, u_pow_over_factorial, xi_kdv_flow};
use kdvrecip::text::{parse_expr, render_text};
use kdvrecip::transforms::{evolve_formal_solution, solution_transport, ReciprocalTransform, Series};
use kdvrecip::{DiffPoly, Param, ParamScalar, TruncationContext};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_kdvrecip")).args(args).output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{args:?} exited with {:?}", o.status.code()));
    }
    Ok(String::from_utf8_lossy(&o.stdout).trim().to_string())
}

/// Renders a displayed formula, transcribed into the grammar, canonically.
fn canonical(src: &str, n_vars: usize, letter: char) -> String {
    render_text(&parse_expr(src, n_vars, TruncationContext::new(4, 8)).expect("transcription parses"), letter)
}

fn within(t: Instant, limit: Duration, what: &str) -> Outcome {
    ensure(t.elapsed() < limit, || format!("{what} took {:?}, limit {limit:?}", t.elapsed()))
}

fn kdv_displays() -> Outcome {
    let t = Instant::now();
    let displays = [
        "u1",
        "u1^2*1/2 + eps^2*1/12*u1_xx",
        "u1^3*1/6 + eps^2*1/24*(2*u1*u1_xx + u1_x^2) + eps^4*1/240*u1_xxxx",
    ];
    for (d, src) in displays.iter().enumerate() {
        let got = cli(&["kdv", "--d", &d.to_string()])?;
        let want = canonical(src, 1, 'u');
        ensure(got == want, || format!("kdv --d {d}: {got} != {want}"))?;
    }
    within(t, Duration::from_secs(1), "kdv --d 0/1/2")
}

fn xi_kdv_displays() -> Outcome {
    let t = Instant::now();
    let displays = ["v1", "v1^2*1/2 + xi*v1^3*1/6 + eps^2*1/12*(1 + xi*v1)^3*v1[2]"];
    for (d, src) in displays.iter().enumerate() {
        let got = cli(&["xikdv", "--d", &d.to_string()])?;
        let want = canonical(src, 1, 'v');
        ensure(got == want, || format!("xikdv --d {d}: {got} != {want}"))?;
    }
    within(t, Duration::from_secs(5), "xikdv --d 0/1")
}

fn kdv_commute() -> Outcome {
    let t = Instant::now();
    let ctx = TruncationContext::new(8, 10);
    let flows: Vec<EvolutionaryOp> = (0..=3)
        .map(|d| EvolutionaryOp::new(vec![kdv_flow_dx(d, ctx).unwrap()]).unwrap())
        .collect();
    for i in 0..flows.len() {
        for j in i + 1..flows.len() {
            let c = commutator(&flows[i], &flows[j]).map_err(|e| e.to_string())?;
            ensure(c.is_zero(), || format!("[t_{i}, t_{j}] = {}", render_text(c.component(0), 'u')))?;
        }
    }
    within(t, Duration::from_secs(120), "KdV commutators")
}

fn dispersionless() -> Outcome {
    let t = Instant::now();
    let fam = FamilySpec::new(TruncationContext::new(0, 10));
    // Closedness is checked inside at every step; an Err means it failed.
    let flows = dispersionless_flows(&fam, 4).map_err(|e| e.to_string())?;
    for (d, m) in flows.iter().enumerate() {
        let want = dispersionless_closed_form(&fam, d as u32).map_err(|e| e.to_string())?;
        ensure(*m == want, || format!("P_{d} differs from the closed form"))?;
    }
    within(t, Duration::from_secs(30), "dispersionless flows")
}

fn genus0() -> Outcome {
    let ctx = TruncationContext::new(0, 10);
    let fam = FamilySpec::new(ctx);
    let p = |s: &str| parse_expr(s, 2, ctx).expect("transcription parses");
    // Simplified form, cleared of its denominator.
    let numerator = p("u1^2*1/2 + u1*xi*u2^2*1/2 - xi*u2^3*1/24*(4 + xi*u2)");
    let unit = p("1 + xi*u2");
    let tree_display = p("u1^2*1/2*inv(1 + xi*u2) + u1*xi*u2^2*1/2*inv(1 + xi*u2) + xi^2*u2^4*1/8*inv(1 + xi*u2) - xi*u2^3*1/6");
    let tree = f1_tree_sum(&fam);
    ensure(tree == tree_display, || "tree sum differs from its displayed form".into())?;
    ensure(&tree * &unit == numerator, || "(1 + xi*u2)·(tree sum) differs from the simplified numerator".into())?;
    let data = genus0_potentials(&fam).map_err(|e| e.to_string())?;
    ensure(&data.f1 * &unit == numerator, || "F1 differs from the simplified form".into())?;
    ensure(data.f2 == p("u2^2*1/2"), || format!("F2 = {}", render_text(&data.f2, 'u')))
}

fn describe(r: &VerificationReport) -> String {
    r.checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("check {} {}: {:?} {:?}", c.id, c.name, c.error, c.differences.first()))
        .collect::<Vec<_>>()
        .join("; ")
}

fn theorem() -> Outcome {
    let t = Instant::now();
    let ctx = TruncationContext::new(4, 8);
    for xi_zero in [false, true] {
        let r = verify_theorem_with(2, ctx, &VerifyOptions { xi_zero, fault: None });
        ensure(r.checks.len() == 8, || "expected eight checks".into())?;
        ensure(r.passed && r.checks.iter().all(|c| c.passed), || describe(&r))?;
    }
    within(t, Duration::from_secs(600), "verify_theorem")
}

fn appendix() -> Outcome {
    use common::*;
    let c = ctx();
    let xi = ParamScalar::param(Param::Xi);
    let densities: Vec<DiffPoly> = (0..4)
        .map(|k| kdv_density(c, &xi.scale(&kdvrecip::scalar::rat(k + 1, 2)), &ParamScalar::from_int(k - 1)))
        .collect();
    let tests = samples(arb_poly(1, c, 3), 16);
    let system = kdv_system(c, &[1, 2]);
    for f in &densities {
        let rt = ReciprocalTransform::new(f.clone()).map_err(|e| e.to_string())?;
        for (_, h) in system.flows() {
            ensure(appendix_part1(f, h, &tests), || format!("part 1 fails for f = {f}"))?;
            ensure(pushed_matches_u_side(&rt, h), || format!("pushed flow is not Φ^-1 of H - R∂_y for f = {f}"))?;
            for g in &densities {
                ensure(appendix_part3(&rt, h, g), || format!("part 3 fails for f = {f}, g = {g}"))?;
            }
        }
        ensure(appendix_part2(&rt, &system), || format!("part 2 fails for f = {f}"))?;
    }
    ensure(group_action(&system), || "group action composition differs".into())
}

fn transport() -> Outcome {
    let w = 6;
    let ctx = TruncationContext::new(w, w + 1);
    let label = FlowLabel::new(1, 1);
    let s = EvolutionarySystem::new(1, 'u')
        .with(label, vec![kdv_flow_dx(1, ctx).unwrap()])
        .unwrap();
    let sol = evolve_formal_solution(&s, &[label], &[Series::x(0, w)], w).map_err(|e| e.to_string())?;
    ensure(sol.is_exact_solution_of(&s).unwrap(), || "the KdV series is not a solution".into())?;
    let f = ReciprocalTransform::new(&DiffPoly::param(1, ctx, Param::Xi) * &DiffPoly::var(1, ctx, 0)).unwrap();
    // Closedness of dy and the residual in the pushed system are checked inside.
    let out = solution_transport(&s, &f, &sol).map_err(|e| e.to_string())?;
    // Independent target: the xi-KdV flow from its own derivation.
    let xi_kdv = EvolutionarySystem::new(1, 'v')
        .with(label, vec![xi_kdv_flow(1, ctx).unwrap().dx()])
        .unwrap();
    ensure(out.system == xi_kdv, || "the pushed flow is not xi-KdV".into())?;
    ensure(out.solution.is_exact_solution_of(&xi_kdv).unwrap(), || "nonzero xi-KdV residual".into())?;
    ensure(!out.solution.components[0].is_zero(), || "empty solution".into())
}

fn oracle_extension() -> Outcome {
    let out = TruncationContext::new(4, 6);
    let work = working_context(out);
    let p1 = kdv_flow_dx(1, work).unwrap();
    for d in [2, 3] {
        let q = extend_commuting_flow(&p1, &u_pow_over_factorial(d, work), out).map_err(|e| e.to_string())?;
        let want = kdv_flow_dx(d, out).unwrap();
        ensure(q == want, || format!("d = {d}: {} != {}", render_text(&q, 'u'), render_text(&want, 'u')))?;
    }
    Ok(())
}

fn fault_sweep() -> Outcome {
    let (d_max, ctx) = (2, TruncationContext::new(4, 8));
    let prim = primary_flows(&FamilySpec::new(ctx), d_max).map_err(|e| e.to_string())?;
    let mut faults = vec![FaultInjection::FlipT0Dispersion];
    for (label, h) in prim.flows() {
        for (component, p) in h.components().iter().enumerate() {
            for (term, (_, c)) in p.terms().enumerate() {
                for param_term in 0..c.terms().len() {
                    faults.push(FaultInjection::FlipCoefficient { label: *label, component, term, param_term });
                }
            }
        }
    }
    ensure(faults.len() > 50, || format!("only {} faults", faults.len()))?;
    for fault in faults {
        let r = verify_theorem_with(d_max, ctx, &VerifyOptions { xi_zero: false, fault: Some(fault.clone()) });
        let reported = r
            .checks
            .iter()
            .flat_map(|c| &c.differences)
            .any(|d| !d.difference.is_empty() && d.difference != "0");
        ensure(!r.passed && reported, || format!("{fault:?} went unnoticed"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("kdv --d 0/1/2 reproduce P_0, P_1, P_2", kdv_displays),
        ("xikdv --d 0/1 reproduce the xi-KdV densities", xi_kdv_displays),
        ("KdV flows d <= 3 commute at eps 8, deg 10", kdv_commute),
        ("dispersionless flows d <= 4 match the closed form", dispersionless),
        ("genus-0 tree sum equals the simplified F1; F2 = (u2)^2/2", genus0),
        ("verify_theorem(2, 4, 8) passes, also with xi = 0", theorem),
        ("reciprocal transformation suite and group action", appendix),
        ("degree-6 solution transport to xi-KdV", transport),
        ("extend_commuting_flow reproduces KdV d = 2, 3", oracle_extension),
        ("every single-coefficient fault is detected", fault_sweep),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("criterion {:2}: PASS  {name} ({:.2?})", i + 1, t.elapsed()),
            Err(e) => {
                failed += 1;
                println!("criterion {:2}: FAIL  {name} ({:.2?}): {e}", i + 1, t.elapsed());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

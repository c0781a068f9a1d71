//! One PASS/FAIL line per acceptance criterion, at the stated tolerances.

use std::time::{Duration, Instant};

use planar_spin::config::RunConfig;
use planar_spin::suites::{run_suite, Suite, SuiteReport};
use planar_spin::variationality::Mutation;

/// Mutations the Helmholtz conditions must reject.
const NON_VARIATIONAL: [Mutation; 3] = [Mutation::SkewB, Mutation::DriftingA, Mutation::ForcingC];

struct Outcome {
    lines: Vec<String>,
    failed: usize,
}

impl Outcome {
    fn record(&mut self, id: usize, title: &str, passed: bool, detail: String) {
        let tag = if passed { "PASS" } else { "FAIL" };
        let line = format!("[{tag}] {id}. {title}: {detail}");
        println!("{line}");
        self.failed += usize::from(!passed);
        self.lines.push(line);
    }
}

fn timed(suite: Suite, config: &RunConfig, mutation: Option<Mutation>) -> (SuiteReport, Duration) {
    let start = Instant::now();
    let report = run_suite(suite, config, mutation).unwrap_or_else(|e| panic!("{} suite: {e}", suite.name()));
    (report, start.elapsed())
}

/// All listed checks pass; returns the verdict and a summary.
fn verdict(report: &SuiteReport, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in names {
        let c = report.check(name).unwrap_or_else(|| panic!("missing check {name}"));
        ok &= c.passed;
        parts.push(format!("{name} {:.2e} (tol {:.0e})", c.max_residual, c.tolerance));
    }
    (ok, parts.join(", "))
}

fn names(report: &SuiteReport, prefix: &str) -> Vec<String> {
    report.checks.iter().filter(|c| c.name.starts_with(prefix)).map(|c| c.name.clone()).collect()
}

#[test]
fn acceptance() {
    // the harness prints "test acceptance ... " without a newline
    println!();
    let total = Instant::now();
    let config = RunConfig::demo();
    let mut out = Outcome { lines: Vec::new(), failed: 0 };

    // 1. variationality
    let (base, t_base) = timed(Suite::Helmholtz, &config, None);
    let mut ok = base.passed;
    let mut detail = format!("max residual {:.2e}", base.checks.iter().map(|c| c.max_residual).fold(0.0, f64::max));
    let mut elapsed = t_base;
    for m in NON_VARIATIONAL {
        let (rep, t) = timed(Suite::Helmholtz, &config, Some(m));
        elapsed += t;
        let fired: Vec<&str> =
            rep.checks.iter().filter(|c| c.max_residual > 1e-2).map(|c| c.name.as_str()).collect();
        ok &= !fired.is_empty();
        detail += &format!("; {} fires {}", m.name(), if fired.is_empty() { "nothing".into() } else { fired.join(" ") });
    }
    ok &= elapsed < Duration::from_secs(5);
    out.record(1, "variationality", ok, format!("{detail}; {:.2} s", elapsed.as_secs_f64()));

    // 2. Poincaré invariance
    let (sym, t_sym) = timed(Suite::Symmetry, &config, None);
    let mut checks = names(&sym, "invariance-");
    checks.push("boosted-solution".into());
    let (ok, detail) = verdict(&sym, &checks.iter().map(String::as_str).collect::<Vec<_>>());
    let ok = ok && t_sym < Duration::from_secs(5);
    out.record(2, "poincare invariance", ok, format!("{detail}; {:.2} s", t_sym.as_secs_f64()));

    // 3. Lagrangian origin
    let (lag, _) = timed(Suite::Lagrangian, &config, None);
    let (ok, detail) = verdict(&lag, &["euler-poisson-l1", "euler-poisson-l2", "gauge-identity"]);
    out.record(3, "lagrangian origin", ok, detail);

    // 4. proper time and curvature
    let (eq, _) = timed(Suite::Equation, &config, None);
    let (ok, detail) = verdict(&eq, &["proper-time-residual", "curvature-drift"]);
    out.record(4, "proper-time equivalence", ok, detail);

    // 5. Hamiltonian picture
    let (ham, _) = timed(Suite::Hamiltonian, &config, None);
    let (ok, detail) = verdict(
        &ham,
        &[
            "legendre-roundtrip",
            "hamiltonian-forms",
            "energy-drift-direct",
            "momentum-drift-direct",
            "energy-drift-canonical",
            "momentum-drift-canonical",
            "two-flow-deviation",
        ],
    );
    out.record(5, "hamiltonian picture", ok, detail);

    // 6. Jacobi block
    let (ok, detail) = verdict(&ham, &["jacobi-block", "dv-dp-vanishes"]);
    out.record(6, "jacobi block", ok, detail);

    // 7. spin correspondence
    let (spin, _) = timed(Suite::Spin, &config, None);
    let (ok, detail) = verdict(
        &spin,
        &[
            "coincidence",
            "spin-orthogonal-acceleration",
            "spin-pirani-projection",
            "dixon-momentum",
            "dixon-spin",
            "planar-spin",
        ],
    );
    let sign = spin.spin.iter().find(|s| s.check == "dixon-momentum").map(|s| (s.sigma, s.sgn_g));
    out.record(7, "spin correspondence", ok, format!("(sigma, sgn_g) = {sign:?}; {detail}"));

    // 8. defect witness
    let (ok, detail) = verdict(&lag, &["defect-l1-first-momentum", "defect-l2-first-momentum"]);
    out.record(8, "defect witness", ok, detail);

    let total = total.elapsed();
    let in_budget = total < Duration::from_secs(60);
    println!("[{}] total runtime {:.2} s (budget 60 s)", if in_budget { "PASS" } else { "FAIL" }, total.as_secs_f64());
    assert_eq!(out.failed, 0, "failing criteria:\n{}", out.lines.join("\n"));
    assert!(in_budget, "acceptance took {total:?}");
}

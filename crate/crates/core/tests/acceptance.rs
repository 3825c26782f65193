//! Acceptance gate: one test per release criterion, each printing a single
//! `ACCEPTANCE <k> <name>: PASS|FAIL` line (run with `-- --nocapture` to see
//! the lines for passing tests).

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use slog_energy::{
    circle_optimality_check, cluster_probe, derivative_probe, equally_spaced, grid_epsilon,
    grid_minimize, grid_pack, infinity_limit_probe, minimize_energy, run_suite, sweep_g,
    GridBudget, KernelParams, MetricKind, SolveOptions, Space, Suite,
};

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn params(s: f64, t: f64) -> KernelParams {
    KernelParams::new(s, t).unwrap()
}

/// Print the criterion verdict line and panic on failure.
fn verdict(k: u32, name: &str, failures: Vec<String>, started: Instant) {
    let elapsed = started.elapsed().as_secs_f64();
    if failures.is_empty() {
        println!("ACCEPTANCE {k} {name}: PASS ({elapsed:.1}s)");
    } else {
        println!(
            "ACCEPTANCE {k} {name}: FAIL ({elapsed:.1}s) {}",
            failures.join("; ")
        );
        panic!("criterion {k} ({name}) failed: {}", failures.join("; "));
    }
}

/// Criterion 1: on every covered circle scenario the solver signature
/// matches equal spacing within 1e-6 and equal spacing never beats the
/// solver by more than 1e-10 in energy.
#[test]
fn criterion_1_circle_optimality() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let scenarios: [(f64, MetricKind, f64, &[f64]); 4] = [
        (0.2, MetricKind::Geodesic, 1.0, &[0.0, 0.5, 2.0]),
        (0.1, MetricKind::Geodesic, 0.0, &[0.5, 1.0, 3.0]),
        (0.1, MetricKind::Geodesic, 2.0, &[0.0]),
        (0.3, MetricKind::Chord, 1.0, &[0.0, 1.0, 2.0]),
    ];
    for (alpha, kind, t, s_values) in scenarios {
        let space = Arc::new(Space::circle(alpha, kind).unwrap());
        for &s in s_values {
            for n in [2usize, 3, 5, 7] {
                match circle_optimality_check(&space, n, params(s, t), &opts()) {
                    Ok(report) => {
                        let energy_gap = report.energy_equal.linear - report.energy_solver.linear;
                        if report.max_signature_gap > 1e-6 {
                            failures.push(format!(
                                "{} n={n} s={s} t={t}: signature gap {:.3e}",
                                space.id(),
                                report.max_signature_gap
                            ));
                        }
                        if energy_gap > 1e-10 {
                            failures.push(format!(
                                "{} n={n} s={s} t={t}: equal spacing beats solver by {:.3e}",
                                space.id(),
                                energy_gap
                            ));
                        }
                        if !report.pass {
                            failures.push(format!(
                                "{} n={n} s={s} t={t}: report.pass false",
                                space.id()
                            ));
                        }
                    }
                    Err(e) => failures.push(format!(
                        "{} n={n} s={s} t={t}: {e}",
                        space.id()
                    )),
                }
            }
        }
    }
    verdict(1, "circle optimality", failures, started);
}

/// Criterion 2: g(s)^(1/s) approaches 1/delta_N inside the algebraic
/// sandwich at every s in {2, 4, ..., 1024}, with error <= 1e-2 at the top,
/// and the grid oracle confirms the packing distance 2*pi*alpha/N.
#[test]
fn criterion_2_infinity_limit() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let alpha = 0.05;
    let space = Arc::new(Space::circle(alpha, MetricKind::Geodesic).unwrap());
    let schedule: Vec<f64> = (1..=10).map(|k| f64::powi(2.0, k)).collect();
    let grid = Arc::new(space.discretize(720).unwrap());
    let budget = GridBudget {
        max_combinations: 20_000_000_000,
    };
    for n in [2usize, 4] {
        let exact_delta = 2.0 * PI * alpha / n as f64;
        match grid_pack(&grid, n, &budget) {
            Ok(pack) => {
                if (pack.delta - exact_delta).abs() > 1e-9 {
                    failures.push(format!(
                        "n={n}: grid packing delta {} vs {exact_delta}",
                        pack.delta
                    ));
                }
            }
            Err(e) => failures.push(format!("n={n}: grid_pack: {e}")),
        }
        for t in [0.0, 1.0] {
            let table = match infinity_limit_probe(&space, n, t, &schedule, &opts()) {
                Ok(table) => table,
                Err(e) => {
                    failures.push(format!("n={n} t={t}: {e}"));
                    continue;
                }
            };
            if (table.delta - exact_delta).abs() > 1e-7 {
                failures.push(format!(
                    "n={n} t={t}: probe delta {} vs {exact_delta}",
                    table.delta
                ));
            }
            let pairs = (n * (n - 1)) as f64;
            let log_l = (1.0 / table.delta).ln();
            for r in &table.records {
                // (N(N-1))^(1/s) * ln(1/delta)^(t/s) - 1, the closed-form
                // envelope of |g^(1/s) * delta - 1|.
                let envelope = pairs.powf(1.0 / r.s) * log_l.powf(t / r.s) - 1.0 + 1e-6;
                if r.abs_err > envelope {
                    failures.push(format!(
                        "n={n} t={t} s={}: error {:.3e} above envelope {:.3e}",
                        r.s, r.abs_err, envelope
                    ));
                }
                if !r.within {
                    failures.push(format!("n={n} t={t} s={}: sandwich violated", r.s));
                }
            }
            let last = table.records.last().unwrap();
            if last.abs_err > 1e-2 {
                failures.push(format!(
                    "n={n} t={t}: error at s=1024 is {:.3e} > 1e-2",
                    last.abs_err
                ));
            }
        }
    }
    verdict(2, "s->infinity limit", failures, started);
}

/// Criterion 3: both one-sided difference quotients of g at s0=1 match the
/// hand-differentiated closed form 2/(pi*alpha) * ln(1/(pi*alpha)) ~ 23.562
/// within 1e-2, and fd_plus <= fd_minus + 1e-3 across s0 in {0.5, 1, 2}.
#[test]
fn criterion_3_one_sided_derivatives() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let space = Arc::new(Space::circle(0.05, MetricKind::Geodesic).unwrap());
    let expected = 23.562;
    for s0 in [0.5, 1.0, 2.0] {
        let probe = match derivative_probe(&space, 2, 0.0, s0, Some(1e-6), &opts()) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("s0={s0}: {e}"));
                continue;
            }
        };
        let fd_minus = match probe.fd_minus {
            Some(v) => v,
            None => {
                failures.push(format!("s0={s0}: missing backward quotient"));
                continue;
            }
        };
        if probe.fd_plus > fd_minus + 1e-3 {
            failures.push(format!(
                "s0={s0}: fd_plus {} exceeds fd_minus {} + 1e-3",
                probe.fd_plus, fd_minus
            ));
        }
        if s0 == 1.0 {
            if (probe.fd_plus - expected).abs() > 1e-2 {
                failures.push(format!("fd_plus {} vs {expected}", probe.fd_plus));
            }
            if (fd_minus - expected).abs() > 1e-2 {
                failures.push(format!("fd_minus {fd_minus} vs {expected}"));
            }
        }
    }
    verdict(3, "one-sided derivatives", failures, started);
}

/// Criterion 4: the three cluster probes end within 1e-4 in signature and
/// their recorded energies at s0 sit within 1e-6 relative of g(s0).
#[test]
fn criterion_4_cluster_convergence() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let check_trace = |label: &str,
                       trace: &slog_energy::ClusterTrace,
                       failures: &mut Vec<String>| {
        let end = *trace.signature_distances.last().unwrap();
        if end > 1e-4 {
            failures.push(format!("{label}: final signature distance {end:.3e}"));
        }
        if let Some(reference) = &trace.reference_energy {
            for (k, e) in trace.energies_at_s0.iter().enumerate() {
                let rel = (e.linear - reference.linear).abs() / reference.linear.abs();
                if rel > 1e-6 {
                    failures.push(format!(
                        "{label}: energy at schedule step {k} off by {rel:.3e} relative"
                    ));
                }
            }
        }
    };

    // Two-sided approach to s0=1 on the circle; equal spacing minimizes at
    // every s, so energies match g(1) along the whole schedule.
    let circle = Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap());
    let mut interleaved = Vec::new();
    for k in 1..=10 {
        interleaved.push(1.0 + f64::powi(2.0, -k));
        interleaved.push(1.0 - f64::powi(2.0, -k));
    }
    match cluster_probe(&circle, 4, 1.0, 1.0, &interleaved, &opts()) {
        Ok(trace) => check_trace("circle s0=1", &trace, &mut failures),
        Err(e) => failures.push(format!("circle s0=1: {e}")),
    }

    // One-sided approach to s0=2 on the segment; g(2) = 200/9 for the
    // endpoints-plus-midpoint minimizer.
    let segment = Arc::new(Space::segment(0.0, 0.9).unwrap());
    let one_sided: Vec<f64> = (1..=10).map(|k| 2.0 - f64::powi(2.0, -k)).collect();
    match cluster_probe(&segment, 3, 0.0, 2.0, &one_sided, &opts()) {
        Ok(trace) => {
            check_trace("segment s0=2", &trace, &mut failures);
            let g2 = trace.reference_energy.as_ref().unwrap().linear;
            if (g2 - 200.0 / 9.0).abs() > 1e-9 * (200.0 / 9.0) {
                failures.push(format!("segment s0=2: g(2) = {g2} vs 200/9"));
            }
        }
        Err(e) => failures.push(format!("segment s0=2: {e}")),
    }

    // Divergent schedule: minimizers approach the best packing, which on a
    // segment is equal spacing with both endpoints.
    let doubling: Vec<f64> = (1..=10).map(|k| f64::powi(2.0, k)).collect();
    match cluster_probe(&segment, 4, 0.0, f64::INFINITY, &doubling, &opts()) {
        Ok(trace) => {
            check_trace("segment s0=inf", &trace, &mut failures);
            if !trace.energies_at_s0.is_empty() {
                failures.push("segment s0=inf: unexpected energies".to_string());
            }
            let expected = [0.3, 0.3, 0.3, 0.6, 0.6, 0.9];
            for (a, e) in trace.reference_signature.iter().zip(expected) {
                if (a - e).abs() > 1e-6 {
                    failures.push(format!(
                        "segment s0=inf: packing signature entry {a} vs {e}"
                    ));
                }
            }
        }
        Err(e) => failures.push(format!("segment s0=inf: {e}")),
    }

    verdict(4, "cluster convergence", failures, started);
}

/// Criterion 5: the lemma suite (sandwich bounds, h/p monotonicity, energy
/// lower bound, kernel second-derivative positivity and finite-difference
/// agreement, 1000 draws per check) passes in full.
#[test]
fn criterion_5_lemma_suites() {
    let started = Instant::now();
    let mut failures = Vec::new();
    match run_suite(Suite::Lemmas, &opts()) {
        Ok(reports) => {
            for check in reports.iter().flat_map(|r| &r.checks) {
                if !check.pass {
                    failures.push(format!("{}: {}", check.name, check.detail));
                }
            }
        }
        Err(e) => failures.push(format!("suite error: {e}")),
    }
    verdict(5, "lemma suites", failures, started);
}

/// Criterion 6: the continuous solver agrees with the exhaustive grid
/// oracle to within the rigorous discretization bound epsilon_grid.
#[test]
fn criterion_6_oracle_equivalence() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let budget = GridBudget {
        max_combinations: 1_000_000_000,
    };
    let cases: [(Arc<Space>, usize); 2] = [
        (Arc::new(Space::segment(0.0, 0.9).unwrap()), 120),
        (
            Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap()),
            360,
        ),
    ];
    for (space, m) in cases {
        let grid = Arc::new(space.discretize(m).unwrap());
        for n in [2usize, 3, 4] {
            for (s, t) in [(1.0, 0.0), (2.0, 1.0)] {
                let label = format!("{} m={m} n={n} s={s} t={t}", space.id());
                let cont = match minimize_energy(&space, n, params(s, t), &opts()) {
                    Ok(r) => r,
                    Err(e) => {
                        failures.push(format!("{label}: solver: {e}"));
                        continue;
                    }
                };
                let oracle = match grid_minimize(&grid, n, params(s, t), &budget) {
                    Ok(r) => r,
                    Err(e) => {
                        failures.push(format!("{label}: oracle: {e}"));
                        continue;
                    }
                };
                let eps = match grid_epsilon(&grid, n, params(s, t), cont.config.separation()) {
                    Ok(v) => v,
                    Err(e) => {
                        failures.push(format!("{label}: epsilon: {e}"));
                        continue;
                    }
                };
                let gap = (cont.energy.linear - oracle.energy.linear).abs();
                if gap > eps {
                    failures.push(format!(
                        "{label}: |continuous - oracle| = {gap:.3e} > epsilon {eps:.3e}"
                    ));
                }
            }
        }
    }
    verdict(6, "oracle equivalence", failures, started);
}

/// Criterion 7: at s=0, t=0 every sweep reports exactly N(N-1), bit for bit.
#[test]
fn criterion_7_g0_identity() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let spaces: Vec<Arc<Space>> = vec![
        Arc::new(Space::segment(0.0, 0.9).unwrap()),
        Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap()),
        Arc::new(Space::circle(0.25, MetricKind::Chord).unwrap()),
        Arc::new(Space::sphere(0.3).unwrap()),
    ];
    for space in &spaces {
        for n in [2usize, 3, 5] {
            match sweep_g(space, n, 0.0, &[0.0, 1.0], &opts()) {
                Ok(records) => {
                    let g0 = records[0].g.linear;
                    let exact = (n * (n - 1)) as f64;
                    if g0 != exact {
                        failures.push(format!(
                            "{} n={n}: g(0) = {g0} instead of {exact}",
                            space.id()
                        ));
                    }
                }
                Err(e) => failures.push(format!("{} n={n}: {e}", space.id())),
            }
        }
    }
    // The equal-spacing reference evaluates to the same exact count.
    let circle = Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap());
    let eq = equally_spaced(&circle, 4, 0.0).unwrap();
    let e = slog_energy::energy(&eq, params(0.0, 0.0)).unwrap();
    if e.linear != 12.0 {
        failures.push(format!("equal spacing n=4: energy {} instead of 12", e.linear));
    }
    verdict(7, "g(0) identity", failures, started);
}

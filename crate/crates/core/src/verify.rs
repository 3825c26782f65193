//! Runtime verification suites: each suite re-checks one family of
//! mathematical claims with fresh solves and prints one line per check.
//! The CLI `verify` subcommand and the acceptance test share these.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    circle_optimality_check, cluster_probe, derivative_probe, infinity_limit_probe, sweep_g,
};
use crate::config::Configuration;
use crate::energy::{energy, lower_bound, sandwich_check};
use crate::error::{Error, Result};
use crate::kernel::{h_eval, k2_chord, k2_geodesic, kernel_eval, p_eval, KernelParams};
use crate::optimizer::SolveOptions;
use crate::oracle::{grid_epsilon, grid_minimize, grid_pack, GridBudget};
use crate::space::{MetricKind, Space};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_count(&self) -> usize {
        self.checks.iter().filter(|c| !c.pass).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemmas,
    Circle,
    Limits,
    Derivatives,
    Clusters,
    Oracle,
    G0,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Self::Lemmas),
            "circle" => Ok(Self::Circle),
            "limits" => Ok(Self::Limits),
            "derivatives" => Ok(Self::Derivatives),
            "clusters" => Ok(Self::Clusters),
            "oracle" => Ok(Self::Oracle),
            "g0" => Ok(Self::G0),
            "all" => Ok(Self::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite '{other}'; expected one of \
                 lemmas|circle|limits|derivatives|clusters|oracle|g0|all"
            ))),
        }
    }
}

pub fn run_suite(suite: Suite, opts: &SolveOptions) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::Lemmas => Ok(vec![suite_lemmas()?]),
        Suite::Circle => Ok(vec![suite_circle(opts)?]),
        Suite::Limits => Ok(vec![suite_limits(opts)?]),
        Suite::Derivatives => Ok(vec![suite_derivatives(opts)?]),
        Suite::Clusters => Ok(vec![suite_clusters(opts)?]),
        Suite::Oracle => Ok(vec![suite_oracle(opts)?]),
        Suite::G0 => Ok(vec![suite_g0(opts)?]),
        Suite::All => Ok(vec![
            suite_lemmas()?,
            suite_circle(opts)?,
            suite_limits(opts)?,
            suite_derivatives(opts)?,
            suite_clusters(opts)?,
            suite_oracle(opts)?,
            suite_g0(opts)?,
        ]),
    }
}

fn push(checks: &mut Vec<Check>, name: impl Into<String>, pass: bool, detail: String) {
    checks.push(Check {
        name: name.into(),
        pass,
        detail,
    });
}

fn builtin_spaces() -> Vec<Arc<Space>> {
    vec![
        Arc::new(Space::segment(0.0, 0.9).expect("valid segment")),
        Arc::new(Space::circle(0.1, MetricKind::Geodesic).expect("valid circle")),
        Arc::new(Space::circle(0.3, MetricKind::Chord).expect("valid circle")),
        Arc::new(Space::sphere(0.3).expect("valid sphere")),
    ]
}

fn random_config(space: &Arc<Space>, n: usize, rng: &mut ChaCha8Rng) -> Configuration {
    let p = space.param_len();
    loop {
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            let mut pt = vec![0.0; p];
            space.sample_point(rng, &mut pt);
            points.push(pt);
        }
        let config = Configuration::new(Arc::clone(space), points).expect("sampled points valid");
        if config.separation() > 0.0 {
            return config;
        }
    }
}

/// Numeric second derivative of the kernel in its argument.
/// Five-point second difference: O(h^4) truncation, needed to certify the
/// closed-form second derivatives to 1e-6 relative in f64.
fn kernel_fd2(params: KernelParams, x: f64, h: f64) -> Result<f64> {
    let f = |y: f64| kernel_eval(params, y);
    Ok((-f(x + 2.0 * h)? + 16.0 * f(x + h)? - 30.0 * f(x)? + 16.0 * f(x - h)?
        - f(x - 2.0 * h)?)
        / (12.0 * h * h))
}

/// Numeric second derivative of the chord kernel in the substituted angle.
fn chord_fd2(params: KernelParams, alpha: f64, x: f64, h: f64) -> Result<f64> {
    let q = |y: f64| kernel_eval(params, 2.0 * alpha * y.sin());
    Ok((-q(x + 2.0 * h)? + 16.0 * q(x + h)? - 30.0 * q(x)? + 16.0 * q(x - h)?
        - q(x - 2.0 * h)?)
        / (12.0 * h * h))
}

/// Random-draw checks of the pointwise lemmas: the difference-quotient
/// sandwich, monotonicity of the auxiliary maps, the configuration-free
/// energy lower bound, and positivity plus finite-difference agreement of
/// the second-derivative formulas.
pub fn suite_lemmas() -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE55);
    const DRAWS: usize = 1000;

    for space in builtin_spaces() {
        let mut failures = 0usize;
        let mut worst = String::new();
        for _ in 0..DRAWS {
            let n = rng.gen_range(2..=5);
            let config = random_config(&space, n, &mut rng);
            let r = rng.gen_range(0.0..2.0);
            let s = r + rng.gen_range(1e-3..2.0);
            let t = rng.gen_range(0.0..3.0);
            let report = sandwich_check(&config, r, s, t)?;
            if !report.holds {
                failures += 1;
                if worst.is_empty() {
                    worst = format!(
                        "r={r} s={s} t={t}: lhs={} mid={} rhs={}",
                        report.lhs, report.mid, report.rhs
                    );
                }
            }
        }
        push(
            &mut checks,
            format!("sandwich holds on {DRAWS} draws, {}", space.id()),
            failures == 0,
            if failures == 0 {
                "all draws inside the sandwich".to_string()
            } else {
                format!("{failures} violations; first: {worst}")
            },
        );
    }

    let mut h_bad = 0usize;
    for _ in 0..DRAWS {
        let beta = rng.gen_range(0.0..3.0);
        let a = rng.gen_range(1e-6..1.0 - 1e-9);
        let b = rng.gen_range(1e-6..1.0 - 1e-9);
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        if x == y {
            continue;
        }
        if !(h_eval(beta, x)? < h_eval(beta, y)?) {
            h_bad += 1;
        }
    }
    push(
        &mut checks,
        format!("x(log 1/x)^-beta strictly increasing, {DRAWS} pairs"),
        h_bad == 0,
        format!("{h_bad} violations"),
    );

    let mut p_bad = 0usize;
    for _ in 0..DRAWS {
        let mut s = rng.gen_range(0.0..3.0);
        let mut t = rng.gen_range(0.0..3.0);
        if s < 1e-6 && t < 1e-6 {
            s = 1.0;
            t = 0.0;
        }
        let a = rng.gen_range(1e-6..1.0 - 1e-9);
        let b = rng.gen_range(1e-6..1.0 - 1e-9);
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        if x == y {
            continue;
        }
        let params = KernelParams::new(s, t)?;
        if !(p_eval(params, x)? > p_eval(params, y)?) {
            p_bad += 1;
        }
    }
    push(
        &mut checks,
        format!("x^-s(log 1/x)^t strictly decreasing, {DRAWS} pairs"),
        p_bad == 0,
        format!("{p_bad} violations"),
    );

    let mut lb_bad = 0usize;
    for space in builtin_spaces() {
        for _ in 0..DRAWS / 4 {
            let n = rng.gen_range(2..=5);
            let config = random_config(&space, n, &mut rng);
            let s = rng.gen_range(0.0..3.0);
            let t = rng.gen_range(0.0..3.0);
            let params = KernelParams::new(s, t)?;
            let e = energy(&config, params)?;
            let lb = lower_bound(&space, n, params)?;
            if !(e.linear >= lb - 1e-9 * lb.abs() - 1e-12) {
                lb_bad += 1;
            }
        }
    }
    push(
        &mut checks,
        format!("energy >= N(N-1) k(diam) on {DRAWS} random configs"),
        lb_bad == 0,
        format!("{lb_bad} violations"),
    );

    // Convexity grids under the three hypotheses, plus finite-difference
    // agreement of the closed-form second derivatives.
    let grids: [(&str, KernelParams, f64, f64); 3] = [
        ("geodesic t >= 1", KernelParams::new(2.0, 1.5)?, 1e-4, 1.0 - 1e-4),
        (
            "geodesic small radius",
            KernelParams::new(1.0, 0.5)?,
            1e-4,
            std::f64::consts::E.recip() - 1e-4,
        ),
        ("chord t >= 1", KernelParams::new(2.0, 1.0)?, 1e-4, std::f64::consts::FRAC_PI_2 - 1e-4),
    ];
    for (label, params, lo, hi) in grids {
        let chord = label.starts_with("chord");
        let mut positive = true;
        let mut fd_ok = true;
        let mut fd_worst = 0.0f64;
        for i in 0..1000 {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / 1000.0;
            let k2 = if chord {
                k2_chord(params, 0.3, x)?
            } else {
                k2_geodesic(params, x)?
            };
            if !(k2 > 0.0) {
                positive = false;
            }
            if i % 10 == 0 && x > 0.02 && x < hi - 0.02 {
                // Keep x +- 2h inside the domain and scale h with x so both
                // truncation and cancellation stay well under tolerance.
                let h = (x.min(hi - x) / 200.0).min(1e-3);
                let fd = if chord {
                    chord_fd2(params, 0.3, x, h)?
                } else {
                    kernel_fd2(params, x, h)?
                };
                let rel = (k2 - fd).abs() / k2.abs().max(1.0);
                fd_worst = fd_worst.max(rel);
                if rel > 1e-6 {
                    fd_ok = false;
                }
            }
        }
        push(
            &mut checks,
            format!("second derivative positive on 1000-point grid, {label}"),
            positive,
            String::new(),
        );
        push(
            &mut checks,
            format!("second derivative matches finite differences, {label}"),
            fd_ok,
            format!("worst relative gap {fd_worst:.3e}"),
        );
    }

    Ok(SuiteReport {
        suite: "lemmas".to_string(),
        checks,
    })
}

/// Equal spacing optimality on circles across every covered-hypothesis
/// scenario and N in {2, 3, 5, 7}.
pub fn suite_circle(opts: &SolveOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let scenarios: Vec<(f64, MetricKind, f64, f64)> = vec![
        (0.2, MetricKind::Geodesic, 0.0, 1.0),
        (0.2, MetricKind::Geodesic, 0.5, 1.0),
        (0.2, MetricKind::Geodesic, 2.0, 1.0),
        (0.1, MetricKind::Geodesic, 0.5, 0.0),
        (0.1, MetricKind::Geodesic, 1.0, 0.0),
        (0.1, MetricKind::Geodesic, 3.0, 0.0),
        (0.1, MetricKind::Geodesic, 0.0, 2.0),
        (0.3, MetricKind::Chord, 0.0, 1.0),
        (0.3, MetricKind::Chord, 1.0, 1.0),
        (0.3, MetricKind::Chord, 2.0, 1.0),
    ];
    for (alpha, kind, s, t) in scenarios {
        let space = Arc::new(Space::circle(alpha, kind)?);
        for n in [2usize, 3, 5, 7] {
            let params = KernelParams::new(s, t)?;
            let report = circle_optimality_check(&space, n, params, opts)?;
            let agree_ok = report.starts_agreeing * 16 >= opts.starts * 12;
            push(
                &mut checks,
                format!("{} s={s} t={t} N={n}", space.id()),
                report.pass && agree_ok,
                format!(
                    "{}; gap {:.3e}; agreeing {}/{}",
                    report.hypothesis, report.max_signature_gap, report.starts_agreeing, opts.starts
                ),
            );
        }
    }
    Ok(SuiteReport {
        suite: "circle".to_string(),
        checks,
    })
}

/// Large-s limit on the geodesic circle: the normalized error bound at
/// every s, the end error, monotone approach, and the packing cross-check.
pub fn suite_limits(opts: &SolveOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let alpha = 0.05;
    let space = Arc::new(Space::circle(alpha, MetricKind::Geodesic)?);
    let schedule: Vec<f64> = (1..=10).map(|k| 2.0f64.powi(k)).collect();

    for n in [2usize, 4] {
        let delta_exact = std::f64::consts::TAU * alpha / n as f64;
        let grid = Arc::new((*space).clone().discretize(720)?);
        let budget = GridBudget {
            max_combinations: 20_000_000_000,
        };
        let pack = grid_pack(&grid, n, &budget)?;
        push(
            &mut checks,
            format!("grid packing matches 2 pi alpha / N, N={n}"),
            (pack.delta - delta_exact).abs() <= 1e-9,
            format!("grid {} vs exact {delta_exact}", pack.delta),
        );

        for t in [0.0, 1.0] {
            let table = infinity_limit_probe(&space, n, t, &schedule, opts)?;
            let nn = (n * (n - 1)) as f64;
            let mut all_bounded = true;
            let mut worst = 0.0f64;
            for r in &table.records {
                let err = (r.g_pow * delta_exact - 1.0).abs();
                let bound =
                    nn.powf(1.0 / r.s) * (1.0 / delta_exact).ln().powf(t / r.s) - 1.0 + 1e-6;
                worst = worst.max(err - bound);
                if err > bound {
                    all_bounded = false;
                }
            }
            push(
                &mut checks,
                format!("normalized error within closed-form bound, N={n} t={t}"),
                all_bounded,
                format!("worst excess {worst:.3e}"),
            );
            let last = table.records.last().expect("schedule nonempty");
            push(
                &mut checks,
                format!("error at s=1024 below 1e-2, N={n} t={t}"),
                (last.g_pow * delta_exact - 1.0).abs() <= 1e-2,
                format!("error {:.3e}", (last.g_pow * delta_exact - 1.0).abs()),
            );
            let monotone = table
                .records
                .windows(2)
                .all(|w| w[1].abs_err <= w[0].abs_err + 1e-9);
            push(
                &mut checks,
                format!("error non-increasing along schedule, N={n} t={t}"),
                monotone,
                String::new(),
            );
            push(
                &mut checks,
                format!("sandwich bounds hold at every s, N={n} t={t}"),
                table.records.iter().all(|r| r.within),
                String::new(),
            );
        }
    }
    Ok(SuiteReport {
        suite: "limits".to_string(),
        checks,
    })
}

/// One-sided derivative checks on the antipodal pair.
pub fn suite_derivatives(opts: &SolveOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let space = Arc::new(Space::circle(0.05, MetricKind::Geodesic)?);

    let report = derivative_probe(&space, 2, 0.0, 1.0, None, opts)?;
    push(
        &mut checks,
        "forward quotient matches hand derivative at s0=1",
        (report.fd_plus - 23.562).abs() <= 1e-2,
        format!("fd_plus {}", report.fd_plus),
    );
    let minus = report.fd_minus.expect("s0 > 0 has a backward quotient");
    push(
        &mut checks,
        "backward quotient matches hand derivative at s0=1",
        (minus - 23.562).abs() <= 1e-2,
        format!("fd_minus {minus}"),
    );

    for s0 in [0.5, 1.0, 2.0] {
        let fine = derivative_probe(&space, 2, 0.0, s0, Some(1e-6), opts)?;
        let minus = fine.fd_minus.expect("s0 > 0 has a backward quotient");
        push(
            &mut checks,
            format!("fd_plus <= fd_minus + 1e-3 at s0={s0}"),
            fine.fd_plus <= minus + 1e-3,
            format!("fd_plus {} fd_minus {minus}", fine.fd_plus),
        );
    }
    Ok(SuiteReport {
        suite: "derivatives".to_string(),
        checks,
    })
}

/// The three cluster traces: equal spacing at every s, energy convergence
/// to g(s0), and the packing limit on the segment.
pub fn suite_clusters(opts: &SolveOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    let circle = Arc::new(Space::circle(0.1, MetricKind::Geodesic)?);
    let mut schedule = Vec::new();
    for k in 1..=10 {
        schedule.push(1.0 + 2.0f64.powi(-k));
        schedule.push(1.0 - 2.0f64.powi(-k));
    }
    let trace = cluster_probe(&circle, 4, 1.0, 1.0, &schedule, opts)?;
    let worst = trace
        .signature_distances
        .iter()
        .fold(0.0f64, |m, d| m.max(*d));
    push(
        &mut checks,
        "circle trace stays equally spaced at every step",
        worst <= 1e-5,
        format!("worst signature distance {worst:.3e}"),
    );
    let g0 = trace.reference_energy.expect("finite s0").linear;
    let e_end = trace.energies_at_s0.last().expect("nonempty").linear;
    push(
        &mut checks,
        "circle trace energies land on g(s0)",
        (e_end - g0).abs() <= 1e-6 * g0.abs(),
        format!("final {e_end} vs g(s0) {g0}"),
    );

    let segment = Arc::new(Space::segment(0.0, 0.9)?);
    let toward2: Vec<f64> = (1..=10).map(|k| 2.0 - 2.0f64.powi(-k)).collect();
    let trace2 = cluster_probe(&segment, 3, 0.0, 2.0, &toward2, opts)?;
    let g2 = trace2.reference_energy.expect("finite s0").linear;
    let e2 = trace2.energies_at_s0.last().expect("nonempty").linear;
    push(
        &mut checks,
        "segment trace toward s0=2 converges in energy",
        (e2 - g2).abs() <= 1e-6 * g2.abs() && *trace2.signature_distances.last().unwrap() <= 1e-4,
        format!("final {e2} vs g(2) {g2}"),
    );

    let doubling: Vec<f64> = (1..=10).map(|k| 2.0f64.powi(k)).collect();
    let trace3 = cluster_probe(&segment, 4, 0.0, f64::INFINITY, &doubling, opts)?;
    let expect = [0.3, 0.3, 0.3, 0.6, 0.6, 0.9];
    let sig_ok = trace3
        .reference_signature
        .iter()
        .zip(expect)
        .all(|(a, e)| (a - e).abs() <= 1e-7);
    push(
        &mut checks,
        "segment packing trace reaches equal spacing",
        sig_ok && *trace3.signature_distances.last().unwrap() <= 1e-4,
        format!(
            "end distance {:.3e}",
            trace3.signature_distances.last().unwrap()
        ),
    );
    Ok(SuiteReport {
        suite: "clusters".to_string(),
        checks,
    })
}

/// Continuous solver versus exhaustive grid enumeration, with the
/// discretization error bound computed from the kernel's Lipschitz constant.
pub fn suite_oracle(opts: &SolveOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let budget = GridBudget {
        max_combinations: 1_000_000_000,
    };
    let cases: Vec<(Arc<Space>, usize)> = vec![
        (Arc::new(Space::segment(0.0, 0.9)?), 120),
        (Arc::new(Space::circle(0.1, MetricKind::Geodesic)?), 360),
    ];
    for (space, m) in cases {
        let grid = Arc::new((*space).clone().discretize(m)?);
        for n in [2usize, 3, 4] {
            for (s, t) in [(1.0, 0.0), (2.0, 1.0)] {
                let params = KernelParams::new(s, t)?;
                let cont = crate::optimizer::minimize_energy(&space, n, params, opts)?;
                let oracle = grid_minimize(&grid, n, params, &budget)?;
                let sep = cont
                    .config
                    .separation()
                    .min(oracle.config.separation());
                let eps = grid_epsilon(&grid, n, params, sep)?;
                let gap = (cont.energy.linear - oracle.energy.linear).abs();
                push(
                    &mut checks,
                    format!("{} N={n} s={s} t={t} vs grid M={m}", space.id()),
                    gap <= eps,
                    format!("gap {gap:.3e} vs bound {eps:.3e}"),
                );
            }
        }
    }
    Ok(SuiteReport {
        suite: "oracle".to_string(),
        checks,
    })
}

/// The trivial-kernel identity: at s = t = 0 every sweep reports exactly
/// N(N-1).
pub fn suite_g0(opts: &SolveOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let spaces: Vec<Arc<Space>> = vec![
        Arc::new(Space::segment(0.0, 0.9)?),
        Arc::new(Space::circle(0.1, MetricKind::Geodesic)?),
        Arc::new(Space::circle(0.3, MetricKind::Chord)?),
        Arc::new(Space::sphere(0.3)?),
        Arc::new(Space::segment(0.0, 0.9)?.discretize(40)?),
    ];
    for space in spaces {
        for n in [2usize, 3, 5] {
            let recs = sweep_g(&space, n, 0.0, &[0.0], opts)?;
            let expect = (n * (n - 1)) as f64;
            push(
                &mut checks,
                format!("g(0) = N(N-1) on {}, N={n}", space.id()),
                recs[0].g.linear == expect,
                format!("got {}", recs[0].g.linear),
            );
        }
    }
    Ok(SuiteReport {
        suite: "g0".to_string(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for name in ["lemmas", "circle", "limits", "derivatives", "clusters", "oracle", "g0", "all"] {
            assert!(Suite::from_str(name).is_ok());
        }
        assert!(Suite::from_str("bogus").is_err());
    }

    #[test]
    fn g0_suite_passes() {
        let report = suite_g0(&SolveOptions::default()).unwrap();
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn lemmas_suite_passes() {
        let report = suite_lemmas().unwrap();
        assert!(
            report.passed(),
            "{:?}",
            report.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>()
        );
    }
}

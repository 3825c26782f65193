//! Minimal-energy and best-packing solvers.
//!
//! Continuous spaces run multi-start projected gradient descent with a
//! backtracking line search on the log-domain energy (same minimizers, far
//! better scaling at large `s`). Finite spaces run a deterministic discrete
//! coordinate descent. Best packing chases the large-`s` limit with a
//! doubling schedule and finishes with a maximin pattern-search polish.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::seq::index::sample as index_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::energy::{energy, log_sum_exp, EnergyValue};
use crate::error::{Error, Result};
use crate::kernel::{log_kernel_ddist, log_kernel_unchecked, KernelParams};
use crate::space::{MetricKind, Space};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Independent random restarts.
    pub starts: usize,
    /// Iteration cap per start (gradient steps, or sweeps for finite spaces).
    pub max_iters: usize,
    /// Convergence threshold on the projected gradient of the log-energy.
    pub grad_tol: f64,
    /// Seed from which every start's generator is derived.
    pub seed: u64,
    /// Optional random perturbation polish between descent passes.
    pub anneal: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            max_iters: 10_000,
            grad_tol: 1e-10,
            seed: 0xC0FFEE,
            anneal: false,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::InvalidArgument("starts must be at least 1".to_string()));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument(
                "max_iters must be at least 1".to_string(),
            ));
        }
        if !(self.grad_tol > 0.0) || !self.grad_tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "grad_tol must be a positive real, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub config: Configuration,
    pub energy: EnergyValue,
    pub converged: bool,
    /// Starts whose final energy lies within 1e-8 relative of the best.
    pub starts_agreeing: usize,
}

#[derive(Debug, Clone)]
pub struct PackingResult {
    pub config: Configuration,
    /// Separation of `config`; a lower bound for the best-packing distance.
    pub delta: f64,
    pub converged: bool,
}

/// SplitMix64 finalizer; derives per-start seeds from the base seed.
fn mix_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn wrap_signed(x: f64) -> f64 {
    let mut r = x % TAU;
    if r > PI {
        r -= TAU;
    } else if r < -PI {
        r += TAU;
    }
    r
}

/// Log-domain energy objective over a flat parameter vector of n points.
struct ContinuousProblem<'a> {
    space: &'a Space,
    n: usize,
    p: usize,
    params: KernelParams,
}

impl<'a> ContinuousProblem<'a> {
    fn new(space: &'a Space, n: usize, params: KernelParams) -> Self {
        Self {
            space,
            n,
            p: space.param_len(),
            params,
        }
    }

    fn point<'b>(&self, x: &'b [f64], i: usize) -> &'b [f64] {
        &x[i * self.p..(i + 1) * self.p]
    }

    /// Log-energy `ln 2 + lse(pair log kernels)`; +inf on coincident points.
    fn value(&self, x: &[f64], scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = self.space.distance(self.point(x, i), self.point(x, j));
                scratch.push(log_kernel_unchecked(self.params, d));
            }
        }
        std::f64::consts::LN_2 + log_sum_exp(scratch)
    }

    /// Value plus analytic gradient; the sphere gradient is projected onto
    /// the tangent plane at each point.
    fn value_grad(&self, x: &[f64], grad: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
        let f = self.value(x, scratch);
        for g in grad.iter_mut() {
            *g = 0.0;
        }
        if !f.is_finite() {
            return f;
        }
        let lse = f - std::f64::consts::LN_2;
        let mut pair = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let (pi, pj) = (self.point(x, i), self.point(x, j));
                let d = self.space.distance(pi, pj);
                let w = (scratch[pair] - lse).exp();
                pair += 1;
                if d == 0.0 || w == 0.0 {
                    continue;
                }
                let coeff = w * log_kernel_ddist(self.params, d);
                match self.space {
                    Space::Segment { .. } => {
                        let dd = if pi[0] >= pj[0] { 1.0 } else { -1.0 };
                        grad[i * self.p] += coeff * dd;
                        grad[j * self.p] -= coeff * dd;
                    }
                    Space::Circle { alpha, kind } => {
                        let w_ang = wrap_signed(pi[0] - pj[0]);
                        let sign = if w_ang >= 0.0 { 1.0 } else { -1.0 };
                        let dd = match kind {
                            MetricKind::Geodesic => alpha * sign,
                            MetricKind::Chord => alpha * (w_ang / 2.0).cos() * sign,
                        };
                        grad[i * self.p] += coeff * dd;
                        grad[j * self.p] -= coeff * dd;
                    }
                    Space::Sphere { .. } => {
                        for c in 0..3 {
                            let dd = (pi[c] - pj[c]) / d;
                            grad[i * self.p + c] += coeff * dd;
                            grad[j * self.p + c] -= coeff * dd;
                        }
                    }
                    Space::Finite(_) => unreachable!("finite spaces use the discrete solver"),
                }
            }
        }
        if let Space::Sphere { .. } = self.space {
            for i in 0..self.n {
                let pt = self.point(x, i);
                let norm2 = pt[0] * pt[0] + pt[1] * pt[1] + pt[2] * pt[2];
                if norm2 == 0.0 {
                    continue;
                }
                let gi = &mut grad[i * self.p..(i + 1) * self.p];
                let dot = gi[0] * pt[0] + gi[1] * pt[1] + gi[2] * pt[2];
                for c in 0..3 {
                    gi[c] -= dot * pt[c] / norm2;
                }
            }
        }
        f
    }
}

/// Central-difference gradient of the log-energy through the retraction;
/// test instrumentation for the analytic gradients.
pub fn numeric_gradient(
    space: &Space,
    n: usize,
    params: KernelParams,
    x: &[f64],
) -> Vec<f64> {
    let problem = ContinuousProblem::new(space, n, params);
    let p = space.param_len();
    let mut scratch = Vec::new();
    let mut grad = vec![0.0; x.len()];
    let h = 1e-7;
    for c in 0..x.len() {
        let mut plus = x.to_vec();
        plus[c] += h;
        for i in 0..n {
            space.retract(&mut plus[i * p..(i + 1) * p]);
        }
        let mut minus = x.to_vec();
        minus[c] -= h;
        for i in 0..n {
            space.retract(&mut minus[i * p..(i + 1) * p]);
        }
        grad[c] = (problem.value(&plus, &mut scratch) - problem.value(&minus, &mut scratch))
            / (2.0 * h);
    }
    grad
}

struct StartOutcome {
    f: f64,
    x: Vec<f64>,
    converged: bool,
}

/// Zeroes gradient components that push against an active segment bound;
/// other spaces have no boundary.
fn project_gradient(space: &Space, x: &[f64], g: &[f64], pg: &mut [f64]) {
    pg.copy_from_slice(g);
    if let Space::Segment { a, b } = space {
        for (xc, gc) in x.iter().zip(pg.iter_mut()) {
            if (*xc <= *a && *gc > 0.0) || (*xc >= *b && *gc < 0.0) {
                *gc = 0.0;
            }
        }
    }
}

fn retract_all(space: &Space, x: &mut [f64]) {
    let p = space.param_len();
    for chunk in x.chunks_mut(p) {
        space.retract(chunk);
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
}

/// Directional derivative of the log-energy along `d` at `x0 + eta * d`
/// (after retraction), through the projected gradient at the trial point.
/// `None` when the trial value is not finite (a collision along the ray).
#[allow(clippy::too_many_arguments)]
fn dir_derivative(
    problem: &ContinuousProblem,
    x0: &[f64],
    d: &[f64],
    eta: f64,
    trial: &mut [f64],
    tg: &mut [f64],
    tpg: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Option<f64> {
    for (t, (xc, dc)) in trial.iter_mut().zip(x0.iter().zip(d.iter())) {
        *t = xc + eta * dc;
    }
    retract_all(problem.space, trial);
    let fv = problem.value_grad(trial, tg, scratch);
    if !fv.is_finite() {
        return None;
    }
    project_gradient(problem.space, trial, tg, tpg);
    Some(tpg.iter().zip(d.iter()).map(|(a, b)| a * b).sum())
}

/// State threaded through the polish line minimizations.
struct LineMinState {
    d: Vec<f64>,
    trial: Vec<f64>,
    tg: Vec<f64>,
    tpg: Vec<f64>,
    scratch: Vec<f64>,
}

impl LineMinState {
    fn new(dim: usize) -> Self {
        Self {
            d: vec![0.0; dim],
            trial: vec![0.0; dim],
            tg: vec![0.0; dim],
            tpg: vec![0.0; dim],
            scratch: Vec::new(),
        }
    }
}

/// Minimize along `st.d` from `x` by bisecting on the sign of the
/// directional derivative, starting the bracket near `seed`. Applies the
/// step to `x` and returns the accepted step length (0 when the minimum
/// along the ray sits at the current point).
fn line_minimize(
    problem: &ContinuousProblem,
    x: &mut [f64],
    st: &mut LineMinState,
    seed: f64,
    cap: f64,
) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = if seed > 0.0 { (seed * 2.0).min(cap) } else { cap * 1e-3 };
    // Collisions along the ray read as "past the minimum".
    let mut psi_hi = dir_derivative(
        problem, x, &st.d, hi, &mut st.trial, &mut st.tg, &mut st.tpg, &mut st.scratch,
    )
    .unwrap_or(f64::INFINITY);
    let mut grow = 0;
    while psi_hi < 0.0 && hi < cap && grow < 80 {
        lo = hi;
        hi = (hi * 2.0).min(cap);
        psi_hi = dir_derivative(
            problem, x, &st.d, hi, &mut st.trial, &mut st.tg, &mut st.tpg, &mut st.scratch,
        )
        .unwrap_or(f64::INFINITY);
        grow += 1;
    }
    let eta = if psi_hi < 0.0 {
        // Still descending at the trust cap: take the full step.
        hi
    } else {
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = dir_derivative(
                problem, x, &st.d, mid, &mut st.trial, &mut st.tg, &mut st.tpg, &mut st.scratch,
            )
            .unwrap_or(f64::INFINITY);
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if eta > 0.0 {
        for (xc, dc) in x.iter_mut().zip(st.d.iter()) {
            *xc += eta * dc;
        }
        retract_all(problem.space, x);
    }
    eta
}

/// Exact-line-search polish. Backtracking on function values cannot place a
/// minimizer better than sqrt(eps) in position: near the optimum the Armijo
/// decrease falls below the f64 resolution of the objective, stranding the
/// iterate ~1e-5 from the minimizer. The sign of the directional derivative
/// stays meaningful down to machine precision, so each line minimization
/// bisects on that sign instead of comparing values.
///
/// Each round takes one steepest-descent line minimization followed by a
/// cyclic sweep of coordinate line minimizations. The coordinate sweep is
/// what converges through geodesic antipodal kinks: the derivative jumps
/// through zero there without ever being small, steepest descent jams
/// crossing the kink manifold, but every coordinate crosses it
/// transversally, so the bisection snaps pairs to exact antipodality. A
/// whole round that moves nothing at position resolution therefore counts
/// as reaching the minimizer even when no iterate has a small gradient.
fn line_min_polish(
    problem: &ContinuousProblem,
    x: &mut Vec<f64>,
    f_entry: f64,
    opts: &SolveOptions,
) -> (f64, bool) {
    let space = problem.space;
    let diam = space.diameter();
    let dim = x.len();
    let mut st = LineMinState::new(dim);
    let mut grad = vec![0.0; dim];
    let mut pg = vec![0.0; dim];
    let mut prev = vec![0.0; dim];
    let entry = x.clone();

    let fv = problem.value_grad(x, &mut grad, &mut st.scratch);
    if !fv.is_finite() {
        return (f_entry, false);
    }
    project_gradient(space, x, &grad, &mut pg);
    let mut pg_inf = inf_norm(&pg);
    let mut reached = pg_inf <= opts.grad_tol;
    // Circle configurations can jam on the web of geodesic antipodal kinks:
    // every coordinate alone sits at a V-bottom (its pair pinned at exact
    // antipodality), yet rotating a pinned pair rigidly still descends, and
    // along that direction the kink contributions cancel so the objective
    // is smooth. Those pair rotations get their own direction slots.
    let pair_slots = if matches!(space, Space::Circle { .. }) {
        problem.n * (problem.n - 1) / 2
    } else {
        0
    };
    // Per-direction bracket seeds: slot 0 steepest descent, coordinates,
    // then the pair rotations.
    let mut seeds = vec![0.0_f64; dim + 1 + pair_slots];
    if !reached {
        'rounds: for _ in 0..60 {
            let mut round_move = 0.0_f64;
            for k in 0..dim + 1 + pair_slots {
                let d_inf = if k == 0 {
                    for (dc, gc) in st.d.iter_mut().zip(pg.iter()) {
                        *dc = -gc;
                    }
                    pg_inf
                } else if k <= dim {
                    let c = k - 1;
                    if pg[c] == 0.0 {
                        continue;
                    }
                    for dc in st.d.iter_mut() {
                        *dc = 0.0;
                    }
                    st.d[c] = if pg[c] > 0.0 { -1.0 } else { 1.0 };
                    1.0
                } else {
                    // Decode the pair slot and keep only near-antipodal
                    // pairs, where the kink is active.
                    let mut slot = k - dim - 1;
                    let mut i = 0;
                    while slot >= problem.n - 1 - i {
                        slot -= problem.n - 1 - i;
                        i += 1;
                    }
                    let j = i + 1 + slot;
                    let dist = space.distance(problem.point(x, i), problem.point(x, j));
                    if dist < diam * (1.0 - 1e-3) {
                        continue;
                    }
                    let sum = pg[i] + pg[j];
                    if sum == 0.0 {
                        continue;
                    }
                    for dc in st.d.iter_mut() {
                        *dc = 0.0;
                    }
                    let dir = if sum > 0.0 { -1.0 } else { 1.0 };
                    st.d[i] = dir;
                    st.d[j] = dir;
                    1.0
                };
                if !(d_inf > 0.0) {
                    continue;
                }
                prev.copy_from_slice(x);
                let cap = 0.5 * diam / d_inf;
                let eta = line_minimize(problem, x, &mut st, seeds[k], cap);
                seeds[k] = if eta > 0.0 { eta } else { seeds[k] * 0.5 };
                if eta == 0.0 {
                    continue;
                }
                // Track genuine motion: min of the pre-retraction step and
                // the realized displacement (a circle wrap inflates the
                // latter, a sphere retraction shrinks the former).
                let realized: f64 = x
                    .iter()
                    .zip(prev.iter())
                    .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
                round_move = round_move.max(realized.min(eta * d_inf));
                let fv = problem.value_grad(x, &mut grad, &mut st.scratch);
                if !fv.is_finite() {
                    break 'rounds;
                }
                project_gradient(space, x, &grad, &mut pg);
                pg_inf = inf_norm(&pg);
                if pg_inf <= opts.grad_tol {
                    reached = true;
                    break 'rounds;
                }
            }
            if round_move <= 1e-13 * diam {
                reached = true;
                break;
            }
        }
    }
    let f_final = problem.value(x, &mut st.scratch);
    if !f_final.is_finite() || f_final > f_entry + f_entry.abs() * 1e-9 + 1e-12 {
        x.copy_from_slice(&entry);
        return (f_entry, false);
    }
    (f_final, reached)
}

/// Projected gradient descent with backtracking line search, finished by a
/// derivative-bisection polish. Returns the final value and whether a
/// stationary point was reached (a stall at floating-point position
/// resolution counts: geodesic antipodal kinks have no vanishing gradient
/// to converge on).
fn gradient_descent(
    problem: &ContinuousProblem,
    x: &mut Vec<f64>,
    opts: &SolveOptions,
) -> (f64, bool) {
    let space = problem.space;
    let diam = space.diameter();
    let mut scratch = Vec::new();
    let mut grad = vec![0.0; x.len()];
    let mut pg = vec![0.0; x.len()];
    let mut trial = vec![0.0; x.len()];
    let mut f = problem.value_grad(x, &mut grad, &mut scratch);
    if !f.is_finite() {
        return (f, false);
    }
    let mut prev_step = 0.0_f64;
    for _ in 0..opts.max_iters {
        project_gradient(space, x, &grad, &mut pg);
        let pg_inf = inf_norm(&pg);
        if pg_inf <= opts.grad_tol {
            return (f, true);
        }
        let pg_sq: f64 = pg.iter().map(|v| v * v).sum();
        let cap = 0.5 * diam / pg_inf;
        let mut eta = if prev_step > 0.0 {
            (prev_step * 4.0).min(cap)
        } else {
            cap * 0.1
        };
        let mut accepted = false;
        for _ in 0..60 {
            for (t, (xc, gc)) in trial.iter_mut().zip(x.iter().zip(pg.iter())) {
                *t = xc - eta * gc;
            }
            retract_all(space, &mut trial);
            let ft = problem.value(&trial, &mut scratch);
            if ft <= f - 1e-4 * eta * pg_sq {
                x.copy_from_slice(&trial);
                f = ft;
                prev_step = eta;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            let (f_polished, _) = line_min_polish(problem, x, f, opts);
            return (f_polished, true);
        }
        if eta * pg_inf <= 1e-13 * diam {
            // Accepted motion below position resolution: a stall in all but
            // name, so polish and stop instead of dribbling to max_iters.
            let (f_polished, _) = line_min_polish(problem, x, f, opts);
            return (f_polished, true);
        }
        f = problem.value_grad(x, &mut grad, &mut scratch);
    }
    let (f_polished, reached) = line_min_polish(problem, x, f, opts);
    (f_polished, reached)
}

/// Random perturbation polish: shrink-on-reject perturbations, then a final
/// descent pass.
fn anneal_polish(
    problem: &ContinuousProblem,
    x: &mut Vec<f64>,
    f: f64,
    rng: &mut ChaCha8Rng,
    opts: &SolveOptions,
) -> (f64, bool) {
    use rand::Rng;
    let mut best = f;
    let mut sigma = 0.05 * problem.space.diameter();
    let mut scratch = Vec::new();
    let mut trial = x.clone();
    for _ in 0..120 {
        for (t, xc) in trial.iter_mut().zip(x.iter()) {
            *t = xc + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        retract_all(problem.space, &mut trial);
        let ft = problem.value(&trial, &mut scratch);
        if ft < best {
            x.copy_from_slice(&trial);
            best = ft;
        } else {
            sigma *= 0.85;
            if sigma < 1e-13 {
                break;
            }
        }
    }
    gradient_descent(problem, x, opts)
}

fn sample_distinct_start(
    space: &Space,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let p = space.param_len();
    let mut x = vec![0.0; n * p];
    'outer: for _attempt in 0..100 {
        for i in 0..n {
            space.sample_point(rng, &mut x[i * p..(i + 1) * p]);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if space.distance(&x[i * p..(i + 1) * p], &x[j * p..(j + 1) * p]) == 0.0 {
                    continue 'outer;
                }
            }
        }
        return Ok(x);
    }
    Err(Error::SolverFailure(
        "could not sample a configuration with distinct points".to_string(),
    ))
}

fn flatten(config: &Configuration) -> Vec<f64> {
    config.points().iter().flatten().copied().collect()
}

fn unflatten(space: &Arc<Space>, n: usize, x: &[f64]) -> Result<Configuration> {
    let p = space.param_len();
    let points = (0..n).map(|i| x[i * p..(i + 1) * p].to_vec()).collect();
    Configuration::from_raw(Arc::clone(space), points)
}

/// Minimal-energy solve seeded purely by `opts`.
pub fn minimize_energy(
    space: &Arc<Space>,
    n: usize,
    params: KernelParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    minimize_energy_warm(space, n, params, opts, &[])
}

/// Minimal-energy solve where the first starts are taken from `warm`
/// configurations (sweeps chain the previous minimizer through here) and the
/// rest are seeded random restarts.
pub fn minimize_energy_warm(
    space: &Arc<Space>,
    n: usize,
    params: KernelParams,
    opts: &SolveOptions,
    warm: &[Configuration],
) -> Result<SolveResult> {
    opts.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a configuration needs at least 2 points, got {n}"
        )));
    }
    for w in warm {
        if w.n() != n {
            return Err(Error::InvalidArgument(format!(
                "warm start has {} points, expected {n}",
                w.n()
            )));
        }
        if w.space().param_len() != space.param_len() {
            return Err(Error::InvalidArgument(
                "warm start comes from an incompatible space".to_string(),
            ));
        }
    }
    if let Space::Finite(_) = **space {
        return minimize_finite(space, n, params, opts);
    }

    let total = opts.starts.max(warm.len().min(opts.starts) + 1).max(1);
    let outcomes: Vec<Result<StartOutcome>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, k as u64));
            let problem = ContinuousProblem::new(space, n, params);
            let mut x = if k < warm.len() {
                let mut v = flatten(&warm[k]);
                retract_all(space, &mut v);
                v
            } else {
                sample_distinct_start(space, n, &mut rng)?
            };
            let (mut f, mut converged) = gradient_descent(&problem, &mut x, opts);
            if opts.anneal && f.is_finite() {
                let (fa, ca) = anneal_polish(&problem, &mut x, f, &mut rng, opts);
                f = fa;
                converged = ca;
            }
            Ok(StartOutcome { f, x, converged })
        })
        .collect();

    let mut outcomes_ok = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        outcomes_ok.push(o?);
    }
    let mut best: Option<usize> = None;
    for (k, o) in outcomes_ok.iter().enumerate() {
        if !o.f.is_finite() {
            continue;
        }
        match best {
            None => best = Some(k),
            Some(b) if o.f < outcomes_ok[b].f => best = Some(k),
            _ => {}
        }
    }
    let best = best.ok_or_else(|| {
        Error::SolverFailure("every start ended on a degenerate configuration".to_string())
    })?;
    let f_best = outcomes_ok[best].f;
    let starts_agreeing = outcomes_ok
        .iter()
        .filter(|o| o.f.is_finite() && o.f - f_best <= 1e-8)
        .count();
    let config = unflatten(space, n, &outcomes_ok[best].x)?;
    let energy = energy(&config, params)?;
    Ok(SolveResult {
        config,
        energy,
        converged: outcomes_ok[best].converged,
        starts_agreeing,
    })
}

/// Discrete coordinate descent on a finite space: sweep the point slots,
/// moving each to the best grid index, until a full sweep changes nothing.
fn minimize_finite(
    space: &Arc<Space>,
    n: usize,
    params: KernelParams,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let fin = match &**space {
        Space::Finite(f) => f,
        _ => unreachable!(),
    };
    let m = fin.size();
    if n > m {
        return Err(Error::InvalidArgument(format!(
            "cannot place {n} distinct points on a grid of {m}"
        )));
    }
    // Pair objective in the log domain so arbitrarily large s works.
    let mut lk = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                lk[i * m + j] = log_kernel_unchecked(params, fin.dist_idx(i, j));
            }
        }
    }
    let value = |idx: &[usize], scratch: &mut Vec<f64>| -> f64 {
        scratch.clear();
        for a in 0..idx.len() {
            for b in (a + 1)..idx.len() {
                scratch.push(lk[idx[a] * m + idx[b]]);
            }
        }
        std::f64::consts::LN_2 + log_sum_exp(scratch)
    };

    let outcomes: Vec<(f64, Vec<usize>, bool)> = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, k as u64));
            let mut idx: Vec<usize> = index_sample(&mut rng, m, n).into_vec();
            let mut scratch = Vec::new();
            let mut f = value(&idx, &mut scratch);
            let mut converged = false;
            for _sweep in 0..opts.max_iters {
                let mut moved = false;
                for slot in 0..n {
                    let mut best_c = idx[slot];
                    let mut best_f = f;
                    let original = idx[slot];
                    for c in 0..m {
                        if c != original && idx.contains(&c) {
                            continue;
                        }
                        idx[slot] = c;
                        let fc = value(&idx, &mut scratch);
                        if fc < best_f {
                            best_f = fc;
                            best_c = c;
                        }
                    }
                    idx[slot] = best_c;
                    if best_c != original {
                        f = best_f;
                        moved = true;
                    }
                }
                if !moved {
                    converged = true;
                    break;
                }
            }
            (f, idx, converged)
        })
        .collect();

    let mut best = 0;
    for k in 1..outcomes.len() {
        if outcomes[k].0 < outcomes[best].0 {
            best = k;
        }
    }
    let f_best = outcomes[best].0;
    let starts_agreeing = outcomes
        .iter()
        .filter(|o| o.0.is_finite() && o.0 - f_best <= 1e-8)
        .count();
    let points: Vec<Vec<f64>> = outcomes[best].1.iter().map(|&i| vec![i as f64]).collect();
    let config = Configuration::new(Arc::clone(space), points)?;
    let energy = energy(&config, params)?;
    Ok(SolveResult {
        config,
        energy,
        converged: outcomes[best].2,
        starts_agreeing,
    })
}

fn point_min_dist(space: &Space, x: &[f64], n: usize, i: usize) -> f64 {
    let p = space.param_len();
    let pi = &x[i * p..(i + 1) * p];
    let mut best = f64::INFINITY;
    for j in 0..n {
        if j != i {
            best = best.min(space.distance(pi, &x[j * p..(j + 1) * p]));
        }
    }
    best
}

/// Maximin pattern search: move one point at a time along coordinate
/// directions, accepting moves that grow that point's own minimum distance.
/// Such moves never shrink the global separation.
fn maximin_polish(space: &Space, n: usize, x: &mut [f64]) {
    let p = space.param_len();
    let mut sigma = space.diameter() / 4.0;
    let mut trial = x.to_vec();
    while sigma > 1e-13 {
        loop {
            let mut any = false;
            for i in 0..n {
                let mut cur = point_min_dist(space, x, n, i);
                for c in 0..p {
                    for dir in [1.0, -1.0] {
                        trial.copy_from_slice(x);
                        trial[i * p + c] += dir * sigma;
                        space.retract(&mut trial[i * p..(i + 1) * p]);
                        let cand = point_min_dist(space, &trial, n, i);
                        if cand > cur + 1e-12 {
                            x.copy_from_slice(&trial);
                            cur = cand;
                            any = true;
                        }
                    }
                }
            }
            if !any {
                break;
            }
        }
        sigma *= 0.5;
    }
}

/// Discrete maximin sweep for finite spaces.
fn pack_finite(space: &Arc<Space>, n: usize, opts: &SolveOptions) -> Result<PackingResult> {
    let fin = match &**space {
        Space::Finite(f) => f,
        _ => unreachable!(),
    };
    let m = fin.size();
    if n > m {
        return Err(Error::InvalidArgument(format!(
            "cannot place {n} distinct points on a grid of {m}"
        )));
    }
    let min_dist = |idx: &[usize], slot: usize, c: usize| -> f64 {
        let mut best = f64::INFINITY;
        for (j, &q) in idx.iter().enumerate() {
            if j != slot {
                best = best.min(fin.dist_idx(c, q));
            }
        }
        best
    };
    let outcomes: Vec<(f64, Vec<usize>, bool)> = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.seed, k as u64));
            let mut idx: Vec<usize> = index_sample(&mut rng, m, n).into_vec();
            let mut converged = false;
            for _sweep in 0..opts.max_iters {
                let mut moved = false;
                for slot in 0..n {
                    let original = idx[slot];
                    let mut best_c = original;
                    let mut best_d = min_dist(&idx, slot, original);
                    for c in 0..m {
                        if c != original && idx.contains(&c) {
                            continue;
                        }
                        let d = min_dist(&idx, slot, c);
                        if d > best_d {
                            best_d = d;
                            best_c = c;
                        }
                    }
                    if best_c != original {
                        idx[slot] = best_c;
                        moved = true;
                    }
                }
                if !moved {
                    converged = true;
                    break;
                }
            }
            let delta = (0..n)
                .map(|s| min_dist(&idx, s, idx[s]))
                .fold(f64::INFINITY, f64::min);
            (delta, idx, converged)
        })
        .collect();
    let mut best = 0;
    for k in 1..outcomes.len() {
        if outcomes[k].0 > outcomes[best].0 {
            best = k;
        }
    }
    let points: Vec<Vec<f64>> = outcomes[best].1.iter().map(|&i| vec![i as f64]).collect();
    let config = Configuration::new(Arc::clone(space), points)?;
    let delta = config.separation();
    Ok(PackingResult {
        config,
        delta,
        converged: outcomes[best].2,
    })
}

/// Best-packing estimate: drive `s` through a doubling schedule at `t = 0`
/// (minimizers cluster toward best packings as `s` grows), then polish with
/// a maximin pattern search until improvements fall below 1e-12.
pub fn best_packing(space: &Arc<Space>, n: usize, opts: &SolveOptions) -> Result<PackingResult> {
    opts.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a packing needs at least 2 points, got {n}"
        )));
    }
    if let Space::Finite(_) = **space {
        return pack_finite(space, n, opts);
    }
    let mut warm: Vec<Configuration> = Vec::new();
    let mut last: Option<SolveResult> = None;
    let mut s = 2.0;
    while s <= 1024.0 {
        let params = KernelParams::new(s, 0.0)?;
        let res = minimize_energy_warm(space, n, params, opts, &warm)?;
        warm = vec![res.config.clone()];
        last = Some(res);
        s *= 2.0;
    }
    let last = last.expect("doubling schedule is nonempty");
    let mut x = flatten(&last.config);
    maximin_polish(space, n, &mut x);
    let config = unflatten(space, n, &x)?;
    let delta = config.separation();
    Ok(PackingResult {
        config,
        delta,
        converged: last.converged,
    })
}

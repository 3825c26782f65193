//! Instruments over the solver: g(s) sweeps, one-sided derivative probes,
//! large-s limit tables, and cluster-configuration traces.
//!
//! Every function here reports solver output, so results inherit solver
//! quality; `starts_agreeing` and the oracle cross-checks are the guard
//! rails against mistaking a local minimum for g(s).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::{config_distance, equally_spaced};
use crate::energy::{energy, EnergyValue};
use crate::error::{Error, Result};
use crate::kernel::{k2_chord, k2_geodesic, log_kernel_eval, KernelParams};
use crate::optimizer::{best_packing, minimize_energy, minimize_energy_warm, SolveOptions};
use crate::space::{MetricKind, Space};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub s: f64,
    pub t: f64,
    /// Best energy found at (s, t): the numerical estimate of g(s).
    pub g: EnergyValue,
    pub minimizer_signature: Vec<f64>,
    pub separation: f64,
    /// Energy of the same minimizer with the log exponent raised by one;
    /// difference quotients of g between nearby s values sit between the
    /// endpoint values of this field.
    pub e_logt1: EnergyValue,
    pub converged: bool,
    pub starts_agreeing: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub s0: f64,
    pub h_fd: f64,
    pub g_at_s0: f64,
    /// Forward difference quotient (g(s0 + h) - g(s0)) / h.
    pub fd_plus: f64,
    /// Backward difference quotient; absent at s0 = 0 where g has only a
    /// right derivative.
    pub fd_minus: Option<f64>,
    /// Raised-log energy at the s0 minimizer: the candidate derivative.
    pub e_logt1_at_min: f64,
    pub e_logt1_at_plus: f64,
    pub e_logt1_at_minus: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitRecord {
    pub s: f64,
    /// g(s)^(1/s), evaluated from the log-domain energy.
    pub g_pow: f64,
    /// Separation of the s-minimizer; the computable stand-in for the
    /// proof's uniform separation constant.
    pub separation: f64,
    /// (2 k(separation))^(1/s): algebraic lower bound on g_pow.
    pub lower: f64,
    /// (N(N-1) k(packing delta))^(1/s): algebraic upper bound on g_pow.
    pub upper: f64,
    /// |g_pow * delta - 1|, the distance from the limit target.
    pub abs_err: f64,
    pub within: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitTable {
    /// Best-packing separation found for (space, N).
    pub delta: f64,
    /// 1/delta, the claimed limit of g(s)^(1/s).
    pub target: f64,
    pub records: Vec<LimitRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterTrace {
    /// The approached exponent; +inf traces the best-packing limit.
    pub target_s0: f64,
    pub schedule: Vec<f64>,
    /// config_distance between each schedule minimizer's signature and the
    /// reference signature at s0 (or the best packing for s0 = +inf).
    pub signature_distances: Vec<f64>,
    /// E at (s0, t) of each schedule minimizer; empty when s0 = +inf.
    pub energies_at_s0: Vec<EnergyValue>,
    pub reference_signature: Vec<f64>,
    /// g(s0) from the reference solve; absent when s0 = +inf.
    pub reference_energy: Option<EnergyValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CircleHypothesis {
    /// Geodesic metric with t >= 1: the kernel is convex on (0, 1).
    GeodesicLogPower,
    /// Geodesic metric with alpha < 1/(e*pi) and a nontrivial kernel:
    /// distances stay below 1/e where the kernel is convex for all t >= 0.
    GeodesicSmallRadius,
    /// Chord metric with t >= 1: convexity holds in the substituted angle.
    ChordLogPower,
}

impl std::fmt::Display for CircleHypothesis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::GeodesicLogPower => write!(f, "geodesic metric, t >= 1"),
            Self::GeodesicSmallRadius => {
                write!(f, "geodesic metric, alpha < 1/(e*pi)")
            }
            Self::ChordLogPower => write!(f, "chord metric, t >= 1"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleOptimalityReport {
    pub hypothesis: CircleHypothesis,
    pub pass: bool,
    /// L-infinity gap between the solver signature and equal spacing.
    pub max_signature_gap: f64,
    pub k2_positive: bool,
    pub energy_equal: EnergyValue,
    pub energy_solver: EnergyValue,
    pub starts_agreeing: usize,
}

fn check_real(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
    }
    Ok(())
}

/// One minimize_energy call per s, each warm-started from the previous
/// minimizer plus fresh restarts.
pub fn sweep_g(
    space: &Arc<Space>,
    n: usize,
    t: f64,
    s_list: &[f64],
    opts: &SolveOptions,
) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::with_capacity(s_list.len());
    let mut warm = Vec::new();
    for &s in s_list {
        let params = KernelParams::new(s, t)?;
        let res = minimize_energy_warm(space, n, params, opts, &warm)?;
        let e_logt1 = energy(&res.config, params.bump_t())?;
        records.push(SweepRecord {
            s,
            t,
            g: res.energy,
            minimizer_signature: res.config.signature().to_vec(),
            separation: res.config.separation(),
            e_logt1,
            converged: res.converged,
            starts_agreeing: res.starts_agreeing,
        });
        warm = vec![res.config];
    }
    Ok(records)
}

/// One-sided difference quotients of g around s0 with step `h`
/// (default 1e-4). The s0 minimizer warm-starts both side solves.
pub fn derivative_probe(
    space: &Arc<Space>,
    n: usize,
    t: f64,
    s0: f64,
    h: Option<f64>,
    opts: &SolveOptions,
) -> Result<ProbeReport> {
    let h = h.unwrap_or(1e-4);
    check_real("s0", s0)?;
    check_real("h", h)?;
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("fd step must be positive, got {h}")));
    }
    if s0 < 0.0 {
        return Err(Error::InvalidArgument(format!("s0 must be >= 0, got {s0}")));
    }
    if s0 > 0.0 && s0 - h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "fd step {h} must be smaller than s0 = {s0} for the backward quotient"
        )));
    }
    let params0 = KernelParams::new(s0, t)?;
    let base = minimize_energy(space, n, params0, opts)?;
    let warm = vec![base.config.clone()];

    let params_p = KernelParams::new(s0 + h, t)?;
    let plus = minimize_energy_warm(space, n, params_p, opts, &warm)?;
    let g0 = base.energy.linear;
    let gp = plus.energy.linear;
    if !g0.is_finite() || !gp.is_finite() {
        return Err(Error::Domain(format!(
            "energies overflow near s0 = {s0}; difference quotients need finite values"
        )));
    }
    let fd_plus = (gp - g0) / h;
    let e_logt1_at_min = energy(&base.config, params0.bump_t())?.linear;
    let e_logt1_at_plus = energy(&plus.config, params_p.bump_t())?.linear;

    let (fd_minus, e_logt1_at_minus) = if s0 > 0.0 {
        let params_m = KernelParams::new(s0 - h, t)?;
        let minus = minimize_energy_warm(space, n, params_m, opts, &warm)?;
        let gm = minus.energy.linear;
        if !gm.is_finite() {
            return Err(Error::Domain(format!(
                "energy overflows at s0 - h = {}; difference quotients need finite values",
                s0 - h
            )));
        }
        (
            Some((g0 - gm) / h),
            Some(energy(&minus.config, params_m.bump_t())?.linear),
        )
    } else {
        (None, None)
    };

    Ok(ProbeReport {
        s0,
        h_fd: h,
        g_at_s0: g0,
        fd_plus,
        fd_minus,
        e_logt1_at_min,
        e_logt1_at_plus,
        e_logt1_at_minus,
    })
}

/// g(s)^(1/s) along an increasing schedule, bracketed by the algebraic
/// sandwich evaluated at computable quantities: the minimizer's own
/// separation below, the best-packing configuration above. The packing
/// configuration joins the warm starts, which is what makes the upper
/// bound hold by construction.
pub fn infinity_limit_probe(
    space: &Arc<Space>,
    n: usize,
    t: f64,
    s_schedule: &[f64],
    opts: &SolveOptions,
) -> Result<LimitTable> {
    if s_schedule.is_empty() {
        return Err(Error::InvalidArgument("empty s schedule".to_string()));
    }
    for w in s_schedule.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidArgument(format!(
                "s schedule must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    for &s in s_schedule {
        check_real("s", s)?;
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "limit schedule needs s > 0, got {s}"
            )));
        }
    }
    let pack = best_packing(space, n, opts)?;
    let delta = pack.delta;
    if !(delta > 0.0) {
        return Err(Error::SolverFailure(
            "best packing returned coincident points".to_string(),
        ));
    }
    let target = 1.0 / delta;
    let nn = (n * (n - 1)) as f64;

    let mut records = Vec::with_capacity(s_schedule.len());
    let mut prev = pack.config.clone();
    for &s in s_schedule {
        let params = KernelParams::new(s, t)?;
        let warm = vec![prev, pack.config.clone()];
        let res = minimize_energy_warm(space, n, params, opts, &warm)?;
        let c = res.config.separation();
        let g_pow = (res.energy.log / s).exp();
        let lower = ((std::f64::consts::LN_2 + log_kernel_eval(params, c)?) / s).exp();
        let upper = ((nn.ln() + log_kernel_eval(params, delta)?) / s).exp();
        let within = g_pow >= lower * (1.0 - 1e-9) - 1e-12
            && g_pow <= upper * (1.0 + 1e-9) + 1e-12;
        records.push(LimitRecord {
            s,
            g_pow,
            separation: c,
            lower,
            upper,
            abs_err: (g_pow * delta - 1.0).abs(),
            within,
            converged: res.converged,
        });
        prev = res.config;
    }
    Ok(LimitTable {
        delta,
        target,
        records,
    })
}

/// Trace minimizers along a schedule approaching s0 (or +inf), measuring
/// signature distance to the s0 reference and, for finite s0, their energy
/// evaluated at s0 itself.
pub fn cluster_probe(
    space: &Arc<Space>,
    n: usize,
    t: f64,
    target_s0: f64,
    schedule: &[f64],
    opts: &SolveOptions,
) -> Result<ClusterTrace> {
    if schedule.is_empty() {
        return Err(Error::InvalidArgument("empty cluster schedule".to_string()));
    }
    for &s in schedule {
        check_real("schedule entry", s)?;
        if s < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "schedule entries must be >= 0, got {s}"
            )));
        }
    }
    let infinite = target_s0.is_infinite() && target_s0.is_sign_positive();
    if infinite {
        for w in schedule.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidArgument(
                    "schedule must increase strictly toward +inf".to_string(),
                ));
            }
        }
    } else {
        check_real("s0", target_s0)?;
        if target_s0 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "s0 must be >= 0 or +inf, got {target_s0}"
            )));
        }
        let mut prev_gap = f64::INFINITY;
        for &s in schedule {
            let gap = (s - target_s0).abs();
            if gap == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "schedule entry {s} equals s0; the trace needs an approach"
                )));
            }
            if gap > prev_gap {
                return Err(Error::InvalidArgument(format!(
                    "schedule must approach s0 = {target_s0} monotonically; \
                     |{s} - s0| exceeds the previous gap"
                )));
            }
            prev_gap = gap;
        }
        if schedule.len() > 1 {
            let first = (schedule[0] - target_s0).abs();
            if prev_gap >= first {
                return Err(Error::InvalidArgument(
                    "schedule never gets closer to s0".to_string(),
                ));
            }
        }
    }

    let (reference, reference_energy) = if infinite {
        (best_packing(space, n, opts)?.config, None)
    } else {
        let res = minimize_energy(space, n, KernelParams::new(target_s0, t)?, opts)?;
        (res.config, Some(res.energy))
    };
    let ref_sig = reference.signature();

    let mut signature_distances = Vec::with_capacity(schedule.len());
    let mut energies_at_s0 = Vec::with_capacity(schedule.len());
    let mut prev = reference.clone();
    for &s in schedule {
        let params = KernelParams::new(s, t)?;
        let warm = vec![prev, reference.clone()];
        let res = minimize_energy_warm(space, n, params, opts, &warm)?;
        signature_distances.push(config_distance(&res.config.signature(), &ref_sig)?);
        if !infinite {
            energies_at_s0.push(energy(&res.config, KernelParams::new(target_s0, t)?)?);
        }
        prev = res.config;
    }
    Ok(ClusterTrace {
        target_s0,
        schedule: schedule.to_vec(),
        signature_distances,
        energies_at_s0,
        reference_signature: ref_sig.to_vec(),
        reference_energy,
    })
}

/// Matches circle parameters against the optimality hypotheses, checked in
/// a fixed order; several can hold at once (t >= 1 with a small radius),
/// and the first match is reported.
pub fn match_circle_hypothesis(
    kind: MetricKind,
    alpha: f64,
    params: KernelParams,
) -> Option<CircleHypothesis> {
    let small = alpha < (std::f64::consts::E * std::f64::consts::PI).recip();
    match kind {
        MetricKind::Geodesic if params.t() >= 1.0 => Some(CircleHypothesis::GeodesicLogPower),
        MetricKind::Geodesic if small && params.nontrivial() => {
            Some(CircleHypothesis::GeodesicSmallRadius)
        }
        MetricKind::Chord if params.t() >= 1.0 => Some(CircleHypothesis::ChordLogPower),
        _ => None,
    }
}

/// Verifies that equally spaced points minimize the energy on a circle
/// whose parameters fall under a covered hypothesis: convexity of the
/// kernel on the relevant domain (second derivative positive on a
/// 1000-point grid), solver signature within 1e-6 of equal spacing, and
/// equal spacing never beating the solver by more than 1e-10.
pub fn circle_optimality_check(
    space: &Arc<Space>,
    n: usize,
    params: KernelParams,
    opts: &SolveOptions,
) -> Result<CircleOptimalityReport> {
    let (alpha, kind) = match &**space {
        Space::Circle { alpha, kind } => (*alpha, *kind),
        other => {
            return Err(Error::InvalidArgument(format!(
                "circle optimality check needs a circle, got {}",
                other.id()
            )))
        }
    };
    let hypothesis = match_circle_hypothesis(kind, alpha, params).ok_or_else(|| {
        Error::HypothesisNotCovered(format!(
            "{} with s = {}, t = {} matches no covered hypothesis",
            space.id(),
            params.s(),
            params.t()
        ))
    })?;

    const GRID: usize = 1000;
    let mut k2_positive = true;
    for i in 0..GRID {
        let frac = (i as f64 + 0.5) / GRID as f64;
        let value = match hypothesis {
            CircleHypothesis::GeodesicLogPower => {
                k2_geodesic(params, frac * std::f64::consts::PI * alpha)?
            }
            CircleHypothesis::GeodesicSmallRadius => {
                k2_geodesic(params, frac / std::f64::consts::E)?
            }
            CircleHypothesis::ChordLogPower => {
                k2_chord(params, alpha, frac * std::f64::consts::FRAC_PI_2)?
            }
        };
        if !(value > 0.0) {
            k2_positive = false;
            break;
        }
    }

    let res = minimize_energy(space, n, params, opts)?;
    let eq = equally_spaced(space, n, 0.0)?;
    let energy_equal = energy(&eq, params)?;
    let gap = config_distance(&res.config.signature(), &eq.signature())?;
    let energy_ok = energy_equal.linear <= res.energy.linear + 1e-10;
    Ok(CircleOptimalityReport {
        hypothesis,
        pass: gap <= 1e-6 && k2_positive && energy_ok,
        max_signature_gap: gap,
        k2_positive,
        energy_equal,
        energy_solver: res.energy,
        starts_agreeing: res.starts_agreeing,
    })
}

//! Minimal discrete energies for power-log kernels on compact metric spaces
//! of diameter below one.
//!
//! The kernel is `K(x, y) = d(x,y)^-s * log(1/d(x,y))^t` for `s, t >= 0`,
//! extended by `+inf` on the diagonal (and identically 1 when `s = t = 0`).
//! Because every distance is below 1, the log factor is positive and the
//! kernel is strictly decreasing in the distance.
//!
//! The crate computes, for a space `A` and `N` points:
//!
//! * `g(s) = min over N-point configurations of sum over ordered pairs of K`
//!   via multi-start projected gradient descent in the log domain
//!   ([`minimize_energy`]), or exhaustively on finite spaces
//!   ([`grid_minimize`]).
//! * Best packings (maximal separation) via a large-`s` energy homotopy
//!   ([`best_packing`]) or exhaustively ([`grid_pack`]).
//! * Analysis artifacts: `g` sweeps with the companion `log^(t+1)` energy,
//!   one-sided difference quotients of `g`, the `s -> inf` limit
//!   `g(s)^(1/s) -> 1/delta_N` with computable two-sided bounds, minimizer
//!   clustering along `s`-schedules, and optimality checks for equally
//!   spaced points on circles ([`analysis`]).
//! * Self-verification suites that re-derive the library's claims
//!   numerically ([`verify`]).
//!
//! Spaces are segments, circles (geodesic or chord metric), origin-centered
//! Euclidean spheres, and explicit finite metric spaces; all constructors
//! reject diameters of 1 or more, which keeps the kernel positive and the
//! log factor real. Solvers are deterministic for a fixed seed, including
//! under `--threads`-style parallelism.

pub mod analysis;
pub mod config;
pub mod energy;
pub mod error;
pub mod kernel;
pub mod optimizer;
pub mod oracle;
pub mod space;
pub mod verify;

pub use analysis::{
    circle_optimality_check, cluster_probe, derivative_probe, infinity_limit_probe,
    match_circle_hypothesis, sweep_g, CircleHypothesis, CircleOptimalityReport, ClusterTrace,
    LimitRecord, LimitTable, ProbeReport, SweepRecord,
};
pub use config::{
    config_distance, config_distance_matched, equally_spaced, Configuration, ConfigurationDoc,
    Signature,
};
pub use energy::{energy, lower_bound, sandwich_check, EnergyValue, SandwichReport};
pub use error::{Error, Result};
pub use kernel::{
    h_eval, k2_chord, k2_geodesic, kernel_derivative, kernel_eval, log_kernel_eval, p_eval,
    KernelParams,
};
pub use optimizer::{
    best_packing, minimize_energy, minimize_energy_warm, PackingResult, SolveOptions,
    SolveResult,
};
pub use oracle::{
    binomial, grid_epsilon, grid_minimize, grid_pack, kernel_lipschitz, GridBudget,
    OracleMinimum, OraclePacking,
};
pub use space::{FiniteSpace, MetricKind, Space, SpaceSpec};
pub use verify::{run_suite, Check, Suite, SuiteReport};

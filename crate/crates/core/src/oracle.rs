//! Exhaustive reference solvers on finite spaces.
//!
//! These enumerate every n-subset of the grid, so they are slow but carry no
//! solver uncertainty: continuous results are checked against them through
//! the `grid_epsilon` discretization bound.
//!
//! Tie handling: objective values within `TIE_REL` relative count as equal.
//! Symmetric grids (rotations of a circle lattice) produce mathematically
//! tied subsets whose floating-point energies differ by a few ulps; without
//! the tolerance the reported index set would be arithmetic dust instead of
//! the lexicographically smallest tied subset.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::Configuration;
use crate::energy::{energy, EnergyValue};
use crate::error::{Error, Result};
use crate::kernel::{kernel_derivative, kernel_eval, KernelParams};
use crate::space::{FiniteSpace, Space};

/// Relative tolerance under which two objective values count as tied.
pub const TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct GridBudget {
    /// Cap on C(m, n), the number of subsets an exhaustive call may visit.
    pub max_combinations: u128,
}

impl Default for GridBudget {
    fn default() -> Self {
        Self {
            max_combinations: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleMinimum {
    /// Grid indices of the minimizer, ascending; ties (within `TIE_REL`
    /// relative) resolve to the lexicographically smallest index set.
    pub indices: Vec<usize>,
    pub config: Configuration,
    pub energy: EnergyValue,
}

#[derive(Debug, Clone)]
pub struct OraclePacking {
    pub indices: Vec<usize>,
    pub config: Configuration,
    pub delta: f64,
}

pub fn binomial(m: usize, n: usize) -> Option<u128> {
    if n > m {
        return Some(0);
    }
    let n = n.min(m - n);
    let mut acc: u128 = 1;
    for k in 0..n {
        acc = acc.checked_mul((m - k) as u128)?;
        acc /= (k + 1) as u128;
    }
    Some(acc)
}

fn require_finite<'a>(space: &'a Space, what: &str) -> Result<&'a FiniteSpace> {
    match space {
        Space::Finite(f) => Ok(f),
        _ => Err(Error::InvalidArgument(format!(
            "{what} runs on finite spaces; discretize the space first"
        ))),
    }
}

fn check_budget(m: usize, n: usize, budget: &GridBudget) -> Result<()> {
    if n > m {
        return Err(Error::InvalidArgument(format!(
            "cannot choose {n} distinct grid points out of {m}"
        )));
    }
    let combinations = binomial(m, n).unwrap_or(u128::MAX);
    if combinations > budget.max_combinations {
        return Err(Error::BudgetExceeded {
            m,
            n,
            combinations,
            budget: budget.max_combinations,
        });
    }
    Ok(())
}

/// Monotone shared minimum over nonnegative f64 values (bit order matches
/// numeric order for nonnegative floats).
struct SharedMin(AtomicU64);

impl SharedMin {
    fn new() -> Self {
        Self(AtomicU64::new(f64::INFINITY.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(Ordering::Relaxed))
    }

    fn update(&self, v: f64) {
        self.0.fetch_min(v.to_bits(), Ordering::Relaxed);
    }
}

struct MinSearch<'a> {
    k: &'a [f64],
    m: usize,
    n: usize,
    k_min: f64,
    total_pairs: f64,
    shared: &'a SharedMin,
}

impl MinSearch<'_> {
    /// Depth-first lexicographic enumeration. `partial` is the single-count
    /// pair sum of `chosen`; a subset replaces the incumbent only when it
    /// beats it beyond `TIE_REL`, so the first subset of a near-tied family
    /// (the lexicographically smallest) is the one kept.
    fn run(
        &self,
        chosen: &mut Vec<usize>,
        partial: f64,
        best: &mut f64,
        best_idx: &mut Option<Vec<usize>>,
    ) {
        if chosen.len() == self.n {
            self.shared.update(partial);
            if partial < *best * (1.0 - TIE_REL) {
                *best = partial;
                *best_idx = Some(chosen.clone());
            }
            return;
        }
        let depth = chosen.len();
        let from = chosen.last().map_or(0, |&c| c + 1);
        let chosen_pairs = (depth * (depth + 1) / 2) as f64;
        for c in from..=(self.m - (self.n - depth)) {
            let mut add = 0.0;
            for &q in chosen.iter() {
                add += self.k[q * self.m + c];
            }
            let new_partial = partial + add;
            // Unfixed pairs each contribute at least k_min; prune with the
            // tie slack so near-tied subsets stay reachable.
            let bound = new_partial + (self.total_pairs - chosen_pairs) * self.k_min;
            let limit = best.min(self.shared.get());
            if bound > limit * (1.0 + TIE_REL) {
                continue;
            }
            chosen.push(c);
            self.run(chosen, new_partial, best, best_idx);
            chosen.pop();
        }
    }
}

/// Exhaustive minimal energy over all n-subsets of a finite space.
pub fn grid_minimize(
    space: &Arc<Space>,
    n: usize,
    params: KernelParams,
    budget: &GridBudget,
) -> Result<OracleMinimum> {
    let fin = require_finite(space, "grid_minimize")?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a configuration needs at least 2 points, got {n}"
        )));
    }
    let m = fin.size();
    check_budget(m, n, budget)?;

    let mut k = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                k[i * m + j] = kernel_eval(params, fin.dist_idx(i, j))?;
            }
        }
    }
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!(
            "kernel overflows in linear arithmetic on this grid (s = {}, t = {}); \
             the exhaustive oracle needs finite pair energies",
            params.s(),
            params.t()
        )));
    }
    let mut k_min = f64::INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            k_min = k_min.min(k[i * m + j]);
        }
    }
    let total_pairs = (n * (n - 1) / 2) as f64;
    let shared = SharedMin::new();

    // Parallel over the leading index; each branch is a sequential
    // lexicographic search sharing the incumbent for pruning only.
    let branch_best: Vec<(f64, Option<Vec<usize>>)> = (0..=(m - n))
        .into_par_iter()
        .map(|i0| {
            let search = MinSearch {
                k: &k,
                m,
                n,
                k_min,
                total_pairs,
                shared: &shared,
            };
            let mut chosen = vec![i0];
            let mut best = f64::INFINITY;
            let mut best_idx = None;
            search.run(&mut chosen, 0.0, &mut best, &mut best_idx);
            (best, best_idx)
        })
        .collect();

    let global = branch_best
        .iter()
        .filter(|(_, idx)| idx.is_some())
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    // First branch (lowest leading index) within the tie tolerance of the
    // global minimum: the lexicographically smallest near-tied subset.
    let mut best_idx: Option<Vec<usize>> = None;
    for (v, idx) in branch_best {
        if idx.is_some() && v <= global * (1.0 + TIE_REL) {
            best_idx = idx;
            break;
        }
    }
    let indices = best_idx
        .ok_or_else(|| Error::SolverFailure("grid enumeration found no subset".to_string()))?;
    let points: Vec<Vec<f64>> = indices.iter().map(|&i| vec![i as f64]).collect();
    let config = Configuration::new(Arc::clone(space), points)?;
    let energy = energy(&config, params)?;
    Ok(OracleMinimum {
        indices,
        config,
        energy,
    })
}

struct PackSearch<'a> {
    fin: &'a FiniteSpace,
    m: usize,
    n: usize,
}

impl PackSearch<'_> {
    fn run(&self, chosen: &mut Vec<usize>, best: &mut f64, best_idx: &mut Option<Vec<usize>>) {
        if chosen.len() == self.n {
            let mut delta = f64::INFINITY;
            for a in 0..self.n {
                for b in (a + 1)..self.n {
                    delta = delta.min(self.fin.dist_idx(chosen[a], chosen[b]));
                }
            }
            // Against the unrecorded greedy seed any strict gain counts;
            // a recorded subset is only displaced beyond the tie tolerance,
            // keeping the lexicographically smallest near-tied subset.
            let threshold = if best_idx.is_some() {
                *best * (1.0 + TIE_REL)
            } else {
                *best
            };
            if delta > threshold {
                *best = delta;
                *best_idx = Some(chosen.clone());
            }
            return;
        }
        let depth = chosen.len();
        let from = chosen.last().map_or(0, |&c| c + 1);
        for c in from..=(self.m - (self.n - depth)) {
            // Candidates already within `best` of a chosen point cannot
            // improve the packing; skipping them never skips the first
            // subset that attains a strictly better separation.
            let mut ok = true;
            for &q in chosen.iter() {
                if self.fin.dist_idx(q, c) <= *best {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            chosen.push(c);
            self.run(chosen, best, best_idx);
            chosen.pop();
        }
    }
}

/// Exhaustive best packing over all n-subsets of a finite space; ties
/// resolve to the lexicographically smallest index set.
pub fn grid_pack(space: &Arc<Space>, n: usize, budget: &GridBudget) -> Result<OraclePacking> {
    let fin = require_finite(space, "grid_pack")?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a packing needs at least 2 points, got {n}"
        )));
    }
    let m = fin.size();
    check_budget(m, n, budget)?;

    // Seed the incumbent with a greedy maximin sweep so pruning bites from
    // the start; the relative slack keeps subsets tying the seed reachable,
    // and lexicographic enumeration then returns the lexicographically
    // smallest optimum.
    let seed_delta = greedy_pack_delta(fin, n);
    let mut best = (seed_delta * (1.0 - TIE_REL)).max(0.0);
    let mut best_idx: Option<Vec<usize>> = None;
    let search = PackSearch { fin, m, n };
    let mut chosen = Vec::with_capacity(n);
    search.run(&mut chosen, &mut best, &mut best_idx);
    let indices = best_idx.ok_or_else(|| {
        Error::SolverFailure("packing enumeration found no subset".to_string())
    })?;
    let points: Vec<Vec<f64>> = indices.iter().map(|&i| vec![i as f64]).collect();
    let config = Configuration::new(Arc::clone(space), points)?;
    let delta = config.separation();
    Ok(OraclePacking {
        indices,
        config,
        delta,
    })
}

/// Farthest-point greedy packing; a lower bound used only to seed pruning.
fn greedy_pack_delta(fin: &FiniteSpace, n: usize) -> f64 {
    let m = fin.size();
    let mut best = 0.0_f64;
    for first in 0..m.min(8) {
        let mut chosen = vec![first];
        while chosen.len() < n {
            let mut cand = usize::MAX;
            let mut cand_d = -1.0;
            for c in 0..m {
                if chosen.contains(&c) {
                    continue;
                }
                let d = chosen
                    .iter()
                    .map(|&q| fin.dist_idx(q, c))
                    .fold(f64::INFINITY, f64::min);
                if d > cand_d {
                    cand_d = d;
                    cand = c;
                }
            }
            if cand == usize::MAX {
                break;
            }
            chosen.push(cand);
        }
        if chosen.len() == n {
            let mut delta = f64::INFINITY;
            for a in 0..n {
                for b in (a + 1)..n {
                    delta = delta.min(fin.dist_idx(chosen[a], chosen[b]));
                }
            }
            best = best.max(delta);
        }
    }
    best
}

/// Upper bound on |k'| over `[lo, hi]`: dense-grid maximum with a 5% safety
/// factor (|k'| is monotone on each side of its single interior extremum,
/// so a 4097-point grid brackets it well within 5%).
pub fn kernel_lipschitz(params: KernelParams, lo: f64, hi: f64) -> Result<f64> {
    if !(lo > 0.0) || !(hi < 1.0) || lo > hi {
        return Err(Error::Domain(format!(
            "Lipschitz range must satisfy 0 < lo <= hi < 1, got [{lo}, {hi}]"
        )));
    }
    let grid = 4096;
    let mut max_abs = 0.0_f64;
    for i in 0..=grid {
        let x = lo + (hi - lo) * (i as f64) / (grid as f64);
        let d = kernel_derivative(params, x)?;
        max_abs = max_abs.max(d.abs());
    }
    Ok(max_abs * 1.05)
}

/// Rigorous bound on how far the grid minimum can sit above the continuous
/// one: snapping the continuous minimizer to the grid moves each pair
/// distance by at most `mesh`, and each of the N(N-1) ordered-pair kernel
/// terms by at most `L_k * mesh`.
pub fn grid_epsilon(
    space: &Space,
    n: usize,
    params: KernelParams,
    separation: f64,
) -> Result<f64> {
    let fin = require_finite(space, "grid_epsilon")?;
    let mesh = fin.mesh().ok_or_else(|| {
        Error::InvalidArgument(
            "grid_epsilon needs a finite space with a mesh bound; use discretize".to_string(),
        )
    })?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a configuration needs at least 2 points, got {n}"
        )));
    }
    if !(separation > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "separation must be positive, got {separation}"
        )));
    }
    if params.s() == 0.0 && params.t() == 0.0 {
        return Ok(0.0);
    }
    let lo = (separation / 2.0).min(space.diameter());
    let l_k = kernel_lipschitz(params, lo, space.diameter())?;
    Ok((n * (n - 1)) as f64 * l_k * mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricKind;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grid_segment(m: usize) -> Arc<Space> {
        Arc::new(Space::segment(0.0, 0.9).unwrap().discretize(m).unwrap())
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 3), Some(120));
        assert_eq!(binomial(720, 4), Some(11_104_365_420));
        assert_eq!(binomial(5, 7), Some(0));
        assert_eq!(binomial(60, 30).unwrap(), 118_264_581_564_861_424);
    }

    #[test]
    fn minimize_two_points_takes_the_endpoints() {
        let space = grid_segment(10);
        let res = grid_minimize(&space, 2, KernelParams::new(1.0, 0.0).unwrap(), &GridBudget::default())
            .unwrap();
        assert_eq!(res.indices, vec![0, 9]);
        assert_relative_eq!(res.energy.linear, 2.0 / 0.9, max_relative = 1e-12);
    }

    #[test]
    fn minimize_three_points_on_ten_point_grid() {
        // Exhaustive minimum over {0, 0.1, ..., 0.9} is attained by
        // {0, 0.4, 0.9} and {0, 0.5, 0.9}, tying at 2(1/0.4 + 1/0.5 + 1/0.9);
        // the tie resolves to the lexicographically smaller {0, 4, 9}.
        let space = grid_segment(10);
        let res = grid_minimize(&space, 3, KernelParams::new(1.0, 0.0).unwrap(), &GridBudget::default())
            .unwrap();
        let expect = 2.0 * (1.0 / 0.4 + 1.0 / 0.5 + 1.0 / 0.9);
        assert_relative_eq!(res.energy.linear, expect, max_relative = 1e-12);
        assert_eq!(res.indices, vec![0, 4, 9]);
    }

    #[test]
    fn minimize_on_circle_grid_is_equally_spaced() {
        let space = Arc::new(
            Space::circle(0.1, MetricKind::Geodesic)
                .unwrap()
                .discretize(60)
                .unwrap(),
        );
        let res = grid_minimize(&space, 3, KernelParams::new(1.0, 0.0).unwrap(), &GridBudget::default())
            .unwrap();
        assert_eq!(res.indices, vec![0, 20, 40]);
        assert_relative_eq!(res.energy.linear, 90.0 / PI, max_relative = 1e-12);
    }

    #[test]
    fn minimize_matches_brute_reference_with_log_t() {
        // Independent O(m^3) triple loop as a cross-check.
        let space = grid_segment(12);
        let fin = match &*space {
            Space::Finite(f) => f,
            _ => unreachable!(),
        };
        let params = KernelParams::new(2.0, 1.0).unwrap();
        let mut best = f64::INFINITY;
        for a in 0..12 {
            for b in (a + 1)..12 {
                for c in (b + 1)..12 {
                    let e = 2.0
                        * (kernel_eval(params, fin.dist_idx(a, b)).unwrap()
                            + kernel_eval(params, fin.dist_idx(a, c)).unwrap()
                            + kernel_eval(params, fin.dist_idx(b, c)).unwrap());
                    best = best.min(e);
                }
            }
        }
        let res = grid_minimize(&space, 3, params, &GridBudget::default()).unwrap();
        assert_relative_eq!(res.energy.linear, best, max_relative = 1e-12);
    }

    #[test]
    fn budget_is_enforced_and_reported() {
        let space = grid_segment(100);
        let budget = GridBudget {
            max_combinations: 1000,
        };
        let err = grid_minimize(&space, 4, KernelParams::new(1.0, 0.0).unwrap(), &budget)
            .unwrap_err();
        match err {
            Error::BudgetExceeded {
                m,
                n,
                combinations,
                budget,
            } => {
                assert_eq!((m, n), (100, 4));
                assert_eq!(combinations, 3_921_225);
                assert_eq!(budget, 1000);
            }
            other => panic!("expected BudgetExceeded, got {other}"),
        }
    }

    #[test]
    fn too_many_points_is_an_error() {
        let space = grid_segment(10);
        let err = grid_pack(&space, 11, &GridBudget::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)), "{err}");
        let err = grid_minimize(&space, 11, KernelParams::new(1.0, 0.0).unwrap(), &GridBudget::default())
            .unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)), "{err}");
    }

    #[test]
    fn continuous_only_spaces_are_rejected() {
        let space = Arc::new(Space::segment(0.0, 0.9).unwrap());
        assert!(grid_minimize(&space, 2, KernelParams::new(1.0, 0.0).unwrap(), &GridBudget::default()).is_err());
        assert!(grid_pack(&space, 2, &GridBudget::default()).is_err());
    }

    #[test]
    fn pack_four_points_on_segment_grid() {
        let space = grid_segment(10);
        let res = grid_pack(&space, 4, &GridBudget::default()).unwrap();
        assert_relative_eq!(res.delta, 0.3, max_relative = 1e-12);
        assert_eq!(res.indices, vec![0, 3, 6, 9]);
    }

    #[test]
    fn pack_twelve_points_on_circle_grid() {
        let space = Arc::new(
            Space::circle(0.1, MetricKind::Geodesic)
                .unwrap()
                .discretize(60)
                .unwrap(),
        );
        // C(60, 12) is about 1.4e12; the maximin search prunes almost all of
        // it, but the upfront budget check still needs headroom.
        let budget = GridBudget {
            max_combinations: 10_000_000_000_000,
        };
        let res = grid_pack(&space, 12, &budget).unwrap();
        assert_relative_eq!(res.delta, 2.0 * PI * 0.1 / 12.0, max_relative = 1e-12);
        assert_eq!(res.indices, (0..12).map(|k| 5 * k).collect::<Vec<_>>());
    }

    #[test]
    fn pack_tie_resolves_lexicographically() {
        // Grid {0, 0.1, ..., 0.9}, n = 3: separations 0.4 are attained by
        // {0,4,8}, {0,4,9}, {0,5,9}, {1,5,9}; the smallest index set wins.
        let space = grid_segment(10);
        let res = grid_pack(&space, 3, &GridBudget::default()).unwrap();
        assert_relative_eq!(res.delta, 0.4, max_relative = 1e-12);
        assert_eq!(res.indices, vec![0, 4, 8]);
    }

    #[test]
    fn minimize_is_invariant_under_grid_relabeling() {
        // Reverse the grid order; the minimum value must not change.
        let m = 10;
        let step = 0.1;
        let dist: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| ((i as f64) - (j as f64)).abs() * step)
                    .collect()
            })
            .collect();
        let rev: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| dist[m - 1 - i][m - 1 - j])
                    .collect()
            })
            .collect();
        let params = KernelParams::new(1.0, 0.0).unwrap();
        let a = Arc::new(Space::finite_labeled(dist, "fwd".to_string()).unwrap());
        let b = Arc::new(Space::finite_labeled(rev, "rev".to_string()).unwrap());
        let ra = grid_minimize(&a, 3, params, &GridBudget::default()).unwrap();
        let rb = grid_minimize(&b, 3, params, &GridBudget::default()).unwrap();
        assert_relative_eq!(ra.energy.linear, rb.energy.linear, max_relative = 1e-12);
    }

    #[test]
    fn epsilon_bound_is_positive_and_scales_with_mesh() {
        let params = KernelParams::new(2.0, 1.0).unwrap();
        let coarse = grid_segment(10);
        let fine = grid_segment(100);
        let e_coarse = grid_epsilon(&coarse, 3, params, 0.4).unwrap();
        let e_fine = grid_epsilon(&fine, 3, params, 0.4).unwrap();
        assert!(e_coarse > 0.0);
        assert!(e_fine < e_coarse / 5.0, "{e_fine} vs {e_coarse}");
        // Trivial kernel is constant, so the bound collapses.
        let trivial = KernelParams::new(0.0, 0.0).unwrap();
        assert_eq!(grid_epsilon(&coarse, 3, trivial, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_dominates_sampled_slopes() {
        let params = KernelParams::new(1.5, 2.0).unwrap();
        let l = kernel_lipschitz(params, 0.2, 0.9).unwrap();
        for i in 0..500 {
            let x = 0.2 + 0.7 * (i as f64) / 499.0;
            let d = kernel_derivative(params, x).unwrap();
            assert!(d.abs() <= l);
        }
    }
}

//! Energy functionals over ordered pairs, in both linear (compensated
//! summation) and log (log-sum-exp) domains, the universal lower bound, and
//! the difference-quotient sandwich inequality.

use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::kernel::{kernel_eval, log_kernel_unchecked, KernelParams};
use crate::space::Space;

/// Threshold above which linear energies are reported as +inf; the log field
/// stays meaningful far beyond it.
const LINEAR_OVERFLOW: f64 = 1e300;

/// An energy in both representations. `linear` is an extended real >= 0;
/// `log` is its natural logarithm, valid even when `linear` overflowed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyValue {
    #[serde(with = "extended_real")]
    pub linear: f64,
    #[serde(with = "extended_real")]
    pub log: f64,
    pub finite: bool,
}

/// JSON has no literal for infinities, so non-finite values travel as the
/// strings "inf" / "-inf" / "nan" and come back intact.
mod extended_real {
    use serde::de::{self, Deserializer, Unexpected};
    use serde::ser::Serializer;
    use serde::Deserialize;

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else if v.is_nan() {
            ser.serialize_str("nan")
        } else if *v > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::invalid_value(
                    Unexpected::Str(other),
                    &"a number or one of \"inf\", \"-inf\", \"nan\"",
                )),
            },
        }
    }
}

/// Compensated (Kahan) accumulator that saturates cleanly at +inf.
#[derive(Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        if self.sum.is_infinite() {
            return;
        }
        if v.is_infinite() {
            self.sum = f64::INFINITY;
            self.c = 0.0;
            return;
        }
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
        if !self.sum.is_finite() {
            self.sum = f64::INFINITY;
            self.c = 0.0;
        }
    }

    fn sum(&self) -> f64 {
        self.sum
    }
}

/// Stable log of a sum of exponentials. Empty input yields -inf.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + sum.ln()
}

/// Energy of a configuration: the kernel summed over ordered pairs (twice the
/// unordered-pair sum). +inf iff two points coincide and the kernel is
/// nontrivial.
pub fn energy(config: &Configuration, params: KernelParams) -> Result<EnergyValue> {
    let pts = config.points();
    let space = config.space();
    let n = pts.len();
    let mut kahan = Kahan::default();
    let mut logs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.distance(&pts[i], &pts[j]);
            kahan.add(kernel_eval(params, d)?);
            logs.push(log_kernel_unchecked(params, d));
        }
    }
    let log = std::f64::consts::LN_2 + log_sum_exp(&logs);
    let raw = 2.0 * kahan.sum();
    let finite = raw.is_finite() && raw <= LINEAR_OVERFLOW;
    Ok(EnergyValue {
        linear: if finite { raw } else { f64::INFINITY },
        log,
        finite,
    })
}

/// Universal bound `N(N-1) * k(diam)`: no N-point configuration can have a
/// smaller energy, because the kernel is smallest at the diameter.
pub fn lower_bound(space: &Space, n: usize, params: KernelParams) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "lower bound needs at least 2 points, got {n}"
        )));
    }
    let k = kernel_eval(params, space.diameter())?;
    Ok((n * (n - 1)) as f64 * k)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SandwichReport {
    /// E^r with log power t+1.
    pub lhs: f64,
    /// Difference quotient (E^s - E^r) / (s - r) at log power t.
    pub mid: f64,
    /// E^s with log power t+1.
    pub rhs: f64,
    pub holds: bool,
}

/// Difference-quotient sandwich on a fixed configuration:
/// `E^r_{log^{t+1}} <= (E^s_{log^t} - E^r_{log^t})/(s-r) <= E^s_{log^{t+1}}`
/// for `s > r >= 0`, checked with relative tolerance 1e-10 against the larger
/// side.
pub fn sandwich_check(config: &Configuration, r: f64, s: f64, t: f64) -> Result<SandwichReport> {
    if !(r >= 0.0) || !(s > r) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sandwich requires s > r >= 0, got r={r}, s={s}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sandwich requires finite t >= 0, got {t}"
        )));
    }
    if config.separation() == 0.0 {
        return Err(Error::InvalidConfiguration(
            "coincident points make the difference quotient undefined".to_string(),
        ));
    }
    let e = |ss: f64, tt: f64| -> Result<f64> {
        let v = energy(config, KernelParams::new(ss, tt)?)?;
        if !v.finite {
            return Err(Error::Domain(format!(
                "energy overflowed in sandwich check at s={ss}, t={tt}"
            )));
        }
        Ok(v.linear)
    };
    let lhs = e(r, t + 1.0)?;
    let rhs = e(s, t + 1.0)?;
    let mid = (e(s, t)? - e(r, t)?) / (s - r);
    let tol = 1e-10 * lhs.abs().max(mid.abs()).max(rhs.abs()).max(1.0);
    let holds = lhs <= mid + tol && mid <= rhs + tol;
    Ok(SandwichReport {
        lhs,
        mid,
        rhs,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::equally_spaced;
    use crate::space::MetricKind;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn params(s: f64, t: f64) -> KernelParams {
        KernelParams::new(s, t).unwrap()
    }

    fn pair_at(d: f64) -> Configuration {
        let space = Arc::new(Space::segment(0.0, 0.9).unwrap());
        Configuration::new(space, vec![vec![0.0], vec![d]]).unwrap()
    }

    #[test]
    fn energy_frozen_values() {
        // Two ordered pairs at distance 0.5 with k = 1/d.
        let e = energy(&pair_at(0.5), params(1.0, 0.0)).unwrap();
        assert_relative_eq!(e.linear, 4.0, max_relative = 1e-14);
        assert_relative_eq!(e.log, 4.0f64.ln(), max_relative = 1e-13);
        assert!(e.finite);

        // s = t = 0 gives exactly N(N-1).
        let space = Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap());
        let eq5 = equally_spaced(&space, 5, 0.0).unwrap();
        let e = energy(&eq5, params(0.0, 0.0)).unwrap();
        assert_eq!(e.linear, 20.0);

        // Equally spaced N=3 on the geodesic circle alpha=0.1 at s=1:
        // six ordered pairs at distance 2*pi*0.1/3, energy 90/pi.
        let eq3 = equally_spaced(&space, 3, 0.0).unwrap();
        let e = energy(&eq3, params(1.0, 0.0)).unwrap();
        assert_relative_eq!(e.linear, 90.0 / PI, max_relative = 1e-12);
    }

    #[test]
    fn energy_coincident_points() {
        let space = Arc::new(Space::segment(0.0, 0.9).unwrap());
        let dup =
            Configuration::new(space, vec![vec![0.2], vec![0.2], vec![0.7]]).unwrap();
        let e = energy(&dup, params(1.0, 0.0)).unwrap();
        assert!(e.linear.is_infinite());
        assert!(e.log.is_infinite());
        assert!(!e.finite);
        // Trivial kernel stays finite even with coincident points.
        let e = energy(&dup, params(0.0, 0.0)).unwrap();
        assert_eq!(e.linear, 6.0);
    }

    #[test]
    fn energy_log_survives_linear_overflow() {
        let e = energy(&pair_at(0.5), params(1100.0, 0.0)).unwrap();
        assert!(e.linear.is_infinite());
        assert!(!e.finite);
        // ln(2 * 2^1100) = 1101 ln 2.
        assert_relative_eq!(
            e.log,
            1101.0 * std::f64::consts::LN_2,
            max_relative = 1e-13
        );
    }

    #[test]
    fn log_linear_consistency_random() {
        let space = Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..300 {
            let mut pts = Vec::new();
            for _ in 0..4 {
                let mut p = vec![0.0];
                space.sample_point(&mut rng, &mut p);
                pts.push(p);
            }
            let cfg = Configuration::new(Arc::clone(&space), pts).unwrap();
            let s = (trial % 5) as f64;
            let t = (trial % 3) as f64;
            let e = energy(&cfg, params(s, t)).unwrap();
            if e.finite && e.linear > 0.0 {
                assert_relative_eq!(e.log, e.linear.ln(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn lower_bound_frozen_values() {
        let half = Space::segment(0.0, 0.5).unwrap();
        assert_relative_eq!(
            lower_bound(&half, 3, params(1.0, 0.0)).unwrap(),
            12.0,
            max_relative = 1e-14
        );
        let seg = Space::segment(0.0, 0.9).unwrap();
        let expect = 6.0 * (1.0 / 0.9) * (1.0f64 / 0.9).ln();
        assert_relative_eq!(
            lower_bound(&seg, 3, params(1.0, 1.0)).unwrap(),
            expect,
            max_relative = 1e-12
        );
        assert_eq!(lower_bound(&seg, 2, params(0.0, 0.0)).unwrap(), 2.0);
        assert!(lower_bound(&seg, 1, params(1.0, 0.0)).is_err());
    }

    #[test]
    fn lower_bound_holds_on_random_configs() {
        let spaces: Vec<Arc<Space>> = vec![
            Arc::new(Space::segment(0.0, 0.9).unwrap()),
            Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap()),
            Arc::new(Space::circle(0.3, MetricKind::Chord).unwrap()),
            Arc::new(Space::sphere(0.3).unwrap()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for space in &spaces {
            for trial in 0..1000 {
                let n = 2 + (trial % 5);
                let mut pts = Vec::new();
                for _ in 0..n {
                    let mut p = vec![0.0; space.param_len()];
                    space.sample_point(&mut rng, &mut p);
                    pts.push(p);
                }
                let cfg = Configuration::new(Arc::clone(space), pts).unwrap();
                let s = (trial % 7) as f64 * 0.5;
                let t = (trial % 4) as f64 * 0.5;
                let pr = params(s, t);
                let e = energy(&cfg, pr).unwrap();
                let lb = lower_bound(space, n, pr).unwrap();
                assert!(
                    e.linear >= lb - 1e-12 * lb.abs(),
                    "{}: energy {} below bound {lb}",
                    space.id(),
                    e.linear
                );
            }
        }
    }

    #[test]
    fn monotone_scaled_energies() {
        // diam^s * E^s nondecreasing in s, separation^s * E^s nonincreasing.
        let space = Arc::new(Space::segment(0.0, 0.9).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let mut pts = Vec::new();
            for _ in 0..4 {
                let mut p = vec![0.0];
                space.sample_point(&mut rng, &mut p);
                pts.push(p);
            }
            let cfg = Configuration::new(Arc::clone(&space), pts).unwrap();
            if cfg.separation() < 1e-6 {
                continue;
            }
            let diam = space.diameter();
            let sep = cfg.separation();
            let t = 1.0;
            let mut prev_up = f64::NEG_INFINITY;
            let mut prev_down = f64::INFINITY;
            for k in 0..8 {
                let s = k as f64 * 0.5;
                let e = energy(&cfg, params(s, t)).unwrap().linear;
                let up = diam.powf(s) * e;
                let down = sep.powf(s) * e;
                assert!(up >= prev_up - 1e-9 * up.abs(), "diam-scaled dropped");
                assert!(down <= prev_down + 1e-9 * down.abs(), "sep-scaled rose");
                prev_up = up;
                prev_down = down;
            }
        }
    }

    #[test]
    fn sandwich_frozen_example() {
        let rep = sandwich_check(&pair_at(0.5), 1.0, 2.0, 0.0).unwrap();
        // lhs = 2 * 2 * ln 2, mid = (8 - 4) / 1, rhs = 2 * 4 * ln 2.
        assert_relative_eq!(rep.lhs, 4.0 * std::f64::consts::LN_2, max_relative = 1e-12);
        assert_relative_eq!(rep.mid, 4.0, max_relative = 1e-12);
        assert_relative_eq!(rep.rhs, 8.0 * std::f64::consts::LN_2, max_relative = 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn sandwich_taylor_limit() {
        // As s - r -> 0 the quotient approaches E^s_{log^{t+1}} to O(s-r),
        // with the curvature scale E^s_{log^{t+2}}.
        let cfg = pair_at(0.5);
        let (r, t) = (1.0, 0.5);
        let eps = 1e-6;
        let rep = sandwich_check(&cfg, r, r + eps, t).unwrap();
        assert!(rep.holds);
        let curvature = energy(&cfg, params(r + eps, t + 2.0)).unwrap().linear;
        assert!(
            (rep.mid - rep.rhs).abs() <= eps * curvature * 1.01 + 1e-9,
            "quotient {} vs rhs {} exceeds O(eps) bound",
            rep.mid,
            rep.rhs
        );
    }

    #[test]
    fn sandwich_rejects_bad_input() {
        let cfg = pair_at(0.5);
        assert!(sandwich_check(&cfg, 1.0, 1.0, 0.0).is_err());
        assert!(sandwich_check(&cfg, -0.5, 1.0, 0.0).is_err());
        assert!(sandwich_check(&cfg, 0.0, 1.0, -1.0).is_err());
        let space = Arc::new(Space::segment(0.0, 0.9).unwrap());
        let dup = Configuration::new(space, vec![vec![0.1], vec![0.1]]).unwrap();
        assert!(sandwich_check(&dup, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sandwich_random_trials() {
        let spaces: Vec<Arc<Space>> = vec![
            Arc::new(Space::segment(0.0, 0.9).unwrap()),
            Arc::new(Space::circle(0.1, MetricKind::Geodesic).unwrap()),
            Arc::new(Space::sphere(0.3).unwrap()),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for space in &spaces {
            for trial in 0..1000 {
                let n = 2 + (trial % 4);
                let mut pts = Vec::new();
                for _ in 0..n {
                    let mut p = vec![0.0; space.param_len()];
                    space.sample_point(&mut rng, &mut p);
                    pts.push(p);
                }
                let cfg = Configuration::new(Arc::clone(space), pts).unwrap();
                if cfg.separation() < 1e-9 {
                    continue;
                }
                use rand::Rng;
                let r = rng.gen_range(0.0..2.0);
                let s = r + rng.gen_range(1e-3..2.0);
                let t = rng.gen_range(0.0..3.0);
                let rep = sandwich_check(&cfg, r, s, t).unwrap();
                assert!(
                    rep.holds,
                    "{}: sandwich failed lhs={} mid={} rhs={}",
                    space.id(),
                    rep.lhs,
                    rep.mid,
                    rep.rhs
                );
            }
        }
    }
}

//! The power-log kernel family `k(d) = d^{-s} (log(1/d))^t` on distances in
//! `[0, 1)`, together with the calculus facts the rest of the crate relies on:
//! monotonicity helpers, first derivatives for Lipschitz bounds, and the
//! second-derivative certificates used by the circle optimality checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent pair `(s, t)`, both finite and nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    s: f64,
    t: f64,
}

impl KernelParams {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !s.is_finite() || !t.is_finite() || s < 0.0 || t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "kernel exponents must be finite and nonnegative, got s={s}, t={t}"
            )));
        }
        Ok(Self { s, t })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// False only for `(s, t) = (0, 0)`, where the kernel degenerates to the
    /// constant 1.
    pub fn nontrivial(&self) -> bool {
        self.s != 0.0 || self.t != 0.0
    }

    /// Same `s`, log-power raised by one; the kernel whose energy is the
    /// s-derivative of this kernel's energy.
    pub fn bump_t(&self) -> Self {
        Self {
            s: self.s,
            t: self.t + 1.0,
        }
    }
}

fn check_closed_open_unit(d: f64) -> Result<()> {
    // NaN fails the first comparison.
    if !(d >= 0.0) || d >= 1.0 {
        return Err(Error::Domain(format!(
            "distance must lie in [0, 1), got {d}"
        )));
    }
    Ok(())
}

fn check_open_unit(x: f64, what: &str) -> Result<()> {
    if !(x > 0.0) || x >= 1.0 {
        return Err(Error::Domain(format!("{what} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

/// `x^{-s} (log(1/x))^t` for `x` in `(0, 1)`; factors with zero exponent are
/// skipped so they contribute exactly 1.
fn pow_log_product(s: f64, t: f64, x: f64) -> f64 {
    let l = -x.ln();
    let pow_part = if s == 0.0 { 1.0 } else { x.powf(-s) };
    let log_part = if t == 0.0 { 1.0 } else { l.powf(t) };
    pow_part * log_part
}

/// Kernel value `k(d)`; `+inf` at `d = 0` for nontrivial exponents, the
/// constant 1 when `s = t = 0`.
pub fn kernel_eval(params: KernelParams, d: f64) -> Result<f64> {
    check_closed_open_unit(d)?;
    if !params.nontrivial() {
        return Ok(1.0);
    }
    if d == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(pow_log_product(params.s, params.t, d))
}

/// `log k(d) = -s log d + t log(log(1/d))`; `+inf` at `d = 0` for nontrivial
/// exponents. Always finite on `(0, 1)`: `log(1/d)` stays strictly positive
/// for every representable `d` below one, so the outer log never blows up.
pub fn log_kernel_eval(params: KernelParams, d: f64) -> Result<f64> {
    check_closed_open_unit(d)?;
    Ok(log_kernel_unchecked(params, d))
}

/// Same as [`log_kernel_eval`] without the domain check; callers guarantee
/// `0 <= d < 1`.
pub(crate) fn log_kernel_unchecked(params: KernelParams, d: f64) -> f64 {
    if d == 0.0 {
        return if params.nontrivial() {
            f64::INFINITY
        } else {
            0.0
        };
    }
    let l = -d.ln();
    let mut v = 0.0;
    if params.s != 0.0 {
        v += params.s * l;
    }
    if params.t != 0.0 {
        v += params.t * l.ln();
    }
    v
}

/// d(log k)/dd = -(s + t/log(1/d)) / d; callers guarantee `0 < d < 1`.
pub(crate) fn log_kernel_ddist(params: KernelParams, d: f64) -> f64 {
    let l = -d.ln();
    let mut v = params.s;
    if params.t != 0.0 {
        v += params.t / l;
    }
    -v / d
}

/// `h(x) = x (log(1/x))^{-beta}`, strictly increasing on `(0, 1)` for every
/// `beta >= 0`.
pub fn h_eval(beta: f64, x: f64) -> Result<f64> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "h exponent must be finite and nonnegative, got {beta}"
        )));
    }
    check_open_unit(x, "h argument")?;
    if beta == 0.0 {
        return Ok(x);
    }
    let l = -x.ln();
    Ok(x * l.powf(-beta))
}

/// `p(x) = x^{-s} (log(1/x))^t`, strictly decreasing on `(0, 1)` for
/// nontrivial exponents; coincides with the kernel on the shared domain.
pub fn p_eval(params: KernelParams, x: f64) -> Result<f64> {
    if !params.nontrivial() {
        return Err(Error::InvalidArgument(
            "p requires (s, t) != (0, 0); the constant kernel is not strictly decreasing"
                .to_string(),
        ));
    }
    check_open_unit(x, "p argument")?;
    Ok(pow_log_product(params.s, params.t, x))
}

/// First derivative `k'(d) = -d^{-(s+1)} (log(1/d))^{t-1} (s log(1/d) + t)`;
/// nonpositive on `(0, 1)`. Used for Lipschitz bounds on grids.
pub fn kernel_derivative(params: KernelParams, d: f64) -> Result<f64> {
    check_open_unit(d, "distance")?;
    let (s, t) = (params.s, params.t);
    let l = -d.ln();
    let log_part = if t == 1.0 { 1.0 } else { l.powf(t - 1.0) };
    Ok(-d.powf(-(s + 1.0)) * log_part * (s * l + t))
}

/// Second derivative of `p` at `x`:
/// `x^{-(s+2)} (log(1/x))^{t-2} [(t-1)t + (t + 2st) log(1/x) + s(1+s) log^2(1/x)]`.
/// Positive whenever `t >= 1`, and on `(0, e^{-1})` for any nontrivial
/// exponents; those are the convexity certificates behind the circle
/// optimality checks.
pub fn k2_geodesic(params: KernelParams, x: f64) -> Result<f64> {
    check_open_unit(x, "k2 argument")?;
    let (s, t) = (params.s, params.t);
    let l = -x.ln();
    let poly = (t - 1.0) * t + (t + 2.0 * s * t) * l + s * (1.0 + s) * l * l;
    Ok(x.powf(-(s + 2.0)) * l.powf(t - 2.0) * poly)
}

/// Second derivative of `q(x) = p(2 alpha sin x)` on the substituted angle
/// domain `(0, pi/2)`; requires `t >= 1` and `0 < alpha < 1/2`, the regime
/// where it is provably positive.
pub fn k2_chord(params: KernelParams, alpha: f64, x: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha >= 0.5 {
        return Err(Error::InvalidArgument(format!(
            "chord convexity certificate requires 0 < alpha < 1/2, got {alpha}"
        )));
    }
    if params.t < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "chord convexity certificate requires t >= 1, got t={}",
            params.t
        )));
    }
    if !(x > 0.0) || x >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::Domain(format!(
            "angle must lie in (0, pi/2), got {x}"
        )));
    }
    let (s, t) = (params.s, params.t);
    let (sin, cos) = (x.sin(), x.cos());
    let u = 2.0 * alpha * sin;
    let l = -u.ln();
    let cot2 = (cos / sin) * (cos / sin);
    let csc2 = 1.0 / (sin * sin);
    let slt = s * l + t;
    let lt1 = l.powf(t - 1.0);
    let lt2 = l.powf(t - 2.0);
    let term1 = s * cot2 * lt1;
    let term2 = (t - 1.0) * cot2 * lt2 * slt;
    let term3 = (csc2 + s * cot2) * lt1 * slt;
    Ok(u.powf(-s) * (term1 + term2 + term3))
}

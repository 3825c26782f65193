//! Compact metric spaces of diameter strictly below one: a segment, a circle
//! under geodesic or chord metric, a sphere under the chord metric, and finite
//! spaces given by an explicit distance matrix (used as discretization grids
//! and as oracle ground truth).
//!
//! Points are flat `f64` slices: `[x]` on a segment, an angle `[theta]` in
//! `[0, 2pi)` on a circle, ambient `[x, y, z]` on a sphere, and an index `[i]`
//! on a finite space.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strict margin keeping every diameter below one; guards the nested
/// logarithm `log(log(1/d))` from blowing up as d approaches 1.
pub const DIAMETER_MARGIN: f64 = 1e-9;

const MAX_DIAMETER: f64 = 1.0 - DIAMETER_MARGIN;

/// Distance convention on a circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Length of the shorter arc.
    Geodesic,
    /// Straight-line (Euclidean) distance between the two circle points.
    Chord,
}

/// A finite metric space given by an explicit symmetric distance matrix;
/// points are indices.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    m: usize,
    dist: Vec<f64>,
    diameter: f64,
    /// Upper bound on how much any single pairwise distance can change when
    /// both endpoints snap to this grid, when the space discretizes a
    /// continuous one (twice the covering radius; estimated for the sphere).
    mesh: Option<f64>,
    label: String,
}

impl FiniteSpace {
    pub fn size(&self) -> usize {
        self.m
    }

    pub fn dist_idx(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.m + j]
    }

    pub fn mesh(&self) -> Option<f64> {
        self.mesh
    }

    /// Attaches a mesh bound to a matrix that was loaded externally.
    pub fn set_mesh(&mut self, mesh: f64) -> Result<()> {
        if !mesh.is_finite() || !(mesh > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mesh must be a positive real, got {mesh}"
            )));
        }
        self.mesh = Some(mesh);
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

#[derive(Debug, Clone)]
pub enum Space {
    Segment { a: f64, b: f64 },
    Circle { alpha: f64, kind: MetricKind },
    Sphere { alpha: f64 },
    Finite(FiniteSpace),
}

/// Serializable description of a space; rebuilds the space on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpaceSpec {
    Segment { a: f64, b: f64 },
    Circle { alpha: f64, metric: MetricKind },
    Sphere { alpha: f64 },
    Finite {
        label: String,
        mesh: Option<f64>,
        dist: Vec<Vec<f64>>,
    },
}

impl SpaceSpec {
    pub fn build(&self) -> Result<Space> {
        match self {
            SpaceSpec::Segment { a, b } => Space::segment(*a, *b),
            SpaceSpec::Circle { alpha, metric } => Space::circle(*alpha, *metric),
            SpaceSpec::Sphere { alpha } => Space::sphere(*alpha),
            SpaceSpec::Finite { label, mesh, dist } => {
                let mut space = Space::finite_labeled(dist.clone(), label.clone())?;
                if let Space::Finite(f) = &mut space {
                    f.mesh = *mesh;
                }
                Ok(space)
            }
        }
    }
}

fn require_finite(v: f64, what: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::InvalidArgument(format!("{what} must be finite, got {v}")));
    }
    Ok(())
}

impl Space {
    pub fn segment(a: f64, b: f64) -> Result<Self> {
        require_finite(a, "segment endpoint a")?;
        require_finite(b, "segment endpoint b")?;
        if !(a < b) {
            return Err(Error::InvalidSpace(format!(
                "segment needs a < b, got a={a}, b={b}"
            )));
        }
        if b - a > MAX_DIAMETER {
            return Err(Error::InvalidSpace(format!(
                "segment diameter {} is not strictly below 1 (margin {DIAMETER_MARGIN})",
                b - a
            )));
        }
        Ok(Space::Segment { a, b })
    }

    pub fn circle(alpha: f64, kind: MetricKind) -> Result<Self> {
        require_finite(alpha, "circle radius")?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "circle radius must be positive, got {alpha}"
            )));
        }
        match kind {
            MetricKind::Geodesic if PI * alpha > MAX_DIAMETER => {
                return Err(Error::InvalidSpace(format!(
                    "geodesic circle requires alpha < 1/pi so the antipodal arc pi*alpha = {} \
                     stays below 1",
                    PI * alpha
                )));
            }
            MetricKind::Chord if 2.0 * alpha > MAX_DIAMETER => {
                return Err(Error::InvalidSpace(format!(
                    "chord circle requires alpha < 1/2 so the antipodal chord 2*alpha = {} \
                     stays below 1",
                    2.0 * alpha
                )));
            }
            _ => {}
        }
        Ok(Space::Circle { alpha, kind })
    }

    pub fn sphere(alpha: f64) -> Result<Self> {
        require_finite(alpha, "sphere radius")?;
        if !(alpha > 0.0) {
            return Err(Error::InvalidSpace(format!(
                "sphere radius must be positive, got {alpha}"
            )));
        }
        if 2.0 * alpha > MAX_DIAMETER {
            return Err(Error::InvalidSpace(format!(
                "sphere requires alpha < 1/2 so the antipodal chord 2*alpha = {} stays below 1",
                2.0 * alpha
            )));
        }
        Ok(Space::Sphere { alpha })
    }

    pub fn finite(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::finite_labeled(rows, "finite".to_string())
    }

    pub fn finite_labeled(rows: Vec<Vec<f64>>, label: String) -> Result<Self> {
        let m = rows.len();
        if m < 2 {
            return Err(Error::InvalidSpace(format!(
                "finite space needs at least 2 points, got {m}"
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidSpace(format!(
                    "distance matrix row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
        }
        let mut dist = vec![0.0; m * m];
        let mut diameter: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let v = rows[i][j];
                if !v.is_finite() || v < 0.0 || v > MAX_DIAMETER {
                    return Err(Error::InvalidSpace(format!(
                        "entry d[{i}][{j}] = {v} must lie in [0, 1) with margin {DIAMETER_MARGIN}"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "diagonal entry d[{i}][{i}] = {v} must be 0"
                    )));
                }
                if i != j && v == 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "off-diagonal entry d[{i}][{j}] is 0; distinct points must be separated"
                    )));
                }
                if rows[j][i] != v {
                    return Err(Error::InvalidSpace(format!(
                        "asymmetry: d[{i}][{j}] = {v} but d[{j}][{i}] = {}",
                        rows[j][i]
                    )));
                }
                dist[i * m + j] = v;
                diameter = diameter.max(v);
            }
        }
        // Triangle inequality with a tiny absolute slack for decimal rounding
        // in hand-written matrices.
        for i in 0..m {
            for j in 0..m {
                let dij = dist[i * m + j];
                for k in 0..m {
                    if dist[i * m + k] > dij + dist[j * m + k] + 1e-12 {
                        return Err(Error::InvalidSpace(format!(
                            "triangle inequality fails on ({i},{j},{k}): d[{i}][{k}] = {} > \
                             d[{i}][{j}] + d[{j}][{k}] = {}",
                            dist[i * m + k],
                            dij + dist[j * m + k]
                        )));
                    }
                }
            }
        }
        Ok(Space::Finite(FiniteSpace {
            m,
            dist,
            diameter,
            mesh: None,
            label,
        }))
    }

    /// Trusted constructor for internally computed grids: the distances come
    /// from a metric space, so only the diameter is re-checked.
    fn finite_trusted(m: usize, dist: Vec<f64>, mesh: f64, label: String) -> Result<Self> {
        let diameter = dist.iter().cloned().fold(0.0f64, f64::max);
        if diameter > MAX_DIAMETER {
            return Err(Error::InvalidSpace(format!(
                "grid diameter {diameter} is not strictly below 1"
            )));
        }
        Ok(Space::Finite(FiniteSpace {
            m,
            dist,
            diameter,
            mesh: Some(mesh),
            label,
        }))
    }

    /// Loads a finite space from a CSV distance matrix (row-major, decimal,
    /// optional header row). Runs the full axiom validation.
    pub fn finite_from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            let mut numeric = true;
            for field in line.split(',') {
                match field.trim().parse::<f64>() {
                    Ok(v) => row.push(v),
                    Err(_) => {
                        numeric = false;
                        break;
                    }
                }
            }
            if !numeric {
                if rows.is_empty() {
                    continue; // header row
                }
                return Err(Error::Parse(format!(
                    "line {}: non-numeric field in distance matrix",
                    lineno + 1
                )));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("no numeric rows in distance matrix".to_string()));
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "csv".to_string());
        Self::finite_labeled(rows, label)
    }

    pub fn id(&self) -> String {
        match self {
            Space::Segment { a, b } => format!("segment({a},{b})"),
            Space::Circle { alpha, kind } => match kind {
                MetricKind::Geodesic => format!("circle-geo({alpha})"),
                MetricKind::Chord => format!("circle-chord({alpha})"),
            },
            Space::Sphere { alpha } => format!("sphere({alpha})"),
            Space::Finite(f) => format!("finite({},m={})", f.label, f.m),
        }
    }

    pub fn spec(&self) -> SpaceSpec {
        match self {
            Space::Segment { a, b } => SpaceSpec::Segment { a: *a, b: *b },
            Space::Circle { alpha, kind } => SpaceSpec::Circle {
                alpha: *alpha,
                metric: *kind,
            },
            Space::Sphere { alpha } => SpaceSpec::Sphere { alpha: *alpha },
            Space::Finite(f) => {
                let mut rows = Vec::with_capacity(f.m);
                for i in 0..f.m {
                    rows.push(f.dist[i * f.m..(i + 1) * f.m].to_vec());
                }
                SpaceSpec::Finite {
                    label: f.label.clone(),
                    mesh: f.mesh,
                    dist: rows,
                }
            }
        }
    }

    /// Coordinates per point.
    pub fn param_len(&self) -> usize {
        match self {
            Space::Segment { .. } | Space::Circle { .. } | Space::Finite(_) => 1,
            Space::Sphere { .. } => 3,
        }
    }

    /// Intrinsic dimension of the parameter domain.
    pub fn dim(&self) -> usize {
        match self {
            Space::Segment { .. } | Space::Circle { .. } => 1,
            Space::Sphere { .. } => 2,
            Space::Finite(_) => 0,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Segment { a, b } => b - a,
            Space::Circle { alpha, kind } => match kind {
                MetricKind::Geodesic => PI * alpha,
                MetricKind::Chord => 2.0 * alpha,
            },
            Space::Sphere { alpha } => 2.0 * alpha,
            Space::Finite(f) => f.diameter,
        }
    }

    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Space::Segment { .. } => (x[0] - y[0]).abs(),
            Space::Circle { alpha, kind } => {
                // |x - y| first so d(x, y) == d(y, x) bitwise.
                let delta = (x[0] - y[0]).abs().rem_euclid(TAU);
                let gap = delta.min(TAU - delta);
                match kind {
                    MetricKind::Geodesic => alpha * gap,
                    MetricKind::Chord => 2.0 * alpha * (gap / 2.0).sin(),
                }
            }
            Space::Sphere { .. } => {
                let dx = x[0] - y[0];
                let dy = x[1] - y[1];
                let dz = x[2] - y[2];
                (dx * dx + dy * dy + dz * dz).sqrt()
            }
            Space::Finite(f) => f.dist_idx(x[0] as usize, y[0] as usize),
        }
    }

    pub fn is_valid_point(&self, x: &[f64]) -> bool {
        if x.len() != self.param_len() {
            return false;
        }
        match self {
            Space::Segment { a, b } => x[0].is_finite() && x[0] >= *a && x[0] <= *b,
            Space::Circle { .. } => x[0].is_finite() && x[0] >= 0.0 && x[0] < TAU,
            Space::Sphere { alpha } => {
                let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                norm.is_finite() && (norm - alpha).abs() <= 1e-9 * alpha
            }
            Space::Finite(f) => {
                x[0].is_finite() && x[0] >= 0.0 && x[0] < f.m as f64 && x[0].fract() == 0.0
            }
        }
    }

    /// Maps a raw parameter vector to a valid point, in place. Idempotent.
    pub fn retract(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.param_len());
        match self {
            Space::Segment { a, b } => {
                x[0] = if x[0].is_finite() { x[0].clamp(*a, *b) } else { *a };
            }
            Space::Circle { .. } => {
                let mut v = if x[0].is_finite() { x[0].rem_euclid(TAU) } else { 0.0 };
                // rem_euclid of a tiny negative rounds up to exactly 2pi.
                if v >= TAU {
                    v = 0.0;
                }
                x[0] = v;
            }
            Space::Sphere { alpha } => {
                let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if !norm.is_finite() || norm == 0.0 {
                    x[0] = 0.0;
                    x[1] = 0.0;
                    x[2] = *alpha;
                } else if (norm - alpha).abs() <= 1e-12 * alpha {
                    // Already on the sphere: leave the point untouched so the
                    // retraction is exactly idempotent.
                } else {
                    let scale = alpha / norm;
                    x[0] *= scale;
                    x[1] *= scale;
                    x[2] *= scale;
                }
            }
            Space::Finite(f) => {
                let v = if x[0].is_finite() { x[0].round() } else { 0.0 };
                x[0] = v.clamp(0.0, (f.m - 1) as f64);
            }
        }
    }

    /// Draws a uniform-ish point from the explicit generator, writing into
    /// `out`.
    pub fn sample_point(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.param_len());
        match self {
            Space::Segment { a, b } => out[0] = rng.gen_range(*a..*b),
            Space::Circle { .. } => out[0] = rng.gen_range(0.0..TAU),
            Space::Sphere { alpha } => loop {
                let v: [f64; 3] = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if norm > 1e-12 {
                    out[0] = v[0] * alpha / norm;
                    out[1] = v[1] * alpha / norm;
                    out[2] = v[2] * alpha / norm;
                    break;
                }
            },
            Space::Finite(f) => out[0] = rng.gen_range(0..f.m) as f64,
        }
    }

    /// Builds an `m`-point grid over a continuous space as a finite space
    /// carrying its mesh bound. Segment grids include both endpoints; circle
    /// grids are equally spaced angles; sphere grids use a Fibonacci lattice
    /// whose mesh is estimated by dense sampling (factor-2 safety).
    pub fn discretize(&self, m: usize) -> Result<Space> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid needs at least 2 points, got {m}"
            )));
        }
        let points: Vec<Vec<f64>> = match self {
            Space::Segment { a, b } => {
                let step = (b - a) / (m - 1) as f64;
                (0..m).map(|k| vec![a + step * k as f64]).collect()
            }
            Space::Circle { .. } => (0..m).map(|k| vec![TAU * k as f64 / m as f64]).collect(),
            Space::Sphere { alpha } => (0..m)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / m as f64;
                    let r = (1.0 - z * z).sqrt();
                    let phi = PI * (1.0 + 5.0f64.sqrt()) * k as f64;
                    vec![alpha * r * phi.cos(), alpha * r * phi.sin(), alpha * z]
                })
                .collect(),
            Space::Finite(_) => {
                return Err(Error::InvalidArgument(
                    "cannot discretize a finite space".to_string(),
                ))
            }
        };
        let mesh = match self {
            Space::Segment { a, b } => (b - a) / (m - 1) as f64,
            Space::Circle { alpha, .. } => 2.0 * alpha * PI / m as f64,
            Space::Sphere { .. } => 2.0 * self.covering_radius_estimate(&points),
            Space::Finite(_) => unreachable!(),
        };
        let mut dist = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = self.distance(&points[i], &points[j]);
                dist[i * m + j] = d;
                dist[j * m + i] = d;
            }
        }
        Space::finite_trusted(m, dist, mesh, format!("{}#grid{m}", self.id()))
    }

    /// Estimated covering radius of a sphere grid: max over a denser probe
    /// lattice of the distance to the nearest grid point, doubled for safety.
    fn covering_radius_estimate(&self, points: &[Vec<f64>]) -> f64 {
        let alpha = match self {
            Space::Sphere { alpha } => *alpha,
            _ => unreachable!(),
        };
        let probes = (points.len() * 16).max(2048);
        let mut worst: f64 = 0.0;
        for k in 0..probes {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / probes as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = PI * (1.0 + 5.0f64.sqrt()) * k as f64 + 0.37;
            let probe = [alpha * r * phi.cos(), alpha * r * phi.sin(), alpha * z];
            let nearest = points
                .iter()
                .map(|p| self.distance(&probe, p))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
        2.0 * worst
    }
}

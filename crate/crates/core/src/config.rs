//! N-point configurations, their separation distance, and the sorted
//! pairwise-distance signature used to compare configurations up to isometry
//! and relabeling.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::Space;

/// An ordered list of N valid points in a space, N >= 2.
#[derive(Debug, Clone)]
pub struct Configuration {
    space: Arc<Space>,
    points: Vec<Vec<f64>>,
}

/// Ascending vector of all N(N-1)/2 pairwise distances; invariant under
/// isometries of the space and relabeling of the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature(Vec<f64>);

impl Signature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.clone()
    }
}

impl Configuration {
    pub fn new(space: Arc<Space>, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidConfiguration(format!(
                "a configuration needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !space.is_valid_point(p) {
                return Err(Error::InvalidConfiguration(format!(
                    "point {i} = {p:?} is not a valid point of {}",
                    space.id()
                )));
            }
        }
        Ok(Self { space, points })
    }

    /// Builds from raw parameter vectors by retracting each point first.
    pub fn from_raw(space: Arc<Space>, mut points: Vec<Vec<f64>>) -> Result<Self> {
        for p in points.iter_mut() {
            if p.len() != space.param_len() {
                return Err(Error::InvalidConfiguration(format!(
                    "point has {} coordinates, expected {}",
                    p.len(),
                    space.param_len()
                )));
            }
            space.retract(p);
        }
        Self::new(space, points)
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Pairwise distances in fixed enumeration order (i < j, row-major).
    pub fn pair_distances(&self) -> Vec<f64> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.space.distance(&self.points[i], &self.points[j]));
            }
        }
        out
    }

    /// Smallest pairwise distance; 0 iff two points coincide.
    pub fn separation(&self) -> f64 {
        self.pair_distances()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn signature(&self) -> Signature {
        let mut d = self.pair_distances();
        d.sort_by(f64::total_cmp);
        Signature(d)
    }

    pub fn doc(&self) -> ConfigurationDoc {
        ConfigurationDoc {
            space_id: self.space.id(),
            n: self.n(),
            points: self.points.clone(),
            signature: self.signature().to_vec(),
            separation: self.separation(),
        }
    }

    /// Rebuilds a configuration from its serialized document, revalidating
    /// the points and checking the recorded signature against a fresh one.
    pub fn from_doc(space: Arc<Space>, doc: &ConfigurationDoc) -> Result<Self> {
        if doc.n != doc.points.len() {
            return Err(Error::InvalidConfiguration(format!(
                "document says n={} but carries {} points",
                doc.n,
                doc.points.len()
            )));
        }
        let config = Self::new(space, doc.points.clone())?;
        let sig = config.signature();
        if sig.len() != doc.signature.len() {
            return Err(Error::InvalidConfiguration(
                "recorded signature has the wrong length".to_string(),
            ));
        }
        for (a, b) in sig.as_slice().iter().zip(doc.signature.iter()) {
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::InvalidConfiguration(format!(
                    "recorded signature entry {b} disagrees with recomputed {a}"
                )));
            }
        }
        Ok(config)
    }
}

/// Serialized form of a configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigurationDoc {
    pub space_id: String,
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub signature: Vec<f64>,
    pub separation: f64,
}

/// L-infinity distance between two signatures of equal length; a pseudometric
/// that vanishes on isometric configurations.
pub fn config_distance(a: &Signature, b: &Signature) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::SignatureMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Matched-point L-infinity distance for one-dimensional spaces: compares the
/// sorted coordinate lists directly. Signatures are blind to reflection pairs
/// on a segment; this supplements them where point-wise convergence matters.
pub fn config_distance_matched(a: &Configuration, b: &Configuration) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::SignatureMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    if a.space().param_len() != 1 || b.space().param_len() != 1 {
        return Err(Error::InvalidArgument(
            "matched-point comparison is defined for one-coordinate spaces only".to_string(),
        ));
    }
    let mut xa: Vec<f64> = a.points().iter().map(|p| p[0]).collect();
    let mut xb: Vec<f64> = b.points().iter().map(|p| p[0]).collect();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    Ok(xa
        .iter()
        .zip(xb.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// N equally spaced angles `phase + 2 pi k / N` on a circle.
pub fn equally_spaced(space: &Arc<Space>, n: usize, phase: f64) -> Result<Configuration> {
    match **space {
        Space::Circle { .. } => {}
        _ => {
            return Err(Error::InvalidArgument(format!(
                "equally spaced configurations require a circle, got {}",
                space.id()
            )))
        }
    }
    if n < 2 {
        return Err(Error::InvalidConfiguration(format!(
            "a configuration needs at least 2 points, got {n}"
        )));
    }
    let points = (0..n)
        .map(|k| vec![phase + TAU * k as f64 / n as f64])
        .collect();
    Configuration::from_raw(Arc::clone(space), points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn segment() -> Arc<Space> {
        Arc::new(Space::segment(0.0, 0.9).unwrap())
    }

    fn geo_circle(alpha: f64) -> Arc<Space> {
        Arc::new(Space::circle(alpha, MetricKind::Geodesic).unwrap())
    }

    #[test]
    fn separation_examples() {
        let cfg = Configuration::new(
            segment(),
            vec![vec![0.1], vec![0.3], vec![0.8]],
        )
        .unwrap();
        assert_relative_eq!(cfg.separation(), 0.2, max_relative = 1e-14);

        let eq5 = equally_spaced(&geo_circle(0.1), 5, 0.0).unwrap();
        assert_relative_eq!(eq5.separation(), TAU * 0.1 / 5.0, max_relative = 1e-13);

        let dup = Configuration::new(segment(), vec![vec![0.2], vec![0.2]]).unwrap();
        assert_eq!(dup.separation(), 0.0);
    }

    #[test]
    fn signature_examples() {
        let eq3 = equally_spaced(&geo_circle(0.1), 3, 0.0).unwrap();
        let sig = eq3.signature();
        let expect = TAU * 0.1 / 3.0;
        for v in sig.as_slice() {
            assert_relative_eq!(*v, expect, max_relative = 1e-12);
        }

        let eq4 = equally_spaced(&geo_circle(0.1), 4, 0.0).unwrap();
        let sig = eq4.signature();
        let quarter = PI * 0.1 / 2.0;
        let half = PI * 0.1;
        assert_eq!(sig.len(), 6);
        for v in &sig.as_slice()[..4] {
            assert_relative_eq!(*v, quarter, max_relative = 1e-12);
        }
        for v in &sig.as_slice()[4..] {
            assert_relative_eq!(*v, half, max_relative = 1e-12);
        }

        // Separation equals the first signature entry.
        assert_eq!(eq4.separation(), sig.as_slice()[0]);
    }

    #[test]
    fn signature_rotation_invariant() {
        let space = geo_circle(0.1);
        let base = equally_spaced(&space, 4, 0.0).unwrap();
        let rotated = equally_spaced(&space, 4, 1.234).unwrap();
        let d = config_distance(&base.signature(), &rotated.signature()).unwrap();
        assert!(d <= 1e-12, "rotation changed the signature by {d}");
    }

    #[test]
    fn config_distance_examples() {
        let space = geo_circle(0.1);
        let a = equally_spaced(&space, 3, 0.0).unwrap();
        assert_eq!(config_distance(&a.signature(), &a.signature()).unwrap(), 0.0);

        // One point perturbed by angle 1e-3 moves the signature by at most
        // alpha * 1e-3 per affected arc distance, so 2e-4 overall.
        let mut pts = a.points().to_vec();
        pts[1][0] += 1e-3;
        let b = Configuration::from_raw(Arc::clone(&space), pts).unwrap();
        let d = config_distance(&a.signature(), &b.signature()).unwrap();
        assert!(d <= 2.0 * 0.1 * 1e-3 + 1e-15, "{d}");

        let anti = Configuration::new(Arc::clone(&space), vec![vec![0.0], vec![PI]]).unwrap();
        let quarter =
            Configuration::new(Arc::clone(&space), vec![vec![0.0], vec![PI / 2.0]]).unwrap();
        let d = config_distance(&anti.signature(), &quarter.signature()).unwrap();
        assert_relative_eq!(d, PI * 0.1 / 2.0, max_relative = 1e-12);

        let n2 = anti.signature();
        let n3 = equally_spaced(&space, 3, 0.0).unwrap().signature();
        assert!(config_distance(&n2, &n3).is_err());
    }

    #[test]
    fn matched_distance_on_segment() {
        let s = segment();
        let a = Configuration::new(
            Arc::clone(&s),
            vec![vec![0.0], vec![0.45], vec![0.9]],
        )
        .unwrap();
        let b = Configuration::new(
            Arc::clone(&s),
            vec![vec![0.9], vec![0.0], vec![0.46]],
        )
        .unwrap();
        assert_relative_eq!(
            config_distance_matched(&a, &b).unwrap(),
            0.01,
            max_relative = 1e-10
        );
        let sphere = Arc::new(Space::sphere(0.3).unwrap());
        let c = Configuration::new(
            Arc::clone(&sphere),
            vec![vec![0.0, 0.0, 0.3], vec![0.0, 0.0, -0.3]],
        )
        .unwrap();
        assert!(config_distance_matched(&c, &c).is_err());
    }

    #[test]
    fn equally_spaced_examples() {
        let space = geo_circle(0.1);
        let eq4 = equally_spaced(&space, 4, 0.0).unwrap();
        let angles: Vec<f64> = eq4.points().iter().map(|p| p[0]).collect();
        let expect = [0.0, PI / 2.0, PI, 3.0 * PI / 2.0];
        for (a, e) in angles.iter().zip(expect.iter()) {
            assert_relative_eq!(*a, *e, max_relative = 1e-14, epsilon = 1e-14);
        }
        let eq2 = equally_spaced(&space, 2, 0.7).unwrap();
        assert_relative_eq!(eq2.separation(), space.diameter(), max_relative = 1e-12);
        assert!(equally_spaced(&segment(), 3, 0.0).is_err());
        assert!(equally_spaced(&space, 1, 0.0).is_err());
    }

    #[test]
    fn rejects_invalid_points() {
        assert!(Configuration::new(segment(), vec![vec![0.1]]).is_err());
        assert!(Configuration::new(segment(), vec![vec![0.1], vec![1.5]]).is_err());
        assert!(Configuration::new(segment(), vec![vec![0.1], vec![0.2, 0.3]]).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let space = geo_circle(0.1);
        let cfg = equally_spaced(&space, 4, 0.3).unwrap();
        let doc = cfg.doc();
        let json = serde_json::to_string(&doc).unwrap();
        let back: ConfigurationDoc = serde_json::from_str(&json).unwrap();
        let rebuilt = Configuration::from_doc(Arc::clone(&space), &back).unwrap();
        assert_eq!(
            config_distance(&cfg.signature(), &rebuilt.signature()).unwrap(),
            0.0
        );

        let mut tampered = cfg.doc();
        tampered.signature[0] += 0.1;
        assert!(Configuration::from_doc(Arc::clone(&space), &tampered).is_err());
    }

    #[test]
    fn signature_permutation_invariant() {
        let space = geo_circle(0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let mut pts = Vec::new();
            for _ in 0..5 {
                let mut p = vec![0.0];
                space.sample_point(&mut rng, &mut p);
                pts.push(p);
            }
            let cfg = Configuration::new(Arc::clone(&space), pts.clone()).unwrap();
            pts.shuffle(&mut rng);
            let shuffled = Configuration::new(Arc::clone(&space), pts).unwrap();
            assert_eq!(
                config_distance(&cfg.signature(), &shuffled.signature()).unwrap(),
                0.0
            );
        }
    }

    proptest! {
        #[test]
        fn config_distance_pseudometric(
            seed in 0u64..1000,
        ) {
            let space = geo_circle(0.1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sample = || {
                let mut pts = Vec::new();
                for _ in 0..4 {
                    let mut p = vec![0.0];
                    space.sample_point(&mut rng, &mut p);
                    pts.push(p);
                }
                Configuration::new(Arc::clone(&space), pts).unwrap().signature()
            };
            let (a, b, c) = (sample(), sample(), sample());
            let dab = config_distance(&a, &b).unwrap();
            let dba = config_distance(&b, &a).unwrap();
            let dac = config_distance(&a, &c).unwrap();
            let dcb = config_distance(&c, &b).unwrap();
            prop_assert!((dab - dba).abs() <= 1e-15);
            prop_assert!(dab <= dac + dcb + 1e-12);
        }
    }
}

//! Seeded rejection sampling of admissible points.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Point;

/// Default distance kept from singular loci, in catalog units.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Minimum acceptance rate before sampling gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BBox {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl BBox {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        BBox { x0, x1, y0, y1 }
    }

    pub fn square(half: f64) -> Self {
        BBox::new(-half, half, -half, half)
    }

    pub fn is_nonempty(&self) -> bool {
        self.x1 > self.x0 && self.y1 > self.y0
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

pub type Clearance = dyn Fn(Point) -> f64 + Send + Sync;

/// A sampling domain: a bounding box plus the distance of each point to the
/// nearest singular locus (negative outside the admissible region).
#[derive(Clone)]
pub struct Domain {
    pub bbox: BBox,
    clearance: Arc<Clearance>,
}

impl Domain {
    pub fn new(bbox: BBox, clearance: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Domain {
            bbox,
            clearance: Arc::new(clearance),
        }
    }

    /// The whole box, no singular loci.
    pub fn plane(bbox: BBox) -> Self {
        Domain::new(bbox, |_| f64::INFINITY)
    }

    pub fn with_bbox(&self, bbox: BBox) -> Self {
        Domain {
            bbox,
            clearance: self.clearance.clone(),
        }
    }

    pub fn clearance(&self, p: Point) -> f64 {
        (self.clearance)(p)
    }

    pub fn admissible(&self, p: Point, margin: f64) -> bool {
        p.is_finite() && self.clearance(p) >= margin
    }
}

impl std::fmt::Debug for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Domain").field("bbox", &self.bbox).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSet {
    pub seed: u64,
    pub margin: f64,
    pub points: Vec<Point>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.points.iter()
    }
}

/// Draws `count` uniform points from the box that keep `margin` clearance.
pub fn sample_domain(domain: &Domain, count: usize, seed: u64, margin: f64) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let b = domain.bbox;
    if !b.is_nonempty() {
        return Err(Error::Precondition("sampling box is empty".into()));
    }
    let max_attempts = ((count as f64 / MIN_ACCEPTANCE).ceil() as usize).max(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0;
    while points.len() < count {
        if attempts >= max_attempts {
            return Err(Error::Sampling {
                requested: count,
                accepted: points.len(),
                attempts,
            });
        }
        attempts += 1;
        let p = Point::new(rng.gen_range(b.x0..=b.x1), rng.gen_range(b.y0..=b.y1));
        if domain.admissible(p, margin) {
            points.push(p);
        }
    }
    Ok(SampleSet {
        seed,
        margin,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampling_is_deterministic() {
        let d = Domain::plane(BBox::square(1.0));
        let a = sample_domain(&d, 4, 7, 0.0).unwrap();
        let b = sample_domain(&d, 4, 7, 0.0).unwrap();
        assert_eq!(a.len(), 4);
        for (p, q) in a.iter().zip(b.iter()) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        let c = sample_domain(&d, 4, 8, 0.0).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn margin_is_enforced() {
        let d = Domain::new(BBox::square(1.0), |p| p.x);
        let s = sample_domain(&d, 100, 3, 0.1).unwrap();
        assert!(s.iter().all(|p| p.x >= 0.1));
    }

    #[test]
    fn thin_domain_fails() {
        let d = Domain::new(BBox::square(1.0), |p| 1e-6 - p.x.abs());
        let err = sample_domain(&d, 10, 1, 0.0).unwrap_err();
        assert!(matches!(err, Error::Sampling { .. }));
    }

    #[test]
    fn empty_requests_are_rejected() {
        let d = Domain::plane(BBox::square(1.0));
        assert!(sample_domain(&d, 0, 1, 0.0).is_err());
        let flat = Domain::plane(BBox::new(0.0, 0.0, -1.0, 1.0));
        assert!(sample_domain(&flat, 1, 1, 0.0).is_err());
    }
}
